//! Reading a Gmsh 2.2 ASCII file with tagged physical groups.

use corrosion_crack::mesh::read_msh;

const SQUARE: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
4
1 1 \"gamma_cc\"
1 2 \"gamma_cf\"
1 3 \"gamma_us\"
2 4 \"concrete\"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 0.1 0 0
3 0.1 0.1 0
4 0 0.1 0
$EndNodes
$Elements
7
1 1 2 1 1 3 4
2 1 2 3 1 3 4
3 1 2 2 1 1 2
4 1 2 2 1 2 3
5 1 2 2 1 4 1
6 2 2 4 1 1 2 3
7 2 2 4 1 1 3 4
$EndElements
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = read_msh(SQUARE.as_bytes())?;
    println!("nodes {}, triangles {}", mesh.num_nodes(), mesh.num_triangles());
    println!("exposed edges {:?}", mesh.boundaries.chloride_exposed);
    println!("sealed edges {:?}", mesh.boundaries.sealed);
    println!("upper surface {:?}", mesh.boundaries.upper_surface);
    Ok(())
}
