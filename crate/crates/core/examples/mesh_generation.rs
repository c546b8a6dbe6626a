//! O-grid mesh of a reinforced section, written as VTK.

use corrosion_crack::mesh::{generate_ogrid, OGridSpec, Side};
use corrosion_crack::post::write_vtk;
use corrosion_crack::driver::{Preset, Scenario};
use corrosion_crack::state::FieldState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut spec = OGridSpec::with_cover(0.1, 0.1, 0.01, 0.02);
    spec.process_zone_length = Some(1e-3);
    let mut mesh = generate_ogrid(&spec)?;
    mesh.expose_sides(&[Side::Top])?;

    let rebar = mesh.rebar().expect("the O-grid meshes the bar");
    let shortest = mesh
        .boundaries
        .steel_interface
        .iter()
        .map(|&e| mesh.edge_length(e))
        .fold(f64::INFINITY, f64::min);
    println!("nodes {}, triangles {}", mesh.num_nodes(), mesh.num_triangles());
    println!("concrete triangles {}", mesh.concrete_triangles().count());
    println!("rebar centre {:?}, radius {:.4} m", rebar.center, rebar.radius);
    println!("shortest interface edge {:.4} mm", shortest * 1e3);

    let p = Scenario::preset(Preset::Chen2020).transport;
    let state = FieldState::new(&mesh, p.porosity, 0, 0.0);
    let path = std::env::temp_dir().join("ogrid.vtk");
    write_vtk(&path, &mesh, &state, &p)?;
    println!("wrote {}", path.display());
    Ok(())
}
