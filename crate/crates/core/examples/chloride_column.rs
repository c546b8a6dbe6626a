//! One-dimensional chloride column against the erfc solution.

use corrosion_crack::chem::TransportDomain;
use corrosion_crack::driver::{Preset, Scenario};
use corrosion_crack::fem::Geometry;
use corrosion_crack::mesh::{Mesh, Side};
use corrosion_crack::state::FieldState;
use statrs::function::erf::erfc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let length = 0.1;
    let mut mesh = Mesh::rectangle(length, 1e-3, 200, 1)?;
    mesh.expose_sides(&[Side::Left])?;
    let geometry = Geometry::new(&mesh);
    let mut domain = TransportDomain::new(&mesh, &geometry);

    // no binding, so the free chlorides follow plain diffusion
    let mut p = Scenario::preset(Preset::Chen2020).transport;
    p.binding_rate = 0.0;
    let d = p.d_chloride / p.porosity;
    let c_surface = 500.0;

    let mut state = FieldState::new(&mesh, p.porosity, 0, 0.0);
    let dt = 86_400.0;
    for _ in 0..180 {
        domain.step_chlorides(&mut state, dt, &p, c_surface, false)?;
        state.time += dt;
    }

    let t = state.time;
    println!("{:>8} {:>12} {:>12}", "x (mm)", "FEM", "erfc");
    for (v, x) in mesh.nodes.iter().enumerate().filter(|(_, x)| x[1] == 0.0).step_by(10).take(12) {
        let exact = c_surface * erfc(x[0] / (2.0 * (d * t).sqrt()));
        println!("{:>8.2} {:>12.4} {:>12.4}", x[0] * 1e3, state.c_free[v], exact);
    }
    Ok(())
}
