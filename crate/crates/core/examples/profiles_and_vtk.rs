//! Chloride-only run to one year, then a depth profile above the rebar
//! and a VTK snapshot.

use corrosion_crack::driver::{Preset, Scenario, Simulation};
use corrosion_crack::post::{sample_profile, write_vtk, ProfileField, ProfileRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::preset(Preset::Seawater);
    let step = s.time.dt * s.time.initiation_multiplier;
    let mut sim = Simulation::new(s)?;
    while sim.time() < 365.0 * 86_400.0 && !sim.propagating() {
        sim.advance(step, false)?;
    }

    let [x0, _, x1, y1] = sim.mesh.bounding_box();
    let x = 0.5 * (x0 + x1);
    let request = ProfileRequest {
        start: [x, y1],
        end: [x, y1 - 0.03],
        count: 13,
        field: ProfileField::TotalChloride,
    };
    println!("day {:.0}", sim.time() / 86_400.0);
    for (depth, value) in sample_profile(&sim.mesh, &sim.state, &sim.scenario.transport, &request)? {
        match value {
            Some(v) => println!("{:>6.1} mm  C_tot = {v:.4} %", depth * 1e3),
            None => println!("{:>6.1} mm  (steel)", depth * 1e3),
        }
    }
    let path = std::env::temp_dir().join("chlorides.vtk");
    write_vtk(&path, &sim.mesh, &sim.state, &sim.scenario.transport)?;
    println!("wrote {}", path.display());
    Ok(())
}
