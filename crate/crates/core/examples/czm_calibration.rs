//! Cohesive-zone calibration of the degradation function.

use corrosion_crack::driver::{Preset, Scenario};
use corrosion_crack::mech::{czm_calibrate, degradation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for preset in [Preset::Chen2020, Preset::Ye2017] {
        let s = Scenario::preset(preset);
        let mech = s.mech_params();
        let c = czm_calibrate(&mech, mech.length_scale)?;
        println!("{}: l = {:.3} mm, l_ch = {:.1} mm", s.name, c.length * 1e3, c.irwin_length * 1e3);
        println!("  a1 = {:.4}, a2 = {:.4}, a3 = {:.4}", c.a1, c.a2, c.a3);
        println!("  damage threshold {:.1} J/m3", c.history_floor());
        for phi in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (g, dg) = degradation(phi, &c);
            println!("  g({phi:.2}) = {g:.5}, g' = {dg:.5}");
        }
    }
    Ok(())
}
