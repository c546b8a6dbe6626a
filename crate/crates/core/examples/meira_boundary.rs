//! Surface chloride build-up from accumulated salt deposition.

use corrosion_crack::chem::{meira_surface_concentration, total_chloride};
use corrosion_crack::driver::{chen_meira, Preset, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Scenario::preset(Preset::Chen2020).transport;
    let bc = chen_meira();
    println!("{:>8} {:>14} {:>12}", "t (d)", "c_f (mol/m3)", "C_tot (%)");
    for days in [0.0, 30.0, 60.0, 120.0, 180.0, 365.0, 730.0, 1095.0] {
        let c = meira_surface_concentration(days * 86_400.0, &bc, &p);
        // binding equilibrium at the boundary
        let pct = total_chloride(c, p.binding_ratio * c, &p)?;
        println!("{days:>8.0} {c:>14.4} {pct:>12.4}");
    }
    Ok(())
}
