//! Precipitation eigenstrain of rust filling the pore space.

use corrosion_crack::driver::{Preset, Scenario};
use corrosion_crack::mech::{eigenstrain, expansion_coefficient, expansion_ratio};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::preset(Preset::Chen2020);
    let mech = s.mech_params();
    let porosity = s.transport.porosity;
    println!("rust/iron volume ratio {:.3}", expansion_ratio(&mech));
    println!("{:>6} {:>10} {:>12}", "S_p", "C", "eps_*");
    for s_p in [0.0, 0.1, 0.2, 0.3, 0.5] {
        let theta_p = s_p * porosity;
        let c = expansion_coefficient(theta_p, &mech)?;
        let eps = eigenstrain(s_p, theta_p, &mech)?;
        println!("{s_p:>6.2} {c:>10.5} {:>12.4e}", eps.xx);
    }
    Ok(())
}
