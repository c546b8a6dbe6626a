//! Scenario from a run card with unit-carrying quantities.

use corrosion_crack::driver::{parse_card, Preset};

const CARD: &str = r#"
name = "cover 25 mm, faster corrosion"
mode = "nonuniform"

[geometry]
cover = "25 mm"

[transport]
current_density = "1.5 uA/cm2"
threshold = "0.3 %"
d_chloride = "3e-12 m2/s"

[exposure]
model = "constant"
salinity = "35 g/L"

[time]
horizon = "1 yr"
dt = "12 h"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = parse_card(CARD, Preset::Chen2020)?;
    println!("{} ({})", s.name, s.mode);
    println!("cover {:.1} mm", s.geometry.cover * 1e3);
    println!("i_a {:.3e} A/m2", s.transport.current_density);
    println!("threshold {} %", s.transport.threshold_pct);
    println!("horizon {:.1} d, dt {:.2} d", s.time.horizon / 86_400.0, s.time.dt / 86_400.0);
    println!("exposure {:?}", s.exposure);
    println!("phase-field length {:.3} mm", s.effective_length_scale() * 1e3);
    Ok(())
}
