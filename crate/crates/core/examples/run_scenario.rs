//! Full coupled run of a preset, with timeline and final snapshot.
//!
//! cargo run --release --example run_scenario -- [chen2020|ye2017|seawater] [out_dir]

use std::path::PathBuf;

use corrosion_crack::driver::{run_simulation, Preset, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let preset = match args.next() {
        Some(name) => Preset::parse(&name).ok_or(format!("unknown preset {name}"))?,
        None => Preset::Chen2020,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/run".into()));
    let scenario = Scenario::preset(preset);
    let t = run_simulation(&scenario, Some(&out))?;

    let days = |v: Option<f64>| v.map_or("never".into(), |t| format!("{:.0} d", t / 86_400.0));
    println!("corrosion onset {}", days(t.first_activation));
    println!("whole bar active {}", days(t.full_activation));
    println!("surface crack {}", days(t.surface_crack_time));
    for r in t.records.iter().step_by(13) {
        println!(
            "{:>7.0} d  w = {:.4} mm  mass loss = {:.3} %  S_p = {:.3}",
            r.days,
            r.crack_width * 1e3,
            r.mass_loss,
            r.max_saturation
        );
    }
    println!("outputs in {}", out.display());
    Ok(())
}
