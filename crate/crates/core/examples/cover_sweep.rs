//! Crack width after three years for several concrete covers under
//! seawater exposure.

use corrosion_crack::driver::{run_sweep, Preset, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut s = Scenario::preset(Preset::Seawater);
    s.sweep.cover = vec![0.015, 0.02, 0.025, 0.03];
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outcomes = run_sweep(&s, threads, None)?;
    for o in outcomes {
        match o.result {
            Ok(t) => println!("cover {:.0} mm: w = {:.4} mm", o.point.cover * 1e3, t.final_width() * 1e3),
            Err(e) => println!("{}: {e}", o.point.label()),
        }
    }
    Ok(())
}
