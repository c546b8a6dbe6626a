//! Non-uniform corrosion against the uniform and no-crack-transport
//! simplifications, run side by side.

use corrosion_crack::driver::{run_simulation, Preset, RunMode, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Scenario::preset(Preset::Chen2020);
    let timelines = std::thread::scope(|s| {
        let handles: Vec<_> = RunMode::ALL
            .iter()
            .map(|&mode| {
                let scenario = Scenario { mode, ..base.clone() };
                s.spawn(move || run_simulation(&scenario, None))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect::<Vec<_>>()
    });
    for t in timelines {
        let t = t?;
        let crack = t.surface_crack_time.map_or("never".into(), |v| format!("{:.0} d", v / 86_400.0));
        println!(
            "{:<20} w(3 yr) = {:.4} mm  surface crack {crack}",
            t.mode.to_string(),
            t.final_width() * 1e3
        );
    }
    Ok(())
}
