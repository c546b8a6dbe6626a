//! Recover the chloride diffusivity from synthetic chloride profiles.

use corrosion_crack::driver::{fit_diffusivity, log_grid, predict_contents, Measurement, Preset, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut s = Scenario::preset(Preset::Chen2020);
    s.transport.d_chloride = 2.7e-12;

    // profiles at 2, 4 and 6 months, 10 to 30 mm deep
    let month = 30.0 * 86_400.0;
    let mut data = Vec::new();
    for months in [2.0, 4.0, 6.0] {
        for depth_mm in [10.0, 12.5, 15.0, 20.0, 25.0, 30.0] {
            data.push(Measurement {
                depth: depth_mm * 1e-3,
                content: 0.0,
                time: months * month,
            });
        }
    }
    let synthetic = predict_contents(&s, &data)?;
    for (m, c) in data.iter_mut().zip(synthetic) {
        m.content = c;
    }

    let candidates = log_grid(1e-13, 1e-11, 20);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let fit = fit_diffusivity(&data, &s, &candidates, threads)?;
    // candidates the time stepper cannot integrate score -inf
    for (d, r2) in &fit.r_squared {
        println!("D_f = {d:.3e}  R2 = {r2:.5}");
    }
    println!("best D_f = {:.3e} m2/s", fit.best);
    Ok(())
}
