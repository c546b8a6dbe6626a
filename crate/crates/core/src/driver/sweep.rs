use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{run_simulation, Scenario, Simulation, Timeline};
use crate::chem::{salinity_to_concentration, Exposure};
use crate::error::{Error, Result};
use crate::post::{interpolate, nodal_field, ProfileField};

pub const SWEEP_SUMMARY_HEADER: &str =
    "point,cover_m,d_chloride_m2s,threshold_pct,salinity_gL,w_m,w_rel,mass_loss_rel,max_Sp,status";

/// Measurements shallower than this are dominated by surface convection and
/// left out of the diffusivity fit (m).
pub const MIN_FIT_DEPTH: f64 = 7.5e-3;

/// Apply `f` to every item on up to `threads` workers; results keep the
/// order of `items`.
fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    let workers = threads.max(1).min(items.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every item is processed"))
        .collect()
}

/// One parameter combination of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub cover: f64,
    pub d_chloride: f64,
    pub threshold: f64,
    /// Constant-exposure salinity (g/L); `None` keeps the scenario exposure.
    pub salinity: Option<f64>,
}

impl SweepPoint {
    fn base(s: &Scenario) -> Self {
        SweepPoint {
            cover: s.geometry.cover,
            d_chloride: s.transport.d_chloride,
            threshold: s.transport.threshold_pct,
            salinity: None,
        }
    }

    /// File-system friendly name.
    pub fn label(&self) -> String {
        let s = match self.salinity {
            Some(s) => format!("{s}gL"),
            None => "base".into(),
        };
        format!(
            "cover{}mm_D{:.3e}_T{}_S{}",
            self.cover * 1e3,
            self.d_chloride,
            self.threshold,
            s
        )
    }

    pub fn apply(&self, base: &Scenario) -> Scenario {
        let mut s = base.clone();
        s.name = format!("{}_{}", base.name, self.label());
        s.geometry.cover = self.cover;
        s.transport.d_chloride = self.d_chloride;
        s.transport.threshold_pct = self.threshold;
        if let Some(g) = self.salinity {
            s.exposure = Exposure::Constant(salinity_to_concentration(g));
        }
        s.sweep = Default::default();
        s
    }

    fn key(&self) -> [f64; 4] {
        [self.cover, self.d_chloride, self.threshold, self.salinity.unwrap_or(-1.0)]
    }
}

/// Points of the sweep: one axis at a time around the scenario values, or
/// the Cartesian product of all axes.
pub fn sweep_points(s: &Scenario) -> Vec<SweepPoint> {
    let base = SweepPoint::base(s);
    let sw = &s.sweep;
    if sw.cartesian {
        let or_base = |axis: &[f64], b: f64| if axis.is_empty() { vec![b] } else { axis.to_vec() };
        let salinities: Vec<Option<f64>> = if sw.salinity.is_empty() {
            vec![None]
        } else {
            sw.salinity.iter().map(|&g| Some(g)).collect()
        };
        let mut out = Vec::new();
        for &cover in &or_base(&sw.cover, base.cover) {
            for &d_chloride in &or_base(&sw.d_chloride, base.d_chloride) {
                for &threshold in &or_base(&sw.threshold, base.threshold) {
                    for &salinity in &salinities {
                        out.push(SweepPoint {
                            cover,
                            d_chloride,
                            threshold,
                            salinity,
                        });
                    }
                }
            }
        }
        out
    } else {
        let mut out = Vec::new();
        out.extend(sw.cover.iter().map(|&cover| SweepPoint { cover, ..base }));
        out.extend(sw.d_chloride.iter().map(|&d_chloride| SweepPoint { d_chloride, ..base }));
        out.extend(sw.threshold.iter().map(|&threshold| SweepPoint { threshold, ..base }));
        out.extend(sw.salinity.iter().map(|&g| SweepPoint {
            salinity: Some(g),
            ..base
        }));
        out
    }
}

/// Result of one sweep point; failures are kept as their message.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub point: SweepPoint,
    pub result: std::result::Result<Timeline, String>,
}

/// Run every sweep point concurrently. Each point writes its own output
/// directory below `out`, named by its label, and the summary goes to
/// `out/sweep_summary.csv`. Outcomes are sorted by parameter values.
pub fn run_sweep(scenario: &Scenario, threads: usize, out: Option<&Path>) -> Result<Vec<SweepOutcome>> {
    scenario.validate()?;
    if scenario.sweep.is_empty() {
        return Err(Error::Card("the sweep has no parameter axes".into()));
    }
    let points = sweep_points(scenario);
    let mut outcomes = parallel_map(&points, threads, |pt| {
        let dir = out.map(|d| d.join(pt.label()));
        let result = run_simulation(&pt.apply(scenario), dir.as_deref()).map_err(|e| e.to_string());
        if let Err(e) = &result {
            log::error!("sweep point {}: {e}", pt.label());
        }
        SweepOutcome { point: *pt, result }
    });
    outcomes.sort_by(|a, b| {
        let (ka, kb) = (a.point.key(), b.point.key());
        ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_sweep_summary(&dir.join("sweep_summary.csv"), &outcomes)?;
    }
    Ok(outcomes)
}

pub fn write_sweep_summary(path: &Path, outcomes: &[SweepOutcome]) -> Result<()> {
    let fail = |e: csv::Error| Error::Output {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(fail)?;
    w.write_record(SWEEP_SUMMARY_HEADER.split(',')).map_err(fail)?;
    for o in outcomes {
        let p = &o.point;
        let mut row = vec![
            p.label(),
            p.cover.to_string(),
            p.d_chloride.to_string(),
            p.threshold.to_string(),
            p.salinity.map(|s| s.to_string()).unwrap_or_default(),
        ];
        match &o.result {
            Ok(t) => {
                let r = t.last().copied().unwrap_or_else(|| crate::post::TimelineRecord {
                    time: 0.0,
                    days: 0.0,
                    crack_width: 0.0,
                    relative_width: 0.0,
                    mass_loss: 0.0,
                    activated_fraction: 0.0,
                    max_total_chloride: 0.0,
                    max_saturation: 0.0,
                });
                row.extend([
                    r.crack_width.to_string(),
                    r.relative_width.to_string(),
                    r.mass_loss.to_string(),
                    r.max_saturation.to_string(),
                    "ok".into(),
                ]);
            }
            Err(msg) => {
                row.extend([String::new(), String::new(), String::new(), String::new(), msg.clone()]);
            }
        }
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A measured total chloride content.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Depth below the top surface (m).
    pub depth: f64,
    /// Total chloride content (% of binder).
    pub content: f64,
    /// Exposure time (s).
    pub time: f64,
}

/// `n` logarithmically spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Coefficient of determination of `predicted` against `measured`.
pub fn r_squared(measured: &[f64], predicted: &[f64]) -> f64 {
    let n = measured.len() as f64;
    let mean = measured.iter().sum::<f64>() / n;
    let ss_tot: f64 = measured.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = measured.iter().zip(predicted).map(|(y, f)| (y - f).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - ss_res / ss_tot
}

/// Model total chloride contents at the measurement points from a
/// chloride-only run. Depths are taken along the vertical line at a quarter
/// of the section width, away from the rebar.
pub fn predict_contents(scenario: &Scenario, measurements: &[Measurement]) -> Result<Vec<f64>> {
    let mut sim = Simulation::new(scenario.clone())?;
    let [x0, _, x1, y1] = sim.mesh.bounding_box();
    let x = x0 + 0.25 * (x1 - x0);
    let concrete: Vec<usize> = sim.mesh.concrete_triangles().collect();
    let mut times: Vec<f64> = measurements.iter().map(|m| m.time).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let step = scenario.time.dt * scenario.time.initiation_multiplier;
    let mut out = vec![0.0; measurements.len()];
    for &t in &times {
        while sim.time() < t {
            let dt = step.min(t - sim.time());
            sim.advance(dt, false)?;
        }
        let values = nodal_field(&sim.state, ProfileField::TotalChloride, &scenario.transport)?;
        for (k, m) in measurements.iter().enumerate() {
            if m.time == t {
                out[k] = interpolate(&sim.mesh, &concrete, &values, [x, y1 - m.depth]).ok_or_else(|| {
                    Error::Card(format!("measurement depth {} m lies outside the concrete", m.depth))
                })?;
            }
        }
    }
    Ok(out)
}

/// Outcome of a diffusivity fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Candidate with the largest R².
    pub best: f64,
    /// (candidate, R²) in candidate order.
    pub r_squared: Vec<(f64, f64)>,
}

/// Pick the intact chloride diffusivity whose chloride-only prediction best
/// matches the measurements deeper than [`MIN_FIT_DEPTH`].
pub fn fit_diffusivity(
    measurements: &[Measurement],
    scenario: &Scenario,
    candidates: &[f64],
    threads: usize,
) -> Result<FitResult> {
    let used: Vec<Measurement> = measurements.iter().copied().filter(|m| m.depth > MIN_FIT_DEPTH).collect();
    if used.len() < 3 {
        return Err(Error::Card(format!(
            "the fit needs at least 3 measurements deeper than {} mm, got {}",
            MIN_FIT_DEPTH * 1e3,
            used.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::Card("no candidate diffusivities".into()));
    }
    if candidates.iter().any(|&d| !(1e-13..=1e-11).contains(&d)) {
        log::warn!("candidate diffusivities outside [1e-13, 1e-11] m2/s");
    }
    let measured: Vec<f64> = used.iter().map(|m| m.content).collect();
    let scores = parallel_map(candidates, threads, |&d| {
        let mut s = scenario.clone();
        s.transport.d_chloride = d;
        predict_contents(&s, &used).map(|pred| r_squared(&measured, &pred))
    });
    let mut table = Vec::with_capacity(candidates.len());
    // a candidate the time stepper cannot integrate scores -inf; the fit
    // only fails when none can be integrated
    let mut last_abort = None;
    for (&d, r) in candidates.iter().zip(scores) {
        let r = match r {
            Ok(r) => r,
            Err(e @ Error::Abort { .. }) => {
                log::warn!("diffusivity {d:e} m2/s skipped: {e}");
                last_abort = Some(e);
                f64::NEG_INFINITY
            }
            Err(e) => return Err(e),
        };
        table.push((d, r));
    }
    if let Some(e) = last_abort.filter(|_| table.iter().all(|&(_, r)| r == f64::NEG_INFINITY)) {
        return Err(e);
    }
    let best = table
        .iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, &(d, r)| if r > acc.1 { (d, r) } else { acc })
        .0;
    let best = if best.is_nan() { table[0].0 } else { best };
    Ok(FitResult { best, r_squared: table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Preset;

    #[test]
    fn r_squared_of_perfect_fit_is_one() {
        let y = [0.1, 0.3, 0.2];
        assert_eq!(r_squared(&y, &y), 1.0);
        assert!(r_squared(&y, &[0.2, 0.2, 0.2]) < 1e-12);
    }

    #[test]
    fn log_grid_hits_both_ends() {
        let g = log_grid(1e-13, 1e-11, 20);
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 1e-13);
        assert_eq!(g[19], 1e-11);
        assert!((g[1] / g[0] - 10f64.powf(2.0 / 19.0)).abs() < 1e-12);
    }

    #[test]
    fn per_axis_and_cartesian_points() {
        let mut s = Scenario::preset(Preset::Seawater);
        s.sweep.cover = vec![0.015, 0.02];
        s.sweep.threshold = vec![0.3];
        assert_eq!(sweep_points(&s).len(), 3);
        s.sweep.cartesian = true;
        let pts = sweep_points(&s);
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.threshold == 0.3 && p.salinity.is_none()));
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        assert_eq!(parallel_map(&items, 4, |&i| i * i), items.iter().map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn fit_needs_three_deep_points() {
        let s = Scenario::preset(Preset::Chen2020);
        let m = [
            Measurement {
                depth: 0.005,
                content: 0.3,
                time: 1e6,
            },
            Measurement {
                depth: 0.01,
                content: 0.2,
                time: 1e6,
            },
        ];
        assert!(matches!(fit_diffusivity(&m, &s, &[2.7e-12], 1), Err(Error::Card(_))));
    }

    #[test]
    fn fit_fails_only_when_no_candidate_integrates() {
        let mut s = Scenario::preset(Preset::Ye2017);
        s.undershoot_tolerance = 1e-12;
        let m: Vec<Measurement> = [0.01, 0.012, 0.014]
            .iter()
            .map(|&depth| Measurement {
                depth,
                content: 0.1,
                time: 86_400.0,
            })
            .collect();
        assert!(matches!(fit_diffusivity(&m, &s, &[1e-12, 2.7e-12], 1), Err(Error::Abort { .. })));
    }
}
