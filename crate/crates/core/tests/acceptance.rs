//! Acceptance criteria, one PASS/FAIL line each. A failing criterion is
//! reported, not hidden; the process only fails when the harness itself
//! cannot run.

use std::path::Path;
use std::time::Instant;

use corrosion_crack::chem::TransportDomain;
use corrosion_crack::driver::{
    fit_diffusivity, log_grid, predict_contents, run_simulation, run_sweep, Measurement, Preset, RunMode, Scenario,
    Simulation, Timeline,
};
use corrosion_crack::fem::Geometry;
use corrosion_crack::mech::{czm_calibrate, degradation, expansion_coefficient, expansion_ratio};
use corrosion_crack::mesh::{Mesh, Side};
use corrosion_crack::post::{sample_profile, ProfileField, ProfileRequest};
use corrosion_crack::state::FieldState;
use statrs::function::erf::erfc;

const DAY: f64 = 86_400.0;

// pinned tolerances
const ERFC_L2: f64 = 0.02;
const ERFC_SECONDS: f64 = 10.0;
const BALANCE_REL: f64 = 1e-4;
const BALANCE_SECONDS: f64 = 120.0;
const A2: f64 = 1.3868;
const A3: f64 = 0.9106;
const CALIBRATION_TOL: f64 = 1e-3;
const DG_FD_REL: f64 = 1e-6;
const H_FLOOR: f64 = 266.9;
const H_FLOOR_TOL: f64 = 0.05;
const EXPANSION_RATIO: f64 = 5.035;
const EXPANSION_RATIO_TOL: f64 = 0.005;
const EXPANSION_C: f64 = 0.1201;
const EXPANSION_C_TOL: f64 = 1e-4;
const MODES_SECONDS: f64 = 1800.0;
const MORPHOLOGY_DEG: f64 = 15.0;
const SP_CEILING: f64 = 0.30;
const SP_CEILING_TOL: f64 = 0.10;
const SP_SECTION_MAX: f64 = 0.5;
const WIDTH_ANCHOR: f64 = 0.31e-3;
const WIDTH_REL_TOL: f64 = 0.5;
const COVERS: [f64; 4] = [0.015, 0.02, 0.025, 0.03];
const FIT_TRUE_D: f64 = 2.7e-12;
const FIT_SECONDS: f64 = 600.0;

struct Report {
    passed: usize,
    total: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        }
        println!("{} [{id:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn erfc_column() -> (f64, f64) {
    let clock = Instant::now();
    let length = 0.1;
    let mut mesh = Mesh::rectangle(length, 1e-3, 200, 1).unwrap();
    mesh.expose_sides(&[Side::Left]).unwrap();
    let geometry = Geometry::new(&mesh);
    let mut domain = TransportDomain::new(&mesh, &geometry);
    let mut p = Scenario::preset(Preset::Chen2020).transport;
    p.binding_rate = 0.0;
    let d = p.d_chloride / p.porosity;
    let c_surface = 600.0;
    let mut state = FieldState::new(&mesh, p.porosity, 0, 0.0);
    for _ in 0..180 {
        domain.step_chlorides(&mut state, DAY, &p, c_surface, false).unwrap();
        state.time += DAY;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (v, x) in mesh.nodes.iter().enumerate() {
        let exact = c_surface * erfc(x[0] / (2.0 * (d * state.time).sqrt()));
        num += (state.c_free[v] - exact).powi(2);
        den += exact * exact;
    }
    ((num / den).sqrt(), clock.elapsed().as_secs_f64())
}

/// (chloride, iron) balance residuals over 100 full steps, and runtime.
fn balances() -> (f64, f64, f64) {
    let clock = Instant::now();
    let mut s = Scenario::preset(Preset::Seawater);
    s.transport.threshold_pct = 0.05;
    let mut sim = Simulation::new(s).unwrap();
    let p = sim.scenario.transport.clone();
    for _ in 0..100 {
        sim.advance(10.0 * DAY, true).unwrap();
    }
    let cl = sim.transport.chloride_inventory(&sim.state);
    let fe = sim.transport.iron_inventory(&sim.state, &p);
    (
        (cl - sim.chloride_influx).abs() / sim.chloride_influx,
        (fe - sim.iron_released).abs() / sim.iron_released,
        clock.elapsed().as_secs_f64(),
    )
}

/// Full run that keeps the final state; returns the largest saturation on
/// the radial section from the rebar crown to the exposed surface.
fn run_keeping_state(s: Scenario) -> (Timeline, f64) {
    let mut sim = Simulation::new(s).unwrap();
    let t = sim.run(None).unwrap();
    let [_, _, _, top] = sim.mesh.bounding_box();
    let c = sim.rebar.center;
    let req = ProfileRequest {
        start: [c[0], c[1] + sim.rebar.radius * (1.0 + 1e-6)],
        end: [c[0], top],
        count: 200,
        field: ProfileField::Saturation,
    };
    let section = sample_profile(&sim.mesh, &sim.state, &sim.scenario.transport, &req)
        .unwrap()
        .into_iter()
        .filter_map(|(_, v)| v)
        .fold(0.0, f64::max);
    (t, section)
}

fn days(t: Option<f64>) -> String {
    t.map_or("never".into(), |t| format!("{:.0} d", t / DAY))
}

fn main() {
    let mut r = Report { passed: 0, total: 0 };

    let (err, secs) = erfc_column();
    r.line(
        1,
        "erfc diffusion oracle",
        err < ERFC_L2 && secs < ERFC_SECONDS,
        format!("L2 {err:.4} (< {ERFC_L2}), {secs:.1} s (< {ERFC_SECONDS} s)"),
    );

    let (cl, fe, secs) = balances();
    r.line(
        2,
        "chloride and iron balances",
        cl < BALANCE_REL && fe < BALANCE_REL && secs < BALANCE_SECONDS,
        format!("chloride {cl:.2e}, iron {fe:.2e} (< {BALANCE_REL:e}), {secs:.0} s (< {BALANCE_SECONDS} s)"),
    );

    let chen = Scenario::preset(Preset::Chen2020);
    let mech = chen.mech_params();
    let czm = czm_calibrate(&mech, mech.length_scale).unwrap();
    r.line(
        3,
        "cohesive calibration",
        (czm.a2 - A2).abs() <= CALIBRATION_TOL && (czm.a3 - A3).abs() <= CALIBRATION_TOL,
        format!("a2 {:.4} (target {A2}), a3 {:.4} (target {A3}), tol {CALIBRATION_TOL}", czm.a2, czm.a3),
    );

    let (g0, _) = degradation(0.0, &czm);
    let (g1, _) = degradation(1.0, &czm);
    let mut worst: f64 = 0.0;
    for k in 1..20 {
        let phi = k as f64 / 20.0;
        let h = 1e-6;
        let fd = (degradation(phi + h, &czm).0 - degradation(phi - h, &czm).0) / (2.0 * h);
        let (_, dg) = degradation(phi, &czm);
        worst = worst.max((dg - fd).abs() / dg.abs().max(1e-12));
    }
    let floor = czm.history_floor();
    r.line(
        4,
        "degradation and driving force",
        g0 == 1.0 && g1 == 0.0 && worst <= DG_FD_REL && (floor - H_FLOOR).abs() <= H_FLOOR_TOL,
        format!("g(0) {g0}, g(1) {g1}, dg/dphi rel err {worst:.1e} (<= {DG_FD_REL:e}), H floor {floor:.2} J/m3 (target {H_FLOOR})"),
    );

    let ratio = expansion_ratio(&mech);
    let coeff = expansion_coefficient(0.0, &mech).unwrap();
    r.line(
        5,
        "eigenstrain anchor",
        (ratio - EXPANSION_RATIO).abs() <= EXPANSION_RATIO_TOL
            && (3.0..=6.0).contains(&ratio)
            && (coeff - EXPANSION_C).abs() <= EXPANSION_C_TOL,
        format!("expansion ratio {ratio:.4} (target {EXPANSION_RATIO}), C {coeff:.5} (target {EXPANSION_C} +- {EXPANSION_C_TOL})"),
    );

    let clock = Instant::now();
    let mut by_mode = Vec::new();
    let mut section_08 = 0.0;
    for mode in RunMode::ALL {
        let (t, section) = run_keeping_state(Scenario { mode, ..chen.clone() });
        if mode == RunMode::NonUniform {
            section_08 = section;
        }
        println!(
            "     {mode}: w {:.4} mm, surface crack {}, onset {}",
            t.final_width() * 1e3,
            days(t.surface_crack_time),
            days(t.first_activation)
        );
        by_mode.push(t);
    }
    let secs = clock.elapsed().as_secs_f64();
    let (nonuniform, uniform, nocrack) = (&by_mode[0], &by_mode[1], &by_mode[2]);
    let crack = |t: &Timeline| t.surface_crack_time.unwrap_or(f64::INFINITY);
    let earliest = uniform.surface_crack_time.is_some() && crack(uniform) < crack(nonuniform) && crack(uniform) < crack(nocrack);
    let ordered = uniform.final_width() > nonuniform.final_width() && nonuniform.final_width() > nocrack.final_width();
    r.line(
        6,
        "mode ordering",
        ordered && earliest && secs < MODES_SECONDS,
        format!(
            "w uniform {:.4} > nonuniform {:.4} > no-crack {:.4} mm: {ordered}; uniform cracks first: {earliest}; {secs:.0} s (< {MODES_SECONDS} s)",
            uniform.final_width() * 1e3,
            nonuniform.final_width() * 1e3,
            nocrack.final_width() * 1e3
        ),
    );

    match nonuniform.first_damage {
        Some(d) => r.line(
            7,
            "crack morphology",
            d.angle_from_exposed <= MORPHOLOGY_DEG,
            format!(
                "first element with phi > 0.95 at {:.1} deg from the rebar point nearest the exposed surface (<= {MORPHOLOGY_DEG}), day {:.0}",
                d.angle_from_exposed,
                d.time / DAY
            ),
        ),
        None => r.line(7, "crack morphology", false, "no element reached phi > 0.95 within the horizon".into()),
    }

    let sp = nonuniform.final_saturation();
    let mut sections = vec![(0.8, section_08)];
    for ia in [1.5, 3.0] {
        let mut s = chen.clone();
        s.transport.current_density = ia * 1e-2;
        sections.push((ia, run_keeping_state(s).1));
    }
    let below = sections.iter().all(|&(_, v)| v < SP_SECTION_MAX);
    let listed: Vec<String> = sections.iter().map(|(ia, v)| format!("{ia} uA/cm2: {v:.3}")).collect();
    r.line(
        8,
        "precipitate ceiling",
        (sp - SP_CEILING).abs() <= SP_CEILING_TOL && below,
        format!(
            "max S_p at 3 yr {sp:.3} (target {SP_CEILING} +- {SP_CEILING_TOL}); radial-section max {} (< {SP_SECTION_MAX})",
            listed.join(", ")
        ),
    );

    let w = nonuniform.final_width();
    let mut widths = Vec::new();
    for divisions in [48, 96, 192] {
        let width = if divisions == chen.geometry.circumferential_divisions {
            w
        } else {
            let mut s = chen.clone();
            s.geometry.circumferential_divisions = divisions;
            run_simulation(&s, None).unwrap().final_width()
        };
        widths.push(width);
    }
    let converging = (widths[2] - widths[1]).abs() < (widths[1] - widths[0]).abs();
    let anchored = (w - WIDTH_ANCHOR).abs() <= WIDTH_REL_TOL * WIDTH_ANCHOR;
    r.line(
        9,
        "crack-width anchor",
        anchored && converging,
        format!(
            "w(3 yr) {:.4} mm (target {:.2} mm +- {:.0}%); refinement 48/96/192 divisions: {:.4}, {:.4}, {:.4} mm, converging: {converging}",
            w * 1e3,
            WIDTH_ANCHOR * 1e3,
            WIDTH_REL_TOL * 100.0,
            widths[0] * 1e3,
            widths[1] * 1e3,
            widths[2] * 1e3
        ),
    );

    let mut sea = Scenario::preset(Preset::Seawater);
    sea.sweep.cover = COVERS.to_vec();
    let outcomes = run_sweep(&sea, 1, None).unwrap();
    let sweep_widths: Vec<f64> = outcomes.iter().map(|o| o.result.as_ref().map_or(f64::NAN, Timeline::final_width)).collect();
    let monotone = sweep_widths.windows(2).all(|p| p[1] <= p[0]);
    let listed: Vec<String> = COVERS
        .iter()
        .zip(&sweep_widths)
        .map(|(c, w)| format!("{:.0} mm: {:.4}", c * 1e3, w * 1e3))
        .collect();
    r.line(10, "cover sweep monotonicity", monotone, format!("w (mm) {}", listed.join(", ")));

    let clock = Instant::now();
    let mut s = chen.clone();
    s.transport.d_chloride = FIT_TRUE_D;
    let mut data = Vec::new();
    for months in [2.0, 4.0, 6.0] {
        for depth_mm in [10.0, 12.5, 15.0, 20.0, 25.0, 30.0] {
            data.push(Measurement {
                depth: depth_mm * 1e-3,
                content: 0.0,
                time: months * 30.0 * DAY,
            });
        }
    }
    let contents = predict_contents(&s, &data).unwrap();
    for (m, c) in data.iter_mut().zip(contents) {
        m.content = c;
    }
    let grid = log_grid(1e-13, 1e-11, 20);
    match fit_diffusivity(&data, &s, &grid, 1) {
        Ok(fit) => {
            let secs = clock.elapsed().as_secs_f64();
            let nearest = grid
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.ln() - FIT_TRUE_D.ln()).abs().total_cmp(&(b.1.ln() - FIT_TRUE_D.ln()).abs()))
                .map(|(k, _)| k)
                .unwrap();
            let chosen = grid.iter().position(|&d| d == fit.best).unwrap();
            let skipped = fit.r_squared.iter().filter(|(_, r)| *r == f64::NEG_INFINITY).count();
            r.line(
                11,
                "diffusivity fit round trip",
                chosen.abs_diff(nearest) <= 1 && secs < FIT_SECONDS,
                format!(
                    "best {:.3e} m2/s, generating {FIT_TRUE_D:e}, {} grid step(s) apart (<= 1), {skipped} candidate(s) not integrable, {secs:.0} s (< {FIT_SECONDS} s)",
                    fit.best,
                    chosen.abs_diff(nearest)
                ),
            );
        }
        Err(e) => r.line(11, "diffusivity fit round trip", false, format!("fit failed: {e}")),
    }

    let dir = tempfile::tempdir().unwrap();
    let mut short = Scenario::preset(Preset::Ye2017);
    short.time.horizon = 60.0 * DAY;
    let read = |p: &Path| std::fs::read(p.join("timeline.csv")).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_simulation(&short, Some(&a)).unwrap();
    run_simulation(&short, Some(&b)).unwrap();
    let (ta, tb) = (read(&a), read(&b));
    r.line(
        12,
        "determinism",
        ta == tb && !ta.is_empty(),
        format!("two runs of one card: timeline.csv byte-identical: {}", ta == tb),
    );

    println!("{} of {} criteria pass", r.passed, r.total);
}
