//! Global chloride and iron balances of coupled 2D runs.

use corrosion_crack::driver::{Preset, Scenario, Simulation};

fn early_corrosion(preset: Preset) -> Scenario {
    let mut s = Scenario::preset(preset);
    s.transport.threshold_pct = 0.05;
    s.transport.current_density = 3e-2;
    s
}

/// (chloride, iron) balance residuals relative to the inflow after `steps`
/// full steps of `dt`.
fn balances(s: Scenario, steps: usize, dt: f64) -> (f64, f64, Simulation) {
    let mut sim = Simulation::new(s).unwrap();
    let p = sim.scenario.transport.clone();
    let cl0 = sim.transport.chloride_inventory(&sim.state);
    for _ in 0..steps {
        sim.advance(dt, true).unwrap();
    }
    let cl = sim.transport.chloride_inventory(&sim.state) - cl0;
    let fe = sim.transport.iron_inventory(&sim.state, &p);
    let cl_err = (cl - sim.chloride_influx).abs() / sim.chloride_influx;
    let fe_err = (fe - sim.iron_released).abs() / sim.iron_released;
    (cl_err, fe_err, sim)
}

#[test]
fn seawater_balances_close() {
    let (cl, fe, sim) = balances(early_corrosion(Preset::Seawater), 100, 10.0 * 86_400.0);
    assert!(sim.iron_released > 0.0 && sim.propagating());
    assert!(cl < 1e-4, "chloride balance {cl:e}");
    assert!(fe < 1e-4, "iron balance {fe:e}");
}

#[test]
fn surface_layer_run_balances_close() {
    let (cl, fe, sim) = balances(early_corrosion(Preset::Chen2020), 100, 10.0 * 86_400.0);
    assert!(sim.iron_released > 0.0);
    assert!(cl < 1e-4, "chloride balance {cl:e}");
    assert!(fe < 1e-4, "iron balance {fe:e}");
}

#[test]
fn mass_loss_matches_released_iron() {
    let (_, _, sim) = balances(early_corrosion(Preset::Seawater), 30, 10.0 * 86_400.0);
    let r = sim.record().unwrap();
    let radius = sim.rebar.radius;
    let expected = 100.0 * sim.iron_released * 0.05585 / (7850.0 * std::f64::consts::PI * radius * radius);
    assert!((r.mass_loss - expected).abs() <= 1e-10 * expected);
}
