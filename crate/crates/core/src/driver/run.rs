use std::path::Path;

use super::{RunMode, Scenario};
use crate::chem::{total_chloride, ActivationState, TransportDomain};
use crate::error::{Error, Result, StepRejection};
use crate::fem::{FemError, Geometry};
use crate::mech::{czm_calibrate, CzmParams, MechParams, MechanicsDomain};
use crate::mesh::{Mesh, Rebar};
use crate::post::{concrete_max, iron_mass, relative_mass_loss, write_timeseries, write_vtk, CrackGauge, TimelineRecord};
use crate::state::FieldState;

/// Step halvings before a run is aborted.
pub const MAX_HALVINGS: usize = 8;
/// Phase field that counts as fully cracked.
pub const SURFACE_CRACK_PHASE: f64 = 0.95;

/// First concrete element whose mean phase field exceeds
/// [`SURFACE_CRACK_PHASE`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamageEvent {
    pub time: f64,
    pub element: usize,
    pub centroid: [f64; 2],
    /// Angle (degrees) between the element, seen from the rebar centre, and
    /// the rebar point nearest the exposed surface.
    pub angle_from_exposed: f64,
}

/// Observables of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub mode: RunMode,
    pub records: Vec<TimelineRecord>,
    /// First positive anodic current anywhere on the steel.
    pub first_activation: Option<f64>,
    /// Time at which the whole steel surface carries a current.
    pub full_activation: Option<f64>,
    /// First time a node of the upper surface is fully cracked.
    pub surface_crack_time: Option<f64>,
    pub first_damage: Option<DamageEvent>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Staggered loops stopped at the iteration cap.
    pub unconverged_staggers: usize,
    /// Ferrous ions released by the steel (mol/m).
    pub iron_released: f64,
    /// Chlorides that entered through the exposed surface (mol/m).
    pub chloride_influx: f64,
}

impl Timeline {
    pub fn last(&self) -> Option<&TimelineRecord> {
        self.records.last()
    }

    pub fn final_width(&self) -> f64 {
        self.last().map_or(0.0, |r| r.crack_width)
    }

    pub fn final_saturation(&self) -> f64 {
        self.last().map_or(0.0, |r| r.max_saturation)
    }
}

enum Failure {
    Rejected(StepRejection),
    Fatal(Error),
}

impl From<StepRejection> for Failure {
    fn from(r: StepRejection) -> Self {
        Failure::Rejected(r)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Fatal(e)
    }
}

/// One scenario with its discretization and evolving state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    pub mesh: Mesh,
    pub transport: TransportDomain,
    pub mechanics: MechanicsDomain,
    pub gauge: CrackGauge,
    pub mech: MechParams,
    pub czm: CzmParams,
    pub rebar: Rebar,
    pub state: FieldState,
    pub activation: ActivationState,
    pub iron_released: f64,
    pub chloride_influx: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub unconverged_staggers: usize,
    pub surface_crack_time: Option<f64>,
    pub first_damage: Option<DamageEvent>,
    /// Unit vector from the rebar centre towards the nearest exposed point.
    exposed_direction: [f64; 2],
    surface_nodes: Vec<usize>,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let mech = scenario.mech_params();
        let czm = czm_calibrate(&mech, mech.length_scale)?;
        let mesh = scenario.geometry.build_mesh(mech.length_scale)?;
        let geometry = Geometry::new(&mesh);
        let mut transport = TransportDomain::new(&mesh, &geometry);
        transport.undershoot_tolerance = scenario.undershoot_tolerance;
        transport.extend_exposed_layer(&mesh, scenario.surface_layer);
        let mechanics = MechanicsDomain::new(&mesh, &geometry)?;
        let gauge = CrackGauge::new(&mesh)?;
        let rebar = mesh
            .rebar()
            .ok_or_else(|| Error::Card("mesh has no steel interface".into()))?;
        let porosity = scenario.transport.porosity;
        let state = FieldState::new(&mesh, porosity, mechanics.phase.elements.len(), czm.history_floor());
        let activation = ActivationState::new(Mesh::edge_set_nodes(&mesh.boundaries.steel_interface));
        let exposed_direction = nearest_exposed_direction(&mesh, rebar.center);
        let surface_nodes = Mesh::edge_set_nodes(&mesh.boundaries.upper_surface);
        Ok(Simulation {
            scenario,
            mesh,
            transport,
            mechanics,
            gauge,
            mech,
            czm,
            rebar,
            state,
            activation,
            iron_released: 0.0,
            chloride_influx: 0.0,
            accepted_steps: 0,
            rejected_steps: 0,
            unconverged_staggers: 0,
            surface_crack_time: None,
            first_damage: None,
            exposed_direction,
            surface_nodes,
        })
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// True once corrosion has started; steps then solve the full problem.
    pub fn propagating(&self) -> bool {
        self.activation.any_active()
    }

    /// Total chloride content (%) at the steel-interface nodes.
    pub fn interface_contents(&self) -> Result<Vec<f64>> {
        let p = &self.scenario.transport;
        self.activation
            .nodes
            .iter()
            .map(|&v| Ok(total_chloride(self.state.c_free[v], self.state.c_bound[v], p)?))
            .collect()
    }

    fn attempt(&mut self, dt: f64, t_new: f64, full: bool) -> std::result::Result<(f64, f64), Failure> {
        let sc = &self.scenario;
        let p = &sc.transport;
        let c_surface = sc.exposure.concentration(t_new, p);
        let cl = self
            .transport
            .step_chlorides(&mut self.state, dt, p, c_surface, sc.mode.chloride_crack_transport())?;
        let contents = self.interface_contents()?;
        self.activation
            .update(&contents, t_new, sc.mode.activation(), &self.scenario.transport)
            .map_err(Error::from)?;
        let mut injected = 0.0;
        if full {
            let p = &self.scenario.transport;
            let iron = self
                .transport
                .step_iron(&mut self.state, dt, p, &self.activation, self.scenario.iron_crack_transport)?;
            injected = iron.injected;
            let report = self.mechanics.staggered(&mut self.state, &self.mech, &self.czm, p.porosity)?;
            if !report.converged {
                self.unconverged_staggers += 1;
            }
        }
        self.state.time = t_new;
        if let Some((field, _)) = self.state.find_non_finite() {
            return Err(Failure::Rejected(StepRejection::Solver(FemError::NonFinite(field))));
        }
        Ok((cl.influx, injected))
    }

    /// Advance by `dt`, halving the step on rejection. Full coupled steps
    /// are taken when `full` is set, chloride-only steps otherwise.
    pub fn advance(&mut self, dt: f64, full: bool) -> Result<()> {
        let target = self.state.time + dt;
        let mut h = dt;
        let mut halvings = 0;
        while self.state.time < target {
            let remaining = target - self.state.time;
            let (step, t_new) = if h >= remaining * (1.0 - 1e-9) {
                (remaining, target)
            } else {
                (h, self.state.time + h)
            };
            let saved = (self.state.clone(), self.activation.clone(), self.unconverged_staggers);
            match self.attempt(step, t_new, full) {
                Ok((influx, injected)) => {
                    self.chloride_influx += influx;
                    self.iron_released += injected;
                    self.accepted_steps += 1;
                    if full {
                        self.observe_damage();
                    }
                }
                Err(failure) => {
                    (self.state, self.activation, self.unconverged_staggers) = saved;
                    let reason = match failure {
                        Failure::Fatal(e) => return Err(e),
                        Failure::Rejected(r) => r,
                    };
                    self.rejected_steps += 1;
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::Abort {
                            time: self.state.time,
                            reason: format!("step rejected after {MAX_HALVINGS} halvings: {reason}"),
                        });
                    }
                    h = 0.5 * step;
                    log::warn!("t = {:.4e} s: {reason}; retrying with dt = {h:.4e} s", self.state.time);
                }
            }
        }
        Ok(())
    }

    fn observe_damage(&mut self) {
        let t = self.state.time;
        if self.surface_crack_time.is_none()
            && self.surface_nodes.iter().any(|&v| self.state.phase[v] >= SURFACE_CRACK_PHASE)
        {
            self.surface_crack_time = Some(t);
        }
        if self.first_damage.is_some() {
            return;
        }
        let phase = &self.state.phase;
        let mut best: Option<(usize, f64)> = None;
        for &e in &self.mechanics.phase.elements {
            let mean = self.mesh.triangles[e].iter().map(|&v| phase[v]).sum::<f64>() / 3.0;
            if mean > SURFACE_CRACK_PHASE && best.map_or(true, |(_, m)| mean > m) {
                best = Some((e, mean));
            }
        }
        if let Some((element, _)) = best {
            let centroid = self.mesh.centroid(element);
            let c = self.rebar.center;
            let d = [centroid[0] - c[0], centroid[1] - c[1]];
            let n = self.exposed_direction;
            let angle = (d[0] * n[1] - d[1] * n[0]).atan2(d[0] * n[0] + d[1] * n[1]).to_degrees();
            self.first_damage = Some(DamageEvent {
                time: t,
                element,
                centroid,
                angle_from_exposed: angle.abs(),
            });
        }
    }

    /// Observables of the current state.
    pub fn record(&self) -> Result<TimelineRecord> {
        let p = &self.scenario.transport;
        let w = self.gauge.width(&self.state, &self.mech, &self.czm, p.porosity)?;
        let contents = self.interface_contents()?;
        let t = self.state.time;
        Ok(TimelineRecord {
            time: t,
            days: t / 86_400.0,
            crack_width: w,
            relative_width: w / self.scenario.reference_width,
            mass_loss: relative_mass_loss(iron_mass(self.iron_released), self.rebar.radius),
            activated_fraction: self.activation.active_fraction(),
            max_total_chloride: contents.iter().copied().fold(0.0, f64::max),
            max_saturation: concrete_max(&self.mesh, &self.state.saturation(p.porosity)),
        })
    }

    fn timeline(&self, records: Vec<TimelineRecord>) -> Timeline {
        let times = &self.activation.activation_time;
        let full_activation = if times.iter().all(Option::is_some) {
            times.iter().flatten().copied().reduce(f64::max)
        } else {
            None
        };
        Timeline {
            mode: self.scenario.mode,
            records,
            first_activation: times.iter().flatten().copied().reduce(f64::min),
            full_activation,
            surface_crack_time: self.surface_crack_time,
            first_damage: self.first_damage,
            accepted_steps: self.accepted_steps,
            rejected_steps: self.rejected_steps,
            unconverged_staggers: self.unconverged_staggers,
            iron_released: self.iron_released,
            chloride_influx: self.chloride_influx,
        }
    }

    fn snapshot(&self, dir: &Path) -> Result<()> {
        let path = dir.join(format!("snap_{}.vtk", self.accepted_steps));
        write_vtk(&path, &self.mesh, &self.state, &self.scenario.transport)
    }

    /// Run to the horizon. With `out` set, `timeline.csv` and the field
    /// snapshots are written there; the time series is flushed even when
    /// the run aborts.
    pub fn run(&mut self, out: Option<&Path>) -> Result<Timeline> {
        if let Some(dir) = out {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        for note in self.scenario.policy_notes() {
            log::info!("{note}");
        }
        let time = self.scenario.time;
        let mut records = vec![self.record()?];
        let mut next_output = self.state.time + time.output_interval;
        let mut next_snapshot = time.snapshot_interval.map(|s| self.state.time + s);
        let result = loop {
            let now = self.state.time;
            if now >= time.horizon * (1.0 - 1e-12) {
                break Ok(());
            }
            let full = self.propagating();
            let nominal = if full { time.dt } else { time.dt * time.initiation_multiplier };
            let stop = next_output.min(time.horizon).min(next_snapshot.unwrap_or(f64::INFINITY));
            let dt = nominal.min(stop - now);
            if let Err(e) = self.advance(dt, full) {
                break Err(e);
            }
            let now = self.state.time;
            if now >= next_output * (1.0 - 1e-12) || now >= time.horizon * (1.0 - 1e-12) {
                match self.record() {
                    Ok(r) => records.push(r),
                    Err(e) => break Err(e),
                }
                while next_output <= now * (1.0 + 1e-12) {
                    next_output += time.output_interval;
                }
            }
            if let (Some(dir), Some(next)) = (out, next_snapshot.as_mut()) {
                if now >= *next * (1.0 - 1e-12) {
                    if let Err(e) = self.snapshot(dir) {
                        break Err(e);
                    }
                    while *next <= now * (1.0 + 1e-12) {
                        *next += time.snapshot_interval.unwrap_or(f64::INFINITY);
                    }
                }
            }
        };
        if let Some(dir) = out {
            write_timeseries(&dir.join("timeline.csv"), &records)?;
            if result.is_ok() {
                self.snapshot(dir)?;
            }
        }
        result?;
        Ok(self.timeline(records))
    }
}

/// Unit vector from `center` to the closest point of the exposed boundary;
/// straight up when nothing is exposed.
fn nearest_exposed_direction(mesh: &Mesh, center: [f64; 2]) -> [f64; 2] {
    let mut best = (f64::INFINITY, [0.0, 1.0]);
    for e in &mesh.boundaries.chloride_exposed {
        let (a, b) = (mesh.nodes[e[0]], mesh.nodes[e[1]]);
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let s = (((center[0] - a[0]) * ab[0] + (center[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
        let q = [a[0] + s * ab[0] - center[0], a[1] + s * ab[1] - center[1]];
        let d = (q[0] * q[0] + q[1] * q[1]).sqrt();
        if d < best.0 - 1e-12 && d > 0.0 {
            best = (d, [q[0] / d, q[1] / d]);
        }
    }
    best.1
}

/// Build and run `scenario`; see [`Simulation::run`].
pub fn run_simulation(scenario: &Scenario, out: Option<&Path>) -> Result<Timeline> {
    Simulation::new(scenario.clone())?.run(out)
}

