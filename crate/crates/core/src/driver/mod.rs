//! Scenarios, presets, the staggered time loop, sweeps and the diffusivity
//! fit.

mod card;
mod run;
mod sweep;

use std::fmt;
use std::path::PathBuf;

pub use card::{load_card, parse_card};
pub use run::{run_simulation, DamageEvent, Simulation, Timeline, SURFACE_CRACK_PHASE};
pub use sweep::{
    fit_diffusivity, log_grid, predict_contents, r_squared, run_sweep, sweep_points, write_sweep_summary, FitResult,
    Measurement, SweepOutcome, SweepPoint, MIN_FIT_DEPTH, SWEEP_SUMMARY_HEADER,
};

use crate::chem::{
    salinity_to_concentration, ActivationMode, Exposure, MeiraBC, TransportParams, MEIRA_K_CMAX, NACL_MOLAR_MASS,
};
use crate::error::{Error, Result};
use crate::mech::MechParams;
use crate::mesh::{generate_ogrid, read_msh, Mesh, OGridSpec, Side};
use crate::post::REFERENCE_CRACK_WIDTH;

const DAY: f64 = 86_400.0;
const YEAR: f64 = 365.25 * DAY;

/// Variant of the corrosion model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunMode {
    /// Each steel-surface point activates at its own chloride threshold.
    NonUniform,
    /// The whole steel surface corrodes once any point reaches the threshold.
    Uniform,
    /// Non-uniform corrosion, but cracks do not speed up chloride transport.
    NoCrackTransport,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [RunMode::NonUniform, RunMode::Uniform, RunMode::NoCrackTransport];

    pub fn parse(s: &str) -> Option<RunMode> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nonuniform" => Some(RunMode::NonUniform),
            "uniform" => Some(RunMode::Uniform),
            "nocracktransport" | "nocrack" => Some(RunMode::NoCrackTransport),
            _ => None,
        }
    }

    pub fn activation(self) -> ActivationMode {
        match self {
            RunMode::Uniform => ActivationMode::Uniform,
            _ => ActivationMode::Local,
        }
    }

    pub fn chloride_crack_transport(self) -> bool {
        self != RunMode::NoCrackTransport
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::NonUniform => "nonuniform",
            RunMode::Uniform => "uniform",
            RunMode::NoCrackTransport => "no-crack-transport",
        })
    }
}

/// Built-in parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Mortar prism sprayed with salt solution, top surface exposed.
    Chen2020,
    /// Concrete with 10 mm cover under a constant 60 g/L solution.
    Ye2017,
    /// Chen-like section under constant 35 g/L seawater.
    Seawater,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Preset> {
        match s.to_ascii_lowercase().as_str() {
            "chen2020" | "chen" => Some(Preset::Chen2020),
            "ye2017" | "ye" => Some(Preset::Ye2017),
            "seawater" => Some(Preset::Seawater),
            _ => None,
        }
    }
}

/// Section geometry and its discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySpec {
    pub width: f64,
    pub height: f64,
    pub rebar_diameter: f64,
    /// Distance from the top surface to the rebar surface.
    pub cover: f64,
    pub circumferential_divisions: usize,
    pub radial_divisions: usize,
    pub radial_grading: f64,
    pub far_field_size: f64,
    /// Refine the steel surface to a fifth of the phase-field length.
    pub resolve_length_scale: bool,
    /// Outer sides exposed to chlorides; the rest are sealed.
    pub exposed: Vec<Side>,
    /// External mesh; replaces the generated one and carries its own
    /// boundary tags.
    pub msh: Option<PathBuf>,
}

impl GeometrySpec {
    pub fn ogrid(&self, length_scale: f64) -> OGridSpec {
        OGridSpec {
            circumferential_divisions: self.circumferential_divisions,
            radial_divisions: self.radial_divisions,
            radial_grading: self.radial_grading,
            far_field_size: self.far_field_size,
            process_zone_length: self.resolve_length_scale.then_some(length_scale),
            ..OGridSpec::with_cover(self.width, self.height, self.rebar_diameter, self.cover)
        }
    }

    pub fn build_mesh(&self, length_scale: f64) -> Result<Mesh> {
        match &self.msh {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
                Ok(read_msh(&bytes)?)
            }
            None => {
                let mut mesh = generate_ogrid(&self.ogrid(length_scale))?;
                mesh.expose_sides(&self.exposed)?;
                Ok(mesh)
            }
        }
    }
}

/// Time horizon and step sizes (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub horizon: f64,
    /// Step of the propagation period.
    pub dt: f64,
    /// Initiation-period step over the propagation step.
    pub initiation_multiplier: f64,
    pub output_interval: f64,
    /// Field snapshots besides the final one.
    pub snapshot_interval: Option<f64>,
}

/// Parameter axes of a sweep; empty axes keep the scenario value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSpec {
    /// Concrete cover (m).
    pub cover: Vec<f64>,
    /// Intact chloride diffusivity (m2/s).
    pub d_chloride: Vec<f64>,
    /// Chloride threshold (% of binder).
    pub threshold: Vec<f64>,
    /// Salinity of a constant exposure (g/L of NaCl).
    pub salinity: Vec<f64>,
    /// Full Cartesian product instead of one axis at a time.
    pub cartesian: bool,
}

impl SweepSpec {
    pub fn is_empty(&self) -> bool {
        self.cover.is_empty() && self.d_chloride.is_empty() && self.threshold.is_empty() && self.salinity.is_empty()
    }
}

/// Complete, SI-normalized run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub geometry: GeometrySpec,
    pub transport: TransportParams,
    pub mech: MechParams,
    /// Phase-field length; the default is derived from the material and
    /// the section size.
    pub length_scale: Option<f64>,
    pub exposure: Exposure,
    pub mode: RunMode,
    /// Cracks speed up iron transport (all modes).
    pub iron_crack_transport: bool,
    pub time: TimeSpec,
    pub sweep: SweepSpec,
    /// Crack width that defines a relative width of 1.
    pub reference_width: f64,
    /// Free-chloride undershoot tolerated before a step is rejected,
    /// relative to the surface value.
    pub undershoot_tolerance: f64,
    /// Depth below the exposed boundary over which the surface value is
    /// imposed.
    pub surface_layer: f64,
}

fn chen_transport() -> TransportParams {
    TransportParams {
        porosity: 0.15,
        d_chloride: 2.7e-12,
        d_chloride_cracked: 1e-9,
        d_ferrous: 1e-11,
        d_ferrous_cracked: 7e-10,
        d_ferric: 1e-11,
        d_ferric_cracked: 7e-10,
        binding_rate: 1e-5,
        binding_ratio: 0.7,
        threshold_pct: 0.22,
        current_density: 0.8e-2,
        chloride_molar_mass: 0.0355,
        binder_content: 575.0,
        oxidation_rate: 0.1,
        precipitation_rate: 2e-4,
        oxygen: 0.28,
        rust_molar_mass: 0.10685,
        rust_density: 3560.0,
    }
}

fn chen_mech() -> MechParams {
    MechParams {
        concrete_youngs: 29e9,
        concrete_poisson: 0.18,
        tensile_strength: 4.1e6,
        fracture_energy: 67.0,
        steel_youngs: 205e9,
        steel_poisson: 0.28,
        rust_youngs: 440e6,
        rust_poisson: 0.4,
        rust_porosity: 0.16,
        rust_molar_mass: 0.10685,
        rust_density: 3560.0,
        iron_density: 7870.0,
        iron_molar_mass: 0.05585,
        length_scale: 1e-3,
        body_force: [0.0; 2],
    }
}

/// Salt deposition of the Chen spraying chamber.
pub fn chen_meira() -> MeiraBC {
    MeiraBC {
        initial_pct: 0.0,
        k_cmax: MEIRA_K_CMAX,
        // 56.9 g/m2/h
        deposition_rate: 56.9 / 3600.0,
        chloride_fraction: 0.0294,
    }
}

impl Scenario {
    pub fn preset(preset: Preset) -> Scenario {
        let geometry = GeometrySpec {
            width: 0.1,
            height: 0.1,
            rebar_diameter: 0.01,
            cover: 0.02,
            circumferential_divisions: 96,
            radial_divisions: 8,
            radial_grading: 1.15,
            far_field_size: 0.004,
            resolve_length_scale: false,
            exposed: vec![Side::Top],
            msh: None,
        };
        let chen = Scenario {
            name: "chen2020".into(),
            geometry,
            transport: chen_transport(),
            mech: chen_mech(),
            length_scale: None,
            exposure: Exposure::Meira(chen_meira()),
            mode: RunMode::NonUniform,
            iron_crack_transport: true,
            time: TimeSpec {
                horizon: 3.0 * YEAR,
                dt: 2.0 * DAY,
                initiation_multiplier: 5.0,
                output_interval: 7.0 * DAY,
                snapshot_interval: None,
            },
            sweep: SweepSpec::default(),
            reference_width: REFERENCE_CRACK_WIDTH,
            undershoot_tolerance: crate::chem::UNDERSHOOT_TOLERANCE,
            // the deposition boundary sits inside the mortar, below the
            // convection zone
            surface_layer: 7.5e-3,
        };
        match preset {
            Preset::Chen2020 => chen,
            Preset::Seawater => Scenario {
                name: "seawater".into(),
                exposure: Exposure::Constant(salinity_to_concentration(35.0)),
                surface_layer: 0.0,
                ..chen
            },
            Preset::Ye2017 => {
                let transport = TransportParams {
                    porosity: 0.19,
                    binder_content: 372.0,
                    threshold_pct: 0.56,
                    current_density: 4.6e-2,
                    ..chen.transport
                };
                let mech = MechParams {
                    concrete_youngs: 34e9,
                    tensile_strength: 3.2e6,
                    fracture_energy: 100.0,
                    ..chen.mech
                };
                Scenario {
                    name: "ye2017".into(),
                    geometry: GeometrySpec {
                        cover: 0.01,
                        ..chen.geometry
                    },
                    transport,
                    mech,
                    exposure: Exposure::Constant(salinity_to_concentration(60.0)),
                    surface_layer: 0.0,
                    time: TimeSpec {
                        horizon: 180.0 * DAY,
                        dt: 0.5 * DAY,
                        output_interval: 2.0 * DAY,
                        ..chen.time
                    },
                    ..chen
                }
            }
        }
    }

    /// Phase-field length used by the run.
    pub fn effective_length_scale(&self) -> f64 {
        self.length_scale
            .unwrap_or_else(|| self.mech.default_length_scale(self.geometry.width.min(self.geometry.height)))
    }

    /// Mechanical parameters with the effective length scale filled in.
    pub fn mech_params(&self) -> MechParams {
        MechParams {
            length_scale: self.effective_length_scale(),
            ..self.mech.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let card = |m: String| Err(Error::Card(m));
        self.transport.validate()?;
        self.mech_params().validate()?;
        let t = &self.time;
        for (name, v) in [
            ("time horizon", t.horizon),
            ("time step", t.dt),
            ("output interval", t.output_interval),
            ("reference crack width", self.reference_width),
            ("undershoot tolerance", self.undershoot_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return card(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.surface_layer >= 0.0 && self.surface_layer.is_finite()) {
            return card(format!("surface layer must be non-negative, got {}", self.surface_layer));
        }
        if let Some(s) = t.snapshot_interval {
            if !(s > 0.0) {
                return card(format!("snapshot interval must be positive, got {s}"));
            }
        }
        if !(t.initiation_multiplier >= 1.0) {
            return card(format!("initiation multiplier must be at least 1, got {}", t.initiation_multiplier));
        }
        if !(4.0..=7.0).contains(&t.initiation_multiplier) {
            log::warn!("initiation multiplier {} lies outside the usual 4-7", t.initiation_multiplier);
        }
        match self.exposure {
            Exposure::Constant(c) if !(c >= 0.0 && c.is_finite()) => {
                return card(format!("surface concentration must be non-negative, got {c}"));
            }
            Exposure::Meira(bc) => {
                for (name, v) in [
                    ("initial content", bc.initial_pct),
                    ("k_cmax", bc.k_cmax),
                    ("deposition rate", bc.deposition_rate),
                    ("chloride fraction", bc.chloride_fraction),
                ] {
                    if !(v >= 0.0 && v.is_finite()) {
                        return card(format!("Meira {name} must be non-negative, got {v}"));
                    }
                }
            }
            _ => {}
        }
        let g = &self.geometry;
        if g.msh.is_none() && g.exposed.is_empty() {
            log::warn!("no side is exposed to chlorides");
        }
        for (name, axis) in [
            ("cover", &self.sweep.cover),
            ("d_chloride", &self.sweep.d_chloride),
            ("threshold", &self.sweep.threshold),
            ("salinity", &self.sweep.salinity),
        ] {
            if axis.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return card(format!("sweep axis {name} holds a negative or non-finite value"));
            }
        }
        Ok(())
    }

    /// Human-readable list of modelling policies, logged at the start of
    /// every run.
    pub fn policy_notes(&self) -> Vec<String> {
        let mut notes = vec![format!(
            "eigenstrain iron: density {} kg/m3, molar mass {} kg/mol",
            self.mech.iron_density, self.mech.iron_molar_mass
        )];
        match self.exposure {
            Exposure::Meira(bc) => notes.push(format!(
                "Meira surface content C0 + k sqrt(I_s w_Cl t): C0 = {} %, k = {} %/sqrt(g/m2), I_s = {} g/m2/s, w_Cl = {}; \
                 the free-chloride value inverts the content under binding equilibrium",
                bc.initial_pct, bc.k_cmax, bc.deposition_rate, bc.chloride_fraction
            )),
            Exposure::Constant(c) => notes.push(format!(
                "constant surface free chloride {c:.4} mol/m3 ({:.3} g/L NaCl)",
                c * NACL_MOLAR_MASS / 1000.0
            )),
        }
        notes
    }
}
