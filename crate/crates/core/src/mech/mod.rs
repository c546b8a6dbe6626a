//! Precipitation-eigenstrain elasticity and phase-field cohesive fracture.

mod domain;

pub use domain::{MechanicsDomain, PhaseFieldReport, StaggeredReport};

use std::f64::consts::PI;

use crate::error::ParamError;
use crate::fem::{ElasticMaterial, Eigenstrain};

/// Softening exponent of the Cornelissen-Hordijk calibration.
pub const SOFTENING_EXPONENT: f64 = 2.0;
/// Ultimate crack opening factor, w_c = factor · G_f / f_t.
pub const CRITICAL_OPENING_FACTOR: f64 = 5.1361;
/// Initial softening slope factor, k_0 = −factor · f_t² / G_f.
pub const INITIAL_SLOPE_FACTOR: f64 = 1.3546;
/// Smallest stiffness factor kept in fully cracked material.
pub const DEGRADATION_FLOOR: f64 = 1e-9;

/// Mechanical and fracture properties of concrete, steel and rust.
#[derive(Debug, Clone, PartialEq)]
pub struct MechParams {
    /// Concrete Young's modulus (Pa).
    pub concrete_youngs: f64,
    pub concrete_poisson: f64,
    /// Tensile strength (Pa).
    pub tensile_strength: f64,
    /// Fracture energy (J/m2).
    pub fracture_energy: f64,
    pub steel_youngs: f64,
    pub steel_poisson: f64,
    pub rust_youngs: f64,
    pub rust_poisson: f64,
    /// Porosity of the rust itself.
    pub rust_porosity: f64,
    /// Rust molar mass (kg/mol).
    pub rust_molar_mass: f64,
    /// Rust density (kg/m3).
    pub rust_density: f64,
    /// Density of the iron that turns into rust (kg/m3).
    pub iron_density: f64,
    /// Molar mass of that iron (kg/mol).
    pub iron_molar_mass: f64,
    /// Phase-field length scale (m).
    pub length_scale: f64,
    /// Body force (N/m3).
    pub body_force: [f64; 2],
}

impl MechParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("concrete Young's modulus", self.concrete_youngs),
            ("steel Young's modulus", self.steel_youngs),
            ("rust Young's modulus", self.rust_youngs),
            ("tensile strength", self.tensile_strength),
            ("fracture energy", self.fracture_energy),
            ("rust molar mass", self.rust_molar_mass),
            ("rust density", self.rust_density),
            ("iron density", self.iron_density),
            ("iron molar mass", self.iron_molar_mass),
            ("phase-field length", self.length_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ParamError::new(format!("{name} must be positive, got {v}")));
            }
        }
        let ratios = [
            ("concrete", self.concrete_poisson),
            ("steel", self.steel_poisson),
            ("rust", self.rust_poisson),
        ];
        for (name, nu) in ratios {
            if !(nu > 0.0 && nu < 0.5) {
                return Err(ParamError::new(format!("{name} Poisson ratio must lie in (0, 0.5), got {nu}")));
            }
        }
        if !(0.0..1.0).contains(&self.rust_porosity) {
            return Err(ParamError::new(format!(
                "rust porosity must lie in [0, 1), got {}",
                self.rust_porosity
            )));
        }
        if !self.body_force.iter().all(|b| b.is_finite()) {
            return Err(ParamError::new("body force must be finite"));
        }
        Ok(())
    }

    /// Plane-strain elongation modulus of intact concrete.
    pub fn elongation_modulus(&self) -> f64 {
        let (e, nu) = (self.concrete_youngs, self.concrete_poisson);
        e * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu))
    }

    /// Irwin internal length Ẽ G_f / f_t².
    pub fn irwin_length(&self) -> f64 {
        self.elongation_modulus() * self.fracture_energy / self.tensile_strength.powi(2)
    }

    /// Largest length scale for which the response stays insensitive to it.
    pub fn max_length_scale(&self) -> f64 {
        8.0 * self.irwin_length() / (3.0 * PI)
    }

    /// Default length scale: the insensitivity bound, capped at a hundredth
    /// of the smaller domain dimension.
    pub fn default_length_scale(&self, domain_size: f64) -> f64 {
        self.max_length_scale().min(domain_size / 100.0)
    }

    pub fn steel(&self) -> ElasticMaterial {
        ElasticMaterial {
            youngs: self.steel_youngs,
            poisson: self.steel_poisson,
            degradation: 1.0,
        }
    }
}

/// Calibrated phase-field cohesive-zone constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzmParams {
    pub p: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Phase-field length scale (m).
    pub length: f64,
    pub irwin_length: f64,
    /// Ultimate crack opening (m).
    pub critical_opening: f64,
    /// Initial softening slope (Pa/m).
    pub initial_slope: f64,
    pub elongation_modulus: f64,
    pub fracture_energy: f64,
    pub tensile_strength: f64,
}

impl CzmParams {
    /// Damage threshold f_t² / (2Ẽ) of the crack driving force.
    pub fn history_floor(&self) -> f64 {
        self.tensile_strength.powi(2) / (2.0 * self.elongation_modulus)
    }

    /// Scale G_f / (π ℓ) of the local dissipation.
    pub fn dissipation_scale(&self) -> f64 {
        self.fracture_energy / (PI * self.length)
    }
}

/// Cornelissen-Hordijk calibration of the degradation function for length
/// scale `length`.
pub fn czm_calibrate(p: &MechParams, length: f64) -> Result<CzmParams, ParamError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(ParamError::new(format!("phase-field length must be positive, got {length}")));
    }
    let (ft, gf) = (p.tensile_strength, p.fracture_energy);
    let e_tilde = p.elongation_modulus();
    let l_irw = p.irwin_length();
    if length > p.max_length_scale() * (1.0 + 1e-12) {
        log::warn!(
            "phase-field length {length:.3e} m exceeds 8 l_irw / (3 pi) = {:.3e} m; results depend on it",
            p.max_length_scale()
        );
    }
    let w_c = CRITICAL_OPENING_FACTOR * gf / ft;
    let k0 = -INITIAL_SLOPE_FACTOR * ft * ft / gf;
    let beta_w = w_c / (2.0 * gf / ft);
    let beta_k = k0 / (-ft * ft / (2.0 * gf));
    let exponent = SOFTENING_EXPONENT;
    let a2 = 2.0 * beta_k.powf(2.0 / 3.0) - exponent - 0.5;
    let a3 = 0.5 * beta_w * beta_w - a2 - 1.0;
    Ok(CzmParams {
        p: exponent,
        a1: 4.0 / PI * l_irw / length,
        a2,
        a3,
        length,
        irwin_length: l_irw,
        critical_opening: w_c,
        initial_slope: k0,
        elongation_modulus: e_tilde,
        fracture_energy: gf,
        tensile_strength: ft,
    })
}

struct Parts {
    a: [f64; 3],
    q: [f64; 3],
}

fn parts(phi: f64, c: &CzmParams) -> Parts {
    let s = 1.0 - phi;
    let p = c.p;
    Parts {
        a: [s.powf(p), -p * s.powf(p - 1.0), p * (p - 1.0) * s.powf(p - 2.0)],
        q: [
            phi * (1.0 + c.a2 * phi + c.a3 * phi * phi),
            1.0 + 2.0 * c.a2 * phi + 3.0 * c.a3 * phi * phi,
            2.0 * c.a2 + 6.0 * c.a3 * phi,
        ],
    }
}

/// Degradation g(φ) and its derivative.
pub fn degradation(phi: f64, c: &CzmParams) -> (f64, f64) {
    let Parts { a, q } = parts(phi, c);
    let b = a[0] + c.a1 * q[0];
    let n = c.a1 * (a[1] * q[0] - a[0] * q[1]);
    (a[0] / b, n / (b * b))
}

/// Second derivative of the degradation function.
pub fn degradation_second(phi: f64, c: &CzmParams) -> f64 {
    let Parts { a, q } = parts(phi, c);
    let b = a[0] + c.a1 * q[0];
    let db = a[1] + c.a1 * q[1];
    let n = c.a1 * (a[1] * q[0] - a[0] * q[1]);
    let dn = c.a1 * (a[2] * q[0] - a[0] * q[2]);
    (dn * b - 2.0 * n * db) / (b * b * b)
}

/// Rule-of-mixtures Young's modulus and Poisson ratio of rust-filled
/// concrete.
pub fn mixture_properties(theta_p: f64, p: &MechParams) -> (f64, f64) {
    (
        (1.0 - theta_p) * p.concrete_youngs + theta_p * p.rust_youngs,
        (1.0 - theta_p) * p.concrete_poisson + theta_p * p.rust_poisson,
    )
}

/// Volume ratio of rust to the iron it is made from, porosity included.
pub fn expansion_ratio(p: &MechParams) -> f64 {
    p.iron_density * p.rust_molar_mass / ((1.0 - p.rust_porosity) * p.rust_density * p.iron_molar_mass)
}

/// Eigenstrain per unit saturation at precipitate fraction `theta_p`.
pub fn expansion_coefficient(theta_p: f64, p: &MechParams) -> Result<f64, ParamError> {
    let (e, nu) = mixture_properties(theta_p, p);
    if !(nu < 0.5) || !(p.rust_poisson < 0.5) {
        return Err(ParamError::new(format!("incompressible limit: Poisson ratio {nu}")));
    }
    let k = e / (3.0 * (1.0 - 2.0 * nu));
    let kp = p.rust_youngs / (3.0 * (1.0 - 2.0 * p.rust_poisson));
    Ok((1.0 - nu) * kp / ((1.0 + nu) * kp + (2.0 - 4.0 * nu) * k) * (expansion_ratio(p) - 1.0))
}

/// Isotropic precipitation eigenstrain at saturation `s_p`.
pub fn eigenstrain(s_p: f64, theta_p: f64, p: &MechParams) -> Result<Eigenstrain, ParamError> {
    Ok(Eigenstrain::isotropic(expansion_coefficient(theta_p, p)? * s_p))
}

/// Material of rust-filled concrete at fraction `theta_p` and damage `phi`.
pub fn concrete_material(theta_p: f64, phi: f64, p: &MechParams, c: &CzmParams) -> ElasticMaterial {
    let (youngs, poisson) = mixture_properties(theta_p, p);
    ElasticMaterial {
        youngs,
        poisson,
        degradation: degradation(phi.clamp(0.0, 1.0), c).0.max(DEGRADATION_FLOOR),
    }
}

/// Largest in-plane principal value of a stress (σxx, σyy, σxy, …).
pub fn max_principal(s: &[f64; 4]) -> f64 {
    let mean = 0.5 * (s[0] + s[1]);
    let radius = (0.25 * (s[0] - s[1]).powi(2) + s[2] * s[2]).sqrt();
    mean + radius
}

/// History update ℋ ← max(ℋ, ⟨σ̄₁⟩²/(2Ẽ), f_t²/(2Ẽ)) for effective
/// (undegraded) stress `stress`.
pub fn crack_driving_force(stress: &[f64; 4], previous: f64, c: &CzmParams) -> f64 {
    let s1 = max_principal(stress).max(0.0);
    previous
        .max(s1 * s1 / (2.0 * c.elongation_modulus))
        .max(c.history_floor())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn chen() -> MechParams {
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

    fn czm() -> CzmParams {
        czm_calibrate(&chen(), 1e-3).unwrap()
    }

    #[test]
    fn mixture() {
        let p = chen();
        assert_eq!(mixture_properties(0.0, &p), (29e9, 0.18));
        let (e, nu) = mixture_properties(1.0, &p);
        assert_relative_eq!(e, 440e6);
        assert_relative_eq!(nu, 0.4);
        let (e, nu) = mixture_properties(0.5, &p);
        assert_relative_eq!(e, 14.72e9, max_relative = 1e-12);
        assert_relative_eq!(nu, 0.29, max_relative = 1e-12);
    }

    #[test]
    fn eigenstrain_coefficient() {
        let p = chen();
        assert_relative_eq!(expansion_ratio(&p), 5.035, max_relative = 1e-3);
        assert_relative_eq!(expansion_coefficient(0.0, &p).unwrap(), 0.1201, max_relative = 1e-3);
        let e = eigenstrain(0.1, 0.0, &p).unwrap();
        assert_relative_eq!(e.xx, 0.01201, max_relative = 1e-3);
        assert_eq!(e.xx, e.yy);
        assert_eq!(e.xy, 0.0);
        assert_eq!(eigenstrain(0.0, 0.1, &p).unwrap().xx, 0.0);
    }

    #[test]
    fn calibration() {
        let c = czm();
        assert_relative_eq!(c.elongation_modulus, 31.487e9, max_relative = 1e-4);
        assert_relative_eq!(c.irwin_length, 0.1255, max_relative = 1e-3);
        assert_relative_eq!(c.a1, 159.8, max_relative = 1e-3);
        assert_relative_eq!(c.a2, 1.3868, max_relative = 1e-4);
        assert_relative_eq!(c.a3, 0.9106, max_relative = 1e-3);
        assert_relative_eq!(c.critical_opening, 8.393e-5, max_relative = 1e-3);
        assert_relative_eq!(c.history_floor(), 266.9, max_relative = 1e-3);
        assert!(czm_calibrate(&chen(), 0.0).is_err());
    }

    #[test]
    fn degradation_values() {
        let c = czm();
        assert_eq!(degradation(0.0, &c).0, 1.0);
        assert_eq!(degradation(1.0, &c).0, 0.0);
        assert_relative_eq!(degradation(0.5, &c).0, 1.626e-3, max_relative = 1e-3);
        assert_relative_eq!(degradation(0.0, &c).1, -c.a1, max_relative = 1e-12);
    }

    #[test]
    fn degradation_derivatives_match_differences() {
        let c = czm();
        for k in 1..=50 {
            let phi = k as f64 / 51.0;
            let h = 1e-6;
            let fd = (degradation(phi + h, &c).0 - degradation(phi - h, &c).0) / (2.0 * h);
            assert_relative_eq!(degradation(phi, &c).1, fd, max_relative = 1e-6);
            let fd2 = (degradation(phi + h, &c).1 - degradation(phi - h, &c).1) / (2.0 * h);
            assert_relative_eq!(degradation_second(phi, &c), fd2, max_relative = 1e-5);
        }
    }

    #[test]
    fn degradation_is_non_increasing() {
        let c = czm();
        let mut prev = 1.0;
        for k in 0..=1000 {
            let g = degradation(k as f64 * 1e-3, &c).0;
            assert!(g <= prev);
            prev = g;
        }
    }

    #[test]
    fn driving_force() {
        let c = czm();
        let floor = c.history_floor();
        assert_eq!(crack_driving_force(&[0.0; 4], 0.0, &c), floor);
        let ft = c.tensile_strength;
        assert_relative_eq!(crack_driving_force(&[ft, 0.0, 0.0, 0.0], 0.0, &c), floor, max_relative = 1e-12);
        assert_eq!(crack_driving_force(&[-1e6, -2e6, 0.0, -1e6], 5.0 * floor, &c), 5.0 * floor);
        // pure shear has principal value equal to the shear stress
        let h = crack_driving_force(&[0.0, 0.0, 2.0 * ft, 0.0], 0.0, &c);
        assert_relative_eq!(h, 4.0 * floor, max_relative = 1e-12);
    }

    #[test]
    fn length_scale_bound() {
        let p = chen();
        assert_relative_eq!(p.max_length_scale(), 8.0 * 0.1255 / (3.0 * PI), max_relative = 1e-3);
        assert_relative_eq!(p.default_length_scale(0.1), 1e-3);
    }

    #[test]
    fn invalid_parameters() {
        let p = MechParams {
            rust_poisson: 0.5,
            ..chen()
        };
        assert!(p.validate().is_err());
        assert!(chen().validate().is_ok());
    }
}
