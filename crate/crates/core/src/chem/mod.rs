//! Reactive transport: chloride ingress with binding, corrosion activation
//! on the steel surface, and transport, oxidation and precipitation of
//! dissolved iron.

mod activation;
mod transport;

pub use activation::{ActivationMode, ActivationState};
pub use transport::{ChlorideStep, IronStep, TransportDomain, UNDERSHOOT_TOLERANCE};

use crate::error::ParamError;

/// Faraday constant (C/mol).
pub const FARADAY: f64 = 96_485.0;
/// Electrons exchanged per dissolved iron atom.
pub const ANODIC_ELECTRONS: f64 = 2.0;
/// Molar mass of iron (kg/mol).
pub const IRON_MOLAR_MASS: f64 = 0.05585;
/// Molar mass of sodium chloride (g/mol).
pub const NACL_MOLAR_MASS: f64 = 58.44;

/// Transport, binding and reaction parameters in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportParams {
    pub porosity: f64,
    /// Effective chloride diffusivity of intact, precipitate-free material.
    pub d_chloride: f64,
    pub d_chloride_cracked: f64,
    pub d_ferrous: f64,
    pub d_ferrous_cracked: f64,
    pub d_ferric: f64,
    pub d_ferric_cracked: f64,
    /// Binding rate α (1/s).
    pub binding_rate: f64,
    /// Binding capacity β.
    pub binding_ratio: f64,
    /// Chloride threshold in % of binder mass.
    pub threshold_pct: f64,
    /// Corrosion current density κ of active steel (A/m2).
    pub current_density: f64,
    pub chloride_molar_mass: f64,
    /// Binder mass per unit volume of concrete (kg/m3).
    pub binder_content: f64,
    /// Oxidation rate constant of ferrous ions (m3/mol/s).
    pub oxidation_rate: f64,
    /// Precipitation rate constant of ferric ions (1/s).
    pub precipitation_rate: f64,
    pub oxygen: f64,
    pub rust_molar_mass: f64,
    pub rust_density: f64,
}

impl TransportParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.porosity > 0.0 && self.porosity < 1.0) {
            return Err(ParamError::new(format!("porosity must lie in (0, 1), got {}", self.porosity)));
        }
        let nonneg = [
            ("chloride diffusivity", self.d_chloride),
            ("ferrous diffusivity", self.d_ferrous),
            ("ferric diffusivity", self.d_ferric),
            ("binding rate", self.binding_rate),
            ("binding ratio", self.binding_ratio),
            ("current density", self.current_density),
            ("oxidation rate", self.oxidation_rate),
            ("precipitation rate", self.precipitation_rate),
            ("oxygen concentration", self.oxygen),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ParamError::new(format!("{name} must be non-negative, got {v}")));
            }
        }
        let cracked = [
            ("chloride", self.d_chloride, self.d_chloride_cracked),
            ("ferrous", self.d_ferrous, self.d_ferrous_cracked),
            ("ferric", self.d_ferric, self.d_ferric_cracked),
        ];
        for (name, intact, crack) in cracked {
            if !(crack >= intact) {
                return Err(ParamError::new(format!(
                    "cracked {name} diffusivity {crack:e} is below the intact value {intact:e}"
                )));
            }
        }
        let positive = [
            ("chloride threshold", self.threshold_pct),
            ("chloride molar mass", self.chloride_molar_mass),
            ("binder content", self.binder_content),
            ("rust molar mass", self.rust_molar_mass),
            ("rust density", self.rust_density),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(ParamError::new(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Smallest liquid fraction allowed when pores fill with rust.
    pub fn liquid_floor(&self) -> f64 {
        1e-3 * self.porosity
    }
}

/// Chloride binding rate `<α(β c_f − c_b)>`; bound chlorides are never
/// released.
pub fn binding_rate(c_free: f64, c_bound: f64, p: &TransportParams) -> f64 {
    (p.binding_rate * (p.binding_ratio * c_free - c_bound)).max(0.0)
}

/// Total chloride content in % of binder mass.
pub fn total_chloride(c_free: f64, c_bound: f64, p: &TransportParams) -> Result<f64, ParamError> {
    if !(p.binder_content > 0.0) {
        return Err(ParamError::new("binder content must be positive"));
    }
    Ok(100.0 * p.chloride_molar_mass * p.porosity * (c_free + c_bound) / p.binder_content)
}

/// Oxidation, ferric and precipitation rates `(R_II, R_III, R_p)`.
pub fn reaction_rates(c_ferrous: f64, c_ferric: f64, p: &TransportParams) -> (f64, f64, f64) {
    let r2 = -p.oxidation_rate * c_ferrous * p.oxygen;
    let rp = p.precipitation_rate * c_ferric;
    (r2, -r2 - rp, rp)
}

/// Effective diffusivity of damaged material with liquid fraction `theta_l`.
pub fn damage_diffusivity(phi: f64, theta_l: f64, d_intact: f64, d_cracked: f64, porosity: f64) -> Result<f64, ParamError> {
    if !(theta_l >= 1e-3 * porosity * (1.0 - 1e-12)) {
        return Err(ParamError::new(format!("liquid fraction {theta_l:e} below the floor")));
    }
    Ok((1.0 - phi) * d_intact * (theta_l / porosity) + phi * d_cracked)
}

/// Ferrous ion influx (mol/m2/s) released by anodic current density `i_a`.
pub fn faraday_flux(current_density: f64) -> f64 {
    current_density / (ANODIC_ELECTRONS * FARADAY)
}

/// Surface chloride build-up from accumulated salt deposition:
/// `C_max = C0 + k √D_ac` with `D_ac` in g/m2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeiraBC {
    /// Initial chloride content (% of binder).
    pub initial_pct: f64,
    /// Growth coefficient k (% per √(g/m2)).
    pub k_cmax: f64,
    /// Deposition rate of salt solution (g/m2/s).
    pub deposition_rate: f64,
    /// Chloride mass fraction of the deposited solution.
    pub chloride_fraction: f64,
}

/// The value of `k_cmax` fitted to the chloride contents measured 7.5 mm
/// below a sprayed mortar surface.
pub const MEIRA_K_CMAX: f64 = 1.96e-3;

/// Free-chloride concentration that corresponds to a total content of
/// `pct` % of binder under binding equilibrium `c_b = β c_f`.
pub fn free_chloride_for_content(pct: f64, p: &TransportParams) -> f64 {
    pct / 100.0 * p.binder_content / (p.chloride_molar_mass * p.porosity * (1.0 + p.binding_ratio))
}

pub fn meira_surface_concentration(t: f64, bc: &MeiraBC, p: &TransportParams) -> f64 {
    let deposited = bc.deposition_rate * bc.chloride_fraction * t.max(0.0);
    let c_max = bc.initial_pct + bc.k_cmax * deposited.sqrt();
    free_chloride_for_content(c_max, p)
}

/// Chloride molarity (mol/m3) of a sodium chloride solution of `grams_per_litre`.
pub fn salinity_to_concentration(grams_per_litre: f64) -> f64 {
    1000.0 * grams_per_litre / NACL_MOLAR_MASS
}

/// Surface exposure of the chloride-exposed boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exposure {
    Meira(MeiraBC),
    /// Constant free-chloride concentration (mol/m3).
    Constant(f64),
}

impl Exposure {
    pub fn concentration(&self, t: f64, p: &TransportParams) -> f64 {
        match self {
            Exposure::Meira(bc) => meira_surface_concentration(t, bc, p),
            Exposure::Constant(c) => *c,
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn chen() -> TransportParams {
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
            current_density: 8e-3,
            chloride_molar_mass: 0.0355,
            binder_content: 575.0,
            oxidation_rate: 0.1,
            precipitation_rate: 2e-4,
            oxygen: 0.28,
            rust_molar_mass: 0.10685,
            rust_density: 3560.0,
        }
    }

    #[test]
    fn binding() {
        let p = chen();
        assert_relative_eq!(binding_rate(100.0, 0.0, &p), 7.0e-4, max_relative = 1e-12);
        assert_eq!(binding_rate(10.0, 7.0, &p), 0.0);
        assert_eq!(binding_rate(0.0, 10.0, &p), 0.0);
    }

    #[test]
    fn total_content() {
        let p = chen();
        assert_relative_eq!(total_chloride(238.3, 0.0, &p).unwrap(), 0.2207, epsilon = 1e-4);
        assert_eq!(total_chloride(0.0, 0.0, &p).unwrap(), 0.0);
        let ye = TransportParams {
            porosity: 0.19,
            binder_content: 372.0,
            ..chen()
        };
        assert_relative_eq!(total_chloride(60.0, 40.0, &ye).unwrap(), 0.1813, epsilon = 1e-4);
        let bad = TransportParams {
            binder_content: 0.0,
            ..chen()
        };
        assert!(total_chloride(1.0, 1.0, &bad).is_err());
    }

    #[test]
    fn faraday() {
        assert_relative_eq!(faraday_flux(8e-3), 4.146e-8, max_relative = 1e-3);
        assert_relative_eq!(faraday_flux(4.6e-2), 2.384e-7, max_relative = 1e-3);
        assert_eq!(faraday_flux(0.0), 0.0);
    }

    #[test]
    fn reactions_balance() {
        let p = chen();
        let (r2, r3, rp) = reaction_rates(1.0, 1.0, &p);
        assert_relative_eq!(r2, -0.028, max_relative = 1e-12);
        assert_relative_eq!(rp, 2e-4, max_relative = 1e-12);
        assert_relative_eq!(r3, 0.0278, max_relative = 1e-12);
        assert!((r2 + r3 + rp).abs() < 1e-16);
        assert_eq!(reaction_rates(0.0, 0.0, &p), (0.0, 0.0, 0.0));
    }

    #[test]
    fn diffusivity_limits() {
        assert_eq!(damage_diffusivity(0.0, 0.15, 2.7e-12, 1e-9, 0.15).unwrap(), 2.7e-12);
        assert_eq!(damage_diffusivity(1.0, 0.05, 2.7e-12, 1e-9, 0.15).unwrap(), 1e-9);
        assert_relative_eq!(
            damage_diffusivity(0.5, 0.15, 2.7e-12, 1e-9, 0.15).unwrap(),
            5.0135e-10,
            max_relative = 1e-12
        );
        assert!(damage_diffusivity(0.0, 1e-6, 2.7e-12, 1e-9, 0.15).is_err());
    }

    #[test]
    fn surface_concentrations() {
        let p = chen();
        assert_relative_eq!(free_chloride_for_content(0.196, &p), 124.5, epsilon = 0.05);
        let bc = MeiraBC {
            initial_pct: 0.0,
            k_cmax: MEIRA_K_CMAX,
            deposition_rate: 1.0,
            chloride_fraction: 0.03,
        };
        assert_eq!(meira_surface_concentration(0.0, &bc, &p), 0.0);
        assert_relative_eq!(salinity_to_concentration(35.0), 598.9, epsilon = 0.05);
        assert_relative_eq!(salinity_to_concentration(60.0), 1026.7, epsilon = 0.05);
        assert_eq!(salinity_to_concentration(0.0), 0.0);
    }

    #[test]
    fn precipitation_rate_of_fixed_ferric_concentration() {
        let p = chen();
        let (_, _, rp) = reaction_rates(0.0, 1.0, &p);
        let dtheta = p.rust_molar_mass / p.rust_density * 0.15 * rp;
        assert_relative_eq!(dtheta, 9.004e-10, max_relative = 1e-3);
    }
}
