//! Derived quantities and file outputs.

mod output;

pub use output::{read_timeseries, write_timeseries, write_vtk, TimelineRecord, TIMESERIES_HEADER};

use crate::chem::{faraday_flux, total_chloride, ActivationState, TransportParams, IRON_MOLAR_MASS};
use crate::error::{Error, Result};
use crate::fem::LINE_GAUSS2;
use crate::mech::{degradation, expansion_coefficient, CzmParams, MechParams};
use crate::mesh::{Edge, Mesh, MeshError, Subdomain};
use crate::state::FieldState;

/// Steel density used for the relative mass loss (kg/m3).
pub const STEEL_DENSITY: f64 = 7850.0;
/// Crack width used to normalize sweep results (m).
pub const REFERENCE_CRACK_WIDTH: f64 = 0.31e-3;

/// Surface crack width from the inelastic strain along the upper surface.
#[derive(Debug, Clone)]
pub struct CrackGauge {
    edges: Vec<Edge>,
    lengths: Vec<f64>,
    /// x-derivatives of the shape functions of the adjacent triangle.
    dndx: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
}

impl CrackGauge {
    pub fn new(mesh: &Mesh) -> std::result::Result<Self, MeshError> {
        let edges = mesh.boundaries.upper_surface.clone();
        if edges.is_empty() {
            return Err(MeshError::Invalid("upper surface is empty".into()));
        }
        let adjacent = mesh.adjacent_concrete(&edges)?;
        let lengths = edges.iter().map(|&e| mesh.edge_length(e)).collect();
        let triangles: Vec<[usize; 3]> = adjacent.iter().map(|&t| mesh.triangles[t]).collect();
        let dndx = adjacent
            .iter()
            .map(|&t| {
                let [a, b, c] = mesh.triangles[t];
                let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
                let twice = 2.0 * mesh.triangle_area(t);
                [(pb[1] - pc[1]) / twice, (pc[1] - pa[1]) / twice, (pa[1] - pb[1]) / twice]
            })
            .collect();
        Ok(CrackGauge {
            edges,
            lengths,
            dndx,
            triangles,
        })
    }

    /// Crack width w = ∫ (1 − g(φ)) (ε_x − ε★_x) dΓ over the upper surface.
    pub fn width(&self, state: &FieldState, p: &MechParams, czm: &CzmParams, porosity: f64) -> Result<f64> {
        let mut w = 0.0;
        for (k, e) in self.edges.iter().enumerate() {
            let strain: f64 = self.triangles[k]
                .iter()
                .zip(&self.dndx[k])
                .map(|(&v, d)| d * state.displacement[2 * v])
                .sum();
            let mut edge = 0.0;
            for &(t, weight) in &LINE_GAUSS2 {
                let phi = (1.0 - t) * state.phase[e[0]] + t * state.phase[e[1]];
                let theta = (1.0 - t) * state.theta_p[e[0]] + t * state.theta_p[e[1]];
                let eig = expansion_coefficient(theta, p)? * theta / porosity;
                let g = degradation(phi.clamp(0.0, 1.0), czm).0;
                edge += weight * (1.0 - g) * (strain - eig);
            }
            w += self.lengths[k] * edge;
        }
        Ok(w)
    }
}

/// Iron dissolution rate (mol/s per metre of bar) of the current anodic
/// currents.
pub fn iron_release_rate(mesh: &Mesh, activation: &ActivationState) -> f64 {
    let mut current = std::collections::HashMap::with_capacity(activation.nodes.len());
    for (&v, &i) in activation.nodes.iter().zip(&activation.current) {
        current.insert(v, i);
    }
    mesh.boundaries
        .steel_interface
        .iter()
        .map(|&e| {
            let j = |v: usize| faraday_flux(current.get(&v).copied().unwrap_or(0.0));
            0.5 * mesh.edge_length(e) * (j(e[0]) + j(e[1]))
        })
        .sum()
}

/// Steel mass (kg/m) of `moles` of dissolved iron.
pub fn iron_mass(moles: f64) -> f64 {
    moles * IRON_MOLAR_MASS
}

/// Mass loss in percent of a bar of radius `radius`.
pub fn relative_mass_loss(mass: f64, radius: f64) -> f64 {
    100.0 * mass / (STEEL_DENSITY * std::f64::consts::PI * radius * radius)
}

/// Field sampled by [`sample_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileField {
    FreeChloride,
    BoundChloride,
    /// Total chloride content in % of binder mass.
    TotalChloride,
    Ferrous,
    Ferric,
    Saturation,
    Phase,
}

impl ProfileField {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "c_f" => ProfileField::FreeChloride,
            "c_b" => ProfileField::BoundChloride,
            "C_tot" => ProfileField::TotalChloride,
            "c_II" => ProfileField::Ferrous,
            "c_III" => ProfileField::Ferric,
            "S_p" => ProfileField::Saturation,
            "phi" | "φ" => ProfileField::Phase,
            _ => return None,
        })
    }
}

/// Samples along a straight segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRequest {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub count: usize,
    pub field: ProfileField,
}

/// Nodal values of a profile field, indexed by mesh node.
pub fn nodal_field(state: &FieldState, field: ProfileField, p: &TransportParams) -> Result<Vec<f64>> {
    Ok(match field {
        ProfileField::FreeChloride => state.c_free.clone(),
        ProfileField::BoundChloride => state.c_bound.clone(),
        ProfileField::TotalChloride => state
            .c_free
            .iter()
            .zip(&state.c_bound)
            .map(|(&f, &b)| total_chloride(f, b, p))
            .collect::<std::result::Result<_, _>>()?,
        ProfileField::Ferrous => state.c_ferrous.clone(),
        ProfileField::Ferric => state.c_ferric.clone(),
        ProfileField::Saturation => state.saturation(p.porosity),
        ProfileField::Phase => state.phase.clone(),
    })
}

/// Barycentric coordinates of `x` in concrete triangle `t`, if inside.
fn locate(mesh: &Mesh, t: usize, x: [f64; 2]) -> Option<[f64; 3]> {
    let [a, b, c] = mesh.triangles[t];
    let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
    let area = mesh.triangle_area(t);
    let l0 = crate::mesh::signed_area(x, pb, pc) / area;
    let l1 = crate::mesh::signed_area(pa, x, pc) / area;
    let l2 = 1.0 - l0 - l1;
    let tol = -1e-10;
    (l0 >= tol && l1 >= tol && l2 >= tol).then_some([l0, l1, l2])
}

/// Linear interpolation of nodal `values` at `x` over the listed triangles.
pub fn interpolate(mesh: &Mesh, triangles: &[usize], values: &[f64], x: [f64; 2]) -> Option<f64> {
    triangles.iter().find_map(|&t| {
        locate(mesh, t, x).map(|l| {
            let tri = mesh.triangles[t];
            l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]]
        })
    })
}

/// Linear interpolation of a concrete field along a segment. Each sample is
/// (distance from the start, value); points outside the concrete are `None`.
pub fn sample_profile(
    mesh: &Mesh,
    state: &FieldState,
    p: &TransportParams,
    req: &ProfileRequest,
) -> Result<Vec<(f64, Option<f64>)>> {
    if req.count < 2 {
        return Err(Error::Card(format!("a profile needs at least 2 samples, got {}", req.count)));
    }
    let values = nodal_field(state, req.field, p)?;
    let concrete: Vec<usize> = mesh.concrete_triangles().collect();
    let dx = req.end[0] - req.start[0];
    let dy = req.end[1] - req.start[1];
    let length = dx.hypot(dy);
    let mut out = Vec::with_capacity(req.count);
    for k in 0..req.count {
        let s = k as f64 / (req.count - 1) as f64;
        let x = [req.start[0] + s * dx, req.start[1] + s * dy];
        out.push((s * length, interpolate(mesh, &concrete, &values, x)));
    }
    if out.iter().all(|(_, v)| v.is_none()) {
        return Err(Error::Card("profile lies entirely outside the concrete".into()));
    }
    Ok(out)
}

/// Largest value of a nodal field over the concrete nodes.
pub fn concrete_max(mesh: &Mesh, values: &[f64]) -> f64 {
    let mut max = 0.0f64;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if mesh.subdomains[t] == Subdomain::Concrete {
            for &v in tri {
                max = max.max(values[v]);
            }
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::tests::chen as chen_transport;
    use crate::chem::ActivationMode;
    use crate::mech::czm_calibrate;
    use crate::mech::tests::chen as chen_mech;
    use crate::mesh::{generate_ogrid, OGridSpec, Side};
    use approx::assert_relative_eq;

    fn mesh() -> Mesh {
        let spec = OGridSpec {
            circumferential_divisions: 32,
            far_field_size: 0.015,
            ..OGridSpec::with_cover(0.1, 0.1, 0.01, 0.02)
        };
        let mut m = generate_ogrid(&spec).unwrap();
        m.expose_sides(&[Side::Top]).unwrap();
        m
    }

    #[test]
    fn width_vanishes_without_damage() {
        let m = mesh();
        let p = chen_mech();
        let czm = czm_calibrate(&p, 1e-3).unwrap();
        let mut s = FieldState::new(&m, 0.15, 0, 0.0);
        for (k, u) in s.displacement.iter_mut().enumerate() {
            *u = 1e-4 * k as f64;
        }
        assert_eq!(CrackGauge::new(&m).unwrap().width(&s, &p, &czm, 0.15).unwrap(), 0.0);
    }

    #[test]
    fn width_of_a_uniform_strain() {
        let m = mesh();
        let p = chen_mech();
        let czm = czm_calibrate(&p, 1e-3).unwrap();
        let mut s = FieldState::new(&m, 0.15, 0, 0.0);
        for (v, x) in m.nodes.iter().enumerate() {
            s.displacement[2 * v] = 2e-4 * x[0];
        }
        s.phase.iter_mut().for_each(|f| *f = 1.0);
        let w = CrackGauge::new(&m).unwrap().width(&s, &p, &czm, 0.15).unwrap();
        assert_relative_eq!(w, 2e-4 * 0.1, max_relative = 1e-10);
    }

    #[test]
    fn mass_loss_closed_form() {
        let m = mesh();
        let p = chen_transport();
        let mut act = ActivationState::new(Mesh::edge_set_nodes(&m.boundaries.steel_interface));
        assert_eq!(iron_release_rate(&m, &act), 0.0);
        act.update(&vec![1.0; act.nodes.len()], 0.0, ActivationMode::Uniform, &p).unwrap();
        let perimeter: f64 = m.boundaries.steel_interface.iter().map(|&e| m.edge_length(e)).sum();
        let t = 86400.0 * 365.0;
        let mass = iron_mass(iron_release_rate(&m, &act) * t);
        let expected = p.current_density / (2.0 * 96485.0) * IRON_MOLAR_MASS * perimeter * t;
        assert_relative_eq!(mass, expected, max_relative = 1e-12);
        let r = 0.005;
        assert_relative_eq!(
            relative_mass_loss(mass, r),
            100.0 * expected / (STEEL_DENSITY * std::f64::consts::PI * r * r),
            max_relative = 1e-12
        );
    }

    #[test]
    fn profiles_interpolate_linear_fields() {
        let m = mesh();
        let p = chen_transport();
        let mut s = FieldState::new(&m, 0.15, 0, 0.0);
        for (v, x) in m.nodes.iter().enumerate() {
            s.c_free[v] = 3.0 + 20.0 * x[0] - 7.0 * x[1];
        }
        let req = ProfileRequest {
            start: [0.01, 0.099],
            end: [0.09, 0.01],
            count: 17,
            field: ProfileField::FreeChloride,
        };
        for (d, v) in sample_profile(&m, &s, &p, &req).unwrap() {
            let t = d / (0.08f64.hypot(0.089));
            let x = [0.01 + t * 0.08, 0.099 - t * 0.089];
            assert_relative_eq!(v.unwrap(), 3.0 + 20.0 * x[0] - 7.0 * x[1], max_relative = 1e-10);
        }
    }

    #[test]
    fn samples_in_the_steel_are_missing() {
        let m = mesh();
        let p = chen_transport();
        let s = FieldState::new(&m, 0.15, 0, 0.0);
        let c = m.rebar().unwrap().center;
        let req = ProfileRequest {
            start: [c[0], c[1] + 0.02],
            end: c,
            count: 5,
            field: ProfileField::Phase,
        };
        let out = sample_profile(&m, &s, &p, &req).unwrap();
        assert_eq!(out[0].1, Some(0.0));
        assert_eq!(out[4].1, None);
        let outside = ProfileRequest {
            start: [1.0, 1.0],
            end: [2.0, 2.0],
            ..req
        };
        assert!(sample_profile(&m, &s, &p, &outside).is_err());
    }
}
