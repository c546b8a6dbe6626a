use super::{damage_diffusivity, faraday_flux, ActivationState, TransportParams};
use crate::error::StepRejection;
use crate::fem::{Coefficient, FemError, CsrMatrix, DirectSolver, Geometry, ScalarSpace, SparseSystem};
use crate::mesh::{Edge, Mesh, Subdomain};
use crate::state::FieldState;

/// Active-set passes allowed for the binding sink.
const BINDING_PASSES: usize = 5;
/// Fixed-point passes on the liquid fraction of an iron step.
const LIQUID_PASSES: usize = 20;
/// Default undershoot of free chlorides tolerated, relative to the surface
/// value. The consistent mass matrix undershoots ahead of a sharp front by a
/// few percent when D dt / h² is small, and a shorter step makes it worse;
/// a diverging solve overshoots far beyond this.
pub const UNDERSHOOT_TOLERANCE: f64 = 0.1;

/// Discrete transport problem on the concrete subdomain.
#[derive(Debug, Clone)]
pub struct TransportDomain {
    pub space: ScalarSpace,
    /// Dofs on the chloride-exposed boundary.
    pub exposed_dofs: Vec<usize>,
    /// Steel-interface edges.
    pub interface_edges: Vec<Edge>,
    edge_lengths: Vec<f64>,
    /// `∫ N_i` per dof.
    pub lumped: Vec<f64>,
    /// Free-chloride undershoot, relative to the surface value, beyond
    /// which a step is rejected.
    pub undershoot_tolerance: f64,
    solver: DirectSolver,
}

/// Outcome of a chloride step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChlorideStep {
    /// Chloride entering through the exposed boundary (mol per metre of
    /// prism length).
    pub influx: f64,
    pub binding_passes: usize,
}

/// Outcome of an iron step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IronStep {
    /// Ferrous ions released from the steel (mol per metre).
    pub injected: f64,
    /// Nodes whose liquid fraction sits at the floor.
    pub clamped_nodes: usize,
}

impl TransportDomain {
    pub fn new(mesh: &Mesh, geometry: &Geometry) -> Self {
        let space = ScalarSpace::on_subdomain(mesh, geometry, Subdomain::Concrete);
        let exposed_dofs = Mesh::edge_set_nodes(&mesh.boundaries.chloride_exposed)
            .into_iter()
            .filter_map(|v| space.dof(v))
            .collect();
        let lumped = space.integrate_shapes(Coefficient::Constant(1.0));
        TransportDomain {
            space,
            exposed_dofs,
            interface_edges: mesh.boundaries.steel_interface.clone(),
            edge_lengths: mesh.boundaries.steel_interface.iter().map(|e| mesh.edge_length(*e)).collect(),
            lumped,
            undershoot_tolerance: UNDERSHOOT_TOLERANCE,
            solver: DirectSolver::new(),
        }
    }

    /// Hold every concrete node within `depth` of the exposed boundary at
    /// the surface value, so the boundary condition acts on a surface layer
    /// rather than on the surface itself. Returns the number of added dofs.
    pub fn extend_exposed_layer(&mut self, mesh: &Mesh, depth: f64) -> usize {
        if depth <= 0.0 {
            return 0;
        }
        let edges = &mesh.boundaries.chloride_exposed;
        let before = self.exposed_dofs.len();
        let tol = 1e-9 * depth;
        for (dof, &v) in self.space.node_of_dof.iter().enumerate() {
            let x = mesh.nodes[v];
            let near = edges
                .iter()
                .any(|e| segment_distance(x, mesh.nodes[e[0]], mesh.nodes[e[1]]) <= depth + tol);
            if near {
                self.exposed_dofs.push(dof);
            }
        }
        self.exposed_dofs.sort_unstable();
        self.exposed_dofs.dedup();
        self.exposed_dofs.len() - before
    }

    /// Nodal liquid fraction `p0 − θp`, floored, and the number of floored
    /// concrete nodes.
    pub fn liquid_fraction(&self, theta_p: &[f64], p: &TransportParams) -> (Vec<f64>, usize) {
        let floor = p.liquid_floor();
        let mut clamped = 0;
        let mut out = vec![p.porosity; theta_p.len()];
        for &v in &self.space.node_of_dof {
            let t = p.porosity - theta_p[v];
            if t < floor {
                clamped += 1;
                out[v] = floor;
            } else {
                out[v] = t;
            }
        }
        (out, clamped)
    }

    /// Chloride held in the concrete (mol per metre), free plus bound.
    pub fn chloride_inventory(&self, state: &FieldState) -> f64 {
        let theta = &state.theta_l_chloride;
        let m = self.space.mass(Coefficient::Nodal(theta));
        let free: f64 = m.mul_vec(&self.space.gather(&state.c_free)).iter().sum();
        let bound: f64 = self
            .space
            .node_of_dof
            .iter()
            .zip(&self.lumped)
            .map(|(&v, m)| m * theta[v] * state.c_bound[v])
            .sum();
        free + bound
    }

    /// Iron held in the concrete (mol per metre): dissolved ions plus
    /// precipitated rust.
    pub fn iron_inventory(&self, state: &FieldState, p: &TransportParams) -> f64 {
        let (theta, _) = self.liquid_fraction(&state.theta_p, p);
        let m = self.space.mass(Coefficient::Nodal(&theta));
        let dissolved: Vec<f64> = self
            .space
            .node_of_dof
            .iter()
            .map(|&v| state.c_ferrous[v] + state.c_ferric[v])
            .collect();
        let ions: f64 = m.mul_vec(&dissolved).iter().sum();
        let rust: f64 = self
            .space
            .node_of_dof
            .iter()
            .zip(&self.lumped)
            .map(|(&v, m)| m * state.theta_p[v])
            .sum::<f64>()
            * p.rust_density
            / p.rust_molar_mass;
        ions + rust
    }

    /// Edge-consistent load of a nodal boundary flux given on the interface
    /// (indexed by mesh node).
    fn interface_load(&self, flux: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.space.num_dofs()];
        for (e, &len) in self.interface_edges.iter().zip(&self.edge_lengths) {
            let (Some(a), Some(b)) = (self.space.dof(e[0]), self.space.dof(e[1])) else {
                continue;
            };
            let (ja, jb) = (flux[e[0]], flux[e[1]]);
            f[a] += len / 6.0 * (2.0 * ja + jb);
            f[b] += len / 6.0 * (ja + 2.0 * jb);
        }
        f
    }

    fn diffusivity(&self, state: &FieldState, theta_l: &[f64], d0: f64, dc: f64, p: &TransportParams) -> Result<Vec<[f64; 3]>, StepRejection> {
        let phi = self.space.at_quadrature(Coefficient::Nodal(&state.phase));
        let theta = self.space.at_quadrature(Coefficient::Nodal(theta_l));
        let mut out = vec![[0.0; 3]; phi.len()];
        for k in 0..phi.len() {
            for q in 0..3 {
                out[k][q] = damage_diffusivity(phi[k][q].clamp(0.0, 1.0), theta[k][q], d0, dc, p.porosity)
                    .map_err(|_| StepRejection::Solver(FemError::NonFinite("diffusivity")))?;
            }
        }
        Ok(out)
    }

    /// Backward-Euler step of free and bound chlorides with surface value
    /// `c_surface` on the exposed boundary.
    ///
    /// With `crack_transport` false, cracked material keeps the intact
    /// chloride diffusivity.
    pub fn step_chlorides(
        &mut self,
        state: &mut FieldState,
        dt: f64,
        p: &TransportParams,
        c_surface: f64,
        crack_transport: bool,
    ) -> Result<ChlorideStep, StepRejection> {
        let (theta_new, _) = self.liquid_fraction(&state.theta_p, p);
        let theta_old = state.theta_l_chloride.clone();
        let dc = if crack_transport { p.d_chloride_cracked } else { p.d_chloride };
        let d = self.diffusivity(state, &theta_new, p.d_chloride, dc, p)?;

        let space = &self.space;
        let mut base = space.mass(Coefficient::Nodal(&theta_new));
        base.scale(1.0 / dt);
        base.add_scaled(1.0, &space.stiffness(Coefficient::Quadrature(&d)));
        let c_old = space.gather(&state.c_free);
        let mut rhs0 = space.mass(Coefficient::Nodal(&theta_old)).mul_vec(&c_old);
        rhs0.iter_mut().for_each(|v| *v /= dt);

        let nodes = &space.node_of_dof;
        // bound chlorides carried to the new liquid fraction
        let cb_old: Vec<f64> = nodes
            .iter()
            .map(|&v| theta_old[v] / theta_new[v] * state.c_bound[v])
            .collect();
        // implicit in c_b as well, so large α·dt cannot overshoot equilibrium
        let rate = p.binding_rate / (1.0 + p.binding_rate * dt);
        let w: Vec<f64> = nodes
            .iter()
            .zip(&self.lumped)
            .map(|(&v, m)| m * theta_new[v] * rate)
            .collect();
        let mut active: Vec<bool> = (0..nodes.len())
            .map(|i| p.binding_rate > 0.0 && p.binding_ratio * c_old[i] >= cb_old[i])
            .collect();

        let mut passes = 0;
        let (system, c_new) = loop {
            passes += 1;
            let mut a = base.clone();
            let mut b = rhs0.clone();
            let diag: Vec<f64> = (0..nodes.len())
                .map(|i| if active[i] { w[i] * p.binding_ratio } else { 0.0 })
                .collect();
            a.add_diagonal(&diag);
            for i in 0..nodes.len() {
                if active[i] {
                    b[i] += w[i] * cb_old[i];
                }
            }
            let mut system = SparseSystem::new(a, b)?;
            for &dof in &self.exposed_dofs {
                system.constrain(dof, c_surface);
            }
            let c_new = self.solver.solve(&system)?;
            let next: Vec<bool> = (0..nodes.len())
                .map(|i| p.binding_rate > 0.0 && p.binding_ratio * c_new[i] > cb_old[i])
                .collect();
            if next == active || passes >= BINDING_PASSES {
                break (system, c_new);
            }
            active = next;
        };

        let tol = -self.undershoot_tolerance * c_surface.abs().max(f64::MIN_POSITIVE);
        let worst = c_new.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1));
        if let Some((i, &v)) = worst.filter(|(_, &v)| v < tol) {
            return Err(StepRejection::NegativeConcentration {
                node: nodes[i],
                value: v,
            });
        }

        let r = system.residual(&c_new);
        let influx = dt * self.exposed_dofs.iter().map(|&i| r[i]).sum::<f64>();

        for (i, &v) in nodes.iter().enumerate() {
            // the rate the matrix used, so the step conserves mass even when
            // the active set is still cycling at the pass limit
            let rb = if active[i] {
                rate * (p.binding_ratio * c_new[i] - cb_old[i])
            } else {
                0.0
            };
            state.c_bound[v] = cb_old[i] + dt * rb;
            state.c_free[v] = c_new[i];
            state.theta_l_chloride[v] = theta_new[v];
        }
        Ok(ChlorideStep {
            influx,
            binding_passes: passes,
        })
    }

    /// Backward-Euler step of ferrous and ferric ions and precipitate
    /// growth, with the Faraday influx of the current interface currents.
    pub fn step_iron(
        &mut self,
        state: &mut FieldState,
        dt: f64,
        p: &TransportParams,
        activation: &ActivationState,
        crack_transport: bool,
    ) -> Result<IronStep, StepRejection> {
        let space = &self.space;
        let nodes = &space.node_of_dof;
        let (theta_n, _) = self.liquid_fraction(&state.theta_p, p);
        let (d2c, d3c) = if crack_transport {
            (p.d_ferrous_cracked, p.d_ferric_cracked)
        } else {
            (p.d_ferrous, p.d_ferric)
        };
        let d2 = self.diffusivity(state, &theta_n, p.d_ferrous, d2c, p)?;
        let d3 = self.diffusivity(state, &theta_n, p.d_ferric, d3c, p)?;

        let oxidation: Vec<f64> = theta_n.iter().map(|t| t * p.oxidation_rate * p.oxygen).collect();
        let reaction = space.mass(Coefficient::Nodal(&oxidation));
        let mut k2 = space.stiffness(Coefficient::Quadrature(&d2));
        k2.add_scaled(1.0, &reaction);
        let mut k3 = space.stiffness(Coefficient::Quadrature(&d3));
        let precip: Vec<f64> = nodes
            .iter()
            .zip(&self.lumped)
            .map(|(&v, m)| m * theta_n[v] * p.precipitation_rate)
            .collect();
        k3.add_diagonal(&precip);

        let m_old = space.mass(Coefficient::Nodal(&theta_n));
        let c2_old = space.gather(&state.c_ferrous);
        let c3_old = space.gather(&state.c_ferric);
        let mut store2 = m_old.mul_vec(&c2_old);
        let mut store3 = m_old.mul_vec(&c3_old);
        store2.iter_mut().chain(store3.iter_mut()).for_each(|v| *v /= dt);

        let mut flux = vec![0.0; state.c_ferrous.len()];
        for (&v, &i) in activation.nodes.iter().zip(&activation.current) {
            flux[v] = faraday_flux(i);
        }
        let load = self.interface_load(&flux);
        let injected = dt * load.iter().sum::<f64>();
        let mut rhs2 = store2.clone();
        for (r, f) in rhs2.iter_mut().zip(&load) {
            *r += f;
        }

        let growth = p.rust_molar_mass / p.rust_density;
        let theta_p_old = space.gather(&state.theta_p);
        let floor = p.liquid_floor();
        let mut theta_new = theta_n.clone();
        let mut result = None;
        for _ in 0..LIQUID_PASSES {
            let m_new = space.mass(Coefficient::Nodal(&theta_new));
            let solve = |solver: &mut DirectSolver, k: &CsrMatrix, rhs: Vec<f64>| {
                let mut a = m_new.clone();
                a.scale(1.0 / dt);
                a.add_scaled(1.0, k);
                solver.solve(&SparseSystem::new(a, rhs)?)
            };
            let c2 = solve(&mut self.solver, &k2, rhs2.clone())?;
            let mut rhs3 = reaction.mul_vec(&c2);
            for (r, s) in rhs3.iter_mut().zip(&store3) {
                *r += s;
            }
            let c3 = solve(&mut self.solver, &k3, rhs3)?;
            let theta_p: Vec<f64> = (0..nodes.len())
                .map(|i| theta_p_old[i] + dt * growth * precip[i] / self.lumped[i] * c3[i])
                .collect();
            let mut change = 0.0f64;
            for (i, &v) in nodes.iter().enumerate() {
                let t = (p.porosity - theta_p[i]).max(floor);
                change = change.max((t - theta_new[v]).abs());
                theta_new[v] = t;
            }
            result = Some((c2, c3, theta_p));
            if change <= 1e-15 * p.porosity {
                break;
            }
        }
        let (c2, c3, theta_p) = result.expect("at least one pass");
        let mut clamped = 0;
        for (i, &v) in nodes.iter().enumerate() {
            state.c_ferrous[v] = c2[i];
            state.c_ferric[v] = c3[i];
            state.theta_p[v] = theta_p[i];
            if p.porosity - theta_p[i] < floor {
                clamped += 1;
            }
        }
        if clamped * 100 > nodes.len() {
            log::warn!("liquid fraction floored on {clamped} of {} nodes", nodes.len());
        }
        Ok(IronStep {
            injected,
            clamped_nodes: clamped,
        })
    }
}

fn segment_distance(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x[0] - a[0] - s * dx).hypot(x[1] - a[1] - s * dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::tests::chen;
    use crate::chem::ActivationMode;
    use crate::mesh::{generate_ogrid, OGridSpec, Side};
    use approx::assert_relative_eq;

    fn coarse() -> Mesh {
        let spec = OGridSpec {
            circumferential_divisions: 32,
            far_field_size: 0.015,
            ..OGridSpec::with_cover(0.1, 0.1, 0.01, 0.02)
        };
        let mut mesh = generate_ogrid(&spec).unwrap();
        mesh.expose_sides(&[Side::Top]).unwrap();
        mesh
    }

    #[test]
    fn chloride_mass_balance() {
        let mesh = coarse();
        let p = chen();
        let mut dom = TransportDomain::new(&mesh, &Geometry::new(&mesh));
        let mut s = FieldState::new(&mesh, p.porosity, 0, 0.0);
        let mut entered = 0.0;
        for _ in 0..10 {
            let before = dom.chloride_inventory(&s);
            let step = dom.step_chlorides(&mut s, 60.0 * 86400.0, &p, 1000.0, true).unwrap();
            let after = dom.chloride_inventory(&s);
            assert_relative_eq!(after - before, step.influx, max_relative = 1e-9, epsilon = 1e-12);
            entered += step.influx;
        }
        assert!(entered > 0.0);
        assert!(s.c_bound.iter().any(|&c| c > 0.0));
        assert!(s.c_bound.iter().zip(&s.c_free).all(|(b, f)| *b <= p.binding_ratio * f.max(0.0) + 1e-9));
    }

    #[test]
    fn iron_mass_balance() {
        let mesh = coarse();
        let p = chen();
        let mut dom = TransportDomain::new(&mesh, &Geometry::new(&mesh));
        let mut s = FieldState::new(&mesh, p.porosity, 0, 0.0);
        let mut act = ActivationState::new(Mesh::edge_set_nodes(&mesh.boundaries.steel_interface));
        let hot = vec![1.0; act.nodes.len()];
        act.update(&hot, 0.0, ActivationMode::Uniform, &p).unwrap();
        let mut injected = 0.0;
        for _ in 0..20 {
            let before = dom.iron_inventory(&s, &p);
            let step = dom.step_iron(&mut s, 5.0 * 86400.0, &p, &act, true).unwrap();
            let after = dom.iron_inventory(&s, &p);
            assert_relative_eq!(after - before, step.injected, max_relative = 1e-8);
            injected += step.injected;
        }
        let r = mesh.rebar().unwrap().radius;
        let expected = faraday_flux(p.current_density) * 2.0 * std::f64::consts::PI * r * 100.0 * 86400.0;
        assert_relative_eq!(injected, expected, max_relative = 0.01);
        let max = s.theta_p.iter().cloned().fold(0.0, f64::max);
        assert!(max > 0.0);
        assert!(s.theta_p.iter().all(|&t| t >= -1e-5 * max));
    }

    #[test]
    fn intact_transport_ignores_damage() {
        let mesh = coarse();
        let p = chen();
        let mut dom = TransportDomain::new(&mesh, &Geometry::new(&mesh));
        let mut a = FieldState::new(&mesh, p.porosity, 0, 0.0);
        let mut b = a.clone();
        b.phase.iter_mut().for_each(|f| *f = 0.5);
        dom.step_chlorides(&mut a, 86400.0 * 60.0, &p, 500.0, false).unwrap();
        dom.step_chlorides(&mut b, 86400.0 * 60.0, &p, 500.0, false).unwrap();
        for (x, y) in a.c_free.iter().zip(&b.c_free) {
            assert_relative_eq!(x, y, max_relative = 1e-10, epsilon = 1e-12);
        }
    }
}
