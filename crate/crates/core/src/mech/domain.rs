use super::{concrete_material, crack_driving_force, degradation, degradation_second, expansion_coefficient, CzmParams, MechParams};
use crate::error::StepRejection;
use crate::fem::{
    assemble_elasticity, element_strain, Coefficient, CsrMatrix, DirectSolver, Eigenstrain, ElasticMaterial, FemError,
    Geometry, ScalarSpace, SparseSystem, VectorSpace,
};
use crate::mesh::{Mesh, MeshError, Subdomain};
use crate::state::FieldState;

/// Convergence of the phase-field Newton iteration (projected residual per
/// unit nodal area).
pub const PHASE_TOLERANCE: f64 = 1e-8;
pub const PHASE_MAX_ITERATIONS: usize = 100;
pub const LINE_SEARCH_HALVINGS: usize = 10;
/// Stop of the displacement / phase-field alternation.
pub const STAGGER_TOLERANCE: f64 = 1e-4;
pub const STAGGER_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFieldReport {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredReport {
    pub iterations: usize,
    pub converged: bool,
    /// Largest nodal phase-field change of the last pass.
    pub last_change: f64,
}

/// Discrete mechanics on the whole section and the phase field on the
/// concrete.
#[derive(Debug, Clone)]
pub struct MechanicsDomain {
    pub vector: VectorSpace,
    pub phase: ScalarSpace,
    /// Concrete element index of each mesh triangle (None for steel).
    pub concrete_index: Vec<Option<usize>>,
    /// Displacement dofs fixed to zero against rigid-body motion.
    pub fixed_dofs: Vec<usize>,
    laplacian: CsrMatrix,
    lumped: Vec<f64>,
    elastic_solver: DirectSolver,
    phase_solver: DirectSolver,
}

impl MechanicsDomain {
    pub fn new(mesh: &Mesh, geometry: &Geometry) -> Result<Self, MeshError> {
        let phase = ScalarSpace::on_subdomain(mesh, geometry, Subdomain::Concrete);
        let mut concrete_index = vec![None; mesh.num_triangles()];
        for (k, &t) in phase.elements.iter().enumerate() {
            concrete_index[t] = Some(k);
        }
        let [x0, y0, x1, y1] = mesh.bounding_box();
        let tol = 1e-9 * (x1 - x0).max(y1 - y0);
        let bottom: Vec<usize> = (0..mesh.num_nodes())
            .filter(|&v| mesh.nodes[v][1] <= y0 + tol)
            .collect();
        let left = bottom.iter().copied().min_by(|&a, &b| mesh.nodes[a][0].total_cmp(&mesh.nodes[b][0]));
        let right = bottom.iter().copied().max_by(|&a, &b| mesh.nodes[a][0].total_cmp(&mesh.nodes[b][0]));
        let (Some(left), Some(right)) = (left, right) else {
            return Err(MeshError::Invalid("no bottom boundary nodes".into()));
        };
        if left == right {
            return Err(MeshError::Invalid(
                "need two distinct bottom nodes to suppress rigid-body motion".into(),
            ));
        }
        let laplacian = phase.stiffness(Coefficient::Constant(1.0));
        let lumped = phase.integrate_shapes(Coefficient::Constant(1.0));
        Ok(MechanicsDomain {
            vector: VectorSpace::new(mesh, geometry),
            phase,
            concrete_index,
            fixed_dofs: vec![2 * left, 2 * left + 1, 2 * right + 1],
            laplacian,
            lumped,
            elastic_solver: DirectSolver::new(),
            phase_solver: DirectSolver::new(),
        })
    }

    /// Materials and eigenstrains at the quadrature points of every
    /// triangle.
    fn loading(
        &self,
        state: &FieldState,
        p: &MechParams,
        czm: &CzmParams,
        porosity: f64,
    ) -> Result<(Vec<[ElasticMaterial; 3]>, Vec<[Eigenstrain; 3]>), StepRejection> {
        let nt = self.vector.triangles.len();
        let steel = p.steel();
        let mut materials = vec![[steel; 3]; nt];
        let mut eigen = vec![[Eigenstrain::default(); 3]; nt];
        let theta = self.phase.at_quadrature(Coefficient::Nodal(&state.theta_p));
        let phi = self.phase.at_quadrature(Coefficient::Nodal(&state.phase));
        for (k, &t) in self.phase.elements.iter().enumerate() {
            for q in 0..3 {
                let tp = theta[k][q];
                materials[t][q] = concrete_material(tp, phi[k][q], p, czm);
                let coef = expansion_coefficient(tp, p)
                    .map_err(|_| StepRejection::Solver(FemError::NonFinite("eigenstrain")))?;
                eigen[t][q] = Eigenstrain::isotropic(coef * tp / porosity);
            }
        }
        Ok((materials, eigen))
    }

    /// Degraded elasticity with the precipitation eigenstrain load.
    pub fn solve_mechanics(
        &mut self,
        state: &mut FieldState,
        p: &MechParams,
        czm: &CzmParams,
        porosity: f64,
    ) -> Result<(), StepRejection> {
        let (materials, eigen) = self.loading(state, p, czm, porosity)?;
        let mut system = assemble_elasticity(&self.vector, &materials, &eigen, p.body_force)?;
        for &d in &self.fixed_dofs {
            system.constrain(d, 0.0);
        }
        state.displacement = self.elastic_solver.solve(&system)?;
        Ok(())
    }

    /// Undegraded stress (σxx, σyy, σxy, σzz) at the quadrature points of
    /// each concrete element.
    pub fn effective_stress(
        &self,
        state: &FieldState,
        p: &MechParams,
        czm: &CzmParams,
        porosity: f64,
    ) -> Result<Vec<[[f64; 4]; 3]>, StepRejection> {
        let (materials, eigen) = self.loading(state, p, czm, porosity)?;
        Ok(self
            .phase
            .elements
            .iter()
            .map(|&t| {
                let strain = element_strain(&self.vector, t, &state.displacement);
                std::array::from_fn(|q| materials[t][q].stress(strain, &eigen[t][q]))
            })
            .collect())
    }

    /// Crack driving force of the current displacement, bounded below by
    /// `previous`.
    pub fn driving_force(
        &self,
        state: &FieldState,
        previous: &[[f64; 3]],
        p: &MechParams,
        czm: &CzmParams,
        porosity: f64,
    ) -> Result<Vec<[f64; 3]>, StepRejection> {
        let stress = self.effective_stress(state, p, czm, porosity)?;
        Ok(stress
            .iter()
            .zip(previous)
            .map(|(s, h)| std::array::from_fn(|q| crack_driving_force(&s[q], h[q], czm)))
            .collect())
    }

    /// Area-weighted nodal average of a quadrature-point field, indexed by
    /// mesh node.
    pub fn project_to_nodes(&self, field: &[[f64; 3]], num_nodes: usize) -> Vec<f64> {
        let mut sum = vec![0.0; num_nodes];
        let mut weight = vec![0.0; num_nodes];
        for (k, nodes) in self.phase.element_nodes.iter().enumerate() {
            let a = self.phase.area[k];
            let mean = field[k].iter().sum::<f64>() / 3.0;
            for &v in nodes {
                sum[v] += a * mean;
                weight[v] += a;
            }
        }
        sum.iter().zip(&weight).map(|(s, w)| if *w > 0.0 { s / w } else { 0.0 }).collect()
    }

    fn fields(&self, phi: &[f64], h: &[f64], num_nodes: usize) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
        let mut nodal = vec![0.0; num_nodes];
        self.phase.scatter_into(phi, &mut nodal);
        (
            self.phase.at_quadrature(Coefficient::Nodal(&nodal)),
            self.phase.at_quadrature(Coefficient::Nodal(h)),
        )
    }

    fn energy(&self, phi: &[f64], h: &[f64], czm: &CzmParams, num_nodes: usize) -> f64 {
        let (pq, hq) = self.fields(phi, h, num_nodes);
        let c = czm.dissipation_scale();
        let local: Vec<[f64; 3]> = pq
            .iter()
            .zip(&hq)
            .map(|(f, hh)| std::array::from_fn(|q| 0.5 * degradation(f[q], czm).0 * hh[q] / c + f[q] - 0.5 * f[q] * f[q]))
            .collect();
        let kphi = self.laplacian.mul_vec(phi);
        let gradient: f64 = phi.iter().zip(&kphi).map(|(a, b)| a * b).sum();
        self.phase.integrate(Coefficient::Quadrature(&local)) + 0.5 * czm.length.powi(2) * gradient
    }

    fn residual(&self, phi: &[f64], h: &[f64], czm: &CzmParams, num_nodes: usize) -> Vec<f64> {
        let (pq, hq) = self.fields(phi, h, num_nodes);
        let c = czm.dissipation_scale();
        let local: Vec<[f64; 3]> = pq
            .iter()
            .zip(&hq)
            .map(|(f, hh)| std::array::from_fn(|q| 0.5 * degradation(f[q], czm).1 * hh[q] / c + 1.0 - f[q]))
            .collect();
        let mut r = self.phase.integrate_shapes(Coefficient::Quadrature(&local));
        let l2 = czm.length.powi(2);
        for (ri, ki) in r.iter_mut().zip(self.laplacian.mul_vec(phi)) {
            *ri += l2 * ki;
        }
        r
    }

    fn jacobian(&self, phi: &[f64], h: &[f64], czm: &CzmParams, num_nodes: usize, convexified: bool) -> CsrMatrix {
        let (pq, hq) = self.fields(phi, h, num_nodes);
        let c = czm.dissipation_scale();
        let local: Vec<[f64; 3]> = pq
            .iter()
            .zip(&hq)
            .map(|(f, hh)| {
                std::array::from_fn(|q| {
                    let v = 0.5 * degradation_second(f[q], czm) * hh[q] / c - 1.0;
                    if convexified {
                        v.max(0.0)
                    } else {
                        v
                    }
                })
            })
            .collect();
        let mut j = self.phase.mass(Coefficient::Quadrature(&local));
        j.add_scaled(czm.length.powi(2), &self.laplacian);
        if convexified {
            j.add_diagonal(&self.lumped);
        }
        j
    }

    fn projected(&self, phi: &[f64], lower: &[f64], r: &[f64]) -> Vec<f64> {
        phi.iter()
            .zip(lower)
            .zip(r)
            .map(|((&f, &lb), &ri)| if (f <= lb && ri > 0.0) || (f >= 1.0 && ri < 0.0) { 0.0 } else { ri })
            .collect()
    }

    fn norm(&self, pr: &[f64]) -> f64 {
        pr.iter().zip(&self.lumped).map(|(r, m)| (r / m).abs()).fold(0.0, f64::max)
    }

    /// Bound-constrained Newton solve of the phase-field equation for the
    /// nodal history `h` (indexed by mesh node). `lower` is the phase field
    /// of the last accepted step and `start` the initial iterate, both per
    /// phase-field dof.
    pub fn solve_phasefield(
        &mut self,
        lower: &[f64],
        start: &[f64],
        h: &[f64],
        czm: &CzmParams,
    ) -> Result<(Vec<f64>, PhaseFieldReport), StepRejection> {
        let n = h.len();
        let mut phi: Vec<f64> = start.iter().zip(lower).map(|(f, lb)| f.max(*lb).min(1.0)).collect();
        let mut r = self.residual(&phi, h, czm, n);
        let mut pr = self.projected(&phi, lower, &r);
        let mut res = self.norm(&pr);
        let mut energy = self.energy(&phi, h, czm, n);
        let mut iterations = 0;
        while res >= PHASE_TOLERANCE {
            if iterations == PHASE_MAX_ITERATIONS {
                return Err(StepRejection::PhaseFieldDivergence {
                    iterations,
                    residual: res,
                });
            }
            iterations += 1;
            let active: Vec<usize> = (0..phi.len()).filter(|&i| pr[i] == 0.0 && r[i] != 0.0).collect();
            let mut direction = None;
            for convexified in [false, true] {
                let j = self.jacobian(&phi, h, czm, n, convexified);
                let mut system = SparseSystem::new(j, r.iter().map(|v| -v).collect())?;
                for &i in &active {
                    system.constrain(i, 0.0);
                }
                if let Ok(d) = self.phase_solver.solve(&system) {
                    let slope: f64 = d.iter().zip(&pr).map(|(a, b)| a * b).sum();
                    if slope < 0.0 && d.iter().all(|v| v.is_finite()) {
                        direction = Some(d);
                        break;
                    }
                }
            }
            let Some(d) = direction else {
                return Err(StepRejection::PhaseFieldDivergence {
                    iterations,
                    residual: res,
                });
            };
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..=LINE_SEARCH_HALVINGS {
                let trial: Vec<f64> = phi
                    .iter()
                    .zip(&d)
                    .zip(lower)
                    .map(|((f, di), lb)| (f + step * di).max(*lb).min(1.0))
                    .collect();
                let e = self.energy(&trial, h, czm, n);
                let r_trial = self.residual(&trial, h, czm, n);
                let pr_trial = self.projected(&trial, lower, &r_trial);
                let res_trial = self.norm(&pr_trial);
                if e <= energy + 1e-14 * energy.abs() || res_trial < res {
                    phi = trial;
                    r = r_trial;
                    pr = pr_trial;
                    res = res_trial;
                    energy = e;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return Err(StepRejection::PhaseFieldDivergence {
                    iterations,
                    residual: res,
                });
            }
        }
        Ok((phi, PhaseFieldReport { iterations, residual: res }))
    }

    /// Alternate displacement and phase-field solves until the phase field
    /// settles. The history and phase field of `state` are those of the last
    /// accepted step on entry and are updated in place.
    pub fn staggered(
        &mut self,
        state: &mut FieldState,
        p: &MechParams,
        czm: &CzmParams,
        porosity: f64,
    ) -> Result<StaggeredReport, StepRejection> {
        let n = state.phase.len();
        let lower = self.phase.gather(&state.phase);
        let mut current = lower.clone();
        let mut change = f64::INFINITY;
        let mut iterations = 0;
        while iterations < STAGGER_MAX_ITERATIONS {
            iterations += 1;
            self.solve_mechanics(state, p, czm, porosity)?;
            // the history only grows, also between passes, so the
            // alternation is monotone and cannot cycle
            state.history = self.driving_force(state, &state.history, p, czm, porosity)?;
            let h = self.project_to_nodes(&state.history, n);
            let (next, _) = self.solve_phasefield(&lower, &current, &h, czm)?;
            change = next.iter().zip(&current).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            current = next;
            self.phase.scatter_into(&current, &mut state.phase);
            if change < STAGGER_TOLERANCE {
                break;
            }
        }
        for (i, (&after, &before)) in current.iter().zip(&lower).enumerate() {
            if after < before {
                return Err(StepRejection::Irreversibility {
                    node: self.phase.node_of_dof[i],
                    before,
                    after,
                });
            }
        }
        let converged = change < STAGGER_TOLERANCE;
        if !converged {
            log::warn!("staggered loop stopped after {iterations} passes with phase-field change {change:.3e}");
        }
        Ok(StaggeredReport {
            iterations,
            converged,
            last_change: change,
        })
    }
}
