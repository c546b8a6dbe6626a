use std::sync::Arc;

use super::{qp_shapes, tri3_shape, CsrMatrix, CsrPattern, FemError, SparseSystem};
use crate::mesh::{Mesh, Subdomain};

const UNUSED: usize = usize::MAX;

/// Areas and physical shape-function gradients of every triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub area: Vec<f64>,
    pub grads: Vec<[[f64; 2]; 3]>,
}

impl Geometry {
    pub fn new(mesh: &Mesh) -> Self {
        let (_, ref_grads) = tri3_shape(0.0, 0.0);
        let mut area = Vec::with_capacity(mesh.num_triangles());
        let mut grads = Vec::with_capacity(mesh.num_triangles());
        for tri in &mesh.triangles {
            let [p0, p1, p2] = tri.map(|v| mesh.nodes[v]);
            let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            // inverse transpose of the Jacobian maps reference gradients
            let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
            let mut g = [[0.0; 2]; 3];
            for a in 0..3 {
                let r = ref_grads[a];
                g[a] = [inv_t[0][0] * r[0] + inv_t[0][1] * r[1], inv_t[1][0] * r[0] + inv_t[1][1] * r[1]];
            }
            area.push(0.5 * det);
            grads.push(g);
        }
        Geometry { area, grads }
    }
}

/// A scalar field coefficient sampled at quadrature points.
#[derive(Debug, Clone, Copy)]
pub enum Coefficient<'a> {
    Constant(f64),
    /// Nodal values indexed by mesh node, interpolated linearly.
    Nodal(&'a [f64]),
    /// Values at the three quadrature points of each element of the space.
    Quadrature(&'a [[f64; 3]]),
}

impl Coefficient<'_> {
    #[inline]
    fn at(&self, k: usize, nodes: &[usize; 3], shapes: &[[f64; 3]; 3]) -> [f64; 3] {
        match *self {
            Coefficient::Constant(c) => [c; 3],
            Coefficient::Nodal(v) => {
                let vals = nodes.map(|n| v[n]);
                shapes.map(|n| n[0] * vals[0] + n[1] * vals[1] + n[2] * vals[2])
            }
            Coefficient::Quadrature(v) => v[k],
        }
    }
}

/// Continuous linear scalar field on a subset of the triangles.
#[derive(Debug, Clone)]
pub struct ScalarSpace {
    /// Mesh triangle ids of the space's elements.
    pub elements: Vec<usize>,
    pub element_nodes: Vec<[usize; 3]>,
    pub element_dofs: Vec<[usize; 3]>,
    pub area: Vec<f64>,
    pub grads: Vec<[[f64; 2]; 3]>,
    pub node_of_dof: Vec<usize>,
    dof_of_node: Vec<usize>,
    pattern: Arc<CsrPattern>,
    scatter: Vec<[usize; 9]>,
    shapes: [[f64; 3]; 3],
}

impl ScalarSpace {
    /// Space over the triangles tagged `subdomain`.
    pub fn on_subdomain(mesh: &Mesh, geometry: &Geometry, subdomain: Subdomain) -> Self {
        let elements: Vec<usize> = (0..mesh.num_triangles())
            .filter(|&t| mesh.subdomains[t] == subdomain)
            .collect();
        Self::on_elements(mesh, geometry, elements)
    }

    pub fn on_elements(mesh: &Mesh, geometry: &Geometry, elements: Vec<usize>) -> Self {
        let mut dof_of_node = vec![UNUSED; mesh.num_nodes()];
        for &t in &elements {
            for &v in &mesh.triangles[t] {
                dof_of_node[v] = 0;
            }
        }
        let mut node_of_dof = Vec::new();
        for (v, d) in dof_of_node.iter_mut().enumerate() {
            if *d == 0 {
                *d = node_of_dof.len();
                node_of_dof.push(v);
            }
        }
        let element_nodes: Vec<[usize; 3]> = elements.iter().map(|&t| mesh.triangles[t]).collect();
        let element_dofs: Vec<[usize; 3]> = element_nodes.iter().map(|t| t.map(|v| dof_of_node[v])).collect();
        let pattern = Arc::new(CsrPattern::from_elements(
            node_of_dof.len(),
            element_dofs.iter().map(|d| d.as_slice()),
        ));
        let scatter = element_dofs
            .iter()
            .map(|d| {
                let mut s = [0; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        s[3 * a + b] = pattern.find(d[a], d[b]).unwrap();
                    }
                }
                s
            })
            .collect();
        ScalarSpace {
            area: elements.iter().map(|&t| geometry.area[t]).collect(),
            grads: elements.iter().map(|&t| geometry.grads[t]).collect(),
            elements,
            element_nodes,
            element_dofs,
            node_of_dof,
            dof_of_node,
            pattern,
            scatter,
            shapes: qp_shapes(),
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    /// Dof of a mesh node, if the node belongs to the space.
    pub fn dof(&self, node: usize) -> Option<usize> {
        match self.dof_of_node[node] {
            UNUSED => None,
            d => Some(d),
        }
    }

    pub fn contains_node(&self, node: usize) -> bool {
        self.dof_of_node[node] != UNUSED
    }

    /// Restrict a nodal mesh field to the space's dofs.
    pub fn gather(&self, nodal: &[f64]) -> Vec<f64> {
        self.node_of_dof.iter().map(|&v| nodal[v]).collect()
    }

    /// Write dof values back into a nodal mesh field.
    pub fn scatter_into(&self, dofs: &[f64], nodal: &mut [f64]) {
        for (&v, &x) in self.node_of_dof.iter().zip(dofs) {
            nodal[v] = x;
        }
    }

    /// Values of a coefficient at the quadrature points of every element.
    pub fn at_quadrature(&self, c: Coefficient) -> Vec<[f64; 3]> {
        (0..self.elements.len())
            .map(|k| c.at(k, &self.element_nodes[k], &self.shapes))
            .collect()
    }

    pub fn gradient(&self, k: usize, nodal: &[f64]) -> [f64; 2] {
        let g = &self.grads[k];
        let v = self.element_nodes[k].map(|n| nodal[n]);
        [
            g[0][0] * v[0] + g[1][0] * v[1] + g[2][0] * v[2],
            g[0][1] * v[0] + g[1][1] * v[1] + g[2][1] * v[2],
        ]
    }

    /// Consistent mass matrix weighted by `c`.
    pub fn mass(&self, c: Coefficient) -> CsrMatrix {
        let mut m = CsrMatrix::zeros(self.pattern.clone());
        for k in 0..self.elements.len() {
            let cq = c.at(k, &self.element_nodes[k], &self.shapes);
            let w = self.area[k] / 3.0;
            let s = &self.scatter[k];
            for (q, n) in self.shapes.iter().enumerate() {
                let wc = w * cq[q];
                for a in 0..3 {
                    for b in 0..3 {
                        m.values[s[3 * a + b]] += wc * n[a] * n[b];
                    }
                }
            }
        }
        m
    }

    /// Stiffness matrix of `-div(c grad u)`.
    pub fn stiffness(&self, c: Coefficient) -> CsrMatrix {
        let mut m = CsrMatrix::zeros(self.pattern.clone());
        for k in 0..self.elements.len() {
            let cq = c.at(k, &self.element_nodes[k], &self.shapes);
            let w = self.area[k] / 3.0 * (cq[0] + cq[1] + cq[2]);
            let g = &self.grads[k];
            let s = &self.scatter[k];
            for a in 0..3 {
                for b in 0..3 {
                    m.values[s[3 * a + b]] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
        m
    }

    /// `∫ c N_i` for every dof: a load vector, or lumped mass when `c` is a
    /// capacity.
    pub fn integrate_shapes(&self, c: Coefficient) -> Vec<f64> {
        let mut f = vec![0.0; self.num_dofs()];
        for k in 0..self.elements.len() {
            let cq = c.at(k, &self.element_nodes[k], &self.shapes);
            let w = self.area[k] / 3.0;
            for (q, n) in self.shapes.iter().enumerate() {
                for a in 0..3 {
                    f[self.element_dofs[k][a]] += w * cq[q] * n[a];
                }
            }
        }
        f
    }

    /// `∫ c` over the space.
    pub fn integrate(&self, c: Coefficient) -> f64 {
        (0..self.elements.len())
            .map(|k| {
                let cq = c.at(k, &self.element_nodes[k], &self.shapes);
                self.area[k] / 3.0 * (cq[0] + cq[1] + cq[2])
            })
            .sum()
    }
}

/// Backward-Euler step of `∂(a u)/∂t - div(D grad u) + r u = s`.
#[derive(Debug, Clone, Copy)]
pub struct TransientDiffusion<'a> {
    pub dt: f64,
    /// Capacity at the new time level.
    pub capacity: Coefficient<'a>,
    /// Capacity at the old time level; defaults to `capacity`.
    pub capacity_old: Option<Coefficient<'a>>,
    pub diffusivity: Coefficient<'a>,
    pub reaction: Coefficient<'a>,
    pub source: Coefficient<'a>,
    /// Previous solution, indexed by mesh node.
    pub previous: &'a [f64],
}

/// System `(M(a)/dt + K(D) + M(r)) u = M(a_old)/dt u_old + f(s)` with a
/// consistent mass matrix and three-point quadrature.
pub fn assemble_transient_diffusion(space: &ScalarSpace, p: &TransientDiffusion) -> Result<SparseSystem, FemError> {
    if !(p.dt > 0.0) {
        return Err(FemError::Dimension(format!("time step must be positive, got {}", p.dt)));
    }
    for (k, cq) in space.at_quadrature(p.capacity).iter().enumerate() {
        if let Some(&v) = cq.iter().find(|v| !(**v > 0.0)) {
            return Err(FemError::NonPositiveCapacity {
                element: space.elements[k],
                value: v,
            });
        }
    }
    let inv_dt = 1.0 / p.dt;
    let mut a = space.mass(p.capacity);
    a.scale(inv_dt);
    a.add_scaled(1.0, &space.stiffness(p.diffusivity));
    if !matches!(p.reaction, Coefficient::Constant(c) if c == 0.0) {
        a.add_scaled(1.0, &space.mass(p.reaction));
    }
    let old = space.gather(p.previous);
    let m_old = match p.capacity_old {
        Some(c) => space.mass(c),
        None => space.mass(p.capacity),
    };
    let mut b = m_old.mul_vec(&old);
    b.iter_mut().for_each(|v| *v *= inv_dt);
    if !matches!(p.source, Coefficient::Constant(c) if c == 0.0) {
        for (bi, fi) in b.iter_mut().zip(space.integrate_shapes(p.source)) {
            *bi += fi;
        }
    }
    SparseSystem::new(a, b)
}

/// Isotropic elastic properties at a quadrature point, with the stiffness
/// degradation factor applied on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticMaterial {
    pub youngs: f64,
    pub poisson: f64,
    pub degradation: f64,
}

impl ElasticMaterial {
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.youngs, self.poisson);
        (e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
    }

    /// Plane-strain matrix acting on (εxx, εyy, γxy).
    pub fn plane_strain(&self) -> [[f64; 3]; 3] {
        let (l, m) = self.lame();
        [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]]
    }

    /// Undegraded stress (σxx, σyy, σxy, σzz) for total in-plane strain
    /// (εxx, εyy, γxy) under plane strain and the given eigenstrain.
    pub fn stress(&self, strain: [f64; 3], eig: &Eigenstrain) -> [f64; 4] {
        let (l, m) = self.lame();
        let exx = strain[0] - eig.xx;
        let eyy = strain[1] - eig.yy;
        let ezz = -eig.zz;
        let tr = exx + eyy + ezz;
        [
            l * tr + 2.0 * m * exx,
            l * tr + 2.0 * m * eyy,
            m * (strain[2] - 2.0 * eig.xy),
            l * tr + 2.0 * m * ezz,
        ]
    }
}

/// Stress-free strain tensor. `xy` is the tensor (not engineering) shear
/// component; `zz` is the out-of-plane component.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Eigenstrain {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub zz: f64,
}

impl Eigenstrain {
    pub fn isotropic(c: f64) -> Self {
        Eigenstrain {
            xx: c,
            yy: c,
            xy: 0.0,
            zz: c,
        }
    }
}

/// Two displacement components per mesh node, interleaved (x, y).
#[derive(Debug, Clone)]
pub struct VectorSpace {
    pub area: Vec<f64>,
    pub grads: Vec<[[f64; 2]; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pattern: Arc<CsrPattern>,
    scatter: Vec<[usize; 36]>,
}

impl VectorSpace {
    pub fn new(mesh: &Mesh, geometry: &Geometry) -> Self {
        let n = 2 * mesh.num_nodes();
        let dofs: Vec<[usize; 6]> = mesh
            .triangles
            .iter()
            .map(|t| [2 * t[0], 2 * t[0] + 1, 2 * t[1], 2 * t[1] + 1, 2 * t[2], 2 * t[2] + 1])
            .collect();
        let pattern = Arc::new(CsrPattern::from_elements(n, dofs.iter().map(|d| d.as_slice())));
        let scatter = dofs
            .iter()
            .map(|d| {
                let mut s = [0; 36];
                for a in 0..6 {
                    for b in 0..6 {
                        s[6 * a + b] = pattern.find(d[a], d[b]).unwrap();
                    }
                }
                s
            })
            .collect();
        VectorSpace {
            area: geometry.area.clone(),
            grads: geometry.grads.clone(),
            triangles: mesh.triangles.clone(),
            pattern,
            scatter,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.pattern.n()
    }

    fn b_matrix(g: &[[f64; 2]; 3]) -> [[f64; 6]; 3] {
        let mut b = [[0.0; 6]; 3];
        for a in 0..3 {
            b[0][2 * a] = g[a][0];
            b[1][2 * a + 1] = g[a][1];
            b[2][2 * a] = g[a][1];
            b[2][2 * a + 1] = g[a][0];
        }
        b
    }
}

/// Engineering strain (εxx, εyy, γxy) of triangle `t`; constant per element.
pub fn element_strain(space: &VectorSpace, t: usize, u: &[f64]) -> [f64; 3] {
    let g = &space.grads[t];
    let mut e = [0.0; 3];
    for (a, &v) in space.triangles[t].iter().enumerate() {
        let (ux, uy) = (u[2 * v], u[2 * v + 1]);
        e[0] += g[a][0] * ux;
        e[1] += g[a][1] * uy;
        e[2] += g[a][1] * ux + g[a][0] * uy;
    }
    e
}

/// Plane-strain elasticity `K u = f` with degraded stiffness, eigenstrain
/// load and a uniform body force. `materials` and `eigenstrain` hold one
/// entry per quadrature point of every mesh triangle.
pub fn assemble_elasticity(
    space: &VectorSpace,
    materials: &[[ElasticMaterial; 3]],
    eigenstrain: &[[Eigenstrain; 3]],
    body_force: [f64; 2],
) -> Result<SparseSystem, FemError> {
    let nt = space.triangles.len();
    if materials.len() != nt || eigenstrain.len() != nt {
        return Err(FemError::Dimension(format!(
            "{} triangles but {} materials and {} eigenstrains",
            nt,
            materials.len(),
            eigenstrain.len()
        )));
    }
    let mut k_mat = CsrMatrix::zeros(space.pattern.clone());
    let mut f = vec![0.0; space.num_dofs()];
    for t in 0..nt {
        let b = VectorSpace::b_matrix(&space.grads[t]);
        let w = space.area[t] / 3.0;
        let mut d_sum = [[0.0; 3]; 3];
        let mut sig0 = [0.0; 3];
        for q in 0..3 {
            let mat = &materials[t][q];
            let d = mat.plane_strain();
            let (lam, _) = mat.lame();
            let eig = &eigenstrain[t][q];
            let g = mat.degradation;
            let e_in = [eig.xx, eig.yy, 2.0 * eig.xy];
            for i in 0..3 {
                for j in 0..3 {
                    d_sum[i][j] += w * g * d[i][j];
                }
                let mut s = (0..3).map(|j| d[i][j] * e_in[j]).sum::<f64>();
                if i < 2 {
                    s += lam * eig.zz;
                }
                sig0[i] += w * g * s;
            }
        }
        let mut db = [[0.0; 6]; 3];
        for i in 0..3 {
            for c in 0..6 {
                db[i][c] = (0..3).map(|j| d_sum[i][j] * b[j][c]).sum();
            }
        }
        let s = &space.scatter[t];
        let tri = space.triangles[t];
        for r in 0..6 {
            for c in 0..6 {
                k_mat.values[s[6 * r + c]] += (0..3).map(|i| b[i][r] * db[i][c]).sum::<f64>();
            }
            let dof = 2 * tri[r / 2] + r % 2;
            f[dof] += (0..3).map(|i| b[i][r] * sig0[i]).sum::<f64>();
            f[dof] += space.area[t] / 3.0 * body_force[r % 2];
        }
    }
    SparseSystem::new(k_mat, f)
}
