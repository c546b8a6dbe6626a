//! Tagged linear-triangle meshes of a concrete cross-section with an embedded
//! circular rebar.
//!
//! Coordinates are in metres. The steel subdomain is meshed and carries
//! displacement unknowns only; transport and damage fields live on the
//! concrete nodes.

mod msh;
mod ogrid;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

pub use msh::read_msh;
pub use ogrid::{generate_ogrid, OGridSpec};

/// Nodes closer than this are considered coincident.
pub const NODE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("infeasible geometry: {0}")]
    Geometry(String),
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("degenerate boundary edge ({0}, {1})")]
    DegenerateEdge(usize, usize),
    #[error("msh line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    Concrete,
    Steel,
}

/// Side of the rectangular outer boundary of a generated mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Top, Side::Left, Side::Bottom, Side::Right];

    pub fn parse(s: &str) -> Option<Side> {
        match s.to_ascii_lowercase().as_str() {
            "top" => Some(Side::Top),
            "bottom" => Some(Side::Bottom),
            "left" => Some(Side::Left),
            "right" => Some(Side::Right),
            _ => None,
        }
    }
}

/// Boundary edge as a pair of node ids.
pub type Edge = [usize; 2];

/// Named boundary edge sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundarySets {
    /// Outer boundary with prescribed chloride concentration.
    pub chloride_exposed: Vec<Edge>,
    /// Outer boundary with zero chloride flux.
    pub sealed: Vec<Edge>,
    /// Steel/concrete interface.
    pub steel_interface: Vec<Edge>,
    /// Upper outer surface used for crack-width integration.
    pub upper_surface: Vec<Edge>,
}

/// Circle fitted to the steel interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rebar {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub subdomains: Vec<Subdomain>,
    pub boundaries: BoundarySets,
    /// Outer edges grouped by rectangle side; empty for imported meshes.
    pub sides: BTreeMap<Side, Vec<Edge>>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    pub fn edge_length(&self, e: Edge) -> f64 {
        let (p, q) = (self.nodes[e[0]], self.nodes[e[1]]);
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    }

    pub fn has_steel(&self) -> bool {
        self.subdomains.contains(&Subdomain::Steel)
    }

    pub fn concrete_triangles(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.triangles.len()).filter(|&t| self.subdomains[t] == Subdomain::Concrete)
    }

    /// Per-node flag: node belongs to at least one concrete triangle.
    pub fn concrete_node_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for t in self.concrete_triangles() {
            for &n in &self.triangles[t] {
                mask[n] = true;
            }
        }
        mask
    }

    /// Sorted unique node ids of an edge set.
    pub fn edge_set_nodes(edges: &[Edge]) -> Vec<usize> {
        let mut nodes: Vec<usize> = edges.iter().flat_map(|e| e.iter().copied()).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Map from undirected edge to the triangles containing it.
    pub fn edge_triangles(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(self.triangles.len() * 2);
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                map.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
            }
        }
        map
    }

    /// Flip interior edges between triangles of one subdomain until every
    /// such edge is locally Delaunay (opposite angles sum to at most π), so
    /// the linear diffusion operator keeps non-positive couplings. Nodes,
    /// boundary and interface edges are untouched. Returns the flip count.
    pub fn make_delaunay(&mut self) -> usize {
        let mut flips = 0;
        loop {
            let mut edges: Vec<((usize, usize), Vec<usize>)> = self.edge_triangles().into_iter().collect();
            edges.sort_unstable();
            let mut touched = vec![false; self.triangles.len()];
            let before = flips;
            for ((a, b), tris) in edges {
                let [t1, t2] = tris[..] else { continue };
                if self.subdomains[t1] != self.subdomains[t2] || touched[t1] || touched[t2] {
                    continue;
                }
                let third = |t: usize| self.triangles[t].into_iter().find(|&v| v != a && v != b).unwrap();
                let (c, d) = (third(t1), third(t2));
                let cot = |o: usize| {
                    let (p, q, r) = (self.nodes[o], self.nodes[a], self.nodes[b]);
                    let u = [q[0] - p[0], q[1] - p[1]];
                    let v = [r[0] - p[0], r[1] - p[1]];
                    (u[0] * v[0] + u[1] * v[1]) / (u[0] * v[1] - u[1] * v[0]).abs()
                };
                if cot(c) + cot(d) >= -1e-9 {
                    continue;
                }
                for (t, tri) in [(t1, [c, a, d]), (t2, [d, b, c])] {
                    let [p, q, r] = tri;
                    let area = signed_area(self.nodes[p], self.nodes[q], self.nodes[r]);
                    self.triangles[t] = if area >= 0.0 { [p, q, r] } else { [p, r, q] };
                    touched[t] = true;
                }
                flips += 1;
            }
            if flips == before {
                return flips;
            }
        }
    }

    /// For each edge of `edges`, the concrete triangle it bounds.
    pub fn adjacent_concrete(&self, edges: &[Edge]) -> Result<Vec<usize>, MeshError> {
        let map = self.edge_triangles();
        edges
            .iter()
            .map(|e| {
                map.get(&edge_key(e[0], e[1]))
                    .and_then(|ts| ts.iter().copied().find(|&t| self.subdomains[t] == Subdomain::Concrete))
                    .ok_or_else(|| MeshError::Invalid(format!("edge {:?} does not bound a concrete triangle", e)))
            })
            .collect()
    }

    /// Outward unit normals of `edges` with respect to the concrete domain.
    ///
    /// On the steel interface the normal therefore points into the steel, so
    /// a positive `n · D∇c` is an influx into the concrete.
    pub fn boundary_normals(&self, edges: &[Edge]) -> Result<Vec<[f64; 2]>, MeshError> {
        let adjacent = self.adjacent_concrete(edges)?;
        edges
            .iter()
            .zip(adjacent)
            .map(|(&e, t)| {
                let len = self.edge_length(e);
                if len <= NODE_TOLERANCE {
                    return Err(MeshError::DegenerateEdge(e[0], e[1]));
                }
                let (p, q) = (self.nodes[e[0]], self.nodes[e[1]]);
                let mut n = [(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
                let opposite = self.triangles[t]
                    .iter()
                    .copied()
                    .find(|&v| v != e[0] && v != e[1])
                    .expect("triangle has a vertex off the edge");
                let o = self.nodes[opposite];
                let dot = n[0] * (o[0] - p[0]) + n[1] * (o[1] - p[1]);
                if dot > 0.0 {
                    n = [-n[0], -n[1]];
                }
                Ok(n)
            })
            .collect()
    }

    /// Circle fitted to the steel-interface nodes (centroid and mean radius).
    pub fn rebar(&self) -> Option<Rebar> {
        let nodes = Self::edge_set_nodes(&self.boundaries.steel_interface);
        if nodes.is_empty() {
            return None;
        }
        let k = nodes.len() as f64;
        let cx = nodes.iter().map(|&n| self.nodes[n][0]).sum::<f64>() / k;
        let cy = nodes.iter().map(|&n| self.nodes[n][1]).sum::<f64>() / k;
        let radius = nodes
            .iter()
            .map(|&n| ((self.nodes[n][0] - cx).powi(2) + (self.nodes[n][1] - cy).powi(2)).sqrt())
            .sum::<f64>()
            / k;
        Some(Rebar {
            center: [cx, cy],
            radius,
        })
    }

    /// Cross-sectional steel area: meshed steel triangles, or the polygon
    /// enclosed by the interface when steel is not meshed.
    pub fn steel_area(&self) -> f64 {
        let meshed: f64 = (0..self.triangles.len())
            .filter(|&t| self.subdomains[t] == Subdomain::Steel)
            .map(|t| self.triangle_area(t))
            .sum();
        if meshed > 0.0 {
            return meshed;
        }
        match self.rebar() {
            Some(r) => {
                // polygon area of the interface edges as seen from the centre
                self.boundaries
                    .steel_interface
                    .iter()
                    .map(|e| signed_area(r.center, self.nodes[e[0]], self.nodes[e[1]]).abs())
                    .sum()
            }
            None => 0.0,
        }
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in &self.nodes {
            bb[0] = bb[0].min(p[0]);
            bb[1] = bb[1].min(p[1]);
            bb[2] = bb[2].max(p[0]);
            bb[3] = bb[3].max(p[1]);
        }
        bb
    }

    /// Structured plain-concrete rectangle `[0, width] x [0, height]` with
    /// `nx x ny` cells split into two triangles each. All sides start
    /// sealed; the top side is the upper surface.
    pub fn rectangle(width: f64, height: f64, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
        if !(width > 0.0 && height > 0.0) || nx == 0 || ny == 0 {
            return Err(MeshError::Geometry("rectangle needs positive size and cell counts".into()));
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        let mut sides: BTreeMap<Side, Vec<Edge>> = BTreeMap::new();
        sides.insert(Side::Bottom, (0..nx).map(|i| [idx(i, 0), idx(i + 1, 0)]).collect());
        sides.insert(Side::Right, (0..ny).map(|j| [idx(nx, j), idx(nx, j + 1)]).collect());
        sides.insert(Side::Top, (0..nx).rev().map(|i| [idx(i + 1, ny), idx(i, ny)]).collect());
        sides.insert(Side::Left, (0..ny).rev().map(|j| [idx(0, j + 1), idx(0, j)]).collect());
        let mesh = Mesh {
            nodes,
            subdomains: vec![Subdomain::Concrete; triangles.len()],
            triangles,
            boundaries: BoundarySets {
                sealed: sides.values().flatten().copied().collect(),
                upper_surface: sides[&Side::Top].clone(),
                ..Default::default()
            },
            sides,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Re-tag the outer boundary of a generated mesh: edges on `exposed`
    /// sides become chloride-exposed, all others sealed.
    pub fn expose_sides(&mut self, exposed: &[Side]) -> Result<(), MeshError> {
        if self.sides.is_empty() {
            return Err(MeshError::Invalid(
                "mesh carries no side information; exposure comes from its physical groups".into(),
            ));
        }
        let mut cc = Vec::new();
        let mut cf = Vec::new();
        for (side, edges) in &self.sides {
            if exposed.contains(side) {
                cc.extend_from_slice(edges);
            } else {
                cf.extend_from_slice(edges);
            }
        }
        self.boundaries.chloride_exposed = cc;
        self.boundaries.sealed = cf;
        Ok(())
    }

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.nodes.len();
        if self.subdomains.len() != self.triangles.len() {
            return Err(MeshError::Invalid("one subdomain tag per triangle required".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(MeshError::Invalid(format!("triangle {t} references a missing node")));
            }
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(MeshError::Invalid(format!("triangle {t} has non-positive area {area:e}")));
            }
        }
        let sets = [
            ("gamma_cc", &self.boundaries.chloride_exposed),
            ("gamma_cf", &self.boundaries.sealed),
            ("gamma_s", &self.boundaries.steel_interface),
            ("gamma_us", &self.boundaries.upper_surface),
        ];
        for (name, edges) in sets {
            if edges.iter().flatten().any(|&v| v >= n) {
                return Err(MeshError::Invalid(format!("{name} references a missing node")));
            }
        }

        let map = self.edge_triangles();
        let cc: std::collections::HashSet<_> =
            self.boundaries.chloride_exposed.iter().map(|e| edge_key(e[0], e[1])).collect();
        let cf: std::collections::HashSet<_> =
            self.boundaries.sealed.iter().map(|e| edge_key(e[0], e[1])).collect();
        if let Some(e) = cc.intersection(&cf).next() {
            return Err(MeshError::Invalid(format!("edge {e:?} is both exposed and sealed")));
        }
        let interface: std::collections::HashSet<_> =
            self.boundaries.steel_interface.iter().map(|e| edge_key(e[0], e[1])).collect();
        for e in &interface {
            let Some(ts) = map.get(e) else {
                return Err(MeshError::Invalid(format!("gamma_s edge {e:?} is not a mesh edge")));
            };
            let concrete = ts.iter().filter(|&&t| self.subdomains[t] == Subdomain::Concrete).count();
            let steel = ts.len() - concrete;
            let ok = (concrete == 1 && steel == 1) || (concrete == 1 && steel == 0 && ts.len() == 1);
            if !ok {
                return Err(MeshError::Invalid(format!(
                    "gamma_s edge {e:?} must separate one concrete and one steel triangle"
                )));
            }
        }
        for (e, ts) in &map {
            let outer = ts.len() == 1 && !interface.contains(e);
            if outer && !(cc.contains(e) || cf.contains(e)) {
                return Err(MeshError::Invalid(format!("outer edge {e:?} is neither exposed nor sealed")));
            }
            if !outer && (cc.contains(e) || cf.contains(e)) {
                return Err(MeshError::Invalid(format!("edge {e:?} tagged as outer boundary is interior")));
            }
        }
        for e in &self.boundaries.upper_surface {
            let k = edge_key(e[0], e[1]);
            if !(cc.contains(&k) || cf.contains(&k)) {
                return Err(MeshError::Invalid(format!("gamma_us edge {k:?} is not on the outer boundary")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        Mesh {
            nodes: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
            subdomains: vec![Subdomain::Concrete; 2],
            boundaries: BoundarySets {
                chloride_exposed: vec![[2, 3]],
                sealed: vec![[0, 1], [1, 2], [3, 0]],
                steel_interface: vec![],
                upper_surface: vec![[2, 3]],
            },
            sides: BTreeMap::new(),
        }
    }

    #[test]
    fn top_edge_normal_points_up() {
        let m = unit_square();
        let n = m.boundary_normals(&[[2, 3]]).unwrap();
        assert!((n[0][0]).abs() < 1e-15 && (n[0][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_edge_is_rejected() {
        let mut m = unit_square();
        m.nodes.push([1.0, 1.0]);
        m.triangles[0] = [0, 1, 4];
        m.triangles.push([4, 2, 3]);
        m.subdomains.push(Subdomain::Concrete);
        let err = m.boundary_normals(&[[4, 2]]);
        assert!(err.is_err());
    }

    #[test]
    fn validation_catches_untagged_outer_edge() {
        let mut m = unit_square();
        m.validate().unwrap();
        m.boundaries.sealed.pop();
        assert!(m.validate().is_err());
    }

    #[test]
    fn validation_catches_clockwise_triangle() {
        let mut m = unit_square();
        m.triangles[0] = [0, 2, 1];
        assert!(m.validate().is_err());
    }

    #[test]
    fn rectangle_mesh() {
        let mut m = Mesh::rectangle(0.1, 0.01, 10, 2).unwrap();
        assert_eq!(m.num_nodes(), 33);
        assert_eq!(m.num_triangles(), 40);
        assert!((0..40).all(|t| m.triangle_area(t) > 0.0));
        assert_eq!(m.boundaries.sealed.len(), 24);
        m.expose_sides(&[Side::Left]).unwrap();
        assert_eq!(m.boundaries.chloride_exposed.len(), 2);
        assert_eq!(m.boundary_normals(&m.boundaries.chloride_exposed).unwrap()[0], [-1.0, 0.0]);
        assert!(Mesh::rectangle(0.1, 0.0, 1, 1).is_err());
    }
}
