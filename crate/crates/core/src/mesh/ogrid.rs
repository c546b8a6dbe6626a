//! Block-structured O-grid around a circular rebar.
//!
//! The concrete region is one periodic structured grid: `n` columns around
//! the rebar and rows that run from the steel interface through a graded
//! annulus and then through four ruled blocks, each connecting a quarter of
//! the annulus to one side of the rectangle. The steel disc is meshed with
//! graded rings, halving transitions and a central fan.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{signed_area, BoundarySets, Edge, Mesh, MeshError, Side, Subdomain};

#[derive(Debug, Clone, PartialEq)]
pub struct OGridSpec {
    pub width: f64,
    pub height: f64,
    pub rebar_center: [f64; 2],
    pub rebar_radius: f64,
    /// Divisions around the rebar; rounded up to a multiple of four.
    pub circumferential_divisions: usize,
    /// Number of graded rings in the annulus around the rebar.
    pub radial_divisions: usize,
    /// Thickness ratio of consecutive annulus rings.
    pub radial_grading: f64,
    /// Element size aimed for at the far boundary.
    pub far_field_size: f64,
    /// When set, the circumferential count is raised until interface edges
    /// are no longer than a fifth of this length.
    pub process_zone_length: Option<f64>,
    pub mesh_steel: bool,
}

impl OGridSpec {
    /// Rectangle `width x height` with the rebar centred horizontally at the
    /// given cover (distance from the top surface to the rebar surface).
    pub fn with_cover(width: f64, height: f64, diameter: f64, cover: f64) -> Self {
        let radius = 0.5 * diameter;
        OGridSpec {
            width,
            height,
            rebar_center: [0.5 * width, height - cover - radius],
            rebar_radius: radius,
            circumferential_divisions: 96,
            radial_divisions: 8,
            radial_grading: 1.15,
            far_field_size: 0.004,
            process_zone_length: None,
            mesh_steel: true,
        }
    }

    fn validate(&self) -> Result<(), MeshError> {
        let lengths = [
            ("width", self.width),
            ("height", self.height),
            ("rebar radius", self.rebar_radius),
            ("far-field size", self.far_field_size),
        ];
        for (name, v) in lengths {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MeshError::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        let [cx, cy] = self.rebar_center;
        let r = self.rebar_radius;
        if !(cx - r > 0.0 && cx + r < self.width && cy - r > 0.0 && cy + r < self.height) {
            return Err(MeshError::Geometry("rebar circle is not strictly inside the rectangle".into()));
        }
        if self.circumferential_divisions < 8 || self.radial_divisions < 8 {
            return Err(MeshError::Geometry("division counts must be at least 8".into()));
        }
        if !(self.radial_grading >= 1.0) {
            return Err(MeshError::Geometry("radial grading ratio must be >= 1".into()));
        }
        if let Some(l) = self.process_zone_length {
            if !(l > 0.0) {
                return Err(MeshError::Geometry("process zone length must be positive".into()));
            }
        }
        Ok(())
    }

    /// Effective circumferential count after rounding and the optional
    /// process-zone refinement.
    pub fn effective_divisions(&self) -> usize {
        let mut n = self.circumferential_divisions;
        if let Some(l) = self.process_zone_length {
            let needed = (2.0 * PI * self.rebar_radius / (l / 5.0)).ceil() as usize;
            n = n.max(needed);
        }
        n.div_ceil(4) * 4
    }
}

/// Geometric spacing on [0, 1] with `m` intervals whose first interval is
/// `first` (uniform when that is already coarse enough).
fn graded_parameters(m: usize, first: f64) -> Vec<f64> {
    let uniform: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    if first * m as f64 >= 1.0 {
        return uniform;
    }
    // (rho - 1) / (rho^m - 1) = first, solved for rho > 1
    let f = |rho: f64| (rho - 1.0) / (rho.powi(m as i32) - 1.0) - first;
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    let total = rho.powi(m as i32) - 1.0;
    (0..=m).map(|k| (rho.powi(k as i32) - 1.0) / total).collect()
}

struct Builder {
    /// Vertical mirror line used to break diagonal ties symmetrically.
    axis: f64,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    subdomains: Vec<Subdomain>,
}

impl Builder {
    fn node(&mut self, p: [f64; 2]) -> usize {
        self.nodes.push(p);
        self.nodes.len() - 1
    }

    fn tri(&mut self, a: usize, b: usize, c: usize, tag: Subdomain) {
        let area = signed_area(self.nodes[a], self.nodes[b], self.nodes[c]);
        self.triangles.push(if area >= 0.0 { [a, b, c] } else { [a, c, b] });
        self.subdomains.push(tag);
    }

    /// Split quad a-b-c-d (cyclic) along its shorter diagonal.
    fn quad(&mut self, a: usize, b: usize, c: usize, d: usize, tag: Subdomain) {
        let dist = |i: usize, j: usize| {
            let (p, q) = (self.nodes[i], self.nodes[j]);
            (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
        };
        let (ac, bd) = (dist(a, c), dist(b, d));
        let take_ac = if (ac - bd).abs() <= 1e-9 * ac.max(bd) {
            // equal diagonals: cut from the vertex farthest from the mirror
            // line so that mirror-image quads are split alike
            let far = [a, b, c, d]
                .into_iter()
                .max_by(|&i, &j| {
                    (self.nodes[i][0] - self.axis)
                        .abs()
                        .total_cmp(&(self.nodes[j][0] - self.axis).abs())
                })
                .unwrap();
            far == a || far == c
        } else {
            ac < bd
        };
        if take_ac {
            self.tri(a, b, c, tag);
            self.tri(a, c, d, tag);
        } else {
            self.tri(a, b, d, tag);
            self.tri(b, c, d, tag);
        }
    }
}

/// Generate the O-grid mesh. Outer edges are sealed until the caller
/// exposes sides with [`Mesh::expose_sides`]; the top side is the upper
/// surface.
pub fn generate_ogrid(spec: &OGridSpec) -> Result<Mesh, MeshError> {
    spec.validate()?;
    let n = spec.effective_divisions();
    let q = n / 4;
    let [cx, cy] = spec.rebar_center;
    let r = spec.rebar_radius;
    let (w, h) = (spec.width, spec.height);

    // annulus ring radii; square cells at the bar, graded outwards and
    // flattened when the cover is too thin for them
    let first_ring = 2.0 * PI * r / n as f64;
    let clearance = [cx, w - cx, cy, h - cy].into_iter().fold(f64::INFINITY, f64::min);
    let fit_radius = 0.8 * clearance;
    if fit_radius <= r {
        return Err(MeshError::Geometry(format!(
            "rebar radius {r:.4e} m leaves no room for an annulus within {clearance:.4e} m of the boundary"
        )));
    }
    let natural: f64 = (0..spec.radial_divisions).map(|k| first_ring * spec.radial_grading.powi(k as i32)).sum();
    let scale = ((fit_radius - r) / natural).min(1.0);
    let mut radii = vec![r];
    for k in 0..spec.radial_divisions {
        let t = scale * first_ring * spec.radial_grading.powi(k as i32);
        radii.push(radii[k] + t);
    }
    let outer_radius = *radii.last().unwrap();
    let last_ring = outer_radius - radii[radii.len() - 2];

    let angle = |i: usize| PI / 4.0 + 2.0 * PI * i as f64 / n as f64;
    let circle = |rad: f64, i: usize| [cx + rad * angle(i).cos(), cy + rad * angle(i).sin()];

    // corners in block order: top block runs from top-right to top-left, etc.
    let corners = [[w, h], [0.0, h], [0.0, 0.0], [w, 0.0]];
    let block_sides = [Side::Top, Side::Left, Side::Bottom, Side::Right];
    let side_point = |i: usize| -> [f64; 2] {
        let b = (i / q) % 4;
        let local = i % q;
        let (p0, p1) = (corners[b], corners[(b + 1) % 4]);
        let dir = [p1[0] - p0[0], p1[1] - p0[1]];
        // parameter along the side where the ray at angle(i) crosses it
        let ray_param = |j: usize| {
            let (s, c) = angle(b * q + j).sin_cos();
            // solve center + t*(c, s) = p0 + mu*dir
            let det = c * (-dir[1]) - s * (-dir[0]);
            let rx = p0[0] - cx;
            let ry = p0[1] - cy;
            (c * ry - s * rx) / det
        };
        let (mu0, mu1) = (ray_param(0), ray_param(q));
        let projected = (ray_param(local) - mu0) / (mu1 - mu0);
        let lambda = 0.5 * (local as f64 / q as f64 + projected);
        [p0[0] + lambda * dir[0], p0[1] + lambda * dir[1]]
    };

    // block row spacing shared by all four blocks
    let depth = |b: usize| {
        let inner = circle(outer_radius, b * q + q / 2);
        let mid = (b * q + q / 2) % n;
        let outer = side_point(mid);
        ((outer[0] - inner[0]).powi(2) + (outer[1] - inner[1]).powi(2)).sqrt()
    };
    let depths: Vec<f64> = (0..4).map(depth).collect();
    let dmin = depths.iter().copied().fold(f64::INFINITY, f64::min);
    let dmax = depths.iter().copied().fold(0.0, f64::max);
    let first = (last_ring * spec.radial_grading / dmin).min(1.0);
    let last = (spec.far_field_size / dmax).min(1.0);
    let m = if first >= last {
        (1.0 / last).ceil() as usize
    } else {
        let rho = (1.0 - first) / (1.0 - last);
        (1.0 + (last / first).ln() / rho.ln()).ceil() as usize
    }
    .max(2);
    let block_params = graded_parameters(m, first);

    let mut bld = Builder {
        axis: cx,
        nodes: Vec::new(),
        triangles: Vec::new(),
        subdomains: Vec::new(),
    };

    // concrete rows: interface ring, annulus rings, block rows
    let rows = radii.len() + m;
    let mut grid = vec![vec![0usize; n]; rows];
    for (k, &rad) in radii.iter().enumerate() {
        for i in 0..n {
            grid[k][i] = bld.node(circle(rad, i));
        }
    }
    for (kb, &s) in block_params.iter().enumerate().skip(1) {
        let k = radii.len() - 1 + kb;
        for i in 0..n {
            let a = circle(outer_radius, i);
            let b = side_point(i);
            grid[k][i] = bld.node([(1.0 - s) * a[0] + s * b[0], (1.0 - s) * a[1] + s * b[1]]);
        }
    }
    for k in 0..rows - 1 {
        for i in 0..n {
            let j = (i + 1) % n;
            bld.quad(grid[k][i], grid[k][j], grid[k + 1][j], grid[k + 1][i], Subdomain::Concrete);
        }
    }

    let interface: Vec<Edge> = (0..n).map(|i| [grid[0][i], grid[0][(i + 1) % n]]).collect();
    let mut sides: BTreeMap<Side, Vec<Edge>> = BTreeMap::new();
    for i in 0..n {
        let side = block_sides[(i / q) % 4];
        sides
            .entry(side)
            .or_default()
            .push([grid[rows - 1][i], grid[rows - 1][(i + 1) % n]]);
    }

    if spec.mesh_steel {
        mesh_steel_disc(&mut bld, &grid[0], [cx, cy], r, first_ring, n);
    }

    let outer: Vec<Edge> = sides.values().flatten().copied().collect();
    let mut mesh = Mesh {
        nodes: bld.nodes,
        triangles: bld.triangles,
        subdomains: bld.subdomains,
        boundaries: BoundarySets {
            chloride_exposed: Vec::new(),
            sealed: outer,
            steel_interface: interface,
            upper_surface: sides[&Side::Top].clone(),
        },
        sides,
    };
    // skewed block cells near a close surface give obtuse pairs
    mesh.make_delaunay();
    mesh.validate()?;
    Ok(mesh)
}

/// Graded rings from the interface down to half the radius, then halving
/// transition rings, then a fan around the centre node.
fn mesh_steel_disc(bld: &mut Builder, interface: &[usize], center: [f64; 2], radius: f64, first: f64, n: usize) {
    let angle = |i: usize, count: usize| PI / 4.0 + 2.0 * PI * i as f64 / count as f64;
    let at = |rad: f64, a: f64| [center[0] + rad * a.cos(), center[1] + rad * a.sin()];

    // graded plain rings to r/2
    let mut thick = Vec::new();
    let mut total = 0.0;
    let mut t = first;
    while total + t < 0.5 * radius {
        thick.push(t);
        total += t;
        t *= 1.5;
    }
    if thick.is_empty() {
        thick.push(0.5 * radius);
    }
    let scale = 0.5 * radius / thick.iter().sum::<f64>();
    let mut ring: Vec<usize> = interface.to_vec();
    let mut rad = radius;
    for t in thick {
        rad -= t * scale;
        let next: Vec<usize> = (0..n).map(|i| bld.node(at(rad, angle(i, n)))).collect();
        for i in 0..n {
            let j = (i + 1) % n;
            bld.quad(ring[i], ring[j], next[j], next[i], Subdomain::Steel);
        }
        ring = next;
    }

    let mut count = n;
    while count > 8 && count % 2 == 0 {
        let inner_count = count / 2;
        rad *= 0.5;
        let next: Vec<usize> = (0..inner_count)
            .map(|i| bld.node(at(rad, angle(i, inner_count))))
            .collect();
        for j in 0..inner_count {
            let o0 = ring[2 * j];
            let o1 = ring[2 * j + 1];
            let o2 = ring[(2 * j + 2) % count];
            let i0 = next[j];
            let i1 = next[(j + 1) % inner_count];
            bld.tri(i0, o0, o1, Subdomain::Steel);
            bld.tri(i0, o1, i1, Subdomain::Steel);
            bld.tri(i1, o1, o2, Subdomain::Steel);
        }
        ring = next;
        count = inner_count;
    }
    let c = bld.node(center);
    for i in 0..count {
        bld.tri(c, ring[i], ring[(i + 1) % count], Subdomain::Steel);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centered(n: usize, nr: usize) -> OGridSpec {
        OGridSpec {
            width: 0.1,
            height: 0.1,
            rebar_center: [0.05, 0.05],
            rebar_radius: 0.005,
            circumferential_divisions: n,
            radial_divisions: nr,
            radial_grading: 1.2,
            far_field_size: 0.005,
            process_zone_length: None,
            mesh_steel: true,
        }
    }

    #[test]
    fn interface_has_requested_edge_count() {
        let mesh = generate_ogrid(&centered(32, 8)).unwrap();
        assert_eq!(mesh.boundaries.steel_interface.len(), 32);
        assert!((0..mesh.num_triangles()).all(|t| mesh.triangle_area(t) > 0.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_ogrid(&centered(32, 8)).unwrap();
        let b = generate_ogrid(&centered(32, 8)).unwrap();
        assert_eq!(a, b);
        let bits = |m: &Mesh| m.nodes.iter().flat_map(|p| [p[0].to_bits(), p[1].to_bits()]).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn oversized_rebar_is_infeasible() {
        let mut spec = centered(32, 8);
        spec.rebar_radius = 0.049;
        assert!(matches!(generate_ogrid(&spec), Err(MeshError::Geometry(_))));
    }

    #[test]
    fn graded_parameters_hit_endpoints() {
        let s = graded_parameters(10, 0.01);
        assert_eq!(s[0], 0.0);
        assert!((s[10] - 1.0).abs() < 1e-14);
        assert!((s[1] - 0.01).abs() < 1e-9);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn process_zone_length_refines_interface() {
        let mut spec = centered(32, 8);
        spec.process_zone_length = Some(0.001);
        let mesh = generate_ogrid(&spec).unwrap();
        let max_edge = mesh
            .boundaries
            .steel_interface
            .iter()
            .map(|&e| mesh.edge_length(e))
            .fold(0.0, f64::max);
        assert!(max_edge <= 0.001 / 5.0);
    }
}
