//! Linear-triangle finite elements: shape functions, quadrature, sparse
//! assembly of diffusion and elasticity operators, and a sparse direct solver.

mod ldl;
mod ordering;
mod space;
mod sparse;

use thiserror::Error;

pub use ldl::{solve_direct, DirectSolver};
pub use ordering::nested_dissection;
pub use space::{
    assemble_elasticity, assemble_transient_diffusion, element_strain, Coefficient, ElasticMaterial, Eigenstrain,
    Geometry, ScalarSpace, TransientDiffusion, VectorSpace,
};
pub use sparse::{CsrMatrix, CsrPattern, SparseSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("matrix is singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-positive capacity {value:e} in element {element}")]
    NonPositiveCapacity { element: usize, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Quadrature on the reference triangle with vertices (0,0), (1,0), (0,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub points: [[f64; 2]; 3],
    pub weights: [f64; 3],
    /// Polynomial degree integrated exactly.
    pub degree: u32,
}

/// Three-point rule, exact for quadratics. Weights sum to the reference
/// area 1/2.
pub const TRI3_RULE: QuadratureRule = QuadratureRule {
    points: [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
    weights: [1.0 / 6.0; 3],
    degree: 2,
};

/// Two-point Gauss rule on [0, 1] as (parameter, weight) pairs.
pub const LINE_GAUSS2: [(f64, f64); 2] = [
    (0.211_324_865_405_187_12, 0.5),
    (0.788_675_134_594_812_9, 0.5),
];

/// Linear triangle shape functions and their reference gradients.
pub fn tri3_shape(xi: f64, eta: f64) -> ([f64; 3], [[f64; 2]; 3]) {
    (
        [1.0 - xi - eta, xi, eta],
        [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
    )
}

/// Shape values at the points of [`TRI3_RULE`].
pub(crate) fn qp_shapes() -> [[f64; 3]; 3] {
    let mut n = [[0.0; 3]; 3];
    for (q, p) in TRI3_RULE.points.iter().enumerate() {
        n[q] = tri3_shape(p[0], p[1]).0;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vertex_and_centroid_values() {
        assert_eq!(tri3_shape(0.0, 0.0).0, [1.0, 0.0, 0.0]);
        let (n, _) = tri3_shape(1.0 / 3.0, 1.0 / 3.0);
        for v in n {
            assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rule_is_exact_for_quadratics() {
        // integral of x^2 over the reference triangle is 1/12, of x*y is 1/24
        let integrate = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            TRI3_RULE.points.iter().zip(TRI3_RULE.weights).map(|(p, w)| w * f(p[0], p[1])).sum()
        };
        assert_relative_eq!(integrate(&|_, _| 1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(integrate(&|x, _| x * x), 1.0 / 12.0, epsilon = 1e-15);
        assert_relative_eq!(integrate(&|x, y| x * y), 1.0 / 24.0, epsilon = 1e-15);
    }

    #[test]
    fn line_rule_is_exact_for_cubics() {
        let s: f64 = LINE_GAUSS2.iter().map(|(t, w)| w * t.powi(3)).sum();
        assert_relative_eq!(s, 0.25, epsilon = 1e-15);
    }
}
