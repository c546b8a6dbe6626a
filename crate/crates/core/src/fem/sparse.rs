use std::sync::Arc;

use super::FemError;

/// Sparsity pattern of a square matrix in compressed sparse row layout.
/// Column indices are sorted and unique within each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPattern {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
}

impl CsrPattern {
    /// Pattern coupling every pair of dofs that share an element. Each
    /// element is given by the list of its dofs.
    pub fn from_elements<'a>(n: usize, elements: impl Iterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in elements {
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (i, mut r) in rows.into_iter().enumerate() {
            r.push(i);
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        CsrPattern { row_ptr, cols }
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Storage index of entry (i, j).
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        self.row(i).binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub pattern: Arc<CsrPattern>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: Arc<CsrPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, values }
    }

    /// Dense-to-sparse conversion keeping only nonzero entries and the
    /// diagonal.
    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let n = a.len();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut values = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 || i == j {
                    cols.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        debug_assert_eq!(row_ptr.len(), n + 1);
        CsrMatrix {
            pattern: Arc::new(CsrPattern { row_ptr, cols }),
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.find(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Add `a` to entry (i, j), which must be in the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, a: f64) {
        let k = self.pattern.find(i, j).expect("entry outside sparsity pattern");
        self.values[k] += a;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        (0..p.n())
            .map(|i| {
                (p.row_ptr[i]..p.row_ptr[i + 1])
                    .map(|k| self.values[k] * x[p.cols[k]])
                    .sum()
            })
            .collect()
    }

    /// `self += s * other`; both must share a pattern.
    pub fn add_scaled(&mut self, s: f64, other: &CsrMatrix) {
        assert!(Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, &v) in d.iter().enumerate() {
            self.add(i, i, v);
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let p = &self.pattern;
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..p.n()).all(|i| {
            (p.row_ptr[i]..p.row_ptr[i + 1]).all(|k| (self.values[k] - self.get(p.cols[k], i)).abs() <= tol * scale)
        })
    }
}

/// A linear system with Dirichlet constraints still to be eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub constraints: Vec<(usize, f64)>,
}

impl SparseSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Result<Self, FemError> {
        if rhs.len() != matrix.n() {
            return Err(FemError::Dimension(format!(
                "rhs has {} entries for a {}x{} matrix",
                rhs.len(),
                matrix.n(),
                matrix.n()
            )));
        }
        Ok(SparseSystem {
            matrix,
            rhs,
            constraints: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// Prescribe `x[dof] = value`, replacing an earlier constraint on the
    /// same dof.
    pub fn constrain(&mut self, dof: usize, value: f64) {
        match self.constraints.iter_mut().find(|c| c.0 == dof) {
            Some(c) => c.1 = value,
            None => self.constraints.push((dof, value)),
        }
    }

    /// Symmetric elimination of the constraints. Constrained rows keep their
    /// diagonal (or 1 when it vanishes) so the scaling of the system is
    /// preserved.
    pub fn eliminated(&self) -> (CsrMatrix, Vec<f64>) {
        let n = self.n();
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        for &(d, v) in &self.constraints {
            fixed[d] = Some(v);
        }
        let mut a = self.matrix.clone();
        let mut b = self.rhs.clone();
        let p = a.pattern.clone();
        for i in 0..n {
            let range = p.row_ptr[i]..p.row_ptr[i + 1];
            if let Some(g) = fixed[i] {
                let mut diag = 0.0;
                for k in range {
                    if p.cols[k] == i {
                        diag = a.values[k];
                    }
                    a.values[k] = 0.0;
                }
                let diag = if diag > 0.0 { diag } else { 1.0 };
                let k = p.find(i, i).expect("pattern contains the diagonal");
                a.values[k] = diag;
                b[i] = diag * g;
            } else {
                for k in range {
                    if let Some(g) = fixed[p.cols[k]] {
                        b[i] -= a.values[k] * g;
                        a.values[k] = 0.0;
                    }
                }
            }
        }
        (a, b)
    }

    /// `A x - b` with the unconstrained operator: the reactions needed to
    /// hold the constrained dofs.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.matrix.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(&self.rhs) {
            *ri -= bi;
        }
        r
    }
}
