//! Sparse LDLᵀ factorization (up-looking, elimination-tree based) of
//! symmetric matrices stored as full CSR.

use std::sync::Arc;

use super::{nested_dissection, CsrMatrix, CsrPattern, FemError, SparseSystem};

const NONE: usize = usize::MAX;

/// Pivots smaller than this fraction of the largest diagonal entry are
/// treated as zero.
const PIVOT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Symbolic {
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
}

impl Symbolic {
    fn analyse(p: &CsrPattern) -> Self {
        let n = p.n();
        let perm = nested_dissection(p);
        let mut pinv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            pinv[i] = k;
        }
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &j in p.row(perm[k]) {
                let mut i = pinv[j];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut col_ptr = vec![0; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        Symbolic {
            perm,
            pinv,
            parent,
            col_ptr,
        }
    }
}

struct Numeric {
    rows: Vec<usize>,
    vals: Vec<f64>,
    d: Vec<f64>,
}

fn factor(sym: &Symbolic, a: &CsrMatrix) -> Result<Numeric, FemError> {
    let p = &a.pattern;
    let n = p.n();
    let nnz = sym.col_ptr[n];
    let mut rows = vec![0usize; nnz];
    let mut vals = vec![0.0; nnz];
    let mut d = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut pattern = vec![0usize; n];
    let mut flag = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) {
        return Err(FemError::Singular { pivot: 0 });
    }
    for k in 0..n {
        let mut top = n;
        flag[k] = k;
        let kk = sym.perm[k];
        for idx in p.row_ptr[kk]..p.row_ptr[kk + 1] {
            let mut i = sym.pinv[p.cols[idx]];
            if i > k {
                continue;
            }
            y[i] += a.values[idx];
            let mut len = 0;
            while flag[i] != k {
                pattern[len] = i;
                len += 1;
                flag[i] = k;
                i = sym.parent[i];
            }
            while len > 0 {
                top -= 1;
                len -= 1;
                pattern[top] = pattern[len];
            }
        }
        let mut dk = y[k];
        y[k] = 0.0;
        for &i in &pattern[top..n] {
            let yi = y[i];
            y[i] = 0.0;
            let start = sym.col_ptr[i];
            let end = start + lnz[i];
            for q in start..end {
                y[rows[q]] -= vals[q] * yi;
            }
            let l = yi / d[i];
            dk -= l * yi;
            rows[end] = k;
            vals[end] = l;
            lnz[i] += 1;
        }
        if !dk.is_finite() {
            return Err(FemError::NonFinite("factorization"));
        }
        if dk.abs() <= PIVOT_TOLERANCE * scale {
            return Err(FemError::Singular { pivot: kk });
        }
        d[k] = dk;
    }
    Ok(Numeric { rows, vals, d })
}

fn substitute(sym: &Symbolic, num: &Numeric, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x: Vec<f64> = sym.perm.iter().map(|&i| b[i]).collect();
    for j in 0..n {
        let xj = x[j];
        for q in sym.col_ptr[j]..sym.col_ptr[j + 1] {
            x[num.rows[q]] -= num.vals[q] * xj;
        }
    }
    for (xj, dj) in x.iter_mut().zip(&num.d) {
        *xj /= dj;
    }
    for j in (0..n).rev() {
        let mut s = x[j];
        for q in sym.col_ptr[j]..sym.col_ptr[j + 1] {
            s -= num.vals[q] * x[num.rows[q]];
        }
        x[j] = s;
    }
    let mut out = vec![0.0; n];
    for (k, &i) in sym.perm.iter().enumerate() {
        out[i] = x[k];
    }
    out
}

/// Direct solver that keeps the symbolic analysis of the last pattern it
/// saw, so repeated solves on one mesh only refactor numerically.
#[derive(Debug, Default, Clone)]
pub struct DirectSolver {
    cache: Option<(Arc<CsrPattern>, Symbolic)>,
}

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solve a symmetric system `A x = b` (no constraints).
    pub fn solve_matrix(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, FemError> {
        if b.len() != a.n() {
            return Err(FemError::Dimension(format!("rhs {} vs matrix {}", b.len(), a.n())));
        }
        if b.iter().chain(&a.values).any(|v| !v.is_finite()) {
            return Err(FemError::NonFinite("linear system"));
        }
        let reuse = matches!(&self.cache, Some((p, _)) if Arc::ptr_eq(p, &a.pattern) || **p == *a.pattern);
        if !reuse {
            self.cache = Some((a.pattern.clone(), Symbolic::analyse(&a.pattern)));
        }
        let sym = &self.cache.as_ref().unwrap().1;
        let num = factor(sym, a)?;
        let mut x = substitute(sym, &num, b);
        // one step of iterative refinement
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
        let dx = substitute(sym, &num, &r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        Ok(x)
    }

    /// Eliminate the constraints of `system` and solve it.
    pub fn solve(&mut self, system: &SparseSystem) -> Result<Vec<f64>, FemError> {
        let (a, b) = system.eliminated();
        self.solve_matrix(&a, &b)
    }
}

/// One-shot direct solve of a constrained symmetric system.
pub fn solve_direct(system: &SparseSystem) -> Result<Vec<f64>, FemError> {
    DirectSolver::new().solve(system)
}
