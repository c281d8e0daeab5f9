//! Small dense/banded linear algebra kernels used by the solvers.
//!
//! The Newton systems of the implicit stepper are symmetric and banded
//! (bandwidth 1 in 1D, `nx + 1` on tensor grids), so a banded LU with partial
//! pivoting covers every linear solve in the crate.  Eigenproblems are either
//! banded (inverse iteration for the smallest pair) or small and dense
//! (generalised symmetric pencils via `nalgebra`).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular at elimination step {0}")]
    Singular(usize),
    #[error("eigeniteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Banded square matrix in LAPACK-style storage.
///
/// Entry `(i, j)` with `|i - j| <= band` is stored at
/// `ab[kl + ku + i - j + j * ldab]`; the leading `kl` rows per column are
/// fill-in space for pivoting (`kl = ku = band`).
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, band: usize) -> Self {
        let (kl, ku) = (band, band);
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ldab
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.ku.min(self.kl) {
            0.0
        } else {
            self.ab[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(
            i.abs_diff(j) <= self.kl,
            "entry ({i},{j}) outside band {}",
            self.kl
        );
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    /// Zero a row and put `diag` on the diagonal (hard constraint rows).
    pub fn dirichlet_row(&mut self, i: usize, diag: f64) {
        let jlo = i.saturating_sub(self.kl);
        let jhi = (i + self.ku).min(self.n - 1);
        for j in jlo..=jhi {
            self.set(i, j, if i == j { diag } else { 0.0 });
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let ilo = j.saturating_sub(self.ku);
            let ihi = (j + self.kl).min(self.n - 1);
            let xj = x[j];
            for i in ilo..=ihi {
                y[i] += self.ab[self.idx(i, j)] * xj;
            }
        }
        y
    }

    /// LU factorisation with partial pivoting (dgbtrf-style, in place).
    pub fn factor(mut self) -> Result<BandLu, LinalgError> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku; // effective upper bandwidth after pivoting
        let mut ipiv = vec![0usize; n];
        for k in 0..n {
            // pivot search in column k, rows k..=k+kl
            let imax = (k + kl).min(n - 1);
            let mut p = k;
            let mut pmax = self.ab[self.idx(k, k)].abs();
            for i in (k + 1)..=imax {
                let v = self.ab[self.idx(i, k)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(LinalgError::Singular(k));
            }
            ipiv[k] = p;
            let jhi = (k + kv).min(n - 1);
            if p != k {
                for j in k..=jhi {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            for i in (k + 1)..=imax {
                let mi = self.idx(i, k);
                let m = self.ab[mi] / pivot;
                self.ab[mi] = m; // store multiplier
                if m != 0.0 {
                    for j in (k + 1)..=jhi {
                        let akj = self.ab[self.idx(k, j)];
                        if akj != 0.0 {
                            let t = self.idx(i, j);
                            self.ab[t] -= m * akj;
                        }
                    }
                }
            }
        }
        Ok(BandLu { mat: self, ipiv })
    }
}

/// Factored banded matrix; solves by forward/back substitution.
#[derive(Debug, Clone)]
pub struct BandLu {
    mat: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        assert_eq!(rhs.len(), n);
        let (kl, ku) = (self.mat.kl, self.mat.ku);
        let kv = kl + ku;
        let mut x = rhs.to_vec();
        // L (unit lower, with row swaps)
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                x.swap(k, p);
            }
            let imax = (k + kl).min(n - 1);
            for i in (k + 1)..=imax {
                x[i] -= self.mat.ab[self.mat.idx(i, k)] * x[k];
            }
        }
        // U
        for k in (0..n).rev() {
            let jhi = (k + kv).min(n - 1);
            let mut s = x[k];
            for j in (k + 1)..=jhi {
                s -= self.mat.ab[self.mat.idx(k, j)] * x[j];
            }
            x[k] = s / self.mat.ab[self.mat.idx(k, k)];
        }
        x
    }
}

/// Smallest eigenpair of the generalised symmetric problem `K x = λ M x`
/// with `M` diagonal positive, via inverse power iteration on `K`.
///
/// Returns `(λ, x)` with `x` normalised to `xᵀ M x = 1` and first nonzero
/// component positive.
pub fn smallest_eigenpair_banded(
    k: &BandMatrix,
    m_diag: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>), LinalgError> {
    let n = k.n();
    if m_diag.len() != n {
        return Err(LinalgError::Dimension {
            expected: n,
            got: m_diag.len(),
        });
    }
    let lu = k.clone().factor()?;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * ((i as f64) * 0.7).sin()).collect();
    let mut lambda_old = f64::INFINITY;
    for it in 0..max_iter {
        let mx: Vec<f64> = x.iter().zip(m_diag).map(|(xi, mi)| xi * mi).collect();
        let mut y = lu.solve(&mx);
        let ynorm = (y
            .iter()
            .zip(m_diag)
            .map(|(yi, mi)| yi * yi * mi)
            .sum::<f64>())
        .sqrt();
        for yi in &mut y {
            *yi /= ynorm;
        }
        let ky = k.matvec(&y);
        let lambda = y.iter().zip(&ky).map(|(a, b)| a * b).sum::<f64>();
        x = y;
        if (lambda - lambda_old).abs() <= tol * lambda.abs().max(1.0) {
            // fix sign convention
            if let Some(first) = x.iter().find(|v| v.abs() > 1e-14) {
                if *first < 0.0 {
                    for xi in &mut x {
                        *xi = -*xi;
                    }
                }
            }
            return Ok((lambda, x));
        }
        lambda_old = lambda;
        let _ = it;
    }
    Err(LinalgError::NoConvergence(max_iter))
}

/// All eigenvalues (ascending) and vectors of the dense generalised symmetric
/// problem `A x = λ B x` with `B` symmetric positive definite.
pub fn dense_generalized_symmetric(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(Vec<f64>, Vec<DVector<f64>>), LinalgError> {
    let n = a.nrows();
    let chol = b.clone().cholesky().ok_or(LinalgError::Singular(0))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let mut c = a.clone();
    for j in 0..n {
        let col = l.solve_lower_triangular(&c.column(j).into_owned()).unwrap();
        c.set_column(j, &col);
    }
    c.transpose_mut();
    for j in 0..n {
        let col = l.solve_lower_triangular(&c.column(j).into_owned()).unwrap();
        c.set_column(j, &col);
    }
    // symmetrise against roundoff
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Vec::with_capacity(n);
    for &i in &order {
        vals.push(eig.eigenvalues[i]);
        let y = eig.eigenvectors.column(i).into_owned();
        let x = l.transpose().solve_upper_triangular(&y).unwrap();
        vecs.push(x);
    }
    Ok((vals, vecs))
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, fa, b, fb, fm);
    let scale = whole.abs().max(1e-300);
    recurse(f, a, fa, b, fb, fm, whole, rel_tol * scale, 40)
}
