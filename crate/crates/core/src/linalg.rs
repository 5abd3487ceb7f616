//! Complex dense linear algebra used throughout the crate.
//!
//! Every "inverse" in the receiver equations is realized as a Hermitian
//! solve. [`HermitianSolver`] factors once (Cholesky, with diagonal loading
//! as a fallback) and can then be applied to any number of right-hand sides.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Relative diagonal loading applied when a plain Cholesky factorization fails.
pub const LOADING: f64 = 1e-10;

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// Replaces `m` by (m + mᴴ)/2 in place.
pub fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// ‖m − mᴴ‖_F / ‖m‖_F (zero for the zero matrix).
pub fn hermitian_defect(m: &CMat) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / norm
}

/// Extreme eigenvalues of a Hermitian matrix (min, max).
pub fn eigen_range(m: &CMat) -> (f64, f64) {
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Hermitian to 1e-12 relative and λ_min ≥ −1e-10·λ_max.
pub fn is_hermitian_psd(m: &CMat) -> bool {
    if hermitian_defect(m) > 1e-12 {
        return false;
    }
    let (min, max) = eigen_range(m);
    min >= -1e-10 * max.abs().max(f64::MIN_POSITIVE)
}

/// Outer product v vᴴ.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Accumulates `scale · x yᴴ` into `m`.
pub fn add_outer(m: &mut CMat, scale: C64, x: &CVec, y: &CVec) {
    m.gerc(scale, x, y, ONE);
}

/// Inner product xᴴ y.
pub fn dotc(x: &CVec, y: &CVec) -> C64 {
    x.dotc(y)
}

/// Angle in radians between two complex vectors, insensitive to a common
/// phase rotation: acos(|xᴴy| / (‖x‖‖y‖)).
pub fn subspace_angle(x: &CVec, y: &CVec) -> f64 {
    let nx = x.norm();
    let ny = y.norm();
    if nx == 0.0 || ny == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    (x.dotc(y).norm() / (nx * ny)).clamp(0.0, 1.0).acos()
}

/// Reusable solver for a Hermitian positive (semi)definite system.
#[derive(Clone, Debug)]
pub struct HermitianSolver {
    chol: Cholesky<C64, Dyn>,
    loading: f64,
}

impl HermitianSolver {
    /// Factors `m`. Falls back to `m + εI` with ε = 1e-10·trace/dim if the
    /// plain factorization fails.
    pub fn new(m: &CMat) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::dim("hermitian solve", n, m.ncols()));
        }
        if let Some(chol) = Cholesky::new(m.clone()) {
            if chol_is_sound(&chol) {
                return Ok(Self { chol, loading: 0.0 });
            }
        }
        let trace = trace_re(m);
        if !(trace > 0.0 && trace.is_finite()) {
            return Err(Error::Singular {
                dim: n,
                trace,
                min_pivot: 0.0,
            });
        }
        let eps = LOADING * trace / n as f64;
        let mut loaded = m.clone();
        for i in 0..n {
            loaded[(i, i)] += eps;
        }
        match Cholesky::new(loaded) {
            Some(chol) if chol_is_sound(&chol) => Ok(Self { chol, loading: eps }),
            other => {
                let min_pivot = other
                    .map(|c| {
                        let l = c.l_dirty();
                        (0..n).map(|i| l[(i, i)].re).fold(f64::INFINITY, f64::min)
                    })
                    .unwrap_or(0.0);
                Err(Error::Singular {
                    dim: n,
                    trace,
                    min_pivot,
                })
            }
        }
    }

    /// Diagonal loading that was needed to factor the matrix (0 if none).
    pub fn loading(&self) -> f64 {
        self.loading
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &CVec) -> CVec {
        self.chol.solve(b)
    }

    pub fn solve_mat(&self, b: &CMat) -> CMat {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> CMat {
        self.chol.inverse()
    }
}

fn chol_is_sound(chol: &Cholesky<C64, Dyn>) -> bool {
    let l = chol.l_dirty();
    (0..l.nrows()).all(|i| l[(i, i)].re.is_finite() && l[(i, i)].re > 0.0)
}

/// Solves m x = b for Hermitian m.
pub fn solve_hermitian(m: &CMat, b: &CVec) -> Result<CVec> {
    Ok(HermitianSolver::new(m)?.solve(b))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scaled_identity(n: usize, s: f64) -> CMat {
    CMat::from_diagonal_element(n, n, C64::new(s, 0.0))
}

pub fn real_vec(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_diagonal() {
        let m = CMat::from_diagonal(&real_vec(&[2.0, 1.0]));
        let x = solve_hermitian(&m, &real_vec(&[1.0, 1.0])).unwrap();
        assert!((x[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((x[1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_gets_loaded() {
        let v = real_vec(&[1.0, 1.0]);
        let m = outer(&v);
        let solver = HermitianSolver::new(&m).unwrap();
        assert!(solver.loading() > 0.0);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let m = CMat::zeros(3, 3);
        assert!(matches!(HermitianSolver::new(&m), Err(Error::Singular { .. })));
    }

    #[test]
    fn hermitize_and_checks() {
        let mut m = CMat::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.1), C64::new(0.0, 1.0), C64::new(0.0, -0.8), C64::new(3.0, 0.0)],
        );
        assert!(hermitian_defect(&m) > 0.0);
        hermitize(&mut m);
        assert!(hermitian_defect(&m) < 1e-15);
        assert!(is_hermitian_psd(&m));
    }

    #[test]
    fn angle_ignores_common_phase() {
        let x = CVec::from_vec(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.3)]);
        let y = &x * C64::from_polar(3.0, 1.1);
        assert!(subspace_angle(&x, &y) < 1e-7);
    }
}
