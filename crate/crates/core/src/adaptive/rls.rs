//! Exponentially weighted RLS: the inverse-covariance recursion shared by
//! all filters of a receiver, and the per-user filter update.

use crate::linalg::{hermitize, CMat, CVec, C64, ONE, ZERO};
use crate::signal::qpsk::qpsk_slice;

/// Initial inverse covariance scale (R⁻¹[0] = 0.01 I).
pub const DEFAULT_INIT: f64 = 0.01;

/// Running estimate of R⁻¹ maintained with the matrix inversion lemma.
#[derive(Debug, Clone)]
pub struct InverseCovariance {
    matrix: CMat,
    forgetting: f64,
    scratch: CVec,
}

impl InverseCovariance {
    pub fn new(dim: usize, init: f64, forgetting: f64) -> Self {
        Self {
            matrix: CMat::from_diagonal_element(dim, dim, C64::new(init, 0.0)),
            forgetting,
            scratch: CVec::zeros(dim),
        }
    }

    pub fn from_matrix(matrix: CMat, forgetting: f64) -> Self {
        let dim = matrix.nrows();
        Self {
            matrix,
            forgetting,
            scratch: CVec::zeros(dim),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn forgetting(&self) -> f64 {
        self.forgetting
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// One rank-one update with data vector r. Returns the gain
    /// k = α⁻¹R⁻¹r / (1 + α⁻¹ rᴴR⁻¹r), which also equals the updated R⁻¹ r.
    pub fn update(&mut self, r: &CVec) -> CVec {
        let alpha = self.forgetting;
        self.scratch.gemv(ONE, &self.matrix, r, ZERO);
        let pi = &self.scratch;
        let denom = alpha + r.dotc(pi).re;
        let gain = pi / C64::new(denom, 0.0);
        // R⁻¹ ← α⁻¹ (R⁻¹ − k πᴴ), using rᴴR⁻¹ = πᴴ for Hermitian R⁻¹.
        self.matrix
            .gerc(C64::new(-1.0 / (alpha * denom), 0.0), pi, pi, C64::new(1.0 / alpha, 0.0));
        hermitize(&mut self.matrix);
        gain
    }
}

pub fn rls_gain_and_inverse_update(state: &mut InverseCovariance, r: &CVec) -> CVec {
    state.update(r)
}

/// w ← w + k ξ*, ξ = b − wᴴr. Returns the a priori error ξ.
pub fn rls_filter_update(w: &mut CVec, reference: C64, r: &CVec, gain: &CVec) -> C64 {
    let xi = reference - w.dotc(r);
    w.axpy(xi.conj(), gain, ONE);
    xi
}

/// Multiuser RLS detector: one shared inverse covariance and one filter per
/// user, trained on known symbols and then switched to decision-directed
/// operation.
#[derive(Debug, Clone)]
pub struct RlsDetector {
    cov: InverseCovariance,
    filters: Vec<CVec>,
}

impl RlsDetector {
    pub fn new(dim: usize, users: usize, init: f64, forgetting: f64) -> Self {
        Self {
            cov: InverseCovariance::new(dim, init, forgetting),
            filters: vec![CVec::zeros(dim); users],
        }
    }

    pub fn filters(&self) -> &[CVec] {
        &self.filters
    }

    pub fn inverse(&self) -> &InverseCovariance {
        &self.cov
    }

    /// Decides every user with the current filters, then adapts using
    /// `training` when given and the decisions otherwise.
    pub fn step(&mut self, r: &CVec, training: Option<&[C64]>) -> Vec<C64> {
        let decisions: Vec<C64> = self.filters.iter().map(|w| qpsk_slice(w.dotc(r))).collect();
        let gain = self.cov.update(r);
        for (k, w) in self.filters.iter_mut().enumerate() {
            let reference = training.map_or(decisions[k], |t| t[k]);
            rls_filter_update(w, reference, r, &gain);
        }
        decisions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    #[test]
    fn zero_data_only_scales() {
        let mut c = InverseCovariance::new(3, 0.5, 0.9);
        let k = c.update(&CVec::zeros(3));
        assert!(k.iter().all(|z| *z == ZERO));
        assert!((c.matrix() - identity(3) * C64::new(0.5 / 0.9, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sherman_morrison_on_identity() {
        let mut c = InverseCovariance::new(4, 1.0, 1.0);
        let mut e1 = CVec::zeros(4);
        e1[0] = ONE;
        c.update(&e1);
        let mut expected = identity(4);
        expected[(0, 0)] = C64::new(0.5, 0.0);
        assert!((c.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn filter_update_from_zero() {
        let mut w = CVec::zeros(2);
        let gain = CVec::from_vec(vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.0)]);
        let r = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let b = C64::new(0.6, -0.8);
        let xi = rls_filter_update(&mut w, b, &r, &gain);
        assert_eq!(xi, b);
        assert!((&w - &gain * b.conj()).norm() < 1e-15);
        let before = w.clone();
        let target = w.dotc(&r);
        rls_filter_update(&mut w, target, &r, &gain);
        assert!((w - before).norm() < 1e-15);
    }
}
