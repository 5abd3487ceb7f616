//! Recursive channel estimation: P̂_h ← α P̂_h + ĥĥᴴ, then
//! ĥ = P̂_hᴴ Q_kᴴ R̂⁻¹ r with unit-norm link blocks.

use crate::error::Result;
use crate::linalg::{add_outer, CMat, CVec, HermitianSolver, C64, ONE, ZERO};
use crate::signal::signature::{EffectiveSignature, SignatureMatrix};

#[derive(Debug, Clone)]
pub struct RlsChannelEstimator {
    estimate: CVec,
    raw: CVec,
    autocorrelation: CMat,
    forgetting: f64,
    paths: usize,
}

impl RlsChannelEstimator {
    /// ĥ[0] = e_1 on every link block and P̂_h[0] = δI.
    pub fn new(phases: usize, paths: usize, delta: f64, forgetting: f64) -> Self {
        let mut h0 = CVec::zeros(phases * paths);
        for j in 0..phases {
            h0[j * paths] = ONE;
        }
        Self::with_state(h0, CMat::from_diagonal_element(phases * paths, phases * paths, C64::new(delta, 0.0)), paths, forgetting)
    }

    pub fn with_state(estimate: CVec, autocorrelation: CMat, paths: usize, forgetting: f64) -> Self {
        Self {
            raw: estimate.clone(),
            estimate,
            autocorrelation,
            forgetting,
            paths,
        }
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn phases(&self) -> usize {
        self.estimate.len() / self.paths
    }

    /// Block-normalized estimate.
    pub fn estimate(&self) -> &CVec {
        &self.estimate
    }

    /// The last estimate before normalization.
    pub fn raw(&self) -> &CVec {
        &self.raw
    }

    pub fn autocorrelation(&self) -> &CMat {
        &self.autocorrelation
    }

    /// One update. `coefficients[j]` = b_kj a_kj builds Q_k from the
    /// signature; `whitened` is R̂⁻¹[i] r[i] (the shared RLS gain).
    pub fn update(&mut self, sig: &SignatureMatrix, coefficients: &[C64], whitened: &CVec) -> &CVec {
        let (l, m) = (self.paths, sig.window_len());
        self.autocorrelation *= C64::new(self.forgetting, 0.0);
        add_outer(&mut self.autocorrelation, ONE, &self.estimate, &self.estimate);
        let mut x = CVec::zeros(self.estimate.len());
        for (j, c) in coefficients.iter().enumerate() {
            let block = sig.apply_adjoint(&whitened.as_slice()[j * m..(j + 1) * m]);
            x.rows_mut(j * l, l).axpy(c.conj(), &block, ZERO);
        }
        self.raw.gemv_ad(ONE, &self.autocorrelation, &x, ZERO);
        for j in 0..self.phases() {
            let norm = self.raw.rows(j * l, l).norm();
            if norm > 0.0 && norm.is_finite() {
                let block = self.raw.rows(j * l, l) / C64::new(norm, 0.0);
                self.estimate.rows_mut(j * l, l).copy_from(&block);
            }
        }
        &self.estimate
    }

    /// p̂_k = C̃_k ĥ_k.
    pub fn effective(&self, sig: &SignatureMatrix) -> EffectiveSignature {
        EffectiveSignature::from_blocks(self.estimate.as_slice().chunks(self.paths).map(|t| sig.apply(t)).collect())
    }
}

pub fn rls_channel_update(est: &mut RlsChannelEstimator, sig: &SignatureMatrix, coefficients: &[C64], whitened: &CVec) -> CVec {
    est.update(sig, coefficients, whitened).clone()
}

/// Exponentially weighted least squares: ĥ minimizes
/// Σ α^{i−l} ‖r[l] − Q_k[l] h‖². With unit-modulus symbols the normal
/// matrix of link block j is (Σ α^{i−l} a_j²[l]) CᴴC, so only the matched
/// statistic θ = Σ α^{i−l} Q_kᴴ[l] r[l] is accumulated and each block is
/// solved against the code Gram matrix.
#[derive(Debug, Clone)]
pub struct LsChannelEstimator {
    gram: HermitianSolver,
    matched: CVec,
    estimate: CVec,
    forgetting: f64,
    paths: usize,
}

impl LsChannelEstimator {
    pub fn new(sig: &SignatureMatrix, phases: usize, forgetting: f64) -> Result<Self> {
        let c = sig.matrix();
        let paths = sig.paths();
        let mut estimate = CVec::zeros(phases * paths);
        for j in 0..phases {
            estimate[j * paths] = ONE;
        }
        Ok(Self {
            gram: HermitianSolver::new(&(c.adjoint() * c))?,
            matched: CVec::zeros(phases * paths),
            estimate,
            forgetting,
            paths,
        })
    }

    pub fn estimate(&self) -> &CVec {
        &self.estimate
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// `coefficients[j]` = b_kj a_kj, `r` the stacked received vector.
    pub fn update(&mut self, sig: &SignatureMatrix, coefficients: &[C64], r: &CVec) -> &CVec {
        let (l, m) = (self.paths, sig.window_len());
        self.matched *= C64::new(self.forgetting, 0.0);
        for (j, c) in coefficients.iter().enumerate() {
            let block = sig.apply_adjoint(&r.as_slice()[j * m..(j + 1) * m]);
            self.matched.rows_mut(j * l, l).axpy(c.conj(), &block, ONE);
        }
        for j in 0..coefficients.len() {
            let h = self.gram.solve(&self.matched.rows(j * l, l).into_owned());
            let norm = h.norm();
            if norm > 0.0 && norm.is_finite() {
                self.estimate.rows_mut(j * l, l).copy_from(&(h / C64::new(norm, 0.0)));
            }
        }
        &self.estimate
    }

    pub fn effective(&self, sig: &SignatureMatrix) -> EffectiveSignature {
        EffectiveSignature::from_blocks(self.estimate.as_slice().chunks(self.paths).map(|t| sig.apply(t)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::signal::signature::build_signature_matrix;

    #[test]
    fn zero_start_gives_scaled_matched_output() {
        let sig = build_signature_matrix(&[0.5, -0.5, 0.5, 0.5], 2).unwrap();
        let mut est = RlsChannelEstimator::with_state(CVec::zeros(4), identity(4) * C64::new(3.0, 0.0), 2, 0.9);
        let y = CVec::from_fn(10, |i, _| C64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05));
        let coef = [C64::new(0.0, 1.0), C64::new(-2.0, 0.0)];
        est.update(&sig, &coef, &y);
        let mut expected = CVec::zeros(4);
        for (j, c) in coef.iter().enumerate() {
            let b = sig.apply_adjoint(&y.as_slice()[j * 5..(j + 1) * 5]) * c.conj() * C64::new(2.7, 0.0);
            expected.rows_mut(j * 2, 2).copy_from(&b);
        }
        assert!((est.raw() - expected).norm() < 1e-12);
        for j in 0..2 {
            assert!((est.estimate().rows(j * 2, 2).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_input_keeps_previous_blocks() {
        let sig = build_signature_matrix(&[1.0, 1.0], 1).unwrap();
        let mut est = RlsChannelEstimator::new(2, 1, 1.0, 0.99);
        let before = est.estimate().clone();
        est.update(&sig, &[ONE, ONE], &CVec::zeros(4));
        assert_eq!(est.estimate(), &before);
    }
}
