//! Linear MMSE estimation of the stacked channel h_k from one received
//! window.

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, HermitianSolver, C64};
use crate::signal::signature::SignatureMatrix;

/// Q_k = B̃_k Ã_k C̃_k: block-diagonal with blocks b_j a_j C_k.
pub fn channel_model_matrix(sig: &SignatureMatrix, phase_symbols: &[C64], amplitudes: &[f64]) -> CMat {
    let (m, l) = (sig.window_len(), sig.paths());
    let np = phase_symbols.len();
    let mut q = CMat::zeros(np * m, np * l);
    for (j, (&b, &a)) in phase_symbols.iter().zip(amplitudes).enumerate() {
        q.view_mut((j * m, j * l), (m, l)).copy_from(&(sig.matrix() * (b * a)));
    }
    q
}

/// Everything the estimator needs: Q_j and P_{h_j} for every user, the ISI
/// covariance and the noise variance.
#[derive(Debug, Clone)]
pub struct ChannelEstimatorStats {
    pub model_matrices: Vec<CMat>,
    pub channel_covariances: Vec<CMat>,
    pub isi_covariance: CMat,
    pub noise_var: f64,
}

impl ChannelEstimatorStats {
    /// R = Σ_j Q_j P_{h_j} Q_jᴴ + P_η + σ² I.
    pub fn model_covariance(&self) -> CMat {
        let mut r = self.isi_covariance.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += self.noise_var;
        }
        for (q, ph) in self.model_matrices.iter().zip(&self.channel_covariances) {
            r += q * ph * q.adjoint();
        }
        r
    }

    pub fn solver(&self) -> Result<HermitianSolver> {
        HermitianSolver::new(&self.model_covariance())
    }

    /// T_k = R⁻¹ Q_k P_{h_k}.
    pub fn estimator_matrix(&self, user: usize) -> Result<CMat> {
        let cross = &self.model_matrices[user] * &self.channel_covariances[user];
        Ok(self.solver()?.solve_mat(&cross))
    }

    /// ĥ_k = P_{h_k}ᴴ Q_kᴴ R⁻¹ r with a factorization shared with the
    /// receive-filter solve.
    pub fn estimate_with(&self, solver: &HermitianSolver, user: usize, r: &CVec) -> Result<CVec> {
        if solver.dim() != r.len() {
            return Err(Error::dim("channel estimate", solver.dim(), r.len()));
        }
        let y = solver.solve(r);
        let q = &self.model_matrices[user];
        Ok(self.channel_covariances[user].adjoint() * (q.adjoint() * y))
    }
}

/// ĥ_k for one window, factoring the model covariance from scratch.
pub fn channel_estimate_mmse(r: &CVec, stats: &ChannelEstimatorStats, user: usize) -> Result<CVec> {
    stats.estimate_with(&stats.solver()?, user, r)
}
