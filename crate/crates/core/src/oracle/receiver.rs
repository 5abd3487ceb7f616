use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, HermitianSolver};

/// A full-statistics receive filter together with the statistics it was
/// designed from.
#[derive(Debug, Clone)]
pub struct ReceiverDesign {
    pub filter: CVec,
    pub covariance: CMat,
    pub cross_correlation: CVec,
    pub lambda: f64,
}

impl ReceiverDesign {
    pub fn design(covariance: CMat, cross_correlation: CVec, lambda: f64) -> Result<Self> {
        let filter = mmse_receive_filter(&covariance, &cross_correlation)?;
        Ok(Self {
            filter,
            covariance,
            cross_correlation,
            lambda,
        })
    }

    pub fn mse(&self) -> f64 {
        mse(&self.filter, &self.covariance, &self.cross_correlation)
    }
}

/// w = R⁻¹ p, computed as a Hermitian solve.
pub fn mmse_receive_filter(covariance: &CMat, cross_correlation: &CVec) -> Result<CVec> {
    if covariance.nrows() != cross_correlation.len() {
        return Err(Error::dim("mmse_receive_filter", covariance.nrows(), cross_correlation.len()));
    }
    Ok(HermitianSolver::new(covariance)?.solve(cross_correlation))
}

/// E|b − wᴴr|² = 1 − 2 Re(wᴴp) + wᴴ R w for a unit-power symbol.
pub fn mse(w: &CVec, covariance: &CMat, cross_correlation: &CVec) -> f64 {
    1.0 - 2.0 * w.dotc(cross_correlation).re + w.dotc(&(covariance * w)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_vec, C64};

    #[test]
    fn identity_covariance() {
        let mut p = CVec::zeros(5);
        p[2] = C64::new(1.0, 0.0);
        let w = mmse_receive_filter(&CMat::identity(5, 5), &p).unwrap();
        assert_eq!(w, p);
    }

    #[test]
    fn diagonal_covariance() {
        let r = CMat::from_diagonal(&real_vec(&[2.0, 1.0]));
        let w = mmse_receive_filter(&r, &real_vec(&[1.0, 1.0])).unwrap();
        assert!((w - real_vec(&[0.5, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(mmse_receive_filter(&CMat::identity(3, 3), &CVec::zeros(2)).is_err());
    }
}
