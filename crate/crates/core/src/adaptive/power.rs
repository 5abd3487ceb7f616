//! Recursive group power allocation driven by v_k = B_Sᴴ P̂_Sᴴ w_k.

use crate::adaptive::rls::InverseCovariance;
use crate::error::Result;
use crate::linalg::{CMat, CVec, C64};
use crate::oracle::power::{project_complex, BudgetScaling};

/// State of the power recursion of one user. The recursion runs on the raw
/// vector; the emitted allocation is its projection onto the budget.
#[derive(Debug, Clone)]
pub struct RlsPowerAllocator {
    inverse: InverseCovariance,
    raw: CVec,
    projected: CVec,
    budget: f64,
    scaling: BudgetScaling,
    last_gain: CVec,
}

impl RlsPowerAllocator {
    pub fn new(initial: CVec, init: f64, forgetting: f64, budget: f64, scaling: BudgetScaling) -> Result<Self> {
        let dim = initial.len();
        let mut projected = initial.clone();
        project_complex(&mut projected, budget, scaling)?;
        Ok(Self {
            inverse: InverseCovariance::new(dim, init, forgetting),
            raw: projected.clone(),
            projected,
            budget,
            scaling,
            last_gain: CVec::zeros(dim),
        })
    }

    pub fn from_parts(inverse: CMat, raw: CVec, forgetting: f64, budget: f64, scaling: BudgetScaling) -> Result<Self> {
        let mut projected = raw.clone();
        project_complex(&mut projected, budget, scaling)?;
        Ok(Self {
            last_gain: CVec::zeros(raw.len()),
            inverse: InverseCovariance::from_matrix(inverse, forgetting),
            raw,
            projected,
            budget,
            scaling,
        })
    }

    pub fn raw(&self) -> &CVec {
        &self.raw
    }

    pub fn projected(&self) -> &CVec {
        &self.projected
    }

    pub fn inverse(&self) -> &CMat {
        self.inverse.matrix()
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.projected.iter().map(|z| z.norm()).collect()
    }

    /// Full update: R_S⁻¹ absorbs v, then â ← â + ξ_a k_S with
    /// ξ_a = b − vᴴâ. Returns ξ_a.
    pub fn update(&mut self, reference: C64, v: &CVec) -> C64 {
        let gain = self.inverse.update(v);
        let xi = self.correct(reference, v, &gain);
        self.last_gain = gain;
        xi
    }

    /// Further correction with the gain of the last full update, as used by
    /// additional alternating iterations on the same symbol. The gain is
    /// recomputed for the new input as R_S⁻¹ v.
    pub fn refine(&mut self, reference: C64, v: &CVec) -> C64 {
        let gain = self.inverse.matrix() * v;
        self.correct(reference, v, &gain)
    }

    fn correct(&mut self, reference: C64, v: &CVec, gain: &CVec) -> C64 {
        let xi = reference - v.dotc(&self.raw);
        let mut next = self.raw.clone();
        next.axpy(xi, gain, C64::new(1.0, 0.0));
        let mut projected = next.clone();
        if next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) && project_complex(&mut projected, self.budget, self.scaling).is_ok() {
            self.raw = next;
            self.projected = projected;
        }
        xi
    }
}

pub fn rals_power_update(state: &mut RlsPowerAllocator, reference: C64, v: &CVec) -> CVec {
    state.update(reference, v);
    state.projected().clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_vec;

    fn alloc() -> RlsPowerAllocator {
        RlsPowerAllocator::new(real_vec(&[1.0, 1.0, 1.0, 1.0]), 0.01, 0.998, 2.0, BudgetScaling::SquaredNorm).unwrap()
    }

    #[test]
    fn initial_allocation_is_on_budget() {
        let a = alloc();
        assert!((a.projected().norm_squared() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_input_leaves_allocation() {
        let mut a = alloc();
        let before = a.projected().clone();
        a.update(C64::new(1.0, -1.0), &CVec::zeros(4));
        assert_eq!(a.projected(), &before);
    }

    #[test]
    fn zero_innovation_leaves_allocation() {
        let mut a = alloc();
        let v = real_vec(&[0.2, 0.1, -0.3, 0.5]);
        let b = v.dotc(a.raw());
        let before = a.projected().clone();
        a.update(b, &v);
        assert!((a.projected() - before).norm() < 1e-15);
    }
}
