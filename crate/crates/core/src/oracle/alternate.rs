//! Alternating solution of the coupled receive-filter / group-allocation
//! problem of one desired user under full statistics.

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, HermitianSolver, C64};
use crate::oracle::power::{power_allocation_mmse, BudgetScaling, GroupAllocation, GroupPowerStats, GroupSelection};
use crate::oracle::receiver::mse;
use crate::oracle::stats::{received_covariance, SymbolCorrelation, UserSignal};
use crate::signal::signature::EffectiveSignature;

#[derive(Debug, Clone)]
pub struct AlternatingProblem<'a> {
    /// Effective signatures of all K users.
    pub effective: &'a [EffectiveSignature],
    /// Per-user, per-phase amplitudes. Entries of group members are replaced
    /// by the allocation being optimized.
    pub amplitudes: Vec<Vec<C64>>,
    pub group: GroupSelection,
    /// Index of the desired user (must belong to the group).
    pub desired: usize,
    pub chips: usize,
    pub noise_var: f64,
    pub lambda: f64,
    pub budget: f64,
    pub scaling: BudgetScaling,
    /// Measured hop statistics per user; error-free relays when absent.
    pub correlations: Option<&'a [SymbolCorrelation]>,
}

#[derive(Debug, Clone)]
pub struct AlternatingOutcome {
    pub filter: CVec,
    /// Complex group allocation (phases belong to the symbol convention).
    pub allocation: CVec,
    pub amplitudes: Vec<f64>,
    /// Analytic MSE after every half-step, in order.
    pub mse: Vec<f64>,
}

impl AlternatingProblem<'_> {
    fn phases(&self) -> usize {
        self.effective.first().map_or(0, |e| e.phases())
    }

    fn amplitudes_with(&self, group_alloc: &CVec) -> Vec<Vec<C64>> {
        let np = self.phases();
        let mut amps = self.amplitudes.clone();
        for (g, &k) in self.group.indices().iter().enumerate() {
            amps[k] = group_alloc.rows(g * np, np).iter().copied().collect();
        }
        amps
    }

    fn signals(&self, group_alloc: &CVec) -> Vec<UserSignal> {
        self.amplitudes_with(group_alloc)
            .iter()
            .zip(self.effective)
            .enumerate()
            .map(|(k, (a, e))| {
                let s = UserSignal::new(e, a, self.chips);
                match self.correlations {
                    Some(c) => s.with_correlation(c[k].clone()),
                    None => s,
                }
            })
            .collect()
    }

    /// R(a) and p_k(a) = P_k a_k.
    pub fn statistics(&self, group_alloc: &CVec) -> (CMat, CVec) {
        let signals = self.signals(group_alloc);
        let cross = signals[self.desired].cross_correlation();
        (received_covariance(&signals, self.noise_var), cross)
    }

    pub fn mse(&self, w: &CVec, group_alloc: &CVec) -> f64 {
        let (r, p) = self.statistics(group_alloc);
        mse(w, &r, &p)
    }

    /// w = R(a)⁻¹ p_k(a).
    pub fn filter_step(&self, group_alloc: &CVec) -> Result<CVec> {
        let (r, p) = self.statistics(group_alloc);
        Ok(HermitianSolver::new(&r)?.solve(&p))
    }

    /// Group statistics R_S, p_S for fixed w from the model expectations.
    pub fn power_stats(&self, w: &CVec) -> GroupPowerStats {
        let members: Vec<&EffectiveSignature> = self.group.indices().iter().map(|&k| &self.effective[k]).collect();
        let correlations: Option<Vec<&SymbolCorrelation>> = self.correlations.map(|c| self.group.indices().iter().map(|&k| &c[k]).collect());
        GroupPowerStats::analytic_correlated(w, &members, self.group.position(self.desired), correlations.as_deref())
    }

    /// Exact quadratic of the MSE in the group allocation for fixed w,
    /// including the ISI each member's previous symbol contributes.
    pub fn exact_power_stats(&self, w: &CVec) -> GroupPowerStats {
        let members: Vec<&EffectiveSignature> = self.group.indices().iter().map(|&k| &self.effective[k]).collect();
        let correlations: Option<Vec<&SymbolCorrelation>> = self.correlations.map(|c| self.group.indices().iter().map(|&k| &c[k]).collect());
        GroupPowerStats::with_isi(w, &members, self.group.position(self.desired), correlations.as_deref(), self.chips)
    }

    /// Allocation for fixed w from the model expectations.
    pub fn power_step(&self, w: &CVec) -> Result<GroupAllocation> {
        power_allocation_mmse(&self.power_stats(w), self.lambda, self.budget, self.scaling)
    }
}

/// Alternates the power step (w fixed) and the filter step (a fixed) for
/// `n_iter` sweeps. Without an initial filter, the first action is a filter
/// step from `init_alloc`.
pub fn alternate_oracle(problem: &AlternatingProblem<'_>, init_filter: Option<CVec>, init_alloc: CVec, n_iter: usize) -> Result<AlternatingOutcome> {
    if n_iter == 0 {
        return Err(Error::Config("alternate_oracle needs at least one iteration".into()));
    }
    if !problem.group.contains(problem.desired) {
        return Err(Error::Config(format!("desired user {} is not in the group", problem.desired)));
    }
    let expected = problem.group.len() * problem.phases();
    if init_alloc.len() != expected {
        return Err(Error::dim("alternate_oracle allocation", expected, init_alloc.len()));
    }
    let mut trajectory = Vec::with_capacity(2 * n_iter + 1);
    let mut alloc = init_alloc;
    let mut filter = match init_filter {
        Some(w) => w,
        None => {
            let w = problem.filter_step(&alloc)?;
            trajectory.push(problem.mse(&w, &alloc));
            w
        }
    };
    for _ in 0..n_iter {
        alloc = problem.power_step(&filter)?.projected;
        trajectory.push(problem.mse(&filter, &alloc));
        filter = problem.filter_step(&alloc)?;
        trajectory.push(problem.mse(&filter, &alloc));
    }
    let amplitudes = alloc.iter().map(|z| z.norm()).collect();
    Ok(AlternatingOutcome {
        filter,
        allocation: alloc,
        amplitudes,
        mse: trajectory,
    })
}
