//! Group-based power allocation with a joint budget on the amplitudes of
//! the G users of the group over all hops.

use crate::error::{Error, Result};
use crate::linalg::{add_outer, CMat, CVec, HermitianSolver, C64, ONE};
use crate::oracle::stats::SymbolCorrelation;
use crate::signal::signature::EffectiveSignature;

/// Tikhonov weight used when none is configured.
pub const DEFAULT_LAMBDA: f64 = 0.025;

/// Ordered set of G distinct users (zero-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSelection {
    indices: Vec<usize>,
}

impl GroupSelection {
    pub fn new(indices: Vec<usize>, users: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Config("group must contain at least one user".into()));
        }
        if indices.len() > users {
            return Err(Error::GroupTooLarge {
                group: indices.len(),
                users,
            });
        }
        for (i, &k) in indices.iter().enumerate() {
            if k >= users {
                return Err(Error::Config(format!("group member {k} out of range 0..{users}")));
            }
            if indices[..i].contains(&k) {
                return Err(Error::Config(format!("group member {k} listed twice")));
            }
        }
        Ok(Self { indices })
    }

    /// Every user, in index order.
    pub fn all(users: usize) -> Self {
        Self {
            indices: (0..users).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, user: usize) -> bool {
        self.indices.contains(&user)
    }

    pub fn position(&self, user: usize) -> Option<usize> {
        self.indices.iter().position(|&k| k == user)
    }

    /// P_S = [P_{S_1} … P_{S_G}] as an explicit matrix.
    pub fn signature_matrix(&self, effective: &[EffectiveSignature]) -> CMat {
        let cols: Vec<CMat> = self.indices.iter().map(|&k| effective[k].phase_matrix()).collect();
        let rows = cols.first().map_or(0, |c| c.nrows());
        let np = cols.first().map_or(0, |c| c.ncols());
        let mut out = CMat::zeros(rows, np * cols.len());
        for (g, c) in cols.iter().enumerate() {
            out.view_mut((0, g * np), (rows, np)).copy_from(c);
        }
        out
    }
}

/// v = B_Sᴴ P_Sᴴ w. `symbols[g]` holds the per-phase symbols of group member g.
pub fn group_input(w: &CVec, group_effective: &[&EffectiveSignature], symbols: &[Vec<C64>]) -> CVec {
    let np = group_effective.first().map_or(0, |e| e.phases());
    let m = group_effective.first().map_or(0, |e| e.block(0).len());
    let mut v = CVec::zeros(np * group_effective.len());
    for (g, (eff, syms)) in group_effective.iter().zip(symbols).enumerate() {
        for (j, block) in eff.blocks().iter().enumerate() {
            let u = block.dotc(&w.rows(j * m, m));
            v[g * np + j] = syms[j].conj() * u;
        }
    }
    v
}

/// Time- or ensemble-averaged statistics of the group power problem:
/// R_S = E[v vᴴ] and p_S = E[b_k v].
#[derive(Debug, Clone)]
pub struct GroupPowerStats {
    pub covariance: CMat,
    pub cross_correlation: CVec,
    pub samples: usize,
}

/// Replaces the expectations by averages over `(b_k, v)` pairs.
pub fn estimate_group_stats(samples: &[(C64, CVec)]) -> Result<GroupPowerStats> {
    let (_, first) = samples.first().ok_or(Error::EmptySamples)?;
    let n = first.len();
    let mut covariance = CMat::zeros(n, n);
    let mut cross_correlation = CVec::zeros(n);
    for (b, v) in samples {
        if v.len() != n {
            return Err(Error::dim("estimate_group_stats", n, v.len()));
        }
        add_outer(&mut covariance, ONE, v, v);
        cross_correlation.axpy(*b, v, ONE);
    }
    let scale = C64::new(1.0 / samples.len() as f64, 0.0);
    covariance *= scale;
    cross_correlation *= scale;
    Ok(GroupPowerStats {
        covariance,
        cross_correlation,
        samples: samples.len(),
    })
}

impl GroupPowerStats {
    /// Model expectation for i.i.d. unit-power QPSK with every hop of a user
    /// carrying the same symbol: block-diagonal u_g u_gᴴ with u_g = P_gᴴ w,
    /// and p_S equal to u on the desired user's block (zero elsewhere, or
    /// everywhere when the desired user is outside the group).
    pub fn analytic(w: &CVec, group_effective: &[&EffectiveSignature], desired: Option<usize>) -> Self {
        Self::analytic_correlated(w, group_effective, desired, None)
    }

    /// As [`GroupPowerStats::analytic`] with measured hop statistics per
    /// member: block g of R_S is Γ_g* ∘ u_g u_gᴴ and the desired block of
    /// p_S is ρ_g* ∘ u_g.
    pub fn analytic_correlated(w: &CVec, group_effective: &[&EffectiveSignature], desired: Option<usize>, correlations: Option<&[&SymbolCorrelation]>) -> Self {
        let np = group_effective.first().map_or(0, |e| e.phases());
        let m = group_effective.first().map_or(0, |e| e.block(0).len());
        let dim = np * group_effective.len();
        let mut covariance = CMat::zeros(dim, dim);
        let mut cross_correlation = CVec::zeros(dim);
        for (g, eff) in group_effective.iter().enumerate() {
            let u = CVec::from_iterator(np, eff.blocks().iter().enumerate().map(|(j, b)| b.dotc(&w.rows(j * m, m))));
            let mut block = &u * u.adjoint();
            let mut cross = u.clone();
            if let Some(c) = correlations.map(|c| c[g]) {
                block.zip_apply(&c.gamma, |x, gm| *x *= gm.conj());
                cross.zip_apply(&c.rho, |x, r| *x *= r.conj());
            }
            covariance.view_mut((g * np, g * np), (np, np)).copy_from(&block);
            if desired == Some(g) {
                cross_correlation.rows_mut(g * np, np).copy_from(&cross);
            }
        }
        Self {
            covariance,
            cross_correlation,
            samples: usize::MAX,
        }
    }

    /// The exact quadratic of the MSE in the group allocation: as
    /// [`GroupPowerStats::analytic_correlated`] plus, per member, the block
    /// u'_g u'_gᴴ of its previous symbol, whose ISI also scales with the
    /// allocation. `chips` is the symbol period N.
    pub fn with_isi(w: &CVec, group_effective: &[&EffectiveSignature], desired: Option<usize>, correlations: Option<&[&SymbolCorrelation]>, chips: usize) -> Self {
        let mut stats = Self::analytic_correlated(w, group_effective, desired, correlations);
        let np = group_effective.first().map_or(0, |e| e.phases());
        let m = group_effective.first().map_or(0, |e| e.block(0).len());
        let tail = m.saturating_sub(chips);
        for (g, eff) in group_effective.iter().enumerate() {
            let u = CVec::from_iterator(
                np,
                eff.blocks().iter().enumerate().map(|(j, b)| b.rows(chips.min(m), tail).dotc(&w.rows(j * m, tail))),
            );
            let mut block = &u * u.adjoint();
            if let Some(c) = correlations.map(|c| c[g]) {
                block.zip_apply(&c.gamma, |x, gm| *x *= gm.conj());
            }
            let mut view = stats.covariance.view_mut((g * np, g * np), (np, np));
            view += block;
        }
        stats
    }

    /// The problem restricted to real amplitudes: Re R_S and Re p_S.
    pub fn real_part(&self) -> Self {
        Self {
            covariance: self.covariance.map(|z| C64::new(z.re, 0.0)),
            cross_correlation: self.cross_correlation.map(|z| C64::new(z.re, 0.0)),
            samples: self.samples,
        }
    }

    pub fn dim(&self) -> usize {
        self.cross_correlation.len()
    }

    /// At least as many samples as unknowns.
    pub fn is_rank_adequate(&self) -> bool {
        self.samples >= self.dim()
    }
}

/// How the unconstrained solution is scaled onto the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetScaling {
    /// a ← √P_G · a/‖a‖, so that aᴴa = P_G.
    #[default]
    SquaredNorm,
    /// a ← P_G · a/‖a‖ (gives aᴴa = P_G²; kept for comparison runs).
    Literal,
}

impl BudgetScaling {
    pub fn factor(self, norm: f64, budget: f64) -> f64 {
        match self {
            BudgetScaling::SquaredNorm => budget.sqrt() / norm,
            BudgetScaling::Literal => budget / norm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroupAllocation {
    /// (R_S + λI)⁻¹ p_S before scaling.
    pub solution: CVec,
    /// Complex allocation on the budget surface.
    pub projected: CVec,
    /// Physical amplitudes |projected|; the phases are carried by the
    /// symbols.
    pub amplitudes: Vec<f64>,
}

impl GroupAllocation {
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }
}

/// a_S = (R_S + λI)⁻¹ p_S followed by scaling onto the budget.
pub fn power_allocation_mmse(stats: &GroupPowerStats, lambda: f64, budget: f64, scaling: BudgetScaling) -> Result<GroupAllocation> {
    let n = stats.dim();
    if stats.covariance.nrows() != n {
        return Err(Error::dim("power_allocation_mmse", n, stats.covariance.nrows()));
    }
    let mut loaded = stats.covariance.clone();
    for i in 0..n {
        loaded[(i, i)] += lambda;
    }
    let solution = HermitianSolver::new(&loaded)?.solve(&stats.cross_correlation);
    let norm = solution.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateAllocation);
    }
    let projected = &solution * C64::new(scaling.factor(norm, budget), 0.0);
    let amplitudes = projected.iter().map(|z| z.norm()).collect();
    Ok(GroupAllocation {
        solution,
        projected,
        amplitudes,
    })
}

/// a_S = (R_S + λI)⁻¹ p_S with λ chosen numerically so that aᴴa = P_G holds
/// with equality, which makes a_S the minimizer of aᴴR_S a − 2 Re(aᴴp_S) on
/// the budget sphere. λ may be negative (down to −λ_min(R_S)). When p_S has
/// no component along the smallest eigenvector and the solution at
/// λ = −λ_min is still inside the sphere, the remaining power goes along
/// that eigenvector. Returns the allocation and the multiplier.
pub fn power_allocation_lagrangian(stats: &GroupPowerStats, budget: f64) -> Result<(GroupAllocation, f64)> {
    let n = stats.dim();
    if stats.covariance.shape() != (n, n) {
        return Err(Error::dim("power_allocation_lagrangian", n, stats.covariance.nrows()));
    }
    let p_norm = stats.cross_correlation.norm();
    if !(p_norm > 0.0 && p_norm.is_finite() && budget > 0.0 && budget.is_finite()) {
        return Err(Error::DegenerateAllocation);
    }
    let eig = stats.covariance.clone().symmetric_eigen();
    let d = &eig.eigenvalues;
    let c = eig.eigenvectors.adjoint() * &stats.cross_correlation;
    let (i_min, d_min) = d.iter().copied().enumerate().fold((0, f64::INFINITY), |acc, (i, x)| if x < acc.1 { (i, x) } else { acc });
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let flat = |i: usize| d[i] - d_min <= 1e-12 * scale;
    let norm2 = |mu: f64| (0..n).map(|i| c[i].norm_sqr() / (d[i] + mu).powi(2)).sum::<f64>();
    let along_min: f64 = (0..n).filter(|&i| flat(i)).map(|i| c[i].norm_sqr()).sum();

    let mut coeffs = CVec::zeros(n);
    let multiplier;
    let hard_inside = (0..n).filter(|&i| !flat(i)).map(|i| c[i].norm_sqr() / (d[i] - d_min).powi(2)).sum::<f64>();
    if along_min <= 1e-24 * p_norm * p_norm && hard_inside <= budget {
        multiplier = -d_min;
        for i in (0..n).filter(|&i| !flat(i)) {
            coeffs[i] = c[i] / (d[i] - d_min);
        }
        coeffs[i_min] = C64::new((budget - hard_inside).sqrt(), 0.0);
    } else {
        // norm2 falls monotonically from +∞ at −λ_min to below the budget at hi.
        let (mut lo, mut hi) = (-d_min, p_norm / budget.sqrt() - d_min);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm2(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        multiplier = hi;
        for i in 0..n {
            coeffs[i] = c[i] / (d[i] + multiplier);
        }
    }
    let solution = &eig.eigenvectors * coeffs;
    let mut projected = solution.clone();
    project_complex(&mut projected, budget, BudgetScaling::SquaredNorm)?;
    let amplitudes = projected.iter().map(|z| z.norm()).collect();
    Ok((
        GroupAllocation {
            solution,
            projected,
            amplitudes,
        },
        multiplier,
    ))
}

/// Scales a complex allocation in place onto the budget.
pub fn project_complex(a: &mut CVec, budget: f64, scaling: BudgetScaling) -> Result<()> {
    let norm = a.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateAllocation);
    }
    *a *= C64::new(scaling.factor(norm, budget), 0.0);
    Ok(())
}

/// Physical group allocation from per-member solutions. Member g keeps its
/// own block of `member_allocations[g]` (the hop split it computed for its
/// own detection), rescaled to its own power `member_powers[g]`; the group
/// total is therefore Σ member_powers. A member whose block vanished falls
/// back to an equal split.
pub fn combine_member_blocks(member_allocations: &[Vec<f64>], phases: usize, member_powers: &[f64]) -> Result<Vec<f64>> {
    if member_powers.len() != member_allocations.len() {
        return Err(Error::dim("combine_member_blocks powers", member_allocations.len(), member_powers.len()));
    }
    let mut out = Vec::with_capacity(member_allocations.len() * phases);
    for (g, (a, &power)) in member_allocations.iter().zip(member_powers).enumerate() {
        let block = a
            .get(g * phases..(g + 1) * phases)
            .ok_or_else(|| Error::dim("combine_member_blocks", (g + 1) * phases, a.len()))?;
        let mut block = block.to_vec();
        if crate::signal::power::project_to_budget(&mut block, power).is_err() {
            block = vec![(power / phases as f64).sqrt(); phases];
        }
        out.extend_from_slice(&block);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_vec;

    fn stats(r: CMat, p: CVec) -> GroupPowerStats {
        GroupPowerStats {
            covariance: r,
            cross_correlation: p,
            samples: 100,
        }
    }

    #[test]
    fn identity_system_is_proportional() {
        let v = real_vec(&[1.0, 2.0, 2.0]);
        let a = power_allocation_mmse(&stats(CMat::identity(3, 3), v.clone()), 0.0, 4.0, BudgetScaling::SquaredNorm).unwrap();
        let expected = &v * C64::new(2.0 / 3.0, 0.0);
        assert!((&a.projected - expected).norm() < 1e-14);
        assert!((a.power() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn one_dimensional_constraint() {
        let a = power_allocation_mmse(&stats(CMat::from_element(1, 1, C64::new(0.7, 0.0)), real_vec(&[0.3])), 0.025, 1.0, BudgetScaling::SquaredNorm).unwrap();
        assert!((a.amplitudes[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn literal_scaling_squares_the_budget() {
        let a = power_allocation_mmse(&stats(CMat::identity(2, 2), real_vec(&[1.0, 1.0])), 0.0, 3.0, BudgetScaling::Literal).unwrap();
        assert!((a.power() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn zero_cross_correlation_is_degenerate() {
        let r = power_allocation_mmse(&stats(CMat::identity(2, 2), CVec::zeros(2)), 0.1, 1.0, BudgetScaling::SquaredNorm);
        assert!(matches!(r, Err(Error::DegenerateAllocation)));
    }

    #[test]
    fn sample_stats_of_constant_input() {
        let v = CVec::from_vec(vec![C64::new(1.0, -0.5), C64::new(0.2, 0.3)]);
        let s = estimate_group_stats(&vec![(ONE, v.clone()); 7]).unwrap();
        assert!((s.covariance - &v * v.adjoint()).norm() < 1e-14);
        let one = estimate_group_stats(&[(ONE, v.clone())]).unwrap();
        assert!(!one.is_rank_adequate());
        assert!(matches!(estimate_group_stats(&[]), Err(Error::EmptySamples)));
    }

    #[test]
    fn member_blocks_keep_member_power() {
        let a = vec![vec![3.0, 4.0, 9.0, 9.0], vec![9.0, 9.0, 0.0, 5.0], vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0]];
        let out = combine_member_blocks(&a, 2, &[25.0, 4.0, 2.0]).unwrap();
        let expected = [3.0, 4.0, 0.0, 2.0, 1.0, 1.0];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-14);
        }
        assert!(combine_member_blocks(&a, 2, &[1.0]).is_err());
    }

    #[test]
    fn lagrangian_meets_budget_and_beats_scaling() {
        let r = CMat::from_diagonal(&real_vec(&[2.0, 0.5, 0.1]));
        let st = stats(r.clone(), real_vec(&[1.0, 0.4, 0.2]));
        let cost = |a: &CVec| (a.adjoint() * &r * a)[0].re - 2.0 * a.dotc(&st.cross_correlation).re;
        for budget in [0.1, 1.0, 10.0] {
            let (a, mu) = power_allocation_lagrangian(&st, budget).unwrap();
            assert!((a.solution.norm_squared() - budget).abs() < 1e-9 * budget, "{budget}");
            assert!(mu > -0.1);
            let scaled = power_allocation_mmse(&st, DEFAULT_LAMBDA, budget, BudgetScaling::SquaredNorm).unwrap();
            assert!(cost(&a.projected) <= cost(&scaled.projected) + 1e-12);
        }
    }

    #[test]
    fn lagrangian_hard_case_uses_null_direction() {
        // p has no component on the zero eigenvalue and the minimum-norm
        // solution lies inside the sphere.
        let st = stats(CMat::from_diagonal(&real_vec(&[1.0, 0.0])), real_vec(&[0.5, 0.0]));
        let (a, mu) = power_allocation_lagrangian(&st, 1.0).unwrap();
        assert!(mu.abs() < 1e-12);
        assert!((a.projected[0].re - 0.5).abs() < 1e-12);
        assert!((a.projected[1].norm() - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(power_allocation_lagrangian(&stats(CMat::identity(2, 2), CVec::zeros(2)), 1.0).is_err());
    }

    #[test]
    fn group_validation() {
        assert!(GroupSelection::new(vec![0, 2], 3).is_ok());
        assert!(GroupSelection::new(vec![0, 0], 3).is_err());
        assert!(GroupSelection::new(vec![3], 3).is_err());
        assert!(GroupSelection::new(vec![], 3).is_err());
        assert!(matches!(GroupSelection::new(vec![0, 1, 2, 3], 3), Err(Error::GroupTooLarge { .. })));
    }
}
