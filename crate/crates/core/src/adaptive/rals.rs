//! The RALS destination receiver: one shared R̂⁻¹, and per user a receive
//! filter, a channel estimate and (for group members) a power recursion,
//! alternated 1 or 2 times per symbol.

use serde::{Deserialize, Serialize};

use crate::adaptive::channel::{LsChannelEstimator, RlsChannelEstimator};
use crate::adaptive::power::RlsPowerAllocator;
use crate::adaptive::rake::RakeAccumulator;
use crate::adaptive::rls::{rls_filter_update, InverseCovariance, DEFAULT_INIT};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::oracle::power::{combine_member_blocks, group_input, BudgetScaling, GroupSelection};
use crate::signal::power::PowerAllocation;
use crate::signal::qpsk::qpsk_slice;
use crate::signal::signature::{EffectiveSignature, SignatureMatrix};

/// Where the relay-phase entries of B_k come from in decision-directed mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayReference {
    /// Slicer output of the part of w_k that covers that phase.
    #[default]
    PerPhase,
    /// The combined decision, assuming error-free relays.
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RalsOptions {
    pub forgetting: f64,
    /// R̂⁻¹[0] and R̂_S⁻¹[0] scale.
    pub init: f64,
    /// P̂_h[0] scale.
    pub channel_init: f64,
    pub channel_start: ChannelStart,
    pub channel_estimation: ChannelEstimation,
    /// Keep refining the channel estimates on decisions after training.
    pub track_channels: bool,
    pub iterations: usize,
    pub allocate_power: bool,
    pub group_size: usize,
    pub scaling: BudgetScaling,
    pub relay_reference: RelayReference,
}

impl Default for RalsOptions {
    fn default() -> Self {
        Self {
            forgetting: 0.998,
            init: DEFAULT_INIT,
            channel_init: 1.0,
            channel_start: ChannelStart::FirstTap,
            channel_estimation: ChannelEstimation::LeastSquares,
            track_channels: true,
            iterations: 2,
            allocate_power: true,
            group_size: 3,
            scaling: BudgetScaling::SquaredNorm,
            relay_reference: RelayReference::PerPhase,
        }
    }
}

/// Channel estimator run inside the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelEstimation {
    /// Exponentially weighted least squares on the known or decided
    /// symbols (unbiased).
    #[default]
    LeastSquares,
    /// ĥ = P̂_hᴴ Q_kᴴ R̂⁻¹ r with P̂_h accumulated from past estimates.
    Recursive,
}

/// Initial channel estimate ĥ[0].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelStart {
    /// Unit first tap on every link block.
    #[default]
    FirstTap,
    /// All zeros: the first estimate is the matched statistic itself.
    Zero,
}

/// Reference symbols for one update.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// Known source symbols of every user; relays are assumed to forward
    /// them unchanged.
    Training(&'a [C64]),
    Decision,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    /// Filter outputs w_kᴴ r before adaptation.
    pub outputs: Vec<C64>,
    pub decisions: Vec<C64>,
    /// Per user, the per-phase symbols used as B_k for this symbol.
    pub references: Vec<Vec<C64>>,
    /// A priori filter errors b − w_kᴴ r of the first iteration.
    pub errors: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct RalsReceiver {
    opts: RalsOptions,
    sigs: Vec<SignatureMatrix>,
    phases: usize,
    window: usize,
    cov: InverseCovariance,
    filters: Vec<CVec>,
    channels: Vec<ChannelTracker>,
    rake: RakeAccumulator,
    group: Option<GroupSelection>,
    power: Vec<Option<RlsPowerAllocator>>,
    member_powers: Vec<f64>,
    frozen: bool,
}

impl RalsReceiver {
    pub fn new(sigs: Vec<SignatureMatrix>, phases: usize, opts: RalsOptions) -> Result<Self> {
        let first = sigs.first().ok_or_else(|| Error::Config("receiver needs at least one user".into()))?;
        let (window, paths) = (first.window_len(), first.paths());
        if sigs.iter().any(|s| s.window_len() != window || s.paths() != paths) {
            return Err(Error::Config("all signatures must share N and L".into()));
        }
        if phases == 0 || !(1..=2).contains(&opts.iterations) {
            return Err(Error::Config("phases ≥ 1 and 1 or 2 iterations per symbol required".into()));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(opts.forgetting) || opts.forgetting > 1.0 || !positive(opts.init) || !positive(opts.channel_init) {
            return Err(Error::Config("invalid RALS forgetting or initialization".into()));
        }
        let users = sigs.len();
        if opts.allocate_power && (opts.group_size == 0 || opts.group_size > users) {
            return Err(Error::GroupTooLarge {
                group: opts.group_size,
                users,
            });
        }
        let dim = phases * window;
        Ok(Self {
            cov: InverseCovariance::new(dim, opts.init, opts.forgetting),
            filters: vec![CVec::zeros(dim); users],
            channels: sigs
                .iter()
                .map(|sig| ChannelTracker::new(sig, phases, &opts))
                .collect::<Result<_>>()?,
            rake: RakeAccumulator::new(users),
            group: None,
            power: vec![None; users],
            member_powers: Vec::new(),
            frozen: false,
            opts,
            sigs,
            phases,
            window,
        })
    }

    pub fn users(&self) -> usize {
        self.sigs.len()
    }

    pub fn options(&self) -> &RalsOptions {
        &self.opts
    }

    pub fn filters(&self) -> &[CVec] {
        &self.filters
    }

    pub fn inverse(&self) -> &CMat {
        self.cov.matrix()
    }

    pub fn channel_estimates(&self) -> impl Iterator<Item = &CVec> {
        self.channels.iter().map(|c| c.estimate())
    }

    pub fn group(&self) -> Option<&GroupSelection> {
        self.group.as_ref()
    }

    pub fn power_state(&self, user: usize) -> Option<&RlsPowerAllocator> {
        self.power[user].as_ref()
    }

    /// With a frozen state, `step` only filters and decides.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    /// Estimated effective signature of one user.
    pub fn effective_estimate(&self, user: usize) -> EffectiveSignature {
        self.channels[user].effective(&self.sigs[user])
    }

    /// Fixes the group from the RAKE statistics accumulated since the last
    /// selection and starts the power recursions of its members from the
    /// current amplitudes. The budget is the group's current power.
    pub fn select_group(&mut self, amplitudes: &PowerAllocation) -> Result<&GroupSelection> {
        let group = self.rake.statistic().select(self.opts.group_size)?;
        self.member_powers = group.indices().iter().map(|&s| amplitudes.user_power(s)).collect();
        let budget: f64 = self.member_powers.iter().sum();
        let initial = CVec::from_iterator(
            group.len() * self.phases,
            amplitudes.group_vector(group.indices()).into_iter().map(|a| C64::new(a, 0.0)),
        );
        self.power = vec![None; self.users()];
        for &k in group.indices() {
            self.power[k] = Some(RlsPowerAllocator::new(
                initial.clone(),
                self.opts.init,
                self.opts.forgetting,
                budget,
                self.opts.scaling,
            )?);
        }
        self.rake.reset();
        Ok(self.group.insert(group))
    }

    /// The physical group allocation implied by the members' recursions:
    /// member s contributes its own hop split at its own power.
    pub fn group_amplitudes(&self) -> Option<Result<Vec<f64>>> {
        let group = self.group.as_ref()?;
        let members: Vec<Vec<f64>> = group
            .indices()
            .iter()
            .map(|&k| self.power[k].as_ref().map(|p| p.amplitudes()).unwrap_or_default())
            .collect();
        Some(combine_member_blocks(&members, self.phases, &self.member_powers))
    }

    /// One received symbol. `amplitudes` are the destination-side amplitudes
    /// that generated `r`.
    pub fn step(&mut self, r: &CVec, amplitudes: &PowerAllocation, reference: Reference<'_>) -> Result<StepOutput> {
        let users = self.users();
        if r.len() != self.phases * self.window {
            return Err(Error::dim("rals step window", self.phases * self.window, r.len()));
        }
        if amplitudes.users() != users || amplitudes.phases() != self.phases {
            return Err(Error::dim("rals step amplitudes", users * self.phases, amplitudes.users() * amplitudes.phases()));
        }
        let outputs: Vec<C64> = self.filters.iter().map(|w| w.dotc(r)).collect();
        let decisions: Vec<C64> = outputs.iter().map(|&z| qpsk_slice(z)).collect();
        let references: Vec<Vec<C64>> = match reference {
            Reference::Training(t) => {
                if t.len() != users {
                    return Err(Error::dim("training symbols", users, t.len()));
                }
                t.iter().map(|&b| vec![b; self.phases]).collect()
            }
            Reference::Decision => (0..users).map(|k| self.decision_references(k, r, decisions[k])).collect(),
        };
        let mut errors: Vec<C64> = references.iter().zip(&outputs).map(|(b, z)| b[0] - z).collect();
        if self.frozen {
            return Ok(StepOutput {
                outputs,
                decisions,
                references,
                errors,
            });
        }

        let gain = self.cov.update(r);
        let update_channels = self.opts.track_channels || matches!(reference, Reference::Training(_));
        for (k, est) in self.channels.iter_mut().enumerate().filter(|_| update_channels) {
            let coef: Vec<C64> = references[k]
                .iter()
                .zip(amplitudes.user(k))
                .map(|(&b, &a)| b * a)
                .collect();
            est.update(&self.sigs[k], &coef, r, &gain);
        }
        let group_eff: Option<Vec<EffectiveSignature>> = match &self.group {
            None => {
                let mags: Vec<f64> = (0..users)
                    .map(|k| self.effective_estimate(k).stacked().dotc(r).norm())
                    .collect();
                self.rake.add(&mags);
                None
            }
            Some(g) => self
                .opts
                .allocate_power
                .then(|| g.indices().iter().map(|&s| self.effective_estimate(s)).collect()),
        };

        for it in 0..self.opts.iterations {
            for k in 0..users {
                let b = references[k][0];
                if let (Some(eff), Some(group), Some(power)) = (&group_eff, &self.group, self.power[k].as_mut()) {
                    let refs: Vec<&EffectiveSignature> = eff.iter().collect();
                    let syms: Vec<Vec<C64>> = group.indices().iter().map(|&s| references[s].clone()).collect();
                    let v = group_input(&self.filters[k], &refs, &syms);
                    if it == 0 {
                        power.update(b, &v);
                    } else {
                        power.refine(b, &v);
                    }
                }
                let xi = rls_filter_update(&mut self.filters[k], b, r, &gain);
                if it == 0 {
                    errors[k] = xi;
                }
            }
        }
        Ok(StepOutput {
            outputs,
            decisions,
            references,
            errors,
        })
    }

    fn decision_references(&self, k: usize, r: &CVec, combined: C64) -> Vec<C64> {
        let m = self.window;
        (0..self.phases)
            .map(|j| {
                if j == 0 || self.opts.relay_reference == RelayReference::Combined {
                    combined
                } else {
                    let z = self.filters[k].rows(j * m, m).dotc(&r.rows(j * m, m));
                    if z == C64::new(0.0, 0.0) {
                        combined
                    } else {
                        qpsk_slice(z)
                    }
                }
            })
            .collect()
    }

    pub fn snapshot(&self) -> RalsSnapshot {
        RalsSnapshot {
            users: self.users(),
            phases: self.phases,
            window: self.window,
            paths: self.channels[0].paths(),
            inverse: mat_pairs(self.cov.matrix()),
            filters: self.filters.iter().map(vec_pairs).collect(),
            channels: self.channels.iter().map(|c| vec_pairs(c.estimate())).collect(),
            group: self.group.as_ref().map(|g| g.indices().to_vec()),
            power: self
                .power
                .iter()
                .map(|p| {
                    p.as_ref().map(|p| PowerSnapshot {
                        raw: vec_pairs(p.raw()),
                        projected: vec_pairs(p.projected()),
                        inverse: mat_pairs(p.inverse()),
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
enum ChannelTracker {
    LeastSquares(LsChannelEstimator),
    Recursive(RlsChannelEstimator),
}

impl ChannelTracker {
    fn new(sig: &SignatureMatrix, phases: usize, opts: &RalsOptions) -> Result<Self> {
        let (paths, dim) = (sig.paths(), phases * sig.paths());
        Ok(match opts.channel_estimation {
            ChannelEstimation::LeastSquares => Self::LeastSquares(LsChannelEstimator::new(sig, phases, opts.forgetting)?),
            ChannelEstimation::Recursive => Self::Recursive(match opts.channel_start {
                ChannelStart::FirstTap => RlsChannelEstimator::new(phases, paths, opts.channel_init, opts.forgetting),
                ChannelStart::Zero => RlsChannelEstimator::with_state(
                    CVec::zeros(dim),
                    CMat::from_diagonal_element(dim, dim, C64::new(opts.channel_init, 0.0)),
                    paths,
                    opts.forgetting,
                ),
            }),
        })
    }

    fn estimate(&self) -> &CVec {
        match self {
            Self::LeastSquares(e) => e.estimate(),
            Self::Recursive(e) => e.estimate(),
        }
    }

    fn paths(&self) -> usize {
        match self {
            Self::LeastSquares(e) => e.paths(),
            Self::Recursive(e) => e.paths(),
        }
    }

    fn effective(&self, sig: &SignatureMatrix) -> EffectiveSignature {
        match self {
            Self::LeastSquares(e) => e.effective(sig),
            Self::Recursive(e) => e.effective(sig),
        }
    }

    fn update(&mut self, sig: &SignatureMatrix, coef: &[C64], r: &CVec, gain: &CVec) {
        match self {
            Self::LeastSquares(e) => {
                e.update(sig, coef, r);
            }
            Self::Recursive(e) => {
                e.update(sig, coef, gain);
            }
        }
    }
}

/// Serializable copy of the receiver state. Complex numbers are `[re, im]`
/// pairs and matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RalsSnapshot {
    pub users: usize,
    pub phases: usize,
    pub window: usize,
    pub paths: usize,
    pub inverse: Vec<[f64; 2]>,
    pub filters: Vec<Vec<[f64; 2]>>,
    pub channels: Vec<Vec<[f64; 2]>>,
    pub group: Option<Vec<usize>>,
    pub power: Vec<Option<PowerSnapshot>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSnapshot {
    pub raw: Vec<[f64; 2]>,
    pub projected: Vec<[f64; 2]>,
    pub inverse: Vec<[f64; 2]>,
}

const MAX_SNAPSHOT_DIM: usize = 4096;

impl RalsSnapshot {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and checks every dimension and value.
    pub fn parse(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("snapshot: {m}")));
        if self.users == 0 || self.phases == 0 || self.paths == 0 || self.window < self.paths {
            return bad("empty or inconsistent dimensions");
        }
        let dim = self
            .phases
            .checked_mul(self.window)
            .filter(|&d| d <= MAX_SNAPSHOT_DIM)
            .ok_or_else(|| Error::Config("snapshot: dimension too large".into()))?;
        let finite = |v: &[[f64; 2]]| v.iter().all(|z| z[0].is_finite() && z[1].is_finite());
        if self.inverse.len() != dim * dim || !finite(&self.inverse) {
            return bad("inverse covariance");
        }
        if self.filters.len() != self.users || self.filters.iter().any(|f| f.len() != dim || !finite(f)) {
            return bad("filters");
        }
        let hl = self.phases * self.paths;
        if self.channels.len() != self.users || self.channels.iter().any(|h| h.len() != hl || !finite(h)) {
            return bad("channel estimates");
        }
        if self.power.len() != self.users {
            return bad("power states");
        }
        let gdim = match &self.group {
            Some(g) => {
                GroupSelection::new(g.clone(), self.users)?;
                g.len() * self.phases
            }
            None => 0,
        };
        for (k, p) in self.power.iter().enumerate() {
            let member = self.group.as_ref().is_some_and(|g| g.contains(&k));
            match p {
                None => {}
                Some(_) if !member => return bad("power state for a non-member"),
                Some(p) => {
                    if p.raw.len() != gdim || p.projected.len() != gdim || p.inverse.len() != gdim * gdim {
                        return bad("power state dimensions");
                    }
                    if !(finite(&p.raw) && finite(&p.projected) && finite(&p.inverse)) {
                        return bad("non-finite power state");
                    }
                }
            }
        }
        Ok(())
    }
}

fn vec_pairs(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn mat_pairs(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}
