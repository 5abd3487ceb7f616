//! Invariant suites shared by `coopsim selftest` and the acceptance tests.
//! Each check compares a library routine against an independent reference
//! computation and reports the worst deviation seen.

use std::fmt;
use std::time::Instant;

use coop_cdma::adaptive::{InverseCovariance, RlsPowerAllocator};
use coop_cdma::linalg::{subspace_angle, CMat, CVec, HermitianSolver, C64};
use coop_cdma::oracle::power::group_input;
use coop_cdma::oracle::{power_allocation_lagrangian, power_allocation_mmse, AlternatingProblem, BudgetScaling, GroupSelection, DEFAULT_LAMBDA};
use coop_cdma::rng::{derive_seed, stream, SimRng};
use coop_cdma::signal::qpsk::random_symbol;
use coop_cdma::signal::synth::{compact_synthesis, isi_from_previous, link_responses, PhaseStream, SymbolFrame};
use coop_cdma::signal::{build_signature_matrix, effective_signature, generate_channels, random_codes, stack_received, ChannelState, EffectiveSignature, Link, SignatureMatrix};
use coop_cdma::{NetworkConfig, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation.
    pub metric: f64,
    pub tolerance: f64,
    pub seconds: f64,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst {:.3e} (tolerance {:.1e}, {:.1} s){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.metric,
            self.tolerance,
            self.seconds,
            if self.detail.is_empty() { String::new() } else { format!(" {}", self.detail) }
        )
    }
}

fn outcome(name: &'static str, metric: f64, tolerance: f64, start: Instant, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: metric <= tolerance,
        metric,
        tolerance,
        seconds: start.elapsed().as_secs_f64(),
        detail,
    }
}

fn cgauss(rng: &mut SimRng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) / 2f64.sqrt()
}

fn cgauss_vec(n: usize, rng: &mut SimRng) -> CVec {
    CVec::from_fn(n, |_, _| cgauss(rng))
}

/// A small random network with its codes, channels and per-hop amplitudes.
pub struct Scenario {
    pub cfg: NetworkConfig,
    pub sigs: Vec<SignatureMatrix>,
    pub channels: ChannelState,
    pub effective: Vec<EffectiveSignature>,
    /// `[user][phase]`
    pub amplitudes: Vec<Vec<f64>>,
}

impl Scenario {
    pub fn random(users: usize, chips: usize, paths: usize, relays: usize, noise_var: f64, seed: u64) -> Result<Self> {
        let cfg = NetworkConfig {
            users,
            processing_gain: chips,
            paths,
            relays,
            group_size: users,
            noise_var,
            ..NetworkConfig::default()
        };
        let mut rng = stream(seed, &[1]);
        let codes = random_codes(users, chips, &mut rng)?;
        let sigs: Vec<SignatureMatrix> = codes.iter().map(|c| build_signature_matrix(c.chips(), paths)).collect::<Result<_>>()?;
        let channels = generate_channels(&cfg, derive_seed(seed, &[2]));
        let effective = (0..users)
            .map(|k| effective_signature(&sigs[k], &channels.stacked(k)))
            .collect::<Result<_>>()?;
        let amplitudes = (0..users).map(|_| (0..=relays).map(|_| rng.random_range(0.2..2.0)).collect()).collect();
        Ok(Self {
            cfg,
            sigs,
            channels,
            effective,
            amplitudes,
        })
    }

    /// Received windows of a whole frame, one chip stream per destination
    /// link, stacked per symbol.
    pub fn windows(&self, frame: &SymbolFrame, seed: u64) -> Result<Vec<CVec>> {
        let links: Vec<Link> = self.channels.destination_links().collect();
        let mut streams: Vec<PhaseStream> = links
            .iter()
            .enumerate()
            .map(|(j, &l)| PhaseStream::new(link_responses(&self.sigs, &self.channels, l), self.cfg.processing_gain, self.cfg.noise_var, stream(seed, &[3, j as u64])))
            .collect();
        let mut out = Vec::with_capacity(frame.len());
        for i in 0..frame.len() {
            let mut blocks = Vec::with_capacity(links.len());
            for (j, (link, ps)) in links.iter().zip(streams.iter_mut()).enumerate() {
                let sent: Vec<C64> = frame.transmitted(*link)?.iter().map(|s| s[i]).collect();
                let amps: Vec<f64> = self.amplitudes.iter().map(|a| a[j]).collect();
                blocks.push(ps.next(&amps, &sent));
            }
            out.push(stack_received(&blocks.iter().map(Some).collect::<Vec<_>>())?);
        }
        Ok(out)
    }
}

/// Phase-by-phase chip synthesis against the compact matrix form, including
/// ISI and relays forwarding symbols that differ from the source.
pub fn model_consistency(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for t in 0..instances {
        let mut rng = stream(seed, &[t as u64]);
        let users = rng.random_range(1..=4);
        let relays = rng.random_range(0..=2);
        let chips = rng.random_range(2..=16);
        let paths = rng.random_range(1..=5);
        let sc = Scenario::random(users, chips, paths, relays, 0.0, derive_seed(seed, &[t as u64, 1]))?;
        let len = 4;
        let mut frame = SymbolFrame::random(users, len, relays, &mut rng);
        for j in 0..relays {
            let decided = (0..users).map(|_| (0..len).map(|_| random_symbol(&mut rng)).collect()).collect();
            frame.set_relay(j, decided);
        }
        let windows = sc.windows(&frame, 0)?;
        let phase_syms = |i: usize| (0..users).map(|k| frame.phase_symbols(k, i)).collect::<Result<Vec<_>>>();
        for (i, r) in windows.iter().enumerate() {
            let isi = match i {
                0 => CVec::zeros(r.len()),
                _ => isi_from_previous(&sc.effective, &sc.amplitudes, &phase_syms(i - 1)?, chips),
            };
            let compact = compact_synthesis(&sc.effective, &sc.amplitudes, &phase_syms(i)?, &isi);
            worst = worst.max((r - &compact).norm() / r.norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok(outcome("model consistency", worst, 1e-10, start, format!("({instances} instances)")))
}

/// Inverse-covariance recursion against direct inversion of
/// α^n δ⁻¹ I + Σ α^{n−j} r_j r_jᴴ.
pub fn inversion_lemma(dim: usize, updates: usize, forgetting: f64, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let init = 0.01;
    let mut rng = stream(seed, &[]);
    let mut inv = InverseCovariance::new(dim, init, forgetting);
    let mut cov = CMat::from_diagonal_element(dim, dim, C64::new(1.0 / init, 0.0));
    for _ in 0..updates {
        let r = cgauss_vec(dim, &mut rng);
        inv.update(&r);
        cov *= C64::new(forgetting, 0.0);
        cov.gerc(C64::new(1.0, 0.0), &r, &r, C64::new(1.0, 0.0));
    }
    let direct = HermitianSolver::new(&cov)?.inverse();
    let rel = (inv.matrix() - &direct).norm() / direct.norm();
    let identity = (inv.matrix() * &cov - CMat::identity(dim, dim)).norm() / (dim as f64).sqrt();
    Ok(outcome(
        "inversion lemma",
        rel,
        1e-6,
        start,
        format!("(dim {dim}, {updates} updates, identity defect {identity:.1e})"),
    ))
}

/// Runs the power recursion on random inputs spanning many orders of
/// magnitude and checks every emitted allocation against the budget.
pub fn constraint_projection(steps: usize, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = stream(seed, &[]);
    let mut worst = 0.0f64;
    let mut non_finite = 0usize;
    let restart_every = 1000;
    let mut state: Option<RlsPowerAllocator> = None;
    for step in 0..steps {
        if step % restart_every == 0 {
            let dim = rng.random_range(1..=9);
            let budget = 10f64.powf(rng.random_range(-3.0..3.0));
            let forgetting = rng.random_range(0.9..=1.0);
            state = Some(RlsPowerAllocator::new(cgauss_vec(dim, &mut rng), 0.01, forgetting, budget, BudgetScaling::SquaredNorm)?);
        }
        let s = state.as_mut().expect("initialized above");
        let scale = 10f64.powf(rng.random_range(-6.0..6.0));
        let v = cgauss_vec(s.raw().len(), &mut rng) * C64::new(scale, 0.0);
        let b = random_symbol(&mut rng);
        if rng.random_bool(0.5) {
            s.update(b, &v);
        } else {
            s.refine(b, &v);
        }
        let p = s.projected().norm_squared();
        if !p.is_finite() || !s.inverse().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            non_finite += 1;
        }
        worst = worst.max((p - s.budget()).abs() / (f64::EPSILON * s.budget()));
    }
    let mut o = outcome("constraint projection", worst, 8.0, start, format!("({steps} steps, in units of eps·P_G, {non_finite} non-finite states)"));
    o.passed &= non_finite == 0;
    Ok(o)
}

/// Closed-form group allocation against an exhaustive grid over
/// non-negative amplitudes on the budget sphere, with the filter fixed. The
/// closed form solves the real-amplitude quadratic of the MSE (ISI of the
/// previous symbol included) with the multiplier chosen so the budget holds
/// with equality. Instances use G = 2
/// members with one relay, so the allocation has four entries and the grid
/// spans three angles.
pub fn power_optimality(instances: usize, points: usize, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_scaled = f64::NEG_INFINITY;
    for t in 0..instances {
        let sc = Scenario::random(3, 8, 3, 1, 0.1, derive_seed(seed, &[t as u64]))?;
        let amps: Vec<Vec<C64>> = sc.amplitudes.iter().map(|a| a.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        let group = GroupSelection::new(vec![0, 1], 3)?;
        let budget: f64 = sc.amplitudes[..2].iter().flatten().map(|a| a * a).sum();
        let problem = AlternatingProblem {
            effective: &sc.effective,
            amplitudes: amps.clone(),
            group,
            desired: 0,
            chips: sc.cfg.processing_gain,
            noise_var: sc.cfg.noise_var,
            lambda: 0.0,
            budget,
            scaling: BudgetScaling::SquaredNorm,
            correlations: None,
        };
        let init = CVec::from_iterator(4, amps[..2].iter().flatten().copied());
        let w = problem.filter_step(&init)?;
        let physical = |a: &[f64]| CVec::from_iterator(4, a.iter().map(|&x| C64::new(x, 0.0)));
        let (closed, _) = power_allocation_lagrangian(&problem.exact_power_stats(&w).real_part(), budget)?;
        let stats = problem.power_stats(&w);
        let closed_mse = problem.mse(&w, &physical(&closed.amplitudes));
        let scaled = power_allocation_mmse(&stats, DEFAULT_LAMBDA, budget, BudgetScaling::SquaredNorm)?;
        let scaled_mse = problem.mse(&w, &physical(&scaled.amplitudes));
        let mut best = f64::INFINITY;
        let step = std::f64::consts::FRAC_PI_2 / (points - 1) as f64;
        for i in 0..points {
            let t1 = i as f64 * step;
            for j in 0..points {
                let t2 = j as f64 * step;
                for l in 0..points {
                    let t3 = l as f64 * step;
                    let dir = [t1.cos(), t1.sin() * t2.cos(), t1.sin() * t2.sin() * t3.cos(), t1.sin() * t2.sin() * t3.sin()];
                    let a = CVec::from_iterator(4, dir.iter().map(|d| C64::new(d * budget.sqrt(), 0.0)));
                    best = best.min(problem.mse(&w, &a));
                }
            }
        }
        worst = worst.max(closed_mse - best);
        worst_scaled = worst_scaled.max(scaled_mse - best);
    }
    Ok(outcome("power-allocation optimality", worst.max(0.0), 1e-3, start, format!(
            "({instances} instances, {points} points per angle; fixed-weight solve-then-scale rule on the current-symbol statistics: worst {worst_scaled:.3e})"
        )))
}

/// With α = 1 the filter and power recursions against their batch
/// regularized least-squares solutions on the same stationary training data.
pub fn rls_batch(seeds: usize, symbols: usize) -> Result<CheckOutcome> {
    let start = Instant::now();
    let init = 0.01;
    let (mut worst_filter, mut worst_angle) = (0.0f64, 0.0f64);
    for s in 0..seeds {
        let seed = derive_seed(0xB47C, &[s as u64]);
        let sc = Scenario::random(3, 8, 3, 1, 0.05, seed)?;
        let mut frame = SymbolFrame::random(3, symbols, 1, &mut stream(seed, &[4]));
        frame.genie_relays();
        let windows = sc.windows(&frame, seed)?;
        let dim = windows[0].len();

        // Receive filter of user 0.
        let mut inv = InverseCovariance::new(dim, init, 1.0);
        let mut w = CVec::zeros(dim);
        let mut cov = CMat::from_diagonal_element(dim, dim, C64::new(1.0 / init, 0.0));
        let mut cross = CVec::zeros(dim);
        for (i, r) in windows.iter().enumerate() {
            let b = frame.source()[0][i];
            let gain = inv.update(r);
            coop_cdma::adaptive::rls_filter_update(&mut w, b, r, &gain);
            cov.gerc(C64::new(1.0, 0.0), r, r, C64::new(1.0, 0.0));
            cross.axpy(b.conj(), r, C64::new(1.0, 0.0));
        }
        let batch = HermitianSolver::new(&cov)?.solve(&cross);
        worst_filter = worst_filter.max((&w - &batch).norm() / batch.norm());

        // Group power vector of users {0, 1} with that filter held fixed.
        let members: Vec<&EffectiveSignature> = sc.effective[..2].iter().collect();
        let a0 = cgauss_vec(4, &mut stream(seed, &[5]));
        let mut alloc = RlsPowerAllocator::new(a0, init, 1.0, 4.0, BudgetScaling::SquaredNorm)?;
        let start_raw = alloc.raw().clone();
        let mut cov_s = CMat::from_diagonal_element(4, 4, C64::new(1.0 / init, 0.0));
        let mut cross_s = &start_raw / C64::new(init, 0.0);
        for i in 0..symbols {
            let syms: Vec<Vec<C64>> = (0..2).map(|k| frame.phase_symbols(k, i)).collect::<Result<_>>()?;
            let v = group_input(&w, &members, &syms);
            let b = frame.source()[0][i];
            alloc.update(b, &v);
            cov_s.gerc(C64::new(1.0, 0.0), &v, &v, C64::new(1.0, 0.0));
            cross_s.axpy(b, &v, C64::new(1.0, 0.0));
        }
        let batch_s = HermitianSolver::new(&cov_s)?.solve(&cross_s);
        worst_angle = worst_angle.max(subspace_angle(alloc.raw(), &batch_s));
    }
    let mut o = outcome(
        "RLS and batch least squares",
        worst_filter,
        1e-4,
        start,
        format!("(power direction angle {worst_angle:.2e} rad, tolerance 1e-2; {seeds} seeds, {symbols} symbols)"),
    );
    o.passed &= worst_angle <= 1e-2;
    Ok(o)
}

/// The fast suite run by `coopsim selftest`.
pub fn selftest(quick: bool) -> Result<Vec<CheckOutcome>> {
    let scale = |full: usize, q: usize| if quick { q } else { full };
    Ok(vec![
        model_consistency(scale(100, 20), 0x5E1F)?,
        inversion_lemma(60, 200, 0.998, 0x1E44)?,
        constraint_projection(scale(100_000, 10_000), 0xC0A5)?,
        power_optimality(scale(20, 3), scale(50, 30), 0x0971)?,
        rls_batch(scale(20, 5), 500)?,
    ])
}
