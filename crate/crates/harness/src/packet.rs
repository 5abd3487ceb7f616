//! One packet end to end: source phase, relay regeneration, relay phases and
//! destination detection, with bit errors recorded per symbol.

use coop_cdma::adaptive::rals::{ChannelEstimation, ChannelStart, RalsOptions, RalsReceiver, Reference, RelayReference};
use coop_cdma::adaptive::rls::{RlsDetector, DEFAULT_INIT};
use coop_cdma::linalg::{subspace_angle, CVec, HermitianSolver, C64};
use coop_cdma::oracle::{alternate_oracle, combine_member_blocks, received_covariance, AlternatingProblem, BudgetScaling, GroupSelection, SymbolCorrelation, UserSignal, DEFAULT_LAMBDA};
use coop_cdma::rng::{derive_seed, label, stream};
use coop_cdma::signal::qpsk::{bit_errors, qpsk_slice};
use coop_cdma::signal::relay::{relay_decode, RelayInput, RelayReceiverKind};
use coop_cdma::signal::synth::{link_responses, PhaseStream, SymbolFrame};
use coop_cdma::signal::{build_signature_matrix, effective_signature, generate_channels, random_codes, EffectiveSignature, Link, PowerAllocation, SignatureMatrix};
use coop_cdma::{Error, NetworkConfig, Result};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::scheme::{ReceiverKind, Scheme, Variant};

/// Simulation knobs that are not part of the network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    /// Standard deviation of the per-user log-normal power, in dB.
    pub power_spread_db: f64,
    /// Relays forward the source symbols without decoding errors.
    pub genie_relays: bool,
    /// RALS alternations per symbol (1 or 2).
    pub iterations: usize,
    /// Initial scale of the inverse covariance estimates.
    pub inverse_init: f64,
    /// Initial scale of the channel autocorrelation estimates.
    pub channel_init: f64,
    pub channel_start: ChannelStart,
    pub channel_estimation: ChannelEstimation,
    pub track_channels: bool,
    pub relay_reference: RelayReference,
    pub scaling: BudgetScaling,
    /// Regularization of the full-statistics allocation.
    pub lambda: f64,
    /// Alternating sweeps of the full-statistics design.
    pub oracle_iterations: usize,
    /// Full-statistics designs use the measured hop statistics of the
    /// packet (relay decision errors included) instead of assuming
    /// error-free relays.
    pub oracle_relay_errors: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            power_spread_db: 3.0,
            genie_relays: false,
            iterations: 2,
            inverse_init: DEFAULT_INIT,
            channel_init: 1.0,
            channel_start: ChannelStart::FirstTap,
            channel_estimation: ChannelEstimation::LeastSquares,
            track_channels: true,
            relay_reference: RelayReference::PerPhase,
            scaling: BudgetScaling::SquaredNorm,
            lambda: DEFAULT_LAMBDA,
            oracle_iterations: 4,
            oracle_relay_errors: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Group fixed at the end of training (allocating schemes only).
    pub group: Option<Vec<usize>>,
    /// Mean angle between estimated and true stacked channels (RALS only).
    pub channel_angle: Option<f64>,
    /// Destination-side amplitudes at the end of the packet.
    pub final_amplitudes: Vec<Vec<f64>>,
    /// Sum over users of the per-hop powers on the destination links,
    /// averaged over the packet.
    pub mean_power: f64,
    /// Symbol errors made by all relays (zero with genie relays).
    pub relay_symbol_errors: usize,
}

#[derive(Debug, Clone)]
pub struct PacketOutcome {
    pub users: usize,
    pub training_len: usize,
    /// Bit errors summed over users, per symbol index.
    pub bit_errors: Vec<u32>,
    /// Symbol errors summed over users, per symbol index.
    pub symbol_errors: Vec<u32>,
    pub diagnostics: Diagnostics,
}

impl PacketOutcome {
    /// Counts over the symbols `from..` (clamped to the packet).
    pub fn tally_from(&self, from: usize) -> Tally {
        let from = from.min(self.bit_errors.len());
        let n = (self.bit_errors.len() - from) as u64;
        Tally {
            bit_errors: self.bit_errors[from..].iter().map(|&e| e as u64).sum(),
            bits: 2 * n * self.users as u64,
            symbol_errors: self.symbol_errors[from..].iter().map(|&e| e as u64).sum(),
            symbols: n * self.users as u64,
        }
    }

    /// Counts after the training window.
    pub fn tally(&self) -> Tally {
        self.tally_from(self.training_len)
    }
}

/// Error counts over some symbol range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub bit_errors: u64,
    pub bits: u64,
    pub symbol_errors: u64,
    pub symbols: u64,
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, o: Self) {
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.symbol_errors += o.symbol_errors;
        self.symbols += o.symbols;
    }
}

enum Destination {
    Fixed(Vec<CVec>),
    Rls(RlsDetector),
    Rals(Box<RalsReceiver>),
}

const RELAY_NOISE: u64 = 100;
const RELAY_DEST_NOISE: u64 = 200;

/// The network actually used by a scheme (NCIS drops the relays).
pub fn scheme_network(cfg: &NetworkConfig, scheme: &Scheme) -> NetworkConfig {
    let mut cfg = cfg.clone();
    if scheme.variant == Variant::Ncis {
        cfg.relays = 0;
    }
    if let Some(g) = scheme.group_size {
        cfg.group_size = g;
    }
    cfg.group_size = cfg.group_size.min(cfg.users);
    cfg.group_power = cfg.nominal_group_power();
    cfg
}

/// Per-user per-hop powers P_{A,k}: log-normal around the nominal power.
pub fn user_powers(cfg: &NetworkConfig, spread_db: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, &[label::POWERS]);
    (0..cfg.users)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            cfg.user_power * 10f64.powf(spread_db * z / 10.0)
        })
        .collect()
}

pub fn run_packet(cfg: &NetworkConfig, scheme: &Scheme, settings: &SimSettings, seed: u64) -> Result<PacketOutcome> {
    let cfg = scheme_network(cfg, scheme);
    cfg.validate()?;
    let (k_users, n, np) = (cfg.users, cfg.processing_gain, cfg.phases());
    let codes = random_codes(k_users, n, &mut stream(seed, &[label::CODES]))?;
    let sigs: Vec<SignatureMatrix> = codes
        .iter()
        .map(|c| build_signature_matrix(c.chips(), cfg.paths))
        .collect::<Result<_>>()?;
    let channels = generate_channels(&cfg, derive_seed(seed, &[label::CHANNELS]));
    let powers = user_powers(&cfg, settings.power_spread_db, seed);
    let mut frame = SymbolFrame::random(k_users, cfg.packet_len, cfg.relays, &mut stream(seed, &[label::SYMBOLS]));
    let n_tr = cfg.training_len;

    let relay_kind = match scheme.receiver {
        ReceiverKind::OracleMmse => RelayReceiverKind::OracleMmse,
        ReceiverKind::AdaptiveRls => RelayReceiverKind::AdaptiveRls,
    };
    let source_amps: Vec<f64> = powers.iter().map(|p| p.sqrt()).collect();
    let mut diagnostics = Diagnostics::default();
    if settings.genie_relays {
        frame.genie_relays();
    } else {
        for j in 0..cfg.relays {
            let link = Link::SourceRelay(j);
            let responses = link_responses(&sigs, &channels, link);
            let effective: Vec<EffectiveSignature> = responses.iter().map(|f| EffectiveSignature::from_blocks(vec![f.clone()])).collect();
            let mut ps = PhaseStream::new(responses, n, cfg.noise_var, stream(seed, &[label::NOISE, RELAY_NOISE + j as u64]));
            let mut current = vec![C64::new(0.0, 0.0); k_users];
            let windows: Vec<CVec> = (0..cfg.packet_len)
                .map(|i| {
                    for (c, s) in current.iter_mut().zip(frame.source()) {
                        *c = s[i];
                    }
                    ps.next(&source_amps, &current)
                })
                .collect();
            let decoded = relay_decode(
                relay_kind,
                &RelayInput {
                    windows: &windows,
                    effective: &effective,
                    amplitudes: &source_amps,
                    chips: n,
                    noise_var: cfg.noise_var,
                    training: frame.source(),
                    training_len: n_tr,
                    forgetting: cfg.forgetting,
                },
            )?;
            diagnostics.relay_symbol_errors += decoded
                .iter()
                .zip(frame.source())
                .map(|(d, s)| d.iter().zip(s).filter(|(a, b)| a != b).count())
                .sum::<usize>();
            frame.set_relay(j, decoded);
        }
    }

    let links: Vec<Link> = channels.destination_links().collect();
    let mut streams: Vec<PhaseStream> = links
        .iter()
        .map(|&link| {
            let tag = match link {
                Link::SourceDest => 0,
                Link::RelayDest(j) => RELAY_DEST_NOISE + j as u64,
                Link::SourceRelay(j) => RELAY_NOISE + j as u64,
            };
            PhaseStream::new(link_responses(&sigs, &channels, link), n, cfg.noise_var, stream(seed, &[label::NOISE, tag]))
        })
        .collect();
    let true_effective: Vec<EffectiveSignature> = (0..k_users)
        .map(|k| effective_signature(&sigs[k], &channels.stacked(k)))
        .collect::<Result<_>>()?;

    let correlations: Option<Vec<SymbolCorrelation>> = settings.oracle_relay_errors.then(|| hop_statistics(&frame, n_tr)).transpose()?;
    let correlations = correlations.as_deref();
    let mut amps = PowerAllocation::equal(&powers, np);
    let mut dest = match (scheme.variant, scheme.receiver) {
        (Variant::JpaisGbcRals, _) => {
            let opts = RalsOptions {
                forgetting: cfg.forgetting,
                init: settings.inverse_init,
                channel_init: settings.channel_init,
                channel_start: settings.channel_start,
                channel_estimation: settings.channel_estimation,
                track_channels: settings.track_channels,
                iterations: settings.iterations,
                allocate_power: true,
                group_size: cfg.group_size,
                scaling: settings.scaling,
                relay_reference: settings.relay_reference,
            };
            Destination::Rals(Box::new(RalsReceiver::new(sigs.clone(), np, opts)?))
        }
        (Variant::JpaisMmse, _) => {
            amps = full_statistics_allocation(&cfg, &true_effective, &amps, settings, correlations)?;
            Destination::Fixed(mmse_filters(&true_effective, &amps, n, cfg.noise_var, correlations)?)
        }
        (_, ReceiverKind::OracleMmse) => Destination::Fixed(mmse_filters(&true_effective, &amps, n, cfg.noise_var, correlations)?),
        (_, ReceiverKind::AdaptiveRls) => Destination::Rls(RlsDetector::new(cfg.stacked_len(), k_users, settings.inverse_init, cfg.forgetting)),
    };

    let mut bit_err = vec![0u32; cfg.packet_len];
    let mut sym_err = vec![0u32; cfg.packet_len];
    let mut window_syms = vec![C64::new(0.0, 0.0); k_users];
    let mut training = vec![C64::new(0.0, 0.0); k_users];
    let mut power_acc = 0.0;
    let select_at = n_tr.max(1) - 1;
    for i in 0..cfg.packet_len {
        let mut blocks = Vec::with_capacity(np);
        for (j, (link, ps)) in links.iter().zip(streams.iter_mut()).enumerate() {
            let sent = frame.transmitted(*link)?;
            for (w, s) in window_syms.iter_mut().zip(sent) {
                *w = s[i];
            }
            blocks.push(ps.next(&amps.phase(j), &window_syms));
        }
        let r = stack(&blocks);
        power_acc += amps.total_power();
        for (t, s) in training.iter_mut().zip(frame.source()) {
            *t = s[i];
        }
        let in_training = i < n_tr;
        let decisions: Vec<C64> = match &mut dest {
            Destination::Fixed(ws) => ws.iter().map(|w| qpsk_slice(w.dotc(&r))).collect(),
            Destination::Rls(det) => det.step(&r, in_training.then_some(training.as_slice())),
            Destination::Rals(rx) => {
                let reference = if in_training { Reference::Training(&training) } else { Reference::Decision };
                let out = rx.step(&r, &amps, reference)?;
                if i == select_at {
                    rx.select_group(&amps)?;
                } else if i > select_at {
                    if let (Some(g), Some(a)) = (rx.group().map(|g| g.indices().to_vec()), rx.group_amplitudes()) {
                        amps.set_group_vector(&g, &a?);
                    }
                }
                out.decisions
            }
        };
        for (d, s) in decisions.iter().zip(&training) {
            let e = bit_errors(*s, *d);
            bit_err[i] += e;
            sym_err[i] += u32::from(e > 0);
        }
    }
    if !power_acc.is_finite() {
        return Err(Error::DegenerateAllocation);
    }

    if let Destination::Rals(rx) = &dest {
        diagnostics.group = rx.group().map(|g| g.indices().to_vec());
        let angle: f64 = rx
            .channel_estimates()
            .enumerate()
            .map(|(k, h)| subspace_angle(h, &channels.stacked(k)))
            .sum();
        diagnostics.channel_angle = Some(angle / k_users as f64);
    }
    diagnostics.final_amplitudes = (0..k_users).map(|k| amps.user(k).to_vec()).collect();
    diagnostics.mean_power = power_acc / cfg.packet_len as f64;
    Ok(PacketOutcome {
        users: k_users,
        training_len: n_tr,
        bit_errors: bit_err,
        symbol_errors: sym_err,
        diagnostics,
    })
}

fn stack(blocks: &[CVec]) -> CVec {
    let len = blocks.iter().map(|b| b.len()).sum();
    let mut r = CVec::zeros(len);
    let mut at = 0;
    for b in blocks {
        r.rows_mut(at, b.len()).copy_from(b);
        at += b.len();
    }
    r
}

/// Hop statistics of every user over the symbols after training.
pub fn hop_statistics(frame: &SymbolFrame, from: usize) -> Result<Vec<SymbolCorrelation>> {
    let from = from.min(frame.len().saturating_sub(1));
    (0..frame.users())
        .map(|k| {
            let source = &frame.source()[k][from..];
            let mut hops: Vec<&[C64]> = vec![source];
            for j in 0..frame.relays() {
                hops.push(&frame.relay(j)?[k][from..]);
            }
            Ok(SymbolCorrelation::from_symbols(source, &hops))
        })
        .collect()
}

/// w_k = R⁻¹ E[r b_k*] for every user under the given amplitudes.
pub fn mmse_filters(effective: &[EffectiveSignature], amps: &PowerAllocation, chips: usize, noise_var: f64, correlations: Option<&[SymbolCorrelation]>) -> Result<Vec<CVec>> {
    let signals: Vec<UserSignal> = effective
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let s = UserSignal::real(e, amps.user(k), chips);
            match correlations {
                Some(c) => s.with_correlation(c[k].clone()),
                None => s,
            }
        })
        .collect();
    let solver = HermitianSolver::new(&received_covariance(&signals, noise_var))?;
    Ok(signals.iter().map(|s| solver.solve(&s.cross_correlation())).collect())
}

/// Every user solves the alternating design for its own detection with the
/// whole network as the group; member k then keeps its own amplitudes and
/// the result is rescaled to the total budget.
pub fn full_statistics_allocation(
    cfg: &NetworkConfig,
    effective: &[EffectiveSignature],
    amps: &PowerAllocation,
    settings: &SimSettings,
    correlations: Option<&[SymbolCorrelation]>,
) -> Result<PowerAllocation> {
    let k_users = cfg.users;
    let np = cfg.phases();
    let group = GroupSelection::all(k_users);
    let budget = amps.total_power();
    let complex: Vec<Vec<C64>> = (0..k_users)
        .map(|k| amps.user(k).iter().map(|&a| C64::new(a, 0.0)).collect())
        .collect();
    let init = CVec::from_iterator(k_users * np, amps.group_vector(group.indices()).into_iter().map(|a| C64::new(a, 0.0)));
    let mut members = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let problem = AlternatingProblem {
            effective,
            amplitudes: complex.clone(),
            group: group.clone(),
            desired: k,
            chips: cfg.processing_gain,
            noise_var: cfg.noise_var,
            lambda: settings.lambda,
            budget,
            scaling: settings.scaling,
            correlations,
        };
        members.push(alternate_oracle(&problem, None, init.clone(), settings.oracle_iterations.max(1))?.amplitudes);
    }
    let powers: Vec<f64> = (0..k_users).map(|k| amps.user_power(k)).collect();
    let stacked = combine_member_blocks(&members, np, &powers)?;
    let mut out = amps.clone();
    out.set_group_vector(group.indices(), &stacked);
    Ok(out)
}
