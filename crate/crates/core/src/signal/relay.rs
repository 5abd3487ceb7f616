//! Decode-and-forward regeneration at a relay.

use crate::adaptive::rls::{RlsDetector, DEFAULT_INIT};
use crate::error::{Error, Result};
use crate::linalg::{CVec, HermitianSolver, C64};
use crate::oracle::stats::{received_covariance, UserSignal};
use crate::signal::qpsk::qpsk_slice;
use crate::signal::signature::EffectiveSignature;

/// Linear detector used at a relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayReceiverKind {
    /// Matched filter to the known effective signature.
    Rake,
    /// Full-statistics linear MMSE.
    OracleMmse,
    /// RLS trained on the preamble, decision-directed afterwards.
    AdaptiveRls,
}

/// What a relay knows when it decodes one packet of source-phase windows.
#[derive(Debug, Clone)]
pub struct RelayInput<'a> {
    pub windows: &'a [CVec],
    /// Single-phase effective signatures of the source→relay link per user.
    pub effective: &'a [EffectiveSignature],
    pub amplitudes: &'a [f64],
    pub chips: usize,
    pub noise_var: f64,
    /// Source symbols; only the first `training_len` are used.
    pub training: &'a [Vec<C64>],
    pub training_len: usize,
    pub forgetting: f64,
}

/// Returns the regenerated symbols `[user][i]`. Preamble symbols are known
/// to the relay and forwarded unchanged.
pub fn relay_decode(kind: RelayReceiverKind, input: &RelayInput<'_>) -> Result<Vec<Vec<C64>>> {
    let users = input.effective.len();
    let len = input.windows.len();
    if input.amplitudes.len() != users || input.training.len() != users {
        return Err(Error::dim("relay_decode users", users, input.amplitudes.len().min(input.training.len())));
    }
    let n_tr = input.training_len.min(len);
    if input.training.iter().any(|t| t.len() < n_tr) {
        return Err(Error::Config("training symbols shorter than the preamble".into()));
    }
    let mut out = vec![Vec::with_capacity(len); users];
    match kind {
        RelayReceiverKind::Rake | RelayReceiverKind::OracleMmse => {
            let filters = fixed_filters(kind, input)?;
            for (i, r) in input.windows.iter().enumerate() {
                for (k, w) in filters.iter().enumerate() {
                    let b = if i < n_tr { input.training[k][i] } else { qpsk_slice(w.dotc(r)) };
                    out[k].push(b);
                }
            }
        }
        RelayReceiverKind::AdaptiveRls => {
            let dim = input.windows.first().map_or(0, |r| r.len());
            let mut det = RlsDetector::new(dim, users, DEFAULT_INIT, input.forgetting);
            let mut known = vec![C64::new(0.0, 0.0); users];
            for (i, r) in input.windows.iter().enumerate() {
                if i < n_tr {
                    for (k, b) in known.iter_mut().enumerate() {
                        *b = input.training[k][i];
                    }
                    det.step(r, Some(&known));
                    for (k, b) in known.iter().enumerate() {
                        out[k].push(*b);
                    }
                } else {
                    for (k, b) in det.step(r, None).into_iter().enumerate() {
                        out[k].push(b);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn fixed_filters(kind: RelayReceiverKind, input: &RelayInput<'_>) -> Result<Vec<CVec>> {
    let signals: Vec<UserSignal> = input
        .effective
        .iter()
        .zip(input.amplitudes)
        .map(|(e, &a)| UserSignal::real(e, &[a], input.chips))
        .collect();
    match kind {
        RelayReceiverKind::Rake => Ok(signals.into_iter().map(|s| s.current).collect()),
        _ => {
            let solver = HermitianSolver::new(&received_covariance(&signals, input.noise_var))?;
            Ok(signals.iter().map(|s| solver.solve(&s.current)).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NetworkConfig;
    use crate::rng::stream;
    use crate::signal::channel::{generate_channels, Link};
    use crate::signal::codes::random_codes;
    use crate::signal::signature::build_signature_matrix;
    use crate::signal::synth::{link_responses, PhaseStream, SymbolFrame};

    fn symbol_errors(kind: RelayReceiverKind, users: usize, noise_var: f64, seed: u64) -> usize {
        let cfg = NetworkConfig {
            users,
            ..NetworkConfig::default()
        };
        let mut rng = stream(seed, &[1]);
        let codes = random_codes(users, cfg.processing_gain, &mut rng).unwrap();
        let sigs: Vec<_> = codes.iter().map(|c| build_signature_matrix(c.chips(), cfg.paths).unwrap()).collect();
        let ch = generate_channels(&cfg, seed);
        let link = Link::SourceRelay(0);
        let responses = link_responses(&sigs, &ch, link);
        let effective: Vec<_> = responses.iter().map(|f| EffectiveSignature::from_blocks(vec![f.clone()])).collect();
        let frame = SymbolFrame::random(users, 600, 0, &mut rng);
        let amps = vec![1.0; users];
        let mut ps = PhaseStream::new(responses, cfg.processing_gain, noise_var, stream(seed, &[2]));
        let windows: Vec<CVec> = (0..frame.len())
            .map(|i| {
                let syms: Vec<C64> = (0..users).map(|k| frame.source()[k][i]).collect();
                ps.next(&amps, &syms)
            })
            .collect();
        let input = RelayInput {
            windows: &windows,
            effective: &effective,
            amplitudes: &amps,
            chips: cfg.processing_gain,
            noise_var,
            training: frame.source(),
            training_len: 200,
            forgetting: 0.998,
        };
        let out = relay_decode(kind, &input).unwrap();
        (0..users)
            .map(|k| out[k].iter().zip(&frame.source()[k]).filter(|(a, b)| a != b).count())
            .sum()
    }

    #[test]
    fn noise_free_single_user_is_exact() {
        for kind in [RelayReceiverKind::Rake, RelayReceiverKind::OracleMmse, RelayReceiverKind::AdaptiveRls] {
            assert_eq!(symbol_errors(kind, 1, 0.0, 3), 0, "{kind:?}");
        }
    }

    #[test]
    fn mmse_beats_rake_under_mai() {
        let sigma2 = 10f64.powf(-1.2);
        let (mut rake, mut mmse) = (0, 0);
        for seed in 0..4 {
            rake += symbol_errors(RelayReceiverKind::Rake, 6, sigma2, seed);
            mmse += symbol_errors(RelayReceiverKind::OracleMmse, 6, sigma2, seed);
        }
        assert!(mmse <= rake, "mmse {mmse} rake {rake}");
    }
}
