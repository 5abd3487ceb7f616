//! Chip-level synthesis of the received windows.
//!
//! Each link is simulated as a continuous chip stream: the symbol is spread,
//! convolved with the L-tap channel and observed through an M = N + L − 1
//! chip window. The window of symbol i holds the complete response of symbol
//! i plus the multipath tail of symbol i − 1 (the ISI term η), plus white
//! complex Gaussian noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{CVec, C64, ZERO};
use crate::rng::SimRng;
use crate::signal::channel::{ChannelState, Link};
use crate::signal::qpsk::random_symbol;
use crate::signal::signature::{EffectiveSignature, SignatureMatrix};

/// Phases are identified by the link they travel over.
pub type Phase = Link;

/// Source symbols plus the symbols each relay regenerated.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    /// `[user][symbol]`
    source: Vec<Vec<C64>>,
    /// `[relay]` → `[user][symbol]`, `None` until the relay decoded.
    relays: Vec<Option<Vec<Vec<C64>>>>,
}

impl SymbolFrame {
    pub fn new(source: Vec<Vec<C64>>, relays: usize) -> Self {
        Self {
            source,
            relays: vec![None; relays],
        }
    }

    pub fn random<R: Rng + ?Sized>(users: usize, len: usize, relays: usize, rng: &mut R) -> Self {
        let source = (0..users)
            .map(|_| (0..len).map(|_| random_symbol(rng)).collect())
            .collect();
        Self::new(source, relays)
    }

    pub fn users(&self) -> usize {
        self.source.len()
    }

    pub fn len(&self) -> usize {
        self.source.first().map_or(0, |s| s.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn relays(&self) -> usize {
        self.relays.len()
    }

    pub fn source(&self) -> &[Vec<C64>] {
        &self.source
    }

    pub fn set_relay(&mut self, relay: usize, decided: Vec<Vec<C64>>) {
        self.relays[relay] = Some(decided);
    }

    /// Marks every relay as having decoded perfectly.
    pub fn genie_relays(&mut self) {
        for r in self.relays.iter_mut() {
            *r = Some(self.source.clone());
        }
    }

    pub fn relay(&self, relay: usize) -> Result<&[Vec<C64>]> {
        self.relays
            .get(relay)
            .and_then(|r| r.as_deref())
            .ok_or(Error::RelayNotDecoded(relay))
    }

    /// Symbols transmitted over a link.
    pub fn transmitted(&self, link: Link) -> Result<&[Vec<C64>]> {
        match link {
            Link::SourceDest | Link::SourceRelay(_) => Ok(&self.source),
            Link::RelayDest(j) => self.relay(j),
        }
    }

    /// Symbols of user k at symbol i on each destination phase (B_k diagonal).
    pub fn phase_symbols(&self, user: usize, i: usize) -> Result<Vec<C64>> {
        let mut out = vec![self.source[user][i]];
        for j in 0..self.relays() {
            out.push(self.relay(j)?[user][i]);
        }
        Ok(out)
    }
}

/// One received window split into its components.
#[derive(Debug, Clone)]
pub struct WindowParts {
    pub signal: CVec,
    pub isi: CVec,
    pub noise: CVec,
}

impl WindowParts {
    pub fn total(&self) -> CVec {
        &self.signal + &self.isi + &self.noise
    }
}

/// Streaming synthesizer for one link as seen by one receiver.
#[derive(Debug, Clone)]
pub struct PhaseStream {
    responses: Vec<CVec>,
    chips: usize,
    tail: CVec,
    noise_std: f64,
    rng: SimRng,
}

/// Per-user responses C_k h_{k,link}.
pub fn link_responses(sigs: &[SignatureMatrix], channels: &ChannelState, link: Link) -> Vec<CVec> {
    sigs.iter()
        .enumerate()
        .map(|(k, s)| s.apply(channels.link(k, link).as_slice()))
        .collect()
}

impl PhaseStream {
    /// `responses[k]` is the M-chip response of user k on this link.
    pub fn new(responses: Vec<CVec>, chips: usize, noise_var: f64, rng: SimRng) -> Self {
        let m = responses.first().map_or(chips, |r| r.len());
        Self {
            responses,
            chips,
            tail: CVec::zeros(m),
            noise_std: (noise_var / 2.0).sqrt(),
            rng,
        }
    }

    pub fn window_len(&self) -> usize {
        self.tail.len()
    }

    pub fn responses(&self) -> &[CVec] {
        &self.responses
    }

    /// Emits the window of the next symbol given every user's amplitude and
    /// symbol for it.
    pub fn next_parts(&mut self, amplitudes: &[f64], symbols: &[C64]) -> WindowParts {
        let m = self.window_len();
        let mut signal = CVec::zeros(m);
        for ((f, &a), &b) in self.responses.iter().zip(amplitudes).zip(symbols) {
            if a != 0.0 {
                signal.axpy(b * a, f, ONE_C);
            }
        }
        let mut next_tail = CVec::zeros(m);
        let spill = m - self.chips;
        next_tail.rows_mut(0, spill).copy_from(&signal.rows(self.chips, spill));
        let isi = std::mem::replace(&mut self.tail, next_tail);
        let noise = if self.noise_std > 0.0 {
            let (std, rng) = (self.noise_std, &mut self.rng);
            CVec::from_fn(m, |_, _| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re * std, im * std)
            })
        } else {
            CVec::zeros(m)
        };
        WindowParts { signal, isi, noise }
    }

    pub fn next(&mut self, amplitudes: &[f64], symbols: &[C64]) -> CVec {
        self.next_parts(amplitudes, symbols).total()
    }
}

const ONE_C: C64 = C64 { re: 1.0, im: 0.0 };

/// Synthesizes one link for a whole packet with fixed amplitudes
/// (`amplitudes[k]` per user). Relay-to-destination links require the relay
/// to have decoded first.
pub fn synthesize_phase(
    sigs: &[SignatureMatrix],
    channels: &ChannelState,
    link: Link,
    amplitudes: &[f64],
    frame: &SymbolFrame,
    noise_var: f64,
    rng: SimRng,
) -> Result<Vec<CVec>> {
    let symbols = frame.transmitted(link)?;
    if amplitudes.len() != sigs.len() || symbols.len() != sigs.len() {
        return Err(Error::dim("synthesize_phase users", sigs.len(), amplitudes.len().min(symbols.len())));
    }
    let chips = sigs.first().map_or(0, |s| s.chips());
    let mut stream = PhaseStream::new(link_responses(sigs, channels, link), chips, noise_var, rng);
    let mut current = vec![ZERO; sigs.len()];
    Ok((0..frame.len())
        .map(|i| {
            for (c, s) in current.iter_mut().zip(symbols) {
                *c = s[i];
            }
            stream.next(amplitudes, &current)
        })
        .collect())
}

/// Concatenates the destination phases (sd, r1d, …) into r[i].
pub fn stack_received(phases: &[Option<&CVec>]) -> Result<CVec> {
    let mut len = 0;
    for (j, p) in phases.iter().enumerate() {
        len += p.ok_or(Error::MissingPhase(j))?.len();
    }
    let mut out = CVec::zeros(len);
    let mut at = 0;
    for p in phases.iter().flatten() {
        out.rows_mut(at, p.len()).copy_from(p);
        at += p.len();
    }
    Ok(out)
}

/// Compact form Σ_k P_k B_k a_k + η using the explicit (n_p M)×n_p matrices
/// P_k. `symbols[k]` holds the diagonal of B_k.
pub fn compact_synthesis(effective: &[EffectiveSignature], amplitudes: &[Vec<f64>], symbols: &[Vec<C64>], isi: &CVec) -> CVec {
    let mut r = isi.clone();
    for ((eff, a), b) in effective.iter().zip(amplitudes).zip(symbols) {
        let ba = CVec::from_iterator(a.len(), a.iter().zip(b).map(|(&a, &b)| b * a));
        r += eff.phase_matrix() * ba;
    }
    r
}

/// η[i] from the previous symbol: each phase block of Σ_k P_k B_k[i−1] a_k[i−1]
/// shifted up by N chips.
pub fn isi_from_previous(effective: &[EffectiveSignature], amplitudes: &[Vec<f64>], symbols: &[Vec<C64>], chips: usize) -> CVec {
    let prev = compact_synthesis(effective, amplitudes, symbols, &CVec::zeros(stacked_len(effective)));
    let m = effective.first().map_or(0, |e| e.block(0).len());
    let mut out = CVec::zeros(prev.len());
    for p in 0..prev.len() / m.max(1) {
        for row in 0..m - chips {
            out[p * m + row] = prev[p * m + chips + row];
        }
    }
    out
}

fn stacked_len(effective: &[EffectiveSignature]) -> usize {
    effective
        .first()
        .map_or(0, |e| e.phases() * e.block(0).len())
}
