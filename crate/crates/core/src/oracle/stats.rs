//! Second-order statistics of the received window under the model with
//! i.i.d. unit-power symbols and correctly regenerated relay symbols.

use crate::linalg::{add_outer, CMat, CVec, C64, ONE};
use crate::signal::signature::EffectiveSignature;

/// One user's deterministic contribution to a window: the stacked signature
/// of the current symbol (P_k a_k) and the ISI signature of the previous one.
#[derive(Debug, Clone)]
pub struct UserSignal {
    pub current: CVec,
    pub previous: CVec,
    phases: usize,
    correlation: Option<SymbolCorrelation>,
}

/// Second-order statistics of the symbols a user's hops carry when the
/// relays may forward wrong decisions: Γ[j, j'] = E[b̃_j b̃_j'*] and
/// ρ_j = E[b̃_j b*] with b the source symbol (hop 0 is the source itself).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolCorrelation {
    pub gamma: CMat,
    pub rho: CVec,
}

impl SymbolCorrelation {
    /// Every hop carries the source symbol.
    pub fn ideal(phases: usize) -> Self {
        Self {
            gamma: CMat::from_element(phases, phases, ONE),
            rho: CVec::from_element(phases, ONE),
        }
    }

    /// Sample averages over the given symbols. `hops[0]` is normally the
    /// source sequence itself.
    pub fn from_symbols(source: &[C64], hops: &[&[C64]]) -> Self {
        let np = hops.len();
        let n = source.len().max(1) as f64;
        let mut gamma = CMat::zeros(np, np);
        let mut rho = CVec::zeros(np);
        for (i, b) in source.iter().enumerate() {
            for j in 0..np {
                rho[j] += hops[j][i] * b.conj();
                for jj in 0..np {
                    gamma[(j, jj)] += hops[j][i] * hops[jj][i].conj();
                }
            }
        }
        Self {
            gamma: gamma / C64::new(n, 0.0),
            rho: rho / C64::new(n, 0.0),
        }
    }
}

impl UserSignal {
    /// Builds both signatures from the per-phase effective signature and
    /// complex per-phase amplitudes (real amplitudes are the common case).
    pub fn new(eff: &EffectiveSignature, amplitudes: &[C64], chips: usize) -> Self {
        let m = eff.block(0).len();
        let np = eff.phases();
        let mut current = CVec::zeros(np * m);
        let mut previous = CVec::zeros(np * m);
        for (p, (block, &a)) in eff.blocks().iter().zip(amplitudes).enumerate() {
            for row in 0..m {
                current[p * m + row] = block[row] * a;
            }
            for row in 0..m - chips {
                previous[p * m + row] = block[chips + row] * a;
            }
        }
        Self {
            current,
            previous,
            phases: np,
            correlation: None,
        }
    }

    /// Replaces the error-free symbol model with measured hop statistics.
    pub fn with_correlation(mut self, correlation: SymbolCorrelation) -> Self {
        self.correlation = Some(correlation);
        self
    }

    pub fn correlation(&self) -> Option<&SymbolCorrelation> {
        self.correlation.as_ref()
    }

    /// E[r b*] contributed by this user: P_k A_k ρ_k.
    pub fn cross_correlation(&self) -> CVec {
        match &self.correlation {
            None => self.current.clone(),
            Some(c) => {
                let m = self.current.len() / self.phases;
                let mut out = self.current.clone();
                for j in 0..self.phases {
                    let scaled = out.rows(j * m, m) * c.rho[j];
                    out.rows_mut(j * m, m).copy_from(&scaled);
                }
                out
            }
        }
    }

    fn add_to(&self, r: &mut CMat, v: &CVec) {
        match &self.correlation {
            None => add_outer(r, ONE, v, v),
            Some(c) => {
                let m = v.len() / self.phases;
                for j in 0..self.phases {
                    for jj in 0..self.phases {
                        let g = c.gamma[(j, jj)];
                        if g == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let block = v.rows(j * m, m) * v.rows(jj * m, m).adjoint() * g;
                        let mut view = r.view_mut((j * m, jj * m), (m, m));
                        view += block;
                    }
                }
            }
        }
    }

    pub fn real(eff: &EffectiveSignature, amplitudes: &[f64], chips: usize) -> Self {
        let a: Vec<C64> = amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(eff, &a, chips)
    }
}

/// R = Σ_k (s_k s_kᴴ + η_k η_kᴴ) + σ² I, with the hop blocks of each outer
/// product weighted by Γ_k when a user carries measured hop statistics.
pub fn received_covariance(users: &[UserSignal], noise_var: f64) -> CMat {
    let n = users.first().map_or(0, |u| u.current.len());
    let mut r = CMat::from_diagonal_element(n, n, C64::new(noise_var, 0.0));
    for u in users {
        u.add_to(&mut r, &u.current);
        u.add_to(&mut r, &u.previous);
    }
    r
}

/// P_η = Σ_k η_k η_kᴴ.
pub fn isi_covariance(users: &[UserSignal]) -> CMat {
    let n = users.first().map_or(0, |u| u.current.len());
    let mut r = CMat::zeros(n, n);
    for u in users {
        u.add_to(&mut r, &u.previous);
    }
    r
}
