use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64, ZERO};

/// The M×L convolution matrix C_k of one user: column j holds the code
/// shifted down by j chips.
#[derive(Debug, Clone)]
pub struct SignatureMatrix {
    code: Vec<f64>,
    paths: usize,
    matrix: CMat,
}

pub fn build_signature_matrix(code: &[f64], paths: usize) -> Result<SignatureMatrix> {
    if code.is_empty() {
        return Err(Error::Config("spreading code is empty".into()));
    }
    if paths == 0 {
        return Err(Error::Config("path count must be at least 1".into()));
    }
    if code.iter().any(|c| *c == 0.0 || !c.is_finite()) {
        return Err(Error::Config("spreading code has zero or non-finite chips".into()));
    }
    let n = code.len();
    let m = n + paths - 1;
    let matrix = CMat::from_fn(m, paths, |r, c| {
        if r >= c && r - c < n {
            C64::new(code[r - c], 0.0)
        } else {
            ZERO
        }
    });
    Ok(SignatureMatrix {
        code: code.to_vec(),
        paths,
        matrix,
    })
}

impl SignatureMatrix {
    pub fn code(&self) -> &[f64] {
        &self.code
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn chips(&self) -> usize {
        self.code.len()
    }

    pub fn window_len(&self) -> usize {
        self.code.len() + self.paths - 1
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Block-diagonal (n_p M)×(n_p L) form with one copy of C_k per phase.
    pub fn stacked(&self, phases: usize) -> CMat {
        let (m, l) = (self.window_len(), self.paths);
        let mut out = CMat::zeros(phases * m, phases * l);
        for p in 0..phases {
            out.view_mut((p * m, p * l), (m, l)).copy_from(&self.matrix);
        }
        out
    }

    /// C_k h for one L-tap link, computed as a direct convolution.
    pub fn apply(&self, taps: &[C64]) -> CVec {
        debug_assert_eq!(taps.len(), self.paths);
        let mut out = CVec::zeros(self.window_len());
        for (l, &h) in taps.iter().enumerate() {
            for (n, &c) in self.code.iter().enumerate() {
                out[n + l] += h * c;
            }
        }
        out
    }

    /// C_kᴴ y for one M-chip block.
    pub fn apply_adjoint(&self, y: &[C64]) -> CVec {
        debug_assert_eq!(y.len(), self.window_len());
        CVec::from_fn(self.paths, |l, _| {
            self.code
                .iter()
                .enumerate()
                .map(|(n, &c)| y[n + l] * c)
                .sum()
        })
    }
}

/// The effective signature p_k = C̃_k h_k, kept per phase.
#[derive(Debug, Clone)]
pub struct EffectiveSignature {
    blocks: Vec<CVec>,
}

impl EffectiveSignature {
    pub fn from_blocks(blocks: Vec<CVec>) -> Self {
        Self { blocks }
    }

    pub fn phases(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, phase: usize) -> &CVec {
        &self.blocks[phase]
    }

    pub fn blocks(&self) -> &[CVec] {
        &self.blocks
    }

    /// The stacked (n_p M) vector p_k.
    pub fn stacked(&self) -> CVec {
        let m = self.blocks.first().map_or(0, |b| b.len());
        let mut out = CVec::zeros(m * self.blocks.len());
        for (p, b) in self.blocks.iter().enumerate() {
            out.rows_mut(p * m, m).copy_from(b);
        }
        out
    }

    /// The (n_p M)×n_p matrix P_k holding block j of p_k in column j.
    pub fn phase_matrix(&self) -> CMat {
        let m = self.blocks.first().map_or(0, |b| b.len());
        let np = self.blocks.len();
        let mut out = CMat::zeros(np * m, np);
        for (p, b) in self.blocks.iter().enumerate() {
            out.view_mut((p * m, p), (m, 1)).copy_from(b);
        }
        out
    }

    /// Σ_j a_j · block_j placed in its phase rows (i.e. P_k a for real a).
    pub fn weighted(&self, amplitudes: &[f64]) -> CVec {
        let m = self.blocks.first().map_or(0, |b| b.len());
        let mut out = CVec::zeros(m * self.blocks.len());
        for (p, (b, &a)) in self.blocks.iter().zip(amplitudes).enumerate() {
            out.rows_mut(p * m, m).axpy(C64::new(a, 0.0), b, ZERO);
        }
        out
    }
}

/// p_k from the signature and the stacked (n_p L) channel of user k.
pub fn effective_signature(sig: &SignatureMatrix, stacked_channel: &CVec) -> Result<EffectiveSignature> {
    let l = sig.paths();
    if !stacked_channel.len().is_multiple_of(l) || stacked_channel.is_empty() {
        return Err(Error::dim("effective signature", l, stacked_channel.len()));
    }
    let blocks = stacked_channel
        .as_slice()
        .chunks(l)
        .map(|taps| sig.apply(taps))
        .collect();
    Ok(EffectiveSignature { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_chip_code_two_paths() {
        let s = build_signature_matrix(&[1.0, 1.0], 2).unwrap();
        let expected = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(s.matrix().shape(), (3, 2));
        for (r, row) in expected.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert_eq!(s.matrix()[(r, c)], C64::new(*v, 0.0));
            }
        }
    }

    #[test]
    fn default_scenario_shape() {
        let code = vec![1.0; 16];
        let s = build_signature_matrix(&code, 5).unwrap();
        assert_eq!(s.matrix().shape(), (20, 5));
        assert_eq!(s.stacked(3).shape(), (60, 15));
    }

    #[test]
    fn single_path_is_the_code() {
        let code = [1.0, -1.0, -1.0, 1.0];
        let s = build_signature_matrix(&code, 1).unwrap();
        assert_eq!(s.matrix().shape(), (4, 1));
        for (i, c) in code.iter().enumerate() {
            assert_eq!(s.matrix()[(i, 0)].re, *c);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(build_signature_matrix(&[], 2).is_err());
        assert!(build_signature_matrix(&[1.0], 0).is_err());
        assert!(build_signature_matrix(&[1.0, 0.0], 1).is_err());
    }

    #[test]
    fn stacked_is_block_diagonal() {
        let s = build_signature_matrix(&[1.0, -1.0, 1.0], 2).unwrap();
        let st = s.stacked(2);
        assert_eq!(st.view((0, 0), (4, 2)), s.matrix().view((0, 0), (4, 2)));
        assert_eq!(st.view((4, 2), (4, 2)), s.matrix().view((0, 0), (4, 2)));
        assert!(st.view((0, 2), (4, 2)).iter().all(|z| *z == ZERO));
        assert!(st.view((4, 0), (4, 2)).iter().all(|z| *z == ZERO));
    }

    #[test]
    fn first_tap_selects_first_column() {
        let code = [1.0, -1.0, 1.0, 1.0];
        let s = build_signature_matrix(&code, 3).unwrap();
        let mut h = CVec::zeros(9);
        for p in 0..3 {
            h[p * 3] = C64::new(1.0, 0.0);
        }
        let eff = effective_signature(&s, &h).unwrap();
        for p in 0..3 {
            assert_eq!(eff.block(p), &s.matrix().column(0).into_owned());
        }
        let pm = eff.phase_matrix();
        assert_eq!(pm.shape(), (18, 3));
        assert_eq!(pm.column(1).rows(6, 6).into_owned(), eff.block(1).clone());
        assert!(pm.column(1).rows(0, 6).iter().all(|z| *z == ZERO));
    }
}
