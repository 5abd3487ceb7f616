//! Spreading codes: seeded random ±1 sequences or the plain-text code file
//! format (one user per line, N whitespace-separated ±1 entries, `#`
//! comments and blank lines ignored).

use rand::Rng;

use crate::error::{Error, Result};

/// A unit-norm chip sequence with entries ±1/√N.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCode {
    chips: Vec<f64>,
}

impl SpreadingCode {
    /// Normalizes a ±1 sign pattern to unit energy.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Config("spreading code is empty".into()));
        }
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::Config(format!("chip {bad} is not ±1")));
        }
        let scale = 1.0 / (signs.len() as f64).sqrt();
        Ok(Self {
            chips: signs.iter().map(|&s| s as f64 * scale).collect(),
        })
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        let signs: Vec<i8> = (0..len).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::from_signs(&signs)
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.chips.iter().map(|c| if *c > 0.0 { 1 } else { -1 }).collect()
    }
}

pub fn random_codes<R: Rng + ?Sized>(users: usize, len: usize, rng: &mut R) -> Result<Vec<SpreadingCode>> {
    (0..users).map(|_| SpreadingCode::random(len, rng)).collect()
}

/// Parses a code file. Every non-comment line is one user; all users must
/// share the same length.
pub fn parse_codes(text: &str) -> Result<Vec<SpreadingCode>> {
    let mut codes = Vec::new();
    let mut width = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let signs = line
            .split_whitespace()
            .map(|tok| match tok {
                "1" | "+1" => Ok(1i8),
                "-1" => Ok(-1i8),
                other => Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected ±1, found {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(signs.len()),
            Some(w) if w != signs.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {w} chips, found {}", signs.len()),
                })
            }
            _ => {}
        }
        codes.push(SpreadingCode::from_signs(&signs).map_err(|e| Error::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?);
    }
    if codes.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no codes found".into(),
        });
    }
    Ok(codes)
}

pub fn format_codes(codes: &[SpreadingCode]) -> String {
    let mut out = String::new();
    for c in codes {
        let line: Vec<&str> = c.signs().iter().map(|s| if *s > 0 { "1" } else { "-1" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
