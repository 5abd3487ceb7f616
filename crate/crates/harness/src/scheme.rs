use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Transmission and detection strategy compared in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Direct link only; relays are ignored.
    Ncis,
    /// Relays with equal per-hop power, no allocation.
    Cis,
    /// Group-based allocation tracked by the RALS receiver.
    JpaisGbcRals,
    /// Full-statistics alternating design over all users.
    JpaisMmse,
}

/// Linear receiver family used by relays, and by the destination of the
/// schemes that do not fix it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverKind {
    OracleMmse,
    AdaptiveRls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub variant: Variant,
    #[serde(default = "default_receiver")]
    pub receiver: ReceiverKind,
    /// Group size for the allocating schemes; the network default when unset.
    #[serde(default)]
    pub group_size: Option<usize>,
}

fn default_receiver() -> ReceiverKind {
    ReceiverKind::AdaptiveRls
}

impl Scheme {
    pub fn new(variant: Variant, receiver: ReceiverKind) -> Self {
        Self {
            variant,
            receiver,
            group_size: None,
        }
    }

    pub fn with_group(mut self, g: usize) -> Self {
        self.group_size = Some(g);
        self
    }

    pub fn ncis() -> Self {
        Self::new(Variant::Ncis, ReceiverKind::AdaptiveRls)
    }

    pub fn cis() -> Self {
        Self::new(Variant::Cis, ReceiverKind::AdaptiveRls)
    }

    pub fn jpais_gbc(g: usize) -> Self {
        Self::new(Variant::JpaisGbcRals, ReceiverKind::AdaptiveRls).with_group(g)
    }

    pub fn jpais_mmse() -> Self {
        Self::new(Variant::JpaisMmse, ReceiverKind::OracleMmse)
    }

    /// Short label used in file names and table headers.
    pub fn label(&self) -> String {
        let base = match self.variant {
            Variant::Ncis => "ncis",
            Variant::Cis => "cis",
            Variant::JpaisGbcRals => "jpais_gbc",
            Variant::JpaisMmse => "jpais_mmse",
        };
        let rx = match self.receiver {
            ReceiverKind::OracleMmse => "mmse",
            ReceiverKind::AdaptiveRls => "rls",
        };
        match self.group_size {
            Some(g) if matches!(self.variant, Variant::JpaisGbcRals | Variant::JpaisMmse) => format!("{base}_g{g}_{rx}"),
            _ => format!("{base}_{rx}"),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Scheme {
    type Err = String;

    /// Accepts `ncis`, `cis`, `jpais_gbc`, `jpais_mmse`, optionally followed
    /// by `:g<G>` and/or `:mmse` / `:rls`, e.g. `jpais_gbc:g3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let variant = match parts.next().unwrap_or_default() {
            "ncis" => Variant::Ncis,
            "cis" => Variant::Cis,
            "jpais_gbc" | "jpais_gbc_rals" => Variant::JpaisGbcRals,
            "jpais_mmse" => Variant::JpaisMmse,
            other => return Err(format!("unknown scheme `{other}`")),
        };
        let mut scheme = match variant {
            Variant::JpaisMmse => Scheme::jpais_mmse(),
            v => Scheme::new(v, ReceiverKind::AdaptiveRls),
        };
        for p in parts {
            match p {
                "mmse" => scheme.receiver = ReceiverKind::OracleMmse,
                "rls" => scheme.receiver = ReceiverKind::AdaptiveRls,
                g if g.starts_with('g') => {
                    let n = g[1..].parse().map_err(|_| format!("bad group size in `{s}`"))?;
                    scheme.group_size = Some(n);
                }
                other => return Err(format!("unknown scheme option `{other}`")),
            }
        }
        Ok(scheme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let s: Scheme = "jpais_gbc:g3".parse().unwrap();
        assert_eq!(s, Scheme::jpais_gbc(3));
        assert_eq!(s.label(), "jpais_gbc_g3_rls");
        assert_eq!("cis:mmse".parse::<Scheme>().unwrap().receiver, ReceiverKind::OracleMmse);
        assert!("foo".parse::<Scheme>().is_err());
        assert!("cis:gx".parse::<Scheme>().is_err());
    }
}
