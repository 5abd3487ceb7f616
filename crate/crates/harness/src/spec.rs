//! Experiment description, read from TOML with dotted command-line
//! overrides.

use std::path::PathBuf;

use coop_cdma::NetworkConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::packet::SimSettings;
use crate::scheme::Scheme;

/// Network section of a spec. Everything has a default; the noise level is
/// given as an SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub users: usize,
    pub processing_gain: usize,
    pub paths: usize,
    pub relays: usize,
    pub packet_len: usize,
    pub group_size: usize,
    pub snr_db: f64,
    pub user_power: f64,
    pub training_len: usize,
    pub forgetting: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let d = NetworkConfig::default();
        Self {
            users: d.users,
            processing_gain: d.processing_gain,
            paths: d.paths,
            relays: d.relays,
            packet_len: d.packet_len,
            group_size: d.group_size,
            snr_db: d.snr_db(),
            user_power: d.user_power,
            training_len: d.training_len,
            forgetting: d.forgetting,
        }
    }
}

impl NetworkSection {
    pub fn to_config(&self) -> NetworkConfig {
        let mut cfg = NetworkConfig {
            users: self.users,
            processing_gain: self.processing_gain,
            paths: self.paths,
            relays: self.relays,
            packet_len: self.packet_len,
            group_size: self.group_size.min(self.users.max(1)),
            group_power: 0.0,
            noise_var: 0.0,
            user_power: self.user_power,
            training_len: self.training_len,
            forgetting: self.forgetting,
        };
        cfg.set_snr_db(self.snr_db);
        cfg.group_power = cfg.nominal_group_power();
        cfg
    }
}

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    Users,
    GroupSize,
    Relays,
    /// One run; values are the ends of consecutive symbol windows and each
    /// record counts the errors inside its window.
    Symbols,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Users => "users",
            Axis::GroupSize => "group_size",
            Axis::Relays => "relays",
            Axis::Symbols => "symbols",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            axis: Axis::SnrDb,
            values: vec![12.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Count only the last `ber_last` symbols of each packet (all symbols
    /// after training when unset).
    #[serde(default)]
    pub ber_last: Option<usize>,
    /// Record wall-clock times; disable for byte-identical reruns.
    #[serde(default = "default_timing")]
    pub timing: bool,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
}

fn default_seed() -> u64 {
    1
}

fn default_timing() -> bool {
    true
}

fn default_trials() -> usize {
    200
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::ncis(), Scheme::cis(), Scheme::jpais_gbc(3)]
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        toml::from_str("").expect("empty spec uses defaults")
    }
}

impl ExperimentSpec {
    /// Parses a spec and applies `overrides` (dotted key, raw value) first.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text.parse()?;
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        let spec: Self = table.try_into()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.sweep.values.is_empty() {
            return fail("sweep needs at least one value".into());
        }
        if self.schemes.is_empty() {
            return fail("at least one scheme is required".into());
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return fail("sweep values must be finite".into());
        }
        if self.sweep.axis != Axis::SnrDb && self.sweep.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            return fail(format!("{} values must be non-negative integers", self.sweep.axis.name()));
        }
        if self.sweep.axis == Axis::Symbols {
            let v = &self.sweep.values;
            if v.windows(2).any(|w| w[1] <= w[0]) || v[v.len() - 1] > self.network.packet_len as f64 {
                return fail("symbol windows must be increasing and inside the packet".into());
            }
        }
        if !(1..=2).contains(&self.sim.iterations) {
            return fail("sim.iterations must be 1 or 2".into());
        }
        for i in 0..self.points() {
            self.config_at(i).validate()?;
        }
        Ok(())
    }

    /// Number of independent simulation points (1 for the symbol axis).
    pub fn points(&self) -> usize {
        match self.sweep.axis {
            Axis::Symbols => 1,
            _ => self.sweep.values.len(),
        }
    }

    /// Network configuration of sweep point `index`.
    pub fn config_at(&self, index: usize) -> NetworkConfig {
        let mut section = self.network.clone();
        let v = self.sweep.values[index.min(self.sweep.values.len() - 1)];
        match self.sweep.axis {
            Axis::SnrDb => section.snr_db = v,
            Axis::Users => section.users = v as usize,
            Axis::GroupSize => section.group_size = v as usize,
            Axis::Relays => section.relays = v as usize,
            Axis::Symbols => {}
        }
        section.to_config()
    }

    /// Scheme as run at a sweep point: the group-size axis overrides the
    /// scheme's own group.
    pub fn scheme_at(&self, scheme: &Scheme, index: usize) -> Scheme {
        let mut s = *scheme;
        if self.sweep.axis == Axis::GroupSize {
            s.group_size = Some(self.sweep.values[index] as usize);
        }
        s
    }
}

/// Sets `a.b.c = value` in a TOML table. The value is parsed as a TOML
/// literal when possible and taken as a string otherwise.
pub fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::Config(format!("bad override key `{key}`")));
    }
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut node = table;
    for p in &parts[..parts.len() - 1] {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("override `{key}`: `{p}` is not a section")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

/// Dotted key and raw value pairs.
pub type Overrides = Vec<(String, String)>;

/// Splits `--a.b=v` / `--a.b v` pairs out of an argument list; everything
/// else is returned unchanged for the regular parser.
pub fn extract_overrides(args: impl IntoIterator<Item = String>) -> Result<(Vec<String>, Overrides)> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if !key.contains('.') {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .ok_or_else(|| HarnessError::Config(format!("override `--{key}` needs a value")))?,
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spec_is_the_default_scenario() {
        let s = ExperimentSpec::parse("", &[]).unwrap();
        let cfg = s.config_at(0);
        assert_eq!(cfg, NetworkConfig::default());
        assert_eq!(s.trials, 200);
    }

    #[test]
    fn dotted_overrides() {
        let (rest, ov) = extract_overrides(
            ["run", "--network.users=4", "--trials", "3", "--sim.genie_relays", "true", "--sweep.axis=users"]
                .map(String::from),
        )
        .unwrap();
        assert_eq!(rest, vec!["run", "--trials", "3"]);
        let s = ExperimentSpec::parse("[sweep]\naxis = 'snr_db'\nvalues = [4, 6]\n", &ov).unwrap();
        assert_eq!(s.network.users, 4);
        assert!(s.sim.genie_relays);
        assert_eq!(s.sweep.axis, Axis::Users);
        assert_eq!(s.config_at(1).users, 6);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ExperimentSpec::parse("trials = 0", &[]).is_err());
        assert!(ExperimentSpec::parse("bogus = 1", &[]).is_err());
        assert!(ExperimentSpec::parse("[sweep]\naxis = 'users'\nvalues = [2.5]", &[]).is_err());
        assert!(ExperimentSpec::parse("[sweep]\naxis = 'symbols'\nvalues = [600, 300]", &[]).is_err());
        assert!(ExperimentSpec::parse("[network]\nusers = 0", &[]).is_err());
        assert!(extract_overrides(["--a.b".to_string()]).is_err());
    }

    #[test]
    fn string_override_falls_back_to_text() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "output", "some/dir").unwrap();
        assert_eq!(t["output"].as_str(), Some("some/dir"));
    }
}
