use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scenario parameters shared by every layer of the simulator.
///
/// Powers are squared amplitudes. `user_power` is the nominal per-user,
/// per-hop power, so the nominal SNR is `user_power / noise_var`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Number of users K.
    pub users: usize,
    /// Processing gain N (chips per symbol).
    pub processing_gain: usize,
    /// Multipath taps L per link.
    pub paths: usize,
    /// Number of decode-and-forward relays.
    pub relays: usize,
    /// Symbols per packet.
    pub packet_len: usize,
    /// Group size G for the group-based power constraint.
    pub group_size: usize,
    /// Power budget of the group (sum of squared amplitudes).
    pub group_power: f64,
    /// Noise variance per complex chip sample.
    pub noise_var: f64,
    /// Nominal per-user, per-hop power.
    pub user_power: f64,
    /// Length of the training preamble.
    pub training_len: usize,
    /// RLS forgetting factor.
    pub forgetting: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let mut cfg = Self {
            users: 8,
            processing_gain: 16,
            paths: 5,
            relays: 2,
            packet_len: 1500,
            group_size: 3,
            group_power: 0.0,
            noise_var: 0.0,
            user_power: 1.0,
            training_len: 200,
            forgetting: 0.998,
        };
        cfg.set_snr_db(12.0);
        cfg.group_power = cfg.nominal_group_power();
        cfg
    }
}

impl NetworkConfig {
    /// Observation window M = N + L - 1.
    pub fn window_len(&self) -> usize {
        self.processing_gain + self.paths - 1
    }

    /// Number of transmission phases n_r + 1.
    pub fn phases(&self) -> usize {
        self.relays + 1
    }

    /// Length of the stacked received vector at the destination.
    pub fn stacked_len(&self) -> usize {
        self.phases() * self.window_len()
    }

    /// Length of the stacked channel vector of one user.
    pub fn stacked_channel_len(&self) -> usize {
        self.phases() * self.paths
    }

    /// Length of the group amplitude vector G(n_r + 1).
    pub fn group_dim(&self) -> usize {
        self.group_size * self.phases()
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.user_power / self.noise_var).log10()
    }

    /// Sets the noise variance so that `user_power / noise_var` equals the
    /// requested SNR.
    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.noise_var = self.user_power / 10f64.powf(snr_db / 10.0);
    }

    /// Group budget when every group member carries the nominal power on
    /// every hop.
    pub fn nominal_group_power(&self) -> f64 {
        (self.group_size * self.phases()) as f64 * self.user_power
    }

    /// Total network power P_G + (K - G) * (n_r + 1) * P_A.
    pub fn total_power(&self) -> f64 {
        self.group_power
            + ((self.users - self.group_size) * self.phases()) as f64 * self.user_power
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.users == 0 {
            return fail("users must be at least 1".into());
        }
        if self.processing_gain == 0 {
            return fail("processing_gain must be at least 1".into());
        }
        if self.paths == 0 {
            return fail("paths must be at least 1".into());
        }
        if self.packet_len == 0 {
            return fail("packet_len must be at least 1".into());
        }
        if self.group_size == 0 || self.group_size > self.users {
            return fail(format!(
                "group_size must lie in 1..={} (got {})",
                self.users, self.group_size
            ));
        }
        if !(self.group_power > 0.0 && self.group_power.is_finite()) {
            return fail(format!("group_power must be positive (got {})", self.group_power));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return fail(format!("noise_var must be non-negative (got {})", self.noise_var));
        }
        if !(self.user_power > 0.0 && self.user_power.is_finite()) {
            return fail(format!("user_power must be positive (got {})", self.user_power));
        }
        if !(self.forgetting > 0.0 && self.forgetting <= 1.0) {
            return fail(format!("forgetting must lie in (0, 1] (got {})", self.forgetting));
        }
        if self.training_len > self.packet_len {
            return fail(format!(
                "training_len {} exceeds packet_len {}",
                self.training_len, self.packet_len
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_dimensions() {
        let cfg = NetworkConfig::default();
        assert_eq!(cfg.window_len(), 20);
        assert_eq!(cfg.phases(), 3);
        assert_eq!(cfg.stacked_len(), 60);
        assert_eq!(cfg.group_dim(), 9);
        assert!((cfg.snr_db() - 12.0).abs() < 1e-12);
        cfg.validate().unwrap();
    }

    #[test]
    fn total_power_accounting() {
        let cfg = NetworkConfig::default();
        let expected = (cfg.users * cfg.phases()) as f64 * cfg.user_power;
        assert!((cfg.total_power() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_values() {
        let base = NetworkConfig::default();
        type Mutation = Box<dyn Fn(&mut NetworkConfig)>;
        let cases: Vec<Mutation> = vec![
            Box::new(|c| c.group_size = 0),
            Box::new(|c| c.group_size = c.users + 1),
            Box::new(|c| c.paths = 0),
            Box::new(|c| c.forgetting = 0.0),
            Box::new(|c| c.forgetting = 1.5),
            Box::new(|c| c.group_power = 0.0),
            Box::new(|c| c.training_len = c.packet_len + 1),
        ];
        for mutate in cases {
            let mut cfg = base.clone();
            mutate(&mut cfg);
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
