use crate::error::{Error, Result};

/// Real, non-negative per-hop amplitudes of every user:
/// `[a_sd, a_r1d, …, a_{n_r}d]` per user.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    amplitudes: Vec<Vec<f64>>,
}

impl PowerAllocation {
    /// Every user carries `powers[k]` on each of `phases` hops.
    pub fn equal(powers: &[f64], phases: usize) -> Self {
        Self {
            amplitudes: powers.iter().map(|p| vec![p.sqrt(); phases]).collect(),
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Vec<f64>>) -> Result<Self> {
        let phases = amplitudes.first().map_or(0, |a| a.len());
        for a in &amplitudes {
            if a.len() != phases {
                return Err(Error::dim("power allocation phases", phases, a.len()));
            }
            if a.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Config("amplitudes must be finite and non-negative".into()));
            }
        }
        Ok(Self { amplitudes })
    }

    pub fn users(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn phases(&self) -> usize {
        self.amplitudes.first().map_or(0, |a| a.len())
    }

    pub fn user(&self, k: usize) -> &[f64] {
        &self.amplitudes[k]
    }

    pub fn amplitude(&self, k: usize, phase: usize) -> f64 {
        self.amplitudes[k][phase]
    }

    /// Amplitudes of one phase across users.
    pub fn phase(&self, phase: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a[phase]).collect()
    }

    pub fn user_power(&self, k: usize) -> f64 {
        self.amplitudes[k].iter().map(|a| a * a).sum()
    }

    pub fn total_power(&self) -> f64 {
        (0..self.users()).map(|k| self.user_power(k)).sum()
    }

    /// The stacked G(n_r+1) vector a_S for the given group.
    pub fn group_vector(&self, group: &[usize]) -> Vec<f64> {
        group.iter().flat_map(|&k| self.amplitudes[k].iter().copied()).collect()
    }

    /// Overwrites the group's amplitudes from a stacked vector.
    pub fn set_group_vector(&mut self, group: &[usize], stacked: &[f64]) {
        let np = self.phases();
        for (g, &k) in group.iter().enumerate() {
            self.amplitudes[k].copy_from_slice(&stacked[g * np..(g + 1) * np]);
        }
    }
}

/// Scales `a` so that ‖a‖² = budget.
pub fn project_to_budget(a: &mut [f64], budget: f64) -> Result<()> {
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateAllocation);
    }
    let s = budget.sqrt() / norm;
    a.iter_mut().for_each(|x| *x *= s);
    Ok(())
}
