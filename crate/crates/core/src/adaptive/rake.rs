//! RAKE statistics used to pick the G strongest users.

use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::oracle::power::GroupSelection;

#[derive(Debug, Clone, PartialEq)]
pub struct RakeStatistic {
    /// |p̂_kᴴ r| per user.
    pub magnitudes: Vec<f64>,
    /// Users from strongest to weakest; ties go to the lower index.
    pub ranking: Vec<usize>,
}

impl RakeStatistic {
    pub fn from_magnitudes(magnitudes: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..magnitudes.len()).collect();
        // Stable sort keeps index order among equal magnitudes.
        ranking.sort_by(|&a, &b| magnitudes[b].total_cmp(&magnitudes[a]));
        Self { magnitudes, ranking }
    }

    /// The first `g` users of the ranking, stored in index order.
    pub fn select(&self, g: usize) -> Result<GroupSelection> {
        let users = self.magnitudes.len();
        if g > users {
            return Err(Error::GroupTooLarge { group: g, users });
        }
        let mut chosen = self.ranking[..g].to_vec();
        chosen.sort_unstable();
        GroupSelection::new(chosen, users)
    }
}

pub fn rake_statistic(r: &CVec, p_hat: &[CVec]) -> RakeStatistic {
    RakeStatistic::from_magnitudes(p_hat.iter().map(|p| p.dotc(r).norm()).collect())
}

pub fn rake_group_select(r: &CVec, p_hat: &[CVec], g: usize) -> Result<GroupSelection> {
    rake_statistic(r, p_hat).select(g)
}

/// Running mean of |z_k^RAKE| over an epoch (the training window).
#[derive(Debug, Clone)]
pub struct RakeAccumulator {
    sums: Vec<f64>,
    count: usize,
}

impl RakeAccumulator {
    pub fn new(users: usize) -> Self {
        Self {
            sums: vec![0.0; users],
            count: 0,
        }
    }

    pub fn add(&mut self, magnitudes: &[f64]) {
        for (s, m) in self.sums.iter_mut().zip(magnitudes) {
            *s += m;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn statistic(&self) -> RakeStatistic {
        let n = self.count.max(1) as f64;
        RakeStatistic::from_magnitudes(self.sums.iter().map(|s| s / n).collect())
    }

    pub fn reset(&mut self) {
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.count = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_vec;

    #[test]
    fn picks_the_largest() {
        let s = RakeStatistic::from_magnitudes(vec![3.0, 1.0, 2.0]);
        assert_eq!(s.ranking, vec![0, 2, 1]);
        assert_eq!(s.select(2).unwrap().indices(), &[0, 2]);
        assert_eq!(s.select(3).unwrap().indices(), &[0, 1, 2]);
        assert!(matches!(s.select(4), Err(Error::GroupTooLarge { .. })));
    }

    #[test]
    fn ties_prefer_lower_index() {
        let s = RakeStatistic::from_magnitudes(vec![1.0, 2.0, 2.0, 2.0]);
        assert_eq!(s.select(2).unwrap().indices(), &[1, 2]);
    }

    #[test]
    fn positive_scaling_keeps_selection() {
        let p = vec![real_vec(&[1.0, 0.0]), real_vec(&[0.0, 1.0]), real_vec(&[0.5, 0.5])];
        let r = real_vec(&[0.3, -2.0]);
        let a = rake_group_select(&r, &p, 2).unwrap();
        let b = rake_group_select(&(&r * crate::linalg::C64::new(7.5, 0.0)), &p, 2).unwrap();
        assert_eq!(a, b);
    }
}
