//! Block-fading multipath channels for every link of the network.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::linalg::{CVec, C64};
use crate::rng::{self, label, SimRng};

/// A point-to-point link. Relay indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    SourceDest,
    SourceRelay(usize),
    RelayDest(usize),
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Link::SourceDest => write!(f, "sd"),
            Link::SourceRelay(j) => write!(f, "sr{}", j + 1),
            Link::RelayDest(j) => write!(f, "r{}d", j + 1),
        }
    }
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 0,
            msg: format!("unknown link {s:?}"),
        };
        let relay = |digits: &str| -> Result<usize> {
            match digits.parse::<usize>() {
                Ok(j) if (1..=64).contains(&j) => Ok(j - 1),
                _ => Err(bad()),
            }
        };
        if s == "sd" {
            Ok(Link::SourceDest)
        } else if let Some(rest) = s.strip_prefix("sr") {
            Ok(Link::SourceRelay(relay(rest)?))
        } else if let Some(rest) = s.strip_prefix('r').and_then(|r| r.strip_suffix('d')) {
            Ok(Link::RelayDest(relay(rest)?))
        } else {
            Err(bad())
        }
    }
}

/// Per-user, per-link L-tap channels, fixed over one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    paths: usize,
    source_dest: Vec<CVec>,
    /// `[relay][user]`
    source_relay: Vec<Vec<CVec>>,
    /// `[relay][user]`
    relay_dest: Vec<Vec<CVec>>,
}

/// Draws one link before normalization: taps CN(0, p_l) with an exponential
/// power-delay profile p_l ∝ exp(−β l), β ~ U[0, 1], Σ p_l = 1.
pub fn draw_link_taps<R: Rng + ?Sized>(paths: usize, rng: &mut R) -> CVec {
    let decay: f64 = rng.random_range(0.0..=1.0);
    let profile: Vec<f64> = (0..paths).map(|l| (-decay * l as f64).exp()).collect();
    let total: f64 = profile.iter().sum();
    CVec::from_iterator(
        paths,
        profile.iter().map(|p| {
            let std = (p / total / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * std, im * std)
        }),
    )
}

fn draw_unit_link(paths: usize, rng: &mut SimRng) -> CVec {
    loop {
        let taps = draw_link_taps(paths, rng);
        let norm = taps.norm();
        if norm > 0.0 {
            return taps / C64::new(norm, 0.0);
        }
    }
}

/// Generates every link of the network. Each link has its own seed stream
/// so that adding relays never perturbs the source-destination channels.
pub fn generate_channels(cfg: &NetworkConfig, seed: u64) -> ChannelState {
    let l = cfg.paths;
    let link_rng = |kind: u64, relay: usize, user: usize| {
        rng::stream(seed, &[label::CHANNELS, kind, relay as u64, user as u64])
    };
    let source_dest = (0..cfg.users)
        .map(|k| draw_unit_link(l, &mut link_rng(0, 0, k)))
        .collect();
    let source_relay = (0..cfg.relays)
        .map(|j| (0..cfg.users).map(|k| draw_unit_link(l, &mut link_rng(1, j, k))).collect())
        .collect();
    let relay_dest = (0..cfg.relays)
        .map(|j| (0..cfg.users).map(|k| draw_unit_link(l, &mut link_rng(2, j, k))).collect())
        .collect();
    ChannelState {
        paths: l,
        source_dest,
        source_relay,
        relay_dest,
    }
}

impl ChannelState {
    pub fn new(paths: usize, source_dest: Vec<CVec>, source_relay: Vec<Vec<CVec>>, relay_dest: Vec<Vec<CVec>>) -> Result<Self> {
        let users = source_dest.len();
        if source_relay.len() != relay_dest.len() {
            return Err(Error::dim("channel relay count", source_relay.len(), relay_dest.len()));
        }
        let all = source_dest
            .iter()
            .chain(source_relay.iter().flatten())
            .chain(relay_dest.iter().flatten());
        for h in all {
            if h.len() != paths {
                return Err(Error::dim("channel taps", paths, h.len()));
            }
        }
        for per_relay in source_relay.iter().chain(&relay_dest) {
            if per_relay.len() != users {
                return Err(Error::dim("channel users", users, per_relay.len()));
            }
        }
        Ok(Self {
            paths,
            source_dest,
            source_relay,
            relay_dest,
        })
    }

    pub fn users(&self) -> usize {
        self.source_dest.len()
    }

    pub fn relays(&self) -> usize {
        self.relay_dest.len()
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn link(&self, user: usize, link: Link) -> &CVec {
        match link {
            Link::SourceDest => &self.source_dest[user],
            Link::SourceRelay(j) => &self.source_relay[j][user],
            Link::RelayDest(j) => &self.relay_dest[j][user],
        }
    }

    /// Links terminating at the destination, in stacking order.
    pub fn destination_links(&self) -> impl Iterator<Item = Link> {
        std::iter::once(Link::SourceDest).chain((0..self.relays()).map(Link::RelayDest))
    }

    /// h_k: the (n_r+1)L concatenation of sd, r1d, …, r_{n_r}d.
    pub fn stacked(&self, user: usize) -> CVec {
        let l = self.paths;
        let mut out = CVec::zeros(l * (self.relays() + 1));
        for (p, link) in self.destination_links().enumerate() {
            out.rows_mut(p * l, l).copy_from(self.link(user, link));
        }
        out
    }

    /// Drops relays beyond `relays`, keeping all other links untouched.
    pub fn truncate_relays(&self, relays: usize) -> Self {
        let mut out = self.clone();
        out.source_relay.truncate(relays);
        out.relay_dest.truncate(relays);
        out
    }

    fn all_links(&self) -> Vec<Link> {
        let mut links = vec![Link::SourceDest];
        for j in 0..self.relays() {
            links.push(Link::SourceRelay(j));
            links.push(Link::RelayDest(j));
        }
        links
    }

    /// CSV dump with header `user,link,tap,re,im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for user in 0..self.users() {
            for link in self.all_links() {
                for (tap, h) in self.link(user, link).iter().enumerate() {
                    w.serialize(TapRecord {
                        user,
                        link: link.to_string(),
                        tap,
                        re: h.re,
                        im: h.im,
                    })?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a dump written by [`ChannelState::write_csv`]. Every
    /// (user, link, tap) cell implied by the maxima must be present once.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        const MAX_CELLS: usize = 1 << 20;
        let mut rdr = csv::Reader::from_reader(reader);
        let mut records = Vec::new();
        for (i, rec) in rdr.deserialize::<TapRecord>().enumerate() {
            let rec = rec?;
            let link: Link = rec.link.parse().map_err(|_| Error::Parse {
                line: i + 2,
                msg: format!("unknown link {:?}", rec.link),
            })?;
            if !(rec.re.is_finite() && rec.im.is_finite()) {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: "non-finite tap".into(),
                });
            }
            records.push((rec.user, link, rec.tap, C64::new(rec.re, rec.im)));
        }
        if records.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no channel taps".into(),
            });
        }
        let users = records.iter().map(|r| r.0).max().unwrap_or(0).saturating_add(1);
        let paths = records.iter().map(|r| r.2).max().unwrap_or(0).saturating_add(1);
        let relays = records
            .iter()
            .map(|r| match r.1 {
                Link::SourceDest => 0,
                Link::SourceRelay(j) | Link::RelayDest(j) => j + 1,
            })
            .max()
            .unwrap_or(0);
        let cells = users
            .checked_mul(paths)
            .and_then(|c| c.checked_mul(1 + 2 * relays))
            .filter(|c| *c <= MAX_CELLS)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: "channel dump dimensions too large".into(),
            })?;
        if cells != records.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {cells} taps, found {}", records.len()),
            });
        }
        let zeros = || vec![CVec::zeros(paths); users];
        let mut sd = zeros();
        let mut sr = vec![zeros(); relays];
        let mut rd = vec![zeros(); relays];
        let mut seen = vec![false; cells];
        for (user, link, tap, h) in records {
            let slot = match link {
                Link::SourceDest => 0,
                Link::SourceRelay(j) => 1 + 2 * j,
                Link::RelayDest(j) => 2 + 2 * j,
            };
            let idx = (user * (1 + 2 * relays) + slot) * paths + tap;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("duplicate tap user={user} link={link} tap={tap}"),
                });
            }
            match link {
                Link::SourceDest => sd[user][tap] = h,
                Link::SourceRelay(j) => sr[j][user][tap] = h,
                Link::RelayDest(j) => rd[j][user][tap] = h,
            }
        }
        Self::new(paths, sd, sr, rd)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TapRecord {
    user: usize,
    link: String,
    tap: usize,
    re: f64,
    im: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_link_has_unit_norm() {
        let cfg = NetworkConfig::default();
        for seed in 0..20 {
            let ch = generate_channels(&cfg, seed);
            for k in 0..cfg.users {
                for link in ch.all_links() {
                    assert!((ch.link(k, link).norm() - 1.0).abs() < 1e-12);
                }
                assert_eq!(ch.stacked(k).len(), cfg.stacked_channel_len());
            }
        }
    }

    #[test]
    fn single_tap_has_unit_magnitude() {
        let cfg = NetworkConfig {
            paths: 1,
            ..NetworkConfig::default()
        };
        let ch = generate_channels(&cfg, 9);
        for k in 0..cfg.users {
            assert!((ch.link(k, Link::SourceDest)[0].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn prenormalization_power_is_unit_on_average() {
        let mut rng = rng::stream(11, &[]);
        let draws = 10_000;
        let mean: f64 = (0..draws).map(|_| draw_link_taps(5, &mut rng).norm_squared()).sum::<f64>() / draws as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean power {mean}");
    }

    #[test]
    fn relays_do_not_perturb_direct_links() {
        let cfg = NetworkConfig::default();
        let fewer = NetworkConfig {
            relays: 0,
            ..cfg.clone()
        };
        let a = generate_channels(&cfg, 4);
        let b = generate_channels(&fewer, 4);
        assert_eq!(a.truncate_relays(0), b);
    }

    #[test]
    fn link_names_round_trip() {
        for link in [Link::SourceDest, Link::SourceRelay(0), Link::RelayDest(3)] {
            assert_eq!(link.to_string().parse::<Link>().unwrap(), link);
        }
        assert!("r0d".parse::<Link>().is_err());
        assert!("xd".parse::<Link>().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let cfg = NetworkConfig {
            users: 3,
            relays: 2,
            ..NetworkConfig::default()
        };
        let ch = generate_channels(&cfg, 1);
        let mut buf = Vec::new();
        ch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user,link,tap,re,im"));
        assert_eq!(ChannelState::read_csv(buf.as_slice()).unwrap(), ch);
    }

    #[test]
    fn csv_rejects_missing_taps() {
        let text = "user,link,tap,re,im\n0,sd,0,1,0\n0,sd,2,1,0\n";
        assert!(ChannelState::read_csv(text.as_bytes()).is_err());
        let dup = "user,link,tap,re,im\n0,sd,0,1,0\n0,sd,0,1,0\n";
        assert!(ChannelState::read_csv(dup.as_bytes()).is_err());
    }
}
