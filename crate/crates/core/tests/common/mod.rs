#![allow(dead_code)]

use coop_cdma::linalg::{CVec, C64};
use coop_cdma::rng::{derive_seed, stream, SimRng};
use coop_cdma::signal::synth::{link_responses, PhaseStream, SymbolFrame};
use coop_cdma::signal::{build_signature_matrix, generate_channels, random_codes, stack_received, ChannelState, Link, SignatureMatrix};
use coop_cdma::NetworkConfig;
use rand_distr::{Distribution, StandardNormal};

pub struct Net {
    pub cfg: NetworkConfig,
    pub sigs: Vec<SignatureMatrix>,
    pub channels: ChannelState,
}

impl Net {
    pub fn new(users: usize, chips: usize, paths: usize, relays: usize, noise_var: f64, seed: u64) -> Self {
        let cfg = NetworkConfig {
            users,
            processing_gain: chips,
            paths,
            relays,
            group_size: users,
            noise_var,
            ..NetworkConfig::default()
        };
        let codes = random_codes(users, chips, &mut stream(seed, &[1])).unwrap();
        let sigs = codes.iter().map(|c| build_signature_matrix(c.chips(), paths).unwrap()).collect();
        let channels = generate_channels(&cfg, derive_seed(seed, &[2]));
        Self { cfg, sigs, channels }
    }

    pub fn with_sigs(sigs: Vec<SignatureMatrix>, channels: ChannelState, noise_var: f64) -> Self {
        let cfg = NetworkConfig {
            users: sigs.len(),
            processing_gain: sigs[0].chips(),
            paths: sigs[0].paths(),
            relays: channels.relays(),
            group_size: sigs.len(),
            noise_var,
            ..NetworkConfig::default()
        };
        Self { cfg, sigs, channels }
    }

    pub fn phases(&self) -> usize {
        self.cfg.relays + 1
    }

    /// Stacked destination windows with `amps[k][phase]`.
    pub fn windows(&self, frame: &SymbolFrame, amps: &[Vec<f64>], seed: u64) -> Vec<CVec> {
        let links: Vec<Link> = self.channels.destination_links().collect();
        let mut streams: Vec<PhaseStream> = links
            .iter()
            .enumerate()
            .map(|(j, &l)| PhaseStream::new(link_responses(&self.sigs, &self.channels, l), self.cfg.processing_gain, self.cfg.noise_var, stream(seed, &[9, j as u64])))
            .collect();
        (0..frame.len())
            .map(|i| {
                let blocks: Vec<CVec> = links
                    .iter()
                    .zip(streams.iter_mut())
                    .enumerate()
                    .map(|(j, (link, ps))| {
                        let sent: Vec<C64> = frame.transmitted(*link).unwrap().iter().map(|s| s[i]).collect();
                        let a: Vec<f64> = amps.iter().map(|a| a[j]).collect();
                        ps.next(&a, &sent)
                    })
                    .collect();
                stack_received(&blocks.iter().map(Some).collect::<Vec<_>>()).unwrap()
            })
            .collect()
    }
}

pub fn cgauss_vec(n: usize, rng: &mut SimRng) -> CVec {
    CVec::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) / 2f64.sqrt()
    })
}
