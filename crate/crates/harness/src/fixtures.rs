//! Golden test vectors: a code file, a channel dump, a receiver snapshot, a
//! spec, and small BER tables in the layout the plotting script reads.

use std::fs;
use std::path::{Path, PathBuf};

use coop_cdma::adaptive::{RalsOptions, RalsReceiver, Reference};
use coop_cdma::rng::{derive_seed, stream};
use coop_cdma::signal::codes::format_codes;
use coop_cdma::signal::synth::SymbolFrame;
use coop_cdma::signal::{generate_channels, random_codes, PowerAllocation};
use coop_cdma::NetworkConfig;

use crate::checks::Scenario;
use crate::error::Result;
use crate::experiment::run_experiment;
use crate::scheme::Scheme;
use crate::spec::{Axis, ExperimentSpec, Sweep};

const SEED: u64 = 20_240_601;

/// A RALS receiver after a short training run on a small network.
pub fn small_receiver() -> Result<RalsReceiver> {
    let sc = Scenario::random(3, 8, 2, 1, 0.01, SEED)?;
    let mut frame = SymbolFrame::random(3, 60, 1, &mut stream(SEED, &[7]));
    frame.genie_relays();
    let windows = sc.windows(&frame, SEED)?;
    let opts = RalsOptions {
        group_size: 2,
        ..RalsOptions::default()
    };
    let mut rx = RalsReceiver::new(sc.sigs.clone(), 2, opts)?;
    let amps = PowerAllocation::from_amplitudes(sc.amplitudes.clone())?;
    let mut training = vec![Default::default(); 3];
    for (i, r) in windows.iter().enumerate() {
        for (t, s) in training.iter_mut().zip(frame.source()) {
            *t = s[i];
        }
        let reference = if i < 40 { Reference::Training(&training) } else { Reference::Decision };
        rx.step(r, &amps, reference)?;
        if i == 39 {
            rx.select_group(&amps)?;
        }
    }
    Ok(rx)
}

fn tiny_spec(axis: Axis, values: Vec<f64>, output: PathBuf) -> ExperimentSpec {
    let mut spec = ExperimentSpec {
        seed: SEED,
        trials: 2,
        output,
        timing: false,
        sweep: Sweep { axis, values },
        schemes: vec![Scheme::ncis(), Scheme::cis(), Scheme::jpais_gbc(2)],
        ..ExperimentSpec::default()
    };
    spec.network.users = 4;
    spec.network.packet_len = 300;
    spec.network.training_len = 100;
    spec.network.group_size = 2;
    spec
}

/// Writes every fixture under `dir` and returns the files written.
pub fn write_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        files.push(path);
        Ok(())
    };
    put("codes.txt", format_codes(&random_codes(4, 16, &mut stream(SEED, &[1]))?))?;
    let mut csv = Vec::new();
    let cfg = NetworkConfig {
        users: 2,
        ..NetworkConfig::default()
    };
    generate_channels(&cfg, derive_seed(SEED, &[2])).write_csv(&mut csv)?;
    put("channels.csv", String::from_utf8(csv).expect("csv output is UTF-8"))?;
    put("rals_snapshot.json", small_receiver()?.snapshot().to_json()?)?;
    put("spec.toml", toml::to_string(&ExperimentSpec::default()).expect("spec serializes"))?;

    for (name, axis, values) in [("fig2", Axis::SnrDb, vec![6.0, 10.0]), ("fig1", Axis::Symbols, vec![100.0, 200.0, 300.0])] {
        let out = dir.join(name);
        let spec = tiny_spec(axis, values, PathBuf::from(name));
        run_experiment(&spec, Some(&out))?;
        for f in ["comparison.csv", "manifest.json"] {
            files.push(out.join(f));
        }
        files.extend(spec.schemes.iter().map(|s| out.join(format!("{}.csv", s.label()))));
    }
    Ok(files)
}
