//! Monte-Carlo sweeps: many packets per point, error counts with Wilson
//! intervals, CSV output per scheme plus a merged table and a manifest.

use std::collections::HashSet;
use std::fs::{self, File};
use std::path::Path;
use std::time::Instant;

use coop_cdma::rng::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::packet::{run_packet, PacketOutcome, Tally};
use crate::scheme::Scheme;
use crate::spec::{Axis, ExperimentSpec};
use crate::stats::{wilson, Z95};

/// One scheme at one sweep point (or one symbol window).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scheme: String,
    pub axis: String,
    pub value: f64,
    pub packets: usize,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub ber_low: f64,
    pub ber_high: f64,
    /// Half the width of the 95 % Wilson interval.
    pub half_width: f64,
    pub symbol_errors: u64,
    pub symbols: u64,
    pub ser: f64,
    /// Destination-side transmit power per symbol, averaged over packets.
    pub mean_power: f64,
    pub relay_symbol_errors: u64,
    pub wall_time_s: f64,
}

impl ResultRecord {
    fn new(scheme: &Scheme, axis: Axis, value: f64, packets: &[PacketOutcome], t: Tally, wall: f64) -> Self {
        let (ber_low, ber_high) = wilson(t.bit_errors, t.bits, Z95);
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let n = packets.len().max(1) as f64;
        Self {
            scheme: scheme.label(),
            axis: axis.name().to_string(),
            value,
            packets: packets.len(),
            bit_errors: t.bit_errors,
            bits: t.bits,
            ber: ratio(t.bit_errors, t.bits),
            ber_low,
            ber_high,
            half_width: (ber_high - ber_low) / 2.0,
            symbol_errors: t.symbol_errors,
            symbols: t.symbols,
            ser: ratio(t.symbol_errors, t.symbols),
            mean_power: packets.iter().map(|p| p.diagnostics.mean_power).sum::<f64>() / n,
            relay_symbol_errors: packets.iter().map(|p| p.diagnostics.relay_symbol_errors as u64).sum(),
            wall_time_s: wall,
        }
    }

    /// The two intervals do not overlap.
    pub fn separated_from(&self, other: &ResultRecord) -> bool {
        self.ber_high < other.ber_low || other.ber_high < self.ber_low
    }
}

/// Seed of packet `packet` at sweep point `point`. Schemes share it so that
/// comparisons are paired.
pub fn packet_seed(master: u64, point: usize, packet: usize) -> u64 {
    derive_seed(master, &[point as u64, packet as u64])
}

/// Runs `trials` packets of one scheme at one point, in parallel, returning
/// them in packet order.
pub fn run_packets(spec: &ExperimentSpec, scheme: &Scheme, point: usize) -> Result<Vec<PacketOutcome>> {
    let cfg = spec.config_at(point);
    let scheme = spec.scheme_at(scheme, point);
    (0..spec.trials)
        .into_par_iter()
        .map(|p| {
            run_packet(&cfg, &scheme, &spec.sim, packet_seed(spec.seed, point, p)).map_err(|source| HarnessError::Packet {
                point,
                packet: p,
                source,
            })
        })
        .collect()
}

/// Records of one scheme at one point: a single record, or one per symbol
/// window on the symbol axis.
pub fn run_point(spec: &ExperimentSpec, scheme: &Scheme, point: usize) -> Result<Vec<ResultRecord>> {
    let start = Instant::now();
    let packets = run_packets(spec, scheme, point)?;
    let wall = if spec.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let axis = spec.sweep.axis;
    if axis == Axis::Symbols {
        let mut records = Vec::new();
        let mut from = 0;
        for &end in &spec.sweep.values {
            let end = end as usize;
            let mut t = Tally::default();
            for p in &packets {
                let full = p.tally_from(from);
                let tail = p.tally_from(end);
                t.bit_errors += full.bit_errors - tail.bit_errors;
                t.bits += full.bits - tail.bits;
                t.symbol_errors += full.symbol_errors - tail.symbol_errors;
                t.symbols += full.symbols - tail.symbols;
            }
            records.push(ResultRecord::new(scheme, axis, end as f64, &packets, t, wall));
            from = end;
        }
        return Ok(records);
    }
    let mut t = Tally::default();
    for p in &packets {
        t += match spec.ber_last {
            Some(n) => p.tally_from(p.bit_errors.len().saturating_sub(n)),
            None => p.tally(),
        };
    }
    Ok(vec![ResultRecord::new(scheme, axis, spec.sweep.values[point], &packets, t, wall)])
}

/// Runs the full sweep. With an output directory, each scheme's CSV is
/// written and flushed record by record, so an interrupted run keeps its
/// finished points; the merged table and manifest are written at the end.
pub fn run_experiment(spec: &ExperimentSpec, out: Option<&Path>) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let labels = unique_labels(&spec.schemes);
    let mut writers = match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            labels
                .iter()
                .map(|l| Ok(Some(csv::Writer::from_path(dir.join(format!("{l}.csv")))?)))
                .collect::<Result<Vec<_>>>()?
        }
        None => labels.iter().map(|_| None).collect(),
    };
    let start = Instant::now();
    let mut records = Vec::new();
    for point in 0..spec.points() {
        for ((scheme, label), writer) in spec.schemes.iter().zip(&labels).zip(writers.iter_mut()) {
            let mut batch = run_point(spec, scheme, point)?;
            for r in batch.iter_mut() {
                r.scheme.clone_from(label);
            }
            if let Some(w) = writer {
                for r in &batch {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            records.extend(batch);
        }
    }
    if let Some(dir) = out {
        write_wide(&dir.join("comparison.csv"), spec, &labels, &records)?;
        let wall = if spec.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        write_manifest(&dir.join("manifest.json"), spec, &labels, &records, wall)?;
    }
    Ok(records)
}

/// Scheme labels with `_2`, `_3`, … appended to repeats.
pub fn unique_labels(schemes: &[Scheme]) -> Vec<String> {
    let mut seen = HashSet::new();
    schemes
        .iter()
        .map(|s| {
            let base = s.label();
            let mut label = base.clone();
            let mut n = 1;
            while !seen.insert(label.clone()) {
                n += 1;
                label = format!("{base}_{n}");
            }
            label
        })
        .collect()
}

/// Merged table: one row per sweep value, BER and interval columns per
/// scheme.
pub fn write_wide(path: &Path, spec: &ExperimentSpec, labels: &[String], records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![spec.sweep.axis.name().to_string()];
    for l in labels {
        header.extend([format!("{l}_ber"), format!("{l}_ber_low"), format!("{l}_ber_high")]);
    }
    w.write_record(&header)?;
    for &value in &spec.sweep.values {
        let mut row = vec![value.to_string()];
        for l in labels {
            match records.iter().find(|r| &r.scheme == l && r.value == value) {
                Some(r) => row.extend([r.ber, r.ber_low, r.ber_high].map(|x| x.to_string())),
                None => row.extend(std::iter::repeat_n(String::new(), 3)),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    spec: &'a ExperimentSpec,
    files: Vec<String>,
    records: usize,
    wall_time_s: f64,
}

fn write_manifest(path: &Path, spec: &ExperimentSpec, labels: &[String], records: &[ResultRecord], wall: f64) -> Result<()> {
    let mut files: Vec<String> = labels.iter().map(|l| format!("{l}.csv")).collect();
    files.push("comparison.csv".into());
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        spec,
        files,
        records: records.len(),
        wall_time_s: wall,
    };
    serde_json::to_writer_pretty(File::create(path)?, &manifest)?;
    Ok(())
}

/// Per sweep value, schemes from lowest to highest BER. `<` marks a gap
/// whose 95 % intervals do not overlap, `~` one that is not resolved.
pub fn ordering_summary(spec: &ExperimentSpec, records: &[ResultRecord]) -> Vec<String> {
    spec.sweep
        .values
        .iter()
        .map(|&v| {
            let mut at: Vec<&ResultRecord> = records.iter().filter(|r| r.value == v).collect();
            at.sort_by(|a, b| a.ber.total_cmp(&b.ber));
            let mut line = format!("{} = {v}:", spec.sweep.axis.name());
            for (i, r) in at.iter().enumerate() {
                if i > 0 {
                    line.push_str(if at[i - 1].separated_from(r) { " <" } else { " ~" });
                }
                line.push_str(&format!(" {} ({:.3e})", r.scheme, r.ber));
            }
            line
        })
        .collect()
}
