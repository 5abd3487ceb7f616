use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coop_harness::checks::selftest;
use coop_harness::fixtures::write_fixtures;
use coop_harness::spec::extract_overrides;
use coop_harness::{ordering_summary, run_experiment, ExperimentSpec, HarnessError, ResultRecord, Scheme};

/// Cooperative DS-CDMA Monte-Carlo simulator.
///
/// Any spec key can be overridden with a dotted flag, e.g.
/// `--network.users=4` or `--sim.genie_relays true`.
#[derive(Parser)]
#[command(name = "coopsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment spec.
    Run(RunArgs),
    /// Run several schemes on the same grid and print their ordering.
    Compare(RunArgs),
    /// Run the invariant suites.
    Selftest {
        /// Smaller instance counts.
        #[arg(long)]
        quick: bool,
    },
    /// Write golden test vectors.
    DumpFixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML spec; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated schemes replacing the spec's list, e.g.
    /// `ncis,cis,jpais_gbc:g3`.
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<Scheme>,
}

impl RunArgs {
    fn spec(&self, overrides: &[(String, String)]) -> Result<ExperimentSpec, HarnessError> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut spec = ExperimentSpec::parse(&text, overrides)?;
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if let Some(o) = &self.out {
            spec.output = o.clone();
        }
        if !self.schemes.is_empty() {
            spec.schemes = self.schemes.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn print_records(records: &[ResultRecord]) {
    println!("{:<22} {:>10} {:>11} {:>23} {:>8}", "scheme", "value", "ber", "95% interval", "packets");
    for r in records {
        println!(
            "{:<22} {:>10} {:>11.4e} [{:.3e}, {:.3e}] {:>8}",
            r.scheme, r.value, r.ber, r.ber_low, r.ber_high, r.packets
        );
    }
}

fn run(command: Command, overrides: &[(String, String)]) -> Result<ExitCode, HarnessError> {
    if !overrides.is_empty() && !matches!(command, Command::Run(_) | Command::Compare(_)) {
        return Err(HarnessError::Config("dotted overrides only apply to run and compare".into()));
    }
    match command {
        Command::Run(args) => {
            let spec = args.spec(overrides)?;
            let records = run_experiment(&spec, Some(&spec.output))?;
            print_records(&records);
            eprintln!("results in {}", spec.output.display());
        }
        Command::Compare(args) => {
            let spec = args.spec(overrides)?;
            if spec.schemes.len() < 2 {
                return Err(HarnessError::Config("compare needs at least two schemes".into()));
            }
            let records = run_experiment(&spec, Some(&spec.output))?;
            print_records(&records);
            for line in ordering_summary(&spec, &records) {
                println!("{line}");
            }
            eprintln!("results in {}", spec.output.display());
        }
        Command::Selftest { quick } => {
            let outcomes = selftest(quick)?;
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(ExitCode::from(3));
            }
        }
        Command::DumpFixtures { out } => {
            for f in write_fixtures(&out)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let (args, overrides) = match extract_overrides(std::env::args()) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command, &overrides) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
