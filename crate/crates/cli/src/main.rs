use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qlab_core::harness::{
    append_jsonl, run_experiment, summary_table, write_csv, Experiment, ExperimentConfig, Report,
};
use qlab_core::money::{self, Strategy};
use qlab_core::obf::PlainObfuscator;
use qlab_core::simcore::{fidelity, sample_random_state, trial_rng, QuantumState, C64};

#[derive(Parser)]
#[command(
    name = "qlab",
    version,
    about = "Small-n quantum cryptography experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or every config in a JSON-lines file.
    Run(RunArgs),
    /// List the experiments.
    List,
    /// Quantum money operations.
    Money {
        #[command(subcommand)]
        op: MoneyOp,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment name (see `qlab list`).
    experiment: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Read configs from a JSON-lines file instead.
    #[arg(long, conflicts_with = "experiment")]
    config: Option<PathBuf>,
    /// Report destination; JSON lines are appended, CSV is overwritten.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum MoneyOp {
    /// Mint a bill and describe it.
    Mint {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Mint a bill and verify a candidate `w·ψ + (1−w)·random`, normalized.
    Verify {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        weight: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a forging strategy against a fresh bill's verifier.
    Attack {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        q: usize,
        #[arg(long, value_enum, default_value = "random-probe")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    RandomProbe,
    BasisProbe,
    OutOfBand,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qlab: {e}");
            ExitCode::from(2)
        }
    }
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn real_main() -> AnyResult<bool> {
    match Cli::parse().command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<18} {}", e.name(), e.description());
            }
            Ok(true)
        }
        Command::Run(args) => run(args),
        Command::Money { op } => money_op(op).map(|()| true),
    }
}

fn run(args: RunArgs) -> AnyResult<bool> {
    let configs = match (&args.config, &args.experiment) {
        (Some(path), _) => ExperimentConfig::from_json_lines(&std::fs::read_to_string(path)?)?,
        (None, Some(name)) => {
            let mut cfg = ExperimentConfig::new(name.parse()?);
            cfg.n = args.n;
            cfg.trials = args.trials;
            cfg.q = args.q;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            vec![cfg]
        }
        (None, None) => return Err("give an experiment name or --config".into()),
    };
    let reports = configs
        .iter()
        .map(run_experiment)
        .collect::<Result<Vec<Report>, _>>()?;
    print!("{}", summary_table(&reports));
    match (args.format, &args.out) {
        (Format::Json, Some(path)) => append_jsonl(path, &reports)?,
        (Format::Json, None) => {
            let mut out = io::stdout().lock();
            for r in &reports {
                out.write_all(r.to_json_line()?.as_bytes())?;
            }
        }
        (Format::Csv, Some(path)) => write_csv(File::create(path)?, &reports)?,
        (Format::Csv, None) => write_csv(io::stdout().lock(), &reports)?,
    }
    Ok(reports.iter().all(Report::passed))
}

#[derive(Serialize)]
struct MoneyReport {
    op: &'static str,
    n: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    serial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verifier_bytes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accept_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_accept_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
    queries_used: usize,
}

impl MoneyReport {
    fn new(op: &'static str, n: usize, seed: u64) -> Self {
        Self {
            op,
            n,
            seed,
            serial: None,
            verifier_bytes: None,
            q: None,
            accept_prob: None,
            expected_accept_prob: None,
            strategy: None,
            fidelity: None,
            queries_used: 0,
        }
    }
}

fn money_op(op: MoneyOp) -> AnyResult<()> {
    let obf = PlainObfuscator::default();
    let report = match op {
        MoneyOp::Mint { n, seed } => {
            let bill = money::mint(n, &obf, &mut trial_rng(seed, 0))?;
            let mut r = MoneyReport::new("mint", n, seed);
            r.serial = Some(format!("{:016x}", bill.serial()));
            r.verifier_bytes = Some(bill.verifier().size());
            r
        }
        MoneyOp::Verify { n, weight, seed } => {
            let mut rng = trial_rng(seed, 0);
            let mut bill = money::mint(n, &obf, &mut rng)?;
            let noise = sample_random_state(n, &mut rng)?;
            let w = weight.clamp(0.0, 1.0);
            let amps: Vec<C64> = bill
                .note()
                .amplitudes()
                .expect("notes are pure")
                .iter()
                .zip(noise.amplitudes().expect("pure").iter())
                .map(|(a, b)| a * w + b * (1.0 - w))
                .collect();
            let candidate = QuantumState::from_amplitudes_normalized(amps)?;
            let expected = fidelity(bill.note(), &candidate)?;
            let v = money::verify(bill.verifier_mut(), &candidate)?;
            let mut r = MoneyReport::new("verify", n, seed);
            r.accept_prob = Some(v.accept_prob);
            r.expected_accept_prob = Some(expected);
            r.queries_used = 1;
            r
        }
        MoneyOp::Attack {
            n,
            q,
            strategy,
            seed,
        } => {
            let mut rng = trial_rng(seed, 0);
            let bill = money::mint(n, &obf, &mut rng)?;
            let strategy = match strategy {
                StrategyArg::RandomProbe => Strategy::RandomProbe,
                StrategyArg::BasisProbe => Strategy::BasisProbe,
                StrategyArg::OutOfBand => Strategy::OutOfBand(bill.note().clone()),
            };
            let mut oracle = money::verifier_oracle(bill.verifier())?;
            let out =
                money::counterfeit_experiment(&mut oracle, bill.note(), q, &strategy, &mut rng)?;
            let mut r = MoneyReport::new("attack", n, seed);
            r.q = Some(q);
            r.strategy = Some(strategy.name());
            r.fidelity = Some(out.fidelity);
            r.queries_used = out.queries_used;
            r
        }
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}
