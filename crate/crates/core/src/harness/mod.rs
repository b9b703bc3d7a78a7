//! Named, seeded experiments and their reports.
//!
//! An experiment is a pure function of its [`ExperimentConfig`]: trial `i`
//! of a sub-experiment keyed `k` draws from `trial_rng(derive_seed(seed, k), i)`,
//! so any single trial can be replayed on its own. Reports carry no clock
//! readings and serialize byte-identically for identical configs.

mod experiments;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    OtpUniformity,
    PrfRoundtrip,
    IndGame,
    UnobfAttack,
    BlackboxBaseline,
    HomPipeline,
    MoneyVerify,
    MoneyCounterfeit,
    WitencRoundtrip,
    Metrics,
    Determinism,
}

/// Defaults for `n`, `trials` and `q`.
struct Defaults {
    n: usize,
    trials: usize,
    q: usize,
    n_range: (usize, usize),
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::OtpUniformity,
        Experiment::PrfRoundtrip,
        Experiment::IndGame,
        Experiment::UnobfAttack,
        Experiment::BlackboxBaseline,
        Experiment::HomPipeline,
        Experiment::MoneyVerify,
        Experiment::MoneyCounterfeit,
        Experiment::WitencRoundtrip,
        Experiment::Metrics,
        Experiment::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::OtpUniformity => "otp-uniformity",
            Experiment::PrfRoundtrip => "prf-roundtrip",
            Experiment::IndGame => "ind-game",
            Experiment::UnobfAttack => "unobf-attack",
            Experiment::BlackboxBaseline => "blackbox-baseline",
            Experiment::HomPipeline => "hom-pipeline",
            Experiment::MoneyVerify => "money-verify",
            Experiment::MoneyCounterfeit => "money-counterfeit",
            Experiment::WitencRoundtrip => "witenc-roundtrip",
            Experiment::Metrics => "metrics",
            Experiment::Determinism => "determinism",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::OtpUniformity => "uniform Pauli twirl of random plaintexts is I/2^n",
            Experiment::PrfRoundtrip => "GGM-pad scheme decrypts what it encrypts",
            Experiment::IndGame => "game calibration: coin flip, broken scheme, ideal pads",
            Experiment::UnobfAttack => "homomorphic attack separates the two families",
            Experiment::BlackboxBaseline => "q random probes barely beat guessing",
            Experiment::HomPipeline => "gate-by-gate Hom evaluation matches direct application",
            Experiment::MoneyVerify => "kickback acceptance, reuse and the forging baseline",
            Experiment::MoneyCounterfeit => "clone fidelity of naive forgers",
            Experiment::WitencRoundtrip => "completeness and no-instance closeness",
            Experiment::Metrics => "reference values of the distance functions",
            Experiment::Determinism => "every experiment reruns byte-identically",
        }
    }

    fn defaults(self) -> Defaults {
        let d = |n, trials, q, n_range| Defaults {
            n,
            trials,
            q,
            n_range,
        };
        match self {
            Experiment::OtpUniformity => d(3, 20, 0, (1, 5)),
            Experiment::PrfRoundtrip => d(3, 200, 0, (1, 8)),
            Experiment::IndGame => d(3, 10_000, 0, (1, 6)),
            Experiment::UnobfAttack => d(2, 200, 2, (1, 2)),
            Experiment::BlackboxBaseline => d(8, 5000, 8, (1, 16)),
            Experiment::HomPipeline => d(2, 24, 8, (1, 3)),
            Experiment::MoneyVerify => d(4, 100, 16, (1, 5)),
            Experiment::MoneyCounterfeit => d(6, 500, 16, (1, 6)),
            Experiment::WitencRoundtrip => d(3, 20, 0, (2, 4)),
            Experiment::Metrics => d(1, 1, 0, (1, 1)),
            Experiment::Determinism => d(1, 1, 0, (1, 1)),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_owned()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Threshold overrides, keyed by check name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    /// Wall-clock ceiling; exceeding it turns the run into an error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            n: None,
            trials: None,
            q: None,
            seed: DEFAULT_SEED,
            tolerances: BTreeMap::new(),
            max_seconds: None,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_q(mut self, q: usize) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, check: &str, threshold: f64) -> Self {
        self.tolerances.insert(check.to_owned(), threshold);
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One config per non-empty line.
    pub fn from_json_lines(s: &str) -> Result<Vec<Self>> {
        s.lines()
            .filter(|l| !l.trim().is_empty())
            .map(Self::from_json)
            .collect()
    }

    /// The config with every default filled in, after validation.
    pub fn resolved(&self) -> Result<Self> {
        let d = self.experiment.defaults();
        let n = self.n.unwrap_or(d.n);
        if n < d.n_range.0 || n > d.n_range.1 {
            return Err(Error::InvalidConfig(format!(
                "{}: n = {n} outside {}..={}",
                self.experiment, d.n_range.0, d.n_range.1
            )));
        }
        let trials = self.trials.unwrap_or(d.trials);
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {k} = {v} is not finite"
            )));
        }
        Ok(Self {
            n: Some(n),
            trials: Some(trials),
            q: Some(self.q.unwrap_or(d.q)),
            ..self.clone()
        })
    }

    pub(crate) fn n(&self) -> usize {
        self.n.expect("resolved config")
    }

    pub(crate) fn trials(&self) -> usize {
        self.trials.expect("resolved config")
    }

    pub(crate) fn q(&self) -> usize {
        self.q.expect("resolved config")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One trial-level measurement, exported as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub label: String,
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json_line(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Collects metrics, checks and rows while an experiment runs.
pub(crate) struct Findings<'a> {
    tolerances: &'a BTreeMap<String, f64>,
    metrics: BTreeMap<String, f64>,
    checks: Vec<Check>,
    rows: Vec<TrialRow>,
}

impl<'a> Findings<'a> {
    fn new(tolerances: &'a BTreeMap<String, f64>) -> Self {
        Self {
            tolerances,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub(crate) fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_owned(), value);
    }

    pub(crate) fn row(&mut self, label: &str, index: usize, value: f64) {
        self.rows.push(TrialRow {
            label: label.to_owned(),
            index,
            value,
        });
    }

    fn check(&mut self, name: &str, value: f64, relation: Relation, default: f64) {
        let threshold = self.tolerances.get(name).copied().unwrap_or(default);
        let pass = match relation {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        };
        self.metric(name, value);
        self.checks.push(Check {
            name: name.to_owned(),
            value,
            relation,
            threshold,
            pass,
        });
    }

    pub(crate) fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        self.check(name, value, Relation::AtMost, threshold);
    }

    pub(crate) fn at_least(&mut self, name: &str, value: f64, threshold: f64) {
        self.check(name, value, Relation::AtLeast, threshold);
    }
}

/// Runs one experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let cfg = cfg.resolved()?;
    let start = Instant::now();
    let mut f = Findings::new(&cfg.tolerances);
    experiments::dispatch(&cfg, &mut f)?;
    let elapsed = start.elapsed().as_secs_f64();
    if let Some(limit) = cfg.max_seconds {
        if elapsed > limit {
            return Err(Error::RuntimeExceeded { elapsed, limit });
        }
    }
    let Findings {
        metrics,
        checks,
        rows,
        ..
    } = f;
    let verdict = if !checks.is_empty() && checks.iter().all(|c| c.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Report {
        experiment: cfg.experiment,
        config: cfg,
        metrics,
        checks,
        verdict,
        rows,
    })
}

/// Appends reports to a JSON-lines file.
pub fn append_jsonl(path: &Path, reports: &[Report]) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    for r in reports {
        file.write_all(r.to_json_line()?.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    seed: u64,
    label: &'a str,
    index: usize,
    value: f64,
}

/// Trial-level rows of every report as CSV.
pub fn write_csv<W: Write>(out: W, reports: &[Report]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        for row in &r.rows {
            w.serialize(CsvRow {
                experiment: r.experiment.name(),
                seed: r.config.seed,
                label: &row.label,
                index: row.index,
                value: row.value,
            })
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width summary: one line per check.
pub fn summary_table(reports: &[Report]) -> String {
    let mut s = format!(
        "{:<18} {:<28} {:>14} {:>2} {:>14}  {}\n",
        "experiment", "check", "value", "", "threshold", "result"
    );
    for r in reports {
        for c in &r.checks {
            s.push_str(&format!(
                "{:<18} {:<28} {:>14.6e} {:>2} {:>14.6e}  {}\n",
                r.experiment.name(),
                c.name,
                c.value,
                c.relation,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
        assert!(matches!(
            "grover".parse::<Experiment>(),
            Err(Error::UnknownExperiment(_))
        ));
    }

    #[test]
    fn config_parsing_rejects_unknowns() {
        let ok =
            ExperimentConfig::from_json(r#"{"experiment":"ind-game","n":2,"seed":7}"#).unwrap();
        assert_eq!(ok.experiment, Experiment::IndGame);
        assert_eq!(ok.seed, 7);
        assert!(ExperimentConfig::from_json(r#"{"experiment":"teleport"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"metrics","colour":1}"#).is_err());
        let default_seed = ExperimentConfig::from_json(r#"{"experiment":"metrics"}"#).unwrap();
        assert_eq!(default_seed.seed, DEFAULT_SEED);
    }

    #[test]
    fn resolution_fills_and_validates() {
        let r = ExperimentConfig::new(Experiment::BlackboxBaseline)
            .resolved()
            .unwrap();
        assert_eq!((r.n(), r.trials(), r.q()), (8, 5000, 8));
        assert!(ExperimentConfig::new(Experiment::UnobfAttack)
            .with_n(3)
            .resolved()
            .is_err());
        assert!(ExperimentConfig::new(Experiment::Metrics)
            .with_trials(0)
            .resolved()
            .is_err());
    }

    #[test]
    fn tolerance_override_flips_verdict() {
        let cfg = ExperimentConfig::new(Experiment::Metrics);
        assert!(run_experiment(&cfg).unwrap().passed());
        let strict = cfg.with_tolerance("channel_x_vs_i", 1.5);
        let r = run_experiment(&strict).unwrap();
        assert!(!r.passed());
        assert_eq!(r.check("channel_x_vs_i").unwrap().threshold, 1.5);
    }

    #[test]
    fn report_serialization_is_stable() {
        let cfg = ExperimentConfig::new(Experiment::OtpUniformity)
            .with_n(1)
            .with_trials(2);
        let a = run_experiment(&cfg).unwrap().to_json_line().unwrap();
        let b = run_experiment(&cfg).unwrap().to_json_line().unwrap();
        assert_eq!(a, b);
        let back: Report = serde_json::from_str(a.trim()).unwrap();
        assert_eq!(back.config, cfg.resolved().unwrap());
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let cfg = ExperimentConfig::new(Experiment::PrfRoundtrip)
            .with_n(1)
            .with_trials(3);
        let r = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + r.rows.len());
        assert!(text.starts_with("experiment,seed,label,index,value"));
    }

    #[test]
    fn tiny_ceiling_is_an_error() {
        let mut cfg = ExperimentConfig::new(Experiment::PrfRoundtrip).with_trials(50);
        cfg.max_seconds = Some(0.0);
        assert!(matches!(
            run_experiment(&cfg),
            Err(Error::RuntimeExceeded { .. })
        ));
    }
}
