//! Batch front end: configuration, experiment runs, figure sweeps and
//! offline analysis of shot files.

pub mod config;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::par::Execution;
use crate::protocol::{
    estimate_expectations, sample_family, ExpectationSet, FamilyKind, SettingFamily,
    ShotAllocation, ShotRecord, RNG_CONTRACT,
};
use crate::witness::{evaluate, DetectionReport};

pub use config::{
    parse_angle, parse_experiment, parse_sweep, witness_family, ExperimentConfig,
    ExperimentOverrides, Mode, Preset, Protocol, SweepConfig, SweepOverrides, WitnessChoice,
};
pub use sweep::{sweep, sweep_header};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingSeed {
    pub setting: String,
    pub seed: u64,
    pub shots: usize,
}

/// JSON report written by `run` and `analyze`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub rng: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    #[serde(flatten)]
    pub detection: DetectionReport,
    pub verdict: String,
    pub degenerate: bool,
    pub seeds: Vec<SettingSeed>,
}

impl Report {
    fn new(
        config: Option<ExperimentConfig>,
        detection: DetectionReport,
        records: &[ShotRecord],
    ) -> Self {
        Report {
            version: VERSION.to_string(),
            rng: RNG_CONTRACT.to_string(),
            config,
            verdict: detection.verdict().to_string(),
            degenerate: detection.degenerate(),
            detection,
            seeds: records
                .iter()
                .map(|r| SettingSeed {
                    setting: r.setting.name(),
                    seed: r.seed,
                    shots: r.shots(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub struct RunOutput {
    pub report: Report,
    /// Empty in exact mode.
    pub records: Vec<ShotRecord>,
}

fn setting_kind(protocol: Protocol) -> FamilyKind {
    match protocol {
        Protocol::Efficient => FamilyKind::Efficient,
        Protocol::Full | Protocol::Baseline => FamilyKind::Full,
    }
}

/// Shots for every setting of the configured protocol.
pub fn sample(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<ShotRecord>> {
    let state = cfg.state()?;
    let (shots, seed) = match cfg.mode {
        Mode::Sampled { shots, seed } => (shots, seed),
        Mode::Exact => (10_000, 0),
    };
    let family = SettingFamily {
        kind: setting_kind(cfg.protocol),
        n: cfg.n,
    };
    sample_family(&state, &family, &ShotAllocation::Equal(shots), seed, exec)
}

/// Builds the state, obtains expectations (exact or sampled) and evaluates
/// the configured witness.
pub fn run(cfg: &ExperimentConfig, exec: Execution) -> Result<RunOutput> {
    let family = cfg.family();
    let (es, records) = match cfg.mode {
        Mode::Exact => (
            ExpectationSet::exact_family(&cfg.state()?, setting_kind(cfg.protocol))?,
            Vec::new(),
        ),
        Mode::Sampled { .. } => {
            let records = sample(cfg, exec)?;
            (estimate_expectations(&records)?, records)
        }
    };
    let detection = evaluate(family, &es, cfg.significance)?;
    Ok(RunOutput {
        report: Report::new(Some(cfg.clone()), detection, &records),
        records,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct AnalyzeOptions {
    pub witness: WitnessChoice,
    /// Evaluate the plain GHZ witness instead of an adaptive one.
    pub baseline: bool,
    pub significance: f64,
}

/// Estimates expectations from shot records and evaluates the witness;
/// the setting family is inferred from the setting names present.
pub fn analyze(records: &[ShotRecord], opts: AnalyzeOptions) -> Result<Report> {
    let es = estimate_expectations(records)?;
    let protocol = if opts.baseline {
        Protocol::Baseline
    } else {
        match es.detect_family()? {
            FamilyKind::Full => Protocol::Full,
            FamilyKind::Efficient => Protocol::Efficient,
        }
    };
    let detection = evaluate(
        witness_family(protocol, opts.witness),
        &es,
        opts.significance,
    )?;
    Ok(Report::new(None, detection, records))
}
