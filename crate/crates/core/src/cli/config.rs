//! TOML experiment and sweep configuration.
//!
//! ```toml
//! n = 4
//! theta = "pi/4"        # radians, or a multiple of pi
//! phi = 0.9
//! p = 0.1
//! protocol = "full"     # full | efficient | baseline
//! witness = "phi"       # phi | phi-theta
//! mode = "sampled"      # exact | sampled
//! shots = 10000         # per setting
//! seed = 42
//! significance = 3.0
//!
//! [output]
//! report = "report.json"
//! shots = "shots.jsonl"
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::ops::Range;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::state::{CoherentParams, PreparedState};
use crate::witness::{WitnessFamily, DEFAULT_SIGNIFICANCE};

/// Parses radians, optionally as a multiple of π: `"pi/4"`, `"-pi"`,
/// `"3pi/4"`, `"0.5*pi"`, `"1.2"`.
pub fn parse_angle(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim().to_ascii_lowercase().replace('π', "pi");
    let bad = || format!("cannot parse angle \"{text}\"");
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let coeff = t[..at].trim().trim_end_matches('*').trim();
    let coeff = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let rest = t[at + 2..].trim();
    let div = match rest.strip_prefix('/') {
        Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    if div == 0.0 {
        return Err(bad());
    }
    Ok(coeff * PI / div)
}

/// An angle written as a number or a string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum AngleValue {
    Float(f64),
    Int(i64),
    Text(String),
}

impl AngleValue {
    fn radians(&self) -> std::result::Result<f64, String> {
        match self {
            AngleValue::Float(x) => Ok(*x),
            AngleValue::Int(i) => Ok(*i as f64),
            AngleValue::Text(s) => parse_angle(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Full,
    Efficient,
    Baseline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessChoice {
    /// Adapt the phase only.
    Phi,
    /// Adapt phase and amplitude angle.
    PhiTheta,
}

pub fn witness_family(protocol: Protocol, witness: WitnessChoice) -> WitnessFamily {
    match (protocol, witness) {
        (Protocol::Baseline, _) => WitnessFamily::BaselineGhz,
        (Protocol::Full, WitnessChoice::Phi) => WitnessFamily::FullFidelityPhi,
        (Protocol::Full, WitnessChoice::PhiTheta) => WitnessFamily::FullFidelityPhiTheta,
        (Protocol::Efficient, WitnessChoice::Phi) => WitnessFamily::EfficientPhi,
        (Protocol::Efficient, WitnessChoice::PhiTheta) => WitnessFamily::EfficientPhiTheta,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled { shots: usize, seed: u64 },
}

/// Fully resolved experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub theta: f64,
    pub phi: f64,
    pub p: f64,
    pub protocol: Protocol,
    pub witness: WitnessChoice,
    pub mode: Mode,
    pub significance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn family(&self) -> WitnessFamily {
        witness_family(self.protocol, self.witness)
    }

    pub fn state(&self) -> Result<PreparedState> {
        PreparedState::new(self.n, CoherentParams::new(self.theta, self.phi)?, self.p)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    report: Option<PathBuf>,
    shots: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    n: Option<Spanned<usize>>,
    theta: Option<Spanned<AngleValue>>,
    phi: Option<Spanned<AngleValue>>,
    p: Option<Spanned<f64>>,
    protocol: Option<Spanned<Protocol>>,
    witness: Option<Spanned<WitnessChoice>>,
    mode: Option<Spanned<String>>,
    shots: Option<Spanned<usize>>,
    seed: Option<Spanned<u64>>,
    significance: Option<Spanned<f64>>,
    #[serde(default)]
    output: RawOutput,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOverrides {
    pub n: Option<usize>,
    pub theta: Option<String>,
    pub phi: Option<String>,
    pub p: Option<f64>,
    pub protocol: Option<Protocol>,
    pub witness: Option<WitnessChoice>,
    pub mode: Option<String>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub significance: Option<f64>,
    pub report: Option<PathBuf>,
    pub shots_out: Option<PathBuf>,
}

/// Maps byte offsets to 1-based line numbers.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn key_at(&self, span: &Range<usize>) -> String {
        let start = span.start.min(self.text.len());
        let line_start = self.text[..start].rfind('\n').map_or(0, |i| i + 1);
        let line = self.text[line_start..].lines().next().unwrap_or("");
        match line.split_once('=') {
            Some((key, _)) => key.trim().to_string(),
            None => line
                .trim()
                .trim_matches(|c| c == '[' || c == ']')
                .to_string(),
        }
    }

    fn parse<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        toml::from_str(self.text).map_err(|e| {
            let span = e.span().unwrap_or(0..0);
            let message = e.message().trim().to_string();
            let field = unknown_field(&message).unwrap_or_else(|| self.key_at(&span));
            Error::Config {
                field,
                line: self.line(span),
                message,
            }
        })
    }

    fn field_error<T>(
        &self,
        field: &str,
        spanned: &Spanned<T>,
        message: impl Into<String>,
    ) -> Error {
        Error::Config {
            field: field.to_string(),
            line: self.line(spanned.span()),
            message: message.into(),
        }
    }
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn flag_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        line: 0,
        message: message.into(),
    }
}

fn resolve_angle(
    src: &Source,
    field: &str,
    flag: Option<&String>,
    file: Option<&Spanned<AngleValue>>,
    default: f64,
) -> Result<f64> {
    if let Some(text) = flag {
        return parse_angle(text).map_err(|m| flag_error(field, m));
    }
    match file {
        Some(v) => v
            .get_ref()
            .radians()
            .map_err(|m| src.field_error(field, v, m)),
        None => Ok(default),
    }
}

/// Parses `text` (possibly empty) and applies `overrides`. Lines are
/// reported for file values; flag errors carry line 0.
pub fn parse_experiment(text: &str, overrides: &ExperimentOverrides) -> Result<ExperimentConfig> {
    let src = Source { text };
    let raw: RawExperiment = src.parse()?;
    let pick = |flag: Option<usize>, file: &Option<Spanned<usize>>| {
        flag.or(file.as_ref().map(|s| *s.get_ref()))
    };

    let n = pick(overrides.n, &raw.n).unwrap_or(4);
    if n < 2 {
        let e = "need at least 2 qubits";
        return Err(match (&overrides.n, &raw.n) {
            (None, Some(s)) => src.field_error("n", s, e),
            _ => flag_error("n", e),
        });
    }
    let theta = resolve_angle(
        &src,
        "theta",
        overrides.theta.as_ref(),
        raw.theta.as_ref(),
        FRAC_PI_4,
    )?;
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
        let e = format!("theta = {theta} must lie in [0, pi/2]");
        return Err(match (&overrides.theta, &raw.theta) {
            (None, Some(s)) => src.field_error("theta", s, e),
            _ => flag_error("theta", e),
        });
    }
    let phi = resolve_angle(&src, "phi", overrides.phi.as_ref(), raw.phi.as_ref(), 0.0)?;
    let p = overrides
        .p
        .or(raw.p.as_ref().map(|s| *s.get_ref()))
        .unwrap_or(0.0);
    if !(0.0..=1.0).contains(&p) {
        let e = format!("p = {p} must lie in [0, 1]");
        return Err(match (&overrides.p, &raw.p) {
            (None, Some(s)) => src.field_error("p", s, e),
            _ => flag_error("p", e),
        });
    }
    let protocol = overrides
        .protocol
        .or(raw.protocol.map(|s| s.into_inner()))
        .unwrap_or(Protocol::Full);
    let witness = overrides
        .witness
        .or(raw.witness.map(|s| s.into_inner()))
        .unwrap_or(WitnessChoice::Phi);
    let significance = overrides
        .significance
        .or(raw.significance.as_ref().map(|s| *s.get_ref()))
        .unwrap_or(DEFAULT_SIGNIFICANCE);
    if !(significance >= 0.0 && significance.is_finite()) {
        return Err(match (&overrides.significance, &raw.significance) {
            (None, Some(s)) => src.field_error("significance", s, "must be a non-negative number"),
            _ => flag_error("significance", "must be a non-negative number"),
        });
    }

    let mode_name = match (&overrides.mode, &raw.mode) {
        (Some(m), _) => m.clone(),
        (None, Some(m)) => m.get_ref().clone(),
        (None, None) => "exact".to_string(),
    };
    let mode = match mode_name.as_str() {
        "exact" => Mode::Exact,
        "sampled" => {
            let shots = pick(overrides.shots, &raw.shots).unwrap_or(10_000);
            if shots == 0 {
                return Err(match (&overrides.shots, &raw.shots) {
                    (None, Some(s)) => {
                        src.field_error("shots", s, "sampled mode needs at least one shot")
                    }
                    _ => flag_error("shots", "sampled mode needs at least one shot"),
                });
            }
            let seed = overrides
                .seed
                .or(raw.seed.as_ref().map(|s| *s.get_ref()))
                .unwrap_or(0);
            Mode::Sampled { shots, seed }
        }
        other => {
            let e = format!("unknown mode \"{other}\"; expected exact or sampled");
            return Err(match (&overrides.mode, &raw.mode) {
                (None, Some(s)) => src.field_error("mode", s, e),
                _ => flag_error("mode", e),
            });
        }
    };

    Ok(ExperimentConfig {
        n,
        theta,
        phi,
        p,
        protocol,
        witness,
        mode,
        significance,
        report_path: overrides.report.clone().or(raw.output.report),
        shots_path: overrides.shots_out.clone().or(raw.output.shots),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "fig4-5")]
    Fig45,
    #[serde(rename = "tolerance-map")]
    ToleranceMap,
    #[serde(rename = "custom")]
    Custom,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fig3" => Ok(Preset::Fig3),
            "fig4-5" => Ok(Preset::Fig45),
            "tolerance-map" => Ok(Preset::ToleranceMap),
            "custom" => Ok(Preset::Custom),
            _ => Err(format!(
                "unknown preset \"{s}\"; expected fig3, fig4-5, tolerance-map or custom"
            )),
        }
    }
}

/// Grid of values for one swept variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub values: Vec<f64>,
}

impl Axis {
    pub fn range(from: f64, to: f64, steps: usize) -> Self {
        let values = (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect();
        Axis { values }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    from: Option<AngleValue>,
    to: Option<AngleValue>,
    steps: Option<usize>,
    values: Option<Vec<AngleValue>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    preset: Option<Spanned<String>>,
    n: Option<Spanned<usize>>,
    bisect: Option<bool>,
    theta: Option<Spanned<RawAxis>>,
    phi: Option<Spanned<RawAxis>>,
    families: Option<Spanned<Vec<String>>>,
    output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub preset: Preset,
    pub n: usize,
    pub theta: Axis,
    pub phi: Axis,
    /// Witness families for the custom preset.
    pub families: Vec<WitnessFamily>,
    /// Adds a column of thresholds found by bisection on exact expectations.
    pub bisect: bool,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOverrides {
    pub preset: Option<Preset>,
    pub n: Option<usize>,
    pub bisect: bool,
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn preset(preset: Preset, n: usize) -> Self {
        let (theta, phi) = match preset {
            Preset::Fig3 => (
                Axis {
                    values: vec![FRAC_PI_4, PI / 6.0, PI / 12.0],
                },
                Axis::range(-FRAC_PI_2, FRAC_PI_2, 61),
            ),
            Preset::Fig45 => (Axis::range(0.0, FRAC_PI_2, 161), Axis { values: vec![0.0] }),
            Preset::ToleranceMap => (Axis::range(0.0, FRAC_PI_2, 31), Axis::range(-PI, PI, 37)),
            Preset::Custom => (Axis::range(0.0, FRAC_PI_2, 11), Axis { values: vec![0.0] }),
        };
        SweepConfig {
            preset,
            n,
            theta,
            phi,
            families: WitnessFamily::ALL.to_vec(),
            bisect: false,
            output: None,
        }
    }
}

fn family_from_name(name: &str) -> Option<WitnessFamily> {
    WitnessFamily::ALL
        .into_iter()
        .find(|f| f.name().eq_ignore_ascii_case(name))
}

fn resolve_axis(src: &Source, field: &str, raw: &Spanned<RawAxis>) -> Result<Axis> {
    let err = |m: String| src.field_error(field, raw, m);
    let a = raw.get_ref();
    if let Some(values) = &a.values {
        if a.from.is_some() || a.to.is_some() || a.steps.is_some() {
            return Err(err("give either values or from/to/steps".into()));
        }
        if values.is_empty() {
            return Err(err("empty value list".into()));
        }
        let values = values
            .iter()
            .map(|v| v.radians())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(err)?;
        return Ok(Axis { values });
    }
    let (Some(from), Some(to)) = (&a.from, &a.to) else {
        return Err(err("range needs from and to".into()));
    };
    let from = from.radians().map_err(err)?;
    let to = to.radians().map_err(err)?;
    let steps = a.steps.unwrap_or(2);
    if steps < 2 {
        return Err(err(format!("steps = {steps}; need at least 2")));
    }
    if from >= to || from.is_nan() || to.is_nan() {
        return Err(err(format!(
            "empty range: from {from} is not below to {to}"
        )));
    }
    Ok(Axis::range(from, to, steps))
}

pub fn parse_sweep(text: &str, overrides: &SweepOverrides) -> Result<SweepConfig> {
    let src = Source { text };
    let raw: RawSweep = src.parse()?;
    let preset = match (overrides.preset, &raw.preset) {
        (Some(p), _) => p,
        (None, Some(s)) => s
            .get_ref()
            .parse()
            .map_err(|m: String| src.field_error("preset", s, m))?,
        (None, None) => Preset::Fig45,
    };
    let n = overrides
        .n
        .or(raw.n.as_ref().map(|s| *s.get_ref()))
        .unwrap_or(8);
    if n < 2 {
        return Err(match (&overrides.n, &raw.n) {
            (None, Some(s)) => src.field_error("n", s, "need at least 2 qubits"),
            _ => flag_error("n", "need at least 2 qubits"),
        });
    }
    let mut cfg = SweepConfig::preset(preset, n);
    if let Some(t) = &raw.theta {
        cfg.theta = resolve_axis(&src, "theta", t)?;
        if let Some(bad) = cfg
            .theta
            .values
            .iter()
            .find(|v| !(0.0..=FRAC_PI_2 + 1e-12).contains(*v))
        {
            return Err(src.field_error(
                "theta",
                t,
                format!("theta = {bad} must lie in [0, pi/2]"),
            ));
        }
    }
    if let Some(ph) = &raw.phi {
        cfg.phi = resolve_axis(&src, "phi", ph)?;
    }
    if let Some(fams) = &raw.families {
        cfg.families = fams
            .get_ref()
            .iter()
            .map(|name| {
                family_from_name(name).ok_or_else(|| {
                    src.field_error(
                        "families",
                        fams,
                        format!("unknown witness family \"{name}\""),
                    )
                })
            })
            .collect::<Result<_>>()?;
        if cfg.families.is_empty() {
            return Err(src.field_error("families", fams, "empty family list"));
        }
    }
    cfg.bisect = overrides.bisect || raw.bisect.unwrap_or(false);
    cfg.output = overrides.output.clone().or(raw.output);
    Ok(cfg)
}
