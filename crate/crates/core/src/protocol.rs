//! Local measurement-setting families, the Fourier decomposition of the
//! GHZ coherences, seeded shot sampling and estimation from shot data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::state::{diagonal_stats, expectation_exact, DiagonalStats};
use crate::state::{outcome, outcome_distribution, MeasurementSetting, PreparedState, SettingKind};
use crate::C64;

/// Identifies the sampling stream contract recorded in reports.
pub const RNG_CONTRACT: &str = "chacha8-seed_from_u64/stream-per-setting/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// `σz^⊗n` plus the `n+1` XY products.
    Full,
    /// `σz^⊗n`, `σx^⊗n`, `σy⊗σx^⊗(n-1)`.
    Efficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SettingFamily {
    pub kind: FamilyKind,
    pub n: usize,
}

impl SettingFamily {
    pub fn full(n: usize) -> Self {
        SettingFamily {
            kind: FamilyKind::Full,
            n,
        }
    }

    pub fn efficient(n: usize) -> Self {
        SettingFamily {
            kind: FamilyKind::Efficient,
            n,
        }
    }

    pub fn settings(&self) -> Result<Vec<MeasurementSetting>> {
        let n = self.n;
        if n < 2 {
            return Err(Error::InvalidSize { n, min: 2 });
        }
        Ok(match self.kind {
            FamilyKind::Full => std::iter::once(MeasurementSetting::z(n))
                .chain((0..=n).map(|k| MeasurementSetting::xy(n, k)))
                .collect(),
            FamilyKind::Efficient => {
                vec![
                    MeasurementSetting::z(n),
                    MeasurementSetting::x_all(n),
                    MeasurementSetting::yx_rest(n),
                ]
            }
        })
    }
}

/// Coefficients expressing the GHZ coherence operators `X_±` in terms of the
/// XY-product settings: `X_+ = Σ_k c_plus[k]·M_k`, `X_- = Σ_k c_minus[k]·M_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCoefficients {
    pub n: usize,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    /// Discrete Fourier transform of `[1, 0, …, 0, 1]` over string weight.
    pub f_plus: Vec<C64>,
    /// Discrete Fourier transform of `[1, 0, …, 0, -1]` over string weight.
    pub f_minus: Vec<C64>,
}

impl DecompositionCoefficients {
    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * PI / (self.n + 1) as f64
    }

    /// Real coefficients recovered from the complex transform through the
    /// phase `e^{i n θ_k}` that relates the shifted and plain settings.
    pub fn reduced_from_transform(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        (0..=self.n)
            .map(|k| {
                let shift = C64::from_polar(1.0, n * self.angle(k));
                let plus = 0.5 * self.f_plus[k] * shift;
                let minus = self.f_minus[k] * shift / C64::new(0.0, 2.0);
                (plus.re, minus.re)
            })
            .unzip()
    }
}

pub fn dft_coefficients(n: usize) -> Result<DecompositionCoefficients> {
    if n < 1 {
        return Err(Error::InvalidSize { n, min: 1 });
    }
    let m = (n + 1) as f64;
    let mut coeffs = DecompositionCoefficients {
        n,
        c_plus: Vec::with_capacity(n + 1),
        c_minus: Vec::with_capacity(n + 1),
        f_plus: Vec::with_capacity(n + 1),
        f_minus: Vec::with_capacity(n + 1),
    };
    for k in 0..=n {
        let theta = k as f64 * PI / m;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.c_plus.push(sign * theta.cos() / m);
        coeffs.c_minus.push(-sign * theta.sin() / m);
        let twiddle = C64::from_polar(1.0, -2.0 * PI * (k * n) as f64 / m);
        coeffs.f_plus.push((C64::new(1.0, 0.0) + twiddle) / m);
        coeffs.f_minus.push((C64::new(1.0, 0.0) - twiddle) / m);
    }
    Ok(coeffs)
}

/// Shots of one setting, packed per [`crate::state::outcome`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub setting: MeasurementSetting,
    pub seed: u64,
    words_per_shot: usize,
    data: Vec<u64>,
}

impl ShotRecord {
    pub fn from_strings(
        setting: MeasurementSetting,
        seed: u64,
        outcomes: &[String],
    ) -> Result<Self> {
        let n = setting.n;
        let words_per_shot = outcome::words_for(n);
        let mut data = Vec::with_capacity(outcomes.len() * words_per_shot);
        for (i, s) in outcomes.iter().enumerate() {
            if s.chars().count() != n {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("outcome {i} has length {} but n = {n}", s.chars().count()),
                });
            }
            data.extend(outcome::encode(s)?);
        }
        Ok(ShotRecord {
            setting,
            seed,
            words_per_shot,
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.setting.n
    }

    pub fn shots(&self) -> usize {
        self.data.len() / self.words_per_shot
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &[u64]> {
        self.data.chunks_exact(self.words_per_shot)
    }

    pub fn outcome_strings(&self) -> Vec<String> {
        self.outcomes()
            .map(|w| outcome::decode(w, self.n()))
            .collect()
    }
}

/// Per-setting seed derived from the master seed: the first word of the
/// ChaCha8 stream numbered `index + 1` under the master key.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64 + 1);
    rng.next_u64()
}

/// Draws `shots` i.i.d. outcomes of `setting` on `state`.
pub fn sample_shots(
    state: &PreparedState,
    setting: &MeasurementSetting,
    shots: usize,
    seed: u64,
) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let dist = outcome_distribution(state, setting)?;
    let words_per_shot = outcome::words_for(setting.n);
    let mut data = vec![0u64; shots * words_per_shot];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for chunk in data.chunks_exact_mut(words_per_shot) {
        dist.sample_into(&mut rng, chunk);
    }
    Ok(ShotRecord {
        setting: *setting,
        seed,
        words_per_shot,
        data,
    })
}

/// How many shots each setting of a family receives.
#[derive(Clone, Debug, PartialEq)]
pub enum ShotAllocation {
    Equal(usize),
    /// One count per setting, in family order.
    PerSetting(Vec<usize>),
}

/// Samples every setting of `family` with per-setting seeds
/// `derive_seed(master_seed, index)`. Settings are independent, so they may
/// be sampled concurrently.
pub fn sample_family(
    state: &PreparedState,
    family: &SettingFamily,
    allocation: &ShotAllocation,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<ShotRecord>> {
    let settings = family.settings()?;
    let counts = match allocation {
        ShotAllocation::Equal(s) => vec![*s; settings.len()],
        ShotAllocation::PerSetting(v) => {
            if v.len() != settings.len() {
                return Err(Error::DimensionMismatch {
                    expected: settings.len(),
                    found: v.len(),
                });
            }
            v.clone()
        }
    };
    let jobs: Vec<(usize, MeasurementSetting, usize)> = settings
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (s, c))| (i, s, c))
        .collect();
    exec.map(&jobs, |(i, s, count)| {
        sample_shots(state, s, *count, derive_seed(master_seed, *i))
    })
    .into_iter()
    .collect()
}

#[derive(Serialize, Deserialize)]
struct ShotLine {
    setting: String,
    n: usize,
    seed: u64,
    outcomes: Vec<String>,
}

/// One JSON object per record and line.
pub fn write_jsonl<W: Write>(records: &[ShotRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = ShotLine {
            setting: r.setting.name(),
            n: r.n(),
            seed: r.seed,
            outcomes: r.outcome_strings(),
        };
        let json = serde_json::to_string(&line).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{json}")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<ShotRecord>> {
    let mut records = Vec::new();
    let mut n_seen: Option<usize> = None;
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ShotLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        match n_seen {
            Some(n) if n != parsed.n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: parsed.n,
                })
            }
            _ => n_seen = Some(parsed.n),
        }
        let kind: SettingKind = parsed.setting.parse()?;
        let setting = MeasurementSetting::new(kind, parsed.n).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let record = ShotRecord::from_strings(setting, parsed.seed, &parsed.outcomes).map_err(
            |e| match e {
                Error::Parse { message, .. } => Error::Parse {
                    line: lineno,
                    message,
                },
                other => other,
            },
        )?;
        records.push(record);
    }
    Ok(records)
}

/// A scalar estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingEstimate {
    pub value: f64,
    pub std_err: f64,
    /// Zero marks an exact value.
    pub shots: usize,
}

impl SettingEstimate {
    pub fn exact(value: f64) -> Self {
        SettingEstimate {
            value,
            std_err: 0.0,
            shots: 0,
        }
    }
}

/// `z0`, `z1`, `mz` from the Z-basis setting, with the covariance of the
/// three sample means (they come from the same shots).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalEstimate {
    pub stats: DiagonalStats,
    pub covariance: [[f64; 3]; 3],
    pub shots: usize,
}

/// An input quantity of the post-processing, for error propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Setting(MeasurementSetting),
    /// 0 = z0, 1 = z1, 2 = mz.
    Diagonal(usize),
}

/// Estimated or exact expectation values per setting.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationSet {
    n: usize,
    settings: BTreeMap<MeasurementSetting, SettingEstimate>,
    diagonal: Option<DiagonalEstimate>,
}

impl ExpectationSet {
    pub fn new(n: usize) -> Self {
        ExpectationSet {
            n,
            settings: BTreeMap::new(),
            diagonal: None,
        }
    }

    /// Exact expectations of `settings` on `state` (shot count 0, zero errors).
    pub fn exact(state: &PreparedState, settings: &[MeasurementSetting]) -> Result<Self> {
        let mut es = ExpectationSet::new(state.n);
        for s in settings {
            es.insert(*s, SettingEstimate::exact(expectation_exact(state, s)?))?;
            if s.kind == SettingKind::ZBasis {
                es.diagonal = Some(DiagonalEstimate {
                    stats: diagonal_stats(state),
                    covariance: [[0.0; 3]; 3],
                    shots: 0,
                });
            }
        }
        Ok(es)
    }

    pub fn exact_family(state: &PreparedState, family: FamilyKind) -> Result<Self> {
        ExpectationSet::exact(
            state,
            &SettingFamily {
                kind: family,
                n: state.n,
            }
            .settings()?,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, setting: MeasurementSetting, estimate: SettingEstimate) -> Result<()> {
        if setting.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: setting.n,
            });
        }
        self.settings.insert(setting, estimate);
        Ok(())
    }

    pub fn set_diagonal(&mut self, diagonal: DiagonalEstimate) {
        self.diagonal = Some(diagonal);
    }

    pub fn settings(&self) -> impl Iterator<Item = (&MeasurementSetting, &SettingEstimate)> {
        self.settings.iter()
    }

    /// Looks up a setting; `XALL` and `XY:0` are the same observable.
    pub fn get(&self, setting: &MeasurementSetting) -> Option<&SettingEstimate> {
        self.settings.get(setting).or_else(|| {
            let alias = match setting.kind {
                SettingKind::XAll => MeasurementSetting::xy(setting.n, 0),
                SettingKind::XYProduct(0) => MeasurementSetting::x_all(setting.n),
                _ => return None,
            };
            self.settings.get(&alias)
        })
    }

    pub fn require(&self, setting: &MeasurementSetting) -> Result<&SettingEstimate> {
        self.get(setting).ok_or_else(|| Error::IncompleteData {
            setting: setting.name(),
        })
    }

    pub fn diagonal(&self) -> Result<&DiagonalEstimate> {
        self.diagonal.as_ref().ok_or_else(|| Error::IncompleteData {
            setting: "Z".into(),
        })
    }

    pub fn require_family(&self, kind: FamilyKind) -> Result<()> {
        for s in (SettingFamily { kind, n: self.n }).settings()? {
            self.require(&s)?;
        }
        self.diagonal().map(|_| ())
    }

    /// Family inferred from the settings present: any `XY:k` means full.
    pub fn detect_family(&self) -> Result<FamilyKind> {
        let kinds: Vec<SettingKind> = self.settings.keys().map(|s| s.kind).collect();
        if kinds.iter().any(|k| matches!(k, SettingKind::XYProduct(_))) {
            Ok(FamilyKind::Full)
        } else if kinds
            .iter()
            .any(|k| matches!(k, SettingKind::XAll | SettingKind::YXRest))
        {
            Ok(FamilyKind::Efficient)
        } else {
            Err(Error::IncompleteData {
                setting: "XY:0".into(),
            })
        }
    }

    pub fn is_exact(&self) -> bool {
        self.settings.values().all(|e| e.shots == 0) && self.diagonal.is_none_or(|d| d.shots == 0)
    }

    fn linear_xy(&self, weights: &[f64]) -> Result<Estimate> {
        let mut value = 0.0;
        let mut var = 0.0;
        for (k, w) in weights.iter().enumerate() {
            let e = self.require(&MeasurementSetting::xy(self.n, k))?;
            value += w * e.value;
            var += (w * e.std_err).powi(2);
        }
        Ok(Estimate {
            value,
            std_err: var.sqrt(),
        })
    }

    /// `⟨X_+⟩` from the XY settings, error in quadrature.
    pub fn x_plus(&self) -> Result<Estimate> {
        self.linear_xy(&dft_coefficients(self.n)?.c_plus)
    }

    /// `⟨X_-⟩` from the XY settings, error in quadrature.
    pub fn x_minus(&self) -> Result<Estimate> {
        self.linear_xy(&dft_coefficients(self.n)?.c_minus)
    }

    /// Copy with one input shifted by `delta`.
    pub fn perturbed(&self, component: Component, delta: f64) -> ExpectationSet {
        let mut out = self.clone();
        match component {
            Component::Setting(s) => {
                if let Some(e) = out.settings.get_mut(&s) {
                    e.value += delta;
                }
            }
            Component::Diagonal(i) => {
                if let Some(d) = out.diagonal.as_mut() {
                    match i {
                        0 => d.stats.z0 += delta,
                        1 => d.stats.z1 += delta,
                        _ => d.stats.mz += delta,
                    }
                }
            }
        }
        out
    }

    /// Delta-method standard error of `f`, with independent settings and the
    /// full covariance inside the Z-basis block.
    pub fn propagate_error<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&ExpectationSet) -> Result<f64>,
    {
        if self.is_exact() {
            return Ok(0.0);
        }
        const H: f64 = 1e-6;
        let grad = |c: Component| -> Result<f64> {
            Ok((f(&self.perturbed(c, H))? - f(&self.perturbed(c, -H))?) / (2.0 * H))
        };
        let mut var = 0.0;
        for (s, e) in &self.settings {
            if e.shots > 0 && e.std_err > 0.0 {
                var += (grad(Component::Setting(*s))? * e.std_err).powi(2);
            }
        }
        if let Some(d) = self.diagonal.filter(|d| d.shots > 0) {
            let g = [
                grad(Component::Diagonal(0))?,
                grad(Component::Diagonal(1))?,
                grad(Component::Diagonal(2))?,
            ];
            for i in 0..3 {
                for j in 0..3 {
                    var += g[i] * d.covariance[i][j] * g[j];
                }
            }
        }
        Ok(var.max(0.0).sqrt())
    }
}

fn mean_and_error(sum: f64, sum_sq: f64, count: usize) -> (f64, f64) {
    let nf = count as f64;
    let mean = sum / nf;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Sample means of per-shot sign products, Bessel-corrected standard errors,
/// and `z0`, `z1`, `mz` from Z-basis shots. Records of the same setting are
/// pooled.
pub fn estimate_expectations(records: &[ShotRecord]) -> Result<ExpectationSet> {
    let first = records.first().ok_or(Error::IncompleteData {
        setting: "Z".into(),
    })?;
    let n = first.n();
    let mut grouped: BTreeMap<MeasurementSetting, Vec<&ShotRecord>> = BTreeMap::new();
    for r in records {
        if r.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.n(),
            });
        }
        grouped.entry(r.setting).or_default().push(r);
    }
    let mut es = ExpectationSet::new(n);
    for (setting, group) in grouped {
        let (mut count, mut sum) = (0usize, 0.0);
        // Z-basis accumulators: sums and cross sums of (all+, all-, qubit-1 sign).
        let mut s = [0.0f64; 3];
        let mut ss = [[0.0f64; 3]; 3];
        for r in group {
            for w in r.outcomes() {
                count += 1;
                sum += outcome::parity(w) as f64;
                if setting.kind == SettingKind::ZBasis {
                    let v = [
                        outcome::is_all_plus(w) as u8 as f64,
                        outcome::is_all_minus(w, n) as u8 as f64,
                        outcome::sign(w, 1) as f64,
                    ];
                    for i in 0..3 {
                        s[i] += v[i];
                        for j in 0..3 {
                            ss[i][j] += v[i] * v[j];
                        }
                    }
                }
            }
        }
        if count == 0 {
            return Err(Error::IncompleteData {
                setting: setting.name(),
            });
        }
        // Parity values are ±1, so the sum of squares is the count.
        let (value, std_err) = mean_and_error(sum, count as f64, count);
        es.insert(
            setting,
            SettingEstimate {
                value,
                std_err,
                shots: count,
            },
        )?;
        if setting.kind == SettingKind::ZBasis {
            let nf = count as f64;
            let means = [s[0] / nf, s[1] / nf, s[2] / nf];
            let mut covariance = [[0.0; 3]; 3];
            if count > 1 {
                for i in 0..3 {
                    for j in 0..3 {
                        covariance[i][j] = (ss[i][j] - nf * means[i] * means[j]) / (nf - 1.0) / nf;
                    }
                }
            }
            es.set_diagonal(DiagonalEstimate {
                stats: DiagonalStats {
                    z0: means[0],
                    z1: means[1],
                    mz: means[2],
                },
                covariance,
                shots: count,
            });
        }
    }
    Ok(es)
}
