//! Closed-form model of the prepared state
//! `ρ = (1-p)|Ψ⟩⟨Ψ| + p·I/2^n` with `|Ψ⟩ = cosθ|0…0⟩ + e^{iφ}sinθ|1…1⟩`.
//!
//! Nothing here allocates `2^n` data, so every quantity is available at
//! large `n`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, ProductObservable, SingleQubitObservable};
use crate::wrap_angle;

const ANGLE_SLACK: f64 = 1e-12;

/// Coherent-noise parameters. `theta ∈ [0, π/2]`, `phi ∈ [-π, π)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoherentParams {
    pub theta: f64,
    pub phi: f64,
}

impl CoherentParams {
    /// Validates `theta` and wraps `phi` into `[-π, π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must lie in [0, π/2]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                reason: "must be finite",
            });
        }
        Ok(CoherentParams {
            theta: theta.clamp(0.0, FRAC_PI_2),
            phi: wrap_angle(phi),
        })
    }

    pub fn ghz() -> Self {
        CoherentParams {
            theta: FRAC_PI_4,
            phi: 0.0,
        }
    }

    /// Phase-only noise: balanced amplitudes.
    pub fn phase(phi: f64) -> Self {
        CoherentParams {
            theta: FRAC_PI_4,
            phi: wrap_angle(phi),
        }
    }
}

/// Largest Schmidt coefficient of the GHZ-like state, `max{cos²θ, sin²θ}`.
pub fn schmidt_bound(theta: f64) -> f64 {
    let c = theta.cos().powi(2);
    c.max(1.0 - c)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PreparedState {
    pub n: usize,
    pub coherent: CoherentParams,
    pub p: f64,
}

impl PreparedState {
    pub fn new(n: usize, coherent: CoherentParams, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize { n, min: 2 });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(PreparedState { n, coherent, p })
    }

    pub fn ghz(n: usize) -> Result<Self> {
        PreparedState::new(n, CoherentParams::ghz(), 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.coherent.theta
    }

    pub fn phi(&self) -> f64 {
        self.coherent.phi
    }

    /// `(1-p)·sin2θ`: the weight of the off-diagonal coherences.
    fn coherence(&self) -> f64 {
        (1.0 - self.p) * (2.0 * self.theta()).sin()
    }

    /// `p / 2^n`, underflowing gracefully for large `n`.
    fn background(&self) -> f64 {
        self.p * 0.5f64.powi(self.n as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SettingKind {
    /// Every qubit measured in σz.
    ZBasis,
    /// `(cosθ_k σx + sinθ_k σy)^⊗n` with `θ_k = kπ/(n+1)`.
    XYProduct(usize),
    /// `σx^⊗n`.
    XAll,
    /// `σy ⊗ σx^⊗(n-1)`.
    YXRest,
}

/// One local measurement setting on `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementSetting {
    pub kind: SettingKind,
    pub n: usize,
}

impl MeasurementSetting {
    pub fn new(kind: SettingKind, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSize { n, min: 1 });
        }
        if let SettingKind::XYProduct(k) = kind {
            if k > n {
                return Err(Error::InvalidParameter {
                    name: "k",
                    value: k as f64,
                    reason: "setting index must satisfy 0 ≤ k ≤ n",
                });
            }
        }
        Ok(MeasurementSetting { kind, n })
    }

    pub fn z(n: usize) -> Self {
        MeasurementSetting {
            kind: SettingKind::ZBasis,
            n,
        }
    }

    pub fn xy(n: usize, k: usize) -> Self {
        assert!(k <= n, "setting index out of range");
        MeasurementSetting {
            kind: SettingKind::XYProduct(k),
            n,
        }
    }

    pub fn x_all(n: usize) -> Self {
        MeasurementSetting {
            kind: SettingKind::XAll,
            n,
        }
    }

    pub fn yx_rest(n: usize) -> Self {
        MeasurementSetting {
            kind: SettingKind::YXRest,
            n,
        }
    }

    /// Canonical name used in shot files: `Z`, `XY:k`, `XALL`, `YX`.
    pub fn name(&self) -> String {
        match self.kind {
            SettingKind::ZBasis => "Z".into(),
            SettingKind::XYProduct(k) => format!("XY:{k}"),
            SettingKind::XAll => "XALL".into(),
            SettingKind::YXRest => "YX".into(),
        }
    }

    pub fn parse(name: &str, n: usize) -> Result<Self> {
        let kind: SettingKind = name.parse()?;
        MeasurementSetting::new(kind, n)
    }

    /// `θ_k = kπ/(n+1)` for XY products.
    pub fn xy_angle(&self) -> Option<f64> {
        match self.kind {
            SettingKind::XYProduct(k) => Some(k as f64 * PI / (self.n + 1) as f64),
            _ => None,
        }
    }

    /// Per-qubit measurement angles in the XY plane, `None` for `ZBasis`.
    pub fn angles(&self) -> Option<Vec<f64>> {
        match self.kind {
            SettingKind::ZBasis => None,
            SettingKind::XYProduct(_) => Some(vec![self.xy_angle().unwrap(); self.n]),
            SettingKind::XAll => Some(vec![0.0; self.n]),
            SettingKind::YXRest => {
                let mut a = vec![0.0; self.n];
                a[0] = FRAC_PI_2;
                Some(a)
            }
        }
    }

    /// Sum of per-qubit angles; the only thing XY-type statistics depend on.
    pub fn angle_sum(&self) -> Option<f64> {
        match self.kind {
            SettingKind::ZBasis => None,
            SettingKind::XYProduct(_) => Some(self.n as f64 * self.xy_angle().unwrap()),
            SettingKind::XAll => Some(0.0),
            SettingKind::YXRest => Some(FRAC_PI_2),
        }
    }

    /// The product observable whose expectation this setting estimates.
    pub fn observable(&self) -> ObservableSum {
        let factors = match self.angles() {
            None => vec![SingleQubitObservable::Z; self.n],
            Some(angles) => match self.kind {
                SettingKind::XAll => vec![SingleQubitObservable::X; self.n],
                SettingKind::YXRest => {
                    let mut f = vec![SingleQubitObservable::X; self.n];
                    f[0] = SingleQubitObservable::Y;
                    f
                }
                _ => angles
                    .into_iter()
                    .map(SingleQubitObservable::XYAngle)
                    .collect(),
            },
        };
        ObservableSum::product(1.0, ProductObservable::new(factors))
    }
}

impl FromStr for SettingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" => Ok(SettingKind::ZBasis),
            "XALL" => Ok(SettingKind::XAll),
            "YX" => Ok(SettingKind::YXRest),
            other => other
                .strip_prefix("XY:")
                .and_then(|k| k.parse::<usize>().ok())
                .map(SettingKind::XYProduct)
                .ok_or_else(|| Error::UnknownSetting(other.to_string())),
        }
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Computational-basis statistics of the prepared state.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiagonalStats {
    /// Probability of the all-zeros string.
    pub z0: f64,
    /// Probability of the all-ones string.
    pub z1: f64,
    /// `⟨σz⟩` on qubit 1.
    pub mz: f64,
}

impl DiagonalStats {
    /// `⟨(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)/2⟩`.
    pub fn z_projector(&self) -> f64 {
        0.5 * (self.z0 + self.z1)
    }
}

pub fn diagonal_stats(state: &PreparedState) -> DiagonalStats {
    let q = 1.0 - state.p;
    let (s, c) = state.theta().sin_cos();
    let bg = state.background();
    DiagonalStats {
        z0: q * c * c + bg,
        z1: q * s * s + bg,
        mz: q * (2.0 * state.theta()).cos(),
    }
}

fn check_n(state: &PreparedState, setting: &MeasurementSetting) -> Result<()> {
    if state.n != setting.n {
        return Err(Error::DimensionMismatch {
            expected: state.n,
            found: setting.n,
        });
    }
    Ok(())
}

/// Exact `Tr(M·ρ)` for the product observable of `setting`.
pub fn expectation_exact(state: &PreparedState, setting: &MeasurementSetting) -> Result<f64> {
    check_n(state, setting)?;
    Ok(match setting.angle_sum() {
        Some(a) => state.coherence() * (state.phi() - a).cos(),
        None => {
            let (s, c) = state.theta().sin_cos();
            let parity = if state.n.is_multiple_of(2) { 1.0 } else { -1.0 };
            // The maximally mixed part is traceless.
            (1.0 - state.p) * (c * c + parity * s * s)
        }
    })
}

/// Packed outcome strings: bit `j-1` (word `(j-1)/64`) is set when qubit `j`
/// returned `-1`.
pub mod outcome {
    use crate::error::{Error, Result};

    pub fn words_for(n: usize) -> usize {
        n.div_ceil(64)
    }

    pub fn sign(words: &[u64], qubit: usize) -> i8 {
        let j = qubit - 1;
        if (words[j / 64] >> (j % 64)) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Product of all signs.
    pub fn parity(words: &[u64]) -> i8 {
        let ones: u32 = words.iter().map(|w| w.count_ones()).sum();
        if ones.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn is_all_plus(words: &[u64]) -> bool {
        words.iter().all(|&w| w == 0)
    }

    pub fn is_all_minus(words: &[u64], n: usize) -> bool {
        words.iter().map(|w| w.count_ones() as usize).sum::<usize>() == n
    }

    /// Mask with the low `n` bits set across `words_for(n)` words.
    pub fn full_mask(n: usize) -> Vec<u64> {
        (0..words_for(n))
            .map(|w| {
                let bits = (n - 64 * w).min(64);
                if bits == 64 {
                    u64::MAX
                } else {
                    (1u64 << bits) - 1
                }
            })
            .collect()
    }

    pub fn encode(s: &str) -> Result<Vec<u64>> {
        let n = s.chars().count();
        let mut words = vec![0u64; words_for(n)];
        for (j, ch) in s.chars().enumerate() {
            match ch {
                '+' => {}
                '-' => words[j / 64] |= 1 << (j % 64),
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("invalid outcome symbol '{other}'"),
                    })
                }
            }
        }
        Ok(words)
    }

    pub fn decode(words: &[u64], n: usize) -> String {
        (1..=n)
            .map(|q| if sign(words, q) < 0 { '-' } else { '+' })
            .collect()
    }
}

/// Outcome distribution of one setting over sign strings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutcomeDistribution {
    /// XY-type settings: `P(s) = 2^-n [1 + (∏ s_j)·correlation]`.
    Parity { n: usize, correlation: f64 },
    /// `ZBasis`: all-plus with `z0`, all-minus with `z1`, every other string
    /// with `background`.
    Diagonal {
        n: usize,
        z0: f64,
        z1: f64,
        background: f64,
    },
}

impl OutcomeDistribution {
    pub fn n(&self) -> usize {
        match *self {
            OutcomeDistribution::Parity { n, .. } | OutcomeDistribution::Diagonal { n, .. } => n,
        }
    }

    pub fn probability(&self, words: &[u64]) -> f64 {
        match *self {
            OutcomeDistribution::Parity { n, correlation } => {
                0.5f64.powi(n as i32) * (1.0 + outcome::parity(words) as f64 * correlation)
            }
            OutcomeDistribution::Diagonal {
                n,
                z0,
                z1,
                background,
            } => {
                if outcome::is_all_plus(words) {
                    z0
                } else if outcome::is_all_minus(words, n) {
                    z1
                } else {
                    background
                }
            }
        }
    }

    /// Enumerates every string with its probability, in index order
    /// (string index `b`, qubit 1 the most significant bit). Small `n` only.
    pub fn enumerate(&self) -> Result<Vec<(Vec<u64>, f64)>> {
        let n = self.n();
        if n > 20 {
            return Err(Error::SizeLimit { n, max: 20 });
        }
        Ok((0..1usize << n)
            .map(|b| {
                let mut words = vec![0u64; 1];
                for j in 0..n {
                    if (b >> (n - 1 - j)) & 1 == 1 {
                        words[0] |= 1 << j;
                    }
                }
                let prob = self.probability(&words);
                (words, prob)
            })
            .collect())
    }

    /// Draws one outcome into `out` (length `words_for(n)`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [u64]) {
        let n = self.n();
        match *self {
            OutcomeDistribution::Parity { correlation, .. } => {
                // Uniform over strings of the drawn parity.
                let even = rng.random::<f64>() < 0.5 * (1.0 + correlation);
                fill_uniform(rng, out, n);
                if (outcome::parity(out) == 1) != even {
                    out[(n - 1) / 64] ^= 1 << ((n - 1) % 64);
                }
            }
            OutcomeDistribution::Diagonal {
                z0, z1, background, ..
            } => {
                // Split off the uniform component, whose mass is background·2^n.
                let coherent0 = z0 - background;
                let coherent1 = z1 - background;
                let u = rng.random::<f64>();
                if u < coherent0 {
                    out.iter_mut().for_each(|w| *w = 0);
                } else if u < coherent0 + coherent1 {
                    out.copy_from_slice(&outcome::full_mask(n));
                } else {
                    fill_uniform(rng, out, n);
                }
            }
        }
    }
}

fn fill_uniform<R: Rng + ?Sized>(rng: &mut R, out: &mut [u64], n: usize) {
    for (w, mask) in out.iter_mut().zip(outcome::full_mask(n)) {
        *w = rng.random::<u64>() & mask;
    }
}

pub fn outcome_distribution(
    state: &PreparedState,
    setting: &MeasurementSetting,
) -> Result<OutcomeDistribution> {
    check_n(state, setting)?;
    let n = state.n;
    Ok(match setting.kind {
        SettingKind::ZBasis => {
            let stats = diagonal_stats(state);
            OutcomeDistribution::Diagonal {
                n,
                z0: stats.z0,
                z1: stats.z1,
                background: state.background(),
            }
        }
        _ => OutcomeDistribution::Parity {
            n,
            correlation: expectation_exact(state, setting)?,
        },
    })
}
