//! Optimal-parameter estimation, witness evaluation and noise tolerances.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{Estimate, ExpectationSet, FamilyKind};
use crate::state::{schmidt_bound, CoherentParams, MeasurementSetting, PreparedState};
use crate::wrap_angle;

/// Absolute degeneracy threshold on exact inputs.
pub const DEGENERACY_EPS: f64 = 1e-9;
/// In sampled mode, inputs within this many combined standard errors of
/// zero are treated as degenerate.
pub const DEGENERACY_SIGMAS: f64 = 2.0;
pub const DEFAULT_SIGNIFICANCE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WitnessFamily {
    /// `½I − |GHZ⟩⟨GHZ|`.
    BaselineGhz,
    /// `½I − |Ψ_φ⟩⟨Ψ_φ|` with balanced amplitudes.
    FullFidelityPhi,
    /// `f(θ)I − |Ψ_φ^θ⟩⟨Ψ_φ^θ|`.
    FullFidelityPhiTheta,
    /// `½I − 𝒵 − ¼(cosφ M_x + sinφ M_x')`.
    EfficientPhi,
    /// `(2f(θ)+1)/4 I − 𝒵 − ¼ S1'`.
    EfficientPhiTheta,
}

impl WitnessFamily {
    pub const ALL: [WitnessFamily; 5] = [
        WitnessFamily::BaselineGhz,
        WitnessFamily::FullFidelityPhi,
        WitnessFamily::FullFidelityPhiTheta,
        WitnessFamily::EfficientPhi,
        WitnessFamily::EfficientPhiTheta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WitnessFamily::BaselineGhz => "BaselineGhz",
            WitnessFamily::FullFidelityPhi => "FullFidelityPhi",
            WitnessFamily::FullFidelityPhiTheta => "FullFidelityPhiTheta",
            WitnessFamily::EfficientPhi => "EfficientPhi",
            WitnessFamily::EfficientPhiTheta => "EfficientPhiTheta",
        }
    }

    /// Setting family the witness is measured with.
    pub fn settings(&self) -> FamilyKind {
        match self {
            WitnessFamily::EfficientPhi | WitnessFamily::EfficientPhiTheta => FamilyKind::Efficient,
            _ => FamilyKind::Full,
        }
    }

    pub fn fits_theta(&self) -> bool {
        matches!(
            self,
            WitnessFamily::FullFidelityPhiTheta | WitnessFamily::EfficientPhiTheta
        )
    }

    /// Identity coefficient of the witness: its separable bound term.
    pub fn offset(&self, theta: f64) -> f64 {
        match self {
            WitnessFamily::FullFidelityPhiTheta => schmidt_bound(theta),
            WitnessFamily::EfficientPhiTheta => (2.0 * schmidt_bound(theta) + 1.0) / 4.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for WitnessFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleEstimate {
    pub value: f64,
    pub std_err: f64,
    /// Set when the estimator was undefined and `value` is the fallback.
    pub degenerate: bool,
}

impl AngleEstimate {
    fn fixed(value: f64) -> Self {
        AngleEstimate {
            value,
            std_err: 0.0,
            degenerate: false,
        }
    }

    /// The angle, or the degeneracy error carrying the fallback.
    pub fn strict_phase(&self) -> Result<f64> {
        if self.degenerate {
            Err(Error::DegeneratePhase {
                fallback: self.value,
            })
        } else {
            Ok(self.value)
        }
    }

    pub fn strict_angle(&self) -> Result<f64> {
        if self.degenerate {
            Err(Error::DegenerateAngle {
                fallback: self.value,
            })
        } else {
            Ok(self.value)
        }
    }
}

fn consistent_with_zero(values: &[Estimate]) -> bool {
    let r = values.iter().map(|e| e.value * e.value).sum::<f64>().sqrt();
    let se = values
        .iter()
        .map(|e| e.std_err * e.std_err)
        .sum::<f64>()
        .sqrt();
    r < DEGENERACY_EPS || r < DEGENERACY_SIGMAS * se
}

/// Phase from a pair of quadratures `(c, s)`, in `[-π, π)`.
fn phase_from(c: Estimate, s: Estimate) -> (f64, bool) {
    if consistent_with_zero(&[c, s]) {
        (0.0, true)
    } else {
        (wrap_angle(s.value.atan2(c.value)), false)
    }
}

/// `½·atan2(r, d)` in `[0, π/2]`.
fn half_angle_from(r: Estimate, d: Estimate) -> (f64, bool) {
    if consistent_with_zero(&[r, d]) {
        (FRAC_PI_4, true)
    } else {
        (0.5 * r.value.max(0.0).atan2(d.value), false)
    }
}

fn angle_with_error<F>(es: &ExpectationSet, f: F) -> Result<AngleEstimate>
where
    F: Fn(&ExpectationSet) -> Result<(f64, bool)>,
{
    let (value, degenerate) = f(es)?;
    let std_err = if degenerate {
        0.0
    } else {
        // Unwrap perturbed phases next to the central value.
        es.propagate_error(|e| Ok(value + wrap_angle(f(e)?.0 - value)))?
    };
    Ok(AngleEstimate {
        value,
        std_err,
        degenerate,
    })
}

fn radius(a: Estimate, b: Estimate) -> Estimate {
    let r = a.value.hypot(b.value);
    let std_err = if r > 0.0 {
        ((a.value * a.std_err).powi(2) + (b.value * b.std_err).powi(2)).sqrt() / r
    } else {
        a.std_err.hypot(b.std_err)
    };
    Estimate { value: r, std_err }
}

fn full_phase(es: &ExpectationSet) -> Result<(f64, bool)> {
    Ok(phase_from(es.x_plus()?, es.x_minus()?))
}

fn full_theta(es: &ExpectationSet) -> Result<(f64, bool)> {
    let d = es.diagonal()?;
    let r = radius(es.x_plus()?, es.x_minus()?);
    let cov = d.covariance;
    let diff = Estimate {
        value: d.stats.z0 - d.stats.z1,
        std_err: (cov[0][0] + cov[1][1] - 2.0 * cov[0][1]).max(0.0).sqrt(),
    };
    Ok(half_angle_from(
        Estimate {
            value: 2.0 * r.value,
            std_err: 2.0 * r.std_err,
        },
        diff,
    ))
}

fn efficient_pair(es: &ExpectationSet) -> Result<(Estimate, Estimate)> {
    let n = es.n();
    let mx = es.require(&MeasurementSetting::x_all(n))?;
    let my = es.require(&MeasurementSetting::yx_rest(n))?;
    Ok((
        Estimate {
            value: mx.value,
            std_err: mx.std_err,
        },
        Estimate {
            value: my.value,
            std_err: my.std_err,
        },
    ))
}

fn efficient_phase(es: &ExpectationSet) -> Result<(f64, bool)> {
    let (mx, my) = efficient_pair(es)?;
    Ok(phase_from(mx, my))
}

fn efficient_theta(es: &ExpectationSet) -> Result<(f64, bool)> {
    let (mx, my) = efficient_pair(es)?;
    let d = es.diagonal()?;
    let mz = Estimate {
        value: d.stats.mz,
        std_err: d.covariance[2][2].max(0.0).sqrt(),
    };
    Ok(half_angle_from(radius(mx, my), mz))
}

/// `φ_opt` with `(cos φ_opt, sin φ_opt)` in the quadrant of `(⟨X_+⟩, ⟨X_−⟩)`.
pub fn phi_opt_full(es: &ExpectationSet) -> Result<AngleEstimate> {
    angle_with_error(es, full_phase)
}

/// `θ_opt = ½·atan2(2√(⟨X_+⟩²+⟨X_−⟩²), z0 − z1)`.
pub fn theta_opt_full(es: &ExpectationSet) -> Result<AngleEstimate> {
    angle_with_error(es, full_theta)
}

/// `φ_opt = atan2(⟨M_x'⟩, ⟨M_x⟩)`.
pub fn phi_opt_efficient(es: &ExpectationSet) -> Result<AngleEstimate> {
    angle_with_error(es, efficient_phase)
}

/// `θ_opt = ½·atan2(√(⟨M_x⟩²+⟨M_x'⟩²), ⟨M_z⟩)`.
pub fn theta_opt_efficient(es: &ExpectationSet) -> Result<AngleEstimate> {
    angle_with_error(es, efficient_theta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FidelityTarget {
    PhiOnly,
    PhiTheta,
}

fn max_fidelity_value(es: &ExpectationSet, target: FidelityTarget) -> Result<f64> {
    let d = es.diagonal()?.stats;
    let xp = es.x_plus()?.value;
    let xm = es.x_minus()?.value;
    Ok(match target {
        FidelityTarget::PhiOnly => d.z_projector() + xp.hypot(xm),
        FidelityTarget::PhiTheta => {
            0.5 * (d.z0 + d.z1) + (0.25 * (d.z0 - d.z1).powi(2) + xp * xp + xm * xm).sqrt()
        }
    })
}

/// Largest fidelity with a GHZ-like target reachable by tuning the phase
/// (and, for `PhiTheta`, the amplitude angle).
pub fn max_fidelity(es: &ExpectationSet, target: FidelityTarget) -> Result<Estimate> {
    let value = max_fidelity_value(es, target)?;
    let std_err = es.propagate_error(|e| max_fidelity_value(e, target))?;
    Ok(Estimate { value, std_err })
}

/// Expectation of the witness operator at fixed parameters; linear in the
/// inputs. `BaselineGhz` ignores `params`.
pub fn witness_expectation(
    family: WitnessFamily,
    es: &ExpectationSet,
    params: CoherentParams,
) -> Result<f64> {
    let (theta, phi) = (params.theta, params.phi);
    let d = es.diagonal()?.stats;
    let z = d.z_projector();
    let offset = family.offset(theta);
    Ok(match family {
        WitnessFamily::BaselineGhz => offset - z - es.x_plus()?.value,
        WitnessFamily::FullFidelityPhi => {
            offset - z - (phi.cos() * es.x_plus()?.value + phi.sin() * es.x_minus()?.value)
        }
        WitnessFamily::FullFidelityPhiTheta => {
            let (s, c) = theta.sin_cos();
            let coh = phi.cos() * es.x_plus()?.value + phi.sin() * es.x_minus()?.value;
            offset - (c * c * d.z0 + s * s * d.z1 + (2.0 * theta).sin() * coh)
        }
        WitnessFamily::EfficientPhi => {
            let (mx, my) = efficient_pair(es)?;
            offset - z - 0.25 * (phi.cos() * mx.value + phi.sin() * my.value)
        }
        WitnessFamily::EfficientPhiTheta => {
            let (mx, my) = efficient_pair(es)?;
            let s1 = (2.0 * theta).cos() * d.mz
                + (2.0 * theta).sin() * (phi.cos() * mx.value + phi.sin() * my.value);
            offset - z - 0.25 * s1
        }
    })
}

type Estimator = fn(&ExpectationSet) -> Result<(f64, bool)>;

/// Parameters the witness is built from: fitted where the family fits them,
/// otherwise the GHZ defaults.
fn witness_params(family: WitnessFamily, es: &ExpectationSet) -> Result<(CoherentParams, bool)> {
    let (phase, angle): (Estimator, Estimator) = match family.settings() {
        FamilyKind::Full => (full_phase, full_theta),
        FamilyKind::Efficient => (efficient_phase, efficient_theta),
    };
    if family == WitnessFamily::BaselineGhz {
        return Ok((CoherentParams::ghz(), false));
    }
    let (phi, dp) = phase(es)?;
    let (theta, dt) = if family.fits_theta() {
        angle(es)?
    } else {
        (FRAC_PI_4, false)
    };
    Ok((CoherentParams { theta, phi }, dp || dt))
}

fn fitted_witness_value(family: WitnessFamily, es: &ExpectationSet) -> Result<f64> {
    let (params, _) = witness_params(family, es)?;
    witness_expectation(family, es, params)
}

/// Asymptotic and finite-size white-noise thresholds for one witness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub theta: f64,
    pub phi: f64,
    pub asymptotic: f64,
    pub finite_n: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub family: WitnessFamily,
    pub n: usize,
    pub phi_opt: AngleEstimate,
    pub theta_opt: Option<AngleEstimate>,
    pub max_fidelity: Option<Estimate>,
    pub witness_value: f64,
    pub witness_error: f64,
    pub significance: f64,
    pub entangled: bool,
    pub tolerances: Tolerances,
}

impl DetectionReport {
    pub fn verdict(&self) -> &'static str {
        if self.entangled {
            "entangled"
        } else {
            "inconclusive"
        }
    }

    pub fn degenerate(&self) -> bool {
        self.phi_opt.degenerate || self.theta_opt.is_some_and(|t| t.degenerate)
    }
}

/// Witness value at the fitted parameters, its propagated error and the
/// detection verdict `value + k·error < 0`.
pub fn evaluate(
    family: WitnessFamily,
    es: &ExpectationSet,
    significance: f64,
) -> Result<DetectionReport> {
    es.require_family(family.settings())?;
    let (params, degenerate) = witness_params(family, es)?;
    let witness_value = witness_expectation(family, es, params)?;
    let witness_error = if degenerate {
        es.propagate_error(|e| witness_expectation(family, e, params))?
    } else {
        es.propagate_error(|e| fitted_witness_value(family, e))?
    };
    let (phi_est, theta_est) = match family.settings() {
        FamilyKind::Full => (phi_opt_full(es)?, theta_opt_full(es)?),
        FamilyKind::Efficient => (phi_opt_efficient(es)?, theta_opt_efficient(es)?),
    };
    let phi_opt = if family == WitnessFamily::BaselineGhz {
        AngleEstimate::fixed(0.0)
    } else {
        phi_est
    };
    let max_fidelity = match family {
        WitnessFamily::BaselineGhz => {
            let f = |e: &ExpectationSet| -> Result<f64> {
                Ok(e.diagonal()?.stats.z_projector() + e.x_plus()?.value)
            };
            Some(Estimate {
                value: f(es)?,
                std_err: es.propagate_error(f)?,
            })
        }
        WitnessFamily::FullFidelityPhi => Some(max_fidelity(es, FidelityTarget::PhiOnly)?),
        WitnessFamily::FullFidelityPhiTheta => Some(max_fidelity(es, FidelityTarget::PhiTheta)?),
        _ => None,
    };
    let n = es.n();
    let tolerances = Tolerances {
        theta: theta_est.value,
        phi: phi_est.value,
        asymptotic: tolerance(
            family,
            theta_est.value,
            phi_est.value,
            SystemSize::Asymptotic,
        ),
        finite_n: tolerance(
            family,
            theta_est.value,
            phi_est.value,
            SystemSize::Finite(n),
        ),
        n,
    };
    Ok(DetectionReport {
        family,
        n,
        phi_opt,
        theta_opt: family.fits_theta().then_some(theta_est),
        max_fidelity,
        witness_value,
        witness_error,
        significance,
        entangled: witness_value + significance * witness_error < 0.0,
        tolerances,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemSize {
    Finite(usize),
    Asymptotic,
}

impl SystemSize {
    /// `2^{-n}`, zero in the limit.
    fn inv_dim(&self) -> f64 {
        match self {
            SystemSize::Finite(n) => 0.5f64.powi(*n as i32),
            SystemSize::Asymptotic => 0.0,
        }
    }
}

/// Largest white-noise weight `p` at which the witness still detects the
/// state with amplitude angle `theta` and phase `phi`. Only
/// `BaselineGhz` depends on `phi`; the other witnesses adapt to it.
pub fn tolerance(family: WitnessFamily, theta: f64, phi: f64, size: SystemSize) -> f64 {
    let q = size.inv_dim();
    let s2 = (2.0 * theta).sin();
    let f = schmidt_bound(theta);
    match family {
        WitnessFamily::BaselineGhz => {
            let s = s2 * phi.cos();
            if s <= 0.0 {
                0.0
            } else {
                s / (1.0 + s - 2.0 * q)
            }
        }
        WitnessFamily::FullFidelityPhi => s2 / (1.0 + s2 - 2.0 * q),
        WitnessFamily::FullFidelityPhiTheta => (1.0 - f) / (1.0 - q),
        WitnessFamily::EfficientPhi => s2 / (s2 + 2.0 - 4.0 * q),
        WitnessFamily::EfficientPhiTheta => 2.0 * (1.0 - f) / (3.0 - 4.0 * q),
    }
}

/// Threshold of the GHZ fidelity witness on a GHZ state: `2^{n−1}/(2^n−1)`.
pub fn white_noise_tolerance(size: SystemSize) -> f64 {
    0.5 / (1.0 - size.inv_dim())
}

/// Advantage of the φ-adaptive witnesses over their θ-adaptive siblings:
/// `g` for the full protocol, `l` for the efficient one.
pub fn gap_functions(theta: f64) -> (f64, f64) {
    let s2 = (2.0 * theta).sin();
    let m = 1.0 - schmidt_bound(theta);
    let g = (1.0 - 1.0 / (s2 + 1.0)) - m;
    let l = (1.0 - 2.0 / (s2 + 2.0)) - 2.0 / 3.0 * m;
    (g, l)
}

/// Noise weight where the evaluated witness crosses zero, found by
/// bisection on exact expectations.
pub fn threshold_by_bisection(
    family: WitnessFamily,
    n: usize,
    params: CoherentParams,
) -> Result<f64> {
    let value_at = |p: f64| -> Result<f64> {
        let state = PreparedState::new(n, params, p)?;
        let es = ExpectationSet::exact_family(&state, family.settings())?;
        fitted_witness_value(family, &es)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if value_at(lo)? >= 0.0 {
        return Ok(0.0);
    }
    if value_at(hi)? < 0.0 {
        return Ok(1.0);
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if value_at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::protocol::{DiagonalEstimate, SettingEstimate};
    use crate::state::CoherentParams;
    use crate::state::DiagonalStats;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_8, PI};

    fn exact(n: usize, theta: f64, phi: f64, p: f64, kind: FamilyKind) -> ExpectationSet {
        let st = PreparedState::new(n, CoherentParams::new(theta, phi).unwrap(), p).unwrap();
        ExpectationSet::exact_family(&st, kind).unwrap()
    }

    /// A full-family set with chosen `X_±` and diagonal statistics.
    fn synthetic(n: usize, xp: f64, xm: f64, z0: f64, z1: f64) -> ExpectationSet {
        let coeffs = crate::protocol::dft_coefficients(n).unwrap();
        // Solve for XY values with the requested X_± using the orthogonality
        // of the coefficient rows: M_k = a·c_plus[k] + b·c_minus[k].
        let np: f64 = coeffs.c_plus.iter().map(|c| c * c).sum();
        let nm: f64 = coeffs.c_minus.iter().map(|c| c * c).sum();
        let mut es = ExpectationSet::new(n);
        for k in 0..=n {
            let v = xp / np * coeffs.c_plus[k] + xm / nm * coeffs.c_minus[k];
            es.insert(MeasurementSetting::xy(n, k), SettingEstimate::exact(v))
                .unwrap();
        }
        es.insert(MeasurementSetting::z(n), SettingEstimate::exact(0.0))
            .unwrap();
        es.set_diagonal(DiagonalEstimate {
            stats: DiagonalStats {
                z0,
                z1,
                mz: z0 - z1,
            },
            covariance: [[0.0; 3]; 3],
            shots: 0,
        });
        es
    }

    #[test]
    fn phase_examples() {
        let es = exact(4, FRAC_PI_4, 1.1, 0.3, FamilyKind::Full);
        assert!((phi_opt_full(&es).unwrap().value - 1.1).abs() < 1e-12);
        let ghz = synthetic(3, 0.5, 0.0, 0.5, 0.5);
        assert!(phi_opt_full(&ghz).unwrap().value.abs() < 1e-12);
        let flipped = synthetic(3, -0.5, 0.0, 0.5, 0.5);
        assert_eq!(phi_opt_full(&flipped).unwrap().value, -PI);
        let flat = synthetic(3, 0.0, 0.0, 0.5, 0.5);
        let est = phi_opt_full(&flat).unwrap();
        assert!(est.degenerate);
        assert_eq!(
            est.strict_phase(),
            Err(Error::DegeneratePhase { fallback: 0.0 })
        );
    }

    #[test]
    fn theta_examples() {
        let es = exact(5, 0.6, -2.0, 0.25, FamilyKind::Full);
        assert!((theta_opt_full(&es).unwrap().value - 0.6).abs() < 1e-12);
        let ghz = synthetic(3, 0.5, 0.0, 0.5, 0.5);
        assert!((theta_opt_full(&ghz).unwrap().value - FRAC_PI_4).abs() < 1e-12);
        let product = synthetic(3, 0.0, 0.0, 1.0, 0.0);
        let t = theta_opt_full(&product).unwrap();
        assert!(!t.degenerate && t.value.abs() < 1e-15);
        let mixed = synthetic(3, 0.0, 0.0, 0.125, 0.125);
        let t = theta_opt_full(&mixed).unwrap();
        assert!(t.degenerate);
        assert_eq!(
            t.strict_angle(),
            Err(Error::DegenerateAngle {
                fallback: FRAC_PI_4
            })
        );
    }

    #[test]
    fn efficient_estimators() {
        for &(theta, phi, p) in &[(0.3, 2.5, 0.1), (1.2, -0.7, 0.4), (FRAC_PI_4, 0.0, 0.0)] {
            let es = exact(6, theta, phi, p, FamilyKind::Efficient);
            assert!((phi_opt_efficient(&es).unwrap().value - phi).abs() < 1e-12);
            assert!((theta_opt_efficient(&es).unwrap().value - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn max_fidelity_examples() {
        let es = exact(3, FRAC_PI_3, 2.0, 0.0, FamilyKind::Full);
        assert!((max_fidelity(&es, FidelityTarget::PhiTheta).unwrap().value - 1.0).abs() < 1e-12);
        let es = exact(2, FRAC_PI_4, 0.7, 0.5, FamilyKind::Full);
        assert!((max_fidelity(&es, FidelityTarget::PhiOnly).unwrap().value - 0.625).abs() < 1e-12);
        let es = exact(2, 0.3, 0.7, 1.0, FamilyKind::Full);
        assert!((max_fidelity(&es, FidelityTarget::PhiOnly).unwrap().value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn evaluate_examples() {
        let ghz = exact(4, FRAC_PI_4, 0.0, 0.0, FamilyKind::Full);
        let r = evaluate(WitnessFamily::FullFidelityPhi, &ghz, 3.0).unwrap();
        assert!((r.witness_value + 0.5).abs() < 1e-12);
        assert!(r.entangled);

        let flipped = exact(4, FRAC_PI_4, PI, 0.0, FamilyKind::Full);
        let r = evaluate(WitnessFamily::FullFidelityPhi, &flipped, 3.0).unwrap();
        assert!((r.witness_value + 0.5).abs() < 1e-12);
        let b = evaluate(WitnessFamily::BaselineGhz, &flipped, 3.0).unwrap();
        assert!((b.witness_value - 0.5).abs() < 1e-12);
        assert!(!b.entangled);
        assert_eq!(b.verdict(), "inconclusive");

        let ghz = exact(3, FRAC_PI_4, 0.0, 0.0, FamilyKind::Efficient);
        let r = evaluate(WitnessFamily::EfficientPhi, &ghz, 3.0).unwrap();
        assert!((r.witness_value + 0.25).abs() < 1e-12);

        let es = exact(3, FRAC_PI_3, 2.0, 0.0, FamilyKind::Efficient);
        let r = evaluate(WitnessFamily::EfficientPhiTheta, &es, 3.0).unwrap();
        let f = schmidt_bound(FRAC_PI_3);
        assert!((r.witness_value - (f - 1.0) / 2.0).abs() < 1e-12);
        assert!((r.witness_value + 0.125).abs() < 1e-12);
    }

    #[test]
    fn evaluate_matches_dense_witness() {
        for n in 2..=5 {
            for &(theta, phi, p) in &[(0.4, 1.3, 0.2), (1.1, -2.9, 0.05), (FRAC_PI_4, 0.5, 0.6)] {
                let params = CoherentParams::new(theta, phi).unwrap();
                let st = PreparedState::new(n, params, p).unwrap();
                let rho = oracle::prepared_density(&st).unwrap();
                for family in WitnessFamily::ALL {
                    let es = ExpectationSet::exact_family(&st, family.settings()).unwrap();
                    let r = evaluate(family, &es, 3.0).unwrap();
                    let used = CoherentParams {
                        theta: r.theta_opt.map_or(FRAC_PI_4, |t| t.value),
                        phi: r.phi_opt.value,
                    };
                    let w = oracle::witness_matrix(family, used, n).unwrap();
                    let truth = oracle::trace_expectation(&w, &rho).unwrap();
                    assert!(
                        (r.witness_value - truth).abs() < 1e-10,
                        "{family} n={n}: {} vs {truth}",
                        r.witness_value
                    );
                }
            }
        }
    }

    #[test]
    fn tolerance_examples() {
        assert!((white_noise_tolerance(SystemSize::Finite(3)) - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(white_noise_tolerance(SystemSize::Asymptotic), 0.5);
        let a = SystemSize::Asymptotic;
        assert!((tolerance(WitnessFamily::FullFidelityPhi, FRAC_PI_4, 0.0, a) - 0.5).abs() < 1e-15);
        assert!(
            (tolerance(WitnessFamily::FullFidelityPhiTheta, FRAC_PI_4, 0.0, a) - 0.5).abs() < 1e-15
        );
        let d = tolerance(
            WitnessFamily::EfficientPhiTheta,
            FRAC_PI_4,
            0.0,
            SystemSize::Finite(4),
        );
        assert!((d - 4.0 / 11.0).abs() < 1e-15);
        assert!((tolerance(WitnessFamily::BaselineGhz, FRAC_PI_4, 0.0, a) - 0.5).abs() < 1e-15);
        assert_eq!(
            tolerance(WitnessFamily::BaselineGhz, FRAC_PI_4, 2.0, a),
            0.0
        );
    }

    #[test]
    fn finite_tolerances_match_bisection() {
        for family in WitnessFamily::ALL {
            for &(theta, phi) in &[(0.3, 0.4), (FRAC_PI_4, -1.0), (1.3, 2.0)] {
                let params = CoherentParams::new(theta, phi).unwrap();
                let p = threshold_by_bisection(family, 6, params).unwrap();
                let formula = tolerance(family, theta, phi, SystemSize::Finite(6));
                assert!((p - formula).abs() < 1e-9, "{family}: {p} vs {formula}");
            }
        }
    }

    #[test]
    fn gap_examples() {
        for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
            assert!(gap_functions(theta).0.abs() < 1e-15);
        }
        assert!((gap_functions(FRAC_PI_8).0 - 0.267_766_952_966_368_8).abs() < 1e-12);
        for i in 0..=100 {
            let t = FRAC_PI_2 * i as f64 / 100.0;
            let (g, l) = gap_functions(t);
            let (g2, l2) = gap_functions(FRAC_PI_2 - t);
            assert!(g >= -1e-12 && l >= -1e-12);
            assert!((g - g2).abs() < 1e-12 && (l - l2).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_settings_are_named() {
        let mut es = exact(3, FRAC_PI_4, 0.0, 0.0, FamilyKind::Efficient);
        assert!(evaluate(WitnessFamily::FullFidelityPhi, &es, 3.0).is_err());
        es = ExpectationSet::new(3);
        es.insert(MeasurementSetting::x_all(3), SettingEstimate::exact(1.0))
            .unwrap();
        es.insert(MeasurementSetting::yx_rest(3), SettingEstimate::exact(0.0))
            .unwrap();
        assert_eq!(
            evaluate(WitnessFamily::EfficientPhi, &es, 3.0),
            Err(Error::IncompleteData {
                setting: "Z".into()
            })
        );
    }
}
