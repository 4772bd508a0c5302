//! Brute-force dense-matrix ground truth for small systems.
//!
//! Everything here is built from explicit Kronecker products, permutation
//! matrices and statevector simulation. None of it goes through the
//! symbolic [`crate::pauli`] layer or the closed forms in [`crate::state`],
//! so it can check both.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::state::{outcome, schmidt_bound};
use crate::state::{CoherentParams, MeasurementSetting, PreparedState, SettingKind};
use crate::witness::WitnessFamily;
use crate::C64;

/// Largest register handled densely (1024 × 1024 matrices).
pub const MAX_DENSE_QUBITS: usize = 10;
/// Largest register passed to the eigen-solver.
pub const MAX_EIGEN_QUBITS: usize = 8;

const HERMITIAN_TOL: f64 = 1e-12;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_dense(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// A `2^n × 2^n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: DMatrix<C64>,
}

impl DenseOperator {
    pub fn new(n: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << n);
        DenseOperator { n, matrix }
    }

    pub fn identity(n: usize) -> Self {
        let dim = 1 << n;
        DenseOperator {
            n,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// `max |A - A†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: &self.matrix * c(factor),
        }
    }

    pub fn plus(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn times(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// `U · self · U†`.
    pub fn conjugated_by(&self, u: &DenseOperator) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: &u.matrix * &self.matrix * u.matrix.adjoint(),
        }
    }
}

/// Pure statevector or density matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum DenseState {
    Pure { n: usize, amplitudes: DVector<C64> },
    Mixed { n: usize, rho: DMatrix<C64> },
}

impl DenseState {
    pub fn n(&self) -> usize {
        match self {
            DenseState::Pure { n, .. } | DenseState::Mixed { n, .. } => *n,
        }
    }

    pub fn density(&self) -> DMatrix<C64> {
        match self {
            DenseState::Pure { amplitudes, .. } => amplitudes * amplitudes.adjoint(),
            DenseState::Mixed { rho, .. } => rho.clone(),
        }
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match self {
            DenseState::Pure { amplitudes, .. } => Some(amplitudes),
            DenseState::Mixed { .. } => None,
        }
    }

    /// Trace (mixed) or squared norm (pure).
    pub fn trace(&self) -> f64 {
        match self {
            DenseState::Pure { amplitudes, .. } => amplitudes.norm_squared(),
            DenseState::Mixed { rho, .. } => rho.trace().re,
        }
    }

    /// `U ρ U†`.
    pub fn transformed(&self, u: &DenseOperator) -> DenseState {
        match self {
            DenseState::Pure { n, amplitudes } => DenseState::Pure {
                n: *n,
                amplitudes: &u.matrix * amplitudes,
            },
            DenseState::Mixed { n, rho } => DenseState::Mixed {
                n: *n,
                rho: &u.matrix * rho * u.matrix.adjoint(),
            },
        }
    }
}

/// `|⟨a|b⟩|²` for pure states.
pub fn fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    )
}

fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// Kronecker product of 2×2 factors, first factor on qubit 1.
pub fn tensor(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

/// `(cos a·σx + sin a·σy)` built by matrix addition.
fn xy_matrix(angle: f64) -> DMatrix<C64> {
    pauli_x() * c(angle.cos()) + pauli_y() * c(angle.sin())
}

/// Dense observable of a measurement setting.
pub fn setting_operator(setting: &MeasurementSetting) -> Result<DenseOperator> {
    let n = setting.n;
    check_dense(n)?;
    let factors: Vec<DMatrix<C64>> = match setting.kind {
        SettingKind::ZBasis => vec![pauli_z(); n],
        SettingKind::XAll => vec![pauli_x(); n],
        SettingKind::YXRest => std::iter::once(pauli_y())
            .chain(std::iter::repeat_n(pauli_x(), n - 1))
            .collect(),
        SettingKind::XYProduct(k) => {
            let angle = k as f64 * std::f64::consts::PI / (n + 1) as f64;
            vec![xy_matrix(angle); n]
        }
    };
    Ok(DenseOperator::new(n, tensor(&factors)))
}

/// `cosθ|0…0⟩ + e^{iφ}sinθ|1…1⟩`.
pub fn ghz_like_vector(n: usize, theta: f64, phi: f64) -> DVector<C64> {
    let dim = 1 << n;
    let mut v = DVector::zeros(dim);
    v[0] = c(theta.cos());
    v[dim - 1] = C64::from_polar(theta.sin(), phi);
    v
}

pub fn ghz_vector(n: usize) -> DVector<C64> {
    ghz_like_vector(n, std::f64::consts::FRAC_PI_4, 0.0)
}

fn projector(v: &DVector<C64>) -> DMatrix<C64> {
    v * v.adjoint()
}

/// CNOT as a basis permutation; qubits 1-based, qubit 1 the MSB.
fn cnot_permutation(n: usize, control: usize, target: usize) -> impl Fn(usize) -> usize {
    let cbit = 1usize << (n - control);
    let tbit = 1usize << (n - target);
    move |b| if b & cbit != 0 { b ^ tbit } else { b }
}

fn apply_single_qubit(v: &mut DVector<C64>, n: usize, qubit: usize, u: &DMatrix<C64>) {
    let bit = 1usize << (n - qubit);
    for b in 0..v.len() {
        if b & bit == 0 {
            let (a0, a1) = (v[b], v[b | bit]);
            v[b] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            v[b | bit] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
    }
}

/// The noisy first-qubit unitary: maps `|0⟩` to `cosθ|0⟩ + e^{iφ}sinθ|1⟩`.
pub fn noisy_first_qubit_unitary(theta: f64, phi: f64) -> DMatrix<C64> {
    let (s, co) = theta.sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            c(co),
            -C64::from_polar(s, -phi),
            C64::from_polar(s, phi),
            c(co),
        ],
    )
}

/// Statevector simulation of the preparation circuit: noisy unitary on
/// qubit 1, CNOT ladder `(1,2)…(n-1,n)`, then per-qubit Z-phase gates.
pub fn circuit_state(
    n: usize,
    theta: f64,
    phi_first: f64,
    final_phases: &[f64],
) -> Result<DenseState> {
    check_dense(n)?;
    if n < 1 {
        return Err(Error::InvalidSize { n, min: 1 });
    }
    if !final_phases.is_empty() && final_phases.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: final_phases.len(),
        });
    }
    let dim = 1 << n;
    let mut v = DVector::<C64>::zeros(dim);
    v[0] = c(1.0);
    apply_single_qubit(&mut v, n, 1, &noisy_first_qubit_unitary(theta, phi_first));
    for control in 1..n {
        let perm = cnot_permutation(n, control, control + 1);
        let mut next = DVector::zeros(dim);
        for b in 0..dim {
            next[perm(b)] = v[b];
        }
        v = next;
    }
    for (j, &phase) in final_phases.iter().enumerate() {
        let gate =
            DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), C64::from_polar(1.0, phase)]);
        apply_single_qubit(&mut v, n, j + 1, &gate);
    }
    Ok(DenseState::Pure { n, amplitudes: v })
}

/// `(1-p)|Ψ⟩⟨Ψ| + p·I/2^n` as a dense density matrix.
pub fn prepared_density(state: &PreparedState) -> Result<DenseState> {
    let n = state.n;
    check_dense(n)?;
    let dim = 1 << n;
    let psi = ghz_like_vector(n, state.theta(), state.phi());
    let rho =
        projector(&psi) * c(1.0 - state.p) + DMatrix::identity(dim, dim) * c(state.p / dim as f64);
    Ok(DenseState::Mixed { n, rho })
}

/// `(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)/2`.
pub fn z_projector(n: usize) -> Result<DenseOperator> {
    check_dense(n)?;
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    m[(0, 0)] = c(0.5);
    m[(dim - 1, dim - 1)] = c(0.5);
    Ok(DenseOperator::new(n, m))
}

/// `(|0…0⟩⟨1…1| + |1…1⟩⟨0…0|)/2`.
pub fn x_plus_operator(n: usize) -> Result<DenseOperator> {
    check_dense(n)?;
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    m[(0, dim - 1)] = c(0.5);
    m[(dim - 1, 0)] = c(0.5);
    Ok(DenseOperator::new(n, m))
}

/// `(|0…0⟩⟨1…1| - |1…1⟩⟨0…0|)/(2i)`.
pub fn x_minus_operator(n: usize) -> Result<DenseOperator> {
    check_dense(n)?;
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    let inv_2i = C64::new(0.0, -0.5);
    m[(0, dim - 1)] = inv_2i;
    m[(dim - 1, 0)] = -inv_2i;
    Ok(DenseOperator::new(n, m))
}

/// `U_CNOT · (U'σzU'† ⊗ I) · U_CNOT†` by explicit dense conjugation.
pub fn s1_prime_dense(n: usize, theta: f64, phi: f64) -> Result<DenseOperator> {
    check_dense(n)?;
    let u = noisy_first_qubit_unitary(theta, phi);
    let local = &u * pauli_z() * u.adjoint();
    let mut factors = vec![local];
    factors.extend(std::iter::repeat_n(DMatrix::<C64>::identity(2, 2), n - 1));
    let mut m = tensor(&factors);
    let dim = 1 << n;
    for control in 1..n {
        let perm = cnot_permutation(n, control, control + 1);
        let mut next = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for col in 0..dim {
                next[(perm(r), perm(col))] = m[(r, col)];
            }
        }
        m = next;
    }
    Ok(DenseOperator::new(n, m))
}

/// Dense CNOT matrix (for equivariance checks).
pub fn cnot_matrix(n: usize, control: usize, target: usize) -> Result<DenseOperator> {
    check_dense(n)?;
    let dim = 1 << n;
    let perm = cnot_permutation(n, control, target);
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        m[(perm(b), b)] = c(1.0);
    }
    Ok(DenseOperator::new(n, m))
}

/// Dense witness operator of `family` at the given parameters.
pub fn witness_matrix(
    family: WitnessFamily,
    params: CoherentParams,
    n: usize,
) -> Result<DenseOperator> {
    check_dense(n)?;
    if n < 2 {
        return Err(Error::InvalidSize { n, min: 2 });
    }
    let dim = 1 << n;
    let id = DMatrix::<C64>::identity(dim, dim);
    let m = match family {
        WitnessFamily::BaselineGhz => id * c(0.5) - projector(&ghz_vector(n)),
        WitnessFamily::FullFidelityPhi => {
            id * c(0.5) - projector(&ghz_like_vector(n, std::f64::consts::FRAC_PI_4, params.phi))
        }
        WitnessFamily::FullFidelityPhiTheta => {
            id * c(schmidt_bound(params.theta))
                - projector(&ghz_like_vector(n, params.theta, params.phi))
        }
        WitnessFamily::EfficientPhi => {
            let mx = setting_operator(&MeasurementSetting::x_all(n))?.into_matrix();
            let my = setting_operator(&MeasurementSetting::yx_rest(n))?.into_matrix();
            id * c(0.5)
                - z_projector(n)?.into_matrix()
                - (mx * c(params.phi.cos()) + my * c(params.phi.sin())) * c(0.25)
        }
        WitnessFamily::EfficientPhiTheta => {
            let offset = (2.0 * schmidt_bound(params.theta) + 1.0) / 4.0;
            id * c(offset)
                - z_projector(n)?.into_matrix()
                - s1_prime_dense(n, params.theta, params.phi)?.into_matrix() * c(0.25)
        }
    };
    Ok(DenseOperator::new(n, m))
}

/// `Tr(op·ρ)`; fails if the imaginary part exceeds `1e-10`.
pub fn trace_expectation(op: &DenseOperator, state: &DenseState) -> Result<f64> {
    if op.n != state.n() {
        return Err(Error::DimensionMismatch {
            expected: op.n,
            found: state.n(),
        });
    }
    let value = match state {
        DenseState::Pure { amplitudes, .. } => amplitudes.dotc(&(&op.matrix * amplitudes)),
        DenseState::Mixed { rho, .. } => (&op.matrix * rho).trace(),
    };
    if value.im.abs() > 1e-10 {
        return Err(Error::NonHermitian {
            deviation: value.im.abs(),
        });
    }
    Ok(value.re)
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(op: &DenseOperator) -> Result<f64> {
    if op.n > MAX_EIGEN_QUBITS {
        return Err(Error::SizeLimit {
            n: op.n,
            max: MAX_EIGEN_QUBITS,
        });
    }
    let deviation = op.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitian { deviation });
    }
    let eig = SymmetricEigen::new(op.matrix.clone());
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// `⟨s|ρ|s⟩` for the product eigenbasis of `setting`.
pub fn outcome_probability(
    state: &DenseState,
    setting: &MeasurementSetting,
    words: &[u64],
) -> Result<f64> {
    let n = setting.n;
    check_dense(n)?;
    let vectors: Vec<DMatrix<C64>> = (1..=n)
        .map(|q| {
            let minus = outcome::sign(words, q) < 0;
            match setting.angles() {
                None => {
                    if minus {
                        DMatrix::from_column_slice(2, 1, &[c(0.0), c(1.0)])
                    } else {
                        DMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)])
                    }
                }
                Some(angles) => {
                    let s = if minus { -1.0 } else { 1.0 };
                    let h = std::f64::consts::FRAC_1_SQRT_2;
                    DMatrix::from_column_slice(2, 1, &[c(h), C64::from_polar(s * h, angles[q - 1])])
                }
            }
        })
        .collect();
    let ket = DVector::from_column_slice(tensor(&vectors).as_slice());
    let rho = state.density();
    Ok(ket.dotc(&(&rho * &ket)).re)
}

fn haar_qubit(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let (a, b) = (C64::new(g(), g()), C64::new(g(), g()));
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / norm, b / norm)
}

/// Tensor product of `n` Haar-random single-qubit pure states.
pub fn random_product_state(n: usize, seed: u64) -> Result<DenseState> {
    check_dense(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kets: Vec<DMatrix<C64>> = (0..n)
        .map(|_| {
            let (a, b) = haar_qubit(&mut rng);
            DMatrix::from_column_slice(2, 1, &[a, b])
        })
        .collect();
    Ok(DenseState::Pure {
        n,
        amplitudes: DVector::from_column_slice(tensor(&kets).as_slice()),
    })
}

/// Tensor product of `n` Haar-random single-qubit unitaries.
pub fn random_local_unitary(n: usize, seed: u64) -> Result<DenseOperator> {
    check_dense(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<DMatrix<C64>> = (0..n)
        .map(|_| {
            let (a, b) = haar_qubit(&mut rng);
            let (_, phase) = haar_qubit(&mut rng);
            let g = C64::from_polar(1.0, phase.arg());
            DMatrix::from_row_slice(2, 2, &[a * g, -b.conj() * g, b * g, a.conj() * g])
        })
        .collect();
    Ok(DenseOperator::new(n, tensor(&factors)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    #[test]
    fn circuit_examples() {
        let ghz = circuit_state(3, FRAC_PI_4, 0.0, &[]).unwrap();
        let amps = ghz.amplitudes().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((amps[0] - c(h)).norm() < 1e-15 && (amps[7] - c(h)).norm() < 1e-15);
        assert!((1..7).all(|i| amps[i].norm() < 1e-15));

        let st = circuit_state(2, FRAC_PI_3, 0.3, &[0.1, 0.2]).unwrap();
        let target = ghz_like_vector(2, FRAC_PI_3, 0.6);
        assert!((fidelity(st.amplitudes().unwrap(), &target) - 1.0).abs() < 1e-14);

        let zero = circuit_state(2, 0.0, 1.0, &[]).unwrap();
        assert!((zero.amplitudes().unwrap()[0] - c(1.0)).norm() < 1e-15);
        assert!(matches!(
            circuit_state(11, 0.0, 0.0, &[]),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn witness_matrix_examples() {
        let w = witness_matrix(WitnessFamily::FullFidelityPhi, CoherentParams::ghz(), 2).unwrap();
        let id = DMatrix::<C64>::identity(4, 4);
        let expected = id.clone() * c(0.5) - projector(&ghz_vector(2));
        assert!((w.matrix() - expected).camax() < 1e-15);

        let w2 = witness_matrix(WitnessFamily::EfficientPhi, CoherentParams::ghz(), 2).unwrap();
        let xx = tensor(&[pauli_x(), pauli_x()]);
        let expected = id * c(0.5) - z_projector(2).unwrap().into_matrix() - xx * c(0.25);
        assert!((w2.matrix() - expected).camax() < 1e-15);

        let a = witness_matrix(
            WitnessFamily::FullFidelityPhiTheta,
            CoherentParams::phase(0.8),
            3,
        )
        .unwrap();
        let b = witness_matrix(
            WitnessFamily::FullFidelityPhi,
            CoherentParams::phase(0.8),
            3,
        )
        .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn trace_examples() {
        let w = witness_matrix(WitnessFamily::BaselineGhz, CoherentParams::ghz(), 3).unwrap();
        let flipped = DenseState::Pure {
            n: 3,
            amplitudes: ghz_like_vector(3, FRAC_PI_4, PI),
        };
        assert!((trace_expectation(&w, &flipped).unwrap() - 0.5).abs() < 1e-15);
        for i in 0..12 {
            let phi = -PI + i as f64 * PI / 6.0;
            let st = DenseState::Pure {
                n: 3,
                amplitudes: ghz_like_vector(3, FRAC_PI_4, phi),
            };
            assert!((trace_expectation(&w, &st).unwrap() + phi.cos() / 2.0).abs() < 1e-14);
        }
        for n in 2..=6 {
            let p_max = 2f64.powi(n as i32 - 1) / (2f64.powi(n as i32) - 1.0);
            let st = PreparedState::new(n, CoherentParams::ghz(), p_max).unwrap();
            let w = witness_matrix(WitnessFamily::BaselineGhz, CoherentParams::ghz(), n).unwrap();
            assert!(
                trace_expectation(&w, &prepared_density(&st).unwrap())
                    .unwrap()
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn trace_rejects_mismatch() {
        let w = DenseOperator::identity(2);
        let st = DenseState::Pure {
            n: 3,
            amplitudes: ghz_vector(3),
        };
        assert!(matches!(
            trace_expectation(&w, &st),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((min_eigenvalue(&DenseOperator::identity(2)).unwrap() - 1.0).abs() < 1e-12);
        let w = witness_matrix(WitnessFamily::BaselineGhz, CoherentParams::ghz(), 3).unwrap();
        let w2 = witness_matrix(WitnessFamily::EfficientPhi, CoherentParams::ghz(), 3).unwrap();
        let gap = w2.scaled(2.0).plus(&w.scaled(-1.0));
        assert!(min_eigenvalue(&gap).unwrap() >= -1e-10);
        let mut bad = DMatrix::<C64>::zeros(2, 2);
        bad[(0, 1)] = c(1.0);
        assert!(matches!(
            min_eigenvalue(&DenseOperator::new(1, bad)),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn product_states_are_deterministic_and_normalized() {
        let a = random_product_state(3, 42).unwrap();
        let b = random_product_state(3, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.trace() - 1.0).abs() < 1e-12);
        let u = random_local_unitary(3, 7).unwrap();
        let uu = u.times(&DenseOperator::new(3, u.matrix().adjoint()));
        assert!(uu.max_abs_diff(&DenseOperator::identity(3)) < 1e-12);
    }

    #[test]
    fn s1_prime_dense_agrees_with_symbolic() {
        for n in 2..=6 {
            for &(theta, phi) in &[(0.2, 0.3), (FRAC_PI_4, -2.5), (1.4, PI - 0.1)] {
                let dense = s1_prime_dense(n, theta, phi).unwrap();
                let symbolic =
                    pauli::dense_matrix(&pauli::s1_prime(n, theta, phi).unwrap()).unwrap();
                assert!(dense.max_abs_diff(&symbolic) < 1e-12);
            }
        }
    }

    #[test]
    fn x_minus_is_half_sigma_y_for_one_qubit() {
        let xm = x_minus_operator(1).unwrap();
        assert!((xm.matrix() - pauli_y() * c(0.5)).camax() < 1e-15);
    }
}
