//! Symbolic algebra for real combinations of tensor-product observables.
//!
//! Qubit 1 is the leftmost tensor factor and the most significant bit of a
//! computational-basis index. Public qubit indices are 1-based.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::oracle::{DenseOperator, MAX_DENSE_QUBITS};
use crate::{wrap_angle, C64};

/// Terms whose coefficient falls below this magnitude are dropped.
pub const COEFFICIENT_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug)]
pub enum SingleQubitObservable {
    Identity,
    X,
    Y,
    Z,
    /// `cos(a)·σx + sin(a)·σy`.
    XYAngle(f64),
}

use SingleQubitObservable as Sq;

impl SingleQubitObservable {
    fn rank(&self) -> u8 {
        match self {
            Sq::Identity => 0,
            Sq::X => 1,
            Sq::Y => 2,
            Sq::Z => 3,
            Sq::XYAngle(_) => 4,
        }
    }

    /// `⟨row|σ|col⟩` for single-qubit basis bits.
    pub fn element(&self, row: usize, col: usize) -> C64 {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match (self, row, col) {
            (Sq::Identity, r, c) => {
                if r == c {
                    one
                } else {
                    zero
                }
            }
            (Sq::X, r, c) => {
                if r != c {
                    one
                } else {
                    zero
                }
            }
            (Sq::Y, 0, 1) => C64::new(0.0, -1.0),
            (Sq::Y, 1, 0) => C64::new(0.0, 1.0),
            (Sq::Y, _, _) => zero,
            (Sq::Z, 0, 0) => one,
            (Sq::Z, 1, 1) => -one,
            (Sq::Z, _, _) => zero,
            (Sq::XYAngle(a), 0, 1) => C64::from_polar(1.0, -a),
            (Sq::XYAngle(a), 1, 0) => C64::from_polar(1.0, *a),
            (Sq::XYAngle(_), _, _) => zero,
        }
    }

    /// Whether the factor maps `|b⟩` to `|1-b⟩` (as opposed to being diagonal).
    pub fn flips(&self) -> bool {
        matches!(self, Sq::X | Sq::Y | Sq::XYAngle(_))
    }

    pub fn dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(2, 2, |r, c| self.element(r, c))
    }

    fn symbol(&self) -> String {
        match self {
            Sq::Identity => "I".into(),
            Sq::X => "X".into(),
            Sq::Y => "Y".into(),
            Sq::Z => "Z".into(),
            Sq::XYAngle(a) => format!("XY({a})"),
        }
    }
}

impl PartialEq for SingleQubitObservable {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SingleQubitObservable {}

impl PartialOrd for SingleQubitObservable {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SingleQubitObservable {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Sq::XYAngle(a), Sq::XYAngle(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for SingleQubitObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol())
    }
}

/// Tensor product of single-qubit factors; element 0 acts on qubit 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductObservable(Vec<SingleQubitObservable>);

impl ProductObservable {
    pub fn new(factors: Vec<SingleQubitObservable>) -> Self {
        ProductObservable(factors)
    }

    pub fn identity(n: usize) -> Self {
        ProductObservable(vec![Sq::Identity; n])
    }

    /// Single non-trivial factor `op` on `qubit` (1-based).
    pub fn single(n: usize, qubit: usize, op: SingleQubitObservable) -> Self {
        let mut factors = vec![Sq::Identity; n];
        factors[qubit - 1] = op;
        ProductObservable(factors)
    }

    pub fn uniform(n: usize, op: SingleQubitObservable) -> Self {
        ProductObservable(vec![op; n])
    }

    pub fn factors(&self) -> &[SingleQubitObservable] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit mask of flipping factors, qubit 1 at the most significant bit.
    fn flip_mask(&self) -> usize {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, f)| f.flips())
            .fold(0, |m, (j, _)| m | (1 << (n - 1 - j)))
    }
}

impl fmt::Display for ProductObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.symbol()).collect();
        f.write_str(&parts.join("⊗"))
    }
}

/// Real linear combination of tensor-product observables in canonical form:
/// terms sorted, equal products merged, negligible coefficients removed.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSum {
    n: usize,
    terms: Vec<(f64, ProductObservable)>,
}

impl ObservableSum {
    pub fn zero(n: usize) -> Self {
        ObservableSum {
            n,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n: usize, terms: Vec<(f64, ProductObservable)>) -> Result<Self> {
        if let Some((_, bad)) = terms.iter().find(|(_, p)| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let mut sum = ObservableSum { n, terms };
        sum.canonicalize();
        Ok(sum)
    }

    pub fn product(coefficient: f64, product: ProductObservable) -> Self {
        let n = product.len();
        let mut sum = ObservableSum {
            n,
            terms: vec![(coefficient, product)],
        };
        sum.canonicalize();
        sum
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, ProductObservable)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(f64, ProductObservable)> = Vec::with_capacity(self.terms.len());
        for (c, p) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((acc, last)) if *last == p => *acc += c,
                _ => merged.push((c, p)),
            }
        }
        merged.retain(|(c, _)| c.abs() >= COEFFICIENT_EPS);
        self.terms = merged;
    }

    pub fn add(&self, other: &ObservableSum) -> Result<ObservableSum> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let terms = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .cloned()
            .collect();
        ObservableSum::from_terms(self.n, terms)
    }

    pub fn scale(&self, factor: f64) -> ObservableSum {
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| (c * factor, p.clone()))
            .collect();
        let mut sum = ObservableSum { n: self.n, terms };
        sum.canonicalize();
        sum
    }

    /// Rewrites every `XYAngle(a)` factor as `cos(a)·X + sin(a)·Y`.
    pub fn expand_xy(&self) -> ObservableSum {
        let mut out = Vec::new();
        for (c, p) in &self.terms {
            let mut partial: Vec<(f64, Vec<SingleQubitObservable>)> = vec![(*c, Vec::new())];
            for factor in p.factors() {
                partial = match factor {
                    Sq::XYAngle(a) => partial
                        .into_iter()
                        .flat_map(|(coef, head)| {
                            let mut hx = head.clone();
                            hx.push(Sq::X);
                            let mut hy = head;
                            hy.push(Sq::Y);
                            [(coef * a.cos(), hx), (coef * a.sin(), hy)]
                        })
                        .collect(),
                    other => partial
                        .into_iter()
                        .map(|(coef, mut head)| {
                            head.push(*other);
                            (coef, head)
                        })
                        .collect(),
                };
            }
            out.extend(
                partial
                    .into_iter()
                    .map(|(coef, f)| (coef, ProductObservable(f))),
            );
        }
        let mut sum = ObservableSum {
            n: self.n,
            terms: out,
        };
        sum.canonicalize();
        sum
    }

    /// Places this `m`-qubit sum on the first `m` qubits of an `n`-qubit register.
    pub fn embed(&self, n: usize) -> Result<ObservableSum> {
        if n < self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| {
                let mut f = p.0.clone();
                f.resize(n, Sq::Identity);
                (*c, ProductObservable(f))
            })
            .collect();
        ObservableSum::from_terms(n, terms)
    }

    /// Max coefficient difference over the union of terms.
    pub fn max_coefficient_diff(&self, other: &ObservableSum) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        let diff = self.add(&other.scale(-1.0)).expect("same n");
        diff.terms.iter().map(|(c, _)| c.abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for ObservableSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(c, p)| format!("{c}·{p}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `[σx^⊗n, σz¹σz², σz²σz³, …, σz^(n-1)σz^n]`.
pub fn ghz_stabilizer_generators(n: usize) -> Result<Vec<ObservableSum>> {
    if n < 2 {
        return Err(Error::InvalidSize { n, min: 2 });
    }
    let mut gens = vec![ObservableSum::product(
        1.0,
        ProductObservable::uniform(n, Sq::X),
    )];
    for i in 1..n {
        let mut factors = vec![Sq::Identity; n];
        factors[i - 1] = Sq::Z;
        factors[i] = Sq::Z;
        gens.push(ObservableSum::product(1.0, ProductObservable(factors)));
    }
    Ok(gens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_factor(f: Sq) -> Option<Pauli> {
        match f {
            Sq::Identity => Some(Pauli::I),
            Sq::X => Some(Pauli::X),
            Sq::Y => Some(Pauli::Y),
            Sq::Z => Some(Pauli::Z),
            Sq::XYAngle(_) => None,
        }
    }

    fn to_factor(self) -> Sq {
        match self {
            Pauli::I => Sq::Identity,
            Pauli::X => Sq::X,
            Pauli::Y => Sq::Y,
            Pauli::Z => Sq::Z,
        }
    }

    /// `a·b = i^k · c`, returned as `(k mod 4, c)`.
    fn mul(a: Pauli, b: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }
}

/// Image of a control-qubit factor under CNOT conjugation, as (control, target).
fn cnot_control_image(p: Pauli) -> (Pauli, Pauli) {
    match p {
        Pauli::I => (Pauli::I, Pauli::I),
        Pauli::X => (Pauli::X, Pauli::X),
        Pauli::Y => (Pauli::Y, Pauli::X),
        Pauli::Z => (Pauli::Z, Pauli::I),
    }
}

/// Image of a target-qubit factor under CNOT conjugation, as (control, target).
fn cnot_target_image(p: Pauli) -> (Pauli, Pauli) {
    match p {
        Pauli::I => (Pauli::I, Pauli::I),
        Pauli::X => (Pauli::I, Pauli::X),
        Pauli::Y => (Pauli::Z, Pauli::Y),
        Pauli::Z => (Pauli::Z, Pauli::Z),
    }
}

/// `CNOT·O·CNOT` with the given 1-based control and target qubits.
pub fn cnot_conjugate(obs: &ObservableSum, control: usize, target: usize) -> Result<ObservableSum> {
    let n = obs.n;
    if control == target || control == 0 || target == 0 || control > n || target > n {
        return Err(Error::InvalidQubits { control, target, n });
    }
    let (ci, ti) = (control - 1, target - 1);
    let mut terms = Vec::with_capacity(obs.terms.len());
    for (coef, product) in &obs.terms {
        let pauli_at = |idx: usize| {
            Pauli::from_factor(product.0[idx]).ok_or_else(|| Error::UnsupportedFactor {
                qubit: idx + 1,
                factor: product.0[idx].symbol(),
            })
        };
        let (pc, pt) = (pauli_at(ci)?, pauli_at(ti)?);
        let (a_c, a_t) = cnot_control_image(pc);
        let (b_c, b_t) = cnot_target_image(pt);
        let (k1, new_c) = Pauli::mul(a_c, b_c);
        let (k2, new_t) = Pauli::mul(a_t, b_t);
        let phase = (k1 + k2) % 4;
        debug_assert!(
            phase % 2 == 0,
            "Hermitian Pauli mapped to non-Hermitian image"
        );
        let sign = if phase == 2 { -1.0 } else { 1.0 };
        let mut factors = product.0.clone();
        factors[ci] = new_c.to_factor();
        factors[ti] = new_t.to_factor();
        terms.push((coef * sign, ProductObservable(factors)));
    }
    ObservableSum::from_terms(n, terms)
}

/// `U'·σz·U'†` for the noisy first-qubit unitary preparing
/// `cosθ|0⟩ + e^{iφ}sinθ|1⟩`: the Bloch vector of that state, as a 1-qubit sum.
pub fn noisy_hadamard_conjugate_z(theta: f64, phi: f64) -> ObservableSum {
    let phi = wrap_angle(phi);
    let (s2, c2) = (2.0 * theta).sin_cos();
    let terms = vec![
        (c2, ProductObservable(vec![Sq::Z])),
        (s2 * phi.cos(), ProductObservable(vec![Sq::X])),
        (s2 * phi.sin(), ProductObservable(vec![Sq::Y])),
    ];
    ObservableSum::from_terms(1, terms).expect("1-qubit terms")
}

/// Generalized stabilizer replacing `σx^⊗n` for `cosθ|0…0⟩ + e^{iφ}sinθ|1…1⟩`:
/// the first-qubit Bloch observable pushed through the CNOT ladder
/// `(1,2), (2,3), …, (n-1,n)`.
pub fn s1_prime(n: usize, theta: f64, phi: f64) -> Result<ObservableSum> {
    if n < 2 {
        return Err(Error::InvalidSize { n, min: 2 });
    }
    let mut obs = noisy_hadamard_conjugate_z(theta, phi).embed(n)?;
    for control in 1..n {
        obs = cnot_conjugate(&obs, control, control + 1)?;
    }
    Ok(obs)
}

/// Dense `2^n × 2^n` matrix of an observable sum (σy = [[0,-i],[i,0]]).
pub fn dense_matrix(obs: &ObservableSum) -> Result<DenseOperator> {
    let n = obs.n;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeLimit {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (coef, product) in &obs.terms {
        // Every product is monomial: row r has a single entry at column r ^ mask.
        let mask = product.flip_mask();
        for row in 0..dim {
            let col = row ^ mask;
            let mut value = C64::new(*coef, 0.0);
            for (j, factor) in product.0.iter().enumerate() {
                let shift = n - 1 - j;
                value *= factor.element((row >> shift) & 1, (col >> shift) & 1);
            }
            m[(row, col)] += value;
        }
    }
    Ok(DenseOperator::new(n, m))
}
