use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ghz_witness::oracle::{self, DenseOperator, DenseState};
use ghz_witness::par::Execution;
use ghz_witness::pauli::{
    cnot_conjugate, dense_matrix, ghz_stabilizer_generators, s1_prime, ObservableSum,
    ProductObservable, SingleQubitObservable as Sq,
};
use ghz_witness::protocol::{estimate_expectations, sample_shots, ExpectationSet, FamilyKind};
use ghz_witness::state::{
    diagonal_stats, expectation_exact, outcome_distribution, CoherentParams, MeasurementSetting,
    PreparedState, SettingKind,
};
use ghz_witness::witness::{
    evaluate, phi_opt_efficient, phi_opt_full, theta_opt_efficient, theta_opt_full,
    threshold_by_bisection, tolerance, SystemSize, WitnessFamily,
};
use ghz_witness::C64;

fn pauli_factor() -> impl Strategy<Value = Sq> {
    prop_oneof![Just(Sq::Identity), Just(Sq::X), Just(Sq::Y), Just(Sq::Z)]
}

fn observable_sum() -> impl Strategy<Value = ObservableSum> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec(
            (-2.0f64..2.0, prop::collection::vec(pauli_factor(), n)),
            1..5,
        )
        .prop_map(move |terms| {
            let terms = terms
                .into_iter()
                .map(|(c, f)| (c, ProductObservable::new(f)))
                .collect();
            ObservableSum::from_terms(n, terms).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cnot_conjugation_matches_dense(obs in observable_sum(), a in 1usize..=6, b in 1usize..=6) {
        let n = obs.n();
        let (control, target) = (1 + (a - 1) % n, 1 + (b - 1) % n);
        prop_assume!(control != target);
        let symbolic = dense_matrix(&cnot_conjugate(&obs, control, target).unwrap()).unwrap();
        let u = oracle::cnot_matrix(n, control, target).unwrap();
        let dense = dense_matrix(&obs).unwrap().conjugated_by(&u);
        prop_assert!(symbolic.max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn exact_expectation_matches_trace(n in 2usize..=8, theta in 0.0..FRAC_PI_2, phi in -PI..PI, p in 0.0f64..=1.0, pick in 0usize..64) {
        let st = PreparedState::new(n, CoherentParams::new(theta, phi).unwrap(), p).unwrap();
        let setting = match pick % 4 {
            0 => MeasurementSetting::z(n),
            1 => MeasurementSetting::x_all(n),
            2 => MeasurementSetting::yx_rest(n),
            _ => MeasurementSetting::xy(n, pick % (n + 1)),
        };
        let rho = oracle::prepared_density(&st).unwrap();
        let dense = oracle::trace_expectation(&oracle::setting_operator(&setting).unwrap(), &rho).unwrap();
        prop_assert!((expectation_exact(&st, &setting).unwrap() - dense).abs() < 1e-10);
    }

    #[test]
    fn distribution_reproduces_expectation(n in 2usize..=8, theta in 0.0..FRAC_PI_2, phi in -PI..PI, p in 0.0f64..=1.0, k in 0usize..9) {
        let st = PreparedState::new(n, CoherentParams::new(theta, phi).unwrap(), p).unwrap();
        for setting in [MeasurementSetting::z(n), MeasurementSetting::xy(n, k % (n + 1)), MeasurementSetting::yx_rest(n)] {
            let dist = outcome_distribution(&st, &setting).unwrap();
            let total: f64 = dist
                .enumerate()
                .unwrap()
                .iter()
                .map(|(w, prob)| prob * ghz_witness::state::outcome::parity(w) as f64)
                .sum();
            prop_assert!((total - expectation_exact(&st, &setting).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluate_is_a_witness_expectation(n in 2usize..=6, theta in 0.0..FRAC_PI_2, phi in -PI..PI, p in 0.0f64..0.95) {
        let params = CoherentParams::new(theta, phi).unwrap();
        let st = PreparedState::new(n, params, p).unwrap();
        let rho = oracle::prepared_density(&st).unwrap();
        for family in WitnessFamily::ALL {
            let es = ExpectationSet::exact_family(&st, family.settings()).unwrap();
            let r = evaluate(family, &es, 3.0).unwrap();
            let used = CoherentParams { theta: r.theta_opt.map_or(FRAC_PI_4, |t| t.value), phi: r.phi_opt.value };
            let w = oracle::witness_matrix(family, used, n).unwrap();
            prop_assert!((r.witness_value - oracle::trace_expectation(&w, &rho).unwrap()).abs() < 1e-10);
            prop_assert!(!r.entangled || r.witness_value < 0.0);
        }
    }
}

#[test]
fn s1_prime_stabilizes_prepared_state() {
    for n in 2..=8 {
        for i in 0..5 {
            for j in 0..5 {
                let theta = FRAC_PI_2 * i as f64 / 4.0;
                let phi = -PI + 2.0 * PI * j as f64 / 5.0;
                let s = dense_matrix(&s1_prime(n, theta, phi).unwrap()).unwrap();
                let st = oracle::circuit_state(n, theta, phi, &[]).unwrap();
                let v = st.amplitudes().unwrap();
                assert!(
                    (s.matrix() * v - v).camax() < 1e-12,
                    "n={n} theta={theta} phi={phi}"
                );
            }
        }
    }
}

#[test]
fn stabilizer_generators_commute_and_fix_ghz() {
    for n in 2..=8 {
        let gens: Vec<DenseOperator> = ghz_stabilizer_generators(n)
            .unwrap()
            .iter()
            .map(|g| dense_matrix(g).unwrap())
            .collect();
        let ghz = oracle::ghz_vector(n);
        for (i, a) in gens.iter().enumerate() {
            assert!((a.matrix() * &ghz - &ghz).camax() < 1e-12);
            for b in &gens[i + 1..] {
                assert!(a.times(b).max_abs_diff(&b.times(a)) < 1e-12);
            }
        }
    }
}

#[test]
fn xy_angle_is_rotated_pauli() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = Sq::X.dense();
    let y = Sq::Y.dense();
    for _ in 0..100 {
        let a = rng.random_range(-PI..PI);
        let expected = &x * C64::new(a.cos(), 0.0) + &y * C64::new(a.sin(), 0.0);
        assert!((Sq::XYAngle(a).dense() - expected).camax() < 1e-14);
    }
}

fn projector_sum(n: usize, gens: &[DenseOperator]) -> DMatrix<C64> {
    let dim = 1 << n;
    let id = DMatrix::<C64>::identity(dim, dim);
    gens.iter().fold(id.clone(), |acc, g| {
        acc * ((&id + g.matrix()) * C64::new(0.5, 0.0))
    })
}

#[test]
fn stabilizer_projectors() {
    for n in 2..=8 {
        let gens: Vec<DenseOperator> = ghz_stabilizer_generators(n)
            .unwrap()
            .iter()
            .map(|g| dense_matrix(g).unwrap())
            .collect();
        let p1 = projector_sum(n, &gens[..1]);
        let p2 = projector_sum(n, &gens[1..]);
        let ghz = oracle::ghz_vector(n);
        assert!((&p1 * &p2 - &ghz * ghz.adjoint()).camax() < 1e-12);
        let z = oracle::z_projector(n).unwrap();
        assert!((p2 - z.matrix() * C64::new(2.0, 0.0)).camax() < 1e-12);
    }
}

#[test]
fn phase_shifted_settings_are_fourier_modes() {
    for n in 1..=7 {
        let dim = 1usize << n;
        for k in 0..=n {
            let theta = k as f64 * PI / (n + 1) as f64;
            let m = oracle::setting_operator(&MeasurementSetting::xy(n, k)).unwrap();
            let shifted = m.matrix() * C64::from_polar(1.0, n as f64 * theta);
            let mut expected = DMatrix::<C64>::zeros(dim, dim);
            for b in 0..dim {
                let weight = b.count_ones() as f64;
                expected[(b, !b & (dim - 1))] =
                    C64::from_polar(1.0, 2.0 * PI * k as f64 * weight / (n + 1) as f64);
            }
            assert!((shifted - expected).camax() < 1e-12);
        }
    }
}

#[test]
fn z_projector_accessor_matches_dense() {
    for n in 2..=8 {
        let st = PreparedState::new(n, CoherentParams::new(0.35, 2.2).unwrap(), 0.4).unwrap();
        let dense = oracle::trace_expectation(
            &oracle::z_projector(n).unwrap(),
            &oracle::prepared_density(&st).unwrap(),
        )
        .unwrap();
        assert!((diagonal_stats(&st).z_projector() - dense).abs() < 1e-12);
    }
}

#[test]
fn ghz_witness_under_phase_noise() {
    for &n in &[3, 6, 30] {
        for &(phi, p) in &[(0.0, 0.2), (1.0, 0.3), (2.5, 0.05), (-0.4, 0.6)] {
            let st = PreparedState::new(n, CoherentParams::phase(phi), p).unwrap();
            let es = ExpectationSet::exact_family(&st, FamilyKind::Full).unwrap();
            let value = evaluate(WitnessFamily::BaselineGhz, &es, 3.0)
                .unwrap()
                .witness_value;
            let expected = 0.5 - (1.0 - p) * (1.0 + phi.cos()) / 2.0 - p / 2f64.powi(n as i32);
            assert!((value - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn ghz_witness_sign_at_large_n() {
    let n = 30;
    for i in 0..=20 {
        for j in 0..=20 {
            for &p in &[0.05, 0.2, 0.4, 0.6] {
                let theta = FRAC_PI_2 * i as f64 / 20.0;
                let phi = -PI + 2.0 * PI * j as f64 / 20.0;
                let s = (2.0 * theta).sin() * phi.cos();
                let margin = s - p / (1.0 - p);
                if margin.abs() < 1e-6 {
                    continue;
                }
                let st =
                    PreparedState::new(n, CoherentParams::new(theta, phi).unwrap(), p).unwrap();
                let es = ExpectationSet::exact_family(&st, FamilyKind::Full).unwrap();
                let value = evaluate(WitnessFamily::BaselineGhz, &es, 3.0)
                    .unwrap()
                    .witness_value;
                assert_eq!(value < 0.0, margin > 0.0, "theta={theta} phi={phi} p={p}");
            }
        }
    }
}

#[test]
fn exact_mode_recovers_parameters() {
    for n in 2..=8 {
        for i in 0..20 {
            for j in 0..20 {
                for l in 0..10 {
                    let theta = 0.02 + (FRAC_PI_2 - 0.04) * i as f64 / 19.0;
                    let phi = -PI + 2.0 * PI * j as f64 / 20.0;
                    let p = 0.95 * l as f64 / 9.0;
                    let st =
                        PreparedState::new(n, CoherentParams::new(theta, phi).unwrap(), p).unwrap();
                    let full = ExpectationSet::exact_family(&st, FamilyKind::Full).unwrap();
                    let eff = ExpectationSet::exact_family(&st, FamilyKind::Efficient).unwrap();
                    let dphi = |a: f64| ghz_witness::wrap_angle(a - phi).abs();
                    assert!(dphi(phi_opt_full(&full).unwrap().value) < 1e-10);
                    assert!(dphi(phi_opt_efficient(&eff).unwrap().value) < 1e-10);
                    assert!((theta_opt_full(&full).unwrap().value - theta).abs() < 1e-10);
                    assert!((theta_opt_efficient(&eff).unwrap().value - theta).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn zero_crossings_match_tolerances() {
    for family in WitnessFamily::ALL {
        for i in 1..12 {
            let theta = FRAC_PI_2 * i as f64 / 12.0;
            let params = CoherentParams::new(theta, 0.6).unwrap();
            for &n in &[8, 20] {
                let p = threshold_by_bisection(family, n, params).unwrap();
                assert!(
                    (p - tolerance(family, theta, 0.6, SystemSize::Finite(n))).abs() < 1e-9,
                    "{family} n={n}"
                );
                assert!(
                    (p - tolerance(family, theta, 0.6, SystemSize::Asymptotic)).abs()
                        < 2f64.powi(2 - n as i32)
                );
            }
        }
    }
}

#[test]
fn dominance_on_grid() {
    for i in 0..=200 {
        let theta = FRAC_PI_2 * i as f64 / 200.0;
        let a = SystemSize::Asymptotic;
        let t = |f| tolerance(f, theta, 0.0, a);
        assert!(
            t(WitnessFamily::FullFidelityPhi) >= t(WitnessFamily::FullFidelityPhiTheta) - 1e-12
        );
        assert!(t(WitnessFamily::EfficientPhi) >= t(WitnessFamily::EfficientPhiTheta) - 1e-12);
    }
}

#[test]
fn product_states_respect_every_witness() {
    let grid: Vec<CoherentParams> = [(0.2, 0.0), (FRAC_PI_4, 2.0), (1.3, -1.0)]
        .iter()
        .map(|&(t, p)| CoherentParams::new(t, p).unwrap())
        .collect();
    for n in 2..=4 {
        for family in WitnessFamily::ALL {
            let ws: Vec<DenseOperator> = grid
                .iter()
                .map(|&g| oracle::witness_matrix(family, g, n).unwrap())
                .collect();
            let worst = Execution::default()
                .map_range(0..10_000, |i| {
                    let sigma =
                        oracle::random_product_state(n, (n as u64) << 32 | i as u64).unwrap();
                    oracle::trace_expectation(&ws[i % ws.len()], &sigma).unwrap()
                })
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            assert!(worst >= -1e-10, "{family} n={n}: {worst}");
        }
    }
}

/// `σy` on `qubit`, `σx` elsewhere.
fn y_on(n: usize, qubit: usize) -> DMatrix<C64> {
    let factors: Vec<DMatrix<C64>> = (1..=n)
        .map(|j| {
            if j == qubit {
                Sq::Y.dense()
            } else {
                Sq::X.dense()
            }
        })
        .collect();
    oracle::tensor(&factors)
}

#[test]
fn y_position_is_irrelevant() {
    for n in 2..=4 {
        let st = PreparedState::new(n, CoherentParams::new(FRAC_PI_4, 1.1).unwrap(), 0.2).unwrap();
        let rho = oracle::prepared_density(&st).unwrap();
        let values: Vec<f64> = (1..=n)
            .map(|q| oracle::trace_expectation(&DenseOperator::new(n, y_on(n, q)), &rho).unwrap())
            .collect();
        let exact = expectation_exact(&st, &MeasurementSetting::yx_rest(n)).unwrap();
        assert!(values.iter().all(|v| (v - exact).abs() < 1e-12));
    }
}

#[test]
fn phase_estimate_ignores_shot_scale() {
    let st = PreparedState::new(4, CoherentParams::new(0.7, -1.9).unwrap(), 0.2).unwrap();
    let mut es = ExpectationSet::exact_family(&st, FamilyKind::Efficient).unwrap();
    let base = evaluate(WitnessFamily::EfficientPhi, &es, 3.0).unwrap();
    let settings: Vec<MeasurementSetting> = es.settings().map(|(s, _)| *s).collect();
    for s in settings {
        let mut e = *es.get(&s).unwrap();
        e.shots = 1000;
        e.std_err = 1e-3;
        es.insert(s, e).unwrap();
    }
    let scaled = evaluate(WitnessFamily::EfficientPhi, &es, 3.0).unwrap();
    assert_eq!(base.phi_opt.value, scaled.phi_opt.value);
    assert_eq!(base.witness_value, scaled.witness_value);
}

#[test]
fn sample_means_are_unbiased() {
    let st = PreparedState::new(4, CoherentParams::new(0.5, 0.8).unwrap(), 0.15).unwrap();
    for setting in [
        MeasurementSetting::z(4),
        MeasurementSetting::xy(4, 2),
        MeasurementSetting::yx_rest(4),
    ] {
        let estimates = Execution::default().map_range(0..200, |seed| {
            let r = sample_shots(&st, &setting, 10_000, 500 + seed as u64).unwrap();
            estimate_expectations(&[r])
                .unwrap()
                .get(&setting)
                .unwrap()
                .value
        });
        let mean = estimates.iter().sum::<f64>() / 200.0;
        let var = estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 199.0;
        let sem = (var / 200.0).sqrt();
        let truth = expectation_exact(&st, &setting).unwrap();
        assert!(
            (mean - truth).abs() < 5.0 * sem,
            "{setting}: {mean} vs {truth} (sem {sem})"
        );
    }
}

#[test]
fn sampled_diagonal_statistics_match() {
    let st = PreparedState::new(3, CoherentParams::new(0.4, 0.0).unwrap(), 0.3).unwrap();
    let r = sample_shots(&st, &MeasurementSetting::z(3), 200_000, 8).unwrap();
    let es = estimate_expectations(&[r]).unwrap();
    let d = es.diagonal().unwrap();
    let truth = diagonal_stats(&st);
    for (est, t, var) in [
        (d.stats.z0, truth.z0, d.covariance[0][0]),
        (d.stats.z1, truth.z1, d.covariance[1][1]),
        (d.stats.mz, truth.mz, d.covariance[2][2]),
    ] {
        assert!((est - t).abs() < 4.0 * var.sqrt(), "{est} vs {t}");
    }
    assert_eq!(es.get(&MeasurementSetting::z(3)).unwrap().shots, 200_000);
    assert_eq!(MeasurementSetting::z(3).kind, SettingKind::ZBasis);
}

#[test]
fn mixed_state_density_is_normalized() {
    let st = PreparedState::new(5, CoherentParams::new(1.0, 0.3).unwrap(), 0.7).unwrap();
    let rho = oracle::prepared_density(&st).unwrap();
    assert!((rho.trace() - 1.0).abs() < 1e-12);
    let pure = DenseState::Pure {
        n: 5,
        amplitudes: DVector::from_element(32, C64::new(32f64.sqrt().recip(), 0.0)),
    };
    assert!((pure.trace() - 1.0).abs() < 1e-12);
}
