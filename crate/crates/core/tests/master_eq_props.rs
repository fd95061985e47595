use centralspin::angular::{pauli, CMatrix, I_UNIT};
use centralspin::bath::BathSpec;
use centralspin::closed_form::{evolution_coefficients, qubit_polarization_at};
use centralspin::master_eq::{snapshot, DEFAULT_SINGULAR_TOL};
use centralspin::oracle::{bloch_vector, DenseState};
use centralspin::presets::{self, random_spec, PresetName};
use centralspin::sector::maximally_mixed_weights;
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const K: f64 = 1.0;

fn spec_from_seed(seed: u64) -> BathSpec {
    random_spec(&mut ChaCha8Rng::seed_from_u64(seed), 8).unwrap()
}

/// dP/dt from the coherent part plus sum_lm Gamma_lm (S_l rho S_m - {S_m S_l, rho}/2).
fn lindblad_bloch_rate(
    gamma: &nalgebra::Matrix3<Complex64>,
    b: &Vector3<f64>,
    p: &Vector3<f64>,
) -> Vector3<f64> {
    let s: Vec<CMatrix> = pauli().iter().map(|m| m.map(|v| v * 0.5)).collect();
    let rho = DenseState::qubit(p).unwrap().into_matrix();
    let hc = (0..3).fold(CMatrix::zeros(2, 2), |a, i| a + s[i].map(|v| v * b[i]));
    let mut drho = (&hc * &rho - &rho * &hc).map(|v| -I_UNIT * v);
    for l in 0..3 {
        for m in 0..3 {
            let g = gamma[(l, m)];
            let lm = &s[m] * &s[l];
            let term = &s[l] * &rho * &s[m] - (&lm * &rho + &rho * &lm).map(|v| v * 0.5);
            drho += term.map(|v| v * g);
        }
    }
    // Bloch components of a traceless derivative: tr(sigma drho)
    let sig = pauli();
    Vector3::from_fn(|i, _| (&sig[i] * &drho).trace().re)
}

#[test]
fn dissipator_reconstructs_generator() {
    let mut checked = 0;
    for seed in 0..40u64 {
        let spec = spec_from_seed(seed);
        let t = 0.05 + 0.07 * (seed % 11) as f64;
        let Ok(snap) = snapshot(&spec, K, t, 1e-6) else { continue };
        let p = Vector3::new(0.3, -0.2, 0.5);
        let exact = snap.d_matrix * p + snap.r_vector;
        let rebuilt = lindblad_bloch_rate(&snap.gamma_matrix, &snap.b_eff, &p);
        assert!((exact - rebuilt).amax() < 1e-10, "seed {seed}: {exact} vs {rebuilt}");
        checked += 1;
    }
    assert!(checked > 30);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_is_hermitian(seed in 0u64..10_000, t in 0.01f64..3.0) {
        let spec = spec_from_seed(seed);
        if let Ok(snap) = snapshot(&spec, K, t, 1e-8) {
            let g = snap.gamma_matrix;
            let err = (g - g.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let scale = g.iter().fold(1.0f64, |m, z| m.max(z.norm()));
            prop_assert!(err <= 1e-12 * scale);
            let d = snap.d_matrix;
            for i in 0..3 {
                prop_assert!((g[(i, i)].re - (2.0 * d[(i, i)] - d.trace())).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn generator_matches_closed_form_derivative(seed in 0u64..10_000, t in 0.01f64..3.0) {
        let spec = spec_from_seed(seed);
        if let Ok(snap) = snapshot(&spec, K, t, 1e-4) {
            let p0 = Vector3::new(0.0, 0.6, -0.7);
            let c = evolution_coefficients(&spec, K, t).unwrap();
            let p = qubit_polarization_at(&p0, &c).unwrap();
            let dp = snap.m_dot * p0 + c.dg;
            let rhs = snap.d_matrix * p + snap.r_vector;
            prop_assert!((dp - rhs).amax() < 1e-8 * (1.0 + snap.d_matrix.amax()));
        }
    }
}

#[test]
fn gamma_grows_linearly_at_short_times() {
    for name in [PresetName::Unpolarized, PresetName::Fig5Iv, PresetName::FullyPolarized] {
        let spec = presets::build(name, 10).unwrap();
        let norm = |t: f64| {
            let g = snapshot(&spec, K, t, DEFAULT_SINGULAR_TOL).unwrap().gamma_matrix;
            g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        };
        let (a, b) = (norm(1e-4) / 1e-4, norm(1e-5) / 1e-5);
        assert!(a > 0.0 && ((a - b) / b).abs() < 1e-3, "{name}: {a} vs {b}");
    }
}

#[test]
fn unpolarized_preset_has_no_field() {
    let spec = presets::build(PresetName::Unpolarized, 50).unwrap();
    for k in 1..200 {
        let t = k as f64 * 0.031;
        if let Ok(snap) = snapshot(&spec, K, t, DEFAULT_SINGULAR_TOL) {
            assert_eq!(snap.b_eff, Vector3::zeros(), "t={t}");
        }
    }
}

#[test]
fn axial_field_is_rotation_rate_of_transverse_block() {
    let spec = presets::build(PresetName::Fig5Iv, 100).unwrap();
    for k in 1..100 {
        let t = k as f64 * 0.0123;
        let snap = snapshot(&spec, K, t, DEFAULT_SINGULAR_TOL).unwrap();
        let c = evolution_coefficients(&spec, K, t).unwrap();
        let (ft, dft) = (c.f + c.pi_tilde[(0, 0)], c.df + c.dpi_tilde[(0, 0)]);
        let (h, dh) = (c.h.z, c.dh.z);
        let rate = (ft * dh - h * dft) / (ft * ft + h * h);
        let rel = (snap.b_eff - Vector3::z() * rate).amax() / rate.abs().max(1e-12);
        assert!(rel < 1e-9, "t={t}: {} vs {rate}", snap.b_eff);
    }
}

/// |P(t)| = |P(0)| exp(int_0^t gamma) for unpolarized baths, where the rate is isotropic.
#[test]
fn magnitude_from_integrated_rate() {
    for n in [3usize, 10, 40] {
        let spec = BathSpec::unpolarized(maximally_mixed_weights(n).unwrap());
        let p0 = Vector3::new(0.6, 0.0, 0.8);
        // stay well before the first zero of f
        let t_end = 0.8 / (n as f64).sqrt();
        let steps = 4000;
        let h = t_end / steps as f64;
        let rate = |t: f64| {
            let snap = snapshot(&spec, K, t, DEFAULT_SINGULAR_TOL).unwrap();
            snap.decay_rates.values[0]
        };
        let mut integral = 0.0;
        for s in 0..steps {
            let (a, b) = (s as f64 * h, (s + 1) as f64 * h);
            integral += h / 6.0 * (rate(a) + 4.0 * rate((a + b) / 2.0) + rate(b));
        }
        let c = evolution_coefficients(&spec, K, t_end).unwrap();
        let exact = qubit_polarization_at(&p0, &c).unwrap().norm();
        assert!((exact - p0.norm() * integral.exp()).abs() < 1e-9, "N={n}");
        let snap = snapshot(&spec, K, t_end, DEFAULT_SINGULAR_TOL).unwrap();
        let axial = snap.decay_rates.axial.unwrap();
        assert!((axial.gamma_perp - axial.gamma_par).abs() < 1e-12);
    }
}

#[test]
fn bloch_helper_round_trip() {
    let p = Vector3::new(0.1, 0.2, -0.3);
    let rho = DenseState::qubit(&p).unwrap();
    assert!((bloch_vector(rho.matrix()).unwrap() - p).amax() < 1e-15);
}
