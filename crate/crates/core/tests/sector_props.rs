use centralspin::oracle::hamiltonian::bath_casimir;
use centralspin::sector::{
    allowed_sectors, binomial, gaussian_weights, is_allowed_sector, maximally_mixed_weights,
    multiplicities,
};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;

#[test]
fn mixed_weight_closed_form_is_exact() {
    // lambda_I = C(N, N/2 - I) (2I+1)^2 / ((N/2 + I + 1) 2^N), checked as an
    // integer identity and then against the stored weights bit for bit
    for n in 1..=20usize {
        let table = maximally_mixed_weights(n).unwrap();
        let mults = multiplicities(n).unwrap();
        assert_eq!(table.entries().len(), mults.len());
        for (m, e) in mults.iter().zip(table.entries()) {
            let twice = m.spin.twice() as usize;
            let k = (n - twice) / 2;
            let lhs = binomial(n, k) * BigUint::from(2 * (twice + 1) * (twice + 1));
            let rhs = &m.count * BigUint::from((twice + 1) * (n + twice + 2));
            assert_eq!(lhs, rhs, "N={n} I={}", m.spin);
            let states = (&m.count * BigUint::from(twice + 1)).to_f64().unwrap();
            assert_eq!(e.weight, states / 2f64.powi(n as i32), "N={n} I={}", m.spin);
        }
        let total: f64 = table.entries().iter().map(|e| e.weight).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}

#[test]
fn multiplicities_match_bath_spectrum() {
    for n in 1..=6usize {
        let casimir = bath_casimir(n).to_dense();
        let eig = nalgebra::SymmetricEigen::new(casimir);
        for m in multiplicities(n).unwrap() {
            let c = m.spin.casimir();
            let hits = eig.eigenvalues.iter().filter(|v| (*v - c).abs() < 1e-9).count();
            // qubit factor doubles every level
            assert_eq!(hits, 2 * m.dim * m.count.to_usize().unwrap(), "N={n} I={}", m.spin);
        }
    }
}

#[test]
fn large_baths_stay_finite() {
    let table = maximally_mixed_weights(1000).unwrap();
    let total: f64 = table.entries().iter().map(|e| e.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(table.entries().iter().all(|e| e.weight.is_finite() && e.weight >= 0.0));
    assert!(maximally_mixed_weights(1001).is_err());
}

proptest! {
    #[test]
    fn gaussian_tables_are_normalized(n in 1usize..300, alpha in 1e-3f64..5.0, eps in 0.0f64..1e-3) {
        let table = gaussian_weights(n, alpha, eps).unwrap();
        let total: f64 = table.entries().iter().map(|e| e.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut last = f64::INFINITY;
        // entries run from the largest I down, so weights increase along the table
        for e in table.entries().iter().rev() {
            prop_assert!(is_allowed_sector(n, e.spin));
            prop_assert!(e.weight <= last * (1.0 + 1e-12));
            last = e.weight;
        }
    }

    #[test]
    fn allowed_sectors_share_parity(n in 0usize..500) {
        let all: Vec<_> = allowed_sectors(n).collect();
        prop_assert_eq!(all.len(), n / 2 + 1);
        for s in all {
            prop_assert_eq!(s.twice() as usize % 2, n % 2);
        }
    }
}
