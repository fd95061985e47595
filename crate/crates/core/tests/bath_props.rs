use centralspin::bath::{
    extract_polarization, sector_density_matrix, validate_bath_spec, BathSpec, SectorPolarization,
    ViolationKind,
};
use centralspin::presets::random_polarization;
use centralspin::sector::SectorWeightTable;
use centralspin::Spin;
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn polarization_round_trip(twice in 1u32..=20, seed in any::<u64>()) {
        let spin = Spin::from_twice(twice);
        let pol = random_polarization(&mut ChaCha8Rng::seed_from_u64(seed), spin);
        let rho = sector_density_matrix(&pol).unwrap();
        let tr = rho.trace();
        prop_assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
        let back = extract_polarization(spin, &rho).unwrap();
        prop_assert!((back.vector - pol.vector).amax() < 1e-10);
        prop_assert!((back.tensor - pol.tensor).amax() < 1e-10);
    }

    #[test]
    fn vector_bound_is_enforced(twice in 1u32..=20, excess in 1e-6f64..0.5) {
        let spin = Spin::from_twice(twice);
        let bound = SectorPolarization::vector_bound(spin);
        let tensor = Matrix3::zeros();
        prop_assert!(SectorPolarization::new(spin, Vector3::z() * bound, tensor).is_ok());
        prop_assert!(SectorPolarization::new(spin, Vector3::z() * (bound + excess), tensor).is_err());
    }
}

#[test]
fn validator_names_each_defect() {
    let weights = SectorWeightTable::normalized(
        4,
        vec![
            centralspin::sector::SectorWeight { spin: Spin::from_twice(4), weight: 0.5 },
            centralspin::sector::SectorWeight { spin: Spin::from_twice(2), weight: 0.3 },
            centralspin::sector::SectorWeight { spin: Spin::ZERO, weight: 0.2 },
        ],
    )
    .unwrap();
    let mut asym = Matrix3::zeros();
    asym[(0, 1)] = 0.1;
    let pols = [
        SectorPolarization { spin: Spin::from_twice(4), vector: Vector3::zeros(), tensor: asym },
        SectorPolarization { spin: Spin::ZERO, vector: Vector3::x() * 0.1, tensor: Matrix3::zeros() },
    ];
    let spec = BathSpec::from_parts(weights, pols);
    let report = validate_bath_spec(&spec);
    assert!(!report.is_valid());
    let kinds: Vec<_> = report.violations.iter().map(|v| (v.spin, v.kind)).collect();
    assert!(kinds.contains(&(Spin::from_twice(4), ViolationKind::TensorSymmetry)), "{kinds:?}");
    assert!(kinds.contains(&(Spin::ZERO, ViolationKind::SingletPolarized)), "{kinds:?}");
    for v in &report.violations {
        assert!(!v.to_string().is_empty());
    }
}
