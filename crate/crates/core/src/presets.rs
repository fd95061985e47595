//! Named bath configurations used throughout the figures and time-scale tables.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bath::{
    axial_tensor_shape, fully_polarized_spec, sector_density_matrix, uniformly_polarized_spec,
    vector_only_spec, BathSpec, SectorPolarization,
};
use crate::error::{Error, Result};
use crate::sector::{
    allowed_sectors, gaussian_weights, maximally_mixed_weights, SectorWeight, SectorWeightTable,
    DEFAULT_TRUNCATION_EPS,
};
use crate::spin::Spin;

pub const FIGURE_ALPHA: f64 = 0.1;
pub const FIGURE_N: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PresetName {
    Unpolarized,
    FullyPolarized,
    VectorOnly,
    Fig3,
    Fig5I,
    Fig5Ii,
    Fig5Iii,
    Fig5Iv,
    Fig6,
}

impl PresetName {
    pub const ALL: [PresetName; 9] = [
        Self::Unpolarized,
        Self::FullyPolarized,
        Self::VectorOnly,
        Self::Fig3,
        Self::Fig5I,
        Self::Fig5Ii,
        Self::Fig5Iii,
        Self::Fig5Iv,
        Self::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Unpolarized => "unpolarized",
            Self::FullyPolarized => "fully_polarized",
            Self::VectorOnly => "vector_only",
            Self::Fig3 => "fig3",
            Self::Fig5I => "fig5_i",
            Self::Fig5Ii => "fig5_ii",
            Self::Fig5Iii => "fig5_iii",
            Self::Fig5Iv => "fig5_iv",
            Self::Fig6 => "fig6",
        }
    }

    pub fn default_n(self) -> usize {
        match self {
            Self::Unpolarized => 50,
            _ => FIGURE_N,
        }
    }

    /// Initial qubit polarization used with this bath in the figures.
    pub fn default_p0(self) -> Vector3<f64> {
        match self {
            Self::Unpolarized | Self::Fig3 => Vector3::z(),
            Self::FullyPolarized | Self::VectorOnly | Self::Fig6 => -Vector3::z(),
            Self::Fig5I | Self::Fig5Ii | Self::Fig5Iii | Self::Fig5Iv => {
                Vector3::new(1.0, 0.0, 1.0) / 2f64.sqrt()
            }
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{s}'")))
    }
}

/// 4 pi / K: the common period of every sector frequency (I + 1/2) K.
pub fn full_period(k: f64) -> f64 {
    4.0 * PI / k
}

fn figure_weights(n_spins: usize) -> Result<SectorWeightTable> {
    gaussian_weights(n_spins, FIGURE_ALPHA, DEFAULT_TRUNCATION_EPS)
}

pub fn build(name: PresetName, n_spins: usize) -> Result<BathSpec> {
    let z = Vector3::z();
    let tensor = axial_tensor_shape() / 3.0;
    match name {
        PresetName::Unpolarized => Ok(BathSpec::unpolarized(maximally_mixed_weights(n_spins)?)),
        PresetName::FullyPolarized => fully_polarized_spec(n_spins, &z),
        PresetName::VectorOnly => vector_only_spec(n_spins, &z),
        PresetName::Fig3 | PresetName::Fig5I => Ok(BathSpec::unpolarized(figure_weights(n_spins)?)),
        PresetName::Fig5Ii => uniformly_polarized_spec(figure_weights(n_spins)?, Vector3::zeros(), tensor),
        PresetName::Fig5Iii | PresetName::Fig6 => {
            uniformly_polarized_spec(figure_weights(n_spins)?, z, Matrix3::zeros())
        }
        PresetName::Fig5Iv => uniformly_polarized_spec(figure_weights(n_spins)?, z, tensor),
    }
}

/// The generator behind every seeded random scenario.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_traceless<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let a = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let s = (a + a.transpose()) / 2.0;
    s - Matrix3::identity() * (s.trace() / 3.0)
}

/// Random sector polarization whose rank-2-truncated state is positive.
pub fn random_polarization<R: Rng>(rng: &mut R, spin: Spin) -> SectorPolarization {
    if spin == Spin::ZERO {
        return SectorPolarization::unpolarized(spin);
    }
    let bound = SectorPolarization::vector_bound(spin);
    let mut pol = SectorPolarization {
        spin,
        vector: random_unit(rng) * (bound * rng.random_range(0.0..1.0)),
        tensor: if spin.twice() >= 2 { random_traceless(rng) } else { Matrix3::zeros() },
    };
    while sector_density_matrix(&pol).is_err() {
        pol.vector *= 0.7;
        pol.tensor *= 0.7;
    }
    pol
}

/// Random positive (lambda, P, Pi) spec for a bath of at most `max_n` spins.
pub fn random_spec<R: Rng>(rng: &mut R, max_n: usize) -> Result<BathSpec> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be positive".into()));
    }
    let n = rng.random_range(1..=max_n);
    let entries: Vec<SectorWeight> = allowed_sectors(n)
        .map(|spin| SectorWeight { spin, weight: rng.random_range(0.05..1.0) })
        .collect();
    let weights = SectorWeightTable::normalized(n, entries)?;
    let pols: Vec<SectorPolarization> = weights
        .entries()
        .iter()
        .map(|e| random_polarization(rng, e.spin))
        .filter(|p| !p.is_unpolarized())
        .collect();
    BathSpec::new(weights, pols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::validate_bath_spec;

    #[test]
    fn every_preset_builds_and_validates() {
        for name in PresetName::ALL {
            let spec = build(name, name.default_n()).unwrap();
            assert!(validate_bath_spec(&spec).is_valid(), "{name}");
            assert_eq!(name.name().parse::<PresetName>().unwrap(), name);
        }
        assert!("fig7".parse::<PresetName>().is_err());
    }

    #[test]
    fn figure_states_are_positive() {
        for name in [PresetName::Fig5Iii, PresetName::Fig6] {
            let report = validate_bath_spec(&build(name, FIGURE_N).unwrap());
            assert!(report.positivity.is_empty(), "{name}");
        }
    }

    #[test]
    fn random_specs_are_states() {
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let spec = random_spec(&mut rng, 10).unwrap();
            let report = validate_bath_spec(&spec);
            assert!(report.is_valid() && report.positivity.is_empty());
        }
    }
}
