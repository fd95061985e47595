//! Total-spin sector bookkeeping for a bath of N spin-1/2 nuclei.
//!
//! The product space of N spin-1/2 particles splits into total-spin sectors
//! I = N/2, N/2 - 1, ... down to 0 (N even) or 1/2 (N odd). Sector I appears
//! `d_I = C(N, N/2 - I) - C(N, N/2 - I - 1)` times, each copy of dimension 2I+1.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::Spin;

/// Largest bath handled by the weight builders; 2^N must stay finite as an f64.
pub const MAX_BATH_SPINS: usize = 1000;

pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Multiplicity {
    pub spin: Spin,
    /// Number of copies d_I of the sector in the product space.
    pub count: BigUint,
    /// 2I + 1
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorWeight {
    pub spin: Spin,
    pub weight: f64,
}

/// Probability weights of the bath-spin sectors, largest spin first.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorWeightTable {
    n_spins: usize,
    entries: Vec<SectorWeight>,
}

impl SectorWeightTable {
    pub fn new(n_spins: usize, entries: Vec<SectorWeight>) -> Result<Self> {
        check_n_spins(n_spins)?;
        if entries.is_empty() {
            return Err(Error::InvalidArgument("weight table has no entries".into()));
        }
        for pair in entries.windows(2) {
            if pair[1].spin >= pair[0].spin {
                return Err(Error::InvalidArgument(format!(
                    "sector spins must be strictly decreasing (I={} follows I={})",
                    pair[1].spin, pair[0].spin
                )));
            }
        }
        let mut total = 0.0;
        for e in &entries {
            if !is_allowed_sector(n_spins, e.spin) {
                return Err(Error::InvalidArgument(format!(
                    "I={} is not a sector of {} spin-1/2 nuclei",
                    e.spin, n_spins
                )));
            }
            if !(e.weight >= 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "weight of sector I={} is {}",
                    e.spin, e.weight
                )));
            }
            total += e.weight;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!(
                "sector weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { n_spins, entries })
    }

    /// A bath sitting entirely in one sector.
    pub fn single(n_spins: usize, spin: Spin) -> Result<Self> {
        Self::new(n_spins, vec![SectorWeight { spin, weight: 1.0 }])
    }

    /// Normalizes arbitrary non-negative weights before validating.
    pub fn normalized(n_spins: usize, mut entries: Vec<SectorWeight>) -> Result<Self> {
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        entries.iter_mut().for_each(|e| e.weight /= total);
        Self::new(n_spins, entries)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn entries(&self) -> &[SectorWeight] {
        &self.entries
    }

    pub fn weight(&self, spin: Spin) -> f64 {
        self.entries
            .iter()
            .find(|e| e.spin == spin)
            .map_or(0.0, |e| e.weight)
    }

    pub fn contains(&self, spin: Spin) -> bool {
        self.entries.iter().any(|e| e.spin == spin)
    }
}

fn check_n_spins(n_spins: usize) -> Result<()> {
    if n_spins == 0 {
        return Err(Error::InvalidArgument("bath needs at least one spin".into()));
    }
    if n_spins > MAX_BATH_SPINS {
        return Err(Error::ResourceLimit {
            what: "bath size",
            value: n_spins,
            cap: MAX_BATH_SPINS,
        });
    }
    Ok(())
}

pub fn is_allowed_sector(n_spins: usize, spin: Spin) -> bool {
    let twice = spin.twice() as usize;
    twice <= n_spins && (n_spins - twice) % 2 == 0
}

/// Allowed sectors of N spin-1/2 particles, largest first.
pub fn allowed_sectors(n_spins: usize) -> impl Iterator<Item = Spin> {
    (0..=n_spins / 2).map(move |k| Spin::from_twice((n_spins - 2 * k) as u32))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn multiplicities(n_spins: usize) -> Result<Vec<Multiplicity>> {
    check_n_spins(n_spins)?;
    Ok(allowed_sectors(n_spins)
        .map(|spin| {
            // k = N/2 - I
            let k = (n_spins - spin.twice() as usize) / 2;
            let count = if k == 0 {
                binomial(n_spins, 0)
            } else {
                binomial(n_spins, k) - binomial(n_spins, k - 1)
            };
            Multiplicity { spin, count, dim: spin.dim() }
        })
        .collect())
}

/// Sector weights of the fully mixed bath 1/2^N: lambda_I = d_I (2I+1) / 2^N.
pub fn maximally_mixed_weights(n_spins: usize) -> Result<SectorWeightTable> {
    let total = BigUint::one() << n_spins;
    let total_f = total
        .to_f64()
        .ok_or_else(|| Error::InvalidArgument("2^N overflows".into()))?;
    let entries = multiplicities(n_spins)?
        .into_iter()
        .map(|m| {
            let states = m.count * m.dim;
            SectorWeight {
                spin: m.spin,
                weight: states.to_f64().unwrap_or(f64::INFINITY) / total_f,
            }
        })
        .collect();
    SectorWeightTable::normalized(n_spins, entries)
}

/// lambda_I proportional to exp(-alpha I^2) over the allowed sectors, with
/// normalized weights below `truncation_eps` dropped and the rest renormalized.
pub fn gaussian_weights(
    n_spins: usize,
    alpha: f64,
    truncation_eps: f64,
) -> Result<SectorWeightTable> {
    check_n_spins(n_spins)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if !(0.0..1.0).contains(&truncation_eps) {
        return Err(Error::InvalidArgument(format!(
            "truncation eps must lie in [0, 1), got {truncation_eps}"
        )));
    }
    // Shift the exponent by the smallest allowed I so the dominant weight is 1.
    let i_min = if n_spins % 2 == 0 { 0.0 } else { 0.5 };
    let raw: Vec<SectorWeight> = allowed_sectors(n_spins)
        .map(|spin| {
            let i = spin.value();
            SectorWeight { spin, weight: (-alpha * (i * i - i_min * i_min)).exp() }
        })
        .collect();
    let total: f64 = raw.iter().map(|e| e.weight).sum();
    let kept: Vec<SectorWeight> = raw
        .into_iter()
        .filter(|e| e.weight / total >= truncation_eps && e.weight > 0.0)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyTable { eps: truncation_eps });
    }
    SectorWeightTable::normalized(n_spins, kept)
}
