//! Initial bath states.
//!
//! Within a sector of total spin I the bath density matrix is expanded in
//! irreducible tensor operators,
//!
//! ```text
//! rho_I = [ 1 + P.I / I + 3 sum_mn Pi^mn Q^mn / (I(I+1)) + ... ] / (2I+1)
//! ```
//!
//! normalized so that <I> = P (I+1)/3 and <Q^mn> = Pi^mn (2I-1)(2I+3)/10.
//! Only ranks up to two influence the central spin, so materialized states
//! stop at rank two.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Unit, Vector3};
use num_complex::Complex64;

use crate::angular::{quadrupole_matrices, spin_matrices, trace_product, CMatrix};
use crate::error::{Error, Result};
use crate::sector::{is_allowed_sector, SectorWeight, SectorWeightTable};
use crate::spin::Spin;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;
const AXIS_TOL: f64 = 1e-12;

/// diag(-1, -1, 2): the shape of an axial rank-2 polarization along z.
pub fn axial_tensor_shape() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 2.0))
}

/// Vector and rank-2 tensor polarization of one bath-spin sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorPolarization {
    pub spin: Spin,
    pub vector: Vector3<f64>,
    pub tensor: Matrix3<f64>,
}

impl SectorPolarization {
    pub fn new(spin: Spin, vector: Vector3<f64>, tensor: Matrix3<f64>) -> Result<Self> {
        let pol = Self { spin, vector, tensor };
        match pol.violations().into_iter().next() {
            Some(v) => Err(Error::InvalidArgument(v.to_string())),
            None => Ok(pol),
        }
    }

    pub fn unpolarized(spin: Spin) -> Self {
        Self { spin, vector: Vector3::zeros(), tensor: Matrix3::zeros() }
    }

    /// |P| <= 3I/(I+1), saturated by |I, I>.
    pub fn vector_bound(spin: Spin) -> f64 {
        let i = spin.value();
        3.0 * i / (i + 1.0)
    }

    pub fn is_unpolarized(&self) -> bool {
        self.vector.iter().all(|&v| v == 0.0) && self.tensor.iter().all(|&v| v == 0.0)
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let spin = self.spin;
        let mut push = |kind, magnitude| out.push(Violation { spin, kind, magnitude });
        if self.vector.iter().chain(self.tensor.iter()).any(|v| !v.is_finite()) {
            push(ViolationKind::NonFinite, f64::NAN);
            return out;
        }
        let asym = (self.tensor - self.tensor.transpose()).amax();
        if asym > SYMMETRY_TOL {
            push(ViolationKind::TensorSymmetry, asym);
        }
        let tr = self.tensor.trace();
        if tr.abs() > SYMMETRY_TOL {
            push(ViolationKind::TensorTrace, tr.abs());
        }
        if spin == Spin::ZERO && !self.is_unpolarized() {
            push(
                ViolationKind::SingletPolarized,
                self.vector.norm().max(self.tensor.amax()),
            );
        }
        if spin == Spin::HALF && self.tensor.amax() > 0.0 {
            push(ViolationKind::SpinHalfTensor, self.tensor.amax());
        }
        let bound = Self::vector_bound(spin);
        if spin != Spin::ZERO && self.vector.norm() > bound + SYMMETRY_TOL {
            push(ViolationKind::VectorBound { limit: bound }, self.vector.norm());
        }
        out
    }
}

/// Full initial bath: sector weights plus polarizations of the polarized sectors.
#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    pub weights: SectorWeightTable,
    /// Sectors absent from the map are unpolarized.
    pub polarizations: BTreeMap<Spin, SectorPolarization>,
}

impl BathSpec {
    /// Assemble without checking; see [`validate_bath_spec`].
    pub fn from_parts(
        weights: SectorWeightTable,
        polarizations: impl IntoIterator<Item = SectorPolarization>,
    ) -> Self {
        let polarizations = polarizations.into_iter().map(|p| (p.spin, p)).collect();
        Self { weights, polarizations }
    }

    pub fn new(
        weights: SectorWeightTable,
        polarizations: impl IntoIterator<Item = SectorPolarization>,
    ) -> Result<Self> {
        let spec = Self::from_parts(weights, polarizations);
        match spec.structural_violations().into_iter().next() {
            Some(v) => Err(Error::InvalidArgument(v.to_string())),
            None => Ok(spec),
        }
    }

    pub fn unpolarized(weights: SectorWeightTable) -> Self {
        Self { weights, polarizations: BTreeMap::new() }
    }

    pub fn n_spins(&self) -> usize {
        self.weights.n_spins()
    }

    /// Polarization of a sector, unpolarized when absent.
    pub fn polarization(&self, spin: Spin) -> SectorPolarization {
        self.polarizations
            .get(&spin)
            .cloned()
            .unwrap_or_else(|| SectorPolarization::unpolarized(spin))
    }

    pub fn is_unpolarized(&self) -> bool {
        self.polarizations.values().all(SectorPolarization::is_unpolarized)
    }

    /// (weight, polarization) for every weighted sector, largest spin first.
    pub fn sectors(&self) -> impl Iterator<Item = (f64, SectorPolarization)> + '_ {
        self.weights
            .entries()
            .iter()
            .map(|e| (e.weight, self.polarization(e.spin)))
    }

    fn structural_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (spin, pol) in &self.polarizations {
            if *spin != pol.spin {
                out.push(Violation {
                    spin: *spin,
                    kind: ViolationKind::KeyMismatch,
                    magnitude: pol.spin.value(),
                });
            }
            if !self.weights.contains(*spin) {
                let kind = if is_allowed_sector(self.n_spins(), *spin) {
                    ViolationKind::NotInWeightTable
                } else {
                    ViolationKind::NotASector
                };
                out.push(Violation { spin: *spin, kind, magnitude: spin.value() });
            }
            out.extend(pol.violations());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ViolationKind {
    TensorSymmetry,
    TensorTrace,
    SingletPolarized,
    SpinHalfTensor,
    VectorBound { limit: f64 },
    NotInWeightTable,
    NotASector,
    KeyMismatch,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub spin: Spin,
    pub kind: ViolationKind,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.spin;
        match self.kind {
            ViolationKind::TensorSymmetry => {
                write!(f, "tensor symmetry, sector I={s}: max |Pi - Pi^T| = {:e}", self.magnitude)
            }
            ViolationKind::TensorTrace => {
                write!(f, "tensor trace, sector I={s}: |tr Pi| = {:e}", self.magnitude)
            }
            ViolationKind::SingletPolarized => {
                write!(f, "singlet polarized, sector I={s}: magnitude {:e}", self.magnitude)
            }
            ViolationKind::SpinHalfTensor => write!(
                f,
                "rank-2 tensor on spin-1/2, sector I={s}: max |Pi| = {:e}",
                self.magnitude
            ),
            ViolationKind::VectorBound { limit } => write!(
                f,
                "vector bound, sector I={s}: |P| = {} exceeds {}",
                self.magnitude, limit
            ),
            ViolationKind::NotInWeightTable => {
                write!(f, "polarized sector I={s} has no entry in the weight table")
            }
            ViolationKind::NotASector => write!(f, "I={s} is not a sector of this bath"),
            ViolationKind::KeyMismatch => {
                write!(f, "polarization stored under I={s} describes I={}", self.magnitude)
            }
            ViolationKind::NonFinite => write!(f, "non-finite polarization, sector I={s}"),
        }
    }
}

/// Sector whose rank-2-truncated density matrix is not positive.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityFinding {
    pub spin: Spin,
    pub min_eigenvalue: f64,
}

impl fmt::Display for PositivityFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank-2 truncation indefinite, sector I={}: min eigenvalue {:e}",
            self.spin, self.min_eigenvalue
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub violations: Vec<Violation>,
    /// Informational: the closed forms only need (lambda, P, Pi), but these
    /// sectors cannot be materialized as states for the irrep oracle.
    pub positivity: Vec<PositivityFinding>,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_bath_spec(spec: &BathSpec) -> Diagnostics {
    let violations = spec.structural_violations();
    let positivity = if violations.is_empty() {
        spec.polarizations
            .values()
            .filter(|p| !p.is_unpolarized())
            .filter_map(|p| {
                let rho = density_matrix_unchecked(p);
                let min = min_eigenvalue(&rho);
                (min < -POSITIVITY_TOL).then_some(PositivityFinding {
                    spin: p.spin,
                    min_eigenvalue: min,
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    Diagnostics { violations, positivity }
}

fn rotation_from_z(axis: &Vector3<f64>) -> Result<Rotation3<f64>> {
    let norm = axis.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument("polarization axis is zero".into()));
    }
    if (norm - 1.0).abs() > AXIS_TOL {
        return Err(Error::InvalidArgument(format!("axis norm {norm} is not 1")));
    }
    let z = Vector3::z();
    Ok(Rotation3::rotation_between(&z, axis).unwrap_or_else(|| {
        // antiparallel: half turn about x
        Rotation3::from_axis_angle(&Unit::new_unchecked(Vector3::x()), std::f64::consts::PI)
    }))
}

/// Polarizations of |I, m=I> along `axis`, rotated from the z-axis form.
pub fn maximal_polarization(spin: Spin, axis: &Vector3<f64>) -> Result<SectorPolarization> {
    let rot = rotation_from_z(axis)?;
    let i = spin.value();
    let vector = axis * (3.0 * i / (i + 1.0));
    let tensor = if spin.twice() >= 2 {
        // Pi_zz = 10 I / (3 (2I+3)), i.e. 5N/(6(N+3)) * diag(-1,-1,2) for I = N/2
        let r = rot.matrix();
        r * axial_tensor_shape() * r.transpose() * (5.0 * i / (3.0 * (2.0 * i + 3.0)))
    } else {
        Matrix3::zeros()
    };
    Ok(SectorPolarization { spin, vector, tensor: symmetrize(&tensor) })
}

/// The fully polarized bath |up up ... up> along `axis`: sector I = N/2 only.
pub fn fully_polarized_spec(n_spins: usize, axis: &Vector3<f64>) -> Result<BathSpec> {
    let spin = Spin::from_twice(n_spins as u32);
    let weights = SectorWeightTable::single(n_spins, spin)?;
    BathSpec::new(weights, [maximal_polarization(spin, axis)?])
}

/// Sector I = N/2 with the vector polarization of the fully polarized bath and
/// no rank-2 tensor polarization.
pub fn vector_only_spec(n_spins: usize, axis: &Vector3<f64>) -> Result<BathSpec> {
    let spin = Spin::from_twice(n_spins as u32);
    let weights = SectorWeightTable::single(n_spins, spin)?;
    let mut pol = maximal_polarization(spin, axis)?;
    pol.tensor = Matrix3::zeros();
    BathSpec::new(weights, [pol])
}

/// Same (P, Pi) in every weighted sector that can carry them: no vector on
/// I = 0, no tensor on I < 1.
pub fn uniformly_polarized_spec(
    weights: SectorWeightTable,
    vector: Vector3<f64>,
    tensor: Matrix3<f64>,
) -> Result<BathSpec> {
    let pols: Vec<SectorPolarization> = weights
        .entries()
        .iter()
        .filter(|e| e.spin != Spin::ZERO)
        .map(|&SectorWeight { spin, .. }| SectorPolarization {
            spin,
            vector,
            tensor: if spin.twice() >= 2 { tensor } else { Matrix3::zeros() },
        })
        .filter(|p| !p.is_unpolarized())
        .collect();
    BathSpec::new(weights, pols)
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

fn density_matrix_unchecked(pol: &SectorPolarization) -> CMatrix {
    let spin = pol.spin;
    let d = spin.dim();
    let i = spin.value();
    let mut rho = CMatrix::identity(d, d);
    if spin.twice() >= 1 {
        let j = spin_matrices(spin);
        for a in 0..3 {
            rho += j[a].map(|z| z * (pol.vector[a] / i));
        }
        if spin.twice() >= 2 {
            let q = quadrupole_matrices(spin, &j);
            let scale = 3.0 / spin.casimir();
            for m in 0..3 {
                for n in 0..3 {
                    rho += q[m][n].map(|z| z * (scale * pol.tensor[(m, n)]));
                }
            }
        }
    }
    rho.map(|z| z / d as f64)
}

pub(crate) fn min_eigenvalue(rho: &CMatrix) -> f64 {
    SymmetricEigen::new(rho.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Materialize a sector state truncated after rank two.
pub fn sector_density_matrix(pol: &SectorPolarization) -> Result<CMatrix> {
    if let Some(v) = pol.violations().into_iter().next() {
        return Err(Error::InvalidArgument(v.to_string()));
    }
    let rho = density_matrix_unchecked(pol);
    let min = min_eigenvalue(&rho);
    if min < -POSITIVITY_TOL {
        return Err(Error::NotAState { spin: pol.spin, eigenvalue: min, tol: POSITIVITY_TOL });
    }
    Ok(rho)
}

/// Read (P, Pi) back from any (2I+1)-dimensional sector density matrix.
pub fn extract_polarization(spin: Spin, rho: &CMatrix) -> Result<SectorPolarization> {
    if rho.nrows() != spin.dim() || rho.ncols() != spin.dim() {
        return Err(Error::DimensionMismatch { expected: spin.dim(), got: rho.nrows() });
    }
    let i = spin.value();
    let mut pol = SectorPolarization::unpolarized(spin);
    if spin.twice() == 0 {
        return Ok(pol);
    }
    let j = spin_matrices(spin);
    for a in 0..3 {
        pol.vector[a] = 3.0 * trace_product(rho, &j[a]).re / (i + 1.0);
    }
    if spin.twice() >= 2 {
        let q = quadrupole_matrices(spin, &j);
        let norm = (2.0 * i - 1.0) * (2.0 * i + 3.0) / 10.0;
        for m in 0..3 {
            for n in 0..3 {
                pol.tensor[(m, n)] = trace_product(rho, &q[m][n]).re / norm;
            }
        }
    }
    Ok(pol)
}

const AXIAL_TOL: f64 = 1e-12;

/// A state diagonal in the I_z basis with the given z-axial (P, Pi).
///
/// Higher ranks are free, so this exists for some polarizations whose rank-2
/// truncation is indefinite. The populations are a basic feasible solution of
/// the three moment equations (at most three levels occupied); `None` when
/// the polarization is not z-axial or no state carries it.
pub fn axial_sector_state(pol: &SectorPolarization) -> Option<CMatrix> {
    let (p, t) = (&pol.vector, &pol.tensor);
    let axial = p.x.abs() <= AXIAL_TOL
        && p.y.abs() <= AXIAL_TOL
        && (t[(0, 0)] - t[(1, 1)]).abs() <= AXIAL_TOL
        && [(0, 1), (0, 2), (1, 2)].iter().all(|&(a, b)| t[(a, b)].abs() <= AXIAL_TOL);
    if !axial || !pol.violations().is_empty() {
        return None;
    }
    let spin = pol.spin;
    let d = spin.dim();
    let i = spin.value();
    // level k has m = I - k; Q_zz = m^2 - I(I+1)/3
    let m: Vec<f64> = (0..d).map(|k| i - k as f64).collect();
    let q: Vec<f64> = m.iter().map(|m| m * m - spin.casimir() / 3.0).collect();
    let target_m = p.z * (i + 1.0) / 3.0;
    let target_q = if spin.twice() >= 2 { t[(2, 2)] * (2.0 * i - 1.0) * (2.0 * i + 3.0) / 10.0 } else { 0.0 };
    let build = |pops: &[(usize, f64)]| {
        let mut rho = CMatrix::zeros(d, d);
        for &(k, w) in pops {
            rho[(k, k)] = Complex64::new(w, 0.0);
        }
        rho
    };
    if d == 1 {
        return Some(build(&[(0, 1.0)]));
    }
    if d == 2 {
        let up = 0.5 + target_m;
        return (up >= 0.0 && up <= 1.0).then(|| build(&[(0, up), (1, 1.0 - up)]));
    }
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                let mat = nalgebra::Matrix3::new(1.0, 1.0, 1.0, m[a], m[b], m[c], q[a], q[b], q[c]);
                let Some(w) = mat.lu().solve(&Vector3::new(1.0, target_m, target_q)) else { continue };
                if w.iter().all(|&x| x >= -1e-13) {
                    let w = w.map(|x| x.max(0.0));
                    let norm = w.sum();
                    return Some(build(&[(a, w[0] / norm), (b, w[1] / norm), (c, w[2] / norm)]));
                }
            }
        }
    }
    None
}

/// |I, I><I, I| along z.
pub fn maximal_weight_projector(spin: Spin) -> CMatrix {
    let d = spin.dim();
    let mut rho = CMatrix::zeros(d, d);
    rho[(0, 0)] = Complex64::new(1.0, 0.0);
    rho
}
