use nalgebra::{SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::angular::{kron, pauli, trace_product, CMatrix};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_FLOOR: f64 = -1e-9;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    rho: CMatrix,
}

impl DenseState {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let herm = max_abs(&(&rho - rho.adjoint()));
        if !(herm <= HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian: max |rho - rho^+| = {herm:e}")));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = min_eigenvalue(&rho);
        if min < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("eigenvalue {min:e} below {EIGEN_FLOOR:e}")));
        }
        Ok(Self { rho })
    }

    pub fn from_pure(psi: &nalgebra::DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Self::new(&psi * psi.adjoint())
    }

    /// `(1 + p.sigma)/2`
    pub fn qubit(p: &Vector3<f64>) -> Result<Self> {
        let s = pauli();
        let mut rho = CMatrix::identity(2, 2);
        for a in 0..3 {
            rho += s[a].map(|z| z * p[a]);
        }
        Self::new(rho.map(|z| z * 0.5))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim).map(|z| z / dim as f64))
    }

    pub fn product(&self, other: &DenseState) -> DenseState {
        DenseState { rho: kron(&self.rho, &other.rho) }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.rho)
    }
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Bloch vector `tr(rho sigma)` of a 2x2 state.
pub fn bloch_vector(rho: &CMatrix) -> Result<Vector3<f64>> {
    if rho.shape() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: 2, got: rho.nrows() });
    }
    let s = pauli();
    Ok(Vector3::from_fn(|a, _| trace_product(rho, &s[a]).re))
}

/// Trace out every subsystem not listed in `keep`. `dims` lists subsystem
/// dimensions, most significant factor first; `keep` must be increasing.
pub fn partial_trace(rho: &DenseState, dims: &[usize], keep: &[usize]) -> Result<DenseState> {
    let total: usize = dims.iter().product();
    if total != rho.dim() || dims.contains(&0) {
        return Err(Error::DimensionMismatch { expected: total, got: rho.dim() });
    }
    if keep.windows(2).any(|w| w[1] <= w[0]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!("bad subsystem selection {keep:?}")));
    }
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let offsets = |sel: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &k in sel {
            out = out
                .iter()
                .flat_map(|&o| {
                    let stride = strides[k];
                    (0..dims[k]).map(move |v| o + v * stride)
                })
                .collect();
        }
        out
    };
    let kept_off = offsets(keep);
    let traced_off = offsets(&traced);
    let d = kept_off.len();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(d, d);
    for (a, &ra) in kept_off.iter().enumerate() {
        for (b, &rb) in kept_off.iter().enumerate() {
            out[(a, b)] = traced_off.iter().map(|&t| m[(ra + t, rb + t)]).sum();
        }
    }
    DenseState::new(out)
}

/// Wootters concurrence from the Hermitian form `sqrt(rho) rho~ sqrt(rho)`,
/// whose eigenvalues equal those of `rho rho~`.
pub fn concurrence(rho: &DenseState) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    let sy = &pauli()[1];
    let yy = kron(sy, sy);
    let m = rho.matrix();
    let flipped = &yy * m.map(|z| z.conj()) * &yy;
    let eig = SymmetricEigen::new(m.clone());
    let sqrt_vals = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    let sqrt_rho =
        &eig.eigenvectors * CMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();
    let r = &sqrt_rho * flipped * &sqrt_rho;
    let r = (&r + r.adjoint()).map(|z| z * 0.5);
    let vals = SymmetricEigen::new(r).eigenvalues;
    // eigenvalues lie in [0, 1]; round-off in the zero ones would survive the square root
    let mut mu: Vec<f64> =
        vals.iter().map(|&v| if v > 1e-13 { v.sqrt() } else { 0.0 }).collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).clamp(0.0, 1.0))
}
