//! Exact evolution `rho(t) = U rho(0) U^+` from one diagonalization.

use nalgebra::{DVector, SymmetricEigen, Vector3};
use num_complex::Complex64;

use super::dense::{partial_trace, DenseState};
use super::hamiltonian::{bath_casimir, build_hamiltonian, HamiltonianKind, HamiltonianSpec};
use crate::angular::{kron, pauli, spin_matrices, CMatrix, ONE, ZERO};
use crate::closed_form::{check_bloch, check_grid, Trajectory};
use crate::error::{Error, Result};
use crate::spin::Spin;

/// Eigen-decomposition of a Hamiltonian, assembled block by block.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub energies: DVector<f64>,
    /// Columns are eigenvectors in the product basis.
    pub vectors: CMatrix,
    hamiltonian: CMatrix,
    dims: Vec<usize>,
}

impl Propagator {
    pub fn new(h: &HamiltonianSpec) -> Self {
        let d = h.dim();
        let mut energies = DVector::zeros(d);
        let mut vectors = CMatrix::zeros(d, d);
        let mut col = 0;
        for block in h.matrix.blocks() {
            let n = block.len();
            let sub = CMatrix::from_fn(n, n, |r, c| h.matrix.get(block[r], block[c]));
            let eig = SymmetricEigen::new(sub);
            for k in 0..n {
                energies[col] = eig.eigenvalues[k];
                for (r, &row) in block.iter().enumerate() {
                    vectors[(row, col)] = eig.eigenvectors[(r, k)];
                }
                col += 1;
            }
        }
        Self { energies, vectors, hamiltonian: h.dense(), dims: h.dims.clone() }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn to_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * op * &self.vectors
    }

    fn phases(&self, t: f64) -> DVector<Complex64> {
        self.energies.map(|e| Complex64::from_polar(1.0, -e * t))
    }

    /// `U(t) = V exp(-iEt) V^+`
    pub fn unitary(&self, t: f64) -> CMatrix {
        let ph = CMatrix::from_diagonal(&self.phases(t));
        &self.vectors * ph * self.vectors.adjoint()
    }

    pub fn state_at(&self, rho0: &DenseState, t: f64) -> Result<DenseState> {
        let u = self.unitary(t);
        let rho = &u * rho0.matrix() * u.adjoint();
        DenseState::new((&rho + rho.adjoint()).map(|z| z * 0.5))
    }

    /// Expectation values of `ops` (given in the eigenbasis) for a state
    /// given in the eigenbasis.
    fn expectations(&self, rho_e: &CMatrix, ops_e: &[CMatrix], t: f64) -> Vec<f64> {
        let ph = self.phases(t);
        let d = self.dim();
        let mut out = vec![0.0; ops_e.len()];
        for j in 0..d {
            for k in 0..d {
                let w = ph[j] * rho_e[(j, k)] * ph[k].conj();
                if w == ZERO {
                    continue;
                }
                for (o, op) in out.iter_mut().zip(ops_e) {
                    *o += (w * op[(k, j)]).re;
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun {
    pub trajectory: Trajectory,
    /// tr(rho(t) H) per time.
    pub energies: Vec<f64>,
    /// tr rho(t) per time.
    pub traces: Vec<f64>,
}

impl OracleRun {
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }
}

/// `sigma_a (x) 1_bath`
fn qubit_operators(bath_dim: usize) -> [CMatrix; 3] {
    let id = CMatrix::identity(bath_dim, bath_dim);
    pauli().map(|s| kron(&s, &id))
}

/// `sum_I 3/(I+1) Pi_I I_a` on the N-spin bath, so that its expectation is
/// the sector-weighted normalized bath polarization.
fn normalized_bath_operators(n: usize) -> [CMatrix; 3] {
    let dim = 1usize << n;
    let s = pauli();
    let id2 = CMatrix::identity(2, 2);
    let site_op = |a: usize, i: usize| {
        let mut m = CMatrix::identity(1, 1);
        for k in 0..n {
            m = kron(&m, if k == i { &s[a] } else { &id2 });
        }
        m.map(|z| z * 0.5)
    };
    let total: [CMatrix; 3] = std::array::from_fn(|a| {
        (0..n).fold(CMatrix::zeros(dim, dim), |acc, i| acc + site_op(a, i))
    });
    // I^2 restricted to the bath: the qubit factor of bath_casimir is the
    // leading bit, so take its upper-left block
    let casimir = bath_casimir(n).to_dense().view((0, 0), (dim, dim)).into_owned();
    let eig = SymmetricEigen::new(casimir);
    let weight = eig.eigenvalues.map(|x| {
        let i = ((1.0 + 4.0 * x.max(0.0)).sqrt() - 1.0) / 2.0;
        Complex64::new(3.0 / (i + 1.0), 0.0)
    });
    let f = &eig.eigenvectors * CMatrix::from_diagonal(&weight) * eig.eigenvectors.adjoint();
    total.map(|op| &f * op)
}

/// Same observable on one spin-I irrep: `3/(I+1) I_a`.
fn irrep_bath_operators(spin: Spin) -> [CMatrix; 3] {
    let scale = 3.0 / (spin.value() + 1.0);
    spin_matrices(spin).map(|j| kron(&CMatrix::identity(2, 2), &j.map(|z| z * scale)))
}

/// Qubit polarization series, and for global and irrep Hamiltonians the
/// normalized bath polarization, of `rho0` under `h`.
pub fn evolve_reduced(
    h: &HamiltonianSpec,
    rho0: &DenseState,
    times: &[f64],
    with_bath: bool,
) -> Result<OracleRun> {
    evolve_with(&Propagator::new(h), h, rho0, times, with_bath)
}

pub fn evolve_with(
    prop: &Propagator,
    h: &HamiltonianSpec,
    rho0: &DenseState,
    times: &[f64],
    with_bath: bool,
) -> Result<OracleRun> {
    if rho0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho0.dim() });
    }
    check_grid(times)?;
    let mut ops = qubit_operators(h.bath_dim()).to_vec();
    let bath_ops = match (&h.kind, with_bath) {
        (HamiltonianKind::GlobalHeisenberg { n, .. }, true) => {
            let id = CMatrix::identity(2, 2);
            Some(normalized_bath_operators(*n).map(|o| kron(&id, &o)))
        }
        (HamiltonianKind::Irrep { spin, .. }, true) => Some(irrep_bath_operators(*spin)),
        (HamiltonianKind::Local { .. }, true) => {
            return Err(Error::InvalidArgument(
                "bath polarization is only defined for sector-conserving Hamiltonians".into(),
            ))
        }
        (_, false) => None,
    };
    if let Some(b) = &bath_ops {
        ops.extend(b.iter().cloned());
    }
    ops.push(prop.hamiltonian.clone());
    ops.push(CMatrix::identity(h.dim(), h.dim()));
    let ops_e: Vec<CMatrix> = ops.iter().map(|o| prop.to_eigenbasis(o)).collect();
    let rho_e = prop.to_eigenbasis(rho0.matrix());

    let mut pols = Vec::with_capacity(times.len());
    let mut bath = Vec::with_capacity(times.len());
    let mut energies = Vec::with_capacity(times.len());
    let mut traces = Vec::with_capacity(times.len());
    for &t in times {
        let v = prop.expectations(&rho_e, &ops_e, t);
        pols.push(Vector3::new(v[0], v[1], v[2]));
        let rest = if bath_ops.is_some() {
            bath.push(Vector3::new(v[3], v[4], v[5]));
            &v[6..]
        } else {
            &v[3..]
        };
        energies.push(rest[0]);
        traces.push(rest[1]);
    }
    let mut trajectory = Trajectory::from_polarizations(times.to_vec(), pols);
    if bath_ops.is_some() {
        trajectory.bath_polarization = Some(bath);
    }
    Ok(OracleRun { trajectory, energies, traces })
}

/// Product state `rho_A (x) rho_bath`.
pub fn product_state(p0: &Vector3<f64>, bath: &DenseState) -> Result<DenseState> {
    check_bloch("p0", p0)?;
    Ok(DenseState::qubit(p0)?.product(bath))
}

/// `|s_1 ... s_N>` with each bath spin along +z (`true`) or -z.
pub fn bath_product_basis_state(ups: &[bool]) -> Result<DenseState> {
    let mut psi = DVector::from_element(1, ONE);
    for &up in ups {
        let single = if up {
            DVector::from_vec(vec![ONE, ZERO])
        } else {
            DVector::from_vec(vec![ZERO, ONE])
        };
        psi = psi.kronecker(&single);
    }
    DenseState::from_pure(&psi)
}

/// Tensor product of single-site Bloch states.
pub fn bath_product_state(sites: &[Vector3<f64>]) -> Result<DenseState> {
    let mut rho = DenseState::maximally_mixed(1)?;
    for q in sites {
        rho = rho.product(&DenseState::qubit(q)?);
    }
    Ok(rho)
}

/// Qubit trajectory for qubit (x) one sector started in `rho_sector`.
pub fn irrep_evolve(
    k: f64,
    spin: Spin,
    rho_sector: &CMatrix,
    p0: &Vector3<f64>,
    times: &[f64],
) -> Result<Trajectory> {
    if rho_sector.nrows() != spin.dim() {
        return Err(Error::DimensionMismatch { expected: spin.dim(), got: rho_sector.nrows() });
    }
    let sector = DenseState::new(rho_sector.clone())?;
    let h = build_hamiltonian(HamiltonianKind::Irrep { k, spin }, 0)?;
    let rho0 = product_state(p0, &sector)?;
    Ok(evolve_reduced(&h, &rho0, times, true)?.trajectory)
}

/// Weighted mixture of irrep runs, one per (weight, spin, sector state).
pub fn irrep_mixture(
    k: f64,
    sectors: &[(f64, Spin, CMatrix)],
    p0: &Vector3<f64>,
    times: &[f64],
) -> Result<Trajectory> {
    check_grid(times)?;
    let mut pols = vec![Vector3::zeros(); times.len()];
    let mut bath = vec![Vector3::zeros(); times.len()];
    for (w, spin, rho) in sectors {
        let run = irrep_evolve(k, *spin, rho, p0, times)?;
        for (acc, p) in pols.iter_mut().zip(&run.polarizations) {
            *acc += p * *w;
        }
        if let Some(b) = &run.bath_polarization {
            for (acc, p) in bath.iter_mut().zip(b) {
                *acc += p * *w;
            }
        }
    }
    let mut traj = Trajectory::from_polarizations(times.to_vec(), pols);
    traj.bath_polarization = Some(bath);
    Ok(traj)
}

/// Reduced qubit state, tracing out everything after the first factor.
pub fn qubit_state(prop: &Propagator, rho: &DenseState) -> Result<DenseState> {
    partial_trace(rho, prop.dims(), &[0])
}
