//! Hamiltonians on the qubit (x) bath product space, qubit as the leading
//! factor. In the product z-basis bit value 0 is spin up and site i of the
//! bath sits at bit N-1-i.

use std::collections::HashMap;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::angular::{kron, pauli, spin_matrices, CMatrix, ZERO};
use crate::error::{Error, Result};
use crate::spin::Spin;

pub const DEFAULT_N_CAP: usize = 12;
pub const MAX_IRREP_TWICE_SPIN: u32 = 100;
const CHECK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianKind {
    /// `K S.I_B` with N bath spins.
    GlobalHeisenberg { k: f64, n: usize },
    /// `sum_i J_i S.I_i + B.S`
    Local { couplings: Vec<f64>, field: Vector3<f64> },
    /// `K S.I` on qubit (x) one spin-I irrep.
    Irrep { k: f64, spin: Spin },
}

/// Hermitian matrix stored by its non-zero entries, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub dim: usize,
    /// Per row: (column, value), sorted by column.
    pub rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    fn from_map(dim: usize, map: HashMap<(usize, usize), Complex64>) -> Self {
        let mut rows = vec![Vec::new(); dim];
        for ((r, c), v) in map {
            if v != ZERO {
                rows[r].push((c, v));
            }
        }
        rows.iter_mut().for_each(|row| row.sort_by_key(|e| e.0));
        Self { dim, rows }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let rows = (0..m.nrows())
            .map(|r| (0..m.ncols()).filter(|&c| m[(r, c)] != ZERO).map(|c| (c, m[(r, c)])).collect())
            .collect();
        Self { dim: m.nrows(), rows }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.rows[r]
            .binary_search_by_key(&c, |e| e.0)
            .map_or(ZERO, |k| self.rows[r][k].1)
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut rows = Vec::with_capacity(self.dim);
        for row in &self.rows {
            let mut acc: HashMap<usize, Complex64> = HashMap::new();
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    *acc.entry(c).or_insert(ZERO) += a * b;
                }
            }
            let mut out: Vec<(usize, Complex64)> = acc.into_iter().collect();
            out.sort_by_key(|e| e.0);
            rows.push(out);
        }
        SparseMatrix { dim: self.dim, rows }
    }

    /// Largest |A_rc - B_rc|.
    pub fn max_diff(&self, other: &SparseMatrix) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for &(c, v) in &self.rows[r] {
                worst = worst.max((v - other.get(r, c)).norm());
            }
            for &(c, v) in &other.rows[r] {
                worst = worst.max((v - self.get(r, c)).norm());
            }
        }
        worst
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn max_imag(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1.im.abs()).fold(0.0, f64::max)
    }

    /// Index sets of the connected components of the sparsity pattern.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.dim).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, _) in row {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for x in 0..self.dim {
            let root = find(&mut parent, x);
            groups.entry(root).or_default().push(x);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_by_key(|g| g[0]);
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    /// Subsystem dimensions, qubit first.
    pub dims: Vec<usize>,
    pub matrix: SparseMatrix,
}

impl HamiltonianSpec {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    pub fn bath_dim(&self) -> usize {
        self.dims[1..].iter().product()
    }
}

fn check_n(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("bath needs at least one spin".into()));
    }
    if n > cap {
        return Err(Error::ResourceLimit { what: "bath spins", value: n, cap });
    }
    Ok(())
}

fn bit(state: usize, pos: usize) -> usize {
    (state >> pos) & 1
}

/// Sum over pairs (0, site) of `w_site S_0.S_site` on `n_tot` spin-1/2, where
/// spin k sits at bit `n_tot - 1 - k`.
fn heisenberg_star(weights: &[f64], map: &mut HashMap<(usize, usize), Complex64>) {
    let n_tot = weights.len() + 1;
    let dim = 1usize << n_tot;
    let q = n_tot - 1;
    for s in 0..dim {
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let p = n_tot - 2 - i;
            if bit(s, q) == bit(s, p) {
                *map.entry((s, s)).or_insert(ZERO) += Complex64::new(w / 4.0, 0.0);
            } else {
                *map.entry((s, s)).or_insert(ZERO) -= Complex64::new(w / 4.0, 0.0);
                let t = s ^ (1 << q) ^ (1 << p);
                *map.entry((t, s)).or_insert(ZERO) += Complex64::new(w / 2.0, 0.0);
            }
        }
    }
}

/// `B.S` on the qubit only.
fn qubit_field(n_tot: usize, field: &Vector3<f64>, map: &mut HashMap<(usize, usize), Complex64>) {
    let dim = 1usize << n_tot;
    let q = n_tot - 1;
    let s = pauli();
    let h = s[0].map(|z| z * field.x * 0.5) + s[1].map(|z| z * field.y * 0.5)
        + s[2].map(|z| z * field.z * 0.5);
    for st in 0..dim {
        let b = bit(st, q);
        for b2 in 0..2 {
            let v = h[(b2, b)];
            if v != ZERO {
                let t = (st & !(1 << q)) | (b2 << q);
                *map.entry((t, st)).or_insert(ZERO) += v;
            }
        }
    }
}

/// Total bath `I^2` on the qubit (x) bath space.
pub fn bath_casimir(n: usize) -> SparseMatrix {
    let n_tot = n + 1;
    let dim = 1usize << n_tot;
    let mut map = HashMap::new();
    for s in 0..dim {
        *map.entry((s, s)).or_insert(ZERO) += Complex64::new(0.75 * n as f64, 0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (pi, pj) = (n - 1 - i, n - 1 - j);
                if bit(s, pi) == bit(s, pj) {
                    *map.entry((s, s)).or_insert(ZERO) += Complex64::new(0.25, 0.0);
                } else {
                    *map.entry((s, s)).or_insert(ZERO) -= Complex64::new(0.25, 0.0);
                    let t = s ^ (1 << pi) ^ (1 << pj);
                    *map.entry((t, s)).or_insert(ZERO) += Complex64::new(0.5, 0.0);
                }
            }
        }
    }
    SparseMatrix::from_map(dim, map)
}

/// Total z angular momentum of qubit plus bath, diagonal in the product basis.
fn total_jz_diagonal(h: &HamiltonianSpec) -> Vec<f64> {
    match h.kind {
        HamiltonianKind::Irrep { spin, .. } => {
            let d = spin.dim();
            (0..2 * d)
                .map(|k| {
                    let sq = if k < d { 0.5 } else { -0.5 };
                    sq + spin.value() - (k % d) as f64
                })
                .collect()
        }
        _ => (0..h.dim())
            .map(|s| (h.dims.len() as f64) / 2.0 - s.count_ones() as f64)
            .collect(),
    }
}

pub fn build_hamiltonian(kind: HamiltonianKind, n_cap: usize) -> Result<HamiltonianSpec> {
    let (dims, matrix) = match &kind {
        HamiltonianKind::GlobalHeisenberg { k, n } => {
            crate::closed_form::check_coupling(*k)?;
            check_n(*n, n_cap)?;
            let mut map = HashMap::new();
            heisenberg_star(&vec![*k; *n], &mut map);
            (vec![2; n + 1], SparseMatrix::from_map(1 << (n + 1), map))
        }
        HamiltonianKind::Local { couplings, field } => {
            check_n(couplings.len(), n_cap)?;
            if couplings.iter().chain(field.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel("non-finite coupling or field".into()));
            }
            let n = couplings.len();
            let mut map = HashMap::new();
            heisenberg_star(couplings, &mut map);
            qubit_field(n + 1, field, &mut map);
            (vec![2; n + 1], SparseMatrix::from_map(1 << (n + 1), map))
        }
        HamiltonianKind::Irrep { k, spin } => {
            crate::closed_form::check_coupling(*k)?;
            if spin.twice() > MAX_IRREP_TWICE_SPIN {
                return Err(Error::ResourceLimit {
                    what: "irrep twice-spin",
                    value: spin.twice() as usize,
                    cap: MAX_IRREP_TWICE_SPIN as usize,
                });
            }
            let s = pauli();
            let j = spin_matrices(*spin);
            let d = spin.dim();
            let mut m = CMatrix::zeros(2 * d, 2 * d);
            for a in 0..3 {
                m += kron(&s[a].map(|z| z * (0.5 * k)), &j[a]);
            }
            (vec![2, d], SparseMatrix::from_dense(&m))
        }
    };
    let h = HamiltonianSpec { kind, dims, matrix };
    let herm = h.matrix.hermiticity_error();
    if herm > CHECK_TOL {
        return Err(Error::InvalidModel(format!("Hamiltonian not Hermitian ({herm:e})")));
    }
    let conserves_jz = match &h.kind {
        HamiltonianKind::Local { field, .. } => field.x == 0.0 && field.y == 0.0,
        _ => true,
    };
    if conserves_jz {
        let jz = total_jz_diagonal(&h);
        for (r, row) in h.matrix.rows.iter().enumerate() {
            for &(c, v) in row {
                if (jz[r] - jz[c]).abs() > 1e-9 && v.norm() > CHECK_TOL {
                    return Err(Error::InvalidModel(format!(
                        "Hamiltonian does not conserve J_z at ({r}, {c})"
                    )));
                }
            }
        }
    }
    if let HamiltonianKind::GlobalHeisenberg { n, .. } = h.kind {
        if h.matrix.max_imag() > CHECK_TOL {
            return Err(Error::InvalidModel("global Hamiltonian is not real".into()));
        }
        let i2 = bath_casimir(n);
        let comm = h.matrix.mul(&i2).max_diff(&i2.mul(&h.matrix));
        if comm > 1e-10 {
            return Err(Error::InvalidModel(format!("[H, I^2] = {comm:e}")));
        }
    }
    Ok(h)
}
