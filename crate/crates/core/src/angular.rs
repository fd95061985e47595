//! Spin-I operator matrices in the |I, m> basis ordered m = I, I-1, ..., -I.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::spin::Spin;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I_UNIT: Complex64 = Complex64::new(0.0, 1.0);

/// [I_x, I_y, I_z] built from the ladder elements sqrt(I(I+1) - m(m+1)).
pub fn spin_matrices(spin: Spin) -> [CMatrix; 3] {
    let d = spin.dim();
    let i = spin.value();
    let m_of = |k: usize| i - k as f64;
    let mut raise = CMatrix::zeros(d, d);
    for k in 1..d {
        let m = m_of(k);
        raise[(k - 1, k)] = Complex64::new((i * (i + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower).map(|z| z * 0.5);
    let jy = (&raise - &lower).map(|z| z * Complex64::new(0.0, -0.5));
    let jz = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |k, _| {
        Complex64::new(m_of(k), 0.0)
    }));
    [jx, jy, jz]
}

/// Cartesian rank-2 operators Q^{mn} = (I^m I^n + I^n I^m)/2 - delta_mn I^2 / 3.
pub fn quadrupole_matrices(spin: Spin, j: &[CMatrix; 3]) -> [[CMatrix; 3]; 3] {
    let d = spin.dim();
    let casimir = spin.casimir();
    std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            let mut q = (&j[m] * &j[n] + &j[n] * &j[m]).map(|z| z * 0.5);
            if m == n {
                for k in 0..d {
                    q[(k, k)] -= Complex64::new(casimir / 3.0, 0.0);
                }
            }
            q
        })
    })
}

/// Pauli matrices.
pub fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I_UNIT, I_UNIT, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    // tr(AB) without forming the product
    let mut acc = ZERO;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix) -> bool {
        (a - b).iter().all(|z| z.norm() < 1e-12)
    }

    #[test]
    fn commutation_relations() {
        for twice in 1..=8 {
            let s = Spin::from_twice(twice);
            let [x, y, z] = spin_matrices(s);
            let comm = &x * &y - &y * &x;
            assert!(close(&comm, &z.map(|v| v * I_UNIT)));
            let casimir = &x * &x + &y * &y + &z * &z;
            let expect = CMatrix::identity(s.dim(), s.dim()).map(|v| v * s.casimir());
            assert!(close(&casimir, &expect));
        }
    }

    #[test]
    fn quadrupoles_traceless_and_vanish_for_spin_half() {
        let s = Spin::HALF;
        let j = spin_matrices(s);
        for row in quadrupole_matrices(s, &j) {
            for q in row {
                assert!(q.iter().all(|z| z.norm() < 1e-12));
            }
        }
        let s = Spin::from_twice(5);
        let j = spin_matrices(s);
        let q = quadrupole_matrices(s, &j);
        let tr = q[0][0].trace() + q[1][1].trace() + q[2][2].trace();
        assert!(tr.norm() < 1e-12);
        assert!(q[0][1].trace().norm() < 1e-12);
    }
}
