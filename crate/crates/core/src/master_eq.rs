//! Time-local master equation reproducing the exact reduced dynamics.
//!
//! Writing the closed form as `P(t) = M(t) P(0) + g(t)` gives
//! `dP/dt = D P + R` with `D = Mdot M^-1` and `R = gdot - D g`. The
//! antisymmetric part of D is a rotation about `B_eff`, the symmetric part
//! holds the decay rates, and `Gamma` packages both into the coefficient
//! matrix of a dissipator built from `S = sigma/2`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::bath::BathSpec;
use crate::closed_form::{
    check_bloch, check_coupling, evolution_coefficients, qubit_polarization_at,
    EvolutionCoefficients,
};
use crate::error::{Error, Result};

pub const DEFAULT_SINGULAR_TOL: f64 = 1e-10;
pub const AXIAL_TOL: f64 = 1e-9;

pub fn m_matrix_and_derivative(c: &EvolutionCoefficients) -> (Matrix3<f64>, Matrix3<f64>) {
    (c.m_matrix(), c.m_derivative())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub d: Matrix3<f64>,
    pub det_m: f64,
    /// 2-norm condition number of M.
    pub condition: f64,
}

/// `D = Mdot M^-1`, solved as `M^T D^T = Mdot^T`.
pub fn d_matrix(
    m: &Matrix3<f64>,
    m_dot: &Matrix3<f64>,
    time: f64,
    singular_tol: f64,
) -> Result<Generator> {
    let det = m.determinant();
    if !(det.abs() >= singular_tol) {
        return Err(Error::SingularEvolution { time, det: det.abs() });
    }
    let lu = m.transpose().lu();
    let dt = lu
        .solve(&m_dot.transpose())
        .ok_or(Error::SingularEvolution { time, det: det.abs() })?;
    let sv = m.singular_values();
    let condition = sv.max() / sv.min();
    Ok(Generator { d: dt.transpose(), det_m: det, condition })
}

pub fn r_vector(d: &Matrix3<f64>, c: &EvolutionCoefficients) -> Vector3<f64> {
    c.dg - d * c.g
}

/// `Gamma_lm = D_lm + D_ml - delta_lm tr D - i eps_lmn R_n` and the field of
/// the coherent part `H_c = B_eff.sigma/2`, defined by `D_a P = B_eff x P`.
///
/// The dissipator is `sum_lm Gamma_lm (S_l rho S_m - {S_m S_l, rho}/2)`.
pub fn gamma_and_field(d: &Matrix3<f64>, r: &Vector3<f64>) -> (Matrix3<Complex64>, Vector3<f64>) {
    let sym = d + d.transpose() - Matrix3::identity() * d.trace();
    // [R]_x has (l, m) entry -eps_lmn R_n
    let cross = r.cross_matrix();
    let gamma = Matrix3::from_fn(|l, m| Complex64::new(sym[(l, m)], cross[(l, m)]));
    let b_eff = Vector3::new(
        (d[(2, 1)] - d[(1, 2)]) / 2.0,
        (d[(0, 2)] - d[(2, 0)]) / 2.0,
        (d[(1, 0)] - d[(0, 1)]) / 2.0,
    );
    (gamma, b_eff)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axial {
    pub gamma_perp: f64,
    pub gamma_par: f64,
    /// Eigenvector of the non-degenerate rate.
    pub axis: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRates {
    /// Eigenvalues of D_s in ascending order.
    pub values: [f64; 3],
    /// Matching unit eigenvectors as columns.
    pub vectors: Matrix3<f64>,
    /// Present when two rates coincide; `gamma_perp` is the degenerate pair.
    pub axial: Option<Axial>,
}

pub fn decay_rates(d: &Matrix3<f64>) -> DecayRates {
    let ds = (d + d.transpose()) / 2.0;
    let eig = SymmetricEigen::new(ds);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.map(|k| eig.eigenvalues[k]);
    let vectors = Matrix3::from_columns(&order.map(|k| eig.eigenvectors.column(k).into_owned()));
    let tol = AXIAL_TOL * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let axial = if (values[1] - values[0]).abs() <= tol {
        Some(Axial { gamma_perp: values[0], gamma_par: values[2], axis: vectors.column(2).into() })
    } else if (values[2] - values[1]).abs() <= tol {
        Some(Axial { gamma_perp: values[2], gamma_par: values[0], axis: vectors.column(0).into() })
    } else {
        None
    };
    DecayRates { values, vectors, axial }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasterEqSnapshot {
    pub time: f64,
    pub m_matrix: Matrix3<f64>,
    pub m_dot: Matrix3<f64>,
    pub det_m: f64,
    pub d_matrix: Matrix3<f64>,
    pub r_vector: Vector3<f64>,
    pub gamma_matrix: Matrix3<Complex64>,
    pub b_eff: Vector3<f64>,
    pub decay_rates: DecayRates,
}

pub fn snapshot_from_coefficients(
    c: &EvolutionCoefficients,
    singular_tol: f64,
) -> Result<MasterEqSnapshot> {
    let (m, m_dot) = m_matrix_and_derivative(c);
    let dm = d_matrix(&m, &m_dot, c.time, singular_tol)?;
    let r = r_vector(&dm.d, c);
    let (gamma, b_eff) = gamma_and_field(&dm.d, &r);
    Ok(MasterEqSnapshot {
        time: c.time,
        m_matrix: m,
        m_dot,
        det_m: dm.det_m,
        d_matrix: dm.d,
        r_vector: r,
        gamma_matrix: gamma,
        b_eff,
        decay_rates: decay_rates(&dm.d),
    })
}

pub fn snapshot(spec: &BathSpec, k: f64, t: f64, singular_tol: f64) -> Result<MasterEqSnapshot> {
    snapshot_from_coefficients(&evolution_coefficients(spec, k, t)?, singular_tol)
}

/// Snapshots along a grid; singular times come back as errors in place.
pub fn snapshot_series(
    spec: &BathSpec,
    k: f64,
    times: &[f64],
    singular_tol: f64,
) -> Result<Vec<Result<MasterEqSnapshot>>> {
    check_coupling(k)?;
    crate::closed_form::check_grid(times)?;
    Ok(times.iter().map(|&t| snapshot(spec, k, t, singular_tol)).collect())
}

/// Right-hand side `D P + R` at time t.
pub fn generator_rhs(
    spec: &BathSpec,
    k: f64,
    t: f64,
    p: &Vector3<f64>,
    singular_tol: f64,
) -> Result<Vector3<f64>> {
    let c = evolution_coefficients(spec, k, t)?;
    let (m, m_dot) = m_matrix_and_derivative(&c);
    let d = d_matrix(&m, &m_dot, t, singular_tol)?.d;
    Ok(d * p + r_vector(&d, &c))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reintegration {
    /// Step boundaries, t_k = k * step.
    pub times: Vec<f64>,
    /// Integrated P at each boundary; `None` inside excluded windows.
    pub polarizations: Vec<Option<Vector3<f64>>>,
    /// Times at which integration was restarted from the closed form after
    /// leaving a window with |det M| < `det_floor`.
    pub restarts: Vec<f64>,
}

/// Fixed-step RK4 integration of `dP/dt = D P + R` on `[0, t_end]`.
///
/// A step whose stages would touch `|det M| < det_floor` is skipped; once
/// the determinant recovers, P is re-seeded from the closed form and the
/// integration continues.
pub fn reintegrate_rk4(
    spec: &BathSpec,
    k: f64,
    p0: &Vector3<f64>,
    t_end: f64,
    step: f64,
    det_floor: f64,
) -> Result<Reintegration> {
    check_coupling(k)?;
    check_bloch("p0", p0)?;
    if !(step > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("bad integration range {t_end} / {step}")));
    }
    let n_steps = (t_end / step).round() as usize;
    const MAX_STEPS: usize = 100_000_000;
    if n_steps > MAX_STEPS {
        return Err(Error::ResourceLimit { what: "integration steps", value: n_steps, cap: MAX_STEPS });
    }
    let det_at = |t: f64| -> Result<f64> {
        Ok(evolution_coefficients(spec, k, t)?.m_matrix().determinant().abs())
    };
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut pols = Vec::with_capacity(n_steps + 1);
    let mut restarts = Vec::new();
    let mut state = Some(*p0);
    times.push(0.0);
    pols.push(state);
    for n in 0..n_steps {
        let t = n as f64 * step;
        let t_next = (n + 1) as f64 * step;
        let clear = [t, t + step / 2.0, t_next]
            .into_iter()
            .map(det_at)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|d| d >= det_floor);
        state = match (state, clear) {
            (_, false) => None,
            (Some(p), true) => {
                let rhs = |tt: f64, pp: &Vector3<f64>| generator_rhs(spec, k, tt, pp, 0.0);
                let k1 = rhs(t, &p)?;
                let k2 = rhs(t + step / 2.0, &(p + k1 * (step / 2.0)))?;
                let k3 = rhs(t + step / 2.0, &(p + k2 * (step / 2.0)))?;
                let k4 = rhs(t_next, &(p + k3 * step))?;
                Some(p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0))
            }
            (None, true) => {
                restarts.push(t_next);
                let c = evolution_coefficients(spec, k, t_next)?;
                Some(qubit_polarization_at(p0, &c)?)
            }
        };
        times.push(t_next);
        pols.push(state);
    }
    Ok(Reintegration { times, polarizations: pols, restarts })
}
