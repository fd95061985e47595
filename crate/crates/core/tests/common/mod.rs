#![allow(dead_code)]

use centralspin::angular::{spin_matrices, CMatrix};
use centralspin::closed_form::{fit_gaussian_tau, trajectory, uniform_grid};
use centralspin::bath::BathSpec;
use centralspin::Spin;
use nalgebra::Vector3;
use num_complex::Complex64;

/// Excluded windows for master-equation reintegration: |det M| below this.
pub const DET_FLOOR: f64 = 1e-3;

pub fn fitted_tau(spec: &BathSpec, k: f64, p0: &Vector3<f64>, tau: f64) -> f64 {
    let times = uniform_grid(0.3 * tau, 301).unwrap();
    let traj = trajectory(spec, k, p0, &times).unwrap();
    let ratio: Vec<f64> = traj.magnitudes.iter().map(|m| m / p0.norm()).collect();
    fit_gaussian_tau(&times, &ratio, tau / 10.0, tau * 10.0).unwrap()
}

/// Least-squares slope of log(err) against log(t).
pub fn log_log_slope(ts: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Two Hermitian rank-3 operators on spin I: the symmetrized I_x I_y I_z
/// and the zero-component 5 I_z^3 - (3I(I+1) - 1) I_z.
pub fn rank3_operators(spin: Spin) -> [CMatrix; 2] {
    let [x, y, z] = spin_matrices(spin);
    let perms = [
        &x * &y * &z,
        &x * &z * &y,
        &y * &x * &z,
        &y * &z * &x,
        &z * &x * &y,
        &z * &y * &x,
    ];
    let sym = perms.iter().fold(CMatrix::zeros(spin.dim(), spin.dim()), |a, p| a + p)
        .map(|v| v / 6.0);
    let c = 3.0 * spin.casimir() - 1.0;
    let t30 = &z * &z * &z * Complex64::new(5.0, 0.0) - z.map(|v| v * c);
    [sym, t30]
}

pub fn min_eig(m: &CMatrix) -> f64 {
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `rho + eps * op`, with eps the largest step in `max_eps` that keeps the
/// matrix comfortably positive.
pub fn add_positive(rho: &CMatrix, op: &CMatrix, max_eps: f64) -> (CMatrix, f64) {
    let mut eps = max_eps;
    loop {
        let m = rho + op.map(|v| v * eps);
        if min_eig(&m) > 1e-3 || eps < 1e-12 {
            return (m, eps);
        }
        eps /= 2.0;
    }
}

pub struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    pub fn new() -> Self {
        Self { lines: Vec::new() }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((name.to_string(), pass));
    }

    pub fn failures(&self) -> Vec<String> {
        self.lines.iter().filter(|l| !l.1).map(|l| l.0.clone()).collect()
    }
}
