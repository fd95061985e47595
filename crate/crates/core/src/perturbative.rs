//! Short-time qubit dynamics for site-dependent couplings and a field,
//! `H = sum_i J_i S.I_i + B.S`, with the bath in a product state.

use nalgebra::Vector3;

use crate::closed_form::check_bloch;
use crate::error::{Error, Result};

const SITE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LocalCouplingModel {
    couplings: Vec<f64>,
    site_polarizations: Vec<Vector3<f64>>,
    external_field: Vector3<f64>,
}

impl LocalCouplingModel {
    pub fn new(
        couplings: Vec<f64>,
        site_polarizations: Vec<Vector3<f64>>,
        external_field: Vector3<f64>,
    ) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidModel("at least one site is required".into()));
        }
        if couplings.len() != site_polarizations.len() {
            return Err(Error::InvalidModel(format!(
                "{} couplings but {} site polarizations",
                couplings.len(),
                site_polarizations.len()
            )));
        }
        if let Some(j) = couplings.iter().find(|j| !j.is_finite()) {
            return Err(Error::InvalidModel(format!("coupling {j} is not finite")));
        }
        for (i, q) in site_polarizations.iter().enumerate() {
            if !q.iter().all(|v| v.is_finite()) || q.norm() > 1.0 + SITE_TOL {
                return Err(Error::InvalidModel(format!(
                    "site {i} polarization has norm {}",
                    q.norm()
                )));
            }
        }
        if !external_field.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidModel("external field is not finite".into()));
        }
        Ok(Self { couplings, site_polarizations, external_field })
    }

    /// N unpolarized sites with equal coupling and no field.
    pub fn uniform_unpolarized(n_sites: usize, coupling: f64) -> Result<Self> {
        Self::new(vec![coupling; n_sites], vec![Vector3::zeros(); n_sites], Vector3::zeros())
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn site_polarizations(&self) -> &[Vector3<f64>] {
        &self.site_polarizations
    }

    pub fn external_field(&self) -> &Vector3<f64> {
        &self.external_field
    }

    pub fn n_sites(&self) -> usize {
        self.couplings.len()
    }

    pub fn with_field(&self, field: Vector3<f64>) -> Result<Self> {
        Self::new(self.couplings.clone(), self.site_polarizations.clone(), field)
    }

    pub fn max_coupling(&self) -> f64 {
        self.couplings.iter().fold(0.0, |m, j| m.max(j.abs()))
    }

    /// First- and second-order Taylor coefficients of P_A(t).
    pub fn taylor_coefficients(&self, p: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
        let b = &self.external_field;
        let pairs: Vec<(f64, &Vector3<f64>)> =
            self.couplings.iter().copied().zip(&self.site_polarizations).collect();
        let mean_field: Vector3<f64> = pairs.iter().map(|(j, q)| *q * (j / 2.0)).sum();
        let first = (mean_field + b).cross(p);

        let mut second = Vector3::zeros();
        for (i, &(ji, qi)) in pairs.iter().enumerate() {
            second += (qi - p) * (ji * ji);
            for (j, &(jj, qj)) in pairs.iter().enumerate() {
                if i != j {
                    second += p.cross(qj).cross(qi) * (0.5 * ji * jj);
                }
            }
            second += (p.cross(qi).cross(b) + p.cross(b).cross(qi)) * ji;
        }
        second += p.cross(b).cross(b) * 2.0;
        (first, second / 4.0)
    }
}

/// `P_A(t)` truncated after the t^2 term.
pub fn second_order_polarization(
    model: &LocalCouplingModel,
    p0: &Vector3<f64>,
    t: f64,
) -> Result<Vector3<f64>> {
    check_bloch("p0", p0)?;
    let (a1, a2) = model.taylor_coefficients(p0);
    Ok(p0 + a1 * t + a2 * (t * t))
}

/// `|P_A(t)|` expanded consistently to order t^2.
pub fn second_order_magnitude(model: &LocalCouplingModel, p0: &Vector3<f64>, t: f64) -> Result<f64> {
    check_bloch("p0", p0)?;
    let p = p0.norm();
    if p == 0.0 {
        return Err(Error::InvalidArgument("p0 = 0: magnitude is not analytic".into()));
    }
    let (a1, a2) = model.taylor_coefficients(p0);
    let lin = p0.dot(&a1) / p;
    let quad = (a1.norm_squared() + 2.0 * p0.dot(&a2)) / (2.0 * p) - lin * lin / (2.0 * p);
    Ok(p + lin * t + quad * t * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_p0() {
        let m = LocalCouplingModel::new(
            vec![1.0, 0.5],
            vec![Vector3::x(), Vector3::z() * 0.3],
            Vector3::new(0.1, 0.2, 0.3),
        )
        .unwrap();
        let p0 = Vector3::new(0.0, 0.6, 0.8);
        assert_eq!(second_order_polarization(&m, &p0, 0.0).unwrap(), p0);
    }

    #[test]
    fn unpolarized_sites_decay_independent_of_field() {
        let m = LocalCouplingModel::new(
            vec![1.0, 2.0, 0.5],
            vec![Vector3::zeros(); 3],
            Vector3::new(0.3, -1.0, 2.0),
        )
        .unwrap();
        let p0 = Vector3::new(0.6, 0.0, 0.8);
        let t = 0.05;
        let sum_sq = 1.0 + 4.0 + 0.25;
        let mag = second_order_magnitude(&m, &p0, t).unwrap();
        assert!((mag - (1.0 - t * t / 4.0 * sum_sq)).abs() < 1e-15);
    }

    #[test]
    fn aligned_fully_polarized_sites() {
        // p0 = -z against sites along +z: the magnitude loses t^2/2 sum J^2
        // whatever the field
        let m = LocalCouplingModel::new(
            vec![1.0, 0.7],
            vec![Vector3::z(); 2],
            Vector3::new(0.4, 0.1, -0.3),
        )
        .unwrap();
        let t = 0.01;
        let mag = second_order_magnitude(&m, &(-Vector3::z()), t).unwrap();
        let sum_sq = 1.0 + 0.49;
        assert!((mag - (1.0 - t * t / 2.0 * sum_sq)).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        assert!(LocalCouplingModel::new(vec![], vec![], Vector3::zeros()).is_err());
        assert!(LocalCouplingModel::new(vec![1.0], vec![], Vector3::zeros()).is_err());
        assert!(
            LocalCouplingModel::new(vec![1.0], vec![Vector3::x() * 1.1], Vector3::zeros()).is_err()
        );
    }
}
