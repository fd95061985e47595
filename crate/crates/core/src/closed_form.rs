//! Exact qubit dynamics for `H = K S.I_B`.
//!
//! The interaction never mixes bath-spin sectors, and inside sector I the
//! propagator is `a + b S.I` with a single frequency `Lambda = K(I+1/2)/2`.
//! Tracing out the bath leaves the qubit polarization as
//!
//! ```text
//! P_A(t) = f P_A(0) + g + h x P_A(0) + Pi~^T P_A(0)
//! ```
//!
//! where f, g, h and Pi~ are weighted sums over sectors of `sin^2((I+1/2)Kt/2)`
//! and `sin((I+1/2)Kt)` terms. Only the sector weights and the rank-1 and
//! rank-2 polarizations enter.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::angular::{kron, pauli, spin_matrices, CMatrix};
use crate::bath::{BathSpec, SectorPolarization};
use crate::error::{Error, Result};
use crate::sector::SectorWeightTable;
use crate::spin::Spin;

const NORM_TOL: f64 = 1e-9;

pub(crate) fn check_coupling(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("coupling K must be positive, got {k}")));
    }
    Ok(())
}

pub(crate) fn check_bloch(name: &str, p: &Vector3<f64>) -> Result<()> {
    if !p.iter().all(|v| v.is_finite()) || p.norm() > 1.0 + NORM_TOL {
        return Err(Error::InvalidArgument(format!(
            "{name} must be a Bloch vector, |{name}| = {}",
            p.norm()
        )));
    }
    Ok(())
}

/// Propagator of the qubit plus one spin-I sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorEvolution {
    pub spin: Spin,
    pub coupling: f64,
    /// Lambda = K(I + 1/2)/2
    pub lambda_freq: f64,
}

impl SectorEvolution {
    pub fn new(spin: Spin, coupling: f64) -> Result<Self> {
        check_coupling(coupling)?;
        Ok(Self { spin, coupling, lambda_freq: coupling * (spin.value() + 0.5) / 2.0 })
    }

    pub fn a_coeff(&self, t: f64) -> Complex64 {
        let (s, c) = (self.lambda_freq * t).sin_cos();
        Complex64::new(c, -s / self.spin.dim() as f64)
    }

    pub fn b_coeff(&self, t: f64) -> Complex64 {
        let s = (self.lambda_freq * t).sin();
        Complex64::new(0.0, -4.0 * s / self.spin.dim() as f64)
    }

    /// `a + b S.I` on qubit (x) sector, qubit as the leading factor. Equals
    /// `exp(-iKt S.I)` up to the global phase `exp(-iKt/4)`.
    pub fn operator(&self, t: f64) -> CMatrix {
        let d = self.spin.dim();
        let sigma = pauli();
        let j = spin_matrices(self.spin);
        let mut s_dot_i = CMatrix::zeros(2 * d, 2 * d);
        for a in 0..3 {
            s_dot_i += kron(&sigma[a].map(|z| z * 0.5), &j[a]);
        }
        let b = self.b_coeff(t);
        CMatrix::identity(2 * d, 2 * d).map(|z| z * self.a_coeff(t)) + s_dot_i.map(|z| z * b)
    }
}

/// f, g, h, Pi~ at one time together with their time derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionCoefficients {
    pub time: f64,
    pub f: f64,
    pub g: Vector3<f64>,
    pub h: Vector3<f64>,
    pub pi_tilde: Matrix3<f64>,
    pub df: f64,
    pub dg: Vector3<f64>,
    pub dh: Vector3<f64>,
    pub dpi_tilde: Matrix3<f64>,
}

impl EvolutionCoefficients {
    pub fn identity(time: f64) -> Self {
        Self {
            time,
            f: 1.0,
            g: Vector3::zeros(),
            h: Vector3::zeros(),
            pi_tilde: Matrix3::zeros(),
            df: 0.0,
            dg: Vector3::zeros(),
            dh: Vector3::zeros(),
            dpi_tilde: Matrix3::zeros(),
        }
    }

    fn accumulate(&mut self, weight: f64, pol: &SectorPolarization, k: f64) {
        let i = pol.spin.value();
        let x = i + 0.5;
        let phase = x * k * self.time;
        let (sin_half, _) = (phase / 2.0).sin_cos();
        let (sin_full, cos_full) = phase.sin_cos();
        let s2 = sin_half * sin_half;
        // d/dt sin^2(phase/2) = (xK/2) sin(phase)
        let ds2 = 0.5 * x * k * sin_full;

        let cf = weight * 4.0 * i * (i + 1.0) / (3.0 * x * x);
        self.f -= cf * s2;
        self.df -= cf * ds2;

        if pol.spin == Spin::ZERO {
            return;
        }
        let cg = weight * 2.0 * (i + 1.0) / (3.0 * x * x);
        self.g += pol.vector * (cg * s2);
        self.dg += pol.vector * (cg * ds2);

        let ch = weight * (i + 1.0) / (3.0 * x);
        self.h += pol.vector * (ch * sin_full);
        self.dh += pol.vector * (ch * x * k * cos_full);

        let cp = weight * (4.0 * i * (i + 1.0) - 3.0) / (5.0 * x * x);
        self.pi_tilde += pol.tensor * (cp * s2);
        self.dpi_tilde += pol.tensor * (cp * ds2);
    }

    /// Single-sector contribution with weight 1.
    pub fn for_sector(pol: &SectorPolarization, k: f64, t: f64) -> Result<Self> {
        check_coupling(k)?;
        let mut c = Self::identity(t);
        c.accumulate(1.0, pol, k);
        Ok(c)
    }

    /// The affine map `p0 -> M p0 + g` in matrix form.
    pub fn m_matrix(&self) -> Matrix3<f64> {
        assemble_m(self.f, &self.h, &self.pi_tilde)
    }

    pub fn m_derivative(&self) -> Matrix3<f64> {
        assemble_m(self.df, &self.dh, &self.dpi_tilde)
    }
}

/// f 1 + [h]_x + Pi~^T, so that `M p = f p + h x p + Pi~^T p`.
pub(crate) fn assemble_m(f: f64, h: &Vector3<f64>, pi: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::identity() * f + h.cross_matrix() + pi.transpose()
}

pub fn evolution_coefficients(spec: &BathSpec, k: f64, t: f64) -> Result<EvolutionCoefficients> {
    check_coupling(k)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let mut c = EvolutionCoefficients::identity(t);
    for (weight, pol) in spec.sectors() {
        c.accumulate(weight, &pol, k);
    }
    Ok(c)
}

pub fn qubit_polarization_at(p0: &Vector3<f64>, c: &EvolutionCoefficients) -> Result<Vector3<f64>> {
    check_bloch("p0", p0)?;
    Ok(c.f * p0 + c.g + c.h.cross(p0) + c.pi_tilde.transpose() * p0)
}

/// Bath polarization sum_I lambda_I P_I(t), with P_I normalized as 3<I>/(I+1).
///
/// Follows from conservation of S + I_B inside each sector, so it holds for
/// any polarized spec; for unpolarized sectors it reduces to
/// `sum lambda 2I/(I+1/2)^2 sin^2((I+1/2)Kt/2) p0`.
pub fn bath_polarization_at(
    spec: &BathSpec,
    k: f64,
    p0: &Vector3<f64>,
    t: f64,
) -> Result<Vector3<f64>> {
    check_coupling(k)?;
    check_bloch("p0", p0)?;
    let mut total = Vector3::zeros();
    for (weight, pol) in spec.sectors() {
        if pol.spin == Spin::ZERO {
            continue;
        }
        let c = EvolutionCoefficients::for_sector(&pol, k, t)?;
        let pa = qubit_polarization_at(p0, &c)?;
        let i = pol.spin.value();
        total += (pol.vector + (p0 - pa) * (1.5 / (i + 1.0))) * weight;
    }
    Ok(total)
}

/// Induced bath polarization for a bath whose sectors start maximally mixed.
pub fn induced_bath_polarization(
    weights: &SectorWeightTable,
    k: f64,
    p0: &Vector3<f64>,
    t: f64,
) -> Result<Vector3<f64>> {
    check_coupling(k)?;
    check_bloch("p0", p0)?;
    let factor: f64 = weights
        .entries()
        .iter()
        .map(|e| {
            let i = e.spin.value();
            let x = i + 0.5;
            let s = (x * k * t / 2.0).sin();
            e.weight * 2.0 * i / (x * x) * s * s
        })
        .sum();
    Ok(p0 * factor)
}

/// `n_points` equally spaced times from 0 to `t_max` inclusive.
pub fn uniform_grid(t_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if n_points == 0 {
        return Err(Error::InvalidArgument("grid needs at least one point".into()));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!("t_max must be finite and >= 0, got {t_max}")));
    }
    if n_points == 1 {
        return Ok(vec![0.0]);
    }
    if t_max == 0.0 {
        return Err(Error::InvalidArgument("t_max = 0 with more than one point".into()));
    }
    let step = t_max / (n_points - 1) as f64;
    Ok((0..n_points).map(|k| step * k as f64).collect())
}

pub fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite time in grid".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub polarizations: Vec<Vector3<f64>>,
    pub magnitudes: Vec<f64>,
    pub bath_polarization: Option<Vec<Vector3<f64>>>,
}

impl Trajectory {
    pub fn from_polarizations(times: Vec<f64>, polarizations: Vec<Vector3<f64>>) -> Self {
        let magnitudes = polarizations.iter().map(|p| p.norm()).collect();
        Self { times, polarizations, magnitudes, bath_polarization: None }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest componentwise deviation of the qubit polarizations.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.polarizations
            .iter()
            .zip(&other.polarizations)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
    }
}

pub fn trajectory(spec: &BathSpec, k: f64, p0: &Vector3<f64>, times: &[f64]) -> Result<Trajectory> {
    check_coupling(k)?;
    check_bloch("p0", p0)?;
    check_grid(times)?;
    let mut pols = Vec::with_capacity(times.len());
    let mut bath = Vec::with_capacity(times.len());
    for &t in times {
        pols.push(qubit_polarization_at(p0, &evolution_coefficients(spec, k, t)?)?);
        bath.push(bath_polarization_at(spec, k, p0, t)?);
    }
    let mut traj = Trajectory::from_polarizations(times.to_vec(), pols);
    traj.bath_polarization = Some(bath);
    Ok(traj)
}

/// Leading small-time behaviour: f ~ 1 - w_f t^2, |h| ~ sqrt(w_h) t,
/// Pi~ ~ w_mn t^2.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallTimeMoments {
    pub w_f: f64,
    /// Squared: |(K/3) sum lambda (I+1) P_I|^2.
    pub w_h: f64,
    pub w_mn: Matrix3<f64>,
    /// Angle between the limiting direction of h (and g) and p0; absent when
    /// the bath carries no net vector polarization.
    pub theta_h: Option<f64>,
    pub theta_g: Option<f64>,
}

pub fn small_time_moments(spec: &BathSpec, k: f64, p0: &Vector3<f64>) -> Result<SmallTimeMoments> {
    check_coupling(k)?;
    check_bloch("p0", p0)?;
    if p0.norm() == 0.0 {
        return Err(Error::InvalidArgument("p0 = 0: decay angles are undefined".into()));
    }
    let mut casimir = 0.0;
    let mut vec_sum = Vector3::zeros();
    let mut w_mn = Matrix3::zeros();
    for (weight, pol) in spec.sectors() {
        let i = pol.spin.value();
        casimir += weight * i * (i + 1.0);
        vec_sum += pol.vector * (weight * (i + 1.0));
        w_mn += pol.tensor * (weight * (i * (i + 1.0) - 0.75));
    }
    let h_dir = vec_sum * (k / 3.0);
    let w_h = h_dir.norm_squared();
    let theta = (w_h > 0.0).then(|| {
        let c = h_dir.dot(p0) / (h_dir.norm() * p0.norm());
        c.clamp(-1.0, 1.0).acos()
    });
    Ok(SmallTimeMoments {
        w_f: k * k / 3.0 * casimir,
        w_h,
        w_mn: w_mn * (k * k / 5.0),
        theta_h: theta,
        theta_g: theta,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianTau {
    pub tau: f64,
    pub inv_tau_sq: f64,
    /// Additive pieces of 1/tau^2: [w_f, h term, g term, tensor term].
    pub contributions: [f64; 4],
    pub moments: SmallTimeMoments,
}

pub fn gaussian_tau(spec: &BathSpec, k: f64, p0: &Vector3<f64>) -> Result<GaussianTau> {
    let m = small_time_moments(spec, k, p0)?;
    let p = p0.norm();
    let (h_term, g_term) = match (m.theta_h, m.theta_g) {
        (Some(th), Some(tg)) => {
            let s = th.sin();
            (-0.5 * m.w_h * s * s, -k * m.w_h.sqrt() / (2.0 * p) * tg.cos())
        }
        _ => (0.0, 0.0),
    };
    let tensor_term = -(p0.transpose() * m.w_mn * p0)[(0, 0)] / (p * p);
    let contributions = [m.w_f, h_term, g_term, tensor_term];
    let inv_tau_sq: f64 = contributions.iter().sum();
    if !(inv_tau_sq > 0.0) {
        return Err(Error::NoGaussianDecay { inv_tau_sq });
    }
    Ok(GaussianTau { tau: inv_tau_sq.sqrt().recip(), inv_tau_sq, contributions, moments: m })
}

/// Least-squares fit of `exp(-(t/tau)^2)` to sampled `ratio(t)`, searching
/// tau in `[lo, hi]`.
pub fn fit_gaussian_tau(times: &[f64], ratio: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if times.len() != ratio.len() || times.is_empty() {
        return Err(Error::InvalidArgument("fit needs matching non-empty samples".into()));
    }
    if !(0.0 < lo && lo < hi) {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    let cost = |tau: f64| -> f64 {
        times
            .iter()
            .zip(ratio)
            .map(|(t, y)| {
                let r = y - (-(t / tau).powi(2)).exp();
                r * r
            })
            .sum()
    };
    // golden-section search
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * b.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    Ok((a + b) / 2.0)
}

/// Two spin-1/2 particles, `H = K S_A.S_B`.
pub fn two_spin_polarization(
    pa0: &Vector3<f64>,
    pb0: &Vector3<f64>,
    k: f64,
    t: f64,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    check_coupling(k)?;
    check_bloch("pA0", pa0)?;
    check_bloch("pB0", pb0)?;
    let (s, c) = (k * t / 2.0).sin_cos();
    let half_sin = 0.5 * (k * t).sin();
    let pa = c * c * pa0 + s * s * pb0 + pb0.cross(pa0) * half_sin;
    let pb = c * c * pb0 + s * s * pa0 + pa0.cross(pb0) * half_sin;
    Ok((pa, pb))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityKind {
    TwoSpinPure,
    TwoSpinAll,
    BathPure,
    BathAll,
}

impl FidelityKind {
    pub const ALL: [FidelityKind; 4] =
        [Self::TwoSpinPure, Self::TwoSpinAll, Self::BathPure, Self::BathAll];

    pub fn name(self) -> &'static str {
        match self {
            Self::TwoSpinPure => "two_spin_pure",
            Self::TwoSpinAll => "two_spin_all",
            Self::BathPure => "bath_pure",
            Self::BathAll => "bath_all",
        }
    }

    pub fn needs_weights(self) -> bool {
        matches!(self, Self::BathPure | Self::BathAll)
    }
}

impl fmt::Display for FidelityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FidelityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fidelity kind '{s}'")))
    }
}

/// 3(pi/4 - 2/3): loss coefficient when averaging over mixed states too.
pub fn mixed_state_loss() -> f64 {
    3.0 * (PI / 4.0 - 2.0 / 3.0)
}

/// f(t) of a bath whose sectors are unpolarized.
pub fn unpolarized_f(weights: &SectorWeightTable, k: f64, t: f64) -> Result<f64> {
    let spec = BathSpec::unpolarized(weights.clone());
    Ok(evolution_coefficients(&spec, k, t)?.f)
}

pub fn average_fidelity(
    kind: FidelityKind,
    weights: Option<&SectorWeightTable>,
    k: f64,
    t: f64,
) -> Result<f64> {
    check_coupling(k)?;
    let loss = match kind {
        FidelityKind::TwoSpinPure | FidelityKind::TwoSpinAll => {
            let s = (k * t / 2.0).sin();
            s * s
        }
        FidelityKind::BathPure | FidelityKind::BathAll => {
            let w = weights.ok_or_else(|| {
                Error::InvalidArgument(format!("fidelity kind {kind} needs sector weights"))
            })?;
            1.0 - unpolarized_f(w, k, t)?
        }
    };
    Ok(match kind {
        FidelityKind::TwoSpinPure | FidelityKind::BathPure => 1.0 - loss / 2.0,
        FidelityKind::TwoSpinAll | FidelityKind::BathAll => 1.0 - mixed_state_loss() * loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{fully_polarized_spec, vector_only_spec};
    use crate::sector::maximally_mixed_weights;

    fn half_spec(pb: Vector3<f64>) -> BathSpec {
        let w = SectorWeightTable::single(1, Spin::HALF).unwrap();
        let pol = SectorPolarization { spin: Spin::HALF, vector: pb, tensor: Matrix3::zeros() };
        BathSpec::new(w, [pol]).unwrap()
    }

    #[test]
    fn identity_at_zero() {
        let spec = fully_polarized_spec(6, &Vector3::x()).unwrap();
        let c = evolution_coefficients(&spec, 1.0, 0.0).unwrap();
        assert_eq!(c.f, 1.0);
        assert_eq!(c.g, Vector3::zeros());
        assert_eq!(c.h, Vector3::zeros());
        assert_eq!(c.pi_tilde, Matrix3::zeros());
        assert_eq!(c.m_matrix(), Matrix3::identity());
    }

    #[test]
    fn spin_half_unpolarized_gives_cos_squared() {
        let spec = half_spec(Vector3::zeros());
        for k in 0..40 {
            let t = 0.17 * k as f64;
            let f = evolution_coefficients(&spec, 1.3, t).unwrap().f;
            assert!((f - (1.3 * t / 2.0).cos().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let spec = fully_polarized_spec(5, &Vector3::new(0.6, 0.0, 0.8)).unwrap();
        let dt = 1e-6;
        for &t in &[0.1, 0.7, 2.3] {
            let c = evolution_coefficients(&spec, 1.0, t).unwrap();
            let cp = evolution_coefficients(&spec, 1.0, t + dt).unwrap();
            let cm = evolution_coefficients(&spec, 1.0, t - dt).unwrap();
            assert!(((cp.f - cm.f) / (2.0 * dt) - c.df).abs() < 1e-7);
            assert!(((cp.g - cm.g) / (2.0 * dt) - c.dg).amax() < 1e-7);
            assert!(((cp.h - cm.h) / (2.0 * dt) - c.dh).amax() < 1e-7);
            assert!(((cp.pi_tilde - cm.pi_tilde) / (2.0 * dt) - c.dpi_tilde).amax() < 1e-7);
        }
    }

    #[test]
    fn swap_and_invariance() {
        let pa = Vector3::x();
        let pb = Vector3::new(-1.0, 0.0, 1.0) / (2.0 * 2f64.sqrt());
        let (a, b) = two_spin_polarization(&pa, &pb, 1.0, PI).unwrap();
        assert!((a - pb).amax() < 1e-15 && (b - pa).amax() < 1e-15);
        let (a, _) = two_spin_polarization(&pa, &pa, 1.0, 0.77).unwrap();
        assert!((a - pa).amax() < 1e-15);
        assert!(two_spin_polarization(&(pa * 2.0), &pb, 1.0, 0.1).is_err());
    }

    #[test]
    fn fidelity_values() {
        let w = maximally_mixed_weights(1).unwrap();
        for kind in FidelityKind::ALL {
            assert_eq!(average_fidelity(kind, Some(&w), 1.0, 0.0).unwrap(), 1.0);
            let fk: FidelityKind = kind.name().parse().unwrap();
            assert_eq!(fk, kind);
        }
        let pure = average_fidelity(FidelityKind::TwoSpinPure, None, 1.0, PI).unwrap();
        assert!((pure - 0.5).abs() < 1e-15);
        let all = average_fidelity(FidelityKind::TwoSpinAll, None, 1.0, PI).unwrap();
        assert!((all - 0.643_80).abs() < 1e-5);
        // a one-spin bath is the two-spin problem
        for kind in [FidelityKind::BathPure, FidelityKind::BathAll] {
            let v = average_fidelity(kind, Some(&w), 1.0, 1.1).unwrap();
            let two = match kind {
                FidelityKind::BathPure => FidelityKind::TwoSpinPure,
                _ => FidelityKind::TwoSpinAll,
            };
            assert!((v - average_fidelity(two, None, 1.0, 1.1).unwrap()).abs() < 1e-15);
        }
        assert!(average_fidelity(FidelityKind::BathAll, None, 1.0, 1.0).is_err());
        assert!("unknown".parse::<FidelityKind>().is_err());
    }

    #[test]
    fn tau_values() {
        for n in [4usize, 10, 100] {
            let nf = n as f64;
            let mixed = BathSpec::unpolarized(maximally_mixed_weights(n).unwrap());
            let t = gaussian_tau(&mixed, 1.0, &Vector3::new(0.3, -0.2, 0.5)).unwrap().tau;
            assert!((t / (2.0 / nf.sqrt()) - 1.0).abs() < 1e-12);
            let down = -Vector3::z();
            let full = fully_polarized_spec(n, &Vector3::z()).unwrap();
            let t = gaussian_tau(&full, 1.0, &down).unwrap().tau;
            assert!((t / (2f64.sqrt() / nf.sqrt()) - 1.0).abs() < 1e-12);
            let vec_only = vector_only_spec(n, &Vector3::z()).unwrap();
            let t = gaussian_tau(&vec_only, 1.0, &down).unwrap().tau;
            let expect = 2.0 * 3f64.sqrt() / (nf * (nf + 5.0)).sqrt();
            assert!((t / expect - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn moments() {
        let spec = BathSpec::unpolarized(maximally_mixed_weights(4).unwrap());
        let m = small_time_moments(&spec, 1.0, &Vector3::z()).unwrap();
        assert!((m.w_f - 1.0).abs() < 1e-14);
        assert_eq!(m.w_h, 0.0);
        assert_eq!(m.w_mn, Matrix3::zeros());
        assert!(m.theta_h.is_none());
        assert!(small_time_moments(&spec, 1.0, &Vector3::zeros()).is_err());

        let full = fully_polarized_spec(7, &Vector3::z()).unwrap();
        let m = small_time_moments(&full, 2.0, &Vector3::x()).unwrap();
        assert!((m.w_h - 49.0).abs() < 1e-12);
        assert!((m.theta_h.unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn growing_polarization_is_an_error() {
        // aligned with a fully polarized bath the qubit does not decay at all
        let full = fully_polarized_spec(4, &Vector3::z()).unwrap();
        assert!(matches!(
            gaussian_tau(&full, 1.0, &Vector3::z()),
            Err(Error::NoGaussianDecay { .. })
        ));
    }

    #[test]
    fn sector_operator_is_unitary() {
        for twice in 0..=6 {
            let ev = SectorEvolution::new(Spin::from_twice(twice), 1.0).unwrap();
            let u = ev.operator(0.913);
            let d = u.nrows();
            let err = (&u * u.adjoint() - CMatrix::identity(d, d))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_exact_gaussian() {
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.01).collect();
        let ratio: Vec<f64> = times.iter().map(|t| (-(t / 0.37f64).powi(2)).exp()).collect();
        let tau = fit_gaussian_tau(&times, &ratio, 0.1, 1.0).unwrap();
        assert!((tau - 0.37).abs() < 1e-9);
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(1.0, 1).unwrap(), vec![0.0]);
        let g = uniform_grid(2.0, 5).unwrap();
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(uniform_grid(1.0, 0).is_err());
        assert!(check_grid(&[0.0, 0.0]).is_err());
        assert!(check_grid(&[]).is_err());
    }
}
