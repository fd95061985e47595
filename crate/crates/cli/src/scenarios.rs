use centralspin::bath::{axial_sector_state, maximal_weight_projector, sector_density_matrix, BathSpec};
use centralspin::closed_form::{
    average_fidelity, evolution_coefficients, fit_gaussian_tau, gaussian_tau, trajectory,
    two_spin_polarization, uniform_grid, FidelityKind, Trajectory,
};
use centralspin::master_eq::{snapshot, DEFAULT_SINGULAR_TOL};
use centralspin::oracle::{
    bath_product_basis_state, bath_product_state, build_hamiltonian, concurrence, evolve_reduced,
    irrep_mixture, product_state, DenseState, HamiltonianKind, Propagator, DEFAULT_N_CAP,
};
use centralspin::perturbative::{second_order_magnitude, second_order_polarization, LocalCouplingModel};
use centralspin::presets::{self, PresetName};
use centralspin::{Error, Spin};
use nalgebra::Vector3;

use crate::config::{Resolved, Scenario};
use crate::output::{Cell, Table};
use crate::CliError;

const TAU_FIT_POINTS: usize = 301;

/// Bad inputs exit 2; failures of the computation itself exit 3.
pub fn classify(e: Error) -> CliError {
    match e {
        Error::SingularEvolution { .. } | Error::NoGaussianDecay { .. } | Error::InvalidState(_) => {
            CliError::Runtime(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    }
}

pub fn run(r: &Resolved) -> Result<Table, CliError> {
    let times = uniform_grid(r.t_max, r.n_points).map_err(classify)?;
    match r.scenario {
        Scenario::TwoSpin => two_spin(r, &times),
        Scenario::ClosedForm => closed_form(r, &times),
        Scenario::Perturbative => perturbative(r, &times),
        Scenario::MasterEq => master_eq(r, &times),
        Scenario::Oracle => oracle(r, &times),
        Scenario::Compare => compare(r, &times),
        Scenario::TauTable => tau_table(r),
    }
}

fn two_spin(r: &Resolved, times: &[f64]) -> Result<Table, CliError> {
    let k = r.coupling;
    let pa0 = r.p0();
    let pb0 = Vector3::from(r.partner_p0.expect("two_spin resolves a partner"));
    let h = build_hamiltonian(HamiltonianKind::GlobalHeisenberg { k, n: 1 }, DEFAULT_N_CAP)
        .map_err(classify)?;
    let prop = Propagator::new(&h);
    let rho0 = product_state(&pa0, &DenseState::qubit(&pb0).map_err(classify)?).map_err(classify)?;
    let mut table = Table::new(&[
        "t", "P_Ax", "P_Ay", "P_Az", "P_Bx", "P_By", "P_Bz", "P_mag", "C", "F_pure", "F_all",
    ]);
    for &t in times {
        let (pa, pb) = two_spin_polarization(&pa0, &pb0, k, t).map_err(classify)?;
        let c = concurrence(&prop.state_at(&rho0, t).map_err(classify)?).map_err(classify)?;
        let f_pure = average_fidelity(FidelityKind::TwoSpinPure, None, k, t).map_err(classify)?;
        let f_all = average_fidelity(FidelityKind::TwoSpinAll, None, k, t).map_err(classify)?;
        table.push_nums(&[t, pa.x, pa.y, pa.z, pb.x, pb.y, pb.z, pa.norm(), c, f_pure, f_all]);
    }
    Ok(table)
}

fn closed_form(r: &Resolved, times: &[f64]) -> Result<Table, CliError> {
    let spec = r.bath_spec()?;
    let traj = trajectory(&spec, r.coupling, &r.p0(), times).map_err(classify)?;
    // the averaged fidelities are defined for unpolarized sectors only
    let fidelity = spec.is_unpolarized();
    let mut cols = vec!["t", "P_x", "P_y", "P_z", "P_mag", "PB_x", "PB_y", "PB_z"];
    if fidelity {
        cols.extend(["F_pure", "F_all"]);
    }
    let mut table = Table::new(&cols);
    let bath = traj.bath_polarization.as_ref().expect("closed form fills the bath");
    for (i, &t) in times.iter().enumerate() {
        let (p, b) = (traj.polarizations[i], bath[i]);
        let mut row = vec![t, p.x, p.y, p.z, traj.magnitudes[i], b.x, b.y, b.z];
        if fidelity {
            for kind in [FidelityKind::BathPure, FidelityKind::BathAll] {
                row.push(average_fidelity(kind, Some(&spec.weights), r.coupling, t).map_err(classify)?);
            }
        }
        table.push_nums(&row);
    }
    Ok(table)
}

fn local_or_err(r: &Resolved) -> Result<LocalCouplingModel, CliError> {
    r.local_model()?.ok_or_else(|| CliError::Usage("scenario needs a local model".into()))
}

fn perturbative(r: &Resolved, times: &[f64]) -> Result<Table, CliError> {
    let model = local_or_err(r)?;
    let p0 = r.p0();
    let mut table = Table::new(&["t", "P_x", "P_y", "P_z", "P_mag"]);
    for &t in times {
        let p = second_order_polarization(&model, &p0, t).map_err(classify)?;
        let mag = second_order_magnitude(&model, &p0, t).map_err(classify)?;
        table.push_nums(&[t, p.x, p.y, p.z, mag]);
    }
    Ok(table)
}

fn master_eq(r: &Resolved, times: &[f64]) -> Result<Table, CliError> {
    let spec = r.bath_spec()?;
    let mut table = Table::new(&[
        "t", "B_eff_x", "B_eff_y", "B_eff_z", "gamma_1", "gamma_2", "gamma_3", "gamma_perp",
        "gamma_par", "det_M", "singular_flag",
    ]);
    for &t in times {
        match snapshot(&spec, r.coupling, t, DEFAULT_SINGULAR_TOL) {
            Ok(s) => {
                let g = s.decay_rates.values;
                let (perp, par) = s
                    .decay_rates
                    .axial
                    .as_ref()
                    .map_or((f64::NAN, f64::NAN), |a| (a.gamma_perp, a.gamma_par));
                let b = s.b_eff;
                let mut row: Vec<Cell> =
                    [t, b.x, b.y, b.z, g[0], g[1], g[2], perp, par, s.det_m].map(Cell::Num).to_vec();
                row.push(Cell::Int(0));
                table.push(row);
            }
            Err(Error::SingularEvolution { .. }) => {
                let det = evolution_coefficients(&spec, r.coupling, t)
                    .map_err(classify)?
                    .m_matrix()
                    .determinant();
                let mut row = vec![Cell::Num(t)];
                row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), 8));
                row.push(Cell::Num(det));
                row.push(Cell::Int(1));
                table.push(row);
            }
            Err(e) => return Err(classify(e)),
        }
    }
    Ok(table)
}

/// Exact trajectory: the product space for local models and for small mixed
/// or fully polarized presets, sector by sector otherwise.
fn oracle_trajectory(r: &Resolved, times: &[f64]) -> Result<Trajectory, CliError> {
    let k = r.coupling;
    let p0 = r.p0();
    if let Some(model) = r.local_model()? {
        let kind = HamiltonianKind::Local {
            couplings: model.couplings().to_vec(),
            field: *model.external_field(),
        };
        let h = build_hamiltonian(kind, DEFAULT_N_CAP).map_err(classify)?;
        let bath = bath_product_state(model.site_polarizations()).map_err(classify)?;
        let rho0 = product_state(&p0, &bath).map_err(classify)?;
        return Ok(evolve_reduced(&h, &rho0, times, false).map_err(classify)?.trajectory);
    }
    let spec = r.bath_spec()?;
    let n = spec.n_spins();
    let fully_polarized = r.preset == Some(PresetName::FullyPolarized);
    let product_space = matches!(r.preset, Some(PresetName::Unpolarized)) || fully_polarized;
    if product_space && n <= DEFAULT_N_CAP {
        let h = build_hamiltonian(HamiltonianKind::GlobalHeisenberg { k, n }, DEFAULT_N_CAP)
            .map_err(classify)?;
        let bath = if fully_polarized {
            bath_product_basis_state(&vec![true; n])
        } else {
            DenseState::maximally_mixed(1usize << n)
        }
        .map_err(classify)?;
        let rho0 = product_state(&p0, &bath).map_err(classify)?;
        return Ok(evolve_reduced(&h, &rho0, times, true).map_err(classify)?.trajectory);
    }
    if fully_polarized {
        // the rank-2 truncation of |N/2, N/2> is not a state for N > 2
        let spin = Spin::from_twice(n as u32);
        let sectors = [(1.0, spin, maximal_weight_projector(spin))];
        return irrep_mixture(k, &sectors, &p0, times).map_err(classify);
    }
    irrep_trajectory(&spec, k, &p0, times)
}

fn irrep_trajectory(spec: &BathSpec, k: f64, p0: &Vector3<f64>, times: &[f64]) -> Result<Trajectory, CliError> {
    let mut sectors = Vec::new();
    for (w, pol) in spec.sectors() {
        // any state with the same (P, Pi) gives the same qubit dynamics
        let rho = match sector_density_matrix(&pol) {
            Ok(rho) => rho,
            Err(e) => axial_sector_state(&pol).ok_or_else(|| {
                CliError::Usage(format!("no state realizes the polarization of sector I={}: {e}", pol.spin))
            })?,
        };
        sectors.push((w, pol.spin, rho));
    }
    irrep_mixture(k, &sectors, p0, times).map_err(classify)
}

fn oracle(r: &Resolved, times: &[f64]) -> Result<Table, CliError> {
    let traj = oracle_trajectory(r, times)?;
    let mut cols = vec!["t", "P_x", "P_y", "P_z", "P_mag"];
    if traj.bath_polarization.is_some() {
        cols.extend(["PB_x", "PB_y", "PB_z"]);
    }
    let mut table = Table::new(&cols);
    for (i, &t) in times.iter().enumerate() {
        let p = traj.polarizations[i];
        let mut row = vec![t, p.x, p.y, p.z, traj.magnitudes[i]];
        if let Some(b) = &traj.bath_polarization {
            row.extend([b[i].x, b[i].y, b[i].z]);
        }
        table.push_nums(&row);
    }
    Ok(table)
}

fn compare(r: &Resolved, times: &[f64]) -> Result<Table, CliError> {
    let exact = oracle_trajectory(r, times)?;
    let approx = match r.local_model()? {
        Some(model) => {
            let pols = times
                .iter()
                .map(|&t| second_order_polarization(&model, &r.p0(), t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(classify)?;
            Trajectory::from_polarizations(times.to_vec(), pols)
        }
        None => trajectory(&r.bath_spec()?, r.coupling, &r.p0(), times).map_err(classify)?,
    };
    let mut table = Table::new(&["t", "dP_x", "dP_y", "dP_z", "dP_max"]);
    for (i, &t) in times.iter().enumerate() {
        let d = (approx.polarizations[i] - exact.polarizations[i]).abs();
        table.push_nums(&[t, d.x, d.y, d.z, d.max()]);
    }
    table.notes.push(("max_abs_deviation".into(), approx.max_deviation(&exact)));
    Ok(table)
}

fn tau_table(r: &Resolved) -> Result<Table, CliError> {
    let explicit_p0 = r.p0_explicit.then(|| r.p0());
    let mut cases: Vec<(String, BathSpec, Vector3<f64>)> = Vec::new();
    match (&r.tau_presets, r.preset) {
        (Some(names), _) => {
            let n = r.bath_n().unwrap_or(presets::FIGURE_N);
            for name in names {
                let p: PresetName = name.parse().map_err(classify)?;
                let spec = presets::build(p, n).map_err(classify)?;
                cases.push((p.name().into(), spec, explicit_p0.unwrap_or(p.default_p0())));
            }
        }
        (None, Some(p)) => cases.push((p.name().into(), r.bath_spec()?, explicit_p0.unwrap_or(p.default_p0()))),
        (None, None) => cases.push(("custom".into(), r.bath_spec()?, r.p0())),
    }
    let mut table = Table::new(&[
        "preset", "n_spins", "p0_x", "p0_y", "p0_z", "tau", "inv_tau_sq", "tau_fit", "term_f",
        "term_h", "term_g", "term_tensor",
    ]);
    for (label, spec, p0) in cases {
        let g = gaussian_tau(&spec, r.coupling, &p0).map_err(classify)?;
        let fit_times = uniform_grid(0.3 * g.tau, TAU_FIT_POINTS).map_err(classify)?;
        let traj = trajectory(&spec, r.coupling, &p0, &fit_times).map_err(classify)?;
        let ratio: Vec<f64> = traj.magnitudes.iter().map(|m| m / p0.norm()).collect();
        let fit = fit_gaussian_tau(&fit_times, &ratio, g.tau / 10.0, g.tau * 10.0).map_err(classify)?;
        let mut row = vec![Cell::Text(label), Cell::Int(spec.n_spins() as i64)];
        row.extend(
            [p0.x, p0.y, p0.z, g.tau, g.inv_tau_sq, fit]
                .into_iter()
                .chain(g.contributions)
                .map(Cell::Num),
        );
        table.push(row);
    }
    Ok(table)
}
