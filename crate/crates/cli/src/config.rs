//! JSON run configuration and its resolution into library inputs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use centralspin::bath::{validate_bath_spec, BathSpec, SectorPolarization};
use centralspin::perturbative::LocalCouplingModel;
use centralspin::presets::{self, full_period, seeded_rng, PresetName};
use centralspin::sector::{SectorWeight, SectorWeightTable};
use centralspin::Spin;
use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_RANDOM_MAX_N: usize = 8;
pub const DEFAULT_LOCAL_SITES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    TwoSpin,
    ClosedForm,
    Perturbative,
    MasterEq,
    Oracle,
    Compare,
    TauTable,
}

impl Scenario {
    const ALL: [Scenario; 7] = [
        Self::TwoSpin,
        Self::ClosedForm,
        Self::Perturbative,
        Self::MasterEq,
        Self::Oracle,
        Self::Compare,
        Self::TauTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::TwoSpin => "two_spin",
            Self::ClosedForm => "closed_form",
            Self::Perturbative => "perturbative",
            Self::MasterEq => "master_eq",
            Self::Oracle => "oracle",
            Self::Compare => "compare",
            Self::TauTable => "tau_table",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|x| x.name()).collect();
            format!("unknown scenario '{s}' (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format '{s}' (expected csv or json)")),
        }
    }
}

/// One sector of an explicit bath: weight, vector and tensor polarization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub spin: f64,
    pub weight: f64,
    #[serde(default)]
    pub vector: [f64; 3],
    #[serde(default)]
    pub tensor: [[f64; 3]; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BathConfig {
    Preset {
        preset: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Random {
        random_max_n: usize,
    },
    Explicit {
        n_spins: usize,
        sectors: Vec<SectorConfig>,
        /// Rescale the weights to sum to one instead of rejecting them.
        #[serde(default)]
        normalize: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// `sum_i J_i S.I_i + B.S` with the bath in a product of site states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalConfig {
    pub couplings: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_polarizations: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub field: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_p0: Option<[f64; 3]>,
    /// Second spin of the two-spin scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_p0: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local: Option<LocalConfig>,
    /// Presets tabulated by tau_table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_presets: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }
}

/// Everything a scenario needs, with defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    /// Absent for scenarios that do not use the sector description.
    pub bath: Option<BathConfig>,
    pub qubit_p0: [f64; 3],
    pub partner_p0: Option<[f64; 3]>,
    pub coupling: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub format: Format,
    pub local: Option<LocalConfig>,
    pub tau_presets: Option<Vec<String>>,
    pub seed: u64,
    pub out_path: Option<PathBuf>,
    pub preset: Option<PresetName>,
    pub p0_explicit: bool,
}

fn usage<E: fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::from(a)
}

fn bloch(name: &str, a: [f64; 3]) -> Result<Vector3<f64>, CliError> {
    let v = vec3(a);
    if !v.iter().all(|x| x.is_finite()) || v.norm() > 1.0 + 1e-9 {
        return Err(CliError::Usage(format!("{name} must lie in the Bloch ball, |{name}| = {}", v.norm())));
    }
    Ok(v)
}

fn parse_preset(name: &str) -> Result<PresetName, CliError> {
    name.parse::<PresetName>().map_err(usage)
}

pub fn resolve(cfg: RunConfig) -> Result<Resolved, CliError> {
    let scenario = cfg
        .scenario
        .ok_or_else(|| CliError::Usage("no scenario given (use --scenario or the config)".into()))?;
    let coupling = cfg.coupling.unwrap_or(1.0);
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(CliError::Usage(format!("coupling K must be positive, got {coupling}")));
    }
    let bath_given = cfg.bath.is_some();
    let bath = cfg.bath.unwrap_or(BathConfig::Preset {
        preset: PresetName::Unpolarized.name().into(),
        n: None,
    });
    let preset = match &bath {
        BathConfig::Preset { preset, .. } => Some(parse_preset(preset)?),
        _ => None,
    };
    let bath = match (bath, preset) {
        (BathConfig::Preset { preset, n }, Some(p)) => {
            let fallback = if scenario == Scenario::TauTable { presets::FIGURE_N } else { p.default_n() };
            BathConfig::Preset { preset, n: Some(n.unwrap_or(fallback)) }
        }
        (b, _) => b,
    };

    let default_p0 = match (scenario, preset) {
        (Scenario::TwoSpin | Scenario::Perturbative, _) => Vector3::x(),
        (_, Some(p)) => p.default_p0(),
        _ => Vector3::z(),
    };
    let qubit_p0 = cfg.qubit_p0.unwrap_or(default_p0.into()).map(|v| v + 0.0);
    bloch("qubit_p0", qubit_p0)?;
    let partner_p0 = match scenario {
        Scenario::TwoSpin => {
            let p = cfg
                .partner_p0
                .unwrap_or((Vector3::new(-1.0, 0.0, 1.0) / (2.0 * 2f64.sqrt())).into());
            bloch("partner_p0", p)?;
            Some(p)
        }
        _ => None,
    };

    let p0_explicit = cfg.qubit_p0.is_some();
    let seed = cfg.seed.unwrap_or(0);
    let local = match (scenario, cfg.local) {
        (_, Some(l)) => Some(l),
        (Scenario::Perturbative, None) => Some(random_local(seed, coupling)),
        _ => None,
    };

    let grid = cfg.grid.unwrap_or(GridConfig { t_max: None, n_points: None });
    let default_t_max = match scenario {
        Scenario::TwoSpin => full_period(coupling) / 2.0,
        Scenario::Perturbative => {
            let jmax = local
                .as_ref()
                .map(|l| l.couplings.iter().fold(0.0f64, |m, j| m.max(j.abs())))
                .unwrap_or(coupling);
            0.1 / if jmax > 0.0 { jmax } else { coupling }
        }
        _ => full_period(coupling),
    };
    let t_max = grid.t_max.unwrap_or(default_t_max);
    let n_points = grid.n_points.unwrap_or(DEFAULT_POINTS);
    if n_points == 0 {
        return Err(CliError::Usage("grid n_points must be at least 1".into()));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() || (t_max == 0.0 && n_points > 1) {
        return Err(CliError::Usage(format!("grid t_max must be positive, got {t_max}")));
    }
    let tau_presets = match (scenario, cfg.tau_presets, bath_given) {
        (Scenario::TauTable, None, false) => Some(
            [PresetName::Unpolarized, PresetName::FullyPolarized, PresetName::VectorOnly]
                .map(|p| p.name().to_string())
                .to_vec(),
        ),
        (_, t, _) => t,
    };
    if let Some(names) = &tau_presets {
        for n in names {
            parse_preset(n)?;
        }
    }
    let output = cfg.output.unwrap_or(OutputConfig { path: None, format: Format::Csv });
    let uses_bath = match scenario {
        Scenario::TwoSpin | Scenario::Perturbative => false,
        Scenario::Oracle | Scenario::Compare => local.is_none(),
        _ => true,
    };
    Ok(Resolved {
        scenario,
        bath: uses_bath.then_some(bath),
        qubit_p0,
        partner_p0,
        coupling,
        t_max,
        n_points,
        format: output.format,
        local,
        tau_presets,
        seed,
        out_path: output.path,
        preset,
        p0_explicit,
    })
}

/// Random local model: couplings in [0.5, 1.5] K and sites inside the Bloch ball.
fn random_local(seed: u64, k: f64) -> LocalConfig {
    let mut rng = seeded_rng(seed);
    let couplings = (0..DEFAULT_LOCAL_SITES).map(|_| k * rng.random_range(0.5..1.5)).collect();
    let sites = (0..DEFAULT_LOCAL_SITES)
        .map(|_| loop {
            let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            if vec3(v).norm() <= 1.0 {
                break v;
            }
        })
        .collect();
    LocalConfig { couplings, site_polarizations: Some(sites), field: [0.0; 3] }
}

impl Resolved {
    pub fn p0(&self) -> Vector3<f64> {
        vec3(self.qubit_p0)
    }

    /// The fully resolved configuration, in the input schema; running it
    /// again reproduces the same output.
    pub fn to_run_config(&self) -> RunConfig {
        let keep_p0 = self.scenario != Scenario::TauTable || self.p0_explicit;
        RunConfig {
            scenario: Some(self.scenario),
            bath: self.bath.clone(),
            qubit_p0: keep_p0.then_some(self.qubit_p0),
            partner_p0: self.partner_p0,
            coupling: Some(self.coupling),
            grid: Some(GridConfig { t_max: Some(self.t_max), n_points: Some(self.n_points) }),
            output: Some(OutputConfig { path: None, format: self.format }),
            local: self.local.clone(),
            tau_presets: self.tau_presets.clone(),
            seed: Some(self.seed),
        }
    }

    /// Bath size of a preset bath.
    pub fn bath_n(&self) -> Option<usize> {
        match &self.bath {
            Some(BathConfig::Preset { n, .. }) => *n,
            _ => None,
        }
    }

    /// Builds and validates the bath.
    pub fn bath_spec(&self) -> Result<BathSpec, CliError> {
        let bath = self
            .bath
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("scenario {} takes no bath", self.scenario)))?;
        let spec = match bath {
            BathConfig::Preset { n, .. } => {
                let p = self.preset.expect("preset resolved with the config");
                presets::build(p, n.unwrap_or(p.default_n())).map_err(usage)?
            }
            BathConfig::Random { random_max_n } => {
                presets::random_spec(&mut seeded_rng(self.seed), *random_max_n).map_err(usage)?
            }
            BathConfig::Explicit { n_spins, sectors, normalize } => {
                explicit_spec(*n_spins, sectors, *normalize)?
            }
        };
        let report = validate_bath_spec(&spec);
        if !report.is_valid() {
            let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(CliError::Usage(format!("invalid bath: {}", lines.join("; "))));
        }
        Ok(spec)
    }

    pub fn local_model(&self) -> Result<Option<LocalCouplingModel>, CliError> {
        let Some(l) = &self.local else { return Ok(None) };
        let sites = match &l.site_polarizations {
            Some(s) => s.iter().copied().map(vec3).collect(),
            None => vec![Vector3::zeros(); l.couplings.len()],
        };
        LocalCouplingModel::new(l.couplings.clone(), sites, vec3(l.field)).map(Some).map_err(usage)
    }
}

fn explicit_spec(n_spins: usize, sectors: &[SectorConfig], normalize: bool) -> Result<BathSpec, CliError> {
    let mut entries = Vec::with_capacity(sectors.len());
    let mut pols = Vec::new();
    for s in sectors {
        let spin = Spin::from_f64(s.spin).map_err(usage)?;
        entries.push(SectorWeight { spin, weight: s.weight });
        let tensor = Matrix3::from_fn(|r, c| s.tensor[r][c]);
        let pol = SectorPolarization { spin, vector: vec3(s.vector), tensor };
        if !pol.is_unpolarized() {
            pols.push(pol);
        }
    }
    let weights = if normalize {
        SectorWeightTable::normalized(n_spins, entries)
    } else {
        SectorWeightTable::new(n_spins, entries)
    }
    .map_err(usage)?;
    // unchecked so the validator can name every defect at once
    Ok(BathSpec::from_parts(weights, pols))
}
