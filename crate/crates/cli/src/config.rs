//! Scenario configuration files. Frequencies are entered as
//! `{"f_MHz": f, "angular": true}` meaning ω = 2π·f rad/μs, or with
//! `"angular": false` meaning the number already is a rate in rad/μs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use katsim_core::experiments::{closed_cutoffs, open_cutoffs, DecoherenceMode, ErrorKind, GateModel, RateUnits};
use katsim_core::hamiltonians::{Cutoffs, SystemParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    TruthTable,
    Populations,
    Trajectory,
    SweepTiming,
    SweepDetuning,
    SweepCoupling,
    SweepKappa,
    SweepGamma,
    SweepEqual,
    EffectiveCompare,
}

impl Scenario {
    pub fn error_kind(self) -> Option<ErrorKind> {
        match self {
            Scenario::SweepTiming => Some(ErrorKind::Timing),
            Scenario::SweepDetuning => Some(ErrorKind::Detuning),
            Scenario::SweepCoupling => Some(ErrorKind::Coupling),
            _ => None,
        }
    }

    pub fn decoherence_mode(self) -> Option<DecoherenceMode> {
        match self {
            Scenario::SweepKappa => Some(DecoherenceMode::KappaOnly),
            Scenario::SweepGamma => Some(DecoherenceMode::GammaOnly),
            Scenario::SweepEqual => Some(DecoherenceMode::Equal),
            _ => None,
        }
    }

    fn is_open(self) -> bool {
        self.decoherence_mode().is_some() || self == Scenario::EffectiveCompare
    }

    /// File name of the scenario's CSV artifact.
    pub fn csv_name(self) -> &'static str {
        match self {
            Scenario::TruthTable => "truth_table.csv",
            Scenario::Populations => "populations.csv",
            Scenario::Trajectory => "trajectory.csv",
            Scenario::SweepTiming | Scenario::SweepDetuning | Scenario::SweepCoupling => "sweep.csv",
            Scenario::SweepKappa | Scenario::SweepGamma | Scenario::SweepEqual => "decoherence.csv",
            Scenario::EffectiveCompare => "effective_compare.csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frequency {
    #[serde(rename = "f_MHz")]
    pub f_mhz: f64,
    pub angular: bool,
}

impl Frequency {
    pub fn mhz(f: f64) -> Self {
        Frequency { f_mhz: f, angular: true }
    }

    /// Rate in rad/μs.
    pub fn rate(&self) -> f64 {
        if self.angular {
            2.0 * PI * self.f_mhz
        } else {
            self.f_mhz
        }
    }
}

/// Physical parameters. Unset derived quantities follow the standard
/// relations Ω_p = Kα², Δ = 4Jα, ζ = Δ.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_p: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Cutoffs>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        katsim_core::experiments::linear_grid(self.lo, self.hi, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub params: PhysicalParams,
    #[serde(default, rename = "N_list", skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Relative errors for parameter sweeps, rates in MHz for decoherence sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<GateModel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_errors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Population window in gate times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_units: Option<RateUnits>,
    #[serde(default, rename = "kappa_MHz", skip_serializing_if = "Option::is_none")]
    pub kappa_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Present in manifests; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_info: Option<serde_json::Value>,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            params: PhysicalParams::default(),
            n_list: None,
            grid: None,
            models: None,
            timing_errors: None,
            samples: None,
            window: None,
            rate_units: None,
            kappa_mhz: None,
            output_dir: None,
            tol: None,
            workers: None,
            run_info: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Strict JSON parse; errors name the field and carry line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    fn alpha(&self) -> f64 {
        self.params.alpha.unwrap_or(2.0)
    }

    /// Fills every scenario-dependent default so that the serialized result
    /// reproduces the run exactly.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        let s = c.scenario;
        let alpha = c.alpha();
        c.params.alpha.get_or_insert(alpha);
        c.params.kerr.get_or_insert(Frequency::mhz(20.0));
        c.params.coupling.get_or_insert(Frequency::mhz(1.0));
        c.params.cutoffs.get_or_insert(if s.is_open() { open_cutoffs(alpha) } else { closed_cutoffs(alpha) });
        let all = vec![1, 2, 4, 8];
        c.n_list.get_or_insert(match s {
            Scenario::TruthTable | Scenario::EffectiveCompare => vec![1],
            _ => all,
        });
        if s.error_kind().is_some() {
            c.grid.get_or_insert(Grid { lo: -0.1, hi: 0.1, points: 41 });
        }
        if s.decoherence_mode().is_some() {
            c.grid.get_or_insert(Grid { lo: 0.0, hi: 0.1, points: 11 });
        }
        if s.is_open() {
            c.rate_units.get_or_insert(RateUnits::Plain);
        }
        match s {
            Scenario::TruthTable => {
                c.models.get_or_insert(vec![GateModel::Ideal, GateModel::Effective, GateModel::Full]);
            }
            Scenario::Populations => {
                c.samples.get_or_insert(katsim_core::dynamics::DEFAULT_SAMPLES);
                c.window.get_or_insert(katsim_core::experiments::POPULATION_WINDOW);
            }
            Scenario::Trajectory => {
                c.samples.get_or_insert(katsim_core::experiments::TRAJECTORY_SAMPLES);
                c.timing_errors.get_or_insert(vec![0.0, 0.1]);
            }
            Scenario::EffectiveCompare => {
                c.samples.get_or_insert(101);
                c.kappa_mhz.get_or_insert(0.05);
            }
            _ => {}
        }
        c.tol.get_or_insert(DEFAULT_TOL);
        c.run_info = None;
        c
    }

    /// Simulation parameters for the first entry of `N_list`.
    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        let c = self.resolved();
        let p = &c.params;
        let alpha = c.alpha();
        let kerr = p.kerr.unwrap().rate();
        let coupling = p.coupling.unwrap().rate();
        let delta = p.delta.map(|f| f.rate()).unwrap_or(4.0 * coupling * alpha);
        let zeta = p.zeta.map(|f| f.rate()).unwrap_or(delta);
        let mut sp = SystemParams {
            kerr,
            omega_p: p.omega_p.map(|f| f.rate()).unwrap_or(kerr * alpha * alpha),
            coupling,
            delta,
            drive_delta: delta,
            alpha,
            zeta,
            weights: vec![1.0],
            gate_time: 2.0 * PI / zeta,
            noise: Default::default(),
            cutoffs: p.cutoffs.unwrap(),
        };
        let n = c.n_list.as_ref().and_then(|l| l.first().copied()).unwrap_or(1);
        if n != 1 {
            sp = sp.with_tones(n).map_err(CliError::Invalid)?;
        }
        sp.validate().map_err(CliError::Invalid)?;
        self.check_lists(&c)?;
        Ok(sp)
    }

    fn check_lists(&self, c: &ScenarioConfig) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Parse(format!("field `{field}`: {why}")));
        let ns = c.n_list.as_deref().unwrap_or(&[]);
        if ns.is_empty() || ns.contains(&0) {
            return bad("N_list", "needs at least one positive tone count");
        }
        if c.scenario == Scenario::TruthTable && ns.len() != 1 {
            return bad("N_list", "truth_table takes a single tone count");
        }
        if let Some(g) = c.grid {
            if g.points == 0 || !(g.lo.is_finite() && g.hi.is_finite()) || g.lo > g.hi {
                return bad("grid", "needs finite lo <= hi and at least one point");
            }
            if c.scenario.decoherence_mode().is_some() && g.lo < 0.0 {
                return bad("grid", "rates must be non-negative");
            }
        }
        if matches!(c.samples, Some(s) if s < 2) {
            return bad("samples", "needs at least two samples");
        }
        if matches!(c.window, Some(w) if !(w > 0.0)) {
            return bad("window", "must be positive");
        }
        if matches!(c.kappa_mhz, Some(k) if !(k >= 0.0)) {
            return bad("kappa_MHz", "must be non-negative");
        }
        if matches!(c.workers, Some(0)) {
            return bad("workers", "must be a positive integer");
        }
        if matches!(c.models.as_deref(), Some([])) {
            return bad("models", "needs at least one model");
        }
        let tol = c.tol.unwrap_or(DEFAULT_TOL);
        if !(1e-12..=1e-6).contains(&tol) {
            return bad("tol", "must lie in [1e-12, 1e-6]");
        }
        Ok(())
    }
}
