//! Scenario drivers behind the published datasets: gate truth table,
//! population traces, parameter-error and decoherence sweeps, the
//! effective-dissipator comparison and phase-space trajectories.

mod csv_out;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use csv_out::{
    write_decoherence_csv, write_populations_csv, write_sweep_csv, write_trajectory_csv, write_truth_table_csv,
};

use crate::cat::{effective_loss_jump, Parity};
use crate::dynamics::{
    evolve_master, evolve_state, magnus_propagator, ms_gate_ideal, uniform_grid, EvolutionResult, Hygiene,
    IntegratorStats, MagnusModel, NoiseSpec, Probe, DEFAULT_SAMPLES,
};
use crate::error::{Error, Result};
use crate::fock::{default_kpo_cutoff, embed, DensityOperator, Ket, StateRef, C64};
use crate::hamiltonians::{
    angular, cat_qubit_space, effective_ms_hamiltonian, Cutoffs, EffectiveForm, KpoSystem, NoiseRates,
    SystemParams, CAV, K1, K2,
};
use crate::pulses::Trajectory;

/// Extra levels used by the cutoff convergence re-check.
pub const RECHECK_EXTRA: usize = 4;
/// Largest fidelity change tolerated by the re-check.
pub const RECHECK_LIMIT: f64 = 1e-3;
/// Extended observation window of the population traces, in gate times.
pub const POPULATION_WINDOW: f64 = 2.5;
pub const TRAJECTORY_SAMPLES: usize = 513;

/// Truncation used for closed full-model runs: the 8 highest Kerr
/// eigenstates of each KPO (18 Fock levels at α = 2) and an 8-level cavity.
pub fn closed_cutoffs(alpha: f64) -> Cutoffs {
    Cutoffs { kpo: default_kpo_cutoff(alpha), cavity: 8, kerr_levels: Some(8) }
}

/// Truncation used for master-equation runs.
pub fn open_cutoffs(alpha: f64) -> Cutoffs {
    Cutoffs { kpo: default_kpo_cutoff(alpha), cavity: 6, kerr_levels: Some(4) }
}

/// `|⟨Ψ|ψ⟩|²` for kets, `⟨Ψ|ρ|Ψ⟩` for density operators.
pub fn fidelity<'a>(target: &Ket, state: impl Into<StateRef<'a>>) -> Result<f64> {
    match state.into() {
        StateRef::Ket(k) => Ok(target.inner(k)?.norm_sqr()),
        StateRef::Density(r) => r.overlap(target),
    }
}

/// Two-qubit cat label such as `C+C-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CatPair(pub Parity, pub Parity);

impl CatPair {
    pub const ALL: [CatPair; 4] = [
        CatPair(Parity::Even, Parity::Even),
        CatPair(Parity::Even, Parity::Odd),
        CatPair(Parity::Odd, Parity::Even),
        CatPair(Parity::Odd, Parity::Odd),
    ];

    pub fn flipped(self) -> CatPair {
        CatPair(self.0.flipped(), self.1.flipped())
    }

    pub fn label(self) -> String {
        format!("C{}C{}", self.0.symbol(), self.1.symbol())
    }
}

impl fmt::Display for CatPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Output of `exp(iπS_x²/2)` for a cat basis input, up to a global phase:
/// `(|ab⟩ + i|āb̄⟩)/√2`.
fn bell_pair(input: Ket, flipped: Ket) -> Result<Ket> {
    input.add(&flipped.scale(C64::new(0.0, 1.0)))?.normalized()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateModel {
    Full,
    Effective,
    Ideal,
}

impl GateModel {
    pub fn name(self) -> &'static str {
        match self {
            GateModel::Full => "full",
            GateModel::Effective => "effective",
            GateModel::Ideal => "ideal",
        }
    }
}

/// Full-model setup: operators, Hamiltonian and cat product states.
pub struct FullModel {
    pub params: SystemParams,
    pub sys: KpoSystem,
    pub hamiltonian: crate::hamiltonians::TimeDependentOperator,
}

impl FullModel {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let sys = KpoSystem::new(params)?;
        let hamiltonian = sys.hamiltonian(params)?;
        Ok(FullModel { params: params.clone(), sys, hamiltonian })
    }

    /// `|C_a C_b⟩|0⟩` from Fock-space cats.
    pub fn cat_pair(&self, pair: CatPair) -> Result<Ket> {
        self.sys.cat_product(&self.params, pair.0, pair.1)
    }

    /// Ideal gate output for `pair`, tensored with the cavity vacuum.
    pub fn target(&self, pair: CatPair) -> Result<Ket> {
        bell_pair(self.cat_pair(pair)?, self.cat_pair(pair.flipped())?)
    }

    pub fn noise(&self, rates: &NoiseRates) -> Result<NoiseSpec> {
        NoiseSpec::for_system(&self.sys, rates)
    }

    /// Closed evolution of `|input⟩` to `t_end`; fidelity against the gate output.
    pub fn gate_fidelity(&self, input: CatPair, t_end: f64, tol: f64) -> Result<(f64, EvolutionResult)> {
        let psi = self.cat_pair(input)?;
        let res = evolve_state(&self.hamiltonian, &psi, &[0.0, t_end], tol, &[])?;
        let f = res.final_state.overlap(&self.target(input)?)?;
        Ok((f, res))
    }

    /// Open evolution of `|C₊C₊0⟩` to `t_end` with `rates`.
    pub fn noisy_fidelity(&self, rates: &NoiseRates, t_end: f64, tol: f64) -> Result<(f64, EvolutionResult)> {
        let input = CatPair(Parity::Even, Parity::Even);
        let psi = self.cat_pair(input)?;
        let noise = self.noise(rates)?;
        let res = evolve_master(&self.hamiltonian, &noise, &psi.projector(), &[0.0, t_end], tol, &[])?;
        let f = res.final_state.overlap(&self.target(input)?)?;
        Ok((f, res))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub input: CatPair,
    pub model: GateModel,
    pub fidelity: f64,
}

/// Truth-table diagnostics: rows plus integrator statistics and hygiene of
/// the runs that produced them.
#[derive(Clone, Debug, Default)]
pub struct TruthTable {
    pub rows: Vec<TruthRow>,
    pub stats: IntegratorStats,
    pub hygiene: Hygiene,
}

/// Fidelity of each of the four cat-basis inputs against the MS gate output
/// at `gate_time`.
pub fn run_truth_table(params: &SystemParams, model: GateModel, tol: f64) -> Result<TruthTable> {
    params.validate()?;
    let mut out = TruthTable::default();
    match model {
        GateModel::Ideal => {
            let u = ms_gate_ideal();
            let space = u.space().clone();
            for pair in CatPair::ALL {
                let psi = Ket::basis(space.clone(), &[pair.0.index(), pair.1.index()])?;
                let flip = Ket::basis(space.clone(), &[pair.0.flipped().index(), pair.1.flipped().index()])?;
                let f = fidelity(&bell_pair(psi.clone(), flip)?, &psi.apply(&u)?)?;
                out.rows.push(TruthRow { input: pair, model, fidelity: f });
            }
        }
        GateModel::Effective => {
            let which = if params.n_tones() == 1 { MagnusModel::SingleTone } else { MagnusModel::Composite };
            let u = magnus_propagator(params, params.gate_time, which)?;
            let space = u.space().clone();
            for pair in CatPair::ALL {
                let psi = Ket::basis(space.clone(), &[pair.0.index(), pair.1.index(), 0])?;
                let flip = Ket::basis(space.clone(), &[pair.0.flipped().index(), pair.1.flipped().index(), 0])?;
                let f = fidelity(&bell_pair(psi.clone(), flip)?, &psi.apply(&u)?)?;
                out.rows.push(TruthRow { input: pair, model, fidelity: f });
            }
        }
        GateModel::Full => {
            let m = FullModel::new(params)?;
            for pair in CatPair::ALL {
                let (f, res) = m.gate_fidelity(pair, params.gate_time, tol)?;
                out.stats.merge(&res.stats);
                out.hygiene.merge(&res.hygiene);
                out.rows.push(TruthRow { input: pair, model, fidelity: f });
            }
        }
    }
    Ok(out)
}

/// Time series of cat-pair populations for the full model started in `initial`,
/// over `[0, window · gate_time]`.
pub fn population_trace(
    params: &SystemParams,
    initial: CatPair,
    labels: &[CatPair],
    window: f64,
    samples: usize,
    tol: f64,
) -> Result<EvolutionResult> {
    let m = FullModel::new(params)?;
    let probes = labels
        .iter()
        .map(|&l| Ok(Probe::population(l.label(), m.cat_pair(l)?)))
        .collect::<Result<Vec<_>>>()?;
    let times = uniform_grid(window * params.gate_time, samples);
    evolve_state(&m.hamiltonian, &m.cat_pair(initial)?, &times, tol, &probes)
}

/// The default two-label trace: `|C₊C₊0⟩` and `|C₋C₋0⟩` from `|C₊C₊0⟩`.
pub fn default_population_trace(params: &SystemParams, tol: f64) -> Result<EvolutionResult> {
    let pp = CatPair(Parity::Even, Parity::Even);
    population_trace(params, pp, &[pp, pp.flipped()], POPULATION_WINDOW, DEFAULT_SAMPLES, tol)
}

/// Longest contiguous stretch of time during which every listed record lies
/// in `[lo, hi]`. Entry and exit times are linearly interpolated between samples.
pub fn dwell_window(res: &EvolutionResult, labels: &[&str], lo: f64, hi: f64) -> Result<f64> {
    let recs = labels
        .iter()
        .map(|l| res.record(l).ok_or_else(|| Error::param("labels", format!("no record `{l}`"))))
        .collect::<Result<Vec<_>>>()?;
    let t = &res.times;
    let inside = |v: f64| (lo..=hi).contains(&v);
    let all_inside = |k: usize| recs.iter().all(|r| inside(r[k]));
    // time at which the segment k → k+1 of `r` crosses the band edge
    let crossing = |r: &[f64], k: usize| {
        let (a, b) = (r[k], r[k + 1]);
        let edge = if inside(a) {
            if b > hi { hi } else { lo }
        } else if a > hi {
            hi
        } else {
            lo
        };
        let x = if b == a { 0.5 } else { ((edge - a) / (b - a)).clamp(0.0, 1.0) };
        t[k] + x * (t[k + 1] - t[k])
    };
    let mut best = 0.0f64;
    let mut k = 0;
    while k < t.len() {
        if !all_inside(k) {
            k += 1;
            continue;
        }
        let s = k;
        while k + 1 < t.len() && all_inside(k + 1) {
            k += 1;
        }
        let enter = if s == 0 {
            t[0]
        } else {
            recs.iter().filter(|r| !inside(r[s - 1])).map(|r| crossing(r, s - 1)).fold(t[s - 1], f64::max)
        };
        let leave = if k + 1 == t.len() {
            t[k]
        } else {
            recs.iter().filter(|r| !inside(r[k + 1])).map(|r| crossing(r, k)).fold(t[k + 1], f64::min)
        };
        best = best.max(leave - enter);
        k += 1;
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Timing,
    Detuning,
    Coupling,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Timing => "timing",
            ErrorKind::Detuning => "detuning",
            ErrorKind::Coupling => "coupling",
        }
    }
}

impl FromStr for ErrorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "timing" => Ok(ErrorKind::Timing),
            "detuning" => Ok(ErrorKind::Detuning),
            "coupling" => Ok(ErrorKind::Coupling),
            _ => Err(Error::param("kind", format!("unknown error kind `{s}`"))),
        }
    }
}

/// Relative parameter error `x' = (1 + δ)x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpec {
    pub kind: ErrorKind,
    pub relative: f64,
}

impl ErrorSpec {
    /// Perturbed parameters and the final evolution time. Timing errors only
    /// move the stopping time; detuning errors move Δ with the drive tones
    /// left at their nominal frequencies; coupling errors rescale J.
    pub fn apply(&self, params: &SystemParams) -> (SystemParams, f64) {
        let mut p = params.clone();
        let scale = 1.0 + self.relative;
        let mut t_end = params.gate_time;
        match self.kind {
            ErrorKind::Timing => t_end *= scale,
            ErrorKind::Detuning => p.delta *= scale,
            ErrorKind::Coupling => p.coupling *= scale,
        }
        (p, t_end)
    }
}

/// Map from a rate given in MHz to rad/μs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnits {
    /// `κ = 2π · f`.
    Angular,
    /// `κ = f`, i.e. the figure axis already is the decay rate in 1/μs.
    Plain,
}

impl RateUnits {
    pub fn to_rate(self, mhz: f64) -> f64 {
        match self {
            RateUnits::Angular => angular(mhz),
            RateUnits::Plain => mhz,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RateUnits::Angular => "angular",
            RateUnits::Plain => "plain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoherenceMode {
    KappaOnly,
    GammaOnly,
    Equal,
}

impl DecoherenceMode {
    /// `(κ, γ)` in MHz for a grid value.
    pub fn rates(self, g: f64) -> (f64, f64) {
        match self {
            DecoherenceMode::KappaOnly => (g, 0.0),
            DecoherenceMode::GammaOnly => (0.0, g),
            DecoherenceMode::Equal => (g, g),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SweepPoint {
    Error { kind: ErrorKind, delta: f64 },
    Rates { kappa_mhz: f64, gamma_mhz: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub point: SweepPoint,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub params_fingerprint: String,
    pub stats: IntegratorStats,
    pub hygiene: Hygiene,
}

impl SweepResult {
    /// Fidelities of tone count `n` in row order.
    pub fn fidelities(&self, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n).map(|r| r.fidelity).collect()
    }
}

/// SHA-256 of the JSON form of the parameters.
pub fn fingerprint(params: &SystemParams) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialize");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

fn key(p: &SweepPoint) -> (u8, f64, f64) {
    match *p {
        SweepPoint::Error { kind, delta } => (kind as u8, delta, 0.0),
        SweepPoint::Rates { kappa_mhz, gamma_mhz } => (9, kappa_mhz, gamma_mhz),
    }
}

fn collect(params: &SystemParams, out: Vec<(SweepRow, IntegratorStats, Hygiene)>) -> SweepResult {
    let mut stats = IntegratorStats::default();
    let mut hygiene = Hygiene::default();
    let mut rows = Vec::with_capacity(out.len());
    for (row, s, h) in out {
        stats.merge(&s);
        hygiene.merge(&h);
        rows.push(row);
    }
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(key(&a.point).partial_cmp(&key(&b.point)).unwrap()));
    SweepResult { rows, params_fingerprint: fingerprint(params), stats, hygiene }
}

/// Full-model fidelity of `|C₊C₊0⟩ → (|C₊C₊⟩ + i|C₋C₋⟩)|0⟩/√2` under each
/// relative error in `grid` for every tone count in `n_list`. Points run on
/// the current rayon pool.
pub fn sweep_error(params: &SystemParams, kind: ErrorKind, grid: &[f64], n_list: &[usize], tol: f64) -> Result<SweepResult> {
    params.validate()?;
    let jobs: Vec<(usize, f64)> = n_list.iter().flat_map(|&n| grid.iter().map(move |&d| (n, d))).collect();
    let out = jobs
        .par_iter()
        .map(|&(n, delta)| {
            let row = |e: Error| e.at_row(format!("N={n} {}={delta}", kind.name()));
            let base = params.clone().with_tones(n).map_err(row)?;
            let (p, t_end) = ErrorSpec { kind, relative: delta }.apply(&base);
            let m = FullModel::new(&p).map_err(row)?;
            let (f, res) = m.gate_fidelity(CatPair(Parity::Even, Parity::Even), t_end, tol).map_err(row)?;
            log::debug!("{} N={n} δ={delta:+.4}: F = {f:.6}", kind.name());
            Ok((SweepRow { n, point: SweepPoint::Error { kind, delta }, fidelity: f }, res.stats, res.hygiene))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(params, out))
}

/// Master-equation fidelity at `gate_time` on a grid of rates given in MHz.
pub fn sweep_decoherence(
    params: &SystemParams,
    grid_mhz: &[f64],
    n_list: &[usize],
    mode: DecoherenceMode,
    units: RateUnits,
    tol: f64,
) -> Result<SweepResult> {
    params.validate()?;
    let jobs: Vec<(usize, f64)> = n_list.iter().flat_map(|&n| grid_mhz.iter().map(move |&g| (n, g))).collect();
    let out = jobs
        .par_iter()
        .map(|&(n, g)| {
            let (k, gm) = mode.rates(g);
            let row = |e: Error| e.at_row(format!("N={n} kappa={k} gamma={gm} MHz"));
            let p = params.clone().with_tones(n).map_err(row)?;
            let rates = NoiseRates::uniform(units.to_rate(k), units.to_rate(gm));
            let m = FullModel::new(&p).map_err(row)?;
            let (f, res) = m.noisy_fidelity(&rates, p.gate_time, tol).map_err(row)?;
            log::debug!("N={n} κ={k} γ={gm} MHz ({}): F = {f:.6}", units.name());
            Ok((SweepRow { n, point: SweepPoint::Rates { kappa_mhz: k, gamma_mhz: gm }, fidelity: f }, res.stats, res.hygiene))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(params, out))
}

/// Fidelity traces of the cat-level model with the effective loss jump and
/// of the full model with `D[a_k]`, both with cavity loss at the same rate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseComparison {
    pub times: Vec<f64>,
    pub cat_level: Vec<f64>,
    pub full: Vec<f64>,
    pub max_deviation: f64,
    pub hygiene: Hygiene,
}

/// Runs both models from `|C₊C₊0⟩` over `[0, gate_time]` with loss rate
/// `kappa` (rad/μs) and compares the fidelity to the gate output.
pub fn effective_noise_compare(params: &SystemParams, kappa: f64, samples: usize, tol: f64) -> Result<NoiseComparison> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::param("kappa", "must be non-negative"));
    }
    let times = uniform_grid(params.gate_time, samples);
    let pp = CatPair(Parity::Even, Parity::Even);

    let heff = effective_ms_hamiltonian(params, EffectiveForm::Ladder)?;
    let space = cat_qubit_space(params.cutoffs.cavity)?;
    let mut noise = NoiseSpec::new();
    let jump = effective_loss_jump(params.alpha)?;
    noise.push("L1", embed(&jump, K1, &space)?, kappa)?;
    noise.push("L2", embed(&jump, K2, &space)?, kappa)?;
    let a0 = embed(&crate::fock::annihilation(params.cutoffs.cavity)?, CAV, &space)?;
    noise.push("a0", a0, kappa)?;
    let psi = Ket::basis(space.clone(), &[0, 0, 0])?;
    let target = bell_pair(psi.clone(), Ket::basis(space.clone(), &[1, 1, 0])?)?;
    let cat = evolve_master(&heff, &noise, &psi.projector(), &times, tol, &[Probe::population("F", target)])?;

    let m = FullModel::new(params)?;
    let rates = NoiseRates { kappa, kappa0: kappa, gamma: 0.0, gamma0: 0.0 };
    let full = evolve_master(
        &m.hamiltonian,
        &m.noise(&rates)?,
        &DensityOperator::mixture(&[(1.0, &m.cat_pair(pp)?)])?,
        &times,
        tol,
        &[Probe::population("F", m.target(pp)?)],
    )?;
    let a = cat.record("F").unwrap().to_vec();
    let b = full.record("F").unwrap().to_vec();
    let max_deviation = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut hygiene = cat.hygiene;
    hygiene.merge(&full.hygiene);
    Ok(NoiseComparison { times, cat_level: a, full: b, max_deviation, hygiene })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub delta_t: f64,
    pub t_over_tau: f64,
    pub f: f64,
    pub g: f64,
    /// Distance of `(F, G)` from the origin.
    pub closure_error: f64,
}

/// `(F, G)` over `t ∈ [0, (1 + δ_t)τ]` at `samples` points per curve.
pub fn trajectory_dataset(params: &SystemParams, n_list: &[usize], timing_errors: &[f64], samples: usize) -> Result<Vec<TrajectoryRow>> {
    if samples < 2 {
        return Err(Error::param("samples", "need at least two samples per curve"));
    }
    let mut rows = Vec::with_capacity(n_list.len() * timing_errors.len() * samples);
    for &n in n_list {
        let p = params.clone().with_tones(n)?;
        let tr = Trajectory::new(p.coupling, p.alpha, p.zeta, &p.weights)?;
        for &dt in timing_errors {
            let end = 1.0 + dt;
            for k in 0..samples {
                let x = end * k as f64 / (samples - 1) as f64;
                let t = x * tr.tau();
                let (f, g) = (tr.big_f(t), tr.big_g(t));
                rows.push(TrajectoryRow { n, delta_t: dt, t_over_tau: x, f, g, closure_error: f.hypot(g) });
            }
        }
    }
    Ok(rows)
}

/// `grid(lo, hi, k)`: k evenly spaced values including both ends.
pub fn linear_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect(),
    }
}
