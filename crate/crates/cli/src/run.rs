use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use katsim_core::dynamics::{Hygiene, IntegratorStats};
use katsim_core::experiments::{self as ex, CatPair, SweepResult};
use katsim_core::hamiltonians::SystemParams;
use katsim_core::pulses::Trajectory;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Scenario, ScenarioConfig};
use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
}

/// Worker count: flag, then config, then `KATSIM_THREADS`, then 1.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag.or(config) {
        return if w == 0 { Err(CliError::Parse("workers must be positive".into())) } else { Ok(w) };
    }
    match std::env::var("KATSIM_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| CliError::Parse(format!("KATSIM_THREADS=`{s}` is not a positive integer"))),
        Err(_) => Ok(1),
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Outcome {
    rows: usize,
    stats: IntegratorStats,
    hygiene: Hygiene,
    fingerprint: String,
    extra: serde_json::Map<String, serde_json::Value>,
}

impl Outcome {
    fn absorb(&mut self, stats: &IntegratorStats, hygiene: &Hygiene) {
        self.stats.merge(stats);
        self.hygiene.merge(hygiene);
    }

    fn sweep(&mut self, s: &SweepResult) {
        self.rows = s.rows.len();
        self.absorb(&s.stats, &s.hygiene);
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn tones(p: &SystemParams, n: usize) -> Result<SystemParams, CliError> {
    p.clone().with_tones(n).map_err(CliError::Invalid)
}

/// Runs one scenario and writes its CSV and manifest into the output directory.
pub fn run(config: &ScenarioConfig, ov: &Overrides) -> Result<RunReport, CliError> {
    let mut cfg = config.clone();
    if let Some(t) = ov.tol {
        cfg.tol = Some(t);
    }
    let mut cfg = cfg.resolved();
    let params = cfg.system_params()?;
    let workers = resolve_workers(ov.workers, cfg.workers)?;
    cfg.workers = Some(workers);
    let out_dir = ov.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let warnings = warnings(&cfg, &params);
    for w in &warnings {
        log::warn!("{w}");
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("worker pool: {e}")))?;
    let csv_path = out_dir.join(cfg.scenario.csv_name());
    let started = Instant::now();
    let outcome = pool.install(|| execute(&cfg, &params, &csv_path))?;
    let wall = started.elapsed().as_secs_f64();

    let violations = outcome.hygiene.violations(cfg.tol.unwrap());
    for v in &violations {
        log::warn!("hygiene: {v}");
    }
    let mut run_info = json!({
        "code_version": env!("CARGO_PKG_VERSION"),
        "system_params": params,
        "params_fingerprint": outcome.fingerprint,
        "workers": workers,
        "wall_time_s": wall,
        "rows": outcome.rows,
        "csv": cfg.scenario.csv_name(),
        "integrator": outcome.stats,
        "hygiene": outcome.hygiene,
        "hygiene_violations": violations,
        "warnings": warnings,
    });
    if let Some(units) = cfg.rate_units {
        run_info["rate_units"] = json!(units);
    }
    for (k, v) in outcome.extra {
        run_info[k] = v;
    }
    let mut manifest = cfg.clone();
    manifest.output_dir = Some(out_dir.clone());
    manifest.run_info = Some(run_info);
    let manifest_path = out_dir.join(MANIFEST_NAME);
    let mut w = create(&manifest_path)?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Io(e.to_string()))?;
    log::info!("{} rows in {wall:.2} s -> {}", outcome.rows, csv_path.display());
    Ok(RunReport { csv: csv_path, manifest: manifest_path, rows: outcome.rows, warnings })
}

fn execute(cfg: &ScenarioConfig, params: &SystemParams, csv_path: &Path) -> Result<Outcome, CliError> {
    let tol = cfg.tol.unwrap();
    let ns = cfg.n_list.clone().unwrap();
    let mut o = Outcome { fingerprint: ex::fingerprint(params), ..Default::default() };
    let num = CliError::Numerical;
    match cfg.scenario {
        Scenario::TruthTable => {
            let mut rows = Vec::new();
            for &m in cfg.models.as_ref().unwrap() {
                let t = ex::run_truth_table(params, m, tol).map_err(num)?;
                o.absorb(&t.stats, &t.hygiene);
                rows.extend(t.rows);
            }
            o.rows = rows.len();
            ex::write_truth_table_csv(&rows, create(csv_path)?).map_err(num)?;
        }
        Scenario::Populations => {
            let pp = CatPair::ALL[0];
            let (window, samples) = (cfg.window.unwrap(), cfg.samples.unwrap());
            let traces = ns
                .par_iter()
                .map(|&n| {
                    let p = tones(params, n)?;
                    ex::population_trace(&p, pp, &[pp, pp.flipped()], window, samples, tol)
                        .map_err(|e| CliError::Numerical(e.at_row(format!("N={n}"))))
                })
                .collect::<Result<Vec<_>, _>>()?;
            for t in &traces {
                o.absorb(&t.stats, &t.hygiene);
                o.rows += t.times.len() * t.records.len();
            }
            let pairs: Vec<_> = ns.iter().copied().zip(traces.iter()).collect();
            ex::write_populations_csv(&pairs, create(csv_path)?).map_err(num)?;
        }
        Scenario::Trajectory => {
            let rows = ex::trajectory_dataset(params, &ns, cfg.timing_errors.as_ref().unwrap(), cfg.samples.unwrap())
                .map_err(num)?;
            o.rows = rows.len();
            ex::write_trajectory_csv(&rows, create(csv_path)?).map_err(num)?;
        }
        Scenario::SweepTiming | Scenario::SweepDetuning | Scenario::SweepCoupling => {
            let kind = cfg.scenario.error_kind().unwrap();
            let s = ex::sweep_error(params, kind, &cfg.grid.unwrap().values(), &ns, tol).map_err(num)?;
            o.sweep(&s);
            ex::write_sweep_csv(&s, create(csv_path)?).map_err(num)?;
        }
        Scenario::SweepKappa | Scenario::SweepGamma | Scenario::SweepEqual => {
            let mode = cfg.scenario.decoherence_mode().unwrap();
            let units = cfg.rate_units.unwrap();
            let s = ex::sweep_decoherence(params, &cfg.grid.unwrap().values(), &ns, mode, units, tol).map_err(num)?;
            o.sweep(&s);
            ex::write_decoherence_csv(&s, create(csv_path)?).map_err(num)?;
        }
        Scenario::EffectiveCompare => {
            let kappa = cfg.rate_units.unwrap().to_rate(cfg.kappa_mhz.unwrap());
            let c = ex::effective_noise_compare(params, kappa, cfg.samples.unwrap(), tol).map_err(num)?;
            o.rows = c.times.len();
            o.hygiene.merge(&c.hygiene);
            o.extra.insert("max_deviation".into(), json!(c.max_deviation));
            write_comparison(&c, csv_path)?;
        }
    }
    Ok(o)
}

/// `t_ns,cat_level,full`
fn write_comparison(c: &ex::NoiseComparison, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(w, "t_ns,cat_level,full").map_err(io)?;
    for ((t, a), b) in c.times.iter().zip(&c.cat_level).zip(&c.full) {
        writeln!(w, "{:e},{a:e},{b:e}", t * 1e3).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Largest cavity displacement `max |F + iG|/√2` reached by the drive.
pub fn peak_displacement(params: &SystemParams) -> f64 {
    let Ok(tr) = Trajectory::new(params.coupling, params.alpha, params.zeta, &params.weights) else {
        return f64::NAN;
    };
    (0..=2048).map(|k| tr.closure_error(tr.tau() * k as f64 / 2048.0)).fold(0.0, f64::max) / 2f64.sqrt()
}

/// Smallest cutoff whose Poisson tail for mean `n̄` stays below `limit`.
pub fn levels_for(mean: f64, limit: f64) -> usize {
    let mut term = (-mean).exp();
    let mut cum = term;
    let mut n = 1;
    while 1.0 - cum > limit && n < 1000 {
        term *= mean / n as f64;
        cum += term;
        n += 1;
    }
    n
}

/// Cutoff adequacy heuristics; warnings do not stop a run.
pub fn warnings(cfg: &ScenarioConfig, params: &SystemParams) -> Vec<String> {
    let mut out = Vec::new();
    let ns = cfg.n_list.clone().unwrap_or_else(|| vec![1]);
    let amp = ns
        .iter()
        .filter_map(|&n| params.clone().with_tones(n).ok())
        .map(|p| peak_displacement(&p))
        .fold(0.0, f64::max);
    let need = levels_for(amp * amp, 1e-3).max(6);
    if params.cutoffs.cavity < need {
        out.push(format!(
            "cavity cutoff {} is too small: displacement amplitude {amp:.3} needs >= {need} levels",
            params.cutoffs.cavity
        ));
    }
    let kpo_need = levels_for(params.alpha * params.alpha, 1e-6);
    if params.cutoffs.kpo < kpo_need {
        out.push(format!(
            "KPO Fock cutoff {} truncates the cats (alpha = {}): use >= {kpo_need} levels",
            params.cutoffs.kpo, params.alpha
        ));
    }
    out
}

fn freq_line(name: &str, rate: f64) -> String {
    let f = rate / (2.0 * PI);
    format!("{name:<10} 2π·{f:.6} MHz = {:.6e} rad/s ({rate:.6} rad/μs)", rate * 1e6)
}

/// Resolved physical values and warnings, without running anything.
pub fn validate(config: &ScenarioConfig) -> Result<Vec<String>, CliError> {
    let cfg = config.resolved();
    let p = cfg.system_params()?;
    let mut lines = vec![format!("scenario   {}", serde_json::to_value(cfg.scenario).unwrap().as_str().unwrap())];
    lines.push(format!("alpha      {}", p.alpha));
    lines.push(freq_line("kerr", p.kerr));
    lines.push(freq_line("omega_p", p.omega_p));
    lines.push(freq_line("coupling", p.coupling));
    lines.push(freq_line("delta", p.delta));
    lines.push(freq_line("zeta", p.zeta));
    lines.push(format!("gate_time  {:.6} μs = {:.6e} s", p.gate_time, p.gate_time * 1e-6));
    let c = p.cutoffs;
    let levels = c.kerr_levels.map(|m| format!(", {m} Kerr levels")).unwrap_or_default();
    lines.push(format!("cutoffs    kpo {}{levels}, cavity {}", c.kpo, c.cavity));
    lines.push(format!("N_list     {:?}", cfg.n_list.as_ref().unwrap()));
    for w in warnings(&cfg, &p) {
        lines.push(format!("warning: {w}"));
    }
    lines.push("valid".into());
    Ok(lines)
}
