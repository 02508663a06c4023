//! Time evolution: Schrödinger and Lindblad integration on top of an adaptive
//! Runge–Kutta scheme, and closed-form Magnus propagators of the effective
//! MS Hamiltonians.

mod dopri;
mod magnus;

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use dopri::{IntegratorOptions, IntegratorStats};
pub use magnus::{composite_phases, magnus_propagator, ms_gate_ideal, MagnusCoefficients, MagnusModel};

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, HilbertSpace, Ket, Operator, C64};
use crate::hamiltonians::{AssembledOperator, Coefficient, KpoSystem, NoiseRates, TimeDependentOperator};

/// Default number of recorded samples per run.
pub const DEFAULT_SAMPLES: usize = 400;
/// Norm or trace drift allowed per unit tolerance.
pub const DRIFT_PER_TOL: f64 = 10.0;
pub const TRACE_LIMIT: f64 = 1e-8;
pub const HERMITICITY_LIMIT: f64 = 1e-8;
pub const POSITIVITY_LIMIT: f64 = -1e-6;

/// `samples` uniformly spaced times covering `[0, t_end]`.
pub fn uniform_grid(t_end: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![t_end],
        _ => (0..samples).map(|k| t_end * k as f64 / (samples - 1) as f64).collect(),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::param("tol", format!("must lie in [1e-12, 1e-6], got {tol:e}")));
    }
    Ok(())
}

/// A named quantity sampled along a trajectory.
#[derive(Clone, Debug)]
pub enum Probe {
    /// `|⟨φ|ψ⟩|²` or `⟨φ|ρ|φ⟩`.
    Population(String, Ket),
    /// Real part of `⟨O⟩`.
    Expectation(String, Operator),
}

impl Probe {
    pub fn population(label: impl Into<String>, target: Ket) -> Self {
        Probe::Population(label.into(), target)
    }

    pub fn expectation(label: impl Into<String>, op: Operator) -> Self {
        Probe::Expectation(label.into(), op)
    }

    pub fn label(&self) -> &str {
        match self {
            Probe::Population(l, _) | Probe::Expectation(l, _) => l,
        }
    }

    fn space(&self) -> &Arc<HilbertSpace> {
        match self {
            Probe::Population(_, k) => k.space(),
            Probe::Expectation(_, o) => o.space(),
        }
    }

    fn on_ket(&self, psi: &[C64]) -> f64 {
        match self {
            Probe::Population(_, k) => k.as_slice().iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr(),
            Probe::Expectation(_, o) => {
                let v = o.apply(psi);
                psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>().re
            }
        }
    }

    fn on_density(&self, rho: &[C64], n: usize) -> f64 {
        match self {
            Probe::Population(_, k) => {
                let phi = k.as_slice();
                let mut acc = C64::default();
                for i in 0..n {
                    if phi[i] == C64::default() {
                        continue;
                    }
                    let row = &rho[i * n..(i + 1) * n];
                    let r: C64 = row.iter().zip(phi).map(|(a, b)| a * b).sum();
                    acc += phi[i].conj() * r;
                }
                acc.re
            }
            Probe::Expectation(_, o) => {
                // Tr(Oρ) = Σ O_ij ρ_ji
                let s = o.to_sparse();
                s.iter().map(|(i, j, v)| v * rho[j * n + i]).sum::<C64>().re
            }
        }
    }
}

fn check_probes(probes: &[Probe], space: &Arc<HilbertSpace>) -> Result<()> {
    for p in probes {
        if **p.space() != **space {
            return Err(Error::SpaceMismatch(format!("probe `{}`: {} vs {}", p.label(), p.space(), space)));
        }
    }
    Ok(())
}

/// Invariant diagnostics collected during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Hygiene {
    /// Largest `|‖ψ(t)‖ − ‖ψ(0)‖|` (closed runs).
    pub norm_drift: Option<f64>,
    /// Largest `|Tr ρ(t) − Tr ρ(0)|` (open runs).
    pub trace_drift: Option<f64>,
    /// Largest `max|ρ − ρ†|` (open runs).
    pub hermiticity: Option<f64>,
    /// Smallest eigenvalue of ρ over the checked samples (open runs).
    pub min_eigenvalue: Option<f64>,
}

impl Hygiene {
    /// Violated invariants, formatted for reporting; empty when clean.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(d) = self.norm_drift {
            if d > DRIFT_PER_TOL * tol {
                out.push(format!("norm drift {d:.3e} > {:.1e}", DRIFT_PER_TOL * tol));
            }
        }
        if let Some(d) = self.trace_drift {
            if d > TRACE_LIMIT {
                out.push(format!("trace drift {d:.3e} > {TRACE_LIMIT:.0e}"));
            }
        }
        if let Some(d) = self.hermiticity {
            if d > HERMITICITY_LIMIT {
                out.push(format!("hermiticity {d:.3e} > {HERMITICITY_LIMIT:.0e}"));
            }
        }
        if let Some(e) = self.min_eigenvalue {
            if e < POSITIVITY_LIMIT {
                out.push(format!("min eigenvalue {e:.3e} < {POSITIVITY_LIMIT:.0e}"));
            }
        }
        out
    }

    pub fn merge(&mut self, other: &Hygiene) {
        fn mx(a: Option<f64>, b: Option<f64>) -> Option<f64> {
            match (a, b) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            }
        }
        self.norm_drift = mx(self.norm_drift, other.norm_drift);
        self.trace_drift = mx(self.trace_drift, other.trace_drift);
        self.hermiticity = mx(self.hermiticity, other.hermiticity);
        self.min_eigenvalue = match (self.min_eigenvalue, other.min_eigenvalue) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
    }
}

#[derive(Clone, Debug)]
pub enum FinalState {
    Ket(Ket),
    Density(DensityOperator),
}

impl FinalState {
    /// `|⟨Ψ|ψ⟩|²` or `⟨Ψ|ρ|Ψ⟩`.
    pub fn overlap(&self, target: &Ket) -> Result<f64> {
        match self {
            FinalState::Ket(k) => Ok(target.inner(k)?.norm_sqr()),
            FinalState::Density(r) => r.overlap(target),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Observable name and its value at each sample time.
    pub records: Vec<(String, Vec<f64>)>,
    pub final_state: FinalState,
    pub stats: IntegratorStats,
    pub hygiene: Hygiene,
}

impl EvolutionResult {
    pub fn record(&self, label: &str) -> Option<&[f64]> {
        self.records.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    /// CSV with a `t` column followed by one column per record.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["t".to_string()];
        header.extend(self.records.iter().map(|(l, _)| l.clone()));
        w.write_record(&header).map_err(io)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:e}")];
            row.extend(self.records.iter().map(|(_, v)| format!("{:e}", v[k])));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn violations(&self) -> Vec<String> {
        self.hygiene.violations(self.stats.tol)
    }
}

/// Closed evolution `i dψ/dt = H(t) ψ`, sampled at `times` (the first entry is
/// the initial time).
pub fn evolve_state(
    h: &TimeDependentOperator,
    psi0: &Ket,
    times: &[f64],
    tol: f64,
    probes: &[Probe],
) -> Result<EvolutionResult> {
    evolve_state_with(h, psi0, times, &IntegratorOptions::with_tol(tol), probes)
}

pub fn evolve_state_with(
    h: &TimeDependentOperator,
    psi0: &Ket,
    times: &[f64],
    opts: &IntegratorOptions,
    probes: &[Probe],
) -> Result<EvolutionResult> {
    check_tol(opts.tol)?;
    if **h.space() != **psi0.space() {
        return Err(Error::SpaceMismatch(format!("{} vs {}", h.space(), psi0.space())));
    }
    check_probes(probes, psi0.space())?;
    let mut asm = h.assemble();
    // Measuring energies from ⟨H⟩ of the initial state keeps the populated
    // amplitudes slowly varying; the phase e^{-ict} is restored on output.
    let shift = initial_energy(&mut asm, psi0.as_slice(), times.first().copied().unwrap_or(0.0));
    asm.shift_diagonal(C64::new(-shift, 0.0));
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        asm.update(t);
        asm.matrix().matvec(y, dy);
        for v in dy.iter_mut() {
            *v *= minus_i;
        }
    };
    let norm0 = psi0.norm();
    let mut records: Vec<Vec<f64>> = vec![vec![0.0; times.len()]; probes.len()];
    let mut drift = 0.0f64;
    let observe = |k: usize, _t: f64, y: &[C64]| {
        let nrm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        drift = drift.max((nrm - norm0).abs());
        for (p, rec) in probes.iter().zip(records.iter_mut()) {
            rec[k] = p.on_ket(y);
        }
        Ok(())
    };
    let (y, stats) = dopri::integrate(rhs, psi0.as_slice().to_vec(), times, opts, observe)?;
    let t_end = times.last().copied().unwrap_or(0.0);
    let phase = C64::new(0.0, -shift * t_end).exp();
    let psi = Ket::new(psi0.space().clone(), DVector::from_vec(y) * phase)?;
    log::debug!("closed run: {} steps, {} rejected, norm drift {drift:.2e}", stats.steps, stats.rejected);
    Ok(EvolutionResult {
        times: times.to_vec(),
        records: probes.iter().map(|p| p.label().to_string()).zip(records).collect(),
        final_state: FinalState::Ket(psi),
        stats,
        hygiene: Hygiene { norm_drift: Some(drift), ..Default::default() },
    })
}

fn initial_energy(asm: &mut AssembledOperator, psi: &[C64], t0: f64) -> f64 {
    asm.update(t0);
    let mut hv = vec![C64::default(); psi.len()];
    asm.matrix().matvec(psi, &mut hv);
    let nrm: f64 = psi.iter().map(|v| v.norm_sqr()).sum();
    if nrm == 0.0 {
        return 0.0;
    }
    psi.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<C64>().re / nrm
}

/// One Lindblad channel `rate · D[op]`.
#[derive(Clone, Debug)]
pub struct Jump {
    pub label: String,
    pub op: Operator,
    pub rate: f64,
}

/// Jump operators with rates; `D[o]ρ = oρo† − ½{o†o, ρ}`.
#[derive(Clone, Debug, Default)]
pub struct NoiseSpec {
    jumps: Vec<Jump>,
}

impl NoiseSpec {
    pub fn new() -> Self {
        NoiseSpec::default()
    }

    pub fn push(&mut self, label: impl Into<String>, op: Operator, rate: f64) -> Result<()> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::param("rate", format!("jump rates must be non-negative, got {rate}")));
        }
        if let Some(first) = self.jumps.first() {
            if **first.op.space() != **op.space() {
                return Err(Error::SpaceMismatch(format!("{} vs {}", first.op.space(), op.space())));
            }
        }
        self.jumps.push(Jump { label: label.into(), op, rate });
        Ok(())
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn is_zero(&self) -> bool {
        self.jumps.iter().all(|j| j.rate == 0.0)
    }

    /// `(a_k, κ)`, `(a_k†a_k, γ)` for both KPOs and `(a₀, κ₀)`, `(a₀†a₀, γ₀)`.
    pub fn for_system(sys: &KpoSystem, rates: &NoiseRates) -> Result<Self> {
        let mut s = NoiseSpec::new();
        for (k, a) in sys.a.iter().enumerate() {
            s.push(format!("a{}", k + 1), a.clone(), rates.kappa)?;
            s.push(format!("n{}", k + 1), a.adjoint().matmul(a)?, rates.gamma)?;
        }
        s.push("a0", sys.a0.clone(), rates.kappa0)?;
        s.push("n0", sys.a0.adjoint().matmul(&sys.a0)?, rates.gamma0)?;
        Ok(s)
    }
}

/// Number of evenly spread samples at which positivity of ρ is checked.
pub const POSITIVITY_SAMPLES: usize = 5;

/// Open evolution `dρ/dt = −i[H, ρ] + Σ rate D[o]ρ`, acting with sparse
/// operators on the row-major density matrix.
pub fn evolve_master(
    h: &TimeDependentOperator,
    noise: &NoiseSpec,
    rho0: &DensityOperator,
    times: &[f64],
    tol: f64,
    probes: &[Probe],
) -> Result<EvolutionResult> {
    evolve_master_with(h, noise, rho0, times, &IntegratorOptions::with_tol(tol), probes)
}

pub fn evolve_master_with(
    h: &TimeDependentOperator,
    noise: &NoiseSpec,
    rho0: &DensityOperator,
    times: &[f64],
    opts: &IntegratorOptions,
    probes: &[Probe],
) -> Result<EvolutionResult> {
    check_tol(opts.tol)?;
    let space = rho0.space().clone();
    if **h.space() != *space {
        return Err(Error::SpaceMismatch(format!("{} vs {}", h.space(), space)));
    }
    check_probes(probes, &space)?;
    let n = space.total_dim();
    let mut heff = h.clone();
    let mut jumps = Vec::new();
    for j in noise.jumps() {
        if **j.op.space() != *space {
            return Err(Error::SpaceMismatch(format!("jump `{}`: {} vs {}", j.label, j.op.space(), space)));
        }
        if j.rate == 0.0 {
            continue;
        }
        let ldl = j.op.adjoint().matmul(&j.op)?;
        heff.push(ldl, Coefficient::Constant(C64::new(0.0, -0.5 * j.rate)))?;
        jumps.push(j.op.to_sparse().scale(C64::new(j.rate.sqrt(), 0.0)));
    }
    let mut asm = heff.assemble();
    let mut b = vec![C64::default(); n * n];
    let mut l_rho = vec![C64::default(); n * n];
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, rho: &[C64], out: &mut [C64]| {
        asm.update(t);
        // B = −i H_eff ρ; dρ/dt = B + B† + Σ L ρ L†
        asm.matrix().mul_dense_rowmajor(rho, n, &mut b);
        for v in b.iter_mut() {
            *v *= minus_i;
        }
        add_hermitian_part(&b, n, out);
        for l in &jumps {
            l.mul_dense_rowmajor(rho, n, &mut l_rho);
            l.add_dense_times_adjoint(&l_rho, n, out);
        }
    };

    let tr0 = rho0.trace().re;
    let mut records: Vec<Vec<f64>> = vec![vec![0.0; times.len()]; probes.len()];
    let mut hyg = Hygiene { trace_drift: Some(0.0), hermiticity: Some(0.0), ..Default::default() };
    let eig_every = (times.len() / POSITIVITY_SAMPLES).max(1);
    let last = times.len().saturating_sub(1);
    let observe = |k: usize, _t: f64, rho: &[C64]| {
        let tr: f64 = (0..n).map(|i| rho[i * n + i].re).sum();
        hyg.trace_drift = Some(hyg.trace_drift.unwrap().max((tr - tr0).abs()));
        let mut herm = 0.0f64;
        for i in 0..n {
            for j in i..n {
                herm = herm.max((rho[i * n + j] - rho[j * n + i].conj()).norm());
            }
        }
        hyg.hermiticity = Some(hyg.hermiticity.unwrap().max(herm));
        if k % eig_every == 0 || k == last {
            let m = row_major_matrix(rho, n);
            let e = DensityOperator::new(space.clone(), m)?.min_eigenvalue();
            hyg.min_eigenvalue = Some(hyg.min_eigenvalue.map_or(e, |x: f64| x.min(e)));
        }
        for (p, rec) in probes.iter().zip(records.iter_mut()) {
            rec[k] = p.on_density(rho, n);
        }
        Ok(())
    };
    let y0: Vec<C64> = (0..n * n).map(|idx| rho0.matrix()[(idx / n, idx % n)]).collect();
    let (y, stats) = dopri::integrate(rhs, y0, times, opts, observe)?;
    let rho = DensityOperator::new(space.clone(), row_major_matrix(&y, n))?;
    log::debug!("open run: {} steps, {} rejected, {hyg:?}", stats.steps, stats.rejected);
    Ok(EvolutionResult {
        times: times.to_vec(),
        records: probes.iter().map(|p| p.label().to_string()).zip(records).collect(),
        final_state: FinalState::Density(rho),
        stats,
        hygiene: hyg,
    })
}

/// `out = B + B†` for row-major n×n `B`, in cache-sized tiles.
fn add_hermitian_part(b: &[C64], n: usize, out: &mut [C64]) {
    const TILE: usize = 32;
    for i0 in (0..n).step_by(TILE) {
        for j0 in (0..n).step_by(TILE) {
            for i in i0..(i0 + TILE).min(n) {
                for j in j0..(j0 + TILE).min(n) {
                    out[i * n + j] = b[i * n + j] + b[j * n + i].conj();
                }
            }
        }
    }
}

fn row_major_matrix(v: &[C64], n: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(n, n, v)
}

#[cfg(test)]
mod tests;
