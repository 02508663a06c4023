use std::io::Write;

use super::{SweepPoint, SweepResult, TrajectoryRow, TruthRow};
use crate::dynamics::EvolutionResult;
use crate::error::{Error, Result};

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// `input_label,model,fidelity`
pub fn write_truth_table_csv<W: Write>(rows: &[TruthRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["input_label", "model", "fidelity"]).map_err(io)?;
    for r in rows {
        w.write_record([r.input.label(), r.model.name().to_string(), num(r.fidelity)]).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `N,kind,delta,fidelity`; rate rows are rejected.
pub fn write_sweep_csv<W: Write>(res: &SweepResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["N", "kind", "delta", "fidelity"]).map_err(io)?;
    for r in &res.rows {
        let SweepPoint::Error { kind, delta } = r.point else {
            return Err(Error::param("rows", "decoherence rows in an error sweep"));
        };
        w.write_record([r.n.to_string(), kind.name().to_string(), num(delta), num(r.fidelity)]).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `N,kappa_MHz,gamma_MHz,fidelity`
pub fn write_decoherence_csv<W: Write>(res: &SweepResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["N", "kappa_MHz", "gamma_MHz", "fidelity"]).map_err(io)?;
    for r in &res.rows {
        let SweepPoint::Rates { kappa_mhz, gamma_mhz } = r.point else {
            return Err(Error::param("rows", "error rows in a decoherence sweep"));
        };
        w.write_record([r.n.to_string(), num(kappa_mhz), num(gamma_mhz), num(r.fidelity)]).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Long format `N,t_ns,label,population`, one block per tone count.
pub fn write_populations_csv<W: Write>(traces: &[(usize, &EvolutionResult)], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["N", "t_ns", "label", "population"]).map_err(io)?;
    for (n, res) in traces {
        for (label, values) in &res.records {
            for (t, p) in res.times.iter().zip(values) {
                w.write_record([n.to_string(), num(t * 1e3), label.clone(), num(*p)]).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// `N,delta_t,t_over_tau,F,G,closure_error`
pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["N", "delta_t", "t_over_tau", "F", "G", "closure_error"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            num(r.delta_t),
            num(r.t_over_tau),
            num(r.f),
            num(r.g),
            num(r.closure_error),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
