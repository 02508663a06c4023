//! Scenario configuration, dispatch and artifact writing for the `katsim`
//! command-line tool.

pub mod config;
pub mod run;

pub use config::{Frequency, Grid, PhysicalParams, Scenario, ScenarioConfig};
pub use run::{run, validate, Overrides, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    Invalid(katsim_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(katsim_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Extra diagnostics for numerical failures: failing time and row.
    pub fn detail(&self) -> Option<String> {
        let CliError::Numerical(e) = self else { return None };
        let t = e.failing_time().map(|t| format!("t = {t:.6e} μs"));
        let row = e.row().map(|r| format!("row {r}"));
        match (t, row) {
            (None, None) => None,
            (t, r) => Some([t, r].into_iter().flatten().collect::<Vec<_>>().join(", ")),
        }
    }
}
