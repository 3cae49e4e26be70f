//! Configuration-driven runner for the Lagrange-Galerkin experiments.

pub mod config;
pub mod runner;

use lagrange_galerkin::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// One line for stderr: `error kind=<kind> code=<code> message="<text>"`.
    pub fn machine_line(&self) -> String {
        let msg = self.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
        format!("error kind={} code={} message=\"{msg}\"", self.kind(), self.exit_code())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::DegenerateDomain { .. }
            | Error::InvalidSubdivision(_)
            | Error::MacroPattern(_)
            | Error::UnsupportedRule(_)
            | Error::RuleTooLow { .. }
            | Error::NotConforming(_)
            | Error::NotDivergenceFree => CliError::Config(e.to_string()),
            Error::LocateFailed { .. }
            | Error::SolverDiverged { .. }
            | Error::NonFiniteVelocity { .. }
            | Error::SpaceMismatch => CliError::Numerical(e.to_string()),
        }
    }
}
