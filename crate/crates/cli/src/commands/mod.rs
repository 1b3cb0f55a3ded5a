pub mod boundaries;
pub mod classify;
pub mod diagram;
pub mod kappa4;
pub mod simulate;

use serde::Serialize;
use triad_core::{DerivConvention, ModelParams, SolverConfig, Thresholds};

use crate::error::CliError;
use crate::output::Table;

/// Self-description embedded in every output file.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Meta<'a> {
    pub command: &'a str,
    pub params: &'a ModelParams,
    pub convention: DerivConvention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<&'a SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<&'a Thresholds>,
}

impl Meta<'_> {
    pub fn stamp(&self, table: &mut Table) {
        table.comment("command", self.command);
        table.comment("params", self.params);
        table.comment("convention", &self.convention);
        if let Some(s) = self.solver {
            table.comment("solver", s);
        }
        if let Some(t) = self.thresholds {
            table.comment("thresholds", t);
        }
    }
}

pub fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Prints a JSON document; a closed stdout is not an error.
pub fn println_json<T: Serialize>(value: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("stdout document serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}
