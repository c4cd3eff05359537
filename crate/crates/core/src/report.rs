//! The JSON result document shared by the CLI, the HTTP service and the
//! browser demo.

use serde::Serialize;

use crate::catalog::Catalog;
use crate::reasoning::QueryRequirements;
use crate::solver::{enumerate_configurations, report_uncertain, Configuration, SolverError, UncertaintyEntry};

/// Cap on configurations returned when nothing else is configured.
pub const DEFAULT_MAX_RESULTS: usize = 1000;

/// Environment variable overriding [`DEFAULT_MAX_RESULTS`].
pub const MAX_RESULTS_ENV: &str = "ROBOCIM_MAX_RESULTS";

/// Reads the result cap from the environment, falling back to the default
/// when unset or unparsable.
pub fn max_results_from_env() -> usize {
    std::env::var(MAX_RESULTS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_RESULTS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryResult {
    pub query: QueryRequirements,
    pub configurations: Vec<Configuration>,
    pub uncertain: Vec<UncertaintyEntry>,
    /// Number of valid configurations before the cap was applied.
    pub total: usize,
    pub truncated: bool,
}

impl QueryResult {
    /// Stable, pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("query result serializes");
        s.push('\n');
        s
    }
}

/// Runs a query and keeps at most `max_results` configurations.
pub fn run_query(catalog: &Catalog, req: &QueryRequirements, max_results: usize) -> Result<QueryResult, SolverError> {
    let mut configurations = enumerate_configurations(catalog, req)?;
    let total = configurations.len();
    let truncated = total > max_results;
    configurations.truncate(max_results);
    Ok(QueryResult {
        query: req.clone(),
        configurations,
        uncertain: report_uncertain(catalog, req.min_justification),
        total,
        truncated,
    })
}
