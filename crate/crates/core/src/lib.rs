//! Knowledge-based configurator for modular robot systems.
//!
//! Compatibility between devices is treated as a defeasible claim: equal
//! interfaces are assumed to fit, and justified evidence can overturn that
//! assumption or make it conditional on a mediating device. The solver
//! enumerates every configuration that satisfies the port, compatibility,
//! role and application rules, and grades each by the weakest evidence it
//! relies on.

pub mod catalog;
pub mod reasoning;
pub mod report;
pub mod solver;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use catalog::{
    justification_stronger, load_catalog, parse_catalog, validate_catalog, Catalog, CatalogDocument, CatalogError,
    Diagnostic, JustificationLevel,
};
pub use reasoning::{
    check_configuration, check_port_connection, required_ports_check, resolve_compatibility, Certainty, Connection,
    PortRef, QueryRequirements, ReasoningError, VerdictStatus,
};
pub use report::{run_query, QueryResult};
pub use solver::{
    enumerate_bruteforce, enumerate_configurations, explain, report_uncertain, Configuration, SolverError,
};
