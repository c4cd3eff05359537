//! Browser bindings for the configurator.
//!
//! Each operation takes the catalog as JSON text and returns JSON text (or
//! plain text for explanations). The plain functions are usable and tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use wasm_bindgen::prelude::*;

use robocim_core::report::DEFAULT_MAX_RESULTS;
use robocim_core::{
    explain, parse_catalog, report_uncertain, run_query, Catalog, JustificationLevel, QueryRequirements,
};

fn catalog(json: &str) -> Result<Catalog, String> {
    parse_catalog(json).map_err(|e| format!("catalog: {e}"))
}

fn level(text: &str) -> Result<Option<JustificationLevel>, String> {
    match text.trim() {
        "" => Ok(None),
        other => other.parse().map(Some).map_err(|e| format!("{e}")),
    }
}

fn requirements(application: &str, size_k: usize, min_justification: &str) -> Result<QueryRequirements, String> {
    Ok(QueryRequirements::new(application, size_k)
        .map_err(|e| e.to_string())?
        .with_min_justification(level(min_justification)?))
}

/// The same document the CLI prints for `configure --format json`.
pub fn configure_json(
    catalog_json: &str,
    application: &str,
    size_k: usize,
    min_justification: &str,
) -> Result<String, String> {
    let c = catalog(catalog_json)?;
    let req = requirements(application, size_k, min_justification)?;
    run_query(&c, &req, DEFAULT_MAX_RESULTS)
        .map(|r| r.to_json())
        .map_err(|e| e.to_string())
}

/// The evidence trail behind the `index`-th configuration of a query.
pub fn explain_text(
    catalog_json: &str,
    application: &str,
    size_k: usize,
    min_justification: &str,
    index: usize,
) -> Result<String, String> {
    let c = catalog(catalog_json)?;
    let req = requirements(application, size_k, min_justification)?;
    let result = run_query(&c, &req, usize::MAX).map_err(|e| e.to_string())?;
    let cfg = result
        .configurations
        .get(index)
        .ok_or_else(|| format!("configuration {index} does not exist; the query has {}", result.total))?;
    explain(&c, cfg).map(|e| e.to_string()).map_err(|e| e.to_string())
}

/// Product pairs whose compatibility rests on weak or conflicting evidence.
pub fn uncertain_json(catalog_json: &str, min_justification: &str) -> Result<String, String> {
    let c = catalog(catalog_json)?;
    let report = report_uncertain(&c, level(min_justification)?);
    Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")
}

#[wasm_bindgen]
pub fn configure(
    catalog_json: &str,
    application: &str,
    size_k: usize,
    min_justification: &str,
) -> Result<String, JsError> {
    configure_json(catalog_json, application, size_k, min_justification).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = explainConfiguration)]
pub fn explain_configuration(
    catalog_json: &str,
    application: &str,
    size_k: usize,
    min_justification: &str,
    index: usize,
) -> Result<String, JsError> {
    explain_text(catalog_json, application, size_k, min_justification, index).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn uncertain(catalog_json: &str, min_justification: &str) -> Result<String, JsError> {
    uncertain_json(catalog_json, min_justification).map_err(|e| JsError::new(&e))
}
