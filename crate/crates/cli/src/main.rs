//! `robocim`: validate catalogs, enumerate configurations and serve the API.
//!
//! Exit codes: 0 success, 1 invalid catalog, 2 usage error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use robocim_core::report::max_results_from_env;
use robocim_core::{explain, load_catalog, run_query, validate_catalog, Catalog, CatalogError};
use robocim_service::{configure_body, uncertain_body, ApiError, ConfigureRequest, ServiceConfig, ServiceError};

#[derive(Debug, Parser)]
#[command(
    name = "robocim",
    version,
    about = "Configure modular robot systems from a device catalog"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a catalog; diagnostics go to standard error.
    Validate { catalog: PathBuf },
    /// Enumerate valid configurations.
    Configure {
        catalog: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Explain one configuration of a query's result list.
    Explain {
        catalog: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        /// Zero-based position in the result list.
        #[arg(long)]
        config_index: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// List product pairs whose compatibility rests on weak or conflicting evidence.
    Uncertain {
        catalog: PathBuf,
        #[arg(long)]
        min_justification: Option<String>,
    },
    /// Serve the HTTP API.
    Serve {
        catalog: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Origin allowed by CORS; any origin when omitted.
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long, default_value = "any")]
    application: String,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    min_justification: Option<String>,
}

impl QueryArgs {
    fn request(&self) -> ConfigureRequest {
        ConfigureRequest {
            application: self.application.clone(),
            size_k: self.size,
            min_justification: self.min_justification.clone(),
            extra_required_attributes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        if e.status < 500 {
            Failure::Usage(e.message)
        } else {
            Failure::Io(e.message)
        }
    }
}

fn load(path: &Path) -> Result<Catalog, Failure> {
    Ok(load_catalog(path)?)
}

fn configure(catalog: &Catalog, query: &QueryArgs, format: Format) -> Result<String, Failure> {
    let max_results = max_results_from_env();
    if format == Format::Json {
        return Ok(configure_body(catalog, query.request(), max_results)?);
    }
    let req = query.request().into_requirements()?;
    let result = run_query(catalog, &req, max_results).map_err(ApiError::from)?;
    let mut out = String::new();
    for (i, cfg) in result.configurations.iter().enumerate() {
        let names: Vec<&str> = cfg
            .products
            .iter()
            .map(|id| catalog.product(id).map_or(id.as_str(), |p| p.display_name.as_str()))
            .collect();
        out.push_str(&format!(
            "{i:>4}  {:<11}  {}\n",
            cfg.certainty.to_string(),
            names.join(" | ")
        ));
    }
    let shown = result.configurations.len();
    out.push_str(&format!("{shown} of {} configuration(s)", result.total));
    if result.truncated {
        out.push_str(&format!(
            " (truncated; raise {})",
            robocim_core::report::MAX_RESULTS_ENV
        ));
    }
    out.push('\n');
    Ok(out)
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Validate { catalog } => {
            let catalog = load(&catalog)?;
            let diagnostics = validate_catalog(&catalog);
            if diagnostics.is_empty() {
                return Ok(format!(
                    "ok: {} products, {} claims\n",
                    catalog.products().len(),
                    catalog.claims().len()
                ));
            }
            for d in &diagnostics {
                eprintln!("{d}");
            }
            Err(Failure::Invalid(format!("{} diagnostic(s)", diagnostics.len())))
        }
        Command::Configure { catalog, query, format } => configure(&load(&catalog)?, &query, format),
        Command::Explain {
            catalog,
            query,
            config_index,
            format,
        } => {
            let catalog = load(&catalog)?;
            let req = query.request().into_requirements()?;
            let result = run_query(&catalog, &req, usize::MAX).map_err(ApiError::from)?;
            let cfg = result.configurations.get(config_index).ok_or_else(|| {
                Failure::Usage(format!(
                    "--config-index {config_index} is out of range; the query has {} configuration(s)",
                    result.total
                ))
            })?;
            let explanation = explain(&catalog, cfg).map_err(ApiError::from)?;
            Ok(match format {
                Format::Table => explanation.to_string(),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&explanation).expect("explanation serializes");
                    s.push('\n');
                    s
                }
            })
        }
        Command::Uncertain {
            catalog,
            min_justification,
        } => Ok(uncertain_body(&load(&catalog)?, min_justification.as_deref())?),
        Command::Serve {
            catalog,
            bind,
            cors_origin,
        } => {
            let config = ServiceConfig {
                max_results: max_results_from_env(),
                cors_origin,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            runtime
                .block_on(robocim_service::serve(&catalog, &bind, config))
                .map_err(|e| match e {
                    ServiceError::Catalog(c) => Failure::from(c),
                    ServiceError::Invalid(ds) => {
                        for d in &ds {
                            eprintln!("{d}");
                        }
                        Failure::Invalid(format!("{} diagnostic(s)", ds.len()))
                    }
                    bind @ ServiceError::Bind { .. } => Failure::Io(bind.to_string()),
                })?;
            Ok(String::new())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
