//! File plumbing with the exit-code contract: reads and parses are exit 2,
//! domain errors 3, budget errors 4. Output files are written to a
//! temporary file and atomically renamed so a failing command never leaves
//! a partial file behind.

use std::io::Write as _;
use std::path::Path;

use stablecluster::{validate_metric, Clustering, Error, Instance};

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    pub fn budget(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_budget() {
            CliError::budget(e.to_string())
        } else {
            CliError::domain(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Load and fully validate an instance file. Metric violations are treated
/// as malformed input (exit 2), matching the contract that every command
/// validates before computing.
pub fn load_instance(path: &str) -> CliResult<Instance> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {path}: {e}")))?;
    let inst =
        Instance::from_json(&text).map_err(|e| CliError::io(format!("parsing {path}: {e}")))?;
    let report = validate_metric(&inst, inst.default_tolerance());
    if !report.is_clean() {
        return Err(CliError::io(format!(
            "{path}: instance violates metric invariants ({} violation(s), first: {:?})",
            report.violations.len(),
            report.violations[0]
        )));
    }
    Ok(inst)
}

pub fn load_clustering(path: &str) -> CliResult<Clustering> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {path}: {e}")))?;
    Clustering::from_json(&text).map_err(|e| CliError::io(format!("parsing {path}: {e}")))
}

/// Write via a sibling temp file and an atomic rename.
pub fn write_atomic(path: &str, contents: &str) -> CliResult<()> {
    let target = Path::new(path);
    let dir = target.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| CliError::io(format!("creating temp file for {path}: {e}")))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(format!("writing {path}: {e}")))?;
    tmp.persist(target)
        .map_err(|e| CliError::io(format!("renaming into {path}: {e}")))?;
    Ok(())
}

/// Write to the file when given, stdout otherwise.
pub fn emit(out: &Option<String>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

/// Enumeration budget: explicit flag, else the STABLECLUSTER_BUDGET
/// environment variable, else the given default.
pub fn budget_or_env(flag: Option<u128>, default: u128) -> CliResult<u128> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("STABLECLUSTER_BUDGET") {
        Ok(text) => text
            .parse::<u128>()
            .map_err(|e| CliError::io(format!("STABLECLUSTER_BUDGET: {e}"))),
        Err(_) => Ok(default),
    }
}
