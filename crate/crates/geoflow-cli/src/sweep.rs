//! The sweep subcommand: run every config in a JSON array, in parallel,
//! each into its own subdirectory, and write an index of outcomes. One
//! run failing is an outcome to record, never a reason to abort the
//! siblings, so the index always covers every entry.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::run::{create_output_dir, evolve_command};
use crate::{io, CliError};

/// Runs all configs in the array at `config_path`, writing per-run
/// output under `out_root/run_NNN` and an index.json at the root.
/// `thread_cap` limits worker threads (the CLI wires it to the
/// GEOFLOW_THREADS environment variable); the available parallelism is
/// the default. Returns the index.
pub fn sweep_command(
    config_path: &Path,
    out_root: &Path,
    thread_cap: Option<usize>,
) -> Result<Value, CliError> {
    let list = io::read_json(config_path)?;
    let entries = list.as_array().ok_or_else(|| {
        CliError::Config(format!(
            "{}: sweep config must be a JSON array of experiment configs",
            config_path.display()
        ))
    })?;
    if entries.is_empty() {
        return Err(CliError::Config(format!(
            "{}: sweep config array is empty",
            config_path.display()
        )));
    }
    create_output_dir(out_root)?;

    let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let workers = thread_cap.unwrap_or(default_workers).clamp(1, entries.len());

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Value>>> = Mutex::new(vec![None; entries.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= entries.len() {
                    break;
                }
                let entry = run_entry(i, &entries[i], out_root);
                results.lock().expect("no poisoned runs")[i] = Some(entry);
            });
        }
    });

    let index: Vec<Value> = results
        .into_inner()
        .expect("scope joined all workers")
        .into_iter()
        .map(|e| e.expect("every entry ran"))
        .collect();
    let index = Value::Array(index);
    io::write_json(&out_root.join("index.json"), &index)?;
    Ok(index)
}

fn run_entry(i: usize, raw: &Value, out_root: &Path) -> Value {
    let dir_name = format!("run_{i:03}");
    let dir = out_root.join(&dir_name);
    let outcome = catch_unwind(AssertUnwindSafe(|| run_one(raw, &dir)));
    let (status, error) = match outcome {
        Ok(Ok(())) => ("ok", Value::Null),
        Ok(Err(e)) => (e.class(), Value::String(e.to_string())),
        Err(_) => ("solver_error", Value::String("run panicked".into())),
    };
    json!({
        "run": i,
        "dir": dir_name,
        "status": status,
        "error": error,
    })
}

fn run_one(raw: &Value, dir: &Path) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::from_value(raw.clone())?;
    // The sweep owns the layout; per-entry output_dir is replaced.
    cfg.output_dir = PathBuf::from(dir);
    evolve_command(&cfg)?;
    Ok(())
}
