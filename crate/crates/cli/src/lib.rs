//! Command-line front end: runs the check suites of `delab-core`, writes CSV
//! reports and OBJ meshes.
//!
//! Each CSV row is `check_id, parameters, value, bound, order_estimate, pass`.
//! Rows are sorted by `check_id` then `parameters`, and values are rounded to
//! ten significant digits, so identical configurations give identical bytes
//! regardless of thread count.

pub mod config;
pub mod rows;
pub mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use thiserror::Error;

pub use config::{Cli, Command, ConfigError, RunConfig};
pub use rows::Row;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Mesh(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Empty for `mesh`.
    pub rows: Vec<Row>,
    pub failures: usize,
    pub artifact: PathBuf,
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            0
        } else {
            1
        }
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|source| RunError::Write {
        path: path.clone(),
        source,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let rows = match cfg.command {
        Command::Verify => suites::verify(cfg),
        Command::Expand => suites::expand(cfg)?,
        Command::Kernel => suites::kernel(cfg),
        Command::Probe => suites::probe(cfg),
        Command::Mesh => return run_mesh(cfg),
    };
    let write_err = |source: io::Error| RunError::Write {
        path: cfg.out.clone(),
        source,
    };
    let mut out = create(&cfg.out)?;
    rows::write_csv(&rows, &mut out).map_err(|e| write_err(e.into()))?;
    out.flush().map_err(write_err)?;
    let failures = rows::failures(&rows);
    Ok(Outcome {
        summary: format!("{} checks, {failures} failed -> {}", rows.len(), cfg.out.display()),
        rows,
        failures,
        artifact: cfg.out.clone(),
    })
}

fn run_mesh(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let s = suites::mesh(cfg).map_err(RunError::Mesh)?;
    let mut out = create(&cfg.out)?;
    let write_err = |source: io::Error| RunError::Write {
        path: cfg.out.clone(),
        source,
    };
    s.mesh.write_obj(&mut out).map_err(write_err)?;
    out.flush().map_err(write_err)?;
    // The torus closes up, so anything but χ = 0 means a broken seam.
    let failures = usize::from(s.euler != 0);
    Ok(Outcome {
        rows: Vec::new(),
        failures,
        artifact: cfg.out.clone(),
        summary: format!(
            "{} vertices, {} faces, euler characteristic {}, eps={} -> {}",
            s.mesh.vertices.len(),
            s.mesh.faces.len(),
            s.euler,
            rows::fmt_num(s.epsilon),
            cfg.out.display()
        ),
    })
}
