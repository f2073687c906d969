//! Run configuration: command-line flags, optionally layered over a JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use delab_core::graph::{PrescribedCurvature, SphereFunction};
use delab_core::profile::make_profile;
use delab_core::torus::MAX_EPSILON;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no command given (flag or \"command\" in the config file)")]
    MissingCommand,
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Full invariant suite, written to report.csv.
    Verify,
    /// Richardson tables of the torus expansions.
    Expand,
    /// Jacobi kernel residuals and singular-limit deviations.
    Kernel,
    /// Line integrals, kernel orthogonality and the obstruction pairing.
    Probe,
    /// Wavefront OBJ of the closed torus.
    Mesh,
}

impl Command {
    pub fn default_output(self) -> &'static str {
        match self {
            Self::Verify => "report.csv",
            Self::Expand => "expand.csv",
            Self::Kernel => "kernel.csv",
            Self::Probe => "probe.csv",
            Self::Mesh => "torus.obj",
        }
    }
}

/// Prescribed curvature `1 + A/|X|^β + H₁/|X|^{β+ν}`, given as JSON such as
/// `{"A":"coord2","beta":1,"nu":2,"H1":"const"}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(rename = "A", default = "default_leading")]
    pub a: String,
    pub beta: Option<f64>,
    pub nu: Option<f64>,
    #[serde(rename = "H1")]
    pub h1: Option<String>,
}

fn default_leading() -> String {
    "coord2".into()
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            a: default_leading(),
            beta: None,
            nu: None,
            h1: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

/// Contents of a `--config` file; every key is optional and flags win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    a: Option<OneOrMany>,
    eps: Option<f64>,
    n: Option<u32>,
    beta: Option<f64>,
    nu: Option<f64>,
    #[serde(rename = "R")]
    r: Option<f64>,
    alpha: Option<f64>,
    res: Option<String>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    field: Option<FieldSpec>,
}

#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "delab",
    version,
    about = "Delaunay surface verification toolkit",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Delaunay parameter(s), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Largest ε of the halving sequence ε, ε/2, ε/4.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Lobes of the closed torus (`mesh`) or periods of the norm box (`probe`).
    #[arg(long)]
    pub n: Option<u32>,
    /// Decay exponent β of the prescribed curvature and the ball.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Extra decay ν of the prescribed-curvature remainder.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Perturbation-ball radius (`expand`) or R₁ of the pointwise bound (`probe`).
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Hölder exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Grid resolution `<nt>x<nθ>`.
    #[arg(long)]
    pub res: Option<String>,
    /// Tolerance of the command's headline check.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Prescribed-curvature spec as JSON.
    #[arg(long)]
    pub field: Option<String>,
    /// JSON file with any of the above keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Overrides the built-in parameter grids when set.
    pub a: Option<Vec<f64>>,
    pub eps: f64,
    /// Lobe count (`mesh`, default 20) or periods of the weighted-norm box
    /// (`probe`, default 1).
    pub n: Option<u32>,
    pub beta: f64,
    pub nu: f64,
    pub r: Option<f64>,
    pub alpha: f64,
    pub res: (usize, usize),
    pub tol: Option<f64>,
    pub out: PathBuf,
    pub field: FieldSpec,
}

impl RunConfig {
    /// Defaults for `command` with no overrides.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            a: None,
            eps: 1e-2,
            n: None,
            beta: 1.0,
            nu: 1.0,
            r: None,
            alpha: 0.5,
            res: (400, 64),
            tol: None,
            out: PathBuf::from(command.default_output()),
            field: FieldSpec::default(),
        }
    }

    /// Halving sequence used by the expansion checks.
    pub fn eps_sequence(&self) -> [f64; 3] {
        [self.eps, self.eps / 2.0, self.eps / 4.0]
    }

    pub fn prescribed(&self) -> Result<PrescribedCurvature, ConfigError> {
        let parse = |s: &str| SphereFunction::parse(s).map_err(|e| invalid("field", e.to_string()));
        let mut h =
            PrescribedCurvature::new(parse(&self.field.a)?, self.beta, self.nu).map_err(|e| invalid("field", e.to_string()))?;
        if let Some(h1) = &self.field.h1 {
            h = h.with_remainder(parse(h1)?);
        }
        Ok(h)
    }

    pub fn from_cli(cli: Cli) -> Result<Self, ConfigError> {
        let file = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str::<FileConfig>(&text)?
            }
            None => FileConfig::default(),
        };
        let command = cli.command.or(file.command).ok_or(ConfigError::MissingCommand)?;
        let field = match cli.field.as_deref() {
            Some(json) => Some(serde_json::from_str::<FieldSpec>(json)?),
            None => file.field,
        }
        .unwrap_or_default();
        let mut cfg = Self::new(command);
        cfg.a = cli.a.or(file.a.map(|g| match g {
            OneOrMany::One(a) => vec![a],
            OneOrMany::Many(v) => v,
        }));
        cfg.eps = cli.eps.or(file.eps).unwrap_or(cfg.eps);
        cfg.n = cli.n.or(file.n);
        cfg.beta = cli.beta.or(file.beta).or(field.beta).unwrap_or(cfg.beta);
        cfg.nu = cli.nu.or(file.nu).or(field.nu).unwrap_or(cfg.nu);
        cfg.r = cli.r.or(file.r);
        cfg.alpha = cli.alpha.or(file.alpha).unwrap_or(cfg.alpha);
        if let Some(res) = cli.res.or(file.res) {
            cfg.res = parse_res(&res)?;
        }
        cfg.tol = cli.tol.or(file.tol);
        cfg.out = cli.out.or(file.out).unwrap_or(cfg.out);
        cfg.field = field;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(grid) = &self.a {
            if grid.is_empty() {
                return Err(invalid("a", "empty list"));
            }
            for &a in grid {
                make_profile(a).map_err(|e| invalid("a", e.to_string()))?;
            }
            if self.command == Command::Mesh && grid.len() != 1 {
                return Err(invalid("a", "mesh takes a single value"));
            }
        }
        if !(self.eps > 0.0 && self.eps <= MAX_EPSILON) {
            return Err(invalid("eps", format!("{} outside (0, {MAX_EPSILON}]", self.eps)));
        }
        if self.n == Some(0) {
            return Err(invalid("n", "need at least one lobe"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid("alpha", format!("{} outside (0, 1]", self.alpha)));
        }
        if let Some(r) = self.r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("R", format!("{r} is not positive")));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(invalid("tol", format!("{tol} is not positive")));
            }
        }
        if self.command == Command::Expand {
            self.prescribed()?;
        }
        check_writable(&self.out)
    }
}

pub fn parse_res(s: &str) -> Result<(usize, usize), ConfigError> {
    let bad = || invalid("res", format!("expected <nt>x<nθ>, got {s:?}"));
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    let nt: usize = a.trim().parse().map_err(|_| bad())?;
    let nth: usize = b.trim().parse().map_err(|_| bad())?;
    if nt < 2 || nth < 3 {
        return Err(invalid("res", "need at least 2x3 samples"));
    }
    Ok((nt, nth))
}

fn check_writable(out: &Path) -> Result<(), ConfigError> {
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let meta = fs::metadata(dir).map_err(|e| invalid("out", format!("{}: {e}", dir.display())))?;
    if !meta.is_dir() || meta.permissions().readonly() {
        return Err(invalid("out", format!("{} is not a writable directory", dir.display())));
    }
    Ok(())
}
