//! Front end for `lightning-solve`: reads a problem file, runs the adaptive
//! solver and writes convergence logs, point values, a certificate and an
//! optional raster.

pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use lightning::basis::{eval_laplace, BasisError, Solution};
use lightning::geometry::{Location, Point, Polygon};
use lightning::solver::{
    solve_helmholtz_soundsoft, solve_laplace_dirichlet, total_field, ConvergenceReport, HelmholtzProblem,
    SolverError,
};

use config::{ProblemConfig, ProblemKind};
use output::{FieldRaster, Value};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(serde_json::Error),
    #[error("problem file must be a JSON object")]
    NotAnObject,
    #[error("missing required key \"{0}\"")]
    MissingKey(String),
    #[error("invalid value for key \"{key}\": {reason}")]
    InvalidKey { key: String, reason: String },
    #[error("invalid --eval points: {0}")]
    EvalPoints(String),
    #[error("invalid --grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Clone, Parser)]
#[command(name = "lightning-solve", version, about = "Lightning solver for Laplace and Helmholtz problems on polygons")]
pub struct Args {
    /// Problem file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Evaluation points, "x1,y1;x2,y2;...".
    #[arg(long, allow_hyphen_values = true)]
    pub eval: Option<String>,
    /// Raster size for field.pgm.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
    /// Tolerance, overriding the problem file.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Degree-of-freedom limit, overriding the problem file.
    #[arg(long = "max-dof")]
    pub max_dof: Option<usize>,
    /// Accepted for compatibility; runs are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the resolved problem file to OUT/config.json.
    #[arg(long = "dump-config")]
    pub dump_config: bool,
}

/// Parses `"x1,y1;x2,y2;…"`. Empty entries between semicolons are skipped.
pub fn eval_points_flag(spec: &str) -> Result<Vec<Point>, CliError> {
    let mut points = Vec::new();
    for pair in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let coords: Vec<&str> = pair.split(',').map(str::trim).collect();
        let [x, y] = coords[..] else {
            return Err(CliError::EvalPoints(format!("expected \"x,y\", got \"{pair}\"")));
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::EvalPoints(format!("bad coordinate \"{s}\" in \"{pair}\"")))
        };
        points.push(Point::new(parse(x)?, parse(y)?));
    }
    if points.is_empty() {
        return Err(CliError::EvalPoints("no points given".into()));
    }
    Ok(points)
}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub converged: bool,
    pub report: ConvergenceReport,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            2
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the problem file and applies flag overrides.
pub fn load_config(args: &Args) -> Result<(ProblemConfig, Vec<String>), CliError> {
    let text = fs::read_to_string(&args.config).map_err(|source| CliError::Read {
        path: args.config.clone(),
        source,
    })?;
    let (mut cfg, warnings) = ProblemConfig::from_json(&text)?;
    if let Some(tol) = args.tol {
        cfg.tolerance = tol;
    }
    if let Some(n) = args.max_dof {
        cfg.max_dof = n;
    }
    cfg.validate()?;
    Ok((cfg, warnings))
}

fn grid_size(args: &Args) -> Result<Option<(usize, usize)>, CliError> {
    match args.grid.as_deref() {
        None => Ok(None),
        Some(&[nx, ny]) if nx >= 2 && ny >= 2 => Ok(Some((nx, ny))),
        Some(_) => Err(CliError::Grid("NX and NY must both be at least 2".into())),
    }
}

enum Solved {
    Laplace(Solution),
    Helmholtz(Solution, HelmholtzProblem),
}

impl Solved {
    fn solution(&self) -> &Solution {
        match self {
            Solved::Laplace(sol) | Solved::Helmholtz(sol, _) => sol,
        }
    }

    fn values(&self, pts: &[Point]) -> Result<Vec<Value>, CliError> {
        Ok(match self {
            Solved::Laplace(sol) => eval_laplace(sol, pts)?.into_iter().map(Value::Real).collect(),
            Solved::Helmholtz(sol, prob) => total_field(sol, prob, pts)?
                .into_iter()
                .map(|v| Value::Complex(v.re, v.im))
                .collect(),
        })
    }

    /// Values at the points flagged in `inside`, `None` elsewhere.
    fn values_in_domain(&self, pts: &[Point], inside: &[bool]) -> Result<Vec<Option<Value>>, CliError> {
        let domain: Vec<Point> = pts.iter().zip(inside).filter(|(_, &i)| i).map(|(&p, _)| p).collect();
        let mut values = self.values(&domain)?.into_iter();
        Ok(inside.iter().map(|&i| if i { values.next() } else { None }).collect())
    }

    /// Whether `p` belongs to the region where the PDE is posed.
    fn in_domain(&self, polygon: &Polygon, p: Point) -> bool {
        match (self, polygon.locate(p)) {
            (Solved::Laplace(_), loc) => loc != Location::Outside,
            (Solved::Helmholtz(..), loc) => loc != Location::Inside,
        }
    }
}

/// Runs one problem and writes all outputs into `args.out`.
pub fn run(args: &Args) -> Result<RunOutcome, CliError> {
    let (cfg, mut warnings) = load_config(args)?;
    let eval_points = args.eval.as_deref().map(eval_points_flag).transpose()?;
    let grid = grid_size(args)?;
    fs::create_dir_all(&args.out).map_err(|source| CliError::Write {
        path: args.out.clone(),
        source,
    })?;
    if args.dump_config {
        write_file(&args.out.join("config.json"), &(cfg.to_json() + "\n"))?;
    }

    let polygon = cfg.polygon()?;
    let (solved, report) = match cfg.kind {
        ProblemKind::Laplace => {
            let (sol, report) = solve_laplace_dirichlet(&cfg.laplace_problem()?)?;
            (Solved::Laplace(sol), report)
        }
        ProblemKind::Helmholtz => {
            let prob = cfg.helmholtz_problem()?;
            let (sol, report) = solve_helmholtz_soundsoft(&prob)?;
            (Solved::Helmholtz(sol, prob), report)
        }
    };

    write_file(&args.out.join("convergence.csv"), &output::convergence_csv(&report))?;
    write_file(
        &args.out.join("certificate.json"),
        &output::certificate_json(&report, solved.solution().spec.dof()),
    )?;

    if let Some(pts) = eval_points {
        let inside: Vec<bool> = pts.iter().map(|&p| solved.in_domain(&polygon, p)).collect();
        for (p, _) in pts.iter().zip(&inside).filter(|(_, &i)| !i) {
            warnings.push(format!("evaluation point {p} lies outside the solution domain; writing nan"));
        }
        let values = solved.values_in_domain(&pts, &inside)?;
        let nan = match solved {
            Solved::Laplace(_) => Value::Real(f64::NAN),
            Solved::Helmholtz(..) => Value::Complex(f64::NAN, f64::NAN),
        };
        let values: Vec<Value> = values.into_iter().map(|v| v.unwrap_or(nan)).collect();
        write_file(&args.out.join("solution.csv"), &output::solution_csv(&pts, &values))?;
    }

    if let Some((nx, ny)) = grid {
        let (lo, hi) = match solved {
            Solved::Laplace(_) => polygon.bounding_box(),
            Solved::Helmholtz(..) => output::padded_box(polygon.bounding_box(), 0.5),
        };
        let pts = output::grid_points(lo, hi, nx, ny);
        let inside: Vec<bool> = pts.iter().map(|&p| solved.in_domain(&polygon, p)).collect();
        let values: Vec<Option<f64>> = solved
            .values_in_domain(&pts, &inside)?
            .into_iter()
            .map(|v| v.map(Value::re))
            .collect();
        let quantity = match solved {
            Solved::Laplace(_) => "u",
            Solved::Helmholtz(..) => "re_total_field",
        };
        let raster = FieldRaster::new(nx, ny, lo, hi, values, quantity);
        write_file(&args.out.join("field.pgm"), &raster.pgm())?;
        write_file(&args.out.join("field.json"), &raster.sidecar_json())?;
    }

    Ok(RunOutcome {
        converged: report.converged,
        report,
        warnings,
    })
}

/// Entry point shared by the binary and tests: returns the process exit code.
pub fn main_with_args(args: &Args) -> i32 {
    match run(args) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if !outcome.converged {
                eprintln!(
                    "not converged: best boundary residual {:e}",
                    outcome.report.final_certificate.boundary_sup_residual
                );
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
