use std::path::{Path, PathBuf};

use webgeom::coframe::{Interval, Invariants, OdeSystem};
use webgeom::equivalence::{
    compare_signatures, signature_sample, solve_n1, symmetry_dimension, verify_pullback,
    EquivVerdict, ScalarProblem,
};
use webgeom::Error;

use crate::files::{parse_map, parse_system, FileError};
use crate::report::{
    invariant_sections, ErrorReport, Report, ScalarReport, SymdimReport, SystemEcho, VerdictReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_FLAT_TORSION: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_SCALAR: i32 = 4;

/// Points on the scalar solver's output grid.
pub const SCALAR_GRID: usize = 101;

/// Samples for signature comparison when no map is given.
pub const SIGNATURE_GRID: usize = 64;

const SCALAR_NOTE: &str = "any two scalar autonomous equations x' = f(x), X' = F(X) with \
nonvanishing right-hand sides are web equivalent; use `solve1` to construct the map";

pub fn verdict_exit_code(v: &EquivVerdict) -> i32 {
    match v {
        EquivVerdict::RefutedByInvariant(_) => EXIT_REFUTED,
        EquivVerdict::NotRefuted(_) | EquivVerdict::VerifiedByMap { .. } => EXIT_OK,
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::FlatTorsion => EXIT_FLAT_TORSION,
        Error::SignMismatch | Error::QuadratureFailure(_) => EXIT_SCALAR,
        _ => EXIT_FAILURE,
    }
}

/// Failure of a command, tagged with the stage that produced it.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FileError },
    #[error("{source}")]
    Core { stage: &'static str, source: Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => error_exit_code(source),
            _ => EXIT_FAILURE,
        }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "read",
            CliError::Format { .. } => "parse",
            CliError::Core { stage, .. } => stage,
            CliError::Usage(_) => "usage",
        }
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for webgeom::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { stage, source })
    }
}

/// A finished command: the report to print and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

impl Outcome {
    fn ok(report: Report, code: i32) -> Outcome {
        Outcome { report, code }
    }

    /// Report for a failed command, keeping whatever sections were filled.
    pub fn failed(mut report: Report, e: &CliError) -> Outcome {
        report.error = Some(ErrorReport {
            stage: e.stage().into(),
            message: e.to_string(),
        });
        Outcome {
            report,
            code: e.exit_code(),
        }
    }
}

pub fn load_system(path: &Path) -> Result<OdeSystem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    parse_system(&text).map_err(|source| CliError::Format {
        path: path.into(),
        source,
    })
}

fn run(command: &str, body: impl FnOnce(&mut Report) -> Result<i32, CliError>) -> Outcome {
    let mut report = Report {
        command: command.into(),
        ..Report::default()
    };
    match body(&mut report) {
        Ok(code) => Outcome::ok(report, code),
        Err(e) => Outcome::failed(report, &e),
    }
}

/// `point` holds `t, x_1..x_n`; defaults to the box center.
pub fn cmd_invariants(file: &Path, point: Option<&[f64]>) -> Outcome {
    run("invariants", |report| {
        let sys = load_system(file)?;
        report.system.push(SystemEcho::new(&sys));
        if sys.n() == 1 {
            report.diagnostics.push(SCALAR_NOTE.into());
            return Ok(EXIT_OK);
        }
        let p = match point {
            None => sys.center(),
            Some(v) if v.len() == sys.n() + 1 => sys.point(v[0], &v[1..]),
            Some(v) => {
                return Err(CliError::Usage(format!(
                    "--point needs {} values (t, x1..x{}), got {}",
                    sys.n() + 1,
                    sys.n(),
                    v.len()
                )))
            }
        };
        report.point = Some(p.values().to_vec());
        if !sys.contains(&p) {
            report.diagnostics.push("point lies outside the box".into());
        }
        let inv = Invariants::compute(&sys).stage(stage_of_invariants(&sys))?;
        invariant_sections(report, &sys, &inv, &p);
        Ok(EXIT_OK)
    })
}

/// Which pipeline stage an invariant computation error comes from.
fn stage_of_invariants(sys: &OdeSystem) -> &'static str {
    if sys.report().is_valid() {
        "normalization"
    } else {
        "validation"
    }
}

pub fn cmd_check(a: &Path, b: &Path, map: Option<&Path>, samples: usize) -> Outcome {
    run("check", |report| {
        let sa = load_system(a)?;
        let sb = load_system(b)?;
        report.system.push(SystemEcho::new(&sa));
        report.system.push(SystemEcho::new(&sb));
        if sa.n() != sb.n() {
            return Err(CliError::Usage(format!("n = {} vs n = {}", sa.n(), sb.n())));
        }
        if sa.n() == 1 {
            report.diagnostics.push(SCALAR_NOTE.into());
            return Ok(EXIT_OK);
        }
        let verdict = match map {
            Some(path) => {
                if sa.vars() != sb.vars() {
                    return Err(CliError::Usage(
                        "with --map both systems must use the same variable names".into(),
                    ));
                }
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.into(),
                    source,
                })?;
                let m = parse_map(&text, sa.vars()).map_err(|source| CliError::Format {
                    path: path.into(),
                    source,
                })?;
                m.check_monotone(&sa).stage("map")?;
                verify_pullback(&sa, &sb, &m, samples).stage("verification")?
            }
            None => {
                let ga = signature_sample(&sa, SIGNATURE_GRID).stage("signature A")?;
                let gb = signature_sample(&sb, SIGNATURE_GRID).stage("signature B")?;
                for (tag, g) in [("A", &ga), ("B", &gb)] {
                    report.diagnostics.push(format!(
                        "{tag}: normalizer l{}{}, {} samples, {} skipped",
                        g.normalizer.0 + 1,
                        g.normalizer.1 + 1,
                        g.vectors.len(),
                        g.skipped
                    ));
                }
                compare_signatures(&ga, &gb).stage("comparison")?
            }
        };
        report.verdict = Some(VerdictReport::new(&verdict));
        Ok(verdict_exit_code(&verdict))
    })
}

/// Options of the scalar solver; `None` fields default to the source box
/// (range) and its lower end mapped to the target box's lower end (anchor).
pub struct Solve1Options<'a> {
    pub anchor: Option<(f64, f64)>,
    pub range: Option<(f64, f64)>,
    pub out: Option<&'a Path>,
}

pub fn cmd_solve1(a: &Path, b: &Path, opts: &Solve1Options) -> Outcome {
    run("solve1", |report| {
        let sa = load_system(a)?;
        let sb = load_system(b)?;
        report.system.push(SystemEcho::new(&sa));
        report.system.push(SystemEcho::new(&sb));
        if sa.n() != 1 || sb.n() != 1 {
            return Err(CliError::Usage(
                "solve1 needs two scalar systems (n = 1)".into(),
            ));
        }
        let range = match opts.range {
            Some((lo, hi)) => Interval::new(lo, hi).stage("options")?,
            None => sa.bbox()[0],
        };
        let anchor = opts.anchor.unwrap_or((range.lo, sb.bbox()[0].lo));
        let problem = ScalarProblem {
            f: sa.rhs()[0].clone(),
            f_var: sa.var(0).clone(),
            target: sb.rhs()[0].clone(),
            target_var: sb.var(0).clone(),
            anchor,
            range,
        };
        let solution = solve_n1(&problem, SCALAR_GRID).stage("solve1")?;
        report.scalar = Some(ScalarReport::new(&solution, anchor, range));
        if let Some(path) = opts.out {
            write_table(path, &solution.grid)?;
            report
                .diagnostics
                .push(format!("table written to {}", path.display()));
        }
        Ok(if solution.passes() {
            EXIT_OK
        } else {
            EXIT_FAILURE
        })
    })
}

fn write_table(path: &Path, grid: &[webgeom::equivalence::GridRow]) -> Result<(), CliError> {
    let io = |source: std::io::Error| CliError::Io {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    w.write_record(["x", "phi1", "residual"])
        .map_err(|e| io(e.into()))?;
    for row in grid {
        w.write_record([row.x, row.phi1, row.residual].map(|v| format!("{v:.16e}")))
            .map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)
}

pub fn cmd_symdim(file: &Path, probes: usize) -> Outcome {
    run("symdim", |report| {
        let sys = load_system(file)?;
        report.system.push(SystemEcho::new(&sys));
        if sys.n() == 1 {
            return Err(CliError::Usage("symdim needs n >= 2".into()));
        }
        let est = symmetry_dimension(&sys, probes).stage("symdim")?;
        report.symmetry_dimension = Some(SymdimReport::new(&est));
        Ok(EXIT_OK)
    })
}

/// Parses `t,x1,...,xn`.
pub fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number"))
        })
        .collect()
}
