//! Command-line front end. [`run`] parses arguments, dispatches, writes the
//! report to `out` and returns the process exit status.

mod report;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::equiv::{
    analytic_factorize, approx_sequence, build_counterexample, family_verdict, hoop_equiv_test, CounterexampleSpec,
    HoopTest, MAX_DEPTH,
};
use crate::error::{Error, Result};
use crate::fanout::Mode;
use crate::gauge::{random_connection, AlgebraName, Connection, GaugeField};
use crate::loopcore::library::square;
use crate::loopcore::sets::{basepoint_preimage, zero_derivative_set, ROOT_TOL};
use crate::loopcore::{sup_distance, Loop, METRIC_SAMPLES};
use crate::transport::{convergence_order_probe, curvature_law_probe, holonomy, Method, TransportOptions};
use crate::words::{reduce, to_word, ReduceOptions, SplitPolicy, MATCH_SAMPLES, MATCH_TOL};

pub use report::Report;
pub use svg::render_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Holonomy of a loop under a connection.
    Holonomy,
    /// Retrace reduction of a loop's word, with certificate.
    Reduce,
    /// Sampled hoop-equivalence test of two loops.
    Equiv,
    /// Truncated thin-but-not-retrace-trivial loop.
    Counterexample,
    /// Approximation γ_n of a loop (default: the deepest counterexample).
    Approx,
    /// Basepoint preimage and stationary set.
    Sets,
    /// Factorization into reparametrized retrazable loops.
    Factorize,
    /// SVG or CSV rendering of a loop.
    Plot,
    /// Integrator order and small-square curvature law.
    Probe,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "holonomy-lab", version, about = "Based loops, retrace reduction and holonomy")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long = "loop", global = true)]
    pub loop_path: Option<PathBuf>,
    #[arg(long = "loop2", global = true)]
    pub loop2_path: Option<PathBuf>,
    #[arg(long, global = true)]
    pub connection: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_algebra)]
    pub algebra: Option<AlgebraName>,
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// SVG path for the counterexample rendering.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
}

fn parse_algebra(s: &str) -> std::result::Result<AlgebraName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("--tol {t} must be positive")));
            }
        }
        if let Some(s) = self.steps {
            if s < 8 {
                return Err(Error::Domain(format!("--steps {s} must be ≥ 8")));
            }
        }
        if let Some(s) = self.samples {
            if s == 0 {
                return Err(Error::Domain("--samples must be ≥ 1".into()));
            }
        }
        if let Some(n) = self.n {
            if n > MAX_DEPTH && self.command == Command::Counterexample {
                return Err(Error::Spec(format!("--N {n} exceeds {MAX_DEPTH}")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 0.5) {
                return Err(Error::Domain(format!("--epsilon {e} must lie in (0, 1/2)")));
            }
        }
        Ok(())
    }

    fn transport(&self) -> TransportOptions {
        TransportOptions {
            steps_per_segment: self.steps.unwrap_or(2048),
            ..Default::default()
        }
    }

    fn algebra(&self) -> AlgebraName {
        self.algebra.unwrap_or(AlgebraName::Su2)
    }

    fn require_loop(&self) -> Result<Loop> {
        match &self.loop_path {
            Some(p) => read_loop(p),
            None => Err(Error::Domain("--loop is required".into())),
        }
    }

    fn connection_for(&self, dim: usize) -> Result<Connection> {
        match &self.connection {
            Some(p) => {
                let c: Connection = serde_json::from_str(&read(p)?)?;
                c.validate()?;
                Ok(c)
            }
            None => Ok(Connection::Polynomial(random_connection(
                self.seed,
                self.algebra(),
                dim,
                self.degree.unwrap_or(2),
                1.0,
            )?)),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn read_loop(path: &Path) -> Result<Loop> {
    Ok(serde_json::from_str(&read(path)?)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&config) {
        Ok(report) => match out.write_all(report.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed configuration and returns the report text.
pub fn execute(c: &RunConfig) -> Result<String> {
    c.validate()?;
    let format = c.format.unwrap_or(Format::Text);
    let mut r = Report::new(c.command, c.seed, format);
    match c.command {
        Command::Holonomy => {
            let gamma = c.require_loop()?;
            let field = c.connection_for(gamma.dim())?;
            let h = holonomy(&field, &gamma, &c.transport())?;
            r.field("loop", gamma.label().unwrap_or("unnamed"));
            r.field("algebra", field.algebra());
            r.holonomy(&h);
        }
        Command::Reduce => {
            let gamma = c.require_loop()?;
            let opts = ReduceOptions {
                tol: c.tol.unwrap_or(MATCH_TOL),
                samples: c.samples.unwrap_or(MATCH_SAMPLES),
            };
            match to_word(&gamma, SplitPolicy::BreakpointsAndTurningPoints) {
                Ok(word) => {
                    let red = reduce(&word, opts);
                    r.count("letters", word.len());
                    r.count("remaining", red.word.len());
                    r.field(
                        "verdict",
                        if red.word.is_empty() { "trivial_certificate" } else { "not_reduced" },
                    );
                    r.certificate(&red);
                    if let Some(p) = &c.out {
                        write_file(p, &to_json(&red.word)?)?;
                    }
                }
                Err(e @ Error::Policy(_)) => {
                    r.field("verdict", "inconclusive");
                    r.field("reason", e);
                }
                Err(e) => return Err(e),
            }
        }
        Command::Equiv => {
            let g0 = c.require_loop()?;
            let g1 = match &c.loop2_path {
                Some(p) => read_loop(p)?,
                None => return Err(Error::Domain("--loop2 is required".into())),
            };
            let test = HoopTest {
                algebra: c.algebra(),
                degree: c.degree.unwrap_or(2),
                samples: c.samples.unwrap_or(100),
                seed: c.seed,
                tol: c.tol.unwrap_or(1e-6),
                transport: c.transport(),
                mode: Mode::from_env(),
                ..Default::default()
            };
            let v = hoop_equiv_test(&g0, &g1, &test)?;
            r.equiv(&v);
        }
        Command::Counterexample => {
            let spec = CounterexampleSpec::with_depth(c.n.unwrap_or(8));
            let gamma = build_counterexample(&spec)?;
            r.count("N", spec.n);
            for k in 0..spec.n {
                r.field(&format!("ray {k}"), format!("r = {:.17e}, theta = {:.17e}", spec.reach(k), spec.angle(k)));
            }
            r.field("untruncated", serde_json::to_string(&family_verdict(&spec))?);
            match &c.out {
                Some(p) => write_file(p, &to_json(&gamma)?)?,
                None => r.artifact("loop", &gamma)?,
            }
            if let Some(p) = &c.plot {
                write_file(p, &render_svg(&gamma)?)?;
            }
        }
        Command::Approx => {
            let (gamma, source) = match &c.loop_path {
                Some(p) => (read_loop(p)?, p.display().to_string()),
                None => (
                    build_counterexample(&CounterexampleSpec::with_depth(MAX_DEPTH))?,
                    format!("counterexample(N={MAX_DEPTH})"),
                ),
            };
            let n = c.n.unwrap_or(3);
            let gn = approx_sequence(&gamma, n)?;
            let d = sup_distance(&gamma, &gn, c.samples.unwrap_or(METRIC_SAMPLES))?;
            r.field("source", source);
            r.count("n", n);
            r.number("sup_distance", d);
            match &c.out {
                Some(p) => write_file(p, &to_json(&gn)?)?,
                None => r.artifact("loop", &gn)?,
            }
        }
        Command::Sets => {
            let gamma = c.require_loop()?;
            let tol = c.tol.unwrap_or(ROOT_TOL);
            r.set("basepoint_preimage", &basepoint_preimage(&gamma, tol));
            r.set("zero_derivative_set", &zero_derivative_set(&gamma, tol));
        }
        Command::Factorize => {
            let gamma = c.require_loop()?;
            let f = analytic_factorize(&gamma)?;
            r.count("factors", f.factors.len());
            for (k, fa) in f.factors.iter().enumerate() {
                r.field(
                    &format!("factor {k}"),
                    format!("window [{:.17e}, {:.17e}], t* = {:.17e}", fa.window.0, fa.window.1, fa.t_star),
                );
            }
            r.number("recomposition_error", f.recomposition_error);
            if let Some(p) = &c.out {
                write_file(p, &to_json(&f)?)?;
            }
        }
        Command::Plot => {
            let gamma = c.require_loop()?;
            let fmt = c.format.unwrap_or(Format::Svg);
            let body = match fmt {
                Format::Svg => render_svg(&gamma)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    gamma.write_csv(c.samples.unwrap_or(4096).max(2) - 1, &mut buf)?;
                    String::from_utf8(buf).map_err(|e| Error::Io(std::io::Error::other(e)))?
                }
                Format::Json => to_json(&gamma)?,
                Format::Text => return Err(Error::Domain("plot writes svg, csv or json".into())),
            };
            match &c.out {
                Some(p) => {
                    write_file(p, &body)?;
                    r = Report::new(c.command, c.seed, Format::Text);
                    r.field("wrote", p.display());
                }
                None => return Ok(body),
            }
        }
        Command::Probe => {
            let gamma = match &c.loop_path {
                Some(p) => read_loop(p)?,
                None => square(1.0),
            };
            let base = c.steps.unwrap_or(8);
            let ladder: Vec<usize> = (0..5).map(|k| base << k).collect();
            let algebra = c.algebra();
            let field: Connection = match &c.connection {
                Some(_) => c.connection_for(gamma.dim())?,
                None => Connection::Polynomial(random_connection(c.seed, algebra, gamma.dim(), 0, 1.0)?),
            };
            let p = convergence_order_probe(&field, &gamma, &ladder, Method::Rk4Projected)?;
            r.probe(&p);
            if gamma.dim() == 2 {
                if let Connection::Polynomial(pc) = &field {
                    if pc.degree == 0 {
                        let coords = |j: usize| -> Vec<f64> {
                            pc.coefficients[j].iter().map(|t| t.first().map_or(0.0, |t| t.value)).collect()
                        };
                        let law = curvature_law_probe(
                            pc.algebra,
                            &coords(0),
                            &coords(1),
                            &[0.1, 0.05, 0.025],
                            &c.transport(),
                        )?;
                        r.curvature(&law);
                    }
                }
            }
        }
    }
    Ok(r.finish())
}
