//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::estimates::{
    cq_closed_form, cq_integral, cq_sup, pointwise_bound, uniform_bound, ExponentPair,
};
use crate::kernel::{kernel_normalization, poisson_szego, poisson_szego_max};
use crate::sphere::{BallPoint, Method, QuadratureSpec, UnitVector, DEFAULT_NODES};
use crate::suite::{run_suite, Suite, SuiteConfig};

pub const SCHEMA: &str = "hypharm/1";
pub const THREADS_ENV: &str = "HYPHARM_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hypharm",
    version,
    about = "Sharp pointwise estimates for invariant Poisson integrals on the unit ball"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pointwise constant C_q(x) and its supremum over the ball.
    Constant(PointArgs),
    /// Right-hand factors of the pointwise and uniform bounds.
    Bound(PointArgs),
    /// Kernel values and the normalization residual at a point.
    Kernel(KernelArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Sweep a (q, |x|) grid.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Zonal,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Ball dimension (at least 3).
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Zonal)]
    pub method: MethodArg,
    /// Quadrature nodes, or samples for Monte Carlo.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Include wall time in JSON reports (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct Exponents {
    /// Integrability exponent p in (1, inf].
    #[arg(long, conflicts_with = "q")]
    pub p: Option<f64>,
    /// Conjugate exponent q in [1, inf).
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Location {
    /// Distance of x from the origin, in [0, 1).
    #[arg(long, conflicts_with = "coords")]
    pub radius: Option<f64>,
    /// Coordinate axis (0-based) carrying x; defaults to the last one.
    #[arg(long, conflicts_with = "coords")]
    pub axis: Option<usize>,
    /// Explicit coordinates of x, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coords: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub exponents: Exponents,
    #[command(flatten)]
    pub location: Location,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub location: Location,
    /// Boundary point, comma separated (normalized on input).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub zeta: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub exponents: Exponents,
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Restrict radius-dependent checks to this |x|.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "1.5,2,3,5")]
    pub q_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,0.9")]
    pub radii: Vec<f64>,
}

impl Common {
    fn spec(&self) -> Result<QuadratureSpec> {
        let spec = match self.method {
            MethodArg::Zonal => QuadratureSpec::zonal(self.nodes),
            MethodArg::MonteCarlo => QuadratureSpec::monte_carlo(self.nodes, self.seed),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn check_n(&self) -> Result<()> {
        crate::sphere::check_dim(self.n)
    }
}

impl Exponents {
    fn pair(&self) -> Result<Option<ExponentPair>> {
        match (self.p, self.q) {
            (Some(p), None) => ExponentPair::from_p(p).map(Some),
            (None, Some(q)) => ExponentPair::from_q(q).map(Some),
            (None, None) => Ok(None),
            (Some(_), Some(_)) => Err(Error::Config("give exactly one of --p and --q".into())),
        }
    }

    fn required(&self) -> Result<ExponentPair> {
        self.pair()?
            .ok_or_else(|| Error::Config("one of --p or --q is required".into()))
    }
}

impl Location {
    fn point(&self, n: usize) -> Result<BallPoint> {
        if let Some(c) = &self.coords {
            if c.len() != n {
                return Err(Error::Config(format!(
                    "--coords has {} entries but --n is {n}",
                    c.len()
                )));
            }
            return BallPoint::new(c.clone());
        }
        let radius = self.radius.unwrap_or(0.0);
        check_radius(radius)?;
        let axis = self.axis.unwrap_or(n - 1);
        if axis >= n {
            return Err(Error::Config(format!(
                "--axis must be below {n}, got {axis}"
            )));
        }
        BallPoint::on_axis(n, radius, axis)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Config(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

fn exponent_json(e: &ExponentPair) -> Value {
    serde_json::to_value(e).expect("exponents serialize")
}

fn method_name(spec: &QuadratureSpec) -> &'static str {
    match spec.method {
        Method::ZonalGaussLegendre => "zonal",
        Method::MonteCarlo => "monte-carlo",
    }
}

/// Shared report envelope.
fn envelope(
    command: &str,
    inputs: Value,
    spec: &QuadratureSpec,
    result: Value,
    error_estimate: f64,
) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("inputs".into(), inputs);
    m.insert("method".into(), json!(method_name(spec)));
    m.insert("nodes".into(), json!(spec.nodes));
    if spec.method == Method::MonteCarlo {
        m.insert("seed".into(), json!(spec.seed));
    }
    m.insert("result".into(), result);
    m.insert("error_estimate".into(), json!(error_estimate));
    m
}

fn point_inputs(common: &Common, exps: Option<&ExponentPair>, x: &BallPoint) -> Value {
    let mut m = Map::new();
    m.insert("n".into(), json!(common.n));
    if let Some(e) = exps {
        m.insert("exponents".into(), exponent_json(e));
    }
    m.insert("x".into(), json!(x.coords()));
    m.insert("radius".into(), json!(x.norm()));
    Value::Object(m)
}

/// Flattens a JSON object into `key,value` lines.
fn flat_csv(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, v) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            Value::Array(a) if a.iter().all(|e| !e.is_object()) => {
                let items: Vec<String> = a.iter().map(|e| e.to_string()).collect();
                out.push_str(&format!("{prefix},\"{}\"\n", items.join(" ")));
            }
            Value::Array(a) => {
                for (i, v) in a.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), v, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix},{s}\n")),
            other => out.push_str(&format!("{prefix},{other}\n")),
        }
    }
    let mut out = String::from("key,value\n");
    walk("", value, &mut out);
    out
}

struct Report {
    body: Map<String, Value>,
    csv: Option<String>,
    exit: i32,
}

fn constant(args: &PointArgs) -> Result<Report> {
    let c = &args.common;
    c.check_n()?;
    let spec = c.spec()?;
    let e = args.exponents.required()?;
    let x = args.location.point(c.n)?;
    let (cq, sup, quad) = if e.is_sup_endpoint() {
        (1.0, 1.0, crate::sphere::Estimate::exact(1.0))
    } else {
        (
            cq_closed_form(e.q, &x)?,
            cq_sup(e.q, c.n)?,
            cq_integral(e.q, &x, &spec)?,
        )
    };
    let err = match spec.method {
        Method::ZonalGaussLegendre => (quad.value - cq).abs(),
        Method::MonteCarlo => quad.stderr,
    };
    let result = json!({
        "C_q_x": cq,
        "C_q_sup": sup,
        "C_q_x_quadrature": quad.value,
        "C_q_x_quadrature_stderr": quad.stderr,
    });
    Ok(Report {
        body: envelope(
            "constant",
            point_inputs(c, Some(&e), &x),
            &spec,
            result,
            err,
        ),
        csv: None,
        exit: EXIT_OK,
    })
}

fn bound(args: &PointArgs) -> Result<Report> {
    let c = &args.common;
    c.check_n()?;
    let spec = c.spec()?;
    let e = args.exponents.required()?;
    let x = args.location.point(c.n)?;
    let (cq, sup) = if e.is_sup_endpoint() {
        (1.0, 1.0)
    } else {
        (cq_closed_form(e.q, &x)?, cq_sup(e.q, c.n)?)
    };
    let result = json!({
        "C_q_x": cq,
        "C_q_sup": sup,
        "bound_pointwise": pointwise_bound(&e, &x)?,
        "bound_uniform": uniform_bound(&e, &x)?,
    });
    Ok(Report {
        body: envelope("bound", point_inputs(c, Some(&e), &x), &spec, result, 0.0),
        csv: None,
        exit: EXIT_OK,
    })
}

fn kernel(args: &KernelArgs) -> Result<Report> {
    let c = &args.common;
    c.check_n()?;
    let spec = c.spec()?;
    let x = args.location.point(c.n)?;
    let norm = kernel_normalization(&x, &spec)?;
    let mut result = Map::new();
    let mut inputs = point_inputs(c, None, &x);
    if let Some(z) = &args.zeta {
        if z.len() != c.n {
            return Err(Error::Config(format!(
                "--zeta has {} entries but --n is {}",
                z.len(),
                c.n
            )));
        }
        let zeta = UnitVector::new(z.clone())?;
        inputs["zeta"] = json!(zeta.coords());
        result.insert("P_h".into(), json!(poisson_szego(&x, &zeta)));
    }
    result.insert("P_h_max".into(), json!(poisson_szego_max(&x)));
    result.insert("normalization".into(), json!(norm.value));
    result.insert("normalization_stderr".into(), json!(norm.stderr));
    let residual = (norm.value - 1.0).abs();
    result.insert("normalization_residual".into(), json!(residual));
    let err = match spec.method {
        Method::ZonalGaussLegendre => residual,
        Method::MonteCarlo => norm.stderr,
    };
    Ok(Report {
        body: envelope("kernel", inputs, &spec, Value::Object(result), err),
        csv: None,
        exit: EXIT_OK,
    })
}

fn verify(args: &VerifyArgs) -> Result<Report> {
    let c = &args.common;
    c.check_n()?;
    let spec = c.spec()?;
    let suite: Suite = args.suite.parse()?;
    let exps = args.exponents.pair()?;
    if let Some(r) = args.radius {
        check_radius(r)?;
    }
    let cfg = SuiteConfig {
        n: c.n,
        exponents: exps,
        radius: args.radius,
        spec,
    };
    let checks = run_suite(suite, &cfg)?;
    let failed = checks.iter().filter(|r| !r.passed).count();
    let worst = checks
        .iter()
        .filter(|r| r.tolerance > 0.0)
        .map(|r| r.measured / r.tolerance)
        .fold(0.0, f64::max);
    let mut inputs = Map::new();
    inputs.insert("n".into(), json!(c.n));
    inputs.insert("suite".into(), json!(suite.name()));
    if let Some(e) = &exps {
        inputs.insert("exponents".into(), exponent_json(e));
    }
    if let Some(r) = args.radius {
        inputs.insert("radius".into(), json!(r));
    }
    let result = json!({
        "passed": failed == 0,
        "checks_total": checks.len(),
        "checks_failed": failed,
        "checks": checks,
    });
    let csv = {
        let mut s = String::from("suite,name,passed,measured,tolerance\n");
        for r in &checks {
            s.push_str(&format!(
                "{},\"{}\",{},{},{}\n",
                r.suite, r.name, r.passed, r.measured, r.tolerance
            ));
        }
        s
    };
    Ok(Report {
        body: envelope("verify", Value::Object(inputs), &spec, result, worst),
        csv: Some(csv),
        exit: if failed == 0 {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        },
    })
}

pub const TABLE_COLUMNS: [&str; 8] = [
    "n",
    "q",
    "p",
    "radius",
    "C_q_x",
    "C_q_sup",
    "bound_pointwise",
    "bound_uniform",
];

fn table(args: &TableArgs) -> Result<Report> {
    let c = &args.common;
    c.check_n()?;
    let spec = c.spec()?;
    for &r in &args.radii {
        check_radius(r)?;
    }
    let cells: Vec<(f64, f64)> = args
        .q_values
        .iter()
        .flat_map(|&q| args.radii.iter().map(move |&r| (q, r)))
        .collect();
    let n = c.n;
    // collect() on an indexed parallel iterator keeps grid order.
    let rows: Vec<[f64; 8]> = cells
        .par_iter()
        .map(|&(q, r)| -> Result<[f64; 8]> {
            let e = ExponentPair::from_q(q)?;
            let x = BallPoint::on_axis(n, r, n - 1)?;
            let (cq, sup) = if e.is_sup_endpoint() {
                (1.0, 1.0)
            } else {
                (cq_closed_form(q, &x)?, cq_sup(q, n)?)
            };
            Ok([
                n as f64,
                q,
                e.p,
                r,
                cq,
                sup,
                pointwise_bound(&e, &x)?,
                uniform_bound(&e, &x)?,
            ])
        })
        .collect::<Result<_>>()?;
    let mut csv = TABLE_COLUMNS.join(",");
    csv.push('\n');
    for row in &rows {
        let cols: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if i == 0 {
                    format!("{}", *v as usize)
                } else {
                    format!("{v}")
                }
            })
            .collect();
        csv.push_str(&cols.join(","));
        csv.push('\n');
    }
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (k, v) in TABLE_COLUMNS.iter().zip(row) {
                let v = if *k == "p" && v.is_infinite() {
                    json!("inf")
                } else {
                    json!(v)
                };
                m.insert((*k).into(), v);
            }
            Value::Object(m)
        })
        .collect();
    let inputs = json!({ "n": n, "q_values": args.q_values, "radii": args.radii });
    Ok(Report {
        body: envelope("table", inputs, &spec, json!({ "rows": json_rows }), 0.0),
        csv: Some(csv),
        exit: EXIT_OK,
    })
}

fn dispatch(cli: &Cli) -> Result<(Report, &Common, Format)> {
    let (report, common, default) = match &cli.command {
        Command::Constant(a) => (constant(a)?, &a.common, Format::Json),
        Command::Bound(a) => (bound(a)?, &a.common, Format::Json),
        Command::Kernel(a) => (kernel(a)?, &a.common, Format::Json),
        Command::Verify(a) => (verify(a)?, &a.common, Format::Json),
        Command::Table(a) => (table(a)?, &a.common, Format::Csv),
    };
    let format = common.format.unwrap_or(default);
    Ok((report, common, format))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))
        })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Parses `args` (including the program name), runs the command and writes
/// the report. Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_INVALID
                }
            };
        }
    };
    let started = Instant::now();
    let outcome = thread_pool().and_then(|pool| pool.install(|| dispatch(&cli)));
    let (mut report, common, format) = match outcome {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let text = match format {
        Format::Json => {
            if common.timing {
                report
                    .body
                    .insert("wall_time_s".into(), json!(started.elapsed().as_secs_f64()));
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(report.body))
                .expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => report
            .csv
            .take()
            .unwrap_or_else(|| flat_csv(&Value::Object(report.body))),
    };
    let written = match &common.output {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INVALID;
    }
    report.exit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("hypharm").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    fn json_of(args: &[&str]) -> Value {
        let (code, out, err) = run_capture(args);
        assert_eq!(code, 0, "{err}");
        serde_json::from_str(&out).unwrap()
    }

    #[test]
    fn constant_q2_half_radius() {
        let v = json_of(&["constant", "--n", "3", "--q", "2", "--radius", "0.5"]);
        assert_eq!(v["schema"], SCHEMA);
        let c = v["result"]["C_q_x"].as_f64().unwrap();
        assert!((c - 1.895_833_333_333_333).abs() < 1e-13);
        assert!((v["result"]["C_q_sup"].as_f64().unwrap() - 16.0 / 3.0).abs() < 1e-13);
        assert_eq!(v["method"], "zonal");
        assert_eq!(v["nodes"], 200);
        assert!(v.get("wall_time_s").is_none());
    }

    #[test]
    fn constant_at_origin() {
        let v = json_of(&["constant", "--n", "3", "--q", "2", "--radius", "0"]);
        assert_eq!(v["result"]["C_q_x"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn sup_endpoint_constants_are_one() {
        let v = json_of(&["bound", "--n", "4", "--p", "inf", "--radius", "0.7"]);
        assert_eq!(v["inputs"]["exponents"]["p"], "inf");
        assert_eq!(v["result"]["bound_pointwise"].as_f64().unwrap(), 1.0);
        assert_eq!(v["result"]["bound_uniform"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn bound_values() {
        let v = json_of(&["bound", "--p", "2", "--radius", "0.5"]);
        let pb = v["result"]["bound_pointwise"].as_f64().unwrap();
        assert!((pb - (91.0f64 / 48.0).sqrt() / 0.75).abs() < 1e-13);
    }

    #[test]
    fn kernel_report() {
        let v = json_of(&["kernel", "--coords", "0,0,0.5", "--zeta", "0,0,2"]);
        assert!((v["result"]["P_h"].as_f64().unwrap() - 9.0).abs() < 1e-13);
        assert!(v["result"]["normalization_residual"].as_f64().unwrap() < 1e-12);
    }

    #[test]
    fn verify_sharpness_passes() {
        let v = json_of(&[
            "verify",
            "--n",
            "3",
            "--suite",
            "sharpness",
            "--p",
            "2",
            "--radius",
            "0.5",
        ]);
        assert_eq!(v["result"]["passed"], true);
        let detail = v["result"]["checks"][0]["measured"].as_f64().unwrap();
        assert!(detail <= 1e-8);
    }

    #[test]
    fn verify_failure_exit_code() {
        // Halving ratio and residual bound are not met in five dimensions.
        let (code, out, _) = run_capture(&["verify", "--n", "5", "--suite", "harmonicity"]);
        assert_eq!(code, EXIT_VERIFY_FAILED);
        assert!(out.contains("\"passed\": false"));
    }

    #[test]
    fn validation_errors_exit_one() {
        for args in [
            vec!["constant", "--n", "2", "--q", "2"],
            vec!["constant", "--q", "2", "--radius", "1"],
            vec!["constant", "--radius", "0.5"],
            vec!["constant", "--p", "2", "--q", "2"],
            vec!["constant", "--q", "0.5"],
            vec!["constant", "--q", "2", "--coords", "0.1,0.2"],
            vec!["verify", "--suite", "nope"],
            vec!["table", "--radii", "0.5,1.2"],
            vec!["constant", "--q", "2", "--method", "zonal", "--nodes", "1"],
            vec!["frobnicate"],
        ] {
            let (code, _, err) = run_capture(&args);
            assert_eq!(code, EXIT_INVALID, "{args:?}");
            assert!(!err.is_empty());
        }
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("constant"));
    }

    #[test]
    fn table_csv_layout() {
        let (code, out, _) = run_capture(&["table", "--q-values", "1,2", "--radii", "0,0.5"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(
            lines[0],
            "n,q,p,radius,C_q_x,C_q_sup,bound_pointwise,bound_uniform"
        );
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("3,1,inf,0,1,1,1,1"));
        assert!(lines[4].starts_with("3,2,2,0.5,1.8958333333333"));
    }

    #[test]
    fn timing_is_opt_in() {
        let v = json_of(&["constant", "--q", "2", "--timing"]);
        assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);
    }
}
