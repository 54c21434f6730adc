//! Command-line front end.
//!
//! Every subcommand prints a [`ReportDocument`] (text, or JSON with
//! `--json`) and exits 0 when all checks pass, 1 when a check fails and 2
//! on usage or configuration errors. `EFIMOV_LAB_THREADS` caps the worker
//! threads.
//!
//! # Expression files
//!
//! Custom metrics are UTF-8 text, one coefficient per line:
//!
//! ```text
//! # hyperbolic upper half space
//! g11 = 1 / w^2
//! g22 = 1 / w^2
//! g33 = 1 / w^2
//! range w = 0.5, 2
//! step = 1e-3
//! ```
//!
//! Entries `g11 g12 g13 g22 g23 g33` (missing off-diagonals are zero) are
//! expressions in `u, v, w` built from numbers, `+ - * / ^`, parentheses,
//! `pi`, `e` and `sin cos tan exp ln sqrt sinh cosh tanh abs`. `range x =
//! lo, hi` bounds the chart box. Profiles for `edo`/`edo7` use the same
//! grammar in the variable `s`. A division by zero at evaluation time is
//! reported with the offending point.

use crate::ambient::{ChartBox, MetricField};
use crate::asymptotics::{self, Which};
use crate::connection::{self, norm, SurfaceConnectionData};
use crate::curves::{self, RegionSpec};
use crate::error::{Error, Result};
use crate::expr::{CoefficientFile, Expr};
use crate::gallery::{self, Params, ToleranceProfile};
use crate::immersion::Vec2;
use crate::odelab::{self, Bump};
use crate::report::{Check, ReportDocument};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser, Serialize)]
#[command(name = "efimov-lab", version, about = "Numerical laboratory for immersions of negatively curved surfaces and connections with torsion")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Hypothesis verdict for pinching constants K1 < K2 <= K3.
    CheckHypothesis {
        #[arg(long, allow_hyphen_values = true)]
        k1: f64,
        #[arg(long, allow_hyphen_values = true)]
        k2: f64,
        #[arg(long, allow_hyphen_values = true)]
        k3: f64,
    },
    /// Sectional curvature range and tensor symmetries over a grid.
    CurvatureReport {
        /// Gallery metric name or path to an expression file.
        #[arg(long)]
        metric: String,
        /// `n` (cube [-1,1]^3 clipped to the chart) or `lo:hi:n,lo:hi:n,lo:hi:n`.
        #[arg(long, default_value = "5", allow_hyphen_values = true)]
        grid: String,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Write per-point values as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Geodesic of the connection `∇̃`.
    Geodesic(TraceArgs),
    /// Parallel transport along a geodesic.
    Transport {
        #[command(flatten)]
        trace: TraceArgs,
        /// Vector to transport (chart components).
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        vector: [f64; 2],
    },
    /// Jacobi-type field along a geodesic.
    Jacobi {
        #[command(flatten)]
        trace: TraceArgs,
        /// Initial `x, y, x', y'`.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true, default_value = "0,0,0,1")]
        init: [f64; 4],
    },
    /// Gauss–Bonnet residual and holonomy for a region file.
    GaussBonnet {
        #[arg(long)]
        example: String,
        #[arg(long)]
        region: PathBuf,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Asymptotic curve trace.
    Asymptotic {
        #[arg(long)]
        example: String,
        #[arg(long, value_parser = parse_which)]
        which: Which,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        start: [f64; 2],
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Asymptotic net expansion bounds.
    NetCheck {
        #[arg(long)]
        example: String,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        start: [f64; 2],
        #[arg(long)]
        lu: f64,
        #[arg(long)]
        lv: f64,
        #[arg(long, default_value_t = 10)]
        nu: usize,
        #[arg(long, default_value_t = 10)]
        nv: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
    /// Oscillating ODE solution from (y, y') = (1, u(0) + 4).
    Edo {
        /// Profile `u(s)`: a constant or an expression in `s`.
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Glued compactly supported supersolution.
    Edo7 {
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n1: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Number of test bumps for the weak inequality.
        #[arg(long, default_value_t = 50)]
        bumps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Gallery examples.
    Example {
        #[command(subcommand)]
        action: ExampleAction,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum ExampleAction {
    /// Compare an example against its closed-form reference fields.
    Verify {
        name: String,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// List example and connection names.
    List,
}

#[derive(Debug, Args, Serialize)]
pub struct TraceArgs {
    /// Connection name (see `example list`).
    #[arg(long)]
    pub example: String,
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    pub start: [f64; 2],
    /// Initial direction, normalised to unit length.
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    pub direction: [f64; 2],
    #[arg(long)]
    pub length: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in '{s}': {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_list<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let vals: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| format!("bad number in '{s}': {e}"))?;
    vals.try_into().map_err(|_| format!("expected {N} comma-separated numbers, got '{s}'"))
}

fn parse_vec2(s: &str) -> std::result::Result<[f64; 2], String> {
    parse_list::<2>(s)
}

fn parse_vec4(s: &str) -> std::result::Result<[f64; 4], String> {
    parse_list::<4>(s)
}

fn parse_which(s: &str) -> std::result::Result<Which, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn params_of(list: &[(String, f64)]) -> Params {
    list.iter().cloned().collect()
}

/// Whether an error is a usage/configuration problem (exit 2) rather than
/// a failed computation (exit 1).
fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Parse(_) | Error::Eval(_) | Error::Io(_) | Error::ParameterOutOfRange(_) | Error::InvalidPinching(_))
}

fn write_csv_file(path: &Option<PathBuf>, f: impl FnOnce(std::fs::File) -> Result<()>) -> Result<()> {
    if let Some(p) = path {
        f(std::fs::File::create(p)?)?;
    }
    Ok(())
}

fn profile(src: &str) -> Result<Expr> {
    Expr::parse(src, &["s"])
}

fn profile_fn(e: &Expr) -> impl Fn(f64) -> f64 + '_ {
    move |s| e.eval(&[s]).unwrap_or(f64::NAN)
}

fn unit_direction(data: &SurfaceConnectionData, q: &[f64; 2], d: &[f64; 2]) -> Result<Vec2> {
    let v = Vec2::new(d[0], d[1]);
    let n = norm(&data.metric3(q)?, &v);
    if !(n > 0.0) {
        return Err(Error::ParameterOutOfRange("direction must be non-zero".into()));
    }
    Ok(v / n)
}

fn metric_by_name_or_file(spec: &str, params: &Params) -> Result<(MetricField, Option<String>)> {
    let path = std::path::Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let file = CoefficientFile::parse(&text, &["u", "v", "w"])?;
        return Ok((MetricField::from_coefficients(spec, &file)?, Some(text)));
    }
    match gallery::build_example(spec, params)?.object {
        gallery::ExampleObject::Metric(m) => Ok((m, None)),
        _ => Err(Error::Config(format!("'{spec}' is not a 3D metric"))),
    }
}

fn grid_axes(spec: &str, chart: &ChartBox<3>, margin: f64) -> Result<[Vec<f64>; 3]> {
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n <= 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    if let Ok(n) = spec.trim().parse::<usize>() {
        let out: [Vec<f64>; 3] = std::array::from_fn(|i| {
            let lo = (-1.0f64).max(chart.lo[i] + 2.0 * margin);
            let hi = 1.0f64.min(chart.hi[i] - 2.0 * margin);
            axis(lo, hi, n)
        });
        return Ok(out);
    }
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("grid must be 'n' or three 'lo:hi:n' axes, got '{spec}'")));
    }
    let mut out: [Vec<f64>; 3] = Default::default();
    for (i, p) in parts.iter().enumerate() {
        let f: Vec<&str> = p.split(':').collect();
        if f.len() != 3 {
            return Err(Error::Config(format!("bad grid axis '{p}'")));
        }
        let lo: f64 = f[0].trim().parse().map_err(|_| Error::Config(format!("bad grid axis '{p}'")))?;
        let hi: f64 = f[1].trim().parse().map_err(|_| Error::Config(format!("bad grid axis '{p}'")))?;
        let n: usize = f[2].trim().parse().map_err(|_| Error::Config(format!("bad grid axis '{p}'")))?;
        out[i] = axis(lo, hi, n);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Config<'a, T: Serialize> {
    command: &'a Command,
    inputs: T,
}

fn doc<T: Serialize>(argv: &[String], cli: &Cli, inputs: T, checks: Vec<Check>) -> ReportDocument {
    ReportDocument::new(argv.to_vec(), &Config { command: &cli.command, inputs }, checks)
}

fn execute(cli: &Cli, argv: &[String]) -> Result<ReportDocument> {
    let none: Option<String> = None;
    match &cli.command {
        Command::CheckHypothesis { k1, k2, k3 } => {
            let v = connection::check_hypothesis(*k1, *k2, *k3)?;
            let checks = vec![
                Check::info("lhs", vec![v.lhs]),
                Check::info("rhs", vec![v.rhs]),
                Check::info("margin", vec![v.margin]),
                Check::info("excluded", vec![v.excluded as u8 as f64]),
            ];
            Ok(doc(argv, cli, none, checks).with_details(&v))
        }
        Command::CurvatureReport { metric, grid, params, csv } => {
            let (m, text) = metric_by_name_or_file(metric, &params_of(params))?;
            let axes = grid_axes(grid, &m.chart, m.margin())?;
            let mut pts = Vec::new();
            for &x in &axes[0] {
                for &y in &axes[1] {
                    for &z in &axes[2] {
                        pts.push([x, y, z]);
                    }
                }
            }
            for p in &pts {
                m.probe(p)?;
            }
            let rows: Vec<Result<[f64; 6]>> = pts
                .par_iter()
                .map(|p| {
                    let s = m.curvature_sample(p)?;
                    Ok([p[0], p[1], p[2], s.k_min, s.k_max, crate::jet::symmetry_residual(&s.riemann)])
                })
                .collect();
            let rows: Vec<[f64; 6]> = rows.into_iter().collect::<Result<_>>()?;
            write_csv_file(csv, |f| {
                let mut w = csv::Writer::from_writer(f);
                w.write_record(["u", "v", "w", "k_min", "k_max", "symmetry_residual"])?;
                for r in &rows {
                    w.write_record(r.map(crate::report::fmt_f64))?;
                }
                w.flush()?;
                Ok(())
            })?;
            let kmin = rows.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
            let kmax = rows.iter().map(|r| r[4]).fold(f64::NEG_INFINITY, f64::max);
            let sym = rows.iter().map(|r| r[5]).fold(0.0, f64::max);
            let checks = vec![
                Check::info("points", vec![rows.len() as f64]),
                Check::info("K_m (min over grid)", vec![kmin]),
                Check::info("K_M (max over grid)", vec![kmax]),
                Check::within("Riemann symmetry residual", sym, 1e-6),
            ];
            Ok(doc(argv, cli, text, checks))
        }
        Command::Geodesic(t) => {
            let data = gallery::connection_by_name(&t.example, &params_of(&t.params))?;
            let v = unit_direction(&data, &t.start, &t.direction)?;
            let tr = curves::integrate_geodesic(&data, &t.start, &v, t.length, t.step)?;
            write_csv_file(&t.csv, |f| tr.write_csv(f))?;
            let drift = tr.speed_drift(&data)?;
            let checks = vec![
                Check::new("complete", vec![tr.length], None, tr.left_patch.is_none()),
                Check::within("speed drift", drift, 1e-8 * t.length.max(1.0)),
                Check::info("end", tr.end().to_vec()),
                Check::info("closed", vec![tr.closed as u8 as f64]),
            ];
            Ok(doc(argv, cli, none, checks))
        }
        Command::Transport { trace: t, vector } => {
            let data = gallery::connection_by_name(&t.example, &params_of(&t.params))?;
            let v = unit_direction(&data, &t.start, &t.direction)?;
            let tr = curves::integrate_geodesic(&data, &t.start, &v, t.length, t.step)?;
            write_csv_file(&t.csv, |f| tr.write_csv(f))?;
            let w0 = Vec2::new(vector[0], vector[1]);
            let w1 = curves::parallel_transport(&data, &tr, &w0)?;
            let n0 = norm(&data.metric3(&tr.start())?, &w0);
            let n1 = norm(&data.metric3(&tr.end())?, &w1);
            let checks = vec![
                Check::new("complete", vec![tr.length], None, tr.left_patch.is_none()),
                Check::within("norm change", n1 - n0, 1e-8 * n0.max(1.0)),
                Check::info("transported", vec![w1[0], w1[1]]),
            ];
            Ok(doc(argv, cli, none, checks))
        }
        Command::Jacobi { trace: t, init } => {
            let data = gallery::connection_by_name(&t.example, &params_of(&t.params))?;
            let v = unit_direction(&data, &t.start, &t.direction)?;
            let tr = curves::integrate_geodesic(&data, &t.start, &v, t.length, t.step)?.require_complete()?;
            let j = curves::jacobi_field(&data, &tr, *init)?;
            write_csv_file(&t.csv, |f| j.write_csv(f))?;
            let last = j.samples.last().expect("sample");
            let checks = vec![
                Check::within("x' - y tau_x", j.x_residual(), 1e-6),
                Check::info("t_g (sandwich holds up to)", vec![j.sandwich_time()]),
                Check::info("end (x, y)", vec![last.x, last.y]),
            ];
            Ok(doc(argv, cli, none, checks))
        }
        Command::GaussBonnet { example, region, params, tol } => {
            let data = gallery::connection_by_name(example, &params_of(params))?;
            let text = std::fs::read_to_string(region)?;
            let spec = RegionSpec::from_json(&text)?;
            let gb = curves::gauss_bonnet(&data, &spec)?;
            let hol = curves::holonomy_defect(&data, &spec, 400)?;
            let checks = vec![
                Check::within("gauss-bonnet residual", gb.residual, *tol),
                Check::within("holonomy - integral of K~ (mod 2pi)", hol, 1e-3),
                Check::info("integral of K~", vec![gb.curvature_integral]),
                Check::info("integral of kappa", vec![gb.boundary_curvature]),
                Check::info("exterior angles", vec![gb.exterior_angles]),
            ];
            Ok(doc(argv, cli, text, checks))
        }
        Command::Asymptotic { example, which, start, length, step, params, csv } => {
            let data = gallery::connection_by_name(example, &params_of(params))?;
            let tr = asymptotics::trace_asymptotic(&data, start, *which, *length, *step)?;
            write_csv_file(csv, |f| tr.write_csv(f))?;
            let checks = vec![
                Check::new("complete", vec![tr.samples.last().map(|s| s.s).unwrap_or(0.0)], None, tr.left_patch.is_none()),
                Check::info("delta", vec![tr.delta]),
                Check::info("sigma", vec![tr.sigma]),
                Check::info("quasi-geodesic defect", vec![tr.quasi_defect]),
                Check::info("end", tr.end().to_vec()),
            ];
            Ok(doc(argv, cli, none, checks))
        }
        Command::NetCheck { example, start, lu, lv, nu, nv, tol, params } => {
            let data = gallery::connection_by_name(example, &params_of(params))?;
            let r = asymptotics::net_expansion_check(&data, start, (*lu, *lv), (*nu, *nv), *tol)?;
            let checks = vec![
                Check::new("sup |U.alpha|/alpha <= tau0 + 2 tau1", vec![r.sup_u_alpha, r.constant], Some(*tol), r.sup_u_alpha <= r.constant + tol),
                Check::new("sup |V.beta|/beta <= tau0 + 2 tau1", vec![r.sup_v_beta, r.constant], Some(*tol), r.sup_v_beta <= r.constant + tol),
                Check::new("dL/dv growth bound excess", vec![r.growth_excess], Some(*tol), r.growth_excess <= *tol),
                Check::info("tau0, tau1 (measured)", vec![r.tau0, r.tau1]),
            ];
            Ok(doc(argv, cli, none, checks).with_details(&r))
        }
        Command::Edo { u, eps, step, csv } => {
            let e = profile(u)?;
            let f = profile_fn(&e);
            let sol = odelab::solve_prop_edo(&f, *eps, *step)?;
            write_csv_file(csv, |fh| sol.write_csv(fh))?;
            let checks = vec![
                Check::new("s0 <= s1 <= pi/sqrt(eps)", vec![sol.s0, sol.s1, sol.s1_bound()], None, sol.s0 <= sol.s1 && sol.s1 <= sol.s1_bound() + 1e-9),
                Check::new("z decreasing while y > 0", vec![], None, sol.z_decreasing()),
                Check::new("M0 <= envelope bound", vec![sol.m0, sol.m0_bound()], None, sol.m0 <= sol.m0_bound()),
            ];
            Ok(doc(argv, cli, none, checks).with_details(&sol.header()))
        }
        Command::Edo7 { u, eps, n1, step, bumps, csv } => {
            let e = profile(u)?;
            let f = profile_fn(&e);
            let y = odelab::construct_edo7(&f, *eps, *n1, *step)?;
            write_csv_file(csv, |fh| y.write_csv(fh))?;
            let (lo, hi) = y.support();
            let family = Bump::family(*bumps, lo - 1.0, hi + 1.0, 4.0 * step, (hi - lo) / 2.0);
            let worst = family.iter().map(|b| y.weak_residual(&f, b)).fold(f64::INFINITY, f64::min);
            let checks = vec![
                Check::new("support within [-N1-2S1, N1+2S1]", vec![lo, hi, y.m1_support], None, lo >= -n1 - y.m1_support && hi <= n1 + y.m1_support),
                Check::new("y >= 1 on [-N1, N1]", vec![y.floor_on_core()], None, y.floor_on_core() >= 1.0 - 1e-9),
                Check::new("Lipschitz <= M1'", vec![y.lipschitz(), y.m1], None, y.lipschitz() <= y.m1),
                Check::new("y <= M1'", vec![y.max_value(), y.m1], None, y.max_value() <= y.m1),
                Check::new("weak inequality (min over bumps)", vec![worst], Some(1e-6), worst >= -1e-6),
            ];
            Ok(doc(argv, cli, none, checks))
        }
        Command::Example { action } => match action {
            ExampleAction::List => {
                let checks = vec![];
                let names = serde_json::json!({"examples": gallery::EXAMPLE_NAMES, "connections": gallery::CONNECTION_NAMES});
                Ok(doc(argv, cli, none, checks).with_details(&names))
            }
            ExampleAction::Verify { name, params, tolerance_scale } => {
                let r = gallery::verify_example(name, &params_of(params), ToleranceProfile { scale: *tolerance_scale })?;
                let checks = r.fields.iter().map(|f| Check::new(f.name.clone(), vec![f.max_abs_err], Some(f.tolerance), f.pass)).collect();
                Ok(doc(argv, cli, none, checks).with_details(&r))
            }
        },
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("EFIMOV_LAB_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            // fails harmlessly when a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

/// Runs the command line `argv` (including the program name) and returns
/// the exit code with the text destined for stdout and stderr.
pub fn run(argv: &[String]) -> (i32, String, String) {
    configure_threads();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (2, String::new(), text) };
        }
    };
    match execute(&cli, argv) {
        Ok(report) => {
            let out = if cli.json { report.to_json() + "\n" } else { report.to_text() };
            (report.exit_code(), out, String::new())
        }
        Err(e) => (if is_usage_error(&e) { 2 } else { 1 }, String::new(), format!("error: {e}\n")),
    }
}
