//! `selfcontract`: check, measure, generate and plot self-contracted curves.
//!
//! Exit codes: 0 when the checked property holds, 1 when it is violated
//! (the witness is printed), 2 on malformed input or usage errors.

mod spec;
mod svg;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use selfcontract::curves::{
    check_halfspace_property, is_self_contracted, is_self_expanded, length, secant_cone_check, tail_width_profile,
    DiscreteCurve, PredicateVerdict, ToleranceConfig,
};
use selfcontract::foliation::{decreasing_level_check, gradient_flow_curve, polygonal_approximation, sublevel_projection_orbit};
use selfcontract::generate::{random_psd_quadratic, random_schedule, random_start, random_walk};
use selfcontract::geom::{mean_width, ConvexBody, SphereSampler};
use selfcontract::io::{curve_to_csv, parse_curve_csv, parse_trace_json, trace_to_json, TraceFile};
use selfcontract::prox::{
    run_prox, trace_to_curve, verify_convergence_bound, verify_descent, verify_monotone_distances, verify_optimality,
    verify_projection_property, ConvexFunction, ProxConfig, Quadratic,
};
use selfcontract::spherelemmas::verify_length_bound;
use selfcontract::{Error, Point};

const SEED_ENV: &str = "SELFCONTRACT_SEED";
/// Upper limits that keep a typo from exhausting memory.
const MAX_SAMPLES: usize = 10_000_000;
const MAX_VERTICES: usize = 10_000_000;
/// Sublevel points drawn per step when testing the projection property.
const PROJECTION_SAMPLES: usize = 100;
/// Slack for optimality conditions, which inherit the prox solver residual.
const OPTIMALITY_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "selfcontract", version, about = "Self-contracted curves: checks, bounds, proximal traces and plots")]
struct Cli {
    /// RNG seed; SELFCONTRACT_SEED overrides it
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Monte-Carlo direction count
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: usize,
    /// Absolute tolerance
    #[arg(long, global = true, default_value_t = 1e-9, allow_negative_numbers = true)]
    tol: f64,
    /// Relative margin for strict conditions
    #[arg(long, global = true, default_value_t = 1e-6, allow_negative_numbers = true)]
    margin: f64,
    /// Ambient dimension (generators); checked against inputs when given
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Output file for the produced artifact (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// self-contracted
    Sc,
    /// self-expanded
    Se,
    /// strongly self-contracted (secant cone test)
    Strong,
    /// half-space property
    Halfspace,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    ProxPolyline,
    FlowCurve,
    RandomWalk,
}

#[derive(Subcommand)]
enum Command {
    /// Test a curve for a self-contractedness property
    Check {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "sc")]
        mode: Mode,
    },
    /// Polygonal length
    Length { input: PathBuf },
    /// Mean width of the convex hull of the vertices
    Meanwidth { input: PathBuf },
    /// Length against the mean-width and diameter bounds
    Bound { input: PathBuf },
    /// Run the proximal point algorithm and verify the trace
    Prox {
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value = "constant:1")]
        schedule: String,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Stop once a step moves less than this
        #[arg(long, default_value_t = 0.0)]
        stop_step: f64,
    },
    /// Project successively onto decreasing sublevel sets
    Foliate {
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        /// Strictly decreasing comma-separated levels
        #[arg(long, allow_hyphen_values = true)]
        levels: String,
    },
    /// Self-contracted polygonal approximation of a strongly self-contracted curve
    Approx {
        input: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Generate a curve
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long, default_value_t = 30)]
        iters: usize,
        /// Random-walk steps
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Flow step size
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Flow time horizon
        #[arg(long, default_value_t = 5.0)]
        horizon: f64,
    },
    /// Render a curve or trace as SVG
    Plot {
        input: PathBuf,
        /// Second curve drawn on top, e.g. an approximation
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Annotate vertices with tail-hull mean widths
        #[arg(long)]
        widths: bool,
    },
}

enum Failure {
    Usage(String),
    Violated(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotSelfContracted { .. } | Error::NotStronglySelfContracted { .. } | Error::NoAdmissibleVertex { .. } => {
                Failure::Violated(format!("VIOLATED: {e}"))
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// What a command produced: report lines, an optional artifact for `--out`,
/// and whether every checked property held.
struct Report {
    lines: Vec<String>,
    artifact: Option<String>,
    holds: bool,
}

impl Report {
    fn new() -> Self {
        Report { lines: Vec::new(), artifact: None, holds: true }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn verdict(&mut self, name: &str, v: &PredicateVerdict) {
        self.holds &= v.holds;
        match v.witness {
            None => self.line(format!("{name}: HOLDS (margin {})", num(v.margin))),
            Some(w) => self.line(format!("{name}: VIOLATED witness {w}")),
        }
    }
}

/// Nine significant digits, exponent form outside `[1e-4, 1e9)`.
fn num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if r == 0.0 || (1e-4..1e9).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn point_str(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|c| num(*c)).collect();
    format!("({})", parts.join(", "))
}

struct Settings {
    seed: u64,
    samples: usize,
    tol: ToleranceConfig,
    dim: Option<usize>,
}

impl Settings {
    fn sampler(&self) -> Result<SphereSampler, Failure> {
        if self.samples > MAX_SAMPLES {
            return Err(usage(format!("--samples {} exceeds {MAX_SAMPLES}", self.samples)));
        }
        Ok(SphereSampler::new(self.seed, self.samples)?)
    }

    fn check_dim(&self, found: usize) -> Result<(), Failure> {
        match self.dim {
            Some(n) if n != found => Err(usage(format!("input has dimension {found}, --dim says {n}"))),
            _ => Ok(()),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// A curve from CSV, or from trace JSON together with its values.
fn read_input(path: &Path) -> Result<(DiscreteCurve, Option<Vec<f64>>), Failure> {
    let text = read_text(path)?;
    let located = |e: Error| usage(format!("{}: {e}", path.display()));
    if is_json(&text) {
        let file = parse_trace_json(&text).map_err(located)?;
        let values = (!file.values.is_empty()).then(|| file.values.clone());
        Ok((file.curve().map_err(located)?, values))
    } else {
        Ok((parse_curve_csv(&text).map_err(located)?, None))
    }
}

fn read_curve(path: &Path, settings: &Settings) -> Result<DiscreteCurve, Failure> {
    let (curve, _) = read_input(path)?;
    settings.check_dim(curve.dim())?;
    Ok(curve)
}

fn load_function(spec_str: &str, x0: &Point) -> Result<Box<dyn ConvexFunction>, Failure> {
    let f = spec::parse_function(spec_str, Some(x0.dim())).map_err(usage)?;
    if f.dim() != x0.dim() {
        return Err(usage(format!("x0 has dimension {}, function expects {}", x0.dim(), f.dim())));
    }
    Ok(f)
}

fn cmd_check(curve: &DiscreteCurve, mode: Mode, tol: &ToleranceConfig) -> Report {
    let (name, v) = match mode {
        Mode::Sc => ("self-contracted", is_self_contracted(curve, tol)),
        Mode::Se => ("self-expanded", is_self_expanded(curve, tol)),
        Mode::Strong => ("strongly self-contracted", secant_cone_check(curve, tol)),
        Mode::Halfspace => ("half-space property", check_halfspace_property(curve, tol)),
    };
    let mut r = Report::new();
    r.holds = v.holds;
    match v.witness {
        None => r.line(format!("HOLDS: {name} (margin {})", num(v.margin))),
        Some(w) => r.line(format!(
            "VIOLATED: {name}, witness ({}, {}, {}), violation {}",
            w.indices[0],
            w.indices[1],
            w.indices[2],
            num(w.violation)
        )),
    }
    r
}

fn cmd_bound(curve: &DiscreteCurve, s: &Settings) -> Result<Report, Failure> {
    let rep = verify_length_bound(curve, &s.sampler()?, &s.tol)?;
    let mut r = Report::new();
    let w = rep.mean_width;
    r.line(format!("length {}", num(rep.length)));
    r.line(format!("mean width {} ± {} ({} directions)", num(w.value), num(w.standard_error), w.samples));
    r.line(format!("diameter {}", num(rep.diameter)));
    r.line(format!("C_n {}", num(rep.c_n)));
    r.line(format!("ratio length/width {}", num(rep.ratio)));
    let mark = |ok: bool| if ok { "HOLDS" } else { "VIOLATED" };
    r.line(format!(
        "mean-width bound: length <= C_n·W = {}: {}",
        num(rep.c_n * w.value),
        mark(rep.holds)
    ));
    r.line(format!(
        "diameter bound: length <= C_n·diam = {}: {}",
        num(rep.c_n * rep.diameter),
        mark(rep.diameter_bound_holds)
    ));
    r.holds = rep.holds && rep.diameter_bound_holds;
    Ok(r)
}

fn cmd_prox(
    function: &str,
    x0: &str,
    schedule: &str,
    iters: usize,
    stop_step: f64,
    s: &Settings,
) -> Result<Report, Failure> {
    let x0 = spec::parse_point(x0).map_err(usage)?;
    s.check_dim(x0.dim())?;
    let f = load_function(function, &x0)?;
    let schedule = spec::parse_schedule(schedule).map_err(usage)?;
    if iters > MAX_VERTICES {
        return Err(usage(format!("--iters {iters} exceeds {MAX_VERTICES}")));
    }
    if !(stop_step >= 0.0 && stop_step.is_finite()) {
        return Err(usage("--stop-step must be finite and >= 0"));
    }
    let config = ProxConfig { max_iter: iters, stop_step, ..Default::default() };
    let trace = run_prox(f.as_ref(), &x0, &schedule, &config)?;

    let mut r = Report::new();
    let last = trace.last();
    r.line(format!("function {}", f.name()));
    r.line(format!("iterations {}, terminated by {:?}", trace.points.len() - 1, trace.terminated_by));
    r.line(format!("limit estimate {}", point_str(last)));
    r.line(format!("value at limit {}", num(f.value(last))));
    if let Some(g) = f.min_norm_subgradient(last) {
        let g = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        let kind = if g <= OPTIMALITY_TOL { "critical" } else { "noncritical" };
        r.line(format!("limit {kind}: |subgrad|min = {}", num(g)));
    }

    let tol = s.tol.abs_tol;
    r.verdict("self-contracted polyline", &is_self_contracted(&trace_to_curve(&trace), &s.tol));
    r.verdict("monotone distances", &verify_monotone_distances(&trace, tol));
    r.verdict("descent", &verify_descent(&trace, tol));
    match verify_optimality(&trace, f.as_ref(), OPTIMALITY_TOL) {
        Some(v) => r.verdict("optimality", &v),
        None => r.line("optimality: not available for this function"),
    }
    let proj = verify_projection_property(&trace, f.as_ref(), s.seed, PROJECTION_SAMPLES, tol);
    r.verdict(&format!("projection property ({} points)", proj.tested), &proj.verdict);
    if trace.points.len() >= 2 {
        let c = verify_convergence_bound(&trace, tol)?;
        r.line(format!(
            "step sum {}, radius {}, step-sum ratio {} (bound 2·C_n = {})",
            num(c.total_step_sum),
            num(c.radius),
            num(c.ratio),
            num(if c.radius > 0.0 { c.bound / c.radius } else { f64::NAN })
        ));
        let ok = c.holds && c.radius_holds;
        r.holds &= ok;
        r.line(format!(
            "convergence bound: {}",
            if c.inconclusive {
                "VIOLATED (start equals limit estimate)"
            } else if ok {
                "HOLDS"
            } else {
                "VIOLATED"
            }
        ));
    } else {
        r.line("step-sum ratio: no steps taken");
    }
    r.artifact = Some(trace_to_json(&TraceFile::from_trace(&trace)));
    Ok(r)
}

fn cmd_foliate(function: &str, x0: &str, levels: &str, s: &Settings) -> Result<Report, Failure> {
    let x0 = spec::parse_point(x0).map_err(usage)?;
    s.check_dim(x0.dim())?;
    let f = load_function(function, &x0)?;
    let levels = spec::parse_point(levels).map_err(|e| usage(format!("levels: {e}")))?;
    let tol = s.tol.abs_tol.max(1e-12);
    let orbit = sublevel_projection_orbit(f.as_ref(), &x0, &levels, tol)?;
    let mut r = Report::new();
    r.line(format!("vertices {}", orbit.curve.len()));
    r.line(format!("end point {}", point_str(orbit.curve.last())));
    r.verdict("levels", &decreasing_level_check(&orbit, f.as_ref(), tol.max(1e-9)));
    r.verdict("self-contracted", &is_self_contracted(&orbit.curve, &s.tol));
    r.artifact = Some(trace_to_json(&TraceFile::from_orbit(&orbit)));
    Ok(r)
}

fn cmd_approx(curve: &DiscreteCurve, delta: f64, s: &Settings) -> Result<Report, Failure> {
    let res = polygonal_approximation(curve, delta, &s.tol)?;
    let mut r = Report::new();
    r.line(format!("vertices {} of {}", res.polyline.len(), curve.len()));
    let ok = res.hausdorff_achieved <= delta + s.tol.abs_tol;
    r.holds &= ok;
    r.line(format!(
        "hausdorff {} vs accuracy {}: {}",
        num(res.hausdorff_achieved),
        num(delta),
        if ok { "HOLDS" } else { "VIOLATED" }
    ));
    r.verdict("self-contracted", &is_self_contracted(&res.polyline, &s.tol));
    r.artifact = Some(curve_to_csv(&res.polyline));
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    kind: GenKind,
    function: Option<&str>,
    schedule: Option<&str>,
    x0: Option<&str>,
    iters: usize,
    steps: usize,
    h: f64,
    horizon: f64,
    s: &Settings,
) -> Result<Report, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let x0 = x0.map(spec::parse_point).transpose().map_err(usage)?;
    let dim = match (&x0, s.dim) {
        (Some(p), Some(n)) if p.dim() != n => return Err(usage(format!("x0 has dimension {}, --dim says {n}", p.dim()))),
        (Some(p), _) => p.dim(),
        (None, n) => n.unwrap_or(2),
    };
    if dim == 0 {
        return Err(usage("--dim must be positive"));
    }
    let curve = match kind {
        GenKind::ProxPolyline => {
            if iters == 0 || iters > MAX_VERTICES {
                return Err(usage(format!("--iters must lie in 1..={MAX_VERTICES}")));
            }
            let f: Box<dyn ConvexFunction> = match function {
                Some(spec_str) => spec::parse_function(spec_str, Some(dim)).map_err(usage)?,
                None => Box::new(random_psd_quadratic(dim, &mut rng)),
            };
            if f.dim() != dim {
                return Err(usage(format!("function has dimension {}, expected {dim}", f.dim())));
            }
            let schedule = match schedule {
                Some(sch) => spec::parse_schedule(sch).map_err(usage)?,
                None => random_schedule(iters, &mut rng),
            };
            let x0 = x0.unwrap_or_else(|| random_start(dim, 3.0, &mut rng));
            let trace = run_prox(f.as_ref(), &x0, &schedule, &ProxConfig { max_iter: iters, ..Default::default() })?;
            trace_to_curve(&trace)
        }
        GenKind::FlowCurve => {
            if !(h > 0.0 && horizon >= 0.0 && h.is_finite() && horizon.is_finite()) {
                return Err(usage("--h must be positive and --horizon nonnegative"));
            }
            if horizon / h > MAX_VERTICES as f64 {
                return Err(usage(format!("--horizon/--h exceeds {MAX_VERTICES} steps")));
            }
            let f: Box<dyn ConvexFunction> = match function {
                Some(spec_str) => spec::parse_function(spec_str, Some(dim)).map_err(usage)?,
                None => Box::new(Quadratic::diagonal(&vec![1.0; dim])?),
            };
            if f.dim() != dim {
                return Err(usage(format!("function has dimension {}, expected {dim}", f.dim())));
            }
            let x0 = x0.unwrap_or_else(|| random_start(dim, 3.0, &mut rng));
            gradient_flow_curve(f.as_ref(), &x0, h, horizon)?
        }
        GenKind::RandomWalk => {
            if steps > MAX_VERTICES {
                return Err(usage(format!("--steps exceeds {MAX_VERTICES}")));
            }
            random_walk(dim, steps, &mut rng)
        }
    };
    let mut r = Report::new();
    r.line(format!("generated {} vertices in dimension {}", curve.len(), curve.dim()));
    r.artifact = Some(curve_to_csv(&curve));
    Ok(r)
}

fn cmd_plot(input: &Path, overlay: Option<&Path>, widths: bool, s: &Settings) -> Result<Report, Failure> {
    let (curve, values) = read_input(input)?;
    s.check_dim(curve.dim())?;
    let over = overlay.map(read_input).transpose()?.map(|(c, _)| c);
    if let Some(o) = &over {
        if o.dim() != curve.dim() {
            return Err(usage(format!("overlay has dimension {}, input {}", o.dim(), curve.dim())));
        }
    }
    let tail = if widths { Some(tail_width_profile(&curve, &s.sampler()?)?.values()) } else { None };
    let svg = svg::render(&svg::Plot {
        curve: Some(&curve),
        overlay: over.as_ref(),
        values: values.as_deref(),
        widths: tail.as_deref(),
    });
    let mut r = Report::new();
    r.line(format!("plotted {} vertices", curve.len()));
    r.artifact = Some(svg);
    Ok(r)
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let seed = match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}={v:?} is not a 64-bit unsigned integer")))?,
        Err(_) => cli.seed,
    };
    let s = Settings {
        seed,
        samples: cli.samples,
        tol: ToleranceConfig::new(cli.tol, cli.margin)?,
        dim: cli.dim,
    };
    match cli.command {
        Command::Check { input, mode } => Ok(cmd_check(&read_curve(&input, &s)?, mode, &s.tol)),
        Command::Length { input } => {
            let mut r = Report::new();
            r.line(num(length(&read_curve(&input, &s)?)));
            Ok(r)
        }
        Command::Meanwidth { input } => {
            let curve = read_curve(&input, &s)?;
            let w = mean_width(&ConvexBody::point_cloud(curve.into_points())?, &s.sampler()?)?;
            let mut r = Report::new();
            r.line(format!("{} ± {} ({} directions, seed {})", num(w.value), num(w.standard_error), w.samples, s.seed));
            Ok(r)
        }
        Command::Bound { input } => cmd_bound(&read_curve(&input, &s)?, &s),
        Command::Prox { function, x0, schedule, iters, stop_step } => {
            cmd_prox(&function, &x0, &schedule, iters, stop_step, &s)
        }
        Command::Foliate { function, x0, levels } => cmd_foliate(&function, &x0, &levels, &s),
        Command::Approx { input, delta } => cmd_approx(&read_curve(&input, &s)?, delta, &s),
        Command::Gen { kind, function, schedule, x0, iters, steps, h, horizon } => cmd_gen(
            kind,
            function.as_deref(),
            schedule.as_deref(),
            x0.as_deref(),
            iters,
            steps,
            h,
            horizon,
            &s,
        ),
        Command::Plot { input, overlay, widths } => cmd_plot(&input, overlay.as_deref(), widths, &s),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(report) => {
            // the report shares stdout only when the artifact goes to a file
            let artifact_on_stdout = report.artifact.is_some() && out.is_none();
            if let (Some(artifact), Some(path)) = (&report.artifact, &out) {
                if let Err(e) = fs::write(path, artifact) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            if artifact_on_stdout {
                let _ = lock.write_all(report.artifact.as_deref().unwrap_or_default().as_bytes());
                for l in &report.lines {
                    eprintln!("{l}");
                }
            } else {
                for l in &report.lines {
                    let _ = writeln!(lock, "{l}");
                }
            }
            ExitCode::from(if report.holds { 0 } else { 1 })
        }
        Err(Failure::Violated(msg)) => {
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
