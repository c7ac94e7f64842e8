//! `hyperlattice` command line: counts, angle samples, ECDF and density
//! curves, sector counts, Kloosterman tables and the self-check.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or runtime error.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arith::{weil_bound, KloostermanTable};
use crate::format::{FlatJson, Table, TableFormat};
use crate::geometry::{distance_from_norm_sq, NormalizedTarget, Point};
use crate::group::{
    collect_angles, collect_thetas, count_ball, count_sector, norm_sq_from_radius, BallSpec, SectorSpec, Workers,
};
use crate::stats::Ecdf;
use crate::theory::{ball_main_term, density_rho, sector_main_term, xi, TheoryContext};
use crate::verify::{self, Fault};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "hyperlattice", version, about = "Orbit counting and angle statistics for Γ(N)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact ball counts against the main term 6e^R / [Γ(1):Γ(N)].
    #[command(args_override_self = true)]
    Count(CountArgs),
    /// Every orbit element in one ball with its angle and distance.
    #[command(args_override_self = true)]
    Angles(AnglesArgs),
    /// Empirical angle CDF against the limiting distribution Ξ.
    #[command(args_override_self = true)]
    Cdf(CdfArgs),
    /// Density ρ next to a finite-difference derivative of Ξ.
    #[command(args_override_self = true)]
    Density(DensityArgs),
    /// Exact sector counts against their main term.
    #[command(args_override_self = true)]
    Sector(SectorArgs),
    /// Kloosterman sums S(m,n;q) with their Weil-bound ratio.
    #[command(args_override_self = true)]
    Kloosterman(KloostermanArgs),
    /// Run the self-check suites and print a JSON report.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for enumeration.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// File of key=value lines; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Comma list or grid of reals, parsed as one value.
#[derive(Clone, Debug, PartialEq)]
struct Reals(Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
struct Moduli(Vec<u64>);

#[derive(Args, Debug)]
struct LevelArg {
    /// Level N of Γ(N).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    level: u32,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct BallSize {
    /// Hyperbolic radii, comma separated.
    #[arg(long, value_parser = parse_list)]
    radius: Option<Reals>,
    /// Norm bounds Q² = 2 cosh R, comma separated.
    #[arg(long = "norm-sq", value_parser = parse_list)]
    norm_sq: Option<Reals>,
}

impl BallSize {
    /// `(radius, Q²)` pairs in the order given.
    fn pairs(&self) -> Vec<(f64, f64)> {
        match (&self.radius, &self.norm_sq) {
            (Some(Reals(r)), _) => r.iter().map(|&r| (r, norm_sq_from_radius(r))).collect(),
            (_, Some(Reals(q))) => q.iter().map(|&q2| (distance_from_norm_sq(q2), q2)).collect(),
            _ => Vec::new(),
        }
    }

    fn single(&self) -> Result<(f64, f64), String> {
        match self.pairs().as_slice() {
            [one] => Ok(*one),
            _ => Err("exactly one radius or norm bound is required".into()),
        }
    }
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    level: LevelArg,
    /// Base point z0 as x,y.
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z0: Point,
    #[command(flatten)]
    size: BallSize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AnglesArgs {
    #[command(flatten)]
    level: LevelArg,
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z0: Point,
    /// Observation point z1 as x,y.
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z1: Point,
    #[command(flatten)]
    size: BallSize,
    /// Where to write the summary JSON (default: stderr).
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CdfArgs {
    #[command(flatten)]
    level: LevelArg,
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z0: Point,
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z1: Point,
    #[command(flatten)]
    size: BallSize,
    /// Grid start:stop:steps; `pi` is accepted, e.g. -pi/2:pi/2:181.
    #[arg(long, value_parser = parse_grid, default_value = "-pi/2:pi/2:181", allow_hyphen_values = true)]
    omega: Reals,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    level: LevelArg,
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z0: Point,
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z1: Point,
    #[arg(long, value_parser = parse_grid, default_value = "-pi/2:pi/2:181", allow_hyphen_values = true)]
    omega: Reals,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SectorArgs {
    #[command(flatten)]
    level: LevelArg,
    #[arg(long, value_parser = parse_point, default_value = "0,1", allow_hyphen_values = true)]
    z0: Point,
    /// Norm bounds Q (not squared), comma separated.
    #[arg(long, value_parser = parse_list, required = true)]
    q: Reals,
    /// Slopes β, comma separated; inf and -inf allowed.
    #[arg(long, value_parser = parse_list, default_value = "-inf,-1,0,1,inf", allow_hyphen_values = true)]
    beta: Reals,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
#[group(id = "moduli", required = true, multiple = false, args = ["q", "q_max"])]
struct KloostermanArgs {
    /// Moduli, comma separated.
    #[arg(long, value_parser = parse_u64_list)]
    q: Option<Moduli>,
    /// All moduli 1..=q-max.
    #[arg(long = "q-max")]
    q_max: Option<u64>,
    /// Range lo:hi for m.
    #[arg(long, value_parser = parse_range, default_value = "1:1", allow_hyphen_values = true)]
    m: (i64, i64),
    /// Range lo:hi for n.
    #[arg(long, value_parser = parse_range, default_value = "1:1", allow_hyphen_values = true)]
    n: (i64, i64),
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, hide = true, value_enum)]
    inject_fault: Option<FaultArg>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    XiBranch,
}

/// Decimal or a multiple of π: `pi`, `-pi/2`, `3pi/4`, `0.5*pi`.
fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    match t.as_str() {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("not a number: {s}"));
    };
    let (head, tail) = (t[..pos].trim_end_matches('*'), &t[pos + 2..]);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("not a number: {s}"))?,
    };
    let denom = match tail {
        "" => 1.0,
        d => d.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).ok_or_else(|| format!("not a number: {s}"))?,
    };
    Ok(coeff * PI / denom)
}

fn parse_list(s: &str) -> Result<Reals, String> {
    s.split(',').map(parse_real).collect::<Result<_, _>>().map(Reals)
}

fn parse_u64_list(s: &str) -> Result<Moduli, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("not a positive integer: {t}")))
        .collect::<Result<_, _>>()
        .map(Moduli)
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y: {s}"))?;
    let x = x.trim().parse::<f64>().map_err(|_| format!("bad x: {x}"))?;
    let y = y.trim().parse::<f64>().map_err(|_| format!("bad y: {y}"))?;
    Point::new(x, y).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<Reals, String> {
    grid(s).map(Reals)
}

fn grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(format!("expected start:stop:steps: {s}"));
    };
    let (start, stop) = (parse_real(start)?, parse_real(stop)?);
    let steps: usize = steps.trim().parse().map_err(|_| format!("bad step count: {steps}"))?;
    if steps == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(format!("invalid grid: {s}"));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|k| if k + 1 == steps { stop } else { start + (stop - start) * k as f64 / last }).collect())
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi: {s}"))?;
    let lo = lo.trim().parse::<i64>().map_err(|_| format!("bad bound: {lo}"))?;
    let hi = hi.trim().parse::<i64>().map_err(|_| format!("bad bound: {hi}"))?;
    if lo > hi {
        return Err(format!("empty range: {s}"));
    }
    Ok((lo, hi))
}

/// Turn `key = value` lines into flags. Blank lines and `#` comments are
/// skipped; `key = true` becomes a bare flag.
fn config_flags(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut flags = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        let key = k.trim().replace('_', "-");
        if key == "config" {
            return Err(format!("{}:{}: nested config", path.display(), lineno + 1));
        }
        let value = v.trim();
        if value == "true" {
            flags.push(format!("--{key}"));
        } else {
            flags.push(format!("--{key}={value}"));
        }
    }
    Ok(flags)
}

/// Splice config-file flags in front of the command-line flags so the latter
/// win.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut iter = args.iter().enumerate();
    while let Some((i, a)) = iter.next() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
            iter.next();
        }
    }
    let Some(path) = path else { return Ok(args) };
    let flags = config_flags(&path)?;
    let mut out = Vec::with_capacity(args.len() + flags.len());
    let split = 2.min(args.len());
    out.extend_from_slice(&args[..split]);
    out.extend(flags);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

fn rel_error(count: f64, main: f64) -> f64 {
    if main == 0.0 {
        if count == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (count / main - 1.0).abs()
    }
}

fn table_format(f: Format) -> TableFormat {
    match f {
        Format::Csv => TableFormat::Csv,
        Format::Json => TableFormat::Json,
    }
}

fn emit(table: &Table, common: &Common, out: &mut dyn Write) -> Result<(), String> {
    let format = table_format(common.format);
    match &common.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let mut w = BufWriter::new(file);
            table.write(&mut w, format).map_err(|e| e.to_string())?;
            w.flush().map_err(|e| e.to_string())
        }
        None => table.write(out, format).map_err(|e| e.to_string()),
    }
}

fn workers(common: &Common) -> Result<Workers, String> {
    Workers::new(common.workers).map_err(|e| e.to_string())
}

fn cmd_count(args: &CountArgs, out: &mut dyn Write) -> Result<i32, String> {
    let w = workers(&args.common)?;
    let level = args.level.level;
    let mut table = Table::new(&["radius", "norm_sq", "count", "main_term", "rel_error"]);
    for (radius, q2) in args.size.pairs() {
        let spec = BallSpec::new(level, args.z0, q2).map_err(|e| e.to_string())?;
        let count = count_ball(&spec, w).map_err(|e| e.to_string())?;
        let main = ball_main_term(level, radius);
        table.push(vec![radius.into(), q2.into(), count.into(), main.into(), rel_error(count as f64, main).into()]);
    }
    emit(&table, &args.common, out)?;
    Ok(EXIT_OK)
}

fn cmd_angles(args: &AnglesArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let w = workers(&args.common)?;
    let level = args.level.level;
    let (_, q2) = args.size.single()?;
    let spec = BallSpec::new(level, args.z0, q2).map_err(|e| e.to_string())?;
    let mut coll = collect_angles(&spec, args.z1, w).map_err(|e| e.to_string())?;
    coll.samples.sort_by_key(|s| (s.gamma.c(), s.gamma.a(), s.gamma.d()));
    let mut table = Table::new(&["a", "b", "c", "d", "theta", "dist"]);
    for s in &coll.samples {
        let (a, b, c, d) = s.gamma.entries();
        table.push(vec![a.into(), b.into(), c.into(), d.into(), s.theta.into(), s.dist.into()]);
    }
    emit(&table, &args.common, out)?;

    let rounded: Vec<f64> = coll.samples.iter().map(|s| crate::format::round12(s.theta)).collect();
    let min = rounded.iter().copied().reduce(f64::min);
    let max = rounded.iter().copied().reduce(f64::max);
    let summary = FlatJson::new()
        .field("count", coll.samples.len() as u64)
        .field("undefined_count", coll.undefined)
        .field("theta_min", min)
        .field("theta_max", max)
        .field("level", level)
        .field("norm_sq", q2)
        .render();
    match &args.summary {
        Some(path) => std::fs::write(path, summary + "\n").map_err(|e| format!("{}: {e}", path.display()))?,
        None => writeln!(err, "{summary}").map_err(|e| e.to_string())?,
    }
    Ok(EXIT_OK)
}

fn cmd_cdf(args: &CdfArgs, out: &mut dyn Write) -> Result<i32, String> {
    let w = workers(&args.common)?;
    let (_, q2) = args.size.single()?;
    let spec = BallSpec::new(args.level.level, args.z0, q2).map_err(|e| e.to_string())?;
    let thetas = collect_thetas(&spec, args.z1, w).map_err(|e| e.to_string())?;
    let ecdf = Ecdf::new(thetas.thetas).map_err(|e| e.to_string())?;
    let target = NormalizedTarget::from_points(args.z0, args.z1);
    let mut table = Table::new(&["omega", "ecdf", "xi", "abs_err"]);
    for &omega in &args.omega.0 {
        let e = ecdf.eval(omega);
        let x = xi(&target, omega);
        table.push(vec![omega.into(), e.into(), x.into(), (e - x).abs().into()]);
    }
    emit(&table, &args.common, out)?;
    Ok(EXIT_OK)
}

/// `Ξ'` by central differences, falling back to second-order one-sided
/// stencils within `h` of `±π/2`.
fn xi_derivative(target: &NormalizedTarget, t: f64) -> f64 {
    let h = 1e-5;
    let f = |w: f64| xi(target, w);
    if t - h < -FRAC_PI_2 {
        (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h)
    } else if t + h > FRAC_PI_2 {
        (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2.0 * h)) / (2.0 * h)
    } else {
        (f(t + h) - f(t - h)) / (2.0 * h)
    }
}

fn cmd_density(args: &DensityArgs, out: &mut dyn Write) -> Result<i32, String> {
    let ctx = TheoryContext::new(args.level.level, args.z0, args.z1);
    let target = ctx.target();
    let mut table = Table::new(&["t", "rho", "xi_prime_fd"]);
    for &t in &args.omega.0 {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&t) {
            return Err(format!("t = {t} outside [-π/2, π/2]"));
        }
        table.push(vec![t.into(), density_rho(&ctx, t).into(), xi_derivative(&target, t).into()]);
    }
    emit(&table, &args.common, out)?;
    Ok(EXIT_OK)
}

fn cmd_sector(args: &SectorArgs, out: &mut dyn Write) -> Result<i32, String> {
    let w = workers(&args.common)?;
    let level = args.level.level;
    let mut table = Table::new(&["q", "beta", "count", "main_term", "rel_error"]);
    for &q in &args.q.0 {
        let ball = BallSpec::new(level, args.z0, q * q).map_err(|e| e.to_string())?;
        for &beta in &args.beta.0 {
            let spec = SectorSpec::new(ball, beta).map_err(|e| e.to_string())?;
            let count = count_sector(&spec, w).map_err(|e| e.to_string())?;
            let main = sector_main_term(level, beta, q);
            table.push(vec![q.into(), beta.into(), count.into(), main.into(), rel_error(count as f64, main).into()]);
        }
    }
    emit(&table, &args.common, out)?;
    Ok(EXIT_OK)
}

fn cmd_kloosterman(args: &KloostermanArgs, out: &mut dyn Write) -> Result<i32, String> {
    let moduli: Vec<u64> = match (&args.q, args.q_max) {
        (Some(Moduli(q)), _) => q.clone(),
        (_, Some(max)) => (1..=max).collect(),
        _ => Vec::new(),
    };
    let mut table = Table::new(&["m", "n", "q", "re", "im", "weil_ratio"]);
    for q in moduli {
        let t = KloostermanTable::new(q).map_err(|e| e.to_string())?;
        for m in args.m.0..=args.m.1 {
            for n in args.n.0..=args.n.1 {
                let s = t.sum(m, n);
                let ratio = s.norm() / weil_bound(m, n, q);
                table.push(vec![m.into(), n.into(), q.into(), s.re.into(), s.im.into(), ratio.into()]);
            }
        }
    }
    emit(&table, &args.common, out)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let w = workers(&args.common)?;
    let fault = args.inject_fault.map(|FaultArg::XiBranch| Fault::XiBranch);
    let report = verify::run(fault, w);
    for s in &report.suites {
        let status = if s.passed { "pass" } else { "FAIL" };
        writeln!(err, "{status:4} {:<22} {:>7.2}s  {}", s.name, s.seconds, s.detail).map_err(|e| e.to_string())?;
    }
    let json = report.to_json() + "\n";
    match &args.common.output {
        Some(path) => std::fs::write(path, json).map_err(|e| format!("{}: {e}", path.display()))?,
        None => out.write_all(json.as_bytes()).map_err(|e| e.to_string())?,
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Parse `args` (including the program name) and run the subcommand.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Count(a) => cmd_count(a, out),
        Command::Angles(a) => cmd_angles(a, out, err),
        Command::Cdf(a) => cmd_cdf(a, out),
        Command::Density(a) => cmd_density(a, out),
        Command::Sector(a) => cmd_sector(a, out),
        Command::Kloosterman(a) => cmd_kloosterman(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
