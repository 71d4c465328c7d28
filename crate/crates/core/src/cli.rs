//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime failure (capability, I/O,
//! degenerate input), 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, Bounds, ErrorStats, Execution};
use crate::deriv::DerivKind;
use crate::directions::{
    find_orthonormal_frames, polygon_set, polyhedron_set, random_rotation, rotate_set, validate_set, DirectionSet,
    OrthonormalFrame, Polyhedron, SetSource, Span, FRAME_TOL,
};
use crate::error::Error;
use crate::estimate::{estimate, DirectionSource, EstimatorConfig, Method};
use crate::field::{CorpusField, ScalarField};
use crate::vector::{fmt17, Point, UnitVector};

#[derive(Debug, Parser)]
#[command(name = "msgrad", version, about = "Gradient estimation for black-box scalar fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a direction set as CSV, one unit vector per row.
    Dirs(DirsArgs),
    /// Search direction sets for orthonormal frames and report them.
    Frames(FramesArgs),
    /// Estimate the gradient of a field at one point.
    Grad(GradArgs),
    /// Render an angular error map against the analytic gradient.
    Errmap(ErrmapArgs),
    /// Sweep the derivative step size and report errors.
    Hsweep(HsweepArgs),
}

#[derive(Debug, Args)]
pub struct DirsArgs {
    /// Dimension of the set (2 for polygons, 3 for polyhedra).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of polygon vertices K.
    #[arg(long, conflicts_with = "polyhedron")]
    pub polygon: Option<usize>,
    /// Polygon span: half (angles pi k/K) or full (2 pi k/K).
    #[arg(long, default_value = "full")]
    pub span: String,
    /// Polyhedron name.
    #[arg(long)]
    pub polyhedron: Option<String>,
    /// Rotate the set by a Haar-random rotation drawn from this seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FramesArgs {
    #[arg(long, conflicts_with = "polyhedron")]
    pub polygon: Option<usize>,
    #[arg(long, default_value = "full")]
    pub span: String,
    /// Polyhedron name, or `all` for every shipped polyhedron.
    #[arg(long)]
    pub polyhedron: Option<String>,
    /// Tolerance on |dot| for perpendicular directions.
    #[arg(long, default_value_t = FRAME_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// Field as `name:key=val,...`, e.g. `circle2:r=1`.
    #[arg(long)]
    pub field: String,
    /// single-axis, multi-axis, multi-vector or hart.
    #[arg(long, default_value = "single-axis")]
    pub method: String,
    /// central, complex or complex-line-avg.
    #[arg(long, default_value = "complex")]
    pub deriv: String,
    /// Step size (default 1e-6 central, 1e-100 complex).
    #[arg(long)]
    pub h: Option<f64>,
    /// Direction set: a polyhedron name or `polygon:K[:half|full]`.
    #[arg(long)]
    pub set: Option<String>,
    /// Probe radius for the hart estimator.
    #[arg(long, default_value_t = crate::estimate::DEFAULT_PROBE_RADIUS)]
    pub probe_radius: f64,
    /// Randomly rotate the direction source per point from this seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GradArgs {
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Point index used to derive the per-point rotation seed.
    #[arg(long)]
    pub index: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ErrmapArgs {
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// xmin,xmax,ymin,ymax
    #[arg(long, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
    pub bounds: String,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Pixels whose true gradient norm is below this are excluded.
    #[arg(long, default_value_t = 1e-6)]
    pub exclude: f64,
    /// Write the epsilon image as 16-bit PGM.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-pixel samples as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Evaluate pixels on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Args)]
pub struct HsweepArgs {
    #[arg(long)]
    pub field: String,
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Direction, normalized before use.
    #[arg(long, allow_hyphen_values = true)]
    pub dir: String,
    /// Comma-separated derivative kinds.
    #[arg(long, default_value = "central,complex")]
    pub kinds: String,
    /// `start:stop:log|lin[,count]` (count defaults to 50) or a comma list.
    #[arg(long, default_value = "1e-1:1e-16:log,16")]
    pub h: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{flag}: {msg}"))
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let result = match cli.command {
        Command::Dirs(a) => cmd_dirs(&a, out),
        Command::Frames(a) => cmd_frames(&a, out),
        Command::Grad(a) => cmd_grad(&a, out),
        Command::Errmap(a) => cmd_errmap(&a, out),
        Command::Hsweep(a) => cmd_hsweep(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "usage error: {m}");
            2
        }
        Err(CliError::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn parse_reals(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(flag, format!("`{}` is not a number", t.trim())))
        })
        .collect()
}

fn parse_point(flag: &str, s: &str, dim: usize) -> CliResult<Point> {
    let c = parse_reals(flag, s)?;
    if c.len() != dim {
        return Err(usage(flag, format!("dimension mismatch: field is {dim}D, point has {} coordinates", c.len())));
    }
    Point::new(c).map_err(|e| usage(flag, e))
}

fn parse_field(s: &str) -> CliResult<CorpusField> {
    s.parse().map_err(|e| usage("field", e))
}

fn polygon(flag: &str, k: usize, span: &str) -> CliResult<DirectionSet> {
    let span: Span = span.parse().map_err(|e| usage("span", e))?;
    polygon_set(k, span).map_err(|e| usage(flag, e))
}

fn polyhedron(flag: &str, name: &str) -> CliResult<DirectionSet> {
    let p: Polyhedron = name.parse().map_err(|e| usage(flag, e))?;
    Ok(polyhedron_set(p)?)
}

/// `polygon:K[:half|full]` or a polyhedron name.
fn parse_set(s: &str) -> CliResult<DirectionSet> {
    if let Some(rest) = s.strip_prefix("polygon:") {
        let mut parts = rest.split(':');
        let k: usize = parts
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| usage("set", format!("bad polygon size in `{s}`")))?;
        let span = parts.next().unwrap_or("full");
        if parts.next().is_some() {
            return Err(usage("set", format!("unexpected trailing fields in `{s}`")));
        }
        return polygon("set", k, span);
    }
    polyhedron("set", s)
}

fn default_set(dim: usize) -> CliResult<DirectionSet> {
    match dim {
        1 => Ok(DirectionSet::new(
            vec![UnitVector::axis(1, 0), UnitVector::axis(1, 0).neg()],
            SetSource::Custom,
        )?),
        2 => Ok(polygon_set(16, Span::Full)?),
        _ => Ok(polyhedron_set(Polyhedron::Octahedron)?),
    }
}

fn build_config(a: &EstimatorArgs, dim: usize) -> CliResult<EstimatorConfig> {
    let method: Method = a.method.parse().map_err(|e| usage("method", e))?;
    let kind: DerivKind = a.deriv.parse().map_err(|e| usage("deriv", e))?;
    let source = match &a.set {
        Some(s) => {
            let set = parse_set(s)?;
            if set.dim() != dim {
                return Err(usage(
                    "set",
                    format!("dimension mismatch: field is {dim}D, set `{s}` is {}D", set.dim()),
                ));
            }
            DirectionSource::Set(set)
        }
        None => match method {
            Method::SingleAxis | Method::MultiAxis => DirectionSource::Frames(vec![OrthonormalFrame::canonical(dim)]),
            Method::MultiVector | Method::Hart => DirectionSource::Set(default_set(dim)?),
        },
    };
    let mut cfg = EstimatorConfig::new(method, kind, source).with_probe_radius(a.probe_radius);
    if let Some(h) = a.h {
        cfg = cfg.with_h(h);
    }
    if let Some(seed) = a.seed {
        if dim == 1 {
            return Err(usage("seed", "random rotations need a 2D or 3D field"));
        }
        cfg = cfg.with_seed(seed);
    }
    if !(cfg.h > 0.0 && cfg.h.is_finite()) {
        return Err(usage("h", format!("step size must be positive, got {}", cfg.h)));
    }
    if !(cfg.probe_radius > 0.0 && cfg.probe_radius.is_finite()) {
        return Err(usage("probe-radius", format!("must be positive, got {}", cfg.probe_radius)));
    }
    Ok(cfg)
}

fn csv_header(dim: usize) -> &'static str {
    ["x", "x,y", "x,y,z"][dim - 1]
}

fn cmd_dirs(a: &DirsArgs, out: &mut dyn Write) -> CliResult<()> {
    let set = match (a.polygon, &a.polyhedron) {
        (Some(k), None) => polygon("polygon", k, &a.span)?,
        (None, Some(name)) => polyhedron("polyhedron", name)?,
        _ => return Err(usage("polygon", "give exactly one of --polygon or --polyhedron")),
    };
    if let Some(d) = a.dim {
        if d != set.dim() {
            return Err(usage("dim", format!("dimension mismatch: requested {d}D, set is {}D", set.dim())));
        }
    }
    let set = match a.seed {
        Some(seed) => rotate_set(&set, &random_rotation(set.dim(), seed)?)?,
        None => set,
    };
    writeln!(out, "{}", csv_header(set.dim()))?;
    for v in set.vectors() {
        let row: Vec<String> = v.coords().iter().map(|&c| fmt17(c)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn cmd_frames(a: &FramesArgs, out: &mut dyn Write) -> CliResult<()> {
    if !(a.tol >= 0.0) {
        return Err(usage("tol", "must be >= 0"));
    }
    let sets: Vec<DirectionSet> = match (a.polygon, a.polyhedron.as_deref()) {
        (Some(k), None) => vec![polygon("polygon", k, &a.span)?],
        (None, Some("all")) => Polyhedron::ALL
            .into_iter()
            .map(polyhedron_set)
            .collect::<Result<_, _>>()?,
        (None, Some(name)) => vec![polyhedron("polyhedron", name)?],
        _ => return Err(usage("polygon", "give exactly one of --polygon or --polyhedron")),
    };
    let found: Vec<Vec<OrthonormalFrame>> = sets.iter().map(|s| find_orthonormal_frames(s, a.tol)).collect();

    writeln!(out, "set,vectors,lines,antipodal_closed,frames")?;
    for (s, frames) in sets.iter().zip(&found) {
        let rep = validate_set(s);
        writeln!(out, "{},{},{},{},{}", s.source(), rep.count, rep.line_count, rep.antipodal_closed, frames.len())?;
    }
    writeln!(out)?;
    writeln!(out, "set,frame,axis,x,y,z")?;
    for (s, frames) in sets.iter().zip(&found) {
        for (i, f) in frames.iter().enumerate() {
            for (j, axis) in f.axes().iter().enumerate() {
                let mut c: Vec<String> = axis.coords().iter().map(|&v| fmt17(v)).collect();
                c.resize(3, String::new());
                writeln!(out, "{},{i},{j},{}", s.source(), c.join(","))?;
            }
        }
    }
    Ok(())
}

fn cmd_grad(a: &GradArgs, out: &mut dyn Write) -> CliResult<()> {
    let field = parse_field(&a.est.field)?;
    let p = parse_point("point", &a.point, field.dim())?;
    let cfg = build_config(&a.est, field.dim())?;
    let g = estimate(&field, &p, &cfg, a.index)?;
    let comps: Vec<String> = g.vector.iter().map(|&c| fmt17(c)).collect();
    writeln!(
        out,
        "field={} method={} deriv={} h={} k={} normalization={} degenerate={} gradient={}",
        field,
        g.method,
        g.deriv_kind.map_or("none", DerivKind::as_str),
        fmt17(g.h),
        g.k,
        fmt17(g.normalization),
        g.degenerate,
        comps.join(",")
    )?;
    Ok(())
}

fn cmd_errmap(a: &ErrmapArgs, out: &mut dyn Write) -> CliResult<()> {
    let field = parse_field(&a.est.field)?;
    if field.dim() != 2 {
        return Err(usage("field", format!("error maps need a 2D field, `{field}` is {}D", field.dim())));
    }
    let b = parse_reals("bounds", &a.bounds)?;
    if b.len() != 4 {
        return Err(usage("bounds", "expected xmin,xmax,ymin,ymax"));
    }
    let bounds = Bounds::new(b[0], b[1], b[2], b[3]).map_err(|e| usage("bounds", e))?;
    if a.width == 0 || a.height == 0 {
        return Err(usage("width", "grid must be at least 1x1"));
    }
    if !(a.exclude >= 0.0) {
        return Err(usage("exclude", "must be >= 0"));
    }
    let cfg = build_config(&a.est, 2)?;
    let exec = if a.serial { Execution::Serial } else { Execution::Parallel };
    let grid = analysis::error_map_with(&field, &cfg, bounds, a.width, a.height, a.exclude, exec)?;
    if let Some(path) = &a.out {
        analysis::write_pgm(&grid, path)?;
    }
    if let Some(path) = &a.csv {
        std::fs::write(path, grid.to_csv())?;
    }
    let stats = analysis::error_stats(&grid)?;
    writeln!(out, "{}", ErrorStats::CSV_HEADER)?;
    writeln!(out, "{}", stats.csv_row())?;
    Ok(())
}

/// `start:stop:log|lin[,count]`, or a plain comma-separated list.
pub fn parse_h_range(s: &str) -> Result<Vec<f64>, String> {
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:log|lin[,count], got `{s}`"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let (scale, count) = match parts[2].split_once(',') {
            Some((sc, c)) => (sc, c.trim().parse::<usize>().map_err(|_| format!("bad count `{c}`"))?),
            None => (parts[2], 50),
        };
        if count == 0 {
            return Err("count must be at least 1".into());
        }
        match scale.trim() {
            "log" => {
                if !(start > 0.0 && stop > 0.0) {
                    return Err("log ranges need positive endpoints".into());
                }
                analysis::log_range(start, stop, count)
            }
            "lin" => analysis::lin_range(start, stop, count),
            other => return Err(format!("scale must be `log` or `lin`, got `{other}`")),
        }
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
            .collect::<Result<_, _>>()?
    };
    if let Some(bad) = values.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(format!("step sizes must be positive, got {bad}"));
    }
    Ok(values)
}

fn cmd_hsweep(a: &HsweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let field = parse_field(&a.field)?;
    let p = parse_point("point", &a.point, field.dim())?;
    let d = parse_reals("dir", &a.dir)?;
    if d.len() != field.dim() {
        return Err(usage("dir", format!("dimension mismatch: field is {}D, direction has {}", field.dim(), d.len())));
    }
    let n = UnitVector::normalize(d).map_err(|e| usage("dir", e))?;
    let kinds: Vec<DerivKind> = a
        .kinds
        .split(',')
        .map(|k| k.trim().parse().map_err(|e| usage("kinds", e)))
        .collect::<CliResult<_>>()?;
    let hs = parse_h_range(&a.h).map_err(|m| usage("h", m))?;
    let rows = analysis::h_sweep(&field, &p, &n, &hs, &kinds)?;
    write!(out, "{}", analysis::sweep_csv(&rows))?;
    Ok(())
}
