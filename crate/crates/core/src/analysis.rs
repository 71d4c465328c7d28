//! Error analysis against analytic gradients: per-pixel angular error maps,
//! 16-bit PGM rendering, summary statistics and step-size sweeps.
//!
//! The per-pixel score is `epsilon = (cos theta + 1) / 2`, where `theta` is
//! the angle between the estimated and true gradients, so 1 is a perfect
//! match and 0 points the opposite way.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::deriv::{directional, DerivKind};
use crate::error::{Error, Result};
use crate::estimate::{estimate, EstimatorConfig, GradientEstimate};
use crate::field::ScalarField;
use crate::vector::{dot, fmt17, norm, Point, UnitVector};

/// Norm below which a gradient is treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-300;
pub const PGM_MAXVAL: u16 = 65535;

/// Cosine of the angle between two nonzero vectors, clamped to [-1, 1].
pub fn cos_between(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: a.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    for n in [na, nb] {
        if !(n >= DEGENERATE_NORM) || !n.is_finite() {
            return Err(Error::DegenerateGradient { norm: n });
        }
    }
    Ok((dot(a, b) / na / nb).clamp(-1.0, 1.0))
}

pub fn cos_error(est: &GradientEstimate, truth: &[f64]) -> Result<f64> {
    cos_between(&est.vector, truth)
}

/// Maps `cos theta` in [-1, 1] onto [0, 1].
pub fn epsilon(cos_theta: f64) -> f64 {
    (cos_theta + 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    pub point: Point,
    /// NaN when degenerate.
    pub cos_theta: f64,
    /// 0 when degenerate.
    pub epsilon: f64,
    pub est_norm: f64,
    pub degenerate: bool,
}

impl ErrorSample {
    fn degenerate(point: Point, est_norm: f64) -> Self {
        ErrorSample {
            point,
            cos_theta: f64::NAN,
            epsilon: 0.0,
            est_norm,
            degenerate: true,
        }
    }

    pub fn angle_deg(&self) -> f64 {
        self.cos_theta.acos().to_degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let ok = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) && xmin < xmax && ymin < ymax;
        if !ok {
            return Err(Error::InvalidValue(format!(
                "bounds must satisfy xmin < xmax and ymin < ymax, got {xmin},{xmax},{ymin},{ymax}"
            )));
        }
        Ok(Bounds { xmin, xmax, ymin, ymax })
    }

    /// Center of pixel `(col, row)`; row 0 is the `ymax` edge.
    pub fn pixel_center(&self, col: usize, row: usize, width: usize, height: usize) -> [f64; 2] {
        let dx = (self.xmax - self.xmin) / width as f64;
        let dy = (self.ymax - self.ymin) / height as f64;
        [
            self.xmin + (col as f64 + 0.5) * dx,
            self.ymax - (row as f64 + 0.5) * dy,
        ]
    }
}

/// Row-major grid of error samples, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorGrid {
    pub bounds: Bounds,
    pub width: usize,
    pub height: usize,
    pub samples: Vec<ErrorSample>,
}

impl ErrorGrid {
    pub fn sample(&self, col: usize, row: usize) -> &ErrorSample {
        &self.samples[row * self.width + col]
    }

    pub fn degenerate_count(&self) -> usize {
        self.samples.iter().filter(|s| s.degenerate).count()
    }

    /// One row per pixel: `x,y,cos_theta,epsilon,est_norm,degenerate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,cos_theta,epsilon,est_norm,degenerate\n");
        for s in &self.samples {
            let p = s.point.coords();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt17(p[0]),
                fmt17(p[1]),
                fmt17(s.cos_theta),
                fmt17(s.epsilon),
                fmt17(s.est_norm),
                u8::from(s.degenerate)
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Error map over a 2D field, evaluated in parallel.
pub fn error_map(
    field: &dyn ScalarField,
    cfg: &EstimatorConfig,
    bounds: Bounds,
    width: usize,
    height: usize,
    exclusion_radius: f64,
) -> Result<ErrorGrid> {
    error_map_with(field, cfg, bounds, width, height, exclusion_radius, Execution::Parallel)
}

/// Error map with explicit execution mode. Serial and parallel runs give
/// identical grids: each pixel depends only on its own index.
///
/// Pixels where the true gradient norm is below `exclusion_radius` (or not
/// finite), where the estimate is degenerate, or where the field returns a
/// non-finite value during estimation are marked degenerate.
pub fn error_map_with(
    field: &dyn ScalarField,
    cfg: &EstimatorConfig,
    bounds: Bounds,
    width: usize,
    height: usize,
    exclusion_radius: f64,
    exec: Execution,
) -> Result<ErrorGrid> {
    if field.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: field.dim(),
        });
    }
    if !field.has_analytic_gradient() {
        return Err(Error::MissingCapability {
            field: field.name().to_string(),
            capability: "an analytic gradient",
        });
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidValue(format!("grid size must be at least 1x1, got {width}x{height}")));
    }
    if !(exclusion_radius >= 0.0) {
        return Err(Error::InvalidValue(format!("exclusion radius must be >= 0, got {exclusion_radius}")));
    }
    cfg.validate()?;

    let pixel = |idx: usize| -> Result<ErrorSample> {
        let (col, row) = (idx % width, idx / width);
        let p = Point::new(bounds.pixel_center(col, row, width, height).to_vec())?;
        let truth = field.analytic_gradient(p.coords()).expect("checked above");
        let tn = norm(&truth);
        if !tn.is_finite() || tn < exclusion_radius.max(DEGENERATE_NORM) {
            return Ok(ErrorSample::degenerate(p, f64::NAN));
        }
        let est = match estimate(field, &p, cfg, Some(idx as u64)) {
            Ok(e) => e,
            Err(Error::NonFinite { .. }) => return Ok(ErrorSample::degenerate(p, f64::NAN)),
            Err(e) => return Err(e),
        };
        let en = est.norm();
        match cos_between(&est.vector, &truth) {
            Ok(c) => Ok(ErrorSample {
                point: p,
                cos_theta: c,
                epsilon: epsilon(c),
                est_norm: en,
                degenerate: false,
            }),
            Err(Error::DegenerateGradient { .. }) => Ok(ErrorSample::degenerate(p, en)),
            Err(e) => Err(e),
        }
    };

    let n = width * height;
    let samples = match exec {
        Execution::Serial => (0..n).map(pixel).collect::<Result<Vec<_>>>()?,
        Execution::Parallel => (0..n).into_par_iter().map(pixel).collect::<Result<Vec<_>>>()?,
    };
    Ok(ErrorGrid {
        bounds,
        width,
        height,
        samples,
    })
}

fn pgm_value(s: &ErrorSample) -> u16 {
    if s.degenerate {
        0
    } else {
        (s.epsilon.clamp(0.0, 1.0) * f64::from(PGM_MAXVAL)).round() as u16
    }
}

/// Binary 16-bit PGM: `P5\n<w> <h>\n65535\n` then big-endian samples.
pub fn encode_pgm(grid: &ErrorGrid) -> Vec<u8> {
    let header = format!("P5\n{} {}\n{}\n", grid.width, grid.height, PGM_MAXVAL);
    let mut out = Vec::with_capacity(header.len() + 2 * grid.samples.len());
    out.extend_from_slice(header.as_bytes());
    for s in &grid.samples {
        out.extend_from_slice(&pgm_value(s).to_be_bytes());
    }
    out
}

pub fn write_pgm(grid: &ErrorGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&encode_pgm(grid))?;
    f.flush()?;
    Ok(())
}

/// A decoded grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

/// Parses a binary (P5) PGM. Comments are not supported.
pub fn decode_pgm(bytes: &[u8]) -> Result<Pgm> {
    let bad = |m: &str| Error::InvalidValue(format!("malformed PGM: {m}"));
    let mut pos = 0;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        let t = String::from_utf8_lossy(&bytes[start..pos]).into_owned();
        Ok(t)
    };
    if token()? != "P5" {
        return Err(bad("not a P5 file"));
    }
    let width: usize = token()?.parse().map_err(|_| bad("width"))?;
    let height: usize = token()?.parse().map_err(|_| bad("height"))?;
    let maxval: u16 = token()?.parse().map_err(|_| bad("maxval"))?;
    // single whitespace byte after maxval
    let data = &bytes[pos + 1..];
    let bpp = if maxval > 255 { 2 } else { 1 };
    if data.len() != width * height * bpp {
        return Err(bad("payload size"));
    }
    let pixels = if bpp == 2 {
        data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        data.iter().map(|&b| u16::from(b)).collect()
    };
    Ok(Pgm {
        width,
        height,
        maxval,
        pixels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub samples: usize,
    pub degenerate: usize,
    pub eps_min: f64,
    pub eps_mean: f64,
    pub eps_median: f64,
    /// Angle-error quantiles in degrees.
    pub angle_p50: f64,
    pub angle_p90: f64,
    pub angle_p99: f64,
    pub angle_max: f64,
}

impl ErrorStats {
    pub const CSV_HEADER: &'static str =
        "samples,degenerate,eps_min,eps_mean,eps_median,angle_p50_deg,angle_p90_deg,angle_p99_deg,angle_max_deg";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.samples,
            self.degenerate,
            fmt17(self.eps_min),
            fmt17(self.eps_mean),
            fmt17(self.eps_median),
            fmt17(self.angle_p50),
            fmt17(self.angle_p90),
            fmt17(self.angle_p99),
            fmt17(self.angle_max)
        )
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn error_stats(grid: &ErrorGrid) -> Result<ErrorStats> {
    let good: Vec<&ErrorSample> = grid.samples.iter().filter(|s| !s.degenerate).collect();
    if good.is_empty() {
        return Err(Error::EmptyInput("every sample in the grid is degenerate"));
    }
    let mut eps: Vec<f64> = good.iter().map(|s| s.epsilon).collect();
    eps.sort_by(f64::total_cmp);
    let mut ang: Vec<f64> = good.iter().map(|s| s.angle_deg()).collect();
    ang.sort_by(f64::total_cmp);
    Ok(ErrorStats {
        samples: grid.samples.len(),
        degenerate: grid.samples.len() - good.len(),
        eps_min: eps[0],
        eps_mean: eps.iter().sum::<f64>() / eps.len() as f64,
        eps_median: median(&eps),
        angle_p50: median(&ang),
        angle_p90: quantile(&ang, 0.9),
        angle_p99: quantile(&ang, 0.99),
        angle_max: *ang.last().unwrap(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub kind: DerivKind,
    pub estimate: f64,
    pub abs_error: f64,
    /// Absolute error over `|truth|`; equals the absolute error when the
    /// true derivative is zero.
    pub rel_error: f64,
}

/// Directional derivative estimates over step sizes and kinds, compared
/// with `grad F . n` from the analytic gradient. Rows are ordered by kind,
/// then by `h` as given.
pub fn h_sweep(
    field: &dyn ScalarField,
    p0: &Point,
    n: &UnitVector,
    h_values: &[f64],
    kinds: &[DerivKind],
) -> Result<Vec<SweepRow>> {
    let grad = field
        .analytic_gradient(p0.coords())
        .ok_or_else(|| Error::MissingCapability {
            field: field.name().to_string(),
            capability: "an analytic gradient",
        })?;
    if grad.len() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: grad.len(),
            got: n.dim(),
        });
    }
    let truth = dot(&grad, n.coords());
    let mut rows = Vec::with_capacity(h_values.len() * kinds.len());
    for &kind in kinds {
        for &h in h_values {
            let d = directional(field, p0, n, kind, h)?;
            let abs_error = (d.value - truth).abs();
            let rel_error = if truth == 0.0 { abs_error } else { abs_error / truth.abs() };
            rows.push(SweepRow {
                h,
                kind,
                estimate: d.value,
                abs_error,
                rel_error,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("h,kind,estimate,abs_error,rel_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt17(r.h),
            r.kind,
            fmt17(r.estimate),
            fmt17(r.abs_error),
            fmt17(r.rel_error)
        );
    }
    out
}

/// `count` values from `start` to `stop` evenly spaced in log10.
pub fn log_range(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = (start.log10(), stop.log10());
    (0..count)
        .map(|i| match i {
            0 => start,
            _ if i == count - 1 => stop,
            _ => 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64),
        })
        .collect()
}

/// `count` values from `start` to `stop` evenly spaced.
pub fn lin_range(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| match i {
            0 => start,
            _ if i == count - 1 => stop,
            _ => start + (stop - start) * i as f64 / (count - 1) as f64,
        })
        .collect()
}
