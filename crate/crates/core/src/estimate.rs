//! Gradient estimators built on directional derivatives.
//!
//! * single-axis: one orthonormal frame, `sum_j d_j n_j`;
//! * multi-axis: the mean of single-axis estimates over several frames;
//! * multi-vector: `(n / K) sum_k d_k n_k` over a uniform direction set;
//! * hart: `sum_k F(p0 + r n_k) n_k`, no derivatives at all, intended for
//!   indicator fields where tangential contributions cancel.

use std::fmt;
use std::str::FromStr;

use crate::deriv::{directional, DerivKind};
use crate::directions::{find_orthonormal_frames, random_rotation, rotate_set, DirectionSet, OrthonormalFrame, FRAME_TOL};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::vector::{axpy, norm, scale, Point, UnitVector};

pub const DEFAULT_PROBE_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    SingleAxis,
    MultiAxis,
    MultiVector,
    Hart,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::SingleAxis, Method::MultiAxis, Method::MultiVector, Method::Hart];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::SingleAxis => "single-axis",
            Method::MultiAxis => "multi-axis",
            Method::MultiVector => "multi-vector",
            Method::Hart => "hart",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub vector: Vec<f64>,
    pub method: Method,
    /// `None` for the hart estimator, which takes no derivatives.
    pub deriv_kind: Option<DerivKind>,
    /// Derivative step size; the probe radius for hart.
    pub h: f64,
    /// Number of directions sampled.
    pub k: usize,
    /// Factor the raw sum was divided by.
    pub normalization: f64,
    /// Set when the estimate is the zero vector (or too small to normalize).
    pub degenerate: bool,
}

impl GradientEstimate {
    fn new(vector: Vec<f64>, method: Method, deriv_kind: Option<DerivKind>, h: f64, k: usize, normalization: f64) -> Self {
        let degenerate = !(norm(&vector) >= 1e-300);
        GradientEstimate {
            vector,
            method,
            deriv_kind,
            h,
            k,
            normalization,
            degenerate,
        }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vector)
    }

    pub fn unit(&self) -> Result<Vec<f64>> {
        let n = self.norm();
        if self.degenerate || !n.is_finite() {
            return Err(Error::DegenerateGradient { norm: n });
        }
        Ok(scale(&self.vector, 1.0 / n))
    }
}

fn check_dim(field: &dyn ScalarField, got: usize) -> Result<()> {
    if field.dim() == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: field.dim(),
            got,
        })
    }
}

fn check_complex(field: &dyn ScalarField, kind: DerivKind) -> Result<()> {
    if kind.needs_complex() && !field.supports_complex() {
        return Err(Error::MissingCapability {
            field: field.name().to_string(),
            capability: "complex evaluation",
        });
    }
    Ok(())
}

fn frame_sum(field: &dyn ScalarField, p0: &Point, frame: &OrthonormalFrame, kind: DerivKind, h: f64) -> Result<Vec<f64>> {
    let mut g = vec![0.0; field.dim()];
    for axis in frame.axes() {
        let d = directional(field, p0, axis, kind, h)?;
        axpy(&mut g, d.value, axis.coords());
    }
    Ok(g)
}

/// Gradient from the directional derivatives along one orthonormal frame.
pub fn single_axis(
    field: &dyn ScalarField,
    p0: &Point,
    frame: &OrthonormalFrame,
    kind: DerivKind,
    h: f64,
) -> Result<GradientEstimate> {
    check_dim(field, frame.dim())?;
    check_dim(field, p0.dim())?;
    check_complex(field, kind)?;
    let g = frame_sum(field, p0, frame, kind, h)?;
    Ok(GradientEstimate::new(g, Method::SingleAxis, Some(kind), h, frame.dim(), 1.0))
}

/// Mean of single-axis estimates over `frames`.
pub fn multi_axis(
    field: &dyn ScalarField,
    p0: &Point,
    frames: &[OrthonormalFrame],
    kind: DerivKind,
    h: f64,
) -> Result<GradientEstimate> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("multi-axis estimation needs at least one frame"));
    }
    check_dim(field, p0.dim())?;
    for f in frames {
        check_dim(field, f.dim())?;
    }
    check_complex(field, kind)?;
    let mut sum = vec![0.0; field.dim()];
    for f in frames {
        let g = frame_sum(field, p0, f, kind, h)?;
        axpy(&mut sum, 1.0, &g);
    }
    let m = frames.len() as f64;
    Ok(GradientEstimate::new(
        scale(&sum, 1.0 / m),
        Method::MultiAxis,
        Some(kind),
        h,
        frames.len() * field.dim(),
        m,
    ))
}

/// Unnormalized `sum_k d_k n_k` over the vectors of `s`.
///
/// With central differences on an antipodally closed set each antipodal
/// pair is differenced once: `d(-n) = -d(n)` holds exactly for the central
/// formula, and both members contribute `d(n) n`.
pub fn multi_vector_sum(field: &dyn ScalarField, p0: &Point, s: &DirectionSet, kind: DerivKind, h: f64) -> Result<Vec<f64>> {
    check_dim(field, s.dim())?;
    check_dim(field, p0.dim())?;
    check_complex(field, kind)?;
    let mut sum = vec![0.0; field.dim()];
    if kind == DerivKind::Central && s.antipodal_closed() {
        let antipodes = s.antipodes();
        let mut done = vec![None::<f64>; s.len()];
        for (i, v) in s.vectors().iter().enumerate() {
            let d = match done[i] {
                Some(d) => d,
                None => {
                    let d = directional(field, p0, v, kind, h)?.value;
                    if let Some(j) = antipodes[i] {
                        done[j] = Some(-d);
                    }
                    d
                }
            };
            axpy(&mut sum, d, v.coords());
        }
    } else {
        for v in s.vectors() {
            let d = directional(field, p0, v, kind, h)?.value;
            axpy(&mut sum, d, v.coords());
        }
    }
    Ok(sum)
}

/// `(n / K) sum_k d_k n_k` over a uniform direction set of size `K`.
pub fn multi_vector(field: &dyn ScalarField, p0: &Point, s: &DirectionSet, kind: DerivKind, h: f64) -> Result<GradientEstimate> {
    let sum = multi_vector_sum(field, p0, s, kind, h)?;
    let normalization = s.len() as f64 / s.dim() as f64;
    Ok(GradientEstimate::new(
        scale(&sum, 1.0 / normalization),
        Method::MultiVector,
        Some(kind),
        h,
        s.len(),
        normalization,
    ))
}

/// `sum_k F(p0 + r n_k) n_k`. Points toward increasing field values, i.e.
/// outward for an indicator field.
pub fn hart_multisample(field: &dyn ScalarField, p0: &Point, s: &DirectionSet, probe_radius: f64) -> Result<GradientEstimate> {
    check_dim(field, s.dim())?;
    check_dim(field, p0.dim())?;
    if !(probe_radius > 0.0 && probe_radius.is_finite()) {
        return Err(Error::InvalidValue(format!("probe radius must be positive, got {probe_radius}")));
    }
    let mut sum = vec![0.0; field.dim()];
    for v in s.vectors() {
        let at = p0.offset(v.coords(), probe_radius);
        let value = field.eval(&at);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                field: field.name().to_string(),
                at,
            });
        }
        axpy(&mut sum, value, v.coords());
    }
    Ok(GradientEstimate::new(sum, Method::Hart, None, probe_radius, s.len(), 1.0))
}

/// What an estimator samples: a direction set, or explicit frames.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSource {
    Set(DirectionSet),
    Frames(Vec<OrthonormalFrame>),
}

impl DirectionSource {
    pub fn dim(&self) -> Option<usize> {
        match self {
            DirectionSource::Set(s) => Some(s.dim()),
            DirectionSource::Frames(f) => f.first().map(OrthonormalFrame::dim),
        }
    }

    fn rotated(&self, seed: u64) -> Result<DirectionSource> {
        let dim = self.dim().ok_or(Error::EmptyInput("direction source is empty"))?;
        let r = random_rotation(dim, seed)?;
        Ok(match self {
            DirectionSource::Set(s) => DirectionSource::Set(rotate_set(s, &r)?),
            DirectionSource::Frames(fs) => {
                DirectionSource::Frames(fs.iter().map(|f| f.rotated(&r)).collect::<Result<_>>()?)
            }
        })
    }

    fn frames(&self) -> Result<Vec<OrthonormalFrame>> {
        let frames = match self {
            DirectionSource::Frames(f) => f.clone(),
            DirectionSource::Set(s) => find_orthonormal_frames(s, FRAME_TOL),
        };
        if frames.is_empty() {
            return Err(Error::EmptyInput(
                "direction source contains no orthonormal frame; use multi-vector instead",
            ));
        }
        Ok(frames)
    }

    fn set(&self) -> Result<DirectionSet> {
        match self {
            DirectionSource::Set(s) => Ok(s.clone()),
            DirectionSource::Frames(fs) => {
                let mut vectors: Vec<UnitVector> = Vec::new();
                for a in fs.iter().flat_map(|f| f.axes()) {
                    if !vectors.iter().any(|v| v.dot(a) >= 1.0 - 1e-12) {
                        vectors.push(a.clone());
                    }
                }
                DirectionSet::new(vectors, crate::directions::SetSource::Custom)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    pub deriv_kind: DerivKind,
    pub h: f64,
    pub source: DirectionSource,
    /// Hart only.
    pub probe_radius: f64,
    /// When set, every query rotates the source by a Haar-random rotation
    /// drawn from this seed and the caller's point index.
    pub seed: Option<u64>,
}

impl EstimatorConfig {
    pub fn new(method: Method, deriv_kind: DerivKind, source: DirectionSource) -> Self {
        EstimatorConfig {
            method,
            deriv_kind,
            h: deriv_kind.default_h(),
            source,
            probe_radius: DEFAULT_PROBE_RADIUS,
            seed: None,
        }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_probe_radius(mut self, r: f64) -> Self {
        self.probe_radius = r;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidValue(format!("step size must be positive, got {}", self.h)));
        }
        if !(self.probe_radius > 0.0 && self.probe_radius.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "probe radius must be positive, got {}",
                self.probe_radius
            )));
        }
        if self.source.dim().is_none() {
            return Err(Error::EmptyInput("direction source is empty"));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer, used to derive per-point rotation seeds.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the rotation applied at grid index `index` under `seed`.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    mix(seed, index)
}

/// Runs the configured estimator at `p0`.
///
/// `point_index` identifies the query point (e.g. its pixel index) so that
/// seeded rotations differ per point yet stay reproducible regardless of
/// evaluation order. It defaults to 0.
pub fn estimate(field: &dyn ScalarField, p0: &Point, cfg: &EstimatorConfig, point_index: Option<u64>) -> Result<GradientEstimate> {
    cfg.validate()?;
    let rotated;
    let source = match cfg.seed {
        Some(seed) => {
            rotated = cfg.source.rotated(point_seed(seed, point_index.unwrap_or(0)))?;
            &rotated
        }
        None => &cfg.source,
    };
    match cfg.method {
        Method::SingleAxis => {
            let frames = source.frames()?;
            single_axis(field, p0, &frames[0], cfg.deriv_kind, cfg.h)
        }
        Method::MultiAxis => multi_axis(field, p0, &source.frames()?, cfg.deriv_kind, cfg.h),
        Method::MultiVector => multi_vector(field, p0, &source.set()?, cfg.deriv_kind, cfg.h),
        Method::Hart => hart_multisample(field, p0, &source.set()?, cfg.probe_radius),
    }
}
