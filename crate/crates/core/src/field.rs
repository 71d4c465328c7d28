//! Black-box scalar fields and the built-in test corpus.
//!
//! A field only has to answer real point queries. Fields that also accept
//! complex coordinates can be differentiated by complex step, and corpus
//! fields with a closed-form gradient expose it as an oracle for the error
//! analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::vector::{norm, scale, Point};

/// Field value outside an indicator shape.
pub const OUTSIDE: f64 = 1.0;
/// Field value inside an indicator shape.
pub const INSIDE: f64 = -1.0;

pub const DEFAULT_MAX_ITER: u32 = 256;
const ESCAPE_RADIUS_SQ: f64 = 4.0;

/// A real-valued function on R^n, n in {1,2,3}.
///
/// Implementations must be pure: every method may be called concurrently.
pub trait ScalarField: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn eval(&self, p: &[f64]) -> f64;

    fn supports_complex(&self) -> bool {
        false
    }

    /// Evaluates the holomorphic extension at complex coordinates. Returns
    /// `None` when the field has no such extension.
    ///
    /// With all imaginary parts zero the real part must equal [`eval`]
    /// exactly.
    ///
    /// [`eval`]: ScalarField::eval
    fn eval_complex(&self, _z: &[Complex64]) -> Option<Complex64> {
        None
    }

    fn has_analytic_gradient(&self) -> bool {
        false
    }

    fn analytic_gradient(&self, _p: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Ground-truth gradient direction at `p`.
pub fn unit_gradient(field: &dyn ScalarField, p: &Point) -> Result<Vec<f64>> {
    if p.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: p.dim(),
        });
    }
    let g = field
        .analytic_gradient(p.coords())
        .ok_or_else(|| Error::MissingCapability {
            field: field.name().to_string(),
            capability: "an analytic gradient",
        })?;
    let n = norm(&g);
    if !n.is_finite() || n < 1e-300 {
        return Err(Error::DegenerateGradient { norm: n });
    }
    Ok(scale(&g, 1.0 / n))
}

/// The built-in fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorpusField {
    /// `a x^2 + b x + c`
    Quadratic1d { a: f64, b: f64, c: f64 },
    /// `x^2 + y^2 - r^2`
    Circle0 { r: f64 },
    /// `(x/r)^2 + (y/r)^2 - 1`
    Circle1 { r: f64 },
    /// `sqrt(x^2 + y^2) - r`
    Circle2 { r: f64 },
    /// `(x^2 + y^2)^a - r^(2a)`
    Circle3 { r: f64, a: f64 },
    /// `x^2 + y^2 + z^2 - r^2`
    Sphere3d { r: f64 },
    /// Indicator, outside for `y > 0`.
    HalfPlane2d,
    /// Indicator, inside for `x^2 + y^2 <= r^2`.
    Disk2d { r: f64 },
    /// Indicator of the Mandelbrot set, `(x, y)` read as `c = x + iy`.
    Mandelbrot2d { max_iter: u32 },
    /// `exp(x) sin(y)`, a smooth non-polynomial field for step-size studies.
    ExpSin2d,
}

impl CorpusField {
    pub const NAMES: [&'static str; 10] = [
        "quadratic1d",
        "circle0",
        "circle1",
        "circle2",
        "circle3",
        "sphere3d",
        "halfplane2d",
        "disk2d",
        "mandelbrot2d",
        "expsin2d",
    ];

    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            CorpusField::HalfPlane2d | CorpusField::Disk2d { .. } | CorpusField::Mandelbrot2d { .. }
        )
    }
}

/// Builds a corpus field from its name and parameters.
///
/// Unknown names, missing parameters and unexpected parameters are errors.
/// `mandelbrot2d` defaults `max_iter` to 256.
pub fn corpus_field(name: &str, params: &BTreeMap<String, f64>) -> Result<CorpusField> {
    let allowed: &[&str] = match name {
        "quadratic1d" => &["a", "b", "c"],
        "circle0" | "circle1" | "circle2" | "sphere3d" | "disk2d" => &["r"],
        "circle3" => &["r", "a"],
        "halfplane2d" | "expsin2d" => &[],
        "mandelbrot2d" => &["max_iter"],
        _ => return Err(Error::UnknownField(name.to_string())),
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter {
            field: name.to_string(),
            param: extra.clone(),
            reason: "not a parameter of this field".into(),
        });
    }
    let get = |key: &str| -> Result<f64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::MissingParameter {
                field: name.to_string(),
                param: key.to_string(),
            })
    };
    let invalid = |param: &str, reason: &str| Error::InvalidParameter {
        field: name.to_string(),
        param: param.to_string(),
        reason: reason.to_string(),
    };
    for (k, v) in params {
        if !v.is_finite() {
            return Err(invalid(k, "must be finite"));
        }
    }

    let field = match name {
        "quadratic1d" => CorpusField::Quadratic1d {
            a: get("a")?,
            b: get("b")?,
            c: get("c")?,
        },
        "circle0" => CorpusField::Circle0 { r: get("r")? },
        "circle1" => {
            let r = get("r")?;
            if r == 0.0 {
                return Err(invalid("r", "must be nonzero"));
            }
            CorpusField::Circle1 { r }
        }
        "circle2" => CorpusField::Circle2 { r: get("r")? },
        "circle3" => {
            let a = get("a")?;
            if a <= 0.0 {
                return Err(invalid("a", "exponent must be positive"));
            }
            CorpusField::Circle3 { r: get("r")?, a }
        }
        "sphere3d" => CorpusField::Sphere3d { r: get("r")? },
        "halfplane2d" => CorpusField::HalfPlane2d,
        "disk2d" => CorpusField::Disk2d { r: get("r")? },
        "mandelbrot2d" => {
            let max_iter = match params.get("max_iter") {
                None => DEFAULT_MAX_ITER,
                Some(&m) if m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64 => m as u32,
                Some(_) => return Err(invalid("max_iter", "must be a positive integer")),
            };
            CorpusField::Mandelbrot2d { max_iter }
        }
        "expsin2d" => CorpusField::ExpSin2d,
        _ => unreachable!(),
    };
    Ok(field)
}

/// Parses `name:key=val,key=val` (the parameter list may be omitted).
impl FromStr for CorpusField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (s.trim(), ""),
        };
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::InvalidParameter {
                field: name.to_string(),
                param: kv.to_string(),
                reason: "expected key=value".into(),
            })?;
            let value: f64 = v.trim().parse().map_err(|_| Error::InvalidParameter {
                field: name.to_string(),
                param: k.trim().to_string(),
                reason: format!("`{}` is not a number", v.trim()),
            })?;
            if params.insert(k.trim().to_string(), value).is_some() {
                return Err(Error::InvalidParameter {
                    field: name.to_string(),
                    param: k.trim().to_string(),
                    reason: "given twice".into(),
                });
            }
        }
        corpus_field(name, &params)
    }
}

impl fmt::Display for CorpusField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CorpusField::Quadratic1d { a, b, c } => write!(f, "quadratic1d:a={a},b={b},c={c}"),
            CorpusField::Circle0 { r } => write!(f, "circle0:r={r}"),
            CorpusField::Circle1 { r } => write!(f, "circle1:r={r}"),
            CorpusField::Circle2 { r } => write!(f, "circle2:r={r}"),
            CorpusField::Circle3 { r, a } => write!(f, "circle3:r={r},a={a}"),
            CorpusField::Sphere3d { r } => write!(f, "sphere3d:r={r}"),
            CorpusField::HalfPlane2d => write!(f, "halfplane2d"),
            CorpusField::Disk2d { r } => write!(f, "disk2d:r={r}"),
            CorpusField::Mandelbrot2d { max_iter } => write!(f, "mandelbrot2d:max_iter={max_iter}"),
            CorpusField::ExpSin2d => write!(f, "expsin2d"),
        }
    }
}

fn indicator(inside: bool) -> f64 {
    if inside {
        INSIDE
    } else {
        OUTSIDE
    }
}

fn in_mandelbrot(cx: f64, cy: f64, max_iter: u32) -> bool {
    let (mut zx, mut zy) = (0.0f64, 0.0f64);
    for _ in 0..max_iter {
        let (x2, y2) = (zx * zx, zy * zy);
        if x2 + y2 > ESCAPE_RADIUS_SQ {
            return false;
        }
        zy = 2.0 * zx * zy + cy;
        zx = x2 - y2 + cx;
    }
    zx * zx + zy * zy <= ESCAPE_RADIUS_SQ
}

impl ScalarField for CorpusField {
    fn name(&self) -> &str {
        match self {
            CorpusField::Quadratic1d { .. } => "quadratic1d",
            CorpusField::Circle0 { .. } => "circle0",
            CorpusField::Circle1 { .. } => "circle1",
            CorpusField::Circle2 { .. } => "circle2",
            CorpusField::Circle3 { .. } => "circle3",
            CorpusField::Sphere3d { .. } => "sphere3d",
            CorpusField::HalfPlane2d => "halfplane2d",
            CorpusField::Disk2d { .. } => "disk2d",
            CorpusField::Mandelbrot2d { .. } => "mandelbrot2d",
            CorpusField::ExpSin2d => "expsin2d",
        }
    }

    fn dim(&self) -> usize {
        match self {
            CorpusField::Quadratic1d { .. } => 1,
            CorpusField::Sphere3d { .. } => 3,
            _ => 2,
        }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        match *self {
            CorpusField::Quadratic1d { a, b, c } => {
                let x = p[0];
                a * x * x + b * x + c
            }
            CorpusField::Circle0 { r } => p[0] * p[0] + p[1] * p[1] - r * r,
            CorpusField::Circle1 { r } => {
                let (u, v) = (p[0] / r, p[1] / r);
                u * u + v * v - 1.0
            }
            CorpusField::Circle2 { r } => (p[0] * p[0] + p[1] * p[1]).sqrt() - r,
            CorpusField::Circle3 { r, a } => {
                (p[0] * p[0] + p[1] * p[1]).powf(a) - (r * r).powf(a)
            }
            CorpusField::Sphere3d { r } => p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - r * r,
            CorpusField::HalfPlane2d => indicator(p[1] <= 0.0),
            CorpusField::Disk2d { r } => indicator(p[0] * p[0] + p[1] * p[1] <= r * r),
            CorpusField::Mandelbrot2d { max_iter } => indicator(in_mandelbrot(p[0], p[1], max_iter)),
            CorpusField::ExpSin2d => p[0].exp() * p[1].sin(),
        }
    }

    fn supports_complex(&self) -> bool {
        !self.is_indicator()
    }

    fn eval_complex(&self, z: &[Complex64]) -> Option<Complex64> {
        let v = match *self {
            CorpusField::Quadratic1d { a, b, c } => {
                let x = z[0];
                x * a * x + x * b + c
            }
            CorpusField::Circle0 { r } => z[0] * z[0] + z[1] * z[1] - r * r,
            CorpusField::Circle1 { r } => {
                let (u, v) = (z[0] / r, z[1] / r);
                u * u + v * v - 1.0
            }
            CorpusField::Circle2 { r } => (z[0] * z[0] + z[1] * z[1]).sqrt() - r,
            CorpusField::Circle3 { r, a } => (z[0] * z[0] + z[1] * z[1]).powf(a) - (r * r).powf(a),
            CorpusField::Sphere3d { r } => z[0] * z[0] + z[1] * z[1] + z[2] * z[2] - r * r,
            CorpusField::ExpSin2d => z[0].exp() * z[1].sin(),
            CorpusField::HalfPlane2d | CorpusField::Disk2d { .. } | CorpusField::Mandelbrot2d { .. } => {
                return None
            }
        };
        Some(v)
    }

    fn has_analytic_gradient(&self) -> bool {
        !self.is_indicator()
    }

    fn analytic_gradient(&self, p: &[f64]) -> Option<Vec<f64>> {
        let g = match *self {
            CorpusField::Quadratic1d { a, b, .. } => vec![2.0 * a * p[0] + b],
            CorpusField::Circle0 { .. } => vec![2.0 * p[0], 2.0 * p[1]],
            CorpusField::Circle1 { r } => {
                let s = 2.0 / (r * r);
                vec![s * p[0], s * p[1]]
            }
            CorpusField::Circle2 { .. } => {
                let len = (p[0] * p[0] + p[1] * p[1]).sqrt();
                vec![p[0] / len, p[1] / len]
            }
            CorpusField::Circle3 { a, .. } => {
                let s = 2.0 * a * (p[0] * p[0] + p[1] * p[1]).powf(a - 1.0);
                vec![s * p[0], s * p[1]]
            }
            CorpusField::Sphere3d { .. } => vec![2.0 * p[0], 2.0 * p[1], 2.0 * p[2]],
            CorpusField::ExpSin2d => {
                let e = p[0].exp();
                vec![e * p[1].sin(), e * p[1].cos()]
            }
            CorpusField::HalfPlane2d | CorpusField::Disk2d { .. } | CorpusField::Mandelbrot2d { .. } => {
                return None
            }
        };
        Some(g)
    }
}

type RealFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type ComplexFn = Box<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A field assembled from closures, for callers with their own black box.
pub struct FnField {
    name: String,
    dim: usize,
    real: RealFn,
    complex: Option<ComplexFn>,
    gradient: Option<GradFn>,
}

impl FnField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FnField {
            name: name.into(),
            dim,
            real: Box::new(f),
            complex: None,
            gradient: None,
        }
    }

    pub fn with_complex(mut self, f: impl Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static) -> Self {
        self.complex = Some(Box::new(f));
        self
    }

    pub fn with_gradient(mut self, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Box::new(f));
        self
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("complex", &self.complex.is_some())
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarField for FnField {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, p: &[f64]) -> f64 {
        (self.real)(p)
    }

    fn supports_complex(&self) -> bool {
        self.complex.is_some()
    }

    fn eval_complex(&self, z: &[Complex64]) -> Option<Complex64> {
        self.complex.as_ref().map(|f| f(z))
    }

    fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    fn analytic_gradient(&self, p: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(p))
    }
}
