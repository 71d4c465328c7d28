//! Directional derivatives of a black-box field along a ray through a point.
//!
//! Three estimators are provided:
//!
//! * central difference, `(F(p + n h) - F(p - n h)) / 2h`;
//! * complex step, `Im F(p + n i h) / h`, which has no subtractive
//!   cancellation and so keeps full precision for arbitrarily small `h`;
//! * the line-averaged complex step, which combines the two opposing rays
//!   of the line through `p`.
//!
//! The line average is the signed mean `(Im F(p + n i h) - Im F(p - n i h)) / 2h`.
//! Summing the two imaginary parts instead would give exactly zero for any
//! field whose complex extension satisfies `F(conj z) = conj F(z)`, since the
//! two terms are negatives of each other; the difference is what makes the
//! opposing rays reinforce.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::vector::{Point, UnitVector};

pub const DEFAULT_CENTRAL_H: f64 = 1e-6;
pub const DEFAULT_COMPLEX_H: f64 = 1e-100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivKind {
    Central,
    Complex,
    ComplexLineAvg,
}

impl DerivKind {
    pub const ALL: [DerivKind; 3] = [DerivKind::Central, DerivKind::Complex, DerivKind::ComplexLineAvg];

    pub fn as_str(self) -> &'static str {
        match self {
            DerivKind::Central => "central",
            DerivKind::Complex => "complex",
            DerivKind::ComplexLineAvg => "complex-line-avg",
        }
    }

    pub fn default_h(self) -> f64 {
        match self {
            DerivKind::Central => DEFAULT_CENTRAL_H,
            DerivKind::Complex | DerivKind::ComplexLineAvg => DEFAULT_COMPLEX_H,
        }
    }

    pub fn needs_complex(self) -> bool {
        !matches!(self, DerivKind::Central)
    }
}

impl fmt::Display for DerivKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DerivKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DerivKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown derivative kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivEstimate {
    pub value: f64,
    pub direction: UnitVector,
    pub h: f64,
    pub kind: DerivKind,
}

fn check_inputs(field: &dyn ScalarField, p0: &Point, n: &UnitVector, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidValue(format!("step size must be positive and finite, got {h}")));
    }
    let dim = field.dim();
    for got in [p0.dim(), n.dim()] {
        if got != dim {
            return Err(Error::DimensionMismatch { expected: dim, got });
        }
    }
    Ok(())
}

fn check_complex(field: &dyn ScalarField) -> Result<()> {
    if field.supports_complex() {
        Ok(())
    } else {
        Err(Error::MissingCapability {
            field: field.name().to_string(),
            capability: "complex evaluation",
        })
    }
}

fn probe_real(field: &dyn ScalarField, at: Vec<f64>) -> Result<f64> {
    let v = field.eval(&at);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            field: field.name().to_string(),
            at,
        })
    }
}

/// `Im F(p0 + n i t)`.
fn probe_imag(field: &dyn ScalarField, p0: &Point, n: &UnitVector, t: f64) -> Result<f64> {
    let z: Vec<Complex64> = p0
        .coords()
        .iter()
        .zip(n.coords())
        .map(|(&p, &d)| Complex64::new(p, t * d))
        .collect();
    let v = field.eval_complex(&z).ok_or_else(|| Error::MissingCapability {
        field: field.name().to_string(),
        capability: "complex evaluation",
    })?;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v.im)
    } else {
        Err(Error::NonFinite {
            field: field.name().to_string(),
            at: p0.coords().to_vec(),
        })
    }
}

fn finish(value: f64, n: &UnitVector, h: f64, kind: DerivKind, field: &dyn ScalarField, p0: &Point) -> Result<DerivEstimate> {
    if !value.is_finite() {
        return Err(Error::NonFinite {
            field: field.name().to_string(),
            at: p0.coords().to_vec(),
        });
    }
    Ok(DerivEstimate {
        value,
        direction: n.clone(),
        h,
        kind,
    })
}

pub fn central_diff(field: &dyn ScalarField, p0: &Point, n: &UnitVector, h: f64) -> Result<DerivEstimate> {
    check_inputs(field, p0, n, h)?;
    let fwd = probe_real(field, p0.offset(n.coords(), h))?;
    let bwd = probe_real(field, p0.offset(n.coords(), -h))?;
    finish((fwd - bwd) / (2.0 * h), n, h, DerivKind::Central, field, p0)
}

pub fn complex_step(field: &dyn ScalarField, p0: &Point, n: &UnitVector, h: f64) -> Result<DerivEstimate> {
    check_inputs(field, p0, n, h)?;
    check_complex(field)?;
    let im = probe_imag(field, p0, n, h)?;
    finish(im / h, n, h, DerivKind::Complex, field, p0)
}

pub fn complex_step_line_avg(field: &dyn ScalarField, p0: &Point, n: &UnitVector, h: f64) -> Result<DerivEstimate> {
    check_inputs(field, p0, n, h)?;
    check_complex(field)?;
    let fwd = probe_imag(field, p0, n, h)?;
    let bwd = probe_imag(field, p0, n, -h)?;
    finish((fwd - bwd) / (2.0 * h), n, h, DerivKind::ComplexLineAvg, field, p0)
}

pub fn directional(field: &dyn ScalarField, p0: &Point, n: &UnitVector, kind: DerivKind, h: f64) -> Result<DerivEstimate> {
    match kind {
        DerivKind::Central => central_diff(field, p0, n, h),
        DerivKind::Complex => complex_step(field, p0, n, h),
        DerivKind::ComplexLineAvg => complex_step_line_avg(field, p0, n, h),
    }
}
