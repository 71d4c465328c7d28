//! Points, unit vectors and the handful of small-vector helpers the rest of
//! the crate needs. Dimensions are 1, 2 or 3, so plain `Vec<f64>` storage is
//! used throughout.

use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on `|v| - 1` accepted for a [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-12;

pub const MAX_DIM: usize = 3;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `acc += s * v`
pub fn axpy(acc: &mut [f64], s: f64, v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += s * x;
    }
}

pub fn scale(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// A position in 1-, 2- or 3-space with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "point has non-finite coordinate: {coords:?}"
            )));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// `self + t * dir`, as a raw coordinate vector.
    pub fn offset(&self, dir: &[f64], t: f64) -> Vec<f64> {
        self.0.iter().zip(dir).map(|(p, n)| p + t * n).collect()
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point::new(c.to_vec()).expect("finite 2D point")
    }
}

impl From<[f64; 3]> for Point {
    fn from(c: [f64; 3]) -> Self {
        Point::new(c.to_vec()).expect("finite 3D point")
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::new(vec![x]).expect("finite 1D point")
    }
}

/// A direction whose Euclidean norm is within [`UNIT_TOL`] of one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts `coords` only if it is already unit length.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(UnitVector(coords))
    }

    /// Scales `coords` to unit length.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let n = norm(&coords);
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(UnitVector(scale(&coords, 1.0 / n)))
    }

    pub fn axis(dim: usize, i: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[i] = 1.0;
        UnitVector(c)
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        UnitVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        UnitVector(self.0.iter().map(|c| -c).collect())
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.0, &other.0)
    }
}

impl fmt::Display for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Formats a double with 17 significant digits so it round-trips exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_rejects_non_finite_and_bad_dims() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![0.0; 4]).is_err());
        assert_eq!(Point::new(vec![1.0, 2.0]).unwrap().dim(), 2);
    }

    #[test]
    fn unit_vector_checks_norm() {
        assert!(UnitVector::new(vec![1.0, 1.0]).is_err());
        assert!(UnitVector::new(vec![0.6, 0.8]).is_ok());
        let u = UnitVector::normalize(vec![3.0, 4.0]).unwrap();
        assert!((u.coords()[0] - 0.6).abs() < 1e-15);
        assert!(UnitVector::normalize(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
