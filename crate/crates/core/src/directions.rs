//! Uniformly distributed direction sets in 2D and 3D.
//!
//! Sets come from regular polygons (2D) and regular or semiregular polyhedra
//! (3D) scaled to unit circumradius. A set can be rotated by a Haar-random
//! rotation without disturbing its distribution, and searched for the
//! orthonormal frames it contains, which is what the multi-axis estimator
//! consumes.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vector::{dot, norm, UnitVector, UNIT_TOL};

/// Default tolerance on `|dot|` when searching for perpendicular directions.
pub const FRAME_TOL: f64 = 1e-9;
/// Tolerance on the centroid norm of an antipodally closed set.
pub const CENTROID_TOL: f64 = 1e-9;
const DUPLICATE_TOL: f64 = 1e-12;
const ANTIPODE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Span {
    /// `k * pi / K`: half of the circle, no inverse vectors.
    Half,
    /// `k * 2pi / K`: the full circle.
    Full,
}

impl FromStr for Span {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Span::Half),
            "full" => Ok(Span::Full),
            _ => Err(Error::InvalidValue(format!("span must be `half` or `full`, got `{s}`"))),
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Span::Half => "half",
            Span::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polyhedron {
    Tetrahedron,
    Octahedron,
    Cube,
    Icosahedron,
    Dodecahedron,
    TruncatedOctahedron,
    SoccerBall,
}

impl Polyhedron {
    pub const ALL: [Polyhedron; 7] = [
        Polyhedron::Tetrahedron,
        Polyhedron::Octahedron,
        Polyhedron::Cube,
        Polyhedron::Icosahedron,
        Polyhedron::Dodecahedron,
        Polyhedron::TruncatedOctahedron,
        Polyhedron::SoccerBall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Polyhedron::Tetrahedron => "tetrahedron",
            Polyhedron::Octahedron => "octahedron",
            Polyhedron::Cube => "cube",
            Polyhedron::Icosahedron => "icosahedron",
            Polyhedron::Dodecahedron => "dodecahedron",
            Polyhedron::TruncatedOctahedron => "truncated_octahedron",
            Polyhedron::SoccerBall => "soccer_ball",
        }
    }

    pub fn vertex_count(self) -> usize {
        match self {
            Polyhedron::Tetrahedron => 4,
            Polyhedron::Octahedron => 6,
            Polyhedron::Cube => 8,
            Polyhedron::Icosahedron => 12,
            Polyhedron::Dodecahedron => 20,
            Polyhedron::TruncatedOctahedron => 24,
            Polyhedron::SoccerBall => 60,
        }
    }
}

impl FromStr for Polyhedron {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Polyhedron::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPolyhedron(s.to_string()))
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a direction set came from.
#[derive(Debug, Clone, PartialEq)]
pub enum SetSource {
    Polygon { k: usize, span: Span },
    Polyhedron(Polyhedron),
    Rotated { base: Box<SetSource>, seed: Option<u64> },
    Custom,
}

impl fmt::Display for SetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSource::Polygon { k, span } => write!(f, "polygon:{k}:{span}"),
            SetSource::Polyhedron(p) => write!(f, "{p}"),
            SetSource::Rotated { base, seed: Some(s) } => write!(f, "rotated({base},seed={s})"),
            SetSource::Rotated { base, seed: None } => write!(f, "rotated({base})"),
            SetSource::Custom => f.write_str("custom"),
        }
    }
}

/// An ordered, duplicate-free list of unit vectors of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    vectors: Vec<UnitVector>,
    source: SetSource,
    antipodal_closed: bool,
}

impl DirectionSet {
    pub fn new(vectors: Vec<UnitVector>, source: SetSource) -> Result<Self> {
        let dim = vectors
            .first()
            .map(UnitVector::dim)
            .ok_or(Error::EmptyInput("direction set is empty"))?;
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
        for (i, a) in vectors.iter().enumerate() {
            for b in &vectors[i + 1..] {
                if a.dot(b) >= 1.0 - DUPLICATE_TOL {
                    return Err(Error::InvalidSet(format!("duplicate direction {a}")));
                }
            }
        }
        let antipodal_closed = antipode_indices(&vectors).iter().all(Option::is_some);
        Ok(DirectionSet {
            dim,
            vectors,
            source,
            antipodal_closed,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[UnitVector] {
        &self.vectors
    }

    pub fn source(&self) -> &SetSource {
        &self.source
    }

    pub fn antipodal_closed(&self) -> bool {
        self.antipodal_closed
    }

    /// For each vector, the index of its antipode within the set, if any.
    pub fn antipodes(&self) -> Vec<Option<usize>> {
        antipode_indices(&self.vectors)
    }

    pub fn sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for v in &self.vectors {
            crate::vector::axpy(&mut s, 1.0, v.coords());
        }
        s
    }
}

fn antipode_indices(vectors: &[UnitVector]) -> Vec<Option<usize>> {
    vectors
        .iter()
        .map(|v| vectors.iter().position(|w| v.dot(w) <= -1.0 + ANTIPODE_TOL))
        .collect()
}

/// `n` mutually perpendicular unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalFrame {
    axes: Vec<UnitVector>,
}

impl OrthonormalFrame {
    /// Checks orthonormality to within 1e-12.
    pub fn new(axes: Vec<UnitVector>) -> Result<Self> {
        let dim = axes.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.dim(),
                });
            }
            for b in &axes[i + 1..] {
                let d = a.dot(b);
                if d.abs() > UNIT_TOL {
                    return Err(Error::InvalidSet(format!("frame axes {a} and {b} not orthogonal (dot {d:e})")));
                }
            }
        }
        Ok(OrthonormalFrame { axes })
    }

    pub fn canonical(dim: usize) -> Self {
        OrthonormalFrame {
            axes: (0..dim).map(|i| UnitVector::axis(dim, i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[UnitVector] {
        &self.axes
    }

    pub fn rotated(&self, r: &RotationMatrix) -> Result<Self> {
        let axes = self.axes.iter().map(|a| r.apply_unit(a)).collect::<Result<_>>()?;
        Ok(OrthonormalFrame { axes })
    }
}

/// A proper rotation of R^2 or R^3, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    dim: usize,
    entries: Vec<f64>,
    seed: Option<u64>,
}

impl RotationMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        RotationMatrix { dim, entries, seed: None }
    }

    /// Counter-clockwise rotation of the plane by `theta` radians.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        RotationMatrix {
            dim: 2,
            entries: vec![c, -s, s, c],
            seed: None,
        }
    }

    /// Rotation matrix of the quaternion `w + xi + yj + zk` (normalized first).
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        let entries = vec![
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ];
        RotationMatrix { dim: 3, entries, seed: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| dot(&self.entries[i * self.dim..(i + 1) * self.dim], v))
            .collect()
    }

    fn apply_unit(&self, v: &UnitVector) -> Result<UnitVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        UnitVector::new(self.apply(v.coords()))
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let entries = (0..n * n).map(|k| self.get(k % n, k / n)).collect();
        RotationMatrix {
            dim: n,
            entries,
            seed: self.seed,
        }
    }

    pub fn mul(&self, other: &RotationMatrix) -> Self {
        let n = self.dim;
        let entries = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                (0..n).map(|l| self.get(i, l) * other.get(l, j)).sum()
            })
            .collect();
        RotationMatrix { dim: n, entries, seed: None }
    }

    pub fn determinant(&self) -> f64 {
        let m = |i, j| self.get(i, j);
        match self.dim {
            1 => m(0, 0),
            2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
            _ => {
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
        }
    }

    /// Largest entry-wise deviation of `R^T R` from the identity.
    pub fn orthogonality_residual(&self) -> f64 {
        let p = self.transpose().mul(self);
        let id = RotationMatrix::identity(self.dim);
        p.entries
            .iter()
            .zip(&id.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Draws a Haar-uniform rotation of R^dim, deterministically from `seed`.
///
/// 2D draws an angle uniformly on [0, 2pi); 3D draws a uniform unit
/// quaternion (Shoemake's subgroup algorithm).
pub fn random_rotation(dim: usize, seed: u64) -> Result<RotationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = match dim {
        2 => RotationMatrix::from_angle(TAU * rng.random::<f64>()),
        3 => {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let u3: f64 = rng.random();
            let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
            let (s2, c2) = (TAU * u2).sin_cos();
            let (s3, c3) = (TAU * u3).sin_cos();
            RotationMatrix::from_quaternion(b * c3, a * s2, a * c2, b * s3)
        }
        _ => return Err(Error::UnsupportedDimension(dim)),
    };
    r.seed = Some(seed);
    Ok(r)
}

/// `(cos 2pi q, sin 2pi q)` with exact values on the quarter turns.
fn turn(num: usize, den: usize) -> [f64; 2] {
    let num = num % den;
    if (4 * num) % den == 0 {
        return match 4 * num / den {
            0 => [1.0, 0.0],
            1 => [0.0, 1.0],
            2 => [-1.0, 0.0],
            _ => [0.0, -1.0],
        };
    }
    let (s, c) = (TAU * num as f64 / den as f64).sin_cos();
    [c, s]
}

/// Vertices of a regular `k`-gon on the unit circle.
///
/// `Half` gives angles `pi k / K` (inverse vectors eliminated); `Full`
/// gives `2 pi k / K`. For even `K` the full set stores exact antipodes.
pub fn polygon_set(k: usize, span: Span) -> Result<DirectionSet> {
    if k < 2 {
        return Err(Error::InvalidValue(format!("polygon needs K >= 2, got {k}")));
    }
    let coords: Vec<[f64; 2]> = match span {
        Span::Half => (0..k).map(|i| turn(i, 2 * k)).collect(),
        Span::Full if k % 2 == 0 => {
            let first: Vec<[f64; 2]> = (0..k / 2).map(|i| turn(i, k)).collect();
            let second = first.iter().map(|&[x, y]| [-x, -y]);
            first.iter().copied().chain(second).collect()
        }
        Span::Full => (0..k).map(|i| turn(i, k)).collect(),
    };
    let vectors = coords
        .into_iter()
        .map(|c| UnitVector::new(c.to_vec()))
        .collect::<Result<_>>()?;
    DirectionSet::new(vectors, SetSource::Polygon { k, span })
}

fn signs(v: [f64; 3]) -> Vec<[f64; 3]> {
    // Every sign pattern over the nonzero coordinates.
    let mut out = vec![v];
    for axis in 0..3 {
        if v[axis] != 0.0 {
            let flipped: Vec<[f64; 3]> = out
                .iter()
                .map(|w| {
                    let mut w = *w;
                    w[axis] = -w[axis];
                    w
                })
                .collect();
            out.extend(flipped);
        }
    }
    out
}

fn cyclic(v: [f64; 3]) -> [[f64; 3]; 3] {
    [v, [v[2], v[0], v[1]], [v[1], v[2], v[0]]]
}

fn all_perms(v: [f64; 3]) -> [[f64; 3]; 6] {
    let [a, b, c] = v;
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

fn polyhedron_coords(p: Polyhedron) -> (Vec<[f64; 3]>, f64) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut out = Vec::new();
    let radius_sq = match p {
        Polyhedron::Tetrahedron => {
            out.extend([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]);
            3.0
        }
        Polyhedron::Octahedron => {
            for v in cyclic([1.0, 0.0, 0.0]) {
                out.extend(signs(v));
            }
            1.0
        }
        Polyhedron::Cube => {
            out.extend(signs([1.0, 1.0, 1.0]));
            3.0
        }
        Polyhedron::Icosahedron => {
            for v in cyclic([0.0, 1.0, phi]) {
                out.extend(signs(v));
            }
            1.0 + phi * phi
        }
        Polyhedron::Dodecahedron => {
            out.extend(signs([1.0, 1.0, 1.0]));
            for v in cyclic([0.0, 1.0 / phi, phi]) {
                out.extend(signs(v));
            }
            3.0
        }
        Polyhedron::TruncatedOctahedron => {
            for v in all_perms([0.0, 1.0, 2.0]) {
                out.extend(signs(v));
            }
            5.0
        }
        Polyhedron::SoccerBall => {
            // Even permutations of (0, ±1, ±3φ), (±1, ±(2+φ), ±2φ), (±φ, ±2, ±(2φ+1)).
            for base in [[0.0, 1.0, 3.0 * phi], [1.0, 2.0 + phi, 2.0 * phi], [phi, 2.0, 2.0 * phi + 1.0]] {
                for v in cyclic(base) {
                    out.extend(signs(v));
                }
            }
            10.0 + 9.0 * phi
        }
    };
    (out, radius_sq)
}

/// Vertices of a regular or semiregular polyhedron, centered at the origin
/// and scaled to unit circumradius.
pub fn polyhedron_set(p: Polyhedron) -> Result<DirectionSet> {
    let (coords, radius_sq) = polyhedron_coords(p);
    let inv = 1.0 / radius_sq.sqrt();
    let vectors = coords
        .into_iter()
        .map(|v| UnitVector::new(v.iter().map(|c| c * inv).collect()))
        .collect::<Result<_>>()?;
    DirectionSet::new(vectors, SetSource::Polyhedron(p))
}

pub fn rotate_set(s: &DirectionSet, r: &RotationMatrix) -> Result<DirectionSet> {
    if s.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: r.dim(),
        });
    }
    let vectors = s.vectors.iter().map(|v| r.apply_unit(v)).collect::<Result<_>>()?;
    DirectionSet::new(
        vectors,
        SetSource::Rotated {
            base: Box::new(s.source.clone()),
            seed: r.seed,
        },
    )
}

/// Representative of the line through `v`: first coordinate above 1e-12 in
/// magnitude is made positive.
fn line_representative(v: &[f64]) -> Vec<f64> {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => v.iter().map(|x| -x).collect(),
        _ => v.to_vec(),
    }
}

/// Distinct lines through the origin spanned by the set, in canonical order.
pub fn distinct_lines(s: &DirectionSet) -> Vec<UnitVector> {
    let mut lines: Vec<Vec<f64>> = Vec::new();
    for v in s.vectors() {
        let rep = line_representative(v.coords());
        if !lines.iter().any(|l| dot(l, &rep).abs() >= 1.0 - ANTIPODE_TOL) {
            lines.push(rep);
        }
    }
    lines.sort_by(|a, b| {
        b.iter()
            .zip(a)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    lines.into_iter().map(UnitVector::from_raw).collect()
}

/// Every set of `dim` mutually perpendicular lines in `s`, found by
/// exhaustive search. Antipodal pairs count as one line; each frame lists
/// its axes in canonical line order and frames are ordered lexicographically.
pub fn find_orthonormal_frames(s: &DirectionSet, tol: f64) -> Vec<OrthonormalFrame> {
    let lines = distinct_lines(s);
    let perp = |a: &UnitVector, b: &UnitVector| a.dot(b).abs() <= tol;
    let n = lines.len();
    let mut frames = Vec::new();
    match s.dim() {
        1 => frames.extend(lines.iter().map(|l| vec![l.clone()])),
        2 => {
            for i in 0..n {
                for j in i + 1..n {
                    if perp(&lines[i], &lines[j]) {
                        frames.push(vec![lines[i].clone(), lines[j].clone()]);
                    }
                }
            }
        }
        _ => {
            for i in 0..n {
                for j in i + 1..n {
                    if !perp(&lines[i], &lines[j]) {
                        continue;
                    }
                    for k in j + 1..n {
                        if perp(&lines[i], &lines[k]) && perp(&lines[j], &lines[k]) {
                            frames.push(vec![lines[i].clone(), lines[j].clone(), lines[k].clone()]);
                        }
                    }
                }
            }
        }
    }
    frames.into_iter().map(|axes| OrthonormalFrame { axes }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetReport {
    pub count: usize,
    pub dim: usize,
    /// Largest `| |v| - 1 |` over the set.
    pub max_norm_residual: f64,
    pub centroid_norm: f64,
    /// Smallest angle between two members, in degrees. `None` for a single vector.
    pub min_pairwise_angle_deg: Option<f64>,
    pub antipodal_closed: bool,
    pub line_count: usize,
    pub frame_count: usize,
}

impl SetReport {
    pub fn is_valid(&self) -> bool {
        self.max_norm_residual <= UNIT_TOL && (!self.antipodal_closed || self.centroid_norm <= CENTROID_TOL)
    }
}

pub fn validate_set(s: &DirectionSet) -> SetReport {
    let max_norm_residual = s
        .vectors()
        .iter()
        .map(|v| (norm(v.coords()) - 1.0).abs())
        .fold(0.0, f64::max);
    let max_dot = s
        .vectors()
        .iter()
        .enumerate()
        .flat_map(|(i, a)| s.vectors()[i + 1..].iter().map(move |b| a.dot(b)))
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    SetReport {
        count: s.len(),
        dim: s.dim(),
        max_norm_residual,
        centroid_norm: norm(&s.sum()),
        min_pairwise_angle_deg: max_dot.map(|d| d.clamp(-1.0, 1.0).acos() * 180.0 / PI),
        antipodal_closed: s.antipodal_closed(),
        line_count: distinct_lines(s).len(),
        frame_count: find_orthonormal_frames(s, FRAME_TOL).len(),
    }
}
