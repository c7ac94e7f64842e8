//! Upper half-plane primitives: points, hyperbolic distance, the conjugation
//! sending a base point to `i`, and the angle observable of an orbit point.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::group::GroupElement;

/// Absolute tolerance used when deciding that a real quantity vanishes.
///
/// It is applied relative to the magnitude of the quantities being compared,
/// see [`angle_from_entries`].
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point {x}+{y}i is not in the upper half-plane")]
    NotInUpperHalfPlane { x: f64, y: f64 },
}

/// A point `x + iy` of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    x: f64,
    y: f64,
}

impl Point {
    pub const I: Point = Point { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(GeometryError::NotInUpperHalfPlane { x, y });
        }
        Ok(Point { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn is_i(&self) -> bool {
        self.x == 0.0 && self.y == 1.0
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// Entries `(A, B, C, D)` of `g0⁻¹ γ g0`, where `g0` is the affine map sending
/// `i` to the base point `z0`.
///
/// The lowercase field names refer to the real conjugated matrix, not to the
/// integer entries of `γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugatedEntries {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ConjugatedEntries {
    /// `C² + D²`
    pub fn e(&self) -> f64 {
        self.c * self.c + self.d * self.d
    }

    /// `AC + BD`
    pub fn f(&self) -> f64 {
        self.a * self.c + self.b * self.d
    }

    /// `A² + B²`
    pub fn g(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Squared Frobenius norm `A² + B² + C² + D²`, equal to `2 cosh ρ(z0, γz0)`.
    pub fn norm_sq(&self) -> f64 {
        self.e() + self.g()
    }
}

/// The observation point expressed in the frame where the base point is `i`:
/// `x* = (x1 - x0)/y0`, `y* = y1/y0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedTarget {
    x_star: f64,
    y_star: f64,
}

impl NormalizedTarget {
    pub fn new(x_star: f64, y_star: f64) -> Result<Self, GeometryError> {
        Point::new(x_star, y_star)?;
        Ok(NormalizedTarget { x_star, y_star })
    }

    pub fn from_points(z0: Point, z1: Point) -> Self {
        NormalizedTarget { x_star: (z1.x - z0.x) / z0.y, y_star: z1.y / z0.y }
    }

    pub fn x_star(&self) -> f64 {
        self.x_star
    }

    pub fn y_star(&self) -> f64 {
        self.y_star
    }

    /// The uniform case `z1 = z0`.
    pub fn is_base_point(&self) -> bool {
        self.x_star == 0.0 && self.y_star == 1.0
    }
}

/// Hyperbolic distance in the upper half-plane.
///
/// Uses `ρ = 2 asinh(|z - w| / (2 sqrt(Im z Im w)))`, which is the
/// `cosh ρ = 1 + |z - w|² / (2 Im z Im w)` relation rewritten to stay accurate
/// for nearby points.
pub fn hyperbolic_distance(z: Point, w: Point) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    let chord = dx.hypot(dy);
    2.0 * (chord / (2.0 * (z.y * w.y).sqrt())).asinh()
}

pub fn conjugate_entries(gamma: &GroupElement, z0: Point) -> ConjugatedEntries {
    let (a, b, c, d) = gamma.entries_f64();
    let (x0, y0) = (z0.x, z0.y);
    let big_a = a - c * x0;
    ConjugatedEntries { a: big_a, b: (big_a * x0 + b - d * x0) / y0, c: c * y0, d: c * x0 + d }
}

/// `ρ(z0, γz0)` from the conjugated norm.
pub fn orbit_distance(gamma: &GroupElement, z0: Point) -> f64 {
    distance_from_norm_sq(conjugate_entries(gamma, z0).norm_sq())
}

/// `arccosh(norm_sq / 2)`, clamped at zero for round-off below 2.
pub fn distance_from_norm_sq(norm_sq: f64) -> f64 {
    (norm_sq / 2.0).max(1.0).acosh()
}

/// Value of the angle observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Defined(f64),
    /// `γz0 = z1`: the geodesic ray degenerates.
    Undefined,
}

impl Angle {
    pub fn value(self) -> Option<f64> {
        match self {
            Angle::Defined(t) => Some(t),
            Angle::Undefined => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Angle::Undefined)
    }
}

/// Angle between the geodesic ray `[z1, γz0]` and the upward vertical at `z1`,
/// folded into `[-π/2, π/2]` through its tangent.
pub fn angle(gamma: &GroupElement, z0: Point, z1: Point) -> Angle {
    angle_from_entries(&conjugate_entries(gamma, z0), &NormalizedTarget::from_points(z0, z1))
}

/// Tangent formula `tan θ = 2y*(F - x*E) / ((y*² - x*²)E + 2x*F - G)`.
///
/// Vanishing is tested against `ZERO_TOL` scaled by `(E + G)(1 + x*² + y*²)`,
/// the natural magnitude of numerator and denominator.
pub fn angle_from_entries(entries: &ConjugatedEntries, target: &NormalizedTarget) -> Angle {
    let (x, y) = (target.x_star, target.y_star);
    let (e, f, g) = (entries.e(), entries.f(), entries.g());
    let numer = 2.0 * y * (f - x * e);
    let denom = (y * y - x * x) * e + 2.0 * x * f - g;
    let tol = ZERO_TOL * ((e + g) * (1.0 + x * x + y * y)).max(1.0);
    let numer_zero = numer.abs() <= tol;
    let denom_zero = denom.abs() <= tol;
    match (numer_zero, denom_zero) {
        (true, true) => Angle::Undefined,
        (_, true) => Angle::Defined(FRAC_PI_2.copysign(numer)),
        _ => Angle::Defined((numer / denom).atan()),
    }
}

/// Independent route to the angle: act by `γ` on `z0` with complex
/// arithmetic, find the center `α` on the real axis of the geodesic through
/// `z1` and `γz0`, and take `θ = arctan(y1 / (x1 - α))`.
pub fn angle_oracle(gamma: &GroupElement, z0: Point, z1: Point) -> Angle {
    let w = gamma.act(z0.to_complex());
    let z = z1.to_complex();
    let scale = 1.0 + w.norm_sqr() + z.norm_sqr();
    if (w - z).norm() <= ZERO_TOL * scale {
        return Angle::Undefined;
    }
    let du = w.re - z.re;
    if du == 0.0 {
        // γz0 lies on the vertical through z1.
        return Angle::Defined(0.0);
    }
    let alpha = (w.norm_sqr() - z.norm_sqr()) / (2.0 * du);
    Angle::Defined((z.im / (z.re - alpha)).atan())
}
