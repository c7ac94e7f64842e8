//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use hyperlattice::{GroupElement, Point};
use num_complex::Complex64;

/// Base point `(xn + i yn) / den` with integer coordinates, so the conjugated
/// norm can be compared exactly.
#[derive(Clone, Copy, Debug)]
pub struct RationalPoint {
    pub xn: i64,
    pub yn: i64,
    pub den: i64,
}

impl RationalPoint {
    pub const I: RationalPoint = RationalPoint { xn: 0, yn: 1, den: 1 };

    pub const fn new(xn: i64, yn: i64, den: i64) -> Self {
        RationalPoint { xn, yn, den }
    }

    pub fn point(&self) -> Point {
        Point::new(self.xn as f64 / self.den as f64, self.yn as f64 / self.den as f64).unwrap()
    }

    /// Conjugated norm of `γ` times `(yn·den)²`, exact.
    pub fn scaled_norm(&self, a: i64, b: i64, c: i64, d: i64) -> i128 {
        let (xn, yn, den) = (self.xn as i128, self.yn as i128, self.den as i128);
        let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
        // A·den, C·den, D·den and B·yn·den.
        let ad = a * den - c * xn;
        let cd = c * yn;
        let dd = d * den + c * xn;
        let k = ad * xn + b * den * den - d * den * xn;
        (ad * yn).pow(2) + k * k + (cd * yn).pow(2) + (dd * yn).pow(2)
    }

    pub fn scale(&self) -> i128 {
        (self.yn as i128 * self.den as i128).pow(2)
    }
}

/// Every `γ ∈ Γ(N)` with conjugated norm `≤ q2`, by a quadruple loop over the
/// box obtained from inverting the conjugation. Returned with the scaled norm.
pub fn naive_ball(level: i64, z0: RationalPoint, q2: i64) -> Vec<(GroupElement, i128)> {
    let x0 = z0.xn as f64 / z0.den as f64;
    let y0 = z0.yn as f64 / z0.den as f64;
    let q = (q2 as f64).sqrt();
    let bound = q2 as i128 * z0.scale();
    let c_max = (q / y0).ceil() as i64;
    let mut out = Vec::new();
    for c in -c_max..=c_max {
        if c % level != 0 {
            continue;
        }
        let shift = (c as f64 * x0).abs();
        let ad_max = (q + shift).ceil() as i64 + 1;
        for a in -ad_max..=ad_max {
            if (a - 1).rem_euclid(level) != 0 {
                continue;
            }
            for d in -ad_max..=ad_max {
                if (d - 1).rem_euclid(level) != 0 {
                    continue;
                }
                let big_a = a as f64 - c as f64 * x0;
                let b_max = (q * y0 + x0.abs() * (big_a.abs() + d.abs() as f64)).ceil() as i64 + 1;
                for b in -b_max..=b_max {
                    if b.rem_euclid(level) != 0 || a * d - b * c != 1 {
                        continue;
                    }
                    let norm = z0.scaled_norm(a, b, c, d);
                    if norm <= bound {
                        out.push((GroupElement::new(a, b, c, d).unwrap(), norm));
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Angle through the disk model: send `z1` to 0 by `z ↦ (z - z1)/(z - z̄1)`.
/// The upward vertical at `z1` becomes the positive real axis, so the
/// geodesic direction is `arg φ(γz0)`, folded into `[-π/2, π/2]`.
pub fn disk_angle(g: &GroupElement, z0: Point, z1: Point) -> Option<f64> {
    let (a, b, c, d) = g.entries_f64();
    let z = Complex64::new(z0.x(), z0.y());
    let w = (z * a + b) / (z * c + d);
    let p = Complex64::new(z1.x(), z1.y());
    let phi = (w - p) / (w - p.conj());
    if phi.norm() < 1e-13 {
        return None;
    }
    if phi.re == 0.0 {
        return Some(std::f64::consts::FRAC_PI_2.copysign(phi.im));
    }
    Some((phi.im / phi.re).atan())
}

/// Separation of two angles as undirected lines.
pub fn line_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Trial-division Möbius function.
pub fn mu(mut n: u64) -> i64 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

pub fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k as i64, n as i64) == 1).count() as u64
}

/// `(a, d) ∈ I1 × I2` with `a ≡ d ≡ 1 (mod N)` and `ad ≡ 1 (mod N|c|)`.
pub fn brute_box(c: i64, level: i64, i1: (i64, i64), i2: (i64, i64)) -> u64 {
    let m = level * c.abs();
    let mut n = 0;
    for a in i1.0..=i1.1 {
        if (a - 1).rem_euclid(level) != 0 {
            continue;
        }
        for d in i2.0..=i2.1 {
            if (d - 1).rem_euclid(level) == 0 && (a * d - 1).rem_euclid(m) == 0 {
                n += 1;
            }
        }
    }
    n
}

/// Unimodular matrix with lower row `(c, ·)` and `a` coprime to `c`, entries
/// bounded by about `max(|a|, |c|)`.
pub fn complete_row(a: i64, c: i64, d_shift: i64) -> Option<GroupElement> {
    if c == 0 {
        if a.abs() != 1 {
            return None;
        }
        return GroupElement::new(a, d_shift, 0, a).ok();
    }
    if gcd(a, c) != 1 {
        return None;
    }
    // d ≡ a⁻¹ (mod |c|), centered.
    let m = c.abs();
    let inv = (1..=m).find(|&d| (a.rem_euclid(m) * d - 1).rem_euclid(m) == 0).unwrap_or(0);
    let d = inv + d_shift * m;
    let b = (a * d - 1) / c;
    GroupElement::new(a, b, c, d).ok()
}
