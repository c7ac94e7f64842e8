//! Closed-form quantities: the index of `Γ(N)`, the constant `C_N`, the
//! limiting angle distribution `Ξ` and its density, the interval unions that
//! describe `tan θ < λ`, and the main terms of the ball, sector and angle
//! counts.

use std::f64::consts::{FRAC_PI_2, PI};

use num_rational::Ratio;

use crate::arith::{integrate, prime_divisors};
use crate::geometry::{NormalizedTarget, Point};

/// `[Γ(1) : Γ(N)] = N³ Π_{p | N} (1 - p⁻²)`.
pub fn index_gamma_n(level: u32) -> u64 {
    assert!(level >= 1, "level must be at least 1");
    let n = level as u64;
    prime_divisors(n).into_iter().fold(n * n * n, |acc, p| acc / (p * p) * (p * p - 1))
}

/// `C_N = (1/ζ(2)) Π_{p | N} (1 - p⁻²)⁻¹`, carried as the exact rational
/// factor `ζ(2) C_N` plus its float value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CnConstant {
    pub zeta2_multiple: Ratio<i128>,
    pub value: f64,
}

pub fn c_n(level: u32) -> CnConstant {
    assert!(level >= 1, "level must be at least 1");
    let r = prime_divisors(level as u64).into_iter().fold(Ratio::from_integer(1i128), |acc, p| {
        let p2 = (p * p) as i128;
        acc * Ratio::new(p2, p2 - 1)
    });
    let value = *r.numer() as f64 / *r.denom() as f64 * 6.0 / (PI * PI);
    CnConstant { zeta2_multiple: r, value }
}

/// `π² C_N / N³` as an exact rational (the `π²` cancels against `1/ζ(2)`).
pub fn ball_coefficient(level: u32) -> Ratio<i128> {
    let n = level as i128;
    c_n(level).zeta2_multiple * Ratio::from_integer(6) / Ratio::from_integer(n * n * n)
}

/// Level, base point and observation point with the derived constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryContext {
    level: u32,
    z0: Point,
    z1: Point,
    target: NormalizedTarget,
    index: u64,
    c_n: CnConstant,
}

impl TheoryContext {
    pub fn new(level: u32, z0: Point, z1: Point) -> Self {
        TheoryContext {
            level,
            z0,
            z1,
            target: NormalizedTarget::from_points(z0, z1),
            index: index_gamma_n(level),
            c_n: c_n(level),
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn z0(&self) -> Point {
        self.z0
    }
    pub fn z1(&self) -> Point {
        self.z1
    }
    pub fn target(&self) -> NormalizedTarget {
        self.target
    }
    pub fn index(&self) -> u64 {
        self.index
    }
    pub fn c_n(&self) -> CnConstant {
        self.c_n
    }
}

/// Limiting distribution function `Ξ_{x*,y*}(ω)` on `[-π/2, π/2]`.
///
/// The endpoints and `ω = 0` use the limit values; arguments outside the
/// interval are clamped.
pub fn xi(target: &NormalizedTarget, omega: f64) -> f64 {
    let (x, y) = (target.x_star(), target.y_star());
    if omega <= -FRAC_PI_2 {
        return 0.0;
    }
    if omega >= FRAC_PI_2 {
        return 1.0;
    }
    let base = -((x + y).atan() + (x - y).atan()) / PI;
    if omega == 0.0 {
        return x.atan() / PI + 0.5 + base;
    }
    let h = 0.5 * omega;
    let step = if omega > 0.0 { 1.0 } else { 0.0 };
    (x + y * h.tan()).atan() / PI + (x - y / h.tan()).atan() / PI + base + step
}

/// Density `ρ` in normalized coordinates (`y0 = 1`, `x1 - x0 = x*`,
/// `y1 = y*`); `Ξ' = ρ/π`.
pub fn density_normalized(target: &NormalizedTarget, t: f64) -> f64 {
    let (x, y) = (target.x_star(), target.y_star());
    let s = 1.0 + x * x + y * y;
    let w = (1.0 + x * x - y * y) * t.cos() + 2.0 * x * y * t.sin();
    2.0 * y * s / (s * s - w * w)
}

/// Density `ρ_{z0,z1}(t)` in the original coordinates.
pub fn density_rho(ctx: &TheoryContext, t: f64) -> f64 {
    let (x0, y0) = (ctx.z0.x(), ctx.z0.y());
    let (x1, y1) = (ctx.z1.x(), ctx.z1.y());
    let dx = x1 - x0;
    let s = y0 * y0 + dx * dx + y1 * y1;
    let w = (y0 * y0 + dx * dx - y1 * y1) * t.cos() + 2.0 * dx * y1 * t.sin();
    2.0 * y0 * y1 * s / (s * s - w * w)
}

/// `(1/π) ∫_lo^hi ρ`, the limiting probability of `lo ≤ θ ≤ hi`.
pub fn density_mass(ctx: &TheoryContext, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    // ρ peaks where |w| is largest, at t* and t* ± π; quadrature is split there.
    let (x0, y0) = (ctx.z0.x(), ctx.z0.y());
    let (x1, y1) = (ctx.z1.x(), ctx.z1.y());
    let dx = x1 - x0;
    let peak = (2.0 * dx * y1).atan2(y0 * y0 + dx * dx - y1 * y1);
    let mut cuts = vec![lo];
    for k in -2..=2 {
        let t = peak + k as f64 * PI;
        if t > lo && t < hi {
            cuts.push(t);
        }
    }
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| integrate(|t| density_rho(ctx, t), w[0], w[1])).sum::<f64>() / PI
}

/// Finite union of disjoint open intervals, sorted; endpoints may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Drops empty pieces, sorts, and merges overlapping ones. Pieces sharing
    /// only an endpoint stay separate since the endpoint is excluded.
    pub fn new(mut pieces: Vec<(f64, f64)>) -> Self {
        pieces.retain(|&(lo, hi)| lo < hi);
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match intervals.last_mut() {
                Some(last) if lo < last.1 => last.1 = last.1.max(hi),
                _ => intervals.push((lo, hi)),
            }
        }
        IntervalUnion { intervals }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo < x && x < hi)
    }

    pub fn shifted(&self, by: f64) -> IntervalUnion {
        IntervalUnion { intervals: self.intervals.iter().map(|&(lo, hi)| (lo + by, hi + by)).collect() }
    }
}

/// Roots bounding the union for `λ ≠ 0`: `(α1, α2)` with `α2 = 1/α1` when
/// `λ > 0`, and `(α1*, α2*)` with `α2* = -1/α1*` when `λ < 0`.
pub fn s_roots(lambda: f64) -> Option<(f64, f64)> {
    let s = (1.0 + lambda * lambda).sqrt();
    if lambda > 0.0 {
        Some(((1.0 + s) / lambda, lambda / (1.0 + s)))
    } else if lambda < 0.0 {
        let l = lambda.abs();
        Some((-l / (1.0 + s), (1.0 + s) / l))
    } else {
        None
    }
}

/// The set of `t = X - x*` with `2y* t / (y*² - t²) < λ`.
pub fn build_s(y_star: f64, lambda: f64) -> IntervalUnion {
    let y = y_star;
    match s_roots(lambda) {
        Some((a1, a2)) if lambda > 0.0 => {
            IntervalUnion::new(vec![(f64::NEG_INFINITY, -y * a1), (-y, y * a2), (y, f64::INFINITY)])
        }
        Some((a1, a2)) => IntervalUnion::new(vec![(-y, y * a1), (y, y * a2)]),
        None => IntervalUnion::new(vec![(-y, 0.0), (y, f64::INFINITY)]),
    }
}

/// `6 e^R / [Γ(1) : Γ(N)]`.
pub fn ball_main_term(level: u32, radius: f64) -> f64 {
    6.0 * radius.exp() / index_gamma_n(level) as f64
}

/// `6 Q² / [Γ(1) : Γ(N)]`.
pub fn ball_main_term_q(level: u32, norm_bound_sq: f64) -> f64 {
    6.0 * norm_bound_sq / index_gamma_n(level) as f64
}

/// `π (π + 2 arctan β) C_N Q² / (2N³)`.
pub fn sector_main_term(level: u32, beta: f64, q: f64) -> f64 {
    let n = level as f64;
    let angle = if beta == f64::INFINITY {
        FRAC_PI_2
    } else if beta == f64::NEG_INFINITY {
        -FRAC_PI_2
    } else {
        beta.atan()
    };
    PI * (PI + 2.0 * angle) * c_n(level).value * q * q / (2.0 * n * n * n)
}

/// `π² C_N Ξ(ω) e^R / N³`.
pub fn angle_count_main_term(ctx: &TheoryContext, omega: f64, radius: f64) -> f64 {
    let n = ctx.level as f64;
    PI * PI * ctx.c_n.value * xi(&ctx.target, omega) * radius.exp() / (n * n * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(x: f64, y: f64) -> Result<NormalizedTarget, crate::geometry::GeometryError> {
        NormalizedTarget::new(x, y)
    }

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y).unwrap()
    }

    #[test]
    fn index_examples() {
        assert_eq!(index_gamma_n(1), 1);
        assert_eq!(index_gamma_n(2), 6);
        assert_eq!(index_gamma_n(6), 144);
        assert_eq!(index_gamma_n(4), 48);
    }

    #[test]
    fn c_n_examples() {
        let one = c_n(1);
        assert_eq!(one.zeta2_multiple, Ratio::from_integer(1));
        assert!((one.value - 0.607927101854027).abs() < 1e-12);
        let two = c_n(2);
        assert_eq!(two.zeta2_multiple, Ratio::new(4, 3));
        assert!((two.value - 8.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn c_n_matches_truncated_series() {
        let limit = 1_000_000usize;
        let mu = crate::arith::moebius_sieve(limit);
        for level in [1u32, 2, 3, 6, 10] {
            let series: f64 = (1..=limit)
                .filter(|&n| num_integer::Integer::gcd(&n, &(level as usize)) == 1)
                .map(|n| mu[n] as f64 / (n as f64 * n as f64))
                .sum();
            assert!((series - c_n(level).value).abs() < 1e-6, "N = {level}");
        }
    }

    #[test]
    fn xi_examples() {
        let t = target(0.3, 1.7).unwrap();
        assert_eq!(xi(&t, -FRAC_PI_2), 0.0);
        assert_eq!(xi(&t, FRAC_PI_2), 1.0);
        let uniform = target(0.0, 1.0).unwrap();
        assert!((xi(&uniform, PI / 4.0) - 0.75).abs() < 1e-15);
        for k in -10..=10 {
            let w = k as f64 * 0.15;
            assert!((xi(&uniform, w) - (w / PI + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn xi_raw_formula_meets_endpoints() {
        let t = target(-1.2, 0.4).unwrap();
        assert!(xi(&t, -FRAC_PI_2 + 1e-9) < 1e-8);
        assert!(xi(&t, FRAC_PI_2 - 1e-9) > 1.0 - 1e-8);
        let zero = xi(&t, 0.0);
        assert!((xi(&t, 1e-8) - zero).abs() < 1e-6);
        assert!((xi(&t, -1e-8) - zero).abs() < 1e-6);
    }

    #[test]
    fn density_examples() {
        let uniform = TheoryContext::new(1, Point::I, Point::I);
        for k in -5..=5 {
            assert!((density_rho(&uniform, k as f64 * 0.3) - 1.0).abs() < 1e-15);
        }
        let ctx = TheoryContext::new(1, Point::I, pt(0.0, 2.0));
        assert!((density_rho(&ctx, 0.0) - 1.25).abs() < 1e-15);
        let ctx = TheoryContext::new(3, pt(0.4, 0.7), pt(-1.0, 2.5));
        let total = integrate(|t| density_rho(&ctx, t), -FRAC_PI_2, FRAC_PI_2);
        assert!((total - PI).abs() < 1e-8);
        let n = density_normalized(&ctx.target(), 0.37);
        assert!((n - density_rho(&ctx, 0.37)).abs() < 1e-12);
    }

    #[test]
    fn build_s_examples() {
        let zero = build_s(1.5, 0.0);
        assert_eq!(zero.intervals(), &[(-1.5, 0.0), (1.5, f64::INFINITY)]);
        let one = build_s(1.0, 1.0);
        let r2 = 2f64.sqrt();
        let iv = one.intervals();
        assert_eq!(iv.len(), 3);
        assert!((iv[0].1 + 1.0 + r2).abs() < 1e-15);
        assert_eq!(iv[1].0, -1.0);
        assert!((iv[1].1 - (r2 - 1.0)).abs() < 1e-15);
        assert_eq!(iv[2], (1.0, f64::INFINITY));
        assert!(one.contains(0.2));
    }

    #[test]
    fn root_reciprocity() {
        for lambda in [1e-6, 0.1, 1.0, 7.5, 1e6] {
            let (a1, a2) = s_roots(lambda).unwrap();
            assert!((a1 * a2 - 1.0).abs() < 1e-12);
            let (b1, b2) = s_roots(-lambda).unwrap();
            assert!((b1 * b2 + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn main_terms() {
        assert!((ball_main_term(2, 10.0) - 10f64.exp()).abs() < 1e-9);
        assert_eq!(ball_main_term_q(1, 2.0), 12.0);
        assert_eq!(sector_main_term(4, f64::NEG_INFINITY, 50.0), 0.0);
        assert!((sector_main_term(1, f64::INFINITY, 1000.0) - 6e6).abs() < 1e-6);
        assert!((sector_main_term(1, 0.0, 1000.0) - 3e6).abs() < 1e-6);
        let ctx = TheoryContext::new(1, Point::I, Point::I);
        assert!((angle_count_main_term(&ctx, 0.0, 10.0) - 3.0 * 10f64.exp()).abs() < 1e-6);
        assert_eq!(angle_count_main_term(&ctx, -FRAC_PI_2, 10.0), 0.0);
        let ctx = TheoryContext::new(5, pt(1.0, 2.0), pt(0.0, 1.0));
        let full = angle_count_main_term(&ctx, FRAC_PI_2, 7.0);
        assert!((full / ball_main_term(5, 7.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_is_six_over_index() {
        for level in 1..=100u32 {
            assert_eq!(ball_coefficient(level), Ratio::new(6, index_gamma_n(level) as i128), "N = {level}");
        }
    }

    #[test]
    fn interval_union_normalizes() {
        let u = IntervalUnion::new(vec![(3.0, 4.0), (0.0, 2.0), (1.0, 2.5), (5.0, 5.0), (2.5, 3.0)]);
        assert_eq!(u.intervals(), &[(0.0, 2.5), (2.5, 3.0), (3.0, 4.0)]);
        assert!(!u.contains(2.5));
        assert!(u.shifted(1.0).contains(3.6));
    }
}
