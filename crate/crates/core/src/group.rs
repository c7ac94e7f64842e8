//! Exact integer elements of `Γ(N)` and exhaustive enumeration of the orbit
//! ball `A² + B² + C² + D² ≤ Q²` and of angular sectors.
//!
//! Enumeration walks the lower-left entry `c` over multiples of the level,
//! then `a ≡ 1 (mod N)` inside the disc `(a - c x0)² + (c y0)² ≤ Q²`, then `d`
//! along the progression `d ≡ a⁻¹ (mod N|c|)`. Every `c` column is
//! independent, so columns are distributed over workers and the per-column
//! results are concatenated back in ascending `c` order. The output therefore
//! does not depend on the worker count.

use std::num::NonZeroUsize;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::mod_inverse;
use crate::geometry::{
    angle_from_entries, conjugate_entries, distance_from_norm_sq, Angle, ConjugatedEntries, NormalizedTarget, Point,
};
use crate::stats::{AngleCollection, AngleSample, ThetaCollection};

/// Every matrix entry touched by an enumeration stays below this bound so that
/// products such as `ad` fit in 64 bits.
pub const ENTRY_LIMIT: f64 = 2147483648.0; // 2^31

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("matrix ({a}, {b}; {c}, {d}) does not have determinant 1")]
    NotUnimodular { a: i64, b: i64, c: i64, d: i64 },
    #[error("level must be at least 1")]
    InvalidLevel,
    #[error("norm bound Q² = {0} must be finite and at least 2")]
    InvalidNormBound(f64),
    #[error("sector bound beta must not be NaN")]
    InvalidBeta,
    #[error("worker count must be at least 1")]
    InvalidWorkers,
    #[error("entry bound {0:.0} exceeds the 2^31 safe range")]
    EntryBoundExceeded(f64),
}

/// An integer matrix `(a, b; c, d)` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { a: 1, b: 0, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, GroupError> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(GroupError::NotUnimodular { a, b, c, d });
        }
        Ok(GroupElement { a, b, c, d })
    }

    pub fn a(&self) -> i64 {
        self.a
    }
    pub fn b(&self) -> i64 {
        self.b
    }
    pub fn c(&self) -> i64 {
        self.c
    }
    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn entries(&self) -> (i64, i64, i64, i64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn entries_f64(&self) -> (f64, f64, f64, f64) {
        (self.a as f64, self.b as f64, self.c as f64, self.d as f64)
    }

    /// `a, d ≡ 1` and `b, c ≡ 0 (mod N)`.
    pub fn in_level(&self, level: u32) -> bool {
        let n = level as i64;
        n >= 1
            && (self.a - 1).rem_euclid(n) == 0
            && (self.d - 1).rem_euclid(n) == 0
            && self.b.rem_euclid(n) == 0
            && self.c.rem_euclid(n) == 0
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Exact `a² + b² + c² + d²`.
    pub fn frobenius_sq(&self) -> i128 {
        [self.a, self.b, self.c, self.d].iter().map(|&v| v as i128 * v as i128).sum()
    }

    /// Möbius action `z ↦ (az + b)/(cz + d)`.
    pub fn act(&self, z: Complex64) -> Complex64 {
        let (a, b, c, d) = self.entries_f64();
        (z * a + b) / (z * c + d)
    }
}

impl std::ops::Neg for GroupElement {
    type Output = GroupElement;

    fn neg(self) -> GroupElement {
        GroupElement { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}; {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// Size of the worker pool used for enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Workers(NonZeroUsize);

impl Workers {
    pub fn single() -> Self {
        Workers(NonZeroUsize::MIN)
    }

    pub fn new(count: usize) -> Result<Self, GroupError> {
        NonZeroUsize::new(count).map(Workers).ok_or(GroupError::InvalidWorkers)
    }

    pub fn available() -> Self {
        Workers(std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN))
    }

    pub fn count(&self) -> usize {
        self.0.get()
    }

    /// Map `task` over `items`, returning results in input order.
    pub fn map_ordered<I, T, F>(&self, items: &[I], task: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        if self.count() == 1 {
            return items.iter().map(task).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.count()).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&task).collect()),
            Err(_) => items.iter().map(task).collect(),
        }
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::single()
    }
}

/// The ball `{γ ∈ Γ(N) : A² + B² + C² + D² ≤ Q²}` around `z0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallSpec {
    level: u32,
    z0: Point,
    norm_bound_sq: f64,
}

impl BallSpec {
    pub fn new(level: u32, z0: Point, norm_bound_sq: f64) -> Result<Self, GroupError> {
        if level == 0 {
            return Err(GroupError::InvalidLevel);
        }
        if !(norm_bound_sq.is_finite() && norm_bound_sq >= 2.0) {
            return Err(GroupError::InvalidNormBound(norm_bound_sq));
        }
        Ok(BallSpec { level, z0, norm_bound_sq })
    }

    /// Hyperbolic radius `R`, using `Q² = 2 cosh R`.
    pub fn from_radius(level: u32, z0: Point, radius: f64) -> Result<Self, GroupError> {
        BallSpec::new(level, z0, norm_sq_from_radius(radius))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn z0(&self) -> Point {
        self.z0
    }

    pub fn norm_bound_sq(&self) -> f64 {
        self.norm_bound_sq
    }

    pub fn radius(&self) -> f64 {
        distance_from_norm_sq(self.norm_bound_sq)
    }
}

pub fn norm_sq_from_radius(radius: f64) -> f64 {
    2.0 * radius.cosh()
}

/// `{γ ∈ Γ(N) : C ≠ 0, A/C ≤ β, (C² + A²)(1 + D²/C²) ≤ Q²}`; `beta` may be
/// infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorSpec {
    ball: BallSpec,
    beta: f64,
}

impl SectorSpec {
    pub fn new(ball: BallSpec, beta: f64) -> Result<Self, GroupError> {
        if beta.is_nan() {
            return Err(GroupError::InvalidBeta);
        }
        Ok(SectorSpec { ball, beta })
    }

    pub fn ball(&self) -> &BallSpec {
        &self.ball
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Enumeration plan for one [`BallSpec`].
#[derive(Clone, Debug)]
pub struct Ball {
    spec: BallSpec,
    c_max: i64,
    /// `z0 = i`: membership uses the exact integer norm.
    exact: bool,
}

impl Ball {
    pub fn new(spec: BallSpec) -> Result<Self, GroupError> {
        let q2 = spec.norm_bound_sq;
        let q = q2.sqrt();
        let (x0, y0) = (spec.z0.x(), spec.z0.y());
        let c_bound = q / y0;
        let ad_bound = q + c_bound * x0.abs();
        let b_bound = q * y0 + x0.abs() * (q + ad_bound);
        let worst = c_bound.max(ad_bound).max(b_bound) + 1.0;
        if worst >= ENTRY_LIMIT {
            return Err(GroupError::EntryBoundExceeded(worst));
        }
        Ok(Ball { spec, c_max: c_bound.floor() as i64, exact: spec.z0.is_i() })
    }

    pub fn spec(&self) -> &BallSpec {
        &self.spec
    }

    /// Admissible values of `c` (multiples of the level), ascending.
    pub fn c_values(&self) -> Vec<i64> {
        let n = self.spec.level as i64;
        let k = self.c_max / n;
        (-k..=k).map(|j| j * n).collect()
    }

    fn contains(&self, gamma: &GroupElement, entries: &ConjugatedEntries) -> bool {
        let q2 = self.spec.norm_bound_sq;
        if self.exact {
            let norm = gamma.frobenius_sq();
            if q2.fract() == 0.0 && q2 < 9.0e18 {
                norm <= q2 as i128
            } else {
                (norm as f64) <= q2
            }
        } else {
            entries.norm_sq() <= q2
        }
    }

    /// Visit every ball element with lower-left entry `c`, in ascending
    /// `(a, d)` order (ascending `(a, b)` for `c = 0`).
    pub fn visit_column<F>(&self, c: i64, mut visit: F)
    where
        F: FnMut(GroupElement, ConjugatedEntries),
    {
        let n = self.spec.level as i64;
        let z0 = self.spec.z0;
        let q2 = self.spec.norm_bound_sq;
        let (x0, y0) = (z0.x(), z0.y());

        if c == 0 {
            // a = d = ±1 with the sign ≡ 1 (mod N); then B = b / y0.
            let b_max = y0 * (q2 - 2.0).max(0.0).sqrt();
            let k = (b_max / n as f64).floor() as i64 + 1;
            for s in [-1i64, 1] {
                if (s - 1).rem_euclid(n) != 0 {
                    continue;
                }
                for j in -k..=k {
                    let gamma = GroupElement { a: s, b: j * n, c: 0, d: s };
                    let entries = conjugate_entries(&gamma, z0);
                    if self.contains(&gamma, &entries) {
                        visit(gamma, entries);
                    }
                }
            }
            return;
        }

        let modulus = n * c.abs();
        let cf = c as f64;
        let big_c = cf * y0;
        let cx = cf * x0;
        let rem = q2 - big_c * big_c;
        if rem < 0.0 {
            return;
        }
        let r = rem.sqrt();
        let a_lo = first_in_class((cx - r).floor() as i64 - 1, 1, n);
        let a_hi = (cx + r).ceil() as i64 + 1;
        let mut a = a_lo;
        while a <= a_hi {
            let big_a = a as f64 - cx;
            let slack = 1e-9 * q2.max(1.0);
            let room = q2 - big_a * big_a - big_c * big_c;
            if room >= -slack {
                if let Some(inv) = mod_inverse(a, modulus) {
                    self.visit_d_range(a, c, inv, modulus, big_a, room.max(0.0), &mut visit);
                }
            }
            a += n;
        }
    }

    /// For fixed `(a, c)`, `D = d + c x0` and `B = (A x0 - 1/c + d A/c) / y0`,
    /// so `B² + D² ≤ room` is a quadratic interval in `d`.
    #[allow(clippy::too_many_arguments)]
    fn visit_d_range<F>(&self, a: i64, c: i64, inv: i64, modulus: i64, big_a: f64, room: f64, visit: &mut F)
    where
        F: FnMut(GroupElement, ConjugatedEntries),
    {
        let z0 = self.spec.z0;
        let (x0, y0) = (z0.x(), z0.y());
        let cf = c as f64;
        let cx = cf * x0;
        let p = big_a / (cf * y0);
        let m = (big_a * x0 - 1.0 / cf) / y0;
        let qa = 1.0 + p * p;
        let qb = 2.0 * (cx + p * m);
        let qc = cx * cx + m * m - room;
        let mut disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            if disc < -1e-9 * (qb * qb + (4.0 * qa * qc).abs()).max(1.0) {
                return;
            }
            disc = 0.0;
        }
        let sq = disc.sqrt();
        let lo = (-qb - sq) / (2.0 * qa);
        let hi = (-qb + sq) / (2.0 * qa);
        let pad = 1.0 + 1e-9 * (lo.abs().max(hi.abs()));
        let d_lo = first_in_class((lo - pad).floor() as i64, inv, modulus);
        let d_hi = (hi + pad).ceil() as i64;
        let mut d = d_lo;
        while d <= d_hi {
            let ad = a * d - 1;
            debug_assert_eq!(ad % c, 0);
            let b = ad / c;
            debug_assert_eq!(b.rem_euclid(self.spec.level as i64), 0);
            let gamma = GroupElement { a, b, c, d };
            let entries = conjugate_entries(&gamma, z0);
            if self.contains(&gamma, &entries) {
                visit(gamma, entries);
            }
            d += modulus;
        }
    }

    pub fn for_each<F>(&self, mut visit: F)
    where
        F: FnMut(GroupElement, ConjugatedEntries),
    {
        for c in self.c_values() {
            self.visit_column(c, &mut visit);
        }
    }

    /// Run `per_column` on every `c` column using `workers`, returning the
    /// column results in ascending `c` order.
    pub fn map_columns<T, F>(&self, workers: Workers, per_column: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&Ball, i64) -> T + Sync + Send,
    {
        let cs = self.c_values();
        workers.map_ordered(&cs, |&c| per_column(self, c))
    }
}

/// Smallest integer `≥ start` congruent to `residue` modulo `modulus`.
fn first_in_class(start: i64, residue: i64, modulus: i64) -> i64 {
    start + (residue - start).rem_euclid(modulus)
}

/// Every `γ ∈ Γ(N)` with `A² + B² + C² + D² ≤ Q²`, each exactly once.
pub fn enumerate_ball(spec: &BallSpec, workers: Workers) -> Result<Vec<(GroupElement, ConjugatedEntries)>, GroupError> {
    let ball = Ball::new(*spec)?;
    let columns = ball.map_columns(workers, |ball, c| {
        let mut out = Vec::new();
        ball.visit_column(c, |g, e| out.push((g, e)));
        out
    });
    Ok(columns.into_iter().flatten().collect())
}

pub fn count_ball(spec: &BallSpec, workers: Workers) -> Result<u64, GroupError> {
    let ball = Ball::new(*spec)?;
    let columns = ball.map_columns(workers, |ball, c| {
        let mut count = 0u64;
        ball.visit_column(c, |_, _| count += 1);
        count
    });
    Ok(columns.into_iter().sum())
}

/// One sample per ball element with a defined angle; degenerate elements are
/// only counted.
pub fn collect_angles(spec: &BallSpec, z1: Point, workers: Workers) -> Result<AngleCollection, GroupError> {
    let target = NormalizedTarget::from_points(spec.z0, z1);
    let ball = Ball::new(*spec)?;
    let columns = ball.map_columns(workers, |ball, c| {
        let mut samples = Vec::new();
        let mut undefined = 0u64;
        ball.visit_column(c, |gamma, entries| match angle_from_entries(&entries, &target) {
            Angle::Defined(theta) => {
                samples.push(AngleSample { gamma, theta, dist: distance_from_norm_sq(entries.norm_sq()) })
            }
            Angle::Undefined => undefined += 1,
        });
        (samples, undefined)
    });
    let mut out = AngleCollection::default();
    for (samples, undefined) in columns {
        out.samples.extend(samples);
        out.undefined += undefined;
    }
    Ok(out)
}

/// Like [`collect_angles`] but keeps only the angles, for large balls.
pub fn collect_thetas(spec: &BallSpec, z1: Point, workers: Workers) -> Result<ThetaCollection, GroupError> {
    let target = NormalizedTarget::from_points(spec.z0, z1);
    let ball = Ball::new(*spec)?;
    let columns = ball.map_columns(workers, |ball, c| {
        let mut thetas = Vec::new();
        let mut undefined = 0u64;
        ball.visit_column(c, |_, entries| match angle_from_entries(&entries, &target) {
            Angle::Defined(theta) => thetas.push(theta),
            Angle::Undefined => undefined += 1,
        });
        (thetas, undefined)
    });
    let mut out = ThetaCollection::default();
    for (thetas, undefined) in columns {
        out.thetas.extend(thetas);
        out.undefined += undefined;
    }
    Ok(out)
}

/// Sector enumeration plan. Columns with `c ≠ 0` only.
struct Sector {
    ball: Ball,
    beta: f64,
}

impl Sector {
    fn new(spec: &SectorSpec) -> Result<Self, GroupError> {
        Ok(Sector { ball: Ball::new(spec.ball)?, beta: spec.beta })
    }

    fn column_a_values(&self, c: i64) -> impl Iterator<Item = (i64, f64)> + '_ {
        let spec = &self.ball.spec;
        let n = spec.level as i64;
        let (x0, y0) = (spec.z0.x(), spec.z0.y());
        let q2 = spec.norm_bound_sq;
        let cf = c as f64;
        let big_c = cf * y0;
        let cx = cf * x0;
        let rem = (q2 - big_c * big_c).max(0.0);
        let r = rem.sqrt();
        let start = first_in_class((cx - r).floor() as i64 - 1, 1, n);
        let end = (cx + r).ceil() as i64 + 1;
        let beta = self.beta;
        let exact = self.ball.exact;
        (0..).map(move |k| start + k * n).take_while(move |&a| a <= end).filter_map(move |a| {
            let big_a = a as f64 - cx;
            let inside = if exact && q2.fract() == 0.0 {
                (a as i128).pow(2) + (c as i128).pow(2) <= q2 as i128
            } else {
                big_a * big_a + big_c * big_c <= q2
            };
            let below = if beta == f64::INFINITY {
                true
            } else if c > 0 {
                big_a <= beta * big_c
            } else {
                big_a >= beta * big_c
            };
            (inside && below).then_some((a, big_a))
        })
    }

    /// `D² (C² + A²) ≤ C² (Q² - C² - A²)`, exact when `z0 = i` and `Q²` is an
    /// integer.
    fn d_admissible(&self, a: i64, c: i64, d: i64) -> bool {
        let spec = &self.ball.spec;
        let q2 = spec.norm_bound_sq;
        if self.ball.exact && q2.fract() == 0.0 {
            let (a, c, d) = (a as i128, c as i128, d as i128);
            let q2 = q2 as i128;
            return d * d * (c * c + a * a) <= c * c * (q2 - c * c - a * a);
        }
        let (x0, y0) = (spec.z0.x(), spec.z0.y());
        let cf = c as f64;
        let big_a = a as f64 - cf * x0;
        let big_c = cf * y0;
        let big_d = cf * x0 + d as f64;
        big_d * big_d * (big_c * big_c + big_a * big_a) <= big_c * big_c * (q2 - big_c * big_c - big_a * big_a)
    }

    /// Candidate `d` window `[lo, hi]` (unpadded) for fixed `(a, c)`.
    fn d_window(&self, c: i64, big_a: f64) -> (f64, f64) {
        let spec = &self.ball.spec;
        let q2 = spec.norm_bound_sq;
        let (x0, y0) = (spec.z0.x(), spec.z0.y());
        let cf = c as f64;
        let big_c = cf * y0;
        let s = (big_c * big_c + big_a * big_a).max(f64::MIN_POSITIVE);
        let d_max = big_c.abs() * ((q2 - s) / s).max(0.0).sqrt();
        (-cf * x0 - d_max, -cf * x0 + d_max)
    }

    fn count_column(&self, c: i64) -> u64 {
        if c == 0 || self.beta == f64::NEG_INFINITY {
            return 0;
        }
        let n = self.ball.spec.level as i64;
        let modulus = n * c.abs();
        let mut total = 0u64;
        for (a, big_a) in self.column_a_values(c) {
            let Some(inv) = mod_inverse(a, modulus) else { continue };
            let (lo, hi) = self.d_window(c, big_a);
            let pad = 1.0 + 1e-9 * lo.abs().max(hi.abs());
            let mut k_lo = ((lo - pad - inv as f64) / modulus as f64).floor() as i64;
            let mut k_hi = ((hi + pad - inv as f64) / modulus as f64).ceil() as i64;
            while k_lo <= k_hi && !self.d_admissible(a, c, inv + k_lo * modulus) {
                k_lo += 1;
            }
            while k_hi >= k_lo && !self.d_admissible(a, c, inv + k_hi * modulus) {
                k_hi -= 1;
            }
            if k_hi >= k_lo {
                total += (k_hi - k_lo + 1) as u64;
            }
        }
        total
    }

    fn visit_column<F: FnMut(GroupElement)>(&self, c: i64, mut visit: F) {
        if c == 0 || self.beta == f64::NEG_INFINITY {
            return;
        }
        let n = self.ball.spec.level as i64;
        let modulus = n * c.abs();
        for (a, big_a) in self.column_a_values(c) {
            let Some(inv) = mod_inverse(a, modulus) else { continue };
            let (lo, hi) = self.d_window(c, big_a);
            let pad = 1.0 + 1e-9 * lo.abs().max(hi.abs());
            let mut d = first_in_class((lo - pad).floor() as i64, inv, modulus);
            while (d as f64) <= hi + pad {
                if self.d_admissible(a, c, d) {
                    visit(GroupElement { a, b: (a * d - 1) / c, c, d });
                }
                d += modulus;
            }
        }
    }
}

/// Exact size of the sector set. Counts `d` along each progression without
/// materializing elements.
pub fn count_sector(spec: &SectorSpec, workers: Workers) -> Result<u64, GroupError> {
    let sector = Sector::new(spec)?;
    let cs = sector.ball.c_values();
    Ok(workers.map_ordered(&cs, |&c| sector.count_column(c)).into_iter().sum())
}

/// The sector set itself, in ascending `(c, a, d)` order.
pub fn enumerate_sector(spec: &SectorSpec, workers: Workers) -> Result<Vec<GroupElement>, GroupError> {
    let sector = Sector::new(spec)?;
    let cs = sector.ball.c_values();
    let columns = workers.map_ordered(&cs, |&c| {
        let mut out = Vec::new();
        sector.visit_column(c, |g| out.push(g));
        out
    });
    Ok(columns.into_iter().flatten().collect())
}
