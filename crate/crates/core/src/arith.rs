//! Number-theoretic kernel: Möbius function, the divisor sums `Φ_N(c)`,
//! Kloosterman sums and their Weil bound, and exact counts of the congruence
//! pairs `a ≡ d ≡ 1 (mod N)`, `ad ≡ 1 (mod Nc)` in boxes.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("modulus c must be nonzero")]
    ZeroModulus,
    #[error("level must be at least 1")]
    InvalidLevel,
    #[error("q must be at least 1")]
    InvalidQ,
    #[error("interval [{lo}, {hi}] is not contained in [0, {max}]")]
    IntervalOutOfRange { lo: i64, hi: i64, max: i64 },
    #[error("Weil bound violated at (m, n, q) = ({m}, {n}, {q}): ratio {ratio}")]
    WeilViolation { m: i64, n: i64, q: u64, ratio: f64 },
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn moebius(n: u64) -> i8 {
    assert!(n >= 1, "moebius(0) is undefined");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `μ(0..=limit)` by a linear sieve; index 0 holds 0.
pub fn moebius_sieve(limit: usize) -> Vec<i8> {
    let mut mu = vec![0i8; limit + 1];
    if limit == 0 {
        return mu;
    }
    mu[1] = 1;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > limit {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Number of divisors `τ(n)`.
pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Inverse of `a` modulo `m ≥ 1` in `[0, m)`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    debug_assert!(m >= 1);
    let r = a.rem_euclid(m);
    let ext = r.extended_gcd(&m);
    (ext.gcd == 1).then(|| ext.x.rem_euclid(m))
}

/// `Φ_N(c) = Σ_{n | c, (n, N) = 1} μ(n)/n = Π_{p | c, p ∤ N} (1 - 1/p)`.
pub fn phi_n(c: i64, level: u32) -> Result<Ratio<i128>, ArithError> {
    if c == 0 {
        return Err(ArithError::ZeroModulus);
    }
    if level == 0 {
        return Err(ArithError::InvalidLevel);
    }
    let value = prime_divisors(c.unsigned_abs())
        .into_iter()
        .filter(|&p| !(level as u64).is_multiple_of(p))
        .fold(Ratio::from_integer(1i128), |acc, p| acc * Ratio::new(p as i128 - 1, p as i128));
    Ok(value)
}

/// `Φ_N(c)` as floats for `c = 0..=limit` (index 0 unused), from a
/// smallest-prime-factor sieve.
pub fn phi_n_table(limit: usize, level: u32) -> Vec<f64> {
    let mut spf = vec![0usize; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    let mut out = vec![0.0; limit + 1];
    for (c, slot) in out.iter_mut().enumerate().skip(1) {
        let mut rest = c;
        let mut value = 1.0;
        while rest > 1 {
            let p = spf[rest];
            while rest % p == 0 {
                rest /= p;
            }
            if !(level as usize).is_multiple_of(p) {
                value *= 1.0 - 1.0 / p as f64;
            }
        }
        *slot = value;
    }
    out
}

/// Inclusive integer interval; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntInterval {
    pub lo: i64,
    pub hi: i64,
}

impl IntInterval {
    pub fn new(lo: i64, hi: i64) -> Self {
        IntInterval { lo, hi }
    }

    pub fn empty() -> Self {
        IntInterval { lo: 1, hi: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    /// Number of integers in the interval.
    pub fn count(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as u64
        }
    }

    /// Euclidean length `hi - lo`.
    pub fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (self.hi - self.lo) as f64
        }
    }

    /// Integers `≡ residue (mod modulus)` in the interval.
    pub fn count_in_class(&self, residue: i64, modulus: i64) -> u64 {
        if self.is_empty() {
            return 0;
        }
        let first = self.lo + (residue - self.lo).rem_euclid(modulus);
        if first > self.hi {
            0
        } else {
            ((self.hi - first) / modulus + 1) as u64
        }
    }
}

/// `(c, N, I1, I2)` for counting `(a, d) ∈ I1 × I2` with `a ≡ d ≡ 1 (mod N)`
/// and `ad ≡ 1 (mod N|c|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CongruenceBox {
    c: i64,
    level: u32,
    i1: IntInterval,
    i2: IntInterval,
}

impl CongruenceBox {
    pub fn new(c: i64, level: u32, i1: IntInterval, i2: IntInterval) -> Result<Self, ArithError> {
        if c == 0 {
            return Err(ArithError::ZeroModulus);
        }
        if level == 0 {
            return Err(ArithError::InvalidLevel);
        }
        Ok(CongruenceBox { c, level, i1, i2 })
    }

    pub fn c(&self) -> i64 {
        self.c
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn i1(&self) -> IntInterval {
        self.i1
    }
    pub fn i2(&self) -> IntInterval {
        self.i2
    }

    /// Both side lengths at most `|c|`.
    pub fn is_short(&self) -> bool {
        let c = self.c.unsigned_abs();
        self.i1.count() <= c && self.i2.count() <= c
    }
}

/// Exact count, looping over `a` and counting `d` along `a⁻¹ + N|c|ℤ`.
/// Depends on `|c|` only.
pub fn count_congruence_box(bx: &CongruenceBox) -> u64 {
    let n = bx.level as i64;
    let modulus = n * bx.c.abs();
    let i1 = bx.i1;
    if i1.is_empty() {
        return 0;
    }
    let mut a = i1.lo + (1 - i1.lo).rem_euclid(n);
    let mut total = 0;
    while a <= i1.hi {
        if let Some(inv) = mod_inverse(a, modulus) {
            total += bx.i2.count_in_class(inv, modulus);
        }
        a += n;
    }
    total
}

/// `Φ_N(c) |I1| |I2| / (|c| N²)` with `|I|` the number of integers in `I`.
pub fn box_main_term(bx: &CongruenceBox) -> f64 {
    main_term_with(bx, bx.i1.count() as f64, bx.i2.count() as f64)
}

/// Same main term with Euclidean interval lengths.
pub fn box_main_term_euclidean(bx: &CongruenceBox) -> f64 {
    main_term_with(bx, bx.i1.length(), bx.i2.length())
}

fn main_term_with(bx: &CongruenceBox, l1: f64, l2: f64) -> f64 {
    let phi = phi_n(bx.c, bx.level).expect("box invariants");
    let phi = *phi.numer() as f64 / *phi.denom() as f64;
    let n = bx.level as f64;
    phi * l1 * l2 / (bx.c.unsigned_abs() as f64 * n * n)
}

/// Roots of unity and inverses modulo `q`, for evaluating many Kloosterman
/// sums of the same modulus.
#[derive(Clone, Debug)]
pub struct KloostermanTable {
    q: i64,
    units: Vec<(i64, i64)>,
    roots: Vec<Complex64>,
}

impl KloostermanTable {
    pub fn new(q: u64) -> Result<Self, ArithError> {
        if q == 0 {
            return Err(ArithError::InvalidQ);
        }
        let qi = q as i64;
        let units = (0..qi).filter_map(|a| mod_inverse(a, qi).map(|inv| (a, inv))).collect();
        let roots = (0..qi).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64)).collect();
        Ok(KloostermanTable { q: qi, units, roots })
    }

    pub fn q(&self) -> u64 {
        self.q as u64
    }

    /// `S(m, n; q)`.
    pub fn sum(&self, m: i64, n: i64) -> Complex64 {
        let q = self.q;
        let (m, n) = (m.rem_euclid(q), n.rem_euclid(q));
        self.units.iter().map(|&(a, inv)| self.roots[((m * a + n * inv) % q) as usize]).sum()
    }
}

/// `e(x) = exp(2πix)` for the rational `x = k/q`.
fn e_frac(k: i64, q: i64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * k.rem_euclid(q) as f64 / q as f64)
}

/// Complete Kloosterman sum `S(m, n; q) = Σ_{(a, q) = 1} e((ma + n a⁻¹)/q)`.
pub fn kloosterman(m: i64, n: i64, q: u64) -> Result<Complex64, ArithError> {
    let q = q as i64;
    let s = kloosterman_incomplete(m, n, q as u64, IntInterval::new(0, q - 1))?;
    debug_assert!(s.im.abs() <= 1e-9 * q as f64);
    Ok(s)
}

/// `S_I(m, n; q)` by direct summation over `a ∈ I ⊆ [0, q - 1]`.
pub fn kloosterman_incomplete(m: i64, n: i64, q: u64, interval: IntInterval) -> Result<Complex64, ArithError> {
    if q == 0 {
        return Err(ArithError::InvalidQ);
    }
    let q = q as i64;
    if interval.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if interval.lo < 0 || interval.hi > q - 1 {
        return Err(ArithError::IntervalOutOfRange { lo: interval.lo, hi: interval.hi, max: q - 1 });
    }
    let (m, n) = (m.rem_euclid(q), n.rem_euclid(q));
    Ok((interval.lo..=interval.hi).filter_map(|a| mod_inverse(a, q).map(|inv| e_frac(m * a + n * inv, q))).sum())
}

/// `τ(q) gcd(m, n, q)^{1/2} q^{1/2}`.
pub fn weil_bound(m: i64, n: i64, q: u64) -> f64 {
    let g = m.unsigned_abs().gcd(&n.unsigned_abs()).gcd(&q);
    divisor_count(q) as f64 * (g as f64).sqrt() * (q as f64).sqrt()
}

/// Result of checking `|S(m, n; q)| ≤ τ(q) gcd(m, n, q)^{1/2} q^{1/2}` over a
/// box of parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct WeilReport {
    pub checked: u64,
    pub max_ratio: f64,
    pub argmax: (i64, i64, u64),
}

/// Relative slack for floating-point summation when deciding a violation.
pub const WEIL_SLACK: f64 = 1e-9;

pub fn weil_certificate(
    q_max: u64,
    m_range: RangeInclusive<i64>,
    n_range: RangeInclusive<i64>,
) -> Result<WeilReport, ArithError> {
    if q_max == 0 {
        return Err(ArithError::InvalidQ);
    }
    let per_q: Vec<Result<WeilReport, ArithError>> = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let table = KloostermanTable::new(q)?;
            let mut report = WeilReport { checked: 0, max_ratio: 0.0, argmax: (0, 0, q) };
            for m in m_range.clone() {
                for n in n_range.clone() {
                    let ratio = table.sum(m, n).norm() / weil_bound(m, n, q);
                    report.checked += 1;
                    if ratio > 1.0 + WEIL_SLACK {
                        return Err(ArithError::WeilViolation { m, n, q, ratio });
                    }
                    if ratio > report.max_ratio {
                        report.max_ratio = ratio;
                        report.argmax = (m, n, q);
                    }
                }
            }
            Ok(report)
        })
        .collect();
    let mut total = WeilReport { checked: 0, max_ratio: 0.0, argmax: (0, 0, 1) };
    for r in per_q {
        let r = r?;
        total.checked += r.checked;
        if r.max_ratio > total.max_ratio {
            total.max_ratio = r.max_ratio;
            total.argmax = r.argmax;
        }
    }
    Ok(total)
}

/// Real interval `(lo, hi]`: sums run over the integers in it, integrals over
/// `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumInterval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedSum {
    /// `Σ Φ_N(c) f(c)` over the integers of the interval (multiples of `N`
    /// only, when restricted).
    pub sum: f64,
    /// `∫ f` over the interval.
    pub integral: f64,
    /// `C_N ∫ f`, or `(C_N / N) ∫ f` when restricted to multiples of `N`.
    pub main_term: f64,
}

impl WeightedSum {
    pub fn rel_diff(&self) -> f64 {
        (self.sum / self.main_term - 1.0).abs()
    }
}

/// `∫_a^b f` by double-exponential quadrature to about `1e-10` relative.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let rough = quadrature::double_exponential::integrate(&f, a, b, 1e-6).integral;
    let target = (1e-10 * rough.abs()).max(1e-14);
    quadrature::double_exponential::integrate(&f, a, b, target).integral
}

/// Möbius-weighted sum `Σ_{c ∈ J} Φ_N(c) f(c)` together with its predicted
/// main term. Only positive `c` contribute.
pub fn moebius_weighted_sum<F: Fn(f64) -> f64>(
    level: u32,
    interval: SumInterval,
    f: F,
    multiples_only: bool,
) -> Result<WeightedSum, ArithError> {
    if level == 0 {
        return Err(ArithError::InvalidLevel);
    }
    let first = (interval.lo.floor() as i64 + 1).max(1);
    let last = interval.hi.floor() as i64;
    let table = phi_n_table(last.max(0) as usize, level);
    let n = level as i64;
    let sum = (first..=last).filter(|&c| !multiples_only || c % n == 0).map(|c| table[c as usize] * f(c as f64)).sum();
    let integral = integrate(&f, interval.lo, interval.hi);
    let c_n = crate::theory::c_n(level).value;
    let main_term = if multiples_only { c_n / level as f64 * integral } else { c_n * integral };
    Ok(WeightedSum { sum, integral, main_term })
}
