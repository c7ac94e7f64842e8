//! Slow reference enumerations used by `verify`.
//!
//! These share no code with the fast paths in [`crate::group`]: entries are
//! bounded by inverting the conjugation and every candidate is tested
//! directly.

use crate::geometry::Point;
use crate::group::GroupElement;

/// Every `γ ∈ Γ(N)` with conjugated norm `≤ q2`, sorted.
///
/// Loops over `c`, `a`, `d` with partial-norm pruning, then over all `b` in
/// the range allowed by `b = B y0 - A x0 + d x0`.
pub fn naive_ball(level: u32, z0: Point, q2: f64) -> Vec<GroupElement> {
    let n = level as i64;
    let (x0, y0) = (z0.x(), z0.y());
    let q = q2.sqrt();
    let exact = z0.is_i() && q2.fract() == 0.0;
    let c_max = (q / y0).floor() as i64;
    let mut out = Vec::new();
    for c in -c_max..=c_max {
        if c % n != 0 {
            continue;
        }
        let cf = c as f64;
        let big_c = cf * y0;
        let a_lim = (q + (cf * x0).abs()).ceil() as i64;
        for a in -a_lim..=a_lim {
            if (a - 1) % n != 0 {
                continue;
            }
            let big_a = a as f64 - cf * x0;
            if big_a * big_a + big_c * big_c > q2 + 1e-9 {
                continue;
            }
            for d in -a_lim..=a_lim {
                if (d - 1) % n != 0 {
                    continue;
                }
                let big_d = d as f64 + cf * x0;
                if big_a * big_a + big_c * big_c + big_d * big_d > q2 + 1e-9 {
                    continue;
                }
                let b_lim = (q * y0 + x0.abs() * (big_a.abs() + (d as f64).abs())).ceil() as i64 + 1;
                for b in -b_lim..=b_lim {
                    if b % n != 0 || a * d - b * c != 1 {
                        continue;
                    }
                    let inside = if exact {
                        let norm = (a * a + b * b + c * c + d * d) as i128;
                        norm <= q2 as i128
                    } else {
                        let big_b = (b as f64 + (a - d) as f64 * x0 - cf * x0 * x0) / y0;
                        big_a * big_a + big_b * big_b + big_c * big_c + big_d * big_d <= q2
                    };
                    if inside {
                        out.push(GroupElement::new(a, b, c, d).expect("determinant checked"));
                    }
                }
            }
        }
    }
    out.sort();
    out
}
