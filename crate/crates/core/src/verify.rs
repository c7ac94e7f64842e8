//! Desk-scale self-check: every module's invariants against an independent
//! computation. Used by `hyperlattice verify`.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::arith::{count_congruence_box, euler_phi, weil_certificate, CongruenceBox, IntInterval};
use crate::format::FlatJson;
use crate::geometry::{angle, angle_oracle, Angle, NormalizedTarget, Point};
use crate::group::{collect_thetas, count_ball, count_sector, enumerate_ball, BallSpec, SectorSpec, Workers};
use crate::oracle::naive_ball;
use crate::stats::Ecdf;
use crate::theory::{
    ball_coefficient, ball_main_term, build_s, density_mass, density_normalized, index_gamma_n, sector_main_term, xi,
    TheoryContext,
};

/// Deliberate corruption used to check that the suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// `Ξ` with the step indicator `[ω > 0]` replaced by `[ω < 0]`.
    XiBranch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    /// `{"<suite>": "pass" | "fail", ..., "all_passed": bool}`
    pub fn to_json(&self) -> String {
        let mut obj = FlatJson::new();
        for s in &self.suites {
            obj.push(s.name, if s.passed { "pass" } else { "fail" });
        }
        obj.push("all_passed", self.all_passed());
        obj.render()
    }
}

struct Checker {
    fault: Option<Fault>,
    workers: Workers,
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Distance between two angles as directions (modulo π).
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

impl Checker {
    fn xi(&self, target: &NormalizedTarget, omega: f64) -> f64 {
        let v = xi(target, omega);
        match self.fault {
            Some(Fault::XiBranch) if omega > -FRAC_PI_2 && omega < FRAC_PI_2 => {
                let up = if omega > 0.0 { 1.0 } else { 0.0 };
                let down = if omega < 0.0 { 1.0 } else { 0.0 };
                v - up + down
            }
            _ => v,
        }
    }

    fn enumeration_oracle(&self) -> Outcome {
        let bases = [Point::I, Point::new(1.0, 2.0).unwrap(), Point::new(0.5, 0.7).unwrap()];
        let mut checked = 0;
        for level in 1..=3 {
            for &z0 in &bases {
                let q2 = 144.0;
                let spec = BallSpec::new(level, z0, q2).map_err(|e| e.to_string())?;
                let fast: BTreeSet<_> = enumerate_ball(&spec, self.workers)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|(g, _)| g)
                    .collect();
                let slow: BTreeSet<_> = naive_ball(level, z0, q2).into_iter().collect();
                ensure(fast == slow, || format!("N={level} z0={:?}: {} vs {} elements", z0, fast.len(), slow.len()))?;
                checked += slow.len();
            }
        }
        Ok(format!("{checked} elements"))
    }

    fn ball_symmetry(&self) -> Outcome {
        let z0 = Point::new(0.3, 1.1).unwrap();
        for level in [1, 2, 3, 4] {
            let spec = BallSpec::new(level, z0, 400.0).map_err(|e| e.to_string())?;
            let elements = enumerate_ball(&spec, self.workers).map_err(|e| e.to_string())?;
            let set: BTreeSet<_> = elements.iter().map(|(g, _)| *g).collect();
            for g in &set {
                ensure(g.in_level(level), || format!("{g} not in level {level}"))?;
                ensure(set.contains(&g.inverse()), || format!("inverse of {g} missing"))?;
                if level <= 2 {
                    ensure(set.contains(&-*g), || format!("-{g} missing"))?;
                }
            }
        }
        let mut last = 0;
        for q2 in [2.0, 10.0, 50.0, 200.0, 800.0] {
            let n = count_ball(&BallSpec::new(1, z0, q2).unwrap(), self.workers).map_err(|e| e.to_string())?;
            ensure(n >= last, || format!("count decreased at Q²={q2}"))?;
            let n2 = count_ball(&BallSpec::new(2, z0, q2).unwrap(), self.workers).map_err(|e| e.to_string())?;
            let n4 = count_ball(&BallSpec::new(4, z0, q2).unwrap(), self.workers).map_err(|e| e.to_string())?;
            ensure(n4 <= n2 && n2 <= n, || format!("level monotonicity fails at Q²={q2}"))?;
            last = n;
        }
        Ok("inverse, sign and monotonicity".into())
    }

    fn angle_oracle(&self) -> Outcome {
        let spec = BallSpec::new(1, Point::I, 400.0).unwrap();
        let elements = enumerate_ball(&spec, self.workers).map_err(|e| e.to_string())?;
        let targets = [Point::new(0.0, 2.0).unwrap(), Point::new(1.0, 2.0).unwrap(), Point::new(-0.3, 0.5).unwrap()];
        let mut worst = 0.0f64;
        for z1 in targets {
            for (g, _) in &elements {
                match (angle(g, Point::I, z1), angle_oracle(g, Point::I, z1)) {
                    (Angle::Defined(a), Angle::Defined(b)) => worst = worst.max(angle_gap(a, b)),
                    (Angle::Undefined, Angle::Undefined) => {}
                    (a, b) => return Err(format!("{g} z1={z1:?}: {a:?} vs {b:?}")),
                }
            }
        }
        ensure(worst <= 1e-9, || format!("max gap {worst:e}"))?;
        Ok(format!("max gap {worst:e}"))
    }

    fn xi_normalization(&self) -> Outcome {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let t = NormalizedTarget::new(rng.random_range(-3.0..3.0), rng.random_range(0.1..4.0)).unwrap();
            ensure(self.xi(&t, -FRAC_PI_2) == 0.0 && self.xi(&t, FRAC_PI_2) == 1.0, || "endpoints".into())?;
            let mut prev = 0.0;
            for k in 0..=400 {
                let w = -FRAC_PI_2 + PI * k as f64 / 400.0;
                let v = self.xi(&t, w);
                ensure(v >= prev - 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&v), || {
                    format!("Ξ not a CDF at ω={w} for {t:?}")
                })?;
                prev = v;
            }
            let gap = (self.xi(&t, 1e-9) - self.xi(&t, -1e-9)).abs();
            ensure(gap < 1e-6, || format!("jump {gap} at 0"))?;
        }
        let uniform = NormalizedTarget::new(0.0, 1.0).unwrap();
        for k in 0..=20 {
            let w = -FRAC_PI_2 + PI * k as f64 / 20.0;
            ensure((self.xi(&uniform, w) - (w / PI + 0.5)).abs() < 1e-12, || "uniform reduction".into())?;
        }
        Ok("endpoints, monotone, continuous".into())
    }

    fn density_derivative(&self) -> Outcome {
        let mut rng = StdRng::seed_from_u64(12);
        let h = 1e-5;
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let t = NormalizedTarget::new(rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0)).unwrap();
            for k in 1..40 {
                let w = -FRAC_PI_2 + PI * k as f64 / 40.0;
                let fd = (self.xi(&t, w + h) - self.xi(&t, w - h)) / (2.0 * h);
                worst = worst.max((fd - density_normalized(&t, w) / PI).abs());
            }
        }
        ensure(worst <= 1e-5, || format!("max error {worst:e}"))?;
        let ctx = TheoryContext::new(2, Point::new(0.2, 0.8).unwrap(), Point::new(-0.4, 1.7).unwrap());
        let mass = density_mass(&ctx, -FRAC_PI_2, FRAC_PI_2) * PI;
        ensure((mass - PI).abs() <= 1e-8, || format!("∫ρ = {mass}"))?;
        Ok(format!("max error {worst:e}"))
    }

    fn constants(&self) -> Outcome {
        for level in 1..=100u32 {
            let index = index_gamma_n(level) as i128;
            ensure(ball_coefficient(level) == Ratio::new(6, index), || format!("N={level}"))?;
        }
        Ok("N ≤ 100".into())
    }

    fn congruence_boxes(&self) -> Outcome {
        for c in 2..=300i64 {
            let full = IntInterval::new(0, c - 1);
            let bx = CongruenceBox::new(c, 1, full, full).map_err(|e| e.to_string())?;
            let n = count_congruence_box(&bx);
            ensure(n == euler_phi(c as u64), || format!("c={c}: {n}"))?;
        }
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..200 {
            let level = rng.random_range(1..=4u32);
            let c = level as i64 * rng.random_range(1..=15i64);
            let lo1 = rng.random_range(-40..40);
            let lo2 = rng.random_range(-40..40);
            let i1 = IntInterval::new(lo1, lo1 + rng.random_range(0..60));
            let i2 = IntInterval::new(lo2, lo2 + rng.random_range(0..60));
            let bx = CongruenceBox::new(c, level, i1, i2).map_err(|e| e.to_string())?;
            let n = level as i64;
            let mut brute = 0u64;
            for a in i1.lo..=i1.hi {
                for d in i2.lo..=i2.hi {
                    if (a * d - 1).rem_euclid(n * c) == 0 && (d - 1).rem_euclid(n) == 0 {
                        brute += 1;
                    }
                }
            }
            ensure(count_congruence_box(&bx) == brute, || format!("box {bx:?}"))?;
        }
        Ok("full boxes c ≤ 300, 200 random boxes".into())
    }

    fn weil(&self) -> Outcome {
        let report = weil_certificate(300, -5..=5, -5..=5).map_err(|e| e.to_string())?;
        ensure(report.max_ratio <= 1.0 + 1e-9, || format!("ratio {}", report.max_ratio))?;
        Ok(format!("{} sums, max ratio {:.6}", report.checked, report.max_ratio))
    }

    fn membership(&self) -> Outcome {
        let mut rng = StdRng::seed_from_u64(14);
        let mut checked = 0;
        while checked < 2000 {
            let xs = rng.random_range(-3.0..3.0);
            let ys = rng.random_range(0.05..4.0);
            let lambda = if rng.random_bool(0.05) { 0.0 } else { rng.random_range(-10.0..10.0) };
            let x: f64 = rng.random_range(-10.0..10.0);
            let t = x - xs;
            if (t.abs() - ys).abs() < 1e-9 {
                continue;
            }
            let lhs = 2.0 * ys * t / (ys * ys - t * t) < lambda;
            let rhs = build_s(ys, lambda).contains(t);
            ensure(lhs == rhs, || format!("X={x} x*={xs} y*={ys} λ={lambda}"))?;
            checked += 1;
        }
        Ok(format!("{checked} checks"))
    }

    fn angle_convergence(&self) -> Outcome {
        let z1 = Point::new(1.0, 2.0).unwrap();
        let spec = BallSpec::from_radius(1, Point::I, 10.0).map_err(|e| e.to_string())?;
        let target = NormalizedTarget::from_points(Point::I, z1);
        let thetas = collect_thetas(&spec, z1, self.workers).map_err(|e| e.to_string())?;
        let ecdf = Ecdf::new(thetas.thetas).map_err(|e| e.to_string())?;
        let ks = ecdf.ks_distance(|w| self.xi(&target, w));
        ensure(ks <= 0.05, || format!("KS {ks}"))?;
        Ok(format!("KS {ks:.4}"))
    }

    fn counting_main_terms(&self) -> Outcome {
        let radius = 10.0;
        let n = count_ball(&BallSpec::from_radius(1, Point::I, radius).unwrap(), self.workers)
            .map_err(|e| e.to_string())?;
        let rel = (n as f64 / ball_main_term(1, radius) - 1.0).abs();
        ensure(rel <= 0.2, || format!("ball rel error {rel}"))?;
        let ball = BallSpec::new(1, Point::I, 200.0 * 200.0).unwrap();
        let mut worst: f64 = 0.0;
        for beta in [-1.0, 0.0, 1.0, f64::INFINITY] {
            let s = count_sector(&SectorSpec::new(ball, beta).unwrap(), self.workers).map_err(|e| e.to_string())?;
            let main = sector_main_term(1, beta, 200.0);
            worst = worst.max((s as f64 / main - 1.0).abs());
        }
        ensure(worst <= 0.1, || format!("sector rel error {worst}"))?;
        Ok(format!("ball {rel:.4}, sector {worst:.4}"))
    }
}

/// Run every suite. `fault` corrupts `Ξ` inside the checks only.
pub fn run(fault: Option<Fault>, workers: Workers) -> VerifyReport {
    let checker = Checker { fault, workers };
    type Suite = fn(&Checker) -> Outcome;
    let suites: [(&'static str, Suite); 11] = [
        ("enumeration_oracle", Checker::enumeration_oracle),
        ("ball_symmetry", Checker::ball_symmetry),
        ("angle_oracle", Checker::angle_oracle),
        ("xi_normalization", Checker::xi_normalization),
        ("density_derivative", Checker::density_derivative),
        ("constants", Checker::constants),
        ("congruence_boxes", Checker::congruence_boxes),
        ("weil_certificate", Checker::weil),
        ("membership", Checker::membership),
        ("angle_convergence", Checker::angle_convergence),
        ("counting_main_terms", Checker::counting_main_terms),
    ];
    let suites = suites
        .into_iter()
        .map(|(name, suite)| {
            let start = Instant::now();
            let outcome = suite(&checker);
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok(detail) => SuiteResult { name, passed: true, detail, seconds },
                Err(detail) => SuiteResult { name, passed: false, detail, seconds },
            }
        })
        .collect();
    VerifyReport { suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_gap_is_modulo_pi() {
        assert!(angle_gap(FRAC_PI_2, -FRAC_PI_2) < 1e-15);
        assert!((angle_gap(0.1, -0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn clean_run_passes_and_fault_is_caught() {
        let clean = run(None, Workers::new(2).unwrap());
        for s in &clean.suites {
            assert!(s.passed, "{}: {}", s.name, s.detail);
        }
        let faulty = run(Some(Fault::XiBranch), Workers::new(2).unwrap());
        assert!(!faulty.all_passed());
        assert!(faulty.to_json().contains("\"all_passed\":false"));
    }
}
