mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{naive_ball, RationalPoint};
use hyperlattice::geometry::{conjugate_entries, Point};
use hyperlattice::group::{
    collect_angles, count_ball, count_sector, enumerate_ball, enumerate_sector, Ball, BallSpec, GroupError, SectorSpec,
    Workers,
};
use hyperlattice::stats::{convergence_table, Ecdf};
use hyperlattice::TheoryContext;

const BASES: [RationalPoint; 4] =
    [RationalPoint::I, RationalPoint::new(1, 2, 1), RationalPoint::new(5, 7, 10), RationalPoint::new(-3, 13, 10)];

fn ball(level: u32, z0: Point, q2: f64) -> BallSpec {
    BallSpec::new(level, z0, q2).unwrap()
}

#[test]
fn enumeration_equals_quadruple_loop() {
    for level in [1u32, 2, 3, 4, 6] {
        for z0 in BASES {
            let oracle = naive_ball(level as i64, z0, 400);
            for q2 in [2i64, 3, 10, 57, 150, 400] {
                let expected: BTreeSet<_> =
                    oracle.iter().filter(|(_, n)| *n <= q2 as i128 * z0.scale()).map(|(g, _)| *g).collect();
                let got: Vec<_> = enumerate_ball(&ball(level, z0.point(), q2 as f64), Workers::single())
                    .unwrap()
                    .into_iter()
                    .map(|(g, _)| g)
                    .collect();
                let got_set: BTreeSet<_> = got.iter().copied().collect();
                assert_eq!(got.len(), got_set.len(), "duplicates at N={level} z0={z0:?} Q²={q2}");
                assert_eq!(got_set, expected, "N={level} z0={z0:?} Q²={q2}");
            }
        }
    }
}

#[test]
fn enumerated_entries_match_direct_conjugation() {
    let z0 = Point::new(0.5, 0.7).unwrap();
    for (g, e) in enumerate_ball(&ball(2, z0, 300.0), Workers::single()).unwrap() {
        assert!(g.in_level(2));
        assert_eq!(e, conjugate_entries(&g, z0));
        assert!(e.norm_sq() <= 300.0);
    }
}

#[test]
fn norms_are_invariant_under_inversion() {
    for z0 in BASES {
        for level in [1u32, 3, 5] {
            let els = enumerate_ball(&ball(level, z0.point(), 250.0), Workers::single()).unwrap();
            let set: BTreeSet<_> = els.iter().map(|(g, _)| *g).collect();
            let mut forward = BTreeMap::new();
            let mut backward = BTreeMap::new();
            for g in &set {
                assert!(set.contains(&g.inverse()), "{g}⁻¹ missing");
                *forward.entry(z0.scaled_norm(g.a(), g.b(), g.c(), g.d())).or_insert(0) += 1;
                let h = g.inverse();
                *backward.entry(z0.scaled_norm(h.a(), h.b(), h.c(), h.d())).or_insert(0) += 1;
            }
            assert_eq!(forward, backward);
            if level <= 2 {
                assert!(set.iter().all(|g| set.contains(&-*g)));
            }
        }
    }
}

#[test]
fn counts_are_monotone_in_radius_and_level() {
    let z0 = Point::new(-0.3, 1.3).unwrap();
    let mut prev = [0u64; 4];
    for q2 in [2.0, 5.0, 20.0, 80.0, 320.0, 1280.0] {
        let counts: Vec<u64> =
            [1u32, 2, 4, 8].iter().map(|&n| count_ball(&ball(n, z0, q2), Workers::single()).unwrap()).collect();
        for k in 0..4 {
            assert!(counts[k] >= prev[k]);
            if k > 0 {
                assert!(counts[k] <= counts[k - 1], "Γ(kN) ⊆ Γ(N) violated at Q²={q2}");
            }
            prev[k] = counts[k];
        }
        let c3 = count_ball(&ball(3, z0, q2), Workers::single()).unwrap();
        let c6 = count_ball(&ball(6, z0, q2), Workers::single()).unwrap();
        assert!(c6 <= c3 && c3 <= counts[0]);
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let spec = ball(1, Point::new(0.2, 0.9).unwrap(), 5000.0);
    let one = enumerate_ball(&spec, Workers::single()).unwrap();
    for w in [2, 3, 8] {
        assert_eq!(one, enumerate_ball(&spec, Workers::new(w).unwrap()).unwrap());
    }
    let z1 = Point::new(0.4, 1.5).unwrap();
    let a1 = collect_angles(&spec, z1, Workers::single()).unwrap();
    let a4 = collect_angles(&spec, z1, Workers::new(4).unwrap()).unwrap();
    assert_eq!(a1, a4);
    assert_eq!(Ecdf::from_samples(&a1.samples).unwrap(), Ecdf::from_samples(&a4.samples).unwrap());
    for beta in [-2.0, 0.0, 0.7, f64::INFINITY] {
        let s = SectorSpec::new(spec, beta).unwrap();
        assert_eq!(count_sector(&s, Workers::single()).unwrap(), count_sector(&s, Workers::new(5).unwrap()).unwrap());
    }
}

/// Sector predicate evaluated exactly for `z0 = i`.
fn in_sector(a: i64, c: i64, d: i64, q2: i64, beta: f64) -> bool {
    if c == 0 {
        return false;
    }
    let (a, c, d) = (a as i128, c as i128, d as i128);
    let ratio_ok = if beta == f64::INFINITY {
        true
    } else if beta == f64::NEG_INFINITY {
        false
    } else {
        (a as f64) / (c as f64) <= beta
    };
    ratio_ok && (c * c + a * a) * (c * c + d * d) <= q2 as i128 * c * c
}

#[test]
fn sector_matches_brute_force() {
    for level in [1i64, 2, 3] {
        for q2 in [2i64, 7, 30, 120] {
            for beta in [f64::NEG_INFINITY, -1.5, -1.0, 0.0, 0.5, 1.0, f64::INFINITY] {
                let bound = (q2 as f64).sqrt().ceil() as i64 + 1;
                let mut brute = Vec::new();
                for c in -bound..=bound {
                    if c == 0 || c % level != 0 {
                        continue;
                    }
                    for a in -bound..=bound {
                        for d in -bound..=bound {
                            if (a - 1).rem_euclid(level) != 0 || (d - 1).rem_euclid(level) != 0 {
                                continue;
                            }
                            if (a * d - 1) % c != 0 || !in_sector(a, c, d, q2, beta) {
                                continue;
                            }
                            let b = (a * d - 1) / c;
                            if b.rem_euclid(level) == 0 {
                                brute.push(hyperlattice::GroupElement::new(a, b, c, d).unwrap());
                            }
                        }
                    }
                }
                brute.sort();
                let spec = SectorSpec::new(ball(level as u32, Point::I, q2 as f64), beta).unwrap();
                let mut got = enumerate_sector(&spec, Workers::single()).unwrap();
                got.sort();
                assert_eq!(got, brute, "N={level} Q²={q2} β={beta}");
                assert_eq!(count_sector(&spec, Workers::single()).unwrap(), brute.len() as u64);
            }
        }
    }
}

#[test]
fn sector_elements_lie_in_a_slightly_larger_ball() {
    let z0 = Point::new(0.3, 1.4).unwrap();
    for beta in [-1.0, 0.0, 2.0, f64::INFINITY] {
        let q2 = 900.0;
        let spec = SectorSpec::new(ball(1, z0, q2), beta).unwrap();
        for g in enumerate_sector(&spec, Workers::single()).unwrap() {
            let e = conjugate_entries(&g, z0);
            let slack = 2.0 * (e.b / e.c).abs() + 1.0 / (e.c * e.c);
            assert!(e.norm_sq() <= q2 + slack + 1e-9, "{g}");
            assert!(e.a / e.c <= beta);
        }
    }
}

#[test]
fn oversized_balls_are_rejected() {
    let spec = BallSpec::new(1, Point::I, 1e19).unwrap();
    assert!(matches!(Ball::new(spec), Err(GroupError::EntryBoundExceeded(_))));
    assert!(matches!(count_ball(&spec, Workers::single()), Err(GroupError::EntryBoundExceeded(_))));
    let tiny = Point::new(0.0, 1e-12).unwrap();
    assert!(matches!(
        count_ball(&BallSpec::new(1, tiny, 4.0).unwrap(), Workers::single()),
        Err(GroupError::EntryBoundExceeded(_))
    ));
    assert_eq!(BallSpec::new(1, Point::I, 1.5), Err(GroupError::InvalidNormBound(1.5)));
    assert_eq!(BallSpec::new(0, Point::I, 2.0), Err(GroupError::InvalidLevel));
    assert_eq!(Workers::new(0), Err(GroupError::InvalidWorkers));
}

#[test]
fn convergence_table_counts_match_count_ball() {
    let z0 = Point::new(0.1, 1.2).unwrap();
    let ctx = TheoryContext::new(2, z0, Point::new(-0.5, 0.8).unwrap());
    let radii = [2.0, 5.0, 8.0];
    let rows = convergence_table(&ctx, &radii, Workers::new(2).unwrap()).unwrap();
    for (row, &r) in rows.iter().zip(&radii) {
        let spec = BallSpec::from_radius(2, z0, r).unwrap();
        assert_eq!(row.count, count_ball(&spec, Workers::single()).unwrap());
        assert!((row.rel_error - (row.count as f64 / row.main_term - 1.0).abs()).abs() < 1e-15);
    }
}
