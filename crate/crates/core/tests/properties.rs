mod common;

use compack_core::limit::tail_sups;
use compack_core::scalar::{integer, rational};
use compack_core::{
    brick_limit, extract_convergent_subsequence, interiors_disjoint, orthant_shift,
    pack_moser_rectangles, pack_moser_squares, verify_packing, Decision, PackingCertificate,
    PackingMode, PackingSequence, Piece, PieceCollection, Placement, Rational, RigidMotion,
    TargetSet, Verdict,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..8).prop_map(|(p, q)| rational(p, q))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..40, 1i64..8).prop_map(|(p, q)| rational(p, q))
}

/// Exact motion with a signed-permutation rotation in dimension `n`.
fn exact_motion(n: usize) -> impl Strategy<Value = RigidMotion<Rational>> {
    (
        Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        proptest::collection::vec(any::<bool>(), n),
        proptest::collection::vec(small_rational(), n),
    )
        .prop_map(move |(cols, signs, xi)| {
            let mut theta = vec![integer(0); n * n];
            for (r, c) in cols.into_iter().enumerate() {
                theta[r * n + c] = if signs[r] { integer(-1) } else { integer(1) };
            }
            RigidMotion::new(theta, xi).unwrap()
        })
}

fn sq_dist(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

proptest! {
    #[test]
    fn exact_motions_are_isometries(
        s in exact_motion(3),
        x in proptest::collection::vec(small_rational(), 3),
        y in proptest::collection::vec(small_rational(), 3),
    ) {
        let (sx, sy) = (s.apply(&x).unwrap(), s.apply(&y).unwrap());
        prop_assert_eq!(sq_dist(&sx, &sy), sq_dist(&x, &y));
    }

    #[test]
    fn exact_inverse_composes_to_identity(s in exact_motion(3)) {
        prop_assert_eq!(s.invert().compose(&s).unwrap(), RigidMotion::identity(3));
        prop_assert_eq!(s.compose(&s.invert()).unwrap(), RigidMotion::identity(3));
    }

    #[test]
    fn ball_membership_is_equivariant(
        s in exact_motion(2),
        x in proptest::collection::vec(small_rational(), 2),
        z in proptest::collection::vec(small_rational(), 2),
        r in positive_rational(),
    ) {
        let inside = sq_dist(&z, &x) < &r * &r;
        let moved = sq_dist(&s.apply(&z).unwrap(), &s.apply(&x).unwrap()) < &r * &r;
        prop_assert_eq!(inside, moved);
    }

    #[test]
    fn motion_distance_is_a_metric(
        a in exact_motion(2),
        b in exact_motion(2),
        c in exact_motion(2),
    ) {
        let d = |p: &RigidMotion<Rational>, q: &RigidMotion<Rational>| p.distance(q).unwrap().value();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(a.distance_squared(&b).unwrap() == integer(0), a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn face_sharing_bricks_are_disjoint(
        w1 in positive_rational(), h1 in positive_rational(),
        w2 in positive_rational(), h2 in positive_rational(),
        x in small_rational(), y in small_rational(), slide in small_rational(),
        vertical in any::<bool>(),
    ) {
        let a = Piece::new(1, vec![w1.clone(), h1.clone()]).unwrap();
        let b = Piece::new(2, vec![w2, h2]).unwrap();
        let first = RigidMotion::translation(vec![x.clone(), y.clone()]);
        let second = if vertical {
            RigidMotion::translation(vec![&x + &w1, &y + slide])
        } else {
            RigidMotion::translation(vec![&x + slide, &y + &h1])
        };
        prop_assert!(interiors_disjoint(&first, &a, &second, &b).unwrap());
    }

    #[test]
    fn homothet_membership_is_monotone(
        x in proptest::collection::vec(small_rational(), 2),
        d in proptest::collection::vec(positive_rational(), 2),
        r in positive_rational(),
        ball in any::<bool>(),
    ) {
        let base = if ball { TargetSet::ball(r).unwrap() } else { TargetSet::brick(d).unwrap() };
        let mut was_inside = true;
        for j in 1..=60i64 {
            let t = TargetSet::homothet(base.clone(), integer(1) + rational(1, j)).unwrap();
            let inside = t.membership(&x).unwrap();
            prop_assert!(was_inside || !inside, "re-entered at j={}", j);
            was_inside = inside;
        }
    }

    #[test]
    fn orthant_shift_is_idempotent_and_lands_in_the_orthant(
        s in exact_motion(3),
        d in proptest::collection::vec(positive_rational(), 3),
    ) {
        let piece = Piece::new(1, d.clone()).unwrap();
        let once = orthant_shift(&s, &piece).unwrap();
        prop_assert_eq!(&orthant_shift(&once, &piece).unwrap(), &once);
        let diam2: Rational = d.iter().map(|v| v * v).sum();
        for v in piece.vertices::<Rational>() {
            for c in once.apply(&v).unwrap() {
                prop_assert!(c >= integer(0) && &c * &c <= diam2);
            }
        }
        // A placement already in the orthant only moves towards the origin.
        let inside = s.vertices_min(&piece).iter().all(|m| *m >= integer(0));
        if inside {
            for (new, old) in once.xi().iter().zip(s.xi()) {
                prop_assert!(new <= old);
            }
        }
    }

    #[test]
    fn brick_limit_tails_shrink(
        seq in proptest::collection::vec(proptest::collection::vec(positive_rational(), 2), 1..40),
        window in 1usize..10,
    ) {
        let sups = tail_sups(&seq);
        for k in 1..sups.len() {
            for m in 0..2 {
                prop_assert!(sups[k][m] <= sups[k - 1][m]);
            }
        }
        let b = brick_limit(&seq, window).unwrap();
        for m in 0..2 {
            prop_assert!(b.dims[m] <= sups[0][m]);
        }
        let min_volume = seq.iter().map(|d| &d[0] * &d[1]).min().unwrap();
        prop_assert_eq!(b.volume, min_volume);
    }
}

/// Lowest coordinate of the placed brick along each axis.
trait VerticesMin {
    fn vertices_min(&self, piece: &Piece) -> Vec<Rational>;
}

impl VerticesMin for RigidMotion<Rational> {
    fn vertices_min(&self, piece: &Piece) -> Vec<Rational> {
        let images: Vec<Vec<Rational>> =
            piece.vertices().iter().map(|v| self.apply(v).unwrap()).collect();
        (0..self.dim())
            .map(|m| images.iter().map(|y| y[m].clone()).min().unwrap())
            .collect()
    }
}

#[test]
fn float_motions_are_isometries() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..2000 {
        let n = rng.random_range(2..=3);
        let s = common::random_motion(&mut rng, n, 0.2, -10.0, 10.0);
        let x = common::uniform_vec(&mut rng, n, -10.0, 10.0);
        let y = common::uniform_vec(&mut rng, n, -10.0, 10.0);
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let before = d(&x, &y);
        let after = d(&s.apply(&x).unwrap(), &s.apply(&y).unwrap());
        assert!((after - before).abs() <= 1e-9 * before.max(1.0));
    }
}

#[test]
fn exclusion_index_is_sound_for_random_targets() {
    let mut rng = StdRng::seed_from_u64(2);
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.random_range(2..=3);
        let radius = common::round_rational(&mut rng, 0.5, 3.0);
        let base = if rng.random_bool(0.5) {
            TargetSet::ball(radius).unwrap()
        } else {
            TargetSet::brick((0..n).map(|_| common::round_rational(&mut rng, 0.5, 3.0)).collect()).unwrap()
        };
        let p = common::uniform_vec(&mut rng, n, -6.0, 6.0);
        let Ok(idx) = base.homothet_exclusion_index(&p) else { continue };
        checked += 1;
        for j in idx.k..idx.k + 200 {
            let lambda = integer(1) + Rational::new(1.into(), (j as i64).into());
            let grown = TargetSet::homothet(base.clone(), lambda).unwrap();
            // Points of the eps/2 ball around p stay outside every later homothet.
            for _ in 0..4 {
                let mut u = common::uniform_vec(&mut rng, n, -1.0, 1.0);
                let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
                let r = rng.random_range(0.0..0.999) * idx.epsilon / 2.0;
                u.iter_mut().zip(&p).for_each(|(v, c)| *v = c + *v * r / norm);
                assert!(!grown.membership(&u).unwrap(), "{p:?} j={j}");
            }
        }
    }
}

#[test]
fn contains_piece_agrees_with_sampling() {
    let mut rng = StdRng::seed_from_u64(3);
    let mut decided = 0;
    for _ in 0..400 {
        let target = if rng.random_bool(0.5) {
            TargetSet::brick(vec![integer(3), integer(2)]).unwrap()
        } else {
            TargetSet::ball(integer(2)).unwrap()
        };
        let dims = [rng.random_range(0.2..1.5), rng.random_range(0.2..1.5)];
        let piece = common::piece(&dims);
        let m = common::random_motion(&mut rng, 2, 0.3, -1.0, 2.5);
        let Some(oracle) = common::robust_contains(&mut rng, &target, &m, &piece.dims_f64(), 0.02, 10_000) else {
            continue;
        };
        decided += 1;
        let got = target.contains_piece(&m, &piece).unwrap();
        assert_eq!(got, Decision::from_bool(oracle), "{m:?} {dims:?} {target:?}");
    }
    assert!(decided > 300);
}

#[test]
fn verdicts_respect_mode_nesting() {
    let mut rng = StdRng::seed_from_u64(4);
    let modes = [PackingMode::Translated, PackingMode::Oriented, PackingMode::General];
    for _ in 0..300 {
        let cert = common::random_small_certificate(&mut rng);
        for (k, &mode) in modes.iter().enumerate() {
            let narrow = verify_packing(&cert.clone().with_mode(mode)).unwrap();
            if narrow.is_valid() {
                for &wider in &modes[k + 1..] {
                    assert!(verify_packing(&cert.clone().with_mode(wider)).unwrap().is_valid());
                }
            }
        }
    }
}

#[test]
fn packings_stay_valid_in_larger_bricks() {
    let cert = pack_moser_rectangles(30, &rational(11, 10)).unwrap();
    for grow in [rational(11, 10), integer(2), integer(5)] {
        let bigger = TargetSet::brick(vec![grow.clone(), grow]).unwrap();
        let moved = cert.clone().with_target(bigger).unwrap();
        assert!(verify_packing(&moved).unwrap().is_valid());
    }
}

#[test]
fn packers_are_deterministic_and_monotone_in_n() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.random_range(2..60);
        let side = common::round_rational(&mut rng, 1.0, 1.2);
        let width = common::round_rational(&mut rng, 0.6, 0.75);
        if let Ok(c) = pack_moser_rectangles(n, &side) {
            assert_eq!(c, pack_moser_rectangles(n, &side).unwrap());
            assert!(pack_moser_rectangles(n - 1, &side).is_ok());
        }
        if let Ok(c) = pack_moser_squares(n, &width) {
            assert_eq!(c, pack_moser_squares(n, &width).unwrap());
            if n > 2 {
                assert!(pack_moser_squares(n - 1, &width).is_ok());
            }
        }
    }
}

/// Four unit squares with half-unit gaps in `(1 + 2^-t) [0, 3.5]^2`,
/// shifted by `2^-t`: a limit with positive margins everywhere.
fn loose_sequence() -> Vec<PackingCertificate<f64>> {
    let coll = PieceCollection::custom(vec![vec![integer(1), integer(1)]; 4]).unwrap();
    (1..=40)
        .map(|t| {
            let o = 2f64.powi(-t);
            let lambda = Rational::from_float(1.0 + o).unwrap();
            let base = TargetSet::brick(vec![rational(7, 2), rational(7, 2)]).unwrap();
            let target = TargetSet::homothet(base, lambda).unwrap();
            let corners = [[0.5, 0.5], [2.0 + o, 0.5], [0.5, 2.0 + o], [2.0 + o, 2.0 + o]];
            let placements = corners
                .iter()
                .enumerate()
                .map(|(k, c)| Placement::new(k + 1, RigidMotion::translation(c.to_vec())))
                .collect();
            PackingCertificate::new(coll.clone(), target, PackingMode::Oriented, placements).unwrap()
        })
        .collect()
}

#[test]
fn limit_survives_perturbation_within_the_cluster_diameter() {
    let seq = PackingSequence::new(loose_sequence()).unwrap();
    let report = extract_convergent_subsequence(&seq, 1e-6, 5).unwrap();
    assert_eq!(report.verdict.verdict, Verdict::Valid);
    assert!(report.certified_slack < 0.5);
    let limit = report.limit.to_f64();
    let mut rng = StdRng::seed_from_u64(6);
    for _ in 0..200 {
        let placements = limit
            .placements()
            .iter()
            .map(|p| {
                let eps = report.cluster_diameter / 2.0;
                let turn = RigidMotion::rotation_2d(rng.random_range(-eps..=eps), [0.0, 0.0]);
                let shift = common::uniform_vec(&mut rng, 2, -eps, eps);
                let m = turn.compose(&p.motion).unwrap().compose(&RigidMotion::translation(shift)).unwrap();
                Placement::new(p.piece_id, m)
            })
            .collect();
        let moved = PackingCertificate::new(
            limit.collection().clone(),
            limit.target().clone(),
            limit.mode(),
            placements,
        )
        .unwrap();
        assert!(verify_packing(&moved).unwrap().is_valid());
    }
    for p in limit.placements() {
        assert!(seq.bound().contains_point(p.motion.xi()));
    }
}
