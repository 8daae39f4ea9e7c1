//! Acceptance criteria A1-A12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use compack_core::scalar::{integer, rational, Measure};
use compack_core::{
    brick_limit, clip_brick, collection_area, extract_convergent_subsequence, fixtures,
    is_tiling, lipschitz_constant, orthant_shift, pack_moser_rectangles, pack_moser_squares,
    verify_packing, CollectionKind, Error, PackingCertificate, PackingMode, PackingSequence,
    Piece, PieceCollection, Placement, Rational, RigidMotion, Scalar, TargetSet, Verdict,
    Violation,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    check(took < limit, format!("took {took:.2?}, limit {limit:?}"))
}

fn a1() -> Outcome {
    let mut worst = Duration::ZERO;
    for n in [1usize, 10, 1_000, 1_000_000] {
        let t = Instant::now();
        let area = collection_area(CollectionKind::MoserRectangles, n).map_err(|e| e.to_string())?;
        worst = worst.max(t.elapsed());
        let expected = integer(1) - Rational::new(1.into(), (n as i64 + 1).into());
        check(area == expected, format!("N={n}: got {area}"))?;
        within(Duration::from_secs(1), t)?;
    }
    Ok(format!("exact 1 - 1/(N+1) for N up to 10^6, slowest {worst:.2?}"))
}

fn a2() -> Outcome {
    const REFERENCE: f64 = 0.644_934_066_848_226_4;
    let limit = std::f64::consts::PI.powi(2) / 6.0 - 1.0;
    check((limit - REFERENCE).abs() < 1e-15, "reference value disagrees with pi^2/6 - 1")?;
    let n = 10_000usize;
    let t = Instant::now();
    let area = collection_area(CollectionKind::MoserSquares, n).map_err(|e| e.to_string())?;
    within(Duration::from_secs(1), t)?;
    let gap = (area.to_f64() - REFERENCE).abs();
    check(gap < 1.0 / n as f64, format!("gap {gap:e} >= 1/N"))?;
    Ok(format!("|area - (pi^2/6 - 1)| = {gap:.6e} < 1e-4 in {:.2?}", t.elapsed()))
}

fn a3() -> Outcome {
    let t = Instant::now();
    let side = rational(21, 20);
    let cert = pack_moser_rectangles(100, &side).map_err(|e| e.to_string())?;
    let report = verify_packing(&cert).map_err(|e| e.to_string())?;
    within(Duration::from_secs(10), t)?;
    check(report.is_valid() && report.exact, "not verified exactly")?;
    let expected = rational(100, 101) / (&side * &side);
    check(
        report.coverage == Some(Measure::Exact(expected.clone())),
        format!("coverage {:?}", report.coverage),
    )?;
    Ok(format!("valid, coverage {expected} exactly, {:.2?}", t.elapsed()))
}

fn a4() -> Outcome {
    let t = Instant::now();
    let width = rational(13, 20);
    check(width.to_f64() > std::f64::consts::PI.powi(2) / 6.0 - 1.0, "width below the limit area")?;
    let cert = pack_moser_squares(50, &width).map_err(|e| e.to_string())?;
    let report = verify_packing(&cert).map_err(|e| e.to_string())?;
    within(Duration::from_secs(10), t)?;
    check(report.is_valid() && report.exact, "not verified exactly")?;
    Ok(format!(
        "valid, coverage {:.6}, {:.2?}",
        report.coverage.map(|c| c.to_f64()).unwrap_or(f64::NAN),
        t.elapsed()
    ))
}

fn a5() -> Outcome {
    let t = Instant::now();
    let float = PackingSequence::new(fixtures::shrinking_homothet_float(50)).map_err(|e| e.to_string())?;
    let r = extract_convergent_subsequence(&float, 1e-6, 10).map_err(|e| e.to_string())?;
    check(r.verdict.verdict == Verdict::Valid, "float limit not valid")?;
    check(r.verdict.coverage == Some(Measure::Exact(integer(1))), "float limit coverage not 1")?;
    check(is_tiling(&r.verdict) == Ok(true), "float limit is not a tiling")?;
    check(r.cluster_diameter <= 1e-6, format!("float diameter {:e}", r.cluster_diameter))?;

    let exact = PackingSequence::new(fixtures::shrinking_homothet_exact(50)).map_err(|e| e.to_string())?;
    let e = extract_convergent_subsequence(&exact, 1e-6, 10).map_err(|e| e.to_string())?;
    check(e.verdict.verdict == Verdict::Valid, "exact limit not valid")?;
    check(e.verdict.coverage == Some(Measure::Exact(integer(1))), "exact limit coverage not 1")?;
    check(e.cluster_diameter == 0.0, format!("exact diameter {:e}", e.cluster_diameter))?;
    within(Duration::from_secs(5), t)?;
    Ok(format!(
        "tiling limit; float diameter {:.2e} over {} kept, exact diameter 0, {:.2?}",
        r.cluster_diameter,
        r.kept_indices.len(),
        t.elapsed()
    ))
}

fn a6() -> Outcome {
    let seq = PackingSequence::new(fixtures::funnel_escape(50)).map_err(|e| e.to_string())?;
    let mut last = None;
    for _ in 0..2 {
        match extract_convergent_subsequence(&seq, 1e-6, 10) {
            Err(e @ Error::Divergence { .. }) => {
                if let Some(prev) = &last {
                    check(prev == &e, "divergence diagnostic not deterministic")?;
                }
                last = Some(e);
            }
            other => return Err(format!("expected divergence, got {other:?}")),
        }
    }
    Ok(format!("{}", last.expect("two runs")))
}

/// Distance from `x` to `lambda * base` for centred balls and origin bricks.
fn homothet_distance(base: &TargetSet, lambda: f64, x: &[f64]) -> f64 {
    match base {
        TargetSet::Ball { radius } => {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm - lambda * radius.to_f64()).max(0.0)
        }
        TargetSet::Brick { dims } => x
            .iter()
            .zip(dims)
            .map(|(v, d)| {
                let hi = lambda * d.to_f64();
                let g = if *v < 0.0 { -v } else if *v > hi { v - hi } else { 0.0 };
                g * g
            })
            .sum::<f64>()
            .sqrt(),
        _ => unreachable!("only balls and bricks are sampled"),
    }
}

fn a7() -> Outcome {
    let ball = TargetSet::ball(integer(1)).map_err(|e| e.to_string())?;
    let x = [1.5, 0.0];
    let idx = ball.homothet_exclusion_index(&x).map_err(|e| e.to_string())?;
    check(idx.k == 7, format!("k = {}", idx.k))?;
    check(idx.epsilon / 2.0 == 0.25, format!("radius {}", idx.epsilon / 2.0))?;
    for j in 7..=1000i64 {
        // Disjoint iff |x| - (1 + 1/j) >= 1/4, i.e. 1 + 1/j <= 5/4.
        let lambda = integer(1) + Rational::new(1.into(), j.into());
        check(lambda <= rational(5, 4), format!("j={j} reaches the ball"))?;
        let d = homothet_distance(&ball, lambda.to_f64(), &x);
        check(d >= 0.25, format!("j={j}: distance {d}"))?;
    }

    let mut rng = StdRng::seed_from_u64(7);
    let mut pairs = 0;
    let mut checked_j = 0u64;
    while pairs < 1000 {
        let n = rng.random_range(2..=3);
        let base = if rng.random_bool(0.5) {
            TargetSet::ball(common::round_rational(&mut rng, 0.5, 3.0)).unwrap()
        } else {
            TargetSet::brick((0..n).map(|_| common::round_rational(&mut rng, 0.5, 3.0)).collect()).unwrap()
        };
        let p: Vec<f64> = common::uniform_vec(&mut rng, n, -6.0, 6.0);
        let Ok(idx) = base.homothet_exclusion_index(&p) else { continue };
        pairs += 1;
        let radius = idx.epsilon / 2.0;
        for j in idx.k..=1000 {
            let lambda = 1.0 + 1.0 / j as f64;
            let d = homothet_distance(&base, lambda, &p);
            check(
                d >= radius * (1.0 - 1e-12),
                format!("point {p:?}, j={j}: distance {d} < {radius}"),
            )?;
            checked_j += 1;
        }
    }
    Ok(format!("k=7 for (1.5, 0); 1000 random pairs, {checked_j} (pair, j) checks"))
}

fn a8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for s in 0..100_000usize {
        let n = 2 + s % 2;
        let a = common::random_motion(&mut rng, n, 0.1, -10.0, 10.0);
        let b = if s % 4 < 2 {
            common::random_motion(&mut rng, n, 0.1, -10.0, 10.0)
        } else {
            // Nearby pair: a small rotation and shift of `a`.
            let scale = 10f64.powi(-rng.random_range(1..8));
            let axis = rng.random_range(0.0..std::f64::consts::TAU) * scale;
            let mut delta = RigidMotion::rotation_2d(axis, [0.0, 0.0]);
            if n == 3 {
                let (c, si) = (axis.cos(), axis.sin());
                delta = RigidMotion::new(vec![c, -si, 0.0, si, c, 0.0, 0.0, 0.0, 1.0], vec![0.0; 3]).unwrap();
            }
            let shift = common::uniform_vec(&mut rng, n, -scale, scale);
            delta.compose(&a).unwrap().compose(&RigidMotion::translation(shift)).unwrap()
        };
        let mut y = common::uniform_vec(&mut rng, n, -1.0, 1.0);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = rng.random_range(0.0..10.0);
        y.iter_mut().for_each(|v| *v *= r / norm.max(1e-300));
        let ya = a.apply(&y).unwrap();
        let yb = b.apply(&y).unwrap();
        let lhs = ya.iter().zip(&yb).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let d = a.distance(&b).unwrap().value();
        let ylen = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bound = lipschitz_constant(ylen, n) * d;
        if d > 0.0 {
            worst = worst.max(lhs / bound);
        }
        check(lhs <= bound, format!("sample {s}: {lhs} > {bound}"))?;
    }
    Ok(format!("100000 samples, zero violations, max ratio {worst:.3}"))
}

fn a9() -> Outcome {
    let unit = Piece::new(1, vec![integer(1), integer(1)]).unwrap();
    let long = Piece::new(1, vec![integer(2), integer(1)]).unwrap();
    let cases = [
        (RigidMotion::translation(vec![integer(4), integer(-2)]), &unit, [0, 0]),
        (RigidMotion::quarter_turn(2, [integer(5), integer(5)]), &unit, [1, 1]),
        (RigidMotion::quarter_turn(1, [integer(3), integer(0)]), &long, [1, 0]),
    ];
    for (s, p, want) in cases {
        let got = orthant_shift(&s, p).map_err(|e| e.to_string())?;
        check(got.xi() == [integer(want[0]), integer(want[1])], format!("got {:?}", got.xi()))?;
    }

    let mut rng = StdRng::seed_from_u64(9);
    for t in 0..10_000usize {
        let n = 2 + t % 2;
        let dims: Vec<Rational> = (0..n).map(|_| common::round_rational(&mut rng, 0.0, 3.0)).collect();
        let piece = Piece::new(1, dims.clone()).unwrap();
        let diam = piece.radius();
        if t % 2 == 0 {
            let theta = common::signed_permutation(&mut rng, n).into_iter().map(integer).collect();
            let xi = (0..n).map(|_| common::round_rational(&mut rng, -5.0, 5.0)).collect();
            let s = RigidMotion::new(theta, xi).unwrap();
            let once = orthant_shift(&s, &piece).unwrap();
            check(orthant_shift(&once, &piece).unwrap() == once, format!("triple {t}: not idempotent"))?;
            let d2: Rational = dims.iter().map(|d| d * d).sum();
            for v in piece.vertices::<Rational>() {
                let y = once.apply(&v).unwrap();
                check(
                    y.iter().all(|c| !c.is_negative() && c * c <= d2),
                    format!("triple {t}: image vertex {y:?} outside"),
                )?;
            }
        } else {
            let s = common::random_motion(&mut rng, n, 0.0, -5.0, 5.0);
            let once = orthant_shift(&s, &piece).unwrap();
            check(orthant_shift(&once, &piece).unwrap() == once, format!("triple {t}: not idempotent"))?;
            let tol = 1e-12 * (1.0 + diam);
            for v in piece.vertices::<f64>() {
                let y = once.apply(&v).unwrap();
                check(
                    y.iter().all(|c| *c >= -tol && *c <= diam + tol),
                    format!("triple {t}: image vertex {y:?} outside"),
                )?;
            }
        }
    }
    Ok("three examples exact; 10000 random triples idempotent and in [0, diam]^n".into())
}

use num_traits::Signed;

fn a10() -> Outcome {
    let seq: Vec<Vec<Rational>> = (1..=200i64)
        .map(|j| vec![integer(1) + Rational::new(1.into(), j.into()), integer(2)])
        .collect();
    let b = brick_limit(&seq, 50).map_err(|e| e.to_string())?;
    check((&b.volume - integer(2)).abs() <= rational(2, 151), format!("V = {}", b.volume))?;
    check((&b.dims[0] - integer(1)).abs() <= rational(1, 151), format!("b1 = {}", b.dims[0]))?;
    check(b.dims[1] == integer(2), format!("b2 = {}", b.dims[1]))?;
    let clipped = clip_brick(&[10.0, 0.1], &2f64.sqrt()).map_err(|e| e.to_string())?;
    check(clipped == vec![2f64.sqrt(), 0.1], format!("clip {clipped:?}"))?;
    Ok(format!("V = {}, b = ({}, {}), clip = (sqrt 2, 1/10)", b.volume, b.dims[0], b.dims[1]))
}

fn a11() -> Outcome {
    let square = PieceCollection::custom(vec![vec![integer(1), integer(1)]]).unwrap();
    let target = TargetSet::brick(vec![integer(1), integer(1)]).unwrap();
    let reflect = RigidMotion::new(
        vec![integer(-1), integer(0), integer(0), integer(1)],
        vec![integer(1), integer(0)],
    )
    .unwrap();
    let cert = |mode, motion: RigidMotion<Rational>| {
        PackingCertificate::new(square.clone(), target.clone(), mode, vec![Placement::new(1, motion)]).unwrap()
    };
    let general = verify_packing(&cert(PackingMode::General, reflect.clone())).unwrap();
    check(general.is_valid(), "reflection rejected in general mode")?;
    let oriented = verify_packing(&cert(PackingMode::Oriented, reflect)).unwrap();
    check(
        oriented.verdict == Verdict::Invalid && oriented.violations == vec![Violation::Mode { piece: 1 }],
        format!("oriented: {:?}", oriented.violations),
    )?;
    let turn = RigidMotion::quarter_turn(1, [integer(1), integer(0)]);
    check(verify_packing(&cert(PackingMode::Oriented, turn.clone())).unwrap().is_valid(), "rotation rejected in oriented mode")?;
    let translated = verify_packing(&cert(PackingMode::Translated, turn)).unwrap();
    check(
        translated.verdict == Verdict::Invalid && translated.violations == vec![Violation::Mode { piece: 1 }],
        format!("translated: {:?}", translated.violations),
    )?;
    Ok("reflection: general valid, oriented invalid; rotation: translated invalid".into())
}

fn a12() -> Outcome {
    const DECISIVE: usize = 1000;
    const SAMPLES: usize = 100_000;
    const DELTA: f64 = 0.05;
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(12);
    let (mut decisive, mut attempts, mut invalid) = (0usize, 0usize, 0usize);
    while decisive < DECISIVE {
        attempts += 1;
        check(attempts <= 50 * DECISIVE, "too few decisive certificates")?;
        let cert = common::random_small_certificate(&mut rng);
        let Some((escaping, overlapping)) = common::oracle_violations(&mut rng, &cert, DELTA, SAMPLES) else {
            continue;
        };
        decisive += 1;
        let report = verify_packing(&cert).map_err(|e| e.to_string())?;
        let mut got_escaping = Vec::new();
        let mut got_overlapping = Vec::new();
        for v in &report.violations {
            match v {
                Violation::Containment { piece, .. } => got_escaping.push(*piece),
                Violation::Overlap { first, second, .. } => got_overlapping.push((*first, *second)),
                Violation::Mode { .. } => return Err("mode violation in general mode".into()),
            }
        }
        got_escaping.sort();
        let oracle_valid = escaping.is_empty() && overlapping.is_empty();
        if !oracle_valid {
            invalid += 1;
        }
        check(
            report.marginal.is_empty()
                && got_escaping == escaping
                && got_overlapping == overlapping
                && report.is_valid() == oracle_valid,
            format!(
                "certificate {attempts}: verifier {:?} / {:?}, oracle escaping {escaping:?} overlapping {overlapping:?}",
                report.violations, report.marginal
            ),
        )?;
    }
    Ok(format!(
        "{decisive} decisive certificates ({invalid} invalid) of {attempts} drawn agree, {:.2?}",
        t.elapsed()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
        ("A10", a10),
        ("A11", a11),
        ("A12", a12),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("{name} PASS {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{name} FAIL {detail}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 12 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
