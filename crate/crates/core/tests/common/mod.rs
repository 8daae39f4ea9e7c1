//! Random generators and a Monte-Carlo geometry oracle shared by the
//! integration tests.

#![allow(dead_code)]

use compack_core::{
    PackingCertificate, PackingMode, Piece, PieceCollection, Placement, Rational, RigidMotion,
    TargetSet,
};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-distributed orthogonal matrix (row-major) via QR of a Gaussian
/// matrix with the sign of `R`'s diagonal folded into `Q`.
pub fn haar_orthogonal(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| q[(r, c)]).collect()
}

pub fn signed_permutation(rng: &mut StdRng, n: usize) -> Vec<i64> {
    let mut cols: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        cols.swap(i, rng.random_range(0..=i));
    }
    let mut theta = vec![0; n * n];
    for (r, c) in cols.into_iter().enumerate() {
        theta[r * n + c] = if rng.random_bool(0.5) { 1 } else { -1 };
    }
    theta
}

pub fn uniform_vec(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Float motion whose rotation is a signed permutation with probability
/// `perm_prob`, otherwise Haar.
pub fn random_motion(rng: &mut StdRng, n: usize, perm_prob: f64, lo: f64, hi: f64) -> RigidMotion<f64> {
    let theta = if rng.random_bool(perm_prob) {
        signed_permutation(rng, n).into_iter().map(|v| v as f64).collect()
    } else {
        haar_orthogonal(rng, n)
    };
    RigidMotion::new(theta, uniform_vec(rng, n, lo, hi)).unwrap()
}

pub fn to_rational(v: f64) -> Rational {
    Rational::from_float(v).unwrap()
}

/// A short decimal rational in `[lo, hi)`, so exact arithmetic stays small.
pub fn round_rational(rng: &mut StdRng, lo: f64, hi: f64) -> Rational {
    let v = rng.random_range(lo..hi);
    Rational::new(((v * 100.0).round() as i64).into(), 100.into())
}

/// Uniform point of the brick `[-pad, d + pad]` (`pad < 0` erodes).
pub fn sample_box(rng: &mut StdRng, dims: &[f64], pad: f64) -> Vec<f64> {
    dims.iter().map(|d| rng.random_range(-pad..d + pad)).collect()
}

pub fn strictly_inside_box(y: &[f64], dims: &[f64], pad: f64) -> bool {
    y.iter().zip(dims).all(|(v, d)| *v > -pad && *v < d + pad)
}

/// Some sampled point of `motion([-pad, d + pad])` leaves the target.
pub fn mc_escapes(
    rng: &mut StdRng,
    target: &TargetSet,
    motion: &RigidMotion<f64>,
    dims: &[f64],
    pad: f64,
    samples: usize,
) -> bool {
    // Vertices first: the extreme points decide containment of a convex set.
    let n = dims.len();
    let corners = (0..1usize << n).map(|mask| {
        (0..n)
            .map(|c| if mask >> c & 1 == 1 { dims[c] + pad } else { -pad })
            .collect::<Vec<f64>>()
    });
    let random = (0..samples).map(|_| sample_box(rng, dims, pad)).collect::<Vec<_>>();
    corners
        .chain(random)
        .any(|y| !target.membership(&motion.apply(&y).unwrap()).unwrap())
}

/// Some sampled point lies in the interiors of both padded placed bricks.
pub fn mc_overlap(
    rng: &mut StdRng,
    a: (&RigidMotion<f64>, &[f64]),
    b: (&RigidMotion<f64>, &[f64]),
    pad: f64,
    samples: usize,
) -> bool {
    let (ia, ib) = (a.0.invert(), b.0.invert());
    (0..samples).any(|k| {
        let (from, to, inv) = if k % 2 == 0 { (a, b, &ib) } else { (b, a, &ia) };
        let y = sample_box(rng, from.1, pad);
        if !strictly_inside_box(&y, from.1, pad) {
            return false;
        }
        let z = inv.apply(&from.0.apply(&y).unwrap()).unwrap();
        strictly_inside_box(&z, to.1, pad)
    })
}

/// Robust Monte-Carlo verdict: `Some(true)` when the check holds with the
/// pieces inflated by `delta`, `Some(false)` when it fails with them eroded
/// by `delta`, `None` when the case is too close to call.
pub fn robust_contains(
    rng: &mut StdRng,
    target: &TargetSet,
    motion: &RigidMotion<f64>,
    dims: &[f64],
    delta: f64,
    samples: usize,
) -> Option<bool> {
    if !mc_escapes(rng, target, motion, dims, delta, samples) {
        Some(true)
    } else if mc_escapes(rng, target, motion, dims, -delta, samples) {
        Some(false)
    } else {
        None
    }
}

pub fn robust_disjoint(
    rng: &mut StdRng,
    a: (&RigidMotion<f64>, &[f64]),
    b: (&RigidMotion<f64>, &[f64]),
    delta: f64,
    samples: usize,
) -> Option<bool> {
    if !mc_overlap(rng, a, b, delta, samples) {
        Some(true)
    } else if mc_overlap(rng, a, b, -delta, samples) {
        Some(false)
    } else {
        None
    }
}

/// Oracle's view of a certificate: pieces escaping the target and
/// overlapping id pairs, or `None` if any check was too close to call.
pub fn oracle_violations(
    rng: &mut StdRng,
    cert: &PackingCertificate<f64>,
    delta: f64,
    budget: usize,
) -> Option<(Vec<usize>, Vec<(usize, usize)>)> {
    let placed: Vec<(usize, &RigidMotion<f64>, Vec<f64>)> = cert
        .placements()
        .iter()
        .map(|p| (p.piece_id, &p.motion, cert.piece(p).dims_f64()))
        .collect();
    let k = placed.len();
    let checks = 2 * (k + k * (k - 1) / 2);
    let samples = (budget / checks.max(1)).max(100);
    let mut escaping = Vec::new();
    for (id, m, d) in &placed {
        if !robust_contains(rng, cert.target(), m, d, delta, samples)? {
            escaping.push(*id);
        }
    }
    let mut overlapping = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (&placed[i], &placed[j]);
            if !robust_disjoint(rng, (a.1, &a.2), (b.1, &b.2), delta, samples)? {
                overlapping.push((a.0.min(b.0), a.0.max(b.0)));
            }
        }
    }
    overlapping.sort();
    Some((escaping, overlapping))
}

/// Small planar certificate: 2 or 3 bricks with sides in `[0.2, 1.2)`
/// spread over a brick or ball target, general mode.
pub fn random_small_certificate(rng: &mut StdRng) -> PackingCertificate<f64> {
    let count = rng.random_range(2..=3);
    let dims: Vec<Vec<Rational>> = (0..count)
        .map(|_| vec![round_rational(rng, 0.2, 1.2), round_rational(rng, 0.2, 1.2)])
        .collect();
    let collection = PieceCollection::custom(dims).unwrap();
    let target = if rng.random_bool(0.5) {
        TargetSet::brick(vec![round_rational(rng, 2.0, 4.0), round_rational(rng, 2.0, 4.0)]).unwrap()
    } else {
        TargetSet::ball(round_rational(rng, 1.5, 3.0)).unwrap()
    };
    // Each piece gets its own horizontal band so some draws are packings.
    let placements = (1..=count)
        .map(|id| {
            let mut m = random_motion(rng, 2, 0.4, 0.0, 1.0);
            let band = (id as f64 - 1.0) * 1.3 - 0.8;
            let xi = vec![m.xi()[0] * 2.0 - 0.5, m.xi()[1] + band];
            m = RigidMotion::new(m.theta().to_vec(), xi).unwrap();
            Placement::new(id, m)
        })
        .collect();
    PackingCertificate::new(collection, target, PackingMode::General, placements).unwrap()
}

pub fn piece(dims: &[f64]) -> Piece {
    Piece::new(1, dims.iter().map(|v| to_rational(*v)).collect()).unwrap()
}
