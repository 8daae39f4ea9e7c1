//! Limits of packing sequences.
//!
//! A sequence of packings into targets that shrink towards a limit target
//! has, by compactness, a subsequence whose motions converge; the limit is a
//! packing of the limit target. At finite truncation this becomes:
//! cluster the certificates in the product motion metric, take the
//! coordinate-wise centroid of the surviving cluster, and verify it against
//! the analytically identified limit target.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::geometry::Aabb;
use crate::motions::{lipschitz_constant, project_to_orthogonal, RigidMotion};
use crate::pieces::Piece;
use crate::scalar::{max_of, min_of, simplest_in_interval, Rational, Scalar};
use crate::targets::TargetSet;
use crate::verification::{
    verify_packing, Certificate, PackingCertificate, Placement, VerificationReport,
};
use crate::{Error, Result};

/// Finite stretch of a packing sequence: same collection, mode and placed
/// pieces throughout, plus a box containing every target.
#[derive(Clone, Debug)]
pub struct PackingSequence<S> {
    entries: Vec<PackingCertificate<S>>,
    ids: Vec<usize>,
    bound: Aabb,
    limit_target: Option<TargetSet>,
}

impl<S: Scalar> PackingSequence<S> {
    /// Checks that entries are compatible and individually valid. The bound
    /// is the bounding box of the targets, or of the placed pieces when some
    /// target is unbounded.
    pub fn new(entries: Vec<PackingCertificate<S>>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyInput)?;
        let n = first.dim();
        let ids = placed_ids(first);
        for (k, e) in entries.iter().enumerate() {
            if e.collection() != first.collection() {
                return Err(Error::InvalidSequence(format!(
                    "entry {k} uses a different piece collection"
                )));
            }
            if e.mode() != first.mode() {
                return Err(Error::InvalidSequence(format!("entry {k} uses a different mode")));
            }
            if placed_ids(e) != ids {
                return Err(Error::InvalidSequence(format!(
                    "entry {k} places a different set of pieces"
                )));
            }
            let report = verify_packing(e)?;
            if !report.is_valid() {
                return Err(Error::InvalidSequence(format!(
                    "entry {k} is not a valid packing ({})",
                    report.verdict.name()
                )));
            }
        }
        let bound = if entries.iter().all(|e| e.target().is_bounded()) {
            entries
                .iter()
                .map(|e| e.target().bounding_box(n).expect("bounded"))
                .reduce(|a, b| a.union(&b))
                .expect("nonempty")
        } else {
            entries
                .iter()
                .flat_map(|e| e.placements().iter().map(move |p| image_box(&p.motion, e.piece(p))))
                .reduce(|a, b| a.union(&b))
                .unwrap_or_else(|| Aabb::new(vec![0.0; n], vec![0.0; n]))
        };
        Ok(PackingSequence {
            entries,
            ids,
            bound,
            limit_target: None,
        })
    }

    /// Replaces the bound, checking that it contains every target and every
    /// placed piece.
    pub fn with_bound(mut self, bound: Aabb) -> Result<Self> {
        let n = self.dim();
        if bound.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bound.dim(),
            });
        }
        for (k, e) in self.entries.iter().enumerate() {
            let target_ok = e
                .target()
                .bounding_box(n)
                .is_none_or(|b| bound.contains_box(&b));
            let pieces_ok = e
                .placements()
                .iter()
                .all(|p| bound.contains_box(&image_box(&p.motion, e.piece(p))));
            if !target_ok || !pieces_ok {
                return Err(Error::InvalidSequence(format!(
                    "bound does not contain entry {k}"
                )));
            }
        }
        self.bound = bound;
        Ok(self)
    }

    /// Declares the target the limit is verified against, instead of
    /// inferring it.
    pub fn with_limit_target(mut self, target: TargetSet) -> Self {
        self.limit_target = Some(target);
        self
    }

    pub fn entries(&self) -> &[PackingCertificate<S>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bound(&self) -> &Aabb {
        &self.bound
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    /// Motions of entry `k`, ordered by piece id.
    fn motions(&self, k: usize) -> Vec<&RigidMotion<S>> {
        let e = &self.entries[k];
        self.ids
            .iter()
            .map(|id| {
                &e.placements()
                    .iter()
                    .find(|p| p.piece_id == *id)
                    .expect("same ids in every entry")
                    .motion
            })
            .collect()
    }
}

fn placed_ids<S>(cert: &PackingCertificate<S>) -> Vec<usize>
where
    S: Scalar,
{
    let ids: BTreeSet<usize> = cert.placements().iter().map(|p| p.piece_id).collect();
    ids.into_iter().collect()
}

fn image_box<S: Scalar>(motion: &RigidMotion<S>, piece: &Piece) -> Aabb {
    let m = motion.to_f64();
    let verts: Vec<Vec<f64>> = piece
        .vertices::<f64>()
        .iter()
        .map(|v| m.apply(v).expect("dimension checked"))
        .collect();
    Aabb::from_points(verts.iter().map(Vec::as_slice)).expect("nonempty")
}

#[derive(Clone, Debug)]
pub struct LimitReport {
    /// Increasing indices of the entries in the final cluster.
    pub kept_indices: Vec<usize>,
    pub limit: Certificate,
    /// Largest product-metric distance from a kept entry to the centroid.
    pub cluster_diameter: f64,
    /// `max_i lipschitz_constant(radius_i) * cluster_diameter`.
    pub certified_slack: f64,
    pub verdict: VerificationReport,
    /// The limit was rounded to nearby simple rationals and verified exactly.
    pub snapped: bool,
    pub limit_target: TargetSet,
}

/// Iterative largest-cluster refinement in the metric
/// `max_i d(sigma_i, sigma_i')`.
///
/// Radii run through `tol * 2^t` from the bound's diameter down to
/// `tol / 2`, so every kept entry ends within `tol` of the centroid. At
/// each radius the kept set shrinks to its largest cluster (all members
/// within the radius of a leader; ties go to the lowest leader). The limit
/// is the coordinate-wise centroid with rotations re-projected onto `O(n)`.
/// When every coordinate admits a simple rational within the cluster
/// diameter and the rounded certificate verifies exactly, that rounded
/// certificate is reported instead of the floating centroid.
pub fn extract_convergent_subsequence<S: Scalar>(
    seq: &PackingSequence<S>,
    tol: f64,
    min_keep: usize,
) -> Result<LimitReport> {
    if !(tol > 0.0) {
        return Err(Error::NonPositiveEpsilon(tol));
    }
    let min_keep = min_keep.max(1);
    if seq.len() < min_keep {
        return Err(Error::InvalidSequence(format!(
            "{} entries, at least {min_keep} required",
            seq.len()
        )));
    }
    let n = seq.dim();
    let motions: Vec<Vec<&RigidMotion<S>>> = (0..seq.len()).map(|k| seq.motions(k)).collect();
    let len = seq.len();
    let mut dist = vec![0.0f64; len * len];
    for a in 0..len {
        for b in a + 1..len {
            let d = motions[a]
                .iter()
                .zip(&motions[b])
                .map(|(x, y)| x.distance(y).expect("same dimension").value())
                .fold(0.0, f64::max);
            dist[a * len + b] = d;
            dist[b * len + a] = d;
        }
    }

    let start = seq.bound().diameter().max(tol);
    let levels = (start / tol).log2().ceil().max(0.0) as i32;
    let mut kept: Vec<usize> = (0..len).collect();
    for t in (-1..=levels).rev() {
        let radius = tol * 2f64.powi(t);
        let mut best: Vec<usize> = Vec::new();
        for &leader in &kept {
            let cluster: Vec<usize> = kept
                .iter()
                .copied()
                .filter(|&e| dist[leader * len + e] <= radius)
                .collect();
            if cluster.len() > best.len() {
                best = cluster;
            }
        }
        if best.len() < min_keep {
            return Err(Error::Divergence {
                radius,
                largest: best.len(),
                required: min_keep,
            });
        }
        kept = best;
    }

    let pieces = seq.ids.len();
    let centroid = float_centroid(&motions, &kept, n)?;
    let exact_centroid = if S::EXACT {
        exact_centroid(&motions, &kept, pieces)
    } else {
        None
    };
    let cluster_diameter = match &exact_centroid {
        Some(c) => kept
            .iter()
            .flat_map(|&k| motions[k].iter().zip(c))
            .map(|(m, c)| {
                let m = m.to_exact().expect("exact scalars");
                m.distance_squared(c).expect("same dimension").to_f64().sqrt()
            })
            .fold(0.0, f64::max),
        None => kept
            .iter()
            .flat_map(|&k| motions[k].iter().zip(&centroid))
            .map(|(m, c)| m.to_f64().distance(c).expect("same dimension").value())
            .fold(0.0, f64::max),
    };
    let first = &seq.entries[0];
    let radius_max = seq
        .ids
        .iter()
        .map(|id| first.collection().piece(*id).expect("placed").radius())
        .fold(0.0, f64::max);
    let certified_slack = lipschitz_constant(radius_max, n) * cluster_diameter;

    let kept_entries: Vec<&PackingCertificate<S>> = kept.iter().map(|&k| &seq.entries[k]).collect();
    let limit_target = match &seq.limit_target {
        Some(t) => t.clone(),
        None => infer_limit_target(&kept_entries, n)?,
    };

    let build_exact = |ms: Vec<RigidMotion<Rational>>| -> Result<PackingCertificate<Rational>> {
        PackingCertificate::new(
            first.collection().clone(),
            limit_target.clone(),
            first.mode(),
            seq.ids.iter().copied().zip(ms).map(|(id, m)| Placement::new(id, m)).collect(),
        )
    };

    let rounded = match &exact_centroid {
        Some(c) if cluster_diameter == 0.0 => Some(c.clone()),
        Some(c) => snap_exact(c, cluster_diameter),
        None => snap_float(&centroid, cluster_diameter),
    };
    if let Some(ms) = rounded {
        let cert = build_exact(ms)?;
        let verdict = verify_packing(&cert)?;
        if verdict.is_valid() {
            return Ok(LimitReport {
                kept_indices: kept,
                limit: Certificate::Exact(cert),
                cluster_diameter,
                certified_slack,
                verdict,
                snapped: cluster_diameter > 0.0 || !S::EXACT,
                limit_target,
            });
        }
    }

    let float_motions = centroid
        .into_iter()
        .map(|m| RigidMotion::new(m.theta().to_vec(), m.xi().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let cert = PackingCertificate::new(
        first.collection().clone(),
        limit_target.clone(),
        first.mode(),
        seq.ids
            .iter()
            .copied()
            .zip(float_motions)
            .map(|(id, m)| Placement::new(id, m))
            .collect(),
    )?;
    let verdict = verify_packing(&cert)?;
    Ok(LimitReport {
        kept_indices: kept,
        limit: Certificate::Float(cert),
        cluster_diameter,
        certified_slack,
        verdict,
        snapped: false,
        limit_target,
    })
}

fn float_centroid<S: Scalar>(
    motions: &[Vec<&RigidMotion<S>>],
    kept: &[usize],
    n: usize,
) -> Result<Vec<RigidMotion<f64>>> {
    let pieces = motions[0].len();
    let count = kept.len() as f64;
    (0..pieces)
        .map(|i| {
            let mut theta = vec![0.0; n * n];
            let mut xi = vec![0.0; n];
            for &k in kept {
                let m = motions[k][i];
                for (acc, v) in theta.iter_mut().zip(m.theta()) {
                    *acc += v.to_f64() / count;
                }
                for (acc, v) in xi.iter_mut().zip(m.xi()) {
                    *acc += v.to_f64() / count;
                }
            }
            let theta = project_to_orthogonal(&theta, n)?;
            Ok(RigidMotion::from_parts_unchecked(theta, xi))
        })
        .collect()
}

/// Exact centroid when every piece keeps one rotation across the cluster.
fn exact_centroid<S: Scalar>(
    motions: &[Vec<&RigidMotion<S>>],
    kept: &[usize],
    pieces: usize,
) -> Option<Vec<RigidMotion<Rational>>> {
    let count = Rational::from_integer((kept.len() as i64).into());
    (0..pieces)
        .map(|i| {
            let first = motions[kept[0]][i].to_exact()?;
            let mut xi = vec![Rational::zero(); first.dim()];
            for &k in kept {
                let m = motions[k][i].to_exact()?;
                if m.theta() != first.theta() {
                    return None;
                }
                for (acc, v) in xi.iter_mut().zip(m.xi()) {
                    *acc += v;
                }
            }
            let xi = xi.into_iter().map(|v| v / &count).collect();
            Some(RigidMotion::from_parts_raw(first.theta().to_vec(), xi))
        })
        .collect()
}

/// Simplest rational within `radius` of `c` (at least a relative 1e-12, so
/// floating noise on constant sequences still rounds).
fn snap_value(c: &Rational, radius: f64) -> Rational {
    let floor = 1e-12 * c.to_f64().abs().max(1.0);
    let r = Rational::from_float(radius.max(floor)).expect("finite radius");
    simplest_in_interval(&(c - &r), &(c + &r))
}

fn snap_motion(theta: &[Rational], xi: &[Rational], radius: f64) -> Option<RigidMotion<Rational>> {
    let theta: Vec<Rational> = theta.iter().map(|c| snap_value(c, radius)).collect();
    let xi: Vec<Rational> = xi.iter().map(|c| snap_value(c, radius)).collect();
    RigidMotion::new(theta, xi).ok()
}

fn snap_exact(centroid: &[RigidMotion<Rational>], radius: f64) -> Option<Vec<RigidMotion<Rational>>> {
    centroid
        .iter()
        .map(|m| snap_motion(m.theta(), m.xi(), radius))
        .collect()
}

fn snap_float(centroid: &[RigidMotion<f64>], radius: f64) -> Option<Vec<RigidMotion<Rational>>> {
    centroid
        .iter()
        .map(|m| {
            let theta = m.theta().iter().map(Scalar::to_rational).collect::<Option<Vec<_>>>()?;
            let xi = m.xi().iter().map(Scalar::to_rational).collect::<Option<Vec<_>>>()?;
            snap_motion(&theta, &xi, radius)
        })
        .collect()
}

/// The limit of a shrinking-homothet sequence `(1 + 1/j) C` is `C` itself,
/// provided `C` is bounded; [`TargetSet::homothet_exclusion_index`] is the
/// witness that every point outside `C` eventually drops out.
pub fn limit_target_homothet(base: &TargetSet) -> Result<TargetSet> {
    if !base.is_bounded() {
        return Err(Error::UnboundedTarget);
    }
    Ok(base.clone())
}

fn infer_limit_target<S: Scalar>(entries: &[&PackingCertificate<S>], n: usize) -> Result<TargetSet> {
    let first = entries[0].target();
    if entries.iter().all(|e| e.target() == first) {
        return Ok(first.clone());
    }
    let (base, _) = first.unwrap_homothets();
    if entries.iter().all(|e| e.target().unwrap_homothets().0 == base) {
        return limit_target_homothet(base);
    }
    let bricks: Option<Vec<Vec<Rational>>> = entries
        .iter()
        .map(|e| match e.target() {
            TargetSet::Brick { dims } if dims.len() == n => Some(dims.clone()),
            _ => None,
        })
        .collect();
    if let Some(dims) = bricks {
        let window = dims.len();
        let limit = brick_limit(&dims, window)?;
        return TargetSet::brick(limit.dims);
    }
    Err(Error::InvalidSequence(
        "cannot identify the limit target; declare one".into(),
    ))
}

/// Finite-data estimate of the limiting brick of a sequence of bricks.
#[derive(Clone, Debug, PartialEq)]
pub struct BrickLimit<S> {
    /// Smallest observed volume (the infimum of the data).
    pub volume: S,
    /// Per-coordinate maximum over the last `window` entries of the
    /// monotone-volume subsequence: a tail proxy for `limsup_j b_jm`.
    pub dims: Vec<S>,
    pub window: usize,
    /// Length of the non-increasing-volume subsequence the window is taken
    /// from.
    pub monotone_len: usize,
    /// How much each coordinate estimate dropped from the preceding window
    /// to the final one, when there is a preceding window.
    pub tail_shrink: Option<Vec<S>>,
    /// `prod dims > volume`; the data cannot pin a brick with both the
    /// limsup dimensions and the infimum volume.
    pub product_exceeds_volume: bool,
}

/// Estimates the limsup brick of `dims_seq`.
///
/// Entries whose volume does not exceed every earlier volume form the
/// monotone subsequence; the dimension estimate is the coordinate-wise
/// maximum over its last `window` entries.
pub fn brick_limit<S: Scalar>(dims_seq: &[Vec<S>], window: usize) -> Result<BrickLimit<S>> {
    let first = dims_seq.first().ok_or(Error::EmptyInput)?;
    if window == 0 {
        return Err(Error::InvalidTarget("window must be at least 1".into()));
    }
    let n = first.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for d in dims_seq {
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.len(),
            });
        }
        if d.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidTarget("brick dimensions must be positive".into()));
        }
    }
    let volume_of = |d: &[S]| d.iter().fold(S::one(), |acc, v| acc * v.clone());
    let mut monotone: Vec<&Vec<S>> = Vec::new();
    let mut running: Option<S> = None;
    for d in dims_seq {
        let v = volume_of(d);
        if running.as_ref().is_none_or(|r| v <= *r) {
            running = Some(v);
            monotone.push(d);
        }
    }
    let volume = running.expect("nonempty");
    let w = window.min(monotone.len());
    let window_max = |slice: &[&Vec<S>]| -> Vec<S> {
        (0..n)
            .map(|m| {
                slice
                    .iter()
                    .map(|d| d[m].clone())
                    .reduce(|a, b| max_of(&a, &b))
                    .expect("nonempty window")
            })
            .collect()
    };
    let end = monotone.len();
    let dims = window_max(&monotone[end - w..]);
    let tail_shrink = (end >= 2 * w).then(|| {
        let before = window_max(&monotone[end - 2 * w..end - w]);
        before.into_iter().zip(&dims).map(|(b, d)| b - d.clone()).collect()
    });
    let product_exceeds_volume = volume_of(&dims) > volume;
    Ok(BrickLimit {
        volume,
        dims,
        window: w,
        monotone_len: monotone.len(),
        tail_shrink,
        product_exceeds_volume,
    })
}

/// Tail suprema `d_km = sup_{j >= k} b_jm` for every start index `k`.
pub fn tail_sups<S: Scalar>(dims_seq: &[Vec<S>]) -> Vec<Vec<S>> {
    let mut out: Vec<Vec<S>> = vec![Vec::new(); dims_seq.len()];
    for k in (0..dims_seq.len()).rev() {
        out[k] = match out.get(k + 1).filter(|v| !v.is_empty()) {
            Some(next) => dims_seq[k].iter().zip(next).map(|(a, b)| max_of(a, b)).collect(),
            None => dims_seq[k].clone(),
        };
    }
    out
}

/// Uniform bound `vol B_1 / eta^(n-1)` on every brick dimension once some
/// piece contains an open ball of radius `eta` and volumes are monotone.
pub fn case1_dim_bound(eta: f64, vol_b1: f64, n: usize) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::NonPositiveEpsilon(eta));
    }
    Ok(vol_b1 / eta.powi(n as i32 - 1))
}

/// Keeps `theta` and translates `theta(piece)` just into the nonnegative
/// orthant: `xi'_m = -min_{y in piece} (theta y)_m`.
pub fn orthant_shift<S: Scalar>(sigma: &RigidMotion<S>, piece: &Piece) -> Result<RigidMotion<S>> {
    let n = sigma.dim();
    if piece.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: piece.dim(),
        });
    }
    let dims: Vec<S> = piece.dims().iter().map(S::from_rational).collect();
    let xi = (0..n)
        .map(|m| {
            let low = (0..n).fold(S::zero(), |acc, c| {
                acc + min_of(&S::zero(), &(sigma.theta_at(m, c).clone() * dims[c].clone()))
            });
            -low
        })
        .collect();
    Ok(RigidMotion::from_parts_raw(sigma.theta().to_vec(), xi))
}

/// Coordinate-wise `min(b_m, diam)`.
pub fn clip_brick<S: Scalar>(dims: &[S], diam: &S) -> Result<Vec<S>> {
    if !diam.is_positive() || dims.iter().any(|d| !d.is_positive()) {
        return Err(Error::InvalidTarget("clip_brick needs positive inputs".into()));
    }
    Ok(dims.iter().map(|d| min_of(d, diam)).collect())
}
