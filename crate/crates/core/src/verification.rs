//! Packing certificates and their verification: every placed piece must lie
//! in the target, and the interiors of placed pieces must be pairwise
//! disjoint (shared boundaries are allowed).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::geometry::Aabb;
use crate::motions::{RigidMotion, ORTHOGONALITY_TOLERANCE, ROUNDING_SLACK};
use crate::pieces::{Piece, PieceCollection};
use crate::scalar::{Measure, Rational, Scalar};
use crate::targets::TargetSet;
use crate::{Decision, Error, Result};

/// Which rigid motions a packing may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PackingMode {
    /// Any element of `O(n) x R^n`, reflections included.
    General,
    /// Rotations and translations only (`det theta = +1`).
    Oriented,
    /// Translations only (`theta = I`).
    Translated,
}

impl PackingMode {
    pub fn name(self) -> &'static str {
        match self {
            PackingMode::General => "general",
            PackingMode::Oriented => "oriented",
            PackingMode::Translated => "translated",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(PackingMode::General),
            "oriented" => Ok(PackingMode::Oriented),
            "translated" => Ok(PackingMode::Translated),
            other => Err(Error::Parse(format!("unknown packing mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Placement<S> {
    pub piece_id: usize,
    pub motion: RigidMotion<S>,
}

impl<S> Placement<S> {
    pub fn new(piece_id: usize, motion: RigidMotion<S>) -> Self {
        Placement { piece_id, motion }
    }
}

/// A finite packing claim: where each listed piece goes, into which target,
/// under which motion class. Pieces may be omitted (a partial certificate).
#[derive(Clone, Debug, PartialEq)]
pub struct PackingCertificate<S> {
    collection: PieceCollection,
    target: TargetSet,
    mode: PackingMode,
    placements: Vec<Placement<S>>,
}

impl<S: Scalar> PackingCertificate<S> {
    pub fn new(
        collection: PieceCollection,
        target: TargetSet,
        mode: PackingMode,
        placements: Vec<Placement<S>>,
    ) -> Result<Self> {
        let n = collection.dim();
        target.check_dim(n)?;
        let mut seen = BTreeSet::new();
        for p in &placements {
            if p.motion.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.motion.dim(),
                });
            }
            if collection.piece(p.piece_id).is_none() {
                return Err(Error::InvalidCertificate(format!(
                    "piece {} is not in the collection",
                    p.piece_id
                )));
            }
            if !seen.insert(p.piece_id) {
                return Err(Error::InvalidCertificate(format!(
                    "piece {} placed twice",
                    p.piece_id
                )));
            }
        }
        Ok(PackingCertificate {
            collection,
            target,
            mode,
            placements,
        })
    }

    pub fn collection(&self) -> &PieceCollection {
        &self.collection
    }

    pub fn target(&self) -> &TargetSet {
        &self.target
    }

    pub fn mode(&self) -> PackingMode {
        self.mode
    }

    pub fn placements(&self) -> &[Placement<S>] {
        &self.placements
    }

    pub fn dim(&self) -> usize {
        self.collection.dim()
    }

    pub fn is_partial(&self) -> bool {
        self.placements.len() < self.collection.pieces().len()
    }

    pub fn piece(&self, placement: &Placement<S>) -> &Piece {
        self.collection
            .piece(placement.piece_id)
            .expect("placement ids are checked on construction")
    }

    pub fn with_mode(mut self, mode: PackingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_target(self, target: TargetSet) -> Result<Self> {
        Self::new(self.collection, target, self.mode, self.placements)
    }

    /// Same placements with motions in floating point.
    pub fn to_f64(&self) -> PackingCertificate<f64> {
        PackingCertificate {
            collection: self.collection.clone(),
            target: self.target.clone(),
            mode: self.mode,
            placements: self
                .placements
                .iter()
                .map(|p| Placement::new(p.piece_id, p.motion.to_f64()))
                .collect(),
        }
    }

    /// Exact copy, available when every rotation is a signed permutation.
    pub fn to_exact(&self) -> Option<PackingCertificate<Rational>> {
        let placements = self
            .placements
            .iter()
            .map(|p| p.motion.to_exact().map(|m| Placement::new(p.piece_id, m)))
            .collect::<Option<Vec<_>>>()?;
        Some(PackingCertificate {
            collection: self.collection.clone(),
            target: self.target.clone(),
            mode: self.mode,
            placements,
        })
    }
}

/// A certificate in either arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Exact(PackingCertificate<Rational>),
    Float(PackingCertificate<f64>),
}

macro_rules! each_cert {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            Certificate::Exact($c) => $body,
            Certificate::Float($c) => $body,
        }
    };
}

impl Certificate {
    pub fn verify(&self) -> Result<VerificationReport> {
        each_cert!(self, c => verify_packing(c))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Certificate::Exact(_))
    }

    pub fn collection(&self) -> &PieceCollection {
        each_cert!(self, c => c.collection())
    }

    pub fn target(&self) -> &TargetSet {
        each_cert!(self, c => c.target())
    }

    pub fn mode(&self) -> PackingMode {
        each_cert!(self, c => c.mode())
    }

    pub fn dim(&self) -> usize {
        each_cert!(self, c => c.dim())
    }

    pub fn placement_count(&self) -> usize {
        each_cert!(self, c => c.placements().len())
    }

    pub fn with_mode(self, mode: PackingMode) -> Self {
        match self {
            Certificate::Exact(c) => Certificate::Exact(c.with_mode(mode)),
            Certificate::Float(c) => Certificate::Float(c.with_mode(mode)),
        }
    }

    pub fn to_f64(&self) -> PackingCertificate<f64> {
        each_cert!(self, c => c.to_f64())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// The motion is outside the certificate's motion class.
    Mode { piece: usize },
    /// The placed piece leaves the target; `margin` is the worst signed
    /// vertex margin (negative when it certainly escapes).
    Containment { piece: usize, margin: f64 },
    /// Interiors of two placed pieces meet; `margin` is the best separating
    /// gap found (negative when they certainly overlap).
    Overlap { first: usize, second: usize, margin: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Mode { piece } => write!(f, "mode {piece}"),
            Violation::Containment { piece, margin } => {
                write!(f, "containment {piece} margin={margin:e}")
            }
            Violation::Overlap {
                first,
                second,
                margin,
            } => write!(f, "overlap {first} {second} margin={margin:e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
    Indeterminate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// Placed volume over target volume.
pub type Coverage = Measure;

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub verdict: Verdict,
    /// Certain violations, mode and containment in placement order, then
    /// overlaps in lexicographic piece-id order.
    pub violations: Vec<Violation>,
    /// Checks whose margin fell inside the certified slack.
    pub marginal: Vec<Violation>,
    /// `None` when the target has infinite volume. Overlapping invalid
    /// packings double-count.
    pub coverage: Option<Coverage>,
    /// Largest slack any check relied on (0 when everything was exact).
    pub slack_used: f64,
    /// Some pieces of the collection were not placed.
    pub partial: bool,
    /// Every check was decided in exact arithmetic.
    pub exact: bool,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }
}

/// A placement ready for checking: exact when its rotation allows it.
enum Posed<'a> {
    Exact(RigidMotion<Rational>, &'a Piece),
    Float(RigidMotion<f64>, &'a Piece, f64),
}

impl<'a> Posed<'a> {
    fn new<S: Scalar>(motion: &RigidMotion<S>, piece: &'a Piece) -> Self {
        match motion.to_exact() {
            Some(m) => Posed::Exact(m, piece),
            None => {
                let m = motion.to_f64();
                let slack = m.certified_slack(piece.radius());
                Posed::Float(m, piece, slack)
            }
        }
    }

    fn piece(&self) -> &'a Piece {
        match self {
            Posed::Exact(_, p) | Posed::Float(_, p, _) => p,
        }
    }

    fn slack(&self) -> f64 {
        match self {
            Posed::Exact(..) => 0.0,
            Posed::Float(_, _, s) => *s,
        }
    }

    fn motion_f64(&self) -> RigidMotion<f64> {
        match self {
            Posed::Exact(m, _) => m.to_f64(),
            Posed::Float(m, _, _) => m.clone(),
        }
    }

    fn image_vertices(&self) -> Vec<Vec<f64>> {
        let m = self.motion_f64();
        self.piece()
            .vertices::<f64>()
            .iter()
            .map(|v| m.apply(v).expect("dimension checked"))
            .collect()
    }

    fn aabb(&self) -> Aabb {
        let verts = self.image_vertices();
        Aabb::from_points(verts.iter().map(Vec::as_slice)).expect("at least one vertex")
    }
}

/// Image of an exactly posed brick as per-coordinate closed intervals.
fn exact_box(motion: &RigidMotion<Rational>, piece: &Piece) -> Vec<(Rational, Rational)> {
    let rows = motion
        .permutation_rows()
        .expect("exact motions are signed permutations");
    rows.iter()
        .zip(motion.xi())
        .map(|(&(col, negative), shift)| {
            let d = &piece.dims()[col];
            if negative {
                (shift - d, shift.clone())
            } else {
                (shift.clone(), shift + d)
            }
        })
        .collect()
}

fn pair_separation(a: &Posed<'_>, b: &Posed<'_>) -> Result<(Decision, f64)> {
    if !a.piece().has_interior() || !b.piece().has_interior() {
        return Ok((Decision::Holds, f64::INFINITY));
    }
    if let (Posed::Exact(ma, pa), Posed::Exact(mb, pb)) = (a, b) {
        let ba = exact_box(ma, pa);
        let bb = exact_box(mb, pb);
        let mut disjoint = false;
        let mut margin = f64::NEG_INFINITY;
        for ((lo_a, hi_a), (lo_b, hi_b)) in ba.iter().zip(&bb) {
            disjoint |= hi_a <= lo_b || hi_b <= lo_a;
            let gap = (lo_b - hi_a).max(lo_a - hi_b);
            margin = margin.max(gap.to_f64());
        }
        return Ok((Decision::from_bool(disjoint), margin));
    }
    let n = a.piece().dim();
    let ma = a.motion_f64();
    let mb = b.motion_f64();
    if n > 3 {
        return Err(Error::Unsupported(format!(
            "rotated bricks in dimension {n} (separating axes are implemented for n <= 3)"
        )));
    }
    let column = |m: &RigidMotion<f64>, c: usize| -> Vec<f64> {
        (0..n).map(|r| *m.theta_at(r, c)).collect()
    };
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for c in 0..n {
        axes.push(column(&ma, c));
        axes.push(column(&mb, c));
    }
    if n == 3 {
        for i in 0..3 {
            for j in 0..3 {
                let (u, v) = (column(&ma, i), column(&mb, j));
                let cross = vec![
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                if crate::scalar::norm_f64(&cross) > 1e-9 {
                    axes.push(cross);
                }
            }
        }
    }
    let va = a.image_vertices();
    let vb = b.image_vertices();
    let project = |verts: &[Vec<f64>], axis: &[f64]| {
        verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let t: f64 = v.iter().zip(axis).map(|(x, y)| x * y).sum();
            (lo.min(t), hi.max(t))
        })
    };
    let mut margin = f64::NEG_INFINITY;
    for axis in &axes {
        let len = crate::scalar::norm_f64(axis);
        let (lo_a, hi_a) = project(&va, axis);
        let (lo_b, hi_b) = project(&vb, axis);
        let gap = (lo_b - hi_a).max(lo_a - hi_b) / len;
        margin = margin.max(gap);
    }
    let scale = va.iter().chain(&vb).flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let slack = a.slack() + b.slack() + ROUNDING_SLACK * (1.0 + scale);
    Ok((Decision::from_margin(margin, slack), margin))
}

/// Whether the interiors of `sigma1(piece1)` and `sigma2(piece2)` are
/// disjoint. Touching boundaries count as disjoint. Exact for signed
/// permutation rotations; rotated floating placements use separating axes
/// and report disjoint unless an overlap is certain.
pub fn interiors_disjoint<S: Scalar>(
    sigma1: &RigidMotion<S>,
    piece1: &Piece,
    sigma2: &RigidMotion<S>,
    piece2: &Piece,
) -> Result<bool> {
    let n = piece1.dim();
    for d in [piece2.dim(), sigma1.dim(), sigma2.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d,
            });
        }
    }
    let (decision, _) = pair_separation(&Posed::new(sigma1, piece1), &Posed::new(sigma2, piece2))?;
    Ok(decision != Decision::Fails)
}

fn mode_allows<S: Scalar>(mode: PackingMode, motion: &RigidMotion<S>) -> bool {
    match mode {
        PackingMode::General => true,
        PackingMode::Oriented => motion.determinant_sign() > 0,
        PackingMode::Translated => {
            if S::EXACT {
                motion.is_identity_rotation()
            } else {
                let n = motion.dim();
                (0..n).all(|r| {
                    (0..n).all(|c| {
                        let want = if r == c { 1.0 } else { 0.0 };
                        (motion.theta_at(r, c).to_f64() - want).abs() <= ORTHOGONALITY_TOLERANCE
                    })
                })
            }
        }
    }
}

/// Candidate pairs from a uniform grid whose cell is the median of the
/// placements' largest extents. Placements spanning too many cells are
/// paired with everything instead.
fn broad_phase(boxes: &[(usize, Aabb)]) -> BTreeSet<(usize, usize)> {
    const MAX_CELLS: f64 = 4096.0;
    let mut pairs = BTreeSet::new();
    if boxes.len() < 2 {
        return pairs;
    }
    let mut extents: Vec<f64> = boxes
        .iter()
        .map(|(_, b)| b.extents().into_iter().fold(0.0, f64::max))
        .collect();
    extents.sort_by(f64::total_cmp);
    let cell = extents[extents.len() / 2];
    let mut big = Vec::new();
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (k, (_, b)) in boxes.iter().enumerate() {
        if !(cell > 0.0) {
            big.push(k);
            continue;
        }
        let lo: Vec<i64> = b.lo.iter().map(|x| (x / cell).floor() as i64).collect();
        let hi: Vec<i64> = b.hi.iter().map(|x| (x / cell).floor() as i64).collect();
        let count: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as f64).product();
        if count > MAX_CELLS {
            big.push(k);
            continue;
        }
        let mut idx = lo.clone();
        loop {
            grid.entry(idx.clone()).or_default().push(k);
            let mut m = 0;
            while m < idx.len() {
                if idx[m] < hi[m] {
                    idx[m] += 1;
                    break;
                }
                idx[m] = lo[m];
                m += 1;
            }
            if m == idx.len() {
                break;
            }
        }
    }
    for members in grid.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    for &i in &big {
        for j in 0..boxes.len() {
            if i != j {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    pairs.retain(|&(i, j)| boxes[i].1.intersects(&boxes[j].1));
    pairs
}

/// Checks motion class, containment of every placed piece, and pairwise
/// interior disjointness.
///
/// Placements whose rotation is a signed permutation are checked in exact
/// rational arithmetic, including floating certificates whose entries are
/// exactly representable. Others are checked in floating point and only
/// certified when their margins clear the Lipschitz slack; otherwise the
/// check is recorded as marginal and the verdict is indeterminate.
pub fn verify_packing<S: Scalar>(cert: &PackingCertificate<S>) -> Result<VerificationReport> {
    let n = cert.dim();
    let target = cert.target();
    let mut violations = Vec::new();
    let mut marginal = Vec::new();
    let mut slack_used = 0.0f64;

    let posed: Vec<Posed<'_>> = cert
        .placements()
        .iter()
        .map(|p| Posed::new(&p.motion, cert.piece(p)))
        .collect();
    let exact = posed.iter().all(|p| matches!(p, Posed::Exact(..)));
    if !exact && n > 3 {
        return Err(Error::Unsupported(format!(
            "rotated bricks in dimension {n} (separating axes are implemented for n <= 3)"
        )));
    }

    for p in cert.placements() {
        if !mode_allows(cert.mode(), &p.motion) {
            violations.push(Violation::Mode { piece: p.piece_id });
        }
    }

    for (p, pose) in cert.placements().iter().zip(&posed) {
        let (decision, margin) = match pose {
            Posed::Exact(m, piece) => target.containment(m, piece)?,
            Posed::Float(m, piece, slack) => {
                slack_used = slack_used.max(*slack);
                target.containment(m, piece)?
            }
        };
        let v = Violation::Containment {
            piece: p.piece_id,
            margin,
        };
        match decision {
            Decision::Holds => {}
            Decision::Fails => violations.push(v),
            Decision::Indeterminate => marginal.push(v),
        }
    }

    let boxes: Vec<(usize, Aabb)> = posed
        .iter()
        .enumerate()
        .filter(|(_, p)| p.piece().has_interior())
        .map(|(k, p)| {
            let b = p.aabb();
            let scale = b.lo.iter().chain(&b.hi).fold(1.0f64, |m, x| m.max(x.abs()));
            (k, b.inflate(p.slack() + 1e-9 * scale))
        })
        .collect();
    let mut overlaps = Vec::new();
    for (i, j) in broad_phase(&boxes) {
        let (a, b) = (boxes[i].0, boxes[j].0);
        let (decision, margin) = pair_separation(&posed[a], &posed[b])?;
        slack_used = slack_used.max(posed[a].slack() + posed[b].slack());
        let (ia, ib) = (cert.placements()[a].piece_id, cert.placements()[b].piece_id);
        let v = Violation::Overlap {
            first: ia.min(ib),
            second: ia.max(ib),
            margin,
        };
        match decision {
            Decision::Holds => {}
            Decision::Fails => overlaps.push(v),
            Decision::Indeterminate => marginal.push(v),
        }
    }
    let pair_key = |v: &Violation| match v {
        Violation::Overlap { first, second, .. } => (*first, *second),
        _ => (0, 0),
    };
    overlaps.sort_by_key(pair_key);
    violations.extend(overlaps);

    let verdict = if !violations.is_empty() {
        Verdict::Invalid
    } else if !marginal.is_empty() {
        Verdict::Indeterminate
    } else {
        Verdict::Valid
    };

    let placed: Rational = cert
        .placements()
        .iter()
        .map(|p| cert.piece(p).volume())
        .sum();
    let coverage = target.volume(n).map(|v| match v {
        Measure::Exact(v) => Measure::Exact(placed / v),
        Measure::Approx(v) => Measure::Approx(placed.to_f64() / v),
    });

    Ok(VerificationReport {
        verdict,
        violations,
        marginal,
        coverage,
        slack_used,
        partial: cert.is_partial(),
        exact,
    })
}

/// A valid packing of bricks whose volumes add up to the target's volume.
/// Interiors being disjoint, volume equality means the union is the target
/// up to a null set, and both sets are closed.
pub fn is_tiling(report: &VerificationReport) -> Result<bool> {
    let coverage = report.coverage.as_ref().ok_or(Error::UnboundedTarget)?;
    let full = match coverage {
        Measure::Exact(r) => r.is_one(),
        Measure::Approx(v) => (v - 1.0).abs() <= 1e-12,
    };
    Ok(report.is_valid() && full)
}

/// Total volume of the placed pieces.
pub fn placed_volume<S: Scalar>(cert: &PackingCertificate<S>) -> Rational {
    cert.placements()
        .iter()
        .fold(Rational::zero(), |acc, p| acc + cert.piece(p).volume())
}
