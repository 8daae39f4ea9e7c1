//! Closed convex target sets: bricks anchored at the origin, centred balls,
//! homothets about the origin, and the unbounded funnel
//! `{(x, y) : 1 <= x, |y| <= 1 - 1/x}`.

use num_traits::{One, Signed, Zero};

use crate::geometry::Aabb;
use crate::motions::RigidMotion;
use crate::pieces::Piece;
use crate::scalar::{norm_f64, Measure, Rational, Scalar};
use crate::{Decision, Error, Result};

/// Accuracy of the one-dimensional minimisation behind funnel distances.
pub const FUNNEL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum TargetSet {
    /// `[0, d_1] x ... x [0, d_n]`.
    Brick { dims: Vec<Rational> },
    /// Closed ball of the given radius centred at the origin, in whatever
    /// dimension the certificate uses.
    Ball { radius: Rational },
    /// `lambda * base`.
    Homothet {
        base: Box<TargetSet>,
        lambda: Rational,
    },
    /// Planar region `{(x, y) : 1 <= x, |y| <= 1 - 1/x}`.
    Funnel,
}

/// Distance from a point to a target. `inside` is set (with distance 0) when
/// the point belongs to the target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Clearance {
    pub distance: f64,
    pub inside: bool,
}

/// Index `k = floor(2|x| / eps) + 1` past which the `eps/2` ball around `x`
/// misses every homothet `(1 + 1/j) C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExclusionIndex {
    pub k: u64,
    pub epsilon: f64,
}

impl TargetSet {
    pub fn brick(dims: Vec<Rational>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|d| !d.is_positive()) {
            return Err(Error::InvalidTarget("brick dimensions must be positive".into()));
        }
        Ok(TargetSet::Brick { dims })
    }

    pub fn ball(radius: Rational) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::InvalidTarget("ball radius must be positive".into()));
        }
        Ok(TargetSet::Ball { radius })
    }

    pub fn homothet(base: TargetSet, lambda: Rational) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::InvalidTarget("homothet factor must be positive".into()));
        }
        Ok(TargetSet::Homothet {
            base: Box::new(base),
            lambda,
        })
    }

    pub fn funnel() -> Self {
        TargetSet::Funnel
    }

    pub fn shape_name(&self) -> &'static str {
        match self {
            TargetSet::Brick { .. } => "brick",
            TargetSet::Ball { .. } => "ball",
            TargetSet::Homothet { .. } => "homothet",
            TargetSet::Funnel => "funnel",
        }
    }

    /// Dimension the shape forces, if any (balls adapt to the certificate).
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            TargetSet::Brick { dims } => Some(dims.len()),
            TargetSet::Ball { .. } => None,
            TargetSet::Homothet { base, .. } => base.fixed_dim(),
            TargetSet::Funnel => Some(2),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.fixed_dim() {
            Some(d) if d != n => Err(Error::DimensionMismatch {
                expected: d,
                found: n,
            }),
            _ => Ok(()),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            TargetSet::Homothet { base, .. } => base.is_bounded(),
            TargetSet::Funnel => false,
            _ => true,
        }
    }

    /// Undoes nested homothets: `(base, total factor)`.
    pub fn unwrap_homothets(&self) -> (&TargetSet, Rational) {
        match self {
            TargetSet::Homothet { base, lambda } => {
                let (inner, factor) = base.unwrap_homothets();
                (inner, factor * lambda)
            }
            other => (other, Rational::one()),
        }
    }

    pub fn bounding_box(&self, n: usize) -> Option<Aabb> {
        match self {
            TargetSet::Brick { dims } => Some(Aabb::new(
                vec![0.0; dims.len()],
                dims.iter().map(Scalar::to_f64).collect(),
            )),
            TargetSet::Ball { radius } => {
                let r = radius.to_f64();
                Some(Aabb::new(vec![-r; n], vec![r; n]))
            }
            TargetSet::Homothet { base, lambda } => {
                let l = lambda.to_f64();
                base.bounding_box(n).map(|b| {
                    Aabb::new(
                        b.lo.iter().map(|x| x * l).collect(),
                        b.hi.iter().map(|x| x * l).collect(),
                    )
                })
            }
            TargetSet::Funnel => None,
        }
    }

    /// Lebesgue measure in dimension `n`: exact for bricks and their
    /// homothets, approximate for balls, `None` when infinite.
    pub fn volume(&self, n: usize) -> Option<Measure> {
        match self {
            TargetSet::Brick { dims } => Some(Measure::Exact(
                dims.iter().fold(Rational::one(), |acc, d| acc * d),
            )),
            TargetSet::Ball { radius } => Some(Measure::Approx(
                unit_ball_volume(n) * radius.to_f64().powi(n as i32),
            )),
            TargetSet::Homothet { base, lambda } => {
                let scale = num_traits::pow(lambda.clone(), n);
                base.volume(n).map(|v| match v {
                    Measure::Exact(v) => Measure::Exact(v * scale),
                    Measure::Approx(v) => Measure::Approx(v * scale.to_f64()),
                })
            }
            TargetSet::Funnel => None,
        }
    }

    /// Closed-set membership, exact for exact scalars.
    pub fn membership<S: Scalar>(&self, x: &[S]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.member_unchecked(x))
    }

    fn member_unchecked<S: Scalar>(&self, x: &[S]) -> bool {
        match self {
            TargetSet::Brick { dims } => x.iter().zip(dims).all(|(v, d)| {
                !v.is_negative() && *v <= S::from_rational(d)
            }),
            TargetSet::Ball { radius } => {
                let r = S::from_rational(radius);
                let sq = x.iter().fold(S::zero(), |acc, v| acc + v.clone() * v.clone());
                sq <= r.clone() * r
            }
            TargetSet::Homothet { base, lambda } => {
                let l = S::from_rational(lambda);
                let scaled: Vec<S> = x.iter().map(|v| v.clone() / l.clone()).collect();
                base.member_unchecked(&scaled)
            }
            TargetSet::Funnel => {
                let (px, py) = (&x[0], &x[1]);
                *px >= S::one() && py.abs() <= S::one() - S::one() / px.clone()
            }
        }
    }

    /// Distance from `x` to the target (0 and `inside` when `x` belongs).
    pub fn clearance(&self, x: &[f64]) -> Result<Clearance> {
        self.check_dim(x.len())?;
        if self.member_unchecked(x) {
            return Ok(Clearance {
                distance: 0.0,
                inside: true,
            });
        }
        Ok(Clearance {
            distance: self.outside_distance(x),
            inside: false,
        })
    }

    fn outside_distance(&self, x: &[f64]) -> f64 {
        match self {
            TargetSet::Brick { dims } => {
                let gaps: Vec<f64> = x
                    .iter()
                    .zip(dims)
                    .map(|(v, d)| (-v).max(v - d.to_f64()).max(0.0))
                    .collect();
                norm_f64(&gaps)
            }
            TargetSet::Ball { radius } => (norm_f64(x) - radius.to_f64()).max(0.0),
            TargetSet::Homothet { base, lambda } => {
                let l = lambda.to_f64();
                let scaled: Vec<f64> = x.iter().map(|v| v / l).collect();
                l * base.outside_distance(&scaled)
            }
            TargetSet::Funnel => funnel_distance(x[0], x[1]),
        }
    }

    /// Signed margin: a lower bound on the distance to the complement for
    /// interior points, minus the clearance for exterior ones.
    pub fn signed_margin(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.signed_margin_unchecked(x))
    }

    fn signed_margin_unchecked(&self, x: &[f64]) -> f64 {
        if !self.member_unchecked(x) {
            return -self.outside_distance(x);
        }
        match self {
            TargetSet::Brick { dims } => x
                .iter()
                .zip(dims)
                .map(|(v, d)| v.min(d.to_f64() - v))
                .fold(f64::INFINITY, f64::min),
            TargetSet::Ball { radius } => radius.to_f64() - norm_f64(x),
            TargetSet::Homothet { base, lambda } => {
                let l = lambda.to_f64();
                let scaled: Vec<f64> = x.iter().map(|v| v / l).collect();
                l * base.signed_margin_unchecked(&scaled)
            }
            TargetSet::Funnel => {
                // The boundary curves have slope at most 1 for x >= 1, so the
                // vertical gap over sqrt(2) bounds the distance from below.
                let gap = 1.0 - 1.0 / x[0] - x[1].abs();
                (x[0] - 1.0).min(gap / std::f64::consts::SQRT_2)
            }
        }
    }

    fn has_funnel(&self) -> bool {
        match self {
            TargetSet::Homothet { base, .. } => base.has_funnel(),
            TargetSet::Funnel => true,
            _ => false,
        }
    }

    /// Whether `sigma(piece)` lies in the target. Both sets are convex, so
    /// checking the vertices of the image decides it.
    ///
    /// Exact motions (including floating ones whose `theta` is a signed
    /// permutation) give a decisive answer; rotated floating motions are
    /// compared against their certified slack.
    pub fn contains_piece<S: Scalar>(&self, sigma: &RigidMotion<S>, piece: &Piece) -> Result<Decision> {
        Ok(self.containment(sigma, piece)?.0)
    }

    /// Decision together with the worst vertex margin.
    pub(crate) fn containment<S: Scalar>(
        &self,
        sigma: &RigidMotion<S>,
        piece: &Piece,
    ) -> Result<(Decision, f64)> {
        let n = sigma.dim();
        if piece.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: piece.dim(),
            });
        }
        self.check_dim(n)?;
        if let Some(exact) = sigma.to_exact() {
            let mut inside = true;
            let mut margin = f64::INFINITY;
            for v in piece.vertices::<Rational>() {
                let image = exact.apply(&v)?;
                inside &= self.member_unchecked(&image);
                let image_f: Vec<f64> = image.iter().map(Scalar::to_f64).collect();
                margin = margin.min(self.signed_margin_unchecked(&image_f));
            }
            return Ok((Decision::from_bool(inside), margin));
        }
        let sigma_f = sigma.to_f64();
        let margin = piece
            .vertices::<f64>()
            .iter()
            .map(|v| sigma_f.apply(v).map(|p| self.signed_margin_unchecked(&p)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let mut slack = sigma_f.certified_slack(piece.radius());
        if self.has_funnel() {
            slack += FUNNEL_TOLERANCE * (1.0 + margin.abs());
        }
        Ok((Decision::from_margin(margin, slack), margin))
    }

    /// Witness that `x` is eventually excluded from the homothets
    /// `(1 + 1/j) C`: for every `j >= k` the open ball of radius `eps/2`
    /// about `x` misses `(1 + 1/j) C`, where `eps` is the clearance.
    pub fn homothet_exclusion_index(&self, x: &[f64]) -> Result<ExclusionIndex> {
        if !self.is_bounded() {
            return Err(Error::UnboundedTarget);
        }
        let c = self.clearance(x)?;
        if c.inside || c.distance <= 0.0 {
            return Err(Error::PointInsideTarget);
        }
        let ratio = 2.0 * norm_f64(x) / c.distance;
        Ok(ExclusionIndex {
            k: ratio.floor() as u64 + 1,
            epsilon: c.distance,
        })
    }
}

/// Volume of the unit ball in `R^n` via `V_n = 2 pi / n * V_(n-2)`.
fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Distance from an exterior point to the funnel, minimising the squared
/// distance to the boundary curve `t -> (t, 1 - 1/t)`, `t >= 1`.
fn funnel_distance(px: f64, py: f64) -> f64 {
    let py = py.abs();
    let f = |t: f64| {
        let dy = 1.0 - 1.0 / t - py;
        (t - px) * (t - px) + dy * dy
    };
    // The nearest boundary point is no farther than the vertex (1, 0).
    let reach = ((px - 1.0).powi(2) + py * py).sqrt();
    let hi = px.max(1.0) + reach + 1.0;
    const SAMPLES: usize = 256;
    let step = (hi - 1.0) / SAMPLES as f64;
    let best = (0..=SAMPLES)
        .min_by(|&a, &b| f(1.0 + a as f64 * step).total_cmp(&f(1.0 + b as f64 * step)))
        .unwrap_or(0);
    let mut a = (1.0 + (best as f64 - 1.0) * step).max(1.0);
    let mut b = (1.0 + (best as f64 + 1.0) * step).min(hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    while b - a > FUNNEL_TOLERANCE * (1.0 + a) {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
        if c >= d {
            break;
        }
    }
    let t = 0.5 * (a + b);
    f(t).min(f(1.0)).sqrt()
}

impl Measure {
    pub fn is_zero(&self) -> bool {
        match self {
            Measure::Exact(v) => v.is_zero(),
            Measure::Approx(v) => *v == 0.0,
        }
    }
}
