//! Rigid motions `sigma = (theta, xi)` of `R^n`, acting by `x -> xi + theta x`.
//!
//! Matrices are stored row-major as flat `n*n` vectors; that ordering is also
//! the order in which certificate files list `theta`.

use nalgebra::DMatrix;

use crate::scalar::{norm_f64, Scalar};
use crate::{Error, Result};

/// Maximum entry of `|theta^T theta - I|` accepted for floating motions.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// Relative rounding allowance folded into every floating slack.
pub const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RigidMotion<S> {
    theta: Vec<S>,
    xi: Vec<S>,
}

/// Distance `(|theta' - theta|_F^2 + |xi' - xi|^2)^(1/2)` between two motions.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct MotionDistance(f64);

impl MotionDistance {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl<S: Scalar> RigidMotion<S> {
    /// Builds a motion after checking shape and orthogonality.
    ///
    /// Exact scalars must form a signed permutation matrix; floating ones
    /// must be orthogonal to within [`ORTHOGONALITY_TOLERANCE`].
    pub fn new(theta: Vec<S>, xi: Vec<S>) -> Result<Self> {
        let n = xi.len();
        if n == 0 {
            return Err(Error::InvalidMotion("dimension must be positive".into()));
        }
        check_dim(n * n, theta.len())?;
        let motion = RigidMotion { theta, xi };
        if S::EXACT {
            if !motion.is_signed_permutation() {
                return Err(Error::InvalidMotion(
                    "exact motions require a signed permutation matrix".into(),
                ));
            }
        } else {
            if motion.theta.iter().chain(&motion.xi).any(|v| !v.to_f64().is_finite()) {
                return Err(Error::InvalidMotion("non-finite entry".into()));
            }
            let defect = motion.orthogonality_defect();
            if defect > ORTHOGONALITY_TOLERANCE {
                return Err(Error::InvalidMotion(format!(
                    "theta is not orthogonal (defect {defect:e})"
                )));
            }
        }
        Ok(motion)
    }

    pub fn identity(n: usize) -> Self {
        Self::translation(vec![S::zero(); n])
    }

    pub fn translation(xi: Vec<S>) -> Self {
        let n = xi.len();
        let mut theta = vec![S::zero(); n * n];
        for i in 0..n {
            theta[i * n + i] = S::one();
        }
        RigidMotion { theta, xi }
    }

    /// Planar rotation by `quarter_turns * 90` degrees (counter-clockwise).
    pub fn quarter_turn(quarter_turns: i32, xi: [S; 2]) -> Self {
        let (c, s) = match quarter_turns.rem_euclid(4) {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        let theta = vec![
            S::from_i64(c),
            S::from_i64(-s),
            S::from_i64(s),
            S::from_i64(c),
        ];
        RigidMotion {
            theta,
            xi: xi.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn theta(&self) -> &[S] {
        &self.theta
    }

    pub fn xi(&self) -> &[S] {
        &self.xi
    }

    pub fn theta_at(&self, row: usize, col: usize) -> &S {
        &self.theta[row * self.dim() + col]
    }

    /// `theta x` without the translation.
    pub fn rotate(&self, x: &[S]) -> Result<Vec<S>> {
        let n = self.dim();
        check_dim(n, x.len())?;
        Ok((0..n)
            .map(|r| {
                self.theta[r * n..(r + 1) * n]
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// `sigma(x) = xi + theta x`.
    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        let mut y = self.rotate(x)?;
        for (yi, xi) in y.iter_mut().zip(&self.xi) {
            *yi = yi.clone() + xi.clone();
        }
        Ok(y)
    }

    /// `(theta^-1, -theta^-1 xi)`, using `theta^-1 = theta^T`.
    pub fn invert(&self) -> Self {
        let n = self.dim();
        let mut theta = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                theta.push(self.theta[c * n + r].clone());
            }
        }
        let inv = RigidMotion {
            theta,
            xi: vec![S::zero(); n],
        };
        let back = inv.rotate(&self.xi).expect("same dimension");
        RigidMotion {
            xi: back.into_iter().map(|v| -v).collect(),
            ..inv
        }
    }

    /// `self ∘ other`, i.e. `x -> self(other(x))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let n = self.dim();
        check_dim(n, other.dim())?;
        let mut theta = vec![S::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                theta[r * n + c] = (0..n).fold(S::zero(), |acc, k| {
                    acc + self.theta[r * n + k].clone() * other.theta[k * n + c].clone()
                });
            }
        }
        let xi = self.apply(&other.xi)?;
        let mut composed = RigidMotion { theta, xi };
        if !S::EXACT && composed.orthogonality_defect() > ORTHOGONALITY_TOLERANCE {
            let theta_f: Vec<f64> = composed.theta.iter().map(Scalar::to_f64).collect();
            let projected = project_to_orthogonal(&theta_f, n)?;
            composed.theta = projected
                .iter()
                .map(|v| S::from_rational(&crate::Rational::from_float(*v).expect("finite")))
                .collect();
        }
        Ok(composed)
    }

    /// Squared distance, exact for exact scalars.
    pub fn distance_squared(&self, other: &Self) -> Result<S> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .theta
            .iter()
            .zip(&other.theta)
            .chain(self.xi.iter().zip(&other.xi))
            .fold(S::zero(), |acc, (a, b)| {
                let d = a.clone() - b.clone();
                acc + d.clone() * d
            }))
    }

    pub fn distance(&self, other: &Self) -> Result<MotionDistance> {
        Ok(MotionDistance(self.distance_squared(other)?.to_f64().sqrt()))
    }

    /// Exactly a signed permutation matrix (entries in {0, 1, -1}, one
    /// nonzero per row and column).
    pub fn is_signed_permutation(&self) -> bool {
        let n = self.dim();
        let one = S::one();
        let minus_one = -S::one();
        let mut col_used = vec![false; n];
        for r in 0..n {
            let mut found = false;
            for c in 0..n {
                let v = &self.theta[r * n + c];
                if v.is_zero() {
                    continue;
                }
                if (*v != one && *v != minus_one) || found || col_used[c] {
                    return false;
                }
                found = true;
                col_used[c] = true;
            }
            if !found {
                return false;
            }
        }
        true
    }

    pub fn is_identity_rotation(&self) -> bool {
        let n = self.dim();
        (0..n).all(|r| {
            (0..n).all(|c| {
                let v = &self.theta[r * n + c];
                if r == c {
                    v.is_one()
                } else {
                    v.is_zero()
                }
            })
        })
    }

    /// For a signed permutation, `(column, negative)` of each row's nonzero.
    pub fn permutation_rows(&self) -> Option<Vec<(usize, bool)>> {
        if !self.is_signed_permutation() {
            return None;
        }
        let n = self.dim();
        Some(
            (0..n)
                .map(|r| {
                    let c = (0..n)
                        .find(|&c| !self.theta[r * n + c].is_zero())
                        .expect("signed permutation row");
                    (c, self.theta[r * n + c].is_negative())
                })
                .collect(),
        )
    }

    /// Sign of `det theta`: exact for signed permutations, otherwise from a
    /// floating LU factorisation.
    pub fn determinant_sign(&self) -> i32 {
        if let Some(rows) = self.permutation_rows() {
            let mut sign = 1;
            let mut perm: Vec<usize> = rows.iter().map(|(c, _)| *c).collect();
            for (_, neg) in &rows {
                if *neg {
                    sign = -sign;
                }
            }
            for i in 0..perm.len() {
                while perm[i] != i {
                    let j = perm[i];
                    perm.swap(i, j);
                    sign = -sign;
                }
            }
            return sign;
        }
        let n = self.dim();
        let m = DMatrix::from_row_iterator(n, n, self.theta.iter().map(Scalar::to_f64));
        if m.determinant() >= 0.0 {
            1
        } else {
            -1
        }
    }

    /// `max |theta^T theta - I|` in floating point.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        let t: Vec<f64> = self.theta.iter().map(Scalar::to_f64).collect();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|k| t[k * n + a] * t[k * n + b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn to_f64(&self) -> RigidMotion<f64> {
        RigidMotion {
            theta: self.theta.iter().map(Scalar::to_f64).collect(),
            xi: self.xi.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Exact copy when every entry is finite and `theta` is a signed
    /// permutation, so the motion is representable in exact mode.
    pub fn to_exact(&self) -> Option<RigidMotion<crate::Rational>> {
        if !self.is_signed_permutation() {
            return None;
        }
        let theta = self
            .theta
            .iter()
            .map(Scalar::to_rational)
            .collect::<Option<Vec<_>>>()?;
        let xi = self
            .xi
            .iter()
            .map(Scalar::to_rational)
            .collect::<Option<Vec<_>>>()?;
        Some(RigidMotion { theta, xi })
    }

    /// Distance from this motion to the nearest element of `O(n) x R^n`
    /// sharing its translation. Zero for exact motions.
    pub fn projection_error(&self) -> f64 {
        if S::EXACT || self.is_signed_permutation() {
            return 0.0;
        }
        let n = self.dim();
        let t: Vec<f64> = self.theta.iter().map(Scalar::to_f64).collect();
        match project_to_orthogonal(&t, n) {
            Ok(p) => t
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Certified displacement bound for points of norm at most `radius`:
    /// the Lipschitz bound applied to the projection error, plus rounding.
    pub fn certified_slack(&self, radius: f64) -> f64 {
        if S::EXACT {
            return 0.0;
        }
        let scale = 1.0 + radius + norm_f64(&self.xi.iter().map(Scalar::to_f64).collect::<Vec<_>>());
        lipschitz_constant(radius, self.dim()) * self.projection_error() + ROUNDING_SLACK * scale
    }
}

impl RigidMotion<f64> {
    /// Planar rotation by `angle` radians followed by translation `xi`.
    pub fn rotation_2d(angle: f64, xi: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        RigidMotion {
            theta: vec![c, -s, s, c],
            xi: xi.to_vec(),
        }
    }

    /// Builds a floating motion without the orthogonality check; used for
    /// centroids that are re-projected immediately afterwards.
    pub(crate) fn from_parts_unchecked(theta: Vec<f64>, xi: Vec<f64>) -> Self {
        RigidMotion { theta, xi }
    }
}

impl<S> RigidMotion<S> {
    pub(crate) fn from_parts_raw(theta: Vec<S>, xi: Vec<S>) -> Self {
        RigidMotion { theta, xi }
    }
}

/// `n^(3/2) |y| + 1`: how far `sigma(y)` can move per unit of motion distance.
pub fn lipschitz_constant(y_norm: f64, n: usize) -> f64 {
    (n as f64).powf(1.5) * y_norm + 1.0
}

/// Radius of a motion-space ball around `sigma` inside which `sigma(y)` moves
/// by less than `epsilon`.
pub fn delta_for_point(epsilon: f64, y_norm: f64, n: usize) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    Ok(epsilon / lipschitz_constant(y_norm, n))
}

/// Joint radius for two motions carrying points `y1`, `y2` to a common
/// point: `epsilon / (n^(3/2) max(|y1|, |y2|) + 1)`.
pub fn delta_for_pair(epsilon: f64, y1_norm: f64, y2_norm: f64, n: usize) -> Result<f64> {
    delta_for_point(epsilon, y1_norm.max(y2_norm), n)
}

/// Orthogonal polar factor `U V^T` of a nonsingular row-major `n x n`
/// matrix: the nearest orthogonal matrix in Frobenius norm.
pub fn project_to_orthogonal(m: &[f64], n: usize) -> Result<Vec<f64>> {
    check_dim(n * n, m.len())?;
    let a = DMatrix::from_row_slice(n, n, m);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax.max(f64::MIN_POSITIVE)) {
        return Err(Error::Singular);
    }
    let u = svd.u.ok_or(Error::Singular)?;
    let v_t = svd.v_t.ok_or(Error::Singular)?;
    let q = u * v_t;
    Ok((0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| q[(r, c)])
        .collect())
}
