//! Reference packing sequences used by tests, the acceptance suite and the
//! `fixture` CLI subcommand.

use crate::motions::RigidMotion;
use crate::pieces::PieceCollection;
use crate::scalar::{integer, Rational};
use crate::targets::TargetSet;
use crate::verification::{PackingCertificate, PackingMode, Placement};

fn four_unit_squares() -> PieceCollection {
    PieceCollection::custom(vec![vec![integer(1), integer(1)]; 4]).expect("valid squares")
}

fn square_target() -> TargetSet {
    TargetSet::brick(vec![integer(2), integer(2)]).expect("valid brick")
}

fn spread_squares<S: crate::Scalar>(
    offset: S,
    target: TargetSet,
) -> PackingCertificate<S> {
    let far = S::one() + offset;
    let corners = [
        [S::zero(), S::zero()],
        [far.clone(), S::zero()],
        [S::zero(), far.clone()],
        [far.clone(), far],
    ];
    let placements = corners
        .into_iter()
        .enumerate()
        .map(|(k, xi)| Placement::new(k + 1, RigidMotion::translation(xi.to_vec())))
        .collect();
    PackingCertificate::new(four_unit_squares(), target, PackingMode::Translated, placements)
        .expect("well-formed fixture")
}

/// Four unit squares tiling `[0, 2]^2`.
pub fn two_by_two_tiling() -> PackingCertificate<Rational> {
    spread_squares(integer(0), square_target())
}

/// Exact sequence `j = 1..=count`: four unit squares in `(1 + 1/j) [0, 2]^2`,
/// pushed apart by `1/j` for `j <= count / 2` and tiling `[0, 2]^2` after.
pub fn shrinking_homothet_exact(count: usize) -> Vec<PackingCertificate<Rational>> {
    (1..=count)
        .map(|j| {
            let step = Rational::new(1.into(), (j as i64).into());
            let target = TargetSet::homothet(square_target(), integer(1) + &step)
                .expect("positive factor");
            let offset = if 2 * j <= count { step } else { integer(0) };
            spread_squares(offset, target)
        })
        .collect()
}

/// Floating-point sequence along `j = 2^t`, `t = 1..=count`: four unit
/// squares in `(1 + 2^-t) [0, 2]^2`, pushed apart by `2^-t`.
pub fn shrinking_homothet_float(count: usize) -> Vec<PackingCertificate<f64>> {
    (1..=count)
        .map(|t| {
            let step = 2f64.powi(-(t as i32));
            let lambda = Rational::from_float(1.0 + step).expect("finite");
            let target = TargetSet::homothet(square_target(), lambda).expect("positive factor");
            spread_squares(step, target)
        })
        .collect()
}

/// A unit square in the homothets `(1 + 1/j) F` of the funnel, placed just
/// far enough out to fit: it escapes to infinity as `j` grows.
pub fn funnel_escape(count: usize) -> Vec<PackingCertificate<Rational>> {
    let collection =
        PieceCollection::custom(vec![vec![integer(1), integer(1)]]).expect("valid square");
    (1..=count)
        .map(|j| {
            let eps = Rational::new(1.into(), (j as i64).into());
            let lambda = integer(1) + &eps;
            let x = &lambda * &lambda / &eps + integer(1);
            let target = TargetSet::homothet(TargetSet::funnel(), lambda).expect("positive factor");
            PackingCertificate::new(
                collection.clone(),
                target,
                PackingMode::Translated,
                vec![Placement::new(1, RigidMotion::translation(vec![x, integer(0)]))],
            )
            .expect("well-formed fixture")
        })
        .collect()
}
