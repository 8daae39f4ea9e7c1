//! Verification, search and limit extraction for packings of infinite piece
//! collections into compact targets.
//!
//! The crate works at finite truncation: a collection such as Moser's
//! rectangles `1/i x 1/(i+1)` is cut off at `N` pieces, packings are finite
//! lists of rigid motions, and limits of packing sequences are taken by
//! clustering in motion space.
//!
//! Arithmetic comes in two flavours selected through [`Scalar`]:
//! [`Rational`] (exact, rotations restricted to signed permutations) and
//! `f64` (arbitrary rotations, verdicts certified against a slack).

mod error;
pub mod fixtures;
pub mod geometry;
pub mod limit;
pub mod motions;
pub mod packers;
pub mod pieces;
pub mod scalar;
pub mod targets;
pub mod verification;

pub use error::{Error, Result};
pub use geometry::Aabb;
pub use limit::{
    brick_limit, case1_dim_bound, clip_brick, extract_convergent_subsequence,
    limit_target_homothet, orthant_shift, BrickLimit, LimitReport, PackingSequence,
};
pub use motions::{
    delta_for_pair, delta_for_point, lipschitz_constant, project_to_orthogonal, MotionDistance,
    RigidMotion,
};
pub use packers::{
    pack_moser_rectangles, pack_moser_squares, shrink_search, FreeGapList, ShrinkOutcome,
};
pub use pieces::{collection_area, moser_piece, CollectionKind, Piece, PieceCollection};
pub use scalar::{Rational, Scalar};
pub use targets::{Clearance, ExclusionIndex, TargetSet};
pub use verification::{
    interiors_disjoint, is_tiling, verify_packing, Certificate, Coverage, PackingCertificate,
    PackingMode, Placement, Verdict, VerificationReport, Violation,
};

/// Outcome of a predicate evaluated with certified floating point.
///
/// Exact arithmetic only ever produces `Holds` or `Fails`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Holds,
    Fails,
    Indeterminate,
}

impl Decision {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Decision::Holds
        } else {
            Decision::Fails
        }
    }

    /// Three-way comparison of a margin against a symmetric slack band.
    pub fn from_margin(margin: f64, slack: f64) -> Self {
        if margin > slack {
            Decision::Holds
        } else if margin < -slack {
            Decision::Fails
        } else {
            Decision::Indeterminate
        }
    }

    pub fn holds(self) -> bool {
        self == Decision::Holds
    }
}
