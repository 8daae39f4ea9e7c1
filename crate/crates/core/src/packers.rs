//! Deterministic guillotine packer for planar brick collections, used to
//! produce exact parallel packings of the Moser rectangles and squares.
//!
//! Pieces go in order of decreasing area (ties by id). Each piece takes the
//! free gap with the least leftover area (ties by lowest gap index) at the
//! gap's lower-left corner, and the gap is split along the longer leftover.

use num_traits::{One, Signed, Zero};

use crate::motions::RigidMotion;
use crate::pieces::{CollectionKind, PieceCollection};
use crate::scalar::{Rational, Scalar};
use crate::targets::TargetSet;
use crate::verification::{verify_packing, PackingCertificate, PackingMode, Placement};
use crate::{Error, Result};

/// Axis-aligned free rectangle `[x, x + w] x [y, y + h]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gap {
    pub x: Rational,
    pub y: Rational,
    pub w: Rational,
    pub h: Rational,
}

impl Gap {
    pub fn area(&self) -> Rational {
        &self.w * &self.h
    }
}

/// Free space of a guillotine packing: pairwise interior-disjoint gaps
/// covering everything not yet occupied.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeGapList {
    gaps: Vec<Gap>,
}

impl FreeGapList {
    pub fn new(width: Rational, height: Rational) -> Self {
        FreeGapList {
            gaps: vec![Gap {
                x: Rational::zero(),
                y: Rational::zero(),
                w: width,
                h: height,
            }],
        }
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn total_area(&self) -> Rational {
        self.gaps.iter().map(Gap::area).sum()
    }

    /// Best-area-fit placement of a `w x h` rectangle; returns its
    /// lower-left corner, or `None` when no gap is large enough.
    pub fn place(&mut self, w: &Rational, h: &Rational) -> Option<(Rational, Rational)> {
        let need = w * h;
        let mut best: Option<(usize, Rational)> = None;
        for (i, g) in self.gaps.iter().enumerate() {
            if w <= &g.w && h <= &g.h {
                let leftover = g.area() - &need;
                if best.as_ref().is_none_or(|(_, b)| leftover < *b) {
                    best = Some((i, leftover));
                }
            }
        }
        let (index, _) = best?;
        let g = self.gaps.remove(index);
        let rest_w = &g.w - w;
        let rest_h = &g.h - h;
        let (right, top) = if rest_w > rest_h {
            // Vertical cut: the right strip keeps the full height.
            (
                Gap {
                    x: &g.x + w,
                    y: g.y.clone(),
                    w: rest_w,
                    h: g.h.clone(),
                },
                Gap {
                    x: g.x.clone(),
                    y: &g.y + h,
                    w: w.clone(),
                    h: rest_h,
                },
            )
        } else {
            // Horizontal cut: the top strip keeps the full width.
            (
                Gap {
                    x: &g.x + w,
                    y: g.y.clone(),
                    w: rest_w,
                    h: h.clone(),
                },
                Gap {
                    x: g.x.clone(),
                    y: &g.y + h,
                    w: g.w.clone(),
                    h: rest_h,
                },
            )
        };
        for gap in [right, top] {
            if gap.w.is_positive() && gap.h.is_positive() {
                self.gaps.push(gap);
            }
        }
        Some((g.x, g.y))
    }
}

/// Packs a planar collection into `[0, width] x [0, height]` by translation.
pub fn pack_guillotine(
    collection: PieceCollection,
    width: Rational,
    height: Rational,
) -> Result<PackingCertificate<Rational>> {
    if collection.dim() != 2 {
        return Err(Error::Unsupported("the guillotine packer is planar".into()));
    }
    let target = TargetSet::brick(vec![width.clone(), height.clone()])?;
    let mut order: Vec<_> = collection.pieces().iter().collect();
    order.sort_by(|a, b| b.volume().cmp(&a.volume()).then(a.id().cmp(&b.id())));

    let mut free = FreeGapList::new(width, height);
    let mut placements = Vec::with_capacity(order.len());
    for piece in order {
        let (w, h) = (&piece.dims()[0], &piece.dims()[1]);
        let (x, y) = free
            .place(w, h)
            .ok_or(Error::Capacity { index: piece.id() })?;
        placements.push(Placement::new(piece.id(), RigidMotion::translation(vec![x, y])));
    }
    let cert = PackingCertificate::new(collection, target, PackingMode::Translated, placements)?;
    let report = verify_packing(&cert)?;
    if !report.is_valid() {
        return Err(Error::InvalidCertificate(format!(
            "packer produced an invalid packing: {:?}",
            report.violations
        )));
    }
    Ok(cert)
}

/// Rectangles `1/i x 1/(i+1)`, `i = 1..=n`, into the square of side `side`.
pub fn pack_moser_rectangles(n: usize, side: &Rational) -> Result<PackingCertificate<Rational>> {
    if !side.is_positive() {
        return Err(Error::InvalidTarget("side must be positive".into()));
    }
    pack_guillotine(
        PieceCollection::moser_rectangles(n)?,
        side.clone(),
        side.clone(),
    )
}

/// Squares of side `1/i`, `i = 2..=n`, into `[0, width] x [0, 1]`.
pub fn pack_moser_squares(n: usize, width: &Rational) -> Result<PackingCertificate<Rational>> {
    if !width.is_positive() {
        return Err(Error::InvalidTarget("width must be positive".into()));
    }
    pack_guillotine(
        PieceCollection::moser_squares(n)?,
        width.clone(),
        Rational::one(),
    )
}

/// Result of [`shrink_search`].
#[derive(Clone, Debug)]
pub struct ShrinkOutcome {
    /// Smallest side (rectangles) or width (squares) at which the packer
    /// succeeded.
    pub parameter: Rational,
    /// `side - 1` for rectangles, `width - (pi^2/6 - 1)` for squares.
    pub epsilon: f64,
    pub iterations: usize,
    pub certificate: PackingCertificate<Rational>,
}

fn pack_kind(kind: CollectionKind, n: usize, param: &Rational) -> Result<PackingCertificate<Rational>> {
    match kind {
        CollectionKind::MoserRectangles => pack_moser_rectangles(n, param),
        CollectionKind::MoserSquares => pack_moser_squares(n, param),
        CollectionKind::Custom => Err(Error::Unsupported(
            "shrink_search runs on Moser collections".into(),
        )),
    }
}

/// Bisection on the container parameter. `lo` is tried first; after that an
/// infeasible midpoint only raises `lo`, so the heuristic need not be
/// monotone in the parameter.
pub fn shrink_search(
    kind: CollectionKind,
    n: usize,
    lo: &Rational,
    hi: &Rational,
    steps: usize,
) -> Result<ShrinkOutcome> {
    if lo >= hi {
        return Err(Error::InvalidTarget("shrink_search needs lo < hi".into()));
    }
    let mut best = match pack_kind(kind, n, hi) {
        Ok(c) => c,
        Err(Error::Capacity { index }) => return Err(Error::InfeasibleAtHi { index }),
        Err(e) => return Err(e),
    };
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut iterations = 0;
    match pack_kind(kind, n, &lo) {
        Ok(c) => {
            best = c;
            hi = lo.clone();
        }
        Err(Error::Capacity { .. }) => {
            for _ in 0..steps {
                iterations += 1;
                let mid = (&lo + &hi) / Rational::from_integer(2.into());
                match pack_kind(kind, n, &mid) {
                    Ok(c) => {
                        best = c;
                        hi = mid;
                    }
                    Err(Error::Capacity { .. }) => lo = mid,
                    Err(e) => return Err(e),
                }
            }
        }
        Err(e) => return Err(e),
    }
    let epsilon = match kind {
        CollectionKind::MoserSquares => hi.to_f64() - crate::pieces::moser_squares_limit_area(),
        _ => hi.to_f64() - 1.0,
    };
    Ok(ShrinkOutcome {
        parameter: hi,
        epsilon,
        iterations,
        certificate: best,
    })
}
