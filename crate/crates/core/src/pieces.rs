//! Pieces are axis-aligned bricks `[0, d_1] x ... x [0, d_n]` in reference
//! pose, so the origin is always a vertex.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, One, Signed, Zero};

use crate::scalar::{norm_f64, Rational, Scalar};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    id: usize,
    dims: Vec<Rational>,
}

impl Piece {
    /// Dimensions must be nonnegative. A zero dimension gives a piece with
    /// empty interior, which never conflicts with other pieces.
    pub fn new(id: usize, dims: Vec<Rational>) -> Result<Self> {
        if id == 0 {
            return Err(Error::InvalidPiece("piece ids start at 1".into()));
        }
        if dims.is_empty() {
            return Err(Error::InvalidPiece("piece needs at least one dimension".into()));
        }
        if dims.iter().any(Signed::is_negative) {
            return Err(Error::InvalidPiece(format!("piece {id} has a negative dimension")));
        }
        Ok(Piece { id, dims })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn dims(&self) -> &[Rational] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn volume(&self) -> Rational {
        self.dims.iter().fold(Rational::one(), |acc, d| acc * d)
    }

    pub fn has_interior(&self) -> bool {
        self.dims.iter().all(Signed::is_positive)
    }

    /// Norm of the vertex opposite the origin, which is both the largest
    /// vertex norm and the diameter of the brick.
    pub fn radius(&self) -> f64 {
        norm_f64(&self.dims_f64())
    }

    pub fn dims_f64(&self) -> Vec<f64> {
        self.dims.iter().map(Scalar::to_f64).collect()
    }

    /// The `2^n` vertices, vertex `k` taking `d_m` in coordinate `m` when bit
    /// `m` of `k` is set.
    pub fn vertices<S: Scalar>(&self) -> Vec<Vec<S>> {
        let n = self.dim();
        let dims: Vec<S> = self.dims.iter().map(S::from_rational).collect();
        (0..1usize << n)
            .map(|k| {
                (0..n)
                    .map(|m| {
                        if k >> m & 1 == 1 {
                            dims[m].clone()
                        } else {
                            S::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectionKind {
    MoserRectangles,
    MoserSquares,
    Custom,
}

impl CollectionKind {
    pub fn name(self) -> &'static str {
        match self {
            CollectionKind::MoserRectangles => "moser_rectangles",
            CollectionKind::MoserSquares => "moser_squares",
            CollectionKind::Custom => "custom",
        }
    }

    /// Smallest valid piece index.
    pub fn first_index(self) -> usize {
        match self {
            CollectionKind::MoserSquares => 2,
            _ => 1,
        }
    }
}

/// A finite truncation of a piece collection. Piece ids are the collection
/// indices: `1..=N` for rectangles and custom collections, `2..=N` for
/// squares.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceCollection {
    kind: CollectionKind,
    count: usize,
    pieces: Vec<Piece>,
}

impl PieceCollection {
    pub fn moser(kind: CollectionKind, count: usize) -> Result<Self> {
        if kind == CollectionKind::Custom {
            return Err(Error::InvalidPiece("custom collections need explicit dims".into()));
        }
        if count < kind.first_index() {
            return Err(Error::IndexOutOfRange {
                kind: kind.name(),
                index: count,
            });
        }
        let pieces = (kind.first_index()..=count)
            .map(|i| moser_piece(kind, i))
            .collect::<Result<_>>()?;
        Ok(PieceCollection {
            kind,
            count,
            pieces,
        })
    }

    pub fn moser_rectangles(count: usize) -> Result<Self> {
        Self::moser(CollectionKind::MoserRectangles, count)
    }

    pub fn moser_squares(count: usize) -> Result<Self> {
        Self::moser(CollectionKind::MoserSquares, count)
    }

    /// Pieces with explicit dimensions, numbered from 1.
    pub fn custom(dims: Vec<Vec<Rational>>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = dims[0].len();
        let pieces = dims
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                if d.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: d.len(),
                    });
                }
                Piece::new(i + 1, d)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PieceCollection {
            kind: CollectionKind::Custom,
            count: pieces.len(),
            pieces,
        })
    }

    pub fn kind(&self) -> CollectionKind {
        self.kind
    }

    /// Truncation parameter `N`.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn piece(&self, id: usize) -> Option<&Piece> {
        id.checked_sub(self.kind.first_index())
            .and_then(|i| self.pieces.get(i))
    }

    pub fn total_volume(&self) -> Rational {
        self.pieces.iter().map(Piece::volume).sum()
    }
}

/// Piece `i` of a Moser collection: `1/i x 1/(i+1)` rectangles (`i >= 1`) or
/// `1/i` squares (`i >= 2`).
pub fn moser_piece(kind: CollectionKind, i: usize) -> Result<Piece> {
    let recip = |k: usize| Rational::new(BigInt::one(), BigInt::from(k));
    let dims = match kind {
        CollectionKind::MoserRectangles if i >= 1 => vec![recip(i), recip(i + 1)],
        CollectionKind::MoserSquares if i >= 2 => vec![recip(i), recip(i)],
        _ => {
            return Err(Error::IndexOutOfRange {
                kind: kind.name(),
                index: i,
            })
        }
    };
    Piece::new(i, dims)
}

/// Exact total area of the first pieces of a Moser collection, up to and
/// including index `n`.
pub fn collection_area(kind: CollectionKind, n: usize) -> Result<Rational> {
    match kind {
        CollectionKind::MoserRectangles => {
            if n < 1 {
                return Err(Error::IndexOutOfRange {
                    kind: kind.name(),
                    index: n,
                });
            }
            // Running sums reduce to small fractions, so machine-word
            // fractions suffice until one overflows.
            let widen = |r: &Ratio<i64>| Rational::new((*r.numer()).into(), (*r.denom()).into());
            let mut small = Ratio::<i64>::zero();
            let mut big: Option<Rational> = None;
            for i in 1..=n as u64 {
                let denom = i as i128 * (i as i128 + 1);
                match &mut big {
                    Some(sum) => *sum += Rational::new(BigInt::one(), BigInt::from(denom)),
                    None => match i64::try_from(denom)
                        .ok()
                        .and_then(|d| small.checked_add(&Ratio::new(1, d)))
                    {
                        Some(next) => small = next,
                        None => {
                            big = Some(widen(&small) + Rational::new(BigInt::one(), BigInt::from(denom)))
                        }
                    },
                }
            }
            Ok(big.unwrap_or_else(|| widen(&small)))
        }
        CollectionKind::MoserSquares => {
            if n < 2 {
                return Err(Error::IndexOutOfRange {
                    kind: kind.name(),
                    index: n,
                });
            }
            // Binary splitting keeps operands balanced; reduce once at the end.
            let (p, q) = inverse_square_sum(2, n as u64 + 1);
            Ok(Rational::new(p, q))
        }
        CollectionKind::Custom => Err(Error::InvalidPiece(
            "collection_area is defined for Moser collections".into(),
        )),
    }
}

/// Unreduced `sum_{a <= i < b} 1/i^2` as numerator and denominator.
fn inverse_square_sum(a: u64, b: u64) -> (BigInt, BigInt) {
    if b - a == 1 {
        return (BigInt::one(), BigInt::from(a) * BigInt::from(a));
    }
    let mid = a + (b - a) / 2;
    let (p1, q1) = inverse_square_sum(a, mid);
    let (p2, q2) = inverse_square_sum(mid, b);
    (p1 * &q2 + p2 * &q1, q1 * q2)
}

/// Closed-form value of the full square series, `pi^2/6 - 1`.
pub fn moser_squares_limit_area() -> f64 {
    std::f64::consts::PI.powi(2) / 6.0 - 1.0
}
