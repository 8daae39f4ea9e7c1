//! Floating-point axis-aligned boxes used for bounds and broad-phase culling.

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        Aabb { lo, hi }
    }

    /// Smallest box containing every point.
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut b = Aabb::new(first.to_vec(), first.to_vec());
        for p in iter {
            for (m, &x) in p.iter().enumerate() {
                b.lo[m] = b.lo[m].min(x);
                b.hi[m] = b.hi[m].max(x);
            }
        }
        Some(b)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    pub fn inflate(&self, by: f64) -> Aabb {
        Aabb {
            lo: self.lo.iter().map(|x| x - by).collect(),
            hi: self.hi.iter().map(|x| x + by).collect(),
        }
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains_point(&other.lo) && self.contains_point(&other.hi)
    }

    /// Closed-box intersection test.
    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..self.dim()).all(|m| self.lo[m] <= other.hi[m] && other.lo[m] <= self.hi[m])
    }

    pub fn extents(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn diameter(&self) -> f64 {
        crate::scalar::norm_f64(&self.extents())
    }
}
