use rustc_hash::FxHashSet;

use super::{Point, ProjSpace};

const DENSE_LIMIT: u128 = 1 << 28;

/// A set of points of one projective space: a bitmap over enumeration
/// indices when the space is small enough, a hash set otherwise.
#[derive(Clone, Debug)]
pub struct PointSet {
    space: ProjSpace,
    repr: Repr,
    len: usize,
}

#[derive(Clone, Debug)]
enum Repr {
    Dense(Vec<u64>),
    Sparse(FxHashSet<Point>),
}

impl PointSet {
    pub fn new(space: &ProjSpace) -> Self {
        let n = space.point_count();
        let repr = if n <= DENSE_LIMIT {
            Repr::Dense(vec![0; (n as usize).div_ceil(64)])
        } else {
            Repr::Sparse(FxHashSet::default())
        };
        Self {
            space: space.clone(),
            repr,
            len: 0,
        }
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(space: &ProjSpace, points: I) -> Self {
        let mut set = Self::new(space);
        for p in points {
            set.insert(p);
        }
        set
    }

    pub fn space(&self) -> &ProjSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Returns true if the point was not present.
    pub fn insert(&mut self, p: Point) -> bool {
        let fresh = match &mut self.repr {
            Repr::Dense(bits) => {
                let i = self.space.index_of(p);
                let word = &mut bits[i / 64];
                let fresh = *word >> (i % 64) & 1 == 0;
                *word |= 1 << (i % 64);
                fresh
            }
            Repr::Sparse(set) => set.insert(p),
        };
        self.len += fresh as usize;
        fresh
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        match &self.repr {
            Repr::Dense(bits) => {
                let i = self.space.index_of(p);
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            Repr::Sparse(set) => set.contains(&p),
        }
    }

    /// Members in increasing order.
    pub fn to_sorted_vec(&self) -> Vec<Point> {
        match &self.repr {
            Repr::Dense(bits) => {
                let mut out = Vec::with_capacity(self.len);
                for (w, &word) in bits.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let b = word.trailing_zeros() as usize;
                        out.push(self.space.point_at(w * 64 + b));
                        word &= word - 1;
                    }
                }
                out
            }
            Repr::Sparse(set) => {
                let mut out: Vec<Point> = set.iter().copied().collect();
                out.sort();
                out
            }
        }
    }
}
