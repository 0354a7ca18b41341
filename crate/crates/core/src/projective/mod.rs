//! Points, lines and subspaces of PG(n, q), q = 2^m.
//!
//! A vector of `n + 1` coordinates is packed into a `u128`, `m` bits per
//! coordinate, coordinate 0 in the most significant slot. Addition of vectors
//! is XOR. A point is stored as its normalized representative (leftmost
//! nonzero coordinate equal to 1), so with this layout integer order on
//! packed points is lexicographic order on normalized coordinates.
//!
//! Slots are numbered from the right: coordinate `j` lives in slot `n - j`.

mod matrix;
mod pointset;
mod subspace;

pub use matrix::{apply_projectivity, Matrix, Projectivity};
pub use pointset::PointSet;
pub use subspace::{Line, Subspace};

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;

/// A normalized projective point, packed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Point(pub(crate) u128);

impl Point {
    pub fn raw(self) -> u128 {
        self.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({:#x})", self.0)
    }
}

/// Serialized as the packed value in lowercase hex.
impl serde::Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:x}", self.0))
    }
}

/// Default enumeration budget, in incidence operations.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// The projective space PG(dim, q) over a fixed field.
#[derive(Clone, Debug)]
pub struct ProjSpace {
    dim: usize,
    field: Field,
    width: u32,
    coord_mask: u128,
}

impl PartialEq for ProjSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.field == other.field
    }
}

impl Eq for ProjSpace {}

impl ProjSpace {
    pub fn new(dim: usize, field: Field) -> Result<Self> {
        let width = field.degree();
        if (dim + 1) as u32 * width > 128 {
            return Err(Error::UnsupportedDimension { dim, degree: width });
        }
        Ok(Self {
            dim,
            coord_mask: (1u128 << width) - 1,
            width,
            field,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Bits per coordinate.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn q(&self) -> u128 {
        1u128 << self.width
    }

    /// Number of bits used by a packed vector.
    pub fn vector_bits(&self) -> u32 {
        self.width * (self.dim as u32 + 1)
    }

    #[inline]
    fn shift(&self, j: usize) -> u32 {
        self.width * (self.dim - j) as u32
    }

    #[inline]
    pub fn coord(&self, v: u128, j: usize) -> u32 {
        ((v >> self.shift(j)) & self.coord_mask) as u32
    }

    #[inline]
    pub fn with_coord(&self, v: u128, j: usize, c: u32) -> u128 {
        let s = self.shift(j);
        (v & !(self.coord_mask << s)) | ((c as u128) << s)
    }

    pub fn pack(&self, coords: &[u32]) -> Result<u128> {
        if coords.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim + 1,
                got: coords.len(),
            });
        }
        let mut v = 0u128;
        for &c in coords {
            if c as u128 > self.coord_mask {
                return Err(Error::FieldMismatch);
            }
            v = (v << self.width) | c as u128;
        }
        Ok(v)
    }

    pub fn unpack(&self, v: u128) -> Vec<u32> {
        (0..=self.dim).map(|j| self.coord(v, j)).collect()
    }

    pub fn coords(&self, p: Point) -> Vec<u32> {
        self.unpack(p.0)
    }

    /// Multiplies every coordinate by `c`.
    #[inline]
    pub fn scale(&self, v: u128, c: u32) -> u128 {
        if c == 1 {
            return v;
        }
        let mut out = 0u128;
        let mut rest = v;
        let mut s = 0;
        while rest != 0 {
            let x = (rest & self.coord_mask) as u32;
            if x != 0 {
                out |= (self.field.mul(x, c) as u128) << s;
            }
            rest >>= self.width;
            s += self.width;
        }
        out
    }

    /// Slot of the leftmost nonzero coordinate.
    #[inline]
    pub fn lead_slot(&self, v: u128) -> Option<u32> {
        if v == 0 {
            None
        } else {
            Some((127 - v.leading_zeros()) / self.width)
        }
    }

    /// Index and value of the leftmost nonzero coordinate.
    #[inline]
    pub fn lead(&self, v: u128) -> Option<(usize, u32)> {
        let slot = self.lead_slot(v)?;
        let c = ((v >> (slot * self.width)) & self.coord_mask) as u32;
        Some((self.dim - slot as usize, c))
    }

    #[inline]
    pub fn normalize_vec(&self, v: u128) -> Option<u128> {
        let (_, c) = self.lead(v)?;
        if c == 1 {
            Some(v)
        } else {
            Some(self.scale(v, self.field.inv(c).ok()?))
        }
    }

    /// The point spanned by a nonzero vector given as a packed value.
    #[inline]
    pub fn point_of(&self, v: u128) -> Result<Point> {
        self.normalize_vec(v).map(Point).ok_or(Error::ZeroVector)
    }

    /// The canonical representative of the point with these coordinates.
    pub fn normalize(&self, coords: &[u32]) -> Result<Point> {
        self.point_of(self.pack(coords)?)
    }

    /// Wraps a packed value that the caller knows is normalized.
    pub fn point_unchecked(&self, v: u128) -> Point {
        debug_assert_eq!(self.normalize_vec(v), Some(v));
        Point(v)
    }

    pub fn is_normalized(&self, v: u128) -> bool {
        matches!(self.lead(v), Some((_, 1)))
    }

    /// `(q^(t) - 1) / (q - 1)`: the number of points whose leading slot is below `t`.
    fn offset(&self, t: u32) -> u128 {
        let q = self.q();
        (q.pow(t) - 1) / (q - 1)
    }

    /// `(q^(n+1) - 1) / (q - 1)`.
    pub fn point_count(&self) -> u128 {
        self.offset(self.dim as u32 + 1)
    }

    /// Gaussian binomial `[n+1 choose 2]_q`.
    pub fn line_count(&self) -> u128 {
        gaussian_binomial(self.dim as u32 + 1, 2, self.q())
    }

    /// Number of lines through a fixed point: `(q^n - 1) / (q - 1)`.
    pub fn lines_per_point(&self) -> u128 {
        self.offset(self.dim as u32)
    }

    /// Position of a point in the lexicographic enumeration order.
    #[inline]
    pub fn index_of(&self, p: Point) -> usize {
        let slot = (127 - p.0.leading_zeros()) / self.width;
        let low = p.0 ^ (1u128 << (slot * self.width));
        (self.offset(slot) + low) as usize
    }

    pub fn point_at(&self, index: usize) -> Point {
        let index = index as u128;
        let mut slot = 0;
        while self.offset(slot + 1) <= index {
            slot += 1;
        }
        Point((1u128 << (slot * self.width)) | (index - self.offset(slot)))
    }

    fn check_budget(required: u128, budget: u128) -> Result<()> {
        if required > budget {
            Err(Error::EnumerationTooLarge { required, budget })
        } else {
            Ok(())
        }
    }

    /// Every point once, in increasing lexicographic order.
    pub fn points(&self, budget: u128) -> Result<impl Iterator<Item = Point> + '_> {
        Self::check_budget(self.point_count(), budget)?;
        Ok(self.points_unbounded())
    }

    pub(crate) fn points_unbounded(&self) -> impl Iterator<Item = Point> + '_ {
        let w = self.width;
        (0..=self.dim as u32).flat_map(move |slot| {
            let base = 1u128 << (slot * w);
            (0..base).map(move |x| Point(base | x))
        })
    }

    /// Canonical keys of all lines. The budget is charged `q + 1` per line.
    pub fn line_keys(&self, budget: u128) -> Result<impl Iterator<Item = [u128; 2]> + '_> {
        Self::check_budget(self.line_count() * (self.q() + 1), budget)?;
        let w = self.width;
        let n = self.dim as u32;
        Ok((1..=n).flat_map(move |s1| {
            (0..s1).flat_map(move |s2| {
                let low_mask = (1u128 << (w * s2)) - 1;
                let row1_free = 1u128 << (w * (s1 - 1));
                (0..row1_free).flat_map(move |x| {
                    let free = (x & low_mask) | ((x & !low_mask) << w);
                    let row1 = (1u128 << (w * s1)) | free;
                    (0..1u128 << (w * s2)).map(move |y| [row1, (1u128 << (w * s2)) | y])
                })
            })
        }))
    }

    /// All lines with their point lists.
    pub fn lines(&self, budget: u128) -> Result<impl Iterator<Item = Line> + '_> {
        Ok(self
            .line_keys(budget)?
            .map(move |key| self.line_from_key(key)))
    }

    /// Canonical echelon key of the line through two independent vectors.
    #[inline]
    pub fn line_key(&self, a: u128, b: u128) -> Option<[u128; 2]> {
        let mut rows = [a, b];
        if self.rref(&mut rows) == 2 {
            Some(rows)
        } else {
            None
        }
    }

    /// The `q + 1` points of the line with the given canonical key.
    pub fn line_points(&self, key: [u128; 2]) -> impl Iterator<Item = Point> + '_ {
        let [r1, r2] = key;
        std::iter::once(Point(r2)).chain(
            self.field
                .elements()
                .map(move |l| Point(r1 ^ self.scale(r2, l))),
        )
    }

    pub fn line_from_key(&self, key: [u128; 2]) -> Line {
        Line {
            points: self.line_points(key).collect(),
            key: Subspace::from_rref(self.dim, key.to_vec()),
        }
    }

    pub fn line_through(&self, p: Point, r: Point) -> Result<Line> {
        let key = self.line_key(p.0, r.0).ok_or(Error::DegenerateSpan)?;
        Ok(self.line_from_key(key))
    }

    /// Puts `rows` in reduced row echelon form in place: the first `rank` rows
    /// are the reduced basis sorted by pivot (leftmost first), the rest zero.
    pub fn rref(&self, rows: &mut [u128]) -> usize {
        let mut rank = 0;
        while rank < rows.len() {
            // Row with the leftmost pivot among the remaining ones.
            let mut best = None;
            for (i, &r) in rows.iter().enumerate().skip(rank) {
                if r != 0
                    && best
                        .is_none_or(|(_, b): (usize, u128)| r.leading_zeros() < b.leading_zeros())
                {
                    best = Some((i, r));
                }
            }
            let Some((i, _)) = best else { break };
            rows.swap(rank, i);
            let (pivot, c) = self.lead(rows[rank]).expect("nonzero row");
            let row = if c == 1 {
                rows[rank]
            } else {
                self.scale(rows[rank], self.field.inv(c).expect("nonzero"))
            };
            rows[rank] = row;
            for (j, other) in rows.iter_mut().enumerate() {
                if j != rank {
                    let x = self.coord(*other, pivot);
                    if x != 0 {
                        *other ^= self.scale(row, x);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Reduces `v` against a reduced echelon basis.
    #[inline]
    pub fn reduce(&self, rows: &[u128], mut v: u128) -> u128 {
        for &row in rows {
            let (pivot, _) = self.lead(row).expect("echelon rows are nonzero");
            let x = self.coord(v, pivot);
            if x != 0 {
                v ^= self.scale(row, x);
            }
        }
        v
    }

    pub fn span(&self, points: &[Point]) -> Subspace {
        self.span_vectors(points.iter().map(|p| p.0))
    }

    pub fn span_vectors<I: IntoIterator<Item = u128>>(&self, vectors: I) -> Subspace {
        let mut rows: Vec<u128> = vectors.into_iter().collect();
        let rank = self.rref(&mut rows);
        rows.truncate(rank);
        Subspace::from_rref(self.dim, rows)
    }

    pub fn subspace_contains(&self, s: &Subspace, p: Point) -> Result<bool> {
        if s.ambient() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: s.ambient(),
            });
        }
        Ok(self.reduce(s.rows(), p.0) == 0)
    }

    pub fn hyperplane_at_infinity(&self) -> Subspace {
        self.span_vectors((1..=self.dim).map(|j| 1u128 << self.shift(j)))
    }
}

/// `[n choose r]_q`, the number of `r`-dimensional subspaces of GF(q)^n.
pub fn gaussian_binomial(n: u32, r: u32, q: u128) -> u128 {
    if r > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..r {
        num *= q.pow(n - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    num / den
}
