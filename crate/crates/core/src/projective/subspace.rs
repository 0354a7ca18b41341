use super::{Point, ProjSpace};

/// A subspace of PG(n, q) given by its reduced row echelon basis.
///
/// The basis is canonical, so two subspaces are equal iff their rows are
/// identical and the rows double as a hash key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<u128>,
}

impl Subspace {
    /// Wraps rows that are already in reduced echelon form.
    pub(crate) fn from_rref(ambient: usize, rows: Vec<u128>) -> Self {
        Self { ambient, rows }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rows(&self) -> &[u128] {
        &self.rows
    }

    /// Vector-space dimension.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Projective dimension (`-1` for the empty subspace).
    pub fn dim(&self) -> isize {
        self.rows.len() as isize - 1
    }

    pub fn point_count(&self, space: &ProjSpace) -> u128 {
        let q = space.q();
        (q.pow(self.rank() as u32) - 1) / (q - 1)
    }

    /// All points, each exactly once. Combinations whose first nonzero
    /// coefficient is 1 are already normalized because the basis is reduced.
    pub fn points<'a>(&'a self, space: &'a ProjSpace) -> impl Iterator<Item = Point> + 'a {
        let q = space.q() as u64;
        let r = self.rows.len();
        (0..r).flat_map(move |t| {
            let tail = &self.rows[t + 1..];
            let combos = q.pow(tail.len() as u32);
            (0..combos).map(move |mut c| {
                let mut v = self.rows[t];
                for &row in tail {
                    let l = (c % q) as u32;
                    c /= q;
                    if l != 0 {
                        v ^= space.scale(row, l);
                    }
                }
                Point(v)
            })
        })
    }

    pub fn contains(&self, space: &ProjSpace, p: Point) -> bool {
        space.reduce(&self.rows, p.0) == 0
    }

    /// Whether the subspaces share no point.
    pub fn is_disjoint(&self, other: &Subspace, space: &ProjSpace) -> bool {
        let joined = space.span_vectors(self.rows.iter().chain(&other.rows).copied());
        joined.rank() == self.rank() + other.rank()
    }

    pub fn join(&self, other: &Subspace, space: &ProjSpace) -> Subspace {
        space.span_vectors(self.rows.iter().chain(&other.rows).copied())
    }
}

/// A line of PG(n, q) with its `q + 1` points cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub key: Subspace,
    pub points: Vec<Point>,
}

impl Line {
    pub fn contains(&self, p: Point) -> bool {
        self.points.contains(&p)
    }
}
