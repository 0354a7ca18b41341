//! Linear algebra over GF(2) on vectors packed into a `u64`.
//!
//! Vectors have at most 64 coordinates. The pivot of a row is its highest set
//! bit, so an echelon basis kept sorted by pivot gives a canonical reduced form.

/// Incrementally built reduced echelon basis of a subspace of GF(2)^n.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct F2Echelon {
    rows: Vec<u64>,
}

impl F2Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vectors<I: IntoIterator<Item = u64>>(vectors: I) -> Self {
        let mut basis = Self::new();
        for v in vectors {
            basis.insert(v);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduced rows, sorted by decreasing pivot.
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, mut v: u64) -> u64 {
        for &row in &self.rows {
            let pivot = 63 - row.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= row;
            }
        }
        v
    }

    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    /// Adds `v` to the basis. Returns false if it was already in the span.
    pub fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let pivot = 63 - v.leading_zeros();
        for row in &mut self.rows {
            if *row >> pivot & 1 == 1 {
                *row ^= v;
            }
        }
        let pos = self
            .rows
            .iter()
            .position(|&r| r.leading_zeros() > v.leading_zeros())
            .unwrap_or(self.rows.len());
        self.rows.insert(pos, v);
        true
    }

    /// Every vector of the span, in increasing order of the combination index.
    pub fn span_vectors(&self) -> Vec<u64> {
        let r = self.rows.len();
        let mut out = vec![0u64; 1 << r];
        for (bit, &row) in self.rows.iter().enumerate() {
            let half = 1usize << bit;
            for j in 0..half {
                out[half + j] = out[j] ^ row;
            }
        }
        out
    }
}

/// Inverts the linear map whose `j`-th column is `columns[j]` (an `n × n`
/// matrix, `n = columns.len()`). Returns the columns of the inverse.
pub fn invert_columns(columns: &[u64]) -> Option<Vec<u64>> {
    let n = columns.len();
    // Row-reduce [A | I] with columns as bit positions: work on the transpose.
    // Pair each column image with the unit vector that produced it.
    let mut pairs: Vec<(u64, u64)> = columns
        .iter()
        .enumerate()
        .map(|(j, &c)| (c, 1u64 << j))
        .collect();
    let mut result = vec![0u64; n];
    for bit in 0..n {
        let idx = (bit..n).find(|&r| pairs[r].0 >> bit & 1 == 1)?;
        pairs.swap(bit, idx);
        let (pv, pi) = pairs[bit];
        for (r, pair) in pairs.iter_mut().enumerate() {
            if r != bit && pair.0 >> bit & 1 == 1 {
                pair.0 ^= pv;
                pair.1 ^= pi;
            }
        }
    }
    // Now pairs[bit].0 == e_bit, so A * pairs[bit].1 == e_bit.
    for (bit, &(_, pre)) in pairs.iter().enumerate() {
        result[bit] = pre;
    }
    Some(result)
}

/// Applies the linear map given by its columns.
pub fn apply_columns(columns: &[u64], v: u64) -> u64 {
    let mut out = 0;
    let mut v = v;
    while v != 0 {
        let j = v.trailing_zeros() as usize;
        out ^= columns[j];
        v &= v - 1;
    }
    out
}
