use super::{Point, ProjSpace};
use crate::error::{Error, Result};
use crate::field::Field;

/// A dense matrix over GF(2^m), row-major, acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    /// The matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<u32>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, field: &Field, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| acc ^ field.mul(a, b))
            })
            .collect()
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let x = (0..self.cols)
                    .fold(0, |acc, t| acc ^ field.mul(self.get(i, t), other.get(t, j)));
                out.set(i, j, x);
            }
        }
        out
    }

    /// Block-diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.set(i, j, a.get(i, j));
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(a.rows + i, a.cols + j, b.get(i, j));
            }
        }
        out
    }

    pub fn rank(&self, field: &Field) -> usize {
        let mut m = self.clone();
        m.eliminate(field, None)
    }

    pub fn inverse(&self, field: &Field) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::SingularMatrix);
        }
        let mut m = self.clone();
        let mut inv = Matrix::identity(self.rows);
        if m.eliminate(field, Some(&mut inv)) < self.rows {
            return Err(Error::SingularMatrix);
        }
        Ok(inv)
    }

    /// The unique `x` with `self · x = rhs`, if there is exactly one.
    pub fn solve(&self, field: &Field, rhs: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, rhs[i]);
        }
        let rank = aug.eliminate(field, None);
        let mut x = vec![0; self.cols];
        let mut pivots = 0;
        for r in 0..rank {
            let lead = (0..=self.cols).find(|&j| aug.get(r, j) != 0)?;
            if lead == self.cols {
                return None;
            }
            x[lead] = aug.get(r, self.cols);
            pivots += 1;
        }
        (pivots == self.cols).then_some(x)
    }

    /// Gauss-Jordan elimination, mirroring row operations on `shadow`. Returns the rank.
    fn eliminate(&mut self, field: &Field, mut shadow: Option<&mut Matrix>) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(p, rank);
            if let Some(s) = shadow.as_deref_mut() {
                s.swap_rows(p, rank);
            }
            let inv = field.inv(self.get(rank, col)).expect("pivot is nonzero");
            self.scale_row(field, rank, inv);
            if let Some(s) = shadow.as_deref_mut() {
                s.scale_row(field, rank, inv);
            }
            for r in 0..self.rows {
                let x = self.get(r, col);
                if r != rank && x != 0 {
                    self.add_row_multiple(field, r, rank, x);
                    if let Some(s) = shadow.as_deref_mut() {
                        s.add_row_multiple(field, r, rank, x);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, field: &Field, r: usize, c: u32) {
        for j in 0..self.cols {
            let x = self.get(r, j);
            self.set(r, j, field.mul(x, c));
        }
    }

    /// `row[dst] += c * row[src]`.
    fn add_row_multiple(&mut self, field: &Field, dst: usize, src: usize, c: u32) {
        for j in 0..self.cols {
            let x = self.get(dst, j) ^ field.mul(c, self.get(src, j));
            self.set(dst, j, x);
        }
    }
}

/// An element of PGL(n+1, q) acting on points of PG(n, q).
#[derive(Clone, Debug)]
pub struct Projectivity {
    matrix: Matrix,
    inverse: Matrix,
}

impl Projectivity {
    pub fn new(space: &ProjSpace, matrix: Matrix) -> Result<Self> {
        if matrix.n_rows() != space.dim() + 1 || matrix.n_cols() != space.dim() + 1 {
            return Err(Error::DimensionMismatch {
                expected: space.dim() + 1,
                got: matrix.n_rows(),
            });
        }
        let inverse = matrix.inverse(space.field())?;
        Ok(Self { matrix, inverse })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn inverse(&self) -> Projectivity {
        Projectivity {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
        }
    }

    pub fn apply_vec(&self, space: &ProjSpace, v: u128) -> u128 {
        let image = self.matrix.mul_vec(space.field(), &space.unpack(v));
        space
            .pack(&image)
            .expect("dimension checked at construction")
    }

    pub fn apply(&self, space: &ProjSpace, p: Point) -> Point {
        space
            .point_of(self.apply_vec(space, p.0))
            .expect("invertible maps send nonzero vectors to nonzero vectors")
    }
}

/// Checked form of [`Projectivity::apply`] for a bare matrix.
pub fn apply_projectivity(space: &ProjSpace, m: &Matrix, p: Point) -> Result<Point> {
    Ok(Projectivity::new(space, m.clone())?.apply(space, p))
}
