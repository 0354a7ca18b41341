//! Exact arithmetic in GF(2^m), `1 <= m <= 24`.
//!
//! Elements are bit-packed polynomials over GF(2) in a `u32`: bit `j` is the
//! coefficient of `x^j`. Addition is XOR. Multiplication goes through exp/log
//! tables for `m <= 16` and a shift-and-reduce carry-less product above that.

mod tower;

pub use tower::Tower;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 24;
const TABLE_DEGREE: u32 = 16;

/// A finite field GF(2^m) with a fixed irreducible modulus.
///
/// Cheap to clone; the descriptor is immutable and shared.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

struct Inner {
    degree: u32,
    modulus: u32,
    tables: Option<Tables>,
}

struct Tables {
    /// `exp[j] = g^j` for `j < 2 (2^m - 1)`, doubled so sums of logs need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// An element tagged with the field it belongs to, for the checked API.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub bits: u32,
    degree: u32,
    modulus: u32,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.degree(), self.modulus())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.degree() == other.degree() && self.modulus() == other.modulus()
    }
}

impl Eq for Field {}

/// Carry-less product of two polynomials of degree < 32.
fn clmul(a: u32, b: u32) -> u64 {
    let a = a as u64;
    let mut b = b;
    let mut acc = 0u64;
    while b != 0 {
        let j = b.trailing_zeros();
        acc ^= a << j;
        b &= b - 1;
    }
    acc
}

fn degree_of(p: u64) -> u32 {
    63 - p.leading_zeros()
}

/// Remainder of `a` modulo the nonzero polynomial `b`.
fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = degree_of(b);
    while a != 0 && degree_of(a) >= db {
        a ^= b << (degree_of(a) - db);
    }
    a
}

/// Exhaustive factor check: no polynomial of degree `1..=m/2` divides `p`.
pub fn is_irreducible(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let m = degree_of(p as u64);
    for d in 1..=m / 2 {
        for low in 0..(1u64 << d) {
            let f = (1u64 << d) | low;
            if poly_rem(p as u64, f) == 0 {
                return false;
            }
        }
    }
    true
}

/// The numerically smallest irreducible polynomial of degree `m`.
pub fn default_modulus(m: u32) -> Result<u32> {
    if !(1..=MAX_DEGREE).contains(&m) {
        return Err(Error::UnsupportedDegree(m));
    }
    (1u32 << m..1u32 << (m + 1))
        .find(|&p| is_irreducible(p))
        .ok_or(Error::UnsupportedDegree(m))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Field {
    /// GF(2^m) with the given modulus, or the default one when `None`.
    pub fn new(m: u32, modulus: Option<u32>) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::UnsupportedDegree(m));
        }
        let modulus = match modulus {
            Some(p) => {
                if p >> m != 1 || !is_irreducible(p) {
                    return Err(Error::IrreducibleCheckFailed {
                        degree: m,
                        modulus: p,
                    });
                }
                p
            }
            None => default_modulus(m)?,
        };
        let mut inner = Inner {
            degree: m,
            modulus,
            tables: None,
        };
        if m <= TABLE_DEGREE {
            inner.tables = Some(build_tables(&inner));
        }
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    pub fn with_default_modulus(m: u32) -> Result<Self> {
        Self::new(m, None)
    }

    pub fn degree(&self) -> u32 {
        self.inner.degree
    }

    pub fn modulus(&self) -> u32 {
        self.inner.modulus
    }

    /// Number of elements, `2^m`.
    pub fn order(&self) -> u32 {
        1 << self.inner.degree
    }

    pub fn mask(&self) -> u32 {
        self.order() - 1
    }

    pub fn has_tables(&self) -> bool {
        self.inner.tables.is_some()
    }

    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.order()
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.inner.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        poly_rem(clmul(a, b), self.inner.modulus as u64) as u32
    }

    pub fn square(&self, a: u32) -> u32 {
        self.mul(a, a)
    }

    pub fn pow(&self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(match &self.inner.tables {
            Some(t) => {
                let n = self.order() - 1;
                t.exp[((n - t.log[a as usize]) % n) as usize]
            }
            None => self.pow(a, self.order() as u64 - 2),
        })
    }

    /// `a^(2^i)` by `i mod m` repeated squarings.
    pub fn frob_pow(&self, a: u32, i: u32) -> u32 {
        let mut a = a;
        for _ in 0..i % self.degree() {
            a = self.square(a);
        }
        a
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: u32) -> u64 {
        let n = self.order() as u64 - 1;
        let mut ord = n;
        for p in prime_factors(n) {
            while ord.is_multiple_of(p) && self.pow(a, ord / p) == 1 {
                ord /= p;
            }
        }
        ord
    }

    /// The smallest element (as an integer) generating the multiplicative group.
    pub fn primitive_element(&self) -> u32 {
        primitive_element(&self.inner)
    }

    pub fn elem(&self, bits: u32) -> FieldElement {
        FieldElement {
            bits: bits & self.mask(),
            degree: self.degree(),
            modulus: self.modulus(),
        }
    }

    pub fn owns(&self, a: &FieldElement) -> bool {
        a.degree == self.degree() && a.modulus == self.modulus()
    }

    pub fn mul_elem(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        if !self.owns(&a) || !self.owns(&b) {
            return Err(Error::FieldMismatch);
        }
        Ok(self.elem(self.mul(a.bits, b.bits)))
    }

    pub fn inv_elem(&self, a: FieldElement) -> Result<FieldElement> {
        if !self.owns(&a) {
            return Err(Error::FieldMismatch);
        }
        Ok(self.elem(self.inv(a.bits)?))
    }

    pub fn frob_pow_elem(&self, a: FieldElement, i: u32) -> Result<FieldElement> {
        if !self.owns(&a) {
            return Err(Error::FieldMismatch);
        }
        Ok(self.elem(self.frob_pow(a.bits, i)))
    }
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement> {
        if self.degree != other.degree || self.modulus != other.modulus {
            return Err(Error::FieldMismatch);
        }
        Ok(FieldElement {
            bits: self.bits ^ other.bits,
            ..self
        })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.bits)
    }
}

fn primitive_element(inner: &Inner) -> u32 {
    let probe = Field {
        inner: Arc::new(Inner {
            degree: inner.degree,
            modulus: inner.modulus,
            tables: None,
        }),
    };
    let n = probe.order() as u64 - 1;
    if n == 1 {
        return 1;
    }
    (2..probe.order())
        .find(|&g| probe.order_of(g) == n)
        .expect("the multiplicative group of a finite field is cyclic")
}

fn build_tables(inner: &Inner) -> Tables {
    let g = primitive_element(inner);
    let n = (1usize << inner.degree) - 1;
    let mut exp = vec![0u32; 2 * n];
    let mut log = vec![0u32; n + 1];
    let mut x = 1u32;
    for j in 0..n {
        exp[j] = x;
        exp[j + n] = x;
        log[x as usize] = j as u32;
        x = poly_rem(clmul(x, g), inner.modulus as u64) as u32;
    }
    Tables { exp, log }
}

/// Lowercase hex of the bit-vector, LSB = constant coefficient.
pub fn to_hex(bits: u32) -> String {
    format!("{bits:x}")
}

pub fn from_hex(s: &str) -> Result<u32> {
    if s.is_empty() || s.len() > 8 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::ParseError(format!(
            "malformed hex field element {s:?}"
        )));
    }
    u32::from_str_radix(s, 16).map_err(|e| Error::ParseError(e.to_string()))
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
