use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Field;
use crate::error::{Error, Result};
use crate::f2;

/// The tower `GF(2) ⊂ GF(q) ⊂ GF(q^k)` with `q = 2^h`.
///
/// `GF(q)` is embedded in `GF(q^k)` by sending the class of `x` in the small
/// field to a fixed root of the small modulus. `GF(q^k)` is coordinatized over
/// `GF(q)` by the polynomial basis `1, x, ..., x^(k-1)` of the big field.
///
/// Coordinate vectors are packed `h` bits per coordinate, coordinate 0 in the
/// most significant slot, matching the layout used by [`crate::projective`].
#[derive(Clone, Debug)]
pub struct Tower {
    h: u32,
    k: u32,
    big: Field,
    small: Field,
    embed: Vec<u32>,
    basis: Vec<u32>,
    /// Byte-indexed lookup tables for `vec` (big element bits -> packed coordinates).
    vec_tables: Vec<[u64; 256]>,
    /// Byte-indexed lookup tables for `unvec`.
    unvec_tables: Vec<[u32; 256]>,
}

fn byte_tables<T: Copy + Default + std::ops::BitXor<Output = T>>(columns: &[T]) -> Vec<[T; 256]> {
    columns
        .chunks(8)
        .map(|chunk| {
            let mut table = [T::default(); 256];
            for byte in 1..256usize {
                let low = byte.trailing_zeros() as usize;
                let rest = byte & (byte - 1);
                let col = chunk.get(low).copied().unwrap_or_default();
                table[byte] = table[rest] ^ col;
            }
            table
        })
        .collect()
}

impl Tower {
    pub fn new(h: u32, k: u32) -> Result<Self> {
        if h == 0 || k == 0 || h * k > super::MAX_DEGREE {
            return Err(Error::UnsupportedDegree(h * k));
        }
        let big = Field::with_default_modulus(h * k)?;
        let small = Field::with_default_modulus(h)?;
        Self::from_fields(small, big, k)
    }

    /// Builds the tower from explicit fields; `big` must have degree `h * k`.
    pub fn from_fields(small: Field, big: Field, k: u32) -> Result<Self> {
        let h = small.degree();
        if big.degree() != h * k {
            return Err(Error::UnsupportedDegree(big.degree()));
        }
        let root = subfield_root(&small, &big);
        let embed: Vec<u32> = small
            .elements()
            .map(|a| {
                (0..h)
                    .filter(|j| a >> j & 1 == 1)
                    .fold(0, |acc, j| acc ^ big.pow(root, j as u64))
            })
            .collect();
        check_embedding(&small, &big, &embed)?;

        let basis: Vec<u32> = (0..k).map(|j| big.pow(0b10, j as u64)).collect();
        let hk = (h * k) as usize;
        // Column for packed bit p: coordinate j = k-1-p/h, bit t = p%h.
        let unvec_cols: Vec<u32> = (0..hk)
            .map(|p| {
                let j = k as usize - 1 - p / h as usize;
                let t = p % h as usize;
                big.mul(embed[1 << t], basis[j])
            })
            .collect();
        let vec_cols =
            f2::invert_columns(&unvec_cols.iter().map(|&c| c as u64).collect::<Vec<_>>())
                .ok_or(Error::SingularMatrix)?;
        Ok(Self {
            h,
            k,
            big,
            small,
            embed,
            basis,
            vec_tables: byte_tables(&vec_cols),
            unvec_tables: byte_tables(&unvec_cols),
        })
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn hk(&self) -> u32 {
        self.h * self.k
    }

    /// `GF(q^k)`.
    pub fn big(&self) -> &Field {
        &self.big
    }

    /// `GF(q)`.
    pub fn small(&self) -> &Field {
        &self.small
    }

    pub fn q(&self) -> u32 {
        self.small.order()
    }

    pub fn embed(&self, a: u32) -> u32 {
        self.embed[a as usize]
    }

    /// Inverse of the embedding on its image.
    pub fn unembed(&self, t: u32) -> Option<u32> {
        self.embed.iter().position(|&e| e == t).map(|p| p as u32)
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    /// Packed `GF(q)`-coordinates of `t` over the basis.
    pub fn vec_packed(&self, t: u32) -> u64 {
        let mut out = 0;
        for (i, table) in self.vec_tables.iter().enumerate() {
            out ^= table[(t >> (8 * i) & 0xff) as usize];
        }
        out
    }

    pub fn unvec_packed(&self, v: u64) -> u32 {
        let mut out = 0;
        for (i, table) in self.unvec_tables.iter().enumerate() {
            out ^= table[(v >> (8 * i) & 0xff) as usize];
        }
        out
    }

    /// Coordinates of `t` over the basis, coordinate 0 first.
    pub fn vec(&self, t: u32) -> Vec<u32> {
        let packed = self.vec_packed(t);
        let mask = (1u64 << self.h) - 1;
        (0..self.k)
            .map(|j| ((packed >> (self.h * (self.k - 1 - j))) & mask) as u32)
            .collect()
    }

    pub fn unvec(&self, coords: &[u32]) -> u32 {
        coords
            .iter()
            .zip(&self.basis)
            .fold(0, |acc, (&c, &b)| acc ^ self.big.mul(self.embed(c), b))
    }
}

/// A root of the small modulus inside the big field, found among the powers of
/// a generator of the unique subfield of order `2^h`. Smallest such root wins.
fn subfield_root(small: &Field, big: &Field) -> u32 {
    let h = small.degree();
    if h == 1 {
        // x + 1 has root 1; x has root 0.
        return if small.modulus() == 0b11 { 1 } else { 0 };
    }
    let n_big = big.order() as u64 - 1;
    let n_small = small.order() as u64 - 1;
    let z = big.pow(big.primitive_element(), n_big / n_small);
    let eval = |x: u32| {
        (0..=h)
            .filter(|j| small.modulus() >> j & 1 == 1)
            .fold(0, |acc, j| acc ^ big.pow(x, j as u64))
    };
    let mut best = None;
    let mut power = 1u32;
    for _ in 0..n_small {
        if eval(power) == 0 {
            best = Some(best.map_or(power, |b: u32| b.min(power)));
        }
        power = big.mul(power, z);
    }
    best.expect("the subfield of order 2^h contains every root of a degree-h irreducible")
}

fn check_embedding(small: &Field, big: &Field, embed: &[u32]) -> Result<()> {
    let ok = |a: u32, b: u32| {
        embed[(a ^ b) as usize] == embed[a as usize] ^ embed[b as usize]
            && embed[small.mul(a, b) as usize] == big.mul(embed[a as usize], embed[b as usize])
    };
    let good = if small.degree() <= 4 {
        small.elements().all(|a| small.elements().all(|b| ok(a, b)))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x70_77_65_72);
        (0..4096).all(|_| {
            ok(
                rng.gen_range(0..small.order()),
                rng.gen_range(0..small.order()),
            )
        })
    };
    if good && embed[1] == 1 {
        Ok(())
    } else {
        Err(Error::SingularMatrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_3_2_embedding_is_a_ring_map() {
        let t = Tower::new(3, 2).unwrap();
        assert_eq!(t.small().order(), 8);
        assert_eq!(t.big().order(), 64);
        // The image is the fixed field of t -> t^8, and the generator image has order 7.
        let image: Vec<u32> = t.small().elements().map(|a| t.embed(a)).collect();
        let mut fixed: Vec<u32> = t
            .big()
            .elements()
            .filter(|&x| t.big().frob_pow(x, 3) == x)
            .collect();
        let mut sorted = image.clone();
        sorted.sort();
        fixed.sort();
        assert_eq!(sorted, fixed);
        assert_eq!(t.big().order_of(t.embed(0b10)), 7);
    }

    #[test]
    fn trivial_small_field() {
        let t = Tower::new(1, 5).unwrap();
        assert_eq!(t.embed(0), 0);
        assert_eq!(t.embed(1), 1);
        assert_eq!(t.small().order(), 2);
    }

    #[test]
    fn tower_4_2_image_is_fixed_field() {
        let t = Tower::new(4, 2).unwrap();
        for a in t.small().elements() {
            let e = t.embed(a);
            assert_eq!(t.big().frob_pow(e, 4), e);
        }
    }

    #[test]
    fn vec_examples() {
        let t = Tower::new(3, 2).unwrap();
        assert_eq!(t.vec(0), vec![0, 0]);
        for (j, &b) in t.basis().iter().enumerate() {
            let mut unit = vec![0; 2];
            unit[j] = 1;
            assert_eq!(t.vec(b), unit);
        }
        for x in t.big().elements() {
            assert_eq!(t.unvec(&t.vec(x)), x);
            assert_eq!(t.unvec_packed(t.vec_packed(x)), x);
        }
    }

    #[test]
    fn vec_is_small_field_linear() {
        let t = Tower::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = rng.gen_range(0..64);
            let b = rng.gen_range(0..64);
            let c = rng.gen_range(0..8);
            let sum: Vec<u32> = t.vec(a).iter().zip(t.vec(b)).map(|(x, y)| x ^ y).collect();
            assert_eq!(t.vec(a ^ b), sum);
            let scaled: Vec<u32> = t.vec(a).iter().map(|&x| t.small().mul(c, x)).collect();
            assert_eq!(t.vec(t.big().mul(t.embed(c), a)), scaled);
        }
    }

    #[test]
    fn larger_towers_build() {
        for (h, k) in [(2, 3), (3, 3), (4, 3), (2, 4), (5, 2), (6, 2)] {
            let t = Tower::new(h, k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(h as u64 * 31 + k as u64);
            for _ in 0..200 {
                let x = rng.gen_range(0..t.big().order());
                assert_eq!(t.unvec(&t.vec(x)), x);
            }
        }
        assert!(Tower::new(5, 5).is_err());
    }
}
