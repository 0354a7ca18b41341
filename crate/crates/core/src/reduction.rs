//! Field reduction between PG(2, q^k), PG(2k, q) and PG(2hk, 2).
//!
//! Coordinates of PG(2k, q) are laid out as `F_q ⊕ F_{q^k} ⊕ F_{q^k}` and the
//! hyperplane at infinity is `X_0 = 0`. A point at infinity is stored with the
//! same packed value in PG(2k−1, q), so `h_inf` points and the points of
//! `X_0 = 0` in `pi_q` are interchangeable.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Tower};
use crate::projective::{Point, ProjSpace, Subspace};

/// A partition of PG(N, q) into subspaces of equal dimension, with an eager
/// point-to-element index.
#[derive(Clone, Debug)]
pub struct Spread {
    space: ProjSpace,
    elements: Vec<Subspace>,
    /// Element index of every point, by enumeration index.
    index: Vec<u32>,
}

impl Spread {
    /// Checks that `elements` partition the points of `space`.
    pub fn new(space: &ProjSpace, elements: Vec<Subspace>, budget: u128) -> Result<Self> {
        let total = space.point_count();
        if total > budget {
            return Err(Error::EnumerationTooLarge {
                required: total,
                budget,
            });
        }
        let invalid = |reason: String| Err(Error::InvalidSpread { reason });
        let Some(rank) = elements.first().map(Subspace::rank) else {
            return invalid("no elements".into());
        };
        if let Some((i, e)) = elements
            .iter()
            .enumerate()
            .find(|(_, e)| e.rank() != rank || e.ambient() != space.dim())
        {
            return invalid(format!(
                "element {i} has rank {} in PG({}, q)",
                e.rank(),
                e.ambient()
            ));
        }
        let per = elements[0].point_count(space);
        if per * elements.len() as u128 != total {
            return invalid(format!(
                "{} elements of {per} points cannot cover {total} points",
                elements.len()
            ));
        }
        let mut index = vec![u32::MAX; total as usize];
        for (i, e) in elements.iter().enumerate() {
            for p in e.points(space) {
                let slot = &mut index[space.index_of(p)];
                if *slot != u32::MAX {
                    return invalid(format!("elements {} and {i} share the point {p:?}", *slot));
                }
                *slot = i as u32;
            }
        }
        Ok(Self {
            space: space.clone(),
            elements,
            index,
        })
    }

    pub fn space(&self) -> &ProjSpace {
        &self.space
    }

    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &Subspace {
        &self.elements[i]
    }

    /// Index of the element containing `p`.
    #[inline]
    pub fn element_of(&self, p: Point) -> usize {
        self.index[self.space.index_of(p)] as usize
    }

    /// Index of `s` if it is an element.
    pub fn position(&self, s: &Subspace) -> Option<usize> {
        let first = self.space.point_of(*s.rows().first()?).ok()?;
        let i = self.element_of(first);
        (self.elements[i] == *s).then_some(i)
    }
}

/// Packs the big-field coordinates `x` as `r·k` coordinates over the small field.
pub fn reduce_vector(tower: &Tower, x: &[u32]) -> u128 {
    let kh = tower.hk();
    x.iter()
        .fold(0u128, |acc, &c| (acc << kh) | tower.vec_packed(c) as u128)
}

/// Inverse of [`reduce_vector`] for `r` big-field coordinates.
pub fn unreduce_vector(tower: &Tower, v: u128, r: usize) -> Vec<u32> {
    let kh = tower.hk();
    let mask = (1u128 << kh) - 1;
    (0..r)
        .map(|i| tower.unvec_packed(((v >> (kh as usize * (r - 1 - i))) & mask) as u64))
        .collect()
}

/// The Desarguesian (k−1)-spread of PG(rk−1, q) obtained from PG(r−1, q^k):
/// one element `{(αx_0, …, αx_{r−1}) : α ∈ F_{q^k}}` per point `x`, in the
/// enumeration order of PG(r−1, q^k).
pub fn field_reduction_spread(tower: &Tower, r: usize, budget: u128) -> Result<Spread> {
    if r < 2 {
        return Err(Error::UnsupportedDimension {
            dim: r.saturating_sub(1),
            degree: tower.hk(),
        });
    }
    let base = ProjSpace::new(r - 1, tower.big().clone())?;
    let ambient = ProjSpace::new(r * tower.k() as usize - 1, tower.small().clone())?;
    let points: Vec<Point> = base.points(budget)?.collect();
    let elements: Vec<Subspace> = points
        .par_iter()
        .map(|&x| {
            let coords = base.coords(x);
            ambient.span_vectors(tower.basis().iter().map(|&b| {
                let scaled: Vec<u32> = coords.iter().map(|&c| tower.big().mul(b, c)).collect();
                reduce_vector(tower, &scaled)
            }))
        })
        .collect();
    Spread::new(&ambient, elements, budget)
}

/// Reverses each `h`-bit block of a packed vector: the expansion of every
/// GF(2^h) coordinate into `h` binary coordinates, constant term first.
#[inline]
pub fn expand_bits(v: u128, coords: usize, h: u32) -> u128 {
    if h == 1 {
        return v;
    }
    let mask = (1u128 << h) - 1;
    let mut out = 0u128;
    for c in 0..coords {
        let s = c as u32 * h;
        let block = ((v >> s) & mask) as u32;
        out |= ((block.reverse_bits() >> (32 - h)) as u128) << s;
    }
    out
}

/// The three models PG(2, q^k), PG(2k, q), PG(2hk, 2) and the maps between them.
#[derive(Clone, Debug)]
pub struct CorrespondenceMaps {
    tower: Tower,
    plane: ProjSpace,
    line_at_infinity: ProjSpace,
    pi_q: ProjSpace,
    h_inf: ProjSpace,
    pi_2: ProjSpace,
    h_inf_2: ProjSpace,
}

impl CorrespondenceMaps {
    pub fn new(tower: Tower) -> Result<Self> {
        let k = tower.k() as usize;
        let hk = tower.hk() as usize;
        let f2 = Field::with_default_modulus(1)?;
        Ok(Self {
            plane: ProjSpace::new(2, tower.big().clone())?,
            line_at_infinity: ProjSpace::new(1, tower.big().clone())?,
            pi_q: ProjSpace::new(2 * k, tower.small().clone())?,
            h_inf: ProjSpace::new(2 * k - 1, tower.small().clone())?,
            pi_2: ProjSpace::new(2 * hk, f2.clone())?,
            h_inf_2: ProjSpace::new(2 * hk - 1, f2)?,
            tower,
        })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    /// PG(2, q^k).
    pub fn plane(&self) -> &ProjSpace {
        &self.plane
    }

    /// The line `X_0 = 0` of PG(2, q^k), as PG(1, q^k).
    pub fn line_at_infinity(&self) -> &ProjSpace {
        &self.line_at_infinity
    }

    /// PG(2k, q).
    pub fn pi_q(&self) -> &ProjSpace {
        &self.pi_q
    }

    /// The hyperplane at infinity of PG(2k, q), as PG(2k−1, q).
    pub fn h_inf(&self) -> &ProjSpace {
        &self.h_inf
    }

    /// PG(2hk, 2).
    pub fn pi_2(&self) -> &ProjSpace {
        &self.pi_2
    }

    /// The hyperplane at infinity of PG(2hk, 2), as PG(2hk−1, 2).
    pub fn h_inf_2(&self) -> &ProjSpace {
        &self.h_inf_2
    }

    /// Packed value of the leading affine coordinate in PG(2k, q).
    pub fn affine_one(&self) -> u128 {
        1u128 << (2 * self.tower.hk())
    }

    /// `(1, t, s) ↦ (1, vec t, vec s)`.
    pub fn abb_affine_map(&self, p: Point) -> Result<Point> {
        let c = self.plane.coords(p);
        if c[0] == 0 {
            return Err(Error::NotAffine);
        }
        Ok(self
            .pi_q
            .point_unchecked(self.affine_one() | reduce_vector(&self.tower, &c[1..])))
    }

    /// Inverse of [`Self::abb_affine_map`].
    pub fn abb_affine_preimage(&self, p: Point) -> Result<Point> {
        let v = p.raw();
        if v & self.affine_one() == 0 {
            return Err(Error::NotAffine);
        }
        let mut c = vec![1];
        c.extend(unreduce_vector(&self.tower, v ^ self.affine_one(), 2));
        self.plane.normalize(&c)
    }

    /// The spread element `{(0, vec αx_1, vec αx_2)}` of `H∞` for a point of `ℓ∞`.
    pub fn direction_spread_element(&self, p: Point) -> Result<Subspace> {
        let c = self.plane.coords(p);
        if c[0] != 0 {
            return Err(Error::NotAtInfinity);
        }
        Ok(self.spread_element_of(&c[1..]))
    }

    fn spread_element_of(&self, x: &[u32]) -> Subspace {
        let big = self.tower.big();
        self.h_inf.span_vectors(
            self.tower
                .basis()
                .iter()
                .map(|&b| reduce_vector(&self.tower, &[big.mul(b, x[0]), big.mul(b, x[1])])),
        )
    }

    /// The point of `ℓ∞` whose spread element contains the point `d` of `H∞`.
    pub fn spread_point(&self, d: Point) -> Point {
        let x = unreduce_vector(&self.tower, d.raw(), 2);
        self.line_at_infinity
            .normalize(&x)
            .expect("a nonzero vector reduces to a nonzero vector")
    }

    /// `(1, v) ↦ (1, bits v)`.
    pub fn bc_affine_map(&self, p: Point) -> Result<Point> {
        let v = p.raw();
        if v & self.affine_one() == 0 {
            return Err(Error::NotAffine);
        }
        let bits = self.bits(v ^ self.affine_one());
        Ok(self
            .pi_2
            .point_unchecked((1u128 << (2 * self.tower.hk())) | bits))
    }

    /// Binary expansion of a vector of `F_q^{2k}`.
    #[inline]
    pub fn bits(&self, v: u128) -> u128 {
        expand_bits(v, 2 * self.tower.k() as usize, self.tower.h())
    }

    /// Inverse of [`Self::bits`] (the expansion is an involution on packed values).
    #[inline]
    pub fn unbits(&self, x: u128) -> u128 {
        self.bits(x)
    }

    /// The element of the (h−1)-spread S′ of PG(2hk−1, 2) for a point of `H∞`
    /// given in PG(2k, q).
    pub fn bc_spread_of(&self, p: Point) -> Result<Subspace> {
        if p.raw() & self.affine_one() != 0 {
            return Err(Error::NotAtInfinity);
        }
        Ok(self.s_prime_element(p))
    }

    /// The S′ element `{bits(λd) : λ ∈ F_q}` for a point `d` of `H∞`.
    pub fn s_prime_element(&self, d: Point) -> Subspace {
        let h = self.tower.h();
        self.h_inf_2
            .span_vectors((0..h).map(|t| self.bits(self.h_inf.scale(d.raw(), 1 << t))))
    }

    /// The point of `H∞` labelling the S′ element through a nonzero binary vector.
    #[inline]
    pub fn s_prime_point(&self, x: u128) -> Point {
        self.h_inf
            .point_of(self.unbits(x))
            .expect("a nonzero binary vector expands a nonzero vector")
    }

    /// S′ as an explicit spread, via field reduction of GF(q) over GF(2).
    pub fn s_prime(&self, budget: u128) -> Result<Spread> {
        let t = Tower::from_fields(
            Field::with_default_modulus(1)?,
            self.tower.small().clone(),
            self.tower.h(),
        )?;
        field_reduction_spread(&t, 2 * self.tower.k() as usize, budget)
    }

    /// The (hk−1)-spread S̃ of PG(2hk−1, 2) from reducing `ℓ∞` over GF(2)
    /// directly, in the coordinates of the polynomial basis of GF(q^k).
    pub fn s_tilde(&self, budget: u128) -> Result<Spread> {
        let t = Tower::from_fields(
            Field::with_default_modulus(1)?,
            self.tower.big().clone(),
            self.tower.hk(),
        )?;
        field_reduction_spread(&t, 2, budget)
    }

    /// Whether every element of S′ lies in exactly one element of S̃.
    pub fn subspread_compatible(&self, budget: u128) -> Result<bool> {
        let s_prime = self.s_prime(budget)?;
        let s_tilde = self.s_tilde(budget)?;
        let direct = Tower::from_fields(
            Field::with_default_modulus(1)?,
            self.tower.big().clone(),
            self.tower.hk(),
        )?;
        let hk = self.tower.hk();
        let half = (1u128 << hk) - 1;
        // Binary coordinates of the two-step reduction to the direct one.
        let change = |x: u128| -> u128 {
            let v = self.unbits(x);
            let hi = self.tower.unvec_packed((v >> hk) as u64);
            let lo = self.tower.unvec_packed((v & half) as u64);
            ((direct.vec_packed(hi) as u128) << hk) | direct.vec_packed(lo) as u128
        };
        Ok(s_prime.elements().iter().all(|e| {
            let rows: Vec<u128> = e.rows().iter().map(|&r| change(r)).collect();
            let first = s_tilde.element_of(s_tilde.space().point_of(rows[0]).expect("nonzero"));
            let target = s_tilde.element(first);
            rows.iter()
                .all(|&r| s_tilde.space().reduce(target.rows(), r) == 0)
        }))
    }
}
