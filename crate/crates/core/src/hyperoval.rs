//! Translation hyperovals `{(1, t, t^{2^i})} ∪ {(0,1,0), (0,0,1)}` of PG(2, q^k)
//! and their affine images in PG(2k, q).

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{gcd, Tower};
use crate::projective::{Point, PointSet, ProjSpace};
use crate::reduction::CorrespondenceMaps;

/// Parameters `(h, k, i)` of the hyperoval `t ↦ t^{2^i}` over GF(2^{hk}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HyperovalSpec {
    pub h: u32,
    pub k: u32,
    pub i: u32,
    /// Requires `gcd(i, hk) = 1`.
    pub strict: bool,
}

impl HyperovalSpec {
    pub fn new(h: u32, k: u32, i: u32) -> Self {
        Self {
            h,
            k,
            i,
            strict: true,
        }
    }

    /// A spec that skips the gcd hypothesis, for negative controls.
    pub fn nonstrict(h: u32, k: u32, i: u32) -> Self {
        Self {
            h,
            k,
            i,
            strict: false,
        }
    }

    pub fn hk(&self) -> u32 {
        self.h * self.k
    }

    pub fn gcd(&self) -> u32 {
        gcd(self.i, self.hk())
    }

    pub fn validate(&self) -> Result<()> {
        if self.strict && self.gcd() != 1 {
            return Err(Error::GcdHypothesisViolated {
                i: self.i,
                hk: self.hk(),
                gcd: self.gcd(),
            });
        }
        Ok(())
    }

    /// The converse results are stated for `h > 2` and `k ≥ 2`.
    pub fn in_theorem_scope(&self) -> bool {
        self.h > 2 && self.k >= 2
    }
}

/// Distinct affine points of PG(2k, q), sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePointSet {
    space: ProjSpace,
    points: Vec<Point>,
}

impl AffinePointSet {
    pub fn new(space: &ProjSpace, mut points: Vec<Point>) -> Result<Self> {
        if points
            .iter()
            .any(|p| p.raw() >> (space.dim() as u32 * space.width()) != 1)
        {
            return Err(Error::NotAffine);
        }
        points.sort_unstable();
        points.dedup();
        Ok(Self {
            space: space.clone(),
            points,
        })
    }

    pub fn space(&self) -> &ProjSpace {
        &self.space
    }

    /// The hyperplane at infinity `X_0 = 0`, as a projective space of one
    /// dimension less with the same packing.
    pub fn h_inf(&self) -> ProjSpace {
        ProjSpace::new(self.space.dim() - 1, self.space.field().clone())
            .expect("smaller than the ambient space")
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    /// Packed value of the leading coordinate.
    pub fn one(&self) -> u128 {
        1u128 << (self.space.dim() as u32 * self.space.width())
    }

    /// The set with `old` replaced by `new`.
    pub fn with_replaced(&self, old: Point, new: Point) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|&p| if p == old { new } else { p })
            .collect();
        Self::new(&self.space, points)
    }
}

/// Points of the hyperplane at infinity determined by pairs of an affine set.
#[derive(Clone, Debug)]
pub struct DirectionSet {
    points: Vec<Point>,
    members: PointSet,
}

impl DirectionSet {
    pub fn new(space: &ProjSpace, points: Vec<Point>) -> Self {
        let members = PointSet::from_points(space, points);
        Self {
            points: members.to_sorted_vec(),
            members,
        }
    }

    pub fn space(&self) -> &ProjSpace {
        self.members.space()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.members.contains(p)
    }
}

/// A translation hyperoval in PG(2, q^k) with its image `Q` in PG(2k, q).
#[derive(Clone, Debug)]
pub struct Hyperoval {
    pub spec: HyperovalSpec,
    pub maps: CorrespondenceMaps,
    /// The `q^k + 2` points in PG(2, q^k).
    pub plane_points: Vec<Point>,
    /// The affine part mapped into PG(2k, q).
    pub affine: AffinePointSet,
}

pub fn build_hyperoval(spec: HyperovalSpec) -> Result<Hyperoval> {
    spec.validate()?;
    let maps = CorrespondenceMaps::new(Tower::new(spec.h, spec.k)?)?;
    let big = maps.tower().big().clone();
    let plane = maps.plane().clone();
    let mut plane_points: Vec<Point> = big
        .elements()
        .map(|t| plane.normalize(&[1, t, big.frob_pow(t, spec.i)]))
        .collect::<Result<_>>()?;
    let affine = plane_points
        .iter()
        .map(|&p| maps.abb_affine_map(p))
        .collect::<Result<Vec<_>>>()?;
    plane_points.push(plane.normalize(&[0, 1, 0])?);
    plane_points.push(plane.normalize(&[0, 0, 1])?);
    plane_points.sort_unstable();
    let affine = AffinePointSet::new(maps.pi_q(), affine)?;
    Ok(Hyperoval {
        spec,
        maps,
        plane_points,
        affine,
    })
}

/// Three collinear points of `points`, if any.
pub fn find_collinear_triple(space: &ProjSpace, points: &[Point]) -> Result<Option<[Point; 3]>> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let mut first_pair: FxHashMap<[u128; 2], (Point, Point)> = FxHashMap::default();
    for (x, &a) in points.iter().enumerate() {
        for &b in &points[x + 1..] {
            let Some(key) = space.line_key(a.raw(), b.raw()) else {
                continue;
            };
            if let Some(&(c, d)) = first_pair.get(&key) {
                let third = if c != a && c != b { c } else { d };
                let mut triple = [a, b, third];
                triple.sort_unstable();
                return Ok(Some(triple));
            }
            first_pair.insert(key, (a, b));
        }
    }
    Ok(None)
}

pub fn is_arc(space: &ProjSpace, points: &[Point]) -> Result<bool> {
    Ok(find_collinear_triple(space, points)?.is_none())
}

/// All directions `⟨P − R⟩` for distinct `P, R` in `q`.
pub fn directions(q: &AffinePointSet) -> DirectionSet {
    let h_inf = q.h_inf();
    let pts = q.points();
    let found: Vec<Point> = (0..pts.len())
        .into_par_iter()
        .fold(Vec::new, |mut acc, x| {
            for &b in &pts[x + 1..] {
                acc.push(
                    h_inf
                        .point_of(pts[x].raw() ^ b.raw())
                        .expect("distinct points"),
                );
            }
            acc
        })
        .reduce(Vec::new, |mut a, b| {
            a.extend(b);
            a
        });
    DirectionSet::new(&h_inf, found)
}

/// Outcome of the closure test `P_1 + P_2 + P_0 ∈ Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub holds: bool,
    /// First `(P_1, P_2)` in scan order whose sum with `P_0` leaves `Q`.
    pub witness: Option<(Point, Point)>,
}

/// Whether the affine parts of `q` form a coset of an F₂-subspace.
pub fn translation_closure_check(q: &AffinePointSet) -> ClosureReport {
    let pts = q.points();
    let Some(&p0) = pts.first() else {
        return ClosureReport {
            holds: true,
            witness: None,
        };
    };
    let witness = (0..pts.len())
        .into_par_iter()
        .find_first(|&x| {
            pts[x..]
                .iter()
                .any(|&b| !q.contains(Point(pts[x].raw() ^ b.raw() ^ p0.raw())))
        })
        .map(|x| {
            let b = *pts[x..]
                .iter()
                .find(|&&b| !q.contains(Point(pts[x].raw() ^ b.raw() ^ p0.raw())))
                .expect("found above");
            (pts[x], b)
        });
    ClosureReport {
        holds: witness.is_none(),
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::DEFAULT_BUDGET;
    use rand::{Rng, SeedableRng};

    #[test]
    fn sizes() {
        let h = build_hyperoval(HyperovalSpec::new(3, 2, 1)).unwrap();
        assert_eq!(h.plane_points.len(), 66);
        assert_eq!(h.affine.len(), 64);
        let h = build_hyperoval(HyperovalSpec::new(4, 2, 1)).unwrap();
        assert_eq!(h.plane_points.len(), 258);
        assert_eq!(h.affine.len(), 256);
        assert_eq!(
            build_hyperoval(HyperovalSpec::new(4, 2, 2)).unwrap_err(),
            Error::GcdHypothesisViolated {
                i: 2,
                hk: 8,
                gcd: 2
            }
        );
        assert!(build_hyperoval(HyperovalSpec::nonstrict(4, 2, 2)).is_ok());
    }

    #[test]
    fn hyperovals_are_arcs() {
        for (h, k, i) in [
            (3, 2, 1),
            (3, 2, 5),
            (4, 2, 1),
            (4, 2, 3),
            (3, 3, 1),
            (3, 3, 2),
        ] {
            let ho = build_hyperoval(HyperovalSpec::new(h, k, i)).unwrap();
            assert!(
                is_arc(ho.maps.plane(), &ho.plane_points).unwrap(),
                "{h} {k} {i}"
            );
            assert!(
                is_arc(ho.maps.pi_q(), ho.affine.points()).unwrap(),
                "{h} {k} {i}"
            );
        }
    }

    #[test]
    fn conic_control_is_not_an_arc_plus_nucleus() {
        // i = 0 gives the line X_1 = X_2.
        let ho = build_hyperoval(HyperovalSpec::nonstrict(3, 2, 0)).unwrap();
        assert!(!is_arc(ho.maps.plane(), &ho.plane_points).unwrap());
    }

    #[test]
    fn collinear_witness() {
        let s = ProjSpace::new(3, crate::field::Field::with_default_modulus(3).unwrap()).unwrap();
        let p = s.normalize(&[1, 2, 3, 4]).unwrap();
        let r = s.normalize(&[0, 1, 5, 6]).unwrap();
        let line = s.line_through(p, r).unwrap();
        let third = *line.points.iter().find(|&&x| x != p && x != r).unwrap();
        let mut want = [p, r, third];
        want.sort_unstable();
        assert_eq!(
            find_collinear_triple(&s, &[p, r, third]).unwrap(),
            Some(want)
        );
        assert_eq!(
            find_collinear_triple(&s, &[p, r]).unwrap_err(),
            Error::TooFewPoints(2)
        );
    }

    #[test]
    fn direction_counts() {
        let ho = build_hyperoval(HyperovalSpec::new(3, 2, 1)).unwrap();
        let d = directions(&ho.affine);
        assert_eq!(d.len(), 63);
        assert!(d.points().iter().all(|p| p.raw() >> 12 == 0));
        let ho = build_hyperoval(HyperovalSpec::new(4, 2, 1)).unwrap();
        assert_eq!(directions(&ho.affine).len(), 255);
        let two = AffinePointSet::new(ho.affine.space(), ho.affine.points()[..2].to_vec()).unwrap();
        assert_eq!(directions(&two).len(), 1);
    }

    #[test]
    fn every_direction_comes_from_half_the_points() {
        let ho = build_hyperoval(HyperovalSpec::new(3, 2, 1)).unwrap();
        let h_inf = ho.affine.h_inf();
        let mut count: FxHashMap<Point, usize> = FxHashMap::default();
        let pts = ho.affine.points();
        for x in 0..pts.len() {
            for y in x + 1..pts.len() {
                *count
                    .entry(h_inf.point_of(pts[x].raw() ^ pts[y].raw()).unwrap())
                    .or_default() += 1;
            }
        }
        assert_eq!(count.len(), 63);
        assert!(count.values().all(|&c| c == 32));
    }

    #[test]
    fn closure() {
        let ho = build_hyperoval(HyperovalSpec::new(3, 2, 1)).unwrap();
        assert!(translation_closure_check(&ho.affine).holds);
        // Translating every point by a fixed vector keeps closure.
        let shift = 0b101_011_110_001u128;
        let moved: Vec<Point> = ho
            .affine
            .points()
            .iter()
            .map(|p| Point(p.raw() ^ shift))
            .collect();
        let moved = AffinePointSet::new(ho.affine.space(), moved).unwrap();
        assert!(translation_closure_check(&moved).holds);

        let outside = (0..1u128 << 12)
            .map(|v| Point(ho.affine.one() | v))
            .find(|&p| !ho.affine.contains(p))
            .unwrap();
        let broken = ho
            .affine
            .with_replaced(ho.affine.points()[5], outside)
            .unwrap();
        let report = translation_closure_check(&broken);
        assert!(!report.holds);
        let (a, b) = report.witness.unwrap();
        assert!(!broken.contains(Point(a.raw() ^ b.raw() ^ broken.points()[0].raw())));

        let two = AffinePointSet::new(ho.affine.space(), ho.affine.points()[..2].to_vec()).unwrap();
        assert!(translation_closure_check(&two).holds);
    }

    #[test]
    fn random_sets_fail_closure() {
        let ho = build_hyperoval(HyperovalSpec::new(3, 2, 1)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut pts = Vec::new();
        while pts.len() < 64 {
            let p = Point(ho.affine.one() | rng.gen_range(0..1u128 << 12));
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let set = AffinePointSet::new(ho.affine.space(), pts).unwrap();
        assert!(!translation_closure_check(&set).holds);
    }

    #[test]
    fn rejects_points_at_infinity() {
        let ho = build_hyperoval(HyperovalSpec::new(3, 2, 1)).unwrap();
        let inf = ho
            .maps
            .pi_q()
            .points(DEFAULT_BUDGET)
            .unwrap()
            .next()
            .unwrap();
        assert_eq!(
            AffinePointSet::new(ho.maps.pi_q(), vec![inf]).unwrap_err(),
            Error::NotAffine
        );
    }
}
