//! Line-intersection spectra and F₂-linearity of direction sets.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::F2Echelon;
use crate::hyperoval::{AffinePointSet, DirectionSet};
use crate::projective::{Point, ProjSpace};
use crate::reduction::CorrespondenceMaps;

/// Number of lines meeting a point set in exactly `j` points, for each `j`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpectrumHistogram {
    pub counts: BTreeMap<u32, u128>,
    pub total: u128,
}

impl SpectrumHistogram {
    pub fn get(&self, j: u32) -> u128 {
        self.counts.get(&j).copied().unwrap_or(0)
    }

    /// Intersection sizes that occur.
    pub fn support(&self) -> Vec<u32> {
        self.counts
            .iter()
            .filter(|(_, &n)| n > 0)
            .map(|(&j, _)| j)
            .collect()
    }

    /// `Σ_j N_j = total` and `Σ_j j·N_j = |D| · (lines per point)`.
    pub fn incidence_identities_hold(&self, points: usize, lines_per_point: u128) -> bool {
        self.counts.values().sum::<u128>() == self.total
            && self
                .counts
                .iter()
                .map(|(&j, &n)| j as u128 * n)
                .sum::<u128>()
                == points as u128 * lines_per_point
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    /// Secants from point pairs, the rest by incidence counting.
    #[default]
    Pairs,
    /// Every line of the ambient space.
    Exhaustive,
}

impl std::str::FromStr for SpectrumMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairs" => Ok(Self::Pairs),
            "exhaustive" => Ok(Self::Exhaustive),
            other => Err(Error::ParseError(format!(
                "unknown spectrum mode {other:?}"
            ))),
        }
    }
}

/// Canonical line keys through pairs of `points`, with the number of pairs on each.
/// A line carrying `j ≥ 2` of the points is hit by `j(j−1)/2` pairs.
pub fn pair_line_counts(space: &ProjSpace, points: &[Point]) -> FxHashMap<[u128; 2], u32> {
    (0..points.len())
        .into_par_iter()
        .fold(
            FxHashMap::default,
            |mut acc: FxHashMap<[u128; 2], u32>, x| {
                for &b in &points[x + 1..] {
                    let key = space
                        .line_key(points[x].raw(), b.raw())
                        .expect("distinct points");
                    *acc.entry(key).or_default() += 1;
                }
                acc
            },
        )
        .reduce(FxHashMap::default, |a, b| {
            if a.len() >= b.len() {
                merge(a, b)
            } else {
                merge(b, a)
            }
        })
}

fn merge(
    mut a: FxHashMap<[u128; 2], u32>,
    b: FxHashMap<[u128; 2], u32>,
) -> FxHashMap<[u128; 2], u32> {
    for (key, n) in b {
        *a.entry(key).or_default() += n;
    }
    a
}

/// The `j` with `j(j−1)/2 = pairs`.
pub fn points_from_pairs(pairs: u32) -> Option<u32> {
    let j = ((1.0 + (1.0 + 8.0 * pairs as f64).sqrt()) / 2.0).round() as u32;
    (j * (j - 1) / 2 == pairs).then_some(j)
}

pub fn spectrum(d: &DirectionSet, mode: SpectrumMode, budget: u128) -> Result<SpectrumHistogram> {
    let space = d.space();
    let total = space.line_count();
    match mode {
        SpectrumMode::Pairs => {
            let n = d.len() as u128;
            let required = n * n.saturating_sub(1) / 2;
            if required > budget {
                return Err(Error::EnumerationTooLarge { required, budget });
            }
            let mut counts = BTreeMap::new();
            for (_, pairs) in pair_line_counts(space, d.points()) {
                let j = points_from_pairs(pairs).expect("pair counts on a line are triangular");
                *counts.entry(j).or_insert(0u128) += 1;
            }
            let incidences: u128 = counts.iter().map(|(&j, &c)| j as u128 * c).sum();
            let tangents = n * space.lines_per_point() - incidences;
            let secants: u128 = counts.values().sum();
            counts.insert(1, tangents);
            counts.insert(0, total - tangents - secants);
            counts.retain(|_, c| *c > 0);
            Ok(SpectrumHistogram { counts, total })
        }
        SpectrumMode::Exhaustive => {
            let q = space.q() as usize;
            let per_size = space
                .line_keys(budget)?
                .par_bridge()
                .fold(
                    || vec![0u128; q + 2],
                    |mut acc, key| {
                        let j = space.line_points(key).filter(|&p| d.contains(p)).count();
                        acc[j] += 1;
                        acc
                    },
                )
                .reduce(
                    || vec![0u128; q + 2],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                );
            let counts = per_size
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(j, c)| (j as u32, c))
                .collect();
            Ok(SpectrumHistogram { counts, total })
        }
    }
}

/// Support of the histogram inside `{0, 1, 3, q − 1}`.
pub fn spectrum_conforms(hist: &SpectrumHistogram, q: u128) -> bool {
    hist.support()
        .iter()
        .all(|&j| matches!(j, 0 | 1 | 3) || j as u128 == q - 1)
}

/// An F₂-subspace certifying linearity, in the binary model.
///
/// For an affine witness `basis` spans the vector space of `Q̃` (leading
/// coordinate included). For a witness at infinity it spans `K`. In both
/// cases `rank` is the F₂-dimension of the part at infinity, which equals the
/// affine dimension of `Q̃`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct F2SubspaceWitness {
    pub basis: Vec<u64>,
    pub rank: usize,
    pub affine: bool,
}

impl F2SubspaceWitness {
    /// A witness at infinity spanned by arbitrary binary vectors.
    pub fn from_vectors<I: IntoIterator<Item = u64>>(vectors: I) -> Self {
        let e = F2Echelon::from_vectors(vectors);
        Self {
            rank: e.rank(),
            basis: e.rows().to_vec(),
            affine: false,
        }
    }

    /// The subspace `K` at infinity: for an affine witness, the differences of its vectors.
    pub fn at_infinity(&self, maps: &CorrespondenceMaps) -> F2SubspaceWitness {
        if !self.affine {
            return self.clone();
        }
        let one = 1u64 << (2 * maps.tower().hk());
        let lead = self
            .basis
            .iter()
            .copied()
            .find(|r| r & one != 0)
            .unwrap_or(0);
        Self::from_vectors(
            self.basis
                .iter()
                .map(|&r| if r & one != 0 { r ^ lead } else { r }),
        )
    }

    /// Every vector of the span, in order of the coefficient bitmask.
    pub fn vectors(&self) -> impl Iterator<Item = u64> + '_ {
        span_iter(&self.basis)
    }
}

fn span_iter(basis: &[u64]) -> impl Iterator<Item = u64> + '_ {
    (0..1u64 << basis.len()).map(move |mask| {
        let mut v = 0;
        let mut m = mask;
        while m != 0 {
            v ^= basis[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        v
    })
}

/// The F₂-span of the binary images `(1, bits v)` of `Q`, checked to consist of
/// exactly `Q̃` and vectors over the S′ elements of `D`, with every point of `D` hit.
pub fn f2_witness(
    q: &AffinePointSet,
    d: &DirectionSet,
    maps: &CorrespondenceMaps,
) -> Result<F2SubspaceWitness> {
    let images: Vec<u64> = q
        .points()
        .iter()
        .map(|&p| maps.bc_affine_map(p).map(|x| x.raw() as u64))
        .collect::<Result<_>>()?;
    let image_set: FxHashSet<u64> = images.iter().copied().collect();
    let span = F2Echelon::from_vectors(images.iter().copied());
    let one = 1u64 << (2 * maps.tower().hk());
    let mut hit = FxHashSet::default();
    for v in span_iter(span.rows()) {
        if v == 0 {
            continue;
        }
        if v & one != 0 {
            if !image_set.contains(&v) {
                return Err(Error::NotF2Linear {
                    witness: format!(
                        "affine vector {v:#x} of the span is not the image of a point of Q"
                    ),
                });
            }
        } else {
            let p = maps.s_prime_point(v as u128);
            if !d.contains(p) {
                return Err(Error::NotF2Linear {
                    witness: format!(
                        "vector {v:#x} of the span lies over {p:?}, which is not in D"
                    ),
                });
            }
            hit.insert(p);
        }
    }
    if let Some(&p) = d.points().iter().find(|p| !hit.contains(p)) {
        return Err(Error::NotF2Linear {
            witness: format!("no vector of the span lies over {p:?}"),
        });
    }
    Ok(F2SubspaceWitness {
        basis: span.rows().to_vec(),
        rank: span.rank().saturating_sub(1),
        affine: true,
    })
}

/// Searches for an F₂-subspace `K` with exactly one nonzero vector over the S′
/// element of each point of `D` and none elsewhere. Scalar multiples by `F_q`
/// permute solutions, so the vector over the first point is fixed.
pub fn f2_witness_directions(
    d: &DirectionSet,
    maps: &CorrespondenceMaps,
    node_budget: u64,
) -> Result<F2SubspaceWitness> {
    let points = d.points();
    if points.is_empty() {
        return Ok(F2SubspaceWitness::from_vectors([]));
    }
    let mut search = Search {
        d,
        maps,
        span: vec![0],
        basis: Vec::new(),
        covered: FxHashSet::default(),
        nodes: 0,
        node_budget,
    };
    match search.extend(true) {
        Some(true) => Ok(F2SubspaceWitness::from_vectors(search.basis)),
        Some(false) => Err(Error::NotF2Linear {
            witness: format!("no F2-subspace has exactly one vector over each S' element of D (first point {:?})", points[0]),
        }),
        None => Err(Error::EnumerationTooLarge {
            required: node_budget as u128 + 1,
            budget: node_budget as u128,
        }),
    }
}

struct Search<'a> {
    d: &'a DirectionSet,
    maps: &'a CorrespondenceMaps,
    span: Vec<u64>,
    basis: Vec<u64>,
    covered: FxHashSet<Point>,
    nodes: u64,
    node_budget: u64,
}

impl Search<'_> {
    /// `Some(found)`, or `None` when the node budget runs out.
    fn extend(&mut self, first: bool) -> Option<bool> {
        let Some(&target) = self.d.points().iter().find(|p| !self.covered.contains(p)) else {
            return Some(true);
        };
        let q = self.maps.tower().q();
        let scalars = if first { 1..2 } else { 1..q };
        for lambda in scalars {
            self.nodes += 1;
            if self.nodes > self.node_budget {
                return None;
            }
            let v = self
                .maps
                .bits(self.maps.h_inf().scale(target.raw(), lambda)) as u64;
            let mut over = Vec::with_capacity(self.span.len());
            let ok = self.span.iter().all(|&s| {
                let p = self.maps.s_prime_point((s ^ v) as u128);
                let fresh = self.d.contains(p) && !self.covered.contains(&p) && !over.contains(&p);
                over.push(p);
                fresh
            });
            if !ok {
                continue;
            }
            let old = self.span.len();
            let coset: Vec<u64> = self.span.iter().map(|&s| s ^ v).collect();
            self.span.extend(coset);
            self.basis.push(v);
            self.covered.extend(over.iter().copied());
            match self.extend(false) {
                Some(false) => {}
                done => return done,
            }
            self.span.truncate(old);
            self.basis.pop();
            for p in &over {
                self.covered.remove(p);
            }
        }
        Some(false)
    }
}

/// Result of testing a witness against the (h−1)-spread S′.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScatteredReport {
    pub scattered: bool,
    pub rank: usize,
    /// `rank ≤ hk` is forced for scattered subspaces.
    pub rank_bound: usize,
    pub maximum: bool,
    /// Two vectors of `K` over the same S′ element.
    pub witness: Option<(u64, u64)>,
}

pub fn scattered_check(k: &F2SubspaceWitness, maps: &CorrespondenceMaps) -> ScatteredReport {
    let k = k.at_infinity(maps);
    let mut seen: FxHashMap<Point, u64> = FxHashMap::default();
    let mut witness = None;
    for v in k.vectors().filter(|&v| v != 0) {
        if let Some(&prev) = seen.get(&maps.s_prime_point(v as u128)) {
            witness = Some((prev, v));
            break;
        }
        seen.insert(maps.s_prime_point(v as u128), v);
    }
    let rank_bound = maps.tower().hk() as usize;
    let scattered = witness.is_none();
    ScatteredReport {
        scattered,
        rank: k.rank,
        rank_bound,
        maximum: scattered && k.rank == rank_bound,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperoval::{build_hyperoval, directions, HyperovalSpec};
    use crate::projective::DEFAULT_BUDGET;
    use rand::{Rng, SeedableRng};

    fn setup(h: u32, k: u32, i: u32) -> (crate::hyperoval::Hyperoval, DirectionSet) {
        let ho = build_hyperoval(HyperovalSpec::nonstrict(h, k, i)).unwrap();
        let d = directions(&ho.affine);
        (ho, d)
    }

    fn hist(pairs: &[(u32, u128)], total: u128) -> SpectrumHistogram {
        SpectrumHistogram {
            counts: pairs.iter().copied().collect(),
            total,
        }
    }

    #[test]
    fn spectrum_3_2_1_both_modes() {
        let (_, d) = setup(3, 2, 1);
        let want = hist(&[(7, 9), (3, 588), (1, 2772), (0, 1376)], 4745);
        assert_eq!(
            spectrum(&d, SpectrumMode::Pairs, DEFAULT_BUDGET).unwrap(),
            want
        );
        assert_eq!(
            spectrum(&d, SpectrumMode::Exhaustive, DEFAULT_BUDGET).unwrap(),
            want
        );
        assert!(want.incidence_identities_hold(63, d.space().lines_per_point()));
        assert!(spectrum_conforms(&want, 8));
    }

    #[test]
    fn spectrum_4_2_1_pairs() {
        let (_, d) = setup(4, 2, 1);
        let want = hist(&[(15, 17), (3, 10200), (1, 38760), (0, 21184)], 70161);
        assert_eq!(
            spectrum(&d, SpectrumMode::Pairs, DEFAULT_BUDGET).unwrap(),
            want
        );
    }

    #[test]
    fn gcd_control_does_not_conform() {
        let (_, d) = setup(4, 2, 2);
        let h = spectrum(&d, SpectrumMode::Pairs, DEFAULT_BUDGET).unwrap();
        assert!(!spectrum_conforms(&h, 16));
        assert!(h.incidence_identities_hold(d.len(), d.space().lines_per_point()));
    }

    #[test]
    fn empty_set_spectrum() {
        let (ho, _) = setup(3, 2, 1);
        let empty = DirectionSet::new(ho.maps.h_inf(), vec![]);
        for mode in [SpectrumMode::Pairs, SpectrumMode::Exhaustive] {
            assert_eq!(
                spectrum(&empty, mode, DEFAULT_BUDGET).unwrap(),
                hist(&[(0, 4745)], 4745)
            );
        }
        assert!(spectrum_conforms(&hist(&[(0, 4745)], 4745), 8));
    }

    #[test]
    fn exhaustive_mode_respects_budget() {
        let (_, d) = setup(3, 3, 1);
        assert!(matches!(
            spectrum(&d, SpectrumMode::Exhaustive, DEFAULT_BUDGET),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn triangular_inverse() {
        for j in 2..200 {
            assert_eq!(points_from_pairs(j * (j - 1) / 2), Some(j));
        }
        assert_eq!(points_from_pairs(2), None);
    }

    #[test]
    fn affine_witness_3_2_1() {
        let (ho, d) = setup(3, 2, 1);
        let w = f2_witness(&ho.affine, &d, &ho.maps).unwrap();
        assert_eq!(w.rank, 6);
        assert_eq!(w.basis.len(), 7);
        let k = w.at_infinity(&ho.maps);
        assert_eq!(k.rank, 6);
        let report = scattered_check(&w, &ho.maps);
        assert!(report.scattered && report.maximum);
        assert!(report.rank <= report.rank_bound);
    }

    #[test]
    fn directions_only_witness_matches_affine_one() {
        for (h, k, i) in [(3, 2, 1), (4, 2, 3), (3, 3, 2)] {
            let (ho, d) = setup(h, k, i);
            let from_d = f2_witness_directions(&d, &ho.maps, 1_000_000).unwrap();
            assert_eq!(from_d.rank as u32, h * k);
            assert!(scattered_check(&from_d, &ho.maps).maximum);
            // Same F_2-linear set: the hit points are exactly D.
            let hit: FxHashSet<Point> = from_d
                .vectors()
                .filter(|&v| v != 0)
                .map(|v| ho.maps.s_prime_point(v as u128))
                .collect();
            assert_eq!(hit.len(), d.len());
            assert!(hit.iter().all(|&p| d.contains(p)));
        }
    }

    #[test]
    fn random_affine_set_is_not_linear() {
        let (ho, d) = setup(3, 2, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let mut pts = Vec::new();
        while pts.len() < 64 {
            let p = Point(ho.affine.one() | rng.gen_range(0..1u128 << 12));
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let set = AffinePointSet::new(ho.affine.space(), pts).unwrap();
        assert!(matches!(
            f2_witness(&set, &d, &ho.maps),
            Err(Error::NotF2Linear { .. })
        ));
    }

    #[test]
    fn gcd_control_directions_are_not_scattered_linear() {
        // t -> t^4 is still F_2-linear, but it fixes GF(4) inside GF(16), so
        // the witness meets S' elements in lines.
        let (ho, d) = setup(4, 2, 2);
        assert!(d.len() < 255);
        let w = f2_witness(&ho.affine, &d, &ho.maps).unwrap();
        assert_eq!(w.rank, 8);
        let report = scattered_check(&w, &ho.maps);
        assert!(!report.scattered && !report.maximum);
    }

    #[test]
    fn spread_element_is_not_scattered() {
        let (ho, _) = setup(3, 2, 1);
        let d0 = ho.maps.h_inf().point_of(1).unwrap();
        let e = ho.maps.s_prime_element(d0);
        let w = F2SubspaceWitness::from_vectors(e.rows().iter().map(|&r| r as u64));
        let report = scattered_check(&w, &ho.maps);
        assert!(!report.scattered);
        assert_eq!(report.rank, 3);
        let (a, b) = report.witness.unwrap();
        assert_eq!(
            ho.maps.s_prime_point(a as u128),
            ho.maps.s_prime_point(b as u128)
        );
    }

    #[test]
    fn fano_planes_of_triples_stay_in_the_witness() {
        let (ho, d) = setup(3, 2, 1);
        let w = f2_witness(&ho.affine, &d, &ho.maps).unwrap();
        let span = F2Echelon::from_vectors(w.basis.iter().copied());
        let pts = ho.affine.points();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 200 {
            let t: Vec<Point> = (0..3).map(|_| pts[rng.gen_range(0..pts.len())]).collect();
            let x: Vec<u64> = t
                .iter()
                .map(|&p| ho.maps.bc_affine_map(p).unwrap().raw() as u64)
                .collect();
            let plane = F2Echelon::from_vectors(x.iter().copied());
            if plane.rank() < 3 {
                continue;
            }
            let dirs: Vec<Point> = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(a, b)| ho.maps.h_inf().point_of(t[a].raw() ^ t[b].raw()).unwrap())
                .collect();
            let key = ho
                .maps
                .h_inf()
                .line_key(dirs[0].raw(), dirs[1].raw())
                .unwrap();
            let on_line = ho
                .maps
                .h_inf()
                .line_points(key)
                .filter(|&p| d.contains(p))
                .count();
            if on_line != 3 {
                continue;
            }
            for v in plane.span_vectors() {
                assert!(span.contains(v));
            }
            checked += 1;
        }
    }
}
