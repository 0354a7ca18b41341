//! C-planes of a translation hyperoval in PG(2k, q) and the four axioms
//! characterizing such point sets.
//!
//! A C-plane is `⟨P, s⟩` for `P ∈ C` and `s` a long secant. It is keyed by the
//! secant and the reduction of `P` against the secant's echelon basis, which
//! identifies the affine part of the plane as a coset of `s`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperoval::{directions, find_collinear_triple, AffinePointSet};
use crate::linear_set::{spectrum, spectrum_conforms, SpectrumMode};
use crate::projective::{Line, Point, ProjSpace};
use crate::pseudoregulus::PseudoregulusData;

/// A C-plane and the points of `C` it contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CPlane {
    /// Index of its line at infinity among the secants.
    pub secant: usize,
    /// Vector part of the affine coset representative, reduced against the secant.
    pub rep: u128,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug)]
pub struct CPlaneFamily {
    c: AffinePointSet,
    secants: Vec<Line>,
    zero_points: Vec<[Point; 2]>,
    planes: Vec<CPlane>,
    index: FxHashMap<(usize, u128), usize>,
    secant_index: FxHashMap<[u128; 2], usize>,
}

/// Groups `C` by the planes `⟨P, s⟩`, sorted by key.
fn group(c: &AffinePointSet, secants: &[Line]) -> Vec<CPlane> {
    let h_inf = c.h_inf();
    let one = c.one();
    let mut keyed: Vec<(usize, u128, Point)> = secants
        .par_iter()
        .enumerate()
        .flat_map_iter(|(s, line)| {
            let rows = line.key.rows();
            let h_inf = &h_inf;
            c.points()
                .iter()
                .map(move |&p| (s, h_inf.reduce(rows, p.raw() ^ one), p))
        })
        .collect();
    keyed.sort_unstable();
    keyed
        .chunk_by(|a, b| (a.0, a.1) == (b.0, b.1))
        .map(|g| CPlane {
            secant: g[0].0,
            rep: g[0].1,
            points: g.iter().map(|x| x.2).collect(),
        })
        .collect()
}

impl CPlaneFamily {
    /// The planes `⟨P, s⟩`, each required to contain exactly `q` points of `C`.
    pub fn build(c: &AffinePointSet, data: &PseudoregulusData) -> Result<Self> {
        let fam = Self::build_lenient(c, data);
        let q = c.space().q() as usize;
        if let Some(p) = fam.planes.iter().find(|p| p.points.len() != q) {
            return Err(Error::CPlaneConstructionFailed {
                reason: format!(
                    "plane on secant {} through {:?} meets C in {} points, expected {q}",
                    p.secant,
                    p.points[0],
                    p.points.len()
                ),
            });
        }
        Ok(fam)
    }

    /// As [`Self::build`] without the size check, for testing the axioms on broken input.
    pub fn build_lenient(c: &AffinePointSet, data: &PseudoregulusData) -> Self {
        let planes = group(c, &data.secants);
        let index = planes
            .iter()
            .enumerate()
            .map(|(i, p)| ((p.secant, p.rep), i))
            .collect();
        let secant_index = data
            .secants
            .iter()
            .enumerate()
            .map(|(i, l)| ([l.key.rows()[0], l.key.rows()[1]], i))
            .collect();
        Self {
            c: c.clone(),
            secants: data.secants.clone(),
            zero_points: data.zero_points.clone(),
            planes,
            index,
            secant_index,
        }
    }

    pub fn c_points(&self) -> &AffinePointSet {
        &self.c
    }

    pub fn planes(&self) -> &[CPlane] {
        &self.planes
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn secants(&self) -> &[Line] {
        &self.secants
    }

    /// The C-plane with this line at infinity through the affine point `p`.
    pub fn plane_through(&self, line: [u128; 2], p: Point) -> Option<usize> {
        let s = *self.secant_index.get(&line)?;
        let rep = self
            .c
            .h_inf()
            .reduce(self.secants[s].key.rows(), p.raw() ^ self.c.one());
        self.index.get(&(s, rep)).copied()
    }

    /// Vector parts of the `q^2` affine points of a plane.
    fn affine_vectors<'a>(
        &'a self,
        plane: &'a CPlane,
        h_inf: &'a ProjSpace,
    ) -> impl Iterator<Item = u128> + 'a {
        let line = &self.secants[plane.secant];
        let q = h_inf.q() as u32;
        std::iter::once(plane.rep).chain(
            line.points
                .iter()
                .flat_map(move |p| (1..q).map(move |c| plane.rep ^ h_inf.scale(p.raw(), c))),
        )
    }
}

/// A concrete counterexample to one axiom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BjWitness {
    /// A plane meeting `C` in the wrong number of points.
    PlaneSize { plane: usize, size: usize },
    /// Three collinear points in a plane or in its hyperoval completion.
    Collinear { plane: usize, points: [Point; 3] },
    /// Two C-points on a number of C-planes other than one.
    Pair { a: Point, b: Point, planes: usize },
    /// An affine point outside `C` on a number of C-planes other than one.
    Uncovered { point: Point, planes: usize },
    /// A plane through `base` with line at infinity `line` meeting `C` in
    /// `size ≥ 3` points, neither 4 nor a C-plane.
    BadPlane {
        base: Point,
        line: [Point; 2],
        size: usize,
    },
    /// Three collinear C-points through `base` in direction `direction`, on a
    /// plane meeting `C` in no further point.
    LonelyDirection {
        base: Point,
        direction: Point,
        size: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomOutcome {
    pub holds: bool,
    pub checked: u64,
    pub witness: Option<BjWitness>,
}

impl AxiomOutcome {
    fn new(checked: u64, witness: Option<BjWitness>) -> Self {
        Self {
            holds: witness.is_none(),
            checked,
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BjReport {
    pub family_size: usize,
    pub a1: AxiomOutcome,
    pub a2: AxiomOutcome,
    pub a3: AxiomOutcome,
    pub a4: AxiomOutcome,
    /// Pairs of C-points covered by within-plane pairs, with multiplicity.
    pub pairs_covered: u64,
    /// Non-C affine points on C-planes, with multiplicity.
    pub non_c_covered: u64,
    /// Distinct planes meeting `C` in at least 3 points, by intersection size.
    pub planes_by_size: BTreeMap<usize, u64>,
}

impl BjReport {
    pub fn holds(&self) -> bool {
        self.a1.holds && self.a2.holds && self.a3.holds && self.a4.holds
    }
}

/// A1: each C-plane meets `C` in a `q`-arc, and with the two 0-points of its
/// secant in a hyperoval.
pub fn check_a1(fam: &CPlaneFamily) -> AxiomOutcome {
    let pi_q = fam.c.space();
    let q = pi_q.q() as usize;
    let witness = fam
        .planes
        .par_iter()
        .enumerate()
        .find_map_first(|(i, plane)| {
            if plane.points.len() != q {
                return Some(BjWitness::PlaneSize {
                    plane: i,
                    size: plane.points.len(),
                });
            }
            let mut completed = plane.points.clone();
            completed.extend(
                fam.zero_points[plane.secant]
                    .iter()
                    .map(|z| pi_q.point_unchecked(z.raw())),
            );
            match find_collinear_triple(pi_q, &completed) {
                Ok(Some(points)) => Some(BjWitness::Collinear { plane: i, points }),
                Ok(None) => None,
                Err(_) => Some(BjWitness::PlaneSize {
                    plane: i,
                    size: plane.points.len(),
                }),
            }
        });
    AxiomOutcome::new(fam.planes.len() as u64, witness)
}

/// A2: every pair of distinct C-points lies in exactly one C-plane.
pub fn check_a2(fam: &CPlaneFamily) -> (AxiomOutcome, u64) {
    let pts = fam.c.points();
    let n = pts.len();
    let pos = |p: &Point| pts.binary_search(p).expect("plane points are C-points");
    let mut cover = vec![0u8; n * n];
    let mut covered = 0u64;
    for plane in &fam.planes {
        let idx: Vec<usize> = plane.points.iter().map(pos).collect();
        for (x, &a) in idx.iter().enumerate() {
            for &b in &idx[x + 1..] {
                cover[a * n + b] = cover[a * n + b].saturating_add(1);
                covered += 1;
            }
        }
    }
    let witness = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .find(|&(a, b)| cover[a * n + b] != 1)
        .map(|(a, b)| BjWitness::Pair {
            a: pts[a],
            b: pts[b],
            planes: cover[a * n + b] as usize,
        });
    (
        AxiomOutcome::new((n * n.saturating_sub(1) / 2) as u64, witness),
        covered,
    )
}

/// A3: every affine point outside `C` lies on exactly one C-plane.
pub fn check_a3(fam: &CPlaneFamily) -> (AxiomOutcome, u64) {
    let h_inf = fam.c.h_inf();
    let one = fam.c.one();
    let affine = (h_inf.q()).pow(h_inf.dim() as u32 + 1) as usize;
    let mut count = vec![0u8; affine];
    for plane in &fam.planes {
        for v in fam.affine_vectors(plane, &h_inf) {
            count[v as usize] = count[v as usize].saturating_add(1);
        }
    }
    let in_c = |v: usize| fam.c.contains(Point(v as u128 | one));
    let mut covered = 0u64;
    let mut witness = None;
    for (v, &n) in count.iter().enumerate() {
        if in_c(v) {
            continue;
        }
        covered += n as u64;
        if n != 1 && witness.is_none() {
            witness = Some(BjWitness::Uncovered {
                point: Point(v as u128 | one),
                planes: n as usize,
            });
        }
    }
    let outside = (affine - fam.c.len()) as u64;
    (AxiomOutcome::new(outside, witness), covered)
}

/// Per base point: planes through it keyed by line at infinity, with sizes.
struct BaseScan {
    bad: Option<BjWitness>,
    /// Size of every plane through the base meeting `C` in at least 3 points.
    sizes: Vec<usize>,
}

fn scan_base(fam: &CPlaneFamily, h_inf: &ProjSpace, lines_per_point: u128, a: Point) -> BaseScan {
    let one = fam.c.one();
    let va = a.raw() ^ one;
    let mut mult: FxHashMap<u128, usize> = FxHashMap::default();
    for &x in fam.c.points() {
        if x != a {
            let d = h_inf.point_of(va ^ x.raw() ^ one).expect("distinct points");
            *mult.entry(d.raw()).or_default() += 1;
        }
    }
    let dirs: Vec<(u128, usize)> = {
        let mut v: Vec<_> = mult.into_iter().collect();
        v.sort_unstable();
        v
    };
    // Per line at infinity: pair count C(t, 2) and Σ (n_x + n_y) = (t − 1)·Σ n.
    let mut lines: FxHashMap<[u128; 2], (u64, u64)> = FxHashMap::default();
    for (x, &(dx, nx)) in dirs.iter().enumerate() {
        for &(dy, ny) in &dirs[x + 1..] {
            let key = h_inf.line_key(dx, dy).expect("distinct directions");
            let e = lines.entry(key).or_default();
            e.0 += 1;
            e.1 += (nx + ny) as u64;
        }
    }
    let mut out = BaseScan {
        bad: None,
        sizes: Vec::new(),
    };
    let mut keys: Vec<_> = lines.into_iter().collect();
    keys.sort_unstable();
    for (key, (pairs, sum)) in keys {
        let t = crate::linear_set::points_from_pairs(pairs as u32)
            .expect("pair counts are triangular") as u64;
        let size = 1 + (sum / (t - 1)) as usize;
        out.sizes.push(size);
        if size != 4 && fam.plane_through(key, a).is_none() && out.bad.is_none() {
            out.bad = Some(BjWitness::BadPlane {
                base: a,
                line: key.map(Point),
                size,
            });
        }
    }
    // Directions carrying several C-points also give planes with no second direction.
    for &(d, n) in &dirs {
        if n < 2 {
            continue;
        }
        let with_others = fam_lines_through(h_inf, d, &dirs);
        if with_others < lines_per_point {
            out.sizes.push(1 + n);
            if 1 + n != 4 && out.bad.is_none() {
                out.bad = Some(BjWitness::LonelyDirection {
                    base: a,
                    direction: Point(d),
                    size: 1 + n,
                });
            }
        }
    }
    out
}

/// Number of distinct lines joining `d` to the other directions.
fn fam_lines_through(h_inf: &ProjSpace, d: u128, dirs: &[(u128, usize)]) -> u128 {
    let mut keys: Vec<[u128; 2]> = dirs
        .iter()
        .filter(|x| x.0 != d)
        .map(|x| h_inf.line_key(d, x.0).expect("distinct directions"))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u128
}

/// A4: every plane meeting `C` in at least 3 points meets it in 4 points or
/// is a C-plane. Planes are enumerated through each C-point by their line at
/// infinity, so each plane of size `s` is seen `s` times.
pub fn check_a4(fam: &CPlaneFamily) -> (AxiomOutcome, BTreeMap<usize, u64>) {
    let h_inf = fam.c.h_inf();
    let lpp = h_inf.lines_per_point();
    let scans: Vec<BaseScan> = fam
        .c
        .points()
        .par_iter()
        .map(|&a| scan_base(fam, &h_inf, lpp, a))
        .collect();
    let mut seen: BTreeMap<usize, u64> = BTreeMap::new();
    for s in &scans {
        for &size in &s.sizes {
            *seen.entry(size).or_default() += 1;
        }
    }
    let planes_by_size = seen
        .into_iter()
        .map(|(s, n)| (s, n / s as u64))
        .collect::<BTreeMap<_, _>>();
    let checked = planes_by_size.values().sum();
    let witness = scans.into_iter().find_map(|s| s.bad);
    (AxiomOutcome::new(checked, witness), planes_by_size)
}

pub fn check_axioms(fam: &CPlaneFamily) -> BjReport {
    let a1 = check_a1(fam);
    let (a2, pairs_covered) = check_a2(fam);
    let (a3, non_c_covered) = check_a3(fam);
    let (a4, planes_by_size) = check_a4(fam);
    BjReport {
        family_size: fam.len(),
        a1,
        a2,
        a3,
        a4,
        pairs_covered,
        non_c_covered,
        planes_by_size,
    }
}

/// The direction set of `C` and whether it has the size and line spectrum of
/// a translation hyperoval's direction set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionConclusion {
    pub holds: bool,
    pub directions: usize,
    pub expected: usize,
    pub support: Vec<u32>,
}

pub fn directions_spectrum_conclusion(
    fam: &CPlaneFamily,
    budget: u128,
) -> Result<DirectionConclusion> {
    let d = directions(&fam.c);
    let q = d.space().q();
    let k = (d.space().dim() as u32).div_ceil(2);
    let hist = spectrum(&d, SpectrumMode::Pairs, budget)?;
    let expected = (q.pow(k) - 1) as usize;
    Ok(DirectionConclusion {
        holds: d.len() == expected && spectrum_conforms(&hist, q),
        directions: d.len(),
        expected,
        support: hist.support(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperoval::{build_hyperoval, Hyperoval, HyperovalSpec};
    use crate::projective::DEFAULT_BUDGET;
    use crate::pseudoregulus::detect_pseudoregulus;

    fn family(h: u32, k: u32, i: u32) -> (Hyperoval, PseudoregulusData, CPlaneFamily) {
        let ho = build_hyperoval(HyperovalSpec::new(h, k, i)).unwrap();
        let data = detect_pseudoregulus(&directions(&ho.affine)).unwrap();
        let fam = CPlaneFamily::build(&ho.affine, &data).unwrap();
        (ho, data, fam)
    }

    #[test]
    fn family_sizes() {
        for (h, k, i, want) in [(3, 2, 1, 72), (4, 2, 1, 272), (3, 3, 1, 4672)] {
            let (ho, data, fam) = family(h, k, i);
            assert_eq!(fam.len(), want);
            // |C|·m/q
            assert_eq!(fam.len(), ho.affine.len() * data.m() / (1 << h));
        }
    }

    #[test]
    fn axioms_3_2_1() {
        let (_, _, fam) = family(3, 2, 1);
        let r = check_axioms(&fam);
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.pairs_covered, 72 * 28);
        assert_eq!(r.pairs_covered, 64 * 63 / 2);
        assert_eq!(r.non_c_covered, 72 * 56);
        assert_eq!(r.non_c_covered, 4096 - 64);
        assert_eq!(r.planes_by_size.get(&8), Some(&72));
        assert!(r.planes_by_size.keys().all(|&s| s == 4 || s == 8));
    }

    #[test]
    fn plane_counts_by_size_match_quadruples() {
        // Each pair of C-points lies in one C-plane; the remaining triples
        // split into 4-sets: C(64,3) = 72·C(8,3) + 4·N_4.
        let (_, _, fam) = family(3, 2, 1);
        let (_, sizes) = check_a4(&fam);
        let n4 = sizes[&4];
        assert_eq!(72 * 56 + 4 * n4, 64 * 63 * 62 / 6);
    }

    #[test]
    fn a4_matches_brute_force_on_small_case() {
        // Brute force over all triples of C for q = 8, k = 2.
        let (ho, _, fam) = family(3, 2, 1);
        let pi_q = ho.affine.space();
        let pts = ho.affine.points();
        let mut sizes: FxHashMap<Vec<u128>, usize> = FxHashMap::default();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                for c in b + 1..pts.len() {
                    let span = pi_q.span(&[pts[a], pts[b], pts[c]]);
                    if span.rank() == 3 {
                        let n = pts.iter().filter(|&&p| span.contains(pi_q, p)).count();
                        sizes.insert(span.rows().to_vec(), n);
                    }
                }
            }
        }
        let mut brute: BTreeMap<usize, u64> = BTreeMap::new();
        for n in sizes.values() {
            *brute.entry(*n).or_default() += 1;
        }
        let (a4, ours) = check_a4(&fam);
        assert!(a4.holds);
        assert_eq!(ours, brute);
    }

    #[test]
    fn moved_point_breaks_axioms() {
        let (ho, data, _) = family(3, 2, 1);
        let old = ho.affine.points()[10];
        let new = ho.maps.pi_q().point_unchecked(ho.affine.one() | 0x321);
        assert!(!ho.affine.contains(new));
        let c = ho.affine.with_replaced(old, new).unwrap();
        assert!(matches!(
            CPlaneFamily::build(&c, &data),
            Err(Error::CPlaneConstructionFailed { .. })
        ));
        let fam = CPlaneFamily::build_lenient(&c, &data);
        let r = check_axioms(&fam);
        assert!(!r.a1.holds);
        assert!(matches!(r.a1.witness, Some(BjWitness::PlaneSize { .. })));
        assert!(!r.a3.holds);
    }

    #[test]
    fn conclusion() {
        let (_, _, fam) = family(3, 2, 1);
        let c = directions_spectrum_conclusion(&fam, DEFAULT_BUDGET).unwrap();
        assert!(c.holds);
        assert_eq!(c.directions, 63);
        assert_eq!(c.support, vec![0, 1, 3, 7]);
    }
}
