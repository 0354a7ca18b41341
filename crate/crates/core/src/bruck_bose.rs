//! The André/Bruck-Bose plane of a spread of `H∞ = PG(2k−1, q)`, its
//! incidence axioms, and the hyperoval test inside it.
//!
//! Points are numbered densely: an affine point `(1, v)` of PG(2k, q) has id
//! `v < q^{2k}` and the spread element `E` has id `q^{2k} + E`. An affine line
//! is the coset `r + E` with `r` reduced against the echelon basis of `E`; its
//! id is `E·q^k` plus the free coordinates of `r`. The line at infinity is last.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperoval::{translation_closure_check, AffinePointSet, ClosureReport};
use crate::projective::{Matrix, Point, ProjSpace};
use crate::reduction::Spread;

/// Echelon data of one spread element.
#[derive(Clone, Debug)]
struct Element {
    rows: Vec<u128>,
    /// Coordinates that are not pivots of `rows`, in increasing order.
    free: Vec<usize>,
    /// All `q^k` vectors of the element, zero included.
    vectors: Vec<u128>,
    /// Reduction followed by compression is F₂-linear, so it is tabulated per byte.
    table: Vec<[u32; 256]>,
}

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PlanePoint {
    /// The vector part `v` of the affine point `(1, v)`.
    Affine(u128),
    /// A spread element, by index.
    Infinite(usize),
}

/// A line of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PlaneLine {
    /// The coset `rep + E` of the spread element `E`, with `rep` reduced.
    Affine {
        element: usize,
        rep: u128,
    },
    Infinity,
}

/// Packs the coordinates of `rep` at the `free` positions.
fn compress(space: &ProjSpace, free: &[usize], rep: u128) -> usize {
    free.iter().fold(0usize, |acc, &j| {
        (acc << space.width()) | space.coord(rep, j) as usize
    })
}

#[derive(Clone, Debug)]
pub struct BruckBosePlane {
    spread: Spread,
    elements: Vec<Element>,
    /// `q^k`.
    order: usize,
    /// `q^{2k}`.
    affine_points: usize,
    removed: FxHashSet<usize>,
}

impl BruckBosePlane {
    /// The plane of a spread of PG(2k−1, q) by `(k−1)`-spaces.
    pub fn new(spread: &Spread) -> Result<Self> {
        let space = spread.space();
        let n = space.dim() + 1;
        let rank = spread.element(0).rank();
        if !n.is_multiple_of(2) || rank * 2 != n {
            return Err(Error::InvalidSpread {
                reason: format!(
                    "elements of rank {rank} in a space of rank {n} do not give a plane"
                ),
            });
        }
        let bits = space.vector_bits();
        if bits > 32 {
            return Err(Error::UnsupportedDimension {
                dim: space.dim(),
                degree: space.field().degree(),
            });
        }
        let q = space.q() as usize;
        let order = q.pow(rank as u32);
        let bytes = bits.div_ceil(8) as usize;
        let elements = spread
            .elements()
            .iter()
            .map(|e| {
                let pivots: Vec<usize> = e
                    .rows()
                    .iter()
                    .map(|&r| space.lead(r).expect("nonzero").0)
                    .collect();
                let free = (0..n).filter(|j| !pivots.contains(j)).collect();
                let mut vectors = vec![0u128];
                vectors.extend(
                    e.points(space)
                        .flat_map(|p| (1..q as u32).map(move |c| space.scale(p.raw(), c))),
                );
                let mut element = Element {
                    rows: e.rows().to_vec(),
                    free,
                    vectors,
                    table: Vec::new(),
                };
                element.table = (0..bytes)
                    .map(|i| {
                        let mut t = [0u32; 256];
                        for (b, slot) in t.iter_mut().enumerate() {
                            let rep = space.reduce(&element.rows, (b as u128) << (8 * i));
                            *slot = compress(space, &element.free, rep) as u32;
                        }
                        t
                    })
                    .collect();
                element
            })
            .collect();
        Ok(Self {
            spread: spread.clone(),
            elements,
            order,
            affine_points: order * order,
            removed: FxHashSet::default(),
        })
    }

    /// A copy with one line deleted from the incidence structure.
    pub fn without_line(&self, line: usize) -> Self {
        let mut out = self.clone();
        out.removed.insert(line);
        out
    }

    pub fn spread(&self) -> &Spread {
        &self.spread
    }

    /// The space at infinity, PG(2k−1, q).
    pub fn space(&self) -> &ProjSpace {
        self.spread.space()
    }

    /// `q^k`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `q^{2k} + q^k + 1`.
    pub fn point_count(&self) -> usize {
        self.affine_points + self.elements.len()
    }

    pub fn line_count(&self) -> usize {
        self.elements.len() * self.order + 1
    }

    pub fn live_line_count(&self) -> usize {
        self.line_count() - self.removed.len()
    }

    pub fn point_id(&self, p: PlanePoint) -> usize {
        match p {
            PlanePoint::Affine(v) => v as usize,
            PlanePoint::Infinite(e) => self.affine_points + e,
        }
    }

    pub fn point(&self, id: usize) -> PlanePoint {
        if id < self.affine_points {
            PlanePoint::Affine(id as u128)
        } else {
            PlanePoint::Infinite(id - self.affine_points)
        }
    }

    pub fn line_at_infinity(&self) -> usize {
        self.line_count() - 1
    }

    fn decompress(&self, e: usize, mut c: usize) -> u128 {
        let s = self.space();
        let mask = (1usize << s.width()) - 1;
        let mut rep = 0u128;
        for &j in self.elements[e].free.iter().rev() {
            rep = s.with_coord(rep, j, (c & mask) as u32);
            c >>= s.width();
        }
        rep
    }

    /// Free coordinates of `v` modulo element `e`, packed.
    #[inline]
    fn coset(&self, e: usize, v: u128) -> usize {
        let mut v = v as u32;
        let mut out = 0u32;
        for t in &self.elements[e].table {
            out ^= t[(v & 0xff) as usize];
            v >>= 8;
        }
        out as usize
    }

    /// The affine line through `(1, v)` in the direction of element `e`.
    #[inline]
    pub fn affine_line(&self, e: usize, v: u128) -> usize {
        e * self.order + self.coset(e, v)
    }

    pub fn line_id(&self, l: PlaneLine) -> usize {
        match l {
            PlaneLine::Infinity => self.line_at_infinity(),
            PlaneLine::Affine { element, rep } => self.affine_line(element, rep),
        }
    }

    pub fn line(&self, id: usize) -> PlaneLine {
        if id == self.line_at_infinity() {
            PlaneLine::Infinity
        } else {
            let e = id / self.order;
            PlaneLine::Affine {
                element: e,
                rep: self.decompress(e, id % self.order),
            }
        }
    }

    pub fn is_live(&self, line: usize) -> bool {
        !self.removed.contains(&line)
    }

    pub fn incident(&self, point: usize, line: usize) -> bool {
        if !self.is_live(line) {
            return false;
        }
        match (self.point(point), self.line(line)) {
            (PlanePoint::Infinite(_), PlaneLine::Infinity) => true,
            (PlanePoint::Affine(_), PlaneLine::Infinity) => false,
            (PlanePoint::Infinite(f), PlaneLine::Affine { element, .. }) => f == element,
            (PlanePoint::Affine(v), PlaneLine::Affine { element, .. }) => {
                self.affine_line(element, v) == line
            }
        }
    }

    /// Live lines through a point, in increasing id order.
    pub fn lines_through(&self, point: usize) -> Vec<usize> {
        let all: Vec<usize> = match self.point(point) {
            PlanePoint::Affine(v) => (0..self.elements.len())
                .map(|e| self.affine_line(e, v))
                .collect(),
            PlanePoint::Infinite(e) => (e * self.order..(e + 1) * self.order)
                .chain([self.line_at_infinity()])
                .collect(),
        };
        all.into_iter().filter(|&l| self.is_live(l)).collect()
    }

    /// Points of a line; empty for a removed line.
    pub fn points_on(&self, line: usize) -> Vec<usize> {
        if !self.is_live(line) {
            return Vec::new();
        }
        match self.line(line) {
            PlaneLine::Infinity => (self.affine_points..self.point_count()).collect(),
            PlaneLine::Affine { element, rep } => self.elements[element]
                .vectors
                .iter()
                .map(|&x| (rep ^ x) as usize)
                .chain([self.affine_points + element])
                .collect(),
        }
    }

    /// Number of live lines through both points, computed by incidence tests.
    fn lines_joining(&self, a: usize, b: usize) -> usize {
        match (self.point(a), self.point(b)) {
            // Affine points share the line of direction `e` iff `a − b ∈ e`.
            (PlanePoint::Affine(x), PlanePoint::Affine(y)) => (0..self.elements.len())
                .filter(|&e| self.coset(e, x ^ y) == 0 && self.is_live(self.affine_line(e, x)))
                .count(),
            _ => self
                .lines_through(a)
                .into_iter()
                .filter(|&l| self.incident(b, l))
                .count(),
        }
    }

    /// Number of common points of two live lines. Two affine lines in
    /// different directions meet in the unique solution of `r + x = r' + x'`.
    fn common_points(&self, l1: usize, l2: usize) -> usize {
        if !self.is_live(l1) || !self.is_live(l2) {
            return 0;
        }
        match (self.line(l1), self.line(l2)) {
            (PlaneLine::Infinity, PlaneLine::Infinity) => self.elements.len(),
            (PlaneLine::Infinity, PlaneLine::Affine { .. })
            | (PlaneLine::Affine { .. }, PlaneLine::Infinity) => 1,
            (
                PlaneLine::Affine { element: e, rep: r },
                PlaneLine::Affine { element: f, rep: s },
            ) => {
                if e == f {
                    // Parallel classes share only their point at infinity.
                    1 + if r == s { self.order } else { 0 }
                } else {
                    let space = self.space();
                    let columns: Vec<Vec<u32>> = self.elements[e]
                        .rows
                        .iter()
                        .chain(&self.elements[f].rows)
                        .map(|&row| space.unpack(row))
                        .collect();
                    let solved =
                        Matrix::from_columns(&columns).solve(space.field(), &space.unpack(r ^ s));
                    solved.is_some() as usize
                }
            }
        }
    }
}

/// Which dual form of the plane axiom failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxiomKind {
    /// Two points on a number of common lines other than one.
    Points,
    /// Two lines with a number of common points other than one.
    Lines,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub kind: AxiomKind,
    pub a: usize,
    pub b: usize,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exhaustive,
    Sampled { pairs: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneAxiomReport {
    pub mode: CheckMode,
    pub point_pairs: u64,
    pub line_pairs: u64,
    pub violations: u64,
    pub witness: Option<AxiomViolation>,
}

impl PlaneAxiomReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Per-point tally of the points reached through its lines.
fn exhaustive_points(plane: &BruckBosePlane) -> (u64, Option<AxiomViolation>) {
    let n = plane.point_count();
    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut seen = vec![0u8; n];
            for l in plane.lines_through(a) {
                for x in plane.points_on(l) {
                    seen[x] = seen[x].saturating_add(1);
                }
            }
            let mut bad = (0u64, None);
            for (b, &c) in seen.iter().enumerate().skip(a + 1) {
                if c != 1 {
                    bad.0 += 1;
                    bad.1.get_or_insert(AxiomViolation {
                        kind: AxiomKind::Points,
                        a,
                        b,
                        count: c as usize,
                    });
                }
            }
            bad
        })
        .reduce(|| (0, None), merge_violations)
}

fn exhaustive_lines(plane: &BruckBosePlane) -> (u64, Option<AxiomViolation>) {
    let n = plane.line_count();
    (0..n)
        .into_par_iter()
        .filter(|&l| plane.is_live(l))
        .map(|l| {
            let mut seen = vec![0u8; n];
            for x in plane.points_on(l) {
                for m in plane.lines_through(x) {
                    seen[m] = seen[m].saturating_add(1);
                }
            }
            let mut bad = (0u64, None);
            for (m, &c) in seen.iter().enumerate().skip(l + 1) {
                if plane.is_live(m) && c != 1 {
                    bad.0 += 1;
                    bad.1.get_or_insert(AxiomViolation {
                        kind: AxiomKind::Lines,
                        a: l,
                        b: m,
                        count: c as usize,
                    });
                }
            }
            bad
        })
        .reduce(|| (0, None), merge_violations)
}

/// Keeps the witness with the least `(a, b)` so the result is thread-count independent.
fn merge_violations(
    x: (u64, Option<AxiomViolation>),
    y: (u64, Option<AxiomViolation>),
) -> (u64, Option<AxiomViolation>) {
    let w = match (x.1, y.1) {
        (Some(a), Some(b)) => Some(if (a.a, a.b) <= (b.a, b.b) { a } else { b }),
        (a, b) => a.or(b),
    };
    (x.0 + y.0, w)
}

const SAMPLE_CHUNK: u64 = 4096;

fn sampled(plane: &BruckBosePlane, pairs: u64, seed: u64) -> (u64, Option<AxiomViolation>) {
    let chunks = pairs.div_ceil(SAMPLE_CHUNK);
    let np = plane.point_count();
    let nl = plane.line_count();
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c));
            let len = SAMPLE_CHUNK.min(pairs - c * SAMPLE_CHUNK);
            let mut bad = (0u64, None);
            for _ in 0..len {
                let (a, b) = distinct(&mut rng, np);
                let count = plane.lines_joining(a, b);
                if count != 1 {
                    bad = merge_violations(
                        bad,
                        (
                            1,
                            Some(AxiomViolation {
                                kind: AxiomKind::Points,
                                a,
                                b,
                                count,
                            }),
                        ),
                    );
                }
                let (l, m) = distinct(&mut rng, nl);
                if plane.is_live(l) && plane.is_live(m) {
                    let count = plane.common_points(l, m);
                    if count != 1 {
                        bad = merge_violations(
                            bad,
                            (
                                1,
                                Some(AxiomViolation {
                                    kind: AxiomKind::Lines,
                                    a: l,
                                    b: m,
                                    count,
                                }),
                            ),
                        );
                    }
                }
            }
            bad
        })
        .reduce(|| (0, None), merge_violations)
}

fn distinct(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

/// Two points on one line and two lines through one point, over every pair.
pub fn plane_axioms_exhaustive(plane: &BruckBosePlane) -> PlaneAxiomReport {
    let (pv, pw) = exhaustive_points(plane);
    let (lv, lw) = exhaustive_lines(plane);
    let pairs = |n: usize| (n * (n - 1) / 2) as u64;
    PlaneAxiomReport {
        mode: CheckMode::Exhaustive,
        point_pairs: pairs(plane.point_count()),
        line_pairs: pairs(plane.live_line_count()),
        violations: pv + lv,
        witness: pw.or(lw),
    }
}

/// The same axioms on `pairs` random point pairs and `pairs` random line pairs.
pub fn plane_axioms_sampled(plane: &BruckBosePlane, pairs: u64, seed: u64) -> PlaneAxiomReport {
    let (violations, witness) = sampled(plane, pairs, seed);
    PlaneAxiomReport {
        mode: CheckMode::Sampled { pairs, seed },
        point_pairs: pairs,
        line_pairs: pairs,
        violations,
        witness,
    }
}

/// Outcome of the hyperoval test for `H = Q ∪ {T_0, T_∞}` in the plane.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneHyperovalReport {
    pub holds: bool,
    pub size: usize,
    pub lines_checked: usize,
    /// Point-line incidences decided by the per-line tally.
    pub incidences: u128,
    pub max_line_hits: usize,
    /// A line with at least three points of `H`, and those points.
    pub witness: Option<(usize, Vec<usize>)>,
    /// Lines through `T_0` other than `ℓ∞` carry at most one point of `Q`.
    pub t0_lines_ok: bool,
    pub closure: ClosureReport,
}

/// Whether `Q ∪ {T_0, T_∞}` is a translation hyperoval of the plane: every
/// line meets it in at most two points, it has `q^k + 2` points, and `Q` is
/// closed under the translation group.
pub fn hyperoval_in_plane(
    plane: &BruckBosePlane,
    q: &AffinePointSet,
    t0: usize,
    t_inf: usize,
) -> PlaneHyperovalReport {
    let one = q.one();
    let affine: Vec<u128> = q.points().iter().map(|p| p.raw() ^ one).collect();
    let mut members: Vec<usize> = affine.iter().map(|&v| v as usize).collect();
    members.extend([
        plane.point_id(PlanePoint::Infinite(t0)),
        plane.point_id(PlanePoint::Infinite(t_inf)),
    ]);
    members.sort_unstable();
    members.dedup();

    // Tally per line: each affine point adds one to its line in every direction.
    let e_count = plane.elements.len();
    let order = plane.order;
    let hits: Vec<Vec<(usize, usize)>> = (0..e_count)
        .into_par_iter()
        .map(|e| {
            let mut by_line: Vec<(usize, usize)> = affine
                .iter()
                .map(|&v| (plane.affine_line(e, v), v as usize))
                .filter(|&(l, _)| plane.is_live(l))
                .collect();
            by_line.sort_unstable();
            by_line
        })
        .collect();
    let mut max_line_hits = 0;
    let mut witness = None;
    let mut t0_lines_ok = true;
    for (e, by_line) in hits.iter().enumerate() {
        let extra = usize::from(e == t0 || e == t_inf);
        let mut start = 0;
        while start < by_line.len() {
            let line = by_line[start].0;
            let end = start + by_line[start..].iter().take_while(|x| x.0 == line).count();
            let n = end - start + extra;
            max_line_hits = max_line_hits.max(n);
            if e == t0 && end - start > 1 {
                t0_lines_ok = false;
            }
            if n > 2 && witness.is_none() {
                let mut pts: Vec<usize> = by_line[start..end].iter().map(|x| x.1).collect();
                if extra == 1 {
                    pts.push(plane.affine_points + e);
                }
                witness = Some((line, pts));
            }
            start = end;
        }
    }
    // Lines with no affine point of H: ℓ∞ and the empty cosets of T_0, T_∞.
    let at_infinity = usize::from(t0 != t_inf) + 1;
    max_line_hits = max_line_hits.max(at_infinity).max(1);
    let closure = translation_closure_check(q);
    let lines_checked = plane.live_line_count();
    PlaneHyperovalReport {
        holds: witness.is_none() && members.len() == order + 2 && closure.holds,
        size: members.len(),
        lines_checked,
        incidences: lines_checked as u128 * (order as u128 + 1),
        max_line_hits,
        witness,
        t0_lines_ok,
        closure,
    }
}

/// Maps the `pi_q` point `(1, v)` to its plane id.
pub fn affine_point_id(q: &AffinePointSet, p: Point) -> usize {
    (p.raw() ^ q.one()) as usize
}
