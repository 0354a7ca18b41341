//! Pseudoregulus structure of a direction set: long secants, transversal
//! spaces, the semilinear map between them, and the adapted Desarguesian spread.

use std::collections::BTreeSet;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{gcd, Tower};
use crate::hyperoval::DirectionSet;
use crate::linear_set::pair_line_counts;
use crate::projective::{Line, Matrix, Point, PointSet, ProjSpace, Projectivity, Subspace};
use crate::reduction::{field_reduction_spread, reduce_vector, Spread};

/// Long secants, 0-points and transversal spaces of a direction set.
#[derive(Clone, Debug)]
pub struct PseudoregulusData {
    /// Lines meeting `D` in `q − 1` points, sorted by key.
    pub secants: Vec<Line>,
    /// The two points of each secant outside `D`: the T0 point first.
    pub zero_points: Vec<[Point; 2]>,
    pub t0: Subspace,
    pub t_inf: Subspace,
    /// The 0-point on the T0 side used to classify the others.
    pub anchor: Point,
}

impl PseudoregulusData {
    /// `m = (q^k − 1)/(q − 1)`.
    pub fn m(&self) -> usize {
        self.secants.len()
    }

    /// Pairs `(X, F(X))` with `X ∈ T0` and `F(X)` the T∞ point of the secant through `X`.
    pub fn transversal_pairs(&self) -> Vec<(Point, Point)> {
        self.zero_points.iter().map(|&[x, y]| (x, y)).collect()
    }

    /// `F : T0 → T∞`.
    pub fn transversal_map(&self) -> FxHashMap<Point, Point> {
        self.transversal_pairs().into_iter().collect()
    }
}

fn candidate(reason: String) -> Error {
    Error::NotPseudoregulusCandidate { reason }
}

fn extraction(reason: String) -> Error {
    Error::TransversalExtractionFailed { reason }
}

/// `(q^k − 1)/(q − 1)` for the hyperplane at infinity PG(2k−1, q).
fn expected_secants(space: &ProjSpace) -> usize {
    let k = (space.dim() as u32).div_ceil(2);
    let q = space.q();
    ((q.pow(k) - 1) / (q - 1)) as usize
}

/// The lines meeting `D` in exactly `q − 1` points, checked to be
/// `(q^k − 1)/(q − 1)` pairwise disjoint lines covering `D`.
pub fn find_long_secants(d: &DirectionSet) -> Result<Vec<Line>> {
    if d.len() < 3 {
        return Err(candidate(format!("{} directions is too few", d.len())));
    }
    let space = d.space();
    let q = space.q() as u32;
    let long_pairs = (q - 1) * (q - 2) / 2;
    let mut keys: Vec<[u128; 2]> = pair_line_counts(space, d.points())
        .into_iter()
        .filter(|&(_, n)| n == long_pairs)
        .map(|(key, _)| key)
        .collect();
    keys.sort_unstable();
    let want = expected_secants(space);
    if keys.len() != want {
        return Err(candidate(format!(
            "found {} (q-1)-secants, expected {want}",
            keys.len()
        )));
    }
    let secants: Vec<Line> = keys
        .into_iter()
        .map(|key| space.line_from_key(key))
        .collect();
    let mut seen = PointSet::new(space);
    for (i, line) in secants.iter().enumerate() {
        for &p in &line.points {
            if !seen.insert(p) {
                let j = secants[..i]
                    .iter()
                    .position(|l| l.contains(p))
                    .expect("seen earlier");
                return Err(candidate(format!(
                    "secants {j} and {i} share the point {p:?}"
                )));
            }
        }
    }
    if let Some(&p) = d.points().iter().find(|&&p| !seen.contains(p)) {
        return Err(candidate(format!("direction {p:?} is on no (q-1)-secant")));
    }
    Ok(secants)
}

/// The two points of each secant outside `D`, in line order.
fn secant_zero_points(d: &DirectionSet, secants: &[Line]) -> Result<Vec<[Point; 2]>> {
    secants
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let zeros: Vec<Point> = line
                .points
                .iter()
                .copied()
                .filter(|&p| !d.contains(p))
                .collect();
            match zeros[..] {
                [a, b] => Ok([a.min(b), a.max(b)]),
                _ => Err(candidate(format!(
                    "secant {i} has {} points outside D",
                    zeros.len()
                ))),
            }
        })
        .collect()
}

/// Splits the 0-points into the two transversal spaces, anchored at the least 0-point.
pub fn extract_transversals(d: &DirectionSet, secants: &[Line]) -> Result<PseudoregulusData> {
    let zeros = secant_zero_points(d, secants)?;
    let anchor = zeros
        .iter()
        .map(|z| z[0])
        .min()
        .ok_or_else(|| candidate("no secants".into()))?;
    classify(d, secants, zeros, anchor)
}

/// As [`extract_transversals`] with a chosen anchor 0-point.
pub fn extract_transversals_with_anchor(
    d: &DirectionSet,
    secants: &[Line],
    anchor: Point,
) -> Result<PseudoregulusData> {
    let zeros = secant_zero_points(d, secants)?;
    classify(d, secants, zeros, anchor)
}

fn classify(
    d: &DirectionSet,
    secants: &[Line],
    zeros: Vec<[Point; 2]>,
    anchor: Point,
) -> Result<PseudoregulusData> {
    let space = d.space();
    let zero_set = PointSet::from_points(space, zeros.iter().flatten().copied());
    if !zero_set.contains(anchor) {
        return Err(extraction(format!("anchor {anchor:?} is not a 0-point")));
    }
    // X is on the anchor's side iff the line joining them consists of 0-points.
    let all_zero = |x: Point| {
        space
            .line_through(anchor, x)
            .map(|l| l.points.iter().all(|&p| zero_set.contains(p)))
            .unwrap_or(true)
    };
    let mut sides = Vec::with_capacity(zeros.len());
    for (i, &[a, b]) in zeros.iter().enumerate() {
        let pair = if a == anchor {
            [a, b]
        } else if b == anchor {
            [b, a]
        } else {
            match (all_zero(a), all_zero(b)) {
                (true, false) => [a, b],
                (false, true) => [b, a],
                (x, y) => {
                    return Err(extraction(format!(
                        "secant {i}: 0-points {a:?} ({x}) and {b:?} ({y}) do not separate"
                    )))
                }
            }
        };
        sides.push(pair);
    }
    let k = space.dim().div_ceil(2);
    let m = zeros.len();
    let mut spans = Vec::with_capacity(2);
    for side in 0..2 {
        let pts: Vec<Point> = sides.iter().map(|s| s[side]).collect();
        let span = space.span(&pts);
        if span.rank() != k {
            return Err(extraction(format!(
                "side {side} spans a space of rank {}, expected {k}",
                span.rank()
            )));
        }
        let members = PointSet::from_points(space, pts.iter().copied());
        if let Some(p) = span.points(space).find(|&p| !members.contains(p)) {
            return Err(extraction(format!(
                "side {side} span contains {p:?}, which is not one of its {m} 0-points"
            )));
        }
        spans.push(span);
    }
    let t_inf = spans.pop().expect("two sides");
    let t0 = spans.pop().expect("two sides");
    if !t0.is_disjoint(&t_inf, space) {
        return Err(extraction("the transversal spaces meet".into()));
    }
    Ok(PseudoregulusData {
        secants: secants.to_vec(),
        zero_points: sides,
        t0,
        t_inf,
        anchor,
    })
}

pub fn detect_pseudoregulus(d: &DirectionSet) -> Result<PseudoregulusData> {
    let secants = find_long_secants(d)?;
    extract_transversals(d, &secants)
}

/// A semilinear map `f : U_0 → U_∞` with `D = {⟨u + f(u)⟩}` and the projectivity
/// to coordinates in which `D = {⟨(vec u, vec u^{2^j})⟩}`.
#[derive(Clone, Debug)]
pub struct SemilinearFit {
    /// The chosen exponent `j`.
    pub exponent: u32,
    /// Whether `f` maps T∞ to T0 rather than T0 to T∞.
    pub swapped: bool,
    /// Every accepted `(j, swapped)`.
    pub accepted: Vec<(u32, bool)>,
    /// Columns are the target coordinates of `f(u_1), …, f(u_k)`.
    pub matrix: Matrix,
    pub coordinate_change: Projectivity,
}

impl SemilinearFit {
    /// Accepted exponents over both orientations.
    pub fn exponent_set(&self) -> BTreeSet<u32> {
        self.accepted.iter().map(|&(j, _)| j).collect()
    }

    /// Accepted exponents reduced mod `h`: the companion automorphisms of `F_q`.
    pub fn companion_classes(&self, h: u32) -> BTreeSet<u32> {
        self.accepted.iter().map(|&(j, _)| j % h).collect()
    }
}

/// `{i mod hk, −i mod hk}`.
pub fn exponent_pair(i: u32, hk: u32) -> BTreeSet<u32> {
    [i % hk, (hk - i % hk) % hk].into_iter().collect()
}

/// Linear data for one orientation `(source, target)` of the transversals.
struct Orientation {
    /// Columns: source rows then target rows.
    to_adapted: Matrix,
    /// `u_1, …, u_k`, packed.
    u: Vec<u128>,
    /// `f(u_1), …, f(u_k)`, packed.
    w: Vec<u128>,
}

impl Orientation {
    fn new(
        space: &ProjSpace,
        source: &Subspace,
        target: &Subspace,
        f: &FxHashMap<Point, Point>,
    ) -> Result<Self> {
        let field = space.field();
        let columns: Vec<Vec<u32>> = source
            .rows()
            .iter()
            .chain(target.rows())
            .map(|&r| space.unpack(r))
            .collect();
        let to_adapted = Matrix::from_columns(&columns).inverse(field)?;
        let k = source.rank();

        // Greedy lexicographic basis of U_0 among the source points.
        let mut pts: Vec<Point> = source.points(space).collect();
        pts.sort_unstable();
        let mut u: Vec<u128> = Vec::with_capacity(k);
        let mut echelon: Vec<u128> = Vec::with_capacity(k);
        for p in pts {
            let mut rows = echelon.clone();
            rows.push(p.raw());
            if space.rref(&mut rows) > echelon.len() {
                u.push(p.raw());
                rows.truncate(u.len());
                echelon = rows;
                if u.len() == k {
                    break;
                }
            }
        }

        let image = |v: u128| -> Result<u128> {
            let p = space.point_of(v)?;
            f.get(&p).map(|x| x.raw()).ok_or(Error::SemilinearFitFailed)
        };
        let target_coords =
            |v: u128| -> Vec<u32> { to_adapted.mul_vec(field, &space.unpack(v))[k..].to_vec() };
        let w1 = image(u[0])?;
        let mut w = vec![w1];
        for &ul in &u[1..] {
            // f(u_1 + u_ℓ) = f(u_1) + f(u_ℓ) fixes the scale of f(u_ℓ).
            let b = image(ul)?;
            let c = image(u[0] ^ ul)?;
            let span = Matrix::from_columns(&[target_coords(w1), target_coords(b)]);
            let ab = span
                .solve(field, &target_coords(c))
                .ok_or(Error::SemilinearFitFailed)?;
            let (alpha, beta) = (ab[0], ab[1]);
            if alpha == 0 || beta == 0 {
                return Err(Error::SemilinearFitFailed);
            }
            let mu = field.mul(beta, field.inv(alpha)?);
            w.push(space.scale(b, mu));
        }
        Ok(Self { to_adapted, u, w })
    }

    /// Whether `f(Σλ_ℓ u_ℓ) = Σ λ_ℓ^{2^j} w_ℓ` reproduces `D`, one point per vector.
    fn reproduces(&self, space: &ProjSpace, d: &DirectionSet, j: u32) -> bool {
        let field = space.field();
        let q = space.q() as u64;
        let k = self.u.len() as u32;
        let vectors = q.pow(k);
        if vectors - 1 != d.len() as u64 {
            return false;
        }
        let mut hit = PointSet::new(space);
        (1..vectors).all(|mut c| {
            let (mut u, mut fu) = (0u128, 0u128);
            for l in 0..k as usize {
                let lambda = (c % q) as u32;
                c /= q;
                if lambda != 0 {
                    u ^= space.scale(self.u[l], lambda);
                    fu ^= space.scale(self.w[l], field.frob_pow(lambda, j));
                }
            }
            let p = space
                .point_of(u ^ fu)
                .expect("u and f(u) lie in complementary subspaces");
            d.contains(p) && hit.insert(p)
        })
    }

    /// `diag(A^{-1}, Φ W^{-1})` composed with the change to adapted coordinates.
    fn coordinate_change(&self, space: &ProjSpace, tower: &Tower, j: u32) -> Result<Matrix> {
        let field = space.field();
        let k = self.u.len();
        let adapted = |v: u128| self.to_adapted.mul_vec(field, &space.unpack(v));
        let a = Matrix::from_columns(
            &self
                .u
                .iter()
                .map(|&v| adapted(v)[..k].to_vec())
                .collect::<Vec<_>>(),
        );
        let w = Matrix::from_columns(
            &self
                .w
                .iter()
                .map(|&v| adapted(v)[k..].to_vec())
                .collect::<Vec<_>>(),
        );
        let phi = Matrix::from_columns(
            &tower
                .basis()
                .iter()
                .map(|&b| tower.vec(tower.big().frob_pow(b, j)))
                .collect::<Vec<_>>(),
        );
        let block = Matrix::block_diag(&a.inverse(field)?, &phi.mul(field, &w.inverse(field)?));
        Ok(block.mul(field, &self.to_adapted))
    }

    fn target_matrix(&self, space: &ProjSpace) -> Matrix {
        let k = self.u.len();
        let cols: Vec<Vec<u32>> = self
            .w
            .iter()
            .map(|&v| self.to_adapted.mul_vec(space.field(), &space.unpack(v))[k..].to_vec())
            .collect();
        Matrix::from_columns(&cols)
    }
}

/// The canonical direction set `{⟨(vec u, vec u^{2^j})⟩ : u ≠ 0}`.
pub fn canonical_directions(tower: &Tower, space: &ProjSpace, j: u32) -> DirectionSet {
    let big = tower.big();
    let points = big
        .elements()
        .skip(1)
        .map(|u| {
            space
                .point_of(reduce_vector(tower, &[u, big.frob_pow(u, j)]))
                .expect("nonzero")
        })
        .collect();
    DirectionSet::new(space, points)
}

/// Tries every exponent `j` coprime to `hk` in both orientations of the transversals.
pub fn fit_semilinear(
    d: &DirectionSet,
    data: &PseudoregulusData,
    tower: &Tower,
) -> Result<SemilinearFit> {
    let space = d.space();
    let hk = tower.hk();
    let f = data.transversal_map();
    let f_inv: FxHashMap<Point, Point> = f.iter().map(|(&x, &y)| (y, x)).collect();
    let orientations = [
        (false, Orientation::new(space, &data.t0, &data.t_inf, &f)),
        (true, Orientation::new(space, &data.t_inf, &data.t0, &f_inv)),
    ];
    let candidates: Vec<u32> = (1..hk).filter(|&j| gcd(j, hk) == 1).collect();
    let mut accepted = Vec::new();
    for (swapped, o) in &orientations {
        let Ok(o) = o else { continue };
        for &j in &candidates {
            if o.reproduces(space, d, j) {
                accepted.push((j, *swapped));
            }
        }
    }
    let &(exponent, swapped) = accepted.first().ok_or(Error::SemilinearFitFailed)?;
    let o = orientations[swapped as usize]
        .1
        .as_ref()
        .expect("accepted orientations exist");
    let change = o.coordinate_change(space, tower, exponent)?;
    let coordinate_change = Projectivity::new(space, change)?;
    let canonical = canonical_directions(tower, space, exponent);
    if !d
        .points()
        .iter()
        .all(|&p| canonical.contains(coordinate_change.apply(space, p)))
    {
        return Err(Error::SemilinearFitFailed);
    }
    Ok(SemilinearFit {
        exponent,
        swapped,
        accepted,
        matrix: o.target_matrix(space),
        coordinate_change,
    })
}

/// The spread `{T_u} ∪ {T_0, T_∞}` in detected coordinates.
#[derive(Clone, Debug)]
pub struct AdaptedSpread {
    pub spread: Spread,
    pub t0_index: usize,
    pub t_inf_index: usize,
    /// Equal, as a set of elements, to the field-reduction spread pulled back
    /// through the coordinate change.
    pub agrees_with_field_reduction: bool,
}

/// `T_u = {(αu, αu^{2^j}) : α ∈ F_{q^k}}` for `u ≠ 0`, with `T_0` and `T_∞`,
/// pulled back from canonical coordinates.
pub fn build_spread(tower: &Tower, fit: &SemilinearFit, budget: u128) -> Result<AdaptedSpread> {
    let space = ProjSpace::new(2 * tower.k() as usize - 1, tower.small().clone())?;
    let big = tower.big();
    let back = fit.coordinate_change.inverse();
    let pull =
        |rows: Vec<u128>| space.span_vectors(rows.into_iter().map(|r| back.apply_vec(&space, r)));
    let spanned = |x: u32, y: u32| -> Vec<u128> {
        tower
            .basis()
            .iter()
            .map(|&b| reduce_vector(tower, &[big.mul(b, x), big.mul(b, y)]))
            .collect()
    };
    let (t0_canonical, t_inf_canonical) = (spanned(1, 0), spanned(0, 1));
    let mut elements = vec![pull(t0_canonical), pull(t_inf_canonical)];
    elements.extend(
        big.elements()
            .skip(1)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&u| pull(spanned(u, big.frob_pow(u, fit.exponent))))
            .collect::<Vec<_>>(),
    );
    // Index 0 is the source transversal of f.
    let (t0_index, t_inf_index) = if fit.swapped { (1, 0) } else { (0, 1) };
    let spread = Spread::new(&space, elements, budget).map_err(|e| match e {
        Error::InvalidSpread { reason } => Error::SpreadConstructionFailed { reason },
        other => other,
    })?;
    let reference = field_reduction_spread(tower, 2, budget)?;
    let mut ours: Vec<&Subspace> = spread.elements().iter().collect();
    let mut theirs: Vec<Subspace> = reference
        .elements()
        .iter()
        .map(|e| pull(e.rows().to_vec()))
        .collect();
    ours.sort();
    theirs.sort();
    let agrees = ours.len() == theirs.len() && ours.iter().zip(&theirs).all(|(a, b)| *a == b);
    Ok(AdaptedSpread {
        spread,
        t0_index,
        t_inf_index,
        agrees_with_field_reduction: agrees,
    })
}

/// Outcome of the one-point test for a spread against `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OnePointReport {
    pub holds: bool,
    /// `|T_0 ∩ D|` and `|T_∞ ∩ D|`, or `None` if the space is not a spread element.
    pub transversal_hits: [Option<usize>; 2],
    /// Number of other elements meeting `D` in exactly one point.
    pub single_hits: usize,
    /// First other element (by index) not meeting `D` exactly once, with its count.
    pub witness: Option<(usize, usize)>,
}

/// `T_0 ∩ D = T_∞ ∩ D = ∅` and every other element meets `D` exactly once.
pub fn one_point_property(
    spread: &Spread,
    d: &DirectionSet,
    t0: &Subspace,
    t_inf: &Subspace,
) -> OnePointReport {
    let mut counts = vec![0usize; spread.len()];
    for &p in d.points() {
        counts[spread.element_of(p)] += 1;
    }
    let special = [spread.position(t0), spread.position(t_inf)];
    let transversal_hits = special.map(|i| i.map(|i| counts[i]));
    let others = (0..spread.len()).filter(|i| !special.contains(&Some(*i)));
    let witness = others
        .clone()
        .find(|&i| counts[i] != 1)
        .map(|i| (i, counts[i]));
    let single_hits = others.filter(|&i| counts[i] == 1).count();
    OnePointReport {
        holds: transversal_hits == [Some(0), Some(0)] && witness.is_none(),
        transversal_hits,
        single_hits,
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

    /// Exponents `j` coprime to `hk` whose companion on `F_q` is `x ↦ x^{2^{±i}}`.
    fn companion_oracle(h: u32, k: u32, i: u32) -> BTreeSet<u32> {
        let hk = h * k;
        (1..hk)
            .filter(|&j| gcd(j, hk) == 1 && (j % h == i % h || (j + i).is_multiple_of(h)))
            .collect()
    }

    #[test]
    fn long_secants() {
        for (h, k, i, want) in [(3, 2, 1, 9), (4, 2, 1, 17), (3, 3, 1, 73)] {
            let (_, d) = setup(h, k, i);
            let secants = find_long_secants(&d).unwrap();
            assert_eq!(secants.len(), want);
            let q = 1usize << h;
            let on: usize = secants
                .iter()
                .map(|s| s.points.iter().filter(|&&p| d.contains(p)).count())
                .sum();
            assert_eq!(on, d.len());
            assert!(secants
                .iter()
                .all(|s| s.points.iter().filter(|&&p| d.contains(p)).count() == q - 1));
        }
    }

    #[test]
    fn secants_reject_small_and_control_sets() {
        let (ho, d) = setup(4, 2, 2);
        assert!(matches!(
            find_long_secants(&d),
            Err(Error::NotPseudoregulusCandidate { .. })
        ));
        let tiny = DirectionSet::new(ho.maps.h_inf(), d.points()[..2].to_vec());
        assert!(matches!(
            find_long_secants(&tiny),
            Err(Error::NotPseudoregulusCandidate { .. })
        ));
    }

    #[test]
    fn transversals_3_2_1() {
        let (_, d) = setup(3, 2, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        let s = d.space();
        assert_eq!(data.t0.rank(), 2);
        assert_eq!(data.t_inf.rank(), 2);
        assert_eq!(data.t0.points(s).count(), 9);
        assert!(data.t0.is_disjoint(&data.t_inf, s));
        let zeros: BTreeSet<Point> = data.zero_points.iter().flatten().copied().collect();
        assert_eq!(zeros.len(), 18);
        let both: BTreeSet<Point> = data.t0.points(s).chain(data.t_inf.points(s)).collect();
        assert_eq!(zeros, both);
        for (line, &[x, y]) in data.secants.iter().zip(&data.zero_points) {
            assert!(line.contains(x) && line.contains(y));
            assert!(data.t0.contains(s, x) && data.t_inf.contains(s, y));
        }
        // Here the transversals are the coordinate spaces X_3 = X_4 = 0 and X_1 = X_2 = 0.
        assert_eq!(data.t0, s.span_vectors([1u128 << 3, 1]));
        assert_eq!(data.t_inf, s.span_vectors([1u128 << 9, 1 << 6]));
    }

    #[test]
    fn transversals_3_3_1() {
        let (_, d) = setup(3, 3, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        assert_eq!(data.t0.rank(), 3);
        assert_eq!(data.t0.points(d.space()).count(), 73);
        assert_eq!(data.t_inf.points(d.space()).count(), 73);
    }

    #[test]
    fn lines_through_zero_points_on_different_secants_miss_d() {
        let (_, d) = setup(3, 2, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        let zeros: Vec<(usize, Point)> = data
            .zero_points
            .iter()
            .enumerate()
            .flat_map(|(i, z)| z.iter().map(move |&p| (i, p)))
            .collect();
        for (a, &(i, x)) in zeros.iter().enumerate() {
            for &(j, y) in &zeros[a + 1..] {
                if i != j {
                    let line = d.space().line_through(x, y).unwrap();
                    assert!(line.points.iter().all(|&p| !d.contains(p)));
                }
            }
        }
    }

    #[test]
    fn anchor_choice_only_swaps_sides() {
        let (_, d) = setup(3, 2, 1);
        let secants = find_long_secants(&d).unwrap();
        let base = extract_transversals(&d, &secants).unwrap();
        let f = base.transversal_map();
        assert_eq!(f.len(), 9);
        for &[x, y] in &base.zero_points {
            for anchor in [x, y] {
                let other = extract_transversals_with_anchor(&d, &secants, anchor).unwrap();
                let g = other.transversal_map();
                if other.t0 == base.t0 {
                    assert_eq!(g, f);
                } else {
                    assert_eq!(other.t0, base.t_inf);
                    assert!(g.iter().all(|(a, b)| f.get(b) == Some(a)));
                }
            }
        }
    }

    #[test]
    fn moved_zero_point_breaks_extraction() {
        let (_, d) = setup(3, 2, 1);
        let mut secants = find_long_secants(&d).unwrap();
        // Swap one secant for another line through one of its D-points.
        let s = d.space();
        let victim = secants[3].clone();
        let p = *victim.points.iter().find(|&&p| d.contains(p)).unwrap();
        let other = s
            .points(DEFAULT_BUDGET)
            .unwrap()
            .find(|&x| {
                !victim.contains(x) && !d.contains(x) && !secants.iter().any(|l| l.contains(x))
            })
            .unwrap();
        secants[3] = s.line_through(p, other).unwrap();
        assert!(extract_transversals(&d, &secants).is_err());
    }

    #[test]
    fn fit_recovers_companion_classes() {
        for (h, k, i) in [
            (3, 2, 1),
            (3, 2, 5),
            (4, 2, 1),
            (4, 2, 3),
            (3, 3, 1),
            (3, 3, 2),
        ] {
            let (ho, d) = setup(h, k, i);
            let data = detect_pseudoregulus(&d).unwrap();
            let fit = fit_semilinear(&d, &data, ho.maps.tower()).unwrap();
            assert_eq!(
                fit.exponent_set(),
                companion_oracle(h, k, i),
                "({h},{k},{i})"
            );
            assert!(fit.exponent_set().contains(&(i % (h * k))));
            assert!(fit.exponent_set().contains(&(h * k - i)));
        }
    }

    #[test]
    fn exponent_is_only_defined_mod_h() {
        // (u, u^{2^{j+h}}) = (id, φ_h)(u, u^{2^j}) with φ_h: x ↦ x^q linear over F_q,
        // so D_j and D_{j+h} are projectively equivalent.
        let t = Tower::new(4, 2).unwrap();
        let space = ProjSpace::new(3, t.small().clone()).unwrap();
        let phi: Vec<Vec<u32>> = t
            .basis()
            .iter()
            .map(|&b| t.vec(t.big().frob_pow(b, 4)))
            .collect();
        let mut m = Matrix::zeros(4, 4);
        m.set(0, 0, 1);
        m.set(1, 1, 1);
        for (c, col) in phi.iter().enumerate() {
            for (r, &x) in col.iter().enumerate() {
                m.set(2 + r, 2 + c, x);
            }
        }
        let g = Projectivity::new(&space, m).unwrap();
        let d3 = canonical_directions(&t, &space, 3);
        let d7 = canonical_directions(&t, &space, 7);
        assert_ne!(d3.points(), d7.points());
        assert!(d3.points().iter().all(|&p| d7.contains(g.apply(&space, p))));
    }

    #[test]
    fn fit_maps_d_to_canonical_form() {
        let (ho, d) = setup(4, 2, 3);
        let data = detect_pseudoregulus(&d).unwrap();
        let fit = fit_semilinear(&d, &data, ho.maps.tower()).unwrap();
        let space = d.space();
        let canonical = canonical_directions(ho.maps.tower(), space, fit.exponent);
        let image: BTreeSet<Point> = d
            .points()
            .iter()
            .map(|&p| fit.coordinate_change.apply(space, p))
            .collect();
        assert_eq!(image.into_iter().collect::<Vec<_>>(), canonical.points());
        assert_eq!(fit.matrix.rank(space.field()), 2);
    }

    #[test]
    fn refit_in_canonical_coordinates() {
        let (ho, d) = setup(3, 2, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        let fit = fit_semilinear(&d, &data, ho.maps.tower()).unwrap();
        let space = d.space();
        let image = DirectionSet::new(
            space,
            d.points()
                .iter()
                .map(|&p| fit.coordinate_change.apply(space, p))
                .collect(),
        );
        let again = detect_pseudoregulus(&image).unwrap();
        let refit = fit_semilinear(&image, &again, ho.maps.tower()).unwrap();
        assert_eq!(refit.exponent_set(), exponent_pair(1, 6));
    }

    #[test]
    fn projected_input_still_fits() {
        let (ho, d) = setup(3, 2, 1);
        let space = d.space();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let m = loop {
            let rows: Vec<Vec<u32>> = (0..4)
                .map(|_| (0..4).map(|_| rng.gen_range(0..8)).collect())
                .collect();
            let m = Matrix::from_rows(&rows);
            if m.rank(space.field()) == 4 {
                break m;
            }
        };
        let g = Projectivity::new(space, m).unwrap();
        let moved = DirectionSet::new(
            space,
            d.points().iter().map(|&p| g.apply(space, p)).collect(),
        );
        let data = detect_pseudoregulus(&moved).unwrap();
        let fit = fit_semilinear(&moved, &data, ho.maps.tower()).unwrap();
        assert_eq!(fit.exponent_set(), companion_oracle(3, 2, 1));
        let built = build_spread(ho.maps.tower(), &fit, DEFAULT_BUDGET).unwrap();
        assert!(one_point_property(&built.spread, &moved, &data.t0, &data.t_inf).holds);
    }

    #[test]
    fn control_fails_to_fit() {
        // gcd(2, 8) = 2: secant detection already fails.
        let (_, d2) = setup(4, 2, 2);
        assert!(detect_pseudoregulus(&d2).is_err());
        // Secant structure taken from a valid set, one point swapped for a 0-point.
        let (ho, d) = setup(3, 2, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        let mut wrong: Vec<Point> = d.points().to_vec();
        wrong[0] = data.zero_points[0][0];
        let wrong = DirectionSet::new(d.space(), wrong);
        assert_eq!(
            fit_semilinear(&wrong, &data, ho.maps.tower()).unwrap_err(),
            Error::SemilinearFitFailed
        );
    }

    #[test]
    fn spread_3_2_1() {
        let (ho, d) = setup(3, 2, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        let fit = fit_semilinear(&d, &data, ho.maps.tower()).unwrap();
        let built = build_spread(ho.maps.tower(), &fit, DEFAULT_BUDGET).unwrap();
        let s = &built.spread;
        assert_eq!(s.len(), 65);
        assert_eq!(*s.element(built.t0_index), data.t0);
        assert_eq!(*s.element(built.t_inf_index), data.t_inf);
        assert!(built.agrees_with_field_reduction);
        for (i, e) in s.elements().iter().enumerate() {
            if i != built.t0_index {
                assert!(e.is_disjoint(&data.t0, d.space()));
            }
        }
        let report = one_point_property(s, &d, &data.t0, &data.t_inf);
        assert!(report.holds);
        assert_eq!(report.single_hits, 63);
        assert_eq!(report.transversal_hits, [Some(0), Some(0)]);
    }

    #[test]
    fn spread_4_2_1() {
        let (ho, d) = setup(4, 2, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        let fit = fit_semilinear(&d, &data, ho.maps.tower()).unwrap();
        let built = build_spread(ho.maps.tower(), &fit, DEFAULT_BUDGET).unwrap();
        assert_eq!(built.spread.len(), 257);
        let report = one_point_property(&built.spread, &d, &data.t0, &data.t_inf);
        assert!(report.holds);
        assert_eq!(report.single_hits, 255);
    }

    #[test]
    fn unadapted_spread_fails_one_point() {
        let (ho, d) = setup(3, 2, 1);
        let data = detect_pseudoregulus(&d).unwrap();
        let fit = fit_semilinear(&d, &data, ho.maps.tower()).unwrap();
        let built = build_spread(ho.maps.tower(), &fit, DEFAULT_BUDGET).unwrap();
        let space = d.space();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        let g = loop {
            let rows: Vec<Vec<u32>> = (0..4)
                .map(|_| (0..4).map(|_| rng.gen_range(0..8)).collect())
                .collect();
            if let Ok(g) = Projectivity::new(space, Matrix::from_rows(&rows)) {
                break g;
            }
        };
        let moved: Vec<Subspace> = built
            .spread
            .elements()
            .iter()
            .map(|e| space.span_vectors(e.rows().iter().map(|&r| g.apply_vec(space, r))))
            .collect();
        let t0 = moved[built.t0_index].clone();
        let t_inf = moved[built.t_inf_index].clone();
        let other = Spread::new(space, moved, DEFAULT_BUDGET).unwrap();
        let report = one_point_property(&other, &d, &t0, &t_inf);
        assert!(!report.holds);
    }

    #[test]
    fn exponent_pairs() {
        assert_eq!(exponent_pair(1, 6), [1, 5].into_iter().collect());
        assert_eq!(exponent_pair(3, 8), [3, 5].into_iter().collect());
    }
}
