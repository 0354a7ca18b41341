//! The full verification chain from a hyperoval to the plane and axiom checks,
//! with a serializable report.

use std::time::Instant;

use serde::Serialize;

use crate::bj_axioms::{
    check_axioms, directions_spectrum_conclusion, BjReport, CPlaneFamily, DirectionConclusion,
};
use crate::bruck_bose::{
    hyperoval_in_plane, plane_axioms_exhaustive, plane_axioms_sampled, BruckBosePlane,
    PlaneAxiomReport, PlaneHyperovalReport,
};
use crate::error::{Error, Result};
use crate::field::to_hex;
use crate::hyperoval::{
    build_hyperoval, directions, is_arc, translation_closure_check, AffinePointSet, ClosureReport,
    DirectionSet, Hyperoval, HyperovalSpec,
};
use crate::linear_set::{
    f2_witness, scattered_check, spectrum, spectrum_conforms, ScatteredReport, SpectrumHistogram,
    SpectrumMode,
};
use crate::pseudoregulus::{
    build_spread, detect_pseudoregulus, exponent_pair, fit_semilinear, one_point_property,
    AdaptedSpread, OnePointReport, PseudoregulusData, SemilinearFit,
};
use crate::reduction::CorrespondenceMaps;

/// How the projective-plane axioms of the Bruck-Bose plane are checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneCheck {
    /// Exhaustive when the plane has at most [`EXHAUSTIVE_PLANE_LIMIT`] points, sampled otherwise.
    #[default]
    Auto,
    Exhaustive,
    Sampled,
    /// Only the hyperoval test runs in the plane.
    Skip,
}

impl std::str::FromStr for PlaneCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "exhaustive" => Ok(Self::Exhaustive),
            "sampled" => Ok(Self::Sampled),
            "skip" => Ok(Self::Skip),
            other => Err(Error::ParseError(format!("unknown plane check {other:?}"))),
        }
    }
}

/// Largest plane checked exhaustively under [`PlaneCheck::Auto`].
pub const EXHAUSTIVE_PLANE_LIMIT: usize = 5_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineOptions {
    pub spectrum_mode: SpectrumMode,
    pub budget: u128,
    pub plane_check: PlaneCheck,
    pub sample_pairs: u64,
    pub seed: u64,
    pub bj_axioms: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            spectrum_mode: SpectrumMode::Pairs,
            budget: crate::projective::DEFAULT_BUDGET,
            plane_check: PlaneCheck::Auto,
            sample_pairs: 1_000_000,
            seed: 0x5eed,
            bj_axioms: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Params {
    pub h: u32,
    pub k: u32,
    pub i: u32,
    pub strict: bool,
    pub in_theorem_scope: bool,
    /// Moduli of GF(q) and GF(q^k), lowercase hex.
    pub small_modulus: String,
    pub big_modulus: String,
}

impl Params {
    pub fn of(ho: &Hyperoval) -> Self {
        let t = ho.maps.tower();
        Self {
            h: ho.spec.h,
            k: ho.spec.k,
            i: ho.spec.i,
            strict: ho.spec.strict,
            in_theorem_scope: ho.spec.in_theorem_scope(),
            small_modulus: to_hex(t.small().modulus()),
            big_modulus: to_hex(t.big().modulus()),
        }
    }
}

/// A stage's result or the error that stopped it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage<T> {
    pub passed: bool,
    pub millis: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructResult {
    pub plane_points: usize,
    pub affine_points: usize,
    pub directions: usize,
    pub is_arc: bool,
    pub closure: ClosureReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumResult {
    pub mode: SpectrumMode,
    pub histogram: SpectrumHistogram,
    pub conforms: bool,
    pub identities: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearityResult {
    pub rank: usize,
    pub hk: u32,
    pub scattered: ScatteredReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PseudoregulusResult {
    pub secants: usize,
    pub expected_secants: usize,
    pub zero_points: usize,
    pub transversal_points: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FitResult {
    pub exponent: u32,
    pub swapped: bool,
    pub exponent_set: Vec<u32>,
    /// `{i mod hk, −i mod hk}`.
    pub exponent_pair: Vec<u32>,
    pub matches_pair: bool,
    /// Accepted exponents mod `h`, against `{±i mod h}`.
    pub companion_classes: Vec<u32>,
    pub expected_classes: Vec<u32>,
    /// The target-coordinate matrix of `f` on the chosen basis, hex entries by row.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadResult {
    pub elements: usize,
    pub expected: usize,
    pub agrees_with_field_reduction: bool,
    pub one_point: OnePointReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneResult {
    pub points: usize,
    pub lines: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axioms: Option<PlaneAxiomReport>,
    pub hyperoval: PlaneHyperovalReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BjResult {
    pub axioms: BjReport,
    pub conclusion: DirectionConclusion,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stages {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construct: Option<Stage<ConstructResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Stage<SpectrumResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearity: Option<Stage<LinearityResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudoregulus: Option<Stage<PseudoregulusResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<Stage<FitResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<Stage<SpreadResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane: Option<Stage<PlaneResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bj_axioms: Option<Stage<BjResult>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// A stage failed for parameters the converse results do not cover (`h = 2`).
    #[serde(rename = "outside_scope")]
    OutsideScope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub params: Params,
    pub options: PipelineOptions,
    pub stages: Stages,
    /// The first stage that did not pass; later stages do not run.
    pub failed_stage: Option<&'static str>,
    pub verdict: Verdict,
}

/// Runs a stage, turning property errors into a failed stage. Budget
/// errors abort the pipeline.
fn run<T, U>(
    f: impl FnOnce() -> Result<(T, U)>,
    passed: impl FnOnce(&T) -> bool,
) -> Result<(Stage<T>, Option<U>)> {
    let start = Instant::now();
    let out = f();
    let millis = start.elapsed().as_millis() as u64;
    match out {
        Ok((result, carry)) => {
            let ok = passed(&result);
            Ok((
                Stage {
                    passed: ok,
                    millis,
                    result: Some(result),
                    error: None,
                },
                ok.then_some(carry),
            ))
        }
        Err(e @ Error::EnumerationTooLarge { .. }) => Err(e),
        Err(e) => Ok((
            Stage {
                passed: false,
                millis,
                result: None,
                error: Some(e.to_string()),
            },
            None,
        )),
    }
}

/// Constructs the hyperoval for `spec` and runs every stage.
pub fn verify_all(spec: HyperovalSpec, options: &PipelineOptions) -> Result<VerificationReport> {
    let ho = build_hyperoval(spec)?;
    verify_hyperoval(&ho, options)
}

/// Runs every stage on a constructed hyperoval, stopping at the first failure.
pub fn verify_hyperoval(ho: &Hyperoval, options: &PipelineOptions) -> Result<VerificationReport> {
    let mut stages = Stages::default();
    let failed = run_stages(ho, options, &mut stages)?;
    Ok(VerificationReport {
        params: Params::of(ho),
        options: *options,
        stages,
        failed_stage: failed,
        verdict: match failed {
            None => Verdict::Pass,
            Some(_) if !ho.spec.in_theorem_scope() => Verdict::OutsideScope,
            Some(_) => Verdict::Fail,
        },
    })
}

macro_rules! stage {
    ($stages:ident . $field:ident, $name:literal, $body:expr, $passed:expr) => {{
        let (stage, carry) = run($body, $passed)?;
        $stages.$field = Some(stage);
        match carry {
            Some(c) => c,
            None => return Ok(Some($name)),
        }
    }};
}

fn run_stages(
    ho: &Hyperoval,
    options: &PipelineOptions,
    stages: &mut Stages,
) -> Result<Option<&'static str>> {
    let spec = ho.spec;
    let q = ho.maps.tower().q() as usize;
    let order = q.pow(spec.k);
    let h_inf = ho.maps.h_inf();
    let m = (order - 1) / (q - 1);

    let d: DirectionSet = stage!(
        stages.construct,
        "construct",
        || {
            let d = directions(&ho.affine);
            let r = ConstructResult {
                plane_points: ho.plane_points.len(),
                affine_points: ho.affine.len(),
                directions: d.len(),
                is_arc: is_arc(ho.maps.plane(), &ho.plane_points)?,
                closure: translation_closure_check(&ho.affine),
            };
            Ok((r, d))
        },
        // The arc property is reported but left to the later stages, so a
        // non-coprime exponent is rejected by the spectrum.
        |r: &ConstructResult| r.plane_points == order + 2
            && r.affine_points == order
            && r.closure.holds
    );

    stage!(
        stages.spectrum,
        "spectrum",
        || {
            let histogram = spectrum(&d, options.spectrum_mode, options.budget)?;
            let r = SpectrumResult {
                mode: options.spectrum_mode,
                conforms: spectrum_conforms(&histogram, q as u128),
                identities: histogram.incidence_identities_hold(d.len(), h_inf.lines_per_point()),
                histogram,
            };
            Ok((r, ()))
        },
        |r: &SpectrumResult| r.conforms && r.identities
    );

    stage!(
        stages.linearity,
        "linearity",
        || {
            let w = f2_witness(&ho.affine, &d, &ho.maps)?;
            let r = LinearityResult {
                rank: w.rank,
                hk: spec.hk(),
                scattered: scattered_check(&w, &ho.maps),
            };
            Ok((r, ()))
        },
        |r: &LinearityResult| r.rank == r.hk as usize
            && r.scattered.maximum
            && d.len() == order - 1
    );

    let data: PseudoregulusData = stage!(
        stages.pseudoregulus,
        "pseudoregulus",
        || {
            let data = detect_pseudoregulus(&d)?;
            let r = PseudoregulusResult {
                secants: data.m(),
                expected_secants: m,
                zero_points: data.zero_points.len() * 2,
                transversal_points: [
                    data.t0.point_count(h_inf) as usize,
                    data.t_inf.point_count(h_inf) as usize,
                ],
            };
            Ok((r, data))
        },
        |r: &PseudoregulusResult| r.secants == m && r.transversal_points == [m, m]
    );

    let fit: SemilinearFit = stage!(
        stages.fit,
        "fit",
        || {
            let fit = fit_semilinear(&d, &data, ho.maps.tower())?;
            let hk = spec.hk();
            let pair = exponent_pair(spec.i, hk);
            let expected_classes: Vec<u32> = pair
                .iter()
                .map(|j| j % spec.h)
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let matrix = fit.matrix.clone();
            let r = FitResult {
                exponent: fit.exponent,
                swapped: fit.swapped,
                exponent_set: fit.exponent_set().into_iter().collect(),
                matches_pair: fit.exponent_set() == pair,
                exponent_pair: pair.into_iter().collect(),
                companion_classes: fit.companion_classes(spec.h).into_iter().collect(),
                expected_classes,
                matrix: (0..matrix.n_rows())
                    .map(|r| matrix.row(r).iter().map(|&x| to_hex(x)).collect())
                    .collect(),
            };
            Ok((r, fit))
        },
        |r: &FitResult| r.companion_classes == r.expected_classes
    );

    let built: AdaptedSpread = stage!(
        stages.spread,
        "spread",
        || {
            let built = build_spread(ho.maps.tower(), &fit, options.budget)?;
            let r = SpreadResult {
                elements: built.spread.len(),
                expected: order + 1,
                agrees_with_field_reduction: built.agrees_with_field_reduction,
                one_point: one_point_property(&built.spread, &d, &data.t0, &data.t_inf),
            };
            Ok((r, built))
        },
        |r: &SpreadResult| r.elements == r.expected && r.one_point.holds
    );

    stage!(
        stages.plane,
        "plane",
        || Ok((plane_result(&ho.affine, &built, options)?, ())),
        |r: &PlaneResult| r.passed()
    );

    if options.bj_axioms {
        stage!(
            stages.bj_axioms,
            "bj_axioms",
            || Ok((bj_result(&ho.affine, &data, options)?, ())),
            |r: &BjResult| r.passed()
        );
    }
    Ok(None)
}

/// The plane check for the set `Q` alone: detect the pseudoregulus of its
/// directions, fit, build the spread and test `Q ∪ {T_0, T_∞}` in its plane.
pub fn plane_from_points(
    q: &AffinePointSet,
    maps: &CorrespondenceMaps,
    options: &PipelineOptions,
) -> Result<PlaneResult> {
    let d = directions(q);
    let data = detect_pseudoregulus(&d)?;
    let fit = fit_semilinear(&d, &data, maps.tower())?;
    let built = build_spread(maps.tower(), &fit, options.budget)?;
    plane_result(q, &built, options)
}

fn plane_result(
    q: &AffinePointSet,
    built: &AdaptedSpread,
    options: &PipelineOptions,
) -> Result<PlaneResult> {
    let plane = BruckBosePlane::new(&built.spread)?;
    let exhaustive = match options.plane_check {
        PlaneCheck::Auto => Some(plane.point_count() <= EXHAUSTIVE_PLANE_LIMIT),
        PlaneCheck::Exhaustive => Some(true),
        PlaneCheck::Sampled => Some(false),
        PlaneCheck::Skip => None,
    };
    let axioms = exhaustive.map(|full| {
        if full {
            plane_axioms_exhaustive(&plane)
        } else {
            plane_axioms_sampled(&plane, options.sample_pairs, options.seed)
        }
    });
    Ok(PlaneResult {
        points: plane.point_count(),
        lines: plane.line_count(),
        axioms,
        hyperoval: hyperoval_in_plane(&plane, q, built.t0_index, built.t_inf_index),
    })
}

impl PlaneResult {
    pub fn passed(&self) -> bool {
        self.axioms.as_ref().is_none_or(PlaneAxiomReport::holds)
            && self.hyperoval.holds
            && self.hyperoval.t0_lines_ok
    }
}

/// The C-plane family of `C` from the long secants of its directions, and the axiom report.
pub fn bj_from_points(c: &AffinePointSet, options: &PipelineOptions) -> Result<BjResult> {
    let data = detect_pseudoregulus(&directions(c))?;
    bj_result(c, &data, options)
}

fn bj_result(
    c: &AffinePointSet,
    data: &PseudoregulusData,
    options: &PipelineOptions,
) -> Result<BjResult> {
    let fam = CPlaneFamily::build(c, data)?;
    Ok(BjResult {
        axioms: check_axioms(&fam),
        conclusion: directions_spectrum_conclusion(&fam, options.budget)?,
    })
}

impl BjResult {
    pub fn passed(&self) -> bool {
        self.axioms.holds() && self.conclusion.holds
    }
}
