//! Command-line driver: construction, the individual checks on point-set
//! files, and the end-to-end verification report.
//!
//! Exit codes: 0 pass, 1 property failure, 2 usage or parse error, 3 budget exceeded.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use transoval::hyperoval::{build_hyperoval, directions, HyperovalSpec};
use transoval::linear_set::{spectrum, spectrum_conforms, SpectrumMode};
use transoval::pipeline::{
    bj_from_points, plane_from_points, verify_hyperoval, PipelineOptions, PlaneCheck, Verdict,
};
use transoval::projective::{ProjSpace, Subspace};
use transoval::pseudoregulus::{
    build_spread, detect_pseudoregulus, fit_semilinear, one_point_property,
};

use crate::io::{write_json, FileError, Kind, PointFile, SCHEMA};

#[derive(Parser)]
#[command(
    name = "transoval",
    version,
    about = "Translation hyperovals and their direction sets over GF(2^h)"
)]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "TRANSOVAL_THREADS", default_value_t = 0)]
    parallel: usize,
    /// Cap on incidence operations for enumeration stages.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Params {
    #[arg(long)]
    h: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    i: u32,
    /// Accept gcd(i, hk) > 1, for negative controls.
    #[arg(long)]
    allow_nonstrict: bool,
}

impl Params {
    fn spec(self) -> HyperovalSpec {
        if self.allow_nonstrict {
            HyperovalSpec::nonstrict(self.h, self.k, self.i)
        } else {
            HyperovalSpec::new(self.h, self.k, self.i)
        }
    }
}

#[derive(Args, Clone)]
struct PlaneArgs {
    /// auto, exhaustive, sampled or skip.
    #[arg(long, default_value = "auto")]
    plane_check: PlaneCheck,
    /// Point pairs and line pairs drawn when sampling.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Write the hyperoval, its affine image Q and its direction set D.
    Construct {
        #[command(flatten)]
        params: Params,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Direction set of an affine point file.
    Directions {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line-intersection histogram of a direction file.
    Spectrum {
        input: PathBuf,
        /// pairs or exhaustive.
        #[arg(long, default_value = "pairs")]
        mode: SpectrumMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Long secants, transversal spaces and the semilinear fit of a direction file.
    DetectPseudoregulus {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The Desarguesian spread adapted to a direction file, with its one-point test.
    BuildSpread {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plane axioms and the hyperoval test in the Bruck-Bose plane of an affine point file.
    BruckBoseVerify {
        input: PathBuf,
        #[command(flatten)]
        plane: PlaneArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// C-plane family and axioms A1-A4 of an affine point file.
    BjAxioms {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The full chain from construction to the axiom checks.
    VerifyAll {
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value = "pairs")]
        mode: SpectrumMode,
        #[command(flatten)]
        plane: PlaneArgs,
        /// Leave out the C-plane axiom stage.
        #[arg(long)]
        skip_bj: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Whether the checked property held.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
}

impl From<bool> for Outcome {
    fn from(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// Every JSON output carries the schema version.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn emit<T: Serialize>(out: Option<&Path>, body: &T) -> Result<()> {
    let envelope = Envelope {
        schema: SCHEMA,
        body,
    };
    match out {
        Some(path) => write_json(path, &envelope)?,
        None => println!("{}", serde_json::to_string_pretty(&envelope)?),
    }
    Ok(())
}

fn options(budget: u64, plane: &PlaneArgs) -> PipelineOptions {
    PipelineOptions {
        budget: budget as u128,
        plane_check: plane.plane_check,
        sample_pairs: plane.samples,
        seed: plane.seed,
        ..PipelineOptions::default()
    }
}

fn rows_hex(s: &Subspace) -> Vec<String> {
    s.rows().iter().map(|r| format!("{r:x}")).collect()
}

fn run(cli: Cli) -> Result<Outcome> {
    let budget = cli.budget;
    match cli.command {
        Command::Construct { params, out } => {
            let ho = build_hyperoval(params.spec())?;
            let d = directions(&ho.affine);
            let tower = ho.maps.tower();
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            PointFile::new(Kind::Hyperoval, ho.spec, tower, &ho.plane_points)
                .write(&out.join("hyperoval.json"))?;
            PointFile::new(Kind::Affine, ho.spec, tower, ho.affine.points())
                .write(&out.join("q.json"))?;
            PointFile::new(Kind::Directions, ho.spec, tower, d.points())
                .write(&out.join("d.json"))?;
            Ok(Outcome::Pass)
        }
        Command::Directions { input, out } => {
            let file = PointFile::read(&input)?;
            let ctx = file.context()?;
            let d = directions(&file.affine(&ctx)?);
            let result = PointFile::new(Kind::Directions, ctx.spec, ctx.maps.tower(), d.points());
            match out {
                Some(path) => result.write(&path)?,
                None => println!("{}", serde_json::to_string_pretty(&result)?),
            }
            Ok(Outcome::Pass)
        }
        Command::Spectrum { input, mode, out } => {
            let file = PointFile::read(&input)?;
            let ctx = file.context()?;
            let d = file.directions(&ctx)?;
            let hist = spectrum(&d, mode, budget as u128)?;
            let conforms = spectrum_conforms(&hist, d.space().q());
            #[derive(Serialize)]
            struct Body {
                mode: SpectrumMode,
                points: usize,
                total: u128,
                counts: std::collections::BTreeMap<u32, u128>,
                conforms: bool,
            }
            emit(
                out.as_deref(),
                &Body {
                    mode,
                    points: d.len(),
                    total: hist.total,
                    counts: hist.counts,
                    conforms,
                },
            )?;
            Ok(conforms.into())
        }
        Command::DetectPseudoregulus { input, out } => {
            let file = PointFile::read(&input)?;
            let ctx = file.context()?;
            let d = file.directions(&ctx)?;
            let data = detect_pseudoregulus(&d)?;
            let fit = fit_semilinear(&d, &data, ctx.maps.tower())?;
            let space = d.space();
            let t0_points = sorted_points(space, &data.t0);
            let t_inf_points = sorted_points(space, &data.t_inf);
            let f: Vec<[usize; 2]> = data
                .transversal_pairs()
                .into_iter()
                .map(|(x, y)| {
                    [
                        t0_points.binary_search(&x.raw()).expect("0-point of T0"),
                        t_inf_points.binary_search(&y.raw()).expect("0-point of T∞"),
                    ]
                })
                .collect();
            #[derive(Serialize)]
            struct Fit {
                exponent: u32,
                swapped: bool,
                exponent_set: Vec<u32>,
                companion_classes: Vec<u32>,
                matrix: Vec<Vec<String>>,
            }
            #[derive(Serialize)]
            struct Body {
                secants: Vec<Vec<String>>,
                zero_points: Vec<[transoval::projective::Point; 2]>,
                t0: Vec<String>,
                t_inf: Vec<String>,
                /// Indices into the sorted point lists of T0 and T∞.
                f: Vec<[usize; 2]>,
                fit: Fit,
            }
            let m = &fit.matrix;
            emit(
                out.as_deref(),
                &Body {
                    secants: data.secants.iter().map(|l| rows_hex(&l.key)).collect(),
                    zero_points: data.zero_points.clone(),
                    t0: rows_hex(&data.t0),
                    t_inf: rows_hex(&data.t_inf),
                    f,
                    fit: Fit {
                        exponent: fit.exponent,
                        swapped: fit.swapped,
                        exponent_set: fit.exponent_set().into_iter().collect(),
                        companion_classes: fit.companion_classes(ctx.spec.h).into_iter().collect(),
                        matrix: (0..m.n_rows())
                            .map(|r| m.row(r).iter().map(|x| format!("{x:x}")).collect())
                            .collect(),
                    },
                },
            )?;
            Ok(Outcome::Pass)
        }
        Command::BuildSpread { input, out } => {
            let file = PointFile::read(&input)?;
            let ctx = file.context()?;
            let d = file.directions(&ctx)?;
            let data = detect_pseudoregulus(&d)?;
            let fit = fit_semilinear(&d, &data, ctx.maps.tower())?;
            let built = build_spread(ctx.maps.tower(), &fit, budget as u128)?;
            let one_point = one_point_property(&built.spread, &d, &data.t0, &data.t_inf);
            #[derive(Serialize)]
            struct Body {
                size: usize,
                t0_index: usize,
                t_inf_index: usize,
                agrees_with_field_reduction: bool,
                one_point: transoval::pseudoregulus::OnePointReport,
                elements: Vec<Vec<String>>,
            }
            let ok = one_point.holds;
            emit(
                out.as_deref(),
                &Body {
                    size: built.spread.len(),
                    t0_index: built.t0_index,
                    t_inf_index: built.t_inf_index,
                    agrees_with_field_reduction: built.agrees_with_field_reduction,
                    one_point,
                    elements: built.spread.elements().iter().map(rows_hex).collect(),
                },
            )?;
            Ok(ok.into())
        }
        Command::BruckBoseVerify { input, plane, out } => {
            let file = PointFile::read(&input)?;
            let ctx = file.context()?;
            let q = file.affine(&ctx)?;
            let result = plane_from_points(&q, &ctx.maps, &options(budget, &plane))?;
            emit(out.as_deref(), &result)?;
            Ok(result.passed().into())
        }
        Command::BjAxioms { input, out } => {
            let file = PointFile::read(&input)?;
            let ctx = file.context()?;
            let c = file.affine(&ctx)?;
            let result = bj_from_points(
                &c,
                &PipelineOptions {
                    budget: budget as u128,
                    ..PipelineOptions::default()
                },
            )?;
            emit(out.as_deref(), &result)?;
            Ok(result.passed().into())
        }
        Command::VerifyAll {
            params,
            mode,
            plane,
            skip_bj,
            out,
        } => {
            let ho = build_hyperoval(params.spec())?;
            let opts = PipelineOptions {
                spectrum_mode: mode,
                bj_axioms: !skip_bj,
                ..options(budget, &plane)
            };
            let report = verify_hyperoval(&ho, &opts)?;
            emit(out.as_deref(), &report)?;
            Ok((report.verdict == Verdict::Pass).into())
        }
    }
}

fn sorted_points(space: &ProjSpace, s: &Subspace) -> Vec<u128> {
    let mut v: Vec<u128> = s.points(space).map(|p| p.raw()).collect();
    v.sort_unstable();
    v
}

/// Maps an error to its exit code.
fn exit_code(err: &anyhow::Error) -> u8 {
    use transoval::Error as E;
    if let Some(e) = err.downcast_ref::<E>() {
        return match e {
            E::EnumerationTooLarge { .. } => 3,
            E::ParseError(_)
            | E::GcdHypothesisViolated { .. }
            | E::UnsupportedDegree(_)
            | E::IrreducibleCheckFailed { .. }
            | E::UnsupportedDimension { .. }
            | E::NotAffine
            | E::FieldMismatch => 2,
            _ => 1,
        };
    }
    if err.downcast_ref::<FileError>().is_some() || err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.parallel)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
