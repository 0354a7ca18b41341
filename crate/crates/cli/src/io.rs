//! Point-set files: versioned JSON with the field parameters in the header.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use transoval::field::{from_hex, to_hex, Field};
use transoval::hyperoval::{AffinePointSet, DirectionSet, HyperovalSpec};
use transoval::projective::{Point, ProjSpace};
use transoval::reduction::CorrespondenceMaps;
use transoval::Tower;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Schema { path: String, reason: String },
}

/// Which space the points of a file live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Points of PG(2, q^k).
    Hyperoval,
    /// Affine points of PG(2k, q).
    Affine,
    /// Points of the hyperplane at infinity PG(2k−1, q).
    Directions,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub schema: u32,
    pub kind: Kind,
    pub h: u32,
    pub k: u32,
    pub i: u32,
    pub small_modulus: String,
    pub big_modulus: String,
    pub count: usize,
    /// Packed coordinates in lowercase hex, coordinate 0 in the most significant slot.
    pub points: Vec<String>,
}

/// The geometry a point file refers to.
pub struct Context {
    pub spec: HyperovalSpec,
    pub maps: CorrespondenceMaps,
}

impl Context {
    pub fn space(&self, kind: Kind) -> &ProjSpace {
        match kind {
            Kind::Hyperoval => self.maps.plane(),
            Kind::Affine => self.maps.pi_q(),
            Kind::Directions => self.maps.h_inf(),
        }
    }
}

impl PointFile {
    pub fn new(kind: Kind, spec: HyperovalSpec, tower: &Tower, points: &[Point]) -> Self {
        Self {
            schema: SCHEMA,
            kind,
            h: spec.h,
            k: spec.k,
            i: spec.i,
            small_modulus: to_hex(tower.small().modulus()),
            big_modulus: to_hex(tower.big().modulus()),
            count: points.len(),
            points: points.iter().map(|p| format!("{:x}", p.raw())).collect(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        let name = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| FileError::Io {
            path: name.clone(),
            source,
        })?;
        let file: Self = serde_json::from_str(&text).map_err(|source| FileError::Json {
            path: name.clone(),
            source,
        })?;
        if file.schema != SCHEMA {
            return Err(FileError::Schema {
                path: name,
                reason: format!("schema {} is not supported, expected {SCHEMA}", file.schema),
            });
        }
        if file.count != file.points.len() {
            return Err(FileError::Schema {
                path: name,
                reason: format!(
                    "count {} does not match {} points",
                    file.count,
                    file.points.len()
                ),
            });
        }
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        write_json(path, self)
    }

    /// Rebuilds the field tower from the moduli in the header.
    pub fn context(&self) -> transoval::Result<Context> {
        let small = Field::new(self.h, Some(from_hex(&self.small_modulus)?))?;
        let big = Field::new(self.h * self.k, Some(from_hex(&self.big_modulus)?))?;
        let tower = Tower::from_fields(small, big, self.k)?;
        Ok(Context {
            spec: HyperovalSpec::nonstrict(self.h, self.k, self.i),
            maps: CorrespondenceMaps::new(tower)?,
        })
    }

    /// Parses the points, each of which must be normalized in the file's space.
    pub fn parse_points(&self, ctx: &Context) -> transoval::Result<Vec<Point>> {
        let space = ctx.space(self.kind);
        self.points.iter().map(|s| parse_point(space, s)).collect()
    }

    pub fn affine(&self, ctx: &Context) -> transoval::Result<AffinePointSet> {
        self.expect(Kind::Affine)?;
        AffinePointSet::new(ctx.maps.pi_q(), self.parse_points(ctx)?)
    }

    pub fn directions(&self, ctx: &Context) -> transoval::Result<DirectionSet> {
        self.expect(Kind::Directions)?;
        Ok(DirectionSet::new(ctx.maps.h_inf(), self.parse_points(ctx)?))
    }

    fn expect(&self, kind: Kind) -> transoval::Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(transoval::Error::ParseError(format!(
                "expected a {kind:?} file, got {:?}",
                self.kind
            )))
        }
    }
}

pub fn parse_point(space: &ProjSpace, s: &str) -> transoval::Result<Point> {
    let bad = |why: &str| transoval::Error::ParseError(format!("point {s:?}: {why}"));
    if s.is_empty()
        || !s
            .bytes()
            .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
    {
        return Err(bad("not lowercase hex"));
    }
    let v = u128::from_str_radix(s, 16).map_err(|_| bad("too long"))?;
    if space.vector_bits() < 128 && v >> space.vector_bits() != 0 {
        return Err(bad("wider than the space"));
    }
    let p = space.point_of(v).map_err(|_| bad("zero vector"))?;
    if p.raw() != v {
        return Err(bad("not normalized"));
    }
    Ok(p)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let name = path.display().to_string();
    let mut text = serde_json::to_string_pretty(value).map_err(|source| FileError::Json {
        path: name.clone(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| FileError::Io { path: name, source })
}
