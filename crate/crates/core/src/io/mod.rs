//! JSON artifacts (operators, fields, clouds, grids, problems, manifests),
//! SVG export and bundled fixtures.
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! write-then-read cycle reproduces every value bit for bit. Non-finite
//! numbers have no JSON form and are rejected on write.

mod fixtures;
mod svg;

pub use fixtures::{fixture, FIXTURE_NAMES};
pub use svg::export_svg;

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::envelope::GridFunction;
use crate::error::{Error, Result};
use crate::geometry::{Cell, ConvexPolygon, OrientedSquare, PiecewiseConstantField, Point};
use crate::hull::HullCloud;
use crate::laminate::{InclusionProblem, LevelSet, Target, DEFAULT_TOL_ZERO};
use crate::operator::{builtin, Operator};

/// Compact JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(&finite_value(value)?)?;
    s.push('\n');
    Ok(s)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&finite_value(value)?)?;
    s.push('\n');
    Ok(s)
}

fn finite_value<T: Serialize>(value: &T) -> Result<serde_json::Value> {
    let v = serde_json::to_value(value)?;
    if has_null(&v) {
        return Err(Error::Input("non-finite number cannot be written as JSON".into()));
    }
    Ok(v)
}

// serde_json maps NaN and infinities to null; none of the formats has a
// legitimate null.
fn has_null(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => true,
        serde_json::Value::Array(a) => a.iter().any(has_null),
        serde_json::Value::Object(o) => o.values().any(has_null),
        _ => false,
    }
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_pretty(value)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// `matrices[i][row][col]` is `A_{i+1}`.
    pub matrices: Vec<Vec<Vec<f64>>>,
}

impl OperatorFile {
    pub fn from_operator(op: &Operator) -> Self {
        let matrices = op
            .matrices()
            .iter()
            .map(|a| (0..a.nrows()).map(|r| a.row(r).iter().copied().collect()).collect())
            .collect();
        Self {
            name: op.name().map(str::to_owned),
            n: op.n_space(),
            d: op.d_state(),
            m: op.m_eq(),
            matrices,
        }
    }

    pub fn to_operator(&self) -> Result<Operator> {
        let op = Operator::from_rows(self.name.as_deref(), &self.matrices)?;
        if (op.n_space(), op.d_state(), op.m_eq()) != (self.n, self.d, self.m) {
            return Err(Error::Dimension(format!(
                "declared N={}, d={}, m={} but matrices give N={}, d={}, m={}",
                self.n,
                self.d,
                self.m,
                op.n_space(),
                op.d_state(),
                op.m_eq()
            )));
        }
        Ok(op)
    }
}

/// An operator given by built-in name or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorRef {
    Name(String),
    Inline(OperatorFile),
}

impl OperatorRef {
    pub fn resolve(&self) -> Result<Operator> {
        match self {
            Self::Name(n) => builtin(n).ok_or_else(|| Error::Input(format!("unknown operator {n:?}"))),
            Self::Inline(f) => f.to_operator(),
        }
    }
}

/// Resolves a built-in name or the path of an operator file.
pub fn load_operator(reference: &str) -> Result<Operator> {
    if let Some(op) = builtin(reference) {
        return Ok(op);
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(Error::Input(format!("{reference:?} is neither a built-in operator nor a file")));
    }
    read_json::<OperatorFile>(path)?.to_operator()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub center: [f64; 2],
    pub side: f64,
    pub angle: f64,
}

impl DomainFile {
    pub fn from_square(s: &OrientedSquare) -> Self {
        Self {
            center: [s.center.x, s.center.y],
            side: s.side,
            angle: s.angle,
        }
    }

    pub fn to_square(&self) -> Result<OrientedSquare> {
        OrientedSquare::new(Point::new(self.center[0], self.center[1]), self.side, self.angle)
    }
}

impl Default for DomainFile {
    fn default() -> Self {
        Self::from_square(&OrientedSquare::unit())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellFile {
    pub vertices: Vec<[f64; 2]>,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub domain: DomainFile,
    pub exterior_value: Vec<f64>,
    pub cells: Vec<CellFile>,
}

impl FieldFile {
    pub fn from_field(f: &PiecewiseConstantField) -> Self {
        Self {
            domain: DomainFile::from_square(&f.domain),
            exterior_value: f.exterior_value.iter().copied().collect(),
            cells: f
                .cells
                .iter()
                .map(|c| CellFile {
                    vertices: c.polygon.vertices().iter().map(|p| [p.x, p.y]).collect(),
                    value: c.value.iter().copied().collect(),
                })
                .collect(),
        }
    }

    /// Validates as [`PiecewiseConstantField::new`] does. Clockwise vertex
    /// lists are reversed.
    pub fn to_field(&self) -> Result<PiecewiseConstantField> {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let poly = ConvexPolygon::new(c.vertices.iter().map(|v| Point::new(v[0], v[1])).collect())
                    .map_err(|e| Error::Input(format!("cell {i}: {e}")))?;
                Ok(Cell::new(poly, DVector::from_column_slice(&c.value)))
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseConstantField::new(
            self.domain.to_square()?,
            DVector::from_column_slice(&self.exterior_value),
            cells,
        )
    }
}

pub fn read_field(path: &Path) -> Result<PiecewiseConstantField> {
    read_json::<FieldFile>(path)?.to_field()
}

pub fn write_field(path: &Path, field: &PiecewiseConstantField) -> Result<()> {
    write_json(path, &FieldFile::from_field(field))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudFile {
    pub points: Vec<Vec<f64>>,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dedup_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_cone: Option<f64>,
}

impl CloudFile {
    pub fn from_cloud(c: &HullCloud) -> Self {
        Self {
            points: c.points.iter().map(|p| p.iter().copied().collect()).collect(),
            depth: c.depth,
            operator: Some(c.op_name.clone()),
            t_grid: Some(c.t_grid),
            dedup_eps: Some(c.dedup_eps),
            tol_cone: Some(c.tol_cone),
        }
    }

    pub fn to_cloud(&self) -> Result<HullCloud> {
        let d = self.points.first().map_or(0, Vec::len);
        if d == 0 || self.points.iter().any(|p| p.len() != d) {
            return Err(Error::Dimension("cloud points must share a positive length".into()));
        }
        Ok(HullCloud {
            points: self.points.iter().map(|p| DVector::from_column_slice(p)).collect(),
            depth: self.depth,
            op_name: self.operator.clone().unwrap_or_default(),
            t_grid: self.t_grid.unwrap_or(17),
            dedup_eps: self.dedup_eps.unwrap_or(0.0),
            tol_cone: self.tol_cone.unwrap_or(crate::operator::DEFAULT_TOL_CONE),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(rename = "box")]
    pub bounds: BoxFile,
    pub resolution: Vec<usize>,
    /// Row-major, last axis fastest.
    pub values: Vec<f64>,
}

impl GridFile {
    pub fn from_grid(g: &GridFunction) -> Self {
        Self {
            bounds: BoxFile {
                lo: g.lo.clone(),
                hi: g.hi.clone(),
            },
            resolution: g.resolution.clone(),
            values: g.values.clone(),
        }
    }

    pub fn to_grid(&self) -> Result<GridFunction> {
        GridFunction::new(self.bounds.lo.clone(), self.bounds.hi.clone(), self.resolution.clone(), self.values.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevelSetFile {
    /// `|x - center|^2 - radius^2` in the plane, centred at 0 by default.
    Circle {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    /// `|x - center|^2 - radius^2` in any dimension.
    SphereD { center: Vec<f64>, radius: f64 },
    /// `(normal . x - offset)^2 - half_width^2`.
    AffineBand { normal: Vec<f64>, offset: f64, half_width: f64 },
    /// `x^T q x + linear . x + constant`, `q` given by rows.
    Expr {
        q: Vec<Vec<f64>>,
        linear: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
}

impl LevelSetFile {
    pub fn to_level_set(&self) -> Result<LevelSet> {
        Ok(match self {
            Self::Circle { radius, center } => LevelSet::Sphere {
                center: DVector::from_column_slice(&center.unwrap_or([0.0, 0.0])),
                radius: *radius,
            },
            Self::SphereD { center, radius } => LevelSet::Sphere {
                center: DVector::from_column_slice(center),
                radius: *radius,
            },
            Self::AffineBand {
                normal,
                offset,
                half_width,
            } => LevelSet::AffineBand {
                normal: DVector::from_column_slice(normal),
                offset: *offset,
                half_width: *half_width,
            },
            Self::Expr { q, linear, constant } => {
                let d = linear.len();
                if q.len() != d || q.iter().any(|r| r.len() != d) {
                    return Err(Error::Dimension(format!("expr: q must be {d}x{d}")));
                }
                LevelSet::Quadratic {
                    q: DMatrix::from_fn(d, d, |r, c| q[r][c]),
                    linear: DVector::from_column_slice(linear),
                    constant: *constant,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub operator: OperatorRef,
    pub xi: Vec<f64>,
    #[serde(default)]
    pub domain: DomainFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_sets: Option<Vec<LevelSetFile>>,
    #[serde(rename = "E_points", default, skip_serializing_if = "Option::is_none")]
    pub e_points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_zero: Option<f64>,
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<InclusionProblem> {
        let target = match (&self.level_sets, &self.e_points) {
            (Some(ls), None) => Target::LevelSets(ls.iter().map(LevelSetFile::to_level_set).collect::<Result<_>>()?),
            (None, Some(pts)) => Target::Points(pts.iter().map(|p| DVector::from_column_slice(p)).collect()),
            _ => return Err(Error::Input("problem needs exactly one of level_sets and E_points".into())),
        };
        InclusionProblem::new(
            self.operator.resolve()?,
            target,
            DVector::from_column_slice(&self.xi),
            self.domain.to_square()?,
            self.tol_zero.unwrap_or(DEFAULT_TOL_ZERO),
        )
    }
}

pub fn read_problem(path: &Path) -> Result<InclusionProblem> {
    read_json::<ProblemFile>(path)?.to_problem()
}

/// Run record written next to every primary output. Maps are ordered, so
/// identical runs give identical bytes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub schedule: BTreeMap<String, serde_json::Value>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.inputs.insert(key.to_owned(), json_value(value));
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_owned(), value);
        self
    }

    pub fn schedule_entry(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.schedule.insert(key.to_owned(), json_value(value));
        self
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.metrics.insert(key.to_owned(), json_value(value));
        self
    }
}

fn json_value(v: impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        write_json_pretty(path, self)
    }
}

/// `path` with its extension replaced by `manifest.json`, e.g. `f.json` ->
/// `f.manifest.json`.
pub fn manifest_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("manifest.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminate::lemma1_construct;

    #[test]
    fn operator_round_trip() {
        for name in crate::operator::BUILTIN_NAMES {
            let op = builtin(name).unwrap();
            let text = to_json(&OperatorFile::from_operator(&op)).unwrap();
            let back = from_json::<OperatorFile>(&text).unwrap().to_operator().unwrap();
            assert_eq!(back, op);
        }
    }

    #[test]
    fn declared_shape_must_match() {
        let bad = r#"{"N": 2, "d": 3, "m": 1, "matrices": [[[1, 0]], [[0, 1]]]}"#;
        assert!(from_json::<OperatorFile>(bad).unwrap().to_operator().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(from_json::<DomainFile>(r#"{"center": [0, 0], "side": 1, "angle": 0, "x": 1}"#).is_err());
        let p = r#"{"operator": "div2", "xi": [0, 0], "level_sets": [{"kind": "circle", "radius": 1, "bogus": 2}]}"#;
        assert!(from_json::<ProblemFile>(p).is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = from_json::<DomainFile>("{\n  \"center\": [0, 0],\n  \"side\": oops\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn field_round_trip_is_bit_exact() {
        let op = builtin("div2").unwrap();
        let a = DVector::from_column_slice(&[0.1, 1.0 / 3.0]);
        let b = DVector::from_column_slice(&[-0.1, -1.0 / 3.0]);
        let f = lemma1_construct(&op, &a, &b, 0.5, 7).unwrap();
        let text = to_json(&FieldFile::from_field(&f)).unwrap();
        let back = from_json::<FieldFile>(&text).unwrap().to_field().unwrap();
        assert_eq!(back, f);
        assert_eq!(to_json(&FieldFile::from_field(&back)).unwrap(), text);
    }

    #[test]
    fn non_finite_refused() {
        let g = GridFile {
            bounds: BoxFile { lo: vec![0.0], hi: vec![1.0] },
            resolution: vec![2],
            values: vec![0.0, f64::NAN],
        };
        assert!(to_json(&g).is_err());
    }

    #[test]
    fn problem_variants() {
        let p = r#"{"operator": "div2", "xi": [0.5, 0], "level_sets": [{"kind": "circle", "radius": 1}]}"#;
        let prob = from_json::<ProblemFile>(p).unwrap().to_problem().unwrap();
        assert_eq!(prob.f(&DVector::from_column_slice(&[1.0, 0.0])), 0.0);
        let e = r#"{"operator": "div2", "xi": [0, 0], "E_points": [[-1, 0], [1, 0]], "tol_zero": 1e-9}"#;
        assert!(matches!(from_json::<ProblemFile>(e).unwrap().to_problem().unwrap().target, Target::Points(_)));
        let both = r#"{"operator": "div2", "xi": [0, 0], "E_points": [[1, 0]], "level_sets": [{"kind": "circle", "radius": 1}]}"#;
        assert!(from_json::<ProblemFile>(both).unwrap().to_problem().is_err());
        let q = r#"{"operator": "div2", "xi": [0, 0], "level_sets": [{"kind": "expr", "q": [[1, 0], [0, 2]], "linear": [0, 0], "constant": -1}]}"#;
        let prob = from_json::<ProblemFile>(q).unwrap().to_problem().unwrap();
        assert_eq!(prob.f(&DVector::from_column_slice(&[0.0, 1.0])), 1.0);
    }
}
