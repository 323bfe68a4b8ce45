//! JSON documents for inputs and outputs.
//!
//! Scalars are written as strings, either decimals (`"0.7"`) or ratios
//! (`"7/10"`); JSON numbers are also accepted and read through their
//! decimal text, so `0.7` is exactly `7/10` in exact mode.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::convex::ConvexSet;
use crate::error::Error;
use crate::metric::{Ball, MetricSampleSpace};
use crate::nerve::SimplicialComplex;
use crate::pou::{
    ball_cover, validate_pou, CertificateEntry, Ground, LocalFinitenessCertificate, Neighborhood,
    PartitionOfUnity,
};
use crate::scalar::{scalar_from_json, Scalar};
use crate::selection::{ConvexTarget, SelectionCertificate};
use crate::setmap::{IndexedCover, SetValuedMap};
use crate::space::{FiniteSpace, PointSet};
use crate::sparse::{ExtendedUnitVec, IndexId, SparseVec, UnitSimplexPoint};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub points: Vec<String>,
    pub min_open: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDoc {
    pub dim: usize,
    pub samples: Vec<Vec<Value>>,
    #[serde(default)]
    pub names: Option<Vec<String>>,
    #[serde(default)]
    pub table: Option<Vec<Vec<Value>>>,
}

/// A finite space inline, by bundle name, or a builtin: `"sierpinski"`,
/// `"interval:N"`, `"discrete:N"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Name(String),
    Inline(SpaceDoc),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MetricRef {
    Name(String),
    Inline(MetricDoc),
}

/// The ground of a partition of unity: a finite space or a metric sample set.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GroundRef {
    Name(String),
    Metric(MetricDoc),
    Finite(SpaceDoc),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDoc {
    pub entries: BTreeMap<String, Value>,
    #[serde(default)]
    pub tail_mass: Option<Value>,
    #[serde(default)]
    pub tail_sup: Option<Value>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallDoc {
    pub center: Vec<Value>,
    pub radius: Value,
}

/// `codomain` may be `"discrete"`: the discrete space on the value names.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub domain: SpaceRef,
    pub codomain: SpaceRef,
    pub values: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallCoverDoc {
    pub metric: MetricRef,
    pub balls: BTreeMap<String, BallDoc>,
    #[serde(default)]
    pub witnesses: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembersCoverDoc {
    pub ground: GroundRef,
    pub members: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub witnesses: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CoverDoc {
    Balls(BallCoverDoc),
    Members(MembersCoverDoc),
    Map(MapDoc),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PouDoc {
    pub ground: GroundRef,
    pub indices: Vec<String>,
    pub rows: BTreeMap<String, BTreeMap<String, Value>>,
    #[serde(default)]
    pub lipschitz: Option<Value>,
}

/// A partition of unity with an optional cover to check it against.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PouCheckDoc {
    pub pou: PouDoc,
    #[serde(default)]
    pub cover: Option<CoverDoc>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetDoc {
    Point { p: Vec<Value> },
    Segment { a: Vec<Value>, b: Vec<Value> },
    Box { lo: Vec<Value>, hi: Vec<Value> },
    Polytope { vertices: Vec<Vec<Value>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDoc {
    pub ambient_dim: usize,
    pub sets: BTreeMap<String, SetDoc>,
}

/// Regular grid `lo + (hi − lo)·i/steps`, named `g{i₁}_{i₂}…`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub lo: Vec<Value>,
    pub hi: Vec<Value>,
    pub steps: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum AnchorsDoc {
    /// Coordinate lists, named `a0`, `a1`, ….
    List(Vec<Vec<Value>>),
    Grid { grid: GridDoc },
    Named(BTreeMap<String, Vec<Value>>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectDoc {
    pub target: TargetDoc,
    #[serde(default)]
    pub epsilon: Option<Value>,
    pub anchors: AnchorsDoc,
}

/// Settings for the seeded random section of `verify-all`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDoc {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_trials() -> usize {
    10
}

fn default_max_points() -> usize {
    6
}

/// A named collection of instances; names in `spaces` and `metrics` can be
/// referenced from the other sections.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceDoc>,
    #[serde(default)]
    pub metrics: BTreeMap<String, MetricDoc>,
    #[serde(default)]
    pub vectors: BTreeMap<String, VectorDoc>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapDoc>,
    #[serde(default)]
    pub covers: BTreeMap<String, CoverDoc>,
    #[serde(default)]
    pub pous: BTreeMap<String, PouCheckDoc>,
    #[serde(default)]
    pub selections: BTreeMap<String, SelectDoc>,
    #[serde(default)]
    pub random: Option<RandomDoc>,
}

pub type NamedBalls<S> = BTreeMap<IndexId, Ball<S>>;

/// A cover together with the data it was built from.
#[derive(Clone, Debug)]
pub struct LoadedCover<S> {
    pub cover: IndexedCover,
    pub balls: Option<(MetricSampleSpace<S>, NamedBalls<S>)>,
    pub witnesses: Option<PointSet>,
}

/// Turns documents into validated values, resolving names against a bundle.
pub struct Loader<'a, S> {
    bundle: Option<&'a BundleDoc>,
    pub tol_sum: S,
    pub tol_metric: S,
}

fn scalar<S: Scalar>(v: &Value) -> Result<S, Error> {
    Ok(scalar_from_json(v)?)
}

fn coords<S: Scalar>(v: &[Value]) -> Result<Vec<S>, Error> {
    v.iter().map(scalar).collect()
}

impl<'a, S: Scalar> Loader<'a, S> {
    pub fn new(bundle: Option<&'a BundleDoc>, tol_sum: S, tol_metric: S) -> Self {
        Loader {
            bundle,
            tol_sum,
            tol_metric,
        }
    }

    pub fn space_doc(&self, doc: &SpaceDoc) -> Result<FiniteSpace, Error> {
        Ok(FiniteSpace::from_named(&doc.points, &doc.min_open)?)
    }

    fn builtin(name: &str) -> Result<Option<FiniteSpace>, Error> {
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::schema(format!("bad size in space name {name:?}")))
        };
        Ok(if name == "sierpinski" {
            Some(FiniteSpace::sierpinski())
        } else if let Some(n) = name.strip_prefix("interval:") {
            Some(FiniteSpace::interval_model(count(n)?)?)
        } else if let Some(n) = name.strip_prefix("discrete:") {
            Some(FiniteSpace::discrete(count(n)?))
        } else {
            None
        })
    }

    pub fn space(&self, r: &SpaceRef) -> Result<FiniteSpace, Error> {
        match r {
            SpaceRef::Inline(doc) => self.space_doc(doc),
            SpaceRef::Name(name) => {
                if let Some(doc) = self.bundle.and_then(|b| b.spaces.get(name)) {
                    return self.space_doc(doc);
                }
                Self::builtin(name)?.ok_or_else(|| Error::schema(format!("unknown space {name:?}")))
            }
        }
    }

    pub fn metric_doc(&self, doc: &MetricDoc) -> Result<MetricSampleSpace<S>, Error> {
        let samples = doc
            .samples
            .iter()
            .map(|s| coords(s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut m = match &doc.names {
            Some(names) => MetricSampleSpace::with_names(doc.dim, names.clone(), samples)?,
            None => MetricSampleSpace::euclidean(doc.dim, samples)?,
        };
        if let Some(table) = &doc.table {
            let t = table
                .iter()
                .map(|r| coords(r))
                .collect::<Result<Vec<_>, _>>()?;
            m = m.with_table(t, &self.tol_metric)?;
        }
        Ok(m)
    }

    pub fn metric(&self, r: &MetricRef) -> Result<MetricSampleSpace<S>, Error> {
        match r {
            MetricRef::Inline(doc) => self.metric_doc(doc),
            MetricRef::Name(name) => match self.bundle.and_then(|b| b.metrics.get(name)) {
                Some(doc) => self.metric_doc(doc),
                None => Err(Error::schema(format!("unknown metric space {name:?}"))),
            },
        }
    }

    pub fn ground(&self, r: &GroundRef) -> Result<Ground<S>, Error> {
        match r {
            GroundRef::Metric(doc) => Ok(Ground::Metric(self.metric_doc(doc)?)),
            GroundRef::Finite(doc) => Ok(Ground::Finite(self.space_doc(doc)?)),
            GroundRef::Name(name) => match self.bundle.and_then(|b| b.metrics.get(name)) {
                Some(doc) => Ok(Ground::Metric(self.metric_doc(doc)?)),
                None => Ok(Ground::Finite(self.space(&SpaceRef::Name(name.clone()))?)),
            },
        }
    }

    pub fn vector(&self, doc: &VectorDoc) -> Result<ExtendedUnitVec<S>, Error> {
        let entries = doc
            .entries
            .iter()
            .map(|(k, v)| Ok((IndexId::new(k.as_str()), scalar::<S>(v)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        // zeros would otherwise vanish silently from the carrier
        if let Some((k, _)) = entries.iter().find(|(_, v)| v.is_zero()) {
            return Err(crate::error::SparseError::NonPositiveEntry {
                index: k.clone(),
                value: "0".into(),
            }
            .into());
        }
        let explicit = SparseVec::from_entries(entries);
        let tail_mass = doc.tail_mass.as_ref().map(scalar).transpose()?.unwrap_or_else(S::zero);
        let tail_sup = doc.tail_sup.as_ref().map(scalar).transpose()?.unwrap_or_else(S::zero);
        Ok(ExtendedUnitVec::new(explicit, tail_mass, tail_sup, &self.tol_sum)?)
    }

    pub fn map(&self, doc: &MapDoc) -> Result<SetValuedMap, Error> {
        let domain = self.space(&doc.domain)?;
        let codomain = match &doc.codomain {
            SpaceRef::Name(n) if n == "discrete" => {
                let names: std::collections::BTreeSet<&String> = doc.values.values().flatten().collect();
                let names: Vec<&String> = names.into_iter().collect();
                FiniteSpace::discrete_named(&names)?
            }
            r => self.space(r)?,
        };
        Ok(SetValuedMap::from_named(domain, codomain, &doc.values)?)
    }

    fn witnesses(names: &[String], witnesses: &Option<Vec<String>>) -> Result<Option<PointSet>, Error> {
        witnesses
            .as_ref()
            .map(|w| {
                w.iter()
                    .map(|n| {
                        names
                            .iter()
                            .position(|m| m == n)
                            .ok_or_else(|| Error::schema(format!("unknown witness {n:?}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn balls(&self, balls: &BTreeMap<String, BallDoc>) -> Result<BTreeMap<IndexId, Ball<S>>, Error> {
        balls
            .iter()
            .map(|(k, b)| {
                let ball = Ball::new(coords(&b.center)?, scalar(&b.radius)?)?;
                Ok((IndexId::new(k.as_str()), ball))
            })
            .collect()
    }

    pub fn cover(&self, doc: &CoverDoc) -> Result<LoadedCover<S>, Error> {
        match doc {
            CoverDoc::Balls(d) => {
                let space = self.metric(&d.metric)?;
                let balls = self.balls(&d.balls)?;
                let cover = ball_cover(&space, &balls)?;
                let witnesses = Self::witnesses(space.names(), &d.witnesses)?;
                Ok(LoadedCover {
                    cover,
                    balls: Some((space, balls)),
                    witnesses,
                })
            }
            CoverDoc::Members(d) => {
                let space = self.ground(&d.ground)?.as_finite_space();
                let members = d
                    .members
                    .iter()
                    .map(|(k, pts)| Ok((IndexId::new(k.as_str()), space.set_of(pts)?)))
                    .collect::<Result<BTreeMap<_, _>, Error>>()?;
                let witnesses = Self::witnesses(space.names(), &d.witnesses)?;
                let cover = IndexedCover::from_fibers(space, &members)?;
                Ok(LoadedCover {
                    cover,
                    balls: None,
                    witnesses,
                })
            }
            CoverDoc::Map(d) => {
                let map = self.map(d)?;
                Ok(LoadedCover {
                    cover: IndexedCover::new(map)?,
                    balls: None,
                    witnesses: None,
                })
            }
        }
    }

    pub fn pou(&self, doc: &PouDoc) -> Result<PartitionOfUnity<S>, Error> {
        let ground = self.ground(&doc.ground)?;
        if let Some(k) = doc.rows.keys().find(|k| !ground.names().contains(k)) {
            return Err(Error::schema(format!("row for unknown point {k:?}")));
        }
        let mut rows = Vec::with_capacity(ground.len());
        for name in ground.names() {
            let row = doc
                .rows
                .get(name)
                .ok_or_else(|| crate::error::PouError::MissingRow(name.clone()))?;
            let entries = row
                .iter()
                .map(|(k, v)| Ok((IndexId::new(k.as_str()), scalar::<S>(v)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            rows.push(SparseVec::from_entries(entries));
        }
        let indices = doc.indices.iter().map(|k| IndexId::new(k.as_str())).collect();
        let lipschitz = doc.lipschitz.as_ref().map(scalar).transpose()?;
        Ok(validate_pou(ground, indices, rows, &self.tol_sum)?.with_lipschitz(lipschitz))
    }

    pub fn target(&self, doc: &TargetDoc) -> Result<ConvexTarget<S>, Error> {
        let sets = doc
            .sets
            .iter()
            .map(|(k, s)| {
                let set = match s {
                    SetDoc::Point { p } => ConvexSet::Point(coords(p)?),
                    SetDoc::Segment { a, b } => ConvexSet::Segment {
                        a: coords(a)?,
                        b: coords(b)?,
                    },
                    SetDoc::Box { lo, hi } => ConvexSet::Box {
                        lo: coords(lo)?,
                        hi: coords(hi)?,
                    },
                    SetDoc::Polytope { vertices } => ConvexSet::Polytope(
                        vertices.iter().map(|v| coords(v)).collect::<Result<_, _>>()?,
                    ),
                };
                Ok((k.clone(), set))
            })
            .collect::<Result<BTreeMap<_, _>, Error>>()?;
        Ok(ConvexTarget::new(doc.ambient_dim, sets)?)
    }

    pub fn anchors(&self, doc: &AnchorsDoc) -> Result<BTreeMap<IndexId, Vec<S>>, Error> {
        match doc {
            AnchorsDoc::List(list) => list
                .iter()
                .enumerate()
                .map(|(i, c)| Ok((IndexId::new(format!("a{i}")), coords(c)?)))
                .collect(),
            AnchorsDoc::Named(map) => map
                .iter()
                .map(|(k, c)| Ok((IndexId::new(k.as_str()), coords(c)?)))
                .collect(),
            AnchorsDoc::Grid { grid } => {
                let lo: Vec<S> = coords(&grid.lo)?;
                let hi: Vec<S> = coords(&grid.hi)?;
                if lo.len() != hi.len() || lo.len() != grid.steps.len() {
                    return Err(Error::schema("grid lo, hi and steps must have equal length"));
                }
                Ok(grid_points(&lo, &hi, &grid.steps))
            }
        }
    }
}

/// Points `lo + (hi − lo)·i/steps` for every multi-index `i`; a zero step
/// count pins that coordinate to `lo`.
pub fn grid_points<S: Scalar>(lo: &[S], hi: &[S], steps: &[usize]) -> BTreeMap<IndexId, Vec<S>> {
    let mut out = BTreeMap::new();
    let mut idx = vec![0usize; steps.len()];
    loop {
        let name = format!(
            "g{}",
            idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("_")
        );
        let point = (0..steps.len())
            .map(|k| {
                if steps[k] == 0 {
                    lo[k].clone()
                } else {
                    let t = S::from_ratio(idx[k] as i64, steps[k] as i64);
                    lo[k].clone() + (hi[k].clone() - lo[k].clone()) * t
                }
            })
            .collect();
        out.insert(IndexId::new(name), point);
        let mut k = 0;
        loop {
            if k == steps.len() {
                return out;
            }
            if idx[k] < steps[k] {
                idx[k] += 1;
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn scalar_json<S: Scalar>(v: &S) -> Value {
    Value::String(v.render())
}

pub fn coords_json<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(scalar_json).collect())
}

pub fn entries_json<S: Scalar>(v: &SparseVec<S>) -> Value {
    Value::Object(
        v.iter()
            .map(|(k, x)| (k.to_string(), scalar_json(x)))
            .collect::<Map<_, _>>(),
    )
}

pub fn sparse_json<S: Scalar>(v: &SparseVec<S>) -> Value {
    json!({ "entries": entries_json(v) })
}

pub fn simplex_json<S: Scalar>(p: &UnitSimplexPoint<S>) -> Value {
    sparse_json(p.as_vec())
}

pub fn space_json(x: &FiniteSpace) -> Value {
    let min_open: Map<String, Value> = (0..x.len())
        .map(|p| (x.name(p).to_owned(), json!(x.names_of(x.min_open(p)))))
        .collect();
    json!({ "points": x.names(), "min_open": min_open })
}

pub fn metric_json<S: Scalar>(m: &MetricSampleSpace<S>) -> Value {
    let mut out = json!({
        "dim": m.dim(),
        "names": m.names(),
        "samples": m.samples().iter().map(|c| coords_json(c)).collect::<Vec<_>>(),
    });
    if let Some(t) = m.table() {
        out["table"] = Value::Array(t.iter().map(|r| coords_json(r)).collect());
    }
    out
}

pub fn ground_json<S: Scalar>(g: &Ground<S>) -> Value {
    match g {
        Ground::Finite(x) => space_json(x),
        Ground::Metric(m) => metric_json(m),
    }
}

pub fn pou_json<S: Scalar>(p: &PartitionOfUnity<S>) -> Value {
    let ground = p.ground();
    let rows: Map<String, Value> = (0..ground.len())
        .map(|x| (ground.name(x).to_owned(), entries_json(p.row(x).as_vec())))
        .collect();
    let mut out = json!({
        "ground": ground_json(ground),
        "indices": p.indices(),
        "rows": rows,
    });
    if let Some(l) = p.lipschitz() {
        out["lipschitz"] = scalar_json(l);
    }
    out
}

pub fn cover_json(c: &IndexedCover) -> Value {
    let x = c.domain();
    let members: Map<String, Value> = c
        .members()
        .into_iter()
        .map(|(k, m)| (k.to_string(), json!(x.names_of(&m))))
        .collect();
    json!({ "ground": space_json(x), "members": members })
}

pub fn map_json(m: &SetValuedMap) -> Value {
    let x = m.domain();
    let y = m.codomain();
    let values: Map<String, Value> = (0..x.len())
        .map(|p| (x.name(p).to_owned(), json!(y.names_of(m.value(p)))))
        .collect();
    json!({ "domain": space_json(x), "codomain": space_json(y), "values": values })
}

fn entry_json<S: Scalar>(e: &CertificateEntry<S>, ground: &Ground<S>) -> Value {
    let neighborhood = match &e.neighborhood {
        Neighborhood::MinOpen(u) => {
            let names: Vec<&str> = u.iter().map(|&p| ground.name(p)).collect();
            json!({ "kind": "min_open", "points": names })
        }
        Neighborhood::MetricRadius(r) => json!({ "kind": "metric_radius", "radius": scalar_json(r) }),
        Neighborhood::Point => json!({ "kind": "point" }),
    };
    json!({
        "point": ground.name(e.point),
        "neighborhood": neighborhood,
        "bound": e.bound,
        "l1_radius": scalar_json(&e.l1_radius),
    })
}

pub fn certificate_json<S: Scalar>(c: &LocalFinitenessCertificate<S>, ground: &Ground<S>) -> Value {
    json!({
        "entries": c.entries.iter().map(|e| entry_json(e, ground)).collect::<Vec<_>>(),
        "strong_containment": c.strong_containment,
    })
}

pub fn complex_json(c: &SimplicialComplex) -> Value {
    serde_json::to_value(c).expect("complexes serialize")
}

pub fn selection_json<S: Scalar>(c: &SelectionCertificate<S>) -> Value {
    Value::Array(
        c.records
            .iter()
            .map(|r| {
                let mut o = json!({
                    "point": r.point,
                    "value": coords_json(&r.value),
                    "weights": entries_json(&r.weights),
                    "contained": r.contained,
                    "holds": r.holds,
                });
                if let Some(d) = &r.distance {
                    o["distance"] = scalar_json(d);
                }
                if let Some(e) = &r.epsilon {
                    o["epsilon"] = scalar_json(e);
                }
                o
            })
            .collect(),
    )
}
