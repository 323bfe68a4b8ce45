//! Partitions of unity as maps from a ground space into the unit simplex,
//! bump-function synthesis from ball covers, subordination checks and the
//! locally finite refinement through the Mather transform.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{PouError, SpaceError};
use crate::mather::{mather_eta, mather_support_bound};
use crate::metric::{Ball, MetricSampleSpace};
use crate::scalar::Scalar;
use crate::setmap::IndexedCover;
use crate::space::{FiniteSpace, PointSet};
use crate::sparse::{IndexId, IndexSet, SparseVec, UnitSimplexPoint};

/// The space a partition of unity lives on.
#[derive(Clone, Debug, PartialEq)]
pub enum Ground<S> {
    Finite(FiniteSpace),
    Metric(MetricSampleSpace<S>),
}

impl<S: Scalar> Ground<S> {
    pub fn len(&self) -> usize {
        match self {
            Ground::Finite(x) => x.len(),
            Ground::Metric(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> &[String] {
        match self {
            Ground::Finite(x) => x.names(),
            Ground::Metric(m) => m.names(),
        }
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names()[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, SpaceError> {
        self.names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| SpaceError::UnknownPoint(name.to_owned()))
    }

    /// Closure of a point set. Exact on a finite space; on samples, every
    /// sample within `tol` of the set (flagged approximate).
    pub fn closure(&self, set: &PointSet, tol: &S) -> (PointSet, bool) {
        match self {
            Ground::Finite(x) => (x.closure_unchecked(set), false),
            Ground::Metric(m) => {
                let cl = (0..m.len())
                    .filter(|&p| set.iter().any(|&s| m.distance(p, s) <= *tol))
                    .collect();
                (cl, true)
            }
        }
    }

    /// The topology seen by covers: the space itself, or the samples as a
    /// discrete space.
    pub fn as_finite_space(&self) -> FiniteSpace {
        match self {
            Ground::Finite(x) => x.clone(),
            Ground::Metric(m) => m.as_discrete_space(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity<S: Scalar> {
    ground: Ground<S>,
    indices: IndexSet,
    rows: Vec<UnitSimplexPoint<S>>,
    lipschitz: Option<S>,
}

impl<S: Scalar> PartitionOfUnity<S> {
    pub fn ground(&self) -> &Ground<S> {
        &self.ground
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn rows(&self) -> &[UnitSimplexPoint<S>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &UnitSimplexPoint<S> {
        &self.rows[x]
    }

    /// Declared ℓ₁ Lipschitz constant of `x ↦ ξ(x)` on a metric ground.
    pub fn lipschitz(&self) -> Option<&S> {
        self.lipschitz.as_ref()
    }

    pub fn with_lipschitz(mut self, lipschitz: Option<S>) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    /// The coordinate function `ξ_α(x)`.
    pub fn coordinate(&self, index: &str, x: usize) -> S {
        self.rows[x].get(index)
    }

    /// `carrier(ξ(x))`.
    pub fn carrier_at(&self, x: usize) -> IndexSet {
        self.rows[x].carrier()
    }

    /// `st_ξ(α) = coz(ξ_α) = {x : ξ_α(x) > 0}`.
    pub fn open_star(&self, index: &str) -> Result<PointSet, PouError> {
        if !self.indices.contains(index) {
            return Err(PouError::NoSuchIndex(IndexId::new(index)));
        }
        Ok((0..self.rows.len())
            .filter(|&x| self.rows[x].get(index).gt_zero())
            .collect())
    }
}

/// Validates a candidate partition of unity.
///
/// Rows must lie in the simplex (sum within `tol_sum`). On a finite space a
/// real-valued function is continuous iff it is constant along the
/// specialization preorder, so every `y ∈ min_open(x)` must carry the same
/// row as `x`. Metric grounds are not checked for continuity.
pub fn validate_pou<S: Scalar>(
    ground: Ground<S>,
    indices: IndexSet,
    rows: Vec<SparseVec<S>>,
    tol_sum: &S,
) -> Result<PartitionOfUnity<S>, PouError> {
    if rows.len() != ground.len() {
        return Err(PouError::WrongRowCount {
            expected: ground.len(),
            found: rows.len(),
        });
    }
    let mut checked = Vec::with_capacity(rows.len());
    for (x, row) in rows.into_iter().enumerate() {
        if let Some(index) = row.carrier().into_iter().find(|k| !indices.contains(k)) {
            return Err(PouError::UnknownIndex {
                point: ground.name(x).to_owned(),
                index,
            });
        }
        let p = UnitSimplexPoint::new(row, tol_sum).map_err(|source| PouError::RowNotSimplex {
            point: ground.name(x).to_owned(),
            source,
        })?;
        checked.push(p);
    }
    if let Ground::Finite(space) = &ground {
        for x in 0..space.len() {
            for &y in space.min_open(x) {
                if y != x && !rows_agree(&checked[x], &checked[y], tol_sum) {
                    return Err(PouError::DiscontinuousAt {
                        x: space.name(x).to_owned(),
                        y: space.name(y).to_owned(),
                    });
                }
            }
        }
    }
    Ok(PartitionOfUnity {
        ground,
        indices,
        rows: checked,
        lipschitz: None,
    })
}

fn rows_agree<S: Scalar>(a: &UnitSimplexPoint<S>, b: &UnitSimplexPoint<S>, tol: &S) -> bool {
    a.carrier() == b.carrier()
        && a.iter()
            .all(|(k, v)| (v.clone() - b.get(k.as_str())).abs() <= *tol)
}

fn check_balls<S: Scalar>(
    space: &MetricSampleSpace<S>,
    balls: &BTreeMap<IndexId, Ball<S>>,
) -> Result<(), PouError> {
    if !space.is_euclidean() {
        return Err(PouError::NonEuclideanMetric);
    }
    if let Some(b) = balls.values().find(|b| b.center.len() != space.dim()) {
        return Err(SpaceError::DimensionMismatch {
            expected: space.dim(),
            found: b.center.len(),
        }
        .into());
    }
    Ok(())
}

/// The cover of the samples by balls, `Ω(x) = {α : x ∈ ball α}`.
pub fn ball_cover<S: Scalar>(
    space: &MetricSampleSpace<S>,
    balls: &BTreeMap<IndexId, Ball<S>>,
) -> Result<IndexedCover, PouError> {
    check_balls(space, balls)?;
    let members: BTreeMap<IndexId, PointSet> = balls
        .iter()
        .map(|(k, b)| {
            let inside = (0..space.len())
                .filter(|&x| space.ball_membership(b, x))
                .collect();
            (k.clone(), inside)
        })
        .collect();
    if let Some(x) = (0..space.len()).find(|x| !members.values().any(|m| m.contains(x))) {
        return Err(PouError::NotACover {
            sample: space.name(x).to_owned(),
        });
    }
    Ok(IndexedCover::from_fibers(space.as_discrete_space(), &members)
        .expect("every sample is in some ball"))
}

/// Bump partition of unity `ξ_α = g_α / Σ_β g_β` with
/// `g_α(x) = max{r_α − d(x, c_α), 0}`.
///
/// The declared Lipschitz constant is `2n / min_x Σ_β g_β(x)` for `n` balls:
/// each `g_α` is 1-Lipschitz, and
/// `‖ξ(x) − ξ(x')‖₁ ≤ 2 Σ_α |g_α(x) − g_α(x')| / Σ_β g_β(x)`.
pub fn pou_from_metric_cover<S: Scalar>(
    space: &MetricSampleSpace<S>,
    balls: &BTreeMap<IndexId, Ball<S>>,
) -> Result<PartitionOfUnity<S>, PouError> {
    check_balls(space, balls)?;
    let mut rows = Vec::with_capacity(space.len());
    let mut min_total: Option<S> = None;
    for x in 0..space.len() {
        let g = SparseVec::from_entries(
            balls
                .iter()
                .map(|(k, b)| (k.clone(), space.dist_to_ball_complement(b, x))),
        );
        if g.is_empty() {
            return Err(PouError::NotACover {
                sample: space.name(x).to_owned(),
            });
        }
        let total = g.l1_norm();
        min_total = Some(match min_total {
            Some(m) => m.min_of(total.clone()),
            None => total.clone(),
        });
        rows.push(UnitSimplexPoint::normalize(&g)?);
    }
    let lipschitz = min_total.map(|m| S::from_ratio(2 * balls.len() as i64, 1) / m);
    Ok(PartitionOfUnity {
        ground: Ground::Metric(space.clone()),
        indices: balls.keys().cloned().collect(),
        rows,
        lipschitz,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubordinationReport {
    pub index_subordinated: bool,
    pub strongly_subordinated: bool,
    /// Strong subordination was decided on sample closures, not exactly.
    pub approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_witness: Option<(String, IndexId)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_witness: Option<(IndexId, String)>,
}

fn check_same_ground<S: Scalar>(
    pou: &PartitionOfUnity<S>,
    cover: &IndexedCover,
) -> Result<(), PouError> {
    if pou.ground.names() != cover.domain().names() {
        return Err(PouError::GroundMismatch(
            "partition and cover are over different points".into(),
        ));
    }
    Ok(())
}

/// Index subordination `carrier(ξ(x)) ⊆ Ω(x)` and strong subordination
/// `cl(coz ξ_α) ⊆ Ω⁻¹(α)`.
pub fn subordination_check<S: Scalar>(
    pou: &PartitionOfUnity<S>,
    cover: &IndexedCover,
    tol: &S,
) -> Result<SubordinationReport, PouError> {
    check_same_ground(pou, cover)?;
    if &cover.indices() != pou.indices() {
        return Err(PouError::IndexSetMismatch(
            "partition and cover use different index sets".into(),
        ));
    }
    let index_witness = (0..pou.ground.len()).find_map(|x| {
        let allowed = cover.value_ids(x);
        pou.carrier_at(x)
            .into_iter()
            .find(|k| !allowed.contains(k))
            .map(|k| (pou.ground.name(x).to_owned(), k))
    });
    let mut approximate = false;
    let mut strong_witness = None;
    for index in pou.indices() {
        let star = pou.open_star(index.as_str())?;
        let (support, approx) = pou.ground.closure(&star, tol);
        approximate |= approx;
        let member = cover.member(index.as_str());
        if let Some(&x) = support.iter().find(|x| !member.contains(x)) {
            strong_witness = Some((index.clone(), pou.ground.name(x).to_owned()));
            break;
        }
    }
    Ok(SubordinationReport {
        index_subordinated: index_witness.is_none(),
        strongly_subordinated: strong_witness.is_none(),
        approximate,
        index_witness,
        strong_witness,
    })
}

/// The neighbourhood a certificate entry speaks for.
#[derive(Clone, Debug, PartialEq)]
pub enum Neighborhood<S> {
    /// The minimal open set of the point.
    MinOpen(PointSet),
    /// All samples strictly closer than the radius.
    MetricRadius(S),
    /// Only the point itself (no modulus of continuity available).
    Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateEntry<S> {
    pub point: usize,
    pub neighborhood: Neighborhood<S>,
    pub bound: IndexSet,
    pub l1_radius: S,
}

/// Per-point finite index bounds for the carriers of a composed partition.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFinitenessCertificate<S> {
    pub entries: Vec<CertificateEntry<S>>,
    /// `cl(coz γ_α) ⊆ coz ξ_α` for every index, decided exactly on finite grounds.
    pub strong_containment: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateViolation {
    pub point: String,
    pub neighbor: String,
    pub index: IndexId,
}

impl<S: Scalar> LocalFinitenessCertificate<S> {
    /// Points of the certified neighbourhood of `entry`.
    pub fn neighbors(&self, entry: &CertificateEntry<S>, ground: &Ground<S>) -> PointSet {
        match (&entry.neighborhood, ground) {
            (Neighborhood::MinOpen(u), _) => u.clone(),
            (Neighborhood::MetricRadius(r), Ground::Metric(m)) => (0..m.len())
                .filter(|&y| m.distance(entry.point, y) < *r)
                .collect(),
            _ => PointSet::from([entry.point]),
        }
    }

    /// Checks every neighbour's carrier against the certified bound.
    pub fn verify(&self, composed: &PartitionOfUnity<S>) -> Vec<CertificateViolation> {
        let ground = composed.ground();
        let mut out = Vec::new();
        for e in &self.entries {
            for y in self.neighbors(e, ground) {
                for k in composed.carrier_at(y) {
                    if !e.bound.contains(&k) {
                        out.push(CertificateViolation {
                            point: ground.name(e.point).to_owned(),
                            neighbor: ground.name(y).to_owned(),
                            index: k,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Composes `ξ` with the Mather transform pointwise, producing a locally
/// finite partition `γ` with `carrier(γ(x)) ⊆ carrier(ξ(x))`, together with
/// a local finiteness certificate.
pub fn mather_compose<S: Scalar>(
    pou: &PartitionOfUnity<S>,
) -> Result<(PartitionOfUnity<S>, LocalFinitenessCertificate<S>), PouError> {
    let mut rows = Vec::with_capacity(pou.rows.len());
    let mut entries = Vec::with_capacity(pou.rows.len());
    for (x, row) in pou.rows.iter().enumerate() {
        let y = row.clone().into();
        rows.push(mather_eta(&y)?);
        let sb = mather_support_bound(&y)?;
        let neighborhood = match (&pou.ground, &pou.lipschitz) {
            (Ground::Finite(space), _) => Neighborhood::MinOpen(space.min_open(x).clone()),
            (Ground::Metric(_), Some(l)) if l.gt_zero() => {
                Neighborhood::MetricRadius(sb.radius.clone() / l.clone())
            }
            (Ground::Metric(_), _) => Neighborhood::Point,
        };
        entries.push(CertificateEntry {
            point: x,
            neighborhood,
            bound: sb.bound,
            l1_radius: sb.radius,
        });
    }
    let composed = PartitionOfUnity {
        ground: pou.ground.clone(),
        indices: pou.indices.clone(),
        rows,
        lipschitz: None,
    };
    let strong_containment = match &pou.ground {
        Ground::Finite(space) => Some(pou.indices.iter().all(|k| {
            let star_gamma = composed.open_star(k.as_str()).expect("shared index set");
            let star_xi = pou.open_star(k.as_str()).expect("known index");
            space.closure_unchecked(&star_gamma).is_subset(&star_xi)
        })),
        Ground::Metric(_) => None,
    };
    Ok((
        composed,
        LocalFinitenessCertificate {
            entries,
            strong_containment,
        },
    ))
}
