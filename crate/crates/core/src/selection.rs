//! Convex-hull mappings over index sets, barycentric selections from
//! partitions of unity, and the ε-selection pipeline.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::convex::ConvexSet;
use crate::error::SelectionError;
use crate::pou::{mather_compose, validate_pou, Ground, LocalFinitenessCertificate, PartitionOfUnity};
use crate::scalar::{Mode, Scalar};
use crate::setmap::IndexedCover;
use crate::space::{FiniteSpace, PointSet};
use crate::sparse::{IndexId, SparseVec, UnitSimplexPoint};

/// `p ∈ conv[Ω](x)`. The indices are linearly independent in `c₀₀`, so a
/// simplex point has a unique representation and membership reduces to
/// `carrier(p) ⊆ Ω(x)`.
pub fn conv_membership<S: Scalar>(cover: &IndexedCover, x: usize, p: &UnitSimplexPoint<S>) -> bool {
    p.carrier().is_subset(&cover.value_ids(x))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvFiber {
    pub fiber: Vec<String>,
    pub open: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String)>,
}

/// The fiber `(conv[Ω])⁻¹(p) = ⋂_{α ∈ carrier(p)} Ω⁻¹(α)` and whether it is open.
pub fn conv_fiber_open<S: Scalar>(cover: &IndexedCover, p: &UnitSimplexPoint<S>) -> ConvFiber {
    let space = cover.domain();
    let fiber = p
        .carrier()
        .iter()
        .map(|k| cover.member(k.as_str()))
        .reduce(|acc, m| &acc & &m)
        .unwrap_or_default();
    let witness = space
        .first_non_interior(&fiber)
        .map(|(x, y)| (space.name(x).to_owned(), space.name(y).to_owned()));
    ConvFiber {
        fiber: space.names_of(&fiber),
        open: witness.is_none(),
        witness,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRecord<S: Scalar> {
    pub point: String,
    pub value: Vec<S>,
    /// The weights that produced `value`, keyed by anchor.
    pub weights: SparseVec<S>,
    /// `value` lies in the hull of the anchors with positive weight.
    pub contained: bool,
    /// `d(value, Φ(point))` for ε-selections.
    pub distance: Option<S>,
    pub epsilon: Option<S>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionCertificate<S: Scalar> {
    pub records: Vec<SelectionRecord<S>>,
}

impl<S: Scalar> SelectionCertificate<S> {
    pub fn holds(&self) -> bool {
        self.records.iter().all(|r| r.holds)
    }

    pub fn values(&self) -> Vec<&[S]> {
        self.records.iter().map(|r| r.value.as_slice()).collect()
    }
}

fn mode_tolerance<S: Scalar>() -> S {
    match S::MODE {
        Mode::Exact => S::zero(),
        Mode::Float => S::from_f64_lossy(1e-9),
    }
}

/// `φ(x) = Σ γ_α(x)·anchor(α)`, with a containment check of each value in
/// the hull of its active anchors.
pub fn barycentric_selection<S: Scalar>(
    gamma: &PartitionOfUnity<S>,
    anchors: &BTreeMap<IndexId, Vec<S>>,
) -> Result<SelectionCertificate<S>, SelectionError> {
    let dim = anchors.values().next().map_or(0, Vec::len);
    if let Some(a) = anchors.values().find(|a| a.len() != dim) {
        return Err(SelectionError::DimensionMismatch {
            expected: dim,
            found: a.len(),
        });
    }
    let tol = mode_tolerance::<S>();
    let ground = gamma.ground();
    let mut records = Vec::with_capacity(ground.len());
    for x in 0..ground.len() {
        let row = gamma.row(x);
        let mut value = vec![S::zero(); dim];
        let mut active = Vec::new();
        for (k, w) in row.iter() {
            let a = anchors
                .get(k)
                .ok_or_else(|| SelectionError::MissingAnchor(k.clone()))?;
            for (v, c) in value.iter_mut().zip(a) {
                *v = v.clone() + w.clone() * c.clone();
            }
            active.push(a.clone());
        }
        let contained = ConvexSet::Polytope(active).contains(&value, &tol);
        records.push(SelectionRecord {
            point: ground.name(x).to_owned(),
            value,
            weights: row.as_vec().clone(),
            contained,
            distance: None,
            epsilon: None,
            holds: contained,
        });
    }
    Ok(SelectionCertificate { records })
}

/// A convex-valued mapping from a finite (discrete) ground into `ℝ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexTarget<S> {
    ambient_dim: usize,
    names: Vec<String>,
    sets: Vec<ConvexSet<S>>,
}

impl<S: Scalar> ConvexTarget<S> {
    pub fn new(ambient_dim: usize, sets: BTreeMap<String, ConvexSet<S>>) -> Result<Self, SelectionError> {
        for s in sets.values() {
            s.validate(ambient_dim)?;
        }
        let (names, sets) = sets.into_iter().unzip();
        Ok(ConvexTarget {
            ambient_dim,
            names,
            sets,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn set(&self, x: usize) -> &ConvexSet<S> {
        &self.sets[x]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn ground(&self) -> FiniteSpace {
        FiniteSpace::discrete_named(&self.names).expect("map keys are distinct")
    }
}

/// Output of the ε-selection pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSelection<S: Scalar> {
    /// `Ω(x) = {a : d(a, Φ(x)) < ε}`.
    pub cover: IndexedCover,
    pub pou: PartitionOfUnity<S>,
    pub composed: PartitionOfUnity<S>,
    pub local_finiteness: LocalFinitenessCertificate<S>,
    pub certificate: SelectionCertificate<S>,
}

/// Continuous ε-selection from a finite anchor set: bump weights
/// `g_a(x) = max{ε − d(a, Φ(x)), 0}` normalized, refined through the Mather
/// transform, then mapped barycentrically onto the anchors.
///
/// Each value is a convex combination of anchors within `ε` of the convex
/// set `Φ(x)`, so it lies within `ε` as well; the certificate re-checks this
/// with the distance oracle (allowing `1e-9` slack in float mode).
pub fn epsilon_selection<S: Scalar>(
    target: &ConvexTarget<S>,
    epsilon: &S,
    anchors: &BTreeMap<IndexId, Vec<S>>,
) -> Result<EpsilonSelection<S>, SelectionError> {
    if !epsilon.gt_zero() {
        return Err(SelectionError::NonPositiveEpsilon);
    }
    let dim = target.ambient_dim();
    if let Some(a) = anchors.values().find(|a| a.len() != dim) {
        return Err(SelectionError::DimensionMismatch {
            expected: dim,
            found: a.len(),
        });
    }
    let ground = target.ground();
    let mut rows = Vec::with_capacity(target.len());
    let mut members: BTreeMap<IndexId, PointSet> =
        anchors.keys().map(|k| (k.clone(), PointSet::new())).collect();
    for x in 0..target.len() {
        let set = target.set(x);
        let g = SparseVec::from_entries(anchors.iter().map(|(k, a)| {
            let slack = epsilon.clone() - set.distance(a);
            (k.clone(), slack.max_of(S::zero()))
        }));
        if g.is_empty() {
            return Err(SelectionError::CoverGap {
                point: target.names()[x].clone(),
            });
        }
        for k in g.carrier() {
            members.get_mut(&k).expect("anchor key").insert(x);
        }
        rows.push(UnitSimplexPoint::normalize(&g)?.into_vec());
    }
    let cover = IndexedCover::from_fibers(ground.clone(), &members)
        .expect("every point has a nearby anchor");
    let pou = validate_pou(
        Ground::Finite(ground),
        anchors.keys().cloned().collect(),
        rows,
        &S::default_tolerance(),
    )?;
    let (composed, local_finiteness) = mather_compose(&pou)?;
    let mut certificate = barycentric_selection(&composed, anchors)?;
    let slack = mode_tolerance::<S>();
    for (x, r) in certificate.records.iter_mut().enumerate() {
        let d = target.set(x).distance(&r.value);
        r.holds = r.contained && d < epsilon.clone() + slack.clone();
        r.distance = Some(d);
        r.epsilon = Some(epsilon.clone());
    }
    Ok(EpsilonSelection {
        cover,
        pou,
        composed,
        local_finiteness,
        certificate,
    })
}
