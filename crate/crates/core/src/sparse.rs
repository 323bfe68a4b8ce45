//! Finitely supported functions on an index universe, the ℓ₁ unit simplex,
//! and unit vectors with a certified tail.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SparseError;
use crate::scalar::Scalar;

/// Name of an element of the index universe.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexId(String);

impl IndexId {
    pub fn new(name: impl Into<String>) -> Self {
        IndexId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for IndexId {
    fn from(s: &str) -> Self {
        IndexId(s.to_owned())
    }
}

impl From<String> for IndexId {
    fn from(s: String) -> Self {
        IndexId(s)
    }
}

impl Borrow<str> for IndexId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

pub type IndexSet = BTreeSet<IndexId>;

/// A finitely supported real function. Zero values are never stored, so
/// the key set is the carrier.
#[derive(Clone, PartialEq)]
pub struct SparseVec<S> {
    entries: BTreeMap<IndexId, S>,
    universe: Option<IndexSet>,
}

impl<S: Scalar> fmt::Debug for SparseVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(k, v)| (k, v.render())))
            .finish()
    }
}

impl<S: Scalar> Default for SparseVec<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> SparseVec<S> {
    pub fn zero() -> Self {
        SparseVec {
            entries: BTreeMap::new(),
            universe: None,
        }
    }

    /// Characteristic function of a single index.
    pub fn dirac(index: impl Into<IndexId>) -> Self {
        let mut v = Self::zero();
        v.entries.insert(index.into(), S::one());
        v
    }

    pub fn from_entries<I, K>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, S)>,
        K: Into<IndexId>,
    {
        let mut v = Self::zero();
        for (k, s) in entries {
            v.add_at(k.into(), s);
        }
        v
    }

    pub fn with_universe(mut self, universe: IndexSet) -> Self {
        self.universe = Some(universe);
        self
    }

    pub fn universe(&self) -> Option<&IndexSet> {
        self.universe.as_ref()
    }

    pub fn get(&self, index: &str) -> S {
        self.entries.get(index).cloned().unwrap_or_else(S::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IndexId, &S)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &BTreeMap<IndexId, S> {
        &self.entries
    }

    /// Adds `value` to the coordinate at `index`, dropping it if the result is zero.
    pub fn add_at(&mut self, index: IndexId, value: S) {
        if value.is_zero() {
            return;
        }
        let sum = match self.entries.remove(&index) {
            Some(old) => old + value,
            None => value,
        };
        if !sum.is_zero() {
            self.entries.insert(index, sum);
        }
    }

    /// Indices with nonzero value.
    pub fn carrier(&self) -> IndexSet {
        self.entries.keys().cloned().collect()
    }

    pub fn l1_norm(&self) -> S {
        self.entries
            .values()
            .fold(S::zero(), |acc, v| acc + v.abs())
    }

    pub fn sup_norm(&self) -> S {
        self.entries
            .values()
            .fold(S::zero(), |acc, v| acc.max_of(v.abs()))
    }

    /// `(‖v‖₁, ‖v‖∞)`.
    pub fn norms(&self) -> (S, S) {
        (self.l1_norm(), self.sup_norm())
    }

    pub fn scaled(&self, factor: &S) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.entries {
            out.add_at(k.clone(), v.clone() * factor.clone());
        }
        out.universe = self.universe.clone();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add_at(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(&-S::one()))
    }

    pub fn l1_distance(&self, other: &Self) -> S {
        self.sub(other).l1_norm()
    }

    pub fn all_positive(&self) -> bool {
        self.entries.values().all(|v| v.gt_zero())
    }
}

/// A point of the finitely supported unit simplex: strictly positive
/// values on a nonempty finite carrier summing to one.
#[derive(Clone, PartialEq)]
pub struct UnitSimplexPoint<S>(SparseVec<S>);

impl<S: Scalar> fmt::Debug for UnitSimplexPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<S: Scalar> UnitSimplexPoint<S> {
    /// Validates simplex membership; the sum must equal one within `tol_sum`
    /// (pass zero in exact mode).
    pub fn new(v: SparseVec<S>, tol_sum: &S) -> Result<Self, SparseError> {
        if v.is_empty() {
            return Err(SparseError::EmptyCarrier);
        }
        if let Some((k, val)) = v.iter().find(|(_, val)| !val.gt_zero()) {
            return Err(SparseError::NonPositiveEntry {
                index: k.clone(),
                value: val.render(),
            });
        }
        let sum = v.l1_norm();
        if (sum.clone() - S::one()).abs() > *tol_sum {
            return Err(SparseError::NotUnitSum { sum: sum.render() });
        }
        Ok(UnitSimplexPoint(v))
    }

    pub fn dirac(index: impl Into<IndexId>) -> Self {
        UnitSimplexPoint(SparseVec::dirac(index))
    }

    /// Uniform distribution on a nonempty finite set.
    pub fn uniform<I, K>(indices: I) -> Result<Self, SparseError>
    where
        I: IntoIterator<Item = K>,
        K: Into<IndexId>,
    {
        let ids: IndexSet = indices.into_iter().map(Into::into).collect();
        if ids.is_empty() {
            return Err(SparseError::EmptyCarrier);
        }
        let w = S::one() / S::from_ratio(ids.len() as i64, 1);
        Ok(UnitSimplexPoint(SparseVec::from_entries(
            ids.into_iter().map(|k| (k, w.clone())),
        )))
    }

    /// Divides a nonzero nonnegative vector by its ℓ₁ norm.
    pub fn normalize(v: &SparseVec<S>) -> Result<Self, SparseError> {
        if v.is_empty() {
            return Err(SparseError::EmptyCarrier);
        }
        if let Some((k, val)) = v.iter().find(|(_, val)| !val.gt_zero()) {
            return Err(SparseError::NonPositiveEntry {
                index: k.clone(),
                value: val.render(),
            });
        }
        let total = v.l1_norm();
        Ok(UnitSimplexPoint(v.scaled(&(S::one() / total))))
    }

    pub fn as_vec(&self) -> &SparseVec<S> {
        &self.0
    }

    pub fn into_vec(self) -> SparseVec<S> {
        self.0
    }

    pub fn carrier(&self) -> IndexSet {
        self.0.carrier()
    }

    pub fn get(&self, index: &str) -> S {
        self.0.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IndexId, &S)> {
        self.0.iter()
    }
}

/// Element of the full unit sphere of ℓ₁⁺ given as an explicit finite part
/// plus a certified tail: the unlisted coordinates carry `tail_mass` in total
/// and none exceeds `tail_sup`.
#[derive(Clone, PartialEq)]
pub struct ExtendedUnitVec<S> {
    explicit: SparseVec<S>,
    tail_mass: S,
    tail_sup: S,
}

impl<S: Scalar> fmt::Debug for ExtendedUnitVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtendedUnitVec")
            .field("explicit", &self.explicit)
            .field("tail_mass", &self.tail_mass.render())
            .field("tail_sup", &self.tail_sup.render())
            .finish()
    }
}

impl<S: Scalar> ExtendedUnitVec<S> {
    pub fn new(
        explicit: SparseVec<S>,
        tail_mass: S,
        tail_sup: S,
        tol_sum: &S,
    ) -> Result<Self, SparseError> {
        if let Some((k, val)) = explicit.iter().find(|(_, val)| !val.gt_zero()) {
            return Err(SparseError::NonPositiveEntry {
                index: k.clone(),
                value: val.render(),
            });
        }
        if tail_mass.lt_zero() || tail_sup.lt_zero() {
            return Err(SparseError::BadTail {
                reason: "tail bounds must be nonnegative".into(),
            });
        }
        if tail_sup > tail_mass {
            return Err(SparseError::BadTail {
                reason: format!(
                    "tail_sup {} exceeds tail_mass {}",
                    tail_sup.render(),
                    tail_mass.render()
                ),
            });
        }
        let sum = explicit.l1_norm() + tail_mass.clone();
        if (sum.clone() - S::one()).abs() > *tol_sum {
            return Err(SparseError::NotUnitSum { sum: sum.render() });
        }
        if explicit.is_empty() && tail_mass.is_zero() {
            return Err(SparseError::EmptyCarrier);
        }
        Ok(ExtendedUnitVec {
            explicit,
            tail_mass,
            tail_sup,
        })
    }

    pub fn explicit(&self) -> &SparseVec<S> {
        &self.explicit
    }

    pub fn tail_mass(&self) -> &S {
        &self.tail_mass
    }

    pub fn tail_sup(&self) -> &S {
        &self.tail_sup
    }

    pub fn has_tail(&self) -> bool {
        !self.tail_mass.is_zero()
    }

    /// `max(explicit values, tail_sup)`.
    pub fn sup_norm(&self) -> S {
        self.explicit.sup_norm().max_of(self.tail_sup.clone())
    }
}

impl<S: Scalar> From<UnitSimplexPoint<S>> for ExtendedUnitVec<S> {
    fn from(p: UnitSimplexPoint<S>) -> Self {
        ExtendedUnitVec {
            explicit: p.0,
            tail_mass: S::zero(),
            tail_sup: S::zero(),
        }
    }
}

/// `Σ_α weights(α)·points(α)`.
pub fn convex_combination<S: Scalar>(
    weights: &UnitSimplexPoint<S>,
    points: &BTreeMap<IndexId, SparseVec<S>>,
) -> Result<SparseVec<S>, SparseError> {
    let mut out = SparseVec::zero();
    for (index, w) in weights.iter() {
        let p = points
            .get(index)
            .ok_or_else(|| SparseError::MissingPoint(index.clone()))?;
        for (k, v) in p.iter() {
            out.add_at(k.clone(), w.clone() * v.clone());
        }
    }
    Ok(out)
}
