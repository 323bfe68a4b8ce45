//! Simplicial complexes, nerves of covers, canonical maps and the
//! simplex-valued mapping `x ↦ |Σ(𝒰(x))|`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{NerveError, PouError};
use crate::metric::{Ball, MetricSampleSpace};
use crate::pou::{PartitionOfUnity, Ground};
use crate::scalar::Scalar;
use crate::setmap::IndexedCover;
use crate::space::PointSet;
use crate::sparse::{IndexId, IndexSet, UnitSimplexPoint};

pub const DEFAULT_MAX_DIM: usize = 8;

/// A simplex is stored as its sorted vertex list.
pub type Simplex = Vec<IndexId>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicialComplex {
    vertices: IndexSet,
    simplices: BTreeSet<Simplex>,
    /// Built from witness points rather than exact intersections.
    witnessed: bool,
}

impl SimplicialComplex {
    /// Validates a complex: nonempty simplices, downward closed, every vertex used.
    pub fn new(
        vertices: IndexSet,
        simplices: impl IntoIterator<Item = Simplex>,
        witnessed: bool,
    ) -> Result<Self, NerveError> {
        let simplices: BTreeSet<Simplex> = simplices
            .into_iter()
            .map(|mut s| {
                s.sort();
                s.dedup();
                s
            })
            .collect();
        for s in &simplices {
            if s.is_empty() {
                return Err(NerveError::EmptySimplex);
            }
            if let Some(v) = s.iter().find(|v| !vertices.contains(*v)) {
                return Err(NerveError::ForeignVertex(v.clone()));
            }
            for face in facets(s) {
                if !face.is_empty() && !simplices.contains(&face) {
                    return Err(NerveError::NotDownwardClosed {
                        simplex: s.clone(),
                        missing: face,
                    });
                }
            }
        }
        if let Some(v) = vertices.iter().find(|v| !simplices.contains(&vec![(*v).clone()])) {
            return Err(NerveError::ForeignVertex(v.clone()));
        }
        Ok(SimplicialComplex {
            vertices,
            simplices,
            witnessed,
        })
    }

    pub fn vertices(&self) -> &IndexSet {
        &self.vertices
    }

    pub fn simplices(&self) -> &BTreeSet<Simplex> {
        &self.simplices
    }

    pub fn witnessed(&self) -> bool {
        self.witnessed
    }

    pub fn contains(&self, simplex: &IndexSet) -> bool {
        let s: Simplex = simplex.iter().cloned().collect();
        self.simplices.contains(&s)
    }

    /// Largest simplex dimension, `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.len() - 1).max()
    }

    /// First simplex with a missing face, if any.
    pub fn downward_closure_violation(&self) -> Option<(Simplex, Simplex)> {
        self.simplices.iter().find_map(|s| {
            facets(s)
                .find(|f| !f.is_empty() && !self.simplices.contains(f))
                .map(|f| (s.clone(), f))
        })
    }
}

fn facets(s: &Simplex) -> impl Iterator<Item = Simplex> + '_ {
    (0..s.len()).map(move |skip| {
        s.iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, v)| v.clone())
            .collect()
    })
}

/// Every nonempty subset of `set` with at most `max_len` elements.
fn subsets_up_to(set: &[IndexId], max_len: usize, out: &mut BTreeSet<Simplex>) {
    fn go(
        set: &[IndexId],
        start: usize,
        max_len: usize,
        cur: &mut Simplex,
        out: &mut BTreeSet<Simplex>,
    ) {
        for i in start..set.len() {
            cur.push(set[i].clone());
            out.insert(cur.clone());
            if cur.len() < max_len {
                go(set, i + 1, max_len, cur, out);
            }
            cur.pop();
        }
    }
    go(set, 0, max_len, &mut Vec::new(), out);
}

/// Witnessed nerve of a family of members: `σ` is included iff some witness
/// lies in every member of `σ`, up to dimension `max_dim`.
pub fn nerve_from_members(
    members: &BTreeMap<IndexId, PointSet>,
    witnesses: &PointSet,
    max_dim: usize,
) -> SimplicialComplex {
    let mut simplices = BTreeSet::new();
    for w in witnesses {
        let at: Vec<IndexId> = members
            .iter()
            .filter(|(_, m)| m.contains(w))
            .map(|(k, _)| k.clone())
            .collect();
        subsets_up_to(&at, max_dim + 1, &mut simplices);
    }
    let vertices = simplices.iter().flatten().cloned().collect();
    SimplicialComplex {
        vertices,
        simplices,
        witnessed: true,
    }
}

/// Nerve of an indexed cover; `witnesses` defaults to every point, in which
/// case the result is the exact nerve (truncated at `max_dim`).
pub fn nerve_from_cover(
    cover: &IndexedCover,
    witnesses: Option<&PointSet>,
    max_dim: usize,
) -> SimplicialComplex {
    let all = cover.domain().all_points();
    nerve_from_members(&cover.members(), witnesses.unwrap_or(&all), max_dim)
}

/// Nerve of a family of balls, witnessed by samples.
pub fn nerve_from_balls<S: Scalar>(
    space: &MetricSampleSpace<S>,
    balls: &BTreeMap<IndexId, Ball<S>>,
    witnesses: Option<&PointSet>,
    max_dim: usize,
) -> SimplicialComplex {
    let members = balls
        .iter()
        .map(|(k, b)| {
            let inside = (0..space.len())
                .filter(|&x| space.ball_membership(b, x))
                .collect();
            (k.clone(), inside)
        })
        .collect();
    let all: PointSet = (0..space.len()).collect();
    nerve_from_members(&members, witnesses.unwrap_or(&all), max_dim)
}

/// `p ∈ |Σ|` iff `carrier(p)` is a simplex of `Σ`.
pub fn realization_membership<S: Scalar>(
    complex: &SimplicialComplex,
    p: &UnitSimplexPoint<S>,
) -> Result<bool, NerveError> {
    let carrier = p.carrier();
    if let Some(v) = carrier.iter().find(|v| !complex.vertices.contains(*v)) {
        return Err(NerveError::ForeignVertex(v.clone()));
    }
    Ok(complex.contains(&carrier))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizationViolation {
    pub point: String,
    pub carrier: Vec<IndexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarViolation {
    pub index: IndexId,
    pub point: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalReport {
    pub canonical: bool,
    pub realization_violations: Vec<RealizationViolation>,
    pub star_violations: Vec<StarViolation>,
}

/// Checks that `ξ` maps into `|𝒩(𝒰)|` and that `coz(ξ_U) ⊆ U` for every member.
pub fn canonical_map_check<S: Scalar>(
    pou: &PartitionOfUnity<S>,
    cover: &IndexedCover,
) -> Result<CanonicalReport, NerveError> {
    if pou.ground().names() != cover.domain().names() {
        return Err(NerveError::IndexMismatch(
            "partition and cover are over different points".into(),
        ));
    }
    if &cover.indices() != pou.indices() {
        return Err(NerveError::IndexMismatch(
            "partition and cover use different index sets".into(),
        ));
    }
    let ground = pou.ground();
    let max_dim = (0..ground.len())
        .map(|x| pou.carrier_at(x).len())
        .max()
        .unwrap_or(1)
        .saturating_sub(1);
    let nerve = nerve_from_cover(cover, None, max_dim);
    let mut realization_violations = Vec::new();
    let mut star_violations = Vec::new();
    for x in 0..ground.len() {
        let carrier = pou.carrier_at(x);
        if !nerve.contains(&carrier) {
            realization_violations.push(RealizationViolation {
                point: ground.name(x).to_owned(),
                carrier: carrier.iter().cloned().collect(),
            });
        }
        for k in carrier {
            if !cover.member(k.as_str()).contains(&x) {
                star_violations.push(StarViolation {
                    index: k,
                    point: ground.name(x).to_owned(),
                });
            }
        }
    }
    Ok(CanonicalReport {
        canonical: realization_violations.is_empty() && star_violations.is_empty(),
        realization_violations,
        star_violations,
    })
}

/// Convenience wrapper building the ball cover first.
pub fn canonical_map_check_balls<S: Scalar>(
    pou: &PartitionOfUnity<S>,
    balls: &BTreeMap<IndexId, Ball<S>>,
) -> Result<CanonicalReport, crate::Error> {
    let space = match pou.ground() {
        Ground::Metric(m) => m,
        Ground::Finite(_) => {
            return Err(PouError::GroundMismatch("ball covers need a metric ground".into()).into())
        }
    };
    let cover = crate::pou::ball_cover(space, balls)?;
    Ok(canonical_map_check(pou, &cover)?)
}

/// The mapping `Φ(x) = |Σ(𝒰(x))|` into the full simplex over the cover's
/// indices: `p ∈ Φ(x)` iff `carrier(p) ⊆ 𝒰(x)`.
#[derive(Clone, Debug)]
pub struct SimplexValuedMap<'a> {
    cover: &'a IndexedCover,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberReport {
    pub fiber: Vec<String>,
    pub open: bool,
    /// A fiber point whose minimal open leaves the fiber, with the escaping point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String)>,
}

impl<'a> SimplexValuedMap<'a> {
    pub fn new(cover: &'a IndexedCover) -> Self {
        SimplexValuedMap { cover }
    }

    fn check_carrier(&self, carrier: &IndexSet) -> Result<(), NerveError> {
        if carrier.is_empty() {
            return Err(NerveError::EmptyCarrier);
        }
        match carrier.iter().find(|k| self.cover.index_position(k.as_str()).is_none()) {
            Some(k) => Err(NerveError::ForeignVertex(k.clone())),
            None => Ok(()),
        }
    }

    pub fn membership_by_carrier(&self, carrier: &IndexSet, x: usize) -> Result<bool, NerveError> {
        self.check_carrier(carrier)?;
        Ok(carrier.is_subset(&self.cover.value_ids(x)))
    }

    pub fn membership<S: Scalar>(
        &self,
        p: &UnitSimplexPoint<S>,
        x: usize,
    ) -> Result<bool, NerveError> {
        self.membership_by_carrier(&p.carrier(), x)
    }

    /// `Φ⁻¹(p) = ⋂_{U ∈ carrier(p)} U`.
    pub fn fiber_by_carrier(&self, carrier: &IndexSet) -> Result<PointSet, NerveError> {
        self.check_carrier(carrier)?;
        let mut it = carrier.iter().map(|k| self.cover.member(k.as_str()));
        let first = it.next().expect("nonempty carrier");
        Ok(it.fold(first, |acc, m| &acc & &m))
    }

    pub fn fiber<S: Scalar>(&self, p: &UnitSimplexPoint<S>) -> Result<PointSet, NerveError> {
        self.fiber_by_carrier(&p.carrier())
    }

    pub fn fiber_report<S: Scalar>(&self, p: &UnitSimplexPoint<S>) -> Result<FiberReport, NerveError> {
        let fiber = self.fiber(p)?;
        let space = self.cover.domain();
        let witness = space
            .first_non_interior(&fiber)
            .map(|(x, y)| (space.name(x).to_owned(), space.name(y).to_owned()));
        Ok(FiberReport {
            fiber: space.names_of(&fiber),
            open: witness.is_none(),
            witness,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pou::{pou_from_metric_cover, validate_pou};
    use crate::scalar::Rational;
    use crate::space::FiniteSpace;
    use crate::sparse::SparseVec;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn ids(v: &[&str]) -> IndexSet {
        v.iter().map(|s| IndexId::from(*s)).collect()
    }

    fn simplex(v: &[&str]) -> Simplex {
        v.iter().map(|s| IndexId::from(*s)).collect()
    }

    fn three_balls() -> (MetricSampleSpace<Rational>, BTreeMap<IndexId, Ball<Rational>>) {
        let m = MetricSampleSpace::euclidean(
            1,
            (0..5).map(|i| vec![q(i, 2)]).collect(),
        )
        .unwrap();
        let balls = (0..3)
            .map(|i| {
                (
                    IndexId::new(i.to_string()),
                    Ball::new(vec![q(i, 1)], q(3, 5)).unwrap(),
                )
            })
            .collect();
        (m, balls)
    }

    #[test]
    fn line_ball_nerve() {
        let (m, balls) = three_balls();
        let n = nerve_from_balls(&m, &balls, None, DEFAULT_MAX_DIM);
        let expected: BTreeSet<Simplex> = [
            simplex(&["0"]),
            simplex(&["1"]),
            simplex(&["2"]),
            simplex(&["0", "1"]),
            simplex(&["1", "2"]),
        ]
        .into();
        assert_eq!(n.simplices(), &expected);
        assert!(n.witnessed());
        assert_eq!(n.dimension(), Some(1));

        let p = UnitSimplexPoint::new(SparseVec::from_entries([("0", q(1, 2)), ("2", q(1, 2))]), &q(0, 1))
            .unwrap();
        assert!(!realization_membership(&n, &p).unwrap());
        let p = UnitSimplexPoint::new(SparseVec::from_entries([("0", q(3, 10)), ("1", q(7, 10))]), &q(0, 1))
            .unwrap();
        assert!(realization_membership(&n, &p).unwrap());
        assert!(realization_membership(&n, &UnitSimplexPoint::<Rational>::dirac("1")).unwrap());
        assert_eq!(
            realization_membership(&n, &UnitSimplexPoint::<Rational>::dirac("7")),
            Err(NerveError::ForeignVertex("7".into()))
        );
    }

    #[test]
    fn trivial_nerves() {
        let x = FiniteSpace::discrete(3);
        let all = x.all_points();
        let one = BTreeMap::from([(IndexId::from("U"), all.clone())]);
        let n = nerve_from_members(&one, &all, DEFAULT_MAX_DIM);
        assert_eq!(n.simplices().len(), 1);
        assert_eq!(n.vertices(), &ids(&["U"]));

        let two = BTreeMap::from([("0".into(), all.clone()), ("1".into(), all.clone())]);
        let n = nerve_from_members(&two, &all, DEFAULT_MAX_DIM);
        assert!(n.contains(&ids(&["0", "1"])));
    }

    #[test]
    fn max_dim_truncates() {
        let all: PointSet = [0].into();
        let m: BTreeMap<IndexId, PointSet> =
            ["a", "b", "c"].iter().map(|k| ((*k).into(), all.clone())).collect();
        assert_eq!(nerve_from_members(&m, &all, 1).dimension(), Some(1));
        assert_eq!(nerve_from_members(&m, &all, 8).dimension(), Some(2));
    }

    #[test]
    fn validation_rejects_missing_faces() {
        let err = SimplicialComplex::new(ids(&["a", "b"]), [simplex(&["a", "b"]), simplex(&["a"])], false)
            .unwrap_err();
        assert_eq!(
            err,
            NerveError::NotDownwardClosed {
                simplex: simplex(&["a", "b"]),
                missing: simplex(&["b"])
            }
        );
        assert_eq!(
            SimplicialComplex::new(ids(&["a"]), [vec![]], false).unwrap_err(),
            NerveError::EmptySimplex
        );
        assert!(SimplicialComplex::new(ids(&["a"]), [simplex(&["a"])], false).is_ok());
    }

    #[test]
    fn bump_partition_is_canonical() {
        let m = MetricSampleSpace::euclidean(1, vec![vec![q(0, 1)], vec![q(1, 2)], vec![q(1, 1)]]).unwrap();
        let balls: BTreeMap<IndexId, Ball<Rational>> = BTreeMap::from([
            ("U0".into(), Ball::new(vec![q(0, 1)], q(7, 10)).unwrap()),
            ("U1".into(), Ball::new(vec![q(1, 1)], q(7, 10)).unwrap()),
        ]);
        let p = pou_from_metric_cover(&m, &balls).unwrap();
        let r = canonical_map_check_balls(&p, &balls).unwrap();
        assert!(r.canonical);

        let cover = crate::pou::ball_cover(&m, &balls).unwrap();
        let constant = validate_pou(
            Ground::Metric(m),
            ids(&["U0", "U1"]),
            vec![SparseVec::dirac("U0"); 3],
            &q(0, 1),
        )
        .unwrap();
        let r = canonical_map_check(&constant, &cover).unwrap();
        assert!(!r.canonical);
        assert_eq!(
            r.star_violations,
            vec![StarViolation {
                index: "U0".into(),
                point: "s2".into()
            }]
        );
    }

    #[test]
    fn one_set_cover_is_canonical_for_constant_dirac() {
        let x = FiniteSpace::sierpinski();
        let cover =
            IndexedCover::from_fibers(x.clone(), &BTreeMap::from([("U".into(), x.all_points())])).unwrap();
        let p = validate_pou(Ground::Finite(x), ids(&["U"]), vec![SparseVec::dirac("U"); 2], &q(0, 1))
            .unwrap();
        assert!(canonical_map_check(&p, &cover).unwrap().canonical);
    }

    #[test]
    fn simplex_valued_map_on_the_line() {
        let m = MetricSampleSpace::euclidean(1, vec![vec![q(0, 1)], vec![q(1, 2)], vec![q(1, 1)]]).unwrap();
        let balls: BTreeMap<IndexId, Ball<Rational>> = BTreeMap::from([
            ("U0".into(), Ball::new(vec![q(0, 1)], q(7, 10)).unwrap()),
            ("U1".into(), Ball::new(vec![q(1, 1)], q(7, 10)).unwrap()),
        ]);
        let cover = crate::pou::ball_cover(&m, &balls).unwrap();
        let phi = SimplexValuedMap::new(&cover);
        let half = UnitSimplexPoint::<Rational>::uniform(["U0", "U1"]).unwrap();
        assert_eq!(phi.fiber(&half).unwrap(), PointSet::from([1]));
        assert!(!phi.membership(&half, 0).unwrap());
        assert!(phi.membership(&half, 1).unwrap());
        assert_eq!(
            phi.fiber(&UnitSimplexPoint::<Rational>::dirac("U0")).unwrap(),
            cover.member("U0")
        );
        assert_eq!(
            phi.fiber_by_carrier(&IndexSet::new()),
            Err(NerveError::EmptyCarrier)
        );
    }

    #[test]
    fn fibers_of_a_non_open_cover_can_fail_openness() {
        let x = FiniteSpace::sierpinski();
        let cover = IndexedCover::from_fibers(
            x.clone(),
            &BTreeMap::from([("A".into(), PointSet::from([0])), ("B".into(), PointSet::from([1]))]),
        )
        .unwrap();
        let phi = SimplexValuedMap::new(&cover);
        let r = phi.fiber_report(&UnitSimplexPoint::<Rational>::dirac("A")).unwrap();
        assert!(!r.open);
        assert_eq!(r.witness, Some(("a".into(), "b".into())));
        assert!(phi.fiber_report(&UnitSimplexPoint::<Rational>::dirac("B")).unwrap().open);
    }
}
