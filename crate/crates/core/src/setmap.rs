//! Set-valued mappings between finite spaces and indexed covers.
//!
//! An indexed cover `Ω: X ⇸ 𝒜` is a set-valued map into a discrete index
//! space; its members are the fibers `Ω⁻¹(α) = {x : α ∈ Ω(x)}`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::MapError;
use crate::space::{all_subsets, FiniteSpace, PointSet};
use crate::sparse::{IndexId, IndexSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetValuedMap {
    domain: FiniteSpace,
    codomain: FiniteSpace,
    values: Vec<PointSet>,
}

impl SetValuedMap {
    pub fn new(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        values: Vec<PointSet>,
    ) -> Result<Self, MapError> {
        if values.len() != domain.len() {
            return Err(MapError::WrongValueCount {
                expected: domain.len(),
                found: values.len(),
            });
        }
        for (x, v) in values.iter().enumerate() {
            if v.is_empty() {
                return Err(MapError::EmptyValue {
                    point: domain.name(x).to_owned(),
                });
            }
            if let Some(y) = v.iter().find(|&&y| y >= codomain.len()) {
                return Err(MapError::UnknownPoint(format!("#{y}")));
            }
        }
        Ok(SetValuedMap {
            domain,
            codomain,
            values,
        })
    }

    pub fn from_named(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        values: &BTreeMap<String, Vec<String>>,
    ) -> Result<Self, MapError> {
        if let Some(k) = values.keys().find(|k| domain.index_of(k).is_err()) {
            return Err(MapError::UnknownPoint(k.clone()));
        }
        let mut vals = Vec::with_capacity(domain.len());
        for x in domain.names() {
            let names = values
                .get(x)
                .ok_or_else(|| MapError::EmptyValue { point: x.clone() })?;
            vals.push(codomain.set_of(names)?);
        }
        Self::new(domain, codomain, vals)
    }

    pub fn domain(&self) -> &FiniteSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &FiniteSpace {
        &self.codomain
    }

    pub fn value(&self, x: usize) -> &PointSet {
        &self.values[x]
    }

    pub fn values(&self) -> &[PointSet] {
        &self.values
    }

    /// `Φ⁻¹(y) = {x : y ∈ Φ(x)}`.
    pub fn fiber(&self, y: usize) -> PointSet {
        (0..self.domain.len())
            .filter(|&x| self.values[x].contains(&y))
            .collect()
    }

    /// Lower inverse `Φ⁻¹[U] = {x : Φ(x) ∩ U ≠ ∅}`.
    pub fn preimage(&self, set: &PointSet) -> PointSet {
        (0..self.domain.len())
            .filter(|&x| !self.values[x].is_disjoint(set))
            .collect()
    }

    /// `{x : K ⊆ Φ(x)}`.
    pub fn containing(&self, set: &PointSet) -> PointSet {
        (0..self.domain.len())
            .filter(|&x| set.is_subset(&self.values[x]))
            .collect()
    }

    /// `Φ[S] = ⋃_{x∈S} Φ(x)`.
    pub fn image(&self, set: &PointSet) -> PointSet {
        set.iter()
            .flat_map(|&x| self.values[x].iter().copied())
            .collect()
    }

    /// The graph as a subset of `domain.product(codomain)`.
    pub fn graph(&self) -> PointSet {
        let m = self.codomain.len();
        self.values
            .iter()
            .enumerate()
            .flat_map(|(x, v)| v.iter().map(move |&y| x * m + y))
            .collect()
    }

    /// Every value nonempty, so the fibers cover the domain.
    pub fn is_cover(&self) -> bool {
        self.values.iter().all(|v| !v.is_empty())
    }
}

/// A set-valued map into a discrete index space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedCover(SetValuedMap);

impl IndexedCover {
    pub fn new(map: SetValuedMap) -> Result<Self, MapError> {
        if !map.codomain.is_discrete() {
            return Err(MapError::CodomainNotDiscrete);
        }
        Ok(IndexedCover(map))
    }

    /// Builds a cover from its members; every point must lie in some member.
    pub fn from_fibers(
        domain: FiniteSpace,
        members: &BTreeMap<IndexId, PointSet>,
    ) -> Result<Self, MapError> {
        let names: Vec<&str> = members.keys().map(IndexId::as_str).collect();
        let codomain = FiniteSpace::discrete_named(&names)?;
        let mut values = vec![PointSet::new(); domain.len()];
        for (a, fiber) in members.values().enumerate() {
            for &x in fiber {
                if x >= domain.len() {
                    return Err(MapError::UnknownPoint(format!("#{x}")));
                }
                values[x].insert(a);
            }
        }
        IndexedCover::new(SetValuedMap::new(domain, codomain, values)?)
    }

    pub fn as_map(&self) -> &SetValuedMap {
        &self.0
    }

    pub fn domain(&self) -> &FiniteSpace {
        &self.0.domain
    }

    pub fn indices(&self) -> IndexSet {
        self.0.codomain.names().iter().map(|n| IndexId::new(n.as_str())).collect()
    }

    pub fn index_position(&self, index: &str) -> Option<usize> {
        self.0.codomain.index_of(index).ok()
    }

    /// `Ω(x)` as index names.
    pub fn value_ids(&self, x: usize) -> IndexSet {
        self.0.values[x]
            .iter()
            .map(|&a| IndexId::new(self.0.codomain.name(a)))
            .collect()
    }

    /// `Ω⁻¹(α)`; empty for unknown indices.
    pub fn member(&self, index: &str) -> PointSet {
        match self.index_position(index) {
            Some(a) => self.0.fiber(a),
            None => PointSet::new(),
        }
    }

    pub fn members(&self) -> BTreeMap<IndexId, PointSet> {
        (0..self.0.codomain.len())
            .map(|a| (IndexId::new(self.0.codomain.name(a)), self.0.fiber(a)))
            .collect()
    }

    /// Every member is open.
    pub fn is_open_cover(&self) -> bool {
        (0..self.0.codomain.len()).all(|a| self.0.domain.first_non_interior(&self.0.fiber(a)).is_none())
    }
}

/// Why a semicontinuity property fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `Φ⁻¹[U]` is not open: `point` is in it but `escapes_to ∈ min_open(point)` is not.
    Preimage {
        open_set: Vec<String>,
        preimage: Vec<String>,
        point: String,
        escapes_to: String,
    },
    /// A fiber `Φ⁻¹(value)` is not open.
    Fiber {
        value: String,
        fiber: Vec<String>,
        point: String,
        escapes_to: String,
    },
    /// `(point, value)` is in the graph but its basic box leaves the graph at `outside`.
    Graph {
        point: String,
        value: String,
        outside_point: String,
        outside_value: String,
    },
    /// `{x : K ⊆ Φ(x)}` is not open.
    Containment {
        subset: Vec<String>,
        set: Vec<String>,
        point: String,
        escapes_to: String,
    },
    /// `Φ⁻¹[F]` is not closed for the closed set `F`: `point` is in its closure only.
    ClosedPreimage {
        closed_set: Vec<String>,
        preimage: Vec<String>,
        point: String,
    },
    /// A value is empty.
    EmptyValue { point: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Flag {
    fn from_witness(witness: Option<Witness>) -> Self {
        Flag {
            holds: witness.is_none(),
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub is_cover: Flag,
    pub lsc: Flag,
    pub totally_lsc: Flag,
    pub open_graph: Flag,
    pub lower_locally_constant: Flag,
    pub usc: Flag,
    pub usco: Flag,
}

impl PropertyReport {
    /// `open_graph ⇒ totally_lsc ⇒ lsc`.
    pub fn respects_diagram(&self) -> bool {
        (!self.open_graph.holds || self.totally_lsc.holds)
            && (!self.totally_lsc.holds || self.lsc.holds)
    }
}

/// Exact classification of `Φ` in the semicontinuity hierarchy.
///
/// Each flag is decided independently: l.s.c. on the minimal-open basis of
/// the codomain, total l.s.c. fiberwise, open graph in the product space,
/// lower local constancy over every subset of the (finite, hence compact)
/// codomain, and u.s.c. on the minimal closed sets `cl{y}`. Finite values are
/// compact, so usco coincides with u.s.c.
pub fn classify(map: &SetValuedMap) -> PropertyReport {
    let x = &map.domain;
    let y = &map.codomain;

    let is_cover = Flag::from_witness(
        map.values
            .iter()
            .position(|v| v.is_empty())
            .map(|p| Witness::EmptyValue {
                point: x.name(p).to_owned(),
            }),
    );

    let lsc = Flag::from_witness((0..y.len()).find_map(|b| {
        let u = y.min_open(b);
        let pre = map.preimage(u);
        x.first_non_interior(&pre).map(|(p, e)| Witness::Preimage {
            open_set: y.names_of(u),
            preimage: x.names_of(&pre),
            point: x.name(p).to_owned(),
            escapes_to: x.name(e).to_owned(),
        })
    }));

    let totally_lsc = Flag::from_witness((0..y.len()).find_map(|b| {
        let fiber = map.fiber(b);
        x.first_non_interior(&fiber).map(|(p, e)| Witness::Fiber {
            value: y.name(b).to_owned(),
            fiber: x.names_of(&fiber),
            point: x.name(p).to_owned(),
            escapes_to: x.name(e).to_owned(),
        })
    }));

    let open_graph = {
        let product = x.product(y);
        let graph = map.graph();
        let m = y.len();
        Flag::from_witness(product.first_non_interior(&graph).map(|(g, o)| {
            Witness::Graph {
                point: x.name(g / m).to_owned(),
                value: y.name(g % m).to_owned(),
                outside_point: x.name(o / m).to_owned(),
                outside_value: y.name(o % m).to_owned(),
            }
        }))
    };

    let lower_locally_constant = Flag::from_witness(all_subsets(y.len()).find_map(|k| {
        let set = map.containing(&k);
        x.first_non_interior(&set).map(|(p, e)| Witness::Containment {
            subset: y.names_of(&k),
            set: x.names_of(&set),
            point: x.name(p).to_owned(),
            escapes_to: x.name(e).to_owned(),
        })
    }));

    let usc = Flag::from_witness((0..y.len()).find_map(|b| {
        let f = y.closure_unchecked(&PointSet::from([b]));
        let pre = map.preimage(&f);
        let cl = x.closure_unchecked(&pre);
        cl.difference(&pre).next().map(|&p| Witness::ClosedPreimage {
            closed_set: y.names_of(&f),
            preimage: x.names_of(&pre),
            point: x.name(p).to_owned(),
        })
    }));
    let usco = usc.clone();

    PropertyReport {
        is_cover,
        lsc,
        totally_lsc,
        open_graph,
        lower_locally_constant,
        usc,
        usco,
    }
}

/// `Ω̄*` computed fiberwise: the member at `α` becomes `cl(Ω⁻¹(α))`.
pub fn closure_cover(cover: &IndexedCover) -> IndexedCover {
    let map = cover.as_map();
    let x = &map.domain;
    let mut values = vec![PointSet::new(); x.len()];
    for a in 0..map.codomain.len() {
        for p in x.closure_unchecked(&map.fiber(a)) {
            values[p].insert(a);
        }
    }
    let closed = SetValuedMap::new(x.clone(), map.codomain.clone(), values)
        .expect("closures of a cover still cover");
    IndexedCover(closed)
}

/// `Ω̄*(p) = ⋂{Ω[U] : U open, p ∈ U}`, intersected over the minimal-open basis.
pub fn closure_cover_by_intersection(cover: &IndexedCover) -> IndexedCover {
    let map = cover.as_map();
    let x = &map.domain;
    let values = (0..x.len())
        .map(|p| intersect_images(map, p, |s| s))
        .collect();
    let closed = SetValuedMap::new(x.clone(), map.codomain.clone(), values)
        .expect("Ω(p) ⊆ Ω̄*(p) keeps values nonempty");
    IndexedCover(closed)
}

/// Closure of the graph: `Φ̄(p) = ⋂{cl(Φ[U]) : U open, p ∈ U}`.
pub fn graph_closure(map: &SetValuedMap) -> SetValuedMap {
    let x = &map.domain;
    let y = &map.codomain;
    let values = (0..x.len())
        .map(|p| intersect_images(map, p, |s| y.closure_unchecked(&s)))
        .collect();
    SetValuedMap::new(x.clone(), y.clone(), values).expect("Φ(p) ⊆ Φ̄(p)")
}

fn intersect_images(
    map: &SetValuedMap,
    p: usize,
    post: impl Fn(PointSet) -> PointSet,
) -> PointSet {
    let x = &map.domain;
    x.basic_opens_containing(p)
        .map(|q| post(map.image(x.min_open(q))))
        .reduce(|acc, s| acc.intersection(&s).copied().collect())
        .expect("p lies in its own minimal open")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(v: &[&[usize]]) -> Vec<PointSet> {
        v.iter().map(|s| s.iter().copied().collect()).collect()
    }

    fn sierpinski_identity() -> SetValuedMap {
        let s = FiniteSpace::sierpinski();
        SetValuedMap::new(s.clone(), s, sets(&[&[0], &[1]])).unwrap()
    }

    #[test]
    fn sierpinski_identity_is_lsc_but_not_totally() {
        let r = classify(&sierpinski_identity());
        assert!(r.lsc.holds);
        assert!(!r.totally_lsc.holds);
        match r.totally_lsc.witness.clone().unwrap() {
            Witness::Fiber { value, point, .. } => {
                assert_eq!(value, "a");
                assert_eq!(point, "a");
            }
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(!r.open_graph.holds);
        assert!(r.respects_diagram());
    }

    #[test]
    fn diagonal_from_discrete_is_llc_without_open_graph() {
        let d = FiniteSpace::discrete_named(&["a", "b"]).unwrap();
        let map = SetValuedMap::new(d, FiniteSpace::sierpinski(), sets(&[&[0], &[1]])).unwrap();
        let r = classify(&map);
        assert!(r.lower_locally_constant.holds);
        assert!(r.totally_lsc.holds);
        assert!(!r.open_graph.holds);
        assert_eq!(
            r.open_graph.witness,
            Some(Witness::Graph {
                point: "a".into(),
                value: "a".into(),
                outside_point: "a".into(),
                outside_value: "b".into(),
            })
        );
    }

    #[test]
    fn constant_full_map_has_every_property() {
        let s = FiniteSpace::sierpinski();
        let i = FiniteSpace::interval_model(1).unwrap();
        let all = i.all_points();
        let map = SetValuedMap::new(s, i, vec![all.clone(), all]).unwrap();
        let r = classify(&map);
        for f in [
            &r.is_cover,
            &r.lsc,
            &r.totally_lsc,
            &r.open_graph,
            &r.lower_locally_constant,
            &r.usc,
            &r.usco,
        ] {
            assert!(f.holds, "{r:?}");
        }
    }

    #[test]
    fn empty_values_are_rejected() {
        let s = FiniteSpace::sierpinski();
        let err = SetValuedMap::new(s.clone(), s, sets(&[&[0], &[]])).unwrap_err();
        assert_eq!(err, MapError::EmptyValue { point: "b".into() });
    }

    fn sierpinski_cover() -> IndexedCover {
        let s = FiniteSpace::sierpinski();
        let idx = FiniteSpace::discrete(2);
        IndexedCover::new(SetValuedMap::new(s, idx, sets(&[&[0], &[0, 1]])).unwrap()).unwrap()
    }

    #[test]
    fn closure_cover_example() {
        let c = sierpinski_cover();
        let closed = closure_cover(&c);
        assert_eq!(closed.as_map().value(0), &PointSet::from([0, 1]));
        assert_eq!(closed.as_map().value(1), &PointSet::from([0, 1]));
        assert_eq!(closed, closure_cover_by_intersection(&c));
    }

    #[test]
    fn closure_cover_is_identity_on_discrete_domains_and_single_indices() {
        let d = FiniteSpace::discrete(3);
        let c = IndexedCover::new(
            SetValuedMap::new(d, FiniteSpace::discrete(2), sets(&[&[0], &[1], &[0, 1]])).unwrap(),
        )
        .unwrap();
        assert_eq!(closure_cover(&c), c);

        let s = FiniteSpace::sierpinski();
        let c = IndexedCover::new(
            SetValuedMap::new(s, FiniteSpace::discrete(1), sets(&[&[0], &[0]])).unwrap(),
        )
        .unwrap();
        assert_eq!(closure_cover(&c), c);
        assert_eq!(closure_cover_by_intersection(&c), c);
    }

    #[test]
    fn graph_closure_examples() {
        let g = graph_closure(&sierpinski_identity());
        assert_eq!(g.value(0), &PointSet::from([0, 1]));
        // b: only min_open(b) = {b}, cl(Φ[{b}]) = cl{b} = {a, b}
        assert_eq!(g.value(1), &PointSet::from([0, 1]));

        let c = sierpinski_cover();
        assert_eq!(&graph_closure(c.as_map()), closure_cover(&c).as_map());

        // a constant closed value has a closed graph
        let s = FiniteSpace::sierpinski();
        let a = PointSet::from([0]);
        let map = SetValuedMap::new(s.clone(), s, vec![a.clone(), a]).unwrap();
        assert_eq!(graph_closure(&map), map);
    }

    #[test]
    fn image_examples() {
        let c = sierpinski_cover();
        let m = c.as_map();
        assert_eq!(m.image(&PointSet::from([0])), *m.value(0));
        assert!(m.image(&PointSet::new()).is_empty());
        assert_eq!(m.image(&PointSet::from([0, 1])), PointSet::from([0, 1]));
    }

    #[test]
    fn cover_members_round_trip() {
        let c = sierpinski_cover();
        let rebuilt = IndexedCover::from_fibers(c.domain().clone(), &c.members()).unwrap();
        assert_eq!(rebuilt, c);
        assert!(c.is_open_cover());
        let id = IndexedCover::new(
            SetValuedMap::new(FiniteSpace::sierpinski(), FiniteSpace::discrete(2), sets(&[&[0], &[1]])).unwrap(),
        )
        .unwrap();
        assert!(!id.is_open_cover());
    }
}
