//! Finite topological spaces, described by the minimal open neighbourhood of
//! each point.
//!
//! A family `x ↦ U(x)` describes a topology exactly when `x ∈ U(x)` and
//! `y ∈ U(x)` implies `U(y) ⊆ U(x)`; open sets are then the unions of minimal
//! opens and `cl(S) = {x : U(x) ∩ S ≠ ∅}`. These spaces are generally not T1.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::SpaceError;

pub type PointSet = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    names: Vec<String>,
    lookup: BTreeMap<String, usize>,
    min_open: Vec<PointSet>,
}

impl FiniteSpace {
    /// Builds and validates a space from point names and minimal opens given
    /// by point position.
    pub fn new(names: Vec<String>, min_open: Vec<PointSet>) -> Result<Self, SpaceError> {
        let mut lookup = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if lookup.insert(n.clone(), i).is_some() {
                return Err(SpaceError::DuplicatePoint(n.clone()));
            }
        }
        if min_open.len() != names.len() {
            let missing = names
                .get(min_open.len())
                .cloned()
                .unwrap_or_else(|| format!("#{}", names.len()));
            return Err(SpaceError::MissingMinOpen(missing));
        }
        for u in &min_open {
            if let Some(&bad) = u.iter().find(|&&p| p >= names.len()) {
                return Err(SpaceError::UnknownPoint(format!("#{bad}")));
            }
        }
        let space = FiniteSpace {
            names,
            lookup,
            min_open,
        };
        space.check_axioms()?;
        Ok(space)
    }

    /// Builds a space from named minimal opens.
    pub fn from_named<S: AsRef<str>>(
        points: &[S],
        min_open: &BTreeMap<String, Vec<String>>,
    ) -> Result<Self, SpaceError> {
        let names: Vec<String> = points.iter().map(|p| p.as_ref().to_owned()).collect();
        let mut lookup = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if lookup.insert(n.clone(), i).is_some() {
                return Err(SpaceError::DuplicatePoint(n.clone()));
            }
        }
        if let Some(extra) = min_open.keys().find(|k| !lookup.contains_key(*k)) {
            return Err(SpaceError::UnknownPoint(extra.clone()));
        }
        let mut opens = Vec::with_capacity(names.len());
        for n in &names {
            let members = min_open
                .get(n)
                .ok_or_else(|| SpaceError::MissingMinOpen(n.clone()))?;
            let mut set = PointSet::new();
            for m in members {
                let idx = *lookup
                    .get(m)
                    .ok_or_else(|| SpaceError::UnknownPoint(m.clone()))?;
                set.insert(idx);
            }
            opens.push(set);
        }
        Self::new(names, opens)
    }

    fn check_axioms(&self) -> Result<(), SpaceError> {
        for (x, ux) in self.min_open.iter().enumerate() {
            if !ux.contains(&x) {
                return Err(SpaceError::NotReflexive {
                    point: self.names[x].clone(),
                });
            }
        }
        for (x, ux) in self.min_open.iter().enumerate() {
            for &y in ux {
                if let Some(&z) = self.min_open[y].iter().find(|z| !ux.contains(z)) {
                    return Err(SpaceError::NotTransitive {
                        point: self.names[x].clone(),
                        via: self.names[y].clone(),
                        missing: self.names[z].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn discrete_named<S: AsRef<str>>(names: &[S]) -> Result<Self, SpaceError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_owned()).collect();
        let opens = (0..names.len()).map(|i| PointSet::from([i])).collect();
        Self::new(names, opens)
    }

    /// Discrete space on points `"0"`, …, `"n-1"`.
    pub fn discrete(n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        Self::discrete_named(&names).expect("distinct names")
    }

    pub fn indiscrete_named<S: AsRef<str>>(names: &[S]) -> Result<Self, SpaceError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_owned()).collect();
        let all: PointSet = (0..names.len()).collect();
        let opens = vec![all; names.len()];
        Self::new(names, opens)
    }

    /// Two points `a`, `b` where `{b}` is open and `a` is in the closure of `b`.
    pub fn sierpinski() -> Self {
        Self::new(
            vec!["a".into(), "b".into()],
            vec![PointSet::from([0, 1]), PointSet::from([1])],
        )
        .expect("valid")
    }

    /// Finite model of the subdivided interval: vertices `v0..vn` and edges
    /// `e1..en` with `{e_i}` open and `U(v_i)` the vertex plus its adjacent edges.
    pub fn interval_model(n: usize) -> Result<Self, SpaceError> {
        if n == 0 {
            return Err(SpaceError::EmptyInterval);
        }
        let mut names = Vec::with_capacity(2 * n + 1);
        for i in 0..=n {
            if i > 0 {
                names.push(format!("e{i}"));
            }
            names.push(format!("v{i}"));
        }
        // positions: v_i at 2i, e_i at 2i-1
        let opens = (0..names.len())
            .map(|p| {
                if p % 2 == 1 {
                    PointSet::from([p])
                } else {
                    let mut u = PointSet::from([p]);
                    if p > 0 {
                        u.insert(p - 1);
                    }
                    if p + 1 < names.len() {
                        u.insert(p + 1);
                    }
                    u
                }
            })
            .collect();
        Self::new(names, opens)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, point: usize) -> &str {
        &self.names[point]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, SpaceError> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| SpaceError::UnknownPoint(name.to_owned()))
    }

    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<PointSet, SpaceError> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    pub fn names_of(&self, set: &PointSet) -> Vec<String> {
        set.iter().map(|&p| self.names[p].clone()).collect()
    }

    pub fn min_open(&self, point: usize) -> &PointSet {
        &self.min_open[point]
    }

    pub fn all_points(&self) -> PointSet {
        (0..self.len()).collect()
    }

    pub fn is_discrete(&self) -> bool {
        self.min_open.iter().all(|u| u.len() == 1)
    }

    fn check_subset(&self, set: &PointSet) -> Result<(), SpaceError> {
        match set.iter().find(|&&p| p >= self.len()) {
            Some(p) => Err(SpaceError::UnknownPoint(format!("#{p}"))),
            None => Ok(()),
        }
    }

    /// `S` is open iff it contains the minimal open of each of its points.
    pub fn is_open(&self, set: &PointSet) -> Result<bool, SpaceError> {
        self.check_subset(set)?;
        Ok(self.first_non_interior(set).is_none())
    }

    /// A point of `set` whose minimal open leaves `set`, with the escaping point.
    pub fn first_non_interior(&self, set: &PointSet) -> Option<(usize, usize)> {
        set.iter().find_map(|&x| {
            self.min_open[x]
                .iter()
                .find(|y| !set.contains(y))
                .map(|&y| (x, y))
        })
    }

    pub fn closure(&self, set: &PointSet) -> Result<PointSet, SpaceError> {
        self.check_subset(set)?;
        Ok(self.closure_unchecked(set))
    }

    pub(crate) fn closure_unchecked(&self, set: &PointSet) -> PointSet {
        (0..self.len())
            .filter(|&x| !self.min_open[x].is_disjoint(set))
            .collect()
    }

    pub fn is_closed(&self, set: &PointSet) -> Result<bool, SpaceError> {
        Ok(&self.closure(set)? == set)
    }

    pub fn complement(&self, set: &PointSet) -> PointSet {
        (0..self.len()).filter(|p| !set.contains(p)).collect()
    }

    /// Smallest open set containing `set`.
    pub fn open_hull(&self, set: &PointSet) -> PointSet {
        set.iter()
            .flat_map(|&x| self.min_open[x].iter().copied())
            .collect()
    }

    /// Points whose minimal open contains `point`, i.e. the basic opens around it.
    pub fn basic_opens_containing(&self, point: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&q| self.min_open[q].contains(&point))
    }

    /// Product topology; the pair `(x, y)` sits at position `x * |Y| + y` and
    /// is named `"(x,y)"`.
    pub fn product(&self, other: &FiniteSpace) -> FiniteSpace {
        let m = other.len();
        let mut names = Vec::with_capacity(self.len() * m);
        let mut opens = Vec::with_capacity(self.len() * m);
        for x in 0..self.len() {
            for y in 0..m {
                names.push(format!("({},{})", self.names[x], other.names[y]));
                let mut u = PointSet::new();
                for &a in &self.min_open[x] {
                    for &b in &other.min_open[y] {
                        u.insert(a * m + b);
                    }
                }
                opens.push(u);
            }
        }
        FiniteSpace::new(names, opens).expect("products of valid spaces are valid")
    }

    /// Every open set, by brute force over subsets. Intended for small spaces.
    pub fn open_sets(&self) -> Vec<PointSet> {
        assert!(self.len() <= 20, "open set enumeration is exponential");
        (0u32..(1u32 << self.len()))
            .map(|mask| {
                (0..self.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .collect::<PointSet>()
            })
            .filter(|s| self.first_non_interior(s).is_none())
            .collect()
    }
}

/// Every subset of `0..n`, smallest masks first.
pub fn all_subsets(n: usize) -> impl Iterator<Item = PointSet> {
    assert!(n <= 20, "subset enumeration is exponential");
    (0u32..(1u32 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(points: &[&str], opens: &[(&str, &[&str])]) -> Result<FiniteSpace, SpaceError> {
        let map = opens
            .iter()
            .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
            .collect();
        FiniteSpace::from_named(points, &map)
    }

    #[test]
    fn validate_examples() {
        assert!(named(&["a", "b"], &[("a", &["a", "b"]), ("b", &["b"])]).is_ok());
        assert!(FiniteSpace::discrete_named(&["x", "y", "z"]).is_ok());
        assert!(named(&["a", "b"], &[("a", &["a", "b"]), ("b", &["a", "b"])]).is_ok());
        let err = named(
            &["a", "b", "c"],
            &[("a", &["a", "c"]), ("c", &["c", "b"]), ("b", &["b"])],
        )
        .unwrap_err();
        assert_eq!(
            err,
            SpaceError::NotTransitive {
                point: "a".into(),
                via: "c".into(),
                missing: "b".into()
            }
        );
        let err = named(&["a", "b"], &[("a", &["b"]), ("b", &["b"])]).unwrap_err();
        assert_eq!(err, SpaceError::NotReflexive { point: "a".into() });
        assert!(matches!(
            named(&["a"], &[("a", &["a", "q"])]),
            Err(SpaceError::UnknownPoint(_))
        ));
        assert!(matches!(
            named(&["a", "b"], &[("a", &["a"])]),
            Err(SpaceError::MissingMinOpen(_))
        ));
    }

    #[test]
    fn openness_and_closure_on_sierpinski() {
        let s = FiniteSpace::sierpinski();
        let a = PointSet::from([0]);
        let b = PointSet::from([1]);
        assert!(s.is_open(&b).unwrap());
        assert!(!s.is_open(&a).unwrap());
        assert!(s.is_open(&PointSet::new()).unwrap());
        assert!(s.is_open(&s.all_points()).unwrap());
        assert_eq!(s.closure(&b).unwrap(), s.all_points());
        assert_eq!(s.closure(&a).unwrap(), a);
        assert!(s.is_open(&PointSet::from([7])).is_err());
    }

    #[test]
    fn discrete_closure_is_identity() {
        let d = FiniteSpace::discrete(4);
        for s in all_subsets(4) {
            assert_eq!(d.closure(&s).unwrap(), s);
        }
    }

    #[test]
    fn interval_model_examples() {
        let i1 = FiniteSpace::interval_model(1).unwrap();
        assert_eq!(i1.names(), &["v0", "e1", "v1"]);
        assert_eq!(i1.names_of(i1.min_open(0)), vec!["v0", "e1"]);
        assert_eq!(i1.names_of(i1.min_open(1)), vec!["e1"]);
        assert_eq!(i1.names_of(i1.min_open(2)), vec!["e1", "v1"]);
        let e1 = i1.set_of(&["e1"]).unwrap();
        assert_eq!(i1.closure(&e1).unwrap(), i1.all_points());

        let i2 = FiniteSpace::interval_model(2).unwrap();
        let v1 = i2.index_of("v1").unwrap();
        assert_eq!(i2.names_of(i2.min_open(v1)), vec!["e1", "v1", "e2"]);
        assert_eq!(FiniteSpace::interval_model(0), Err(SpaceError::EmptyInterval));
    }

    #[test]
    fn interval_model_is_connected() {
        for n in 1..=6 {
            let x = FiniteSpace::interval_model(n).unwrap();
            let all = x.all_points();
            for s in all_subsets(x.len()) {
                if s.is_empty() || s == all {
                    continue;
                }
                let clopen = x.is_open(&s).unwrap() && x.is_closed(&s).unwrap();
                assert!(!clopen, "n={n}: {:?} is clopen", x.names_of(&s));
            }
        }
    }

    #[test]
    fn product_examples() {
        let d2 = FiniteSpace::discrete(2);
        assert!(d2.product(&d2).is_discrete());
        assert_eq!(d2.product(&d2).len(), 4);

        let s = FiniteSpace::sierpinski();
        let ss = s.product(&s);
        let aa = ss.index_of("(a,a)").unwrap();
        assert_eq!(ss.min_open(aa), &ss.all_points());

        let s1 = s.product(&FiniteSpace::discrete(1));
        assert_eq!(s1.min_open(0), &PointSet::from([0, 1]));
        assert_eq!(s1.min_open(1), &PointSet::from([1]));
    }

    #[test]
    fn open_sets_of_sierpinski() {
        let s = FiniteSpace::sierpinski();
        let opens = s.open_sets();
        assert_eq!(opens.len(), 3);
    }
}
