//! Finite metric sample spaces and open balls.

use crate::error::SpaceError;
use crate::scalar::Scalar;
use crate::space::FiniteSpace;

/// Squared Euclidean distance between two coordinate tuples of equal length.
pub fn dist_sq<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| {
            let d = x.clone() - y.clone();
            acc + d.clone() * d
        })
}

/// Euclidean distance; in exact mode an upper bound that is exact on
/// rational squares (see [`Scalar::sqrt_upper`]).
pub fn dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    dist_sq(a, b).sqrt_upper()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball<S> {
    pub center: Vec<S>,
    pub radius: S,
}

impl<S: Scalar> Ball<S> {
    pub fn new(center: Vec<S>, radius: S) -> Result<Self, SpaceError> {
        if !radius.gt_zero() {
            return Err(SpaceError::NonPositiveRadius);
        }
        Ok(Ball { center, radius })
    }

    /// `d(x, center) < radius`, decided exactly on squared distances.
    pub fn contains(&self, x: &[S]) -> bool {
        dist_sq(x, &self.center) < self.radius.clone() * self.radius.clone()
    }

    /// `max{radius − d(x, center), 0}`.
    pub fn depth(&self, x: &[S]) -> S {
        (self.radius.clone() - dist(x, &self.center)).max_of(S::zero())
    }
}

/// Finite set of sample points in `ℝ^dim`, with an optional explicit distance
/// table replacing the Euclidean metric between samples.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSampleSpace<S> {
    names: Vec<String>,
    dim: usize,
    coords: Vec<Vec<S>>,
    table: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> MetricSampleSpace<S> {
    pub fn euclidean(dim: usize, coords: Vec<Vec<S>>) -> Result<Self, SpaceError> {
        let names = (0..coords.len()).map(|i| format!("s{i}")).collect();
        Self::with_names(dim, names, coords)
    }

    pub fn with_names(
        dim: usize,
        names: Vec<String>,
        coords: Vec<Vec<S>>,
    ) -> Result<Self, SpaceError> {
        if names.len() != coords.len() {
            return Err(SpaceError::SampleCountMismatch {
                names: names.len(),
                samples: coords.len(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(SpaceError::DuplicatePoint(n.clone()));
            }
        }
        if let Some(c) = coords.iter().find(|c| c.len() != dim) {
            return Err(SpaceError::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
        Ok(MetricSampleSpace {
            names,
            dim,
            coords,
            table: None,
        })
    }

    /// Installs an explicit distance table after checking the metric axioms
    /// on the samples within `tol`.
    pub fn with_table(mut self, table: Vec<Vec<S>>, tol: &S) -> Result<Self, SpaceError> {
        let n = self.len();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(SpaceError::MetricAxiom(format!(
                "distance table must be {n}x{n}"
            )));
        }
        check_metric(&table, tol)?;
        self.table = Some(table);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn coords(&self, i: usize) -> &[S] {
        &self.coords[i]
    }

    pub fn samples(&self) -> &[Vec<S>] {
        &self.coords
    }

    pub fn is_euclidean(&self) -> bool {
        self.table.is_none()
    }

    pub fn table(&self) -> Option<&[Vec<S>]> {
        self.table.as_deref()
    }

    /// Distance between two samples.
    pub fn distance(&self, i: usize, j: usize) -> S {
        match &self.table {
            Some(t) => t[i][j].clone(),
            None => dist(&self.coords[i], &self.coords[j]),
        }
    }

    /// Checks the metric axioms on all samples within `tol`.
    pub fn validate_metric(&self, tol: &S) -> Result<(), SpaceError> {
        let n = self.len();
        let table: Vec<Vec<S>> = (0..n)
            .map(|i| (0..n).map(|j| self.distance(i, j)).collect())
            .collect();
        check_metric(&table, tol)
    }

    pub fn ball_membership(&self, ball: &Ball<S>, sample: usize) -> bool {
        ball.contains(&self.coords[sample])
    }

    /// Distance from a sample to the complement of a ball, `max{r − d, 0}`.
    pub fn dist_to_ball_complement(&self, ball: &Ball<S>, sample: usize) -> S {
        ball.depth(&self.coords[sample])
    }

    /// The samples as a discrete finite space, for covers indexed over samples.
    pub fn as_discrete_space(&self) -> FiniteSpace {
        FiniteSpace::discrete_named(&self.names).expect("sample names are distinct")
    }
}

fn check_metric<S: Scalar>(t: &[Vec<S>], tol: &S) -> Result<(), SpaceError> {
    let n = t.len();
    for i in 0..n {
        if t[i][i].abs() > *tol {
            return Err(SpaceError::MetricAxiom(format!("d({i},{i}) != 0")));
        }
        for j in 0..n {
            if t[i][j].lt_zero() {
                return Err(SpaceError::MetricAxiom(format!("d({i},{j}) < 0")));
            }
            if i != j && t[i][j].is_zero() {
                return Err(SpaceError::MetricAxiom(format!("d({i},{j}) = 0 for distinct samples")));
            }
            if (t[i][j].clone() - t[j][i].clone()).abs() > *tol {
                return Err(SpaceError::MetricAxiom(format!("d({i},{j}) != d({j},{i})")));
            }
            for k in 0..n {
                if t[i][k] > t[i][j].clone() + t[j][k].clone() + tol.clone() {
                    return Err(SpaceError::MetricAxiom(format!(
                        "triangle inequality fails for ({i},{j},{k})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn ball_examples_on_the_line() {
        let m = MetricSampleSpace::euclidean(1, vec![vec![q(1, 2)], vec![q(0, 1)], vec![q(7, 10)]])
            .unwrap();
        let b = Ball::new(vec![q(0, 1)], q(7, 10)).unwrap();
        assert!(m.ball_membership(&b, 0));
        assert_eq!(m.dist_to_ball_complement(&b, 0), q(1, 5));
        assert!(m.ball_membership(&b, 1));
        assert_eq!(m.dist_to_ball_complement(&b, 1), q(7, 10));
        assert!(!m.ball_membership(&b, 2));
        assert_eq!(m.dist_to_ball_complement(&b, 2), q(0, 1));
    }

    #[test]
    fn balls_need_positive_radius() {
        assert_eq!(
            Ball::new(vec![q(0, 1)], q(0, 1)),
            Err(SpaceError::NonPositiveRadius)
        );
    }

    #[test]
    fn plane_distances() {
        let m = MetricSampleSpace::euclidean(2, vec![vec![q(0, 1), q(0, 1)], vec![q(3, 1), q(4, 1)]])
            .unwrap();
        assert_eq!(m.distance(0, 1), q(5, 1));
        assert!(m.validate_metric(&q(0, 1)).is_ok());
    }

    #[test]
    fn distance_tables_are_checked() {
        let m = MetricSampleSpace::euclidean(1, vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let good = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        assert!(m.clone().with_table(good, &1e-9).is_ok());
        let bad = vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        assert!(matches!(
            m.clone().with_table(bad, &1e-9),
            Err(SpaceError::MetricAxiom(_))
        ));
        let asym = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.5, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        assert!(m.with_table(asym, &1e-9).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = MetricSampleSpace::euclidean(2, vec![vec![q(0, 1)]]).unwrap_err();
        assert_eq!(err, SpaceError::DimensionMismatch { expected: 2, found: 1 });
    }
}
