//! Mather's locally finite transform of the ℓ₁ unit sphere into the finitely
//! supported simplex.
//!
//! For `y` with `‖y‖₁ = 1` the transform keeps only coordinates above half
//! the sup-norm, `λ_α(y) = max{y(α) − ‖y‖∞/2, 0}`, and renormalizes. Ties
//! at exactly `‖y‖∞/2` map to zero.

use crate::error::SparseError;
use crate::scalar::Scalar;
use crate::sparse::{ExtendedUnitVec, IndexSet, SparseVec, UnitSimplexPoint};

fn half<S: Scalar>(x: S) -> S {
    x / S::from_ratio(2, 1)
}

/// Every unlisted coordinate must fall strictly below the survival threshold.
fn check_tail<S: Scalar>(y: &ExtendedUnitVec<S>) -> Result<S, SparseError> {
    let threshold = half(y.sup_norm());
    if y.has_tail() && *y.tail_sup() >= threshold {
        return Err(SparseError::TailTooLarge {
            tail: y.tail_sup().render(),
            threshold: threshold.render(),
        });
    }
    Ok(threshold)
}

/// The unnormalized transform `λ(y)`; nonzero for every valid `y`.
pub fn mather_lambda<S: Scalar>(y: &ExtendedUnitVec<S>) -> Result<SparseVec<S>, SparseError> {
    let threshold = check_tail(y)?;
    let out = SparseVec::from_entries(y.explicit().iter().filter_map(|(k, v)| {
        let excess = v.clone() - threshold.clone();
        excess.gt_zero().then(|| (k.clone(), excess))
    }));
    debug_assert!(!out.is_empty(), "argmax coordinate must survive");
    Ok(out)
}

/// `η(y) = λ(y) / ‖λ(y)‖₁`.
pub fn mather_eta<S: Scalar>(y: &ExtendedUnitVec<S>) -> Result<UnitSimplexPoint<S>, SparseError> {
    let lambda = mather_lambda(y)?;
    UnitSimplexPoint::normalize(&lambda)
}

/// A finite index set `bound` and an ℓ₁ radius such that every `y'` in the
/// unit sphere with `‖y' − y‖₁ < radius` has `carrier(λ(y')) ⊆ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBound<S> {
    pub bound: IndexSet,
    pub radius: S,
}

/// Local finiteness witness for the transform at `y`.
///
/// With `t` the mass outside `bound` and `s = ‖y‖∞`, any `y'` within `r` has
/// outside mass below `t + r` and sup-norm above `s − r`; the survivors of
/// `y'` stay inside `bound` as long as `t + r ≤ (s − r)/2`, i.e.
/// `r ≤ (s − 2t)/3`. The returned radius is half of that.
pub fn mather_support_bound<S: Scalar>(
    y: &ExtendedUnitVec<S>,
) -> Result<SupportBound<S>, SparseError> {
    let threshold = check_tail(y)?;
    if *y.tail_mass() >= threshold {
        return Err(SparseError::TailTooLarge {
            tail: y.tail_mass().render(),
            threshold: threshold.render(),
        });
    }
    let two = S::from_ratio(2, 1);
    let radius = (y.sup_norm() - two * y.tail_mass().clone()) / S::from_ratio(6, 1);
    Ok(SupportBound {
        bound: y.explicit().carrier(),
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::sparse::IndexId;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn unit(entries: &[(&str, Rational)]) -> ExtendedUnitVec<Rational> {
        let v = SparseVec::from_entries(entries.iter().cloned());
        UnitSimplexPoint::new(v, &q(0, 1)).unwrap().into()
    }

    #[test]
    fn lambda_examples() {
        let y = unit(&[("a", q(2, 5)), ("b", q(7, 20)), ("c", q(1, 4))]);
        assert_eq!(
            mather_lambda(&y).unwrap(),
            SparseVec::from_entries([("a", q(1, 5)), ("b", q(3, 20)), ("c", q(1, 20))])
        );
        // b sits exactly on the threshold and does not survive
        let y = unit(&[("a", q(3, 5)), ("b", q(3, 10)), ("c", q(1, 10))]);
        assert_eq!(
            mather_lambda(&y).unwrap(),
            SparseVec::from_entries([("a", q(3, 10))])
        );
        let y: ExtendedUnitVec<Rational> = UnitSimplexPoint::dirac("a").into();
        assert_eq!(
            mather_lambda(&y).unwrap(),
            SparseVec::from_entries([("a", q(1, 2))])
        );
    }

    #[test]
    fn eta_examples() {
        let y = unit(&[("a", q(2, 5)), ("b", q(7, 20)), ("c", q(1, 4))]);
        assert_eq!(
            mather_eta(&y).unwrap().into_vec(),
            SparseVec::from_entries([("a", q(1, 2)), ("b", q(3, 8)), ("c", q(1, 8))])
        );
        let y = unit(&[("a", q(3, 5)), ("b", q(3, 10)), ("c", q(1, 10))]);
        assert_eq!(mather_eta(&y).unwrap(), UnitSimplexPoint::dirac("a"));
        let uniform = UnitSimplexPoint::<Rational>::uniform(["a", "b", "c", "d"]).unwrap();
        assert_eq!(mather_eta(&uniform.clone().into()).unwrap(), uniform);
    }

    #[test]
    fn support_bound_examples() {
        let y = unit(&[("a", q(2, 5)), ("b", q(7, 20)), ("c", q(1, 4))]);
        let sb = mather_support_bound(&y).unwrap();
        assert_eq!(sb.radius, q(1, 15));
        assert_eq!(sb.bound.len(), 3);

        let y: ExtendedUnitVec<Rational> = UnitSimplexPoint::dirac("a").into();
        assert_eq!(mather_support_bound(&y).unwrap().radius, q(1, 6));

        let y = ExtendedUnitVec::new(
            SparseVec::from_entries([("a", q(1, 2)), ("b", q(3, 10))]),
            q(1, 5),
            q(1, 20),
            &q(0, 1),
        )
        .unwrap();
        let sb = mather_support_bound(&y).unwrap();
        assert_eq!(sb.radius, q(1, 60));
        assert_eq!(
            sb.bound,
            ["a", "b"].into_iter().map(IndexId::from).collect::<IndexSet>()
        );
    }

    #[test]
    fn refuses_uncertifiable_tails() {
        // tail coordinate could reach the threshold
        let y = ExtendedUnitVec::new(
            SparseVec::from_entries([("a", q(1, 5))]),
            q(4, 5),
            q(1, 10),
            &q(0, 1),
        )
        .unwrap();
        assert!(matches!(mather_lambda(&y), Err(SparseError::TailTooLarge { .. })));
        assert!(matches!(mather_eta(&y), Err(SparseError::TailTooLarge { .. })));
        // tail coordinates are individually fine but the tail mass is too heavy
        // for a positive stability radius
        let y = ExtendedUnitVec::new(
            SparseVec::from_entries([("a", q(2, 5)), ("b", q(1, 10))]),
            q(1, 2),
            q(1, 100),
            &q(0, 1),
        )
        .unwrap();
        assert!(mather_lambda(&y).is_ok());
        assert!(matches!(
            mather_support_bound(&y),
            Err(SparseError::TailTooLarge { .. })
        ));
    }

    fn simplex_strategy() -> impl Strategy<Value = UnitSimplexPoint<Rational>> {
        prop::collection::vec(1i64..50, 1..12).prop_map(|ws| {
            let v = SparseVec::from_entries(
                ws.iter()
                    .enumerate()
                    .map(|(i, w)| (format!("i{i}"), q(*w, 1))),
            );
            UnitSimplexPoint::normalize(&v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn survivors_exceed_half_sup(p in simplex_strategy()) {
            let y: ExtendedUnitVec<Rational> = p.clone().into();
            let sup = y.sup_norm();
            let eta = mather_eta(&y).unwrap();
            prop_assert_eq!(eta.as_vec().l1_norm(), q(1, 1));
            for (k, _) in eta.iter() {
                prop_assert!(p.get(k.as_str()) * q(2, 1) > sup);
            }
            let bound = q(2, 1) / sup;
            prop_assert!(q(eta.carrier().len() as i64, 1) <= bound);
        }

        #[test]
        fn repeated_eta_never_grows_carrier(p in simplex_strategy()) {
            // repeated application never grows the carrier
            let eta = mather_eta(&p.into()).unwrap();
            let again = mather_eta(&eta.clone().into()).unwrap();
            prop_assert!(again.carrier().is_subset(&eta.carrier()));
        }
    }
}
