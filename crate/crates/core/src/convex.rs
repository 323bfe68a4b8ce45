//! Compact convex sets in `ℝ^d` with exact distance oracles.

use crate::error::SelectionError;
use crate::metric::dist_sq;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet<S> {
    Point(Vec<S>),
    Segment { a: Vec<S>, b: Vec<S> },
    /// Axis-parallel box `lo ≤ x ≤ hi`.
    Box { lo: Vec<S>, hi: Vec<S> },
    /// Convex hull of finitely many vertices.
    Polytope(Vec<Vec<S>>),
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn minus<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

fn clamp<S: Scalar>(v: S, lo: &S, hi: &S) -> S {
    v.max_of(lo.clone()).min_of(hi.clone())
}

impl<S: Scalar> ConvexSet<S> {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Point(p) => p.len(),
            ConvexSet::Segment { a, .. } => a.len(),
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Polytope(v) => v.first().map_or(0, Vec::len),
        }
    }

    /// Checks dimensions, nonemptiness and box bounds.
    pub fn validate(&self, dim: usize) -> Result<(), SelectionError> {
        let check = |v: &Vec<S>| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(SelectionError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                })
            }
        };
        match self {
            ConvexSet::Point(p) => check(p),
            ConvexSet::Segment { a, b } => check(a).and(check(b)),
            ConvexSet::Box { lo, hi } => {
                check(lo)?;
                check(hi)?;
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return Err(SelectionError::EmptyPolytope);
                }
                Ok(())
            }
            ConvexSet::Polytope(vs) => {
                if vs.is_empty() {
                    return Err(SelectionError::EmptyPolytope);
                }
                vs.iter().try_for_each(check)
            }
        }
    }

    /// Nearest point of the set to `q`.
    pub fn project(&self, q: &[S]) -> Vec<S> {
        match self {
            ConvexSet::Point(p) => p.clone(),
            ConvexSet::Segment { a, b } => {
                let ab = minus(b, a);
                let len = dot(&ab, &ab);
                if len.is_zero() {
                    return a.clone();
                }
                let t = clamp(dot(&minus(q, a), &ab) / len, &S::zero(), &S::one());
                a.iter()
                    .zip(&ab)
                    .map(|(x, d)| x.clone() + t.clone() * d.clone())
                    .collect()
            }
            ConvexSet::Box { lo, hi } => q
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (l, h))| clamp(x.clone(), l, h))
                .collect(),
            ConvexSet::Polytope(vs) => polytope_projection(vs, q),
        }
    }

    /// Squared distance from `q` to the set, exact in rational mode.
    pub fn dist_sq(&self, q: &[S]) -> S {
        dist_sq(q, &self.project(q))
    }

    /// Distance from `q`; in exact mode an upper bound exact on rational squares.
    pub fn distance(&self, q: &[S]) -> S {
        self.dist_sq(q).sqrt_upper()
    }

    pub fn contains(&self, q: &[S], tol: &S) -> bool {
        self.dist_sq(q) <= tol.clone() * tol.clone()
    }
}

/// Solves `a x = b` by Gaussian elimination; `None` when singular. In float
/// mode pivots below `1e-12` times the largest entry count as zero.
pub fn solve_linear<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(S::zero(), |m, v| m.max_of(v.abs()));
    let eps = match S::MODE {
        crate::scalar::Mode::Exact => S::zero(),
        crate::scalar::Mode::Float => scale * S::from_f64_lossy(1e-12),
    };
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= eps {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col].clone() / a[col][col].clone();
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let v = f.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - v;
            }
            let v = f * b[col].clone();
            b[row] = b[row].clone() - v;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}

/// Projection of `q` onto the affine hull of `pts`, as barycentric weights;
/// `None` when the points are affinely dependent.
pub fn affine_projection_weights<S: Scalar>(pts: &[&Vec<S>], q: &[S]) -> Option<Vec<S>> {
    let (v0, rest) = pts.split_first()?;
    if rest.is_empty() {
        return Some(vec![S::one()]);
    }
    let dirs: Vec<Vec<S>> = rest.iter().map(|v| minus(v, v0)).collect();
    let gram = dirs
        .iter()
        .map(|u| dirs.iter().map(|w| dot(u, w)).collect())
        .collect();
    let rhs = dirs.iter().map(|u| dot(&minus(q, v0), u)).collect();
    let t = solve_linear(gram, rhs)?;
    let t0 = t.iter().fold(S::one(), |acc, v| acc - v.clone());
    Some(std::iter::once(t0).chain(t).collect())
}

/// Nearest point of a V-polytope. The minimizer lies in the relative
/// interior of a face and therefore equals the affine projection onto some
/// affinely independent vertex subset with nonnegative weights; every such
/// subset of size at most `d + 1` is tried.
fn polytope_projection<S: Scalar>(vs: &[Vec<S>], q: &[S]) -> Vec<S> {
    let d = q.len();
    let max_size = (d + 1).min(vs.len());
    let mut best: Option<(S, Vec<S>)> = None;
    let floor = match S::MODE {
        crate::scalar::Mode::Exact => S::zero(),
        crate::scalar::Mode::Float => S::from_f64_lossy(-1e-12),
    };
    let mut idx = Vec::new();
    let mut consider = |idx: &[usize]| {
        let pts: Vec<&Vec<S>> = idx.iter().map(|&i| &vs[i]).collect();
        let Some(w) = affine_projection_weights(&pts, q) else {
            return;
        };
        if w.iter().any(|x| *x < floor) {
            return;
        }
        let mut p = vec![S::zero(); d];
        for (wi, v) in w.iter().zip(&pts) {
            for (pk, vk) in p.iter_mut().zip(v.iter()) {
                *pk = pk.clone() + wi.clone() * vk.clone();
            }
        }
        let dsq = dist_sq(q, &p);
        if best.as_ref().is_none_or(|(b, _)| dsq < *b) {
            best = Some((dsq, p));
        }
    };
    fn walk(n: usize, k: usize, start: usize, idx: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        for i in start..n {
            idx.push(i);
            f(idx);
            if idx.len() < k {
                walk(n, k, i + 1, idx, f);
            }
            idx.pop();
        }
    }
    walk(vs.len(), max_size, 0, &mut idx, &mut consider);
    best.expect("single vertices are always candidates").1
}
