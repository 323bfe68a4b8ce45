//! Seeded generators for random instances. All randomness in the crate
//! flows through a [`ChaCha8Rng`] built from a single `u64` seed, so
//! instances are reproducible across runs and platforms.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::convex::ConvexSet;
use crate::json::grid_points;
use crate::metric::{dist, Ball, MetricSampleSpace};
use crate::scalar::Scalar;
use crate::selection::ConvexTarget;
use crate::setmap::{IndexedCover, SetValuedMap};
use crate::space::{FiniteSpace, PointSet};
use crate::sparse::{IndexId, SparseVec, UnitSimplexPoint};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random finite space on `1..=max_points` points: a random reflexive
/// relation closed under transitivity, read as "y ∈ min_open(x)".
pub fn random_space<R: Rng>(rng: &mut R, max_points: usize) -> FiniteSpace {
    let n = rng.gen_range(1..=max_points.max(1));
    let density = rng_density(rng);
    random_space_with(rng, n, density)
}

fn rng_density<R: Rng>(rng: &mut R) -> f64 {
    *[0.0, 0.15, 0.3, 0.5].choose(rng).expect("nonempty")
}

pub fn random_space_with<R: Rng>(rng: &mut R, n: usize, density: f64) -> FiniteSpace {
    let mut rel = vec![vec![false; n]; n];
    for (i, row) in rel.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = i == j || rng.gen_bool(density);
        }
    }
    // Warshall
    for k in 0..n {
        for i in 0..n {
            if rel[i][k] {
                for j in 0..n {
                    if rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
    let names = (0..n).map(|i| format!("p{i}")).collect();
    let opens = rel
        .iter()
        .map(|row| (0..n).filter(|&j| row[j]).collect())
        .collect();
    FiniteSpace::new(names, opens).expect("transitive closure is a preorder")
}

/// A uniformly random nonempty subset of `0..n`.
pub fn random_nonempty_subset<R: Rng>(rng: &mut R, n: usize) -> PointSet {
    assert!(n > 0 && n < 64);
    let mask: u64 = rng.gen_range(1..(1u64 << n));
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// Values drawn uniformly from the nonempty subsets of the codomain.
pub fn random_map<R: Rng>(rng: &mut R, domain: &FiniteSpace, codomain: &FiniteSpace) -> SetValuedMap {
    let values = (0..domain.len())
        .map(|_| random_nonempty_subset(rng, codomain.len()))
        .collect();
    SetValuedMap::new(domain.clone(), codomain.clone(), values).expect("nonempty values")
}

pub fn index_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("U{i}")).collect()
}

/// A random cover indexed by `U0..U{k-1}`.
pub fn random_cover<R: Rng>(rng: &mut R, domain: &FiniteSpace, k: usize) -> IndexedCover {
    let codomain = FiniteSpace::discrete_named(&index_names(k)).expect("distinct");
    IndexedCover::new(random_map(rng, domain, &codomain)).expect("discrete codomain")
}

/// A random cover whose members are all open.
pub fn random_open_cover<R: Rng>(rng: &mut R, domain: &FiniteSpace, k: usize) -> IndexedCover {
    let n = domain.len();
    let mut members: Vec<PointSet> = (0..k)
        .map(|_| {
            let seeds = random_nonempty_subset(rng, n);
            domain.open_hull(&seeds)
        })
        .collect();
    for x in 0..n {
        if !members.iter().any(|m| m.contains(&x)) {
            let a = rng.gen_range(0..k);
            members[a].extend(domain.min_open(x).iter().copied());
        }
    }
    let fibers = index_names(k)
        .into_iter()
        .map(IndexId::from)
        .zip(members)
        .collect();
    IndexedCover::from_fibers(domain.clone(), &fibers).expect("covers every point")
}

/// A random point of the simplex over a random nonempty subset of `indices`
/// with at most `max_support` elements and integer weights in `1..=100`.
pub fn random_simplex_point<S: Scalar, R: Rng>(
    rng: &mut R,
    indices: &[IndexId],
    max_support: usize,
) -> UnitSimplexPoint<S> {
    let mut pool: Vec<&IndexId> = indices.iter().collect();
    pool.shuffle(rng);
    let size = rng.gen_range(1..=max_support.min(pool.len()).max(1));
    let v = SparseVec::from_entries(
        pool[..size]
            .iter()
            .map(|k| ((*k).clone(), S::from_ratio(rng.gen_range(1..=100), 1))),
    );
    UnitSimplexPoint::normalize(&v).expect("positive weights")
}

/// Random distinct samples on the grid `(1/8)ℤ^dim ∩ [0, 2]^dim` covered by at
/// most `max_balls` balls: centers and radii are random, and each uncovered
/// sample then enlarges its nearest ball just enough to contain it.
pub fn random_ball_cover<S: Scalar, R: Rng>(
    rng: &mut R,
    dim: usize,
    max_samples: usize,
    max_balls: usize,
) -> (MetricSampleSpace<S>, BTreeMap<IndexId, Ball<S>>) {
    let coord = |rng: &mut R| S::from_ratio(rng.gen_range(0..=16), 8);
    let n = rng.gen_range(1..=max_samples.max(1));
    let mut samples: Vec<Vec<S>> = Vec::with_capacity(n);
    while samples.len() < n {
        let p: Vec<S> = (0..dim).map(|_| coord(rng)).collect();
        if !samples.contains(&p) {
            samples.push(p);
        }
        if dim == 1 && samples.len() == 17 {
            break;
        }
    }
    let k = rng.gen_range(1..=max_balls.max(1));
    let mut balls: Vec<Ball<S>> = (0..k)
        .map(|_| {
            let center = (0..dim).map(|_| coord(rng)).collect();
            let radius = S::from_ratio(rng.gen_range(1..=8), 8);
            Ball::new(center, radius).expect("positive radius")
        })
        .collect();
    for p in &samples {
        if balls.iter().any(|b| b.contains(p)) {
            continue;
        }
        let (nearest, d) = balls
            .iter()
            .enumerate()
            .map(|(i, b)| (i, dist(p, &b.center)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("comparable"))
            .expect("at least one ball");
        balls[nearest].radius = d + S::from_ratio(1, 16);
    }
    let space = MetricSampleSpace::euclidean(dim, samples).expect("consistent dimension");
    let balls = balls
        .into_iter()
        .enumerate()
        .map(|(i, b)| (IndexId::new(format!("U{i}")), b))
        .collect();
    (space, balls)
}

/// A random planar selection problem: segments or boxes in `[0, 1]^2` over
/// 1 to 4 discrete points, grid anchors of spacing `h` on `[-1/2, 3/2]^2`,
/// and `ε` in `[h, 1/2]`, so every set has an anchor closer than `ε`.
pub fn random_selection_instance<S: Scalar, R: Rng>(
    rng: &mut R,
) -> (ConvexTarget<S>, S, BTreeMap<IndexId, Vec<S>>) {
    let c = |rng: &mut R| S::from_ratio(rng.gen_range(0..=8), 8);
    let points = rng.gen_range(1..=4);
    let sets = (0..points)
        .map(|i| {
            let set = if rng.gen_bool(0.5) {
                ConvexSet::Segment {
                    a: vec![c(rng), c(rng)],
                    b: vec![c(rng), c(rng)],
                }
            } else {
                let (x0, x1, y0, y1) = (c(rng), c(rng), c(rng), c(rng));
                ConvexSet::Box {
                    lo: vec![x0.clone().min_of(x1.clone()), y0.clone().min_of(y1.clone())],
                    hi: vec![x0.max_of(x1), y0.max_of(y1)],
                }
            };
            (format!("x{i}"), set)
        })
        .collect();
    let target = ConvexTarget::new(2, sets).expect("valid sets");
    let steps = *[4usize, 8].choose(rng).expect("nonempty");
    let h = S::from_ratio(2, steps as i64);
    let eps = h.clone() + (S::from_ratio(1, 2) - h) * S::from_ratio(rng.gen_range(0..=10), 10);
    let lo = S::from_ratio(-1, 2);
    let hi = S::from_ratio(3, 2);
    let anchors = grid_points(&[lo.clone(), lo], &[hi.clone(), hi], &[steps, steps]);
    (target, eps, anchors)
}
