//! Acceptance criteria. Runs without the libtest harness and prints one
//! `PASS`/`FAIL` line per criterion; exits nonzero if any criterion fails.
//!
//! Oracles below are written from the definitions and share no code with the
//! library beyond its data types.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use num::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use unisel::convex::ConvexSet;
use unisel::mather::{mather_eta, mather_lambda, mather_support_bound};
use unisel::metric::Ball;
use unisel::nerve::{canonical_map_check_balls, SimplexValuedMap};
use unisel::pou::pou_from_metric_cover;
use unisel::random::{
    random_ball_cover, random_cover, random_map, random_open_cover, random_selection_instance,
    random_simplex_point, random_space, seeded, ChaCha8Rng,
};
use unisel::selection::{conv_fiber_open, conv_membership, epsilon_selection, ConvexTarget};
use unisel::setmap::{classify, closure_cover, closure_cover_by_intersection, graph_closure, IndexedCover, SetValuedMap};
use unisel::space::{FiniteSpace, PointSet};
use unisel::json::grid_points;
use unisel::{ExtendedUnitVec, IndexId, Rational, SparseVec, UnitSimplexPoint};

type Q = Rational;

fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

struct Outcome {
    trials: usize,
    failures: usize,
    first: Option<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { trials: 0, failures: 0, first: None }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(witness());
            }
        }
    }
}

// ---------------------------------------------------------------- oracles

/// Random simplex point with 1..=20 indices and integer weights.
fn random_unit(rng: &mut ChaCha8Rng) -> BTreeMap<String, Q> {
    let k = rng.gen_range(1..=20);
    let w: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=50)).collect();
    let total: i64 = w.iter().sum();
    w.iter()
        .enumerate()
        .map(|(i, &wi)| (format!("a{i}"), q(wi, total)))
        .collect()
}

fn to_unit(y: &BTreeMap<String, Q>) -> ExtendedUnitVec<Q> {
    let v = SparseVec::from_entries(y.iter().map(|(k, v)| (k.as_str(), v.clone())));
    UnitSimplexPoint::new(v, &Q::zero()).unwrap().into()
}

/// λ and η from the definition: shift by half the sup-norm, clip, normalize.
fn oracle_mather(y: &BTreeMap<String, Q>) -> (BTreeMap<String, Q>, BTreeMap<String, Q>) {
    let sup = y.values().cloned().fold(Q::zero(), |a, b| if b > a { b } else { a });
    let half = sup / q(2, 1);
    let lambda: BTreeMap<String, Q> = y
        .iter()
        .filter(|(_, v)| **v > half)
        .map(|(k, v)| (k.clone(), v.clone() - half.clone()))
        .collect();
    let total = lambda.values().cloned().fold(Q::zero(), |a, b| a + b);
    let eta = lambda.iter().map(|(k, v)| (k.clone(), v.clone() / total.clone())).collect();
    (lambda, eta)
}

fn entries<S: unisel::Scalar>(v: &SparseVec<S>) -> BTreeMap<String, S> {
    v.iter().map(|(k, s)| (k.as_str().to_owned(), s.clone())).collect()
}

/// Closure in a finite space: points whose minimal open set meets `a`.
fn oracle_closure(x: &FiniteSpace, a: &PointSet) -> PointSet {
    (0..x.len()).filter(|&p| x.min_open(p).iter().any(|q| a.contains(q))).collect()
}

/// Openness: closed under passing to minimal open sets.
fn oracle_open(x: &FiniteSpace, a: &PointSet) -> bool {
    a.iter().all(|&p| x.min_open(p).is_subset(a))
}

fn subsets(n: usize) -> Vec<PointSet> {
    (0u32..(1 << n))
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

struct Classes {
    lsc: bool,
    totally_lsc: bool,
    open_graph: bool,
    llc: bool,
}

/// Brute force over all open subsets, all subsets, and the product topology.
fn oracle_classes(m: &SetValuedMap) -> Classes {
    let (x, y) = (m.domain(), m.codomain());
    let pre = |u: &PointSet| -> PointSet {
        (0..x.len()).filter(|&p| !m.value(p).is_disjoint(u)).collect()
    };
    let all = subsets(y.len());
    let lsc = all.iter().filter(|u| oracle_open(y, u)).all(|u| oracle_open(x, &pre(u)));
    let totally_lsc = all.iter().all(|u| oracle_open(x, &pre(u)));
    let llc = all.iter().all(|k| {
        let s: PointSet = (0..x.len()).filter(|&p| k.is_subset(m.value(p))).collect();
        oracle_open(x, &s)
    });
    let open_graph = (0..x.len()).all(|p| {
        m.value(p).iter().all(|&v| {
            x.min_open(p)
                .iter()
                .all(|&p2| y.min_open(v).iter().all(|v2| m.value(p2).contains(v2)))
        })
    });
    Classes { lsc, totally_lsc, open_graph, llc }
}

/// Reduced row echelon solve of `A λ = b` over the rationals; `None` if the
/// system is inconsistent. Free variables are set to zero.
fn rref_solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = Q::one() / a[r][c].clone();
        for j in 0..cols {
            a[r][j] = a[r][j].clone() * inv.clone();
        }
        b[r] = b[r].clone() * inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    a[i][j] = a[i][j].clone() - f.clone() * a[r][j].clone();
                }
                b[i] = b[i].clone() - f * b[r].clone();
            }
        }
        pivots.push(c);
        r += 1;
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

/// Membership of `p` in the convex hull of the basis vectors `{e_α : α ∈ allowed}`
/// of `ℚ^indices`, by trying every subset of generators.
fn oracle_hull(indices: &[IndexId], allowed: &BTreeSet<IndexId>, p: &UnitSimplexPoint<Q>) -> bool {
    let gens: Vec<&IndexId> = indices.iter().filter(|k| allowed.contains(*k)).collect();
    let target: Vec<Q> = indices.iter().map(|k| p.get(k.as_str())).collect();
    (1u32..(1 << gens.len())).any(|mask| {
        let chosen: Vec<&IndexId> = (0..gens.len()).filter(|i| mask & (1 << i) != 0).map(|i| gens[i]).collect();
        let mut a: Vec<Vec<Q>> = indices
            .iter()
            .map(|k| chosen.iter().map(|g| if *g == k { Q::one() } else { Q::zero() }).collect())
            .collect();
        a.push(vec![Q::one(); chosen.len()]);
        let mut b = target.clone();
        b.push(Q::one());
        rref_solve(a, b).is_some_and(|l| l.iter().all(|v| !v.is_negative()))
    })
}

fn oracle_distance(set: &ConvexSet<f64>, p: &[f64]) -> f64 {
    match set {
        ConvexSet::Point(a) => a.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        ConvexSet::Segment { a, b } => {
            let ab: Vec<f64> = a.iter().zip(b).map(|(a, b)| b - a).collect();
            let ap: Vec<f64> = a.iter().zip(p).map(|(a, p)| p - a).collect();
            let len2: f64 = ab.iter().map(|v| v * v).sum();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (ab.iter().zip(&ap).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
            };
            ap.iter().zip(&ab).map(|(v, u)| (v - t * u).powi(2)).sum::<f64>().sqrt()
        }
        ConvexSet::Box { lo, hi } => p
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(x, (l, h))| (x - x.clamp(*l, *h)).powi(2))
            .sum::<f64>()
            .sqrt(),
        ConvexSet::Polytope(_) => unreachable!("generator emits segments and boxes"),
    }
}

fn ball_contains(b: &Ball<Q>, p: &[Q]) -> bool {
    let d2 = b.center.iter().zip(p).fold(Q::zero(), |acc, (c, x)| {
        let d = c.clone() - x.clone();
        acc + d.clone() * d
    });
    d2 < b.radius.clone() * b.radius.clone()
}

// ---------------------------------------------------------------- criteria

fn c1_mather_invariants(rng: &mut ChaCha8Rng) -> Outcome {
    let mut o = Outcome::new();
    for _ in 0..10_000 {
        let y = random_unit(rng);
        let (lambda, eta) = oracle_mather(&y);
        let ext = to_unit(&y);
        let got_l = entries(&mather_lambda(&ext).unwrap());
        let got_e = entries(mather_eta(&ext).unwrap().as_vec());
        let sup = y.values().max().unwrap().clone();
        let sum = got_e.values().cloned().fold(Q::zero(), |a, b| a + b);
        let ok = got_l == lambda
            && got_e == eta
            && sum == Q::one()
            && got_e.values().all(|v| v.is_positive())
            && got_e.keys().all(|k| y.contains_key(k))
            && got_l.keys().all(|k| y[k].clone() * q(2, 1) > sup)
            && q(got_l.len() as i64, 1) <= q(2, 1) / sup;
        o.check(ok, || format!("{y:?}"));
    }
    o
}

fn c2_mather_stability(rng: &mut ChaCha8Rng) -> Outcome {
    let mut o = Outcome::new();
    for _ in 0..1_000 {
        let y = random_unit(rng);
        let sb = mather_support_bound(&to_unit(&y)).unwrap();
        let bound: BTreeSet<String> = sb.bound.iter().map(|k| k.as_str().to_owned()).collect();
        // Direction: a random simplex point, possibly a Dirac mass on a fresh index.
        let mut z: BTreeMap<String, Q> = BTreeMap::new();
        if rng.gen_bool(0.5) {
            z.insert("fresh".into(), Q::one());
        } else {
            let keys: Vec<String> = y.keys().cloned().chain(["n0".into(), "n1".into()]).collect();
            let w: Vec<i64> = keys.iter().map(|_| rng.gen_range(0..=10)).collect();
            let t: i64 = w.iter().sum::<i64>().max(1);
            for (k, wi) in keys.into_iter().zip(w) {
                if wi > 0 {
                    z.insert(k, q(wi, t));
                }
            }
            if z.is_empty() {
                z.insert("n0".into(), Q::one());
            }
        }
        let keys: BTreeSet<&String> = y.keys().chain(z.keys()).collect();
        let get = |m: &BTreeMap<String, Q>, k: &str| m.get(k).cloned().unwrap_or_else(Q::zero);
        let dist: Q = keys.iter().fold(Q::zero(), |a, k| a + (get(&z, k) - get(&y, k)).abs());
        if dist.is_zero() {
            continue;
        }
        // ‖y' − y‖₁ = t·‖z − y‖₁ = u·radius < radius
        let u = q(rng.gen_range(1..=999), 1000);
        let t = (u * sb.radius.clone() / dist).min(Q::one());
        let y2: BTreeMap<String, Q> = keys
            .iter()
            .map(|k| ((*k).clone(), (Q::one() - t.clone()) * get(&y, k) + t.clone() * get(&z, k)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        let moved: Q = keys.iter().fold(Q::zero(), |a, k| a + (get(&y2, k) - get(&y, k)).abs());
        let (lambda2, _) = oracle_mather(&y2);
        let got = entries(&mather_lambda(&to_unit(&y2)).unwrap());
        let ok = moved < sb.radius && got == lambda2 && got.keys().all(|k| bound.contains(k));
        o.check(ok, || format!("y={y:?} y'={y2:?}"));
    }
    o
}

fn c3_closure_formula(rng: &mut ChaCha8Rng) -> Outcome {
    let mut o = Outcome::new();
    for _ in 0..500 {
        let x = random_space(rng, 8);
        let k = rng.gen_range(1..=6);
        let c = random_cover(rng, &x, k);
        let fiberwise = closure_cover(&c);
        let pointwise = closure_cover_by_intersection(&c);
        let members = c.members();
        let oracle: Vec<BTreeSet<IndexId>> = (0..x.len())
            .map(|p| {
                members
                    .iter()
                    .filter(|(_, m)| oracle_closure(&x, m).contains(&p))
                    .map(|(k, _)| k.clone())
                    .collect()
            })
            .collect();
        let got: Vec<BTreeSet<IndexId>> = (0..x.len()).map(|p| fiberwise.value_ids(p)).collect();
        let ok = fiberwise == pointwise && got == oracle && &graph_closure(c.as_map()) == fiberwise.as_map();
        o.check(ok, || format!("{:?}", c));
    }
    o
}

fn c4_diagram(rng: &mut ChaCha8Rng) -> Outcome {
    let mut o = Outcome::new();
    for _ in 0..2_000 {
        let x = random_space(rng, 6);
        let y = random_space(rng, 6);
        let m = random_map(rng, &x, &y);
        let r = classify(&m);
        let or = oracle_classes(&m);
        let ok = r.respects_diagram()
            && (!r.open_graph.holds || r.totally_lsc.holds)
            && (!r.totally_lsc.holds || r.lsc.holds)
            && r.lower_locally_constant.holds == r.totally_lsc.holds
            && r.lsc.holds == or.lsc
            && r.totally_lsc.holds == or.totally_lsc
            && r.open_graph.holds == or.open_graph
            && r.lower_locally_constant.holds == or.llc;
        o.check(ok, || format!("{m:?}"));
    }
    let s = FiniteSpace::sierpinski();
    let id = SetValuedMap::new(s.clone(), s.clone(), vec![PointSet::from([0]), PointSet::from([1])]).unwrap();
    let r = classify(&id);
    o.check(r.lsc.holds && !r.totally_lsc.holds, || "Sierpinski identity".into());
    let d = FiniteSpace::discrete_named(&["a", "b"]).unwrap();
    let delta = SetValuedMap::new(d, s, vec![PointSet::from([0]), PointSet::from([1])]).unwrap();
    let r = classify(&delta);
    o.check(r.lower_locally_constant.holds && !r.open_graph.holds, || "discrete diagonal".into());
    o
}

fn c5_canonical(rng: &mut ChaCha8Rng) -> Outcome {
    let mut o = Outcome::new();
    for i in 0..100 {
        let dim = 1 + i % 2;
        let (space, balls) = random_ball_cover::<Q, _>(rng, dim, 50, 10);
        let pou = pou_from_metric_cover(&space, &balls).unwrap();
        let report = canonical_map_check_balls(&pou, &balls).unwrap();
        // Each sample witnesses its own carrier, and the carrier is exactly the
        // set of balls containing it, so both conditions hold by construction.
        let oracle = (0..space.len()).all(|x| {
            let inside: BTreeSet<IndexId> = balls
                .iter()
                .filter(|(_, b)| ball_contains(b, space.coords(x)))
                .map(|(k, _)| k.clone())
                .collect();
            !inside.is_empty() && pou.row(x).carrier() == inside
        });
        o.check(report.canonical && oracle, || format!("dim {dim}, report {report:?}"));
    }
    o
}

fn c6_fibers(rng: &mut ChaCha8Rng) -> Outcome {
    let mut o = Outcome::new();
    for _ in 0..500 {
        let x = random_space(rng, 8);
        let k = rng.gen_range(1..=6);
        let c = random_open_cover(rng, &x, k);
        let ids: Vec<IndexId> = c.indices().into_iter().collect();
        let phi = SimplexValuedMap::new(&c);
        for _ in 0..100 {
            let p: UnitSimplexPoint<Q> = random_simplex_point(rng, &ids, ids.len());
            let fiber: PointSet = (0..x.len())
                .filter(|&pt| p.carrier().iter().all(|a| c.member(a.as_str()).contains(&pt)))
                .collect();
            let got = phi.fiber(&p).unwrap();
            let ok = conv_fiber_open(&c, &p).open
                && oracle_open(&x, &fiber)
                && got == fiber
                && (0..x.len()).all(|pt| phi.membership(&p, pt).unwrap() == fiber.contains(&pt));
            o.check(ok, || format!("{c:?} p={p:?}"));
        }
    }
    o
}

fn c7_selection(rng: &mut ChaCha8Rng) -> (Outcome, usize) {
    let mut o = Outcome::new();
    let mut skipped = 0;
    while o.trials < 100 {
        let (target, eps, anchors) = random_selection_instance::<f64, _>(rng);
        let covered = (0..target.len())
            .all(|x| anchors.values().any(|a| oracle_distance(target.set(x), a) < eps));
        if !covered {
            skipped += 1;
            continue;
        }
        let sel = epsilon_selection(&target, &eps, &anchors).unwrap();
        let ok = sel.certificate.records.iter().enumerate().all(|(x, r)| {
            r.holds && oracle_distance(target.set(x), &r.value) < eps + 1e-9
        });
        o.check(ok, || format!("{target:?} eps={eps}"));
    }
    let set = ConvexSet::Segment { a: vec![0.0, 0.0], b: vec![1.0, 0.0] };
    let target = ConvexTarget::new(2, BTreeMap::from([("x".to_owned(), set)])).unwrap();
    let anchors = grid_points(&[0.0, -0.25], &[1.0, 0.25], &[4, 2]);
    let sel = epsilon_selection(&target, &0.3, &anchors).unwrap();
    let v = &sel.certificate.records[0].value;
    o.check(
        (v[0] - 0.5).abs() <= 1e-12 && v[1].abs() <= 1e-12 && anchors.len() == 15,
        || format!("segment example gave {v:?}"),
    );
    (o, skipped)
}

fn c8_oracle_equivalence(rng: &mut ChaCha8Rng) -> Outcome {
    let mut o = Outcome::new();
    while o.trials < 1_000 {
        let x = random_space(rng, 5);
        let k = rng.gen_range(1..=6);
        let c: IndexedCover = random_cover(rng, &x, k);
        let ids: Vec<IndexId> = c.indices().into_iter().collect();
        let pt = rng.gen_range(0..x.len());
        let allowed = c.value_ids(pt);
        let pool: Vec<IndexId> = if rng.gen_bool(0.5) {
            allowed.iter().cloned().collect()
        } else {
            let mut v = ids.clone();
            v.shuffle(rng);
            v
        };
        let p: UnitSimplexPoint<Q> = random_simplex_point(rng, &pool, pool.len());
        let got = conv_membership(&c, pt, &p);
        let want = oracle_hull(&ids, &allowed, &p);
        o.check(got == want, || format!("{c:?} x={pt} p={p:?}"));
    }
    o
}

fn c9_determinism() -> Outcome {
    let mut o = Outcome::new();
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let bundle = root.join("docs/bundle.json");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_unisel"))
            .args(["--seed", "42", "verify-all"])
            .arg(&bundle)
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    o.check(
        a.status.code() == Some(0) && b.status.code() == Some(0) && a.stdout == b.stdout && !a.stdout.is_empty(),
        || format!("exit {:?}/{:?}, {} vs {} bytes", a.status.code(), b.status.code(), a.stdout.len(), b.stdout.len()),
    );
    o
}

fn main() {
    let mut rng = seeded(20_241_015);
    let mut all_ok = true;
    let mut report = |n: u32, label: &str, o: Outcome, extra: &str, started: Instant| {
        let ok = o.failures == 0 && o.trials > 0;
        all_ok &= ok;
        println!(
            "criterion {n} [{label}]: {} ({} checks, {} failures{extra}, {:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            o.trials,
            o.failures,
            started.elapsed().as_secs_f64()
        );
        if let Some(w) = o.first {
            println!("    first failure: {}", w.chars().take(400).collect::<String>());
        }
    };
    let t = Instant::now();
    report(1, "mather invariants", c1_mather_invariants(&mut rng), "", t);
    let t = Instant::now();
    report(2, "mather stability", c2_mather_stability(&mut rng), "", t);
    let t = Instant::now();
    report(3, "closure cover formulas", c3_closure_formula(&mut rng), "", t);
    let t = Instant::now();
    report(4, "semicontinuity diagram", c4_diagram(&mut rng), "", t);
    let t = Instant::now();
    report(5, "canonical map on ball covers", c5_canonical(&mut rng), "", t);
    let t = Instant::now();
    report(6, "simplex-valued fibers", c6_fibers(&mut rng), "", t);
    let t = Instant::now();
    let (o, skipped) = c7_selection(&mut rng);
    report(7, "epsilon selection", o, &format!(", {skipped} instances without cover"), t);
    let t = Instant::now();
    report(8, "hull oracle equivalence", c8_oracle_equivalence(&mut rng), "", t);
    let t = Instant::now();
    report(9, "byte-identical verify-all", c9_determinism(), "", t);
    if !all_ok {
        std::process::exit(1);
    }
}
