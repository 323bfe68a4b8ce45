//! The invariant suite run by `verify-all`, and the per-object checks the
//! individual commands share with it.

use rand::Rng;
use serde_json::{json, Value};

use crate::error::Error;
use crate::json::{
    certificate_json, complex_json, cover_json, pou_json, scalar_json, selection_json,
    simplex_json, sparse_json, BundleDoc, LoadedCover, Loader, RandomDoc,
};
use crate::mather::{mather_eta, mather_lambda, mather_support_bound};
use crate::metric::{Ball, MetricSampleSpace};
use crate::nerve::{canonical_map_check, nerve_from_cover, SimplexValuedMap};
use crate::pou::{mather_compose, pou_from_metric_cover, subordination_check, PartitionOfUnity};
use crate::random::{
    index_names, random_ball_cover, random_cover, random_map, random_open_cover,
    random_simplex_point, random_space, random_selection_instance, seeded, ChaCha8Rng,
};
use crate::report::{Checks, Tally};
use crate::scalar::Scalar;
use crate::selection::{conv_fiber_open, epsilon_selection, ConvexTarget};
use crate::setmap::{classify, closure_cover, closure_cover_by_intersection, graph_closure, IndexedCover, SetValuedMap};
use crate::space::{all_subsets, FiniteSpace, PointSet};
use crate::sparse::{ExtendedUnitVec, IndexId, UnitSimplexPoint};

use std::collections::BTreeMap;

/// Outcome of the Mather invariants on one vector.
#[derive(Default)]
pub struct MatherOutcome {
    pub simplex: bool,
    pub containment: bool,
    pub survivors: bool,
    pub cardinality: bool,
}

impl MatherOutcome {
    pub fn all(&self) -> bool {
        self.simplex && self.containment && self.survivors && self.cardinality
    }
}

/// `η(y) ∈ Σ`, `carrier(η) ⊆ carrier(y)`, strict survival above `‖y‖∞/2`
/// and `|carrier(λ)|·‖y‖∞ ≤ 2`.
pub fn mather_invariants<S: Scalar>(y: &ExtendedUnitVec<S>, tol: &S) -> Result<MatherOutcome, Error> {
    let lambda = mather_lambda(y)?;
    let eta = mather_eta(y)?;
    let sup = y.sup_norm();
    let two = S::from_ratio(2, 1);
    let sum = eta.as_vec().l1_norm();
    let survivors = lambda
        .iter()
        .all(|(k, _)| two.clone() * y.explicit().get(k.as_str()) > sup);
    Ok(MatherOutcome {
        simplex: eta.as_vec().all_positive() && (sum - S::one()).abs() <= *tol,
        containment: eta.carrier().is_subset(&y.explicit().carrier()),
        survivors,
        cardinality: S::from_ratio(lambda.len() as i64, 1) * sup <= two,
    })
}

/// A point `y' = (1 − t)y + t z` with `t` below half the certified radius, so
/// that `‖y' − y‖₁ ≤ 2t < radius`; `z` may use indices outside `carrier(y)`.
pub fn perturb<S: Scalar, R: Rng>(rng: &mut R, y: &UnitSimplexPoint<S>, radius: &S) -> UnitSimplexPoint<S> {
    let mut pool: Vec<IndexId> = y.carrier().into_iter().collect();
    pool.extend((0..3).map(|i| IndexId::new(format!("~{i}"))));
    let z: UnitSimplexPoint<S> = random_simplex_point(rng, &pool, pool.len());
    let t = radius.clone() * S::from_ratio(rng.gen_range(1..=99), 200);
    let v = y
        .as_vec()
        .scaled(&(S::one() - t.clone()))
        .add(&z.as_vec().scaled(&t));
    UnitSimplexPoint::normalize(&v).expect("positive combination")
}

/// Invariants and a seeded stability trial for one vector.
pub fn vector_checks<S: Scalar>(
    prefix: &str,
    y: &ExtendedUnitVec<S>,
    rng: &mut ChaCha8Rng,
    tol: &S,
    checks: &mut Checks,
) -> Value {
    let (lambda, eta, bound) = match (mather_lambda(y), mather_eta(y), mather_support_bound(y)) {
        (Ok(l), Ok(e), b) => (l, e, b),
        (Err(e), _, _) | (_, Err(e), _) => {
            checks.fail(format!("{prefix}mather.defined"), json!(e.to_string()));
            return Value::Null;
        }
    };
    let inv = mather_invariants(y, tol).expect("transform is defined");
    checks.record(format!("{prefix}mather.simplex"), inv.simplex, || simplex_json(&eta));
    checks.record(format!("{prefix}mather.carrier_containment"), inv.containment, || {
        simplex_json(&eta)
    });
    checks.record(format!("{prefix}mather.survivors"), inv.survivors, || sparse_json(&lambda));
    checks.record(format!("{prefix}mather.cardinality"), inv.cardinality, || {
        json!(lambda.len())
    });
    let mut out = json!({
        "lambda": sparse_json(&lambda),
        "eta": simplex_json(&eta),
    });
    match bound {
        Ok(sb) => {
            out["support_bound"] = json!({ "bound": sb.bound, "radius": scalar_json(&sb.radius) });
            if y.has_tail() {
                checks.skip(format!("{prefix}mather.stability"), "tail vectors are not sampled");
            } else {
                let base = UnitSimplexPoint::normalize(y.explicit()).expect("nonempty");
                let mut t = Tally::new(format!("{prefix}mather.stability"));
                for _ in 0..20 {
                    let y2 = perturb(rng, &base, &sb.radius);
                    let l2 = mather_lambda(&y2.clone().into()).expect("no tail");
                    t.observe(l2.carrier().is_subset(&sb.bound), || simplex_json(&y2));
                }
                checks.tally(t);
            }
        }
        Err(e) => {
            checks.skip(format!("{prefix}mather.stability"), &e.to_string());
        }
    }
    out
}

/// Kuratowski axioms, open/closed duality and product projections.
pub fn space_checks(prefix: &str, x: &FiniteSpace, checks: &mut Checks) {
    if x.len() > 8 {
        checks.skip(format!("{prefix}space.kuratowski"), "more than 8 points");
        checks.skip(format!("{prefix}space.open_closed_duality"), "more than 8 points");
    } else {
        let subsets: Vec<PointSet> = all_subsets(x.len()).collect();
        let cl = |s: &PointSet| x.closure(s).expect("subset of the space");
        let mut t = Tally::new(format!("{prefix}space.kuratowski"));
        t.observe(cl(&PointSet::new()).is_empty(), || json!("cl(∅) ≠ ∅"));
        for a in &subsets {
            let ca = cl(a);
            t.observe(a.is_subset(&ca) && cl(&ca) == ca, || json!(x.names_of(a)));
            for b in &subsets {
                let union: PointSet = a | b;
                let cb = cl(b);
                t.observe(cl(&union) == &ca | &cb, || json!([x.names_of(a), x.names_of(b)]));
                if a.is_subset(b) {
                    t.observe(ca.is_subset(&cb), || json!([x.names_of(a), x.names_of(b)]));
                }
            }
        }
        checks.tally(t);
        let mut t = Tally::new(format!("{prefix}space.open_closed_duality"));
        for s in &subsets {
            let open = x.is_open(s).expect("subset");
            let co = x.complement(s);
            t.observe(open == (cl(&co) == co), || json!(x.names_of(s)));
        }
        checks.tally(t);
    }
    let p = x.product(x);
    let n = x.len();
    let mut t = Tally::new(format!("{prefix}space.product_projections"));
    for i in 0..p.len() {
        let u = p.min_open(i);
        let first: PointSet = u.iter().map(|j| j / n).collect();
        let second: PointSet = u.iter().map(|j| j % n).collect();
        t.observe(
            &first == x.min_open(i / n) && &second == x.min_open(i % n),
            || json!(p.name(i)),
        );
    }
    checks.tally(t);
}

/// Classification with the diagram invariants; returns the report as JSON.
pub fn map_checks(prefix: &str, m: &SetValuedMap, checks: &mut Checks) -> Value {
    let r = classify(m);
    let report = serde_json::to_value(&r).expect("reports serialize");
    checks.record(format!("{prefix}map.diagram"), r.respects_diagram(), || report.clone());
    checks.record(
        format!("{prefix}map.llc_equals_tlsc"),
        r.lower_locally_constant.holds == r.totally_lsc.holds,
        || report.clone(),
    );
    report
}

/// Flattens a classification report into `{flag: {status, witness}}`.
pub fn flags_json(report: &Value) -> Value {
    let mut out = serde_json::Map::new();
    if let Value::Object(m) = report {
        for (k, v) in m {
            let mut o = json!({ "status": if v["holds"] == true { "pass" } else { "fail" } });
            if let Some(w) = v.get("witness") {
                o["witness"] = w.clone();
            }
            out.insert(k.clone(), o);
        }
    }
    Value::Object(out)
}

/// Agreement of the two closure-cover formulas, and of the graph closure.
pub fn closure_checks(prefix: &str, cover: &IndexedCover, checks: &mut Checks) {
    let a = closure_cover(cover);
    let b = closure_cover_by_intersection(cover);
    checks.record(format!("{prefix}cover.closure_agreement"), a == b, || {
        json!({ "fiberwise": cover_json(&a), "pointwise": cover_json(&b) })
    });
    let g = graph_closure(cover.as_map());
    checks.record(format!("{prefix}cover.graph_closure"), &g == a.as_map(), || {
        cover_json(&a)
    });
}

/// Simplex-valued mapping consistency and fiber openness for random points.
pub fn fiber_checks<R: Rng>(
    prefix: &str,
    cover: &IndexedCover,
    rng: &mut R,
    samples: usize,
    checks: &mut Checks,
) {
    let indices: Vec<IndexId> = cover.indices().into_iter().collect();
    let phi = SimplexValuedMap::new(cover);
    let open_cover = cover.is_open_cover();
    let mut membership = Tally::new(format!("{prefix}thm51.membership"));
    let mut opens = Tally::new(format!("{prefix}thm51.fiber_open"));
    let mut conv = Tally::new(format!("{prefix}conv.fiber_open"));
    for _ in 0..samples {
        let p: UnitSimplexPoint<crate::Rational> = random_simplex_point(rng, &indices, 3);
        let fiber = phi.fiber(&p).expect("nonempty carrier over known indices");
        for x in 0..cover.domain().len() {
            let m = phi.membership(&p, x).expect("known indices");
            membership.observe(m == fiber.contains(&x), || {
                json!({ "p": simplex_json(&p), "x": cover.domain().name(x) })
            });
        }
        if open_cover {
            let r = phi.fiber_report(&p).expect("valid carrier");
            opens.observe(r.open, || json!({ "p": simplex_json(&p), "witness": r.witness }));
            let c = conv_fiber_open(cover, &p);
            conv.observe(c.open, || json!({ "p": simplex_json(&p), "witness": c.witness }));
        }
    }
    checks.tally(membership);
    if open_cover {
        checks.tally(opens);
        checks.tally(conv);
    } else {
        checks.skip(opens.name, "cover has a member that is not open");
        checks.skip(conv.name, "cover has a member that is not open");
    }
}

/// Downward closure and witness monotonicity of the nerve.
pub fn nerve_checks(
    prefix: &str,
    cover: &IndexedCover,
    witnesses: Option<&PointSet>,
    max_dim: usize,
    checks: &mut Checks,
) -> Value {
    let full = nerve_from_cover(cover, witnesses, max_dim);
    checks.record(
        format!("{prefix}nerve.downward_closed"),
        full.downward_closure_violation().is_none(),
        || json!(full.downward_closure_violation()),
    );
    let all = cover.domain().all_points();
    let w = witnesses.unwrap_or(&all);
    let half: PointSet = w.iter().copied().take(w.len() / 2).collect();
    let sub = nerve_from_cover(cover, Some(&half), max_dim);
    checks.record(
        format!("{prefix}nerve.witness_monotone"),
        sub.simplices().is_subset(full.simplices()),
        || complex_json(&sub),
    );
    complex_json(&full)
}

/// Invariants of the Mather composition of a partition of unity.
pub fn compose_checks<S: Scalar>(
    prefix: &str,
    pou: &PartitionOfUnity<S>,
    checks: &mut Checks,
) -> Result<Value, Error> {
    let (gamma, cert) = mather_compose(pou)?;
    let two = S::from_ratio(2, 1);
    let mut containment = Tally::new(format!("{prefix}compose.carrier_containment"));
    let mut survivors = Tally::new(format!("{prefix}compose.survivor_mass"));
    let mut cardinality = Tally::new(format!("{prefix}compose.cardinality"));
    for x in 0..pou.ground().len() {
        let xi = pou.row(x);
        let sup = xi.as_vec().sup_norm();
        let cg = gamma.carrier_at(x);
        let name = pou.ground().name(x);
        containment.observe(cg.is_subset(&xi.carrier()), || json!(name));
        survivors.observe(
            cg.iter().all(|k| two.clone() * xi.get(k.as_str()) > sup),
            || json!(name),
        );
        cardinality.observe(S::from_ratio(cg.len() as i64, 1) * sup.clone() <= two, || json!(name));
    }
    checks.tally(containment);
    checks.tally(survivors);
    checks.tally(cardinality);
    let violations = cert.verify(&gamma);
    checks.record(format!("{prefix}compose.certificate"), violations.is_empty(), || {
        serde_json::to_value(&violations).expect("serializable")
    });
    match cert.strong_containment {
        Some(ok) => checks.record(format!("{prefix}compose.strong_containment"), ok, || Value::Null),
        None => checks.skip(
            format!("{prefix}compose.strong_containment"),
            "closures on metric samples are approximate",
        ),
    }
    Ok(json!({
        "composed": pou_json(&gamma),
        "certificate": certificate_json(&cert, gamma.ground()),
    }))
}

/// Subordination and canonical-map checks of a partition against a cover.
pub fn pou_cover_checks<S: Scalar>(
    prefix: &str,
    pou: &PartitionOfUnity<S>,
    cover: &IndexedCover,
    tol: &S,
    checks: &mut Checks,
) -> Result<Value, Error> {
    let sub = subordination_check(pou, cover, tol)?;
    let canon = canonical_map_check(pou, cover)?;
    checks.record(
        format!("{prefix}nerve.canonical_implies_subordinated"),
        !canon.canonical || sub.index_subordinated,
        || serde_json::to_value(&sub).expect("serializable"),
    );
    Ok(json!({
        "subordination": sub,
        "canonical": canon,
    }))
}

/// Bump partition of unity over a ball cover with all its invariants.
pub fn ball_checks<S: Scalar>(
    prefix: &str,
    space: &MetricSampleSpace<S>,
    balls: &BTreeMap<IndexId, Ball<S>>,
    cover: &IndexedCover,
    tol: &S,
    checks: &mut Checks,
) -> Result<Value, Error> {
    let pou = pou_from_metric_cover(space, balls)?;
    let pc = pou_cover_checks(prefix, &pou, cover, tol, checks)?;
    checks.record(
        format!("{prefix}pou.index_subordinated"),
        pc["subordination"]["index_subordinated"] == true,
        || pc["subordination"].clone(),
    );
    checks.record(
        format!("{prefix}nerve.canonical"),
        pc["canonical"]["canonical"] == true,
        || pc["canonical"].clone(),
    );
    let composed = compose_checks(prefix, &pou, checks)?;
    Ok(json!({ "pou": pou_json(&pou), "checks": pc, "mather": composed }))
}

/// ε-selection with its certificate, plus the refinement check at `ε/2`.
pub fn selection_checks<S: Scalar>(
    prefix: &str,
    target: &ConvexTarget<S>,
    epsilon: &S,
    anchors: &BTreeMap<IndexId, Vec<S>>,
    checks: &mut Checks,
) -> Result<Value, Error> {
    let sel = epsilon_selection(target, epsilon, anchors)?;
    let cert = &sel.certificate;
    let failing: Vec<&str> = cert
        .records
        .iter()
        .filter(|r| !r.holds)
        .map(|r| r.point.as_str())
        .collect();
    checks.record(format!("{prefix}select.epsilon_bound"), failing.is_empty(), || json!(failing));
    checks.record(
        format!("{prefix}select.containment"),
        cert.records.iter().all(|r| r.contained),
        || selection_json(cert),
    );
    let violations = sel.local_finiteness.verify(&sel.composed);
    checks.record(format!("{prefix}select.local_finiteness"), violations.is_empty(), || {
        serde_json::to_value(&violations).expect("serializable")
    });
    let half = epsilon.clone() / S::from_ratio(2, 1);
    match epsilon_selection(target, &half, anchors) {
        Ok(fine) => {
            let ok = fine.certificate.holds();
            checks.record(format!("{prefix}select.refinement"), ok, || selection_json(&fine.certificate));
        }
        Err(crate::error::SelectionError::CoverGap { point }) => checks.skip(
            format!("{prefix}select.refinement"),
            &format!("anchors do not cover {point} at half epsilon"),
        ),
        Err(e) => return Err(e.into()),
    }
    Ok(json!({
        "epsilon": scalar_json(epsilon),
        "cover": cover_json(&sel.cover),
        "records": selection_json(cert),
    }))
}

/// Seeded random instances exercising every invariant family.
pub fn random_checks<S: Scalar>(doc: &RandomDoc, rng: &mut ChaCha8Rng, max_dim: usize, tol: &S, checks: &mut Checks) {
    let trials = doc.trials;
    let mut spaces = Checks::new();
    let mut maps = Checks::new();
    let mut covers = Checks::new();
    let mut nerves = Checks::new();
    let mut fibers = Checks::new();
    let mut mather = Tally::new("random/mather.invariants");
    let mut stability = Tally::new("random/mather.stability");
    let mut bumps = Checks::new();
    let mut selections = Checks::new();
    for i in 0..trials {
        let x = random_space(rng, doc.max_points);
        space_checks("", &x, &mut spaces);
        let y = random_space(rng, 4);
        map_checks("", &random_map(rng, &x, &y), &mut maps);
        let k = rng.gen_range(1..=4);
        let c = random_cover(rng, &x, k);
        closure_checks("", &c, &mut covers);
        nerve_checks("", &c, None, max_dim, &mut nerves);
        let oc = random_open_cover(rng, &x, k);
        fiber_checks("", &oc, rng, 10, &mut fibers);

        let ids: Vec<IndexId> = index_names(20).into_iter().map(IndexId::from).collect();
        let p: UnitSimplexPoint<S> = random_simplex_point(rng, &ids, 20);
        let ext: ExtendedUnitVec<S> = p.clone().into();
        let inv = mather_invariants(&ext, tol).expect("no tail");
        mather.observe(inv.all(), || simplex_json(&p));
        let sb = mather_support_bound(&ext).expect("no tail");
        let p2 = perturb(rng, &p, &sb.radius);
        let l2 = mather_lambda(&p2.clone().into()).expect("no tail");
        stability.observe(l2.carrier().is_subset(&sb.bound), || simplex_json(&p2));

        let dim = 1 + i % 2;
        let (m, balls) = random_ball_cover::<S, _>(rng, dim, 12, 5);
        let cover = crate::pou::ball_cover(&m, &balls).expect("generator covers every sample");
        if let Err(e) = ball_checks("", &m, &balls, &cover, tol, &mut bumps) {
            bumps.fail("pou.bump", json!(e.to_string()));
        }
        let (target, eps, anchors) = random_selection_instance::<S, _>(rng);
        if let Err(e) = selection_checks("", &target, &eps, &anchors, &mut selections) {
            selections.fail("select.pipeline", json!(e.to_string()));
        }
    }
    for group in [spaces, maps, covers, nerves, fibers, bumps, selections] {
        summarize(group, checks);
    }
    checks.tally(mather);
    checks.tally(stability);
}

/// Collapses repeated checks of the same name into one tally per name.
fn summarize(group: Checks, checks: &mut Checks) {
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    let mut skipped: BTreeMap<String, usize> = BTreeMap::new();
    for c in group.0 {
        if c.status == crate::report::Status::Skipped {
            *skipped.entry(c.name).or_default() += 1;
            continue;
        }
        let t = tallies
            .entry(c.name.clone())
            .or_insert_with(|| Tally::new(format!("random/{}", c.name)));
        let w = c.witness.clone();
        t.observe(c.status == crate::report::Status::Pass, || w.unwrap_or(Value::Null));
    }
    for (name, n) in skipped {
        if !tallies.contains_key(&name) {
            checks.skip(format!("random/{name}"), &format!("skipped in all {n} trials"));
        }
    }
    for t in tallies.into_values() {
        checks.tally(t);
    }
}

/// Runs the full suite on a bundle. Randomness comes from `seed` only.
pub fn verify_bundle<S: Scalar>(
    bundle: &BundleDoc,
    loader: &Loader<S>,
    seed: u64,
    max_dim: usize,
    checks: &mut Checks,
) -> Result<Value, Error> {
    let mut rng = seeded(seed);
    let tol = loader.tol_sum.clone();
    let mut result = serde_json::Map::new();

    let mut section = serde_json::Map::new();
    for (name, doc) in &bundle.vectors {
        let y = loader.vector(doc)?;
        let r = vector_checks(&format!("vectors/{name}/"), &y, &mut rng, &tol, checks);
        section.insert(name.clone(), r);
    }
    result.insert("vectors".into(), Value::Object(section));

    for (name, doc) in &bundle.spaces {
        let x = loader.space_doc(doc)?;
        space_checks(&format!("spaces/{name}/"), &x, checks);
    }

    let mut section = serde_json::Map::new();
    for (name, doc) in &bundle.maps {
        let m = loader.map(doc)?;
        let prefix = format!("maps/{name}/");
        let report = map_checks(&prefix, &m, checks);
        if m.codomain().is_discrete() {
            closure_checks(&prefix, &IndexedCover::new(m.clone())?, checks);
        }
        section.insert(name.clone(), flags_json(&report));
    }
    result.insert("maps".into(), Value::Object(section));

    let mut section = serde_json::Map::new();
    for (name, doc) in &bundle.covers {
        let lc: LoadedCover<S> = loader.cover(doc)?;
        let prefix = format!("covers/{name}/");
        closure_checks(&prefix, &lc.cover, checks);
        let nerve = nerve_checks(&prefix, &lc.cover, lc.witnesses.as_ref(), max_dim, checks);
        fiber_checks(&prefix, &lc.cover, &mut rng, 20, checks);
        let mut r = json!({ "nerve": nerve });
        if let Some((space, balls)) = &lc.balls {
            r["bump"] = ball_checks(&prefix, space, balls, &lc.cover, &tol, checks)?;
        }
        section.insert(name.clone(), r);
    }
    result.insert("covers".into(), Value::Object(section));

    let mut section = serde_json::Map::new();
    for (name, doc) in &bundle.pous {
        let pou = loader.pou(&doc.pou)?;
        let prefix = format!("pous/{name}/");
        let mut r = json!({ "mather": compose_checks(&prefix, &pou, checks)? });
        if let Some(cd) = &doc.cover {
            let lc: LoadedCover<S> = loader.cover(cd)?;
            r["cover"] = pou_cover_checks(&prefix, &pou, &lc.cover, &tol, checks)?;
        }
        section.insert(name.clone(), r);
    }
    result.insert("pous".into(), Value::Object(section));

    let mut section = serde_json::Map::new();
    for (name, doc) in &bundle.selections {
        let target = loader.target(&doc.target)?;
        let eps: S = match &doc.epsilon {
            Some(v) => crate::scalar::scalar_from_json(v)?,
            None => return Err(Error::schema(format!("selection {name:?} has no epsilon"))),
        };
        let anchors = loader.anchors(&doc.anchors)?;
        let r = selection_checks(&format!("selections/{name}/"), &target, &eps, &anchors, checks)?;
        section.insert(name.clone(), r);
    }
    result.insert("selections".into(), Value::Object(section));

    if let Some(doc) = &bundle.random {
        random_checks(doc, &mut rng, max_dim, &tol, checks);
        result.insert("random".into(), json!({ "trials": doc.trials, "max_points": doc.max_points }));
    }
    Ok(Value::Object(result))
}
