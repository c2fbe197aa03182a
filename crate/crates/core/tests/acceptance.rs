//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use symthompson::campaign::{generate_check, run_axioms, standard_configurations, sym3, z2, AxiomsConfig, AxiomsReport};
use symthompson::element::{labeled_elements_up_to, Entry, DEFAULT_BALL_LIMIT};
use symthompson::homology::reduced_homology;
use symthompson::steinfarley::{
    complete_join_check, descending_link, dlk_report, elementary, interval, vertex_stabilizer_order, PosetVertex,
    DEFAULT_GAP_BOUND, DEFAULT_STABILIZER_LIMIT,
};
use symthompson::trees::all_trees;
use symthompson::{CompleteTree, LocalGroup, SymTreePair};

const SEED: u64 = 20240617;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn property<'a>(r: &'a AxiomsReport, name: &str) -> &'a symthompson::campaign::PropertyResult {
    r.properties.iter().find(|p| p.name == name).expect("property present")
}

fn summarize(reports: &[(AxiomsReport, Duration)], names: &[&str]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, _) in reports {
        let mut samples = 0;
        for n in names {
            let p = property(r, n);
            ok &= p.passed && p.skipped.is_none();
            samples += p.samples;
            if let Some(c) = &p.counterexample {
                parts.push(format!("{} {n} FAILED on {c}", r.group));
            }
        }
        parts.push(format!("{}: {samples} checks", r.group));
    }
    outcome(ok, parts.join("; "))
}

fn comb(n: usize) -> CompleteTree {
    let mut t = CompleteTree::trivial(2).unwrap();
    while t.leaf_count() < n {
        let last = t.leaves()[t.leaf_count() - 1].clone();
        t = t.expand_leaf(&last).unwrap();
    }
    t
}

fn boolean_intervals() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for g in [LocalGroup::trivial(2).unwrap(), z2(2).unwrap()] {
        let frames = labeled_elements_up_to(&g, 1).unwrap();
        for t in all_trees(2, 2).unwrap() {
            let n = t.leaf_count();
            for mask in 0u32..(1 << n) {
                let m = mask.count_ones() as usize;
                if m > 3 {
                    continue;
                }
                let mut top = t.clone();
                for (i, l) in t.leaves().iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        top = top.expand_leaf(l).unwrap();
                    }
                }
                // the top vertex in its own frame and in a frame twisted by a
                // stabilizer element (rotate the leaves, label the first one)
                let k = top.leaf_count();
                let rows = (0..k)
                    .map(|i| Entry {
                        source: top.leaves()[i].clone(),
                        target: top.leaves()[(i + 1) % k].clone(),
                        label: if i == 0 { (g.order() - 1) as u32 } else { 0 },
                    })
                    .collect::<Vec<_>>();
                let twist = SymTreePair::new(
                    &g,
                    rows.into_iter().map(|e| (e.source, e.target, g.element(e.label))),
                )
                .unwrap();
                for f in &frames {
                    for s in [SymTreePair::identity(&g), twist.clone()] {
                        let x = PosetVertex::new(t.clone(), f).unwrap();
                        let y = PosetVertex::new(top.clone(), &f.compose(&s).unwrap()).unwrap();
                        checked += 1;
                        let ok = elementary(&x, &y).unwrap()
                            && interval(&x, &y, DEFAULT_GAP_BOUND)
                                .map(|i| i.vertices.len() == 1 << m && i.is_boolean())
                                .unwrap_or(false);
                        if !ok && failures.len() < 3 {
                            failures.push(format!("{x:?} to {y:?}"));
                        }
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} elementary intervals, {} failures {failures:?}", failures.len()),
    )
}

fn stabilizers() -> Outcome {
    let mut groups: Vec<Arc<LocalGroup>> = vec![LocalGroup::trivial(2).unwrap(), z2(2).unwrap(), sym3(2).unwrap()];
    groups.push(sym3(3).unwrap());
    let mut ok = true;
    let mut counts = Vec::new();
    for g in groups {
        let d = g.arity();
        for t in all_trees(d, 3).unwrap() {
            if t.leaf_count() > 4 {
                continue;
            }
            let r = vertex_stabilizer_order(&PosetVertex::base(t, &g).unwrap(), DEFAULT_STABILIZER_LIMIT).unwrap();
            ok &= r.passed();
            counts.push(format!("d{d} |H|={} n={}: {}", r.h_order, r.leaves, r.count));
        }
    }
    counts.dedup();
    outcome(ok, counts.join(", "))
}

fn complete_joins() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for g in [LocalGroup::trivial(2).unwrap(), z2(2).unwrap()] {
        for n in 2..=7 {
            let v = PosetVertex::base(comb(n), &g).unwrap();
            let link = descending_link(&v, 9).unwrap();
            let verdict = link.complete_join();
            ok &= verdict.holds && link.cubes_verified;
            parts.push(format!(
                "|H|={} n={n}: {} vertices {}",
                g.order(),
                link.complex.vertex_count(),
                if verdict.holds { "join" } else { "NOT a join" }
            ));
            // the check must be able to fail: drop one top simplex
            if n == 5 {
                let top = link.complex.maximal_simplices()[0].clone();
                let broken = link.complex.without_simplex(&top);
                let control = complete_join_check(&broken, &link.pi_map(), &link.target);
                ok &= !control.holds;
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    outcome(ok, format!("{}; negative controls rejected; {:.1}s", parts.join(", "), elapsed.as_secs_f64()))
}

fn link_homology() -> Outcome {
    let g = LocalGroup::trivial(2).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 4..=9 {
        let r = dlk_report(&comb(n), &g, 9).unwrap();
        ok &= r.euler_check && r.rational_ranks_agree;
        if n == 4 {
            ok &= r.target_betti.first() == Some(&2);
        } else {
            ok &= r.betti.first() == Some(&0) && r.target_betti.first() == Some(&0);
        }
        parts.push(format!("n={n}: link betti {:?}, target betti {:?}", r.betti, r.target_betti));
    }
    // Euler and rank-path cross-checks also on the Z/2 links
    let z = z2(2).unwrap();
    for n in 2..=6 {
        let link = descending_link(&PosetVertex::base(comb(n), &z).unwrap(), 9).unwrap();
        let h = reduced_homology(&link.complex).unwrap();
        ok &= h.euler_check && h.boundary_ranks == h.rational_ranks;
    }
    outcome(ok, parts.join("; "))
}

fn without_time<T: Serialize>(r: &T) -> String {
    let mut v = serde_json::to_value(r).unwrap();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_time_ms");
    }
    serde_json::to_string(&v).unwrap()
}

fn determinism() -> Outcome {
    let cfg = AxiomsConfig {
        triples: 200,
        ..AxiomsConfig::default()
    };
    let g = sym3(3).unwrap();
    let a = without_time(&run_axioms(&g, "d3-sym3", &cfg, SEED).unwrap());
    let b = without_time(&run_axioms(&g, "d3-sym3", &cfg, SEED).unwrap());
    let t = LocalGroup::trivial(2).unwrap();
    let c = without_time(&dlk_report(&comb(6), &t, 9).unwrap());
    let d = without_time(&dlk_report(&comb(6), &t, 9).unwrap());
    let z = z2(2).unwrap();
    let e = without_time(&generate_check(&z, 1, 4, DEFAULT_BALL_LIMIT).unwrap());
    let f = without_time(&generate_check(&z, 1, 4, DEFAULT_BALL_LIMIT).unwrap());
    outcome(a == b && c == d && e == f, "axioms, dlk and generate-check reports compared byte for byte")
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    let mut reports = Vec::new();
    for (name, g) in standard_configurations().unwrap() {
        let start = Instant::now();
        let r = run_axioms(&g, &name, &AxiomsConfig::default(), SEED).unwrap();
        reports.push((r, start.elapsed()));
    }
    let mut c1 = summarize(&reports, &["associativity", "inverse", "identity"]);
    let slowest = reports.iter().map(|(_, t)| *t).max().unwrap();
    c1.ok &= slowest < Duration::from_secs(60);
    c1.detail = format!("{}; slowest configuration {:.1}s", c1.detail, slowest.as_secs_f64());
    results.push((1, "group axioms", c1));
    results.push((2, "reduction confluence", summarize(&reports, &["reduction_confluence"])));
    results.push((3, "action homomorphism", summarize(&reports, &["action_homomorphism", "period_preserved"])));
    results.push((4, "pi surjective homomorphism", summarize(&reports, &["pi_homomorphism", "pi_section_round_trip"])));
    results.push((
        5,
        "retraction laws",
        summarize(&reports, &["retract_iota_identity", "retraction_law_iota", "retraction_law_unlabeled"]),
    ));

    let start = Instant::now();
    let gen = generate_check(&z2(2).unwrap(), 1, 4, DEFAULT_BALL_LIMIT).unwrap();
    let elapsed = start.elapsed();
    let worst = gen.targets.iter().filter_map(|t| t.radius).max().unwrap_or(0);
    results.push((
        6,
        "generation",
        outcome(
            gen.all_reached && worst <= 4 && gen.targets.len() == 8 && elapsed < Duration::from_secs(120),
            format!(
                "{} targets, all reached: {}, worst radius {worst}, ball size {}, {:.1}s",
                gen.targets.len(),
                gen.all_reached,
                gen.ball_size,
                elapsed.as_secs_f64()
            ),
        ),
    ));

    results.push((7, "boolean intervals", boolean_intervals()));
    results.push((8, "stabilizer counts", stabilizers()));
    results.push((9, "complete join", complete_joins()));
    results.push((10, "link homology", link_homology()));
    results.push((11, "determinism", determinism()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n:>2} {:<28} {}  {}", name, if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", results.len());
}
