//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use obroute::bits::ceil_log2;
use obroute::decomposition::{build_tree, certify_congestion, DecompositionTree};
use obroute::experiment::{
    demand_battery, run_experiment, Config, DemandKind, GraphSource, Scheme,
};
use obroute::flow::{round_paths, Direction};
use obroute::graph::{generate_graph, parse_graph, CapacitatedGraph, DemandMatrix, GraphKind};
use obroute::impl_a::{
    assign_labels, build_flow_tables, exact_endpoint_law, label_field_width, measure_table_bits_a,
    route_to_border, RoutingHeader,
};
use obroute::impl_b::{
    audit_embedding, audit_rerand, build_hypercube_scheme, measure_table_bits_b,
};
use obroute::oracle::{brute_force_congestion, optimal_congestion};
use obroute::routing::{route_demands, ReferenceBackend};

struct Outcome {
    passed: bool,
    detail: String,
}

fn grid(r: usize) -> CapacitatedGraph {
    generate_graph(
        &GraphKind::Grid {
            rows: r,
            cols: r,
            cap_range: None,
        },
        0,
    )
    .unwrap()
}

/// Random connected graph: a random spanning tree plus extra edges, with
/// capacities in 1..=4.
fn random_graph(rng: &mut ChaCha8Rng) -> CapacitatedGraph {
    let n = rng.gen_range(1..=64);
    let mut edges = BTreeMap::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v), rng.gen_range(1..=4));
    }
    if n > 2 {
        for _ in 0..rng.gen_range(0..=n) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                edges
                    .entry((a.min(b), a.max(b)))
                    .or_insert(rng.gen_range(1..=4));
            }
        }
    }
    CapacitatedGraph::new(n, edges.into_iter().map(|((u, v), c)| (u, v, c))).unwrap()
}

/// Capacity at `v` leaving the vertex set `inside`.
fn leaving(g: &CapacitatedGraph, v: usize, inside: &[bool]) -> u64 {
    g.neighbors(v)
        .iter()
        .filter(|&&(u, _)| !inside[u])
        .map(|&(_, e)| g.edge(e).cap)
        .sum()
}

/// Weight tables recomputed from the definition and compared with the tree,
/// plus the three identities. Returns the violations.
fn weight_violations(g: &CapacitatedGraph, t: &DecompositionTree) -> Vec<String> {
    let n = g.vertex_count();
    let members = |id: usize| {
        let mut inside = vec![false; n];
        for &v in &t.cluster(id).vertices {
            inside[v] = true;
        }
        inside
    };
    let mut bad = Vec::new();
    for c in &t.clusters {
        let inside = members(c.id);
        let child_of: BTreeMap<usize, usize> = c
            .children
            .iter()
            .flat_map(|&ch| t.cluster(ch).vertices.iter().map(move |&v| (v, ch)))
            .collect();
        let child_sets: BTreeMap<usize, Vec<bool>> =
            c.children.iter().map(|&ch| (ch, members(ch))).collect();
        for (p, &v) in c.vertices.iter().enumerate() {
            let out = if c.parent.is_none() {
                0
            } else {
                leaving(g, v, &inside)
            };
            let w = match child_of.get(&v) {
                Some(ch) => leaving(g, v, &child_sets[ch]),
                None => out,
            };
            if c.border_weight[p] != out || c.cluster_weight[p] != w {
                bad.push(format!(
                    "cluster {} vertex {v}: stored ({}, {}) vs ({out}, {w})",
                    c.id, c.border_weight[p], c.cluster_weight[p]
                ));
            }
            if let Some(&ch) = child_of.get(&v) {
                if c.w(v) != t.cluster(ch).out(v) {
                    bad.push(format!("cluster {} vertex {v}: w_S != out of child", c.id));
                }
            }
            if c.out(v) > c.w(v) {
                bad.push(format!("cluster {} vertex {v}: out > w", c.id));
            }
        }
        if !c.children.is_empty() {
            let sum: u64 = c
                .children
                .iter()
                .map(|&ch| t.cluster(ch).total_border())
                .sum();
            if sum != c.total_weight() {
                bad.push(format!(
                    "cluster {}: children border {sum} != w(S) {}",
                    c.id,
                    c.total_weight()
                ));
            }
        }
    }
    bad
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = Vec::new();
    let mut clusters = 0;
    for k in 0..100 {
        let g = random_graph(&mut rng);
        let t = build_tree(&g, 2 + k % 3, k as u64);
        clusters += t.clusters.len();
        violations.extend(weight_violations(&g, &t));
    }
    Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "100 random graphs, {clusters} clusters, {} violations {:?}",
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut problems = Vec::new();
    let mut flows = 0;
    let mut worst_exact: f64 = 0.0;
    let mut worst_tv: f64 = 0.0;
    let mut sampled = 0;
    for r in [4, 8] {
        let g = grid(r);
        let t = build_tree(&g, 2, 1);
        let cert = certify_congestion(&g, &t).unwrap();
        let tables = build_flow_tables(&g, &t, cert.integral()).unwrap();
        for cl in t.clusters.iter().filter(|c| !c.is_singleton()) {
            let ct = tables.cluster(cl.id).unwrap();
            let w_total = cl.total_weight();
            let w_law: Vec<f64> = cl
                .cluster_weight
                .iter()
                .map(|&w| w as f64 / w_total as f64)
                .collect();
            for f in &ct.flows {
                flows += 1;
                let border: Vec<u64> = if f.index == 0 {
                    cl.border_weight.clone()
                } else {
                    let ch = t.cluster(cl.children[f.index - 1]);
                    cl.vertices.iter().map(|&v| ch.out(v)).collect()
                };
                let o: u64 = border.iter().sum();
                if f.value != w_total * o || !f.flow.is_conserving() || !f.flow.is_acyclic() {
                    problems.push(format!(
                        "{r}x{r} cluster {} f_{}: value {}",
                        cl.id, f.index, f.value
                    ));
                }
                for p in 0..cl.len() {
                    if f.source_amount(p) != cl.cluster_weight[p] * o
                        || f.sink_amount(p) != border[p] * w_total
                    {
                        problems.push(format!(
                            "{r}x{r} cluster {} f_{}: terminal arc {p} not saturated",
                            cl.id, f.index
                        ));
                    }
                }
                if o == 0 {
                    continue;
                }
                let out_law: Vec<f64> = border.iter().map(|&b| b as f64 / o as f64).collect();
                let fwd = exact_endpoint_law(&tables, cl.id, f.index, &w_law, Direction::Forward)
                    .unwrap();
                let bwd =
                    exact_endpoint_law(&tables, cl.id, f.index, &out_law, Direction::Backward)
                        .unwrap();
                for p in 0..cl.len() {
                    worst_exact = worst_exact
                        .max((fwd[p] - out_law[p]).abs())
                        .max((bwd[p] - w_law[p]).abs());
                }
                if cl.id == t.root && f.index > 0 {
                    // Monte-Carlo: start ~ w_S, walk to the border
                    let pick = WeightedIndex::new(&cl.cluster_weight).unwrap();
                    let mut rng = ChaCha8Rng::seed_from_u64(100 + f.index as u64);
                    let n = 100_000;
                    let mut hits = vec![0u64; cl.len()];
                    for _ in 0..n {
                        let v = cl.vertices[pick.sample(&mut rng)];
                        let end = route_to_border(&tables, cl.id, f.index, v, &mut rng)
                            .unwrap()
                            .end();
                        hits[cl.position(end).unwrap()] += 1;
                    }
                    let tv: f64 = hits
                        .iter()
                        .zip(&out_law)
                        .map(|(&h, &q)| (h as f64 / n as f64 - q).abs())
                        .sum::<f64>()
                        / 2.0;
                    worst_tv = worst_tv.max(tv);
                    sampled += 1;
                }
            }
        }
    }
    Outcome {
        passed: problems.is_empty() && worst_exact <= 1e-9 && worst_tv < 0.02,
        detail: format!(
            "{flows} flows on 4x4 and 8x8, {} saturation problems, max exact-law deviation {worst_exact:.2e}, worst TV {worst_tv:.4} over {sampled} sampled laws",
            problems.len()
        ),
    }
}

fn criterion_3() -> Outcome {
    let mut graphs: Vec<(String, CapacitatedGraph)> = [3, 4, 6, 8]
        .iter()
        .map(|&r| (format!("grid {r}x{r}"), grid(r)))
        .collect();
    for (k, n) in [8, 16, 24, 32, 48, 64].into_iter().enumerate() {
        let g = generate_graph(&GraphKind::RandomRegular { n, degree: 3 }, k as u64).unwrap();
        graphs.push((format!("3-regular n={n}"), g));
    }
    let mut violations = Vec::new();
    let mut cubes = 0;
    for (name, g) in &graphs {
        let t = build_tree(g, 2, 3);
        let cert = certify_congestion(g, &t).unwrap();
        let s = build_hypercube_scheme(g, &t, cert.integral(), 5).unwrap();
        for c in &t.clusters {
            if let Some(cc) = s.cluster(c.id) {
                cubes += 2;
                for v in audit_embedding(&t, c.id, &cc.embedding)
                    .into_iter()
                    .chain(audit_rerand(&t, c.id, &cc.rerand))
                {
                    violations.push(format!("{name}: {v}"));
                }
            }
        }
    }
    Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "{} graphs, {cubes} cubes, {} violations {:?}",
            graphs.len(),
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    }
}

fn criterion_4() -> Outcome {
    let seeds = 50;
    let mean_trials = 2000;
    let mut embeddings = 0;
    let mut max_load_fail = Vec::new();
    let mut mean_fail = Vec::new();
    let mut edges_checked = 0;
    for r in [4, 8] {
        let g = grid(r);
        let t = build_tree(&g, 2, 1);
        let cert = certify_congestion(&g, &t).unwrap();
        let s = build_hypercube_scheme(&g, &t, cert.integral(), 1).unwrap();
        for (id, cc) in s.clusters.iter().enumerate() {
            let Some(cc) = cc else { continue };
            for (kind, cube) in [("embedding", &cc.embedding.cube), ("rerand", &cc.rerand)] {
                if cube.commodities.is_empty() {
                    continue;
                }
                embeddings += 1;
                let m = cube.rounding.local_edges as f64;
                let mut within = 0;
                let mut mu = 0.0;
                for seed in 0..seeds {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let rp = round_paths(&cube.commodities, g.edge_count(), &mut rng).unwrap();
                    mu = rp.mu;
                    if rp.max_load as f64 <= rp.mu + 3.0 * m.ln() {
                        within += 1;
                    }
                }
                if 2 * within < seeds {
                    max_load_fail.push(format!(
                        "{r}x{r} cluster {id} {kind}: {within}/{seeds} (mu {mu:.2})"
                    ));
                }
                // exact per-edge mean and variance of the rounded load
                let mut mean = vec![0.0; g.edge_count()];
                let mut var = vec![0.0; g.edge_count()];
                for c in &cube.commodities {
                    let mut first = BTreeMap::new();
                    let mut second = BTreeMap::new();
                    for (p, &w) in c.flow.paths.iter().zip(&c.flow.weights) {
                        let mut count = BTreeMap::new();
                        for &e in &p.edges {
                            *count.entry(e).or_insert(0.0) += 1.0;
                        }
                        for (e, k) in count {
                            *first.entry(e).or_insert(0.0) += w * k;
                            *second.entry(e).or_insert(0.0) += w * k * k;
                        }
                    }
                    for (e, m1) in first {
                        mean[e] += m1;
                        var[e] += second[&e] - m1 * m1;
                    }
                }
                let mut total = vec![0u64; g.edge_count()];
                let mut rng = ChaCha8Rng::seed_from_u64(7_000 + id as u64);
                for _ in 0..mean_trials {
                    let rp = round_paths(&cube.commodities, g.edge_count(), &mut rng).unwrap();
                    for (e, &l) in rp.load.iter().enumerate() {
                        total[e] += l as u64;
                    }
                }
                for e in 0..g.edge_count() {
                    if mean[e] == 0.0 {
                        continue;
                    }
                    edges_checked += 1;
                    let emp = total[e] as f64 / mean_trials as f64;
                    let se = (var[e].max(0.0) / mean_trials as f64).sqrt();
                    if (emp - mean[e]).abs() > 3.0 * se + 1e-9 {
                        mean_fail.push(format!(
                            "{r}x{r} cluster {id} {kind} edge {e}: {emp:.3} vs {:.3} (se {se:.3})",
                            mean[e]
                        ));
                    }
                }
            }
        }
    }
    Outcome {
        passed: max_load_fail.is_empty() && mean_fail.is_empty(),
        detail: format!(
            "{embeddings} embeddings; max-load rule failed on {} {:?}; {} of {edges_checked} edge means outside 3 SE {:?}",
            max_load_fail.len(),
            max_load_fail.iter().take(3).collect::<Vec<_>>(),
            mean_fail.len(),
            mean_fail.iter().take(3).collect::<Vec<_>>()
        ),
    }
}

fn criterion_5() -> Outcome {
    let samples = 200;
    let mut runs = 0;
    let mut violations = Vec::new();
    let mut worst = [0.0f64; 3];
    for r in [4, 8] {
        let g = grid(r);
        let t = build_tree(&g, 2, 1);
        let cert = certify_congestion(&g, &t).unwrap();
        let h = t.height as f64;
        let reference = ReferenceBackend::new(&g, &t, &cert);
        let tables = build_flow_tables(&g, &t, cert.integral()).unwrap();
        for seed in 0..5u64 {
            let cubes = build_hypercube_scheme(&g, &t, cert.integral(), seed).unwrap();
            let d = cubes.max_dimension() as f64;
            for kind in [DemandKind::Permutation, DemandKind::Gravity] {
                let demands = demand_battery(&kind, &g, seed).unwrap();
                let c_opt = optimal_congestion(&g, &demands).unwrap();
                let bounds = [
                    2.0 * h * cert.c * c_opt,
                    2.0 * h * t.degree as f64 * cert.c * c_opt,
                    16.0 * h * d * d * cert.c * c_opt,
                ];
                let reports = [
                    route_demands(&g, &t, &reference, &demands, samples, seed).unwrap(),
                    route_demands(&g, &t, &tables, &demands, samples, seed).unwrap(),
                    route_demands(&g, &t, &cubes, &demands, samples, seed).unwrap(),
                ];
                for (k, (rep, bound)) in reports.iter().zip(bounds).enumerate() {
                    runs += 1;
                    let load = rep
                        .edges
                        .iter()
                        .map(|e| e.load / e.cap as f64)
                        .fold(0.0, f64::max);
                    worst[k] = worst[k].max(load / bound);
                    if load > bound {
                        violations.push(format!(
                            "{r}x{r} {kind:?} seed {seed} {}: {load:.3} > {bound:.3}",
                            rep.scheme
                        ));
                    }
                }
            }
        }
    }
    Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "{runs} runs, {} violations; worst load/bound: reference {:.4}, impl-a {:.4}, impl-b {:.4}",
            violations.len(),
            worst[0],
            worst[1],
            worst[2]
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut bits_a = Vec::new();
    let mut bits_b = Vec::new();
    let mut label_ok = true;
    let mut header_ok = true;
    let mut lengths = Vec::new();
    for r in [4, 8, 16] {
        let g = grid(r);
        let t = build_tree(&g, 2, 1);
        let cert = certify_congestion(&g, &t).unwrap();
        let tables = build_flow_tables(&g, &t, cert.integral()).unwrap();
        bits_a.push(measure_table_bits_a(&g, &tables).max);
        let cubes = build_hypercube_scheme(&g, &t, cert.integral(), 1).unwrap();
        bits_b.push(measure_table_bits_b(&g, &t, &cubes).max);
        let limit = t.height * ceil_log2(t.degree.max(2) as u64) as usize;
        let labels = assign_labels(&t);
        let field = label_field_width(&t);
        let label = labels.iter().map(|l| l.bit_len(field)).max().unwrap();
        let header = (0..g.vertex_count())
            .flat_map(|s| (0..g.vertex_count()).map(move |d| (s, d)))
            .filter(|(s, d)| s != d)
            .map(|(s, d)| RoutingHeader::new(&labels, &t, s, d).encode(&t).bit_len())
            .max()
            .unwrap();
        label_ok &= label <= limit;
        header_ok &= header <= limit;
        lengths.push(format!(
            "{r}x{r}: h={} limit {limit}, label {label}, header {header}",
            t.height
        ));
    }
    let growth =
        |b: &[usize]| -> Vec<f64> { b.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect() };
    let (ga, gb) = (growth(&bits_a), growth(&bits_b));
    let trend_a = ga.iter().all(|&x| x <= 4.0);
    let trend_b = gb.iter().all(|&x| x <= 4.0);
    Outcome {
        passed: trend_a && trend_b && label_ok && header_ok,
        detail: format!(
            "impl-a bits {bits_a:?} growth {ga:.2?} ({}); impl-b bits {bits_b:?} growth {gb:.2?} ({}); labels {}; headers {}; {}",
            ok(trend_a),
            ok(trend_b),
            ok(label_ok),
            ok(header_ok),
            lengths.join("; ")
        ),
    }
}

fn criterion_7() -> Outcome {
    let single = |s, t, d| {
        let mut m = DemandMatrix::new();
        m.set(s, t, d).unwrap();
        m
    };
    let cycle = parse_graph("4 4\n0 1 1\n1 2 1\n2 3 1\n3 0 1").unwrap();
    let cases = [
        (
            "single edge",
            parse_graph("2 1\n0 1 1").unwrap(),
            single(0, 1, 3.0),
        ),
        (
            "triangle",
            parse_graph("3 3\n0 1 1\n1 2 1\n2 0 1").unwrap(),
            single(0, 1, 1.0),
        ),
        ("4-cycle adjacent", cycle.clone(), single(0, 1, 1.0)),
        ("4-cycle opposite", cycle, single(0, 2, 1.0)),
    ];
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for (name, g, d) in &cases {
        let lp = optimal_congestion(g, d).unwrap();
        let bf = brute_force_congestion(g, d).unwrap();
        worst = worst.max((lp - bf).abs());
        values.push(format!("{name} {lp:.6}/{bf:.6}"));
    }
    Outcome {
        passed: worst <= 1e-3,
        detail: format!("LP/brute force: {}; max gap {worst:.2e}", values.join(", ")),
    }
}

fn criterion_8() -> Outcome {
    let mut cfg = Config::new(GraphSource::Generate("grid:4x4".into()));
    cfg.schemes = vec![Scheme::Reference, Scheme::ImplA, Scheme::ImplB];
    cfg.samples = 100;
    cfg.seed = 42;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_experiment(&cfg).unwrap().write(d.path()).unwrap();
    }
    let mut same = true;
    for file in ["report.json", "loads.csv", "tables.csv"] {
        let read = |d: &tempfile::TempDir| -> String {
            std::fs::read_to_string(d.path().join(file))
                .unwrap()
                .lines()
                .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
                .collect::<Vec<_>>()
                .join("\n")
        };
        same &= read(&dirs[0]) == read(&dirs[1]);
    }
    Outcome { passed: same, detail: "two runs of grid 4x4, all schemes, seed 42: report.json, loads.csv, tables.csv compared".into() }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "exceeded"
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        (
            "weight-system identities",
            criterion_1,
            Duration::from_secs(30),
        ),
        (
            "impl-a flow saturation and endpoint laws",
            criterion_2,
            Duration::from_secs(120),
        ),
        ("impl-b mapping audit", criterion_3, Duration::from_secs(60)),
        (
            "rounding concentration",
            criterion_4,
            Duration::from_secs(120),
        ),
        ("congestion bounds", criterion_5, Duration::from_secs(600)),
        (
            "compactness trend and label/header lengths",
            criterion_6,
            Duration::from_secs(600),
        ),
        (
            "oracle cross-validation",
            criterion_7,
            Duration::from_secs(10),
        ),
        ("reproducibility", criterion_8, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let passed = out.passed && took <= *limit;
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {} [{name}]: {} in {:.1}s (limit {}s): {}",
            k + 1,
            if passed { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
