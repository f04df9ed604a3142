//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero when any criterion fails. Pass criterion numbers as
//! arguments to run a subset.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use coforest::cluster::{reconstruct_forest, run_with_observer, sample_cluster_distance};
use coforest::data::AttributeSchema;
use coforest::eval::{
    adjusted_rand_index, clustering_accuracy, normalized_mutual_information, run_benchmark, structure_experiment,
    BenchmarkDataset, BenchmarkReport, StructureKind,
};
use coforest::forest::{minimum_spanning_tree, order_trace, trace_distance_matrix, WeightedValueGraph};
use coforest::{CategoricalDataset, ClusterStats, ClusteringConfig, Partition, Variant};
use common::{bin, naive_objective, vendored_suite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_l: usize, max_o: usize, max_k: usize) -> (CategoricalDataset, Partition) {
    let n = rng.gen_range(2..=max_n);
    let l = rng.gen_range(1..=max_l);
    let cards: Vec<usize> = (0..l).map(|_| rng.gen_range(1..=max_o.min(n))).collect();
    let rows: Vec<Vec<usize>> = (0..n)
        .map(|i| cards.iter().map(|&o| if i < o { i } else { rng.gen_range(0..o) }).collect())
        .collect();
    let schemas = cards
        .iter()
        .enumerate()
        .map(|(r, &o)| AttributeSchema {
            name: format!("a{r}"),
            vocabulary: (0..o).map(|v| format!("v{v}")).collect(),
        })
        .collect();
    let ds = CategoricalDataset::new(schemas, rows, None).unwrap();
    let k = rng.gen_range(1..=max_k.min(n));
    let mut assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    for (j, a) in assignment.iter_mut().take(k).enumerate() {
        *a = j;
    }
    (ds, Partition::new(assignment, k).unwrap())
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut matrices = 0;
    let mut gammas = 0;
    for _ in 0..1000 {
        let (ds, part) = random_instance(&mut rng, 40, 4, 8, 5);
        let forest = reconstruct_forest(&ds, &part).unwrap();
        for d in forest.distances() {
            matrices += 1;
            let o = d.size();
            for u in 0..o {
                if d.get(u, u) != 0.0 {
                    return outcome(false, format!("d(u,u) = {} != 0", d.get(u, u)));
                }
                for s in 0..o {
                    if d.get(u, s) < 0.0 || d.get(u, s) != d.get(s, u) {
                        return outcome(false, format!("non-negativity/symmetry broken at ({u},{s})"));
                    }
                    for g in 0..o {
                        if d.get(u, s) > d.get(u, g) + d.get(g, s) + 1e-9 {
                            return outcome(false, format!("triangle inequality broken at ({u},{g},{s})"));
                        }
                    }
                }
            }
        }
        let stats = ClusterStats::from_partition(&ds, &part).unwrap();
        for i in 0..ds.n_samples() {
            for j in 0..part.k() {
                gammas += 1;
                let gamma = sample_cluster_distance(&ds, &stats, forest.distances(), i, j).unwrap();
                if gamma < -1e-12 {
                    return outcome(false, format!("Γ(x_{i}, C_{j}) = {gamma}"));
                }
            }
        }
    }
    outcome(true, format!("1000 instances, {matrices} distance matrices, {gammas} sample-cluster distances"))
}

fn brute_force_mst_weight(o: usize, w: &[Vec<f64>]) -> f64 {
    let edges: Vec<(usize, usize)> = (0..o).flat_map(|u| ((u + 1)..o).map(move |s| (u, s))).collect();
    let need = o - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize != need {
            continue;
        }
        let mut parent: Vec<usize> = (0..o).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut acyclic = true;
        let mut total = 0.0;
        for (e, &(u, s)) in edges.iter().enumerate() {
            if mask & (1 << e) != 0 {
                let (a, b) = (find(&mut parent, u), find(&mut parent, s));
                if a == b {
                    acyclic = false;
                    break;
                }
                parent[a] = b;
                total += w[u][s];
            }
        }
        if acyclic {
            best = best.min(total);
        }
    }
    if need == 0 {
        0.0
    } else {
        best
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..500 {
        let o = rng.gen_range(1..=6);
        let quantized = trial % 2 == 0;
        let mut w = vec![vec![0.0; o]; o];
        for u in 0..o {
            for s in (u + 1)..o {
                let x: f64 = rng.gen_range(0.0..1.5);
                let x = if quantized { (x * 4.0).round() / 4.0 } else { x };
                w[u][s] = x;
                w[s][u] = x;
            }
        }
        let g = WeightedValueGraph::from_fn(0, o, |u, s| w[u][s]);
        let tree = minimum_spanning_tree(&g);
        let oracle = brute_force_mst_weight(o, &w);
        if (tree.total_weight() - oracle).abs() > 1e-9 {
            return outcome(false, format!("graph {trial}: tree weight {} vs exhaustive {oracle}", tree.total_weight()));
        }
        // generic shortest paths restricted to tree edges
        let mut sp = vec![vec![f64::INFINITY; o]; o];
        for (u, row) in sp.iter_mut().enumerate() {
            row[u] = 0.0;
        }
        for e in tree.edges() {
            sp[e.u][e.s] = e.weight;
            sp[e.s][e.u] = e.weight;
        }
        for m in 0..o {
            for u in 0..o {
                for s in 0..o {
                    if sp[u][m] + sp[m][s] < sp[u][s] {
                        sp[u][s] = sp[u][m] + sp[m][s];
                    }
                }
            }
        }
        let d = trace_distance_matrix(&tree);
        for u in 0..o {
            for s in 0..o {
                let trace: f64 = order_trace(&tree, u, s).unwrap().iter().sum();
                if (d.get(u, s) - sp[u][s]).abs() > 1e-9 || (trace - sp[u][s]).abs() > 1e-9 {
                    return outcome(false, format!("graph {trial}: d({u},{s}) = {} vs oracle {}", d.get(u, s), sp[u][s]));
                }
            }
        }
    }
    outcome(true, "500 graphs (half with tied weights) match exhaustive MST and shortest-path oracles")
}

const SEEDS: u64 = 10;

fn criterion_3(present: &[BenchmarkDataset]) -> Outcome {
    let mut states = 0usize;
    let mut runs = 0usize;
    let mut worst = 0.0f64;
    for entry in present {
        for variant in [Variant::Coforest, Variant::Cof1, Variant::Cof2, Variant::Cof3, Variant::Cof4] {
            for seed in 0..SEEDS {
                let cfg = ClusteringConfig::new(entry.k, seed, variant);
                let mut mismatch = None;
                run_with_observer(&entry.data, &cfg, &mut |snap| {
                    states += 1;
                    let oracle = naive_objective(&entry.data, snap.partition, snap.distances);
                    let rel = (snap.record.objective - oracle).abs() / oracle.abs().max(1e-12);
                    worst = worst.max(rel);
                    if rel > 1e-9 && mismatch.is_none() {
                        mismatch = Some((snap.record.objective, oracle));
                    }
                })
                .unwrap();
                runs += 1;
                if let Some((got, want)) = mismatch {
                    return outcome(false, format!("{} {variant} seed {seed}: recorded {got}, oracle {want}", entry.name));
                }
            }
        }
    }
    outcome(
        runs > 0,
        format!("{runs} runs on {} datasets, {states} recorded states, worst relative error {worst:.2e}", present.len()),
    )
}

fn missing_note(missing: &[String]) -> String {
    if missing.is_empty() {
        String::new()
    } else {
        format!("; missing datasets: {} (run scripts/fetch_datasets.sh)", missing.join(", "))
    }
}

fn criterion_4(present: &[BenchmarkDataset], missing: &[String]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = missing.is_empty();
    let (mut quick_total, mut runs_total) = (0usize, 0usize);
    for entry in present {
        let mut quick = 0;
        let mut capped = 0;
        let mut rising = 0;
        for seed in 0..SEEDS {
            let cfg = ClusteringConfig::new(entry.k, seed, Variant::Coforest);
            let result = coforest::cluster::run(&entry.data, &cfg).unwrap();
            let trace = &result.objective_trace;
            if result.converged && result.inner_iterations + result.outer_iterations <= 15 {
                quick += 1;
            }
            let mut segment = 0;
            let mut longest = 0;
            for r in trace {
                segment = if r.reconstructed { 0 } else { segment + 1 };
                longest = longest.max(segment);
            }
            if !result.converged || longest >= cfg.max_inner {
                capped += 1;
            }
            let second_construction = trace.iter().enumerate().filter(|(_, r)| r.reconstructed).nth(1).map(|(i, _)| i);
            let first_loop_end = match second_construction {
                Some(i) => trace[i - 1].objective,
                None => trace.last().unwrap().objective,
            };
            let last = trace.last().unwrap().objective;
            if last > first_loop_end + 1e-9 * first_loop_end.abs().max(1.0) {
                rising += 1;
            }
        }
        quick_total += quick;
        runs_total += SEEDS as usize;
        ok &= capped == 0 && rising == 0;
        parts.push(format!(
            "{}: {quick}/{SEEDS} converged within 15, {capped} capped, {rising} with final L above first-loop L",
            entry.name
        ));
    }
    ok &= runs_total > 0 && quick_total * 10 >= 9 * runs_total;
    outcome(
        ok,
        format!("{quick_total}/{runs_total} runs quick overall; {}{}", parts.join("; "), missing_note(missing)),
    )
}

fn mean_ca(report: &BenchmarkReport) -> HashMap<(String, Variant), f64> {
    report
        .cells
        .iter()
        .map(|c| ((c.dataset.clone(), c.algorithm), c.ca.mean))
        .collect()
}

fn criterion_5(present: &[BenchmarkDataset]) -> Outcome {
    let targets = [("soybean-small", 0.9723, 0.10), ("zoo", 0.7832, 0.12), ("lenses", 0.6833, 0.14)];
    let report = run_benchmark(present, &[Variant::Coforest], SEEDS as usize, 0).unwrap();
    let means = mean_ca(&report);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, target, tol) in targets {
        match means.get(&(name.to_string(), Variant::Coforest)) {
            Some(&m) => {
                let pass = (m - target).abs() <= tol;
                ok &= pass;
                parts.push(format!("{name} {m:.4} (target {target}±{tol}) {}", if pass { "ok" } else { "out" }));
            }
            None => {
                ok = false;
                parts.push(format!("{name} unavailable"));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6(present: &[BenchmarkDataset], missing: &[String]) -> Outcome {
    let algs = [Variant::Coforest, Variant::Cof1, Variant::Cof3, Variant::Cof4];
    let report = run_benchmark(present, &algs, SEEDS as usize, 0).unwrap();
    let means = mean_ca(&report);
    let total = present.len() + missing.len();
    let mut ok = missing.is_empty();
    let mut cof3_wins = 0;
    let mut parts = Vec::new();
    for entry in present {
        let get = |v| means[&(entry.name.clone(), v)];
        let (full, once, cof3, cof4) = (get(Variant::Coforest), get(Variant::Cof1), get(Variant::Cof3), get(Variant::Cof4));
        ok &= full >= once;
        if cof3 >= cof4 {
            cof3_wins += 1;
        }
        parts.push(format!(
            "{}: coforest {full:.4} vs cof1 {once:.4}, cof3 {cof3:.4} vs cof4 {cof4:.4}",
            entry.name
        ));
    }
    ok &= cof3_wins * 2 > total;
    outcome(
        ok,
        format!("{}; cof3 >= cof4 on {cof3_wins}/{total}{}", parts.join("; "), missing_note(missing)),
    )
}

fn criterion_7(present: &[BenchmarkDataset], missing: &[String]) -> Outcome {
    let report = run_benchmark(present, &[Variant::Coforest, Variant::Kmodes], SEEDS as usize, 0).unwrap();
    let means = mean_ca(&report);
    let total = present.len() + missing.len();
    let mut wins = 0;
    let mut parts = Vec::new();
    for entry in present {
        let (a, b) = (means[&(entry.name.clone(), Variant::Coforest)], means[&(entry.name.clone(), Variant::Kmodes)]);
        if a > b {
            wins += 1;
        }
        parts.push(format!("{}: {a:.4} vs {b:.4}", entry.name));
    }
    outcome(
        wins >= 4,
        format!("coforest beats kmodes on {wins}/{total} ({}){}", parts.join("; "), missing_note(missing)),
    )
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0.ln(), b + p.1.ln()));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = points.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
    num / den
}

fn criterion_8() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for mode in ["samples", "attributes"] {
        let out = dir.path().join(format!("{mode}.csv"));
        let status = bin()
            .env("COFOREST_JOBS", "1")
            .args(["scaling", "--mode", mode, "--algorithm", "coforest", "--output"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("scaling --mode {mode} exited with {status}"));
        }
        let text = std::fs::read_to_string(&out).unwrap();
        let points: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|line| {
                let cols: Vec<&str> = line.split(',').collect();
                (cols[2].parse().unwrap(), cols[3].parse().unwrap())
            })
            .collect();
        let b = slope(&points);
        let pass = points.len() == 10 && (0.8..=1.3).contains(&b);
        ok &= pass;
        parts.push(format!("{mode}: slope {b:.3} over {} points", points.len()));
    }
    outcome(ok, parts.join("; "))
}

fn brute_force_ca(pred: &[usize], truth: &[usize]) -> f64 {
    fn permute(rest: &mut Vec<usize>, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if rest.is_empty() {
            f(chosen);
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            chosen.push(x);
            permute(rest, chosen, f);
            chosen.pop();
            rest.insert(i, x);
        }
    }
    let size = pred.iter().chain(truth).max().unwrap() + 1;
    let mut best = 0;
    permute(&mut (0..size).collect(), &mut Vec::new(), &mut |map| {
        best = best.max(pred.iter().zip(truth).filter(|(p, t)| map[**p] == **t).count());
    });
    best as f64 / pred.len() as f64
}

/// Hubert–Arabie form over explicit sample pairs.
fn pair_ari(pred: &[usize], truth: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..pred.len() {
        for j in (i + 1)..pred.len() {
            match (pred[i] == pred[j], truth[i] == truth[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (n00 * n11 - n01 * n10) / den
}

fn textbook_nmi(pred: &[usize], truth: &[usize]) -> f64 {
    let n = pred.len() as f64;
    let prob = |f: &dyn Fn(usize) -> bool| (0..pred.len()).filter(|&i| f(i)).count() as f64 / n;
    let mut hp = 0.0;
    let mut ht = 0.0;
    let mut mi = 0.0;
    for a in 0..5 {
        let pa = prob(&|i| pred[i] == a);
        if pa > 0.0 {
            hp -= pa * pa.log2();
        }
        let ta = prob(&|i| truth[i] == a);
        if ta > 0.0 {
            ht -= ta * ta.log2();
        }
        for b in 0..5 {
            let pab = prob(&|i| pred[i] == a && truth[i] == b);
            let pb = prob(&|i| truth[i] == b);
            if pab > 0.0 {
                mi += pab * (pab / (pa * pb)).log2();
            }
        }
    }
    if hp == 0.0 && ht == 0.0 {
        return 1.0;
    }
    mi / ((hp + ht) / 2.0)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = rng.gen_range(2..=30);
        let kp = rng.gen_range(1..=5);
        let kt = rng.gen_range(1..=5);
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kp)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kt)).collect();
        let ca = clustering_accuracy(&pred, &truth).unwrap();
        if ca != brute_force_ca(&pred, &truth) {
            return outcome(false, format!("pair {trial}: CA {ca} vs {}", brute_force_ca(&pred, &truth)));
        }
        let ari = adjusted_rand_index(&pred, &truth).unwrap();
        let nmi = normalized_mutual_information(&pred, &truth).unwrap();
        let (e1, e2) = ((ari - pair_ari(&pred, &truth)).abs(), (nmi - textbook_nmi(&pred, &truth)).abs());
        worst = worst.max(e1).max(e2);
        if e1 > 1e-9 || e2 > 1e-9 {
            return outcome(false, format!("pair {trial}: ARI error {e1:.2e}, NMI error {e2:.2e}"));
        }
    }
    outcome(true, format!("200 pairs, CA exact, worst ARI/NMI error {worst:.2e}"))
}

fn criterion_10(present: &[BenchmarkDataset]) -> Outcome {
    let Some(entry) = present.iter().find(|d| d.name == "hayes-roth") else {
        return outcome(false, "hayes-roth unavailable");
    };
    let run = |kind| structure_experiment(&entry.data, kind, None, 50, 0).unwrap();
    let (rgg, rglg, fcg) = (run(StructureKind::Rgg), run(StructureKind::Rglg), run(StructureKind::Fcg));
    let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (a, b, c) = (max(&rgg), max(&rglg), max(&fcg));
    outcome(
        a >= c && a >= b,
        format!("hayes-roth, 50 trials: max RGG {a:.4}, max RGLG {b:.4}, max FCG {c:.4}"),
    )
}

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (present, missing) = vendored_suite();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(u32, &str, Check)> = vec![
        (1, "metric axioms", Box::new(criterion_1)),
        (2, "MST and trace oracles", Box::new(criterion_2)),
        (3, "objective integrity", Box::new(|| criterion_3(&present))),
        (4, "convergence behaviour", Box::new(|| criterion_4(&present, &missing))),
        (5, "spot reproduction", Box::new(|| criterion_5(&present))),
        (6, "ablation ordering", Box::new(|| criterion_6(&present, &missing))),
        (7, "baseline dominance", Box::new(|| criterion_7(&present, &missing))),
        (8, "near-linear scaling", Box::new(criterion_8)),
        (9, "metric oracles", Box::new(criterion_9)),
        (10, "structure comparison", Box::new(|| criterion_10(&present))),
    ];
    let mut failed = Vec::new();
    for (id, title, check) in &criteria {
        if !only.is_empty() && !only.contains(id) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!(
            "criterion {id:>2} {} {title} ({:.1}s): {}",
            if result.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed.push(*id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
