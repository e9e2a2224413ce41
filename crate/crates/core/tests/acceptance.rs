use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use pathcover::exact::{exact_opt, SearchBudget};
use pathcover::factor::{brute_force_cover_weight, build_rescue_graph, rescue};
use pathcover::gen::{generate, random_planted, rng, Model};
use pathcover::graph::{validate_solution, Edge, Graph};
use pathcover::harness::{Campaign, Checks};
use pathcover::local_ops::{op_cap, run_until_stable};
use pathcover::phase1::phase1;
use pathcover::pipeline::{
    matched_counts, solve_report, within_branch5_bound, within_ratio, AlgoConfig, MatchedCounts, SolveReport,
};
use pathcover::structure::{analyze, Analysis};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

/// Trunks seen, trunks compared with the oracle, violations.
type TrunkTally = (usize, usize, Vec<String>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(violations: &[String], detail: String) -> Outcome {
    let mut detail = detail;
    if let Some(first) = violations.first() {
        detail += &format!("; {} violations, first: {first}", violations.len());
    }
    Outcome { pass: violations.is_empty(), detail }
}

fn model_for(i: usize, n: usize, seed: u64) -> (Model, usize) {
    match i % 6 {
        0..=3 => (Model::Gnp { p: [0.1, 0.2, 0.3, 0.5][i % 4] }, n),
        4 => (Model::Clusters { noise: 0.02 }, 14.max(n)),
        _ => (random_planted(&mut rng(seed), n, 0.05), n),
    }
}

struct Small {
    n: usize,
    seed: u64,
    opt: usize,
    alg: usize,
    counts: MatchedCounts,
    report: SolveReport,
}

/// 1000 instances with `n <= 14`, oracle included.
fn small_set() -> Vec<Small> {
    (0..1000)
        .into_par_iter()
        .map(|i| {
            let seed = 10_000 + i as u64;
            let (model, n) = model_for(i, 6 + i % 9, seed);
            let g = generate(&model, n, seed).graph;
            let report = solve_report(&g, &AlgoConfig::default()).expect("solve");
            let opt = exact_opt(&g, 5, &SearchBudget::default()).expect("oracle").covered;
            Small { n, seed, opt, alg: report.solution.covered, counts: matched_counts(&g).expect("phases"), report }
        })
        .collect()
}

fn traced_graphs() -> Vec<Graph> {
    (0..200)
        .map(|i| {
            let seed = 20_000 + i as u64;
            let n = 10 + (i * 7) % 31;
            let model = match i % 5 {
                0 => Model::Gnp { p: [0.08, 0.2][i % 2] },
                1 => Model::Clusters { noise: 0.01 },
                2 | 3 => Model::Mixed { extra: 1 + i % 3 },
                _ => random_planted(&mut rng(seed), n, 0.03),
            };
            let n = match model {
                Model::Clusters { .. } => 14 * (1 + n / 14),
                Model::Mixed { .. } => [19, 38, 57][i % 3],
                _ => n,
            };
            generate(&model, n, seed).graph
        })
        .collect()
}

fn feasibility() -> Outcome {
    let bad: Vec<String> = (0..2000)
        .into_par_iter()
        .filter_map(|i| {
            let seed = i as u64;
            let n = 10 + (i * 13) % 51;
            let model = if i % 5 == 4 {
                random_planted(&mut rng(seed), n, 0.05)
            } else {
                Model::Gnp { p: 0.05 + 0.05 * (i % 10) as f64 }
            };
            let g = generate(&model, n, seed).graph;
            match pathcover::solve(&g) {
                Ok(s) => validate_solution(&g, &s).err().map(|v| format!("{model} n={n} seed={seed}: {v}")),
                Err(e) => Some(format!("{model} n={n} seed={seed}: {e}")),
            }
        })
        .collect();
    outcome(&bad, "2000 instances, n 10..60, p 0.05..0.5 and planted".into())
}

fn ratio(set: &[Small]) -> Outcome {
    let bad: Vec<String> = set
        .iter()
        .filter(|s| !within_ratio(s.opt, s.alg))
        .map(|s| format!("n={} seed={} opt={} alg={}", s.n, s.seed, s.opt, s.alg))
        .collect();
    let worst = set.iter().filter(|s| s.alg > 0).map(|s| s.opt as f64 / s.alg as f64).fold(1.0, f64::max);
    outcome(&bad, format!("{} instances, worst opt/alg {worst:.4}", set.len()))
}

type Count = (&'static str, fn(&MatchedCounts) -> usize);

fn matching_bound(set: &[Small], pick: &[Count]) -> Outcome {
    let mut bad = Vec::new();
    for s in set {
        for (name, f) in pick {
            let x = f(&s.counts);
            if 5 * x < 4 * s.opt {
                bad.push(format!("seed={} {name}={x} opt={}", s.seed, s.opt));
            }
        }
    }
    let names: Vec<&str> = pick.iter().map(|p| p.0).collect();
    outcome(&bad, format!("{} instances, checked {}", set.len(), names.join(", ")))
}

fn invariant(traced: &[SolveReport]) -> Outcome {
    let checks: usize = traced.iter().map(|r| r.audit.phase1.invariant_checks).sum();
    let bad: Vec<String> = traced.iter().flat_map(|r| r.audit.phase1.invariant_violations.clone()).collect();
    let mut o = outcome(&bad, format!("{} traced instances, {checks} component checks", traced.len()));
    o.pass &= checks > 0;
    o
}

fn factor_equivalence() -> Outcome {
    let found: Vec<Option<String>> = (0..4000)
        .into_par_iter()
        .map(|i| {
            let seed = 30_000 + i as u64;
            let n = 8 + i % 13;
            let model = if i % 3 == 0 { Model::Clusters { noise: 0.04 } } else { Model::Gnp { p: [0.1, 0.15][i % 2] } };
            let n = if i % 3 == 0 { 14 } else { n };
            let g = generate(&model, n, seed).graph;
            let comps = phase1(&g, false).ok()?.h.components().ok()?;
            let rg = build_rescue_graph(&g, &comps);
            if rg.eligible.is_empty() || rg.eligible.len() > 12 {
                return None;
            }
            let ctx = rescue(&g, &comps).expect("rescue");
            let brute = brute_force_cover_weight(&rg, &comps);
            Some(if ctx.weight == brute { String::new() } else { format!("seed={seed}: factor {} brute {brute}", ctx.weight) })
        })
        .collect();
    let cases: Vec<String> = found.into_iter().flatten().take(300).collect();
    let bad: Vec<String> = cases.iter().filter(|s| !s.is_empty()).cloned().collect();
    let mut o = outcome(&bad, format!("{} instances with 1 to 12 rescue edges", cases.len()));
    o.pass &= cases.len() == 300;
    o
}

fn structure_audits(reports: &[&SolveReport]) -> Outcome {
    let mut bad = Vec::new();
    let mut members = 0;
    for r in reports {
        let a = &r.audit;
        members += a.prune.members + a.stable.members;
        for s in [&a.prune, &a.stable] {
            for list in [&s.stray_cover_edges, &s.satellite_kinds, &s.trunk_bounds, &s.light_anchors, &s.short_paths] {
                bad.extend(list.iter().cloned());
            }
        }
        bad.extend(a.local.exit_edges.iter().cloned());
        bad.extend(a.local.weight_changes.iter().cloned());
        bad.extend(a.local.new_isolated_bad.iter().cloned());
    }
    outcome(&bad, format!("{} runs, {members} audited members", reports.len()))
}

/// Sparse hub gadgets and 5-paths, where the operations fire most often.
fn operation_graphs() -> Vec<Graph> {
    (0..600).map(|i| generate(&Model::Mixed { extra: 1 + i % 3 }, [38, 57][i % 2], 40_000 + i as u64).graph).collect()
}

fn potential(traced: &[SolveReport]) -> Outcome {
    let extra: Vec<SolveReport> =
        operation_graphs().par_iter().map(|g| solve_report(g, &AlgoConfig { trace: true }).expect("traced solve")).collect();
    let mut bad = Vec::new();
    let mut applied = [0; 3];
    for r in traced.iter().chain(&extra) {
        bad.extend(r.audit.local.non_decreasing.iter().cloned());
        for l in &r.levels {
            for w in l.g_values.chunks(2) {
                if w[1] >= w[0] {
                    bad.push(format!("g {} -> {}", w[0], w[1]));
                }
            }
            for (a, x) in applied.iter_mut().zip(l.ops) {
                *a += x;
            }
            let total: usize = l.ops.iter().sum();
            if total > op_cap(l.n) {
                bad.push(format!("{total} operations on n={}", l.n));
            }
        }
    }
    let mut o = outcome(
        &bad,
        format!("{} traced runs, operations applied: {} of kind 1, {} of kind 2, {} of kind 3", traced.len() + extra.len(), applied[0], applied[1], applied[2]),
    );
    o.pass &= applied.iter().sum::<usize>() > 0;
    o
}

/// Top-level analyses before and after the operations.
fn analyses(g: &Graph) -> Vec<(Vec<Edge>, Analysis)> {
    let comps = phase1(g, false).unwrap().h.components().unwrap();
    let ctx = rescue(g, &comps).unwrap();
    let pruned = analyze(g, &comps, &ctx.cover, &[]).unwrap();
    let local = run_until_stable(g, &comps, ctx.cover.clone()).unwrap();
    vec![(ctx.cover, pruned), (local.state.cover, local.analysis)]
}

fn trunks(graphs: &[Graph]) -> Outcome {
    let results: Vec<TrunkTally> = graphs
        .par_iter()
        .map(|g| {
            let (mut total, mut compared, mut bad) = (0, 0, Vec::new());
            for (cover, a) in analyses(g) {
                for r in &a.reports {
                    total += 1;
                    let t = &r.trunk;
                    if t.vertex_count() > 55 {
                        bad.push(format!("trunk with {} vertices", t.vertex_count()));
                    }
                    let inside = |e: &Edge| r.member.contains(e.0) && r.member.contains(e.1);
                    let in_k: BTreeSet<Edge> = cover.iter().copied().filter(inside).collect();
                    let in_t: BTreeSet<Edge> = cover.iter().copied().filter(|&(u, v)| t.has_edge(u, v)).collect();
                    if in_k != in_t {
                        bad.push(format!("trunk keeps {} of {} cover edges", in_t.len(), in_k.len()));
                    }
                    if t.vertex_count() <= 18 {
                        compared += 1;
                        let opt = exact_opt(&t.graph().graph, 5, &SearchBudget::default()).unwrap().covered;
                        if opt != r.best.covered {
                            bad.push(format!("trunk of {} vertices: trunk_opt {} exact {opt}", t.vertex_count(), r.best.covered));
                        }
                    }
                }
            }
            (total, compared, bad)
        })
        .collect();
    let total: usize = results.iter().map(|r| r.0).sum();
    let compared: usize = results.iter().map(|r| r.1).sum();
    let bad: Vec<String> = results.into_iter().flat_map(|r| r.2).collect();
    outcome(&bad, format!("{total} trunks, {compared} compared with the oracle"))
}

fn critical_facts(reports: &[&SolveReport]) -> Outcome {
    let mut bad = Vec::new();
    let mut critical = 0;
    for r in reports {
        critical += r.audit.stable.critical + r.audit.prune.critical;
        for s in [&r.audit.prune, &r.audit.stable] {
            bad.extend(s.critical_kinds.iter().cloned());
            bad.extend(s.critical_counts.iter().cloned());
        }
    }
    let mut o = outcome(&bad, format!("{critical} critical components audited"));
    o.pass &= critical > 0;
    o
}

fn branch5(set: &[Small]) -> Outcome {
    let five: Vec<&Small> = set.iter().filter(|s| s.report.branch5_only()).collect();
    let bad: Vec<String> = five
        .iter()
        .filter(|s| !within_branch5_bound(s.opt, s.alg))
        .map(|s| format!("seed={} opt={} alg={}", s.seed, s.opt, s.alg))
        .collect();
    outcome(&bad, format!("{} instances resolved in branch 5", five.len()))
}

fn determinism(graphs: &[Graph]) -> Outcome {
    let cfg = AlgoConfig { trace: true };
    let mut bad = Vec::new();
    let first: Vec<SolveReport> = graphs.par_iter().map(|g| solve_report(g, &cfg).unwrap()).collect();
    for (i, g) in graphs.iter().enumerate().take(60) {
        if solve_report(g, &cfg).unwrap() != first[i] {
            bad.push(format!("traced instance {i} differs between runs"));
        }
    }
    let campaign = Campaign {
        trials: 60,
        sizes: vec![10, 14],
        models: vec![Model::Gnp { p: 0.25 }, Model::Clusters { noise: 0.02 }],
        seed: 7,
        checks: Checks { oracle: Some(SearchBudget::default()), matched: true, fault: None },
    };
    let (a, b) = (campaign.run().unwrap().without_timing(), campaign.run().unwrap().without_timing());
    if a.to_json() != b.to_json() {
        bad.push("campaign reports differ modulo timing".into());
    }
    outcome(&bad, "60 traced instances rerun, one campaign repeated".into())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let small = small_set();
    let graphs = traced_graphs();
    let traced: Vec<SolveReport> =
        graphs.par_iter().map(|g| solve_report(g, &AlgoConfig { trace: true }).expect("traced solve")).collect();
    let all: Vec<&SolveReport> = traced.iter().chain(small.iter().map(|s| &s.report)).collect();

    let criteria: Vec<Criterion> = vec![
        ("feasibility", Box::new(feasibility)),
        ("approximation ratio", Box::new(|| ratio(&small))),
        ("matching covers 4/5 of opt", Box::new(|| matching_bound(&small, &[("|V(M)|", |c| c.matched)]))),
        (
            "cover matching covers 4/5 of opt",
            Box::new(|| matching_bound(&small, &[("phase 2", |c| c.mc_phase2), ("phase 3", |c| c.mc_phase3)])),
        ),
        ("component shapes after every modification", Box::new(|| invariant(&traced))),
        ("factor cover weight equals brute force", Box::new(factor_equivalence)),
        ("structure and exit-edge audits", Box::new(|| structure_audits(&all))),
        ("potential strictly decreases", Box::new(|| potential(&traced))),
        ("trunks", Box::new(|| trunks(&graphs))),
        ("critical component audits", Box::new(|| critical_facts(&all))),
        ("branch 5 bound", Box::new(|| branch5(&small))),
        ("determinism", Box::new(|| determinism(&graphs))),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} {:>2} {name}: {} ({:.1}s)", i + 1, o.detail, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
