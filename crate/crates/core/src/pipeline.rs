//! The complete algorithm: base case, phases 1 to 3, and the two output
//! branches with recursion on `G_c`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{compute_m_c, rescue};
use crate::graph::{validate_solution, Graph, Solution, Vertex};
use crate::local_ops::{run_until_stable, LocalAudit, OpKind};
use crate::phase1::{phase1, Phase1Audit, Phase1Stats};
use crate::structure::{analyze, audit_structure, build_family_index, FamilyIndex, Potential, StructureAudit};

/// `35 r^2 - 52 r - 90 = 0`, `r = (26 + √3826) / 35`.
pub const R_LINEAR: i128 = 26;
pub const R_DISCRIMINANT: i128 = 3826;
pub const R_DENOMINATOR: i128 = 35;

/// Largest graph solved by brute force.
pub const BASE_CASE: usize = 5;

/// `r` as a float, for reporting only.
pub fn ratio_constant() -> f64 {
    (R_LINEAR as f64 + (R_DISCRIMINANT as f64).sqrt()) / R_DENOMINATOR as f64
}

/// `opt ≤ r · alg`, exactly.
pub fn within_ratio(opt: usize, alg: usize) -> bool {
    let lhs = R_DENOMINATOR * opt as i128 - R_LINEAR * alg as i128;
    lhs <= 0 || lhs * lhs <= R_DISCRIMINANT * (alg as i128) * (alg as i128)
}

/// `32 opt ≤ 75 alg`.
pub fn within_branch5_bound(opt: usize, alg: usize) -> bool {
    32 * opt as u128 <= 75 * alg as u128
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Base,
    Five,
    Six,
}

/// Branch 5 iff there is no critical component or `A / B > 7r / 9`, with
/// `A = Σ i |𝒦_i|` and `B = |𝒦_{1,c}| + 2 |𝒦_{2,c}|`.
pub fn decide(a: u64, b: u64) -> Branch {
    if b == 0 {
        return Branch::Five;
    }
    let d = 45 * a as i128 - R_LINEAR * b as i128;
    if d > 0 && d * d > R_DISCRIMINANT * (b as i128) * (b as i128) {
        Branch::Five
    } else {
        Branch::Six
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AlgoConfig {
    /// Check the component invariant after every phase-1 modification and keep a text trace.
    pub trace: bool,
}

/// What happened at one recursion level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelReport {
    pub n: usize,
    pub m: usize,
    pub branch: Branch,
    pub phase1: Phase1Stats,
    /// `|V(M)|`.
    pub matched: usize,
    /// `|V(M_C)|` after phase 2 and after phase 3.
    pub mc_phase2: usize,
    pub mc_phase3: usize,
    pub ops: [usize; 3],
    pub g_values: Vec<i64>,
    pub critical: usize,
    pub weighted_sum: u64,
    pub critical_sum: u64,
    pub trunks: Vec<usize>,
    /// Vertices covered by the paths emitted at this level.
    pub emitted: usize,
}

impl LevelReport {
    fn base(g: &Graph, emitted: usize) -> Self {
        LevelReport {
            n: g.vertex_count(),
            m: g.edge_count(),
            branch: Branch::Base,
            phase1: Phase1Stats::default(),
            matched: 0,
            mc_phase2: 0,
            mc_phase3: 0,
            ops: [0; 3],
            g_values: Vec::new(),
            critical: 0,
            weighted_sum: 0,
            critical_sum: 0,
            trunks: Vec::new(),
            emitted,
        }
    }
}

/// Everything the audits found across all levels; empty on a correct run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PipelineAudit {
    pub phase1: Phase1Audit,
    pub prune: StructureAudit,
    pub stable: StructureAudit,
    pub local: LocalAudit,
}

impl PipelineAudit {
    pub fn violations(&self) -> usize {
        self.phase1.invariant_violations.len()
            + self.phase1.attach_violations.len()
            + self.phase1.q4_violations.len()
            + self.prune.violations()
            + self.stable.violations()
            + self.local.violations()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub solution: Solution,
    pub levels: Vec<LevelReport>,
    pub audit: PipelineAudit,
    pub trace: Vec<String>,
}

impl SolveReport {
    pub fn ops(&self, kind: OpKind) -> usize {
        let i = kind as usize;
        self.levels.iter().map(|l| l.ops[i]).sum()
    }

    /// Resolved at the top level by Branch 5.
    pub fn branch5_only(&self) -> bool {
        self.levels.len() == 1 && self.levels[0].branch == Branch::Five
    }
}

/// Exhaustive search on at most five vertices: a Hamiltonian path if one exists.
pub fn base_case(g: &Graph) -> Solution {
    let n = g.vertex_count();
    if n < 5 {
        return Solution::empty();
    }
    let mut perm: Vec<Vertex> = (0..n).collect();
    loop {
        if perm.windows(2).all(|w| g.has_edge(w[0], w[1])) {
            return Solution::new(vec![perm]);
        }
        if !next_permutation(&mut perm) {
            return Solution::empty();
        }
    }
}

fn next_permutation(p: &mut [Vertex]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The approximation algorithm with all audits and per-level reports.
pub fn solve_report(g: &Graph, config: &AlgoConfig) -> Result<SolveReport> {
    let mut current = g.clone();
    let mut to_root: Vec<Vertex> = (0..g.vertex_count()).collect();
    let mut paths: Vec<Vec<Vertex>> = Vec::new();
    let mut levels = Vec::new();
    let mut audit = PipelineAudit::default();
    let mut trace = Vec::new();
    let lift = |to_root: &[Vertex], p: &[Vertex]| -> Vec<Vertex> { p.iter().map(|&v| to_root[v]).collect() };

    loop {
        let depth = levels.len();
        if current.vertex_count() <= BASE_CASE {
            let s = base_case(&current);
            paths.extend(s.paths.iter().map(|p| lift(&to_root, p)));
            levels.push(LevelReport::base(&current, s.covered));
            if config.trace {
                trace.push(format!("level {depth}: base case n={} covered={}", current.vertex_count(), s.covered));
            }
            break;
        }

        let p1 = phase1(&current, config.trace)?;
        let comps = p1.h.components()?;
        merge_phase1(&mut audit.phase1, p1.audit.clone());
        let ctx = rescue(&current, &comps)?;
        let pruned = analyze(&current, &comps, &ctx.cover, &[])?;
        audit.prune.merge(audit_structure(&comps, &ctx.cover, &pruned));

        let local = run_until_stable(&current, &comps, ctx.cover.clone())?;
        audit.local.merge(local.audit.clone());
        audit.stable.merge(audit_structure(&comps, &local.state.cover, &local.analysis));
        let fam = build_family_index(&current, &comps, &local.analysis)?;
        let (a, b) = (fam.weighted_sum(), fam.critical_sum());
        let branch = decide(a, b);

        let mut level = LevelReport {
            n: current.vertex_count(),
            m: current.edge_count(),
            branch,
            phase1: p1.stats.clone(),
            matched: p1.h.matching().covered(),
            mc_phase2: ctx.matched_vertices(),
            mc_phase3: 2 * compute_m_c(&local.state.cover, &comps).len(),
            ops: [local.count(OpKind::Op1), local.count(OpKind::Op2), local.count(OpKind::Op3)],
            g_values: local.trace.iter().flat_map(|o| [o.g_before, o.g_after]).collect(),
            critical: local.analysis.critical_count(),
            weighted_sum: a,
            critical_sum: b,
            trunks: local.analysis.reports.iter().map(|r| r.trunk.vertex_count()).collect(),
            emitted: 0,
        };
        if config.trace {
            let s = &p1.stats;
            trace.push(format!(
                "level {depth}: n={} m={} triples={} pairs={} follow_ups={} four_paths={} absorbed={}",
                level.n, level.m, s.triples, s.pairs, s.follow_ups, s.four_paths, s.absorbed_edges
            ));
            trace.push(format!("level {depth}: cover={:?} weight={}", ctx.cover, ctx.weight));
            for o in &local.trace {
                trace.push(format!("level {depth}: {:?} ({}, {}) g {} -> {}", o.kind, o.v1, o.v2, o.g_before, o.g_after));
            }
            trace.push(format!("level {depth}: critical={} A={a} B={b} branch={branch:?}", level.critical));
        }

        match branch {
            Branch::Five => {
                for r in &local.analysis.reports {
                    level.emitted += r.best.covered;
                    paths.extend(r.best.paths.iter().map(|p| lift(&to_root, p)));
                }
                levels.push(level);
                break;
            }
            _ => {
                for p in confined_paths(&local.analysis, &fam)? {
                    level.emitted += p.len();
                    paths.push(lift(&to_root, &p));
                }
                levels.push(level);
                if fam.keep.len() == current.vertex_count() {
                    return Err(Error::Invariant("branch 6 removes no vertex".into()));
                }
                let sub = current.induced(&fam.keep);
                to_root = sub.to_parent.iter().map(|&v| to_root[v]).collect();
                current = sub.graph;
            }
        }
    }
    let solution = Solution::new(paths).canonical();
    if let Err(v) = validate_solution(g, &solution) {
        return Err(Error::Invariant(format!("output is infeasible: {v}")));
    }
    Ok(SolveReport { solution, levels, audit, trace })
}

/// `P_v` for every critical anchor, confined to `v` and its two satellites.
fn confined_paths(a: &crate::structure::Analysis, fam: &FamilyIndex) -> Result<Vec<Vec<Vertex>>> {
    let mut out = Vec::new();
    for &v in &fam.r_c {
        let p = a
            .reports
            .iter()
            .filter(|r| r.critical)
            .find_map(|r| r.anchor(v))
            .and_then(|x| x.paths.p.clone())
            .ok_or_else(|| Error::Invariant(format!("critical anchor {v} has no P_v")))?;
        if p.len() < 5 {
            return Err(Error::Invariant(format!("P_v of {v} has {} vertices", p.len())));
        }
        out.push(p);
    }
    Ok(out)
}

fn merge_phase1(into: &mut Phase1Audit, other: Phase1Audit) {
    into.invariant_checks += other.invariant_checks;
    into.invariant_violations.extend(other.invariant_violations);
    into.attach_violations.extend(other.attach_violations);
    into.q4_violations.extend(other.q4_violations);
}

/// `|V(M)|`, and `|V(M_C)|` after phases 2 and 3, computed on `g` whatever its size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchedCounts {
    pub matched: usize,
    pub mc_phase2: usize,
    pub mc_phase3: usize,
}

pub fn matched_counts(g: &Graph) -> Result<MatchedCounts> {
    let p1 = phase1(g, false)?;
    let comps = p1.h.components()?;
    let ctx = rescue(g, &comps)?;
    let local = run_until_stable(g, &comps, ctx.cover.clone())?;
    Ok(MatchedCounts {
        matched: p1.h.matching().covered(),
        mc_phase2: ctx.matched_vertices(),
        mc_phase3: 2 * compute_m_c(&local.state.cover, &comps).len(),
    })
}

/// The approximation algorithm.
pub fn solve(g: &Graph) -> Result<Solution> {
    solve_report(g, &AlgoConfig::default()).map(|r| r.solution)
}

/// Text dump of the top level: `H`, the rescue cover, and the analysis
/// before and after the local operations.
pub fn inspect(g: &Graph) -> Result<String> {
    use std::fmt::Write;
    let mut out = String::new();
    let p1 = phase1(g, false)?;
    let comps = p1.h.components()?;
    let w = &mut out;
    let _ = writeln!(w, "n {} m {} matched {}", g.vertex_count(), g.edge_count(), p1.h.matching().covered());
    for (i, c) in comps.comps.iter().enumerate() {
        let _ = writeln!(w, "component {i} {:?} {:?}", c.kind, c.vertices);
    }
    let ctx = rescue(g, &comps)?;
    let _ = writeln!(w, "cover {:?} weight {} m_c {}", ctx.cover, ctx.weight, ctx.matched_vertices());
    let pruned = analyze(g, &comps, &ctx.cover, &[])?;
    let _ = writeln!(w, "after prune g {}", Potential::of(&pruned).value());
    let _ = write!(w, "{pruned}");
    let local = run_until_stable(g, &comps, ctx.cover.clone())?;
    for o in &local.trace {
        let _ = writeln!(w, "{:?} ({}, {}) g {} -> {}", o.kind, o.v1, o.v2, o.g_before, o.g_after);
    }
    let _ = writeln!(w, "after operations g {} cover {:?}", Potential::of(&local.analysis).value(), local.state.cover);
    let _ = write!(w, "{}", local.analysis);
    let fam = build_family_index(g, &comps, &local.analysis)?;
    let (a, b) = (fam.weighted_sum(), fam.critical_sum());
    let _ = writeln!(w, "A {a} B {b} branch {:?} r_c {:?}", decide(a, b), fam.r_c);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_value, SearchBudget};
    use crate::graph::Edge;
    use proptest::prelude::*;

    #[test]
    fn inspect_lists_components() {
        let text = inspect(&Graph::path_graph(12)).unwrap();
        assert!(text.starts_with("n 12 m 11 matched 12"));
        assert!(text.contains("branch Five"));
    }

    #[test]
    fn ratio_constant_is_the_root() {
        let r = ratio_constant();
        assert!((35.0 * r * r - 52.0 * r - 90.0).abs() < 1e-9);
        assert!(r < 2.511 && r > 2.51);
    }

    #[test]
    fn exact_predicates() {
        assert!(within_ratio(0, 0));
        assert!(within_ratio(10, 5));
        assert!(!within_ratio(13, 5));
        assert!(within_ratio(12, 5));
        assert!(within_branch5_bound(75, 32));
        assert!(!within_branch5_bound(76, 32));
    }

    #[test]
    fn decide_examples() {
        assert_eq!(decide(0, 0), Branch::Five);
        assert_eq!(decide(2, 1), Branch::Five);
        assert_eq!(decide(1, 1), Branch::Six);
    }

    #[test]
    fn base_cases() {
        assert_eq!(solve(&Graph::cycle_graph(5)).unwrap().covered, 5);
        assert_eq!(solve(&Graph::path_graph(4)).unwrap().covered, 0);
        assert_eq!(solve(&Graph::empty(0)).unwrap().covered, 0);
        assert_eq!(base_case(&Graph::path_graph(5)).paths, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn small_examples() {
        assert_eq!(solve(&Graph::path_graph(9)).unwrap().covered, 9);
        let two = Graph::new(10, (0..4).map(|i| (i, i + 1)).chain((5..9).map(|i| (i, i + 1)))).unwrap();
        assert_eq!(solve(&two).unwrap().covered, 10);
        let r = solve_report(&Graph::petersen(), &AlgoConfig { trace: true }).unwrap();
        assert!(within_ratio(10, r.solution.covered));
        assert_eq!(r.audit.violations(), 0);
        assert!(!r.trace.is_empty());
    }

    /// Critical component from the structure tests, with nothing else around.
    #[test]
    fn branch_six_on_a_lone_critical_component() {
        let mut e: Vec<Edge> = Vec::new();
        for a in [0, 4, 8] {
            e.extend([(a, a + 1), (a + 1, a + 2), (a + 2, a + 3)]);
        }
        e.extend([(12, 13), (1, 5), (1, 9), (2, 12)]);
        let g = Graph::new(14, e).unwrap();
        let r = solve_report(&g, &AlgoConfig { trace: true }).unwrap();
        assert!(within_ratio(exact_value(&g, &SearchBudget::default()).unwrap(), r.solution.covered));
        assert_eq!(r.audit.violations(), 0, "{:?}", r.audit);
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (1..=max_n, 0.05f64..0.5).prop_flat_map(|(n, p)| {
            let pairs: Vec<Edge> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            proptest::collection::vec(proptest::bool::weighted(p), pairs.len())
                .prop_map(move |keep| Graph::new(n, pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&e, _)| e)).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]
        #[test]
        fn ratio_against_oracle(g in arb_graph(12)) {
            let r = solve_report(&g, &AlgoConfig { trace: true }).unwrap();
            let opt = exact_value(&g, &SearchBudget::default()).unwrap();
            prop_assert!(r.solution.covered <= opt);
            prop_assert!(within_ratio(opt, r.solution.covered), "opt {} alg {}", opt, r.solution.covered);
            let mc = matched_counts(&g).unwrap();
            prop_assert!(5 * mc.matched >= 4 * opt);
            prop_assert!(5 * mc.mc_phase2 >= 4 * opt);
            prop_assert!(5 * mc.mc_phase3 >= 4 * opt);
            if r.branch5_only() {
                prop_assert!(within_branch5_bound(opt, r.solution.covered));
            }
            prop_assert_eq!(r.audit.violations(), 0, "{:?}", r.audit);
        }

        #[test]
        fn feasible_on_larger_graphs(g in arb_graph(40)) {
            let s = solve(&g).unwrap();
            prop_assert!(validate_solution(&g, &s).is_ok());
        }
    }
}
