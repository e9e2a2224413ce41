//! Verification and benchmark campaigns over seeded random instances.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_opt, SearchBudget};
use crate::gen::{generate, Model};
use crate::graph::{parse_graph, validate_solution, Graph, Solution};
use crate::pipeline::{matched_counts, solve_report, within_branch5_bound, within_ratio, AlgoConfig, Branch, SolveReport};

/// Column order of [`Record`] in CSV output.
pub const CSV_COLUMNS: [&str; 11] = ["seed", "n", "m", "model", "alg", "opt", "branch_depth", "ops1", "ops2", "ops3", "ms"];

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub model: String,
    pub alg: usize,
    /// Empty when the oracle did not run.
    pub opt: Option<usize>,
    /// Number of recursion levels.
    pub branch_depth: usize,
    pub ops1: usize,
    pub ops2: usize,
    pub ops3: usize,
    pub ms: f64,
}

/// A deliberate corruption of the solver output, for testing the checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Cut the first path down to four vertices.
    ShortPath,
}

impl Fault {
    pub fn apply(self, s: &mut Solution) {
        match self {
            Fault::ShortPath => match s.paths.first_mut() {
                Some(p) => p.truncate(4),
                None => s.paths.push(vec![0, 1, 2, 3]),
            },
        }
        *s = Solution::new(std::mem::take(&mut s.paths));
    }
}

/// What to check on every trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checks {
    /// Run the exact oracle; `None` skips it.
    pub oracle: Option<SearchBudget>,
    /// Compare `|V(M)|` and `|V(M_C)|` with `opt`.
    pub matched: bool,
    pub fault: Option<Fault>,
}

/// A full trial result; `record.ms` is the only nondeterministic field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trial {
    pub record: Record,
    pub branches: Vec<Branch>,
    pub violations: Vec<String>,
}

/// Runs the solver on `g` and everything `checks` asks for.
pub fn run_trial(g: &Graph, model: &str, seed: u64, checks: &Checks) -> Trial {
    let start = Instant::now();
    let mut violations = Vec::new();
    let report = solve_report(g, &AlgoConfig::default());
    let ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1000.0;
    let mut record = Record {
        seed,
        n: g.vertex_count(),
        m: g.edge_count(),
        model: model.to_string(),
        alg: 0,
        opt: None,
        branch_depth: 0,
        ops1: 0,
        ops2: 0,
        ops3: 0,
        ms,
    };
    let mut branches = Vec::new();
    let mut branch5_only = false;
    match report {
        Ok(r) => {
            branch5_only = r.branch5_only();
            violations.extend(audit_messages(&r));
            let SolveReport { mut solution, levels, .. } = r;
            if let Some(f) = checks.fault {
                f.apply(&mut solution);
            }
            if let Err(v) = validate_solution(g, &solution) {
                violations.push(format!("infeasible output: {v}"));
            }
            record.alg = solution.covered;
            record.branch_depth = levels.len();
            [record.ops1, record.ops2, record.ops3] =
                levels.iter().fold([0; 3], |acc, l| [acc[0] + l.ops[0], acc[1] + l.ops[1], acc[2] + l.ops[2]]);
            branches = levels.iter().map(|l| l.branch).collect();
        }
        Err(e) => violations.push(format!("solver error: {e}")),
    }
    if let Some(budget) = checks.oracle {
        match exact_opt(g, 5, &budget) {
            Ok(opt) => {
                let (opt, alg) = (opt.covered, record.alg);
                record.opt = Some(opt);
                if !within_ratio(opt, alg) {
                    violations.push(format!("ratio: opt {opt} alg {alg}"));
                }
                if branch5_only && !within_branch5_bound(opt, alg) {
                    violations.push(format!("branch 5 bound: opt {opt} alg {alg}"));
                }
                if checks.matched {
                    match matched_counts(g) {
                        Ok(c) => {
                            for (what, x) in [("M", c.matched), ("M_C after phase 2", c.mc_phase2), ("M_C after phase 3", c.mc_phase3)] {
                                if 5 * x < 4 * opt {
                                    violations.push(format!("|V({what})| = {x} below 4/5 of opt {opt}"));
                                }
                            }
                        }
                        Err(e) => violations.push(format!("matched counts: {e}")),
                    }
                }
            }
            Err(e) => violations.push(format!("oracle: {e}")),
        }
    }
    Trial { record, branches, violations }
}

fn audit_messages(r: &SolveReport) -> Vec<String> {
    let a = &r.audit;
    let p = &a.phase1;
    let mut out: Vec<String> = Vec::new();
    let lists: [(&str, &Vec<String>); 3] = [("invariant", &p.invariant_violations), ("attach", &p.attach_violations), ("q4", &p.q4_violations)];
    for (tag, list) in lists {
        out.extend(list.iter().map(|m| format!("{tag}: {m}")));
    }
    for (stage, s) in [("prune", &a.prune), ("stable", &a.stable)] {
        for list in [&s.stray_cover_edges, &s.satellite_kinds, &s.trunk_bounds, &s.light_anchors, &s.short_paths, &s.critical_kinds, &s.critical_counts] {
            out.extend(list.iter().map(|m| format!("{stage}: {m}")));
        }
    }
    let l = &a.local;
    for list in [&l.non_decreasing, &l.weight_changes, &l.new_isolated_bad, &l.exit_edges] {
        out.extend(list.iter().map(|m| format!("local: {m}")));
    }
    out
}

/// A failing trial written to disk; replaying it reproduces the violations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayCase {
    pub model: String,
    pub seed: u64,
    /// Edge-list text of the instance.
    pub graph: String,
    pub oracle_cap: Option<usize>,
    pub matched: bool,
    pub fault: Option<Fault>,
    pub violations: Vec<String>,
}

impl ReplayCase {
    pub fn new(g: &Graph, trial: &Trial, checks: &Checks) -> Self {
        ReplayCase {
            model: trial.record.model.clone(),
            seed: trial.record.seed,
            graph: g.to_edge_list(),
            oracle_cap: checks.oracle.map(|b| b.max_vertices),
            matched: checks.matched,
            fault: checks.fault,
            violations: trial.violations.clone(),
        }
    }

    pub fn checks(&self) -> Checks {
        Checks { oracle: self.oracle_cap.map(SearchBudget::with_cap), matched: self.matched, fault: self.fault }
    }

    pub fn replay(&self) -> Result<Trial> {
        let g = parse_graph(&self.graph)?;
        Ok(run_trial(&g, &self.model, self.seed, &self.checks()))
    }
}

/// Trial `i` uses `models[i % models.len()]`, `sizes[(i / models.len()) % sizes.len()]`
/// and seed `seed + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub trials: usize,
    pub sizes: Vec<usize>,
    pub models: Vec<Model>,
    pub seed: u64,
    pub checks: Checks,
}

impl Campaign {
    pub fn plan(&self, i: usize) -> (Model, usize, u64) {
        let model = self.models[i % self.models.len()].clone();
        let n = self.sizes[(i / self.models.len()) % self.sizes.len()];
        (model, n, self.seed.wrapping_add(i as u64))
    }

    fn validate(&self) -> Result<()> {
        if self.models.is_empty() || self.sizes.is_empty() {
            return Err(Error::Precondition("a campaign needs at least one model and one size".into()));
        }
        if let Some(b) = self.checks.oracle {
            let cap = b.max_vertices.min(crate::exact::HARD_VERTEX_LIMIT);
            if let Some(&n) = self.sizes.iter().find(|&&n| n > cap) {
                return Err(Error::Budget(crate::error::BudgetExceeded::Vertices { n, cap }));
            }
        }
        Ok(())
    }

    /// Runs every trial in parallel; the result is ordered by trial index.
    pub fn run(&self) -> Result<Report> {
        self.validate()?;
        let start = Instant::now();
        let results: Vec<(Trial, Option<ReplayCase>)> = (0..self.trials)
            .into_par_iter()
            .map(|i| {
                let (model, n, seed) = self.plan(i);
                let inst = generate(&model, n, seed);
                let t = run_trial(&inst.graph, &model.to_string(), seed, &self.checks);
                let replay = (!t.violations.is_empty()).then(|| ReplayCase::new(&inst.graph, &t, &self.checks));
                (t, replay)
            })
            .collect();
        let (trials, replays): (Vec<Trial>, Vec<Option<ReplayCase>>) = results.into_iter().unzip();
        Ok(Report::new(trials, replays.into_iter().flatten().collect(), start.elapsed().as_secs_f64() * 1000.0))
    }
}

/// Ratio statistics over trials with a known `opt`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub with_opt: usize,
    pub violations: usize,
    /// Largest `opt / alg` over trials with `alg > 0`.
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub worst_seed: Option<u64>,
    /// Trials where `opt > 0` and `alg = 0`.
    pub zero_alg: usize,
    pub optimal: usize,
    pub recursive: usize,
    pub ops: [usize; 3],
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub summary: Summary,
    pub trials: Vec<Trial>,
    pub violations: Vec<ReplayCase>,
}

impl Report {
    pub fn new(trials: Vec<Trial>, violations: Vec<ReplayCase>, total_ms: f64) -> Self {
        let mut s = Summary { trials: trials.len(), violations: violations.len(), total_ms, ..Summary::default() };
        let mut sum = 0.0;
        let mut ratios = 0;
        for t in &trials {
            let r = &t.record;
            s.ops[0] += r.ops1;
            s.ops[1] += r.ops2;
            s.ops[2] += r.ops3;
            if r.branch_depth > 1 {
                s.recursive += 1;
            }
            let Some(opt) = r.opt else { continue };
            s.with_opt += 1;
            if opt == r.alg {
                s.optimal += 1;
            }
            if r.alg == 0 {
                if opt > 0 {
                    s.zero_alg += 1;
                }
                continue;
            }
            let ratio = opt as f64 / r.alg as f64;
            sum += ratio;
            ratios += 1;
            if s.max_ratio.map_or(true, |m| ratio > m) {
                s.max_ratio = Some(ratio);
                s.worst_seed = Some(r.seed);
            }
        }
        if ratios > 0 {
            s.mean_ratio = Some(sum / ratios as f64);
        }
        Report { summary: s, trials, violations }
    }

    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.trials.iter().map(|t| &t.record)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in self.records() {
            out.serialize(r).map_err(|e| csv_error(e.to_string()))?;
        }
        out.flush().map_err(|e| csv_error(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Copy with every timing field zeroed.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        r.summary.total_ms = 0.0;
        for t in &mut r.trials {
            t.record.ms = 0.0;
        }
        r
    }
}

fn csv_error(e: String) -> Error {
    Error::Precondition(format!("writing CSV: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize, checks: Checks) -> Campaign {
        Campaign { trials, sizes: vec![8, 11], models: vec![Model::Gnp { p: 0.3 }, Model::Clusters { noise: 0.02 }], seed: 42, checks }
    }

    fn full() -> Checks {
        Checks { oracle: Some(SearchBudget::default()), matched: true, fault: None }
    }

    #[test]
    fn clean_campaign() {
        let r = small(24, full()).run().unwrap();
        assert_eq!(r.summary.trials, 24);
        assert_eq!(r.summary.with_opt, 24);
        assert_eq!(r.summary.violations, 0, "{:?}", r.violations);
        assert!(r.summary.max_ratio.unwrap_or(1.0) <= crate::pipeline::ratio_constant());
    }

    #[test]
    fn deterministic_modulo_timing() {
        let a = small(12, full()).run().unwrap().without_timing();
        let b = small(12, full()).run().unwrap().without_timing();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn injected_fault_is_caught_and_replays() {
        let mut checks = full();
        checks.fault = Some(Fault::ShortPath);
        let r = small(4, checks).run().unwrap();
        assert_eq!(r.summary.violations, 4);
        for case in &r.violations {
            let again = case.replay().unwrap();
            assert_eq!(again.violations, case.violations);
        }
    }

    #[test]
    fn zero_opt_passes() {
        let g = Graph::path_graph(4);
        let t = run_trial(&g, "fixed", 0, &full());
        assert_eq!((t.record.alg, t.record.opt), (0, Some(0)));
        assert!(t.violations.is_empty());
    }

    #[test]
    fn oversized_oracle_campaign_is_rejected() {
        let mut c = small(1, full());
        c.sizes = vec![40];
        assert!(matches!(c.run(), Err(Error::Budget(_))));
    }

    #[test]
    fn csv_header_and_rows() {
        let r = small(3, Checks { oracle: None, matched: false, fault: None }).run().unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), CSV_COLUMNS.len());
        assert_eq!(row[5], "");
        assert_eq!(text.lines().count(), 4);
    }
}
