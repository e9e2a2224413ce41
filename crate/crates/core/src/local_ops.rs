//! Operations 1 to 3 on the cover `C`, driven by the potential
//! `g = n_0 + 5 n_c - 6 n_cc`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{cover_weight, prune_cover};
use crate::graph::{edge, Edge, Graph, Vertex};
use crate::hstate::{ComponentKind, HComponents};
use crate::structure::{analyze, AnchorClass, Analysis, Potential, Satellite};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum OpKind {
    Op1,
    Op2,
    Op3,
}

/// An applicable operation: move critical satellite `s1` along `{v1, v2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub kind: OpKind,
    pub v1: Vertex,
    pub v2: Vertex,
    pub s1: Satellite,
    /// The satellite containing `v2` for operations 2 and 3.
    pub s2: Option<Satellite>,
}

/// One applied operation with the potential before and after.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AppliedOp {
    pub kind: OpKind,
    pub v1: Vertex,
    pub v2: Vertex,
    pub g_before: i64,
    pub g_after: i64,
}

/// `C` together with the centers fixed by operations 2 and 3.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoverState {
    pub cover: Vec<Edge>,
    pub designated: Vec<usize>,
}

impl CoverState {
    pub fn new(mut cover: Vec<Edge>) -> Self {
        cover.sort_unstable();
        CoverState { cover, designated: Vec::new() }
    }

    fn swap(&mut self, out: &[Edge], add: Edge) {
        self.cover.retain(|e| !out.contains(e));
        self.cover.push(add);
        self.cover.sort_unstable();
    }

    pub fn apply(&mut self, c: &Candidate) {
        let new = edge(c.v1, c.v2);
        match (c.kind, c.s2) {
            (OpKind::Op1, _) => self.swap(&[c.s1.rescue_edge()], new),
            (OpKind::Op2, Some(s2)) => {
                self.swap(&[c.s1.rescue_edge()], new);
                self.designated.push(s2.comp);
            }
            (OpKind::Op3, Some(s2)) => {
                self.swap(&[c.s1.rescue_edge(), s2.rescue_edge()], new);
                self.designated.push(s2.comp);
            }
            _ => unreachable!("operations 2 and 3 carry a second satellite"),
        }
    }
}

/// Upper bound on applied operations: `g` ranges over `[-6n, 6n]`.
pub fn op_cap(n: usize) -> usize {
    12 * n + 1
}

/// Edges `{v1, v2} ∉ C` leaving a critical satellite, sorted by `(v1, v2)`.
fn moves(g: &Graph, comps: &HComponents, a: &Analysis, cover: &[Edge]) -> Vec<(Vertex, Vertex, Satellite)> {
    let mut out = Vec::new();
    for (_, s1) in a.critical_satellites() {
        for &v1 in &comps.comps[s1.comp].vertices {
            for &v2 in g.neighbors(v1) {
                if comps.comp_of[v2] != Some(s1.comp) && cover.binary_search(&edge(v1, v2)).is_err() {
                    out.push((v1, v2, s1));
                }
            }
        }
    }
    out.sort();
    out
}

/// First applicable operation: operation 1 over all moves, then 2, then 3.
pub fn find_operation(g: &Graph, comps: &HComponents, a: &Analysis, cover: &[Edge]) -> Option<Candidate> {
    let ms = moves(g, comps, a, cover);
    for &(v1, v2, s1) in &ms {
        if let Some((_, x)) = a.anchor_of(comps, v2) {
            let ok = match x.class {
                AnchorClass::ZeroAnchor => true,
                AnchorClass::O0 | AnchorClass::O1 => !x.responsible,
                _ => false,
            };
            if ok {
                return Some(Candidate { kind: OpKind::Op1, v1, v2, s1, s2: None });
            }
        }
    }
    for kind in [OpKind::Op2, OpKind::Op3] {
        for &(v1, v2, s1) in &ms {
            let Some((m2, s2)) = a.satellite_of(comps, v2) else { continue };
            if s2.comp == s1.comp {
                continue;
            }
            let k2 = &a.reports[m2].member;
            let center = comps.comps[k2.center].kind;
            let fits = match kind {
                OpKind::Op2 => center != ComponentKind::FivePath && k2.satellites.len() == 1,
                _ => center == ComponentKind::FivePath || k2.satellites.len() >= 2,
            };
            if fits {
                return Some(Candidate { kind, v1, v2, s1, s2: Some(s2) });
            }
        }
    }
    None
}

/// Every edge leaving a critical satellite ends at a
/// 2-anchor or a responsible 1-anchor.
pub fn exit_edge_audit(g: &Graph, comps: &HComponents, a: &Analysis) -> Vec<String> {
    let mut out = Vec::new();
    for (_, s1) in a.critical_satellites() {
        for &v1 in &comps.comps[s1.comp].vertices {
            for &v2 in g.neighbors(v1) {
                if comps.comp_of[v2] == Some(s1.comp) {
                    continue;
                }
                let ok = a.anchor_of(comps, v2).is_some_and(|(_, x)| x.class.order() == 2 || x.responsible);
                if !ok {
                    out.push(format!("edge ({v1}, {v2}) leaves critical satellite {} to a non-anchor or free anchor", s1.comp));
                }
            }
        }
    }
    out
}

/// Findings of the operation audits; all empty on a correct run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LocalAudit {
    pub non_decreasing: Vec<String>,
    pub weight_changes: Vec<String>,
    pub new_isolated_bad: Vec<String>,
    pub exit_edges: Vec<String>,
}

impl LocalAudit {
    pub fn violations(&self) -> usize {
        self.non_decreasing.len() + self.weight_changes.len() + self.new_isolated_bad.len() + self.exit_edges.len()
    }

    pub fn merge(&mut self, other: LocalAudit) {
        self.non_decreasing.extend(other.non_decreasing);
        self.weight_changes.extend(other.weight_changes);
        self.new_isolated_bad.extend(other.new_isolated_bad);
        self.exit_edges.extend(other.exit_edges);
    }
}

#[derive(Clone, Debug)]
pub struct LocalOutcome {
    pub state: CoverState,
    /// Analysis of the final, re-pruned cover.
    pub analysis: Analysis,
    pub trace: Vec<AppliedOp>,
    pub audit: LocalAudit,
}

impl LocalOutcome {
    pub fn count(&self, kind: OpKind) -> usize {
        self.trace.iter().filter(|o| o.kind == kind).count()
    }
}

/// Applies operations until none is applicable, then re-prunes `C`.
pub fn run_until_stable(g: &Graph, comps: &HComponents, cover: Vec<Edge>) -> Result<LocalOutcome> {
    let mut state = CoverState::new(cover);
    let mut analysis = analyze(g, comps, &state.cover, &state.designated)?;
    let weight = cover_weight(&state.cover, comps);
    let mut audit = LocalAudit::default();
    let mut trace = Vec::new();
    let cap = op_cap(g.vertex_count());
    while let Some(c) = find_operation(g, comps, &analysis, &state.cover) {
        if trace.len() == cap {
            return Err(Error::IterationBound { stage: "local operations", bound: cap });
        }
        let before = Potential::of(&analysis).value();
        let isolated: BTreeSet<usize> = analysis.isolated_bad.iter().copied().collect();
        state.apply(&c);
        analysis = analyze(g, comps, &state.cover, &state.designated)?;
        let after = Potential::of(&analysis).value();
        if after >= before {
            audit.non_decreasing.push(format!("{:?} on ({}, {}): g {before} -> {after}", c.kind, c.v1, c.v2));
        }
        let w = cover_weight(&state.cover, comps);
        if w != weight {
            audit.weight_changes.push(format!("{:?} on ({}, {}): weight {weight} -> {w}", c.kind, c.v1, c.v2));
        }
        for b in &analysis.isolated_bad {
            if !isolated.contains(b) {
                audit.new_isolated_bad.push(format!("{:?} on ({}, {}) isolates component {b}", c.kind, c.v1, c.v2));
            }
        }
        trace.push(AppliedOp { kind: c.kind, v1: c.v1, v2: c.v2, g_before: before, g_after: after });
    }
    let pruned = prune_cover(&state.cover, comps);
    if pruned != state.cover {
        state.cover = pruned;
        analysis = analyze(g, comps, &state.cover, &state.designated)?;
    }
    audit.exit_edges = exit_edge_audit(g, comps, &analysis);
    Ok(LocalOutcome { state, analysis, trace, audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::rescue;
    use crate::hstate::HState;
    use crate::phase1::phase1;
    use proptest::prelude::*;

    fn bistar(a: usize) -> ([Edge; 3], [Edge; 2]) {
        ([(a, a + 1), (a + 1, a + 2), (a + 2, a + 3)], [(a, a + 1), (a + 2, a + 3)])
    }

    struct Built {
        g: Graph,
        comps: HComponents,
        cover: Vec<Edge>,
    }

    /// Critical component on 0..14 (bi-star center, T2 at 1, O0 at 2) plus
    /// the given extra elements and edges.
    fn critical_plus(n: usize, h_extra: &[Edge], m_extra: &[Edge], cover_extra: &[Edge], g_extra: &[Edge]) -> Built {
        let mut h = Vec::new();
        let mut m = Vec::new();
        for a in [0, 4, 8] {
            let (e, mm) = bistar(a);
            h.extend(e);
            m.extend(mm);
        }
        h.push((12, 13));
        m.push((12, 13));
        h.extend(h_extra);
        m.extend(m_extra);
        let mut cover = vec![(1, 5), (1, 9), (2, 12)];
        cover.extend(cover_extra);
        let g = Graph::new(n, h.iter().chain(&cover).chain(g_extra).copied()).unwrap();
        let comps = HState::from_parts(&g, &h, &m).unwrap().components().unwrap();
        cover.sort_unstable();
        Built { g, comps, cover }
    }

    #[test]
    fn potential_examples() {
        assert_eq!(Potential { n0: 3, nc: 2, ncc: 4 }.value(), -11);
        assert_eq!(Potential { n0: 0, nc: 0, ncc: 3 }.value(), -18);
        assert_eq!(Potential { n0: 0, nc: 1, ncc: 1 }.value(), -1);
    }

    #[test]
    fn stable_without_critical_components() {
        let g = Graph::path_graph(12);
        let out = phase1(&g, false).unwrap();
        let comps = out.h.components().unwrap();
        let ctx = rescue(&g, &comps).unwrap();
        let res = run_until_stable(&g, &comps, ctx.cover.clone()).unwrap();
        assert!(res.trace.is_empty());
        assert_eq!(res.state.cover, ctx.cover);
    }

    #[test]
    fn op1_to_a_zero_anchor_elsewhere() {
        // isolated 5-path 14..19; bi-star 4..8 also touches 16
        let b = critical_plus(19, &[(14, 15), (15, 16), (16, 17), (17, 18)], &[(14, 15), (17, 18)], &[], &[(4, 16)]);
        let a = analyze(&b.g, &b.comps, &b.cover, &[]).unwrap();
        assert_eq!(a.critical_count(), 1);
        let c = find_operation(&b.g, &b.comps, &a, &b.cover).unwrap();
        assert_eq!((c.kind, c.v1, c.v2), (OpKind::Op1, 4, 16));
        let res = run_until_stable(&b.g, &b.comps, b.cover.clone()).unwrap();
        assert_eq!(res.trace.len(), 1);
        assert!(res.trace[0].g_after < res.trace[0].g_before);
        assert_eq!(res.analysis.critical_count(), 0);
        assert!(res.state.cover.contains(&(4, 16)) && !res.state.cover.contains(&(1, 5)));
        assert_eq!(res.audit.violations(), 0, "{:?}", res.audit);
    }

    #[test]
    fn op1_within_the_same_component() {
        // bi-star 4..8 also touches the 0-anchor 3
        let b = critical_plus(14, &[], &[], &[], &[(3, 7)]);
        let a = analyze(&b.g, &b.comps, &b.cover, &[]).unwrap();
        let c = find_operation(&b.g, &b.comps, &a, &b.cover).unwrap();
        assert_eq!((c.kind, c.v1, c.v2), (OpKind::Op1, 7, 3));
        let res = run_until_stable(&b.g, &b.comps, b.cover.clone()).unwrap();
        let t = res.trace[0];
        assert!(t.g_before - t.g_after >= 5);
        assert_eq!(res.analysis.critical_count(), 0);
    }

    #[test]
    fn op2_promotes_the_lone_satellite() {
        // second member: bi-star center 14..18 with lone bi-star satellite 18..22;
        // bi-star 4..8 touches 21
        let mut h = Vec::new();
        let mut m = Vec::new();
        for a in [14, 18] {
            let (e, mm) = bistar(a);
            h.extend(e);
            m.extend(mm);
        }
        let b = critical_plus(22, &h, &m, &[(15, 19)], &[(4, 21)]);
        let a = analyze(&b.g, &b.comps, &b.cover, &[]).unwrap();
        let k2 = a.reports.iter().find(|r| r.member.vertices.contains(&14)).unwrap();
        assert_eq!(Some(k2.member.center), b.comps.comp_of[14]);
        assert_eq!(k2.metrics.s, 8);
        let c = find_operation(&b.g, &b.comps, &a, &b.cover).unwrap();
        assert_eq!((c.kind, c.v1, c.v2), (OpKind::Op2, 4, 21));
        let res = run_until_stable(&b.g, &b.comps, b.cover.clone()).unwrap();
        assert_eq!(res.trace[0].kind, OpKind::Op2);
        let k2 = res.analysis.reports.iter().find(|r| r.member.vertices.contains(&14)).unwrap();
        assert_eq!(Some(k2.member.center), b.comps.comp_of[18]);
        assert_eq!(k2.metrics.s, 12);
        assert!(!k2.critical);
        assert_eq!(res.audit.violations(), 0, "{:?}", res.audit);
    }

    #[test]
    fn op3_splits_off_a_pair() {
        // second member: 5-path 14..19 with bi-star satellites 19..23 at 15 and 23..27 at 17;
        // bi-star 4..8 touches 22
        let mut h = vec![(14, 15), (15, 16), (16, 17), (17, 18)];
        let mut m = vec![(14, 15), (17, 18)];
        for a in [19, 23] {
            let (e, mm) = bistar(a);
            h.extend(e);
            m.extend(mm);
        }
        let b = critical_plus(27, &h, &m, &[(15, 20), (17, 24)], &[(4, 22)]);
        let a = analyze(&b.g, &b.comps, &b.cover, &[]).unwrap();
        let c = find_operation(&b.g, &b.comps, &a, &b.cover).unwrap();
        assert_eq!((c.kind, c.v1, c.v2), (OpKind::Op3, 4, 22));
        let res = run_until_stable(&b.g, &b.comps, b.cover.clone()).unwrap();
        assert_eq!(res.trace[0].kind, OpKind::Op3);
        assert_eq!(res.analysis.ncc, a.ncc + 1);
        let k3 = res.analysis.reports.iter().find(|r| r.member.vertices.contains(&4)).unwrap();
        assert_eq!(Some(k3.member.center), b.comps.comp_of[19]);
        assert!(k3.metrics.s <= 8);
        assert_eq!(res.audit.violations(), 0, "{:?}", res.audit);
    }

    #[test]
    fn cap_is_twelve_n_plus_one() {
        assert_eq!(op_cap(10), 121);
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (6..=max_n, 0.08f64..0.4).prop_flat_map(|(n, p)| {
            let pairs: Vec<Edge> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            proptest::collection::vec(proptest::bool::weighted(p), pairs.len())
                .prop_map(move |keep| Graph::new(n, pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&e, _)| e)).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]
        #[test]
        fn operations_decrease_potential(g in arb_graph(30)) {
            let out = phase1(&g, false).unwrap();
            let comps = out.h.components().unwrap();
            let ctx = rescue(&g, &comps).unwrap();
            let res = run_until_stable(&g, &comps, ctx.cover.clone()).unwrap();
            prop_assert_eq!(res.audit.violations(), 0, "{:?}", res.audit);
            prop_assert!(res.trace.len() <= op_cap(g.vertex_count()));
            prop_assert!(find_operation(&g, &comps, &res.analysis, &res.state.cover).is_none());
        }
    }
}
