//! Building `H` and `M`: augmenting triples and pairs, 4-paths, absorption.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{edge, Edge, Graph, Vertex};
use crate::hstate::{ComponentKind, HComponents, HState};
use crate::matching::{maximum_matching, Matching};

/// `(u0, e0, e1)` merging into the 5-path `path`; `e0 < e1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AugmentingTriple {
    pub u0: Vertex,
    pub e0: Edge,
    pub e1: Edge,
    pub path: [Vertex; 5],
}

/// A 5-path `v1..v5` and an edge component rebuilt around `v3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AugmentingPair {
    pub five_path: [Vertex; 5],
    pub e: Edge,
    pub bridge: Edge,
    /// 1 or 4: which end edge `{v_i, v_{i+1}}` joins `v3` and `e`.
    pub i: usize,
    pub triple: AugmentingTriple,
    pub follow_up: Option<AugmentingTriple>,
}

/// The graph on edge components of `H`, adjacent when `G` joins them.
#[derive(Clone, Debug)]
pub struct AuxiliaryGraph {
    /// Component index of each node.
    pub nodes: Vec<usize>,
    pub graph: Graph,
    pub matching: Matching,
}

impl AuxiliaryGraph {
    pub fn build(g: &Graph, comps: &HComponents) -> Self {
        let nodes: Vec<usize> = comps.edge_components().collect();
        let mut node_of = vec![usize::MAX; comps.comps.len()];
        for (i, &c) in nodes.iter().enumerate() {
            node_of[c] = i;
        }
        let mut edges = BTreeSet::new();
        for &(u, v) in g.edges() {
            if let (Some(a), Some(b)) = (comps.comp_of[u], comps.comp_of[v]) {
                let (x, y) = (node_of[a], node_of[b]);
                if a != b && x != usize::MAX && y != usize::MAX {
                    edges.insert(edge(x, y));
                }
            }
        }
        let graph = Graph::new(nodes.len(), edges).expect("auxiliary edges are simple");
        let matching = maximum_matching(&graph);
        AuxiliaryGraph { nodes, graph, matching }
    }

    pub fn q4(&self) -> usize {
        self.matching.len()
    }
}

/// `q4(H)`.
pub fn q4(g: &Graph, h: &HState) -> Result<usize> {
    Ok(AuxiliaryGraph::build(g, &h.components()?).q4())
}

/// For each 10-bit adjacency pattern on 5 local vertices, the
/// lexicographically first Hamiltonian path.
fn ham_table() -> &'static Vec<Option<[u8; 5]>> {
    static TABLE: OnceLock<Vec<Option<[u8; 5]>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut perms = Vec::new();
        permutations(&mut [0u8, 1, 2, 3, 4], 0, &mut perms);
        perms.sort();
        (0..1024u32)
            .map(|mask| perms.iter().copied().find(|p| p.windows(2).all(|w| mask >> pair_bit(w[0], w[1]) & 1 == 1)))
            .collect()
    })
}

fn permutations(a: &mut [u8; 5], k: usize, out: &mut Vec<[u8; 5]>) {
    if k == a.len() {
        out.push(*a);
        return;
    }
    for i in k..a.len() {
        a.swap(k, i);
        permutations(a, k + 1, out);
        a.swap(k, i);
    }
}

fn pair_bit(a: u8, b: u8) -> u32 {
    let (a, b) = (a.min(b) as u32, a.max(b) as u32);
    // index of (a, b) among the 10 pairs of 0..5
    a * (9 - a) / 2 + (b - a - 1)
}

/// A Hamiltonian path of `G[vs]`, lexicographically first in local order.
pub fn hamiltonian_five(g: &Graph, vs: [Vertex; 5]) -> Option<[Vertex; 5]> {
    let mut mask = 0u32;
    for a in 0..5u8 {
        for b in a + 1..5u8 {
            if g.has_edge(vs[a as usize], vs[b as usize]) {
                mask |= 1 << pair_bit(a, b);
            }
        }
    }
    ham_table()[mask as usize].map(|p| p.map(|i| vs[i as usize]))
}

/// First augmenting triple in scan order, optionally restricted to triples using `with`.
pub fn find_augmenting_triple(g: &Graph, h: &HState, comps: &HComponents, with: Option<Edge>) -> Option<AugmentingTriple> {
    let edge_comp = |v: Vertex| comps.comp_of[v].filter(|&c| comps.comps[c].kind == ComponentKind::Edge);
    let ends = |c: usize| -> Edge {
        let p = &comps.comps[c].path;
        (p[0], p[1])
    };
    let required = with.and_then(|e| edge_comp(e.0));
    for u0 in (0..g.vertex_count()).filter(|&v| !h.contains(v)) {
        let near: BTreeSet<usize> = g.neighbors(u0).iter().filter_map(|&w| edge_comp(w)).collect();
        let mut pairs = BTreeSet::new();
        for &a in &near {
            let (x, y) = ends(a);
            let around = g.neighbors(x).iter().chain(g.neighbors(y)).filter_map(|&w| edge_comp(w));
            for b in near.iter().copied().chain(around) {
                if a != b {
                    let (e0, e1) = (ends(a).min(ends(b)), ends(a).max(ends(b)));
                    pairs.insert((e0, e1));
                }
            }
        }
        for (e0, e1) in pairs {
            if let Some(r) = required {
                if ends(r) != e0 && ends(r) != e1 {
                    continue;
                }
            }
            if let Some(path) = hamiltonian_five(g, [u0, e0.0, e0.1, e1.0, e1.1]) {
                return Some(AugmentingTriple { u0, e0, e1, path });
            }
        }
    }
    None
}

fn apply_triple(h: &mut HState, t: &AugmentingTriple) {
    for e in [t.e0, t.e1] {
        h.matching_mut().unset(e.0, e.1);
        h.remove_edge(e.0, e.1);
    }
    for w in t.path.windows(2) {
        h.add_edge(w[0], w[1]);
    }
    let p = t.path;
    h.matching_mut().set(p[0], p[1]);
    h.matching_mut().set(p[3], p[4]);
}

fn remove_center(h: &mut HState, five: &[Vertex; 5]) {
    h.remove_vertex(five[2]);
}

/// First augmenting pair in scan order (5-path, edge component, `i`).
pub fn find_augmenting_pair(g: &Graph, h: &HState, comps: &HComponents) -> Result<Option<AugmentingPair>> {
    let base_q4 = AuxiliaryGraph::build(g, comps).q4();
    for k in comps.comps.iter().filter(|c| c.kind == ComponentKind::FivePath) {
        let v: [Vertex; 5] = k.path.clone().try_into().expect("five vertices");
        let attach = [v[0], v[2], v[4]];
        let mut candidates = BTreeSet::new();
        for &y in &attach {
            for &x in g.neighbors(y) {
                if let Some(c) = comps.comp_of[x].filter(|&c| comps.comps[c].kind == ComponentKind::Edge) {
                    candidates.insert(c);
                }
            }
        }
        for c in candidates {
            let e = (comps.comps[c].path[0], comps.comps[c].path[1]);
            let bridge = [e.0, e.1]
                .iter()
                .flat_map(|&x| attach.iter().filter(move |&&y| g.has_edge(x, y)).map(move |&y| edge(x, y)))
                .min()
                .expect("candidate has a bridge");
            for i in [1usize, 4] {
                let end = edge(v[i - 1], v[i]);
                let (e0, e1) = (e.min(end), e.max(end));
                let Some(path) = hamiltonian_five(g, [v[2], e0.0, e0.1, e1.0, e1.1]) else {
                    continue;
                };
                let triple = AugmentingTriple { u0: v[2], e0, e1, path };
                let mut next = h.clone();
                remove_center(&mut next, &v);
                apply_triple(&mut next, &triple);
                let next_comps = next.components()?;
                let leftover = if i == 1 { (v[3], v[4]) } else { (v[0], v[1]) };
                let follow_up = find_augmenting_triple(g, &next, &next_comps, Some(leftover));
                if follow_up.is_some() || AuxiliaryGraph::build(g, &next_comps).q4() > base_q4 {
                    return Ok(Some(AugmentingPair { five_path: v, e, bridge, i, triple, follow_up }));
                }
            }
        }
    }
    Ok(None)
}

/// Counters of one phase-1 run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Phase1Stats {
    pub triples: usize,
    pub pairs: usize,
    pub follow_ups: usize,
    pub four_paths: usize,
    pub absorbed_edges: usize,
    pub modifications: usize,
}

/// Audit findings; all lists stay empty on a correct run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Phase1Audit {
    pub invariant_checks: usize,
    pub invariant_violations: Vec<String>,
    pub attach_violations: Vec<String>,
    pub q4_violations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Phase1Outcome {
    pub h: HState,
    /// After the augmentation loop.
    pub h1: HState,
    /// After edge pairs are joined into 4-paths.
    pub h2: HState,
    pub stats: Phase1Stats,
    pub audit: Phase1Audit,
}

struct Tracer<'a> {
    g: &'a Graph,
    on: bool,
    audit: Phase1Audit,
}

impl Tracer<'_> {
    fn check(&mut self, h: &HState, what: &str) {
        if self.on {
            self.audit.invariant_checks += 1;
            if let Err(e) = h.check_invariant(self.g) {
                self.audit.invariant_violations.push(format!("{what}: {e}"));
            }
        }
    }
}

/// Upper bound on augmentation-loop modifications.
pub fn modification_cap(n: usize) -> usize {
    10 * n + 100
}

/// Builds `H` from a maximum matching. With `trace`, the component invariant is checked after every modification.
pub fn phase1(g: &Graph, trace: bool) -> Result<Phase1Outcome> {
    let mut h = HState::from_matching(maximum_matching(g));
    let mut stats = Phase1Stats::default();
    let mut tr = Tracer { g, on: trace, audit: Phase1Audit::default() };
    tr.check(&h, "initial");

    let cap = modification_cap(g.vertex_count());
    loop {
        let comps = h.components()?;
        let before = if trace { AuxiliaryGraph::build(g, &comps).q4() } else { 0 };
        if let Some(t) = find_augmenting_triple(g, &h, &comps, None) {
            apply_triple(&mut h, &t);
            stats.triples += 1;
            tr.check(&h, "triple");
            if trace {
                let after = q4(g, &h)?;
                if after + 2 < before {
                    tr.audit.q4_violations.push(format!("triple {t:?}: q4 {before} -> {after}"));
                }
            }
        } else if let Some(p) = find_augmenting_pair(g, &h, &comps)? {
            remove_center(&mut h, &p.five_path);
            tr.check(&h, "pair removal");
            apply_triple(&mut h, &p.triple);
            tr.check(&h, "pair triple");
            if let Some(f) = &p.follow_up {
                apply_triple(&mut h, f);
                stats.follow_ups += 1;
                tr.check(&h, "pair follow-up");
            }
            stats.pairs += 1;
            if trace {
                let after = q4(g, &h)?;
                if after + 3 < before {
                    tr.audit.q4_violations.push(format!("pair {p:?}: q4 {before} -> {after}"));
                }
            }
        } else {
            break;
        }
        stats.modifications += 1;
        if stats.modifications > cap {
            return Err(Error::IterationBound { stage: "augmentation loop", bound: cap });
        }
    }
    let h1 = h.clone();

    let comps = h.components()?;
    let aux = AuxiliaryGraph::build(g, &comps);
    for (a, b) in aux.matching.edges() {
        let (ca, cb) = (&comps.comps[aux.nodes[a]], &comps.comps[aux.nodes[b]]);
        let link = ca
            .vertices
            .iter()
            .flat_map(|&x| cb.vertices.iter().filter(move |&&y| g.has_edge(x, y)).map(move |&y| edge(x, y)))
            .min()
            .expect("auxiliary edge has a G-edge");
        h.add_edge(link.0, link.1);
        stats.four_paths += 1;
        tr.check(&h, "four-path");
    }
    let h2 = h.clone();

    let comps2 = h2.components()?;
    let absorbing = |v: Vertex| {
        comps2.of(v).is_some_and(|c| c.kind == ComponentKind::Edge || (c.kind == ComponentKind::BiStar && c.vertices.len() == 4))
    };
    let added: Vec<Edge> = g
        .edges()
        .iter()
        .filter_map(|&(a, b)| {
            if !h2.contains(a) && absorbing(b) {
                Some((a, b))
            } else if !h2.contains(b) && absorbing(a) {
                Some((b, a))
            } else {
                None
            }
        })
        .collect();
    for &(u, v) in &added {
        h.add_edge(u, v);
        stats.absorbed_edges += 1;
        tr.check(&h, "absorption");
    }
    tr.audit.attach_violations = attach_audit(&comps2, &added);
    if !trace {
        h.components()?;
    }
    Ok(Phase1Outcome { h, h1, h2, stats, audit: tr.audit })
}

/// Shape rules for vertices attached outside `H2`; `added` holds `(u, v)` with `u` outside `H2`.
pub fn attach_audit(h2: &HComponents, added: &[Edge]) -> Vec<String> {
    let mut out = Vec::new();
    let mut by_u: std::collections::BTreeMap<Vertex, Vec<Vertex>> = Default::default();
    for &(u, v) in added {
        by_u.entry(u).or_default().push(v);
        let Some(c) = h2.of(v) else {
            out.push(format!("{v} is outside H2"));
            continue;
        };
        let ok = match c.kind {
            ComponentKind::Edge => true,
            ComponentKind::BiStar => c.centers.contains(&v),
            _ => false,
        };
        if !ok {
            out.push(format!("({u}, {v}): {v} is not an inner 4-path vertex or an edge-component end"));
        }
    }
    for (u, vs) in by_u {
        match vs.len() {
            1 => {}
            2 => {
                let same = h2.comp_of[vs[0]] == h2.comp_of[vs[1]];
                if !(same && h2.of(vs[0]).is_some_and(|c| c.kind == ComponentKind::Edge)) {
                    out.push(format!("{u} gained edges to {vs:?}, not an edge component"));
                }
            }
            _ => out.push(format!("{u} gained {} edges", vs.len())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_value, SearchBudget};
    use proptest::prelude::*;

    #[test]
    fn table_covers_path_and_complete() {
        let g = Graph::path_graph(5);
        assert_eq!(hamiltonian_five(&g, [0, 1, 2, 3, 4]), Some([0, 1, 2, 3, 4]));
        assert_eq!(hamiltonian_five(&g, [2, 0, 1, 3, 4]), Some([0, 1, 2, 3, 4]));
        let star = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(hamiltonian_five(&star, [0, 1, 2, 3, 4]), None);
        let k5 = Graph::complete_graph(5);
        assert_eq!(hamiltonian_five(&k5, [4, 3, 2, 1, 0]), Some([4, 3, 2, 1, 0]));
        let bits: BTreeSet<u32> = (0..5u8).flat_map(|a| (a + 1..5).map(move |b| pair_bit(a, b))).collect();
        assert_eq!(bits, (0..10).collect());
    }

    #[test]
    fn five_path_graph() {
        let g = Graph::path_graph(5);
        let out = phase1(&g, true).unwrap();
        let comps = out.h.components().unwrap();
        assert_eq!(comps.comps.len(), 1);
        assert_eq!(comps.comps[0].kind, ComponentKind::FivePath);
        assert_eq!(out.h.matching().edges(), vec![(0, 1), (3, 4)]);
        assert!(out.audit.invariant_violations.is_empty());
    }

    #[test]
    fn triple_merges_two_edges() {
        // edges {0,1} and {3,4} matched initially, 2 outside, joined 1-2-3
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let h = HState::from_parts(&g, &[], &[(0, 1), (3, 4)]).unwrap();
        let comps = h.components().unwrap();
        let t = find_augmenting_triple(&g, &h, &comps, None).unwrap();
        assert_eq!(t.u0, 2);
        assert_eq!(t.path, [0, 1, 2, 3, 4]);
    }

    #[test]
    fn no_triple_without_outside_vertex() {
        let g = Graph::path_graph(4);
        let h = HState::from_parts(&g, &[], &[(0, 1), (2, 3)]).unwrap();
        assert!(find_augmenting_triple(&g, &h, &h.components().unwrap(), None).is_none());
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let h = HState::from_parts(&g, &[], &[(0, 1), (2, 3)]).unwrap();
        assert!(find_augmenting_triple(&g, &h, &h.components().unwrap(), None).is_none());
    }

    #[test]
    fn q4_examples() {
        let g = Graph::path_graph(4);
        let h = HState::from_parts(&g, &[], &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(q4(&g, &h).unwrap(), 1);
        // four edge components whose auxiliary graph is a 4-path
        let g = Graph::new(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]).unwrap();
        let h = HState::from_parts(&g, &[], &[(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap();
        assert_eq!(q4(&g, &h).unwrap(), 2);
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let h = HState::from_parts(&g, &[], &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(q4(&g, &h).unwrap(), 0);
    }

    /// The left side of the single repetition figure: 5-path 0-1-2-3-4
    /// (2 unmatched), edges {5,6} under 0 and {7,8} under 3.
    fn figure_one() -> (Graph, HState) {
        let g = Graph::new(9, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (5, 6), (3, 7), (7, 8)]).unwrap();
        let h = HState::from_parts(&g, &[(0, 1), (1, 2), (2, 3), (3, 4)], &[(0, 1), (3, 4), (5, 6), (7, 8)]).unwrap();
        (g, h)
    }

    #[test]
    fn figure_one_pair() {
        let (g, h) = figure_one();
        h.check_invariant(&g).unwrap();
        let comps = h.components().unwrap();
        assert!(find_augmenting_triple(&g, &h, &comps, None).is_none());
        assert_eq!(AuxiliaryGraph::build(&g, &comps).q4(), 0);
        let p = find_augmenting_pair(&g, &h, &comps).unwrap().expect("pair");
        assert_eq!(p.e, (5, 6));
        assert_eq!(p.i, 1);
        let mut next = h.clone();
        remove_center(&mut next, &p.five_path);
        apply_triple(&mut next, &p.triple);
        assert_eq!(q4(&g, &next).unwrap(), 1);
        assert!(p.follow_up.is_none());
        next.check_invariant(&g).unwrap();
    }

    #[test]
    fn no_pair_without_five_paths() {
        let g = Graph::path_graph(4);
        let h = HState::from_parts(&g, &[], &[(0, 1), (2, 3)]).unwrap();
        assert!(find_augmenting_pair(&g, &h, &h.components().unwrap()).unwrap().is_none());
    }

    #[test]
    fn figure_one_end_to_end() {
        let (g, _) = figure_one();
        let out = phase1(&g, true).unwrap();
        assert!(out.audit.invariant_violations.is_empty(), "{:?}", out.audit);
        assert!(out.audit.attach_violations.is_empty());
        out.h.check_invariant(&g).unwrap();
    }

    #[test]
    fn absorption_makes_stars_and_triangles() {
        // edge {0,1} with 2 adjacent to both ends: triangle; edge {3,4} with 5, 6 on 4: star
        let g = Graph::new(7, [(0, 1), (0, 2), (1, 2), (3, 4), (4, 5), (4, 6)]).unwrap();
        let out = phase1(&g, true).unwrap();
        let kinds: Vec<ComponentKind> = out.h.components().unwrap().comps.iter().map(|c| c.kind).collect();
        assert_eq!(kinds, vec![ComponentKind::Triangle, ComponentKind::Star]);
        assert!(out.audit.attach_violations.is_empty());
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (1..=max_n, 0.05f64..0.6).prop_flat_map(|(n, p)| {
            let pairs: Vec<Edge> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            proptest::collection::vec(proptest::bool::weighted(p), pairs.len())
                .prop_map(move |keep| Graph::new(n, pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&e, _)| e)).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]
        #[test]
        fn invariant_holds_throughout(g in arb_graph(16)) {
            let out = phase1(&g, true).unwrap();
            prop_assert!(out.audit.invariant_violations.is_empty(), "{:?}", out.audit.invariant_violations);
            prop_assert!(out.audit.attach_violations.is_empty(), "{:?}", out.audit.attach_violations);
            prop_assert!(out.audit.q4_violations.is_empty());
            prop_assert!(out.stats.modifications <= modification_cap(g.vertex_count()));
            for c in out.h2.components().unwrap().comps {
                prop_assert!(matches!(c.kind, ComponentKind::Edge | ComponentKind::BiStar | ComponentKind::FivePath));
            }
        }

        #[test]
        fn matched_vertices_bound(g in arb_graph(12)) {
            let m = maximum_matching(&g);
            let opt = exact_value(&g, &SearchBudget::default()).unwrap();
            prop_assert!(5 * m.covered() >= 4 * opt);
        }
    }
}
