//! Rescue edges: the graph `G'`, maximum-weight path-cycle covers via
//! `[f, g]`-factors, pruning, and `M_C`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, UnionFind};
use crate::hstate::{ComponentKind, HComponents};
use crate::weighted::{max_weight_matching, WeightedEdge};

/// `G'`: edges of `G` between two different components of `H`, at least one bad.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RescueGraph {
    pub eligible: Vec<Edge>,
}

impl RescueGraph {
    pub fn contains(&self, e: Edge) -> bool {
        self.eligible.binary_search(&e).is_ok()
    }
}

pub fn build_rescue_graph(g: &Graph, comps: &HComponents) -> RescueGraph {
    let eligible = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| match (comps.comp_of[u], comps.comp_of[v]) {
            (Some(a), Some(b)) => a != b && (comps.comps[a].is_bad() || comps.comps[b].is_bad()),
            _ => false,
        })
        .collect();
    RescueGraph { eligible }
}

/// Role of an edge in the factor instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FgEdgeKind {
    /// An edge of `G'`.
    Rescue(Edge),
    /// `{x_i, v}` or `{y_i, v}` for `v` in bad component `i`.
    Attach(usize),
    /// `{x_i, z_i}` or `{y_i, z_i}`.
    Reward(usize),
}

/// The `[f, g]`-factor instance on `V(G) ∪ X`. Vertex `n + 3i` is `x_i`,
/// `n + 3i + 1` is `y_i`, `n + 3i + 2` is `z_i` for the `i`-th bad component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgInstance {
    pub base_n: usize,
    /// Component index of each bad component, in order.
    pub bad: Vec<usize>,
    pub edges: Vec<WeightedEdge>,
    pub kinds: Vec<FgEdgeKind>,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl FgInstance {
    pub fn vertex_count(&self) -> usize {
        self.lower.len()
    }

    pub fn weight(&self, factor: &[usize]) -> i64 {
        factor.iter().map(|&i| self.edges[i].2).sum()
    }

    /// Checks `f(v) <= deg_F(v) <= g(v)` everywhere.
    pub fn is_factor(&self, factor: &[usize]) -> bool {
        let mut deg = vec![0; self.vertex_count()];
        for &i in factor {
            deg[self.edges[i].0] += 1;
            deg[self.edges[i].1] += 1;
        }
        (0..deg.len()).all(|v| self.lower[v] <= deg[v] && deg[v] <= self.upper[v])
    }
}

pub fn build_fg_instance(rg: &RescueGraph, comps: &HComponents) -> FgInstance {
    let n = comps.comp_of.len();
    let bad: Vec<usize> = (0..comps.comps.len()).filter(|&c| comps.comps[c].is_bad()).collect();
    let mut lower = vec![0; n + 3 * bad.len()];
    let mut upper = vec![2; n + 3 * bad.len()];
    let mut edges = Vec::new();
    let mut kinds = Vec::new();
    for &e in &rg.eligible {
        edges.push((e.0, e.1, 0));
        kinds.push(FgEdgeKind::Rescue(e));
    }
    for (i, &c) in bad.iter().enumerate() {
        let comp = &comps.comps[c];
        let (x, y, z) = (n + 3 * i, n + 3 * i + 1, n + 3 * i + 2);
        for &v in &comp.vertices {
            lower[v] = 2;
            for hub in [x, y] {
                edges.push((v, hub, 0));
                kinds.push(FgEdgeKind::Attach(i));
            }
        }
        upper[x] = comp.vertices.len();
        upper[y] = comp.vertices.len();
        upper[z] = 1;
        let w = if comp.kind == ComponentKind::BiStar { 2 } else { 1 };
        for hub in [x, y] {
            edges.push((hub, z, w));
            kinds.push(FgEdgeKind::Reward(i));
        }
    }
    FgInstance { base_n: n, bad, edges, kinds, lower, upper }
}

/// A maximum-weight `[f, g]`-factor, as indices into the instance edges.
pub fn max_weight_fg_factor(inst: &FgInstance) -> Result<Vec<usize>> {
    solve_fg(inst.vertex_count(), &inst.edges, &inst.lower, &inst.upper)
}

/// Maximum-weight `[f, g]`-factor of a general graph with non-negative
/// integer weights, by reduction to maximum-weight matching.
///
/// Each vertex with a binding bound becomes `min(g, deg)` copies, the first
/// `f` of them mandatory. An edge between two such vertices becomes a pair of
/// nodes joined by a heavy edge, each attached to all copies of its side; it
/// is in the factor exactly when both nodes are matched to copies. Mandatory
/// copies carry a bonus larger than any achievable weight, so a feasible
/// factor is preferred whenever one exists.
pub fn solve_fg(n: usize, edges: &[WeightedEdge], lower: &[usize], upper: &[usize]) -> Result<Vec<usize>> {
    let mut deg = vec![0usize; n];
    for &(u, v, w) in edges {
        assert!(w >= 0, "factor weights must be non-negative");
        deg[u] += 1;
        deg[v] += 1;
    }
    if (0..n).any(|v| lower[v] > upper[v] || lower[v] > deg[v]) {
        return Err(Error::Infeasible);
    }
    let mut uf = UnionFind::new(n);
    for &(u, v, _) in edges {
        uf.union(u, v);
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &(u, _, _)) in edges.iter().enumerate() {
        by_root.entry(uf.find(u)).or_default().push(i);
    }
    let mut chosen = Vec::new();
    for idx in by_root.values() {
        chosen.extend(solve_connected(edges, idx, &deg, lower, upper)?);
    }
    chosen.sort_unstable();

    let mut got = vec![0usize; n];
    for &i in &chosen {
        got[edges[i].0] += 1;
        got[edges[i].1] += 1;
    }
    if (0..n).any(|v| got[v] < lower[v] || got[v] > upper[v]) {
        return Err(Error::Infeasible);
    }
    Ok(chosen)
}

fn solve_connected(edges: &[WeightedEdge], idx: &[usize], deg: &[usize], lower: &[usize], upper: &[usize]) -> Result<Vec<usize>> {
    let free = |v: usize| lower[v] == 0 && upper[v] >= deg[v];
    let sum_w: i64 = idx.iter().map(|&i| edges[i].2).sum();
    let bonus = 2 * sum_w + 1;
    let base = bonus + sum_w + 1;

    let mut nodes = 0usize;
    let mut copies: std::collections::HashMap<usize, (usize, usize)> = Default::default();
    for &i in idx {
        for v in [edges[i].0, edges[i].1] {
            if !free(v) && !copies.contains_key(&v) {
                let c = upper[v].min(deg[v]);
                copies.insert(v, (nodes, c));
                nodes += c;
            }
        }
    }
    let mut wedges: Vec<WeightedEdge> = Vec::new();
    let mut always = Vec::new();
    // per edge: the gadget node(s) that must be matched to a copy
    let mut probes: Vec<(usize, Vec<usize>)> = Vec::new();
    let attach = |wedges: &mut Vec<WeightedEdge>, v: usize, node: usize, extra: i64| {
        let (start, count) = copies[&v];
        for j in 0..count {
            let mandatory = if j < lower[v] { bonus } else { 0 };
            wedges.push((start + j, node, extra + mandatory));
        }
    };
    for &i in idx {
        let (u, v, w) = edges[i];
        match (free(u), free(v)) {
            (true, true) => {
                if w > 0 {
                    always.push(i);
                }
            }
            (false, true) | (true, false) => {
                let side = if free(v) { u } else { v };
                let node = nodes;
                nodes += 1;
                attach(&mut wedges, side, node, w);
                probes.push((i, vec![node]));
            }
            (false, false) => {
                let (eu, ev) = (nodes, nodes + 1);
                nodes += 2;
                wedges.push((eu, ev, 2 * base));
                attach(&mut wedges, u, eu, base + w);
                attach(&mut wedges, v, ev, base);
                probes.push((i, vec![eu, ev]));
            }
        }
    }
    let mate = max_weight_matching(nodes, &wedges);
    let is_copy = |x: usize| copies.values().any(|&(s, c)| s <= x && x < s + c);
    let mut chosen = always;
    for (i, ns) in probes {
        if ns.iter().all(|&x| mate[x].is_some_and(is_copy)) {
            chosen.push(i);
        }
    }
    Ok(chosen)
}

/// `C = F ∩ E(G')`, sorted.
pub fn extract_cover(inst: &FgInstance, factor: &[usize]) -> Vec<Edge> {
    let mut cover: Vec<Edge> = factor
        .iter()
        .filter_map(|&i| match inst.kinds[i] {
            FgEdgeKind::Rescue(e) => Some(e),
            _ => None,
        })
        .collect();
    cover.sort_unstable();
    cover
}

/// Components touched by some cover edge.
pub fn rescued(cover: &[Edge], comps: &HComponents) -> BTreeSet<usize> {
    cover.iter().flat_map(|&(u, v)| [comps.comp_of[u], comps.comp_of[v]]).flatten().collect()
}

/// Total weight of the bad components rescued by `cover`.
pub fn cover_weight(cover: &[Edge], comps: &HComponents) -> u32 {
    rescued(cover, comps).into_iter().map(|c| &comps.comps[c]).filter(|c| c.is_bad()).map(|c| c.kind.weight()).sum()
}

/// Drops, in lexicographic order, every edge whose removal keeps the weight.
/// One pass suffices: removals never make a kept edge redundant.
pub fn prune_cover(cover: &[Edge], comps: &HComponents) -> Vec<Edge> {
    let mut kept: Vec<Edge> = cover.to_vec();
    kept.sort_unstable();
    let mut weight = cover_weight(&kept, comps);
    let mut i = 0;
    while i < kept.len() {
        let e = kept.remove(i);
        let w = cover_weight(&kept, comps);
        if w == weight {
            weight = w;
        } else {
            kept.insert(i, e);
            i += 1;
        }
    }
    kept
}

/// `M_C`: matching edges inside 5-paths or rescued bad components.
pub fn compute_m_c(cover: &[Edge], comps: &HComponents) -> Vec<Edge> {
    let saved = rescued(cover, comps);
    let mut out: Vec<Edge> = comps
        .comps
        .iter()
        .enumerate()
        .filter(|(i, c)| c.kind == ComponentKind::FivePath || saved.contains(i))
        .flat_map(|(_, c)| c.m_edges.iter().copied())
        .collect();
    out.sort_unstable();
    out
}

/// Cover `C` with its derived `M_C`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverContext {
    pub cover: Vec<Edge>,
    pub m_c: Vec<Edge>,
    pub weight: u32,
}

impl CoverContext {
    pub fn new(cover: Vec<Edge>, comps: &HComponents) -> Self {
        let mut cover = cover;
        cover.sort_unstable();
        let m_c = compute_m_c(&cover, comps);
        let weight = cover_weight(&cover, comps);
        CoverContext { cover, m_c, weight }
    }

    /// `|V(M_C)|`.
    pub fn matched_vertices(&self) -> usize {
        2 * self.m_c.len()
    }
}

/// Steps 2.1 to 2.3: maximum-weight cover, pruned, with `M_C`.
pub fn rescue(g: &Graph, comps: &HComponents) -> Result<CoverContext> {
    let rg = build_rescue_graph(g, comps);
    let inst = build_fg_instance(&rg, comps);
    let factor = max_weight_fg_factor(&inst)?;
    let cover = extract_cover(&inst, &factor);
    let pruned = prune_cover(&cover, comps);
    Ok(CoverContext::new(pruned, comps))
}

/// Maximum cover weight over all degree-2-bounded subsets of `G'` (oracle, few edges).
pub fn brute_force_cover_weight(rg: &RescueGraph, comps: &HComponents) -> u32 {
    let m = rg.eligible.len();
    assert!(m <= 24, "brute force cover weight is limited to 24 edges");
    let n = comps.comp_of.len();
    let mut best = 0;
    let mut deg = vec![0u8; n];
    for mask in 0u32..(1 << m) {
        deg.iter_mut().for_each(|d| *d = 0);
        let mut ok = true;
        let mut chosen = Vec::new();
        for (i, &(u, v)) in rg.eligible.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[u] += 1;
                deg[v] += 1;
                ok &= deg[u] <= 2 && deg[v] <= 2;
                chosen.push((u, v));
            }
        }
        if ok {
            best = best.max(cover_weight(&chosen, comps));
        }
    }
    best
}
