//! Maximum cardinality matching in general graphs (Edmonds' blossom search).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};

/// A set of pairwise disjoint edges, stored as a mate table.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Matching {
    mate: Vec<Option<Vertex>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching { mate: vec![None; n] }
    }

    /// Fails if two edges share an endpoint or an edge is missing from `g`.
    pub fn from_edges(g: &Graph, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut m = Matching::empty(g.vertex_count());
        for (u, v) in edges {
            if !g.has_edge(u, v) {
                return Err(Error::InvalidMatching(format!("({u}, {v}) is not an edge")));
            }
            if m.mate[u].is_some() || m.mate[v].is_some() {
                return Err(Error::InvalidMatching(format!("edge ({u}, {v}) shares an endpoint")));
            }
            m.mate[u] = Some(v);
            m.mate[v] = Some(u);
        }
        Ok(m)
    }

    pub fn vertex_count(&self) -> usize {
        self.mate.len()
    }

    pub fn mate(&self, v: Vertex) -> Option<Vertex> {
        self.mate[v]
    }

    pub fn is_matched(&self, v: Vertex) -> bool {
        self.mate[v].is_some()
    }

    pub fn contains(&self, u: Vertex, v: Vertex) -> bool {
        self.mate[u] == Some(v)
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.mate.iter().filter(|m| m.is_some()).count() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.mate.iter().all(Option::is_none)
    }

    /// `|V(M)|`.
    pub fn covered(&self) -> usize {
        self.mate.iter().filter(|m| m.is_some()).count()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        (0..self.mate.len()).filter_map(|u| self.mate[u].filter(|&v| u < v).map(|v| (u, v))).collect()
    }

    pub(crate) fn set(&mut self, u: Vertex, v: Vertex) {
        debug_assert!(self.mate[u].is_none() && self.mate[v].is_none());
        self.mate[u] = Some(v);
        self.mate[v] = Some(u);
    }

    pub(crate) fn unset(&mut self, u: Vertex, v: Vertex) {
        debug_assert!(self.contains(u, v));
        self.mate[u] = None;
        self.mate[v] = None;
    }

    fn augment(&mut self, path: &[Vertex]) {
        for pair in path.chunks(2) {
            self.mate[pair[0]] = Some(pair[1]);
            self.mate[pair[1]] = Some(pair[0]);
        }
    }

    fn is_valid_in(&self, g: &Graph) -> Result<()> {
        if self.mate.len() != g.vertex_count() {
            return Err(Error::InvalidMatching("size differs from the graph".into()));
        }
        for (u, m) in self.mate.iter().enumerate() {
            if let Some(v) = *m {
                if self.mate.get(v).copied().flatten() != Some(u) {
                    return Err(Error::InvalidMatching(format!("mate table is not symmetric at {u}")));
                }
                if !g.has_edge(u, v) {
                    return Err(Error::InvalidMatching(format!("({u}, {v}) is not an edge")));
                }
            }
        }
        Ok(())
    }
}

/// A maximum matching of `g`: greedy in edge order, then augmentation from
/// every free vertex in increasing order.
pub fn maximum_matching(g: &Graph) -> Matching {
    let mut m = Matching::empty(g.vertex_count());
    for &(u, v) in g.edges() {
        if !m.is_matched(u) && !m.is_matched(v) {
            m.set(u, v);
        }
    }
    let mut search = BlossomSearch::new(g.vertex_count());
    for root in 0..g.vertex_count() {
        if !m.is_matched(root) {
            if let Some(path) = search.run(g, &m, root) {
                m.augment(&path);
            }
        }
    }
    m
}

/// `Ok(None)` if `m` is maximum, otherwise an augmenting path whose end
/// vertices are free and whose edges alternate starting with a non-matching edge.
pub fn certify_maximum(g: &Graph, m: &Matching) -> Result<Option<Vec<Vertex>>> {
    m.is_valid_in(g)?;
    let mut search = BlossomSearch::new(g.vertex_count());
    for root in 0..g.vertex_count() {
        if !m.is_matched(root) {
            if let Some(path) = search.run(g, m, root) {
                return Ok(Some(path));
            }
        }
    }
    Ok(None)
}

/// Reusable buffers for the single-root alternating-tree search.
struct BlossomSearch {
    parent: Vec<usize>,
    base: Vec<usize>,
    in_queue: Vec<bool>,
    in_blossom: Vec<bool>,
    seen: Vec<bool>,
    queue: VecDeque<usize>,
}

const NIL: usize = usize::MAX;

impl BlossomSearch {
    fn new(n: usize) -> Self {
        BlossomSearch {
            parent: vec![NIL; n],
            base: (0..n).collect(),
            in_queue: vec![false; n],
            in_blossom: vec![false; n],
            seen: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn mate(m: &Matching, v: usize) -> usize {
        m.mate(v).unwrap_or(NIL)
    }

    fn lca(&mut self, m: &Matching, mut a: usize, mut b: usize) -> usize {
        self.seen.fill(false);
        loop {
            a = self.base[a];
            self.seen[a] = true;
            let ma = Self::mate(m, a);
            if ma == NIL {
                break;
            }
            a = self.parent[ma];
        }
        loop {
            b = self.base[b];
            if self.seen[b] {
                return b;
            }
            b = self.parent[Self::mate(m, b)];
        }
    }

    fn mark_path(&mut self, m: &Matching, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            let mv = Self::mate(m, v);
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[mv]] = true;
            self.parent[v] = child;
            child = mv;
            v = self.parent[mv];
        }
    }

    fn run(&mut self, g: &Graph, m: &Matching, root: usize) -> Option<Vec<Vertex>> {
        let n = g.vertex_count();
        self.parent.fill(NIL);
        self.in_queue.fill(false);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.queue.push_back(root);
        self.in_queue[root] = true;

        while let Some(v) = self.queue.pop_front() {
            for &to in g.neighbors(v) {
                if self.base[v] == self.base[to] || Self::mate(m, v) == to {
                    continue;
                }
                let mto = Self::mate(m, to);
                if to == root || (mto != NIL && self.parent[mto] != NIL) {
                    let cur = self.lca(m, v, to);
                    self.in_blossom.fill(false);
                    self.mark_path(m, v, cur, to);
                    self.mark_path(m, to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.in_queue[i] {
                                self.in_queue[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NIL {
                    self.parent[to] = v;
                    if mto == NIL {
                        return Some(self.trace(m, to, root));
                    }
                    self.in_queue[mto] = true;
                    self.queue.push_back(mto);
                }
            }
        }
        None
    }

    fn trace(&self, m: &Matching, end: usize, root: usize) -> Vec<Vertex> {
        let mut path = Vec::new();
        let mut v = end;
        loop {
            let p = self.parent[v];
            path.push(v);
            path.push(p);
            if p == root {
                break;
            }
            v = Self::mate(m, p);
        }
        path.reverse();
        path
    }
}

/// Size of a maximum matching, computed by exhaustive search (test oracle, `n <= 20`).
pub fn brute_force_matching_size(g: &Graph) -> usize {
    let n = g.vertex_count();
    assert!(n <= 20, "brute force matching is limited to 20 vertices");
    let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |acc, &w| acc | 1 << w)).collect();
    let mut memo = vec![u8::MAX; 1 << n];
    fn rec(mask: u32, adj: &[u32], memo: &mut [u8]) -> u8 {
        if mask == 0 {
            return 0;
        }
        if memo[mask as usize] != u8::MAX {
            return memo[mask as usize];
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut best = rec(rest, adj, memo);
        let mut cand = adj[v] & rest;
        while cand != 0 {
            let w = cand.trailing_zeros();
            cand &= cand - 1;
            best = best.max(1 + rec(rest & !(1 << w), adj, memo));
        }
        memo[mask as usize] = best;
        best
    }
    rec(((1u64 << n) - 1) as u32, &adj, &mut memo) as usize
}

/// Checks that `path` is an augmenting path for `m` in `g`.
pub fn is_augmenting_path(g: &Graph, m: &Matching, path: &[Vertex]) -> bool {
    if path.len() < 2 || path.len() % 2 != 0 {
        return false;
    }
    let mut seen = vec![false; g.vertex_count()];
    if path.iter().any(|&v| std::mem::replace(&mut seen[v], true)) {
        return false;
    }
    if m.is_matched(path[0]) || m.is_matched(path[path.len() - 1]) {
        return false;
    }
    path.windows(2).enumerate().all(|(i, w)| g.has_edge(w[0], w[1]) && (m.contains(w[0], w[1]) == (i % 2 == 1)))
}
