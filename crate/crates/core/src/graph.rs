//! Simple undirected graphs, the edge-list format, path solutions and the
//! contracted view of a subgraph plus a cover.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// An undirected edge stored with the smaller endpoint first.
pub type Edge = (Vertex, Vertex);

#[inline]
pub fn edge(u: Vertex, v: Vertex) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Immutable simple graph on the vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, parallel edges and ids `>= n`.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has an endpoint outside 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            list.push(edge(u, v));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self::from_sorted(n, list))
    }

    fn from_sorted(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { n, edges, adj }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    pub fn path_graph(n: usize) -> Self {
        Self::from_sorted(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    pub fn cycle_graph(n: usize) -> Self {
        let mut edges: Vec<Edge> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        edges.sort_unstable();
        Self::from_sorted(n, edges)
    }

    pub fn complete_graph(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::from_sorted(n, edges)
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push(edge(i, (i + 1) % 5));
            edges.push(edge(i, i + 5));
            edges.push(edge(5 + i, 5 + (i + 2) % 5));
        }
        Self::new(10, edges).expect("petersen graph is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        if u >= self.n || v >= self.n {
            return false;
        }
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// `G[U]`, relabelled densely in the order of `vertices`.
    pub fn induced(&self, vertices: &[Vertex]) -> Subgraph {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = local[w];
                if j != usize::MAX && i < j {
                    edges.push((i, j));
                }
            }
        }
        edges.sort_unstable();
        Subgraph { graph: Self::from_sorted(vertices.len(), edges), to_parent: vertices.to_vec() }
    }

    /// The spanning subgraph keeping only `keep`, which must be a subset of the edges.
    pub fn edge_subgraph(&self, keep: impl IntoIterator<Item = Edge>) -> Graph {
        let mut edges: Vec<Edge> = keep.into_iter().map(|(u, v)| edge(u, v)).collect();
        edges.sort_unstable();
        edges.dedup();
        debug_assert!(edges.iter().all(|&(u, v)| self.has_edge(u, v)));
        Self::from_sorted(self.n, edges)
    }

    /// Canonical edge-list text: header, then edges in lexicographic order.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list())
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_graph(s)
    }
}

/// An induced subgraph with the map from its ids back to the parent graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Graph,
    pub to_parent: Vec<Vertex>,
}

impl Subgraph {
    pub fn lift(&self, path: &[Vertex]) -> Vec<Vertex> {
        path.iter().map(|&v| self.to_parent[v]).collect()
    }
}

/// Parses the edge-list format: a header `n m`, then `m` lines `u v`.
/// Lines starting with `#` and blank lines are ignored.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let parse_pair = |line: usize, l: &str| -> Result<(usize, usize)> {
        let mut it = l.split_whitespace();
        let bad = || Error::Parse { line, reason: format!("expected two non-negative integers, found {l:?}") };
        let a = it.next().ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?;
        let b = it.next().ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?;
        if it.next().is_some() {
            return Err(bad());
        }
        Ok((a, b))
    };

    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, reason: "missing header \"n m\"".into() })?;
    let (n, m) = parse_pair(hline, header)?;

    let mut seen = BTreeSet::new();
    let mut last_line = hline;
    for (line, l) in lines {
        last_line = line;
        if seen.len() == m {
            return Err(Error::Parse { line, reason: format!("more than the {m} edges announced in the header") });
        }
        let (u, v) = parse_pair(line, l)?;
        if u >= n || v >= n {
            return Err(Error::Parse { line, reason: format!("vertex id out of range 0..{n} in edge {u} {v}") });
        }
        if u == v {
            return Err(Error::Parse { line, reason: format!("self-loop at vertex {u}") });
        }
        if !seen.insert(edge(u, v)) {
            return Err(Error::Parse { line, reason: format!("duplicate edge {u} {v}") });
        }
    }
    if seen.len() < m {
        return Err(Error::Parse {
            line: last_line,
            reason: format!("header announces {m} edges but only {} were given", seen.len()),
        });
    }
    Ok(Graph::from_sorted(n, seen.into_iter().collect()))
}

/// Maximal connected vertex sets, each sorted, ordered by smallest vertex.
pub fn connected_components(g: &Graph) -> Vec<Vec<Vertex>> {
    let mut uf = UnionFind::new(g.vertex_count());
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    uf.groups()
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    /// All sets, each sorted, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let r = self.find(v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(v);
        }
        out
    }
}

/// A set of vertex-disjoint paths; `covered` is the total number of vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub paths: Vec<Vec<Vertex>>,
    pub covered: usize,
}

impl Solution {
    pub fn new(paths: Vec<Vec<Vertex>>) -> Self {
        let covered = paths.iter().map(Vec::len).sum();
        Solution { paths, covered }
    }

    pub fn empty() -> Self {
        Solution::default()
    }

    pub fn extend(&mut self, other: Solution) {
        self.covered += other.covered;
        self.paths.extend(other.paths);
    }

    /// Paths sorted by first vertex, each oriented to start at its smaller endpoint.
    pub fn canonical(mut self) -> Self {
        for p in &mut self.paths {
            if p.len() > 1 && p[0] > p[p.len() - 1] {
                p.reverse();
            }
        }
        self.paths.sort();
        self
    }
}

/// The first broken feasibility rule of a solution.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("path {index} has {len} vertices, shorter than {min}")]
    ShortPath { index: usize, len: usize, min: usize },
    #[error("vertex {vertex} is out of range")]
    OutOfRange { vertex: Vertex },
    #[error("paths are not disjoint: vertex {vertex} is used twice")]
    NotDisjoint { vertex: Vertex },
    #[error("consecutive vertices {0} and {1} are not adjacent")]
    MissingEdge(Vertex, Vertex),
    #[error("covered count {claimed} differs from the actual {actual}")]
    CoveredMismatch { claimed: usize, actual: usize },
}

/// Checks feasibility for 5⁺-paths.
pub fn validate_solution(g: &Graph, s: &Solution) -> std::result::Result<(), Violation> {
    validate_paths(g, s, 5)
}

/// Checks feasibility for `k`⁺-paths.
pub fn validate_paths(g: &Graph, s: &Solution, k: usize) -> std::result::Result<(), Violation> {
    let mut used = vec![false; g.vertex_count()];
    let mut actual = 0;
    for (index, p) in s.paths.iter().enumerate() {
        if p.len() < k.max(1) {
            return Err(Violation::ShortPath { index, len: p.len(), min: k.max(1) });
        }
        for &v in p {
            if v >= g.vertex_count() {
                return Err(Violation::OutOfRange { vertex: v });
            }
            if std::mem::replace(&mut used[v], true) {
                return Err(Violation::NotDisjoint { vertex: v });
            }
        }
        if let Some(w) = p.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
            return Err(Violation::MissingEdge(w[0], w[1]));
        }
        actual += p.len();
    }
    if actual != s.covered {
        return Err(Violation::CoveredMismatch { claimed: s.covered, actual });
    }
    Ok(())
}

/// One node per component of `H`; cover edges between components become
/// (possibly parallel) view edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractedView {
    pub node_count: usize,
    /// `(a, b, e)` with `a < b` the component ids joined by cover edge `e`.
    pub edges: Vec<(usize, usize, Edge)>,
}

impl ContractedView {
    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b, _)| a == node || b == node).count()
    }

    pub fn neighbors(&self, node: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b, _)| if a == node { Some(b) } else if b == node { Some(a) } else { None })
            .collect()
    }

    /// Node sets of the connected components, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.node_count);
        for &(a, b, _) in &self.edges {
            uf.union(a, b);
        }
        uf.groups()
    }
}

/// Contracts every component (given by `comp_of`) to a node.
pub fn contract(comp_of: &[Option<usize>], node_count: usize, cover: &[Edge]) -> Result<ContractedView> {
    let mut edges = Vec::with_capacity(cover.len());
    for &(u, v) in cover {
        let (a, b) = match (comp_of.get(u).copied().flatten(), comp_of.get(v).copied().flatten()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Structure(format!("cover edge ({u}, {v}) touches a vertex outside H"))),
        };
        if a == b {
            return Err(Error::Contract((u, v)));
        }
        edges.push((a.min(b), a.max(b), edge(u, v)));
    }
    edges.sort_unstable();
    Ok(ContractedView { node_count, edges })
}
