//! The working subgraph `H` together with the maximum matching `M`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{edge, Edge, Graph, UnionFind, Vertex};
use crate::matching::{certify_maximum, Matching};

/// Shape of a connected component of `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ComponentKind {
    Edge,
    Triangle,
    Star,
    BiStar,
    FivePath,
}

impl ComponentKind {
    /// Edges, triangles, stars and bi-stars cannot host a 5-path alone.
    pub fn is_bad(self) -> bool {
        self != ComponentKind::FivePath
    }

    /// Rescue weight: 2 for a bi-star, 1 for the other bad kinds.
    pub fn weight(self) -> u32 {
        match self {
            ComponentKind::BiStar => 2,
            ComponentKind::FivePath => 0,
            _ => 1,
        }
    }

    pub(crate) fn rank(self) -> u8 {
        match self {
            ComponentKind::Edge => 0,
            ComponentKind::Triangle => 1,
            ComponentKind::Star => 2,
            ComponentKind::BiStar => 3,
            ComponentKind::FivePath => 4,
        }
    }
}

/// One classified component of `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HComponent {
    pub kind: ComponentKind,
    /// Sorted.
    pub vertices: Vec<Vertex>,
    /// Sorted.
    pub edges: Vec<Edge>,
    /// Sorted.
    pub m_edges: Vec<Edge>,
    /// Star: the center. Bi-star: both centers, ascending. Otherwise empty.
    pub centers: Vec<Vertex>,
    /// Five-path: `v1..v5` oriented so `v1 < v5`. Edge: both ends ascending.
    pub path: Vec<Vertex>,
}

impl HComponent {
    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn is_bad(&self) -> bool {
        self.kind.is_bad()
    }

    /// Number of matched vertices, `2 |M ∩ E(K)|`.
    pub fn matched_count(&self) -> usize {
        2 * self.m_edges.len()
    }

    pub fn is_matched(&self, v: Vertex) -> bool {
        self.m_edges.iter().any(|&(a, b)| a == v || b == v)
    }
}

/// Components of `H` in order of their smallest vertex.
#[derive(Clone, Debug, Default)]
pub struct HComponents {
    pub comps: Vec<HComponent>,
    /// Component index of every vertex of `G`, `None` outside `V(H)`.
    pub comp_of: Vec<Option<usize>>,
}

impl HComponents {
    pub fn of(&self, v: Vertex) -> Option<&HComponent> {
        self.comp_of[v].map(|i| &self.comps[i])
    }

    pub fn edge_components(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.comps.len()).filter(|&i| self.comps[i].kind == ComponentKind::Edge)
    }

    pub fn count(&self, kind: ComponentKind) -> usize {
        self.comps.iter().filter(|c| c.kind == kind).count()
    }
}

/// Subgraph `H` of `G` with its matching `M ⊆ E(H)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HState {
    in_h: Vec<bool>,
    edges: BTreeSet<Edge>,
    m: Matching,
}

impl HState {
    /// `H = (V(M), M)`.
    pub fn from_matching(m: Matching) -> Self {
        let in_h = (0..m.vertex_count()).map(|v| m.is_matched(v)).collect();
        let edges = m.edges().into_iter().collect();
        HState { in_h, edges, m }
    }

    /// Explicit construction; vertices of `edges` are added to `V(H)`.
    pub fn from_parts(g: &Graph, edges: &[Edge], m_edges: &[Edge]) -> Result<Self> {
        let m = Matching::from_edges(g, m_edges.iter().copied())?;
        let mut h = HState { in_h: vec![false; g.vertex_count()], edges: BTreeSet::new(), m };
        for &(u, v) in edges {
            if !g.has_edge(u, v) {
                return Err(Error::InvalidGraph(format!("({u}, {v}) is not an edge of G")));
            }
            h.add_edge(u, v);
        }
        for (u, v) in h.m.edges() {
            h.add_edge(u, v);
        }
        Ok(h)
    }

    pub fn vertex_count(&self) -> usize {
        self.in_h.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.in_h[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.in_h.len()).filter(|&v| self.in_h[v])
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.contains(&edge(u, v))
    }

    pub fn matching(&self) -> &Matching {
        &self.m
    }

    pub(crate) fn add_edge(&mut self, u: Vertex, v: Vertex) {
        self.in_h[u] = true;
        self.in_h[v] = true;
        self.edges.insert(edge(u, v));
    }

    pub(crate) fn remove_edge(&mut self, u: Vertex, v: Vertex) {
        self.edges.remove(&edge(u, v));
    }

    /// Removes `v` and its incident edges; `v` must not be matched.
    pub(crate) fn remove_vertex(&mut self, v: Vertex) {
        debug_assert!(!self.m.is_matched(v));
        self.in_h[v] = false;
        self.edges.retain(|&(a, b)| a != v && b != v);
    }

    pub(crate) fn matching_mut(&mut self) -> &mut Matching {
        &mut self.m
    }

    /// Connected components of `H` without classification.
    pub fn raw_components(&self) -> Vec<Vec<Vertex>> {
        let mut uf = UnionFind::new(self.in_h.len());
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf.groups().into_iter().filter(|grp| self.in_h[grp[0]]).collect()
    }

    /// Classified components; fails on the first component violating the invariant shapes.
    pub fn components(&self) -> Result<HComponents> {
        let mut comps = Vec::new();
        let mut comp_of = vec![None; self.in_h.len()];
        for vs in self.raw_components() {
            for &v in &vs {
                comp_of[v] = Some(comps.len());
            }
            comps.push(self.describe(vs)?);
        }
        Ok(HComponents { comps, comp_of })
    }

    fn describe(&self, vertices: Vec<Vertex>) -> Result<HComponent> {
        let kind = classify_component(self, &vertices)?;
        let inside = |e: &&Edge| vertices.binary_search(&e.0).is_ok();
        let edges: Vec<Edge> = self.edges.iter().filter(inside).copied().collect();
        let m_edges: Vec<Edge> = edges.iter().filter(|&&(a, b)| self.m.contains(a, b)).copied().collect();
        let deg = |v: Vertex| edges.iter().filter(|&&(a, b)| a == v || b == v).count();
        let centers = match kind {
            ComponentKind::Star | ComponentKind::BiStar => vertices.iter().copied().filter(|&v| deg(v) >= 2).collect(),
            _ => Vec::new(),
        };
        let path = match kind {
            ComponentKind::Edge => vertices.clone(),
            ComponentKind::FivePath => {
                let start = vertices.iter().copied().find(|&v| deg(v) == 1).unwrap();
                let mut path = vec![start];
                while path.len() < vertices.len() {
                    let last = *path.last().unwrap();
                    let prev = path.len().checked_sub(2).map(|i| path[i]);
                    let next = edges
                        .iter()
                        .filter_map(|&(a, b)| if a == last { Some(b) } else if b == last { Some(a) } else { None })
                        .find(|&w| Some(w) != prev)
                        .unwrap();
                    path.push(next);
                }
                path
            }
            _ => Vec::new(),
        };
        Ok(HComponent { kind, vertices, edges, m_edges, centers, path })
    }

    /// The component invariant in full: `M ⊆ E(H) ⊆ E(G)`, `M` maximum in `G`, every component well shaped.
    pub fn check_invariant(&self, g: &Graph) -> Result<()> {
        for &(u, v) in &self.edges {
            if !g.has_edge(u, v) {
                return Err(Error::Invariant(format!("H edge ({u}, {v}) is not in G")));
            }
        }
        for (u, v) in self.m.edges() {
            if !self.edges.contains(&(u, v)) {
                return Err(Error::Invariant(format!("M edge ({u}, {v}) is not in H")));
            }
        }
        if let Some(path) = certify_maximum(g, &self.m)? {
            return Err(Error::Invariant(format!("M is not maximum, augmenting path {path:?}")));
        }
        self.components().map(|_| ())
    }
}

/// Classifies a connected component of `H` (given as its sorted vertex set).
pub fn classify_component(h: &HState, comp: &[Vertex]) -> Result<ComponentKind> {
    let inside = |v: Vertex| comp.binary_search(&v).is_ok();
    let edges: Vec<Edge> = h.edges.iter().filter(|e| inside(e.0) && inside(e.1)).copied().collect();
    let m_edges: Vec<Edge> = edges.iter().filter(|&&(a, b)| h.m.contains(a, b)).copied().collect();
    let deg: Vec<usize> = comp.iter().map(|&v| edges.iter().filter(|&&(a, b)| a == v || b == v).count()).collect();
    let nv = comp.len();
    let ne = edges.len();
    let nm = m_edges.len();
    let fail = || Error::Invariant(format!("component {comp:?} with edges {edges:?} and M-edges {m_edges:?}"));

    if nv == 2 && ne == 1 && nm == 1 {
        return Ok(ComponentKind::Edge);
    }
    if nv == 3 && ne == 3 && nm == 1 {
        return Ok(ComponentKind::Triangle);
    }
    if nv < 3 || ne + 1 != nv {
        return Err(fail());
    }
    let big: Vec<Vertex> = comp.iter().zip(&deg).filter(|(_, &d)| d >= 2).map(|(&v, _)| v).collect();
    let is_leaf = |v: Vertex| deg[comp.binary_search(&v).unwrap()] == 1;
    match big.len() {
        1 if nm == 1 => Ok(ComponentKind::Star),
        2 if nm == 2 => {
            let ok = m_edges.iter().all(|&(a, b)| (big.contains(&a) && is_leaf(b)) || (big.contains(&b) && is_leaf(a)));
            let distinct = m_edges.iter().map(|&(a, b)| if big.contains(&a) { a } else { b }).collect::<BTreeSet<_>>().len() == 2;
            if ok && distinct {
                Ok(ComponentKind::BiStar)
            } else {
                Err(fail())
            }
        }
        3 if nv == 5 && deg.iter().all(|&d| d <= 2) && nm == 2 => {
            let end_edges: Vec<&Edge> = edges.iter().filter(|&&(a, b)| is_leaf(a) || is_leaf(b)).collect();
            if end_edges.len() == 2 && end_edges.iter().all(|&&(a, b)| h.m.contains(a, b)) {
                Ok(ComponentKind::FivePath)
            } else {
                Err(fail())
            }
        }
        _ => Err(fail()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(n: usize, g_edges: &[Edge], h_edges: &[Edge], m: &[Edge]) -> (Graph, HState) {
        let g = Graph::new(n, g_edges.iter().copied()).unwrap();
        let h = HState::from_parts(&g, h_edges, m).unwrap();
        (g, h)
    }

    fn kind_of(h: &HState) -> Result<ComponentKind> {
        let comps = h.components()?;
        assert_eq!(comps.comps.len(), 1);
        Ok(comps.comps[0].kind)
    }

    #[test]
    fn classifies_each_shape() {
        let (_, h) = state(2, &[(0, 1)], &[(0, 1)], &[(0, 1)]);
        assert_eq!(kind_of(&h).unwrap(), ComponentKind::Edge);

        let tri = [(0, 1), (0, 2), (1, 2)];
        let (_, h) = state(3, &tri, &tri, &[(0, 1)]);
        assert_eq!(kind_of(&h).unwrap(), ComponentKind::Triangle);

        let star = [(0, 1), (0, 2), (0, 3)];
        let (_, h) = state(4, &star, &star, &[(0, 2)]);
        assert_eq!(kind_of(&h).unwrap(), ComponentKind::Star);
        assert_eq!(h.components().unwrap().comps[0].centers, vec![0]);

        let p4 = [(0, 1), (1, 2), (2, 3)];
        let (_, h) = state(4, &p4, &p4, &[(0, 1), (2, 3)]);
        assert_eq!(kind_of(&h).unwrap(), ComponentKind::BiStar);
        let (_, h) = state(4, &p4, &p4, &[(1, 2)]);
        assert!(kind_of(&h).is_err());

        let p5 = [(0, 1), (1, 2), (2, 3), (3, 4)];
        let (_, h) = state(5, &p5, &p5, &[(0, 1), (3, 4)]);
        assert_eq!(kind_of(&h).unwrap(), ComponentKind::FivePath);
        assert_eq!(h.components().unwrap().comps[0].path, vec![0, 1, 2, 3, 4]);
        let (_, h) = state(5, &p5, &p5, &[(1, 2), (3, 4)]);
        assert!(kind_of(&h).is_err());
    }

    #[test]
    fn bistar_matching_rules() {
        // centers 1 and 2, leaves 0, 5 on 1 and 3, 4 on 2
        let bs = [(0, 1), (1, 5), (1, 2), (2, 3), (2, 4)];
        let (_, h) = state(6, &bs, &bs, &[(0, 1), (2, 3)]);
        assert_eq!(kind_of(&h).unwrap(), ComponentKind::BiStar);
        assert_eq!(h.components().unwrap().comps[0].centers, vec![1, 2]);
        let (_, h) = state(6, &bs, &bs, &[(0, 1), (2, 4)]);
        assert_eq!(kind_of(&h).unwrap(), ComponentKind::BiStar);
        let (_, h) = state(6, &bs, &bs, &[(1, 2)]);
        assert!(kind_of(&h).is_err());
    }

    #[test]
    fn five_path_orientation() {
        let p = [(4, 2), (2, 0), (0, 3), (3, 1)];
        let (_, h) = state(5, &p, &p, &[(2, 4), (1, 3)]);
        assert_eq!(h.components().unwrap().comps[0].path, vec![1, 3, 0, 2, 4]);
    }

    #[test]
    fn invariant_requires_maximum_matching() {
        let p5 = [(0, 1), (1, 2), (2, 3), (3, 4)];
        let (g, h) = state(5, &p5, &[(1, 2)], &[(1, 2)]);
        assert!(matches!(h.check_invariant(&g), Err(Error::Invariant(_))));
        let (g, h) = state(5, &p5, &p5, &[(0, 1), (3, 4)]);
        h.check_invariant(&g).unwrap();
    }

    #[test]
    fn initial_state_is_matching() {
        let g = Graph::path_graph(6);
        let m = crate::matching::maximum_matching(&g);
        let h = HState::from_matching(m);
        h.check_invariant(&g).unwrap();
        let comps = h.components().unwrap();
        assert_eq!(comps.count(ComponentKind::Edge), 3);
        assert_eq!(comps.comp_of.iter().filter(|c| c.is_some()).count(), 6);
    }

    #[test]
    fn weights() {
        assert_eq!(ComponentKind::BiStar.weight(), 2);
        assert_eq!(ComponentKind::Triangle.weight(), 1);
        assert!(!ComponentKind::FivePath.is_bad());
    }
}
