//! Components of `H + C`: centers and satellites, trunks, anchors, metrics,
//! criticality, responsibility and the family index.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::trunk_opt;
use crate::graph::{contract, edge, Edge, Graph, Solution, Subgraph, Vertex};
use crate::hstate::{ComponentKind, HComponent, HComponents};

/// `α = 15/8` as numerator and denominator.
pub const ALPHA: (u32, u32) = (15, 8);

/// Largest trunk order.
pub const TRUNK_LIMIT: usize = 55;

/// A satellite-element with its rescue edge `{anchor, entry}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Satellite {
    pub comp: usize,
    pub anchor: Vertex,
    pub entry: Vertex,
}

impl Satellite {
    pub fn rescue_edge(&self) -> Edge {
        edge(self.anchor, self.entry)
    }
}

/// A composite component of `H + C`, or an isolated 5-path (no satellites).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Member {
    pub center: usize,
    /// Sorted by component index.
    pub satellites: Vec<Satellite>,
    /// `V(K)`, sorted.
    pub vertices: Vec<Vertex>,
}

impl Member {
    pub fn new(comps: &HComponents, center: usize, mut satellites: Vec<Satellite>) -> Self {
        satellites.sort();
        let mut vertices: Vec<Vertex> = comps.comps[center].vertices.clone();
        for s in &satellites {
            vertices.extend(&comps.comps[s.comp].vertices);
        }
        vertices.sort_unstable();
        Member { center, satellites, vertices }
    }

    pub fn is_composite(&self) -> bool {
        !self.satellites.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// `C ∩ E(K)`, sorted.
    pub fn cover_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.satellites.iter().map(Satellite::rescue_edge).collect();
        out.sort_unstable();
        out
    }

    /// `s(K)`: matched vertices over all elements.
    pub fn s(&self, comps: &HComponents) -> u32 {
        let mut s = comps.comps[self.center].matched_count();
        for sat in &self.satellites {
            s += comps.comps[sat.comp].matched_count();
        }
        s as u32
    }
}

/// Contracted shape of the components of `H + C`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub members: Vec<Member>,
    /// Bad components of `H` touched by no cover edge.
    pub isolated_bad: Vec<usize>,
}

/// Splits `H + C` into members. An edge between two bad components takes the
/// most recently `designated` endpoint as its center, else the one of higher
/// kind rank, else the one with the smaller index.
pub fn decompose(comps: &HComponents, cover: &[Edge], designated: &[usize]) -> Result<Decomposition> {
    let view = contract(&comps.comp_of, comps.comps.len(), cover)?;
    let mut out = Decomposition::default();
    for nodes in view.components() {
        if nodes.len() == 1 {
            let c = nodes[0];
            if comps.comps[c].is_bad() {
                out.isolated_bad.push(c);
            } else {
                out.members.push(Member::new(comps, c, Vec::new()));
            }
            continue;
        }
        let center = if nodes.len() == 2 {
            let (a, b) = (nodes[0], nodes[1]);
            let (ka, kb) = (&comps.comps[a], &comps.comps[b]);
            if !ka.is_bad() && !kb.is_bad() {
                return Err(Error::Structure(format!("components {a} and {b} are both 5-paths")));
            }
            if !ka.is_bad() {
                a
            } else if !kb.is_bad() {
                b
            } else if let Some(&d) = designated.iter().rev().find(|&&d| d == a || d == b) {
                d
            } else if kb.kind.rank() > ka.kind.rank() {
                b
            } else {
                a
            }
        } else {
            let hubs: Vec<usize> = nodes.iter().copied().filter(|&x| view.degree(x) >= 2).collect();
            if hubs.len() != 1 {
                return Err(Error::Structure(format!("contracted component {nodes:?} is not a star")));
            }
            hubs[0]
        };
        let mut satellites = Vec::new();
        for &x in nodes.iter().filter(|&&x| x != center) {
            if !comps.comps[x].is_bad() {
                return Err(Error::Structure(format!("satellite {x} is not a bad component")));
            }
            let touching: Vec<_> = view.edges.iter().filter(|&&(a, b, _)| a == x || b == x).collect();
            let &&(a, b, (u, v)) = match touching.as_slice() {
                [one] => one,
                _ => return Err(Error::Structure(format!("satellite {x} has {} cover edges", touching.len()))),
            };
            if a != center && b != center {
                return Err(Error::Structure(format!("satellite {x} is not attached to the center")));
            }
            let (anchor, entry) = if comps.comp_of[u] == Some(center) { (u, v) } else { (v, u) };
            satellites.push(Satellite { comp: x, anchor, entry });
        }
        out.members.push(Member::new(comps, center, satellites));
    }
    Ok(out)
}

/// A kept satellite part hanging off `anchor` by the edge `{anchor, entry}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Attachment {
    pub anchor: Vertex,
    pub entry: Vertex,
    /// Sorted.
    pub part: Vec<Vertex>,
}

/// The trimmed subgraph `K̃`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trunk {
    /// Sorted.
    pub vertices: Vec<Vertex>,
    /// Sorted.
    pub edges: Vec<Edge>,
    /// Kept center vertices, sorted.
    pub center: Vec<Vertex>,
    pub attachments: Vec<Attachment>,
}

impl Trunk {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// The trunk as a standalone graph on `0..|V|`.
    pub fn graph(&self) -> Subgraph {
        let idx = |v: Vertex| self.vertices.binary_search(&v).expect("trunk edge endpoint");
        let edges = self.edges.iter().map(|&(u, v)| (idx(u), idx(v)));
        let graph = Graph::new(self.vertices.len(), edges).expect("trunk edges are simple");
        Subgraph { graph, to_parent: self.vertices.clone() }
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.binary_search(&edge(u, v)).is_ok()
    }

    /// Longest path inside attachment `i` starting at its entry; ties go to
    /// the lexicographically smallest sequence.
    pub fn tail(&self, i: usize) -> Vec<Vertex> {
        let a = &self.attachments[i];
        let mut best = vec![a.entry];
        let mut cur = vec![a.entry];
        self.extend_tail(&a.part, &mut cur, &mut best);
        best
    }

    fn extend_tail(&self, part: &[Vertex], cur: &mut Vec<Vertex>, best: &mut Vec<Vertex>) {
        if cur.len() > best.len() || (cur.len() == best.len() && *cur < *best) {
            *best = cur.clone();
        }
        let last = *cur.last().unwrap();
        for &w in part {
            if !cur.contains(&w) && self.has_edge(last, w) {
                cur.push(w);
                self.extend_tail(part, cur, best);
                cur.pop();
            }
        }
    }
}

/// Vertices of the center element kept in the trunk.
pub fn kept_center(c: &HComponent) -> Vec<Vertex> {
    if c.is_bad() {
        c.vertices.iter().copied().filter(|&v| c.is_matched(v)).collect()
    } else {
        c.vertices.clone()
    }
}

/// Builds `K̃`.
pub fn build_trunk(comps: &HComponents, k: &Member) -> Trunk {
    let center_comp = &comps.comps[k.center];
    let center = kept_center(center_comp);
    let mut vertices = center.clone();
    let mut edges: Vec<Edge> = center_comp.edges.iter().copied().filter(|&(u, v)| center.contains(&u) && center.contains(&v)).collect();
    let mut attachments = Vec::new();
    for s in &k.satellites {
        let sc = &comps.comps[s.comp];
        let part: Vec<Vertex> = match sc.kind {
            ComponentKind::Star | ComponentKind::BiStar => {
                sc.vertices.iter().copied().filter(|&v| sc.is_matched(v) || v == s.entry).collect()
            }
            _ => sc.vertices.clone(),
        };
        edges.extend(sc.edges.iter().copied().filter(|&(u, v)| part.contains(&u) && part.contains(&v)));
        if vertices.contains(&s.anchor) && part.contains(&s.entry) {
            edges.push(s.rescue_edge());
        }
        vertices.extend(&part);
        attachments.push(Attachment { anchor: s.anchor, entry: s.entry, part });
    }
    vertices.sort_unstable();
    edges.sort_unstable();
    Trunk { vertices, edges, center, attachments }
}

/// Membership in `O_0, O_1, T_0, T_1, T_2`, or a 0-anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AnchorClass {
    ZeroAnchor,
    O0,
    O1,
    T0,
    T1,
    T2,
}

impl AnchorClass {
    pub fn from_counts(satellites: usize, bistars: usize) -> Option<Self> {
        Some(match (satellites, bistars) {
            (0, 0) => AnchorClass::ZeroAnchor,
            (1, 0) => AnchorClass::O0,
            (1, 1) => AnchorClass::O1,
            (2, 0) => AnchorClass::T0,
            (2, 1) => AnchorClass::T1,
            (2, 2) => AnchorClass::T2,
            _ => return None,
        })
    }

    /// Number of satellites anchored.
    pub fn order(self) -> usize {
        match self {
            AnchorClass::ZeroAnchor => 0,
            AnchorClass::O0 | AnchorClass::O1 => 1,
            _ => 2,
        }
    }

    /// In `O_0 ∪ T_0 ∪ T_1`.
    pub fn is_light(self) -> bool {
        matches!(self, AnchorClass::O0 | AnchorClass::T0 | AnchorClass::T1)
    }

    /// Smallest `|Q_v|` and `|P_v|` guaranteed for the class.
    pub fn path_bounds(self) -> (usize, Option<usize>) {
        match self {
            AnchorClass::ZeroAnchor => (1, None),
            AnchorClass::O0 => (3, None),
            AnchorClass::O1 => (4, None),
            AnchorClass::T0 => (3, Some(5)),
            AnchorClass::T1 => (4, Some(6)),
            AnchorClass::T2 => (4, Some(7)),
        }
    }
}

impl fmt::Display for AnchorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AnchorClass::ZeroAnchor => "0",
            AnchorClass::O0 => "O0",
            AnchorClass::O1 => "O1",
            AnchorClass::T0 => "T0",
            AnchorClass::T1 => "T1",
            AnchorClass::T2 => "T2",
        };
        f.write_str(s)
    }
}

/// Anchors of `k`: center vertices kept in the trunk, ascending.
pub fn anchors(comps: &HComponents, k: &Member) -> Vec<Vertex> {
    kept_center(&comps.comps[k.center])
}

pub fn classify_anchor(comps: &HComponents, k: &Member, v: Vertex) -> Result<AnchorClass> {
    if !anchors(comps, k).contains(&v) {
        return Err(Error::NotAnchor(v));
    }
    let mine: Vec<&Satellite> = k.satellites.iter().filter(|s| s.anchor == v).collect();
    let bistars = mine.iter().filter(|s| comps.comps[s.comp].kind == ComponentKind::BiStar).count();
    AnchorClass::from_counts(mine.len(), bistars)
        .ok_or_else(|| Error::Structure(format!("vertex {v} anchors {} satellites", mine.len())))
}

/// `Q_v` and, for 2-anchors, `P_v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnchorPaths {
    pub q: Vec<Vertex>,
    pub p: Option<Vec<Vertex>>,
}

pub fn anchor_paths(trunk: &Trunk, v: Vertex) -> AnchorPaths {
    let tails: Vec<Vec<Vertex>> = (0..trunk.attachments.len()).filter(|&i| trunk.attachments[i].anchor == v).map(|i| trunk.tail(i)).collect();
    let mut q = vec![v];
    if let Some(best) = tails.iter().max_by(|a, b| a.len().cmp(&b.len()).then(b.cmp(a))) {
        q.extend(best);
    }
    let p = match tails.as_slice() {
        [a, b] => {
            let mut p: Vec<Vertex> = a.iter().rev().copied().collect();
            p.push(v);
            p.extend(b);
            Some(p)
        }
        _ => None,
    };
    AnchorPaths { q, p }
}

/// `s(K)` and `η(K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub s: u32,
    pub eta: u32,
}

impl Metrics {
    /// `s / η ≥ α`, compared exactly.
    pub fn is_critical(&self) -> Result<bool> {
        if self.eta == 0 {
            return Err(Error::Structure("η(K) = 0".into()));
        }
        Ok(ALPHA.1 * self.s >= ALPHA.0 * self.eta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnchorReport {
    pub vertex: Vertex,
    pub class: AnchorClass,
    /// Indices into the member's satellites.
    pub satellites: Vec<usize>,
    pub paths: AnchorPaths,
    pub responsible: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemberReport {
    pub member: Member,
    pub trunk: Trunk,
    pub anchors: Vec<AnchorReport>,
    pub metrics: Metrics,
    pub critical: bool,
    /// `OPT(K̃)` in `G` vertex ids.
    pub best: Solution,
}

impl MemberReport {
    pub fn anchor(&self, v: Vertex) -> Option<&AnchorReport> {
        self.anchors.iter().find(|a| a.vertex == v)
    }

    /// Critical anchors: 2-anchors of a critical member.
    pub fn critical_anchors(&self) -> Vec<Vertex> {
        if !self.critical {
            return Vec::new();
        }
        self.anchors.iter().filter(|a| a.class.order() == 2).map(|a| a.vertex).collect()
    }

    /// Satellites anchored by critical anchors.
    pub fn critical_satellites(&self) -> Vec<Satellite> {
        let ca = self.critical_anchors();
        self.member.satellites.iter().copied().filter(|s| ca.contains(&s.anchor)).collect()
    }
}

/// Trunk, anchors and metrics of one member.
pub fn analyze_member(comps: &HComponents, k: &Member) -> Result<MemberReport> {
    let trunk = build_trunk(comps, k);
    let mut anchors_out = Vec::new();
    for v in anchors(comps, k) {
        let class = classify_anchor(comps, k, v)?;
        let satellites = (0..k.satellites.len()).filter(|&i| k.satellites[i].anchor == v).collect();
        anchors_out.push(AnchorReport { vertex: v, class, satellites, paths: anchor_paths(&trunk, v), responsible: false });
    }
    let anchored: usize = anchors_out.iter().map(|a| a.satellites.len()).sum();
    if anchored != k.satellites.len() {
        return Err(Error::Structure(format!("a satellite of center {} hangs off a non-anchor", k.center)));
    }
    let best = trunk_opt(&trunk)?;
    let metrics = Metrics { s: k.s(comps), eta: best.covered as u32 };
    let critical = metrics.is_critical()?;
    Ok(MemberReport { member: k.clone(), trunk, anchors: anchors_out, metrics, critical, best })
}

/// All members of `H + C` analysed, with responsibility resolved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub reports: Vec<MemberReport>,
    pub isolated_bad: Vec<usize>,
    /// Member index of each `H` component, `None` for isolated bad ones.
    pub member_of: Vec<Option<usize>>,
    /// Connected components of the spanning graph `H + C`.
    pub ncc: usize,
}

impl Analysis {
    pub fn critical_count(&self) -> usize {
        self.reports.iter().filter(|r| r.critical).count()
    }

    /// 0-anchors, counting every vertex of an isolated 5-path.
    pub fn zero_anchor_count(&self) -> usize {
        self.reports.iter().flat_map(|r| &r.anchors).filter(|a| a.class == AnchorClass::ZeroAnchor).count()
    }

    /// `(member, satellite)` for every critical satellite-element.
    pub fn critical_satellites(&self) -> Vec<(usize, Satellite)> {
        self.reports.iter().enumerate().flat_map(|(i, r)| r.critical_satellites().into_iter().map(move |s| (i, s))).collect()
    }

    /// Member and anchor report of an anchor vertex.
    pub fn anchor_of(&self, comps: &HComponents, v: Vertex) -> Option<(usize, &AnchorReport)> {
        let m = self.member_of[comps.comp_of[v]?]?;
        let r = &self.reports[m];
        if r.member.center != comps.comp_of[v]? {
            return None;
        }
        r.anchor(v).map(|a| (m, a))
    }

    /// Satellite containing `v`, if any.
    pub fn satellite_of(&self, comps: &HComponents, v: Vertex) -> Option<(usize, Satellite)> {
        let c = comps.comp_of[v]?;
        let m = self.member_of[c]?;
        self.reports[m].member.satellites.iter().find(|s| s.comp == c).map(|&s| (m, s))
    }
}

/// Decomposes and analyses `H + C`.
pub fn analyze(g: &Graph, comps: &HComponents, cover: &[Edge], designated: &[usize]) -> Result<Analysis> {
    let dec = decompose(comps, cover, designated)?;
    let mut reports = Vec::with_capacity(dec.members.len());
    for k in &dec.members {
        reports.push(analyze_member(comps, k)?);
    }
    let mut member_of = vec![None; comps.comps.len()];
    for (i, r) in reports.iter().enumerate() {
        member_of[r.member.center] = Some(i);
        for s in &r.member.satellites {
            member_of[s.comp] = Some(i);
        }
    }
    let outside = comps.comp_of.iter().filter(|c| c.is_none()).count();
    let ncc = reports.len() + dec.isolated_bad.len() + outside;
    let mut analysis = Analysis { reports, isolated_bad: dec.isolated_bad, member_of, ncc };
    let critical = analysis.critical_satellites();
    for i in 0..analysis.reports.len() {
        for j in 0..analysis.reports[i].anchors.len() {
            let v = analysis.reports[i].anchors[j].vertex;
            if is_responsible(g, comps, &analysis.reports[i], v, &critical)? {
                analysis.reports[i].anchors[j].responsible = true;
            }
        }
    }
    Ok(analysis)
}

/// Whether moving some critical satellite to the `O_1` anchor `v` of `k`
/// would make `k` critical.
pub fn is_responsible(g: &Graph, comps: &HComponents, k: &MemberReport, v: Vertex, critical: &[(usize, Satellite)]) -> Result<bool> {
    if k.critical || k.anchor(v).map(|a| a.class) != Some(AnchorClass::O1) {
        return Ok(false);
    }
    for &(_, s) in critical {
        if k.member.satellites.iter().any(|x| x.comp == s.comp) {
            continue;
        }
        for &w in &comps.comps[s.comp].vertices {
            if !g.has_edge(v, w) {
                continue;
            }
            let mut sats = k.member.satellites.clone();
            sats.push(Satellite { comp: s.comp, anchor: v, entry: w });
            let moved = Member::new(comps, k.member.center, sats);
            if analyze_member(comps, &moved)?.critical {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// `n_0`, `n_c`, `n_cc` and `g = n_0 + 5 n_c - 6 n_cc`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Potential {
    pub n0: usize,
    pub nc: usize,
    pub ncc: usize,
}

impl Potential {
    pub fn of(a: &Analysis) -> Self {
        Potential { n0: a.zero_anchor_count(), nc: a.critical_count(), ncc: a.ncc }
    }

    pub fn value(&self) -> i64 {
        self.n0 as i64 + 5 * self.nc as i64 - 6 * self.ncc as i64
    }
}

/// The sets `𝒦_i`, `𝒦_{i,c}`, `R`, `R_c`, `U_c` and the vertices of `G_c`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FamilyIndex {
    /// `by_count[i]`: members with `|R ∩ V(K)| = i`.
    pub by_count: [Vec<usize>; 6],
    /// `critical_by_count[i]` for `i` in 1 and 2; index 0 unused.
    pub critical_by_count: [Vec<usize>; 3],
    pub r: Vec<Vertex>,
    pub r_c: Vec<Vertex>,
    pub u_c: Vec<Vertex>,
    /// `V(G) \ (R_c ∪ U_c)`, sorted.
    pub keep: Vec<Vertex>,
}

impl FamilyIndex {
    /// `Σ i |𝒦_i|`.
    pub fn weighted_sum(&self) -> u64 {
        self.by_count.iter().enumerate().map(|(i, k)| (i * k.len()) as u64).sum()
    }

    /// `|𝒦_{1,c}| + 2 |𝒦_{2,c}|`.
    pub fn critical_sum(&self) -> u64 {
        (self.critical_by_count[1].len() + 2 * self.critical_by_count[2].len()) as u64
    }
}

pub fn build_family_index(g: &Graph, comps: &HComponents, a: &Analysis) -> Result<FamilyIndex> {
    let mut fam = FamilyIndex::default();
    let mut removed = BTreeSet::new();
    for (i, rep) in a.reports.iter().enumerate() {
        let in_r: Vec<Vertex> = rep.anchors.iter().filter(|x| x.class.order() == 2 || x.responsible).map(|x| x.vertex).collect();
        if in_r.len() > 5 {
            return Err(Error::Structure(format!("member {i} has {} vertices in R", in_r.len())));
        }
        fam.by_count[in_r.len()].push(i);
        if rep.critical {
            match in_r.len() {
                1 | 2 => fam.critical_by_count[in_r.len()].push(i),
                n => return Err(Error::Structure(format!("critical member {i} has {n} vertices in R"))),
            }
            for v in rep.critical_anchors() {
                fam.r_c.push(v);
                removed.insert(v);
            }
            for s in rep.critical_satellites() {
                fam.u_c.extend(&comps.comps[s.comp].vertices);
                removed.extend(&comps.comps[s.comp].vertices);
            }
        }
        fam.r.extend(in_r);
    }
    fam.r.sort_unstable();
    fam.r_c.sort_unstable();
    fam.u_c.sort_unstable();
    fam.keep = (0..g.vertex_count()).filter(|v| !removed.contains(v)).collect();
    Ok(fam)
}

/// Positions `v_1..v_k` of the center element per its kind.
pub fn center_positions(c: &HComponent) -> Vec<Vertex> {
    match c.kind {
        ComponentKind::Edge | ComponentKind::Star => {
            let (a, b) = c.m_edges[0];
            vec![a, b]
        }
        ComponentKind::BiStar => {
            let partner = |x: Vertex| c.m_edges.iter().find_map(|&(a, b)| if a == x { Some(b) } else if b == x { Some(a) } else { None });
            let (c1, c2) = (c.centers[0], c.centers[1]);
            match (partner(c1), partner(c2)) {
                (Some(p1), Some(p2)) => vec![p1, c1, c2, p2],
                _ => c.m_edges.iter().flat_map(|&(a, b)| [a, b]).collect(),
            }
        }
        ComponentKind::FivePath => c.path.clone(),
        ComponentKind::Triangle => c.vertices.clone(),
    }
}

/// Findings of the structural audits; all empty on a correct run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructureAudit {
    pub members: usize,
    pub critical: usize,
    pub stray_cover_edges: Vec<String>,
    pub satellite_kinds: Vec<String>,
    pub trunk_bounds: Vec<String>,
    pub light_anchors: Vec<String>,
    pub short_paths: Vec<String>,
    pub critical_kinds: Vec<String>,
    pub critical_counts: Vec<String>,
}

impl StructureAudit {
    pub fn violations(&self) -> usize {
        [&self.stray_cover_edges, &self.satellite_kinds, &self.trunk_bounds, &self.light_anchors, &self.short_paths, &self.critical_kinds, &self.critical_counts].iter().map(|v| v.len()).sum()
    }

    pub fn merge(&mut self, other: StructureAudit) {
        self.members += other.members;
        self.critical += other.critical;
        self.stray_cover_edges.extend(other.stray_cover_edges);
        self.satellite_kinds.extend(other.satellite_kinds);
        self.trunk_bounds.extend(other.trunk_bounds);
        self.light_anchors.extend(other.light_anchors);
        self.short_paths.extend(other.short_paths);
        self.critical_kinds.extend(other.critical_kinds);
        self.critical_counts.extend(other.critical_counts);
    }
}

/// Checks every structural claim about a decomposed `H + C`.
pub fn audit_structure(comps: &HComponents, cover: &[Edge], a: &Analysis) -> StructureAudit {
    let mut out = StructureAudit { members: a.reports.len(), critical: a.critical_count(), ..Default::default() };
    let mut seen = BTreeSet::new();
    for r in &a.reports {
        for s in &r.member.satellites {
            seen.insert(s.rescue_edge());
        }
    }
    for e in cover {
        if !seen.contains(e) {
            out.stray_cover_edges.push(format!("cover edge {e:?} rescues no satellite"));
        }
    }
    for (i, r) in a.reports.iter().enumerate() {
        let k = &r.member;
        let center = &comps.comps[k.center];
        for s in &k.satellites {
            let sk = comps.comps[s.comp].kind;
            if sk == ComponentKind::Triangle && center.kind != ComponentKind::FivePath {
                out.satellite_kinds.push(format!("member {i}: triangle satellite under a {:?} center", center.kind));
            }
            if matches!(center.kind, ComponentKind::Edge | ComponentKind::Star) && sk != ComponentKind::BiStar {
                out.satellite_kinds.push(format!("member {i}: {sk:?} satellite under a {:?} center", center.kind));
            }
        }
        if k.is_composite() && center.kind == ComponentKind::Triangle {
            out.satellite_kinds.push(format!("member {i}: triangle center"));
        }

        let trunk_cover: BTreeSet<Edge> = r.trunk.edges.iter().copied().filter(|e| cover.binary_search(e).is_ok()).collect();
        let k_cover: BTreeSet<Edge> = cover.iter().copied().filter(|&(u, v)| k.contains(u) && k.contains(v)).collect();
        if trunk_cover != k_cover {
            out.trunk_bounds.push(format!("member {i}: trunk keeps {} of {} cover edges", trunk_cover.len(), k_cover.len()));
        }
        if r.trunk.vertex_count() > TRUNK_LIMIT {
            out.trunk_bounds.push(format!("member {i}: trunk has {} vertices", r.trunk.vertex_count()));
        }

        if k.is_composite() {
            if r.anchors.len() > 5 {
                out.light_anchors.push(format!("member {i}: {} anchors", r.anchors.len()));
            }
            let pos = center_positions(center);
            let mut light: Vec<usize> = r.anchors.iter().filter(|x| x.class.is_light()).filter_map(|x| pos.iter().position(|&p| p == x.vertex)).map(|p| p + 1).collect();
            light.sort_unstable();
            let ok = match center.kind {
                ComponentKind::Edge | ComponentKind::Star => light.is_empty(),
                ComponentKind::BiStar => light.len() <= 1 || (light.len() == 2 && [[1, 2], [3, 4]].contains(&[light[0], light[1]])),
                ComponentKind::FivePath => light.len() <= 1 || (light.len() == 2 && [[1, 2], [2, 4], [4, 5]].contains(&[light[0], light[1]])),
                ComponentKind::Triangle => true,
            };
            if !ok {
                out.light_anchors.push(format!("member {i}: light anchors at positions {light:?} of a {:?} center", center.kind));
            }
        }

        for x in &r.anchors {
            let (q, p) = x.class.path_bounds();
            if x.paths.q.len() < q {
                out.short_paths.push(format!("anchor {} ({}): |Q_v| = {}", x.vertex, x.class, x.paths.q.len()));
            }
            if let Some(p) = p {
                let got = x.paths.p.as_ref().map_or(0, Vec::len);
                if got < p {
                    out.short_paths.push(format!("anchor {} ({}): |P_v| = {got}", x.vertex, x.class));
                }
            }
        }

        if r.critical {
            let two: Vec<&AnchorReport> = r.anchors.iter().filter(|x| x.class.order() == 2).collect();
            for x in &two {
                if x.class != AnchorClass::T2 {
                    out.critical_kinds.push(format!("member {i}: critical anchor {} is {}", x.vertex, x.class));
                }
            }
            for s in r.critical_satellites() {
                if comps.comps[s.comp].kind != ComponentKind::BiStar {
                    out.critical_kinds.push(format!("member {i}: critical satellite {} is a {:?}", s.comp, comps.comps[s.comp].kind));
                }
            }
            if !(1..=2).contains(&two.len()) {
                out.critical_counts.push(format!("member {i}: {} critical anchors", two.len()));
            }
            if ![14, 16, 18, 30, 32].contains(&r.metrics.s) {
                out.critical_counts.push(format!("member {i}: critical with s = {}, eta = {}", r.metrics.s, r.metrics.eta));
            }
        }
    }
    out
}

/// Checks that `best` is a valid solution on the trunk.
pub fn check_trunk_solution(trunk: &Trunk, best: &Solution) -> bool {
    let sub = trunk.graph();
    let idx: BTreeMap<Vertex, usize> = trunk.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let local = Solution::new(best.paths.iter().map(|p| p.iter().map(|v| idx[v]).collect()).collect());
    crate::graph::validate_solution(&sub.graph, &local).is_ok()
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "members {} isolated_bad {} ncc {}", self.reports.len(), self.isolated_bad.len(), self.ncc)?;
        for (i, r) in self.reports.iter().enumerate() {
            writeln!(
                f,
                "member {i} center {} satellites {} s {} eta {} critical {} trunk {}",
                r.member.center,
                r.member.satellites.len(),
                r.metrics.s,
                r.metrics.eta,
                r.critical,
                r.trunk.vertex_count()
            )?;
            for x in &r.anchors {
                let p = x.paths.p.as_ref().map_or(0, Vec::len);
                write!(f, "  anchor {} {} q {} p {}", x.vertex, x.class, x.paths.q.len(), p)?;
                if x.responsible {
                    write!(f, " responsible")?;
                }
                writeln!(f)?;
            }
            for s in &r.member.satellites {
                writeln!(f, "  satellite {} via {:?}", s.comp, s.rescue_edge())?;
            }
        }
        Ok(())
    }
}
