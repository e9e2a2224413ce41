//! Exact maximum coverage by vertex-disjoint k⁺-paths on small graphs.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::{BudgetExceeded, Error, Result};
use crate::graph::{connected_components, Graph, Solution, Vertex};
use crate::structure::Trunk;

/// Environment variable overriding the default vertex cap.
pub const ORACLE_CAP_VAR: &str = "PATHCOVER_ORACLE_CAP";

/// The bitmask search never goes beyond this many vertices in one component.
pub const HARD_VERTEX_LIMIT: usize = 24;

/// Limits of one exact search. Exceeding any of them aborts with
/// [`Error::Budget`], never with a wrong answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_vertices: usize,
    pub max_nodes: u64,
    pub max_millis: Option<u64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_vertices: 18, max_nodes: 20_000_000, max_millis: None }
    }
}

impl SearchBudget {
    /// Default budget with the vertex cap taken from `PATHCOVER_ORACLE_CAP` when set.
    pub fn from_env() -> Self {
        let mut b = SearchBudget::default();
        if let Some(cap) = std::env::var(ORACLE_CAP_VAR).ok().and_then(|s| s.trim().parse().ok()) {
            b.max_vertices = cap;
        }
        b
    }

    pub fn with_cap(max_vertices: usize) -> Self {
        SearchBudget { max_vertices, ..SearchBudget::default() }
    }
}

struct Meter {
    nodes: u64,
    start: Instant,
    budget: SearchBudget,
}

impl Meter {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return Err(Error::Budget(BudgetExceeded::Nodes(self.budget.max_nodes)));
        }
        if let Some(ms) = self.budget.max_millis {
            if self.nodes % 1024 == 0 && self.start.elapsed().as_millis() as u64 >= ms {
                return Err(Error::Budget(BudgetExceeded::Time(ms)));
            }
        }
        Ok(())
    }
}

/// An optimal set of vertex-disjoint paths, each with at least `k` vertices.
pub fn exact_opt(g: &Graph, k: usize, budget: &SearchBudget) -> Result<Solution> {
    let n = g.vertex_count();
    let cap = budget.max_vertices.min(HARD_VERTEX_LIMIT);
    if n > cap {
        return Err(Error::Budget(BudgetExceeded::Vertices { n, cap }));
    }
    let k = k.max(1);
    let mut meter = Meter { nodes: 0, start: Instant::now(), budget: *budget };
    let mut paths = Vec::new();
    for comp in connected_components(g) {
        if comp.len() < k {
            continue;
        }
        let sub = g.induced(&comp);
        let mut search = ComponentSearch::new(&sub.graph, k);
        for p in search.solve(&mut meter)? {
            paths.push(sub.lift(&p));
        }
    }
    Ok(Solution::new(paths).canonical())
}

/// `opt(G)` for 5⁺-paths.
pub fn exact_value(g: &Graph, budget: &SearchBudget) -> Result<usize> {
    exact_opt(g, 5, budget).map(|s| s.covered)
}

struct ComponentSearch {
    k: usize,
    adj: Vec<u32>,
    /// `ham[S]`: endpoints of Hamiltonian paths of `G[S]`, for `|S| < 2k`.
    ham: Vec<u32>,
    /// Good sets grouped by their smallest vertex, largest first.
    goods: Vec<Vec<u32>>,
    memo: HashMap<u32, u32>,
}

impl ComponentSearch {
    fn new(g: &Graph, k: usize) -> Self {
        let n = g.vertex_count();
        let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0, |a, &w| a | 1 << w)).collect();
        let limit = 2 * k - 1;
        let mut ham = vec![0u32; 1 << n];
        let mut goods = vec![Vec::new(); n];
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size > limit {
                continue;
            }
            if size == 1 {
                ham[mask as usize] = mask;
            } else {
                let mut ends = 0;
                let mut rest = mask;
                while rest != 0 {
                    let v = rest.trailing_zeros();
                    rest &= rest - 1;
                    if ham[(mask & !(1 << v)) as usize] & adj[v as usize] != 0 {
                        ends |= 1 << v;
                    }
                }
                ham[mask as usize] = ends;
            }
            if size >= k && ham[mask as usize] != 0 {
                goods[mask.trailing_zeros() as usize].push(mask);
            }
        }
        for list in &mut goods {
            list.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        }
        ComponentSearch { k, adj, ham, goods, memo: HashMap::new() }
    }

    fn solve(&mut self, meter: &mut Meter) -> Result<Vec<Vec<Vertex>>> {
        let full = if self.adj.len() == 32 { u32::MAX } else { (1u32 << self.adj.len()) - 1 };
        self.best(full, meter)?;
        let mut out = Vec::new();
        self.rebuild(full, &mut out, meter)?;
        Ok(out)
    }

    fn reach(&self, mask: u32) -> u32 {
        let start = mask & mask.wrapping_neg();
        let mut seen = start;
        let mut frontier = start;
        while frontier != 0 {
            let v = frontier.trailing_zeros();
            frontier &= frontier - 1;
            let new = self.adj[v as usize] & mask & !seen;
            seen |= new;
            frontier |= new;
        }
        seen
    }

    fn best(&mut self, mask: u32, meter: &mut Meter) -> Result<u32> {
        if (mask.count_ones() as usize) < self.k {
            return Ok(0);
        }
        if let Some(&v) = self.memo.get(&mask) {
            return Ok(v);
        }
        meter.tick()?;
        let part = self.reach(mask);
        let value = if part != mask {
            self.best(part, meter)? + self.best(mask & !part, meter)?
        } else {
            let v = mask.trailing_zeros() as usize;
            let total = mask.count_ones();
            let mut value = self.best(mask & !(1 << v), meter)?;
            for i in 0..self.goods[v].len() {
                if value == total {
                    break;
                }
                let p = self.goods[v][i];
                if p & mask != p || p.count_ones() + (mask & !p).count_ones() <= value {
                    continue;
                }
                value = value.max(p.count_ones() + self.best(mask & !p, meter)?);
            }
            value
        };
        self.memo.insert(mask, value);
        Ok(value)
    }

    fn rebuild(&mut self, mask: u32, out: &mut Vec<Vec<Vertex>>, meter: &mut Meter) -> Result<()> {
        let value = self.best(mask, meter)?;
        if value == 0 {
            return Ok(());
        }
        let part = self.reach(mask);
        if part != mask {
            self.rebuild(part, out, meter)?;
            return self.rebuild(mask & !part, out, meter);
        }
        let v = mask.trailing_zeros() as usize;
        if self.best(mask & !(1 << v), meter)? == value {
            return self.rebuild(mask & !(1 << v), out, meter);
        }
        for i in 0..self.goods[v].len() {
            let p = self.goods[v][i];
            if p & mask == p && p.count_ones() + self.best(mask & !p, meter)? == value {
                out.push(self.ham_path(p));
                return self.rebuild(mask & !p, out, meter);
            }
        }
        unreachable!("memoized value without a witness")
    }

    fn ham_path(&self, set: u32) -> Vec<Vertex> {
        let mut end = self.ham[set as usize].trailing_zeros();
        let mut rest = set & !(1 << end);
        let mut path = vec![end as usize];
        while rest != 0 {
            let next = (self.ham[rest as usize] & self.adj[end as usize]).trailing_zeros();
            path.push(next as usize);
            rest &= !(1 << next);
            end = next;
        }
        path
    }
}

/// `OPT(K̃)`, in `G` vertex ids.
///
/// Satellite parts hang off the center by single edges and contain no
/// 5-path, so every path of a solution is a center path extended at each end
/// by at most one satellite tail (two tails when it is a single vertex). The
/// center has at most five vertices and is searched exhaustively. Trunks
/// without this shape go to [`exact_opt`].
pub fn trunk_opt(t: &Trunk) -> Result<Solution> {
    if !attached_shape(t) {
        let sub = t.graph();
        let sol = exact_opt(&sub.graph, 5, &SearchBudget::with_cap(HARD_VERTEX_LIMIT))
            .map_err(|_| Error::Structure(format!("trunk of {} vertices has no attached shape", t.vertex_count())))?;
        return Ok(Solution::new(sol.paths.iter().map(|p| sub.lift(p)).collect()));
    }
    let c = t.center.len();
    let at = |v: Vertex| t.center.iter().position(|&x| x == v).expect("center vertex");
    let mut tails: Vec<Vec<Vec<Vertex>>> = vec![Vec::new(); c];
    for i in 0..t.attachments.len() {
        tails[at(t.attachments[i].anchor)].push(t.tail(i));
    }
    for list in &mut tails {
        list.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    }

    let mut options: Vec<(u32, i64, Vec<Vertex>)> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for s in 0..c {
        stack.push(s);
        center_paths(t, &mut stack, &mut |p: &[usize]| {
            let (a, b) = (p[0], p[p.len() - 1]);
            if p.len() > 1 && a > b {
                return;
            }
            let mut seq: Vec<Vertex> = Vec::new();
            let mut end: Vec<Vertex> = Vec::new();
            if a == b {
                if let Some(x) = tails[a].first() {
                    seq.extend(x.iter().rev());
                }
                seq.push(t.center[a]);
                if let Some(x) = tails[a].get(1) {
                    end.extend(x);
                }
            } else {
                if let Some(x) = tails[a].first() {
                    seq.extend(x.iter().rev());
                }
                seq.extend(p.iter().map(|&i| t.center[i]));
                if let Some(x) = tails[b].first() {
                    end.extend(x);
                }
            }
            seq.extend(end);
            if seq.len() >= 5 {
                let mask = p.iter().fold(0u32, |m, &i| m | 1 << i);
                options.push((mask, seq.len() as i64, seq));
            }
        });
        stack.pop();
    }

    let full = (1u32 << c) - 1;
    let mut memo: HashMap<u32, (i64, Vec<usize>)> = HashMap::new();
    let (_, picked) = pick(full, &options, &mut memo);
    Ok(Solution::new(picked.into_iter().map(|i| options[i].2.clone()).collect()))
}

fn pick(rem: u32, options: &[(u32, i64, Vec<Vertex>)], memo: &mut HashMap<u32, (i64, Vec<usize>)>) -> (i64, Vec<usize>) {
    if rem == 0 {
        return (0, Vec::new());
    }
    if let Some(hit) = memo.get(&rem) {
        return hit.clone();
    }
    let low = rem & rem.wrapping_neg();
    let mut best = pick(rem & !low, options, memo);
    for (i, (mask, gain, _)) in options.iter().enumerate() {
        if mask & low != 0 && mask & !rem == 0 {
            let (w, mut rest) = pick(rem & !mask, options, memo);
            if w + gain > best.0 {
                rest.insert(0, i);
                best = (w + gain, rest);
            }
        }
    }
    memo.insert(rem, best.clone());
    best
}

fn center_paths(t: &Trunk, stack: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    visit(stack);
    let last = t.center[*stack.last().unwrap()];
    for j in 0..t.center.len() {
        if !stack.contains(&j) && t.has_edge(last, t.center[j]) {
            stack.push(j);
            center_paths(t, stack, visit);
            stack.pop();
        }
    }
}

/// Center of at most five vertices, disjoint parts without 5-paths, each
/// joined to the rest only by its own attachment edge.
fn attached_shape(t: &Trunk) -> bool {
    if t.center.len() > 5 {
        return false;
    }
    let mut owner: HashMap<Vertex, usize> = t.center.iter().map(|&v| (v, 0)).collect();
    for (i, a) in t.attachments.iter().enumerate() {
        if !a.part.contains(&a.entry) || !t.center.contains(&a.anchor) || !t.has_edge(a.anchor, a.entry) {
            return false;
        }
        for &v in &a.part {
            if owner.insert(v, i + 1).is_some() {
                return false;
            }
        }
        if a.part.len() >= 5 && (0..a.part.len()).any(|s| longest_in(t, &a.part, &mut vec![a.part[s]]) >= 5) {
            return false;
        }
    }
    if owner.len() != t.vertices.len() {
        return false;
    }
    t.edges.iter().all(|&(u, v)| match (owner.get(&u), owner.get(&v)) {
        (Some(x), Some(y)) if x == y => true,
        (Some(&x), Some(&y)) => {
            let (side, entry, anchor) = if x == 0 { (y, v, u) } else if y == 0 { (x, u, v) } else { return false };
            let a = &t.attachments[side - 1];
            a.entry == entry && a.anchor == anchor
        }
        _ => false,
    })
}

fn longest_in(t: &Trunk, part: &[Vertex], cur: &mut Vec<Vertex>) -> usize {
    let mut best = cur.len();
    let last = *cur.last().unwrap();
    for &w in part {
        if !cur.contains(&w) && t.has_edge(last, w) {
            cur.push(w);
            best = best.max(longest_in(t, part, cur));
            cur.pop();
        }
    }
    best
}
