//! Seeded random instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{edge, Edge, Graph, Vertex};

/// Random graph model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    /// `G(n, p)`.
    Gnp { p: f64 },
    /// Disjoint paths with the given orders on shuffled vertices, plus `G(n, noise)`.
    Planted { paths: Vec<usize>, noise: f64 },
    /// Copies of a hub gadget (a 4-path with two 4-paths hung off its second
    /// vertex by their second vertices, and an edge hung off its third
    /// vertex), joined by `G(n, noise)` edges.
    Clusters { noise: f64 },
    /// Hub gadgets alternating with 5-paths, plus `extra` uniformly random edges.
    Mixed { extra: usize },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Gnp { .. } => "gnp",
            Model::Planted { .. } => "planted",
            Model::Clusters { .. } => "clusters",
            Model::Mixed { .. } => "mixed",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Gnp { p } => write!(f, "gnp:{p}"),
            Model::Planted { paths, noise } => {
                let list: Vec<String> = paths.iter().map(usize::to_string).collect();
                write!(f, "planted:{}:{noise}", list.join(","))
            }
            Model::Clusters { noise } => write!(f, "clusters:{noise}"),
            Model::Mixed { extra } => write!(f, "mixed:{extra}"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    /// `gnp:P`, `planted:L1,L2,...:NOISE`, `clusters:NOISE` or `mixed:K`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |why: &str| Error::Precondition(format!("model `{s}`: {why}"));
        let prob = |t: &str| -> Result<f64, Error> {
            let p: f64 = t.parse().map_err(|_| bad("probability is not a number"))?;
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(bad("probability outside [0, 1]"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["gnp", p] => Ok(Model::Gnp { p: prob(p)? }),
            ["planted", lens, noise] => {
                let paths = lens
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| bad("path order is not an integer")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Model::Planted { paths, noise: prob(noise)? })
            }
            ["clusters", noise] => Ok(Model::Clusters { noise: prob(noise)? }),
            ["mixed", extra] => Ok(Model::Mixed { extra: extra.parse().map_err(|_| bad("edge count is not an integer"))? }),
            _ => Err(bad("expected gnp:P, planted:L1,L2:NOISE, clusters:NOISE or mixed:K")),
        }
    }
}

/// A generated graph and what the model guarantees about it.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub graph: Graph,
    pub model: Model,
    pub seed: u64,
    /// Vertices covered by the planted paths, a lower bound on `opt`.
    pub planted: usize,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn generate(model: &Model, n: usize, seed: u64) -> Instance {
    let mut rng = rng(seed);
    let (mut edges, planted): (Vec<Edge>, usize) = match model {
        Model::Gnp { p } => (gnp_edges(&mut rng, n, *p), 0),
        Model::Planted { paths, noise } => {
            let mut order: Vec<Vertex> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut edges = Vec::new();
            let mut at = 0;
            let mut planted = 0;
            for &len in paths {
                if len < 2 || at + len > n {
                    break;
                }
                edges.extend(order[at..at + len].windows(2).map(|w| edge(w[0], w[1])));
                if len >= 5 {
                    planted += len;
                }
                at += len;
            }
            edges.extend(gnp_edges(&mut rng, n, *noise));
            (edges, planted)
        }
        Model::Clusters { noise } => {
            let mut order: Vec<Vertex> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut edges = Vec::new();
            let mut planted = 0;
            for chunk in order.chunks_exact(GADGET_ORDER) {
                edges.extend(GADGET.iter().map(|&(a, b)| edge(chunk[a], chunk[b])));
                planted += 7;
            }
            edges.extend(gnp_edges(&mut rng, n, *noise));
            (edges, planted)
        }
        Model::Mixed { extra } => {
            let mut order: Vec<Vertex> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut edges = Vec::new();
            let mut planted = 0;
            let mut at = 0;
            for i in 0.. {
                let size = if i % 2 == 0 { GADGET_ORDER } else { 5 };
                if at + size > n {
                    break;
                }
                let block = &order[at..at + size];
                if size == 5 {
                    edges.extend(block.windows(2).map(|w| edge(w[0], w[1])));
                    planted += 5;
                } else {
                    edges.extend(GADGET.iter().map(|&(a, b)| edge(block[a], block[b])));
                    planted += 7;
                }
                at += size;
            }
            if n >= 2 {
                for _ in 0..*extra {
                    let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
                    if u != v {
                        edges.push(edge(u, v));
                    }
                }
            }
            (edges, planted)
        }
    };
    edges.sort_unstable();
    edges.dedup();
    let graph = Graph::new(n, edges).expect("generated edges are in range");
    Instance { graph, model: model.clone(), seed, planted }
}

const GADGET_ORDER: usize = 14;
const GADGET: [Edge; 13] =
    [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7), (8, 9), (9, 10), (10, 11), (12, 13), (1, 5), (1, 9), (2, 12)];

fn gnp_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<Edge> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                out.push((u, v));
            }
        }
    }
    out
}

/// Random planted model: path orders 5 to 9 filling about four fifths of `n`.
pub fn random_planted(rng: &mut ChaCha8Rng, n: usize, noise: f64) -> Model {
    let mut paths = Vec::new();
    let mut used = 0;
    while used + 5 <= n * 4 / 5 {
        let len = rng.random_range(5..=9).min(n - used);
        paths.push(len);
        used += len;
    }
    Model::Planted { paths, noise }
}
