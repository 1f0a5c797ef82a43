use super::Weight;
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// An edge between two detectors, or between a detector and the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<W> {
    pub a: usize,
    /// Second endpoint; equal to the graph's boundary index for boundary edges.
    pub b: usize,
    pub weight: W,
    /// Probability the edge was derived from, if any.
    pub p: f64,
    /// Observables flipped by this edge.
    pub obs: u64,
    /// Bit `k` marks a boundary edge on the side used to force observable `k`.
    pub tag: u64,
}

/// Weighted matching graph with detectors `0..n` and boundary node `n`.
#[derive(Clone, Debug)]
pub struct ErrorGraph<W> {
    n: usize,
    edges: Vec<Edge<W>>,
    start: Vec<usize>,
    adj: Vec<(usize, usize)>,
}

impl<W: Weight> ErrorGraph<W> {
    pub fn new(detectors: usize, edges: Vec<Edge<W>>) -> Result<Self> {
        for e in &edges {
            if e.a >= detectors || e.b > detectors || e.a == e.b {
                return Err(Error::Parameter(format!("edge ({}, {}) out of range for {detectors} detectors", e.a, e.b)));
            }
            if e.weight < W::zero() {
                return Err(Error::Parameter(format!("negative weight on edge ({}, {})", e.a, e.b)));
            }
        }
        let mut deg = vec![0usize; detectors + 2];
        for e in &edges {
            deg[e.a + 1] += 1;
            deg[e.b + 1] += 1;
        }
        for i in 1..deg.len() {
            deg[i] += deg[i - 1];
        }
        let mut fill = deg.clone();
        let mut adj = vec![(0, 0); deg[detectors + 1]];
        for (k, e) in edges.iter().enumerate() {
            adj[fill[e.a]] = (e.b, k);
            fill[e.a] += 1;
            adj[fill[e.b]] = (e.a, k);
            fill[e.b] += 1;
        }
        Ok(ErrorGraph { n: detectors, edges, start: deg, adj })
    }

    /// Builds edges from probabilities, weighting each by `ln((1-p)/p)`.
    pub fn from_probabilities(detectors: usize, edges: &[(usize, usize, f64, u64, u64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for &(a, b, p, obs, tag) in edges {
            if !(p > 0.0 && p < 0.5) {
                return Err(Error::Parameter(format!("edge probability {p} outside (0, 1/2)")));
            }
            let w = ((1.0 - p) / p).ln();
            let weight = W::from(w).ok_or_else(|| Error::Parameter("weight not representable".into()))?;
            out.push(Edge { a, b, weight, p, obs, tag });
        }
        Self::new(detectors, out)
    }

    pub fn num_detectors(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<W>] {
        &self.edges
    }

    pub fn set_weight(&mut self, edge: usize, w: W) {
        debug_assert!(w >= W::zero());
        self.edges[edge].weight = w;
    }

    /// `(neighbour, edge index)` pairs incident to `v` (the boundary included).
    #[inline]
    pub fn neighbours(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[self.start[v]..self.start[v + 1]]
    }

    pub fn is_boundary_edge(&self, k: usize) -> bool {
        self.edges[k].b == self.n
    }

    /// Multiplies every weight by `c`.
    pub fn scaled(&self, c: W) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.weight = e.weight * c;
        }
        g
    }

    /// Line-oriented text: a `GRAPH n` header, then `EDGE a b weight p obs tag`
    /// lines with `B` standing for the boundary.
    pub fn to_text(&self) -> String {
        let mut s = format!("GRAPH {}\n", self.n);
        for e in &self.edges {
            let b = if e.b == self.n { "B".to_string() } else { e.b.to_string() };
            let w = e.weight.to_f64().unwrap_or(f64::NAN);
            writeln!(s, "EDGE {} {} {:e} {:e} {} {}", e.a, b, w, e.p, e.obs, e.tag).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: no + 1, msg: msg.to_string() };
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok[0] {
                "GRAPH" => n = Some(tok.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad node count"))?),
                "EDGE" => {
                    let nn: usize = n.ok_or_else(|| bad("EDGE before GRAPH"))?;
                    if tok.len() != 7 {
                        return Err(bad("EDGE needs 6 fields"));
                    }
                    let a = tok[1].parse().map_err(|_| bad("bad endpoint"))?;
                    let b = if tok[2] == "B" { nn } else { tok[2].parse().map_err(|_| bad("bad endpoint"))? };
                    let w: f64 = tok[3].parse().map_err(|_| bad("bad weight"))?;
                    let weight = W::from(w).ok_or_else(|| bad("weight not representable"))?;
                    let p = tok[4].parse().map_err(|_| bad("bad probability"))?;
                    let obs = tok[5].parse().map_err(|_| bad("bad observable mask"))?;
                    let tag = tok[6].parse().map_err(|_| bad("bad tag"))?;
                    edges.push(Edge { a, b, weight, p, obs, tag });
                }
                other => return Err(bad(&format!("unknown record {other}"))),
            }
        }
        Self::new(n.ok_or(Error::Parse { line: 0, msg: "missing GRAPH header".into() })?, edges)
    }
}
