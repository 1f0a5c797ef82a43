use super::blossom::max_weight_matching;
use super::graph::{Edge, ErrorGraph};
use super::{Weight, NATS_TO_DB};
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// One matched pair; `b == None` means the node was matched to the boundary.
pub type Matched = (usize, Option<usize>);

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult<W> {
    pub pairs: Vec<Matched>,
    /// Sum of shortest-path weights over all matched pairs.
    pub weight: W,
    /// XOR of observable masks along all matched paths.
    pub obs: u64,
}

impl<W: Weight> MatchResult<W> {
    fn empty() -> Self {
        MatchResult { pairs: Vec::new(), weight: W::zero(), obs: 0 }
    }

    pub fn flips(&self, k: usize) -> u8 {
        ((self.obs >> k) & 1) as u8
    }
}

/// Signed complementary gap in decibels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapValue {
    /// Non-negative magnitude of the log-likelihood ratio.
    pub magnitude: f64,
    /// Whether the minimum-weight class disagreed with the truth.
    pub failed: bool,
}

impl GapValue {
    pub fn value(&self) -> f64 {
        if self.failed {
            -self.magnitude
        } else {
            self.magnitude
        }
    }
}

#[derive(Clone, Copy)]
struct Item<W> {
    dist: W,
    node: usize,
}

impl<W: PartialOrd> PartialEq for Item<W> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<W: PartialOrd> Eq for Item<W> {}
impl<W: PartialOrd> PartialOrd for Item<W> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<W: PartialOrd> Ord for Item<W> {
    // Reversed so the max-heap pops the nearest node, lowest index first.
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.partial_cmp(&self.dist).unwrap_or(Ordering::Equal).then_with(|| o.node.cmp(&self.node))
    }
}

/// Per-call working memory, reused across decodes.
struct Scratch<W> {
    search: Search<W>,
    /// One plus the position of each flagged node in the syndrome, else 0.
    slot: Vec<u32>,
}

impl<W: Weight> Scratch<W> {
    fn new(nodes: usize) -> Self {
        Scratch {
            search: Search {
                dist: vec![W::zero(); nodes],
                mask: vec![0; nodes],
                seen: vec![0; nodes],
                settled: vec![0; nodes],
                epoch: 0,
                heap: BinaryHeap::new(),
            },
            slot: vec![0; nodes],
        }
    }
}

struct Search<W> {
    dist: Vec<W>,
    mask: Vec<u64>,
    seen: Vec<u32>,
    settled: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Item<W>>,
}

impl<W: Weight> Search<W> {
    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.settled.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.heap.clear();
    }

    /// Dijkstra from `src`. Paths never continue through the boundary node.
    /// Calls `visit(node, dist, mask)` on settle; stops when it returns false
    /// or the popped distance reaches `cutoff`.
    fn run(&mut self, g: &ErrorGraph<W>, src: usize, cutoff: Option<W>, mut visit: impl FnMut(usize, W, u64) -> bool) {
        self.next_epoch();
        let ep = self.epoch;
        let boundary = g.boundary();
        self.seen[src] = ep;
        self.dist[src] = W::zero();
        self.mask[src] = 0;
        self.heap.push(Item { dist: W::zero(), node: src });
        while let Some(Item { dist, node }) = self.heap.pop() {
            if self.settled[node] == ep || dist > self.dist[node] {
                continue;
            }
            if cutoff.is_some_and(|c| dist >= c) {
                return;
            }
            self.settled[node] = ep;
            if !visit(node, dist, self.mask[node]) {
                return;
            }
            if node == boundary && node != src {
                continue;
            }
            let m = self.mask[node];
            for &(nb, k) in g.neighbours(node) {
                if self.settled[nb] == ep {
                    continue;
                }
                let e: &Edge<W> = &g.edges()[k];
                let nd = dist + e.weight;
                if self.seen[nb] != ep || nd < self.dist[nb] {
                    self.seen[nb] = ep;
                    self.dist[nb] = nd;
                    self.mask[nb] = m ^ e.obs;
                    self.heap.push(Item { dist: nd, node: nb });
                }
            }
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Sorts the syndrome and cancels repeated nodes in pairs.
fn normalize(n: usize, syndrome: &[usize]) -> Result<Vec<usize>> {
    let mut s = syndrome.to_vec();
    s.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(s.len());
    for x in s {
        if x >= n {
            return Err(Error::Parameter(format!("syndrome node {x} out of range for {n} detectors")));
        }
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    Ok(out)
}

fn decode_with<W: Weight>(g: &ErrorGraph<W>, sc: &mut Scratch<W>, syndrome: &[usize]) -> Result<MatchResult<W>> {
    let s = normalize(g.num_detectors(), syndrome)?;
    let k = s.len();
    if k == 0 {
        return Ok(MatchResult::empty());
    }
    let Scratch { search, slot } = sc;

    // Distance from every flagged node to the boundary, in one search.
    let mut to_b: Vec<Option<(W, u64)>> = vec![None; k];
    for (i, &x) in s.iter().enumerate() {
        slot[x] = i as u32 + 1;
    }
    let slots: &[u32] = slot;
    let mut left = k;
    search.run(g, g.boundary(), None, |node, d, m| {
        if node < g.num_detectors() && slots[node] != 0 {
            to_b[slots[node] as usize - 1] = Some((d, m));
            left -= 1;
        }
        left > 0
    });

    let all_reach = to_b.iter().all(|t| t.is_some());
    let bd = |j: usize| to_b[j].map_or(W::zero(), |t| t.0);
    // Flagged nodes by decreasing boundary distance.
    let mut by_b: Vec<usize> = (0..k).collect();
    by_b.sort_by(|&a, &b| bd(b).partial_cmp(&bd(a)).unwrap_or(std::cmp::Ordering::Equal));
    let mut reached = vec![false; k];

    // Pairwise shortest paths, pruned where going via the boundary is no worse.
    // A search stops once no unreached partner could still beat its boundary.
    let mut pairs: Vec<(usize, usize, W, u64)> = Vec::new();
    for i in 0..k {
        let mut remaining = k - 1 - i;
        if remaining == 0 {
            break;
        }
        reached.iter_mut().for_each(|r| *r = false);
        let mut top = 0usize;
        let src = s[i];
        search.run(g, src, None, |node, d, m| {
            if all_reach {
                while top < k && (by_b[top] <= i || reached[by_b[top]]) {
                    top += 1;
                }
                if top == k || d >= bd(i) + bd(by_b[top]) {
                    return false;
                }
            }
            if node < g.num_detectors() && slots[node] as usize > i + 1 {
                let j = slots[node] as usize - 1;
                reached[j] = true;
                let keep = match (to_b[i], to_b[j]) {
                    (Some((a, _)), Some((b, _))) => d < a + b,
                    _ => true,
                };
                if keep {
                    pairs.push((i, j, d, m));
                }
                remaining -= 1;
            }
            remaining > 0
        });
    }
    for &x in &s {
        slot[x] = 0;
    }

    // Independent clusters of flagged nodes.
    let mut parent: Vec<usize> = (0..k).collect();
    for &(i, j, _, _) in &pairs {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..k {
        let r = find(&mut parent, i);
        members[r].push(i);
    }
    let mut cluster_pairs: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (idx, &(i, _, _, _)) in pairs.iter().enumerate() {
        let r = find(&mut parent, i);
        cluster_pairs[r].push(idx);
    }

    let mut result = MatchResult::empty();
    let add_boundary = |res: &mut MatchResult<W>, i: usize| -> Result<()> {
        let (d, m) = to_b[i].ok_or(Error::UnreachableNode(s[i]))?;
        res.pairs.push((s[i], None));
        res.weight = res.weight + d;
        res.obs ^= m;
        Ok(())
    };
    for root in 0..k {
        let mem = &members[root];
        match mem.len() {
            0 => continue,
            1 => add_boundary(&mut result, mem[0])?,
            2 if cluster_pairs[root].len() == 1 => {
                let (i, j, d, m) = pairs[cluster_pairs[root][0]];
                result.pairs.push((s[i], Some(s[j])));
                result.weight = result.weight + d;
                result.obs ^= m;
            }
            c => {
                let mut local = vec![usize::MAX; k];
                for (t, &i) in mem.iter().enumerate() {
                    local[i] = t;
                }
                let mut big = W::zero();
                for &idx in &cluster_pairs[root] {
                    if pairs[idx].2 > big {
                        big = pairs[idx].2;
                    }
                }
                for &i in mem {
                    if let Some((d, _)) = to_b[i] {
                        if d > big {
                            big = d;
                        }
                    }
                }
                let cap = big + W::one();
                let mut edges: Vec<(usize, usize, W)> = Vec::new();
                for &idx in &cluster_pairs[root] {
                    let (i, j, d, _) = pairs[idx];
                    edges.push((local[i], local[j], cap - d));
                    edges.push((c + local[i], c + local[j], cap));
                }
                for &i in mem {
                    if let Some((d, _)) = to_b[i] {
                        edges.push((local[i], c + local[i], cap - d));
                    }
                }
                let mate = max_weight_matching(2 * c, &edges, true);
                for (t, &i) in mem.iter().enumerate() {
                    let m = mate[t];
                    if m == usize::MAX {
                        return Err(Error::UnreachableNode(s[i]));
                    }
                    if m >= c {
                        add_boundary(&mut result, i)?;
                    } else if m > t {
                        let j = mem[m];
                        let &(_, _, d, msk) = cluster_pairs[root]
                            .iter()
                            .map(|&idx| &pairs[idx])
                            .find(|p| p.0 == i.min(j) && p.1 == i.max(j))
                            .expect("matched pair has a path");
                        result.pairs.push((s[i], Some(s[j])));
                        result.weight = result.weight + d;
                        result.obs ^= msk;
                    }
                }
                for t in c..2 * c {
                    if mate[t] == usize::MAX {
                        return Err(Error::UnreachableNode(s[mem[t - c]]));
                    }
                }
            }
        }
    }
    result.pairs.sort_unstable();
    Ok(result)
}

/// Graph with the tagged boundary side of one observable split off into
/// its own detector, plus a potential that predicts the observable parity.
struct Forced<W> {
    graph: ErrorGraph<W>,
    scratch: Scratch<W>,
    /// Parity contribution of each flagged detector; `None` if undefined.
    potential: Option<Vec<u8>>,
}

impl<W: Weight> Forced<W> {
    fn build(g: &ErrorGraph<W>, k: usize) -> Result<Self> {
        let n = g.num_detectors();
        let (l, r) = (n, n + 1);
        let edges: Vec<Edge<W>> = g
            .edges()
            .iter()
            .map(|e| {
                let mut e = *e;
                if e.b == n {
                    e.b = if (e.tag >> k) & 1 == 1 { l } else { r };
                }
                e.tag = 0;
                e
            })
            .collect();
        let split = ErrorGraph::new(n + 1, edges)?;
        let potential = Self::potential(&split, k);
        Ok(Forced { scratch: Scratch::new(n + 2), graph: split, potential })
    }

    /// Solves `f(a) ^ f(b) = obs_k(e) ^ [e touches L]` with `f(R) = f(L) = 0`.
    fn potential(split: &ErrorGraph<W>, k: usize) -> Option<Vec<u8>> {
        let n = split.num_detectors() - 1;
        let (l, r) = (n, n + 1);
        let mut f = vec![2u8; n + 2];
        f[r] = 0;
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            for &(nb, e) in split.neighbours(v) {
                let edge = &split.edges()[e];
                let want = f[v] ^ ((edge.obs >> k) & 1) as u8 ^ (edge.a == l || edge.b == l) as u8;
                if f[nb] == 2 {
                    f[nb] = want;
                    stack.push(nb);
                } else if f[nb] != want {
                    return None;
                }
            }
        }
        if f[l] == 1 {
            return None;
        }
        if f[l] == 2 {
            f[l] = 0;
        }
        Some(f.into_iter().map(|x| x & 1).collect())
    }
}

/// Decoder bound to one graph, holding reusable scratch space.
pub struct Decoder<'g, W: Weight> {
    graph: &'g ErrorGraph<W>,
    scratch: Scratch<W>,
    forced: Vec<Option<Forced<W>>>,
}

impl<'g, W: Weight> Decoder<'g, W> {
    pub fn new(graph: &'g ErrorGraph<W>) -> Self {
        Decoder { graph, scratch: Scratch::new(graph.num_detectors() + 1), forced: Vec::new() }
    }

    pub fn graph(&self) -> &ErrorGraph<W> {
        self.graph
    }

    pub fn decode(&mut self, syndrome: &[usize]) -> Result<MatchResult<W>> {
        decode_with(self.graph, &mut self.scratch, syndrome)
    }

    /// Minimum-weight matching restricted to observable `k` flipping with `parity`.
    pub fn decode_forced(&mut self, syndrome: &[usize], k: usize, parity: u8) -> Result<MatchResult<W>> {
        if k >= 64 {
            return Err(Error::Parameter(format!("observable index {k} exceeds 63")));
        }
        if self.forced.len() <= k {
            self.forced.resize_with(k + 1, || None);
        }
        if self.forced[k].is_none() {
            self.forced[k] = Some(Forced::build(self.graph, k)?);
        }
        let n = self.graph.num_detectors();
        let fz = self.forced[k].as_mut().unwrap();
        let s = normalize(n, syndrome)?;
        let first = match &fz.potential {
            Some(f) => parity ^ s.iter().fold(0u8, |acc, &x| acc ^ f[x]),
            None => 0,
        };
        for flag in [first, first ^ 1] {
            let mut with_l = s.clone();
            if flag == 1 {
                with_l.push(n);
            }
            match decode_with(&fz.graph, &mut fz.scratch, &with_l) {
                Ok(mut r) if r.flips(k) == parity => {
                    r.pairs.retain(|p| p.0 != n);
                    for p in &mut r.pairs {
                        if p.1 == Some(n) {
                            p.1 = None;
                        }
                    }
                    r.pairs.sort_unstable();
                    return Ok(r);
                }
                Ok(_) | Err(Error::UnreachableNode(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::InfeasibleClass { parity })
    }

    /// Signed gap between the best matching and the best matching in the
    /// opposite class of observable `k`.
    pub fn complementary_gap(&mut self, syndrome: &[usize], k: usize, truth: u8) -> Result<GapValue> {
        let best = self.decode(syndrome)?;
        let pred = best.flips(k);
        let other = self.decode_forced(syndrome, k, pred ^ 1)?;
        let diff = (other.weight - best.weight).to_f64().unwrap_or(f64::NAN);
        Ok(GapValue { magnitude: diff.max(0.0) * NATS_TO_DB, failed: pred != truth })
    }
}

pub fn decode<W: Weight>(graph: &ErrorGraph<W>, syndrome: &[usize]) -> Result<MatchResult<W>> {
    Decoder::new(graph).decode(syndrome)
}

pub fn decode_forced<W: Weight>(graph: &ErrorGraph<W>, syndrome: &[usize], k: usize, parity: u8) -> Result<MatchResult<W>> {
    Decoder::new(graph).decode_forced(syndrome, k, parity)
}

pub fn complementary_gap<W: Weight>(graph: &ErrorGraph<W>, syndrome: &[usize], k: usize, truth: u8) -> Result<GapValue> {
    Decoder::new(graph).complementary_gap(syndrome, k, truth)
}

/// `f` over detectors with `obs_k(e) = f(a) ^ f(b) ^ [e is a tagged boundary
/// edge]` on every edge, or `None` if no such labelling exists. XOR-ing the
/// flagged detectors with `f = 1` into observable `k` gives the parity of
/// tagged boundary crossings.
pub fn boundary_potential<W: Weight>(graph: &ErrorGraph<W>, k: usize) -> Result<Option<Vec<u8>>> {
    let n = graph.num_detectors();
    Ok(Forced::build(graph, k)?.potential.map(|mut f| {
        f.truncate(n);
        f
    }))
}
