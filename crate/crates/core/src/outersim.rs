//! Outer-code simulation of yoked blocks.
//!
//! Each graph collects one Pauli type of patch-level logical errors. Its
//! detectors are the yokes of the opposite type, one layer per outer round.
//! A spacelike edge stands for a logical error on one patch during the
//! `r_i` inner rounds before a yoke measurement. A timelike edge stands for
//! a faulty yoke measurement. Edge observable bit `j` marks patch `j`.

use crate::error::{Error, Result};
use crate::gapstore::{CalibrationModel, GapDistribution, GapSampler, MemoryExperiment};
use crate::gf2::{BitVec, RowBasis};
use crate::matcher::{boundary_potential, Edge};
use crate::qpcc::{coords, ParityCheckCode, Pauli};
use crate::stabsim::shot_rng;
use crate::{Decoder, DetectorErrorGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockShape {
    /// `n` patches under one pair of yokes.
    Line(usize),
    /// `w x w` patches with a yoke per row and per column.
    Square(usize),
}

impl BlockShape {
    pub fn dimension(self) -> usize {
        match self {
            BlockShape::Line(_) => 1,
            BlockShape::Square(_) => 2,
        }
    }

    pub fn patches(self) -> usize {
        match self {
            BlockShape::Line(n) => n,
            BlockShape::Square(w) => w * w,
        }
    }

    pub fn sides(self) -> Vec<usize> {
        match self {
            BlockShape::Line(n) => vec![n],
            BlockShape::Square(w) => vec![w, w],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub d: usize,
    /// Inner rounds between yoke measurements.
    pub r_i: usize,
    pub r_o: usize,
    pub shape: BlockShape,
    /// Spacetime extent of one yoke measurement, in inner rounds.
    pub n_t: f64,
    pub seed: u64,
    pub shots: usize,
}

impl SimConfig {
    /// 10 outer rounds and yoke measurements spanning `100 d` rounds.
    pub fn new(d: usize, r_i: usize, shape: BlockShape) -> Self {
        SimConfig { d, r_i, r_o: 10, shape, n_t: 100.0 * d as f64, seed: 0, shots: 1000 }
    }

    fn check(&self) -> Result<()> {
        if self.d == 0 || self.r_i == 0 || self.r_o == 0 || self.shape.patches() == 0 || !(self.n_t > 0.0) {
            return Err(Error::Parameter("simulation parameters must be positive".into()));
        }
        if self.shape.patches() > 64 {
            return Err(Error::ScaleGuard(format!("{} patches per block exceeds 64", self.shape.patches())));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Spacelike { patch: usize, layer: usize },
    Timelike { node: usize, layer: usize },
}

#[derive(Clone, Debug)]
pub struct OuterGraph {
    /// Pauli type of the patch errors this graph tracks.
    pub errors: Pauli,
    pub dimension: usize,
    pub layers: usize,
    pub nodes_per_layer: usize,
    pub graph: DetectorErrorGraph,
    pub kinds: Vec<EdgeKind>,
    /// Detector pair (or single detector) of each patch within a layer.
    pub patch_nodes: Vec<(usize, Option<usize>)>,
}

impl OuterGraph {
    pub fn spacelike_edges(&self) -> usize {
        self.kinds.iter().filter(|k| matches!(k, EdgeKind::Spacelike { .. })).count()
    }

    pub fn timelike_edges(&self) -> usize {
        self.kinds.len() - self.spacelike_edges()
    }
}

/// Row and column of each patch as seen by yokes that detect `errors`.
///
/// Z errors are caught by the X yokes, which are plain rows and columns. X
/// errors are caught by the Z yokes, whose lines are the rows and columns of
/// the permuted positions.
pub fn patch_cells(code: &ParityCheckCode, errors: Pauli) -> Vec<Vec<usize>> {
    let sides = code.side_lengths();
    (0..code.n())
        .map(|q| {
            let pos = match errors {
                Pauli::Z => q,
                Pauli::X => code.permutation().forward[q],
            };
            coords(sides, pos)
        })
        .collect()
}

/// X-error and Z-error outer graphs of one block. Weights are placeholders
/// overwritten by sampled gaps.
pub fn build_outer_graph(cfg: &SimConfig, code: &ParityCheckCode) -> Result<(OuterGraph, OuterGraph)> {
    cfg.check()?;
    if code.side_lengths() != cfg.shape.sides().as_slice() {
        return Err(Error::Mismatch(format!("code sides {:?} do not match block {:?}", code.side_lengths(), cfg.shape)));
    }
    let build = |errors: Pauli| -> Result<OuterGraph> {
        let cells = patch_cells(code, errors);
        let (per, patch_nodes): (usize, Vec<(usize, Option<usize>)>) = match cfg.shape {
            BlockShape::Line(n) => (1, vec![(0, None); n]),
            BlockShape::Square(w) => (2 * w, cells.iter().map(|c| (c[0], Some(w + c[1]))).collect()),
        };
        let n = per * cfg.r_o;
        let mut edges = Vec::new();
        let mut kinds = Vec::new();
        for t in 0..cfg.r_o {
            for (j, &(a, b)) in patch_nodes.iter().enumerate() {
                let b = b.map_or(n, |b| t * per + b);
                edges.push(Edge { a: t * per + a, b, weight: 1.0, p: 0.0, obs: 1 << j, tag: 0 });
                kinds.push(EdgeKind::Spacelike { patch: j, layer: t });
            }
            if t + 1 < cfg.r_o {
                for v in 0..per {
                    edges.push(Edge { a: t * per + v, b: (t + 1) * per + v, weight: 1.0, p: 0.0, obs: 0, tag: 0 });
                    kinds.push(EdgeKind::Timelike { node: v, layer: t });
                }
            }
        }
        Ok(OuterGraph {
            errors,
            dimension: cfg.shape.dimension(),
            layers: cfg.r_o,
            nodes_per_layer: per,
            graph: DetectorErrorGraph::new(n, edges)?,
            kinds,
            patch_nodes,
        })
    };
    Ok((build(Pauli::X)?, build(Pauli::Z)?))
}

pub fn build_block_code(shape: BlockShape) -> Result<ParityCheckCode> {
    crate::qpcc::build_qpcc(&shape.sides())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureStats {
    pub shots: u64,
    pub failures_x: u64,
    pub failures_z: u64,
    pub failures_any: u64,
    pub patches: usize,
    /// Inner rounds covered by one shot.
    pub inner_rounds: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl FailureStats {
    pub fn new(shots: u64, failures_x: u64, failures_z: u64, failures_any: u64, patches: usize, inner_rounds: u64) -> Self {
        let scale = (patches as u64 * inner_rounds) as f64;
        let (lo, hi) = wilson(failures_any, shots, 1.96);
        let rate = if shots == 0 { 0.0 } else { failures_any as f64 / shots as f64 / scale };
        FailureStats { shots, failures_x, failures_z, failures_any, patches, inner_rounds, rate, ci_low: lo / scale, ci_high: hi / scale }
    }

    /// Probability that a shot fails.
    pub fn shot_failure_rate(&self) -> f64 {
        self.failures_any as f64 / self.shots.max(1) as f64
    }

    /// Per-patch-round rate counting only `p`-type failures.
    pub fn rate_of(&self, p: Pauli) -> (f64, f64, f64) {
        let f = if p == Pauli::X { self.failures_x } else { self.failures_z };
        let scale = (self.patches as u64 * self.inner_rounds) as f64;
        let (lo, hi) = wilson(f, self.shots, 1.96);
        (f as f64 / self.shots.max(1) as f64 / scale, lo / scale, hi / scale)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let den = 1.0 + z * z / n;
    let c = (p + z * z / (2.0 * n)) / den;
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / den;
    ((c - h).max(0.0), (c + h).min(1.0))
}

/// Outcome of one graph in one shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    /// Edge indices that carried an error.
    pub errored: Vec<usize>,
    pub residual: u64,
    pub failed: bool,
}

/// Gap-sampling simulator over a block's two outer graphs.
pub struct GapSimulation {
    cfg: SimConfig,
    graphs: [OuterGraph; 2],
    spans: [RowBasis; 2],
    space: GapSampler,
    time: GapSampler,
    patches: usize,
}

impl GapSimulation {
    pub fn new(cfg: &SimConfig, code: &ParityCheckCode, dist: &GapDistribution, model: &CalibrationModel) -> Result<Self> {
        if dist.d != cfg.d {
            return Err(Error::Mismatch(format!("distribution is for d={}, config has d={}", dist.d, cfg.d)));
        }
        let (gx, gz) = build_outer_graph(cfg, code)?;
        let base = dist.effective_rounds();
        let space = dist.extrapolate_min_of_m(cfg.r_i as f64 / base)?.sampler(model)?;
        let time = dist.extrapolate_min_of_m(cfg.n_t / base)?.sampler(model)?;
        let spans = [RowBasis::new(code.checks(Pauli::X)), RowBasis::new(code.checks(Pauli::Z))];
        Ok(GapSimulation { cfg: *cfg, graphs: [gx, gz], spans, space, time, patches: code.n() })
    }

    pub fn graphs(&self) -> &[OuterGraph; 2] {
        &self.graphs
    }

    fn run_graph(&self, which: usize, g: &mut DetectorErrorGraph, rng: &mut impl rand::Rng, syn: &mut Vec<usize>) -> Result<ShotRecord> {
        let og = &self.graphs[which];
        let n = og.graph.num_detectors();
        let mut flags = vec![false; n + 1];
        let mut truth = 0u64;
        let mut errored = Vec::new();
        for (k, kind) in og.kinds.iter().enumerate() {
            let sampler = if matches!(kind, EdgeKind::Spacelike { .. }) { &self.space } else { &self.time };
            let (w, err) = sampler.sample(rng);
            g.set_weight(k, w);
            if err {
                let e = &og.graph.edges()[k];
                flags[e.a] ^= true;
                flags[e.b] ^= true;
                truth ^= e.obs;
                errored.push(k);
            }
        }
        syn.clear();
        syn.extend((0..n).filter(|&v| flags[v]));
        let pred = Decoder::new(g).decode(syn)?.obs;
        let residual = truth ^ pred;
        let mut v = BitVec::zeros(self.patches);
        for j in 0..self.patches {
            if residual >> j & 1 == 1 {
                v.set(j, true);
            }
        }
        let failed = !self.spans[which].contains(&v);
        Ok(ShotRecord { errored, residual, failed })
    }

    /// X-graph and Z-graph records of one shot.
    pub fn shot(&self, shot: u64) -> Result<[ShotRecord; 2]> {
        let mut gs = [self.graphs[0].graph.clone(), self.graphs[1].graph.clone()];
        let mut rng = shot_rng(self.cfg.seed, shot);
        let mut syn = Vec::new();
        let [g0, g1] = &mut gs;
        Ok([self.run_graph(0, g0, &mut rng, &mut syn)?, self.run_graph(1, g1, &mut rng, &mut syn)?])
    }

    pub fn run(&self) -> Result<FailureStats> {
        const CHUNK: usize = 2048;
        let shots = self.cfg.shots;
        let parts: Vec<Result<[u64; 3]>> = (0..shots.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut gs = [self.graphs[0].graph.clone(), self.graphs[1].graph.clone()];
                let mut syn = Vec::new();
                let mut acc = [0u64; 3];
                for s in c * CHUNK..((c + 1) * CHUNK).min(shots) {
                    let mut rng = shot_rng(self.cfg.seed, s as u64);
                    let [g0, g1] = &mut gs;
                    let fx = self.run_graph(0, g0, &mut rng, &mut syn)?.failed;
                    let fz = self.run_graph(1, g1, &mut rng, &mut syn)?.failed;
                    acc[0] += fx as u64;
                    acc[1] += fz as u64;
                    acc[2] += (fx || fz) as u64;
                }
                Ok(acc)
            })
            .collect();
        let mut tot = [0u64; 3];
        for p in parts {
            let p = p?;
            (0..3).for_each(|i| tot[i] += p[i]);
        }
        let rounds = (self.cfg.r_o * self.cfg.r_i) as u64;
        Ok(FailureStats::new(shots as u64, tot[0], tot[1], tot[2], self.patches, rounds))
    }
}

pub fn run_gap_simulation(cfg: &SimConfig, code: &ParityCheckCode, dist: &GapDistribution, model: &CalibrationModel) -> Result<FailureStats> {
    GapSimulation::new(cfg, code, dist, model)?.run()
}

/// Largest block the full circuit-level simulation accepts.
pub const FULL_SIM_MAX_D: usize = 5;
pub const FULL_SIM_MAX_PATCHES: usize = 16;

/// Circuit-level simulation of one block with a single perfect yoke round.
///
/// Each patch runs a Z-basis memory, so only X-type patch errors are
/// simulated; they are reported as `failures_x` and `failures_any`. Yoke
/// detectors absorb the tagged boundary of each patch (row yokes in 2D) and,
/// in 2D, the opposite boundary too (column yokes). Everything is decoded as
/// a single matching problem.
pub struct FullSimulation {
    exp: MemoryExperiment,
    shape: BlockShape,
    graph: DetectorErrorGraph,
    /// Potential of the patch graph for the tagged side.
    f: Vec<u8>,
    cells: Vec<Vec<usize>>,
    span: RowBasis,
    patches: usize,
    yokes: usize,
}

impl FullSimulation {
    pub fn new(d: usize, shape: BlockShape, inner_rounds: usize, p: f64) -> Result<Self> {
        if d > FULL_SIM_MAX_D || shape.patches() > FULL_SIM_MAX_PATCHES {
            return Err(Error::ScaleGuard(format!(
                "full simulation limited to d <= {FULL_SIM_MAX_D} and {FULL_SIM_MAX_PATCHES} patches"
            )));
        }
        let code = build_block_code(shape)?;
        let exp = MemoryExperiment::new(d, inner_rounds, p)?;
        let inner = exp.graph();
        let f = boundary_potential(inner, 0)?.ok_or_else(|| Error::Structure("patch observable is not graphlike".into()))?;
        let cells = patch_cells(&code, Pauli::X);
        let np = shape.patches();
        let nd = inner.num_detectors();
        let (yokes, rows) = match shape {
            BlockShape::Line(_) => (1, 1),
            BlockShape::Square(w) => (2 * w, w),
        };
        let n = np * nd + yokes;
        let mut edges = Vec::with_capacity(np * inner.edges().len());
        for j in 0..np {
            let (row, col) = match shape {
                BlockShape::Line(_) => (0, None),
                BlockShape::Square(_) => (cells[j][0], Some(rows + cells[j][1])),
            };
            for e in inner.edges() {
                let mut out = Edge { a: j * nd + e.a, b: n, obs: 0, tag: 0, ..*e };
                if e.b == inner.boundary() {
                    if e.tag & 1 == 1 {
                        out.b = np * nd + row;
                        out.obs = 1 << j;
                    } else if let Some(c) = col {
                        out.b = np * nd + c;
                    }
                } else {
                    out.b = j * nd + e.b;
                }
                edges.push(out);
            }
        }
        Ok(FullSimulation {
            graph: DetectorErrorGraph::new(n, edges)?,
            exp,
            shape,
            f,
            cells,
            span: RowBasis::new(code.checks(Pauli::X)),
            patches: np,
            yokes,
        })
    }

    pub fn graph(&self) -> &DetectorErrorGraph {
        &self.graph
    }

    /// Combined syndrome and true per-patch flips (tagged-side parity).
    pub fn sample(&self, seed: u64, shot: u64) -> (Vec<usize>, u64) {
        let (mut fa, mut w) = (Vec::new(), Vec::new());
        let per: Vec<(u8, Vec<usize>)> = (0..self.patches)
            .map(|j| {
                let mut s = Vec::new();
                let obs = self.exp.shot(seed, shot * self.patches as u64 + j as u64, &mut fa, &mut w, &mut s);
                (obs, s)
            })
            .collect();
        self.combine(&per)
    }

    /// Joins per-patch `(observable flip, inner syndrome)` pairs into a
    /// combined syndrome, adding the yoke detectors they flip.
    pub fn combine(&self, per_patch: &[(u8, Vec<usize>)]) -> (Vec<usize>, u64) {
        let nd = self.exp.graph().num_detectors();
        let base = self.patches * nd;
        let mut syn = Vec::new();
        let mut yoke = vec![false; self.yokes];
        let mut truth = 0u64;
        for (j, (obs, s)) in per_patch.iter().enumerate() {
            let mut left = *obs;
            let mut right = *obs;
            for &v in s {
                left ^= self.f[v];
                right ^= 1 ^ self.f[v];
                syn.push(j * nd + v);
            }
            truth |= (left as u64) << j;
            match self.shape {
                BlockShape::Line(_) => yoke[0] ^= left == 1,
                BlockShape::Square(w) => {
                    yoke[self.cells[j][0]] ^= left == 1;
                    yoke[w + self.cells[j][1]] ^= right == 1;
                }
            }
        }
        syn.extend((0..self.yokes).filter(|&y| yoke[y]).map(|y| base + y));
        (syn, truth)
    }

    pub fn experiment(&self) -> &MemoryExperiment {
        &self.exp
    }

    pub fn num_yokes(&self) -> usize {
        self.yokes
    }

    pub fn run(&self, shots: usize, seed: u64) -> Result<FailureStats> {
        const CHUNK: usize = 512;
        let parts: Vec<Result<u64>> = (0..shots.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut dec = Decoder::new(&self.graph);
                let mut fails = 0u64;
                for s in c * CHUNK..((c + 1) * CHUNK).min(shots) {
                    let (syn, truth) = self.sample(seed, s as u64);
                    let residual = truth ^ dec.decode(&syn)?.obs;
                    let mut v = BitVec::zeros(self.patches);
                    (0..self.patches).filter(|j| residual >> j & 1 == 1).for_each(|j| v.set(j, true));
                    fails += !self.span.contains(&v) as u64;
                }
                Ok(fails)
            })
            .collect();
        let mut fails = 0;
        for p in parts {
            fails += p?;
        }
        Ok(FailureStats::new(shots as u64, fails, 0, fails, self.patches, self.exp.rounds as u64))
    }
}

pub fn simulate_concatenated_single_round(
    d: usize,
    shape: BlockShape,
    inner_rounds: usize,
    p: f64,
    shots: usize,
    seed: u64,
) -> Result<FailureStats> {
    FullSimulation::new(d, shape, inner_rounds, p)?.run(shots, seed)
}
