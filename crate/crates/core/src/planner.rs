//! Scaling-law fits, rate prediction and storage layout search.

use crate::error::{Error, Result};
use crate::qpcc::{check_sides, logical_count};
use serde::{Deserialize, Serialize};

/// `rate = r_o * r_i^e_r * n^e_n * lambda^-d * prefactor`, with exponents
/// fixed by the yoke dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub dimension: usize,
    pub lambda: f64,
    pub prefactor: f64,
}

impl ScalingFit {
    pub fn new(dimension: usize, lambda: f64, prefactor: f64) -> Result<Self> {
        exponents(dimension)?;
        if !(lambda > 1.0 && lambda.is_finite()) || !(prefactor > 0.0 && prefactor.is_finite()) {
            return Err(Error::Parameter(format!("fit needs lambda > 1 and a positive prefactor, got {lambda}, {prefactor}")));
        }
        Ok(ScalingFit { dimension, lambda, prefactor })
    }

    /// Reference fits for SI1000 noise at p = 1e-3.
    pub fn default_for(dimension: usize) -> Result<Self> {
        match dimension {
            0 => Self::new(0, 3.0, 1.0 / 20.0),
            1 => Self::new(1, 8.0, 1.0 / 500.0),
            2 => Self::new(2, 50.0, 1.0 / 200_000.0),
            k => Err(Error::Dimension(format!("no fit for dimension {k}"))),
        }
    }

    pub fn exponents(&self) -> (i32, i32) {
        exponents(self.dimension).unwrap()
    }
}

/// `(e_r, e_n)` for a yoke dimension.
pub fn exponents(dimension: usize) -> Result<(i32, i32)> {
    match dimension {
        0 => Ok((1, 1)),
        1 => Ok((2, 2)),
        2 => Ok((4, 2)),
        k => Err(Error::Dimension(format!("yoke dimension {k} is not 0, 1 or 2"))),
    }
}

/// Failure probability of one block over `r_o` outer rounds, clamped to [0, 1].
pub fn predict_rate(fit: &ScalingFit, d: usize, r_i: f64, r_o: f64, n: f64) -> f64 {
    let (er, en) = fit.exponents();
    let v = r_o * r_i.powi(er) * n.powi(en) * fit.lambda.powf(-(d as f64)) * fit.prefactor;
    v.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub d: usize,
    pub r_i: f64,
    pub r_o: f64,
    pub n: f64,
    pub rate: f64,
    pub weight: f64,
}

/// Weighted least squares on `log rate` for `log lambda` and `log prefactor`.
pub fn fit_scaling(data: &[FitPoint], dimension: usize) -> Result<ScalingFit> {
    let (er, en) = exponents(dimension)?;
    let mut pts = Vec::with_capacity(data.len());
    for p in data {
        if !(p.rate > 0.0 && p.weight > 0.0 && p.r_i > 0.0 && p.r_o > 0.0 && p.n > 0.0) {
            return Err(Error::Parameter(format!("fit point {p:?} needs positive rate, weight and sizes")));
        }
        let y = p.rate.ln() - p.r_o.ln() - er as f64 * p.r_i.ln() - en as f64 * p.n.ln();
        pts.push((p.d as f64, y, p.weight));
    }
    let w: f64 = pts.iter().map(|p| p.2).sum();
    if pts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / w;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / w;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateData("all points share one distance".into()));
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let lambda = (-slope).exp();
    let prefactor = (my - slope * mx).exp();
    if !(lambda > 1.0) {
        return Err(Error::DegenerateData(format!("fitted lambda {lambda} does not exceed 1")));
    }
    ScalingFit::new(dimension, lambda, prefactor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Storage {
    Cold,
    Hot,
}

/// Cycle lengths in units of `d` rounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// 1D cold: `per_block * m_b + fixed`.
    pub cold_1d_per_block: usize,
    pub cold_1d_fixed: usize,
    /// 2D cold: `per_width * w + fixed`.
    pub cold_2d_per_width: usize,
    pub cold_2d_fixed: usize,
    /// 1D hot cycle; the hallway is busy `hot_utilization` of the time.
    pub hot_1d: usize,
    pub hot_utilization: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { cold_1d_per_block: 8, cold_1d_fixed: 2, cold_2d_per_width: 25, cold_2d_fixed: 4, hot_1d: 50, hot_utilization: 0.4 }
    }
}

/// A candidate layout; `side` is `n` in 1D, `w` in 2D and ignored when unyoked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub dimension: usize,
    pub storage: Storage,
    pub d: usize,
    pub side: usize,
    pub blocks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutPlan {
    pub dimension: usize,
    pub storage: Storage,
    pub d: usize,
    /// Side lengths of one block; empty when unyoked.
    pub block: Vec<usize>,
    pub blocks: usize,
    pub cycle_rounds: usize,
    pub patches: usize,
    pub physical_qubits: usize,
    pub logicals: usize,
    pub qubits_per_logical: f64,
    /// Per logical qubit per round.
    pub predicted_rate: f64,
}

/// Physical qubits covered by one patch, lattice-surgery buffer included.
pub fn patch_qubits(d: usize) -> usize {
    2 * (d + 1) * (d + 1)
}

/// Footprint and predicted rate of one layout.
///
/// Hallways in hot storage add one patch-area per stored patch, for unyoked
/// and yoked storage alike. The per-round rate is the block failure over one
/// cycle divided by the cycle length and the logical qubits of the block.
pub fn estimate_footprint(layout: &Layout, fit: &ScalingFit, cost: &CostModel) -> Result<LayoutPlan> {
    let Layout { dimension, storage, d, side, blocks } = *layout;
    if fit.dimension != dimension {
        return Err(Error::Mismatch(format!("fit is for dimension {}, layout has {dimension}", fit.dimension)));
    }
    if d == 0 || blocks == 0 {
        return Err(Error::Parameter("distance and block count must be positive".into()));
    }
    let (block, per_block, n, cycle, patches) = match (dimension, storage) {
        (0, _) => {
            let patches = if storage == Storage::Hot { 2 * blocks } else { blocks };
            (Vec::new(), 1, 1, 1, patches)
        }
        (1, Storage::Cold) => {
            check_sides(&[side])?;
            let cycle = d * (cost.cold_1d_per_block * blocks + cost.cold_1d_fixed);
            (vec![side], logical_count(&[side]), side, cycle, blocks * side + side)
        }
        (1, Storage::Hot) => {
            check_sides(&[side])?;
            (vec![side], logical_count(&[side]), side, d * cost.hot_1d, 2 * blocks * side)
        }
        (2, Storage::Cold) => {
            check_sides(&[side, side])?;
            let cycle = d * (cost.cold_2d_per_width * side + cost.cold_2d_fixed);
            (vec![side, side], logical_count(&[side, side]), side * side, cycle, blocks * side * side + 2 * side + 1)
        }
        (2, Storage::Hot) => return Err(Error::Parameter("hot storage is modelled for 1D blocks only".into())),
        (k, _) => return Err(Error::Dimension(format!("yoke dimension {k} is not 0, 1 or 2"))),
    };
    if per_block == 0 {
        return Err(Error::Parameter(format!("block {block:?} encodes no logical qubits")));
    }
    let logicals = blocks * per_block;
    let block_fail = predict_rate(fit, d, cycle as f64, 1.0, n as f64);
    let physical = patches * patch_qubits(d);
    Ok(LayoutPlan {
        dimension,
        storage,
        d,
        block,
        blocks,
        cycle_rounds: cycle,
        patches,
        physical_qubits: physical,
        logicals,
        qubits_per_logical: physical as f64 / logicals as f64,
        predicted_rate: block_fail / (cycle as f64 * per_block as f64),
    })
}

pub const MAX_LOGICALS: usize = 250;
pub const D_RANGE: (usize, usize) = (3, 45);

/// Every layout the search considers for a dimension and storage mode.
pub fn candidate_layouts(dimension: usize, storage: Storage) -> Vec<Layout> {
    let mut out = Vec::new();
    for d in (D_RANGE.0..=D_RANGE.1).step_by(2) {
        match dimension {
            0 => out.push(Layout { dimension, storage, d, side: 1, blocks: 1 }),
            1 => {
                for n in (4..=MAX_LOGICALS + 2).step_by(2) {
                    let k = n - 2;
                    // Hot footprint per logical does not depend on the block count.
                    let max_b = if storage == Storage::Hot { 1 } else { MAX_LOGICALS / k };
                    for blocks in 1..=max_b {
                        out.push(Layout { dimension, storage, d, side: n, blocks });
                    }
                }
            }
            2 => {
                let mut w = 4;
                while logical_count(&[w, w]) <= MAX_LOGICALS {
                    for blocks in 1..=MAX_LOGICALS / logical_count(&[w, w]) {
                        out.push(Layout { dimension, storage, d, side: w, blocks });
                    }
                    w += 4;
                }
            }
            _ => {}
        }
    }
    out
}

/// Smallest-footprint layout meeting `target` per logical per round.
///
/// Ties on qubits per logical go to fewer physical qubits, then smaller `d`.
pub fn optimize_layout(target: f64, dimension: usize, storage: Storage, fit: &ScalingFit, cost: &CostModel) -> Result<LayoutPlan> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Parameter(format!("target {target} outside (0, 1)")));
    }
    if dimension == 2 && storage == Storage::Hot {
        return Err(Error::Parameter("hot storage is modelled for 1D blocks only".into()));
    }
    exponents(dimension)?;
    let mut best: Option<LayoutPlan> = None;
    for l in candidate_layouts(dimension, storage) {
        let plan = estimate_footprint(&l, fit, cost)?;
        if plan.predicted_rate > target {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                (plan.qubits_per_logical, plan.physical_qubits, plan.d) < (b.qubits_per_logical, b.physical_qubits, b.d)
            }
        };
        if better {
            best = Some(plan);
        }
    }
    best.ok_or(Error::Infeasible(target))
}

pub const CSV_HEADER: &str = "target,dimension,mode,d,block,m_b,patches,phys_qubits,logicals,qubits_per_logical,predicted_rate";

pub fn csv_row(target: f64, p: &LayoutPlan) -> String {
    let block = if p.block.is_empty() { "1".to_string() } else { p.block.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x") };
    let mode = match p.storage {
        Storage::Cold => "cold",
        Storage::Hot => "hot",
    };
    format!(
        "{target:e},{},{mode},{},{block},{},{},{},{},{:.6},{:e}",
        p.dimension, p.d, p.blocks, p.patches, p.physical_qubits, p.logicals, p.qubits_per_logical, p.predicted_rate
    )
}
