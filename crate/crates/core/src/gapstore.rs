//! Complementary-gap distributions: collection, binning, calibration,
//! smoothing, min-of-m extrapolation and sampling.

use crate::error::{Error, Result};
use crate::matcher::GapValue;
use crate::stabsim::{apply_si1000, extract_from_table, generate_surface_memory_circuit, restrict_to_basis, Basis, EffectTable};
use crate::{Decoder, DetectorErrorGraph};
use rand::{Rng, RngExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Signed integer dB; negative bins hold failed samples.
    pub db: i32,
    pub count: u64,
    pub failures: u64,
    /// Probability mass of the bin.
    pub mass: f64,
}

/// Histogram of signed gaps on the integer-dB lattice, bins sorted by `db`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapDistribution {
    pub base_rounds: usize,
    pub d: usize,
    pub noise_label: String,
    pub bins: Vec<Bin>,
    pub total: u64,
    /// Min-of-m factor applied since collection; 1 for raw data.
    #[serde(default = "one")]
    pub extrapolation: f64,
}

fn one() -> f64 {
    1.0
}

/// Nearest-integer dB of `|gap|`, negated for failed samples.
pub fn bin_key(magnitude: f64, failed: bool) -> i32 {
    let k = magnitude.abs().round() as i32;
    if failed {
        -k
    } else {
        k
    }
}

impl GapDistribution {
    pub fn build(samples: &[GapValue], base_rounds: usize, d: usize, noise_label: &str) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut map = std::collections::BTreeMap::<i32, (u64, u64)>::new();
        for s in samples {
            let e = map.entry(bin_key(s.magnitude, s.failed)).or_default();
            e.0 += 1;
            e.1 += s.failed as u64;
        }
        let total = samples.len() as u64;
        let bins = map
            .into_iter()
            .map(|(db, (count, failures))| Bin { db, count, failures, mass: count as f64 / total as f64 })
            .collect();
        Ok(GapDistribution { base_rounds, d, noise_label: noise_label.to_string(), bins, total, extrapolation: 1.0 })
    }

    /// Rounds the distribution stands for after extrapolation.
    pub fn effective_rounds(&self) -> f64 {
        self.base_rounds as f64 * self.extrapolation
    }

    pub fn mass(&self) -> f64 {
        self.bins.iter().map(|b| b.mass).sum()
    }

    /// Right-continuous CDF at each bin, in bin order.
    pub fn cdf(&self) -> Vec<(i32, f64)> {
        let mut acc = 0.0;
        self.bins
            .iter()
            .map(|b| {
                acc += b.mass;
                (b.db, acc)
            })
            .collect()
    }

    pub fn cdf_at(&self, g: i32) -> f64 {
        self.bins.iter().take_while(|b| b.db <= g).map(|b| b.mass).sum()
    }

    /// Distribution of the minimum of `m` independent draws.
    pub fn extrapolate_min_of_m(&self, m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Parameter(format!("extrapolation factor {m} must be positive")));
        }
        if m == 1.0 {
            return Ok(self.clone());
        }
        let total = self.mass();
        let mut out = self.clone();
        let mut prev = 0.0;
        let mut acc = 0.0;
        for b in &mut out.bins {
            acc += b.mass / total;
            let f = 1.0 - (1.0 - acc.min(1.0)).powf(m);
            b.mass = (f - prev).max(0.0);
            prev = f;
            b.count = 0;
            b.failures = 0;
        }
        out.extrapolation = self.extrapolation * m;
        Ok(out)
    }

    /// Merges opposite-sign bins into a magnitude table for sampling.
    pub fn sampler(&self, model: &CalibrationModel) -> Result<GapSampler> {
        let total = self.mass();
        if self.bins.is_empty() || !(total > 0.0) {
            return Err(Error::EmptyInput);
        }
        let mut mags: Vec<(u32, f64, u64, u64)> = Vec::new();
        for b in &self.bins {
            let g = b.db.unsigned_abs();
            match mags.iter_mut().find(|m| m.0 == g) {
                Some(m) => {
                    m.1 += b.mass;
                    m.2 += b.count;
                    m.3 += b.failures;
                }
                None => mags.push((g, b.mass, b.count, b.failures)),
            }
        }
        mags.sort_by_key(|m| m.0);
        let mut cum = Vec::with_capacity(mags.len());
        let mut acc = 0.0;
        let mut entries = Vec::with_capacity(mags.len());
        for (g, mass, count, failures) in mags {
            acc += mass / total;
            cum.push(acc);
            let p_fail = if count >= EMPIRICAL_MIN_SAMPLES && failures >= 1 {
                failures as f64 / count as f64
            } else {
                model.failure_probability(g as f64)
            };
            entries.push((g as f64, p_fail));
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(GapSampler { cum, entries })
    }

    pub fn file_name(&self) -> String {
        archive_name(self.d, self.base_rounds, &self.noise_label)
    }

    pub fn to_json(&self) -> String {
        let mut c = self.clone();
        for b in &mut c.bins {
            b.mass = round_sig(b.mass, 12);
        }
        c.extrapolation = round_sig(c.extrapolation, 12);
        serde_json::to_string_pretty(&c).expect("distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: GapDistribution = serde_json::from_str(s).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        let sum: u64 = d.bins.iter().map(|b| b.count).sum();
        if sum != 0 && sum != d.total {
            return Err(Error::Mismatch(format!("bin counts sum to {sum}, total is {}", d.total)));
        }
        if d.bins.iter().any(|b| b.failures > b.count) {
            return Err(Error::Mismatch("bin with more failures than samples".into()));
        }
        Ok(d)
    }

    pub fn save(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_json()).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}

/// Archive file name for a `(d, rounds, noise)` triple.
pub fn archive_name(d: usize, rounds: usize, noise: &str) -> String {
    format!("gaps_d{d}_r{rounds}_{noise}.json")
}

pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", (digits - 1) as usize, x).parse().unwrap()
}

/// Bins need this many samples, and at least one failure, before their own
/// failure rate replaces the calibration formula.
pub const EMPIRICAL_MIN_SAMPLES: u64 = 100;

/// Maps a gap to a failure probability after rescaling it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub rescale: f64,
}

impl Default for CalibrationModel {
    fn default() -> Self {
        CalibrationModel { rescale: 0.9 }
    }
}

impl CalibrationModel {
    pub fn failure_probability(&self, gap_db: f64) -> f64 {
        1.0 / (1.0 + 10f64.powf(self.rescale * gap_db / 10.0))
    }
}

/// Magnitude table built from a distribution; draws `(|g|, errored)`.
#[derive(Clone, Debug)]
pub struct GapSampler {
    cum: Vec<f64>,
    entries: Vec<(f64, f64)>,
}

impl GapSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, bool) {
        let u: f64 = rng.random();
        let i = self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1);
        let (g, p) = self.entries[i];
        (g, rng.random::<f64>() < p)
    }

    /// `(|g|, probability, failure probability)` per magnitude.
    pub fn table(&self) -> Vec<(f64, f64, f64)> {
        let mut prev = 0.0;
        self.entries
            .iter()
            .zip(&self.cum)
            .map(|(&(g, p), &c)| {
                let m = c - prev;
                prev = c;
                (g, m, p)
            })
            .collect()
    }

    /// Expected fraction of errored draws.
    pub fn expected_failure_rate(&self) -> f64 {
        self.table().iter().map(|t| t.1 * t.2).sum()
    }
}

/// Raised-cosine smoothing over `±halfwidth` dB, rescaled so the curve has
/// the same total as the input masses.
pub fn smooth(dist: &GapDistribution, halfwidth: usize) -> Result<Vec<(i32, f64)>> {
    if halfwidth == 0 {
        return Err(Error::Parameter("smoothing half-width must be at least 1".into()));
    }
    if dist.bins.is_empty() {
        return Ok(Vec::new());
    }
    let h = halfwidth as i32;
    let kernel: Vec<f64> = (-h..=h).map(|k| 1.0 + (std::f64::consts::PI * k as f64 / (h + 1) as f64).cos()).collect();
    let ksum: f64 = kernel.iter().sum();
    let lo = dist.bins[0].db - h;
    let hi = dist.bins.last().unwrap().db + h;
    let mut out = vec![0.0; (hi - lo + 1) as usize];
    for b in &dist.bins {
        for (j, w) in kernel.iter().enumerate() {
            out[(b.db - h - lo) as usize + j] += b.mass * w / ksum;
        }
    }
    let want = dist.mass();
    let got: f64 = out.iter().sum();
    if got > 0.0 {
        out.iter_mut().for_each(|v| *v *= want / got);
    }
    Ok(out.into_iter().enumerate().map(|(i, v)| (lo + i as i32, v)).collect())
}

/// Kolmogorov-Smirnov distance between two distributions on the dB lattice.
pub fn ks_distance(a: &GapDistribution, b: &GapDistribution) -> f64 {
    let mut keys: Vec<i32> = a.bins.iter().chain(&b.bins).map(|x| x.db).collect();
    keys.sort_unstable();
    keys.dedup();
    let (ta, tb) = (a.mass(), b.mass());
    keys.iter().map(|&k| (a.cdf_at(k) / ta - b.cdf_at(k) / tb).abs()).fold(0.0, f64::max)
}

/// Z-memory experiment prepared for repeated gap sampling.
pub struct MemoryExperiment {
    pub d: usize,
    pub rounds: usize,
    pub p: f64,
    table: EffectTable,
    graph: DetectorErrorGraph,
    map: Vec<Option<u32>>,
}

impl MemoryExperiment {
    pub fn new(d: usize, rounds: usize, p: f64) -> Result<Self> {
        let c = apply_si1000(&generate_surface_memory_circuit(d, rounds)?, p)?;
        let table = EffectTable::new(&c)?;
        let full = extract_from_table(&table)?;
        let (graph, map) = restrict_to_basis(&full, &c.detector_bases(), Basis::Z)?;
        Ok(MemoryExperiment { d, rounds, p, table, graph, map })
    }

    /// Z-basis matching graph.
    pub fn graph(&self) -> &DetectorErrorGraph {
        &self.graph
    }

    pub fn table(&self) -> &EffectTable {
        &self.table
    }

    /// Z-graph syndrome and true observable flip of one shot.
    pub fn shot(&self, seed: u64, shot: u64, faults: &mut Vec<(u32, u8)>, words: &mut Vec<u64>, syn: &mut Vec<usize>) -> u8 {
        self.table.draw_faults(seed, shot, faults);
        self.syndrome_of(faults, words, syn)
    }

    /// Z-graph syndrome and observable flip caused by a given fault list.
    pub fn syndrome_of(&self, faults: &[(u32, u8)], words: &mut Vec<u64>, syn: &mut Vec<usize>) -> u8 {
        words.clear();
        words.resize(self.table.words_per_shot(), 0);
        let obs = self.table.apply_faults(faults, words);
        syn.clear();
        for (k, &w) in words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let d = k * 64 + w.trailing_zeros() as usize;
                if let Some(v) = self.map[d] {
                    syn.push(v as usize);
                }
                w &= w - 1;
            }
        }
        (obs & 1) as u8
    }

    /// Signed gaps of shots `0..shots`, in shot order.
    pub fn collect(&self, shots: usize, seed: u64) -> Result<Vec<GapValue>> {
        const CHUNK: usize = 4096;
        let chunks: Vec<Result<Vec<GapValue>>> = (0..shots.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut dec = Decoder::new(&self.graph);
                let (mut f, mut w, mut s) = (Vec::new(), Vec::new(), Vec::new());
                let end = ((c + 1) * CHUNK).min(shots);
                (c * CHUNK..end)
                    .map(|i| {
                        let truth = self.shot(seed, i as u64, &mut f, &mut w, &mut s);
                        dec.complementary_gap(&s, 0, truth)
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(shots);
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }

    /// Collects and bins `shots` gaps under the `si1000_p{p}` label.
    pub fn distribution(&self, shots: usize, seed: u64) -> Result<GapDistribution> {
        let samples = self.collect(shots, seed)?;
        GapDistribution::build(&samples, self.rounds, self.d, &noise_label(self.p))
    }
}

pub fn noise_label(p: f64) -> String {
    format!("si1000_p{p:e}")
}

/// Empirical failure rate of each magnitude bin next to the calibrated
/// prediction: `(|g|, samples, failures, predicted)`.
pub fn calibration_table(dist: &GapDistribution, model: &CalibrationModel) -> Vec<(u32, u64, u64, f64)> {
    let mut rows: Vec<(u32, u64, u64, f64)> = Vec::new();
    for b in &dist.bins {
        let g = b.db.unsigned_abs();
        match rows.iter_mut().find(|r| r.0 == g) {
            Some(r) => {
                r.1 += b.count;
                r.2 += b.failures;
            }
            None => rows.push((g, b.count, b.failures, model.failure_probability(g as f64))),
        }
    }
    rows.sort_by_key(|r| r.0);
    rows
}
