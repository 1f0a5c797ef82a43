//! Detector sampling for Pauli noise.
//!
//! Every channel instance has a fixed effect per outcome: the set of
//! detectors and observables it flips. [`EffectTable`] computes those sets
//! once by propagating sensitivities backwards through the circuit. A shot
//! then picks the fired instances and XORs their effects. [`FrameSimulator`]
//! replays the same fired set through a forward Pauli frame, and both paths
//! produce identical bits.

use super::circuit::{Basis, Channel, Gate, Instruction, NoisyCircuit};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;

/// One application of a channel to one qubit or qubit pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelInstance {
    pub channel: Channel,
    /// Total probability that some non-identity outcome occurs.
    pub p: f64,
    pub qubits: [u32; 2],
    pub instruction: u32,
    first_effect: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Effect {
    /// Sorted detector indices.
    pub detectors: Vec<u32>,
    pub observables: u64,
}

/// Pauli of a channel outcome on each target: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn outcome_paulis(channel: Channel, outcome: usize) -> [u8; 2] {
    match channel {
        Channel::Dep1 => [outcome as u8 + 1, 0],
        Channel::Dep2 => {
            let o = outcome as u8 + 1;
            [o / 4, o % 4]
        }
        Channel::XErr => [1, 0],
        Channel::ZErr => [3, 0],
        Channel::MErr => [0, 0],
    }
}

#[derive(Clone, Debug)]
pub struct EffectTable {
    num_detectors: usize,
    num_observables: usize,
    bases: Vec<Basis>,
    instances: Vec<ChannelInstance>,
    effects: Vec<Effect>,
    /// Instances grouped by probability, each group in circuit order.
    classes: Vec<(f64, Vec<u32>)>,
}

/// Detector and observable ids touched by each measurement. Observable `k`
/// is numbered `num_detectors + k`.
fn measurement_targets(c: &NoisyCircuit) -> Result<Vec<Vec<u32>>> {
    let nm = c.num_measurements();
    let nd = c.num_detectors() as u32;
    let mut per = vec![Vec::new(); nm];
    let mut det = 0u32;
    for ins in &c.instructions {
        match ins {
            Instruction::Detector { meas, .. } => {
                for &m in meas {
                    per[m as usize].push(det);
                }
                det += 1;
            }
            Instruction::Observable { index, meas } => {
                if *index >= 64 {
                    return Err(Error::Parameter("at most 64 observables are supported".into()));
                }
                for &m in meas {
                    per[m as usize].push(nd + index);
                }
            }
            _ => {}
        }
    }
    Ok(per)
}

impl EffectTable {
    pub fn new(circuit: &NoisyCircuit) -> Result<Self> {
        circuit.validate()?;
        let nd = circuit.num_detectors();
        let no = circuit.num_observables();
        let width = nd + no;
        let per_meas = measurement_targets(circuit)?;
        let nq = circuit.num_qubits;
        let mut sx = vec![BitVec::zeros(width); nq];
        let mut sz = vec![BitVec::zeros(width); nq];
        let mut next_meas = vec![BitVec::zeros(width); nq];
        let mut m_index = circuit.num_measurements();

        let to_effect = |v: &BitVec| {
            let mut e = Effect::default();
            for i in v.ones() {
                if i < nd {
                    e.detectors.push(i as u32);
                } else {
                    e.observables |= 1 << (i - nd);
                }
            }
            e
        };

        // Collected back to front, reversed at the end.
        let mut rev: Vec<(ChannelInstance, Vec<Effect>)> = Vec::new();
        for (k, ins) in circuit.instructions.iter().enumerate().rev() {
            match ins {
                Instruction::Gate { gate, targets, .. } => match gate {
                    Gate::H => {
                        for &q in targets {
                            std::mem::swap(&mut sx[q as usize], &mut sz[q as usize]);
                        }
                    }
                    Gate::I => {}
                    Gate::CZ => {
                        for pr in targets.chunks(2).rev() {
                            let (a, b) = (pr[0] as usize, pr[1] as usize);
                            let za = sz[a].clone();
                            let zb = sz[b].clone();
                            sx[a].xor_assign(&zb);
                            sx[b].xor_assign(&za);
                        }
                    }
                    Gate::R => {
                        for &q in targets {
                            sx[q as usize] = BitVec::zeros(width);
                            sz[q as usize] = BitVec::zeros(width);
                        }
                    }
                    Gate::M => {
                        for &q in targets.iter().rev() {
                            m_index -= 1;
                            let mut v = BitVec::zeros(width);
                            for &t in &per_meas[m_index] {
                                v.flip(t as usize);
                            }
                            sx[q as usize].xor_assign(&v);
                            next_meas[q as usize] = v;
                        }
                    }
                },
                Instruction::Noise { channel, p, targets } => {
                    for grp in targets.chunks(channel.arity()).rev() {
                        let mut effects = Vec::with_capacity(channel.outcomes());
                        for o in 0..channel.outcomes() {
                            let mut v = BitVec::zeros(width);
                            if *channel == Channel::MErr {
                                v.xor_assign(&next_meas[grp[0] as usize]);
                            } else {
                                for (j, &pa) in outcome_paulis(*channel, o).iter().enumerate().take(grp.len()) {
                                    let q = grp[j] as usize;
                                    if pa == 1 || pa == 2 {
                                        v.xor_assign(&sx[q]);
                                    }
                                    if pa == 2 || pa == 3 {
                                        v.xor_assign(&sz[q]);
                                    }
                                }
                            }
                            effects.push(to_effect(&v));
                        }
                        let qubits = [grp[0], *grp.get(1).unwrap_or(&grp[0])];
                        let inst = ChannelInstance { channel: *channel, p: *p, qubits, instruction: k as u32, first_effect: 0 };
                        rev.push((inst, effects));
                    }
                }
                _ => {}
            }
        }
        let mut instances = Vec::with_capacity(rev.len());
        let mut effects = Vec::new();
        for (mut inst, eff) in rev.into_iter().rev() {
            inst.first_effect = effects.len() as u32;
            effects.extend(eff);
            instances.push(inst);
        }
        let mut classes: Vec<(f64, Vec<u32>)> = Vec::new();
        for (i, inst) in instances.iter().enumerate() {
            if inst.p <= 0.0 {
                continue;
            }
            match classes.iter_mut().find(|(p, _)| *p == inst.p) {
                Some((_, v)) => v.push(i as u32),
                None => classes.push((inst.p, vec![i as u32])),
            }
        }
        Ok(EffectTable { num_detectors: nd, num_observables: no, bases: circuit.detector_bases(), instances, effects, classes })
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    pub fn detector_bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn instances(&self) -> &[ChannelInstance] {
        &self.instances
    }

    pub fn effect(&self, instance: usize, outcome: usize) -> &Effect {
        &self.effects[self.instances[instance].first_effect as usize + outcome]
    }

    /// Fired `(instance, outcome)` pairs of one shot, in circuit order.
    pub fn draw_faults(&self, seed: u64, shot: u64, out: &mut Vec<(u32, u8)>) {
        out.clear();
        let mut rng = shot_rng(seed, shot);
        for (p, members) in &self.classes {
            let log_q = (-p).ln_1p();
            let mut j: usize = 0;
            loop {
                // Geometric gap to the next fired member.
                let skip = if *p >= 1.0 {
                    0.0
                } else {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    (u.ln() / log_q).floor()
                };
                if skip >= (members.len() - j) as f64 {
                    break;
                }
                j += skip as usize;
                let inst = members[j];
                let k = self.instances[inst as usize].channel.outcomes();
                let o = if k == 1 { 0 } else { rng.random_range(0..k) as u8 };
                out.push((inst, o));
                j += 1;
                if j >= members.len() {
                    break;
                }
            }
        }
        out.sort_unstable();
    }

    /// Detector words and observable mask for a fired set.
    pub fn apply_faults(&self, faults: &[(u32, u8)], words: &mut [u64]) -> u64 {
        words.iter_mut().for_each(|w| *w = 0);
        let mut obs = 0;
        for &(i, o) in faults {
            let e = self.effect(i as usize, o as usize);
            for &d in &e.detectors {
                words[d as usize / 64] ^= 1 << (d % 64);
            }
            obs ^= e.observables;
        }
        obs
    }

    pub fn words_per_shot(&self) -> usize {
        self.num_detectors.div_ceil(64)
    }

    /// Samples shots `first..first + shots` of the experiment seeded by `seed`.
    pub fn sample(&self, seed: u64, first: u64, shots: usize) -> DetectionData {
        let w = self.words_per_shot();
        let mut bits = vec![0u64; w * shots];
        let mut obs = vec![0u64; shots];
        bits.par_chunks_mut(w.max(1))
            .zip(obs.par_iter_mut())
            .enumerate()
            .for_each_init(Vec::new, |faults, (s, (row, ob))| {
                self.draw_faults(seed, first + s as u64, faults);
                *ob = self.apply_faults(faults, &mut row[..w]);
            });
        if w == 0 {
            bits.clear();
        }
        DetectionData { num_detectors: self.num_detectors, num_observables: self.num_observables, shots, seed, first_shot: first, bits, obs }
    }
}

/// Independent stream per `(seed, shot)`, so results do not depend on how
/// shots are split across workers.
pub fn shot_rng(seed: u64, shot: u64) -> Pcg64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    Pcg64::seed_from_u64(mix(seed ^ mix(shot)))
}

/// Forward Pauli-frame simulation of a given fired set.
pub struct FrameSimulator<'c> {
    circuit: &'c NoisyCircuit,
}

impl<'c> FrameSimulator<'c> {
    pub fn new(circuit: &'c NoisyCircuit) -> Self {
        FrameSimulator { circuit }
    }

    /// Measurement flips, then detector and observable flips, for the
    /// `(instance, outcome)` list produced by [`EffectTable::draw_faults`].
    pub fn run(&self, faults: &[(u32, u8)]) -> (Vec<bool>, Vec<bool>, u64) {
        let c = self.circuit;
        let n = c.num_qubits;
        let mut x = vec![false; n];
        let mut z = vec![false; n];
        let mut pending = vec![false; n];
        let mut flips = Vec::with_capacity(c.num_measurements());
        let mut dets = Vec::new();
        let mut obs = 0u64;
        let mut inst = 0u32;
        let mut next = faults.iter().peekable();
        for ins in &c.instructions {
            match ins {
                Instruction::Gate { gate, targets, .. } => match gate {
                    Gate::H => targets.iter().for_each(|&q| std::mem::swap(&mut x[q as usize], &mut z[q as usize])),
                    Gate::I => {}
                    Gate::CZ => {
                        for pr in targets.chunks(2) {
                            let (a, b) = (pr[0] as usize, pr[1] as usize);
                            z[a] ^= x[b];
                            z[b] ^= x[a];
                        }
                    }
                    Gate::R => targets.iter().for_each(|&q| {
                        x[q as usize] = false;
                        z[q as usize] = false;
                        pending[q as usize] = false;
                    }),
                    Gate::M => targets.iter().for_each(|&q| {
                        flips.push(x[q as usize] ^ std::mem::take(&mut pending[q as usize]));
                    }),
                },
                Instruction::Noise { channel, targets, .. } => {
                    for grp in targets.chunks(channel.arity()) {
                        while let Some(&&(i, o)) = next.peek() {
                            if i != inst {
                                break;
                            }
                            next.next();
                            if *channel == Channel::MErr {
                                pending[grp[0] as usize] ^= true;
                                continue;
                            }
                            for (j, &pa) in outcome_paulis(*channel, o as usize).iter().enumerate().take(grp.len()) {
                                let q = grp[j] as usize;
                                x[q] ^= pa == 1 || pa == 2;
                                z[q] ^= pa == 2 || pa == 3;
                            }
                        }
                        inst += 1;
                    }
                }
                Instruction::Detector { meas, .. } => dets.push(meas.iter().fold(false, |a, &m| a ^ flips[m as usize])),
                Instruction::Observable { index, meas } => {
                    if meas.iter().fold(false, |a, &m| a ^ flips[m as usize]) {
                        obs ^= 1 << index;
                    }
                }
                Instruction::Tick => {}
            }
        }
        (flips, dets, obs)
    }
}

/// Packed detector samples, one row of `words_per_shot` words per shot.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionData {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub shots: usize,
    pub seed: u64,
    pub first_shot: u64,
    pub bits: Vec<u64>,
    pub obs: Vec<u64>,
}

impl DetectionData {
    pub fn words_per_shot(&self) -> usize {
        self.num_detectors.div_ceil(64)
    }

    pub fn shot(&self, s: usize) -> &[u64] {
        let w = self.words_per_shot();
        &self.bits[s * w..(s + 1) * w]
    }

    pub fn detector(&self, s: usize, d: usize) -> bool {
        self.shot(s)[d / 64] >> (d % 64) & 1 == 1
    }

    /// Flagged detectors of shot `s`.
    pub fn fired(&self, s: usize) -> Vec<usize> {
        let mut v = Vec::new();
        for (k, &w) in self.shot(s).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                v.push(k * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        v
    }

    pub fn bytes_per_shot(&self) -> usize {
        (self.num_detectors + self.num_observables).div_ceil(8)
    }

    /// Detectors then observables of every shot, packed least significant
    /// bit first, each shot padded to a whole byte.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let bps = self.bytes_per_shot();
        let mut out = vec![0u8; bps * self.shots];
        for s in 0..self.shots {
            let row = &mut out[s * bps..(s + 1) * bps];
            for d in self.fired(s) {
                row[d / 8] |= 1 << (d % 8);
            }
            for k in 0..self.num_observables {
                if self.obs[s] >> k & 1 == 1 {
                    let i = self.num_detectors + k;
                    row[i / 8] |= 1 << (i % 8);
                }
            }
        }
        out
    }

    pub fn from_packed_bytes(num_detectors: usize, num_observables: usize, bytes: &[u8]) -> Result<Self> {
        let bps = (num_detectors + num_observables).div_ceil(8);
        if bps == 0 || bytes.len() % bps != 0 {
            return Err(Error::LengthMismatch { expected: bps, got: bytes.len() });
        }
        let shots = bytes.len() / bps;
        let w = num_detectors.div_ceil(64);
        let mut bits = vec![0u64; w * shots];
        let mut obs = vec![0u64; shots];
        for s in 0..shots {
            let row = &bytes[s * bps..(s + 1) * bps];
            for i in 0..num_detectors + num_observables {
                if row[i / 8] >> (i % 8) & 1 == 1 {
                    if i < num_detectors {
                        bits[s * w + i / 64] |= 1 << (i % 64);
                    } else {
                        obs[s] |= 1 << (i - num_detectors);
                    }
                }
            }
        }
        Ok(DetectionData { num_detectors, num_observables, shots, seed: 0, first_shot: 0, bits, obs })
    }
}
