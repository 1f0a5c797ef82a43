use super::circuit::{Channel, Gate, Instruction, NoisyCircuit};
use crate::error::{Error, Result};

/// Superconducting-inspired noise with a single strength `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Si1000 {
    pub p: f64,
}

impl Si1000 {
    pub fn new(p: f64) -> Result<Self> {
        // Keeps the 5p measurement flip at or below 1/2.
        if !(0.0..=0.1).contains(&p) {
            return Err(Error::Parameter(format!("noise strength {p} outside [0, 0.1]")));
        }
        Ok(Si1000 { p })
    }

    /// Channel applied after a gate, if any.
    fn after(&self, gate: Gate) -> (Channel, f64) {
        match gate {
            Gate::H | Gate::I => (Channel::Dep1, self.p / 10.0),
            Gate::CZ => (Channel::Dep2, self.p),
            Gate::R => (Channel::XErr, 2.0 * self.p),
            Gate::M => (Channel::Dep1, self.p),
        }
    }
}

/// Inserts SI1000 channels into a layered circuit.
///
/// Layers are the stretches between `TICK`s and may touch each qubit at most
/// once. Qubits left untouched in a layer containing measurements or resets
/// idle under `DEP1(2p)`; elsewhere they idle under `DEP1(p/10)`. Gates
/// marked noiseless get no channels, and a layer made only of noiseless gates
/// gets no idle noise either.
pub fn apply_si1000(circuit: &NoisyCircuit, p: f64) -> Result<NoisyCircuit> {
    let model = Si1000::new(p)?;
    circuit.validate()?;
    let n = circuit.num_qubits;
    let mut out = NoisyCircuit::new(n);
    let mut layer: Vec<&Instruction> = Vec::new();
    for ins in &circuit.instructions {
        if *ins == Instruction::Tick {
            emit_layer(&model, n, &layer, &mut out)?;
            out.tick();
            layer.clear();
        } else {
            layer.push(ins);
        }
    }
    emit_layer(&model, n, &layer, &mut out)?;
    Ok(out)
}

fn emit_layer(model: &Si1000, n: usize, layer: &[&Instruction], out: &mut NoisyCircuit) -> Result<()> {
    let mut busy = vec![false; n];
    let mut any_noisy = false;
    let mut meas_or_reset = false;
    for ins in layer {
        if let Instruction::Gate { gate, targets, noiseless } = ins {
            for &q in targets {
                if std::mem::replace(&mut busy[q as usize], true) {
                    return Err(Error::Structure(format!("qubit {q} used twice in one layer; separate layers with TICK")));
                }
            }
            any_noisy |= !noiseless;
            meas_or_reset |= matches!(gate, Gate::M | Gate::R);
        }
    }
    let add = |out: &mut NoisyCircuit, ch: Channel, p: f64, t: &[u32]| {
        if p > 0.0 && !t.is_empty() {
            out.noise(ch, p, t);
        }
    };
    for ins in layer {
        if let Instruction::Gate { gate: Gate::M, targets, noiseless: false } = ins {
            add(out, Channel::MErr, 5.0 * model.p, targets);
        }
    }
    let mut trailing = Vec::new();
    for ins in layer {
        match ins {
            Instruction::Gate { gate, targets, noiseless } => {
                out.instructions.push((*ins).clone());
                if !noiseless {
                    trailing.push((*gate, targets));
                }
            }
            Instruction::Noise { .. } => out.instructions.push((*ins).clone()),
            _ => {}
        }
    }
    for (gate, targets) in trailing {
        let (ch, q) = model.after(gate);
        add(out, ch, q, targets);
    }
    if any_noisy {
        let idle: Vec<u32> = (0..n as u32).filter(|&q| !busy[q as usize]).collect();
        let q = if meas_or_reset { 2.0 * model.p } else { model.p / 10.0 };
        add(out, Channel::Dep1, q, &idle);
    }
    for ins in layer {
        if matches!(ins, Instruction::Detector { .. } | Instruction::Observable { .. }) {
            out.instructions.push((*ins).clone());
        }
    }
    Ok(())
}
