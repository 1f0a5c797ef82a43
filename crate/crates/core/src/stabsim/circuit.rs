use crate::error::{Error, Result};
use std::fmt::{self, Write as _};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    /// Hadamard.
    H,
    /// Explicit idle.
    I,
    CZ,
    /// Z-basis measurement.
    M,
    /// Z-basis reset.
    R,
}

impl Gate {
    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::I => "I",
            Gate::CZ => "CZ",
            Gate::M => "M",
            Gate::R => "R",
        }
    }

    pub fn arity(self) -> usize {
        if self == Gate::CZ {
            2
        } else {
            1
        }
    }

    fn parse(s: &str) -> Option<Gate> {
        Some(match s {
            "H" => Gate::H,
            "I" => Gate::I,
            "CZ" => Gate::CZ,
            "M" => Gate::M,
            "R" => Gate::R,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Inverts the result of the next measurement of the qubit.
    MErr,
    XErr,
    ZErr,
    Dep1,
    Dep2,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::MErr => "MERR",
            Channel::XErr => "XERR",
            Channel::ZErr => "ZERR",
            Channel::Dep1 => "DEP1",
            Channel::Dep2 => "DEP2",
        }
    }

    pub fn arity(self) -> usize {
        if self == Channel::Dep2 {
            2
        } else {
            1
        }
    }

    /// Number of equally likely non-identity outcomes.
    pub fn outcomes(self) -> usize {
        match self {
            Channel::Dep1 => 3,
            Channel::Dep2 => 15,
            _ => 1,
        }
    }

    fn parse(s: &str) -> Option<Channel> {
        Some(match s {
            "MERR" => Channel::MErr,
            "XERR" => Channel::XErr,
            "ZERR" => Channel::ZErr,
            "DEP1" => Channel::Dep1,
            "DEP2" => Channel::Dep2,
            _ => return None,
        })
    }
}

/// Pauli basis of a detector's stabilizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Z,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Gate { gate: Gate, targets: Vec<u32>, noiseless: bool },
    Noise { channel: Channel, p: f64, targets: Vec<u32> },
    Tick,
    /// Parity of absolute measurement indices.
    Detector { basis: Basis, meas: Vec<u32> },
    Observable { index: u32, meas: Vec<u32> },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoisyCircuit {
    pub num_qubits: usize,
    pub instructions: Vec<Instruction>,
}

impl NoisyCircuit {
    pub fn new(num_qubits: usize) -> Self {
        NoisyCircuit { num_qubits, instructions: Vec::new() }
    }

    pub fn gate(&mut self, gate: Gate, targets: &[u32]) {
        self.instructions.push(Instruction::Gate { gate, targets: targets.to_vec(), noiseless: false });
    }

    pub fn noiseless_gate(&mut self, gate: Gate, targets: &[u32]) {
        self.instructions.push(Instruction::Gate { gate, targets: targets.to_vec(), noiseless: true });
    }

    pub fn noise(&mut self, channel: Channel, p: f64, targets: &[u32]) {
        self.instructions.push(Instruction::Noise { channel, p, targets: targets.to_vec() });
    }

    pub fn tick(&mut self) {
        self.instructions.push(Instruction::Tick);
    }

    pub fn detector(&mut self, basis: Basis, meas: &[u32]) {
        self.instructions.push(Instruction::Detector { basis, meas: meas.to_vec() });
    }

    pub fn observable(&mut self, index: u32, meas: &[u32]) {
        self.instructions.push(Instruction::Observable { index, meas: meas.to_vec() });
    }

    pub fn num_measurements(&self) -> usize {
        self.instructions
            .iter()
            .map(|i| match i {
                Instruction::Gate { gate: Gate::M, targets, .. } => targets.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn num_detectors(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Detector { .. })).count()
    }

    pub fn num_observables(&self) -> usize {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Observable { index, .. } => Some(*index as usize + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn detector_bases(&self) -> Vec<Basis> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Detector { basis, .. } => Some(*basis),
                _ => None,
            })
            .collect()
    }

    pub fn num_channels(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Noise { .. })).count()
    }

    /// Checks targets, probabilities and measurement references.
    pub fn validate(&self) -> Result<()> {
        let mut measured = 0u32;
        for ins in &self.instructions {
            match ins {
                Instruction::Gate { gate, targets, .. } => {
                    check_targets(self.num_qubits, gate.arity(), targets, gate.name())?;
                    if *gate == Gate::M {
                        measured += targets.len() as u32;
                    }
                }
                Instruction::Noise { channel, p, targets } => {
                    check_targets(self.num_qubits, channel.arity(), targets, channel.name())?;
                    if !(0.0..=1.0).contains(p) {
                        return Err(Error::Parameter(format!("{} probability {p} outside [0, 1]", channel.name())));
                    }
                }
                Instruction::Detector { meas, .. } | Instruction::Observable { meas, .. } => {
                    if let Some(&m) = meas.iter().find(|&&m| m >= measured) {
                        return Err(Error::Structure(format!("reference to future measurement {m}")));
                    }
                }
                Instruction::Tick => {}
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.num_qubits);
        let list = |v: &[u32]| v.iter().map(|t| format!(" {t}")).collect::<String>();
        for ins in &self.instructions {
            match ins {
                Instruction::Gate { gate, targets, noiseless } => {
                    let pre = if *noiseless { "NOISELESS " } else { "" };
                    writeln!(s, "{pre}{}{}", gate.name(), list(targets)).unwrap();
                }
                Instruction::Noise { channel, p, targets } => {
                    writeln!(s, "NOISE {} {}{}", channel.name(), fmt_prob(*p), list(targets)).unwrap();
                }
                Instruction::Tick => s.push_str("TICK\n"),
                Instruction::Detector { basis, meas } => {
                    let b = if *basis == Basis::X { "X" } else { "Z" };
                    writeln!(s, "DETECTOR {b}{}", list(meas)).unwrap();
                }
                Instruction::Observable { index, meas } => writeln!(s, "OBSERVABLE {index}{}", list(meas)).unwrap(),
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = NoisyCircuit::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: no + 1, msg };
            let mut tok: Vec<&str> = line.split_whitespace().collect();
            let nums = |t: &[&str]| -> Result<Vec<u32>> {
                t.iter().map(|x| x.parse::<u32>().map_err(|_| bad(format!("bad index {x:?}")))).collect()
            };
            let noiseless = tok[0] == "NOISELESS";
            if noiseless {
                tok.remove(0);
                if tok.is_empty() {
                    return Err(bad("NOISELESS without a gate".into()));
                }
            }
            match tok[0] {
                "QUBITS" => c.num_qubits = tok.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad qubit count".into()))?,
                "TICK" => c.tick(),
                "NOISE" => {
                    if tok.len() < 3 {
                        return Err(bad("NOISE needs a channel and a probability".into()));
                    }
                    let channel = Channel::parse(tok[1]).ok_or_else(|| bad(format!("unknown channel {}", tok[1])))?;
                    let p = tok[2].parse().map_err(|_| bad(format!("bad probability {}", tok[2])))?;
                    c.noise(channel, p, &nums(&tok[3..])?);
                }
                "DETECTOR" => {
                    let (basis, rest) = match tok.get(1) {
                        Some(&"X") => (Basis::X, &tok[2..]),
                        Some(&"Z") => (Basis::Z, &tok[2..]),
                        _ => (Basis::Z, &tok[1..]),
                    };
                    c.detector(basis, &nums(rest)?);
                }
                "OBSERVABLE" => {
                    let idx = tok.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad observable index".into()))?;
                    c.observable(idx, &nums(&tok[2..])?);
                }
                g => {
                    let gate = Gate::parse(g).ok_or_else(|| bad(format!("unknown instruction {g}")))?;
                    let t = nums(&tok[1..])?;
                    if noiseless {
                        c.noiseless_gate(gate, &t);
                    } else {
                        c.gate(gate, &t);
                    }
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn check_targets(n: usize, arity: usize, targets: &[u32], name: &str) -> Result<()> {
    if targets.len() % arity != 0 {
        return Err(Error::Structure(format!("{name} needs targets in groups of {arity}")));
    }
    if let Some(&t) = targets.iter().find(|&&t| t as usize >= n) {
        return Err(Error::Structure(format!("{name} target {t} out of range")));
    }
    if arity == 2 && targets.chunks(2).any(|c| c[0] == c[1]) {
        return Err(Error::Structure(format!("{name} applied to a qubit pair with itself")));
    }
    Ok(())
}

/// Shortest decimal form that round-trips through `f64` parsing.
pub(crate) fn fmt_prob(p: f64) -> String {
    format!("{p:?}")
}

impl fmt::Display for NoisyCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
