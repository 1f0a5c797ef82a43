//! Rotated surface-code memory experiment in the CZ gateset.
//!
//! Coordinates are doubled: data qubits sit at odd `(x, y)` and ancillas at
//! even `(x, y)`. X-type boundary plaquettes run along the top and bottom
//! edges, Z-type ones along the left and right, so the Z logical is any full
//! row of data and the X logical any full column.

use super::circuit::{Basis, Gate, NoisyCircuit};
use crate::error::{Error, Result};

/// Data-qubit offsets visited by each ancilla type, one per CZ layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub name: &'static str,
    pub x_order: [(i32, i32); 4],
    pub z_order: [(i32, i32); 4],
}

/// X ancillas sweep rows, Z ancillas sweep columns. X hook errors land on
/// horizontal pairs, orthogonal to the X logical, so the circuit keeps its
/// full distance in the Z basis.
pub const NZ_SCHEDULE: Schedule = Schedule {
    name: "nz",
    x_order: [(-1, -1), (1, -1), (-1, 1), (1, 1)],
    z_order: [(-1, -1), (-1, 1), (1, -1), (1, 1)],
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ancilla {
    pub x: i32,
    pub y: i32,
    pub basis: Basis,
}

#[derive(Clone, Debug)]
pub struct SurfaceLayout {
    pub distance: usize,
    /// Ancillas in row-major order of their coordinates.
    pub ancillas: Vec<Ancilla>,
}

impl SurfaceLayout {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(Error::Parameter(format!("surface-code distance must be odd and at least 3, got {d}")));
        }
        let di = d as i32;
        let mut ancillas = Vec::new();
        for b in 0..=di {
            for a in 0..=di {
                let basis = if (a + b) % 2 == 1 { Basis::X } else { Basis::Z };
                let interior = a > 0 && a < di && b > 0 && b < di;
                let top_bottom = (b == 0 || b == di) && a > 0 && a < di && basis == Basis::X;
                let sides = (a == 0 || a == di) && b > 0 && b < di && basis == Basis::Z;
                if interior || top_bottom || sides {
                    ancillas.push(Ancilla { x: 2 * a, y: 2 * b, basis });
                }
            }
        }
        Ok(SurfaceLayout { distance: d, ancillas })
    }

    pub fn num_data(&self) -> usize {
        self.distance * self.distance
    }

    pub fn num_qubits(&self) -> usize {
        self.num_data() + self.ancillas.len()
    }

    /// Qubit index of the data qubit at doubled coordinates `(x, y)`.
    pub fn data_at(&self, x: i32, y: i32) -> Option<u32> {
        let d = self.distance as i32;
        if x <= 0 || y <= 0 || x >= 2 * d || y >= 2 * d || x % 2 == 0 || y % 2 == 0 {
            return None;
        }
        Some(((y / 2) * d + x / 2) as u32)
    }

    pub fn data_coords(&self, q: u32) -> (i32, i32) {
        let d = self.distance as u32;
        (2 * (q % d) as i32 + 1, 2 * (q / d) as i32 + 1)
    }

    pub fn ancilla_qubit(&self, i: usize) -> u32 {
        (self.num_data() + i) as u32
    }

    /// Data qubits in the support of ancilla `i`.
    pub fn support(&self, i: usize) -> Vec<u32> {
        let a = self.ancillas[i];
        [(-1, -1), (1, -1), (-1, 1), (1, 1)].iter().filter_map(|&(dx, dy)| self.data_at(a.x + dx, a.y + dy)).collect()
    }

    /// Ancillas of `basis` whose support contains data qubit `q`.
    pub fn checks_on(&self, q: u32, basis: Basis) -> Vec<usize> {
        (0..self.ancillas.len()).filter(|&i| self.ancillas[i].basis == basis && self.support(i).contains(&q)).collect()
    }

    pub fn ancillas_of(&self, basis: Basis) -> Vec<usize> {
        (0..self.ancillas.len()).filter(|&i| self.ancillas[i].basis == basis).collect()
    }

    /// The top data row, which carries the Z logical.
    pub fn z_logical(&self) -> Vec<u32> {
        (0..self.distance as u32).collect()
    }

    pub fn x_logical(&self) -> Vec<u32> {
        (0..self.distance as u32).map(|r| r * self.distance as u32).collect()
    }
}

/// Noiseless Z-basis memory circuit; pair with [`super::apply_si1000`].
pub fn generate_surface_memory_circuit(d: usize, rounds: usize) -> Result<NoisyCircuit> {
    generate_with_schedule(d, rounds, &NZ_SCHEDULE)
}

pub fn generate_with_schedule(d: usize, rounds: usize, sched: &Schedule) -> Result<NoisyCircuit> {
    if rounds == 0 {
        return Err(Error::Parameter("at least one round is required".into()));
    }
    let lay = SurfaceLayout::new(d)?;
    let nd = lay.num_data() as u32;
    let nq = lay.num_qubits();
    let data: Vec<u32> = (0..nd).collect();
    let anc: Vec<u32> = (0..lay.ancillas.len()).map(|i| lay.ancilla_qubit(i)).collect();

    // Whether data qubit `q` is conjugated by H during CZ layer `t`, i.e.
    // whether its partner in that layer is an X ancilla.
    let frame = |t: usize, q: u32| -> bool {
        let (x, y) = lay.data_coords(q);
        let (dx, dy) = sched.x_order[t];
        (((x - dx) / 2 + (y - dy) / 2) % 2) == 1
    };

    let mut c = NoisyCircuit::new(nq);
    let unitary = |c: &mut NoisyCircuit, h: &[u32]| {
        let mut busy = vec![false; nq];
        for &q in h {
            busy[q as usize] = true;
        }
        let idle: Vec<u32> = (0..nq as u32).filter(|&q| !busy[q as usize]).collect();
        if !h.is_empty() {
            c.gate(Gate::H, h);
        }
        if !idle.is_empty() {
            c.gate(Gate::I, &idle);
        }
        c.tick();
    };

    let mut meas = 0u32;
    let mut prev: Option<u32> = None;
    for round in 0..rounds {
        if round == 0 {
            c.noiseless_gate(Gate::R, &data);
        }
        c.gate(Gate::R, &anc);
        c.tick();
        for t in 0..=4 {
            let mut h: Vec<u32> = if t == 0 || t == 4 { anc.clone() } else { Vec::new() };
            for &q in &data {
                let before = t > 0 && frame(t - 1, q);
                let after = t < 4 && frame(t, q);
                if before != after {
                    h.push(q);
                }
            }
            if t == 0 || t == 4 || !h.is_empty() {
                unitary(&mut c, &h);
            }
            if t == 4 {
                break;
            }
            let mut pairs = Vec::new();
            let mut busy = vec![false; nq];
            for (i, a) in lay.ancillas.iter().enumerate() {
                let (dx, dy) = if a.basis == Basis::X { sched.x_order[t] } else { sched.z_order[t] };
                if let Some(q) = lay.data_at(a.x + dx, a.y + dy) {
                    let aq = lay.ancilla_qubit(i);
                    pairs.extend([aq, q]);
                    busy[aq as usize] = true;
                    busy[q as usize] = true;
                }
            }
            let idle: Vec<u32> = (0..nq as u32).filter(|&q| !busy[q as usize]).collect();
            c.gate(Gate::CZ, &pairs);
            if !idle.is_empty() {
                c.gate(Gate::I, &idle);
            }
            c.tick();
        }
        c.gate(Gate::M, &anc);
        c.tick();
        for (i, a) in lay.ancillas.iter().enumerate() {
            let m = meas + i as u32;
            match prev {
                None if a.basis == Basis::Z => c.detector(Basis::Z, &[m]),
                None => {}
                Some(p) => c.detector(a.basis, &[p + i as u32, m]),
            }
        }
        prev = Some(meas);
        meas += anc.len() as u32;
    }
    c.noiseless_gate(Gate::M, &data);
    let last = prev.unwrap();
    for (i, a) in lay.ancillas.iter().enumerate() {
        if a.basis == Basis::Z {
            let mut ms: Vec<u32> = lay.support(i).iter().map(|&q| meas + q).collect();
            ms.push(last + i as u32);
            c.detector(Basis::Z, &ms);
        }
    }
    let obs: Vec<u32> = lay.z_logical().iter().map(|&q| meas + q).collect();
    c.observable(0, &obs);
    c.validate()?;
    Ok(c)
}
