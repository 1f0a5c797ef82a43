//! Stabilizer circuits with Pauli noise: generation, noise insertion,
//! sampling and matching-graph extraction.

mod circuit;
mod extract;
mod noise;
mod sample;
mod surface;

pub use circuit::{Basis, Channel, Gate, Instruction, NoisyCircuit};
pub use extract::{build_phenomenological_graph, extract_error_graph, extract_from_table, restrict_to_basis};
pub use noise::{apply_si1000, Si1000};
pub use sample::{outcome_paulis, shot_rng, ChannelInstance, DetectionData, Effect, EffectTable, FrameSimulator};
pub use surface::{generate_surface_memory_circuit, generate_with_schedule, Ancilla, Schedule, SurfaceLayout, NZ_SCHEDULE};
