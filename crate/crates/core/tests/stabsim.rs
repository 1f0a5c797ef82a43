use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;
use std::collections::VecDeque;
use yoked::stabsim::*;
use yoked::Error;

/// Aaronson-Gottesman stabilizer tableau.
struct Chp {
    n: usize,
    x: Vec<Vec<bool>>,
    z: Vec<Vec<bool>>,
    r: Vec<bool>,
}

impl Chp {
    fn new(n: usize) -> Self {
        let mut x = vec![vec![false; n]; 2 * n + 1];
        let mut z = vec![vec![false; n]; 2 * n + 1];
        for i in 0..n {
            x[i][i] = true;
            z[n + i][i] = true;
        }
        Chp { n, x, z, r: vec![false; 2 * n + 1] }
    }

    fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] && self.z[i][a];
            let t = self.x[i][a];
            self.x[i][a] = self.z[i][a];
            self.z[i][a] = t;
        }
    }

    fn x(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.z[i][a];
        }
    }

    fn cnot(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] && self.z[i][b] && (self.x[i][b] ^ self.z[i][a] ^ true);
            self.x[i][b] ^= self.x[i][a];
            self.z[i][a] ^= self.z[i][b];
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
            (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut s = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for j in 0..self.n {
            s += Self::g(self.x[i][j], self.z[i][j], self.x[h][j], self.z[h][j]);
        }
        self.r[h] = s.rem_euclid(4) == 2;
        for j in 0..self.n {
            let (xi, zi) = (self.x[i][j], self.z[i][j]);
            self.x[h][j] ^= xi;
            self.z[h][j] ^= zi;
        }
    }

    /// Outcome and whether it was determined by the state.
    fn measure(&mut self, a: usize, rng: &mut Pcg64) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| self.x[i][a]) {
            for i in 0..2 * n {
                if i != p && self.x[i][a] {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p] = vec![false; n];
            self.z[p] = vec![false; n];
            self.z[p][a] = true;
            self.r[p] = rng.random::<bool>();
            (self.r[p], false)
        } else {
            let s = 2 * n;
            self.x[s] = vec![false; n];
            self.z[s] = vec![false; n];
            self.r[s] = false;
            for i in 0..n {
                if self.x[i][a] {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], true)
        }
    }
}

/// Runs a noiseless circuit; returns outcomes and determinism flags.
fn chp_run(c: &NoisyCircuit, seed: u64) -> (Vec<bool>, Vec<bool>) {
    let mut t = Chp::new(c.num_qubits);
    let mut rng = Pcg64::seed_from_u64(seed);
    let (mut out, mut det) = (Vec::new(), Vec::new());
    for ins in &c.instructions {
        if let Instruction::Gate { gate, targets, .. } = ins {
            match gate {
                Gate::H => targets.iter().for_each(|&q| t.h(q as usize)),
                Gate::I => {}
                Gate::CZ => targets.chunks(2).for_each(|p| t.cz(p[0] as usize, p[1] as usize)),
                Gate::M => {
                    for &q in targets {
                        let (m, d) = t.measure(q as usize, &mut rng);
                        out.push(m);
                        det.push(d);
                    }
                }
                Gate::R => {
                    for &q in targets {
                        if t.measure(q as usize, &mut rng).0 {
                            t.x(q as usize);
                        }
                    }
                }
            }
        }
    }
    (out, det)
}

fn parities(c: &NoisyCircuit, m: &[bool]) -> (Vec<bool>, u64) {
    let mut d = Vec::new();
    let mut o = 0;
    for ins in &c.instructions {
        match ins {
            Instruction::Detector { meas, .. } => d.push(meas.iter().fold(false, |a, &i| a ^ m[i as usize])),
            Instruction::Observable { index, meas } => {
                if meas.iter().fold(false, |a, &i| a ^ m[i as usize]) {
                    o |= 1 << index;
                }
            }
            _ => {}
        }
    }
    (d, o)
}

#[test]
fn layout_counts() {
    for d in [3, 5, 7] {
        let lay = SurfaceLayout::new(d).unwrap();
        assert_eq!(lay.ancillas.len(), d * d - 1);
        assert_eq!(lay.ancillas_of(Basis::Z).len(), (d * d - 1) / 2);
        for i in 0..lay.ancillas.len() {
            let w = lay.support(i).len();
            assert!(w == 2 || w == 4);
        }
        // Every X check meets the Z logical evenly.
        let zl = lay.z_logical();
        for i in lay.ancillas_of(Basis::X) {
            assert_eq!(lay.support(i).iter().filter(|q| zl.contains(q)).count() % 2, 0);
        }
        let xl = lay.x_logical();
        for i in lay.ancillas_of(Basis::Z) {
            assert_eq!(lay.support(i).iter().filter(|q| xl.contains(q)).count() % 2, 0);
        }
    }
    assert!(matches!(SurfaceLayout::new(4), Err(Error::Parameter(_))));
}

#[test]
fn memory_circuit_counts() {
    let c = generate_surface_memory_circuit(3, 2).unwrap();
    assert_eq!(c.num_qubits, 17);
    assert_eq!(c.num_detectors(), 16);
    assert_eq!(c.num_observables(), 1);
    assert_eq!(c.num_measurements(), 2 * 8 + 9);
    for (d, r) in [(3, 1), (5, 3), (7, 2)] {
        let c = generate_surface_memory_circuit(d, r).unwrap();
        assert_eq!(c.num_detectors(), (d * d - 1) * r);
    }
    assert!(generate_surface_memory_circuit(3, 0).is_err());
}

#[test]
fn tableau_oracle_confirms_detectors() {
    let c = generate_surface_memory_circuit(3, 2).unwrap();
    let (_, det) = chp_run(&c, 1);
    assert_eq!(det.iter().filter(|&&b| b).count(), 17);
    for (d, r) in [(3, 2), (3, 3), (5, 2)] {
        let c = generate_surface_memory_circuit(d, r).unwrap();
        for seed in 0..4 {
            let (m, _) = chp_run(&c, seed);
            let (dets, obs) = parities(&c, &m);
            assert!(dets.iter().all(|&b| !b), "d={d} r={r} seed={seed}");
            assert_eq!(obs, 0);
        }
    }
}

#[test]
fn noise_insertion() {
    let mut c = NoisyCircuit::new(2);
    c.gate(Gate::CZ, &[0, 1]);
    let n = apply_si1000(&c, 1e-3).unwrap();
    assert_eq!(n.num_channels(), 1);
    assert!(matches!(n.instructions[1], Instruction::Noise { channel: Channel::Dep2, p, .. } if p == 1e-3));

    let mut bad = NoisyCircuit::new(2);
    bad.gate(Gate::H, &[0]);
    bad.gate(Gate::M, &[0]);
    assert!(matches!(apply_si1000(&bad, 1e-3), Err(Error::Structure(_))));
    assert!(matches!(apply_si1000(&c, -0.1), Err(Error::Parameter(_))));
    assert!(matches!(apply_si1000(&c, 0.3), Err(Error::Parameter(_))));

    // Measurement layer: flip before, depolarize after, idle qubit at 2p.
    let mut m = NoisyCircuit::new(2);
    m.gate(Gate::M, &[0]);
    let n = apply_si1000(&m, 0.01).unwrap();
    let chans: Vec<(Channel, f64, Vec<u32>)> = n
        .instructions
        .iter()
        .filter_map(|i| match i {
            Instruction::Noise { channel, p, targets } => Some((*channel, *p, targets.clone())),
            _ => None,
        })
        .collect();
    assert_eq!(chans, vec![(Channel::MErr, 0.05, vec![0]), (Channel::Dep1, 0.01, vec![0]), (Channel::Dep1, 0.02, vec![1])]);
    assert!(matches!(n.instructions[0], Instruction::Noise { channel: Channel::MErr, .. }));

    let g = generate_surface_memory_circuit(3, 2).unwrap();
    assert_eq!(apply_si1000(&g, 0.0).unwrap().num_channels(), 0);
}

#[test]
fn noiseless_gates_stay_clean() {
    let c = apply_si1000(&generate_surface_memory_circuit(3, 1).unwrap(), 1e-3).unwrap();
    let mut prev: Option<&Instruction> = None;
    for ins in &c.instructions {
        if let (Some(Instruction::Gate { noiseless: true, targets, .. }), Instruction::Noise { targets: nt, .. }) = (prev, ins) {
            assert!(nt.iter().all(|q| !targets.contains(q)));
        }
        prev = Some(ins);
    }
    let text = c.to_text();
    assert!(text.contains("NOISELESS M 0 1 2 3 4 5 6 7 8"));
    assert_eq!(NoisyCircuit::from_text(&text).unwrap(), c);
}

#[test]
fn text_errors() {
    assert!(matches!(NoisyCircuit::from_text("QUBITS 2\nFOO 1"), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(NoisyCircuit::from_text("QUBITS 2\nCZ 0"), Err(Error::Structure(_))));
    assert!(matches!(NoisyCircuit::from_text("QUBITS 1\nDETECTOR 0"), Err(Error::Structure(_))));
    assert!(matches!(NoisyCircuit::from_text("QUBITS 1\nNOISE DEP1 1.5 0"), Err(Error::Parameter(_))));
}

/// Counts of each `(channel outcome)` across shots for a one-instance circuit.
fn outcome_counts(c: &NoisyCircuit, shots: u64) -> Vec<u64> {
    let t = EffectTable::new(c).unwrap();
    let k = t.instances()[0].channel.outcomes();
    let mut counts = vec![0u64; k + 1];
    let mut buf = Vec::new();
    for s in 0..shots {
        t.draw_faults(9, s, &mut buf);
        match buf.as_slice() {
            [] => counts[0] += 1,
            [(_, o)] => counts[*o as usize + 1] += 1,
            _ => panic!("one instance fired twice"),
        }
    }
    counts
}

fn within(count: u64, shots: u64, p: f64) -> bool {
    let mean = shots as f64 * p;
    (count as f64 - mean).abs() <= 5.0 * (mean * (1.0 - p)).sqrt() + 1.0
}

#[test]
fn channel_frequencies() {
    let shots = 200_000;
    for (ch, arity) in [(Channel::Dep1, 1), (Channel::Dep2, 2), (Channel::XErr, 1), (Channel::MErr, 1)] {
        let mut c = NoisyCircuit::new(2);
        c.noise(ch, 0.06, &[0, 1][..arity]);
        let counts = outcome_counts(&c, shots);
        let k = ch.outcomes();
        assert!(within(counts[0], shots, 0.94), "{ch:?} identity");
        for &n in &counts[1..] {
            assert!(within(n, shots, 0.06 / k as f64), "{ch:?} {counts:?}");
        }
    }
    // Pauli content of each outcome.
    let mut seen = std::collections::HashSet::new();
    for o in 0..15 {
        let pp = outcome_paulis(Channel::Dep2, o);
        assert_ne!(pp, [0, 0]);
        seen.insert(pp);
    }
    assert_eq!(seen.len(), 15);
    assert_eq!((0..3).map(|o| outcome_paulis(Channel::Dep1, o)[0]).collect::<Vec<_>>(), vec![1, 2, 3]);
}

#[test]
fn measurement_flip_rate() {
    let mut c = NoisyCircuit::new(1);
    c.gate(Gate::R, &[0]);
    c.noise(Channel::MErr, 0.1, &[0]);
    c.gate(Gate::M, &[0]);
    c.detector(Basis::Z, &[0]);
    let t = EffectTable::new(&c).unwrap();
    let data = t.sample(3, 0, 100_000);
    let fired = (0..data.shots).filter(|&s| data.detector(s, 0)).count() as u64;
    assert!(within(fired, 100_000, 0.1));
}

#[test]
fn frame_and_table_agree() {
    let c = apply_si1000(&generate_surface_memory_circuit(3, 3).unwrap(), 0.01).unwrap();
    let t = EffectTable::new(&c).unwrap();
    let sim = FrameSimulator::new(&c);
    let data = t.sample(11, 0, 2000);
    let mut buf = Vec::new();
    for s in 0..2000 {
        t.draw_faults(11, s as u64, &mut buf);
        let (_, dets, obs) = sim.run(&buf);
        let fired: Vec<usize> = dets.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        assert_eq!(fired, data.fired(s));
        assert_eq!(obs, data.obs[s]);
    }
}

#[test]
fn sampling_is_split_invariant() {
    let c = apply_si1000(&generate_surface_memory_circuit(3, 2).unwrap(), 0.02).unwrap();
    let t = EffectTable::new(&c).unwrap();
    let all = t.sample(5, 0, 300);
    let tail = t.sample(5, 100, 200);
    for s in 0..200 {
        assert_eq!(all.shot(100 + s), tail.shot(s));
        assert_eq!(all.obs[100 + s], tail.obs[s]);
    }
    let zero = apply_si1000(&generate_surface_memory_circuit(3, 2).unwrap(), 0.0).unwrap();
    let z = EffectTable::new(&zero).unwrap().sample(1, 0, 50);
    assert!(z.bits.iter().all(|&w| w == 0) && z.obs.iter().all(|&o| o == 0));
}

#[test]
fn packed_export_round_trip() {
    let c = apply_si1000(&generate_surface_memory_circuit(3, 2).unwrap(), 0.03).unwrap();
    let data = EffectTable::new(&c).unwrap().sample(2, 0, 64);
    let bytes = data.to_packed_bytes();
    assert_eq!(bytes.len(), 64 * 3);
    let back = DetectionData::from_packed_bytes(16, 1, &bytes).unwrap();
    assert_eq!(back.bits, data.bits);
    assert_eq!(back.obs, data.obs);
    assert!(DetectionData::from_packed_bytes(16, 1, &bytes[..5]).is_err());
}

/// Fewest edges on a path that flips observable 0 between the boundary and
/// itself, found by BFS over (node, parity).
fn circuit_distance(g: &yoked::DetectorErrorGraph) -> usize {
    let n = g.num_detectors() + 1;
    let mut dist = vec![usize::MAX; 2 * n];
    let b = g.boundary();
    dist[2 * b] = 0;
    let mut q = VecDeque::from([(b, 0usize)]);
    while let Some((v, par)) = q.pop_front() {
        for &(u, e) in g.neighbours(v) {
            let np = par ^ (g.edges()[e].obs & 1) as usize;
            if dist[2 * u + np] == usize::MAX {
                dist[2 * u + np] = dist[2 * v + par] + 1;
                q.push_back((u, np));
            }
        }
    }
    dist[2 * b + 1]
}

#[test]
fn extracted_graph_distance() {
    for (d, r) in [(3, 3), (5, 4)] {
        let c = apply_si1000(&generate_surface_memory_circuit(d, r).unwrap(), 1e-3).unwrap();
        let g = extract_error_graph(&c).unwrap();
        let (z, map) = restrict_to_basis(&g, &c.detector_bases(), Basis::Z).unwrap();
        assert_eq!(map.iter().filter(|m| m.is_some()).count(), z.num_detectors());
        assert_eq!(circuit_distance(&z), d);
        for e in z.edges() {
            assert!(e.p > 0.0 && e.p < 0.5);
            let boundary = e.b == z.boundary();
            assert_eq!(e.tag, if boundary { e.obs } else { 0 });
        }
    }
}

#[test]
fn graph_predicts_detector_rates() {
    let c = apply_si1000(&generate_surface_memory_circuit(3, 3).unwrap(), 5e-3).unwrap();
    let t = EffectTable::new(&c).unwrap();
    let g = extract_from_table(&t).unwrap();
    let shots = 200_000;
    let data = t.sample(21, 0, shots);
    let mut count = vec![0u64; g.num_detectors()];
    for s in 0..shots {
        for d in data.fired(s) {
            count[d] += 1;
        }
    }
    for v in 0..g.num_detectors() {
        let prod: f64 = g.neighbours(v).iter().map(|&(_, e)| 1.0 - 2.0 * g.edges()[e].p).product();
        let p = (1.0 - prod) / 2.0;
        assert!(within(count[v], shots as u64, p), "detector {v}: {} vs {}", count[v], p * shots as f64);
    }
}

#[test]
fn phenomenological_counts() {
    let g = build_phenomenological_graph(3, 2, 1e-3, 1e-3).unwrap();
    assert_eq!(g.num_detectors(), 8);
    let timelike = g.edges().iter().filter(|e| e.b != g.boundary() && e.b - e.a == 4 && e.obs == 0 && e.a % 4 == e.b % 4).count();
    assert_eq!(g.edges().len(), 18 + 4);
    assert_eq!(timelike, 4);
    assert_eq!(circuit_distance(&g), 3);
    assert!(build_phenomenological_graph(3, 2, 0.0, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn effects_are_linear(seed in any::<u64>(), take in 1usize..6) {
        let c = apply_si1000(&generate_surface_memory_circuit(3, 2).unwrap(), 0.05).unwrap();
        let t = EffectTable::new(&c).unwrap();
        let sim = FrameSimulator::new(&c);
        let mut faults = Vec::new();
        t.draw_faults(seed, 0, &mut faults);
        faults.truncate(take);
        let (_, whole, obs) = sim.run(&faults);
        let mut acc = vec![false; whole.len()];
        let mut acc_obs = 0;
        for f in &faults {
            let (_, part, o) = sim.run(std::slice::from_ref(f));
            for (a, b) in acc.iter_mut().zip(part) {
                *a ^= b;
            }
            acc_obs ^= o;
        }
        prop_assert_eq!(acc, whole);
        prop_assert_eq!(acc_obs, obs);
    }

    #[test]
    fn noiseless_runs_are_quiet(d in prop::sample::select(vec![3usize, 5]), r in 1usize..4, seed in any::<u64>()) {
        let c = generate_surface_memory_circuit(d, r).unwrap();
        let (m, _) = chp_run(&c, seed);
        let (dets, obs) = parities(&c, &m);
        prop_assert!(dets.iter().all(|&b| !b));
        prop_assert_eq!(obs, 0);
    }
}
