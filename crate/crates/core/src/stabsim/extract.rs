use super::circuit::{Basis, NoisyCircuit};
use super::sample::EffectTable;
use super::surface::SurfaceLayout;
use crate::error::{Error, Result};
use crate::matcher::Edge;
use crate::DetectorErrorGraph;
use std::collections::HashMap;

const BOUNDARY: u32 = u32::MAX;

/// Graph over all detectors of `circuit`; the boundary is node
/// `num_detectors`.
///
/// Each fault's detectors are split by basis, with its observables kept on
/// the Z part. Parts of size one or two are edges. Larger parts are split
/// into edges already produced by some other fault, with their observables
/// XOR-ing to the part's own; otherwise a decomposition error is returned.
/// Parallel contributions merge as independent events. Boundary edges that
/// flip observable `k` are tagged with bit `k`.
pub fn extract_error_graph(circuit: &NoisyCircuit) -> Result<DetectorErrorGraph> {
    let table = EffectTable::new(circuit)?;
    extract_from_table(&table)
}

pub fn extract_from_table(table: &EffectTable) -> Result<DetectorErrorGraph> {
    let bases = table.detector_bases();
    let mut parts: Vec<(f64, Vec<u32>, u64)> = Vec::new();
    for (i, inst) in table.instances().iter().enumerate() {
        if inst.p <= 0.0 {
            continue;
        }
        let k = inst.channel.outcomes();
        let p = inst.p / k as f64;
        for o in 0..k {
            let e = table.effect(i, o);
            let (z, x): (Vec<u32>, Vec<u32>) = e.detectors.iter().partition(|&&d| bases[d as usize] == Basis::Z);
            if z.is_empty() && e.observables != 0 {
                return Err(Error::Decomposition { detectors: e.detectors.clone() });
            }
            if !z.is_empty() {
                parts.push((p, z, e.observables));
            }
            if !x.is_empty() {
                parts.push((p, x, 0));
            }
        }
    }

    let key = |s: &[u32]| if s.len() == 1 { (s[0], BOUNDARY) } else { (s[0], s[1]) };
    let mut known: HashMap<(u32, u32), u64> = HashMap::new();
    for (_, s, obs) in &parts {
        if s.len() <= 2 {
            let prev = *known.entry(key(s)).or_insert(*obs);
            if prev != *obs {
                return Err(Error::Mismatch(format!("edge {:?} seen with observable masks {prev} and {obs}", key(s))));
            }
        }
    }

    let mut merged: HashMap<(u32, u32), (f64, u64)> = HashMap::new();
    let mut order: Vec<(u32, u32)> = Vec::new();
    let mut comps = Vec::new();
    for (p, s, obs) in &parts {
        comps.clear();
        if s.len() <= 2 {
            comps.push(key(s));
        } else if !decompose(s, *obs, &known, &mut comps) {
            return Err(Error::Decomposition { detectors: s.clone() });
        }
        for &c in comps.iter() {
            let slot = merged.entry(c).or_insert_with(|| {
                order.push(c);
                (0.0, known[&c])
            });
            slot.0 = slot.0 * (1.0 - p) + p * (1.0 - slot.0);
        }
    }

    let n = table.num_detectors();
    let mut edges = Vec::with_capacity(order.len());
    for c in order {
        let (p, obs) = merged[&c];
        if p <= 0.0 {
            continue;
        }
        if p >= 0.5 {
            return Err(Error::Parameter(format!("merged edge probability {p} is not below 1/2")));
        }
        let b = if c.1 == BOUNDARY { n } else { c.1 as usize };
        let tag = if b == n { obs } else { 0 };
        edges.push(Edge { a: c.0 as usize, b, weight: ((1.0 - p) / p).ln(), p, obs, tag });
    }
    DetectorErrorGraph::new(n, edges)
}

/// Splits sorted `set` into known edges whose masks XOR to `obs`.
fn decompose(set: &[u32], obs: u64, known: &HashMap<(u32, u32), u64>, out: &mut Vec<(u32, u32)>) -> bool {
    if set.is_empty() {
        return obs == 0;
    }
    let head = set[0];
    for j in 1..set.len() {
        if let Some(&m) = known.get(&(head, set[j])) {
            let rest: Vec<u32> = set[1..].iter().copied().filter(|&v| v != set[j]).collect();
            out.push((head, set[j]));
            if decompose(&rest, obs ^ m, known, out) {
                return true;
            }
            out.pop();
        }
    }
    if let Some(&m) = known.get(&(head, BOUNDARY)) {
        out.push((head, BOUNDARY));
        if decompose(&set[1..], obs ^ m, known, out) {
            return true;
        }
        out.pop();
    }
    false
}

/// Subgraph on the detectors of one basis, with the index map from full
/// detector ids to subgraph nodes (`None` for dropped detectors).
pub fn restrict_to_basis(
    graph: &DetectorErrorGraph,
    bases: &[Basis],
    basis: Basis,
) -> Result<(DetectorErrorGraph, Vec<Option<u32>>)> {
    if bases.len() != graph.num_detectors() {
        return Err(Error::LengthMismatch { expected: graph.num_detectors(), got: bases.len() });
    }
    let mut map = vec![None; bases.len()];
    let mut n = 0u32;
    for (i, b) in bases.iter().enumerate() {
        if *b == basis {
            map[i] = Some(n);
            n += 1;
        }
    }
    let nb = graph.boundary();
    let mut edges = Vec::new();
    for e in graph.edges() {
        let Some(a) = map[e.a] else { continue };
        let b = if e.b == nb {
            n as usize
        } else {
            match map[e.b] {
                Some(b) => b as usize,
                None => return Err(Error::Structure("edge joins detectors of different bases".into())),
            }
        };
        edges.push(Edge { a: a as usize, b, ..*e });
    }
    Ok((DetectorErrorGraph::new(n as usize, edges)?, map))
}

/// Z-basis space-time graph with independent data errors (`p_data` per
/// qubit per round) and measurement errors (`p_meas` between rounds).
///
/// Nodes are `round * (d^2 - 1) / 2 + check` with checks in layout order.
/// Each round carries one edge per data qubit; edges on the top row flip
/// the observable.
pub fn build_phenomenological_graph(d: usize, rounds: usize, p_data: f64, p_meas: f64) -> Result<DetectorErrorGraph> {
    let lay = SurfaceLayout::new(d)?;
    if rounds == 0 {
        return Err(Error::Parameter("at least one round is required".into()));
    }
    for p in [p_data, p_meas] {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::Parameter(format!("probability {p} outside (0, 1/2)")));
        }
    }
    let z = lay.ancillas_of(Basis::Z);
    let slot: HashMap<usize, usize> = z.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let per = z.len();
    let n = per * rounds;
    let top = lay.z_logical();
    let mut edges = Vec::new();
    for r in 0..rounds {
        for q in 0..lay.num_data() as u32 {
            let on: Vec<usize> = lay.checks_on(q, Basis::Z).iter().map(|i| r * per + slot[i]).collect();
            let obs = top.contains(&q) as u64;
            match on.as_slice() {
                [a] => edges.push((*a, n, p_data, obs, obs)),
                [a, b] => edges.push((*a, *b, p_data, obs, 0)),
                _ => return Err(Error::Structure(format!("data qubit {q} lies in {} Z checks", on.len()))),
            }
        }
        if r + 1 < rounds {
            for k in 0..per {
                edges.push((r * per + k, (r + 1) * per + k, p_meas, 0, 0));
            }
        }
    }
    DetectorErrorGraph::from_probabilities(n, &edges)
}
