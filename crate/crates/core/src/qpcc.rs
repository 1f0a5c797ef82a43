//! Quantum multi-dimensional parity check codes.
//!
//! Qubits live on an `n_1 × … × n_r` array, linearized row-major. X-type
//! checks are the lines of the array (the checks of the tensor product of
//! single-parity-check codes). Z-type checks are the same lines pushed
//! through a permutation that cyclically shifts the axes of the low-order
//! `2 × … × 2` tensor factors, which makes every X/Z pair overlap evenly.

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec, RowBasis};
use std::fmt;

/// Pauli type of a check or error pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    pub fn other(self) -> Pauli {
        match self {
            Pauli::X => Pauli::Z,
            Pauli::Z => Pauli::X,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Z => "Z",
        })
    }
}

/// Bijection between nominal array positions and the positions used by the
/// Z-type checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchPermutation {
    /// Maps a position in a Z-check support back to the unpermuted pattern.
    pub forward: Vec<usize>,
    pub inverse: Vec<usize>,
}

impl PatchPermutation {
    pub fn identity(n: usize) -> Self {
        PatchPermutation { forward: (0..n).collect(), inverse: (0..n).collect() }
    }

    fn from_inverse(inverse: Vec<usize>) -> Self {
        let mut forward = vec![0; inverse.len()];
        for (i, &j) in inverse.iter().enumerate() {
            forward[j] = i;
        }
        PatchPermutation { forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }
}

/// An outer CSS code of the parity-check family.
#[derive(Clone, Debug)]
pub struct ParityCheckCode {
    sides: Vec<usize>,
    x_checks: BitMatrix,
    z_checks: BitMatrix,
    perm: PatchPermutation,
    rank_x: usize,
    rank_z: usize,
}

/// Row-major coordinates of a linear index.
pub fn coords(sides: &[usize], mut idx: usize) -> Vec<usize> {
    let mut c = vec![0; sides.len()];
    for a in (0..sides.len()).rev() {
        c[a] = idx % sides[a];
        idx /= sides[a];
    }
    c
}

/// Row-major linear index of a coordinate tuple.
pub fn linear(sides: &[usize], c: &[usize]) -> usize {
    c.iter().zip(sides).fold(0, |acc, (&x, &s)| acc * s + x)
}

/// Line checks of the array: one per axis and per setting of the other axes.
pub fn delta_checks(sides: &[usize]) -> BitMatrix {
    let n: usize = sides.iter().product();
    let mut m = BitMatrix::new(n);
    for axis in 0..sides.len() {
        let mut seen = vec![false; n];
        for start in 0..n {
            let mut c = coords(sides, start);
            if c[axis] != 0 || seen[start] {
                continue;
            }
            let mut row = BitVec::zeros(n);
            for t in 0..sides[axis] {
                c[axis] = t;
                let q = linear(sides, &c);
                seen[q] = true;
                row.set(q, true);
            }
            m.push(row);
        }
    }
    m
}

/// The permutation whose image of each line is a Z-check support.
fn shift_permutation(sides: &[usize]) -> PatchPermutation {
    let r = sides.len();
    let n: usize = sides.iter().product();
    let low = 1usize << r;
    let inverse = (0..n)
        .map(|q| {
            let c = coords(sides, q);
            let mut out: Vec<usize> = c.iter().map(|&x| x / low * low).collect();
            for k in 1..=r {
                let shift = r - k;
                for (axis, &x) in c.iter().enumerate() {
                    let bit = (x >> shift) & 1;
                    out[(axis + k - 1) % r] |= bit << shift;
                }
            }
            linear(sides, &out)
        })
        .collect();
    PatchPermutation::from_inverse(inverse)
}

fn permute_rows(m: &BitMatrix, map: &[usize]) -> BitMatrix {
    let rows = m.rows().iter().map(|r| BitVec::from_indices(r.len(), r.ones().map(|q| map[q]))).collect();
    BitMatrix::from_rows(m.n_cols(), rows)
}

/// Checks that `sides` admit a code: every side at least `2^r` and divisible by it.
pub fn check_sides(sides: &[usize]) -> Result<()> {
    let r = sides.len();
    if r == 0 {
        return Err(Error::Dimension("at least one side length is required".into()));
    }
    if r >= usize::BITS as usize - 1 {
        return Err(Error::Dimension(format!("dimension {r} is too large")));
    }
    let modulus = 1usize << r;
    for &s in sides {
        if s < modulus {
            return Err(Error::Dimension(format!("side length {s} is smaller than {modulus}")));
        }
        if s % modulus != 0 {
            return Err(Error::Divisibility { side: s, modulus });
        }
    }
    Ok(())
}

/// Number of logical qubits, `2 prod(n_i - 1) - prod(n_i)`, for admissible sides.
pub fn logical_count(sides: &[usize]) -> usize {
    let inner: usize = sides.iter().map(|s| s - 1).product();
    let n: usize = sides.iter().product();
    2 * inner - n
}

/// Builds the quantum parity check code with the given side lengths.
pub fn build_qpcc(sides: &[usize]) -> Result<ParityCheckCode> {
    check_sides(sides)?;
    let r = sides.len();
    let x_checks = delta_checks(sides);
    let perm = if r == 1 { PatchPermutation::identity(x_checks.n_cols()) } else { shift_permutation(sides) };
    let z_checks = permute_rows(&x_checks, &perm.inverse);
    let rank_x = x_checks.rank();
    let rank_z = z_checks.rank();
    Ok(ParityCheckCode { sides: sides.to_vec(), x_checks, z_checks, perm, rank_x, rank_z })
}

impl ParityCheckCode {
    pub fn side_lengths(&self) -> &[usize] {
        &self.sides
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn n(&self) -> usize {
        self.x_checks.n_cols()
    }

    /// Logical qubit count from the closed-form parameter formula.
    pub fn k(&self) -> usize {
        logical_count(&self.sides)
    }

    /// Nominal distance `2^r`.
    pub fn d(&self) -> usize {
        1 << self.dimension()
    }

    pub fn x_checks(&self) -> &BitMatrix {
        &self.x_checks
    }

    pub fn z_checks(&self) -> &BitMatrix {
        &self.z_checks
    }

    pub fn checks(&self, p: Pauli) -> &BitMatrix {
        match p {
            Pauli::X => &self.x_checks,
            Pauli::Z => &self.z_checks,
        }
    }

    pub fn permutation(&self) -> &PatchPermutation {
        &self.perm
    }

    pub fn rank(&self, p: Pauli) -> usize {
        match p {
            Pauli::X => self.rank_x,
            Pauli::Z => self.rank_z,
        }
    }

    /// Number of checks of type `p` that are linearly dependent on the rest.
    pub fn redundant_checks(&self, p: Pauli) -> usize {
        self.checks(p).n_rows() - self.rank(p)
    }

    /// Dense export: one check per line as `0`/`1` characters.
    pub fn to_dense_text(&self, p: Pauli) -> String {
        self.checks(p).rows().iter().map(|r| format!("{r}\n")).collect()
    }

    /// Sparse export: `X i j …` and `Z i j …` lines.
    pub fn to_sparse_text(&self) -> String {
        let mut s = String::new();
        for p in [Pauli::X, Pauli::Z] {
            for r in self.checks(p).rows() {
                s.push_str(&p.to_string());
                for q in r.ones() {
                    s.push_str(&format!(" {q}"));
                }
                s.push('\n');
            }
        }
        s
    }
}

/// Pairs `(x_row, z_row)` whose supports overlap on an odd number of positions.
pub fn anticommuting_pairs(x: &BitMatrix, z: &BitMatrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in x.rows().iter().enumerate() {
        for (j, b) in z.rows().iter().enumerate() {
            if a.dot(b) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn verify_commutation(code: &ParityCheckCode) -> Vec<(usize, usize)> {
    anticommuting_pairs(&code.x_checks, &code.z_checks)
}

/// Whether `pattern` lies in the row span of the checks of type `p`.
pub fn in_stabilizer_span(code: &ParityCheckCode, pattern: &BitVec, p: Pauli) -> Result<bool> {
    if pattern.len() != code.n() {
        return Err(Error::LengthMismatch { expected: code.n(), got: pattern.len() });
    }
    Ok(RowBasis::new(code.checks(p)).contains(pattern))
}

/// Result of a bounded distance search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    Exact(usize),
    /// No logical pattern of weight below this bound exists.
    AtLeast(usize),
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(d) => write!(f, "{d}"),
            Distance::AtLeast(d) => write!(f, ">={d}"),
        }
    }
}

/// Parameters computed from the check matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeParameters {
    pub n: usize,
    pub k: usize,
    pub d: Distance,
}

/// Default cap on the number of candidate patterns a distance search may visit.
pub const DEFAULT_BUDGET: u128 = 50_000_000;

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Strategy used by the distance search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchPath {
    /// Pick whichever enumeration is cheaper.
    Auto,
    /// All patterns of weight up to the cap.
    Weight,
    /// All vectors of the kernel of the opposite-type checks.
    Kernel,
}

/// n, k from ranks and distance by exhaustive search up to `cap`.
pub fn code_parameters(code: &ParityCheckCode, cap: usize) -> Result<CodeParameters> {
    code_parameters_with(code, cap, DEFAULT_BUDGET, SearchPath::Auto)
}

pub fn code_parameters_with(code: &ParityCheckCode, cap: usize, budget: u128, path: SearchPath) -> Result<CodeParameters> {
    if cap == 0 {
        return Err(Error::Parameter("distance cap must be at least 1".into()));
    }
    let n = code.n();
    let k = n - code.rank_x - code.rank_z;
    if k == 0 {
        // No logical operators exist; the search space is empty.
        return Ok(CodeParameters { n, k, d: Distance::AtLeast(cap + 1) });
    }
    let mut best: Option<usize> = None;
    for p in [Pauli::X, Pauli::Z] {
        let min = min_logical_weight(code, p, cap, budget, path)?;
        if let Some(w) = min {
            best = Some(best.map_or(w, |b| b.min(w)));
        }
    }
    let d = match best {
        Some(w) if w <= cap => Distance::Exact(w),
        _ => Distance::AtLeast(cap + 1),
    };
    Ok(CodeParameters { n, k, d })
}

fn weight_budget(n: usize, cap: usize) -> u128 {
    (1..=cap.min(n)).map(|w| binom(n, w)).sum()
}

fn kernel_budget(code: &ParityCheckCode, p: Pauli) -> u128 {
    let dim = code.n() - code.rank(p.other());
    if dim >= 127 {
        u128::MAX
    } else {
        1u128 << dim
    }
}

/// Minimum weight of a type-`p` pattern that commutes with all opposite-type
/// checks but is not a product of type-`p` checks, if one of weight ≤ cap exists.
pub fn min_logical_weight(code: &ParityCheckCode, p: Pauli, cap: usize, budget: u128, path: SearchPath) -> Result<Option<usize>> {
    let wb = weight_budget(code.n(), cap);
    let kb = kernel_budget(code, p);
    let use_kernel = match path {
        SearchPath::Auto => kb < wb,
        SearchPath::Weight => false,
        SearchPath::Kernel => true,
    };
    let needed = if use_kernel { kb } else { wb };
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let found = if use_kernel {
        let mut best = None;
        kernel_logicals(code, p, |v| {
            let w = v.weight();
            if w <= cap && best.is_none_or(|b| w < b) {
                best = Some(w);
            }
        });
        best
    } else {
        let mut out = None;
        for w in 1..=cap.min(code.n()) {
            if first_logical_of_weight(code, p, w).is_some() {
                out = Some(w);
                break;
            }
        }
        out
    };
    Ok(found)
}

fn kernel_logicals(code: &ParityCheckCode, p: Pauli, mut visit: impl FnMut(&BitVec)) {
    let basis = code.checks(p.other()).kernel();
    let span = RowBasis::new(code.checks(p));
    let mut v = BitVec::zeros(code.n());
    // Gray-code walk over all kernel vectors.
    let total = 1u128 << basis.len();
    for i in 1..total {
        let bit = i.trailing_zeros() as usize;
        v.xor_assign(&basis[bit]);
        if !span.contains(&v) {
            visit(&v);
        }
    }
}

/// Columns of `h` as syndrome vectors.
fn columns(h: &BitMatrix) -> Vec<BitVec> {
    let mut cols = vec![BitVec::zeros(h.n_rows()); h.n_cols()];
    for (i, r) in h.rows().iter().enumerate() {
        for q in r.ones() {
            cols[q].set(i, true);
        }
    }
    cols
}

fn for_each_undetectable(code: &ParityCheckCode, p: Pauli, w: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    let n = code.n();
    let cols = columns(code.checks(p.other()));
    let mut idx: Vec<usize> = (0..w).collect();
    let mut partial: Vec<BitVec> = vec![BitVec::zeros(code.checks(p.other()).n_rows()); w + 1];
    for t in 0..w {
        let mut s = partial[t].clone();
        s.xor_assign(&cols[idx[t]]);
        partial[t + 1] = s;
    }
    loop {
        if partial[w].is_zero() && !visit(&idx) {
            return;
        }
        // Advance to the next combination in lexicographic order.
        let mut t = w;
        while t > 0 && idx[t - 1] == n - w + t - 1 {
            t -= 1;
        }
        if t == 0 {
            return;
        }
        idx[t - 1] += 1;
        for u in t..w {
            idx[u] = idx[u - 1] + 1;
        }
        for u in t - 1..w {
            let mut s = partial[u].clone();
            s.xor_assign(&cols[idx[u]]);
            partial[u + 1] = s;
        }
    }
}

fn first_logical_of_weight(code: &ParityCheckCode, p: Pauli, w: usize) -> Option<Vec<usize>> {
    let span = RowBasis::new(code.checks(p));
    let mut found = None;
    for_each_undetectable(code, p, w, |idx| {
        if span.contains(&BitVec::from_indices(code.n(), idx.iter().copied())) {
            true
        } else {
            found = Some(idx.to_vec());
            false
        }
    });
    found
}

/// All logical patterns of type `p` with exactly weight `w`.
pub fn logicals_of_weight(code: &ParityCheckCode, p: Pauli, w: usize) -> Vec<Vec<usize>> {
    let span = RowBasis::new(code.checks(p));
    let mut out = Vec::new();
    for_each_undetectable(code, p, w, |idx| {
        if !span.contains(&BitVec::from_indices(code.n(), idx.iter().copied())) {
            out.push(idx.to_vec());
        }
        true
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_permutation_transposes_low_bits() {
        let code = build_qpcc(&[8, 8]).unwrap();
        let inv = &code.permutation().inverse;
        for r in 0..8 {
            for c in 0..8 {
                let want = (2 * (r >> 1) + (c & 1)) * 8 + 2 * (c >> 1) + (r & 1);
                assert_eq!(inv[r * 8 + c], want);
            }
        }
    }

    #[test]
    fn one_dimensional_code_has_no_permutation() {
        let code = build_qpcc(&[4]).unwrap();
        assert_eq!(code.permutation(), &PatchPermutation::identity(4));
        assert_eq!(code.to_dense_text(Pauli::X), "1111\n");
        assert_eq!(code.to_sparse_text(), "X 0 1 2 3\nZ 0 1 2 3\n");
    }

    #[test]
    fn rejects_bad_sides() {
        assert_eq!(build_qpcc(&[6, 6]).unwrap_err().kind(), "DivisibilityError");
        assert_eq!(build_qpcc(&[]).unwrap_err().kind(), "DimensionError");
        assert_eq!(build_qpcc(&[4, 4, 4]).unwrap_err().kind(), "DimensionError");
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(64, 4), 635_376);
        assert_eq!(binom(5, 0), 1);
        assert_eq!(binom(3, 5), 0);
    }
}
