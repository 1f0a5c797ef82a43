//! Dense linear algebra over GF(2) with 64-bit packed rows.

use std::fmt;

/// A fixed-length bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i & 63);
        if b {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the overlap with `other`.
    pub fn dot(&self, other: &BitVec) -> bool {
        self.overlap(other) & 1 == 1
    }

    pub fn overlap(&self, other: &BitVec) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A binary matrix stored as a list of rows.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols));
        BitMatrix { cols, rows }
    }

    pub fn push(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    /// `H · v` over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        BitVec::from_indices(self.rows.len(), self.rows.iter().enumerate().filter(|(_, r)| r.dot(v)).map(|(i, _)| i))
    }

    pub fn rank(&self) -> usize {
        RowBasis::new(self).rank()
    }

    /// Basis of `{x : H x = 0}`.
    pub fn kernel(&self) -> Vec<BitVec> {
        let basis = RowBasis::new(self);
        let pivots: Vec<usize> = basis.rows.iter().map(|(p, _)| *p).collect();
        // The basis is fully reduced: each pivot column is set in exactly one row.
        let rows: Vec<&BitVec> = basis.vectors().collect();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = BitVec::zeros(self.cols);
                v.set(free, true);
                for (r, &p) in rows.iter().zip(&pivots) {
                    if r.get(free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }
}

/// Row-echelon basis of a row space, keyed by pivot column.
#[derive(Clone, Debug)]
pub struct RowBasis {
    cols: usize,
    rows: Vec<(usize, BitVec)>,
}

impl RowBasis {
    pub fn empty(cols: usize) -> Self {
        RowBasis { cols, rows: Vec::new() }
    }

    pub fn new(m: &BitMatrix) -> Self {
        let mut b = Self::empty(m.n_cols());
        for r in m.rows() {
            b.insert(r.clone());
        }
        b
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, v: &mut BitVec) {
        for (p, r) in &self.rows {
            if v.get(*p) {
                v.xor_assign(r);
            }
        }
    }

    /// Adds `v` to the basis. Returns false when it was already in the span.
    pub fn insert(&mut self, mut v: BitVec) -> bool {
        assert_eq!(v.len(), self.cols);
        self.reduce(&mut v);
        match v.first_one() {
            None => false,
            Some(p) => {
                // Keep earlier rows free of the new pivot so reduce works in one pass.
                for (_, r) in self.rows.iter_mut() {
                    if r.get(p) {
                        r.xor_assign(&v);
                    }
                }
                self.rows.push((p, v));
                true
            }
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &BitVec> {
        self.rows.iter().map(|(_, r)| r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel_of_repetition_checks() {
        let mut h = BitMatrix::new(4);
        h.push(BitVec::from_indices(4, [0, 1]));
        h.push(BitVec::from_indices(4, [1, 2]));
        h.push(BitVec::from_indices(4, [2, 3]));
        h.push(BitVec::from_indices(4, [0, 3]));
        assert_eq!(h.rank(), 3);
        let k = h.kernel();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].weight(), 4);
        assert!(h.mul_vec(&k[0]).is_zero());
    }

    #[test]
    fn span_membership() {
        let mut h = BitMatrix::new(70);
        h.push(BitVec::from_indices(70, [0, 65]));
        h.push(BitVec::from_indices(70, [65, 69]));
        let b = RowBasis::new(&h);
        assert!(b.contains(&BitVec::from_indices(70, [0, 69])));
        assert!(!b.contains(&BitVec::from_indices(70, [0])));
        assert!(b.contains(&BitVec::zeros(70)));
    }

    #[test]
    fn ones_iterates_across_words() {
        let v = BitVec::from_indices(130, [3, 64, 129]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![3, 64, 129]);
        assert_eq!(v.to_string().len(), 130);
    }
}
