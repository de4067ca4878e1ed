//! Bit-packed linear algebra over GF(2).
//!
//! Vectors and matrix rows are stored as little-endian `u64` words. All
//! elimination routines pivot on the lowest available row index so results
//! (ranks, kernel bases, solutions) are reproducible.

use std::fmt;

const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length GF(2) vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.toggle(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(
            bits.len(),
            bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i),
        )
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        xor_words(&mut self.words, &other.words);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Parity of the bitwise AND; the symplectic/CSS overlap of two supports.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        parity_and(&self.words, &other.words)
    }

    pub fn first_one(&self) -> Option<usize> {
        first_one(&self.words)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        iter_ones(&self.words)
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
pub(crate) fn parity_and(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1
        == 1
}

#[inline]
pub(crate) fn first_one(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
}

pub(crate) fn iter_ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            }
        })
    })
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / WORD] >> (i % WORD)) & 1 == 1
}

/// Dense row-major GF(2) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        get_bit(self.row_words(r), c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let mask = 1u64 << (c % WORD);
        let w = &mut self.data[r * self.stride + c / WORD];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        iter_ones(self.row_words(r)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in iter_ones(self.row_words(r)) {
                t.set(c, r, true);
            }
        }
        t
    }

    /// `self · otherᵀ`, i.e. the matrix of pairwise row overlaps mod 2.
    pub fn mul_transpose(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "inner dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                if parity_and(self.row_words(i), other.row_words(j)) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if parity_and(self.row_words(r), v.words()) {
                out.set(r, true);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|w| *w == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let s = self.stride;
        let (head, tail) = self.data.split_at_mut(hi * s);
        head[lo * s..(lo + 1) * s].swap_with_slice(&mut tail[..s]);
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        if src < dst {
            let (head, tail) = self.data.split_at_mut(dst * s);
            xor_words(&mut tail[..s], &head[src * s..(src + 1) * s]);
        } else {
            let (head, tail) = self.data.split_at_mut(src * s);
            xor_words(&mut head[dst * s..(dst + 1) * s], &tail[..s]);
        }
    }

    /// In-place reduced row echelon form. Returns the pivot columns in
    /// increasing order; row `i` of the result has its pivot at `pivots[i]`.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, next);
            for r in 0..self.rows {
                if r != next && self.get(r, c) {
                    self.xor_row_into(next, r);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{v : self · v = 0}`, one vector per free column in
    /// increasing column order.
    pub fn kernel(&self) -> Vec<BitVec> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (row, &p) in pivots.iter().enumerate() {
                if m.get(row, free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Some `x` with `self · x = b`, or `None` when `b` lies outside the
    /// column space.
    pub fn solve(&self, b: &BitVec) -> Option<BitVec> {
        assert_eq!(b.len(), self.rows, "dimension mismatch");
        // Augment with b as an extra column.
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in iter_ones(self.row_words(r)) {
                aug.set(r, c, true);
            }
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let pivots = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BitVec::zeros(self.cols);
        for (row, &p) in pivots.iter().enumerate() {
            if aug.get(row, self.cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "{:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Incrementally built basis of a GF(2) vector space, kept in echelon form
/// with one distinct pivot bit per stored vector.
///
/// Each stored vector also remembers which inserted vectors it is a sum of,
/// so `express` can rewrite a target as a combination of the inputs.
#[derive(Clone, Debug)]
pub struct IncrementalBasis {
    dim: usize,
    vecs: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    combos: Vec<Vec<u64>>,
    capacity: usize,
}

impl IncrementalBasis {
    /// `dim` is the ambient length; `capacity` bounds the number of
    /// independent vectors that will ever be accepted.
    pub fn new(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            vecs: Vec::new(),
            pivots: Vec::new(),
            combos: Vec::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.vecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vecs.is_empty()
    }

    fn reduce(&self, v: &mut [u64], combo: &mut [u64]) {
        for (i, b) in self.vecs.iter().enumerate() {
            if get_bit(v, self.pivots[i]) {
                xor_words(v, b);
                xor_words(combo, &self.combos[i]);
            }
        }
    }

    /// Inserts `v` if it is independent of the current span. Returns the
    /// slot index it was stored at.
    pub fn insert(&mut self, v: &[u64]) -> Option<usize> {
        debug_assert_eq!(v.len(), words_for(self.dim));
        let slot = self.vecs.len();
        if slot == self.capacity {
            return None;
        }
        let mut r = v.to_vec();
        let mut combo = vec![0u64; words_for(self.capacity)];
        self.reduce(&mut r, &mut combo);
        let pivot = first_one(&r)?;
        combo[slot / WORD] ^= 1u64 << (slot % WORD);
        self.vecs.push(r);
        self.pivots.push(pivot);
        self.combos.push(combo);
        Some(slot)
    }

    /// Expresses `target` as a sum of inserted vectors; the returned words
    /// index insertion slots. `None` if `target` is outside the span.
    pub fn express(&self, target: &[u64]) -> Option<Vec<u64>> {
        let mut r = target.to_vec();
        let mut combo = vec![0u64; words_for(self.capacity)];
        self.reduce(&mut r, &mut combo);
        if r.iter().any(|w| *w != 0) {
            None
        } else {
            Some(combo)
        }
    }

    pub fn contains(&self, target: &[u64]) -> bool {
        let mut r = target.to_vec();
        for (i, b) in self.vecs.iter().enumerate() {
            if get_bit(&r, self.pivots[i]) {
                xor_words(&mut r, b);
            }
        }
        r.iter().all(|w| *w == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, bits: &[bool]) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if bits[(r * cols + c) % bits.len()] {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    #[test]
    fn identity_rank_and_kernel() {
        let mut m = BitMatrix::zeros(5, 5);
        for i in 0..5 {
            m.set(i, i, true);
        }
        assert_eq!(m.rank(), 5);
        assert!(m.kernel().is_empty());
        assert_eq!(BitMatrix::zeros(3, 7).kernel().len(), 7);
    }

    #[test]
    fn solve_rejects_inconsistent_system() {
        // [1 1] x = 1 and [1 1] x = 0
        let mut m = BitMatrix::zeros(2, 2);
        m.set(0, 0, true);
        m.set(0, 1, true);
        m.set(1, 0, true);
        m.set(1, 1, true);
        assert!(m.solve(&BitVec::from_indices(2, [0])).is_none());
        let x = m.solve(&BitVec::from_indices(2, [0, 1])).unwrap();
        assert_eq!(m.mul_vec(&x), BitVec::from_indices(2, [0, 1]));
    }

    #[test]
    fn iter_ones_crosses_words() {
        let v = BitVec::from_indices(200, [0, 63, 64, 130, 199]);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 63, 64, 130, 199]);
        assert_eq!(v.weight(), 5);
        assert_eq!(v.first_one(), Some(0));
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in 1usize..12, cols in 1usize..90, bits in proptest::collection::vec(any::<bool>(), 1..200)) {
            let m = random_matrix(rows, cols, &bits);
            let kernel = m.kernel();
            prop_assert_eq!(m.rank() + kernel.len(), cols);
            for v in &kernel {
                prop_assert!(m.mul_vec(v).is_zero());
            }
        }

        #[test]
        fn solve_roundtrip(rows in 1usize..10, cols in 1usize..70, bits in proptest::collection::vec(any::<bool>(), 1..120), xs in proptest::collection::vec(any::<bool>(), 70)) {
            let m = random_matrix(rows, cols, &bits);
            let x = BitVec::from_bools(&xs[..cols]);
            let b = m.mul_vec(&x);
            let sol = m.solve(&b).expect("b is in the column space");
            prop_assert_eq!(m.mul_vec(&sol), b);
        }

        #[test]
        fn incremental_basis_matches_rank(rows in 1usize..14, cols in 1usize..70, bits in proptest::collection::vec(any::<bool>(), 1..200)) {
            let m = random_matrix(rows, cols, &bits);
            let mut basis = IncrementalBasis::new(cols, rows);
            let mut inserted = Vec::new();
            for r in 0..rows {
                if basis.insert(m.row_words(r)).is_some() {
                    inserted.push(r);
                }
            }
            prop_assert_eq!(basis.len(), m.rank());
            for r in 0..rows {
                let combo = basis.express(m.row_words(r)).expect("row in span");
                let mut acc = vec![0u64; words_for(cols)];
                for slot in iter_ones(&combo) {
                    xor_words(&mut acc, m.row_words(inserted[slot]));
                }
                prop_assert_eq!(&acc[..], m.row_words(r));
            }
        }
    }
}
