//! GF(2) vectors and sparse matrices.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Packed bit vector, bit `i` lives in word `i / 64` at position `i % 64`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut v = BitVec::zeros(len);
        for i in 0..len.min(64) {
            v.set(i, (value >> i) & 1 == 1);
        }
        v
    }

    pub fn from_support(len: usize, ones: &[usize]) -> Self {
        let mut v = BitVec::zeros(len);
        for &i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Bits 0..64 as an integer (bit 0 least significant).
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec(")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, ")")
    }
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_bits().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(deserializer)?;
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(serde::de::Error::custom(format!(
                "bit value {bad} is not 0 or 1"
            )));
        }
        Ok(BitVec::from_bits(&bits))
    }
}

/// Sparse GF(2) matrix stored as sorted per-row column lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<Vec<usize>>,
}

impl BitMatrix {
    pub fn new(cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut checked = Vec::with_capacity(rows.len());
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!(
                    "row {i} repeats column {}",
                    w[0]
                )));
            }
            if let Some(&c) = row.last() {
                if c >= cols {
                    return Err(Error::InvalidInput(format!(
                        "row {i} has column {c} >= {cols}"
                    )));
                }
            }
            checked.push(row);
        }
        Ok(BitMatrix {
            cols,
            rows: checked,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            cols: n,
            rows: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let cols = dense.first().map_or(0, |r| r.len());
        let mut rows = Vec::with_capacity(dense.len());
        for (i, r) in dense.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "dense row {i} has length {} != {cols}",
                    r.len()
                )));
            }
            rows.push(
                r.iter()
                    .enumerate()
                    .filter(|(_, &b)| b & 1 == 1)
                    .map(|(j, _)| j)
                    .collect(),
            );
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn from_bitvecs(cols: usize, rows: &[BitVec]) -> Self {
        BitMatrix {
            cols,
            rows: rows.iter().map(|r| r.ones().collect()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn row_lists(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(j < self.cols);
        match (self.rows[i].binary_search(&j), value) {
            (Ok(pos), false) => {
                self.rows[i].remove(pos);
            }
            (Err(pos), true) => self.rows[i].insert(pos, j),
            _ => {}
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for row in &self.rows {
            for &j in row {
                w[j] += 1;
            }
        }
        w
    }

    pub fn max_row_weight(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut rows = vec![Vec::new(); self.cols];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                rows[j].push(i);
            }
        }
        BitMatrix {
            cols: self.rows.len(),
            rows,
        }
    }

    pub fn row_bitvec(&self, i: usize) -> BitVec {
        BitVec::from_support(self.cols, &self.rows[i])
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0u8; self.cols];
                for &j in row {
                    d[j] = 1;
                }
                d
            })
            .collect()
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut packed: Vec<BitVec> = (0..self.rows()).map(|i| self.row_bitvec(i)).collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..packed.len()).find(|&r| packed[r].get(col)) else {
                continue;
            };
            packed.swap(rank, p);
            let pivot = packed[rank].clone();
            for (r, row) in packed.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Computes `M x` over GF(2).
pub fn matvec_mod2(m: &BitMatrix, x: &BitVec) -> Result<BitVec> {
    if x.len() != m.cols() {
        return Err(Error::DimensionMismatch {
            expected: m.cols(),
            found: x.len(),
        });
    }
    let mut out = BitVec::zeros(m.rows());
    for (i, row) in m.row_lists().iter().enumerate() {
        let parity = row.iter().filter(|&&j| x.get(j)).count() % 2 == 1;
        out.set(i, parity);
    }
    Ok(out)
}

/// A set of rows whose XOR is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dependency {
    pub size: usize,
    pub rows: Vec<usize>,
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Smallest set of at most `cap` rows that XOR to zero, with a witness.
///
/// Sizes 1 through 4 are searched in order, so the first hit is minimal.
pub fn min_dependent_rows(m: &BitMatrix, cap: usize) -> Result<Option<Dependency>> {
    if cap > 4 {
        return Err(Error::InvalidInput(format!("cap {cap} exceeds 4")));
    }
    let rows = m.row_lists();
    if cap >= 1 {
        if let Some(i) = rows.iter().position(Vec::is_empty) {
            return Ok(Some(Dependency {
                size: 1,
                rows: vec![i],
            }));
        }
    }
    if cap < 2 {
        return Ok(None);
    }
    let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if let Some(&first) = index.get(row.as_slice()) {
            return Ok(Some(Dependency {
                size: 2,
                rows: vec![first, i],
            }));
        }
        index.insert(row, i);
    }
    if cap < 3 {
        return Ok(None);
    }
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let x = xor_sorted(&rows[i], &rows[j]);
            if let Some(&k) = index.get(x.as_slice()) {
                let mut w = vec![i, j, k];
                w.sort_unstable();
                return Ok(Some(Dependency { size: 3, rows: w }));
            }
        }
    }
    if cap < 4 {
        return Ok(None);
    }
    let mut pairs: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let x = xor_sorted(&rows[i], &rows[j]);
            match pairs.get(&x) {
                Some(&(a, b)) => {
                    // distinct rows and no size-3 dependency force {a,b} and {i,j} disjoint
                    let mut w = vec![a, b, i, j];
                    w.sort_unstable();
                    return Ok(Some(Dependency { size: 4, rows: w }));
                }
                None => {
                    pairs.insert(x, (i, j));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_bt() -> BitMatrix {
        BitMatrix::new(2, vec![vec![0], vec![0, 1], vec![1]])
            .unwrap()
            .transpose()
    }

    fn xor_of(m: &BitMatrix, rows: &[usize]) -> BitVec {
        let mut acc = BitVec::zeros(m.cols());
        for &r in rows {
            acc.xor_assign(&m.row_bitvec(r));
        }
        acc
    }

    #[test]
    fn matvec_small_example() {
        let bt = example_bt();
        let s = matvec_mod2(&bt, &BitVec::from_bits(&[1, 0, 0])).unwrap();
        assert_eq!(s.to_bits(), vec![1, 0]);
        let z = matvec_mod2(&bt, &BitVec::zeros(3)).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn matvec_linearity_fixed_pair() {
        let bt = example_bt();
        let y = BitVec::from_bits(&[1, 1, 0]);
        let y2 = BitVec::from_bits(&[0, 1, 1]);
        let lhs = matvec_mod2(&bt, &y.xor(&y2)).unwrap();
        let rhs = matvec_mod2(&bt, &y)
            .unwrap()
            .xor(&matvec_mod2(&bt, &y2).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn matvec_rejects_bad_length() {
        assert!(matvec_mod2(&example_bt(), &BitVec::zeros(2)).is_err());
    }

    #[test]
    fn new_rejects_bad_rows() {
        assert!(BitMatrix::new(3, vec![vec![0, 3]]).is_err());
        assert!(BitMatrix::new(3, vec![vec![1, 1]]).is_err());
    }

    #[test]
    fn dependent_triple_of_pairwise_sums() {
        // u+v, v+c, u+c over columns (u, v, c)
        let m = BitMatrix::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let d = min_dependent_rows(&m, 4).unwrap().unwrap();
        assert_eq!(d.size, 3);
        assert!(xor_of(&m, &d.rows).is_zero());
    }

    #[test]
    fn identity_is_independent() {
        assert_eq!(
            min_dependent_rows(&BitMatrix::identity(6), 4).unwrap(),
            None
        );
    }

    #[test]
    fn equal_rows_give_two() {
        let m = BitMatrix::new(4, vec![vec![0, 2], vec![1], vec![0, 2]]).unwrap();
        assert_eq!(
            min_dependent_rows(&m, 4).unwrap().unwrap(),
            Dependency {
                size: 2,
                rows: vec![0, 2]
            }
        );
    }

    #[test]
    fn four_row_dependency() {
        let m = BitMatrix::new(4, vec![vec![0, 1], vec![2, 3], vec![0, 2], vec![1, 3]]).unwrap();
        let d = min_dependent_rows(&m, 4).unwrap().unwrap();
        assert_eq!(d.size, 4);
        assert!(xor_of(&m, &d.rows).is_zero());
        assert_eq!(min_dependent_rows(&m, 3).unwrap(), None);
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(BitMatrix::identity(5).rank(), 5);
        let m = BitMatrix::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(m.rank(), 2);
    }

    fn exhaustive_min_dependency(m: &BitMatrix, cap: usize) -> Option<usize> {
        let r = m.rows();
        (1..=cap)
            .find(|&k| itertools::Itertools::combinations(0..r, k).any(|c| xor_of(m, &c).is_zero()))
    }

    fn arb_matrix() -> impl Strategy<Value = BitMatrix> {
        (1usize..7, 1usize..9).prop_flat_map(|(cols, rows)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), cols), rows)
                .prop_map(move |d| {
                    let dense: Vec<Vec<u8>> = d
                        .iter()
                        .map(|r| r.iter().map(|&b| u8::from(b)).collect())
                        .collect();
                    BitMatrix::from_dense(&dense).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn matvec_is_linear(bits in proptest::collection::vec(any::<bool>(), 1..40), seed_a in any::<u64>(), seed_b in any::<u64>()) {
            let cols = 8;
            let dense: Vec<Vec<u8>> = bits.chunks(cols).filter(|c| c.len() == cols)
                .map(|c| c.iter().map(|&b| u8::from(b)).collect()).collect();
            prop_assume!(!dense.is_empty());
            let m = BitMatrix::from_dense(&dense).unwrap();
            let y = BitVec::from_u64(seed_a, cols);
            let y2 = BitVec::from_u64(seed_b, cols);
            let lhs = matvec_mod2(&m, &y.xor(&y2)).unwrap();
            let rhs = matvec_mod2(&m, &y).unwrap().xor(&matvec_mod2(&m, &y2).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn min_dependency_matches_exhaustive(m in arb_matrix()) {
            let found = min_dependent_rows(&m, 4).unwrap();
            prop_assert_eq!(found.as_ref().map(|d| d.size), exhaustive_min_dependency(&m, 4));
            if let Some(d) = found {
                prop_assert!(xor_of(&m, &d.rows).is_zero());
                let mut uniq = d.rows.clone();
                uniq.dedup();
                prop_assert_eq!(uniq.len(), d.size);
            }
        }

        #[test]
        fn transpose_is_involution(m in arb_matrix()) {
            prop_assert_eq!(m.transpose().transpose(), m);
        }
    }
}
