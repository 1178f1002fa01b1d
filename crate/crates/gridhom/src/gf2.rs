//! Bit-packed linear algebra over GF(2).
//!
//! Boundary operators, Betti numbers and cycle filling all reduce to dense
//! GF(2) elimination at desk scale, so this module sticks to plain Gaussian
//! elimination over 64-bit words. Everything is deterministic: `solve` sets
//! free variables to zero, `kernel_basis` walks free columns in order.

use std::fmt;

/// A vector over GF(2), packed 64 bits per word. Addition is XOR.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vector {
    words: Vec<u64>,
    len: usize,
}

impl Gf2Vector {
    pub fn zeros(len: usize) -> Self {
        Gf2Vector {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Builds a vector from an iterator of bits.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        if value {
            self.words[i / 64] |= 1u64 << (i % 64);
        } else {
            self.words[i / 64] &= !(1u64 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// XOR-assigns `other` into `self`. Lengths must match.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor_assign: length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    /// Concatenates two vectors.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Renders as a bitstring such as `"0110"`.
    pub fn to_bitstring(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    /// Parses a bitstring of `0`/`1` characters.
    pub fn from_bitstring(s: &str) -> Result<Self, crate::Error> {
        let mut v = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => {
                    return Err(crate::Error::InvalidInput(format!(
                        "bitstring may only contain 0 and 1, found {c:?}"
                    )))
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vector({})", self.to_bitstring())
    }
}

/// A dense matrix over GF(2), stored row-major with bit-packed rows.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        Gf2Matrix {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows given as bit slices.
    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &bit) in row.iter().enumerate() {
                if bit {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.data[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let idx = r * self.words_per_row + c / 64;
        if value {
            self.data[idx] |= 1u64 << (c % 64);
        } else {
            self.data[idx] &= !(1u64 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> Gf2Vector {
        let mut v = Gf2Vector::zeros(self.cols);
        let start = r * self.words_per_row;
        let n = v.words.len().min(self.words_per_row);
        v.words[..n].copy_from_slice(&self.data[start..start + n]);
        v
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Matrix-vector product over GF(2). `v.len()` must equal `cols`.
    pub fn mul_vector(&self, v: &Gf2Vector) -> Gf2Vector {
        assert_eq!(v.len(), self.cols, "mul_vector: dimension mismatch");
        let mut out = Gf2Vector::zeros(self.rows);
        for r in 0..self.rows {
            let start = r * self.words_per_row;
            let mut acc = 0u64;
            for (w, rv) in self.data[start..start + self.words_per_row]
                .iter()
                .zip(&v.words)
            {
                acc ^= w & rv;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    fn xor_row_into(&mut self, dst: usize, src: usize) {
        let (d, s) = (dst * self.words_per_row, src * self.words_per_row);
        for k in 0..self.words_per_row {
            let v = self.data[s + k];
            self.data[d + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words_per_row {
            self.data.swap(a * self.words_per_row + k, b * self.words_per_row + k);
        }
    }

    /// Row-space dimension over GF(2).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let pivot = (rank..m.rows).find(|&r| m.get(r, col));
            if let Some(p) = pivot {
                m.swap_rows(rank, p);
                for r in 0..m.rows {
                    if r != rank && m.get(r, col) {
                        m.xor_row_into(r, rank);
                    }
                }
                rank += 1;
                if rank == m.rows {
                    break;
                }
            }
        }
        rank
    }

    /// Solves `M x = b`, returning one solution if any exists.
    ///
    /// Free variables are set to zero after forward elimination, so the
    /// returned solution is deterministic. Panics if `b.len() != rows`.
    pub fn solve(&self, b: &Gf2Vector) -> Option<Gf2Vector> {
        assert_eq!(b.len(), self.rows, "solve: rhs length must equal row count");
        let mut m = self.clone();
        let mut rhs = b.clone();
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut rank = 0;
        for col in 0..m.cols {
            let pivot = (rank..m.rows).find(|&r| m.get(r, col));
            if let Some(p) = pivot {
                m.swap_rows(rank, p);
                let (br, bp) = (rhs.get(rank), rhs.get(p));
                rhs.set(rank, bp);
                rhs.set(p, br);
                for r in 0..m.rows {
                    if r != rank && m.get(r, col) {
                        m.xor_row_into(r, rank);
                        let v = rhs.get(rank) ^ rhs.get(r);
                        rhs.set(r, v);
                    }
                }
                pivot_cols.push(col);
                rank += 1;
                if rank == m.rows {
                    break;
                }
            }
        }
        // Inconsistent system: a zero row with nonzero rhs.
        for r in rank..m.rows {
            if rhs.get(r) {
                return None;
            }
        }
        let mut x = Gf2Vector::zeros(self.cols);
        for (r, &col) in pivot_cols.iter().enumerate() {
            if rhs.get(r) {
                x.set(col, true);
            }
        }
        debug_assert_eq!(&self.mul_vector(&x), b);
        Some(x)
    }

    /// A basis of the null space `{x : M x = 0}`.
    ///
    /// The basis has exactly `cols - rank` vectors, produced by setting each
    /// free column to one in ascending order.
    pub fn kernel_basis(&self) -> Vec<Gf2Vector> {
        let mut m = self.clone();
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut rank = 0;
        for col in 0..m.cols {
            let pivot = (rank..m.rows).find(|&r| m.get(r, col));
            if let Some(p) = pivot {
                m.swap_rows(rank, p);
                for r in 0..m.rows {
                    if r != rank && m.get(r, col) {
                        m.xor_row_into(r, rank);
                    }
                }
                pivot_cols.push(col);
                rank += 1;
            }
        }
        let mut basis = Vec::with_capacity(self.cols - rank);
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = Gf2Vector::zeros(self.cols);
            v.set(free, true);
            // In reduced echelon form, pivot row r reads x[pivot_cols[r]] = sum
            // of the free entries of that row.
            for (r, &pc) in pivot_cols.iter().enumerate() {
                if m.get(r, free) {
                    v.set(pc, true);
                }
            }
            debug_assert!(self.mul_vector(&v).is_zero());
            basis.push(v);
        }
        basis
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r).to_bitstring())?;
        }
        Ok(())
    }
}
