//! Matrices over the two-element field.
//!
//! [`SparseGF2Matrix`] is the working representation for the reduction: every
//! column is a sorted list of the row indices holding a 1, and a row-major
//! mirror is kept in sync so that both column and row additions stay cheap.
//! [`DenseGF2Matrix`] is a bit-packed matrix used by the oracle and by debug
//! checks (products, squares, ranks).
//!
//! All public indices are 1-based; 0 is the "no lowest entry" sentinel
//! returned by [`SparseGF2Matrix::low`].

use std::fmt;

use thiserror::Error;

/// Largest dimension accepted by [`SparseGF2Matrix::to_dense`] unless a caller
/// passes its own limit.
pub const DEFAULT_DENSE_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("column index {index} out of range 1..={len}")]
    ColumnOutOfRange { index: usize, len: usize },
    #[error("row index {index} out of range 1..={len}")]
    RowOutOfRange { index: usize, len: usize },
    #[error("cannot add {axis} {index} to itself")]
    SelfAddition { axis: &'static str, index: usize },
    #[error("dimension mismatch: {left_rows}x{left_cols} times {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("column {col} lists row {row} more than once")]
    DuplicateEntry { row: usize, col: usize },
    #[error("refusing dense copy of a {rows}x{cols} matrix (limit {limit})")]
    TooLarge { rows: usize, cols: usize, limit: usize },
}

/// Toggles `value` in a sorted vector. Returns `true` if it is now present.
fn toggle_sorted(v: &mut Vec<usize>, value: usize) -> bool {
    match v.binary_search(&value) {
        Ok(pos) => {
            v.remove(pos);
            false
        }
        Err(pos) => {
            v.insert(pos, value);
            true
        }
    }
}

/// Symmetric difference of two sorted, duplicate-free vectors.
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

/// Sparse GF(2) matrix with sorted columns and an incrementally maintained
/// row mirror.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseGF2Matrix {
    n_rows: usize,
    cols: Vec<Vec<usize>>,
    rows: Vec<Vec<usize>>,
}

impl SparseGF2Matrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            cols: vec![Vec::new(); n_cols],
            rows: vec![Vec::new(); n_rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            m.cols[k - 1].push(k);
            m.rows[k - 1].push(k);
        }
        m
    }

    /// Builds a matrix from column index lists (1-based row indices, any
    /// order). A row listed twice in one column is rejected.
    pub fn from_columns(n_rows: usize, columns: Vec<Vec<usize>>) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(n_rows, columns.len());
        for (c, mut col) in columns.into_iter().enumerate() {
            col.sort_unstable();
            for w in col.windows(2) {
                if w[0] == w[1] {
                    return Err(MatrixError::DuplicateEntry { row: w[0], col: c + 1 });
                }
            }
            for &r in &col {
                if r == 0 || r > n_rows {
                    return Err(MatrixError::RowOutOfRange { index: r, len: n_rows });
                }
                m.rows[r - 1].push(c + 1);
            }
            m.cols[c] = col;
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    fn check_col(&self, j: usize) -> Result<(), MatrixError> {
        if j == 0 || j > self.cols.len() {
            Err(MatrixError::ColumnOutOfRange { index: j, len: self.cols.len() })
        } else {
            Ok(())
        }
    }

    fn check_row(&self, i: usize) -> Result<(), MatrixError> {
        if i == 0 || i > self.n_rows {
            Err(MatrixError::RowOutOfRange { index: i, len: self.n_rows })
        } else {
            Ok(())
        }
    }

    /// Row indices of the 1s in column `j`, ascending.
    ///
    /// Panics if `j` is out of range.
    pub fn column(&self, j: usize) -> &[usize] {
        &self.cols[j - 1]
    }

    /// Column indices of the 1s in row `i`, ascending.
    ///
    /// Panics if `i` is out of range.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i - 1]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.cols.iter().map(Vec::as_slice)
    }

    /// Entry at (`i`, `j`); out-of-range positions read as 0.
    pub fn get(&self, i: usize, j: usize) -> bool {
        j >= 1 && j <= self.cols.len() && self.cols[j - 1].binary_search(&i).is_ok()
    }

    /// All nonzero entries as `(row, col)` pairs in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&r| (r, c + 1)))
    }

    /// Largest row index holding a 1 in column `j`, or 0 for a zero column.
    pub fn low(&self, j: usize) -> Result<usize, MatrixError> {
        self.check_col(j)?;
        Ok(self.low_unchecked(j))
    }

    #[inline]
    pub(crate) fn low_unchecked(&self, j: usize) -> usize {
        self.cols[j - 1].last().copied().unwrap_or(0)
    }

    /// Flips the entry at (`i`, `j`). Returns the new value.
    pub fn toggle(&mut self, i: usize, j: usize) -> Result<bool, MatrixError> {
        self.check_row(i)?;
        self.check_col(j)?;
        Ok(self.toggle_unchecked(i, j))
    }

    fn toggle_unchecked(&mut self, i: usize, j: usize) -> bool {
        toggle_sorted(&mut self.rows[i - 1], j);
        toggle_sorted(&mut self.cols[j - 1], i)
    }

    /// Adds column `src` to column `dst`.
    pub fn add_column(&mut self, src: usize, dst: usize) -> Result<(), MatrixError> {
        self.check_col(src)?;
        self.check_col(dst)?;
        if src == dst {
            return Err(MatrixError::SelfAddition { axis: "column", index: src });
        }
        self.add_column_unchecked(src, dst);
        Ok(())
    }

    pub(crate) fn add_column_unchecked(&mut self, src: usize, dst: usize) {
        let merged = xor_sorted(&self.cols[dst - 1], &self.cols[src - 1]);
        for &r in &self.cols[src - 1] {
            toggle_sorted(&mut self.rows[r - 1], dst);
        }
        self.cols[dst - 1] = merged;
    }

    /// Adds row `from` to row `to`.
    pub fn add_row(&mut self, from: usize, to: usize) -> Result<(), MatrixError> {
        self.check_row(from)?;
        self.check_row(to)?;
        if from == to {
            return Err(MatrixError::SelfAddition { axis: "row", index: from });
        }
        self.add_row_unchecked(from, to);
        Ok(())
    }

    pub(crate) fn add_row_unchecked(&mut self, from: usize, to: usize) {
        let merged = xor_sorted(&self.rows[to - 1], &self.rows[from - 1]);
        for &c in &self.rows[from - 1] {
            toggle_sorted(&mut self.cols[c - 1], to);
        }
        self.rows[to - 1] = merged;
    }

    /// Adds column `s` to column `j`, then row `j` to row `s`.
    ///
    /// For a square matrix `A` with result `A'` this is `A' = E A E` where
    /// `E` is the identity plus a single 1 at (`s`, `j`), i.e. `E A' = A E`.
    pub fn conjugate_by_addition(&mut self, s: usize, j: usize) -> Result<(), MatrixError> {
        if s == j {
            return Err(MatrixError::SelfAddition { axis: "column", index: s });
        }
        self.add_column(s, j)?;
        self.add_row(j, s)
    }

    /// The `rows` x `cols` submatrix, reindexed to `1..=rows.len()` and
    /// `1..=cols.len()` in the order given. Both index lists must be
    /// ascending.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseGF2Matrix {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        let mut new_row = vec![0usize; self.n_rows + 1];
        for (k, &r) in rows.iter().enumerate() {
            new_row[r] = k + 1;
        }
        let columns = cols
            .iter()
            .map(|&c| {
                self.cols[c - 1]
                    .iter()
                    .filter_map(|&r| (new_row[r] != 0).then_some(new_row[r]))
                    .collect()
            })
            .collect();
        SparseGF2Matrix::from_columns(rows.len(), columns).expect("restriction of a valid matrix")
    }

    /// Product `self * other`, computed column by column.
    pub fn multiply(&self, other: &SparseGF2Matrix) -> Result<SparseGF2Matrix, MatrixError> {
        if self.n_cols() != other.n_rows() {
            return Err(MatrixError::DimensionMismatch {
                left_rows: self.n_rows,
                left_cols: self.n_cols(),
                right_rows: other.n_rows,
                right_cols: other.n_cols(),
            });
        }
        let columns = other
            .cols
            .iter()
            .map(|col| {
                col.iter()
                    .fold(Vec::new(), |acc, &k| xor_sorted(&acc, &self.cols[k - 1]))
            })
            .collect();
        SparseGF2Matrix::from_columns(self.n_rows, columns)
    }

    /// GF(2) rank, by left-to-right column reduction on pivots.
    pub fn rank(&self) -> usize {
        let mut pivot_of_row: Vec<Option<Vec<usize>>> = vec![None; self.n_rows + 1];
        let mut rank = 0;
        for col in &self.cols {
            let mut c = col.clone();
            while let Some(&low) = c.last() {
                match &pivot_of_row[low] {
                    Some(p) => c = xor_sorted(&c, p),
                    None => {
                        pivot_of_row[low] = Some(c);
                        rank += 1;
                        break;
                    }
                }
            }
        }
        rank
    }

    pub fn to_dense(&self, limit: usize) -> Result<DenseGF2Matrix, MatrixError> {
        if self.n_rows > limit || self.n_cols() > limit {
            return Err(MatrixError::TooLarge { rows: self.n_rows, cols: self.n_cols(), limit });
        }
        let mut d = DenseGF2Matrix::zeros(self.n_rows, self.n_cols());
        for (r, c) in self.entries() {
            d.set(r, c, true);
        }
        Ok(d)
    }

    /// Checks the internal column/row mirror; used by tests.
    pub fn mirror_consistent(&self) -> bool {
        let mut rows = vec![Vec::new(); self.n_rows];
        for (r, c) in self.entries() {
            rows[r - 1].push(c);
        }
        rows == self.rows
            && self.cols.iter().all(|c| c.windows(2).all(|w| w[0] < w[1]))
    }
}

impl fmt::Debug for SparseGF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseGF2Matrix")
            .field("n_rows", &self.n_rows)
            .field("columns", &self.cols)
            .finish()
    }
}

const WORD: usize = 64;

/// Bit-packed dense GF(2) matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct DenseGF2Matrix {
    n_rows: usize,
    n_cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl DenseGF2Matrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        let words = n_cols.div_ceil(WORD);
        Self { n_rows, n_cols, words, bits: vec![0; n_rows * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            m.set(k, k, true);
        }
        m
    }

    /// Builds a matrix from 0/1 rows; used mostly by tests.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), n_cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i + 1, j + 1, v != 0);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Entry at 1-based (`i`, `j`).
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i >= 1 && i <= self.n_rows && j >= 1 && j <= self.n_cols);
        let (r, c) = (i - 1, j - 1);
        self.bits[r * self.words + c / WORD] >> (c % WORD) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i >= 1 && i <= self.n_rows && j >= 1 && j <= self.n_cols);
        let (r, c) = (i - 1, j - 1);
        let w = &mut self.bits[r * self.words + c / WORD];
        if value {
            *w |= 1 << (c % WORD);
        } else {
            *w &= !(1 << (c % WORD));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn multiply(&self, other: &DenseGF2Matrix) -> Result<DenseGF2Matrix, MatrixError> {
        if self.n_cols != other.n_rows {
            return Err(MatrixError::DimensionMismatch {
                left_rows: self.n_rows,
                left_cols: self.n_cols,
                right_rows: other.n_rows,
                right_cols: other.n_cols,
            });
        }
        let mut out = DenseGF2Matrix::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                if self.bits[i * self.words + k / WORD] >> (k % WORD) & 1 == 1 {
                    let src = other.row_words(k);
                    let dst = &mut out.bits[i * out.words..(i + 1) * out.words];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Entrywise sum (XOR).
    pub fn add(&self, other: &DenseGF2Matrix) -> Result<DenseGF2Matrix, MatrixError> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(MatrixError::DimensionMismatch {
                left_rows: self.n_rows,
                left_cols: self.n_cols,
                right_rows: other.n_rows,
                right_cols: other.n_cols,
            });
        }
        let mut out = self.clone();
        for (d, s) in out.bits.iter_mut().zip(&other.bits) {
            *d ^= s;
        }
        Ok(out)
    }

    /// GF(2) rank by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.n_cols {
            let (w, bit) = (c / WORD, 1u64 << (c % WORD));
            let Some(pivot) = (rank..m.n_rows).find(|&r| m.bits[r * m.words + w] & bit != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..m.words {
                    m.bits.swap(pivot * m.words + k, rank * m.words + k);
                }
            }
            for r in 0..m.n_rows {
                if r != rank && m.bits[r * m.words + w] & bit != 0 {
                    for k in 0..m.words {
                        let v = m.bits[rank * m.words + k];
                        m.bits[r * m.words + k] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn to_sparse(&self) -> SparseGF2Matrix {
        let columns = (1..=self.n_cols)
            .map(|j| (1..=self.n_rows).filter(|&i| self.get(i, j)).collect())
            .collect();
        SparseGF2Matrix::from_columns(self.n_rows, columns).expect("dense entries are unique")
    }
}

impl fmt::Debug for DenseGF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseGF2Matrix {}x{}", self.n_rows, self.n_cols)?;
        for i in 1..=self.n_rows {
            let line: String = (1..=self.n_cols)
                .map(|j| if self.get(i, j) { '1' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
