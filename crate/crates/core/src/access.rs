//! Entry-level access to implicit matrices, with a distinct-cell counter that
//! certifies how much of the input an algorithm actually read.

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{CurError, Result};
use crate::linalg::DenseMatrix;

/// Read access to the entries of an `m x n` matrix.
pub trait Entries {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn get(&self, i: usize, j: usize) -> f64;
    /// Distinct cells read so far (shared with the underlying oracle for views).
    fn access_count(&self) -> usize;

    fn fetch(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), cols.len(), |a, b| self.get(rows[a], cols[b]))
    }

    fn fetch_rows(&self, rows: &[usize]) -> DenseMatrix {
        let n = self.cols();
        DenseMatrix::from_fn(rows.len(), n, |a, j| self.get(rows[a], j))
    }

    fn fetch_cols(&self, cols: &[usize]) -> DenseMatrix {
        let m = self.rows();
        DenseMatrix::from_fn(m, cols.len(), |i, b| self.get(i, cols[b]))
    }
}

type Source = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;

/// Entry accessor over an implicit matrix.
///
/// Every [`Entries::get`] records the cell; repeated reads of a cell do not
/// grow the count. [`EntryOracle::peek`] bypasses the counter and exists only
/// for verification code that is allowed to be superlinear.
pub struct EntryOracle {
    rows: usize,
    cols: usize,
    source: Source,
    accessed: Mutex<HashSet<u64>>,
}

impl EntryOracle {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        f: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        EntryOracle {
            rows,
            cols,
            source: Arc::new(f),
            accessed: Mutex::new(HashSet::new()),
        }
    }

    pub fn from_matrix(m: DenseMatrix) -> Self {
        let (rows, cols) = m.shape();
        let m = Arc::new(m);
        Self::from_fn(rows, cols, move |i, j| m[(i, j)])
    }

    /// Same matrix, fresh counter.
    pub fn fresh(&self) -> Self {
        EntryOracle {
            rows: self.rows,
            cols: self.cols,
            source: Arc::clone(&self.source),
            accessed: Mutex::new(HashSet::new()),
        }
    }

    /// Uncounted read, for verifiers only.
    pub fn peek(&self, i: usize, j: usize) -> f64 {
        (self.source)(i, j)
    }

    /// Full uncounted materialization, for verifiers only.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.peek(i, j))
    }

    pub fn was_accessed(&self, i: usize, j: usize) -> bool {
        self.accessed.lock().expect("counter poisoned").contains(&self.key(i, j))
    }

    /// Accessed cells in row-major order.
    pub fn accessed_cells(&self) -> Vec<(usize, usize)> {
        let set = self.accessed.lock().expect("counter poisoned");
        let mut keys: Vec<u64> = set.iter().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|k| ((k / self.cols as u64) as usize, (k % self.cols as u64) as usize))
            .collect()
    }

    pub fn reset_count(&self) {
        self.accessed.lock().expect("counter poisoned").clear();
    }

    fn key(&self, i: usize, j: usize) -> u64 {
        i as u64 * self.cols as u64 + j as u64
    }
}

impl Entries for EntryOracle {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "entry ({i}, {j}) out of range");
        self.accessed
            .lock()
            .expect("counter poisoned")
            .insert(self.key(i, j));
        (self.source)(i, j)
    }

    fn access_count(&self) -> usize {
        self.accessed.lock().expect("counter poisoned").len()
    }
}

impl fmt::Debug for EntryOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntryOracle")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("access_count", &self.access_count())
            .finish()
    }
}

/// Contiguous block of a parent oracle; reads are counted on the parent.
#[derive(Clone, Copy)]
pub struct BlockView<'a> {
    parent: &'a EntryOracle,
    row0: usize,
    col0: usize,
    rows: usize,
    cols: usize,
}

impl<'a> BlockView<'a> {
    pub fn new(parent: &'a EntryOracle, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        assert!(row0 + rows <= parent.rows && col0 + cols <= parent.cols);
        BlockView {
            parent,
            row0,
            col0,
            rows,
            cols,
        }
    }

    pub fn offset(&self) -> (usize, usize) {
        (self.row0, self.col0)
    }

    pub fn parent(&self) -> &'a EntryOracle {
        self.parent
    }

    pub fn peek(&self, i: usize, j: usize) -> f64 {
        self.parent.peek(self.row0 + i, self.col0 + j)
    }

    pub fn was_accessed(&self, i: usize, j: usize) -> bool {
        self.parent.was_accessed(self.row0 + i, self.col0 + j)
    }
}

impl Entries for BlockView<'_> {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols);
        self.parent.get(self.row0 + i, self.col0 + j)
    }

    fn access_count(&self) -> usize {
        self.parent.access_count()
    }
}

/// Strictly ascending, duplicate-free list of row or column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Sorts the input; duplicates are an error.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(CurError::InvalidArgument(format!("duplicate index {}", w[0])));
        }
        Ok(IndexSet(indices))
    }

    pub fn range(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0.binary_search(&idx).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `self - {out} + {inn}`.
    pub fn swap(&self, out: usize, inn: usize) -> Result<Self> {
        if !self.contains(out) {
            return Err(CurError::InvalidArgument(format!("{out} not in set")));
        }
        if self.contains(inn) {
            return Err(CurError::InvalidArgument(format!("{inn} already in set")));
        }
        let mut v: Vec<usize> = self.0.iter().copied().filter(|&i| i != out).collect();
        v.push(inn);
        v.sort_unstable();
        Ok(IndexSet(v))
    }

    /// Indices of `[0, n)` not in the set, ascending.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }

    pub fn check_bound(&self, n: usize) -> Result<()> {
        match self.max() {
            Some(m) if m >= n => Err(CurError::InvalidArgument(format!("index {m} >= {n}"))),
            _ => Ok(()),
        }
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
