//! Minimal column-major matrix used by the batched network engine.
//!
//! Columns are contiguous, which is what the per-point activation loops want
//! (a column holds one jet component of one batch point across all neurons),
//! and the buffers view directly into `faer` for the GEMMs.

use std::cell::RefCell;

use faer::mat::{MatMut, MatRef};

// Buffers are recycled through a thread-local pool: the batched passes turn
// over ~100 MB of scratch per training iteration, and on this crate's target
// environments first-touch page faults on fresh allocations dwarf the GEMMs
// themselves. Pooled buffers are re-zeroed on checkout, so contents never
// leak between uses.
thread_local! {
    static POOL: RefCell<Vec<Vec<f64>>> = const { RefCell::new(Vec::new()) };
}

const POOL_LIMIT: usize = 64;

#[derive(Debug)]
pub(crate) struct ColMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let len = rows * cols;
        let mut data = POOL.with(|pool| {
            let mut pool = pool.borrow_mut();
            match pool.iter().rposition(|v| v.capacity() >= len) {
                Some(pos) => pool.swap_remove(pos),
                None => Vec::with_capacity(len),
            }
        });
        data.clear();
        data.resize(len, 0.0);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Two distinct mutable columns at once.
    #[inline]
    pub fn cols_mut2(&mut self, j0: usize, j1: usize) -> (&mut [f64], &mut [f64]) {
        assert!(j0 < j1);
        let (a, b) = self.data.split_at_mut(j1 * self.rows);
        (
            &mut a[j0 * self.rows..(j0 + 1) * self.rows],
            &mut b[..self.rows],
        )
    }

    pub fn as_ref(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.rows, self.cols)
    }

    pub fn as_mut(&mut self) -> MatMut<'_, f64> {
        MatMut::from_column_major_slice_mut(&mut self.data, self.rows, self.cols)
    }
}

impl Drop for ColMat {
    fn drop(&mut self) {
        let data = std::mem::take(&mut self.data);
        if data.capacity() > 0 {
            POOL.with(|pool| {
                let mut pool = pool.borrow_mut();
                if pool.len() < POOL_LIMIT {
                    pool.push(data);
                }
            });
        }
    }
}
