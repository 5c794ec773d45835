//! Parameter matrix shared by training workers without locks.
//!
//! Workers read and write rows with relaxed atomic operations. Concurrent
//! updates to the same row may interleave and lose increments; only the
//! single-worker schedule is deterministic.

use std::sync::atomic::{AtomicU32, Ordering};

pub struct SharedMatrix {
    data: Vec<AtomicU32>,
    cols: usize,
}

impl SharedMatrix {
    pub fn from_vec(values: Vec<f32>, cols: usize) -> Self {
        assert!(cols > 0 && values.len() % cols == 0);
        SharedMatrix {
            data: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
            cols,
        }
    }

    #[inline]
    pub fn load_row(&self, row: usize, buf: &mut [f32]) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (b, cell) in buf.iter_mut().zip(cells) {
            *b = f32::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    #[inline]
    pub fn store_row(&self, row: usize, buf: &[f32]) {
        let cells = &self.data[row * self.cols..(row + 1) * self.cols];
        for (&b, cell) in buf.iter().zip(cells) {
            cell.store(b.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| f32::from_bits(c.load(Ordering::Relaxed)).is_finite())
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
            .into_iter()
            .map(|c| f32::from_bits(c.into_inner()))
            .collect()
    }
}
