//! Thin wrappers over rustfft with a per-thread plan cache.
//!
//! All transforms are unnormalized: the forward direction computes
//! `X_k = sum_n x_n exp(-2*pi*i*k*n/N)` and the inverse direction the same sum
//! with the opposite exponent sign and no `1/N` factor.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((len, forward))
            .or_insert_with(|| {
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// In-place unnormalized DFT of a single line.
pub fn dft_line(buf: &mut [Complex64], forward: bool) {
    plan(buf.len(), forward).process(buf);
}

/// In-place unnormalized separable 2D DFT of a row-major `rows x cols` grid.
pub fn dft_grid(grid: &mut [Complex64], rows: usize, cols: usize, forward: bool) {
    assert_eq!(grid.len(), rows * cols);
    for r in 0..rows {
        dft_line(&mut grid[r * cols..(r + 1) * cols], forward);
    }
    let col_plan = plan(rows, forward);
    let mut col = vec![Complex64::default(); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = grid[r * cols + c];
        }
        col_plan.process(&mut col);
        for r in 0..rows {
            grid[r * cols + c] = col[r];
        }
    }
}
