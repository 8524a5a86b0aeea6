//! `rustfft` backend for [`SpectralTransform`], with lines transformed in parallel.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use rotns_core::{FrequencyGrid, SpectralTransform};
use rustfft::{Fft, FftPlanner};

/// Plans are cached per `(n, direction)`.
#[derive(Default)]
pub struct RustFft {
    plans: Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>,
}

impl std::fmt::Debug for RustFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("RustFft")
    }
}

impl RustFft {
    pub fn new() -> Self {
        Self::default()
    }

    fn plan(&self, n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        let mut plans = self.plans.lock().expect("plan cache poisoned");
        plans
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    }
}

impl SpectralTransform for RustFft {
    fn dft3(&self, grid: &FrequencyGrid, data: &mut [Complex64], inverse: bool) {
        let n = grid.n();
        let plan = self.plan(n, inverse);
        let run = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(n * n).for_each(|block| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(block, &mut scratch);
            });
        };
        // last axis is contiguous
        run(data);
        // middle and first axes: rotate so the axis becomes contiguous, transform, rotate back
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        for _ in 0..2 {
            rotate_axes(data, &mut tmp, n);
            run(&mut tmp);
            data.copy_from_slice(&tmp);
        }
        // two rotations leave the layout as (i2, i0, i1); one more restores (i0, i1, i2)
        rotate_axes(data, &mut tmp, n);
        data.copy_from_slice(&tmp);
    }
}

/// `dst[(c, a, b)] = src[(a, b, c)]`.
fn rotate_axes(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    dst.par_chunks_mut(n * n).enumerate().for_each(|(c, plane)| {
        for a in 0..n {
            for b in 0..n {
                plane[a * n + b] = src[(a * n + b) * n + c];
            }
        }
    });
}
