//! n-dimensional complex FFT on cubic periodic grids.
//!
//! Data is row-major with axis 0 slowest. The forward transform is
//! unnormalized; the inverse carries the 1/Nⁿ factor, so
//! `inverse(forward(x)) == x` up to rounding.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Number of strided columns gathered into one contiguous batch.
const COLUMN_BATCH: usize = 32;

#[derive(Clone)]
pub struct FftPlan {
    dims: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan").field("dims", &self.dims).field("len", &self.len).finish()
    }
}

impl FftPlan {
    pub fn new(dims: usize, len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { dims, len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    pub fn total_len(&self) -> usize {
        self.len.pow(self.dims as u32)
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.total_len() as f64;
        data.par_chunks_mut(1 << 14).for_each(|chunk| {
            for v in chunk {
                *v *= scale;
            }
        });
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.total_len(), "buffer does not match the FFT plan");
        for axis in 0..self.dims {
            let stride = self.len.pow((self.dims - 1 - axis) as u32);
            if stride == 1 {
                self.contiguous_lines(data, fft);
            } else {
                self.strided_lines(data, fft, stride);
            }
        }
    }

    fn contiguous_lines(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let lines_per_task = (4096 / self.len).max(1);
        data.par_chunks_mut(self.len * lines_per_task).for_each_init(
            || vec![Complex64::default(); fft.get_inplace_scratch_len()],
            |scratch, chunk| fft.process_with_scratch(chunk, scratch),
        );
    }

    fn strided_lines(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>, stride: usize) {
        let n = self.len;
        let block = n * stride;
        let run = |block_data: &mut [Complex64]| {
            let mut buf = vec![Complex64::default(); n * COLUMN_BATCH];
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            let mut j0 = 0;
            while j0 < stride {
                let width = COLUMN_BATCH.min(stride - j0);
                for i in 0..n {
                    let row = &block_data[i * stride + j0..i * stride + j0 + width];
                    for (c, &v) in row.iter().enumerate() {
                        buf[c * n + i] = v;
                    }
                }
                fft.process_with_scratch(&mut buf[..width * n], &mut scratch);
                for i in 0..n {
                    let row = &mut block_data[i * stride + j0..i * stride + j0 + width];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = buf[c * n + i];
                    }
                }
                j0 += width;
            }
        };
        if data.len() > block {
            data.par_chunks_mut(block).for_each(run);
        } else {
            run(data);
        }
    }
}
