//! Separable d-dimensional FFT on row-major `N^d` arrays.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct NdFft {
    dim: usize,
    side: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl NdFft {
    pub fn new(dim: usize, side: usize) -> Self {
        let mut planner = FftPlanner::new();
        NdFft {
            dim,
            side,
            forward: planner.plan_fft_forward(side),
            inverse: planner.plan_fft_inverse(side),
        }
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.side;
        assert_eq!(data.len(), n.pow(self.dim as u32));
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            let block = stride * n;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
    }

    /// `f̂(a) = Σ_x f(x) e^{−2πi x·a/N}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse of [`NdFft::forward`], normalized.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64Star;
    use std::f64::consts::PI;

    #[test]
    fn matches_naive_dft_2d() {
        let n = 6;
        let mut rng = XorShift64Star::new(2);
        let x: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.normal(), rng.normal()))
            .collect();
        let mut y = x.clone();
        NdFft::new(2, n).forward(&mut y);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let ph = -2.0 * PI * ((i * a + j * b) as f64) / n as f64;
                        acc += x[i * n + j] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - y[a * n + b]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = XorShift64Star::new(4);
        for (d, n) in [(1usize, 17usize), (2, 12), (3, 8)] {
            let x: Vec<Complex64> = (0..n.pow(d as u32))
                .map(|_| Complex64::new(rng.normal(), 0.0))
                .collect();
            let plan = NdFft::new(d, n);
            let mut y = x.clone();
            plan.forward(&mut y);
            let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
            assert!((ex - ey).abs() <= 1e-10 * ex);
            plan.inverse(&mut y);
            let err: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-10 * ex.sqrt());
        }
    }
}
