//! Circle-method side: Farey arcs at level `2^k`, Gauss sums, the pointwise
//! multiplier bound on an arc and the stratified arc-integral estimate.

pub mod arc_theta;
pub mod farey;
pub mod gauss;
pub mod stbound;

use std::f64::consts::PI;

use serde::Serialize;

use crate::spectral::theta::epsilon_of_scale;
use crate::spectral::TorusPoint;
use crate::{Error, Result};

pub use arc_theta::{ArcFactor, ArcTheta, ArcThetaFactory};
pub use farey::{arc_of, farey_arcs, locate, nearest_fraction, ArcBoundary, FareyArc, Located};
pub use gauss::{gauss_sum, gauss_sum_closed, gauss_sum_compensated, GaussSumTable};
pub use stbound::{paper_bound, stbound_ratio, SamplingPlan, StBoundReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsBound {
    pub refined: f64,
    pub crude: f64,
}

/// `Σ_ℓ exp(−(π/2)(x − ℓ/q)²/w)` for `x = num/den`, with the dropped tail below `1e−12` of the sum.
pub fn gaussian_mass(num: i128, den: i128, q: u64, w: f64) -> f64 {
    let q = q as i128;
    let decay = PI / (2.0 * w);
    let x = num.rem_euclid(den);
    // nearest ℓ to x·q
    let l0 = (2 * x * q + den).div_euclid(2 * den);
    let dist = |l: i128| (x * q - l * den) as f64 / (den * q) as f64;
    let step = 1.0 / q as f64;
    let mut sum = (-decay * dist(l0).powi(2)).exp();
    for dir in [1i128, -1] {
        let mut i = 1;
        loop {
            let d = dist(l0 + dir * i).abs();
            let g = (-decay * d * d).exp();
            sum += g;
            let next = d + step;
            let tail = (-decay * next * next).exp()
                / (1.0 - (-2.0 * decay * next * step).exp()).max(f64::MIN_POSITIVE);
            if tail <= 1e-12 * sum || i > 1 << 24 {
                break;
            }
            i += 1;
        }
    }
    sum
}

/// Refined and crude right-hand sides of the pointwise bound for `ŝ_t` at `t = a/q + τ`.
pub fn st_rhs_bound(a: u64, q: u64, tau: f64, k: u32, alpha: &TorusPoint) -> Result<RhsBound> {
    if q == 0 || a == 0 || a > q {
        return Err(Error::param(format!("{a}/{q} is not a Farey fraction")));
    }
    let n = (k as f64).exp2();
    if tau.abs() * q as f64 * n > 1.0 + 1e-12 {
        return Err(Error::param(format!(
            "|tau| = {tau:e} exceeds 1/(q 2^k) for q={q}, k={k}"
        )));
    }
    let eps = epsilon_of_scale(k);
    let d = alpha.dim() as f64;
    let crude = (q as f64).powf(-d / 2.0) * (eps + tau.abs()).powf(-d / 2.0);
    let w = eps + tau * tau / eps;
    let mut refined = crude;
    for c in alpha.coords() {
        refined *= gaussian_mass(*c.numer(), *c.denom(), q, w);
    }
    Ok(RhsBound { refined, crude })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_examples() {
        let z = TorusPoint::zero(5);
        let b = st_rhs_bound(1, 1, 0.0, 2, &z).unwrap();
        assert!((b.crude - 1024.0).abs() < 1e-9);
        assert!(b.refined >= b.crude);

        // α on the 1/q grid, τ = 0
        let q = 3u64;
        let alpha = TorusPoint::new(&[(1, 3), (2, 3), (0, 1), (1, 3), (0, 1)]).unwrap();
        let b = st_rhs_bound(1, q, 0.0, 6, &alpha).unwrap();
        let eps = epsilon_of_scale(6);
        let expect = (q as f64 * eps).powf(-2.5);
        assert!(b.refined >= expect && b.refined <= expect * (1.0 + 1e-9));
    }

    #[test]
    fn gaussian_factor_is_nearly_one_when_peaks_are_sharp() {
        for k in 4..10u32 {
            let eps = epsilon_of_scale(k);
            for q in 1..=(1u64 << (k / 2)) {
                let n = (k as f64).exp2();
                for tau in [0.0, 0.3 / (q as f64 * n), -1.0 / (q as f64 * n)] {
                    let w = eps + tau * tau / eps;
                    if (q * q) as f64 * w > 1e-2 {
                        continue;
                    }
                    let alpha = TorusPoint::new(&[(1, q as i128); 5]).unwrap();
                    let b = st_rhs_bound(1, q, tau, k, &alpha).unwrap();
                    assert!(b.refined <= b.crude * (1.0 + 1e-6));
                }
            }
        }
    }

    #[test]
    fn rhs_rejects_off_arc_tau() {
        assert!(st_rhs_bound(1, 2, 0.2, 4, &TorusPoint::zero(2)).is_err());
    }
}
