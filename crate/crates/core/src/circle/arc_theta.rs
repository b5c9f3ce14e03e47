//! Theta factors on a Farey arc through the dual (Poisson-summed) series
//!
//! `θ(β) = q^{-1} A^{-1/2} Σ_ℓ S(a,ℓ;q) exp(−π(β + ℓ/q)²/A)`,  `A = 2ε − 2iτ`,
//!
//! at `t = a/q + τ`. Its term count stays bounded on the arc, so scales where
//! the direct sum would need billions of terms remain cheap. The same `ℓ`
//! sweep yields the Gaussian mass `Σ_ℓ exp(−(π/2)(β + ℓ/q)²/(ε + τ²/ε))`
//! that enters the pointwise multiplier bound.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gauss::GaussSumTable;
use crate::{Error, Result};

/// Denominators up to this size get a full table of `S(a,·;q)`.
const TABLE_LIMIT: u64 = 1 << 12;
/// Hard cap on dual terms per evaluation.
const MAX_TERMS: i64 = 1 << 20;

/// One evaluation of the dual series at a point `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcFactor {
    pub value: Complex64,
    /// `Σ_ℓ exp(−πR(β + ℓ/q)²)` with `R = Re(1/A)`.
    pub mass: f64,
    /// Nearest-`ℓ` term of `mass`.
    pub principal: f64,
}

impl ArcFactor {
    pub fn nonprincipal(&self) -> f64 {
        (self.mass - self.principal).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ArcTheta {
    pub a: u64,
    pub q: u64,
    pub tau: f64,
    pub epsilon: f64,
    gauss: GaussSumTable,
    table: Option<Vec<Complex64>>,
    inv_a: Complex64,
    prefactor: Complex64,
    decay: f64,
    target: f64,
}

impl ArcTheta {
    /// `rel_target` bounds the dropped dual tail relative to `|q^{-1}A^{-1/2}|·max|S|`.
    pub fn new(a: u64, q: u64, tau: f64, epsilon: f64, rel_target: f64) -> Result<Self> {
        Self::with_table(GaussSumTable::new(a, q)?, None, tau, epsilon, rel_target)
    }

    /// Reuses a precomputed Gauss table; `table` may hold `S(a,b;q)` for `0 ≤ b < q`.
    fn with_table(
        gauss: GaussSumTable,
        table: Option<Vec<Complex64>>,
        tau: f64,
        epsilon: f64,
        rel_target: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) || !(rel_target > 0.0) {
            return Err(Error::param(
                "arc theta needs epsilon > 0 and a positive target",
            ));
        }
        let a_par = Complex64::new(2.0 * epsilon, -2.0 * tau);
        let inv_a = a_par.inv();
        let q = gauss.q;
        let prefactor = a_par.sqrt().inv() / q as f64;
        let decay = inv_a.re;
        let target = rel_target * prefactor.norm() * gauss.magnitude_bound();
        Ok(ArcTheta {
            a: gauss.a,
            q,
            tau,
            epsilon,
            gauss,
            table,
            inv_a,
            prefactor,
            decay,
            target,
        })
    }

    /// `(ε + τ²/ε)`, the squared width scale of each peak up to `2/π`.
    pub fn width_sq(&self) -> f64 {
        self.epsilon + self.tau * self.tau / self.epsilon
    }

    /// `|q^{-1}A^{-1/2}|`.
    pub fn prefactor_norm(&self) -> f64 {
        self.prefactor.norm()
    }

    fn s(&self, l: i128) -> Complex64 {
        match &self.table {
            Some(t) => t[l.rem_euclid(self.q as i128) as usize],
            None => self.gauss.eval(l),
        }
    }

    /// Evaluates at `β = num/den`; `w = β + ℓ/q` is formed exactly before rounding.
    pub fn eval_exact(&self, num: i128, den: i128) -> ArcFactor {
        let q = self.q as i128;
        let scale = den * q;
        // ℓ₀ = nearest integer to −βq.
        let l0 = {
            let x = -num * q;
            let fl = x.div_euclid(den);
            if 2 * (x - fl * den) >= den {
                fl + 1
            } else {
                fl
            }
        };
        let w_of = |l: i128| (num * q + l * den) as f64 / scale as f64;
        let mag = self.gauss.magnitude_bound();
        let pref_norm = self.prefactor.norm();
        let mut value = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        let term = |l: i128, value: &mut Complex64, mass: &mut f64| -> f64 {
            let w = w_of(l);
            let w2 = w * w;
            let g = (-PI * self.decay * w2).exp();
            *mass += g;
            if g > 0.0 {
                let s = self.s(l);
                if s.norm_sqr() > 0.0 {
                    let phase = -PI * w2 * self.inv_a.im;
                    *value += s * Complex64::from_polar(g, phase);
                }
            }
            g
        };
        let principal = term(l0, &mut value, &mut mass);
        let step = 1.0 / self.q as f64;
        for dir in [1i128, -1] {
            let mut i = 1i128;
            loop {
                let l = l0 + dir * i;
                term(l, &mut value, &mut mass);
                let w = w_of(l).abs() + step;
                let lead = (-PI * self.decay * w * w).exp();
                let ratio = (-2.0 * PI * self.decay * w * step).exp();
                let tail = lead / (1.0 - ratio).max(f64::MIN_POSITIVE);
                // Dropped terms must be negligible both absolutely and against the mass.
                let done = tail * mag * pref_norm <= 0.5 * self.target && tail <= 1e-15 * mass;
                if done || i >= MAX_TERMS as i128 {
                    break;
                }
                i += 1;
            }
        }
        ArcFactor {
            value: value * self.prefactor,
            mass,
            principal,
        }
    }

    pub fn eval(&self, beta: f64) -> ArcFactor {
        let den = 1i128 << 52;
        self.eval_exact((beta.rem_euclid(1.0) * den as f64).round() as i128, den)
    }
}

/// Builds [`ArcTheta`] evaluators for many `τ` on one arc, sharing the Gauss data.
#[derive(Debug, Clone)]
pub struct ArcThetaFactory {
    gauss: GaussSumTable,
    table: Option<Vec<Complex64>>,
    epsilon: f64,
    rel_target: f64,
}

impl ArcThetaFactory {
    pub fn new(a: u64, q: u64, epsilon: f64, rel_target: f64) -> Result<Self> {
        let gauss = GaussSumTable::new(a, q)?;
        let table = (q <= TABLE_LIMIT).then(|| (0..q as i128).map(|b| gauss.eval(b)).collect());
        Ok(ArcThetaFactory {
            gauss,
            table,
            epsilon,
            rel_target,
        })
    }

    pub fn at(&self, tau: f64) -> Result<ArcTheta> {
        ArcTheta::with_table(
            self.gauss.clone(),
            self.table.clone(),
            tau,
            self.epsilon,
            self.rel_target,
        )
    }

    pub fn gauss(&self) -> &GaussSumTable {
        &self.gauss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64Star;
    use crate::spectral::theta::{epsilon_of_scale, theta_1d_arc, truncation_for};

    #[test]
    fn dual_matches_direct_sum() {
        let mut rng = XorShift64Star::new(31);
        for _ in 0..300 {
            let k = 2 + rng.below(9) as u32;
            let n = 1u64 << k;
            let q = 1 + rng.below(n);
            let a = loop {
                let a = 1 + rng.below(q);
                if crate::numtheory::gcd(a, q) == 1 {
                    break a;
                }
            };
            let eps = epsilon_of_scale(k);
            let tau = (2.0 * rng.next_f64() - 1.0) / (q as f64 * n as f64);
            let beta = rng.next_f64();
            let m = truncation_for(eps, 1e-13, 1 << 24).unwrap();
            let direct = theta_1d_arc(a, q, tau, eps, beta, m);
            let dual = ArcTheta::new(a, q, tau, eps, 1e-13).unwrap().eval(beta);
            let scale = dual.value.norm().max(1.0);
            assert!(
                (direct - dual.value).norm() <= 1e-8 * scale,
                "k={k} a={a} q={q} tau={tau} beta={beta}: {direct} vs {}",
                dual.value
            );
        }
    }

    #[test]
    fn pointwise_bound_slack_is_small() {
        let mut rng = XorShift64Star::new(5);
        let mut worst = 0.0f64;
        for _ in 0..2000 {
            let k = 3 + rng.below(20) as u32;
            let n = 1u64 << k;
            let q = 1 + rng.below(n.min(5000));
            let a = loop {
                let a = 1 + rng.below(q);
                if crate::numtheory::gcd(a, q) == 1 {
                    break a;
                }
            };
            let eps = epsilon_of_scale(k);
            let tau = (2.0 * rng.next_f64() - 1.0) / (q as f64 * n as f64);
            let th = ArcTheta::new(a, q, tau, eps, 1e-12).unwrap();
            let f = th.eval(rng.next_f64());
            let rhs = (q as f64).powf(-0.5) * (eps + tau.abs()).powf(-0.5) * f.mass;
            if rhs > 0.0 {
                worst = worst.max(f.value.norm() / rhs);
            }
        }
        assert!(worst <= 2f64.powf(0.25) * (1.0 + 1e-9), "slack {worst}");
    }
}
