//! Truncated theta sums `Σ_{|m|≤M} e^{2πi m²(t+iε)} e^{−2πi mβ}` and their
//! `d`-fold products `ŝ_t(α)`.
//!
//! Phases are reduced mod 1 with an exact two-product so that large `m²t`
//! does not eat the mantissa.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use parking_lot::RwLock;
use serde::Serialize;

use super::{ratio_to_f64, TorusPoint};
use crate::{Error, Result};

/// Default cap on the truncation `M`.
pub const DEFAULT_MAX_TRUNCATION: u64 = 1 << 22;
/// Default relative truncation target for [`s_hat`].
pub const DEFAULT_TAIL_TARGET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaParams {
    pub t: f64,
    pub epsilon: f64,
    pub truncation: u64,
    pub tail_bound: f64,
}

impl ThetaParams {
    pub fn new(t: f64, epsilon: f64, truncation: u64) -> Result<Self> {
        if !(epsilon > 0.0) || truncation == 0 {
            return Err(Error::param("theta needs epsilon > 0 and M >= 1"));
        }
        Ok(ThetaParams {
            t,
            epsilon,
            truncation,
            tail_bound: tail_bound(epsilon, truncation),
        })
    }

    /// Parameters at scale `k`, i.e. `ε = 2^{−2k}`, with the smallest `M` meeting `abs_target`.
    pub fn at_scale(t: f64, k: u32, abs_target: f64, cap: u64) -> Result<Self> {
        let epsilon = epsilon_of_scale(k);
        let m = truncation_for(epsilon, abs_target, cap)?;
        Self::new(t, epsilon, m)
    }
}

pub fn epsilon_of_scale(k: u32) -> f64 {
    (-2.0 * k as f64).exp2()
}

/// `2e^{−2πεM²}/(1 − e^{−2πε(2M+1)})`, bounding `Σ_{|m|>M} e^{−2πεm²}`.
pub fn tail_bound(epsilon: f64, m: u64) -> f64 {
    let m = m as f64;
    let num = 2.0 * (-2.0 * PI * epsilon * m * m).exp();
    let den = -(-2.0 * PI * epsilon * (2.0 * m + 1.0)).exp_m1();
    num / den
}

/// Smallest `M ≥ 1` with `tail_bound(ε, M) ≤ target`.
pub fn truncation_for(epsilon: f64, target: f64, cap: u64) -> Result<u64> {
    if !(target > 0.0) || !(epsilon > 0.0) {
        return Err(Error::param(
            "truncation target and epsilon must be positive",
        ));
    }
    let guess = ((2.0 / target).ln().max(0.0) / (2.0 * PI * epsilon))
        .sqrt()
        .floor() as u64;
    let mut m = guess.max(1);
    while m > 1 && tail_bound(epsilon, m - 1) <= target {
        m -= 1;
    }
    while tail_bound(epsilon, m) > target {
        m += 1;
        if m > cap {
            break;
        }
    }
    if m > cap {
        return Err(Error::Resource {
            message: format!("theta truncation {m} exceeds cap {cap} (epsilon={epsilon:e})"),
            estimate: Some(m),
        });
    }
    Ok(m)
}

/// `(a·b) mod 1` with the rounding error of the product recovered by FMA.
#[inline]
pub(crate) fn frac_mul(a: f64, b: f64) -> f64 {
    let p = a * b;
    let e = a.mul_add(b, -p);
    let f = p - p.floor();
    let r = f + e;
    r - r.floor()
}

#[inline]
fn cis(turns: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * turns).sin_cos();
    Complex64::new(c, s)
}

/// Sum with the quadratic phase supplied per `m` in turns.
#[inline]
fn theta_with_phase(
    epsilon: f64,
    beta: f64,
    m_max: u64,
    quad_phase: impl Fn(u64) -> f64,
) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let decay = -2.0 * PI * epsilon;
    for m in 1..=m_max {
        let mf = m as f64;
        let w = (decay * mf * mf).exp();
        if w == 0.0 {
            break;
        }
        // e^{−2πimβ} + e^{2πimβ} = 2cos(2πmβ)
        let lin = frac_mul(mf, beta);
        let c = (2.0 * PI * lin).cos();
        acc += cis(quad_phase(m)) * (2.0 * w * c);
    }
    acc
}

/// `Σ_{|m|≤M} e^{2πi m²(t+iε)} e^{−2πi mβ}`.
pub fn theta_1d(t: f64, epsilon: f64, beta: f64, m_max: u64) -> Complex64 {
    theta_with_phase(epsilon, beta, m_max, |m| {
        let mf = m as f64;
        frac_mul(mf * mf, t)
    })
}

/// [`theta_1d`] at `t = a/q + τ`, with `a m²/q` reduced exactly.
pub fn theta_1d_arc(a: u64, q: u64, tau: f64, epsilon: f64, beta: f64, m_max: u64) -> Complex64 {
    let (a, q) = (a as u128, q as u128);
    theta_with_phase(epsilon, beta, m_max, |m| {
        let m = m as u128;
        let r = (a * ((m * m) % q)) % q;
        let mf = m as f64;
        let x = r as f64 / q as f64 + frac_mul(mf * mf, tau);
        x - x.floor()
    })
}

/// A product of theta factors with its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShatEval {
    pub re: f64,
    pub im: f64,
    pub truncation: u64,
    /// Per-factor absolute tail bound.
    pub tail_bound: f64,
}

impl ShatEval {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm(&self) -> f64 {
        self.value().norm()
    }
}

fn factor_truncation(k: u32, d: usize, tail_target: f64, cap: u64) -> Result<(f64, u64)> {
    if !(tail_target > 0.0) {
        return Err(Error::param("tail_target must be positive"));
    }
    let epsilon = epsilon_of_scale(k);
    // Each factor has |θ| ≤ θ(0) and θ(0) ≥ 1, so a per-factor absolute tail
    // of target/d keeps the product's error relative to the majorant below target.
    let m = truncation_for(epsilon, tail_target / d.max(1) as f64, cap)?;
    Ok((epsilon, m))
}

/// `ŝ_t(α) = Π_i θ(t, 2^{−2k}, α_i)` with `M` chosen from `tail_target`.
pub fn s_hat(t: f64, k: u32, alpha: &TorusPoint, tail_target: f64) -> Result<ShatEval> {
    s_hat_capped(t, k, alpha, tail_target, DEFAULT_MAX_TRUNCATION)
}

pub fn s_hat_capped(
    t: f64,
    k: u32,
    alpha: &TorusPoint,
    tail_target: f64,
    cap: u64,
) -> Result<ShatEval> {
    let (epsilon, m) = factor_truncation(k, alpha.dim(), tail_target, cap)?;
    let mut v = Complex64::new(1.0, 0.0);
    for c in alpha.coords() {
        v *= theta_1d(t, epsilon, ratio_to_f64(c), m);
    }
    Ok(ShatEval {
        re: v.re,
        im: v.im,
        truncation: m,
        tail_bound: tail_bound(epsilon, m),
    })
}

/// `ŝ_t(α)` at `t = a/q + τ`.
pub fn s_hat_arc(
    a: u64,
    q: u64,
    tau: f64,
    k: u32,
    alpha: &TorusPoint,
    tail_target: f64,
) -> Result<ShatEval> {
    let (epsilon, m) = factor_truncation(k, alpha.dim(), tail_target, DEFAULT_MAX_TRUNCATION)?;
    let mut v = Complex64::new(1.0, 0.0);
    for c in alpha.coords() {
        v *= theta_1d_arc(a, q, tau, epsilon, ratio_to_f64(c), m);
    }
    Ok(ShatEval {
        re: v.re,
        im: v.im,
        truncation: m,
        tail_bound: tail_bound(epsilon, m),
    })
}

type CacheKey = (u64, u64, i64, u64);

/// Memo for [`theta_1d`], keyed by `(t, ε, β rounded to 1e−14, M)`.
#[derive(Debug, Default)]
pub struct ThetaCache {
    map: RwLock<HashMap<CacheKey, Complex64>>,
}

impl ThetaCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(t: f64, epsilon: f64, beta: f64, m: u64) -> CacheKey {
        (
            t.to_bits(),
            epsilon.to_bits(),
            (beta * 1e14).round() as i64,
            m,
        )
    }

    pub fn theta(&self, t: f64, epsilon: f64, beta: f64, m: u64) -> Complex64 {
        let key = Self::key(t, epsilon, beta, m);
        if let Some(v) = self.map.read().get(&key) {
            return *v;
        }
        let v = theta_1d(t, epsilon, beta, m);
        self.map.write().insert(key, v);
        v
    }

    pub fn len(&self) -> usize {
        self.map.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.write().clear();
    }
}
