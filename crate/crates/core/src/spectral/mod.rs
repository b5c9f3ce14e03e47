//! Torus-side objects: exact frequency points, the glue bump `ψ̃`, frequency
//! regions `Ω_{j,k}`, the sampling multipliers `Ψ̂_{j,k}` and their
//! consecutive differences, plus the theta sums in [`theta`].
//!
//! Index convention: `Ψ[j,k] = ψ_{q_j, 2^{k-j}}` with `j` the arithmetic depth
//! and `k` the dyadic scale; `ΔΨ[j,k] = Ψ[j+1,k] − Ψ[j,k]`.

pub mod theta;

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::lattice::SphereShell;
use crate::numtheory::q_depth_u128;
use crate::signals::SparseSignal;
use crate::{Error, Result};

pub use theta::{s_hat, s_hat_arc, theta_1d, theta_1d_arc, ShatEval, ThetaCache, ThetaParams};

/// Largest denominator accepted for a torus coordinate.
pub const MAX_DENOMINATOR: i128 = 1 << 62;

/// A point of `T^d` with exact rational coordinates in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    coords: Vec<Ratio<i128>>,
}

impl TorusPoint {
    /// Builds a point from `(numerator, denominator)` pairs, reducing mod 1.
    pub fn new(parts: &[(i128, i128)]) -> Result<Self> {
        let coords = parts
            .iter()
            .map(|&(n, d)| {
                if d <= 0 || d > MAX_DENOMINATOR {
                    return Err(Error::param(format!("torus denominator {d} out of range")));
                }
                Ok(Ratio::new(n.rem_euclid(d), d))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TorusPoint { coords })
    }

    pub fn from_ratios(coords: &[Ratio<i128>]) -> Result<Self> {
        let parts: Vec<(i128, i128)> = coords.iter().map(|r| (*r.numer(), *r.denom())).collect();
        Self::new(&parts)
    }

    pub fn zero(dim: usize) -> Self {
        TorusPoint {
            coords: vec![Ratio::from_integer(0); dim],
        }
    }

    /// The grid frequency `(a_1/N, …, a_d/N)`.
    pub fn grid(indices: &[u64], side: u64) -> Result<Self> {
        let parts: Vec<(i128, i128)> = indices.iter().map(|&a| (a as i128, side as i128)).collect();
        Self::new(&parts)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Ratio<i128>] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> Ratio<i128> {
        self.coords[i]
    }

    pub fn approx(&self) -> Vec<f64> {
        self.coords.iter().map(ratio_to_f64).collect()
    }
}

pub(crate) fn ratio_to_f64(r: &Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `frac(n·num/den)` computed exactly, returned as a float in `[0, 1)`.
fn frac_product(n: i64, num: i128, den: i128) -> f64 {
    let r = (n as i128 * num).rem_euclid(den);
    r as f64 / den as f64
}

/// `Σ_n f(n) e^{−2πi n·α}`.
pub fn fourier_eval(f: &SparseSignal, alpha: &TorusPoint) -> Result<Complex64> {
    if f.dim() != alpha.dim() {
        return Err(Error::param("signal and frequency dimensions differ"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, &v) in f.iter() {
        let phase = phase_of(n, alpha);
        acc += v * Complex64::from_polar(1.0, -2.0 * PI * phase);
    }
    Ok(acc)
}

fn phase_of(n: &[i64], alpha: &TorusPoint) -> f64 {
    let mut p = 0.0;
    for (x, c) in n.iter().zip(alpha.coords()) {
        p += frac_product(*x, *c.numer(), *c.denom());
    }
    p
}

/// `N_λ^{-1} Σ_{|m|=λ} e^{−2πi m·α}`.
pub fn avg_multiplier(shell: &SphereShell, alpha: &TorusPoint) -> Result<Complex64> {
    if shell.is_empty() {
        return Err(Error::param(format!(
            "shell d={} n={} is empty",
            shell.dim, shell.radius_sq
        )));
    }
    if shell.dim != alpha.dim() {
        return Err(Error::param("shell and frequency dimensions differ"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for m in shell.points() {
        acc += Complex64::from_polar(1.0, -2.0 * PI * phase_of(m, alpha));
    }
    Ok(acc / shell.count() as f64)
}

fn glue_phi(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step `S(u) = φ(u)/(φ(u)+φ(1−u))`, `φ(u) = e^{−1/u}` for `u > 0`.
pub fn smooth_step(u: f64) -> f64 {
    let a = glue_phi(u);
    let b = glue_phi(1.0 - u);
    if a + b == 0.0 {
        return if u >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// The one-dimensional bump `ψ̃`: 1 on `|ξ| ≤ 1/2`, 0 on `|ξ| ≥ 1`, glued by [`smooth_step`].
pub fn bump_eval(xi: f64) -> f64 {
    let x = xi.abs();
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        smooth_step(2.0 * (1.0 - x))
    }
}

/// `ψ̃(num/den)` for a nonnegative exact ratio, with exact plateau and support edges.
fn bump_exact(num: u128, den: u128) -> f64 {
    if 2 * num <= den {
        1.0
    } else if num >= den {
        0.0
    } else {
        bump_eval(num as f64 / den as f64)
    }
}

/// `Ω`-style region: the `q^{-1}`-rational grid thickened by a box of exact half-width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreqRegion {
    pub j: u32,
    pub k: u32,
    pub q: u128,
    half_num: u128,
    half_den: u128,
    /// `2·q·halfwidth ≤ 1`, so distinct boxes meet at most in boundary points.
    pub disjoint: bool,
}

/// Largest depth whose `q_j` keeps exact membership arithmetic within 128 bits.
pub const MAX_REGION_DEPTH: u32 = 5;
/// Largest scale accepted for a region.
pub const MAX_REGION_SCALE: u32 = 48;

impl FreqRegion {
    /// `Ω_{j,k}`: half-width `2^{j−k}` around `(q_j^{-1} Z)^d`; requires `2^j ≤ k`.
    pub fn new(j: u32, k: u32) -> Result<Self> {
        if j > MAX_REGION_DEPTH || k > MAX_REGION_SCALE {
            return Err(Error::param(format!(
                "region (j={j}, k={k}) outside supported range"
            )));
        }
        if (1u64 << j) > k as u64 {
            return Err(Error::param(format!(
                "region needs 2^j <= k, got j={j}, k={k}"
            )));
        }
        let q = q_depth_u128(j)?;
        let (half_num, half_den) = if j <= k {
            (1, 1u128 << (k - j))
        } else {
            (1u128 << (j - k), 1)
        };
        let disjoint = 2 * q * half_num <= half_den;
        let region = FreqRegion {
            j,
            k,
            q,
            half_num,
            half_den,
            disjoint,
        };
        let admissible = k >= 4 && (j as f64) <= (k as f64).log2() - 2.0;
        if admissible && 2 * q * half_num >= half_den {
            return Err(Error::param(format!("boxes of Ω_({j},{k}) overlap")));
        }
        Ok(region)
    }

    /// Region with an arbitrary grid modulus and half-width, for relaxed diagnostics.
    pub fn with_halfwidth(q: u128, halfwidth: Ratio<u128>) -> Result<Self> {
        if q == 0 || *halfwidth.numer() == 0 {
            return Err(Error::param(
                "relaxed region needs q >= 1 and positive half-width",
            ));
        }
        let (half_num, half_den) = (*halfwidth.numer(), *halfwidth.denom());
        Ok(FreqRegion {
            j: 0,
            k: 0,
            q,
            half_num,
            half_den,
            disjoint: 2 * q * half_num <= half_den,
        })
    }

    /// Half-width as an exact ratio.
    pub fn halfwidth(&self) -> Ratio<u128> {
        Ratio::new(self.half_num, self.half_den)
    }

    /// Same grid, half the box.
    pub fn halved(&self) -> Self {
        let mut r = self.clone();
        if r.half_num % 2 == 0 {
            r.half_num /= 2;
        } else {
            r.half_den *= 2;
        }
        r.disjoint = 2 * r.q * r.half_num <= r.half_den;
        r
    }

    /// Distance of `num/den` to `q^{-1}Z` as `(numerator, denominator)`, unreduced.
    fn grid_distance(&self, num: i128, den: i128) -> (u128, u128) {
        let den = den as u128;
        let r = ((num.rem_euclid(den as i128)) as u128 * self.q) % den;
        (r.min(den - r), den * self.q)
    }

    /// `dist(x, q^{-1}Z) ≤ halfwidth` for the rational `num/den`.
    pub fn coord_inside(&self, num: i128, den: i128) -> bool {
        let (m, d) = self.grid_distance(num, den);
        m * self.half_den <= self.half_num * d
    }

    /// Closed membership: every coordinate within the half-width of the grid.
    pub fn contains(&self, alpha: &TorusPoint) -> bool {
        alpha
            .coords()
            .iter()
            .all(|c| self.coord_inside(*c.numer(), *c.denom()))
    }

    /// `ψ̃(dist(x, q^{-1}Z)/halfwidth)` for `x = num/den`.
    pub fn coord_multiplier(&self, num: i128, den: i128) -> f64 {
        let (m, d) = self.grid_distance(num, den);
        bump_exact(m * self.half_den, d * self.half_num)
    }

    /// `Ψ̂` on the grid frequencies `a/N`, `0 ≤ a < N`, for one axis.
    pub fn axis_table(&self, side: u64) -> Vec<f64> {
        (0..side)
            .map(|a| self.coord_multiplier(a as i128, side as i128))
            .collect()
    }

    /// Membership of the grid frequencies `a/N` for one axis.
    pub fn axis_membership(&self, side: u64) -> Vec<bool> {
        (0..side)
            .map(|a| self.coord_inside(a as i128, side as i128))
            .collect()
    }
}

/// `Ψ̂_{j,k}(α) = Π_i ψ̃(2^{k−j}·dist(α_i, q_j^{-1}Z))`.
pub fn sampling_multiplier(region: &FreqRegion, alpha: &TorusPoint) -> f64 {
    let mut p = 1.0;
    for c in alpha.coords() {
        p *= region.coord_multiplier(*c.numer(), *c.denom());
        if p == 0.0 {
            break;
        }
    }
    p
}

pub fn omega_member(region: &FreqRegion, alpha: &TorusPoint) -> bool {
    region.contains(alpha)
}

/// `Ψ̂_{j+1,k}(α) − Ψ̂_{j,k}(α)`.
pub fn delta_multiplier(j: u32, k: u32, alpha: &TorusPoint) -> Result<f64> {
    let fine = FreqRegion::new(j + 1, k)?;
    let coarse = FreqRegion::new(j, k)?;
    Ok(sampling_multiplier(&fine, alpha) - sampling_multiplier(&coarse, alpha))
}

/// `Σ_k |ΔΨ̂_{j,k}(α)|²` over the scales `2^j ≤ k ≤ k_max` at which `ΔΨ_{j,k}` is defined.
///
/// `ΔΨ_{j,k}` needs the region `(j+1, k)`, i.e. `k ≥ 2^{j+1}`; smaller scales
/// contribute nothing.
pub fn ortho_partial_sum(j: u32, alpha: &TorusPoint, k_max: u32) -> Result<f64> {
    let start = 1u32 << j;
    if k_max < start {
        return Err(Error::param(format!("k_max = {k_max} below 2^j = {start}")));
    }
    let mut total = 0.0;
    for k in start.max(1 << (j + 1))..=k_max {
        let d = delta_multiplier(j, k, alpha)?;
        total += d * d;
    }
    Ok(total)
}

/// Individual terms `|ΔΨ̂_{j,k}(α)|²` for `2^{j+1} ≤ k ≤ k_max`, keyed by `k`.
pub fn ortho_terms(j: u32, alpha: &TorusPoint, k_max: u32) -> Result<Vec<(u32, f64)>> {
    let mut out = Vec::new();
    for k in (1u32 << (j + 1))..=k_max {
        let d = delta_multiplier(j, k, alpha)?;
        out.push((k, d * d));
    }
    Ok(out)
}

/// Largest coordinate distance of `α` to `q^{-1}Z`, as a float.
pub fn max_grid_distance(q: u128, alpha: &TorusPoint) -> f64 {
    alpha
        .coords()
        .iter()
        .map(|c| {
            let den = *c.denom() as u128;
            let r = (*c.numer() as u128 * q) % den;
            r.min(den - r) as f64 / (den as f64 * q as f64)
        })
        .fold(0.0, f64::max)
}

/// `gcd`-reduced copy of a ratio; used by callers that build coordinates by hand.
pub fn reduce(num: i128, den: i128) -> (i128, i128) {
    let g = num.gcd(&den).max(1);
    (num / g, den / g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_sphere;
    use crate::rng::XorShift64Star;

    fn pt(parts: &[(i128, i128)]) -> TorusPoint {
        TorusPoint::new(parts).unwrap()
    }

    fn random_point(rng: &mut XorShift64Star, d: usize, bits: u32) -> TorusPoint {
        let den = 1i128 << bits;
        let parts: Vec<(i128, i128)> = (0..d)
            .map(|_| (rng.below(den as u64) as i128, den))
            .collect();
        pt(&parts)
    }

    #[test]
    fn torus_point_is_canonical() {
        let p = pt(&[(-1, 4), (6, 4), (2, 6)]);
        assert_eq!(p.coord(0), Ratio::new(3, 4));
        assert_eq!(p.coord(1), Ratio::new(1, 2));
        assert_eq!(p.coord(2), Ratio::new(1, 3));
        let approx = p.approx();
        assert!((approx[2] - 1.0 / 3.0).abs() < 1e-15);
        assert!(TorusPoint::new(&[(1, 0)]).is_err());
    }

    #[test]
    fn fourier_examples() {
        let mut f = SparseSignal::new(2);
        f.insert(vec![0, 0], 1.0);
        let any = pt(&[(3, 7), (5, 11)]);
        assert!((fourier_eval(&f, &any).unwrap() - 1.0).norm() < 1e-15);

        let mut g = SparseSignal::new(2);
        g.insert(vec![1, 0], 1.0);
        let half = pt(&[(1, 2), (0, 1)]);
        assert!((fourier_eval(&g, &half).unwrap() + 1.0).norm() < 1e-15);

        f.insert(vec![1, 0], 1.0);
        let quarter = pt(&[(1, 4), (0, 1)]);
        assert!((fourier_eval(&f, &quarter).unwrap() - Complex64::new(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn avg_multiplier_examples() {
        let s = enumerate_sphere(2, 1).unwrap();
        assert!((avg_multiplier(&s, &TorusPoint::zero(2)).unwrap() - 1.0).norm() < 1e-15);
        assert!(avg_multiplier(&s, &pt(&[(1, 2), (0, 1)])).unwrap().norm() < 1e-15);
        let s5 = enumerate_sphere(5, 1).unwrap();
        let halves = pt(&[(1, 2); 5]);
        assert!((avg_multiplier(&s5, &halves).unwrap() + 1.0).norm() < 1e-14);
        let empty = enumerate_sphere(3, 7).unwrap();
        assert!(avg_multiplier(&empty, &TorusPoint::zero(3)).is_err());
    }

    #[test]
    fn avg_multiplier_is_real() {
        let mut rng = XorShift64Star::new(11);
        for n in [5u64, 13, 29, 50] {
            let s = enumerate_sphere(3, n).unwrap();
            for _ in 0..20 {
                let a = random_point(&mut rng, 3, 30);
                assert!(avg_multiplier(&s, &a).unwrap().im.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn bump_examples() {
        assert_eq!(bump_eval(0.0), 1.0);
        assert_eq!(bump_eval(1.0), 0.0);
        assert!((bump_eval(0.75) - 0.5).abs() < 1e-15);
        assert!((bump_eval(-0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bump_bounds_and_monotone() {
        let mut prev = 1.0;
        for i in 0..=4000 {
            let x = -2.0 + i as f64 * 0.001;
            let v = bump_eval(x);
            let lower = if x.abs() <= 0.5 { 1.0 } else { 0.0 };
            let upper = if x.abs() <= 1.0 { 1.0 } else { 0.0 };
            assert!(lower <= v && v <= upper, "x={x}");
            if (0.5..=1.0).contains(&x) {
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn region_construction() {
        let r = FreqRegion::new(1, 8).unwrap();
        assert_eq!(r.q, 2);
        assert_eq!(r.halfwidth(), Ratio::new(1, 128));
        assert!(r.disjoint);
        // halfwidth · 2^k = 2^j
        assert_eq!(
            r.halfwidth() * Ratio::from_integer(256u128),
            Ratio::from_integer(2u128)
        );
        assert!(FreqRegion::new(2, 3).is_err());
        assert!(FreqRegion::new(3, 32).unwrap().disjoint);
    }

    #[test]
    fn sampling_multiplier_examples() {
        let r = FreqRegion::new(1, 8).unwrap();
        assert_eq!(sampling_multiplier(&r, &TorusPoint::zero(3)), 1.0);
        // One coordinate at distance exactly 2^{j−k} = 1/128.
        let edge = pt(&[(1, 128), (0, 1), (0, 1)]);
        assert_eq!(sampling_multiplier(&r, &edge), 0.0);
        let inner = pt(&[(1, 256), (0, 1), (0, 1)]);
        assert_eq!(sampling_multiplier(&r, &inner), 1.0);
    }

    #[test]
    fn omega_examples() {
        let r = FreqRegion::new(1, 8).unwrap();
        assert!(omega_member(&r, &TorusPoint::zero(2)));
        assert!(!omega_member(&r, &pt(&[(1, 3), (0, 1)])));
        assert!(omega_member(&r, &pt(&[(129, 256), (0, 1)])));
        // boundary is inside
        assert!(omega_member(&r, &pt(&[(65, 128), (0, 1)])));
        assert!(!omega_member(&r, &pt(&[(2 * 65 + 1, 256), (0, 1)])));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_multiplier(1, 8, &TorusPoint::zero(5)).unwrap(), 0.0);
        let far = pt(&[(1, 5), (0, 1), (0, 1), (0, 1), (0, 1)]);
        // 1/5 is far from both Z/2 and Z/12 at scale 8.
        assert!(!FreqRegion::new(1, 8).unwrap().contains(&far));
        assert!(!FreqRegion::new(2, 8).unwrap().contains(&far));
        assert_eq!(delta_multiplier(1, 8, &far).unwrap(), 0.0);
        let near_half = pt(&[(129, 256), (0, 1), (0, 1), (0, 1), (0, 1)]);
        assert_eq!(delta_multiplier(1, 8, &near_half).unwrap(), 0.0);
    }

    #[test]
    fn ortho_examples() {
        for j in 1..=3 {
            assert_eq!(
                ortho_partial_sum(j, &TorusPoint::zero(5), (1 << j) + 20).unwrap(),
                0.0
            );
        }
        let mut rng = XorShift64Star::new(5);
        for _ in 0..200 {
            let a = random_point(&mut rng, 5, 40);
            let s = ortho_partial_sum(1, &a, 22).unwrap();
            assert!(s <= 10.0, "sum {s}");
        }
        assert!(ortho_partial_sum(2, &TorusPoint::zero(5), 3).is_err());
    }

    #[test]
    fn coarsest_region_covers_torus() {
        // Ω_{j,2^j} is all of T^d for these depths, so no α lies outside it.
        let mut rng = XorShift64Star::new(8);
        for j in 1..=4 {
            let r = FreqRegion::new(j, 1 << j).unwrap();
            for _ in 0..200 {
                assert!(r.contains(&random_point(&mut rng, 5, 40)));
            }
        }
    }

    #[test]
    fn plateau_terms_vanish() {
        // With every coordinate within δ of the q_j grid and 2^{k−j}δ ≤ 1/2, ΔΨ̂ = 0.
        let mut rng = XorShift64Star::new(21);
        for j in 1..=3u32 {
            let q = q_depth_u128(j).unwrap() as i128;
            for _ in 0..100 {
                let delta_bits = 10 + rng.below(20) as u32;
                let den = q << delta_bits;
                let parts: Vec<(i128, i128)> = (0..5)
                    .map(|_| {
                        let center = rng.below(q as u64) as i128;
                        let off = rng.range_inclusive(-1, 1) as i128;
                        ((center << delta_bits) + off, den)
                    })
                    .collect();
                let a = pt(&parts);
                let delta = max_grid_distance(q as u128, &a);
                for (k, term) in ortho_terms(j, &a, (1 << j) + 20).unwrap() {
                    if (2f64).powi(k as i32 - j as i32) * delta <= 0.5 {
                        assert_eq!(term, 0.0, "j={j} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn support_plateau_and_nesting() {
        let mut rng = XorShift64Star::new(1234);
        for k in 4..=20u32 {
            for j in 0..=MAX_REGION_DEPTH {
                if (1u32 << j) > k {
                    continue;
                }
                let r = FreqRegion::new(j, k).unwrap();
                let half = r.halved();
                let next = FreqRegion::new(j, k + 1).unwrap();
                for _ in 0..300 {
                    // Mix uniform points with points pulled near the grid.
                    let a = if rng.below(2) == 0 {
                        random_point(&mut rng, 2, 50)
                    } else {
                        let q = r.q as i128;
                        let scale = 1i128 << (k + 3);
                        let parts: Vec<(i128, i128)> = (0..2)
                            .map(|_| {
                                let c = rng.below(q as u64) as i128;
                                let off = rng.range_inclusive(-24, 24) as i128;
                                (c * scale + off * (1i128 << j), q * scale)
                            })
                            .collect();
                        pt(&parts)
                    };
                    if sampling_multiplier(&r, &a) > 0.0 {
                        assert!(omega_member(&r, &a));
                    }
                    if omega_member(&half, &a) {
                        assert_eq!(sampling_multiplier(&r, &a), 1.0);
                    }
                    if omega_member(&next, &a) {
                        assert!(omega_member(&r, &a));
                    }
                }
            }
        }
    }
}
