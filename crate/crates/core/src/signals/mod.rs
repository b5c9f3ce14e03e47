//! Signals on `Z^d` and `(Z/NZ)^d` and the physical-side operators acting on
//! them: spherical averages `A_λ`, dyadic blocks `M_k`, the truncated `A_*`,
//! the Hardy–Littlewood box maximal function, and the scale-`k` telescoping.

pub mod fft;
pub mod io;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::lattice::{enumerate_sphere, SphereShell};
use crate::numtheory::q_depth_u128;
use crate::spectral::FreqRegion;
use crate::{Error, Result};

pub use fft::NdFft;

/// Finitely supported `f: Z^d → R`; zeros are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSignal {
    dim: usize,
    entries: BTreeMap<Vec<i64>, f64>,
}

impl SparseSignal {
    pub fn new(dim: usize) -> Self {
        SparseSignal {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn delta(point: Vec<i64>) -> Self {
        let mut s = Self::new(point.len());
        s.insert(point, 1.0);
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sets `f(point) = value`; a zero removes the entry.
    pub fn insert(&mut self, point: Vec<i64>, value: f64) {
        assert_eq!(point.len(), self.dim, "point dimension");
        if value == 0.0 {
            self.entries.remove(&point);
        } else {
            self.entries.insert(point, value);
        }
    }

    /// `f(point) += value`.
    pub fn add(&mut self, point: &[i64], value: f64) {
        if let Some(v) = self.entries.get_mut(point) {
            *v += value;
            if *v == 0.0 {
                self.entries.remove(point);
            }
        } else if value != 0.0 {
            self.entries.insert(point.to_vec(), value);
        }
    }

    pub fn get(&self, point: &[i64]) -> f64 {
        self.entries.get(point).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &f64)> {
        self.entries.iter()
    }

    pub fn norm_l1(&self) -> f64 {
        self.entries.values().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `n ↦ f(n − v)`.
    pub fn shifted(&self, v: &[i64]) -> Self {
        let mut out = Self::new(self.dim);
        for (n, &x) in &self.entries {
            out.entries
                .insert(n.iter().zip(v).map(|(a, b)| a + b).collect(), x);
        }
        out
    }

    fn check_shell(&self, shell: &SphereShell) -> Result<()> {
        if shell.dim != self.dim {
            return Err(Error::param("shell and signal dimensions differ"));
        }
        if shell.is_empty() {
            return Err(Error::param(format!(
                "shell n={} is empty",
                shell.radius_sq
            )));
        }
        Ok(())
    }

    /// Pointwise `|A_λ f|` over the union of supports, for the sups.
    fn abs_pointwise(&self) -> BTreeMap<Vec<i64>, f64> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), v.abs()))
            .collect()
    }

    fn from_max_map(dim: usize, map: BTreeMap<Vec<i64>, f64>) -> Self {
        let entries = map.into_iter().filter(|(_, v)| *v != 0.0).collect();
        SparseSignal { dim, entries }
    }
}

/// Dense `f: (Z/NZ)^d → R`, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSignal {
    dim: usize,
    side: usize,
    values: Vec<f64>,
}

impl PeriodicSignal {
    pub fn zeros(dim: usize, side: usize) -> Self {
        PeriodicSignal {
            dim,
            side,
            values: vec![0.0; side.pow(dim as u32)],
        }
    }

    pub fn constant(dim: usize, side: usize, c: f64) -> Self {
        PeriodicSignal {
            dim,
            side,
            values: vec![c; side.pow(dim as u32)],
        }
    }

    pub fn from_values(dim: usize, side: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || side == 0 || values.len() != side.pow(dim as u32) {
            return Err(Error::param(format!(
                "expected {side}^{dim} values, got {}",
                values.len()
            )));
        }
        Ok(PeriodicSignal { dim, side, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of a point, reduced mod `N` in every coordinate.
    pub fn flat_index(&self, point: &[i64]) -> usize {
        let n = self.side as i64;
        point
            .iter()
            .fold(0usize, |acc, &x| acc * self.side + x.rem_euclid(n) as usize)
    }

    pub fn point_of(&self, mut flat: usize) -> Vec<i64> {
        let mut p = vec![0i64; self.dim];
        for c in (0..self.dim).rev() {
            p[c] = (flat % self.side) as i64;
            flat /= self.side;
        }
        p
    }

    pub fn get(&self, point: &[i64]) -> f64 {
        self.values[self.flat_index(point)]
    }

    pub fn set(&mut self, point: &[i64], v: f64) {
        let i = self.flat_index(point);
        self.values[i] = v;
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        PeriodicSignal {
            dim: self.dim,
            side: self.side,
            values,
        }
    }

    pub fn plan(&self) -> NdFft {
        NdFft::new(self.dim, self.side)
    }

    /// Discrete Fourier coefficients `f̂(a) = Σ_x f(x) e^{−2πi x·a/N}`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.plan().forward(&mut data);
        data
    }

    /// Real part of the inverse transform of `spec`.
    pub fn from_spectrum(dim: usize, side: usize, mut spec: Vec<Complex64>) -> Self {
        NdFft::new(dim, side).inverse(&mut spec);
        PeriodicSignal {
            dim,
            side,
            values: spec.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Frequency-side product with `m(a_1/N, …, a_d/N) = Π_c axis[a_c]`.
    pub fn apply_separable(&self, axis: &[f64]) -> Self {
        let mut spec = self.spectrum();
        for (flat, v) in spec.iter_mut().enumerate() {
            *v *= separable_value(axis, self.side, self.dim, flat);
        }
        Self::from_spectrum(self.dim, self.side, spec)
    }

    /// `f * Ψ` for the sampling multiplier of `region`.
    pub fn apply_region(&self, region: &FreqRegion) -> Self {
        self.apply_separable(&region.axis_table(self.side as u64))
    }

    /// Zeroes `f̂` on the grid frequencies inside `region`.
    pub fn remove_region(&self, region: &FreqRegion) -> Self {
        let inside = region.axis_membership(self.side as u64);
        let mut spec = self.spectrum();
        for (flat, v) in spec.iter_mut().enumerate() {
            let mut rest = flat;
            let mut all = true;
            for _ in 0..self.dim {
                all &= inside[rest % self.side];
                rest /= self.side;
            }
            if all {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Self::from_spectrum(self.dim, self.side, spec)
    }

    fn check_radius(&self, radius_sq: u64) -> Result<()> {
        let lambda = crate::lattice::isqrt(radius_sq);
        let lambda = if lambda * lambda < radius_sq {
            lambda + 1
        } else {
            lambda
        };
        if 2 * lambda + 1 > self.side as u64 {
            return Err(Error::param(format!(
                "radius {lambda} wraps on side {}: need 2λ+1 <= N",
                self.side
            )));
        }
        Ok(())
    }

    /// `Σ_m w·f(x − m)` accumulated into `out` for one shift `m`.
    fn shift_add(&self, out: &mut [f64], m: &[i64], w: f64) {
        let n = self.side;
        let tables: Vec<Vec<usize>> = m
            .iter()
            .map(|&mc| {
                (0..n)
                    .map(|i| (i as i64 - mc).rem_euclid(n as i64) as usize)
                    .collect()
            })
            .collect();
        let last = &tables[self.dim - 1];
        let rows = out.len() / n;
        for row in 0..rows {
            let mut rest = row;
            let mut src_base = 0usize;
            let mut mult = n;
            for c in (0..self.dim - 1).rev() {
                src_base += tables[c][rest % n] * mult;
                rest /= n;
                mult *= n;
            }
            let dst = &mut out[row * n..(row + 1) * n];
            for (i, d) in dst.iter_mut().enumerate() {
                *d += w * self.values[src_base + last[i]];
            }
        }
    }

    fn average_direct(&self, shell: &SphereShell) -> Self {
        let mut out = vec![0.0; self.values.len()];
        let w = 1.0 / shell.count() as f64;
        for m in shell.points() {
            self.shift_add(&mut out, m, w);
        }
        PeriodicSignal {
            dim: self.dim,
            side: self.side,
            values: out,
        }
    }

    fn average_fft(&self, shell: &SphereShell, spectrum: &[Complex64]) -> Self {
        let mut kernel = vec![Complex64::new(0.0, 0.0); self.values.len()];
        let w = 1.0 / shell.count() as f64;
        for m in shell.points() {
            kernel[self.flat_index(m)] += w;
        }
        let plan = self.plan();
        plan.forward(&mut kernel);
        for (k, f) in kernel.iter_mut().zip(spectrum) {
            *k *= f;
        }
        plan.inverse(&mut kernel);
        PeriodicSignal {
            dim: self.dim,
            side: self.side,
            values: kernel.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Direct summation beats two transforms when the shell is short.
    fn prefers_direct(&self, shell: &SphereShell) -> bool {
        let log = (self.values.len() as f64).log2().max(1.0);
        (shell.count() as f64) < 4.0 * log
    }

    /// Sum of `f` over the cyclic window `[x−r, x+r]` along one axis.
    fn window_sum_axis(values: &[f64], dim: usize, side: usize, axis: usize, r: usize) -> Vec<f64> {
        let stride = side.pow((dim - 1 - axis) as u32);
        let block = stride * side;
        let mut out = vec![0.0; values.len()];
        let mut prefix = vec![0.0; 3 * side + 1];
        for outer in (0..values.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                // prefix over three periods so every window is one contiguous range.
                for i in 0..3 * side {
                    prefix[i + 1] = prefix[i] + values[base + (i % side) * stride];
                }
                for i in 0..side {
                    let lo = side + i - r;
                    let hi = side + i + r + 1;
                    out[base + i * stride] = prefix[hi] - prefix[lo];
                }
            }
        }
        out
    }

    fn box_sums(&self, r: usize) -> Vec<f64> {
        let mut cur = self.values.clone();
        for axis in 0..self.dim {
            cur = Self::window_sum_axis(&cur, self.dim, self.side, axis, r);
        }
        cur
    }

    fn check_dyadic(&self, k: u32) -> Result<()> {
        let top = 1u64 << (k + 1);
        if 2 * top + 1 > self.side as u64 {
            return Err(Error::param(format!(
                "dyadic block k={k} needs N >= {} (side is {})",
                2 * top + 1,
                self.side
            )));
        }
        Ok(())
    }

    /// `M_k f` at selected points only; each shell is summed directly.
    pub fn dyadic_max_at(&self, k: u32, points: &[Vec<i64>]) -> Result<Vec<f64>> {
        self.check_dyadic(k)?;
        let shells = dyadic_shells(self.dim, k)?;
        let out = points
            .par_iter()
            .map(|p| {
                let mut best = 0.0f64;
                let mut x = vec![0i64; self.dim];
                for shell in &shells {
                    let mut acc = 0.0;
                    for m in shell.points() {
                        for c in 0..self.dim {
                            x[c] = p[c] - m[c];
                        }
                        acc += self.get(&x);
                    }
                    best = best.max((acc / shell.count() as f64).abs());
                }
                best
            })
            .collect();
        Ok(out)
    }

    /// `Hf` at selected points.
    pub fn hl_max_at(&self, l_max: u32, points: &[Vec<i64>]) -> Result<Vec<f64>> {
        let h = self.hl_max(l_max)?;
        Ok(points.iter().map(|p| h.get(p)).collect())
    }
}

fn separable_value(axis: &[f64], side: usize, dim: usize, mut flat: usize) -> f64 {
    let mut p = 1.0;
    for _ in 0..dim {
        p *= axis[flat % side];
        flat /= side;
    }
    p
}

/// Nonempty shells with `4^k ≤ n ≤ 4^{k+1}`.
pub fn dyadic_shells(dim: usize, k: u32) -> Result<Vec<SphereShell>> {
    let lo = 1u64 << (2 * k);
    let hi = 1u64 << (2 * k + 2);
    let shells: Result<Vec<SphereShell>> = (lo..=hi)
        .into_par_iter()
        .map(|n| enumerate_sphere(dim, n))
        .collect();
    Ok(shells?.into_iter().filter(|s| !s.is_empty()).collect())
}

/// The physical-side operators shared by both signal kinds.
pub trait MaximalOps: Sized {
    /// `A_λ f(n) = N_λ^{−1} Σ_{|m|=λ} f(n − m)`.
    fn spherical_average(&self, shell: &SphereShell) -> Result<Self>;
    /// `sup |A_λ f|` over nonempty shells with `4^k ≤ λ² ≤ 4^{k+1}`.
    fn dyadic_max(&self, k: u32) -> Result<Self>;
    /// `max_{0≤k≤k_max} M_k f`.
    fn star_max(&self, k_max: u32) -> Result<Self>;
    /// `max_{1≤ℓ≤l_max} (2·2^ℓ+1)^{−d} |Σ_{m∈[−2^ℓ,2^ℓ]^d} f(n − m)|`.
    fn hl_max(&self, l_max: u32) -> Result<Self>;
}

impl MaximalOps for SparseSignal {
    fn spherical_average(&self, shell: &SphereShell) -> Result<Self> {
        self.check_shell(shell)?;
        let w = 1.0 / shell.count() as f64;
        let mut acc: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (n, &v) in &self.entries {
            for m in shell.points() {
                let x: Vec<i64> = n.iter().zip(m).map(|(a, b)| a + b).collect();
                *acc.entry(x).or_insert(0.0) += w * v;
            }
        }
        Ok(Self::from_max_map(self.dim, acc))
    }

    fn dyadic_max(&self, k: u32) -> Result<Self> {
        let shells = dyadic_shells(self.dim, k)?;
        let mut best: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for shell in &shells {
            let a = self.spherical_average(shell)?;
            for (x, v) in a.abs_pointwise() {
                let slot = best.entry(x).or_insert(0.0);
                *slot = slot.max(v);
            }
        }
        Ok(Self::from_max_map(self.dim, best))
    }

    fn star_max(&self, k_max: u32) -> Result<Self> {
        let mut best: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for k in 0..=k_max {
            for (x, v) in self.dyadic_max(k)?.entries {
                let slot = best.entry(x).or_insert(0.0);
                *slot = slot.max(v);
            }
        }
        Ok(Self::from_max_map(self.dim, best))
    }

    fn hl_max(&self, l_max: u32) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::param("l_max must be at least 1"));
        }
        let reach = 1i64 << l_max;
        let mut candidates: BTreeSet<Vec<i64>> = BTreeSet::new();
        for n in self.entries.keys() {
            box_points(n, reach, &mut candidates);
        }
        let d = self.dim as i32;
        let mut out = BTreeMap::new();
        for x in candidates {
            let mut best = 0.0f64;
            for l in 1..=l_max {
                let r = 1i64 << l;
                let s: f64 = self
                    .entries
                    .iter()
                    .filter(|(n, _)| n.iter().zip(&x).all(|(a, b)| (a - b).abs() <= r))
                    .map(|(_, v)| v)
                    .sum();
                best = best.max(s.abs() / ((2 * r + 1) as f64).powi(d));
            }
            out.insert(x, best);
        }
        Ok(Self::from_max_map(self.dim, out))
    }
}

fn box_points(center: &[i64], r: i64, out: &mut BTreeSet<Vec<i64>>) {
    let d = center.len();
    let mut idx = vec![-r; d];
    loop {
        out.insert(center.iter().zip(&idx).map(|(c, o)| c + o).collect());
        let mut i = 0;
        loop {
            if i == d {
                return;
            }
            idx[i] += 1;
            if idx[i] > r {
                idx[i] = -r;
                i += 1;
            } else {
                break;
            }
        }
    }
}

fn pointwise_max(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.max(y.abs());
    }
}

impl MaximalOps for PeriodicSignal {
    fn spherical_average(&self, shell: &SphereShell) -> Result<Self> {
        if shell.dim != self.dim {
            return Err(Error::param("shell and signal dimensions differ"));
        }
        if shell.is_empty() {
            return Err(Error::param(format!(
                "shell n={} is empty",
                shell.radius_sq
            )));
        }
        self.check_radius(shell.radius_sq)?;
        if self.prefers_direct(shell) {
            Ok(self.average_direct(shell))
        } else {
            Ok(self.average_fft(shell, &self.spectrum()))
        }
    }

    fn dyadic_max(&self, k: u32) -> Result<Self> {
        self.check_dyadic(k)?;
        let shells = dyadic_shells(self.dim, k)?;
        let spectrum = self.spectrum();
        let zero = || vec![0.0; self.values.len()];
        let values = shells
            .par_iter()
            .fold(zero, |mut acc, shell| {
                let a = if self.prefers_direct(shell) {
                    self.average_direct(shell)
                } else {
                    self.average_fft(shell, &spectrum)
                };
                pointwise_max(&mut acc, &a.values);
                acc
            })
            .reduce(zero, |mut a, b| {
                pointwise_max(&mut a, &b);
                a
            });
        Ok(PeriodicSignal {
            dim: self.dim,
            side: self.side,
            values,
        })
    }

    fn star_max(&self, k_max: u32) -> Result<Self> {
        let mut out = vec![0.0; self.values.len()];
        for k in 0..=k_max {
            pointwise_max(&mut out, &self.dyadic_max(k)?.values);
        }
        Ok(PeriodicSignal {
            dim: self.dim,
            side: self.side,
            values: out,
        })
    }

    fn hl_max(&self, l_max: u32) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::param("l_max must be at least 1"));
        }
        let widest = 2 * (1u64 << l_max) + 1;
        if widest > self.side as u64 {
            return Err(Error::param(format!(
                "box of side {widest} wraps on N = {}",
                self.side
            )));
        }
        let mut out = vec![0.0f64; self.values.len()];
        for l in 1..=l_max {
            let r = 1usize << l;
            let vol = ((2 * r + 1) as f64).powi(self.dim as i32);
            let sums = self.box_sums(r);
            for (o, s) in out.iter_mut().zip(&sums) {
                *o = (*o).max(s.abs() / vol);
            }
        }
        Ok(PeriodicSignal {
            dim: self.dim,
            side: self.side,
            values: out,
        })
    }
}

/// `f = f*Ψ[0,k] + Σ_{j<J_k} f*ΔΨ[j,k] + (f − f*Ψ[J_k,k])`.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub k: u32,
    pub j_k: u32,
    pub pieces: Vec<PeriodicSignal>,
    pub reconstruction_error: f64,
}

impl DecompositionReport {
    pub fn piece_norms(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.norm_l2()).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceSummary {
    pub index: usize,
    pub norm_l2: f64,
}

/// `J_k = ⌊log₂ k⌋ − 2`, defined for `k ≥ 4`.
pub fn depth_of_scale(k: u32) -> Result<u32> {
    if k < 4 {
        return Err(Error::param(format!(
            "scale k={k} below 4 has no admissible depth"
        )));
    }
    Ok(31 - k.leading_zeros() - 2)
}

pub fn telescope_decompose(f: &PeriodicSignal, k: u32) -> Result<DecompositionReport> {
    let j_k = depth_of_scale(k)?;
    let q = q_depth_u128(j_k)?;
    if (f.side as u128) % q != 0 {
        return Err(Error::param(format!(
            "telescoping at k={k} needs q_{j_k} = {q} to divide N = {}",
            f.side
        )));
    }
    let spectrum = f.spectrum();
    let tables: Vec<Vec<f64>> = (0..=j_k)
        .map(|j| FreqRegion::new(j, k).map(|r| r.axis_table(f.side as u64)))
        .collect::<Result<_>>()?;
    let multiplier = |j: usize, flat: usize| separable_value(&tables[j], f.side, f.dim, flat);
    let piece = |m: &dyn Fn(usize) -> f64| {
        let spec: Vec<Complex64> = spectrum.iter().enumerate().map(|(i, v)| v * m(i)).collect();
        PeriodicSignal::from_spectrum(f.dim, f.side, spec)
    };
    let mut pieces = vec![piece(&|i| multiplier(0, i))];
    for j in 0..j_k as usize {
        pieces.push(piece(&|i| multiplier(j + 1, i) - multiplier(j, i)));
    }
    pieces.push(piece(&|i| 1.0 - multiplier(j_k as usize, i)));
    let mut total = vec![0.0; f.len()];
    for p in &pieces {
        for (t, v) in total.iter_mut().zip(&p.values) {
            *t += v;
        }
    }
    let reconstruction_error = total
        .iter()
        .zip(&f.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(DecompositionReport {
        k,
        j_k,
        pieces,
        reconstruction_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64Star;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn average_examples() {
        let s = enumerate_sphere(5, 1).unwrap();
        let a = SparseSignal::delta(vec![0; 5])
            .spherical_average(&s)
            .unwrap();
        assert_eq!(a.len(), 10);
        for (_, v) in a.iter() {
            assert!(close(*v, 0.1));
        }
        let ones = PeriodicSignal::constant(2, 9, 1.0);
        let s2 = enumerate_sphere(2, 5).unwrap();
        let a = ones.spherical_average(&s2).unwrap();
        assert!(a.values().iter().all(|v| close(*v, 1.0)));

        let mut f = SparseSignal::delta(vec![0, 0]);
        f.insert(vec![2, 0], 1.0);
        let a = f
            .spherical_average(&enumerate_sphere(2, 1).unwrap())
            .unwrap();
        assert_eq!(a.len(), 7);
        assert!(close(a.get(&[1, 0]), 0.5));
        let quarters = a.iter().filter(|(_, v)| close(**v, 0.25)).count();
        assert_eq!(quarters, 6);
    }

    #[test]
    fn periodic_routes_agree() {
        let mut rng = XorShift64Star::new(6);
        let vals: Vec<f64> = (0..13 * 13).map(|_| rng.normal()).collect();
        let f = PeriodicSignal::from_values(2, 13, vals).unwrap();
        let s = enumerate_sphere(2, 25).unwrap();
        let a = f.average_direct(&s);
        let b = f.average_fft(&s, &f.spectrum());
        assert!(a.sub(&b).norm_linf() < 1e-12);
        assert!(f
            .spherical_average(&enumerate_sphere(2, 49).unwrap())
            .is_err());
    }

    #[test]
    fn dyadic_examples() {
        let f = SparseSignal::delta(vec![0; 5]);
        let m = f.dyadic_max(0).unwrap();
        assert!(close(m.get(&[1, 0, 0, 0, 0]), 0.1));
        assert!(close(m.get(&[2, 0, 0, 0, 0]), 1.0 / 90.0));
        assert!(SparseSignal::new(5).dyadic_max(0).unwrap().is_empty());
        let star = f.star_max(1).unwrap();
        assert!(close(star.get(&[1, 0, 0, 0, 0]), 0.1));
        assert_eq!(f.star_max(0).unwrap(), m);
    }

    #[test]
    fn periodic_dyadic_matches_sparse() {
        let f = SparseSignal::delta(vec![0, 0, 0]);
        let sparse = f.dyadic_max(1).unwrap();
        let mut p = PeriodicSignal::zeros(3, 11);
        p.set(&[0, 0, 0], 1.0);
        let dense = p.dyadic_max(1).unwrap();
        for flat in 0..dense.len() {
            let mut x = dense.point_of(flat);
            for c in x.iter_mut() {
                if *c > 5 {
                    *c -= 11;
                }
            }
            assert!((dense.values()[flat] - sparse.get(&x)).abs() < 1e-12);
        }
        let pts = vec![vec![1, 0, 0], vec![2, 1, 0], vec![3, 3, 3]];
        let at = p.dyadic_max_at(1, &pts).unwrap();
        for (pt, v) in pts.iter().zip(at) {
            assert!((v - dense.get(pt)).abs() < 1e-12);
        }
        assert!(p.dyadic_max(2).is_err());
    }

    #[test]
    fn hl_examples() {
        let f = SparseSignal::delta(vec![0]);
        let h = f.hl_max(3).unwrap();
        assert!(close(h.get(&[0]), 0.2));
        let h1 = f.hl_max(1).unwrap();
        assert!(close(h1.get(&[3]), 0.0));
        assert!(close(h1.get(&[2]), 0.2));
        let ones = PeriodicSignal::constant(2, 20, 1.0);
        assert!(ones
            .hl_max(3)
            .unwrap()
            .values()
            .iter()
            .all(|v| close(*v, 1.0)));
        assert!(ones.hl_max(4).is_err());

        let mut p = PeriodicSignal::zeros(1, 40);
        p.set(&[0], 1.0);
        let hp = p.hl_max(3).unwrap();
        for x in -12..=12i64 {
            assert!(close(hp.get(&[x]), h.get(&[x])), "x={x}");
        }
    }

    #[test]
    fn telescope_examples() {
        let zero = PeriodicSignal::zeros(2, 24);
        let r = telescope_decompose(&zero, 4).unwrap();
        assert_eq!(r.pieces.len(), 2);
        assert_eq!(r.reconstruction_error, 0.0);

        let mut rng = XorShift64Star::new(1);
        let f =
            PeriodicSignal::from_values(2, 24, (0..576).map(|_| rng.normal()).collect()).unwrap();
        let r = telescope_decompose(&f, 4).unwrap();
        assert!(r.reconstruction_error <= 1e-12 * f.norm_l2());

        let mut d = PeriodicSignal::zeros(2, 48);
        d.set(&[0, 0], 1.0);
        let r = telescope_decompose(&d, 16).unwrap();
        assert_eq!(r.j_k, 2);
        assert_eq!(r.pieces.len(), 4);
        assert!(r.reconstruction_error <= 1e-9);
        let golden = [
            0.02083333333333331,
            0.0360843918243516,
            0.24650332429581734,
            0.9682458365518543,
        ];
        for (n, g) in r.piece_norms().iter().zip(golden) {
            assert!((n - g).abs() < 1e-9, "{n} vs {g}");
        }
        assert!(telescope_decompose(&PeriodicSignal::zeros(2, 20), 16).is_err());
    }

    #[test]
    fn depth_of_scale_values() {
        assert_eq!(depth_of_scale(4).unwrap(), 0);
        assert_eq!(depth_of_scale(8).unwrap(), 1);
        assert_eq!(depth_of_scale(16).unwrap(), 2);
        assert_eq!(depth_of_scale(31).unwrap(), 2);
        assert!(depth_of_scale(3).is_err());
    }
}
