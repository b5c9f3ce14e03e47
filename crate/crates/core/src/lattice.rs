//! Lattice points on spheres `{m ∈ Z^d : |m|² = n}`.
//!
//! Two independent routes are kept side by side: [`count_reps`] counts by
//! dynamic programming over dimensions, [`enumerate_sphere`] lists the points
//! by recursive descent. The test suite holds them equal.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::{Error, Result};

/// Default cap on the number of points a shell may hold.
pub const DEFAULT_POINT_CAP: u64 = 1 << 26;

/// `r_1(s) ` for `0 ≤ s ≤ n`: 1 at 0, 2 at every positive square.
fn one_dim_table(n: usize) -> Vec<u64> {
    let mut t = vec![0u64; n + 1];
    let mut m = 0usize;
    while m * m <= n {
        t[m * m] += if m == 0 { 1 } else { 2 };
        m += 1;
    }
    t
}

/// `r_d(s)` for every `0 ≤ s ≤ n_max`.
pub fn rep_table(d: usize, n_max: u64) -> Vec<u64> {
    assert!(d >= 1, "dimension must be positive");
    let n = n_max as usize;
    let base = one_dim_table(n);
    let squares: Vec<usize> = (0..)
        .map(|m: usize| m * m)
        .take_while(|&s| s <= n)
        .collect();
    let mut acc = base.clone();
    for _ in 1..d {
        let mut next = vec![0u64; n + 1];
        for (s, out) in next.iter_mut().enumerate() {
            let mut total = 0u64;
            for &sq in squares.iter().take_while(|&&sq| sq <= s) {
                total += base[sq] * acc[s - sq];
            }
            *out = total;
        }
        acc = next;
    }
    acc
}

/// `r_d(n) = |{m ∈ Z^d : |m|² = n}|`.
pub fn count_reps(d: usize, n: u64) -> u64 {
    rep_table(d, n)[n as usize]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereShell {
    pub dim: usize,
    pub radius_sq: u64,
    /// Row-major point coordinates, `dim` entries per point, lexicographic order.
    coords: Vec<i64>,
}

impl SphereShell {
    pub fn count(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest absolute coordinate, i.e. `⌊√n⌋` when the shell is nonempty.
    pub fn radius_bound(&self) -> i64 {
        isqrt(self.radius_sq) as i64
    }

    /// One point per row, columns `m_1..m_d`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let header: Vec<String> = (1..=self.dim).map(|i| format!("m_{i}")).collect();
        w.write_record(&header)?;
        for p in self.points() {
            w.write_record(p.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (1..=self.dim).map(|i| format!("m_{i}")).collect();
        w.write_record(&header)?;
        for p in self.points() {
            w.write_record(p.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn descend(prefix: &mut Vec<i64>, remaining: u64, dims_left: usize, out: &mut Vec<i64>) {
    if dims_left == 1 {
        let r = isqrt(remaining);
        if r * r == remaining {
            if r == 0 {
                out.extend_from_slice(prefix);
                out.push(0);
            } else {
                out.extend_from_slice(prefix);
                out.push(-(r as i64));
                out.extend_from_slice(prefix);
                out.push(r as i64);
            }
        }
        return;
    }
    let r = isqrt(remaining) as i64;
    for m in -r..=r {
        prefix.push(m);
        descend(prefix, remaining - (m * m) as u64, dims_left - 1, out);
        prefix.pop();
    }
}

/// Lists every `m ∈ Z^d` with `|m|² = n` in lexicographic order.
pub fn enumerate_sphere(d: usize, n: u64) -> Result<SphereShell> {
    enumerate_sphere_capped(d, n, DEFAULT_POINT_CAP)
}

pub fn enumerate_sphere_capped(d: usize, n: u64, cap: u64) -> Result<SphereShell> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    // The first d−1 coordinates fix the last up to sign; only shells that
    // might exceed the cap pay for the exact count.
    let crude = (2 * isqrt(n) + 1)
        .saturating_pow(d as u32 - 1)
        .saturating_mul(2);
    if crude > cap {
        let estimate = count_reps(d, n);
        if estimate > cap {
            return Err(Error::Resource {
                message: format!("shell d={d} n={n} holds {estimate} points, cap is {cap}"),
                estimate: Some(estimate),
            });
        }
    }
    let r = isqrt(n) as i64;
    let coords: Vec<i64> = if d == 1 {
        let mut out = Vec::new();
        descend(&mut Vec::new(), n, 1, &mut out);
        out
    } else {
        // Parallel over the first coordinate; chunks are concatenated in order.
        let chunks: Vec<Vec<i64>> = (-r..=r)
            .into_par_iter()
            .map(|m1| {
                let mut out = Vec::new();
                let mut prefix = vec![m1];
                descend(&mut prefix, n - (m1 * m1) as u64, d - 1, &mut out);
                out
            })
            .collect();
        chunks.concat()
    };
    Ok(SphereShell {
        dim: d,
        radius_sq: n,
        coords,
    })
}

/// Observed bracket of `N/n^{(d-2)/2}` over `1 ≤ n ≤ n_max`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityBracket {
    pub lower: f64,
    pub upper: f64,
    pub argmin: u64,
    pub argmax: u64,
}

impl DensityBracket {
    pub fn spread(&self) -> f64 {
        self.upper / self.lower
    }
}

pub fn density_bracket(d: usize, n_max: u64) -> DensityBracket {
    let table = rep_table(d, n_max);
    let exponent = (d as f64 - 2.0) / 2.0;
    let mut b = DensityBracket {
        lower: f64::INFINITY,
        upper: 0.0,
        argmin: 0,
        argmax: 0,
    };
    for n in 1..=n_max {
        let ratio = table[n as usize] as f64 / (n as f64).powf(exponent);
        if ratio < b.lower {
            b.lower = ratio;
            b.argmin = n;
        }
        if ratio > b.upper {
            b.upper = ratio;
            b.argmax = n;
        }
    }
    b
}
