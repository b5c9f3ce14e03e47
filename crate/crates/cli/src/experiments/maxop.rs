use anyhow::{ensure, Result};
use clap::{ArgAction, Parser};
use rayon::prelude::*;
use serde::Serialize;

use sml_core::lattice::enumerate_sphere;
use sml_core::numtheory::q_depth_u128;
use sml_core::rng::XorShift64Star;
use sml_core::signals::{depth_of_scale, MaximalOps, PeriodicSignal, SparseSignal};
use sml_core::spectral::{avg_multiplier, fourier_eval, FreqRegion, TorusPoint};

use super::{clap_default, num, random_unit_rational};
use crate::config::List;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(args_override_self = true)]
pub struct MaxopArgs {
    /// Dyadic blocks for the Hardy–Littlewood comparison.
    #[arg(long, default_value = "4,5,6,7,8")]
    pub k: List<u32>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Random signals per block, cycling through dense, spiky and single-point shapes.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Random evaluation points per signal, on top of the spike locations.
    #[arg(long, default_value_t = 128)]
    pub points: usize,
    #[arg(long, default_value_t = 100.0)]
    pub ratio_bound: f64,
    /// Compare against the Hardy–Littlewood maximal function.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub hl: bool,
    /// Random sparse signals for the average checks; 0 skips them.
    #[arg(long, default_value_t = 100)]
    pub avg_trials: usize,
    #[arg(long, default_value_t = 50)]
    pub avg_max_radius_sq: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub identity_tol: f64,
}
clap_default!(MaxopArgs, "maxop");

/// Smallest `N ≥ 2^{k+2} + 1` divisible by `q_{J_k}`.
pub fn grid_side(k: u32) -> Result<usize> {
    let q = q_depth_u128(depth_of_scale(k)?)? as usize;
    let min = (1usize << (k + 2)) + 1;
    Ok(min.div_ceil(q) * q)
}

const SHAPES: [&str; 3] = ["dense", "spikes", "single"];

fn random_signal(
    rng: &mut XorShift64Star,
    dim: usize,
    side: usize,
    shape: usize,
) -> (PeriodicSignal, Vec<Vec<i64>>) {
    let len = side.pow(dim as u32);
    let mut f = PeriodicSignal::zeros(dim, side);
    let mut spikes = Vec::new();
    match shape {
        0 => f.values_mut().iter_mut().for_each(|v| *v = rng.next_f64()),
        _ => {
            let count = if shape == 1 { 8 } else { 1 };
            for _ in 0..count {
                let i = rng.below(len as u64) as usize;
                f.values_mut()[i] += 0.5 + rng.next_f64();
                spikes.push(f.point_of(i));
            }
        }
    }
    (f, spikes)
}

struct HlRow {
    k: u32,
    side: usize,
    trial: usize,
    points: usize,
    max_ratio: f64,
}

fn hl_trial(args: &MaxopArgs, k: u32, side: usize, trial: usize, seed: u64) -> Result<HlRow> {
    let mut rng = XorShift64Star::derive(seed, &[0x41, k as u64, trial as u64]);
    let shape = trial % SHAPES.len();
    let (f, spikes) = random_signal(&mut rng, args.dim, side, shape);
    let smooth = f.apply_region(&FreqRegion::new(0, k)?);
    let mut points: Vec<Vec<i64>> = (0..args.points)
        .map(|_| f.point_of(rng.below(f.len() as u64) as usize))
        .collect();
    let half = (side / 2) as i64;
    for s in &spikes {
        points.push(s.clone());
        points.push(s.iter().map(|c| c + half).collect());
    }
    let lhs = smooth.dyadic_max_at(k, &points)?;
    let rhs = f.hl_max_at(k + 1, &points)?;
    let max_ratio = lhs
        .iter()
        .zip(&rhs)
        .filter(|(_, h)| **h > 0.0)
        .map(|(m, h)| m / h)
        .fold(0.0, f64::max);
    Ok(HlRow {
        k,
        side,
        trial,
        points: points.len(),
        max_ratio,
    })
}

struct AvgRow {
    dim: usize,
    radius_sq: u64,
    norm_ratio: f64,
    identity_err: f64,
}

fn avg_trial(args: &MaxopArgs, i: usize, seed: u64) -> Result<AvgRow> {
    let mut rng = XorShift64Star::derive(seed, &[0xA7, i as u64]);
    let dim = [2usize, 3, 5][i % 3];
    let shell = loop {
        let n = 1 + rng.below(args.avg_max_radius_sq);
        let s = enumerate_sphere(dim, n)?;
        if !s.is_empty() {
            break s;
        }
    };
    let mut f = SparseSignal::new(dim);
    for _ in 0..1 + rng.below(8) {
        let p: Vec<i64> = (0..dim).map(|_| rng.range_inclusive(-6, 6)).collect();
        f.add(&p, rng.range_inclusive(-9, 9) as f64);
    }
    if f.is_empty() {
        f.insert(vec![0; dim], 1.0);
    }
    let a = f.spherical_average(&shell)?;
    let parts: Vec<(i128, i128)> = (0..dim)
        .map(|_| random_unit_rational(&mut rng, 1, 40))
        .collect();
    let alpha = TorusPoint::new(&parts)?;
    let lhs = fourier_eval(&a, &alpha)?;
    let rhs = avg_multiplier(&shell, &alpha)? * fourier_eval(&f, &alpha)?;
    Ok(AvgRow {
        dim,
        radius_sq: a_radius(&shell),
        norm_ratio: a.norm_l2() / f.norm_l2(),
        identity_err: (lhs - rhs).norm(),
    })
}

fn a_radius(shell: &sml_core::lattice::SphereShell) -> u64 {
    let p = shell.point(0);
    p.iter().map(|c| (c * c) as u64).sum()
}

pub fn run(args: &MaxopArgs, seed: u64) -> Result<Report> {
    ensure!(args.dim >= 1, "dim must be positive");
    let mut report = Report::new("maxop", args, seed);
    let mut t = Table::new(&["k", "side", "trial", "shape", "points", "max_ratio"]);
    if args.hl {
        let mut worst = 0.0f64;
        for &k in &args.k.0 {
            ensure!(k >= 4, "the smoothed comparison needs k >= 4");
            let side = grid_side(k)?;
            let rows: Vec<HlRow> = (0..args.trials)
                .into_par_iter()
                .map(|i| hl_trial(args, k, side, i, seed))
                .collect::<Result<_>>()?;
            let mut block = 0.0f64;
            for r in rows {
                block = block.max(r.max_ratio);
                t.push(vec![
                    r.k.into(),
                    r.side.into(),
                    r.trial.into(),
                    SHAPES[r.trial % SHAPES.len()].into(),
                    r.points.into(),
                    num(r.max_ratio),
                ]);
            }
            report.constant(&format!("hl_ratio_k{k}"), block);
            worst = worst.max(block);
        }
        report.constant("hl_ratio_max", worst);
        report.check_le("hl_domination", worst, args.ratio_bound);
    }
    report.set_table(t);

    if args.avg_trials > 0 {
        let rows: Vec<AvgRow> = (0..args.avg_trials)
            .into_par_iter()
            .map(|i| avg_trial(args, i, seed))
            .collect::<Result<_>>()?;
        let mut t = Table::new(&["trial", "dim", "radius_sq", "norm_ratio", "identity_err"]);
        let (mut norm, mut err) = (0.0f64, 0.0f64);
        for (i, r) in rows.iter().enumerate() {
            norm = norm.max(r.norm_ratio);
            err = err.max(r.identity_err);
            t.push(vec![
                i.into(),
                r.dim.into(),
                r.radius_sq.into(),
                num(r.norm_ratio),
                num(r.identity_err),
            ]);
        }
        report.tables.insert("averages".into(), t);
        report.check_le("contractivity", norm, 1.0);
        report.check_le("multiplier_identity", err, args.identity_tol);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sides_respect_divisibility() {
        assert_eq!(grid_side(4).unwrap(), 65);
        assert_eq!(grid_side(8).unwrap(), 1026);
        assert_eq!(grid_side(16).unwrap(), 262_152);
    }

    #[test]
    fn small_block_passes() {
        let args = MaxopArgs {
            k: List(vec![4]),
            points: 32,
            avg_trials: 12,
            ..MaxopArgs::default()
        };
        let r = run(&args, 2).unwrap();
        assert_eq!(r.row_count, 3);
        assert!(r.passed(), "{:?}", r.summary_lines());
    }
}
