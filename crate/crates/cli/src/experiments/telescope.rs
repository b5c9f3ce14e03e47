use anyhow::{ensure, Result};
use clap::{ArgAction, Parser};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use sml_core::numtheory::q_depth_u128;
use sml_core::rng::XorShift64Star;
use sml_core::signals::{telescope_decompose, MaximalOps, PeriodicSignal};
use sml_core::spectral::FreqRegion;

use super::{clap_default, num};
use crate::config::List;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(args_override_self = true)]
pub struct TelescopeArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 48)]
    pub side: usize,
    #[arg(long, default_value_t = 16)]
    pub k: u32,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Allowed reconstruction error relative to `‖f‖₂`.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Median `‖M_0 f‖₂/‖f‖₂` over localized `f` on `(Z/(8 q_j)Z)^d`; reported only.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub trend: bool,
    #[arg(long, default_value = "0,1,2")]
    pub trend_depths: List<u32>,
    #[arg(long, default_value_t = 3)]
    pub trend_dim: usize,
    #[arg(long, default_value_t = 16)]
    pub trend_trials: usize,
}
clap_default!(TelescopeArgs, "telescope");

fn random_periodic(rng: &mut XorShift64Star, dim: usize, side: usize) -> PeriodicSignal {
    let values = (0..side.pow(dim as u32)).map(|_| rng.normal()).collect();
    PeriodicSignal::from_values(dim, side, values).expect("length matches")
}

/// Median of `‖M_0 f‖₂/‖f‖₂` for `f` with `f̂ = 0` on the `1/(4q_j)`-boxes around `q_j^{-1}Z^d`.
pub fn localized_norm_ratio(j: u32, dim: usize, trials: usize, seed: u64) -> Result<(usize, f64)> {
    let q = q_depth_u128(j)?;
    let side = 8 * q as usize;
    let region = FreqRegion::with_halfwidth(q, Ratio::new(1, 4 * q))?;
    let mut ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = XorShift64Star::derive(seed, &[0x7E, j as u64, i as u64]);
            let f = random_periodic(&mut rng, dim, side).remove_region(&region);
            Ok(f.dyadic_max(0)?.norm_l2() / f.norm_l2())
        })
        .collect::<Result<_>>()?;
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    let median = if n % 2 == 1 {
        ratios[n / 2]
    } else {
        0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
    };
    Ok((side, median))
}

pub fn run(args: &TelescopeArgs, seed: u64) -> Result<Report> {
    ensure!(
        args.dim >= 1 && args.side >= 1,
        "dim and side must be positive"
    );
    let mut report = Report::new("telescope", args, seed);
    let mut t = Table::new(&[
        "trial",
        "norm_f",
        "pieces",
        "reconstruction_error",
        "relative_error",
    ]);
    let mut pieces = Table::new(&["trial", "piece", "norm_l2"]);
    let mut worst = 0.0f64;
    for trial in 0..args.trials {
        let mut rng = XorShift64Star::derive(seed, &[0x7C, trial as u64]);
        let f = random_periodic(&mut rng, args.dim, args.side);
        let d = telescope_decompose(&f, args.k)?;
        let rel = d.reconstruction_error / f.norm_l2();
        worst = worst.max(rel);
        t.push(vec![
            trial.into(),
            num(f.norm_l2()),
            d.pieces.len().into(),
            num(d.reconstruction_error),
            num(rel),
        ]);
        for (i, n) in d.piece_norms().into_iter().enumerate() {
            pieces.push(vec![trial.into(), i.into(), num(n)]);
        }
    }
    report.set_table(t);
    report.tables.insert("pieces".into(), pieces);
    report.check_le("reconstruction", worst, args.tol);

    if args.trend && args.trend_trials > 0 {
        let mut trend = Table::new(&["j", "side", "trials", "median_ratio"]);
        let mut medians = Vec::new();
        for &j in &args.trend_depths.0 {
            let (side, m) = localized_norm_ratio(j, args.trend_dim, args.trend_trials, seed)?;
            trend.push(vec![
                j.into(),
                side.into(),
                args.trend_trials.into(),
                num(m),
            ]);
            report.constant(&format!("trend_median_j{j}"), m);
            medians.push(m);
        }
        let increases = medians.windows(2).filter(|w| w[1] > w[0]).count();
        report.observe_le("trend_increases", increases as f64, 0.0);
        report.tables.insert("trend".into(), trend);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cube_reconstructs() {
        let args = TelescopeArgs {
            dim: 3,
            side: 24,
            trials: 2,
            trend_trials: 3,
            ..TelescopeArgs::default()
        };
        let r = run(&args, 4).unwrap();
        assert!(r.passed(), "{:?}", r.summary_lines());
        assert_eq!(r.tables["trend"].row_count, 3);
    }

    #[test]
    fn bad_side_is_rejected() {
        let args = TelescopeArgs {
            side: 50,
            ..TelescopeArgs::default()
        };
        assert!(run(&args, 0).is_err());
    }
}
