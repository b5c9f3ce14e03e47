use anyhow::{ensure, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use sml_core::numtheory::{max_prime_power_table, tail_sum_with_table, TailSum};

use super::{clap_default, num};
use crate::config::List;
use crate::report::{Report, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(args_override_self = true)]
pub struct TailsumArgs {
    #[arg(long, default_value = "1.5,2,2.5")]
    pub r: List<f64>,
    #[arg(long, default_value_t = 4)]
    pub k_min: u64,
    #[arg(long, default_value_t = 64)]
    pub k_max: u64,
    #[arg(long, default_value_t = 100_000)]
    pub q_max: u64,
    /// Bound on `sum · k^{r-1} · ln k`.
    #[arg(long, default_value_t = 50.0)]
    pub bound: f64,
    /// Truncation bound must stay below this fraction of the sum for `r >= 2`.
    #[arg(long, default_value_t = 0.01)]
    pub truncation_fraction: f64,
    /// Monotonicity in `k` is checked from here to `k-max`.
    #[arg(long, default_value_t = 2)]
    pub monotone_from: u64,
}
clap_default!(TailsumArgs, "tailsum");

pub fn run(args: &TailsumArgs, seed: u64) -> Result<Report> {
    ensure!(
        args.k_min >= 2 && args.k_min <= args.k_max,
        "need 2 <= k-min <= k-max"
    );
    ensure!(
        args.monotone_from >= 1 && args.k_max <= args.q_max,
        "need 1 <= monotone-from and k-max <= q-max"
    );
    let mut report = Report::new("tailsum", args, seed);
    let table = max_prime_power_table(args.q_max);
    let mut t = Table::new(&["r", "k", "sum", "truncation_bound", "ratio"]);
    let lo = args.monotone_from.min(args.k_min);
    for &r in &args.r.0 {
        let sums: Vec<TailSum> = (lo..=args.k_max)
            .into_par_iter()
            .map(|k| tail_sum_with_table(r, k, args.q_max, &table))
            .collect::<sml_core::Result<_>>()?;
        let at = |k: u64| &sums[(k - lo) as usize];
        let increases = (args.monotone_from.max(lo)..args.k_max)
            .filter(|&k| at(k + 1).sum > at(k).sum)
            .count();
        let (mut worst, mut worst_frac) = (0.0f64, 0.0f64);
        for k in args.k_min..=args.k_max {
            let s = at(k);
            let ratio = s.sum * (k as f64).powf(r - 1.0) * (k as f64).ln();
            worst = worst.max(ratio);
            worst_frac = worst_frac.max(s.truncation_bound / s.sum);
            t.push(vec![
                num(r),
                k.into(),
                num(s.sum),
                num(s.truncation_bound),
                num(ratio),
            ]);
        }
        report.constant(&format!("c_r{r}"), worst);
        report.check_le(&format!("lemma2_ratio_r{r}"), worst, args.bound);
        report.check_zero(&format!("monotone_in_k_r{r}"), increases);
        if r >= 2.0 {
            report.push_assertion(
                &format!("truncation_small_r{r}"),
                worst_frac < args.truncation_fraction,
                worst_frac,
                args.truncation_fraction,
                "<",
                false,
            );
        } else {
            report.constant(&format!("truncation_fraction_r{r}"), worst_frac);
        }
    }
    report.set_table(t);
    Ok(report)
}
