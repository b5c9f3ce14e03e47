use anyhow::{ensure, Result};
use clap::{ArgAction, Parser};
use rayon::prelude::*;
use serde::Serialize;

use sml_core::lattice::{enumerate_sphere, rep_table};

use super::{clap_default, num};
use crate::report::{Report, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(args_override_self = true)]
pub struct LatcountArgs {
    #[arg(long, default_value_t = 5)]
    pub dim: usize,
    #[arg(long, default_value_t = 1)]
    pub min_n: u64,
    #[arg(long, default_value_t = 400)]
    pub max_n: u64,
    /// Largest allowed max/min of `N/n^{(d-2)/2}`; asserted for `d >= 5`.
    #[arg(long, default_value_t = 50.0)]
    pub max_spread: f64,
    /// Enumerate every shell and compare with the counting formula.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub enumerate: bool,
}
clap_default!(LatcountArgs, "latcount");

pub fn run(args: &LatcountArgs, seed: u64) -> Result<Report> {
    ensure!(args.dim >= 1, "dim must be positive");
    ensure!(
        args.min_n >= 1 && args.min_n <= args.max_n,
        "need 1 <= min-n <= max-n"
    );
    let mut report = Report::new("latcount", args, seed);
    let counts = rep_table(args.dim, args.max_n);
    let exponent = (args.dim as f64 - 2.0) / 2.0;
    let mut t = Table::new(&["n", "count", "ratio"]);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in args.min_n..=args.max_n {
        let c = counts[n as usize];
        let ratio = c as f64 / (n as f64).powf(exponent);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        t.push(vec![n.into(), c.into(), num(ratio)]);
    }
    report.set_table(t);
    let spread = hi / lo;
    report.constant("density_lower", lo);
    report.constant("density_upper", hi);
    report.constant("density_spread", spread);
    if args.dim >= 5 {
        report.check_le("density_spread", spread, args.max_spread);
    } else {
        report.observe_le("density_spread", spread, args.max_spread);
    }
    if args.enumerate {
        let mismatches = (args.min_n..=args.max_n)
            .into_par_iter()
            .map(|n| {
                enumerate_sphere(args.dim, n)
                    .map(|s| (s.count() as u64 != counts[n as usize]) as usize)
            })
            .collect::<sml_core::Result<Vec<_>>>()?
            .into_iter()
            .sum();
        report.check_zero("enumeration_matches_count", mismatches);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_has_one_row_per_n() {
        let r = run(&LatcountArgs::default(), 0).unwrap();
        assert_eq!(r.row_count, 400);
        assert_eq!(r.rows[0][1], serde_json::Value::from(10u64));
        assert!(r.passed());
    }
}
