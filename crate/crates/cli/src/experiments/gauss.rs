use anyhow::{ensure, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use sml_core::circle::gauss::gauss_magnitude_sq_law;
use sml_core::circle::{gauss_sum, gauss_sum_compensated};
use sml_core::numtheory::coprime;

use super::{clap_default, num};
use crate::report::{Report, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(args_override_self = true)]
pub struct GaussArgs {
    #[arg(long, default_value_t = 200)]
    pub qmax: u64,
    /// Relative tolerance on `|G|²` against the magnitude law.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}
clap_default!(GaussArgs, "gauss");

struct Row {
    q: u64,
    a: u64,
    abs_g: f64,
    law_err: f64,
    route_err: f64,
}

pub fn run(args: &GaussArgs, seed: u64) -> Result<Report> {
    ensure!(args.qmax >= 1, "qmax must be positive");
    let mut report = Report::new("gauss", args, seed);
    let rows: Vec<Vec<Row>> = (1..=args.qmax)
        .into_par_iter()
        .map(|q| {
            (1..=q)
                .filter(|&a| coprime(a, q))
                .map(|a| {
                    let g = gauss_sum(a as i64, q)?;
                    let h = gauss_sum_compensated(a as i64, q)?;
                    let law = gauss_magnitude_sq_law(q);
                    Ok(Row {
                        q,
                        a,
                        abs_g: g.norm(),
                        law_err: (g.norm_sqr() - law).abs() / law.max(q as f64),
                        route_err: (g - h).norm() / (q as f64).sqrt(),
                    })
                })
                .collect::<sml_core::Result<Vec<_>>>()
        })
        .collect::<sml_core::Result<_>>()?;
    let mut t = Table::new(&["q", "a", "abs_g", "expected_abs_g", "rel_err"]);
    let (mut worst_law, mut worst_route) = (0.0f64, 0.0f64);
    for r in rows.iter().flatten() {
        worst_law = worst_law.max(r.law_err);
        worst_route = worst_route.max(r.route_err);
        t.push(vec![
            r.q.into(),
            r.a.into(),
            num(r.abs_g),
            num(gauss_magnitude_sq_law(r.q).sqrt()),
            num(r.law_err),
        ]);
    }
    report.set_table(t);
    report.check_le("magnitude_law", worst_law, args.tol);
    report.check_le("compensated_route_agreement", worst_route, args.tol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qmax_one_gives_single_unit_row() {
        let r = run(&GaussArgs { qmax: 1, tol: 1e-9 }, 0).unwrap();
        assert_eq!(r.row_count, 1);
        assert_eq!(r.rows[0][0], serde_json::Value::from(1u64));
        assert_eq!(r.rows[0][1], serde_json::Value::from(1u64));
        assert!((r.rows[0][2].as_f64().unwrap() - 1.0).abs() < 1e-15);
        assert!(r.passed());
    }
}
