use std::collections::HashMap;

use anyhow::{anyhow, ensure, Result};
use clap::{Parser, ValueEnum};
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;

use sml_core::circle::{farey_arcs, locate, ArcBoundary};
use sml_core::rng::XorShift64Star;

use super::{clap_default, random_unit_rational, ratio_str};
use crate::report::{Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Mediant,
    Midpoint,
}

impl From<Rule> for ArcBoundary {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Mediant => ArcBoundary::Mediant,
            Rule::Midpoint => ArcBoundary::Midpoint,
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rule::Mediant => "mediant",
            Rule::Midpoint => "midpoint",
        })
    }
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(args_override_self = true)]
pub struct FareyArgs {
    /// Arcs are built at level `2^level`.
    #[arg(long, default_value_t = 6)]
    pub level: u32,
    #[arg(long, value_enum, default_value_t = Rule::Mediant)]
    pub rule: Rule,
    /// Random rationals checked against locate.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Largest level used for the random locate checks.
    #[arg(long, default_value_t = 10)]
    pub max_locate_level: u32,
    /// A point `p/q` to locate and report.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
}
clap_default!(FareyArgs, "farey");

pub fn run(args: &FareyArgs, seed: u64) -> Result<Report> {
    let rule: ArcBoundary = args.rule.into();
    let mut report = Report::new("farey", args, seed);
    let arcs = farey_arcs(args.level, rule)?;
    let n = 1i128 << args.level;
    let mut t = Table::new(&["a", "q", "left", "right", "length"]);
    let (mut gaps, mut dirichlet) = (0usize, 0usize);
    let mut total = Ratio::zero();
    for (i, arc) in arcs.iter().enumerate() {
        t.push(vec![
            arc.a.into(),
            arc.q.into(),
            ratio_str(arc.left).into(),
            ratio_str(arc.right).into(),
            ratio_str(arc.length()).into(),
        ]);
        total += arc.length();
        if !(arc.left < arc.center() && arc.center() < arc.right) {
            gaps += 1;
        }
        if i + 1 < arcs.len() && arc.right != arcs[i + 1].left {
            gaps += 1;
        }
        let reach = Ratio::new(1, n * arc.q as i128);
        if (arc.left - arc.center()).abs() > reach || (arc.right - arc.center()).abs() > reach {
            dirichlet += 1;
        }
    }
    if let (Some(first), Some(last)) = (arcs.first(), arcs.last()) {
        if last.right - Ratio::from_integer(1) != first.left {
            gaps += 1;
        }
    }
    report.set_table(t);
    report.constant("arcs", arcs.len() as f64);
    report.check_zero(
        "arcs_tile_circle",
        gaps + (total != Ratio::from_integer(1)) as usize,
    );
    report.check_zero("arc_dirichlet_bound", dirichlet);

    let by_center: HashMap<(u64, u64), usize> = arcs
        .iter()
        .enumerate()
        .map(|(i, a)| ((a.a, a.q), i))
        .collect();
    let mut rng = XorShift64Star::derive(seed, &[0xFA5E]);
    let (mut located_bad, mut outside_arc) = (0usize, 0usize);
    for _ in 0..args.samples {
        let (num, den) = random_unit_rational(&mut rng, 1, 40);
        let x = Ratio::new(num, den);
        let k = rng.below(args.max_locate_level as u64 + 1) as u32;
        let loc = locate(x, k, rule)?;
        if loc.tau.abs() > Ratio::new(1, (1i128 << k) * loc.q as i128) {
            located_bad += 1;
        }
        if k == args.level {
            let arc = &arcs[by_center[&(loc.a, loc.q)]];
            let p = arc.center() + loc.tau;
            if p < arc.left || p > arc.right {
                outside_arc += 1;
            }
        }
    }
    report.check_zero("locate_dirichlet_bound", located_bad);
    report.check_zero("locate_matches_arcs", outside_arc);
    if rule == ArcBoundary::Midpoint {
        report.note("midpoint cells are not guaranteed to keep |tau| <= 1/(q 2^k); the Dirichlet checks may fail");
    }

    if let Some(s) = &args.t {
        let x: Ratio<i128> = s.parse().map_err(|e| anyhow!("--t expects p/q: {e}"))?;
        ensure!(
            x >= Ratio::zero() && x <= Ratio::from_integer(1),
            "--t must lie in [0, 1]"
        );
        let loc = locate(x, args.level, rule)?;
        report.note(format!(
            "t = {} lies on the arc of {}/{} with tau = {}",
            ratio_str(x),
            loc.a,
            loc.q,
            ratio_str(loc.tau)
        ));
        report.constant("t_q", loc.q as f64);
        report.constant("t_tau", loc.tau_f64());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mediant_arcs_pass_and_locate_point() {
        let args = FareyArgs {
            level: 4,
            samples: 500,
            t: Some("3/7".into()),
            ..FareyArgs::default()
        };
        let r = run(&args, 1).unwrap();
        assert!(r.passed(), "{:?}", r.summary_lines());
        assert_eq!(r.constants["t_q"], 7.0);
        assert_eq!(r.constants["t_tau"], 0.0);
    }

    #[test]
    fn bad_point_is_a_usage_error() {
        let args = FareyArgs {
            t: Some("abc".into()),
            ..FareyArgs::default()
        };
        assert!(run(&args, 0).is_err());
    }
}
