//! The acceptance criteria, each mapped onto one or more experiment runs.

use std::time::Instant;

use anyhow::Result;
use clap::Parser;
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use sml_core::numtheory::{q_eta, select_params};
use sml_core::rng::XorShift64Star;

use crate::config::List;
use crate::experiments::{
    clap_default, gauss::GaussArgs, latcount::LatcountArgs, maxop::MaxopArgs, ortho::OrthoArgs,
    stbound::StboundArgs, tailsum::TailsumArgs, telescope::TelescopeArgs,
};
use crate::experiments::{gauss, latcount, maxop, ortho, stbound, tailsum, telescope};
use crate::report::{Report, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    #[arg(long, default_value = "1,2,3,4,5,6,7,8,9")]
    pub criteria: List<u32>,
    /// Seeds the ratio-stability criterion is repeated over.
    #[arg(long, default_value = "0,7")]
    pub stability_seeds: List<u64>,
    /// Random `(η, L)` pairs for the parameter-selection check.
    #[arg(long, default_value_t = 1000)]
    pub param_samples: usize,
}
clap_default!(VerifyArgs, "verify");

pub const TITLES: [&str; 9] = [
    "lattice count bracket",
    "Gauss sum magnitude law",
    "almost-orthogonality partial sums",
    "non-divisor tail ratio",
    "pointwise multiplier bound on arcs",
    "arc-integral decay against goldens",
    "telescoping, averages and localized trend",
    "Hardy-Littlewood domination",
    "parameter selection",
];

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    /// Subdirectory name and report for every run behind the criterion.
    pub parts: Vec<(String, Report)>,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// One status line, then the assertion lines of every part.
    pub fn lines(&self) -> Vec<String> {
        let mut v = vec![format!(
            "criterion {} ({}): {} [{:.1} s]",
            self.id,
            self.title,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds
        )];
        for (name, r) in &self.parts {
            for l in r.summary_lines() {
                v.push(format!("  {name}: {l}"));
            }
        }
        v
    }
}

/// Random `(η, L)` with `L ≥ q_η⁴`, checked against the selection inequalities.
pub fn params_check(samples: usize, seed: u64) -> Result<Report> {
    #[derive(Serialize)]
    struct P {
        samples: usize,
    }
    let mut report = Report::new("params", &P { samples }, seed);
    let mut rng = XorShift64Star::derive(seed, &[0x9A]);
    let mut t = Table::new(&["eta", "l_bits", "j", "k", "ok"]);
    let (mut failures, mut nested) = (0usize, 0usize);
    for _ in 0..samples {
        let den = 1 + rng.below(6);
        let num = 1 + rng.below(den);
        let eta = BigRational::new(num.into(), den.into());
        let base = q_eta(&eta)?.pow(4u32);
        let l = &base * BigUint::from(1 + rng.below(1 << 20)) + BigUint::from(rng.below(1 << 30));
        let p = select_params(&eta, &l)?;
        // η^{-2}L and η^{-2} as exact rationals.
        let inv_sq = (&eta * &eta).recip();
        let x = &inv_sq * BigRational::from_integer(l.clone().into());
        let pow2 = |e: u64| BigRational::from_integer((BigUint::from(1u8) << e).into());
        let k_ok = pow2(p.k) <= x && x < pow2(p.k + 1);
        let j_ok = pow2(p.j) >= inv_sq && (p.j == 0 || pow2(p.j - 1) < inv_sq);
        let scale_ok = p.k >= p.j && (BigUint::from(1u8) << (p.k - p.j)) <= l && p.scale_ok;
        let ok = k_ok && j_ok && scale_ok;
        failures += !ok as usize;
        nested += p.region_nested as usize;
        t.push(vec![
            format!("{num}/{den}").into(),
            l.bits().into(),
            p.j.into(),
            p.k.into(),
            ok.into(),
        ]);
    }
    report.set_table(t);
    report.check_zero("selection_inequalities", failures);
    report.constant(
        "region_nested_fraction",
        nested as f64 / samples.max(1) as f64,
    );
    Ok(report)
}

fn part(name: impl Into<String>, r: Report) -> (String, Report) {
    (name.into(), r)
}

pub fn criterion(id: u32, args: &VerifyArgs, seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let parts = match id {
        1 => vec![part(
            "c1-latcount",
            latcount::run(&LatcountArgs::default(), seed)?,
        )],
        2 => vec![part("c2-gauss", gauss::run(&GaussArgs::default(), seed)?)],
        3 => vec![part("c3-ortho", ortho::run(&OrthoArgs::default(), seed)?)],
        4 => vec![part(
            "c4-tailsum",
            tailsum::run(&TailsumArgs::default(), seed)?,
        )],
        5 => {
            let a = StboundArgs {
                j: List(vec![]),
                k: List(vec![]),
                ..StboundArgs::default()
            };
            vec![part("c5-stbound", stbound::run(&a, seed)?)]
        }
        6 => {
            let a = StboundArgs {
                tuples: 0,
                ..StboundArgs::default()
            };
            args.stability_seeds
                .0
                .iter()
                .map(|&s| Ok(part(format!("c6-stbound-seed{s}"), stbound::run(&a, s)?)))
                .collect::<Result<_>>()?
        }
        7 => {
            let square = TelescopeArgs {
                trend: false,
                ..TelescopeArgs::default()
            };
            let cube = TelescopeArgs {
                dim: 3,
                side: 24,
                ..TelescopeArgs::default()
            };
            let averages = MaxopArgs {
                hl: false,
                ..MaxopArgs::default()
            };
            vec![
                part("c7-telescope-48x48", telescope::run(&square, seed)?),
                part("c7-telescope-24x24x24", telescope::run(&cube, seed)?),
                part("c7-averages", maxop::run(&averages, seed)?),
            ]
        }
        8 => {
            let a = MaxopArgs {
                avg_trials: 0,
                ..MaxopArgs::default()
            };
            vec![part("c8-maxop", maxop::run(&a, seed)?)]
        }
        9 => vec![part("c9-params", params_check(args.param_samples, seed)?)],
        _ => anyhow::bail!("no criterion {id}; criteria are numbered 1 to 9"),
    };
    let passed = parts.iter().all(|(_, r)| r.passed());
    Ok(CriterionOutcome {
        id,
        title: TITLES[id as usize - 1],
        passed,
        parts,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub struct VerifyOutcome {
    pub report: Report,
    pub parts: Vec<(String, Report)>,
    pub outcomes: Vec<CriterionOutcome>,
}

pub fn run(args: &VerifyArgs, seed: u64) -> Result<VerifyOutcome> {
    let mut report = Report::new("verify", args, seed);
    let mut t = Table::new(&["criterion", "title", "passed", "failed_assertions"]);
    let mut outcomes = Vec::new();
    for &id in &args.criteria.0 {
        let o = criterion(id, args, seed)?;
        for line in o.lines() {
            eprintln!("{line}");
        }
        let failed: usize = o
            .parts
            .iter()
            .map(|(_, r)| {
                r.assertions
                    .iter()
                    .filter(|a| !a.passed && !a.report_only)
                    .count()
            })
            .sum();
        t.push(vec![
            id.into(),
            o.title.into(),
            o.passed.into(),
            failed.into(),
        ]);
        report.push_assertion(
            &format!("criterion_{id}"),
            o.passed,
            failed as f64,
            0.0,
            "==",
            false,
        );
        outcomes.push(o);
    }
    report.set_table(t);
    let parts = outcomes
        .iter()
        .flat_map(|o| o.parts.iter().cloned())
        .collect();
    Ok(VerifyOutcome {
        report,
        parts,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_selection_holds() {
        let r = params_check(200, 1).unwrap();
        assert!(r.passed(), "{:?}", r.summary_lines());
        assert_eq!(r.row_count, 200);
    }

    #[test]
    fn unknown_criterion_is_an_error() {
        assert!(criterion(10, &VerifyArgs::default(), 0).is_err());
    }
}
