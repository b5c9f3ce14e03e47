//! Stratified estimate of `∫_0^1 sup_{α ∈ Ω^c_{j,k}} |ŝ_t(α)| dt` in `d` dimensions.
//!
//! The torus sup factorises: `Ω_{j,k}` needs every coordinate near the `q_j`
//! grid, so `sup_{Ω^c} Π_i |θ(α_i)| = F·G^{d−1}` with `G = sup_β |θ(β)|` and
//! `F` the sup over `β` at distance `> 2^{j−k}` from the grid. Both sups are
//! taken over a finite candidate set; the arc integral over `τ` uses a
//! substitution `τ = ±ε(e^u − 1)` and composite Gauss–Legendre in `u`.
//!
//! Strata: `q | q_j` (exhaustive), `q ∤ q_j` with `q ≤ q_cut` (exhaustive),
//! and dyadic bands of `q > q_cut` sampled with weight `∝ q` and reweighted.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arc_theta::ArcThetaFactory;
use super::farey::{arc_of, to_f64, ArcBoundary, FareyArc};
use crate::numtheory::q_depth_u128;
use crate::rng::XorShift64Star;
use crate::spectral::theta::epsilon_of_scale;
use crate::spectral::FreqRegion;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub dim: usize,
    /// Denominators `q ≤ q_cut` are swept exhaustively.
    pub q_cut: u64,
    /// Sampled `(a, q)` pairs per dyadic band above `q_cut`.
    pub samples_per_band: usize,
    /// Peaks `m/q` per arc; all of them when `q` is at most this.
    pub peak_limit: usize,
    /// Peaks that also get the offsets `±√w/2`, `±√w`.
    pub offset_peaks: usize,
    /// Peaks whose nearest `q_j` point gets the two just-outside box points.
    pub boundary_peaks: usize,
    /// Uniform random `β` per arc.
    pub uniform_points: usize,
    /// Panel width in the log variable `u`.
    pub panel_width: f64,
    pub gl_points: usize,
    pub rule: ArcBoundary,
    pub seed: u64,
    /// Maximal number of theta evaluations.
    pub budget: u64,
    pub rel_target: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            dim: 5,
            q_cut: 96,
            samples_per_band: 48,
            peak_limit: 24,
            offset_peaks: 6,
            boundary_peaks: 8,
            uniform_points: 8,
            panel_width: 1.0,
            gl_points: 4,
            rule: ArcBoundary::Mediant,
            seed: 0,
            budget: 4_000_000_000,
            rel_target: 1e-12,
        }
    }
}

impl SamplingPlan {
    pub fn alpha_samples(&self) -> usize {
        self.peak_limit + self.boundary_peaks + self.uniform_points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumReport {
    pub name: String,
    /// Number of `(a, q)` pairs the stratum stands for (coprime or not for sampled bands).
    pub population: f64,
    pub arcs_evaluated: usize,
    pub estimate: f64,
    /// Largest sampled `sup_{Ω^c}|ŝ_t|`.
    pub max_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrataDiagnostics {
    /// `q | q_j`, `|τ| ≤ 2^{j/2}ε`: largest `sup_{Ω^c}|ŝ_t|` seen.
    pub divisor_small_tau_max: f64,
    /// `q | q_j`, `|τ| > 2^{j/2}ε`.
    pub divisor_large_tau_max: f64,
    /// `q ∤ q_j`, all strata.
    pub nondivisor_max: f64,
    /// Largest nearest-`ℓ` Gaussian factor at far `β` on `q | q_j`, `|τ| ≤ 2^{j/2}ε`.
    pub principal_max: f64,
    /// `−ln(principal_max)/2^j`.
    pub principal_c: Option<f64>,
    /// Largest `ℓ ≠ ℓ₀` Gaussian remainder on the same stratum.
    pub nonprincipal_max: f64,
    /// `−log₂(nonprincipal_max)/2^k`; `None` when every remainder underflowed.
    pub nonprincipal_c: Option<f64>,
    /// Largest `|ŝ_t(α)| / refined` over the sampled maximisers.
    pub max_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StBoundReport {
    pub j: u32,
    pub k: u32,
    pub dim: usize,
    pub integral_estimate: f64,
    /// `Σ_arcs |V|·max`, the cruder measure-times-sup sum.
    pub volume_max_estimate: f64,
    pub paper_bound: f64,
    pub ratio: f64,
    pub strata: Vec<StratumReport>,
    pub diagnostics: StrataDiagnostics,
    pub evaluations: u64,
    pub seed: u64,
    pub valid: bool,
    pub note: String,
}

/// `ε^{−(d−2)/2}·2^{−j/2}/j` with `ε = 2^{−2k}`.
pub fn paper_bound(j: u32, k: u32, d: usize) -> f64 {
    ((k as f64) * (d as f64 - 2.0) - j as f64 / 2.0).exp2() / j as f64
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// A candidate `β = num/den`, with its far flag when it does not depend on `τ`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    num: i128,
    den: i128,
    far: bool,
}

struct Context<'a> {
    j: u32,
    k: u32,
    qj: u128,
    epsilon: f64,
    region: FreqRegion,
    plan: &'a SamplingPlan,
    nodes: Vec<(f64, f64)>,
    evals: AtomicU64,
    exhausted: AtomicBool,
}

#[derive(Debug, Clone, Default)]
struct ArcOutcome {
    integral: f64,
    sup_max: f64,
    volume_max: f64,
    small_tau_max: f64,
    large_tau_max: f64,
    principal_max: f64,
    nonprincipal_max: f64,
    slack: f64,
    evaluated: bool,
}

const DEN_FLOAT: i128 = 1 << 52;

impl Context<'_> {
    fn candidate(&self, num: i128, den: i128) -> Candidate {
        let num = num.rem_euclid(den);
        Candidate {
            num,
            den,
            far: !self.region.coord_inside(num, den),
        }
    }

    /// `τ`-independent candidates: peaks, just-outside box points, uniform points.
    fn fixed_candidates(
        &self,
        a: u64,
        q: u64,
        rng: &mut XorShift64Star,
    ) -> (Vec<Candidate>, Vec<i128>) {
        let plan = self.plan;
        let q = q as i128;
        let peaks: Vec<i128> = if (q as usize) <= plan.peak_limit {
            (0..q).collect()
        } else {
            (0..plan.peak_limit)
                .map(|_| rng.below(q as u64) as i128)
                .collect()
        };
        let _ = a;
        let mut out: Vec<Candidate> = peaks.iter().map(|&m| self.candidate(m, q)).collect();
        let qj = self.qj as i128;
        let shift = 12 + self.k - self.j;
        let den = qj << shift;
        let off = ((1i128 << 12) + 1) * qj;
        for &m in peaks.iter().take(plan.boundary_peaks) {
            // nearest q_j grid point G/q_j to m/q
            let g = (2 * m * qj + q).div_euclid(2 * q);
            out.push(self.candidate((g << shift) + off, den));
            out.push(self.candidate((g << shift) - off, den));
        }
        for _ in 0..plan.uniform_points {
            out.push(self.candidate(rng.below(1 << 40) as i128, 1 << 40));
        }
        (out, peaks.into_iter().take(plan.offset_peaks).collect())
    }

    fn arc_integral(
        &self,
        arc: &FareyArc,
        divisor: bool,
        rng: &mut XorShift64Star,
    ) -> Result<ArcOutcome> {
        let plan = self.plan;
        let d = plan.dim as i32;
        let (fixed, offset_peaks) = self.fixed_candidates(arc.a, arc.q, rng);
        let factory = ArcThetaFactory::new(arc.a, arc.q, self.epsilon, plan.rel_target)?;
        let eps = self.epsilon;
        let small_tau = (self.j as f64 / 2.0).exp2() * eps;
        let qf = arc.q as f64;
        let (lo, hi) = arc.tau_range();
        let mut out = ArcOutcome {
            evaluated: true,
            ..Default::default()
        };
        let mut cands = fixed.clone();
        for (sign, end) in [(-1.0, -lo), (1.0, hi)] {
            if end <= 0.0 {
                continue;
            }
            let u_end = (end / eps).ln_1p();
            let panels = (u_end / plan.panel_width).ceil().max(1.0) as usize;
            let h = u_end / panels as f64;
            for p in 0..panels {
                let (u0, u1) = (p as f64 * h, (p + 1) as f64 * h);
                for &(x, w) in &self.nodes {
                    let u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * x;
                    let jac = eps * u.exp() * 0.5 * (u1 - u0);
                    let tau = sign * eps * u.exp_m1();
                    let th = factory.at(tau)?;
                    let width = th.width_sq().sqrt();
                    cands.truncate(fixed.len());
                    for &m in &offset_peaks {
                        let centre = m as f64 / qf;
                        for c in [-1.0, -0.5, 0.5, 1.0] {
                            let beta = (centre + c * width).rem_euclid(1.0);
                            cands.push(
                                self.candidate(
                                    (beta * DEN_FLOAT as f64).round() as i128,
                                    DEN_FLOAT,
                                ),
                            );
                        }
                    }
                    let refined_unit = qf.powf(-0.5) * (eps + tau.abs()).powf(-0.5);
                    let (mut g, mut g_ratio, mut f, mut f_ratio) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
                    let small = tau.abs() <= small_tau;
                    for c in &cands {
                        let v = th.eval_exact(c.num, c.den);
                        let norm = v.value.norm();
                        let ratio = if v.mass > 0.0 {
                            norm / (refined_unit * v.mass)
                        } else {
                            0.0
                        };
                        if norm > g {
                            g = norm;
                            g_ratio = ratio;
                        }
                        if c.far {
                            if norm > f {
                                f = norm;
                                f_ratio = ratio;
                            }
                            if divisor && small {
                                out.principal_max = out.principal_max.max(v.principal);
                            }
                        }
                        if divisor && small {
                            out.nonprincipal_max = out.nonprincipal_max.max(v.nonprincipal());
                        }
                    }
                    let sup = f * g.powi(d - 1);
                    out.integral += w * jac * sup;
                    out.sup_max = out.sup_max.max(sup);
                    if sup > 0.0 {
                        out.slack = out.slack.max(f_ratio * g_ratio.powi(d - 1));
                    }
                    if divisor {
                        if small {
                            out.small_tau_max = out.small_tau_max.max(sup);
                        } else {
                            out.large_tau_max = out.large_tau_max.max(sup);
                        }
                    }
                    let n = self.evals.fetch_add(cands.len() as u64, Ordering::Relaxed)
                        + cands.len() as u64;
                    if n > plan.budget {
                        self.exhausted.store(true, Ordering::Relaxed);
                    }
                }
            }
        }
        out.volume_max = to_f64(arc.length()) * out.sup_max;
        Ok(out)
    }
}

/// Samples an integer `q ∈ (lo, hi]` with probability `∝ q`.
fn sample_weighted_q(rng: &mut XorShift64Star, lo: u64, hi: u64) -> u64 {
    let c = |q: u64| (q as u128 * (q as u128 + 1) - lo as u128 * (lo as u128 + 1)) / 2;
    let total = c(hi);
    let r = ((rng.next_u64() as u128) << 64 | rng.next_u64() as u128) % total;
    // smallest q with c(q) > r
    let approx = ((2.0 * r as f64 + (lo as f64) * (lo as f64 + 1.0)).sqrt()) as u64;
    let mut q = approx.clamp(lo + 1, hi);
    while q > lo + 1 && c(q - 1) > r {
        q -= 1;
    }
    while c(q) <= r {
        q += 1;
    }
    q
}

enum Stratum {
    Divisor,
    Exhaustive,
    Band { lo: u64, hi: u64 },
}

fn divisors(n: u128) -> Vec<u64> {
    (1..=n as u64).filter(|d| n % *d as u128 == 0).collect()
}

/// Estimates the arc integral and the per-stratum diagnostics.
pub fn stbound_ratio(j: u32, k: u32, plan: &SamplingPlan) -> Result<StBoundReport> {
    if j < 1 || (1u64 << (j + 2)) > k as u64 {
        return Err(Error::param(format!(
            "stbound needs 1 <= j <= log2(k) - 2, got j={j}, k={k}"
        )));
    }
    if k > 40 || plan.dim == 0 || plan.gl_points == 0 || !(plan.panel_width > 0.0) {
        return Err(Error::param("stbound plan out of range"));
    }
    let epsilon = epsilon_of_scale(k);
    let bound = paper_bound(j, k, plan.dim);
    let n = 1u64 << k;
    let qj = q_depth_u128(j)?;

    let empty_diag = StrataDiagnostics {
        divisor_small_tau_max: 0.0,
        divisor_large_tau_max: 0.0,
        nondivisor_max: 0.0,
        principal_max: 0.0,
        principal_c: None,
        nonprincipal_max: 0.0,
        nonprincipal_c: None,
        max_slack: 0.0,
    };
    if plan.alpha_samples() == 0 {
        return Ok(StBoundReport {
            j,
            k,
            dim: plan.dim,
            integral_estimate: 0.0,
            volume_max_estimate: 0.0,
            paper_bound: bound,
            ratio: 0.0,
            strata: Vec::new(),
            diagnostics: empty_diag,
            evaluations: 0,
            seed: plan.seed,
            valid: false,
            note: "plan has no α samples; the empty sup is not an estimate".into(),
        });
    }

    let ctx = Context {
        j,
        k,
        qj,
        epsilon,
        region: FreqRegion::new(j, k)?,
        plan,
        nodes: gauss_legendre(plan.gl_points),
        evals: AtomicU64::new(0),
        exhausted: AtomicBool::new(false),
    };

    let divs: Vec<u64> = divisors(qj).into_iter().filter(|&q| q <= n).collect();
    let cut = plan.q_cut.min(n);
    let mut tasks: Vec<(usize, u64, u64)> = Vec::new();
    let mut strata: Vec<(String, Stratum)> = vec![
        (format!("q|q_{j}"), Stratum::Divisor),
        (format!("q!|q_{j},q<={cut}"), Stratum::Exhaustive),
    ];
    for &q in &divs {
        for a in 1..=q {
            if a.gcd(&q) == 1 {
                tasks.push((0, a, q));
            }
        }
    }
    for q in 1..=cut {
        if qj % q as u128 == 0 {
            continue;
        }
        for a in 1..=q {
            if a.gcd(&q) == 1 {
                tasks.push((1, a, q));
            }
        }
    }
    let mut lo = cut;
    while lo < n {
        let hi = (2 * lo).min(n);
        strata.push((format!("band({lo},{hi}]"), Stratum::Band { lo, hi }));
        lo = hi;
    }

    let run = |stratum: usize, a: u64, q: u64, rng: &mut XorShift64Star| -> Result<ArcOutcome> {
        if ctx.exhausted.load(Ordering::Relaxed) {
            return Ok(ArcOutcome::default());
        }
        let arc = arc_of(a, q, k, plan.rule)?;
        ctx.arc_integral(&arc, stratum == 0, rng)
    };

    let exhaustive: Vec<ArcOutcome> = tasks
        .par_iter()
        .map(|&(s, a, q)| {
            let mut rng = XorShift64Star::derive(plan.seed, &[s as u64, a, q]);
            run(s, a, q, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut reports: Vec<StratumReport> = Vec::new();
    let mut diag = empty_diag;
    let mut total = 0.0;
    let mut volume_total = 0.0;
    let absorb = |o: &ArcOutcome, divisor: bool, diag: &mut StrataDiagnostics| {
        diag.max_slack = diag.max_slack.max(o.slack);
        if divisor {
            diag.divisor_small_tau_max = diag.divisor_small_tau_max.max(o.small_tau_max);
            diag.divisor_large_tau_max = diag.divisor_large_tau_max.max(o.large_tau_max);
            diag.principal_max = diag.principal_max.max(o.principal_max);
            diag.nonprincipal_max = diag.nonprincipal_max.max(o.nonprincipal_max);
        } else {
            diag.nondivisor_max = diag.nondivisor_max.max(o.sup_max);
        }
    };

    for (s, (name, _)) in strata.iter().enumerate().take(2) {
        let mut r = StratumReport {
            name: name.clone(),
            population: 0.0,
            arcs_evaluated: 0,
            estimate: 0.0,
            max_sup: 0.0,
        };
        for (t, o) in tasks.iter().zip(&exhaustive) {
            if t.0 != s {
                continue;
            }
            absorb(o, s == 0, &mut diag);
            r.population += 1.0;
            r.arcs_evaluated += o.evaluated as usize;
            r.estimate += o.integral;
            r.max_sup = r.max_sup.max(o.sup_max);
            volume_total += o.volume_max;
        }
        total += r.estimate;
        reports.push(r);
    }

    for (b, (name, stratum)) in strata.iter().enumerate().skip(2) {
        let Stratum::Band { lo, hi } = *stratum else {
            continue;
        };
        let mut rng = XorShift64Star::derive(plan.seed, &[0xba4d, b as u64]);
        let draws: Vec<(u64, u64, XorShift64Star)> = (0..plan.samples_per_band)
            .map(|i| {
                let q = sample_weighted_q(&mut rng, lo, hi);
                let a = 1 + rng.below(q);
                (
                    a,
                    q,
                    XorShift64Star::derive(plan.seed, &[0xa4c, b as u64, i as u64]),
                )
            })
            .collect();
        let outcomes: Vec<ArcOutcome> = draws
            .into_par_iter()
            .map(|(a, q, mut r)| {
                if a.gcd(&q) != 1 || qj % q as u128 == 0 {
                    return Ok(ArcOutcome {
                        evaluated: true,
                        ..Default::default()
                    });
                }
                run(2, a, q, &mut r)
            })
            .collect::<Result<_>>()?;
        let pairs = {
            let c = |q: u64| q as f64 * (q as f64 + 1.0) / 2.0;
            c(hi) - c(lo)
        };
        let m = outcomes.len().max(1) as f64;
        let mut r = StratumReport {
            name: name.clone(),
            population: pairs,
            arcs_evaluated: 0,
            estimate: 0.0,
            max_sup: 0.0,
        };
        let mut vol = 0.0;
        for o in &outcomes {
            absorb(o, false, &mut diag);
            r.arcs_evaluated += o.evaluated as usize;
            r.estimate += o.integral;
            r.max_sup = r.max_sup.max(o.sup_max);
            vol += o.volume_max;
        }
        r.estimate *= pairs / m;
        volume_total += vol * pairs / m;
        total += r.estimate;
        reports.push(r);
    }

    diag.principal_c =
        (diag.principal_max > 0.0).then(|| -diag.principal_max.ln() / (j as f64).exp2());
    diag.nonprincipal_c =
        (diag.nonprincipal_max > 0.0).then(|| -diag.nonprincipal_max.log2() / (k as f64).exp2());

    let report = StBoundReport {
        j,
        k,
        dim: plan.dim,
        integral_estimate: total,
        volume_max_estimate: volume_total,
        paper_bound: bound,
        ratio: total / bound,
        strata: reports,
        diagnostics: diag,
        evaluations: ctx.evals.load(Ordering::Relaxed),
        seed: plan.seed,
        valid: total > 0.0,
        note: "sampled sup over a finite candidate set; under-estimates the true sup".into(),
    };
    if ctx.exhausted.load(Ordering::Relaxed) {
        let mut partial = report;
        partial.valid = false;
        partial.note = format!(
            "budget of {} theta evaluations exhausted; partial sums only",
            plan.budget
        );
        return Err(Error::BudgetExhausted {
            partial: Box::new(partial),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rules_integrate_polynomials() {
        for n in 1..=8 {
            let rule = gauss_legendre(n);
            let wsum: f64 = rule.iter().map(|r| r.1).sum();
            assert!((wsum - 2.0).abs() < 1e-13);
            // exact for degree 2n − 1
            let deg = 2 * n - 2;
            let integral: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((integral - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn paper_bound_decreases_in_j() {
        for k in [16u32, 32] {
            assert!(paper_bound(1, k, 5) > paper_bound(2, k, 5));
            assert!(paper_bound(2, k, 5) > paper_bound(3, k, 5));
        }
        assert!((paper_bound(1, 8, 5) - 2f64.powf(24.0 - 0.5)).abs() < 1e-6);
    }

    #[test]
    fn weighted_q_sampler_hits_range() {
        let mut rng = XorShift64Star::new(3);
        let mut counts = [0u32; 4];
        for _ in 0..40_000 {
            let q = sample_weighted_q(&mut rng, 4, 8);
            assert!((5..=8).contains(&q));
            counts[(q - 5) as usize] += 1;
        }
        // P(q) = q/26
        for (i, c) in counts.iter().enumerate() {
            let p = (5 + i) as f64 / 26.0;
            assert!((*c as f64 / 40_000.0 - p).abs() < 0.01);
        }
    }

    #[test]
    fn degenerate_plan_is_flagged() {
        let plan = SamplingPlan {
            peak_limit: 0,
            boundary_peaks: 0,
            uniform_points: 0,
            ..Default::default()
        };
        let r = stbound_ratio(1, 8, &plan).unwrap();
        assert_eq!(r.integral_estimate, 0.0);
        assert!(!r.valid);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(stbound_ratio(1, 7, &SamplingPlan::default()).is_err());
        assert!(stbound_ratio(0, 8, &SamplingPlan::default()).is_err());
    }

    #[test]
    fn tiny_budget_returns_partial() {
        let plan = SamplingPlan {
            budget: 1000,
            ..Default::default()
        };
        match stbound_ratio(1, 8, &plan) {
            Err(Error::BudgetExhausted { partial }) => assert!(!partial.valid),
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
