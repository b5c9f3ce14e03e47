use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use sml_core::circle::{farey_arcs, gauss_sum, locate, ArcBoundary};
use sml_core::lattice::{count_reps, density_bracket, enumerate_sphere};
use sml_core::numtheory::{classify_nondivisor, lcm_range, q_of_depth, tail_sum};
use sml_core::signals::{MaximalOps, PeriodicSignal, SparseSignal};
use sml_core::spectral::theta::tail_bound;
use sml_core::spectral::{
    avg_multiplier, fourier_eval, omega_member, sampling_multiplier, theta_1d, FreqRegion,
    TorusPoint, MAX_REGION_DEPTH,
};

fn sparse(dim: usize, entries: &[(Vec<i64>, i64)]) -> SparseSignal {
    let mut f = SparseSignal::new(dim);
    for (p, v) in entries {
        f.add(&p[..dim], *v as f64);
    }
    f
}

fn entries() -> impl Strategy<Value = Vec<(Vec<i64>, i64)>> {
    prop::collection::vec((prop::collection::vec(-6i64..=6, 5), -9i64..=9), 1..8)
}

fn torus_point(dim: usize) -> impl Strategy<Value = Vec<(i128, i128)>> {
    prop::collection::vec((1i128..1 << 20).prop_flat_map(|d| (0..d, Just(d))), dim)
}

#[test]
fn tower_contains_every_small_modulus() {
    for j in 0..=6u32 {
        let qj = q_of_depth(j).unwrap();
        for q in 1..=(1u64 << j) {
            assert!(qj.divides(q), "q={q} j={j}");
        }
    }
}

#[test]
fn lemma2_ratio_stays_bounded() {
    for r in [1.5, 2.0, 2.5] {
        let worst = (4..=64u64)
            .map(|k| {
                tail_sum(r, k, 100_000).unwrap().sum * (k as f64).powf(r - 1.0) * (k as f64).ln()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 50.0, "r={r} worst={worst}");
    }
}

#[test]
fn enumeration_matches_count_up_to_dim_five() {
    for d in 1..=5 {
        let step = if d == 5 { 7 } else { 1 };
        for n in (0..=400u64).step_by(step) {
            assert_eq!(
                enumerate_sphere(d, n).unwrap().count() as u64,
                count_reps(d, n),
                "d={d} n={n}"
            );
        }
    }
}

#[test]
fn density_bracket_is_narrow_in_dim_five() {
    let b = density_bracket(5, 400);
    assert!(b.lower > 0.0);
    assert!(b.spread() <= 50.0, "spread {}", b.spread());
}

#[test]
fn arcs_tile_the_circle_under_both_rules() {
    for rule in [ArcBoundary::Mediant, ArcBoundary::Midpoint] {
        for k in 0..=6 {
            let arcs = farey_arcs(k, rule).unwrap();
            let mut total = Ratio::zero();
            for w in arcs.windows(2) {
                assert_eq!(w[0].right, w[1].left);
            }
            for a in &arcs {
                assert!(a.left < a.right);
                total += a.length();
            }
            assert_eq!(total, Ratio::from_integer(1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn nondivisor_witness_iff_not_dividing(q in 1u64..=2000, k in 1u64..=64) {
        let divides = (lcm_range(k).unwrap() % BigUint::from(q)).is_zero();
        prop_assert_eq!(classify_nondivisor(q, k).is_none(), divides);
    }

    #[test]
    fn shell_fixed_by_signed_permutations(n in 0u64..=60, seed in any::<u64>()) {
        let d = 4;
        let shell = enumerate_sphere(d, n).unwrap();
        let mut perm: Vec<usize> = (0..d).collect();
        let mut s = seed;
        for i in (1..d).rev() {
            perm.swap(i, (s % (i as u64 + 1)) as usize);
            s /= 7;
        }
        let signs: Vec<i64> = (0..d).map(|i| if (seed >> (40 + i)) & 1 == 1 { -1 } else { 1 }).collect();
        let mut a: Vec<Vec<i64>> = shell.points().map(|p| p.to_vec()).collect();
        let mut b: Vec<Vec<i64>> = a.iter().map(|p| (0..d).map(|i| signs[i] * p[perm[i]]).collect()).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn averages_contract(dim in prop::sample::select(vec![2usize, 3, 5]), n in 0u64..=50, e in entries()) {
        let f = sparse(dim, &e);
        let shell = enumerate_sphere(dim, n).unwrap();
        prop_assume!(shell.count() > 0);
        let a = f.spherical_average(&shell).unwrap();
        prop_assert!(a.norm_l2() <= f.norm_l2() * (1.0 + 1e-12));
    }

    #[test]
    fn multiplier_identity(n in 1u64..=30, e in entries(), alpha in torus_point(3)) {
        let f = sparse(3, &e);
        let shell = enumerate_sphere(3, n).unwrap();
        prop_assume!(shell.count() > 0);
        let alpha = TorusPoint::new(&alpha).unwrap();
        let lhs = fourier_eval(&f.spherical_average(&shell).unwrap(), &alpha).unwrap();
        let rhs = avg_multiplier(&shell, &alpha).unwrap() * fourier_eval(&f, &alpha).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn averages_commute_with_translation(n in 1u64..=20, e in entries(), v in prop::collection::vec(-5i64..=5, 2)) {
        let f = sparse(2, &e);
        let shell = enumerate_sphere(2, n).unwrap();
        prop_assume!(shell.count() > 0);
        let lhs = f.shifted(&v).spherical_average(&shell).unwrap();
        let rhs = f.spherical_average(&shell).unwrap().shifted(&v);
        let pts = |s: &SparseSignal| s.iter().map(|(p, x)| (p.clone(), (x * shell.count() as f64).round() as i64)).collect::<Vec<_>>();
        prop_assert_eq!(pts(&lhs), pts(&rhs));
    }

    #[test]
    fn periodic_round_trip(side in 2usize..=12, seed in any::<u64>()) {
        let mut rng = sml_core::rng::XorShift64Star::new(seed);
        let f = PeriodicSignal::from_values(2, side, (0..side * side).map(|_| rng.normal()).collect()).unwrap();
        let spec = f.spectrum();
        let energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / (side * side) as f64;
        prop_assert!((energy.sqrt() - f.norm_l2()).abs() <= 1e-10 * f.norm_l2());
        let back = PeriodicSignal::from_spectrum(2, side, spec);
        prop_assert!(back.sub(&f).norm_l2() <= 1e-10 * f.norm_l2());
    }

    #[test]
    fn region_support_plateau_nesting(k in 4u32..=20, j in 0u32..=MAX_REGION_DEPTH, alpha in torus_point(2), near in any::<bool>(), offs in prop::collection::vec((0u64..1 << 20, -24i128..=24), 2)) {
        prop_assume!((1u32 << j) <= k);
        let r = FreqRegion::new(j, k).unwrap();
        let a = if near {
            let q = r.q as i128;
            let scale = 1i128 << (k + 3);
            let parts: Vec<(i128, i128)> = offs.iter().map(|&(c, o)| ((c as i128 % q) * scale + o * (1 << j), q * scale)).collect();
            TorusPoint::new(&parts).unwrap()
        } else {
            TorusPoint::new(&alpha).unwrap()
        };
        if sampling_multiplier(&r, &a) > 0.0 {
            prop_assert!(omega_member(&r, &a));
        }
        if omega_member(&r.halved(), &a) {
            prop_assert_eq!(sampling_multiplier(&r, &a), 1.0);
        }
        if omega_member(&FreqRegion::new(j, k + 1).unwrap(), &a) {
            prop_assert!(omega_member(&r, &a));
        }
    }

    #[test]
    fn theta_truncation_certificate(e in 1.0f64..12.0, m in 1u64..40, t in 0.0f64..1.0, beta in 0.0f64..1.0) {
        let eps = (-e).exp2();
        let a = theta_1d(t, eps, beta, m);
        let b = theta_1d(t, eps, beta, 2 * m);
        prop_assert!((a - b).norm() <= tail_bound(eps, m) * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn located_points_obey_dirichlet(den in 1i128..1 << 30, u in any::<u64>(), k in 0u32..=10) {
        let t = Ratio::new((u as i128).rem_euclid(den + 1), den);
        let loc = locate(t, k, ArcBoundary::Mediant).unwrap();
        let bound = Ratio::new(1, (1i128 << k) * loc.q as i128);
        prop_assert!(loc.tau.abs() <= bound);
    }

    #[test]
    fn gauss_magnitude_law(q in 1u64..=200, a in 1u64..=200) {
        prop_assume!(sml_core::numtheory::coprime(a, q));
        let g = gauss_sum(a as i64, q).unwrap().norm_sqr();
        let law = match q % 4 { 0 => 2.0 * q as f64, 2 => 0.0, _ => q as f64 };
        prop_assert!((g - law).abs() <= 1e-9 * q as f64);
    }
}
