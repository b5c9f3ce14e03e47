//! Farey dissection of the circle `R/Z` at level `n = 2^k`.
//!
//! Arcs live in lifted coordinates: the arc of `a/q` is an interval around
//! `a/q` itself, so the arc of `1/1` straddles `1 ≡ 0`.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::numtheory::mod_inverse;
use crate::{Error, Result};

/// Largest `k` for which [`farey_arcs`] enumerates every arc.
pub const MAX_ENUMERATION_LEVEL: u32 = 12;

/// Where consecutive arcs meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArcBoundary {
    /// Classical mediants `(a+b)/(q+s)`; keeps `|τ| ≤ 1/(qn)` on every arc.
    #[default]
    Mediant,
    /// Midpoints `(a/q + b/s)/2`: the nearest-fraction cells.
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FareyArc {
    pub a: u64,
    pub q: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub left: Ratio<i128>,
    #[serde(serialize_with = "ser_ratio")]
    pub right: Ratio<i128>,
    /// `n = 2^k`.
    pub level: u64,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

impl FareyArc {
    pub fn length(&self) -> Ratio<i128> {
        self.right - self.left
    }

    pub fn center(&self) -> Ratio<i128> {
        Ratio::new(self.a as i128, self.q as i128)
    }

    /// Signed offsets `left − a/q ≤ 0 ≤ right − a/q`, as floats.
    pub fn tau_range(&self) -> (f64, f64) {
        let c = self.center();
        (to_f64(self.left - c), to_f64(self.right - c))
    }
}

pub(crate) fn to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn level_of(k: u32) -> Result<u64> {
    if k > 40 {
        return Err(Error::param(format!("Farey level 2^{k} out of range")));
    }
    Ok(1u64 << k)
}

fn boundary(x: (i128, i128), y: (i128, i128), rule: ArcBoundary) -> Ratio<i128> {
    match rule {
        ArcBoundary::Mediant => Ratio::new(x.0 + y.0, x.1 + y.1),
        ArcBoundary::Midpoint => Ratio::new(x.0 * y.1 + y.0 * x.1, 2 * x.1 * y.1),
    }
}

/// Neighbours of `a/q` in `F_n`, in lifted coordinates: `(b, s)` below and `(c, d)` above.
pub fn farey_neighbors(a: u64, q: u64, n: u64) -> Result<((i128, i128), (i128, i128))> {
    if q == 0 || q > n || a == 0 || a > q || a.gcd(&q) != 1 {
        return Err(Error::param(format!(
            "{a}/{q} is not a reduced fraction of level {n}"
        )));
    }
    let (a, q, n) = (a as i128, q as i128, n as i128);
    let inv = mod_inverse(a as u128, q as u128).expect("coprime") as i128;
    let s0 = inv % q;
    let s = s0 + q * ((n - s0) / q);
    let b = (a * s - 1) / q;
    let d0 = (q - s0) % q;
    let d = d0 + q * ((n - d0) / q);
    let c = (1 + a * d) / q;
    Ok(((b, s), (c, d)))
}

/// The arc of `a/q` at level `2^k`, built from its neighbours.
pub fn arc_of(a: u64, q: u64, k: u32, rule: ArcBoundary) -> Result<FareyArc> {
    let n = level_of(k)?;
    let (lo, hi) = farey_neighbors(a, q, n)?;
    let me = (a as i128, q as i128);
    Ok(FareyArc {
        a,
        q,
        left: boundary(lo, me, rule),
        right: boundary(me, hi, rule),
        level: n,
    })
}

/// Every arc at level `2^k`, sorted by `a/q`, for `k ≤ 12`.
pub fn farey_arcs(k: u32, rule: ArcBoundary) -> Result<Vec<FareyArc>> {
    if k > MAX_ENUMERATION_LEVEL {
        return Err(Error::Resource {
            message: format!(
                "level 2^{k} has too many arcs to enumerate; use the stratified sampler"
            ),
            estimate: Some(farey_size(1u64 << k)),
        });
    }
    let n = 1i128 << k;
    // F_n ascending from 0/1 by the next-term recurrence.
    let mut seq = vec![(0i128, 1i128)];
    let (mut a, mut b, mut c, mut d) = (0i128, 1i128, 1i128, n);
    while c <= n {
        seq.push((c, d));
        let m = (n + b) / d;
        (a, b, c, d) = (c, d, m * c - a, m * d - b);
        if seq.last() == Some(&(1, 1)) {
            break;
        }
    }
    let len = seq.len();
    let mut arcs = Vec::with_capacity(len - 1);
    for i in 1..len {
        let me = seq[i];
        let lo = seq[i - 1];
        let hi = if i + 1 < len {
            seq[i + 1]
        } else {
            (seq[1].0 + seq[1].1, seq[1].1)
        };
        arcs.push(FareyArc {
            a: me.0 as u64,
            q: me.1 as u64,
            left: boundary(lo, me, rule),
            right: boundary(me, hi, rule),
            level: n as u64,
        });
    }
    Ok(arcs)
}

/// `|F_n| − 1 = Σ_{q ≤ n} φ(q)`, the number of arcs at level `n`.
pub fn farey_size(n: u64) -> u64 {
    let n = n as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            let mut m = p;
            while m <= n {
                phi[m] -= phi[m] / p as u64;
                m += p;
            }
        }
    }
    phi[1..].iter().sum()
}

/// A located point: `t = a/q + τ` in lifted coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Located {
    pub a: u64,
    pub q: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub tau: Ratio<i128>,
}

impl Located {
    pub fn tau_f64(&self) -> f64 {
        to_f64(self.tau)
    }
}

/// The consecutive pair `L ≤ t ≤ R` of `F_n`, found by a batched Stern–Brocot walk.
fn bracket(t: Ratio<i128>, n: i128) -> ((i128, i128), (i128, i128)) {
    let (tn, td) = (*t.numer(), *t.denom());
    let (mut l, mut r) = ((0i128, 1i128), (1i128, 1i128));
    loop {
        let m = (l.0 + r.0, l.1 + r.1);
        if m.1 > n {
            return (l, r);
        }
        let lhs = tn * m.1;
        let rhs = m.0 * td;
        if lhs == rhs {
            return (m, m);
        }
        if lhs < rhs {
            // R_c = (c·l + r) stays above t while c·(tn·l.1 − l.0·td) < r.0·td − tn·r.1.
            let a = tn * l.1 - l.0 * td;
            let b = r.0 * td - tn * r.1;
            let by_t = if a == 0 {
                i128::MAX
            } else {
                (b + a - 1) / a - 1
            };
            let by_n = (n - r.1) / l.1;
            let c = by_t.min(by_n).max(1);
            r = (c * l.0 + r.0, c * l.1 + r.1);
        } else {
            let a = r.0 * td - tn * r.1;
            let b = tn * l.1 - l.0 * td;
            let by_t = if a == 0 {
                i128::MAX
            } else {
                (b + a - 1) / a - 1
            };
            let by_n = (n - l.1) / r.1;
            let c = by_t.min(by_n).max(1);
            l = (l.0 + c * r.0, l.1 + c * r.1);
        }
    }
}

fn as_located(f: (i128, i128), t: Ratio<i128>) -> Located {
    let fr = Ratio::new(f.0, f.1);
    let tau = t - fr;
    if f.0 == 0 {
        Located { a: 1, q: 1, tau }
    } else {
        Located {
            a: f.0 as u64,
            q: f.1 as u64,
            tau,
        }
    }
}

/// Prefers `x` over `y` on ties: smaller `q`, then smaller `a` (with `0/1` read as `1/1`).
fn tie_first(x: (i128, i128), y: (i128, i128)) -> bool {
    let key = |f: (i128, i128)| if f.0 == 0 { (1, 1) } else { (f.1, f.0) };
    key(x) <= key(y)
}

/// The arc containing `t ∈ [0, 1]` at level `2^k`.
pub fn locate(t: Ratio<i128>, k: u32, rule: ArcBoundary) -> Result<Located> {
    if t < Ratio::from_integer(0) || t > Ratio::from_integer(1) {
        return Err(Error::param("locate expects t in [0, 1]"));
    }
    let n = level_of(k)? as i128;
    let (l, r) = bracket(t, n);
    if l == r {
        return Ok(as_located(l, t));
    }
    let cut = match rule {
        ArcBoundary::Mediant => Ratio::new(l.0 + r.0, l.1 + r.1),
        ArcBoundary::Midpoint => Ratio::new(l.0 * r.1 + r.0 * l.1, 2 * l.1 * r.1),
    };
    let pick = if t < cut {
        l
    } else if t > cut {
        r
    } else if tie_first(l, r) {
        l
    } else {
        r
    };
    Ok(as_located(pick, t))
}

/// Nearest fraction of `F_n` on the circle, ties toward smaller `q` then `a`.
pub fn nearest_fraction(t: Ratio<i128>, k: u32) -> Result<Located> {
    locate(t, k, ArcBoundary::Midpoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64Star;
    use num_traits::Signed;

    fn r(a: i128, b: i128) -> Ratio<i128> {
        Ratio::new(a, b)
    }

    #[test]
    fn level_zero_is_one_arc() {
        for rule in [ArcBoundary::Mediant, ArcBoundary::Midpoint] {
            let arcs = farey_arcs(0, rule).unwrap();
            assert_eq!(arcs.len(), 1);
            assert_eq!((arcs[0].a, arcs[0].q), (1, 1));
            assert_eq!(arcs[0].length(), r(1, 1));
        }
    }

    #[test]
    fn level_two_midpoints() {
        let arcs = farey_arcs(2, ArcBoundary::Midpoint).unwrap();
        let fr: Vec<(u64, u64)> = arcs.iter().map(|a| (a.a, a.q)).collect();
        assert_eq!(fr, vec![(1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)]);
        let half = &arcs[2];
        assert_eq!((half.left, half.right), (r(5, 12), r(7, 12)));
        assert_eq!(half.length(), r(1, 6));
        let m = farey_arcs(2, ArcBoundary::Mediant).unwrap();
        assert_eq!((m[2].left, m[2].right), (r(2, 5), r(3, 5)));
    }

    #[test]
    fn arcs_tile_and_respect_length_bounds() {
        for k in 0..=8 {
            for rule in [ArcBoundary::Mediant, ArcBoundary::Midpoint] {
                let arcs = farey_arcs(k, rule).unwrap();
                assert_eq!(arcs.len() as u64, farey_size(1 << k));
                let total: Ratio<i128> = arcs.iter().map(|a| a.length()).sum();
                assert_eq!(total, r(1, 1));
                for w in arcs.windows(2) {
                    assert_eq!(w[0].right, w[1].left);
                }
                assert_eq!(arcs.last().unwrap().right - 1, arcs[0].left);
                for a in &arcs {
                    assert!(a.left <= a.center() && a.center() <= a.right);
                    if rule == ArcBoundary::Mediant {
                        let n = 1i128 << k;
                        let q = a.q as i128;
                        assert!(a.length() >= r(1, n * q) && a.length() <= r(2, n * q));
                    }
                }
            }
        }
    }

    #[test]
    fn neighbor_arcs_match_enumeration() {
        for k in [3u32, 6, 9] {
            for rule in [ArcBoundary::Mediant, ArcBoundary::Midpoint] {
                for arc in farey_arcs(k, rule).unwrap() {
                    assert_eq!(arc_of(arc.a, arc.q, k, rule).unwrap(), arc);
                }
            }
        }
    }

    #[test]
    fn locate_examples() {
        for rule in [ArcBoundary::Mediant, ArcBoundary::Midpoint] {
            let l = locate(r(13, 50), 2, rule).unwrap();
            assert_eq!((l.a, l.q, l.tau), (1, 4, r(1, 100)));
            for k in 1..6 {
                let l = locate(r(1, 2), k, rule).unwrap();
                assert_eq!((l.a, l.q, l.tau), (1, 2, r(0, 1)));
            }
            let l = locate(r(1, 100), 2, rule).unwrap();
            assert_eq!((l.a, l.q, l.tau), (1, 1, r(1, 100)));
        }
    }

    #[test]
    fn nearest_can_break_dirichlet() {
        // 0.14 at level 4: nearest is 1/4, off by 0.11 > 1/16.
        let l = nearest_fraction(r(14, 100), 2).unwrap();
        assert_eq!((l.a, l.q), (1, 4));
        assert!(l.tau.abs() > r(1, 16));
        let m = locate(r(14, 100), 2, ArcBoundary::Mediant).unwrap();
        assert!(m.tau.abs() <= r(1, 4 * m.q as i128));
    }

    #[test]
    fn locate_agrees_with_arcs() {
        let mut rng = XorShift64Star::new(42);
        for k in [1u32, 4, 7] {
            for rule in [ArcBoundary::Mediant, ArcBoundary::Midpoint] {
                let arcs = farey_arcs(k, rule).unwrap();
                for _ in 0..500 {
                    let t = r(rng.below(1 << 30) as i128, 1 << 30);
                    let l = locate(t, k, rule).unwrap();
                    let arc = arcs.iter().find(|a| (a.a, a.q) == (l.a, l.q)).unwrap();
                    let lifted = arc.center() + l.tau;
                    assert!(arc.left <= lifted && lifted <= arc.right);
                }
            }
        }
    }

    #[test]
    fn mediant_locate_keeps_dirichlet_bound() {
        let mut rng = XorShift64Star::new(7);
        for _ in 0..10_000 {
            let k = rng.below(11) as u32;
            let den = 1 + rng.below(1 << 40) as i128;
            let t = r(rng.below(den as u64 + 1) as i128, den);
            let l = locate(t, k, ArcBoundary::Mediant).unwrap();
            assert!(l.tau.abs() <= r(1, (1i128 << k) * l.q as i128));
        }
    }
}
