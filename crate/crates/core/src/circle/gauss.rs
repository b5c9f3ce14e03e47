//! Quadratic Gauss sums `G(a,q) = Σ_{x mod q} e(ax²/q)` and the generalized
//! sums `S(a,b;q) = Σ_{x mod q} e((ax² + bx)/q)`.
//!
//! Direct summation is kept for small `q`; the closed form (multiplicativity
//! over prime powers, completing the square, classical `G(c; p^e)`) serves the
//! dual theta evaluation at denominators far beyond direct reach.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::numtheory::{factorize, gcd, mod_inverse};
use crate::{Error, Result};

/// `e(r/m) = e^{2πi r/m}` with `r` reduced first.
#[inline]
pub(crate) fn e_frac(r: i128, m: u128) -> Complex64 {
    let r = r.rem_euclid(m as i128) as u128;
    let (s, c) = (2.0 * PI * (r as f64 / m as f64)).sin_cos();
    Complex64::new(c, s)
}

#[inline]
fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    // Operands stay below 2^64 so the product fits.
    (a % m) * (b % m) % m
}

/// `Σ_{x=0}^{q−1} e^{2πi a x²/q}`, summed directly.
pub fn gauss_sum(a: i64, q: u64) -> Result<Complex64> {
    if q == 0 || gcd(a.unsigned_abs(), q) != 1 {
        return Err(Error::param(format!(
            "gauss_sum needs gcd(a, q) = 1, got a={a}, q={q}"
        )));
    }
    let qq = q as u128;
    let a = (a as i128).rem_euclid(q as i128) as u128;
    Ok((0..qq)
        .map(|x| e_frac(mulmod(a, x * x, qq) as i128, qq))
        .sum())
}

/// Same sum in reverse order with Kahan-compensated accumulation; an
/// independent route used as a cross-check.
pub fn gauss_sum_compensated(a: i64, q: u64) -> Result<Complex64> {
    if q == 0 || gcd(a.unsigned_abs(), q) != 1 {
        return Err(Error::param(format!(
            "gauss_sum needs gcd(a, q) = 1, got a={a}, q={q}"
        )));
    }
    let (mut re, mut im, mut cre, mut cim) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let a = (a as i128).rem_euclid(q as i128) as u128;
    for x in (0..q as u128).rev() {
        let r = (a * x % q as u128) * x % q as u128;
        let theta = 2.0 * PI * r as f64 / q as f64;
        let (s, c) = theta.sin_cos();
        let y = c - cre;
        let t = re + y;
        cre = (t - re) - y;
        re = t;
        let y = s - cim;
        let t = im + y;
        cim = (t - im) - y;
        im = t;
    }
    Ok(Complex64::new(re, im))
}

/// `|G(a,q)|²` by the classical classification of `q mod 4`.
pub fn gauss_magnitude_sq_law(q: u64) -> f64 {
    match q % 4 {
        0 => 2.0 * q as f64,
        2 => 0.0,
        _ => q as f64,
    }
}

/// `S(a,b;q)` summed directly.
pub fn generalized_gauss_direct(a: i64, b: i64, q: u64) -> Complex64 {
    let qq = q as i128;
    (0..qq)
        .map(|x| e_frac((a as i128 * x % qq) * x + b as i128 * x, q as u128))
        .sum()
}

/// Jacobi symbol `(a/n)` for odd `n`.
fn jacobi(mut a: u128, mut n: u128) -> i32 {
    let mut s = 1;
    a %= n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                s = -s;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            s = -s;
        }
        a %= n;
    }
    if n == 1 {
        s
    } else {
        0
    }
}

#[derive(Debug, Clone)]
struct PrimePowerFactor {
    p: u64,
    e: u32,
    pe: u128,
    /// `inv(4c)` for odd `p`, `inv(c)` for `p = 2`, modulo `p^e`.
    inv: u128,
    /// `G(c; p^e)`.
    pure: Complex64,
}

/// Closed-form evaluator of `b ↦ S(a,b;q)` for fixed coprime `(a, q)`.
#[derive(Debug, Clone)]
pub struct GaussSumTable {
    pub a: u64,
    pub q: u64,
    factors: Vec<PrimePowerFactor>,
}

impl GaussSumTable {
    pub fn new(a: u64, q: u64) -> Result<Self> {
        if q == 0 || gcd(a, q) != 1 {
            return Err(Error::param(format!(
                "S(a,b;q) needs gcd(a, q) = 1, got a={a}, q={q}"
            )));
        }
        let mut factors = Vec::new();
        for (p, e) in factorize(q) {
            let pe = (p as u128).pow(e);
            let rest = q as u128 / pe;
            let c = mulmod(a as u128, rest, pe);
            let (inv, pure) = if p == 2 {
                let inv = mod_inverse(c, pe).expect("unit mod 2^e");
                let pure = if e == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let ic = match c % 4 {
                        1 => Complex64::new(0.0, 1.0),
                        _ => Complex64::new(0.0, -1.0),
                    };
                    let kron = if c % 8 == 1 || c % 8 == 7 { 1.0 } else { -1.0 };
                    let sign = if e % 2 == 1 { kron } else { 1.0 };
                    (Complex64::new(1.0, 0.0) + ic) * ((e as f64 / 2.0).exp2() * sign)
                };
                (inv, pure)
            } else {
                let inv = mod_inverse(mulmod(4, c, pe), pe).expect("unit mod p^e");
                let half = (p as f64).powi((e / 2) as i32);
                let pure = if e % 2 == 0 {
                    Complex64::new(half, 0.0)
                } else {
                    let leg = jacobi(c % p as u128, p as u128) as f64;
                    let root = (p as f64).sqrt();
                    if p % 4 == 1 {
                        Complex64::new(half * leg * root, 0.0)
                    } else {
                        Complex64::new(0.0, half * leg * root)
                    }
                };
                (inv, pure)
            };
            factors.push(PrimePowerFactor {
                p,
                e,
                pe,
                inv,
                pure,
            });
        }
        Ok(GaussSumTable { a, q, factors })
    }

    /// `S(a,b;q)`.
    pub fn eval(&self, b: i128) -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for f in &self.factors {
            let bm = b.rem_euclid(f.pe as i128) as u128;
            if f.p == 2 {
                if f.e == 1 {
                    if bm % 2 == 0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    v *= 2.0;
                    continue;
                }
                if bm % 2 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
                let h = bm / 2;
                let r = mulmod(mulmod(h, h, f.pe), f.inv, f.pe);
                v *= e_frac(-(r as i128), f.pe) * f.pure;
            } else {
                let r = mulmod(mulmod(bm, bm, f.pe), f.inv, f.pe);
                v *= e_frac(-(r as i128), f.pe) * f.pure;
            }
        }
        v
    }

    /// Largest possible `|S(a,b;q)|`: `√(2q)` for even `q`, else `√q`.
    pub fn magnitude_bound(&self) -> f64 {
        let s = (self.q as f64).sqrt();
        if self.q % 2 == 0 {
            s * SQRT_2
        } else {
            s
        }
    }
}

/// `G(a,q)` through the closed form.
pub fn gauss_sum_closed(a: u64, q: u64) -> Result<Complex64> {
    Ok(GaussSumTable::new(a, q)?.eval(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_examples() {
        assert!((gauss_sum(1, 1).unwrap() - 1.0).norm() < 1e-15);
        assert!(gauss_sum(1, 2).unwrap().norm() < 1e-15);
        let g = gauss_sum(1, 3).unwrap();
        assert!((g - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
        assert!(gauss_sum(2, 4).is_err());
    }

    #[test]
    fn magnitude_law_and_compensated_route() {
        for q in 1..=200u64 {
            for a in 1..=q {
                if gcd(a, q) != 1 {
                    continue;
                }
                let g = gauss_sum(a as i64, q).unwrap();
                let h = gauss_sum_compensated(a as i64, q).unwrap();
                let law = gauss_magnitude_sq_law(q);
                let tol = 1e-9 * (q as f64);
                assert!((g.norm_sqr() - law).abs() <= tol, "q={q} a={a}");
                assert!((g - h).norm() <= 1e-9 * (q as f64).sqrt());
            }
        }
    }

    #[test]
    fn closed_form_matches_direct() {
        for q in 1..=400u64 {
            let step = if q > 120 { 7 } else { 1 };
            for a in (1..=q).step_by(step) {
                if gcd(a, q) != 1 {
                    continue;
                }
                let table = GaussSumTable::new(a, q).unwrap();
                for b in -3..(q as i64).min(40) {
                    let direct = generalized_gauss_direct(a as i64, b, q);
                    let closed = table.eval(b as i128);
                    assert!(
                        (direct - closed).norm() <= 1e-9 * (q as f64).sqrt().max(1.0),
                        "a={a} b={b} q={q}"
                    );
                    assert!(closed.norm() <= table.magnitude_bound() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn closed_form_at_large_modulus() {
        // 2^31 − 1 is prime and ≡ 3 mod 4; |G| = √q.
        let q = 2_147_483_647u64;
        let g = gauss_sum_closed(5, q).unwrap();
        assert!((g.norm() - (q as f64).sqrt()).abs() < 1e-6);
        let q = 1u64 << 32;
        let t = GaussSumTable::new(12345, q).unwrap();
        assert!((t.eval(2).norm() - (2.0 * q as f64).sqrt()).abs() < 1e-6);
        assert_eq!(t.eval(3).norm(), 0.0);
    }

    #[test]
    fn jacobi_small() {
        assert_eq!(jacobi(2, 7), 1);
        assert_eq!(jacobi(3, 7), -1);
        assert_eq!(jacobi(5, 3), -1);
        assert_eq!(jacobi(6, 9), 0);
    }
}
