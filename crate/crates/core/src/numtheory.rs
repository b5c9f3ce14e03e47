//! lcm towers, non-divisor classification and the tail sums over `q ∤ Q_k`.
//!
//! Two towers appear: `q_j = lcm{1, …, 2^j}` (arithmetic depth of a frequency
//! region) and `Q_k = lcm{1, …, k}`. Both grow exponentially, so they are held
//! as [`BigUint`] and every divisibility question is answered exactly.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::{Error, Result};

/// Largest depth accepted by [`q_of_depth`]; `2^20` keeps the tower computable.
pub const MAX_DEPTH: u32 = 20;

/// Primes `≤ n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        out.push(p as u64);
        let mut m = p * p;
        while m <= n {
            composite[m] = true;
            m += p;
        }
    }
    out
}

/// Prime factorisation by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while *n % p == 0 {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5u64;
    while p.saturating_mul(p) <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

/// `lcm{1, …, n}` as the product of maximal prime powers `p^a ≤ n`.
pub fn lcm_range(n: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::param("lcm_range needs n >= 1"));
    }
    let mut acc = BigUint::one();
    for p in primes_up_to(n) {
        let mut pa = p;
        while let Some(next) = pa.checked_mul(p) {
            if next > n {
                break;
            }
            pa = next;
        }
        acc *= pa;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcmTower {
    pub depth: u32,
    pub value: BigUint,
}

impl LcmTower {
    /// The tower value as a machine integer when it fits.
    pub fn as_u128(&self) -> Option<u128> {
        self.value.to_u128()
    }

    /// Every integer `1 ≤ q ≤ 2^depth` divides the value.
    pub fn divides(&self, q: u64) -> bool {
        (&self.value % BigUint::from(q)).is_zero()
    }
}

/// `q_j = lcm{1, …, 2^j}`.
pub fn q_of_depth(j: u32) -> Result<LcmTower> {
    if j > MAX_DEPTH {
        return Err(Error::param(format!("depth {j} exceeds {MAX_DEPTH}")));
    }
    Ok(LcmTower {
        depth: j,
        value: lcm_range(1u64 << j)?,
    })
}

/// Machine-word `q_j` for the small depths used by frequency regions.
pub fn q_depth_u128(j: u32) -> Result<u128> {
    q_of_depth(j)?
        .as_u128()
        .ok_or_else(|| Error::param(format!("q_{j} does not fit in 128 bits")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    /// A prime `p > k` divides `q`.
    LargePrime { p: u64 },
    /// A prime `p ≤ k` with `p^{a_p} | q`, where `a_p = min{a : k < p^a}`.
    SmallPrimePower { p: u64, a_p: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NondivisorWitness {
    pub q: u64,
    pub k: u64,
    pub kind: WitnessKind,
}

/// Smallest exponent `a` with `k < p^a`.
fn escape_exponent(p: u64, k: u64) -> u32 {
    let mut a = 1;
    let mut pa = p as u128;
    while pa <= k as u128 {
        pa *= p as u128;
        a += 1;
    }
    a
}

/// Explains why `q ∤ Q_k`, or returns `None` when `q | Q_k`.
///
/// A large prime is reported in preference to a small prime power; among
/// witnesses of the same kind the smallest prime wins.
pub fn classify_nondivisor(q: u64, k: u64) -> Option<NondivisorWitness> {
    assert!(q >= 1 && k >= 1, "classify_nondivisor needs q, k >= 1");
    let factors = factorize(q);
    if let Some(&(p, _)) = factors.iter().find(|(p, _)| *p > k) {
        return Some(NondivisorWitness {
            q,
            k,
            kind: WitnessKind::LargePrime { p },
        });
    }
    factors.iter().find_map(|&(p, e)| {
        let a_p = escape_exponent(p, k);
        (e >= a_p).then_some(NondivisorWitness {
            q,
            k,
            kind: WitnessKind::SmallPrimePower { p, a_p },
        })
    })
}

/// Largest prime power exactly dividing each `q ≤ n` (index 0 unused, 1 ↦ 1).
///
/// `q | Q_k` exactly when this value is `≤ k`.
pub fn max_prime_power_table(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut spf = vec![0u32; n + 1];
    for p in 2..=n {
        if spf[p] == 0 {
            let mut m = p;
            while m <= n {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
    }
    let mut out = vec![1u64; n + 1];
    out[0] = 0;
    for q in 2..=n {
        let mut rest = q;
        let mut best = 1u64;
        while rest > 1 {
            let p = spf[rest] as usize;
            let mut pe = 1u64;
            while rest % p == 0 {
                rest /= p;
                pe *= p as u64;
            }
            best = best.max(pe);
        }
        out[q] = best;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSum {
    /// `Σ_{q ≤ q_max, q ∤ Q_k} q^{-r}`.
    pub sum: f64,
    /// Upper bound `q_max^{1-r}/(r-1)` on the omitted `Σ_{q > q_max} q^{-r}`.
    pub truncation_bound: f64,
}

pub fn tail_sum(r: f64, k: u64, q_max: u64) -> Result<TailSum> {
    let table = max_prime_power_table(q_max);
    tail_sum_with_table(r, k, q_max, &table)
}

/// [`tail_sum`] reusing a table from [`max_prime_power_table`] of length `> q_max`.
pub fn tail_sum_with_table(r: f64, k: u64, q_max: u64, table: &[u64]) -> Result<TailSum> {
    if !(r > 1.0) {
        return Err(Error::param(format!("tail sum diverges for r = {r}")));
    }
    if k == 0 || q_max < k {
        return Err(Error::param(format!(
            "tail sum needs 1 <= k <= q_max, got k={k}, q_max={q_max}"
        )));
    }
    if table.len() as u64 <= q_max {
        return Err(Error::param("prime power table shorter than q_max"));
    }
    // Small terms last so the accumulated sum loses as little as possible.
    let sum = (1..=q_max)
        .rev()
        .filter(|&q| table[q as usize] > k)
        .map(|q| (q as f64).powf(-r))
        .sum();
    Ok(TailSum {
        sum,
        truncation_bound: (q_max as f64).powf(1.0 - r) / (r - 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamChoice {
    pub j: u64,
    pub k: u64,
    /// `2^{k-j} ≤ L`.
    pub scale_ok: bool,
    /// Whether `Ω_{j,k} ⊆ Ω_{η,L}` holds as sets (needs `q_j | q_η` and `2^{k-j} ≥ L`).
    pub region_nested: bool,
}

/// `q_η = lcm{1 ≤ q ≤ η^{-2}}`.
pub fn q_eta(eta: &BigRational) -> Result<BigUint> {
    check_eta(eta)?;
    let inv_sq = (eta * eta).recip();
    let n = inv_sq
        .floor()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::param("eta^-2 too large"))?;
    lcm_range(n)
}

fn check_eta(eta: &BigRational) -> Result<()> {
    if !eta.is_positive() || eta > &BigRational::one() {
        return Err(Error::param("eta must lie in (0, 1]"));
    }
    Ok(())
}

/// Chooses the dyadic scale `k` and depth `j` for the block `η^{-2}L ≤ λ ≤ 2η^{-2}L`.
///
/// `k` is the largest integer with `2^k ≤ η^{-2}L` (so `η^{-2}L < 2^{k+1}`)
/// and `j` the least integer with `2^j ≥ η^{-2}`.
pub fn select_params(eta: &BigRational, l: &BigUint) -> Result<ParamChoice> {
    let threshold = q_eta(eta)?.pow(4u32);
    if l < &threshold {
        return Err(Error::param(format!(
            "L = {l} is below q_eta^4 = {threshold}"
        )));
    }
    let num = eta.numer().magnitude().clone();
    let den = eta.denom().magnitude().clone();
    // η^{-2}L = den² L / num², and floor(log2 x) = floor(log2 floor(x)) for x ≥ 1.
    let x = (&den * &den * l) / (&num * &num);
    let k = x.bits() - 1;
    let (num_sq, den_sq) = (&num * &num, &den * &den);
    let mut j = 0u64;
    while (&num_sq << j) < den_sq {
        j += 1;
    }
    let scale_ok = k < j || (BigUint::one() << (k - j)) <= *l;
    let grid_nested = j <= MAX_DEPTH as u64 && {
        let qj = q_of_depth(j as u32)?.value;
        (q_eta(eta)? % qj).is_zero()
    };
    let box_nested = k >= j && (BigUint::one() << (k - j)) >= *l;
    Ok(ParamChoice {
        j,
        k,
        scale_ok,
        region_nested: grid_nested && box_nested,
    })
}

/// Greatest common divisor on machine words.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Inverse of `a` modulo `m` (`gcd(a, m) = 1`, `m ≥ 1`).
pub fn mod_inverse(a: u128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u128)
}

/// `gcd(a, b) = 1` check on machine words.
pub fn coprime(a: u64, b: u64) -> bool {
    gcd(a, b) == 1
}
