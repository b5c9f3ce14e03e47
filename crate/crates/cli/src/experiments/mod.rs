pub mod farey;
pub mod gauss;
pub mod latcount;
pub mod maxop;
pub mod ortho;
pub mod stbound;
pub mod tailsum;
pub mod telescope;

use num_rational::Ratio;
use sml_core::rng::XorShift64Star;

/// Parameters exactly as the command line would default them.
pub fn defaults<T: clap::Parser>(name: &str) -> T {
    T::parse_from([name])
}

/// Implements `Default` through the clap defaults.
macro_rules! clap_default {
    ($t:ty, $name:literal) => {
        impl Default for $t {
            fn default() -> Self {
                $crate::experiments::defaults($name)
            }
        }
    };
}
pub(crate) use clap_default;

/// Uniform rational in `[0, 1)` with a random denominator in `[2^lo, 2^hi]`.
pub fn random_unit_rational(rng: &mut XorShift64Star, lo: u32, hi: u32) -> (i128, i128) {
    let den = (1u64 << lo) + rng.below((1u64 << hi) - (1u64 << lo) + 1);
    let num = rng.below(den);
    (num as i128, den as i128)
}

pub fn ratio_str(r: Ratio<i128>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Finite floats only; anything else becomes `null`.
pub fn num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
    parts.join(";")
}
