//! Small helpers around arbitrary-precision rationals.
//!
//! Every probability, mass and tail bound in this crate is a [`Ratio`]; no
//! floating point enters any verified quantity.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

/// Exact rational number used throughout the crate.
pub type Ratio = BigRational;

/// `n` as an exact rational.
pub fn ratio_int(n: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(n))
}

/// `q^e` for any integer exponent `e` (negative exponents give `1/q^|e|`).
pub fn q_pow(q: u64, e: i64) -> Ratio {
    let base = BigInt::from(q);
    let mag = base.pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Ratio::from_integer(mag)
    } else {
        Ratio::new(BigInt::one(), mag)
    }
}

/// Canonical `numerator/denominator` form, e.g. `-3/8` or `1/1`.
pub fn ratio_string(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Absolute value.
pub fn ratio_abs(r: &Ratio) -> Ratio {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}

/// Lossy conversion for statistical summaries and logs only.
pub fn ratio_to_f64(r: &Ratio) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // Scale down in tandem so huge exact values still convert sensibly.
    let nf = bigint_to_f64(n);
    let df = bigint_to_f64(d);
    nf / df
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// True when `r` is exactly zero.
pub fn is_zero(r: &Ratio) -> bool {
    r.is_zero()
}
