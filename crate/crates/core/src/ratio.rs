//! Exact rational scalars.
//!
//! All probabilities in analysis paths are arbitrary-precision rationals;
//! floating point is confined to the simulator. Rationals render as `p/q`
//! (or `p` when the denominator is 1) and never as decimals.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always in lowest terms with positive denominator.
pub type Ratio = num_rational::BigRational;

/// Shorthand constructor from machine integers.
pub fn ratio(numer: i64, denom: i64) -> Ratio {
    Ratio::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Ratio {
    Ratio::zero()
}

pub fn one() -> Ratio {
    Ratio::one()
}

/// Renders `p/q`, or just `p` when `q == 1`.
pub fn format_ratio(r: &Ratio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"` or `"p/q"` with arbitrary-precision integers.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let numer: BigInt = num_str
        .parse()
        .map_err(|_| Error::Input(format!("invalid rational {s:?}: bad numerator")))?;
    let denom: BigInt = den_str
        .parse()
        .map_err(|_| Error::Input(format!("invalid rational {s:?}: bad denominator")))?;
    if denom.is_zero() {
        return Err(Error::Input(format!("invalid rational {s:?}: zero denominator")));
    }
    Ok(Ratio::new(numer, denom))
}

/// Exact check that a slice of weights is nonnegative and sums to 1.
pub fn check_unit_mass(total: &Ratio) -> Result<()> {
    if !total.is_one() {
        let defect = Ratio::one() - total;
        return Err(Error::Normalization {
            total: format_ratio(total),
            defect: format_ratio(&defect.abs()),
        });
    }
    Ok(())
}
