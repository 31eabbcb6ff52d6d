//! Circuit builders for every construction, with depth/size accounting.

mod grid;
mod modp;
mod parity;
mod subs;

pub use grid::{build_grid_nekomata, build_reflection, reflection_gates, GridLayout, UsMode};
pub use modp::{build_modp_fanout, build_modp_m_stage, ModpLayout};
pub use parity::{
    build_cat_to_parity, build_moore_fanout, build_nekomata_to_parity, cat_state_preparer,
    conjugate_by_hadamards, fanout_catlike,
};
pub use subs::{build_subs_parity, build_toffoli_from_small_us, toffoli_tree, TreeReport};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Exact `|S| / 2^{n-1}`.
pub fn set_fraction(n: usize, set_size: &BigUint) -> BigRational {
    BigRational::new(
        BigInt::from(set_size.clone()),
        BigInt::from(1u8) << n.saturating_sub(1),
    )
}

/// Exact `gamma1 = |S|^2 / 2^{2n-2}`.
pub fn gamma1_exact(n: usize, set_size: &BigUint) -> BigRational {
    let r = set_fraction(n, set_size);
    &r * &r
}

/// `(gamma0, gamma1)` rounded once from exact values.
pub fn gammas(n: usize, set_size: &BigUint) -> (f64, f64) {
    let r = set_fraction(n, set_size);
    let one = BigRational::from_integer(BigInt::from(1u8));
    let g0 = (&one - &r) * (&one - &r);
    let g1 = &r * &r;
    (
        g0.to_f64().unwrap_or(f64::NAN),
        g1.to_f64().unwrap_or(f64::NAN),
    )
}

/// Column count `max(1, round(-ln 2 / (2 ln(1 - 2 gamma1))))`, ties up.
pub fn m_for_gamma1(gamma1: f64) -> Result<usize> {
    if !(gamma1 > 0.0 && gamma1 < 0.5) {
        return Err(Error::Gamma1OutOfDomain(gamma1));
    }
    let x = -std::f64::consts::LN_2 / (2.0 * (-2.0 * gamma1).ln_1p());
    Ok(((x + 0.5).floor() as usize).max(1))
}

pub fn compute_m(n: usize, set_size: &BigUint) -> Result<usize> {
    let (_, g1) = gammas(n, set_size);
    m_for_gamma1(g1)
}
