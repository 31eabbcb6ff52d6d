use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{to_f64, TargetDistribution};
use crate::error::{Error, Result};

pub const SYMMETRIC_MAX_BITS: usize = 128;

fn pascal(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![BigInt::one(); i + 1];
        for k in 1..i {
            row[k] = &rows[i - 1][k - 1] + &rows[i - 1][k];
        }
        rows.push(row);
    }
    rows
}

fn choose(c: &[Vec<BigInt>], n: usize, k: usize) -> BigInt {
    if k > n {
        BigInt::zero()
    } else {
        c[n][k].clone()
    }
}

fn krawtchouk_with(c: &[Vec<BigInt>], n: usize, w: usize, j: usize) -> BigInt {
    (0..=w.min(j)).fold(BigInt::zero(), |acc, i| {
        let term = choose(c, j, i) * choose(c, n - j, w - i);
        if i % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// `K_w(j) = sum_{|x| = w} (-1)^{x.y}` for any `y` of weight `j`.
pub fn krawtchouk(n: usize, w: usize, j: usize) -> BigInt {
    krawtchouk_with(&pascal(n), n, w, j)
}

/// Probability of each single outcome of weight `j` (`j = 0..=n`) when a
/// column reflected about the weight-`w` slice is measured.
pub fn slice_column_weights(n: usize, w: usize) -> Result<Vec<BigRational>> {
    if n == 0 || n > SYMMETRIC_MAX_BITS || w > n {
        return Err(Error::InvalidParameter(format!(
            "slice analysis needs 1 <= n <= {SYMMETRIC_MAX_BITS} and w <= n, got n = {n}, w = {w}"
        )));
    }
    let c = pascal(n);
    let scale = BigInt::one() << (n - 1);
    let psi: Vec<BigRational> = (0..=n)
        .map(|j| {
            let k = BigRational::new(krawtchouk_with(&c, n, w, j), scale.clone());
            if j == 0 {
                BigRational::one() - k
            } else {
                -k
            }
        })
        .collect();
    let two = BigRational::from_integer(BigInt::from(2));
    let lead = &two * &psi[n];
    Ok((0..=n)
        .map(|j| {
            let mut a = -(&lead * &psi[j]);
            if j == n {
                a += BigRational::one();
            }
            &a * &a
        })
        .collect())
}

/// Grid target statistics for the weight-`w` slice on even `n`, computed
/// from weight classes: `q_t = sum_{j >= t} C(n - t, j - t) A(j)` and
/// `P_zero = sum_t (-1)^t C(n, t) q_t^m`, all in exact rationals.
pub fn slice_symmetric_stats(n: usize, w: usize, m: usize) -> Result<TargetDistribution> {
    if n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("symmetric analysis needs even n, got {n}")));
    }
    let a = slice_column_weights(n, w)?;
    let c = pascal(n);
    let mut p_zero = BigRational::zero();
    for t in 0..=n {
        let q = (t..=n).fold(BigRational::zero(), |acc, j| {
            acc + BigRational::from_integer(choose(&c, n - t, j - t)) * &a[j]
        });
        let term = BigRational::from_integer(choose(&c, n, t)) * num_traits::pow(q, m);
        if t % 2 == 0 {
            p_zero += term;
        } else {
            p_zero -= term;
        }
    }
    let p0 = &a[0];
    let p1 = &a[n];
    let p_one = num_traits::pow(p1.clone(), m);
    let p_bad = BigRational::one() - num_traits::pow(p0 + p1, m);
    Ok(TargetDistribution::from_parts(
        m,
        to_f64(p0),
        to_f64(p1),
        to_f64(&p_zero),
        to_f64(&p_one),
        to_f64(&p_bad),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{column_stats, grid_target_distribution};
    use crate::constructions::gammas;
    use crate::fsets::ParityRestrictedSet;
    use num_bigint::BigUint;

    #[test]
    fn krawtchouk_at_zero_is_binomial() {
        assert_eq!(krawtchouk(10, 4, 0), BigInt::from(210));
        assert_eq!(krawtchouk(64, 32, 0), pascal(64)[64][32]);
    }

    #[test]
    fn krawtchouk_matches_brute_force() {
        let n = 6;
        for w in 0..=n {
            for j in 0..=n {
                let y: u64 = (1u64 << j) - 1;
                let brute: i64 = (0..1u64 << n)
                    .filter(|x| x.count_ones() as usize == w)
                    .map(|x| if (x & y).count_ones() % 2 == 0 { 1 } else { -1 })
                    .sum();
                assert_eq!(krawtchouk(n, w, j), BigInt::from(brute));
            }
        }
    }

    #[test]
    fn agrees_with_dense_path() {
        for n in (2..=12).step_by(2) {
            for w in [n / 2, 1] {
                let set = ParityRestrictedSet::hamming_slice(n, w).unwrap();
                let stats = column_stats(&set, true).unwrap();
                for m in [1, 2, 4] {
                    let dense = grid_target_distribution(&stats, m).unwrap();
                    let sym = slice_symmetric_stats(n, w, m).unwrap();
                    for (a, b) in [
                        (dense.p_zero, sym.p_zero),
                        (dense.p_one, sym.p_one),
                        (dense.p_bad, sym.p_bad),
                    ] {
                        assert!((a - b).abs() < 1e-9, "n={n} w={w} m={m}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn gamma1_at_64() {
        let c = pascal(64)[64][32].clone();
        let (_, g1) = gammas(64, &BigUint::try_from(c).unwrap());
        assert!((g1 - 0.0394).abs() < 5e-4);
        assert!(g1 <= 1.0 / 16.0);
        assert!(slice_symmetric_stats(63, 31, 2).is_err());
    }
}
