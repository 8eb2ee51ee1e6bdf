//! Largest-remainder apportionment of an integer total by real weights.
//!
//! Weights are finite nonnegative `f64`s, which are exact binary fractions;
//! they are rescaled to integers over a common power of two so quotas and
//! remainders are compared exactly. Ties in the remainder go to the entry
//! that comes first in the input order.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::float::FloatCore;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Split `total` units among `weights`: each entry gets the floor of its
/// quota and the leftover units go one each to the largest remainders.
/// The parts always sum to `total`.
pub fn largest_remainder(total: u64, weights: &[f64]) -> Result<Vec<u64>> {
    for (i, w) in weights.iter().enumerate() {
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::validation(
                format!("weights[{i}]"),
                format!("must be finite and >= 0, got {w}"),
            ));
        }
    }
    let decoded: Vec<(u64, i16)> = weights
        .iter()
        .map(|w| {
            let (mantissa, exp, _) = FloatCore::integer_decode(*w);
            (mantissa, exp)
        })
        .collect();
    let min_exp = decoded
        .iter()
        .filter(|(m, _)| *m != 0)
        .map(|(_, e)| *e)
        .min()
        .ok_or(Error::NoActiveMembers)?;
    let max_shift = decoded
        .iter()
        .filter(|(m, _)| *m != 0)
        .map(|&(_, e)| (e - min_exp) as u32)
        .max()
        .unwrap_or(0);
    // mantissas have at most 53 bits; leave room for the sum of all weights
    let sum_bits = 53 + max_shift + usize::BITS - weights.len().leading_zeros();
    if sum_bits <= 64 {
        let scaled: Vec<u64> = decoded
            .iter()
            .map(|&(m, e)| if m == 0 { 0 } else { m << (e - min_exp) })
            .collect();
        let weight_sum = u128::from(scaled.iter().sum::<u64>());
        let split = scaled.iter().map(|&w| {
            let n = u128::from(total) * u128::from(w);
            ((n / weight_sum) as u64, n % weight_sum)
        });
        return Ok(distribute(total, split));
    }

    let scaled: Vec<BigUint> = decoded
        .iter()
        .map(|&(m, e)| {
            if m == 0 {
                BigUint::zero()
            } else {
                BigUint::from(m) << (e - min_exp) as usize
            }
        })
        .collect();
    let weight_sum: BigUint = scaled.iter().sum();
    let total_big = BigUint::from(total);
    let split = scaled.iter().map(|w| {
        let (q, rem) = (&total_big * w).div_rem(&weight_sum);
        (q.to_u64().expect("quota never exceeds total"), rem)
    });
    Ok(distribute(total, split))
}

/// Floors plus one unit each for the largest remainders.
fn distribute<R: Ord>(total: u64, split: impl Iterator<Item = (u64, R)>) -> Vec<u64> {
    let (mut parts, remainders): (Vec<u64>, Vec<R>) = split.unzip();
    let assigned: u64 = parts.iter().sum();
    let leftover = (total - assigned) as usize;

    let mut order: Vec<usize> = (0..parts.len()).collect();
    // stable sort keeps input order among equal remainders
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]));
    for &i in order.iter().take(leftover) {
        parts[i] += 1;
    }
    parts
}
