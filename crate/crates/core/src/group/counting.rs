//! Sphere sizes by counting normal forms, for radii far beyond what a ball
//! enumeration could hold.

use super::Family;
use crate::error::{Error, Result};

fn overflow(r: usize) -> Error {
    Error::InvalidParameter(format!("sphere count overflows at radius {r}"))
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

pub(super) fn sphere_counts(family: &Family, r_max: usize) -> Option<Result<Vec<u128>>> {
    match family {
        Family::Heisenberg => None,
        Family::Free { rank } => Some(free(*rank, r_max)),
        Family::FreeAbelian { rank } => Some(lattice(*rank, r_max)),
        Family::FreeProduct { factors } => {
            Some(free_product(&factors.iter().map(|f| f.order() as u128).collect::<Vec<_>>(), r_max))
        }
    }
}

fn free(k: usize, r_max: usize) -> Result<Vec<u128>> {
    let mut out = Vec::with_capacity(r_max + 1);
    out.push(1u128);
    let mut c = 2 * k as u128;
    let q = 2 * k as u128 - 1;
    for r in 1..=r_max {
        out.push(c);
        if r < r_max {
            c = c.checked_mul(q).ok_or_else(|| overflow(r + 1))?;
        }
    }
    Ok(out)
}

/// `|S_r|` in the l1 metric on `Z^n`: choose the `k` nonzero coordinates,
/// their signs, and a composition of `r` into `k` positive parts.
fn lattice(n: usize, r_max: usize) -> Result<Vec<u128>> {
    let mut out = vec![1u128];
    for r in 1..=r_max {
        let mut total: u128 = 0;
        for k in 1..=n.min(r) {
            let term = binomial(n as u128, k as u128)
                .and_then(|a| a.checked_mul(binomial(r as u128 - 1, k as u128 - 1)?))
                .and_then(|a| a.checked_mul(1u128.checked_shl(k as u32)?))
                .ok_or_else(|| overflow(r))?;
            total = total.checked_add(term).ok_or_else(|| overflow(r))?;
        }
        out.push(total);
    }
    Ok(out)
}

/// Alternating words: `c_i(r)` counts words of length `r` ending in factor
/// `i`; `c_i(1) = n_i - 1` and `c_i(r+1) = (n_i - 1) * sum_{j != i} c_j(r)`.
fn free_product(orders: &[u128], r_max: usize) -> Result<Vec<u128>> {
    let mut out = vec![1u128];
    let mut c: Vec<u128> = orders.iter().map(|n| n - 1).collect();
    for r in 1..=r_max {
        let total = c.iter().try_fold(0u128, |a, &b| a.checked_add(b)).ok_or_else(|| overflow(r))?;
        out.push(total);
        if r < r_max {
            c = orders
                .iter()
                .zip(&c)
                .map(|(n, ci)| (n - 1).checked_mul(total - ci))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| overflow(r + 1))?;
        }
    }
    Ok(out)
}
