//! Partitions of an integer into at most `M` parts.
//!
//! `P_M(K)` counts the partitions of `K` into at most `M` parts (equivalently
//! into parts of size at most `M`); its generating function in powers of
//! `1/q` has the closed product form
//!
//! ```text
//! P(M, q) = sum_{K>=0} P_M(K) q^{-K} = prod_{m=1..M} q^m / (q^m - 1).
//! ```
//!
//! The product evaluates exactly over the rationals for any integer `q >= 2`,
//! which makes the truncation error of the series explicitly computable: the
//! state classes of the discharge model are distributed like `P_M(K)`, so
//! every tail bound in the mass and deviation modules reduces to bounding
//! `sum_{K>K0} P_M(K) q^{-K}`.

use crate::rational::{q_pow, ratio_int, Ratio};
use num::bigint::BigInt;
use num::traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    /// The geometric ratio bound used to close the series tail is only valid
    /// once the polynomial growth of `P_M(K)` is dominated by `q^{-1}`.
    #[error("tail ratio bound {ratio} >= 1; increase the truncation order (K_max = {k_max})")]
    RatioBoundFailure { ratio: String, k_max: i64 },
}

/// Memoised table of `P_M(K)` for `0 <= K <= horizon`, all `1 <= m <= M`.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    m: usize,
    horizon: usize,
    // values[m - 1][k] = P_m(k)
    values: Vec<Vec<u128>>,
}

impl PartitionTable {
    /// Build the table bottom-up from the recursion
    /// `P_M(K) = P_M(K - M) + P_{M-1}(K)` with `P_1(K) = 1` and `P_M(0) = 1`.
    pub fn new(m: usize, horizon: usize) -> Self {
        assert!(m >= 1, "need at least one part");
        let mut values: Vec<Vec<u128>> = Vec::with_capacity(m);
        values.push(vec![1u128; horizon + 1]);
        for parts in 2..=m {
            let mut row = vec![0u128; horizon + 1];
            for k in 0..=horizon {
                let shifted = if k >= parts { row[k - parts] } else { 0 };
                row[k] = shifted + values[parts - 2][k];
            }
            values.push(row);
        }
        PartitionTable { m, horizon, values }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `P_M(K)`; zero for negative `K`.
    pub fn count(&self, k: i64) -> u128 {
        if k < 0 {
            return 0;
        }
        let k = k as usize;
        assert!(k <= self.horizon, "partition table horizon exceeded");
        self.values[self.m - 1][k]
    }
}

/// `P_M(K)`, the number of partitions of `K` into at most `M` parts.
///
/// `P_M(0) = 1` (the empty partition): the product form of the generating
/// function forces constant term 1, and the state census has exactly one
/// class-0 state per timestep.
pub fn partition_count(m: usize, k: i64) -> u128 {
    if k < 0 {
        return 0;
    }
    PartitionTable::new(m, k as usize).count(k)
}

/// All partitions of `k` into at most `m` parts, each partition as a
/// nonincreasing vector padded with zeros to length `m`.
pub fn enumerate_partitions(m: usize, k: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    descend(k, m, u64::MAX, &mut current, &mut out);
    for p in &mut out {
        p.resize(m, 0);
    }
    out.sort();
    out.dedup();
    out
}

fn descend(rest: u64, slots: usize, cap: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if rest == 0 {
        out.push(current.clone());
        return;
    }
    if slots == 0 {
        return;
    }
    let hi = rest.min(cap);
    for part in (1..=hi).rev() {
        current.push(part);
        descend(rest - part, slots - 1, part, current, out);
        current.pop();
    }
}

/// The full generating function `P(M, q) = prod_{m=1..M} q^m/(q^m - 1)` as an
/// exact rational.
pub fn partition_gf(m: usize, q: u64) -> Ratio {
    assert!(q >= 2);
    let mut acc = Ratio::one();
    for e in 1..=m {
        let qm = BigInt::from(q).pow(e as u32);
        acc *= Ratio::new(qm.clone(), qm - BigInt::one());
    }
    acc
}

/// Truncation of the series `sum_K P_M(K) q^{-K}` at `K_max`.
///
/// Returns `(partial_sum, tail_upper_bound)` where the bound is the exact sum
/// over `K_max < K <= W` (window `W = max(4 K_max, 8)`) plus a geometric
/// remainder `P_M(W) q^{-W} / (1 - r)` with per-step ratio bound
/// `r = ((W + M)/W)^{M-1} / q`. The true tail `partition_gf - partial_sum`
/// never exceeds the bound (checked against the closed product in tests).
pub fn partition_gf_truncated(
    m: usize,
    q: u64,
    k_max: i64,
) -> Result<(Ratio, Ratio), PartitionError> {
    assert!(q >= 2);
    assert!(k_max >= 0);
    let window_end = (4 * k_max).max(8);
    let table = PartitionTable::new(m, window_end as usize);

    let mut partial = Ratio::zero();
    for k in 0..=k_max {
        partial += Ratio::from_integer(BigInt::from(table.count(k))) * q_pow(q, -k);
    }

    let mut tail = Ratio::zero();
    for k in (k_max + 1)..=window_end {
        tail += Ratio::from_integer(BigInt::from(table.count(k))) * q_pow(q, -k);
    }

    // Remainder beyond the window: P_M(K) grows by at most ((K+M)/K)^(M-1)
    // per unit step for K >= W, so the summands shrink by at least r.
    let ratio = pow_ratio(
        Ratio::new(BigInt::from(window_end + m as i64), BigInt::from(window_end)),
        (m - 1) as u32,
    ) / ratio_int(q as i64);
    if ratio >= Ratio::one() {
        return Err(PartitionError::RatioBoundFailure {
            ratio: crate::rational::ratio_string(&ratio),
            k_max,
        });
    }
    let head = Ratio::from_integer(BigInt::from(table.count(window_end))) * q_pow(q, -window_end);
    tail += head / (Ratio::one() - ratio);

    Ok((partial, tail))
}

fn pow_ratio(r: Ratio, e: u32) -> Ratio {
    let mut acc = Ratio::one();
    for _ in 0..e {
        acc *= r.clone();
    }
    acc
}

/// `K^{M-1} / (M! (M-1)!)`, the leading-order growth of `P_M(K)`.
/// Documentation-level sanity aid only.
pub fn partition_asymptotic(m: usize, k: i64) -> Ratio {
    assert!(m >= 1 && k >= 1);
    let mut num = BigInt::one();
    for _ in 0..(m - 1) {
        num *= BigInt::from(k);
    }
    let mut den = BigInt::one();
    for i in 1..=m {
        den *= BigInt::from(i as u64);
    }
    for i in 1..m {
        den *= BigInt::from(i as u64);
    }
    Ratio::new(num, den)
}
