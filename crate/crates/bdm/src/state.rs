//! States and transitions of the battery--discharge model.
//!
//! A state `(b_1, .., b_M, d; T, t)` tracks the deviations of the auxiliary
//! degrees (`b_m`, the battery charges) and of the joint linear complexity
//! (`d`, the drain) from their typical growth, together with the time residue
//! `T = n mod (M+1)` and the ministep `t` inside a column. Every state
//! satisfies the invariant
//!
//! ```text
//! d + T + b_1 + ... + b_M = 0.
//! ```
//!
//! Ministeps `t = 1..M` update battery `b_t`: when `b_t > d` the battery
//! either discharges (swap `b_t` and `d`, probability `(q-1)/q`) or is
//! inhibited (no change, probability `1/q`); when `b_t <= d` nothing happens.
//! The boundary ministep `t = M+1` decrements the drain (`T < M`) or, once
//! per cycle, charges every battery (`T = M`).
//!
//! The *class* `K(s)` orders states by asymptotic rarity: the stationary mass
//! of `s` is proportional to `q^{-K(s)}`. It is computed statically from an
//! inversion count plus a weighted sum of the sorted values, and dynamically
//! it increases by one on each inhibition and decreases by one on each
//! "no-op below" step, which is what ties the state census to integer
//! partitions.

use crate::rational::{ratio_int, Ratio};
use num::bigint::BigInt;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("state {0} violates the invariant d + T + sum(b) = 0")]
    InvariantViolated(String),
    #[error("ministep {t} out of range 1..={max}")]
    MinistepOutOfRange { t: usize, max: usize },
    #[error("time residue {t_res} out of range 0..={m} for the restricted state set")]
    TimeResidueOutOfRange { t_res: i64, m: usize },
    #[error("operation requires the column boundary ministep t = M+1, got t = {0}")]
    NotAtColumnBoundary(usize),
    #[error("no canonical path to {state}: {reason}")]
    Unreachable { state: String, reason: String },
}

/// One state of the battery--discharge chain.
///
/// `time_residue` is kept unrestricted (the augmented state set); operations
/// that need `0 <= T <= M` check it explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BdmState {
    batteries: Vec<i64>,
    drain: i64,
    time_residue: i64,
    ministep: usize,
}

impl BdmState {
    pub fn new(
        batteries: Vec<i64>,
        drain: i64,
        time_residue: i64,
        ministep: usize,
    ) -> Result<Self, StateError> {
        let s = BdmState {
            batteries,
            drain,
            time_residue,
            ministep,
        };
        let m = s.batteries.len();
        if s.ministep < 1 || s.ministep > m + 1 {
            return Err(StateError::MinistepOutOfRange {
                t: s.ministep,
                max: m + 1,
            });
        }
        if !s.invariant_holds() {
            return Err(StateError::InvariantViolated(s.to_string()));
        }
        Ok(s)
    }

    /// Initial state `(0, .., 0; 0, M+1)`.
    pub fn initial(m: usize) -> Self {
        assert!(m >= 1);
        BdmState {
            batteries: vec![0; m],
            drain: 0,
            time_residue: 0,
            ministep: m + 1,
        }
    }

    /// Tuple constructor without the invariant check.
    ///
    /// The class is a formula on arbitrary tuples and is occasionally
    /// evaluated off the invariant surface; transition and path operations
    /// still reject such states.
    pub fn raw(batteries: Vec<i64>, drain: i64, time_residue: i64, ministep: usize) -> Self {
        assert!(!batteries.is_empty());
        assert!(ministep >= 1 && ministep <= batteries.len() + 1);
        BdmState {
            batteries,
            drain,
            time_residue,
            ministep,
        }
    }

    pub fn stream_count(&self) -> usize {
        self.batteries.len()
    }

    pub fn batteries(&self) -> &[i64] {
        &self.batteries
    }

    pub fn drain(&self) -> i64 {
        self.drain
    }

    pub fn time_residue(&self) -> i64 {
        self.time_residue
    }

    pub fn ministep(&self) -> usize {
        self.ministep
    }

    pub fn invariant_holds(&self) -> bool {
        self.drain + self.time_residue + self.batteries.iter().sum::<i64>() == 0
    }

    fn check_restricted(&self) -> Result<(), StateError> {
        let m = self.stream_count();
        if self.time_residue < 0 || self.time_residue > m as i64 {
            return Err(StateError::TimeResidueOutOfRange {
                t_res: self.time_residue,
                m,
            });
        }
        Ok(())
    }

    /// Ministep index of the slot `(T, t)` inside the cycle of length
    /// `(M+1)^2`: `(T-1)(M+1) + t  mod (M+1)^2`.
    pub fn slot_phase(&self) -> usize {
        let period = (self.stream_count() + 1) * (self.stream_count() + 1);
        let raw = (self.time_residue - 1) * (self.stream_count() as i64 + 1)
            + self.ministep as i64;
        raw.rem_euclid(period as i64) as usize
    }
}

impl fmt::Display for BdmState {
    /// Canonical textual form `b1,...,bM;d;T;t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.batteries.iter().map(|b| b.to_string()).collect();
        write!(
            f,
            "{};{};{};{}",
            parts.join(","),
            self.drain,
            self.time_residue,
            self.ministep
        )
    }
}

/// The six kinds of transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    /// `b_t > d`, discrepancy nonzero: swap `b_t` and `d`. Probability `(q-1)/q`.
    Discharge,
    /// `b_t > d`, discrepancy zero: no change. Probability `1/q`.
    Inhibit,
    /// `b_t = d`: no change.
    NoopEqual,
    /// `b_t < d`: no change.
    NoopLess,
    /// Column boundary with `T < M`: drain decrement.
    DrainDec,
    /// Column boundary with `T = M`: every battery gains one unit.
    BatteryInc,
}

impl ActionKind {
    /// Transition probability with the field size bound to `q`.
    pub fn probability(self, q: u64) -> Ratio {
        match self {
            ActionKind::Discharge => {
                Ratio::new(BigInt::from(q - 1), BigInt::from(q))
            }
            ActionKind::Inhibit => Ratio::new(BigInt::from(1), BigInt::from(q)),
            _ => ratio_int(1),
        }
    }

    /// Change of class along this action: +1 for an inhibition, -1 for a
    /// no-op below, 0 otherwise.
    pub fn class_delta(self) -> i64 {
        match self {
            ActionKind::Inhibit => 1,
            ActionKind::NoopLess => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ActionKind::Discharge => "D",
            ActionKind::Inhibit => "I",
            ActionKind::NoopEqual => "N=",
            ActionKind::NoopLess => "N<",
            ActionKind::DrainDec => "d-",
            ActionKind::BatteryInc => "b+",
        };
        f.write_str(s)
    }
}

/// All feasible transitions out of `s`, with their successors.
///
/// The probabilities over the returned set sum to one for every state.
pub fn feasible_actions(s: &BdmState) -> Result<Vec<(ActionKind, BdmState)>, StateError> {
    if !s.invariant_holds() {
        return Err(StateError::InvariantViolated(s.to_string()));
    }
    s.check_restricted()?;
    let m = s.stream_count();
    let t = s.ministep;
    let mut out = Vec::with_capacity(2);
    if t <= m {
        let b_t = s.batteries[t - 1];
        if b_t > s.drain {
            let mut discharged = s.clone();
            discharged.batteries[t - 1] = s.drain;
            discharged.drain = b_t;
            discharged.ministep = t + 1;
            out.push((ActionKind::Discharge, discharged));
            let mut inhibited = s.clone();
            inhibited.ministep = t + 1;
            out.push((ActionKind::Inhibit, inhibited));
        } else {
            let kind = if b_t == s.drain {
                ActionKind::NoopEqual
            } else {
                ActionKind::NoopLess
            };
            let mut next = s.clone();
            next.ministep = t + 1;
            out.push((kind, next));
        }
    } else if s.time_residue < m as i64 {
        let mut next = s.clone();
        next.drain -= 1;
        next.time_residue += 1;
        next.ministep = 1;
        out.push((ActionKind::DrainDec, next));
    } else {
        let mut next = s.clone();
        for b in &mut next.batteries {
            *b += 1;
        }
        next.time_residue = 0;
        next.ministep = 1;
        out.push((ActionKind::BatteryInc, next));
    }
    debug_assert!(out.iter().all(|(_, succ)| succ.invariant_holds()));
    Ok(out)
}

/// The class `K(s) = -pi_s + M*T + 2 * sum_m btilde_m (M+1-m)`.
///
/// `pi_s` is the number of adjacent transpositions needed to sort the
/// sequence `(b_1, .., b_{t-1}, d, b_t, .., b_M)` into nonincreasing order
/// `btilde`, i.e. the number of strict inversion pairs; equal values are
/// never counted. Accepts the augmented state set (any integer `T`).
pub fn class_of(s: &BdmState) -> i64 {
    let m = s.stream_count();
    let mut v: Vec<i64> = Vec::with_capacity(m + 1);
    v.extend_from_slice(&s.batteries[..s.ministep - 1]);
    v.push(s.drain);
    v.extend_from_slice(&s.batteries[s.ministep - 1..]);

    let mut inversions = 0i64;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if v[i] < v[j] {
                inversions += 1;
            }
        }
    }

    let mut sorted = v.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let weighted: i64 = sorted
        .iter()
        .enumerate()
        .map(|(idx, &val)| val * (m as i64 - idx as i64))
        .sum();

    -inversions + m as i64 * s.time_residue + 2 * weighted
}

/// Class change along an action; see [`ActionKind::class_delta`].
pub fn class_delta(kind: ActionKind) -> i64 {
    kind.class_delta()
}

/// The unique path from the initial state to `s` that avoids `N<` actions,
/// reconstructed backwards.
///
/// Walking the transition relation in reverse is deterministic once `N<` is
/// excluded: a successor with `b_{t-1} < d` must come from a discharge,
/// `b_{t-1} = d` from `N=`, `b_{t-1} > d` from an inhibition, and the
/// boundary step is forced by the successor's time residue. A step cap of
/// `(K(s)+1)(M+1)^2 + (M+1)^2` converts any latent nontermination into an
/// explicit error.
pub fn canonical_path(s: &BdmState) -> Result<Vec<ActionKind>, StateError> {
    if !s.invariant_holds() {
        return Err(StateError::InvariantViolated(s.to_string()));
    }
    s.check_restricted()?;
    let m = s.stream_count();
    let start = BdmState::initial(m);
    let class = class_of(s);
    if class < 0 {
        return Err(StateError::Unreachable {
            state: s.to_string(),
            reason: format!("negative class {class}"),
        });
    }
    let period = ((m + 1) * (m + 1)) as i64;
    let cap = (class + 1) * period + period;

    let mut reversed = Vec::new();
    let mut current = s.clone();
    let mut steps = 0i64;
    while current != start {
        if steps >= cap {
            return Err(StateError::Unreachable {
                state: s.to_string(),
                reason: format!("step cap {cap} exceeded during reverse reconstruction"),
            });
        }
        steps += 1;
        let t = current.ministep;
        if t >= 2 {
            let slot = t - 2; // battery updated between ministeps t-1 and t
            let b = current.batteries[slot];
            let d = current.drain;
            if b < d {
                // Only a discharge is allowed here; swap back.
                current.batteries[slot] = d;
                current.drain = b;
                current.ministep = t - 1;
                reversed.push(ActionKind::Discharge);
            } else if b == d {
                current.ministep = t - 1;
                reversed.push(ActionKind::NoopEqual);
            } else {
                current.ministep = t - 1;
                reversed.push(ActionKind::Inhibit);
            }
        } else if current.time_residue >= 1 {
            current.drain += 1;
            current.time_residue -= 1;
            current.ministep = m + 1;
            reversed.push(ActionKind::DrainDec);
        } else {
            for b in &mut current.batteries {
                *b -= 1;
            }
            current.time_residue = m as i64;
            current.ministep = m + 1;
            reversed.push(ActionKind::BatteryInc);
        }
    }
    reversed.reverse();
    Ok(reversed)
}

/// Per-battery inhibition counts along the canonical path, plus the sorted
/// (nonincreasing) view. The counts of a class-`K` state always sum to `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IVector {
    pub per_battery: Vec<u64>,
    pub sorted: Vec<u64>,
}

pub fn i_vector(s: &BdmState) -> Result<IVector, StateError> {
    let m = s.stream_count();
    let path = canonical_path(s)?;
    let mut per_battery = vec![0u64; m];
    let mut ministep = m + 1; // the canonical path starts at the initial state
    for action in &path {
        match action {
            ActionKind::DrainDec | ActionKind::BatteryInc => ministep = 1,
            _ => {
                if *action == ActionKind::Inhibit {
                    per_battery[ministep - 1] += 1;
                }
                ministep += 1;
            }
        }
    }
    let mut sorted = per_battery.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Ok(IVector {
        per_battery,
        sorted,
    })
}

/// Generation of `s`: the ministep horizon `ceil(Itilde_1 / (M+1)) * (M+1)`
/// after which the mass of `s` settles at its stationary value.
pub fn generation(s: &BdmState) -> Result<i64, StateError> {
    let m = s.stream_count() as i64;
    let iv = i_vector(s)?;
    let top = iv.sorted.first().copied().unwrap_or(0) as i64;
    Ok((top + m) / (m + 1) * (m + 1))
}

/// Drain-negating mirror at the column boundary:
/// `(b_1, .., b_M, d; T, M+1) -> (-b_M - 1, .., -b_1 - 1, -d; M-T, M+1)`.
///
/// Preserves the class, negates the drain, reflects the time residue, and is
/// an involution.
pub fn mirror_state(s: &BdmState) -> Result<BdmState, StateError> {
    let m = s.stream_count();
    if s.ministep != m + 1 {
        return Err(StateError::NotAtColumnBoundary(s.ministep));
    }
    let batteries: Vec<i64> = s.batteries.iter().rev().map(|&b| -b - 1).collect();
    BdmState::new(batteries, -s.drain, m as i64 - s.time_residue, m + 1)
}

/// Minimal-class witness for drain `d` at slot `(T, t)`.
///
/// With `b = floor((-d - T)/M)` and `a = -d - T - M*b`, the state
/// `(b, .., b, b+1, .., b+1, d; T, t)` (that is, `M-a` low batteries and `a`
/// high ones) lies in the slot and has the returned class:
///
/// * `d > 0`: `K = d(M+1) + T - t + 1`,
/// * `d = 0`: `K = max(T - t + 1, 0)`,
/// * `d < 0`: `K = |d|(M+1) - ((M-t) + 1 + T)`, except that when `d`
///   ties with the low batteries (`d = b`, only possible for `d = -1`)
///   the exact value is `K = max(t - T, 0)`.
///
/// In particular `K <= |d|(M+1) + max(T - t + 1, 0)`; the pure
/// `|d|(M+1)` ceiling holds whenever `t > T` or `d < 0`.
pub fn witness_state(m: usize, t_res: i64, ministep: usize, d: i64) -> (BdmState, i64) {
    assert!(m >= 1);
    assert!((0..=m as i64).contains(&t_res));
    assert!((1..=m + 1).contains(&ministep));
    let m_i = m as i64;
    let total = -d - t_res; // battery charge to distribute
    let b = total.div_euclid(m_i);
    let a = total.rem_euclid(m_i);
    let mut batteries = vec![b; m];
    for slot in (m - a as usize)..m {
        batteries[slot] = b + 1;
    }
    let state = BdmState::new(batteries, d, t_res, ministep)
        .expect("witness construction satisfies the invariant");

    let class = if d > 0 {
        d * (m_i + 1) + t_res - ministep as i64 + 1
    } else if d == 0 {
        (t_res - ministep as i64 + 1).max(0)
    } else if d == b {
        (ministep as i64 - t_res).max(0)
    } else {
        -d * (m_i + 1) - ((m_i - ministep as i64) + 1 + t_res)
    };
    (state, class)
}
