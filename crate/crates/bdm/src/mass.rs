//! Exact mass propagation and class-bounded state enumeration.
//!
//! The chain's mass vector `mu_tau` is propagated one ministep at a time
//! with arbitrary-precision rationals. States whose class exceeds the cutoff
//! `K_max` are never stored: any mass flowing into them accumulates in a
//! single scalar `tail`, which is carried forward unchanged and never
//! redistributed. Every reported mass is therefore a certified lower bound
//! and `tail` an explicit error bar.
//!
//! Enumeration is a breadth-first closure of the transition relation from
//! the initial state, pruned at `K_max`. Every state of class `K <= K_max`
//! has an inhibition-only canonical path along which the class never
//! decreases, so the pruned search still reaches all of them; this is what
//! makes the per-slot censuses complete.

use crate::rational::{q_pow, Ratio};
use crate::state::{class_of, feasible_actions, ActionKind, BdmState, StateError};
use num::traits::{One, Zero};
use std::collections::{BTreeMap, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MassError {
    #[error("state budget exhausted: closure needs more than {budget} states")]
    ResourceExhausted { budget: usize },
    #[error(
        "census with K_max = {k_max} cannot certify all predecessors of a class-{class} state"
    )]
    IncompletePredecessors { class: i64, k_max: i64 },
    #[error("state {state} (class {class}) is outside the closure with K_max = {k_max}")]
    StateOutsideClosure {
        state: String,
        class: i64,
        k_max: i64,
    },
    #[error(transparent)]
    State(#[from] StateError),
}

/// Breadth-first closure of all reachable states with class at most `K_max`,
/// across every slot `(T, t)`, with reverse edges for balance checks.
#[derive(Debug, Clone)]
pub struct StateClosure {
    m: usize,
    k_max: i64,
    states: Vec<BdmState>,
    classes: Vec<i64>,
    index: HashMap<BdmState, usize>,
    predecessors: Vec<Vec<(usize, ActionKind)>>,
}

impl StateClosure {
    /// Enumerate from the initial state; fail once more than `budget` states
    /// would be stored.
    pub fn enumerate(m: usize, k_max: i64, budget: usize) -> Result<Self, MassError> {
        assert!(k_max >= 0);
        let mut closure = StateClosure {
            m,
            k_max,
            states: Vec::new(),
            classes: Vec::new(),
            index: HashMap::new(),
            predecessors: Vec::new(),
        };
        let start = BdmState::initial(m);
        closure.insert(start.clone(), budget)?;
        let mut queue = VecDeque::from([0usize]);
        while let Some(source) = queue.pop_front() {
            let state = closure.states[source].clone();
            for (kind, succ) in feasible_actions(&state)? {
                let class = class_of(&succ);
                if class > k_max {
                    continue;
                }
                let target = match closure.index.get(&succ) {
                    Some(&i) => i,
                    None => {
                        let i = closure.insert(succ, budget)?;
                        queue.push_back(i);
                        i
                    }
                };
                closure.predecessors[target].push((source, kind));
            }
        }
        Ok(closure)
    }

    fn insert(&mut self, state: BdmState, budget: usize) -> Result<usize, MassError> {
        if self.states.len() >= budget {
            return Err(MassError::ResourceExhausted { budget });
        }
        let class = class_of(&state);
        let idx = self.states.len();
        self.index.insert(state.clone(), idx);
        self.states.push(state);
        self.classes.push(class);
        self.predecessors.push(Vec::new());
        Ok(idx)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BdmState] {
        &self.states
    }

    pub fn class_of_index(&self, idx: usize) -> i64 {
        self.classes[idx]
    }

    pub fn contains(&self, s: &BdmState) -> bool {
        self.index.contains_key(s)
    }

    /// Census of one slot, states grouped by class.
    pub fn census(&self, t_res: i64, ministep: usize) -> StateCensus {
        let mut by_class: Vec<Vec<BdmState>> = vec![Vec::new(); self.k_max as usize + 1];
        for (idx, state) in self.states.iter().enumerate() {
            if state.time_residue() == t_res && state.ministep() == ministep {
                by_class[self.classes[idx] as usize].push(state.clone());
            }
        }
        for group in &mut by_class {
            group.sort();
        }
        StateCensus {
            m: self.m,
            t_res,
            ministep,
            k_max: self.k_max,
            by_class,
        }
    }

    /// Net stationary flow into `s` under the candidate eigenvector
    /// `q^{-K}`: `sum_{s' -> s} p(s' -> s) q^{-K(s')} - q^{-K(s)}`.
    ///
    /// Zero exactly when the eigenvector equation holds at `s`. Requires
    /// `K(s) <= K_max - 1` so that every predecessor (class within one of
    /// `K(s)`) is certified to be inside the closure.
    pub fn balance_residual(&self, s: &BdmState, q: u64) -> Result<Ratio, MassError> {
        let Some(&idx) = self.index.get(s) else {
            return Err(MassError::StateOutsideClosure {
                state: s.to_string(),
                class: class_of(s),
                k_max: self.k_max,
            });
        };
        let class = self.classes[idx];
        if class > self.k_max - 1 {
            return Err(MassError::IncompletePredecessors {
                class,
                k_max: self.k_max,
            });
        }
        let mut incoming = Ratio::zero();
        for &(pred, kind) in &self.predecessors[idx] {
            incoming += kind.probability(q) * q_pow(q, -self.classes[pred]);
        }
        Ok(incoming - q_pow(q, -class))
    }
}

/// Per-slot state census grouped by class.
#[derive(Debug, Clone)]
pub struct StateCensus {
    m: usize,
    t_res: i64,
    ministep: usize,
    k_max: i64,
    by_class: Vec<Vec<BdmState>>,
}

impl StateCensus {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t_res(&self) -> i64 {
        self.t_res
    }

    pub fn ministep(&self) -> usize {
        self.ministep
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn class_members(&self, class: i64) -> &[BdmState] {
        &self.by_class[class as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BdmState)> {
        self.by_class
            .iter()
            .enumerate()
            .flat_map(|(k, group)| group.iter().map(move |s| (k as i64, s)))
    }

    pub fn total(&self) -> usize {
        self.by_class.iter().map(Vec::len).sum()
    }
}

/// Convenience wrapper: census of `(T, t)` enumerated on the spot.
pub fn enumerate_states(
    m: usize,
    t_res: i64,
    ministep: usize,
    k_max: i64,
    budget: usize,
) -> Result<StateCensus, MassError> {
    Ok(StateClosure::enumerate(m, k_max, budget)?.census(t_res, ministep))
}

/// Exact mass vector at one ministep, plus the truncated tail.
#[derive(Debug, Clone)]
pub struct MassDistribution {
    tau: u64,
    q: u64,
    m: usize,
    k_max: i64,
    entries: BTreeMap<BdmState, Ratio>,
    tail: Ratio,
}

impl MassDistribution {
    /// All mass on the initial state, `tau = 0`.
    pub fn initial(m: usize, q: u64, k_max: i64) -> Self {
        assert!(q >= 2);
        let mut entries = BTreeMap::new();
        entries.insert(BdmState::initial(m), Ratio::one());
        MassDistribution {
            tau: 0,
            q,
            m,
            k_max,
            entries,
            tail: Ratio::zero(),
        }
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn tail(&self) -> &Ratio {
        &self.tail
    }

    pub fn entries(&self) -> &BTreeMap<BdmState, Ratio> {
        &self.entries
    }

    pub fn mass_of(&self, s: &BdmState) -> Ratio {
        self.entries.get(s).cloned().unwrap_or_else(Ratio::zero)
    }

    /// Total stored mass plus tail; exactly one for any reachable
    /// distribution.
    pub fn total_with_tail(&self) -> Ratio {
        self.entries.values().cloned().sum::<Ratio>() + self.tail.clone()
    }

    /// Stored mass aggregated by drain value.
    pub fn by_drain(&self) -> BTreeMap<i64, Ratio> {
        let mut out: BTreeMap<i64, Ratio> = BTreeMap::new();
        for (state, mass) in &self.entries {
            *out.entry(state.drain()).or_insert_with(Ratio::zero) += mass.clone();
        }
        out
    }

    /// One ministep of the chain. Mass flowing into states of class above
    /// `K_max` accrues to the tail; everything else is exact.
    pub fn step(&self) -> Result<MassDistribution, StateError> {
        let phase = ((self.tau) % ((self.m as u64 + 1) * (self.m as u64 + 1))) as usize;
        let mut entries: BTreeMap<BdmState, Ratio> = BTreeMap::new();
        let mut tail = self.tail.clone();
        for (state, mass) in &self.entries {
            debug_assert_eq!(state.slot_phase(), phase, "slot concentration violated");
            for (kind, succ) in feasible_actions(state)? {
                let contribution = kind.probability(self.q) * mass.clone();
                if class_of(&succ) > self.k_max {
                    tail += contribution;
                } else {
                    *entries.entry(succ).or_insert_with(Ratio::zero) += contribution;
                }
            }
        }
        let next = MassDistribution {
            tau: self.tau + 1,
            q: self.q,
            m: self.m,
            k_max: self.k_max,
            entries,
            tail,
        };
        debug_assert!(next.denominators_divide_q_pow_tau());
        Ok(next)
    }

    fn denominators_divide_q_pow_tau(&self) -> bool {
        use num::bigint::BigInt;
        let modulus = BigInt::from(self.q).pow(self.tau.min(4096) as u32);
        self.entries
            .values()
            .all(|mass| (&modulus % mass.denom()).is_zero())
    }
}

/// Propagate the chain through `n` complete columns: `tau = (M+1) n`.
pub fn run_to_column(
    m: usize,
    q: u64,
    n: u64,
    k_max: i64,
) -> Result<MassDistribution, StateError> {
    let mut mu = MassDistribution::initial(m, q, k_max);
    for _ in 0..(m as u64 + 1) * n {
        mu = mu.step()?;
    }
    Ok(mu)
}

/// Stationary mass of a state: `q^{-K(s)} / P(M, q)`.
pub fn stationary_mass(s: &BdmState, q: u64) -> Ratio {
    assert!(q >= 2);
    q_pow(q, -class_of(s)) / crate::partitions::partition_gf(s.stream_count(), q)
}
