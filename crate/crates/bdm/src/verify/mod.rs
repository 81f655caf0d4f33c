//! Verification campaigns: each structural identity of the model becomes a
//! reproducible pass/fail report.
//!
//! Theorem-grade campaigns (class counts, partition bijection, stationarity,
//! the closed deviation formula, brute force against direct complexity
//! computation) are expected to hold exactly and make the process exit
//! nonzero on failure. Conjecture-grade campaigns (finite-time mass values,
//! generation counts) only ever *report* mismatches.
//!
//! Every report embeds its parameters and tail bounds; given identical
//! parameters the serialized report is byte-identical across reruns (wall
//! time is deliberately kept out of the serialization).

pub mod sim;

use crate::field::{exhaustive_histogram, FieldError};
use crate::gamma::{gamma_closed, gamma_closed_total, gamma_enumerated, GammaError, GammaQuery};
use crate::mass::{MassDistribution, MassError, StateClosure};
use crate::partitions::{partition_gf, PartitionTable};
use crate::rational::{ratio_int, ratio_string, Ratio};
use crate::state::{canonical_path, generation, i_vector, StateError};
use num::bigint::BigInt;
use num::traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Mass(#[from] MassError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CampaignKind {
    /// Exact identity; a mismatch fails the campaign (and the process).
    Theorem,
    /// Conjectured identity; mismatches are reported, never fatal.
    Conjecture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportValue {
    pub label: String,
    /// Exact rational as `numerator/denominator`.
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub campaign: String,
    pub kind: CampaignKind,
    pub status: Status,
    pub parameters: BTreeMap<String, String>,
    /// Number of elementary assertions evaluated.
    pub checks: u64,
    /// Verbatim records of every failed assertion.
    pub mismatches: Vec<String>,
    /// Labelled exact quantities worth keeping (residuals, extremes).
    pub residuals: Vec<ReportValue>,
    /// Labelled tail bounds in force during the campaign.
    pub tail_bounds: Vec<ReportValue>,
    pub notes: Vec<String>,
    /// Wall time; excluded from serialization so reports stay
    /// byte-deterministic.
    #[serde(skip)]
    pub runtime_ms: u128,
}

impl VerificationReport {
    fn new(campaign: &str, kind: CampaignKind) -> Self {
        VerificationReport {
            campaign: campaign.to_string(),
            kind,
            status: Status::Pass,
            parameters: BTreeMap::new(),
            checks: 0,
            mismatches: Vec::new(),
            residuals: Vec::new(),
            tail_bounds: Vec::new(),
            notes: Vec::new(),
            runtime_ms: 0,
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.into(), value.to_string());
    }

    fn mismatch(&mut self, record: String) {
        self.status = Status::Fail;
        self.mismatches.push(record);
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn slots(m: usize) -> impl Iterator<Item = (i64, usize)> {
    (0..=m as i64).flat_map(move |t_res| (1..=m + 1).map(move |t| (t_res, t)))
}

/// Census class counts equal partition numbers: every slot `(T, t)` holds
/// exactly `P_M(K)` states of class `K`.
pub fn verify_class_counts(
    m: usize,
    k_max: i64,
    budget: usize,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("class-counts", CampaignKind::Theorem);
    report.param("M", m);
    report.param("K_max", k_max);
    let closure = StateClosure::enumerate(m, k_max, budget)?;
    let table = PartitionTable::new(m, k_max as usize);
    for (t_res, t) in slots(m) {
        let census = closure.census(t_res, t);
        for k in 0..=k_max {
            report.checks += 1;
            let have = census.class_members(k).len() as u128;
            let want = table.count(k);
            if have != want {
                report.mismatch(format!(
                    "slot ({t_res},{t}) class {k}: census {have} != P_{m}({k}) = {want}"
                ));
            }
        }
    }
    report.notes.push(format!(
        "closure holds {} states across {} slots",
        closure.len(),
        (m + 1) * (m + 1)
    ));
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// The sorted inhibition vectors of the class-`K` states of a slot are
/// exactly the partitions of `K` into at most `M` parts, each once.
pub fn verify_partition_bijection(
    m: usize,
    k_max: i64,
    budget: usize,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("partition-bijection", CampaignKind::Theorem);
    report.param("M", m);
    report.param("K_max", k_max);
    let closure = StateClosure::enumerate(m, k_max, budget)?;
    for (t_res, t) in slots(m) {
        let census = closure.census(t_res, t);
        for k in 0..=k_max {
            report.checks += 1;
            let mut vectors: Vec<Vec<u64>> = Vec::new();
            for state in census.class_members(k) {
                vectors.push(i_vector(state)?.sorted);
            }
            vectors.sort();
            let expected = crate::partitions::enumerate_partitions(m, k as u64);
            if vectors != expected {
                report.mismatch(format!(
                    "slot ({t_res},{t}) class {k}: I-vectors {vectors:?} != partitions {expected:?}"
                ));
            }
        }
    }
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// The vector `q^{-K(s)}` is a fixed point of the transition matrix: the
/// incoming-mass balance residual vanishes at every certified state.
pub fn verify_stationarity(
    m: usize,
    q: u64,
    k_max: i64,
    budget: usize,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("stationarity", CampaignKind::Theorem);
    report.param("M", m);
    report.param("q", q);
    report.param("K_max", k_max);
    let closure = StateClosure::enumerate(m, k_max, budget)?;
    let mut worst = Ratio::zero();
    for idx in 0..closure.len() {
        if closure.class_of_index(idx) > k_max - 1 {
            continue;
        }
        report.checks += 1;
        let state = closure.states()[idx].clone();
        let residual = closure.balance_residual(&state, q)?;
        if !residual.is_zero() {
            report.mismatch(format!(
                "state {state}: balance residual {}",
                ratio_string(&residual)
            ));
            if crate::rational::ratio_abs(&residual) > worst {
                worst = crate::rational::ratio_abs(&residual);
            }
        }
    }
    report
        .residuals
        .push(ReportValue {
            label: "max |residual|".into(),
            value: ratio_string(&worst),
        });
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// The closed deviation formula brackets the enumerated stationary sums on
/// every slot, plus exact normalisation and mirror antisymmetry.
pub fn verify_gamma(
    m: usize,
    q: u64,
    d_range: i64,
    k_max: i64,
    budget: usize,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("gamma", CampaignKind::Theorem);
    report.param("M", m);
    report.param("q", q);
    report.param("d_range", d_range);
    report.param("K_max", k_max);
    let closure = StateClosure::enumerate(m, k_max, budget)?;
    let mut max_tail = Ratio::zero();
    for (t_res, t) in slots(m) {
        let census = closure.census(t_res, t);
        for d in -d_range..=d_range {
            report.checks += 1;
            let gq = GammaQuery::new(q, m, t_res, t, d).expect("slot iteration is in range");
            let closed = gamma_closed(&gq);
            let (lower, tail) = gamma_enumerated(&gq, &census)?;
            if tail > max_tail {
                max_tail = tail.clone();
            }
            if closed < lower {
                report.mismatch(format!(
                    "gamma({d},{t_res},{t}): closed {} below enumerated lower sum {}",
                    ratio_string(&closed),
                    ratio_string(&lower)
                ));
            }
            if closed > lower.clone() + tail.clone() {
                report.mismatch(format!(
                    "gamma({d},{t_res},{t}): closed {} above lower {} + tail {}",
                    ratio_string(&closed),
                    ratio_string(&lower),
                    ratio_string(&tail)
                ));
            }
        }
        report.checks += 1;
        let total = gamma_closed_total(q, m, t_res, t);
        if total != ratio_int(1) {
            report.mismatch(format!(
                "normalisation at ({t_res},{t}): sum_d gamma = {}",
                ratio_string(&total)
            ));
        }
    }
    // Mirror antisymmetry at the column boundary, both closed and
    // enumerated-truncated (the censuses pair off state by state).
    for t_res in 0..=m as i64 {
        let census = closure.census(t_res, m + 1);
        let census_mirror = closure.census(m as i64 - t_res, m + 1);
        for d in -d_range..=d_range {
            report.checks += 1;
            let gq = GammaQuery::new(q, m, t_res, m + 1, d).expect("in range");
            let gq_mirror =
                GammaQuery::new(q, m, m as i64 - t_res, m + 1, -d).expect("in range");
            if gamma_closed(&gq) != gamma_closed(&gq_mirror) {
                report.mismatch(format!("closed antisymmetry broken at d={d}, T={t_res}"));
            }
            let (lower, _) = gamma_enumerated(&gq, &census)?;
            let (lower_mirror, _) = gamma_enumerated(&gq_mirror, &census_mirror)?;
            if lower != lower_mirror {
                report.mismatch(format!(
                    "enumerated antisymmetry broken at d={d}, T={t_res}: {} != {}",
                    ratio_string(&lower),
                    ratio_string(&lower_mirror)
                ));
            }
        }
    }
    report.tail_bounds.push(ReportValue {
        label: "max truncation tail".into(),
        value: ratio_string(&max_tail),
    });
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Ground-truth anchor: exhaustive prefix counts from the field oracle equal
/// `q^{M n}` times the exactly propagated mass, aggregated by drain.
pub fn verify_bruteforce(
    q: u64,
    m: usize,
    n_max: u64,
    budget: u128,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("bruteforce", CampaignKind::Theorem);
    report.param("q", q);
    report.param("M", m);
    report.param("n_max", n_max);
    report.param("budget", budget);
    let k_max = (m as i64 + 1) * n_max as i64;
    report.notes.push(format!(
        "K_max = (M+1) n_max = {k_max} keeps the propagation tail identically zero"
    ));
    for n in 0..=n_max {
        let histogram = exhaustive_histogram(q, m, n as usize, budget)?;
        let mu = crate::mass::run_to_column(m, q, n, k_max)?;
        if !mu.tail().is_zero() {
            report.mismatch(format!("n={n}: propagation tail {}", ratio_string(mu.tail())));
            continue;
        }
        let scale = Ratio::from_integer(BigInt::from(q).pow((m as u64 * n) as u32));
        let mut model: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (d, mass) in mu.by_drain() {
            let scaled = mass * scale.clone();
            if !scaled.denom().is_one() {
                report.mismatch(format!(
                    "n={n} d={d}: q^(Mn) * mass is not integral: {}",
                    ratio_string(&scaled)
                ));
                continue;
            }
            if !scaled.numer().is_zero() {
                model.insert(d, scaled.numer().clone());
            }
        }
        let oracle: BTreeMap<i64, BigInt> = histogram
            .into_iter()
            .map(|(d, count)| (d, BigInt::from(count)))
            .collect();
        report.checks += 1;
        if oracle != model {
            report.mismatch(format!("n={n}: oracle {oracle:?} != model {model:?}"));
        }
    }
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// `F(s)`: the overshoot factor of a state's mass at its arrival ministep.
///
/// With `j` the number of batteries sitting at the maximum of the value
/// multiset and `M_1 = M + 1 - j`, `F = prod_{m=M_1..M} q^m/(q^m - 1)`; the
/// empty product (no battery at the peak) is one.
fn overshoot_factor(s: &crate::state::BdmState, q: u64) -> Ratio {
    let m = s.stream_count();
    let peak = s
        .batteries()
        .iter()
        .copied()
        .chain(std::iter::once(s.drain()))
        .max()
        .expect("nonempty");
    let at_peak = s.batteries().iter().filter(|&&b| b == peak).count();
    let m1 = m + 1 - at_peak;
    let mut acc = ratio_int(1);
    for e in m1..=m {
        let qe = BigInt::from(q).pow(e as u32);
        acc *= Ratio::new(qe.clone(), qe - BigInt::from(1));
    }
    acc
}

/// Conjectured finite-time mass profile.
///
/// A state first carries mass at the ministep equal to the length of its
/// canonical (inhibition-only) path; at every later congruent ministep it
/// sits exactly at `mu_inf(s)`. At the arrival ministep itself the mass is
/// `mu_inf(s) F(s)` with the factor of [`overshoot_factor`]; that formula is
/// asserted where it is dynamically exact - at the column boundary
/// `t = M+1` (the initial state included) and wherever the drain lies
/// strictly below some battery. States whose drain ties or tops every
/// battery at an inner ministep arrive with a different factor (possibly
/// below one); their measured factors are recorded in the report instead of
/// being asserted.
pub fn verify_finite_n(
    m: usize,
    q: u64,
    tau_max: u64,
    budget: usize,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("finite-n", CampaignKind::Conjecture);
    report.param("M", m);
    report.param("q", q);
    report.param("tau_max", tau_max);
    let period = ((m + 1) * (m + 1)) as u64;
    let horizon = tau_max + 2 * period;
    // With K_max = horizon no mass is ever truncated (class grows by at most
    // one per ministep), so stored masses are exact.
    let k_max = horizon as i64;
    let closure = StateClosure::enumerate(m, k_max, budget)?;
    let gf = partition_gf(m, q);

    let mut snapshots: Vec<MassDistribution> = Vec::with_capacity(horizon as usize + 1);
    let mut mu = MassDistribution::initial(m, q, k_max);
    snapshots.push(mu.clone());
    for _ in 0..horizon {
        mu = mu.step()?;
        assert!(mu.tail().is_zero(), "horizon-sized cutoff cannot truncate");
        snapshots.push(mu.clone());
    }

    let mut generation_disagreements = 0u64;
    let mut recorded_factors: Vec<ReportValue> = Vec::new();
    for idx in 0..closure.len() {
        let state = closure.states()[idx].clone();
        let arrival = canonical_path(&state)?.len() as u64;
        if arrival > tau_max {
            continue;
        }
        let g = generation(&state)? as u64;
        let phase = state.slot_phase() as u64;
        let g_arrival = {
            let mut tau = phase;
            while tau < g {
                tau += period;
            }
            tau
        };
        if g_arrival != arrival {
            generation_disagreements += 1;
        }
        let mu_inf = crate::rational::q_pow(q, -closure.class_of_index(idx)) / gf.clone();
        let peak = state
            .batteries()
            .iter()
            .copied()
            .chain(std::iter::once(state.drain()))
            .max()
            .expect("nonempty");
        let factor_is_asserted = state.ministep() == m + 1 || state.drain() < peak;
        let mut tau = phase;
        while tau <= horizon {
            let actual = snapshots[tau as usize].mass_of(&state);
            if tau == arrival && !factor_is_asserted {
                // drain at the peak, mid-column: the arrival factor falls
                // outside the conjectured product family; record it.
                recorded_factors.push(ReportValue {
                    label: format!("arrival factor of {state} at tau={tau}"),
                    value: ratio_string(&(actual / mu_inf.clone())),
                });
                tau += period;
                continue;
            }
            report.checks += 1;
            let expected = match tau.cmp(&arrival) {
                std::cmp::Ordering::Less => Ratio::zero(),
                std::cmp::Ordering::Equal => mu_inf.clone() * overshoot_factor(&state, q),
                std::cmp::Ordering::Greater => mu_inf.clone(),
            };
            if actual != expected {
                report.mismatch(format!(
                    "state {state} (arrival={arrival}) at tau={tau}: mass {} expected {}",
                    ratio_string(&actual),
                    ratio_string(&expected)
                ));
            }
            tau += period;
        }
    }
    let recorded = recorded_factors.len();
    report.residuals.extend(recorded_factors);
    report.notes.push(
        "arrival read as the canonical path length; masses are zero at congruent ministeps \
         before it, mu_inf * F at it, and mu_inf afterwards; F is asserted at column \
         boundaries and for drains strictly below a battery"
            .into(),
    );
    report.notes.push(format!(
        "arrival factors recorded (drain at the peak, mid-column): {recorded}"
    ));
    report.notes.push(format!(
        "states whose arrival differs from the first congruent ministep at or after their \
         generation: {generation_disagreements}"
    ));
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Conjectured generation counts per slot: `#{s : g(s) <= g} = C(g+M, M)`
/// for every generation value `g` (a multiple of `M+1`), equivalently
/// `C(g+M, M) - C(g-1, M)` states arrive exactly at generation `g`.
pub fn verify_generations(
    m: usize,
    g_max: u64,
    budget: usize,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut report = VerificationReport::new("generations", CampaignKind::Conjecture);
    report.param("M", m);
    report.param("g_max", g_max);
    let k_max = (m as u64 * g_max) as i64;
    let closure = StateClosure::enumerate(m, k_max, budget)?;

    // generation of every closure state, grouped per slot
    let mut per_slot: BTreeMap<(i64, usize), Vec<u64>> = BTreeMap::new();
    for idx in 0..closure.len() {
        let state = &closure.states()[idx];
        let g = generation(state)? as u64;
        per_slot
            .entry((state.time_residue(), state.ministep()))
            .or_default()
            .push(g);
    }

    let step = (m + 1) as u64;
    for ((t_res, t), gens) in &per_slot {
        let mut g = 0u64;
        while g <= g_max {
            report.checks += 1;
            let cumulative = gens.iter().filter(|&&x| x <= g).count() as u128;
            let expected = binomial(g + m as u64, m as u64);
            if cumulative != expected {
                report.mismatch(format!(
                    "slot ({t_res},{t}) generation {g}: cumulative {cumulative} != C({},{m}) = {expected}",
                    g + m as u64
                ));
            }
            let exact = gens.iter().filter(|&&x| x == g).count() as u128;
            let expected_exact = if g == 0 {
                1
            } else {
                binomial(g + m as u64, m as u64) - binomial(g - 1, m as u64)
            };
            report.checks += 1;
            if exact != expected_exact {
                report.mismatch(format!(
                    "slot ({t_res},{t}) generation {g}: {exact} arrivals != {expected_exact}"
                ));
            }
            g += step;
        }
    }
    report.notes.push(
        "counts are per slot; consecutive generations differ by C(g+M,M) - C(g-1,M)".into(),
    );
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}
