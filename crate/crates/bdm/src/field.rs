//! Joint linear complexity over prime fields, computed from first
//! principles.
//!
//! The joint linear complexity `L(n)` of `M` parallel sequences is the least
//! `L` such that a single recurrence
//!
//! ```text
//! a_{j,m} = alpha_1 a_{j-1,m} + ... + alpha_L a_{j-L,m}   (L < j <= n, all m)
//! ```
//!
//! with coefficients in `F_q` generates every stream from its first `L`
//! symbols. Feasibility for fixed `L` is a linear system solved by Gaussian
//! elimination, and feasibility is monotone in `L` (extend a recurrence by a
//! zero coefficient), so the minimum is found by a linear scan.
//!
//! This module is the crate's independent oracle: it never touches the
//! battery--discharge chain, so exhaustive counts produced here can certify
//! the model's mass propagation.

use std::collections::BTreeMap;
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("symbol {symbol} out of range for F_{q} (line {line})")]
    SymbolOutOfRange { symbol: i128, q: u64, line: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("enumeration needs {needed} prefixes, over the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("recurrence length {l} out of range 0..={n}")]
    RecurrenceLength { l: usize, n: usize },
}

/// A prime modulus for field arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    q: u64,
}

impl FieldSpec {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if !is_prime(q) {
            return Err(FieldError::NonPrimeModulus(q));
        }
        Ok(FieldSpec { q })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    #[cfg(test)]
    fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    fn inv(&self, a: u64) -> u64 {
        // Fermat; q is prime and a != 0.
        debug_assert!(!a.is_multiple_of(self.q));
        self.pow(a, self.q - 2)
    }

    fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        base %= self.q;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `M` parallel streams of symbols over `F_q`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multisequence {
    field: FieldSpec,
    streams: usize,
    columns: usize,
    symbols: Vec<u64>,
}

impl Multisequence {
    pub fn new(
        q: u64,
        streams: usize,
        columns: usize,
        symbols: Vec<u64>,
    ) -> Result<Self, FieldError> {
        let field = FieldSpec::new(q)?;
        assert!(streams >= 1);
        assert_eq!(symbols.len(), streams * columns);
        for (idx, &s) in symbols.iter().enumerate() {
            if s >= q {
                return Err(FieldError::SymbolOutOfRange {
                    symbol: s as i128,
                    q,
                    line: idx / columns + 2,
                });
            }
        }
        Ok(Multisequence {
            field,
            streams,
            columns,
            symbols,
        })
    }

    /// Text format: first line `q M n`, then `M` lines of `n` symbols.
    pub fn parse(reader: impl BufRead) -> Result<Self, FieldError> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(FieldError::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let header = header.map_err(|e| FieldError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(FieldError::Parse {
                line: 1,
                message: format!("expected `q M n`, got {head:?}"),
            });
        }
        let q: u64 = head[0].parse().map_err(|_| FieldError::Parse {
            line: 1,
            message: format!("bad modulus `{}`", head[0]),
        })?;
        let streams: usize = head[1].parse().map_err(|_| FieldError::Parse {
            line: 1,
            message: format!("bad stream count `{}`", head[1]),
        })?;
        let columns: usize = head[2].parse().map_err(|_| FieldError::Parse {
            line: 1,
            message: format!("bad column count `{}`", head[2]),
        })?;
        if streams == 0 {
            return Err(FieldError::Parse {
                line: 1,
                message: "stream count must be at least 1".into(),
            });
        }
        let mut symbols = Vec::with_capacity(streams * columns);
        for row in 0..streams {
            let line_no = row + 2;
            let (_, line) = lines.next().ok_or(FieldError::Parse {
                line: line_no,
                message: format!("missing stream row {}", row + 1),
            })?;
            let line = line.map_err(|e| FieldError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let row_syms: Vec<i128> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<i128>().map_err(|_| FieldError::Parse {
                        line: line_no,
                        message: format!("bad symbol `{tok}`"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if row_syms.len() != columns {
                return Err(FieldError::Parse {
                    line: line_no,
                    message: format!("expected {columns} symbols, got {}", row_syms.len()),
                });
            }
            for &s in &row_syms {
                if s < 0 || s as u128 >= q as u128 {
                    return Err(FieldError::SymbolOutOfRange {
                        symbol: s,
                        q,
                        line: line_no,
                    });
                }
                symbols.push(s as u64);
            }
        }
        Multisequence::new(q, streams, columns, symbols)
    }

    pub fn q(&self) -> u64 {
        self.field.q
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn symbol(&self, stream: usize, column: usize) -> u64 {
        self.symbols[stream * self.columns + column]
    }
}

/// Does some length-`l` recurrence generate every stream of `prefix`
/// (all columns, rectangular shape)?
pub fn solve_recurrence(prefix: &Multisequence, l: usize) -> Result<bool, FieldError> {
    if l > prefix.columns {
        return Err(FieldError::RecurrenceLength {
            l,
            n: prefix.columns,
        });
    }
    let lengths = vec![prefix.columns; prefix.streams];
    Ok(recurrence_feasible(prefix, &lengths, l))
}

/// Feasibility of a length-`l` recurrence where stream `m` must be matched on
/// its first `lengths[m]` symbols (ragged prefixes arise mid-column).
fn recurrence_feasible(seq: &Multisequence, lengths: &[usize], l: usize) -> bool {
    let field = seq.field;
    // Unknowns alpha_1..alpha_l; one equation per (stream, position).
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (stream, &len) in lengths.iter().enumerate() {
        for j in l..len {
            // a_{j+1} = sum_i alpha_i a_{j+1-i}  (1-based positions)
            let mut row = Vec::with_capacity(l + 1);
            for i in 1..=l {
                row.push(seq.symbol(stream, j - i));
            }
            row.push(seq.symbol(stream, j));
            rows.push(row);
        }
    }
    gaussian_solvable(field, rows, l)
}

/// Row-reduce an augmented system and report consistency.
fn gaussian_solvable(field: FieldSpec, mut rows: Vec<Vec<u64>>, unknowns: usize) -> bool {
    let mut rank = 0usize;
    for col in 0..unknowns {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field.inv(rows[rank][col]);
        for x in rows[rank].iter_mut() {
            *x = field.mul(*x, inv);
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col];
                for c in col..=unknowns {
                    let sub = field.mul(factor, rows[rank][c]);
                    rows[r][c] = field.sub(rows[r][c], sub);
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    // Inconsistent iff some row reduced to (0 .. 0 | nonzero).
    !rows
        .iter()
        .any(|row| row[..unknowns].iter().all(|&x| x == 0) && row[unknowns] != 0)
}

/// Least recurrence length generating the whole rectangular prefix.
pub fn joint_lc(prefix: &Multisequence) -> usize {
    let lengths = vec![prefix.columns; prefix.streams];
    joint_lc_ragged(prefix, &lengths)
}

fn joint_lc_ragged(seq: &Multisequence, lengths: &[usize]) -> usize {
    let max = lengths.iter().copied().max().unwrap_or(0);
    (0..=max)
        .find(|&l| recurrence_feasible(seq, lengths, l))
        .expect("l = n always satisfies the recurrence vacuously")
}

/// Typical complexity after `n` full columns: `ceil(n M / (M+1))`.
pub fn typical_complexity(m: usize, n: usize) -> u64 {
    let num = (n * m) as u64;
    let den = (m + 1) as u64;
    num.div_ceil(den)
}

/// The symbol-by-symbol complexity profile of a multisequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    /// `L` after each ministep, in the order (1,1), (1,2), .., (1,M), (2,1), ..
    pub per_symbol: Vec<u64>,
    /// `L(n)` for complete columns, indexed by `n` (so `per_column[0] = 0`).
    pub per_column: Vec<u64>,
    /// Deviations `d(n) = L(n) - ceil(n M / (M+1))`, same indexing.
    pub deviations: Vec<i64>,
}

/// Complexity of every prefix, one symbol at a time.
///
/// The prefix through ministep `(n, m)` consists of columns `1..n-1`
/// complete plus symbols `1..m` of column `n`; streams beyond `m` contribute
/// one column less, and the recurrence must hold for every stream over the
/// symbols that stream has.
pub fn profile(seq: &Multisequence) -> Profile {
    let m = seq.streams;
    let n = seq.columns;
    let mut per_symbol = Vec::with_capacity(m * n);
    let mut per_column = Vec::with_capacity(n + 1);
    let mut deviations = Vec::with_capacity(n + 1);
    per_column.push(0);
    deviations.push(0);
    for col in 1..=n {
        for stream in 1..=m {
            let mut lengths = vec![col - 1; m];
            for s in lengths.iter_mut().take(stream) {
                *s = col;
            }
            let l = joint_lc_ragged(seq, &lengths) as u64;
            per_symbol.push(l);
        }
        let l = *per_symbol.last().unwrap();
        per_column.push(l);
        deviations.push(l as i64 - typical_complexity(m, col) as i64);
    }
    Profile {
        per_symbol,
        per_column,
        deviations,
    }
}

/// Count every length-`n` prefix of an `M`-stream ensemble over `F_q` by its
/// deviation `d = L - ceil(n M/(M+1))`.
///
/// Enumerates all `q^(M n)` prefixes; refuses anything over `budget`. The
/// prefix space is split into disjoint index shards whose partial histograms
/// are merged by addition, so the result is identical for any shard count.
pub fn exhaustive_histogram(
    q: u64,
    streams: usize,
    columns: usize,
    budget: u128,
) -> Result<BTreeMap<i64, u64>, FieldError> {
    FieldSpec::new(q)?;
    let digits = streams * columns;
    let needed: u128 = (q as u128)
        .checked_pow(digits as u32)
        .ok_or(FieldError::BudgetExceeded {
            needed: u128::MAX,
            budget,
        })?;
    if needed > budget {
        return Err(FieldError::BudgetExceeded { needed, budget });
    }
    let total = needed as u64;
    let typical = typical_complexity(streams, columns) as i64;

    use rayon::prelude::*;
    let shards: u64 = 64.min(total.max(1));
    let hist = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let lo = (total as u128 * shard as u128 / shards as u128) as u64;
            let hi = (total as u128 * (shard + 1) as u128 / shards as u128) as u64;
            let mut local: BTreeMap<i64, u64> = BTreeMap::new();
            let mut symbols = vec![0u64; digits];
            for index in lo..hi {
                let mut rest = index;
                for slot in symbols.iter_mut() {
                    *slot = rest % q;
                    rest /= q;
                }
                let seq = Multisequence {
                    field: FieldSpec { q },
                    streams,
                    columns,
                    symbols: symbols.clone(),
                };
                let l = joint_lc(&seq) as i64;
                *local.entry(l - typical).or_insert(0) += 1;
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (d, count) in b {
                *a.entry(d).or_insert(0) += count;
            }
            a
        });
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ms(q: u64, streams: usize, columns: usize, symbols: &[u64]) -> Multisequence {
        Multisequence::new(q, streams, columns, symbols.to_vec()).unwrap()
    }

    #[test]
    fn field_spec_rejects_composites() {
        assert!(FieldSpec::new(2).is_ok());
        assert!(FieldSpec::new(3).is_ok());
        assert_eq!(FieldSpec::new(4), Err(FieldError::NonPrimeModulus(4)));
        assert_eq!(FieldSpec::new(9), Err(FieldError::NonPrimeModulus(9)));
        assert_eq!(FieldSpec::new(1), Err(FieldError::NonPrimeModulus(1)));
    }

    #[test]
    fn recurrence_base_cases() {
        let zero = ms(2, 1, 3, &[0, 0, 0]);
        assert!(solve_recurrence(&zero, 0).unwrap());
        let one = ms(2, 1, 1, &[1]);
        assert!(!solve_recurrence(&one, 0).unwrap());
        // "110" over F_2 satisfies a_{j} = a_{j-1} + a_{j-2}: 0 = 1 + 1.
        let s = ms(2, 1, 3, &[1, 1, 0]);
        assert!(solve_recurrence(&s, 2).unwrap());
        assert!(solve_recurrence(&s, 42).is_err());
    }

    /// Exhaustive search over all coefficient vectors, used as the oracle's
    /// own oracle on tiny instances.
    fn feasible_by_search(prefix: &Multisequence, l: usize) -> bool {
        let q = prefix.q();
        let mut coeffs = vec![0u64; l];
        loop {
            let ok = (0..prefix.streams()).all(|stream| {
                (l..prefix.columns()).all(|j| {
                    let mut acc = 0u64;
                    for (i, &c) in coeffs.iter().enumerate() {
                        acc = (acc + c * prefix.symbol(stream, j - 1 - i)) % q;
                    }
                    acc == prefix.symbol(stream, j)
                })
            });
            if ok {
                return true;
            }
            // increment the coefficient vector in base q
            let mut pos = 0;
            loop {
                if pos == l {
                    return false;
                }
                coeffs[pos] += 1;
                if coeffs[pos] < q {
                    break;
                }
                coeffs[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn elimination_matches_exhaustive_search() {
        for q in [2u64, 3] {
            let n = 5usize;
            let total = q.pow(n as u32);
            for index in 0..total {
                let mut symbols = vec![0u64; n];
                let mut rest = index;
                for s in symbols.iter_mut() {
                    *s = rest % q;
                    rest /= q;
                }
                let seq = ms(q, 1, n, &symbols);
                for l in 0..=n {
                    assert_eq!(
                        solve_recurrence(&seq, l).unwrap(),
                        feasible_by_search(&seq, l),
                        "q={q} seq={symbols:?} l={l}"
                    );
                }
            }
        }
    }

    #[test]
    fn joint_lc_base_cases() {
        assert_eq!(joint_lc(&ms(2, 1, 1, &[0])), 0);
        assert_eq!(joint_lc(&ms(2, 1, 1, &[1])), 1);
        // Columns ((1),(0)): L = 0 fails on stream 1, L = 1 generates any
        // one-column prefix.
        assert_eq!(joint_lc(&ms(2, 2, 1, &[1, 0])), 1);
        // "1000...": the length-1 recurrence a_j = 0 * a_{j-1} works.
        assert_eq!(joint_lc(&ms(2, 1, 6, &[1, 0, 0, 0, 0, 0])), 1);
    }

    /// Classic single-sequence synthesis, kept deliberately separate from the
    /// elimination path.
    fn berlekamp_massey(q: u64, seq: &[u64]) -> usize {
        let field = FieldSpec::new(q).unwrap();
        let mut c = vec![0u64; seq.len() + 1];
        let mut b = vec![0u64; seq.len() + 1];
        c[0] = 1;
        b[0] = 1;
        let mut l = 0usize;
        let mut m = 1usize;
        let mut b_coeff = 1u64;
        for n in 0..seq.len() {
            let mut delta = seq[n];
            for i in 1..=l {
                delta = field.add(delta, field.mul(c[i], seq[n - i]));
            }
            if delta == 0 {
                m += 1;
            } else if 2 * l <= n {
                let t = c.clone();
                let coeff = field.mul(delta, field.inv(b_coeff));
                for i in 0..=seq.len() - m {
                    let sub = field.mul(coeff, b[i]);
                    c[i + m] = field.sub(c[i + m], sub);
                }
                l = n + 1 - l;
                b = t;
                b_coeff = delta;
                m = 1;
            } else {
                let coeff = field.mul(delta, field.inv(b_coeff));
                for i in 0..=seq.len() - m {
                    let sub = field.mul(coeff, b[i]);
                    c[i + m] = field.sub(c[i + m], sub);
                }
                m += 1;
            }
        }
        l
    }

    #[test]
    fn matches_berlekamp_massey_for_single_streams() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for q in [2u64, 3, 5] {
            for _ in 0..40 {
                let n = rng.gen_range(1..=12);
                let symbols: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
                let seq = ms(q, 1, n, &symbols);
                assert_eq!(
                    joint_lc(&seq),
                    berlekamp_massey(q, &symbols),
                    "q={q} seq={symbols:?}"
                );
            }
        }
    }

    #[test]
    fn profile_zero_sequence() {
        let seq = ms(2, 2, 4, &[0; 8]);
        let p = profile(&seq);
        assert!(p.per_symbol.iter().all(|&l| l == 0));
        for n in 0..=4usize {
            let expected = -((n * 2).div_ceil(3) as i64);
            assert_eq!(p.deviations[n], expected);
        }
    }

    #[test]
    fn profile_single_one() {
        let p = profile(&ms(2, 1, 1, &[1]));
        assert_eq!(p.per_column, vec![0, 1]);
        assert_eq!(p.deviations, vec![0, 0]); // d(1) = 1 - ceil(1/2) = 0
    }

    #[test]
    fn histogram_tiny_cases() {
        let h = exhaustive_histogram(2, 1, 1, 1 << 20).unwrap();
        assert_eq!(h, BTreeMap::from([(-1, 1), (0, 1)]));
        let h0 = exhaustive_histogram(2, 1, 0, 1 << 20).unwrap();
        assert_eq!(h0, BTreeMap::from([(0, 1)]));
        let h2 = exhaustive_histogram(2, 1, 2, 1 << 20).unwrap();
        assert_eq!(h2.values().sum::<u64>(), 4);
        assert!(matches!(
            exhaustive_histogram(2, 1, 40, 1 << 20),
            Err(FieldError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "2 2 3\n1 0 1\n0 1 1\n";
        let seq = Multisequence::parse(text.as_bytes()).unwrap();
        assert_eq!(seq.q(), 2);
        assert_eq!(seq.streams(), 2);
        assert_eq!(seq.symbol(1, 2), 1);

        let bad = Multisequence::parse("2 1 2\n1 7\n".as_bytes());
        assert_eq!(
            bad,
            Err(FieldError::SymbolOutOfRange {
                symbol: 7,
                q: 2,
                line: 2
            })
        );
        let short = Multisequence::parse("2 2 2\n1 0\n".as_bytes());
        assert!(matches!(short, Err(FieldError::Parse { line: 3, .. })));
        let composite = Multisequence::parse("6 1 1\n0\n".as_bytes());
        assert_eq!(composite, Err(FieldError::NonPrimeModulus(6)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn profile_is_monotone(
            q_idx in 0usize..2,
            streams in 1usize..=3,
            columns in 1usize..=4,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let q = [2u64, 3][q_idx];
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let symbols: Vec<u64> =
                (0..streams * columns).map(|_| rng.gen_range(0..q)).collect();
            let seq = ms(q, streams, columns, &symbols);
            let p = profile(&seq);
            let mut last = 0u64;
            for &l in &p.per_symbol {
                prop_assert!(l >= last);
                last = l;
            }
        }

        #[test]
        fn exactly_one_extension_keeps_l(
            q_idx in 0usize..2,
            streams in 1usize..=2,
            columns in 1usize..=3,
            seed in 0u64..1000,
        ) {
            // The expansion map is an isometry: among the q choices for the
            // next symbol, either all leave L unchanged (quiet ministep) or
            // exactly one does and the other q-1 raise it.
            use rand::{Rng, SeedableRng};
            let q = [2u64, 3][q_idx];
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let total = streams * columns;
            let symbols: Vec<u64> = (0..total).map(|_| rng.gen_range(0..q)).collect();
            // Extend at the last ministep: vary the final symbol.
            let base_lengths = {
                let mut lengths = vec![columns - 1; streams];
                // partial column: streams 1..=k have `columns` symbols
                let k = rng.gen_range(1..=streams);
                for s in lengths.iter_mut().take(k) {
                    *s = columns;
                }
                lengths
            };
            // The symbol added last in ministep order belongs to the deepest
            // full-length stream.
            let vary_stream = base_lengths
                .iter()
                .rposition(|&len| len == columns)
                .unwrap();
            let mut shorter = base_lengths.clone();
            shorter[vary_stream] = columns - 1;
            let seq0 = ms(q, streams, columns, &symbols);
            let l_before = joint_lc_ragged(&seq0, &shorter);
            let mut unchanged = 0u64;
            for sym in 0..q {
                let mut variant = symbols.clone();
                variant[vary_stream * columns + columns - 1] = sym;
                let seq = ms(q, streams, columns, &variant);
                let l = joint_lc_ragged(&seq, &base_lengths);
                prop_assert!(l >= l_before);
                if l == l_before {
                    unchanged += 1;
                }
            }
            prop_assert!(unchanged == 1 || unchanged == q,
                "unchanged={unchanged} of q={q}");
        }
    }
}
