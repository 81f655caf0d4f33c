//! Command-line surface of the battery--discharge engine.
//!
//! Subcommands: `profile` (joint complexity profile of a multisequence
//! file), `enumerate` (state census / exact mass dump), `gamma` (closed and
//! enumerated deviation distribution), `simulate` (seeded Monte Carlo), and
//! `verify` (the verification campaigns).
//!
//! All outputs are byte-deterministic given identical flags and seed; exact
//! rationals are printed as `numerator/denominator`, never as floats.

use bdm::field::Multisequence;
use bdm::gamma::{gamma_closed, gamma_enumerated, GammaQuery};
use bdm::mass::{run_to_column, stationary_mass, StateClosure};
use bdm::rational::{ratio_string, Ratio};
use bdm::verify::sim::simulate;
use bdm::verify::{
    verify_bruteforce, verify_class_counts, verify_finite_n, verify_gamma,
    verify_generations, verify_partition_bijection, verify_stationarity, CampaignKind,
    VerificationReport,
};
use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable naming the default output directory for relative
/// `--out` paths.
const OUT_DIR_ENV: &str = "BDM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "bdm",
    about = "Exact engine for the battery-discharge model of joint linear complexity",
    version
)]
struct Cli {
    /// Cap the worker thread pool (default: one thread per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint linear complexity profile of a multisequence file.
    ///
    /// Input format: first line `q M n`, then M lines of n symbols in [0,q).
    Profile {
        /// Input file path.
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Enumerate the state census (optionally with stationary or finite-n
    /// masses).
    Enumerate {
        #[arg(long = "M")]
        m: usize,
        /// Class cutoff.
        #[arg(long)]
        kmax: i64,
        /// Restrict to one slot (requires --t).
        #[arg(long = "T")]
        t_res: Option<i64>,
        /// Restrict to one slot (requires --T).
        #[arg(long)]
        t: Option<usize>,
        /// Field size; enables the stationary-mass columns.
        #[arg(long)]
        q: Option<u64>,
        /// Dump the exact mass distribution after n complete columns
        /// instead of stationary masses (requires --q).
        #[arg(long)]
        n: Option<u64>,
        /// State budget for the enumeration.
        #[arg(long, default_value_t = 10_000_000)]
        budget: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Closed and enumerated deviation distribution gamma(d, T, t).
    Gamma {
        #[arg(long)]
        q: u64,
        #[arg(long = "M")]
        m: usize,
        #[arg(long = "T")]
        t_res: i64,
        #[arg(long)]
        t: usize,
        /// Single deviation value (alternative to --dmin/--dmax).
        #[arg(long, allow_hyphen_values = true)]
        d: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        dmin: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        dmax: Option<i64>,
        /// Class cutoff for the enumerated sums.
        #[arg(long, default_value_t = 30)]
        kmax: i64,
        #[arg(long, default_value_t = 10_000_000)]
        budget: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Seeded Monte Carlo sampling of the chain.
    Simulate {
        #[arg(long)]
        q: u64,
        #[arg(long = "M")]
        m: usize,
        /// Columns per run.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run a verification campaign and write its JSON report.
    ///
    /// Suites: class-counts, partition-bijection, stationarity, gamma,
    /// bruteforce, finite-n, generations. Theorem-grade suites set a
    /// nonzero exit status on failure; conjecture suites only report.
    Verify {
        suite: String,
        #[arg(long = "M", default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        q: u64,
        /// Columns (bruteforce) or ministeps (finite-n).
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        kmax: Option<i64>,
        /// Deviation range for the gamma suite.
        #[arg(long, default_value_t = 4)]
        dmax: i64,
        /// Generation horizon for the generations suite.
        #[arg(long, default_value_t = 12)]
        gmax: u64,
        /// Prefix budget (bruteforce) in number of prefixes.
        #[arg(long, default_value_t = 1 << 26)]
        budget: u128,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when omitted. Relative paths resolve against
    /// $BDM_OUT_DIR when that variable is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn write(&self, content: &str) -> std::io::Result<()> {
        match &self.out {
            None => {
                print!("{content}");
                std::io::stdout().flush()
            }
            Some(path) => {
                let resolved = if path.is_relative() {
                    match std::env::var_os(OUT_DIR_ENV) {
                        Some(dir) => PathBuf::from(dir).join(path),
                        None => path.clone(),
                    }
                } else {
                    path.clone()
                };
                if let Some(parent) = resolved.parent() {
                    if !parent.as_os_str().is_empty() {
                        std::fs::create_dir_all(parent)?;
                    }
                }
                std::fs::write(&resolved, content)?;
                eprintln!("wrote {}", resolved.display());
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn run(command: Command) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match command {
        Command::Profile { input, out } => {
            let reader = BufReader::new(File::open(&input)?);
            let seq = Multisequence::parse(reader)?;
            let profile = bdm::field::profile(&seq);
            let mut csv = format!(
                "# q={} M={} columns={}\nn,L,d\n",
                seq.q(),
                seq.streams(),
                seq.columns()
            );
            for n in 0..=seq.columns() {
                csv.push_str(&format!(
                    "{n},{},{}\n",
                    profile.per_column[n], profile.deviations[n]
                ));
            }
            out.write(&csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate {
            m,
            kmax,
            t_res,
            t,
            q,
            n,
            budget,
            out,
        } => {
            if m < 1 {
                return Ok(usage_error("--M must be at least 1"));
            }
            if kmax < 0 {
                return Ok(usage_error("--kmax must be nonnegative"));
            }
            if let Some(tr) = t_res {
                if !(0..=m as i64).contains(&tr) {
                    return Ok(usage_error(&format!("--T must lie in 0..={m}")));
                }
            }
            if let Some(t) = t {
                if !(1..=m + 1).contains(&t) {
                    return Ok(usage_error(&format!("--t must lie in 1..={}", m + 1)));
                }
            }
            if let Some(q) = q {
                if q < 2 {
                    return Ok(usage_error("--q must be at least 2"));
                }
            }
            let slot_filter = |state: &bdm::BdmState| {
                t_res.is_none_or(|tr| state.time_residue() == tr)
                    && t.is_none_or(|t| state.ministep() == t)
            };
            let csv = match n {
                Some(n) => {
                    let Some(q) = q else {
                        return Ok(usage_error("--n requires --q"));
                    };
                    let mu = run_to_column(m, q, n, kmax)?;
                    let mut rows: Vec<(String, i64, Ratio)> = mu
                        .entries()
                        .iter()
                        .filter(|(s, _)| slot_filter(s))
                        .map(|(s, mass)| {
                            (s.to_string(), bdm::state::class_of(s), mass.clone())
                        })
                        .collect();
                    rows.sort();
                    let mut csv = format!(
                        "# M={m} q={q} tau={} K_max={kmax} tail={}\nstate,class,mass_num,mass_den\n",
                        mu.tau(),
                        ratio_string(mu.tail()),
                    );
                    for (state, class, mass) in rows {
                        csv.push_str(&format!(
                            "\"{state}\",{class},{},{}\n",
                            mass.numer(),
                            mass.denom()
                        ));
                    }
                    csv
                }
                None => {
                    let closure = StateClosure::enumerate(m, kmax, budget)?;
                    let mut rows: Vec<(String, i64, Option<Ratio>)> = closure
                        .states()
                        .iter()
                        .filter(|s| slot_filter(s))
                        .map(|s| {
                            let mass = q.map(|q| stationary_mass(s, q));
                            (s.to_string(), bdm::state::class_of(s), mass)
                        })
                        .collect();
                    rows.sort();
                    let q_label =
                        q.map_or_else(|| "-".to_string(), |q| q.to_string());
                    let mut csv = format!(
                        "# M={m} q={q_label} tau=stationary K_max={kmax} tail=0/1\nstate,class,mass_num,mass_den\n"
                    );
                    for (state, class, mass) in rows {
                        match mass {
                            Some(mass) => csv.push_str(&format!(
                                "\"{state}\",{class},{},{}\n",
                                mass.numer(),
                                mass.denom()
                            )),
                            None => csv.push_str(&format!("\"{state}\",{class},,\n")),
                        }
                    }
                    csv
                }
            };
            out.write(&csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gamma {
            q,
            m,
            t_res,
            t,
            d,
            dmin,
            dmax,
            kmax,
            budget,
            out,
        } => {
            let range = match (d, dmin, dmax) {
                (Some(d), None, None) => d..=d,
                (None, Some(lo), Some(hi)) if lo <= hi => lo..=hi,
                _ => {
                    return Ok(usage_error(
                        "specify either --d or both --dmin and --dmax (with dmin <= dmax)",
                    ))
                }
            };
            if GammaQuery::new(q, m, t_res, t, 0).is_err() {
                return Ok(usage_error(&format!(
                    "invalid slot: need q >= 2, M >= 1, 0 <= T <= M, 1 <= t <= M+1 (got q={q} M={m} T={t_res} t={t})"
                )));
            }
            let closure = StateClosure::enumerate(m, kmax, budget)?;
            let census = closure.census(t_res, t);
            let mut csv =
                String::from("d,T,t,closed_num,closed_den,enum_num,enum_den,tail_num,tail_den\n");
            for d in range {
                let gq = GammaQuery::new(q, m, t_res, t, d).expect("validated above");
                let closed = gamma_closed(&gq);
                let (lower, tail) = gamma_enumerated(&gq, &census)?;
                csv.push_str(&format!(
                    "{d},{t_res},{t},{},{},{},{},{},{}\n",
                    closed.numer(),
                    closed.denom(),
                    lower.numer(),
                    lower.denom(),
                    tail.numer(),
                    tail.denom()
                ));
            }
            out.write(&csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            q,
            m,
            n,
            runs,
            seed,
            out,
        } => {
            if q < 2 || m < 1 || runs < 1 {
                return Ok(usage_error("need q >= 2, M >= 1, runs >= 1"));
            }
            let stats = simulate(q, m, n, runs, seed);
            let mut csv = format!(
                "# q={q} M={m} n={n} runs={runs} seed={seed} rng={}\nd,count\n",
                stats.rng
            );
            for (d, count) in &stats.histogram {
                csv.push_str(&format!("{d},{count}\n"));
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            csv.push_str(&format!(
                "# sup_ratio_mean={:.6}\n# inf_ratio_mean={:.6}\n# log_law_constant={:.6}\n# max_abs_d={}\n",
                mean(&stats.sup_ratio),
                mean(&stats.inf_ratio),
                stats.log_law_constant(),
                stats.max_abs_d.iter().max().unwrap(),
            ));
            out.write(&csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            m,
            q,
            n,
            kmax,
            dmax,
            gmax,
            budget,
            out,
        } => {
            if m < 1 || q < 2 {
                return Ok(usage_error("need M >= 1 and q >= 2"));
            }
            let state_budget = 10_000_000usize;
            let report: VerificationReport = match suite.as_str() {
                "class-counts" => verify_class_counts(m, kmax.unwrap_or(40), state_budget)?,
                "partition-bijection" => {
                    verify_partition_bijection(m, kmax.unwrap_or(20), state_budget)?
                }
                "stationarity" => verify_stationarity(m, q, kmax.unwrap_or(30), state_budget)?,
                "gamma" => verify_gamma(m, q, dmax, kmax.unwrap_or(30), state_budget)?,
                "bruteforce" => verify_bruteforce(q, m, n.unwrap_or(6), budget)?,
                "finite-n" => verify_finite_n(m, q, n.unwrap_or(12), state_budget)?,
                "generations" => verify_generations(m, gmax, state_budget)?,
                other => {
                    return Ok(usage_error(&format!(
                        "unknown suite `{other}`; expected one of class-counts, \
                         partition-bijection, stationarity, gamma, bruteforce, finite-n, \
                         generations"
                    )));
                }
            };
            let passed = report.passed();
            let kind = report.kind;
            eprintln!(
                "{}: {} ({} checks, {} mismatches, {} ms)",
                report.campaign,
                if passed { "pass" } else { "FAIL" },
                report.checks,
                report.mismatches.len(),
                report.runtime_ms
            );
            out.write(&(report.to_json() + "\n"))?;
            if !passed && kind == CampaignKind::Theorem {
                Ok(ExitCode::FAILURE)
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}
