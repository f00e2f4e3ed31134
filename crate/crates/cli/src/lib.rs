//! `verblunsky` subcommands. Every run prints one JSON report on stdout;
//! the exit code is 0 for PASS or EXPERIMENTAL, 1 for FAIL, 2 for usage errors.

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use verblunsky_core::alpha::count_tuples;
use verblunsky_core::alpha::{alpha_x_moment, nice_identity_check, verify_cn_identity};
use verblunsky_core::combinatorics::{MultiIndex, MultiplicityVector};
use verblunsky_core::exact::Rat;
use verblunsky_core::gaussian::{
    gaussian_x_moment, gaussian_x_moment_raw, variance_pmf, RAW_DEGREE_GUARD,
};
use verblunsky_core::graph::{c_via_graphs, enumerate_m_graphs};
use verblunsky_core::montecarlo::{
    mc_x_moment, mc_x_samples, pushforward_doubling_study, pushforward_experiment,
    write_samples_csv, McParams, PushforwardParams, Seed, Side, RNG_ALGORITHM,
};
use verblunsky_core::opuc::{
    jacobian_determinant, measure_density, szego_identity_gap, trig_moments,
    verblunsky_from_moments, JacobianMode, VerblunskySeq,
};
use verblunsky_core::report::{Report, Status};

#[derive(Parser, Debug)]
#[command(
    name = "verblunsky",
    version,
    about = "Exact and Monte Carlo checks of Verblunsky moment identities"
)]
pub struct Cli {
    /// Worker threads for sampling commands (recorded in every report).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// Multi-index such as 1:1,2:1
    #[arg(long)]
    p: MultiIndex,
    #[arg(long)]
    q: MultiIndex,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gaussian-law E(x^p (x^q)^*) as a polynomial in 1/beta.
    GaussianMoment {
        #[command(flatten)]
        pq: PairArgs,
    },
    /// Alpha-law E(x^p (x^q)^*) summed over indices up to --max-index.
    AlphaMoment {
        #[command(flatten)]
        pq: PairArgs,
        #[arg(long)]
        beta: Rat,
        #[arg(long)]
        max_index: u32,
    },
    /// Compare both laws at each beta.
    Identity {
        #[command(flatten)]
        pq: PairArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<Rat>,
        #[arg(long)]
        max_index: u32,
    },
    /// Sum of prod 1/((i beta+1)(j beta+1)) over gap sequences of degree n.
    NiceIdentity {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: Rat,
        #[arg(long)]
        max_index: u32,
    },
    /// E(x_n x_n^*) as a product of harmonic Bernoulli factors.
    Variance {
        #[arg(long)]
        n: u32,
    },
    /// Tuple count and graph-coloring count for a multiplicity vector.
    Count {
        #[command(flatten)]
        pq: PairArgs,
        /// Multiplicity vector such as 0:1,2:1
        #[arg(long)]
        m: MultiplicityVector,
    },
    /// |det| of the alpha -> x Jacobian against prod (1-|alpha_n|^2)^(n-1).
    Jacobian {
        /// Comma-separated complex literals (0.3+0.4i,...) or a JSON file of [re, im] pairs
        #[arg(long)]
        alpha: String,
        #[arg(long, value_enum, default_value_t = ModeArg::FiniteDifference)]
        mode: ModeArg,
    },
    /// Gap in the strong Szego identity at a series truncation order.
    SzegoCheck {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 200)]
        order: usize,
    },
    /// alpha -> density -> moments -> alpha.
    Roundtrip {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Monte Carlo estimate of E(x^p (x^q)^*).
    Mc {
        #[arg(long)]
        side: Side,
        #[command(flatten)]
        pq: PairArgs,
        #[arg(long)]
        beta: Rat,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of alpha coefficients drawn on the alpha side
        #[arg(long, default_value_t = 200)]
        n_trunc: usize,
        /// Write raw samples to this CSV file
        #[arg(long)]
        csv: Option<String>,
    },
    /// Experimental: alphas of exp(2 Re f) at finite radius for Gaussian f.
    Pushforward {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_alpha: usize,
        #[arg(long)]
        grid: Option<usize>,
        /// Additional levels with modes doubled and 1 - radius halved
        #[arg(long, default_value_t = 0)]
        doubling: usize,
        /// Run even when beta^2 >= 2
        #[arg(long)]
        allow_large_beta: bool,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    FiniteDifference,
    Multilinear,
}

impl std::str::FromStr for ModeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, false)
    }
}

/// Parses `--alpha`: a path to a JSON array of [re, im] pairs, or a
/// comma-separated list of complex literals.
pub fn parse_alpha(arg: &str) -> Result<VerblunskySeq, String> {
    let values: Vec<Complex64> = if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
        let pairs: Vec<[f64; 2]> =
            serde_json::from_str(&text).map_err(|e| format!("{arg}: {e}"))?;
        pairs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect()
    } else if arg.trim().is_empty() {
        Vec::new()
    } else {
        arg.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<Complex64>()
                    .map_err(|_| format!("invalid complex literal {:?}", tok.trim()))
            })
            .collect::<Result<_, _>>()?
    };
    VerblunskySeq::new(values).map_err(|e| e.to_string())
}

fn complex_list(alpha: &VerblunskySeq) -> Vec<[f64; 2]> {
    alpha.as_slice().iter().map(|z| [z.re, z.im]).collect()
}

/// Runs with the given arguments (including the program name), writing the
/// report to `out` and errors to `err`; returns the exit code.
pub fn run_to<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = writeln!(out, "{}", report.to_json());
            report.status.exit_code()
        }
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            2
        }
    }
}

/// `run_to` on the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_to(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

fn execute(cli: &Cli) -> Result<Report, String> {
    let threads = cli.threads.max(1);
    let report = match &cli.command {
        Command::GaussianMoment { pq } => {
            let value = gaussian_x_moment(&pq.p, &pq.q);
            let mut r = Report::new("gaussian-moment")
                .param("p", &pq.p)
                .param("q", &pq.q)
                .result("polynomial", &value);
            if pq.p.deg().max(pq.q.deg()) <= RAW_DEGREE_GUARD {
                let raw = gaussian_x_moment_raw(&pq.p, &pq.q).map_err(|e| e.to_string())?;
                r = r
                    .result("raw_polynomial", &raw)
                    .status(Status::from_pass(raw == value));
            } else {
                r = r.diagnostic("raw_polynomial", "skipped: degree above the raw-sum guard");
            }
            r
        }
        Command::AlphaMoment {
            pq,
            beta,
            max_index,
        } => {
            let res = alpha_x_moment(&pq.p, &pq.q, beta, *max_index).map_err(|e| e.to_string())?;
            Report::new("alpha-moment")
                .param("p", &pq.p)
                .param("q", &pq.q)
                .param("beta", beta)
                .param("max_index", max_index)
                .result("value", &res.value)
                .diagnostic("last_shell", &res.last_shell)
                .diagnostic("tail", &res.tail_estimate)
                .diagnostic("value_approx", res.value.to_f64())
        }
        Command::Identity {
            pq,
            beta,
            max_index,
        } => {
            let rep =
                verify_cn_identity(&pq.p, &pq.q, beta, *max_index).map_err(|e| e.to_string())?;
            let rows: Vec<_> = rep
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "beta": row.beta,
                        "gaussian": row.gaussian,
                        "alpha": row.alpha.value,
                        "difference": row.difference,
                        "pass": row.pass,
                    })
                })
                .collect();
            let tails: Vec<_> = rep
                .rows
                .iter()
                .map(|row| json!({"beta": row.beta, "tail": row.alpha.tail_estimate, "last_shell": row.alpha.last_shell}))
                .collect();
            let mut r = Report::new("identity")
                .param("p", &pq.p)
                .param("q", &pq.q)
                .param("beta", beta)
                .param("max_index", max_index)
                .result("polynomial", gaussian_x_moment(&pq.p, &pq.q))
                .result("rows", rows);
            if let [row] = rep.rows.as_slice() {
                r = r
                    .diagnostic("tail", &row.alpha.tail_estimate)
                    .diagnostic("last_shell", &row.alpha.last_shell);
            } else {
                r = r.diagnostic("tails", tails);
            }
            r.diagnostic("tolerance", "|difference| <= 10 * tail")
                .status(Status::from_pass(rep.pass))
        }
        Command::NiceIdentity { n, beta, max_index } => {
            let res = nice_identity_check(*n, beta, *max_index).map_err(|e| e.to_string())?;
            let difference = &res.rhs - &res.lhs;
            let pass = difference.abs() <= &res.tail * Rat::int(10);
            Report::new("nice-identity")
                .param("n", n)
                .param("beta", beta)
                .param("max_index", max_index)
                .result("lhs", &res.lhs)
                .result("rhs", &res.rhs)
                .result("difference", &difference)
                .diagnostic("tail", &res.tail)
                .diagnostic("last_shell", &res.last_shell)
                .status(Status::from_pass(pass))
        }
        Command::Variance { n } => {
            if *n == 0 {
                return Err("--n must be at least 1".into());
            }
            let poly = variance_pmf(*n);
            let d = MultiIndex::delta(*n);
            let pass = gaussian_x_moment(&d, &d) == poly;
            Report::new("variance")
                .param("n", n)
                .result("polynomial", &poly)
                .diagnostic("checked_against", "partition sum over cycle types")
                .status(Status::from_pass(pass))
        }
        Command::Count { pq, m } => {
            let graphs = enumerate_m_graphs(m).map_err(|e| e.to_string())?;
            let via_graphs = c_via_graphs(&pq.p, &pq.q, m).map_err(|e| e.to_string())?;
            let top = m.max_support().unwrap_or(0);
            let tuples = count_tuples(&pq.p, &pq.q, m, top);
            Report::new("count")
                .param("p", &pq.p)
                .param("q", &pq.q)
                .param("m", m)
                .result("tuples", tuples)
                .result("graphs", via_graphs)
                .diagnostic("m_graphs", graphs.len())
                .status(Status::from_pass(tuples == via_graphs))
        }
        Command::Jacobian { alpha, mode } => {
            let alpha = parse_alpha(alpha)?;
            let mode = match mode {
                ModeArg::FiniteDifference => JacobianMode::FiniteDifference,
                ModeArg::Multilinear => JacobianMode::Multilinear,
            };
            let res = jacobian_determinant(&alpha, mode).map_err(|e| e.to_string())?;
            let gap = res.relative_gap();
            let mut r = Report::new("jacobian")
                .param("alpha", complex_list(&alpha))
                .param("mode", format!("{mode:?}"))
                .result("det_abs", res.det_abs)
                .result("volume_factor", res.volume_factor)
                .diagnostic("relative_gap", gap);
            if let Some(w) = &res.warning {
                r = r.diagnostic("warning", w);
            }
            r.status(Status::from_pass(gap <= 1e-6))
        }
        Command::SzegoCheck { alpha, order } => {
            let alpha = parse_alpha(alpha)?;
            let gap = szego_identity_gap(&alpha, *order);
            Report::new("szego-check")
                .param("alpha", complex_list(&alpha))
                .param("order", order)
                .result("gap", gap)
                .diagnostic("threshold", 1e-8)
                .status(Status::from_pass(gap <= 1e-8))
        }
        Command::Roundtrip { alpha, grid } => {
            let alpha = parse_alpha(alpha)?;
            let density = measure_density(&alpha, *grid).map_err(|e| e.to_string())?;
            let moments = trig_moments(&density, alpha.len()).map_err(|e| e.to_string())?;
            let back = verblunsky_from_moments(&moments).map_err(|e| e.to_string())?;
            let max_error = (1..=alpha.len())
                .map(|k| (back.get(k) - alpha.get(k)).norm())
                .fold(0.0, f64::max);
            Report::new("roundtrip")
                .param("alpha", complex_list(&alpha))
                .param("grid", grid)
                .result("recovered", complex_list(&back))
                .result("max_error", max_error)
                .diagnostic("mass", density.mass())
                .diagnostic("threshold", 1e-9)
                .status(Status::from_pass(max_error <= 1e-9))
        }
        Command::Mc {
            side,
            pq,
            beta,
            samples,
            seed,
            n_trunc,
            csv,
        } => {
            let params = McParams {
                side: *side,
                p: pq.p.clone(),
                q: pq.q.clone(),
                beta: beta.clone(),
                n_trunc: *n_trunc,
                samples: *samples,
                seed: Seed(*seed),
                threads,
            };
            let check = mc_x_moment(&params).map_err(|e| e.to_string())?;
            let mut r = Report::new("mc")
                .param("side", side)
                .param("p", &pq.p)
                .param("q", &pq.q)
                .param("beta", beta)
                .param("samples", samples)
                .param("seed", seed);
            if *side == Side::Alpha {
                r = r.param("n_trunc", n_trunc);
            }
            r = r
                .result("exact", &check.exact_sampled)
                .result("exact_limit", &check.exact_limit)
                .diagnostic("mean", [check.stats.mean.re, check.stats.mean.im])
                .diagnostic("stderr", check.stats.stderr)
                .diagnostic("z_score", check.z_score)
                .diagnostic("truncation_gap", check.truncation_gap)
                .diagnostic("rng", RNG_ALGORITHM);
            if let Some(path) = csv {
                let values = mc_x_samples(&params).map_err(|e| e.to_string())?;
                let file = std::fs::File::create(path).map_err(|e| format!("{path}: {e}"))?;
                write_samples_csv(std::io::BufWriter::new(file), &values)
                    .map_err(|e| format!("{path}: {e}"))?;
                r = r.diagnostic(
                    "csv",
                    json!({"path": path, "columns": ["sample", "re", "im"]}),
                );
            }
            r.status(Status::from_pass(check.pass))
        }
        Command::Pushforward {
            beta,
            modes,
            radius,
            samples,
            seed,
            max_alpha,
            grid,
            doubling,
            allow_large_beta,
        } => {
            let params = PushforwardParams {
                beta: *beta,
                modes: *modes,
                radius: *radius,
                samples: *samples,
                max_alpha: *max_alpha,
                seed: Seed(*seed),
                threads,
                grid: *grid,
                allow_large_beta: *allow_large_beta,
            };
            let res = pushforward_experiment(&params).map_err(|e| e.to_string())?;
            let within = res.rows.first().is_some_and(|r| r.relative_error <= 0.1);
            let mut r = Report::new("pushforward")
                .param("beta", beta)
                .param("modes", modes)
                .param("radius", radius)
                .param("samples", samples)
                .param("seed", seed)
                .param("max_alpha", max_alpha)
                .param("grid", res.grid)
                .result("rows", &res.rows)
                .diagnostic("alpha_1_within_10_percent", within)
                .diagnostic("rng", RNG_ALGORITHM);
            if let Some(w) = &res.warning {
                r = r.diagnostic("warning", w);
            }
            if *doubling > 0 {
                let study =
                    pushforward_doubling_study(&params, doubling + 1).map_err(|e| e.to_string())?;
                let levels: Vec<_> = study
                    .iter()
                    .map(|l| {
                        json!({
                            "modes": l.modes,
                            "radius": l.radius,
                            "mean_abs_sq": l.result.rows.iter().map(|r| r.mean_abs_sq.mean.re).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                r = r.diagnostic("doubling", levels);
            }
            r.status(Status::Experimental)
        }
    };
    Ok(report.param("threads", threads))
}
