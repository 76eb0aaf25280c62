//! Command-line surface for the superell library.
//!
//! Exit codes: 0 success, 2 usage or precondition violations, 1 internal
//! errors.

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};
use superell::census::{
    run_census, run_census_to_path, vanish_density_check, CensusConfig, CensusSummary,
};
use superell::coverings::{covering_ideal, fiber_census, pi_delta_eval, Fq, SplitCoveringSpec};
use superell::densities::{
    coarse_bounds, density_report, factor_class_row, group_order_g_mod_p, group_order_ghat_mod8,
    lemma_chain_check, refined_delta_max_heuristic, table1,
};
use superell::forms::BinaryForm;
use superell::localsolve::{everywhere_local, zp_soluble};
use superell::orbits::{construct_orbit, verify_certificate, PrimitiveSolution};
use superell::orders::build_context;
use superell::Error;

#[derive(Parser)]
#[command(
    name = "superell",
    version,
    about = "Exact arithmetic for superelliptic equations y² = F(x,z)"
)]
struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monicize a form: (1/f0)·F(x, f0·z).
    Monicize {
        #[arg(long)]
        form: String,
    },
    /// Test the strict height bound H(F) < X.
    Height {
        #[arg(long)]
        form: String,
        #[arg(long)]
        x: String,
    },
    /// Construct and verify the integral orbit of a primitive solution.
    Orbit {
        #[arg(long)]
        form: String,
        /// x0,c,z0
        #[arg(long)]
        solution: String,
    },
    /// p-adic (or everywhere-local) solubility.
    Local(LocalArgs),
    /// The density constants of a leading coefficient.
    Density {
        #[arg(long)]
        f0: String,
        #[arg(long)]
        n: usize,
    },
    /// The seven displayed limiting-density rows.
    Table1,
    /// Counts of monic polynomials by number of distinct irreducible factors.
    Factorstats {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        deg: usize,
    },
    /// Upper-bound assemblies at a given degree parameter.
    Bound(BoundArgs),
    /// Orthogonal group orders (formula values).
    Grouporder {
        #[arg(long)]
        n: usize,
        /// Odd prime for the mod-p order; the mod-8 order always prints.
        #[arg(long)]
        p: Option<u64>,
    },
    /// Split 2-covering operations.
    Covering(CoveringArgs),
    /// Height-box family census with JSONL output.
    Census(CensusArgs),
    /// Density of reductions vanishing on the whole projective line.
    VanishDensity {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
    },
    /// The odd-prime chain estimate, compared in squared form.
    Chain {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct LocalArgs {
    #[arg(long)]
    form: String,
    /// Single prime to test.
    #[arg(long, conflicts_with = "all")]
    p: Option<u64>,
    /// Test all primes up to the budget (at least the forced threshold).
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = 100)]
    budget: u64,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    f0: String,
    /// Replace the archimedean estimate with Monte-Carlo root statistics
    /// (clearly labeled non-rigorous).
    #[arg(long)]
    heuristic_mu: bool,
    #[arg(long, default_value_t = 4000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CoveringArgs {
    /// Comma-separated roots.
    #[arg(long)]
    roots: String,
    /// Comma-separated twist coordinates.
    #[arg(long)]
    delta: String,
    /// Work over F_q instead of the rationals.
    #[arg(long)]
    q: Option<u64>,
    #[command(subcommand)]
    action: CoveringAction,
}

#[derive(Subcommand)]
enum CoveringAction {
    /// Print the generating quadric relations.
    Ideal,
    /// Exhaustive fiber statistics over F_q.
    Fiber {
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Evaluate the covering map at a point (comma-separated coordinates).
    Eval {
        #[arg(long)]
        point: String,
    },
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    f0: String,
    /// Height bound X.
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 8)]
    search_bound: i64,
    #[arg(long, default_value_t = 0)]
    prime_budget: u64,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSONL output path; omit to stream records to stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Continue an interrupted run (requires --out).
    #[arg(long, requires = "out")]
    resume: bool,
    /// Print the summary as a CSV row instead of JSON.
    #[arg(long)]
    csv: bool,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_precondition() { 2 } else { 1 });
        }
    }
}

fn parse_bigint(s: &str) -> Result<BigInt, Error> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

fn parse_int_list(s: &str) -> Result<Vec<i64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer {t:?}")))
        })
        .collect()
}

fn bigmat_to_json(m: &[Vec<BigInt>]) -> Value {
    Value::Array(
        m.iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|x| {
                            use num_traits::ToPrimitive;
                            match x.to_i64() {
                                Some(v) => json!(v),
                                None => json!(x.to_string()),
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn emit(json_mode: bool, value: Value, human: impl FnOnce()) {
    if json_mode {
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("serializable")
        );
    } else {
        human();
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let json_mode = cli.json;
    match cli.command {
        Command::Monicize { form } => {
            let f = BinaryForm::decode(&form)?;
            let mon = f.monicize()?;
            emit(
                json_mode,
                json!({ "form": f.encode(), "monicized": mon.encode() }),
                || println!("{}", mon.encode()),
            );
        }
        Command::Height { form, x } => {
            let f = BinaryForm::decode(&form)?;
            let bound = parse_bigint(&x)?;
            let below = f.height_less_than(&bound);
            emit(
                json_mode,
                json!({ "form": f.encode(), "x": x, "height_less_than": below }),
                || println!("H(F) < {x}: {below}"),
            );
        }
        Command::Orbit { form, solution } => {
            let f = BinaryForm::decode(&form)?;
            let parts = parse_int_list(&solution)?;
            if parts.len() != 3 {
                return Err(Error::Parse("solution must be x0,c,z0".into()));
            }
            let sol = PrimitiveSolution::from_i64(&f, parts[0], parts[1], parts[2])?;
            let cert = construct_orbit(&f, &sol)?;
            let ctx = build_context(&f)?;
            let report = verify_certificate(&ctx, &cert)?;
            let delta_coords: Vec<String> =
                cert.delta.coords().iter().map(|c| c.to_string()).collect();
            let value = json!({
                "form": f.encode(),
                "solution": parts,
                "gamma": [[cert.gamma.a.to_string(), cert.gamma.b.to_string()],
                          [cert.gamma.c.to_string(), cert.gamma.d.to_string()]],
                "k_used": cert.k_used.to_string(),
                "delta_t_coords": delta_coords,
                "det_sign": cert.det_sign,
                "a": bigmat_to_json(&cert.pair.a),
                "b": bigmat_to_json(&cert.pair.b),
                "checks": {
                    "symmetric": report.symmetric,
                    "integral": report.integral,
                    "determinant_matches": report.determinant_matches,
                    "norm_identity": report.norm_identity,
                    "square_containment": report.square_containment,
                    "split_signature": report.split_signature,
                    "all_pass": report.all_pass(),
                },
                "distinguished": cert.distinguished,
                "witness": cert.witness,
            });
            emit(json_mode, value, || {
                println!("K = {}", cert.k_used);
                println!("A = {:?}", cert.pair.a);
                println!("B = {:?}", cert.pair.b);
                println!("checks all pass: {}", report.all_pass());
                println!("distinguished: {:?}", cert.distinguished);
            });
        }
        Command::Local(args) => {
            let f = BinaryForm::decode(&args.form)?;
            if let Some(p) = args.p {
                let rep = zp_soluble(&f, p)?;
                emit(
                    json_mode,
                    serde_json::to_value(&rep).expect("serializable"),
                    || {
                        println!(
                            "p = {}: {}",
                            rep.p,
                            if rep.soluble { "soluble" } else { "insoluble" }
                        )
                    },
                );
            } else if args.all {
                let rep = everywhere_local(&f, args.budget)?;
                emit(
                    json_mode,
                    serde_json::to_value(&rep).expect("serializable"),
                    || {
                        println!(
                            "everywhere locally soluble: {} (explicitly checked up to {})",
                            rep.soluble_everywhere, rep.asserted_beyond
                        );
                        for r in &rep.reports {
                            if !r.soluble {
                                println!("  refused at p = {}", r.p);
                            }
                        }
                    },
                );
            } else {
                return Err(Error::Precondition("pass --p <prime> or --all".into()));
            }
        }
        Command::Density { f0, n } => {
            let f0 = parse_bigint(&f0)?;
            let rep = density_report(&f0, n)?;
            emit(
                json_mode,
                serde_json::to_value(&rep).expect("serializable"),
                || {
                    println!("mu       = {}", rep.mu);
                    println!("mu'      = {}", rep.mu_prime);
                    println!("1 - mu   = {}", rep.one_minus_mu);
                    println!("mu' - mu = {}", rep.mu_prime_minus_mu);
                },
            );
        }
        Command::Table1 => {
            let rows = table1();
            emit(
                json_mode,
                serde_json::to_value(&rows).expect("serializable"),
                || {
                    for row in &rows {
                        println!(
                            "{:?}: 1-mu -> {}%  mu'-mu -> {}%",
                            row.primes, row.one_minus_mu_pct, row.gap_pct
                        );
                    }
                },
            );
        }
        Command::Factorstats { p, deg } => {
            let row = factor_class_row(p, deg)?;
            let counts: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            emit(
                json_mode,
                json!({ "p": p, "deg": deg, "counts_by_m": counts }),
                || {
                    for (m, c) in row.iter().enumerate() {
                        println!("m = {m}: {c}");
                    }
                },
            );
        }
        Command::Bound(args) => {
            let f0 = parse_bigint(&args.f0)?;
            let rep = coarse_bounds(args.n, &f0)?;
            let mut value = serde_json::to_value(&rep).expect("serializable");
            if args.heuristic_mu {
                let h = refined_delta_max_heuristic(args.n, args.samples, args.seed)?;
                value["heuristic_refined_delta_max"] = json!(h.to_string());
                value["heuristic_note"] =
                    json!("Monte-Carlo archimedean factor; not a rigorous bound");
            }
            emit(json_mode, value, || {
                println!("coarse delta      = {}", rep.coarse_delta);
                println!("coarse delta_max  = {}", rep.coarse_delta_max);
                println!(
                    "refined delta_max = {} ≈ {:.6}",
                    rep.refined_delta_max, rep.refined_delta_max_approx
                );
            });
        }
        Command::Grouporder { n, p } => {
            let ghat = group_order_ghat_mod8(n);
            let g_p = match p {
                Some(p) => Some(group_order_g_mod_p(n, p)?),
                None => None,
            };
            emit(
                json_mode,
                json!({
                    "n": n,
                    "ghat_mod8": ghat.to_string(),
                    "g_mod_p": g_p.as_ref().map(|v| v.to_string()),
                    "p": p,
                }),
                || {
                    println!("#Ghat(Z/8) = {ghat}");
                    if let Some(v) = g_p {
                        println!("#G(Z/p)    = {v}");
                    }
                },
            );
        }
        Command::Covering(args) => run_covering(args, json_mode)?,
        Command::Census(args) => {
            let f0 = parse_bigint(&args.f0)?;
            let x = parse_bigint(&args.x)?;
            let mut config = CensusConfig::new(args.n, f0, x);
            config.search_bound = args.search_bound;
            config.prime_budget = args.prime_budget;
            config.shards = args.shards;
            config.seed = args.seed;
            let summary = match &args.out {
                Some(path) => run_census_to_path(&config, path, args.resume)?,
                None => {
                    let (records, summary) = run_census(&config)?;
                    for r in &records {
                        println!(
                            "{}",
                            serde_json::to_string(r)
                                .map_err(|e| Error::Internal(e.to_string()))?
                        );
                    }
                    summary
                }
            };
            if args.csv {
                println!("{}", CensusSummary::CSV_HEADER);
                println!("{}", summary.csv_row());
            } else {
                emit(
                    json_mode,
                    serde_json::to_value(&summary).expect("serializable"),
                    || {
                        println!(
                            "total {} | insoluble_local {} | soluble_witnessed {} | unknown {}",
                            summary.total,
                            summary.insoluble_local,
                            summary.soluble_witnessed,
                            summary.unknown
                        );
                        println!("1 - mu = {}", summary.one_minus_mu);
                    },
                );
            }
        }
        Command::VanishDensity { p, n } => {
            let d = vanish_density_check(p, n)?;
            emit(
                json_mode,
                json!({ "p": p, "n": n, "density": d.to_string() }),
                || println!("{d}"),
            );
        }
        Command::Chain { p, n } => {
            let c = lemma_chain_check(p, n)?;
            emit(
                json_mode,
                serde_json::to_value(&c).expect("serializable"),
                || {
                    println!("lhs = {}", c.lhs);
                    println!("lhs² ≤ 36p²/(2n+1): {}", c.ok);
                },
            );
        }
    }
    Ok(())
}

fn run_covering(args: CoveringArgs, json_mode: bool) -> Result<(), Error> {
    let roots = parse_int_list(&args.roots)?;
    let delta = parse_int_list(&args.delta)?;
    match args.q {
        Some(q) => {
            let spec = SplitCoveringSpec::new(
                roots.iter().map(|&r| Fq::new(q, r)).collect(),
                delta.iter().map(|&d| Fq::new(q, d)).collect(),
            )?;
            match args.action {
                CoveringAction::Ideal => {
                    let gens = covering_ideal(&spec)?;
                    let rows: Vec<Vec<u64>> = gens
                        .iter()
                        .map(|g| g.coefficients.iter().map(|c| c.v).collect())
                        .collect();
                    emit(json_mode, json!({ "q": q, "relations": rows }), || {
                        for r in &rows {
                            println!("{r:?}");
                        }
                    });
                }
                CoveringAction::Fiber { budget } => {
                    let census = fiber_census(&spec, budget)?;
                    let fibers: Vec<Value> = census
                        .fibers
                        .iter()
                        .map(|((num, den), c)| json!({ "base": [num, den], "size": c }))
                        .collect();
                    emit(
                        json_mode,
                        json!({
                            "q": census.q,
                            "total_points": census.total_points,
                            "max_fiber": census.max_fiber,
                            "max_branch_fiber": census.max_branch_fiber,
                            "fibers": fibers,
                        }),
                        || {
                            println!("#C(F_{q}) = {}", census.total_points);
                            println!(
                                "max fiber {} | max branch fiber {}",
                                census.max_fiber, census.max_branch_fiber
                            );
                        },
                    );
                }
                CoveringAction::Eval { point } => {
                    let pt: Vec<Fq> = parse_int_list(&point)?
                        .into_iter()
                        .map(|v| Fq::new(q, v))
                        .collect();
                    let (num, den) = pi_delta_eval(&spec, &pt)?;
                    emit(json_mode, json!({ "value": [num.v, den.v] }), || {
                        println!("[{} : {}]", num.v, den.v)
                    });
                }
            }
        }
        None => {
            use num_rational::BigRational;
            let to_q = |v: &i64| BigRational::from_integer(BigInt::from(*v));
            let spec = SplitCoveringSpec::new(
                roots.iter().map(to_q).collect(),
                delta.iter().map(to_q).collect(),
            )?;
            match args.action {
                CoveringAction::Ideal => {
                    let gens = covering_ideal(&spec)?;
                    let rows: Vec<Vec<String>> = gens
                        .iter()
                        .map(|g| g.coefficients.iter().map(|c| c.to_string()).collect())
                        .collect();
                    emit(json_mode, json!({ "relations": rows }), || {
                        for r in &rows {
                            println!("{r:?}");
                        }
                    });
                }
                CoveringAction::Fiber { .. } => {
                    return Err(Error::Precondition(
                        "fiber statistics need a finite field; pass --q".into(),
                    ));
                }
                CoveringAction::Eval { point } => {
                    let pt: Vec<BigRational> =
                        parse_int_list(&point)?.iter().map(to_q).collect();
                    let (num, den) = pi_delta_eval(&spec, &pt)?;
                    let value = if Zero::is_zero(&den) {
                        "[1 : 0]".to_string()
                    } else {
                        format!("[{} : 1]", num / den)
                    };
                    emit(json_mode, json!({ "value": value }), || println!("{value}"));
                }
            }
        }
    }
    Ok(())
}
