//! Command-line front end over the library: JSON in, JSON report out.
//!
//! Exit codes: 0 on success, 2 when a verdict is Boundary/Unknown, 1 on any
//! error. Reports are deterministic for fixed inputs and seed (timings
//! excluded).

use opball_cli::{report, schema};

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use opball::casestudy;
use opball::ncrat::{
    domain_contains, domain_margin, eval_descriptor, eval_fm, fm_colligation_check,
    minimize_realization, parse_expr, realize,
};
use opball::opspace::{space_norm, NormOpts};
use opball::similarity::{minimize_conjugated_norm, OptimConfig, SimilarityWitness};
use opball::specrad::{decide_similarity_to_ball, rho_estimate, RadiusOpts, SimilarityDecision};
use opball::{Error, Result};

use report::{DigestBuilder, JobReport};
use schema::{
    descriptor_to_json, load_realization, load_tuple, matrix_to_json, parse_space, read_file,
    space_to_json, AnyRealization,
};

#[derive(Parser)]
#[command(
    name = "opball",
    version,
    about = "Joint spectral radii over operator-space structures, similarity witnesses, and nc rational functions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for all sampled estimators; echoed in the report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structure norm of a tuple (exact value or certified bounds).
    Norm {
        /// row | column | minlinf | maxl1 | pencil:FILE
        #[arg(long)]
        space: String,
        #[arg(long)]
        tuple: PathBuf,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        unitary_dim: usize,
    },
    /// Certified spectral-radius interval for a tuple.
    Radius {
        #[arg(long)]
        space: String,
        #[arg(long)]
        tuple: PathBuf,
        /// Word length for truncated and sampled methods.
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Decide joint similarity to a strict ball element (exit 2 on Boundary).
    Decide {
        #[arg(long)]
        space: String,
        #[arg(long)]
        tuple: PathBuf,
        /// Write the witness JSON here on a Yes verdict.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Minimize ‖S⁻¹XS‖ over invertible S and report the witness.
    Similarity {
        #[arg(long)]
        space: String,
        #[arg(long)]
        tuple: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Noncommutative rational expressions and realizations.
    #[command(subcommand)]
    Rat(RatCmd),
    /// Built-in worked examples.
    #[command(subcommand)]
    Demo(DemoCmd),
}

#[derive(Subcommand)]
enum RatCmd {
    /// Parse an expression and print its canonical tree.
    Parse {
        #[arg(long)]
        expr: String,
        /// Ambient variable count (defaults to the largest index used).
        #[arg(long)]
        vars: Option<usize>,
    },
    /// Compile an expression into a descriptor realization.
    Realize {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        vars: Option<usize>,
        /// Minimize the state dimension before reporting.
        #[arg(long)]
        minimal: bool,
        /// Emit the Fornasini–Marchesini form instead of the descriptor.
        #[arg(long)]
        fm: bool,
    },
    /// Cut a realization to its minimal state dimension.
    Minimize {
        #[arg(long)]
        real: PathBuf,
    },
    /// Evaluate a realization at a matrix point.
    Eval {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Test whether a point lies in the realization's domain.
    Domain {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Certified operator-ball inclusion radii for the domain.
    Ball {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Full verification report for the built-in 3×3 rational example.
    Famous {
        /// Word length for the enumeration checks.
        #[arg(long, default_value_t = 12)]
        n: usize,
    },
}

fn radius_opts(seed: u64, nmax: usize, restarts: usize) -> RadiusOpts {
    let mut opts = RadiusOpts::with_seed(seed);
    opts.trunc_len = nmax;
    opts.optim.restarts = restarts.max(1);
    opts
}

fn witness_json(w: &SimilarityWitness) -> Value {
    json!({
        "S": matrix_to_json(&w.s),
        "achieved_norm": w.achieved_norm,
        "condition_number": w.condition_number,
        "iterations": w.iterations,
        "seed": w.seed,
    })
}

fn digest_space(builder: &mut DigestBuilder, arg: &str) -> Result<()> {
    builder.add_str("space", arg);
    if let Some(path) = arg.strip_prefix("pencil:") {
        builder.add("space-file", read_file(Path::new(path))?.as_bytes());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(Value, String, u8)> {
    match &cli.cmd {
        Cmd::Norm { space, tuple, samples, unitary_dim } => {
            let mut dig = DigestBuilder::new("norm");
            digest_space(&mut dig, space)?;
            let text = read_file(tuple)?;
            dig.add("tuple", text.as_bytes());
            dig.add_str("samples", &samples.to_string());
            dig.add_str("unitary_dim", &unitary_dim.to_string());
            dig.add_str("seed", &cli.seed.to_string());
            let x = load_tuple(tuple)?;
            let spec = parse_space(space, x.d())?;
            let opts = NormOpts { samples: *samples, unitary_dim: *unitary_dim, seed: cli.seed };
            let est = space_norm(&spec, &x, &opts)?;
            let results = json!({
                "space": space_to_json(&spec),
                "lower": est.lower,
                "upper": est.upper,
                "exact": est.exact,
                "method": est.method,
                "sampler_seed": est.seed,
            });
            Ok((results, dig.finish(), 0))
        }
        Cmd::Radius { space, tuple, nmax, restarts } => {
            let mut dig = DigestBuilder::new("radius");
            digest_space(&mut dig, space)?;
            dig.add("tuple", read_file(tuple)?.as_bytes());
            dig.add_str("nmax", &nmax.to_string());
            dig.add_str("restarts", &restarts.to_string());
            dig.add_str("seed", &cli.seed.to_string());
            let x = load_tuple(tuple)?;
            let spec = parse_space(space, x.d())?;
            let opts = radius_opts(cli.seed, *nmax, *restarts);
            let est = rho_estimate(&spec, &x, &opts)?;
            let results = json!({
                "space": space_to_json(&spec),
                "lower": est.lower,
                "upper": est.upper,
                "method": est.method,
                "truncation_order": est.truncation_order,
                "witness": est.witness.as_ref().map(witness_json),
            });
            Ok((results, dig.finish(), 0))
        }
        Cmd::Decide { space, tuple, witness_out, restarts } => {
            let mut dig = DigestBuilder::new("decide");
            digest_space(&mut dig, space)?;
            dig.add("tuple", read_file(tuple)?.as_bytes());
            dig.add_str("restarts", &restarts.to_string());
            dig.add_str("seed", &cli.seed.to_string());
            let x = load_tuple(tuple)?;
            let spec = parse_space(space, x.d())?;
            let opts = radius_opts(cli.seed, 8, *restarts);
            let decision = decide_similarity_to_ball(&spec, &x, &opts)?;
            let (results, code) = match decision {
                SimilarityDecision::Yes(w) => {
                    if let Some(path) = witness_out {
                        std::fs::write(path, serde_json::to_string_pretty(&witness_json(&w)).unwrap())
                            .map_err(|e| {
                                Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
                            })?;
                    }
                    (
                        json!({
                            "space": space_to_json(&spec),
                            "verdict": "yes",
                            "witness": witness_json(&w),
                        }),
                        0u8,
                    )
                }
                SimilarityDecision::No { certified_lower } => (
                    json!({
                        "space": space_to_json(&spec),
                        "verdict": "no",
                        "certified_lower": certified_lower,
                    }),
                    0u8,
                ),
                SimilarityDecision::Boundary => (
                    json!({
                        "space": space_to_json(&spec),
                        "verdict": "boundary",
                    }),
                    2u8,
                ),
            };
            Ok((results, dig.finish(), code))
        }
        Cmd::Similarity { space, tuple, restarts } => {
            let mut dig = DigestBuilder::new("similarity");
            digest_space(&mut dig, space)?;
            dig.add("tuple", read_file(tuple)?.as_bytes());
            dig.add_str("restarts", &restarts.to_string());
            dig.add_str("seed", &cli.seed.to_string());
            let x = load_tuple(tuple)?;
            let spec = parse_space(space, x.d())?;
            let cfg = OptimConfig { restarts: (*restarts).max(1), seed: cli.seed, ..OptimConfig::default() };
            let w = minimize_conjugated_norm(&spec, &x, &cfg)?;
            let results = json!({
                "space": space_to_json(&spec),
                "witness": witness_json(&w),
            });
            Ok((results, dig.finish(), 0))
        }
        Cmd::Rat(rat) => run_rat(cli, rat),
        Cmd::Demo(DemoCmd::Famous { n }) => run_demo_famous(cli, *n),
    }
}

fn run_rat(cli: &Cli, rat: &RatCmd) -> Result<(Value, String, u8)> {
    match rat {
        RatCmd::Parse { expr, vars } => {
            let mut dig = DigestBuilder::new("rat-parse");
            dig.add_str("expr", expr);
            let e = parse_expr(expr)?;
            let d = vars.unwrap_or_else(|| e.max_var().max(1));
            if e.max_var() > d {
                return Err(Error::InvalidInput(format!(
                    "expression uses x{} but --vars {d} was given",
                    e.max_var()
                )));
            }
            let results = json!({
                "ast": e.to_string(),
                "vars": d,
            });
            Ok((results, dig.finish(), 0))
        }
        RatCmd::Realize { expr, vars, minimal, fm } => {
            let mut dig = DigestBuilder::new("rat-realize");
            dig.add_str("expr", expr);
            dig.add_str("minimal", &minimal.to_string());
            dig.add_str("fm", &fm.to_string());
            let e = parse_expr(expr)?;
            let d = vars.unwrap_or_else(|| e.max_var().max(1));
            let mut r = realize(&e, d)?;
            let full_dim = r.state_dim();
            if *minimal {
                r = minimize_realization(&r)?;
            }
            let rendered = if *fm {
                schema::fm_to_json(&opball::ncrat::descriptor_to_fm(&r))
            } else {
                descriptor_to_json(&r)
            };
            let results = json!({
                "state_dim": r.state_dim(),
                "state_dim_unreduced": full_dim,
                "realization": rendered,
            });
            Ok((results, dig.finish(), 0))
        }
        RatCmd::Minimize { real } => {
            let mut dig = DigestBuilder::new("rat-minimize");
            dig.add("real", read_file(real)?.as_bytes());
            let r = match load_realization(real)? {
                AnyRealization::Descriptor(r) => r,
                AnyRealization::Fm(f) => opball::ncrat::fm_to_descriptor(&f),
            };
            let min = minimize_realization(&r)?;
            let results = json!({
                "state_dim_before": r.state_dim(),
                "state_dim_after": min.state_dim(),
                "realization": descriptor_to_json(&min),
            });
            Ok((results, dig.finish(), 0))
        }
        RatCmd::Eval { real, point } => {
            let mut dig = DigestBuilder::new("rat-eval");
            dig.add("real", read_file(real)?.as_bytes());
            dig.add("point", read_file(point)?.as_bytes());
            let x = load_tuple(point)?;
            let value = match load_realization(real)? {
                AnyRealization::Descriptor(r) => eval_descriptor(&r, &x)?,
                AnyRealization::Fm(f) => eval_fm(&f, &x)?,
            };
            let results = json!({ "value": matrix_to_json(&value) });
            Ok((results, dig.finish(), 0))
        }
        RatCmd::Domain { real, point } => {
            let mut dig = DigestBuilder::new("rat-domain");
            dig.add("real", read_file(real)?.as_bytes());
            dig.add("point", read_file(point)?.as_bytes());
            let r = match load_realization(real)? {
                AnyRealization::Descriptor(r) => r,
                AnyRealization::Fm(f) => opball::ncrat::fm_to_descriptor(&f),
            };
            let x = load_tuple(point)?;
            let inside = domain_contains(&r, &x)?;
            let sigma = domain_margin(&r, &x)?;
            let results = json!({
                "inside": inside,
                "verdict": if inside { "inside domain" } else { "outside domain" },
                "sigma_min": sigma,
            });
            Ok((results, dig.finish(), 0))
        }
        RatCmd::Ball { real, space, nmax } => {
            let mut dig = DigestBuilder::new("rat-ball");
            dig.add("real", read_file(real)?.as_bytes());
            digest_space(&mut dig, space)?;
            dig.add_str("nmax", &nmax.to_string());
            dig.add_str("seed", &cli.seed.to_string());
            let r = match load_realization(real)? {
                AnyRealization::Descriptor(r) => r,
                AnyRealization::Fm(f) => opball::ncrat::fm_to_descriptor(&f),
            };
            let spec = parse_space(space, r.d())?;
            let opts = radius_opts(cli.seed, *nmax, 8);
            let cert = opball::ncrat::domain_ball_certificate(&r, &spec, &opts)?;
            let results = json!({
                "space": space_to_json(&spec),
                "inclusion_radius": cert.inclusion_radius,
                "exclusion_radius": cert.exclusion_radius,
                "unbounded": cert.inclusion_radius.is_none(),
                "dual_lower": cert.dual_estimate.lower,
                "dual_upper": cert.dual_estimate.upper,
                "dual_method": cert.dual_estimate.method,
            });
            Ok((results, dig.finish(), 0))
        }
    }
}

fn run_demo_famous(cli: &Cli, n: usize) -> Result<(Value, String, u8)> {
    let mut dig = DigestBuilder::new("demo-famous");
    dig.add_str("n", &n.to_string());
    dig.add_str("seed", &cli.seed.to_string());
    let n = n.clamp(2, 16);
    let opts = radius_opts(cli.seed, 8, 8);
    let fam = casestudy::build_famous();

    let mut word_defect = 0.0f64;
    for len in 1..=n.min(14) {
        word_defect = word_defect.max(casestudy::word_power_check(len)?);
    }
    let mut sum_dev = 0.0f64;
    for len in 2..=n.min(14) {
        sum_dev = sum_dev.max((casestudy::word_sum_norm(len)? - 1.0).abs());
    }
    let rs = opball::specrad::rho_rs_bounds(fam.tuple(), n.min(12))?;
    let diamond = casestudy::diamond_radius_bounds(n, &opts)?;
    let polydisc = casestudy::polydisc_radius_value(&opts)?;
    let (collig_ok, collig_defect) = fm_colligation_check(&fam.fm);
    let lemma = casestudy::lemma_t_check(n.min(8), 100, 3, cli.seed)?;
    let half = opball::matcore::MatTuple::from_scalars(&[
        num_complex::Complex64::new(0.5, 0.0),
        num_complex::Complex64::new(0.5, 0.0),
    ])?;
    let value_half = eval_descriptor(&fam.descriptor, &half)?[(0, 0)];

    let checks = [
        ("word_power_defect", word_defect <= 1e-12),
        ("word_sum_norm_dev", sum_dev <= 1e-10),
        ("rs_lower", (rs.lower - 0.5).abs() <= 1e-9),
        ("diamond_bracket", diamond.lower >= 1.0 - 1e-9 && diamond.upper <= 2.0f64.powf(1.0 / n as f64) + 1e-9),
        ("polydisc_half", (polydisc.lower - 0.5).abs() <= 1e-6 && polydisc.width() <= 1e-6),
        ("colligation_unitary", collig_ok),
        ("lemma_violation", lemma <= 1e-9),
        ("value_at_half", (value_half - num_complex::Complex64::new(-0.5, 0.0)).norm() <= 1e-9),
    ];
    let all_pass = checks.iter().all(|(_, ok)| *ok);
    let results = json!({
        "n": n,
        "word_power_defect": word_defect,
        "word_sum_norm_deviation": sum_dev,
        "rs_bounds": { "lower": rs.lower, "upper": rs.upper },
        "diamond_bounds": { "lower": diamond.lower, "upper": diamond.upper },
        "polydisc_radius": { "lower": polydisc.lower, "upper": polydisc.upper },
        "colligation_defect": collig_defect,
        "lemma_violation": lemma,
        "value_at_half": [value_half.re, value_half.im],
        "checks": checks.iter().map(|(k, ok)| json!({ "check": k, "pass": ok })).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    Ok((results, dig.finish(), if all_pass { 0 } else { 1 }))
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok((results, digest, code)) => {
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let name = match &cli.cmd {
                Cmd::Norm { .. } => "norm",
                Cmd::Radius { .. } => "radius",
                Cmd::Decide { .. } => "decide",
                Cmd::Similarity { .. } => "similarity",
                Cmd::Rat(RatCmd::Parse { .. }) => "rat parse",
                Cmd::Rat(RatCmd::Realize { .. }) => "rat realize",
                Cmd::Rat(RatCmd::Minimize { .. }) => "rat minimize",
                Cmd::Rat(RatCmd::Eval { .. }) => "rat eval",
                Cmd::Rat(RatCmd::Domain { .. }) => "rat domain",
                Cmd::Rat(RatCmd::Ball { .. }) => "rat ball",
                Cmd::Demo(DemoCmd::Famous { .. }) => "demo famous",
            };
            let report = JobReport::new(name, digest, cli.seed, results, elapsed);
            let rendered = report.render();
            println!("{rendered}");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &rendered) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return std::process::ExitCode::from(1);
                }
            }
            std::process::ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(1)
        }
    }
}
