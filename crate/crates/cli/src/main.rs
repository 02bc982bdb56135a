use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use l0iso::binomial::{self, PGrid};
use l0iso::gridset::{self, GridSet};
use l0iso::hit_and_run::{self, BodyFile, ChainKind, ConvexBody};
use l0iso::hypercube::{self, PsiValue};
use l0iso::splitting::{self, BalancedWeight, BodyOracle, WeightEntry};
use l0iso::{Direction, Error};
use serde::Serialize;
use serde_json::{json, Value};

const TOOL: &str = "l0iso";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "l0iso", version, about = "Exact and randomized checks of l0 isoperimetry on the cube")]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every random choice; echoed in the report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exhaustive ψ on the k^n grid.
    PsiExact {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Halving construction on {0,1}^n.
    Construct {
        #[arg(long)]
        n: usize,
    },
    /// Scan of the scaled binomial boundary ratio.
    HammingScan {
        #[arg(long = "nmax")]
        n_max: u64,
        /// Log-spaced thresholds per n (1/(4n) is always added).
        #[arg(long, default_value_t = 32)]
        points: usize,
        /// Emit every feasible k instead of the minimum per (n, p).
        #[arg(long)]
        all_k: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Full shake of a grid set with invariant checks.
    Shake {
        /// Grid set JSON: {"n":2,"k":3,"cells":[[0,0],[1,0]]}.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Dir::Plus)]
        direction: Dir,
        /// Where to write the shaken set.
        #[arg(long)]
        set_out: Option<PathBuf>,
    },
    /// Certificate for an upper bound on ψ from a balanced weight or a point cloud.
    Split {
        /// Weight JSON: [{"s":"0101","w":0.25}, …].
        #[arg(long, conflicts_with = "points", required_unless_present = "points")]
        weights: Option<PathBuf>,
        /// Point cloud CSV: rows x1,…,xn,weight.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Dimension from which random splitting planes are used.
        #[arg(long, default_value_t = splitting::DEFAULT_N0)]
        n0: usize,
        /// Fit the weight file to exact balance instead of rejecting drift.
        #[arg(long)]
        fit: bool,
    },
    /// Band sums, small-weight maximum and variance of a balanced weight.
    Explore {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        fit: bool,
    },
    /// Run a sampler with stationarity diagnostics.
    Sample {
        /// Body JSON: {"lo":[…],"hi":[…]} or {"A":[[…]],"b":[…]}.
        #[arg(long)]
        body: PathBuf,
        #[arg(long, value_enum, default_value_t = Chain::Char)]
        chain: Chain,
        #[arg(long, default_value_t = 101_000)]
        steps: u64,
        #[arg(long = "burnin", default_value_t = 1_000)]
        burn_in: u64,
        /// Trajectory CSV (step,x1,…,xn) of the post-burn-in states.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Keep every `thin`-th state in the trajectory file.
        #[arg(long, default_value_t = 1)]
        thin: u64,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Dir {
    Plus,
    Minus,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Plus => Direction::Plus,
            Dir::Minus => Direction::Minus,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Chain {
    Char,
    Har,
}

impl From<Chain> for ChainKind {
    fn from(c: Chain) -> Self {
        match c {
            Chain::Char => ChainKind::Char,
            Chain::Har => ChainKind::Har,
        }
    }
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
}

fn check(name: &'static str, passed: bool) -> Check {
    Check { name, passed }
}

/// Report text plus whether every invariant held.
struct Output {
    text: String,
    passed: bool,
}

enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unbalanced(_) | Error::NoCertificate { .. } => Failure::Invariant(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn report(command: &str, seed: u64, config: Value, result: Value, checks: Vec<Check>) -> Output {
    let passed = checks.iter().all(|c| c.passed);
    let doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "seed": seed,
        "config": config,
        "result": result,
        "checks": checks,
        "passed": passed,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    Output { text, passed }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serializes")
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn psi_value(v: &PsiValue) -> Value {
    match v {
        PsiValue::Finite(r) => json!(r.to_string()),
        PsiValue::Infinite => json!("inf"),
    }
}

fn cmd_psi_exact(seed: u64, n: usize, k: usize) -> Result<Output, Failure> {
    let psi = hypercube::psi_grid_exact(n, k)?;
    let mut checks = Vec::new();
    if let Some(w) = &psi.witness {
        let b = w.l0_boundary().len();
        let rest = psi.spec.cell_count() - w.len() - b;
        let small = w.len().min(rest);
        let again = (small > 0).then(|| PsiValue::Finite(num_ratio(b, small)));
        checks.push(check("witness_attains_value", again.as_ref() == Some(&psi.value)));
    }
    if psi.spec.cell_count() <= gridset::MAX_ANCHORED_CELLS {
        checks.push(check("anchored_minimum_agrees", hypercube::psi_anchored(n, k)? == psi.value));
    }
    let result = json!({
        "psi": psi_value(&psi.value),
        "psi_f64": psi.value.to_f64(),
        "witness": psi.witness,
        "boundary_cells": psi.boundary_cells,
        "residual_cells": psi.residual_cells,
    });
    Ok(report("psi-exact", seed, json!({"n": n, "k": k}), result, checks))
}

fn num_ratio(a: usize, b: usize) -> num_rational::Ratio<u64> {
    num_rational::Ratio::new(a as u64, b as u64)
}

fn cmd_construct(seed: u64, n: usize) -> Result<Output, Failure> {
    let h = hypercube::halving_construction(n)?;
    let (a, b, c) = h.sizes();
    let ratio = h.ratio();
    let ratio_f = *ratio.numer() as f64 / *ratio.denom() as f64;
    let scaled = ratio_f * (n as f64).sqrt();
    let limit = 4.0 * (8.0 / std::f64::consts::PI).sqrt() + 1.0;
    let checks = vec![
        check("axis_disjoint", hypercube::are_axis_disjoint(&h.s1, &h.s2)?),
        check("partition", a + b + c == 1usize << n),
        check("scaled_ratio_within_limit", scaled <= limit),
    ];
    let result = json!({
        "S1": a,
        "S2": b,
        "S3": c,
        "ratio": ratio.to_string(),
        "ratio_f64": ratio_f,
        "ratio_sqrt_n": scaled,
        "limit": limit,
    });
    Ok(report("construct", seed, json!({"n": n}), result, checks))
}

fn cmd_hamming_scan(seed: u64, n_max: u64, points: usize, all_k: bool, format: Format) -> Result<Output, Failure> {
    let grid = PGrid::LogSpaced { points };
    let scan = binomial::binom_bound_scan(n_max, &grid)?;
    let checks = vec![check("c_hat_positive", scan.c_hat > 0.0)];
    let passed = checks.iter().all(|c| c.passed);
    let config = json!({"n_max": n_max, "points": points, "all_k": all_k, "format": format});
    match format {
        Format::Csv => {
            let mut text = format!("# {TOOL} {VERSION} hamming-scan seed={seed} config={config}\n");
            text.push_str("n,p,k,ratio,scaled\n");
            let mut push = |r: &binomial::ScanRow| {
                let _ = writeln!(text, "{},{},{},{},{}", r.n, r.p, r.k, r.ratio, r.scaled);
            };
            if all_k {
                for n in 2..=n_max {
                    for p in grid.values(n) {
                        binomial::step3_rows(n, p).iter().for_each(&mut push);
                    }
                }
            } else {
                scan.per_np.iter().for_each(&mut push);
            }
            Ok(Output { text, passed })
        }
        Format::Json => {
            let running = scan.running_min();
            let tail = &running[running.len().saturating_sub(10)..];
            let last_decade = tail.iter().copied().fold(f64::INFINITY, f64::min);
            let a = scan.argmin;
            let sigma = (a.n as f64 * a.p * (1.0 - a.p)).sqrt();
            let x = 0.5 / sigma;
            let growth = if x < 1.0 {
                let g = binomial::growth_thresholds(a.n, a.p, x)?;
                json!({"x": x, "k1": g.k1, "k2": g.k2, "width_times_x": (g.k2.saturating_sub(g.k1)) as f64 * x})
            } else {
                Value::Null
            };
            let result = json!({
                "c_hat": scan.c_hat,
                "argmin": a,
                "last_decade_min": last_decade,
                "per_n": scan.per_n,
                "growth_at_argmin": growth,
            });
            Ok(report("hamming-scan", seed, config, result, checks))
        }
    }
}

/// `a` reflected in every coordinate, `c ↦ k − 1 − c`.
fn reflect(a: &GridSet) -> GridSet {
    let spec = a.spec();
    let k = spec.cells_per_axis();
    GridSet::from_predicate(spec, |c| {
        let r: Vec<usize> = c.iter().map(|&x| k - 1 - x).collect();
        a.contains(&r)
    })
}

fn cmd_shake(seed: u64, input: &Path, dir: Dir, set_out: Option<&Path>) -> Result<Output, Failure> {
    let a: GridSet = serde_json::from_str(&read(input)?).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
    let d: Direction = dir.into();
    let shaken = a.full_shake(d);
    // the largest axis-disjoint partner, shaken the other way
    let partner = a.closed_neighborhood().complement();
    let partner_shaken = partner.full_shake(d.opposite());
    let anchored = match d {
        Direction::Plus => shaken.is_anchored(),
        Direction::Minus => reflect(&shaken).is_anchored(),
    };
    let checks = vec![
        check("volume_preserved", shaken.volume() == a.volume()),
        check("axis_disjointness_preserved", gridset::are_axis_disjoint(&shaken, &partner_shaken)?),
        check("boundary_non_increasing", shaken.l0_boundary().volume() <= a.l0_boundary().volume()),
        check("anchored_fixed_point", anchored && shaken.full_shake(d) == shaken),
    ];
    if let Some(p) = set_out {
        let mut text = serde_json::to_string(&shaken).expect("grid set serializes");
        text.push('\n');
        write(p, &text)?;
    }
    let vol = |s: &GridSet| s.volume().to_string();
    let result = json!({
        "volume": vol(&a),
        "boundary_volume_before": vol(&a.l0_boundary()),
        "boundary_volume_after": vol(&shaken.l0_boundary()),
        "shaken": shaken,
    });
    let config = json!({"input": input.display().to_string(), "direction": dir});
    Ok(report("shake", seed, config, result, checks))
}

fn load_weight(path: &Path, fit: bool) -> Result<(BalancedWeight, Value), Failure> {
    let text = read(path)?;
    if !fit {
        return Ok((BalancedWeight::from_json(&text)?, Value::Null));
    }
    let raw: Vec<WeightEntry> = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let n = raw
        .first()
        .map(|e| e.s.dim())
        .ok_or_else(|| Failure::Usage(format!("{}: no entries", path.display())))?;
    let (w, rep) = BalancedWeight::fit(n, raw.into_iter().map(|e| (e.s, e.w)))?;
    let info = json!({"rounds": rep.rounds, "initial": rep.initial, "fitted": rep.fitted});
    Ok((w, info))
}

fn cmd_split(seed: u64, cli: &SplitArgs) -> Result<Output, Failure> {
    let (w, source) = match (&cli.weights, &cli.points) {
        (Some(p), _) => {
            let (w, fit) = load_weight(p, cli.fit)?;
            (w, json!({"weights": p.display().to_string(), "fit": fit}))
        }
        (None, Some(p)) => {
            let body = BodyOracle::from_csv(read(p)?.as_bytes())?;
            let d = splitting::decompose_body(&body, 0, seed)?;
            let info = json!({
                "points": p.display().to_string(),
                "median": d.median,
                "raw_imbalance": d.raw_imbalance,
                "fitted": d.fitted,
            });
            (d.weight, info)
        }
        (None, None) => return Err(Failure::Usage("either --weights or --points is required".into())),
    };
    let config = json!({"trials": cli.trials, "n0": cli.n0, "source": source});
    let cert = match splitting::certify_psi_upper_bound(&w, cli.trials, seed, cli.n0) {
        Ok(c) => c,
        Err(e @ Error::NoCertificate { .. }) => {
            let result = json!({"error": e.to_string()});
            return Ok(report("split", seed, config, result, vec![check("certificate_found", false)]));
        }
        Err(e) => return Err(e.into()),
    };
    let mut checks = vec![
        check("balanced_input", w.imbalance().max() <= splitting::BALANCE_TOL),
        check("masses_partition", (cert.a + cert.b + cert.c - 1.0).abs() <= 1e-12),
    ];
    if let (Some(s), Some(t)) = (cert.s1, cert.s2) {
        checks.push(check("axis_disjoint", s.hamming_distance(&t)? >= 2));
    }
    Ok(report("split", seed, config, to_value(&cert), checks))
}

struct SplitArgs {
    weights: Option<PathBuf>,
    points: Option<PathBuf>,
    trials: u64,
    n0: usize,
    fit: bool,
}

fn cmd_explore(seed: u64, path: &Path, fit: bool) -> Result<Output, Failure> {
    let (w, fit_info) = load_weight(path, fit)?;
    let n = w.dim();
    let e = splitting::open_problem_explore(&w)?;
    let (small, center, centers) = if n <= splitting::DENSE_PROFILE_DIM {
        let (v, s) = splitting::max_small_weight_sum(&w)?;
        (v, s, "all")
    } else {
        let mut best = (f64::NEG_INFINITY, w.entries()[0].0);
        for &(s, _) in w.entries() {
            let v = splitting::small_weight_sum(&w, s)?;
            if v > best.0 {
                best = (v, s);
            }
        }
        (best.0, best.1, "support")
    };
    let var = splitting::variance_exact(&w)?;
    let checks = vec![
        check("small_weight_at_most_three_quarters", small <= 0.75),
        check("variance_below_quarter", (-1e-15..0.25).contains(&var)),
    ];
    let result = json!({
        "n": n,
        "support": w.support_len(),
        "lhs": e.lhs,
        "rhs": e.rhs,
        "lhs_over_rhs": if e.rhs > 0.0 { json!(e.ratio()) } else { Value::Null },
        "max_small_weight_sum": small,
        "small_weight_center": center,
        "small_weight_centers": centers,
        "variance": var,
    });
    let config = json!({"weights": path.display().to_string(), "fit": fit_info});
    Ok(report("explore", seed, config, result, checks))
}

struct SampleArgs {
    body: PathBuf,
    chain: Chain,
    steps: u64,
    burn_in: u64,
    trajectory: Option<PathBuf>,
    thin: u64,
}

fn cmd_sample(seed: u64, a: &SampleArgs) -> Result<Output, Failure> {
    if a.thin == 0 {
        return Err(Failure::Usage("--thin must be positive".into()));
    }
    let file: BodyFile =
        serde_json::from_str(&read(&a.body)?).map_err(|e| Failure::Usage(format!("{}: {e}", a.body.display())))?;
    let body = ConvexBody::from_file(file)?;
    let kind: ChainKind = a.chain.into();
    let run = hit_and_run::run_chain(&body, kind, a.steps, a.burn_in, seed)?;
    let diag = hit_and_run::diagnose(&body, &run, seed)?;
    let config = json!({
        "body": a.body.display().to_string(),
        "chain": kind,
        "steps": a.steps,
        "burnin": a.burn_in,
        "thin": a.thin,
    });
    if let Some(path) = &a.trajectory {
        let mut text = format!("# {TOOL} {VERSION} sample seed={seed} config={config}\n");
        text.push_str("step");
        for i in 1..=body.dim() {
            let _ = write!(text, ",x{i}");
        }
        text.push('\n');
        for (i, x) in run.samples.iter().enumerate() {
            let step = a.burn_in + i as u64 + 1;
            if !step.is_multiple_of(a.thin) {
                continue;
            }
            let _ = write!(text, "{step}");
            for v in x {
                let _ = write!(text, ",{v}");
            }
            text.push('\n');
        }
        write(path, &text)?;
    }
    let all_inside = run.samples.iter().all(|x| body.contains(x));
    let checks = vec![check("inside_body", all_inside), check("stationary", diag.stationary)];
    Ok(report("sample", seed, config, to_value(&diag), checks))
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let seed = cli.seed;
    match cli.command {
        Cmd::PsiExact { n, k } => cmd_psi_exact(seed, n, k),
        Cmd::Construct { n } => cmd_construct(seed, n),
        Cmd::HammingScan {
            n_max,
            points,
            all_k,
            format,
        } => cmd_hamming_scan(seed, n_max, points, all_k, format),
        Cmd::Shake {
            input,
            direction,
            set_out,
        } => cmd_shake(seed, &input, direction, set_out.as_deref()),
        Cmd::Split {
            weights,
            points,
            trials,
            n0,
            fit,
        } => cmd_split(
            seed,
            &SplitArgs {
                weights,
                points,
                trials,
                n0,
                fit,
            },
        ),
        Cmd::Explore { weights, fit } => cmd_explore(seed, &weights, fit),
        Cmd::Sample {
            body,
            chain,
            steps,
            burn_in,
            trajectory,
            thin,
        } => cmd_sample(
            seed,
            &SampleArgs {
                body,
                chain,
                steps,
                burn_in,
                trajectory,
                thin,
            },
        ),
    }
}

/// 0 on success, 1 when an invariant fails, 2 on bad input.
fn exit_code(r: &Result<Output, Failure>) -> u8 {
    match r {
        Ok(o) if o.passed => 0,
        Ok(_) | Err(Failure::Invariant(_)) => 1,
        Err(Failure::Usage(_)) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let r = run(cli);
    let code = exit_code(&r);
    match r {
        Ok(o) => {
            let written = match &out {
                Some(p) => fs::write(p, &o.text).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{}", o.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if code != 0 {
                eprintln!("error: invariant check failed");
            }
        }
        Err(Failure::Usage(msg) | Failure::Invariant(msg)) => eprintln!("error: {msg}"),
    }
    ExitCode::from(code)
}
