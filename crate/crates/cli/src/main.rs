use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nfg_core::cover::{
    bethe_cover_bounds, build_cover, sample_spec, zbm_exhaustive, zbm_montecarlo, zbm_typeformula,
    zbm_records_to_csv, CoverSpec, ZbmMethod, ZbmRecord,
};
use nfg_core::experiment::{experiment, rows_to_csv, summary_to_csv, ExperimentSpec};
use nfg_core::gen::{gen, Ensemble, GeneratorSpec, Topology};
use nfg_core::lct::{check_condition, induced_fixed_point_check, loop_series, transform, LctResult};
use nfg_core::limits::Limits;
use nfg_core::nfg::{parse, partition_contract_with, partition_exact_with, serialize, validate, SenseClass};
use nfg_core::spa::{spa_run, Init, SpaOptions, SpaReport};
use nfg_core::{FactorGraph, GraphKind, NfgError, C64};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "nfg", version, about = "Bethe approximations, loop calculus and graph covers for normal factor graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as a document.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Output file (stdout if absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check structure and classify a graph.
    Validate {
        #[command(flatten)]
        src: Source,
        /// Exit with status 2 unless the graph is strict-sense (or nonnegative standard).
        #[arg(long)]
        require_strict: bool,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Exact partition function.
    Exact {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value_t = ExactMethod::Auto)]
        method: ExactMethod,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Run the sum-product algorithm and report the Bethe partition function.
    Spa {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        spa: SpaArgs,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Loop-calculus transform at the SPA fixed point.
    Lct {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        spa: SpaArgs,
        /// Write the transformed graph to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Loop-series decomposition of the transformed graph.
    Loopseries {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        spa: SpaArgs,
        /// Number of largest terms to print.
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Build an M-cover and report its partition function.
    Cover {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        m: usize,
        /// Permutations per edge, e.g. "1,0;0,1;0,1" (random if absent).
        #[arg(long)]
        sigma: Option<String>,
        /// Seed for a random cover when --sigma is absent.
        #[arg(long, default_value_t = 0)]
        cover_seed: u64,
        /// Write the cover graph to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Degree-M Bethe partition function.
    Zbm {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "typeformula")]
        method: ZbmMethod,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Seed of the Monte-Carlo sampler.
        #[arg(long, default_value_t = 0)]
        mc_seed: u64,
        /// Also report every degree from 1 up to --m.
        #[arg(long)]
        all: bool,
        /// Write `instance-id,M,method,value,root,stderr,runtime-ms` rows.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Evaluate the checkable sufficient condition.
    CheckCondition {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        spa: SpaArgs,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Check the finite-M sandwich bounds for M = 1..=m.
    Bounds {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        spa: SpaArgs,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[command(flatten)]
        out: JsonOut,
    },
    /// Batch experiment over seeded instances.
    Experiment {
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        spa: SpaArgs,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 3)]
        mmax: usize,
        /// Monte-Carlo samples for M above the type-formula cap.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Per-instance rows.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Per-M summary.
        #[arg(long)]
        summary_csv: Option<PathBuf>,
        #[command(flatten)]
        out: JsonOut,
    },
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, default_value = "fig3")]
    topology: Topology,
    #[arg(long, default_value = "double-edge")]
    kind: GraphKind,
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    /// Defaults to psd-random for double-edge and positive-s-nfg for standard graphs.
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    /// Perturbation size of the near-identity ensemble.
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GenArgs {
    fn spec(&self) -> GeneratorSpec {
        let ensemble = match (self.ensemble, self.kind) {
            (Some(EnsembleArg::PsdRandom), _) | (None, GraphKind::DoubleEdge) => Ensemble::PsdRandom,
            (Some(EnsembleArg::PsdNearIdentity), _) => Ensemble::PsdNearIdentity { eta: self.eta },
            (Some(EnsembleArg::PositiveSNfg), _) | (None, GraphKind::Standard) => Ensemble::PositiveSnfg,
        };
        GeneratorSpec {
            topology: self.topology,
            alphabet: self.alphabet,
            kind: self.kind,
            ensemble,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct Source {
    /// Graph document; generated from the flags below if absent.
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

#[derive(Args)]
struct SpaArgs {
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0.0)]
    damping: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Uniform)]
    init: InitArg,
    /// Seed of the SPA random streams.
    #[arg(long, default_value_t = 0)]
    spa_seed: u64,
}

impl SpaArgs {
    fn options(&self) -> SpaOptions {
        SpaOptions {
            init: match self.init {
                InitArg::Uniform => Init::Uniform,
                InitArg::Random => Init::SeededRandom,
            },
            max_iter: self.max_iter,
            tol_fp: self.tol,
            damping: self.damping,
            restarts: self.restarts,
            seed: self.spa_seed,
            ..SpaOptions::default()
        }
    }
}

#[derive(Args)]
struct JsonOut {
    /// Write a machine-readable result to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    PsdRandom,
    PsdNearIdentity,
    #[value(name = "positive-s-nfg")]
    PositiveSNfg,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Uniform,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExactMethod {
    Auto,
    Enumerate,
    Contract,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<NfgError> for Failure {
    fn from(e: NfgError) -> Self {
        let code = match &e {
            _ if e.is_capacity() => 3,
            NfgError::BigCount(_) => 3,
            NfgError::NonConvergence(_) => 4,
            NfgError::Consistency { .. } | NfgError::SignedRoot { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<(), Failure>;

fn load(src: &Source) -> Result<FactorGraph, Failure> {
    match &src.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            Ok(parse(&text)?)
        }
        None => Ok(gen(&src.gen.spec())?),
    }
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn write_json(out: &JsonOut, value: &Value) -> Outcome {
    if let Some(path) = &out.json {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        write(path, &text)?;
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn fmt_c(z: C64) -> String {
    if z.im.abs() <= 1e-12 * z.norm() {
        format!("{}", z.re)
    } else {
        format!("{} {} {}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
    }
}

fn run_spa(g: &FactorGraph, args: &SpaArgs) -> Result<SpaReport, Failure> {
    let report = spa_run(g, &args.options());
    if !report.converged {
        return Err(Failure {
            code: 4,
            message: format!(
                "sum-product algorithm did not converge in {} runs (best residual {:e})",
                report.restarts_used, report.residual
            ),
        });
    }
    Ok(report)
}

fn run_lct(g: &FactorGraph, args: &SpaArgs) -> Result<(SpaReport, LctResult), Failure> {
    let report = run_spa(g, args)?;
    let lr = transform(g, &report)?;
    Ok((report, lr))
}

fn matrix_json(m: &nfg_core::tensor::CMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| [m.get(r, c).re, m.get(r, c).im]).collect())
        .collect();
    json!(rows)
}

fn parse_sigma(text: &str, m: usize) -> Result<CoverSpec, Failure> {
    let sigma = text
        .split(';')
        .map(|perm| {
            perm.split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure {
            code: 2,
            message: format!("bad --sigma `{text}`: {e}"),
        })?;
    Ok(CoverSpec::new(m, sigma)?)
}

fn run(cli: Cli) -> Outcome {
    let limits = Limits::from_env()?;
    match cli.command {
        Command::Gen { gen: args, output } => {
            let g = gen(&args.spec())?;
            let doc = serialize(&g)?;
            match output {
                Some(path) => write(&path, &doc)?,
                None => print!("{doc}"),
            }
        }
        Command::Validate { src, require_strict, out } => {
            let g = load(&src)?;
            let report = validate(&g)?;
            println!("kind: {}", report.kind);
            println!("classification: {}", to_json(&report.classification).as_str().unwrap_or("?"));
            for n in &report.nodes {
                match n.min_eigenvalue {
                    Some(l) => println!("node {} ({}): min eigenvalue {l:e}, psd {}", n.node, n.name, n.psd),
                    None => println!("node {} ({}): nonnegative {}", n.node, n.name, n.psd),
                }
            }
            write_json(&out, &to_json(&report))?;
            let ok = matches!(report.classification, SenseClass::StrictSense | SenseClass::Standard);
            if require_strict && !ok {
                return Err(Failure {
                    code: 2,
                    message: "graph is not strict-sense".into(),
                });
            }
        }
        Command::Exact { src, method, out } => {
            let g = load(&src)?;
            let z = match method {
                ExactMethod::Enumerate => partition_exact_with(&g, &limits)?,
                ExactMethod::Contract => partition_contract_with(&g, &limits)?,
                ExactMethod::Auto => {
                    if g.configuration_count() <= limits.enumeration as u128 {
                        partition_exact_with(&g, &limits)?
                    } else {
                        partition_contract_with(&g, &limits)?
                    }
                }
            };
            println!("Z = {}", fmt_c(z));
            write_json(&out, &json!({ "z": z }))?;
        }
        Command::Spa { src, spa, out } => {
            let g = load(&src)?;
            let report = spa_run(&g, &spa.options());
            write_json(&out, &to_json(&report))?;
            println!("converged: {}", report.converged);
            println!("iterations: {}", report.iterations);
            println!("residual: {:e}", report.residual);
            println!("runs: {}", report.restarts_used);
            println!("degenerate events: {}", report.degenerate_events.len());
            if !report.converged {
                return Err(Failure {
                    code: 4,
                    message: "sum-product algorithm did not converge".into(),
                });
            }
            match report.z_bethe {
                Some(z) => println!("Z_B = {}", fmt_c(z)),
                None => println!("Z_B undefined (some Z_e = 0)"),
            }
        }
        Command::Lct { src, spa, output, out } => {
            let g = load(&src)?;
            let (_, lr) = run_lct(&g, &spa)?;
            let d = &lr.diagnostics;
            let biorth = d.biorthogonality.iter().copied().fold(0.0, f64::max);
            let induced = induced_fixed_point_check(&lr);
            println!("Z_B = {}", fmt_c(d.z_bethe));
            println!("g(0) = {}", fmt_c(d.g0));
            println!("max weight-1 entry: {:e}", d.max_weight_one);
            println!("biorthogonality residual: {biorth:e}");
            println!("induced fixed-point residual: {induced:e}");
            if !d.fragile_edges.is_empty() {
                println!("fragile edges: {:?}", d.fragile_edges);
            }
            if let Some(path) = output {
                write(&path, &serialize(&lr.transformed)?)?;
            }
            let m: Vec<Value> = lr
                .m_matrices
                .iter()
                .map(|(a, b)| json!({ "m_i": matrix_json(a), "m_j": matrix_json(b) }))
                .collect();
            write_json(
                &out,
                &json!({
                    "params": to_json(&lr.params),
                    "diagnostics": to_json(d),
                    "induced_fixed_point_residual": induced,
                    "m_matrices": m,
                }),
            )?;
        }
        Command::Loopseries { src, spa, top, out } => {
            let g = load(&src)?;
            let (_, lr) = run_lct(&g, &spa)?;
            let ls = loop_series(&lr, &limits)?;
            println!("g(0) = {}", fmt_c(ls.g0));
            println!("terms: {}", ls.terms.len());
            println!("sum of weights = {}", fmt_c(ls.weight_sum()));
            println!("Z = {}", fmt_c(ls.partition));
            println!("g(0) (1 + sum) = {}", fmt_c(ls.resummed()));
            println!("max non-loop weight: {:e}", ls.max_non_loop_weight);
            let mut order: Vec<usize> = (0..ls.terms.len()).collect();
            order.sort_by(|&a, &b| ls.terms[b].weight.norm().total_cmp(&ls.terms[a].weight.norm()));
            for &k in order.iter().take(top) {
                let t = &ls.terms[k];
                println!("  {:?}: {}", t.configuration, fmt_c(t.weight));
            }
            write_json(&out, &to_json(&ls))?;
        }
        Command::Cover { src, m, sigma, cover_seed, output, out } => {
            let g = load(&src)?;
            let spec = match sigma {
                Some(text) => parse_sigma(&text, m)?,
                None => sample_spec(m, g.num_edges(), cover_seed, 0),
            };
            let cover = build_cover(&g, &spec)?;
            let z = partition_contract_with(&cover, &limits)?;
            println!("nodes: {}, edges: {}", cover.num_nodes(), cover.num_edges());
            println!("Z = {}", fmt_c(z));
            if let Some(path) = output {
                write(&path, &serialize(&cover)?)?;
            }
            write_json(&out, &json!({ "spec": to_json(&spec), "z": z }))?;
        }
        Command::Zbm { src, m, method, samples, mc_seed, all, csv, out } => {
            let g = load(&src)?;
            let id = match &src.input {
                Some(p) => {
                    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    stem.strip_suffix(".nfg").map(str::to_string).unwrap_or(stem)
                }
                None => format!("{}-{}", src.gen.topology, src.gen.seed),
            };
            let degrees = if all { 1..=m } else { m..=m };
            let mut records = Vec::new();
            for k in degrees {
                let start = Instant::now();
                let est = match method {
                    ZbmMethod::Exhaustive => zbm_exhaustive(&g, k, &limits)?,
                    ZbmMethod::MonteCarlo => zbm_montecarlo(&g, k, samples, mc_seed, &limits)?,
                    ZbmMethod::TypeFormula => zbm_typeformula(&g, k, &limits)?,
                };
                let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                println!("M = {k} ({})", est.method);
                println!("mean cover Z = {}", fmt_c(est.value));
                if let Some(se) = est.stderr {
                    println!("stderr: {se:e}");
                }
                match est.root() {
                    Ok(r) => println!("Z_B,{k} = {r}"),
                    Err(e) => eprintln!("no real root: {e}"),
                }
                records.push(ZbmRecord { instance_id: id.clone(), estimate: est, runtime_ms });
            }
            if let Some(path) = csv {
                write(&path, &zbm_records_to_csv(&records)?)?;
            }
            let json: Vec<Value> = records
                .iter()
                .map(|r| json!({ "estimate": to_json(&r.estimate), "root": r.estimate.root().ok() }))
                .collect();
            write_json(&out, &json!(json))?;
            for r in &records {
                r.estimate.root()?;
            }
        }
        Command::CheckCondition { src, spa, out } => {
            let g = load(&src)?;
            let (_, lr) = run_lct(&g, &spa)?;
            let c = check_condition(&lr);
            println!("S = {}", c.s);
            println!("Z* = {}", c.z_star);
            println!("Z* > (2/3) S: {}", c.two_thirds);
            println!("alpha = {}", c.alpha);
            println!("alpha < 1/2: {}", c.alpha_below_half);
            println!("condition holds: {}", c.holds());
            write_json(&out, &to_json(&c))?;
        }
        Command::Bounds { src, spa, m, out } => {
            let g = load(&src)?;
            let (_, lr) = run_lct(&g, &spa)?;
            let c = check_condition(&lr);
            println!("alpha = {} (condition holds: {})", c.alpha, c.holds());
            let mut reports = Vec::with_capacity(m);
            for k in 1..=m {
                let b = bethe_cover_bounds(&g, &lr, k, &limits)?;
                println!(
                    "M = {k}: {} <= {} <= {}  holds {}",
                    b.lower, b.ratio, b.upper, b.holds
                );
                reports.push(b);
            }
            write_json(&out, &to_json(&reports))?;
        }
        Command::Experiment { gen: args, spa, instances, mmax, samples, csv, summary_csv, out } => {
            let spec = ExperimentSpec {
                generator: args.spec(),
                instances,
                m_max: mmax,
                samples,
                spa: spa.options(),
                limits,
            };
            let result = experiment(&spec)?;
            if let Some(path) = csv {
                write(&path, &rows_to_csv(&result.rows, mmax)?)?;
            }
            if let Some(path) = summary_csv {
                write(&path, &summary_to_csv(&result.summary)?)?;
            }
            println!(
                "instances: {}, excluded (no fixed point): {}",
                result.rows.len(),
                result.summary.excluded
            );
            for s in &result.summary.per_m {
                println!("M = {}: n {} mean {:e} std {:e}", s.m, s.count, s.mean, s.std);
            }
            write_json(&out, &to_json(&result))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
