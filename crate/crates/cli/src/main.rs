use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use brwcap::capacity::{capacity_exact, capacity_lower_bound, capacity_mc, capacity_mc_sampled, CapacityEstimate};
use brwcap::constants::{birkhoff_check, c_g, isotropic_bm_oracle, ConstantMethod};
use brwcap::forest::SpineForest;
use brwcap::green::{green_series_oracle, write_cache, GaussianSurrogate, GreenFunction, GreenTable};
use brwcap::harness::{run_capacity_experiment, run_identity_suites, write_outputs, ExperimentConfig, ExperimentKind};
use brwcap::seeds::stream_rng;
use brwcap::trees::{embed, sample_gw, sample_gw_conditioned, RangeSet};
use brwcap::{OffspringLaw, Point, StepLaw};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "brwcap", version, about = "Capacity of branching random walk ranges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a conditioned tree or a window of the spine forest.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Green's function values and caches.
    #[command(subcommand)]
    Green(GreenCmd),
    /// Capacity of a point set read from a file.
    Capacity(CapacityArgs),
    /// Limit constants.
    #[command(subcommand)]
    Constants(ConstantsCmd),
    /// Run an experiment described by a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum SampleCmd {
    /// A Galton-Watson tree embedded in the lattice, in the tree text format.
    Tree {
        #[arg(long, default_value = "geometric")]
        mu: String,
        #[arg(long, default_value = "srw6")]
        theta: String,
        /// Condition on this many nodes; without it the tree is unconditioned.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        ceiling: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print only the range (distinct positions).
        #[arg(long)]
        range: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spine forest nodes v_{-left}..v_{right}, one line per node.
    Forest {
        #[arg(long, default_value = "geometric")]
        mu: String,
        #[arg(long, default_value = "srw6")]
        theta: String,
        #[arg(long, default_value_t = 20)]
        left: usize,
        #[arg(long, default_value_t = 20)]
        right: usize,
        #[arg(long, default_value_t = 1 << 24)]
        ceiling: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GreenCmd {
    /// G_lambda(x) by Fourier inversion, with the asymptotic profile and optionally the
    /// series value for comparison.
    Eval {
        #[arg(long)]
        law: String,
        /// Comma separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Also sum the return-probability series with this many terms.
        #[arg(long)]
        series_terms: Option<usize>,
    },
    /// Fill a table for all |x|_inf <= radius and write it as a binary cache.
    Cache {
        #[arg(long)]
        law: String,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        radius: i32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CapMethod {
    Exact,
    Mc,
    McSampled,
    Bound,
}

#[derive(clap::Args)]
struct CapacityArgs {
    #[arg(long, value_enum, default_value = "exact")]
    method: CapMethod,
    /// Point list or tree file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    law: String,
    /// Walks per point (mc) or in total (mc-sampled).
    #[arg(long, default_value_t = 10_000)]
    walks: usize,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Parameter of the lower bound.
    #[arg(long, default_value_t = 4)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum ConstantsCmd {
    /// The constant C_G of the d = 6 limit theorem.
    #[command(name = "c-g")]
    CG {
        #[arg(long, default_value = "geometric")]
        mu: String,
        #[arg(long, default_value = "srw6")]
        theta: String,
        #[arg(long, default_value = "srw6")]
        eta: String,
        #[arg(long, default_value = "mc")]
        method: ConstantMethod,
        #[arg(long, default_value_t = 20_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ergodic averages (1 / log n) sum |S_i|^-2 against the Brownian limit.
    Birkhoff {
        #[arg(long, default_value = "srw6")]
        eta: String,
        #[arg(long, value_delimiter = ',', default_value = "64,4096,262144")]
        grid: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    D6,
    D7,
    Identities,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    which: ExperimentName,
    #[arg(long)]
    config: PathBuf,
    /// Run the exploratory d = 5 growth measurement instead.
    #[arg(long)]
    d5_lower_bound: bool,
    /// Overrides the output directory of the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample(cmd) => sample(cmd)?,
        Command::Green(cmd) => green(cmd)?,
        Command::Capacity(args) => capacity(args)?,
        Command::Constants(cmd) => constants(cmd)?,
        Command::Experiment(args) => return experiment(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn sample(cmd: SampleCmd) -> Result<()> {
    match cmd {
        SampleCmd::Tree { mu, theta, n, ceiling, seed, range, out } => {
            let mu = OffspringLaw::parse(&mu)?;
            let theta = StepLaw::parse(&theta)?;
            let mut rng = stream_rng(seed, "cli/sample-tree", n.unwrap_or(0) as u64, 0);
            let tree = match n {
                Some(n) => sample_gw_conditioned(&mu, n, &mut rng)?,
                None => sample_gw(&mu, &mut rng, ceiling)?,
            };
            let s = embed(tree, &theta, &mut rng);
            let text = if range { s.range().to_text() } else { s.tree.to_text(Some((&s.positions, theta.dim()))) };
            emit(&text, out.as_ref())
        }
        SampleCmd::Forest { mu, theta, left, right, ceiling, seed, out } => {
            let mu = OffspringLaw::parse(&mu)?;
            let theta = StepLaw::parse(&theta)?;
            let rng = stream_rng(seed, "cli/sample-forest", 0, 0);
            let f = SpineForest::sample_window(&mu, &theta, left, right, rng, ceiling)?;
            emit(&f.dump_window(left, right)?, out.as_ref())
        }
    }
}

fn green(cmd: GreenCmd) -> Result<()> {
    match cmd {
        GreenCmd::Eval { law, x, lambda, series_terms } => {
            let law = StepLaw::parse(&law)?;
            let p = Point::parse(&x).map_err(anyhow::Error::msg)?;
            let g = GreenFunction::new(&law, lambda)?;
            let value = g.value(&p)?;
            let asym = (lambda == 1.0 && !p.is_origin())
                .then(|| GaussianSurrogate::new(&law).green_asymptotic(&p.to_f64(law.dim())));
            let mut rec = json!({ "law": law.name(), "x": p.coords(law.dim()), "lambda": lambda, "value": value, "asymptotic": asym });
            if let Some(terms) = series_terms {
                let s = green_series_oracle(&law, &p, lambda, terms)?;
                rec["series"] = json!({ "partial_sum": s.partial_sum, "tail_estimate": s.tail_estimate, "total": s.total() });
            }
            println!("{}", serde_json::to_string_pretty(&rec)?);
        }
        GreenCmd::Cache { law, lambda, radius, out } => {
            let law = StepLaw::parse(&law)?;
            let mut table = GreenTable::new(GreenFunction::with_ymax(&law, lambda, radius.max(8) * 2)?);
            let d = law.dim();
            let side = (2 * radius + 1) as usize;
            let pts: Vec<Point> = (0..side.pow(d as u32))
                .map(|mut i| {
                    let mut c = [0i32; brwcap::MAX_DIM];
                    for slot in c.iter_mut().take(d) {
                        *slot = (i % side) as i32 - radius;
                        i /= side;
                    }
                    Point(c)
                })
                .collect();
            table.prefill(&pts)?;
            table.freeze();
            write_cache(&out, &table)?;
            eprintln!("wrote {} entries to {}", table.len(), out.display());
        }
    }
    Ok(())
}

fn capacity(a: CapacityArgs) -> Result<()> {
    let law = StepLaw::parse(&a.law)?;
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let set = RangeSet::from_text(&text)?;
    if set.dim() != law.dim() {
        bail!("input is {}-dimensional but the law is {}-dimensional", set.dim(), law.dim());
    }
    let mut rng = stream_rng(a.seed, "cli/capacity", set.len() as u64, 0);
    let rec = match a.method {
        CapMethod::Exact => {
            let mut t = GreenTable::for_law(&law, 1.0)?;
            let v = capacity_exact(&set, &mut t)?.value;
            CapacityEstimate { value: v, std_error: 0.0, method: "exact".into(), params: json!({ "points": set.len() }) }
        }
        CapMethod::Bound => {
            let mut t = GreenTable::for_law(&law, 1.0)?;
            let v = capacity_lower_bound(&set, &mut t, a.k)?;
            CapacityEstimate { value: v, std_error: 0.0, method: "bound".into(), params: json!({ "points": set.len(), "k": a.k }) }
        }
        CapMethod::Mc => capacity_mc(&set, &law, &mut rng, a.walks, a.eps)?,
        CapMethod::McSampled => capacity_mc_sampled(&set, &law, &mut rng, a.walks, a.eps)?,
    };
    println!("{}", serde_json::to_string_pretty(&rec)?);
    Ok(())
}

fn constants(cmd: ConstantsCmd) -> Result<()> {
    match cmd {
        ConstantsCmd::CG { mu, theta, eta, method, paths, seed } => {
            let mu = OffspringLaw::parse(&mu)?;
            let theta = StepLaw::parse(&theta)?;
            let eta = StepLaw::parse(&eta)?;
            let mut rng = stream_rng(seed, "cli/c-g", 0, 0);
            let r = c_g(&mu, &eta, &theta, method, &mut rng, paths)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        ConstantsCmd::Birkhoff { eta, grid, replicas, eps, seed } => {
            let eta = StepLaw::parse(&eta)?;
            let s = GaussianSurrogate::new(&eta);
            let d = eta.dim();
            let sigma2 = s.covariance()[(0, 0)];
            let limit = isotropic_bm_oracle(d, sigma2);
            let f = |p: &Point| if p.is_origin() { 0.0 } else { 1.0 / p.norm2() as f64 };
            let rows = birkhoff_check(&f, &eta, &grid, limit, eps, replicas, &|r| stream_rng(seed, "cli/birkhoff", 0, r as u64));
            println!("{}", serde_json::to_string_pretty(&json!({ "limit": limit, "rows": rows }))?);
        }
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    cfg.experiment.kind = match (a.which, a.d5_lower_bound) {
        (_, true) => ExperimentKind::D5LowerBound,
        (ExperimentName::D6, _) => ExperimentKind::D6,
        (ExperimentName::D7, _) => ExperimentKind::D7,
        (ExperimentName::Identities, _) => ExperimentKind::Identities,
    };
    if let Some(dir) = a.output_dir {
        cfg.experiment.output_dir = dir;
    }
    cfg.validate()?;
    if cfg.experiment.kind == ExperimentKind::Identities {
        let report = run_identity_suites(&cfg)?;
        for s in &report.suites {
            println!("{} {} ({:.1}s)", if s.passed { "PASS" } else { "FAIL" }, s.name, s.wall_time_s);
        }
        std::fs::create_dir_all(&cfg.experiment.output_dir)?;
        let path = cfg.experiment.output_dir.join("identities.json");
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
        eprintln!("wrote {}", path.display());
        return Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    if cfg.experiment.kind == ExperimentKind::D5LowerBound {
        eprintln!("exploratory: growth of cap(R_n) in d = 5, no limit theorem is asserted");
    }
    let res = run_capacity_experiment(&cfg)?;
    println!("n,mean,std_error,rel_deviation,ratio_prev");
    for r in &res.rows {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.5}")).unwrap_or_default();
        println!("{},{:.5},{:.5},{},{}", r.n, r.mean, r.std_error, opt(r.rel_deviation), opt(r.ratio_prev));
    }
    for p in write_outputs(&res)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}
