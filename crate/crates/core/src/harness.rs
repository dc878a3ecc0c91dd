//! Experiment configuration, orchestration and output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{
    capacity_exact, capacity_lower_bound, capacity_mc, capacity_mc_sampled, killed_triple_estimator,
    CapacityError, CapacityEstimate, ForestWindows,
};
use crate::constants::{c_g, ConstantError, ConstantMethod, ConstantReport, LatticeF};
use crate::forest::{cylinder_probability, enumerate_prefixes, shift_sigma, ForestError, ForestPrefix, SpineForest};
use crate::green::{GreenError, GreenFunction, GreenTable, HeatKernel};
use crate::laws::{LawError, OffspringLaw, StepLaw};
use crate::point::Point;
use crate::seeds::{fork, stream_rng};
use crate::stats::{chi_square, Summary};
use crate::trees::{
    embed_and_range, forest_sequences, kemperman_prob, sample_gw, sample_gw_conditioned, RangeSet, TreeError,
};

/// Bumped whenever a CSV column set changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Constant(#[from] ConstantError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    D6,
    D7,
    /// Exploratory growth measurement in d = 5.
    D5LowerBound,
    Identities,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::D6 => "d6",
            ExperimentKind::D7 => "d7",
            ExperimentKind::D5LowerBound => "d5-lower-bound",
            ExperimentKind::Identities => "identities",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Galton-Watson trees with the grid value as size.
    #[default]
    Tree,
    /// Windows `v_0, ..., v_{n-1}` of the spine forest.
    Forest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// Trees with exactly `n` nodes.
    #[default]
    Size,
    /// Unconditioned trees; the statistic still divides by `n`.
    None,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMethod {
    /// `exact` up to `exact_max` points, `mc-sampled` beyond.
    #[default]
    Auto,
    Exact,
    Mc,
    McSampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: Vec<u64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub conditioning: Conditioning,
    /// Node ceiling for unconditioned trees and forests, as a multiple of `n`.
    #[serde(default = "default_ceiling_factor")]
    pub ceiling_factor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSection {
    pub mu: String,
    pub theta: String,
    pub eta: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapacitySection {
    pub method: CapacityMethod,
    pub exact_max: usize,
    /// Walks per set for `mc-sampled`.
    pub walks: usize,
    /// Walks per point for `mc`.
    pub walkers_per_point: usize,
    /// Bound on the return probability from the stopping sphere.
    pub eps: f64,
    /// Coordinate bound of the Green's table used by `exact`.
    pub ymax: i32,
}

impl Default for CapacitySection {
    fn default() -> Self {
        CapacitySection { method: CapacityMethod::Auto, exact_max: 1500, walks: 20_000, walkers_per_point: 200, eps: 1e-3, ymax: 96 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSection {
    pub method: ConstantMethod,
    pub paths: usize,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        ConstantsSection { method: ConstantMethod::MonteCarlo, paths: 20_000 }
    }
}

impl<'de> Deserialize<'de> for ConstantMethod {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitySection {
    pub kemperman_max: usize,
    pub killed_n: usize,
    pub killed_replicas: usize,
    pub killed_walkers: usize,
    pub lower_bound_ranges: usize,
    pub forest_samples: usize,
    pub prefix_nodes: usize,
    pub shift_samples: usize,
}

impl Default for IdentitySection {
    fn default() -> Self {
        IdentitySection {
            kemperman_max: 8,
            killed_n: 256,
            killed_replicas: 10_000,
            killed_walkers: 64,
            lower_bound_ranges: 100,
            forest_samples: 1_000_000,
            prefix_nodes: 4,
            shift_samples: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub laws: LawSection,
    #[serde(default)]
    pub capacity: CapacitySection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub identities: IdentitySection,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_replicas() -> usize {
    50
}

fn default_ceiling_factor() -> usize {
    64
}

/// Parsed laws of a configuration.
#[derive(Clone, Debug)]
pub struct Laws {
    pub mu: OffspringLaw,
    pub theta: StepLaw,
    pub eta: StepLaw,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn laws(&self) -> Result<Laws, HarnessError> {
        let mu = match self.experiment.conditioning {
            Conditioning::Size => OffspringLaw::parse(&self.laws.mu)?,
            Conditioning::None => OffspringLaw::parse_any_mean(&self.laws.mu)?,
        };
        Ok(Laws { mu, theta: StepLaw::parse(&self.laws.theta)?, eta: StepLaw::parse(&self.laws.eta)? })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let e = &self.experiment;
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if e.kind != ExperimentKind::Identities {
            if e.grid.is_empty() {
                return bad("grid is empty");
            }
            if !e.grid.windows(2).all(|w| w[0] < w[1]) {
                return bad("grid must be strictly increasing");
            }
            if e.grid[0] < 2 {
                return bad("grid values must be at least 2");
            }
            if e.replicas < 2 {
                return bad("replicas must be at least 2");
            }
        }
        let laws = self.laws()?;
        let d = laws.theta.dim();
        if laws.eta.dim() != d {
            return bad("theta and eta must share a dimension");
        }
        let want = match e.kind {
            ExperimentKind::D6 => Some(6..=6),
            ExperimentKind::D7 => Some(7..=9),
            ExperimentKind::D5LowerBound => Some(5..=5),
            ExperimentKind::Identities => None,
        };
        if let Some(r) = want {
            if !r.contains(&d) {
                return Err(HarnessError::Config(format!("dimension {d} does not fit experiment {}", e.kind.label())));
            }
        }
        if e.model == Model::Forest && e.conditioning == Conditioning::None {
            return bad("the forest model has no conditioning option");
        }
        if !(self.capacity.eps > 0.0 && self.capacity.eps < 1.0) {
            return bad("capacity.eps must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub n: u64,
    pub replicas: usize,
    pub mean: f64,
    pub std_error: f64,
    pub cv: f64,
    pub mean_range_size: f64,
    /// `mean / target - 1` in d = 6.
    pub rel_deviation: Option<f64>,
    /// `mean(n) / mean(previous n)`.
    pub ratio_prev: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub statistic: String,
    pub build_id: String,
    pub csv_schema: u32,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub target: Option<f64>,
    pub constant: Option<ConstantReport>,
    pub rows: Vec<Row>,
    /// Least-squares slope of `|rel_deviation|` against `ln n`.
    pub deviation_trend: Option<f64>,
    pub total_wall_time_s: f64,
}

pub fn build_id() -> String {
    option_env!("BRWCAP_BUILD_ID").map(str::to_string).unwrap_or_else(|| format!("brwcap-{}", env!("CARGO_PKG_VERSION")))
}

/// Capacity of `set` by the configured method.
pub fn estimate_capacity(
    set: &RangeSet,
    eta: &StepLaw,
    kernel: Option<&Arc<HeatKernel>>,
    cfg: &CapacitySection,
    rng: &mut ChaCha8Rng,
) -> Result<CapacityEstimate, HarnessError> {
    let exact = |k: &Arc<HeatKernel>| -> Result<CapacityEstimate, HarnessError> {
        let mut table = GreenTable::new(GreenFunction::from_kernel(k.clone(), 1.0)?);
        let c = capacity_exact(set, &mut table)?;
        Ok(CapacityEstimate {
            value: c.value,
            std_error: 0.0,
            method: "exact".into(),
            params: serde_json::json!({ "set_size": set.len() }),
        })
    };
    let fits = |k: &Arc<HeatKernel>| {
        set.bounding_box().is_some_and(|b| (0..set.dim()).all(|i| b.hi.0[i] - b.lo.0[i] <= k.ymax()))
    };
    match cfg.method {
        CapacityMethod::Exact => {
            let k = kernel.ok_or_else(|| HarnessError::Config("exact capacity needs a Green's kernel".into()))?;
            exact(k)
        }
        CapacityMethod::Mc => Ok(capacity_mc(set, eta, rng, cfg.walkers_per_point, cfg.eps)?),
        CapacityMethod::McSampled => Ok(capacity_mc_sampled(set, eta, rng, cfg.walks, cfg.eps)?),
        CapacityMethod::Auto => match kernel {
            Some(k) if set.len() <= cfg.exact_max && fits(k) => exact(k),
            _ => Ok(capacity_mc_sampled(set, eta, rng, cfg.walks, cfg.eps)?),
        },
    }
}

/// Range of one replica at size `n`.
pub fn sample_range(cfg: &ExperimentConfig, laws: &Laws, n: u64, rng: &mut ChaCha8Rng) -> Result<RangeSet, HarnessError> {
    let e = &cfg.experiment;
    let ceiling = e.ceiling_factor.saturating_mul(n as usize).max(1024);
    match e.model {
        Model::Tree => {
            let tree = match e.conditioning {
                Conditioning::Size => sample_gw_conditioned(&laws.mu, n as usize, rng)?,
                Conditioning::None => sample_gw(&laws.mu, rng, ceiling)?,
            };
            Ok(embed_and_range(tree, &laws.theta, rng).1)
        }
        Model::Forest => {
            let f = SpineForest::sample_window(&laws.mu, &laws.theta, 0, n as usize - 1, fork(rng), ceiling)?;
            Ok(f.window_range(0, n as usize - 1)?)
        }
    }
}

/// Runs a d6, d7 or d5 experiment. Replica `r` of grid value `n` draws from the stream
/// `(seed, kind/model, n, r)`.
pub fn run_capacity_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let laws = cfg.laws()?;
    let kind = cfg.experiment.kind;
    if kind == ExperimentKind::Identities {
        return Err(HarnessError::Config("use run_identity_suites for identities".into()));
    }
    let (constant, target) = if kind == ExperimentKind::D6 {
        let mut rng = stream_rng(cfg.experiment.seed, "d6/constant", 0, 0);
        let rep = c_g(&laws.mu, &laws.eta, &laws.theta, cfg.constants.method, &mut rng, cfg.constants.paths)?;
        let t = 2.0 / rep.value;
        (Some(rep), Some(t))
    } else {
        (None, None)
    };
    let kernel = match cfg.capacity.method {
        CapacityMethod::Exact | CapacityMethod::Auto => Some(Arc::new(HeatKernel::new(&laws.eta, cfg.capacity.ymax)?)),
        _ => None,
    };
    let label = format!("{}/{:?}/{:?}", kind.label(), cfg.experiment.model, cfg.experiment.conditioning);
    let mut rows: Vec<Row> = Vec::new();
    for &n in &cfg.experiment.grid {
        let t0 = Instant::now();
        let idx: Vec<usize> = (0..cfg.experiment.replicas).collect();
        let per = crate::par::map(&idx, |&r| -> Result<(f64, usize), HarnessError> {
            let mut rng = stream_rng(cfg.experiment.seed, &label, n, r as u64);
            let set = sample_range(cfg, &laws, n, &mut rng)?;
            let cap = estimate_capacity(&set, &laws.eta, kernel.as_ref(), &cfg.capacity, &mut rng)?;
            let stat = match kind {
                ExperimentKind::D6 => cap.value * (n as f64).ln() / n as f64,
                _ => cap.value / n as f64,
            };
            Ok((stat, set.len()))
        });
        let per: Vec<(f64, usize)> = per.into_iter().collect::<Result<_, _>>()?;
        let xs: Vec<f64> = per.iter().map(|p| p.0).collect();
        let s = Summary::of(&xs);
        let mean_range_size = per.iter().map(|p| p.1 as f64).sum::<f64>() / per.len() as f64;
        let ratio_prev = rows.last().map(|r| s.mean / r.mean);
        rows.push(Row {
            n,
            replicas: s.n,
            mean: s.mean,
            std_error: s.std_error,
            cv: s.cv(),
            mean_range_size,
            rel_deviation: target.map(|t| s.mean / t - 1.0),
            ratio_prev,
            wall_time_s: t0.elapsed().as_secs_f64(),
        });
    }
    let deviation_trend = target.map(|_| {
        let pts: Vec<(f64, f64)> =
            rows.iter().map(|r| ((r.n as f64).ln(), r.rel_deviation.unwrap_or(0.0).abs())).collect();
        slope(&pts)
    });
    Ok(ExperimentResult {
        kind,
        statistic: match kind {
            ExperimentKind::D6 => "cap * ln(n) / n".into(),
            _ => "cap / n".into(),
        },
        build_id: build_id(),
        csv_schema: CSV_SCHEMA_VERSION,
        seed: cfg.experiment.seed,
        config: cfg.clone(),
        target,
        constant,
        rows,
        deviation_trend,
        total_wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Least-squares slope of `y` on `x`.
pub fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

/// The CSV table, without timing columns.
pub fn result_csv(res: &ExperimentResult) -> String {
    let mut s = String::from("n,replicas,mean,std_error,cv,mean_range_size,rel_deviation,ratio_prev\n");
    for r in &res.rows {
        let _ = writeln!(
            s,
            "{},{},{:.10e},{:.10e},{:.10e},{:.4},{},{}",
            r.n,
            r.replicas,
            r.mean,
            r.std_error,
            r.cv,
            r.mean_range_size,
            opt(r.rel_deviation),
            opt(r.ratio_prev)
        );
    }
    s
}

/// Plot data: `x y y_err` per line.
pub fn result_plot(res: &ExperimentResult) -> String {
    let mut s = format!("# x=n y={} y_err=std_error\n", res.statistic);
    for r in &res.rows {
        let _ = writeln!(s, "{} {:.10e} {:.10e}", r.n, r.mean, r.std_error);
    }
    s
}

pub fn result_json(res: &ExperimentResult) -> String {
    serde_json::to_string_pretty(res).expect("result serializes")
}

/// Removes every field whose name ends in `wall_time_s`, for comparing runs.
pub fn strip_timing(json: &str) -> String {
    fn walk(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.retain(|k, _| !k.ends_with("wall_time_s"));
                m.values_mut().for_each(walk);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(walk),
            _ => {}
        }
    }
    let mut v: serde_json::Value = serde_json::from_str(json).expect("valid json");
    walk(&mut v);
    serde_json::to_string_pretty(&v).expect("json serializes")
}

/// Writes `<kind>.csv`, `<kind>.json` and `<kind>.plot.dat` into the output directory.
pub fn write_outputs(res: &ExperimentResult) -> Result<Vec<PathBuf>, HarnessError> {
    let dir = &res.config.experiment.output_dir;
    std::fs::create_dir_all(dir)?;
    let base = res.kind.label();
    let files = [
        (dir.join(format!("{base}.csv")), result_csv(res)),
        (dir.join(format!("{base}.json")), result_json(res)),
        (dir.join(format!("{base}.plot.dat")), result_plot(res)),
    ];
    for (p, text) in &files {
        std::fs::write(p, text)?;
    }
    Ok(files.into_iter().map(|f| f.0).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub build_id: String,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// Largest absolute gap between Kemperman's formula and forest enumeration over
/// `1 <= n <= m <= max`.
pub fn kemperman_check(mu: &OffspringLaw, max: usize) -> f64 {
    let mut worst = 0.0f64;
    for m in 1..=max {
        for n in 1..=m {
            let mut total = 0.0;
            forest_sequences(mu, m, n, &mut Vec::new(), &mut |s| {
                total += s.iter().map(|&k| mu.pmf(k as usize)).product::<f64>();
            });
            worst = worst.max((total - kemperman_prob(mu, n, m)).abs());
        }
    }
    worst
}

/// Checks `sigma` on `samples` forests: positions and ids of the shifted view are the
/// re-indexed ones, recentred at `v_1`. Returns the number of mismatches.
pub fn shift_check(mu: &OffspringLaw, theta: &StepLaw, samples: usize, window: usize, seed: u64) -> Result<usize, HarnessError> {
    let mut bad = 0;
    for r in 0..samples {
        let f = SpineForest::sample_window(mu, theta, window, window, stream_rng(seed, "shift", 0, r as u64), 1 << 24)?;
        let v = f.view();
        let s = shift_sigma(&v)?;
        let x1 = f.position(1)?;
        let (lo, hi) = s.materialized();
        for i in lo..=hi {
            if s.position(i)? != f.position(i + 1)? - x1 || s.node(i)?.id != f.node(i + 1)?.id {
                bad += 1;
            }
        }
        if s.position(0)? != Point::ORIGIN {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Frequencies of the prefix formed by `T_0` and spine node 1 over `samples` forests,
/// against `cylinder_probability`, pooled into one bucket for prefixes above
/// `max_nodes` nodes.
pub fn prefix_chi_square(
    mu: &OffspringLaw,
    theta: &StepLaw,
    samples: usize,
    max_nodes: usize,
    seed: u64,
) -> Result<crate::stats::ChiSquare, HarnessError> {
    let shapes = enumerate_prefixes(mu, 1, max_nodes)?;
    let mut probs: Vec<f64> = shapes.iter().map(|s| cylinder_probability(s, mu)).collect();
    let small: f64 = probs.iter().sum();
    probs.push(1.0 - small);
    let index: std::collections::BTreeMap<&ForestPrefix, usize> = shapes.iter().enumerate().map(|(i, s)| (s, i)).collect();
    const BLOCK: usize = 4096;
    let blocks: Vec<usize> = (0..samples.div_ceil(BLOCK)).collect();
    let counts = crate::par::map(&blocks, |&b| -> Result<Vec<u64>, HarnessError> {
        let mut c = vec![0u64; probs.len()];
        let mut rng = stream_rng(seed, "prefix", max_nodes as u64, b as u64);
        for _ in 0..BLOCK.min(samples - b * BLOCK) {
            let slot = match SpineForest::sample_spine(mu, theta, 1, fork(&mut rng), 4 * max_nodes) {
                Ok(f) => f.prefix_shape(1).and_then(|p| index.get(&p).copied()).unwrap_or(shapes.len()),
                Err(ForestError::CeilingExceeded { .. }) => shapes.len(),
                Err(e) => return Err(e.into()),
            };
            c[slot] += 1;
        }
        Ok(c)
    });
    let mut total = vec![0u64; probs.len()];
    for c in counts {
        for (t, x) in total.iter_mut().zip(c?) {
            *t += x;
        }
    }
    Ok(chi_square(&total, &probs))
}

/// Samples conditioned ranges of random size in `[min, max]` and counts how often the
/// lower bound exceeds the exact capacity for `k` in `ks`.
pub fn lower_bound_check(
    laws: &Laws,
    ranges: usize,
    sizes: (usize, usize),
    ks: &[u32],
    seed: u64,
) -> Result<(usize, usize), HarnessError> {
    let kernel = Arc::new(HeatKernel::new(&laws.eta, 64)?);
    let idx: Vec<usize> = (0..ranges).collect();
    let per = crate::par::map(&idx, |&r| -> Result<usize, HarnessError> {
        let mut rng = stream_rng(seed, "lower-bound", 0, r as u64);
        let n = rng.gen_range(sizes.0..=sizes.1);
        let tree = sample_gw_conditioned(&laws.mu, n, &mut rng)?;
        let (_, set) = embed_and_range(tree, &laws.theta, &mut rng);
        let mut table = GreenTable::new(GreenFunction::from_kernel(kernel.clone(), 1.0)?);
        let exact = capacity_exact(&set, &mut table)?.value;
        let mut bad = 0;
        for &k in ks {
            if capacity_lower_bound(&set, &mut table, k)? > exact * (1.0 + 1e-12) {
                bad += 1;
            }
        }
        Ok(bad)
    });
    let mut violations = 0;
    for v in per {
        violations += v?;
    }
    Ok((violations, ranges * ks.len()))
}

/// Mean of `E G I` for the spine forest with killing `1 - 1/n`.
pub fn killed_triple_check(
    laws: &Laws,
    n: usize,
    replicas: usize,
    walkers: usize,
    seed: u64,
) -> Result<crate::capacity::KilledTripleResult, HarnessError> {
    let src = ForestWindows { mu: laws.mu.clone(), theta: laws.theta.clone(), ceiling: 1 << 26 };
    let func = GreenFunction::with_ymax(&laws.eta, 1.0 - 1.0 / n as f64, 256)?;
    let mut table = GreenTable::new(func);
    Ok(killed_triple_estimator(&src, &laws.eta, &mut table, n, replicas, walkers, &|r| {
        stream_rng(seed, "killed-triple", n as u64, r as u64)
    })?)
}

/// Runs every identity suite with the configured budgets. Failures are reported,
/// not raised.
pub fn run_identity_suites(cfg: &ExperimentConfig) -> Result<IdentityReport, HarnessError> {
    let laws = cfg.laws()?;
    let b = &cfg.identities;
    let seed = cfg.experiment.seed;
    let mut suites = Vec::new();
    let mut run = |name: &str, f: &mut dyn FnMut() -> Result<(bool, serde_json::Value), HarnessError>| {
        let t = Instant::now();
        let (passed, detail) = match f() {
            Ok(x) => x,
            Err(e) => (false, serde_json::json!({ "error": e.to_string() })),
        };
        suites.push(SuiteResult { name: name.into(), passed, detail, wall_time_s: t.elapsed().as_secs_f64() });
    };
    run("kemperman", &mut || {
        let g = kemperman_check(&OffspringLaw::geometric(), b.kemperman_max);
        let bi = kemperman_check(&OffspringLaw::binary(), b.kemperman_max);
        Ok((g.max(bi) <= 1e-12, serde_json::json!({ "max_abs_gap_geometric": g, "max_abs_gap_binary": bi })))
    });
    run("killed-triple", &mut || {
        let r = killed_triple_check(&laws, b.killed_n, b.killed_replicas, b.killed_walkers, seed)?;
        let ok = (r.triple.mean - 1.0).abs() <= 3.0 * r.triple.std_error;
        Ok((ok, serde_json::to_value(&r).unwrap()))
    });
    run("lower-bound", &mut || {
        let (v, checks) = lower_bound_check(&laws, b.lower_bound_ranges, (10, 400), &[1, 4, 16], seed)?;
        Ok((v == 0, serde_json::json!({ "violations": v, "checks": checks })))
    });
    run("shift", &mut || {
        let bad = shift_check(&laws.mu, &laws.theta, b.shift_samples, 50, seed)?;
        Ok((bad == 0, serde_json::json!({ "mismatches": bad, "samples": b.shift_samples })))
    });
    run("prefix-cylinder", &mut || {
        let c = prefix_chi_square(&laws.mu, &laws.theta, b.forest_samples, b.prefix_nodes, seed)?;
        Ok((c.p_value > 1e-3, serde_json::to_value(c).unwrap()))
    });
    if laws.eta.dim() == 6 && laws.eta.fingerprint() == laws.theta.fingerprint() {
        run("f-homogeneity", &mut || {
            let lf = LatticeF::new(&laws.eta, &laws.theta, 64)?;
            let mut worst = 0.0f64;
            for z in [Point::unit(0, 10), Point::from_slice(&[6, 6, 5, 0, 0, 0])] {
                let f = lf.value(&z)?;
                for l in [2, 3] {
                    let mut zl = z;
                    zl.0.iter_mut().for_each(|c| *c *= l);
                    worst = worst.max((lf.value(&zl)? * (l * l) as f64 / f - 1.0).abs());
                }
            }
            Ok((worst <= 0.02, serde_json::json!({ "max_rel_gap": worst })))
        });
    }
    Ok(IdentityReport { build_id: build_id(), seed, suites })
}
