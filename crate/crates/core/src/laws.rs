//! Offspring laws on `N` and symmetric step laws on `Z^d`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::point::{Point, MAX_DIM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("offspring law is not critical: mean {mean}")]
    NotCritical { mean: f64 },
    #[error("offspring law is the Dirac mass at 1")]
    DegenerateDelta1,
    #[error("negative probability {mass} at {at}")]
    NegativeMass { at: String, mass: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("moment sum does not converge")]
    DivergentSum,
    #[error("step law has non-zero mean {0:?}")]
    NonZeroMean(Vec<f64>),
    #[error("step law is not symmetric at {0}")]
    NotSymmetric(String),
    #[error("step law covariance is not positive definite")]
    DegenerateCovariance,
    #[error("step law support does not generate Z^{0}")]
    Reducible(usize),
    #[error("dimension {0} is not supported (1..={MAX_DIM})")]
    BadDimension(usize),
    #[error("cannot parse law `{0}`")]
    UnknownSpec(String),
}

const CLOSED_FORM_TOL: f64 = 1e-12;
const USER_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
enum Family {
    /// `mu(k) = 2^{-k-1}`.
    GeometricHalf,
    Finite { pmf: Vec<f64>, cdf: Vec<f64> },
    /// `mu*(k) = (k+1) mu(k+1)` of the boxed law.
    Merged(Box<OffspringLaw>),
}

/// A probability law on the non-negative integers, used as an offspring distribution.
#[derive(Clone, Debug)]
pub struct OffspringLaw {
    name: String,
    family: Family,
    /// Cumulative law of `k mu(k)`, for spine sampling of finite laws.
    size_biased_cdf: Vec<f64>,
}

impl OffspringLaw {
    /// The critical geometric law `mu(k) = 2^{-k-1}`.
    pub fn geometric() -> OffspringLaw {
        OffspringLaw { name: "geometric".into(), family: Family::GeometricHalf, size_biased_cdf: Vec::new() }
    }

    /// The critical binary law `mu(0) = mu(2) = 1/2`.
    pub fn binary() -> OffspringLaw {
        Self::from_pmf_tol("binary", &[0.5, 0.0, 0.5], CLOSED_FORM_TOL, true).expect("binary law is valid")
    }

    /// A finitely supported law given by `pmf[k] = mu(k)`. Must be critical and not `delta_1`.
    pub fn from_pmf(pmf: &[f64]) -> Result<OffspringLaw, LawError> {
        Self::from_pmf_tol(&pmf_name(pmf), pmf, USER_TOL, true)
    }

    /// Like [`from_pmf`](Self::from_pmf) but without the criticality check. Such laws are
    /// only meaningful for degenerate diagnostics, e.g. `{0: 1}`.
    pub fn from_pmf_any_mean(pmf: &[f64]) -> Result<OffspringLaw, LawError> {
        Self::from_pmf_tol(&pmf_name(pmf), pmf, USER_TOL, false)
    }

    fn from_pmf_tol(name: &str, pmf: &[f64], tol: f64, critical: bool) -> Result<OffspringLaw, LawError> {
        for (k, &p) in pmf.iter().enumerate() {
            if p < 0.0 || !p.is_finite() {
                return Err(LawError::NegativeMass { at: k.to_string(), mass: p });
            }
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(LawError::NotNormalized { sum });
        }
        if pmf.len() > 1 && (pmf[1] - 1.0).abs() <= tol {
            return Err(LawError::DegenerateDelta1);
        }
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        if critical && (mean - 1.0).abs() > tol {
            return Err(LawError::NotCritical { mean });
        }
        let mut pmf = pmf.to_vec();
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        let cdf = cumulative(pmf.iter().copied());
        let size_biased_cdf = cumulative(pmf.iter().enumerate().map(|(k, p)| k as f64 * p));
        Ok(OffspringLaw { name: name.into(), family: Family::Finite { pmf, cdf }, size_biased_cdf })
    }

    /// Parses `geometric`, `binary`, or an explicit table such as `0:0.5,2:0.5`.
    pub fn parse(spec: &str) -> Result<OffspringLaw, LawError> {
        match spec.trim() {
            "geometric" | "geom" => Ok(Self::geometric()),
            "binary" => Ok(Self::binary()),
            s => Self::from_pmf(&parse_table(s)?),
        }
    }

    /// Like [`parse`](Self::parse) but accepts non-critical explicit tables.
    pub fn parse_any_mean(spec: &str) -> Result<OffspringLaw, LawError> {
        match spec.trim() {
            "geometric" | "geom" | "binary" => Self::parse(spec),
            s => Self::from_pmf_any_mean(&parse_table(s)?),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self.family, Family::GeometricHalf)
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match &self.family {
            Family::GeometricHalf => 0.5f64.powi(k.min(2000) as i32 + 1),
            Family::Finite { pmf, .. } => pmf.get(k).copied().unwrap_or(0.0),
            Family::Merged(base) => (k + 1) as f64 * base.pmf(k + 1),
        }
    }

    /// `mu([k, infinity))`.
    pub fn tail(&self, k: usize) -> f64 {
        match &self.family {
            Family::GeometricHalf => 0.5f64.powi(k.min(2000) as i32),
            Family::Finite { pmf, .. } => pmf.iter().skip(k).sum(),
            Family::Merged(base) => {
                // sum_{j>=k} (j+1) mu(j+1) = sum_{i>k} i mu(i)
                match base.max_support() {
                    Some(m) => (k + 1..=m).map(|i| i as f64 * base.pmf(i)).sum(),
                    None => 1.0 - (0..k).map(|j| self.pmf(j)).sum::<f64>(),
                }
            }
        }
    }

    /// Largest `k` with `mu(k) > 0`, or `None` for infinite support.
    pub fn max_support(&self) -> Option<usize> {
        match &self.family {
            Family::GeometricHalf => None,
            Family::Finite { pmf, .. } => Some(pmf.len() - 1),
            Family::Merged(base) => base.max_support().map(|m| m.saturating_sub(1)),
        }
    }

    /// Support points up to `limit` (inclusive).
    pub fn support_up_to(&self, limit: usize) -> Vec<usize> {
        (0..=limit.min(self.max_support().unwrap_or(limit))).filter(|&k| self.pmf(k) > 0.0).collect()
    }

    pub fn mean(&self) -> f64 {
        self.moment_sum(|k| k as f64).unwrap_or(f64::INFINITY)
    }

    /// `sum_k (k-1) k mu(k)`, which is also the mean of the merged law and equals the
    /// variance when the law is critical.
    pub fn variance_factor(&self) -> Result<f64, LawError> {
        match &self.family {
            Family::GeometricHalf => Ok(2.0),
            _ => self.moment_sum(|k| (k as f64 - 1.0) * k as f64),
        }
    }

    fn moment_sum(&self, f: impl Fn(usize) -> f64) -> Result<f64, LawError> {
        if let Some(m) = self.max_support() {
            return Ok((0..=m).map(|k| f(k) * self.pmf(k)).sum());
        }
        let mut sum = 0.0;
        let mut small = 0;
        for k in 0..1_000_000 {
            let term = f(k) * self.pmf(k);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) && k > 10 {
                small += 1;
                if small > 50 {
                    return Ok(sum);
                }
            } else {
                small = 0;
            }
        }
        Err(LawError::DivergentSum)
    }

    /// The spine pair law `P(k+ = i, k- = j) = mu(i + j + 1)`.
    pub fn spine_pair(&self, i: usize, j: usize) -> f64 {
        self.pmf(i + j + 1)
    }

    /// The merged law `mu*(k) = (k+1) mu(k+1)` of `k+ + k-`.
    pub fn merged(&self) -> OffspringLaw {
        OffspringLaw {
            name: format!("merged({})", self.name),
            family: Family::Merged(Box::new(self.clone())),
            size_biased_cdf: Vec::new(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.family {
            Family::GeometricHalf => geometric_half(rng),
            Family::Finite { cdf, .. } => search_cdf(cdf, rng.gen::<f64>()) as u32,
            Family::Merged(base) => {
                let (i, j) = base.sample_spine_pair(rng);
                i + j
            }
        }
    }

    /// Samples `(k+, k-)` from the spine pair law. A law with zero mean yields `(0, 0)`,
    /// so its spine carries no extra subtrees.
    pub fn sample_spine_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        // k+ + k- + 1 is size-biased; given the total the split is uniform.
        let total = match &self.family {
            Family::GeometricHalf => geometric_half(rng) + geometric_half(rng) + 1,
            Family::Finite { .. } => {
                let mass = *self.size_biased_cdf.last().unwrap();
                if mass <= 0.0 {
                    return (0, 0);
                }
                search_cdf(&self.size_biased_cdf, rng.gen::<f64>() * mass) as u32
            }
            Family::Merged(_) => panic!("spine pairs of a merged law are not defined"),
        };
        let i = rng.gen_range(0..total);
        (i, total - 1 - i)
    }
}

fn pmf_name(pmf: &[f64]) -> String {
    pmf.iter()
        .enumerate()
        .filter(|(_, &p)| p != 0.0)
        .map(|(k, p)| format!("{k}:{p}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_table(s: &str) -> Result<Vec<f64>, LawError> {
    let mut pmf = Vec::new();
    for entry in s.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (k, p) = entry.split_once(':').ok_or_else(|| LawError::UnknownSpec(s.into()))?;
        let k: usize = k.trim().parse().map_err(|_| LawError::UnknownSpec(s.into()))?;
        let p: f64 = p.trim().parse().map_err(|_| LawError::UnknownSpec(s.into()))?;
        if k > 1_000_000 {
            return Err(LawError::UnknownSpec(s.into()));
        }
        if pmf.len() <= k {
            pmf.resize(k + 1, 0.0);
        }
        pmf[k] += p;
    }
    if pmf.is_empty() {
        return Err(LawError::UnknownSpec(s.into()));
    }
    Ok(pmf)
}

fn cumulative(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    it.map(|p| {
        acc += p;
        acc
    })
    .collect()
}

/// Index of the first entry of `cdf` exceeding `u`, clamped to the last index.
fn search_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Number of failures before the first success of fair coin flips.
#[inline]
pub fn geometric_half<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    let mut k = 0;
    loop {
        let z = rng.next_u64().trailing_zeros();
        k += z;
        if z < 64 {
            return k;
        }
    }
}

/// One coordinate axis of an axis-aligned step law: with probability `weight` the walk
/// moves along `axis` by a draw from `pmf` (a symmetric law on `Z \ {0}`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisComponent {
    pub axis: usize,
    pub weight: f64,
    pub pmf: Vec<(i32, f64)>,
}

impl AxisComponent {
    /// `sum_y nu(y) cos(y t)`.
    pub fn char_fn(&self, t: f64) -> f64 {
        self.pmf.iter().map(|&(y, p)| p * (y as f64 * t).cos()).sum()
    }

    pub fn variance(&self) -> f64 {
        self.pmf.iter().map(|&(y, p)| p * (y as f64).powi(2)).sum()
    }

    pub fn max_jump(&self) -> i32 {
        self.pmf.iter().map(|&(y, _)| y.abs()).max().unwrap_or(0)
    }

    fn same_shape(&self, other: &AxisComponent) -> bool {
        self.weight == other.weight && self.pmf == other.pmf
    }
}

#[derive(Clone, Debug)]
enum Sampler {
    /// Uniform on `{+-e_i}`.
    Simple,
    Table { cdf: Vec<f64> },
}

/// A finitely supported, centered, irreducible step law on `Z^d`.
#[derive(Clone, Debug)]
pub struct StepLaw {
    name: String,
    dim: usize,
    support: Vec<(Point, f64)>,
    symmetric: bool,
    periodic: bool,
    cov: DMatrix<f64>,
    hold: f64,
    axes: Option<Vec<AxisComponent>>,
    sampler: Sampler,
}

impl StepLaw {
    /// Simple random walk: uniform on the `2d` unit vectors.
    pub fn simple(dim: usize) -> Result<StepLaw, LawError> {
        let mut entries = Vec::new();
        for axis in 0..dim.min(MAX_DIM) {
            for sign in [1, -1] {
                entries.push((Point::unit(axis, sign), 1.0 / (2 * dim) as f64));
            }
        }
        let mut law = Self::build(&format!("srw{dim}"), dim, entries, CLOSED_FORM_TOL)?;
        law.sampler = Sampler::Simple;
        Ok(law)
    }

    /// Lazy simple random walk holding with probability `hold`.
    pub fn lazy(dim: usize, hold: f64) -> Result<StepLaw, LawError> {
        let mut entries = vec![(Point::ORIGIN, hold)];
        for axis in 0..dim.min(MAX_DIM) {
            for sign in [1, -1] {
                entries.push((Point::unit(axis, sign), (1.0 - hold) / (2 * dim) as f64));
            }
        }
        Self::build(&format!("lazy{dim}:{hold}"), dim, entries, CLOSED_FORM_TOL)
    }

    /// An explicit law given as `(step, probability)` pairs.
    pub fn from_pmf(name: &str, dim: usize, entries: Vec<(Point, f64)>) -> Result<StepLaw, LawError> {
        Self::build(name, dim, entries, USER_TOL)
    }

    /// Parses `srw<d>` or `lazy<d>` (hold 1/2) or `lazy<d>:<hold>`.
    pub fn parse(spec: &str) -> Result<StepLaw, LawError> {
        let s = spec.trim();
        let bad = || LawError::UnknownSpec(spec.into());
        if let Some(d) = s.strip_prefix("srw") {
            return Self::simple(d.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("lazy") {
            let (d, h) = rest.split_once(':').unwrap_or((rest, "0.5"));
            return Self::lazy(d.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
        }
        Err(bad())
    }

    fn build(name: &str, dim: usize, entries: Vec<(Point, f64)>, tol: f64) -> Result<StepLaw, LawError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(LawError::BadDimension(dim));
        }
        let mut support: Vec<(Point, f64)> = Vec::new();
        for (x, p) in entries {
            if p < 0.0 || !p.is_finite() {
                return Err(LawError::NegativeMass { at: format!("{x:?}"), mass: p });
            }
            if x.0[dim..].iter().any(|&c| c != 0) {
                return Err(LawError::BadDimension(dim));
            }
            if p == 0.0 {
                continue;
            }
            match support.iter_mut().find(|(y, _)| *y == x) {
                Some(e) => e.1 += p,
                None => support.push((x, p)),
            }
        }
        support.sort_by(|a, b| a.0.cmp(&b.0));
        let sum: f64 = support.iter().map(|e| e.1).sum();
        if (sum - 1.0).abs() > tol {
            return Err(LawError::NotNormalized { sum });
        }
        let mean: Vec<f64> = (0..dim).map(|k| support.iter().map(|(x, p)| p * x.0[k] as f64).sum()).collect();
        if mean.iter().any(|m| m.abs() > tol) {
            return Err(LawError::NonZeroMean(mean));
        }
        let lookup = |x: &Point| support.iter().find(|(y, _)| y == x).map_or(0.0, |e| e.1);
        let symmetric = support.iter().all(|(x, p)| lookup(&-*x) == *p);
        let mut cov = DMatrix::zeros(dim, dim);
        for (x, p) in &support {
            for i in 0..dim {
                for j in 0..dim {
                    cov[(i, j)] += p * x.0[i] as f64 * x.0[j] as f64;
                }
            }
        }
        if cov.clone().cholesky().is_none() {
            return Err(LawError::DegenerateCovariance);
        }
        let vectors: Vec<Point> = support.iter().map(|e| e.0).collect();
        if lattice_index(&vectors, dim) != Some(1) {
            return Err(LawError::Reducible(dim));
        }
        let diffs: Vec<Point> = vectors.iter().map(|&x| x - vectors[0]).collect();
        let periodic = lattice_index(&diffs, dim) != Some(1);
        let hold = lookup(&Point::ORIGIN);
        let axes = axis_components(&support, dim, hold);
        let cdf = cumulative(support.iter().map(|e| e.1));
        Ok(StepLaw {
            name: name.into(),
            dim,
            support,
            symmetric,
            periodic,
            cov,
            hold,
            axes,
            sampler: Sampler::Table { cdf },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[(Point, f64)] {
        &self.support
    }

    pub fn prob(&self, x: &Point) -> f64 {
        self.support.iter().find(|(y, _)| y == x).map_or(0.0, |e| e.1)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// True when the walk can only return to its start at even times (or another
    /// non-trivial period).
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Probability of a zero step.
    pub fn hold(&self) -> f64 {
        self.hold
    }

    /// Largest coordinate of any step, in absolute value.
    pub fn max_jump(&self) -> i32 {
        self.support.iter().map(|(x, _)| x.max_abs()).max().unwrap_or(0)
    }

    /// Per-axis decomposition, present when every step lies on a coordinate axis.
    pub fn axis_components(&self) -> Option<&[AxisComponent]> {
        self.axes.as_deref()
    }

    /// True when all axes carry the same one-dimensional law, so the law is invariant
    /// under coordinate permutations as well as sign changes.
    pub fn axes_exchangeable(&self) -> bool {
        match &self.axes {
            Some(a) => self.symmetric && a.windows(2).all(|w| w[0].same_shape(&w[1])),
            None => false,
        }
    }

    /// `(Re, Im)` of `sum_x p(x) e^{i <x, t>}`.
    pub fn char_fn(&self, t: &[f64]) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (x, p) in &self.support {
            let phase: f64 = (0..self.dim).map(|k| x.0[k] as f64 * t[k]).sum();
            re += p * phase.cos();
            im += p * phase.sin();
        }
        (re, im)
    }

    /// A stable 64-bit identifier of the law's support and masses.
    pub fn fingerprint(&self) -> u64 {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for (x, p) in &self.support {
            for c in x.coords(self.dim) {
                h.update(c.to_le_bytes());
            }
            h.update(p.to_le_bytes());
        }
        u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match &self.sampler {
            Sampler::Simple => {
                let r = rng.gen_range(0..2 * self.dim as u32);
                Point::unit((r >> 1) as usize, if r & 1 == 0 { 1 } else { -1 })
            }
            Sampler::Table { cdf } => self.support[search_cdf(cdf, rng.gen::<f64>())].0,
        }
    }
}

fn axis_components(support: &[(Point, f64)], dim: usize, hold: f64) -> Option<Vec<AxisComponent>> {
    let mut comps: Vec<AxisComponent> =
        (0..dim).map(|axis| AxisComponent { axis, weight: 0.0, pmf: Vec::new() }).collect();
    for (x, p) in support {
        if x.is_origin() {
            continue;
        }
        let nonzero: Vec<usize> = (0..dim).filter(|&k| x.0[k] != 0).collect();
        if nonzero.len() != 1 {
            return None;
        }
        let c = &mut comps[nonzero[0]];
        c.weight += p;
        c.pmf.push((x.0[nonzero[0]], *p));
    }
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    if (total + hold - 1.0).abs() > 1e-12 {
        return None;
    }
    for c in &mut comps {
        let w = c.weight;
        c.pmf.iter_mut().for_each(|e| e.1 /= w);
        c.pmf.sort_by_key(|e| e.0);
    }
    Some(comps)
}

/// Index of the subgroup of `Z^dim` generated by `vectors`, or `None` if it has rank
/// below `dim`. Computed by integer row reduction.
pub fn lattice_index(vectors: &[Point], dim: usize) -> Option<i64> {
    let mut rows: Vec<Vec<i64>> = vectors
        .iter()
        .map(|v| v.coords(dim).iter().map(|&c| c as i64).collect())
        .filter(|r: &Vec<i64>| r.iter().any(|&c| c != 0))
        .collect();
    let mut index = 1i64;
    let mut top = 0;
    for col in 0..dim {
        loop {
            // Smallest non-zero entry in this column among the remaining rows.
            let pivot = (top..rows.len()).filter(|&r| rows[r][col] != 0).min_by_key(|&r| rows[r][col].abs());
            let Some(p) = pivot else { return None };
            rows.swap(top, p);
            let mut done = true;
            for r in top + 1..rows.len() {
                let q = rows[r][col] / rows[top][col];
                if q != 0 {
                    for k in 0..dim {
                        rows[r][k] -= q * rows[top][k];
                    }
                }
                if rows[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        index *= rows[top][col].abs();
        top += 1;
    }
    Some(index)
}
