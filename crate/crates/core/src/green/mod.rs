//! Lattice Green's functions `G^lambda(x) = sum_k lambda^k P(S_k = x)`.

mod cache;
mod heat;
mod series;
mod surrogate;

use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

pub use cache::{read_cache, write_cache, CacheHeader};
pub use heat::{HeatKernel, Symmetry};
pub use series::{green_series_box, green_series_many, green_series_oracle, SeriesValue};
pub use surrogate::GaussianSurrogate;

use crate::laws::{LawError, StepLaw};
use crate::point::Point;

/// Default coordinate bound of the heat-kernel tables.
pub const DEFAULT_YMAX: i32 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("Green's function diverges at lambda = 1 in dimension {dim}")]
    DivergentAtOrigin { dim: usize },
    #[error("lambda = {0} is outside the supported range")]
    InvalidLambda(f64),
    #[error("quadrature did not converge at resolution {resolution} (relative change {rel_diff:e})")]
    QuadratureNotConverged { resolution: u32, rel_diff: f64 },
    #[error("{leaked:e} of the mass left the convolution box")]
    BoxTooSmall { leaked: f64 },
    #[error("no cached value for {0} in a frozen table")]
    CacheMiss(String),
    #[error("coordinate {coord} exceeds the table bound {ymax}")]
    OutOfRange { coord: i32, ymax: i32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cache file: {0}")]
    Cache(String),
    #[error(transparent)]
    Law(#[from] LawError),
}

/// `G^lambda` for one step law and one `lambda`, evaluated on demand.
#[derive(Clone)]
pub struct GreenFunction {
    kernel: Arc<HeatKernel>,
    lambda: f64,
}

impl GreenFunction {
    pub fn new(law: &StepLaw, lambda: f64) -> Result<GreenFunction, GreenError> {
        Self::with_ymax(law, lambda, DEFAULT_YMAX)
    }

    pub fn with_ymax(law: &StepLaw, lambda: f64, ymax: i32) -> Result<GreenFunction, GreenError> {
        Self::check_lambda(law.dim(), lambda)?;
        Ok(GreenFunction { kernel: Arc::new(HeatKernel::new(law, ymax)?), lambda })
    }

    /// Shares an existing kernel across several values of `lambda`.
    pub fn from_kernel(kernel: Arc<HeatKernel>, lambda: f64) -> Result<GreenFunction, GreenError> {
        Self::check_lambda(kernel.dim(), lambda)?;
        Ok(GreenFunction { kernel, lambda })
    }

    fn check_lambda(dim: usize, lambda: f64) -> Result<(), GreenError> {
        if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
            return Err(GreenError::InvalidLambda(lambda));
        }
        if lambda == 1.0 && dim < 3 {
            return Err(GreenError::DivergentAtOrigin { dim });
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kernel(&self) -> &Arc<HeatKernel> {
        &self.kernel
    }

    pub fn value(&self, x: &Point) -> Result<f64, GreenError> {
        if self.lambda == 0.0 {
            return Ok(if x.is_origin() { 1.0 } else { 0.0 });
        }
        let kappa = (1.0 - self.lambda) / self.lambda;
        Ok(self.kernel.moment(x, kappa, 0)? / self.lambda)
    }
}

/// One-shot evaluation of `G^lambda(x)`. Builds the heat-kernel tables on every call;
/// use [`GreenTable`] or [`GreenFunction`] for repeated queries.
pub fn green_fourier(law: &StepLaw, x: &Point, lambda: f64) -> Result<f64, GreenError> {
    let ymax = x.max_abs().max(16);
    GreenFunction::with_ymax(law, lambda, ymax)?.value(x)
}

/// Memoized Green's function values keyed by symmetry-canonical points. After
/// [`freeze`](GreenTable::freeze) a miss is an error instead of a computation.
#[derive(Clone)]
pub struct GreenTable {
    func: GreenFunction,
    values: FxHashMap<Point, f64>,
    frozen: bool,
}

impl GreenTable {
    pub fn new(func: GreenFunction) -> GreenTable {
        GreenTable { func, values: FxHashMap::default(), frozen: false }
    }

    pub fn for_law(law: &StepLaw, lambda: f64) -> Result<GreenTable, GreenError> {
        Ok(Self::new(GreenFunction::new(law, lambda)?))
    }

    pub fn function(&self) -> &GreenFunction {
        &self.func
    }

    pub fn dim(&self) -> usize {
        self.func.kernel.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.func.lambda
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn thaw(&mut self) {
        self.frozen = false;
    }

    pub fn canonical(&self, x: &Point) -> Point {
        self.func.kernel.canonical(x)
    }

    pub fn get(&mut self, x: &Point) -> Result<f64, GreenError> {
        let key = self.canonical(x);
        if let Some(v) = self.values.get(&key) {
            return Ok(*v);
        }
        if self.frozen {
            return Err(GreenError::CacheMiss(format!("{key:?}")));
        }
        let v = self.func.value(&key)?;
        self.values.insert(key, v);
        Ok(v)
    }

    /// Read-only lookup; a miss is an error whether or not the table is frozen.
    pub fn lookup(&self, x: &Point) -> Result<f64, GreenError> {
        let key = self.canonical(x);
        self.values.get(&key).copied().ok_or_else(|| GreenError::CacheMiss(format!("{key:?}")))
    }

    /// Computes all missing values among `points` (in parallel when enabled).
    pub fn prefill<'a>(&mut self, points: impl IntoIterator<Item = &'a Point>) -> Result<(), GreenError> {
        let mut missing: Vec<Point> =
            points.into_iter().map(|p| self.canonical(p)).filter(|k| !self.values.contains_key(k)).collect();
        missing.sort_unstable();
        missing.dedup();
        if missing.is_empty() {
            return Ok(());
        }
        if self.frozen {
            return Err(GreenError::CacheMiss(format!("{:?}", missing[0])));
        }
        let func = &self.func;
        let computed: Vec<Result<f64, GreenError>> = crate::par::map(&missing, |k| func.value(k));
        for (k, v) in missing.into_iter().zip(computed) {
            self.values.insert(k, v?);
        }
        Ok(())
    }

    /// Prefills every difference `x - y` of points in `set`.
    pub fn prefill_differences(&mut self, set: &[Point]) -> Result<(), GreenError> {
        let mut keys: rustc_hash::FxHashSet<Point> = Default::default();
        for x in set {
            for y in set {
                keys.insert(self.canonical(&(*x - *y)));
            }
        }
        self.prefill(keys.iter())
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<(Point, f64)> {
        let mut v: Vec<(Point, f64)> = self.values.iter().map(|(k, v)| (*k, *v)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn insert_entries(&mut self, entries: impl IntoIterator<Item = (Point, f64)>) {
        for (k, v) in entries {
            self.values.insert(self.func.kernel.canonical(&k), v);
        }
    }

    pub fn header(&self) -> CacheHeader {
        CacheHeader {
            law_hash: self.func.kernel.fingerprint(),
            lambda: self.func.lambda,
            resolution: self.func.kernel.resolution(),
            dim: self.dim() as u32,
            entries: self.values.len() as u64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_zero_is_indicator() {
        let law = StepLaw::simple(3).unwrap();
        let g = GreenFunction::with_ymax(&law, 0.0, 4).unwrap();
        assert_eq!(g.value(&Point::ORIGIN).unwrap(), 1.0);
        assert_eq!(g.value(&Point::from_slice(&[1, 0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn low_dimension_diverges() {
        let law = StepLaw::simple(2).unwrap();
        assert!(matches!(GreenFunction::with_ymax(&law, 1.0, 4), Err(GreenError::DivergentAtOrigin { dim: 2 })));
        assert!(GreenFunction::with_ymax(&law, 0.9, 4).is_ok());
    }

    #[test]
    fn frozen_table_refuses_misses() {
        let law = StepLaw::simple(3).unwrap();
        let mut t = GreenTable::new(GreenFunction::with_ymax(&law, 1.0, 8).unwrap());
        let x = Point::from_slice(&[1, 2, 0]);
        let v = t.get(&x).unwrap();
        t.freeze();
        assert_eq!(t.get(&Point::from_slice(&[0, -2, 1])).unwrap(), v);
        assert!(matches!(t.get(&Point::from_slice(&[3, 0, 0])), Err(GreenError::CacheMiss(_))));
    }
}
