//! Capacity of finite sets: exact equilibrium solves, escape-walk Monte Carlo, the
//! second-moment lower bound, and the killed-walk identity estimator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;
use thiserror::Error;

use crate::forest::{ForestError, SpineForest};
use crate::green::{GaussianSurrogate, GreenError, GreenTable};
use crate::laws::{OffspringLaw, StepLaw};
use crate::point::Point;
use crate::seeds::fork;
use crate::stats::Summary;
use crate::trees::RangeSet;

/// Largest set handled by the dense exact solver.
pub const EXACT_SIZE_CEILING: usize = 5000;
/// Largest escape radius accepted by the Monte Carlo estimators.
pub const MAX_RADIUS: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("the set is empty")]
    Empty,
    #[error("Green's matrix is not positive definite")]
    SingularSystem,
    #[error("equilibrium charge {min:e} is negative")]
    NegativeCharge { min: f64 },
    #[error("set of {size} points exceeds the exact-solve ceiling {max}")]
    SizeCeiling { size: usize, max: usize },
    #[error("escape radius {radius} is too large")]
    RadiusOverflow { radius: f64 },
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: String,
    pub params: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct ExactCapacity {
    pub value: f64,
    /// Equilibrium charges, in the order of `RangeSet::points`.
    pub charges: Vec<f64>,
}

/// Solves `sum_y G(x - y) e(y) = 1` on `set` by Cholesky factorization and returns
/// `cap = sum e`.
pub fn capacity_exact(set: &RangeSet, table: &mut GreenTable) -> Result<ExactCapacity, CapacityError> {
    let pts = set.points();
    let n = pts.len();
    if n == 0 {
        return Err(CapacityError::Empty);
    }
    if n > EXACT_SIZE_CEILING {
        return Err(CapacityError::SizeCeiling { size: n, max: EXACT_SIZE_CEILING });
    }
    table.prefill_differences(pts)?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let g = table.lookup(&(pts[i] - pts[j]))?;
            m[(i, j)] = g;
            m[(j, i)] = g;
        }
    }
    let chol = m.cholesky().ok_or(CapacityError::SingularSystem)?;
    let e = chol.solve(&DVector::from_element(n, 1.0));
    let charges: Vec<f64> = e.iter().copied().collect();
    let max = charges.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min = charges.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min < -1e-9 * max.max(1e-300) {
        return Err(CapacityError::NegativeCharge { min });
    }
    Ok(ExactCapacity { value: charges.iter().sum(), charges })
}

/// `sum_{x, y in A} G(x - y)`.
pub fn green_pair_sum(set: &RangeSet, table: &mut GreenTable) -> Result<f64, CapacityError> {
    let pts = set.points();
    table.prefill_differences(pts)?;
    let mut s = 0.0;
    for x in pts {
        for y in pts {
            s += table.lookup(&(*x - *y))?;
        }
    }
    Ok(s)
}

/// `#A / (k + 1) - sum_{x,y} G(x - y) / (k (k + 1))`, a lower bound on `cap(A)` for
/// every `k >= 1`.
pub fn capacity_lower_bound(set: &RangeSet, table: &mut GreenTable, k: u32) -> Result<f64, CapacityError> {
    assert!(k >= 1);
    let s = green_pair_sum(set, table)?;
    let k = k as f64;
    Ok(set.len() as f64 / (k + 1.0) - s / (k * (k + 1.0)))
}

/// Escape geometry: walks are stopped once they are `radius` away from `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EscapeBall {
    pub center: Point,
    /// Largest distance from `center` to a point of the set.
    pub set_radius: f64,
    pub radius: f64,
}

/// Chooses the stopping radius so that a walk at distance `radius` from the centre
/// returns to the set with probability at most `#A * sup G_asym <= eps`.
pub fn escape_ball(set: &RangeSet, eta: &StepLaw, eps: f64) -> Result<EscapeBall, CapacityError> {
    let bbox = set.bounding_box().ok_or(CapacityError::Empty)?;
    let d = eta.dim();
    let mut center = Point::ORIGIN;
    for k in 0..d {
        center.0[k] = ((bbox.lo.0[k] as i64 + bbox.hi.0[k] as i64) / 2) as i32;
    }
    let set_radius = set.points().iter().map(|p| (*p - center).norm()).fold(0.0, f64::max);
    let sur = GaussianSurrogate::new(eta);
    let c = sur.green_constant();
    let gap = sur.max_eigenvalue().sqrt() * (c * set.len() as f64 / eps).powf(1.0 / (d as f64 - 2.0));
    let radius = set_radius + gap;
    if !radius.is_finite() || radius > MAX_RADIUS {
        return Err(CapacityError::RadiusOverflow { radius });
    }
    Ok(EscapeBall { center, set_radius, radius })
}

/// Runs one walk from `start` until it hits `set` (false) or leaves the ball (true).
#[inline]
pub fn escapes<R: Rng + ?Sized>(start: Point, set: &RangeSet, eta: &StepLaw, ball: &EscapeBall, rng: &mut R) -> bool {
    let r2 = (ball.radius * ball.radius).ceil() as i64;
    let mut pos = start;
    loop {
        pos = pos + eta.sample(rng);
        if set.contains(&pos) {
            return false;
        }
        if (pos - ball.center).norm2() >= r2 {
            return true;
        }
    }
}

/// `sum_x P_x(tau+_A = inf)` with `walkers` escape walks from every point of `A`.
pub fn capacity_mc(
    set: &RangeSet,
    eta: &StepLaw,
    rng: &mut ChaCha8Rng,
    walkers: usize,
    eps: f64,
) -> Result<CapacityEstimate, CapacityError> {
    let ball = escape_ball(set, eta, eps)?;
    let seeds: Vec<ChaCha8Rng> = set.points().iter().map(|_| fork(rng)).collect();
    let pts = set.points();
    let idx: Vec<usize> = (0..pts.len()).collect();
    let counts = crate::par::map(&idx, |&i| {
        let mut r = seeds[i].clone();
        (0..walkers).filter(|_| escapes(pts[i], set, eta, &ball, &mut r)).count()
    });
    let m = walkers as f64;
    let mut value = 0.0;
    let mut var = 0.0;
    for c in counts {
        let p = c as f64 / m;
        value += p;
        var += if walkers > 1 { p * (1.0 - p) / (m - 1.0) } else { 0.0 };
    }
    Ok(CapacityEstimate {
        value,
        std_error: var.sqrt(),
        method: "mc".into(),
        params: serde_json::json!({
            "walkers_per_point": walkers, "eps": eps, "radius": ball.radius, "set_size": set.len()
        }),
    })
}

/// `#A * mean escape indicator` over `walks` walks from uniformly chosen points of `A`.
pub fn capacity_mc_sampled(
    set: &RangeSet,
    eta: &StepLaw,
    rng: &mut ChaCha8Rng,
    walks: usize,
    eps: f64,
) -> Result<CapacityEstimate, CapacityError> {
    const CHUNK: usize = 1024;
    let ball = escape_ball(set, eta, eps)?;
    let pts = set.points();
    let chunks = walks.div_ceil(CHUNK);
    let seeds: Vec<ChaCha8Rng> = (0..chunks).map(|_| fork(rng)).collect();
    let idx: Vec<usize> = (0..chunks).collect();
    let counts = crate::par::map(&idx, |&c| {
        let mut r = seeds[c].clone();
        let todo = CHUNK.min(walks - c * CHUNK);
        (0..todo).filter(|_| escapes(pts[r.gen_range(0..pts.len())], set, eta, &ball, &mut r)).count()
    });
    let hits: usize = counts.iter().sum();
    let p = hits as f64 / walks as f64;
    let n = set.len() as f64;
    let se = if walks > 1 { n * (p * (1.0 - p) / (walks as f64 - 1.0)).sqrt() } else { 0.0 };
    Ok(CapacityEstimate {
        value: n * p,
        std_error: se,
        method: "mc-sampled".into(),
        params: serde_json::json!({ "walks": walks, "eps": eps, "radius": ball.radius, "set_size": set.len() }),
    })
}

/// A stationary sequence `(X_i)_{i in Z}` with `X_0 = 0` from which finite windows
/// can be drawn.
pub trait WindowSource: Sync {
    /// `X_{-left}, ..., X_right`.
    fn window(&self, left: usize, right: usize, rng: ChaCha8Rng) -> Result<Vec<Point>, CapacityError>;
    fn dim(&self) -> usize;
}

/// Depth-first positions of the spine forest.
pub struct ForestWindows {
    pub mu: OffspringLaw,
    pub theta: StepLaw,
    pub ceiling: usize,
}

impl WindowSource for ForestWindows {
    fn window(&self, left: usize, right: usize, rng: ChaCha8Rng) -> Result<Vec<Point>, CapacityError> {
        let f = SpineForest::sample_window(&self.mu, &self.theta, left, right, rng, self.ceiling)?;
        Ok(f.window_positions(left, right)?)
    }

    fn dim(&self) -> usize {
        self.theta.dim()
    }
}

/// A two-sided random walk through the origin.
pub struct WalkWindows {
    pub theta: StepLaw,
}

impl WindowSource for WalkWindows {
    fn window(&self, left: usize, right: usize, mut rng: ChaCha8Rng) -> Result<Vec<Point>, CapacityError> {
        let mut back = vec![Point::ORIGIN; left + 1];
        for i in 1..=left {
            back[i] = back[i - 1] - self.theta.sample(&mut rng);
        }
        back.reverse();
        let mut pos = Point::ORIGIN;
        for _ in 0..right {
            pos = pos + self.theta.sample(&mut rng);
            back.push(pos);
        }
        Ok(back)
    }

    fn dim(&self) -> usize {
        self.theta.dim()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KilledTripleResult {
    pub n: usize,
    /// Mean and standard error of `E * G * I` over replicas.
    pub triple: Summary,
    pub mean_e: f64,
    pub mean_g: f64,
    pub mean_i: f64,
}

/// Replica-level quantities of the killed-walk identity.
#[derive(Clone, Copy, Debug)]
struct Triple {
    e: f64,
    g: f64,
    i: f64,
}

/// Estimates `E[E_n G_n I_n]`, which equals 1 for a stationary source.
///
/// Per replica, with independent `xi^l, xi^r ~ Geom(1/n)` on `{0, 1, ...}` and
/// `A = {X_{-xi^l}, ..., X_{xi^r}}`:
/// `I = 1{X_0 not in {X_1, ..., X_{xi^r}}}`,
/// `G = sum_{i=-xi^l}^{xi^r} G^{1-1/n}(X_i)` and
/// `E = P_{X_0}(tau+_A > xi)` for an independent `xi ~ Geom(1/n)`, itself estimated
/// with `walkers` killed walks. `rng_for(r)` supplies the generator of replica `r`.
pub fn killed_triple_estimator(
    source: &dyn WindowSource,
    eta: &StepLaw,
    table: &mut GreenTable,
    n: usize,
    replicas: usize,
    walkers: usize,
    rng_for: &(dyn Fn(usize) -> ChaCha8Rng + Sync),
) -> Result<KilledTripleResult, CapacityError> {
    const CHUNK: usize = 256;
    assert!(n >= 2, "n must be at least 2");
    let p = 1.0 / n as f64;
    let geom = Geometric::new(p).expect("valid parameter");
    let mut triples: Vec<Triple> = Vec::with_capacity(replicas);
    let mut start = 0;
    while start < replicas {
        let end = (start + CHUNK).min(replicas);
        let idx: Vec<usize> = (start..end).collect();
        let windows = crate::par::map(&idx, |&r| -> Result<_, CapacityError> {
            let mut rng = rng_for(r);
            let left = geom.sample(&mut rng) as usize;
            let right = geom.sample(&mut rng) as usize;
            let pts = source.window(left, right, fork(&mut rng))?;
            Ok((left, right, pts, rng))
        });
        let windows: Vec<_> = windows.into_iter().collect::<Result<_, _>>()?;
        table.prefill(windows.iter().flat_map(|w| w.2.iter()))?;
        let view = &*table;
        let chunk = crate::par::map(&windows, |(left, right, pts, rng)| -> Result<Triple, CapacityError> {
            let mut rng = rng.clone();
            let x0 = pts[*left];
            let avoided = !pts[left + 1..=left + right].contains(&x0);
            let mut g = 0.0;
            for x in pts {
                g += view.lookup(&(*x - x0))?;
            }
            let mut e = 0.0;
            if avoided {
                let set = RangeSet::from_points(source.dim(), pts.iter().copied());
                let mut alive = 0usize;
                for _ in 0..walkers {
                    let steps = geom.sample(&mut rng);
                    let mut pos = x0;
                    let mut hit = false;
                    for _ in 0..steps {
                        pos = pos + eta.sample(&mut rng);
                        if set.contains(&pos) {
                            hit = true;
                            break;
                        }
                    }
                    if !hit {
                        alive += 1;
                    }
                }
                e = alive as f64 / walkers as f64;
            }
            Ok(Triple { e, g, i: if avoided { 1.0 } else { 0.0 } })
        });
        for t in chunk {
            triples.push(t?);
        }
        start = end;
    }
    let values: Vec<f64> = triples.iter().map(|t| t.e * t.g * t.i).collect();
    let m = replicas as f64;
    Ok(KilledTripleResult {
        n,
        triple: Summary::of(&values),
        mean_e: triples.iter().map(|t| t.e).sum::<f64>() / m,
        mean_g: triples.iter().map(|t| t.g).sum::<f64>() / m,
        mean_i: triples.iter().map(|t| t.i).sum::<f64>() / m,
    })
}
