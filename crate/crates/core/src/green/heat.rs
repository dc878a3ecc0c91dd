//! Continuous-time (Poissonized) transition kernel of an axis-aligned step law.
//!
//! With `p_a(x) = P(S_{N_a} = x)` for `N_a ~ Poisson(a)`,
//!
//! ```text
//! G^lambda(x) = (1/lambda) \int_0^inf e^{-a (1 - lambda)/lambda} p_a(x) da.
//! ```
//!
//! For an axis-aligned law `p_a` factorizes over coordinates into one-dimensional
//! Poissonized kernels, tabulated once by FFT on a geometric grid of times. Past
//! `a_fft` the local CLT takes over, and the remaining power-law tail is integrated
//! in closed form.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::surrogate::GaussianSurrogate;
use super::GreenError;
use crate::laws::{AxisComponent, StepLaw};
use crate::point::{Point, MAX_DIM};

const A_MIN: f64 = 1e-13;
const A_FAR: f64 = 1e14;

/// Key normalization allowed by the symmetries of the law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// Invariant under coordinate sign changes and permutations.
    Hyperoctahedral,
    /// Invariant under coordinate sign changes.
    Signs,
    /// Only `x -> -x`.
    Central,
}

impl Symmetry {
    pub fn canonical(self, x: &Point, dim: usize) -> Point {
        match self {
            Symmetry::Hyperoctahedral => {
                let mut p = x.0.map(i32::abs);
                p[..dim].sort_unstable_by(|a, b| b.cmp(a));
                Point(p)
            }
            Symmetry::Signs => Point(x.0.map(i32::abs)),
            Symmetry::Central => {
                let n = -*x;
                if n < *x {
                    n
                } else {
                    *x
                }
            }
        }
    }
}

pub struct HeatKernel {
    dim: usize,
    log_lo: f64,
    h: f64,
    resolution: u32,
    n_table: usize,
    n_total: usize,
    ymax: i32,
    stride: usize,
    /// Per distinct axis component, `tables[c][j * stride + y] = q_{a_j w_c}(y)`.
    tables: Vec<Vec<f64>>,
    axis_table: [usize; MAX_DIM],
    surrogate: GaussianSurrogate,
    symmetry: Symmetry,
    fingerprint: u64,
}

impl HeatKernel {
    /// Builds tables for `|x_i| <= ymax`, doubling the grid resolution from 8 nodes per
    /// unit of `log a` until the value at the origin is stable to `1e-10`.
    pub fn new(law: &StepLaw, ymax: i32) -> Result<HeatKernel, GreenError> {
        let mut resolution = 8;
        loop {
            let k = Self::with_resolution(law, ymax, resolution)?;
            let (fine, coarse) = k.self_check();
            let rel = (fine - coarse).abs() / fine.abs();
            if rel <= 1e-10 {
                return Ok(k);
            }
            if resolution >= 64 {
                return Err(GreenError::QuadratureNotConverged { resolution, rel_diff: rel });
            }
            resolution *= 2;
        }
    }

    /// Builds tables on a grid with `resolution` nodes per unit of `log a`.
    pub fn with_resolution(law: &StepLaw, ymax: i32, resolution: u32) -> Result<HeatKernel, GreenError> {
        if !law.is_symmetric() {
            return Err(GreenError::Unsupported(format!("{} is not symmetric", law.name())));
        }
        let comps = law
            .axis_components()
            .ok_or_else(|| GreenError::Unsupported(format!("{} is not axis-aligned", law.name())))?;
        let dim = law.dim();
        let ymax = ymax.max(1);
        let h = 1.0 / resolution as f64;
        let a_fft = 10f64.powf(20.0 / dim as f64).max(4.0 * (ymax as f64).powi(2)).min(1e8);
        let log_lo = A_MIN.ln();
        let n_table = ((a_fft.ln() - log_lo) / h).ceil() as usize + 1;
        let n_total = ((A_FAR.ln() - log_lo) / h).ceil() as usize + 1;
        let stride = ymax as usize + 1;

        let mut distinct: Vec<&AxisComponent> = Vec::new();
        let mut axis_table = [0; MAX_DIM];
        for c in comps {
            let idx = match distinct.iter().position(|d| d.weight == c.weight && d.pmf == c.pmf) {
                Some(i) => i,
                None => {
                    distinct.push(c);
                    distinct.len() - 1
                }
            };
            axis_table[c.axis] = idx;
        }
        let mut planner = FftPlanner::new();
        let tables = distinct
            .iter()
            .map(|c| {
                let mut t = vec![0.0; n_table * stride];
                for j in 0..n_table {
                    let a = (log_lo + j as f64 * h).exp();
                    let q = poissonized_1d(c, a * c.weight, ymax, &mut planner);
                    t[j * stride..(j + 1) * stride].copy_from_slice(&q);
                }
                t
            })
            .collect();
        let symmetry = if law.axes_exchangeable() { Symmetry::Hyperoctahedral } else { Symmetry::Signs };
        Ok(HeatKernel {
            dim,
            log_lo,
            h,
            resolution,
            n_table,
            n_total,
            ymax,
            stride,
            tables,
            axis_table,
            surrogate: GaussianSurrogate::new(law),
            symmetry,
            fingerprint: law.fingerprint(),
        })
    }

    fn self_check(&self) -> (f64, f64) {
        let (kappa, m) = if self.dim >= 3 { (0.0, 0) } else { (1e-2, 0) };
        let x = Point::ORIGIN;
        let fine = self.moment_stride(&x, kappa, m, 1).unwrap_or(f64::NAN);
        let coarse = self.moment_stride(&x, kappa, m, 2).unwrap_or(f64::NAN);
        (fine, coarse)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ymax(&self) -> i32 {
        self.ymax
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn surrogate(&self) -> &GaussianSurrogate {
        &self.surrogate
    }

    pub fn canonical(&self, x: &Point) -> Point {
        self.symmetry.canonical(x, self.dim)
    }

    /// `p_a(x)` at table node `j`.
    fn node_value(&self, j: usize, ax: &[usize]) -> f64 {
        let mut v = 1.0;
        for (i, &y) in ax.iter().enumerate() {
            v *= self.tables[self.axis_table[i]][j * self.stride + y];
        }
        v
    }

    /// `\int_0^inf a^m e^{-kappa a} p_a(x) da`.
    pub fn moment(&self, x: &Point, kappa: f64, m: u32) -> Result<f64, GreenError> {
        self.moment_stride(x, kappa, m, 1)
    }

    fn moment_stride(&self, x: &Point, kappa: f64, m: u32, step: usize) -> Result<f64, GreenError> {
        let d = self.dim;
        let s = d as f64 / 2.0 - m as f64 - 1.0;
        if kappa == 0.0 && s <= 0.0 {
            return Err(GreenError::DivergentAtOrigin { dim: d });
        }
        if kappa > 0.0 && kappa * A_FAR < 40.0 {
            return Err(GreenError::InvalidLambda(1.0 / (1.0 + kappa)));
        }
        let mut ax = [0usize; MAX_DIM];
        for i in 0..d {
            let c = x.0[i].abs();
            if c > self.ymax {
                return Err(GreenError::OutOfRange { coord: c, ymax: self.ymax });
            }
            ax[i] = c as usize;
        }
        let ax = &ax[..d];
        let xf = x.to_f64(d);
        let q = self.surrogate.j2(&xf) / 2.0;
        let norm = (2.0 * PI).powf(-(d as f64) / 2.0) / self.surrogate.det().sqrt();
        let h = self.h * step as f64;
        let last = (self.n_total - 1) / step * step;
        let mut sum = 0.0;
        let mut j = 0;
        while j <= last {
            let u = self.log_lo + j as f64 * self.h;
            let a = u.exp();
            let damp = (-kappa * a).exp();
            if damp == 0.0 {
                break;
            }
            let p = if j < self.n_table {
                self.node_value(j, ax)
            } else {
                norm * a.powf(-(d as f64) / 2.0) * (-q / a).exp()
            };
            let w = if j == 0 || j == last { 0.5 } else { 1.0 };
            sum += w * a.powi(m as i32 + 1) * damp * p;
            j += step;
        }
        sum *= h;
        if kappa == 0.0 {
            // \int_A^inf a^m norm a^{-d/2} (1 - q/a) da
            let a_end = (self.log_lo + last as f64 * self.h).exp();
            sum += norm * (a_end.powf(-s) / s - q * a_end.powf(-s - 1.0) / (s + 1.0));
        }
        Ok(sum)
    }
}

/// `q_b(y) = P(Y_{N_b} = y)` for `y = 0..=ymax`, where `Y` has steps drawn from the
/// component's one-dimensional law and `N_b ~ Poisson(b)`.
fn poissonized_1d(c: &AxisComponent, b: f64, ymax: i32, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let spread = 14.0 * (b * c.variance()).sqrt() + 12.0 * c.max_jump() as f64;
    let need = 2 * (ymax as usize + 1) + 2 * spread.ceil() as usize;
    let m = need.max(64).next_power_of_two();
    let mut buf: Vec<Complex64> = (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            Complex64::new((b * (c.char_fn(t) - 1.0)).exp(), 0.0)
        })
        .collect();
    planner.plan_fft_forward(m).process(&mut buf);
    (0..=ymax as usize).map(|y| (buf[y].re / m as f64).max(0.0)).collect()
}
