//! Truncated series `sum_{k<=N} lambda^k P(S_k = x)`, computed from exact step
//! probabilities. Used as an independent reference for the Fourier route.

use serde::Serialize;

use super::surrogate::GaussianSurrogate;
use super::GreenError;
use crate::laws::{AxisComponent, StepLaw};
use crate::point::Point;

/// Largest convolution box, in lattice sites.
const MAX_BOX_SITES: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub partial_sum: f64,
    /// Local-CLT estimate of the omitted terms `k > N`.
    pub tail_estimate: f64,
}

impl SeriesValue {
    pub fn total(&self) -> f64 {
        self.partial_sum + self.tail_estimate
    }
}

/// Truncated Green's series at one point. Axis-aligned laws use an exact per-axis
/// allocation formula; others fall back to convolution on a box.
pub fn green_series_oracle(law: &StepLaw, x: &Point, lambda: f64, n_terms: usize) -> Result<SeriesValue, GreenError> {
    Ok(green_series_many(law, &[*x], lambda, n_terms)?[0])
}

pub fn green_series_many(
    law: &StepLaw,
    xs: &[Point],
    lambda: f64,
    n_terms: usize,
) -> Result<Vec<SeriesValue>, GreenError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(GreenError::InvalidLambda(lambda));
    }
    let partial = match law.axis_components() {
        Some(comps) => axis_partial_sums(comps, law.hold(), xs, lambda, n_terms),
        None => {
            let radius = n_terms as i64 * law.max_jump() as i64;
            box_partial_sums(law, xs, lambda, n_terms, radius)?
        }
    };
    let sur = GaussianSurrogate::new(law);
    Ok(xs
        .iter()
        .zip(partial)
        .map(|(x, p)| SeriesValue { partial_sum: p, tail_estimate: lclt_tail(&sur, x, lambda, n_terms) })
        .collect())
}

/// Convolution on the box `[-radius, radius]^d`. Fails with `BoxTooSmall` if more than
/// `1e-12` of the mass leaves the box within `n_terms` steps.
pub fn green_series_box(
    law: &StepLaw,
    xs: &[Point],
    lambda: f64,
    n_terms: usize,
    radius: i64,
) -> Result<Vec<f64>, GreenError> {
    box_partial_sums(law, xs, lambda, n_terms, radius)
}

fn box_partial_sums(
    law: &StepLaw,
    xs: &[Point],
    lambda: f64,
    n_terms: usize,
    radius: i64,
) -> Result<Vec<f64>, GreenError> {
    let d = law.dim();
    let side = (2 * radius + 1) as usize;
    let sites = side.checked_pow(d as u32).filter(|&s| s <= MAX_BOX_SITES);
    let Some(sites) = sites else {
        return Err(GreenError::Unsupported(format!("convolution box {side}^{d} is too large")));
    };
    let index = |p: &Point| -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..d {
            let c = p.0[k] as i64 + radius;
            if c < 0 || c >= side as i64 {
                return None;
            }
            idx = idx * side + c as usize;
        }
        Some(idx)
    };
    let offsets: Vec<(isize, f64, Point)> = law
        .support()
        .iter()
        .map(|(s, p)| {
            let mut off = 0isize;
            for k in 0..d {
                off = off * side as isize + s.0[k] as isize;
            }
            (off, *p, *s)
        })
        .collect();
    let targets: Vec<Option<usize>> = xs.iter().map(index).collect();
    let mut cur = vec![0.0; sites];
    let mut next = vec![0.0; sites];
    cur[index(&Point::ORIGIN).expect("origin in box")] = 1.0;
    let mut sums = vec![0.0; xs.len()];
    let mut leaked = 0.0;
    let mut weight = 1.0;
    let coord = |mut idx: usize| -> Point {
        let mut p = Point::ORIGIN;
        for k in (0..d).rev() {
            p.0[k] = (idx % side) as i32 - radius as i32;
            idx /= side;
        }
        p
    };
    for step in 0..=n_terms {
        for (s, t) in sums.iter_mut().zip(&targets) {
            if let Some(i) = t {
                *s += weight * cur[*i];
            }
        }
        if step == n_terms {
            break;
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, &m) in cur.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let here = coord(i);
            for &(off, p, s) in &offsets {
                let to = here + s;
                if (0..d).all(|k| (to.0[k] as i64).abs() <= radius) {
                    next[(i as isize + off) as usize] += m * p;
                } else {
                    leaked += m * p;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        weight *= lambda;
    }
    if leaked > 1e-12 {
        return Err(GreenError::BoxTooSmall { leaked });
    }
    Ok(sums)
}

/// `P(S_k = x)` summed with weights `lambda^k` over `k <= n`, by splitting the `k`
/// steps among the axis components with multinomial weights.
fn axis_partial_sums(comps: &[AxisComponent], hold: f64, xs: &[Point], lambda: f64, n: usize) -> Vec<f64> {
    let ymax = xs.iter().map(|x| x.max_abs()).max().unwrap_or(0) as usize;
    let mut shapes: Vec<&AxisComponent> = Vec::new();
    for c in comps {
        if !shapes.iter().any(|s| s.pmf == c.pmf) {
            shapes.push(c);
        }
    }
    let powers: Vec<Vec<f64>> = shapes.iter().map(|c| convolution_powers(c, n, ymax)).collect();
    let shape_of = |c: &AxisComponent| shapes.iter().position(|s| s.pmf == c.pmf).unwrap();
    let ln_fact = ln_factorials(n);
    let stride = ymax + 1;

    xs.iter()
        .map(|x| {
            // r[m]: probability that m steps restricted to the components seen so far,
            // with renormalized weights, land on the target coordinates.
            let mut r: Vec<f64>;
            let mut w_seen;
            if hold > 0.0 {
                r = vec![1.0; n + 1];
                w_seen = hold;
            } else {
                r = vec![0.0; n + 1];
                w_seen = 0.0;
            }
            for c in comps {
                let pw = &powers[shape_of(c)];
                let y = x.0[c.axis].unsigned_abs() as usize;
                let col: Vec<f64> = (0..=n).map(|k| pw[k * stride + y]).collect();
                if w_seen == 0.0 {
                    r = col;
                    w_seen = c.weight;
                    continue;
                }
                let w_new = w_seen + c.weight;
                let p = w_seen / w_new;
                let mut out = vec![0.0; n + 1];
                let mut row = vec![0.0; n + 1];
                for (m, o) in out.iter_mut().enumerate() {
                    binomial_row(m, p, &ln_fact, &mut row[..=m]);
                    let mut acc = 0.0;
                    for l in 0..=m {
                        let v = col[m - l];
                        if v != 0.0 {
                            acc += row[l] * r[l] * v;
                        }
                    }
                    *o = acc;
                }
                r = out;
                w_seen = w_new;
            }
            let mut total = 0.0;
            let mut weight = 1.0;
            for v in r.iter() {
                total += weight * v;
                weight *= lambda;
            }
            total
        })
        .collect()
}

/// `nu^{*k}(y)` for `k <= n`, `0 <= y <= ymax`, flattened as `k * (ymax + 1) + y`.
fn convolution_powers(c: &AxisComponent, n: usize, ymax: usize) -> Vec<f64> {
    let r = c.max_jump() as usize;
    let half = n * r;
    let mut dist = vec![0.0; 2 * half + 1];
    let mut next = dist.clone();
    dist[half] = 1.0;
    let stride = ymax + 1;
    let mut out = vec![0.0; (n + 1) * stride];
    for k in 0..=n {
        for y in 0..=ymax.min(half) {
            out[k * stride + y] = dist[half + y];
        }
        if k == n {
            break;
        }
        let reach = k * r;
        next[half - reach - r..=half + reach + r].iter_mut().for_each(|v| *v = 0.0);
        for i in half - reach..=half + reach {
            let m = dist[i];
            if m == 0.0 {
                continue;
            }
            for &(y, p) in &c.pmf {
                next[(i as i64 + y as i64) as usize] += m * p;
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    out
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for k in 1..=n {
        v[k] = v[k - 1] + (k as f64).ln();
    }
    v
}

/// Binomial(m, p) probabilities into `row[0..=m]`, evaluated outward from the mode so
/// that nothing underflows prematurely.
fn binomial_row(m: usize, p: f64, ln_fact: &[f64], row: &mut [f64]) {
    let q = 1.0 - p;
    if q == 0.0 {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[m] = 1.0;
        return;
    }
    let mode = (((m + 1) as f64 * p).floor() as usize).min(m);
    let ln_mode = ln_fact[m] - ln_fact[mode] - ln_fact[m - mode] + mode as f64 * p.ln() + (m - mode) as f64 * q.ln();
    row[mode] = ln_mode.exp();
    let ratio = p / q;
    for l in mode..m {
        row[l + 1] = row[l] * (m - l) as f64 / (l + 1) as f64 * ratio;
    }
    for l in (0..mode).rev() {
        row[l] = row[l + 1] * (l + 1) as f64 / (m - l) as f64 / ratio;
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= total);
}

/// `sum_{k > n} lambda^k * lclt(k, x)`.
fn lclt_tail(sur: &GaussianSurrogate, x: &Point, lambda: f64, n: usize) -> f64 {
    let xf = x.to_f64(sur.dim());
    let d = sur.dim() as f64;
    let mut sum = 0.0;
    let mut weight = lambda.powi(n as i32 + 1);
    let limit = n + 1 + 4_000_000;
    let mut k = n + 1;
    while k < limit {
        let t = weight * sur.density(k as f64, &xf);
        sum += t;
        if lambda < 1.0 && t < 1e-20 * sum.max(1e-300) && k > 4 * n + 100 {
            return sum;
        }
        weight *= lambda;
        k += 1;
    }
    if lambda == 1.0 && d > 2.0 {
        let c = (2.0 * std::f64::consts::PI).powf(-d / 2.0) / sur.det().sqrt();
        sum += c * (k as f64 - 0.5).powf(1.0 - d / 2.0) / (d / 2.0 - 1.0);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_rows_normalize() {
        let lf = ln_factorials(4000);
        let mut row = vec![0.0; 4001];
        for &(m, p) in &[(0usize, 0.3), (7, 0.5), (3000, 5.0 / 6.0), (4000, 0.01)] {
            binomial_row(m, p, &lf, &mut row[..=m]);
            let s: f64 = row[..=m].iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "m={m} p={p} sum={s}");
        }
    }

    #[test]
    fn axis_and_box_agree() {
        let law = StepLaw::simple(3).unwrap();
        let xs = [Point::ORIGIN, Point::from_slice(&[1, 0, 0]), Point::from_slice(&[2, 1, -1])];
        let a = axis_partial_sums(law.axis_components().unwrap(), 0.0, &xs, 0.9, 24);
        let b = green_series_box(&law, &xs, 0.9, 24, 24).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14, "{u} {v}");
        }
        let lazy = StepLaw::lazy(2, 0.3).unwrap();
        let ys = [Point::ORIGIN, Point::from_slice(&[1, 1])];
        let a = axis_partial_sums(lazy.axis_components().unwrap(), lazy.hold(), &ys, 1.0, 20);
        let b = green_series_box(&lazy, &ys, 1.0, 20, 20).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14, "{u} {v}");
        }
    }

    #[test]
    fn small_box_reports_leak() {
        let law = StepLaw::simple(2).unwrap();
        let r = green_series_box(&law, &[Point::ORIGIN], 1.0, 10, 3);
        assert!(matches!(r, Err(GreenError::BoxTooSmall { .. })));
    }

    #[test]
    fn first_terms_by_hand() {
        // Two steps of the 3-d simple walk return with probability 1/6.
        let law = StepLaw::simple(3).unwrap();
        let v = green_series_oracle(&law, &Point::ORIGIN, 1.0, 2).unwrap();
        assert!((v.partial_sum - (1.0 + 1.0 / 6.0)).abs() < 1e-15);
        let v = green_series_oracle(&law, &Point::from_slice(&[1, 0, 0]), 0.5, 1).unwrap();
        assert!((v.partial_sum - 0.5 / 6.0).abs() < 1e-15);
    }
}
