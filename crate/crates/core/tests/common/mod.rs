//! Shared oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use brwcap::green::{GaussianSurrogate, GreenError, GreenTable};
use brwcap::{OffspringLaw, Point, StepLaw};
use rand_chacha::ChaCha8Rng;

/// `sum_{k > h} (k - h) p_k(z)`: the expected Green's mass `sum_{n > h} E G(z + S_n)`
/// of the generations beyond `h`, from the Gaussian density with a midpoint
/// correction for the sum over `k`.
pub fn generation_tail(law: &StepLaw, z: &Point, h: u64) -> f64 {
    let sur = GaussianSurrogate::new(law);
    let q = sur.j2(&z.to_f64(law.dim()));
    let c = (2.0 * PI).powi(-3) / sur.det().sqrt();
    let a = h as f64 + 0.5;
    let b = q / (2.0 * a);
    let g1 = 1.0 - (-b).exp();
    let g2 = 1.0 - (-b).exp() * (1.0 + b);
    c * (2.0 / q * g1 - 4.0 * a / (q * q) * g2 + 2.0 / (q * q) * g2)
}

fn green_at(table: &mut GreenTable, sur: &GaussianSurrogate, x: &Point, dim: usize) -> f64 {
    match table.get(x) {
        Ok(v) => v,
        Err(GreenError::OutOfRange { .. }) => sur.green_asymptotic(&x.to_f64(dim)),
        Err(e) => panic!("{e}"),
    }
}

/// Monte Carlo of `E[sum_u G(z + X_u)]` over unconditioned branching random walks
/// truncated after generation `h`, plus the analytic tail of later generations.
/// Returns `(mean, standard error)` for every `z`; the same trees serve all `z`.
pub fn brw_f_oracle(
    mu: &OffspringLaw,
    theta: &StepLaw,
    table: &mut GreenTable,
    zs: &[Point],
    h: u64,
    trees: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let d = theta.dim();
    let sur = GaussianSurrogate::new(theta);
    let mut sum = vec![0.0; zs.len()];
    let mut sq = vec![0.0; zs.len()];
    let mut gen = Vec::new();
    let mut next = Vec::new();
    for _ in 0..trees {
        let mut acc = vec![0.0; zs.len()];
        gen.clear();
        gen.push(Point::ORIGIN);
        let mut level = 0;
        loop {
            for p in &gen {
                for (a, z) in acc.iter_mut().zip(zs) {
                    *a += green_at(table, &sur, &(*z + *p), d);
                }
            }
            if level == h || gen.is_empty() {
                break;
            }
            next.clear();
            for p in &gen {
                for _ in 0..mu.sample(rng) {
                    next.push(*p + theta.sample(rng));
                }
            }
            std::mem::swap(&mut gen, &mut next);
            level += 1;
        }
        for i in 0..zs.len() {
            sum[i] += acc[i];
            sq[i] += acc[i] * acc[i];
        }
    }
    let m = trees as f64;
    zs.iter()
        .enumerate()
        .map(|(i, z)| {
            let mean = sum[i] / m;
            let var = (sq[i] / m - mean * mean) * m / (m - 1.0);
            (mean + generation_tail(theta, z, h), (var / m).sqrt())
        })
        .collect()
}
