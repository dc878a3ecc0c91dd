//! Browser bindings: a sampled range, the Green's function profile and a capacity curve.

use brwcap::capacity::{capacity_exact, capacity_mc_sampled};
use brwcap::green::{GaussianSurrogate, GreenFunction, GreenTable};
use brwcap::seeds::stream_rng;
use brwcap::trees::{embed, sample_gw_conditioned};
use brwcap::{OffspringLaw, Point, StepLaw};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js<T: Serialize>(r: Result<T, String>) -> Result<JsValue, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_wasm_bindgen::to_value(&v).map_err(|e| JsError::new(&e.to_string()))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Debug, Serialize)]
pub struct Sample {
    pub dim: usize,
    pub nodes: usize,
    pub range_size: usize,
    /// Projection of every node onto the first two coordinates, interleaved.
    pub xy: Vec<i32>,
    /// Parent index of every node, -1 at the root.
    pub parent: Vec<i64>,
}

/// Samples a tree with `n` nodes under `mu` and embeds it with `theta`.
pub fn sample(mu: &str, theta: &str, n: usize, seed: u64) -> Result<Sample, String> {
    let mu = OffspringLaw::parse(mu).map_err(err)?;
    let theta = StepLaw::parse(theta).map_err(err)?;
    let mut rng = stream_rng(seed, "web/sample", n as u64, 0);
    let tree = sample_gw_conditioned(&mu, n, &mut rng).map_err(err)?;
    let s = embed(tree, &theta, &mut rng);
    let xy = s.positions.iter().flat_map(|p| [p.0[0], if theta.dim() > 1 { p.0[1] } else { 0 }]).collect();
    let parent = (0..s.tree.len()).map(|i| s.tree.parent(i).map_or(-1, |p| p as i64)).collect();
    Ok(Sample { dim: theta.dim(), nodes: s.tree.len(), range_size: s.range().len(), xy, parent })
}

#[wasm_bindgen]
pub fn sample_brw(mu: &str, theta: &str, n: usize, seed: u64) -> Result<JsValue, JsError> {
    js(sample(mu, theta, n, seed))
}

#[derive(Debug, Serialize)]
pub struct ProfileRow {
    pub r: i32,
    pub green: f64,
    pub asymptotic: f64,
}

/// `G(r e_1)` for `r = 1..=rmax` next to the Gaussian asymptotic.
pub fn profile(law: &str, rmax: i32) -> Result<Vec<ProfileRow>, String> {
    let law = StepLaw::parse(law).map_err(err)?;
    let g = GreenFunction::with_ymax(&law, 1.0, (2 * rmax).max(32)).map_err(err)?;
    let sur = GaussianSurrogate::new(&law);
    let mut rows = Vec::new();
    for r in 1..=rmax {
        let x = Point::unit(0, r);
        rows.push(ProfileRow { r, green: g.value(&x).map_err(err)?, asymptotic: sur.green_asymptotic(&x.to_f64(law.dim())) });
    }
    Ok(rows)
}

#[wasm_bindgen]
pub fn green_profile(law: &str, rmax: i32) -> Result<JsValue, JsError> {
    js(profile(law, rmax))
}

#[derive(Debug, Serialize)]
pub struct CurveRow {
    pub n: usize,
    pub mean_cap_over_n: f64,
    pub std_error: f64,
    pub mean_range_size: f64,
}

/// `cap(R_n) / n` averaged over `replicas` conditioned trees for each `n`. Small ranges are
/// solved exactly, larger ones by escape walks.
pub fn curve(mu: &str, theta: &str, ns: &[u32], replicas: usize, seed: u64) -> Result<Vec<CurveRow>, String> {
    if replicas < 2 {
        return Err("at least 2 replicas are needed for a standard error".into());
    }
    let mu = OffspringLaw::parse(mu).map_err(err)?;
    let theta = StepLaw::parse(theta).map_err(err)?;
    let mut table = GreenTable::new(GreenFunction::with_ymax(&theta, 1.0, 48).map_err(err)?);
    let mut rows = Vec::new();
    for &n in ns {
        let n = n as usize;
        let mut vals = Vec::with_capacity(replicas);
        let mut sizes = 0.0;
        for r in 0..replicas {
            let mut rng = stream_rng(seed, "web/curve", n as u64, r as u64);
            let tree = sample_gw_conditioned(&mu, n, &mut rng).map_err(err)?;
            let set = embed(tree, &theta, &mut rng).range();
            sizes += set.len() as f64;
            let cap = if set.len() <= 300 {
                capacity_exact(&set, &mut table).map_err(err)?.value
            } else {
                capacity_mc_sampled(&set, &theta, &mut rng, 2000, 1e-2).map_err(err)?.value
            };
            vals.push(cap / n as f64);
        }
        let m = vals.iter().sum::<f64>() / replicas as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (replicas - 1) as f64;
        rows.push(CurveRow { n, mean_cap_over_n: m, std_error: (var / replicas as f64).sqrt(), mean_range_size: sizes / replicas as f64 });
    }
    Ok(rows)
}

#[wasm_bindgen]
pub fn capacity_curve(mu: &str, theta: &str, ns: Vec<u32>, replicas: usize, seed: u64) -> Result<JsValue, JsError> {
    js(curve(mu, theta, &ns, replicas, seed))
}
