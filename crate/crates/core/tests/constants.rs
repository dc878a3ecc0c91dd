mod common;

use std::f64::consts::PI;

use brwcap::constants::*;
use brwcap::green::{GreenFunction, GreenTable};
use brwcap::seeds::stream_rng;
use brwcap::{OffspringLaw, Point, StepLaw};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn srw6() -> StepLaw {
    StepLaw::simple(6).unwrap()
}

#[test]
fn lattice_f_approaches_the_simple_walk_profile() {
    let lf = LatticeF::new(&srw6(), &srw6(), 48).unwrap();
    let c = 9.0 / PI.powi(3);
    let mut last = f64::INFINITY;
    for r in [5, 10, 20, 40] {
        let z = Point::unit(0, r);
        let gap = (lf.value(&z).unwrap() * (r * r) as f64 / c - 1.0).abs();
        assert!(gap < last);
        last = gap;
    }
    assert!(last < 0.005);
}

#[test]
fn lattice_f_is_homogeneous() {
    let lf = LatticeF::new(&srw6(), &srw6(), 48).unwrap();
    for z in [[10, 0, 0, 0, 0, 0], [6, 6, 5, 0, 0, 0], [4, 4, 4, 4, 4, 0]] {
        let p = Point::from_slice(&z);
        let f = lf.value(&p).unwrap();
        for l in [2, 3] {
            let q = Point::from_slice(&z.map(|c| c * l));
            let ratio = lf.value(&q).unwrap() * (l * l) as f64 / f;
            assert!((ratio - 1.0).abs() < 0.02, "{z:?} x{l}: {ratio}");
        }
    }
}

#[test]
fn lattice_f_matches_branching_walk() {
    let eta = srw6();
    let lf = LatticeF::new(&eta, &eta, 32).unwrap();
    let mut table = GreenTable::new(GreenFunction::with_ymax(&eta, 1.0, 96).unwrap());
    let zs = [Point::unit(0, 5), Point::from_slice(&[4, 3, 0, 0, 0, 0])];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mc = common::brw_f_oracle(&OffspringLaw::geometric(), &eta, &mut table, &zs, 200, 20_000, &mut rng);
    for (z, (m, se)) in zs.iter().zip(mc) {
        let f = lf.value(z).unwrap();
        assert!((f - m).abs() < 3.0 * se, "z={z:?} lattice={f} brw={m}+-{se}");
    }
}

#[test]
fn generation_tail_matches_direct_sum() {
    // Compare the closed form against a direct sum of Gaussian densities.
    let eta = srw6();
    let z = Point::unit(0, 7);
    let h = 300;
    let sur = brwcap::green::GaussianSurrogate::new(&eta);
    let x = z.to_f64(6);
    let direct: f64 = (h + 1..2_000_000u64).map(|k| (k - h) as f64 * sur.density(k as f64, &x)).sum();
    let closed = common::generation_tail(&eta, &z, h);
    assert!((closed / direct - 1.0).abs() < 1e-3, "{closed} vs {direct}");
}

#[test]
fn brownian_referee_for_the_radial_integrand() {
    let eta = srw6();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = |x: &[f64]| 1.0 / x.iter().map(|v| v * v).sum::<f64>();
    let bi = brownian_integral(&f, eta.covariance(), &mut rng, 20_000, 5, 1e-3).unwrap();
    let oracle = isotropic_bm_oracle(6, 1.0 / 6.0);
    assert!((bi.value - oracle).abs() < 3.0 * bi.std_error, "{bi:?} vs {oracle}");
    // The other candidate for this expectation, 1/2, is many standard errors away.
    assert!((bi.value - 0.5).abs() > 30.0 * bi.std_error);
}

#[test]
fn brownian_standard_error_scales() {
    let eta = srw6();
    let f = |x: &[f64]| 1.0 / x.iter().map(|v| v * v).sum::<f64>();
    let a = brownian_integral(&f, eta.covariance(), &mut ChaCha8Rng::seed_from_u64(5), 4000, 4, 1e-2).unwrap();
    let b = brownian_integral(&f, eta.covariance(), &mut ChaCha8Rng::seed_from_u64(6), 16_000, 4, 1e-2).unwrap();
    let r = a.std_error / b.std_error;
    assert!((r / 2.0 - 1.0).abs() < 0.2, "ratio {r}");
}

#[test]
fn anisotropic_constant_pipeline() {
    let eta = StepLaw::lazy(6, 0.5).unwrap();
    let theta = srw6();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let r = c_g(&OffspringLaw::binary(), &eta, &theta, ConstantMethod::MonteCarlo, &mut rng, 4000).unwrap();
    assert!(r.value > 0.0 && r.c_f > 0.0 && r.prefactor > 0.0);
    assert!((r.value - r.variance_factor * r.prefactor * r.c_f).abs() < 1e-12 * r.value);
    assert_eq!(r.variance_factor, 1.0);
    // Both covariances are scalar, so the closed form applies and must agree.
    let closed = c_g(&OffspringLaw::binary(), &eta, &theta, ConstantMethod::ClosedForm, &mut rng, 0).unwrap();
    assert!((r.value - closed.value).abs() < 3.0 * r.std_error, "{} vs {}", r.value, closed.value);
}

#[test]
fn birkhoff_averages_move_toward_the_limit() {
    let eta = srw6();
    let f = |p: &Point| if p.is_origin() { 0.0 } else { 1.0 / p.norm2() as f64 };
    let limit = isotropic_bm_oracle(6, 1.0 / 6.0);
    let grid = [1 << 6, 1 << 12, 1 << 18];
    let rows = birkhoff_check(&f, &eta, &grid, limit, 0.2, 200, &|r| stream_rng(9, "birkhoff", 0, r as u64));
    // The spread across replicas shrinks like 1 / sqrt(log n) and the mean sits at the limit.
    assert!(rows.windows(2).all(|w| w[1].std_error < w[0].std_error), "{rows:?}");
    assert!(rows[2].tail_frequency < rows[0].tail_frequency, "{rows:?}");
    assert!((rows[2].mean - limit).abs() < 3.0 * rows[2].std_error, "{rows:?}");
    let zero = birkhoff_check(&|_| 0.0, &eta, &grid, limit, 0.2, 4, &|r| stream_rng(9, "zero", 0, r as u64));
    assert!(zero.iter().all(|r| r.mean == 0.0));
}
