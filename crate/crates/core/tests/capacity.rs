use std::sync::Arc;

use brwcap::capacity::*;
use brwcap::green::{GreenFunction, GreenTable, HeatKernel};
use brwcap::seeds::stream_rng;
use brwcap::trees::{embed_and_range, sample_gw_conditioned, RangeSet};
use brwcap::{OffspringLaw, Point, StepLaw};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table(law: &StepLaw, ymax: i32) -> GreenTable {
    GreenTable::new(GreenFunction::with_ymax(law, 1.0, ymax).unwrap())
}

fn brw_range(d: usize, n: usize, seed: u64) -> RangeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = sample_gw_conditioned(&OffspringLaw::geometric(), n, &mut rng).unwrap();
    embed_and_range(t, &StepLaw::simple(d).unwrap(), &mut rng).1
}

#[test]
fn exact_and_escape_estimates_agree() {
    let eta = StepLaw::simple(6).unwrap();
    let mut t = table(&eta, 32);
    for seed in 0..3 {
        let a = brw_range(6, 60, seed);
        let exact = capacity_exact(&a, &mut t).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mc = capacity_mc(&a, &eta, &mut rng, 2000, 1e-3).unwrap();
        assert!((mc.value - exact).abs() < 3.5 * mc.std_error + 1e-3 * exact, "{exact} vs {mc:?}");
        let s = capacity_mc_sampled(&a, &eta, &mut rng, 100_000, 1e-3).unwrap();
        assert!((s.value - exact).abs() < 3.5 * s.std_error + 1e-3 * exact, "{exact} vs {s:?}");
    }
}

#[test]
fn capacity_is_monotone_and_bounded_by_size() {
    let eta = StepLaw::simple(6).unwrap();
    let mut t = table(&eta, 32);
    let a = brw_range(6, 120, 9);
    let pts = a.points();
    let mut last = 0.0;
    for k in [1, 10, 40, pts.len()] {
        let sub = RangeSet::from_points(6, pts[..k].iter().copied());
        let c = capacity_exact(&sub, &mut t).unwrap().value;
        assert!(c >= last - 1e-12 && c <= k as f64);
        last = c;
    }
}

#[test]
fn capacity_is_subadditive() {
    let eta = StepLaw::simple(7).unwrap();
    let mut t = table(&eta, 40);
    let a = brw_range(7, 80, 1);
    let b = brw_range(7, 80, 2).translate(Point::unit(0, 6));
    let union = RangeSet::from_points(7, a.points().iter().chain(b.points()).copied());
    let ca = capacity_exact(&a, &mut t).unwrap().value;
    let cb = capacity_exact(&b, &mut t).unwrap().value;
    let cu = capacity_exact(&union, &mut t).unwrap().value;
    assert!(cu <= ca + cb + 1e-9);
    assert!(cu >= ca.max(cb) - 1e-9);
}

#[test]
fn killed_triple_on_spine_forest() {
    let eta = StepLaw::simple(6).unwrap();
    let src = ForestWindows { mu: OffspringLaw::geometric(), theta: eta.clone(), ceiling: 1 << 24 };
    let mut t = GreenTable::new(GreenFunction::with_ymax(&eta, 1.0 - 1.0 / 32.0, 64).unwrap());
    let r = killed_triple_estimator(&src, &eta, &mut t, 32, 3000, 32, &|i| stream_rng(1, "kt", 32, i as u64)).unwrap();
    assert!((r.triple.mean - 1.0).abs() < 3.0 * r.triple.std_error, "{r:?}");
    assert!(r.mean_i > 0.0 && r.mean_i < 1.0);
}

#[test]
fn killed_triple_on_two_sided_walk() {
    // The degenerate offspring law leaves only the spine, whose positions form a
    // two-sided random walk.
    let eta = StepLaw::simple(3).unwrap();
    let src = WalkWindows { theta: eta.clone() };
    let mut t = GreenTable::new(GreenFunction::with_ymax(&eta, 1.0 - 1.0 / 16.0, 64).unwrap());
    let r = killed_triple_estimator(&src, &eta, &mut t, 16, 4000, 32, &|i| stream_rng(2, "kt-walk", 16, i as u64)).unwrap();
    assert!((r.triple.mean - 1.0).abs() < 3.0 * r.triple.std_error, "{r:?}");
}

#[test]
fn radius_overflow_is_reported() {
    let eta = StepLaw::simple(3).unwrap();
    let a = brw_range(3, 200, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(capacity_mc(&a, &eta, &mut rng, 10, 1e-12), Err(CapacityError::RadiusOverflow { .. })));
}

#[test]
fn size_ceiling_is_reported() {
    let pts = (0..(EXACT_SIZE_CEILING as i32 + 1)).map(|i| Point::from_slice(&[i, 0, 0, 0, 0, 0]));
    let a = RangeSet::from_points(6, pts);
    let mut t = table(&StepLaw::simple(6).unwrap(), 8);
    assert!(matches!(capacity_exact(&a, &mut t), Err(CapacityError::SizeCeiling { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lower_bound_never_exceeds_exact(n in 2usize..120, seed in any::<u64>(), k in 1u32..20) {
        let eta = StepLaw::simple(6).unwrap();
        let kernel = Arc::new(HeatKernel::new(&eta, 48).unwrap());
        let mut t = GreenTable::new(GreenFunction::from_kernel(kernel, 1.0).unwrap());
        let a = brw_range(6, n, seed);
        let exact = capacity_exact(&a, &mut t).unwrap();
        prop_assert!(exact.charges.iter().all(|&e| e >= 0.0));
        prop_assert!(capacity_lower_bound(&a, &mut t, k).unwrap() <= exact.value * (1.0 + 1e-12));
        // The equilibrium measure solves the defining system.
        let pts = a.points();
        for (i, x) in pts.iter().enumerate().take(5) {
            let s: f64 = pts.iter().zip(&exact.charges).map(|(y, e)| t.lookup(&(*x - *y)).unwrap() * e).sum();
            prop_assert!((s - 1.0).abs() < 1e-9, "row {} gives {}", i, s);
        }
    }
}
