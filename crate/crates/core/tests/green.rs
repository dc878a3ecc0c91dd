use brwcap::green::{
    green_fourier, green_series_many, green_series_oracle, read_cache, write_cache, GaussianSurrogate,
    GreenFunction, GreenTable,
};
use brwcap::{Point, StepLaw};

fn p(c: &[i32]) -> Point {
    Point::from_slice(c)
}

/// Watson's integral: the expected number of visits to the origin of the 3-d simple walk.
const WATSON_G0: f64 = 1.516_386_059_151_978;

#[test]
fn simple_walk_3d_origin_matches_watson() {
    let law = StepLaw::simple(3).unwrap();
    let g = green_fourier(&law, &Point::ORIGIN, 1.0).unwrap();
    assert!((g - WATSON_G0).abs() < 1e-8, "{g}");
}

#[test]
fn simple_walk_3d_series_extrapolation() {
    // The truncated series misses c / sqrt(N); two truncations cancel that term.
    let law = StepLaw::simple(3).unwrap();
    let x = Point::ORIGIN;
    let s1 = green_series_oracle(&law, &x, 1.0, 1000).unwrap().partial_sum;
    let s4 = green_series_oracle(&law, &x, 1.0, 4000).unwrap().partial_sum;
    let extrapolated = 2.0 * s4 - s1;
    assert!((extrapolated - WATSON_G0).abs() < 1e-4, "{extrapolated}");
    let g = green_fourier(&law, &x, 1.0).unwrap();
    assert!((g - extrapolated).abs() < 1e-4);
}

#[test]
fn fourier_matches_series_in_six_dimensions() {
    let law = StepLaw::simple(6).unwrap();
    let g = GreenFunction::with_ymax(&law, 1.0, 16).unwrap();
    let xs = [p(&[0; 6]), p(&[1, 0, 0, 0, 0, 0]), p(&[1, 1, 0, 0, 0, 0]), p(&[2, 1, 0, 1, 0, 0]), p(&[3, 0, 0, 0, 0, 0])];
    let series = green_series_many(&law, &xs, 1.0, 2000).unwrap();
    for (x, s) in xs.iter().zip(series) {
        let f = g.value(x).unwrap();
        let tol = 1e-6f64.max(3.0 * s.tail_estimate);
        assert!((f - s.total()).abs() < tol, "x={x:?} fourier={f} series={s:?}");
    }
}

#[test]
fn killed_green_matches_series() {
    let law = StepLaw::simple(6).unwrap();
    let lambda = 1.0 - 1.0 / 64.0;
    let g = GreenFunction::with_ymax(&law, lambda, 8).unwrap();
    let xs = [p(&[0; 6]), p(&[1, 0, 0, 0, 0, 0]), p(&[2, 2, 0, 0, 0, 1])];
    let series = green_series_many(&law, &xs, lambda, 3000).unwrap();
    for (x, s) in xs.iter().zip(series) {
        let f = g.value(x).unwrap();
        assert!((f - s.partial_sum).abs() < 1e-10, "x={x:?} {f} {}", s.partial_sum);
    }
}

#[test]
fn lazy_walk_matches_series() {
    let law = StepLaw::lazy(3, 0.5).unwrap();
    let lambda = 0.99;
    let g = GreenFunction::with_ymax(&law, lambda, 8).unwrap();
    for x in [p(&[0, 0, 0]), p(&[1, 2, 0])] {
        let s = green_series_oracle(&law, &x, lambda, 4000).unwrap();
        let f = g.value(&x).unwrap();
        assert!((f - s.partial_sum).abs() < 1e-10, "{f} {}", s.partial_sum);
    }
}

#[test]
fn six_dimensional_asymptotics() {
    let law = StepLaw::simple(6).unwrap();
    let g = GreenFunction::with_ymax(&law, 1.0, 64).unwrap();
    let sur = GaussianSurrogate::new(&law);
    for x in [p(&[20, 0, 0, 0, 0, 0]), p(&[15, 15, 5, 0, 0, 0]), p(&[40, 20, 0, 0, 0, 3]), p(&[60, 0, 0, 0, 0, 0])] {
        let v = g.value(&x).unwrap();
        let a = sur.green_asymptotic(&x.to_f64(6));
        assert!((v / a - 1.0).abs() < 0.02, "x={x:?} ratio={}", v / a);
    }
}

#[test]
fn symmetric_and_positive() {
    let law = StepLaw::simple(4).unwrap();
    let g = GreenFunction::with_ymax(&law, 1.0, 8).unwrap();
    let x = p(&[3, -1, 2, 0]);
    let v = g.value(&x).unwrap();
    assert!(v > 0.0);
    assert_eq!(v, g.value(&-x).unwrap());
    assert!(g.value(&Point::ORIGIN).unwrap() > v);
}

#[test]
fn cache_round_trip() {
    let law = StepLaw::simple(3).unwrap();
    let func = GreenFunction::with_ymax(&law, 1.0, 8).unwrap();
    let mut t = GreenTable::new(func.clone());
    for x in [p(&[0, 0, 0]), p(&[1, 0, 0]), p(&[2, -1, 3])] {
        t.get(&x).unwrap();
    }
    let dir = std::env::temp_dir().join(format!("brwcap-cache-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g.bin");
    write_cache(&path, &t).unwrap();
    let back = read_cache(&path, func).unwrap();
    assert_eq!(back.entries(), t.entries());
    let other = GreenFunction::with_ymax(&law, 0.5, 8).unwrap();
    assert!(read_cache(&path, other).is_err());
    std::fs::remove_dir_all(&dir).ok();
}
