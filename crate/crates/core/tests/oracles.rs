//! Library results against independently computed reference values.

use lanepost::evaluation::{lane_iou, point_segment_distance, rasterize_polyline, EvalConfig};
use lanepost::extraction::LanePoint;
use lanepost::lane_model::{r_squared, LaneShape, Side};
use lanepost::regression::{build_spline, wls_fit, CubicSpline, LineModel};
use lanepost::tracker::{update_weights, zeta, LaneStats, TrackedLane, TrackerConfig};
use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(rng: &mut ChaCha8Rng, n: usize, equal_conf: bool) -> Vec<LanePoint<f64>> {
    (0..n)
        .map(|_| {
            let c = if equal_conf {
                0.7
            } else {
                rng.random_range(0.05..1.0)
            };
            LanePoint::new(
                rng.random_range(0.0..800.0),
                rng.random_range(0.0..288.0),
                c,
            )
        })
        .collect()
}

/// `(X^T C X)^-1 X^T C y` with X = [1 x].
fn normal_equations(p: &[LanePoint<f64>]) -> Vector2<f64> {
    let mut xtcx = Matrix2::zeros();
    let mut xtcy = Vector2::zeros();
    for q in p {
        let row = Vector2::new(1.0, q.x);
        xtcx += q.confidence * row * row.transpose();
        xtcy += q.confidence * q.y * row;
    }
    xtcx.lu().solve(&xtcy).expect("nonsingular")
}

fn ols(p: &[LanePoint<f64>]) -> (f64, f64) {
    let n = p.len() as f64;
    let mx = p.iter().map(|q| q.x).sum::<f64>() / n;
    let my = p.iter().map(|q| q.y).sum::<f64>() / n;
    let sxy: f64 = p.iter().map(|q| (q.x - mx) * (q.y - my)).sum();
    let sxx: f64 = p.iter().map(|q| (q.x - mx) * (q.x - mx)).sum();
    let b1 = sxy / sxx;
    (my - b1 * mx, b1)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn wls_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.random_range(3..=50);
        let p = random_points(&mut rng, n, false);
        let fit = wls_fit(&p).unwrap();
        let beta = normal_equations(&p);
        let err = (Vector2::new(fit.beta0, fit.beta1) - beta).norm() / beta.norm();
        assert!(err < 1e-9, "relative error {err}");
    }
}

#[test]
fn equal_confidences_give_ols() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let n = rng.random_range(3..=50);
        let p = random_points(&mut rng, n, true);
        let fit = wls_fit(&p).unwrap();
        let (b0, b1) = ols(&p);
        assert!(
            rel(fit.beta0, b0) < 1e-12 && rel(fit.beta1, b1) < 1e-12,
            "{fit:?} vs {b0} {b1}"
        );
    }
}

#[test]
fn confidence_pulls_the_line() {
    let a = [(0.0, 0.0, 1.0), (1.0, 0.0, 1.0), (2.0, 3.0, 1.0)]
        .map(|(x, y, c)| LanePoint::new(x, y, c));
    let b = [(0.0, 0.0, 1.0), (1.0, 0.0, 1.0), (2.0, 3.0, 0.01)]
        .map(|(x, y, c)| LanePoint::new(x, y, c));
    for p in [&a[..], &b[..]] {
        let f = wls_fit(p).unwrap();
        let o = normal_equations(p);
        assert!((f.beta0 - o[0]).abs() < 1e-12 && (f.beta1 - o[1]).abs() < 1e-12);
    }
    let sse_first_two = |p: &[LanePoint<f64>]| {
        let f = wls_fit(p).unwrap();
        p[..2]
            .iter()
            .map(|q| (q.y - f.beta0 - f.beta1 * q.x).powi(2))
            .sum::<f64>()
    };
    assert!(sse_first_two(&b) < sse_first_two(&a));
}

fn pearson_sq(p: &[LanePoint<f64>]) -> f64 {
    let n = p.len() as f64;
    let mx = p.iter().map(|q| q.x).sum::<f64>() / n;
    let my = p.iter().map(|q| q.y).sum::<f64>() / n;
    let cov: f64 = p.iter().map(|q| (q.x - mx) * (q.y - my)).sum::<f64>() / n;
    let vx: f64 = p.iter().map(|q| (q.x - mx).powi(2)).sum::<f64>() / n;
    let vy: f64 = p.iter().map(|q| (q.y - my).powi(2)).sum::<f64>() / n;
    let r = cov / (vx.sqrt() * vy.sqrt());
    r * r
}

#[test]
fn r_squared_matches_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let n = rng.random_range(3..=50);
        let p = random_points(&mut rng, n, false);
        let (a, b) = (r_squared(&p), pearson_sq(&p));
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    let p: Vec<_> = [(0.0, 1.0), (1.0, 2.0), (2.0, 2.0), (3.0, 4.0)]
        .iter()
        .map(|&(x, y)| LanePoint::new(x, y, 1.0))
        .collect();
    assert!((r_squared(&p) - pearson_sq(&p)).abs() < 1e-15);
}

#[test]
fn r_squared_lattice_lines_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let (x0, y0) = (
            rng.random_range(0..800) as f64,
            rng.random_range(0..288) as f64,
        );
        let (dx, dy) = (
            rng.random_range(-9..=9) as f64,
            rng.random_range(1..=20) as f64,
        );
        let n = rng.random_range(2..=30);
        let p: Vec<_> = (0..n)
            .map(|k| LanePoint::new(x0 + dx * k as f64, y0 - dy * k as f64, 0.9))
            .collect();
        assert_eq!(r_squared(&p), 1.0);
    }
    let zero =
        [(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0), (0.0, -1.0)].map(|(x, y)| LanePoint::new(x, y, 1.0));
    assert_eq!(r_squared(&zero), 0.0);
}

fn line(beta0: f64, beta1: f64) -> LaneShape<f64> {
    LaneShape::Straight(LineModel::Sloped { beta0, beta1 })
}

/// Composite Simpson on `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn zeta_matches_quadrature() {
    let quad = |b1: f64, a1: f64, b2: f64, a2: f64, h: usize| {
        let hf = h as f64;
        (simpson(|y| ((y - b1) / a1 - (y - b2) / a2).powi(2), 0.0, hf, 2000) / hf).sqrt()
    };
    assert!(
        (zeta(&line(0.0, 1.0), &line(0.0, 2.0), 100) - quad(0.0, 1.0, 0.0, 2.0, 100)).abs() < 1e-6
    );
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let sign = |r: &mut ChaCha8Rng| if r.random::<bool>() { 1.0 } else { -1.0 };
        let a1 = sign(&mut rng) * rng.random_range(0.2..5.0);
        let a2 = sign(&mut rng) * rng.random_range(0.2..5.0);
        let (b1, b2) = (
            rng.random_range(-1500.0..1500.0),
            rng.random_range(-1500.0..1500.0),
        );
        let h = rng.random_range(50..600);
        let z = zeta(&line(b1, a1), &line(b2, a2), h);
        let q = quad(b1, a1, b2, a2, h);
        assert!((z - q).abs() < 1e-6, "{z} vs {q}");
    }
    assert_eq!(zeta(&line(-30.0, 1.7), &line(-30.0, 1.7), 288), 0.0);
    for h in [1, 77, 288] {
        assert_eq!(zeta(&line(0.0, 1.0), &line(10.0, 1.0), h), 10.0);
    }
}

fn tracked(weight: f64) -> TrackedLane<f64> {
    TrackedLane {
        lane_id: 0,
        params: line(0.0, 1.0),
        match_shape: line(0.0, 1.0),
        weight,
        miss_count: 0,
        curve_history: Vec::new(),
        last_stats: LaneStats {
            rms_confidence: 1.0,
            point_count: 10,
        },
        side: Side::Left,
        active_hint: true,
        channel_id: 0,
    }
}

/// Sum over detections of `psi c N e^{-d}`, `d` counting missed frames
/// after that detection up to `now`.
fn direct_weight(detected: &[bool], now: usize, term: f64) -> f64 {
    (0..=now)
        .filter(|&f| detected[f])
        .map(|f| {
            let d = (f + 1..=now).filter(|&g| !detected[g]).count();
            term * (-(d as f64)).exp()
        })
        .sum()
}

#[test]
fn weights_match_direct_sum() {
    let cfg = TrackerConfig::default();
    let pattern = [true, false, true];
    let mut lanes = vec![tracked(0.0)];
    for (f, &hit) in pattern.iter().enumerate() {
        lanes[0].miss_count = if hit { 0 } else { lanes[0].miss_count + 1 };
        update_weights(&mut lanes, &cfg);
        let want = direct_weight(&pattern, f, 10.0);
        assert!((lanes[0].weight - want).abs() < 1e-12, "frame {f}");
    }
    assert!((lanes[0].weight - (10.0 * (-1.0f64).exp() + 10.0)).abs() < 1e-12);

    let mut lanes = vec![tracked(0.0)];
    update_weights(&mut lanes, &cfg);
    assert_eq!(lanes[0].weight, 10.0);
    for _ in 0..2 {
        lanes[0].miss_count += 1;
        update_weights(&mut lanes, &cfg);
    }
    assert!((lanes[0].weight - 10.0 * (-2.0f64).exp()).abs() < 1e-12);
}

/// Every pixel of the canvas tested against every segment.
fn brute_mask(poly: &[(f64, f64)], width: f64, w: usize, h: usize) -> Vec<bool> {
    let mut m = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = (x as f64, y as f64);
            m[y * w + x] = poly.windows(2).any(|s| {
                let (a, b) = (s[0], s[1]);
                let (vx, vy) = (b.0 - a.0, b.1 - a.1);
                let len2 = vx * vx + vy * vy;
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
                };
                let (cx, cy) = (a.0 + t * vx, a.1 + t * vy);
                ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt() <= width / 2.0
            });
        }
    }
    m
}

fn brute_iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[test]
fn iou_matches_mask_counting() {
    let (w, h) = (200, 120);
    let cfg = EvalConfig {
        eval_width: 200.0,
        ..EvalConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..50 {
        let poly = |r: &mut ChaCha8Rng| -> Vec<(f64, f64)> {
            let n = r.random_range(2..6);
            let x0 = r.random_range(20.0..180.0);
            (0..n)
                .map(|i| {
                    (
                        x0 + r.random_range(-25.0..25.0),
                        (h - 1) as f64 * (1.0 - i as f64 / (n - 1) as f64),
                    )
                })
                .collect()
        };
        let (p, g) = (poly(&mut rng), poly(&mut rng));
        let got = lane_iou(&p, &g, &cfg, w, h).unwrap();
        let want = brute_iou(&brute_mask(&p, 16.0, w, h), &brute_mask(&g, 30.0, w, h));
        assert!((got - want).abs() < 0.02, "{got} vs {want}");
    }
}

#[test]
fn raster_fixed_cases() {
    let seg = [(5.5, 2.0), (5.5, 12.0)];
    let m = rasterize_polyline(&seg, 2.0, 12, 16).unwrap();
    let oracle = brute_mask(&seg, 2.0, 12, 16);
    assert_eq!(m.bits(), &oracle[..]);
    assert_eq!(m.count(), 22);
    assert!((point_segment_distance((0.0, 0.0), (3.0, 4.0), (3.0, 4.0)) - 5.0).abs() < 1e-12);

    let cfg = EvalConfig::default();
    let lane = vec![(300.0, 287.0), (380.0, 0.0)];
    assert_eq!(
        lane_iou(
            &lane,
            &lane,
            &EvalConfig {
                gt_line_width: 16.0,
                ..cfg.clone()
            },
            800,
            288
        )
        .unwrap(),
        1.0
    );
    let far = vec![(600.0, 287.0), (680.0, 0.0)];
    assert_eq!(lane_iou(&lane, &far, &cfg, 800, 288).unwrap(), 0.0);
    let same = lane_iou(&lane, &lane, &cfg, 800, 288).unwrap();
    let want = brute_iou(
        &brute_mask(&lane, 16.0, 800, 288),
        &brute_mask(&lane, 30.0, 800, 288),
    );
    assert!((same - want).abs() < 1e-12);
    assert!((same - 16.0 / 30.0).abs() < 0.02);
    let double: Vec<_> = lane.iter().map(|&(x, y)| (2.0 * x, 2.0 * y)).collect();
    let scaled = lane_iou(&double, &double, &cfg, 1600, 576).unwrap();
    assert!((scaled - same).abs() < 0.02);
}

/// `x(y) = k0 + k1 y + k2 y^2` from two values and one derivative.
fn quadratic_from(v0: (f64, f64), slope_at_v0: f64, v1: (f64, f64)) -> impl Fn(f64) -> f64 {
    let (x0, y0) = v0;
    let (x1, y1) = v1;
    let m = nalgebra::Matrix3::new(1.0, y0, y0 * y0, 0.0, 1.0, 2.0 * y0, 1.0, y1, y1 * y1);
    let k = m
        .lu()
        .solve(&nalgebra::Vector3::new(x0, slope_at_v0, x1))
        .unwrap();
    move |y| k[0] + k[1] * y + k[2] * y * y
}

#[test]
fn quadratic_spline_oracles() {
    let knots = [(0.0, 200.0), (10.0, 150.0), (40.0, 100.0)];
    let pts: Vec<_> = knots
        .iter()
        .map(|&(x, y)| LanePoint::new(x, y, 1.0))
        .collect();
    let s = build_spline(&pts).unwrap();
    for &(x, y) in &knots {
        assert_eq!(s.eval(y), x);
    }
    // the first piece starts on its own secant, so it is that line
    let secant: f64 = (10.0 - 0.0) / (150.0 - 200.0);
    for y in [190.0f64, 175.0, 160.0] {
        assert!((s.eval(y) - secant * (y - 200.0)).abs() < 1e-12);
    }
    let second = quadratic_from((10.0, 150.0), secant, (40.0, 100.0));
    for y in [140.0, 125.0, 110.0] {
        assert!((s.eval(y) - second(y)).abs() < 1e-9, "{y}");
    }
    assert!((s.eval(125.0) - 20.0).abs() < 1e-12);

    let line: Vec<_> = (0..12)
        .map(|i| LanePoint::new(100.0 + 3.0 * i as f64, 280.0 - 20.0 * i as f64, 0.8))
        .collect();
    let s = build_spline(&line).unwrap();
    for y in 0..288 {
        let want = 100.0 + 3.0 * (280.0 - y as f64) / 20.0;
        assert!((s.eval(y as f64) - want).abs() < 1e-9);
    }
}

#[test]
fn cubic_spline_is_natural_and_interpolating() {
    let pts: Vec<LanePoint<f64>> = [(10.0, 280.0), (30.0, 200.0), (20.0, 120.0), (60.0, 40.0)]
        .iter()
        .map(|&(x, y)| LanePoint::new(x, y, 1.0))
        .collect();
    let s = CubicSpline::new(&pts).unwrap();
    for p in &pts {
        assert!((s.eval(p.y) - p.x).abs() < 1e-12);
    }
    let d2 = |y: f64| (s.eval(y + 1e-3) - 2.0 * s.eval(y) + s.eval(y - 1e-3)) / 1e-6;
    assert!(d2(40.0 + 2e-3).abs() < 1e-3);
    assert!(d2(280.0 - 2e-3).abs() < 1e-3);
}
