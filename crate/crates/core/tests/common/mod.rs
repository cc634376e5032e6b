//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numerics.

#![allow(dead_code)]

/// First derivative of a Gaussian, `-2 tau f0^2 exp(-(tau f0)^2)`,
/// `tau = t - t0`.
pub fn wavelet(t: f64, f0: f64, t0: f64) -> f64 {
    let tau = t - t0;
    -2.0 * tau * f0 * f0 * (-(tau * f0).powi(2)).exp()
}

/// Composite Simpson rule over `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Free-space 2D response at distance `r` to a point source emitting
/// [`wavelet`], up to a constant factor:
/// `p(t) = int_{r/c}^{t} s(t - tau) / sqrt(tau^2 - (r/c)^2) dtau`.
///
/// With `tau = r/c + v^2` the integrand becomes the smooth
/// `2 s(t - r/c - v^2) / sqrt(2 r/c + v^2)`, and only `v` where the wavelet
/// is not negligible contribute.
pub fn green_2d(r: f64, c: f64, t: f64, f0: f64, t0: f64) -> f64 {
    let a = r / c;
    let support = 6.0 / f0;
    let hi = t - a - (t0 - support);
    if hi <= 0.0 {
        return 0.0;
    }
    let lo = (t - a - (t0 + support)).max(0.0);
    let f = |v: f64| 2.0 * wavelet(t - a - v * v, f0, t0) / (2.0 * a + v * v).sqrt();
    simpson(f, lo.sqrt(), hi.sqrt(), 2000)
}

/// Sub-sample index of the first sample with `|trace| >= frac * max|trace|`,
/// linearly interpolated from the previous sample.
pub fn first_arrival(trace: &[f64], frac: f64) -> f64 {
    let peak = trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let th = frac * peak;
    let i = trace
        .iter()
        .position(|v| v.abs() >= th)
        .expect("non-zero trace");
    if i == 0 {
        return 0.0;
    }
    let (a, b) = (trace[i - 1].abs(), trace[i].abs());
    (i - 1) as f64 + (th - a) / (b - a)
}

/// Pixel counts `(tp, tn, fp, fn)` by direct enumeration.
pub fn brute_counts(pred: &[u8], target: &[u8]) -> (u64, u64, u64, u64) {
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for i in 0..pred.len() {
        match (pred[i], target[i]) {
            (1, 1) => tp += 1,
            (0, 0) => tn += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            other => panic!("non-binary pixel {other:?}"),
        }
    }
    (tp, tn, fp, fn_)
}

/// `[accuracy, precision, sensitivity, specificity, iou_foreground]`,
/// `None` where the denominator is zero (foreground IoU of two empty masks
/// is 1).
pub fn brute_metrics(pred: &[u8], target: &[u8]) -> [Option<f64>; 5] {
    let (tp, tn, fp, fn_) = brute_counts(pred, target);
    let frac = |n: u64, d: u64| {
        if d == 0 {
            None
        } else {
            Some(n as f64 / d as f64)
        }
    };
    let union = tp + fp + fn_;
    [
        frac(tp + tn, tp + tn + fp + fn_),
        frac(tp, tp + fp),
        frac(tp, tp + fn_),
        frac(tn, tn + fp),
        if union == 0 {
            Some(1.0)
        } else {
            frac(tp, union)
        },
    ]
}

/// A 64x64, 160-step configuration that keeps end-to-end runs fast.
pub const SMALL_CONFIG: &str = r#"
[grid]
n_steps = 160

[source]
position = { row = 4, col = 32 }
delay = 30

[receivers]
record_start = 60
positions = [
  { row = 4, col = 2 }, { row = 4, col = 8 }, { row = 4, col = 14 }, { row = 4, col = 20 },
  { row = 4, col = 26 }, { row = 4, col = 32 }, { row = 4, col = 38 }, { row = 4, col = 44 },
  { row = 4, col = 50 }, { row = 4, col = 56 }, { row = 4, col = 62 },
]

[scene]
width = 64
height = 64
max_objects = 3
min_size = 3
max_size = 6
center_rows = [20, 60]
center_cols = [2, 61]
top_row = 18

[output]
workers = 2
samples_per_shard = 4
"#;

/// Regular files of `dir` with their contents, sorted by name.
pub fn dir_contents(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
