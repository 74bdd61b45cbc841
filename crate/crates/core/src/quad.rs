//! One-dimensional quadrature helpers shared by the measure primitives and
//! the grid kernels.

const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// Composite 8-point Gauss-Legendre rule on `[a, b]` with `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a || panels == 0 {
        return 0.0;
    }
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for &(node, weight) in &GL8 {
            acc += weight * (f(mid - half * node) + f(mid + half * node));
        }
        total += acc * half;
    }
    total
}

/// Integrates a nonnegative, eventually decaying integrand over `[a, ∞)`.
///
/// Panels of width `scale / 4` are added until a panel contributes less than
/// `1e-14` of the largest panel seen, with a hard cap at `a + 50 * scale`.
pub fn integrate_decaying<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64) -> f64 {
    let width = 0.25 * scale;
    let cap = a + 50.0 * scale;
    let mut total = 0.0;
    let mut peak: f64 = 0.0;
    let mut left = a;
    let mut quiet = 0;
    while left < cap {
        let right = (left + width).min(cap);
        let part = gauss_legendre(&f, left, right, 1);
        total += part;
        peak = peak.max(part.abs());
        if part.abs() <= 1e-14 * peak {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        left = right;
    }
    total
}

/// Trapezoid rule over equally spaced samples.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (samples[1..n - 1].iter().sum::<f64>() + 0.5 * (samples[0] + samples[n - 1])),
    }
}

/// Composite Simpson rule over equally spaced samples; an odd interval count
/// closes with the 3/8 rule on the last three intervals.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (samples[0] + samples[1]),
        2 => h / 3.0 * (samples[0] + 4.0 * samples[1] + samples[2]),
        3 => three_eighths(&samples[0..4], h),
        _ if n.is_multiple_of(2) => simpson_even(samples, h),
        _ => simpson_even(&samples[..n - 2], h) + three_eighths(&samples[n - 3..], h),
    }
}

fn simpson_even(samples: &[f64], h: f64) -> f64 {
    let n = samples.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &v) in samples.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (samples[0] + samples[n] + 4.0 * odd + 2.0 * even)
}

fn three_eighths(s: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3])
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Unrolled dot product; the lane split keeps the result independent of
/// thread scheduling while letting the compiler vectorise.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [0.0_f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            lanes[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((lanes[0] + lanes[4]) + (lanes[1] + lanes[5])) + ((lanes[2] + lanes[6]) + (lanes[3] + lanes[7])) + tail
}
