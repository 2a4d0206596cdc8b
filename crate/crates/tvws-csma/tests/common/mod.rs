//! Shared oracle helpers for integration tests. Everything here is
//! deliberately written from scratch (quadrature, bisection, direct
//! sampling of the detection statistic) so the tests exercise the library
//! against genuinely independent computations.
//!
//! Each integration test target compiles its own copy of this module and
//! uses a different subset of it.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Standard normal density.
pub fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson_step(f, a, fa, m, fm);
    let (rm, frm, right) = simpson_step(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, fa, lm, flm, m, fm, left, 0.5 * eps, depth - 1)
            + adaptive(f, m, fm, rm, frm, b, fb, right, 0.5 * eps, depth - 1)
    }
}

/// Adaptive-Simpson integral of `f` over `[a, b]` with absolute target `eps`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson_step(f, a, fa, b, fb);
    adaptive(f, a, fa, m, fm, b, fb, whole, eps, 48)
}

/// Gaussian tail probability by direct quadrature of the density: unit
/// segments summed far-end first so each contributes at its own relative
/// accuracy. Supports the full two-sided real line via symmetry.
pub fn q_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_oracle(-x);
    }
    let mut total = 0.0;
    let far = x + 40.0;
    let mut hi = far;
    while hi > x {
        let lo = (hi - 1.0).max(x);
        let scale = phi(lo).max(f64::MIN_POSITIVE);
        total += integrate(&phi, lo, hi, 1e-15 * scale);
        hi = lo;
    }
    total
}

/// Inverts a strictly decreasing function by bisection until the bracket
/// can no longer shrink in f64.
pub fn bisect_decreasing(f: &dyn Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) > target && f(hi) < target, "target not bracketed");
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Normal sampler: Box-Muller over a counter-seeded ChaCha stream, with the
/// spare deviate cached between calls.
pub struct NormalSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(seed: u64) -> Self {
        NormalSource { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.random::<f64>(); // (0, 1]
        let u2: f64 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Monte Carlo estimate of the Rayleigh-faded energy detector: each trial
/// draws an instantaneous SNR from the exponential fading law, forms the
/// N-sample energy statistic (noncentral chi-square with the signal energy
/// in the first dimension), and thresholds it.
pub fn mc_pd_rayleigh(avg_snr: f64, n: u32, eta: f64, trials: u64, seed: u64) -> f64 {
    let mut source = NormalSource::new(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        let snr = -avg_snr * (1.0 - source.uniform()).ln();
        let mu = (2.0 * snr).sqrt();
        let mut energy = 0.0;
        for i in 0..n {
            let x = source.normal() + if i == 0 { mu } else { 0.0 };
            energy += x * x;
        }
        if energy > eta {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// Monte Carlo estimate of the same detector's false alarm: the N-sample
/// noise-only energy statistic thresholded at `eta`.
pub fn mc_pf(n: u32, eta: f64, trials: u64, seed: u64) -> f64 {
    let mut source = NormalSource::new(seed);
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut energy = 0.0;
        for _ in 0..n {
            let x = source.normal();
            energy += x * x;
        }
        if energy > eta {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}
