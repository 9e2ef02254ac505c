//! The flat bump `f(u) = exp(-1/(u(1-u)))` on (0,1), zero at the ends, and
//! the monotone flat step built from its normalized integral.

use std::sync::OnceLock;

/// Peak value `f(1/2) = e^{-4}`.
pub const BUMP_PEAK: f64 = 0.018_315_638_888_734_18;

pub fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    (-1.0 / (u * (1.0 - u))).exp()
}

pub fn bump_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let w = u * (1.0 - u);
    bump(u) * (1.0 - 2.0 * u) / (w * w)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn gl20() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(20))
}

/// Integral of `f` over [a, b] by composite 20-point Gauss-Legendre.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let nodes = gl20();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for &(x, w) in nodes {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

fn half_mass() -> f64 {
    static HALF: OnceLock<f64> = OnceLock::new();
    *HALF.get_or_init(|| integrate(bump, 0.0, 0.5, 8))
}

/// Flat step `S(u) = ∫_0^u f / ∫_0^1 f`; every derivative vanishes at 0 and 1.
pub fn flat_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let half = half_mass();
    if u <= 0.5 {
        integrate(bump, 0.0, u, 6) / (2.0 * half)
    } else {
        1.0 - integrate(bump, 0.0, 1.0 - u, 6) / (2.0 * half)
    }
}

pub fn flat_step_deriv(u: f64) -> f64 {
    bump(u) / (2.0 * half_mass())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_is_e_minus_four() {
        assert_eq!(bump(0.5), (-4.0f64).exp());
        assert!((BUMP_PEAK - (-4.0f64).exp()).abs() < 1e-18);
        assert_eq!(bump(0.0), 0.0);
        assert_eq!(bump(1.0), 0.0);
    }

    #[test]
    fn derivative_matches_central_differences() {
        for &u in &[0.1, 0.3, 0.5, 0.77] {
            let h = 1e-6;
            let fd = (bump(u + h) - bump(u - h)) / (2.0 * h);
            assert!((fd - bump_deriv(u)).abs() < 1e-8, "u={u}");
        }
        assert_eq!(bump_deriv(0.5), 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, 1);
        assert!((v - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn flat_step_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        for k in 1..=200 {
            let u = k as f64 / 200.0;
            let s = flat_step(u);
            assert!(s >= prev);
            prev = s;
            assert!((s + flat_step(1.0 - u) - 1.0).abs() < 1e-14);
        }
        assert!((flat_step(0.5) - 0.5).abs() < 1e-15);
        // derivative against differences
        let h = 1e-5;
        let u = 0.37;
        let fd = (flat_step(u + h) - flat_step(u - h)) / (2.0 * h);
        assert!((fd - flat_step_deriv(u)).abs() < 1e-8);
    }
}
