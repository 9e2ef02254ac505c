//! Dense univariate polynomials with real-root isolation on an interval.
//!
//! Roots are isolated recursively: the critical points of `p` (roots of
//! `p'`) split the interval into monotone pieces, each of which holds at
//! most one root, located by bisection. Roots of even multiplicity show up
//! as critical points where `p` vanishes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    /// Ascending powers.
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::constant(0.0);
        }
        Polynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn shift_constant(&self, delta: f64) -> Polynomial {
        let mut coeffs = if self.coeffs.is_empty() {
            vec![0.0]
        } else {
            self.coeffs.clone()
        };
        coeffs[0] += delta;
        Polynomial { coeffs }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Degree after dropping trailing zeros; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    /// Distinct real roots in `[a, b]`, ascending. `zero_tol` is the absolute
    /// value below which a critical value counts as touching zero.
    pub fn roots_in(&self, a: f64, b: f64, zero_tol: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        match self.degree() {
            None => return roots,
            Some(0) => return roots,
            Some(1) => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if r >= a && r <= b {
                    roots.push(r);
                }
                return roots;
            }
            _ => {}
        }
        let mut crit = self.derivative().roots_in(a, b, zero_tol);
        crit.retain(|&c| c > a && c < b);
        let mut knots = Vec::with_capacity(crit.len() + 2);
        knots.push(a);
        knots.extend(crit);
        knots.push(b);
        for (k, &x) in knots.iter().enumerate() {
            if self.eval(x).abs() <= zero_tol {
                roots.push(x);
            }
            if k + 1 < knots.len() {
                let y = knots[k + 1];
                let (fx, fy) = (self.eval(x), self.eval(y));
                if fx.abs() > zero_tol && fy.abs() > zero_tol && fx.signum() != fy.signum() {
                    roots.push(bisect(|t| self.eval(t), x, y));
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-13);
        roots
    }
}

/// Bisection to machine precision on a sign change of `f` over `[lo, hi]`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
