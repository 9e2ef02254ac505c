//! Closed-form smooth arcs parametrized over `[0, 1]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bump::{bump, bump_deriv, flat_step, flat_step_deriv};
use super::poly::Polynomial;

/// `(sin 2πτ, cos 2πτ)` with exact values at quarter turns.
pub(crate) fn sincos_turns(tau: f64) -> (f64, f64) {
    let q = (4.0 * tau).round();
    let r = tau - 0.25 * q;
    let (s, c) = (std::f64::consts::TAU * r).sin_cos();
    match (q as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Monotone profile `g: [0,1] → [0,1]` with `g(0) = 0`, `g(1) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Linear,
    /// `v^p`, `p ≥ 1`.
    Power { exponent: f64 },
    Polynomial { coeffs: Polynomial },
    /// Normalized integral of the flat bump; flat to all orders at both ends.
    FlatStep,
    /// Monotone cubic Hermite interpolant on uniform knots.
    Pchip { values: Vec<f64>, slopes: Vec<f64> },
}

impl Shape {
    /// Monotone cubic Hermite interpolant through `values` (uniform knots on
    /// [0,1]), slopes by the Fritsch-Carlson harmonic-mean rule.
    pub fn pchip(values: Vec<f64>) -> Shape {
        let n = values.len();
        assert!(n >= 2, "pchip needs at least two knots");
        let h = 1.0 / (n - 1) as f64;
        let delta: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut slopes = vec![0.0; n];
        for k in 1..n - 1 {
            let (a, b) = (delta[k - 1], delta[k]);
            if a * b > 0.0 {
                slopes[k] = 2.0 * a * b / (a + b);
            }
        }
        let end_slope = |d0: f64, d1: f64| {
            let s = 1.5 * d0 - 0.5 * d1;
            if s * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            slopes[0] = end_slope(delta[0], delta[1]);
            slopes[n - 1] = end_slope(delta[n - 2], delta[n - 3]);
        }
        Shape::Pchip { values, slopes }
    }

    pub fn value(&self, v: f64) -> f64 {
        match self {
            Shape::Linear => v,
            Shape::Power { exponent } => v.max(0.0).powf(*exponent),
            Shape::Polynomial { coeffs } => coeffs.eval(v),
            Shape::FlatStep => flat_step(v),
            Shape::Pchip { values, slopes } => {
                let (k, h, s) = pchip_cell(values.len(), v);
                let (y0, y1, d0, d1) = (values[k], values[k + 1], slopes[k], slopes[k + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * h * d0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * h * d1
            }
        }
    }

    pub fn rate(&self, v: f64) -> f64 {
        match self {
            Shape::Linear => 1.0,
            Shape::Power { exponent } => {
                if *exponent == 1.0 {
                    1.0
                } else {
                    exponent * v.max(0.0).powf(exponent - 1.0)
                }
            }
            Shape::Polynomial { coeffs } => coeffs.derivative().eval(v),
            Shape::FlatStep => flat_step_deriv(v),
            Shape::Pchip { values, slopes } => {
                let (k, h, s) = pchip_cell(values.len(), v);
                let (y0, y1, d0, d1) = (values[k], values[k + 1], slopes[k], slopes[k + 1]);
                let s2 = s * s;
                ((6.0 * s2 - 6.0 * s) * y0
                    + (3.0 * s2 - 4.0 * s + 1.0) * h * d0
                    + (-6.0 * s2 + 6.0 * s) * y1
                    + (3.0 * s2 - 2.0 * s) * h * d1)
                    / h
            }
        }
    }

    /// Smallest `v` with `g(v) ≥ y`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        match self {
            Shape::Linear => y,
            Shape::Power { exponent } => y.powf(1.0 / exponent),
            _ => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.value(mid) >= y {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    /// Interior points of `[0,1]` where `g' = 0`; `None` when not known in
    /// closed form.
    pub(crate) fn stationary_points(&self) -> Option<Vec<f64>> {
        match self {
            Shape::Linear => Some(vec![]),
            Shape::Power { exponent } => Some(if *exponent > 1.0 { vec![0.0] } else { vec![] }),
            Shape::Polynomial { coeffs } => {
                let d = coeffs.derivative();
                let tol = 1e-14 * d.max_abs_coeff().max(1.0);
                Some(d.roots_in(0.0, 1.0, tol))
            }
            Shape::FlatStep => Some(vec![0.0, 1.0]),
            Shape::Pchip { .. } => None,
        }
    }

    /// Monotonicity and endpoint check used by reparametrization validation.
    pub(crate) fn validate(&self) -> Result<(), String> {
        match self {
            Shape::Power { exponent } if !(*exponent >= 1.0 && exponent.is_finite()) => {
                return Err(format!("power exponent {exponent} must be ≥ 1"));
            }
            Shape::Pchip { values, slopes } => {
                if values.len() < 2 || values.len() != slopes.len() {
                    return Err("pchip needs matching values/slopes, ≥ 2 knots".into());
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return Err("pchip values must be non-decreasing".into());
                }
            }
            _ => {}
        }
        let (g0, g1) = (self.value(0.0), self.value(1.0));
        if g0.abs() > 1e-12 || (g1 - 1.0).abs() > 1e-12 {
            return Err(format!("shape must map 0→0 and 1→1, got {g0}, {g1}"));
        }
        let n = 4096;
        let mut prev = g0;
        for k in 1..=n {
            let g = self.value(k as f64 / n as f64);
            if g < prev - 1e-13 {
                return Err(format!("shape decreases near v = {}", k as f64 / n as f64));
            }
            prev = g;
        }
        Ok(())
    }
}

fn pchip_cell(n: usize, v: f64) -> (usize, f64, f64) {
    let cells = (n - 1) as f64;
    let h = 1.0 / cells;
    let x = (v.clamp(0.0, 1.0) * cells).min(cells);
    let k = (x.floor() as usize).min(n - 2);
    (k, h, x - k as f64)
}

/// Monotone change of parameter `s ↦ u` feeding a base segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum ParamMap {
    /// `u = start + (end - start) s`; `end < start` reverses orientation.
    Affine { start: f64, end: f64 },
    /// `v = window[0] + (window[1]-window[0]) s`,
    /// `y = range[0] + (range[1]-range[0]) g(v)`,
    /// `u = (y - target[0]) / (target[1] - target[0])`.
    Shaped {
        window: [f64; 2],
        range: [f64; 2],
        target: [f64; 2],
        shape: Shape,
    },
}

impl ParamMap {
    pub fn apply(&self, s: f64) -> f64 {
        match self {
            ParamMap::Affine { start, end } => {
                if s == 0.0 {
                    *start
                } else if s == 1.0 {
                    *end
                } else {
                    start + (end - start) * s
                }
            }
            ParamMap::Shaped {
                window,
                range,
                target,
                shape,
            } => {
                let v = lerp(window[0], window[1], s);
                let y = range[0] + (range[1] - range[0]) * shape.value(v);
                ((y - target[0]) / (target[1] - target[0])).clamp(0.0, 1.0)
            }
        }
    }

    pub fn rate(&self, s: f64) -> f64 {
        match self {
            ParamMap::Affine { start, end } => end - start,
            ParamMap::Shaped {
                window,
                range,
                target,
                shape,
            } => {
                let v = lerp(window[0], window[1], s);
                (window[1] - window[0]) * (range[1] - range[0]) * shape.rate(v)
                    / (target[1] - target[0])
            }
        }
    }

    fn increasing(&self) -> bool {
        match self {
            ParamMap::Affine { start, end } => end >= start,
            ParamMap::Shaped { window, .. } => window[1] >= window[0],
        }
    }

    /// The set `{s ∈ [0,1] : apply(s) = u}` as a closed interval, if nonempty.
    pub(crate) fn preimage(&self, u: f64) -> Option<(f64, f64)> {
        let (m0, m1) = (self.apply(0.0), self.apply(1.0));
        let (lo, hi) = if m0 <= m1 { (m0, m1) } else { (m1, m0) };
        let slack = 1e-14;
        if u < lo - slack || u > hi + slack {
            return None;
        }
        if let ParamMap::Affine { start, end } = self {
            if start == end {
                return Some((0.0, 1.0));
            }
            let s = ((u - start) / (end - start)).clamp(0.0, 1.0);
            return Some((s, s));
        }
        // first s reaching u and last s not passing it, in the direction of travel
        let inc = self.increasing();
        let reach = |s: f64| {
            let m = self.apply(s);
            if inc {
                m >= u
            } else {
                m <= u
            }
        };
        let pass = |s: f64| {
            let m = self.apply(s);
            if inc {
                m > u
            } else {
                m < u
            }
        };
        let first = search(&reach);
        let last = search(&pass);
        Some((first.min(last), last.max(first)))
    }

    fn compose_affine(&self, a: f64, b: f64) -> ParamMap {
        if a == 0.0 && b == 1.0 {
            return self.clone();
        }
        match self {
            ParamMap::Affine { start, end } => {
                if a == 1.0 && b == 0.0 {
                    ParamMap::Affine {
                        start: *end,
                        end: *start,
                    }
                } else {
                    ParamMap::Affine {
                        start: self.apply(a),
                        end: self.apply(b),
                    }
                }
            }
            ParamMap::Shaped {
                window,
                range,
                target,
                shape,
            } => {
                let window = if a == 1.0 && b == 0.0 {
                    [window[1], window[0]]
                } else {
                    [lerp(window[0], window[1], a), lerp(window[0], window[1], b)]
                };
                ParamMap::Shaped {
                    window,
                    range: *range,
                    target: *target,
                    shape: shape.clone(),
                }
            }
        }
    }
}

/// Smallest `s ∈ [0,1]` with `pred(s)` for a monotone predicate; 1 if none.
fn search<P: Fn(f64) -> bool>(pred: &P) -> f64 {
    if pred(0.0) {
        return 0.0;
    }
    if !pred(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub(crate) fn lerp(a: f64, b: f64, s: f64) -> f64 {
    if s == 0.0 {
        a
    } else if s == 1.0 {
        b
    } else {
        a + (b - a) * s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    /// Frequency in turns per unit parameter.
    pub frequency: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

/// One smooth arc `[0,1] → ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Segment {
    /// One polynomial per coordinate.
    Polynomial { components: Vec<Polynomial> },
    /// `offset + Σ cos_k cos(2π f_k u) + sin_k sin(2π f_k u)`.
    Trigonometric {
        offset: Vec<f64>,
        harmonics: Vec<Harmonic>,
    },
    /// `offset + f(u) · direction` with `f` the flat bump.
    BumpRay {
        offset: Vec<f64>,
        direction: Vec<f64>,
    },
    Constant { point: Vec<f64> },
    Composed { base: Arc<Segment>, map: ParamMap },
}

impl Segment {
    pub fn line(from: &[f64], to: &[f64]) -> Segment {
        Segment::Polynomial {
            components: from
                .iter()
                .zip(to)
                .map(|(&a, &b)| Polynomial::new(vec![a, b - a]))
                .collect(),
        }
    }

    /// Planar bump ray of radius `r` (peak `r·e^{-4}`) at angle `theta`.
    pub fn bump_ray_polar(offset: [f64; 2], r: f64, theta: f64) -> Segment {
        let (s, c) = theta.sin_cos();
        Segment::BumpRay {
            offset: offset.to_vec(),
            direction: vec![r * c, r * s],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Segment::Polynomial { components } => components.len(),
            Segment::Trigonometric { offset, .. } => offset.len(),
            Segment::BumpRay { offset, .. } => offset.len(),
            Segment::Constant { point } => point.len(),
            Segment::Composed { base, .. } => base.dim(),
        }
    }

    pub fn eval(&self, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(u, &mut out);
        out
    }

    pub fn eval_into(&self, u: f64, out: &mut [f64]) {
        match self {
            Segment::Polynomial { components } => {
                for (o, p) in out.iter_mut().zip(components) {
                    *o = p.eval(u);
                }
            }
            Segment::Trigonometric { offset, harmonics } => {
                out.copy_from_slice(offset);
                for h in harmonics {
                    let (s, c) = sincos_turns(h.frequency * u);
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += h.cos[k] * c + h.sin[k] * s;
                    }
                }
            }
            Segment::BumpRay { offset, direction } => {
                let f = bump(u);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = offset[k] + f * direction[k];
                }
            }
            Segment::Constant { point } => out.copy_from_slice(point),
            Segment::Composed { base, map } => base.eval_into(map.apply(u), out),
        }
    }

    pub fn deriv(&self, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.deriv_into(u, &mut out);
        out
    }

    pub fn deriv_into(&self, u: f64, out: &mut [f64]) {
        match self {
            Segment::Polynomial { components } => {
                for (o, p) in out.iter_mut().zip(components) {
                    // Horner on the derivative without allocating
                    let n = p.coeffs.len();
                    let mut acc = 0.0;
                    for k in (1..n).rev() {
                        acc = acc * u + p.coeffs[k] * k as f64;
                    }
                    *o = acc;
                }
            }
            Segment::Trigonometric { harmonics, .. } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for h in harmonics {
                    let (s, c) = sincos_turns(h.frequency * u);
                    let w = std::f64::consts::TAU * h.frequency;
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += w * (h.sin[k] * c - h.cos[k] * s);
                    }
                }
            }
            Segment::BumpRay { direction, .. } => {
                let df = bump_deriv(u);
                for (o, d) in out.iter_mut().zip(direction) {
                    *o = df * d;
                }
            }
            Segment::Constant { .. } => out.iter_mut().for_each(|o| *o = 0.0),
            Segment::Composed { base, map } => {
                base.deriv_into(map.apply(u), out);
                let r = map.rate(u);
                out.iter_mut().for_each(|o| *o *= r);
            }
        }
    }

    pub fn start(&self) -> Vec<f64> {
        self.eval(0.0)
    }

    pub fn end(&self) -> Vec<f64> {
        self.eval(1.0)
    }

    /// True when the arc is a single point by construction.
    pub fn is_constant(&self) -> bool {
        match self {
            Segment::Constant { .. } => true,
            Segment::Polynomial { components } => components
                .iter()
                .all(|p| p.coeffs.iter().skip(1).all(|&c| c == 0.0)),
            Segment::Trigonometric { harmonics, .. } => harmonics.iter().all(|h| {
                h.frequency == 0.0 || h.cos.iter().chain(&h.sin).all(|&c| c == 0.0)
            }),
            Segment::BumpRay { direction, .. } => direction.iter().all(|&d| d == 0.0),
            Segment::Composed { base, map } => {
                base.is_constant() || matches!(map, ParamMap::Affine { start, end } if start == end)
            }
        }
    }

    /// `s ↦ self(1 - s)`.
    pub fn reversed(&self) -> Segment {
        match self {
            Segment::Constant { .. } | Segment::BumpRay { .. } => self.clone(),
            _ => self.restricted(1.0, 0.0),
        }
    }

    /// `s ↦ self(a + (b - a) s)`; `a > b` runs backwards.
    pub fn restricted(&self, a: f64, b: f64) -> Segment {
        if a == 0.0 && b == 1.0 {
            return self.clone();
        }
        match self {
            Segment::Constant { .. } => self.clone(),
            Segment::Polynomial { components } => Segment::Polynomial {
                components: components.iter().map(|p| compose_affine(p, a, b)).collect(),
            },
            Segment::Trigonometric { offset, harmonics } => Segment::Trigonometric {
                offset: offset.clone(),
                harmonics: harmonics
                    .iter()
                    .map(|h| {
                        let (sp, cp) = sincos_turns(h.frequency * a);
                        Harmonic {
                            frequency: h.frequency * (b - a),
                            cos: h
                                .cos
                                .iter()
                                .zip(&h.sin)
                                .map(|(c, s)| c * cp + s * sp)
                                .collect(),
                            sin: h
                                .cos
                                .iter()
                                .zip(&h.sin)
                                .map(|(c, s)| s * cp - c * sp)
                                .collect(),
                        }
                    })
                    .collect(),
            },
            Segment::BumpRay { .. } => Segment::Composed {
                base: Arc::new(self.clone()),
                map: ParamMap::Affine { start: a, end: b },
            },
            Segment::Composed { base, map } => {
                let map = map.compose_affine(a, b);
                if map == (ParamMap::Affine { start: 0.0, end: 1.0 }) {
                    (**base).clone()
                } else {
                    Segment::Composed {
                        base: base.clone(),
                        map,
                    }
                }
            }
        }
    }

    /// Pointwise scaling about the origin.
    pub fn scaled(&self, c: f64) -> Segment {
        let sv = |v: &Vec<f64>| v.iter().map(|x| x * c).collect::<Vec<_>>();
        match self {
            Segment::Polynomial { components } => Segment::Polynomial {
                components: components.iter().map(|p| p.scale(c)).collect(),
            },
            Segment::Trigonometric { offset, harmonics } => Segment::Trigonometric {
                offset: sv(offset),
                harmonics: harmonics
                    .iter()
                    .map(|h| Harmonic {
                        frequency: h.frequency,
                        cos: sv(&h.cos),
                        sin: sv(&h.sin),
                    })
                    .collect(),
            },
            Segment::BumpRay { offset, direction } => Segment::BumpRay {
                offset: sv(offset),
                direction: sv(direction),
            },
            Segment::Constant { point } => Segment::Constant { point: sv(point) },
            Segment::Composed { base, map } => Segment::Composed {
                base: Arc::new(base.scaled(c)),
                map: map.clone(),
            },
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let n = self.dim();
        if n == 0 {
            return Err("segment has dimension 0".into());
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Segment::Polynomial { components } => {
                if components.iter().any(|p| !finite(&p.coeffs)) {
                    return Err("non-finite polynomial coefficient".into());
                }
            }
            Segment::Trigonometric { offset, harmonics } => {
                if !finite(offset) {
                    return Err("non-finite offset".into());
                }
                for h in harmonics {
                    if h.cos.len() != n || h.sin.len() != n || !h.frequency.is_finite() {
                        return Err("harmonic dimension mismatch".into());
                    }
                    if !finite(&h.cos) || !finite(&h.sin) {
                        return Err("non-finite harmonic coefficient".into());
                    }
                }
            }
            Segment::BumpRay { offset, direction } => {
                if direction.len() != n || !finite(offset) || !finite(direction) {
                    return Err("bump ray offset/direction mismatch".into());
                }
            }
            Segment::Constant { point } => {
                if !finite(point) {
                    return Err("non-finite constant point".into());
                }
            }
            Segment::Composed { base, map } => {
                base.validate()?;
                if let ParamMap::Shaped { target, shape, .. } = map {
                    if target[1] <= target[0] {
                        return Err("shaped map target must be increasing".into());
                    }
                    shape.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// `p(a + (b - a) s)` as a polynomial in `s`.
fn compose_affine(p: &Polynomial, a: f64, b: f64) -> Polynomial {
    let w = b - a;
    // Horner in polynomial arithmetic: acc = acc * (a + w s) + c
    let mut acc: Vec<f64> = vec![0.0];
    for &c in p.coeffs.iter().rev() {
        let mut next = vec![0.0; acc.len() + 1];
        for (k, &x) in acc.iter().enumerate() {
            next[k] += x * a;
            next[k + 1] += x * w;
        }
        next[0] += c;
        acc = next;
    }
    while acc.len() > 1 && *acc.last().unwrap() == 0.0 {
        acc.pop();
    }
    Polynomial::new(acc)
}
