//! Closed-form loops used by the CLI assets, tests and benches.

use std::sync::Arc;

use super::poly::Polynomial;
use super::{AmbientSpace, Harmonic, Loop, Segment};

fn plane() -> AmbientSpace {
    AmbientSpace::euclidean(2)
}

/// Product of polynomials given by ascending coefficients.
fn product(factors: &[&[f64]]) -> Vec<f64> {
    let mut acc = vec![1.0];
    for f in factors {
        let mut next = vec![0.0; acc.len() + f.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc
}

fn scaled(c: f64, p: Vec<f64>) -> Vec<f64> {
    p.into_iter().map(|x| c * x).collect()
}

/// Places the segments on a uniform partition of `[0,1]`.
pub fn uniform_loop(space: AmbientSpace, segments: Vec<Segment>) -> crate::Result<Loop> {
    let r = segments.len();
    let mut breakpoints: Vec<f64> = (0..r).map(|k| k as f64 / r as f64).collect();
    breakpoints.push(1.0);
    Loop::new(space, breakpoints, segments.into_iter().map(Arc::new).collect(), None)
}

/// `(R(cos 2πt - 1), R sin 2πt)`: counter-clockwise circle through the origin.
pub fn circle_through_origin(radius: f64) -> Loop {
    let seg = Segment::Trigonometric {
        offset: vec![-radius, 0.0],
        harmonics: vec![Harmonic {
            frequency: 1.0,
            cos: vec![radius, 0.0],
            sin: vec![0.0, radius],
        }],
    };
    uniform_loop(plane(), vec![seg])
        .expect("circle is a valid loop")
        .with_label(format!("circle(r={radius})"))
}

/// `R(cos 2πwt, sin 2πwt)` based at `(R, 0)`: winds `w` times around the
/// origin (negative `w` runs clockwise).
pub fn winding_circle(radius: f64, winding: i32) -> Loop {
    let seg = Segment::Trigonometric {
        offset: vec![0.0, 0.0],
        harmonics: vec![Harmonic {
            frequency: winding as f64,
            cos: vec![radius, 0.0],
            sin: vec![0.0, radius],
        }],
    };
    let space = AmbientSpace {
        dim: 2,
        basepoint: vec![radius, 0.0],
    };
    uniform_loop(space, vec![seg])
        .expect("winding circle is a valid loop")
        .with_label(format!("winding(r={radius},w={winding})"))
}

/// Counter-clockwise square of side `side` with a corner at the origin.
pub fn square(side: f64) -> Loop {
    let c = [[0.0, 0.0], [side, 0.0], [side, side], [0.0, side], [0.0, 0.0]];
    let segs = c.windows(2).map(|w| Segment::line(&w[0], &w[1])).collect();
    uniform_loop(plane(), segs)
        .expect("square is a valid loop")
        .with_label(format!("square({side})"))
}

/// Single-segment polynomial figure-eight through the origin, meeting the
/// basepoint only at `t ∈ {0, ½, 1}`.
pub fn polynomial_figure_eight() -> Loop {
    let base: &[f64] = &[0.0, 1.0, -1.0];
    let mid: &[f64] = &[1.0, -2.0];
    let x = scaled(8.0, product(&[base, mid]));
    let y = scaled(8.0, product(&[base, mid, &[1.0, -4.0], &[3.0, -4.0]]));
    let seg = Segment::Polynomial {
        components: vec![Polynomial::new(x), Polynomial::new(y)],
    };
    uniform_loop(plane(), vec![seg])
        .expect("figure-eight is a valid loop")
        .with_label("figure-eight")
}

/// `w(u) = (27/4) u (1-u)²`: rises from 0 to 1 on `[0, ⅓]` and returns.
fn out_and_back_profile() -> Vec<f64> {
    scaled(27.0 / 4.0, product(&[&[0.0, 1.0], &[1.0, -1.0], &[1.0, -1.0]]))
}

/// One polynomial segment tracing the parabola arc `(w, w²)` out to `(1,1)`
/// and back, turning at `t = ⅓`. Rotated by `angle`.
pub fn out_and_back_arc(angle: f64) -> Segment {
    let w = out_and_back_profile();
    let w2 = product(&[&w, &w]);
    let (s, c) = angle.sin_cos();
    let pad = |mut v: Vec<f64>, n: usize| {
        v.resize(n, 0.0);
        v
    };
    let n = w2.len();
    let (w, w2) = (pad(w, n), pad(w2, n));
    let x: Vec<f64> = w.iter().zip(&w2).map(|(a, b)| c * a - s * b).collect();
    let y: Vec<f64> = w.iter().zip(&w2).map(|(a, b)| s * a + c * b).collect();
    Segment::Polynomial {
        components: vec![Polynomial::new(x), Polynomial::new(y)],
    }
}

pub fn single_arc() -> Loop {
    uniform_loop(plane(), vec![out_and_back_arc(0.0)])
        .expect("arc is a valid loop")
        .with_label("out-and-back")
}

/// Two out-and-back petals `p → A → p → B → p` on `[0,½]` and `[½,1]`.
pub fn two_petal() -> Loop {
    uniform_loop(
        plane(),
        vec![out_and_back_arc(0.0), out_and_back_arc(2.0 * std::f64::consts::FRAC_PI_3)],
    )
    .expect("two-petal is a valid loop")
    .with_label("two-petal")
}

/// A cubic path from the origin to `(1, 0.75)`.
pub fn sample_path() -> Segment {
    Segment::Polynomial {
        components: vec![
            Polynomial::new(vec![0.0, 1.0]),
            Polynomial::new(vec![0.0, 0.5, -0.25, 0.5]),
        ],
    }
}

/// `β⁻¹·β` as a two-segment loop: `β` on `[0,½]`, its reversal on `[½,1]`.
pub fn retrace_loop(beta: &Segment) -> Loop {
    let space = AmbientSpace {
        dim: beta.dim(),
        basepoint: beta.start(),
    };
    uniform_loop(space, vec![beta.clone(), beta.reversed()])
        .expect("retrace is a valid loop")
        .with_label("retrace")
}
