//! Loop corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use holonomy_lab::gauge::{random_connection, AlgebraName, PolynomialConnection};
use holonomy_lab::loopcore::library::{
    circle_through_origin, polynomial_figure_eight, single_arc, square, two_petal, uniform_loop,
};
use holonomy_lab::loopcore::poly::Polynomial;
use holonomy_lab::loopcore::{AmbientSpace, Loop, Reparam, Segment};
use holonomy_lab::words::Letter;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn plane() -> AmbientSpace {
    AmbientSpace::euclidean(2)
}

/// `a + (b - a)u + c·u(1 - u)`.
pub fn bent(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Segment {
    Segment::Polynomial {
        components: (0..2)
            .map(|i| Polynomial::new(vec![a[i], b[i] - a[i] + c[i], -c[i]]))
            .collect(),
    }
}

/// Polygon-like loop at the origin through `k` random points with bent edges.
pub fn random_loop(seed: u64) -> Loop {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=3);
    let mut pts = vec![[0.0, 0.0]];
    for _ in 0..k {
        pts.push([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
    }
    pts.push([0.0, 0.0]);
    let segs = pts
        .windows(2)
        .map(|w| bent(w[0], w[1], [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]))
        .collect();
    uniform_loop(plane(), segs).unwrap()
}

/// Closed-form loops plus seeded random ones.
pub fn loop_corpus() -> Vec<Loop> {
    let mut v = vec![
        circle_through_origin(1.0),
        circle_through_origin(0.4),
        square(0.7),
        polynomial_figure_eight(),
        single_arc(),
        two_petal(),
    ];
    v.extend((0..6).map(random_loop));
    v
}

/// Smooth, flat-piece and sitting reparametrizations.
pub fn phi_corpus() -> Vec<Reparam> {
    vec![
        Reparam::identity(),
        Reparam::power(2.0).unwrap(),
        Reparam::power(3.5).unwrap(),
        Reparam::polynomial(vec![0.0, 0.0, 3.0, -2.0]).unwrap(),
        Reparam::polynomial(vec![0.0, 0.5, 0.0, 0.5]).unwrap(),
        Reparam::sitting(0.1).unwrap(),
        Reparam::sitting(0.3).unwrap(),
        Reparam::piecewise_affine(vec![[0.0, 0.0], [0.3, 0.0], [0.6, 0.7], [1.0, 1.0]]).unwrap(),
        Reparam::piecewise_affine(vec![[0.0, 0.0], [0.2, 0.5], [0.4, 0.5], [1.0, 1.0]]).unwrap(),
    ]
}

pub fn su2_connection(seed: u64, degree: u32) -> PolynomialConnection {
    random_connection(seed, AlgebraName::Su2, 2, degree, 1.0).unwrap()
}

/// Signed area enclosed by a sampled closed curve (shoelace).
pub fn signed_area(gamma: &Loop, samples: usize) -> f64 {
    let pts: Vec<Vec<f64>> = (0..=samples)
        .map(|k| gamma.eval(k as f64 / samples as f64).unwrap())
        .collect();
    0.5 * pts.windows(2).map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1]).sum::<f64>()
}

/// Total change of the polar angle along a sampled loop avoiding the origin.
pub fn winding_angle(gamma: &Loop, samples: usize) -> f64 {
    let pts: Vec<Vec<f64>> = (0..=samples)
        .map(|k| gamma.eval(k as f64 / samples as f64).unwrap())
        .collect();
    pts.windows(2)
        .map(|w| {
            let d = w[1][1].atan2(w[1][0]) - w[0][1].atan2(w[0][0]);
            (d + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI
        })
        .sum()
}

/// All normal forms reachable by cancelling adjacent inverse pairs in every
/// possible order. Results for short words are memoized.
pub struct AllOrdersReducer {
    memo: HashMap<Vec<Letter>, BTreeSet<Vec<(usize, i8)>>>,
    memo_len: usize,
}

impl AllOrdersReducer {
    pub fn new(memo_len: usize) -> Self {
        AllOrdersReducer {
            memo: HashMap::new(),
            memo_len,
        }
    }

    pub fn normal_forms(&mut self, w: &[Letter]) -> BTreeSet<Vec<(usize, i8)>> {
        if w.len() <= self.memo_len {
            if let Some(hit) = self.memo.get(w) {
                return hit.clone();
            }
        }
        let mut out = BTreeSet::new();
        let mut reducible = false;
        for i in 0..w.len().saturating_sub(1) {
            if w[i].segment_id == w[i + 1].segment_id && w[i].orientation == -w[i + 1].orientation {
                reducible = true;
                let mut shorter = w[..i].to_vec();
                shorter.extend_from_slice(&w[i + 2..]);
                out.extend(self.normal_forms(&shorter));
            }
        }
        if !reducible {
            out.insert(w.iter().map(|l| (l.segment_id, l.orientation)).collect());
        }
        if w.len() <= self.memo_len {
            self.memo.insert(w.to_vec(), out.clone());
        }
        out
    }
}

/// Distinct real roots of `p` in `[0, 1]` found by a uniform sign/magnitude
/// scan followed by bisection.
pub fn scan_roots(p: &Polynomial, points: usize, tol: f64) -> Vec<f64> {
    let xs: Vec<f64> = (0..=points).map(|k| k as f64 / points as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| p.eval(x)).collect();
    let mut roots = Vec::new();
    for k in 0..xs.len() {
        if ys[k].abs() <= tol {
            roots.push(xs[k]);
        }
        if k + 1 < xs.len() && ys[k].abs() > tol && ys[k + 1].abs() > tol && ys[k].signum() != ys[k + 1].signum() {
            let (mut lo, mut hi) = (xs[k], xs[k + 1]);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if p.eval(mid).signum() == ys[k].signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots
}
