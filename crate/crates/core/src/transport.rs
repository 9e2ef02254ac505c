//! Holonomy: `U' = -(Σ_j A_j(γ) γ'_j) U`, `U(0) = I`, integrated per smooth
//! piece in its local parameter; later pieces multiply on the left.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{algebra_exp, project_in_place, AlgebraName, GaugeField, GroupElement, Mat};
use crate::loopcore::library::square;
use crate::loopcore::{Loop, Segment};

pub const CONVENTION: &str =
    "convention: U' = -(sum_j A_j(gamma) gamma'_j) U, U(0) = I, Hol = U(1); later segments multiply on the left";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Projected,
    LieEuler,
}

impl Method {
    fn order(self) -> i32 {
        match self {
            Method::Rk4Projected => 4,
            Method::LieEuler => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportOptions {
    pub steps_per_segment: usize,
    pub method: Method,
    pub tolerance: f64,
    pub richardson: bool,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            steps_per_segment: 2048,
            method: Method::Rk4Projected,
            tolerance: 1e-9,
            richardson: true,
        }
    }
}

impl TransportOptions {
    pub fn with_steps(steps: usize) -> Self {
        TransportOptions {
            steps_per_segment: steps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_segment < 8 {
            return Err(Error::Domain(format!("steps {} must be ≥ 8", self.steps_per_segment)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain("transport tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyResult {
    pub element: GroupElement,
    pub error_estimate: f64,
    pub steps_used: usize,
}

/// Algebra element `-Σ_j A_j(s(u)) s'_j(u)` at the sample points.
struct Integrand<'a> {
    field: &'a dyn GaugeField,
    seg: &'a Segment,
    pos: Vec<f64>,
    vel: Vec<f64>,
    coeffs: Vec<f64>,
}

impl<'a> Integrand<'a> {
    fn new(field: &'a dyn GaugeField, seg: &'a Segment) -> Self {
        let n = seg.dim();
        Integrand {
            field,
            seg,
            pos: vec![0.0; n],
            vel: vec![0.0; n],
            coeffs: vec![0.0; field.algebra().algebra().dim()],
        }
    }

    fn at(&mut self, u: f64, out: &mut Mat) -> Result<()> {
        self.seg.eval_into(u, &mut self.pos);
        self.seg.deriv_into(u, &mut self.vel);
        self.field.contract_into(&self.pos, &self.vel, &mut self.coeffs)?;
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self.field.algebra().algebra().element_into(&self.coeffs, out);
        if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence(format!("non-finite connection value at u = {u}")));
        }
        Ok(())
    }
}

fn check_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence("transport matrix became non-finite".into()))
    }
}

/// Integrates with `n` steps using integrand samples on the grid of
/// spacing `1 / (2 * stride * n)`: `samples[k]` is at `u = k / (2 n stride)`.
fn integrate(algebra: AlgebraName, samples: &[Mat], n: usize, stride: usize, method: Method) -> Result<Mat> {
    let m = samples[0].nrows();
    let mut u = Mat::identity(m, m);
    let h = Complex64::new(1.0 / n as f64, 0.0);
    let half = h * 0.5;
    let sixth = h / 6.0;
    for k in 0..n {
        let a = &samples[2 * k * stride];
        let mid = &samples[(2 * k + 1) * stride];
        let b = &samples[(2 * k + 2) * stride];
        match method {
            Method::Rk4Projected => {
                let k1 = a * &u;
                let k2 = mid * (&u + &k1 * half);
                let k3 = mid * (&u + &k2 * half);
                let k4 = b * (&u + &k3 * h);
                u += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * sixth;
            }
            Method::LieEuler => {
                u = algebra_exp(algebra, &(a * h))?.matrix * u;
            }
        }
        project_in_place(algebra, &mut u);
    }
    check_finite(&u)?;
    Ok(u)
}

/// Holonomy of one smooth piece in its local parameter.
pub fn holonomy_segment(field: &dyn GaugeField, seg: &Segment, opts: &TransportOptions) -> Result<HolonomyResult> {
    opts.validate()?;
    let algebra = field.algebra();
    if seg.dim() != field.dim() {
        return Err(Error::Incompatible(format!(
            "segment in ℝ^{} but connection on ℝ^{}",
            seg.dim(),
            field.dim()
        )));
    }
    if seg.is_constant() {
        return Ok(HolonomyResult {
            element: GroupElement::identity(algebra),
            error_estimate: 0.0,
            steps_used: 0,
        });
    }
    let n = opts.steps_per_segment;
    let m = algebra.algebra().size();
    let mut integrand = Integrand::new(field, seg);
    let mut samples = vec![Mat::zeros(m, m); 2 * n + 1];
    for (k, s) in samples.iter_mut().enumerate() {
        let u = if k == 2 * n { 1.0 } else { k as f64 / (2 * n) as f64 };
        integrand.at(u, s)?;
    }
    let fine = integrate(algebra, &samples, n, 1, opts.method)?;
    let error_estimate = if opts.richardson {
        let coarse = integrate(algebra, &samples, n / 2, 2, opts.method)?;
        (&fine - &coarse).norm() / (2f64.powi(opts.method.order()) - 1.0)
    } else {
        0.0
    };
    Ok(HolonomyResult {
        element: GroupElement {
            matrix: fine,
            algebra,
        },
        error_estimate,
        steps_used: n,
    })
}

/// Ordered product of the piece holonomies.
pub fn holonomy(field: &dyn GaugeField, gamma: &Loop, opts: &TransportOptions) -> Result<HolonomyResult> {
    if gamma.dim() != field.dim() {
        return Err(Error::Incompatible(format!(
            "loop in ℝ^{} but connection on ℝ^{}",
            gamma.dim(),
            field.dim()
        )));
    }
    let mut total = HolonomyResult {
        element: GroupElement::identity(field.algebra()),
        error_estimate: 0.0,
        steps_used: 0,
    };
    for piece in gamma.pieces() {
        let r = holonomy_segment(field, &piece.segment, opts)?;
        total.element = r.element.mul(&total.element);
        total.element.project();
        total.error_estimate += r.error_estimate;
        total.steps_used += r.steps_used;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderProbe {
    pub ladder: Vec<usize>,
    /// Distance of each rung from the finest one (finest omitted).
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: Option<f64>,
    /// All rungs agree to rounding: nothing to fit.
    pub exact: bool,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Empirical order of the integrator on `γ` over a doubling step ladder.
pub fn convergence_order_probe(
    field: &dyn GaugeField,
    gamma: &Loop,
    ladder: &[usize],
    method: Method,
) -> Result<OrderProbe> {
    if ladder.len() < 3 || ladder.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Domain("ladder needs ≥ 3 step counts, each doubling the last".into()));
    }
    let results = ladder
        .iter()
        .map(|&n| {
            let opts = TransportOptions {
                steps_per_segment: n,
                method,
                richardson: false,
                ..Default::default()
            };
            holonomy(field, gamma, &opts).map(|r| r.element)
        })
        .collect::<Result<Vec<_>>>()?;
    let finest = results.last().unwrap();
    let errors: Vec<f64> = results[..results.len() - 1].iter().map(|e| e.distance(finest)).collect();
    let exact = errors.iter().all(|&e| e <= 1e-15);
    let order = if exact {
        None
    } else {
        let xs: Vec<f64> = ladder[..errors.len()].iter().map(|&n| (1.0 / n as f64).ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
        Some(fit_slope(&xs, &ys))
    };
    Ok(OrderProbe {
        ladder: ladder.to_vec(),
        errors,
        order,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProbe {
    pub epsilons: Vec<f64>,
    /// `‖Hol(ε-square) - exp(-ε² F)‖_F`.
    pub deviations: Vec<f64>,
    /// `‖Hol(ε-square) - I‖_F`, for scale.
    pub magnitudes: Vec<f64>,
    pub order: f64,
}

/// Small-square law for the constant connection `C₁ dx + C₂ dy`:
/// `Hol(ε-square) = exp(-ε² [C₁, C₂]) + O(ε³)`.
pub fn curvature_law_probe(
    algebra: AlgebraName,
    c1: &[f64],
    c2: &[f64],
    epsilons: &[f64],
    opts: &TransportOptions,
) -> Result<CurvatureProbe> {
    let field = crate::gauge::PolynomialConnection::constant(algebra, &[c1.to_vec(), c2.to_vec()])?;
    let alg = algebra.algebra();
    let f = crate::gauge::bracket(&alg.element(c1), &alg.element(c2));
    let mut deviations = Vec::new();
    let mut magnitudes = Vec::new();
    for &eps in epsilons {
        let hol = holonomy(&field, &square(eps), opts)?.element;
        let want = algebra_exp(algebra, &(&f * Complex64::new(-eps * eps, 0.0)))?;
        deviations.push(hol.distance(&want));
        magnitudes.push(hol.distance_to_identity());
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = deviations.iter().map(|d| d.max(1e-300).ln()).collect();
    Ok(CurvatureProbe {
        epsilons: epsilons.to_vec(),
        deviations,
        magnitudes,
        order: fit_slope(&xs, &ys),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{magnetic_u1, PolynomialConnection};
    use crate::loopcore::library::{circle_through_origin, uniform_loop};
    use crate::loopcore::AmbientSpace;

    #[test]
    fn zero_connection_gives_identity_exactly() {
        let a = PolynomialConnection::zero(AlgebraName::Su2, 2);
        let h = holonomy(&a, &circle_through_origin(1.0), &TransportOptions::default()).unwrap();
        assert_eq!(h.element, GroupElement::identity(AlgebraName::Su2));
        assert_eq!(h.error_estimate, 0.0);
    }

    #[test]
    fn constant_connection_on_a_line() {
        let c = vec![0.3, -0.8, 0.5];
        let a = PolynomialConnection::constant(AlgebraName::Su2, &[c.clone(), vec![0.0; 3]]).unwrap();
        let seg = Segment::line(&[0.0, 0.0], &[2.0, 0.0]);
        let h = holonomy_segment(&a, &seg, &TransportOptions::default()).unwrap();
        let alg = AlgebraName::Su2.algebra();
        let want = algebra_exp(AlgebraName::Su2, &(alg.element(&c) * Complex64::new(-2.0, 0.0))).unwrap();
        assert!(h.element.distance(&want) < 1e-10);
        assert!(h.element.residual() < 1e-12);
    }

    #[test]
    fn magnetic_circle_is_minus_one() {
        let h = holonomy(&magnetic_u1(1.0), &circle_through_origin(1.0), &TransportOptions::default()).unwrap();
        assert!((h.element.matrix[(0, 0)] + Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(h.error_estimate < 1e-9);
    }

    #[test]
    fn lie_euler_is_first_order() {
        let a = magnetic_u1(1.0);
        let g = uniform_loop(AmbientSpace::euclidean(2), vec![Segment::line(&[0.0, 0.0], &[1.0, 1.0]), Segment::line(&[1.0, 1.0], &[0.0, 0.0])]).unwrap();
        let r = crate::gauge::random_connection(5, AlgebraName::Su2, 2, 1, 1.0).unwrap();
        let p = convergence_order_probe(&r, &circle_through_origin(1.0), &[16, 32, 64, 128, 256], Method::LieEuler).unwrap();
        let order = p.order.unwrap();
        assert!((0.7..1.5).contains(&order), "{order}");
        let z = convergence_order_probe(&a, &g, &[8, 16, 32], Method::Rk4Projected).unwrap();
        assert!(z.exact);
    }

    #[test]
    fn bad_ladder_is_rejected() {
        let a = magnetic_u1(1.0);
        assert!(convergence_order_probe(&a, &circle_through_origin(1.0), &[8, 16], Method::Rk4Projected).is_err());
        assert!(convergence_order_probe(&a, &circle_through_origin(1.0), &[8, 16, 48], Method::Rk4Projected).is_err());
    }
}
