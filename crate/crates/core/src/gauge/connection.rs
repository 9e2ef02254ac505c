use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{bracket, AlgebraName, Mat};
use crate::error::{Error, Result};

/// Loops must stay this far from the puncture.
pub const EXCLUSION_RADIUS: f64 = 0.05;
const FD_STEP: f64 = 1e-3;

/// A Lie-algebra valued one-form `A = Σ_j A_j dx_j` on `ℝⁿ`.
pub trait GaugeField: Send + Sync {
    fn algebra(&self) -> AlgebraName;
    fn dim(&self) -> usize;

    /// Generator coefficients of every component: `out[j * m + a]` is the
    /// coefficient of generator `a` in `A_j(x)`.
    fn coeffs_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Generator coefficients of `Σ_j A_j(x) v_j`.
    fn contract_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.algebra().algebra().dim();
        let mut all = vec![0.0; m * self.dim()];
        self.coeffs_into(x, &mut all)?;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &vj) in v.iter().enumerate() {
            for a in 0..m {
                out[a] += all[j * m + a] * vj;
            }
        }
        Ok(())
    }

    /// `[A_1(x), …, A_n(x)]` as matrices.
    fn eval(&self, x: &[f64]) -> Result<Vec<Mat>> {
        let alg = self.algebra().algebra();
        let m = alg.dim();
        let mut all = vec![0.0; m * self.dim()];
        self.coeffs_into(x, &mut all)?;
        Ok(all.chunks(m).map(|c| alg.element(c)).collect())
    }

    /// `F_ij = ∂_i A_j - ∂_j A_i + [A_i, A_j]`, by extrapolated central
    /// differences unless overridden.
    fn curvature(&self, x: &[f64], i: usize, j: usize) -> Result<Mat> {
        check_axes(self.dim(), i, j)?;
        let central = |axis: usize, comp: usize, h: f64| -> Result<Mat> {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[axis] += h;
            xm[axis] -= h;
            let ap = self.eval(&xp)?;
            let am = self.eval(&xm)?;
            Ok((&ap[comp] - &am[comp]) * num_complex::Complex64::new(0.5 / h, 0.0))
        };
        let third = num_complex::Complex64::new(1.0 / 3.0, 0.0);
        let d = |axis: usize, comp: usize| -> Result<Mat> {
            let coarse = central(axis, comp, FD_STEP)?;
            let fine = central(axis, comp, 0.5 * FD_STEP)?;
            Ok((fine * num_complex::Complex64::new(4.0, 0.0) - coarse) * third)
        };
        let a = self.eval(x)?;
        Ok(d(i, j)? - d(j, i)? + bracket(&a[i], &a[j]))
    }

    /// True when the components are polynomials in the coordinates.
    fn is_polynomial(&self) -> bool;
}

fn check_axes(n: usize, i: usize, j: usize) -> Result<()> {
    if i == j || i >= n || j >= n {
        return Err(Error::Domain(format!("curvature needs distinct axes below {n}, got {i}, {j}")));
    }
    Ok(())
}

/// One monomial `value · Π x_k^{exponents_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub value: f64,
}

impl Term {
    fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .fold(self.value, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }

    /// `∂/∂x_axis`, or `None` when it vanishes.
    fn derivative(&self, axis: usize) -> Option<Term> {
        let e = self.exponents[axis];
        if e == 0 {
            return None;
        }
        let mut exponents = self.exponents.clone();
        exponents[axis] -= 1;
        Some(Term {
            exponents,
            value: self.value * e as f64,
        })
    }
}

/// Components with polynomial generator coefficients:
/// `coefficients[j][a]` lists the terms of the coefficient of generator `a`
/// in `A_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialConnection {
    pub algebra: AlgebraName,
    pub degree: u32,
    pub coefficients: Vec<Vec<Vec<Term>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PolynomialConnection {
    pub fn new(
        algebra: AlgebraName,
        degree: u32,
        coefficients: Vec<Vec<Vec<Term>>>,
    ) -> Result<PolynomialConnection> {
        let c = PolynomialConnection {
            algebra,
            degree,
            coefficients,
            seed: None,
            label: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.coefficients.len();
        let m = self.algebra.algebra().dim();
        if n == 0 {
            return Err(Error::Domain("connection needs at least one component".into()));
        }
        for (j, comp) in self.coefficients.iter().enumerate() {
            if comp.len() != m {
                return Err(Error::Domain(format!(
                    "component {j} has {} generator blocks, {} expects {m}",
                    comp.len(),
                    self.algebra
                )));
            }
            for term in comp.iter().flatten() {
                if term.exponents.len() != n {
                    return Err(Error::Domain(format!("monomial {:?} is not in {n} variables", term.exponents)));
                }
                if term.exponents.iter().sum::<u32>() > self.degree {
                    return Err(Error::Domain(format!(
                        "monomial {:?} exceeds degree bound {}",
                        term.exponents, self.degree
                    )));
                }
                if !term.value.is_finite() {
                    return Err(Error::Domain("non-finite connection coefficient".into()));
                }
            }
        }
        Ok(())
    }

    /// The zero connection.
    pub fn zero(algebra: AlgebraName, dim: usize) -> PolynomialConnection {
        let m = algebra.algebra().dim();
        PolynomialConnection {
            algebra,
            degree: 0,
            coefficients: vec![vec![vec![]; m]; dim],
            seed: None,
            label: Some("zero".into()),
        }
    }

    /// `Σ_j C_j dx_j` with constant algebra coordinates `coords[j]`.
    pub fn constant(algebra: AlgebraName, coords: &[Vec<f64>]) -> Result<PolynomialConnection> {
        let n = coords.len();
        let coefficients = coords
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&v| {
                        if v == 0.0 {
                            vec![]
                        } else {
                            vec![Term {
                                exponents: vec![0; n],
                                value: v,
                            }]
                        }
                    })
                    .collect()
            })
            .collect();
        let mut c = PolynomialConnection::new(algebra, 0, coefficients)?;
        c.label = Some("constant".into());
        Ok(c)
    }

    fn derivative_coeffs(&self, x: &[f64], comp: usize, axis: usize) -> Vec<f64> {
        self.coefficients[comp]
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .filter_map(|t| t.derivative(axis))
                    .map(|t| t.eval(x))
                    .sum()
            })
            .collect()
    }
}

impl GaugeField for PolynomialConnection {
    fn algebra(&self) -> AlgebraName {
        self.algebra
    }

    fn dim(&self) -> usize {
        self.coefficients.len()
    }

    fn coeffs_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.algebra.algebra().dim();
        for (j, comp) in self.coefficients.iter().enumerate() {
            for (a, terms) in comp.iter().enumerate() {
                out[j * m + a] = terms.iter().map(|t| t.eval(x)).sum();
            }
        }
        Ok(())
    }

    fn contract_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (comp, &vj) in self.coefficients.iter().zip(v) {
            if vj == 0.0 {
                continue;
            }
            for (o, terms) in out.iter_mut().zip(comp) {
                for t in terms {
                    *o += t.eval(x) * vj;
                }
            }
        }
        Ok(())
    }

    /// Exact: derivatives of the stored monomials plus the bracket.
    fn curvature(&self, x: &[f64], i: usize, j: usize) -> Result<Mat> {
        check_axes(self.dim(), i, j)?;
        let alg = self.algebra.algebra();
        let dij = self.derivative_coeffs(x, j, i);
        let dji = self.derivative_coeffs(x, i, j);
        let diff: Vec<f64> = dij.iter().zip(&dji).map(|(a, b)| a - b).collect();
        let a = self.eval(x)?;
        Ok(alg.element(&diff) + bracket(&a[i], &a[j]))
    }

    fn is_polynomial(&self) -> bool {
        true
    }
}

/// Exponent tuples of total degree `≤ degree` in `n` variables, graded
/// lexicographic.
pub fn monomials(n: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            fill(n, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree {
        fill(n, total, &mut Vec::new(), &mut out);
    }
    out
}

/// Coefficients drawn i.i.d. from `N(0, scale²)` per component, generator
/// and monomial, in that order, from a ChaCha20 stream seeded by `seed`.
pub fn random_connection(
    seed: u64,
    algebra: AlgebraName,
    dim: usize,
    degree: u32,
    scale: f64,
) -> Result<PolynomialConnection> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("scale {scale} must be finite and ≥ 0")));
    }
    let normal = Normal::new(0.0, scale).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let m = algebra.algebra().dim();
    let monos = monomials(dim, degree);
    let coefficients = (0..dim)
        .map(|_| {
            (0..m)
                .map(|_| {
                    monos
                        .iter()
                        .map(|e| Term {
                            exponents: e.clone(),
                            value: normal.sample(&mut rng),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(PolynomialConnection {
        algebra,
        degree,
        coefficients,
        seed: Some(seed),
        label: Some(format!("random({algebra},deg={degree},seed={seed})")),
    })
}

/// `A = i(-(B/2) y dx + (B/2) x dy)`, uniform field strength `B`.
pub fn magnetic_u1(b: f64) -> PolynomialConnection {
    let term = |ex: [u32; 2], value: f64| Term {
        exponents: ex.to_vec(),
        value,
    };
    PolynomialConnection {
        algebra: AlgebraName::U1,
        degree: 1,
        coefficients: vec![vec![vec![term([0, 1], -0.5 * b)]], vec![vec![term([1, 0], 0.5 * b)]]],
        seed: None,
        label: Some(format!("u1 magnetic B={b}")),
    }
}

/// Flat `u1` connection `A = iα(x dy - y dx)/(x² + y²)` on the punctured
/// plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PunctureConnection {
    pub alpha: f64,
    #[serde(default = "default_exclusion")]
    pub exclusion_radius: f64,
}

fn default_exclusion() -> f64 {
    EXCLUSION_RADIUS
}

impl PunctureConnection {
    pub fn new(alpha: f64) -> PunctureConnection {
        PunctureConnection {
            alpha,
            exclusion_radius: EXCLUSION_RADIUS,
        }
    }
}

impl GaugeField for PunctureConnection {
    fn algebra(&self) -> AlgebraName {
        AlgebraName::U1
    }

    fn dim(&self) -> usize {
        2
    }

    fn coeffs_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2.sqrt() < self.exclusion_radius {
            return Err(Error::Singularity {
                point: x.to_vec(),
                radius: self.exclusion_radius,
            });
        }
        out[0] = -self.alpha * x[1] / r2;
        out[1] = self.alpha * x[0] / r2;
        Ok(())
    }

    fn is_polynomial(&self) -> bool {
        false
    }
}

/// Any connection the CLI can read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Connection {
    Polynomial(PolynomialConnection),
    Puncture { puncture: PunctureConnection },
}

impl Connection {
    fn inner(&self) -> &dyn GaugeField {
        match self {
            Connection::Polynomial(p) => p,
            Connection::Puncture { puncture } => puncture,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Connection::Polynomial(p) => p.validate(),
            Connection::Puncture { puncture } => {
                if puncture.alpha.is_finite() && puncture.exclusion_radius > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain("puncture needs finite alpha and positive radius".into()))
                }
            }
        }
    }
}

impl GaugeField for Connection {
    fn algebra(&self) -> AlgebraName {
        self.inner().algebra()
    }
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn coeffs_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner().coeffs_into(x, out)
    }
    fn contract_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner().contract_into(x, v, out)
    }
    fn curvature(&self, x: &[f64], i: usize, j: usize) -> Result<Mat> {
        self.inner().curvature(x, i, j)
    }
    fn is_polynomial(&self) -> bool {
        self.inner().is_polynomial()
    }
}
