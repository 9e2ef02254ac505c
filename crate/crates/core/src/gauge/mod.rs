//! Matrix Lie algebras and groups (`u1`, `su2`, `sl2r`) and connection
//! one-forms on `ℝⁿ`.

mod connection;

use std::fmt;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use connection::{
    magnetic_u1, monomials, random_connection, Connection, GaugeField, PolynomialConnection,
    PunctureConnection, Term, EXCLUSION_RADIUS,
};

pub type Mat = DMatrix<Complex64>;

/// Group-membership budget for holonomy outputs.
pub const GROUP_TOL: f64 = 1e-8;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraName {
    U1,
    Su2,
    Sl2r,
}

impl AlgebraName {
    pub fn algebra(self) -> &'static LieAlgebra {
        LieAlgebra::get(self)
    }
}

impl fmt::Display for AlgebraName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgebraName::U1 => "u1",
            AlgebraName::Su2 => "su2",
            AlgebraName::Sl2r => "sl2r",
        })
    }
}

impl std::str::FromStr for AlgebraName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u1" => Ok(AlgebraName::U1),
            "su2" => Ok(AlgebraName::Su2),
            "sl2r" => Ok(AlgebraName::Sl2r),
            _ => Err(Error::Domain(format!("unknown algebra {s:?} (expected u1, su2 or sl2r)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LieAlgebra {
    pub name: AlgebraName,
    pub generators: Vec<Mat>,
}

fn mat2(a: [[Complex64; 2]; 2]) -> Mat {
    Mat::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl LieAlgebra {
    fn build(name: AlgebraName) -> LieAlgebra {
        let z = c(0.0);
        let h = 0.5;
        let generators = match name {
            AlgebraName::U1 => vec![Mat::from_element(1, 1, I)],
            AlgebraName::Su2 => vec![
                mat2([[z, I * h], [I * h, z]]),
                mat2([[z, c(h)], [c(-h), z]]),
                mat2([[I * h, z], [z, -I * h]]),
            ],
            AlgebraName::Sl2r => vec![
                mat2([[c(1.0), z], [z, c(-1.0)]]),
                mat2([[z, c(1.0)], [z, z]]),
                mat2([[z, z], [c(1.0), z]]),
            ],
        };
        LieAlgebra { name, generators }
    }

    pub fn get(name: AlgebraName) -> &'static LieAlgebra {
        static U1: OnceLock<LieAlgebra> = OnceLock::new();
        static SU2: OnceLock<LieAlgebra> = OnceLock::new();
        static SL2R: OnceLock<LieAlgebra> = OnceLock::new();
        let cell = match name {
            AlgebraName::U1 => &U1,
            AlgebraName::Su2 => &SU2,
            AlgebraName::Sl2r => &SL2R,
        };
        cell.get_or_init(|| LieAlgebra::build(name))
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Size `m` of the defining `m×m` matrices.
    pub fn size(&self) -> usize {
        self.generators[0].nrows()
    }

    /// `Σ_a x_a G_a`.
    pub fn element(&self, coeffs: &[f64]) -> Mat {
        let m = self.size();
        let mut out = Mat::zeros(m, m);
        self.element_into(coeffs, &mut out);
        out
    }

    pub fn element_into(&self, coeffs: &[f64], out: &mut Mat) {
        out.fill(c(0.0));
        for (g, &x) in self.generators.iter().zip(coeffs) {
            if x != 0.0 {
                *out += g * c(x);
            }
        }
    }

    /// Coordinates of `X` in the generator basis (the basis is orthogonal
    /// for the Frobenius inner product).
    pub fn coordinates(&self, x: &Mat) -> Vec<f64> {
        self.generators
            .iter()
            .map(|g| g.dotc(x).re / g.dotc(g).re)
            .collect()
    }

    /// `c[a][b][k]` with `[G_a, G_b] = Σ_k c_abk G_k`.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        let g = &self.generators;
        g.iter()
            .map(|a| g.iter().map(|b| self.coordinates(&bracket(a, b))).collect())
            .collect()
    }

    /// Largest Frobenius residual of `[G_a, G_b] - Σ c_abk G_k`.
    pub fn closure_residual(&self) -> f64 {
        let sc = self.structure_constants();
        let mut worst = 0.0f64;
        for (a, ga) in self.generators.iter().enumerate() {
            for (b, gb) in self.generators.iter().enumerate() {
                let r = bracket(ga, gb) - self.element(&sc[a][b]);
                worst = worst.max(r.norm());
            }
        }
        worst
    }

    /// Whether `X` lies in the algebra to within `tol`.
    pub fn contains(&self, x: &Mat, tol: f64) -> bool {
        x.nrows() == self.size()
            && x.ncols() == self.size()
            && (x - self.element(&self.coordinates(x))).norm() <= tol
    }
}

pub fn bracket(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

/// An element of the matrix group exponentiating an algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: Mat,
    pub algebra: AlgebraName,
}

impl GroupElement {
    pub fn identity(algebra: AlgebraName) -> GroupElement {
        let m = algebra.algebra().size();
        GroupElement {
            matrix: Mat::identity(m, m),
            algebra,
        }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
            algebra: self.algebra,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let matrix = match self.algebra {
            AlgebraName::U1 | AlgebraName::Su2 => self.matrix.adjoint(),
            AlgebraName::Sl2r => {
                let m = &self.matrix;
                let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
                mat2([[m[(1, 1)] / det, -m[(0, 1)] / det], [-m[(1, 0)] / det, m[(0, 0)] / det]])
            }
        };
        GroupElement {
            matrix,
            algebra: self.algebra,
        }
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.matrix;
        if m.nrows() == 1 {
            m[(0, 0)]
        } else {
            m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        }
    }

    /// Distance from the group: unitarity and unit determinant as relevant.
    pub fn residual(&self) -> f64 {
        let m = &self.matrix;
        match self.algebra {
            AlgebraName::U1 => (m[(0, 0)].norm() - 1.0).abs(),
            AlgebraName::Su2 => {
                (m.adjoint() * m - Mat::identity(2, 2)).norm() + (self.det() - c(1.0)).norm()
            }
            AlgebraName::Sl2r => {
                (self.det() - c(1.0)).norm() + m.iter().map(|z| z.im.abs()).sum::<f64>()
            }
        }
    }

    /// Nearest-point style re-projection onto the group.
    pub fn project(&mut self) {
        project_in_place(self.algebra, &mut self.matrix);
    }

    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    pub fn distance_to_identity(&self) -> f64 {
        let m = self.matrix.nrows();
        (&self.matrix - Mat::identity(m, m)).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

pub(crate) fn project_in_place(algebra: AlgebraName, m: &mut Mat) {
    match algebra {
        AlgebraName::U1 => {
            let z = m[(0, 0)];
            let r = z.norm();
            if r > 0.0 {
                m[(0, 0)] = z / r;
            }
        }
        AlgebraName::Su2 => {
            let a = (m[(0, 0)] + m[(1, 1)].conj()) * 0.5;
            let b = (m[(1, 0)] - m[(0, 1)].conj()) * 0.5;
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if n > 0.0 {
                let (a, b) = (a / n, b / n);
                m[(0, 0)] = a;
                m[(0, 1)] = -b.conj();
                m[(1, 0)] = b;
                m[(1, 1)] = a.conj();
            }
        }
        AlgebraName::Sl2r => {
            for z in m.iter_mut() {
                z.im = 0.0;
            }
            let det = m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].re * m[(1, 0)].re;
            if det > 0.0 {
                let s = det.sqrt();
                for z in m.iter_mut() {
                    z.re /= s;
                }
            }
        }
    }
}

/// Matrix exponential of an algebra element.
pub fn algebra_exp(algebra: AlgebraName, x: &Mat) -> Result<GroupElement> {
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("algebra element has non-finite entries".into()));
    }
    Ok(GroupElement {
        matrix: x.exp(),
        algebra,
    })
}
