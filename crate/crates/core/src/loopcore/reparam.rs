use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use super::segment::Shape;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReparamKind {
    Affine,
    SmoothMonotone,
    Sitting,
}

/// A generalized reparametrization `φ: [0,1] → [0,1]`: piecewise-smooth,
/// monotone non-decreasing, fixing both endpoints. Piece `k` runs from knot
/// `(s_k, y_k)` to `(s_{k+1}, y_{k+1})` with profile `shapes[k]`. Flat pieces
/// (`y_k = y_{k+1}`) are allowed, so `φ` need not be a homeomorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reparam {
    pub kind: ReparamKind,
    pub knots: Vec<[f64; 2]>,
    pub shapes: Vec<Shape>,
}

impl Reparam {
    pub fn identity() -> Reparam {
        Reparam {
            kind: ReparamKind::Affine,
            knots: vec![[0.0, 0.0], [1.0, 1.0]],
            shapes: vec![Shape::Linear],
        }
    }

    /// Piecewise-linear through the given knots.
    pub fn piecewise_affine(knots: Vec<[f64; 2]>) -> Result<Reparam> {
        let shapes = vec![Shape::Linear; knots.len().saturating_sub(1)];
        let r = Reparam {
            kind: ReparamKind::Affine,
            knots,
            shapes,
        };
        r.validate()?;
        Ok(r)
    }

    /// `φ(t) = t^p`.
    pub fn power(p: f64) -> Result<Reparam> {
        let r = Reparam {
            kind: ReparamKind::SmoothMonotone,
            knots: vec![[0.0, 0.0], [1.0, 1.0]],
            shapes: vec![Shape::Power { exponent: p }],
        };
        r.validate()?;
        Ok(r)
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Reparam> {
        let r = Reparam {
            kind: ReparamKind::SmoothMonotone,
            knots: vec![[0.0, 0.0], [1.0, 1.0]],
            shapes: vec![Shape::Polynomial {
                coeffs: Polynomial::new(coeffs),
            }],
        };
        r.validate()?;
        Ok(r)
    }

    /// Flat at 0 on `[0, ε]`, flat at 1 on `[1-ε, 1]`, flat-step transition
    /// in between.
    pub fn sitting(epsilon: f64) -> Result<Reparam> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::Domain(format!("sitting epsilon {epsilon} not in (0, 1/2)")));
        }
        let r = Reparam {
            kind: ReparamKind::Sitting,
            knots: vec![[0.0, 0.0], [epsilon, 0.0], [1.0 - epsilon, 1.0], [1.0, 1.0]],
            shapes: vec![Shape::Linear, Shape::FlatStep, Shape::Linear],
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidReparam(m));
        if self.knots.len() < 2 || self.shapes.len() + 1 != self.knots.len() {
            return bad("need ≥ 2 knots and one shape per piece".into());
        }
        if self.knots[0] != [0.0, 0.0] || *self.knots.last().unwrap() != [1.0, 1.0] {
            return bad("φ must fix 0 and 1".into());
        }
        for w in self.knots.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return bad(format!("knot parameters not increasing at {}", w[0][0]));
            }
            if w[1][1] < w[0][1] {
                return bad(format!("φ decreases between {} and {}", w[0][0], w[1][0]));
            }
            if !(w[0][1] >= 0.0 && w[1][1] <= 1.0) {
                return bad("φ leaves [0,1]".into());
            }
        }
        for s in &self.shapes {
            s.validate().map_err(Error::InvalidReparam)?;
        }
        if self.kind == ReparamKind::Affine && self.shapes.iter().any(|s| *s != Shape::Linear) {
            return bad("affine reparametrization with a non-linear piece".into());
        }
        Ok(())
    }

    fn piece(&self, t: f64) -> usize {
        let k = self.knots.partition_point(|k| k[0] <= t);
        k.saturating_sub(1).min(self.shapes.len() - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let k = self.piece(t);
        let ([s0, y0], [s1, y1]) = (self.knots[k], self.knots[k + 1]);
        if y0 == y1 {
            return y0;
        }
        let v = (t - s0) / (s1 - s0);
        y0 + (y1 - y0) * self.shapes[k].value(v)
    }

    pub fn rate(&self, t: f64) -> f64 {
        let k = self.piece(t.clamp(0.0, 1.0));
        let ([s0, y0], [s1, y1]) = (self.knots[k], self.knots[k + 1]);
        let v = (t - s0) / (s1 - s0);
        (y1 - y0) / (s1 - s0) * self.shapes[k].rate(v)
    }
}
