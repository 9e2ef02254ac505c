use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loopcore::sets::{basepoint_preimage, zero_derivative_set, ClosedSetDescription, ROOT_TOL};
use crate::loopcore::segment::ParamMap;
use crate::loopcore::{concat_windows, reparametrize, sup_distance, Loop, Piece, Reparam, ReparamKind, Segment, Shape};
use crate::words::{match_paths, ArcLength, MATCH_SAMPLES, MATCH_TOL};

/// Knots of the tabulated back half of each reparametrization.
const THETA_KNOTS: usize = 4096;
/// Recomposition budget.
pub const RECOMPOSE_TOL: f64 = 1e-8;

/// `γ|[a,b]` re-affinized equals `(β⁻¹·β) ∘ ϑ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub window: (f64, f64),
    /// Turning parameter of the restricted loop.
    pub t_star: f64,
    /// `β⁻¹·β`, with `β` on `[0,½]`.
    pub retrazable: Loop,
    pub reparam: Reparam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub factors: Vec<Factor>,
    /// Sup distance between the recomposed loop and the input.
    pub recomposition_error: f64,
}

fn analytic(seg: &Segment) -> bool {
    match seg {
        Segment::Polynomial { .. } | Segment::Trigonometric { .. } | Segment::Constant { .. } => true,
        Segment::Composed { base, map } => matches!(map, ParamMap::Affine { .. }) && analytic(base),
        Segment::BumpRay { .. } => false,
    }
}

/// Cumulative arc length of a chain of pieces in global time.
struct Chain<'a> {
    pieces: &'a [Piece],
    arcs: Vec<ArcLength<'a>>,
    offsets: Vec<f64>,
}

impl<'a> Chain<'a> {
    fn new(pieces: &'a [Piece]) -> Self {
        let arcs: Vec<ArcLength> = pieces.iter().map(|p| ArcLength::new(&p.segment, 1024)).collect();
        let mut offsets = vec![0.0];
        for a in &arcs {
            offsets.push(offsets.last().unwrap() + a.total());
        }
        Chain { pieces, arcs, offsets }
    }

    fn total(&self) -> f64 {
        *self.offsets.last().unwrap()
    }

    fn length_at(&self, t: f64) -> f64 {
        let k = self.pieces.iter().position(|p| t <= p.end).unwrap_or(self.pieces.len() - 1);
        let p = &self.pieces[k];
        let u = ((t - p.start) / (p.end - p.start)).clamp(0.0, 1.0);
        self.offsets[k] + self.arcs[k].length_to(u)
    }

    fn time_at(&self, len: f64) -> f64 {
        if len <= 0.0 {
            return self.pieces[0].start;
        }
        let k = self
            .offsets
            .partition_point(|&o| o <= len)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        let p = &self.pieces[k];
        let u = self.arcs[k].invert(len - self.offsets[k]);
        p.start + (p.end - p.start) * u
    }
}

fn segments_of(pieces: &[Piece]) -> Vec<Segment> {
    pieces.iter().map(|p| (*p.segment).clone()).collect()
}

fn reversed_chain(pieces: &[Piece]) -> Vec<Segment> {
    pieces.iter().rev().map(|p| p.segment.reversed()).collect()
}

/// `β⁻¹·β` where `β(τ) = γ(t* τ)`.
fn retrazable(gamma: &Loop, front: &[Piece], t_star: f64) -> Result<Loop> {
    let mut pieces: Vec<Piece> = front
        .iter()
        .map(|p| Piece {
            start: 0.5 * p.start / t_star,
            end: if p.end == t_star { 0.5 } else { 0.5 * p.end / t_star },
            segment: p.segment.clone(),
        })
        .collect();
    for p in front.iter().rev() {
        pieces.push(Piece {
            start: if p.end == t_star { 0.5 } else { 1.0 - 0.5 * p.end / t_star },
            end: if p.start == 0.0 { 1.0 } else { 1.0 - 0.5 * p.start / t_star },
            segment: std::sync::Arc::new(p.segment.reversed()),
        });
    }
    Ok(Loop::from_pieces(gamma.space().clone(), pieces, None)?.with_label("retrazable"))
}

/// `ϑ` with `γ = (β⁻¹·β) ∘ ϑ`: affine onto `[0,½]` up to `t*`, then the
/// arc-length matching of the return leg against `β`, tabulated.
fn theta(front: &Chain, back: &Chain, t_star: f64) -> Result<Reparam> {
    let (lf, lb) = (front.total(), back.total());
    let mut values = Vec::with_capacity(THETA_KNOTS + 1);
    for k in 0..=THETA_KNOTS {
        let v = k as f64 / THETA_KNOTS as f64;
        let g = if k == 0 {
            0.0
        } else if k == THETA_KNOTS {
            1.0
        } else {
            let t = t_star + v * (1.0 - t_star);
            let travelled = back.length_at(t) * lf / lb;
            let tau = front.time_at(lf - travelled);
            (1.0 - tau / t_star).clamp(0.0, 1.0)
        };
        values.push(g);
    }
    for k in 1..values.len() {
        values[k] = values[k].max(values[k - 1]);
    }
    let r = Reparam {
        kind: ReparamKind::SmoothMonotone,
        knots: vec![[0.0, 0.0], [t_star, 0.5], [1.0, 1.0]],
        shapes: vec![Shape::Linear, Shape::pchip(values)],
    };
    r.validate()?;
    Ok(r)
}

fn candidates(component: &Loop) -> Vec<f64> {
    let j = zero_derivative_set(component, ROOT_TOL);
    let mut c: Vec<f64> = j.isolated_points.clone();
    c.extend(j.intervals.iter().flat_map(|&[a, b]| [a, b]));
    c.extend(component.breakpoints());
    c.retain(|&t| t > 0.0 && t < 1.0);
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

fn factor_component(gamma: &Loop, window: (f64, f64)) -> Result<Factor> {
    let component = gamma.restriction(window.0, window.1)?;
    for t_star in candidates(&component) {
        let front = component.pieces_between(0.0, t_star);
        let back = component.pieces_between(t_star, 1.0);
        if !match_paths(&segments_of(&back), &reversed_chain(&front), MATCH_TOL, MATCH_SAMPLES) {
            continue;
        }
        let beta_hits = basepoint_preimage(&retrazable(&component, &front, t_star)?, ROOT_TOL);
        if beta_hits.intervals.iter().any(|&[a, b]| a < 0.5 && b > 0.0)
            || beta_hits.isolated_points.iter().any(|&t| t > 0.0 && t < 0.5)
        {
            continue;
        }
        let (fc, bc) = (Chain::new(&front), Chain::new(&back));
        return Ok(Factor {
            window,
            t_star,
            retrazable: retrazable(&component, &front, t_star)?,
            reparam: theta(&fc, &bc, t_star)?,
        });
    }
    Err(Error::Unsupported(format!(
        "component [{}, {}] never retraces its image before t = 1",
        window.0, window.1
    )))
}

/// Splits `γ` at `I_γ` and writes every component as a reparametrized
/// `β⁻¹·β`. Refuses loops outside the analytic library, components with no
/// retracing, and results that fail to recompose within `1e-8`.
pub fn analytic_factorize(gamma: &Loop) -> Result<Factorization> {
    if let Some(p) = gamma.pieces().iter().find(|p| !analytic(&p.segment)) {
        return Err(Error::Unsupported(format!(
            "piece on [{}, {}] is not polynomial or trigonometric",
            p.start, p.end
        )));
    }
    let set: ClosedSetDescription = basepoint_preimage(gamma, ROOT_TOL);
    let factors = set
        .complement_components()
        .into_iter()
        .map(|w| factor_component(gamma, w))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Factorization {
        factors,
        recomposition_error: 0.0,
    };
    let back = recompose(gamma, &out)?;
    out.recomposition_error = sup_distance(&back, gamma, 1000)?;
    if out.recomposition_error > RECOMPOSE_TOL {
        return Err(Error::Unsupported(format!(
            "factorization recomposes only to {:.3e}",
            out.recomposition_error
        )));
    }
    Ok(out)
}

/// Places each `(β⁻¹·β) ∘ ϑ` on its window and the basepoint elsewhere.
pub fn recompose(gamma: &Loop, f: &Factorization) -> Result<Loop> {
    let trivial = Loop::trivial(gamma.space().clone());
    let mut parts = Vec::new();
    let mut windows = Vec::new();
    let mut cursor = 0.0;
    for factor in &f.factors {
        let (a, b) = factor.window;
        if a > cursor {
            parts.push(trivial.clone());
            windows.push((cursor, a));
        }
        parts.push(reparametrize(&factor.retrazable, &factor.reparam)?);
        windows.push((a, b));
        cursor = b;
    }
    if cursor < 1.0 || parts.is_empty() {
        parts.push(trivial);
        windows.push((cursor, 1.0));
    }
    concat_windows(&parts, &windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopcore::library::*;

    #[test]
    fn single_arc_factors_once() {
        let f = analytic_factorize(&single_arc()).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert!((f.factors[0].t_star - 1.0 / 3.0).abs() < 1e-12);
        assert!(f.recomposition_error < 1e-8, "{}", f.recomposition_error);
    }

    #[test]
    fn two_petal_factors_twice() {
        let f = analytic_factorize(&two_petal()).unwrap();
        assert_eq!(f.factors.len(), 2);
        assert!(f.recomposition_error < 1e-8, "{}", f.recomposition_error);
    }

    #[test]
    fn circle_is_refused() {
        assert!(matches!(analytic_factorize(&circle_through_origin(1.0)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn retrace_loop_factors_at_its_corner() {
        let f = analytic_factorize(&retrace_loop(&sample_path())).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0].t_star, 0.5);
    }
}
