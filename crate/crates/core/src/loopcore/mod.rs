//! Piecewise-smooth based loops in `ℝⁿ`: evaluation, concatenation,
//! inversion, generalized reparametrization, sitting instants and the sup
//! metric. The basepoint-preimage and stationary-set analyzers live in
//! [`sets`].

pub mod bump;
pub mod library;
pub mod poly;
pub mod reparam;
pub mod segment;
pub mod sets;

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dist, golden_max};
use crate::words::Word;
pub use reparam::{Reparam, ReparamKind};
pub use segment::{Harmonic, ParamMap, Segment, Shape};
use segment::lerp;

/// Allowed mismatch between consecutive segment endpoints.
pub const CONTINUITY_TOL: f64 = 1e-12;
/// Default number of uniform samples for [`sup_distance`].
pub const METRIC_SAMPLES: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    pub dim: usize,
    pub basepoint: Vec<f64>,
}

impl AmbientSpace {
    pub fn new(dim: usize, basepoint: Vec<f64>) -> Result<Self> {
        let s = AmbientSpace { dim, basepoint };
        s.validate()?;
        Ok(s)
    }

    /// `ℝⁿ` based at the origin.
    pub fn euclidean(dim: usize) -> Self {
        AmbientSpace {
            dim,
            basepoint: vec![0.0; dim],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidLoop("dimension must be ≥ 1".into()));
        }
        if self.basepoint.len() != self.dim || self.basepoint.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidLoop("basepoint must be a finite vector of length dim".into()));
        }
        Ok(())
    }

    fn same_as(&self, other: &AmbientSpace) -> bool {
        self.dim == other.dim && dist(&self.basepoint, &other.basepoint) <= CONTINUITY_TOL
    }
}

/// One smooth piece of a loop together with its parameter window.
#[derive(Debug, Clone)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub segment: Arc<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    TwoSided,
}

/// A piecewise-smooth loop based at `space.basepoint`.
///
/// Inversion is stored as an orientation flag so that inverting twice gives
/// back the identical representation; [`Loop::pieces`] materializes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "LoopDoc", try_from = "LoopDoc")]
pub struct Loop {
    space: AmbientSpace,
    breakpoints: Vec<f64>,
    segments: Vec<Arc<Segment>>,
    label: Option<String>,
    word: Option<Word>,
    reversed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LoopDoc {
    space: AmbientSpace,
    breakpoints: Vec<f64>,
    segments: Vec<Segment>,
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    word: Option<Word>,
}

impl From<Loop> for LoopDoc {
    fn from(l: Loop) -> LoopDoc {
        let pieces = l.pieces();
        let mut breakpoints = vec![0.0];
        breakpoints.extend(pieces.iter().map(|p| p.end));
        LoopDoc {
            space: l.space,
            breakpoints,
            segments: pieces.iter().map(|p| (*p.segment).clone()).collect(),
            label: l.label,
            word: l.word,
        }
    }
}

impl TryFrom<LoopDoc> for Loop {
    type Error = Error;
    fn try_from(d: LoopDoc) -> Result<Loop> {
        let mut l = Loop::new(
            d.space,
            d.breakpoints,
            d.segments.into_iter().map(Arc::new).collect(),
            d.label,
        )?;
        l.word = d.word;
        Ok(l)
    }
}

impl Loop {
    pub fn new(
        space: AmbientSpace,
        breakpoints: Vec<f64>,
        segments: Vec<Arc<Segment>>,
        label: Option<String>,
    ) -> Result<Loop> {
        let l = Loop {
            space,
            breakpoints,
            segments,
            label,
            word: None,
            reversed: false,
        };
        l.validate()?;
        Ok(l)
    }

    /// Builds a loop from pieces whose windows tile `[0,1]` in order.
    pub fn from_pieces(space: AmbientSpace, pieces: Vec<Piece>, label: Option<String>) -> Result<Loop> {
        if pieces.is_empty() {
            return Ok(Loop::trivial(space));
        }
        let mut breakpoints = vec![0.0];
        breakpoints.extend(pieces.iter().map(|p| p.end));
        *breakpoints.last_mut().unwrap() = 1.0;
        Loop::new(space, breakpoints, pieces.into_iter().map(|p| p.segment).collect(), label)
    }

    /// The constant loop at the basepoint.
    pub fn trivial(space: AmbientSpace) -> Loop {
        let point = space.basepoint.clone();
        Loop {
            space,
            breakpoints: vec![0.0, 1.0],
            segments: vec![Arc::new(Segment::Constant { point })],
            label: Some("trivial".into()),
            word: None,
            reversed: false,
        }
    }

    fn validate(&self) -> Result<()> {
        self.space.validate()?;
        let bad = |m: String| Err(Error::InvalidLoop(m));
        let r = self.segments.len();
        if r == 0 {
            return bad("loop needs at least one segment".into());
        }
        if self.breakpoints.len() != r + 1 {
            return bad(format!("{} breakpoints for {} segments", self.breakpoints.len(), r));
        }
        if self.breakpoints[0] != 0.0 || self.breakpoints[r] != 1.0 {
            return bad("breakpoints must start at 0 and end at 1".into());
        }
        if self.breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("breakpoints must be strictly increasing".into());
        }
        for (i, s) in self.segments.iter().enumerate() {
            s.validate().map_err(|m| Error::InvalidLoop(format!("segment {i}: {m}")))?;
            if s.dim() != self.space.dim {
                return bad(format!("segment {i} has dimension {}", s.dim()));
            }
        }
        let close = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= CONTINUITY_TOL * x.abs().max(1.0))
        };
        let p = &self.space.basepoint;
        if !close(&self.segments[0].start(), p) {
            return bad("first segment does not start at the basepoint".into());
        }
        if !close(&self.segments[r - 1].end(), p) {
            return bad("last segment does not end at the basepoint".into());
        }
        for i in 0..r - 1 {
            if !close(&self.segments[i].end(), &self.segments[i + 1].start()) {
                return bad(format!("discontinuity at breakpoint {}", self.breakpoints[i + 1]));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.space.basepoint
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Loop {
        self.label = Some(label.into());
        self
    }

    pub fn word(&self) -> Option<&Word> {
        self.word.as_ref()
    }

    pub fn with_word(mut self, word: Word) -> Loop {
        self.word = Some(word);
        self
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Materialized breakpoints `0 = t_0 < … < t_r = 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        b.extend(self.pieces().iter().map(|p| p.end));
        b
    }

    /// Materialized smooth pieces in parameter order.
    pub fn pieces(&self) -> Vec<Piece> {
        let r = self.segments.len();
        if !self.reversed {
            return (0..r)
                .map(|i| Piece {
                    start: self.breakpoints[i],
                    end: self.breakpoints[i + 1],
                    segment: self.segments[i].clone(),
                })
                .collect();
        }
        (0..r)
            .rev()
            .map(|i| Piece {
                start: if i + 1 == r { 0.0 } else { 1.0 - self.breakpoints[i + 1] },
                end: if i == 0 { 1.0 } else { 1.0 - self.breakpoints[i] },
                segment: Arc::new(self.segments[i].reversed()),
            })
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.segments.iter().all(|s| {
            s.is_constant() && dist(&s.start(), &self.space.basepoint) <= CONTINUITY_TOL
        })
    }

    fn check_param(t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("parameter {t} outside [0,1]")));
        }
        Ok(())
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let r = self.segments.len();
        let i = self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1).min(r - 1);
        let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let u = if t == b { 1.0 } else { ((t - a) / (b - a)).clamp(0.0, 1.0) };
        (i, u)
    }

    /// `γ(t)`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        Self::check_param(t)?;
        let t = if self.reversed { 1.0 - t } else { t };
        let (i, u) = self.locate(t);
        Ok(self.segments[i].eval(u))
    }

    /// Derivative of `γ` at `t` from the requested side.
    pub fn deriv(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        Self::check_param(t)?;
        if self.reversed {
            let flipped = match side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
                Side::TwoSided => Side::TwoSided,
            };
            let mut d = self.forward_deriv(1.0 - t, flipped)?;
            d.iter_mut().for_each(|x| *x = -*x);
            return Ok(d);
        }
        self.forward_deriv(t, side)
    }

    fn one_sided(&self, t: f64, left: bool) -> Result<Vec<f64>> {
        let r = self.segments.len();
        let i = if left {
            if t <= 0.0 {
                return Err(Error::Domain("no left derivative at t = 0".into()));
            }
            self.breakpoints.partition_point(|&b| b < t).saturating_sub(1).min(r - 1)
        } else {
            if t >= 1.0 {
                return Err(Error::Domain("no right derivative at t = 1".into()));
            }
            self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1).min(r - 1)
        };
        let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let u = ((t - a) / (b - a)).clamp(0.0, 1.0);
        let mut d = self.segments[i].deriv(u);
        d.iter_mut().for_each(|x| *x /= b - a);
        Ok(d)
    }

    fn forward_deriv(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        match side {
            Side::Left => self.one_sided(t, true),
            Side::Right => self.one_sided(t, false),
            Side::TwoSided => {
                if t == 0.0 {
                    return self.one_sided(t, false);
                }
                if t == 1.0 {
                    return self.one_sided(t, true);
                }
                let l = self.one_sided(t, true)?;
                let r = self.one_sided(t, false)?;
                let scale = l.iter().chain(&r).fold(1.0f64, |m, x| m.max(x.abs()));
                if dist(&l, &r) > 1e-9 * scale {
                    return Err(Error::Corner { t });
                }
                Ok(r)
            }
        }
    }

    /// `γ⁻¹(t) = γ(1 - t)`.
    pub fn invert(&self) -> Loop {
        let mut l = self.clone();
        l.reversed = !l.reversed;
        l.word = None;
        l.label = self.label.as_ref().map(|s| {
            s.strip_suffix("^-1")
                .map(str::to_owned)
                .unwrap_or_else(|| format!("{s}^-1"))
        });
        l
    }

    /// Pointwise scaling about the origin.
    pub fn scaled(&self, c: f64) -> Result<Loop> {
        let space = AmbientSpace {
            dim: self.space.dim,
            basepoint: self.space.basepoint.iter().map(|x| x * c).collect(),
        };
        let pieces = self
            .pieces()
            .into_iter()
            .map(|p| Piece {
                segment: Arc::new(p.segment.scaled(c)),
                ..p
            })
            .collect();
        Loop::from_pieces(space, pieces, self.label.clone())
    }

    /// The pieces of `γ` over `[a, b] ⊂ [0,1]`, windows kept in global time.
    pub fn pieces_between(&self, a: f64, b: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        for p in self.pieces() {
            if p.end <= a || p.start >= b {
                continue;
            }
            let lo = p.start.max(a);
            let hi = p.end.min(b);
            if hi <= lo {
                continue;
            }
            let w = p.end - p.start;
            let ua = if lo == p.start { 0.0 } else { (lo - p.start) / w };
            let ub = if hi == p.end { 1.0 } else { (hi - p.start) / w };
            out.push(Piece {
                start: lo,
                end: hi,
                segment: Arc::new(p.segment.restricted(ua, ub)),
            });
        }
        out
    }

    /// `γ|[a,b]` re-affinized onto `[0,1]`, as a loop based at `γ(a)`.
    pub fn restriction(&self, a: f64, b: f64) -> Result<Loop> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::Domain(format!("bad restriction window [{a}, {b}]")));
        }
        let start = self.eval(a)?;
        let pieces: Vec<Piece> = self
            .pieces_between(a, b)
            .into_iter()
            .map(|p| Piece {
                start: if p.start == a { 0.0 } else { (p.start - a) / (b - a) },
                end: if p.end == b { 1.0 } else { (p.end - a) / (b - a) },
                segment: p.segment,
            })
            .collect();
        let space = AmbientSpace {
            dim: self.space.dim,
            basepoint: start,
        };
        Loop::from_pieces(space, pieces, None)
    }

    /// Writes `samples + 1` rows `t,x1..xn` at `t = k / samples`.
    pub fn write_csv<W: Write>(&self, samples: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim()).map(|k| format!("x{k}")));
        w.write_record(&header).map_err(csv_err)?;
        for k in 0..=samples {
            let t = k as f64 / samples as f64;
            let mut row = vec![format!("{t}")];
            row.extend(self.eval(t)?.iter().map(|x| format!("{x}")));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `γ₂·γ₁`: runs `γ₁` on `[0,½]`, then `γ₂` on `[½,1]`.
pub fn concat(gamma2: &Loop, gamma1: &Loop) -> Result<Loop> {
    if !gamma1.space.same_as(&gamma2.space) {
        return Err(Error::Incompatible(format!(
            "basepoints {:?} and {:?} differ",
            gamma1.space.basepoint, gamma2.space.basepoint
        )));
    }
    let mut pieces: Vec<Piece> = gamma1
        .pieces()
        .into_iter()
        .map(|p| Piece {
            start: 0.5 * p.start,
            end: 0.5 * p.end,
            segment: p.segment,
        })
        .collect();
    pieces.extend(gamma2.pieces().into_iter().map(|p| Piece {
        start: 0.5 * (p.start + 1.0),
        end: 0.5 * (p.end + 1.0),
        segment: p.segment,
    }));
    let label = match (gamma2.label(), gamma1.label()) {
        (Some(a), Some(b)) => Some(format!("({a})·({b})")),
        _ => None,
    };
    Loop::from_pieces(gamma1.space.clone(), pieces, label)
}

/// Places `parts` (all based at the same point) on the given windows of
/// `[0,1]`, in order. Windows must tile `[0,1]`.
pub fn concat_windows(parts: &[Loop], windows: &[(f64, f64)]) -> Result<Loop> {
    if parts.is_empty() || parts.len() != windows.len() {
        return Err(Error::Incompatible("need one window per part".into()));
    }
    let space = parts[0].space.clone();
    let mut pieces = Vec::new();
    for (part, &(a, b)) in parts.iter().zip(windows) {
        if !part.space.same_as(&space) {
            return Err(Error::Incompatible("parts have different basepoints".into()));
        }
        for p in part.pieces() {
            pieces.push(Piece {
                start: lerp(a, b, p.start),
                end: lerp(a, b, p.end),
                segment: p.segment,
            });
        }
    }
    Loop::from_pieces(space, pieces, None)
}

/// `γ ∘ φ`.
pub fn reparametrize(gamma: &Loop, phi: &Reparam) -> Result<Loop> {
    phi.validate()?;
    let src = gamma.pieces();
    let bps: Vec<f64> = std::iter::once(0.0).chain(src.iter().map(|p| p.end)).collect();
    let locate = |y: f64| {
        src.iter()
            .position(|p| y >= p.start && y <= p.end)
            .unwrap_or(src.len() - 1)
    };
    let mut pieces = Vec::new();
    for (k, shape) in phi.shapes.iter().enumerate() {
        let ([s0, y0], [s1, y1]) = (phi.knots[k], phi.knots[k + 1]);
        if y0 == y1 {
            let point = gamma.eval(y0)?;
            pieces.push(Piece {
                start: s0,
                end: s1,
                segment: Arc::new(Segment::Constant { point }),
            });
            continue;
        }
        // split the piece where φ crosses a breakpoint of γ
        let mut cuts = vec![0.0];
        for &t in bps.iter().filter(|&&t| t > y0 && t < y1) {
            cuts.push(shape.inverse((t - y0) / (y1 - y0)));
        }
        cuts.push(1.0);
        for w in cuts.windows(2) {
            let (va, vb) = (w[0], w[1]);
            let (sa, sb) = (lerp(s0, s1, va), lerp(s0, s1, vb));
            if !(sb > sa) {
                continue;
            }
            let ymid = y0 + (y1 - y0) * shape.value(0.5 * (va + vb));
            let j = locate(ymid);
            let (lo, hi) = (src[j].start, src[j].end);
            let map = if *shape == Shape::Linear {
                let ya = y0 + (y1 - y0) * va;
                let yb = if vb == 1.0 { y1 } else { y0 + (y1 - y0) * vb };
                ParamMap::Affine {
                    start: ((ya - lo) / (hi - lo)).clamp(0.0, 1.0),
                    end: ((yb - lo) / (hi - lo)).clamp(0.0, 1.0),
                }
            } else {
                ParamMap::Shaped {
                    window: [va, vb],
                    range: [y0, y1],
                    target: [lo, hi],
                    shape: shape.clone(),
                }
            };
            pieces.push(Piece {
                start: sa,
                end: sb,
                segment: Arc::new(Segment::Composed {
                    base: src[j].segment.clone(),
                    map,
                }),
            });
        }
    }
    Loop::from_pieces(gamma.space.clone(), pieces, gamma.label.clone())
}

/// Reparametrizes `γ` so that it sits at the basepoint on `[0,ε] ∪ [1-ε,1]`.
pub fn make_sitting(gamma: &Loop, epsilon: f64) -> Result<Loop> {
    let phi = Reparam::sitting(epsilon)?;
    if gamma.is_trivial() {
        return Ok(gamma.clone());
    }
    reparametrize(gamma, &phi)
}

/// `sup_t |γ₁(t) - γ₂(t)|`, maximized over the merged breakpoints, a
/// uniform grid of `samples + 1` points, and a polished scan of every cell of
/// the merged partition.
pub fn sup_distance(gamma1: &Loop, gamma2: &Loop, samples: usize) -> Result<f64> {
    if gamma1.dim() != gamma2.dim() {
        return Err(Error::Incompatible("loops live in different dimensions".into()));
    }
    let gap = |t: f64| dist(&gamma1.eval(t).unwrap(), &gamma2.eval(t).unwrap());
    let mut cuts: Vec<f64> = gamma1.breakpoints();
    cuts.extend(gamma2.breakpoints());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best = 0.0f64;
    for &t in &cuts {
        best = best.max(gap(t));
    }
    let samples = samples.max(1);
    for k in 0..=samples {
        best = best.max(gap(k as f64 / samples as f64));
    }
    const SCAN: usize = 64;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut arg = 0;
        let mut top = f64::NEG_INFINITY;
        for j in 0..=SCAN {
            let v = gap(lerp(a, b, j as f64 / SCAN as f64));
            if v > top {
                top = v;
                arg = j;
            }
        }
        best = best.max(top);
        let lo = lerp(a, b, arg.saturating_sub(1) as f64 / SCAN as f64);
        let hi = lerp(a, b, (arg + 1).min(SCAN) as f64 / SCAN as f64);
        let (_, v) = golden_max(gap, lo, hi, 80);
        best = best.max(v);
    }
    Ok(best)
}
