//! The basepoint preimage `I_γ` and the stationary set `J_γ`, described as
//! finitely many closed intervals plus isolated points.

use serde::{Deserialize, Serialize};

use super::bump::bump;
use super::segment::{lerp, ParamMap, Segment, Shape};
use super::{AmbientSpace, Loop, Piece, Reparam, Side};
use crate::error::{Error, Result};
use crate::numeric::{dist, golden_min, norm};

/// Default absolute tolerance for root isolation.
pub const ROOT_TOL: f64 = 1e-10;
const SCAN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedSetDescription {
    pub intervals: Vec<[f64; 2]>,
    pub isolated_points: Vec<f64>,
    pub tolerance: f64,
    pub exactness: Exactness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ClosedSetDescription {
    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&[a, b]| a <= t && t <= b)
            || self.isolated_points.contains(&t)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.isolated_points.is_empty()
    }

    /// Intervals of positive length.
    pub fn nontrivial_intervals(&self) -> Vec<[f64; 2]> {
        self.intervals.iter().copied().filter(|[a, b]| b > a).collect()
    }

    /// Connected components of the complement in `[0,1]`, in order.
    pub fn complement_components(&self) -> Vec<(f64, f64)> {
        let mut marks: Vec<(f64, f64)> = self.intervals.iter().map(|&[a, b]| (a, b)).collect();
        marks.extend(self.isolated_points.iter().map(|&p| (p, p)));
        marks.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out = Vec::new();
        let mut cursor = 0.0;
        let mut started = false;
        for (a, b) in marks {
            if !started {
                if a > 0.0 {
                    out.push((0.0, a));
                }
                started = true;
            } else if a > cursor {
                out.push((cursor, a));
            }
            cursor = cursor.max(b);
        }
        if !started {
            return vec![(0.0, 1.0)];
        }
        if cursor < 1.0 {
            out.push((cursor, 1.0));
        }
        out
    }
}

/// Zero set of a segment-level function on `[0,1]`.
#[derive(Debug, Clone, Default)]
pub(crate) struct LocalSet {
    pub intervals: Vec<[f64; 2]>,
    pub points: Vec<f64>,
    pub exact: bool,
}

impl LocalSet {
    fn exact(points: Vec<f64>) -> Self {
        LocalSet {
            intervals: vec![],
            points,
            exact: true,
        }
    }

    fn whole() -> Self {
        LocalSet {
            intervals: vec![[0.0, 1.0]],
            points: vec![],
            exact: true,
        }
    }
}

fn common_polynomial_roots(
    comps: &[super::poly::Polynomial],
    tol: f64,
) -> LocalSet {
    let scale = |p: &super::poly::Polynomial| tol * p.max_abs_coeff().max(1.0);
    let live: Vec<_> = comps.iter().filter(|p| p.max_abs_coeff() > 0.0).collect();
    if live.is_empty() {
        return LocalSet::whole();
    }
    // roots of the lowest-degree nonzero component, filtered by the others
    let lead = live.iter().min_by_key(|p| p.degree().unwrap_or(0)).unwrap();
    let mut pts = lead.roots_in(0.0, 1.0, scale(lead));
    pts.retain(|&u| live.iter().all(|q| q.eval(u).abs() <= scale(q)));
    LocalSet::exact(pts)
}

/// `{u : seg(u) = target}`.
pub(crate) fn local_preimage(seg: &Segment, target: &[f64], tol: f64) -> LocalSet {
    match seg {
        Segment::Constant { point } => {
            if dist(point, target) <= tol {
                LocalSet::whole()
            } else {
                LocalSet::exact(vec![])
            }
        }
        Segment::Polynomial { components } => {
            let shifted: Vec<_> = components
                .iter()
                .zip(target)
                .map(|(p, &c)| p.shift_constant(-c))
                .collect();
            common_polynomial_roots(&shifted, tol)
        }
        Segment::BumpRay { offset, direction } => {
            let gap: Vec<f64> = target.iter().zip(offset).map(|(p, o)| p - o).collect();
            let len = norm(direction);
            if len == 0.0 {
                return if norm(&gap) <= tol {
                    LocalSet::whole()
                } else {
                    LocalSet::exact(vec![])
                };
            }
            if norm(&gap) <= tol {
                return LocalSet::exact(vec![0.0, 1.0]);
            }
            // gap = c · direction with 0 < c ≤ e^{-4}
            let c = gap.iter().zip(direction).map(|(g, d)| g * d).sum::<f64>() / (len * len);
            let resid: Vec<f64> = gap.iter().zip(direction).map(|(g, d)| g - c * d).collect();
            if norm(&resid) > tol || c <= 0.0 || c > bump(0.5) * (1.0 + 1e-12) {
                return LocalSet::exact(vec![]);
            }
            // u(1-u) = -1 / ln c
            let q = (-1.0 / c.ln()).min(0.25);
            let disc = (0.25 - q).max(0.0).sqrt();
            let mut pts = vec![0.5 - disc, 0.5 + disc];
            pts.dedup();
            LocalSet::exact(pts)
        }
        Segment::Trigonometric { .. } => {
            if seg.is_constant() {
                return local_preimage(&Segment::Constant { point: seg.start() }, target, tol);
            }
            numeric_zeros(|u| dist(&seg.eval(u), target), tol)
        }
        Segment::Composed { base, map } => {
            if seg.is_constant() {
                return local_preimage(&Segment::Constant { point: seg.start() }, target, tol);
            }
            pull_back(&local_preimage(base, target, tol), map)
        }
    }
}

/// `{u : seg'(u) = 0}`; `Err` when the map rate has no closed-form zeros and
/// a numeric scan is not wanted.
pub(crate) fn local_stationary(seg: &Segment, tol: f64) -> LocalSet {
    if seg.is_constant() {
        return LocalSet::whole();
    }
    match seg {
        Segment::Constant { .. } => LocalSet::whole(),
        Segment::Polynomial { components } => {
            let d: Vec<_> = components.iter().map(|p| p.derivative()).collect();
            common_polynomial_roots(&d, tol)
        }
        Segment::BumpRay { .. } => LocalSet::exact(vec![0.0, 0.5, 1.0]),
        Segment::Trigonometric { .. } => numeric_zeros(|u| norm(&seg.deriv(u)), tol),
        Segment::Composed { base, map } => {
            let mut out = pull_back(&local_stationary(base, tol), map);
            match map {
                ParamMap::Affine { .. } => {}
                ParamMap::Shaped { window, shape, .. } => match shape.stationary_points() {
                    Some(vs) => {
                        for v in vs {
                            let w = window[1] - window[0];
                            let s = (v - window[0]) / w;
                            if (-1e-14..=1.0 + 1e-14).contains(&s) {
                                out.points.push(s.clamp(0.0, 1.0));
                            }
                        }
                    }
                    None => {
                        let rate = numeric_zeros(|s| map.rate(s).abs(), tol);
                        out.exact = false;
                        out.points.extend(rate.points);
                        out.intervals.extend(rate.intervals);
                    }
                },
            }
            out.points.sort_by(f64::total_cmp);
            out.points.dedup();
            out
        }
    }
}

fn pull_back(base: &LocalSet, map: &ParamMap) -> LocalSet {
    let mut out = LocalSet {
        intervals: vec![],
        points: vec![],
        exact: base.exact,
    };
    // a strictly increasing profile has single-point fibres; wide ones are
    // floating-point flatness near the ends of the flat step
    let genuine_flats = matches!(map, ParamMap::Shaped { shape: Shape::Pchip { .. }, .. });
    for &u in &base.points {
        if let Some((lo, hi)) = map.preimage(u) {
            if hi - lo > 1e-9 && genuine_flats {
                out.intervals.push([lo, hi]);
            } else if lo == 0.0 {
                out.points.push(0.0);
            } else if hi == 1.0 {
                out.points.push(1.0);
            } else {
                out.points.push(0.5 * (lo + hi));
            }
        }
    }
    for &[a, b] in &base.intervals {
        let (pa, pb) = (map.preimage(a), map.preimage(b));
        let (m0, m1) = (map.apply(0.0), map.apply(1.0));
        let (lo_u, hi_u) = (m0.min(m1), m0.max(m1));
        if b < lo_u || a > hi_u {
            continue;
        }
        let ends: Vec<f64> = [pa, pb]
            .iter()
            .flatten()
            .flat_map(|&(x, y)| [x, y])
            .chain(
                [0.0, 1.0]
                    .into_iter()
                    .filter(|&s| (a..=b).contains(&map.apply(s))),
            )
            .collect();
        let lo = ends.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ends.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            out.intervals.push([lo, hi]);
        } else if hi == lo {
            out.points.push(lo);
        }
    }
    out
}

/// Zeros of a nonnegative function by grid scan plus golden polish.
fn numeric_zeros<F: Fn(f64) -> f64>(f: F, tol: f64) -> LocalSet {
    let vals: Vec<f64> = (0..=SCAN).map(|k| f(k as f64 / SCAN as f64)).collect();
    let mut pts = Vec::new();
    let mut intervals = Vec::new();
    let mut run: Option<usize> = None;
    for k in 0..=SCAN {
        let low = vals[k] <= tol;
        match (low, run) {
            (true, None) => run = Some(k),
            (false, Some(s)) => {
                if k - 1 > s {
                    intervals.push([s as f64 / SCAN as f64, (k - 1) as f64 / SCAN as f64]);
                } else {
                    pts.push(s as f64 / SCAN as f64);
                }
                run = None;
            }
            _ => {}
        }
        if !low && k > 0 && k < SCAN && vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1] {
            let lo = (k - 1) as f64 / SCAN as f64;
            let hi = (k + 1) as f64 / SCAN as f64;
            let (u, v) = golden_min(&f, lo, hi, 120);
            if v <= tol {
                pts.push(u);
            }
        }
    }
    if let Some(s) = run {
        if s < SCAN {
            intervals.push([s as f64 / SCAN as f64, 1.0]);
        } else {
            pts.push(1.0);
        }
    }
    // minima sitting just inside the first or last cell
    for (lo, hi) in [(0.0, 1.0 / SCAN as f64), (1.0 - 1.0 / SCAN as f64, 1.0)] {
        let (u, v) = golden_min(&f, lo, hi, 120);
        if v <= tol && !pts.iter().any(|&p| (p - u).abs() < 2.0 / SCAN as f64) {
            pts.push(u);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    LocalSet {
        intervals,
        points: pts,
        exact: false,
    }
}

fn to_global(p: &Piece, u: f64) -> f64 {
    lerp(p.start, p.end, u)
}

fn merge(mut intervals: Vec<[f64; 2]>, mut points: Vec<f64>) -> (Vec<[f64; 2]>, Vec<f64>) {
    intervals.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut merged: Vec<[f64; 2]> = Vec::new();
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
            _ => merged.push(iv),
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
    points.retain(|&p| !merged.iter().any(|&[a, b]| a <= p && p <= b));
    (merged, points)
}

fn describe(
    intervals: Vec<[f64; 2]>,
    points: Vec<f64>,
    tol: f64,
    exact: bool,
) -> ClosedSetDescription {
    let (intervals, isolated_points) = merge(intervals, points);
    ClosedSetDescription {
        intervals,
        isolated_points,
        tolerance: tol,
        exactness: if exact {
            Exactness::Exact
        } else {
            Exactness::Numeric
        },
        note: None,
    }
}

/// `I_γ = γ⁻¹(p)`.
pub fn basepoint_preimage(gamma: &Loop, tol: f64) -> ClosedSetDescription {
    let p = gamma.basepoint().to_vec();
    let mut intervals = Vec::new();
    let mut points = vec![0.0, 1.0];
    let mut exact = true;
    for piece in gamma.pieces() {
        let local = local_preimage(&piece.segment, &p, tol);
        exact &= local.exact;
        points.extend(local.points.iter().map(|&u| to_global(&piece, u)));
        intervals.extend(
            local
                .intervals
                .iter()
                .map(|&[a, b]| [to_global(&piece, a), to_global(&piece, b)]),
        );
    }
    describe(intervals, points, tol, exact)
}

/// `J_γ`: smooth points with vanishing derivative. A breakpoint belongs to
/// `J_γ` only when both one-sided derivatives vanish; `0` and `1` use their
/// single one-sided derivative.
pub fn zero_derivative_set(gamma: &Loop, tol: f64) -> ClosedSetDescription {
    let mut intervals = Vec::new();
    let mut points = Vec::new();
    let mut exact = true;
    let pieces = gamma.pieces();
    for piece in &pieces {
        let local = local_stationary(&piece.segment, tol);
        exact &= local.exact;
        points.extend(
            local
                .points
                .iter()
                .filter(|&&u| u > 0.0 && u < 1.0)
                .map(|&u| to_global(piece, u)),
        );
        intervals.extend(
            local
                .intervals
                .iter()
                .map(|&[a, b]| [to_global(piece, a), to_global(piece, b)]),
        );
    }
    let vanishes = |t: f64, side: Side| {
        gamma
            .deriv(t, side)
            .map(|d| norm(&d) <= tol)
            .unwrap_or(false)
    };
    for t in gamma.breakpoints() {
        let keep = if t == 0.0 {
            vanishes(t, Side::Right)
        } else if t == 1.0 {
            vanishes(t, Side::Left)
        } else {
            vanishes(t, Side::Left) && vanishes(t, Side::Right)
        };
        if keep {
            points.push(t);
        }
    }
    // closed intervals from stationary pieces stay closed even at a corner
    describe(intervals, points, tol, exact)
}

/// Stationary parameters strictly inside one segment, for splitting words.
/// `Err(Policy)` when the set is not a finite list of isolated points.
pub(crate) fn interior_turning_points(seg: &Segment, tol: f64) -> Result<Vec<f64>> {
    let local = local_stationary(seg, tol);
    if local.intervals.iter().any(|&[a, b]| b > a) {
        return Err(Error::Policy("stationary set contains an interval".into()));
    }
    let pts: Vec<f64> = local.points.into_iter().filter(|&u| u > 0.0 && u < 1.0).collect();
    if !local.exact && pts.len() > 64 {
        return Err(Error::Policy("turning points accumulate".into()));
    }
    Ok(pts)
}

/// Shrinks every nontrivial interval of `I_γ` to a point. Returns the new
/// loop `γ'` and the flat reparametrization `φ` with `γ = γ' ∘ φ`.
pub fn collapse_constant_intervals(gamma: &Loop, force: bool) -> Result<(Loop, Reparam)> {
    let set = basepoint_preimage(gamma, ROOT_TOL);
    if set.exactness == Exactness::Numeric && !force {
        return Err(Error::Unsupported(
            "basepoint preimage is numeric only; pass force to collapse anyway".into(),
        ));
    }
    collapse_intervals(gamma, &set.nontrivial_intervals())
}

/// As [`collapse_constant_intervals`] with caller-supplied intervals, which
/// must be disjoint, sorted and mapped to the basepoint by `γ`.
pub fn collapse_intervals(gamma: &Loop, intervals: &[[f64; 2]]) -> Result<(Loop, Reparam)> {
    let removed: f64 = intervals.iter().map(|[a, b]| b - a).sum();
    let kept = 1.0 - removed;
    if kept <= 0.0 {
        let trivial = Loop::trivial(gamma.space().clone());
        return Ok((trivial, Reparam::identity()));
    }
    if intervals.is_empty() {
        return Ok((gamma.clone(), Reparam::identity()));
    }
    // knots (t, s) of φ, flat over each collapsed interval
    let mut knots: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut s = 0.0;
    let mut cursor = 0.0;
    let mut windows = Vec::new();
    for &[a, b] in intervals {
        if a > cursor {
            let s_next = s + (a - cursor) / kept;
            windows.push((cursor, a, s, s_next));
            s = s_next;
            knots.push([a, s]);
        }
        cursor = b;
        if b < 1.0 {
            knots.push([b, s]);
        }
    }
    if cursor < 1.0 {
        windows.push((cursor, 1.0, s, 1.0));
    }
    let last = knots.last_mut().unwrap();
    if last[0] == 1.0 {
        last[1] = 1.0;
    } else {
        knots.push([1.0, 1.0]);
    }
    if let Some(w) = windows.last_mut() {
        w.3 = 1.0;
    }
    let mut pieces = Vec::new();
    for (a, b, sa, sb) in windows {
        for p in gamma.pieces_between(a, b) {
            let map = |t: f64| {
                if t == a {
                    sa
                } else if t == b {
                    sb
                } else {
                    sa + (t - a) / (b - a) * (sb - sa)
                }
            };
            pieces.push(Piece {
                start: map(p.start),
                end: map(p.end),
                segment: p.segment,
            });
        }
    }
    let space: AmbientSpace = gamma.space().clone();
    let collapsed = Loop::from_pieces(space, pieces, gamma.label().map(str::to_owned))?;
    let phi = Reparam::piecewise_affine(dedupe_knots(knots))?;
    Ok((collapsed, phi))
}

fn dedupe_knots(mut knots: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    knots.dedup_by(|b, a| a[0] == b[0]);
    knots
}

#[cfg(test)]
mod tests {
    use super::super::library::*;
    use super::super::{make_sitting, reparametrize};
    use super::*;
    use std::sync::Arc;

    #[test]
    fn trivial_loop_sets() {
        let p = Loop::trivial(AmbientSpace::euclidean(2));
        let i = basepoint_preimage(&p, ROOT_TOL);
        assert_eq!(i.intervals, vec![[0.0, 1.0]]);
        assert!(i.isolated_points.is_empty());
        let j = zero_derivative_set(&p, ROOT_TOL);
        assert_eq!(j.intervals, vec![[0.0, 1.0]]);
    }

    #[test]
    fn figure_eight_preimage() {
        let i = basepoint_preimage(&polynomial_figure_eight(), ROOT_TOL);
        assert_eq!(i.exactness, Exactness::Exact);
        assert!(i.intervals.is_empty());
        assert_eq!(i.isolated_points.len(), 3);
        assert!((i.isolated_points[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn circle_has_no_stationary_points() {
        let j = zero_derivative_set(&circle_through_origin(1.0), ROOT_TOL);
        assert!(j.is_empty(), "{j:?}");
        let i = basepoint_preimage(&circle_through_origin(1.0), ROOT_TOL);
        assert_eq!(i.isolated_points, vec![0.0, 1.0]);
    }

    #[test]
    fn bump_ray_stationary_set() {
        let seg = Segment::bump_ray_polar([0.0, 0.0], 1.0, 0.0);
        let g = uniform_loop(AmbientSpace::euclidean(2), vec![seg]).unwrap();
        let j = zero_derivative_set(&g, ROOT_TOL);
        assert_eq!(j.isolated_points, vec![0.0, 0.5, 1.0]);
        assert_eq!(j.exactness, Exactness::Exact);
    }

    #[test]
    fn bump_ray_level_set() {
        let seg = Segment::bump_ray_polar([0.0, 0.0], 1.0, 0.0);
        let u = 0.3;
        let target = seg.eval(u);
        let l = local_preimage(&seg, &target, 1e-14);
        assert_eq!(l.points.len(), 2);
        assert!((l.points[0] - u).abs() < 1e-12);
        assert!((l.points[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn sitting_loop_collapses_to_endpoints() {
        let g = make_sitting(&circle_through_origin(1.0), 0.1).unwrap();
        let i = basepoint_preimage(&g, ROOT_TOL);
        assert_eq!(i.intervals, vec![[0.0, 0.1], [0.9, 1.0]]);
        // the circle piece is only numerically analyzable
        assert!(matches!(collapse_constant_intervals(&g, false), Err(Error::Unsupported(_))));
        let (c, phi) = collapse_constant_intervals(&g, true).unwrap();
        let ic = basepoint_preimage(&c, ROOT_TOL);
        assert!(ic.intervals.is_empty(), "{ic:?}");
        assert_eq!(ic.isolated_points, vec![0.0, 1.0]);
        let back = reparametrize(&c, &phi).unwrap();
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            assert!(dist(&back.eval(t).unwrap(), &g.eval(t).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn middle_band_collapses_to_a_point() {
        let space = AmbientSpace::euclidean(2);
        let a = Segment::line(&[0.0, 0.0], &[1.0, 0.0]);
        let b = Segment::line(&[1.0, 0.0], &[0.0, 0.0]);
        let g = Loop::new(
            space,
            vec![0.0, 1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0, 1.0],
            vec![
                Arc::new(a.clone()),
                Arc::new(b.clone()),
                Arc::new(Segment::Constant { point: vec![0.0, 0.0] }),
                Arc::new(Segment::line(&[0.0, 0.0], &[0.0, 1.0])),
                Arc::new(Segment::line(&[0.0, 1.0], &[0.0, 0.0])),
            ],
            None,
        )
        .unwrap();
        let i = basepoint_preimage(&g, ROOT_TOL);
        assert_eq!(i.intervals, vec![[1.0 / 3.0, 2.0 / 3.0]]);
        let (c, _) = collapse_constant_intervals(&g, false).unwrap();
        let ic = basepoint_preimage(&c, ROOT_TOL);
        assert!(ic.intervals.is_empty());
        assert_eq!(ic.isolated_points.len(), 3);
    }

    #[test]
    fn complement_components_of_points() {
        let d = ClosedSetDescription {
            intervals: vec![[0.75, 1.0]],
            isolated_points: vec![0.0, 0.5],
            tolerance: 1e-10,
            exactness: Exactness::Exact,
            note: None,
        };
        assert_eq!(d.complement_components(), vec![(0.0, 0.5), (0.5, 0.75)]);
    }
}
