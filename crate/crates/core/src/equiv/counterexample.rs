use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loopcore::bump::BUMP_PEAK;
use crate::loopcore::segment::sincos_turns;
use crate::loopcore::{AmbientSpace, Loop, Segment};
use crate::words::Verdict;

/// Deepest supported truncation; windows shrink as `2^{-n}`.
pub const MAX_DEPTH: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RadiusRule {
    /// `r_n = ratio^n`.
    Geometric { ratio: f64 },
    Custom { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AngleRule {
    /// `θ_n = limit · (1 - 2^{-n})`.
    Saturating { limit: f64 },
    Custom { values: Vec<f64> },
}

/// How the bump is scaled on each ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// The ray reaches out to distance `r_n`.
    #[default]
    PeakNormalized,
    /// `f · r_n`, peaking at `r_n e^{-4}`.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub r_rule: RadiusRule,
    pub theta_rule: AngleRule,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub bounded_variation: bool,
}

impl Default for CounterexampleSpec {
    fn default() -> Self {
        CounterexampleSpec {
            r_rule: RadiusRule::Geometric { ratio: 0.5 },
            theta_rule: AngleRule::Saturating {
                limit: std::f64::consts::PI,
            },
            n: 8,
            profile: Profile::PeakNormalized,
            bounded_variation: false,
        }
    }
}

impl CounterexampleSpec {
    pub fn with_depth(n: usize) -> Self {
        CounterexampleSpec {
            n,
            ..Default::default()
        }
    }

    pub fn radius(&self, k: usize) -> f64 {
        match &self.r_rule {
            RadiusRule::Geometric { ratio } => ratio.powi(k as i32),
            RadiusRule::Custom { values } => values[k],
        }
    }

    /// `θ_k` in turns.
    fn angle_turns(&self, k: usize) -> f64 {
        match &self.theta_rule {
            AngleRule::Saturating { limit } => limit / TAU * (1.0 - 0.5f64.powi(k as i32)),
            AngleRule::Custom { values } => values[k] / TAU,
        }
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.angle_turns(k) * TAU
    }

    /// Distance from the basepoint reached on ray `k`.
    pub fn reach(&self, k: usize) -> f64 {
        match self.profile {
            Profile::PeakNormalized => self.radius(k),
            Profile::Raw => self.radius(k) * BUMP_PEAK,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        if self.n > MAX_DEPTH {
            return bad(format!("N = {} exceeds the supported depth {MAX_DEPTH}", self.n));
        }
        match &self.r_rule {
            RadiusRule::Geometric { ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return bad(format!("geometric ratio {ratio} must lie in (0,1) so that r_n → 0"));
                }
            }
            RadiusRule::Custom { values } => {
                if values.len() < self.n {
                    return bad(format!("{} radii given for N = {}", values.len(), self.n));
                }
                if values.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return bad("radii must be positive and finite".into());
                }
                if values.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("radii must be strictly decreasing".into());
                }
            }
        }
        match &self.theta_rule {
            AngleRule::Saturating { limit } => {
                if !(limit.is_finite() && *limit >= 0.0 && *limit < TAU) {
                    return bad(format!("angle limit {limit} must lie in [0, 2π)"));
                }
            }
            AngleRule::Custom { values } => {
                if values.len() < self.n {
                    return bad(format!("{} angles given for N = {}", values.len(), self.n));
                }
                if values.iter().any(|t| !t.is_finite()) {
                    return bad("angles must be finite".into());
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return bad("angles must be non-decreasing".into());
                }
                if values.iter().any(|&t| !(0.0..TAU).contains(&t)) {
                    return bad("angles must stay in [0, 2π)".into());
                }
            }
        }
        Ok(())
    }
}

/// Start of window `k`: `1 - 2^{-k}`.
pub fn window_start(k: usize) -> f64 {
    1.0 - 0.5f64.powi(k as i32)
}

/// Truncation at depth `N`: the bump ray `k` on `[1 - 2^{-k}, 1 - 2^{-k-1}]`
/// for `k < N`, then the basepoint on `[1 - 2^{-N}, 1]`.
pub fn build_counterexample(spec: &CounterexampleSpec) -> Result<Loop> {
    spec.validate()?;
    let space = AmbientSpace::euclidean(2);
    if spec.n == 0 {
        return Ok(Loop::trivial(space));
    }
    let mut breakpoints = Vec::with_capacity(spec.n + 2);
    let mut segments = Vec::with_capacity(spec.n + 1);
    for k in 0..spec.n {
        breakpoints.push(window_start(k));
        let (s, c) = sincos_turns(spec.angle_turns(k));
        let len = match spec.profile {
            Profile::PeakNormalized => spec.radius(k) / BUMP_PEAK,
            Profile::Raw => spec.radius(k),
        };
        segments.push(Arc::new(Segment::BumpRay {
            offset: vec![0.0, 0.0],
            direction: vec![len * c, len * s],
        }));
    }
    breakpoints.push(window_start(spec.n));
    breakpoints.push(1.0);
    segments.push(Arc::new(Segment::Constant {
        point: vec![0.0, 0.0],
    }));
    Ok(Loop::new(space, breakpoints, segments, None)?.with_label(format!("counterexample(N={})", spec.n)))
}

/// The untruncated family has infinitely many rays; no finite certificate
/// covers it.
pub fn family_verdict(spec: &CounterexampleSpec) -> Verdict {
    Verdict::Inconclusive {
        reason: format!(
            "untruncated family: rays accumulate at t = 1, so the loop is not a reparametrization of a finite \
             concatenation of retrazable loops; truncations up to N = {} are certified individually",
            spec.n.max(1)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopcore::sets::{basepoint_preimage, ROOT_TOL};

    #[test]
    fn raw_profile_midpoint_value() {
        let spec = CounterexampleSpec {
            profile: Profile::Raw,
            ..CounterexampleSpec::with_depth(4)
        };
        let g = build_counterexample(&spec).unwrap();
        let mid = 0.5 * (window_start(2) + window_start(3));
        let p = g.eval(mid).unwrap();
        let r = 0.25 * (-4.0f64).exp();
        let th = 0.75 * std::f64::consts::PI;
        assert!((p[0] - r * th.cos()).abs() < 1e-16);
        assert!((p[1] - r * th.sin()).abs() < 1e-16);
    }

    #[test]
    fn peak_normalized_reaches_radius() {
        let g = build_counterexample(&CounterexampleSpec::with_depth(4)).unwrap();
        let mid = 0.5 * (window_start(2) + window_start(3));
        let p = g.eval(mid).unwrap();
        assert!((crate::numeric::norm(&p) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn smallest_case() {
        let g = build_counterexample(&CounterexampleSpec::with_depth(1)).unwrap();
        assert_eq!(g.breakpoints(), vec![0.0, 0.5, 1.0]);
        assert_eq!(g.eval(0.75).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn preimage_is_dyadic() {
        let n = 12;
        let g = build_counterexample(&CounterexampleSpec::with_depth(n)).unwrap();
        let i = basepoint_preimage(&g, ROOT_TOL);
        let want: Vec<f64> = (0..n).map(window_start).collect();
        assert_eq!(i.isolated_points, want);
        assert_eq!(i.intervals, vec![[window_start(n), 1.0]]);
    }

    #[test]
    fn invalid_specs() {
        let s = CounterexampleSpec {
            r_rule: RadiusRule::Custom {
                values: vec![1.0, 0.5, 0.7],
            },
            n: 3,
            ..Default::default()
        };
        assert!(matches!(build_counterexample(&s), Err(Error::Spec(_))));
        let s = CounterexampleSpec {
            theta_rule: AngleRule::Saturating { limit: 7.0 },
            ..Default::default()
        };
        assert!(s.validate().is_err());
        assert!(CounterexampleSpec::with_depth(51).validate().is_err());
    }
}
