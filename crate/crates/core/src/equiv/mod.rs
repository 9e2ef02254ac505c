//! Hoop-equivalence by connection sampling, the thin-but-not-retrace-trivial
//! counterexample family, approximation sequences, restriction components
//! and analytic factorization.

mod counterexample;
mod factorize;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fanout::{map_indexed, Mode};
use crate::gauge::{random_connection, AlgebraName, GaugeField};
use crate::loopcore::sets::{basepoint_preimage, Exactness, ROOT_TOL};
use crate::loopcore::{AmbientSpace, Loop, Piece, Segment};
use crate::numeric::norm;
use crate::transport::{holonomy, TransportOptions};

pub use counterexample::{
    build_counterexample, family_verdict, window_start, AngleRule, CounterexampleSpec, Profile, RadiusRule,
    MAX_DEPTH,
};
pub use factorize::{analytic_factorize, recompose, Factor, Factorization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    EquivalentUpToSamples,
    Distinguished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub seed: u64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivVerdict {
    pub verdict: Equivalence,
    /// One entry per non-divergent sample, largest deviation first.
    pub witnesses: Vec<Witness>,
    pub samples: usize,
    pub tolerance: f64,
    pub max_deviation: f64,
    /// Seeds whose integration diverged; excluded from the verdict.
    pub divergent: Vec<u64>,
}

impl EquivVerdict {
    pub fn above(&self, threshold: f64) -> usize {
        self.witnesses.iter().filter(|w| w.deviation > threshold).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoopTest {
    pub algebra: AlgebraName,
    pub degree: u32,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Standard deviation of the random coefficients.
    pub scale: f64,
    pub transport: TransportOptions,
    pub mode: Mode,
}

impl Default for HoopTest {
    fn default() -> Self {
        HoopTest {
            algebra: AlgebraName::Su2,
            degree: 2,
            samples: 100,
            seed: 0,
            tol: 1e-6,
            scale: 1.0,
            transport: TransportOptions::default(),
            mode: Mode::from_env(),
        }
    }
}

/// Seed of sample `i`.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Compares `Hol_A(γ₀)` and `Hol_A(γ₁)` over sampled random connections.
pub fn hoop_equiv_test(gamma0: &Loop, gamma1: &Loop, test: &HoopTest) -> Result<EquivVerdict> {
    if gamma0.dim() != gamma1.dim()
        || crate::numeric::dist(gamma0.basepoint(), gamma1.basepoint()) > crate::loopcore::CONTINUITY_TOL
    {
        return Err(Error::Incompatible("loops must share the ambient space and basepoint".into()));
    }
    test.transport.validate()?;
    let dim = gamma0.dim();
    let outcomes = map_indexed(test.mode, test.samples, |i| -> Result<std::result::Result<Witness, u64>> {
        let seed = sample_seed(test.seed, i);
        let a = random_connection(seed, test.algebra, dim, test.degree, test.scale)?;
        let h = |g: &Loop| holonomy(&a as &dyn GaugeField, g, &test.transport);
        match (h(gamma0), h(gamma1)) {
            (Ok(x), Ok(y)) => Ok(Ok(Witness {
                seed,
                deviation: x.element.distance(&y.element),
            })),
            (Err(Error::Divergence(_)), _) | (_, Err(Error::Divergence(_))) => Ok(Err(seed)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    });
    let mut witnesses = Vec::new();
    let mut divergent = Vec::new();
    for o in outcomes {
        match o? {
            Ok(w) => witnesses.push(w),
            Err(seed) => divergent.push(seed),
        }
    }
    witnesses.sort_by(|a, b| b.deviation.total_cmp(&a.deviation).then(a.seed.cmp(&b.seed)));
    let max_deviation = witnesses.first().map_or(0.0, |w| w.deviation);
    let verdict = if max_deviation > test.tol {
        Equivalence::Distinguished
    } else {
        Equivalence::EquivalentUpToSamples
    };
    Ok(EquivVerdict {
        verdict,
        witnesses,
        samples: test.samples,
        tolerance: test.tol,
        max_deviation,
        divergent,
    })
}

/// `η(s, ·) = (1 - s) γ`; needs the basepoint at the origin.
pub fn thin_contraction(gamma: &Loop, s: f64) -> Result<Loop> {
    if norm(gamma.basepoint()) != 0.0 {
        return Err(Error::Unsupported("scaling moves a basepoint away from the origin".into()));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("contraction parameter {s} outside [0,1]")));
    }
    if s == 1.0 {
        return Ok(Loop::trivial(gamma.space().clone()));
    }
    gamma.scaled(1.0 - s)
}

/// Keeps the complement components `0..=n` of `I_γ` and sends the rest of
/// the loop to the basepoint.
pub fn approx_sequence(gamma: &Loop, n: usize) -> Result<Loop> {
    let set = basepoint_preimage(gamma, ROOT_TOL);
    if set.exactness != Exactness::Exact {
        return Err(Error::Unsupported("complement components of I_γ are not exactly enumerable".into()));
    }
    let comps = set.complement_components();
    if n + 1 >= comps.len() {
        return Ok(gamma.clone());
    }
    let cut = comps[n].1;
    let mut pieces = gamma.pieces_between(0.0, cut);
    pieces.push(Piece {
        start: cut,
        end: 1.0,
        segment: std::sync::Arc::new(Segment::Constant {
            point: gamma.basepoint().to_vec(),
        }),
    });
    Ok(Loop::from_pieces(gamma.space().clone(), pieces, None)?.with_label(format!("approx(n={n})")))
}

/// Each component of `[0,1] ∖ I_γ`, restricted and re-affinized.
pub fn restriction_components(gamma: &Loop) -> Result<Vec<Loop>> {
    let set = basepoint_preimage(gamma, ROOT_TOL);
    set.complement_components()
        .iter()
        .map(|&(a, b)| gamma.restriction(a, b))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityProbe {
    pub s: Vec<f64>,
    /// `‖Hol(η(s_{k+1})) - Hol(η(s_k))‖_F`.
    pub increments: Vec<f64>,
    /// `max increment / Δs`.
    pub lipschitz: f64,
}

/// Samples `s ↦ Hol(η(s, ·))` for the contraction family at `samples`
/// evenly spaced `s`.
pub fn family_continuity_probe(
    field: &dyn GaugeField,
    gamma: &Loop,
    samples: usize,
    opts: &TransportOptions,
) -> Result<ContinuityProbe> {
    let samples = samples.max(2);
    let s: Vec<f64> = (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect();
    let hols = s
        .iter()
        .map(|&si| holonomy(field, &thin_contraction(gamma, si)?, opts).map(|h| h.element))
        .collect::<Result<Vec<_>>>()?;
    let increments: Vec<f64> = hols.windows(2).map(|w| w[1].distance(&w[0])).collect();
    let ds = 1.0 / (samples - 1) as f64;
    let lipschitz = increments.iter().fold(0.0f64, |m, &x| m.max(x)) / ds;
    Ok(ContinuityProbe {
        s,
        increments,
        lipschitz,
    })
}

/// The trivial loop in the plane.
pub fn planar_trivial() -> Loop {
    Loop::trivial(AmbientSpace::euclidean(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopcore::library::*;
    use crate::loopcore::{concat, reparametrize, sup_distance, Reparam};

    #[test]
    fn thin_contraction_endpoints() {
        let c = circle_through_origin(1.0);
        assert!(thin_contraction(&c, 1.0).unwrap().is_trivial());
        let h = thin_contraction(&c, 0.5).unwrap();
        assert!(sup_distance(&h, &circle_through_origin(0.5), 256).unwrap() < 1e-15);
        let w = winding_circle(1.0, 1);
        assert!(matches!(thin_contraction(&w, 0.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn approx_distances_follow_radii() {
        let g = build_counterexample(&CounterexampleSpec::with_depth(20)).unwrap();
        for n in [0usize, 3, 6] {
            let gn = approx_sequence(&g, n).unwrap();
            let d = sup_distance(&g, &gn, 2048).unwrap();
            assert!((d - 0.5f64.powi(n as i32 + 1)).abs() < 1e-9, "n={n} d={d}");
        }
        assert_eq!(approx_sequence(&g, 40).unwrap(), g);
    }

    #[test]
    fn approx_refuses_numeric_sets() {
        assert!(matches!(approx_sequence(&circle_through_origin(1.0), 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn restriction_components_of_counterexample() {
        let g = build_counterexample(&CounterexampleSpec::with_depth(5)).unwrap();
        let comps = restriction_components(&g).unwrap();
        assert_eq!(comps.len(), 5);
        for c in &comps {
            assert_eq!(c.segment_count(), 1);
            assert!(matches!(*c.pieces()[0].segment, Segment::BumpRay { .. }));
        }
        let arc = single_arc();
        assert_eq!(restriction_components(&arc).unwrap().len(), 1);
    }

    #[test]
    fn hoop_test_small() {
        let g = two_petal();
        let r = reparametrize(&g, &Reparam::power(2.0).unwrap()).unwrap();
        let test = HoopTest {
            samples: 4,
            transport: TransportOptions::with_steps(256),
            ..Default::default()
        };
        let v = hoop_equiv_test(&g, &r, &test).unwrap();
        assert_eq!(v.verdict, Equivalence::EquivalentUpToSamples);
        let with_circle = concat(&circle_through_origin(0.5), &g).unwrap();
        let v = hoop_equiv_test(&g, &with_circle, &test).unwrap();
        assert_eq!(v.verdict, Equivalence::Distinguished);
        assert!(v.witnesses.windows(2).all(|w| w[0].deviation >= w[1].deviation));
    }

    #[test]
    fn continuity_probe_is_finite() {
        let g = build_counterexample(&CounterexampleSpec::with_depth(4)).unwrap();
        let a = random_connection(1, AlgebraName::Su2, 2, 2, 1.0).unwrap();
        let p = family_continuity_probe(&a, &g, 9, &TransportOptions::with_steps(128)).unwrap();
        assert_eq!(p.increments.len(), 8);
        assert!(p.lipschitz.is_finite());
    }
}
