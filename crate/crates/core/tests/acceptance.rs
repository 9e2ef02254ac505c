//! The ten acceptance criteria, one report line each.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use holonomy_lab::equiv::{
    analytic_factorize, approx_sequence, build_counterexample, hoop_equiv_test, window_start, CounterexampleSpec,
    Equivalence, HoopTest, MAX_DEPTH,
};
use holonomy_lab::gauge::{magnetic_u1, random_connection, AlgebraName, Connection, GaugeField, PunctureConnection};
use holonomy_lab::loopcore::library::{circle_through_origin, single_arc, two_petal, uniform_loop, winding_circle};
use holonomy_lab::loopcore::sets::{basepoint_preimage, Exactness};
use holonomy_lab::loopcore::{concat, reparametrize, sup_distance, Loop, Segment};
use holonomy_lab::transport::{convergence_order_probe, curvature_law_probe, holonomy, Method, TransportOptions};
use holonomy_lab::words::{is_retrace_trivial, Letter, ReduceOptions, Reducer, Verdict, Word};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hol(a: &dyn GaugeField, g: &Loop) -> holonomy_lab::gauge::GroupElement {
    holonomy(a, g, &TransportOptions::default()).unwrap().element
}

fn abelian_stokes() -> Outcome {
    let start = Instant::now();
    let h = holonomy(&magnetic_u1(1.0), &circle_through_origin(1.0), &TransportOptions::with_steps(2048)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    // exp(-i B π r²)
    let want = Complex64::from_polar(1.0, -PI);
    let dev = (h.element.matrix[(0, 0)] - want).norm();
    check(dev < 1e-6 && secs < 1.0, format!("|Hol - e^(-iπ)| = {dev:.3e}, {secs:.3}s"))
}

fn flat_winding() -> Outcome {
    let alpha = 0.3;
    let a = Connection::Puncture {
        puncture: PunctureConnection::new(alpha),
    };
    let mut worst = 0.0f64;
    for w in [-2, -1, 1, 2] {
        let g = winding_circle(1.0, w);
        // Line integral of α dθ along the sampled loop.
        let want = Complex64::from_polar(1.0, -alpha * winding_angle(&g, 8192));
        assert!((want - Complex64::from_polar(1.0, -2.0 * PI * alpha * w as f64)).norm() < 1e-12);
        worst = worst.max((hol(&a, &g).matrix[(0, 0)] - want).norm());
    }
    check(worst < 1e-6, format!("max |Hol - e^(-2πiαw)| = {worst:.3e}"))
}

fn homomorphism_and_inversion() -> Outcome {
    let start = Instant::now();
    let corpus = loop_corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut hom, mut inv) = (0.0f64, 0.0f64);
    for k in 0..100 {
        let g1 = &corpus[rng.random_range(0..corpus.len())];
        let g2 = &corpus[rng.random_range(0..corpus.len())];
        let a = su2_connection(10_000 + k, 2);
        let (h1, h2) = (hol(&a, g1), hol(&a, g2));
        hom = hom.max(hol(&a, &concat(g2, g1).unwrap()).distance(&h2.mul(&h1)));
        inv = inv.max(hol(&a, &g1.invert()).distance(&h1.inverse()));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        hom < 1e-8 && inv < 1e-8 && secs < 30.0,
        format!("homomorphism {hom:.3e}, inversion {inv:.3e}, {secs:.2}s"),
    )
}

fn reparametrization_and_retrace() -> Outcome {
    let mut reparam = 0.0f64;
    for (k, g) in loop_corpus().iter().enumerate() {
        let a = su2_connection(300 + k as u64, 2);
        let base = hol(&a, g);
        for phi in phi_corpus() {
            reparam = reparam.max(base.distance(&hol(&a, &reparametrize(g, &phi).unwrap())));
        }
    }
    let mut retrace = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pt = || [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (p, q) = (pt(), pt());
        let alpha1 = bent([0.0, 0.0], p, pt());
        let beta = bent(p, q, pt());
        let alpha2 = bent(p, [0.0, 0.0], pt());
        let long = uniform_loop(plane(), vec![alpha1.clone(), beta.clone(), beta.reversed(), alpha2.clone()]).unwrap();
        let short = uniform_loop(plane(), vec![alpha1, alpha2]).unwrap();
        let a = su2_connection(700 + seed, 2);
        retrace = retrace.max(hol(&a, &long).distance(&hol(&a, &short)));
    }
    check(
        reparam < 1e-6 && retrace < 1e-6,
        format!("reparametrization {reparam:.3e}, retracing {retrace:.3e}"),
    )
}

fn counterexample_battery() -> Outcome {
    let n = 20;
    let g = build_counterexample(&CounterexampleSpec::with_depth(n)).unwrap();
    let set = basepoint_preimage(&g, 1e-10);
    let points: Vec<f64> = (0..n).map(window_start).collect();
    let sets_ok =
        set.exactness == Exactness::Exact && set.isolated_points == points && set.intervals == vec![[window_start(n), 1.0]];
    let certificate = match is_retrace_trivial(&g, ReduceOptions::default()) {
        Verdict::TrivialCertificate { cancellations, .. } => cancellations.len(),
        _ => 0,
    };
    let mut hol_dev = 0.0f64;
    for seed in 0..50 {
        hol_dev = hol_dev.max(hol(&su2_connection(5000 + seed, 2), &g).distance_to_identity());
    }
    let full = build_counterexample(&CounterexampleSpec::with_depth(MAX_DEPTH)).unwrap();
    let mut dist_dev = 0.0f64;
    for k in [3usize, 6, 10] {
        let d = sup_distance(&full, &approx_sequence(&full, k).unwrap(), 2048).unwrap();
        dist_dev = dist_dev.max((d - 0.5f64.powi(k as i32 + 1)).abs());
    }
    check(
        sets_ok && certificate == n && hol_dev < 1e-6 && dist_dev < 1e-9,
        format!(
            "(a) preimage exact: {sets_ok}, (b) {certificate} cancellations, (c) max ‖Hol - I‖ = {hol_dev:.3e}, \
             (d) max |d - 2^-(n+1)| = {dist_dev:.3e}"
        ),
    )
}

fn class_closure() -> Outcome {
    let full = build_counterexample(&CounterexampleSpec::with_depth(MAX_DEPTH)).unwrap();
    let certified = (0..=14).all(|k| {
        let gk = approx_sequence(&full, k).unwrap();
        is_retrace_trivial(&gk, ReduceOptions::default()).is_trivial()
    });
    let d = sup_distance(&full, &approx_sequence(&full, 14).unwrap(), 2048).unwrap();
    check(certified && d < 1e-4, format!("γ_0..γ_14 certified: {certified}, d(γ, γ_14) = {d:.3e}"))
}

/// Generators `a: O → O`, `b: O → P`, `c: P → P`; letters are `(id, ±1)`.
fn free_reduction_oracle() -> Outcome {
    let o = [0.0, 0.0];
    let p = [1.0, 0.0];
    let table: Vec<Arc<Segment>> = vec![
        Arc::new(bent(o, o, [0.3, 0.8])),
        Arc::new(bent(o, p, [0.0, 0.4])),
        Arc::new(bent(p, p, [-0.5, -0.6])),
    ];
    let ends = |l: Letter| -> (u8, u8) {
        let (s, e) = match l.segment_id {
            0 => (0, 0),
            1 => (0, 1),
            _ => (1, 1),
        };
        if l.orientation > 0 {
            (s, e)
        } else {
            (e, s)
        }
    };
    let alphabet: Vec<Letter> = (0..3).flat_map(|g| [Letter::new(g, 1), Letter::new(g, -1)]).collect();
    let mut reducer = Reducer::new(ReduceOptions::default());
    let mut oracle = AllOrdersReducer::new(6);
    let (mut enumerated, mut checked, mut mismatches) = (0usize, 0usize, 0usize);
    for len in 0..=8u32 {
        for code in 0..6usize.pow(len) {
            enumerated += 1;
            let mut c = code;
            let letters: Vec<Letter> = (0..len)
                .map(|_| {
                    let l = alphabet[c % 6];
                    c /= 6;
                    l
                })
                .collect();
            if letters.windows(2).any(|w| ends(w[0]).1 != ends(w[1]).0) {
                continue;
            }
            checked += 1;
            let word = Word::new(letters.clone(), table.clone()).unwrap();
            let got: Vec<(usize, i8)> = reducer
                .reduce(&word)
                .word
                .letters
                .iter()
                .map(|l| (l.segment_id, l.orientation))
                .collect();
            let forms = oracle.normal_forms(&letters);
            if forms.len() != 1 || forms.iter().next() != Some(&got) {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0,
        format!("{checked} valid chains of {enumerated} words, {mismatches} disagreements"),
    )
}

fn curvature_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_law = f64::INFINITY;
    for _ in 0..5 {
        let c1: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c2: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = curvature_law_probe(AlgebraName::Su2, &c1, &c2, &[0.1, 0.05, 0.025], &TransportOptions::default())
            .unwrap();
        worst_law = worst_law.min(p.order);
    }
    let a = random_connection(12, AlgebraName::Su2, 2, 2, 1.0).unwrap();
    let probe = convergence_order_probe(
        &a,
        &circle_through_origin(1.0),
        &[8, 16, 32, 64, 128],
        Method::Rk4Projected,
    )
    .unwrap();
    let self_order = probe.order.unwrap_or(f64::NAN);
    check(
        worst_law >= 2.7 && self_order >= 3.5,
        format!("curvature-law order {worst_law:.3}, integrator order {self_order:.3}"),
    )
}

fn hoop_discrimination() -> Outcome {
    let g = two_petal();
    let with_circle = concat(&g, &circle_through_origin(0.5)).unwrap();
    let test = HoopTest {
        samples: 100,
        tol: 1e-6,
        ..Default::default()
    };
    let v = hoop_equiv_test(&g, &with_circle, &test).unwrap();
    let above = v.above(1e-3);
    let mut worst_reparam = 0.0f64;
    let mut never = true;
    for phi in phi_corpus().iter().skip(1).step_by(2) {
        let r = hoop_equiv_test(&g, &reparametrize(&g, phi).unwrap(), &test).unwrap();
        never &= r.verdict == Equivalence::EquivalentUpToSamples;
        worst_reparam = worst_reparam.max(r.max_deviation);
    }
    check(
        above >= 99 && v.verdict == Equivalence::Distinguished && never,
        format!("{above}/100 witnesses above 1e-3; γ vs γ∘φ max deviation {worst_reparam:.3e}"),
    )
}

fn factorization() -> Outcome {
    let mut worst = 0.0f64;
    for g in [two_petal(), single_arc()] {
        let f = analytic_factorize(&g).unwrap();
        let back = holonomy_lab::equiv::recompose(&g, &f).unwrap();
        worst = worst.max(sup_distance(&back, &g, 4096).unwrap());
    }
    let circle = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/circle.json");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = holonomy_lab::cli::run(
        ["holonomy-lab", "factorize", "--loop", circle.to_str().unwrap()],
        &mut out,
        &mut err,
    );
    check(
        worst < 1e-8 && code == 4,
        format!("recomposition error {worst:.3e}, circle exit code {code}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("abelian Stokes", abelian_stokes),
        ("flat winding", flat_winding),
        ("homomorphism and inversion", homomorphism_and_inversion),
        ("reparametrization and retrace invariance", reparametrization_and_retrace),
        ("counterexample battery", counterexample_battery),
        ("class closure", class_closure),
        ("free-reduction oracle", free_reduction_oracle),
        ("curvature law", curvature_law),
        ("hoop-equivalence discrimination", hoop_discrimination),
        ("factorization recomposition", factorization),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
