use std::path::{Path, PathBuf};

use holonomy_lab::cli::{run, to_json};
use holonomy_lab::equiv::{build_counterexample, CounterexampleSpec};
use holonomy_lab::loopcore::Loop;
use holonomy_lab::transport::CONVENTION;
use tempfile::TempDir;

fn asset(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("assets")
        .join(name)
        .display()
        .to_string()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("holonomy-lab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn tmp(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn magnetic_circle_report() {
    let (code, out, _) = cli(&["holonomy", "--loop", &asset("circle.json"), "--connection", &asset("u1_magnetic.json")]);
    assert_eq!(code, 0);
    assert!(out.contains(CONVENTION));
    assert!(out.contains("# seed: 0"));
    assert!(out.contains("(-1.0000000000000000e0 "), "{out}");
}

#[test]
fn retrace_asset_reduces_to_the_empty_word() {
    let (code, out, _) = cli(&["reduce", "--loop", &asset("retrace.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("remaining: 0"));
    assert!(out.contains("verdict: trivial_certificate"));
}

#[test]
fn exit_codes_follow_the_error_class() {
    assert_eq!(cli(&["holonomy"]).0, 2);
    assert_eq!(cli(&["holonomy", "--loop", "/nonexistent.json"]).0, 2);
    assert_eq!(cli(&["reduce", "--loop", &asset("retrace.json"), "--tol", "-1"]).0, 2);
    assert_eq!(cli(&["counterexample", "--N", "51"]).0, 2);
    assert_eq!(cli(&["probe", "--steps", "4"]).0, 2);
    assert_eq!(cli(&["frobnicate"]).0, 2);
    assert_eq!(cli(&["holonomy", "--algebra", "so3", "--loop", &asset("circle.json")]).0, 2);
    assert_eq!(cli(&["factorize", "--loop", &asset("circle.json")]).0, 4);
    assert_eq!(cli(&["sets", "--loop", &asset("circle.json")]).0, 0);
    // The circle through the origin meets the puncture.
    let (code, _, err) = cli(&["holonomy", "--loop", &asset("circle.json"), "--connection", &asset("puncture.json")]);
    assert_eq!(code, 3, "{err}");
    assert_eq!(cli(&["--help"]).0, 0);
}

#[test]
fn every_command_reports_banner_and_seed() {
    let dir = TempDir::new().unwrap();
    let out_svg = tmp(&dir, "c.svg");
    let commands: Vec<Vec<String>> = vec![
        vec!["holonomy".into(), "--loop".into(), asset("two_petal.json"), "--steps".into(), "64".into()],
        vec!["reduce".into(), "--loop".into(), asset("two_petal.json")],
        vec![
            "equiv".into(),
            "--loop".into(),
            asset("two_petal.json"),
            "--loop2".into(),
            asset("retrace.json"),
            "--samples".into(),
            "3".into(),
            "--steps".into(),
            "64".into(),
        ],
        vec!["counterexample".into(), "--N".into(), "4".into(), "--plot".into(), out_svg.display().to_string()],
        vec!["approx".into(), "--N".into(), "2".into()],
        vec!["sets".into(), "--loop".into(), asset("two_petal.json")],
        vec!["factorize".into(), "--loop".into(), asset("two_petal.json")],
        vec!["probe".into(), "--seed".into(), "9".into()],
    ];
    for args in commands {
        for format in ["text", "json"] {
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.extend(["--format", format]);
            let (code, out, err) = cli(&a);
            assert_eq!(code, 0, "{a:?}: {err}");
            assert!(out.contains(CONVENTION), "{a:?}");
            let seed = if a.contains(&"9") { "9" } else { "0" };
            if format == "json" {
                let v: serde_json::Value = serde_json::from_str(&out).unwrap();
                assert_eq!(v["seed"].to_string(), seed);
            } else {
                assert!(out.contains(&format!("# seed: {seed}")));
            }
        }
    }
}

#[test]
fn emitted_json_round_trips_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let ce = tmp(&dir, "ce.json");
    let fac = tmp(&dir, "fac.json");
    let word = tmp(&dir, "word.json");
    let approx = tmp(&dir, "approx.json");
    assert_eq!(cli(&["counterexample", "--N", "6", "--out", ce.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["factorize", "--loop", &asset("two_petal.json"), "--out", fac.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["reduce", "--loop", &asset("two_petal.json"), "--out", word.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["approx", "--N", "3", "--out", approx.to_str().unwrap()]).0, 0);
    let (_, report, _) = cli(&["holonomy", "--loop", &asset("circle.json"), "--format", "json"]);
    let mut texts = vec![report];
    for p in [&ce, &fac, &word, &approx] {
        texts.push(std::fs::read_to_string(p).unwrap());
    }
    for name in ["circle.json", "retrace.json", "two_petal.json", "u1_magnetic.json", "puncture.json"] {
        texts.push(std::fs::read_to_string(asset(name)).unwrap());
    }
    for text in &texts {
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(&to_json(&v).unwrap(), text);
    }
    let loop_back: Loop = serde_json::from_str(&texts[1]).unwrap();
    assert_eq!(to_json(&loop_back).unwrap(), texts[1]);
    assert_eq!(
        texts[1],
        to_json(&build_counterexample(&CounterexampleSpec::with_depth(6)).unwrap()).unwrap()
    );
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<(String, String)> = (0..2)
        .map(|k| {
            let svg = tmp(&dir, &format!("p{k}.svg"));
            let js = tmp(&dir, &format!("p{k}.json"));
            let (_, a, _) = cli(&[
                "equiv",
                "--loop",
                &asset("circle.json"),
                "--loop2",
                &asset("two_petal.json"),
                "--samples",
                "4",
                "--steps",
                "128",
                "--seed",
                "42",
                "--format",
                "json",
            ]);
            let (_, b, _) = cli(&[
                "counterexample",
                "--N",
                "5",
                "--out",
                js.to_str().unwrap(),
                "--plot",
                svg.to_str().unwrap(),
            ]);
            (
                a + &b,
                std::fs::read_to_string(&svg).unwrap() + &std::fs::read_to_string(&js).unwrap(),
            )
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

fn polyline(svg: &str) -> Vec<(f64, f64)> {
    let start = svg.find("points=\"").unwrap() + 8;
    let end = start + svg[start..].find('"').unwrap();
    svg[start..end]
        .split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn svg_renders_follow_the_loop() {
    let dir = TempDir::new().unwrap();
    let render = |loop_path: &str| -> String {
        let out = tmp(&dir, "r.svg");
        assert_eq!(cli(&["plot", "--loop", loop_path, "--out", out.to_str().unwrap()]).0, 0);
        std::fs::read_to_string(out).unwrap()
    };
    let circle = render(&asset("circle.json"));
    let pts = polyline(&circle);
    assert_eq!(pts.len(), 4096);
    assert_eq!(pts[0], (0.0, -0.0));
    assert!((pts[4095].0).abs() < 1e-12 && (pts[4095].1).abs() < 1e-12);
    assert!(circle.contains("<circle cx=\"0\" cy=\"-0\""));

    let trivial = tmp(&dir, "trivial.json");
    std::fs::write(&trivial, to_json(&holonomy_lab::equiv::planar_trivial()).unwrap()).unwrap();
    let t = render(trivial.to_str().unwrap());
    let pts = polyline(&t);
    assert!(pts.iter().all(|&p| p == pts[0]));
    assert!(t.contains("<circle"));

    let ce = tmp(&dir, "ce.json");
    assert_eq!(cli(&["counterexample", "--N", "8", "--out", ce.to_str().unwrap()]).0, 0);
    let pts = polyline(&render(ce.to_str().unwrap()));
    let radius: Vec<f64> = pts.iter().map(|(x, y)| x.hypot(*y)).collect();
    let strokes = (1..radius.len() - 1)
        .filter(|&k| radius[k] > 0.0 && radius[k] >= radius[k - 1] && radius[k] > radius[k + 1])
        .count();
    assert_eq!(strokes, 8);

    let (code, csv, _) = cli(&["plot", "--loop", &asset("circle.json"), "--format", "csv", "--samples", "11"]);
    assert_eq!(code, 0);
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn threads_variable_does_not_change_results() {
    let args = [
        "equiv",
        "--loop",
        &asset("two_petal.json"),
        "--loop2",
        &asset("retrace.json"),
        "--samples",
        "6",
        "--steps",
        "64",
        "--format",
        "json",
    ];
    let a = cli(&args).1;
    // Serial fallback through the library entry point gives the same bytes.
    std::env::set_var(holonomy_lab::fanout::THREADS_ENV, "0");
    let b = cli(&args).1;
    std::env::remove_var(holonomy_lab::fanout::THREADS_ENV);
    assert_eq!(a, b);
}
