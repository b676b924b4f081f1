use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use selfcontract::io::{parse_curve_csv, parse_trace_json};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_selfcontract"));
    c.env_remove("SELFCONTRACT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_examples() {
    let dir = TempDir::new().unwrap();
    let line = write(&dir, "line.csv", "0,0\n1,0\n2,0\n");
    let back = write(&dir, "back.csv", "0,0\n1,0\n0.4,0\n");
    let empty = write(&dir, "empty.csv", "");

    let o = run(&["check", s(&line), "--mode", "sc"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("HOLDS"));

    let o = run(&["check", s(&back), "--mode", "sc"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness (0, 1, 2)"), "{}", stdout(&o));
    assert!(stdout(&o).contains("violation 0.2"));

    assert_eq!(code(&run(&["check", s(&empty)])), 2);
}

#[test]
fn check_modes() {
    let dir = TempDir::new().unwrap();
    // inward spiral: contracted but turns back toward earlier vertices
    let spiral = write(&dir, "spiral.csv", "1,0\n0.3536,0.3536\n0,0.25\n-0.0884,0.0884\n-0.0625,0\n");
    assert_eq!(code(&run(&["check", s(&spiral), "--mode", "sc"])), 0);
    assert_eq!(code(&run(&["check", s(&spiral), "--mode", "se"])), 1);
    let outward = write(&dir, "outward.csv", "-0.0625,0\n-0.0884,0.0884\n0,0.25\n0.3536,0.3536\n1,0\n");
    assert_eq!(code(&run(&["check", s(&outward), "--mode", "se"])), 0);
    assert_eq!(code(&run(&["check", s(&outward), "--mode", "sc"])), 1);
    // reversed, it contracts, but the right-angle turn is not strong
    let inward = write(&dir, "in.csv", "1,1\n1,0\n0,0\n");
    assert_eq!(code(&run(&["check", s(&inward), "--mode", "sc"])), 0);
    assert_eq!(code(&run(&["check", s(&inward), "--mode", "halfspace"])), 0);
    assert_eq!(code(&run(&["check", s(&inward), "--mode", "strong"])), 1);
    let obtuse = write(&dir, "obtuse.csv", "2,1\n1,0\n0,0\n");
    assert_eq!(code(&run(&["check", s(&obtuse), "--mode", "strong"])), 0);
    assert_eq!(code(&run(&["check", s(&obtuse), "--mode", "sideways"])), 2);
}

#[test]
fn malformed_inputs_exit_two_without_panicking() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("ragged.csv", "0,0\n1\n"),
        ("word.csv", "0,zero\n"),
        ("nan.csv", "0,nan\n"),
        ("comments.csv", "# nothing\n\n"),
        ("mixed.csv", "t=0,1\n2\n"),
        ("bad.json", "{\"dimension\": 2, \"points\": [[1]]}"),
        ("trunc.json", "{\"dimension\": 2"),
    ];
    for (name, text) in cases {
        let p = write(&dir, name, text);
        for cmd in ["check", "length", "meanwidth", "bound", "plot"] {
            let o = run(&[cmd, s(&p)]);
            assert_eq!(code(&o), 2, "{cmd} {name}");
            assert!(!stderr(&o).contains("panicked"), "{cmd} {name}");
        }
        let o = run(&["approx", s(&p), "--delta", "0.1"]);
        assert_eq!(code(&o), 2, "approx {name}");
    }
    let bin_file = dir.path().join("bin.csv");
    fs::write(&bin_file, [0xff, 0xfe, 0x00]).unwrap();
    assert_eq!(code(&run(&["check", s(&bin_file)])), 2);
    assert_eq!(code(&run(&["check", "/nonexistent/curve.csv"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["check"])), 2);

    let line = write(&dir, "line.csv", "0,0\n1,0\n");
    assert_eq!(code(&run(&["check", s(&line), "--tol", "-1"])), 2);
    assert_eq!(code(&run(&["check", s(&line), "--dim", "3"])), 2);
    assert_eq!(code(&run(&["meanwidth", s(&line), "--samples", "1"])), 2);
    assert_eq!(code(&run(&["approx", s(&line), "--delta", "0"])), 2);
    assert_eq!(code(&run(&["approx", s(&line), "--delta", "-1"])), 2);
    for bad in [
        vec!["gen", "flow-curve", "--h", "0"],
        vec!["gen", "flow-curve", "--horizon", "-1"],
        vec!["gen", "prox-polyline", "--iters", "0"],
        vec!["gen", "prox-polyline", "--dim", "0"],
        vec!["gen", "prox-polyline", "--function", "cubic"],
        vec!["gen", "prox-polyline", "--schedule", "explicit:2"],
        vec!["gen", "random-walk", "--x0", "1,2", "--dim", "3"],
        vec!["foliate", "--function", "norm", "--x0", "3,4", "--levels", "1,2"],
        vec!["foliate", "--function", "norm", "--x0", "3,4", "--levels", "-1"],
        vec!["foliate", "--function", "norm", "--x0", "3,4", "--levels", "9"],
    ] {
        let o = run(&bad);
        assert_eq!(code(&o), 2, "{bad:?}");
        assert!(!stderr(&o).contains("panicked"), "{bad:?}");
    }
}

#[test]
fn length_and_mean_width() {
    let dir = TempDir::new().unwrap();
    let back = write(&dir, "back.csv", "0,0\n1,0\n0.4,0\n");
    let o = run(&["length", s(&back)]);
    assert_eq!(stdout(&o).trim(), "1.6");

    // unit segment in the plane: mean width 2/π
    let seg = write(&dir, "seg.csv", "0,0\n1,0\n");
    let o = run(&["meanwidth", s(&seg), "--samples", "200000"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut parts = text.split_whitespace();
    let w: f64 = parts.next().unwrap().parse().unwrap();
    parts.next();
    let se: f64 = parts.next().unwrap().parse().unwrap();
    assert!((w - 2.0 / std::f64::consts::PI).abs() < 4.0 * se, "{w} ± {se}");
}

#[test]
fn bound_reports_both_forms() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("p.csv");
    assert_eq!(code(&run(&["gen", "prox-polyline", "--out", s(&curve)])), 0);
    let o = run(&["bound", s(&curve), "--samples", "20000"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("mean-width bound") && text.contains("diameter bound"));
    assert!(text.contains("C_n "));

    let back = write(&dir, "back.csv", "0,0\n1,0\n0.4,0\n");
    let o = run(&["bound", s(&back)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("(0, 1, 2)"));
}

#[test]
fn prox_huber_reaches_noncritical_limit() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("t.json");
    let o = run(&[
        "prox",
        "--function",
        "huber",
        "--x0",
        "2",
        "--schedule",
        "geometric:0.5,0.5",
        "--iters",
        "80",
        "--out",
        s(&json),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("limit noncritical: |subgrad|min = 1\n"), "{}", stdout(&o));
    assert!(stdout(&o).contains("step-sum ratio"));
    let file = parse_trace_json(&fs::read_to_string(&json).unwrap()).unwrap();
    let last = file.points.last().unwrap()[0];
    assert!((last - 1.0).abs() < 1e-6, "{last}");
    assert!(file.trace().is_ok());
}

#[test]
fn prox_quadratic_iterates_halve() {
    let o = run(&["prox", "--function", "quadratic:A=2", "--x0", "1", "--schedule", "constant:0.5", "--iters", "12"]);
    assert_eq!(code(&o), 0);
    // artifact on stdout, report on stderr
    let file = parse_trace_json(&stdout(&o)).unwrap();
    assert_eq!(file.points.len(), 13);
    for (i, p) in file.points.iter().enumerate() {
        assert_eq!(p[0], 0.5f64.powi(i as i32));
    }
    assert!(stderr(&o).contains("monotone distances: HOLDS"));
}

#[test]
fn prox_nonsmooth_functions() {
    for (f, x0) in [("norm:lambda=1", "3,-4"), ("maxaffine:a=1,0|-1,0|0,1;b=0,0,-1", "2,3")] {
        let o = run(&["prox", "--function", f, "--x0", x0, "--schedule", "harmonic", "--iters", "30"]);
        assert_eq!(code(&o), 0, "{f}: {}", stderr(&o));
        assert!(parse_trace_json(&stdout(&o)).is_ok());
    }
}

#[test]
fn prox_rejects_bad_input() {
    for args in [
        vec!["--function", "huber", "--x0", "2", "--schedule", "constant:1.5"],
        vec!["--function", "huber", "--x0", "2", "--schedule", "explicit:0.5,1.5"],
        vec!["--function", "huber", "--x0", "2", "--schedule", "geometric:0.5"],
        vec!["--function", "quartic", "--x0", "2"],
        vec!["--function", "quadratic:A=1,2|2,1", "--x0", "1,1"],
        vec!["--function", "huber", "--x0", "1,2"],
        vec!["--function", "huber", "--x0", "two"],
        vec!["--function", "huber", "--x0", "2", "--iters", "0"],
        vec!["--function", "huber", "--x0", "2", "--stop-step", "-1"],
    ] {
        let mut full = vec!["prox"];
        full.extend(args.iter());
        let o = run(&full);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!stderr(&o).contains("panicked"));
    }
}

#[test]
fn generated_prox_polylines_are_self_contracted() {
    let dir = TempDir::new().unwrap();
    for seed in 0..12 {
        let p = dir.path().join(format!("p{seed}.csv"));
        let seed = seed.to_string();
        let dim = if seed.len() % 2 == 0 { "3" } else { "2" };
        assert_eq!(code(&run(&["gen", "prox-polyline", "--seed", &seed, "--dim", dim, "--out", s(&p)])), 0);
        assert_eq!(code(&run(&["check", s(&p), "--mode", "sc"])), 0, "seed {seed}");
    }
}

#[test]
fn random_walks_usually_fail() {
    let dir = TempDir::new().unwrap();
    let mut failures = 0;
    for seed in 0..20 {
        let p = dir.path().join(format!("w{seed}.csv"));
        assert_eq!(code(&run(&["gen", "random-walk", "--seed", &seed.to_string(), "--out", s(&p)])), 0);
        assert_eq!(parse_curve_csv(&fs::read_to_string(&p).unwrap()).unwrap().len(), 51);
        if code(&run(&["check", s(&p)])) == 1 {
            failures += 1;
        }
    }
    assert!(failures >= 18, "{failures}");
}

#[test]
fn flow_curve_is_strong_and_approximable() {
    let dir = TempDir::new().unwrap();
    let flow = dir.path().join("flow.csv");
    let o = run(&["gen", "flow-curve", "--function", "quadratic:diag=1,1", "--x0", "3,-1", "--out", s(&flow)]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["check", s(&flow), "--mode", "strong"])), 0);

    let aniso = dir.path().join("aniso.csv");
    let o = run(&["gen", "flow-curve", "--function", "quadratic:diag=1,4", "--x0", "2,1", "--out", s(&aniso)]);
    assert_eq!(code(&o), 0);
    let approx = dir.path().join("approx.csv");
    let o = run(&["approx", s(&aniso), "--delta", "0.05", "--out", s(&approx)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let poly = parse_curve_csv(&fs::read_to_string(&approx).unwrap()).unwrap();
    assert!(poly.len() >= 2);
    assert_eq!(code(&run(&["check", s(&approx), "--mode", "sc"])), 0);

    // a right-angle corner is not strongly self-contracted
    let corner = write(&dir, "corner.csv", "1,1\n1,0\n0,0\n");
    let o = run(&["approx", s(&corner), "--delta", "0.1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("VIOLATED"));
}

#[test]
fn foliate_writes_levels() {
    let o = run(&["foliate", "--function", "norm:lambda=1", "--x0", "3,4", "--levels", "4,2,1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let file = parse_trace_json(&stdout(&o)).unwrap();
    assert_eq!(file.levels.as_deref(), Some(&[5.0, 4.0, 2.0, 1.0][..]));
    let last = &file.points[3];
    assert!((last[0] - 0.6).abs() < 1e-6 && (last[1] - 0.8).abs() < 1e-6);
}

#[test]
fn output_is_deterministic_and_seed_env_overrides() {
    let gen = |seed_flag: &str, env: Option<&str>| {
        let mut c = bin();
        c.args(["gen", "prox-polyline", "--seed", seed_flag, "--dim", "3"]);
        if let Some(v) = env {
            c.env("SELFCONTRACT_SEED", v);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(gen("5", None), gen("5", None));
    assert_ne!(gen("5", None), gen("6", None));
    assert_eq!(gen("9", Some("5")), gen("5", None));

    let mut c = bin();
    c.args(["gen", "random-walk"]).env("SELFCONTRACT_SEED", "minus one");
    assert_eq!(c.output().unwrap().status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let p = write(&dir, "c.csv", "0,0,0\n1,2,0\n1,2,3\n");
    let a = run(&["bound", s(&p), "--samples", "5000"]);
    let b = run(&["bound", s(&p), "--samples", "5000"]);
    assert_eq!(a.stdout, b.stdout);
    let args = ["prox", "--function", "maxaffine:a=1,0|-1,0|0,1", "--x0", "2,3", "--iters", "20"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn plots() {
    let dir = TempDir::new().unwrap();
    let three = write(&dir, "three.csv", "0,0\n1,0\n1,1\n");
    let svg = dir.path().join("three.svg");
    assert_eq!(code(&run(&["plot", s(&three), "--out", s(&svg)])), 0);
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 3);
    assert!(!text.contains("class=\"inset\""));

    let o = run(&["prox", "--function", "quadratic:A=2,0|0,8", "--x0", "1,1", "--iters", "6"]);
    let json = write(&dir, "t.json", &stdout(&o));
    let o = run(&["plot", s(&json), "--widths", "--samples", "1000"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("class=\"inset\""));
    assert!(text.contains("class=\"width\""));
    assert_eq!(text.matches("<circle").count(), 7);

    let fine = write(&dir, "fine.csv", "0,0\n0.5,0\n1,0\n1,0.5\n");
    let coarse = write(&dir, "coarse.csv", "0,0\n1,0\n1,0.5\n");
    let o = run(&["plot", s(&fine), "--overlay", s(&coarse)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("class=\"overlay\""));
    assert_eq!(text.matches("class=\"overlay-vertex\"").count(), 3);

    let one = write(&dir, "one.csv", "2\n1\n0.5\n");
    let o = run(&["plot", s(&one)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("<circle").count(), 3);

    let three_d = write(&dir, "three_d.csv", "0,0,0\n");
    assert_eq!(code(&run(&["plot", s(&three), "--overlay", s(&three_d)])), 2);
}
