//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selfcontract::curves::{
    arc_length_reparam, check_tail_width_decrease, is_self_contracted, is_self_expanded, length, reverse,
    tail_width_profile, DiscreteCurve, ToleranceConfig,
};
use selfcontract::foliation::{gradient_flow_curve, polygonal_approximation};
use selfcontract::generate::{random_psd_quadratic, random_schedule, random_start, random_walk};
use selfcontract::geom::{mean_width, ConvexBody, SphereSampler};
use selfcontract::prox::{
    prox_step, run_prox, trace_to_curve, verify_convergence_bound, verify_monotone_distances, ConvexFunction,
    MaxAffine, NormScaled, Huber, ProxConfig, ProxSchedule, ProxTrace, Quadratic,
};
use selfcontract::spherelemmas::{
    bound_constants, greedy_saturated_family, hemisphere_direction, hemisphere_hypothesis_threshold,
    verify_length_bound, zeta_bound,
};
use selfcontract::{Point, UnitVector};

type Outcome = (bool, String);

struct Corpus {
    traces: Vec<(u64, usize, ProxTrace)>,
}

fn corpus() -> Corpus {
    let dims = [2, 3, 5];
    let traces = (0..100u64)
        .map(|seed| {
            let n = dims[seed as usize % 3];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_psd_quadratic(n, &mut rng);
            let sched = random_schedule(30, &mut rng);
            let x0 = random_start(n, 3.0, &mut rng);
            let trace = run_prox(&f, &x0, &sched, &ProxConfig { max_iter: 30, ..Default::default() })
                .expect("prox run on a random quadratic");
            (seed, n, trace)
        })
        .collect();
    Corpus { traces }
}

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn noncritical_limit() -> Outcome {
    let sched = ProxSchedule::Geometric { initial: 0.5, ratio: 0.5 };
    let trace = run_prox(&Huber, &pt(&[2.0]), &sched, &ProxConfig { max_iter: 60, ..Default::default() })
        .expect("prox run");
    let last = trace.last()[0];
    let g = Huber.min_norm_subgradient(&[last]).unwrap()[0].abs();
    let ok = (last - 1.0).abs() <= 1e-6 && g == 1.0;
    (ok, format!("limit {last:.12}, |min-norm subgradient| = {g}"))
}

fn prox_traces_self_contracted(c: &Corpus) -> Outcome {
    let tol = ToleranceConfig::default();
    let mut fails = Vec::new();
    for (seed, _, trace) in &c.traces {
        let sc = is_self_contracted(&trace_to_curve(trace), &tol).holds;
        let mono = verify_monotone_distances(trace, tol.abs_tol).holds;
        if !(sc && mono) {
            fails.push(*seed);
        }
    }
    (fails.is_empty(), format!("{} traces, failures at seeds {fails:?}", c.traces.len()))
}

fn length_bound(c: &Corpus) -> Outcome {
    let sampler = SphereSampler::new(42, 100_000).unwrap();
    let tol = ToleranceConfig::default();
    let mut fails = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut c_n_min = f64::INFINITY;
    for (seed, _, trace) in &c.traces {
        match verify_length_bound(&trace_to_curve(trace), &sampler, &tol) {
            Ok(r) => {
                if !r.holds {
                    fails.push(*seed);
                }
                if r.ratio.is_finite() {
                    max_ratio = max_ratio.max(r.ratio);
                }
                c_n_min = c_n_min.min(r.c_n);
            }
            Err(_) => fails.push(*seed),
        }
    }
    (
        fails.is_empty(),
        format!("max length/width ratio {max_ratio:.4} (smallest C_n {c_n_min:.3e}), failures {fails:?}"),
    )
}

fn counting() -> Outcome {
    let mut worst = String::new();
    let mut ok = true;
    for n in 2..=5usize {
        let cap = 3usize.pow(n as u32);
        let mut largest = 0;
        for j in 0..1000u64 {
            let dirs = SphereSampler::new(1_000_000 * n as u64 + j, 300).unwrap().sample(n);
            let cands: Vec<UnitVector> = dirs.iter().map(|u| UnitVector::new(u.to_vec()).unwrap()).collect();
            let fam = greedy_saturated_family(&cands).unwrap();
            largest = largest.max(fam.len());
            ok &= fam.len() <= cap && fam.max_pairwise_dot <= 0.5 + 1e-12;
        }
        worst.push_str(&format!(" n={n}: max size {largest} <= {cap};"));
    }
    (ok, format!("4000 families;{worst}"))
}

/// Uniform directions accepted while they keep every pairwise product at or
/// above the hypothesis threshold.
fn hypothesis_set(n: usize, rng: &mut ChaCha8Rng) -> Vec<UnitVector> {
    let threshold = hemisphere_hypothesis_threshold(n);
    let size = rng.random_range(1..=60);
    let seed = rng.random::<u64>();
    let dirs = SphereSampler::new(seed, 400).unwrap().sample(n);
    let mut out: Vec<UnitVector> = Vec::new();
    for u in dirs.iter() {
        if out.len() == size {
            break;
        }
        if out.iter().all(|v| v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() >= -threshold) {
            out.push(UnitVector::new(u.to_vec()).unwrap());
        }
    }
    out
}

/// A randomly rotated orthonormal frame together with vectors tilted toward
/// the negative of another frame axis, so that pairwise products sit just
/// above the hypothesis threshold.
fn near_threshold_set(n: usize, rng: &mut ChaCha8Rng) -> Vec<UnitVector> {
    let threshold = hemisphere_hypothesis_threshold(n);
    let mut frame: Vec<Vec<f64>> = Vec::new();
    while frame.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for e in &frame {
            let d: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(e).for_each(|(a, b)| *a -= d * b);
        }
        let nv = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if nv > 1e-3 {
            frame.push(v.into_iter().map(|c| c / nv).collect());
        }
    }
    let mut cands: Vec<Vec<f64>> = frame.clone();
    for _ in 0..3 * n {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j {
            cands.push(frame[i].iter().zip(&frame[j]).map(|(a, b)| a - threshold * b).collect());
        }
    }
    let mut out: Vec<UnitVector> = Vec::new();
    for c in cands {
        let u = UnitVector::normalize(c).unwrap();
        if out.iter().all(|v| v.iter().zip(u.iter()).map(|(a, b)| a * b).sum::<f64>() >= -threshold) {
            out.push(u);
        }
    }
    out
}

fn hemisphere() -> Outcome {
    let mut ok = true;
    let mut report = String::new();
    for n in 2..=4usize {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + n as u64);
        let bound = zeta_bound(n);
        let sum_cap = 3f64.powi(2 * n as i32);
        let mut min_seen = f64::INFINITY;
        for k in 0..500 {
            let set = if k % 2 == 0 { hypothesis_set(n, &mut rng) } else { near_threshold_set(n, &mut rng) };
            match hemisphere_direction(&set) {
                Ok(h) => {
                    min_seen = min_seen.min(h.min_dot);
                    ok &= h.min_dot >= bound - 1e-12 && h.sum_norm_sq <= sum_cap;
                }
                Err(_) => ok = false,
            }
        }
        report.push_str(&format!(" n={n}: min <zeta,x> {min_seen:.4} >= {bound:.3e};"));
    }
    (ok, format!("1500 sets;{report}"))
}

fn reverse_equivalence(c: &Corpus) -> Outcome {
    let tol = ToleranceConfig::default();
    let mut curves: Vec<DiscreteCurve> = c.traces.iter().map(|(_, _, t)| trace_to_curve(t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut walks = 0;
    while walks < 100 {
        let n = [2, 3, 5][walks % 3];
        let w = random_walk(n, 30, &mut rng);
        if !is_self_contracted(&w, &tol).holds {
            curves.push(w);
            walks += 1;
        }
    }
    let mismatches = curves
        .iter()
        .filter(|g| is_self_contracted(g, &tol).holds != is_self_expanded(&reverse(g), &tol).holds)
        .count();
    (mismatches == 0, format!("{} curves (100 non-self-contracted walks), {mismatches} mismatches", curves.len()))
}

fn mean_width_calibration() -> Outcome {
    let mut ok = true;
    let mut report = Vec::new();
    for seed in [42u64, 43] {
        let sampler = SphereSampler::new(seed, 100_000).unwrap();
        let cases = [
            ("ball R2", ConvexBody::ball(Point::origin(2), 1.0).unwrap(), 2.0),
            ("ball R3", ConvexBody::ball(Point::origin(3), 1.0).unwrap(), 2.0),
            ("segment R2", ConvexBody::point_cloud(vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0])]).unwrap(), 2.0 / PI),
        ];
        for (name, body, expected) in cases {
            let w = mean_width(&body, &sampler).unwrap().value;
            let rel = (w - expected).abs() / expected;
            ok &= rel <= 0.01;
            report.push(format!("{name}/{seed} {w:.5}"));
        }
    }
    (ok, report.join(", "))
}

fn width_monotonicity() -> Outcome {
    let eps = bound_constants(2).unwrap().epsilon;
    let sampler = SphereSampler::new(42, 100_000).unwrap();
    let mut fails = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let f = random_psd_quadratic(2, &mut rng);
        let trace = run_prox(&f, &random_start(2, 3.0, &mut rng), &random_schedule(30, &mut rng), &ProxConfig {
            max_iter: 30,
            ..Default::default()
        })
        .unwrap();
        let curve = trace_to_curve(&trace);
        let profile = tail_width_profile(&curve, &sampler).unwrap();
        let nonincreasing = profile
            .widths
            .windows(2)
            .all(|w| w[1].value <= w[0].value + 3.0 * w[0].standard_error.max(w[1].standard_error));
        let dominated = check_tail_width_decrease(&curve, &profile, eps).holds;
        if !(nonincreasing && dominated) {
            fails.push(seed);
        }
    }
    (fails.is_empty(), format!("20 traces, epsilon {eps:.3e}, failures {fails:?}"))
}

fn polygonal() -> Outcome {
    let f = Quadratic::diagonal(&[1.0, 4.0]).unwrap();
    let flow = gradient_flow_curve(&f, &pt(&[1.0, 1.0]), 1e-3, 10.0).unwrap();
    let fine = arc_length_reparam(&flow, 1e-3).unwrap();
    let tol = ToleranceConfig::default();
    let mut ok = true;
    let mut report = vec![format!("{} samples", fine.len())];
    for delta in [0.02, 0.05, 0.1] {
        match polygonal_approximation(&fine, delta, &tol) {
            Ok(r) => {
                let sc = is_self_contracted(&r.polyline, &tol).holds;
                ok &= sc && r.hausdorff_achieved <= delta + 1e-6;
                report.push(format!(
                    "delta {delta}: {} vertices, d_H {:.5}, sc {sc}",
                    r.polyline.len(),
                    r.hausdorff_achieved
                ));
            }
            Err(e) => {
                ok = false;
                report.push(format!("delta {delta}: {e}"));
            }
        }
    }
    (ok, report.join("; "))
}

fn golden_section(phi: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while b - a > 1e-11 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
        }
    }
    0.5 * (a + b)
}

fn prox_oracle() -> Outcome {
    let catalog: Vec<Box<dyn ConvexFunction>> = vec![
        Box::new(Huber),
        Box::new(Quadratic::new(vec![vec![3.0]], vec![-1.0], 0.5).unwrap()),
        Box::new(NormScaled::new(0.7, 1).unwrap()),
        Box::new(MaxAffine::new(vec![vec![-1.0], vec![0.5], vec![2.0]], vec![0.0, 0.2, -1.0]).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let f = &catalog[k % catalog.len()];
        let x = rng.random_range(-5.0..5.0);
        let t = 1.0 - rng.random::<f64>();
        let got = prox_step(f.as_ref(), &pt(&[x]), t, 1e-12).unwrap().point[0];
        let phi = |y: f64| f.value(&[y]) + (y - x).powi(2) / (2.0 * t);
        let want = golden_section(phi, -20.0, 20.0);
        worst = worst.max((got - want).abs());
    }
    (worst <= 1e-6, format!("1000 pairs over 4 functions, max deviation {worst:.2e}"))
}

fn reparam(c: &Corpus) -> Outcome {
    let tol = ToleranceConfig::default();
    let mut max_ratio: f64 = 0.0;
    let mut max_len_err: f64 = 0.0;
    let mut lost_sc = 0;
    for (_, _, trace) in &c.traces {
        let curve = trace_to_curve(trace);
        let len = length(&curve);
        let r = arc_length_reparam(&curve, len / 200.0).unwrap();
        let (pts, ts) = (r.points(), r.params().unwrap());
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                max_ratio = max_ratio.max(pts[i].distance(&pts[j]) / (ts[j] - ts[i]));
            }
        }
        max_len_err = max_len_err.max((length(&r) - len).abs());
        if !is_self_contracted(&r, &tol).holds {
            lost_sc += 1;
        }
    }
    (
        max_ratio <= 1.0 + 1e-12 && max_len_err <= 1e-9 && lost_sc == 0,
        format!("max Lipschitz ratio {max_ratio:.15}, max length error {max_len_err:.2e}, lost SC {lost_sc}"),
    )
}

fn convergence_bound(c: &Corpus) -> Outcome {
    let mut fails = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for (seed, _, trace) in &c.traces {
        match verify_convergence_bound(trace, 1e-9) {
            Ok(r) => {
                if !(r.holds && r.radius_holds) {
                    fails.push(*seed);
                }
                max_ratio = max_ratio.max(r.ratio);
            }
            Err(_) => fails.push(*seed),
        }
    }
    (fails.is_empty(), format!("max step-sum/radius ratio {max_ratio:.4}, failures {fails:?}"))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let c = corpus();
    let criteria: Vec<Criterion> = vec![
        ("noncritical limit of the piecewise example", Box::new(noncritical_limit)),
        ("prox polylines are self-contracted", Box::new(|| prox_traces_self_contracted(&c))),
        ("length bounded by C_n times mean width", Box::new(|| length_bound(&c))),
        ("saturated families have at most 3^n members", Box::new(counting)),
        ("hemisphere direction", Box::new(hemisphere)),
        ("reversal swaps contracted and expanded", Box::new(|| reverse_equivalence(&c))),
        ("mean width calibration", Box::new(mean_width_calibration)),
        ("tail width decrease", Box::new(width_monotonicity)),
        ("polygonal approximation", Box::new(polygonal)),
        ("prox against golden-section oracle", Box::new(prox_oracle)),
        ("arc-length reparameterization", Box::new(|| reparam(&c))),
        ("step-sum convergence bound", Box::new(|| convergence_bound(&c))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = run();
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
