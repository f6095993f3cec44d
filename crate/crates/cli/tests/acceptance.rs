//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lamom::linalg::{min_eigenvalue, DEFAULT_DIM_LIMIT};
use lamom::maps::{
    identity_map, lambda1_map, normalized_image, random_positive_map, transpose_map,
    PositiveMapSpec,
};
use lamom::measurement::{
    build_observable, explicit_vb3, observable_from_twisted, BornSampler, Orientation,
};
use lamom::moments::{
    criteria_for, full_report, hankel_criterion, max_hankel_order, moments_of, oracle_q3_min,
    q3_optimal_bound, state_moments, vandermonde_check, CriteriaConfig, CriterionId,
    DEFAULT_RANK_TOL,
};
use lamom::states::{horodecki_state, random_separable_state, BipartiteDims};
use lamom_cli::family::grid;
use support::{code, lamom, stderr, stdout, Fixtures};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const QUTRITS: BipartiteDims = BipartiteDims { d_a: 3, d_b: 3 };

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn registry() -> Vec<PositiveMapSpec> {
    let mut maps = vec![identity_map(3), transpose_map(3), lambda1_map()];
    maps.extend((1..=3).map(|seed| random_positive_map(3, 2, seed)));
    maps
}

fn threshold_reproduction() -> Outcome {
    let mut found = Vec::new();
    for (criterion, expected) in [("q3", 3.1658), ("q3o", 3.0291), ("ppt3o", 4.7259)] {
        let t0 = Instant::now();
        let out = lamom(&["threshold", "--criterion", criterion, "--map", "lambda1"]);
        let elapsed = t0.elapsed();
        ensure(code(&out) == 0, || {
            format!("{criterion}: exit {} ({})", code(&out), stderr(&out))
        })?;
        let a: f64 = stdout(&out)
            .trim()
            .parse()
            .map_err(|e| format!("{criterion}: {e}"))?;
        ensure((a - expected).abs() <= 5e-4, || {
            format!("{criterion}: a*={a:.6}, expected {expected}")
        })?;
        ensure(elapsed < Duration::from_secs(5), || {
            format!("{criterion}: took {elapsed:?}")
        })?;
        found.push(format!("{criterion}={a:.6} ({:.0?})", elapsed));
    }
    Ok(found.join(", "))
}

fn classification_consistency() -> Outcome {
    let cfg = CriteriaConfig::default();
    let lam = lambda1_map();
    let pt_ids = [
        CriterionId::PtQ3,
        CriterionId::PtQ3Opt,
        CriterionId::PtHankel,
    ];
    let mut bad = Vec::new();
    let mut counts = [0usize; 3];
    for a in grid(2.0, 5.0, 301) {
        let rho = horodecki_state(a).map_err(|e| e.to_string())?;
        let reports = full_report(&rho, &lam, &cfg).map_err(|e| e.to_string())?;
        if a <= 3.0 {
            counts[0] += 1;
            if reports.iter().any(|r| r.verdict.detected()) {
                bad.push(format!("a={a}: detection in separable range"));
            }
        }
        if a > 3.1658 + 1e-3 && a <= 4.0 {
            counts[1] += 1;
            let q3 = reports
                .iter()
                .find(|r| r.criterion_id == CriterionId::Q3Lambda)
                .unwrap();
            let pt_detects = reports
                .iter()
                .any(|r| pt_ids.contains(&r.criterion_id) && r.verdict.detected());
            if !q3.verdict.detected() || pt_detects {
                bad.push(format!("a={a}: bound-entangled member misclassified"));
            }
        }
        if a > 4.01 {
            counts[2] += 1;
            let min_pt =
                min_eigenvalue(&rho.partial_transpose(), 1e-10).map_err(|e| e.to_string())?;
            if min_pt >= -1e-10 {
                bad.push(format!(
                    "a={a}: partial transpose min eigenvalue {min_pt:e}"
                ));
            }
        }
    }
    ensure(bad.is_empty(), || {
        format!("{} misclassifications, first: {}", bad.len(), bad[0])
    })?;
    Ok(format!(
        "0 misclassifications ({} separable, {} bound entangled, {} NPT grid points)",
        counts[0], counts[1], counts[2]
    ))
}

fn measurement_operator_identity() -> Outcome {
    let t0 = Instant::now();
    let lam = lambda1_map();
    let err = |e: lamom::MeasurementError| e.to_string();
    let o2 = build_observable(&lam, QUTRITS, 2, DEFAULT_DIM_LIMIT).map_err(err)?;
    let o3 = build_observable(&lam, QUTRITS, 3, DEFAULT_DIM_LIMIT).map_err(err)?;
    let o3x = observable_from_twisted(
        QUTRITS,
        3,
        &explicit_vb3(),
        2.0,
        Orientation::LiteralShift,
        DEFAULT_DIM_LIMIT,
    )
    .map_err(err)?;
    let mut worst = [0.0f64; 3];
    for a in grid(2.0, 5.0, 31) {
        let rho = horodecki_state(a).map_err(|e| e.to_string())?;
        let q = state_moments(&rho, &lam, DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
        for (slot, (obs, exact)) in [(&o2, q.q2()), (&o3, q.q3()), (&o3x, q.q3())]
            .into_iter()
            .enumerate()
        {
            let diff = (obs.expectation(&rho).map_err(err)? - exact).abs();
            worst[slot] = worst[slot].max(diff);
        }
    }
    let elapsed = t0.elapsed();
    ensure(worst.iter().all(|&w| w <= 1e-10), || {
        format!("max deviations {worst:?}")
    })?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "max |<O>-q_k|: k=2 {:.1e}, k=3 generic {:.1e}, k=3 explicit {:.1e} ({:.1?})",
        worst[0], worst[1], worst[2], elapsed
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut worst_value = 0.0f64;
    let mut worst_shape = 0.0f64;
    let mut points = 0;
    for d in [4usize, 9, 16] {
        let mut i = 0;
        loop {
            let q2 = 1.0 / d as f64 + i as f64 * 1e-2;
            if q2 > 1.0 + 1e-12 {
                break;
            }
            let q2 = q2.min(1.0);
            i += 1;
            points += 1;
            let closed = q3_optimal_bound(q2).map_err(|e| e.to_string())?;
            let sol = oracle_q3_min(q2, d).map_err(|e| e.to_string())?;
            worst_value = worst_value.max((closed.bound - sol.min).abs());
            let boundary = (1..=d).any(|n| (q2 - 1.0 / n as f64).abs() < 1e-3);
            if !boundary {
                let mut shape = vec![closed.x; closed.alpha];
                shape.push(1.0 - closed.alpha as f64 * closed.x);
                shape.resize(d, 0.0);
                for (got, want) in sol.argmin.iter().zip(&shape) {
                    worst_shape = worst_shape.max((got - want).abs());
                }
            }
        }
    }
    ensure(worst_value <= 1e-8, || {
        format!("value deviation {worst_value:e}")
    })?;
    ensure(worst_shape <= 1e-7, || {
        format!("minimizer deviation {worst_shape:e}")
    })?;
    Ok(format!(
        "{points} points, max value gap {worst_value:.1e}, max minimizer gap {worst_shape:.1e}"
    ))
}

fn property_suites() -> Outcome {
    let cfg = CriteriaConfig::default();
    let maps = registry();

    // (a) forward direction on separable states
    let mut worst_hankel = f64::INFINITY;
    let mut checks = 0;
    for seed in 0..200u64 {
        let rho = random_separable_state(QUTRITS, 1 + (seed % 10) as usize, 50_000 + seed)
            .map_err(|e| e.to_string())?;
        for lam in &maps {
            let q = state_moments(&rho, lam, cfg.rank_tol).map_err(|e| e.to_string())?;
            let h = hankel_criterion(&q, cfg.psd_tol);
            worst_hankel = worst_hankel.min(h.value);
            let flagged = criteria_for(&q, &cfg).iter().any(|r| r.verdict.detected());
            ensure(!flagged && h.value >= -1e-9, || {
                format!("(a) false detection: seed {seed}, map {}", lam.name())
            })?;
            checks += 1;
        }
    }

    // (b) Vandermonde factorization and (d) unit first moment
    let mut states: Vec<_> = [2.0, 3.0, 3.5, 4.0, 4.5, 5.0]
        .iter()
        .map(|&a| horodecki_state(a).unwrap())
        .collect();
    states.extend((0..5).map(|s| random_separable_state(QUTRITS, 4, s).unwrap()));
    let mut worst_vdm = 0.0f64;
    let mut worst_q1 = 0.0f64;
    for lam in &maps {
        for rho in &states {
            let theta = normalized_image(lam, rho).map_err(|e| e.to_string())?;
            let q = moments_of(&theta, DEFAULT_RANK_TOL, 9).map_err(|e| e.to_string())?;
            worst_q1 = worst_q1.max((q.q[1] - 1.0).abs());
            let spec =
                lamom::linalg::hermitian_eigen(&theta, 1e-10, false).map_err(|e| e.to_string())?;
            for l in 1..=max_hankel_order(&q) {
                worst_vdm =
                    worst_vdm.max(vandermonde_check(&q, &spec, l).map_err(|e| e.to_string())?);
            }
        }
    }
    ensure(worst_vdm <= 1e-10, || {
        format!("(b) Vandermonde residual {worst_vdm:e}")
    })?;

    // (c) bound dominance with equality at reciprocals
    let mut worst_dom = f64::INFINITY;
    for i in 1..=1000 {
        let q2 = i as f64 * 1e-3;
        let b = q3_optimal_bound(q2).map_err(|e| e.to_string())?.bound;
        worst_dom = worst_dom.min(b - q2 * q2);
    }
    ensure(worst_dom >= -1e-12, || {
        format!("(c) dominance violated by {worst_dom:e}")
    })?;
    let mut worst_eq = 0.0f64;
    for n in 1..=1000 {
        let q2 = 1.0 / n as f64;
        worst_eq = worst_eq.max((q3_optimal_bound(q2).unwrap().bound - q2 * q2).abs());
    }
    ensure(worst_eq <= 1e-12, || {
        format!("(c) equality at 1/n off by {worst_eq:e}")
    })?;

    ensure(worst_q1 <= 1e-10, || format!("(d) |q1-1| = {worst_q1:e}"))?;
    Ok(format!(
        "(a) {checks} state-map pairs, min Hankel eigenvalue {worst_hankel:.2e}; (b) residual {worst_vdm:.1e}; \
         (c) min gap {worst_dom:.1e}; (d) max |q1-1| {worst_q1:.1e}"
    ))
}

fn shot_noise_contract() -> Outcome {
    let lam = lambda1_map();
    let rho = horodecki_state(3.5).map_err(|e| e.to_string())?;
    let obs = build_observable(&lam, QUTRITS, 2, DEFAULT_DIM_LIMIT).map_err(|e| e.to_string())?;
    let exact = obs.expectation(&rho).map_err(|e| e.to_string())?;
    let sampler = BornSampler::new(&obs, &rho).map_err(|e| e.to_string())?;
    let mut within = 0;
    let mut worst_z = 0.0f64;
    for seed in 0..100 {
        let est = sampler.sample(100_000, seed).map_err(|e| e.to_string())?;
        let z = (est.mean - exact).abs() / est.stderr;
        worst_z = worst_z.max(z);
        if z <= 5.0 {
            within += 1;
        }
    }
    ensure(within >= 99, || {
        format!("only {within}/100 runs within 5 stderr")
    })?;
    let mut ratios = Vec::new();
    for seed in 0..10 {
        let small = sampler
            .sample(25_000, 1000 + seed)
            .map_err(|e| e.to_string())?;
        let large = sampler
            .sample(100_000, 1000 + seed)
            .map_err(|e| e.to_string())?;
        ratios.push(small.stderr / large.stderr);
    }
    let bad = ratios
        .iter()
        .filter(|&&r| !(1.4..=2.6).contains(&r))
        .count();
    ensure(bad == 0, || {
        format!("stderr ratios out of 2 ± 30%: {ratios:?}")
    })?;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    Ok(format!("{within}/100 runs with |z| <= 5 (max {worst_z:.2}); stderr ratio at 4x shots in [{lo:.3}, {hi:.3}]"))
}

fn robustness() -> Outcome {
    let fx = Fixtures::new();
    let mut cases: Vec<(String, Vec<String>, i32)> = [
        "malformed.json",
        "empty.json",
        "wrong_dims.json",
        "unknown_field.json",
        "bad_trace.json",
        "non_hermitian.json",
        "negative.json",
        "nan.json",
    ]
    .iter()
    .map(|f| (format!("state {f}"), vec!["analyze".into(), fx.arg(f)], 2))
    .collect();
    cases.push((
        "missing file".into(),
        vec!["analyze".into(), fx.missing()],
        2,
    ));
    cases.push((
        "zero map".into(),
        vec![
            "analyze".into(),
            fx.arg("mixed.json"),
            "--map".into(),
            fx.arg("zero_map.json"),
        ],
        2,
    ));
    cases.push((
        "malformed map".into(),
        vec![
            "analyze".into(),
            fx.arg("mixed.json"),
            "--map".into(),
            fx.arg("bad_map.json"),
        ],
        2,
    ));
    cases.push((
        "q2 > 1 map".into(),
        vec![
            "analyze".into(),
            fx.arg("psi_plus.json"),
            "--map".into(),
            fx.arg("overshoot_map.json"),
            "--json".into(),
        ],
        0,
    ));
    let args = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    cases.push(("sweep steps=1".into(), args("sweep --steps 1"), 2));
    cases.push((
        "threshold tol=1e-10".into(),
        args("threshold --criterion q3 --tol 1e-10"),
        2,
    ));
    cases.push((
        "threshold without crossing".into(),
        args("threshold --criterion q3 --map identity"),
        3,
    ));
    cases.push(("verify k=4".into(), args("verify-operators --k 4"), 2));
    cases.push((
        "simulate shots=0".into(),
        args("simulate --k 2 --shots 0"),
        2,
    ));

    for (name, argv, expected) in &cases {
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = lamom(&refs);
        let got = code(&out);
        ensure(got == *expected, || {
            format!(
                "{name}: exit {got}, expected {expected} ({})",
                stderr(&out).trim()
            )
        })?;
        ensure(!stderr(&out).contains("panicked"), || {
            format!("{name}: panic")
        })?;
        if name == "q2 > 1 map" {
            let v: serde_json::Value =
                serde_json::from_str(&stdout(&out)).map_err(|e| e.to_string())?;
            let detected = v["reports"][1]["verdict"] == "EntanglementDetected";
            ensure(detected && v["q"][2].as_f64().unwrap_or(0.0) > 1.0, || {
                "q2 > 1 not reported as detection".into()
            })?;
        }
    }
    Ok(format!(
        "{} malformed/degenerate invocations returned the expected exit codes",
        cases.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("threshold reproduction", threshold_reproduction),
        ("classification consistency", classification_consistency),
        (
            "measurement-operator identity",
            measurement_operator_identity,
        ),
        ("optimization-bound oracle equivalence", oracle_equivalence),
        ("moment-inequality property suites", property_suites),
        ("shot-noise contract", shot_noise_contract),
        ("robustness", robustness),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed in {:.1}s",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
