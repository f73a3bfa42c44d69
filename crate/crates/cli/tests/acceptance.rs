//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runtimes are measured and count toward each verdict.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radial_lab::bounds::*;
use radial_lab::frostman::{check_ball_frostman, check_dyadic_frostman, extract_uniform_subset};
use radial_lab::generators::{
    cantor_product, harness_cubes, line_set, random_tree_set, sturmian_family, sturmian_family_size,
};
use radial_lab::incidence::{count_incidences, count_incidences_brute, fitted_exponent, renwang_harness, TubeSet};
use radial_lab::projection::{angular_resolution_limit, estimate_dimension, radial_counts};
use radial_lab::{CubeSet, Dyadic, Point2, Rational};
use radial_lab_cli::config::{IncidenceParams, PrecisionWindow, ProjectionParams, SetSource};
use radial_lab_cli::{run, ExperimentConfig, ExperimentKind};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn f(x: Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn bound_algebra() -> Outcome {
    let tol = 1e-12;
    let mut points = 0usize;
    let mut worst: f64 = 0.0;
    let mut close = |got: f64, want: f64, what: &str| -> Result<(), String> {
        worst = worst.max((got - want).abs());
        check((got - want).abs() <= tol, format!("{what}: got {got}, expected {want}"))
    };
    for a in 0..=200 {
        for b in 0..=200 {
            let (dx, dy) = (r(a, 100), r(b, 100));
            let (x, y) = (a as f64 / 100.0, b as f64 / 100.0);
            points += 1;
            close(f(bound_osw1(dx, dy).unwrap()), x.min(y).min(1.0), "osw1")?;
            close(bound_osw1(x, y).unwrap(), x.min(y).min(1.0), "osw1 f64")?;
            match bound_osw2(dx, dy).unwrap() {
                Some(v) => close(f(v), (x + y - 1.0).min(1.0), "osw2")?,
                None => check(b <= 100, format!("osw2 inapplicable at dY = {y}"))?,
            }
            let main = bound_main(dx, dy).unwrap();
            close(f(main.value), ((x + y) / 2.0).min(y).min(1.0), "main")?;
            close(bound_main(x, y).unwrap().value, ((x + y) / 2.0).min(y).min(1.0), "main f64")?;
            check(main.hypothesis_holds == (a > 0), "main hypothesis flag")?;
            if a > 0 && a <= 100 && b > 0 {
                close(f(incidence_exponent(dx, dy).unwrap()), y.min((x + y) / 2.0).min(1.0), "incidence exponent")?;
            }
            if dx <= dy.min(r(1, 1)) {
                close(f(bound_orthogonal_exceptional(dy, dx).unwrap()), (2.0 * x - y).max(0.0), "orthogonal")?;
            } else {
                check(bound_orthogonal_exceptional(dy, dx).is_err(), "orthogonal accepts u > min{dY,1}")?;
            }
            if a <= 100 && b > 0 {
                let rep = dominance_report(dx, dy).unwrap();
                check(rep.main_ge_osw1, format!("main < osw1 at ({x}, {y})"))?;
                check(rep.main_gt_osw1 == (dx < dy.min(r(1, 1))), format!("osw1 strictness at ({x}, {y})"))?;
                if let Some(gt) = rep.main_gt_osw2 {
                    check(rep.main_ge_osw2 == Some(true), "main < osw2")?;
                    check(gt == (dx + dy - r(1, 1) < r(1, 1)), format!("osw2 strictness at ({x}, {y})"))?;
                }
            }
        }
    }
    // Published values.
    check(bound_osw1(0.5, 0.5).unwrap() == 0.5, "osw1(1/2, 1/2)")?;
    check(bound_osw2(r(1, 2), r(3, 2)).unwrap() == Some(r(1, 1)), "osw2(1/2, 3/2)")?;
    check(bound_main(r(1, 2), r(1, 2)).unwrap().value == r(1, 2), "main(1/2, 1/2)")?;
    let rem = dominance_report(r(1, 5), r(4, 5)).unwrap();
    check(rem.main == r(1, 2) && rem.osw1 == r(1, 5) && rem.main_gt_osw1, "dominance at (0.2, 0.8)")?;
    Ok(format!("{points} grid points, max deviation {worst:.1e}"))
}

fn coupled_system() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    for a in 1..=50 {
        for b in 1..=50 {
            let (tx, ty) = (a as f64 * 0.02, b as f64 * 0.02);
            let closed = ty.min((tx + ty) / 2.0).min(1.0);
            let (sx, _) = coupled_fixed_point(tx, ty, 1e-9).map_err(|e| e.to_string())?;
            let grid = coupled_grid_minimum(tx, ty, 1e-3).map_err(|e| e.to_string())?;
            worst_closed = worst_closed.max((sx - closed).abs());
            worst_grid = worst_grid.max((sx - grid).abs());
            check((sx - closed).abs() <= 1e-6, format!("({tx}, {ty}): s_x {sx} vs closed form {closed}"))?;
            check((sx - grid).abs() <= 2e-3, format!("({tx}, {ty}): s_x {sx} vs grid minimum {grid}"))?;
        }
    }
    Ok(format!("2500 grid points, |s_x - closed| <= {worst_closed:.1e}, |s_x - grid| <= {worst_grid:.1e}"))
}

fn frostman_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let constants = [r(1, 1), r(3, 2), r(2, 1), r(4, 1), r(8, 1)];
    let (mut dyadic_true, mut ball_true) = (0, 0);
    for k in 0..200 {
        let n = rng.gen_range(1..=6);
        let set = if k % 2 == 0 { random_set(&mut rng, n, 0.02..0.5) } else { clustered_set(&mut rng, n, 1..120) };
        let p = rng.gen_range(0..=4u32);
        let s = r(p as i64, 2);
        let c = constants[rng.gen_range(0..constants.len())];
        let got = check_dyadic_frostman(&set, s, c).map_err(|e| e.to_string())?.verified;
        check(got == dyadic_oracle(&set, p, c), format!("dyadic disagreement: set {k}, s = {s}, C = {c}"))?;
        let cb = c * Rational::from_integer(rng.gen_range(1..=16));
        let got_ball = check_ball_frostman(&set, s, cb).map_err(|e| e.to_string())?.verified;
        check(got_ball == ball_oracle(&set, p, cb), format!("ball disagreement: set {k}, s = {s}, C = {cb}"))?;
        dyadic_true += got as u32;
        ball_true += got_ball as u32;
    }
    Ok(format!("200 sets, exact agreement (dyadic verified {dyadic_true}/200, ball verified {ball_true}/200)"))
}

fn extraction_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_margin = f64::INFINITY;
    for k in 0..50 {
        let n = rng.gen_range(8..=12);
        let eps = if k % 2 == 0 { 0.25 } else { 0.5 };
        let set = match k % 3 {
            0 => clustered_set(&mut rng, n, 50..3000),
            1 => random_tree_set(n, rng.gen_range(0.3..1.8), rng.gen()).map_err(|e| e.to_string())?.0,
            _ => {
                let a = random_tree_set(n, rng.gen_range(0.3..1.2), rng.gen()).map_err(|e| e.to_string())?.0;
                a.union(&clustered_set(&mut rng, n, 10..500)).unwrap()
            }
        };
        let ex = extract_uniform_subset(&set, eps).map_err(|e| e.to_string())?;
        let delta = ((eps * n as f64 + 1e-9).floor() as u32).max(1);
        check(ex.subset.iter().all(|c| set.contains(c)), format!("input {k}: subset leaves the input"))?;
        let cert = check_dyadic_frostman(&ex.subset, ex.certificate.s, ex.certificate.c).map_err(|e| e.to_string())?;
        check(cert.verified, format!("input {k}: output does not re-certify"))?;
        check(
            ex.certificate.c <= Rational::from_integer(1 << (2 * delta + 1)),
            format!("input {k}: C_out = {} exceeds 2^(2Δ+1)", ex.certificate.c),
        )?;
        let floor = set.len() as f64 * ((4 * delta + 2) as f64).powi(-(n.div_ceil(delta) as i32));
        check(ex.subset.len() as f64 >= floor, format!("input {k}: size {} below floor {floor}", ex.subset.len()))?;
        worst_margin = worst_margin.min(ex.subset.len() as f64 / floor.max(f64::MIN_POSITIVE));
    }
    Ok(format!("50 inputs, zero failures, smallest size/floor ratio {worst_margin:.1}"))
}

fn incidence_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for k in 0..100 {
        let n = rng.gen_range(1..=6);
        let p = random_set(&mut rng, n, 0.01..0.6);
        let ts = TubeSet::from_params(&random_set(&mut rng, n, 0.01..0.6));
        let fast = count_incidences(&p, &ts).map_err(|e| e.to_string())?.incidences;
        let slow = count_incidences_brute(&p, &ts).map_err(|e| e.to_string())?;
        check(fast == slow, format!("instance {k}: indexed {fast} vs brute {slow}"))?;
    }
    let n = 12;
    let side = 1u32 << n;
    let pick = |rng: &mut ChaCha8Rng| {
        let mut idx = std::collections::BTreeSet::new();
        while idx.len() < 4096 {
            idx.insert((rng.gen_range(0..side), rng.gen_range(0..side)));
        }
        idx
    };
    let p = CubeSet::from_indices(n, pick(&mut rng)).unwrap();
    let ts = TubeSet::from_indices(n, pick(&mut rng)).unwrap();
    let start = Instant::now();
    let rec = count_incidences(&p, &ts).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    check(t < Duration::from_secs(30), format!("n = 12 count took {t:?}"))?;
    Ok(format!("100 instances exact; n = 12 with 4096 cubes and tubes: I = {} in {:.2} s", rec.incidences, t.as_secs_f64()))
}

fn renwang_exponent() -> Outcome {
    let mut parts = Vec::new();
    for (s, t) in [(r(1, 1), r(1, 1)), (r(1, 2), r(1, 2)), (r(1, 2), r(1, 1))] {
        let mut recs = Vec::new();
        for n in 8..=12 {
            let (p, cert) = harness_cubes(n, t, 2024 + n as u64).map_err(|e| e.to_string())?;
            let m = sturmian_family_size(n, s);
            let rec = renwang_harness(&p, Some(&cert), |q| sturmian_family(q, s), m, 0.2).map_err(|e| e.to_string())?;
            recs.push(rec);
        }
        let fit = fitted_exponent(&recs).map_err(|e| e.to_string())?;
        let pred = f(t).min((f(s) + f(t)) / 2.0).min(1.0);
        check(fit >= pred - 0.2, format!("(s, t) = ({s}, {t}): fitted {fit:.3} < {pred} - 0.2"))?;
        parts.push(format!("({s},{t}) fit {fit:.3} >= {:.2}", pred - 0.2));
    }
    Ok(parts.join("; "))
}

fn projection_sanity() -> Outcome {
    let rho = Dyadic::new(1, 3);
    let n = 10;
    let m_hi = angular_resolution_limit(n, rho);
    let x = Point2::from_ratios(5, 16, 7, 16).unwrap();
    let counts = radial_counts(x, &CubeSet::full_grid(n), 4, m_hi, rho).unwrap().ok_or("full grid excluded")?;
    let full = estimate_dimension::<f64>(&counts, 4, m_hi).unwrap().slope;
    check((full - 1.0).abs() <= 0.05, format!("full grid slope {full}"))?;

    let n = 12;
    let rho = Dyadic::new(1, 2);
    let m_hi = angular_resolution_limit(n, rho);
    let y = line_set(n, Dyadic::new(1, 1), Dyadic::new(1, 2)).unwrap();
    let x = Point2::from_ratios(1, 2, 1, 2).unwrap();
    let counts = radial_counts(x, &y, 4, m_hi, rho).unwrap().ok_or("line excluded")?;
    let line = estimate_dimension::<f64>(&counts, 4, m_hi).unwrap().slope;
    check(line <= 0.1, format!("collinear slope {line}"))?;
    Ok(format!("full grid slope {full:.3} (target 1 ± 0.05); collinear slope {line:.3} (<= 0.1)"))
}

fn cantor_source(digits_x: Vec<u8>, digits_y: Vec<u8>) -> SetSource {
    SetSource {
        generator: Some(radial_lab::generators::GeneratorSpec::CantorProduct { level: 12, digits_x, digits_y }),
        file: None,
    }
}

fn projection_config(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ProjectionSweep);
    cfg.seed = Some(7);
    cfg.levels = vec![12];
    cfg.output = out.to_path_buf();
    cfg.x = Some(cantor_source(vec![1], vec![0, 2]));
    cfg.y = Some(cantor_source(vec![0, 3], vec![0, 3]));
    cfg.projection = Some(ProjectionParams { samples: 64, rho: Some(Dyadic::new(1, 4)) });
    cfg
}

fn radial_bound_check() -> Outcome {
    // Same sets the generator documents: dim X = 1/2, dim Y = 1.
    let x = cantor_product(12, &[1], &[0, 2]).unwrap();
    check(x.len() >= 64, "X has fewer than 64 cubes")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = run(&projection_config(dir.path())).map_err(|e| e.to_string())?;
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("projection_n12.json")).unwrap()).unwrap();
    let max = summary["max_slope"].as_f64().ok_or("no slope")?;
    let main = bound_main(0.5, 1.0).unwrap().value;
    let osw1 = bound_osw1(0.5, 1.0).unwrap();
    check(summary["samples"].as_u64() == Some(64), "did not sample 64 points")?;
    check(max >= main - 0.2, format!("max slope {max:.3} < {}", main - 0.2))?;
    check(max >= osw1, format!("max slope {max:.3} < osw1 {osw1}"))?;
    check(report.passed, "runner reports failure")?;
    Ok(format!(
        "max slope {max:.3} over 64 points (window {}..{}) >= main - 0.2 = {:.2} and >= osw1 = {osw1}",
        summary["m_lo"], summary["m_hi"], main - 0.2
    ))
}

fn configs(root: &Path) -> Vec<ExperimentConfig> {
    let mut bounds = ExperimentConfig::new(ExperimentKind::BoundsTable);
    bounds.output = root.join("bounds");

    let mut proj = projection_config(&root.join("projection"));
    proj.levels = vec![8, 10];
    proj.projection = Some(ProjectionParams { samples: 16, rho: None });
    proj.precision = Some(PrecisionWindow { m_lo: Some(3), m_hi: None });

    let mut inc = ExperimentConfig::new(ExperimentKind::IncidenceSweep);
    inc.output = root.join("incidence");
    inc.seed = Some(3);
    inc.levels = vec![6, 7, 8];
    inc.incidence = Some(IncidenceParams { s: r(1, 2), t: r(1, 2) });

    let mut audit = ExperimentConfig::new(ExperimentKind::FrostmanAudit);
    audit.output = root.join("audit");
    audit.levels = vec![6, 8];
    audit.eps = Some(0.25);
    audit.x = Some(SetSource {
        generator: Some(radial_lab::generators::GeneratorSpec::RandomTree { level: 8, t: 1.2, seed: 5 }),
        file: None,
    });
    audit.y = Some(cantor_source(vec![0, 3], vec![1, 2]));
    vec![bounds, proj, inc, audit]
}

fn reproducibility() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (ca, cb) in configs(a.path()).iter().zip(configs(b.path())) {
        let ra = run(ca).map_err(|e| e.to_string())?;
        let rb = run(&cb).map_err(|e| e.to_string())?;
        check(!ra.manifest.artifacts.is_empty(), format!("{} produced nothing", ca.kind.name()))?;
        check(ra.manifest.artifacts.len() == rb.manifest.artifacts.len(), "artifact lists differ")?;
        for (x, y) in ra.manifest.artifacts.iter().zip(&rb.manifest.artifacts) {
            let bx = std::fs::read(ra.output.join(&x.file)).unwrap();
            let by = std::fs::read(rb.output.join(&y.file)).unwrap();
            check(x.file == y.file && bx == by, format!("{}: {} differs between runs", ca.kind.name(), x.file))?;
            files += 1;
        }
    }
    Ok(format!("4 experiment kinds run twice, {files} artifacts byte-identical"))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("bound algebra exactness", 10, bound_algebra),
        ("coupled system", 60, coupled_system),
        ("Frostman oracle equivalence", 60, frostman_oracle),
        ("extraction contract", 120, extraction_contract),
        ("incidence equivalence", 60, incidence_equivalence),
        ("incidence exponent (desk scale)", 300, renwang_exponent),
        ("projection dimension sanity", 60, projection_sanity),
        ("radial projection bound (desk scale)", 300, radial_bound_check),
        ("reproducibility", 300, reproducibility),
    ];
    let mut failures = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(_) if secs > *budget as f64 => Err(format!("took {secs:.1} s, budget {budget} s")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS [{name}] {detail} ({secs:.2} s)", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL [{name}] {why} ({secs:.2} s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
