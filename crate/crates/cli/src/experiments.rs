use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use radial_lab::bounds::{
    bound_main, bound_orthogonal_exceptional, bound_osw1, dominance_report, incidence_exponent,
};
use radial_lab::frostman::{
    branching_profile, check_ball_frostman, check_dyadic_frostman, extract_uniform_subset, max_dyadic_exponent,
    FrostmanCertificate,
};
use radial_lab::generators::{harness_cubes, sturmian_family, sturmian_family_size};
use radial_lab::incidence::{fitted_exponent, renwang_harness, IncidenceRecord};
use radial_lab::projection::{angular_resolution_limit, sup_radial_dimension};
use radial_lab::{io, CubeSet, Dyadic, Point2, Rational};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{with_level, ExperimentConfig, ExperimentKind, SetSource};
use crate::RunError;

/// Constant used when measuring exponents of sets loaded from files.
const MEASURE_CONSTANT: i64 = 4;
/// Ball certificates are checked with the dyadic constant times this factor.
const BALL_FACTOR: i64 = 25;
const DEFAULT_SLACK: f64 = 0.2;

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub kind: &'static str,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub versions: Versions,
    pub threads: usize,
    pub created_unix: u64,
    pub experiments: Vec<ExperimentTiming>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub radial_lab: &'static str,
    pub radial_lab_cli: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentTiming {
    pub name: String,
    pub wall_time_ms: f64,
}

/// What a run produced. `passed` is false when a sweep measured a value below
/// its predicted floor; the artifacts are written either way.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub output: PathBuf,
    pub manifest: Manifest,
    pub passed: bool,
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(Artifact { file: name.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
        self.put(name, &bytes)
    }
}

/// Runs one experiment and writes its artifacts under `config.output`.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    config.validate()?;
    fs::create_dir_all(&config.output)?;
    let mut w = Writer { dir: config.output.clone(), artifacts: Vec::new() };
    let mut timings = Vec::new();
    let passed = match config.kind {
        ExperimentKind::BoundsTable => timed(&mut timings, "bounds-table", || bounds_table(config, &mut w))?,
        ExperimentKind::ProjectionSweep => projection_sweep(config, &mut w, &mut timings)?,
        ExperimentKind::IncidenceSweep => incidence_sweep(config, &mut w, &mut timings)?,
        ExperimentKind::FrostmanAudit => frostman_audit(config, &mut w, &mut timings)?,
    };
    let manifest = Manifest {
        kind: config.kind.name(),
        config_hash: config.hash(),
        config: config.clone(),
        versions: Versions { radial_lab: radial_lab::VERSION, radial_lab_cli: env!("CARGO_PKG_VERSION") },
        threads: rayon::current_num_threads(),
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        experiments: timings,
        artifacts: w.artifacts.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    fs::write(config.output.join("manifest.json"), bytes)?;
    Ok(RunReport { output: config.output.clone(), manifest, passed })
}

fn timed<T>(
    timings: &mut Vec<ExperimentTiming>,
    name: &str,
    f: impl FnOnce() -> Result<T, RunError>,
) -> Result<T, RunError> {
    let start = Instant::now();
    let out = f()?;
    timings.push(ExperimentTiming { name: name.to_string(), wall_time_ms: start.elapsed().as_secs_f64() * 1e3 });
    Ok(out)
}

fn num(r: Rational) -> String {
    format!("{}", *r.numer() as f64 / *r.denom() as f64)
}

fn opt_num(r: Option<Rational>) -> String {
    r.map(num).unwrap_or_default()
}

fn opt_bool(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

pub(crate) const BOUNDS_HEADER: [&str; 12] = [
    "dX",
    "dY",
    "osw1",
    "osw2",
    "main",
    "main_hypothesis",
    "orthogonal_exceptional",
    "incidence_exponent",
    "main_ge_osw1",
    "main_gt_osw1",
    "main_ge_osw2",
    "main_gt_osw2",
];

/// Rows of the bounds table on the grid `{0, 1/k, ..., 2}^2`, evaluated
/// exactly. The exceptional-set bound uses `u = dX` where `dX <= min{dY, 1}`
/// and the incidence exponent uses `(s, t) = (dX, dY)` where defined.
pub fn bounds_rows(k: i64) -> Result<Vec<Vec<String>>, RunError> {
    let mut rows = Vec::new();
    for a in 0..=2 * k {
        for b in 0..=2 * k {
            let (dx, dy) = (Rational::new(a, k), Rational::new(b, k));
            let rep = dominance_report(dx, dy)?;
            let orth = bound_orthogonal_exceptional(dy, dx).ok();
            let inc = incidence_exponent(dx, dy).ok();
            rows.push(vec![
                num(dx),
                num(dy),
                num(rep.osw1),
                opt_num(rep.osw2),
                num(rep.main),
                rep.main_hypothesis_holds.to_string(),
                opt_num(orth),
                opt_num(inc),
                rep.main_ge_osw1.to_string(),
                rep.main_gt_osw1.to_string(),
                opt_bool(rep.main_ge_osw2),
                opt_bool(rep.main_gt_osw2),
            ]);
        }
    }
    Ok(rows)
}

fn bounds_table(config: &ExperimentConfig, w: &mut Writer) -> Result<bool, RunError> {
    let step = config.bounds.unwrap_or_default().step;
    let k = (1.0 / step).round() as i64;
    let rows = bounds_rows(k)?;
    w.csv("bounds.csv", &BOUNDS_HEADER, &rows)?;
    Ok(true)
}

/// A loaded or generated set with the certificate it is used under.
struct Certified {
    set: CubeSet,
    certificate: FrostmanCertificate,
    dimension: f64,
}

fn rational_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn materialise(
    name: &str,
    src: &SetSource,
    level: Option<u32>,
    w: &mut Writer,
) -> Result<Certified, RunError> {
    let what = format!("{name} at level {}", level.map_or("native".into(), |n| n.to_string()));
    let (set, certificate, dimension) = if let Some(g) = &src.generator {
        let spec = level.map_or_else(|| g.clone(), |n| with_level(g, n));
        let gen = spec.generate()?;
        let dim = gen.dimension.unwrap_or_else(|| rational_f64(gen.certificate.s));
        (gen.set, gen.certificate, dim)
    } else {
        let path = src.file.as_ref().expect("validated");
        let set = io::load_set(path)?;
        if let Some(n) = level {
            if set.level() != n {
                return Err(RunError::Config {
                    path: format!("{name}.file"),
                    message: format!("set has level {}, sweep asks for {n}", set.level()),
                });
            }
        }
        let c = Rational::from_integer(MEASURE_CONSTANT);
        let s = max_dyadic_exponent(&set, c, Rational::new(1, 100))?.unwrap_or_default();
        let cert = check_dyadic_frostman(&set, s, c)?;
        let dim = rational_f64(s);
        (set, cert, dim)
    };
    if !certificate.verified {
        let file = format!("failed_certificate_{name}.json");
        w.json(&file, &certificate)?;
        return Err(RunError::Certification { what, file: w.dir.join(file) });
    }
    Ok(Certified { set, certificate, dimension })
}

fn sweep_levels(config: &ExperimentConfig) -> Vec<Option<u32>> {
    if config.levels.is_empty() {
        vec![None]
    } else {
        config.levels.iter().map(|&n| Some(n)).collect()
    }
}

#[derive(Serialize)]
struct ProjectionSummary {
    level: u32,
    dim_x: f64,
    dim_y: f64,
    certificate_x: FrostmanCertificate,
    certificate_y: FrostmanCertificate,
    samples: usize,
    rho: Dyadic,
    m_lo: u32,
    m_hi: u32,
    max_slope: Option<f64>,
    argmax: Option<Point2>,
    excluded_points: usize,
    bound_main: f64,
    bound_osw1: f64,
    slack: f64,
    meets_main_floor: bool,
    meets_osw1: bool,
}

fn projection_sweep(
    config: &ExperimentConfig,
    w: &mut Writer,
    timings: &mut Vec<ExperimentTiming>,
) -> Result<bool, RunError> {
    let params = config.projection.unwrap_or_default();
    let seed = config.seed.expect("validated");
    let slack = config.eps.unwrap_or(DEFAULT_SLACK);
    let mut all_pass = true;
    for level in sweep_levels(config) {
        let x = materialise("x", config.x.as_ref().expect("validated"), level, w)?;
        let y = materialise("y", config.y.as_ref().expect("validated"), level, w)?;
        let n = y.set.level();
        let name = format!("projection_n{n}");
        let pass = timed(timings, &name, || {
            let mut centres: Vec<Point2> = x.set.iter().map(|c| c.center()).collect();
            if centres.len() > params.samples {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut picked: Vec<usize> =
                    rand::seq::index::sample(&mut rng, centres.len(), params.samples).into_vec();
                picked.sort_unstable();
                centres = picked.into_iter().map(|k| centres[k]).collect();
            }
            let two_delta = Dyadic::new(2, n);
            let rho = params.rho.unwrap_or(Dyadic::new(1, 4)).max(two_delta);
            let window = config.precision.unwrap_or(crate::config::PrecisionWindow { m_lo: None, m_hi: None });
            let m_lo = window.m_lo.unwrap_or(4);
            let m_hi = window.m_hi.unwrap_or_else(|| n.min(angular_resolution_limit(n, rho)));
            let sweep = sup_radial_dimension(&centres, &y.set, m_lo, m_hi, rho)?;

            let mut rows = Vec::new();
            for s in &sweep.samples {
                match &s.estimate {
                    Some(e) => {
                        for &(m, count) in &e.counts {
                            rows.push(vec![
                                s.x.x.to_string(),
                                s.x.y.to_string(),
                                m.to_string(),
                                count.to_string(),
                                format!("{:.6}", e.slope),
                                format!("{:.6}", e.residual),
                            ]);
                        }
                    }
                    None => rows.push(vec![
                        s.x.x.to_string(),
                        s.x.y.to_string(),
                        String::new(),
                        "0".into(),
                        String::new(),
                        String::new(),
                    ]),
                }
            }
            w.csv(&format!("{name}.csv"), &["x", "y", "scale", "bin_count", "slope", "residual"], &rows)?;

            let clamp = |v: f64| v.clamp(0.0, 2.0);
            let (dx, dy) = (clamp(x.dimension), clamp(y.dimension));
            let main = bound_main(dx, dy)?.value;
            let osw1 = bound_osw1(dx, dy)?;
            let best = sweep.max_slope.unwrap_or(f64::NEG_INFINITY);
            let summary = ProjectionSummary {
                level: n,
                dim_x: dx,
                dim_y: dy,
                certificate_x: x.certificate.clone(),
                certificate_y: y.certificate.clone(),
                samples: centres.len(),
                rho,
                m_lo,
                m_hi,
                max_slope: sweep.max_slope,
                argmax: sweep.argmax.map(|a| sweep.samples[a].x),
                excluded_points: sweep.samples.iter().filter(|s| s.estimate.is_none()).count(),
                bound_main: main,
                bound_osw1: osw1,
                slack,
                meets_main_floor: best >= main - slack,
                meets_osw1: best >= osw1,
            };
            w.json(&format!("{name}.json"), &summary)?;
            Ok(summary.meets_main_floor)
        })?;
        all_pass &= pass;
    }
    Ok(all_pass)
}

#[derive(Serialize)]
struct IncidenceSummary {
    #[serde(with = "ratio_str")]
    s: Rational,
    #[serde(with = "ratio_str")]
    t: Rational,
    eps: f64,
    levels: Vec<u32>,
    predicted: f64,
    fitted_exponent: Option<f64>,
    meets_floor: Option<bool>,
    cube_certificates: Vec<FrostmanCertificate>,
}

mod ratio_str {
    use radial_lab::Rational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }
}

fn incidence_sweep(
    config: &ExperimentConfig,
    w: &mut Writer,
    timings: &mut Vec<ExperimentTiming>,
) -> Result<bool, RunError> {
    let inc = config.incidence.expect("validated");
    let seed = config.seed.expect("validated");
    let eps = config.eps.unwrap_or(DEFAULT_SLACK);
    let mut records: Vec<IncidenceRecord> = Vec::new();
    let mut certs = Vec::new();
    for &n in &config.levels {
        let rec = timed(timings, &format!("incidence_n{n}"), || {
            let (p, cert) = harness_cubes(n, inc.t, seed.wrapping_add(n as u64))?;
            let m = sturmian_family_size(n, inc.s);
            let rec = renwang_harness(&p, Some(&cert), |q| sturmian_family(q, inc.s), m, eps)?;
            certs.push(cert);
            Ok(rec)
        })?;
        records.push(rec);
    }
    let rows: Vec<Vec<String>> = records.iter().map(|r| r.csv_row()).collect();
    w.csv("incidence.csv", &IncidenceRecord::CSV_HEADER, &rows)?;
    let predicted = {
        let (s, t) = (rational_f64(inc.s), rational_f64(inc.t));
        t.min((s + t) / 2.0).min(1.0)
    };
    let fitted = if records.len() >= 2 { Some(fitted_exponent(&records)?) } else { None };
    let summary = IncidenceSummary {
        s: inc.s,
        t: inc.t,
        eps,
        levels: config.levels.clone(),
        predicted,
        fitted_exponent: fitted,
        meets_floor: fitted.map(|f| f >= predicted - eps),
        cube_certificates: certs,
    };
    w.json("incidence.json", &summary)?;
    Ok(summary.meets_floor.unwrap_or(true))
}

#[derive(Serialize)]
struct AuditEntry {
    source: String,
    level: u32,
    size: usize,
    dimension: f64,
    certificate: FrostmanCertificate,
    ball_certificate: FrostmanCertificate,
    #[serde(with = "opt_ratio_str")]
    measured_exponent: Option<Rational>,
    extraction: Option<ExtractionSummary>,
}

#[derive(Serialize)]
struct ExtractionSummary {
    eps: f64,
    size: usize,
    size_floor: u64,
    block_len: u32,
    certificate: FrostmanCertificate,
}

mod opt_ratio_str {
    use radial_lab::Rational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&r.to_string()),
            None => s.serialize_none(),
        }
    }
}

fn frostman_audit(
    config: &ExperimentConfig,
    w: &mut Writer,
    timings: &mut Vec<ExperimentTiming>,
) -> Result<bool, RunError> {
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, src) in [("x", &config.x), ("y", &config.y)] {
        let Some(src) = src else { continue };
        for level in sweep_levels(config) {
            let c = materialise(name, src, level, w)?;
            let n = c.set.level();
            let entry = timed(timings, &format!("audit_{name}_n{n}"), || {
                let profile = branching_profile(&c.set)?;
                let prof_rows: Vec<Vec<String>> = profile
                    .counts
                    .iter()
                    .enumerate()
                    .map(|(m, &count)| vec![m.to_string(), count.to_string(), format!("{:.6}", (count as f64).log2())])
                    .collect();
                w.csv(&format!("profile_{name}_n{n}.csv"), &["m", "box_count", "log2_count"], &prof_rows)?;
                let ball = check_ball_frostman(
                    &c.set,
                    c.certificate.s,
                    c.certificate.c * Rational::from_integer(BALL_FACTOR),
                )?;
                let measured = max_dyadic_exponent(&c.set, Rational::from_integer(MEASURE_CONSTANT), Rational::new(1, 100))?;
                let extraction = match config.eps {
                    Some(eps) if eps > 0.0 => {
                        let ex = extract_uniform_subset(&c.set, eps)?;
                        Some(ExtractionSummary {
                            eps,
                            size: ex.subset.len(),
                            size_floor: ex.size_floor,
                            block_len: ex.block_len,
                            certificate: ex.certificate.clone(),
                        })
                    }
                    _ => None,
                };
                Ok(AuditEntry {
                    source: name.to_string(),
                    level: n,
                    size: c.set.len(),
                    dimension: c.dimension,
                    certificate: c.certificate.clone(),
                    ball_certificate: ball,
                    measured_exponent: measured,
                    extraction,
                })
            })?;
            ok &= entry.ball_certificate.verified && entry.extraction.as_ref().map_or(true, |e| e.certificate.verified);
            rows.push(vec![
                entry.source.clone(),
                n.to_string(),
                entry.size.to_string(),
                entry.certificate.s.to_string(),
                entry.certificate.c.to_string(),
                entry.certificate.verified.to_string(),
                entry.ball_certificate.verified.to_string(),
                entry.measured_exponent.map(|s| s.to_string()).unwrap_or_default(),
            ]);
            entries.push(entry);
        }
    }
    w.csv(
        "audit.csv",
        &["source", "n", "size", "s", "C", "dyadic_verified", "ball_verified", "measured_exponent"],
        &rows,
    )?;
    w.json("audit.json", &entries)?;
    Ok(ok)
}
