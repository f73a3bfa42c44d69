//! Cube families with known dimension and certified non-concentration.
//!
//! Every generator returns its set together with a verified dyadic
//! certificate; nothing uncertified leaves this module. Random generators are
//! driven by a seeded ChaCha stream, so equal specs give equal sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::duality::{tube_of_param_cube, Tube};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::frostman::{check_dyadic_frostman, dyadic_constant_pow2, max_dyadic_exponent, FrostmanCertificate};
use crate::grid::{CubeSet, DyadicCube, MAX_LEVEL};
use crate::incidence::{TubeFamily, TubeSet};
use crate::Rational;

/// Constant used when measuring the exponent of random tree sets.
pub const RANDOM_TREE_CONSTANT: i64 = 4;
/// Attempts before [`random_tree_set`] gives up.
pub const RANDOM_TREE_RETRIES: u64 = 8;

/// Serialisable description of a generated set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    CantorProduct { level: u32, digits_x: Vec<u8>, digits_y: Vec<u8> },
    LineSet { level: u32, slope: Dyadic, intercept: Dyadic },
    RandomTree { level: u32, t: f64, seed: u64 },
    FullGrid { level: u32 },
    GraphSet { level: u32, seed: u64 },
}

/// A generated set, its verified certificate and, where known, its
/// analytic dimension.
#[derive(Clone, Debug)]
pub struct Generated {
    pub set: CubeSet,
    pub certificate: FrostmanCertificate,
    pub dimension: Option<f64>,
}

impl GeneratorSpec {
    pub fn level(&self) -> u32 {
        match *self {
            GeneratorSpec::CantorProduct { level, .. }
            | GeneratorSpec::LineSet { level, .. }
            | GeneratorSpec::RandomTree { level, .. }
            | GeneratorSpec::FullGrid { level }
            | GeneratorSpec::GraphSet { level, .. } => level,
        }
    }

    pub fn generate(&self) -> Result<Generated> {
        match self {
            GeneratorSpec::CantorProduct { level, digits_x, digits_y } => {
                let set = cantor_product(*level, digits_x, digits_y)?;
                let dim = cantor_dimension(digits_x, digits_y);
                // Below an even level the count exceeds D^{-m/2} by at most 2^dim <= 4.
                let s = Rational::new((dim * 64.0 + 1e-9).floor() as i64, 64);
                certified(set, s, Rational::from_integer(4), Some(dim))
            }
            GeneratorSpec::LineSet { level, slope, intercept } => {
                let set = line_set(*level, *slope, *intercept)?;
                certified(set, Rational::from_integer(1), Rational::from_integer(4), Some(1.0))
            }
            GeneratorSpec::RandomTree { level, t, seed } => {
                let (set, certificate) = random_tree_set(*level, *t, *seed)?;
                Ok(Generated { set, certificate, dimension: Some(*t) })
            }
            GeneratorSpec::FullGrid { level } => {
                check_level(*level)?;
                certified(CubeSet::full_grid(*level), Rational::from_integer(2), Rational::from_integer(1), Some(2.0))
            }
            GeneratorSpec::GraphSet { level, seed } => {
                let set = graph_set(*level, *seed)?;
                certified(set, Rational::from_integer(1), Rational::from_integer(1), Some(1.0))
            }
        }
    }
}

fn certified(set: CubeSet, s: Rational, c: Rational, dimension: Option<f64>) -> Result<Generated> {
    let certificate = check_dyadic_frostman(&set, s, c)?;
    if !certificate.verified {
        return Err(Error::Generation(format!("generated set fails its (s = {s}, C = {c}) certificate")));
    }
    Ok(Generated { set, certificate, dimension })
}

fn check_level(n: u32) -> Result<()> {
    if n > MAX_LEVEL {
        return Err(Error::arg(format!("level {n} exceeds {MAX_LEVEL}")));
    }
    Ok(())
}

fn check_digits(name: &str, digits: &[u8]) -> Result<Vec<u32>> {
    if digits.is_empty() {
        return Err(Error::arg(format!("{name} is empty")));
    }
    if let Some(d) = digits.iter().find(|&&d| d > 3) {
        return Err(Error::arg(format!("{name} contains {d}, not a base-4 digit")));
    }
    let mut v: Vec<u32> = digits.iter().map(|&d| d as u32).collect();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// `(log2 |digits_x| + log2 |digits_y|) / 2`, counting distinct digits.
pub fn cantor_dimension(digits_x: &[u8], digits_y: &[u8]) -> f64 {
    let distinct = |d: &[u8]| {
        let mut v = d.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len() as f64
    };
    (distinct(digits_x).log2() + distinct(digits_y).log2()) / 2.0
}

fn base4_numbers(digits: &[u32], places: u32) -> Vec<u32> {
    let mut out = vec![0u32];
    for _ in 0..places {
        out = out.iter().flat_map(|&v| digits.iter().map(move |&d| v * 4 + d)).collect();
    }
    out
}

/// Cubes whose base-4 digit expansions use only the allowed digits on each
/// axis. `n` must be even.
pub fn cantor_product(n: u32, digits_x: &[u8], digits_y: &[u8]) -> Result<CubeSet> {
    check_level(n)?;
    if n % 2 != 0 {
        return Err(Error::arg(format!("cantor product needs an even level, got {n}")));
    }
    let xs = base4_numbers(&check_digits("digits_x", digits_x)?, n / 2);
    let ys = base4_numbers(&check_digits("digits_y", digits_y)?, n / 2);
    CubeSet::from_indices(n, xs.iter().flat_map(|&i| ys.iter().map(move |&j| (i, j))))
}

/// All level-`n` cubes whose closed square meets `{y = a x + b : 0 <= x <= 1}`.
pub fn line_set(n: u32, a: Dyadic, b: Dyadic) -> Result<CubeSet> {
    check_level(n)?;
    let unit = |v: Dyadic| v >= Dyadic::ZERO && v <= Dyadic::ONE;
    if !unit(a) || !unit(b) {
        return Err(Error::domain(format!("line parameters ({a}, {b}) outside [0, 1]^2")));
    }
    if b == Dyadic::ONE {
        return Err(Error::domain("line y = ax + 1 misses [0, 1)^2"));
    }
    let e = (n + a.exponent()).max(b.exponent());
    let (ai, bi) = (a.scaled(e - n), b.scaled(e));
    let side = 1i128 << n;
    let cell = 1i128 << (e - n);
    let mut cubes = Vec::new();
    for i in 0..side {
        // y-range over the closed column, at scale 2^e.
        let lo = ai * i + bi;
        let hi = ai * (i + 1) + bi;
        let j_lo = (lo.div_euclid(cell) - i128::from(lo % cell == 0)).max(0);
        let j_hi = hi.div_euclid(cell).min(side - 1);
        for j in j_lo..=j_hi {
            cubes.push((i as u32, j as u32));
        }
    }
    CubeSet::from_indices(n, cubes)
}

/// One cube per column, at a uniformly random height.
pub fn graph_set(n: u32, seed: u64) -> Result<CubeSet> {
    check_level(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = 1u32 << n;
    CubeSet::from_indices(n, (0..side).map(|i| (i, rng.gen_range(0..side))))
}

/// Random tree set with about `2^{tn}` leaves, certified at an exponent no
/// smaller than `t - 0.1`.
///
/// Level `m` receives `round(2^{tm})` cubes: each surviving cube keeps
/// `floor(r)` random children and a random subset of survivors keeps one
/// more, with `r` the growth ratio. The result is measured with constant
/// [`RANDOM_TREE_CONSTANT`] on a `1/100` exponent grid; on failure the seed
/// is advanced, up to [`RANDOM_TREE_RETRIES`] attempts.
pub fn random_tree_set(n: u32, t: f64, seed: u64) -> Result<(CubeSet, FrostmanCertificate)> {
    check_level(n)?;
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::arg(format!("target exponent {t} outside [0, 2]")));
    }
    let c = Rational::from_integer(RANDOM_TREE_CONSTANT);
    let mut best = None;
    for attempt in 0..RANDOM_TREE_RETRIES {
        let set = grow_tree(n, t, seed.wrapping_add(attempt));
        let s = max_dyadic_exponent(&set, c, Rational::new(1, 100))?.unwrap_or_default();
        if (*s.numer() as f64 / *s.denom() as f64) >= t - 0.1 - 1e-12 {
            let cert = check_dyadic_frostman(&set, s, c)?;
            debug_assert!(cert.verified);
            return Ok((set, cert));
        }
        best = Some(s);
    }
    Err(Error::Generation(format!(
        "random tree set with t = {t} failed certification {RANDOM_TREE_RETRIES} times (last exponent {})",
        best.unwrap_or_default()
    )))
}

fn grow_tree(n: u32, t: f64, seed: u64) -> CubeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = vec![DyadicCube::root()];
    for m in 1..=n {
        let target = ((t * m as f64).exp2().round() as usize).clamp(level.len(), 4 * level.len());
        let base = target / level.len();
        let mut extra = vec![false; level.len()];
        extra[..target % level.len()].iter_mut().for_each(|e| *e = true);
        extra.shuffle(&mut rng);
        let mut next = Vec::with_capacity(target);
        for (cube, more) in level.iter().zip(extra) {
            let mut kids = cube.children();
            kids.shuffle(&mut rng);
            next.extend_from_slice(&kids[..base + usize::from(more)]);
        }
        level = next;
    }
    CubeSet::new(n, level).expect("children of distinct cubes are distinct")
}

/// Columns `i < 2^n` whose binary digits vanish outside the free positions
/// of the Sturmian word of slope `s`: position `k` (from the most
/// significant, `k = 1..=n`) is free iff `floor(ks) > floor((k-1)s)`.
/// There are `2^{floor(ns)}` of them and every dyadic interval of level `m`
/// holds at most `2 · 2^{-sm}` of the total.
pub fn sturmian_columns(n: u32, s: Rational) -> Result<Vec<u32>> {
    check_level(n)?;
    if s < Rational::from_integer(0) || s > Rational::from_integer(1) {
        return Err(Error::arg(format!("column exponent {s} outside [0, 1]")));
    }
    let free: Vec<u32> = (1..=n)
        .filter(|&k| (s * Rational::from_integer(k as i64)).floor() > (s * Rational::from_integer(k as i64 - 1)).floor())
        .map(|k| n - k)
        .collect();
    let mut cols: Vec<u32> = (0..1u32 << free.len())
        .map(|bits| free.iter().enumerate().filter(|&(b, _)| bits >> b & 1 == 1).map(|(_, &p)| 1 << p).sum())
        .collect();
    cols.sort_unstable();
    Ok(cols)
}

/// For each Sturmian column `i`, the tube containing the line of slope
/// `(2i+1)/2^{n+1}` through the centre of `q`, when that line has intercept
/// in `[0, 1)`. The family is certified at exponent `s` with constant 2.
pub fn sturmian_family(q: DyadicCube, s: Rational) -> Result<TubeFamily> {
    let n = q.level;
    let centre = q.center();
    let mut tubes: Vec<Tube> = Vec::new();
    for i in sturmian_columns(n, s)? {
        let a = Dyadic::new(2 * i as i64 + 1, n + 1);
        let b = centre.y - a * centre.x;
        if b < Dyadic::ZERO || b >= Dyadic::ONE {
            continue;
        }
        let j = b.floor_scaled(n) as u32;
        tubes.push(tube_of_param_cube(DyadicCube::new(n, i, j)?));
    }
    let tubes = TubeSet::new(n, tubes)?;
    let certificate = check_dyadic_frostman(&tubes.param_set(), s, Rational::from_integer(2))?;
    Ok(TubeFamily { cube: q, tubes, certificate: Some(certificate) })
}

/// Copies a level-`n` set into the top-left quadrant at level `n + 1`, where
/// every line through a member with slope in `[0, 1]` has intercept in
/// `(0, 1)`.
pub fn embed_top_left(set: &CubeSet) -> Result<CubeSet> {
    let n = set.level();
    check_level(n + 1)?;
    CubeSet::from_indices(n + 1, set.iter().map(|c| (c.i, c.j + (1 << n))))
}

/// Level-`n` cube set with a verified dyadic certificate at exponent `t`,
/// using the smallest power-of-two constant.
pub fn certify_at(set: &CubeSet, t: Rational) -> Result<FrostmanCertificate> {
    let c = dyadic_constant_pow2(set, t)?;
    check_dyadic_frostman(set, t, c)
}

/// Certified cube set of exponent `t` for the incidence harness.
///
/// For `t = 1` this is the level-`n` diagonal. Otherwise a random tree set at
/// level `n - 1` is embedded into the top-left quadrant with
/// [`embed_top_left`], and certified at exactly `t` with the smallest
/// power-of-two constant.
pub fn harness_cubes(n: u32, t: Rational, seed: u64) -> Result<(CubeSet, FrostmanCertificate)> {
    if n == 0 {
        return Err(Error::arg("harness level must be positive"));
    }
    if t <= Rational::from_integer(0) || t > Rational::from_integer(2) {
        return Err(Error::arg(format!("harness exponent {t} outside (0, 2]")));
    }
    let set = if t == Rational::from_integer(1) {
        CubeSet::from_indices(n, (0..1u32 << n).map(|i| (i, i)))?
    } else {
        let tf = *t.numer() as f64 / *t.denom() as f64;
        embed_top_left(&random_tree_set(n - 1, tf, seed)?.0)?
    };
    let cert = certify_at(&set, t)?;
    Ok((set, cert))
}

/// `2^{floor(ns)}`, the size of every [`sturmian_family`] at level `n` when
/// no line leaves the parameter window.
pub fn sturmian_family_size(n: u32, s: Rational) -> usize {
    1usize << (s * Rational::from_integer(n as i64)).floor().to_integer()
}
