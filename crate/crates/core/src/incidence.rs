//! Tube-cube incidences.
//!
//! A [`TubeSet`] keeps its tubes bucketed by slope column. For a cube `Q`
//! and a column `a ∈ [a0, a1]`, every tube of the column that can meet `Q`
//! has intercept interval overlapping `[y0 - a1 x1, y1 - a0 x0]`, so only a
//! handful of rows are examined before the exact predicate decides.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::{tube_meets_cube, Tube};
use crate::error::{Error, Result};
use crate::frostman::{check_ball_frostman, check_dyadic_frostman, CertificateKind, FrostmanCertificate};
use crate::grid::{CubeSet, DyadicCube, MAX_LEVEL};
use crate::Rational;

/// Finest level at which the incidence harness keeps a dense union bitmap.
pub const HARNESS_MAX_LEVEL: u32 = 14;

/// Distinct tubes of one level, indexed by slope column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TubeSet {
    level: u32,
    /// `(column i, sorted rows j)`, sorted by `i`, no empty columns.
    columns: Vec<(u32, Vec<u32>)>,
    len: usize,
}

impl TubeSet {
    pub fn new(level: u32, tubes: impl IntoIterator<Item = Tube>) -> Result<Self> {
        let mut idx = Vec::new();
        for t in tubes {
            if t.param.level != level {
                return Err(Error::arg(format!("tube {} is not at level {level}", t.param)));
            }
            idx.push((t.param.i, t.param.j));
        }
        idx.sort_unstable();
        if let Some(w) = idx.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::arg(format!("duplicate tube ({}, {})", w[0].0, w[0].1)));
        }
        Ok(Self::from_sorted(level, idx))
    }

    /// Builds from `(i, j)` parameter indices, dropping repeats.
    pub fn from_indices(level: u32, indices: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::arg(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        let side = 1u64 << level;
        let mut idx: Vec<(u32, u32)> = indices.into_iter().collect();
        if let Some(&(i, j)) = idx.iter().find(|&&(i, j)| i as u64 >= side || j as u64 >= side) {
            return Err(Error::domain(format!("tube index ({i}, {j}) out of range for level {level}")));
        }
        idx.sort_unstable();
        idx.dedup();
        Ok(Self::from_sorted(level, idx))
    }

    pub fn from_params(params: &CubeSet) -> Self {
        Self::from_sorted(params.level(), params.sorted_indices())
    }

    pub fn empty(level: u32) -> Self {
        Self::from_sorted(level, Vec::new())
    }

    /// All `4^level` tubes.
    pub fn full(level: u32) -> Self {
        Self::from_params(&CubeSet::full_grid(level))
    }

    fn from_sorted(level: u32, idx: Vec<(u32, u32)>) -> Self {
        let len = idx.len();
        let mut columns: Vec<(u32, Vec<u32>)> = Vec::new();
        for (i, j) in idx {
            match columns.last_mut() {
                Some((ci, rows)) if *ci == i => rows.push(j),
                _ => columns.push((i, vec![j])),
            }
        }
        TubeSet { level, columns, len }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Tubes in `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = Tube> + '_ {
        let level = self.level;
        self.columns.iter().flat_map(move |(i, rows)| {
            rows.iter().map(move |&j| Tube { param: DyadicCube { level, i: *i, j } })
        })
    }

    pub fn sorted_indices(&self) -> Vec<(u32, u32)> {
        self.iter().map(|t| (t.param.i, t.param.j)).collect()
    }

    pub fn contains(&self, tube: Tube) -> bool {
        let p = tube.param;
        p.level == self.level
            && self
                .columns
                .binary_search_by_key(&p.i, |(i, _)| *i)
                .map_or(false, |k| self.columns[k].1.binary_search(&p.j).is_ok())
    }

    /// The parameter cubes as a [`CubeSet`] (the dual point set).
    pub fn param_set(&self) -> CubeSet {
        CubeSet::collect_dedup(self.level, self.iter().map(|t| t.param))
    }

    pub fn union(&self, other: &TubeSet) -> Result<TubeSet> {
        if self.level != other.level {
            return Err(Error::arg("union of tube sets at different levels"));
        }
        let mut idx = self.sorted_indices();
        idx.extend(other.sorted_indices());
        idx.sort_unstable();
        idx.dedup();
        Ok(Self::from_sorted(self.level, idx))
    }

    /// Tubes of this set meeting `q`, via the column index.
    pub fn tubes_through(&self, q: DyadicCube) -> impl Iterator<Item = Tube> + '_ {
        let n = self.level;
        let unit = 1i128 << n;
        let (x0, x1) = (q.i as i128, q.i as i128 + 1);
        let (y0, y1) = (q.j as i128, q.j as i128 + 1);
        self.columns.iter().flat_map(move |(i, rows)| {
            let (a0, a1) = (*i as i128, *i as i128 + 1);
            // Intercept window in units of 2^{-2n}.
            let b_lo = y0 * unit - a1 * x1;
            let b_hi = y1 * unit - a0 * x0;
            let j_lo = -((-b_lo).div_euclid(unit)) - 1;
            let j_hi = b_hi.div_euclid(unit);
            let start = rows.partition_point(|&j| (j as i128) < j_lo);
            let end = rows.partition_point(|&j| (j as i128) <= j_hi);
            rows[start..end.max(start)].iter().filter_map(move |&j| {
                let t = Tube { param: DyadicCube { level: n, i: *i, j } };
                tube_meets_cube(t, q).then_some(t)
            })
        })
    }
}

fn check_levels(cubes: u32, tubes: u32) -> Result<()> {
    if cubes != tubes {
        Err(Error::arg(format!("cube level {cubes} differs from tube level {tubes}")))
    } else {
        Ok(())
    }
}

/// `n_Q`: number of tubes of `tubes` meeting `q`.
pub fn count_tubes_through_cube(tubes: &TubeSet, q: DyadicCube) -> Result<u64> {
    check_levels(q.level, tubes.level)?;
    Ok(tubes.tubes_through(q).count() as u64)
}

/// Reference count by testing every tube.
pub fn count_tubes_through_cube_brute(tubes: &TubeSet, q: DyadicCube) -> Result<u64> {
    check_levels(q.level, tubes.level)?;
    Ok(tubes.iter().filter(|&t| tube_meets_cube(t, q)).count() as u64)
}

/// Incidence counts, plus the harness parameters when produced by
/// [`renwang_harness`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceRecord {
    pub level: u32,
    /// `|P|`.
    pub cubes: usize,
    /// Nominal family size `M`.
    pub family_size: Option<usize>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub eps: Option<f64>,
    /// Number of distinct tubes in play.
    pub union_size: usize,
    /// `I = Σ_Q n_Q`.
    pub incidences: u64,
    /// `n_Q` for the cubes of `P`, in Z-order.
    pub per_cube: Vec<u64>,
    /// `log_{1/δ}(|T| / M)`.
    pub exponent_hat: Option<f64>,
    /// `min{t, (s+t)/2, 1} - eps`.
    pub exponent_floor: Option<f64>,
}

impl IncidenceRecord {
    pub const CSV_HEADER: [&'static str; 10] = [
        "n",
        "P",
        "M",
        "s",
        "t",
        "eps",
        "union_size",
        "incidences",
        "exponent_hat",
        "exponent_floor",
    ];

    /// Fields in [`IncidenceRecord::CSV_HEADER`] order; absent values are empty.
    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        vec![
            self.level.to_string(),
            self.cubes.to_string(),
            self.family_size.map(|m| m.to_string()).unwrap_or_default(),
            opt(self.s),
            opt(self.t),
            opt(self.eps),
            self.union_size.to_string(),
            self.incidences.to_string(),
            opt(self.exponent_hat),
            opt(self.exponent_floor),
        ]
    }
}

/// `I = Σ_{Q ∈ P} n_Q` using the column index. In debug builds, sets at level
/// 6 or below are cross-checked against the brute-force double loop.
pub fn count_incidences(cubes: &CubeSet, tubes: &TubeSet) -> Result<IncidenceRecord> {
    check_levels(cubes.level(), tubes.level)?;
    let per_cube: Vec<u64> = cubes
        .cubes()
        .par_iter()
        .map(|&q| tubes.tubes_through(q).count() as u64)
        .collect();
    let incidences = per_cube.iter().sum();
    if cfg!(debug_assertions) && cubes.level() <= 6 {
        assert_eq!(incidences, count_incidences_brute(cubes, tubes)?);
    }
    Ok(IncidenceRecord {
        level: cubes.level(),
        cubes: cubes.len(),
        family_size: None,
        s: None,
        t: None,
        eps: None,
        union_size: tubes.len(),
        incidences,
        per_cube,
        exponent_hat: None,
        exponent_floor: None,
    })
}

/// Double loop over all cube-tube pairs.
pub fn count_incidences_brute(cubes: &CubeSet, tubes: &TubeSet) -> Result<u64> {
    check_levels(cubes.level(), tubes.level)?;
    Ok(cubes
        .iter()
        .map(|q| tubes.iter().filter(|&t| tube_meets_cube(t, q)).count() as u64)
        .sum())
}

/// Tubes as points of the parameter square, reflected so that incidence is
/// preserved: `(a, b) -> (a, 1 - b)`.
pub fn dual_cubes(tubes: &TubeSet) -> CubeSet {
    CubeSet::collect_dedup(tubes.level, tubes.iter().map(|t| t.param.reflect()))
}

/// Cubes as tubes, under the same reflection as [`dual_cubes`].
pub fn dual_tubes(cubes: &CubeSet) -> TubeSet {
    TubeSet::from_sorted(cubes.level(), {
        let mut idx: Vec<(u32, u32)> = cubes.iter().map(|c| c.reflect()).map(|c| (c.i, c.j)).collect();
        idx.sort_unstable();
        idx
    })
}

/// The tubes `T(Q)` assigned to one cube of `P`.
#[derive(Clone, Debug)]
pub struct TubeFamily {
    pub cube: DyadicCube,
    pub tubes: TubeSet,
    /// Certificate of the family's parameter set.
    pub certificate: Option<FrostmanCertificate>,
}

/// Re-runs the checker named by the certificate; it must verify.
fn reverify(set: &CubeSet, cert: Option<&FrostmanCertificate>, what: &str) -> Result<Rational> {
    let cert = cert.ok_or_else(|| Error::Validation(format!("{what}: missing certificate")))?;
    let again = match cert.kind {
        CertificateKind::Dyadic => check_dyadic_frostman(set, cert.s, cert.c)?,
        CertificateKind::Ball => check_ball_frostman(set, cert.s, cert.c)?,
    };
    if !cert.verified || !again.verified {
        return Err(Error::Validation(format!(
            "{what}: certificate (s = {}, C = {}) does not verify",
            cert.s, cert.c
        )));
    }
    Ok(cert.s)
}

fn rational_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Measures `|∪_Q T(Q)|` against `M` for a certified cube set and certified
/// per-cube tube families, and records the predicted exponent floor.
///
/// `families` is called once per cube of `P`. Every family must carry a
/// verified certificate, consist of tubes meeting its cube, and have size in
/// `[M/2, 2M]`. The reported `s` is the smallest family exponent.
pub fn renwang_harness<F>(
    cubes: &CubeSet,
    cubes_certificate: Option<&FrostmanCertificate>,
    families: F,
    family_size: usize,
    eps: f64,
) -> Result<IncidenceRecord>
where
    F: Fn(DyadicCube) -> Result<TubeFamily> + Sync,
{
    let n = cubes.level();
    if n > HARNESS_MAX_LEVEL {
        return Err(Error::arg(format!("harness level {n} exceeds {HARNESS_MAX_LEVEL}")));
    }
    if cubes.is_empty() || family_size == 0 {
        return Err(Error::arg("harness needs a non-empty cube set and M > 0"));
    }
    let t = reverify(cubes, cubes_certificate, "cube set")?;

    let side = 1usize << n;
    let words = (side * side).div_ceil(64);
    let bitmap: Vec<AtomicU64> = (0..words).map(|_| AtomicU64::new(0)).collect();

    let exponents = cubes
        .cubes()
        .par_iter()
        .map(|&q| -> Result<(Rational, usize)> {
            let fam = families(q)?;
            if fam.cube != q {
                return Err(Error::Validation(format!("family for {} supplied for {q}", fam.cube)));
            }
            if fam.tubes.level() != n {
                return Err(Error::Validation(format!("family of {q} has tubes at another level")));
            }
            let size = fam.tubes.len();
            if size * 2 < family_size || size > 2 * family_size {
                return Err(Error::Validation(format!(
                    "family of {q} has {size} tubes, outside [M/2, 2M] for M = {family_size}"
                )));
            }
            if let Some(t) = fam.tubes.iter().find(|&t| !tube_meets_cube(t, q)) {
                return Err(Error::Validation(format!("tube {} does not meet cube {q}", t.param)));
            }
            let s = reverify(&fam.tubes.param_set(), fam.certificate.as_ref(), &format!("family of {q}"))?;
            for t in fam.tubes.iter() {
                let bit = t.param.i as usize * side + t.param.j as usize;
                bitmap[bit / 64].fetch_or(1 << (bit % 64), Ordering::Relaxed);
            }
            Ok((s, size))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = exponents.iter().map(|&(s, _)| s).min().expect("non-empty");

    let mut idx = Vec::new();
    for (w, word) in bitmap.iter().enumerate() {
        let mut bits = word.load(Ordering::Relaxed);
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let k = w * 64 + b;
            idx.push(((k / side) as u32, (k % side) as u32));
        }
    }
    let union = TubeSet::from_sorted(n, idx);
    let per_cube: Vec<u64> = cubes
        .cubes()
        .par_iter()
        .map(|&q| union.tubes_through(q).count() as u64)
        .collect();

    let (s, t) = (rational_f64(s), rational_f64(t));
    let exponent_hat = (union.len() as f64 / family_size as f64).log2() / n.max(1) as f64;
    let predicted = t.min((s + t) / 2.0).min(1.0);
    Ok(IncidenceRecord {
        level: n,
        cubes: cubes.len(),
        family_size: Some(family_size),
        s: Some(s),
        t: Some(t),
        eps: Some(eps),
        union_size: union.len(),
        incidences: per_cube.iter().sum(),
        per_cube,
        exponent_hat: Some(exponent_hat),
        exponent_floor: Some(predicted - eps),
    })
}

/// Least-squares slope of `log2(|T| / M)` against `n` over harness runs at
/// several levels.
pub fn fitted_exponent(records: &[IncidenceRecord]) -> Result<f64> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| {
            let m = r.family_size.ok_or_else(|| Error::arg("record lacks a family size"))?;
            Ok((r.level as f64, (r.union_size as f64 / m as f64).log2()))
        })
        .collect::<Result<_>>()?;
    if points.len() < 2 {
        return Err(Error::arg("fitting needs at least two levels"));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("fitting needs distinct levels"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
