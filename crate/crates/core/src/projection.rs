//! Radial and orthogonal projections of cube families, with box-dimension
//! estimates of the images.
//!
//! Each closed member cube is projected as a whole: its image is an arc (radial)
//! or an interval (orthogonal), and every dyadic bin the image touches is
//! marked. The marked bins therefore cover the true image of the union of
//! cubes, and the estimate is an honest box count of a cover.
//!
//! Bins at precision `m` are the closed intervals `[k 2^-m, (k+1) 2^-m]`,
//! measured in turns for angles. The cover of `[lo, hi]` is the minimal one,
//! `floor(lo 2^m) ..= ceil(hi 2^m) - 1`, so coarsening precision maps bins to
//! their parents and `count(m-1) <= count(m) <= 2 count(m-1)`.
//!
//! Angles along the axes are exact. Other endpoints come from `f64` and are
//! widened by [`ANGLE_PAD`] before binning.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, Point2};
use crate::error::{Error, Result};
use crate::grid::CubeSet;
use crate::scalar::FloatScalar;

/// Outward padding, in turns or unit lengths, applied to inexact endpoints.
pub const ANGLE_PAD: f64 = 1e-12;

/// Finest supported projection precision.
pub const MAX_PRECISION: u32 = 24;

/// Occupied angle bins of `[0, 2π)` at precision `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub precision: u32,
    /// Sorted bin indices in `[0, 2^m)`; bin `k` is `[k, k+1] 2π / 2^m`.
    pub bins: Vec<u32>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Whether `angle` (radians, any real) lies in an occupied closed bin.
    pub fn covers_angle(&self, angle: f64) -> bool {
        let turns = angle.rem_euclid(TAU) / TAU;
        let scaled = turns * (1u64 << self.precision) as f64;
        let size = 1u64 << self.precision;
        let k = (scaled.floor() as u64).min(size - 1);
        let hit = |b: u64| self.bins.binary_search(&((b % size) as u32)).is_ok();
        // On a bin boundary both neighbours contain the angle.
        hit(k) || (scaled == scaled.floor() && hit(k + size - 1))
    }

    /// Bins of the undirected (projective) convention: `k` and `k + 2^{m-1}`
    /// identified. Requires `m >= 1`.
    pub fn undirected_count(&self) -> usize {
        if self.precision == 0 {
            return self.bins.len();
        }
        let half = 1u32 << (self.precision - 1);
        let mut folded: Vec<u32> = self.bins.iter().map(|&b| b % half).collect();
        folded.sort_unstable();
        folded.dedup();
        folded.len()
    }
}

/// Occupied intervals of the projection axis at precision `m`; bin `k` is
/// `[k 2^-m, (k+1) 2^-m]` and may be negative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub precision: u32,
    pub bins: Vec<i64>,
}

impl IntervalSet {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Minimal closed-bin cover of `[lo, hi]` at precision `m`, as a bin range.
fn bin_range(lo: f64, hi: f64, m: u32) -> (i64, i64) {
    let scale = (1u64 << m) as f64;
    let start = (lo * scale).floor() as i64;
    let end = ((hi * scale).ceil() as i64 - 1).max(start);
    (start, end)
}

fn check_precision(m: u32) -> Result<()> {
    if m > MAX_PRECISION {
        return Err(Error::arg(format!("precision {m} exceeds {MAX_PRECISION}")));
    }
    Ok(())
}

/// Exact angle in turns when `(dx, dy)` lies on an axis.
fn axis_turns(dx: i128, dy: i128) -> Option<f64> {
    match (dx.signum(), dy.signum()) {
        (1, 0) => Some(0.0),
        (0, 1) => Some(0.25),
        (-1, 0) => Some(0.5),
        (0, -1) => Some(0.75),
        _ => None,
    }
}

/// Arcs, in turns, subtended by the cubes of `y` at distance `> rho` from
/// `x`. Arcs may start below 0 when they straddle the positive x-axis.
fn subtended_arcs(x: Point2, y: &CubeSet, rho: Dyadic) -> Result<Vec<(f64, f64)>> {
    let n = y.level();
    if rho < Dyadic::pow2_neg(n) * Dyadic::from_int(2) {
        return Err(Error::arg(format!("exclusion radius {rho} below 2·2^-{n}")));
    }
    let e = n.max(x.x.exponent()).max(x.y.exponent()).max(rho.exponent());
    let (px, py) = (x.x.scaled(e), x.y.scaled(e));
    let r = rho.scaled(e);
    let unit = 1i128 << (e - n);
    let arcs = y
        .cubes()
        .par_iter()
        .filter_map(|c| {
            let (x0, y0) = (c.i as i128 * unit, c.j as i128 * unit);
            let (x1, y1) = (x0 + unit, y0 + unit);
            let gx = (x0 - px).max(0).max(px - x1);
            let gy = (y0 - py).max(0).max(py - y1);
            if gx * gx + gy * gy <= r * r {
                return None;
            }
            // The cube misses the base point, so its arc is shorter than a
            // half turn; measure corners relative to the centre direction.
            let (cx, cy) = ((x0 + x1) as f64 / 2.0 - px as f64, (y0 + y1) as f64 / 2.0 - py as f64);
            let centre = cy.atan2(cx) / TAU;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut lo_exact, mut hi_exact) = (false, false);
            for (qx, qy) in [(x0, y0), (x1, y0), (x0, y1), (x1, y1)] {
                let (dx, dy) = (qx - px, qy - py);
                let (turns, exact) = match axis_turns(dx, dy) {
                    Some(t) => (t, true),
                    None => ((dy as f64).atan2(dx as f64) / TAU, false),
                };
                let rel = turns - centre;
                let t = centre + rel - (rel + 0.5).div_euclid(1.0);
                if t < lo || (t == lo && !exact) {
                    lo = t;
                    lo_exact = exact;
                }
                if t > hi || (t == hi && !exact) {
                    hi = t;
                    hi_exact = exact;
                }
            }
            if !lo_exact {
                lo -= ANGLE_PAD;
            }
            if !hi_exact {
                hi += ANGLE_PAD;
            }
            Some((lo, hi))
        })
        .collect();
    Ok(arcs)
}

fn bin_arcs(arcs: &[(f64, f64)], m: u32) -> DirectionSet {
    let size = 1u64 << m;
    let mut occupied = vec![false; size as usize];
    for &(lo, hi) in arcs {
        let (start, end) = bin_range(lo, hi, m);
        if end - start + 1 >= size as i64 {
            occupied.iter_mut().for_each(|b| *b = true);
            break;
        }
        for k in start..=end {
            occupied[k.rem_euclid(size as i64) as usize] = true;
        }
    }
    let bins = (0..size as u32).filter(|&k| occupied[k as usize]).collect();
    DirectionSet { precision: m, bins }
}

/// Radial projection of the cubes of `y` at distance `> rho` from `x`.
///
/// Returns `Ok(None)` when every cube is excluded; that is a property of the
/// input, not an error. Requires `rho >= 2·2^-n`.
pub fn radial_project(x: Point2, y: &CubeSet, m: u32, rho: Dyadic) -> Result<Option<DirectionSet>> {
    check_precision(m)?;
    let arcs = subtended_arcs(x, y, rho)?;
    Ok((!arcs.is_empty()).then(|| bin_arcs(&arcs, m)))
}

/// Occupied bin counts of the radial projection at every precision in
/// `m_lo..=m_hi`, sharing one pass over the cubes.
pub fn radial_counts(x: Point2, y: &CubeSet, m_lo: u32, m_hi: u32, rho: Dyadic) -> Result<Option<Vec<(u32, u64)>>> {
    check_precision(m_hi)?;
    if m_lo > m_hi {
        return Err(Error::arg("empty precision window"));
    }
    let arcs = subtended_arcs(x, y, rho)?;
    if arcs.is_empty() {
        return Ok(None);
    }
    Ok(Some((m_lo..=m_hi).map(|m| (m, bin_arcs(&arcs, m).len() as u64)).collect()))
}

/// Finest precision at which one angle bin is at least as wide as
/// `2√2 δ / rho` radians, twice the largest arc a cube outside the exclusion
/// radius can subtend. Every cube meeting a line through the base point then
/// projects into the bins around that line's direction; beyond this
/// precision single cubes fill several bins and counts grow like `2^m`
/// whatever the set.
pub fn angular_resolution_limit(level: u32, rho: Dyadic) -> u32 {
    let ratio = rho.to_f64() * (1u64 << level) as f64;
    (std::f64::consts::PI * ratio / std::f64::consts::SQRT_2).log2().floor().max(0.0) as u32
}

/// Orthogonal projection onto the axis of direction `theta`, binned at
/// precision `m`. Axis-aligned directions are evaluated exactly.
pub fn orthogonal_project(theta: f64, s: &CubeSet, m: u32) -> Result<IntervalSet> {
    check_precision(m)?;
    if !theta.is_finite() {
        return Err(Error::arg("projection angle must be finite"));
    }
    let turns = (theta / TAU).rem_euclid(1.0);
    let exact = [(0.0, (1.0, 0.0)), (0.25, (0.0, 1.0)), (0.5, (-1.0, 0.0)), (0.75, (0.0, -1.0))]
        .iter()
        .find(|(t, _)| theta.rem_euclid(TAU) == t * TAU || turns == *t)
        .map(|&(_, cs)| cs);
    let (cos, sin, pad) = match exact {
        Some((c, s)) => (c, s, 0.0),
        None => (theta.cos(), theta.sin(), ANGLE_PAD),
    };
    let side = (1u64 << s.level()) as f64;
    let mut bins: Vec<i64> = s
        .cubes()
        .par_iter()
        .flat_map_iter(|c| {
            let (x0, y0) = (c.i as f64 / side, c.j as f64 / side);
            let (x1, y1) = (x0 + 1.0 / side, y0 + 1.0 / side);
            let proj = [x0 * cos + y0 * sin, x1 * cos + y0 * sin, x0 * cos + y1 * sin, x1 * cos + y1 * sin];
            let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min) - pad;
            let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + pad;
            let (a, b) = bin_range(lo, hi, m);
            a..=b
        })
        .collect();
    bins.sort_unstable();
    bins.dedup();
    Ok(IntervalSet { precision: m, bins })
}

/// Least-squares fit of `log2(count)` against scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate<T> {
    /// Fitted slope, clamped to `[0, 2]`.
    pub slope: T,
    pub m_lo: u32,
    pub m_hi: u32,
    /// Largest deviation of a `log2` count from the fitted line.
    pub residual: T,
    pub counts: Vec<(u32, u64)>,
}

/// Fits `log2(count)` against `m` over `m_lo..=m_hi`. `counts` must contain
/// every scale of the window, each positive; at least three scales are
/// required.
pub fn estimate_dimension<T: FloatScalar>(counts: &[(u32, u64)], m_lo: u32, m_hi: u32) -> Result<DimensionEstimate<T>> {
    if m_hi < m_lo || m_hi - m_lo + 1 < 3 {
        return Err(Error::arg(format!("window {m_lo}..={m_hi} has fewer than 3 scales")));
    }
    let window: Vec<(u32, u64)> = (m_lo..=m_hi)
        .map(|m| {
            let c = counts
                .iter()
                .find(|&&(k, _)| k == m)
                .ok_or_else(|| Error::arg(format!("no count at scale {m}")))?
                .1;
            if c == 0 {
                return Err(Error::arg(format!("zero count at scale {m}")));
            }
            Ok((m, c))
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(T, T)> = window
        .iter()
        .map(|&(m, c)| (T::lit(m as f64), T::lit(c as f64).log2()))
        .collect();
    let k = T::lit(pts.len() as f64);
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / k;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / k;
    let sxx = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    let sxy = pts.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    let raw = sxy / sxx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - (my + raw * (p.0 - mx))).abs())
        .fold(T::zero(), T::max);
    Ok(DimensionEstimate {
        slope: raw.max(T::zero()).min(T::two()),
        m_lo,
        m_hi,
        residual,
        counts: window,
    })
}

/// Box counts `(m, N_m)` of a set at levels `m_lo..=m_hi`.
pub fn box_counts(set: &CubeSet, m_lo: u32, m_hi: u32) -> Result<Vec<(u32, u64)>> {
    (m_lo..=m_hi).map(|m| Ok((m, set.box_count(m)? as u64))).collect()
}

/// Result of the radial sweep for one base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub x: Point2,
    /// `None` when every cube of `Y` lies within the exclusion radius.
    pub estimate: Option<DimensionEstimate<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSweep {
    pub samples: Vec<RadialSample>,
    /// Index into `samples` of the largest slope; ties go to the first.
    pub argmax: Option<usize>,
    pub max_slope: Option<f64>,
}

/// Radial dimension estimates over the window `m_lo..=m_hi` for every base
/// point, and their maximum.
pub fn sup_radial_dimension(xs: &[Point2], y: &CubeSet, m_lo: u32, m_hi: u32, rho: Dyadic) -> Result<RadialSweep> {
    if xs.is_empty() {
        return Err(Error::arg("no base points"));
    }
    if m_hi < m_lo || m_hi - m_lo + 1 < 3 {
        return Err(Error::arg(format!("window {m_lo}..={m_hi} has fewer than 3 scales")));
    }
    let samples = xs
        .par_iter()
        .map(|&x| {
            let estimate = match radial_counts(x, y, m_lo, m_hi, rho)? {
                Some(counts) => Some(estimate_dimension::<f64>(&counts, m_lo, m_hi)?),
                None => None,
            };
            Ok(RadialSample { x, estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut argmax: Option<usize> = None;
    for (k, s) in samples.iter().enumerate() {
        if let Some(e) = &s.estimate {
            if argmax.map_or(true, |a| e.slope > samples[a].estimate.as_ref().unwrap().slope) {
                argmax = Some(k);
            }
        }
    }
    let max_slope = argmax.map(|a| samples[a].estimate.as_ref().unwrap().slope);
    Ok(RadialSweep { samples, argmax, max_slope })
}
