//! Frostman-type non-concentration certificates for cube families.
//!
//! Two conditions are checked exactly, in integer arithmetic:
//!
//! * the *ball* condition `|S ∩ B(x, 2r)| <= C r^s |S|` for every member-cube
//!   centre `x` and every dyadic radius `r = 2^-k`, `2^-n <= r <= 1`. Testing
//!   the doubled ball at on-grid centres dominates every off-grid ball of
//!   radius `r` that meets the set, so the discretised check loses only a
//!   constant factor against the all-centres condition;
//! * the *dyadic* condition: every level-`m` cube holds at most
//!   `C 2^{-sm} |S|` members, for all `m <= n`.
//!
//! Exponents and constants are rationals. With `s = p/q` and `C = a/b` the
//! comparison `count <= C 2^{-sm} N` is decided as
//! `count^q 2^{pm} b^q <= (a N)^q` over big integers.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CubeSet, DyadicCube};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Ball,
    Dyadic,
}

/// The scale and location where the worst ratio `count / (r^s |S|)` occurs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// `m` for dyadic certificates (cube level), `k` for ball certificates
    /// (radius `2^-k`).
    pub scale: u32,
    /// Offending cube for dyadic certificates, ball centre cube for ball ones.
    pub index: (u32, u32),
    pub count: u64,
    /// `C 2^{-s scale} |S|`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanCertificate {
    pub kind: CertificateKind,
    #[serde(with = "ratio_str")]
    pub s: Rational,
    #[serde(rename = "C", with = "ratio_str")]
    pub c: Rational,
    pub verified: bool,
    pub witness: Option<Witness>,
}

impl FrostmanCertificate {
    /// Worst `count / (2^{-s scale} |S|)`, i.e. the smallest constant that
    /// would have verified.
    pub fn witness_ratio(&self) -> Option<f64> {
        let c = self.c.to_f64()?;
        self.witness.as_ref().map(|w| w.count as f64 * c / w.bound)
    }
}

mod ratio_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Exact comparator for `count · 2^{s·scale}` values under a fixed `s`.
struct Scaler {
    p: u64,
    q: u32,
}

impl Scaler {
    fn new(s: Rational) -> Self {
        Scaler { p: *s.numer() as u64, q: *s.denom() as u32 }
    }

    /// `count^q · 2^{p·scale}`, the `q`-th power of `count · 2^{s·scale}`.
    fn key(&self, count: u64, scale: u32) -> BigUint {
        BigUint::from(count).pow(self.q) << (self.p * scale as u64)
    }

    /// `(C · total)^q` in the same units as [`Scaler::key`] after the
    /// denominator of `C` has been multiplied into the key.
    fn threshold(&self, c: Rational, total: u64) -> (BigUint, BigUint) {
        let num = BigUint::from(*c.numer() as u64) * BigUint::from(total);
        let den = BigUint::from(*c.denom() as u64);
        (num.pow(self.q), den.pow(self.q))
    }
}

fn validate(s: Rational, c: Rational, set: &CubeSet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::arg("cannot certify an empty set"));
    }
    if s.is_negative() || s > Rational::from_integer(2) {
        return Err(Error::arg(format!("exponent {s} outside [0, 2]")));
    }
    if !c.is_positive() {
        return Err(Error::arg(format!("constant {c} must be positive")));
    }
    Ok(())
}

fn bound_f64(s: Rational, c: Rational, scale: u32, total: usize) -> f64 {
    let s = s.to_f64().unwrap_or(0.0);
    c.to_f64().unwrap_or(0.0) * (-s * scale as f64).exp2() * total as f64
}

/// Per-scale maxima `(scale, cube index, count)`; the worst one by exact ratio
/// becomes the witness.
fn certify(
    kind: CertificateKind,
    set: &CubeSet,
    s: Rational,
    c: Rational,
    maxima: Vec<(u32, (u32, u32), u64)>,
) -> FrostmanCertificate {
    let scaler = Scaler::new(s);
    let mut worst: Option<(BigUint, (u32, (u32, u32), u64))> = None;
    for entry @ (scale, _, count) in maxima {
        let key = scaler.key(count, scale);
        // Strictly greater keeps the coarsest scale on ties.
        if worst.as_ref().map_or(true, |(k, _)| key > *k) {
            worst = Some((key, entry));
        }
    }
    let total = set.len() as u64;
    let (thr_num, thr_den) = scaler.threshold(c, total);
    let (verified, witness) = match worst {
        Some((key, (scale, index, count))) => (
            key * thr_den <= thr_num,
            Some(Witness { scale, index, count, bound: bound_f64(s, c, scale, set.len()) }),
        ),
        None => (true, None),
    };
    FrostmanCertificate { kind, s, c, verified, witness }
}

/// Checks the per-ancestor (dyadic) condition: each level-`m` cube holds at
/// most `C 2^{-sm} |S|` members.
pub fn check_dyadic_frostman(set: &CubeSet, s: Rational, c: Rational) -> Result<FrostmanCertificate> {
    validate(s, c, set)?;
    let maxima = (0..=set.level())
        .map(|m| {
            let (cube, count) = set.max_count_at(m)?.expect("non-empty set");
            Ok((m, (cube.i, cube.j), count as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(certify(CertificateKind::Dyadic, set, s, c, maxima))
}

/// Checks the ball condition `|S ∩ B(x, 2r)| <= C r^s |S|` over member-cube
/// centres `x` and radii `r = 2^-k`, `k = n, ..., 0`.
pub fn check_ball_frostman(set: &CubeSet, s: Rational, c: Rational) -> Result<FrostmanCertificate> {
    validate(s, c, set)?;
    let counter = BallCounter::new(set);
    let maxima = (0..=set.level())
        .map(|k| {
            let (centre, count) = counter.max_over_centres(k);
            (k, (centre.i, centre.j), count)
        })
        .collect();
    Ok(certify(CertificateKind::Ball, set, s, c, maxima))
}

/// Counts members meeting closed balls centred at member-cube centres, one
/// row of the grid at a time.
pub(crate) struct BallCounter<'a> {
    set: &'a CubeSet,
    /// Sorted column indices per row `j`.
    rows: Vec<Vec<u32>>,
}

impl<'a> BallCounter<'a> {
    pub(crate) fn new(set: &'a CubeSet) -> Self {
        let side = 1usize << set.level();
        let mut rows = vec![Vec::new(); side];
        for c in set.iter() {
            rows[c.j as usize].push(c.i);
        }
        for row in &mut rows {
            row.sort_unstable();
        }
        BallCounter { set, rows }
    }

    /// Members meeting the closed ball of radius `2^{1-k}` about the centre
    /// of `centre`.
    pub(crate) fn count(&self, centre: DyadicCube, k: u32) -> u64 {
        let n = self.set.level();
        // Work at scale 2^{n+1}: cube sides are 2 units, centres odd integers.
        let e = n + 1;
        let radius: i128 = 1i128 << (e + 1 - k);
        let cx = 2 * centre.i as i128 + 1;
        let cy = 2 * centre.j as i128 + 1;
        let side = 2i128;
        let r2 = radius * radius;
        // Rows whose closed y-interval lies within `radius` of cy.
        let j_lo = ((cy - radius - side).div_euclid(side) + 1).max(0);
        let j_hi = ((cy + radius).div_euclid(side)).min(self.rows.len() as i128 - 1);
        let mut total = 0u64;
        for j in j_lo..=j_hi {
            let row = &self.rows[j as usize];
            if row.is_empty() {
                continue;
            }
            let y0 = j * side;
            let dy = (y0 - cy).max(cy - (y0 + side)).max(0);
            let w2 = r2 - dy * dy;
            if w2 < 0 {
                continue;
            }
            let g = (w2 as u128).sqrt() as i128;
            // Columns with gap_x <= g: i*side - cx <= g and cx - (i+1)*side <= g.
            let i_hi = (cx + g).div_euclid(side);
            let i_lo = -((-(cx - g)).div_euclid(side)) - 1;
            let lo = i_lo.max(0);
            if i_hi < lo {
                continue;
            }
            let start = row.partition_point(|&i| (i as i128) < lo);
            let end = row.partition_point(|&i| (i as i128) <= i_hi);
            total += (end - start) as u64;
        }
        total
    }

    /// Largest count over all member centres at radius index `k`, with the
    /// first centre in Z-order on ties.
    pub(crate) fn max_over_centres(&self, k: u32) -> (DyadicCube, u64) {
        self.set
            .cubes()
            .par_iter()
            .enumerate()
            .map(|(idx, &c)| (idx, c, self.count(c, k)))
            .reduce_with(|a, b| match a.2.cmp(&b.2) {
                Ordering::Greater => a,
                Ordering::Less => b,
                Ordering::Equal => {
                    if a.0 <= b.0 {
                        a
                    } else {
                        b
                    }
                }
            })
            .map(|(_, c, count)| (c, count))
            .expect("non-empty set")
    }
}

/// Largest `s` on the grid `{0, step, 2 step, ..., 2}` at which the dyadic
/// condition holds with constant `c`, found by bisection. `None` if even
/// `s = 0` fails (only possible for `c < 1`).
pub fn max_dyadic_exponent(set: &CubeSet, c: Rational, step: Rational) -> Result<Option<Rational>> {
    if !step.is_positive() {
        return Err(Error::arg(format!("grid step {step} must be positive")));
    }
    let top = (Rational::from_integer(2) / step).floor().to_integer();
    let holds = |k: i64| -> Result<bool> {
        Ok(check_dyadic_frostman(set, step * Rational::from_integer(k), c)?.verified)
    };
    if !holds(0)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0i64, top);
    if holds(hi)? {
        return Ok(Some(step * Rational::from_integer(hi)));
    }
    // Invariant: holds(lo) && !holds(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(step * Rational::from_integer(lo)))
}

/// Smallest constant of the form `2^k` for which the dyadic condition holds at
/// exponent `s`.
pub fn dyadic_constant_pow2(set: &CubeSet, s: Rational) -> Result<Rational> {
    let mut c = Rational::one();
    while !check_dyadic_frostman(set, s, c)?.verified {
        c *= Rational::from_integer(2);
    }
    // Shrink when the set is more spread than the unit constant requires.
    while c > Rational::one() && check_dyadic_frostman(set, s, c / Rational::from_integer(2))?.verified {
        c /= Rational::from_integer(2);
    }
    Ok(c)
}

/// `log2` box counts of a set at every level `0..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingProfile {
    pub level: u32,
    /// `counts[m]` = number of occupied level-`m` cubes.
    pub counts: Vec<u64>,
}

impl BranchingProfile {
    pub fn values(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| (c as f64).log2()).collect()
    }
}

pub fn branching_profile(set: &CubeSet) -> Result<BranchingProfile> {
    if set.is_empty() {
        return Err(Error::arg("branching profile of an empty set"));
    }
    let counts = (0..=set.level())
        .map(|m| set.box_count(m).map(|c| c as u64))
        .collect::<Result<_>>()?;
    Ok(BranchingProfile { level: set.level(), counts })
}

/// Output of [`extract_uniform_subset`].
#[derive(Clone, Debug)]
pub struct Extraction {
    pub subset: CubeSet,
    /// Dyadic certificate of `subset` at the measured exponent with constant
    /// `2^{2Δ+1}`; always re-checked before being returned.
    pub certificate: FrostmanCertificate,
    /// `ceil(|P| / (4Δ+2)^{ceil(n/Δ)})`.
    pub size_floor: u64,
    /// Block length `Δ`.
    pub block_len: u32,
    /// Block boundaries `0 = b_0 < b_1 < ... < b_B = n`.
    pub boundaries: Vec<u32>,
    /// Selected branching class per block, coarse to fine: every surviving
    /// cube at `b_{J-1}` keeps exactly `2^{classes[J-1]}` children at `b_J`.
    pub classes: Vec<u32>,
    /// Smallest constant verifying the certificate's exponent.
    pub measured_constant: f64,
}

impl Extraction {
    pub fn exponent(&self) -> Rational {
        self.certificate.s
    }
}

/// Pigeonhole uniformisation: selects a large subset whose branching is
/// constant across each block of `Δ = max(1, floor(eps n))` levels.
///
/// Blocks are processed from the finest to the coarsest. In each block every
/// surviving block-ancestor is classed by `floor(log2(#children))`; the class
/// holding the most leaves wins (ties to the larger class), and each ancestor
/// in it keeps exactly `2^class` of its heaviest children. Pruning a coarser
/// block removes whole subtrees, so finer blocks stay uniform, and each block
/// keeps at least a `1/(4Δ+2)` fraction of the leaves.
pub fn extract_uniform_subset(set: &CubeSet, eps: f64) -> Result<Extraction> {
    if set.is_empty() {
        return Err(Error::arg("cannot extract from an empty set"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::arg(format!("block fraction {eps} outside (0, 1]")));
    }
    let n = set.level();
    let block_len = ((eps * n as f64 + 1e-9).floor() as u32).max(1);
    let mut boundaries = vec![0u32];
    while *boundaries.last().unwrap() < n {
        let next = (boundaries.last().unwrap() + block_len).min(n);
        boundaries.push(next);
    }
    let blocks = boundaries.len() - 1;

    let mut leaves: Vec<DyadicCube> = set.cubes().to_vec();
    let mut classes = vec![0u32; blocks];
    for block in (0..blocks).rev() {
        let (a, b) = (boundaries[block], boundaries[block + 1]);
        let (kept, class) = uniformize_block(&leaves, n, a, b);
        leaves = kept;
        classes[block] = class;
    }
    let subset = CubeSet::collect_dedup(n, leaves);

    let size_floor = size_floor(set.len() as u64, block_len, blocks as u32);
    let pows_ok = BigUint::from(subset.len() as u64)
        * BigUint::from(4 * block_len as u64 + 2).pow(blocks as u32)
        >= BigUint::from(set.len() as u64);
    if !pows_ok {
        return Err(Error::Validation(format!(
            "extracted {} of {} cubes, below the size floor {size_floor}",
            subset.len(),
            set.len()
        )));
    }

    let c_max = Rational::from_integer(1i64 << (2 * block_len + 1).min(62));
    let from_root = prefix_exponent(&classes, &boundaries, 0);
    let mut exponent = from_root;
    if blocks >= 2 {
        let tail = prefix_exponent(&classes, &boundaries, 1);
        if tail > from_root && check_dyadic_frostman(&subset, tail, c_max)?.verified {
            exponent = tail;
        }
    }
    let certificate = check_dyadic_frostman(&subset, exponent, c_max)?;
    if !certificate.verified {
        return Err(Error::Validation(format!(
            "uniform subset failed to certify at exponent {exponent} with constant {c_max}"
        )));
    }
    let measured_constant = measured_dyadic_constant(&subset, exponent);
    Ok(Extraction {
        subset,
        certificate,
        size_floor,
        block_len,
        boundaries,
        classes,
        measured_constant,
    })
}

/// `ceil(total / (4Δ+2)^blocks)`.
pub fn size_floor(total: u64, block_len: u32, blocks: u32) -> u64 {
    let den = BigUint::from(4 * block_len as u64 + 2).pow(blocks);
    let num = BigUint::from(total);
    let q = (&num + &den - BigUint::one()) / &den;
    q.to_u64().unwrap_or(u64::MAX)
}

/// `min_J (sum of classes in blocks first..=J) / (b_{J+1} - b_first)`, capped
/// at 2.
fn prefix_exponent(classes: &[u32], boundaries: &[u32], first: usize) -> Rational {
    let mut best = Rational::from_integer(2);
    let mut acc = 0i64;
    for block in first..classes.len() {
        acc += classes[block] as i64;
        let span = (boundaries[block + 1] - boundaries[first]) as i64;
        let r = Rational::new(acc, span);
        if r < best {
            best = r;
        }
    }
    if classes.len() <= first {
        return Rational::zero();
    }
    best
}

/// `max_m maxcount_m · 2^{s m} / |S|` as a float.
pub fn measured_dyadic_constant(set: &CubeSet, s: Rational) -> f64 {
    let s = s.to_f64().unwrap_or(0.0);
    (0..=set.level())
        .filter_map(|m| set.max_count_at(m).ok().flatten())
        .map(|(c, count)| count as f64 * (s * c.level as f64).exp2() / set.len() as f64)
        .fold(0.0, f64::max)
}

/// One block of the uniformisation over levels `(a, b]`. `leaves` is in
/// Z-order and every leaf is at level `n`.
fn uniformize_block(leaves: &[DyadicCube], n: u32, a: u32, b: u32) -> (Vec<DyadicCube>, u32) {
    let shift_a = 2 * (n - a);
    let shift_b = 2 * (n - b);
    // Group leaves: ancestor at `a` -> children at `b` -> leaf range.
    struct Group {
        children: Vec<(usize, usize)>,
        leaves: usize,
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut last_a = None;
    let mut last_b = None;
    for (idx, c) in leaves.iter().enumerate() {
        let code = c.morton();
        let (ca, cb) = (code >> shift_a, code >> shift_b);
        if last_a != Some(ca) {
            groups.push(Group { children: Vec::new(), leaves: 0 });
            last_a = Some(ca);
            last_b = None;
        }
        let g = groups.last_mut().unwrap();
        if last_b != Some(cb) {
            g.children.push((idx, idx));
            last_b = Some(cb);
        }
        g.children.last_mut().unwrap().1 = idx + 1;
        g.leaves += 1;
    }
    let class_of = |g: &Group| usize::BITS - 1 - g.children.len().leading_zeros();
    let max_class = 2 * (b - a);
    let mut weight = vec![0usize; max_class as usize + 1];
    for g in &groups {
        weight[class_of(g) as usize] += g.leaves;
    }
    let mut class = 0u32;
    for k in 0..=max_class {
        if weight[k as usize] >= weight[class as usize] {
            class = k;
        }
    }
    let keep = 1usize << class;
    let mut kept = Vec::new();
    for g in groups.iter().filter(|g| class_of(g) == class) {
        let mut children = g.children.clone();
        // Heaviest first; stable sort keeps Z-order among equals.
        children.sort_by_key(|&(lo, hi)| std::cmp::Reverse(hi - lo));
        children.truncate(keep);
        children.sort_unstable();
        for (lo, hi) in children {
            kept.extend_from_slice(&leaves[lo..hi]);
        }
    }
    (kept, class)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn diagonal(n: u32) -> CubeSet {
        CubeSet::from_indices(n, (0..1u32 << n).map(|k| (k, k))).unwrap()
    }

    fn single(n: u32) -> CubeSet {
        CubeSet::from_indices(n, [(1, 2)]).unwrap()
    }

    #[test]
    fn ball_full_grid_verifies() {
        let cert = check_ball_frostman(&CubeSet::full_grid(3), r(2, 1), r(64, 1)).unwrap();
        assert!(cert.verified);
    }

    #[test]
    fn ball_singleton_fails_at_finest_radius() {
        let cert = check_ball_frostman(&single(4), r(1, 1), r(1, 1)).unwrap();
        assert!(!cert.verified);
        let w = cert.witness.unwrap();
        assert_eq!(w.scale, 4);
        assert_eq!(w.count, 1);
        assert!((w.bound - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn zero_exponent_unit_constant_always_verifies() {
        for set in [diagonal(4), single(3), CubeSet::full_grid(2)] {
            assert!(check_ball_frostman(&set, r(0, 1), r(1, 1)).unwrap().verified);
            assert!(check_dyadic_frostman(&set, r(0, 1), r(1, 1)).unwrap().verified);
        }
    }

    #[test]
    fn dyadic_examples() {
        for n in 0..5 {
            assert!(check_dyadic_frostman(&CubeSet::full_grid(n), r(2, 1), r(1, 1)).unwrap().verified);
        }
        assert!(check_dyadic_frostman(&diagonal(3), r(1, 1), r(1, 1)).unwrap().verified);

        let column = CubeSet::from_indices(3, (0..8).map(|j| (2, j))).unwrap();
        let cert = check_dyadic_frostman(&column, r(2, 1), r(1, 1)).unwrap();
        assert!(!cert.verified);
        // Ratios count·4^m/8 are 1, 2, 4, 8 for m = 0..3; the finest level is worst.
        let w = cert.witness.unwrap();
        assert_eq!((w.scale, w.count), (3, 1));
        assert!((w.bound - 0.125).abs() < 1e-15);
    }

    #[test]
    fn empty_and_bad_arguments_rejected() {
        let empty = CubeSet::empty(3);
        assert!(check_dyadic_frostman(&empty, r(1, 1), r(1, 1)).is_err());
        assert!(check_ball_frostman(&empty, r(1, 1), r(1, 1)).is_err());
        let d = diagonal(2);
        assert!(check_dyadic_frostman(&d, r(5, 2), r(1, 1)).is_err());
        assert!(check_dyadic_frostman(&d, r(1, 1), r(0, 1)).is_err());
        assert!(check_dyadic_frostman(&d, r(-1, 2), r(1, 1)).is_err());
    }

    #[test]
    fn max_exponent_examples() {
        let step = r(1, 64);
        assert_eq!(max_dyadic_exponent(&CubeSet::full_grid(4), r(1, 1), step).unwrap(), Some(r(2, 1)));
        assert_eq!(max_dyadic_exponent(&diagonal(4), r(1, 1), step).unwrap(), Some(r(1, 1)));
        assert_eq!(max_dyadic_exponent(&single(4), r(1, 1), step).unwrap(), Some(r(0, 1)));
        assert_eq!(max_dyadic_exponent(&single(4), r(1, 2), step).unwrap(), None);
    }

    #[test]
    fn branching_profile_examples() {
        assert_eq!(branching_profile(&CubeSet::full_grid(2)).unwrap().counts, vec![1, 4, 16]);
        assert_eq!(branching_profile(&diagonal(3)).unwrap().counts, vec![1, 2, 4, 8]);
        assert_eq!(branching_profile(&single(3)).unwrap().counts, vec![1, 1, 1, 1]);
        let v = branching_profile(&diagonal(3)).unwrap().values();
        assert_eq!(v, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(branching_profile(&CubeSet::empty(2)).is_err());
    }

    #[test]
    fn extraction_full_grid_keeps_everything() {
        let p = CubeSet::full_grid(4);
        let ex = extract_uniform_subset(&p, 0.5).unwrap();
        assert_eq!(ex.subset, p);
        assert_eq!(ex.exponent(), r(2, 1));
        assert_eq!(ex.block_len, 2);
        assert!(ex.certificate.verified);
    }

    #[test]
    fn extraction_singleton() {
        for eps in [0.25, 0.5, 1.0] {
            let ex = extract_uniform_subset(&single(4), eps).unwrap();
            assert_eq!(ex.subset, single(4));
            assert_eq!(ex.exponent(), r(0, 1));
        }
    }

    #[test]
    fn extraction_drops_stray_cube() {
        // Full subtree of 16 level-4 cubes below level-2 cube (1, 2), plus one
        // stray cube elsewhere.
        let q = DyadicCube::new(2, 1, 2).unwrap();
        let subtree: Vec<(u32, u32)> = (0..4).flat_map(|a| (0..4).map(move |b| (4 + a, 8 + b))).collect();
        let p = CubeSet::from_indices(4, subtree.iter().copied().chain([(15, 0)])).unwrap();
        let ex = extract_uniform_subset(&p, 0.5).unwrap();
        assert_eq!(ex.subset.len(), 16);
        assert!(ex.subset.iter().all(|c| q.is_ancestor_of(c)));
        assert_eq!(ex.exponent(), r(2, 1));
        assert!(check_dyadic_frostman(&ex.subset, ex.exponent(), ex.certificate.c).unwrap().verified);
        assert!(ex.subset.len() as u64 >= ex.size_floor);
    }

    #[test]
    fn extraction_rejects_bad_input() {
        assert!(extract_uniform_subset(&CubeSet::empty(3), 0.5).is_err());
        assert!(extract_uniform_subset(&diagonal(3), 0.0).is_err());
        assert!(extract_uniform_subset(&diagonal(3), 1.5).is_err());
    }

    #[test]
    fn certificate_json_shape() {
        let cert = check_dyadic_frostman(&diagonal(3), r(1, 2), r(3, 2)).unwrap();
        let json = serde_json::to_value(&cert).unwrap();
        assert_eq!(json["kind"], "dyadic");
        assert_eq!(json["s"], "1/2");
        assert_eq!(json["C"], "3/2");
        assert_eq!(json["verified"], true);
        for key in ["scale", "index", "count", "bound"] {
            assert!(json["witness"].get(key).is_some(), "missing {key}");
        }
        let back: FrostmanCertificate = serde_json::from_value(json).unwrap();
        assert_eq!(back, cert);
    }
}
