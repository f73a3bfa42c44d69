//! Dyadic cubes of the unit square and finite same-level cube families.
//!
//! Cubes are half-open, `[i 2^-n, (i+1) 2^-n) x [j 2^-n, (j+1) 2^-n)`, so that
//! every point of `[0,1)^2` has exactly one cube per level. Predicates that
//! test geometric contact (balls, tubes) use the closed cube instead.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, Point2};
use crate::error::{Error, Result};

/// Deepest level a [`DyadicCube`] may have.
pub const MAX_LEVEL: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub i: u32,
    pub j: u32,
}

impl DyadicCube {
    pub fn new(level: u32, i: u32, j: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::arg(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        let side = 1u64 << level;
        if i as u64 >= side || j as u64 >= side {
            return Err(Error::domain(format!(
                "cube index ({i}, {j}) out of range for level {level}"
            )));
        }
        Ok(DyadicCube { level, i, j })
    }

    /// The root cube `[0,1)^2`.
    pub fn root() -> Self {
        DyadicCube { level: 0, i: 0, j: 0 }
    }

    /// The level-`n` cube containing `p`.
    pub fn of_point(p: Point2, n: u32) -> Result<Self> {
        if n > MAX_LEVEL {
            return Err(Error::arg(format!("level {n} exceeds {MAX_LEVEL}")));
        }
        let half_open = |v: Dyadic| v >= Dyadic::ZERO && v < Dyadic::ONE;
        if !half_open(p.x) || !half_open(p.y) {
            return Err(Error::domain(format!("point {p} outside [0,1)^2")));
        }
        Ok(DyadicCube {
            level: n,
            i: p.x.floor_scaled(n) as u32,
            j: p.y.floor_scaled(n) as u32,
        })
    }

    /// The unique level-`m` cube containing this one.
    pub fn ancestor(self, m: u32) -> Result<Self> {
        if m > self.level {
            return Err(Error::arg(format!(
                "ancestor level {m} is finer than cube level {}",
                self.level
            )));
        }
        let shift = self.level - m;
        Ok(DyadicCube { level: m, i: self.i >> shift, j: self.j >> shift })
    }

    pub fn is_ancestor_of(self, other: DyadicCube) -> bool {
        other.level >= self.level && other.ancestor(self.level).ok() == Some(self)
    }

    /// Children at the next level, in `(i, j)` order.
    pub fn children(self) -> [DyadicCube; 4] {
        let (l, i, j) = (self.level + 1, self.i * 2, self.j * 2);
        [
            DyadicCube { level: l, i, j },
            DyadicCube { level: l, i, j: j + 1 },
            DyadicCube { level: l, i: i + 1, j },
            DyadicCube { level: l, i: i + 1, j: j + 1 },
        ]
    }

    pub fn side(self) -> Dyadic {
        Dyadic::pow2_neg(self.level)
    }

    /// Closed bounds `([x0, x1], [y0, y1])`.
    pub fn bounds(self) -> ((Dyadic, Dyadic), (Dyadic, Dyadic)) {
        let n = self.level;
        let c = |k: u32| Dyadic::new(k as i64, n);
        ((c(self.i), c(self.i + 1)), (c(self.j), c(self.j + 1)))
    }

    pub fn center(self) -> Point2 {
        let e = self.level + 1;
        Point2 {
            x: Dyadic::new(2 * self.i as i64 + 1, e),
            y: Dyadic::new(2 * self.j as i64 + 1, e),
        }
    }

    /// Z-order code: bits of `i` and `j` interleaved, `i` in the odd positions.
    pub fn morton(self) -> u64 {
        interleave(self.i) << 1 | interleave(self.j)
    }

    pub fn from_morton(level: u32, code: u64) -> Self {
        DyadicCube { level, i: deinterleave(code >> 1), j: deinterleave(code) }
    }

    /// Swaps the roles of the two axes.
    pub fn transpose(self) -> Self {
        DyadicCube { level: self.level, i: self.j, j: self.i }
    }

    /// Image under `(x, y) -> (x, 1 - y)`.
    pub fn reflect(self) -> Self {
        DyadicCube { level: self.level, i: self.i, j: ((1u64 << self.level) - 1) as u32 - self.j }
    }

    /// Whether the closed cube meets the closed ball `B(center, r)`.
    pub fn meets_closed_ball(self, center: Point2, r: Dyadic) -> bool {
        let e = self.level.max(center.x.exponent()).max(center.y.exponent()).max(r.exponent());
        let lo_i = (self.i as i128) << (e - self.level);
        let lo_j = (self.j as i128) << (e - self.level);
        let side = 1i128 << (e - self.level);
        let gap = |lo: i128, c: i128| (lo - c).max(c - (lo + side)).max(0);
        let dx = gap(lo_i, center.x.scaled(e));
        let dy = gap(lo_j, center.y.scaled(e));
        let r = r.scaled(e);
        dx * dx + dy * dy <= r * r
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.level, self.i, self.j)
    }
}

fn interleave(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn deinterleave(code: u64) -> u32 {
    let mut x = code & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x >> 4)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x >> 8)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x >> 16)) & 0x0000_0000_FFFF_FFFF;
    x as u32
}

/// A finite family of distinct cubes sharing one level, with a per-level
/// ancestor count table built at construction.
///
/// Members are stored in Z-order so that the descendants of any coarser cube
/// form a contiguous run.
#[derive(Clone, PartialEq, Eq)]
pub struct CubeSet {
    level: u32,
    cubes: Vec<DyadicCube>,
    /// `index[m]` lists `(morton code of level-m ancestor, members below it)`,
    /// sorted by code.
    index: Vec<Vec<(u64, u32)>>,
}

impl fmt::Debug for CubeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CubeSet")
            .field("level", &self.level)
            .field("len", &self.cubes.len())
            .finish()
    }
}

impl CubeSet {
    /// Builds a set, rejecting duplicates and cubes of the wrong level.
    pub fn new(level: u32, cubes: impl IntoIterator<Item = DyadicCube>) -> Result<Self> {
        let cubes: Vec<DyadicCube> = cubes.into_iter().collect();
        for c in &cubes {
            if c.level != level {
                return Err(Error::arg(format!("cube {c} is not at level {level}")));
            }
        }
        let mut sorted = cubes;
        sorted.sort_unstable_by_key(|c| c.morton());
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::arg(format!("duplicate cube {}", w[0])));
        }
        Ok(Self::from_sorted(level, sorted))
    }

    /// Builds a set from `(i, j)` indices, dropping repeats.
    pub fn from_indices(level: u32, indices: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut cubes = indices
            .into_iter()
            .map(|(i, j)| DyadicCube::new(level, i, j))
            .collect::<Result<Vec<_>>>()?;
        cubes.sort_unstable_by_key(|c| c.morton());
        cubes.dedup();
        Ok(Self::from_sorted(level, cubes))
    }

    /// Same as [`CubeSet::from_indices`] for cubes already known to be valid.
    pub fn collect_dedup(level: u32, cubes: impl IntoIterator<Item = DyadicCube>) -> Self {
        let mut cubes: Vec<DyadicCube> = cubes.into_iter().collect();
        debug_assert!(cubes.iter().all(|c| c.level == level));
        cubes.sort_unstable_by_key(|c| c.morton());
        cubes.dedup();
        Self::from_sorted(level, cubes)
    }

    pub fn empty(level: u32) -> Self {
        Self::from_sorted(level, Vec::new())
    }

    /// All `4^level` cubes.
    pub fn full_grid(level: u32) -> Self {
        let side = 1u32 << level;
        let cubes = (0..side).flat_map(|i| (0..side).map(move |j| DyadicCube { level, i, j }));
        Self::collect_dedup(level, cubes)
    }

    fn from_sorted(level: u32, cubes: Vec<DyadicCube>) -> Self {
        let mut index = Vec::with_capacity(level as usize + 1);
        for m in 0..=level {
            let shift = 2 * (level - m);
            let mut runs: Vec<(u64, u32)> = Vec::new();
            for c in &cubes {
                let code = c.morton() >> shift;
                match runs.last_mut() {
                    Some((last, count)) if *last == code => *count += 1,
                    _ => runs.push((code, 1)),
                }
            }
            index.push(runs);
        }
        CubeSet { level, cubes, index }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Members in Z-order.
    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn iter(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        self.cubes.iter().copied()
    }

    /// Members sorted by `(i, j)`, the canonical file order.
    pub fn sorted_indices(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<(u32, u32)> = self.cubes.iter().map(|c| (c.i, c.j)).collect();
        v.sort_unstable();
        v
    }

    pub fn contains(&self, cube: DyadicCube) -> bool {
        cube.level == self.level
            && self.cubes.binary_search_by_key(&cube.morton(), |c| c.morton()).is_ok()
    }

    /// Number of level-`m` cubes holding at least one member.
    pub fn box_count(&self, m: u32) -> Result<usize> {
        self.check_level(m)?;
        Ok(self.index[m as usize].len())
    }

    /// Occupied level-`m` cubes with their member counts, in Z-order.
    pub fn ancestor_counts(&self, m: u32) -> Result<impl Iterator<Item = (DyadicCube, u32)> + '_> {
        self.check_level(m)?;
        Ok(self.index[m as usize]
            .iter()
            .map(move |&(code, count)| (DyadicCube::from_morton(m, code), count)))
    }

    /// Members lying below `q` (a cube at level at most `self.level()`).
    pub fn count_below(&self, q: DyadicCube) -> Result<u32> {
        self.check_level(q.level)?;
        let row = &self.index[q.level as usize];
        Ok(match row.binary_search_by_key(&q.morton(), |&(code, _)| code) {
            Ok(k) => row[k].1,
            Err(_) => 0,
        })
    }

    /// The most populated level-`m` cube (first in Z-order on ties).
    pub fn max_count_at(&self, m: u32) -> Result<Option<(DyadicCube, u32)>> {
        self.check_level(m)?;
        let mut best: Option<(u64, u32)> = None;
        for &(code, count) in &self.index[m as usize] {
            if best.map_or(true, |(_, b)| count > b) {
                best = Some((code, count));
            }
        }
        Ok(best.map(|(code, count)| (DyadicCube::from_morton(m, code), count)))
    }

    /// Members of the set lying below `q`, in Z-order.
    pub fn members_below(&self, q: DyadicCube) -> Result<&[DyadicCube]> {
        self.check_level(q.level)?;
        let shift = 2 * (self.level - q.level);
        let lo = q.morton() << shift;
        let hi = (q.morton() + 1) << shift;
        let start = self.cubes.partition_point(|c| c.morton() < lo);
        let end = self.cubes.partition_point(|c| c.morton() < hi);
        Ok(&self.cubes[start..end])
    }

    /// Members whose closed cube meets the closed ball `B(center, r)`, for
    /// `2^-level <= r <= 1`.
    pub fn cubes_in_ball(&self, center: Point2, r: Dyadic) -> Result<usize> {
        if r < Dyadic::pow2_neg(self.level) || r > Dyadic::ONE {
            return Err(Error::arg(format!(
                "radius {r} outside [2^-{}, 1]",
                self.level
            )));
        }
        Ok(self.cubes.iter().filter(|c| c.meets_closed_ball(center, r)).count())
    }

    /// Level-`m` cover of the set: the occupied ancestors as a new set.
    pub fn coarsen(&self, m: u32) -> Result<CubeSet> {
        Ok(CubeSet::collect_dedup(m, self.ancestor_counts(m)?.map(|(c, _)| c)))
    }

    pub fn union(&self, other: &CubeSet) -> Result<CubeSet> {
        if other.level != self.level {
            return Err(Error::arg("union of sets at different levels"));
        }
        Ok(CubeSet::collect_dedup(self.level, self.iter().chain(other.iter())))
    }

    /// Subset of members satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(DyadicCube) -> bool) -> CubeSet {
        let cubes = self.cubes.iter().copied().filter(|&c| keep(c)).collect();
        Self::from_sorted(self.level, cubes)
    }

    /// Image under a cube-to-cube map at the same level.
    pub fn map(&self, f: impl FnMut(DyadicCube) -> DyadicCube) -> CubeSet {
        CubeSet::collect_dedup(self.level, self.cubes.iter().copied().map(f))
    }

    fn check_level(&self, m: u32) -> Result<()> {
        if m > self.level {
            Err(Error::arg(format!("level {m} is finer than set level {}", self.level)))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(l: u32, i: u32, j: u32) -> DyadicCube {
        DyadicCube::new(l, i, j).unwrap()
    }

    fn diagonal(n: u32) -> CubeSet {
        CubeSet::from_indices(n, (0..1u32 << n).map(|k| (k, k))).unwrap()
    }

    #[test]
    fn cube_of_point_examples() {
        let p = |xn, xd, yn, yd| Point2::from_ratios(xn, xd, yn, yd).unwrap();
        assert_eq!(DyadicCube::of_point(p(0, 1, 0, 1), 3).unwrap(), cube(3, 0, 0));
        assert_eq!(DyadicCube::of_point(p(1, 2, 1, 2), 1).unwrap(), cube(1, 1, 1));
        assert_eq!(DyadicCube::of_point(p(3, 8, 3, 4), 2).unwrap(), cube(2, 1, 3));
    }

    #[test]
    fn cube_of_point_rejects_right_edge() {
        let p = Point2::from_ratios(1, 1, 0, 1).unwrap();
        assert!(matches!(DyadicCube::of_point(p, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn ancestor_examples() {
        let c = cube(3, 5, 6);
        assert_eq!(c.ancestor(3).unwrap(), c);
        assert_eq!(c.ancestor(0).unwrap(), cube(0, 0, 0));
        assert_eq!(c.ancestor(1).unwrap(), cube(1, 1, 1));
        assert!(matches!(c.ancestor(4), Err(Error::Argument(_))));
    }

    #[test]
    fn box_count_examples() {
        assert_eq!(CubeSet::full_grid(2).box_count(1).unwrap(), 4);
        let single = CubeSet::new(5, [cube(5, 17, 3)]).unwrap();
        assert_eq!(single.box_count(3).unwrap(), 1);
        assert_eq!(diagonal(3).box_count(2).unwrap(), 4);
        assert!(diagonal(3).box_count(4).is_err());
    }

    #[test]
    fn cubes_in_ball_examples() {
        let origin = Point2::origin();
        // The unit ball at a corner misses the 8 cubes whose nearest point is
        // beyond distance 1; centred, it covers everything.
        assert_eq!(CubeSet::full_grid(3).cubes_in_ball(origin, Dyadic::ONE).unwrap(), 56);
        let mid = Point2::from_ratios(1, 2, 1, 2).unwrap();
        assert_eq!(CubeSet::full_grid(3).cubes_in_ball(mid, Dyadic::ONE).unwrap(), 64);
        let single = CubeSet::new(4, [cube(4, 0, 0)]).unwrap();
        assert_eq!(single.cubes_in_ball(mid, Dyadic::new(1, 3)).unwrap(), 0);
        assert_eq!(diagonal(3).cubes_in_ball(origin, Dyadic::new(1, 2)).unwrap(), 2);
    }

    #[test]
    fn cubes_in_ball_radius_range() {
        let s = diagonal(3);
        assert!(s.cubes_in_ball(Point2::origin(), Dyadic::new(1, 3)).is_ok());
        assert!(s.cubes_in_ball(Point2::origin(), Dyadic::new(1, 4)).is_err());
        assert!(s.cubes_in_ball(Point2::origin(), Dyadic::from_int(2)).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        assert!(CubeSet::new(2, [cube(2, 1, 1), cube(2, 1, 1)]).is_err());
        assert!(CubeSet::new(2, [cube(3, 1, 1)]).is_err());
    }

    #[test]
    fn morton_round_trip_and_order() {
        let c = cube(10, 1000, 37);
        assert_eq!(DyadicCube::from_morton(10, c.morton()), c);
        assert_eq!(c.morton() >> 2, c.ancestor(9).unwrap().morton());
    }

    #[test]
    fn count_below_and_members_below_agree() {
        let s = CubeSet::full_grid(3);
        let q = cube(1, 1, 0);
        assert_eq!(s.count_below(q).unwrap(), 16);
        let members = s.members_below(q).unwrap();
        assert_eq!(members.len(), 16);
        assert!(members.iter().all(|&c| q.is_ancestor_of(c)));
        assert_eq!(diagonal(3).count_below(q).unwrap(), 0);
    }

    #[test]
    fn reflect_is_involution() {
        let c = cube(3, 2, 1);
        assert_eq!(c.reflect(), cube(3, 2, 6));
        assert_eq!(c.reflect().reflect(), c);
    }
}
