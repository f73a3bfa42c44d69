//! Brute-force reference implementations, deliberately naive.
//!
//! Shared by the oracle tests here and by the acceptance suite.

#![allow(dead_code)]

use rand::Rng;
use radial_lab::duality::Tube;
use radial_lab::{CubeSet, Dyadic, DyadicCube, Point2, Rational};

/// Random set at level `n`, each cube kept with a probability drawn from
/// `density`; never empty.
pub fn random_set<R: Rng>(rng: &mut R, n: u32, density: std::ops::Range<f64>) -> CubeSet {
    let density = rng.gen_range(density);
    let side = 1u32 << n;
    let mut idx: Vec<(u32, u32)> = (0..side)
        .flat_map(|i| (0..side).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(density))
        .collect();
    if idx.is_empty() {
        idx.push((rng.gen_range(0..side), rng.gen_range(0..side)));
    }
    CubeSet::from_indices(n, idx).unwrap()
}

/// Random set clustered around a few centres, so that concentration varies.
pub fn clustered_set<R: Rng>(rng: &mut R, n: u32, points: std::ops::Range<usize>) -> CubeSet {
    let points = rng.gen_range(points);
    let side = 1i64 << n;
    let centres: Vec<(i64, i64)> = (0..rng.gen_range(1..4)).map(|_| (rng.gen_range(0..side), rng.gen_range(0..side))).collect();
    let spread = rng.gen_range(0..=n as i64);
    let idx: Vec<(u32, u32)> = (0..points)
        .map(|_| {
            let (cx, cy) = centres[rng.gen_range(0..centres.len())];
            let jitter = |r: &mut R| r.gen_range(-(1i64 << spread) / 2..=(1i64 << spread) / 2);
            let (dx, dy) = (jitter(rng), jitter(rng));
            ((cx + dx).clamp(0, side - 1) as u32, (cy + dy).clamp(0, side - 1) as u32)
        })
        .collect();
    CubeSet::from_indices(n, idx).unwrap()
}

pub fn count_in_cube(set: &CubeSet, q: DyadicCube) -> u64 {
    set.iter().filter(|c| q.is_ancestor_of(*c)).count() as u64
}

/// `count <= C 2^{-s k} N` for `s = p/2`, decided as
/// `count^2 2^{p k} b^2 <= a^2 N^2`.
pub fn frostman_holds_half_integer(count: u64, k: u32, p: u32, c: Rational, total: u64) -> bool {
    let (a, b) = (*c.numer() as u128, *c.denom() as u128);
    let lhs = (count as u128).pow(2) * (1u128 << (p * k)) * b * b;
    let rhs = a * a * (total as u128).pow(2);
    lhs <= rhs
}

/// Exhaustive dyadic check: every cube at every level.
pub fn dyadic_oracle(set: &CubeSet, p: u32, c: Rational) -> bool {
    let total = set.len() as u64;
    (0..=set.level()).all(|m| {
        let side = 1u32 << m;
        (0..side).all(|i| {
            (0..side).all(|j| {
                let q = DyadicCube::new(m, i, j).unwrap();
                frostman_holds_half_integer(count_in_cube(set, q), m, p, c, total)
            })
        })
    })
}

/// Closed cube meets closed ball, in exact integer arithmetic at scale 2^e.
pub fn cube_meets_ball(c: DyadicCube, centre: (i128, i128), r: i128, e: u32) -> bool {
    let u = 1i128 << (e - c.level);
    let (x0, y0) = (c.i as i128 * u, c.j as i128 * u);
    let clamp = |v: i128, lo: i128| v.clamp(lo, lo + u);
    let (nx, ny) = (clamp(centre.0, x0), clamp(centre.1, y0));
    let (dx, dy) = (nx - centre.0, ny - centre.1);
    dx * dx + dy * dy <= r * r
}

/// Exhaustive ball check: balls `B(x, 2·2^-k)` at every member centre.
pub fn ball_oracle(set: &CubeSet, p: u32, c: Rational) -> bool {
    let n = set.level();
    let e = n + 1;
    let total = set.len() as u64;
    set.iter().all(|q| {
        let centre = ((2 * q.i as i128 + 1), (2 * q.j as i128 + 1));
        (0..=n).all(|k| {
            let r = 2i128 << (e - k);
            let count = set.iter().filter(|&m| cube_meets_ball(m, centre, r, e)).count() as u64;
            frostman_holds_half_integer(count, k, p, c, total)
        })
    })
}

/// Closed line-box test for `y = a x + b` with `a >= 0`.
pub fn line_meets_box(a: Dyadic, b: Dyadic, c: DyadicCube) -> bool {
    let ((x0, x1), (y0, y1)) = c.bounds();
    let lo = a * x0 + b;
    let hi = a * x1 + b;
    lo <= y1 && hi >= y0
}

/// Samples the closed parameter cube of `t` on the grid of step
/// `2^-(level + extra)` and reports whether any sampled line meets `c`.
pub fn tube_meets_cube_sampled(t: Tube, c: DyadicCube, extra: u32) -> bool {
    let l = t.param.level + extra;
    let steps = 1i64 << extra;
    let base_a = (t.param.i as i64) << extra;
    let base_b = (t.param.j as i64) << extra;
    (0..=steps).any(|da| {
        (0..=steps).any(|db| line_meets_box(Dyadic::new(base_a + da, l), Dyadic::new(base_b + db, l), c))
    })
}

pub fn point(x: Dyadic, y: Dyadic) -> Point2 {
    Point2::new(x, y).unwrap()
}
