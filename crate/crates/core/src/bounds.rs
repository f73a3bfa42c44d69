//! Closed-form projection bounds and their comparison.
//!
//! Every bound is a minimum of affine functions with coefficients in
//! `{1/2, 1}`, so all of them are written against [`Scalar`] and can be
//! evaluated exactly over [`Rational`](crate::Rational). Error terms that
//! vanish in the limit (`O(ε)`) are taken to be zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{FloatScalar, Scalar};

fn check_dim<T: Scalar>(name: &str, v: &T) -> Result<()> {
    if *v < T::zero() || *v > T::two() {
        return Err(Error::arg(format!("{name} = {v:?} outside [0, 2]")));
    }
    Ok(())
}

/// `min{dX, dY, 1}`.
pub fn bound_osw1<T: Scalar>(dx: T, dy: T) -> Result<T> {
    check_dim("dX", &dx)?;
    check_dim("dY", &dy)?;
    Ok(dx.min_of(dy).min_of(T::one()))
}

/// `min{dX + dY - 1, 1}`, or `None` when the hypothesis `dY > 1` fails.
pub fn bound_osw2<T: Scalar>(dx: T, dy: T) -> Result<Option<T>> {
    check_dim("dX", &dx)?;
    check_dim("dY", &dy)?;
    if dy <= T::one() {
        return Ok(None);
    }
    Ok(Some((dx + dy - T::one()).min_of(T::one())))
}

/// Value of [`bound_main`] and whether its hypothesis `dX > 0` holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainBound<T> {
    pub value: T,
    pub hypothesis_holds: bool,
}

/// `min{(dX + dY)/2, dY, 1}`. Computed at `dX = 0` too, with the hypothesis
/// flag cleared.
pub fn bound_main<T: Scalar>(dx: T, dy: T) -> Result<MainBound<T>> {
    check_dim("dX", &dx)?;
    check_dim("dY", &dy)?;
    let hypothesis_holds = dx > T::zero();
    let value = (dx + dy.clone()).half().min_of(dy).min_of(T::one());
    Ok(MainBound { value, hypothesis_holds })
}

/// Upper bound `max{2u - dY, 0}` on the dimension of exceptional directions
/// for orthogonal projections, valid for `0 <= u <= min{dY, 1}`.
pub fn bound_orthogonal_exceptional<T: Scalar>(dy: T, u: T) -> Result<T> {
    check_dim("dY", &dy)?;
    let cap = dy.clone().min_of(T::one());
    if u < T::zero() || u > cap {
        return Err(Error::arg(format!("u = {u:?} outside [0, min{{dY, 1}}] = [0, {cap:?}]")));
    }
    Ok((T::two() * u - dy).max_of(T::zero()))
}

/// Incidence exponent `min{t, (s+t)/2, 1}` for `s ∈ (0, 1]`, `t ∈ (0, 2]`.
pub fn incidence_exponent<T: Scalar>(s: T, t: T) -> Result<T> {
    if s <= T::zero() || s > T::one() {
        return Err(Error::arg(format!("s = {s:?} outside (0, 1]")));
    }
    if t <= T::zero() || t > T::two() {
        return Err(Error::arg(format!("t = {t:?} outside (0, 2]")));
    }
    Ok(t.clone().min_of((s + t).half()).min_of(T::one()))
}

fn step<T: Scalar>(s: T, t: T) -> T {
    t.clone().min_of((s + t).half()).min_of(T::one())
}

const FIXED_POINT_ROUNDS: usize = 200;

/// Least simultaneous solution of
/// `s_y >= min{t_x, (s_x+t_x)/2, 1}` and `s_x >= min{t_y, (s_y+t_y)/2, 1}`,
/// found by iterating both maps from `(0, 0)`.
///
/// The round trip contracts by at least `1/4`, so convergence is fast; the
/// result is checked against the closed form `min{t_y, (t_x+t_y)/2, 1}`.
pub fn coupled_fixed_point<T: FloatScalar>(tx: T, ty: T, tol: T) -> Result<(T, T)> {
    for (name, v) in [("t_x", tx), ("t_y", ty)] {
        if !(v > T::zero() && v <= T::one()) {
            return Err(Error::arg(format!("{name} = {v:?} outside (0, 1]")));
        }
    }
    if !(tol > T::zero()) {
        return Err(Error::arg("tolerance must be positive"));
    }
    let (mut sx, mut sy) = (T::zero(), T::zero());
    for _ in 0..FIXED_POINT_ROUNDS {
        let ny = step(sx, tx);
        let nx = step(ny, ty);
        let delta = (nx - sx).abs().max((ny - sy).abs());
        sx = nx;
        sy = ny;
        if delta <= tol * T::lit(0.25) {
            let closed = ty.min((tx + ty) * T::lit(0.5)).min(T::one());
            if (sx - closed).abs() > tol {
                return Err(Error::Validation(format!(
                    "fixed point s_x = {sx:?} differs from closed form {closed:?}"
                )));
            }
            return Ok((sx, sy));
        }
    }
    Err(Error::NonConvergence(FIXED_POINT_ROUNDS))
}

/// Smallest `s_x` on the grid `{0, h, 2h, ..., 1}` for which some grid `s_y`
/// satisfies both coupled inequalities.
///
/// Both right-hand sides are non-decreasing, so for a given `s_x` the best
/// choice is the smallest admissible grid `s_y`. Independent of the
/// iteration in [`coupled_fixed_point`].
pub fn coupled_grid_minimum(tx: f64, ty: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::arg("grid step must lie in (0, 1]"));
    }
    let k = (1.0 / h).round() as usize;
    let slack = 1e-12;
    let grid = |i: usize| i as f64 / k as f64;
    for ix in 0..=k {
        let sx = grid(ix);
        let need_y = tx.min((sx + tx) / 2.0).min(1.0);
        let iy = ((need_y - slack) * k as f64).ceil().max(0.0) as usize;
        if iy > k {
            continue;
        }
        let sy = grid(iy);
        if sx + slack >= ty.min((sy + ty) / 2.0).min(1.0) {
            return Ok(sx);
        }
    }
    Err(Error::Validation("no grid point satisfies the coupled system".into()))
}

/// Comparison of the main bound against the earlier ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport<T> {
    pub dx: T,
    pub dy: T,
    pub main: T,
    pub main_hypothesis_holds: bool,
    pub osw1: T,
    /// `None` when `dY <= 1`.
    pub osw2: Option<T>,
    pub main_ge_osw1: bool,
    pub main_gt_osw1: bool,
    pub main_ge_osw2: Option<bool>,
    pub main_gt_osw2: Option<bool>,
}

pub fn dominance_report<T: Scalar>(dx: T, dy: T) -> Result<DominanceReport<T>> {
    let main = bound_main(dx.clone(), dy.clone())?;
    let osw1 = bound_osw1(dx.clone(), dy.clone())?;
    let osw2 = bound_osw2(dx.clone(), dy.clone())?;
    Ok(DominanceReport {
        main_ge_osw1: main.value >= osw1,
        main_gt_osw1: main.value > osw1,
        main_ge_osw2: osw2.as_ref().map(|o| main.value >= *o),
        main_gt_osw2: osw2.as_ref().map(|o| main.value > *o),
        main_hypothesis_holds: main.hypothesis_holds,
        main: main.value,
        osw1,
        osw2,
        dx,
        dy,
    })
}
