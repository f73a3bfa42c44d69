//! Point-line duality, δ-tubes and the exact tube-cube predicate.
//!
//! Convention: the parameter point `(a, b)` is dual to the line
//! `y = a x + b`. Parameters live in `[0,1]^2`, so only lines with slope in
//! `[0, 1]` are represented; steeper configurations are handled by swapping
//! coordinates before calling in.
//!
//! Under this convention a point `p` lies on the line with parameters `q`
//! exactly when `reflect(q)` lies on the dual line of `reflect(p)`, where
//! `reflect(x, y) = (x, 1 - y)`.

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, Point2};
use crate::error::{Error, Result};
use crate::grid::DyadicCube;
use crate::scalar::FloatScalar;

/// The line `y = slope · x + intercept`, with both parameters in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Line {
    slope: Dyadic,
    intercept: Dyadic,
}

impl Line {
    pub fn new(slope: Dyadic, intercept: Dyadic) -> Result<Self> {
        let unit = |v: Dyadic| v >= Dyadic::ZERO && v <= Dyadic::ONE;
        if !unit(slope) || !unit(intercept) {
            return Err(Error::domain(format!(
                "line parameters ({slope}, {intercept}) outside [0,1]^2"
            )));
        }
        Ok(Line { slope, intercept })
    }

    /// The line through two points with distinct abscissae. Fails when the
    /// slope is not dyadic or the parameters leave `[0,1]^2`.
    pub fn through(p: Point2, q: Point2) -> Result<Self> {
        let dx = q.x - p.x;
        if dx.is_zero() {
            return Err(Error::domain("vertical line has no slope-intercept form"));
        }
        let slope = (q.y - p.y)
            .checked_div(dx)
            .ok_or_else(|| Error::domain(format!("slope through {p} and {q} is not dyadic")))?;
        Line::new(slope, p.y - slope * p.x)
    }

    pub fn slope(self) -> Dyadic {
        self.slope
    }

    pub fn intercept(self) -> Dyadic {
        self.intercept
    }

    /// The parameter point `(slope, intercept)`.
    pub fn param(self) -> Point2 {
        Point2 { x: self.slope, y: self.intercept }
    }

    pub fn eval(self, x: Dyadic) -> Dyadic {
        self.slope * x + self.intercept
    }

    pub fn contains(self, p: Point2) -> bool {
        self.eval(p.x) == p.y
    }
}

/// Line dual to a parameter point: `(a, b) -> y = a x + b`.
pub fn dual_of_point(p: Point2) -> Line {
    Line { slope: p.x, intercept: p.y }
}

/// A δ-tube: all lines whose parameters lie in one dyadic parameter cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tube {
    pub param: DyadicCube,
}

impl Tube {
    pub fn level(self) -> u32 {
        self.param.level
    }

    /// Whether the line's parameters fall in the (half-open) parameter cube.
    pub fn contains_line(self, line: Line) -> bool {
        let p = line.param();
        let half_open = |v: Dyadic| v < Dyadic::ONE;
        half_open(p.x)
            && half_open(p.y)
            && DyadicCube::of_point(p, self.param.level).ok() == Some(self.param)
    }
}

pub fn tube_of_param_cube(q: DyadicCube) -> Tube {
    Tube { param: q }
}

/// Whether some line with parameters in the closed parameter cube of `tube`
/// passes through the closed cube `cube`.
///
/// For `a >= 0` the line `y = a x + b` meets `[x0,x1] x [y0,y1]` iff
/// `a x0 + b <= y1` and `a x1 + b >= y0`. Eliminating `b` over `[b0,b1]`
/// leaves `a x0 <= y1 - b0` and `a x1 >= y0 - b1`, and the resulting interval
/// of admissible `a` meets `[a0, a1]` iff the three cross-multiplied
/// inequalities below hold.
pub fn tube_meets_cube(tube: Tube, cube: DyadicCube) -> bool {
    let (t, q) = (tube.param, cube);
    let e = t.level.max(q.level);
    let scale = |k: u32, level: u32| (k as i128) << (e - level);
    let (a0, a1) = (scale(t.i, t.level), scale(t.i + 1, t.level));
    let (b0, b1) = (scale(t.j, t.level), scale(t.j + 1, t.level));
    let (x0, x1) = (scale(q.i, q.level), scale(q.i + 1, q.level));
    let (y0, y1) = (scale(q.j, q.level), scale(q.j + 1, q.level));
    let unit = 1i128 << e;
    let upper = y1 - b0;
    let lower = y0 - b1;
    a0 * x0 <= upper * unit && lower * unit <= a1 * x1 && lower * x0 <= upper * x1
}

/// Unit direction `(y - x) / |y - x|` with its angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction<T> {
    pub angle: T,
    pub dx: T,
    pub dy: T,
    /// Bound on `|dx^2 + dy^2 - 1|` and on the angle error.
    pub precision: T,
}

impl<T: FloatScalar> Direction<T> {
    /// The angle of the undirected line, in `[0, π)`.
    pub fn undirected_angle(&self) -> T {
        if self.angle >= T::PI() {
            self.angle - T::PI()
        } else {
            self.angle
        }
    }

    pub fn negated(&self) -> Self {
        let mut angle = self.angle + T::PI();
        if angle >= T::TAU() {
            angle = angle - T::TAU();
        }
        Direction { angle, dx: -self.dx, dy: -self.dy, precision: self.precision }
    }
}

/// Direction from `x` towards `y`.
pub fn direction_between<T: FloatScalar>(x: Point2, y: Point2) -> Result<Direction<T>> {
    if x == y {
        return Err(Error::DegeneratePair);
    }
    let dx = T::lit((y.x - x.x).to_f64());
    let dy = T::lit((y.y - x.y).to_f64());
    let norm = dx.hypot(dy);
    let mut angle = dy.atan2(dx);
    if angle < T::zero() {
        angle = angle + T::TAU();
    }
    if angle >= T::TAU() {
        angle = T::zero();
    }
    Ok(Direction { angle, dx: dx / norm, dy: dy / norm, precision: T::lit(4.0) * T::epsilon() })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use super::*;

    fn d(p: i64, q: i64) -> Dyadic {
        Dyadic::from_ratio(p, q).unwrap()
    }

    fn pt(xn: i64, xd: i64, yn: i64, yd: i64) -> Point2 {
        Point2::from_ratios(xn, xd, yn, yd).unwrap()
    }

    fn tube(l: u32, i: u32, j: u32) -> Tube {
        tube_of_param_cube(DyadicCube::new(l, i, j).unwrap())
    }

    fn cube(l: u32, i: u32, j: u32) -> DyadicCube {
        DyadicCube::new(l, i, j).unwrap()
    }

    #[test]
    fn dual_of_point_examples() {
        let zero = dual_of_point(Point2::origin());
        assert_eq!((zero.slope(), zero.intercept()), (Dyadic::ZERO, Dyadic::ZERO));
        let l = dual_of_point(pt(1, 2, 1, 4));
        assert_eq!(l.slope(), d(1, 2));
        assert_eq!(l.intercept(), d(1, 4));
        assert_eq!(l.eval(Dyadic::ONE), d(3, 4));
    }

    #[test]
    fn line_through_recovers_parameters() {
        let l = Line::through(pt(0, 1, 1, 16), pt(1, 1, 1, 8)).unwrap();
        assert_eq!(l.param(), pt(1, 16, 1, 16));
        assert!(tube(3, 0, 0).contains_line(l));
        assert!(!tube(3, 1, 0).contains_line(l));
    }

    #[test]
    fn line_through_errors() {
        assert!(Line::through(pt(1, 4, 0, 1), pt(1, 4, 1, 1)).is_err());
        // slope 1/3 is not dyadic
        assert!(Line::through(pt(0, 1, 0, 1), pt(3, 4, 1, 4)).is_err());
        // slope -1 leaves the parameter window
        assert!(Line::through(pt(0, 1, 1, 1), pt(1, 1, 0, 1)).is_err());
    }

    #[test]
    fn tube_of_param_cube_is_definition() {
        let t = tube(1, 1, 0);
        assert!(t.contains_line(Line::new(d(1, 2), Dyadic::ZERO).unwrap()));
        assert!(!t.contains_line(Line::new(Dyadic::ONE, Dyadic::ZERO).unwrap()));
        assert!(!t.contains_line(Line::new(d(1, 2), d(1, 2)).unwrap()));
    }

    #[test]
    fn tube_meets_cube_examples() {
        assert!(tube_meets_cube(tube(3, 0, 0), cube(3, 0, 0)));
        assert!(!tube_meets_cube(tube(3, 0, 0), cube(3, 4, 7)));
        // a in [1/2, 5/8], b in [0, 1/8]; cube [1/2,5/8] x [1/4,3/8].
        assert!(tube_meets_cube(tube(3, 4, 0), cube(3, 4, 2)));
    }

    #[test]
    fn tube_meets_cube_closed_contact() {
        // Line y = 1/8 (a = 0, b = 1/8) touches the bottom edge of row 1.
        assert!(tube_meets_cube(tube(3, 0, 1), cube(3, 5, 1)));
        // Over x <= 1/8 every line of the tube stays below 1/64 + 1/8 < 3/8.
        assert!(!tube_meets_cube(tube(3, 0, 0), cube(3, 0, 3)));
    }

    #[test]
    fn direction_examples() {
        let o = Point2::origin();
        let e = direction_between::<f64>(o, pt(1, 1, 0, 1)).unwrap();
        assert_eq!((e.angle, e.dx, e.dy), (0.0, 1.0, 0.0));
        let e = direction_between::<f64>(o, pt(1, 1, 1, 1)).unwrap();
        assert!((e.angle - FRAC_PI_4).abs() <= e.precision);
        assert!((e.dx - 0.5f64.sqrt()).abs() <= e.precision);
        let e = direction_between::<f64>(pt(1, 4, 1, 4), pt(1, 4, 3, 4)).unwrap();
        assert!((e.angle - FRAC_PI_2).abs() <= e.precision);
        assert!(e.dx.abs() <= e.precision && (e.dy - 1.0).abs() <= e.precision);
    }

    #[test]
    fn direction_f32_and_degenerate() {
        let e = direction_between::<f32>(Point2::origin(), pt(1, 1, 1, 1)).unwrap();
        assert!((e.angle - std::f32::consts::FRAC_PI_4).abs() <= e.precision);
        assert_eq!(
            direction_between::<f64>(pt(1, 2, 1, 2), pt(1, 2, 1, 2)),
            Err(Error::DegeneratePair)
        );
    }

    #[test]
    fn reversed_direction_is_negation() {
        let (x, y) = (pt(1, 8, 3, 4), pt(5, 8, 1, 16));
        let a = direction_between::<f64>(x, y).unwrap();
        let b = direction_between::<f64>(y, x).unwrap();
        let n = a.negated();
        assert!((n.angle - b.angle).abs() < 1e-12);
        assert!((n.dx - b.dx).abs() < 1e-15 && (n.dy - b.dy).abs() < 1e-15);
        assert!((a.undirected_angle() - b.undirected_angle()).abs() < 1e-12);
    }
}
