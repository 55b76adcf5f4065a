//! Constraint and support curves, their parametrizations and the uniform
//! probability measures they carry.
//!
//! Segments are parametrized by the fraction of length travelled,
//! `t ∈ [0, 1]`. Circle arcs are parametrized by the polar angle itself,
//! `t ∈ [from_angle, to_angle]`, so that `point_at(t) = center + r (cos t, sin t)`.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Slack allowed when checking that a parameter lies in its interval.
const PARAM_SLACK: f64 = 1e-12;
/// Angular spans within this distance of 2π are full circles.
const FULL_TURN_TOL: f64 = 1e-12;

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector `(cos t, sin t)`.
    pub fn unit(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Self::new(c, s)
    }

    /// Mirror image across the y-axis.
    pub fn mirror_y(self) -> Self {
        Self::new(-self.x, self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        Point::new(self * rhs.x, self * rhs.y)
    }
}

/// A parametric segment or circular arc.
///
/// Construct through [`Curve::segment`], [`Curve::circle_arc`] or
/// [`Curve::circle`]; deserialization runs the same validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawCurve")]
pub enum Curve {
    Segment {
        from: Point,
        to: Point,
    },
    CircleArc {
        center: Point,
        radius: f64,
        from_angle: f64,
        to_angle: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawCurve {
    Segment {
        from: Point,
        to: Point,
    },
    CircleArc {
        center: Point,
        radius: f64,
        from_angle: f64,
        to_angle: f64,
    },
}

impl TryFrom<RawCurve> for Curve {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        match raw {
            RawCurve::Segment { from, to } => Curve::segment(from, to),
            RawCurve::CircleArc {
                center,
                radius,
                from_angle,
                to_angle,
            } => Curve::circle_arc(center, radius, from_angle, to_angle),
        }
    }
}

impl Curve {
    pub fn segment(from: Point, to: Point) -> Result<Self> {
        let finite = [from.x, from.y, to.x, to.y].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidCurve("segment endpoints must be finite".into()));
        }
        if from == to {
            return Err(Error::InvalidCurve("segment endpoints coincide".into()));
        }
        Ok(Curve::Segment { from, to })
    }

    pub fn circle_arc(center: Point, radius: f64, from_angle: f64, to_angle: f64) -> Result<Self> {
        let finite = [center.x, center.y, radius, from_angle, to_angle]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidCurve("arc data must be finite".into()));
        }
        if radius <= 0.0 {
            return Err(Error::InvalidCurve(format!("radius {radius} is not positive")));
        }
        if from_angle >= to_angle {
            return Err(Error::InvalidCurve(format!(
                "arc angles must increase, got [{from_angle}, {to_angle}]"
            )));
        }
        let span = to_angle - from_angle;
        if span > TAU + FULL_TURN_TOL {
            return Err(Error::InvalidCurve(format!("arc span {span} exceeds 2π")));
        }
        // Snap near-full turns onto exactly 2π so periodicity checks are exact.
        let to_angle = if (span - TAU).abs() <= FULL_TURN_TOL {
            from_angle + TAU
        } else {
            to_angle
        };
        Ok(Curve::CircleArc {
            center,
            radius,
            from_angle,
            to_angle,
        })
    }

    /// Full circle parametrized over `[0, 2π]`.
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        Self::circle_arc(center, radius, 0.0, TAU)
    }

    /// The parameter interval `[t_lo, t_hi]`.
    pub fn param_range(&self) -> (f64, f64) {
        match *self {
            Curve::Segment { .. } => (0.0, 1.0),
            Curve::CircleArc {
                from_angle,
                to_angle,
                ..
            } => (from_angle, to_angle),
        }
    }

    pub fn is_full_circle(&self) -> bool {
        match *self {
            Curve::Segment { .. } => false,
            Curve::CircleArc {
                from_angle,
                to_angle,
                ..
            } => (to_angle - from_angle - TAU).abs() <= FULL_TURN_TOL,
        }
    }

    pub fn point_at(&self, t: f64) -> Result<Point> {
        let (lo, hi) = self.param_range();
        if !(t >= lo - PARAM_SLACK && t <= hi + PARAM_SLACK) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        Ok(self.eval(t))
    }

    /// Point map without the range check. Arcs extend periodically.
    pub fn eval(&self, t: f64) -> Point {
        match *self {
            Curve::Segment { from, to } => from + t * (to - from),
            Curve::CircleArc { center, radius, .. } => center + radius * Point::unit(t),
        }
    }

    /// Derivative of the point map with respect to the parameter.
    pub fn tangent(&self, t: f64) -> Point {
        match *self {
            Curve::Segment { from, to } => to - from,
            Curve::CircleArc { radius, .. } => {
                let (s, c) = t.sin_cos();
                Point::new(-radius * s, radius * c)
            }
        }
    }

    /// `ds/dt`, constant for both curve kinds.
    pub fn speed(&self) -> f64 {
        match *self {
            Curve::Segment { from, to } => (to - from).norm(),
            Curve::CircleArc { radius, .. } => radius,
        }
    }

    pub fn arc_length(&self) -> f64 {
        let (lo, hi) = self.param_range();
        self.speed() * (hi - lo)
    }

    /// Parameter of the point of the curve, restricted to `window`, nearest
    /// to `p`.
    pub fn nearest_param(&self, p: Point, window: Window) -> f64 {
        match *self {
            Curve::Segment { from, to } => {
                let d = to - from;
                let t = (p - from).dot(d) / d.norm_sq();
                t.clamp(window.lo, window.hi)
            }
            Curve::CircleArc { center, .. } => {
                let v = p - center;
                if v.norm_sq() == 0.0 {
                    return window.lo;
                }
                let theta = wrap_into(v.y.atan2(v.x), window.lo);
                if theta <= window.hi {
                    return theta;
                }
                // Outside the window: pick the closer end.
                let d_lo = (self.eval(window.lo) - p).norm_sq();
                let d_hi = (self.eval(window.hi) - p).norm_sq();
                if d_lo <= d_hi {
                    window.lo
                } else {
                    window.hi
                }
            }
        }
    }

    /// Whole parameter range as a window.
    pub fn full_window(&self) -> Window {
        let (lo, hi) = self.param_range();
        Window { lo, hi }
    }

    /// True when `window` covers a full circle, so parameters wrap instead of
    /// clamping.
    pub fn is_periodic_window(&self, window: Window) -> bool {
        self.is_full_circle() && window.hi - window.lo >= TAU - FULL_TURN_TOL
    }
}

/// Maps `t` into `[base, base + 2π)`.
pub fn wrap_into(t: f64, base: f64) -> f64 {
    let w = base + (t - base).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU.
    if w >= base + TAU {
        base
    } else {
        w
    }
}

/// Arc length by quadrature of the speed `|dp/dt|`.
pub fn arc_length_by_quadrature(curve: &Curve) -> f64 {
    let (lo, hi) = curve.param_range();
    quadrature::integrate(|t| curve.tangent(t).norm(), lo, hi, 1e-14)
}

/// A closed parameter interval on a constraint curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// Uniform probability measure on a support curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Curve", into = "Curve")]
pub struct UniformMeasure {
    support: Curve,
    length: f64,
}

impl From<Curve> for UniformMeasure {
    fn from(support: Curve) -> Self {
        Self::new(support)
    }
}

impl From<UniformMeasure> for Curve {
    fn from(m: UniformMeasure) -> Self {
        m.support
    }
}

impl UniformMeasure {
    pub fn new(support: Curve) -> Self {
        Self {
            length: support.arc_length(),
            support,
        }
    }

    pub fn support(&self) -> &Curve {
        &self.support
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Density with respect to arc length on the support.
    pub fn density(&self) -> f64 {
        1.0 / self.length
    }

    /// Density at a plane point: constant on the support, zero elsewhere.
    pub fn density_at(&self, p: Point) -> f64 {
        let on_support = match self.support {
            Curve::Segment { from, to } => {
                let d = to - from;
                let t = (p - from).dot(d) / d.norm_sq();
                let foot = from + t * d;
                (0.0..=1.0).contains(&t) && (foot - p).norm() <= 1e-12 * d.norm().max(1.0)
            }
            Curve::CircleArc {
                center,
                radius,
                from_angle,
                to_angle,
            } => {
                let v = p - center;
                let on_circle = (v.norm() - radius).abs() <= 1e-12 * radius.max(1.0);
                on_circle && wrap_into(v.y.atan2(v.x), from_angle) <= to_angle
            }
        };
        if on_support {
            self.density()
        } else {
            0.0
        }
    }

    /// Probability per unit of the support parameter.
    pub fn param_density(&self) -> f64 {
        let (lo, hi) = self.support.param_range();
        1.0 / (hi - lo)
    }

    /// `P` of the support piece between parameters `t1 <= t2`.
    pub fn measure_of_interval(&self, t1: f64, t2: f64) -> Result<f64> {
        let (lo, hi) = self.support.param_range();
        for t in [t1, t2] {
            if !(t >= lo - PARAM_SLACK && t <= hi + PARAM_SLACK) {
                return Err(Error::OutOfRange { t, lo, hi });
            }
        }
        if t1 > t2 {
            return Err(Error::Domain(format!("reversed interval [{t1}, {t2}]")));
        }
        Ok(((t2 - t1) * self.param_density()).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_circle() -> Curve {
        Curve::circle(Point::new(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn point_at_examples() {
        let seg = Curve::segment(Point::new(0.0, 0.0), Point::new(2.0, 0.0)).unwrap();
        assert_eq!(seg.point_at(0.5).unwrap(), Point::new(1.0, 0.0));

        let p = unit_circle().point_at(1.5 * PI).unwrap();
        assert!(p.x.abs() < 1e-15 && (p.y + 1.0).abs() < 1e-15);

        let c2 = Curve::circle(Point::new(0.0, 0.0), 2.0).unwrap();
        let p = c2.point_at(PI).unwrap();
        assert!((p.x + 2.0).abs() < 1e-15 && p.y.abs() < 1e-15);
    }

    #[test]
    fn point_at_out_of_range() {
        let seg = Curve::segment(Point::new(0.0, 0.0), Point::new(2.0, 0.0)).unwrap();
        assert!(matches!(seg.point_at(1.5), Err(Error::OutOfRange { .. })));
        assert!(unit_circle().point_at(-0.1).is_err());
    }

    #[test]
    fn arc_length_examples() {
        let h = 3f64.sqrt() / 2.0;
        let chord = Curve::segment(Point::new(-h, -0.5), Point::new(h, -0.5)).unwrap();
        assert!((chord.arc_length() - 3f64.sqrt()).abs() < 1e-15);
        assert!((unit_circle().arc_length() - 2.0 * PI).abs() < 1e-15);
        let ab = Curve::segment(Point::new(-0.5, 0.0), Point::new(2.25, 0.0)).unwrap();
        assert!((ab.arc_length() - 2.75).abs() < 1e-15);
    }

    #[test]
    fn measure_of_interval_examples() {
        let m = UniformMeasure::new(unit_circle());
        assert!((m.measure_of_interval(0.3, 0.3 + PI).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(m.measure_of_interval(1.0, 1.0).unwrap(), 0.0);

        let seg = Curve::segment(Point::new(0.0, 0.0), Point::new(2.0, 0.0)).unwrap();
        let m = UniformMeasure::new(seg);
        // x ∈ [0, 0.5] is the parameter interval [0, 0.25]
        assert!((m.measure_of_interval(0.0, 0.25).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(m.measure_of_interval(0.5, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_curves_rejected() {
        let p = Point::new(1.0, 1.0);
        assert!(Curve::segment(p, p).is_err());
        assert!(Curve::circle(p, 0.0).is_err());
        assert!(Curve::circle_arc(p, 1.0, 1.0, 0.5).is_err());
        assert!(Curve::circle_arc(p, 1.0, 0.0, 7.0).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        for curve in [
            unit_circle(),
            Curve::circle_arc(Point::new(1.0, -2.0), 0.7, 0.4, 2.9).unwrap(),
            Curve::segment(Point::new(-1.0, 3.0), Point::new(4.0, -2.0)).unwrap(),
        ] {
            let m = UniformMeasure::new(curve);
            let (lo, hi) = curve.param_range();
            let total = quadrature::integrate(
                |t| m.density_at(curve.eval(t)) * curve.tangent(t).norm(),
                lo,
                hi,
                1e-14,
            );
            assert!((total - 1.0).abs() < 1e-12, "{total}");
        }
        let m = UniformMeasure::new(unit_circle());
        assert_eq!(m.density_at(Point::new(0.5, 0.0)), 0.0);
    }

    #[test]
    fn json_shape() {
        let seg: Curve = serde_json::from_str(r#"{"kind":"segment","from":[0,0],"to":[2,0]}"#).unwrap();
        assert_eq!(seg, Curve::segment(Point::new(0.0, 0.0), Point::new(2.0, 0.0)).unwrap());
        let arc: Curve = serde_json::from_str(
            r#"{"kind":"circle_arc","center":[0,0],"radius":1,"from_angle":0,"to_angle":3.0}"#,
        )
        .unwrap();
        let back = serde_json::to_value(arc).unwrap();
        assert_eq!(back["kind"], "circle_arc");
        assert_eq!(back["to_angle"], 3.0);
        let bad = serde_json::from_str::<Curve>(r#"{"kind":"circle_arc","center":[0,0],"radius":-1,"from_angle":0,"to_angle":3.0}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn nearest_param_on_arc_window() {
        let c = unit_circle();
        let w = Window::new(PI, 2.0 * PI);
        let t = c.nearest_param(Point::new(0.1, -0.5), w);
        assert!((t - (-0.5f64).atan2(0.1).rem_euclid(2.0 * PI)).abs() < 1e-14);
        // above the window: nearest end
        let t = c.nearest_param(Point::new(0.9, 0.1), w);
        assert_eq!(t, 2.0 * PI);
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_into(2.0 * PI, 0.0), 0.0);
        assert!((wrap_into(-0.5, 0.0) - (2.0 * PI - 0.5)).abs() < 1e-15);
    }
}
