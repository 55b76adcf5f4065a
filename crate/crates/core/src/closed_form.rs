//! Known optimal codebooks and their errors.
//!
//! Every family fixes a support measure, a constraint curve and a parameter
//! window. [`Family::closed_form`] returns the optimal codebook together with
//! its error, computed by an exact formula.
//!
//! `ClosedForm::stated_value` carries the reference error expression where
//! one exists. For the general segment–line family that polynomial agrees
//! with the true distortion only for `n ≤ 3` or a horizontal constraint
//! (`m = 0`); for other slopes it undershoots the lower bound
//! `E[dist²(x, L)]`. `value` is always the true distortion of the codebook.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distortion::Codebook;
use crate::error::{Error, Result};
use crate::geometry::{Curve, Point, UniformMeasure, Window};

/// String ids used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyId {
    SegmentLine,
    Clamped,
    OneSided,
    CircleCircle,
    Diameter,
    Chord,
}

impl FamilyId {
    pub const ALL: [FamilyId; 6] = [
        FamilyId::SegmentLine,
        FamilyId::Clamped,
        FamilyId::OneSided,
        FamilyId::CircleCircle,
        FamilyId::Diameter,
        FamilyId::Chord,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::SegmentLine => "segment-line",
            FamilyId::Clamped => "clamped",
            FamilyId::OneSided => "one-sided",
            FamilyId::CircleCircle => "circle-circle",
            FamilyId::Diameter => "diameter",
            FamilyId::Chord => "chord",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown family `{s}`")))
    }
}

/// Uniform measure on `[a, b] × {0}` quantized on the line `y = m x + c`
/// between `x = d` and `x = e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentLineFamily {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl SegmentLineFamily {
    pub fn new(a: f64, b: f64, m: f64, c: f64, d: f64, e: f64) -> Result<Self> {
        if ![a, b, m, c, d, e].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("segment-line parameters must be finite".into()));
        }
        if a >= b {
            return Err(Error::Domain(format!("support needs a < b, got a={a}, b={b}")));
        }
        if d >= e {
            return Err(Error::Domain(format!("window needs d < e, got d={d}, e={e}")));
        }
        Ok(Self { a, b, m, c, d, e })
    }

    fn k(&self) -> f64 {
        1.0 + self.m * self.m
    }

    /// x-coordinate on the support hit by the perpendicular to `L` through
    /// `(x, m x + c)`.
    pub fn projection(&self, x: f64) -> f64 {
        self.k() * x + self.m * self.c
    }

    /// `(a − c m)/(1 + m²)`: the line abscissa whose perpendicular lands on `a`.
    fn base(&self) -> f64 {
        (self.a - self.c * self.m) / self.k()
    }

    /// Both window ends project outside the support, so the free optimum is
    /// admissible: `max{a, (m²+1)d + mc} = a` and `min{b, (m²+1)e + mc} = b`.
    pub fn interior_ok(&self) -> bool {
        self.lower_free() && self.upper_free()
    }

    fn lower_free(&self) -> bool {
        self.a.max(self.projection(self.d)) == self.a
    }

    fn upper_free(&self) -> bool {
        self.b.min(self.projection(self.e)) == self.b
    }

    /// Free optimal abscissae `aᵢ = (2i−1)(b−a)/(2n(1+m²)) + (a−cm)/(1+m²)`.
    pub fn free_abscissae(&self, n: usize) -> Vec<f64> {
        let nf = n as f64;
        (1..=n)
            .map(|i| (2 * i - 1) as f64 / (2.0 * nf * self.k()) * (self.b - self.a) + self.base())
            .collect()
    }

    /// Mean squared perpendicular distance from the support to `L`.
    pub fn mean_perpendicular_sq(&self) -> f64 {
        let (a, b, m, c) = (self.a, self.b, self.m, self.c);
        (m * m * (a * a + a * b + b * b) / 3.0 + m * c * (a + b) + c * c) / self.k()
    }

    /// True error of the free optimal codebook.
    pub fn free_error(&self, n: usize) -> f64 {
        let nf = n as f64;
        let w = self.b - self.a;
        self.mean_perpendicular_sq() + w * w / (12.0 * nf * nf * self.k())
    }

    /// The reference error polynomial in `1/n`.
    pub fn stated_error(&self, n: usize) -> f64 {
        let (a, b, m, c) = (self.a, self.b, self.m, self.c);
        let nf = n as f64;
        let m2 = m * m;
        let ab = a - b;
        let poly = -48.0 * ab * ab * m2 + ab * (ab + 72.0 * c * m + 8.0 * (11.0 * a - 2.0 * b) * m2) * nf
            - 12.0 * ab * m * (5.0 * c + (4.0 * a + b) * m) * nf * nf
            + 12.0 * (c + a * m).powi(2) * nf.powi(3);
        poly / (12.0 * (m2 + 1.0) * nf.powi(3))
    }

    pub fn measure(&self) -> UniformMeasure {
        UniformMeasure::new(
            Curve::segment(Point::new(self.a, 0.0), Point::new(self.b, 0.0))
                .expect("a < b checked at construction"),
        )
    }

    pub fn constraint(&self) -> Curve {
        Curve::segment(
            Point::new(self.d, self.m * self.d + self.c),
            Point::new(self.e, self.m * self.e + self.c),
        )
        .expect("d < e checked at construction")
    }

    /// Constraint parameter of the line abscissa `x`.
    pub fn param_of(&self, x: f64) -> f64 {
        (x - self.d) / (self.e - self.d)
    }

    /// When the window clips the free optimum: for every `n > N` the
    /// optimal sets contain the clipped end element(s).
    pub fn threshold(&self) -> ThresholdReport {
        let (k, w, base) = (self.k(), self.b - self.a, self.base());
        // d < (b−a)/(2N(1+m²)) + base
        let lower_holds = |n: u64| self.d < w / (2.0 * n as f64 * k) + base;
        // (2N−1)(b−a)/(2N(1+m²)) + base < e
        let upper_holds = |n: u64| (2 * n - 1) as f64 * w / (2.0 * n as f64 * k) + base < self.e;

        let n1 = (!self.lower_free()).then(|| {
            // N < (b−a) / (2(1+m²)(d − base))
            let bound = w / (2.0 * k * (self.d - base));
            largest_satisfying(bound, lower_holds)
        });
        let n2 = (!self.upper_free()).then(|| {
            // N < 1 / (2(1 − Y)), Y = (e − base)(1+m²)/(b−a)
            let y = (self.e - base) * k / w;
            let bound = if y <= 0.0 { 0.0 } else { 0.5 / (1.0 - y) };
            largest_satisfying(bound, upper_holds)
        });
        let n = match (n1, n2) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        ThresholdReport { n1, n2, n }
    }
}

/// Largest positive integer `N` with `holds(N)`, where `holds` is true exactly
/// for `N < bound`. Returns 0 when no positive integer qualifies.
fn largest_satisfying(bound: f64, holds: impl Fn(u64) -> bool) -> u64 {
    if bound.is_infinite() && bound > 0.0 {
        return u64::MAX;
    }
    if bound.is_nan() || bound <= 1.0 {
        return u64::from(holds(1));
    }
    let mut n = (bound.ceil() as u64).saturating_sub(1).max(1);
    // Resolve floating-point ties against the defining strict inequality.
    while n > 0 && !holds(n) {
        n -= 1;
    }
    while holds(n + 1) {
        n += 1;
    }
    n
}

/// Thresholds past which optimal sets contain the window's end elements.
///
/// `None` means the corresponding window end never clips the free optimum.
/// `Some(0)` means it clips it for every `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    #[serde(rename = "N1")]
    pub n1: Option<u64>,
    #[serde(rename = "N2")]
    pub n2: Option<u64>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
}

/// A quantization problem with known optimal codebooks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    SegmentLine(SegmentLineFamily),
    /// Support `[0, 2] × {0}`, constraint `y = 1` for `1/2 ≤ x ≤ 3/2`.
    Clamped,
    /// Support `[0, 2] × {0}`, constraint `y = 1` for `0 ≤ x ≤ 28/15`.
    OneSided,
    /// Unit circle quantized on a concentric circle of radius `radius`.
    CircleCircle { radius: f64 },
    /// Horizontal diameter of the unit circle quantized on the circle.
    Diameter,
    /// Chord `y = −1/2` of the unit circle quantized on the circle.
    Chord,
}

/// Optimal codebook with its error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub family: FamilyId,
    pub n: usize,
    pub codebook: Codebook,
    /// Exact distortion of `codebook`.
    pub value: f64,
    /// Reference error expression, where one is given for this `n`.
    pub stated_value: Option<f64>,
}

const ONE_SIDED_END: f64 = 28.0 / 15.0;

fn chord_half_width() -> f64 {
    3f64.sqrt() / 2.0
}

/// `2 atan(√3/2 + √7/2)`, the offset of the optimal two-point chord pair.
fn chord_pair_offset() -> f64 {
    2.0 * (3f64.sqrt() / 2.0 + 7f64.sqrt() / 2.0).atan()
}

impl Family {
    pub fn circle_circle(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        Ok(Family::CircleCircle { radius })
    }

    pub fn id(&self) -> FamilyId {
        match self {
            Family::SegmentLine(_) => FamilyId::SegmentLine,
            Family::Clamped => FamilyId::Clamped,
            Family::OneSided => FamilyId::OneSided,
            Family::CircleCircle { .. } => FamilyId::CircleCircle,
            Family::Diameter => FamilyId::Diameter,
            Family::Chord => FamilyId::Chord,
        }
    }

    pub fn measure(&self) -> UniformMeasure {
        let seg = |a: Point, b: Point| UniformMeasure::new(Curve::segment(a, b).expect("fixed geometry"));
        match self {
            Family::SegmentLine(f) => f.measure(),
            Family::Clamped | Family::OneSided => seg(Point::new(0.0, 0.0), Point::new(2.0, 0.0)),
            Family::CircleCircle { .. } => UniformMeasure::new(unit_circle()),
            Family::Diameter => seg(Point::new(-1.0, 0.0), Point::new(1.0, 0.0)),
            Family::Chord => {
                let h = chord_half_width();
                seg(Point::new(-h, -0.5), Point::new(h, -0.5))
            }
        }
    }

    pub fn constraint(&self) -> Curve {
        let line = |x0: f64, x1: f64| Curve::segment(Point::new(x0, 1.0), Point::new(x1, 1.0)).expect("fixed geometry");
        match *self {
            Family::SegmentLine(f) => f.constraint(),
            Family::Clamped => line(0.5, 1.5),
            Family::OneSided => line(0.0, ONE_SIDED_END),
            Family::CircleCircle { radius } => Curve::circle(Point::new(0.0, 0.0), radius).expect("radius checked"),
            Family::Diameter | Family::Chord => unit_circle(),
        }
    }

    /// The admissible window: always the whole constraint curve.
    pub fn window(&self) -> Window {
        self.constraint().full_window()
    }

    /// Exact `lim Vₙ`.
    pub fn v_infinity(&self) -> f64 {
        match *self {
            Family::SegmentLine(f) => f.mean_perpendicular_sq(),
            Family::Clamped => 25.0 / 24.0,
            Family::OneSided => 10129.0 / 10125.0,
            Family::CircleCircle { radius } => (radius - 1.0).powi(2),
            Family::Diameter => 1.0 / 3.0,
            // Every chord point is eventually matched by its radial projection.
            Family::Chord => chord_limit(),
        }
    }

    /// Limit of the reference error expression.
    pub fn stated_v_infinity(&self) -> Option<f64> {
        match *self {
            Family::SegmentLine(f) => Some((f.c + f.a * f.m).powi(2) / f.k()),
            Family::Chord => None,
            _ => Some(self.v_infinity()),
        }
    }

    /// Smallest `n` from which the reference error expression applies.
    pub fn stated_from(&self) -> Option<usize> {
        match self {
            Family::SegmentLine(_) => Some(2),
            Family::Clamped => Some(3),
            Family::OneSided => Some(8),
            Family::CircleCircle { .. } | Family::Diameter | Family::Chord => Some(1),
        }
    }

    /// Reference error at `n`, if one is stated.
    pub fn stated_error(&self, n: usize) -> Option<f64> {
        match *self {
            Family::SegmentLine(f) => (n >= 2).then(|| f.stated_error(n)),
            Family::Clamped => (n >= 3).then(|| clamped_error(n)),
            Family::OneSided => (n >= 8).then(|| one_sided_error(n)),
            Family::CircleCircle { radius } => (n >= 1).then(|| circle_error(radius, n)),
            Family::Diameter => match n {
                0 => None,
                1 => Some(4.0 / 3.0),
                _ => Some(1.0 / 3.0),
            },
            Family::Chord => match n {
                1 => Some(0.5),
                2 => Some(0.5 * (3.0 - 7f64.sqrt())),
                _ => None,
            },
        }
    }

    /// Optimal codebook of at most `n` points and its error.
    pub fn closed_form(&self, n: usize) -> Result<ClosedForm> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let unsupported = |hint: &str| Error::Unsupported {
            family: self.id().to_string(),
            n,
            hint: hint.to_string(),
        };
        let constraint = self.constraint();
        let (params, value): (Vec<f64>, f64) = match *self {
            Family::SegmentLine(f) => {
                if !f.interior_ok() {
                    let t = f.threshold();
                    return Err(unsupported(&format!(
                        "window clips the free optimum (threshold N1={:?}, N2={:?}); use the numerical solver",
                        t.n1, t.n2
                    )));
                }
                if n < 2 {
                    return Err(unsupported("one-point case has no closed form here; use the numerical solver"));
                }
                let params = f.free_abscissae(n).into_iter().map(|x| f.param_of(x)).collect();
                (params, f.free_error(n))
            }
            Family::Clamped => {
                // x = 1/2 + t on [1/2, 3/2]
                let params = match n {
                    1 => vec![0.5],
                    2 => vec![0.0, 1.0],
                    _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
                };
                let value = if n == 1 { 4.0 / 3.0 } else { clamped_error(n) };
                (params, value)
            }
            Family::OneSided => {
                let nf = n as f64;
                let xs: Vec<f64> = if n <= 7 {
                    (1..=n).map(|i| (2 * i - 1) as f64 / nf).collect()
                } else {
                    (1..=n)
                        .map(|i| {
                            if i == n {
                                ONE_SIDED_END
                            } else {
                                28.0 * (2 * i - 1) as f64 / (15.0 * (2.0 * nf - 1.0))
                            }
                        })
                        .collect()
                };
                let value = if n <= 7 {
                    1.0 + 1.0 / (3.0 * nf * nf)
                } else {
                    one_sided_error(n)
                };
                (xs.into_iter().map(|x| x / ONE_SIDED_END).collect(), value)
            }
            Family::CircleCircle { radius } => {
                let params = match n {
                    1 => vec![0.0],
                    2 => vec![0.0, PI],
                    _ => (1..=n).map(|i| (2 * i - 1) as f64 * PI / n as f64).collect(),
                };
                (params, circle_error(radius, n))
            }
            Family::Diameter => match n {
                1 => (vec![FRAC_PI_2], 4.0 / 3.0),
                _ => (vec![0.0, PI], 1.0 / 3.0),
            },
            Family::Chord => match n {
                1 => (vec![1.5 * PI], 0.5),
                2 => {
                    let off = chord_pair_offset();
                    (vec![TAU - off, PI + off], 0.5 * (3.0 - 7f64.sqrt()))
                }
                _ => return Err(unsupported("no closed form for n ≥ 3; use the numerical solver")),
            },
        };
        Ok(ClosedForm {
            family: self.id(),
            n,
            codebook: Codebook::new(constraint, params)?,
            value,
            stated_value: self.stated_error(n),
        })
    }
}

fn unit_circle() -> Curve {
    Curve::circle(Point::new(0.0, 0.0), 1.0).expect("unit circle")
}

fn clamped_error(n: usize) -> f64 {
    let nf = n as f64;
    (25.0 * nf * nf - 50.0 * nf + 26.0) / (24.0 * (nf - 1.0).powi(2))
}

fn one_sided_error(n: usize) -> f64 {
    let nf = n as f64;
    7.0 * (5788.0 * (nf - 1.0) * nf + 3015.0) / (10125.0 * (1.0 - 2.0 * nf).powi(2))
}

fn circle_error(radius: f64, n: usize) -> f64 {
    let nf = n as f64;
    radius * radius + 1.0 - (2.0 * radius * nf / PI) * (PI / nf).sin()
}

/// Mean squared distance from the chord `y = −1/2` to the unit circle along
/// radii: `E[(1 − r)²]` with `r = √(x² + 1/4)`.
fn chord_limit() -> f64 {
    let h = chord_half_width();
    // ∫(1 − r)² dx = ∫ (1 + x² + 1/4) dx − 2∫ √(x² + 1/4) dx over [−h, h].
    let sq = 2.0 * (1.25 * h + h * h * h / 3.0);
    let root_integral = |x: f64| 0.5 * (x * (x * x + 0.25).sqrt() + 0.25 * (x + (x * x + 0.25).sqrt()).ln());
    let rt = root_integral(h) - root_integral(-h);
    (sq - 2.0 * rt) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::{build_partition, distortion_value};

    fn cor32() -> SegmentLineFamily {
        SegmentLineFamily::new(0.0, 2.0, 3f64.sqrt(), 0.0, 0.0, 2.0).unwrap()
    }

    #[test]
    fn sqrt3_line_codebook() {
        let f = cor32();
        assert!(f.interior_ok());
        let cf = Family::SegmentLine(f).closed_form(2).unwrap();
        let pts = cf.codebook.points();
        let s3 = 3f64.sqrt();
        assert!((pts[0].x - 0.125).abs() < 1e-15 && (pts[0].y - s3 / 8.0).abs() < 1e-15);
        assert!((pts[1].x - 0.375).abs() < 1e-15 && (pts[1].y - 3.0 * s3 / 8.0).abs() < 1e-15);
        for n in 2..40 {
            let xs = f.free_abscissae(n);
            for (i, x) in xs.iter().enumerate() {
                assert!((x - (2 * i + 1) as f64 / (4 * n) as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn line_error_forms_agree_in_integers() {
        for n in 2i128..=1000 {
            // (144n²+196n−576)/(48n³) vs (36n²+49n−144)/(12n³), cross-multiplied
            let lhs = (144 * n * n + 196 * n - 576) * (12 * n * n * n);
            let rhs = (36 * n * n + 49 * n - 144) * (48 * n * n * n);
            assert_eq!(lhs, rhs);
        }
        let f = cor32();
        for n in 2..30 {
            let nf = n as f64;
            let want = (36.0 * nf * nf + 49.0 * nf - 144.0) / (12.0 * nf.powi(3));
            assert!((f.stated_error(n) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn stated_polynomial_matches_only_low_n_when_sloped() {
        let f = cor32();
        let fam = Family::SegmentLine(f);
        for n in [2, 3] {
            let cf = fam.closed_form(n).unwrap();
            assert!((cf.value - cf.stated_value.unwrap()).abs() < 1e-14);
        }
        let cf = fam.closed_form(4).unwrap();
        // Below the perpendicular-distance bound of 1.
        assert!(cf.stated_value.unwrap() < 1.0);
        assert!((cf.value - (1.0 + 1.0 / 192.0)).abs() < 1e-15);
    }

    #[test]
    fn horizontal_line_reduces_to_uniform_quantizer() {
        let (a, b) = (-0.5, 2.5);
        let f = SegmentLineFamily::new(a, b, 0.0, 0.0, a, b).unwrap();
        for n in 1..20 {
            let nf = n as f64;
            for (i, x) in f.free_abscissae(n).iter().enumerate() {
                assert!((x - (a + (2 * i + 1) as f64 * (b - a) / (2.0 * nf))).abs() < 1e-14);
            }
            let want = (a - b) * (a - b) / (12.0 * nf * nf);
            assert!((f.stated_error(n) - want).abs() < 1e-15);
            assert!((f.free_error(n) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn threshold_examples() {
        let clamped = SegmentLineFamily::new(0.0, 2.0, 0.0, 1.0, 0.5, 1.5).unwrap();
        let t = clamped.threshold();
        assert_eq!((t.n1, t.n2, t.n), (Some(1), Some(1), Some(1)));

        let one_sided = SegmentLineFamily::new(0.0, 2.0, 0.0, 1.0, 0.0, 28.0 / 15.0).unwrap();
        let t = one_sided.threshold();
        assert_eq!((t.n1, t.n2, t.n), (None, Some(7), Some(7)));

        let t = cor32().threshold();
        assert_eq!((t.n1, t.n2, t.n), (None, None, None));
    }

    #[test]
    fn threshold_on_sloped_line() {
        // m = 1, c = 0 on [0, 2]: base 0, free aᵢ = (2i−1)/(2n).
        let f = SegmentLineFamily::new(0.0, 2.0, 1.0, 0.0, 0.2, 0.8).unwrap();
        let t = f.threshold();
        // d < 1/(2N) ⇔ N < 2.5; (2N−1)/(2N) < 0.8 ⇔ N < 2.5
        assert_eq!((t.n1, t.n2, t.n), (Some(2), Some(2), Some(2)));
        assert!(!f.interior_ok());
        assert!(matches!(
            Family::SegmentLine(f).closed_form(3),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn clamped_examples() {
        let cf = Family::Clamped.closed_form(2).unwrap();
        let xs: Vec<f64> = cf.codebook.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.5, 1.5]);
        let cf = Family::Clamped.closed_form(3).unwrap();
        let xs: Vec<f64> = cf.codebook.points().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.5, 1.0, 1.5]);
        assert!((cf.value - 101.0 / 96.0).abs() < 1e-15);
        assert!((clamped_error(1_000_000) - 25.0 / 24.0).abs() < 1e-12);
        let cf = Family::Clamped.closed_form(1).unwrap();
        assert_eq!(cf.codebook.points()[0], Point::new(1.0, 1.0));
    }

    #[test]
    fn one_sided_examples() {
        let cf = Family::OneSided.closed_form(1).unwrap();
        assert!((cf.codebook.points()[0].x - 1.0).abs() < 1e-15);
        let cf = Family::OneSided.closed_form(8).unwrap();
        let pts = cf.codebook.points();
        assert!((pts[7].x - 28.0 / 15.0).abs() < 1e-15);
        assert!((pts[0].x - 28.0 / 225.0).abs() < 1e-15);
        assert!((one_sided_error(10_000_000) - 10129.0 / 10125.0).abs() < 1e-12);
    }

    #[test]
    fn circle_examples() {
        let a = 0.8;
        let fam = Family::circle_circle(a).unwrap();
        let v2 = fam.closed_form(2).unwrap().value;
        assert!((v2 - (1.0 + a * a - 4.0 * a / PI)).abs() < 1e-15);
        let v3 = Family::circle_circle(1.0).unwrap().closed_form(3).unwrap().value;
        assert!((v3 - (2.0 - 3.0 * 3f64.sqrt() / PI)).abs() < 1e-15);

        let m = fam.measure();
        for k in 0..16 {
            let theta = k as f64 * TAU / 16.0;
            let cb = Codebook::new(fam.constraint(), vec![theta]).unwrap();
            assert!((distortion_value(&m, &cb) - (1.0 + a * a)).abs() < 1e-13);
        }
    }

    #[test]
    fn diameter_examples() {
        let cf = Family::Diameter.closed_form(1).unwrap();
        assert!((cf.value - 4.0 / 3.0).abs() < 1e-15);
        for n in [2, 7] {
            let cf = Family::Diameter.closed_form(n).unwrap();
            assert_eq!(cf.codebook.len(), 2);
            let p = build_partition(&Family::Diameter.measure(), &cf.codebook);
            assert_eq!(p.effective_count(), 2);
            assert!((cf.value - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn chord_examples() {
        let cf = Family::Chord.closed_form(1).unwrap();
        let p = cf.codebook.points()[0];
        assert!(p.x.abs() < 1e-15 && (p.y + 1.0).abs() < 1e-15);
        let cf = Family::Chord.closed_form(2).unwrap();
        assert!((cf.value - 0.177_124).abs() < 1e-6);
        let pts = cf.codebook.points();
        let left = if pts[0].x < pts[1].x { pts[0] } else { pts[1] };
        assert!((left.x + 0.654_654).abs() < 1e-6 && (left.y + 0.755_929).abs() < 1e-6);
        assert!((pts[0].mirror_y() - pts[1]).norm() < 1e-12);
        assert!(matches!(Family::Chord.closed_form(5), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn chord_limit_by_quadrature() {
        let h = chord_half_width();
        let q = crate::quadrature::integrate(|x: f64| (1.0 - (x * x + 0.25).sqrt()).powi(2), -h, h, 1e-15) / (2.0 * h);
        assert!((chord_limit() - q).abs() < 1e-14);
    }

    #[test]
    fn family_ids_round_trip() {
        for id in FamilyId::ALL {
            assert_eq!(id.as_str().parse::<FamilyId>().unwrap(), id);
        }
        assert!("ellipse".parse::<FamilyId>().is_err());
    }
}
