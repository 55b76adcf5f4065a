#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use cquant::{Codebook, Curve, Point, SegmentLineFamily};
use proptest::prelude::*;

pub fn point(range: f64) -> impl Strategy<Value = Point> {
    (-range..range, -range..range).prop_map(|(x, y)| Point::new(x, y))
}

pub fn segment() -> impl Strategy<Value = Curve> {
    (point(2.0), 0.1..3.0f64, -PI..PI).prop_map(|(p, len, dir)| Curve::segment(p, p + len * Point::unit(dir)).unwrap())
}

pub fn arc() -> impl Strategy<Value = Curve> {
    (point(1.0), 0.3..2.0f64, -PI..PI, 0.3..TAU)
        .prop_map(|(c, r, from, span)| Curve::circle_arc(c, r, from, from + span).unwrap())
}

pub fn circle() -> impl Strategy<Value = Curve> {
    (point(1.0), 0.3..2.0f64).prop_map(|(c, r)| Curve::circle(c, r).unwrap())
}

pub fn curve() -> impl Strategy<Value = Curve> {
    prop_oneof![segment(), arc(), circle()]
}

/// Sorted unit fractions, mapped onto a curve's parameter range.
pub fn codebook_on(constraint: Curve, max_n: usize) -> impl Strategy<Value = Codebook> {
    prop::collection::vec(0.0..1.0f64, 1..=max_n).prop_map(move |fr| {
        let (lo, hi) = constraint.param_range();
        Codebook::new(constraint, fr.into_iter().map(|f| lo + f * (hi - lo)).collect()).unwrap()
    })
}

pub fn instance(max_n: usize) -> impl Strategy<Value = (Curve, Codebook)> {
    (curve(), curve()).prop_flat_map(move |(support, constraint)| (Just(support), codebook_on(constraint, max_n)))
}

/// Segment-line instance whose window contains the free optimum.
pub fn admissible_segment_line() -> impl Strategy<Value = SegmentLineFamily> {
    (-1.0..1.0f64, 0.5..3.0f64, -2.0..2.0f64, -1.0..1.0f64, 0.0..0.5f64, 0.0..0.5f64).prop_map(
        |(a, len, m, c, dl, dr)| {
            let b = a + len;
            let k = 1.0 + m * m;
            let d = (a - m * c) / k - dl;
            let e = (b - m * c) / k + dr;
            SegmentLineFamily::new(a, b, m, c, d, e).unwrap()
        },
    )
}
