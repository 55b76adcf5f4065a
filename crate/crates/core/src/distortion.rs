//! Voronoi partitions of a one-dimensional support and the squared-error
//! distortion `V(P; α) = ∫ min_{a∈α} ‖x − a‖² dP(x)`.
//!
//! Cells are found by sweeping the support parameter: starting from the
//! nearest codebook point at `t_lo`, the next breakpoint is the first root of
//! a canonical equation `ρ(p, e) − ρ(q, e) = 0` at which another point
//! becomes strictly nearer. For a segment support those equations are linear
//! in the parameter; for an arc they are `A + |v| cos(t − φ) = 0`.
//!
//! Cell contributions are integrated in closed form from the cell's mass,
//! centroid and spread, so no quadrature is involved.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{Curve, Point, UniformMeasure};
use crate::quadrature;

/// Distortion order. Everything in this crate is squared Euclidean error.
pub const ORDER: u32 = 2;

/// Codebook points closer than this (plane distance) are merged before
/// partitioning.
pub const MERGE_TOL: f64 = 1e-9;

pub fn squared_distance(p: Point, q: Point) -> f64 {
    (p - q).norm_sq()
}

/// Candidate points on a constraint curve, kept sorted by parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    constraint: Curve,
    params: Vec<f64>,
    points: Vec<Point>,
}

impl Codebook {
    pub fn new(constraint: Curve, mut params: Vec<f64>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::Domain("codebook must hold at least one point".into()));
        }
        params.sort_by(f64::total_cmp);
        let points = params
            .iter()
            .map(|&t| constraint.point_at(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            constraint,
            params,
            points,
        })
    }

    /// Codebook in the given order without range checks. Arc parameters
    /// outside the range are evaluated periodically.
    pub(crate) fn from_raw(constraint: Curve, params: Vec<f64>) -> Self {
        let points = params.iter().map(|&t| constraint.eval(t)).collect();
        Self {
            constraint,
            params,
            points,
        }
    }

    pub fn constraint(&self) -> &Curve {
        &self.constraint
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// A codebook holding the subset `keep` of the current points.
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        Self::new(self.constraint, keep.iter().map(|&i| self.params[i]).collect())
    }
}

/// One support interval and the codebook index that owns it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub from: f64,
    pub to: f64,
    pub owner: usize,
}

/// Voronoi decomposition of the support parameter interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    cells: Vec<Cell>,
    effective_count: usize,
}

impl Partition {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// `b₀ = t_lo < b₁ < … < b_m = t_hi`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.cells.iter().map(|c| c.from).collect();
        if let Some(last) = self.cells.last() {
            b.push(last.to);
        }
        b
    }

    /// Number of codebook indices owning a cell of positive measure.
    pub fn effective_count(&self) -> usize {
        self.effective_count
    }

    /// Codebook indices that own at least one cell, ascending.
    pub fn owners(&self) -> Vec<usize> {
        let mut o: Vec<usize> = self.cells.iter().map(|c| c.owner).collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    /// Interior breakpoints separating two different owners, as
    /// `(parameter, left owner, right owner)`.
    pub fn boundaries(&self) -> Vec<(f64, usize, usize)> {
        self.cells
            .windows(2)
            .filter(|w| w[0].owner != w[1].owner)
            .map(|w| (w[0].to, w[0].owner, w[1].owner))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub from: f64,
    pub to: f64,
    pub owner: usize,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub value: f64,
    #[serde(rename = "effective_n")]
    pub effective_count: usize,
    pub cells: Vec<CellReport>,
}

/// Precomputed description of the support used by the sweep and the
/// moment formulas.
#[derive(Debug, Clone, Copy)]
enum Support {
    /// `s(u) = origin + u·dir`, `u ∈ [0, 1]`.
    Segment { origin: Point, dir: Point },
    /// `s(t) = center + radius·(cos t, sin t)`, `t ∈ [lo, hi]`.
    Arc {
        center: Point,
        radius: f64,
        lo: f64,
        hi: f64,
    },
}

impl Support {
    fn new(curve: &Curve) -> Self {
        match *curve {
            Curve::Segment { from, to } => Support::Segment {
                origin: from,
                dir: to - from,
            },
            Curve::CircleArc {
                center,
                radius,
                from_angle,
                to_angle,
            } => Support::Arc {
                center,
                radius,
                lo: from_angle,
                hi: to_angle,
            },
        }
    }

    fn range(&self) -> (f64, f64) {
        match *self {
            Support::Segment { .. } => (0.0, 1.0),
            Support::Arc { lo, hi, .. } => (lo, hi),
        }
    }

    fn at(&self, u: f64) -> Point {
        match *self {
            Support::Segment { origin, dir } => origin + u * dir,
            Support::Arc { center, radius, .. } => center + radius * Point::unit(u),
        }
    }

    /// Mass, centroid and mean squared spread about the centroid of the
    /// support piece `[u1, u2]`, for parameter density `density`.
    fn moments(&self, u1: f64, u2: f64, density: f64) -> (f64, Point, f64) {
        let w = u2 - u1;
        let mass = w * density;
        match *self {
            Support::Segment { origin, dir } => {
                let centroid = origin + (0.5 * (u1 + u2)) * dir;
                (mass, centroid, dir.norm_sq() * w * w / 12.0)
            }
            Support::Arc { center, radius, .. } => {
                let half = 0.5 * w;
                let mid = 0.5 * (u1 + u2);
                let centroid = center + (radius * sinc(half)) * Point::unit(mid);
                (mass, centroid, radius * radius * one_minus_sinc_sq(half))
            }
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `1 − (sin x / x)²` without cancellation for small `x`.
fn one_minus_sinc_sq(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        // x²/3 − 2x⁴/45 + x⁶/315 − 2x⁸/14175
        x2 * (1.0 / 3.0 - x2 * (2.0 / 45.0 - x2 * (1.0 / 315.0 - x2 * 2.0 / 14175.0)))
    } else {
        let s = x.sin() / x;
        1.0 - s * s
    }
}

/// Each unique codebook point scored as `h(u) = |q|² − 2 q·s(u)`, which
/// differs from `ρ(s(u), q)` by the point-independent `|s(u)|²`.
struct Scores<'a> {
    support: Support,
    points: &'a [Point],
    /// Indices of unique points (lowest index of each merged group).
    unique: Vec<usize>,
}

impl<'a> Scores<'a> {
    fn new(support: Support, points: &'a [Point]) -> Self {
        let mut unique: Vec<usize> = Vec::with_capacity(points.len());
        for (i, &p) in points.iter().enumerate() {
            if !unique.iter().any(|&k| (points[k] - p).norm() <= MERGE_TOL) {
                unique.push(i);
            }
        }
        Self {
            support,
            points,
            unique,
        }
    }

    fn value(&self, i: usize, u: f64) -> f64 {
        let q = self.points[i];
        q.norm_sq() - 2.0 * q.dot(self.support.at(u))
    }

    fn slope(&self, i: usize, u: f64) -> f64 {
        let q = self.points[i];
        let ds = match self.support {
            Support::Segment { dir, .. } => dir,
            Support::Arc { radius, .. } => {
                let (s, c) = u.sin_cos();
                Point::new(-radius * s, radius * c)
            }
        };
        -2.0 * q.dot(ds)
    }

    /// Nearest unique point just to the right of `u`: smallest value, then
    /// smallest slope, then lowest index.
    fn best_at(&self, u: f64) -> usize {
        let vals: Vec<f64> = self.unique.iter().map(|&i| self.value(i, u)).collect();
        let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = 1.0 + vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        let mut best: Option<(usize, f64)> = None;
        for (k, &i) in self.unique.iter().enumerate() {
            if vals[k] > vmin + tol {
                continue;
            }
            let s = self.slope(i, u);
            match best {
                Some((_, bs)) if s >= bs - tol => {}
                _ => best = Some((i, s)),
            }
        }
        best.map(|(i, _)| i).unwrap_or(self.unique[0])
    }

    /// First parameter strictly after `after` where `j` becomes strictly
    /// nearer than `i`.
    fn crossing(&self, i: usize, j: usize, after: f64) -> Option<f64> {
        let (p, q) = (self.points[i], self.points[j]);
        // h_j − h_i = |q|² − |p|² − 2 (q − p)·s(u)
        let dq = q - p;
        let base = q.norm_sq() - p.norm_sq();
        match self.support {
            Support::Segment { origin, dir } => {
                let a = base - 2.0 * dq.dot(origin);
                let b = -2.0 * dq.dot(dir);
                if b >= 0.0 {
                    return None;
                }
                let r = -a / b;
                (r > after).then_some(r)
            }
            Support::Arc { center, radius, .. } => {
                // a + v·(cos t, sin t), v = −2R(q − p)
                let a = base - 2.0 * dq.dot(center);
                let v = (-2.0 * radius) * dq;
                let amp = v.norm();
                if amp == 0.0 || a.abs() >= amp {
                    return None;
                }
                let phi = v.y.atan2(v.x);
                // downward crossing: t − φ = acos(−a/|v|) ∈ (0, π)
                let root = phi + (-a / amp).acos();
                let mut step = (root - after).rem_euclid(TAU);
                if step == 0.0 || step >= TAU {
                    step = TAU;
                }
                Some(after + step)
            }
        }
    }

    fn sweep(&self) -> Vec<Cell> {
        let (lo, hi) = self.support.range();
        let mut cells = Vec::new();
        let mut owner = self.best_at(lo);
        let mut cur = lo;
        // Each unique point can own at most two arcs of a circle.
        let guard = 4 * self.unique.len() + 8;
        for _ in 0..guard {
            let next = self
                .unique
                .iter()
                .filter(|&&j| j != owner)
                .filter_map(|&j| self.crossing(owner, j, cur))
                .fold(f64::INFINITY, f64::min);
            if next >= hi {
                push_cell(&mut cells, cur, hi, owner);
                return cells;
            }
            push_cell(&mut cells, cur, next, owner);
            owner = self.best_at(next);
            cur = next;
        }
        push_cell(&mut cells, cur, hi, owner);
        cells
    }
}

fn push_cell(cells: &mut Vec<Cell>, from: f64, to: f64, owner: usize) {
    if to <= from {
        return;
    }
    if let Some(last) = cells.last_mut() {
        if last.owner == owner {
            last.to = to;
            return;
        }
    }
    cells.push(Cell { from, to, owner });
}

/// Nearest-neighbour partition of the support induced by `codebook`.
///
/// Coincident points (within [`MERGE_TOL`]) are merged onto the lowest
/// index; points whose Voronoi region misses the support own no cell.
pub fn build_partition(measure: &UniformMeasure, codebook: &Codebook) -> Partition {
    let scores = Scores::new(Support::new(measure.support()), codebook.points());
    let cells = scores.sweep();
    let mut owners: Vec<usize> = cells.iter().map(|c| c.owner).collect();
    owners.sort_unstable();
    owners.dedup();
    Partition {
        effective_count: owners.len(),
        cells,
    }
}

/// Per-cell moments, reused by the distortion value and its gradient.
struct CellMoments {
    cell: Cell,
    mass: f64,
    centroid: Point,
    spread: f64,
}

fn cell_moments(measure: &UniformMeasure, partition: &Partition) -> Vec<CellMoments> {
    let support = Support::new(measure.support());
    let density = measure.param_density();
    partition
        .cells
        .iter()
        .map(|&cell| {
            let (mass, centroid, spread) = support.moments(cell.from, cell.to, density);
            CellMoments {
                cell,
                mass,
                centroid,
                spread,
            }
        })
        .collect()
}

/// Distortion of `codebook` for `measure`, with its per-cell breakdown.
pub fn distortion(measure: &UniformMeasure, codebook: &Codebook) -> DistortionReport {
    let partition = build_partition(measure, codebook);
    distortion_with_partition(measure, codebook, &partition)
}

pub fn distortion_with_partition(
    measure: &UniformMeasure,
    codebook: &Codebook,
    partition: &Partition,
) -> DistortionReport {
    let points = codebook.points();
    let cells: Vec<CellReport> = cell_moments(measure, partition)
        .into_iter()
        .map(|m| CellReport {
            from: m.cell.from,
            to: m.cell.to,
            owner: m.cell.owner,
            contribution: m.mass * ((points[m.cell.owner] - m.centroid).norm_sq() + m.spread),
        })
        .collect();
    DistortionReport {
        value: cells.iter().map(|c| c.contribution).sum(),
        effective_count: partition.effective_count,
        cells,
    }
}

/// Distortion value only.
pub fn distortion_value(measure: &UniformMeasure, codebook: &Codebook) -> f64 {
    distortion(measure, codebook).value
}

/// Gradient of the distortion with respect to the codebook parameters.
///
/// Breakpoints are equidistant from both neighbours, so their motion does not
/// contribute (envelope theorem): `∂V/∂tᵢ = 2 Σ_cells mass·(qᵢ − centroid)·qᵢ'(tᵢ)`.
/// Points owning no cell get a zero component.
pub fn gradient(measure: &UniformMeasure, codebook: &Codebook, partition: &Partition) -> Vec<f64> {
    let points = codebook.points();
    let mut grad = vec![0.0; codebook.len()];
    for m in cell_moments(measure, partition) {
        let i = m.cell.owner;
        let tangent = codebook.constraint().tangent(codebook.params()[i]);
        grad[i] += 2.0 * m.mass * (points[i] - m.centroid).dot(tangent);
    }
    grad
}

/// Mass owned by each codebook index.
pub fn masses(measure: &UniformMeasure, partition: &Partition, n: usize) -> Vec<f64> {
    let density = measure.param_density();
    let mut out = vec![0.0; n];
    for c in &partition.cells {
        out[c.owner] += (c.to - c.from) * density;
    }
    out
}

/// Distortion by adaptive quadrature of `min ρ` over each cell; used to
/// cross-check the closed-form cell integrals.
pub fn distortion_by_quadrature(measure: &UniformMeasure, codebook: &Codebook, tol: f64) -> f64 {
    let partition = build_partition(measure, codebook);
    let support = measure.support();
    let points = codebook.points();
    let density = measure.param_density();
    partition
        .cells
        .iter()
        .map(|c| {
            let q = points[c.owner];
            density * quadrature::integrate(|u| squared_distance(support.eval(u), q), c.from, c.to, tol)
        })
        .sum()
}
