//! Multi-start numerical search for optimal constrained codebooks.
//!
//! Codebooks are parametrized by their constraint parameters, so the
//! constraint holds by construction and the problem becomes box constrained
//! (or periodic, for a full circle). Each start runs damped Newton descent:
//! coordinate sweeps first, then projected full Newton steps on the free
//! coordinates once those take full steps. Gradients come from the envelope
//! formula in [`distortion::gradient`]; curvatures are central differences of
//! that gradient.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distortion::{self, build_partition, Codebook, Partition};
use crate::error::{Error, Result};
use crate::geometry::{wrap_into, Curve, Point, UniformMeasure};

pub use crate::geometry::Window;

/// Seed used when neither the config nor the environment provides one.
pub const DEFAULT_SEED: u64 = 20_230_417;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of multi-start seeds.
    pub starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// A start stops once an iteration lowers the objective by less than this.
    pub tolerance: f64,
    /// Finite-difference step in parameter units.
    pub fd_step: f64,
    /// Parameters closer than this are merged in the result.
    pub merge_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            max_iters: 500,
            tolerance: 1e-12,
            fd_step: 1e-6,
            merge_tol: 1e-7,
            seed: DEFAULT_SEED,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::Domain("starts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("fd_step", self.fd_step),
            ("merge_tol", self.merge_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Best codebook found for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub n: usize,
    /// Merged codebook: only points owning positive mass are kept.
    pub codebook: Codebook,
    pub value: f64,
    pub effective_n: usize,
    pub starts_converged: usize,
    /// Final objective of every start, in start order.
    pub start_values: Vec<f64>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SolveResultJson {
    n: usize,
    effective_n: usize,
    params: Vec<f64>,
    points: Vec<Point>,
    value: f64,
    seed: u64,
    starts_converged: usize,
    start_values: Vec<f64>,
}

impl Serialize for SolveResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SolveResultJson {
            n: self.n,
            effective_n: self.effective_n,
            params: self.codebook.params().to_vec(),
            points: self.codebook.points().to_vec(),
            value: self.value,
            seed: self.seed,
            starts_converged: self.starts_converged,
            start_values: self.start_values.clone(),
        }
        .serialize(s)
    }
}

/// Objective over raw (unsorted) parameter vectors.
struct Problem<'a> {
    measure: &'a UniformMeasure,
    constraint: Curve,
    window: Window,
    periodic: bool,
}

impl<'a> Problem<'a> {
    fn new(measure: &'a UniformMeasure, constraint: &Curve, window: Window) -> Result<Self> {
        let (lo, hi) = constraint.param_range();
        if window.lo.is_nan() || window.hi.is_nan() || window.lo >= window.hi {
            return Err(Error::Domain(format!("empty window [{}, {}]", window.lo, window.hi)));
        }
        if window.lo < lo - 1e-12 || window.hi > hi + 1e-12 {
            return Err(Error::Domain(format!(
                "window [{}, {}] leaves the constraint range [{lo}, {hi}]",
                window.lo, window.hi
            )));
        }
        Ok(Self {
            measure,
            constraint: *constraint,
            window,
            periodic: constraint.is_periodic_window(window),
        })
    }

    fn project(&self, t: f64) -> f64 {
        if self.periodic {
            wrap_into(t, self.window.lo)
        } else {
            t.clamp(self.window.lo, self.window.hi)
        }
    }

    fn codebook(&self, params: &[f64]) -> Codebook {
        Codebook::from_raw(self.constraint, params.to_vec())
    }

    fn eval(&self, params: &[f64]) -> (f64, Partition) {
        let cb = self.codebook(params);
        let part = build_partition(self.measure, &cb);
        let value = distortion::distortion_with_partition(self.measure, &cb, &part).value;
        (value, part)
    }

    fn value(&self, params: &[f64]) -> f64 {
        self.eval(params).0
    }

    fn gradient(&self, params: &[f64]) -> (Vec<f64>, Partition) {
        let cb = self.codebook(params);
        let part = build_partition(self.measure, &cb);
        (distortion::gradient(self.measure, &cb, &part), part)
    }

    fn at_lower(&self, t: f64) -> bool {
        !self.periodic && t <= self.window.lo + 1e-12
    }

    fn at_upper(&self, t: f64) -> bool {
        !self.periodic && t >= self.window.hi - 1e-12
    }

    /// Support point in the middle of the heaviest cell, mapped to the
    /// nearest admissible constraint parameter.
    fn largest_cell_param(&self, part: &Partition) -> f64 {
        let cell = part
            .cells()
            .iter()
            .max_by(|a, b| (a.to - a.from).total_cmp(&(b.to - b.from)))
            .expect("partition has at least one cell");
        let mid = self.measure.support().eval(0.5 * (cell.from + cell.to));
        self.constraint.nearest_param(mid, self.window)
    }

    /// Start whose points project onto the equal-mass quantiles of the support.
    fn equal_mass_start(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.measure.support().param_range();
        (0..n)
            .map(|i| {
                let u = lo + (2 * i + 1) as f64 / (2 * n) as f64 * (hi - lo);
                let s = self.measure.support().eval(u);
                self.constraint.nearest_param(s, self.window)
            })
            .collect()
    }

    fn stratified_start(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let w = self.window.width();
        (0..n)
            .map(|i| {
                let u: f64 = rng.random();
                self.project(self.window.lo + (i as f64 + u) / n as f64 * w)
            })
            .collect()
    }
}

/// Outcome of one local descent.
struct LocalRun {
    params: Vec<f64>,
    value: f64,
    converged: bool,
}

fn local_descent(problem: &Problem<'_>, mut x: Vec<f64>, config: &SolverConfig) -> LocalRun {
    let n = x.len();
    let h = config.fd_step;
    let mut revivals = vec![0u8; n];
    let (mut fx, mut part) = problem.eval(&x);
    let mut newton_full_step = false;

    for _ in 0..config.max_iters {
        let f_start = fx;

        // Points that lost all support mass are moved to the heaviest cell.
        let masses = distortion::masses(problem.measure, &part, n);
        for i in 0..n {
            if masses[i] == 0.0 && revivals[i] < 2 {
                revivals[i] += 1;
                x[i] = problem.largest_cell_param(&part);
                (fx, part) = problem.eval(&x);
            }
        }

        if !newton_full_step {
            coordinate_sweep(problem, &mut x, &mut fx, h);
            x.sort_by(f64::total_cmp);
        }
        newton_full_step = newton_step(problem, &mut x, &mut fx, h);
        part = problem.eval(&x).1;

        if f_start - fx < config.tolerance {
            return LocalRun {
                params: x,
                value: fx,
                converged: true,
            };
        }
    }
    LocalRun {
        params: x,
        value: fx,
        converged: false,
    }
}

/// One Gauss–Seidel pass of damped one-dimensional Newton steps.
fn coordinate_sweep(problem: &Problem<'_>, x: &mut [f64], fx: &mut f64, h: f64) {
    let n = x.len();
    let fallback_step = 0.25 * problem.window.width() / n as f64;
    for i in 0..n {
        let (g, _) = problem.gradient(x);
        let gi = g[i];
        if gi == 0.0 {
            continue;
        }
        let orig = x[i];
        x[i] = orig + h;
        let gp = problem.gradient(x).0[i];
        x[i] = orig - h;
        let gm = problem.gradient(x).0[i];
        x[i] = orig;
        let curvature = (gp - gm) / (2.0 * h);
        let step = if curvature > 0.0 {
            -gi / curvature
        } else {
            -gi.signum() * fallback_step
        };
        let mut alpha = 1.0;
        for _ in 0..30 {
            let cand = problem.project(orig + alpha * step);
            x[i] = cand;
            let f = problem.value(x);
            if f < *fx {
                *fx = f;
                break;
            }
            x[i] = orig;
            alpha *= 0.5;
        }
    }
}

/// Projected Newton step on the free coordinates with Levenberg damping and
/// backtracking. Returns true when the undamped full step was accepted.
fn newton_step(problem: &Problem<'_>, x: &mut [f64], fx: &mut f64, h: f64) -> bool {
    let n = x.len();
    let (g, part) = problem.gradient(x);
    let masses = distortion::masses(problem.measure, &part, n);
    let free: Vec<usize> = (0..n)
        .filter(|&i| masses[i] > 0.0)
        .filter(|&i| !(problem.at_lower(x[i]) && g[i] > 0.0) && !(problem.at_upper(x[i]) && g[i] < 0.0))
        .collect();
    if free.is_empty() {
        return false;
    }
    let k = free.len();
    let mut hess = DMatrix::<f64>::zeros(k, k);
    let mut xs = x.to_vec();
    for (col, &j) in free.iter().enumerate() {
        let orig = xs[j];
        xs[j] = orig + h;
        let gp = problem.gradient(&xs).0;
        xs[j] = orig - h;
        let gm = problem.gradient(&xs).0;
        xs[j] = orig;
        for (row, &i) in free.iter().enumerate() {
            hess[(row, col)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let hess = 0.5 * (&hess + hess.transpose());
    let grad = DVector::from_iterator(k, free.iter().map(|&i| g[i]));
    let scale = (0..k).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(1e-12);

    let mut lambda = 0.0;
    for _ in 0..8 {
        let damped = &hess + DMatrix::<f64>::identity(k, k) * lambda;
        if let Some(chol) = damped.cholesky() {
            let step = -chol.solve(&grad);
            let mut alpha = 1.0;
            for _ in 0..20 {
                let mut cand = x.to_vec();
                for (row, &i) in free.iter().enumerate() {
                    cand[i] = problem.project(x[i] + alpha * step[row]);
                }
                let f = problem.value(&cand);
                if f < *fx {
                    x.copy_from_slice(&cand);
                    *fx = f;
                    return lambda == 0.0 && alpha == 1.0;
                }
                alpha *= 0.5;
            }
        }
        lambda = if lambda == 0.0 { 1e-8 * scale } else { lambda * 100.0 };
    }
    false
}

/// Sorts, merges near-equal parameters and drops points that own no mass.
fn finalize(problem: &Problem<'_>, mut params: Vec<f64>, merge_tol: f64) -> Result<(Codebook, f64, usize)> {
    params.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(params.len());
    for t in params {
        match merged.last() {
            Some(&last) if t - last <= merge_tol => {}
            _ => merged.push(t),
        }
    }
    if problem.periodic && merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if first + problem.window.width() - last <= merge_tol {
            merged.pop();
        }
    }
    let cb = Codebook::new(problem.constraint, merged)?;
    let part = build_partition(problem.measure, &cb);
    let keep = part.owners();
    let cb = if keep.len() < cb.len() { cb.select(&keep)? } else { cb };
    let report = distortion::distortion(problem.measure, &cb);
    Ok((cb, report.value, report.effective_count))
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn solve_with_starts(
    problem: &Problem<'_>,
    n: usize,
    config: &SolverConfig,
    extra: Vec<Vec<f64>>,
) -> Result<SolveResult> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    config.validate()?;
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(config.starts + extra.len());
    starts.push(problem.equal_mass_start(n));
    for s in 1..config.starts {
        starts.push(problem.stratified_start(n, &mut start_rng(config.seed, s)));
    }
    starts.extend(extra.into_iter().filter(|x| x.len() == n));

    let runs: Vec<LocalRun> = starts
        .into_par_iter()
        .map(|x0| local_descent(problem, x0, config))
        .collect();

    // Lowest value wins; ties go to the earliest start.
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let (codebook, value, effective_n) = finalize(problem, runs[best].params.clone(), config.merge_tol)?;
    Ok(SolveResult {
        n,
        codebook,
        value,
        effective_n,
        starts_converged: runs.iter().filter(|r| r.converged).count(),
        start_values: runs.iter().map(|r| r.value).collect(),
        seed: config.seed,
    })
}

/// Best codebook of at most `n` points on `constraint` restricted to `window`.
pub fn solve(
    measure: &UniformMeasure,
    constraint: &Curve,
    window: Window,
    n: usize,
    config: &SolverConfig,
) -> Result<SolveResult> {
    let problem = Problem::new(measure, constraint, window)?;
    solve_with_starts(&problem, n, config, Vec::new())
}

/// `n`-point warm start: the previous points plus copies placed in the
/// heaviest cells.
fn grow(problem: &Problem<'_>, prev: &Codebook, n: usize) -> Vec<f64> {
    let mut x = prev.params().to_vec();
    while x.len() < n {
        let part = problem.eval(&x).1;
        x.push(problem.largest_cell_param(&part));
    }
    x
}

/// Solves `n = 1, …, n_max`, warm-starting each size from the previous one.
///
/// The returned values are non-increasing: a violation triggers a re-solve
/// with doubled starts, and if that still loses to the smaller codebook the
/// smaller codebook is kept (it is admissible for every larger `n`).
pub fn solve_sequence(
    measure: &UniformMeasure,
    constraint: &Curve,
    window: Window,
    n_max: usize,
    config: &SolverConfig,
) -> Result<Vec<SolveResult>> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let problem = Problem::new(measure, constraint, window)?;
    let mut out: Vec<SolveResult> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let warm = out.last().map(|prev| vec![grow(&problem, &prev.codebook, n)]).unwrap_or_default();
        let mut res = solve_with_starts(&problem, n, config, warm.clone())?;
        if let Some(prev) = out.last() {
            if res.value > prev.value {
                let doubled = SolverConfig {
                    starts: config.starts * 2,
                    ..config.clone()
                };
                res = solve_with_starts(&problem, n, &doubled, warm)?;
                if res.value > prev.value {
                    res = SolveResult {
                        n,
                        codebook: prev.codebook.clone(),
                        value: prev.value,
                        effective_n: prev.effective_n,
                        ..res
                    };
                }
            }
        }
        out.push(res);
    }
    Ok(out)
}

/// Per-parameter first-order optimality diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stationarity {
    /// Finite-difference derivative per parameter: central in the interior,
    /// one-sided (pointing into the window) at an active bound.
    pub derivatives: Vec<f64>,
    /// Largest violation: `|D|` in the interior, the inward descent rate at
    /// a bound.
    pub max_violation: f64,
}

/// Stationarity of `codebook` over its whole constraint range.
pub fn stationarity_check(measure: &UniformMeasure, codebook: &Codebook) -> f64 {
    stationarity_in(measure, codebook, codebook.constraint().full_window(), 1e-6).max_violation
}

pub fn stationarity_in(measure: &UniformMeasure, codebook: &Codebook, window: Window, h: f64) -> Stationarity {
    let constraint = *codebook.constraint();
    let periodic = constraint.is_periodic_window(window);
    let base = codebook.params().to_vec();
    let value = |params: &[f64]| distortion::distortion_value(measure, &Codebook::from_raw(constraint, params.to_vec()));
    let f0 = value(&base);
    let mut derivatives = Vec::with_capacity(base.len());
    let mut max_violation: f64 = 0.0;
    for i in 0..base.len() {
        let t = base[i];
        let mut shifted = base.clone();
        let (d, violation) = if !periodic && t - window.lo < h {
            shifted[i] = t + h;
            let d = (value(&shifted) - f0) / h;
            (d, (-d).max(0.0))
        } else if !periodic && window.hi - t < h {
            shifted[i] = t - h;
            let d = (f0 - value(&shifted)) / h;
            (d, d.max(0.0))
        } else {
            shifted[i] = t + h;
            let up = value(&shifted);
            shifted[i] = t - h;
            let d = (up - value(&shifted)) / (2.0 * h);
            (d, d.abs())
        };
        derivatives.push(d);
        max_violation = max_violation.max(violation);
    }
    Stationarity {
        derivatives,
        max_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::Family;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            starts: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            fd_step: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn domain_errors() {
        let fam = Family::Clamped;
        let cfg = SolverConfig::default();
        let m = fam.measure();
        let c = fam.constraint();
        assert!(matches!(solve(&m, &c, fam.window(), 0, &cfg), Err(Error::Domain(_))));
        assert!(solve(&m, &c, Window::new(0.5, 0.5), 2, &cfg).is_err());
        assert!(solve(&m, &c, Window::new(-0.5, 0.5), 2, &cfg).is_err());
        assert!(solve_sequence(&m, &c, fam.window(), 0, &cfg).is_err());
    }

    #[test]
    fn sqrt3_line_four_points() {
        let s3 = 3f64.sqrt();
        let measure = UniformMeasure::new(Curve::segment(Point::new(0.0, 0.0), Point::new(2.0, 0.0)).unwrap());
        let line = Curve::segment(Point::new(0.0, 0.0), Point::new(2.0, 2.0 * s3)).unwrap();
        let res = solve(&measure, &line, line.full_window(), 4, &SolverConfig::default()).unwrap();
        assert_eq!(res.effective_n, 4);
        for (i, p) in res.codebook.points().iter().enumerate() {
            let x = (2 * i + 1) as f64 / 16.0;
            assert!((p.x - x).abs() < 1e-6 && (p.y - s3 * x).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn diameter_collapses_to_two() {
        let fam = Family::Diameter;
        let res = solve(&fam.measure(), &fam.constraint(), fam.window(), 5, &SolverConfig::default()).unwrap();
        assert_eq!(res.effective_n, 2);
        assert!((res.value - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn best_is_minimum_of_starts() {
        let fam = Family::Chord;
        let res = solve(&fam.measure(), &fam.constraint(), fam.window(), 4, &SolverConfig::default()).unwrap();
        let min = res.start_values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(res.value <= min + 1e-12);
        let again = distortion::distortion_value(&fam.measure(), &res.codebook);
        assert!((again - res.value).abs() < 1e-12);
    }

    #[test]
    fn single_point_sequence_is_base_case() {
        let fam = Family::Chord;
        let cfg = SolverConfig::default();
        let seq = solve_sequence(&fam.measure(), &fam.constraint(), fam.window(), 1, &cfg).unwrap();
        let one = solve(&fam.measure(), &fam.constraint(), fam.window(), 1, &cfg).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq[0], one);
    }

    #[test]
    fn non_optimal_codebook_is_not_stationary() {
        let fam = Family::Chord;
        let cb = Codebook::new(fam.constraint(), vec![3.6, 3.7, 5.0]).unwrap();
        assert!(stationarity_check(&fam.measure(), &cb) > 1e-3);
    }
}
