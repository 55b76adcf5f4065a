//! Limit, dimension and coefficient estimates for quantization error
//! sequences.
//!
//! Given errors `V_n` that decrease towards a limit `V∞`, the gap
//! `V_n − V∞` is modelled as `C n^{-p}` with lower-order corrections. The
//! quantization dimension of order `r` is then `r/p` and the
//! `κ`-dimensional coefficient is the limit of `n^{r/κ} (V_n − V∞)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaps below this are floating-point noise and are left out of fits.
pub const GAP_FLOOR: f64 = 1e-13;

/// Gaps more negative than this mean the limit was overestimated.
pub const NEGATIVE_GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VInfinitySource {
    /// Supplied by the caller, typically from a closed form.
    Exact,
    /// Wynn epsilon extrapolation along a doubling chain `n, 2n, 4n, …`.
    Wynn,
    /// Least-squares fit of `V∞ + Σ c_j n^{-(p+j)}`.
    PowerFit,
    /// All entries are equal.
    Constant,
}

/// Outcome of [`estimate_v_infinity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VInfinityEstimate {
    pub value: f64,
    pub source: VInfinitySource,
    /// Rough size of the extrapolation error.
    pub error_estimate: f64,
    /// Decay exponent of the power fit, if one was run and converged.
    pub exponent: Option<f64>,
}

/// Decay model `V_n − V∞ ≈ C n^{-p}` fitted on the tail of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual of the log-gap fit.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSequence {
    entries: Vec<(usize, f64)>,
    v_infinity: f64,
    source: VInfinitySource,
    error_estimate: f64,
    /// `None` when the gaps are all below [`GAP_FLOOR`] or too few to fit.
    decay: Option<Decay>,
}

impl ErrorSequence {
    /// Sequence whose limit is estimated from the entries.
    pub fn estimated(entries: Vec<(usize, f64)>) -> Result<Self> {
        check_entries(&entries)?;
        let est = estimate_v_infinity(&entries)?;
        Self::build(entries, est.value, est.source, est.error_estimate)
    }

    /// Sequence with a known limit.
    pub fn with_exact(entries: Vec<(usize, f64)>, v_infinity: f64) -> Result<Self> {
        check_entries(&entries)?;
        if !v_infinity.is_finite() {
            return Err(Error::Estimation(format!("limit {v_infinity} is not finite")));
        }
        Self::build(entries, v_infinity, VInfinitySource::Exact, 0.0)
    }

    fn build(entries: Vec<(usize, f64)>, v_infinity: f64, source: VInfinitySource, error_estimate: f64) -> Result<Self> {
        if let Some(&(n, v)) = entries.iter().find(|&&(_, v)| v - v_infinity < -NEGATIVE_GAP_TOL) {
            return Err(Error::Estimation(format!(
                "V_{n} = {v} lies below the limit {v_infinity}; re-estimate V∞"
            )));
        }
        let mut seq = Self {
            entries,
            v_infinity,
            source,
            error_estimate,
            decay: None,
        };
        seq.decay = fit_decay(&seq).ok();
        Ok(seq)
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn v_infinity(&self) -> f64 {
        self.v_infinity
    }

    pub fn source(&self) -> VInfinitySource {
        self.source
    }

    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn decay(&self) -> Option<Decay> {
        self.decay
    }

    /// `(n, V_n − V∞)` for every entry.
    pub fn gaps(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(move |&(n, v)| (n, v - self.v_infinity))
    }

    /// Gaps above [`GAP_FLOOR`].
    fn usable_gaps(&self) -> Vec<(usize, f64)> {
        self.gaps().filter(|&(_, g)| g > GAP_FLOOR).collect()
    }
}

fn check_entries(entries: &[(usize, f64)]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::Estimation("empty error sequence".into()));
    }
    for w in entries.windows(2) {
        let ((n0, v0), (n1, v1)) = (w[0], w[1]);
        if n1 <= n0 {
            return Err(Error::Estimation(format!("entries must have increasing n ({n0} then {n1})")));
        }
        if v1 > v0 + 1e-12 * v0.abs().max(1.0) {
            return Err(Error::Estimation(format!("V_{n1} = {v1} exceeds V_{n0} = {v0}")));
        }
    }
    if let Some(&(n, v)) = entries.iter().find(|(n, v)| *n == 0 || !v.is_finite()) {
        return Err(Error::Estimation(format!("invalid entry (n = {n}, V = {v})")));
    }
    Ok(())
}

/// Longest chain `…, n/4, n/2, n` of entries ending at the largest `n`.
fn doubling_chain(entries: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut chain = Vec::new();
    let Some(&(mut n, v)) = entries.last() else {
        return chain;
    };
    chain.push((n, v));
    while n % 2 == 0 {
        n /= 2;
        match entries.binary_search_by_key(&n, |e| e.0) {
            Ok(i) => chain.push(entries[i]),
            Err(_) => break,
        }
    }
    chain.reverse();
    chain
}

/// Wynn epsilon table over `s`. Returns the even-column entry whose
/// difference to its predecessor in the same column is smallest, together
/// with that difference.
fn wynn(s: &[f64]) -> (f64, f64) {
    let mut best = (s[s.len() - 1], (s[s.len() - 1] - s[s.len() - 2]).abs());
    let mut prev = vec![0.0; s.len() + 1];
    let mut cur = s.to_vec();
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                // A constant column: its value is the limit.
                return if k % 2 == 0 { (cur[i + 1], 0.0) } else { best };
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 && cur.len() >= 2 {
            let last = cur[cur.len() - 1];
            let err = (last - cur[cur.len() - 2]).abs();
            if last.is_finite() && err < best.1 {
                best = (last, err);
            }
        }
    }
    best
}

/// Linear least squares with column scaling. Returns the coefficients and
/// the residual sum of squares.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let scales: Vec<f64> = a
        .column_iter()
        .map(|c| c.amax())
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let x = scaled.clone().svd(true, true).solve(b, 1e-14).ok()?;
    let rss = (&scaled * &x - b).norm_squared();
    let x = DVector::from_iterator(x.len(), x.iter().zip(&scales).map(|(v, s)| v / s));
    Some((x, rss))
}

/// Fits `V∞ + Σ_{j≤J} c_j n^{-(p+j)}`; the exponent is found by a grid scan
/// followed by golden-section refinement of the residual.
fn power_fit(entries: &[(usize, f64)], corrections: usize) -> Option<(f64, f64, f64)> {
    let ns: Vec<f64> = entries.iter().map(|e| e.0 as f64).collect();
    let b = DVector::from_iterator(entries.len(), entries.iter().map(|e| e.1));
    let solve = |p: f64| {
        let a = DMatrix::from_fn(ns.len(), corrections + 2, |i, j| {
            if j == 0 {
                1.0
            } else {
                ns[i].powf(-(p + (j - 1) as f64))
            }
        });
        least_squares(&a, &b)
    };
    let rss = |p: f64| solve(p).map_or(f64::INFINITY, |r| r.1);

    let grid: Vec<f64> = (0..=75).map(|k| 0.25 + 0.05 * k as f64).collect();
    let (k, _) = grid
        .iter()
        .map(|&p| rss(p))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if rss(x1) < rss(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let p = 0.5 * (lo + hi);
    let (x, rss) = solve(p)?;
    Some((x[0], p, (rss / ns.len() as f64).sqrt()))
}

/// Estimates `lim V_n`.
///
/// Two extrapolations are tried: Wynn's epsilon algorithm along the longest
/// doubling chain ending at the largest `n` (its first step is the
/// three-point formula `(V_2n² − V_n V_4n)/(2V_2n − V_n − V_4n)`), and a
/// power-law fit with correction terms over the entries with `n ≥ max(4, n_max/8)`. The one
/// with the smaller internal error estimate wins.
pub fn estimate_v_infinity(entries: &[(usize, f64)]) -> Result<VInfinityEstimate> {
    check_entries(entries)?;
    let last = entries[entries.len() - 1].1;
    if entries.iter().all(|e| e.1 == last) {
        return Ok(VInfinityEstimate {
            value: last,
            source: VInfinitySource::Constant,
            error_estimate: 0.0,
            exponent: None,
        });
    }
    if entries.len() < 3 {
        return Err(Error::Estimation("at least 3 entries are needed to estimate V∞".into()));
    }

    let mut candidates = Vec::new();
    let chain: Vec<f64> = doubling_chain(entries).into_iter().map(|e| e.1).collect();
    let wynn_input: Vec<f64> = if chain.len() >= 3 {
        chain
    } else {
        entries[entries.len() - 3..].iter().map(|e| e.1).collect()
    };
    let (value, err) = wynn(&wynn_input);
    candidates.push(VInfinityEstimate {
        value,
        source: VInfinitySource::Wynn,
        error_estimate: err,
        exponent: None,
    });

    let n_max = entries[entries.len() - 1].0;
    let tail: Vec<(usize, f64)> = entries.iter().copied().filter(|e| e.0 >= 4 && e.0 * 8 >= n_max).collect();
    let fit_set = if tail.len() >= 6 { &tail[..] } else { entries };
    let max_corr = fit_set.len().saturating_sub(3).min(4);
    if let Some((v, p, rms)) = power_fit(fit_set, max_corr) {
        let err = if max_corr > 0 {
            power_fit(fit_set, max_corr - 1).map_or(f64::INFINITY, |(v2, _, _)| (v - v2).abs())
        } else {
            rms
        };
        candidates.push(VInfinityEstimate {
            value: v,
            source: VInfinitySource::PowerFit,
            error_estimate: err.max(rms),
            exponent: Some(p),
        });
    }
    candidates
        .into_iter()
        .filter(|c| c.value.is_finite())
        .min_by(|a, b| a.error_estimate.total_cmp(&b.error_estimate))
        .ok_or_else(|| Error::Estimation("no extrapolation produced a finite limit".into()))
}

/// Fits `log gap = β − p log n + Σ_{j≤J} γ_j n^{-j}` over the usable gaps
/// with `n ≥ n_max/8`, with `J = min(4, m − 3)` for `m` points. The window
/// is kept short of a full decade so that a small-`n` regime (a codebook
/// that has not yet reached a window end, say) stays out of the fit.
fn fit_decay(seq: &ErrorSequence) -> Result<Decay> {
    if let Some((n, g)) = seq.gaps().find(|&(_, g)| g < -NEGATIVE_GAP_TOL) {
        return Err(Error::Estimation(format!(
            "gap at n = {n} is negative ({g}); re-estimate V∞"
        )));
    }
    let gaps = seq.usable_gaps();
    if gaps.len() < 3 {
        return Err(Error::Estimation(format!(
            "{} positive gaps available, at least 3 needed; re-estimate V∞",
            gaps.len()
        )));
    }
    let n_max = gaps[gaps.len() - 1].0;
    let tail: Vec<(usize, f64)> = gaps.iter().copied().filter(|e| e.0 * 8 >= n_max).collect();
    let points = if tail.len() >= 3 { tail } else { gaps };
    let corrections = (points.len() - 3).min(4);
    let a = DMatrix::from_fn(points.len(), corrections + 2, |i, j| {
        let n = points[i].0 as f64;
        match j {
            0 => 1.0,
            1 => -n.ln(),
            _ => n.powi(-(j as i32 - 1)),
        }
    });
    let b = DVector::from_iterator(points.len(), points.iter().map(|e| e.1.ln()));
    let (x, rss) = least_squares(&a, &b).ok_or_else(|| Error::Estimation("decay fit failed".into()))?;
    Ok(Decay {
        exponent: x[1],
        prefactor: x[0].exp(),
        residual: (rss / points.len() as f64).sqrt(),
    })
}

/// Quantization dimension of order `r`, as `r/p` for the fitted decay
/// exponent `p`.
pub fn estimate_dimension(seq: &ErrorSequence, r: f64) -> Result<f64> {
    let decay = fit_decay(seq)?;
    if decay.exponent <= 0.0 {
        return Err(Error::Estimation(format!(
            "gaps do not decay (fitted exponent {})",
            decay.exponent
        )));
    }
    Ok(r / decay.exponent)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub value: f64,
    /// Set when the scaled gaps grow or vanish across the extrapolation
    /// triple, i.e. `κ` does not match the decay rate.
    pub diverging: bool,
}

/// Limit of `n^{r/κ}(V_n − V∞)`, extrapolated by Richardson's process from the
/// largest triple `(n, 2n, 4n)` (or the three largest entries).
pub fn estimate_coefficient(seq: &ErrorSequence, kappa: f64, r: f64) -> Result<CoefficientEstimate> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::Estimation(format!("kappa must be positive, got {kappa}")));
    }
    if let Some((n, g)) = seq.gaps().find(|&(_, g)| g < -NEGATIVE_GAP_TOL) {
        return Err(Error::Estimation(format!(
            "gap at n = {n} is negative ({g}); re-estimate V∞"
        )));
    }
    let gaps = seq.usable_gaps();
    if gaps.is_empty() {
        return Ok(CoefficientEstimate {
            value: 0.0,
            diverging: false,
        });
    }
    let chain = doubling_chain(&gaps);
    let triple: Vec<(usize, f64)> = if chain.len() >= 3 {
        chain[chain.len() - 3..].to_vec()
    } else if gaps.len() >= 3 {
        gaps[gaps.len() - 3..].to_vec()
    } else {
        return Err(Error::Estimation("at least 3 positive gaps are needed".into()));
    };
    let s: Vec<f64> = triple.iter().map(|&(n, g)| (n as f64).powf(r / kappa) * g).collect();
    let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
    // Richardson: interpolate in x = 1/n and evaluate at x = 0, which removes
    // the 1/n and 1/n² corrections. For a doubling triple this is
    // (8 s_4n − 6 s_2n + s_n)/3.
    let x: Vec<f64> = triple.iter().map(|&(n, _)| 1.0 / n as f64).collect();
    let value: f64 = (0..3)
        .map(|i| {
            let weight: f64 = (0..3).filter(|&j| j != i).map(|j| x[j] / (x[j] - x[i])).product();
            weight * s[i]
        })
        .sum();
    // With a matching κ the scaled gaps settle like `1/n`; a mismatch makes
    // them move by a fixed factor per doubling.
    let settled = d2.abs() <= 1e-9 * s[2].abs();
    let diverging = (d2.abs() > d1.abs() && !settled) || d2.abs() > 0.25 * s[2].abs() || !value.is_finite();
    Ok(CoefficientEstimate {
        value: value.max(0.0),
        diverging,
    })
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub v_n: f64,
    pub gap: f64,
    /// `−Δ log gap / Δ log n` against the previous usable row.
    pub local_slope: Option<f64>,
    /// `r log n / (−log gap)`, the defining ratio of the dimension.
    pub literal_ratio: Option<f64>,
    /// `n^{r/κ}·gap` at the estimated dimension `κ`.
    pub scaled_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub fit_residual: Option<f64>,
    pub v_infinity_error: f64,
    pub coefficient_diverging: bool,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub v_infinity: f64,
    pub v_infinity_source: VInfinitySource,
    /// `None` when the gaps vanish (constant sequence).
    pub dimension: Option<f64>,
    /// Coefficient at `κ = dimension`; zero when the gaps vanish.
    pub coefficient: f64,
    pub order: f64,
    pub diagnostics: Diagnostics,
}

/// Dimension, coefficient and per-`n` diagnostics for `seq`.
pub fn analyze(seq: &ErrorSequence, r: f64) -> Result<AsymptoticsReport> {
    let usable = seq.usable_gaps();
    let (dimension, coefficient) = if usable.is_empty() {
        (None, CoefficientEstimate { value: 0.0, diverging: false })
    } else {
        let dim = estimate_dimension(seq, r)?;
        (Some(dim), estimate_coefficient(seq, dim, r)?)
    };

    let mut rows = Vec::with_capacity(seq.entries.len());
    let mut prev: Option<(f64, f64)> = None;
    for (n, v) in seq.entries.iter().copied() {
        let gap = v - seq.v_infinity;
        let nf = n as f64;
        let usable = gap > GAP_FLOOR;
        let local_slope = match (usable, prev) {
            (true, Some((ln0, lg0))) => Some(-(gap.ln() - lg0) / (nf.ln() - ln0)),
            _ => None,
        };
        let literal_ratio = (usable && gap < 1.0 && n > 1).then(|| r * nf.ln() / -gap.ln());
        let scaled_gap = dimension.filter(|_| usable).map(|k| nf.powf(r / k) * gap);
        if usable {
            prev = Some((nf.ln(), gap.ln()));
        }
        rows.push(Row {
            n,
            v_n: v,
            gap,
            local_slope,
            literal_ratio,
            scaled_gap,
        });
    }

    Ok(AsymptoticsReport {
        v_infinity: seq.v_infinity,
        v_infinity_source: seq.source,
        dimension,
        coefficient: coefficient.value,
        order: r,
        diagnostics: Diagnostics {
            fit_residual: seq.decay.map(|d| d.residual),
            v_infinity_error: seq.error_estimate,
            coefficient_diverging: coefficient.diverging,
            rows,
        },
    })
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl AsymptoticsReport {
    /// CSV with columns `n,V_n,gap,local_slope,scaled_gap`; undefined cells
    /// are left empty.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "V_n", "gap", "local_slope", "scaled_gap"])?;
        let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
        for row in &self.diagnostics.rows {
            w.write_record([
                row.n.to_string(),
                fmt17(row.v_n),
                fmt17(row.gap),
                opt(row.local_slope),
                opt(row.scaled_gap),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}
