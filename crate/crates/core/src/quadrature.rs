//! Numerical integration helpers.
//!
//! The distortion engine integrates in closed form; quadrature backs the
//! cross-checks (numerical arc length, per-cell fallback integration).

/// Integrates a smooth `f` over `[a, b]` with the double-exponential rule.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    quadrature::integrate(f, a, b, tol).integral
}

/// Integrates a piecewise-smooth `f` over consecutive breakpoints, one smooth
/// piece at a time.
pub fn integrate_piecewise<F>(f: F, breakpoints: &[f64], tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    breakpoints
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol))
        .sum()
}
