//! Shared fixtures for the benchmarks.

use cquant::{Codebook, Family};

/// Evenly spread `n`-point codebook on the family's constraint.
pub fn spread_codebook(family: &Family, n: usize) -> Codebook {
    let w = family.window();
    let params = (0..n)
        .map(|i| w.lo + (i as f64 + 0.5) / n as f64 * w.width())
        .collect();
    Codebook::new(family.constraint(), params).expect("params inside the window")
}

/// One segment-support and one circle-support family.
pub fn families() -> [(&'static str, Family); 2] {
    [("chord", Family::Chord), ("circle-circle", Family::CircleCircle { radius: 2.0 })]
}
