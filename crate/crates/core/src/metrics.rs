//! Distance and fidelity measures between classical outcome distributions.

use serde::Serialize;

use crate::dist::Distribution;

/// Hellinger distance h(X, Y) = (1/√2)·√Σ(√xᵢ − √yᵢ)². Distributions of
/// different lengths are zero-padded to a common support.
pub fn hellinger_distance(x: &Distribution, y: &Distribution) -> f64 {
    let (a, b) = x.aligned(y);
    let sum: f64 = a
        .iter()
        .zip(&b)
        .map(|(&p, &q)| {
            let d = p.sqrt() - q.sqrt();
            d * d
        })
        .sum();
    (sum / 2.0).sqrt()
}

/// Hellinger fidelity (1 − h²)² = (Σ√(xᵢyᵢ))².
pub fn hellinger_fidelity(x: &Distribution, y: &Distribution) -> f64 {
    let h2 = {
        let h = hellinger_distance(x, y);
        h * h
    };
    let f = 1.0 - h2;
    f * f
}

/// Total variation distance ½·Σ|xᵢ − yᵢ|.
pub fn total_variation(x: &Distribution, y: &Distribution) -> f64 {
    let (a, b) = x.aligned(y);
    0.5 * a.iter().zip(&b).map(|(&p, &q)| (p - q).abs()).sum::<f64>()
}

/// Most likely outcome (ties break toward the lowest index).
pub fn argmax_outcome(x: &Distribution) -> Option<usize> {
    x.argmax().ok()
}

/// All headline measures between an observed and a reference distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub hellinger: f64,
    pub fidelity: f64,
    pub total_variation: f64,
    pub observed_argmax: usize,
    pub reference_argmax: usize,
}

impl MetricReport {
    pub fn compare(observed: &Distribution, reference: &Distribution) -> Option<MetricReport> {
        Some(MetricReport {
            hellinger: hellinger_distance(observed, reference),
            fidelity: hellinger_fidelity(observed, reference),
            total_variation: total_variation(observed, reference),
            observed_argmax: argmax_outcome(observed)?,
            reference_argmax: argmax_outcome(reference)?,
        })
    }
}
