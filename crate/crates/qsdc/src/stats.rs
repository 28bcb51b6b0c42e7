//! Rate estimation helpers for the Monte Carlo harness.

/// Two-sided 95% z-score.
const Z_95: f64 = 1.959963984540054;

/// A binomial rate estimate with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson 95% score interval for `successes` out of `trials`.
///
/// Unlike the Wald interval this behaves sensibly at rates near 0 and 1,
/// where abort rates live. With zero trials the rate is undefined; the
/// interval degenerates to [0, 1] around a 0 point estimate.
pub fn wilson_interval(successes: u64, trials: u64) -> RateEstimate {
    if trials == 0 {
        return RateEstimate {
            rate: 0.0,
            ci_low: 0.0,
            ci_high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = Z_95;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the boundaries the analytic bound is exact; avoid leaving
    // floating-point residue like 3e-18 in reports.
    let ci_low = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let ci_high = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    RateEstimate { rate: p, ci_low, ci_high }
}

/// Binomial standard error of a rate estimate, `sqrt(p(1-p)/n)`.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}
