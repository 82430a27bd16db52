//! Small statistics helpers for campaign summaries.

pub use crate::shadows::median;

/// `P[Bin(trials, p) ≥ k]`, summed in log space.
pub fn binomial_upper_tail(trials: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > trials {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_binom = ln_choose(trials, k);
    let mut total = 0.0;
    for i in k..=trials {
        total += (log_binom + i as f64 * lp + (trials - i) as f64 * lq).exp();
        // C(T, i+1) = C(T, i) (T − i) / (i + 1)
        if i < trials {
            log_binom += ((trials - i) as f64).ln() - ((i + 1) as f64).ln();
        }
    }
    total.min(1.0)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// One-sided test of `H₀: failure rate ≤ δ`: passes unless observing at
/// least `failures` failures in `trials` would have probability below
/// `1 − confidence` under `H₀`.
pub fn failure_rate_consistent(failures: u64, trials: u64, delta: f64, confidence: f64) -> bool {
    binomial_upper_tail(trials, delta, failures) >= 1.0 - confidence
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "mismatched series");
    assert!(xs.len() >= 2, "slope needs at least two points");
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
