//! Bootstrap summaries and the positive/negative benchmark verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean of a sample with a 95% percentile-bootstrap interval for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_resamples: usize,
    pub seed: u64,
    /// Standard deviation of the resampled means.
    pub std_error: f64,
    pub n_samples: usize,
}

pub const MIN_RESAMPLES: usize = 100;

/// Resample-with-replacement means; percentile 2.5/97.5 interval.
///
/// The generator is seeded from `seed` so the summary is reproducible.
pub fn bootstrap(samples: &[f64], n_resamples: usize, seed: u64) -> Result<BootstrapSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if n_resamples < MIN_RESAMPLES {
        return Err(Error::invalid(format!(
            "need at least {MIN_RESAMPLES} resamples, got {n_resamples}"
        )));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..n_resamples)
        .map(|_| {
            let s: f64 = (0..n).map(|_| samples[rng.random_range(0..n)]).sum();
            s / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let mm = means.iter().sum::<f64>() / n_resamples as f64;
    let var = means.iter().map(|m| (m - mm).powi(2)).sum::<f64>() / (n_resamples - 1) as f64;
    // the percentile interval can miss the sample mean by rounding on
    // constant data; widen to keep ci_low ≤ mean ≤ ci_high
    let ci_low = percentile(&means, 0.025).min(mean);
    let ci_high = percentile(&means, 0.975).max(mean);
    Ok(BootstrapSummary {
        mean,
        ci_low,
        ci_high,
        n_resamples,
        seed,
        std_error: var.sqrt(),
        n_samples: n,
    })
}

/// Linear-interpolated percentile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Positive,
    Negative,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Positive => "positive",
            Verdict::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VerdictRule {
    /// Positive iff the two closed 95% intervals intersect.
    #[default]
    Overlap,
    /// Two-sided z-test on the difference of means at α = 0.05, using the
    /// bootstrap standard errors.
    ZTest,
}

pub fn verdict(standard: &BootstrapSummary, diagnostic: &BootstrapSummary) -> Verdict {
    verdict_with(VerdictRule::Overlap, standard, diagnostic)
}

pub fn verdict_with(rule: VerdictRule, a: &BootstrapSummary, b: &BootstrapSummary) -> Verdict {
    let positive = match rule {
        VerdictRule::Overlap => a.ci_low <= b.ci_high && b.ci_low <= a.ci_high,
        VerdictRule::ZTest => {
            let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            let diff = (a.mean - b.mean).abs();
            if se == 0.0 {
                diff == 0.0
            } else {
                diff / se <= 1.959_963_984_540_054
            }
        }
    };
    if positive {
        Verdict::Positive
    } else {
        Verdict::Negative
    }
}
