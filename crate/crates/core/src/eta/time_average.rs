//! Time-averaging of simulated signals and spectral gap detection.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Observable, PureState};
use crate::simulator::SimulatorHandle;

/// Sampling and averaging parameters, all derived from the energy breadth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAveraging {
    pub delta_b: f64,
    pub t_a: f64,
    pub t_samp: f64,
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl TimeAveraging {
    /// `t_a = periods·2π/Δ_B`, `t_samp = safety·π/Δ_B`.
    pub fn new(
        delta_b: f64,
        periods: f64,
        safety: f64,
        rel_tol: f64,
        max_doublings: usize,
    ) -> Result<Self> {
        if !(delta_b.is_finite() && delta_b > 0.0) {
            return Err(Error::invalid(format!(
                "energy breadth must be positive, got {delta_b}"
            )));
        }
        let ta = TimeAveraging {
            delta_b,
            t_a: periods * 2.0 * PI / delta_b,
            t_samp: safety * PI / delta_b,
            rel_tol,
            max_doublings,
        };
        ta.validate()?;
        Ok(ta)
    }

    /// 200 breadth periods, half the aliasing limit, 1e-4 relative tolerance,
    /// up to 8 doublings.
    pub fn standard(delta_b: f64) -> Result<Self> {
        Self::new(delta_b, 200.0, 0.5, 1e-4, 8)
    }

    pub fn aliasing_limit(&self) -> f64 {
        PI / self.delta_b
    }

    pub fn validate(&self) -> Result<()> {
        let limit = self.aliasing_limit();
        if !(self.t_samp > 0.0 && self.t_samp < limit) {
            return Err(Error::Aliasing {
                t_samp: self.t_samp,
                limit,
            });
        }
        if !(self.t_a > self.t_samp) {
            return Err(Error::invalid(format!(
                "averaging time {} must exceed the sampling interval {}",
                self.t_a, self.t_samp
            )));
        }
        Ok(())
    }

    /// Number of intervals of the base grid; the actual spacing
    /// `t_a / n` never exceeds `t_samp`.
    pub fn base_intervals(&self) -> usize {
        (self.t_a / self.t_samp).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAverage {
    pub value: f64,
    pub converged: bool,
    /// Averaging time of the returned value.
    pub t_a: f64,
    pub dt: f64,
    /// Samples at `0, dt, 2dt, …, t_a`.
    pub samples: Vec<f64>,
}

fn trapezoid_mean(s: &[f64]) -> f64 {
    let m = s.len() - 1;
    (s.iter().sum::<f64>() - 0.5 * (s[0] + s[m])) / m as f64
}

/// `(1/t_a)∫₀^{t_a} ⟨O_s(t)⟩dt` by the trapezoid rule, doubling `t_a` until
/// successive averages agree to `rel_tol`.
pub fn time_average_simulated(
    sim: &dyn SimulatorHandle,
    psi: &PureState,
    o: &Observable,
    ta: &TimeAveraging,
) -> Result<TimeAverage> {
    ta.validate()?;
    let m = ta.base_intervals();
    let dt = ta.t_a / m as f64;
    let times: Vec<f64> = (0..=m).map(|k| k as f64 * dt).collect();
    let mut samples = sim.expectation_series(psi, o, &times)?;
    let mut value = trapezoid_mean(&samples);
    let mut converged = false;
    for _ in 0..ta.max_doublings {
        let n = samples.len() - 1;
        let more: Vec<f64> = (n + 1..=2 * n).map(|k| k as f64 * dt).collect();
        samples.extend(sim.expectation_series(psi, o, &more)?);
        let next = trapezoid_mean(&samples);
        let scale = next.abs().max(f64::MIN_POSITIVE);
        let done = (next - value).abs() <= ta.rel_tol * scale;
        value = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(TimeAverage {
        value,
        converged,
        t_a: (samples.len() - 1) as f64 * dt,
        dt,
        samples,
    })
}

/// Spectral peaks of a sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    /// Highest angular frequency carrying a discernible peak; 0 for a
    /// constant signal.
    pub max_gap: f64,
    pub bin_width: f64,
    pub peaks: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSettings {
    /// Peaks below this fraction of the strongest line (or of the mean level,
    /// if larger) are ignored.
    pub rel_threshold: f64,
    /// Peaks below this absolute amplitude are ignored.
    pub abs_threshold: f64,
    /// Smallest gap that must be resolvable; the grid must span four of its
    /// periods.
    pub min_gap: f64,
}

/// Four-term Blackman-Harris window; sidelobes sit below −92 dB, so only
/// genuine lines survive a 1e-3 relative threshold.
fn blackman_harris(n: usize) -> Vec<f64> {
    let (a0, a1, a2, a3) = (0.35875, 0.48829, 0.14128, 0.01168);
    let d = (n - 1).max(1) as f64;
    (0..n)
        .map(|k| {
            let x = 2.0 * PI * k as f64 / d;
            a0 - a1 * x.cos() + a2 * (2.0 * x).cos() - a3 * (3.0 * x).cos()
        })
        .collect()
}

/// Locate the energy gaps present in a uniformly sampled signal.
pub fn detect_gaps(samples: &[f64], dt: f64, settings: &PeakSettings) -> Result<GapEstimate> {
    let n = samples.len();
    if n < 8 {
        return Err(Error::invalid(
            "need at least 8 samples for spectral analysis",
        ));
    }
    let span = dt * n as f64;
    let required = 4.0 * 2.0 * PI / settings.min_gap;
    if span < required {
        return Err(Error::Resolution {
            grid_length: span,
            required,
        });
    }
    let win = blackman_harris(n);
    let wsum: f64 = win.iter().sum();
    // window-weighted mean, so the zero-frequency line is removed exactly
    let mean = samples.iter().zip(&win).map(|(s, w)| s * w).sum::<f64>() / wsum;
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .zip(&win)
        .map(|(s, w)| Complex::new((s - mean) * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // one-sided line amplitudes
    let amp: Vec<f64> = buf[..n / 2 + 1]
        .iter()
        .map(|z| 2.0 * z.norm() / wsum)
        .collect();
    let bin_width = 2.0 * PI / span;
    // lines are judged against the whole signal, DC level included, so the
    // faint wiggles of a nearly stationary state do not count as gaps
    let strongest = amp[1..].iter().cloned().fold(mean.abs(), f64::max);
    let cut = (settings.rel_threshold * strongest).max(settings.abs_threshold);
    let mut peaks = Vec::new();
    for k in 1..amp.len() {
        let left = amp[k - 1];
        let right = if k + 1 < amp.len() { amp[k + 1] } else { 0.0 };
        if amp[k] > cut && amp[k] >= left && amp[k] >= right {
            peaks.push(k as f64 * bin_width);
        }
    }
    let max_gap = peaks.iter().cloned().fold(0.0, f64::max);
    Ok(GapEstimate {
        max_gap,
        bin_width,
        peaks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_guard_aliasing() {
        assert!(TimeAveraging::new(2.0, 200.0, 1.0, 1e-4, 0).is_err());
        assert!(TimeAveraging::new(2.0, 200.0, 1.2, 1e-4, 0).is_err());
        let ok = TimeAveraging::standard(2.0).unwrap();
        assert!(ok.t_samp < ok.aliasing_limit());
        assert!(ok.t_a / ok.base_intervals() as f64 <= ok.t_samp);
    }

    #[test]
    fn single_tone_peak() {
        let gap = 0.37;
        let dt = 0.5;
        let s: Vec<f64> = (0..4096).map(|k| (gap * k as f64 * dt).cos()).collect();
        let g = detect_gaps(
            &s,
            dt,
            &PeakSettings {
                rel_threshold: 1e-3,
                abs_threshold: 1e-10,
                min_gap: 0.05,
            },
        )
        .unwrap();
        assert!((g.max_gap - gap).abs() <= g.bin_width, "{g:?}");
        assert_eq!(g.peaks.len(), 1);
    }

    #[test]
    fn constant_signal_has_no_gap() {
        let g = detect_gaps(
            &[0.3; 512],
            0.1,
            &PeakSettings {
                rel_threshold: 1e-3,
                abs_threshold: 1e-10,
                min_gap: 2.0,
            },
        )
        .unwrap();
        assert_eq!(g.max_gap, 0.0);
    }

    #[test]
    fn short_grid_is_rejected() {
        let r = detect_gaps(
            &[0.0; 64],
            0.1,
            &PeakSettings {
                rel_threshold: 1e-3,
                abs_threshold: 1e-10,
                min_gap: 0.1,
            },
        );
        assert!(matches!(r, Err(Error::Resolution { .. })));
    }
}
