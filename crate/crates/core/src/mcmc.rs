//! Path-sampling Monte-Carlo for `Tr[e^{−Kτ} O] / Tr[e^{−Kτ}]`.
//!
//! A configuration is a path `a₁ … a_N` of position-basis indices. Its
//! amplitude is the product of the `N − 1` slice elements
//! `⟨a_i|e^{−KΔ}|a_{i+1}⟩` with `Δ = τ/(N − 1)`, so that the slices compose
//! to exactly `e^{−Kτ}`. Paths are drawn with probability `∝ |S(ā)|`; the
//! numerator payload is `phase(S)·⟨a_N|O|a₁⟩` and the denominator payload is
//! `phase(S)·δ(a_N, a₁)`, whose ratio is the orthodox expectation value.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::EigenDecomposition;
use crate::linalg::{self, CMatrix, C64};
use crate::quantum::Observable;

/// Mean sign below which results carry a sign-problem warning.
pub const SIGN_WARNING: f64 = 1e-3;
pub const DEFAULT_SLICES: usize = 16;
pub const PILOT_SWEEPS: usize = 1000;

#[derive(Debug, Clone)]
pub struct Kernel {
    k: CMatrix,
    pub tau: f64,
    pub n_slices: usize,
    /// `e^{−(K − k_min)Δ}`; the constant shift cancels in every ratio.
    slice: CMatrix,
    k_eigen: EigenDecomposition,
}

impl Kernel {
    pub fn new(k: CMatrix, tau: f64, n_slices: usize) -> Result<Self> {
        if n_slices < 2 {
            return Err(Error::invalid("need at least two slices"));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!("tau must be positive, got {tau}")));
        }
        if linalg::hermiticity_error(&k) > 1e-10 {
            return Err(Error::invalid("kernel generator is not Hermitian"));
        }
        let k_eigen = EigenDecomposition::from_hermitian(&k)?;
        let delta = tau / (n_slices - 1) as f64;
        let k_min = k_eigen.min_energy();
        let n = k.nrows();
        let mut scaled = k_eigen.vectors.clone();
        for j in 0..n {
            let f = (-(k_eigen.energies[j] - k_min) * delta).exp();
            for i in 0..n {
                scaled[(i, j)] *= f;
            }
        }
        let slice = &scaled * k_eigen.vectors.adjoint();
        Ok(Kernel {
            k,
            tau,
            n_slices,
            slice,
            k_eigen,
        })
    }

    /// Gaussian-orthodox kernel `K = ((H − ε)/σ)²`, `τ = 1`.
    pub fn gaussian(h: &CMatrix, eps: f64, sigma: f64, n_slices: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let n = h.nrows();
        let shifted = (h - CMatrix::identity(n, n) * linalg::c(eps)) / linalg::c(sigma);
        let k = &shifted * &shifted;
        // squaring leaves rounding-level asymmetry
        let k = (&k + k.adjoint()) * linalg::c(0.5);
        Self::new(k, 1.0, n_slices)
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn generator(&self) -> &CMatrix {
        &self.k
    }

    pub fn delta(&self) -> f64 {
        self.tau / (self.n_slices - 1) as f64
    }

    /// Shifted single-slice propagator.
    pub fn slice_matrix(&self) -> &CMatrix {
        &self.slice
    }

    /// `e^{−K_min τ}` times the product of the slice matrices, i.e. `e^{−Kτ}`.
    pub fn full_propagator(&self) -> CMatrix {
        let shift = (-self.k_eigen.min_energy() * self.tau).exp();
        linalg::matrix_power(&self.slice, self.n_slices - 1) * linalg::c(shift)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub n_samples: usize,
    pub acceptance_rate: f64,
    pub mean_sign: f64,
    pub autocorrelation_time: f64,
    pub sign_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub stats: ChainStats,
}

/// `S(ā)` with the shifted slice matrix.
pub fn amplitude(cfg: &Configuration, kernel: &Kernel) -> Result<C64> {
    if cfg.indices.len() != kernel.n_slices {
        return Err(Error::DimensionMismatch {
            expected: kernel.n_slices,
            got: cfg.indices.len(),
        });
    }
    if let Some(&bad) = cfg.indices.iter().find(|&&a| a >= kernel.dim()) {
        return Err(Error::invalid(format!("basis index {bad} out of range")));
    }
    Ok(cfg
        .indices
        .windows(2)
        .map(|w| kernel.slice[(w[0], w[1])])
        .product())
}

/// Dense oracle `Tr[e^{−Kτ} O] / Tr[e^{−Kτ}]`.
pub fn exact_expectation(kernel: &Kernel, o: &Observable) -> Result<f64> {
    check_dim(kernel.dim(), o.dim())?;
    let e = &kernel.k_eigen;
    let e0 = e.min_energy();
    let w: Vec<f64> = e
        .energies
        .iter()
        .map(|&k| (-(k - e0) * kernel.tau).exp())
        .collect();
    let z: f64 = w.iter().sum();
    let d = e.diagonal_elements(o.matrix());
    Ok(w.iter().zip(&d).map(|(w, d)| w * d).sum::<f64>() / z)
}

/// Running chain state with an incrementally maintained amplitude.
struct Chain<'a> {
    kernel: &'a Kernel,
    cfg: Vec<usize>,
    log_abs: f64,
    phase: C64,
}

impl<'a> Chain<'a> {
    fn new<R: Rng + ?Sized>(kernel: &'a Kernel, rng: &mut R) -> Self {
        let n = kernel.dim();
        let mut cfg: Vec<usize> = (0..kernel.n_slices)
            .map(|_| rng.random_range(0..n))
            .collect();
        let mut s = amplitude(
            &Configuration {
                indices: cfg.clone(),
            },
            kernel,
        )
        .unwrap();
        if s.norm() == 0.0 {
            let best = (0..n)
                .max_by(|&a, &b| {
                    kernel.slice[(a, a)]
                        .norm()
                        .total_cmp(&kernel.slice[(b, b)].norm())
                })
                .unwrap_or(0);
            cfg = vec![best; kernel.n_slices];
            s = amplitude(
                &Configuration {
                    indices: cfg.clone(),
                },
                kernel,
            )
            .unwrap();
        }
        Chain {
            kernel,
            cfg,
            log_abs: s.norm().ln(),
            phase: s / s.norm(),
        }
    }

    #[cfg(test)]
    fn amplitude(&self) -> C64 {
        self.phase * self.log_abs.exp()
    }

    /// Product of the factors touching slice `i` if it held `value`.
    fn local(&self, i: usize, value: usize) -> C64 {
        let m = &self.kernel.slice;
        let mut f = C64::new(1.0, 0.0);
        if i > 0 {
            f *= m[(self.cfg[i - 1], value)];
        }
        if i + 1 < self.cfg.len() {
            f *= m[(value, self.cfg[i + 1])];
        }
        f
    }

    /// One Metropolis proposal; returns whether it was accepted.
    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let i = rng.random_range(0..self.cfg.len());
        let proposal = rng.random_range(0..self.kernel.dim());
        if proposal == self.cfg[i] {
            return true;
        }
        let old = self.local(i, self.cfg[i]);
        let new = self.local(i, proposal);
        let ratio = new.norm() / old.norm();
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            self.cfg[i] = proposal;
            self.log_abs += ratio.ln();
            let rot = (new / new.norm()) * (old / old.norm()).conj();
            self.phase *= rot;
            self.phase /= self.phase.norm();
            true
        } else {
            false
        }
    }

    /// Relabel every slice `a_i → a_i + k (mod dim)`. The move is its own
    /// inverse's mirror image, so it is symmetric; without it a diagonal
    /// kernel would freeze on one constant path.
    fn shift_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let n = self.kernel.dim();
        let k = rng.random_range(1..n);
        let moved: Vec<usize> = self.cfg.iter().map(|&a| (a + k) % n).collect();
        let new = self.path_amplitude(&moved);
        let old = self.path_amplitude(&self.cfg);
        let ratio = new.norm() / old.norm();
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            self.cfg = moved;
            self.log_abs = new.norm().ln();
            self.phase = new / new.norm();
            true
        } else {
            false
        }
    }

    fn path_amplitude(&self, cfg: &[usize]) -> C64 {
        cfg.windows(2)
            .map(|w| self.kernel.slice[(w[0], w[1])])
            .product()
    }

    /// One proposal per slice, then one global relabel.
    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let local = (0..self.cfg.len()).filter(|_| self.step(rng)).count();
        self.shift_step(rng);
        local
    }

    /// `(numerator, denominator, sign)` payloads.
    fn payload(&self, o: &CMatrix) -> (f64, f64, f64) {
        let first = self.cfg[0];
        let last = self.cfg[self.cfg.len() - 1];
        let num = (self.phase * o[(last, first)]).re;
        let den = if first == last { self.phase.re } else { 0.0 };
        (num, den, self.phase.re)
    }
}

/// Integrated autocorrelation time with Sokal's automatic window.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 0.0;
    }
    let mut tau = 0.5;
    for lag in 1..n / 2 {
        let c: f64 = (0..n - lag)
            .map(|i| (series[i] - mean) * (series[i + lag] - mean))
            .sum::<f64>()
            / ((n - lag) as f64 * var);
        tau += c;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

const BATCHES: usize = 32;

/// Metropolis sampling of `Tr[e^{−Kτ} O]/𝒵`.
///
/// `n_samples` counts sweeps (one proposal per slice); a payload is recorded
/// after each sweep. `burn_in = None` runs a pilot to set it.
pub fn metropolis_run<R: Rng + ?Sized>(
    kernel: &Kernel,
    o: &Observable,
    n_samples: usize,
    burn_in: Option<usize>,
    rng: &mut R,
) -> Result<McEstimate> {
    check_dim(kernel.dim(), o.dim())?;
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    if kernel.dim() < 2 {
        return Err(Error::invalid("kernel dimension must be at least 2"));
    }
    let om = o.matrix();
    let mut chain = Chain::new(kernel, rng);
    let pilot_tau = if burn_in.is_none() {
        let mut series = Vec::with_capacity(PILOT_SWEEPS);
        for _ in 0..PILOT_SWEEPS {
            chain.sweep(rng);
            series.push(chain.payload(om).0);
        }
        integrated_autocorrelation(&series)
    } else {
        0.0
    };
    let burn = burn_in.unwrap_or_else(|| (10.0 * pilot_tau).ceil() as usize);
    for _ in 0..burn {
        chain.sweep(rng);
    }
    let mut num = Vec::with_capacity(n_samples);
    let mut den = Vec::with_capacity(n_samples);
    let mut sign_sum = 0.0;
    let mut accepted = 0usize;
    for _ in 0..n_samples {
        accepted += chain.sweep(rng);
        let (a, b, s) = chain.payload(om);
        num.push(a);
        den.push(b);
        sign_sum += s;
    }
    let total_num: f64 = num.iter().sum();
    let total_den: f64 = den.iter().sum();
    if total_den == 0.0 {
        return Err(Error::NumericFailure(format!(
            "no closed paths sampled in {n_samples} sweeps; increase the sample count"
        )));
    }
    let estimate = total_num / total_den;
    let stderr = ratio_batch_stderr(&num, &den, estimate);
    let mean_sign = sign_sum / n_samples as f64;
    let sign_warning = mean_sign.abs() < SIGN_WARNING;
    if sign_warning {
        warn!("mean sign {mean_sign:.2e} indicates a sign problem; estimate is unreliable");
    }
    let tau_int = if burn_in.is_none() {
        pilot_tau
    } else {
        integrated_autocorrelation(&num[..num.len().min(10_000)])
    };
    Ok(McEstimate {
        estimate,
        stderr,
        stats: ChainStats {
            n_samples,
            acceptance_rate: accepted as f64 / (n_samples * kernel.n_slices) as f64,
            mean_sign,
            autocorrelation_time: tau_int,
            sign_warning,
        },
    })
}

/// Batch-means error of a ratio estimator, linearized about `ratio`.
fn ratio_batch_stderr(num: &[f64], den: &[f64], ratio: f64) -> f64 {
    let n = num.len();
    let batches = BATCHES.min(n);
    if batches < 2 {
        return f64::NAN;
    }
    let len = n / batches;
    let d_mean = den.iter().sum::<f64>() / n as f64;
    let resid: Vec<f64> = (0..batches)
        .map(|b| {
            let r = b * len..(b + 1) * len;
            let a: f64 = num[r.clone()].iter().sum::<f64>() / len as f64;
            let d: f64 = den[r].iter().sum::<f64>() / len as f64;
            (a - ratio * d) / d_mean
        })
        .collect();
    let m = resid.iter().sum::<f64>() / batches as f64;
    let var = resid.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Orthodox expectation of the gaussian state `e^{−((H−ε)/σ)²}/𝒵`, sampled
/// over position-basis paths.
pub fn estimate_orthodox<R: Rng + ?Sized>(
    h: &CMatrix,
    eps: f64,
    sigma: f64,
    o: &Observable,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    let kernel = Kernel::gaussian(h, eps, sigma, DEFAULT_SLICES)?;
    metropolis_run(&kernel, o, n_samples, None, rng)
}

/// Inverse-variance combination of independent chains.
pub fn merge_estimates(parts: &[McEstimate]) -> Result<McEstimate> {
    if parts.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut wsum = 0.0;
    let mut acc = 0.0;
    for p in parts {
        let w = 1.0 / p.stderr.powi(2).max(f64::MIN_POSITIVE);
        wsum += w;
        acc += w * p.estimate;
    }
    let n: usize = parts.iter().map(|p| p.stats.n_samples).sum();
    let avg = |f: fn(&ChainStats) -> f64| {
        parts
            .iter()
            .map(|p| f(&p.stats) * p.stats.n_samples as f64)
            .sum::<f64>()
            / n as f64
    };
    let mean_sign = avg(|s| s.mean_sign);
    Ok(McEstimate {
        estimate: acc / wsum,
        stderr: (1.0 / wsum).sqrt(),
        stats: ChainStats {
            n_samples: n,
            acceptance_rate: avg(|s| s.acceptance_rate),
            mean_sign,
            autocorrelation_time: avg(|s| s.autocorrelation_time),
            sign_warning: mean_sign.abs() < SIGN_WARNING,
        },
    })
}

/// Independent chains seeded `seed, seed+1, …`, run in parallel when the
/// `parallel` feature is on, then merged.
pub fn multi_chain(
    kernel: &Kernel,
    o: &Observable,
    n_chains: usize,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let run = |c: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
        metropolis_run(kernel, o, n_samples, None, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let parts: Result<Vec<McEstimate>> = {
        use rayon::prelude::*;
        (0..n_chains).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Result<Vec<McEstimate>> = (0..n_chains).map(run).collect();
    merge_estimates(&parts?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v)),
        ))
    }

    #[test]
    fn constant_diagonal_path() {
        let k = Kernel::new(diag(&[0.5, 1.5, 2.0]), 2.0, 5).unwrap();
        // shifted by k_min = 0.5
        let s = amplitude(
            &Configuration {
                indices: vec![2; 5],
            },
            &k,
        )
        .unwrap();
        assert!((s.re - (-(2.0 - 0.5) * 2.0_f64).exp()).abs() < 1e-14);
        let two = Kernel::new(diag(&[0.0, 1.0]), 1.0, 2).unwrap();
        let s = amplitude(
            &Configuration {
                indices: vec![1, 1],
            },
            &two,
        )
        .unwrap();
        assert!((s.re - (-1.0_f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn slices_compose_to_full_propagator() {
        let k = CMatrix::from_row_slice(2, 2, &[c(0.3), c(0.2), c(0.2), c(1.1)]);
        let kern = Kernel::new(k.clone(), 1.7, 16).unwrap();
        let full = linalg::hermitian_exp(&k, -1.7).unwrap();
        assert!(linalg::frobenius_distance(&kern.full_propagator(), &full) < 1e-8);
    }

    #[test]
    fn two_level_gibbs() {
        let k = Kernel::new(diag(&[-1.0, 1.0]), 1.0, 4).unwrap();
        let o = Observable::from_diagonal(&[-1.0, 1.0]);
        let v = exact_expectation(&k, &o).unwrap();
        assert!((v + 1.0_f64.tanh()).abs() < 1e-12);
        assert!((exact_expectation(&k, &Observable::identity(2)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn positive_kernel_has_unit_sign() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-0.3), c(-0.3), c(1.0)]);
        let k = Kernel::new(h, 0.5, 8).unwrap();
        assert!(k.slice_matrix().iter().all(|z| z.re > 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = metropolis_run(
            &k,
            &Observable::from_diagonal(&[0.0, 1.0]),
            2000,
            None,
            &mut rng,
        )
        .unwrap();
        assert_eq!(r.stats.mean_sign, 1.0);
    }

    #[test]
    fn incremental_amplitude_tracks_full_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = CMatrix::from_fn(5, 5, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 * 0.1 + ((j * 7 + i * 3) % 5) as f64 * 0.1)
        });
        let k = Kernel::new(h, 1.0, 6).unwrap();
        let mut chain = Chain::new(&k, &mut rng);
        for _ in 0..1000 {
            chain.step(&mut rng);
            let full = amplitude(
                &Configuration {
                    indices: chain.cfg.clone(),
                },
                &k,
            )
            .unwrap();
            let inc = chain.amplitude();
            assert!((full - inc).norm() <= 1e-12 * full.norm());
        }
    }

    /// Enumerate every path of a 2-slice, 2-state chain and check
    /// `π(a)P(a→b) = π(b)P(b→a)` for the single-site Metropolis kernel.
    #[test]
    fn detailed_balance_by_enumeration() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.2), c(0.7), c(0.7), c(-0.4)]);
        let k = Kernel::new(h, 1.3, 2).unwrap();
        let paths: Vec<Vec<usize>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let weight = |p: &Vec<usize>| {
            amplitude(&Configuration { indices: p.clone() }, &k)
                .unwrap()
                .norm()
        };
        let z: f64 = paths.iter().map(weight).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut chain = Chain::new(&k, &mut rng);
        let transition = |chain: &mut Chain, from: &Vec<usize>, to: &Vec<usize>| -> f64 {
            let diff: Vec<usize> = (0..2).filter(|&i| from[i] != to[i]).collect();
            if diff.len() != 1 {
                return 0.0;
            }
            let i = diff[0];
            chain.cfg = from.clone();
            let ratio = chain.local(i, to[i]).norm() / chain.local(i, from[i]).norm();
            0.5 * 0.5 * ratio.min(1.0)
        };
        for a in &paths {
            for b in &paths {
                let lhs = weight(a) / z * transition(&mut chain, a, b);
                let rhs = weight(b) / z * transition(&mut chain, b, a);
                assert!((lhs - rhs).abs() < 1e-15, "{a:?} {b:?}");
            }
        }
        // relabel moves: 0↔1 on both slices at once, proposal probability 1
        for a in &paths {
            let b: Vec<usize> = a.iter().map(|&x| 1 - x).collect();
            let lhs = weight(a) * (weight(&b) / weight(a)).min(1.0);
            let rhs = weight(&b) * (weight(a) / weight(&b)).min(1.0);
            assert!((lhs - rhs).abs() < 1e-15);
        }
        // the sampled chain reproduces π
        let mut counts = [0usize; 4];
        let mut chain = Chain::new(&k, &mut rng);
        for _ in 0..100_000 {
            chain.sweep(&mut rng);
            counts[chain.cfg[0] * 2 + chain.cfg[1]] += 1;
        }
        for (p, &n) in paths.iter().zip(&counts) {
            assert!((n as f64 / 100_000.0 - weight(p) / z).abs() < 0.01);
        }
    }

    #[test]
    fn autocorrelation_of_white_noise_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!((integrated_autocorrelation(&s) - 0.5).abs() < 0.1);
    }

    #[test]
    fn merge_weights_by_precision() {
        let stats = ChainStats {
            n_samples: 10,
            acceptance_rate: 0.5,
            mean_sign: 1.0,
            autocorrelation_time: 1.0,
            sign_warning: false,
        };
        let a = McEstimate {
            estimate: 1.0,
            stderr: 1.0,
            stats,
        };
        let b = McEstimate {
            estimate: 2.0,
            stderr: 0.5,
            stats,
        };
        let m = merge_estimates(&[a, b]).unwrap();
        assert!((m.estimate - 1.8).abs() < 1e-12);
        assert!((m.stderr - (1.0f64 / 5.0).sqrt()).abs() < 1e-12);
    }
}
