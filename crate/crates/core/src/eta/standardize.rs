//! Sampling benchmark orthodox mixed states for the standard of comparison.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::window::EnergyWindow;
use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::EigenDecomposition;
use crate::quantum::{Observable, OrthodoxMixedState};
use crate::stats::{bootstrap, BootstrapSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardOfComparison {
    pub values: Vec<f64>,
    pub summary: BootstrapSummary,
    pub proposals: usize,
}

impl StandardOfComparison {
    pub fn accepted(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizeSettings {
    pub n_resamples: usize,
    /// Give up when fewer than `min_acceptance` of this many proposals pass.
    pub max_proposals: usize,
    pub min_acceptance: f64,
    /// Bump widths for Variant I, as fractions of the energy breadth.
    pub bump_width: (f64, f64),
    pub max_bumps: usize,
    /// Variant II edge suppression `exp(−((edge−ε)/σ)²)` bound.
    pub edge_suppression: f64,
    /// Smallest σ for Variant II, as a fraction of the energy breadth.
    /// Half the minimum resolvable gap of the arbitration peak search.
    pub sigma_floor: f64,
}

impl Default for StandardizeSettings {
    fn default() -> Self {
        StandardizeSettings {
            n_resamples: 1000,
            max_proposals: 100_000,
            min_acceptance: 1e-3,
            bump_width: (0.02, 0.3),
            max_bumps: 4,
            edge_suppression: 1e-6,
            sigma_floor: 1e-2,
        }
    }
}

/// A normalized mixture of gaussian bumps on `[e_min, e_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpMixture {
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BumpMixture {
    /// `ln f(e)`, finite even far outside every bump.
    pub fn log_eval(&self, e: f64) -> f64 {
        let terms: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.widths)
            .zip(&self.weights)
            .map(|((c, w), a)| a.ln() - 0.5 * ((e - c) / w).powi(2))
            .collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }

    pub fn eval(&self, e: f64) -> f64 {
        self.log_eval(e).exp()
    }

    fn shift(&mut self, by: f64) {
        for c in &mut self.centers {
            *c += by;
        }
    }

    /// `∫E f / ∫f` over `[e_min, e_max]` on a fine trapezoid grid.
    pub fn mean_energy(&self, e_min: f64, e_max: f64) -> f64 {
        const GRID: usize = 1024;
        let h = (e_max - e_min) / GRID as f64;
        let grid: Vec<(f64, f64)> = (0..=GRID)
            .map(|k| {
                let e = e_min + k as f64 * h;
                let end = if k == 0 || k == GRID {
                    0.5f64.ln()
                } else {
                    0.0
                };
                (e, self.log_eval(e) + end)
            })
            .collect();
        let top = grid.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut m) = (0.0, 0.0);
        for (e, l) in grid {
            let w = (l - top).exp();
            z += w;
            m += w * e;
        }
        m / z
    }
}

fn flat_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Draw a bump mixture whose mean energy over `[e_min, e_max]` is moved to a
/// uniform target inside the window.
pub fn draw_bump_mixture<R: Rng + ?Sized>(
    e_min: f64,
    e_max: f64,
    w: &EnergyWindow,
    settings: &StandardizeSettings,
    rng: &mut R,
) -> BumpMixture {
    let breadth = e_max - e_min;
    let k = rng.random_range(1..=settings.max_bumps);
    let (lo, hi) = settings.bump_width;
    let mut f = BumpMixture {
        centers: (0..k).map(|_| rng.random_range(e_min..e_max)).collect(),
        widths: (0..k).map(|_| rng.random_range(lo..hi) * breadth).collect(),
        weights: flat_simplex(k, rng),
    };
    let target = rng.random_range(w.eps_min..w.eps_max);
    // the truncated mean is increasing in a rigid shift and runs from e_min
    // to e_max, so bisection on the shift always lands on target
    let base = f.centers.clone();
    let (mut lo, mut hi) = (-2.0 * breadth, 2.0 * breadth);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        f.centers.copy_from_slice(&base);
        f.shift(mid);
        if f.mean_energy(e_min, e_max) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * breadth {
            break;
        }
    }
    f.centers.copy_from_slice(&base);
    f.shift(0.5 * (lo + hi));
    f
}

fn summarize<R: Rng + ?Sized>(
    values: Vec<f64>,
    proposals: usize,
    settings: &StandardizeSettings,
    rng: &mut R,
) -> Result<StandardOfComparison> {
    let summary = bootstrap(&values, settings.n_resamples, rng.random())?;
    Ok(StandardOfComparison {
        values,
        summary,
        proposals,
    })
}

fn too_tight(accepted: usize, proposals: usize, settings: &StandardizeSettings) -> bool {
    proposals >= settings.max_proposals
        && (accepted as f64) < settings.min_acceptance * proposals as f64
}

/// Variant I: orthodox states `f_γ(H)/Tr f_γ(H)` from random bump mixtures,
/// kept when `⟨H⟩` is inside the window.
pub fn standardize_variant1<R: Rng + ?Sized>(
    eigen: &EigenDecomposition,
    x: &Observable,
    w: &EnergyWindow,
    n_target: usize,
    settings: &StandardizeSettings,
    rng: &mut R,
) -> Result<StandardOfComparison> {
    check_dim(eigen.dim(), x.dim())?;
    let x_diag = eigen.diagonal_elements(x.matrix());
    let (e_min, e_max) = (eigen.min_energy(), eigen.max_energy());
    let mut values = Vec::with_capacity(n_target);
    let mut proposals = 0;
    while values.len() < n_target {
        if too_tight(values.len(), proposals, settings) || proposals >= 100 * settings.max_proposals
        {
            return Err(Error::WindowTooTight {
                accepted: values.len(),
                proposals,
            });
        }
        proposals += 1;
        let f = draw_bump_mixture(e_min, e_max, w, settings, rng);
        let log_w: Vec<f64> = eigen.energies.iter().map(|&e| f.log_eval(e)).collect();
        let state = OrthodoxMixedState::from_log_weights(&log_w, eigen)?;
        if w.contains(state.energy()) {
            values.push(state.expectation_from_diagonal(&x_diag));
        }
    }
    summarize(values, proposals, settings, rng)
}

/// Variant II: gaussian orthodox states with `ε` in the window and `σ` small
/// enough to suppress both window edges, kept when `⟨H⟩ ± √var(H)` stays
/// inside.
pub fn standardize_variant2<R: Rng + ?Sized>(
    eigen: &EigenDecomposition,
    x: &Observable,
    w: &EnergyWindow,
    n_target: usize,
    settings: &StandardizeSettings,
    rng: &mut R,
) -> Result<StandardOfComparison> {
    check_dim(eigen.dim(), x.dim())?;
    let x_diag = eigen.diagonal_elements(x.matrix());
    let breadth = eigen.breadth();
    let sigma_min = settings.sigma_floor * breadth;
    let edge_scale = (-settings.edge_suppression.ln()).sqrt();
    let mut values = Vec::with_capacity(n_target);
    let mut proposals = 0;
    while values.len() < n_target {
        if too_tight(values.len(), proposals, settings) || proposals >= 100 * settings.max_proposals
        {
            return Err(Error::WindowTooTight {
                accepted: values.len(),
                proposals,
            });
        }
        proposals += 1;
        let (eps, sigma) = match draw_gaussian_params(w, sigma_min, edge_scale, rng) {
            Some(p) => p,
            None => continue,
        };
        let log_w: Vec<f64> = eigen
            .energies
            .iter()
            .map(|&e| -((e - eps) / sigma).powi(2))
            .collect();
        let state = OrthodoxMixedState::from_log_weights(&log_w, eigen)?;
        let mean = state.energy();
        let sd = state.energy_variance().sqrt();
        if w.contains_interval(mean - sd, mean + sd) {
            values.push(state.expectation_from_diagonal(&x_diag));
        }
    }
    summarize(values, proposals, settings, rng)
}

/// `ε` uniform in the window, `σ` log-uniform in `[σ_min, σ_max(ε)]` where
/// `σ_max` meets the edge suppression bound. `None` when `ε` is too close to
/// an edge for any allowed `σ`.
pub fn draw_gaussian_params<R: Rng + ?Sized>(
    w: &EnergyWindow,
    sigma_min: f64,
    edge_scale: f64,
    rng: &mut R,
) -> Option<(f64, f64)> {
    let eps = rng.random_range(w.eps_min..w.eps_max);
    let sigma_max = (eps - w.eps_min).min(w.eps_max - eps) / edge_scale;
    if sigma_max <= sigma_min {
        return None;
    }
    let s = rng.random_range(sigma_min.ln()..sigma_max.ln()).exp();
    Some((eps, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ladder(n: usize) -> EigenDecomposition {
        EigenDecomposition::new((0..n).map(|k| k as f64).collect(), CMatrix::identity(n, n))
            .unwrap()
    }

    #[test]
    fn bump_mean_lands_in_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = EnergyWindow::new(1.0, 2.5).unwrap();
        for _ in 0..50 {
            let f = draw_bump_mixture(0.0, 10.0, &w, &StandardizeSettings::default(), &mut rng);
            let m = f.mean_energy(0.0, 10.0);
            assert!(m > 0.99 && m < 2.51, "{m}");
        }
    }

    #[test]
    fn variant1_accepts_only_window_states() {
        let eig = ladder(40);
        let x = Observable::from_diagonal(&(0..40).map(|k| k as f64).collect::<Vec<_>>());
        let w = EnergyWindow::new(10.0, 16.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = standardize_variant1(&eig, &x, &w, 200, &StandardizeSettings::default(), &mut rng)
            .unwrap();
        assert_eq!(s.accepted(), 200);
        // x = H here, so every accepted value is the state's energy
        assert!(s.values.iter().all(|&v| w.contains(v)));
        assert!(s.proposals >= 200);
    }

    #[test]
    fn variant2_respects_uncertainty_bound() {
        let eig = ladder(60);
        let x = Observable::from_diagonal(&(0..60).map(|k| k as f64).collect::<Vec<_>>());
        let w = EnergyWindow::new(20.0, 29.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = standardize_variant2(&eig, &x, &w, 100, &StandardizeSettings::default(), &mut rng)
            .unwrap();
        assert!(s.values.iter().all(|&v| (20.0..=29.0).contains(&v)));
    }

    #[test]
    fn sigma_respects_edge_suppression() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = EnergyWindow::new(0.0, 1.0).unwrap();
        let scale = (1e6f64).ln().sqrt();
        for _ in 0..1000 {
            if let Some((eps, sigma)) = draw_gaussian_params(&w, 1e-3, scale, &mut rng) {
                assert!((-((eps / sigma).powi(2))).exp() <= 1.000001e-6);
                assert!((-(((1.0 - eps) / sigma).powi(2))).exp() <= 1.000001e-6);
            }
        }
    }

    #[test]
    fn impossible_window_is_too_tight() {
        let eig = ladder(10);
        let x = Observable::identity(10);
        // no orthodox state can have its mean strictly between two adjacent
        // levels with zero spread, and the level spacing exceeds the window
        let w = EnergyWindow::new(4.2, 4.3).unwrap();
        let settings = StandardizeSettings {
            max_proposals: 2000,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = standardize_variant2(&eig, &x, &w, 10, &settings, &mut rng);
        assert!(matches!(r, Err(Error::WindowTooTight { .. })));
    }
}
