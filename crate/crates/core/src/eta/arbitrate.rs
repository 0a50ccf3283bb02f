//! Preparing benchmarking states through the simulator and measuring their
//! time-averaged values: the simulation diagnostic.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::OnceCell;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::standardize::{draw_bump_mixture, StandardizeSettings};
use super::time_average::{detect_gaps, time_average_simulated, PeakSettings, TimeAveraging};
use super::window::EnergyWindow;
use crate::coarse_grain::haar_sample_pure;
use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::EigenDecomposition;
use crate::linalg::{CVector, C64};
use crate::quantum::{Observable, PureState};
use crate::simulator::SimulatorHandle;
use crate::stats::{bootstrap, BootstrapSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDiagnostic {
    pub values: Vec<f64>,
    pub summary: BootstrapSummary,
    /// Edge states optimized (Variant I) or schedules drawn (Variant II).
    pub attempts: usize,
    /// Distinct prepared states behind `values`.
    pub distinct: usize,
    /// Values whose time average hit its doubling budget.
    pub non_converged: usize,
}

impl SimulationDiagnostic {
    pub fn accepted(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbitrationSettings {
    pub time: TimeAveraging,
    pub peaks: PeakSettings,
    pub n_resamples: usize,
    /// Rotation layers in the variational ansatz.
    pub depth: usize,
    pub golden_iters: usize,
    pub max_sweeps: usize,
    /// Sweeps stop once the cost improves by less than this times `Δ_B`.
    pub sweep_tol: f64,
    /// The optimizer stops once an edge state has produced this many
    /// in-window iterates.
    pub harvest_cap: usize,
    /// Edge states are redrawn up to this many times while the simulator
    /// puts them outside the window; the last draw goes to the optimizer.
    pub edge_redraws: usize,
    pub max_edge_states: usize,
    pub max_draws: usize,
}

impl ArbitrationSettings {
    pub fn standard(delta_b: f64) -> Result<Self> {
        Ok(ArbitrationSettings {
            time: TimeAveraging::standard(delta_b)?,
            peaks: PeakSettings {
                rel_threshold: 1e-3,
                abs_threshold: 1e-5,
                min_gap: 0.02 * delta_b,
            },
            n_resamples: 1000,
            depth: 8,
            golden_iters: 16,
            max_sweeps: 200,
            sweep_tol: 1e-6,
            harvest_cap: 1,
            edge_redraws: 4,
            max_edge_states: 100_000,
            max_draws: 1_000_000,
        })
    }
}

fn summarize<R: Rng + ?Sized>(
    values: Vec<f64>,
    attempts: usize,
    distinct: usize,
    non_converged: usize,
    n_resamples: usize,
    rng: &mut R,
) -> Result<SimulationDiagnostic> {
    let summary = bootstrap(&values, n_resamples, rng.random())?;
    Ok(SimulationDiagnostic {
        values,
        summary,
        attempts,
        distinct,
        non_converged,
    })
}

/// `Û(p)|ψ_e⟩` built from two-level rotations
/// `[[cos θ, −e^{iφ} sin θ], [e^{−iφ} sin θ, cos θ]]`.
///
/// Layer `ℓ` pairs sites that sit `2^ℓ` apart along `ring` (strides cycle
/// once they exceed the ring length), so a few layers already connect every
/// site to every other.
#[derive(Debug, Clone)]
pub struct VariationalAnsatz {
    pub edge_state: PureState,
    pairs: Vec<(usize, usize)>,
}

impl VariationalAnsatz {
    pub fn new(edge_state: PureState, ring: &[usize], depth: usize) -> Result<Self> {
        let n = edge_state.dim();
        check_dim(n, ring.len())?;
        let mut seen = vec![false; n];
        for &s in ring {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::invalid("ring must be a permutation of the sites"));
            }
        }
        let mut levels = 1;
        while (1usize << levels) < n {
            levels += 1;
        }
        let mut pairs = Vec::new();
        for layer in 0..depth {
            let stride = 1usize << (layer % levels);
            for k in 0..n {
                if (k / stride) % 2 == 0 && k + stride < n {
                    pairs.push((ring[k], ring[k + stride]));
                }
            }
        }
        Ok(VariationalAnsatz { edge_state, pairs })
    }

    pub fn n_params(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn n_rotations(&self) -> usize {
        self.pairs.len()
    }

    pub fn prepare(&self, params: &[f64]) -> Result<PureState> {
        check_dim(self.n_params(), params.len())?;
        let mut v: Vec<C64> = self.edge_state.amplitudes().iter().copied().collect();
        for (r, &(i, j)) in self.pairs.iter().enumerate() {
            let (s, c) = params[2 * r].sin_cos();
            let e = C64::from_polar(1.0, params[2 * r + 1]);
            let (a, b) = (v[i], v[j]);
            v[i] = c * a - e * s * b;
            v[j] = e.conj() * s * a + c * b;
        }
        // rotations are exactly unitary; this only removes rounding drift
        PureState::normalized(CVector::from_vec(v))
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[lo, hi]` with a fixed number of
/// shrink steps; returns the best point evaluated.
fn golden_section<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> Result<(f64, f64)> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

#[derive(Debug, Clone)]
pub struct OptimizerRun {
    pub best_cost: f64,
    pub sweeps: usize,
    /// Iterates with `⟨H_s⟩` inside the window, in visiting order.
    pub accessible: Vec<PureState>,
}

/// Coordinate search on `𝒞_e(p) = |⟨H_s⟩ − window center|`, starting from the
/// identity, recording accepted iterates that lie in the window until
/// `harvest_cap` of them are in hand.
pub fn optimize_edge_state(
    sim: &dyn SimulatorHandle,
    ansatz: &VariationalAnsatz,
    w: &EnergyWindow,
    settings: &ArbitrationSettings,
) -> Result<OptimizerRun> {
    let target = w.center();
    let tol = settings.sweep_tol * settings.time.delta_b;
    let mut p = vec![0.0; ansatz.n_params()];
    let mut e = sim.energy(&ansatz.prepare(&p)?)?;
    let mut cost = (e - target).abs();
    let mut accessible = Vec::new();
    if w.contains(e) {
        accessible.push(ansatz.prepare(&p)?);
    }
    let cap = settings.harvest_cap.max(1);
    let mut sweeps = 0;
    while sweeps < settings.max_sweeps && accessible.len() < cap {
        sweeps += 1;
        let start = cost;
        for j in 0..p.len() {
            let p0 = p[j];
            let mut trial = p.clone();
            let (x, c) = golden_section(
                |x| {
                    trial[j] = x;
                    Ok((sim.energy(&ansatz.prepare(&trial)?)? - target).abs())
                },
                p0 - std::f64::consts::PI,
                p0 + std::f64::consts::PI,
                settings.golden_iters,
            )?;
            if c < cost {
                p[j] = x;
                let psi = ansatz.prepare(&p)?;
                e = sim.energy(&psi)?;
                cost = (e - target).abs();
                if w.contains(e) {
                    accessible.push(psi);
                    if accessible.len() == cap {
                        break;
                    }
                }
            }
            // no later step can improve by tol or more
            if cost < tol {
                break;
            }
        }
        if start - cost < tol {
            break;
        }
    }
    Ok(OptimizerRun {
        best_cost: cost,
        sweeps,
        accessible,
    })
}

/// Where Variant I edge states come from.
#[derive(Debug, Clone, Copy)]
pub enum EdgeStates<'a> {
    /// Haar-random pure states.
    Haar,
    /// Direct benchmarking states `Σ e^{iφ_α} √f(ℰ_α) |α⟩` of the target,
    /// with `f` drawn like the Variant I standardization bumps and uniform
    /// phases.
    Direct {
        eigen: &'a EigenDecomposition,
        bumps: &'a StandardizeSettings,
    },
}

impl EdgeStates<'_> {
    pub fn draw<R: Rng + ?Sized>(
        &self,
        dim: usize,
        w: &EnergyWindow,
        rng: &mut R,
    ) -> Result<PureState> {
        match *self {
            EdgeStates::Haar => haar_sample_pure(dim, rng),
            EdgeStates::Direct { eigen, bumps } => {
                check_dim(eigen.dim(), dim)?;
                let f = draw_bump_mixture(eigen.min_energy(), eigen.max_energy(), w, bumps, rng);
                let log_w: Vec<f64> = eigen.energies.iter().map(|&e| f.log_eval(e)).collect();
                let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let phases: Vec<f64> = (0..dim)
                    .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                    .collect();
                let coeffs = CVector::from_iterator(
                    dim,
                    log_w
                        .iter()
                        .zip(&phases)
                        .map(|(l, &phi)| C64::from_polar((0.5 * (l - top)).exp(), phi)),
                );
                PureState::normalized(eigen.from_coefficients(&coeffs))
            }
        }
    }
}

/// Variant I: edge states driven into the window by the variational ansatz;
/// harvested iterates are time-averaged through the simulator.
#[allow(clippy::too_many_arguments)]
pub fn arbitrate_variant1<R: Rng + ?Sized>(
    sim: &dyn SimulatorHandle,
    x: &Observable,
    w: &EnergyWindow,
    ring: &[usize],
    edges: EdgeStates<'_>,
    n_target: usize,
    settings: &ArbitrationSettings,
    rng: &mut R,
) -> Result<SimulationDiagnostic> {
    check_dim(sim.dim(), x.dim())?;
    let mut values = Vec::with_capacity(n_target);
    let (mut attempts, mut distinct, mut non_converged) = (0, 0, 0);
    let mut best_cost = f64::INFINITY;
    while values.len() < n_target && attempts < settings.max_edge_states {
        attempts += 1;
        let mut edge = edges.draw(sim.dim(), w, rng)?;
        for _ in 1..settings.edge_redraws {
            if w.contains(sim.energy(&edge)?) {
                break;
            }
            edge = edges.draw(sim.dim(), w, rng)?;
        }
        let ansatz = VariationalAnsatz::new(edge, ring, settings.depth)?;
        let run = optimize_edge_state(sim, &ansatz, w, settings)?;
        best_cost = best_cost.min(run.best_cost);
        for psi in run.accessible {
            if values.len() == n_target {
                break;
            }
            let ta = time_average_simulated(sim, &psi, x, &settings.time)?;
            distinct += 1;
            non_converged += usize::from(!ta.converged);
            values.push(ta.value);
        }
    }
    if values.is_empty() {
        return Err(Error::ArbitrationStarved {
            attempts,
            collected: 0,
            best_cost,
        });
    }
    summarize(
        values,
        attempts,
        distinct,
        non_converged,
        settings.n_resamples,
        rng,
    )
}

/// Diagonal `H_i` whose basis states are its known eigenstates: sites ranked
/// by `score` receive `levels` in ascending order.
#[derive(Debug, Clone)]
pub struct InitializingHamiltonian {
    diagonal: Vec<f64>,
    /// `order[n]` is the site carrying the `n`-th level.
    order: Vec<usize>,
}

impl InitializingHamiltonian {
    pub fn ranked(score: &[f64], levels: &[f64]) -> Result<Self> {
        check_dim(score.len(), levels.len())?;
        let mut order: Vec<usize> = (0..score.len()).collect();
        order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
        let mut sorted = levels.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut diagonal = vec![0.0; score.len()];
        for (n, &site) in order.iter().enumerate() {
            diagonal[site] = sorted[n];
        }
        Ok(InitializingHamiltonian { diagonal, order })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn observable(&self) -> Observable {
        Observable::from_diagonal(&self.diagonal)
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.diagonal[self.order[n]]
    }

    pub fn eigenstate(&self, n: usize) -> PureState {
        PureState::basis(self.dim(), self.order[n])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSchedule {
    pub level: usize,
    pub tau: f64,
}

/// The finite set `(n, τ)` is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpace {
    pub levels: Vec<usize>,
    pub taus: Vec<f64>,
}

impl ScheduleSpace {
    /// Known eigenstates whose initializing level lies in the window.
    pub fn window_levels(
        h_i: &InitializingHamiltonian,
        w: &EnergyWindow,
        taus: Vec<f64>,
    ) -> Result<Self> {
        let levels: Vec<usize> = (0..h_i.dim())
            .filter(|&n| w.contains_interval(h_i.eigenvalue(n), h_i.eigenvalue(n)))
            .collect();
        if levels.is_empty() || taus.is_empty() {
            return Err(Error::invalid("empty schedule space"));
        }
        Ok(ScheduleSpace { levels, taus })
    }

    pub fn size(&self) -> usize {
        self.levels.len() * self.taus.len()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> AdiabaticSchedule {
        AdiabaticSchedule {
            level: self.levels[rng.random_range(0..self.levels.len())],
            tau: self.taus[rng.random_range(0..self.taus.len())],
        }
    }
}

/// Everything measured on one prepared state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub energy: f64,
    pub value: f64,
    pub converged: bool,
    pub max_gap: f64,
}

impl AnnealOutcome {
    pub fn accepted(&self, w: &EnergyWindow) -> bool {
        w.contains_interval(self.energy - self.max_gap, self.energy + self.max_gap)
    }

    /// How far the gap-bound interval sticks out of the window.
    pub fn violation(&self, w: &EnergyWindow) -> f64 {
        ((w.eps_min - (self.energy - self.max_gap)).max(0.0))
            .max((self.energy + self.max_gap - w.eps_max).max(0.0))
    }
}

/// Outcomes are deterministic in `(n, τ)`, so one simulator's measurements
/// are shared between windows and seeds. A cache must only ever be used with
/// one simulator, observable and set of settings.
#[derive(Debug, Default)]
pub struct AnnealCache {
    outcomes: Mutex<HashMap<(usize, u64), Arc<OnceCell<AnnealOutcome>>>>,
}

impl AnnealCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of completed anneals.
    pub fn len(&self) -> usize {
        self.outcomes
            .lock()
            .map(|m| m.values().filter(|c| c.get().is_some()).count())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concurrent callers asking for the same schedule wait for a single
    /// anneal instead of repeating it.
    pub fn outcome(
        &self,
        sim: &dyn SimulatorHandle,
        h_i: &InitializingHamiltonian,
        x: &Observable,
        schedule: AdiabaticSchedule,
        settings: &ArbitrationSettings,
    ) -> Result<AnnealOutcome> {
        let key = (schedule.level, schedule.tau.to_bits());
        let cell = {
            let mut m = self
                .outcomes
                .lock()
                .map_err(|_| Error::NumericFailure("anneal cache poisoned".into()))?;
            m.entry(key).or_default().clone()
        };
        cell.get_or_try_init(|| prepare_and_measure(sim, h_i, x, schedule, settings))
            .copied()
    }
}

/// Anneal the `n`-th known eigenstate, then measure `⟨H_s⟩`, the time
/// average of `x` and the largest energy gap visible in its signal.
pub fn prepare_and_measure(
    sim: &dyn SimulatorHandle,
    h_i: &InitializingHamiltonian,
    x: &Observable,
    schedule: AdiabaticSchedule,
    settings: &ArbitrationSettings,
) -> Result<AnnealOutcome> {
    let psi = sim.anneal(
        &h_i.observable(),
        &h_i.eigenstate(schedule.level),
        schedule.tau,
    )?;
    let energy = sim.energy(&psi)?;
    let ta = time_average_simulated(sim, &psi, x, &settings.time)?;
    let gaps = detect_gaps(&ta.samples, ta.dt, &settings.peaks)?;
    Ok(AnnealOutcome {
        energy,
        value: ta.value,
        converged: ta.converged,
        max_gap: gaps.max_gap,
    })
}

/// Variant II: adiabatically prepared states accepted when the simulated
/// gap bound keeps their energy support inside the window.
#[allow(clippy::too_many_arguments)]
pub fn arbitrate_variant2<R: Rng + ?Sized>(
    sim: &dyn SimulatorHandle,
    x: &Observable,
    w: &EnergyWindow,
    h_i: &InitializingHamiltonian,
    space: &ScheduleSpace,
    cache: &AnnealCache,
    n_target: usize,
    settings: &ArbitrationSettings,
    rng: &mut R,
) -> Result<SimulationDiagnostic> {
    check_dim(sim.dim(), x.dim())?;
    check_dim(sim.dim(), h_i.dim())?;
    let mut values = Vec::with_capacity(n_target);
    let (mut attempts, mut non_converged) = (0, 0);
    let mut seen: HashMap<(usize, u64), bool> = HashMap::new();
    let mut best = f64::INFINITY;
    while values.len() < n_target && attempts < settings.max_draws {
        attempts += 1;
        let s = space.draw(rng);
        let o = cache.outcome(sim, h_i, x, s, settings)?;
        let ok = o.accepted(w);
        seen.insert((s.level, s.tau.to_bits()), ok);
        best = best.min(o.violation(w));
        if ok {
            non_converged += usize::from(!o.converged);
            values.push(o.value);
        } else if seen.len() == space.size() && !seen.values().any(|&a| a) {
            break;
        }
    }
    if values.is_empty() {
        return Err(Error::ArbitrationStarved {
            attempts,
            collected: 0,
            best_cost: best,
        });
    }
    let distinct = seen.values().filter(|&&a| a).count();
    summarize(
        values,
        attempts,
        distinct,
        non_converged,
        settings.n_resamples,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_family, LatticeSpec};
    use crate::simulator::make_target;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ansatz_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 13;
        let ring: Vec<usize> = (0..n).map(|k| (2 * k) % n).collect();
        let a = VariationalAnsatz::new(PureState::basis(n, 0), &ring, 5).unwrap();
        let params: Vec<f64> = (0..a.n_params())
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        // apply the same rotations to every basis vector and check U†U = 1
        let mut u = crate::linalg::CMatrix::zeros(n, n);
        for col in 0..n {
            let b = VariationalAnsatz::new(PureState::basis(n, col), &ring, 5).unwrap();
            let mut raw: Vec<C64> = b.edge_state.amplitudes().iter().copied().collect();
            for (r, &(i, j)) in b.pairs.iter().enumerate() {
                let (s, c) = params[2 * r].sin_cos();
                let e = C64::from_polar(1.0, params[2 * r + 1]);
                let (x, y) = (raw[i], raw[j]);
                raw[i] = c * x - e * s * y;
                raw[j] = e.conj() * s * x + c * y;
            }
            for row in 0..n {
                u[(row, col)] = raw[row];
            }
            let prepared = b.prepare(&params).unwrap();
            let diff: f64 = (0..n)
                .map(|k| (prepared.amplitudes()[k] - raw[k]).norm())
                .sum();
            assert!(diff < 1e-12);
        }
        let err = (u.adjoint() * &u - crate::linalg::CMatrix::identity(n, n)).norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn layers_reach_every_site() {
        let n = 11;
        let ring: Vec<usize> = (0..n).collect();
        let a = VariationalAnsatz::new(PureState::basis(n, 0), &ring, 4).unwrap();
        // connectivity of the rotation graph
        let mut reach = vec![false; n];
        reach[0] = true;
        for &(i, j) in &a.pairs {
            if reach[i] || reach[j] {
                reach[i] = true;
                reach[j] = true;
            }
        }
        assert!(reach.iter().all(|&r| r));
    }

    #[test]
    fn golden_section_finds_minimum() {
        let (x, fx) = golden_section(|x| Ok((x - 0.3).powi(2)), -1.0, 2.0, 40).unwrap();
        assert!((x - 0.3).abs() < 1e-6 && fx < 1e-12);
    }

    #[test]
    fn initializing_levels_follow_rank() {
        let h = InitializingHamiltonian::ranked(&[2.0, 0.0, 1.0], &[5.0, 1.0, 3.0]).unwrap();
        assert_eq!(h.observable().diagonal().unwrap(), &[5.0, 1.0, 3.0]);
        assert_eq!(h.eigenvalue(0), 1.0);
        assert_eq!(h.eigenstate(2).amplitudes()[0].re, 1.0);
    }

    fn small() -> (LatticeSpec, f64) {
        (LatticeSpec::new(6, 1.0, 1.0).unwrap(), 0.05)
    }

    #[test]
    fn variant1_states_land_in_window() {
        let (spec, omega) = small();
        let sim = make_target(spec, omega).unwrap();
        let h = build_family(spec, omega, 0.0).unwrap();
        let eig = h.eigen().unwrap();
        let w = super::super::window::select_window(
            eig.min_energy(),
            eig.max_energy(),
            super::super::WindowKind::Mid,
        )
        .unwrap();
        let x = Observable::from_diagonal(
            &spec
                .coordinates()
                .iter()
                .map(|v| v.abs().cbrt())
                .collect::<Vec<_>>(),
        );
        let n = spec.n_sites();
        let ring: Vec<usize> = (0..n).map(|k| (2 * k) % n).collect();
        let mut settings = ArbitrationSettings::standard(eig.breadth()).unwrap();
        settings.time.max_doublings = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = arbitrate_variant1(
            &sim,
            &x,
            &w,
            &ring,
            EdgeStates::Haar,
            12,
            &settings,
            &mut rng,
        )
        .unwrap();
        assert_eq!(d.accepted(), 12);
        assert!(d.attempts >= 3);
        let (lo, hi) = x
            .diagonal()
            .unwrap()
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(d.values.iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn variant2_cache_is_reused() {
        let (spec, omega) = small();
        let sim = make_target(spec, omega).unwrap();
        let h = build_family(spec, omega, 0.0).unwrap();
        let eig = h.eigen().unwrap();
        let w = super::super::window::select_window(
            eig.min_energy(),
            eig.max_energy(),
            super::super::WindowKind::Low,
        )
        .unwrap();
        let x = Observable::from_diagonal(
            &spec
                .coordinates()
                .iter()
                .map(|v| v.abs().cbrt())
                .collect::<Vec<_>>(),
        );
        let score: Vec<f64> = spec.coordinates().iter().map(|v| v.abs()).collect();
        let h_i = InitializingHamiltonian::ranked(&score, &eig.energies).unwrap();
        let space = ScheduleSpace::window_levels(&h_i, &w, vec![40.0 / eig.breadth()]).unwrap();
        let settings = ArbitrationSettings::standard(eig.breadth()).unwrap();
        let cache = AnnealCache::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let first = arbitrate_variant2(&sim, &x, &w, &h_i, &space, &cache, 20, &settings, &mut rng);
        let anneals = sim.audit().anneal_calls;
        assert!(anneals as usize <= space.size());
        if let Ok(d) = first {
            assert!(d.values.iter().all(|v| v.is_finite()));
        }
        let _ = arbitrate_variant2(&sim, &x, &w, &h_i, &space, &cache, 20, &settings, &mut rng);
        assert_eq!(sim.audit().anneal_calls, anneals);
    }
}
