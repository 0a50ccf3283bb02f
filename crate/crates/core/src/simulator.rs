//! The system under test: an emulated quantum simulator for a (possibly
//! corrupted) member of the lattice family, reachable only through
//! [`SimulatorHandle`].

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::{build_family, EigenDecomposition, LatticeSpec};
use crate::linalg::{CMatrix, CVector, SparseRows, C64};
use crate::quantum::{Observable, PureState};

/// What a benchmarking protocol may ask of a simulator.
///
/// Responses depend only on the arguments; nothing about the simulation
/// Hamiltonian is exposed beyond these measurements.
pub trait SimulatorHandle: Send + Sync {
    fn dim(&self) -> usize;

    /// `⟨ψ|H_s|ψ⟩`.
    fn energy(&self, psi: &PureState) -> Result<f64>;

    /// `⟨ψ|e^{iH_s t} O e^{−iH_s t}|ψ⟩`.
    fn expectation(&self, psi: &PureState, o: &Observable, t: f64) -> Result<f64>;

    /// [`expectation`](Self::expectation) at many times.
    fn expectation_series(
        &self,
        psi: &PureState,
        o: &Observable,
        times: &[f64],
    ) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.expectation(psi, o, t)).collect()
    }

    /// Prepare a state by evolving `initial` for time `tau` under the
    /// interpolating Hamiltonian `(H_s − H_i)(t/τ) + H_i`.
    fn anneal(&self, h_i: &Observable, initial: &PureState, tau: f64) -> Result<PureState>;
}

/// Corrupted member `H_f(ω₀, λ)` with `λ = η ω₀ / a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptedSpec {
    pub omega0: f64,
    pub eta: f64,
    pub a: f64,
}

impl CorruptedSpec {
    pub fn new(omega0: f64, eta: f64, a: f64) -> Self {
        CorruptedSpec { omega0, eta, a }
    }

    pub fn from_lambda(omega0: f64, lambda: f64, a: f64) -> Self {
        CorruptedSpec {
            omega0,
            eta: a * lambda / omega0,
            a,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.eta * self.omega0 / self.a
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditCounts {
    pub energy_calls: u64,
    /// Number of time points evaluated, over single and batched queries.
    pub expectation_points: u64,
    pub anneal_calls: u64,
    pub backdoor_calls: u64,
}

#[derive(Debug, Default)]
struct Counters {
    energy: AtomicU64,
    expectation: AtomicU64,
    anneal: AtomicU64,
    backdoor: AtomicU64,
}

/// Largest `‖H‖·δt` allowed in one annealing step.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

/// Exact eigenbasis emulation of `H_s`.
#[derive(Debug)]
pub struct ExactSimulator {
    eigen: EigenDecomposition,
    sparse: SparseRows,
    norm_bound: f64,
    counters: Counters,
}

impl ExactSimulator {
    pub fn from_matrix(h_s: &CMatrix) -> Result<Self> {
        let eigen = EigenDecomposition::from_hermitian(h_s)?;
        Ok(ExactSimulator {
            norm_bound: row_sum_bound(h_s),
            sparse: SparseRows::from_dense(h_s),
            eigen,
            counters: Counters::default(),
        })
    }

    pub fn audit(&self) -> AuditCounts {
        AuditCounts {
            energy_calls: self.counters.energy.load(Ordering::Relaxed),
            expectation_points: self.counters.expectation.load(Ordering::Relaxed),
            anneal_calls: self.counters.anneal.load(Ordering::Relaxed),
            backdoor_calls: self.counters.backdoor.load(Ordering::Relaxed),
        }
    }

    /// Exact `Ω̂_s` for checking a protocol against ground truth.
    #[cfg(any(test, feature = "backdoor"))]
    pub fn simulated_time_averaged_observable(&self, o: &Observable) -> Result<Observable> {
        self.counters.backdoor.fetch_add(1, Ordering::Relaxed);
        let tol = crate::quantum::default_degeneracy_tol(&self.eigen);
        crate::quantum::time_averaged_observable(o, &self.eigen, tol)
    }

    /// Exact simulation spectrum, for tests that need ground truth.
    #[cfg(any(test, feature = "backdoor"))]
    pub fn simulation_eigen(&self) -> &EigenDecomposition {
        self.counters.backdoor.fetch_add(1, Ordering::Relaxed);
        &self.eigen
    }

    fn apply_h(&self, v: &[C64], out: &mut [C64]) {
        self.sparse.mul_into(v, out);
    }
}

fn row_sum_bound(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn make_target(spec: LatticeSpec, omega0: f64) -> Result<ExactSimulator> {
    make_corrupted(spec, omega0, 0.0)
}

pub fn make_corrupted(spec: LatticeSpec, omega0: f64, eta: f64) -> Result<ExactSimulator> {
    let c = CorruptedSpec::new(omega0, eta, spec.a);
    let h = build_family(spec, omega0, c.lambda())?;
    ExactSimulator::from_matrix(h.matrix())
}

pub fn simulated_expectation(
    handle: &dyn SimulatorHandle,
    psi: &PureState,
    o: &Observable,
    t: f64,
) -> Result<f64> {
    handle.expectation(psi, o, t)
}

const SERIES_CHUNK: usize = 256;

/// `⟨ψ(t)|O|ψ(t)⟩` on a list of times, evolving in the eigenbasis of `eigen`.
///
/// Diagonal observables are measured in the position basis after one
/// matrix product per chunk of times; others go through `V†OV`.
pub fn expectation_series_exact(
    eigen: &EigenDecomposition,
    psi: &PureState,
    o: &Observable,
    times: &[f64],
) -> Result<Vec<f64>> {
    let n = eigen.dim();
    check_dim(n, psi.dim())?;
    check_dim(n, o.dim())?;
    let coeffs = eigen.coefficients(psi.amplitudes());
    let mut out = Vec::with_capacity(times.len());
    let o_eig = if o.diagonal().is_none() {
        Some(eigen.to_eigenbasis(o.matrix()))
    } else {
        None
    };
    for chunk in times.chunks(SERIES_CHUNK) {
        let k = chunk.len();
        let mut re = DMatrix::<f64>::zeros(n, k);
        let mut im = DMatrix::<f64>::zeros(n, k);
        for (j, &t) in chunk.iter().enumerate() {
            for a in 0..n {
                let z = coeffs[a] * C64::from_polar(1.0, -eigen.energies[a] * t);
                re[(a, j)] = z.re;
                im[(a, j)] = z.im;
            }
        }
        match (&o_eig, o.diagonal(), eigen.real_vectors()) {
            (None, Some(diag), Some(v)) => {
                let pr = v * &re;
                let pi = v * &im;
                for j in 0..k {
                    let mut acc = 0.0;
                    for x in 0..n {
                        acc += diag[x] * (pr[(x, j)] * pr[(x, j)] + pi[(x, j)] * pi[(x, j)]);
                    }
                    out.push(acc);
                }
            }
            (None, Some(diag), None) => {
                let d = CMatrix::from_fn(n, k, |a, j| C64::new(re[(a, j)], im[(a, j)]));
                let p = &eigen.vectors * d;
                for j in 0..k {
                    out.push((0..n).map(|x| diag[x] * p[(x, j)].norm_sqr()).sum());
                }
            }
            (Some(oe), _, _) => {
                let d = CMatrix::from_fn(n, k, |a, j| C64::new(re[(a, j)], im[(a, j)]));
                let od = oe * &d;
                for j in 0..k {
                    let v: C64 = (0..n).map(|a| d[(a, j)].conj() * od[(a, j)]).sum();
                    if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
                        return Err(Error::NumericFailure(format!(
                            "expectation has imaginary part {:.3e}",
                            v.im
                        )));
                    }
                    out.push(v.re);
                }
            }
            (None, None, _) => unreachable!(),
        }
    }
    Ok(out)
}

impl SimulatorHandle for ExactSimulator {
    fn dim(&self) -> usize {
        self.eigen.dim()
    }

    fn energy(&self, psi: &PureState) -> Result<f64> {
        self.counters.energy.fetch_add(1, Ordering::Relaxed);
        check_dim(self.dim(), psi.dim())?;
        let v = psi.amplitudes().as_slice();
        let mut hv = vec![C64::new(0.0, 0.0); v.len()];
        self.apply_h(v, &mut hv);
        Ok(v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum())
    }

    fn expectation(&self, psi: &PureState, o: &Observable, t: f64) -> Result<f64> {
        Ok(self.expectation_series(psi, o, &[t])?[0])
    }

    fn expectation_series(
        &self,
        psi: &PureState,
        o: &Observable,
        times: &[f64],
    ) -> Result<Vec<f64>> {
        self.counters
            .expectation
            .fetch_add(times.len() as u64, Ordering::Relaxed);
        expectation_series_exact(&self.eigen, psi, o, times)
    }

    fn anneal(&self, h_i: &Observable, initial: &PureState, tau: f64) -> Result<PureState> {
        self.counters.anneal.fetch_add(1, Ordering::Relaxed);
        let n = self.dim();
        check_dim(n, h_i.dim())?;
        check_dim(n, initial.dim())?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!(
                "annealing time must be positive, got {tau}"
            )));
        }
        let hi = SparseRows::from_dense(h_i.matrix());
        let bound = self.norm_bound.max(row_sum_bound(h_i.matrix()));
        let steps = ((tau * bound / MAX_PHASE_PER_STEP).ceil() as usize).max(1);
        let dt = tau / steps as f64;
        let mut psi: Vec<C64> = initial.amplitudes().iter().copied().collect();
        let mut term = psi.clone();
        let mut next = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); n];
        for step in 0..steps {
            let s = (step as f64 + 0.5) / steps as f64;
            term.copy_from_slice(&psi);
            // Taylor series of exp(−i H_p δt) applied to ψ
            for order in 1..=40 {
                self.apply_h(&term, &mut next);
                hi.mul_into(&term, &mut scratch);
                let f = C64::new(0.0, -dt / order as f64);
                let mut norm = 0.0;
                for x in 0..n {
                    term[x] = f * (s * next[x] + (1.0 - s) * scratch[x]);
                    psi[x] += term[x];
                    norm += term[x].norm_sqr();
                }
                if norm < 1e-34 {
                    break;
                }
            }
        }
        let v = CVector::from_vec(psi);
        let drift = (v.norm() - 1.0).abs();
        if drift > 1e-8 {
            return Err(Error::NumericFailure(format!(
                "annealing propagator lost unitarity: norm drift {drift:.3e} over {steps} steps"
            )));
        }
        PureState::normalized(v)
    }
}
