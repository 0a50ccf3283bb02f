//! States, observables, real-time evolution and the time-averaged
//! observable, plus orthodox mixed states (density matrices that commute
//! with a reference Hamiltonian).

use once_cell::sync::OnceCell;

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::EigenDecomposition;
use crate::linalg::{self, c, CMatrix, CVector, C64};

const STATE_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Wraps an already-normalized amplitude vector.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { amplitudes })
    }

    pub fn normalized(mut amplitudes: CVector) -> Result<Self> {
        linalg::normalize(&mut amplitudes)?;
        Ok(PureState { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0);
        PureState { amplitudes: v }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Checks hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if linalg::hermiticity_error(&matrix) > STATE_TOL {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = linalg::trace(&matrix);
        if (tr - c(1.0)).norm() > STATE_TOL {
            return Err(Error::invalid(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        let (vals, _) = linalg::eigh(&matrix)?;
        if vals[0] < -STATE_TOL {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(DensityMatrix { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix {
            matrix: psi.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// A Hermitian operator. Diagonal (position-basis) observables are
/// recognised at construction and take cheaper code paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    diagonal: Option<Vec<f64>>,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if linalg::hermiticity_error(&matrix) > STATE_TOL {
            return Err(Error::invalid("observable is not Hermitian"));
        }
        let n = matrix.nrows();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || matrix[(i, j)] == c(0.0)));
        let diagonal = is_diag.then(|| (0..n).map(|i| matrix[(i, i)].re).collect());
        Ok(Observable { matrix, diagonal })
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let matrix = CMatrix::from_diagonal(&CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v)),
        ));
        Observable {
            matrix,
            diagonal: Some(values.to_vec()),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Position-basis diagonal, if the matrix has no off-diagonal entries.
    pub fn diagonal(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    /// Largest absolute eigenvalue bound (max row sum).
    pub fn norm_bound(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Anything that assigns expectation values to observables.
pub trait QuantumState {
    fn dim(&self) -> usize;
    fn expectation_of(&self, o: &CMatrix) -> Result<f64>;
}

impl QuantumState for PureState {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn expectation_of(&self, o: &CMatrix) -> Result<f64> {
        check_dim(self.dim(), o.nrows())?;
        let v = self.amplitudes.dotc(&(o * &self.amplitudes));
        Ok(real_part_checked(v, o.norm()))
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn expectation_of(&self, o: &CMatrix) -> Result<f64> {
        check_dim(self.dim(), o.nrows())?;
        let v = linalg::trace_product(&self.matrix, o);
        Ok(real_part_checked(v, o.norm()))
    }
}

fn real_part_checked(v: C64, scale: f64) -> f64 {
    assert!(
        v.im.abs() <= IMAG_TOL * scale.max(1.0),
        "expectation value has imaginary residue {}",
        v.im
    );
    v.re
}

/// `e^{iHt} O e^{−iHt}`, evaluated in the eigenbasis of `H`.
pub fn evolve_observable(o: &Observable, eigen: &EigenDecomposition, t: f64) -> Result<Observable> {
    check_dim(eigen.dim(), o.dim())?;
    let mut m = eigen.to_eigenbasis(o.matrix());
    let e = &eigen.energies;
    for a in 0..e.len() {
        for b in 0..e.len() {
            m[(a, b)] *= C64::from_polar(1.0, -t * (e[b] - e[a]));
        }
    }
    let back = eigen.from_eigenbasis(&m);
    Ok(Observable {
        diagonal: None,
        matrix: hermitize(back),
    })
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()).unscale(2.0)
}

pub fn default_degeneracy_tol(eigen: &EigenDecomposition) -> f64 {
    1e-9 * eigen.breadth()
}

/// Infinite-time average of `O(t)`: the block-diagonal part of `O` over
/// clusters of eigenvalues separated by at most `degeneracy_tol`. For a
/// nondegenerate spectrum this is `Σ_α O_αα |α⟩⟨α|`.
pub fn time_averaged_observable(
    o: &Observable,
    eigen: &EigenDecomposition,
    degeneracy_tol: f64,
) -> Result<Observable> {
    check_dim(eigen.dim(), o.dim())?;
    if !(degeneracy_tol >= 0.0) {
        return Err(Error::invalid("degeneracy tolerance must be non-negative"));
    }
    let full = eigen.to_eigenbasis(o.matrix());
    let n = eigen.dim();
    let mut block = CMatrix::zeros(n, n);
    for cluster in eigen.clusters(degeneracy_tol) {
        for a in cluster.clone() {
            for b in cluster.clone() {
                block[(a, b)] = full[(a, b)];
            }
        }
    }
    Observable::new(hermitize(eigen.from_eigenbasis(&block)))
}

pub fn expectation_pure(psi: &PureState, o: &Observable) -> Result<f64> {
    check_dim(psi.dim(), o.dim())?;
    if let Some(d) = o.diagonal() {
        return Ok(psi
            .amplitudes
            .iter()
            .zip(d)
            .map(|(z, &v)| z.norm_sqr() * v)
            .sum());
    }
    psi.expectation_of(o.matrix())
}

pub fn expectation_mixed(rho: &DensityMatrix, o: &Observable) -> Result<f64> {
    rho.expectation_of(o.matrix())
}

/// `⟨O²⟩ − ⟨O⟩²`, clamped at zero against rounding.
pub fn variance_of<S: QuantumState>(o: &Observable, state: &S) -> Result<f64> {
    check_dim(state.dim(), o.dim())?;
    let mean = state.expectation_of(o.matrix())?;
    let sq = state.expectation_of(&(o.matrix() * o.matrix()))?;
    let var = sq - mean * mean;
    if var < -STATE_TOL * (1.0 + sq.abs()) {
        return Err(Error::NumericFailure(format!("negative variance {var}")));
    }
    Ok(var.max(0.0))
}

/// A density matrix diagonal in the eigenbasis of a reference Hamiltonian,
/// stored as its eigenbasis weights `P̃_α`.
#[derive(Debug, Clone)]
pub struct OrthodoxMixedState<'a> {
    weights: Vec<f64>,
    eigen: &'a EigenDecomposition,
    density: OnceCell<DensityMatrix>,
}

impl<'a> OrthodoxMixedState<'a> {
    /// Normalizes non-negative weights over the eigenbasis.
    pub fn from_weights(weights: Vec<f64>, eigen: &'a EigenDecomposition) -> Result<Self> {
        check_dim(eigen.dim(), weights.len())?;
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid(
                "orthodox weights must be finite and non-negative",
            ));
        }
        let top = weights.iter().cloned().fold(0.0, f64::max);
        if top <= 0.0 {
            return Err(Error::DegenerateFunction);
        }
        // scale by the largest weight before summing so tiny/huge inputs survive
        let scaled: Vec<f64> = weights.iter().map(|w| w / top).collect();
        let z: f64 = scaled.iter().sum();
        Ok(OrthodoxMixedState {
            weights: scaled.into_iter().map(|w| w / z).collect(),
            eigen,
            density: OnceCell::new(),
        })
    }

    /// Weights `∝ exp(log_w)`, with the largest exponent subtracted first.
    pub fn from_log_weights(log_w: &[f64], eigen: &'a EigenDecomposition) -> Result<Self> {
        let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::DegenerateFunction);
        }
        Self::from_weights(log_w.iter().map(|l| (l - top).exp()).collect(), eigen)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        self.eigen
    }

    pub fn density(&self) -> &DensityMatrix {
        self.density.get_or_init(|| {
            let n = self.weights.len();
            let d = CMatrix::from_diagonal(&CVector::from_iterator(
                n,
                self.weights.iter().map(|&w| c(w)),
            ));
            DensityMatrix::new_unchecked(hermitize(self.eigen.from_eigenbasis(&d)))
        })
    }

    /// `Σ_α P̃_α O_αα` given precomputed eigenbasis diagonal elements.
    pub fn expectation_from_diagonal(&self, diag: &[f64]) -> f64 {
        self.weights.iter().zip(diag).map(|(w, o)| w * o).sum()
    }

    pub fn energy(&self) -> f64 {
        self.expectation_from_diagonal(&self.eigen.energies)
    }

    pub fn energy_variance(&self) -> f64 {
        let mean = self.energy();
        let sq: f64 = self
            .weights
            .iter()
            .zip(&self.eigen.energies)
            .map(|(w, e)| w * e * e)
            .sum();
        (sq - mean * mean).max(0.0)
    }

    pub fn expectation(&self, o: &Observable) -> Result<f64> {
        check_dim(self.eigen.dim(), o.dim())?;
        Ok(self.expectation_from_diagonal(&self.eigen.diagonal_elements(o.matrix())))
    }
}

/// `ρ̃(f) = f(H)/Tr f(H)`.
pub fn orthodox_from_function<'a, F: Fn(f64) -> f64>(
    f: F,
    eigen: &'a EigenDecomposition,
) -> Result<OrthodoxMixedState<'a>> {
    let weights: Vec<f64> = eigen.energies.iter().map(|&e| f(e)).collect();
    OrthodoxMixedState::from_weights(weights, eigen)
}

/// `ρ̃_g(ε, σ) ∝ exp(−((H − ε)/σ)²)`.
pub fn gaussian_orthodox<'a>(
    eps: f64,
    sigma: f64,
    eigen: &'a EigenDecomposition,
) -> Result<OrthodoxMixedState<'a>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!(
            "gaussian width must be positive, got {sigma}"
        )));
    }
    let log_w: Vec<f64> = eigen
        .energies
        .iter()
        .map(|&e| -((e - eps) / sigma).powi(2))
        .collect();
    OrthodoxMixedState::from_log_weights(&log_w, eigen)
}

/// `|ψ(f)⟩ = Σ_α e^{iφ_α} √(f(ℰ_α)/Z) |α⟩`.
pub fn direct_benchmark_state<F: Fn(f64) -> f64>(
    f: F,
    phases: &[f64],
    eigen: &EigenDecomposition,
) -> Result<PureState> {
    check_dim(eigen.dim(), phases.len())?;
    let rho = orthodox_from_function(f, eigen)?;
    let coeffs = CVector::from_iterator(
        eigen.dim(),
        rho.weights()
            .iter()
            .zip(phases)
            .map(|(&w, &phi)| C64::from_polar(w.sqrt(), phi)),
    );
    PureState::normalized(eigen.from_coefficients(&coeffs))
}

/// Eigenbasis populations `|c_α|²` of a pure state.
pub fn populations(psi: &PureState, eigen: &EigenDecomposition) -> Result<Vec<f64>> {
    check_dim(eigen.dim(), psi.dim())?;
    Ok(eigen
        .coefficients(psi.amplitudes())
        .iter()
        .map(|z| z.norm_sqr())
        .collect())
}
