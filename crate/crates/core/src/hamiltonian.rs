//! The lattice Hamiltonian family, its eigendecomposition, and the
//! extremum-energy sweep used to place energy windows.
//!
//! The family on a periodic lattice of `2N+1` sites is
//!
//! ```text
//! H_f(ω, λ) = −(1/2m)·[(T₋ − T₊)/(2a)]² + ½·ω·x² + λ·x³
//! ```
//!
//! where `T±` shift by one site with wraparound. Note the potential is
//! linear in `ω`: `ω` is a raw quadratic coefficient, not a squared
//! frequency.

use nalgebra::DMatrix;
use once_cell::sync::OnceCell;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Sites run over `-n_half..=n_half`.
    pub n_half: usize,
    /// Lattice spacing.
    pub a: f64,
    pub m: f64,
}

impl LatticeSpec {
    pub fn new(n_half: usize, a: f64, m: f64) -> Result<Self> {
        let spec = LatticeSpec { n_half, a, m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_half < 1 {
            return Err(Error::InvalidSpec("n_half must be at least 1".into()));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "lattice spacing must be positive, got {}",
                self.a
            )));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "mass must be positive, got {}",
                self.m
            )));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        2 * self.n_half + 1
    }

    /// Coordinate of the site stored at row `index`.
    pub fn coordinate(&self, index: usize) -> f64 {
        self.a * (index as f64 - self.n_half as f64)
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_sites()).map(|i| self.coordinate(i)).collect()
    }

    /// Site permutation `x ↦ −x`.
    pub fn parity_matrix(&self) -> CMatrix {
        let n = self.n_sites();
        CMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { c(1.0) } else { c(0.0) })
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub energies: Vec<f64>,
    /// Columns are the eigenvectors `|α⟩`.
    pub vectors: CMatrix,
    real_vectors: Option<DMatrix<f64>>,
}

impl EigenDecomposition {
    pub fn new(energies: Vec<f64>, vectors: CMatrix) -> Result<Self> {
        if vectors.nrows() != energies.len() || vectors.ncols() != energies.len() {
            return Err(Error::DimensionMismatch {
                expected: energies.len(),
                got: vectors.ncols(),
            });
        }
        if energies.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("energies must be sorted ascending"));
        }
        let real_vectors = linalg::is_real(&vectors).then(|| linalg::real_part(&vectors));
        Ok(EigenDecomposition {
            energies,
            vectors,
            real_vectors,
        })
    }

    /// Diagonalize any Hermitian matrix.
    pub fn from_hermitian(m: &CMatrix) -> Result<Self> {
        let (energies, vectors) = linalg::eigh(m)?;
        Self::new(energies, vectors)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// The eigenvectors as a real matrix, when they are real.
    pub fn real_vectors(&self) -> Option<&DMatrix<f64>> {
        self.real_vectors.as_ref()
    }

    pub fn min_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn max_energy(&self) -> f64 {
        self.energies[self.energies.len() - 1]
    }

    /// Energy breadth `ℰ_max − ℰ_min`.
    pub fn breadth(&self) -> f64 {
        self.max_energy() - self.min_energy()
    }

    /// Coefficients `c_α = ⟨α|ψ⟩`.
    pub fn coefficients(&self, psi: &CVector) -> CVector {
        match &self.real_vectors {
            Some(u) => {
                let re = u.tr_mul(&psi.map(|z| z.re));
                let im = u.tr_mul(&psi.map(|z| z.im));
                CVector::from_fn(re.len(), |i, _| C64::new(re[i], im[i]))
            }
            None => self.vectors.ad_mul(psi),
        }
    }

    /// `Σ_α c_α |α⟩`.
    pub fn from_coefficients(&self, coeffs: &CVector) -> CVector {
        match &self.real_vectors {
            Some(u) => {
                let re = u * coeffs.map(|z| z.re);
                let im = u * coeffs.map(|z| z.im);
                CVector::from_fn(re.len(), |i, _| C64::new(re[i], im[i]))
            }
            None => &self.vectors * coeffs,
        }
    }

    /// `V† O V`.
    pub fn to_eigenbasis(&self, o: &CMatrix) -> CMatrix {
        match &self.real_vectors {
            Some(u) if linalg::is_real(o) => {
                let r = linalg::real_part(o);
                linalg::to_complex(&(u.transpose() * r * u))
            }
            _ => self.vectors.ad_mul(&(o * &self.vectors)),
        }
    }

    /// `V M V†`.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.vectors * m * self.vectors.adjoint()
    }

    /// Diagonal matrix elements `⟨α|O|α⟩` (real parts).
    pub fn diagonal_elements(&self, o: &CMatrix) -> Vec<f64> {
        let n = self.dim();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || o[(i, j)] == c(0.0)));
        if is_diag {
            return (0..n)
                .map(|a| {
                    (0..n)
                        .map(|i| o[(i, i)].re * self.vectors[(i, a)].norm_sqr())
                        .sum()
                })
                .collect();
        }
        let ov = o * &self.vectors;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|i| (self.vectors[(i, a)].conj() * ov[(i, a)]).re)
                    .sum()
            })
            .collect()
    }

    /// `Σ_α ℰ_α |α⟩⟨α|`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            self.dim(),
            self.energies.iter().map(|&e| c(e)),
        ));
        self.from_eigenbasis(&d)
    }

    /// Largest `|V†V − 1|` entry.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let g = self.vectors.ad_mul(&self.vectors);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - c(target)).norm());
            }
        }
        worst
    }

    /// Largest column residual `‖H|α⟩ − ℰ_α|α⟩‖`.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        let hv = h * &self.vectors;
        (0..self.dim())
            .map(|k| (hv.column(k) - self.vectors.column(k).scale(self.energies[k])).norm())
            .fold(0.0, f64::max)
    }

    /// Indices of eigenvalues grouped into clusters whose internal gaps are `≤ tol`.
    pub fn clusters(&self, tol: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.dim() {
            if k == self.dim() || self.energies[k] - self.energies[k - 1] > tol {
                out.push(start..k);
                start = k;
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct LatticeHamiltonian {
    pub spec: LatticeSpec,
    pub omega: f64,
    pub lambda: f64,
    matrix: CMatrix,
    eigen: OnceCell<EigenDecomposition>,
}

impl Clone for LatticeHamiltonian {
    fn clone(&self) -> Self {
        LatticeHamiltonian {
            spec: self.spec,
            omega: self.omega,
            lambda: self.lambda,
            matrix: self.matrix.clone(),
            eigen: self.eigen.clone(),
        }
    }
}

/// Kinetic + potential matrix in the position basis.
pub fn build_family(spec: LatticeSpec, omega: f64, lambda: f64) -> Result<LatticeHamiltonian> {
    spec.validate()?;
    if !(omega.is_finite() && lambda.is_finite()) {
        return Err(Error::InvalidSpec("couplings must be finite".into()));
    }
    let n = spec.n_sites();
    let hop = 1.0 / (8.0 * spec.m * spec.a * spec.a);
    let mut matrix = CMatrix::zeros(n, n);
    for i in 0..n {
        let x = spec.coordinate(i);
        matrix[(i, i)] += c(2.0 * hop + 0.5 * omega * x * x + lambda * x * x * x);
        matrix[(i, (i + 2) % n)] -= c(hop);
        matrix[(i, (i + n - 2) % n)] -= c(hop);
    }
    Ok(LatticeHamiltonian {
        spec,
        omega,
        lambda,
        matrix,
        eigen: OnceCell::new(),
    })
}

impl LatticeHamiltonian {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Cached eigendecomposition, computed on first use.
    pub fn eigen(&self) -> Result<&EigenDecomposition> {
        self.eigen
            .get_or_try_init(|| EigenDecomposition::from_hermitian(&self.matrix))
    }

    /// `‖[H, Π]‖_F / max(1, ‖H‖_F)` for the parity operator `Π`.
    pub fn parity_commutator(&self) -> f64 {
        let p = self.spec.parity_matrix();
        let comm = &self.matrix * &p - &p * &self.matrix;
        comm.norm() / self.matrix.norm().max(1.0)
    }

    /// The potential `½ωx² + λx³` on each site.
    pub fn potential(&self) -> Vec<f64> {
        self.spec
            .coordinates()
            .iter()
            .map(|&x| 0.5 * self.omega * x * x + self.lambda * x * x * x)
            .collect()
    }
}

pub fn diagonalize(h: &LatticeHamiltonian) -> Result<&EigenDecomposition> {
    h.eigen()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumEnergies {
    pub e_min: f64,
    pub e_max: f64,
    pub converged: bool,
}

/// Geometric schedule `{1, 2, 4, …, 2⁴⁰}/Δ`, with `Δ` the Gershgorin estimate
/// of the spectral breadth. The long tail resolves near-degenerate extremal
/// pairs, whose splitting can be many decades below `Δ`.
pub fn default_tau_schedule(h: &CMatrix) -> Vec<f64> {
    let (lo, hi) = linalg::gershgorin_bounds(h);
    let scale = 1.0 / (hi - lo).max(f64::MIN_POSITIVE);
    (0..=40).map(|k| (1u64 << k) as f64 * scale).collect()
}

/// `Tr[ρ_ext H]` for `ρ_ext ∝ exp(τH)`, evaluated on a spectrum with the
/// largest exponent subtracted first.
pub fn extremizing_energy(energies: &[f64], tau: f64) -> Result<f64> {
    let shift = energies
        .iter()
        .map(|&e| tau * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut num = 0.0;
    for &e in energies {
        let w = (tau * e - shift).exp();
        z += w;
        num += w * e;
    }
    let value = num / z;
    if !value.is_finite() || z == 0.0 {
        return Err(Error::NumericFailure(format!(
            "extremizing state overflowed at τ = {tau:e}"
        )));
    }
    Ok(value)
}

/// Push `τ → ±∞` along an ascending schedule and report the limiting
/// energies of the extremizing orthodox states `exp(±τH)/Z`.
pub fn extremum_energies_tau_sweep(
    h: &LatticeHamiltonian,
    tau_schedule: &[f64],
) -> Result<ExtremumEnergies> {
    if tau_schedule.is_empty() {
        return Err(Error::invalid("tau schedule must be non-empty"));
    }
    if tau_schedule.iter().any(|&t| !(t.is_finite() && t > 0.0))
        || tau_schedule.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::invalid(
            "tau schedule must be ascending and positive",
        ));
    }
    let eigen = h.eigen()?;
    sweep_on_spectrum(&eigen.energies, tau_schedule)
}

pub fn sweep_on_spectrum(energies: &[f64], tau_schedule: &[f64]) -> Result<ExtremumEnergies> {
    let span = (energies[energies.len() - 1] - energies[0]).abs();
    let mut prev: Option<(f64, f64)> = None;
    let mut converged = false;
    let mut last = (0.0, 0.0);
    for &tau in tau_schedule {
        let lo = extremizing_energy(energies, -tau)?;
        let hi = extremizing_energy(energies, tau)?;
        if let Some((plo, phi)) = prev {
            let tol = 1e-8 * span.max(f64::MIN_POSITIVE);
            converged = (lo - plo).abs() < tol && (hi - phi).abs() < tol;
        }
        prev = Some((lo, hi));
        last = (lo, hi);
    }
    Ok(ExtremumEnergies {
        e_min: last.0,
        e_max: last.1,
        converged,
    })
}
