//! Coarse-grained values: averages of time-averaged (pure) and orthodox
//! (mixed) expectation values over all states, or over the states
//! supported on a subspace, together with the samplers that realise those
//! averages by Monte-Carlo.
//!
//! Pure states are drawn from the Haar measure; orthodox weights from the
//! flat measure on the probability simplex. Haar populations `|c_α|²` are
//! themselves flat on the simplex, so both routes average to `Tr[O]/dim`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::EigenDecomposition;
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::quantum::{Observable, PureState};

const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Projector {
    matrix: CMatrix,
    /// Orthonormal basis of the range, one column per dimension.
    basis: CMatrix,
}

impl Projector {
    /// Validates `P² = P`, `P† = P` and integer trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        check_dim(n, matrix.ncols())?;
        if linalg::hermiticity_error(&matrix) > PROJECTOR_TOL {
            return Err(Error::invalid("projector is not Hermitian"));
        }
        if linalg::frobenius_distance(&(&matrix * &matrix), &matrix)
            > PROJECTOR_TOL * (n as f64).max(1.0)
        {
            return Err(Error::invalid("projector is not idempotent"));
        }
        let (vals, vecs) = linalg::eigh(&matrix)?;
        let keep: Vec<usize> = (0..n).filter(|&k| vals[k] > 0.5).collect();
        let basis = CMatrix::from_fn(n, keep.len(), |i, j| vecs[(i, keep[j])]);
        let tr = linalg::trace(&matrix).re;
        if (tr - keep.len() as f64).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "projector trace {tr} is not an integer rank"
            )));
        }
        Ok(Projector { matrix, basis })
    }

    /// Projector onto the span of orthonormal columns.
    pub fn from_basis(basis: CMatrix) -> Result<Self> {
        let gram = basis.ad_mul(&basis);
        let k = basis.ncols();
        if linalg::frobenius_distance(&gram, &CMatrix::identity(k, k))
            > PROJECTOR_TOL * (k as f64).max(1.0)
        {
            return Err(Error::invalid("projector basis is not orthonormal"));
        }
        let matrix = &basis * basis.adjoint();
        Ok(Projector { matrix, basis })
    }

    /// Projector onto selected eigenvectors; commutes with the Hamiltonian.
    pub fn from_eigenstates(eigen: &EigenDecomposition, indices: &[usize]) -> Result<Self> {
        let n = eigen.dim();
        if let Some(&bad) = indices.iter().find(|&&k| k >= n) {
            return Err(Error::invalid(format!(
                "eigenstate index {bad} out of range"
            )));
        }
        let basis = CMatrix::from_fn(n, indices.len(), |i, j| eigen.vectors[(i, indices[j])]);
        Self::from_basis(basis)
    }

    /// `1 − Σ_i |Q_i⟩⟨Q_i|` for orthonormal excluded states `|Q_i⟩`.
    pub fn excluding(dim: usize, excluded: &CMatrix) -> Result<Self> {
        check_dim(dim, excluded.nrows())?;
        let q = Projector::from_basis(excluded.clone())?;
        Projector::new(CMatrix::identity(dim, dim) - q.matrix)
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            matrix: CMatrix::identity(dim, dim),
            basis: CMatrix::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn subspace_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }
}

/// `Tr[O] / dim`.
pub fn coarse_grained_value(o: &Observable) -> f64 {
    linalg::trace(o.matrix()).re / o.dim() as f64
}

/// `Tr[P O] / dim(P)`.
pub fn projected_coarse_grained_value(o: &Observable, p: &Projector) -> Result<f64> {
    check_dim(p.dim(), o.dim())?;
    if p.subspace_dim() == 0 {
        return Err(Error::EmptySubspace);
    }
    Ok(linalg::trace_product(p.matrix(), o.matrix()).re / p.subspace_dim() as f64)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-random pure state: a normalized vector of i.i.d. complex gaussians.
pub fn haar_sample_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
        if v.norm() > 0.0 {
            return PureState::normalized(v);
        }
    }
}

/// Haar-random state inside the range of `p`.
pub fn sample_projected_pure<R: Rng + ?Sized>(p: &Projector, rng: &mut R) -> Result<PureState> {
    let k = p.subspace_dim();
    if k == 0 {
        return Err(Error::EmptySubspace);
    }
    let inner = haar_sample_pure(k, rng)?;
    PureState::normalized(p.basis() * inner.amplitudes())
}

/// Flat draw from the probability simplex (normalized unit exponentials).
pub fn sample_orthodox_weights<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    loop {
        let w: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
        let z: f64 = w.iter().sum();
        if z > 0.0 {
            return Ok(w.into_iter().map(|x| x / z).collect());
        }
    }
}

/// Flat simplex draw supported only on the listed eigenbasis indices.
pub fn sample_projected_orthodox_weights<R: Rng + ?Sized>(
    dim: usize,
    support: &[usize],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if support.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let inner = sample_orthodox_weights(support.len(), rng)?;
    let mut w = vec![0.0; dim];
    for (&k, v) in support.iter().zip(inner) {
        if k >= dim {
            return Err(Error::invalid(format!("support index {k} out of range")));
        }
        w[k] = v;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::quantum::expectation_pure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coarse_values_basic() {
        assert!((coarse_grained_value(&Observable::identity(5)) - 1.0).abs() < 1e-15);
        assert!(coarse_grained_value(&Observable::from_diagonal(&[1.0, -1.0])).abs() < 1e-15);
    }

    #[test]
    fn projected_value_cases() {
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.3), c(0.3), c(-1.0)]);
        let eig = EigenDecomposition::from_hermitian(&h).unwrap();
        let o = Observable::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), c(0.5), c(0.5), c(-1.0)],
        ))
        .unwrap();
        let full = Projector::identity(2);
        assert!(
            (projected_coarse_grained_value(&o, &full).unwrap() - coarse_grained_value(&o)).abs()
                < 1e-14
        );
        let p = Projector::from_eigenstates(&eig, &[1]).unwrap();
        let o_aa = eig.diagonal_elements(o.matrix())[1];
        assert!((projected_coarse_grained_value(&o, &p).unwrap() - o_aa).abs() < 1e-12);
        let empty = Projector::from_eigenstates(&eig, &[]).unwrap();
        assert_eq!(
            projected_coarse_grained_value(&o, &empty),
            Err(Error::EmptySubspace)
        );
    }

    #[test]
    fn projector_validation() {
        let not_idem = CMatrix::identity(2, 2).scale(0.5);
        assert!(Projector::new(not_idem).is_err());
        let p = Projector::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(1.0),
            c(0.0),
            c(1.0),
        ])))
        .unwrap();
        assert_eq!(p.subspace_dim(), 2);
        let q = CMatrix::from_column_slice(3, 1, &[c(0.0), c(1.0), c(0.0)]);
        let ex = Projector::excluding(3, &q).unwrap();
        assert!(linalg::frobenius_distance(ex.matrix(), p.matrix()) < 1e-12);
    }

    #[test]
    fn haar_is_reproducible_and_trivial_in_one_dim() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            haar_sample_pure(6, &mut r1).unwrap(),
            haar_sample_pure(6, &mut r2).unwrap()
        );
        let one = haar_sample_pure(1, &mut r1).unwrap();
        assert!((one.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(sample_orthodox_weights(1, &mut r1).unwrap(), vec![1.0]);
    }

    #[test]
    fn projected_samples_stay_in_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Projector::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.0),
            c(1.0),
            c(1.0),
            c(0.0),
        ])))
        .unwrap();
        let pobs = Observable::new(p.matrix().clone()).unwrap();
        for _ in 0..20 {
            let psi = sample_projected_pure(&p, &mut rng).unwrap();
            assert!((expectation_pure(&psi, &pobs).unwrap() - 1.0).abs() < 1e-10);
        }
        let w = sample_projected_orthodox_weights(4, &[1, 3], &mut rng).unwrap();
        assert_eq!(w[0], 0.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_draws_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let w = sample_orthodox_weights(7, &mut rng).unwrap();
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
