//! Dense complex linear-algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `‖M − M†‖_F / max(1, ‖M‖_F)`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut diff = 0.0;
    for i in 0..n {
        for j in 0..n {
            diff += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    diff.sqrt() / m.norm().max(1.0)
}

pub fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr[A·B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Lower and upper Gershgorin bounds on the spectrum of a Hermitian matrix.
pub fn gershgorin_bounds(m: &CMatrix) -> (f64, f64) {
    let n = m.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
        let center = m[(i, i)].re;
        lo = lo.min(center - radius);
        hi = hi.max(center + radius);
    }
    (lo, hi)
}

/// Hermitian eigensolver. Eigenvalues ascending, eigenvectors as columns.
///
/// Real-symmetric input takes the real path, which is several times faster
/// and yields real eigenvectors.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::invalid("cannot diagonalize an empty matrix"));
    }
    let failure = || {
        Error::NumericFailure(format!(
            "eigensolver did not converge (dim {n}, ‖H‖_F = {:.3e}, hermiticity error {:.3e})",
            m.norm(),
            hermiticity_error(m)
        ))
    };
    if is_real(m) {
        let eig = SymmetricEigen::try_new(real_part(m), f64::EPSILON, 0).ok_or_else(failure)?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| c(eig.eigenvectors[(i, order[j])]));
        Ok((energies, vectors))
    } else {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or_else(failure)?;
        let order = ascending_order(eig.eigenvalues.as_slice());
        let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((energies, vectors))
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Matrix exponential `exp(s·A)` of a Hermitian matrix via its eigendecomposition.
pub fn hermitian_exp(m: &CMatrix, s: f64) -> Result<CMatrix> {
    let (vals, vecs) = eigh(m)?;
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let f = (s * vals[j]).exp();
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    Ok(&scaled * vecs.adjoint())
}

/// Dense matrix-power by repeated squaring.
pub fn matrix_power(m: &CMatrix, mut k: usize) -> CMatrix {
    let n = m.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    result
}

pub fn normalize(v: &mut CVector) -> Result<()> {
    let norm = v.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::NumericFailure(
            "cannot normalize a zero vector".into(),
        ));
    }
    v.unscale_mut(norm);
    Ok(())
}

/// Compressed-row sparse copy of a dense matrix, for repeated mat-vec products
/// against banded Hamiltonians.
#[derive(Debug, Clone)]
pub struct SparseRows {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseRows {
    pub fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    cols.push(j);
                    values.push(z);
                }
            }
            row_start.push(cols.len());
        }
        SparseRows {
            dim,
            row_start,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `out = A·v`.
    pub fn mul_into(&self, v: &[C64], out: &mut [C64]) {
        for i in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += self.values[k] * v[self.cols[k]];
            }
            out[i] = acc;
        }
    }
}
