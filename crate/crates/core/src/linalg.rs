//! Dense complex linear-algebra helpers shared across the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; vectorization is column-major,
//! matching nalgebra's storage order.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{OqwError, Result};

pub type C64 = Complex64;
/// Dense `d×d` complex matrix, the carrier for coins, densities and projectors.
pub type ComplexMatrix = DMatrix<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(d, d)
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(d: usize, rows: &[f64]) -> ComplexMatrix {
    assert_eq!(rows.len(), d * d);
    ComplexMatrix::from_fn(d, d, |i, j| r(rows[i * d + j]))
}

/// Builds a matrix from row-major complex entries.
pub fn from_rows(d: usize, rows: &[C64]) -> ComplexMatrix {
    assert_eq!(rows.len(), d * d);
    ComplexMatrix::from_fn(d, d, |i, j| rows[i * d + j])
}

pub fn diag(entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            r(entries[i])
        } else {
            C64::default()
        }
    })
}

/// `|i⟩⟨i|` in dimension `d`.
pub fn basis_projector(d: usize, i: usize) -> ComplexMatrix {
    let mut m = zeros(d);
    m[(i, i)] = r(1.0);
    m
}

pub fn square_dim(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(OqwError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(OqwError::Empty);
    }
    Ok(m.nrows())
}

/// Checks that every matrix of the family is `d×d` for a common `d` and returns it.
pub fn common_dim<'a, I>(what: &str, mats: I) -> Result<usize>
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    let mut dim = None;
    for m in mats {
        let d = square_dim(m)?;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(OqwError::DimensionMismatch {
                    what: what.to_string(),
                    expected,
                    found: d,
                })
            }
            _ => {}
        }
    }
    dim.ok_or(OqwError::Empty)
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * r(0.5)
}

/// `K X K*`.
#[inline]
pub fn conjugate(k: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    k * x * k.adjoint()
}

pub fn trace_re(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first, so tiny anti-Hermitian noise is ignored.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let d = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Largest eigenvalue modulus of a Hermitian matrix (its spectral norm).
pub fn hermitian_norm(m: &ComplexMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Selects the eigenvector columns whose eigenvalue satisfies `keep`.
pub fn select_columns(vectors: &ComplexMatrix, values: &[f64], keep: impl Fn(f64) -> bool) -> ComplexMatrix {
    let cols: Vec<usize> = (0..values.len()).filter(|&i| keep(values[i])).collect();
    ComplexMatrix::from_fn(vectors.nrows(), cols.len(), |i, j| vectors[(i, cols[j])])
}

/// Orthonormal basis of the span of eigenvectors with eigenvalue above
/// `rel_tol · ‖M‖₂` for a Hermitian PSD matrix.
pub fn support_basis(m: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return ComplexMatrix::zeros(m.nrows(), 0);
    }
    let cut = rel_tol * scale;
    select_columns(&vectors, &values, |v| v > cut)
}

/// `Q Q*` for a matrix with orthonormal columns.
pub fn projector_from_basis(q: &ComplexMatrix) -> ComplexMatrix {
    q * q.adjoint()
}

/// Orthonormal basis of the range of an orthogonal projector.
pub fn basis_of_projector(p: &ComplexMatrix) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(p);
    select_columns(&vectors, &values, |v| v > 0.5)
}

pub fn projector_rank(p: &ComplexMatrix) -> usize {
    trace_re(p).round().max(0.0) as usize
}

/// Spectral norm of the difference of two orthogonal projectors, i.e. the
/// sine of the largest principal angle when the ranks agree (1 otherwise).
pub fn projector_gap(p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    hermitian_norm(&(p - q))
}

/// Column-major vectorization.
pub fn vectorize(m: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(d, d, v.as_slice())
}

/// Right null space `{x : A x ≈ 0}` from the singular values `≤ tol`.
pub fn null_space(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol)
        .collect();
    // Rows of V* belonging to vanishing singular values, conjugated into columns.
    let mut basis = ComplexMatrix::from_fn(a.ncols(), idx.len(), |i, j| v_t[(idx[j], i)].conj());
    // A wide matrix has ncols - nrows implicit null directions missing from the thin SVD.
    if a.ncols() > a.nrows() {
        unreachable!("null_space is only used on square matrices");
    }
    orthonormalize_columns(&mut basis);
    basis
}

/// Left null space `{w : w* A ≈ 0}`.
pub fn left_null_space(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    null_space(&a.adjoint(), tol)
}

/// Modified Gram–Schmidt in place; drops nothing, assumes full column rank.
pub fn orthonormalize_columns(q: &mut ComplexMatrix) {
    for j in 0..q.ncols() {
        for k in 0..j {
            let proj = q.column(k).dotc(&q.column(j));
            let col_k = q.column(k).into_owned();
            let mut col_j = q.column_mut(j);
            col_j -= col_k * proj;
        }
        let n = q.column(j).norm();
        if n > 0.0 {
            let mut col_j = q.column_mut(j);
            col_j /= r(n);
        }
    }
}

/// Eigenvalues of a general complex matrix (complex Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<C64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigenvalues and unit eigenvectors (columns) of a general complex matrix,
/// obtained by back-substitution on the complex Schur form. For defective
/// matrices the returned vectors are nearly parallel; callers check the
/// condition number of the eigenvector matrix.
pub fn eigen_decomposition(m: &ComplexMatrix) -> (Vec<C64>, ComplexMatrix) {
    let d = m.nrows();
    if d == 1 {
        return (vec![m[(0, 0)]], identity(1));
    }
    let (q, t) = Schur::new(m.clone()).unpack();
    let values: Vec<C64> = (0..d).map(|i| t[(i, i)]).collect();
    let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        y[(k, k)] = r(1.0);
        for i in (0..k).rev() {
            let mut acc = C64::default();
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - values[k];
            if denom.norm() < small {
                denom = r(small);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    let mut v = q * y;
    for k in 0..d {
        let n = v.column(k).norm();
        let mut col = v.column_mut(k);
        col /= r(n);
    }
    (values, v)
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Weight of `ρ` outside the range of the projector `p`: `Tr((I − P) ρ)`.
pub fn weight_outside(rho: &ComplexMatrix, p: &ComplexMatrix) -> f64 {
    trace_re(rho) - trace_re(&(p * rho))
}
