use crate::error::{OqwError, Result};
use crate::linalg::{self, r, ComplexMatrix};
use crate::policy::NumericPolicy;

/// A validated density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates `matrix` against the policy tolerances.
    pub fn new(matrix: ComplexMatrix, policy: &NumericPolicy) -> Result<Self> {
        linalg::square_dim(&matrix)?;
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > policy.hermitian_tol {
            return Err(OqwError::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > policy.trace_tol || tr.im.abs() > policy.trace_tol {
            return Err(OqwError::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        let (values, _) = linalg::hermitian_eigen(&matrix);
        if values[0] < -policy.psd_tol {
            return Err(OqwError::InvalidDensity(format!(
                "minimum eigenvalue {:.3e} is negative",
                values[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Hermitizes and rescales a nonzero PSD matrix to unit trace, then validates.
    pub fn normalized(matrix: &ComplexMatrix, policy: &NumericPolicy) -> Result<Self> {
        let h = linalg::hermitize(matrix);
        let tr = linalg::trace_re(&h);
        if !(tr > 0.0) {
            return Err(OqwError::InvalidDensity(format!("cannot normalize matrix with trace {tr}")));
        }
        Self::new(h / r(tr), policy)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: linalg::identity(d) / r(d as f64),
        }
    }

    /// `|e_i⟩⟨e_i|`.
    pub fn basis_state(d: usize, i: usize) -> Self {
        Self {
            matrix: linalg::basis_projector(d, i),
        }
    }

    /// `|v⟩⟨v|/⟨v|v⟩`.
    pub fn pure(v: &nalgebra::DVector<linalg::C64>) -> Result<Self> {
        let n2 = v.norm_squared();
        if n2 == 0.0 {
            return Err(OqwError::InvalidDensity("zero vector".into()));
        }
        Ok(Self {
            matrix: v * v.adjoint() / r(n2),
        })
    }

    /// Wraps a matrix already known to be a density (e.g. a renormalized
    /// channel branch); no validation.
    pub(crate) fn from_normalized_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigen(&self.matrix).0[0]
    }
}

/// Positive definiteness: smallest eigenvalue above `policy.faithful_tol`.
pub fn is_faithful(rho: &DensityOperator, policy: &NumericPolicy) -> bool {
    rho.min_eigenvalue() > policy.faithful_tol
}

/// Orthogonal projector onto the support of a Hermitian PSD matrix.
pub fn support_projector(m: &ComplexMatrix, policy: &NumericPolicy) -> Result<ComplexMatrix> {
    linalg::square_dim(m)?;
    let scale = m.norm().max(1.0);
    let dev = linalg::hermitian_deviation(m);
    if dev > policy.hermitian_tol * scale {
        return Err(OqwError::NotHermitian { deviation: dev });
    }
    let basis = linalg::support_basis(m, policy.rank_rel_tol);
    Ok(linalg::projector_from_basis(&basis))
}
