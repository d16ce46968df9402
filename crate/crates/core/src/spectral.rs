//! Spectral analysis of quantum channels and Lindblad generators.
//!
//! Channels are realized as `d²×d²` matrices acting on column-major
//! vectorized `d×d` matrices: `K X K*` becomes `(conj(K) ⊗ K) vec(X)`.
//! The invariant structure (fixed points, minimal enclosures, transient
//! part) is extracted from the eigenvalue-1 spectral projector of that
//! matrix, which is exactly the Cesàro limit of the channel iterates.

use nalgebra::DVector;

use crate::coin::{self, CoinCT};
use crate::density::{self, DensityOperator};
use crate::error::{OqwError, Result};
use crate::expm::expm;
use crate::linalg::{self, c, r, ComplexMatrix, C64};
use crate::policy::NumericPolicy;

/// Matrix realization of a linear map on `d×d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(OqwError::DimensionMismatch {
                what: "superoperator matrix".into(),
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        linalg::unvectorize(&(&self.matrix * linalg::vectorize(x)), self.dim)
    }

    /// The Hilbert–Schmidt dual map.
    pub fn apply_dual(&self, x: &ComplexMatrix) -> ComplexMatrix {
        linalg::unvectorize(&(self.matrix.adjoint() * linalg::vectorize(x)), self.dim)
    }

    /// `‖Φ*(I) − I‖`: zero for trace-preserving maps.
    pub fn trace_preservation_defect(&self) -> f64 {
        let id = linalg::identity(self.dim);
        (self.apply_dual(&id) - id).norm()
    }

    /// Compression `X ↦ Q* Φ(Q X Q*) Q` onto the span of the orthonormal columns of `q`.
    pub fn restrict(&self, q: &ComplexMatrix) -> Superoperator {
        let inject = q.conjugate().kronecker(q);
        let compress = q.transpose().kronecker(&q.adjoint());
        Superoperator {
            dim: q.ncols(),
            matrix: compress * &self.matrix * inject,
        }
    }

    /// The time-one map `exp(S)`.
    pub fn exp(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: expm(&self.matrix),
        }
    }

    /// Right and left eigenvectors of the eigenvalue-1 cluster.
    pub fn fixed_space(&self, policy: &NumericPolicy) -> FixedSpace {
        let n = self.dim * self.dim;
        let shifted = &self.matrix - ComplexMatrix::identity(n, n);
        let right = linalg::null_space(&shifted, policy.fixed_cluster_tol);
        let left = linalg::left_null_space(&shifted, policy.fixed_cluster_tol);
        FixedSpace {
            dim: self.dim,
            right,
            left,
        }
    }
}

/// Eigenvalue-1 eigenspace of a channel together with its spectral projector.
#[derive(Debug, Clone)]
pub struct FixedSpace {
    dim: usize,
    right: ComplexMatrix,
    left: ComplexMatrix,
}

impl FixedSpace {
    pub fn dimension(&self) -> usize {
        self.right.ncols()
    }

    /// Basis of fixed points as `d×d` matrices.
    pub fn basis(&self) -> Vec<ComplexMatrix> {
        (0..self.right.ncols())
            .map(|j| linalg::unvectorize(&self.right.column(j).into_owned(), self.dim))
            .collect()
    }

    /// Spectral projection `V (W*V)⁻¹ W* vec(X)`, the Cesàro limit of `Φⁿ(X)`.
    pub fn project(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.right.ncols() == 0 || self.right.ncols() != self.left.ncols() {
            return Err(OqwError::NoConvergence {
                operation: "fixed-space projection",
                iterations: 0,
                residual: f64::NAN,
            });
        }
        let gram = self.left.adjoint() * &self.right;
        let coeffs = gram
            .lu()
            .solve(&(self.left.adjoint() * linalg::vectorize(x)))
            .ok_or(OqwError::NoConvergence {
                operation: "fixed-space projection",
                iterations: 0,
                residual: f64::INFINITY,
            })?;
        Ok(linalg::unvectorize(&(&self.right * coeffs), self.dim))
    }
}

/// `S = Σ conj(K) ⊗ K`.
pub fn superoperator(kraus: &[ComplexMatrix]) -> Result<Superoperator> {
    let d = linalg::common_dim("Kraus family", kraus.iter())?;
    let matrix = kraus.iter().fold(ComplexMatrix::zeros(d * d, d * d), |acc, k| {
        acc + k.conjugate().kronecker(k)
    });
    Ok(Superoperator { dim: d, matrix })
}

/// Matrix of `ρ ↦ Gρ + ρG* + Σⱼ Aⱼ ρ Aⱼ*`.
pub fn lindblad_superoperator(coin: &CoinCT) -> Superoperator {
    let d = coin.dim();
    let g = coin.effective_generator();
    let id = linalg::identity(d);
    let mut matrix = id.kronecker(g) + g.conjugate().kronecker(&id);
    for a in &coin.jumps {
        matrix += a.conjugate().kronecker(a);
    }
    Superoperator { dim: d, matrix }
}

fn fixed_point_residual(s: &Superoperator, tau: &ComplexMatrix) -> f64 {
    (s.apply(tau) - tau).norm()
}

/// Invariant state of maximal support: the Cesàro limit of `Φⁿ(I/d)`.
pub fn invariant_state_maximal(s: &Superoperator, policy: &NumericPolicy) -> Result<DensityOperator> {
    let fs = s.fixed_space(policy);
    let d = s.dim();
    let limit = fs.project(&(linalg::identity(d) / r(d as f64)))?;
    let state = normalize_state(&limit)?;
    let residual = fixed_point_residual(s, &state);
    if residual > policy.invariant_residual_tol {
        return Err(OqwError::NoConvergence {
            operation: "maximal invariant state",
            iterations: 0,
            residual,
        });
    }
    DensityOperator::new(state, policy)
}

fn normalize_state(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = linalg::hermitize(m);
    let tr = linalg::trace_re(&h);
    if !(tr.abs() > 1e-300) {
        return Err(OqwError::InvalidDensity("fixed point with vanishing trace".into()));
    }
    Ok(h / r(tr))
}

/// Ergodicity: the eigenvalue-1 eigenspace is one-dimensional, i.e. the invariant state is unique.
pub fn is_ergodic(s: &Superoperator, policy: &NumericPolicy) -> bool {
    s.fixed_space(policy).dimension() == 1
}

/// A minimal enclosure with its unique invariant state.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    /// 1-based label, in decomposition order.
    pub label: usize,
    pub projector: ComplexMatrix,
    /// Orthonormal basis of the enclosure (columns).
    pub basis: ComplexMatrix,
    pub invariant_state: DensityOperator,
}

impl Enclosure {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// `𝔥 = (⊕ Y_α) ⊕ X` with minimal enclosures `Y_α` and transient part `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDecomposition {
    pub enclosures: Vec<Enclosure>,
    pub transient_projector: ComplexMatrix,
    pub recurrent_projector: ComplexMatrix,
}

/// Decomposes the recurrent space of a channel into mutually orthogonal
/// minimal enclosures.
///
/// Degenerate fixed spaces are split along the positive/negative parts of a
/// Hermitian fixed point orthogonal to the current invariant state; the
/// negative block is processed first. Candidate fixed points come from
/// projecting Hermitian matrix units in lexicographic order, so the split is
/// reproducible.
pub fn decompose(s: &Superoperator, policy: &NumericPolicy) -> Result<ChannelDecomposition> {
    let d = s.dim();
    let mut blocks: Vec<(ComplexMatrix, ComplexMatrix)> = Vec::new();
    split_enclosure(s, linalg::identity(d), policy, &mut blocks, 0)?;

    let mut enclosures = Vec::with_capacity(blocks.len());
    let mut recurrent = linalg::zeros(d);
    for (i, (q, local_state)) in blocks.into_iter().enumerate() {
        let projector = linalg::projector_from_basis(&q);
        let tau = &q * local_state * q.adjoint();
        let state = DensityOperator::normalized(&tau, policy)?;
        let residual = fixed_point_residual(s, state.matrix());
        if residual > policy.invariant_residual_tol {
            return Err(OqwError::NoConvergence {
                operation: "enclosure invariant state",
                iterations: 0,
                residual,
            });
        }
        recurrent += &projector;
        enclosures.push(Enclosure {
            label: i + 1,
            projector,
            basis: q,
            invariant_state: state,
        });
    }
    let transient = linalg::identity(d) - &recurrent;
    Ok(ChannelDecomposition {
        enclosures,
        transient_projector: transient,
        recurrent_projector: recurrent,
    })
}

/// Hermitian matrix units `E_ii`, `E_ij + E_ji`, `i(E_ij − E_ji)` in lexicographic order.
fn hermitian_units(k: usize) -> impl Iterator<Item = ComplexMatrix> {
    let diagonal = (0..k).map(move |i| linalg::basis_projector(k, i));
    let off = (0..k).flat_map(move |i| ((i + 1)..k).map(move |j| (i, j)));
    let symmetric = off.clone().map(move |(i, j)| {
        let mut m = linalg::zeros(k);
        m[(i, j)] = r(1.0);
        m[(j, i)] = r(1.0);
        m
    });
    let antisymmetric = off.map(move |(i, j)| {
        let mut m = linalg::zeros(k);
        m[(i, j)] = c(0.0, 1.0);
        m[(j, i)] = c(0.0, -1.0);
        m
    });
    diagonal.chain(symmetric).chain(antisymmetric)
}

const MAX_SPLIT_DEPTH: usize = 64;

fn split_enclosure(
    s: &Superoperator,
    q: ComplexMatrix,
    policy: &NumericPolicy,
    out: &mut Vec<(ComplexMatrix, ComplexMatrix)>,
    depth: usize,
) -> Result<()> {
    let k = q.ncols();
    if k == 0 {
        return Ok(());
    }
    if depth > MAX_SPLIT_DEPTH {
        return Err(OqwError::NoConvergence {
            operation: "enclosure splitting",
            iterations: depth,
            residual: f64::NAN,
        });
    }
    let restricted = s.restrict(&q);
    let fs = restricted.fixed_space(policy);
    let tau = normalize_state(&fs.project(&(linalg::identity(k) / r(k as f64)))?)?;

    // Directions outside the support of the maximal state carry no invariant mass.
    let support = linalg::support_basis(&tau, policy.rank_rel_tol);
    if support.ncols() < k {
        return split_enclosure(s, &q * support, policy, out, depth + 1);
    }
    if fs.dimension() <= 1 {
        out.push((q, tau));
        return Ok(());
    }

    let mut best: Option<(f64, ComplexMatrix)> = None;
    for unit in hermitian_units(k) {
        let h = linalg::hermitize(&fs.project(&unit)?);
        let scale = h.norm();
        if scale < 1e-12 {
            continue;
        }
        let f = &h - &tau * h.trace();
        let ratio = f.norm() / scale;
        if best.as_ref().is_none_or(|(b, _)| ratio > *b) {
            best = Some((ratio, f));
        }
        if ratio > 1e-3 {
            break;
        }
    }
    let (ratio, f) = best.ok_or(OqwError::NoConvergence {
        operation: "enclosure splitting",
        iterations: depth,
        residual: f64::NAN,
    })?;
    if ratio < 1e-8 {
        // Numerically the fixed space is one-dimensional on this block.
        out.push((q, tau));
        return Ok(());
    }
    let f = &f / r(linalg::hermitian_norm(&f));
    let (values, vectors) = linalg::hermitian_eigen(&f);
    let cut = policy.fixed_cluster_tol;
    let negative = linalg::select_columns(&vectors, &values, |v| v < -cut);
    let rest = linalg::select_columns(&vectors, &values, |v| v >= -cut);
    if negative.ncols() == 0 || rest.ncols() == 0 {
        return Err(OqwError::NoConvergence {
            operation: "enclosure splitting",
            iterations: depth,
            residual: ratio,
        });
    }
    split_enclosure(s, &q * negative, policy, out, depth + 1)?;
    split_enclosure(s, &q * rest, policy, out, depth + 1)
}

/// Decomposition for a continuous-time coin, via the time-one map `exp(𝕃)`.
pub fn decompose_ct(coin: &CoinCT, policy: &NumericPolicy) -> Result<ChannelDecomposition> {
    coin::ensure_valid(&coin.clone().into(), policy)?;
    decompose(&lindblad_superoperator(coin).exp(), policy)
}

/// Projector onto the smallest subspace containing `supp Φⁿ(ρ)` for all `n ≥ 0`.
pub fn reachable_support(s: &Superoperator, rho: &DensityOperator, policy: &NumericPolicy) -> Result<ComplexMatrix> {
    let d = s.dim();
    let mut reach = density::support_projector(rho.matrix(), policy)?;
    let mut rank = linalg::projector_rank(&reach);
    for _ in 0..=d {
        let grown = &reach + s.apply(&reach) / r(d as f64);
        let next = density::support_projector(&linalg::hermitize(&grown), policy)?;
        let next_rank = linalg::projector_rank(&next);
        reach = next;
        if next_rank == rank {
            break;
        }
        rank = next_rank;
    }
    Ok(reach)
}

/// Leakage `Tr((I − P) Φ(P))` of a projector under the channel; zero for enclosures.
pub fn enclosure_leakage(s: &Superoperator, p: &ComplexMatrix) -> f64 {
    linalg::weight_outside(&s.apply(p), p).abs()
}

/// `A(Y) = lim Φ*ⁿ(P_Y)` by dual power iteration with repeated squaring.
pub fn absorption_operator(s: &Superoperator, p_y: &ComplexMatrix, policy: &NumericPolicy) -> Result<ComplexMatrix> {
    linalg::common_dim("absorption projector", [p_y, &linalg::identity(s.dim())])?;
    let leak = enclosure_leakage(s, p_y);
    if leak > policy.eigenvector_tol {
        return Err(OqwError::InvalidArgument(format!(
            "projector is not an enclosure (leakage {leak:.3e})"
        )));
    }
    let mut power = s.matrix().adjoint();
    let mut x: DVector<C64> = linalg::vectorize(p_y);
    let mut applied = 1usize;
    loop {
        let y = &power * &x;
        let residual = (&y - &x).norm();
        x = y;
        if residual <= policy.absorption_tol {
            break;
        }
        if applied >= policy.absorption_max_iter {
            return Err(OqwError::NoConvergence {
                operation: "absorption operator",
                iterations: applied,
                residual,
            });
        }
        power = &power * &power;
        applied *= 2;
    }
    Ok(linalg::hermitize(&linalg::unvectorize(&x, s.dim())))
}

/// Smallest subspace `T` such that no state supported in `T` ever puts
/// weight on `ran(P)`: the kernel of `Σₙ Φ*ⁿ(P)`, accumulated until stable.
pub fn never_reaching_subspace(s: &Superoperator, p: &ComplexMatrix, policy: &NumericPolicy) -> Result<ComplexMatrix> {
    let d = s.dim();
    let mut reach = density::support_projector(&linalg::hermitize(p), policy)?;
    let mut rank = linalg::projector_rank(&reach);
    for _ in 0..=d {
        let grown = &reach + s.apply_dual(&reach) / r(d as f64);
        let next = density::support_projector(&linalg::hermitize(&grown), policy)?;
        let next_rank = linalg::projector_rank(&next);
        reach = next;
        if next_rank == rank {
            break;
        }
        rank = next_rank;
    }
    Ok(linalg::identity(d) - reach)
}
