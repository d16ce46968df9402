//! Worked example coins with their known verdicts, plus random coin generators.

use rand::Rng;

use crate::classify::{self, VerdictKind};
use crate::coin::{Coin, Coin1D, Coin2D, CoinCT};
use crate::density::DensityOperator;
use crate::error::{OqwError, Result};
use crate::linalg::{self, c, r, ComplexMatrix, C64};
use crate::policy::NumericPolicy;

fn real(d: usize, rows: &[f64]) -> ComplexMatrix {
    linalg::from_real_rows(d, rows)
}

/// Lazy dimension-2 coin with `L = diag(0, −n)`, `R = diag(n, 0)` and a
/// symmetric `B` mixing the basis with weight `m`; `b = 1 − m² − n²`.
pub fn ex5_1a_coin(m: f64, n: f64) -> Coin1D {
    let sb = (1.0 - m * m - n * n).sqrt();
    Coin1D::new(
        real(2, &[0.0, 0.0, 0.0, -n]),
        real(2, &[-sb, m, m, sb]),
        real(2, &[n, 0.0, 0.0, 0.0]),
    )
    .expect("2x2 operators")
}

/// Diagonal lazy coin `L = diag(1/√3, 1/2)`, `R = diag(x₁, x₂)`.
pub fn ex5_1b_coin(x1: f64, x2: f64) -> Coin1D {
    let b1 = (2.0 / 3.0 - x1 * x1).sqrt();
    let b2 = (0.75 - x2 * x2).sqrt();
    Coin1D::new(
        linalg::real_diag(&[1.0 / 3f64.sqrt(), 0.5]),
        linalg::real_diag(&[b1, b2]),
        linalg::real_diag(&[x1, x2]),
    )
    .expect("2x2 operators")
}

/// Ergodic lazy coin of dimension 3 with a zero-drift invariant state.
pub fn ex5_2_coin() -> Coin1D {
    let s2 = 2f64.sqrt();
    let s30 = 30f64.sqrt();
    let s31 = 31f64.sqrt();
    let a = 2.0 * (1.0 + s2);
    let b = 2.0 * (1.0 - s2);
    let left = real(3, &[a, 0.0, b, 0.0, s31, 0.0, b, 0.0, a]) / r(8.0);
    let right = real(3, &[b, 0.0, a, 0.0, s31, 0.0, a, 0.0, b]) / r(8.0);
    let stay = linalg::from_rows(
        3,
        &[r(s30), c(0.0, 2.0), r(s30), r(2.0), r(0.0), r(2.0), r(s30), c(0.0, -2.0), r(s30)],
    ) / r(16.0);
    Coin1D::new(left, stay, right).expect("3x3 operators")
}

/// `½ (e₁ − e₃)(e₁ − e₃)*`.
pub fn ex5_2_invariant_state() -> ComplexMatrix {
    real(3, &[1.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0]) / r(2.0)
}

/// Ergodic lazy coin of dimension 2; `prime` selects the alternative `B′`
/// that moves the invariant state onto `e₁`.
pub fn ex5_3_coin(prime: bool) -> Coin1D {
    let s7 = 7f64.sqrt();
    let left = linalg::real_diag(&[1.0, 2.0]) / r(s7);
    let right = real(2, &[1.0, 1.0, 0.0, 1.0]) / r(s7);
    let stay = if prime {
        real(2, &[5.0, -1.0, 0.0, 2.0]) / r(35f64.sqrt())
    } else {
        real(2, &[-1.0, 1.0, 2.0, 0.0]) / r(s7)
    };
    Coin1D::new(left, stay, right).expect("2x2 operators")
}

/// Non-lazy 4-dimensional coin with weights `p₁ + p₂ + p₃ = ½` feeding
/// `e₁` into the other basis directions.
pub fn ex5_4_coin_with(p1: f64, p2: f64, p3: f64) -> Coin1D {
    let s = f64::sqrt;
    let h = 1.0 / s(2.0);
    let right = real(
        4,
        &[
            s(3.0 / 8.0), 0.0, 0.0, 0.0,
            -s(p1 / 2.0), h, 0.0, 0.0,
            -s(p2 / 2.0), 0.0, h, 0.0,
            s(2.0 * p3 / 3.0), 0.0, 0.0, 1.0 / s(3.0),
        ],
    );
    let left = real(
        4,
        &[
            1.0 / (2.0 * s(2.0)), 0.0, 0.0, 0.0,
            s(p1 / 2.0), h, 0.0, 0.0,
            s(p2 / 2.0), 0.0, h, 0.0,
            -s(p3 / 3.0), 0.0, 0.0, s(2.0) / s(3.0),
        ],
    );
    Coin1D::non_lazy(left, right).expect("4x4 operators")
}

/// [`ex5_4_coin_with`] at `p₁ = p₂ = p₃ = 1/6`.
pub fn ex5_4_coin() -> Coin1D {
    ex5_4_coin_with(1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0)
}

/// Non-lazy 3-dimensional coin with two drifting enclosures `e₁`, `e₂`.
pub fn ex5_5_coin() -> Coin1D {
    let s5 = 5f64.sqrt();
    let left = real(3, &[s5 / 5.0, 0.0, -s5 / 5.0, 0.0, 2.0 * s5 / 5.0, s5 / 10.0, 0.0, 0.0, 0.5]);
    let right = real(3, &[2.0 * s5 / 5.0, 0.0, s5 / 10.0, 0.0, s5 / 5.0, -s5 / 5.0, 0.0, 0.0, 0.5]);
    Coin1D::non_lazy(left, right).expect("3x3 operators")
}

/// Non-lazy 4-dimensional coin with two balanced enclosures `e₁`, `e₃`.
pub fn ex5_6_coin() -> Coin1D {
    let s = f64::sqrt;
    let right = real(
        4,
        &[
            s(2.0) / 2.0, -s(5.0) / 4.0, 0.0, 0.25,
            0.0, s(2.0) / 4.0, 0.0, 0.0,
            0.0, 0.0, s(2.0) / 2.0, 0.0,
            0.0, 0.0, 0.0, s(6.0) / 4.0,
        ],
    );
    let left = real(
        4,
        &[
            s(2.0) / 2.0, s(5.0) / 4.0, 0.0, -0.25,
            0.0, 0.5, 0.0, s(5.0) / 4.0,
            0.0, 0.0, -s(2.0) / 2.0, 0.0,
            0.0, 0.0, 0.0, s(3.0) / 4.0,
        ],
    );
    Coin1D::non_lazy(left, right).expect("4x4 operators")
}

/// Continuous-time coin on ℤ² with Hamiltonian `[[−1, h], [h̄, 2]]`.
pub fn ex7_1_coin(h: C64) -> CoinCT {
    let z = r(0.0);
    let a1 = linalg::from_rows(2, &[r(3.0), r(-1.0), z, z]);
    let a2 = linalg::from_rows(2, &[r(1.0), r(-2.0), c(0.0, 2.0), z]);
    let a3 = linalg::from_rows(2, &[r(1.0), r(1.0), r(-2.0), r(2.0)]);
    let a4 = linalg::from_rows(2, &[c(0.0, -2.0), c(0.0, 1.0), z, r(2.0)]);
    let ham = linalg::from_rows(2, &[r(-1.0), h, h.conj(), r(2.0)]);
    CoinCT::new([a1, a2, a3, a4], ham).expect("2x2 operators")
}

fn ex7_2_blocks() -> (ComplexMatrix, ComplexMatrix) {
    let s5 = 5f64.sqrt();
    (
        real(3, &[2.0, 0.0, -2.0, 0.0, 4.0, 1.0, 0.0, 0.0, s5]),
        real(3, &[4.0, 0.0, 1.0, 0.0, 2.0, -2.0, 0.0, 0.0, s5]),
    )
}

/// Discrete coin on ℤ² with two drifting enclosures `e₁`, `e₂` and transient direction `e₃`.
pub fn ex7_2_coin() -> Coin2D {
    let (m, n) = ex7_2_blocks();
    let slow = r(2.0 * 30f64.sqrt());
    let fast = r(2.0 * 6f64.sqrt());
    Coin2D::new([&m / slow, &m / fast, &n / slow, &n / fast]).expect("3x3 operators")
}

/// Jumps of [`ex7_2_coin`] with `H = 0` (`h2 = false`) or `H` swapping `e₁` and `e₂`.
pub fn ex7_3_coin(h2: bool) -> CoinCT {
    let ham = if h2 {
        real(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    } else {
        linalg::zeros(3)
    };
    CoinCT::new(ex7_2_coin().ops, ham).expect("3x3 operators")
}

fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.nrows(), b.nrows());
    let mut out = linalg::zeros(da + db);
    out.view_mut((0, 0), (da, da)).copy_from(a);
    out.view_mut((da, da), (db, db)).copy_from(b);
    out
}

/// [`ex7_2_coin`] ⊕ the symmetric one-dimensional walk `Dⱼ = ½`: one
/// recurrent enclosure `e₄` next to the drifting ones.
pub fn ex7_2_with_symmetric_block() -> Coin2D {
    let base = ex7_2_coin();
    let half = linalg::identity(1) * r(0.5);
    let ops = std::array::from_fn(|j| direct_sum(&base.ops[j], &half));
    Coin2D::new(ops).expect("4x4 operators")
}

fn random_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Rescales `Kⱼ ↦ Kⱼ S^{−1/2}` with `S = Σ Kⱼ*Kⱼ`, so that `Σ Kⱼ*Kⱼ = I`.
fn normalize_family(ops: &mut [ComplexMatrix]) {
    let d = ops[0].nrows();
    let s = ops.iter().fold(linalg::zeros(d), |acc, k| acc + k.adjoint() * k);
    let (vals, vecs) = linalg::hermitian_eigen(&s);
    let inv_sqrt = linalg::real_diag(&vals.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
    let factor = &vecs * inv_sqrt * vecs.adjoint();
    for k in ops.iter_mut() {
        *k = &*k * &factor;
    }
}

/// A random normalized coin on ℤ (lazy when `lazy` is set).
pub fn random_coin_1d<R: Rng + ?Sized>(rng: &mut R, d: usize, lazy: bool) -> Coin1D {
    let count = if lazy { 3 } else { 2 };
    let mut ops: Vec<ComplexMatrix> = (0..count).map(|_| random_matrix(rng, d)).collect();
    normalize_family(&mut ops);
    if lazy {
        Coin1D::new(ops[0].clone(), ops[1].clone(), ops[2].clone()).expect("square family")
    } else {
        Coin1D::non_lazy(ops[0].clone(), ops[1].clone()).expect("square family")
    }
}

/// A random normalized discrete coin on ℤ².
pub fn random_coin_2d<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Coin2D {
    let mut ops: Vec<ComplexMatrix> = (0..4).map(|_| random_matrix(rng, d)).collect();
    normalize_family(&mut ops);
    Coin2D::new(std::array::from_fn(|j| ops[j].clone())).expect("square family")
}

/// A random continuous-time coin on ℤ² with a random Hermitian `H`.
pub fn random_coin_ct<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CoinCT {
    let jumps = std::array::from_fn(|_| random_matrix(rng, d));
    let h = linalg::hermitize(&random_matrix(rng, d));
    CoinCT::new(jumps, h).expect("square family")
}

/// A random full-rank density.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    let g = random_matrix(rng, d);
    let m = &g * g.adjoint() + linalg::identity(d) * r(1e-3);
    let tr = linalg::trace_re(&m);
    DensityOperator::new(linalg::hermitize(&(m / r(tr))), &NumericPolicy::default()).expect("positive definite")
}

/// One classified coin and what it is expected to yield.
#[derive(Debug, Clone)]
pub struct ExampleCase {
    pub label: String,
    pub coin: Coin,
    pub expected: VerdictKind,
    /// Expected transient projector, when pinned down exactly.
    pub transient_projector: Option<ComplexMatrix>,
}

#[derive(Debug, Clone)]
pub struct Example {
    pub id: &'static str,
    pub summary: &'static str,
    pub cases: Vec<ExampleCase>,
}

fn case(label: impl Into<String>, coin: impl Into<Coin>, expected: VerdictKind) -> ExampleCase {
    ExampleCase {
        label: label.into(),
        coin: coin.into(),
        expected,
        transient_projector: None,
    }
}

fn case_with_projector(
    label: impl Into<String>,
    coin: impl Into<Coin>,
    expected: VerdictKind,
    projector: ComplexMatrix,
) -> ExampleCase {
    ExampleCase {
        transient_projector: Some(projector),
        ..case(label, coin, expected)
    }
}

pub const EXAMPLE_IDS: [&str; 10] = [
    "ex5_1a", "ex5_1b", "ex5_2", "ex5_3", "ex5_4", "ex5_5", "ex5_6", "ex7_1", "ex7_2", "ex7_3",
];

/// Looks up an example by id.
pub fn example(id: &str) -> Result<Example> {
    use VerdictKind::*;
    let third = 1.0 / 3f64.sqrt();
    let ex = match id {
        "ex5_1a" => Example {
            id: "ex5_1a",
            summary: "lazy d=2, L=diag(0,-n), R=diag(n,0), mixing B",
            cases: vec![
                case("m=0.6, n=0.6", ex5_1a_coin(0.6, 0.6), Recurrent),
                case("m=0, n=0.6", ex5_1a_coin(0.0, 0.6), Transient),
            ],
        },
        "ex5_1b" => Example {
            id: "ex5_1b",
            summary: "lazy diagonal d=2, R=diag(x1,x2)",
            cases: vec![
                case("x1=1/sqrt3, x2=1/2", ex5_1b_coin(third, 0.5), Recurrent),
                case("x1=0.5, x2=0.3", ex5_1b_coin(0.5, 0.3), Transient),
                case_with_projector(
                    "x1=1/sqrt3, x2=0.3",
                    ex5_1b_coin(third, 0.3),
                    Split,
                    linalg::basis_projector(2, 1),
                ),
                case_with_projector(
                    "x1=0.5, x2=1/2",
                    ex5_1b_coin(0.5, 0.5),
                    Split,
                    linalg::basis_projector(2, 0),
                ),
            ],
        },
        "ex5_2" => Example {
            id: "ex5_2",
            summary: "ergodic lazy d=3",
            cases: vec![case("(L,B,R)", ex5_2_coin(), Recurrent)],
        },
        "ex5_3" => Example {
            id: "ex5_3",
            summary: "ergodic lazy d=2, two choices of B",
            cases: vec![
                case("B", ex5_3_coin(false), Transient),
                case("B'", ex5_3_coin(true), Recurrent),
            ],
        },
        "ex5_4" => Example {
            id: "ex5_4",
            summary: "non-lazy d=4, p1=p2=p3=1/6",
            cases: vec![case_with_projector(
                "(L,R)",
                ex5_4_coin(),
                Split,
                linalg::basis_projector(4, 3),
            )],
        },
        "ex5_5" => Example {
            id: "ex5_5",
            summary: "non-lazy d=3, two drifting enclosures",
            cases: vec![case("(L,R)", ex5_5_coin(), Transient)],
        },
        "ex5_6" => Example {
            id: "ex5_6",
            summary: "non-lazy d=4, two balanced enclosures",
            cases: vec![case("(L,R)", ex5_6_coin(), Recurrent)],
        },
        "ex7_1" => Example {
            id: "ex7_1",
            summary: "continuous-time d=2, H=[[-1,h],[conj h,2]]",
            cases: vec![
                case("h=-19/2", ex7_1_coin(r(-9.5)), Recurrent),
                case("h=0", ex7_1_coin(r(0.0)), Transient),
            ],
        },
        "ex7_2" => Example {
            id: "ex7_2",
            summary: "discrete 2D d=3, two drifting enclosures",
            cases: vec![case("(D)", ex7_2_coin(), Transient)],
        },
        "ex7_3" => Example {
            id: "ex7_3",
            summary: "continuous-time 2D d=3, jumps of ex7_2",
            cases: vec![
                case("(A,H1)", ex7_3_coin(false), Transient),
                case("(A,H2)", ex7_3_coin(true), Recurrent),
            ],
        },
        other => return Err(OqwError::InvalidArgument(format!("unknown example id `{other}`"))),
    };
    Ok(ex)
}

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub label: String,
    pub expected: VerdictKind,
    pub observed: std::result::Result<VerdictKind, OqwError>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ExampleOutcome {
    pub id: &'static str,
    pub cases: Vec<CaseOutcome>,
}

impl ExampleOutcome {
    pub fn pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }
}

/// Classifies every case of an example and compares with the expectation.
pub fn run_example(example: &Example, policy: &NumericPolicy) -> ExampleOutcome {
    let cases = example
        .cases
        .iter()
        .map(|case| {
            let verdict = classify::classify_coin(&case.coin, policy);
            let pass = match (&verdict, &case.transient_projector) {
                (Ok(v), Some(p)) => {
                    v.kind == case.expected && linalg::projector_gap(&v.transient_projector, p) <= policy.eigenvector_tol
                }
                (Ok(v), None) => v.kind == case.expected,
                (Err(_), _) => false,
            };
            CaseOutcome {
                label: case.label.clone(),
                expected: case.expected,
                observed: verdict.map(|v| v.kind),
                pass,
            }
        })
        .collect();
    ExampleOutcome {
        id: example.id,
        cases,
    }
}
