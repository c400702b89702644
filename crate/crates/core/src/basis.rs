//! Operator bases and expansions: matrix units, pure-state decompositions,
//! Hermitian (SU(d) generator) bases and the Choi ↔ Pauli change of basis.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::linalg::{self, c, ComplexMatrix, StateVector, I, ONE, ZERO};
use crate::tomo::{ChiBasis, ChiMatrix, QuditIndexMap};
use crate::{Error, Result, ALGEBRAIC_TOL};

/// Condition-number cap for expansion solves.
pub const MAX_CONDITION: f64 = 1e8;

/// Residual bound for expansions obtained from a linear solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// Matrix unit `Ẽ_ab = |a⟩⟨b|` of a `dim`-level system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChoiIndex {
    pub a: usize,
    pub b: usize,
    pub dim: usize,
}

impl ChoiIndex {
    pub fn new(a: usize, b: usize, dim: usize) -> Result<Self> {
        for index in [a, b] {
            if index >= dim {
                return Err(Error::IndexOutOfRange { index, dim });
            }
        }
        Ok(Self { a, b, dim })
    }

    /// Flattened position `a·D + b`.
    pub fn flat(&self) -> usize {
        self.a * self.dim + self.b
    }

    pub fn from_flat(flat: usize, dim: usize) -> Result<Self> {
        Self::new(flat / dim, flat % dim, dim)
    }

    pub fn is_diagonal(&self) -> bool {
        self.a == self.b
    }

    /// Index of `Ẽ_ab† = Ẽ_ba`.
    pub fn dagger(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
            dim: self.dim,
        }
    }

    pub fn operator(&self) -> ComplexMatrix {
        choi_op(self)
    }
}

pub fn choi_op(idx: &ChoiIndex) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(idx.dim, idx.dim);
    m[(idx.a, idx.b)] = ONE;
    m
}

/// `|ab,+⟩ = (|a⟩+|b⟩)/√2` and `|ab,−⟩ = (|a⟩+i|b⟩)/√2` for `a < b`.
pub fn superposition_states(a: usize, b: usize, dim: usize) -> Result<(StateVector, StateVector)> {
    if a >= b {
        return Err(Error::InvalidArgument(format!(
            "superposition states need a < b, got a={a}, b={b}"
        )));
    }
    if b >= dim {
        return Err(Error::IndexOutOfRange { index: b, dim });
    }
    let mut plus = StateVector::zeros(dim);
    plus[a] = c(FRAC_1_SQRT_2, 0.0);
    plus[b] = c(FRAC_1_SQRT_2, 0.0);
    let mut minus = StateVector::zeros(dim);
    minus[a] = c(FRAC_1_SQRT_2, 0.0);
    minus[b] = c(0.0, FRAC_1_SQRT_2);
    Ok((plus, minus))
}

/// `target = Σᵢ wᵢ |ψᵢ⟩⟨ψᵢ|`, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateExpansion {
    target: ComplexMatrix,
    terms: Vec<(Complex64, StateVector)>,
}

impl PureStateExpansion {
    /// Builds the expansion and rejects it unless every state is normalized and
    /// the weighted projector sum matches `target` within `tol`.
    pub fn verified(
        target: ComplexMatrix,
        terms: Vec<(Complex64, StateVector)>,
        tol: f64,
    ) -> Result<Self> {
        for (_, state) in &terms {
            if state.len() != target.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: target.nrows(),
                    actual: state.len(),
                });
            }
            if (state.norm() - 1.0).abs() > ALGEBRAIC_TOL {
                return Err(Error::InvalidArgument(format!(
                    "expansion state has norm {}",
                    state.norm()
                )));
            }
        }
        let out = Self { target, terms };
        let residual = linalg::max_abs_diff(&out.reconstruct(), &out.target);
        if residual > tol {
            return Err(Error::InvalidArgument(format!(
                "expansion residual {residual:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(out)
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn terms(&self) -> &[(Complex64, StateVector)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.target.nrows();
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, (w, s)| {
                acc + linalg::projector(s) * *w
            })
    }
}

/// Four-pure-state expansion of a matrix unit.
///
/// For `a < b`:
/// `Ẽ_ab = |ab,+⟩⟨ab,+| + i|ab,−⟩⟨ab,−| − (1+i)/2 (|a⟩⟨a| + |b⟩⟨b|)`.
/// For `a > b` the weights of `Ẽ_ba` are conjugated, and `a == b` is the single
/// projector `|a⟩⟨a|`.
pub fn expand_choi_four(idx: &ChoiIndex) -> PureStateExpansion {
    let dim = idx.dim;
    let target = idx.operator();
    let terms = if idx.a == idx.b {
        vec![(ONE, linalg::basis_vector(dim, idx.a))]
    } else {
        let (lo, hi, conj) = if idx.a < idx.b {
            (idx.a, idx.b, false)
        } else {
            (idx.b, idx.a, true)
        };
        let (plus, minus) = superposition_states(lo, hi, dim).expect("lo < hi < dim");
        let half = c(-0.5, -0.5);
        let weights = [ONE, I, half, half];
        let states = [
            plus,
            minus,
            linalg::basis_vector(dim, lo),
            linalg::basis_vector(dim, hi),
        ];
        weights
            .into_iter()
            .map(|w| if conj { w.conj() } else { w })
            .zip(states)
            .collect()
    };
    PureStateExpansion::verified(target, terms, ALGEBRAIC_TOL)
        .expect("four-state expansion reconstructs its matrix unit")
}

/// A set of `D²` states whose projectors span the operator space, with the
/// linear system for expansion coefficients prepared once.
#[derive(Debug, Clone)]
pub struct StateFrame {
    dim: usize,
    states: Vec<StateVector>,
    inverse: ComplexMatrix,
}

impl StateFrame {
    pub fn new(states: Vec<StateVector>) -> Result<Self> {
        let dim = states.first().map_or(0, StateVector::len);
        if dim == 0 {
            return Err(Error::InvalidArgument("empty state set".into()));
        }
        if states.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "need {} states for dimension {dim}, got {}",
                dim * dim,
                states.len()
            )));
        }
        for s in &states {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: s.len(),
                });
            }
            if (s.norm() - 1.0).abs() > ALGEBRAIC_TOL {
                return Err(Error::InvalidArgument(format!("state has norm {}", s.norm())));
            }
        }
        let n = dim * dim;
        let mut system = ComplexMatrix::zeros(n, n);
        for (m, s) in states.iter().enumerate() {
            system.set_column(m, &linalg::vectorize(&linalg::projector(s)));
        }
        let condition = linalg::condition_number(&system);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::Singular { condition });
        }
        let inverse = system.try_inverse().ok_or(Error::Singular { condition })?;
        Ok(Self {
            dim,
            states,
            inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Coefficients `r` with `target = Σₘ rₘ |Ψₘ⟩⟨Ψₘ|`.
    pub fn coefficients(&self, target: &ComplexMatrix) -> Result<StateVector> {
        if target.nrows() != self.dim || target.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: target.nrows(),
            });
        }
        Ok(&self.inverse * linalg::vectorize(target))
    }

    pub fn expand(&self, target: &ComplexMatrix) -> Result<PureStateExpansion> {
        let r = self.coefficients(target)?;
        let terms = r.iter().copied().zip(self.states.iter().cloned()).collect();
        PureStateExpansion::verified(target.clone(), terms, SOLVE_RESIDUAL_TOL)
    }
}

/// Expands `target` over the projectors of `D²` linearly independent states.
pub fn expand_operator_in_states(
    target: &ComplexMatrix,
    states: &[StateVector],
) -> Result<PureStateExpansion> {
    StateFrame::new(states.to_vec())?.expand(target)
}

/// `target = Σₙ sₙ Ôₙ` over Hermitian operators, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianExpansion {
    target: ComplexMatrix,
    terms: Vec<(Complex64, ComplexMatrix)>,
}

impl HermitianExpansion {
    pub fn verified(
        target: ComplexMatrix,
        terms: Vec<(Complex64, ComplexMatrix)>,
        tol: f64,
    ) -> Result<Self> {
        if let Some((_, op)) = terms.iter().find(|(_, op)| !linalg::is_hermitian(op, ALGEBRAIC_TOL)) {
            return Err(Error::InvalidArgument(format!(
                "expansion operator not Hermitian (error {:.3e})",
                linalg::hermiticity_error(op)
            )));
        }
        let out = Self { target, terms };
        let residual = linalg::max_abs_diff(&out.reconstruct(), &out.target);
        if residual > tol {
            return Err(Error::InvalidArgument(format!(
                "expansion residual {residual:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(out)
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn terms(&self) -> &[(Complex64, ComplexMatrix)] {
        &self.terms
    }

    pub fn weights(&self) -> Vec<Complex64> {
        self.terms.iter().map(|(w, _)| *w).collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.target.nrows();
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, (w, op)| acc + op * *w)
    }
}

/// `D²` linearly independent Hermitian `D×D` operators.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    operators: Vec<ComplexMatrix>,
    gram_inverse: ComplexMatrix,
}

impl HermitianBasis {
    pub fn new(dim: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "need {} operators for dimension {dim}, got {}",
                dim * dim,
                operators.len()
            )));
        }
        for op in &operators {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: op.nrows(),
                });
            }
            if !linalg::is_hermitian(op, ALGEBRAIC_TOL) {
                return Err(Error::InvalidArgument("basis operator is not Hermitian".into()));
            }
        }
        let n = operators.len();
        let gram = ComplexMatrix::from_fn(n, n, |m, k| (&operators[m] * &operators[k]).trace());
        let condition = linalg::condition_number(&gram);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::Singular { condition });
        }
        let gram_inverse = gram.try_inverse().ok_or(Error::Singular { condition })?;
        Ok(Self {
            dim,
            operators,
            gram_inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Coefficients from the Gram system `Σₙ Tr[OₘOₙ] sₙ = Tr[Oₘ T]`.
    pub fn coefficients(&self, target: &ComplexMatrix) -> Result<StateVector> {
        if target.nrows() != self.dim || target.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: target.nrows(),
            });
        }
        let rhs = StateVector::from_iterator(
            self.operators.len(),
            self.operators.iter().map(|op| (op * target).trace()),
        );
        Ok(&self.gram_inverse * rhs)
    }

    /// Tensor products `B₁ ⊗ B₂ ⊗ …`, first factor most significant, the
    /// operator index running row-major over the factors.
    pub fn tensor_power(&self, sites: usize) -> Result<Self> {
        let mut ops = vec![ComplexMatrix::identity(1, 1)];
        for _ in 0..sites {
            ops = ops
                .iter()
                .flat_map(|acc| self.operators.iter().map(move |op| linalg::kron(acc, op)))
                .collect();
        }
        Self::new(self.dim.pow(sites as u32), ops)
    }
}

pub fn expand_in_hermitian_basis(
    target: &ComplexMatrix,
    basis: &HermitianBasis,
) -> Result<HermitianExpansion> {
    let s = basis.coefficients(target)?;
    let terms = s.iter().copied().zip(basis.operators.iter().cloned()).collect();
    HermitianExpansion::verified(target.clone(), terms, SOLVE_RESIDUAL_TOL)
}

/// Identity followed by the `d²−1` generalized Gell-Mann matrices, normalized to
/// `Tr[ΓᵢΓⱼ] = 2δᵢⱼ`.
///
/// Ordering follows the usual Gell-Mann numbering: for each `k = 1..d−1`, the
/// symmetric and antisymmetric pairs `(j, k)` for `j < k`, then the `k`-th
/// diagonal generator. At `d = 2` this is `(𝟙, σx, σy, σz)`.
pub fn sud_generators(d: usize) -> Result<HermitianBasis> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("SU(d) generators need d >= 2, got {d}")));
    }
    let unit = |j: usize, k: usize| choi_op(&ChoiIndex { a: j, b: k, dim: d });
    let mut ops = vec![ComplexMatrix::identity(d, d)];
    for k in 1..d {
        for j in 0..k {
            ops.push(unit(j, k) + unit(k, j));
            ops.push(unit(j, k) * c(0.0, -1.0) + unit(k, j) * I);
        }
        let norm = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut diag = ComplexMatrix::zeros(d, d);
        for j in 0..k {
            diag[(j, j)] = c(norm, 0.0);
        }
        diag[(k, k)] = c(-(k as f64) * norm, 0.0);
        ops.push(diag);
    }
    HermitianBasis::new(d, ops)
}

/// Single-qubit Pauli set `(𝟙, σx, σy, σz)`.
pub fn pauli_matrices() -> [ComplexMatrix; 4] {
    [
        ComplexMatrix::identity(2, 2),
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// Tensor-product Pauli operators on `n` qubits, row-major over sites.
pub fn pauli_operators(n_qubits: usize) -> Vec<ComplexMatrix> {
    let single = pauli_matrices();
    let mut ops = vec![ComplexMatrix::identity(1, 1)];
    for _ in 0..n_qubits {
        ops = ops
            .iter()
            .flat_map(|acc| single.iter().map(move |p| linalg::kron(acc, p)))
            .collect();
    }
    ops
}

/// `U^{⊗N}`, where the single-qubit `U` maps `(Ē₀₀, Ē₀₁, Ē₁₀, Ē₁₁)` with
/// `Ē_ab = √2·|a⟩⟨b|` onto `(𝟙, σx, σy, σz)`.
pub fn pauli_choi_unitary(n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    let h = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let u = ComplexMatrix::from_row_slice(4, 4, &[
        c(h, 0.0), ZERO,         ZERO,        c(h, 0.0),
        ZERO,      c(h, 0.0),    c(h, 0.0),   ZERO,
        ZERO,      c(0.0, -h),   c(0.0, h),   ZERO,
        c(h, 0.0), ZERO,         ZERO,        c(-h, 0.0),
    ]);
    Ok((1..n_qubits).fold(u.clone(), |acc, _| linalg::kron(&acc, &u)))
}

/// Position of the Choi pair `(a; b)` (flat `a·D+b`) in the site-interleaved
/// ordering `(a₁b₁)(a₂b₂)…` used by tensor-product operator bases.
fn site_interleaved_order(n_qubits: usize) -> Vec<usize> {
    let map = QuditIndexMap::new(n_qubits, 2).expect("qubit map");
    let dim = map.total_dim();
    (0..dim * dim)
        .map(|flat| {
            let a = map.decompose(flat / dim).expect("in range");
            let b = map.decompose(flat % dim).expect("in range");
            a.iter().zip(&b).fold(0, |acc, (&ak, &bk)| acc * 4 + 2 * ak + bk)
        })
        .collect()
}

fn qubit_count(chi: &ChiMatrix, n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || chi.dim() != 1usize << n_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1usize.checked_shl(n_qubits as u32).unwrap_or(0),
            actual: chi.dim(),
        });
    }
    Ok(())
}

/// χ over matrix units → χ over tensor-product Pauli operators.
///
/// The matrix-unit χ is first rebased onto `Ē = √2·Ẽ` per site (a factor
/// `2⁻ᴺ`) and reordered site by site. Since `P = U·Ē` as operator vectors, the
/// coefficient vectors transform with the conjugate: `χᴾ = Ū χ Ūᵀ`.
pub fn chi_choi_to_pauli(chi_c: &ChiMatrix, n_qubits: usize) -> Result<ChiMatrix> {
    if chi_c.basis() != ChiBasis::Choi {
        return Err(Error::InvalidArgument("expected a χ matrix over matrix units".into()));
    }
    qubit_count(chi_c, n_qubits)?;
    let order = site_interleaved_order(n_qubits);
    let n = order.len();
    let scale = 1.0 / (1u64 << n_qubits) as f64;
    let src = chi_c.matrix();
    let mut scaled = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            scaled[(order[i], order[j])] = src[(i, j)] * scale;
        }
    }
    let v = pauli_choi_unitary(n_qubits)?.map(|z| z.conj());
    ChiMatrix::with_basis(chi_c.dim(), &v * scaled * v.adjoint(), ChiBasis::Pauli)
}

/// Inverse of [`chi_choi_to_pauli`].
pub fn chi_pauli_to_choi(chi_p: &ChiMatrix, n_qubits: usize) -> Result<ChiMatrix> {
    if chi_p.basis() != ChiBasis::Pauli {
        return Err(Error::InvalidArgument("expected a χ matrix over Pauli operators".into()));
    }
    qubit_count(chi_p, n_qubits)?;
    let v = pauli_choi_unitary(n_qubits)?.map(|z| z.conj());
    let scaled = v.adjoint() * chi_p.matrix() * &v;
    let order = site_interleaved_order(n_qubits);
    let n = order.len();
    let factor = (1u64 << n_qubits) as f64;
    let out = ComplexMatrix::from_fn(n, n, |i, j| scaled[(order[i], order[j])] * factor);
    ChiMatrix::with_basis(chi_p.dim(), out, ChiBasis::Choi)
}
