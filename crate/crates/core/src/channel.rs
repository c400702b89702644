//! Quantum channels in Kraus form, `ε(ρ) = Σₘ Eᵐ ρ (Eᵐ)†`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, ComplexMatrix, StateVector, I, ONE, ZERO};
use crate::tomo::ChiMatrix;
use crate::{Error, Result, PHYSICAL_TOL};

/// Names accepted by [`QuantumChannel::preset`].
pub const PRESET_NAMES: [&str; 6] = [
    "identity",
    "bit-flip",
    "phase-flip",
    "depolarizing",
    "amplitude-damping",
    "random-cptp",
];

/// Kraus rank used by `random-cptp` when only a seed is supplied.
pub const DEFAULT_RANDOM_RANK: usize = 2;

/// A normalized, Hermitian, positive semidefinite state operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at [`PHYSICAL_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !linalg::is_square(&matrix) {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > PHYSICAL_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > PHYSICAL_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -PHYSICAL_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(state: &StateVector) -> Result<Self> {
        Self::new(linalg::projector(state))
    }

    /// Computational basis state `|i⟩⟨i|`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, dim });
        }
        Self::pure(&linalg::basis_vector(dim, i))
    }

    /// Wraps an operator without validation. Used for channel outputs, which are
    /// subnormalized when the channel is trace decreasing.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
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

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// A completely positive map on `D`-level operators given by its Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

/// Result of [`QuantumChannel::validate_cptp`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub kraus_count: usize,
    pub tolerance: f64,
    /// `‖Σ E†E − 𝟙‖_max`.
    pub tp_deviation: f64,
    pub trace_preserving: bool,
    /// Smallest eigenvalue of the χ oracle; a complete-positivity witness.
    pub min_chi_eigenvalue: f64,
    pub completely_positive: bool,
    /// `Tr χ`, equal to `D` for trace-preserving channels.
    pub chi_trace: f64,
    pub trace_law_holds: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.trace_preserving && self.completely_positive && self.trace_law_holds
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelJson {
    dim: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl QuantumChannel {
    pub fn new(dim: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("channel dimension must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::Format(format!(
                    "Kraus operator is {}x{}, expected {dim}x{dim}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        Ok(Self { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![ComplexMatrix::identity(dim, dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Applies the Kraus sum to an arbitrary (possibly non-Hermitian) operator.
    pub fn apply_operator(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        if op.nrows() != self.dim || op.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: op.nrows().max(op.ncols()),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * op * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_operator(rho.matrix())
            .map(DensityMatrix::from_matrix_unchecked)
    }

    /// `ε(|ψ⟩⟨ψ|)`.
    pub fn apply_pure(&self, state: &StateVector) -> Result<ComplexMatrix> {
        if state.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: state.len(),
            });
        }
        self.apply_operator(&linalg::projector(state))
    }

    /// `‖Σₘ (Eᵐ)†Eᵐ − 𝟙‖_max`.
    pub fn tp_deviation(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, k| {
                acc + k.adjoint() * k
            });
        linalg::max_abs_diff(&sum, &ComplexMatrix::identity(self.dim, self.dim))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.tp_deviation() <= tol
    }

    /// Errors unless the channel is trace preserving at [`PHYSICAL_TOL`].
    pub fn require_trace_preserving(&self) -> Result<()> {
        let deviation = self.tp_deviation();
        if deviation > PHYSICAL_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(())
    }

    /// χ in the matrix-unit basis, straight from the Kraus operators:
    /// `χ_{ef;gh} = Σₘ Eᵐ_{ef} (Eᵐ_{gh})*`, rows and columns flattened as `e·D+f`.
    pub fn chi_oracle(&self) -> ChiMatrix {
        let n = self.dim * self.dim;
        let mut chi = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            // Row-major flattening of Eᵐ gives the coefficient vector eᵐ.
            let coeffs = StateVector::from_iterator(n, k.transpose().iter().copied());
            chi += &coeffs * coeffs.adjoint();
        }
        ChiMatrix::from_matrix(self.dim, chi).expect("oracle has consistent shape")
    }

    pub fn validate_cptp(&self, tol: f64) -> Result<ValidationReport> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let tp_deviation = self.tp_deviation();
        let chi = self.chi_oracle();
        let min_chi_eigenvalue = linalg::min_eigenvalue(chi.matrix());
        let chi_trace = chi.trace().re;
        let trace_preserving = tp_deviation <= tol;
        Ok(ValidationReport {
            dim: self.dim,
            kraus_count: self.kraus.len(),
            tolerance: tol,
            tp_deviation,
            trace_preserving,
            min_chi_eigenvalue,
            completely_positive: min_chi_eigenvalue >= -tol,
            chi_trace,
            trace_law_holds: (chi_trace - self.dim as f64).abs() <= tol,
        })
    }

    /// `{Eᵐ ⊗ Fⁿ}` acting on `d₁·d₂` levels, first factor most significant.
    pub fn kron(&self, other: &QuantumChannel) -> QuantumChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        QuantumChannel {
            dim: self.dim * other.dim,
            kraus,
        }
    }

    /// Standard Kraus decompositions of the named channels.
    ///
    /// * `identity`: no parameters.
    /// * `bit-flip`, `phase-flip`: `[p]`; cyclic shift `X` / clock `Z` with probability `p`.
    /// * `depolarizing`: `[p]`; `ρ ↦ (1−p)ρ + p·𝟙/D` via the D² Weyl operators.
    /// * `amplitude-damping`: `[γ]`; qubits only.
    /// * `random-cptp`: `[seed]` or `[seed, rank]`; Haar-random Stinespring isometry.
    pub fn preset(name: &str, params: &[f64], dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::ParameterOutOfRange(format!("dimension {dim} < 2")));
        }
        let probability = |params: &[f64]| -> Result<f64> {
            match params {
                [p] if (0.0..=1.0).contains(p) => Ok(*p),
                [p] => Err(Error::ParameterOutOfRange(format!(
                    "{name}: probability {p} not in [0, 1]"
                ))),
                _ => Err(Error::ParameterOutOfRange(format!(
                    "{name}: expected one parameter, got {}",
                    params.len()
                ))),
            }
        };
        let id = ComplexMatrix::identity(dim, dim);
        match name {
            "identity" => {
                if !params.is_empty() {
                    return Err(Error::ParameterOutOfRange("identity takes no parameters".into()));
                }
                Ok(Self::identity(dim))
            }
            "bit-flip" => {
                let p = probability(params)?;
                Self::new(dim, vec![id.scale((1.0 - p).sqrt()), shift(dim).scale(p.sqrt())])
            }
            "phase-flip" => {
                let p = probability(params)?;
                Self::new(dim, vec![id.scale((1.0 - p).sqrt()), clock(dim).scale(p.sqrt())])
            }
            "depolarizing" => {
                let p = probability(params)?;
                let d2 = (dim * dim) as f64;
                let mut kraus = vec![id.scale((1.0 - p * (d2 - 1.0) / d2).sqrt())];
                let (x, z) = (shift(dim), clock(dim));
                for j in 0..dim {
                    for k in 0..dim {
                        if j == 0 && k == 0 {
                            continue;
                        }
                        let weyl = x.pow(j as u32) * z.pow(k as u32);
                        kraus.push(weyl.scale((p / d2).sqrt()));
                    }
                }
                Self::new(dim, kraus)
            }
            "amplitude-damping" => {
                if dim != 2 {
                    return Err(Error::ParameterOutOfRange(
                        "amplitude-damping is defined for dim 2 only".into(),
                    ));
                }
                let g = probability(params)?;
                let e0 = ComplexMatrix::from_row_slice(
                    2,
                    2,
                    &[ONE, ZERO, ZERO, c((1.0 - g).sqrt(), 0.0)],
                );
                let e1 = ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(g.sqrt(), 0.0), ZERO, ZERO]);
                Self::new(2, vec![e0, e1])
            }
            "random-cptp" => {
                let (seed, rank) = match params {
                    [s] => (*s, DEFAULT_RANDOM_RANK as f64),
                    [s, r] => (*s, *r),
                    _ => {
                        return Err(Error::ParameterOutOfRange(
                            "random-cptp expects [seed] or [seed, rank]".into(),
                        ))
                    }
                };
                let as_count = |v: f64, what: &str| -> Result<u64> {
                    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
                        Ok(v as u64)
                    } else {
                        Err(Error::ParameterOutOfRange(format!(
                            "random-cptp: {what} must be a non-negative integer, got {v}"
                        )))
                    }
                };
                let seed = as_count(seed, "seed")?;
                let rank = as_count(rank, "rank")? as usize;
                if rank == 0 {
                    return Err(Error::ParameterOutOfRange("random-cptp: rank must be >= 1".into()));
                }
                Ok(Self::random_cptp(seed, rank, dim))
            }
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Kraus operators as the `D×D` blocks of a Haar-random `(rank·D)×D` isometry.
    pub fn random_cptp(seed: u64, rank: usize, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_cptp_with(&mut rng, rank, dim)
    }

    pub fn random_cptp_with<R: rand::Rng + ?Sized>(rng: &mut R, rank: usize, dim: usize) -> Self {
        let v = linalg::random_isometry(rng, rank * dim, dim);
        let kraus = (0..rank)
            .map(|m| v.rows(m * dim, dim).into_owned())
            .collect();
        Self { dim, kraus }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ChannelJson = serde_json::from_str(text)?;
        let kraus = raw
            .kraus
            .iter()
            .map(|rows| {
                let m = linalg::from_json_rows(rows)?;
                if !linalg::is_square(&m) {
                    return Err(Error::Format(format!(
                        "Kraus operator is {}x{}, not square",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.dim, kraus)
    }

    pub fn to_json(&self) -> String {
        let raw = ChannelJson {
            dim: self.dim,
            kraus: self.kraus.iter().map(linalg::to_json_rows).collect(),
        };
        serde_json::to_string(&raw).expect("channel serializes")
    }
}

/// Cyclic shift `|k⟩ ↦ |k+1 mod D⟩` (Pauli X for qubits).
fn shift(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |r, k| if r == (k + 1) % dim { ONE } else { ZERO })
}

/// Clock operator `|k⟩ ↦ ωᵏ|k⟩` (Pauli Z for qubits).
fn clock(dim: usize) -> ComplexMatrix {
    let omega = |k: usize| (I * (2.0 * std::f64::consts::PI * k as f64 / dim as f64)).exp();
    ComplexMatrix::from_fn(dim, dim, |r, k| if r == k { omega(k) } else { ZERO })
}
