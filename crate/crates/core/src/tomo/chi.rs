use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{pauli_operators, ChoiIndex};
use crate::channel::QuantumChannel;
use crate::linalg::{self, ComplexMatrix};
use crate::{Error, Result};

/// Operator basis a χ matrix is expanded over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChiBasis {
    /// Matrix units `|e⟩⟨f|`, row/column `(e,f)` flattened as `e·D+f`.
    #[serde(rename = "choi-row-ef")]
    Choi,
    /// Tensor-product Pauli operators, `(𝟙,σx,σy,σz)` per site, row-major over sites.
    #[serde(rename = "pauli-row-major")]
    Pauli,
}

impl ChiBasis {
    pub fn convention(&self) -> &'static str {
        match self {
            ChiBasis::Choi => "choi-row-ef",
            ChiBasis::Pauli => "pauli-row-major",
        }
    }
}

/// Process matrix of a `D`-level channel: `ε(ρ) = Σ χ_{mn} Aₘ ρ Aₙ†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    dim: usize,
    basis: ChiBasis,
    matrix: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct ChiJson {
    dim: usize,
    convention: ChiBasis,
    entries: Vec<[f64; 2]>,
}

impl ChiMatrix {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        Self::with_basis(dim, matrix, ChiBasis::Choi)
    }

    pub fn with_basis(dim: usize, matrix: ComplexMatrix, basis: ChiBasis) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: matrix.nrows(),
            });
        }
        if basis == ChiBasis::Pauli && !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "Pauli-basis χ needs a qubit dimension, got {dim}"
            )));
        }
        Ok(Self { dim, basis, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> ChiBasis {
        self.basis
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `χ_{ef;gh}` in matrix-unit indexing.
    pub fn get(&self, e: usize, f: usize, g: usize, h: usize) -> Complex64 {
        self.matrix[(e * self.dim + f, g * self.dim + h)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn max_abs_diff(&self, other: &ChiMatrix) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    /// The operators `Aₘ` this χ is expanded over, in index order.
    pub fn basis_operators(&self) -> Vec<ComplexMatrix> {
        match self.basis {
            ChiBasis::Choi => (0..self.dim * self.dim)
                .map(|flat| ChoiIndex::from_flat(flat, self.dim).expect("in range").operator())
                .collect(),
            ChiBasis::Pauli => pauli_operators(self.dim.trailing_zeros() as usize),
        }
    }

    /// Evaluates `Σ χ_{mn} Aₘ ρ Aₙ†` on an arbitrary operator.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rho.nrows(),
            });
        }
        let ops = self.basis_operators();
        let left: Vec<_> = ops.iter().map(|a| a * rho).collect();
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (m, lm) in left.iter().enumerate() {
            for (n, an) in ops.iter().enumerate() {
                let w = self.matrix[(m, n)];
                if w != linalg::ZERO {
                    out += lm * an.adjoint() * w;
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let n = self.matrix.nrows();
        let entries = (0..n)
            .flat_map(|r| (0..n).map(move |k| (r, k)))
            .map(|(r, k)| [self.matrix[(r, k)].re, self.matrix[(r, k)].im])
            .collect();
        let raw = ChiJson {
            dim: self.dim,
            convention: self.basis,
            entries,
        };
        serde_json::to_string(&raw).expect("χ serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ChiJson = serde_json::from_str(text)?;
        let n = raw.dim * raw.dim;
        if raw.entries.len() != n * n {
            return Err(Error::Format(format!(
                "expected {} entries for dim {}, got {}",
                n * n,
                raw.dim,
                raw.entries.len()
            )));
        }
        let matrix = ComplexMatrix::from_fn(n, n, |r, k| {
            let [re, im] = raw.entries[r * n + k];
            linalg::c(re, im)
        });
        Self::with_basis(raw.dim, matrix, raw.convention)
    }
}

/// Raw tomography data `λ_{ab;cd} = Tr[Ẽ_cd† ε(Ẽ_ab)]`, rows `(a,b)`, columns `(c,d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl LambdaMatrix {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: matrix.nrows(),
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

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.matrix[(a * self.dim + b, c * self.dim + d)]
    }
}

/// `λ_{ab;cd} = ⟨c|ε(|a⟩⟨b|)|d⟩`, from the channel acting on each matrix unit.
pub fn lambda_oracle(ch: &QuantumChannel) -> LambdaMatrix {
    let dim = ch.dim();
    let n = dim * dim;
    let mut matrix = ComplexMatrix::zeros(n, n);
    for row in 0..n {
        let unit = ChoiIndex::from_flat(row, dim).expect("in range").operator();
        let out = ch.apply_operator(&unit).expect("dimensions agree");
        for c in 0..dim {
            for d in 0..dim {
                matrix[(row, c * dim + d)] = out[(c, d)];
            }
        }
    }
    LambdaMatrix { dim, matrix }
}

/// `χ_{ca;db} = λ_{ab;cd}`.
pub fn chi_from_lambda(lam: &LambdaMatrix) -> ChiMatrix {
    let dim = lam.dim;
    let n = dim * dim;
    let mut chi = ComplexMatrix::zeros(n, n);
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                for d in 0..dim {
                    chi[(c * dim + a, d * dim + b)] = lam.get(a, b, c, d);
                }
            }
        }
    }
    ChiMatrix {
        dim,
        basis: ChiBasis::Choi,
        matrix: chi,
    }
}

/// `λ_{ab;cd} = χ_{ca;db}`; inverse of [`chi_from_lambda`].
pub fn lambda_from_chi(chi: &ChiMatrix) -> Result<LambdaMatrix> {
    if chi.basis != ChiBasis::Choi {
        return Err(Error::InvalidArgument("λ is defined for matrix-unit χ only".into()));
    }
    let dim = chi.dim;
    let n = dim * dim;
    let matrix = ComplexMatrix::from_fn(n, n, |row, col| {
        let (a, b) = (row / dim, row % dim);
        let (c, d) = (col / dim, col % dim);
        chi.get(c, a, d, b)
    });
    Ok(LambdaMatrix { dim, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{approx_eq, c, ONE, ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_lambda_is_identity() {
        let lam = lambda_oracle(&QuantumChannel::identity(2));
        assert!(approx_eq(lam.matrix(), &ComplexMatrix::identity(4, 4), 0.0));
    }

    #[test]
    fn lambda_diagonal_blocks_are_transition_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = QuantumChannel::random_cptp_with(&mut rng, 2, 3);
        let lam = lambda_oracle(&ch);
        for a in 0..3 {
            for b in 0..3 {
                let rho = crate::DensityMatrix::basis(3, b).unwrap();
                let out = ch.apply(&rho).unwrap();
                assert!((lam.get(b, b, a, a) - out.matrix()[(a, a)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn permutation_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = QuantumChannel::random_cptp_with(&mut rng, 3, 3);
        let chi = ch.chi_oracle();
        let back = chi_from_lambda(&lambda_from_chi(&chi).unwrap());
        assert_eq!(back, chi);
    }

    #[test]
    fn identity_chi_from_lambda() {
        let chi = chi_from_lambda(&lambda_oracle(&QuantumChannel::identity(2)));
        assert_eq!(chi.get(0, 0, 1, 1), ONE);
        assert_eq!(chi.get(1, 1, 0, 0), ONE);
        assert_eq!(chi.get(0, 1, 0, 1), ZERO);
        assert_eq!(chi, QuantumChannel::identity(2).chi_oracle());
    }

    #[test]
    fn json_round_trip() {
        let chi = QuantumChannel::random_cptp(5, 2, 2).chi_oracle();
        let back = ChiMatrix::from_json(&chi.to_json()).unwrap();
        assert_eq!(back, chi);
        assert!(chi.to_json().contains("\"convention\":\"choi-row-ef\""));
        assert!(ChiMatrix::from_json(r#"{"dim":2,"convention":"choi-row-ef","entries":[[1,0]]}"#).is_err());
    }

    #[test]
    fn chi_apply_matches_channel() {
        let ch = QuantumChannel::preset("amplitude-damping", &[0.3], 2).unwrap();
        let rho = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.5, 0.0)]);
        let via_chi = ch.chi_oracle().apply(&rho).unwrap();
        assert!(approx_eq(&via_chi, &ch.apply_operator(&rho).unwrap(), 1e-15));
    }
}
