use nalgebra::DMatrix;

use super::chi::{ChiMatrix, LambdaMatrix};
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// Largest dimension for which [`BetaPermutation::dense`] materializes `D⁴×D⁴`.
pub const MAX_DENSE_DIM: usize = 3;

/// `β^{ef;gh}_{ab;cd} = Tr(Ẽ_cd† Ẽ_ef Ẽ_ab Ẽ_gh†) = δ_ec δ_fa δ_gd δ_hb`.
pub fn beta_entry(ef: (usize, usize), gh: (usize, usize), ab: (usize, usize), cd: (usize, usize)) -> u8 {
    let (e, f) = ef;
    let (g, h) = gh;
    let (a, b) = ab;
    let (c, d) = cd;
    u8::from(e == c && f == a && g == d && h == b)
}

/// `λ = β χ` as an index bijection on flattened `D⁴` vectors.
///
/// A χ entry `(ef;gh)` sits at `(e·D+f)·D² + g·D+h`, a λ entry `(ab;cd)` at
/// `(a·D+b)·D² + c·D+d`; `forward` sends the former to the latter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaPermutation {
    dim: usize,
    forward: Vec<usize>,
}

impl BetaPermutation {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("β needs D >= 2, got {dim}")));
        }
        let d = dim;
        let forward = (0..d.pow(4))
            .map(|chi_flat| {
                let (row, col) = (chi_flat / (d * d), chi_flat % (d * d));
                let (e, f) = (row / d, row % d);
                let (g, h) = (col / d, col % d);
                let (a, b, c, dd) = (f, h, e, g);
                (a * d + b) * d * d + c * d + dd
            })
            .collect();
        Ok(Self { dim, forward })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// λ position of the χ entry at `chi_flat`.
    pub fn forward(&self, chi_flat: usize) -> usize {
        self.forward[chi_flat]
    }

    /// The transpose (= inverse) as an index map: χ position of a λ entry.
    pub fn transpose_map(&self) -> Vec<usize> {
        let mut inv = vec![usize::MAX; self.forward.len()];
        for (src, &dst) in self.forward.iter().enumerate() {
            inv[dst] = src;
        }
        inv
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.forward.len()];
        for &dst in &self.forward {
            if dst >= seen.len() || std::mem::replace(&mut seen[dst], true) {
                return false;
            }
        }
        true
    }

    /// Sign of the permutation from its cycle decomposition.
    pub fn parity(&self) -> i8 {
        let mut visited = vec![false; self.forward.len()];
        let mut transpositions = 0usize;
        for start in 0..self.forward.len() {
            let mut len = 0usize;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.forward[i];
                len += 1;
            }
            transpositions += len.saturating_sub(1);
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Dense `D⁴×D⁴` matrix, rows `(ab;cd)`, columns `(ef;gh)`. Only for `D ≤ 3`.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        if self.dim > MAX_DENSE_DIM {
            return Err(Error::InvalidArgument(format!(
                "dense β limited to D <= {MAX_DENSE_DIM}, got {}",
                self.dim
            )));
        }
        let d = self.dim;
        let n = d.pow(4);
        let split = |flat: usize| {
            let (r, c) = (flat / (d * d), flat % (d * d));
            ((r / d, r % d), (c / d, c % d))
        };
        Ok(DMatrix::from_fn(n, n, |row, col| {
            let (ab, cd) = split(row);
            let (ef, gh) = split(col);
            beta_entry(ef, gh, ab, cd) as f64
        }))
    }

    /// `λ = β χ`.
    pub fn apply(&self, chi: &ChiMatrix) -> Result<LambdaMatrix> {
        self.check(chi.dim())?;
        let src = flatten(chi.matrix());
        let mut dst = vec![num_complex::Complex64::default(); src.len()];
        for (i, z) in src.into_iter().enumerate() {
            dst[self.forward[i]] = z;
        }
        LambdaMatrix::from_matrix(self.dim, unflatten(&dst, self.dim * self.dim))
    }

    /// `χ = βᵀ λ`.
    pub fn apply_transpose(&self, lam: &LambdaMatrix) -> Result<ChiMatrix> {
        self.check(lam.dim())?;
        let src = flatten(lam.matrix());
        let chi: Vec<_> = (0..src.len()).map(|i| src[self.forward[i]]).collect();
        ChiMatrix::from_matrix(self.dim, unflatten(&chi, self.dim * self.dim))
    }

    fn check(&self, dim: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: dim,
            });
        }
        Ok(())
    }
}

fn flatten(m: &ComplexMatrix) -> Vec<num_complex::Complex64> {
    m.transpose().as_slice().to_vec()
}

fn unflatten(v: &[num_complex::Complex64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(n, n, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomo::chi::{chi_from_lambda, lambda_oracle};
    use crate::QuantumChannel;

    #[test]
    fn entry_examples() {
        assert_eq!(beta_entry((0, 0), (1, 1), (0, 1), (0, 1)), 1);
        assert_eq!(beta_entry((0, 1), (1, 1), (0, 1), (0, 1)), 0);
    }

    #[test]
    fn dense_is_a_permutation_matrix() {
        for d in [2, 3] {
            let dense = BetaPermutation::new(d).unwrap().dense().unwrap();
            for i in 0..dense.nrows() {
                assert_eq!(dense.row(i).sum(), 1.0);
                assert_eq!(dense.column(i).sum(), 1.0);
            }
            let btb = dense.transpose() * &dense;
            assert_eq!(btb, DMatrix::identity(dense.nrows(), dense.ncols()));
        }
    }

    #[test]
    fn determinant_matches_cycle_parity() {
        // Swapping two D-valued slots of a 4-slot index is a product of
        // D²·D(D−1)/2 transpositions; the slot map (e,f,g,h) → (f,h,e,g) is a
        // 4-cycle, so the sign is (−1)^{3·D³(D−1)/2}: +1 at D=2, −1 at D=3.
        for (d, expected) in [(2, 1.0), (3, -1.0)] {
            let beta = BetaPermutation::new(d).unwrap();
            let det = beta.dense().unwrap().determinant();
            assert_eq!(det, expected, "D={d}");
            assert_eq!(beta.parity() as f64, expected);
        }
        assert_eq!(BetaPermutation::new(4).unwrap().parity(), 1);
    }

    #[test]
    fn forward_then_transpose_is_identity_at_d4() {
        let beta = BetaPermutation::new(4).unwrap();
        assert!(beta.is_bijection());
        let inv = beta.transpose_map();
        assert!((0..beta.len()).all(|i| inv[beta.forward(i)] == i));
        assert!(beta.dense().is_err());
    }

    #[test]
    fn transpose_path_agrees_with_index_permutation() {
        for d in [2, 3] {
            let ch = QuantumChannel::random_cptp(d as u64, 2, d);
            let lam = lambda_oracle(&ch);
            let beta = BetaPermutation::new(d).unwrap();
            let via_beta = beta.apply_transpose(&lam).unwrap();
            let via_perm = chi_from_lambda(&lam);
            assert!(via_beta.max_abs_diff(&via_perm) <= 1e-14);
            let lam_back = beta.apply(&via_beta).unwrap();
            assert_eq!(lam_back, lam);
        }
    }
}
