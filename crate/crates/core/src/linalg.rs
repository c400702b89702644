//! Dense complex linear algebra helpers shared by the rest of the crate.
//!
//! Matrices are [`nalgebra::DMatrix`] over [`Complex64`]; dimensions here stay
//! small (D ≤ 16, χ matrices at most D² × D²), so everything is dense.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Computational basis vector `|i⟩` of a `dim`-level system.
pub fn basis_vector(dim: usize, i: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[i] = ONE;
    v
}

/// Rank-one operator `|v⟩⟨v|`.
pub fn projector(v: &StateVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &StateVector, b: &StateVector) -> StateVector {
    a.kronecker(b)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Entrywise comparison with an absolute tolerance. Shapes must agree.
pub fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

pub fn is_square(m: &ComplexMatrix) -> bool {
    m.nrows() == m.ncols()
}

pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    is_square(m) && hermiticity_error(m) <= tol
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), m.ncols(), |r, k| {
        eig.eigenvectors[(r, order[k])]
    });
    (values, vectors)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

/// 2-norm condition number; infinite for a numerically rank-deficient matrix.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= f64::EPSILON * max {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Column-stacks `m` (column-major order, nalgebra's native layout).
pub fn vectorize(m: &ComplexMatrix) -> StateVector {
    StateVector::from_column_slice(m.as_slice())
}

/// Solves `a x = b` after rejecting systems whose condition number exceeds `max_condition`.
pub fn solve_checked(a: &ComplexMatrix, b: &StateVector, max_condition: f64) -> Result<StateVector> {
    let condition = condition_number(a);
    if !(condition <= max_condition) {
        return Err(Error::Singular { condition });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::Singular { condition })
}

/// Row-major `[[re, im], ...]` rows, the wire layout for matrices.
pub fn to_json_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
        .collect()
}

pub fn from_json_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::Format(format!(
            "ragged matrix: row of length {} in a matrix with {} columns",
            bad.len(),
            ncols
        )));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |r, k| {
        let [re, im] = rows[r][k];
        c(re, im)
    }))
}

/// Haar-random unit vector (normalized complex Gaussian).
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    let v = StateVector::from_fn(dim, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Random full-rank density matrix `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-random isometry with `rows ≥ cols` orthonormal columns.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rng, rows, cols).qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column phases so the distribution is Haar rather than QR-biased.
    let mut q = q;
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_isometry(&mut rng, 9, 3);
        let gram = v.adjoint() * &v;
        assert!(approx_eq(&gram, &ComplexMatrix::identity(3, 3), 1e-12));
    }

    #[test]
    fn random_density_is_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(&mut rng, 4);
        assert!(is_hermitian(&rho, 1e-12));
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&rho) > 0.0);
    }

    #[test]
    fn eigen_reconstructs_hermitian_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 5);
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let diag = ComplexMatrix::from_diagonal(&StateVector::from_iterator(
            5,
            vals.iter().map(|&x| c(x, 0.0)),
        ));
        let back = &vecs * diag * vecs.adjoint();
        assert!(approx_eq(&back, &h, 1e-10));
    }

    #[test]
    fn ragged_json_is_rejected() {
        let rows = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]];
        assert!(from_json_rows(&rows).is_err());
    }

    #[test]
    fn singular_solve_is_rejected() {
        let a = ComplexMatrix::from_element(2, 2, ONE);
        let b = StateVector::from_element(2, ONE);
        assert!(matches!(solve_checked(&a, &b, 1e8), Err(Error::Singular { .. })));
    }
}
