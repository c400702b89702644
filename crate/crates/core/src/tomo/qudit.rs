use std::f64::consts::FRAC_1_SQRT_2;

use crate::linalg::{self, c, StateVector, ONE};
use crate::{Error, Result, ALGEBRAIC_TOL};

/// Base-`d` positional map between a level `a < dᴺ` of `N` qudits and its
/// local digits `a₁…a_N`, site 1 most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuditIndexMap {
    sites: usize,
    local_dim: usize,
}

impl QuditIndexMap {
    pub fn new(sites: usize, local_dim: usize) -> Result<Self> {
        if sites == 0 || local_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "qudit map needs N >= 1 and d >= 2, got N={sites}, d={local_dim}"
            )));
        }
        if local_dim.checked_pow(sites as u32).is_none() {
            return Err(Error::InvalidArgument("d^N overflows".into()));
        }
        Ok(Self { sites, local_dim })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn total_dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    pub fn compose(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.sites {
            return Err(Error::InvalidArgument(format!(
                "expected {} digits, got {}",
                self.sites,
                digits.len()
            )));
        }
        digits.iter().try_fold(0, |acc, &digit| {
            if digit >= self.local_dim {
                Err(Error::IndexOutOfRange {
                    index: digit,
                    dim: self.local_dim,
                })
            } else {
                Ok(acc * self.local_dim + digit)
            }
        })
    }

    pub fn decompose(&self, index: usize) -> Result<Vec<usize>> {
        let total = self.total_dim();
        if index >= total {
            return Err(Error::IndexOutOfRange { index, dim: total });
        }
        let mut digits = vec![0; self.sites];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = rest % self.local_dim;
            rest /= self.local_dim;
        }
        Ok(digits)
    }
}

/// Entanglement structure of the superposition states `|ab,±⟩` on `N` qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzProfile {
    pub a_digits: Vec<usize>,
    pub b_digits: Vec<usize>,
    /// Sites (0-based) where the digit strings differ; `M` is their count.
    pub differing_sites: Vec<usize>,
    /// `|ab,+⟩` (or `|a⟩` when `a == b`).
    pub plus: StateVector,
    /// `|ab,−⟩` (or `|a⟩` when `a == b`).
    pub minus: StateVector,
    /// Largest amplitude error of the GHZ ⊗ product factorization.
    pub factorization_error: f64,
}

impl GhzProfile {
    pub fn entangled_sites(&self) -> usize {
        self.differing_sites.len()
    }

    pub fn is_product(&self) -> bool {
        self.differing_sites.is_empty()
    }
}

/// Splits `|ab,±⟩ = (|a⟩ + φ|b⟩)/√2` (φ = 1, i) into a GHZ-type state on the
/// `M` sites where `a` and `b` differ, times `|a_j⟩` on the agreeing sites.
///
/// The factorized state is assembled from the GHZ part and the product part
/// independently, reordered to the original site order and compared amplitude
/// by amplitude against the direct superposition.
pub fn ghz_profile(a: usize, b: usize, map: &QuditIndexMap) -> Result<GhzProfile> {
    let a_digits = map.decompose(a)?;
    let b_digits = map.decompose(b)?;
    let dim = map.total_dim();
    let d = map.local_dim();
    let differing_sites: Vec<usize> = (0..map.sites()).filter(|&j| a_digits[j] != b_digits[j]).collect();
    let agreeing: Vec<usize> = (0..map.sites()).filter(|&j| a_digits[j] == b_digits[j]).collect();

    let (plus, minus) = if a == b {
        let v = linalg::basis_vector(dim, a);
        (v.clone(), v)
    } else {
        let mk = |phase| {
            let mut v = StateVector::zeros(dim);
            v[a] += c(FRAC_1_SQRT_2, 0.0);
            v[b] += phase * FRAC_1_SQRT_2;
            v
        };
        (mk(ONE), mk(linalg::I))
    };

    // Product of local basis vectors at the given sites.
    let local = |digits: &[usize], sites: &[usize]| {
        sites.iter().fold(StateVector::from_element(1, ONE), |acc, &j| {
            linalg::kron_vec(&acc, &linalg::basis_vector(d, digits[j]))
        })
    };
    let rest = local(&a_digits, &agreeing);
    let factored = |phase| -> StateVector {
        let ghz = if differing_sites.is_empty() {
            StateVector::from_element(1, ONE)
        } else {
            (local(&a_digits, &differing_sites) + local(&b_digits, &differing_sites) * phase)
                * c(FRAC_1_SQRT_2, 0.0)
        };
        // Tensor factors are ordered (differing…, agreeing…); move them back.
        let permuted = linalg::kron_vec(&ghz, &rest);
        let order: Vec<usize> = differing_sites.iter().chain(&agreeing).copied().collect();
        let inner = QuditIndexMap {
            sites: map.sites(),
            local_dim: d,
        };
        let mut out = StateVector::zeros(dim);
        for (k, amp) in permuted.iter().enumerate() {
            let perm_digits = inner.decompose(k).expect("in range");
            let mut digits = vec![0; map.sites()];
            for (slot, &site) in order.iter().enumerate() {
                digits[site] = perm_digits[slot];
            }
            out[map.compose(&digits).expect("in range")] = *amp;
        }
        out
    };
    let err = |direct: &StateVector, phase| {
        (direct - factored(phase)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    let factorization_error = if a == b {
        err(&plus, ONE)
    } else {
        err(&plus, ONE).max(err(&minus, linalg::I))
    };
    if factorization_error > ALGEBRAIC_TOL {
        return Err(Error::InvalidArgument(format!(
            "GHZ factorization failed with error {factorization_error:.3e}"
        )));
    }
    Ok(GhzProfile {
        a_digits,
        b_digits,
        differing_sites,
        plus,
        minus,
        factorization_error,
    })
}
