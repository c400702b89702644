//! Measurement backends: exact expectation values and finite-shot sampling.
//!
//! A setting prepares `|ψ⟩`, sends it through the channel and measures either a
//! projector `|φ⟩⟨φ|` or a Hermitian observable. Sampled outcomes draw from a
//! ChaCha stream seeded by hashing the master seed with the setting's canonical
//! encoding, so results do not depend on evaluation order or threading.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::superposition_states;
use crate::channel::QuantumChannel;
use crate::linalg::{self, ComplexMatrix, StateVector};
use crate::{Error, Result, ALGEBRAIC_TOL};

/// Probabilities in `[-PROBABILITY_SLACK, 0)` are rounding noise and clamp to 0.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Decimal digits kept when encoding amplitudes for seeding and deduplication.
const CANONICAL_DIGITS: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `|φ⟩⟨φ|` for a unit vector `φ`.
    Projector(StateVector),
    Hermitian(ComplexMatrix),
}

/// One experimental configuration: an input state and what is measured on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    input: StateVector,
    observable: Observable,
}

impl MeasurementSetting {
    pub fn new(input: StateVector, observable: Observable) -> Result<Self> {
        let dim = input.len();
        check_unit(&input)?;
        match &observable {
            Observable::Projector(phi) => {
                if phi.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: phi.len(),
                    });
                }
                check_unit(phi)?;
            }
            Observable::Hermitian(op) => {
                if op.nrows() != dim || op.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: op.nrows(),
                    });
                }
                if !linalg::is_hermitian(op, ALGEBRAIC_TOL) {
                    return Err(Error::InvalidArgument("observable is not Hermitian".into()));
                }
            }
        }
        Ok(Self { input, observable })
    }

    pub fn projector(input: StateVector, phi: StateVector) -> Result<Self> {
        Self::new(input, Observable::Projector(phi))
    }

    pub fn dim(&self) -> usize {
        self.input.len()
    }

    pub fn input(&self) -> &StateVector {
        &self.input
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    /// `Some(k)` when the observable is exactly the projector onto `|k⟩`.
    pub fn computational_projector(&self) -> Option<usize> {
        match &self.observable {
            Observable::Projector(phi) => {
                let mut hit = None;
                for (k, amp) in phi.iter().enumerate() {
                    if *amp == linalg::ONE && hit.is_none() {
                        hit = Some(k);
                    } else if *amp != linalg::ZERO {
                        return None;
                    }
                }
                hit
            }
            Observable::Hermitian(_) => None,
        }
    }

    /// Stable byte encoding: dimension, input amplitudes, observable tag and
    /// amplitudes/entries, each real part rounded to 12 decimal digits.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 * (1 + 2 * self.dim() * self.dim()));
        out.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        push_amplitudes(&mut out, self.input.iter());
        match &self.observable {
            Observable::Projector(phi) => {
                out.push(1);
                push_amplitudes(&mut out, phi.iter());
            }
            Observable::Hermitian(op) => {
                out.push(2);
                push_amplitudes(&mut out, op.transpose().iter());
            }
        }
        out
    }

    /// 256-bit stream seed for this setting under `master_seed`.
    pub fn stream_seed(&self, master_seed: u64) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(b"choi-sqpt/setting/v1");
        hasher.update(master_seed.to_le_bytes());
        hasher.update(self.canonical_bytes());
        hasher.finalize().into()
    }
}

fn check_unit(v: &StateVector) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > ALGEBRAIC_TOL {
        return Err(Error::InvalidArgument(format!("state vector has norm {norm}")));
    }
    Ok(())
}

fn push_amplitudes<'a>(out: &mut Vec<u8>, amps: impl Iterator<Item = &'a num_complex::Complex64>) {
    for z in amps {
        for part in [z.re, z.im] {
            let q = (part * CANONICAL_DIGITS).round() as i64;
            out.extend_from_slice(&q.to_le_bytes());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    /// Estimate of `Tr[Ô ε(|ψ⟩⟨ψ|)]`.
    pub value: f64,
    pub std_error: f64,
    /// 0 for the exact backend.
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub mode: BackendMode,
    pub shots: u64,
    pub master_seed: u64,
}

impl BackendConfig {
    pub fn exact() -> Self {
        Self {
            mode: BackendMode::Exact,
            shots: 0,
            master_seed: 0,
        }
    }

    pub fn sampled(shots: u64, master_seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidArgument("sampled backend needs shots >= 1".into()));
        }
        Ok(Self {
            mode: BackendMode::Sampled,
            shots,
            master_seed,
        })
    }
}

/// Dispatches to the backend selected by `cfg`.
pub fn measure(
    ch: &QuantumChannel,
    setting: &MeasurementSetting,
    cfg: &BackendConfig,
) -> Result<MeasurementOutcome> {
    match cfg.mode {
        BackendMode::Exact => exact_expectation(ch, setting),
        BackendMode::Sampled => sampled_expectation(ch, setting, cfg),
    }
}

fn output_state(ch: &QuantumChannel, setting: &MeasurementSetting) -> Result<ComplexMatrix> {
    if setting.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            actual: setting.dim(),
        });
    }
    ch.apply_pure(setting.input())
}

fn expectation(rho: &ComplexMatrix, observable: &Observable) -> f64 {
    match observable {
        Observable::Projector(phi) => (phi.adjoint() * rho * phi)[(0, 0)].re,
        Observable::Hermitian(op) => (op * rho).trace().re,
    }
}

pub fn exact_expectation(
    ch: &QuantumChannel,
    setting: &MeasurementSetting,
) -> Result<MeasurementOutcome> {
    let rho = output_state(ch, setting)?;
    Ok(MeasurementOutcome {
        value: expectation(&rho, setting.observable()),
        std_error: 0.0,
        shots: 0,
    })
}

fn checked_probability(p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::NonPhysicalProbability(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Finite-shot estimate.
///
/// Projectors yield a binomial count with success probability
/// `⟨φ|ε(ρ)|φ⟩`. Hermitian observables are measured in their eigenbasis: the
/// eigenvalue `λₖ` occurs with probability `⟨eₖ|ε(ρ)|eₖ⟩`, and any probability
/// mass lost by a trace-decreasing channel counts as outcome 0.
pub fn sampled_expectation(
    ch: &QuantumChannel,
    setting: &MeasurementSetting,
    cfg: &BackendConfig,
) -> Result<MeasurementOutcome> {
    if cfg.mode != BackendMode::Sampled || cfg.shots == 0 {
        return Err(Error::InvalidArgument(
            "sampled_expectation needs a sampled backend with shots >= 1".into(),
        ));
    }
    let rho = output_state(ch, setting)?;
    let mut rng = ChaCha8Rng::from_seed(setting.stream_seed(cfg.master_seed));
    let shots = cfg.shots;
    let n = shots as f64;

    match setting.observable() {
        Observable::Projector(phi) => {
            let p = checked_probability(expectation(&rho, &Observable::Projector(phi.clone())))?;
            let k = binomial(&mut rng, shots, p);
            let p_hat = k as f64 / n;
            Ok(MeasurementOutcome {
                value: p_hat,
                std_error: (p_hat * (1.0 - p_hat) / n).sqrt(),
                shots,
            })
        }
        Observable::Hermitian(op) => {
            let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(op);
            let mut outcomes = Vec::with_capacity(eigenvalues.len() + 1);
            let mut total = 0.0;
            for (k, &lambda) in eigenvalues.iter().enumerate() {
                let e = eigenvectors.column(k);
                let q = checked_probability((e.adjoint() * &rho * e)[(0, 0)].re)?;
                total += q;
                outcomes.push((lambda, q));
            }
            if total > 1.0 + PROBABILITY_SLACK {
                return Err(Error::NonPhysicalProbability(total));
            }
            outcomes.push((0.0, (1.0 - total).max(0.0)));

            // Multinomial draw as a chain of conditional binomials.
            let mut remaining = shots;
            let mut mass = 1.0;
            let mut counts = Vec::with_capacity(outcomes.len());
            for (i, &(lambda, q)) in outcomes.iter().enumerate() {
                let count = if i + 1 == outcomes.len() || mass <= 0.0 {
                    remaining
                } else {
                    binomial(&mut rng, remaining, (q / mass).clamp(0.0, 1.0))
                };
                counts.push((lambda, count));
                remaining -= count;
                mass -= q;
            }
            let mean = counts.iter().map(|&(l, c)| l * c as f64).sum::<f64>() / n;
            let var = counts
                .iter()
                .map(|&(l, c)| c as f64 * (l - mean).powi(2))
                .sum::<f64>()
                / n;
            Ok(MeasurementOutcome {
                value: mean,
                std_error: (var / n).sqrt(),
                shots,
            })
        }
    }
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if p <= 0.0 || n == 0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

/// The `D²` input states: `|a⟩` for every level, then for each pair `a < b`
/// the states `(|a⟩+|b⟩)/√2` and `(|a⟩+i|b⟩)/√2`.
pub fn input_state_set(dim: usize) -> Result<Vec<StateVector>> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("input state set needs D >= 2, got {dim}")));
    }
    let mut states: Vec<_> = (0..dim).map(|a| linalg::basis_vector(dim, a)).collect();
    for a in 0..dim {
        for b in a + 1..dim {
            let (plus, minus) = superposition_states(a, b, dim)?;
            states.push(plus);
            states.push(minus);
        }
    }
    Ok(states)
}

/// Infers `⟨D−1|ε(ρ)|D−1⟩ = 1 − Σ_{a<D−1} ⟨a|ε(ρ)|a⟩` for a trace-preserving channel.
/// `partials` must hold exactly the levels `0..D−1`.
pub fn tp_complete(partials: &BTreeMap<usize, f64>, dim: usize) -> Result<f64> {
    if dim < 2 || partials.len() != dim - 1 {
        return Err(Error::InvalidArgument(format!(
            "need {} diagonal expectations, got {}",
            dim.saturating_sub(1),
            partials.len()
        )));
    }
    if let Some(&level) = partials.keys().find(|&&k| k >= dim - 1) {
        return Err(Error::IndexOutOfRange {
            index: level,
            dim: dim - 1,
        });
    }
    Ok(1.0 - partials.values().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bit_flip() -> QuantumChannel {
        QuantumChannel::preset("bit-flip", &[0.25], 2).unwrap()
    }

    fn proj(dim: usize, input: usize, out: usize) -> MeasurementSetting {
        MeasurementSetting::projector(basis_vector(dim, input), basis_vector(dim, out)).unwrap()
    }

    #[test]
    fn exact_examples() {
        let id = QuantumChannel::identity(2);
        assert_eq!(exact_expectation(&id, &proj(2, 0, 0)).unwrap().value, 1.0);
        let v = exact_expectation(&bit_flip(), &proj(2, 0, 1)).unwrap();
        assert!((v.value - 0.25).abs() < 1e-15);
        assert_eq!(v.std_error, 0.0);
        assert_eq!(v.shots, 0);

        let plus = StateVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
        let sx = crate::basis::pauli_matrices()[1].clone();
        let s = MeasurementSetting::new(plus, Observable::Hermitian(sx)).unwrap();
        assert!((exact_expectation(&id, &s).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_dimension_mismatch() {
        let id = QuantumChannel::identity(3);
        assert!(matches!(
            exact_expectation(&id, &proj(2, 0, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn setting_validation() {
        let bad = StateVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(MeasurementSetting::projector(bad, basis_vector(2, 0)).is_err());
        let non_herm = ComplexMatrix::from_row_slice(2, 2, &[linalg::ZERO, linalg::ONE, linalg::ZERO, linalg::ZERO]);
        assert!(MeasurementSetting::new(basis_vector(2, 0), Observable::Hermitian(non_herm)).is_err());
    }

    #[test]
    fn zero_probability_samples_zero() {
        let id = QuantumChannel::identity(2);
        for seed in 0..5 {
            let cfg = BackendConfig::sampled(1000, seed).unwrap();
            let out = sampled_expectation(&id, &proj(2, 0, 1), &cfg).unwrap();
            assert_eq!(out.value, 0.0);
            assert_eq!(out.std_error, 0.0);
        }
    }

    #[test]
    fn sampled_concentrates_on_exact_value() {
        let cfg = BackendConfig::sampled(1_000_000, 42).unwrap();
        let out = sampled_expectation(&bit_flip(), &proj(2, 0, 1), &cfg).unwrap();
        let bound = 5.0 * (0.25f64 * 0.75 / 1e6).sqrt();
        assert!((out.value - 0.25).abs() < bound, "{}", out.value);
        assert!(out.std_error > 0.0);
        assert_eq!(out.shots, 1_000_000);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let s = proj(2, 0, 1);
        let cfg = BackendConfig::sampled(10_000, 7).unwrap();
        let a = sampled_expectation(&bit_flip(), &s, &cfg).unwrap();
        let b = sampled_expectation(&bit_flip(), &s, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let other = BackendConfig::sampled(10_000, 8).unwrap();
        let c = sampled_expectation(&bit_flip(), &s, &other).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn hermitian_sampling_tracks_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = QuantumChannel::random_cptp_with(&mut rng, 2, 3);
        let op = linalg::random_hermitian(&mut rng, 3);
        let input = linalg::random_state(&mut rng, 3);
        let s = MeasurementSetting::new(input, Observable::Hermitian(op)).unwrap();
        let exact = exact_expectation(&ch, &s).unwrap().value;
        let cfg = BackendConfig::sampled(1_000_000, 3).unwrap();
        let est = sampled_expectation(&ch, &s, &cfg).unwrap();
        assert!((est.value - exact).abs() < 5.0 * est.std_error, "{} vs {exact}", est.value);
    }

    #[test]
    fn non_physical_probability_is_rejected() {
        let ch = QuantumChannel::new(2, vec![ComplexMatrix::identity(2, 2).scale(1.5)]).unwrap();
        let cfg = BackendConfig::sampled(100, 0).unwrap();
        assert!(matches!(
            sampled_expectation(&ch, &proj(2, 0, 0), &cfg),
            Err(Error::NonPhysicalProbability(_))
        ));
    }

    #[test]
    fn sampled_requires_shots() {
        assert!(BackendConfig::sampled(0, 1).is_err());
        assert!(sampled_expectation(&bit_flip(), &proj(2, 0, 0), &BackendConfig::exact()).is_err());
    }

    #[test]
    fn input_state_set_examples() {
        let s2 = input_state_set(2).unwrap();
        assert_eq!(s2.len(), 4);
        let h = FRAC_1_SQRT_2;
        assert_eq!(s2[2].as_slice(), &[c(h, 0.0), c(h, 0.0)]);
        assert_eq!(s2[3].as_slice(), &[c(h, 0.0), c(0.0, h)]);
        for d in 2..=8 {
            assert_eq!(input_state_set(d).unwrap().len(), d * d);
        }
        let frame = crate::basis::StateFrame::new(input_state_set(4).unwrap());
        assert!(frame.is_ok());
    }

    #[test]
    fn tp_completion_examples() {
        let d2 = BTreeMap::from([(0, 0.75)]);
        assert!((tp_complete(&d2, 2).unwrap() - 0.25).abs() < 1e-15);
        let d3 = BTreeMap::from([(0, 0.2), (1, 0.3)]);
        assert!((tp_complete(&d3, 3).unwrap() - 0.5).abs() < 1e-15);
        assert!(tp_complete(&d3, 2).is_err());
        assert!(tp_complete(&BTreeMap::from([(0, 0.2), (2, 0.3)]), 3).is_err());
    }

    #[test]
    fn tp_completion_matches_direct_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for dim in [2, 3, 4] {
            let ch = QuantumChannel::random_cptp_with(&mut rng, 3, dim);
            for input in input_state_set(dim).unwrap() {
                let value = |k| {
                    let s = MeasurementSetting::projector(input.clone(), basis_vector(dim, k)).unwrap();
                    exact_expectation(&ch, &s).unwrap().value
                };
                let partials: BTreeMap<_, _> = (0..dim - 1).map(|k| (k, value(k))).collect();
                assert!((tp_complete(&partials, dim).unwrap() - value(dim - 1)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn computational_projector_detection() {
        assert_eq!(proj(3, 0, 2).computational_projector(), Some(2));
        let (p, _) = superposition_states(0, 1, 2).unwrap();
        let s = MeasurementSetting::projector(basis_vector(2, 0), p).unwrap();
        assert_eq!(s.computational_projector(), None);
    }
}
