use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chi::{chi_from_lambda, ChiMatrix, LambdaMatrix};
use super::plan::plan_element;
use crate::basis::{sud_generators, ChoiIndex, StateFrame};
use crate::channel::QuantumChannel;
use crate::linalg::{self, ComplexMatrix, StateVector};
use crate::measure::{self, input_state_set, BackendConfig, MeasurementOutcome, MeasurementSetting, Observable};
use crate::{Error, Result};

/// How the complete χ is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Strategy {
    /// Every element from its own four-state plan, settings shared through a cache.
    ChoiFour,
    /// Product input states and tensor products of SU(d) generators on
    /// `sites` qudits of `local_dim` levels.
    ProductHermitian { local_dim: usize, sites: usize },
}

#[derive(Debug, Clone)]
pub struct FullTomography {
    pub chi: ChiMatrix,
    /// Propagated standard error per χ entry.
    pub std_errors: DMatrix<f64>,
    /// Distinct settings the strategy calls for.
    pub distinct_settings: usize,
    /// Settings actually run on the backend.
    pub measured_settings: usize,
    /// Settings whose value came from trace preservation.
    pub inferred_settings: usize,
}

/// Reconstructs the whole χ matrix.
///
/// With `tp_shortcut` the channel must be trace preserving; then for every
/// input state the outcome on `|D−1⟩` (choi-four) or on the identity
/// observable (product-hermitian) follows from normalization and is not
/// measured, leaving `D²(D²−1)` measured settings.
pub fn full_sqpt(
    ch: &QuantumChannel,
    cfg: &BackendConfig,
    strategy: Strategy,
    tp_shortcut: bool,
) -> Result<FullTomography> {
    if tp_shortcut {
        ch.require_trace_preserving()?;
    }
    match strategy {
        Strategy::ChoiFour => choi_four(ch, cfg, tp_shortcut),
        Strategy::ProductHermitian { local_dim, sites } => {
            product_hermitian(ch, cfg, local_dim, sites, tp_shortcut)
        }
    }
}

/// How each cached setting gets its value.
enum Source {
    Measured,
    /// `1 − Σ` of the listed settings.
    Complement(Vec<usize>),
    /// Fixed by trace preservation.
    Unit,
}

struct SettingCache {
    settings: Vec<MeasurementSetting>,
    index: HashMap<Vec<u8>, usize>,
}

impl SettingCache {
    fn new() -> Self {
        Self {
            settings: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn insert(&mut self, setting: MeasurementSetting) -> usize {
        let key = setting.canonical_bytes();
        if let Some(&slot) = self.index.get(&key) {
            return slot;
        }
        self.settings.push(setting);
        self.index.insert(key, self.settings.len() - 1);
        self.settings.len() - 1
    }

    /// Measures the `Measured` settings in parallel, then resolves inferred ones.
    fn evaluate(
        &self,
        sources: &[Source],
        ch: &QuantumChannel,
        cfg: &BackendConfig,
    ) -> Result<Vec<MeasurementOutcome>> {
        let measured: Vec<Option<MeasurementOutcome>> = self
            .settings
            .par_iter()
            .zip(sources.par_iter())
            .map(|(s, src)| match src {
                Source::Measured => measure::measure(ch, s, cfg).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<_>>()?;
        Ok(measured
            .iter()
            .zip(sources)
            .map(|(m, src)| match (m, src) {
                (Some(out), _) => *out,
                (None, Source::Complement(parts)) => {
                    let partials: BTreeMap<usize, f64> = parts
                        .iter()
                        .enumerate()
                        .map(|(k, &i)| (k, measured[i].expect("partials are measured").value))
                        .collect();
                    let value = measure::tp_complete(&partials, parts.len() + 1)
                        .expect("partials cover 0..D-1");
                    let var: f64 = parts
                        .iter()
                        .map(|&i| measured[i].expect("measured").std_error.powi(2))
                        .sum();
                    MeasurementOutcome {
                        value,
                        std_error: var.sqrt(),
                        shots: 0,
                    }
                }
                (None, _) => MeasurementOutcome {
                    value: 1.0,
                    std_error: 0.0,
                    shots: 0,
                },
            })
            .collect())
    }
}

fn counts(sources: &[Source]) -> (usize, usize) {
    let measured = sources.iter().filter(|s| matches!(s, Source::Measured)).count();
    (measured, sources.len() - measured)
}

fn choi_four(ch: &QuantumChannel, cfg: &BackendConfig, tp_shortcut: bool) -> Result<FullTomography> {
    let dim = ch.dim();
    let n = dim * dim;
    let mut cache = SettingCache::new();
    // Per element: (global setting slot, summed weight).
    let mut element_terms = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let (e, f, g, h) = (row / dim, row % dim, col / dim, col % dim);
            let plan = plan_element(e, f, g, h, dim)?;
            let slots: Vec<_> = plan
                .settings()
                .iter()
                .zip(plan.setting_weights())
                .map(|(s, w)| (cache.insert(s.clone()), w))
                .collect();
            element_terms.push(slots);
        }
    }

    let mut sources: Vec<Source> = Vec::with_capacity(cache.settings.len());
    for i in 0..cache.settings.len() {
        let setting = &cache.settings[i];
        let src = if tp_shortcut && setting.computational_projector() == Some(dim - 1) {
            let input = setting.input().clone();
            let parts = (0..dim - 1)
                .map(|k| {
                    let s = MeasurementSetting::projector(input.clone(), linalg::basis_vector(dim, k))?;
                    Ok(cache.insert(s))
                })
                .collect::<Result<Vec<_>>>()?;
            Source::Complement(parts)
        } else {
            Source::Measured
        };
        sources.push(src);
    }
    // Partials appended above are measured.
    sources.resize_with(cache.settings.len(), || Source::Measured);

    let outcomes = cache.evaluate(&sources, ch, cfg)?;
    let mut chi = ComplexMatrix::zeros(n, n);
    let mut se = DMatrix::zeros(n, n);
    for (flat, terms) in element_terms.iter().enumerate() {
        let (row, col) = (flat / n, flat % n);
        let mut var = 0.0;
        for &(slot, w) in terms {
            chi[(row, col)] += w * outcomes[slot].value;
            var += w.norm_sqr() * outcomes[slot].std_error.powi(2);
        }
        se[(row, col)] = var.sqrt();
    }
    let (measured_settings, inferred_settings) = counts(&sources);
    Ok(FullTomography {
        chi: ChiMatrix::from_matrix(dim, chi)?,
        std_errors: se,
        distinct_settings: cache.settings.len(),
        measured_settings,
        inferred_settings,
    })
}

/// All `N`-fold tensor products of `local`, first factor most significant.
fn product_states(local: &[StateVector], sites: usize) -> Vec<StateVector> {
    let mut out = vec![StateVector::from_element(1, linalg::ONE)];
    for _ in 0..sites {
        out = out
            .iter()
            .flat_map(|acc| local.iter().map(move |s| linalg::kron_vec(acc, s)))
            .collect();
    }
    out
}

fn product_hermitian(
    ch: &QuantumChannel,
    cfg: &BackendConfig,
    local_dim: usize,
    sites: usize,
    tp_shortcut: bool,
) -> Result<FullTomography> {
    let dim = ch.dim();
    if sites == 0 || local_dim.checked_pow(sites as u32) != Some(dim) {
        return Err(Error::InvalidArgument(format!(
            "product-hermitian needs d^N = D, got d={local_dim}, N={sites}, D={dim}"
        )));
    }
    let n = dim * dim;
    let frame = StateFrame::new(product_states(&input_state_set(local_dim)?, sites))?;
    let observables = sud_generators(local_dim)?.tensor_power(sites)?;

    let mut cache = SettingCache::new();
    let mut sources = Vec::with_capacity(n * n);
    for psi in frame.states() {
        for (k, op) in observables.operators().iter().enumerate() {
            let slot = cache.insert(MeasurementSetting::new(psi.clone(), Observable::Hermitian(op.clone()))?);
            debug_assert_eq!(slot, sources.len());
            // Operator 0 is 𝟙⊗…⊗𝟙, whose expectation is the output trace.
            sources.push(if tp_shortcut && k == 0 { Source::Unit } else { Source::Measured });
        }
    }
    let outcomes = cache.evaluate(&sources, ch, cfg)?;
    let values = DMatrix::from_fn(n, n, |m, k| linalg::c(outcomes[m * n + k].value, 0.0));
    let variances = DMatrix::from_fn(n, n, |m, k| outcomes[m * n + k].std_error.powi(2));

    // Column (ab) of r holds the state weights of Ẽ_ab, column (cd) of s the
    // observable weights of Ẽ_cd†.
    let mut r = ComplexMatrix::zeros(n, n);
    let mut s = ComplexMatrix::zeros(n, n);
    for flat in 0..n {
        let unit = ChoiIndex::from_flat(flat, dim)?;
        r.set_column(flat, &frame.coefficients(&unit.operator())?);
        s.set_column(flat, &observables.coefficients(&unit.dagger().operator())?);
    }
    let lambda = r.transpose() * values * &s;
    let r2 = r.map(|z| z.norm_sqr());
    let s2 = s.map(|z| z.norm_sqr());
    let lambda_var = r2.transpose() * variances * s2;

    let chi = chi_from_lambda(&LambdaMatrix::from_matrix(dim, lambda)?);
    let var_as_lambda = LambdaMatrix::from_matrix(dim, lambda_var.map(|v| linalg::c(v.max(0.0).sqrt(), 0.0)))?;
    let se = chi_from_lambda(&var_as_lambda).matrix().map(|z| z.re);
    let (measured_settings, inferred_settings) = counts(&sources);
    Ok(FullTomography {
        chi,
        std_errors: se,
        distinct_settings: cache.settings.len(),
        measured_settings,
        inferred_settings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_both_strategies() {
        let ch = QuantumChannel::identity(2);
        let oracle = ch.chi_oracle();
        let exact = BackendConfig::exact();
        for strategy in [
            Strategy::ChoiFour,
            Strategy::ProductHermitian { local_dim: 2, sites: 1 },
        ] {
            let full = full_sqpt(&ch, &exact, strategy, false).unwrap();
            assert!(full.chi.max_abs_diff(&oracle) < 1e-12, "{strategy:?}");
            assert!(full.std_errors.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn choi_four_counts_and_accuracy_at_d4() {
        let ch = QuantumChannel::random_cptp(7, 2, 4);
        let full = full_sqpt(&ch, &BackendConfig::exact(), Strategy::ChoiFour, false).unwrap();
        assert_eq!(full.distinct_settings, 256);
        assert_eq!(full.measured_settings, 256);
        assert!(full.chi.max_abs_diff(&ch.chi_oracle()) < 1e-10);
    }

    #[test]
    fn tp_shortcut_skips_last_level_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for dim in [2, 3] {
            let ch = QuantumChannel::random_cptp_with(&mut rng, 2, dim);
            let exact = BackendConfig::exact();
            let plain = full_sqpt(&ch, &exact, Strategy::ChoiFour, false).unwrap();
            let short = full_sqpt(&ch, &exact, Strategy::ChoiFour, true).unwrap();
            let d2 = dim * dim;
            assert_eq!(short.measured_settings, d2 * (d2 - 1));
            assert_eq!(short.inferred_settings, d2);
            assert!(short.chi.max_abs_diff(&plain.chi) < 1e-12);
        }
    }

    #[test]
    fn tp_shortcut_rejects_lossy_channel() {
        let lossy = QuantumChannel::new(2, vec![ComplexMatrix::identity(2, 2).scale(0.9)]).unwrap();
        let err = full_sqpt(&lossy, &BackendConfig::exact(), Strategy::ChoiFour, true);
        assert!(matches!(err, Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn product_hermitian_recovers_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let two_qubit = QuantumChannel::random_cptp_with(&mut rng, 3, 4);
        let qutrit = QuantumChannel::random_cptp_with(&mut rng, 2, 3);
        let exact = BackendConfig::exact();
        let a = full_sqpt(&two_qubit, &exact, Strategy::ProductHermitian { local_dim: 2, sites: 2 }, false).unwrap();
        assert!(a.chi.max_abs_diff(&two_qubit.chi_oracle()) < 1e-10);
        assert_eq!(a.measured_settings, 256);
        let b = full_sqpt(&qutrit, &exact, Strategy::ProductHermitian { local_dim: 3, sites: 1 }, true).unwrap();
        assert!(b.chi.max_abs_diff(&qutrit.chi_oracle()) < 1e-10);
        assert_eq!(b.measured_settings, 81 - 9);
    }

    #[test]
    fn product_hermitian_rejects_bad_factorization() {
        let ch = QuantumChannel::identity(4);
        let err = full_sqpt(&ch, &BackendConfig::exact(), Strategy::ProductHermitian { local_dim: 3, sites: 1 }, false);
        assert!(err.is_err());
    }

    #[test]
    fn sampled_full_tomography_is_reproducible_and_close() {
        let ch = QuantumChannel::random_cptp(3, 2, 2);
        let cfg = BackendConfig::sampled(200_000, 5).unwrap();
        let a = full_sqpt(&ch, &cfg, Strategy::ChoiFour, true).unwrap();
        let b = full_sqpt(&ch, &cfg, Strategy::ChoiFour, true).unwrap();
        assert_eq!(a.chi, b.chi);
        let oracle = ch.chi_oracle();
        for r in 0..4 {
            for k in 0..4 {
                let diff = (a.chi.matrix()[(r, k)] - oracle.matrix()[(r, k)]).norm();
                assert!(diff <= 6.0 * a.std_errors[(r, k)] + 1e-12, "({r},{k}) {diff}");
            }
        }
    }
}
