use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{expand_choi_four, ChoiIndex};
use crate::channel::QuantumChannel;
use crate::measure::{self, BackendConfig, BackendMode, MeasurementSetting};
use crate::{Error, Result};

/// One term `rᵢ·sⱼ · ⟨ψⱼ|ε(|ψᵢ⟩⟨ψᵢ|)|ψⱼ⟩` of the element estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanTerm {
    /// Index into [`MeasurementPlan::settings`].
    pub setting: usize,
    /// Weight of the input state in the expansion of `Ẽ_ab`.
    pub input_weight: Complex64,
    /// Weight of the projector in the expansion of `Ẽ_cd†`.
    pub observable_weight: Complex64,
}

impl PlanTerm {
    pub fn weight(&self) -> Complex64 {
        self.input_weight * self.observable_weight
    }
}

/// Settings and weights that realize one χ element `χ_{ef;gh} = λ_{fh;eg}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    dim: usize,
    target: [usize; 4],
    settings: Vec<MeasurementSetting>,
    terms: Vec<PlanTerm>,
}

impl MeasurementPlan {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(e, f, g, h)` of the χ element.
    pub fn target(&self) -> [usize; 4] {
        self.target
    }

    /// `(a, b, c, d)` of the λ element that is actually measured.
    pub fn lambda_target(&self) -> [usize; 4] {
        let [e, f, g, h] = self.target;
        [f, h, e, g]
    }

    pub fn is_diagonal_target(&self) -> bool {
        let [e, f, g, h] = self.target;
        e == g && f == h
    }

    pub fn settings(&self) -> &[MeasurementSetting] {
        &self.settings
    }

    pub fn terms(&self) -> &[PlanTerm] {
        &self.terms
    }

    pub fn settings_count(&self) -> usize {
        self.settings.len()
    }

    /// Total weight attached to each setting.
    pub fn setting_weights(&self) -> Vec<Complex64> {
        let mut w = vec![Complex64::default(); self.settings.len()];
        for t in &self.terms {
            w[t.setting] += t.weight();
        }
        w
    }
}

/// Plans `χ_{ef;gh}` through `λ_{fh;eg} = Tr[Ẽ_eg† ε(Ẽ_fh)]`.
///
/// The input operator `Ẽ_fh` and the observable `Ẽ_eg† = Ẽ_ge` each expand
/// into one projector (diagonal) or four; the plan is their cross product, so
/// it holds 1, 4 or 16 settings.
pub fn plan_element(e: usize, f: usize, g: usize, h: usize, dim: usize) -> Result<MeasurementPlan> {
    let input = ChoiIndex::new(f, h, dim)?;
    let observable = ChoiIndex::new(e, g, dim)?.dagger();
    let inputs = expand_choi_four(&input);
    let projectors = expand_choi_four(&observable);

    let mut settings = Vec::with_capacity(inputs.len() * projectors.len());
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut terms = Vec::with_capacity(settings.capacity());
    for (r, psi) in inputs.terms() {
        for (s, phi) in projectors.terms() {
            let setting = MeasurementSetting::projector(psi.clone(), phi.clone())?;
            let slot = *index.entry(setting.canonical_bytes()).or_insert_with(|| {
                settings.push(setting);
                settings.len() - 1
            });
            terms.push(PlanTerm {
                setting: slot,
                input_weight: *r,
                observable_weight: *s,
            });
        }
    }
    Ok(MeasurementPlan {
        dim,
        target: [e, f, g, h],
        settings,
        terms,
    })
}

/// Plans `λ_{ab;cd}`, i.e. `χ_{ca;db}`.
pub fn plan_lambda_element(a: usize, b: usize, c: usize, d: usize, dim: usize) -> Result<MeasurementPlan> {
    plan_element(c, a, d, b, dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiElementEstimate {
    pub value: Complex64,
    /// `√(Σ |w|² var)` over the plan's settings; 0 for the exact backend.
    pub std_error: f64,
    pub settings_used: usize,
    pub backend: BackendMode,
}

/// Runs every setting of `plan` once and combines the outcomes with the plan weights.
pub fn reconstruct_element(
    plan: &MeasurementPlan,
    ch: &QuantumChannel,
    cfg: &BackendConfig,
) -> Result<ChiElementEstimate> {
    if plan.dim != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: plan.dim,
            actual: ch.dim(),
        });
    }
    let weights = plan.setting_weights();
    let mut value = Complex64::default();
    let mut variance = 0.0;
    for (setting, w) in plan.settings.iter().zip(&weights) {
        let outcome = measure::measure(ch, setting, cfg)?;
        value += w * outcome.value;
        variance += w.norm_sqr() * outcome.std_error.powi(2);
    }
    Ok(ChiElementEstimate {
        value,
        std_error: variance.sqrt(),
        settings_used: plan.settings.len(),
        backend: cfg.mode,
    })
}
