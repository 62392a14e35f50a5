//! One configured score kind applied to many entities of a dataset.

use crate::causal::{explain_counter, explain_resp, RespConfig};
use crate::classifier::{Classifier, SubscaleModel};
use crate::error::{Error, Result};
use crate::explanation::{Explanation, ScoreKind, TieBreak};
use crate::fico::fico_explain;
use crate::shapley::{explain_shap, kernel_shap, KernelSamples, ShapExplainer, ShapOptions, ShapResult};
use crate::tabular::{Dataset, Entity, ProductSpace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub kind: ScoreKind,
    pub resp: RespConfig,
    pub shap: ShapOptions,
    pub kernel_samples: KernelSamples,
    pub seed: u64,
    pub fico_m: usize,
    pub fico_k: usize,
}

impl EngineConfig {
    pub fn new(kind: ScoreKind) -> Self {
        EngineConfig {
            kind,
            resp: RespConfig::default(),
            shap: ShapOptions::default(),
            kernel_samples: KernelSamples::Exhaustive,
            seed: 0,
            fico_m: 2,
            fico_k: 2,
        }
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.resp.tie_break = tie_break;
        self.shap.tie_break = tie_break;
        self
    }
}

enum Backend<'a> {
    Causal(ProductSpace),
    Shap(ShapExplainer<'a>),
    Fico(&'a SubscaleModel),
}

/// Precomputed state shared by every entity: the product space for causal
/// scores, or the labelled rows for SHAP.
pub struct Engine<'a> {
    l: &'a dyn Classifier,
    cfg: EngineConfig,
    backend: Backend<'a>,
}

/// Per-entity sampling seed derived from the run seed.
pub fn entity_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl<'a> Engine<'a> {
    /// `model` is required for FICO explanations and must be `l` itself.
    pub fn new(
        ds: &'a Dataset,
        l: &'a dyn Classifier,
        model: Option<&'a SubscaleModel>,
        cfg: EngineConfig,
    ) -> Result<Self> {
        if l.arity() != ds.num_features() {
            return Err(Error::Arity { expected: ds.num_features(), got: l.arity() });
        }
        let backend = match cfg.kind {
            ScoreKind::Counter | ScoreKind::Resp => Backend::Causal(ProductSpace::new(ds)),
            ScoreKind::Shap | ScoreKind::KernelShap => Backend::Shap(ShapExplainer::new(ds, l)?),
            ScoreKind::Fico => Backend::Fico(
                model.ok_or_else(|| Error::Precondition("FICO explanations need a subscale model".into()))?,
            ),
        };
        Ok(Engine { l, cfg, backend })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// Explain `e`, the `index`-th entity of the run.
    pub fn explain(&self, e: &Entity, index: usize) -> Result<Explanation> {
        let tie_break = self.cfg.resp.tie_break;
        match (&self.backend, self.cfg.kind) {
            (Backend::Causal(space), ScoreKind::Counter) => explain_counter(space, self.l, e, &self.cfg.resp),
            (Backend::Causal(space), _) => explain_resp(space, self.l, e, &self.cfg.resp),
            (Backend::Shap(x), ScoreKind::Shap) => {
                Ok(explain_shap(e, x.explain(e, &self.cfg.shap)?, ScoreKind::Shap, tie_break))
            }
            (Backend::Shap(x), _) => {
                let r = kernel_shap(x, e, self.cfg.kernel_samples, entity_seed(self.cfg.seed, index))?;
                Ok(explain_shap(
                    e,
                    ShapResult { label: r.label, scores: r.scores, diagnostics: r.diagnostics },
                    ScoreKind::KernelShap,
                    tie_break,
                ))
            }
            (Backend::Fico(model), _) => {
                Ok(fico_explain(model, e, self.cfg.fico_m, self.cfg.fico_k)?.into_explanation())
            }
        }
    }
}
