//! SHAP scores: exact over the empirical space by pruned depth-first
//! enumeration, brute-force oracles over any space, and KernelSHAP.

mod empirical;
mod exact;
mod kernel;

pub use empirical::{explain_shap, shap_empirical, CondEntry, CondExpTable, ShapExplainer, ShapOptions, ShapResult};
pub use exact::{shap_exact, shap_exact_levels, shap_hardness_check, shap_levels, shap_permutation_oracle};
pub use kernel::{explain_kernel_shap, kernel_shap, kernel_weight, KernelSamples, KernelShapResult};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `n` for which subset coefficients are computed.
pub const MAX_SUBSET_FEATURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapScore {
    pub feature: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_level: Option<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `s! (n - s - 1)! / n!`, the weight of one subset of size `s` at level `s`.
pub fn level_coefficient(n: usize, s: usize) -> f64 {
    assert!(s < n, "level {s} out of range for n = {n}");
    1.0 / (n as u128 * binomial(n - 1, s)) as f64
}

fn check_subset_budget(n: usize) -> Result<()> {
    if n > MAX_SUBSET_FEATURES {
        return Err(Error::Budget(format!("{n} features exceed the subset enumeration limit of {MAX_SUBSET_FEATURES}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        assert_eq!(level_coefficient(2, 0), 0.5);
        assert_eq!(level_coefficient(3, 1), 1.0 / 6.0);
        assert_eq!(binomial(20, 10), 184_756);
        for n in 1..=MAX_SUBSET_FEATURES {
            let total: f64 = (0..n).map(|s| level_coefficient(n, s) * binomial(n - 1, s) as f64).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
