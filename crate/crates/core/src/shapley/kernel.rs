//! KernelSHAP: a Shapley-kernel weighted linear fit of the empirical value
//! function, with the efficiency constraint imposed exactly.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{Classifier, Label};
use crate::error::{Error, Result};
use crate::explanation::{Diagnostics, Explanation, ScoreKind, TieBreak};
use crate::shapley::{binomial, explain_shap, ShapExplainer, ShapResult, ShapScore, MAX_SUBSET_FEATURES};
use crate::tabular::{Dataset, Entity, FeatureSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSamples {
    /// Every proper nonempty coalition, weighted by the kernel.
    Exhaustive,
    /// This many coalitions drawn from the kernel distribution.
    Count(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelShapResult {
    pub label: Label,
    pub scores: Vec<ShapScore>,
    pub diagnostics: Diagnostics,
}

/// Shapley kernel `(n - 1) / (C(n, s) s (n - s))` for a coalition of size `s`.
pub fn kernel_weight(n: usize, s: usize) -> f64 {
    assert!(s > 0 && s < n, "kernel weight is defined for 0 < s < n");
    (n - 1) as f64 / (binomial(n, s) as f64 * (s * (n - s)) as f64)
}

/// Count-weighted conditional expectation over labelled rows; `None` when
/// nothing matches.
fn empirical_value(rows: &[(&Entity, u64, Label)], e_star: &Entity, s: FeatureSet) -> Option<f64> {
    let mut total = 0u64;
    let mut positive = 0u64;
    for (e, c, y) in rows {
        if e.agrees_on(e_star, s) {
            total += c;
            if *y == 1 {
                positive += c;
            }
        }
    }
    (total > 0).then(|| positive as f64 / total as f64)
}

fn coalitions(n: usize, samples: KernelSamples, seed: u64) -> Result<Vec<(FeatureSet, f64)>> {
    match samples {
        KernelSamples::Exhaustive => {
            if n > MAX_SUBSET_FEATURES {
                return Err(Error::Budget(format!("exhaustive KernelSHAP is limited to {MAX_SUBSET_FEATURES} features")));
            }
            let full = (1u64 << n) - 1;
            Ok((1..full)
                .map(|bits| {
                    let s = FeatureSet::from_bits(bits);
                    (s, kernel_weight(n, s.len()))
                })
                .collect())
        }
        KernelSamples::Count(m) => {
            if m < n + 2 {
                return Err(Error::Precondition(format!("KernelSHAP needs at least {} samples, got {m}", n + 2)));
            }
            // mass of size s is C(n, s) * kernel(s) = (n - 1) / (s (n - s))
            let mass: Vec<f64> = (1..n).map(|s| (n - 1) as f64 / (s * (n - s)) as f64).collect();
            let total: f64 = mass.iter().sum();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(m);
            for _ in 0..m {
                let mut u = rng.gen::<f64>() * total;
                let mut size = n - 1;
                for (k, &w) in mass.iter().enumerate() {
                    if u < w {
                        size = k + 1;
                        break;
                    }
                    u -= w;
                }
                let s: FeatureSet = sample(&mut rng, n, size).into_iter().collect();
                out.push((s, 1.0));
            }
            Ok(out)
        }
    }
}

/// KernelSHAP over the empirical space of the explainer's dataset.
/// `v(F) = L(e*)` and `v({}) = E[L]`; coalitions with no matching row are
/// skipped and counted.
pub fn kernel_shap(
    explainer: &ShapExplainer<'_>,
    e_star: &Entity,
    samples: KernelSamples,
    seed: u64,
) -> Result<KernelShapResult> {
    let ds = explainer.dataset();
    let n = ds.num_features();
    if n < 2 {
        return Err(Error::Precondition("KernelSHAP needs at least two features".into()));
    }
    if e_star.len() != n {
        return Err(Error::Arity { expected: n, got: e_star.len() });
    }
    let rows: Vec<(&Entity, u64, Label)> =
        ds.rows().iter().zip(explainer.labels()).map(|(r, &y)| (&r.entity, r.count, y)).collect();
    let (label, extra) = match rows.iter().find(|(e, _, _)| *e == e_star) {
        Some(&(_, _, y)) => (y, 0),
        None => (explainer.classifier().classify(e_star)?, 1),
    };
    let v0 = empirical_value(&rows, e_star, FeatureSet::empty()).expect("dataset has rows");
    let delta = f64::from(label) - v0;

    // Eliminate the last coefficient: phi_n = delta - sum_{i<n} phi_i.
    let mut xtwx = DMatrix::<f64>::zeros(n - 1, n - 1);
    let mut xtwy = DVector::<f64>::zeros(n - 1);
    let mut skipped = 0u64;
    let mut used = 0u64;
    let mut x = vec![0.0; n - 1];
    for (s, w) in coalitions(n, samples, seed)? {
        let Some(v) = empirical_value(&rows, e_star, s) else {
            skipped += 1;
            continue;
        };
        used += 1;
        let zn = if s.contains(n - 1) { 1.0 } else { 0.0 };
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if s.contains(i) { 1.0 } else { 0.0 } - zn;
        }
        let y = v - v0 - zn * delta;
        for a in 0..n - 1 {
            if x[a] == 0.0 {
                continue;
            }
            xtwy[a] += w * x[a] * y;
            for b in 0..n - 1 {
                xtwx[(a, b)] += w * x[a] * x[b];
            }
        }
    }
    let beta = solve(xtwx, xtwy, used)?;
    let mut phi: Vec<f64> = beta.iter().copied().collect();
    phi.push(delta - phi.iter().sum::<f64>());
    Ok(KernelShapResult {
        label,
        scores: ds
            .features()
            .iter()
            .zip(phi)
            .map(|(f, value)| ShapScore { feature: f.clone(), value, per_level: None })
            .collect(),
        diagnostics: Diagnostics {
            subsets_visited: used,
            subsets_pruned: 0,
            oracle_probes: explainer.probes() + extra,
            skipped_coalitions: skipped,
        },
    })
}

fn solve(a: DMatrix<f64>, b: DVector<f64>, used: u64) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if !(max > 0.0) || min <= max * 1e-10 {
        return Err(Error::Singular(format!(
            "{} coalitions with support leave the {}x{} system rank deficient",
            used,
            a.nrows(),
            a.ncols()
        )));
    }
    svd.solve(&b, 0.0).map_err(|e| Error::Singular(e.to_string()))
}

/// KernelSHAP for `e*` over `ds`, in the shared envelope.
pub fn explain_kernel_shap(
    ds: &Dataset,
    l: &dyn Classifier,
    e_star: &Entity,
    samples: KernelSamples,
    seed: u64,
    tie_break: TieBreak,
) -> Result<Explanation> {
    let explainer = ShapExplainer::new(ds, l)?;
    let r = kernel_shap(&explainer, e_star, samples, seed)?;
    Ok(explain_shap(
        e_star,
        ShapResult { label: r.label, scores: r.scores, diagnostics: r.diagnostics },
        ScoreKind::KernelShap,
        tie_break,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{and_classifier, constant, FnClassifier};
    use crate::shapley::{shap_empirical, ShapOptions};
    use crate::tabular::Value;

    fn full_support() -> Dataset {
        let mut rows = Vec::new();
        for bits in 0..8i64 {
            rows.push(vec![bits & 1, (bits >> 1) & 1, (bits >> 2) & 1]);
        }
        let refs: Vec<(&[i64], u64)> = rows.iter().enumerate().map(|(i, r)| (r.as_slice(), 1 + i as u64 % 3)).collect();
        Dataset::from_int_rows(&refs).unwrap()
    }

    #[test]
    fn kernel_weights() {
        assert!((kernel_weight(3, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((kernel_weight(4, 2) - 3.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_matches_exact() {
        let ds = full_support();
        let l = FnClassifier::new("f", 3, |e: &Entity| {
            Label::from(e[0] == Value::Int(1) && (e[1] == Value::Int(1) || e[2] == Value::Int(0)))
        });
        let e = Entity::ints(&[1, 1, 0]);
        let exact = shap_empirical(&ds, &l, &e, &ShapOptions::default()).unwrap();
        let explainer = ShapExplainer::new(&ds, &l).unwrap();
        let k = kernel_shap(&explainer, &e, KernelSamples::Exhaustive, 0).unwrap();
        for (a, b) in exact.scores.iter().zip(&k.scores) {
            assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
        }
        assert_eq!(k.diagnostics.skipped_coalitions, 0);
    }

    #[test]
    fn constant_and_sampling() {
        let ds = full_support();
        let e = Entity::ints(&[1, 1, 1]);
        let l = constant(3, 1);
        let explainer = ShapExplainer::new(&ds, &l).unwrap();
        let k = kernel_shap(&explainer, &e, KernelSamples::Count(50), 7).unwrap();
        assert!(k.scores.iter().all(|s| s.value.abs() < 1e-12));

        let l = and_classifier(3);
        let explainer = ShapExplainer::new(&ds, &l).unwrap();
        let a = kernel_shap(&explainer, &e, KernelSamples::Count(200), 11).unwrap();
        let b = kernel_shap(&explainer, &e, KernelSamples::Count(200), 11).unwrap();
        assert_eq!(a, b);
        let total: f64 = a.scores.iter().map(|s| s.value).sum();
        let v0 = 1.0 / ds.total_count() as f64 * ds.rows().iter().filter(|r| r.entity == e).map(|r| r.count).sum::<u64>() as f64;
        assert!((total - (1.0 - v0)).abs() < 1e-12);
        assert!(kernel_shap(&explainer, &e, KernelSamples::Count(4), 0).is_err());
    }

    #[test]
    fn singular_and_skipped() {
        let ds = Dataset::from_int_rows(&[(&[0, 0, 0], 1), (&[1, 1, 1], 1)]).unwrap();
        let e = Entity::ints(&[1, 1, 0]);
        let l = and_classifier(3);
        let explainer = ShapExplainer::new(&ds, &l).unwrap();
        let r = kernel_shap(&explainer, &e, KernelSamples::Exhaustive, 0).unwrap();
        assert_eq!((r.diagnostics.skipped_coalitions, r.diagnostics.oracle_probes), (2, 3));

        // only {F3} has support, which cannot separate F1 from F2
        let ds = Dataset::from_int_rows(&[(&[0, 0, 0], 1)]).unwrap();
        let explainer = ShapExplainer::new(&ds, &l).unwrap();
        let r = kernel_shap(&explainer, &e, KernelSamples::Exhaustive, 0);
        assert!(matches!(r, Err(Error::Singular(_))), "{r:?}");
    }
}
