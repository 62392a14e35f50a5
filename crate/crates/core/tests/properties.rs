use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ce_core::causal::{counter_score, resp_for_contingency, resp_score, Contingency, RespConfig};
use ce_core::classifier::{Classifier, FnClassifier, Label};
use ce_core::compare::{jaccard_mean, top1_distribution, topk_intersection, ExplanationSet};
use ce_core::selftest::gen::{random_cnf, random_rows, table_instance, HashClassifier};
use ce_core::shapley::{shap_empirical, shap_exact, ShapOptions};
use ce_core::tabular::{BucketEncoding, BucketSpec, Dataset, EmpiricalSpace, Entity, FeatureSet, ProductSpace, Value};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_dataset(seed: u64, max_features: usize) -> (Dataset, ChaCha8Rng) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_features);
    let domains: Vec<i64> = (0..n).map(|_| r.gen_range(1..=3)).collect();
    let rows = r.gen_range(1..=12);
    (random_rows(&mut r, &domains, rows).unwrap(), r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginals_and_joint_sum_to_one(seed in any::<u64>()) {
        let (ds, _) = small_dataset(seed, 5);
        let space = ProductSpace::new(&ds);
        for d in space.domains() {
            prop_assert!((d.marginals.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(d.marginals.iter().all(|&p| p > 0.0));
        }
        let base = ds.rows()[0].entity.clone();
        let total: f64 = space.assignments(&base, FeatureSet::full(ds.num_features())).map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn match_counts_shrink_with_conditioning(seed in any::<u64>()) {
        let (ds, mut r) = small_dataset(seed, 5);
        let n = ds.num_features();
        let l = HashClassifier::new(n, r.gen());
        let e = ds.rows()[r.gen_range(0..ds.num_rows())].entity.clone();
        let space = EmpiricalSpace::new(ds);
        for bits in 0..1u64 << n {
            let s = FeatureSet::from_bits(bits);
            let c = space.cond_expectation(&l, &e, s).unwrap().match_count;
            for j in (0..n).filter(|&j| !s.contains(j)) {
                prop_assert!(space.cond_expectation(&l, &e, s.with(j)).unwrap().match_count <= c);
            }
        }
        let full = space.cond_expectation(&l, &e, FeatureSet::full(n)).unwrap().value;
        prop_assert_eq!(full, f64::from(l.classify(&e).unwrap()));
    }

    #[test]
    fn equi_depth_representatives_and_round_trip(values in prop::collection::vec((-50i32..50, 1u64..4), 1..40), k in 1usize..8) {
        let column: Vec<(f64, u64)> = values.iter().map(|&(v, c)| (f64::from(v), c)).collect();
        let enc = BucketEncoding::fit("x", &BucketSpec::EquiDepth { k }, &column).unwrap();
        let mut sums = vec![(0.0, 0u64); enc.buckets.len()];
        for &(v, c) in &column {
            let b = enc.bucket_of(&Value::Real(v)).unwrap();
            sums[b].0 += v * c as f64;
            sums[b].1 += c;
            let one_hot = enc.one_hot(&Value::Real(v)).unwrap();
            prop_assert_eq!(one_hot.iter().map(|&x| x as u32).sum::<u32>(), 1);
            prop_assert_eq!(enc.decode(&one_hot).unwrap(), enc.representatives[b]);
        }
        for (b, &(sum, count)) in sums.iter().enumerate() {
            if count > 0 {
                prop_assert!((enc.representatives[b] - sum / count as f64).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn monotone_cnf_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let f = random_cnf(&mut r, n).unwrap();
        let e: u64 = r.gen_range(0..1 << n);
        let up = e | r.gen_range(0..1u64 << n);
        prop_assert!(!f.eval_bits(e) || f.eval_bits(up));
    }

    #[test]
    fn counter_bounds_and_counterfactual_mass(seed in any::<u64>()) {
        let (ds, mut r) = small_dataset(seed, 4);
        let n = ds.num_features();
        let l = HashClassifier::new(n, r.gen());
        let space = ProductSpace::new(&ds);
        let e = ds.rows()[r.gen_range(0..ds.num_rows())].entity.clone();
        let y = l.classify(&e).unwrap();
        for i in 0..n {
            let c = counter_score(&space, &l, &e, i).unwrap().value;
            prop_assert!((-1.0..=1.0).contains(&c));
            prop_assert_eq!(resp_for_contingency(&space, &l, &e, i, &Contingency::empty()).unwrap(), c);
            if y == 1 {
                let d = space.domain(i);
                for (x, &p) in d.values.iter().zip(&d.marginals) {
                    if l.classify(&e.with(i, x.clone())).unwrap() == 0 {
                        prop_assert!(c >= p - 1e-15);
                    }
                }
                let resp = resp_score(&space, &l, &e, i, &RespConfig::default()).unwrap();
                let bound = resp.witness.as_ref().map_or(0.0, |w| 1.0 / (1 + w.len()) as f64);
                prop_assert!(resp.value >= 0.0 && resp.value <= bound);
            }
        }
    }

    #[test]
    fn shap_efficiency_and_levels(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let inst = table_instance(&mut r, n, 3, 16).unwrap();
        let y = f64::from(inst.l.classify(&inst.e_star).unwrap());
        let space = ProductSpace::new(&inst.ds);
        let exact = shap_exact(&space, &inst.l, &inst.e_star).unwrap();
        let mean: f64 = space
            .assignments(&inst.e_star, FeatureSet::full(n))
            .map(|(e, p)| p * f64::from(inst.l.classify(&e).unwrap()))
            .sum();
        prop_assert!((exact.iter().map(|s| s.value).sum::<f64>() - (y - mean)).abs() <= 1e-9);
        for s in &exact {
            let levels = s.per_level.as_ref().unwrap();
            prop_assert!((levels.iter().sum::<f64>() - s.value).abs() <= 1e-12);
        }
        let opts = ShapOptions { levels: true, ..ShapOptions::default() };
        for s in shap_empirical(&inst.ds, &inst.l, &inst.e_star, &opts).unwrap().scores {
            let levels = s.per_level.unwrap();
            prop_assert!((levels.iter().sum::<f64>() - s.value).abs() <= 1e-12);
        }
    }

    #[test]
    fn exchangeable_features_score_equally(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rows: Vec<Vec<i64>> = (0..r.gen_range(1..=10)).map(|_| {
            let a = r.gen_range(0..2);
            vec![a, a, r.gen_range(0..3)]
        }).collect();
        let refs: Vec<(&[i64], u64)> = rows.iter().map(|row| (row.as_slice(), 1)).collect();
        let ds = Dataset::from_int_rows(&refs).unwrap();
        let l = FnClassifier::new("and", 3, |e: &Entity| Label::from(e[0] == Value::Int(1) && e[1] == Value::Int(1)));
        let e = ds.rows()[0].entity.clone();
        let s = shap_empirical(&ds, &l, &e, &ShapOptions::default()).unwrap().scores;
        prop_assert!((s[0].value - s[1].value).abs() <= 1e-12);
        // a product space over the same rows is symmetric in F1 and F2 too
        let p = shap_exact(&ProductSpace::new(&ds), &l, &e).unwrap();
        prop_assert!((p[0].value - p[1].value).abs() <= 1e-12);
    }

    #[test]
    fn comparison_statistics(
        a in prop::collection::vec(prop::sample::subsequence(vec!["F1", "F2", "F3", "F4", "F5", "F6"], 0..6), 1..20),
        shuffle in any::<u64>(),
        k in 1usize..5,
    ) {
        let xs: Vec<Vec<String>> = a.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        let mut r = rng(shuffle);
        let ys: Vec<Vec<String>> = xs.iter().map(|x| {
            let mut y = x.clone();
            for i in (1..y.len()).rev() {
                y.swap(i, r.gen_range(0..=i));
            }
            y
        }).collect();
        let x = ExplanationSet::from_rankings("a", xs.clone());
        let y = ExplanationSet::from_rankings("b", ys);
        let ab = jaccard_mean(&x, &y, k).unwrap();
        let ba = jaccard_mean(&y, &x, k).unwrap();
        prop_assert!((ab.mean - ba.mean).abs() <= 1e-12 || (ab.mean.is_nan() && ba.mean.is_nan()));
        prop_assert_eq!(top1_distribution(&x).values().sum::<u64>(), xs.len() as u64);
        let hist = topk_intersection(&x, &y, k).unwrap();
        prop_assert_eq!(hist.iter().sum::<u64>(), xs.len() as u64);
        let long: ExplanationSet = ExplanationSet::from_rankings("c", xs.iter().filter(|r| r.len() >= k).cloned().collect());
        let self_hist = topk_intersection(&long, &long, k).unwrap();
        prop_assert_eq!(self_hist[k], long.len() as u64);
    }
}
