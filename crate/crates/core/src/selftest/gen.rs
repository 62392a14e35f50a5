//! Seeded random instances for the self-test suite.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{Classifier, Label, Monotone2Cnf, TableClassifier};
use crate::error::Result;
use crate::tabular::{Dataset, Entity, Value};

/// A labelled dataset, a classifier and an entity taken from the dataset.
pub struct Instance<C> {
    pub ds: Dataset,
    pub l: C,
    pub e_star: Entity,
}

/// Random integer rows with values below `domains[i]` and counts in `1..=3`.
pub fn random_rows(rng: &mut ChaCha8Rng, domains: &[i64], rows: usize) -> Result<Dataset> {
    let data: Vec<Vec<i64>> =
        (0..rows).map(|_| domains.iter().map(|&d| rng.gen_range(0..d)).collect()).collect();
    let refs: Vec<(&[i64], u64)> = data.iter().map(|r| (r.as_slice(), rng.gen_range(1..=3))).collect();
    Dataset::from_int_rows(&refs)
}

/// Random dataset over `n` features with a [`TableClassifier`] labelling its
/// rows at random and `e*` one of its rows.
pub fn table_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_domain: i64,
    max_rows: usize,
) -> Result<Instance<TableClassifier>> {
    let domains: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=max_domain)).collect();
    let rows = rng.gen_range(1..=max_rows);
    let ds = random_rows(rng, &domains, rows)?;
    let mut l = TableClassifier::new(n, 0);
    for row in ds.rows() {
        l.insert(row.entity.clone(), Label::from(rng.gen_bool(0.5)))?;
    }
    let e_star = ds.rows()[rng.gen_range(0..ds.num_rows())].entity.clone();
    Ok(Instance { ds, l, e_star })
}

/// A deterministic pseudo-random labelling of every entity with integer
/// values.
#[derive(Debug, Clone)]
pub struct HashClassifier {
    arity: usize,
    seed: u64,
}

pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl HashClassifier {
    pub fn new(arity: usize, seed: u64) -> Self {
        HashClassifier { arity, seed }
    }

    pub fn label_of(&self, values: &[i64]) -> Label {
        let h = values.iter().fold(self.seed, |acc, &v| splitmix(acc ^ v as u64));
        (h & 1) as Label
    }
}

impl Classifier for HashClassifier {
    fn name(&self) -> &str {
        "hash"
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn classify(&self, entity: &Entity) -> Result<Label> {
        crate::tabular::check_arity(self.arity, entity.values())?;
        let ints: Vec<i64> = entity
            .values()
            .iter()
            .map(|v| match v {
                Value::Int(i) => Ok(*i),
                other => Err(crate::error::Error::Precondition(format!("hash classifier needs integers, got {other}"))),
            })
            .collect::<Result<_>>()?;
        Ok(self.label_of(&ints))
    }
}

/// Random monotone 2CNF over `n` variables with up to `2n` clauses.
pub fn random_cnf(rng: &mut ChaCha8Rng, n: usize) -> Result<Monotone2Cnf> {
    let m = rng.gen_range(0..=2 * n);
    let clauses = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    Monotone2Cnf::new(n, clauses)
}

/// `{0^n, 1^n}`, whose product space is uniform over `{0, 1}^n`.
pub fn uniform_binary(n: usize) -> Result<Dataset> {
    let zeros = vec![0i64; n];
    let ones = vec![1i64; n];
    Dataset::from_int_rows(&[(&zeros, 1), (&ones, 1)])
}

pub fn random_binary_entity(rng: &mut ChaCha8Rng, n: usize) -> Entity {
    Entity::ints(&(0..n).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>())
}
