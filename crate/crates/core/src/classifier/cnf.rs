use crate::classifier::{Classifier, Label};
use crate::error::{Error, Result};
use crate::tabular::{check_arity, Entity, Value};

/// Largest variable count [`count_models`] will enumerate.
pub const MAX_COUNT_VARIABLES: usize = 25;

/// A monotone 2CNF `AND_{(i,j)} (F_i OR F_j)` over binary features.
/// Clause indices are zero-based; `i == j` is a unit clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monotone2Cnf {
    n: usize,
    clauses: Vec<(usize, usize)>,
}

impl Monotone2Cnf {
    pub fn new(n: usize, clauses: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::Precondition(format!("2CNF needs 1..=64 variables, got {n}")));
        }
        if let Some(&(i, j)) = clauses.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::Precondition(format!("clause ({i}, {j}) out of range for n = {n}")));
        }
        Ok(Monotone2Cnf { n, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[(usize, usize)] {
        &self.clauses
    }

    /// Evaluate on an assignment packed as bits (bit `i` is `F_i`).
    pub fn eval_bits(&self, bits: u64) -> bool {
        self.clauses.iter().all(|&(i, j)| (bits >> i) & 1 == 1 || (bits >> j) & 1 == 1)
    }
}

fn bit(value: &Value) -> Result<bool> {
    match value.as_f64() {
        Some(x) if x == 0.0 => Ok(false),
        Some(x) if x == 1.0 => Ok(true),
        _ => Err(Error::Precondition(format!("2CNF features are binary, got `{value}`"))),
    }
}

impl Classifier for Monotone2Cnf {
    fn name(&self) -> &str {
        "monotone-2cnf"
    }

    fn arity(&self) -> usize {
        self.n
    }

    fn classify(&self, entity: &Entity) -> Result<Label> {
        check_arity(self.n, entity.values())?;
        let mut bits = 0u64;
        for (i, v) in entity.values().iter().enumerate() {
            if bit(v)? {
                bits |= 1 << i;
            }
        }
        Ok(Label::from(self.eval_bits(bits)))
    }
}

/// `#L`: the number of satisfying assignments, by exhaustive enumeration.
pub fn count_models(f: &Monotone2Cnf) -> Result<u64> {
    if f.n > MAX_COUNT_VARIABLES {
        return Err(Error::Budget(format!(
            "model counting enumerates 2^n assignments; n = {} exceeds {MAX_COUNT_VARIABLES}",
            f.n
        )));
    }
    Ok((0..1u64 << f.n).filter(|&bits| f.eval_bits(bits)).count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_single_clause() {
        let f = Monotone2Cnf::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(f.classify(&Entity::ints(&[1, 0])).unwrap(), 1);
        assert_eq!(f.classify(&Entity::ints(&[0, 0])).unwrap(), 0);
        assert!(f.classify(&Entity::ints(&[2, 0])).is_err());
    }

    #[test]
    fn model_counts() {
        assert_eq!(count_models(&Monotone2Cnf::new(2, vec![(0, 1)]).unwrap()).unwrap(), 3);
        assert_eq!(count_models(&Monotone2Cnf::new(3, vec![]).unwrap()).unwrap(), 8);
        // (F1 v F2) ^ (F2 v F3): the 8 assignments minus 000, 001, 100.
        let f = Monotone2Cnf::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(count_models(&f).unwrap(), 5);
        assert!(count_models(&Monotone2Cnf::new(30, vec![]).unwrap()).is_err());
    }

    #[test]
    fn monotone_and_all_ones() {
        let f = Monotone2Cnf::new(5, vec![(0, 1), (2, 3), (1, 4), (3, 3)]).unwrap();
        assert!(f.eval_bits(0b11111));
        for a in 0u64..32 {
            for b in 0u64..32 {
                if a & b == a {
                    assert!(!f.eval_bits(a) || f.eval_bits(b));
                }
            }
        }
    }
}
