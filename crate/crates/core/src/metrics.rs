//! Cluster-quality counts over a pair of label sequences.
//!
//! `purity_number` sums, over output clusters, the largest overlap with any
//! true class; it is deliberately not normalized. `impurity` = n - purity
//! and is blind to splitting, which is what `c_impurity` (the same count
//! with the roles of the two label sets exchanged) picks up.

use crate::{Error, Result};
use std::collections::HashMap;

fn check(truth: &[i64], predicted: &[i64]) -> Result<()> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.is_empty() {
        return Err(Error::domain("need at least one labeled point"));
    }
    Ok(())
}

/// Sum over output clusters of max_i |c_i ∩ w_j|.
pub fn purity_number(truth: &[i64], predicted: &[i64]) -> Result<usize> {
    check(truth, predicted)?;
    let mut inter: HashMap<(i64, i64), usize> = HashMap::new();
    for (&t, &p) in truth.iter().zip(predicted) {
        *inter.entry((p, t)).or_insert(0) += 1;
    }
    let mut best: HashMap<i64, usize> = HashMap::new();
    for (&(p, _), &count) in &inter {
        let e = best.entry(p).or_insert(0);
        *e = (*e).max(count);
    }
    Ok(best.values().sum())
}

/// n minus the purity number; zero iff every output cluster is class-pure.
pub fn impurity(truth: &[i64], predicted: &[i64]) -> Result<usize> {
    Ok(truth.len() - purity_number(truth, predicted)?)
}

/// Impurity with the roles of true classes and output clusters exchanged;
/// zero iff no true class is split across output clusters.
pub fn c_impurity(truth: &[i64], predicted: &[i64]) -> Result<usize> {
    Ok(truth.len() - purity_number(predicted, truth)?)
}
