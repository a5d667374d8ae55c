//! Detection of the observable families with known closed-form
//! incompatibility values: pairwise-commuting sets, qubit pairs, mutually
//! unbiased families, and pairs that commute on a subspace while being
//! unbiased on its complement.

use crate::linalg::{overlap_matrix, BlochVector, Observable, OverlapMatrix};

const PATTERN_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) enum Family {
    /// All observables commute pairwise; `common` indexes a shared eigenstate
    /// of the first observable.
    Commuting { common: usize },
    QubitPair { a: BlochVector, b: BlochVector },
    /// All cross overlaps equal 1/d.
    Mub { n: usize, d: usize },
    /// Overlap pattern of a pair sharing d_c eigenvectors and unbiased on the
    /// rest (1 ≤ d_c ≤ d − 1). `common` indexes one shared eigenvector of the
    /// first observable.
    Subspace { d: usize, d_c: usize, common: usize },
}

fn is_permutation(m: &OverlapMatrix) -> Option<usize> {
    let d = m.dim();
    let mut common = None;
    for i in 0..d {
        let mut ones = 0;
        for j in 0..d {
            let e = m.get(i, j);
            if (e - 1.0).abs() <= PATTERN_TOL {
                ones += 1;
            } else if e > PATTERN_TOL {
                return None;
            }
        }
        if ones != 1 {
            return None;
        }
        common.get_or_insert(i);
    }
    common
}

fn is_unbiased(m: &OverlapMatrix) -> bool {
    let d = m.dim();
    m.entries()
        .iter()
        .all(|e| (e - 1.0 / d as f64).abs() <= PATTERN_TOL)
}

/// Detects the block pattern: d_c rows carrying a single unit entry, the
/// remaining rows constant 1/(d − d_c) on the non-commuting columns.
fn subspace_pattern(m: &OverlapMatrix) -> Option<(usize, usize)> {
    let d = m.dim();
    let mut commuting_rows = Vec::new();
    let mut commuting_cols = vec![false; d];
    for i in 0..d {
        for j in 0..d {
            if (m.get(i, j) - 1.0).abs() <= PATTERN_TOL {
                commuting_rows.push(i);
                commuting_cols[j] = true;
            }
        }
    }
    let d_c = commuting_rows.len();
    if d_c == 0 || d_c >= d || commuting_cols.iter().filter(|&&c| c).count() != d_c {
        return None;
    }
    let block = d - d_c;
    let target = 1.0 / block as f64;
    for i in 0..d {
        let row_commutes = commuting_rows.contains(&i);
        for j in 0..d {
            let e = m.get(i, j);
            let expected = if row_commutes || commuting_cols[j] {
                if (e - 1.0).abs() <= PATTERN_TOL {
                    continue;
                }
                0.0
            } else {
                target
            };
            if (e - expected).abs() > PATTERN_TOL {
                return None;
            }
        }
    }
    Some((d_c, commuting_rows[0]))
}

pub(crate) fn detect_family(observables: &[Observable]) -> Option<Family> {
    if observables.len() < 2 {
        return None;
    }
    let d = observables[0].dim();
    if observables.iter().any(|o| o.dim() != d) {
        return None;
    }
    let mut overlaps = Vec::new();
    for i in 0..observables.len() {
        for j in (i + 1)..observables.len() {
            overlaps.push(overlap_matrix(&observables[i], &observables[j]).ok()?);
        }
    }
    if overlaps.iter().all(|m| is_permutation(m).is_some()) {
        // permutation overlaps: the observables share a full eigenbasis
        return Some(Family::Commuting { common: 0 });
    }
    if observables.len() == 2 && d == 2 {
        let a = observables[0].bloch_vector()?;
        let b = observables[1].bloch_vector()?;
        return Some(Family::QubitPair { a, b });
    }
    if overlaps.iter().all(is_unbiased) {
        return Some(Family::Mub {
            n: observables.len(),
            d,
        });
    }
    if observables.len() == 2 {
        if let Some((d_c, common)) = subspace_pattern(&overlaps[0]) {
            return Some(Family::Subspace { d, d_c, common });
        }
    }
    None
}
