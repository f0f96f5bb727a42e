//! Naive subset listing, kept deliberately separate from [`crate::exact`] so
//! the two can check each other. Every subset containing the anchor is built
//! explicitly and both sides are summed from scratch.

use crate::error::{Error, Result};
use crate::exact::AnchoredCounts;
use crate::model::{Kind, LengthVector, LengthsRef, SubsetProfile, AMBIGUOUS_REL_TOL, MEDIAN_REL_TOL};

pub const ORACLE_CAP: usize = 20;

/// Short/median counts over subsets containing `anchor`, by brute force.
pub fn oracle_anchored(l: &LengthVector, anchor: usize) -> Result<AnchoredCounts> {
    let n = l.n();
    if n > ORACLE_CAP {
        return Err(Error::CapExceeded { n, cap: ORACLE_CAP });
    }
    let mut short = vec![0u64; n];
    let mut median = vec![0u64; n];
    for mask in 0u32..(1u32 << n) {
        if mask & (1 << anchor) == 0 {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
        let slot = members.len() - 1;
        match compare(l, &members, &rest)? {
            std::cmp::Ordering::Less => short[slot] += 1,
            std::cmp::Ordering::Equal => median[slot] += 1,
            std::cmp::Ordering::Greater => {}
        }
    }
    Ok(AnchoredCounts { short, median })
}

fn compare(l: &LengthVector, inside: &[usize], outside: &[usize]) -> Result<std::cmp::Ordering> {
    match l.lengths() {
        LengthsRef::Exact(v) => {
            let a: i128 = inside.iter().map(|&i| v[i] as i128).sum();
            let b: i128 = outside.iter().map(|&i| v[i] as i128).sum();
            Ok(a.cmp(&b))
        }
        LengthsRef::Float(v) => {
            let a: f64 = inside.iter().map(|&i| v[i]).sum();
            let b: f64 = outside.iter().map(|&i| v[i]).sum();
            let total: f64 = v.iter().sum();
            let gap = a - b;
            if gap.abs() <= MEDIAN_REL_TOL * total {
                Ok(std::cmp::Ordering::Equal)
            } else if gap.abs() <= AMBIGUOUS_REL_TOL * total {
                Err(Error::ToleranceAmbiguous { residual: gap, total })
            } else if gap < 0.0 {
                Ok(std::cmp::Ordering::Less)
            } else {
                Ok(std::cmp::Ordering::Greater)
            }
        }
    }
}

/// Same contract as the fast `short_profile_*` functions.
pub fn oracle_brute_force(l: &LengthVector, kind: Kind) -> Result<SubsetProfile> {
    match kind {
        Kind::Planar => {
            // first maximal entry, found independently of the model helper
            let mut anchor = 0;
            for i in 1..l.n() {
                if l.get(i) > l.get(anchor) {
                    anchor = i;
                }
            }
            let c = oracle_anchored(l, anchor)?;
            Ok(SubsetProfile { kind, counts: c.short, median_counts: c.median })
        }
        Kind::Spatial => {
            let c = oracle_anchored(l, l.n() - 1)?;
            if c.median.iter().any(|&m| m != 0) {
                return Err(Error::NonGeneric);
            }
            Ok(SubsetProfile { kind, counts: c.short, median_counts: c.median })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let l = LengthVector::exact(vec![1, 1, 1]).unwrap();
        assert_eq!(oracle_brute_force(&l, Kind::Planar).unwrap().counts, vec![1, 0, 0]);
        let l = LengthVector::exact(vec![1, 1, 1, 1]).unwrap();
        assert_eq!(oracle_brute_force(&l, Kind::Planar).unwrap().median_counts[1], 3);
        assert!(matches!(oracle_brute_force(&l, Kind::Spatial), Err(Error::NonGeneric)));
    }

    #[test]
    fn cap() {
        let l = LengthVector::equilateral(21).unwrap();
        assert!(matches!(oracle_brute_force(&l, Kind::Planar), Err(Error::CapExceeded { .. })));
    }
}
