//! Scale-up (capture-recapture) estimate of the audience size.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use thiserror::Error;

use crate::io::seeded_rng;

#[derive(Debug, Error, PartialEq)]
pub enum AudienceError {
    #[error("samples do not overlap: independence assumption unmeasurable")]
    NoOverlap,
}

/// `|R_A| * |R_B| / |R_A & R_B|`.
pub fn scale_up_estimate(ra: &BTreeSet<usize>, rb: &BTreeSet<usize>) -> Result<f64, AudienceError> {
    let overlap = ra.intersection(rb).count();
    if overlap == 0 {
        return Err(AudienceError::NoOverlap);
    }
    Ok(ra.len() as f64 * rb.len() as f64 / overlap as f64)
}

/// Two independent uniform samples without replacement from a population
/// of `population` nodes.
pub fn independent_samples(population: usize, size: usize, seed: u64) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let mut rng = seeded_rng(seed);
    let a = sample(&mut rng, population, size).into_iter().collect();
    let b = sample(&mut rng, population, size).into_iter().collect();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_overlap_is_exact() {
        let r: BTreeSet<usize> = (0..37).collect();
        assert_eq!(scale_up_estimate(&r, &r).unwrap(), 37.0);
    }

    #[test]
    fn arithmetic_example() {
        let a: BTreeSet<usize> = (0..50).collect();
        let b: BTreeSet<usize> = (30..70).collect();
        assert_eq!(scale_up_estimate(&a, &b).unwrap(), 100.0);
    }

    #[test]
    fn no_overlap_errors() {
        let a: BTreeSet<usize> = [1].into();
        let b: BTreeSet<usize> = [2].into();
        let e = scale_up_estimate(&a, &b).unwrap_err();
        assert!(e.to_string().contains("independence assumption unmeasurable"));
    }
}
