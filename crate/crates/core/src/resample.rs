//! Seeded random oversampling and undersampling for two-class datasets.
//!
//! The random stream is PCG-XSL-RR 128/64 (`pcg64`) seeded like the
//! reference `pcg64_srandom(seed, PCG_DEFAULT_INCREMENT >> 1)`. Bounded draws use
//! Lemire's multiply-and-reject method on 64-bit outputs; shuffles are
//! Fisher–Yates from the last index down. Every step is specified here so
//! outputs can be reproduced outside this crate.

use std::collections::BTreeMap;

use rand_core::Rng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledTweet;
use crate::label::ClassLabel;

/// Default stream increment of the reference pcg64 generator.
pub const PCG_DEFAULT_INCREMENT: u128 = 0x5851_f42d_4c95_7f2d_1405_7b7e_f767_814f;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResampleError {
    #[error("resampling needs exactly two classes, found {0}")]
    ClassCount(usize),
    #[error("sampling ratio {0} is outside (0, 1]")]
    BadRatio(f64),
}

/// Seeded generator with the bounded-draw and shuffle rules used here.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Pcg64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: Pcg64::new(u128::from(seed), PCG_DEFAULT_INCREMENT >> 1),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n` (`n > 0`).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform float in `[0, 1)` from the top 53 bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Two-stage plan: oversample the minority to `oversample_ratio` × majority,
/// then undersample the majority to minority ÷ `undersample_ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub oversample_ratio: f64,
    pub undersample_ratio: f64,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(oversample_ratio: f64, undersample_ratio: f64, seed: u64) -> Result<Self, ResampleError> {
        check_ratio(oversample_ratio)?;
        check_ratio(undersample_ratio)?;
        Ok(SamplingPlan {
            oversample_ratio,
            undersample_ratio,
            seed,
        })
    }
}

fn check_ratio(r: f64) -> Result<(), ResampleError> {
    if r > 0.0 && r <= 1.0 {
        Ok(())
    } else {
        Err(ResampleError::BadRatio(r))
    }
}

/// Rounds half away from zero for the non-negative targets used here.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

struct Split {
    minority: ClassLabel,
    minority_count: usize,
    majority_count: usize,
}

/// Class counts in label order; the minority is the smaller class (the
/// earlier label in scheme order when tied).
fn split(rows: &[LabeledTweet]) -> Result<Split, ResampleError> {
    let counts = class_counts(rows);
    if counts.len() != 2 {
        return Err(ResampleError::ClassCount(counts.len()));
    }
    let mut it = counts.into_iter();
    let (a, na) = it.next().unwrap();
    let (b, nb) = it.next().unwrap();
    let (minority, minority_count, majority_count) = if nb < na { (b, nb, na) } else { (a, na, nb) };
    Ok(Split {
        minority,
        minority_count,
        majority_count,
    })
}

/// Class counts of a row set, for reports and tests.
pub fn class_counts(rows: &[LabeledTweet]) -> BTreeMap<ClassLabel, usize> {
    let mut counts = BTreeMap::new();
    for r in rows {
        *counts.entry(r.label).or_default() += 1;
    }
    counts
}

/// Duplicates random minority rows (with replacement) until the minority
/// reaches `round(ratio × majority)`. Output is the original rows followed by
/// the duplicates, shuffled. Rows already at or above target come back
/// unchanged.
pub fn random_oversample(rows: &[LabeledTweet], ratio: f64, seed: u64) -> Result<Vec<LabeledTweet>, ResampleError> {
    check_ratio(ratio)?;
    let s = split(rows)?;
    let target = round_half_up(ratio * s.majority_count as f64);
    if target <= s.minority_count {
        return Ok(rows.to_vec());
    }
    let minority: Vec<&LabeledTweet> = rows.iter().filter(|r| r.label == s.minority).collect();
    let mut rng = SeededRng::new(seed);
    let mut out = rows.to_vec();
    for _ in 0..target - s.minority_count {
        let k = rng.below(minority.len() as u64) as usize;
        out.push(minority[k].clone());
    }
    rng.shuffle(&mut out);
    Ok(out)
}

/// Keeps a uniform random subset (without replacement) of the majority of
/// size `round(minority ÷ ratio)`. Survivors keep their relative order with
/// the minority before the final shuffle. Rows already at or below target
/// come back unchanged.
pub fn random_undersample(rows: &[LabeledTweet], ratio: f64, seed: u64) -> Result<Vec<LabeledTweet>, ResampleError> {
    check_ratio(ratio)?;
    let s = split(rows)?;
    let target = round_half_up(s.minority_count as f64 / ratio);
    if target >= s.majority_count {
        return Ok(rows.to_vec());
    }
    let mut rng = SeededRng::new(seed);
    // partial Fisher–Yates: the first `target` slots become the sample
    let mut pool: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label != s.minority).collect();
    for i in 0..target {
        let j = i + rng.below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut keep = vec![false; rows.len()];
    for &i in &pool[..target] {
        keep[i] = true;
    }
    let mut out: Vec<LabeledTweet> = rows
        .iter()
        .enumerate()
        .filter(|&(i, r)| r.label == s.minority || keep[i])
        .map(|(_, r)| r.clone())
        .collect();
    rng.shuffle(&mut out);
    Ok(out)
}

/// Oversampling with `seed`, then undersampling with `seed + 1`.
pub fn apply_plan(rows: &[LabeledTweet], plan: &SamplingPlan) -> Result<Vec<LabeledTweet>, ResampleError> {
    let over = random_oversample(rows, plan.oversample_ratio, plan.seed)?;
    random_undersample(&over, plan.undersample_ratio, plan.seed.wrapping_add(1))
}
