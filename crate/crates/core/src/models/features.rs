use serde::{Deserialize, Serialize};

use crate::tokenize::TokenSequence;

const UNIGRAM_SALT: u64 = 0x756e_6967_7261_6d00; // "unigram\0"
const BIGRAM_SALT: u64 = 0x6269_6772_616d_0000; // "bigram\0\0"

/// The splitmix64 output function: add the golden-ratio increment, then two
/// xor-shift-multiply rounds and a final xor-shift.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sparse vector with strictly increasing bucket indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dim: usize,
    pub entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    /// Sums duplicate indices and sorts.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            assert!(i < dim, "feature index {i} outside dimension {dim}");
            match merged.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => merged.push((i, v)),
            }
        }
        FeatureVector { dim, entries: merged }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |k| self.entries[k].1)
    }
}

/// Hashed bag of token ids and adjacent-id bigrams with counts as values.
///
/// Unigram `a` lands in bucket `mix64(UNIGRAM_SALT ^ a) & (dim - 1)`, bigram
/// `(a, b)` in `mix64(BIGRAM_SALT ^ (a << 32 | b)) & (dim - 1)`.
///
/// # Panics
///
/// If `dim` is not a power of two.
pub fn featurize(seq: &TokenSequence, dim: usize) -> FeatureVector {
    assert!(dim.is_power_of_two(), "feature dimension {dim} is not a power of two");
    let mask = dim as u64 - 1;
    let uni = seq.ids.iter().map(|&a| mix64(UNIGRAM_SALT ^ u64::from(a)));
    let bi = seq
        .ids
        .windows(2)
        .map(|w| mix64(BIGRAM_SALT ^ (u64::from(w[0]) << 32 | u64::from(w[1]))));
    FeatureVector::from_pairs(dim, uni.chain(bi).map(|h| ((h & mask) as usize, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(ids: &[u32]) -> TokenSequence {
        TokenSequence {
            ids: ids.to_vec(),
            offsets: (0..ids.len()).map(|i| (i, i + 1)).collect(),
        }
    }

    #[test]
    fn mixer_reference_values() {
        // splitmix64 seeded with 0: first output
        assert_eq!(mix64(0), 0xe220_a839_7b1d_cdaf);
    }

    #[test]
    fn counts() {
        assert_eq!(featurize(&seq(&[]), 256).nnz(), 0);
        let one = featurize(&seq(&[5]), 256);
        assert_eq!(one.nnz(), 1);
        assert_eq!(one.entries[0].1, 1.0);

        let two = featurize(&seq(&[5, 5]), 256);
        let uni = (mix64(UNIGRAM_SALT ^ 5) & 255) as usize;
        let bi = (mix64(BIGRAM_SALT ^ (5 << 32 | 5)) & 255) as usize;
        assert_ne!(uni, bi);
        assert_eq!(two.get(uni), 2.0);
        assert_eq!(two.get(bi), 1.0);
        assert_eq!(two.nnz(), 2);
    }
}
