use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand_core::CryptoRngCore;

use super::{MatchSets, ProtocolError};

/// Draws `pad_count` decoy indices uniformly without replacement from
/// `1..=n` and unions them with `matched`.
pub fn pad_index_set<R: CryptoRngCore + ?Sized>(
    matched: &[u32],
    n: u32,
    pad_count: usize,
    rng: &mut R,
) -> Result<MatchSets, ProtocolError> {
    if pad_count > n as usize {
        return Err(ProtocolError::PadCount { pad_count, n });
    }
    if let Some(&bad) = matched.iter().find(|&&i| i == 0 || i > n) {
        return Err(ProtocolError::IndexOutOfRange(bad));
    }
    let mut decoys: Vec<u32> = rand::seq::index::sample(rng.as_rngcore(), n as usize, pad_count)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    decoys.sort_unstable();
    let matched: BTreeSet<u32> = matched.iter().copied().collect();
    let padded = matched.union(&decoys.iter().copied().collect()).copied().collect();
    Ok(MatchSets {
        matched: matched.into_iter().collect(),
        decoys,
        padded,
    })
}
