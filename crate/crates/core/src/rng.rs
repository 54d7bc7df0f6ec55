//! Counter-based random streams.
//!
//! Every trial draws from streams keyed by `(master seed, trial index,
//! attempt, role)`. The key material comes from a SplitMix64 chain over the
//! first three components and the role selects one of ChaCha's independent
//! 64-bit streams, so a trial's randomness never depends on which thread ran
//! it or in which order trials were scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Pattern = 0,
    Thinning = 1,
    Fading = 2,
    UePlacement = 3,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one trial (and one regeneration attempt of it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialKey {
    pub seed: u64,
    pub trial: u64,
    pub attempt: u32,
}

impl TrialKey {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            seed,
            trial,
            attempt: 0,
        }
    }

    pub fn with_attempt(self, attempt: u32) -> Self {
        Self { attempt, ..self }
    }

    pub fn stream(&self, role: StreamRole) -> ChaCha8Rng {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        // Absorb trial and attempt between outputs so nearby counters land far apart.
        let words = [
            splitmix64(&mut state) ^ self.trial,
            {
                state ^= self.trial.rotate_left(29);
                splitmix64(&mut state)
            },
            {
                state ^= u64::from(self.attempt).rotate_left(47);
                splitmix64(&mut state)
            },
            splitmix64(&mut state),
        ];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(role as u64);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn first(key: TrialKey, role: StreamRole) -> [u64; 4] {
        let mut rng = key.stream(role);
        [rng.random(), rng.random(), rng.random(), rng.random()]
    }

    #[test]
    fn same_key_same_stream() {
        let k = TrialKey::new(42, 7);
        assert_eq!(first(k, StreamRole::Fading), first(k, StreamRole::Fading));
    }

    #[test]
    fn distinct_components_give_distinct_streams() {
        let base = TrialKey::new(42, 7);
        let reference = first(base, StreamRole::Pattern);
        assert_ne!(reference, first(base, StreamRole::Thinning));
        assert_ne!(reference, first(TrialKey::new(42, 8), StreamRole::Pattern));
        assert_ne!(reference, first(TrialKey::new(43, 7), StreamRole::Pattern));
        assert_ne!(reference, first(base.with_attempt(1), StreamRole::Pattern));
    }

    #[test]
    fn swapped_seed_and_trial_differ() {
        assert_ne!(
            first(TrialKey::new(1, 2), StreamRole::Pattern),
            first(TrialKey::new(2, 1), StreamRole::Pattern)
        );
    }
}
