//! Deterministic seed derivation.
//!
//! Trial `i` of an experiment with master seed `m` uses
//! `trial_seed(m, i) = splitmix64(m ^ splitmix64(i + 1))`. The rule depends
//! only on `(m, i)`, so adding trials never changes earlier trials' streams.
//! Sub-streams inside a trial (world, per-round planner and attacker draws)
//! are derived the same way from the trial seed and a fixed tag.

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial.wrapping_add(1)))
}

/// Seed of the sub-stream identified by `parts` under `seed`.
pub fn stream(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
