//! Counter-based seed chain: every replica seed is a pure function of
//! `(base seed, stream id, replica index)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Well-known stream ids.
pub mod stream {
    pub const POINTS: u64 = 1;
    pub const SPEEDS: u64 = 2;
    pub const PAIRS: u64 = 3;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedChain {
    pub base: u64,
}

impl SeedChain {
    pub fn new(base: u64) -> Self {
        SeedChain { base }
    }

    pub fn derive(&self, stream: u64, replica: u64) -> u64 {
        let a = splitmix64(self.base ^ splitmix64(stream.wrapping_mul(0xd1b5_4a32_d192_ed03)));
        splitmix64(a ^ splitmix64(replica.wrapping_add(0x632b_e59b_d9b4_e019)))
    }

    /// Seeds for replicas `0..n` of every stream in `streams`, rejecting any
    /// collision across the requested set.
    pub fn replica_seeds(&self, streams: &[u64], n: u64) -> Result<Vec<Vec<u64>>> {
        let mut seen: HashMap<u64, (u64, u64)> = HashMap::new();
        let mut out = Vec::with_capacity(streams.len());
        for &s in streams {
            let mut v = Vec::with_capacity(n as usize);
            for r in 0..n {
                let seed = self.derive(s, r);
                if let Some(&first) = seen.get(&seed) {
                    return Err(Error::SeedCollision {
                        seed,
                        first,
                        second: (s, r),
                    });
                }
                seen.insert(seed, (s, r));
                v.push(seed);
            }
            out.push(v);
        }
        Ok(out)
    }
}
