//! Nested subsampling levels `h_0, …, h_L` with `Pr(h_j(i) = 1) = 2^-j`.
//!
//! Each index draws one uniform `u(i) ∈ [0, 1)` from the PRF and belongs
//! to level `j` iff `u(i) < 2^-j`, so the levels are nested.

use crate::error::{param, Result};
use crate::gfq::FieldVec;
use crate::prf::SharedRandomness;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelFamily {
    seed: u64,
    n: usize,
    max_level: u32,
}

impl LevelFamily {
    pub fn new(seed: u64, n: usize, max_level: u32) -> Result<Self> {
        if max_level > 64 {
            return param(format!("max level {max_level} exceeds 64"));
        }
        Ok(Self { seed, n, max_level })
    }

    /// Levels for a protocol recovering `k` indices: `L = ⌊log₂(n/k)⌋`.
    pub fn for_protocol(seed: u64, n: usize, k: usize) -> Result<Self> {
        Self::new(seed, n, max_level_for(n, k)?)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    fn draw(&self, i: usize) -> u64 {
        SharedRandomness::new(self.seed).word("level", &[i as u64])
    }

    /// Deepest level containing `i`, capped at `L`.
    pub fn depth(&self, i: usize) -> u32 {
        self.draw(i).leading_zeros().min(self.max_level)
    }

    /// `h_j(i) = 1`.
    pub fn member(&self, j: u32, i: usize) -> Result<bool> {
        if j > self.max_level {
            return param(format!("level {j} above max level {}", self.max_level));
        }
        if i >= self.n {
            return param(format!("index {i} out of range for dimension {}", self.n));
        }
        Ok(self.depth(i) >= j)
    }

    /// `x|_{h_j^{-1}(1)}`: zero every coordinate outside level `j`.
    pub fn restrict(&self, x: &FieldVec, j: u32) -> Result<FieldVec> {
        if x.len() != self.n {
            return param(format!("vector length {} does not match dimension {}", x.len(), self.n));
        }
        if j > self.max_level {
            return param(format!("level {j} above max level {}", self.max_level));
        }
        let mut out = x.clone();
        for i in x.support() {
            if self.depth(i) < j {
                out.set(i, 0);
            }
        }
        Ok(out)
    }
}

/// `⌊log₂(n/k)⌋`.
pub fn max_level_for(n: usize, k: usize) -> Result<u32> {
    if k == 0 || k > n {
        return param(format!("need 1 ≤ k ≤ n (k={k}, n={n})"));
    }
    let mut l = 0u32;
    while (k as u128) << (l + 1) <= n as u128 {
        l += 1;
    }
    Ok(l)
}
