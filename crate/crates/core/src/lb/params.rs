use crate::error::{param, Result};
use crate::prf::SharedRandomness;
use num_bigint::BigUint;
use rand::seq::SliceRandom;

fn isqrt(x: u128) -> u128 {
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Largest `x ≤ m` with `x^K · 2^r ≤ m^K`, i.e. `⌊m · 2^{-r/K}⌋`.
fn scaled_floor(m: u64, k: u32, r: u64) -> u64 {
    let target = BigUint::from(m).pow(k);
    let ok = |x: u64| BigUint::from(x).pow(k) << r <= target;
    let (mut lo, mut hi) = (0u64, m);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Shared parameters for the single-index encoder.
#[derive(Debug, Clone)]
pub struct LbParams {
    n: usize,
    log2_inv_delta: u64,
    m: usize,
    k_block: u32,
    rounds: usize,
    sizes: Vec<usize>,
    seed: u64,
    pi: Vec<u32>,
}

impl LbParams {
    /// Requires `64 ≤ log₂(1/δ) ≤ n/64`.
    pub fn new(n: usize, log2_inv_delta: u64, seed: u64) -> Result<Self> {
        let l = log2_inv_delta;
        if l < 64 || l > (n as u64) / 64 {
            return param(format!(
                "constraint 64 ≤ log 1/δ ≤ n/64 violated: log 1/δ = {l}, n/64 = {}",
                n / 64
            ));
        }
        if n > u32::MAX as usize {
            return param("n must fit in 32 bits");
        }
        let m = isqrt(n as u128 * u128::from(l)) as u64;
        let kb = (l / 16) as u32;
        // R = ⌊K log₂(m / 4K)⌋: largest R with 2^R (4K)^K ≤ m^K
        let lhs = BigUint::from(4 * u64::from(kb)).pow(kb);
        let rhs = BigUint::from(m).pow(kb);
        let mut rounds = 0usize;
        while (lhs.clone() << (rounds + 1)) <= rhs {
            rounds += 1;
        }
        let sizes: Vec<usize> = (0..=rounds as u64).map(|r| scaled_floor(m, kb, r) as usize).collect();
        if let Some(r) = sizes.windows(2).position(|w| w[0] < w[1] + 2) {
            return param(format!("n_r − n_(r+1) ≥ 2 fails at r = {r}: {} vs {}", sizes[r], sizes[r + 1]));
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut SharedRandomness::new(seed).rng("lb-permutation", &[]));
        let mut pi = vec![0u32; n];
        for (pos, &a) in order.iter().enumerate() {
            pi[a as usize] = pos as u32;
        }
        Ok(Self { n, log2_inv_delta: l, m: m as usize, k_block: kb, rounds, sizes, seed, pi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log2_inv_delta(&self) -> u64 {
        self.log2_inv_delta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `K = ⌊log₂(1/δ) / 16⌋`.
    pub fn block(&self) -> u32 {
        self.k_block
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `n_r` for `r = 0..=R`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Position of `a` in the shared random permutation.
    pub fn pi(&self, a: usize) -> u32 {
        self.pi[a]
    }
}

/// Shared parameters for the `k`-index encoder.
#[derive(Debug, Clone)]
pub struct LbParamsK {
    n: usize,
    k: usize,
    m: usize,
    rounds: usize,
    seed: u64,
}

impl LbParamsK {
    /// Requires `1 ≤ k ≤ n / 2^10`.
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || (k as u128) << 10 > n as u128 {
            return param(format!("constraint 1 ≤ k ≤ n/2^10 violated: k = {k}, n/2^10 = {}", n >> 10));
        }
        let m = isqrt(n as u128 * k as u128) as usize;
        // R = ⌊½ log₂(n/k) − 2⌋: largest R with 4^(R+2) k ≤ n
        let mut rounds = 0usize;
        while (k as u128) << (2 * (rounds + 3)) <= n as u128 {
            rounds += 1;
        }
        Ok(Self { n, k, m, rounds, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest `r ≤ R` with `a ∈ T_r`; each step keeps `a` with
    /// probability ½.
    pub fn depth(&self, a: usize) -> usize {
        let w = SharedRandomness::new(self.seed).word("lb-retain", &[a as u64]);
        (w.leading_zeros() as usize).min(self.rounds)
    }

    pub fn in_t(&self, r: usize, a: usize) -> bool {
        self.depth(a) >= r
    }
}
