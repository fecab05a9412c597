//! One-way public-coin protocols for the universal relation.
//!
//! Alice holds `x`, Bob holds `y`, both see the same seed. Alice sends one
//! message; Bob names up to `k` indices where `x` and `y` differ.

mod bucketed;
mod message;
mod sketched;
mod stubs;

pub use bucketed::{BucketProtocol, BUCKET_MAGIC};
pub use message::{payload_bits_for, UrMessage, HEADER_BYTES, MESSAGE_MAGIC};
pub use sketched::UrProtocol;
pub use stubs::{make_stub, Stub, StubKind};

use crate::error::{param, Result};
use crate::gfq::check_modulus;
use crate::levels::max_level_for;
use crate::sparse_recovery::{recovery_rows, DEFAULT_SLACK};

pub const DEFAULT_OVERSAMPLE: usize = 16;

/// What Bob reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BobOutput {
    Indices(Vec<usize>),
    Fail,
}

impl BobOutput {
    pub fn indices(&self) -> Option<&[usize]> {
        match self {
            BobOutput::Indices(v) => Some(v),
            BobOutput::Fail => None,
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, BobOutput::Fail)
    }
}

/// A one-way protocol. Both sides must be pure functions of their inputs
/// and the handle's shared randomness, so an encoder can replay Bob.
pub trait ProtocolHandle: Send + Sync {
    fn dim(&self) -> usize;

    fn k(&self) -> usize;

    fn alice(&self, x: &[bool]) -> Result<Vec<u8>>;

    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput>;
}

impl<P: ProtocolHandle + ?Sized> ProtocolHandle for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn k(&self) -> usize {
        (**self).k()
    }
    fn alice(&self, x: &[bool]) -> Result<Vec<u8>> {
        (**self).alice(x)
    }
    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput> {
        (**self).bob(message, y)
    }
}

impl<P: ProtocolHandle + ?Sized> ProtocolHandle for std::sync::Arc<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn k(&self) -> usize {
        (**self).k()
    }
    fn alice(&self, x: &[bool]) -> Result<Vec<u8>> {
        (**self).alice(x)
    }
    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput> {
        (**self).bob(message, y)
    }
}

/// Protocol configuration. `seed` is the public random string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolParams {
    pub n: usize,
    pub k: usize,
    pub q: u32,
    /// Recovery sparsity per unit of `k`.
    pub oversample: usize,
    pub slack: usize,
    pub seed: u64,
}

impl ProtocolParams {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k, q: 3, oversample: DEFAULT_OVERSAMPLE, slack: DEFAULT_SLACK, seed: 0 }
    }

    pub fn with_q(mut self, q: u32) -> Self {
        self.q = q;
        self
    }

    pub fn with_oversample(mut self, c: usize) -> Self {
        self.oversample = c;
        self
    }

    pub fn with_slack(mut self, slack: usize) -> Self {
        self.slack = slack;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_modulus(self.q)?;
        if self.k == 0 || 2 * self.k > self.n {
            return param(format!("need 1 ≤ k ≤ n/2 (n={}, k={})", self.n, self.k));
        }
        if self.oversample == 0 {
            return param("oversample must be positive");
        }
        let s = self.sparsity();
        if 2 * s > self.n {
            return param(format!(
                "recovery sparsity oversample·k = {s} exceeds n/2 = {}",
                self.n / 2
            ));
        }
        Ok(())
    }

    /// `oversample · k`.
    pub fn sparsity(&self) -> usize {
        self.oversample.saturating_mul(self.k)
    }

    /// `L = ⌊log₂(n/k)⌋`.
    pub fn max_level(&self) -> Result<u32> {
        max_level_for(self.n, self.k)
    }

    pub fn rows(&self) -> usize {
        recovery_rows(self.n, self.sparsity(), self.q, self.slack)
    }
}

/// `1_S` as a boolean vector of length `n`.
pub fn indicator(n: usize, set: impl IntoIterator<Item = usize>) -> Result<Vec<bool>> {
    let mut v = vec![false; n];
    for i in set {
        if i >= n {
            return param(format!("index {i} out of range for dimension {n}"));
        }
        v[i] = true;
    }
    Ok(v)
}

pub fn support_of(x: &[bool]) -> Vec<usize> {
    x.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect()
}

pub fn check_dim(v: &[bool], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return param(format!("{what} has length {}, expected {n}", v.len()));
    }
    Ok(())
}

/// Bob's output is correct for `(x, y)`: not a failure, distinct indices,
/// all differing, and `min(k, ‖x − y‖₀)` of them.
pub fn is_correct(out: &BobOutput, x: &[bool], y: &[bool], k: usize) -> bool {
    let Some(idx) = out.indices() else { return false };
    let diff = x.iter().zip(y).filter(|(a, b)| a != b).count();
    let mut seen = std::collections::HashSet::new();
    idx.len() == k.min(diff)
        && idx.iter().all(|&i| i < x.len() && x[i] != y[i] && seen.insert(i))
}
