//! Sparse-recovery sketches over GF(q).
//!
//! [`RecoveryScheme`] pairs a random sketch matrix with enough rows that,
//! with high probability, no nonzero vector of weight `≤ 2s` lies in its
//! kernel; any `s`-sparse vector is then determined by its sketch.
//! [`RecoveryScheme::exhaustive_decode`] returns the first `s`-sparse
//! preimage in a fixed enumeration order (weight, then colex support, then
//! lex values). Three exact search strategies compute that same answer at
//! different costs; see [`DecodeStrategy`].
//!
//! [`BucketRecovery`] is a peeling-based backend for instances too large for
//! exhaustive search.

mod bucket;
mod enumerate;
mod search;

pub use bucket::{bucket_decode, BucketDecode, BucketRecovery, DEFAULT_BUCKET_HASHES};

use crate::combinatorics::{binomial, ceil_log_base};
use crate::error::{param, Error, Result};
use crate::gfq::{check_modulus, FieldVec, SketchMatrix};
use enumerate::Sparse;
use std::sync::OnceLock;

/// Extra rows beyond the union-bound threshold; a random matrix is bad with
/// probability at most `q^-slack`.
pub const DEFAULT_SLACK: usize = 10;

/// Default cap on the number of candidate vectors a search may visit.
pub const DEFAULT_WORK_LIMIT: u128 = 200_000_000;

/// How [`RecoveryScheme::exhaustive_decode`] searches for the preimage.
///
/// All strategies return the identical vector: the first `s`-sparse
/// preimage in enumeration order, or `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeStrategy {
    /// Pick the cheapest exact strategy for this scheme.
    #[default]
    Auto,
    /// Walk the enumeration order literally, stopping at the first match.
    Enumerate,
    /// Split each candidate support into a low and a high half and join
    /// through a table of sketches of `⌈s/2⌉`-sparse vectors.
    MeetInMiddle,
    /// Solve `Πw = y` by elimination and scan the affine solution space.
    Coset,
}

/// Row count `2s + ⌈log_q C(n, 2s)⌉ + slack`.
pub fn recovery_rows(n: usize, sparsity: usize, q: u32, slack: usize) -> usize {
    let c = binomial(n as u64, 2 * sparsity as u64);
    2 * sparsity + ceil_log_base(u64::from(q), &c) as usize + slack
}

/// A sketch matrix together with the sparsity it recovers.
#[derive(Debug)]
pub struct RecoveryScheme {
    matrix: SketchMatrix,
    sparsity: usize,
    slack: usize,
    work_limit: u128,
    strategy: DecodeStrategy,
    plan: OnceLock<(DecodeStrategy, u128)>,
    mitm: OnceLock<search::MitmTable>,
    coset: OnceLock<search::Elimination>,
}

impl Clone for RecoveryScheme {
    fn clone(&self) -> Self {
        Self::assemble(self.matrix.clone(), self.sparsity, self.slack)
            .with_work_limit(self.work_limit)
            .with_strategy(self.strategy)
    }
}

impl PartialEq for RecoveryScheme {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.sparsity == other.sparsity && self.slack == other.slack
    }
}

impl RecoveryScheme {
    fn assemble(matrix: SketchMatrix, sparsity: usize, slack: usize) -> Self {
        Self {
            matrix,
            sparsity,
            slack,
            work_limit: DEFAULT_WORK_LIMIT,
            strategy: DecodeStrategy::Auto,
            plan: OnceLock::new(),
            mitm: OnceLock::new(),
            coset: OnceLock::new(),
        }
    }

    /// Builds the seeded scheme for dimension `n` and sparsity `s`.
    pub fn build(n: usize, sparsity: usize, q: u32, slack: usize, seed: u64) -> Result<Self> {
        check_modulus(q)?;
        if sparsity == 0 || 2 * sparsity > n {
            return param(format!("sparsity s={sparsity} must satisfy 1 ≤ s ≤ n/2 (n={n})"));
        }
        let rows = recovery_rows(n, sparsity, q, slack);
        let matrix = SketchMatrix::random(seed, q, rows, n)?;
        Ok(Self::assemble(matrix, sparsity, slack))
    }

    /// Wraps an explicit matrix; the row-count formula is not enforced.
    pub fn from_matrix(matrix: SketchMatrix, sparsity: usize) -> Result<Self> {
        if sparsity == 0 || sparsity > matrix.cols() {
            return param(format!("sparsity {sparsity} out of range for {} columns", matrix.cols()));
        }
        Ok(Self::assemble(matrix, sparsity, 0))
    }

    pub fn with_work_limit(mut self, limit: u128) -> Self {
        self.work_limit = limit;
        self.plan = OnceLock::new();
        self
    }

    pub fn with_strategy(mut self, strategy: DecodeStrategy) -> Self {
        self.strategy = strategy;
        self.plan = OnceLock::new();
        self
    }

    pub fn matrix(&self) -> &SketchMatrix {
        &self.matrix
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn modulus(&self) -> u32 {
        self.matrix.modulus()
    }

    pub fn sketch(&self, w: &FieldVec) -> Result<FieldVec> {
        self.matrix.apply(w)
    }

    /// The strategy `exhaustive_decode` will run, and its worst-case number
    /// of visited candidates.
    pub fn plan(&self) -> (DecodeStrategy, u128) {
        *self.plan.get_or_init(|| self.make_plan())
    }

    fn make_plan(&self) -> (DecodeStrategy, u128) {
        let n = self.dim();
        let s = self.sparsity;
        let q = self.modulus();
        let enumerate = search::enumerate_cost(n, s, q);
        let mitm = search::mitm_cost(n, s, q);
        match self.strategy {
            DecodeStrategy::Enumerate => (DecodeStrategy::Enumerate, enumerate),
            DecodeStrategy::MeetInMiddle => (DecodeStrategy::MeetInMiddle, mitm),
            DecodeStrategy::Coset => (DecodeStrategy::Coset, self.coset_cost()),
            DecodeStrategy::Auto => {
                let mut best = if mitm < enumerate {
                    (DecodeStrategy::MeetInMiddle, mitm)
                } else {
                    (DecodeStrategy::Enumerate, enumerate)
                };
                // elimination is only worth running when even the optimistic
                // (full-rank) coset size beats the alternatives
                let optimistic = search::coset_cost_for_nullity(
                    n,
                    self.rows(),
                    n.saturating_sub(self.rows()),
                    q,
                );
                if optimistic < best.1 {
                    let exact = self.coset_cost();
                    if exact < best.1 {
                        best = (DecodeStrategy::Coset, exact);
                    }
                }
                best
            }
        }
    }

    fn coset_cost(&self) -> u128 {
        let elim = self.elimination();
        search::coset_cost_for_nullity(self.dim(), self.rows(), elim.nullity(), self.modulus())
    }

    fn elimination(&self) -> &search::Elimination {
        self.coset.get_or_init(|| search::Elimination::new(&self.matrix))
    }

    fn mitm_table(&self) -> &search::MitmTable {
        self.mitm.get_or_init(|| search::MitmTable::new(&self.matrix, self.sparsity.div_ceil(2)))
    }

    fn check_budget(&self, required: u128) -> Result<()> {
        if required > self.work_limit {
            return Err(Error::Refused { required, limit: self.work_limit });
        }
        Ok(())
    }

    /// First `w` in enumeration order with `‖w‖₀ ≤ s` and `Πw = sketch`, or
    /// `None` when no such vector exists.
    pub fn exhaustive_decode(&self, sketch: &FieldVec) -> Result<Option<FieldVec>> {
        if sketch.len() != self.rows() || sketch.modulus() != self.modulus() {
            return param(format!(
                "sketch of length {} over GF({}) does not match {} rows over GF({})",
                sketch.len(),
                sketch.modulus(),
                self.rows(),
                self.modulus()
            ));
        }
        let (strategy, cost) = self.plan();
        self.check_budget(cost)?;
        let found = match strategy {
            DecodeStrategy::Enumerate => search::enumerate_first(&self.matrix, self.sparsity, sketch),
            DecodeStrategy::MeetInMiddle => {
                self.mitm_table().first_preimage(&self.matrix, self.sparsity, sketch)
            }
            DecodeStrategy::Coset => {
                self.elimination().first_preimage(&self.matrix, self.sparsity, sketch)
            }
            DecodeStrategy::Auto => unreachable!("plan resolves Auto"),
        };
        Ok(found.map(|sp| self.densify(&sp)))
    }

    fn densify(&self, sp: &Sparse) -> FieldVec {
        let mut w = FieldVec::zeros(self.modulus(), self.dim());
        for (&i, &v) in sp.idx.iter().zip(&sp.val) {
            w.set(i, v);
        }
        w
    }

    /// True iff no nonzero vector of weight `≤ 2s` lies in the kernel.
    pub fn verify_injectivity(&self) -> Result<bool> {
        Ok(self.find_collision()?.is_none())
    }

    /// Two distinct `s`-sparse vectors with the same sketch, if any exist.
    ///
    /// Every `2s`-sparse kernel vector splits into a difference of two
    /// `s`-sparse vectors with disjoint supports, so searching for sketch
    /// collisions among `s`-sparse vectors decides kernel emptiness.
    pub fn find_collision(&self) -> Result<Option<(FieldVec, FieldVec)>> {
        let required = search::enumerate_cost(self.dim(), self.sparsity, self.modulus());
        self.check_budget(required)?;
        Ok(search::find_collision(&self.matrix, self.sparsity)
            .map(|(a, b)| (self.densify(&a), self.densify(&b))))
    }
}

/// Builds the seeded recovery scheme; see [`RecoveryScheme::build`].
pub fn build_scheme(n: usize, s: usize, q: u32, slack: usize, seed: u64) -> Result<RecoveryScheme> {
    RecoveryScheme::build(n, s, q, slack, seed)
}
