//! Peeling sparse recovery over integer counts.

use crate::error::{format, param, Result};
use crate::prf::SharedRandomness;

const MERSENNE_61: u64 = (1 << 61) - 1;

/// Cells touched by each index.
pub const DEFAULT_BUCKET_HASHES: usize = 4;

#[inline]
fn mul_p(a: u64, b: u64) -> u64 {
    let prod = u128::from(a) * u128::from(b);
    let lo = (prod as u64) & MERSENNE_61;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
fn add_p(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

fn pow_p(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_p(acc, base);
        }
        base = mul_p(base, base);
        exp >>= 1;
    }
    acc
}

fn signed_p(c: i64) -> u64 {
    let m = c.unsigned_abs() % MERSENNE_61;
    if c < 0 && m != 0 {
        MERSENNE_61 - m
    } else {
        m
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Cell {
    count: i64,
    index_sum: i128,
    fingerprint: u64,
}

impl Cell {
    fn is_empty(&self) -> bool {
        self.count == 0 && self.index_sum == 0 && self.fingerprint == 0
    }
}

/// Result of [`BucketRecovery::decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BucketDecode {
    /// `(index, signed count)` pairs sorted by index.
    Recovered(Vec<(usize, i64)>),
    Undecodable,
}

/// Linear sketch of an integer vector: each index is added to
/// [`DEFAULT_BUCKET_HASHES`] distinct cells, each cell keeping the item
/// count, the index-weighted sum and a polynomial fingerprint over the
/// Mersenne prime `2^61 - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketRecovery {
    n: usize,
    hashes: usize,
    seed: u64,
    fp_base: u64,
    cells: Vec<Cell>,
}

impl BucketRecovery {
    pub fn new(n: usize, buckets: usize, seed: u64) -> Result<Self> {
        Self::with_hashes(n, buckets, DEFAULT_BUCKET_HASHES, seed)
    }

    pub fn with_hashes(n: usize, buckets: usize, hashes: usize, seed: u64) -> Result<Self> {
        if hashes == 0 || buckets < hashes {
            return param(format!("need buckets ≥ hashes ≥ 1 (buckets={buckets}, hashes={hashes})"));
        }
        if n == 0 {
            return param("dimension must be positive");
        }
        let prf = SharedRandomness::new(seed);
        let fp_base = 2 + prf.below("bucket-fp", &[], MERSENNE_61 - 3);
        Ok(Self { n, hashes, seed, fp_base, cells: vec![Cell::default(); buckets] })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn buckets(&self) -> usize {
        self.cells.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn positions(&self, i: usize) -> Vec<usize> {
        let prf = SharedRandomness::new(self.seed);
        let mut out = Vec::with_capacity(self.hashes);
        let mut attempt = 0u64;
        while out.len() < self.hashes {
            let p = prf.below("bucket-cell", &[i as u64, attempt], self.cells.len() as u64) as usize;
            if !out.contains(&p) {
                out.push(p);
            }
            attempt += 1;
        }
        out
    }

    fn fingerprint_of(&self, i: usize) -> u64 {
        pow_p(self.fp_base, i as u64 + 1)
    }

    fn apply(&mut self, i: usize, delta: i64, fp: u64) {
        let fp_delta = mul_p(signed_p(delta), fp);
        for p in self.positions(i) {
            let c = &mut self.cells[p];
            c.count += delta;
            c.index_sum += i128::from(delta) * i as i128;
            c.fingerprint = add_p(c.fingerprint, fp_delta);
        }
    }

    /// `x_i += delta`.
    pub fn update(&mut self, i: usize, delta: i64) -> Result<()> {
        if i >= self.n {
            return param(format!("index {i} out of range for dimension {}", self.n));
        }
        if delta != 0 {
            let fp = self.fingerprint_of(i);
            self.apply(i, delta, fp);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.hashes != other.hashes || self.seed != other.seed
            || self.cells.len() != other.cells.len()
        {
            return param("bucket structures built with different parameters");
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.count += b.count;
            a.index_sum += b.index_sum;
            a.fingerprint = add_p(a.fingerprint, b.fingerprint);
        }
        Ok(())
    }

    pub fn subtract(&mut self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.count -= b.count;
            a.index_sum -= b.index_sum;
            a.fingerprint = add_p(a.fingerprint, MERSENNE_61 - b.fingerprint);
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Cell::is_empty)
    }

    /// The index held by a cell if it holds exactly one distinct index.
    fn pure_index(&self, p: usize, cells: &[Cell]) -> Option<usize> {
        let c = cells[p];
        if c.count == 0 || c.index_sum % i128::from(c.count) != 0 {
            return None;
        }
        let i = c.index_sum / i128::from(c.count);
        if i < 0 || i >= self.n as i128 {
            return None;
        }
        let i = i as usize;
        let expect = mul_p(signed_p(c.count), self.fingerprint_of(i));
        (expect == c.fingerprint && self.positions(i).contains(&p)).then_some(i)
    }

    /// Peels pure cells to a fixpoint.
    pub fn decode(&self) -> BucketDecode {
        let mut work = self.clone();
        let mut out = Vec::new();
        let mut queue: Vec<usize> = (0..work.cells.len()).collect();
        while let Some(p) = queue.pop() {
            let Some(i) = self.pure_index(p, &work.cells) else { continue };
            let count = work.cells[p].count;
            let fp = self.fingerprint_of(i);
            work.apply(i, -count, fp);
            out.push((i, count));
            queue.extend(self.positions(i));
        }
        if !work.is_empty() {
            return BucketDecode::Undecodable;
        }
        out.sort_unstable();
        // the same index can peel twice if a false-pure cell slipped through
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(out.len());
        for (i, c) in out {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        BucketDecode::Recovered(merged)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.cells.len() * 32);
        for c in &self.cells {
            out.extend_from_slice(&c.count.to_le_bytes());
            out.extend_from_slice(&c.index_sum.to_le_bytes());
            out.extend_from_slice(&c.fingerprint.to_le_bytes());
        }
        out
    }

    /// Restores cell contents written by [`Self::to_bytes`] into a
    /// structure with matching parameters.
    pub fn load_cells(&mut self, bytes: &[u8]) -> Result<()> {
        if bytes.len() != self.cells.len() * 32 {
            return format(format!("expected {} cell bytes, got {}", self.cells.len() * 32, bytes.len()));
        }
        for (c, chunk) in self.cells.iter_mut().zip(bytes.chunks_exact(32)) {
            c.count = i64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
            c.index_sum = i128::from_le_bytes(chunk[8..24].try_into().expect("16 bytes"));
            c.fingerprint = u64::from_le_bytes(chunk[24..].try_into().expect("8 bytes"));
            if c.fingerprint >= MERSENNE_61 {
                return format("fingerprint outside the prime field");
            }
        }
        Ok(())
    }
}

/// Decodes a bucket structure; see [`BucketRecovery::decode`].
pub fn bucket_decode(b: &BucketRecovery) -> BucketDecode {
    b.decode()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn empty_and_single() {
        let b = BucketRecovery::new(100, 12, 1).unwrap();
        assert_eq!(bucket_decode(&b), BucketDecode::Recovered(vec![]));
        let mut b = b;
        b.update(5, 1).unwrap();
        assert_eq!(bucket_decode(&b), BucketDecode::Recovered(vec![(5, 1)]));
        assert!(b.update(100, 1).is_err());
    }

    #[test]
    fn twenty_updates_in_sixty_buckets() {
        let mut ok = 0;
        for seed in 0..1000u64 {
            let prf = SharedRandomness::new(seed);
            let mut truth = BTreeMap::new();
            let mut b = BucketRecovery::new(1 << 20, 60, seed).unwrap();
            let mut t = 0u64;
            while truth.len() < 20 {
                let i = prf.below("idx", &[t], 1 << 20) as usize;
                let d = if prf.word("sign", &[t]) & 1 == 0 { 1 } else { -1 };
                t += 1;
                if truth.contains_key(&i) {
                    continue;
                }
                truth.insert(i, d);
                b.update(i, d).unwrap();
            }
            if bucket_decode(&b) == BucketDecode::Recovered(truth.into_iter().collect()) {
                ok += 1;
            }
        }
        assert!(ok >= 990, "recovered {ok}/1000");
    }

    #[test]
    fn overloaded_is_undecodable_not_wrong() {
        let mut b = BucketRecovery::new(1000, 8, 3).unwrap();
        for i in 0..200 {
            b.update(i, 1).unwrap();
        }
        assert_eq!(b.decode(), BucketDecode::Undecodable);
    }

    #[test]
    fn linear_in_streams() {
        let mut a = BucketRecovery::new(500, 30, 9).unwrap();
        let mut b = BucketRecovery::new(500, 30, 9).unwrap();
        let mut both = BucketRecovery::new(500, 30, 9).unwrap();
        for (i, d) in [(3, 2), (40, -1), (77, 1)] {
            a.update(i, d).unwrap();
            both.update(i, d).unwrap();
        }
        for (i, d) in [(40, 1), (9, 5)] {
            b.update(i, d).unwrap();
            both.update(i, d).unwrap();
        }
        let mut merged = a.clone();
        merged.merge(&b).unwrap();
        assert_eq!(merged, both);
        assert_eq!(merged.decode(), BucketDecode::Recovered(vec![(3, 2), (9, 5), (77, 1)]));
        merged.subtract(&b).unwrap();
        assert_eq!(merged, a);
        assert!(a.merge(&BucketRecovery::new(500, 31, 9).unwrap()).is_err());
    }

    #[test]
    fn byte_roundtrip() {
        let mut a = BucketRecovery::new(64, 12, 2).unwrap();
        a.update(7, -3).unwrap();
        let bytes = a.to_bytes();
        let mut b = BucketRecovery::new(64, 12, 2).unwrap();
        b.load_cells(&bytes).unwrap();
        assert_eq!(a, b);
        assert!(b.load_cells(&bytes[1..]).is_err());
    }
}
