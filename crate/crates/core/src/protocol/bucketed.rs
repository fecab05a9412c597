use super::{check_dim, BobOutput, ProtocolHandle, ProtocolParams};
use crate::error::{format, param, Result};
use crate::levels::LevelFamily;
use crate::prf::SharedRandomness;
use crate::sparse_recovery::{BucketDecode, BucketRecovery};

pub const BUCKET_MAGIC: &[u8; 4] = b"URB1";
const HEADER: usize = 4 + 5 * 8;
const CELL_BYTES: usize = 32;

/// The same level descent as [`super::UrProtocol`], with a peeling
/// bucket structure in place of the exhaustive GF(q) decoder at each level.
/// Scales to sparsities where exhaustive search does not.
#[derive(Debug, Clone)]
pub struct BucketProtocol {
    params: ProtocolParams,
    buckets: usize,
    hash_seed: u64,
    levels: LevelFamily,
}

impl BucketProtocol {
    /// Three cells per unit of recovery sparsity.
    pub fn new(params: ProtocolParams) -> Result<Self> {
        let buckets = 3 * params.sparsity().max(4);
        Self::with_buckets(params, buckets)
    }

    pub fn with_buckets(params: ProtocolParams, buckets: usize) -> Result<Self> {
        if params.k == 0 || 2 * params.k > params.n {
            return param(format!("need 1 ≤ k ≤ n/2 (n={}, k={})", params.n, params.k));
        }
        let prf = SharedRandomness::new(params.seed);
        let levels = LevelFamily::for_protocol(prf.word("protocol-levels", &[]), params.n, params.k)?;
        let hash_seed = prf.word("protocol-buckets", &[]);
        BucketRecovery::new(params.n, buckets, hash_seed)?;
        Ok(Self { params, buckets, hash_seed, levels })
    }

    pub fn buckets(&self) -> usize {
        self.buckets
    }

    pub fn levels(&self) -> &LevelFamily {
        &self.levels
    }

    fn empty(&self) -> Vec<BucketRecovery> {
        (0..=self.levels.max_level())
            .map(|_| BucketRecovery::new(self.params.n, self.buckets, self.hash_seed).expect("validated"))
            .collect()
    }

    fn add(&self, levels: &mut [BucketRecovery], v: &[bool], delta: i64) -> Result<()> {
        for (i, _) in v.iter().enumerate().filter(|(_, &b)| b) {
            for b in &mut levels[..=self.levels.depth(i) as usize] {
                b.update(i, delta)?;
            }
        }
        Ok(())
    }

    fn encode(&self, levels: &[BucketRecovery]) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER + levels.len() * self.buckets * CELL_BYTES);
        out.extend_from_slice(BUCKET_MAGIC);
        for f in [
            self.params.n as u64,
            self.params.k as u64,
            u64::from(self.levels.max_level()),
            self.buckets as u64,
            self.params.seed,
        ] {
            out.extend_from_slice(&f.to_le_bytes());
        }
        for b in levels {
            out.extend_from_slice(&b.to_bytes());
        }
        out
    }

    fn decode_message(&self, bytes: &[u8]) -> Result<Vec<BucketRecovery>> {
        if bytes.len() < HEADER || &bytes[..4] != BUCKET_MAGIC {
            return format("not a bucket protocol message");
        }
        let field = |t: usize| u64::from_le_bytes(bytes[4 + 8 * t..12 + 8 * t].try_into().expect("8 bytes"));
        if field(0) != self.params.n as u64
            || field(1) != self.params.k as u64
            || field(2) != u64::from(self.levels.max_level())
            || field(3) != self.buckets as u64
            || field(4) != self.params.seed
        {
            return param("message was produced under different protocol parameters");
        }
        let mut levels = self.empty();
        let body = &bytes[HEADER..];
        let per = self.buckets * CELL_BYTES;
        if body.len() != per * levels.len() {
            return format(format!("expected {} cell bytes, got {}", per * levels.len(), body.len()));
        }
        for (b, chunk) in levels.iter_mut().zip(body.chunks_exact(per)) {
            b.load_cells(chunk)?;
        }
        Ok(levels)
    }
}

impl ProtocolHandle for BucketProtocol {
    fn dim(&self) -> usize {
        self.params.n
    }

    fn k(&self) -> usize {
        self.params.k
    }

    fn alice(&self, x: &[bool]) -> Result<Vec<u8>> {
        check_dim(x, self.params.n, "Alice's input")?;
        let mut levels = self.empty();
        self.add(&mut levels, x, 1)?;
        Ok(self.encode(&levels))
    }

    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput> {
        check_dim(y, self.params.n, "Bob's input")?;
        let mut levels = self.decode_message(message)?;
        self.add(&mut levels, y, -1)?;
        let k = self.params.k;
        for j in (0..levels.len()).rev() {
            if let BucketDecode::Recovered(items) = levels[j].decode() {
                if items.len() >= k || j == 0 {
                    let mut idx: Vec<usize> = items.into_iter().map(|(i, _)| i).collect();
                    idx.truncate(k);
                    return Ok(BobOutput::Indices(idx));
                }
            }
        }
        Ok(BobOutput::Fail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{indicator, is_correct};

    #[test]
    fn promise_instances_mostly_correct() {
        let n = 1024;
        let mut ok = 0;
        for seed in 0..200u64 {
            let p = BucketProtocol::new(ProtocolParams::new(n, 4).with_oversample(4).with_seed(seed)).unwrap();
            let x = indicator(n, (0..n).filter(|i| (i * 7 + seed as usize).is_multiple_of(9))).unwrap();
            let y = indicator(n, (0..n).filter(|&i| x[i] && i % 2 == 0)).unwrap();
            let out = p.bob(&p.alice(&x).unwrap(), &y).unwrap();
            ok += usize::from(is_correct(&out, &x, &y, 4));
        }
        assert!(ok >= 190, "{ok}");
    }

    #[test]
    fn rejects_foreign_message() {
        let a = BucketProtocol::new(ProtocolParams::new(64, 1).with_seed(1)).unwrap();
        let b = BucketProtocol::new(ProtocolParams::new(64, 1).with_seed(2)).unwrap();
        let m = a.alice(&[false; 64]).unwrap();
        assert!(b.bob(&m, &[false; 64]).is_err());
        assert!(a.bob(&m[..m.len() - 1], &[false; 64]).is_err());
    }
}
