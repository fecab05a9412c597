use super::TurnstileSketch;
use crate::error::{format, param, Result};
use crate::prf::SharedRandomness;
use crate::protocol::{check_dim, support_of, BobOutput, ProtocolHandle, UrProtocol};
use rand::seq::index::sample;
use std::sync::Arc;

/// A streaming algorithm that reports an item seen at least twice.
pub trait FindDup: Send + Sync {
    type State;

    fn universe(&self) -> usize;
    fn start(&self) -> Self::State;
    fn push(&self, state: &mut Self::State, item: usize) -> Result<()>;
    fn duplicate(&self, state: &Self::State) -> Result<Option<usize>>;
    fn save(&self, state: &Self::State) -> Vec<u8>;
    fn load(&self, bytes: &[u8]) -> Result<Self::State>;
}

/// A strict-turnstile algorithm reporting `min(k, ‖z‖₀)` support indices.
pub trait SuppFind: Send + Sync {
    type State;

    fn dim(&self) -> usize;
    fn k(&self) -> usize;
    fn start(&self) -> Self::State;
    fn update(&self, state: &mut Self::State, i: usize, delta: i64) -> Result<()>;
    fn query(&self, state: &Self::State) -> Result<BobOutput>;
    fn save(&self, state: &Self::State) -> Vec<u8>;
    fn load(&self, bytes: &[u8]) -> Result<Self::State>;
}

/// A strict-turnstile ℓ0-sampler returning `min(k, ‖z‖₀)` support indices.
pub trait Sampler: Send + Sync {
    type State;

    fn dim(&self) -> usize;
    fn k(&self) -> usize;
    fn start(&self) -> Self::State;
    fn update(&self, state: &mut Self::State, i: usize, delta: i64) -> Result<()>;
    fn sample(&self, state: &Self::State, sample_seed: u64) -> Result<BobOutput>;
    fn save(&self, state: &Self::State) -> Vec<u8>;
    fn load(&self, bytes: &[u8]) -> Result<Self::State>;
}

fn counts_to_bytes(counts: &[i64]) -> Vec<u8> {
    counts.iter().flat_map(|c| c.to_le_bytes()).collect()
}

fn counts_from_bytes(bytes: &[u8], n: usize) -> Result<Vec<i64>> {
    if bytes.len() != 8 * n {
        return format(format!("expected {} state bytes, got {}", 8 * n, bytes.len()));
    }
    Ok(bytes.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return param(format!("index {i} out of range for dimension {n}"));
    }
    Ok(())
}

/// Exact duplicate finding with a full count table.
#[derive(Debug, Clone, Copy)]
pub struct ExactFindDup {
    pub n: usize,
}

impl FindDup for ExactFindDup {
    type State = Vec<i64>;

    fn universe(&self) -> usize {
        self.n
    }
    fn start(&self) -> Vec<i64> {
        vec![0; self.n]
    }
    fn push(&self, state: &mut Vec<i64>, item: usize) -> Result<()> {
        check_index(item, self.n)?;
        state[item] += 1;
        Ok(())
    }
    fn duplicate(&self, state: &Vec<i64>) -> Result<Option<usize>> {
        Ok(state.iter().position(|&c| c >= 2))
    }
    fn save(&self, state: &Vec<i64>) -> Vec<u8> {
        counts_to_bytes(state)
    }
    fn load(&self, bytes: &[u8]) -> Result<Vec<i64>> {
        counts_from_bytes(bytes, self.n)
    }
}

/// Exact support finding with a full count table; reports the smallest
/// support indices.
#[derive(Debug, Clone, Copy)]
pub struct ExactSuppFind {
    pub n: usize,
    pub k: usize,
}

impl SuppFind for ExactSuppFind {
    type State = Vec<i64>;

    fn dim(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn start(&self) -> Vec<i64> {
        vec![0; self.n]
    }
    fn update(&self, state: &mut Vec<i64>, i: usize, delta: i64) -> Result<()> {
        check_index(i, self.n)?;
        state[i] += delta;
        Ok(())
    }
    fn query(&self, state: &Vec<i64>) -> Result<BobOutput> {
        Ok(BobOutput::Indices((0..self.n).filter(|&i| state[i] != 0).take(self.k).collect()))
    }
    fn save(&self, state: &Vec<i64>) -> Vec<u8> {
        counts_to_bytes(state)
    }
    fn load(&self, bytes: &[u8]) -> Result<Vec<i64>> {
        counts_from_bytes(bytes, self.n)
    }
}

/// Exact uniform sampling without replacement from a full count table.
#[derive(Debug, Clone, Copy)]
pub struct ExactSampler {
    pub n: usize,
    pub k: usize,
}

impl Sampler for ExactSampler {
    type State = Vec<i64>;

    fn dim(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn start(&self) -> Vec<i64> {
        vec![0; self.n]
    }
    fn update(&self, state: &mut Vec<i64>, i: usize, delta: i64) -> Result<()> {
        check_index(i, self.n)?;
        state[i] += delta;
        Ok(())
    }
    fn sample(&self, state: &Vec<i64>, sample_seed: u64) -> Result<BobOutput> {
        let support: Vec<usize> = (0..self.n).filter(|&i| state[i] != 0).collect();
        let mut rng = SharedRandomness::new(sample_seed).rng("l0-sample", &[]);
        let take = self.k.min(support.len());
        let mut out: Vec<usize> = sample(&mut rng, support.len(), take).into_iter().map(|t| support[t]).collect();
        out.sort_unstable();
        Ok(BobOutput::Indices(out))
    }
    fn save(&self, state: &Vec<i64>) -> Vec<u8> {
        counts_to_bytes(state)
    }
    fn load(&self, bytes: &[u8]) -> Result<Vec<i64>> {
        counts_from_bytes(bytes, self.n)
    }
}

/// Support finding backed by [`TurnstileSketch`].
#[derive(Debug, Clone)]
pub struct TurnstileSupportFind {
    protocol: Arc<UrProtocol>,
}

impl TurnstileSupportFind {
    pub fn new(protocol: Arc<UrProtocol>) -> Self {
        Self { protocol }
    }
}

impl SuppFind for TurnstileSupportFind {
    type State = TurnstileSketch;

    fn dim(&self) -> usize {
        self.protocol.params().n
    }
    fn k(&self) -> usize {
        self.protocol.params().k
    }
    fn start(&self) -> TurnstileSketch {
        TurnstileSketch::with_protocol(self.protocol.clone())
    }
    fn update(&self, state: &mut TurnstileSketch, i: usize, delta: i64) -> Result<()> {
        state.update(i, delta)
    }
    fn query(&self, state: &TurnstileSketch) -> Result<BobOutput> {
        state.support_find_k()
    }
    fn save(&self, state: &TurnstileSketch) -> Vec<u8> {
        state.to_bytes()
    }
    fn load(&self, bytes: &[u8]) -> Result<TurnstileSketch> {
        TurnstileSketch::from_state(self.protocol.clone(), bytes)
    }
}

/// ℓ0-sampling backed by [`TurnstileSketch`].
#[derive(Debug, Clone)]
pub struct TurnstileSampler {
    protocol: Arc<UrProtocol>,
}

impl TurnstileSampler {
    pub fn new(protocol: Arc<UrProtocol>) -> Self {
        Self { protocol }
    }
}

impl Sampler for TurnstileSampler {
    type State = TurnstileSketch;

    fn dim(&self) -> usize {
        self.protocol.params().n
    }
    fn k(&self) -> usize {
        self.protocol.params().k
    }
    fn start(&self) -> TurnstileSketch {
        TurnstileSketch::with_protocol(self.protocol.clone())
    }
    fn update(&self, state: &mut TurnstileSketch, i: usize, delta: i64) -> Result<()> {
        state.update(i, delta)
    }
    fn sample(&self, state: &TurnstileSketch, sample_seed: u64) -> Result<BobOutput> {
        state.l0_sample_k(sample_seed)
    }
    fn save(&self, state: &TurnstileSketch) -> Vec<u8> {
        state.to_bytes()
    }
    fn load(&self, bytes: &[u8]) -> Result<TurnstileSketch> {
        TurnstileSketch::from_state(self.protocol.clone(), bytes)
    }
}

/// UR⊂ from duplicate finding: Alice streams `support(x)`, Bob continues
/// with `n + 1 − ‖x‖₀` items outside `support(y)`, smallest first.
///
/// Alice's message is `‖x‖₀` as a little-endian `u64` followed by the
/// algorithm's saved state, since Bob needs the count to size his part.
#[derive(Debug, Clone)]
pub struct FindDupProtocol<A> {
    alg: A,
}

pub fn ur_from_findup<A: FindDup>(alg: A) -> FindDupProtocol<A> {
    FindDupProtocol { alg }
}

impl<A: FindDup> ProtocolHandle for FindDupProtocol<A> {
    fn dim(&self) -> usize {
        self.alg.universe()
    }

    fn k(&self) -> usize {
        1
    }

    fn alice(&self, x: &[bool]) -> Result<Vec<u8>> {
        check_dim(x, self.dim(), "Alice's input")?;
        let mut st = self.alg.start();
        let support = support_of(x);
        for &i in &support {
            self.alg.push(&mut st, i)?;
        }
        let mut out = (support.len() as u64).to_le_bytes().to_vec();
        out.extend(self.alg.save(&st));
        Ok(out)
    }

    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput> {
        let n = self.dim();
        check_dim(y, n, "Bob's input")?;
        if message.len() < 8 {
            return format("message too short");
        }
        let weight = u64::from_le_bytes(message[..8].try_into().expect("8 bytes"));
        let weight = usize::try_from(weight).ok().filter(|&w| w <= n)
            .ok_or_else(|| crate::Error::Format(format!("input weight {weight} exceeds n = {n}")))?;
        let need = n + 1 - weight;
        let fillers: Vec<usize> = (0..n).filter(|&i| !y[i]).take(need).collect();
        if fillers.len() < need {
            return param(format!(
                "need {need} items outside support(y) but only {} exist; requires support(y) ⊊ support(x)",
                fillers.len()
            ));
        }
        let mut st = self.alg.load(&message[8..])?;
        for i in fillers {
            self.alg.push(&mut st, i)?;
        }
        Ok(match self.alg.duplicate(&st)? {
            Some(i) => BobOutput::Indices(vec![i]),
            None => BobOutput::Fail,
        })
    }
}

/// UR⊂_k from support finding: Alice inserts `support(x)`, Bob deletes
/// `support(y)` and queries, leaving `z = 1_{x ≠ y}`.
#[derive(Debug, Clone)]
pub struct SuppFindProtocol<A> {
    alg: A,
}

pub fn ur_k_from_suppfind<A: SuppFind>(alg: A) -> SuppFindProtocol<A> {
    SuppFindProtocol { alg }
}

impl<A: SuppFind> ProtocolHandle for SuppFindProtocol<A> {
    fn dim(&self) -> usize {
        self.alg.dim()
    }

    fn k(&self) -> usize {
        self.alg.k()
    }

    fn alice(&self, x: &[bool]) -> Result<Vec<u8>> {
        check_dim(x, self.dim(), "Alice's input")?;
        let mut st = self.alg.start();
        for i in support_of(x) {
            self.alg.update(&mut st, i, 1)?;
        }
        Ok(self.alg.save(&st))
    }

    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput> {
        check_dim(y, self.dim(), "Bob's input")?;
        let mut st = self.alg.load(message)?;
        for i in support_of(y) {
            self.alg.update(&mut st, i, -1)?;
        }
        self.alg.query(&st)
    }
}

/// Support finding from a sampler: the sample is a valid answer.
#[derive(Debug, Clone)]
pub struct SamplerSuppFind<A> {
    alg: A,
    sample_seed: u64,
}

pub fn suppfind_from_sampler<A: Sampler>(alg: A, sample_seed: u64) -> SamplerSuppFind<A> {
    SamplerSuppFind { alg, sample_seed }
}

impl<A: Sampler> SuppFind for SamplerSuppFind<A> {
    type State = A::State;

    fn dim(&self) -> usize {
        self.alg.dim()
    }
    fn k(&self) -> usize {
        self.alg.k()
    }
    fn start(&self) -> A::State {
        self.alg.start()
    }
    fn update(&self, state: &mut A::State, i: usize, delta: i64) -> Result<()> {
        self.alg.update(state, i, delta)
    }
    fn query(&self, state: &A::State) -> Result<BobOutput> {
        self.alg.sample(state, self.sample_seed)
    }
    fn save(&self, state: &A::State) -> Vec<u8> {
        self.alg.save(state)
    }
    fn load(&self, bytes: &[u8]) -> Result<A::State> {
        self.alg.load(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{indicator, is_correct, ProtocolParams};

    #[test]
    fn findup_all_ones_minus_one() {
        let n = 10;
        let p = ur_from_findup(ExactFindDup { n });
        let x = vec![true; n];
        let y = indicator(n, (0..n).filter(|&i| i != 6)).unwrap();
        assert_eq!(p.bob(&p.alice(&x).unwrap(), &y).unwrap(), BobOutput::Indices(vec![6]));
    }

    #[test]
    fn findup_requires_strict_subset() {
        let n = 6;
        let p = ur_from_findup(ExactFindDup { n });
        let x = indicator(n, [1, 2]).unwrap();
        assert!(p.bob(&p.alice(&x).unwrap(), &x).is_err());
    }

    #[test]
    fn suppfind_single_removal() {
        let n = 20;
        let p = ur_k_from_suppfind(ExactSuppFind { n, k: 1 });
        let x = indicator(n, [2, 9, 14]).unwrap();
        let y = indicator(n, [2, 14]).unwrap();
        assert_eq!(p.bob(&p.alice(&x).unwrap(), &y).unwrap(), BobOutput::Indices(vec![9]));
    }

    #[test]
    fn sampler_wrappers() {
        let n = 30;
        let s = suppfind_from_sampler(ExactSampler { n, k: 3 }, 4);
        let mut st = s.start();
        for i in [3, 8, 11, 20, 25] {
            s.update(&mut st, i, 1).unwrap();
        }
        let out = s.query(&st).unwrap();
        assert_eq!(out.indices().unwrap().len(), 3);
        assert!(out.indices().unwrap().iter().all(|i| [3, 8, 11, 20, 25].contains(i)));

        let proto = Arc::new(UrProtocol::new(ProtocolParams::new(32, 1).with_oversample(4).with_seed(5)).unwrap());
        let wrapped = ur_k_from_suppfind(suppfind_from_sampler(TurnstileSampler::new(proto), 1));
        let x = indicator(32, [4, 6]).unwrap();
        let y = indicator(32, [4]).unwrap();
        let out = wrapped.bob(&wrapped.alice(&x).unwrap(), &y).unwrap();
        assert!(is_correct(&out, &x, &y, 1), "{out:?}");
    }

    #[test]
    fn turnstile_adapter_matches_direct() {
        let proto = Arc::new(UrProtocol::new(ProtocolParams::new(64, 1).with_oversample(4).with_seed(12)).unwrap());
        let via = ur_k_from_suppfind(TurnstileSupportFind::new(proto.clone()));
        let x = indicator(64, [1, 7, 30, 33, 60]).unwrap();
        let y = indicator(64, [7, 33]).unwrap();
        let m1 = via.alice(&x).unwrap();
        let m2 = ProtocolHandle::alice(&*proto, &x).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(via.bob(&m1, &y).unwrap(), ProtocolHandle::bob(&*proto, &m2, &y).unwrap());
    }
}
