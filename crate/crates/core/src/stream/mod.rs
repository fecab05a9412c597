//! Strict-turnstile support finding and ℓ0-sampling on top of the level
//! sketches, plus the reductions from one-way protocols.

mod reductions;

pub use reductions::{
    suppfind_from_sampler, ur_from_findup, ur_k_from_suppfind, ExactFindDup, ExactSampler,
    ExactSuppFind, FindDup, FindDupProtocol, Sampler, SamplerSuppFind, SuppFind,
    SuppFindProtocol, TurnstileSampler, TurnstileSupportFind,
};

use crate::error::{param, Result};
use crate::gfq::signed_mod;
use crate::protocol::{BobOutput, ProtocolParams, UrMessage, UrProtocol};
use crate::prf::SharedRandomness;
use rand::seq::index::sample;
use std::io::BufRead;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamUpdate {
    pub index: usize,
    pub delta: i64,
}

/// Level sketches of the running aggregate `z`, kept linear so that the
/// state always equals Alice's message for `z mod q`.
///
/// Entries must stay within `±(q−1)/2`; pick `q` with
/// [`crate::gfq::modulus_for_entries`].
#[derive(Debug, Clone)]
pub struct TurnstileSketch {
    protocol: Arc<UrProtocol>,
    state: UrMessage,
    updates: u64,
}

impl TurnstileSketch {
    pub fn new(params: ProtocolParams) -> Result<Self> {
        Ok(Self::with_protocol(Arc::new(UrProtocol::new(params)?)))
    }

    /// An empty sketch sharing an already built protocol.
    pub fn with_protocol(protocol: Arc<UrProtocol>) -> Self {
        let state = protocol.empty_message();
        Self { protocol, state, updates: 0 }
    }

    /// Restores a sketch from serialized state.
    pub fn from_state(protocol: Arc<UrProtocol>, bytes: &[u8]) -> Result<Self> {
        let state = UrMessage::deserialize(bytes)?;
        protocol.check_message(&state)?;
        Ok(Self { protocol, state, updates: 0 })
    }

    pub fn protocol(&self) -> &Arc<UrProtocol> {
        &self.protocol
    }

    pub fn params(&self) -> &ProtocolParams {
        self.protocol.params()
    }

    pub fn state(&self) -> &UrMessage {
        &self.state
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.state.serialize()
    }

    /// Updates applied since construction or restore.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// `z_i += delta`.
    pub fn update(&mut self, i: usize, delta: i64) -> Result<()> {
        let n = self.params().n;
        if i >= n {
            return param(format!("index {i} out of range for dimension {n}"));
        }
        let c = signed_mod(delta, self.params().q);
        if c != 0 {
            self.protocol.add_to_levels(self.state.sketches_mut(), i, c);
        }
        self.updates += 1;
        Ok(())
    }

    pub fn apply(&mut self, u: StreamUpdate) -> Result<()> {
        self.update(u.index, u.delta)
    }

    /// Sketch of the concatenated streams.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.params() != other.params() {
            return param("cannot merge sketches with different parameters");
        }
        let mut out = self.clone();
        for (a, b) in out.state.sketches_mut().iter_mut().zip(other.state.sketches()) {
            a.add_assign(b)?;
        }
        out.updates += other.updates;
        Ok(out)
    }

    fn zero_input(&self) -> Vec<bool> {
        vec![false; self.params().n]
    }

    /// Up to `k` support indices (the smallest of the decoded level).
    pub fn support_find_k(&self) -> Result<BobOutput> {
        self.protocol.bob(&self.state, &self.zero_input())
    }

    /// Up to `k` indices drawn uniformly without replacement from the
    /// support decoded at the first usable level.
    pub fn l0_sample_k(&self, sample_seed: u64) -> Result<BobOutput> {
        let Some((_, w)) = self.protocol.recover(&self.state, &self.zero_input())? else {
            return Ok(BobOutput::Fail);
        };
        let support = w.support();
        let take = self.params().k.min(support.len());
        let mut rng = SharedRandomness::new(sample_seed).rng("l0-sample", &[]);
        let mut out: Vec<usize> = sample(&mut rng, support.len(), take).into_iter().map(|t| support[t]).collect();
        out.sort_unstable();
        Ok(BobOutput::Indices(out))
    }
}

/// One line of stream input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamCommand {
    Update(StreamUpdate),
    /// `query`: support finding.
    Query,
    /// `sample [seed]`: ℓ0-sampling.
    Sample(Option<u64>),
}

/// Parses `i Δ`, `i` (meaning `Δ = +1`), `query` and `sample [seed]`
/// lines. Blank lines and `#` comments are skipped.
pub fn parse_stream(input: impl BufRead) -> Result<Vec<StreamCommand>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| crate::Error::Format(e.to_string()))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || crate::Error::Format(format!("line {}: cannot parse {line:?}", lineno + 1));
        let mut words = line.split_whitespace();
        let first = words.next().ok_or_else(bad)?;
        let second = words.next();
        if words.next().is_some() {
            return Err(bad());
        }
        let cmd = match first {
            "query" if second.is_none() => StreamCommand::Query,
            "sample" => StreamCommand::Sample(match second {
                Some(s) => Some(s.parse().map_err(|_| bad())?),
                None => None,
            }),
            _ => {
                let index = first.parse().map_err(|_| bad())?;
                let delta = match second {
                    Some(d) => d.parse().map_err(|_| bad())?,
                    None => 1,
                };
                StreamCommand::Update(StreamUpdate { index, delta })
            }
        };
        out.push(cmd);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::indicator;
    use proptest::prelude::*;

    fn params(seed: u64) -> ProtocolParams {
        ProtocolParams::new(32, 1).with_oversample(4).with_seed(seed)
    }

    #[test]
    fn insert_then_delete_is_empty() {
        let mut s = TurnstileSketch::new(params(1)).unwrap();
        let empty = s.state().clone();
        s.update(4, 1).unwrap();
        s.update(4, -1).unwrap();
        assert_eq!(s.state(), &empty);
        assert!(s.update(32, 1).is_err());
    }

    #[test]
    fn matches_alice_on_sets() {
        let p = Arc::new(UrProtocol::new(params(8)).unwrap());
        let set = [0, 3, 17, 31];
        let mut s = TurnstileSketch::with_protocol(p.clone());
        for &i in &set {
            s.update(i, 1).unwrap();
        }
        let direct = p.alice(&indicator(32, set).unwrap()).unwrap();
        assert_eq!(s.to_bytes(), direct.serialize());
    }

    #[test]
    fn support_find_cases() {
        let mut ok = 0;
        for seed in 0..40 {
            let mut s = TurnstileSketch::new(params(seed)).unwrap();
            assert_eq!(s.support_find_k().unwrap(), BobOutput::Indices(vec![]));
            s.update(7, 1).unwrap();
            ok += usize::from(s.support_find_k().unwrap() == BobOutput::Indices(vec![7]));
        }
        assert!(ok >= 39);
        let mut s = TurnstileSketch::new(ProtocolParams::new(64, 4).with_oversample(2).with_seed(3)).unwrap();
        s.update(10, 1).unwrap();
        s.update(50, 1).unwrap();
        assert_eq!(s.support_find_k().unwrap(), BobOutput::Indices(vec![10, 50]));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let mut s = TurnstileSketch::new(params(2)).unwrap();
        s.update(9, 1).unwrap();
        assert_eq!(s.l0_sample_k(5).unwrap(), BobOutput::Indices(vec![9]));
        for i in [1, 2, 3] {
            s.update(i, 1).unwrap();
        }
        assert_eq!(s.l0_sample_k(77).unwrap(), s.l0_sample_k(77).unwrap());
    }

    #[test]
    fn signed_entries_with_larger_modulus() {
        let q = crate::gfq::modulus_for_entries(3);
        assert_eq!(q, 7);
        let p = ProtocolParams::new(64, 2).with_q(q).with_oversample(2).with_seed(4);
        let mut s = TurnstileSketch::new(p).unwrap();
        s.update(5, 3).unwrap();
        s.update(40, -2).unwrap();
        s.update(12, 2).unwrap();
        s.update(12, -2).unwrap();
        assert_eq!(s.support_find_k().unwrap(), BobOutput::Indices(vec![5, 40]));
    }

    #[test]
    fn merge_rules() {
        let mut a = TurnstileSketch::new(params(3)).unwrap();
        a.update(1, 1).unwrap();
        let empty = TurnstileSketch::new(params(3)).unwrap();
        assert_eq!(a.merge(&empty).unwrap().state(), a.state());
        let other = TurnstileSketch::new(params(4)).unwrap();
        assert!(a.merge(&other).is_err());
    }

    #[test]
    fn parse_lines() {
        let text = "3 1\n4\n# comment\n\n5 -1\nquery\nsample\nsample 9\n";
        let cmds = parse_stream(text.as_bytes()).unwrap();
        assert_eq!(cmds.len(), 6);
        assert_eq!(cmds[1], StreamCommand::Update(StreamUpdate { index: 4, delta: 1 }));
        assert_eq!(cmds[2], StreamCommand::Update(StreamUpdate { index: 5, delta: -1 }));
        assert_eq!(cmds[5], StreamCommand::Sample(Some(9)));
        assert!(parse_stream("x 1\n".as_bytes()).is_err());
        assert!(parse_stream("1 2 3\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn order_and_merge(seed in 0u64..1000,
                           a in prop::collection::vec((0usize..32, -1i64..=1), 0..30),
                           b in prop::collection::vec((0usize..32, -1i64..=1), 0..30)) {
            let p = Arc::new(UrProtocol::new(params(seed)).unwrap());
            let run = |ups: &[(usize, i64)]| {
                let mut s = TurnstileSketch::with_protocol(p.clone());
                for &(i, d) in ups {
                    s.update(i, d).unwrap();
                }
                s
            };
            let sa = run(&a);
            let sb = run(&b);
            let mut ab = a.clone();
            ab.extend_from_slice(&b);
            let all = run(&ab);
            let m1 = sa.merge(&sb).unwrap();
            let m2 = sb.merge(&sa).unwrap();
            prop_assert_eq!(m1.state(), all.state());
            prop_assert_eq!(m2.state(), all.state());
            let mut rev = ab.clone();
            rev.reverse();
            let reversed = run(&rev);
            prop_assert_eq!(reversed.state(), all.state());
        }
    }
}
