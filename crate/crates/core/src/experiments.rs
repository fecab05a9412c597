//! Seeded experiment drivers shared by the CLI and the acceptance suite.

use crate::error::{param, Error, Result};
use crate::prf::SharedRandomness;
use crate::protocol::{
    is_correct, make_stub, BucketProtocol, ProtocolHandle, ProtocolParams, StubKind, UrProtocol,
};
use crate::stream::TurnstileSketch;
use rand::seq::index::sample;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::str::FromStr;

/// Which protocol a harness run plugs in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HandleKind {
    Oracle,
    AlwaysFail,
    Iid(f64),
    /// The GF(q) sketch protocol with the given oversampling factor.
    Sketch(usize),
    /// The bucket-peeling variant with the given oversampling factor.
    Bucket(usize),
}

impl HandleKind {
    pub fn build(&self, n: usize, k: usize, seed: u64) -> Result<Box<dyn ProtocolHandle>> {
        let params = |c: usize| ProtocolParams::new(n, k).with_oversample(c).with_seed(seed);
        Ok(match *self {
            HandleKind::Oracle => Box::new(make_stub(StubKind::Oracle, n, k, seed)?),
            HandleKind::AlwaysFail => Box::new(make_stub(StubKind::AlwaysFail, n, k, seed)?),
            HandleKind::Iid(p) => Box::new(make_stub(StubKind::IidFailure(p), n, k, seed)?),
            HandleKind::Sketch(c) => Box::new(UrProtocol::new(params(c))?),
            HandleKind::Bucket(c) => Box::new(BucketProtocol::new(params(c))?),
        })
    }
}

impl std::fmt::Display for HandleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HandleKind::Oracle => write!(f, "oracle"),
            HandleKind::AlwaysFail => write!(f, "always-fail"),
            HandleKind::Iid(p) => write!(f, "iid:{p}"),
            HandleKind::Sketch(c) => write!(f, "sketch:{c}"),
            HandleKind::Bucket(c) => write!(f, "bucket:{c}"),
        }
    }
}

impl FromStr for HandleKind {
    type Err = Error;

    /// `oracle`, `always-fail`, `iid:<p>`, `sketch:<c>` or `bucket:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("unknown handle '{s}'"));
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        let factor = |a: Option<&str>| -> Result<usize> {
            a.map_or(Ok(crate::protocol::DEFAULT_OVERSAMPLE), |a| a.parse().map_err(|_| bad()))
        };
        match name {
            "oracle" if arg.is_none() => Ok(HandleKind::Oracle),
            "always-fail" if arg.is_none() => Ok(HandleKind::AlwaysFail),
            "iid" => Ok(HandleKind::Iid(arg.ok_or_else(bad)?.parse().map_err(|_| bad())?)),
            "sketch" => Ok(HandleKind::Sketch(factor(arg)?)),
            "bucket" => Ok(HandleKind::Bucket(factor(arg)?)),
            _ => Err(bad()),
        }
    }
}

/// Per-trial seed `t` of a run seeded with `seed`.
pub fn trial_seed(seed: u64, label: &str, t: u64) -> u64 {
    SharedRandomness::new(seed).word(label, &[t])
}

/// A random instance with `support(y) ⊊ support(x)`: `x` has fair-coin
/// bits and each of its ones survives into `y` with probability 1/2.
pub fn promise_instance(n: usize, seed: u64) -> (Vec<bool>, Vec<bool>) {
    let mut rng = SharedRandomness::new(seed).rng("promise-instance", &[]);
    let mut x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    if !x.contains(&true) {
        x[rng.random_range(0..n)] = true;
    }
    let mut y: Vec<bool> = x.iter().map(|&b| b && rng.random()).collect();
    if x == y {
        let ones: Vec<usize> = (0..n).filter(|&i| x[i]).collect();
        y[ones[rng.random_range(0..ones.len())]] = false;
    }
    (x, y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureRecord {
    pub params: ProtocolParams,
    pub trials: usize,
    /// Trials where Bob declared failure.
    pub declared: usize,
    /// Trials where Bob failed or returned a wrong index.
    pub failures: usize,
}

impl FailureRecord {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

/// Runs the sketch protocol on `trials` promise instances. Trial `t` uses
/// the same instance and protocol seed for any oversampling factor, so
/// runs that differ only in `base.oversample` are paired.
pub fn failure_rate(base: &ProtocolParams, trials: usize, seed: u64) -> Result<FailureRecord> {
    if trials == 0 {
        return param("need at least one trial");
    }
    base.validate()?;
    let (mut declared, mut failures) = (0, 0);
    for t in 0..trials as u64 {
        let s = trial_seed(seed, "failure-trial", t);
        let (x, y) = promise_instance(base.n, s);
        let p = UrProtocol::new((*base).with_seed(s))?;
        let out = p.bob(&p.alice(&x)?, &y)?;
        declared += usize::from(out.is_fail());
        failures += usize::from(!is_correct(&out, &x, &y, base.k));
    }
    Ok(FailureRecord { params: *base, trials, declared, failures })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageSizeRecord {
    pub params: ProtocolParams,
    pub max_level: u32,
    pub rows: usize,
    pub payload_bits: u64,
    pub serialized_bytes: usize,
    /// `payload_bits / (k · log₂²(n/k))`.
    pub normalized: f64,
}

/// Sketches a random input and measures the serialized message.
pub fn message_size(params: &ProtocolParams) -> Result<MessageSizeRecord> {
    let p = UrProtocol::new(*params)?;
    let mut rng = SharedRandomness::new(params.seed).rng("message-input", &[]);
    let x: Vec<bool> = (0..params.n).map(|_| rng.random()).collect();
    let msg = p.alice(&x)?;
    let bytes = msg.serialize();
    let lg = (params.n as f64 / params.k as f64).log2();
    Ok(MessageSizeRecord {
        params: *params,
        max_level: msg.max_level(),
        rows: msg.rows(),
        payload_bits: msg.payload_bits(),
        serialized_bytes: bytes.len(),
        normalized: msg.payload_bits() as f64 / (params.k as f64 * lg * lg),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityRecord {
    pub support: Vec<usize>,
    /// Samples per support element, in the order of `support`.
    pub counts: Vec<u64>,
    pub trials: usize,
    pub fails: usize,
    pub chi_square: f64,
    pub p_value: f64,
}

/// ℓ0-samples a fixed vector `trials` times, each with a fresh sketch seed,
/// and tests the sampled indices for uniformity over the support.
pub fn uniformity(base: &ProtocolParams, weight: usize, trials: usize, seed: u64) -> Result<UniformityRecord> {
    if weight < 2 || weight > base.n {
        return param(format!("support weight {weight} must lie in [2, n={}]", base.n));
    }
    if base.k != 1 {
        return param("uniformity is tested for k = 1");
    }
    if trials == 0 {
        return param("need at least one trial");
    }
    let mut rng = SharedRandomness::new(seed).rng("uniformity-support", &[]);
    let mut support = sample(&mut rng, base.n, weight).into_vec();
    support.sort_unstable();
    let mut counts = vec![0u64; weight];
    let mut fails = 0;
    for t in 0..trials as u64 {
        let s = trial_seed(seed, "uniformity-trial", t);
        let mut sk = TurnstileSketch::new((*base).with_seed(s))?;
        for &i in &support {
            sk.update(i, 1)?;
        }
        match sk.l0_sample_k(s)?.indices() {
            Some([i]) => match support.binary_search(i) {
                Ok(pos) => counts[pos] += 1,
                Err(_) => fails += 1,
            },
            _ => fails += 1,
        }
    }
    let total: u64 = counts.iter().sum();
    let expect = total as f64 / weight as f64;
    let chi_square = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum::<f64>();
    let dist = ChiSquared::new((weight - 1) as f64).expect("positive degrees of freedom");
    Ok(UniformityRecord { support, counts, trials, fails, chi_square, p_value: dist.sf(chi_square) })
}
