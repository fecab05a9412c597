use super::codec::{dec, enc, encoding_bit_length};
use super::params::LbParams;
use crate::combinatorics::{binomial, log2_binomial};
use crate::error::{param, Result};
use crate::prf::SharedRandomness;
use crate::protocol::ProtocolHandle;
use num_bigint::BigUint;
use rand::seq::index::sample;

/// A uniformly random `m`-subset of `[n]`, sorted.
pub fn random_subset(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut rng = SharedRandomness::new(seed).rng("lb-subset", &[]);
    let mut v = sample(&mut rng, n, m).into_vec();
    v.sort_unstable();
    v
}

/// `log₂ C(n, m) − log₂ C(n, b) ≥ (m − b) · log₂(n/m − 1)`, decided
/// exactly as `C(n, m) · m^d ≥ C(n, b) · (n − m)^d` with `d = m − b`.
pub fn savings_inequality_holds(n: usize, m: usize, b: usize) -> bool {
    assert!(b <= m && m <= n);
    let d = (m - b) as u32;
    let lhs = binomial(n as u64, m as u64) * BigUint::from(m).pow(d);
    let rhs = binomial(n as u64, b as u64) * BigUint::from(n - m).pow(d);
    lhs >= rhs
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsTrial {
    pub trial: usize,
    pub seed: u64,
    /// `Σ b_r`.
    pub successes: usize,
    /// `|B|`.
    pub rest_size: usize,
    pub total_bits: u64,
    /// `log₂ C(n, m) − log₂ C(n, |B|)`.
    pub savings: f64,
    pub inequality_holds: bool,
    pub round_trip: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsSummary {
    pub n: usize,
    pub m: usize,
    pub rounds: usize,
    /// `log₂ C(n, m)`.
    pub log2_binom: f64,
    pub trials: Vec<SavingsTrial>,
}

impl SavingsSummary {
    fn mean(&self, f: impl Fn(&SavingsTrial) -> f64) -> f64 {
        self.trials.iter().map(f).sum::<f64>() / self.trials.len() as f64
    }

    pub fn mean_successes(&self) -> f64 {
        self.mean(|t| t.successes as f64)
    }

    pub fn mean_rest_size(&self) -> f64 {
        self.mean(|t| t.rest_size as f64)
    }

    pub fn mean_total_bits(&self) -> f64 {
        self.mean(|t| t.total_bits as f64)
    }

    pub fn mean_savings(&self) -> f64 {
        self.mean(|t| t.savings)
    }

    /// Fraction of rounds in which Bob returned a fresh element.
    pub fn round_success_rate(&self) -> f64 {
        self.mean_successes() / self.rounds as f64
    }

    pub fn inequality_passes(&self) -> usize {
        self.trials.iter().filter(|t| t.inequality_holds).count()
    }

    pub fn round_trips(&self) -> usize {
        self.trials.iter().filter(|t| t.round_trip).count()
    }
}

/// Runs `trials` independent encodings of random `m`-subsets. Trial `t`
/// uses a seed derived from `(seed, t)` for the permutation, the subset
/// and the protocol built by `make`.
pub fn savings_report(
    make: &dyn Fn(u64) -> Result<Box<dyn ProtocolHandle>>,
    n: usize,
    log2_inv_delta: u64,
    trials: usize,
    seed: u64,
) -> Result<SavingsSummary> {
    if trials == 0 {
        return param("need at least one trial");
    }
    let prf = SharedRandomness::new(seed);
    let mut out = Vec::with_capacity(trials);
    let mut shape = None;
    for trial in 0..trials {
        let tseed = prf.word("savings-trial", &[trial as u64]);
        let params = LbParams::new(n, log2_inv_delta, tseed)?;
        let handle = make(tseed)?;
        let set = random_subset(n, params.m(), tseed);
        let enc_out = enc(&set, handle.as_ref(), &params)?;
        let round_trip = dec(&enc_out, handle.as_ref(), &params).is_ok_and(|d| d == set);
        let m = params.m();
        let b = enc_out.rest.len();
        out.push(SavingsTrial {
            trial,
            seed: tseed,
            successes: enc_out.successes(),
            rest_size: b,
            total_bits: encoding_bit_length(&enc_out),
            savings: log2_binomial(n as u64, m as u64) - log2_binomial(n as u64, b as u64),
            inequality_holds: savings_inequality_holds(n, m, b),
            round_trip,
        });
        shape = Some((m, params.rounds()));
    }
    let (m, rounds) = shape.expect("at least one trial");
    Ok(SavingsSummary { n, m, rounds, log2_binom: log2_binomial(n as u64, m as u64), trials: out })
}
