use super::{check_dim, BobOutput, ProtocolHandle};
use crate::bits::BitString;
use crate::error::{param, Result};
use crate::prf::hash_bytes;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StubKind {
    /// Always answers with the smallest differing indices.
    Oracle,
    /// Answers with an index where `x` and `y` agree, or fails if none.
    AlwaysFail,
    /// Behaves like `AlwaysFail` with the given probability per call and
    /// like `Oracle` otherwise.
    IidFailure(f64),
}

/// A synthetic protocol whose message is `x` itself.
#[derive(Debug, Clone)]
pub struct Stub {
    kind: StubKind,
    n: usize,
    k: usize,
    seed: u64,
}

pub fn make_stub(kind: StubKind, n: usize, k: usize, seed: u64) -> Result<Stub> {
    if k == 0 {
        return param("k must be positive");
    }
    if let StubKind::IidFailure(p) = kind {
        if !(0.0..=1.0).contains(&p) {
            return param(format!("failure probability {p} outside [0, 1]"));
        }
    }
    Ok(Stub { kind, n, k, seed })
}

fn bitmap(v: &[bool]) -> BitString {
    let mut b = BitString::new();
    for &x in v {
        b.push(x);
    }
    b
}

impl Stub {
    pub fn kind(&self) -> StubKind {
        self.kind
    }

    fn correct(&self, x: &[bool], y: &[bool]) -> BobOutput {
        BobOutput::Indices((0..self.n).filter(|&i| x[i] != y[i]).take(self.k).collect())
    }

    fn wrong(&self, x: &[bool], y: &[bool]) -> BobOutput {
        match (0..self.n).find(|&i| x[i] == y[i]) {
            Some(i) => BobOutput::Indices(vec![i]),
            None => BobOutput::Fail,
        }
    }

    fn coin(&self, message: &[u8], y: &[bool]) -> u64 {
        let mut input = message.to_vec();
        input.extend_from_slice(bitmap(y).as_bytes());
        hash_bytes(self.seed, &input)
    }
}

impl ProtocolHandle for Stub {
    fn dim(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn alice(&self, x: &[bool]) -> Result<Vec<u8>> {
        check_dim(x, self.n, "Alice's input")?;
        Ok(bitmap(x).into_bytes())
    }

    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput> {
        check_dim(y, self.n, "Bob's input")?;
        let bits = BitString::from_bytes(message, self.n as u64)?;
        if message.len() != self.n.div_ceil(8) {
            return crate::error::format("stub message has the wrong length");
        }
        let x: Vec<bool> = (0..self.n as u64).map(|i| bits.get(i)).collect();
        Ok(match self.kind {
            StubKind::Oracle => self.correct(&x, y),
            StubKind::AlwaysFail => self.wrong(&x, y),
            StubKind::IidFailure(p) => {
                let threshold = p * 18_446_744_073_709_551_616.0;
                if (self.coin(message, y) as f64) < threshold {
                    self.wrong(&x, y)
                } else {
                    self.correct(&x, y)
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{indicator, is_correct};

    #[test]
    fn oracle_smallest_index() {
        let s = make_stub(StubKind::Oracle, 8, 1, 0).unwrap();
        let x = indicator(8, [1, 2, 3]).unwrap();
        let y = indicator(8, [1]).unwrap();
        assert_eq!(s.bob(&s.alice(&x).unwrap(), &y).unwrap(), BobOutput::Indices(vec![2]));
    }

    #[test]
    fn always_fail_picks_agreeing_index() {
        let s = make_stub(StubKind::AlwaysFail, 8, 1, 0).unwrap();
        let x = indicator(8, [1, 2, 3]).unwrap();
        let y = indicator(8, [1]).unwrap();
        let out = s.bob(&s.alice(&x).unwrap(), &y).unwrap();
        let i = out.indices().unwrap()[0];
        assert_eq!(x[i], y[i]);
        let all = indicator(2, [0, 1]).unwrap();
        let s2 = make_stub(StubKind::AlwaysFail, 2, 1, 0).unwrap();
        assert_eq!(s2.bob(&s2.alice(&all).unwrap(), &[false, false]).unwrap(), BobOutput::Fail);
    }

    #[test]
    fn iid_failure_rate() {
        let n = 64;
        let s = make_stub(StubKind::IidFailure(0.25), n, 1, 99).unwrap();
        let x = vec![true; n];
        let msg = s.alice(&x).unwrap();
        let calls = 10_000u64;
        let mut fails = 0;
        for c in 0..calls {
            // distinct Bob inputs give independent coins
            let y: Vec<bool> = (0..n).map(|i| i < 14 && (c >> i) & 1 == 1).collect();
            let out = s.bob(&msg, &y).unwrap();
            fails += usize::from(!is_correct(&out, &x, &y, 1));
        }
        let rate = fails as f64 / calls as f64;
        assert!((rate - 0.25).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn bad_probability_rejected() {
        assert!(make_stub(StubKind::IidFailure(1.5), 8, 1, 0).is_err());
    }
}
