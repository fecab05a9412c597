use super::params::{LbParams, LbParamsK};
use super::subset::{subset_rank, SubsetCode};
use crate::combinatorics::{binomial, ceil_log2, ceil_log2_u64};
use crate::error::{format, param, Result};
use crate::protocol::{BobOutput, ProtocolHandle};
use std::collections::BTreeSet;

/// `(M, B, b)`: Alice's message, the explicitly stored remainder of `S`,
/// and one success bit per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderOutput {
    pub n: usize,
    pub m: usize,
    pub message: Vec<u8>,
    /// Sorted.
    pub rest: Vec<usize>,
    pub bits: Vec<bool>,
}

impl EncoderOutput {
    pub fn rounds(&self) -> usize {
        self.bits.len()
    }

    pub fn successes(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn subset_code(&self) -> SubsetCode {
        subset_rank(self.n, &self.rest).expect("encoder output holds a valid subset")
    }
}

/// `8|M| + R + ⌈log₂ n⌉ + ⌈log₂ C(n, |B|)⌉`.
pub fn encoding_bit_length(out: &EncoderOutput) -> u64 {
    8 * out.message.len() as u64
        + out.rounds() as u64
        + u64::from(ceil_log2_u64(out.n as u64))
        + ceil_log2(&binomial(out.n as u64, out.rest.len() as u64))
}

fn check_set(set: &[usize], n: usize, m: usize) -> Result<Vec<bool>> {
    if set.len() != m {
        return param(format!("set has {} elements, expected m = {m}", set.len()));
    }
    let mut member = vec![false; n];
    for &a in set {
        if a >= n {
            return param(format!("element {a} out of range for n = {n}"));
        }
        if std::mem::replace(&mut member[a], true) {
            return param(format!("element {a} repeated"));
        }
    }
    Ok(member)
}

fn check_handle(p: &dyn ProtocolHandle, n: usize) -> Result<()> {
    if p.dim() != n {
        return param(format!("protocol dimension {} does not match n = {n}", p.dim()));
    }
    Ok(())
}

fn single(out: &BobOutput) -> Option<usize> {
    match out.indices() {
        Some(&[i]) => Some(i),
        _ => None,
    }
}

/// Encoder state after each round; `current` is `S_r` keyed by `π`.
struct EncRun<'a> {
    p: &'a dyn ProtocolHandle,
    params: &'a LbParams,
    message: Vec<u8>,
    in_s: Vec<bool>,
    in_current: Vec<bool>,
    current: BTreeSet<(u32, usize)>,
    taken: Vec<usize>,
    bits: Vec<bool>,
}

impl<'a> EncRun<'a> {
    fn new(set: &[usize], p: &'a dyn ProtocolHandle, params: &'a LbParams) -> Result<Self> {
        check_handle(p, params.n())?;
        let in_s = check_set(set, params.n(), params.m())?;
        let message = p.alice(&in_s)?;
        let current = set.iter().map(|&a| (params.pi(a), a)).collect();
        Ok(Self {
            p,
            params,
            message,
            in_current: in_s.clone(),
            in_s,
            current,
            taken: Vec::new(),
            bits: Vec::new(),
        })
    }

    fn step(&mut self) -> Result<()> {
        let r = self.bits.len() + 1;
        let y: Vec<bool> = self.in_s.iter().zip(&self.in_current).map(|(&s, &c)| s && !c).collect();
        let answer = self.p.bob(&self.message, &y)?;
        match single(&answer).filter(|&s| self.in_current[s]) {
            Some(s) => {
                self.bits.push(true);
                self.taken.push(s);
                self.in_current[s] = false;
                self.current.remove(&(self.params.pi(s), s));
            }
            None => self.bits.push(false),
        }
        let target = self.params.sizes()[r];
        while self.current.len() > target {
            let (_, a) = self.current.pop_first().expect("nonempty");
            self.in_current[a] = false;
        }
        Ok(())
    }

    fn finish(self) -> EncoderOutput {
        let mut taken = vec![false; self.in_s.len()];
        for &a in &self.taken {
            taken[a] = true;
        }
        let rest = (0..self.in_s.len()).filter(|&a| self.in_s[a] && !taken[a]).collect();
        EncoderOutput { n: self.params.n(), m: self.params.m(), message: self.message, rest, bits: self.bits }
    }
}

struct DecRun<'a> {
    p: &'a dyn ProtocolHandle,
    params: &'a LbParams,
    out: &'a EncoderOutput,
    in_c: Vec<bool>,
    c_len: usize,
    pool: BTreeSet<(u32, usize)>,
    found: Vec<usize>,
    r: usize,
}

impl<'a> DecRun<'a> {
    fn new(out: &'a EncoderOutput, p: &'a dyn ProtocolHandle, params: &'a LbParams) -> Result<Self> {
        check_handle(p, params.n())?;
        if out.n != params.n() || out.m != params.m() || out.bits.len() != params.rounds() {
            return format("encoding does not match the shared parameters");
        }
        if out.rest.len() > params.m() || out.rest.iter().any(|&a| a >= params.n()) {
            return format("remainder set is not a subset of [n] of size at most m");
        }
        let pool = out.rest.iter().map(|&a| (params.pi(a), a)).collect::<BTreeSet<_>>();
        if pool.len() != out.rest.len() {
            return format("remainder set has repeated elements");
        }
        Ok(Self { p, params, out, in_c: vec![false; params.n()], c_len: 0, pool, found: Vec::new(), r: 0 })
    }

    fn add(&mut self, a: usize) {
        self.in_c[a] = true;
        self.c_len += 1;
    }

    fn step(&mut self) -> Result<()> {
        self.r += 1;
        let r = self.r;
        if self.out.bits[r - 1] {
            let answer = self.p.bob(&self.out.message, &self.in_c)?;
            let s = single(&answer)
                .filter(|&s| !self.in_c[s] && !self.pool.contains(&(self.params.pi(s), s)))
                .ok_or_else(|| crate::Error::Format(format!("round {r}: protocol answer inconsistent with encoding")))?;
            self.found.push(s);
            self.add(s);
        }
        let want = self.params.m() - self.params.sizes()[r];
        if self.c_len > want {
            return format(format!("round {r}: recovered set overflows"));
        }
        for _ in self.c_len..want {
            let (_, a) = self
                .pool
                .pop_first()
                .ok_or_else(|| crate::Error::Format(format!("round {r}: remainder set exhausted")))?;
            self.add(a);
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<usize>> {
        let mut all: Vec<usize> = self.out.rest.iter().copied().chain(self.found).collect();
        all.sort_unstable();
        if all.len() != self.params.m() {
            return format("decoded set has the wrong size");
        }
        Ok(all)
    }
}

pub fn enc(set: &[usize], p: &dyn ProtocolHandle, params: &LbParams) -> Result<EncoderOutput> {
    let mut run = EncRun::new(set, p, params)?;
    for _ in 0..params.rounds() {
        run.step()?;
    }
    Ok(run.finish())
}

/// The encoded set, sorted.
pub fn dec(out: &EncoderOutput, p: &dyn ProtocolHandle, params: &LbParams) -> Result<Vec<usize>> {
    let mut run = DecRun::new(out, p, params)?;
    for _ in 0..params.rounds() {
        run.step()?;
    }
    run.finish()
}

/// Result of running encoder and decoder round by round side by side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lockstep {
    pub output: EncoderOutput,
    pub decoded: Vec<usize>,
    /// First round after which `S_r` and `C_r` fail to partition `S`.
    pub violation: Option<usize>,
}

fn partitions(in_s: &[bool], s_r: &[bool], c_r: &[bool]) -> bool {
    in_s.iter().zip(s_r).zip(c_r).all(|((&s, &a), &c)| if s { a != c } else { !a && !c })
}

pub fn lockstep(set: &[usize], p: &dyn ProtocolHandle, params: &LbParams) -> Result<Lockstep> {
    let output = enc(set, p, params)?;
    let mut e = EncRun::new(set, p, params)?;
    let mut d = DecRun::new(&output, p, params)?;
    let mut violation = None;
    for r in 1..=params.rounds() {
        e.step()?;
        d.step()?;
        if violation.is_none() && !partitions(&e.in_s, &e.in_current, &d.in_c) {
            violation = Some(r);
        }
    }
    let decoded = d.finish()?;
    Ok(Lockstep { output, decoded, violation })
}

/// Rounds of the `k`-index encoder.
struct EncKRun<'a> {
    p: &'a dyn ProtocolHandle,
    params: &'a LbParamsK,
    message: Vec<u8>,
    in_s: Vec<bool>,
    taken: Vec<bool>,
    bits: Vec<bool>,
}

impl<'a> EncKRun<'a> {
    fn new(set: &[usize], p: &'a dyn ProtocolHandle, params: &'a LbParamsK) -> Result<Self> {
        check_handle(p, params.n())?;
        let in_s = check_set(set, params.n(), params.m())?;
        let message = p.alice(&in_s)?;
        Ok(Self { p, params, message, taken: vec![false; params.n()], in_s, bits: Vec::new() })
    }

    /// `S ∩ T_r`.
    fn current(&self, r: usize) -> Vec<bool> {
        (0..self.params.n()).map(|a| self.in_s[a] && self.params.in_t(r, a)).collect()
    }

    fn step(&mut self) -> Result<()> {
        let r = self.bits.len() + 1;
        let alive = self.current(r - 1);
        let y: Vec<bool> = self.in_s.iter().zip(&alive).map(|(&s, &c)| s && !c).collect();
        let answer = self.p.bob(&self.message, &y)?;
        match answer.indices().filter(|idx| idx.iter().all(|&a| a < alive.len() && alive[a])) {
            Some(idx) => {
                self.bits.push(true);
                for &a in idx {
                    if self.params.depth(a) == r - 1 {
                        self.taken[a] = true;
                    }
                }
            }
            None => self.bits.push(false),
        }
        Ok(())
    }

    fn finish(self) -> EncoderOutput {
        let rest = (0..self.params.n()).filter(|&a| self.in_s[a] && !self.taken[a]).collect();
        EncoderOutput { n: self.params.n(), m: self.params.m(), message: self.message, rest, bits: self.bits }
    }
}

struct DecKRun<'a> {
    p: &'a dyn ProtocolHandle,
    params: &'a LbParamsK,
    out: &'a EncoderOutput,
    in_b: Vec<bool>,
    in_c: Vec<bool>,
    found: BTreeSet<usize>,
    r: usize,
}

impl<'a> DecKRun<'a> {
    fn new(out: &'a EncoderOutput, p: &'a dyn ProtocolHandle, params: &'a LbParamsK) -> Result<Self> {
        check_handle(p, params.n())?;
        if out.n != params.n() || out.m != params.m() || out.bits.len() != params.rounds() {
            return format("encoding does not match the shared parameters");
        }
        let mut in_b = vec![false; params.n()];
        for &a in &out.rest {
            if a >= params.n() || std::mem::replace(&mut in_b[a], true) {
                return format("remainder set is not a subset of [n]");
            }
        }
        Ok(Self { p, params, out, in_b, in_c: vec![false; params.n()], found: BTreeSet::new(), r: 0 })
    }

    fn step(&mut self) -> Result<()> {
        self.r += 1;
        let r = self.r;
        if self.out.bits[r - 1] {
            let answer = self.p.bob(&self.out.message, &self.in_c)?;
            let idx = answer
                .indices()
                .ok_or_else(|| crate::Error::Format(format!("round {r}: protocol failed on a success round")))?;
            for &a in idx {
                if a < self.params.n() && self.params.depth(a) == r - 1 {
                    self.found.insert(a);
                    self.in_c[a] = true;
                }
            }
        }
        for a in 0..self.params.n() {
            if self.in_b[a] && self.params.depth(a) == r - 1 {
                self.in_c[a] = true;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<usize>> {
        let mut all: BTreeSet<usize> = self.out.rest.iter().copied().collect();
        all.extend(self.found);
        if all.len() != self.params.m() {
            return format("decoded set has the wrong size");
        }
        Ok(all.into_iter().collect())
    }
}

pub fn enc_k(set: &[usize], p: &dyn ProtocolHandle, params: &LbParamsK) -> Result<EncoderOutput> {
    let mut run = EncKRun::new(set, p, params)?;
    for _ in 0..params.rounds() {
        run.step()?;
    }
    Ok(run.finish())
}

pub fn dec_k(out: &EncoderOutput, p: &dyn ProtocolHandle, params: &LbParamsK) -> Result<Vec<usize>> {
    let mut run = DecKRun::new(out, p, params)?;
    for _ in 0..params.rounds() {
        run.step()?;
    }
    run.finish()
}

/// Side-by-side run of the `k`-index pair, checking that `S ∩ T_r` and
/// `C_r` partition `S` after every round.
pub fn lockstep_k(set: &[usize], p: &dyn ProtocolHandle, params: &LbParamsK) -> Result<Lockstep> {
    let output = enc_k(set, p, params)?;
    let mut e = EncKRun::new(set, p, params)?;
    let mut d = DecKRun::new(&output, p, params)?;
    let mut violation = None;
    for r in 1..=params.rounds() {
        e.step()?;
        d.step()?;
        if violation.is_none() && !partitions(&e.in_s, &e.current(r), &d.in_c) {
            violation = Some(r);
        }
    }
    let decoded = d.finish()?;
    Ok(Lockstep { output, decoded, violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lb::random_subset;
    use crate::protocol::{make_stub, StubKind};

    fn setup(seed: u64) -> (LbParams, Vec<usize>) {
        let params = LbParams::new(4096, 64, seed).unwrap();
        let set = random_subset(4096, 512, seed);
        (params, set)
    }

    #[test]
    fn oracle_removes_one_per_round() {
        let (params, set) = setup(1);
        let p = make_stub(StubKind::Oracle, 4096, 1, 1).unwrap();
        let out = enc(&set, &p, &params).unwrap();
        assert!(out.bits.iter().all(|&b| b));
        assert_eq!(out.rest.len(), 512 - 20);
        assert_eq!(dec(&out, &p, &params).unwrap(), set);
    }

    #[test]
    fn always_fail_keeps_everything() {
        let (params, set) = setup(2);
        let p = make_stub(StubKind::AlwaysFail, 4096, 1, 2).unwrap();
        let out = enc(&set, &p, &params).unwrap();
        assert!(out.bits.iter().all(|&b| !b));
        assert_eq!(out.rest, set);
        assert_eq!(dec(&out, &p, &params).unwrap(), set);
    }

    #[test]
    fn lockstep_partition_holds() {
        let (params, set) = setup(3);
        let p = make_stub(StubKind::IidFailure(0.25), 4096, 1, 3).unwrap();
        let ls = lockstep(&set, &p, &params).unwrap();
        assert_eq!(ls.violation, None);
        assert_eq!(ls.decoded, set);
    }

    #[test]
    fn bit_length_formula() {
        let (params, set) = setup(4);
        let p = make_stub(StubKind::Oracle, 4096, 1, 4).unwrap();
        let out = enc(&set, &p, &params).unwrap();
        let expect = 8 * 512 + 20 + 12 + ceil_log2(&binomial(4096, 492));
        assert_eq!(encoding_bit_length(&out), expect);
    }

    #[test]
    fn k_variant_round_trips() {
        for seed in 0..5 {
            let params = LbParamsK::new(4096, 4, seed).unwrap();
            let set = random_subset(4096, 128, seed);
            for kind in [StubKind::Oracle, StubKind::AlwaysFail, StubKind::IidFailure(0.25)] {
                let p = make_stub(kind, 4096, 4, seed).unwrap();
                let ls = lockstep_k(&set, &p, &params).unwrap();
                assert_eq!(ls.violation, None);
                assert_eq!(ls.decoded, set);
                assert_eq!(dec_k(&ls.output, &p, &params).unwrap(), set);
            }
        }
    }

    #[test]
    fn wrong_set_size_rejected() {
        let (params, _) = setup(5);
        let p = make_stub(StubKind::Oracle, 4096, 1, 5).unwrap();
        assert!(enc(&[1, 2, 3], &p, &params).is_err());
    }
}
