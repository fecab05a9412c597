use crate::combinatorics::{binomial, ceil_log2};
use crate::error::{param, Result};
use num_bigint::BigUint;
use num_traits::Zero;

/// A `w`-subset of `[n]` stored as its colex rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCode {
    pub n: usize,
    pub w: usize,
    pub rank: BigUint,
}

impl SubsetCode {
    /// `⌈log₂ C(n, w)⌉`.
    pub fn bit_length(&self) -> u64 {
        ceil_log2(&binomial(self.n as u64, self.w as u64))
    }
}

/// Colex rank `Σ_t C(c_t, t)` over the sorted elements `c_1 < … < c_w`.
pub fn subset_rank(n: usize, set: &[usize]) -> Result<SubsetCode> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    if let Some(&bad) = sorted.iter().find(|&&c| c >= n) {
        return param(format!("element {bad} out of range for n = {n}"));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return param("repeated element in subset");
    }
    let rank = sorted
        .iter()
        .enumerate()
        .fold(BigUint::zero(), |acc, (t, &c)| acc + binomial(c as u64, t as u64 + 1));
    Ok(SubsetCode { n, w: sorted.len(), rank })
}

/// Inverse of [`subset_rank`]; elements in increasing order.
pub fn subset_unrank(code: &SubsetCode) -> Result<Vec<usize>> {
    let (n, w) = (code.n, code.w);
    if w > n {
        return param(format!("subset size {w} exceeds n = {n}"));
    }
    let total = binomial(n as u64, w as u64);
    if code.rank >= total {
        return param("rank out of range");
    }
    let mut rank = code.rank.clone();
    let mut out = vec![0usize; w];
    if w == 0 {
        return Ok(out);
    }
    // walk c downward, keeping binom = C(c, t)
    let mut t = w;
    let mut c = n - 1;
    let mut binom = binomial(c as u64, t as u64);
    loop {
        while binom > rank {
            // C(c−1, t) = C(c, t) (c − t) / c
            binom = binom * (c - t) / c;
            c -= 1;
        }
        out[t - 1] = c;
        rank -= &binom;
        if t == 1 {
            break;
        }
        if binom.is_zero() {
            // rank is exhausted; the rest is the colex minimum
            for (j, slot) in out[..t - 1].iter_mut().enumerate() {
                *slot = j;
            }
            break;
        }
        // C(c−1, t−1) = C(c, t) t / c
        binom = binom * t / c;
        c -= 1;
        t -= 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_ranks() {
        assert_eq!(subset_rank(5, &[]).unwrap().rank, BigUint::zero());
        assert_eq!(subset_rank(5, &[0, 1, 2]).unwrap().rank, BigUint::zero());
        assert_eq!(subset_rank(6, &[2, 4, 5]).unwrap().rank, BigUint::from(18u32));
        assert_eq!(subset_rank(6, &[3, 4, 5]).unwrap().rank, BigUint::from(19u32));
        assert!(subset_rank(6, &[6]).is_err());
        assert!(subset_rank(6, &[1, 1]).is_err());
    }

    #[test]
    fn colex_enumeration_order() {
        // all 3-subsets of [6] in colex order get ranks 0..20
        let mut all = Vec::new();
        for c in 2..6 {
            for b in 1..c {
                for a in 0..b {
                    all.push(vec![a, b, c]);
                }
            }
        }
        assert_eq!(all.len(), 20);
        for (i, s) in all.iter().enumerate() {
            let code = subset_rank(6, s).unwrap();
            assert_eq!(code.rank, BigUint::from(i));
            assert_eq!(&subset_unrank(&code).unwrap(), s);
        }
    }

    #[test]
    fn bit_lengths() {
        let code = subset_rank(6, &[1, 2, 3]).unwrap();
        assert_eq!(code.bit_length(), 5);
        assert_eq!(subset_rank(6, &[]).unwrap().bit_length(), 0);
    }

    #[test]
    fn large_round_trip() {
        let set: Vec<usize> = (0..512).map(|i| i * 8 + (i % 7)).collect();
        let code = subset_rank(4096, &set).unwrap();
        assert!(code.rank < binomial(4096, 512));
        assert_eq!(subset_unrank(&code).unwrap(), set);
    }

    #[test]
    fn unrank_rejects_out_of_range() {
        let code = SubsetCode { n: 6, w: 3, rank: BigUint::from(20u32) };
        assert!(subset_unrank(&code).is_err());
    }

    #[test]
    fn ten_thousand_round_trips() {
        use crate::prf::SharedRandomness;
        use rand::seq::index::sample;
        for t in 0..10_000u64 {
            let mut rng = SharedRandomness::new(t).rng("subset-test", &[]);
            let n = 1 + (t % 97) as usize;
            let w = (t as usize * 7) % (n + 1);
            let mut set: Vec<usize> = sample(&mut rng, n, w).into_vec();
            set.sort_unstable();
            let code = subset_rank(n, &set).unwrap();
            assert_eq!(subset_unrank(&code).unwrap(), set);
        }
    }

    proptest! {
        #[test]
        fn bijection_onto_range(n in 1usize..40, raw in prop::collection::btree_set(0usize..40, 0..12)) {
            let set: Vec<usize> = raw.into_iter().filter(|&c| c < n).collect();
            let code = subset_rank(n, &set).unwrap();
            prop_assert!(code.rank < binomial(n as u64, set.len() as u64));
            prop_assert_eq!(subset_unrank(&code).unwrap(), set);
        }
    }
}
