//! Brute-force oracles for the exact decoder and the injectivity check.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use urk::sparse_recovery::{build_scheme, DecodeStrategy, RecoveryScheme};
use urk::{FieldVec, SketchMatrix};

/// `Π v` over GF(3) by explicit row sums, independent of the library's product.
fn product(m: &SketchMatrix, v: &[u32]) -> Vec<u32> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m.entry(r, c) * v[c]).sum::<u32>() % 3)
        .collect()
}

/// Every vector of GF(3)^n, as digit arrays.
fn all_vectors(n: usize) -> impl Iterator<Item = Vec<u32>> {
    (0..3u64.pow(n as u32)).map(move |mut code| {
        (0..n)
            .map(|_| {
                let d = (code % 3) as u32;
                code /= 3;
                d
            })
            .collect()
    })
}

fn weight(v: &[u32]) -> usize {
    v.iter().filter(|&&e| e != 0).count()
}

/// Sketch → all preimages of weight ≤ s, found by visiting all 3^n vectors.
fn preimage_table(m: &SketchMatrix, s: usize) -> HashMap<Vec<u32>, Vec<Vec<u32>>> {
    let mut table: HashMap<Vec<u32>, Vec<Vec<u32>>> = HashMap::new();
    for v in all_vectors(m.cols()).filter(|v| weight(v) <= s) {
        table.entry(product(m, &v)).or_default().push(v);
    }
    table
}

/// Injective on s-sparse vectors iff no nonzero kernel vector has weight ≤ 2s.
fn kernel_oracle(m: &SketchMatrix, s: usize) -> bool {
    let zero = vec![0; m.rows()];
    !all_vectors(m.cols()).any(|v| (1..=2 * s).contains(&weight(&v)) && product(m, &v) == zero)
}

fn check_against_table(scheme: &RecoveryScheme, queries: &[Vec<u32>]) {
    let table = preimage_table(scheme.matrix(), scheme.sparsity());
    for y in queries {
        let got = scheme.exhaustive_decode(&FieldVec::new(3, y.clone()).unwrap()).unwrap();
        match (table.get(y), got) {
            (None, None) => {}
            (Some(pre), Some(w)) => assert!(pre.contains(&w.entries().to_vec()), "{y:?} decoded to {w:?}"),
            (pre, got) => panic!("sketch {y:?}: oracle {pre:?}, decoder {got:?}"),
        }
    }
}

fn queries(m: &SketchMatrix, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<u32>> = all_vectors(m.cols()).filter(|v| weight(v) <= 2).map(|v| product(m, &v)).collect();
    out.extend((0..2000).map(|_| (0..m.rows()).map(|_| rng.random_range(0..3)).collect()));
    out
}

#[test]
fn decoder_agrees_with_full_enumeration_of_gf3_12() {
    let scheme = build_scheme(12, 2, 3, 10, 0).unwrap();
    assert!(scheme.verify_injectivity().unwrap());
    let table = preimage_table(scheme.matrix(), 2);
    assert_eq!(table.len(), 289, "injective scheme has one preimage per sparse vector");
    check_against_table(&scheme, &queries(scheme.matrix(), 1));
}

#[test]
fn decoder_agrees_on_short_non_injective_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut collisions = 0;
    for rows in [4, 5, 6, 7] {
        let data: Vec<Vec<u32>> = (0..rows).map(|_| (0..12).map(|_| rng.random_range(0..3)).collect()).collect();
        let m = SketchMatrix::from_rows(3, &data).unwrap();
        let scheme = RecoveryScheme::from_matrix(m.clone(), 2).unwrap();
        collisions += usize::from(!scheme.verify_injectivity().unwrap());
        check_against_table(&scheme, &queries(&m, rows as u64));
    }
    assert!(collisions > 0);
}

#[test]
fn injectivity_matches_kernel_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut yes, mut no) = (0, 0);
    for trial in 0..24 {
        let (n, rows, s) = (8 + trial % 3, 4 + trial % 6, 1 + trial % 2);
        let data: Vec<Vec<u32>> = (0..rows).map(|_| (0..n).map(|_| rng.random_range(0..3)).collect()).collect();
        let m = SketchMatrix::from_rows(3, &data).unwrap();
        let expect = kernel_oracle(&m, s);
        let scheme = RecoveryScheme::from_matrix(m, s).unwrap();
        assert_eq!(scheme.verify_injectivity().unwrap(), expect, "trial {trial}");
        if expect { yes += 1 } else { no += 1 }
    }
    assert!(yes > 0 && no > 0, "both outcomes exercised: {yes} {no}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strategies_return_identical_vectors(
        n in 6usize..13,
        rows in 3usize..10,
        s in 1usize..4,
        q in prop::sample::select(vec![3u32, 5]),
        seed in any::<u64>(),
        from_image in any::<bool>(),
    ) {
        prop_assume!(s <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = SketchMatrix::random(seed, q, rows, n).unwrap();
        let target = if from_image {
            let mut v = vec![0u32; n];
            for _ in 0..s {
                v[rng.random_range(0..n)] = rng.random_range(1..q);
            }
            m.apply(&FieldVec::new(q, v).unwrap()).unwrap()
        } else {
            FieldVec::new(q, (0..rows).map(|_| rng.random_range(0..q)).collect()).unwrap()
        };
        let base = RecoveryScheme::from_matrix(m, s).unwrap();
        let results: Vec<_> = [DecodeStrategy::Enumerate, DecodeStrategy::MeetInMiddle, DecodeStrategy::Coset, DecodeStrategy::Auto]
            .into_iter()
            .map(|st| base.clone().with_strategy(st).exhaustive_decode(&target).unwrap())
            .collect();
        for r in &results[1..] {
            prop_assert_eq!(r, &results[0]);
        }
        if from_image {
            prop_assert!(results[0].is_some());
        }
    }
}
