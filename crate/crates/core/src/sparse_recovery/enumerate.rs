//! Fixed enumeration order over sparse vectors.
//!
//! Sparse vectors are ordered by weight, then by support in colex order,
//! then by their nonzero values (read in increasing index order) in lex
//! order with values `1..q`.

use std::cmp::Ordering;
use std::ops::ControlFlow;

/// A sparse vector as parallel `(index, value)` arrays, indices ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Sparse {
    pub idx: Vec<usize>,
    pub val: Vec<u32>,
}

impl Sparse {
    pub fn weight(&self) -> usize {
        self.idx.len()
    }
}

/// Compares two sparse vectors in enumeration order.
pub(crate) fn enum_cmp(a: &Sparse, b: &Sparse) -> Ordering {
    a.weight()
        .cmp(&b.weight())
        .then_with(|| a.idx.iter().rev().cmp(b.idx.iter().rev()))
        .then_with(|| a.val.cmp(&b.val))
}

/// Advances a sorted `h`-subset of `[0, n)` to its colex successor.
pub(crate) fn next_colex(c: &mut [usize], n: usize) -> bool {
    let h = c.len();
    for i in 0..h {
        let limit = if i + 1 < h { c[i + 1] } else { n };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (j, slot) in c.iter_mut().enumerate().take(i) {
                *slot = j;
            }
            return true;
        }
    }
    false
}

/// Advances a value tuple over `1..q` in lex order (first entry most
/// significant).
pub(crate) fn next_values(v: &mut [u32], q: u32) -> bool {
    for slot in v.iter_mut().rev() {
        if *slot + 1 < q {
            *slot += 1;
            return true;
        }
        *slot = 1;
    }
    false
}

/// Visits every vector of weight exactly `h` in enumeration order.
pub(crate) fn for_each_of_weight<B>(
    n: usize,
    h: usize,
    q: u32,
    mut f: impl FnMut(&[usize], &[u32]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if h > n {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = (0..h).collect();
    loop {
        let mut val = vec![1u32; h];
        loop {
            f(&idx, &val)?;
            if !next_values(&mut val, q) {
                break;
            }
        }
        if !next_colex(&mut idx, n) {
            return ControlFlow::Continue(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_order_of_3_subsets_of_6() {
        let mut c = vec![0, 1, 2];
        let mut all = vec![c.clone()];
        while next_colex(&mut c, 6) {
            all.push(c.clone());
        }
        assert_eq!(all.len(), 20);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[1], vec![0, 1, 3]);
        assert_eq!(all[2], vec![0, 2, 3]);
        assert_eq!(all[3], vec![1, 2, 3]);
        assert_eq!(all[19], vec![3, 4, 5]);
        assert_eq!(all.iter().position(|s| s == &vec![2, 4, 5]), Some(18));
    }

    #[test]
    fn visit_counts() {
        let mut count = 0;
        let _ = for_each_of_weight::<()>(12, 2, 3, |_, _| {
            count += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(count, 66 * 4);
    }

    #[test]
    fn enumeration_matches_cmp() {
        let mut seen: Vec<Sparse> = Vec::new();
        for h in 0..=2 {
            let _ = for_each_of_weight::<()>(5, h, 3, |i, v| {
                seen.push(Sparse { idx: i.to_vec(), val: v.to_vec() });
                ControlFlow::Continue(())
            });
        }
        for w in seen.windows(2) {
            assert_eq!(enum_cmp(&w[0], &w[1]), Ordering::Less, "{:?}", w);
        }
    }
}
