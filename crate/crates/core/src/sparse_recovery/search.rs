//! Exact search strategies behind `exhaustive_decode`.

use super::enumerate::{enum_cmp, for_each_of_weight, Sparse};
use crate::combinatorics::binomial_u128;
use crate::gfq::{inv_mod, mul_mod, sub_mod, SketchMatrix};
use crate::FieldVec;
use std::collections::HashMap;
use std::ops::ControlFlow;

fn pow_sat(base: u128, exp: usize) -> u128 {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e)).unwrap_or(u128::MAX)
}

fn weight_count(n: usize, h: usize, q: u32) -> u128 {
    binomial_u128(n as u64, h as u64).saturating_mul(pow_sat(u128::from(q - 1), h))
}

/// Number of vectors of weight `≤ s`.
pub(super) fn enumerate_cost(n: usize, s: usize, q: u32) -> u128 {
    (0..=s).fold(0u128, |acc, t| acc.saturating_add(weight_count(n, t, q)))
}

pub(super) fn mitm_cost(n: usize, s: usize, q: u32) -> u128 {
    let table = (1..=s.div_ceil(2)).fold(0u128, |acc, h| acc.saturating_add(weight_count(n, h, q)));
    (1..=s).fold(table, |acc, t| acc.saturating_add(weight_count(n, t / 2, q)))
}

pub(super) fn coset_cost_for_nullity(n: usize, rows: usize, nullity: usize, q: u32) -> u128 {
    let elimination = (rows as u128) * (rows.min(n) as u128);
    pow_sat(u128::from(q), nullity).saturating_add(elimination)
}

/// `y - Σ parts` is zero in every row.
fn residual_is_zero(matrix: &SketchMatrix, y: &FieldVec, parts: &[(&[usize], &[u32])]) -> bool {
    let q = u64::from(matrix.modulus());
    let ys = y.entries();
    (0..matrix.rows()).all(|r| {
        let mut acc = u64::from(ys[r]);
        for (idx, val) in parts {
            for (&i, &v) in idx.iter().zip(val.iter()) {
                acc += (q - u64::from(matrix.entry(r, i))) * u64::from(v);
            }
        }
        acc % q == 0
    })
}

fn join(a_idx: &[usize], a_val: &[u32], b_idx: &[usize], b_val: &[u32]) -> Sparse {
    let mut idx = a_idx.to_vec();
    idx.extend_from_slice(b_idx);
    let mut val = a_val.to_vec();
    val.extend_from_slice(b_val);
    Sparse { idx, val }
}

/// Literal walk of the enumeration order.
pub(super) fn enumerate_first(matrix: &SketchMatrix, s: usize, y: &FieldVec) -> Option<Sparse> {
    let n = matrix.cols();
    let q = matrix.modulus();
    for t in 0..=s {
        let hit = for_each_of_weight(n, t, q, |idx, val| {
            if residual_is_zero(matrix, y, &[(idx, val)]) {
                ControlFlow::Break(Sparse { idx: idx.to_vec(), val: val.to_vec() })
            } else {
                ControlFlow::Continue(())
            }
        });
        if let ControlFlow::Break(found) = hit {
            return Some(found);
        }
    }
    None
}

/// Finds two distinct vectors of weight `≤ s` with equal sketches.
pub(super) fn find_collision(matrix: &SketchMatrix, s: usize) -> Option<(Sparse, Sparse)> {
    let n = matrix.cols();
    let q = matrix.modulus();
    let mut seen: HashMap<Vec<u32>, Sparse> = HashMap::new();
    for t in 0..=s {
        let hit = for_each_of_weight(n, t, q, |idx, val| {
            let mut sk = FieldVec::zeros(q, matrix.rows());
            for (&i, &v) in idx.iter().zip(val) {
                sk.add_scaled(v, matrix.column(i));
            }
            let here = Sparse { idx: idx.to_vec(), val: val.to_vec() };
            match seen.get(sk.entries()) {
                Some(prev) => ControlFlow::Break((prev.clone(), here)),
                None => {
                    seen.insert(sk.entries().to_vec(), here);
                    ControlFlow::Continue(())
                }
            }
        });
        if let ControlFlow::Break(pair) = hit {
            return Some(pair);
        }
    }
    None
}

/// Hash key from the leading rows of a sketch: the base-q integer of as
/// many rows as fit in 64 bits.
#[derive(Debug)]
struct KeyRows {
    rows: usize,
}

impl KeyRows {
    fn new(matrix: &SketchMatrix) -> Self {
        let q = u128::from(matrix.modulus());
        let mut rows = 0;
        let mut p: u128 = 1;
        while rows < matrix.rows() && p * q <= u128::from(u64::MAX) {
            p *= q;
            rows += 1;
        }
        Self { rows }
    }

    /// Key of `base - Σ val·col_idx` (or of `Σ val·col_idx` when `base` is
    /// `None`).
    fn key(&self, matrix: &SketchMatrix, base: Option<&[u32]>, idx: &[usize], val: &[u32]) -> u64 {
        let q = matrix.modulus();
        let mut key = 0u64;
        for r in (0..self.rows).rev() {
            let mut acc = 0u32;
            for (&i, &v) in idx.iter().zip(val) {
                acc = (acc + mul_mod(v, matrix.entry(r, i), q)) % q;
            }
            let digit = match base {
                Some(b) => sub_mod(b[r], acc, q),
                None => acc,
            };
            key = key * u64::from(q) + u64::from(digit);
        }
        key
    }
}

/// Sketch keys of every vector of weight `1..=max_weight`.
#[derive(Debug)]
pub(super) struct MitmTable {
    keys: KeyRows,
    by_key: HashMap<u64, Vec<u32>>,
    offsets: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<u32>,
}

impl MitmTable {
    pub fn new(matrix: &SketchMatrix, max_weight: usize) -> Self {
        let keys = KeyRows::new(matrix);
        let mut table =
            Self { keys, by_key: HashMap::new(), offsets: vec![0], idx: Vec::new(), val: Vec::new() };
        for h in 1..=max_weight {
            let _ = for_each_of_weight::<()>(matrix.cols(), h, matrix.modulus(), |idx, val| {
                let id = (table.offsets.len() - 1) as u32;
                let key = table.keys.key(matrix, None, idx, val);
                table.by_key.entry(key).or_default().push(id);
                table.idx.extend_from_slice(idx);
                table.val.extend_from_slice(val);
                table.offsets.push(table.idx.len());
                ControlFlow::Continue(())
            });
        }
        table
    }

    fn entry(&self, id: u32) -> (&[usize], &[u32]) {
        let (a, b) = (self.offsets[id as usize], self.offsets[id as usize + 1]);
        (&self.idx[a..b], &self.val[a..b])
    }

    /// Each weight-`t` solution is visited once, as its lowest `⌊t/2⌋`
    /// support entries (probed) joined with its highest `⌈t/2⌉` entries
    /// (looked up).
    pub fn first_preimage(&self, matrix: &SketchMatrix, s: usize, y: &FieldVec) -> Option<Sparse> {
        if y.is_zero() {
            return Some(Sparse::default());
        }
        let n = matrix.cols();
        let q = matrix.modulus();
        for t in 1..=s {
            let low = t / 2;
            let high = t - low;
            let mut found: Vec<Sparse> = Vec::new();
            let _ = for_each_of_weight::<()>(n, low, q, |u_idx, u_val| {
                let key = self.keys.key(matrix, Some(y.entries()), u_idx, u_val);
                let Some(ids) = self.by_key.get(&key) else {
                    return ControlFlow::Continue(());
                };
                let floor = u_idx.last().map_or(0, |&m| m + 1);
                for &id in ids {
                    let (v_idx, v_val) = self.entry(id);
                    if v_idx.len() != high || v_idx[0] < floor {
                        continue;
                    }
                    if residual_is_zero(matrix, y, &[(u_idx, u_val), (v_idx, v_val)]) {
                        found.push(join(u_idx, u_val, v_idx, v_val));
                    }
                }
                ControlFlow::Continue(())
            });
            if let Some(best) = found.into_iter().min_by(enum_cmp) {
                return Some(best);
            }
        }
        None
    }
}

/// Reduced row-echelon data for solving `Πw = y`.
#[derive(Debug)]
pub(super) struct Elimination {
    q: u32,
    n: usize,
    pivots: Vec<usize>,
    /// `E` with `E·Π` in reduced row-echelon form, row-major `m × m`.
    transform: Vec<Vec<u32>>,
    null_basis: Vec<Vec<u32>>,
}

impl Elimination {
    pub fn new(matrix: &SketchMatrix) -> Self {
        let q = matrix.modulus();
        let (m, n) = (matrix.rows(), matrix.cols());
        let mut a: Vec<Vec<u32>> = (0..m)
            .map(|r| {
                let mut row: Vec<u32> = (0..n).map(|c| matrix.entry(r, c)).collect();
                row.extend((0..m).map(|j| u32::from(j == r)));
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| a[i][c] != 0) else { continue };
            a.swap(r, p);
            let inv = inv_mod(a[r][c], q);
            for e in a[r].iter_mut() {
                *e = mul_mod(*e, inv, q);
            }
            let pivot_row = a[r].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i != r && row[c] != 0 {
                    let f = row[c];
                    for (e, &pv) in row.iter_mut().zip(&pivot_row) {
                        *e = sub_mod(*e, mul_mod(f, pv, q), q);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let null_basis = (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![0u32; n];
                v[f] = 1;
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = (q - a[row][f]) % q;
                }
                v
            })
            .collect();
        let transform = a.into_iter().map(|row| row[n..].to_vec()).collect();
        Self { q, n, pivots, transform, null_basis }
    }

    pub fn nullity(&self) -> usize {
        self.null_basis.len()
    }

    pub fn first_preimage(&self, matrix: &SketchMatrix, s: usize, y: &FieldVec) -> Option<Sparse> {
        let q = self.q;
        let z: Vec<u32> = self
            .transform
            .iter()
            .map(|row| row.iter().zip(y.entries()).fold(0u32, |acc, (&e, &yv)| (acc + mul_mod(e, yv, q)) % q))
            .collect();
        if z[self.pivots.len()..].iter().any(|&v| v != 0) {
            return None;
        }
        let mut current = vec![0u32; self.n];
        for (row, &pc) in self.pivots.iter().enumerate() {
            current[pc] = z[row];
        }
        let mut digits = vec![0u32; self.nullity()];
        let mut best: Option<Sparse> = None;
        loop {
            let weight = current.iter().filter(|&&v| v != 0).count();
            if weight <= s {
                let cand = Sparse {
                    idx: (0..self.n).filter(|&i| current[i] != 0).collect(),
                    val: current.iter().copied().filter(|&v| v != 0).collect(),
                };
                if best.as_ref().is_none_or(|b| enum_cmp(&cand, b).is_lt()) {
                    best = Some(cand);
                }
            }
            // base-q odometer; every digit step adds its basis vector,
            // wrap-around included
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    debug_assert!(best.as_ref().is_none_or(|b| residual_is_zero(matrix, y, &[(&b.idx, &b.val)])));
                    return best;
                }
                for (c, &b) in current.iter_mut().zip(&self.null_basis[pos]) {
                    *c = (*c + b) % q;
                }
                digits[pos] += 1;
                if digits[pos] < q {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
        }
    }
}
