//! Arithmetic over a prime field GF(q), dense vectors and sketch matrices,
//! and base-q bit packing.

use crate::bits::{BitReader, BitString};
use crate::combinatorics::ceil_log2;
use crate::error::{format, param, Result};
use crate::prf::SharedRandomness;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime `q ≥ max(3, 2·max_abs + 1)`: the field must embed the
/// entry range `[-max_abs, max_abs]` injectively.
pub fn modulus_for_entries(max_abs: u64) -> u32 {
    let mut q = (2 * max_abs + 1).max(3);
    while !is_prime(q) {
        q += 1;
    }
    q as u32
}

pub(crate) fn check_modulus(q: u32) -> Result<()> {
    if q < 3 || !is_prime(u64::from(q)) {
        return param(format!("modulus q={q} must be a prime ≥ 3"));
    }
    Ok(())
}

/// An element of GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u32,
    q: u32,
}

impl FieldElem {
    pub fn new(value: u64, q: u32) -> Result<Self> {
        check_modulus(q)?;
        Ok(Self { value: (value % u64::from(q)) as u32, q })
    }

    /// Canonical embedding of a signed integer: `value mod q`.
    pub fn from_signed(value: i64, q: u32) -> Result<Self> {
        check_modulus(q)?;
        Ok(Self { value: signed_mod(value, q), q })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.q
    }

    /// Representative in `[-(q-1)/2, (q-1)/2]`.
    pub fn to_signed(self) -> i64 {
        centered(self.value, self.q)
    }
}

#[inline]
pub(crate) fn signed_mod(value: i64, q: u32) -> u32 {
    value.rem_euclid(i64::from(q)) as u32
}

#[inline]
pub(crate) fn centered(value: u32, q: u32) -> i64 {
    let v = i64::from(value);
    if v > i64::from(q / 2) {
        v - i64::from(q)
    } else {
        v
    }
}

#[inline]
pub(crate) fn mul_mod(a: u32, b: u32, q: u32) -> u32 {
    ((u64::from(a) * u64::from(b)) % u64::from(q)) as u32
}

#[inline]
pub(crate) fn add_mod(a: u32, b: u32, q: u32) -> u32 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod(a: u32, b: u32, q: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

/// Multiplicative inverse by Fermat's little theorem.
pub(crate) fn inv_mod(a: u32, q: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(q));
    let mut base = u64::from(a);
    let mut exp = q - 2;
    let mut acc = 1u64;
    let m = u64::from(q);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc as u32
}

/// A dense vector over GF(q).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVec {
    q: u32,
    entries: Vec<u32>,
}

impl FieldVec {
    pub fn zeros(q: u32, len: usize) -> Self {
        Self { q, entries: vec![0; len] }
    }

    /// Builds a vector, reducing every entry mod q.
    pub fn new(q: u32, entries: Vec<u32>) -> Result<Self> {
        check_modulus(q)?;
        let entries = entries.into_iter().map(|e| e % q).collect();
        Ok(Self { q, entries })
    }

    pub fn from_signed(q: u32, values: &[i64]) -> Result<Self> {
        check_modulus(q)?;
        Ok(Self { q, entries: values.iter().map(|&v| signed_mod(v, q)).collect() })
    }

    /// Standard basis vector `e_i` scaled by `c`.
    pub fn unit(q: u32, len: usize, i: usize, c: u32) -> Self {
        let mut v = Self::zeros(q, len);
        v.entries[i] = c % q;
        v
    }

    pub(crate) fn from_raw(q: u32, entries: Vec<u32>) -> Self {
        debug_assert!(entries.iter().all(|&e| e < q));
        Self { q, entries }
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> u32 {
        self.entries[i]
    }

    pub(crate) fn set(&mut self, i: usize, value: u32) {
        self.entries[i] = value % self.q;
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.entries.iter().map(|&e| centered(e, self.q)).collect()
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&e| e != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    fn check_shape(&self, other: &FieldVec) -> Result<()> {
        if self.q != other.q {
            return param(format!("modulus mismatch: {} vs {}", self.q, other.q));
        }
        if self.len() != other.len() {
            return param(format!("length mismatch: {} vs {}", self.len(), other.len()));
        }
        Ok(())
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: u32, other: &[u32]) {
        debug_assert_eq!(self.entries.len(), other.len());
        let q = self.q;
        let c = c % q;
        if c == 0 {
            return;
        }
        for (a, &b) in self.entries.iter_mut().zip(other) {
            *a = ((u64::from(*a) + u64::from(c) * u64::from(b)) % u64::from(q)) as u32;
        }
    }

    pub fn add_assign(&mut self, other: &FieldVec) -> Result<()> {
        self.check_shape(other)?;
        let q = self.q;
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a = add_mod(*a, b, q);
        }
        Ok(())
    }

    pub fn sub_assign(&mut self, other: &FieldVec) -> Result<()> {
        self.check_shape(other)?;
        let q = self.q;
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a = sub_mod(*a, b, q);
        }
        Ok(())
    }

    pub fn scaled(&self, c: u32) -> FieldVec {
        let q = self.q;
        FieldVec { q, entries: self.entries.iter().map(|&e| mul_mod(e, c % q, q)).collect() }
    }
}

/// Entrywise sum mod q.
pub fn vec_add(a: &FieldVec, b: &FieldVec) -> Result<FieldVec> {
    let mut out = a.clone();
    out.add_assign(b)?;
    Ok(out)
}

pub fn vec_sub(a: &FieldVec, b: &FieldVec) -> Result<FieldVec> {
    let mut out = a.clone();
    out.sub_assign(b)?;
    Ok(out)
}

/// An `rows × cols` matrix over GF(q).
///
/// Entry `(r, c)` of a seeded matrix is `PRF(seed, "matrix", r, c)` reduced
/// to a uniform element of GF(q), so it does not depend on the matrix
/// dimensions. Storage is column-major: every hot path (sketch updates,
/// decoding) works a column at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchMatrix {
    q: u32,
    rows: usize,
    cols: usize,
    seed: Option<u64>,
    data: Vec<u32>,
}

impl SketchMatrix {
    pub fn random(seed: u64, q: u32, rows: usize, cols: usize) -> Result<Self> {
        check_modulus(q)?;
        let prf = SharedRandomness::new(seed);
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(prf.below("matrix", &[r as u64, c as u64], u64::from(q)) as u32);
            }
        }
        Ok(Self { q, rows, cols, seed: Some(seed), data })
    }

    /// Builds a matrix from explicit rows; used for hand-made instances.
    pub fn from_rows(q: u32, rows: &[Vec<u32>]) -> Result<Self> {
        check_modulus(q)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return param("ragged matrix rows");
        }
        let mut data = vec![0; nrows * ncols];
        for (r, row) in rows.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                data[c * nrows + r] = e % q;
            }
        }
        Ok(Self { q, rows: nrows, cols: ncols, seed: None, data })
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn entry(&self, r: usize, c: usize) -> u32 {
        self.data[c * self.rows + r]
    }

    pub fn column(&self, c: usize) -> &[u32] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.data.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(self.entry(r, c));
            }
        }
        out
    }

    /// `self · v` over GF(q).
    pub fn apply(&self, v: &FieldVec) -> Result<FieldVec> {
        if v.modulus() != self.q || v.len() != self.cols {
            return param(format!(
                "cannot apply {}x{} matrix over GF({}) to vector of length {} over GF({})",
                self.rows,
                self.cols,
                self.q,
                v.len(),
                v.modulus()
            ));
        }
        let mut out = FieldVec::zeros(self.q, self.rows);
        for (c, &x) in v.entries().iter().enumerate() {
            if x != 0 {
                out.add_scaled(x, self.column(c));
            }
        }
        Ok(out)
    }
}

/// `M · v`; see [`SketchMatrix::apply`].
pub fn mat_apply(m: &SketchMatrix, v: &FieldVec) -> Result<FieldVec> {
    m.apply(v)
}

/// Width in bits of a packed length-`len` vector over GF(q): `⌈len·log₂ q⌉`.
pub fn packed_width(q: u32, len: usize) -> u64 {
    ceil_log2(&BigUint::from(q).pow(len as u32))
}

/// Packs `v` as the base-q integer `Σ v[i]·q^i` written in exactly
/// `⌈len·log₂ q⌉` bits, most significant bit first.
pub fn pack_base_q(v: &FieldVec) -> BitString {
    let q = v.modulus();
    let value = if q <= 256 {
        let digits: Vec<u8> = v.entries().iter().map(|&e| e as u8).collect();
        BigUint::from_radix_le(&digits, q).unwrap_or_default()
    } else {
        v.entries().iter().rev().fold(BigUint::zero(), |acc, &d| acc * q + d)
    };
    let mut out = BitString::new();
    out.push_big(&value, packed_width(q, v.len()));
    out
}

/// Inverse of [`pack_base_q`].
pub fn unpack_base_q(bits: &BitString, q: u32, len: usize) -> Result<FieldVec> {
    let width = packed_width(q, len);
    if bits.len() != width {
        return format(format!("expected {width} packed bits, got {}", bits.len()));
    }
    unpack_from(&mut bits.reader(), q, len)
}

pub(crate) fn unpack_from(reader: &mut BitReader<'_>, q: u32, len: usize) -> Result<FieldVec> {
    check_modulus(q)?;
    let width = packed_width(q, len);
    let mut value = reader.read_big(width)?;
    if value >= BigUint::from(q).pow(len as u32) {
        return format(format!("packed value exceeds q^{len} for q={q}"));
    }
    let mut entries = Vec::with_capacity(len);
    if q <= 256 {
        entries.extend(value.to_radix_le(q).into_iter().map(u32::from));
        if value.is_zero() {
            entries.clear();
        }
        entries.resize(len, 0);
    } else {
        let qb = BigUint::from(q);
        for _ in 0..len {
            let d = (&value % &qb).to_u32().expect("digit fits");
            entries.push(d);
            value /= &qb;
        }
    }
    Ok(FieldVec::from_raw(q, entries))
}
