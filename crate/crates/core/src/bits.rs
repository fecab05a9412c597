//! Growable MSB-first bit strings.

use crate::error::{format, Result};
use num_bigint::BigUint;

/// A sequence of bits stored MSB-first inside bytes. Unused trailing bits of
/// the last byte are always zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: u64,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let byte = (self.len / 8) as usize;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, i: u64) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[(i / 8) as usize] & (0x80 >> (i % 8)) != 0
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: u64, width: u32) {
        debug_assert!(width == 64 || value >> width == 0);
        for i in (0..width).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    /// Appends `value` as exactly `width` bits, most significant first.
    pub fn push_big(&mut self, value: &BigUint, width: u64) {
        debug_assert!(value.bits() <= width);
        for i in (0..width).rev() {
            self.push(value.bit(i));
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    /// Bytes holding the bits, zero-padded to a byte boundary.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Reinterprets the first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: u64) -> Result<Self> {
        if len > bytes.len() as u64 * 8 {
            return format(format!("{len} bits requested from {} bytes", bytes.len()));
        }
        let nbytes = len.div_ceil(8) as usize;
        let mut out = bytes[..nbytes].to_vec();
        if !len.is_multiple_of(8) {
            let keep = 0xFFu8 << (8 - len % 8);
            out[nbytes - 1] &= keep;
        }
        Ok(Self { bytes: out, len })
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }

    pub fn count_ones(&self) -> u64 {
        self.bytes.iter().map(|b| u64::from(b.count_ones())).sum()
    }
}

/// Sequential reader over a [`BitString`].
#[derive(Debug)]
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: u64,
}

impl BitReader<'_> {
    pub fn remaining(&self) -> u64 {
        self.bits.len - self.pos
    }

    fn need(&self, width: u64) -> Result<()> {
        if width > self.remaining() {
            return format(format!(
                "truncated bit string: need {width} bits, {} left",
                self.remaining()
            ));
        }
        Ok(())
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        self.need(1)?;
        let b = self.bits.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: u32) -> Result<u64> {
        self.need(u64::from(width))?;
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn read_big(&mut self, width: u64) -> Result<BigUint> {
        self.need(width)?;
        let mut sub = BitString::new();
        for _ in 0..width {
            sub.push(self.read_bit()?);
        }
        // left-align into whole bytes then shift back down
        let pad = (8 - width % 8) % 8;
        Ok(BigUint::from_bytes_be(sub.as_bytes()) >> pad)
    }

    pub fn read_bits(&mut self, width: u64) -> Result<BitString> {
        self.need(width)?;
        let mut sub = BitString::new();
        for _ in 0..width {
            sub.push(self.read_bit()?);
        }
        Ok(sub)
    }
}
