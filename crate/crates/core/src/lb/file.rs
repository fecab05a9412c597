//! On-disk layout of an encoding:
//!
//! * `n`, `m`, `R` as little-endian `u64`
//! * message length as little-endian `u64`, then the message bytes
//! * the `R` round bits followed by `|B|` in `⌈log₂ n⌉` bits, zero padded
//!   to a byte
//! * the colex rank of `B`, big-endian, in `⌈⌈log₂ C(n, |B|)⌉ / 8⌉` bytes

use super::codec::EncoderOutput;
use super::subset::{subset_rank, subset_unrank, SubsetCode};
use crate::bits::BitString;
use crate::combinatorics::ceil_log2_u64;
use crate::error::{format, Result};
use num_bigint::BigUint;

pub fn write_encoding(out: &EncoderOutput) -> Result<Vec<u8>> {
    let code = subset_rank(out.n, &out.rest)?;
    let mut bytes = Vec::new();
    for v in [out.n as u64, out.m as u64, out.rounds() as u64, out.message.len() as u64] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&out.message);
    let mut bits = BitString::new();
    for &b in &out.bits {
        bits.push(b);
    }
    bits.push_uint(out.rest.len() as u64, ceil_log2_u64(out.n as u64));
    bytes.extend_from_slice(bits.as_bytes());
    let width = code.bit_length().div_ceil(8) as usize;
    let rank = if code.rank == BigUint::ZERO { Vec::new() } else { code.rank.to_bytes_be() };
    bytes.extend(std::iter::repeat_n(0u8, width - rank.len()));
    bytes.extend_from_slice(&rank);
    Ok(bytes)
}

fn take<'a>(bytes: &mut &'a [u8], len: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < len {
        return format(format!("truncated {what}: need {len} bytes, have {}", bytes.len()));
    }
    let (head, tail) = bytes.split_at(len);
    *bytes = tail;
    Ok(head)
}

fn take_u64(bytes: &mut &[u8], what: &str) -> Result<u64> {
    Ok(u64::from_le_bytes(take(bytes, 8, what)?.try_into().expect("8 bytes")))
}

fn to_usize(v: u64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| crate::Error::Format(format!("{what} {v} does not fit")))
}

pub fn read_encoding(mut bytes: &[u8]) -> Result<EncoderOutput> {
    let input = &mut bytes;
    let n = to_usize(take_u64(input, "header")?, "n")?;
    let m = to_usize(take_u64(input, "header")?, "m")?;
    let rounds = to_usize(take_u64(input, "header")?, "round count")?;
    let msg_len = to_usize(take_u64(input, "message length")?, "message length")?;
    if m > n {
        return format(format!("m = {m} exceeds n = {n}"));
    }
    let message = take(input, msg_len, "message")?.to_vec();
    let width = ceil_log2_u64(n as u64);
    let nbits = rounds as u64 + u64::from(width);
    let raw = take(input, nbits.div_ceil(8) as usize, "round bits")?;
    let bits = BitString::from_bytes(raw, nbits)?;
    if bits.as_bytes() != raw {
        return format("nonzero padding bits");
    }
    let mut reader = bits.reader();
    let round_bits = (0..rounds).map(|_| reader.read_bit()).collect::<Result<Vec<_>>>()?;
    let w = to_usize(reader.read_uint(width)?, "|B|")?;
    if w > m {
        return format(format!("|B| = {w} exceeds m = {m}"));
    }
    let mut code = SubsetCode { n, w, rank: BigUint::ZERO };
    let rank_bytes = take(input, code.bit_length().div_ceil(8) as usize, "rank")?;
    if !input.is_empty() {
        return format(format!("{} trailing bytes", input.len()));
    }
    code.rank = BigUint::from_bytes_be(rank_bytes);
    let rest = subset_unrank(&code).map_err(|e| crate::Error::Format(e.to_string()))?;
    Ok(EncoderOutput { n, m, message, rest, bits: round_bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lb::{enc, random_subset, LbParams};
    use crate::protocol::{make_stub, StubKind};

    #[test]
    fn round_trip_with_stubs() {
        let params = LbParams::new(4096, 64, 3).unwrap();
        let set = random_subset(4096, 512, 3);
        for kind in [StubKind::Oracle, StubKind::AlwaysFail, StubKind::IidFailure(0.5)] {
            let p = make_stub(kind, 4096, 1, 3).unwrap();
            let out = enc(&set, &p, &params).unwrap();
            let bytes = write_encoding(&out).unwrap();
            assert_eq!(read_encoding(&bytes).unwrap(), out);
            let bits = crate::lb::encoding_bit_length(&out);
            // 32 header bytes plus byte padding of the two trailing blocks
            assert!(bytes.len() as u64 * 8 >= bits);
            assert!(bytes.len() as u64 * 8 <= bits + 32 * 8 + 16);
        }
    }

    #[test]
    fn truncation_and_trailing_rejected() {
        let params = LbParams::new(4096, 64, 1).unwrap();
        let set = random_subset(4096, 512, 1);
        let p = make_stub(StubKind::Oracle, 4096, 1, 1).unwrap();
        let bytes = write_encoding(&enc(&set, &p, &params).unwrap()).unwrap();
        assert!(read_encoding(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(read_encoding(&long).is_err());
        assert!(read_encoding(&bytes[..10]).is_err());
    }
}
