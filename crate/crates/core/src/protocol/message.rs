use crate::bits::BitString;
use crate::error::{format, param, Result};
use crate::gfq::{check_modulus, pack_base_q, packed_width, unpack_from, FieldVec};

pub const MESSAGE_MAGIC: &[u8; 4] = b"URK1";
/// Magic plus six little-endian `u64` fields.
pub const HEADER_BYTES: usize = 4 + 6 * 8;

/// `(L + 1) · ⌈rows · log₂ q⌉`.
pub fn payload_bits_for(q: u32, max_level: u32, rows: usize) -> u64 {
    (u64::from(max_level) + 1) * packed_width(q, rows)
}

/// Alice's message: one sketch per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrMessage {
    n: usize,
    k: usize,
    q: u32,
    max_level: u32,
    rows: usize,
    seed: u64,
    sketches: Vec<FieldVec>,
}

impl UrMessage {
    pub fn new(
        n: usize,
        k: usize,
        seed: u64,
        sketches: Vec<FieldVec>,
    ) -> Result<Self> {
        let Some(first) = sketches.first() else {
            return param("a message needs at least one level");
        };
        let q = first.modulus();
        let rows = first.len();
        if sketches.iter().any(|v| v.modulus() != q || v.len() != rows) {
            return param("level sketches differ in shape");
        }
        let max_level = u32::try_from(sketches.len() - 1)
            .map_err(|_| crate::Error::Parameter("too many levels".into()))?;
        Ok(Self { n, k, q, max_level, rows, seed, sketches })
    }

    pub(crate) fn zeros(n: usize, k: usize, q: u32, max_level: u32, rows: usize, seed: u64) -> Self {
        let sketches = (0..=max_level).map(|_| FieldVec::zeros(q, rows)).collect();
        Self { n, k, q, max_level, rows, seed, sketches }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sketches(&self) -> &[FieldVec] {
        &self.sketches
    }

    pub fn level(&self, j: u32) -> &FieldVec {
        &self.sketches[j as usize]
    }

    pub(crate) fn sketches_mut(&mut self) -> &mut [FieldVec] {
        &mut self.sketches
    }

    pub fn payload_bits(&self) -> u64 {
        payload_bits_for(self.q, self.max_level, self.rows)
    }

    /// Header plus payload padded to a byte, in bits.
    pub fn total_bits(&self) -> u64 {
        8 * (HEADER_BYTES as u64 + self.payload_bits().div_ceil(8))
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.payload_bits().div_ceil(8) as usize);
        out.extend_from_slice(MESSAGE_MAGIC);
        for field in [
            self.n as u64,
            self.k as u64,
            u64::from(self.q),
            u64::from(self.max_level),
            self.rows as u64,
            self.seed,
        ] {
            out.extend_from_slice(&field.to_le_bytes());
        }
        let mut payload = BitString::new();
        for v in &self.sketches {
            payload.extend(&pack_base_q(v));
        }
        out.extend_from_slice(payload.as_bytes());
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES {
            return format(format!("message truncated: {} bytes, header needs {HEADER_BYTES}", bytes.len()));
        }
        if &bytes[..4] != MESSAGE_MAGIC {
            return format("bad message magic");
        }
        let field = |t: usize| u64::from_le_bytes(bytes[4 + 8 * t..12 + 8 * t].try_into().expect("8 bytes"));
        let to_usize = |v: u64, what: &str| {
            usize::try_from(v).map_err(|_| crate::Error::Format(format!("{what} {v} does not fit")))
        };
        let n = to_usize(field(0), "n")?;
        let k = to_usize(field(1), "k")?;
        let q = u32::try_from(field(2)).map_err(|_| crate::Error::Format("modulus does not fit".into()))?;
        check_modulus(q).map_err(|e| crate::Error::Format(e.to_string()))?;
        let max_level = u32::try_from(field(3))
            .ok()
            .filter(|&l| l <= 64)
            .ok_or_else(|| crate::Error::Format("level count out of range".into()))?;
        let rows = to_usize(field(4), "row count")?;
        let seed = field(5);

        let payload = &bytes[HEADER_BYTES..];
        // every row costs more than one bit, so this bounds the work below
        if (rows as u128) * (u128::from(max_level) + 1) > payload.len() as u128 * 8 {
            return format(format!("payload truncated: {} bytes for {rows} rows", payload.len()));
        }
        let bits = payload_bits_for(q, max_level, rows);
        let need = bits.div_ceil(8);
        if (payload.len() as u64) < need {
            return format(format!("payload truncated: {} bytes, need {need}", payload.len()));
        }
        if payload.len() as u64 > need {
            return format(format!("{} trailing bytes after payload", payload.len() as u64 - need));
        }
        let stream = BitString::from_bytes(payload, bits)?;
        if stream.as_bytes() != payload {
            return format("nonzero padding bits");
        }
        let mut reader = stream.reader();
        let sketches = (0..=max_level)
            .map(|_| unpack_from(&mut reader, q, rows))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, k, q, max_level, rows, seed, sketches })
    }
}
