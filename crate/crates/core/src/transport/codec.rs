//! Canonical byte encoding.
//!
//! Every field is written as a 4-byte big-endian length followed by its bytes.
//! Integers are written as lowercase big-endian hex without leading zeros
//! (`"0"` for zero). Decoding rejects anything that the encoder could not have
//! produced, so `encode` is injective and `decode(encode(m)) == m`.

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("malformed message: {0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> CodecError {
    CodecError::Malformed(msg.into())
}

#[derive(Debug, Default, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        let len = u32::try_from(b.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(b);
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn uint(&mut self, v: &BigUint) -> &mut Self {
        self.str(&v.to_str_radix(16))
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.str(&format!("{v:x}"))
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.u64(v as u64)
    }

    pub fn put<T: Canonical>(&mut self, v: &T) -> &mut Self {
        v.encode_into(self);
        self
    }

    /// Length-prefixed sequence.
    pub fn seq<T: Canonical>(&mut self, items: &[T]) -> &mut Self {
        self.u64(items.len() as u64);
        for it in items {
            it.encode_into(self);
        }
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let header = self
            .buf
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| malformed("truncated length prefix"))?;
        let len = u32::from_be_bytes(header.try_into().expect("4 bytes")) as usize;
        let start = self.pos + 4;
        let body = self
            .buf
            .get(start..start + len)
            .ok_or_else(|| malformed("truncated field"))?;
        self.pos = start + len;
        Ok(body)
    }

    pub fn str(&mut self) -> Result<&'a str, CodecError> {
        std::str::from_utf8(self.bytes()?).map_err(|_| malformed("field is not utf-8"))
    }

    pub fn uint(&mut self) -> Result<BigUint, CodecError> {
        let s = self.str()?;
        let canonical = !s.is_empty()
            && s.bytes()
                .all(|c| c.is_ascii_digit() || (b'a'..=b'f').contains(&c))
            && (s == "0" || !s.starts_with('0'));
        if !canonical {
            return Err(malformed(format!("non-canonical integer {s:?}")));
        }
        BigUint::parse_bytes(s.as_bytes(), 16).ok_or_else(|| malformed("bad hex"))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        let v = self.uint()?;
        u64::try_from(&v).map_err(|_| malformed("integer exceeds 64 bits"))
    }

    pub fn bool(&mut self) -> Result<bool, CodecError> {
        match self.u64()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(malformed(format!("bad bool {v}"))),
        }
    }

    pub fn get<T: Canonical>(&mut self) -> Result<T, CodecError> {
        T::decode_from(self)
    }

    pub fn seq<T: Canonical>(&mut self) -> Result<Vec<T>, CodecError> {
        let len = self.u64()?;
        // each element takes at least one length prefix
        if len > (self.buf.len() - self.pos) as u64 / 4 {
            return Err(malformed("sequence length exceeds input"));
        }
        (0..len).map(|_| T::decode_from(self)).collect()
    }

    pub fn expect_tag(&mut self, tag: &str) -> Result<(), CodecError> {
        let got = self.str()?;
        if got != tag {
            return Err(malformed(format!("expected tag {tag:?}, got {got:?}")));
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.pos != self.buf.len() {
            return Err(malformed("trailing bytes"));
        }
        Ok(())
    }
}

/// Types with a single canonical byte representation.
pub trait Canonical: Sized {
    fn encode_into(&self, enc: &mut Encoder);
    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError>;

    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        self.encode_into(&mut enc);
        enc.finish()
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut dec = Decoder::new(bytes);
        let v = Self::decode_from(&mut dec)?;
        dec.finish()?;
        Ok(v)
    }
}

impl Canonical for BigUint {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.uint(self);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.uint()
    }
}

impl Canonical for u64 {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.u64(*self);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.u64()
    }
}

impl Canonical for String {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.str(self);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.str().map(str::to_owned)
    }
}

impl Canonical for Vec<u8> {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.bytes(self);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.bytes().map(<[u8]>::to_vec)
    }
}
