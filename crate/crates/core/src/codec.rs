//! Binary container encoding: 4-byte magic, 1-byte version, then big-endian
//! fields. Group elements are fixed-width; everything variable is u32
//! length-prefixed.

use thiserror::Error;

use crate::pairing::{scalar_from_bytes, scalar_to_bytes, GElem, GtElem, PairingError, Scalar, G_BYTES, GT_BYTES, ZP_BYTES};

pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("bad magic: expected {expected:?}")]
    Magic { expected: [u8; 4] },
    #[error("unsupported format version {0}")]
    Version(u8),
    #[error("truncated input")]
    Truncated,
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("invalid utf-8 string")]
    Utf8,
    #[error("invalid field: {0}")]
    Invalid(String),
    #[error(transparent)]
    Element(#[from] PairingError),
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn with_header(magic: &[u8; 4]) -> Self {
        let mut w = Writer { buf: Vec::new() };
        w.buf.extend_from_slice(magic);
        w.buf.push(FORMAT_VERSION);
        w
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn raw(&mut self, b: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(b);
        self
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.u32(b.len() as u32);
        self.raw(b)
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn g(&mut self, e: &GElem) -> &mut Self {
        self.raw(&e.to_bytes())
    }

    pub fn gt(&mut self, e: &GtElem) -> &mut Self {
        self.raw(&e.to_bytes())
    }

    pub fn zp(&mut self, s: &Scalar) -> &mut Self {
        self.raw(&scalar_to_bytes(s))
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn with_header(buf: &'a [u8], magic: &[u8; 4]) -> Result<Self, CodecError> {
        let mut r = Reader::new(buf);
        if r.take(4)? != magic {
            return Err(CodecError::Magic { expected: *magic });
        }
        let v = r.u8()?;
        if v != FORMAT_VERSION {
            return Err(CodecError::Version(v));
        }
        Ok(r)
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(CodecError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn string(&mut self) -> Result<String, CodecError> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| CodecError::Utf8)
    }

    pub fn g(&mut self) -> Result<GElem, CodecError> {
        Ok(GElem::from_bytes(self.take(G_BYTES)?)?)
    }

    pub fn gt(&mut self) -> Result<GtElem, CodecError> {
        Ok(GtElem::from_bytes(self.take(GT_BYTES)?)?)
    }

    pub fn zp(&mut self) -> Result<Scalar, CodecError> {
        Ok(scalar_from_bytes(self.take(ZP_BYTES)?)?)
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn finish(self) -> Result<(), CodecError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(CodecError::Trailing(n)),
        }
    }
}
