//! OSC 1.0 encoding for the two engine addresses.
//!
//! `/sonopt/front`: `,ii` followed by `2N` `f` tags. Arguments are the
//! generation index, the point count `N` and the interleaved objective
//! values `f1_0, f2_0, f1_1, ...`.
//!
//! `/sonopt/param`: `,sf` with a live-tunable parameter name and value.
//!
//! Strings are NUL-terminated and zero-padded to a multiple of four bytes;
//! numbers are big-endian.

use thiserror::Error;

use crate::engine::LiveParam;

pub const FRONT_ADDRESS: &str = "/sonopt/front";
pub const PARAM_ADDRESS: &str = "/sonopt/param";
/// Packets above this size are refused rather than fragmented.
pub const MAX_PACKET_BYTES: usize = 60 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OscError {
    #[error("malformed packet: {0}")]
    MalformedPacket(&'static str),
    #[error("unknown address `{0}`")]
    UnknownAddress(String),
    #[error("argument count does not match declared point count")]
    CountMismatch,
    #[error("unknown or fixed parameter `{0}`")]
    UnknownParam(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscFrontMessage {
    pub generation_index: i32,
    pub points: Vec<(f32, f32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscParamMessage {
    pub param: LiveParam,
    pub value: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OscMessage {
    Front(OscFrontMessage),
    Param(OscParamMessage),
}

fn pad4(n: usize) -> usize {
    (n + 3) & !3
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(s.as_bytes());
    let total = pad4(s.len() + 1);
    buf.resize(buf.len() + total - s.len(), 0);
}

pub fn encode_front(msg: &OscFrontMessage) -> Vec<u8> {
    let n = msg.points.len();
    let mut tags = String::with_capacity(3 + 2 * n);
    tags.push_str(",ii");
    tags.extend(std::iter::repeat_n('f', 2 * n));
    let mut buf = Vec::with_capacity(32 + tags.len() + 8 * n);
    put_str(&mut buf, FRONT_ADDRESS);
    put_str(&mut buf, &tags);
    buf.extend_from_slice(&msg.generation_index.to_be_bytes());
    buf.extend_from_slice(&(n as i32).to_be_bytes());
    for &(a, b) in &msg.points {
        buf.extend_from_slice(&a.to_be_bytes());
        buf.extend_from_slice(&b.to_be_bytes());
    }
    buf
}

pub fn encode_param(msg: &OscParamMessage) -> Vec<u8> {
    let mut buf = Vec::with_capacity(48);
    put_str(&mut buf, PARAM_ADDRESS);
    put_str(&mut buf, ",sf");
    put_str(&mut buf, msg.param.name());
    buf.extend_from_slice(&msg.value.to_be_bytes());
    buf
}

pub fn encode(msg: &OscMessage) -> Vec<u8> {
    match msg {
        OscMessage::Front(m) => encode_front(m),
        OscMessage::Param(m) => encode_param(m),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn string(&mut self) -> Result<&'a str, OscError> {
        let rest = &self.bytes[self.pos..];
        let nul = rest
            .iter()
            .position(|&b| b == 0)
            .ok_or(OscError::MalformedPacket("unterminated string"))?;
        let padded = pad4(nul + 1);
        if padded > rest.len() {
            return Err(OscError::MalformedPacket("string padding truncated"));
        }
        if rest[nul..padded].iter().any(|&b| b != 0) {
            return Err(OscError::MalformedPacket("non-zero string padding"));
        }
        let s = std::str::from_utf8(&rest[..nul])
            .map_err(|_| OscError::MalformedPacket("string is not UTF-8"))?;
        self.pos += padded;
        Ok(s)
    }

    fn word(&mut self) -> Result<[u8; 4], OscError> {
        let w = self
            .bytes
            .get(self.pos..self.pos + 4)
            .ok_or(OscError::MalformedPacket("argument data truncated"))?;
        self.pos += 4;
        Ok([w[0], w[1], w[2], w[3]])
    }

    fn done(&self) -> Result<(), OscError> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(OscError::MalformedPacket("trailing bytes"))
        }
    }
}

pub fn decode_packet(bytes: &[u8]) -> Result<OscMessage, OscError> {
    if bytes.len() > MAX_PACKET_BYTES {
        return Err(OscError::CountMismatch);
    }
    if bytes.is_empty() || !bytes.len().is_multiple_of(4) {
        return Err(OscError::MalformedPacket("size is not a multiple of 4"));
    }
    let mut r = Reader { bytes, pos: 0 };
    let address = r.string()?;
    if !address.starts_with('/') {
        return Err(OscError::MalformedPacket("address must start with '/'"));
    }
    let tags = r.string()?;
    let tags = tags.strip_prefix(',').ok_or(OscError::MalformedPacket(
        "type tag string must start with ','",
    ))?;
    match address {
        FRONT_ADDRESS => decode_front(&mut r, tags).map(OscMessage::Front),
        PARAM_ADDRESS => decode_param(&mut r, tags).map(OscMessage::Param),
        other => Err(OscError::UnknownAddress(other.to_owned())),
    }
}

fn decode_front(r: &mut Reader<'_>, tags: &str) -> Result<OscFrontMessage, OscError> {
    let t = tags.as_bytes();
    if t.len() < 2 || t[0] != b'i' || t[1] != b'i' {
        return Err(OscError::MalformedPacket("front expects ,ii header tags"));
    }
    if t[2..].iter().any(|&c| c != b'f') {
        return Err(OscError::MalformedPacket("front values must be float32"));
    }
    let floats = t.len() - 2;
    let generation_index = i32::from_be_bytes(r.word()?);
    let count = i32::from_be_bytes(r.word()?);
    if count < 1 || floats != 2 * count as usize {
        return Err(OscError::CountMismatch);
    }
    let mut points = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let a = f32::from_be_bytes(r.word()?);
        let b = f32::from_be_bytes(r.word()?);
        points.push((a, b));
    }
    r.done()?;
    Ok(OscFrontMessage {
        generation_index,
        points,
    })
}

fn decode_param(r: &mut Reader<'_>, tags: &str) -> Result<OscParamMessage, OscError> {
    if tags != "sf" {
        return Err(OscError::MalformedPacket("param expects ,sf tags"));
    }
    let name = r.string()?;
    let value = f32::from_be_bytes(r.word()?);
    r.done()?;
    let param = name
        .parse::<LiveParam>()
        .map_err(|_| OscError::UnknownParam(name.to_owned()))?;
    Ok(OscParamMessage { param, value })
}
