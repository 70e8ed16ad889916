//! Stream container.
//!
//! ```text
//! "SMC1"
//! u32 width, u32 height, u32 frame_count, u8 qp, u32 intra_period, u8 tools
//! frame_count × { u32 length, payload }            (coding order)
//!
//! payload = u32 coded_len, coded frame bytes,
//!           u8 section_count × { u32 poc, flag section }
//! ```
//!
//! All integers little-endian. `tools` bit 0 = RFS, bit 1 = PFE; other bits
//! must be zero.

use serde::{Deserialize, Serialize};

use super::{CodecConfig, GOP};
use crate::error::{Error, Result};
use crate::stew::PfeFlagSection;

pub const MAGIC: [u8; 4] = *b"SMC1";
const MAX_DIMENSION: u32 = 1 << 14;
const MAX_FRAMES: u32 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolFlags {
    pub rfs: bool,
    pub pfe: bool,
    /// Fuse synthesis and enhancement into one inference where both apply.
    /// Changes only how much work is done, so it is not written to the
    /// stream.
    pub jise: bool,
}

impl Default for ToolFlags {
    fn default() -> Self {
        Self::ALL
    }
}

impl ToolFlags {
    pub const ALL: ToolFlags = ToolFlags {
        rfs: true,
        pfe: true,
        jise: true,
    };
    pub const NONE: ToolFlags = ToolFlags {
        rfs: false,
        pfe: false,
        jise: false,
    };

    /// Bit 0 RFS, bit 1 PFE.
    pub fn to_byte(self) -> u8 {
        u8::from(self.rfs) | u8::from(self.pfe) << 1
    }

    /// Reads the signalled tools; joint inference defaults to on.
    pub fn from_byte(b: u8) -> Result<Self> {
        if b & !0b11 != 0 {
            return Err(Error::Malformed(format!("unknown tool bits {b:#04x}")));
        }
        Ok(Self {
            rfs: b & 1 != 0,
            pfe: b & 2 != 0,
            jise: true,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamHeader {
    pub width: u32,
    pub height: u32,
    pub frame_count: u32,
    pub qp: u8,
    pub intra_period: u32,
    pub tools: ToolFlags,
}

impl StreamHeader {
    /// The codec configuration a decoder needs; search and λ settings only
    /// matter to the encoder.
    pub fn config(&self) -> CodecConfig {
        CodecConfig {
            qp: self.qp,
            intra_period: self.intra_period,
            ..CodecConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let dims_ok = |v: u32| v > 0 && v <= MAX_DIMENSION && v.is_multiple_of(2);
        if !dims_ok(self.width) || !dims_ok(self.height) {
            return Err(Error::Malformed(format!("frame size {}x{}", self.width, self.height)));
        }
        if self.frame_count > MAX_FRAMES {
            return Err(Error::Malformed(format!("{} frames", self.frame_count)));
        }
        if self.qp > 51 {
            return Err(Error::Malformed(format!("qp {}", self.qp)));
        }
        if self.intra_period == 0 || !self.intra_period.is_multiple_of(GOP) {
            return Err(Error::Malformed(format!("intra period {}", self.intra_period)));
        }
        Ok(())
    }
}

/// One coded frame with the flag sections that ride along with it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FramePayload {
    pub coded: Vec<u8>,
    pub sections: Vec<PfeFlagSection>,
}

impl FramePayload {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.coded.len() + 16);
        out.extend_from_slice(&len_u32(self.coded.len())?.to_le_bytes());
        out.extend_from_slice(&self.coded);
        let n = u8::try_from(self.sections.len()).map_err(|_| Error::Malformed("too many flag sections".into()))?;
        out.push(n);
        for s in &self.sections {
            out.extend_from_slice(&s.poc.to_le_bytes());
            s.write(&mut out);
        }
        Ok(out)
    }

    pub fn parse(data: &[u8]) -> Result<Self> {
        let mut c = Cursor::new(data);
        let n = c.u32()? as usize;
        let coded = c.take(n)?.to_vec();
        let count = c.u8()?;
        let mut sections = Vec::with_capacity(usize::from(count));
        for _ in 0..count {
            let poc = c.u32()?;
            let (s, used) = PfeFlagSection::parse(poc, c.rest())?;
            c.take(used)?;
            sections.push(s);
        }
        if !c.rest().is_empty() {
            return Err(Error::Malformed("trailing bytes after frame payload".into()));
        }
        Ok(Self { coded, sections })
    }
}

fn len_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Malformed("payload larger than 4 GiB".into()))
}

pub fn write_container(header: &StreamHeader, payloads: &[FramePayload]) -> Result<Vec<u8>> {
    header.validate()?;
    if payloads.len() != header.frame_count as usize {
        return Err(Error::Malformed(format!(
            "{} payloads for {} frames",
            payloads.len(),
            header.frame_count
        )));
    }
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    for v in [header.width, header.height, header.frame_count] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(header.qp);
    out.extend_from_slice(&header.intra_period.to_le_bytes());
    out.push(header.tools.to_byte());
    for p in payloads {
        let bytes = p.to_bytes()?;
        out.extend_from_slice(&len_u32(bytes.len())?.to_le_bytes());
        out.extend_from_slice(&bytes);
    }
    Ok(out)
}

pub fn read_container(data: &[u8]) -> Result<(StreamHeader, Vec<FramePayload>)> {
    let mut c = Cursor::new(data);
    let magic: [u8; 4] = c.take(4)?.try_into().expect("four bytes");
    if magic != MAGIC {
        if magic[..3] == MAGIC[..3] && magic[3].is_ascii_digit() {
            return Err(Error::Version(magic[3] - b'0'));
        }
        return Err(Error::BadMagic(magic));
    }
    let header = StreamHeader {
        width: c.u32()?,
        height: c.u32()?,
        frame_count: c.u32()?,
        qp: c.u8()?,
        intra_period: c.u32()?,
        tools: ToolFlags::from_byte(c.u8()?)?,
    };
    header.validate()?;
    let mut payloads = Vec::new();
    for _ in 0..header.frame_count {
        let n = c.u32()? as usize;
        payloads.push(FramePayload::parse(c.take(n)?)?);
    }
    if !c.rest().is_empty() {
        return Err(Error::Malformed("trailing bytes after last frame".into()));
    }
    Ok((header, payloads))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Truncated);
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn rest(&self) -> &'a [u8] {
        &self.data[self.pos..]
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }
}
