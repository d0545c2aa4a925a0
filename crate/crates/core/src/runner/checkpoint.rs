//! Binary checkpoint, little-endian throughout:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "SATRCKPT"
//! 8       4     u32 format version (1)
//! 12      4     u32 optimizer (0 satr, 1 ec, 2 ec_tr, 3 es)
//! 16      4     u32 parameter kind (0 Bernoulli means, 1 real weights)
//! 20      8     u64 run seed
//! 28      8     u64 next generation index (the only RNG counter state)
//! 36      8     f64 clamp eps
//! 44      8     u64 parameter count d
//! 52      8*d   f64 parameters
//! ..      8     u64 config length L
//! ..      L     run config as UTF-8 TOML
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::optim::OptimizerKind;

pub const MAGIC: &[u8; 8] = b"SATRCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Bernoulli,
    Weights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub optimizer: OptimizerKind,
    pub kind: ParamKind,
    pub run_seed: u64,
    pub next_generation: u64,
    pub clamp_eps: f64,
    pub params: Vec<f64>,
    pub config_toml: String,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 8 * self.params.len() + self.config_toml.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.optimizer.tag().to_le_bytes());
        let kind: u32 = match self.kind {
            ParamKind::Bernoulli => 0,
            ParamKind::Weights => 1,
        };
        out.extend_from_slice(&kind.to_le_bytes());
        out.extend_from_slice(&self.run_seed.to_le_bytes());
        out.extend_from_slice(&self.next_generation.to_le_bytes());
        out.extend_from_slice(&self.clamp_eps.to_le_bytes());
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out.extend_from_slice(&(self.config_toml.len() as u64).to_le_bytes());
        out.extend_from_slice(self.config_toml.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let opt_tag = r.u32()?;
        let optimizer = OptimizerKind::from_tag(opt_tag)
            .ok_or_else(|| Error::Checkpoint(format!("unknown optimizer tag {opt_tag}")))?;
        let kind = match r.u32()? {
            0 => ParamKind::Bernoulli,
            1 => ParamKind::Weights,
            k => return Err(Error::Checkpoint(format!("unknown parameter kind {k}"))),
        };
        let run_seed = r.u64()?;
        let next_generation = r.u64()?;
        let clamp_eps = f64::from_bits(r.u64()?);
        let d = r.u64()? as usize;
        if d > (bytes.len() - r.pos) / 8 {
            return Err(Error::Checkpoint("truncated parameters".into()));
        }
        let params = (0..d).map(|_| r.u64().map(f64::from_bits)).collect::<Result<Vec<_>>>()?;
        let len = r.u64()? as usize;
        let config_toml = String::from_utf8(r.take(len)?.to_vec())
            .map_err(|_| Error::Checkpoint("config is not UTF-8".into()))?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Self {
            optimizer,
            kind,
            run_seed,
            next_generation,
            clamp_eps,
            params,
            config_toml,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("unexpected end of file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            optimizer: OptimizerKind::EcTr,
            kind: ParamKind::Bernoulli,
            run_seed: 42,
            next_generation: 17,
            clamp_eps: 1e-3,
            params: vec![0.25, 0.5, 0.999],
            config_toml: "env = \"pattern_match\"\n".into(),
        }
    }

    #[test]
    fn layout_offsets() {
        let b = sample().to_bytes();
        assert_eq!(&b[0..8], MAGIC);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(b[20..28].try_into().unwrap()), 42);
        assert_eq!(u64::from_le_bytes(b[28..36].try_into().unwrap()), 17);
        assert_eq!(u64::from_le_bytes(b[44..52].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(b[52..60].try_into().unwrap()), 0.25);
        assert_eq!(b.len(), 52 + 24 + 8 + 22);
    }

    #[test]
    fn round_trip_and_corruption() {
        let c = sample();
        let b = c.to_bytes();
        assert_eq!(Checkpoint::from_bytes(&b).unwrap(), c);
        assert!(Checkpoint::from_bytes(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut bad = b.clone();
        bad[8] = 9;
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut long = b;
        long.push(0);
        assert!(Checkpoint::from_bytes(&long).is_err());
    }
}
