//! Flat binary model container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        4 bytes  "RLAB"
//! version      u32      currently 1
//! layer_count  u32
//! per layer:   input_dim u32, output_dim u32, activation code u32
//!              (0 = ReLU, 1 = Identity, 2 = Softmax)
//! seed         u64
//! param_count  u64
//! params       f64 x param_count, little-endian
//! ```

use std::fs;
use std::path::Path;

use super::{Activation, LayerSpec, MlpModel, NnError};

const MAGIC: &[u8; 4] = b"RLAB";
const VERSION: u32 = 1;

pub fn save_model(model: &MlpModel, path: &Path) -> Result<(), NnError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(model.layers().len() as u32).to_le_bytes());
    for spec in model.layers() {
        buf.extend_from_slice(&(spec.input_dim as u32).to_le_bytes());
        buf.extend_from_slice(&(spec.output_dim as u32).to_le_bytes());
        buf.extend_from_slice(&spec.activation.code().to_le_bytes());
    }
    buf.extend_from_slice(&model.seed().to_le_bytes());
    buf.extend_from_slice(&(model.params().len() as u64).to_le_bytes());
    for &p in model.params() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MlpModel, NnError> {
    let bytes = fs::read(path)?;
    let mut cursor = Cursor { bytes: &bytes, pos: 0 };

    let magic = cursor.take(4, "magic")?;
    if magic != MAGIC {
        return Err(NnError::Parse {
            offset: 0,
            reason: format!("bad magic {:02x?}, expected {:02x?}", magic, MAGIC),
        });
    }
    let version = cursor.u32("version")?;
    if version != VERSION {
        return Err(NnError::Parse {
            offset: 4,
            reason: format!("unsupported version {}", version),
        });
    }
    let layer_count = cursor.u32("layer count")? as usize;
    let mut layers = Vec::with_capacity(layer_count);
    for i in 0..layer_count {
        let at = cursor.pos;
        let input_dim = cursor.u32("input dim")? as usize;
        let output_dim = cursor.u32("output dim")? as usize;
        let code = cursor.u32("activation code")?;
        let activation = Activation::from_code(code).ok_or(NnError::Parse {
            offset: at + 8,
            reason: format!("unknown activation code {} in layer {}", code, i),
        })?;
        layers.push(LayerSpec::new(input_dim, output_dim, activation));
    }
    let seed = cursor.u64("seed")?;
    let param_count = cursor.u64("param count")? as usize;
    let mut params = Vec::with_capacity(param_count);
    for _ in 0..param_count {
        let at = cursor.pos;
        let raw = cursor.take(8, "param")?;
        let v = f64::from_le_bytes(raw.try_into().unwrap());
        if !v.is_finite() {
            return Err(NnError::Parse {
                offset: at,
                reason: format!("non-finite parameter {}", v),
            });
        }
        params.push(v);
    }
    if cursor.pos != bytes.len() {
        return Err(NnError::Parse {
            offset: cursor.pos,
            reason: format!("{} trailing bytes", bytes.len() - cursor.pos),
        });
    }
    MlpModel::from_params(layers, params, seed)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], NnError> {
        if self.pos + n > self.bytes.len() {
            return Err(NnError::Parse {
                offset: self.pos,
                reason: format!("truncated while reading {}", what),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, NnError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}
