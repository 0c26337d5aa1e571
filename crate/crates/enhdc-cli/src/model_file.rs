//! Binary model file: header, integrity checksum, then per-member
//! configuration, quantizer bounds and width-clipped class hypervectors.
//!
//! Item memories are stored as seeds, not vectors: regeneration is
//! deterministic and the file stays dominated by the class hypervectors,
//! which is the quantity the size accounting is about.
//!
//! Layout (all integers little endian unless noted):
//!   magic "EHDC" | version u32 | payload_len u64 | sha256(payload) 32B | payload
//! payload:
//!   voting u8 | member_count u32 | k u32 | k x (name_len u32, utf8 name)
//!   feature_count u32
//!   per member:
//!     dim u32 | width_bits u8 | encoder u8 | levels u32 | window u32
//!     seed u64 | retrain_epochs u32
//!     has_quantizer u8 [| q_min f64 | q_max f64]
//!     k x dim class elements as i8 or i16 per width_bits

use std::io::{Cursor, Read};
use std::path::Path;

use sha2::{Digest, Sha256};

use enhdc_core::{
    AssociativeMemory, BaseClassifier, BaseClassifierConfig, DataWidth, EncoderKind,
    EnsembleModel, Hypervector, Quantizer, Seed, Voting,
};

use crate::CliError;

pub const MODEL_MAGIC: [u8; 4] = *b"EHDC";
pub const MODEL_VERSION: u32 = 1;

fn write_string(w: &mut Vec<u8>, s: &str) {
    w.extend_from_slice(&(s.len() as u32).to_le_bytes());
    w.extend_from_slice(s.as_bytes());
}

fn encoder_tag(kind: EncoderKind) -> u8 {
    match kind {
        EncoderKind::Record => 0,
        EncoderKind::NGram => 1,
    }
}

/// Serialize a trained (finalized) ensemble to bytes.
pub fn to_bytes(model: &EnsembleModel) -> Result<Vec<u8>, CliError> {
    let mut payload = Vec::new();
    payload.push(match model.voting() {
        Voting::Hard => 0u8,
        Voting::Soft => 1u8,
    });
    payload.extend_from_slice(&(model.members().len() as u32).to_le_bytes());
    let first = &model.members()[0];
    let k = first.num_classes();
    payload.extend_from_slice(&(k as u32).to_le_bytes());
    for name in first.memory().label_names() {
        write_string(&mut payload, name);
    }
    payload.extend_from_slice(&(first.feature_count() as u32).to_le_bytes());

    for member in model.members() {
        let config = member.config();
        payload.extend_from_slice(&(config.dim as u32).to_le_bytes());
        payload.push(config.width.bits() as u8);
        payload.push(encoder_tag(config.encoder));
        payload.extend_from_slice(&(config.levels as u32).to_le_bytes());
        payload.extend_from_slice(&(config.window as u32).to_le_bytes());
        payload.extend_from_slice(&config.seed.0.to_le_bytes());
        payload.extend_from_slice(&(config.retrain_epochs as u32).to_le_bytes());
        match member.memories().quantizer() {
            Some(q) => {
                payload.push(1);
                payload.extend_from_slice(&q.min().to_le_bytes());
                payload.extend_from_slice(&q.max().to_le_bytes());
            }
            None => payload.push(0),
        }
        for class_hv in member.memory().class_hvs() {
            for &e in class_hv.elements() {
                match config.width {
                    DataWidth::Int8 => {
                        let clipped = config.width.saturate(e) as i8;
                        payload.push(clipped as u8);
                    }
                    DataWidth::Int16 => {
                        let clipped = config.width.saturate(e) as i16;
                        payload.extend_from_slice(&clipped.to_le_bytes());
                    }
                }
            }
        }
    }

    let mut bytes = Vec::with_capacity(payload.len() + 48);
    bytes.extend_from_slice(&MODEL_MAGIC);
    bytes.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&Sha256::digest(&payload));
    bytes.extend_from_slice(&payload);
    Ok(bytes)
}

struct Reader<'a> {
    cursor: Cursor<&'a [u8]>,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader {
            cursor: Cursor::new(bytes),
        }
    }

    fn bytes(&mut self, n: usize) -> Result<Vec<u8>, CliError> {
        let mut buf = vec![0u8; n];
        self.cursor
            .read_exact(&mut buf)
            .map_err(|_| CliError::user("model file truncated".into()))?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, CliError> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CliError> {
        let b = self.bytes(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, CliError> {
        let b = self.bytes(8)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, CliError> {
        let b = self.bytes(8)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String, CliError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.bytes(len)?)
            .map_err(|_| CliError::user("model file contains invalid utf8".into()))
    }
}

/// Parse and validate a model file.
pub fn from_bytes(bytes: &[u8]) -> Result<EnsembleModel, CliError> {
    if bytes.len() < 48 {
        return Err(CliError::user("model file truncated".into()));
    }
    if bytes[0..4] != MODEL_MAGIC {
        return Err(CliError::user(format!(
            "not a model file: magic {:?}, expected {:?}",
            &bytes[0..4],
            MODEL_MAGIC
        )));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != MODEL_VERSION {
        return Err(CliError::user(format!(
            "model format version {version} unsupported, expected {MODEL_VERSION}"
        )));
    }
    let payload_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let stored_digest = &bytes[16..48];
    let payload = &bytes[48..];
    if payload.len() != payload_len {
        return Err(CliError::user(format!(
            "model file truncated: payload {} bytes, header declares {payload_len}",
            payload.len()
        )));
    }
    let digest = Sha256::digest(payload);
    if digest.as_slice() != stored_digest {
        return Err(CliError::user(
            "model file checksum mismatch: file is corrupt".into(),
        ));
    }

    let mut r = Reader::new(payload);
    let voting = match r.u8()? {
        0 => Voting::Hard,
        1 => Voting::Soft,
        other => return Err(CliError::user(format!("unknown voting tag {other}"))),
    };
    let member_count = r.u32()? as usize;
    let k = r.u32()? as usize;
    let label_names = (0..k).map(|_| r.string()).collect::<Result<Vec<_>, _>>()?;
    let feature_count = r.u32()? as usize;

    let mut members = Vec::with_capacity(member_count);
    for _ in 0..member_count {
        let dim = r.u32()? as usize;
        let width = match r.u8()? {
            8 => DataWidth::Int8,
            16 => DataWidth::Int16,
            other => return Err(CliError::user(format!("unknown width tag {other}"))),
        };
        let encoder = match r.u8()? {
            0 => EncoderKind::Record,
            1 => EncoderKind::NGram,
            other => return Err(CliError::user(format!("unknown encoder tag {other}"))),
        };
        let levels = r.u32()? as usize;
        let window = r.u32()? as usize;
        let seed = Seed(r.u64()?);
        let retrain_epochs = r.u32()? as usize;
        let quantizer = if r.u8()? == 1 {
            let min = r.f64()?;
            let max = r.f64()?;
            Some(Quantizer::new(min, max, levels)?)
        } else {
            None
        };
        let mut class_hvs = Vec::with_capacity(k);
        for _ in 0..k {
            let elems: Vec<i64> = match width {
                DataWidth::Int8 => r.bytes(dim)?.iter().map(|&b| b as i8 as i64).collect(),
                DataWidth::Int16 => r
                    .bytes(dim * 2)?
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]) as i64)
                    .collect(),
            };
            class_hvs.push(Hypervector::from_elements(elems)?);
        }
        let memory = AssociativeMemory::from_parts(class_hvs, label_names.clone())?;
        let config = BaseClassifierConfig {
            dim,
            width,
            encoder,
            levels,
            window,
            seed,
            retrain_epochs,
        };
        members.push(BaseClassifier::from_parts(
            config,
            quantizer,
            feature_count,
            memory,
        )?);
    }
    if members.len() != member_count {
        return Err(CliError::user("model file member count mismatch".into()));
    }
    Ok(EnsembleModel::from_parts(members, voting)?)
}

pub fn load(path: &Path) -> Result<EnsembleModel, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::user(format!("cannot read model {}: {e}", path.display())))?;
    from_bytes(&bytes)
}

/// Print-friendly sha256 of a whole model file, used in reports.
pub fn file_checksum(bytes: &[u8]) -> String {
    use std::fmt::Write as _;
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}
