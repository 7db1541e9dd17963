//! Binary model files.
//!
//! Layout: the magic bytes `2PLN`, a little-endian u16 format version, a
//! u32-length JSON header with the system and hyperparameters, the form,
//! POS and label vocabularies as counted lists of length-prefixed UTF-8
//! strings, then the parameter tensors, each as a name, a rank, the
//! dimensions and little-endian f32 data.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::scorer::{Scorer, Tensor};
use super::{Hyperparams, Model, SystemId, Vocab, Vocabularies};

pub const FORMAT_VERSION: u16 = 1;
const MAGIC: &[u8; 4] = b"2PLN";
/// Guards allocations against corrupt length fields.
const MAX_LEN: u32 = 1 << 30;

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {0} (expected {FORMAT_VERSION})")]
    Version(u16),
    #[error("malformed header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("malformed model file: {0}")]
    Malformed(String),
}

#[derive(Serialize, Deserialize)]
struct Header {
    system: SystemId,
    hyperparams: Hyperparams,
}

fn write_bytes<W: Write>(w: &mut W, bytes: &[u8]) -> io::Result<()> {
    w.write_u32::<LittleEndian>(bytes.len() as u32)?;
    w.write_all(bytes)
}

fn read_len<R: Read>(r: &mut R) -> Result<usize, ArchiveError> {
    let len = r.read_u32::<LittleEndian>()?;
    if len > MAX_LEN {
        return Err(ArchiveError::Malformed(format!("length {} out of range", len)));
    }
    Ok(len as usize)
}

fn read_bytes<R: Read>(r: &mut R) -> Result<Vec<u8>, ArchiveError> {
    let len = read_len(r)?;
    let mut buf = vec![0; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_string<R: Read>(r: &mut R) -> Result<String, ArchiveError> {
    String::from_utf8(read_bytes(r)?).map_err(|e| ArchiveError::Malformed(e.to_string()))
}

pub fn save_model<W: Write>(model: &Model, mut w: W) -> Result<(), ArchiveError> {
    w.write_all(MAGIC)?;
    w.write_u16::<LittleEndian>(FORMAT_VERSION)?;
    let header = serde_json::to_vec(&Header {
        system: model.system,
        hyperparams: model.hyperparams.clone(),
    })?;
    write_bytes(&mut w, &header)?;
    for vocab in [&model.vocab.forms, &model.vocab.pos, &model.vocab.labels] {
        w.write_u32::<LittleEndian>(vocab.len() as u32)?;
        for item in vocab.items() {
            write_bytes(&mut w, item.as_bytes())?;
        }
    }
    let tensors = model.scorer.tensors();
    w.write_u32::<LittleEndian>(tensors.len() as u32)?;
    for t in tensors {
        write_bytes(&mut w, t.name.as_bytes())?;
        w.write_u32::<LittleEndian>(t.shape.len() as u32)?;
        for &d in &t.shape {
            w.write_u32::<LittleEndian>(d as u32)?;
        }
        for &x in &t.data {
            w.write_f32::<LittleEndian>(x)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_model<R: Read>(mut r: R) -> Result<Model, ArchiveError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(ArchiveError::BadMagic);
    }
    let version = r.read_u16::<LittleEndian>()?;
    if version != FORMAT_VERSION {
        return Err(ArchiveError::Version(version));
    }
    let header: Header = serde_json::from_slice(&read_bytes(&mut r)?)?;
    let mut vocabs = Vec::with_capacity(3);
    for _ in 0..3 {
        let count = read_len(&mut r)?;
        let mut items = Vec::new();
        for _ in 0..count {
            items.push(read_string(&mut r)?);
        }
        vocabs.push(Vocab::from_items(items));
    }
    let labels = vocabs.pop().unwrap();
    let pos = vocabs.pop().unwrap();
    let forms = vocabs.pop().unwrap();
    let count = read_len(&mut r)?;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let name = read_string(&mut r)?;
        let rank = read_len(&mut r)?;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_len(&mut r)?);
        }
        let size = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&s| s <= MAX_LEN as usize)
            .ok_or_else(|| ArchiveError::Malformed(format!("tensor '{}' is too large", name)))?;
        let mut data = vec![0f32; size];
        r.read_f32_into::<LittleEndian>(&mut data)?;
        tensors.push(Tensor { name, shape, data });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(ArchiveError::Malformed("trailing bytes after the last tensor".into()));
    }
    let scorer = Scorer::from_tensors(header.system, header.hyperparams.encoder, tensors)
        .map_err(ArchiveError::Malformed)?;
    let vocab = Vocabularies { forms, pos, labels };
    if scorer.action_count() != super::ActionSpace::new(header.system, vocab.labels.len()).len() {
        return Err(ArchiveError::Malformed("output layer does not match the label inventory".into()));
    }
    Ok(Model {
        system: header.system,
        hyperparams: header.hyperparams,
        vocab,
        scorer,
    })
}

pub fn save_model_file<P: AsRef<Path>>(model: &Model, path: P) -> Result<(), ArchiveError> {
    save_model(model, BufWriter::new(File::create(path)?))
}

pub fn load_model_file<P: AsRef<Path>>(path: P) -> Result<Model, ArchiveError> {
    load_model(BufReader::new(File::open(path)?))
}
