//! Versioned binary model format: magic, version, config, vocabulary, then
//! little-endian f32 matrices.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::label::LabelId;

use super::matrix::Matrix;
use super::{LidModel, Loss, TrainConfig, Vocabulary};

pub(crate) const MAGIC: &[u8; 4] = b"GLFG";
pub(crate) const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("model file is truncated")]
    Truncated,
    #[error("model file is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<(), ModelIoError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            ModelIoError::Truncated
        } else {
            ModelIoError::Io(e)
        }
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32, ModelIoError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, ModelIoError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f32(r: &mut impl Read) -> Result<f32, ModelIoError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(f32::from_le_bytes(b))
}

fn read_matrix(r: &mut impl Read) -> Result<Matrix<f32>, ModelIoError> {
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| ModelIoError::Corrupt("matrix dimensions overflow".into()))?;
    let mut bytes = vec![0u8; n * 4];
    read_exact(r, &mut bytes)?;
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
        return Err(ModelIoError::Corrupt(format!("non-finite matrix entry {bad}")));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

fn write_matrix(w: &mut impl Write, m: &Matrix<f32>) -> io::Result<()> {
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for &x in m.data() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

impl LidModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelIoError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;

        let c = self.config();
        for v in [
            c.min_count,
            c.min_count_label,
            c.word_ngrams,
            c.bucket,
            c.minn,
            c.maxn,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&[match c.loss {
            Loss::Softmax => 0u8,
        }])?;
        w.write_all(&c.dim.to_le_bytes())?;
        w.write_all(&c.epoch.to_le_bytes())?;
        w.write_all(&c.lr.to_le_bytes())?;

        let vocab = self.vocab();
        w.write_all(&(vocab.n_words() as u32).to_le_bytes())?;
        for word in vocab.words() {
            w.write_all(&(word.len() as u32).to_le_bytes())?;
            w.write_all(word.as_bytes())?;
        }
        w.write_all(&(vocab.n_labels() as u32).to_le_bytes())?;
        for label in vocab.labels() {
            w.write_all(label.language().as_bytes())?;
            w.write_all(label.script().as_str().as_bytes())?;
        }

        write_matrix(&mut w, self.input_matrix())?;
        write_matrix(&mut w, self.output_matrix())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelIoError> {
        let mut r = BufReader::new(File::open(path)?);

        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(ModelIoError::BadMagic);
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(ModelIoError::UnsupportedVersion(version));
        }

        let min_count = read_u32(&mut r)?;
        let min_count_label = read_u32(&mut r)?;
        let word_ngrams = read_u32(&mut r)?;
        let bucket = read_u32(&mut r)?;
        let minn = read_u32(&mut r)?;
        let maxn = read_u32(&mut r)?;
        let mut loss_byte = [0u8; 1];
        read_exact(&mut r, &mut loss_byte)?;
        let loss = match loss_byte[0] {
            0 => Loss::Softmax,
            b => return Err(ModelIoError::Corrupt(format!("unknown loss tag {b}"))),
        };
        let dim = read_u32(&mut r)?;
        let epoch = read_u32(&mut r)?;
        let lr = read_f32(&mut r)?;
        let config = TrainConfig {
            min_count,
            min_count_label,
            word_ngrams,
            bucket,
            minn,
            maxn,
            loss,
            dim,
            epoch,
            lr,
        };

        let mut vocab = Vocabulary::default();
        let n_words = read_u32(&mut r)?;
        for _ in 0..n_words {
            let len = read_u32(&mut r)? as usize;
            let mut bytes = vec![0u8; len];
            read_exact(&mut r, &mut bytes)?;
            let word = String::from_utf8(bytes)
                .map_err(|_| ModelIoError::Corrupt("vocabulary word is not UTF-8".into()))?;
            vocab.push_word(word);
        }
        let n_labels = read_u32(&mut r)?;
        for _ in 0..n_labels {
            let mut bytes = [0u8; 7];
            read_exact(&mut r, &mut bytes)?;
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| ModelIoError::Corrupt("label is not UTF-8".into()))?;
            let label = LabelId::new(&text[..3], &text[3..])
                .map_err(|e| ModelIoError::Corrupt(format!("bad label: {e}")))?;
            vocab.push_label(label);
        }

        let input = read_matrix(&mut r)?;
        let output = read_matrix(&mut r)?;
        if input.rows() != vocab.n_words() + bucket as usize || input.cols() != dim as usize {
            return Err(ModelIoError::Corrupt("input matrix shape mismatch".into()));
        }
        if output.rows() != vocab.n_labels() || output.cols() != dim as usize {
            return Err(ModelIoError::Corrupt("output matrix shape mismatch".into()));
        }
        let mut trailing = [0u8; 1];
        match r.read(&mut trailing)? {
            0 => {}
            _ => return Err(ModelIoError::Corrupt("trailing data after matrices".into())),
        }
        Ok(LidModel::from_parts(config, vocab, input, output))
    }
}
