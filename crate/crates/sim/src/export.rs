//! Exports for external tools: vocabulary JSON, corpus text, scenario JSON
//! and the binary codebook and parity-check files.
//!
//! Binary layout, little-endian:
//!
//! ```text
//! codebook: "ACHC" | version u16 | count u16 | count x length u8          | fnv64 u64
//! ldpc:     "ACLD" | version u16 | n u32 | m u32 | seed u64
//!           | m x (degree u16 | degree x column u32)                       | fnv64 u64
//! ```
//!
//! The trailer is FNV-1a over every preceding byte.

use std::path::Path;

use agentcomm_core::classic::huffman::HuffmanCodebook;
use agentcomm_core::classic::ldpc::LdpcCode;
use agentcomm_core::scenario::{Scenario, ScenarioKind};
use agentcomm_core::semantic::{SemanticCodec, OOV_INDEX, PAD_INDEX};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};

pub const VOCAB_SCHEMA: &str = "agentcomm.vocab/1";
pub const SCENARIO_SCHEMA: &str = "agentcomm.scenario/1";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabFile {
    pub schema: String,
    /// Hex FNV digest of the word list.
    pub digest: String,
    pub segment_words: usize,
    pub pad_index: u32,
    pub oov_index: u32,
    pub words: Vec<String>,
}

impl VocabFile {
    pub fn of(codec: &SemanticCodec) -> Self {
        Self {
            schema: VOCAB_SCHEMA.to_string(),
            digest: format!("{:016x}", codec.vocab.digest()),
            segment_words: codec.config.l,
            pad_index: PAD_INDEX,
            oov_index: OOV_INDEX,
            words: codec.vocab.words().to_vec(),
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub fn write_vocab(path: &Path, codec: &SemanticCodec) -> Result<()> {
    write_atomic(path, &json(&VocabFile::of(codec))?)
}

pub fn read_vocab(path: &Path) -> Result<VocabFile> {
    let v: VocabFile =
        serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if v.schema != VOCAB_SCHEMA {
        return Err(Error::Format(format!("{}: unsupported schema '{}'", path.display(), v.schema)));
    }
    Ok(v)
}

/// One sentence per line.
pub fn write_corpus(path: &Path, corpus: &str) -> Result<()> {
    let mut text = agentcomm_core::text::split_sentences(corpus).join("\n");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Serialize)]
struct ScenarioFile<'a> {
    schema: &'static str,
    task_id: String,
    #[serde(flatten)]
    scenario: &'a Scenario,
}

/// Writes `<dir>/<kind>-<seed>.json` per seed; returns the paths.
pub fn write_scenarios(dir: &Path, kind: ScenarioKind, seeds: &[u64]) -> Result<Vec<std::path::PathBuf>> {
    seeds
        .iter()
        .map(|&seed| {
            let s = Scenario::generate(kind, seed);
            let path = dir.join(format!("{}-{seed}.json", kind.name()));
            write_atomic(&path, &json(&ScenarioFile { schema: SCENARIO_SCHEMA, task_id: s.task_id(), scenario: &s })?)?;
            Ok(path)
        })
        .collect()
}

fn fnv(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

fn seal(mut b: Vec<u8>) -> Vec<u8> {
    let sum = fnv(&b);
    b.extend_from_slice(&sum.to_le_bytes());
    b
}

struct Cursor<'a> {
    b: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    /// Checks magic, version and trailer; positions after the version.
    fn open(b: &'a [u8], magic: &[u8; 4]) -> Result<Self> {
        if b.len() < 14 || &b[..4] != magic {
            return Err(Error::Format("bad magic".into()));
        }
        let (body, tail) = b.split_at(b.len() - 8);
        if fnv(body).to_le_bytes() != tail {
            return Err(Error::Format("checksum mismatch".into()));
        }
        let mut c = Self { b: body, at: 4 };
        let v = c.u16()?;
        if v != VERSION {
            return Err(Error::Format(format!("unsupported version {v}")));
        }
        Ok(c)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self.b.get(self.at..self.at + n).ok_or_else(|| Error::Format("truncated file".into()))?;
        self.at += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn done(&self) -> Result<()> {
        if self.at == self.b.len() {
            Ok(())
        } else {
            Err(Error::Format("trailing bytes".into()))
        }
    }
}

pub fn codebook_bytes(book: &HuffmanCodebook) -> Vec<u8> {
    let mut b = b"ACHC".to_vec();
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(book.lengths().len() as u16).to_le_bytes());
    b.extend_from_slice(book.lengths());
    seal(b)
}

pub fn codebook_from_bytes(bytes: &[u8]) -> Result<HuffmanCodebook> {
    let mut c = Cursor::open(bytes, b"ACHC")?;
    let n = c.u16()? as usize;
    let lengths = c.take(n)?;
    c.done()?;
    Ok(HuffmanCodebook::from_lengths(lengths)?)
}

pub fn ldpc_bytes(code: &LdpcCode) -> Vec<u8> {
    let rows = code.check_rows();
    let mut b = b"ACLD".to_vec();
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(code.n() as u32).to_le_bytes());
    b.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    b.extend_from_slice(&code.seed().to_le_bytes());
    for row in &rows {
        b.extend_from_slice(&(row.len() as u16).to_le_bytes());
        for &v in row {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    seal(b)
}

pub fn ldpc_from_bytes(bytes: &[u8]) -> Result<LdpcCode> {
    let mut c = Cursor::open(bytes, b"ACLD")?;
    let n = c.u32()? as usize;
    let m = c.u32()? as usize;
    let seed = c.u64()?;
    let rows = (0..m)
        .map(|_| {
            let d = c.u16()? as usize;
            (0..d).map(|_| c.u32()).collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    c.done()?;
    Ok(LdpcCode::from_check_rows(n, seed, &rows)?)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes)
}
