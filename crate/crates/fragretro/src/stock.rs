//! Building-block stock: parsed molecules with precomputed fingerprints
//! and property counters, plus a binary cache so large stocks are built
//! once and reloaded cheaply.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::molgraph::{parse_smiles, Molecule};
use crate::screen::{fingerprint, Fnv1a, FpParams, PatternFingerprint};

#[derive(Debug, Error)]
pub enum StockError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {attempted} stock records failed to parse (over the 10% limit)")]
    TooManyParseFailures { failed: usize, attempted: usize },
    #[error("stock cache mismatch: {0}")]
    CacheVersionMismatch(String),
    #[error("corrupt stock cache: {0}")]
    CorruptCache(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StockEntry {
    pub id: u32,
    pub smiles: String,
    pub molecule: Molecule,
    pub fp: PatternFingerprint,
    pub heavy_atoms: u32,
    pub rings: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stock {
    pub entries: Vec<StockEntry>,
    pub fp_params: FpParams,
    /// SHA-256 of the source text the stock was built from; lets callers
    /// detect a stale cache when the source file is still around.
    pub source_digest: [u8; 32],
}

impl Stock {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// Non-comment, non-blank lines seen.
    pub records: usize,
    pub parsed: usize,
    pub failed: usize,
    /// Exact-duplicate SMILES strings dropped (first occurrence kept).
    pub deduped: usize,
}

/// One record per line: `SMILES` optionally followed by a tab and a label
/// (ignored). Only full-line `#` comments are recognized — `#` is the
/// triple-bond symbol inside a SMILES string, so trailing comments would
/// be ambiguous. Building-block molecules must be complete: a record with
/// attachment atoms counts as a parse failure.
pub fn build_stock_from_text(
    text: &str,
    params: &FpParams,
) -> Result<(Stock, BuildReport), StockError> {
    params
        .validate()
        .map_err(StockError::CacheVersionMismatch)?;
    let source_digest: [u8; 32] = Sha256::digest(text.as_bytes()).into();

    let mut report = BuildReport::default();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut records: Vec<&str> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        report.records += 1;
        let smiles = trimmed.split('\t').next().unwrap().trim();
        if seen.insert(smiles) {
            records.push(smiles);
        } else {
            report.deduped += 1;
        }
    }

    // Parse and fingerprint in parallel; collect() preserves input order,
    // so the resulting stock is identical for any worker count.
    let parsed: Vec<(usize, Result<(Molecule, PatternFingerprint), ()>)> = records
        .par_iter()
        .enumerate()
        .map(|(i, smiles)| {
            let out = match parse_smiles(smiles) {
                Ok(m) if !m.has_attachments() => {
                    let fp = fingerprint(&m, params);
                    Ok((m, fp))
                }
                _ => Err(()),
            };
            (i, out)
        })
        .collect();

    let mut entries = Vec::with_capacity(records.len());
    for (i, out) in parsed {
        match out {
            Ok((molecule, fp)) => {
                let heavy_atoms = molecule.heavy_atom_count() as u32;
                let rings = molecule.ring_count() as u32;
                entries.push(StockEntry {
                    id: entries.len() as u32,
                    smiles: records[i].to_string(),
                    molecule,
                    fp,
                    heavy_atoms,
                    rings,
                });
                report.parsed += 1;
            }
            Err(()) => report.failed += 1,
        }
    }

    let attempted = report.parsed + report.failed;
    if report.failed * 10 > attempted {
        return Err(StockError::TooManyParseFailures {
            failed: report.failed,
            attempted,
        });
    }

    Ok((
        Stock {
            entries,
            fp_params: *params,
            source_digest,
        },
        report,
    ))
}

pub fn build_stock(
    path: impl AsRef<Path>,
    params: &FpParams,
) -> Result<(Stock, BuildReport), StockError> {
    let text = std::fs::read_to_string(path)?;
    build_stock_from_text(&text, params)
}

const CACHE_MAGIC: &[u8; 4] = b"FRSK";
const CACHE_VERSION: u32 = 1;

/// Cache layout (all integers little-endian):
/// magic "FRSK", u32 version, u32 nbits, u32 path_max, 32-byte source
/// digest, u64 entry count, then per entry { u32 smiles_len, smiles bytes,
/// u32 heavy_atoms, u32 rings, nbits/8 fingerprint bytes }, and a trailing
/// FNV-1a64 checksum over everything before it.
pub fn save_cache(stock: &Stock, path: impl AsRef<Path>) -> Result<(), StockError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&stock.fp_params.nbits.to_le_bytes());
    buf.extend_from_slice(&stock.fp_params.path_max.to_le_bytes());
    buf.extend_from_slice(&stock.source_digest);
    buf.extend_from_slice(&(stock.entries.len() as u64).to_le_bytes());
    for e in &stock.entries {
        buf.extend_from_slice(&(e.smiles.len() as u32).to_le_bytes());
        buf.extend_from_slice(e.smiles.as_bytes());
        buf.extend_from_slice(&e.heavy_atoms.to_le_bytes());
        buf.extend_from_slice(&e.rings.to_le_bytes());
        for w in e.fp.words() {
            buf.extend_from_slice(&w.to_le_bytes());
        }
    }
    let mut h = Fnv1a::new();
    h.write(&buf);
    buf.extend_from_slice(&h.finish().to_le_bytes());
    std::fs::write(path, buf)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StockError> {
        if self.pos + n > self.bytes.len() {
            return Err(StockError::CorruptCache("truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, StockError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, StockError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Loads a cache written by [`save_cache`]. Molecules are reparsed from
/// the stored SMILES and cross-checked against the stored counters, so a
/// cache that survives the checksum but disagrees with its own molecules
/// is still rejected. When `expected_params` is given, a cache built with
/// different fingerprint geometry is refused rather than silently used.
pub fn load_cache(
    path: impl AsRef<Path>,
    expected_params: Option<&FpParams>,
) -> Result<Stock, StockError> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 8 {
        return Err(StockError::CorruptCache("truncated".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let mut h = Fnv1a::new();
    h.write(body);
    if h.finish() != u64::from_le_bytes(tail.try_into().unwrap()) {
        return Err(StockError::CorruptCache("checksum mismatch".into()));
    }

    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(4)? != CACHE_MAGIC {
        return Err(StockError::CorruptCache("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(StockError::CacheVersionMismatch(format!(
            "cache format v{version}, expected v{CACHE_VERSION}"
        )));
    }
    let nbits = r.u32()?;
    let path_max = r.u32()?;
    let fp_params = FpParams { nbits, path_max };
    fp_params.validate().map_err(StockError::CorruptCache)?;
    if let Some(want) = expected_params {
        if *want != fp_params {
            return Err(StockError::CacheVersionMismatch(format!(
                "cache fingerprints are {}x{} bits, run wants {}x{}",
                nbits, path_max, want.nbits, want.path_max
            )));
        }
    }
    let mut source_digest = [0u8; 32];
    source_digest.copy_from_slice(r.take(32)?);
    let count = r.u64()? as usize;

    let nwords = (nbits / 64) as usize;
    let mut entries = Vec::with_capacity(count.min(1 << 20));
    for id in 0..count {
        let slen = r.u32()? as usize;
        let smiles = std::str::from_utf8(r.take(slen)?)
            .map_err(|_| StockError::CorruptCache("non-utf8 smiles".into()))?
            .to_string();
        let heavy_atoms = r.u32()?;
        let rings = r.u32()?;
        let mut words = Vec::with_capacity(nwords);
        for _ in 0..nwords {
            words.push(u64::from_le_bytes(r.take(8)?.try_into().unwrap()));
        }
        let molecule = parse_smiles(&smiles)
            .map_err(|e| StockError::CorruptCache(format!("entry {id}: {e}")))?;
        if molecule.heavy_atom_count() as u32 != heavy_atoms
            || molecule.ring_count() as u32 != rings
            || molecule.has_attachments()
        {
            return Err(StockError::CorruptCache(format!(
                "entry {id} disagrees with its stored counters"
            )));
        }
        entries.push(StockEntry {
            id: id as u32,
            smiles,
            molecule,
            fp: PatternFingerprint::from_words(words),
            heavy_atoms,
            rings,
        });
    }
    if r.pos != body.len() {
        return Err(StockError::CorruptCache("trailing bytes".into()));
    }

    Ok(Stock {
        entries,
        fp_params,
        source_digest,
    })
}
