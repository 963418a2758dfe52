//! `HDV1` hypervector store files.
//!
//! All integers are little-endian.
//!
//! ```text
//! header   magic  "HDV1"                      4 bytes
//!          dim    u32  components per vector
//!          bits   u8   bits per stored component (always 1)
//!          count  u64  number of records
//! record   mass   f64  neutral precursor mass, Da
//!          charge u8
//!          flags  u8   bit 0: decoy, bit 1: peptide present
//!          id_len u16, id bytes (UTF-8)
//!          [pep_len u16, peptide bytes]   when flags bit 1 is set
//!          words  dim/64 x u64, component d in bit d%64 of word d/64
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::Hypervector;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HDV1";
const COUNT_OFFSET: u64 = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct StoredHypervector {
    pub id: String,
    pub precursor_mass: f64,
    pub charge: u8,
    pub is_decoy: bool,
    pub peptide: Option<String>,
    pub hv: Hypervector,
}

pub struct StoreWriter<W: Write + Seek> {
    out: W,
    dim: usize,
    count: u64,
}

impl StoreWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        StoreWriter::new(BufWriter::new(file), dim).map_err(|e| Error::io(path, e))
    }
}

impl<W: Write + Seek> StoreWriter<W> {
    pub fn new(mut out: W, dim: usize) -> std::io::Result<Self> {
        out.write_all(MAGIC)?;
        out.write_all(&(dim as u32).to_le_bytes())?;
        out.write_all(&[1u8])?;
        out.write_all(&0u64.to_le_bytes())?;
        Ok(StoreWriter { out, dim, count: 0 })
    }

    pub fn push(&mut self, rec: &StoredHypervector) -> Result<()> {
        if rec.hv.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rec.hv.dim(),
            });
        }
        let io = |e| Error::io(PathBuf::from("<store>"), e);
        let mut buf = Vec::with_capacity(16 + rec.id.len() + self.dim / 8);
        buf.extend_from_slice(&rec.precursor_mass.to_le_bytes());
        buf.push(rec.charge);
        buf.push(rec.is_decoy as u8 | (rec.peptide.is_some() as u8) << 1);
        put_str(&mut buf, &rec.id)?;
        if let Some(p) = &rec.peptide {
            put_str(&mut buf, p)?;
        }
        for w in rec.hv.words() {
            buf.extend_from_slice(&w.to_le_bytes());
        }
        self.out.write_all(&buf).map_err(io)?;
        self.count += 1;
        Ok(())
    }

    /// Patches the record count into the header and flushes.
    pub fn finish(mut self) -> Result<W> {
        let io = |e| Error::io(PathBuf::from("<store>"), e);
        self.out.seek(SeekFrom::Start(COUNT_OFFSET)).map_err(io)?;
        self.out.write_all(&self.count.to_le_bytes()).map_err(io)?;
        self.out.seek(SeekFrom::End(0)).map_err(io)?;
        self.out.flush().map_err(io)?;
        Ok(self.out)
    }
}

fn put_str(buf: &mut Vec<u8>, s: &str) -> Result<()> {
    let len = u16::try_from(s.len()).map_err(|_| Error::Format(format!("string too long for store: {} bytes", s.len())))?;
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
    Ok(())
}

pub struct StoreReader<R: Read> {
    input: R,
    dim: usize,
    count: u64,
    read: u64,
}

impl StoreReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        StoreReader::new(BufReader::new(file))
    }
}

/// Whether the file at `path` begins with the store magic.
pub fn is_store(path: impl AsRef<Path>) -> bool {
    let mut magic = [0u8; 4];
    File::open(path).and_then(|mut f| f.read_exact(&mut magic)).is_ok() && &magic == MAGIC
}

fn format_err(e: std::io::Error) -> Error {
    Error::Format(format!("truncated or unreadable store: {e}"))
}

impl<R: Read> StoreReader<R> {
    pub fn new(mut input: R) -> Result<Self> {
        let mut header = [0u8; 17];
        input.read_exact(&mut header).map_err(format_err)?;
        if &header[..4] != MAGIC {
            return Err(Error::Format("not an HDV1 store (bad magic)".into()));
        }
        let dim = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        if header[8] != 1 {
            return Err(Error::Format(format!("unsupported component precision {} bits", header[8])));
        }
        if dim == 0 || dim % 64 != 0 {
            return Err(Error::Format(format!("invalid dimension {dim}")));
        }
        let count = u64::from_le_bytes(header[9..17].try_into().unwrap());
        Ok(StoreReader {
            input,
            dim,
            count,
            read: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn record_count(&self) -> u64 {
        self.count
    }

    fn read_record(&mut self) -> Result<StoredHypervector> {
        let mut fixed = [0u8; 10];
        self.input.read_exact(&mut fixed).map_err(format_err)?;
        let precursor_mass = f64::from_le_bytes(fixed[..8].try_into().unwrap());
        let charge = fixed[8];
        let flags = fixed[9];
        let id = self.read_str()?;
        let peptide = if flags & 2 != 0 { Some(self.read_str()?) } else { None };
        let mut raw = vec![0u8; self.dim / 8];
        self.input.read_exact(&mut raw).map_err(format_err)?;
        let words = raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(StoredHypervector {
            id,
            precursor_mass,
            charge,
            is_decoy: flags & 1 != 0,
            peptide,
            hv: Hypervector::from_words(self.dim, words)?,
        })
    }

    fn read_str(&mut self) -> Result<String> {
        let mut len = [0u8; 2];
        self.input.read_exact(&mut len).map_err(format_err)?;
        let mut bytes = vec![0u8; u16::from_le_bytes(len) as usize];
        self.input.read_exact(&mut bytes).map_err(format_err)?;
        String::from_utf8(bytes).map_err(|_| Error::Format("store string is not UTF-8".into()))
    }
}

impl<R: Read> Iterator for StoreReader<R> {
    type Item = Result<StoredHypervector>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.read == self.count {
            return None;
        }
        self.read += 1;
        Some(self.read_record())
    }
}

/// Reads a whole store file.
pub fn read_store(path: impl AsRef<Path>) -> Result<(usize, Vec<StoredHypervector>)> {
    let reader = StoreReader::open(path)?;
    let dim = reader.dim();
    let records = reader.collect::<Result<Vec<_>>>()?;
    Ok((dim, records))
}
