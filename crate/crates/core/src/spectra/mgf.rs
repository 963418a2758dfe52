//! Reader and writer for MGF-style peak lists.
//!
//! Only the subset needed for library search is understood: `BEGIN IONS` /
//! `END IONS` blocks carrying `TITLE`, `PEPMASS`, `CHARGE`, `SEQ` and
//! `mz intensity` peak lines. Other keys are ignored. Titles starting with
//! `DECOY_` mark decoy spectra.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::{Peak, Spectrum, PROTON_MASS};
use crate::error::{Error, Result};

/// Streaming MGF parser. Malformed blocks are skipped and counted.
pub struct MgfReader<R> {
    lines: std::io::Lines<R>,
    blocks: usize,
    parsed: usize,
    skipped: usize,
    error: Option<std::io::Error>,
}

#[derive(Default)]
struct Block {
    title: Option<String>,
    pepmass: Option<f64>,
    charge: Option<u8>,
    seq: Option<String>,
    peaks: Vec<Peak>,
    malformed: bool,
}

impl<R: BufRead> MgfReader<R> {
    pub fn new(reader: R) -> Self {
        MgfReader {
            lines: reader.lines(),
            blocks: 0,
            parsed: 0,
            skipped: 0,
            error: None,
        }
    }

    pub fn parsed(&self) -> usize {
        self.parsed
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// I/O error that ended the stream early, if any.
    pub fn take_error(&mut self) -> Option<std::io::Error> {
        self.error.take()
    }

    fn finish(&mut self, block: Block) -> Option<Spectrum> {
        self.blocks += 1;
        let (Some(mz), false) = (block.pepmass, block.malformed) else {
            self.skipped += 1;
            return None;
        };
        let charge = block.charge.unwrap_or(1);
        let mut spectrum = Spectrum::new(
            block.title.unwrap_or_else(|| format!("block{}", self.blocks)),
            (mz - PROTON_MASS) * charge as f64,
            charge,
            block.peaks,
        );
        spectrum.peptide = block.seq;
        spectrum.is_decoy = spectrum.id.starts_with(super::DECOY_PREFIX);
        self.parsed += 1;
        Some(spectrum)
    }
}

fn parse_charge(value: &str) -> Option<u8> {
    let digits: String = value
        .trim()
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    digits.parse().ok().filter(|&z: &u8| z > 0)
}

fn parse_peak(line: &str) -> Option<Peak> {
    let mut fields = line.split_whitespace();
    let mz = fields.next()?.parse().ok()?;
    let intensity = fields.next()?.parse().ok()?;
    let peak = Peak::new(mz, intensity);
    peak.is_valid().then_some(peak)
}

impl<R: BufRead> Iterator for MgfReader<R> {
    type Item = Spectrum;

    fn next(&mut self) -> Option<Spectrum> {
        let mut block: Option<Block> = None;
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => {
                    self.error = Some(e);
                    return None;
                }
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with(['#', ';', '!', '/']) {
                continue;
            }
            if line.eq_ignore_ascii_case("BEGIN IONS") {
                if block.is_some() {
                    // unterminated block
                    self.blocks += 1;
                    self.skipped += 1;
                }
                block = Some(Block::default());
                continue;
            }
            let Some(current) = block.as_mut() else {
                continue;
            };
            if line.eq_ignore_ascii_case("END IONS") {
                let done = block.take().unwrap();
                match self.finish(done) {
                    Some(spectrum) => return Some(spectrum),
                    None => continue,
                }
            }
            if let Some((key, value)) = line.split_once('=') {
                match key.trim().to_ascii_uppercase().as_str() {
                    "TITLE" => current.title = Some(value.trim().to_string()),
                    "PEPMASS" => {
                        current.pepmass = value
                            .split_whitespace()
                            .next()
                            .and_then(|v| v.parse().ok())
                            .filter(|&m: &f64| m.is_finite() && m > 0.0);
                    }
                    "CHARGE" => current.charge = parse_charge(value),
                    "SEQ" => current.seq = Some(value.trim().to_string()),
                    _ => {}
                }
            } else if let Some(peak) = parse_peak(line) {
                current.peaks.push(peak);
            } else {
                current.malformed = true;
            }
        }
    }
}

/// Per-file ingestion counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct IngestReport {
    pub path: PathBuf,
    pub parsed: usize,
    pub skipped: usize,
    pub rejected: usize,
}

impl IngestReport {
    pub const CSV_HEADER: &'static str = "path,parsed,skipped,rejected";

    pub fn csv_line(&self) -> String {
        format!("{},{},{},{}", self.path.display(), self.parsed, self.skipped, self.rejected)
    }
}

pub struct MgfLoad {
    pub spectra: Vec<Spectrum>,
    pub report: IngestReport,
}

pub fn open_mgf(path: &Path) -> Result<MgfReader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(MgfReader::new(BufReader::new(file)))
}

/// Reads every block of an MGF file into memory.
pub fn read_mgf(path: impl AsRef<Path>) -> Result<MgfLoad> {
    let path = path.as_ref();
    let mut reader = open_mgf(path)?;
    let spectra: Vec<Spectrum> = reader.by_ref().collect();
    if let Some(e) = reader.take_error() {
        return Err(Error::io(path, e));
    }
    if spectra.is_empty() {
        return Err(Error::Format(format!(
            "{}: no valid spectrum blocks ({} skipped)",
            path.display(),
            reader.skipped()
        )));
    }
    Ok(MgfLoad {
        report: IngestReport {
            path: path.to_path_buf(),
            parsed: reader.parsed(),
            skipped: reader.skipped(),
            rejected: 0,
        },
        spectra,
    })
}

pub fn write_mgf<'a, W: Write>(out: &mut W, spectra: impl IntoIterator<Item = &'a Spectrum>) -> std::io::Result<()> {
    for s in spectra {
        writeln!(out, "BEGIN IONS")?;
        writeln!(out, "TITLE={}", s.id)?;
        let z = s.precursor_charge.max(1);
        writeln!(out, "PEPMASS={}", s.precursor_mass / z as f64 + PROTON_MASS)?;
        writeln!(out, "CHARGE={z}+")?;
        if let Some(seq) = &s.peptide {
            writeln!(out, "SEQ={seq}")?;
        }
        for p in &s.peaks {
            writeln!(out, "{} {}", p.mz, p.intensity)?;
        }
        writeln!(out, "END IONS")?;
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const ONE_BLOCK: &str = "\
BEGIN IONS
TITLE=scan=1
PEPMASS=500.25 1200
CHARGE=2+
SEQ=PEPTIDEK
101.1 20
202.2 40.5
303.3 10
END IONS
";

    #[test]
    fn parses_one_block() {
        let spectra: Vec<Spectrum> = MgfReader::new(Cursor::new(ONE_BLOCK)).collect();
        assert_eq!(spectra.len(), 1);
        let s = &spectra[0];
        assert_eq!(s.id, "scan=1");
        assert_eq!(s.peaks.len(), 3);
        assert_eq!(s.precursor_charge, 2);
        assert!((s.precursor_mass - (500.25 - PROTON_MASS) * 2.0).abs() < 1e-9);
        assert_eq!(s.peptide.as_deref(), Some("PEPTIDEK"));
    }

    #[test]
    fn missing_pepmass_is_skipped() {
        let text = format!("{ONE_BLOCK}\nBEGIN IONS\nTITLE=x\n100 1\nEND IONS\n");
        let mut reader = MgfReader::new(Cursor::new(text));
        let spectra: Vec<Spectrum> = reader.by_ref().collect();
        assert_eq!(spectra.len(), 1);
        assert_eq!(reader.skipped(), 1);
        assert_eq!(reader.parsed(), 1);
    }

    #[test]
    fn garbage_peak_line_skips_block() {
        let text = "BEGIN IONS\nPEPMASS=400\n100 abc\nEND IONS\n";
        let mut reader = MgfReader::new(Cursor::new(text));
        assert_eq!(reader.by_ref().count(), 0);
        assert_eq!(reader.skipped(), 1);
    }

    #[test]
    fn empty_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.mgf");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(read_mgf(&path), Err(Error::Format(_))));
        assert!(matches!(read_mgf(dir.path().join("nope.mgf")), Err(Error::Io { .. })));
    }

    #[test]
    fn write_then_read() {
        let spectra: Vec<Spectrum> = MgfReader::new(Cursor::new(ONE_BLOCK)).collect();
        let mut buf = Vec::new();
        write_mgf(&mut buf, &spectra).unwrap();
        let back: Vec<Spectrum> = MgfReader::new(Cursor::new(buf)).collect();
        assert_eq!(back[0].peaks, spectra[0].peaks);
        assert!((back[0].precursor_mass - spectra[0].precursor_mass).abs() < 1e-9);
        assert!(!back[0].is_decoy);
    }

    #[test]
    fn decoy_titles_are_flagged() {
        let text = ONE_BLOCK.replace("TITLE=scan=1", "TITLE=DECOY_scan=1");
        let spectra: Vec<Spectrum> = MgfReader::new(Cursor::new(text)).collect();
        assert!(spectra[0].is_decoy);
    }
}
