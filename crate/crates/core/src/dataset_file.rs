//! Little-endian dataset container.
//!
//! ```text
//! magic "MFSK65DS" | version u16 | count u32 | samples-per-record u32 | spacing u8
//! count × { label u8 | snr_db f32 | samples-per-record × f32 }
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::modem::{ModulationConfig, SpacingMode};
use crate::synthesis::{Dataset, SignalFrame};

pub const DATASET_MAGIC: &[u8; 8] = b"MFSK65DS";
pub const DATASET_VERSION: u16 = 1;
const HEADER_LEN: u64 = 8 + 2 + 4 + 4 + 1;

fn record_len(samples_per_record: usize) -> u64 {
    1 + 4 + 4 * samples_per_record as u64
}

/// Streams records to a file whose record count is fixed up front.
pub struct DatasetWriter<W: Write> {
    out: W,
    expected: u32,
    written: u32,
    samples_per_record: usize,
}

impl DatasetWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, count: usize, config: &ModulationConfig) -> Result<Self> {
        let file = File::create(path)?;
        Self::new(BufWriter::new(file), count, config)
    }
}

impl<W: Write> DatasetWriter<W> {
    pub fn new(mut out: W, count: usize, config: &ModulationConfig) -> Result<Self> {
        let count = u32::try_from(count).map_err(|_| Error::domain("too many records for the format"))?;
        let spr = u32::try_from(config.frame_len).map_err(|_| Error::domain("frame too long"))?;
        out.write_all(DATASET_MAGIC)?;
        out.write_all(&DATASET_VERSION.to_le_bytes())?;
        out.write_all(&count.to_le_bytes())?;
        out.write_all(&spr.to_le_bytes())?;
        out.write_all(&[config.spacing_mode.code()])?;
        Ok(DatasetWriter { out, expected: count, written: 0, samples_per_record: config.frame_len })
    }

    pub fn write_record(&mut self, label: u8, snr_db: f32, samples: impl IntoIterator<Item = f32>) -> Result<()> {
        if self.written == self.expected {
            return Err(Error::State("dataset already holds its declared record count".into()));
        }
        self.out.write_all(&[label])?;
        self.out.write_all(&snr_db.to_le_bytes())?;
        let mut n = 0;
        for x in samples {
            self.out.write_all(&x.to_le_bytes())?;
            n += 1;
        }
        if n != self.samples_per_record {
            return Err(Error::shape(format!("record has {n} samples, expected {}", self.samples_per_record)));
        }
        self.written += 1;
        Ok(())
    }

    pub fn write_frame(&mut self, frame: &SignalFrame) -> Result<()> {
        let label = frame.label.ok_or_else(|| Error::domain("dataset records need a label"))?;
        let snr = frame.snr_db.ok_or_else(|| Error::domain("dataset records need an SNR tag"))?;
        self.write_record(label, snr as f32, frame.samples.iter().map(|&x| x as f32))
    }

    pub fn finish(mut self) -> Result<W> {
        if self.written != self.expected {
            return Err(Error::State(format!("wrote {} of {} records", self.written, self.expected)));
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_dataset_to<W: Write>(out: W, dataset: &Dataset) -> Result<W> {
    let mut writer = DatasetWriter::new(out, dataset.len(), &dataset.config)?;
    for i in 0..dataset.len() {
        writer.write_record(dataset.labels()[i], dataset.snr_tags()[i], dataset.samples(i).iter().copied())?;
    }
    writer.finish()
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    write_dataset_to(BufWriter::new(File::create(path)?), dataset)?;
    Ok(())
}

fn read_exact_or_format<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<()> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::format("dataset file is truncated"),
        _ => Error::Io(e),
    })
}

/// Parses a dataset. `total_len`, when known, is checked against the header
/// before any record is read.
pub fn read_dataset_from<R: Read>(mut input: R, total_len: Option<u64>) -> Result<Dataset> {
    let mut header = [0u8; HEADER_LEN as usize];
    read_exact_or_format(&mut input, &mut header)?;
    if &header[..8] != DATASET_MAGIC {
        return Err(Error::format("not a dataset file (bad magic)"));
    }
    let version = u16::from_le_bytes([header[8], header[9]]);
    if version != DATASET_VERSION {
        return Err(Error::format(format!("unsupported dataset version {version}")));
    }
    let count = u32::from_le_bytes(header[10..14].try_into().unwrap()) as usize;
    let spr = u32::from_le_bytes(header[14..18].try_into().unwrap()) as usize;
    let spacing = SpacingMode::from_code(header[18])?;
    let config = ModulationConfig::jt65a(spacing);
    if spr != config.frame_len {
        return Err(Error::format(format!("{spr} samples per record, expected {}", config.frame_len)));
    }
    if count == 0 {
        return Err(Error::format("dataset holds no records"));
    }
    let body = count as u64 * record_len(spr);
    if let Some(len) = total_len {
        if len != HEADER_LEN + body {
            return Err(Error::format(format!(
                "file is {len} bytes, header describes {}",
                HEADER_LEN + body
            )));
        }
    }

    let mut labels = Vec::with_capacity(count);
    let mut snr_db = Vec::with_capacity(count);
    let mut samples = Vec::with_capacity(count * spr);
    let mut record = vec![0u8; record_len(spr) as usize];
    for _ in 0..count {
        read_exact_or_format(&mut input, &mut record)?;
        labels.push(record[0]);
        let snr = f32::from_le_bytes(record[1..5].try_into().unwrap());
        if !snr.is_finite() {
            return Err(Error::format("non-finite SNR tag"));
        }
        snr_db.push(snr);
        for chunk in record[5..].chunks_exact(4) {
            let x = f32::from_le_bytes(chunk.try_into().unwrap());
            if !x.is_finite() {
                return Err(Error::format("non-finite sample"));
            }
            samples.push(x);
        }
    }
    let mut probe = [0u8; 1];
    if input.read(&mut probe)? != 0 {
        return Err(Error::format("trailing bytes after the last record"));
    }
    Dataset::from_parts(config, None, labels, snr_db, samples).map_err(|e| Error::format(e.to_string()))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path)?;
    let len = file.metadata()?.len();
    read_dataset_from(BufReader::new(file), Some(len))
}
