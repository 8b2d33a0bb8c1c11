//! Binary corpus format.
//!
//! ```text
//! header  : "TSFG" | version u16 | record count u64 | label width u16 | flags u16
//! record  : length u32 | length × f32 values | label width × f32 labels | class i32
//! ```
//!
//! All integers and floats are little-endian. The class is `-1` for unlabeled records.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, FormatError, Result};

pub const DATASET_MAGIC: [u8; 4] = *b"TSFG";
pub const DATASET_VERSION: u16 = 1;
const HEADER_LEN: u64 = 4 + 2 + 8 + 2 + 2;

/// Set when the labels are the synthetic pretext targets.
pub const FLAG_SYNTHETIC: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub values: Vec<f32>,
    pub labels: Vec<f32>,
    pub class: Option<usize>,
}

impl Record {
    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub count: u64,
    pub label_width: u16,
    pub flags: u16,
}

/// Streams records to disk; the record count is patched into the header by
/// [`DatasetWriter::finish`].
pub struct DatasetWriter {
    out: BufWriter<File>,
    path: PathBuf,
    label_width: u16,
    count: u64,
}

impl DatasetWriter {
    pub fn create(path: &Path, label_width: u16, flags: u16) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&DATASET_MAGIC)?;
        out.write_all(&DATASET_VERSION.to_le_bytes())?;
        out.write_all(&0u64.to_le_bytes())?;
        out.write_all(&label_width.to_le_bytes())?;
        out.write_all(&flags.to_le_bytes())?;
        Ok(Self {
            out,
            path: path.to_path_buf(),
            label_width,
            count: 0,
        })
    }

    pub fn push(&mut self, record: &Record) -> Result<()> {
        let invalid = |m: String| Error::at(&self.path, FormatError::Invalid(m));
        if record.values.is_empty() {
            return Err(invalid(format!("record {} is empty", self.count)));
        }
        if record.labels.len() != usize::from(self.label_width) {
            return Err(invalid(format!(
                "record {} has {} labels, file expects {}",
                self.count,
                record.labels.len(),
                self.label_width
            )));
        }
        if record.values.iter().chain(&record.labels).any(|v| !v.is_finite()) {
            return Err(invalid(format!("record {} has non-finite values", self.count)));
        }
        let len = u32::try_from(record.values.len())
            .map_err(|_| invalid(format!("record {} is too long", self.count)))?;
        let class = match record.class {
            Some(c) => i32::try_from(c).map_err(|_| invalid(format!("class {c} too large")))?,
            None => -1,
        };
        self.out.write_all(&len.to_le_bytes())?;
        for v in record.values.iter().chain(&record.labels) {
            self.out.write_all(&v.to_le_bytes())?;
        }
        self.out.write_all(&class.to_le_bytes())?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<u64> {
        self.out.seek(SeekFrom::Start(6))?;
        self.out.write_all(&self.count.to_le_bytes())?;
        self.out.flush()?;
        Ok(self.count)
    }
}

pub fn write_dataset(path: &Path, records: &[Record], flags: u16) -> Result<()> {
    let width = records.first().map_or(0, |r| r.labels.len());
    let width = u16::try_from(width)
        .map_err(|_| Error::at(path, FormatError::Invalid(format!("label width {width}"))))?;
    let mut w = DatasetWriter::create(path, width, flags)?;
    for r in records {
        w.push(r)?;
    }
    w.finish()?;
    Ok(())
}

fn read_exact_or(reader: &mut impl Read, buf: &mut [u8], what: impl FnOnce() -> String) -> std::result::Result<(), Error> {
    reader.read_exact(buf).map_err(|e| {
        if e.kind() == ErrorKind::UnexpectedEof {
            Error::FormatData(FormatError::Truncated(what()))
        } else {
            Error::Io(e)
        }
    })
}

fn read_header(reader: &mut impl Read) -> Result<DatasetHeader> {
    let mut buf = [0u8; HEADER_LEN as usize];
    read_exact_or(reader, &mut buf, || "header".into())?;
    let magic: [u8; 4] = buf[0..4].try_into().expect("4 bytes");
    if magic != DATASET_MAGIC {
        return Err(FormatError::BadMagic {
            expected: DATASET_MAGIC,
            found: magic,
        }
        .into());
    }
    let version = u16::from_le_bytes([buf[4], buf[5]]);
    if version != DATASET_VERSION {
        return Err(FormatError::UnsupportedVersion {
            expected: DATASET_VERSION,
            found: version,
        }
        .into());
    }
    Ok(DatasetHeader {
        count: u64::from_le_bytes(buf[6..14].try_into().expect("8 bytes")),
        label_width: u16::from_le_bytes([buf[14], buf[15]]),
        flags: u16::from_le_bytes([buf[16], buf[17]]),
    })
}

fn read_record(reader: &mut impl Read, header: &DatasetHeader, index: u64) -> Result<Record> {
    let what = || format!("record {index} of {}", header.count);
    let mut word = [0u8; 4];
    read_exact_or(reader, &mut word, what)?;
    let len = u32::from_le_bytes(word) as usize;
    if len == 0 {
        return Err(FormatError::Invalid(format!("record {index} has length 0")).into());
    }
    let width = usize::from(header.label_width);
    let mut bytes = vec![0u8; 4 * (len + width)];
    read_exact_or(reader, &mut bytes, what)?;
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    if floats.iter().any(|v| !v.is_finite()) {
        return Err(FormatError::Invalid(format!("record {index} has non-finite values")).into());
    }
    read_exact_or(reader, &mut word, what)?;
    let class = i32::from_le_bytes(word);
    let class = match class {
        -1 => None,
        c if c >= 0 => Some(c as usize),
        c => return Err(FormatError::Invalid(format!("record {index} has class {c}")).into()),
    };
    let (values, labels) = floats.split_at(len);
    Ok(Record {
        values: values.to_vec(),
        labels: labels.to_vec(),
        class,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<Record>,
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let with_path = |e: Error| match e {
        Error::FormatData(f) => Error::at(path, f),
        other => other,
    };
    let mut reader = BufReader::new(File::open(path)?);
    let header = read_header(&mut reader).map_err(with_path)?;
    let mut records = Vec::with_capacity(header.count.min(1 << 20) as usize);
    for i in 0..header.count {
        records.push(read_record(&mut reader, &header, i).map_err(with_path)?);
    }
    let mut probe = [0u8; 1];
    if reader.read(&mut probe)? != 0 {
        return Err(Error::at(path, FormatError::TrailingData));
    }
    Ok(Dataset { header, records })
}

/// True when the file starts with the corpus magic.
pub fn is_dataset_file(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 4];
    let mut f = File::open(path)?;
    Ok(f.read_exact(&mut magic).is_ok() && magic == DATASET_MAGIC)
}
