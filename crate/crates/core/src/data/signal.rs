use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multichannel time series for one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalBlock {
    samples: Vec<Vec<f64>>,
    sampling_hz: f64,
    channel_names: Vec<String>,
}

impl SignalBlock {
    pub fn new(samples: Vec<Vec<f64>>, sampling_hz: f64, channel_names: Vec<String>) -> Result<Self> {
        if !(sampling_hz > 0.0) || !sampling_hz.is_finite() {
            return Err(Error::param("sampling_hz", "must be positive"));
        }
        if let Some(first) = samples.first() {
            if samples.iter().any(|c| c.len() != first.len()) {
                return Err(Error::InvalidDataset("signal channels differ in length".into()));
            }
        }
        if !channel_names.is_empty() && channel_names.len() != samples.len() {
            return Err(Error::InvalidDataset(format!(
                "{} channel names for {} channels",
                channel_names.len(),
                samples.len()
            )));
        }
        Ok(SignalBlock {
            samples,
            sampling_hz,
            channel_names,
        })
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn sampling_hz(&self) -> f64 {
        self.sampling_hz
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }
}

/// On-disk payload encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalFormat {
    /// Raw little-endian f32, channel-interleaved, with a `.json` header
    /// `{channels, sampling_hz, n_samples}` next to the payload.
    F32le,
    /// Delimited text, header row of channel names, one channel per column.
    Csv,
}

/// JSON header accompanying an `f32le` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalHeader {
    pub channels: Vec<String>,
    pub sampling_hz: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalFile {
    pub path: PathBuf,
    pub format: SignalFormat,
    pub sampling_hz: f64,
    pub channels: Vec<String>,
    pub n_samples: Option<usize>,
}

impl SignalFile {
    /// Describe a payload file; for `f32le` the header is read eagerly.
    pub fn open(path: PathBuf, format: SignalFormat, sampling_hz: Option<f64>, channels: &[String]) -> Result<Self> {
        match format {
            SignalFormat::F32le => {
                let header_path = header_path(&path);
                let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
                let h: SignalHeader = serde_json::from_str(&text)?;
                Ok(SignalFile {
                    path,
                    format,
                    sampling_hz: h.sampling_hz,
                    channels: h.channels,
                    n_samples: Some(h.n_samples),
                })
            }
            SignalFormat::Csv => Ok(SignalFile {
                path,
                format,
                sampling_hz: sampling_hz
                    .ok_or_else(|| Error::MissingParameter("signals.sampling_hz".into()))?,
                channels: channels.to_vec(),
                n_samples: None,
            }),
        }
    }

    pub fn load(&self) -> Result<SignalBlock> {
        match self.format {
            SignalFormat::F32le => {
                let bytes = fs::read(&self.path).map_err(|e| Error::io(&self.path, e))?;
                let n_ch = self.channels.len().max(1);
                if bytes.len() % (4 * n_ch) != 0 {
                    return Err(Error::InvalidDataset(format!(
                        "{}: {} bytes is not a whole number of {n_ch}-channel frames",
                        self.path.display(),
                        bytes.len()
                    )));
                }
                let n = bytes.len() / (4 * n_ch);
                if let Some(expected) = self.n_samples {
                    if expected != n {
                        return Err(Error::InvalidDataset(format!(
                            "{}: header declares {expected} samples, payload has {n}",
                            self.path.display()
                        )));
                    }
                }
                let mut samples = vec![Vec::with_capacity(n); n_ch];
                for (i, chunk) in bytes.chunks_exact(4).enumerate() {
                    let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
                    samples[i % n_ch].push(v as f64);
                }
                SignalBlock::new(samples, self.sampling_hz, self.channels.clone())
            }
            SignalFormat::Csv => {
                let text = fs::read_to_string(&self.path).map_err(|e| Error::io(&self.path, e))?;
                parse_signal_csv(&text, self.sampling_hz)
            }
        }
    }
}

fn header_path(payload: &Path) -> PathBuf {
    payload.with_extension("json")
}

fn parse_signal_csv(text: &str, sampling_hz: f64) -> Result<SignalBlock> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidDataset("empty signal file".into()))?;
    let delim = if header.contains(';') { ';' } else { ',' };
    let names: Vec<String> = header.split(delim).map(|s| s.trim().to_string()).collect();
    let mut samples = vec![Vec::new(); names.len()];
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(delim).collect();
        if fields.len() != names.len() {
            return Err(Error::InvalidDataset(format!(
                "signal row {row} has {} fields, expected {}",
                fields.len(),
                names.len()
            )));
        }
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f.trim().parse().map_err(|_| {
                Error::InvalidDataset(format!("signal row {row}: `{f}` is not a number"))
            })?;
            samples[c].push(v);
        }
    }
    SignalBlock::new(samples, sampling_hz, names)
}

/// Write a block as an `f32le` payload plus JSON header.
pub fn write_f32le(block: &SignalBlock, payload: &Path) -> Result<()> {
    let n = block.n_samples();
    let mut bytes = Vec::with_capacity(n * block.channels().len() * 4);
    for i in 0..n {
        for ch in block.channels() {
            bytes.extend_from_slice(&(ch[i] as f32).to_le_bytes());
        }
    }
    fs::write(payload, bytes).map_err(|e| Error::io(payload, e))?;
    let header = SignalHeader {
        channels: block.channel_names().to_vec(),
        sampling_hz: block.sampling_hz(),
        n_samples: n,
    };
    let hp = header_path(payload);
    fs::write(&hp, serde_json::to_vec_pretty(&header)?).map_err(|e| Error::io(&hp, e))
}

/// Per-record signals, either held in memory or read from files on demand.
#[derive(Debug, Clone)]
pub enum SignalStore {
    Memory(Vec<Option<SignalBlock>>),
    Files(Vec<Option<SignalFile>>),
}

impl SignalStore {
    pub fn len(&self) -> usize {
        match self {
            SignalStore::Memory(v) => v.len(),
            SignalStore::Files(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_signal(&self, record: usize) -> bool {
        match self {
            SignalStore::Memory(v) => v.get(record).is_some_and(Option::is_some),
            SignalStore::Files(v) => v.get(record).is_some_and(Option::is_some),
        }
    }

    /// Declared sampling rate of each record that has a signal.
    pub fn declared_rates(&self) -> Vec<Option<f64>> {
        match self {
            SignalStore::Memory(v) => v.iter().map(|b| b.as_ref().map(SignalBlock::sampling_hz)).collect(),
            SignalStore::Files(v) => v.iter().map(|f| f.as_ref().map(|f| f.sampling_hz)).collect(),
        }
    }

    pub fn get(&self, record: usize) -> Result<Option<Cow<'_, SignalBlock>>> {
        match self {
            SignalStore::Memory(v) => Ok(v.get(record).and_then(Option::as_ref).map(Cow::Borrowed)),
            SignalStore::Files(v) => match v.get(record).and_then(Option::as_ref) {
                Some(f) => f.load().map(|b| Some(Cow::Owned(b))),
                None => Ok(None),
            },
        }
    }

    pub fn select(&self, rows: &[usize]) -> SignalStore {
        match self {
            SignalStore::Memory(v) => SignalStore::Memory(rows.iter().map(|&r| v[r].clone()).collect()),
            SignalStore::Files(v) => SignalStore::Files(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }
}
