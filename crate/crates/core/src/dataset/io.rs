use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::signal::SignalRecord;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"BSIG";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFormat {
    Csv,
    Bsig,
}

impl SignalFormat {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(SignalFormat::Csv),
            "bsig" => Some(SignalFormat::Bsig),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            SignalFormat::Csv => "csv",
            SignalFormat::Bsig => "bsig",
        }
    }
}

impl std::str::FromStr for SignalFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SignalFormat::Csv),
            "bsig" => Ok(SignalFormat::Bsig),
            other => Err(Error::InvalidArgument(format!("unknown signal format {other}"))),
        }
    }
}

impl std::fmt::Display for SignalFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsigHeader {
    pub n_channels: usize,
    pub n_samples: usize,
    pub fs: f64,
}

fn parse_header(bytes: &[u8]) -> Result<BsigHeader> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing BSIG magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Length {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported BSIG version {version}")));
    }
    let n_channels = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n_samples = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let fs = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    Ok(BsigHeader {
        n_channels,
        n_samples,
        fs,
    })
}

/// Read only the fixed-size header.
pub fn read_bsig_header(path: &Path) -> Result<BsigHeader> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::with_capacity(HEADER_LEN);
    f.take(HEADER_LEN as u64)
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    parse_header(&buf)
}

/// Decode a BSIG file into its header and channel-major f32 payload.
pub fn read_bsig(path: &Path) -> Result<(BsigHeader, Vec<Vec<f32>>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let h = parse_header(&bytes)?;
    let expected = h
        .n_channels
        .checked_mul(h.n_samples)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
    if bytes.len() < expected {
        return Err(Error::Length {
            expected,
            found: bytes.len(),
        });
    }
    let payload = &bytes[HEADER_LEN..expected];
    let data = (0..h.n_channels)
        .map(|c| {
            payload[c * h.n_samples * 4..(c + 1) * h.n_samples * 4]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok((h, data))
}

pub fn write_bsig(path: &Path, fs: f64, channels: &[Vec<f32>]) -> Result<()> {
    let n_samples = channels.first().map_or(0, Vec::len);
    if channels.iter().any(|c| c.len() != n_samples) {
        return Err(Error::InvalidArgument("channels differ in length".into()));
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = |b: &[u8]| w.write_all(b).map_err(|e| Error::io(path, e));
    write(MAGIC)?;
    write(&VERSION.to_le_bytes())?;
    write(&(channels.len() as u32).to_le_bytes())?;
    write(&(n_samples as u64).to_le_bytes())?;
    write(&fs.to_le_bytes())?;
    for c in channels {
        for v in c {
            write(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a signal file. CSV carries no rate, so `fs` is authoritative there;
/// for BSIG it must agree with the header. `channel_names` overrides the CSV
/// header when non-empty and names BSIG channels (which are unnamed on disk).
pub fn read_signal(
    path: &Path,
    format: SignalFormat,
    fs: f64,
    channel_names: &[String],
) -> Result<SignalRecord> {
    match format {
        SignalFormat::Bsig => {
            let (h, data) = read_bsig(path)?;
            if (h.fs - fs).abs() > 1e-9 * fs.abs().max(1.0) {
                return Err(Error::Format(format!(
                    "{}: header fs {} disagrees with expected {fs}",
                    path.display(),
                    h.fs
                )));
            }
            let names = if channel_names.is_empty() {
                (0..h.n_channels).map(|i| format!("ch{i}")).collect()
            } else {
                channel_names.to_vec()
            };
            let samples = data
                .into_iter()
                .map(|c| c.into_iter().map(f64::from).collect())
                .collect();
            SignalRecord::new(samples, h.fs, names)
        }
        SignalFormat::Csv => {
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                message,
            };
            let mut rdr = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_path(path)
                .map_err(|e| parse_err(e.to_string()))?;
            let header: Vec<String> = rdr
                .headers()
                .map_err(|e| parse_err(e.to_string()))?
                .iter()
                .map(str::to_string)
                .collect();
            let mut cols = vec![Vec::new(); header.len()];
            for (row, rec) in rdr.records().enumerate() {
                let rec = rec.map_err(|e| parse_err(e.to_string()))?;
                for (c, field) in rec.iter().enumerate() {
                    let v: f64 = field
                        .parse()
                        .map_err(|_| parse_err(format!("row {}: bad number {field:?}", row + 2)))?;
                    cols[c].push(v);
                }
            }
            let names = if channel_names.is_empty() {
                header
            } else {
                if channel_names.len() != header.len() {
                    return Err(Error::Format(format!(
                        "{}: {} columns but {} channel names",
                        path.display(),
                        header.len(),
                        channel_names.len()
                    )));
                }
                channel_names.to_vec()
            };
            SignalRecord::new(cols, fs, names)
        }
    }
}

/// Write a record. BSIG stores samples as f32; CSV uses the shortest text
/// that round-trips each f64.
pub fn write_signal(path: &Path, rec: &SignalRecord, format: SignalFormat) -> Result<()> {
    match format {
        SignalFormat::Bsig => {
            let data: Vec<Vec<f32>> = rec
                .samples()
                .iter()
                .map(|c| c.iter().map(|&v| v as f32).collect())
                .collect();
            write_bsig(path, rec.fs(), &data)
        }
        SignalFormat::Csv => {
            let ser = |e: csv::Error| Error::Serde(e.to_string());
            let mut w = csv::Writer::from_path(path).map_err(ser)?;
            w.write_record(rec.channel_names()).map_err(ser)?;
            for i in 0..rec.n_samples() {
                w.write_record(rec.samples().iter().map(|c| c[i].to_string()))
                    .map_err(ser)?;
            }
            w.flush().map_err(|e| Error::io(path, e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsig_layout_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bsig");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"BSIG");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&3u64.to_le_bytes());
        bytes.extend_from_slice(&250f64.to_le_bytes());
        for v in [1f32, 2.0, 3.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(&p, &bytes).unwrap();
        let rec = read_signal(&p, SignalFormat::Bsig, 250.0, &["ECG".into()]).unwrap();
        assert_eq!(rec.n_channels(), 1);
        assert_eq!(rec.samples()[0], vec![1.0, 2.0, 3.0]);

        let q = dir.path().join("y.bsig");
        write_signal(&q, &rec, SignalFormat::Bsig).unwrap();
        assert_eq!(fs::read(&q).unwrap(), bytes);
    }

    #[test]
    fn bsig_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.bsig");
        fs::write(&p, b"BSIX0000").unwrap();
        assert!(matches!(read_bsig(&p), Err(Error::Format(_))));

        write_bsig(&p, 100.0, &[vec![1.0; 10], vec![2.0; 10]]).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&p, &bytes).unwrap();
        assert!(matches!(
            read_bsig(&p),
            Err(Error::Length { expected: 108, found: 105 })
        ));
    }

    #[test]
    fn bsig_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.bsig");
        let data = vec![
            vec![0.1f32, -3.5e-7, f32::MAX, 1.0 / 3.0],
            vec![f32::MIN_POSITIVE, 0.0, -0.0, 42.0],
        ];
        write_bsig(&p, 256.0, &data).unwrap();
        let (h, back) = read_bsig(&p).unwrap();
        assert_eq!(h, BsigHeader { n_channels: 2, n_samples: 4, fs: 256.0 });
        for (a, b) in data.iter().flatten().zip(back.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_two_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "Fz,Cz\n1,2\n3,4\n5,6\n7.5,-8\n").unwrap();
        let rec = read_signal(&p, SignalFormat::Csv, 128.0, &[]).unwrap();
        assert_eq!(rec.channel_names(), &["Fz".to_string(), "Cz".to_string()]);
        assert_eq!(rec.n_samples(), 4);
        assert_eq!(rec.samples()[1], vec![2.0, 4.0, 6.0, -8.0]);

        let q = dir.path().join("t.csv");
        write_signal(&q, &rec, SignalFormat::Csv).unwrap();
        let back = read_signal(&q, SignalFormat::Csv, 128.0, &[]).unwrap();
        assert_eq!(back, rec);
    }
}
