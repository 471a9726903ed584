//! Path persistence: a little-endian columnar binary format and CSV.
//!
//! Binary layout: 8-byte magic, `u32` schema version, `u8` kind code, `u8`
//! presence flags, 2 padding bytes, then `hurst`, `beta_stable`, `hurst_hint`
//! (`f64`), `dim` (`u32`), `n_steps` (`u64`), `horizon` (`f64`), `seed`
//! (`u64`), followed by `n_steps + 1` rows of `(t, x_1, …, x_d)` as `f64`.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::path::SamplePath;
use crate::process_sim::spec::{ProcessKind, ProcessSpec};

pub const MAGIC: &[u8; 8] = b"OCRZPATH";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathHeader {
    pub kind: ProcessKind,
    pub hurst: Option<f64>,
    pub beta_stable: Option<f64>,
    pub dim: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub seed: u64,
    pub schema_version: u32,
}

impl PathHeader {
    pub fn for_spec(spec: &ProcessSpec) -> Self {
        Self {
            kind: spec.kind,
            hurst: spec.hurst,
            beta_stable: spec.beta_stable,
            dim: spec.dim,
            n_steps: spec.n_steps,
            horizon: spec.horizon,
            seed: spec.seed,
            schema_version: SCHEMA_VERSION,
        }
    }
}

pub fn write_binary<W: Write>(w: W, header: &PathHeader, path: &SamplePath) -> Result<()> {
    let mut w = BufWriter::new(w);
    w.write_all(MAGIC)?;
    w.write_all(&SCHEMA_VERSION.to_le_bytes())?;
    let flags = header.hurst.is_some() as u8
        | (header.beta_stable.is_some() as u8) << 1
        | (path.hurst_hint().is_some() as u8) << 2;
    w.write_all(&[header.kind.code(), flags, 0, 0])?;
    for v in [header.hurst, header.beta_stable, path.hurst_hint()] {
        w.write_all(&v.unwrap_or(0.0).to_le_bytes())?;
    }
    w.write_all(&(path.dim() as u32).to_le_bytes())?;
    w.write_all(&(path.n_steps() as u64).to_le_bytes())?;
    w.write_all(&path.horizon().to_le_bytes())?;
    w.write_all(&header.seed.to_le_bytes())?;
    for (t, x) in path.times().iter().zip(path.points()) {
        w.write_all(&t.to_le_bytes())?;
        for v in x {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(r: R) -> Result<(PathHeader, SamplePath)> {
    let mut r = BufReader::new(r);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(read_n(&mut r)?);
    if version != SCHEMA_VERSION {
        return Err(Error::Format(format!("unsupported schema version {version}")));
    }
    let [code, flags, _, _] = read_n::<4>(&mut r)?;
    let kind = ProcessKind::from_code(code).ok_or_else(|| Error::Format(format!("unknown kind code {code}")))?;
    let mut opt = |bit: u8| -> Result<Option<f64>> {
        let v = f64::from_le_bytes(read_n(&mut r)?);
        Ok((flags & (1 << bit) != 0).then_some(v))
    };
    let (hurst, beta_stable, hint) = (opt(0)?, opt(1)?, opt(2)?);
    let dim = u32::from_le_bytes(read_n(&mut r)?) as usize;
    let n_steps = u64::from_le_bytes(read_n(&mut r)?) as usize;
    let horizon = f64::from_le_bytes(read_n(&mut r)?);
    let seed = u64::from_le_bytes(read_n(&mut r)?);
    if dim == 0 || n_steps == 0 {
        return Err(Error::Format("empty path".into()));
    }
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut positions = Vec::with_capacity((n_steps + 1) * dim);
    for _ in 0..=n_steps {
        times.push(f64::from_le_bytes(read_n(&mut r)?));
        for _ in 0..dim {
            positions.push(f64::from_le_bytes(read_n(&mut r)?));
        }
    }
    let path = SamplePath::new(times, positions, dim, hint).map_err(|e| Error::Format(e.to_string()))?;
    let header = PathHeader { kind, hurst, beta_stable, dim, n_steps, horizon, seed, schema_version: version };
    Ok((header, path))
}

fn read_n<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated file".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

/// CSV with a `#`-prefixed JSON header line, then `t,x_1,…,x_d` rows.
/// Floats use shortest round-trip formatting, so CSV also reloads exactly.
pub fn write_csv<W: Write>(w: W, header: &PathHeader, path: &SamplePath) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# {}", serde_json::to_string(&CsvHeader { header: header.clone(), hurst_hint: path.hurst_hint() })?)?;
    let cols: Vec<String> = (1..=path.dim()).map(|l| format!("x_{l}")).collect();
    writeln!(w, "t,{}", cols.join(","))?;
    for (t, x) in path.times().iter().zip(path.points()) {
        write!(w, "{t:?}")?;
        for v in x {
            write!(w, ",{v:?}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CsvHeader {
    #[serde(flatten)]
    header: PathHeader,
    hurst_hint: Option<f64>,
}

pub fn read_csv<R: Read>(r: R, source: &Path) -> Result<(PathHeader, SamplePath)> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: source.to_path_buf(), line, msg };
    let mut lines = BufReader::new(r).lines();
    let first = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))??;
    let json = first.strip_prefix("# ").ok_or_else(|| parse_err(1, "missing header comment".into()))?;
    let CsvHeader { header, hurst_hint } = serde_json::from_str(json).map_err(|e| parse_err(1, e.to_string()))?;
    lines.next().ok_or_else(|| parse_err(2, "missing column line".into()))??;
    let mut times = Vec::new();
    let mut positions = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 3;
        let mut fields = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            let f = fields.next().ok_or_else(|| parse_err(lineno, format!("missing {what}")))?;
            f.trim().parse().map_err(|_| parse_err(lineno, format!("bad number {f:?}")))
        };
        times.push(next("t")?);
        for l in 1..=header.dim {
            positions.push(next(&format!("x_{l}"))?);
        }
    }
    let path = SamplePath::new(times, positions, header.dim, hurst_hint).map_err(|e| Error::Format(e.to_string()))?;
    Ok((header, path))
}

pub fn save(file: &Path, header: &PathHeader, path: &SamplePath) -> Result<()> {
    let f = std::fs::File::create(file)?;
    if file.extension().is_some_and(|e| e == "csv") {
        write_csv(f, header, path)
    } else {
        write_binary(f, header, path)
    }
}

pub fn load(file: &Path) -> Result<(PathHeader, SamplePath)> {
    let f = std::fs::File::open(file)?;
    if file.extension().is_some_and(|e| e == "csv") {
        read_csv(f, file)
    } else {
        read_binary(f)
    }
}
