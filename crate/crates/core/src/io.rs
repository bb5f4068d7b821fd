//! File formats: csv matrices (header `f0,...,f{p-1}`, shortest
//! round-trip decimal text), raw binary matrices (magic "GSUP",
//! little-endian header, f64 payload), and one-integer-per-line label
//! files. Raw version 1 is a plain matrix; version 2 is an image stack
//! carrying the side lengths d1, d2 after the shape.

use crate::matrix::DataMatrix;
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const RAW_MAGIC: &[u8; 4] = b"GSUP";

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

pub fn write_csv(path: &Path, m: &DataMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (0..m.n_cols()).map(|j| format!("f{j}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<DataMatrix> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(path, "empty file"))??;
    let p = header.split(',').count();
    let mut data = Vec::new();
    let mut n = 0usize;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0usize;
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|e| {
                format_err(path, format!("row {}: bad number {cell:?}: {e}", lineno + 1))
            })?;
            data.push(v);
            count += 1;
        }
        if count != p {
            return Err(format_err(
                path,
                format!("row {} has {count} cells, header has {p}", lineno + 1),
            ));
        }
        n += 1;
    }
    DataMatrix::from_vec(n, p, data)
}

/// Raw format: magic "GSUP", u32 version, u64 n, u64 p,
/// [u64 d1, u64 d2 when version = 2], then n*p little-endian f64 row-major.
pub fn write_raw(path: &Path, m: &DataMatrix, image_dims: Option<(usize, usize)>) -> Result<()> {
    if let Some((d1, d2)) = image_dims {
        if d1 * d2 != m.n_cols() {
            return Err(Error::Shape(format!(
                "image dims {d1}x{d2} do not match {} columns",
                m.n_cols()
            )));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(RAW_MAGIC)?;
    let version: u32 = if image_dims.is_some() { 2 } else { 1 };
    w.write_all(&version.to_le_bytes())?;
    w.write_all(&(m.n_rows() as u64).to_le_bytes())?;
    w.write_all(&(m.n_cols() as u64).to_le_bytes())?;
    if let Some((d1, d2)) = image_dims {
        w.write_all(&(d1 as u64).to_le_bytes())?;
        w.write_all(&(d2 as u64).to_le_bytes())?;
    }
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<(DataMatrix, Option<(usize, usize)>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| format_err(path, "truncated header"))?;
    if &magic != RAW_MAGIC {
        return Err(format_err(path, "bad magic (not a GSUP raw matrix)"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != 1 && version != 2 {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let p = u64::from_le_bytes(b8) as usize;
    let image_dims = if version == 2 {
        r.read_exact(&mut b8)?;
        let d1 = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let d2 = u64::from_le_bytes(b8) as usize;
        if d1 * d2 != p {
            return Err(format_err(path, format!("dims {d1}x{d2} != p = {p}")));
        }
        Some((d1, d2))
    } else {
        None
    };
    let mut data = vec![0.0f64; n * p];
    for v in data.iter_mut() {
        r.read_exact(&mut b8)
            .map_err(|_| format_err(path, "truncated payload"))?;
        *v = f64::from_le_bytes(b8);
    }
    Ok((DataMatrix::from_vec(n, p, data)?, image_dims))
}

/// Sniffs the 4-byte magic: raw when present, csv otherwise.
pub fn read_matrix_auto(path: &Path) -> Result<(DataMatrix, Option<(usize, usize)>)> {
    let mut f = File::open(path)?;
    let mut magic = [0u8; 4];
    let got = f.read(&mut magic)?;
    drop(f);
    if got == 4 && &magic == RAW_MAGIC {
        read_raw(path)
    } else {
        Ok((read_csv(path)?, None))
    }
}

pub fn write_labels(path: &Path, labels: &[i64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for l in labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: i64 = line.trim().parse().map_err(|e| {
            format_err(path, format!("line {}: bad label {line:?}: {e}", lineno + 1))
        })?;
        out.push(v);
    }
    Ok(out)
}

/// MPCA model file: three consecutive raw blocks (left factors, right
/// factors, mean image as a d1 x d2 matrix).
pub fn write_mpca_model(path: &Path, model: &crate::reduce::MpcaModel) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for m in [&model.left_factors, &model.right_factors, &model.mean_image] {
        w.write_all(RAW_MAGIC)?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(m.n_rows() as u64).to_le_bytes())?;
        w.write_all(&(m.n_cols() as u64).to_le_bytes())?;
        for v in m.as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_mpca_model(path: &Path) -> Result<crate::reduce::MpcaModel> {
    let mut r = BufReader::new(File::open(path)?);
    let read_block = |r: &mut BufReader<File>| -> Result<DataMatrix> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| format_err(path, "truncated model"))?;
        if &magic != RAW_MAGIC {
            return Err(format_err(path, "bad magic in model block"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let p = u64::from_le_bytes(b8) as usize;
        let mut data = vec![0.0f64; n * p];
        for v in data.iter_mut() {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        DataMatrix::from_vec(n, p, data)
    };
    let left_factors = read_block(&mut r)?;
    let right_factors = read_block(&mut r)?;
    let mean_image = read_block(&mut r)?;
    Ok(crate::reduce::MpcaModel {
        left_factors,
        right_factors,
        mean_image,
    })
}
