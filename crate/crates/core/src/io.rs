//! Tensor file formats.
//!
//! Text format (`.dten`): line 1 is the order `d`, line 2 the mode sizes
//! `n_1 … n_d`, then one value per line in column-major order printed
//! with 17 significant digits, which round-trips every finite f64
//! exactly. The reader accepts any whitespace separation.
//!
//! Binary format: a 16-byte header (8-byte magic, u32 version, u32
//! reserved), then `d` and the mode sizes as little-endian u64, then the
//! payload as little-endian f64. `read_path` sniffs the magic to pick
//! the format.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const BINARY_MAGIC: [u8; 8] = *b"SBR1DTEN";
pub const BINARY_VERSION: u32 = 1;

pub fn write_text<W: Write>(t: &DenseTensor, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{}", t.order())?;
    let dims = t
        .shape()
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    writeln!(w, "{dims}")?;
    for v in t.data() {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

pub fn read_text<R: Read>(r: &mut R) -> Result<DenseTensor> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut tokens = text.split_whitespace();
    let d: usize = next_token(&mut tokens, "tensor order")?
        .parse()
        .map_err(|e| Error::Parse(format!("tensor order: {e}")))?;
    if d == 0 {
        return Err(Error::Parse("tensor order must be positive".into()));
    }
    let mut shape = Vec::with_capacity(d);
    for j in 0..d {
        let n: usize = next_token(&mut tokens, "mode size")?
            .parse()
            .map_err(|e| Error::Parse(format!("mode size {}: {e}", j + 1)))?;
        shape.push(n);
    }
    let expected: usize = shape.iter().product();
    let mut data = Vec::with_capacity(expected);
    for i in 0..expected {
        let v: f64 = next_token(&mut tokens, "value")?
            .parse()
            .map_err(|e| Error::Parse(format!("value {}: {e}", i + 1)))?;
        data.push(v);
    }
    if tokens.next().is_some() {
        return Err(Error::Parse(format!(
            "trailing tokens after {expected} values"
        )));
    }
    DenseTensor::new(shape, data)
}

fn next_token<'a>(tokens: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<&'a str> {
    tokens
        .next()
        .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))
}

pub fn write_binary<W: Write>(t: &DenseTensor, w: &mut W) -> std::io::Result<()> {
    w.write_all(&BINARY_MAGIC)?;
    w.write_all(&BINARY_VERSION.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    w.write_all(&(t.order() as u64).to_le_bytes())?;
    for &n in t.shape() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for v in t.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(r: &mut R) -> Result<DenseTensor> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[..8] != BINARY_MAGIC {
        return Err(Error::Parse("bad magic; not a binary tensor file".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
    if version != BINARY_VERSION {
        return Err(Error::Parse(format!(
            "unsupported binary tensor version {version}"
        )));
    }
    let d = read_u64(r)? as usize;
    if d == 0 || d > 64 {
        return Err(Error::Parse(format!("implausible tensor order {d}")));
    }
    let mut shape = Vec::with_capacity(d);
    for _ in 0..d {
        shape.push(read_u64(r)? as usize);
    }
    let expected: usize = shape.iter().product();
    let mut data = Vec::with_capacity(expected);
    let mut buf = [0u8; 8];
    for _ in 0..expected {
        r.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    DenseTensor::new(shape, data)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Reads a tensor file, sniffing the binary magic.
pub fn read_path<P: AsRef<Path>>(path: P) -> Result<DenseTensor> {
    let mut file = BufReader::new(File::open(path)?);
    let mut head = [0u8; 8];
    let got = read_head(&mut file, &mut head)?;
    if got == 8 && head == BINARY_MAGIC {
        let mut rest = Vec::new();
        file.read_to_end(&mut rest)?;
        let mut full = head.to_vec();
        full.extend_from_slice(&rest);
        read_binary(&mut full.as_slice())
    } else {
        let mut rest = Vec::new();
        file.read_to_end(&mut rest)?;
        let mut full = head[..got].to_vec();
        full.extend_from_slice(&rest);
        read_text(&mut full.as_slice())
    }
}

fn read_head<R: Read>(r: &mut R, buf: &mut [u8; 8]) -> Result<usize> {
    let mut filled = 0;
    while filled < 8 {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}

/// Writes a tensor file in the chosen format.
pub fn write_path<P: AsRef<Path>>(path: P, t: &DenseTensor, binary: bool) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    if binary {
        write_binary(t, &mut file)?;
    } else {
        write_text(t, &mut file)?;
    }
    file.flush()?;
    Ok(())
}
