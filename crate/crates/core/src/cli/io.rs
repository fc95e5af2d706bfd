//! Signal and coefficient files.
//!
//! Signals are CSV `index,re,im` (header optional) or, for `.bin` files, raw
//! little-endian `f64` pairs. Coefficient fields use `j k re im` lines.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{CoeffField, Grid, Signal};

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

fn grid_for(len: usize, expected: Option<Grid>, path: &Path) -> Result<Grid> {
    if !len.is_power_of_two() || len < 4 {
        return Err(Error::Config(format!(
            "{}: {len} samples is not a power of two of at least 4",
            path.display()
        )));
    }
    let grid = Grid::new(len.trailing_zeros())?;
    match expected {
        Some(g) if g != grid => Err(Error::Config(format!(
            "{}: file has {len} samples but the grid has {}",
            path.display(),
            g.size()
        ))),
        _ => Ok(grid),
    }
}

/// Reads a signal; its length fixes the grid unless `expected` is given, in which case they must agree.
pub fn read_signal(path: &Path, expected: Option<Grid>) -> Result<Signal> {
    let values = if is_binary(path) {
        let bytes = fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if bytes.len() % 16 != 0 {
            return Err(Error::Config(format!("{}: length is not a multiple of 16 bytes", path.display())));
        }
        bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect::<Vec<_>>()
    } else {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        parse_csv(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Config(format!("{}: non-finite sample", path.display())));
    }
    let grid = grid_for(values.len(), expected, path)?;
    Signal::new(grid, values)
}

fn parse_csv(text: &str) -> std::result::Result<Vec<Complex64>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("index")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(format!("line {}: expected index,re,im", lineno + 1));
        }
        let idx: usize = cols[0].parse().map_err(|_| format!("line {}: bad index", lineno + 1))?;
        if idx != out.len() {
            return Err(format!("line {}: index {idx} out of order", lineno + 1));
        }
        let re: f64 = cols[1].parse().map_err(|_| format!("line {}: bad real part", lineno + 1))?;
        let im: f64 = cols[2].parse().map_err(|_| format!("line {}: bad imaginary part", lineno + 1))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

pub fn signal_to_csv(f: &Signal) -> String {
    let mut s = String::from("index,re,im\n");
    for (i, v) in f.values().iter().enumerate() {
        s.push_str(&format!("{i},{:e},{:e}\n", v.re, v.im));
    }
    s
}

pub fn write_signal(path: &Path, f: &Signal) -> Result<()> {
    if is_binary(path) {
        let mut bytes = Vec::with_capacity(16 * f.len());
        for v in f.values() {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        fs::write(path, bytes)?;
    } else {
        fs::write(path, signal_to_csv(f))?;
    }
    Ok(())
}

pub fn read_field(path: &Path, grid: Grid) -> Result<CoeffField> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    CoeffField::from_text(grid, &text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn write_field(path: &Path, s: &CoeffField) -> Result<()> {
    fs::write(path, s.to_text())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(4).unwrap();
        let f = Signal::from_fn(g, |x| Complex64::new((7.0 * x).sin(), x * x - 0.1));
        for name in ["f.csv", "f.bin"] {
            let path = dir.path().join(name);
            write_signal(&path, &f).unwrap();
            let back = read_signal(&path, Some(g)).unwrap();
            assert_eq!(back.values(), f.values(), "{name}");
        }
        let path = dir.path().join("f.csv");
        assert!(matches!(read_signal(&path, Some(Grid::new(5).unwrap())), Err(Error::Config(_))));
        fs::write(&path, "0,1,0\n1,2,0\n2,3,0\n").unwrap();
        assert!(read_signal(&path, None).is_err());
        fs::write(&path, "index,re,im\n0,1,0\n2,2,0\n").unwrap();
        assert!(read_signal(&path, None).is_err());
    }
}
