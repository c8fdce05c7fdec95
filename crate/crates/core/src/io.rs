//! Canonical serialization: sorted keys, 17 significant digits per float.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Formats a float with 17 significant digits (always round-trips).
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Compact JSON formatter that prints floats via [`format_f64`].
#[derive(Debug, Default, Clone, Copy)]
pub struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        writer.write_all(format_f64(value as f64).as_bytes())
    }
}

/// Serializes `value` with sorted object keys and 17-digit floats,
/// terminated by a newline. Non-finite floats become `null`, as in
/// `serde_json`.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17Formatter);
    tree.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes canonical JSON to `path`.
pub fn write_canonical_json<T: Serialize>(value: &T, path: &Path) -> io::Result<()> {
    let bytes = to_canonical_json(value).map_err(io::Error::other)?;
    fs::write(path, bytes)
}

/// Dense matrix as CSV, one row per line.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Dense matrix as CSV with a leading `id` column (row index).
pub fn rows_with_id_csv(m: &DMatrix<f64>, header_prefix: &str) -> String {
    let mut out = String::from("id");
    for j in 0..m.ncols() {
        out.push_str(&format!(",{header_prefix}{j}"));
    }
    out.push('\n');
    for i in 0..m.nrows() {
        out.push_str(&i.to_string());
        for j in 0..m.ncols() {
            out.push(',');
            out.push_str(&format_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Parses a matrix written by [`matrix_to_csv`].
pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!("line {}: ragged row", lineno + 1));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Seeded generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under `seed` (per-replication seeding).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        zeta: f64,
        alpha: Vec<f64>,
    }

    #[test]
    fn canonical_json_sorts_keys_and_uses_17_digits() {
        let s = Sample { zeta: 0.1, alpha: vec![1.0, -2.5] };
        let text = String::from_utf8(to_canonical_json(&s).unwrap()).unwrap();
        assert_eq!(
            text,
            "{\"alpha\":[1.0000000000000000e0,-2.5000000000000000e0],\"zeta\":1.0000000000000001e-1}\n"
        );
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["zeta"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = Sample { zeta: f64::NAN, alpha: vec![] };
        assert_eq!(to_canonical_json(&s).unwrap(), b"{\"alpha\":[],\"zeta\":null}\n");
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.1, -3.0, 1e-300, 2.0 / 3.0, 7.0]);
        assert_eq!(matrix_from_csv(&matrix_to_csv(&m)).unwrap(), m);
    }
}
