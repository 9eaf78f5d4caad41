//! Field dumps: a CSV node matrix (one row per `j`) and a 16-bit grayscale
//! PNG with a JSON sidecar.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridGeometry, ScalarField};

/// Metadata written next to a field image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub cells: usize,
    pub theta: f64,
    pub kappa: f64,
    pub t_final: f64,
}

/// Writes the node matrix, row `j` per line, values in shortest round-trip
/// form.
pub fn write_field_csv<W: Write>(field: &ScalarField, out: W) -> Result<()> {
    let n = field.geometry().side();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let mut row = Vec::with_capacity(n);
    for chunk in field.values().chunks(n) {
        row.clear();
        row.extend(chunk.iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_field_csv(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let f = File::create(path)?;
    write_field_csv(field, BufWriter::new(f))
}

/// Reads a node matrix written by [`write_field_csv`]. The grid side is
/// inferred from the row count; `length` supplies `L`.
pub fn read_field_csv<R: Read>(input: R, length: f64) -> Result<ScalarField> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    let mut rows = 0usize;
    let mut width = None;
    for rec in rdr.records() {
        let rec = rec?;
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Parse(format!(
                    "row {rows} has {} columns, expected {w}",
                    rec.len()
                )))
            }
            _ => {}
        }
        for cell in rec.iter() {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{cell}` in row {rows}")))?;
            values.push(v);
        }
        rows += 1;
    }
    if width != Some(rows) || rows < 5 {
        return Err(Error::Parse(format!(
            "expected a square matrix with at least 5 rows, got {rows}x{}",
            width.unwrap_or(0)
        )));
    }
    let geometry = GridGeometry::new(length, rows - 1)?;
    ScalarField::from_values(geometry, values)
}

pub fn load_field_csv(path: impl AsRef<Path>, length: f64) -> Result<ScalarField> {
    read_field_csv(File::open(path)?, length)
}

/// Maps `u ∈ [-1, 1]` affinely onto `[0, 65535]`.
pub fn gray16(u: f64) -> u16 {
    let t = ((u.clamp(-1.0, 1.0) + 1.0) * 0.5 * 65535.0).round();
    t as u16
}

/// Big-endian 16-bit samples, one per node, rows in `j` order.
pub fn write_field_png<W: Write>(field: &ScalarField, out: W) -> Result<()> {
    let n = field.geometry().side() as u32;
    let mut enc = png::Encoder::new(out, n, n);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let mut writer = enc
        .write_header()
        .map_err(|e| Error::Io(e.to_string()))?;
    let data: Vec<u8> = field
        .values()
        .iter()
        .flat_map(|&u| gray16(u).to_be_bytes())
        .collect();
    writer
        .write_image_data(&data)
        .map_err(|e| Error::Io(e.to_string()))?;
    writer.finish().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// Writes `<stem>.png` and `<stem>.json` into `dir`.
pub fn save_field_image(
    field: &ScalarField,
    sidecar: &FieldSidecar,
    dir: impl AsRef<Path>,
    stem: &str,
) -> Result<()> {
    let dir = dir.as_ref();
    let png = File::create(dir.join(format!("{stem}.png")))?;
    write_field_png(field, BufWriter::new(png))?;
    let mut json = File::create(dir.join(format!("{stem}.json")))?;
    serde_json::to_writer_pretty(&mut json, sidecar)?;
    json.write_all(b"\n")?;
    Ok(())
}

/// Observer for [`crate::dynamics::run_from`] that saves each checkpoint
/// as `<dir>/checkpoint_<steps>.csv`.
pub fn checkpoint_dumper(
    dir: impl AsRef<Path>,
) -> impl FnMut(&crate::dynamics::Checkpoint) -> Result<()> {
    let dir = dir.as_ref().to_path_buf();
    move |c| save_field_csv(c.field, dir.join(format!("checkpoint_{:09}.csv", c.steps)))
}
