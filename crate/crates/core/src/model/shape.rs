use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// One feature's shape function sampled on a grid (original units).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeTable {
    pub feature_index: usize,
    pub feature_name: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Offset subtracted from the raw shape values (0 when uncentered).
    pub offset: f64,
}

/// Nine significant digits, scientific notation.
pub fn format_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

impl ShapeTable {
    /// Writes `feature,x,f` CSV rows for every table, with a single header.
    pub fn write_csv<W: Write>(tables: &[ShapeTable], out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["feature", "x", "f"])?;
        for t in tables {
            for (x, f) in t.grid.iter().zip(&t.values) {
                w.write_record([t.feature_name.as_str(), &format_sig9(*x), &format_sig9(*f)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
