//! GridFunction file formats.
//!
//! CSV:
//!
//! ```text
//! n,L,N
//! 1,2,256
//! index,value
//! 0,0.0
//! 1,0.0
//! ...
//! ```
//!
//! Binary: the magic `MGF1`, then `n: u32`, `L: f64`, `N: u32` and `N^n`
//! values as `f64`, all little-endian, values in row-major cell order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Grid, GridFunction};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MGF1";

impl GridFunction {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        out.write_record(["n", "L", "N"])?;
        let g = self.grid();
        out.write_record([
            g.n().to_string(),
            format!("{:?}", g.half_width()),
            g.cells_per_axis().to_string(),
        ])?;
        out.write_record(["index", "value"])?;
        for (i, v) in self.values().iter().enumerate() {
            out.write_record([i.to_string(), format!("{v:?}")])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let mut rows = rdr.records();
        let mut next = |what: &str| -> Result<csv::StringRecord> {
            rows.next()
                .ok_or_else(|| Error::Format(format!("grid CSV ended before {what}")))?
                .map_err(Error::from)
        };
        let head = next("the header")?;
        if head.iter().collect::<Vec<_>>() != ["n", "L", "N"] {
            return Err(Error::Format("grid CSV must start with `n,L,N`".into()));
        }
        let dims = next("the grid row")?;
        let field = |i: usize| dims.get(i).ok_or_else(|| Error::Format("grid row needs three fields".into()));
        let n: usize = field(0)?.parse().map_err(|_| Error::Format("bad n".into()))?;
        let l: f64 = field(1)?.parse().map_err(|_| Error::Format("bad L".into()))?;
        let cells: usize = field(2)?.parse().map_err(|_| Error::Format("bad N".into()))?;
        let grid = Grid::new(n, l, cells)?;
        let sub = next("the value header")?;
        if sub.iter().collect::<Vec<_>>() != ["index", "value"] {
            return Err(Error::Format("expected `index,value` after the grid row".into()));
        }
        let mut values = vec![f64::NAN; grid.len()];
        let mut seen = 0usize;
        for rec in rows {
            let rec = rec?;
            let (Some(i), Some(v)) = (rec.get(0), rec.get(1)) else {
                return Err(Error::Format("value rows need two fields".into()));
            };
            let i: usize = i.parse().map_err(|_| Error::Format(format!("bad index `{i}`")))?;
            let v: f64 = v.parse().map_err(|_| Error::Format(format!("bad value `{v}`")))?;
            if i >= values.len() {
                return Err(Error::Format(format!("index {i} out of range")));
            }
            if values[i].is_nan() {
                seen += 1;
            }
            values[i] = v;
        }
        if seen != values.len() {
            return Err(Error::Format(format!("expected {} values, found {seen}", values.len())));
        }
        GridFunction::new(grid, values)
    }

    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let g = self.grid();
        w.write_all(MAGIC)?;
        w.write_all(&(g.n() as u32).to_le_bytes())?;
        w.write_all(&g.half_width().to_le_bytes())?;
        w.write_all(&(g.cells_per_axis() as u32).to_le_bytes())?;
        for v in self.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("missing MGF1 magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let l = f64::from_le_bytes(b8);
        r.read_exact(&mut b4)?;
        let cells = u32::from_le_bytes(b4) as usize;
        let grid = Grid::new(n, l, cells)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        GridFunction::new(grid, values)
    }

    /// Writes by extension: `.csv` for CSV, anything else binary.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = BufWriter::new(File::create(path)?);
        if path.extension().is_some_and(|e| e == "csv") {
            self.write_csv(file)
        } else {
            self.write_binary(file)
        }
    }

    /// Reads either format, recognising binary files by their magic.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.starts_with(MAGIC) {
            Self::read_binary(bytes.as_slice())
        } else {
            Self::read_csv(bytes.as_slice())
        }
    }
}
