//! Field snapshots: a little-endian binary format and a JSON form for small grids.
//!
//! Binary layout: magic `HCGOFLD1`, n (u64), side (f64), component count (u64, always 8),
//! then for each component in blade order `[1, dx1, dx2, dx3, dx12, dx13, dx23, dx123]`
//! the n³ grid values in row-major (i0, i1, i2) order as (re, im) f64 pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FormField, Grid};

const MAGIC: &[u8; 8] = b"HCGOFLD1";

/// Largest grid written as a JSON snapshot.
pub const JSON_SNAPSHOT_MAX_N: usize = 16;

pub const COMPONENT_NAMES: [&str; 8] = ["1", "dx1", "dx2", "dx3", "dx12", "dx13", "dx23", "dx123"];

pub fn write_field<W: Write>(mut w: W, f: &FormField) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u64::<LittleEndian>(f.grid.n as u64)?;
    w.write_f64::<LittleEndian>(f.grid.side)?;
    w.write_u64::<LittleEndian>(8)?;
    for z in &f.data {
        w.write_f64::<LittleEndian>(z.re)?;
        w.write_f64::<LittleEndian>(z.im)?;
    }
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<FormField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidArgument("not a field snapshot (bad magic)".into()));
    }
    let n = r.read_u64::<LittleEndian>()? as usize;
    let side = r.read_f64::<LittleEndian>()?;
    let comps = r.read_u64::<LittleEndian>()?;
    if comps != 8 {
        return Err(Error::InvalidArgument(format!("snapshot has {comps} components, expected 8")));
    }
    let grid = Grid::new(n, side)?;
    let mut data = Vec::with_capacity(8 * grid.len());
    for _ in 0..8 * grid.len() {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        data.push(Complex64::new(re, im));
    }
    FormField::from_data(grid, data)
}

pub fn save_field(path: &Path, f: &FormField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<FormField> {
    read_field(BufReader::new(File::open(path)?))
}

/// JSON form of a snapshot: one array of [re, im] pairs per named component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub n: usize,
    pub side: f64,
    pub components: Vec<(String, Vec<[f64; 2]>)>,
}

impl FieldSnapshot {
    pub fn from_field(f: &FormField) -> Result<Self> {
        if f.grid.n > JSON_SNAPSHOT_MAX_N {
            return Err(Error::InvalidArgument(format!(
                "JSON snapshots are limited to n <= {JSON_SNAPSHOT_MAX_N}, got {}",
                f.grid.n
            )));
        }
        let components = COMPONENT_NAMES
            .iter()
            .enumerate()
            .map(|(c, name)| (name.to_string(), f.component(c).iter().map(|z| [z.re, z.im]).collect()))
            .collect();
        Ok(Self { n: f.grid.n, side: f.grid.side, components })
    }

    pub fn to_field(&self) -> Result<FormField> {
        let grid = Grid::new(self.n, self.side)?;
        if self.components.len() != 8 || self.components.iter().any(|(_, v)| v.len() != grid.len()) {
            return Err(Error::InvalidArgument("snapshot component sizes do not match the grid".into()));
        }
        let data = self.components.iter().flat_map(|(_, v)| v.iter().map(|p| Complex64::new(p[0], p[1]))).collect();
        FormField::from_data(grid, data)
    }
}

/// Writes `<stem>.bin`, and `<stem>.json` as well when the grid is small enough.
pub fn save_snapshot(dir: &Path, stem: &str, f: &FormField) -> Result<()> {
    save_field(&dir.join(format!("{stem}.bin")), f)?;
    if f.grid.n <= JSON_SNAPSHOT_MAX_N {
        let snap = FieldSnapshot::from_field(f)?;
        let mut w = BufWriter::new(File::create(dir.join(format!("{stem}.json")))?);
        serde_json::to_writer(&mut w, &snap)?;
        w.flush()?;
    }
    Ok(())
}
