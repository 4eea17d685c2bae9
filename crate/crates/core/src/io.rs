//! Snapshot CSV files: one row per node in storage order (φ outer, ρ inner).

use crate::field::{ScalarField, VectorField};
use crate::grid::{GridError, MeridianGrid};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: unexpected header {found:?}")]
    Header { path: String, found: Vec<String> },
    #[error("{path}: row {row} has coordinates ({rho}, {phi}) that do not match the grid")]
    Coordinates { path: String, row: usize, rho: f64, phi: f64 },
    #[error("{path}: {source}")]
    Grid { path: String, source: GridError },
}

const SCALAR_HEADER: [&str; 3] = ["rho", "phi", "value"];
const VECTOR_HEADER: [&str; 5] = ["rho", "phi", "v_rho", "v_phi", "v_theta"];

fn create(path: &Path) -> Result<BufWriter<File>, SnapshotError> {
    let io = |source| SnapshotError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io)?))
}

fn write_rows(path: &Path, header: &[&str], grid: &MeridianGrid<f64>, cols: &[&ScalarField<f64>]) -> Result<(), SnapshotError> {
    let io = |source| SnapshotError::Io { path: path.display().to_string(), source };
    let mut w = create(path)?;
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (i, j) in grid.nodes() {
        write!(w, "{:.16e},{:.16e}", grid.rho(i), grid.phi(j)).map_err(io)?;
        for c in cols {
            write!(w, ",{:.16e}", c.at(i, j)).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_scalar_csv(path: impl AsRef<Path>, f: &ScalarField<f64>) -> Result<(), SnapshotError> {
    write_rows(path.as_ref(), &SCALAR_HEADER, f.grid(), &[f])
}

pub fn write_vector_csv(path: impl AsRef<Path>, v: &VectorField<f64>) -> Result<(), SnapshotError> {
    write_rows(path.as_ref(), &VECTOR_HEADER, v.grid(), &[&v.rho, &v.phi, &v.theta])
}

fn read_columns(path: &Path, header: &[&str], grid: &Arc<MeridianGrid<f64>>) -> Result<Vec<Vec<f64>>, SnapshotError> {
    let name = path.display().to_string();
    let csv_err = |source| SnapshotError::Csv { path: name.clone(), source };
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let found: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(SnapshotError::Header { path: name, found });
    }
    let ncol = header.len() - 2;
    let mut cols = vec![Vec::with_capacity(grid.len()); ncol];
    let mut nodes = grid.nodes();
    for (row, rec) in rd.deserialize::<Vec<f64>>().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let coords_ok = match nodes.next() {
            Some((i, j)) => {
                let tol = 1e-12;
                (rec[0] - grid.rho(i)).abs() <= tol && (rec[1] - grid.phi(j)).abs() <= tol
            }
            None => false,
        };
        if !coords_ok {
            return Err(SnapshotError::Coordinates { path: name, row, rho: rec[0], phi: rec[1] });
        }
        for (c, x) in cols.iter_mut().zip(&rec[2..]) {
            c.push(*x);
        }
    }
    Ok(cols)
}

pub fn read_scalar_csv(path: impl AsRef<Path>, grid: &Arc<MeridianGrid<f64>>) -> Result<ScalarField<f64>, SnapshotError> {
    let path = path.as_ref();
    let grid_err = |source| SnapshotError::Grid { path: path.display().to_string(), source };
    let mut cols = read_columns(path, &SCALAR_HEADER, grid)?;
    ScalarField::from_vec(grid, cols.remove(0)).map_err(grid_err)
}

pub fn read_vector_csv(path: impl AsRef<Path>, grid: &Arc<MeridianGrid<f64>>) -> Result<VectorField<f64>, SnapshotError> {
    let path = path.as_ref();
    let grid_err = |source| SnapshotError::Grid { path: path.display().to_string(), source };
    let mut cols = read_columns(path, &VECTOR_HEADER, grid)?.into_iter();
    let mut next = || ScalarField::from_vec(grid, cols.next().unwrap_or_default()).map_err(grid_err);
    let (r, p, t) = (next()?, next()?, next()?);
    Ok(VectorField { rho: r, phi: p, theta: t })
}
