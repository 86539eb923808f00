//! Solution profiles as CSV: one row per mesh node (boundary included),
//! columns `x,u` in 1D and `x,y,u` in 2D.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{DiscreteFunction, Mesh};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidProblem(format!("profile: {e}"))
}

pub fn write_profile<W: Write>(u: &DiscreteFunction, out: W) -> Result<()> {
    let mesh = u.mesh();
    let mut w = csv::Writer::from_writer(out);
    let header: &[&str] = if mesh.dim() == 1 { &["x", "u"] } else { &["x", "y", "u"] };
    w.write_record(header).map_err(io_err)?;
    for (k, x) in mesh.coords().iter().enumerate() {
        let v = mesh.node_dof(k).map_or(0.0, |d| u.values()[d]);
        let mut row = vec![x[0].to_string()];
        if mesh.dim() == 2 {
            row.push(x[1].to_string());
        }
        row.push(v.to_string());
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Reads a profile written by [`write_profile`] back onto `mesh`.
pub fn read_profile<R: Read>(mesh: &Arc<Mesh>, input: R) -> Result<DiscreteFunction> {
    let mut r = csv::Reader::from_reader(input);
    let mut u = DiscreteFunction::zeros(mesh);
    let n = mesh.n() as f64;
    let width = mesh.n() + 1;
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.map_err(io_err)?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(io_err))
            .collect::<Result<_>>()?;
        if vals.len() != mesh.dim() + 1 {
            return Err(io_err(format!("expected {} columns", mesh.dim() + 1)));
        }
        let i = (vals[0] * n).round() as usize;
        let node = if mesh.dim() == 1 {
            i
        } else {
            (vals[1] * n).round() as usize * width + i
        };
        if node >= mesh.node_count() {
            return Err(io_err("node outside the mesh"));
        }
        if let Some(d) = mesh.node_dof(node) {
            u.values_mut()[d] = vals[mesh.dim()];
        }
        rows += 1;
    }
    if rows != mesh.node_count() {
        return Err(io_err(format!("expected {} rows, found {rows}", mesh.node_count())));
    }
    Ok(u)
}
