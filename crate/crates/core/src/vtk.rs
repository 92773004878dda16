//! Legacy ASCII VTK export.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

fn cell_type(dim: usize) -> u8 {
    match dim {
        1 => 3,
        2 => 5,
        _ => 10,
    }
}

/// Unstructured grid with point data. Dummy cells are written only when
/// `include_dummies` is set.
pub fn vtk_string(mesh: &Mesh, fields: &[(&str, &[f64])], include_dummies: bool) -> String {
    let d = mesh.dim();
    let cells: Vec<usize> = (0..mesh.num_elements()).filter(|&e| include_dummies || !mesh.class(e).is_dummy()).collect();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\ntfemdg solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.num_vertices());
    for v in 0..mesh.num_vertices() {
        let p = mesh.vertex(v);
        let xyz: Vec<String> = (0..3).map(|c| format!("{:.16e}", if c < d { p[c] } else { 0.0 })).collect();
        let _ = writeln!(out, "{}", xyz.join(" "));
    }
    let _ = writeln!(out, "CELLS {} {}", cells.len(), cells.len() * (d + 2));
    for &e in &cells {
        let ids: Vec<String> = mesh.element(e).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{} {}", d + 1, ids.join(" "));
    }
    let _ = writeln!(out, "CELL_TYPES {}", cells.len());
    for _ in &cells {
        let _ = writeln!(out, "{}", cell_type(d));
    }
    let _ = writeln!(out, "CELL_DATA {}", cells.len());
    out.push_str("SCALARS class int 1\nLOOKUP_TABLE default\n");
    for &e in &cells {
        let _ = writeln!(out, "{}", mesh.class(e) as u8);
    }
    if !fields.is_empty() {
        let _ = writeln!(out, "POINT_DATA {}", mesh.num_vertices());
        for (name, values) in fields {
            let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in values.iter() {
                let _ = writeln!(out, "{v:.16e}");
            }
        }
    }
    out
}

pub fn write_vtk(path: &Path, mesh: &Mesh, fields: &[(&str, &[f64])], include_dummies: bool) -> Result<()> {
    for (name, values) in fields {
        if values.len() != mesh.num_vertices() {
            return Err(Error::InvalidArgument(format!("field {name} has {} values", values.len())));
        }
    }
    std::fs::write(path, vtk_string(mesh, fields, include_dummies)).map_err(|e| Error::io(path, e))
}
