//! Plain-text mesh format.
//!
//! ```text
//! # comment
//! dim n_vertices n_elements
//! x [y [z]]              (one line per vertex)
//! v0 .. v_dim TAG coeff  (one line per element, TAG in T/I/B)
//! ```
//!
//! Reals are written with 17 significant digits so a write/read round trip
//! is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ElementClass, Mesh};
use crate::error::{Error, Result};

pub fn write_mesh_to(mesh: &Mesh) -> String {
    let mut s = String::new();
    let d = mesh.dim();
    writeln!(s, "{} {} {}", d, mesh.num_vertices(), mesh.num_elements()).unwrap();
    for v in 0..mesh.num_vertices() {
        let line: Vec<String> = mesh.vertex(v).iter().map(|c| format!("{c:.16e}")).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    for e in 0..mesh.num_elements() {
        for v in mesh.element(e) {
            write!(s, "{v} ").unwrap();
        }
        writeln!(s, "{} {:.16e}", mesh.class(e).tag(), mesh.coefficient(e)).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_mesh_to(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") })
    };

    let (line, header) = next("header")?;
    let header: Vec<usize> = parse_fields(line, header)?;
    let [dim, nv, ne] = header[..] else {
        return Err(Error::Parse { line, msg: "header must be `dim n_vertices n_elements`".into() });
    };
    if !(1..=3).contains(&dim) {
        return Err(Error::Parse { line, msg: format!("unsupported dimension {dim}") });
    }

    let mut coords = Vec::with_capacity(nv * dim);
    for _ in 0..nv {
        let (line, l) = next("vertex")?;
        let c: Vec<f64> = parse_fields(line, l)?;
        if c.len() != dim {
            return Err(Error::Parse { line, msg: format!("expected {dim} coordinates, got {}", c.len()) });
        }
        coords.extend(c);
    }

    let mut cells = Vec::with_capacity(ne * (dim + 1));
    let mut classes = Vec::with_capacity(ne);
    let mut coefficients = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (line, l) = next("element")?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != dim + 3 {
            return Err(Error::Parse { line, msg: format!("expected {} fields, got {}", dim + 3, fields.len()) });
        }
        for f in &fields[..=dim] {
            cells.push(f.parse::<usize>().map_err(|e| Error::Parse { line, msg: e.to_string() })?);
        }
        let class = ElementClass::from_tag(fields[dim + 1])
            .ok_or_else(|| Error::Parse { line, msg: format!("unknown class tag `{}`", fields[dim + 1]) })?;
        classes.push(class);
        coefficients.push(fields[dim + 2].parse::<f64>().map_err(|e| Error::Parse { line, msg: e.to_string() })?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse { line, msg: "trailing content after last element".into() });
    }
    Mesh::new(dim, coords, cells, classes, coefficients)
}

fn parse_fields<T: std::str::FromStr>(line: usize, l: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    l.split_whitespace()
        .map(|f| f.parse::<T>().map_err(|e| Error::Parse { line, msg: format!("`{f}`: {e}") }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{crisscross_square, cube_tets, interval};

    #[test]
    fn round_trip_is_exact() {
        for m in [interval(7).unwrap(), crisscross_square(3).unwrap(), cube_tets(2).unwrap()] {
            let back = parse_mesh(&write_mesh_to(&m)).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# unit interval\n1 2 1\n\n0.0\n1.0 # right end\n0 1 T 2.5\n";
        let m = parse_mesh(text).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.coefficient(0), 2.5);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_mesh("1 2 1\n0\n1\n0 1 X 1\n").is_err());
        assert!(parse_mesh("1 2 1\n0\n1\n").is_err());
        assert!(parse_mesh("2 2 0\n0\n1\n").is_err());
        assert!(parse_mesh("1 2 1\n0\n1\n0 1 T 1\n0 1 T 1\n").is_err());
    }
}
