//! Dimension-generic simplicial meshes.
//!
//! Vertices are stored as a flat coordinate array with stride `dim` and
//! elements as a flat id array with stride `dim + 1`. Each element carries a
//! class tag and a positive diffusion coefficient.

mod generate;
mod io;
mod topology;

pub use generate::{cube_tets, crisscross_square, interval, interval_beta_mesh};
pub use io::{parse_mesh, read_mesh, write_mesh, write_mesh_to};
pub use topology::{extract_interfaces, Facet, FacetTopology};

use crate::error::{Error, Result};
use crate::geometry::{distance, AffineMap};

/// Role of an element in a (possibly DG-ified) mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementClass {
    /// Full-measure element of the original mesh.
    Thick,
    /// Zero-measure element collapsed onto an interior interface.
    InterfaceDummy,
    /// Zero-measure element collapsed onto the domain boundary.
    BoundaryDummy,
}

impl ElementClass {
    pub fn tag(self) -> char {
        match self {
            ElementClass::Thick => 'T',
            ElementClass::InterfaceDummy => 'I',
            ElementClass::BoundaryDummy => 'B',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "T" => Some(ElementClass::Thick),
            "I" => Some(ElementClass::InterfaceDummy),
            "B" => Some(ElementClass::BoundaryDummy),
            _ => None,
        }
    }

    pub fn is_dummy(self) -> bool {
        self != ElementClass::Thick
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    classes: Vec<ElementClass>,
    coefficients: Vec<f64>,
}

impl Mesh {
    /// Validating constructor.
    ///
    /// Thick elements must have nonzero determinant, dummy elements must have
    /// a determinant of exactly zero.
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        cells: Vec<usize>,
        classes: Vec<ElementClass>,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::MalformedMesh(format!("unsupported dimension {dim}")));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::MalformedMesh("coordinate array length is not a multiple of dim".into()));
        }
        if !cells.len().is_multiple_of(dim + 1) {
            return Err(Error::MalformedMesh("cell array length is not a multiple of dim + 1".into()));
        }
        let n_el = cells.len() / (dim + 1);
        if classes.len() != n_el || coefficients.len() != n_el {
            return Err(Error::MalformedMesh("per-element arrays have inconsistent lengths".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::MalformedMesh(format!("non-finite coordinate {c}")));
        }
        let mesh = Mesh { dim, coords, cells, classes, coefficients };
        let nv = mesh.num_vertices();
        for e in 0..n_el {
            let ids = mesh.element(e);
            for (k, &v) in ids.iter().enumerate() {
                if v >= nv {
                    return Err(Error::MalformedMesh(format!("element {e} references vertex {v} of {nv}")));
                }
                if ids[..k].contains(&v) {
                    return Err(Error::MalformedMesh(format!("element {e} repeats vertex {v}")));
                }
            }
            let coeff = mesh.coefficients[e];
            if !(coeff.is_finite() && coeff > 0.0) {
                return Err(Error::MalformedMesh(format!("element {e} has coefficient {coeff}")));
            }
            let det = mesh.affine_map(e).det();
            match mesh.classes[e] {
                ElementClass::Thick if det == 0.0 => {
                    return Err(Error::MalformedMesh(format!("thick element {e} is degenerate")));
                }
                ElementClass::InterfaceDummy | ElementClass::BoundaryDummy if det != 0.0 => {
                    return Err(Error::MalformedMesh(format!("dummy element {e} has det {det:e}")));
                }
                _ => {}
            }
        }
        Ok(mesh)
    }

    /// Mesh of thick elements with unit coefficient.
    pub fn from_thick(dim: usize, coords: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        let n_el = cells.len() / (dim + 1);
        Self::new(dim, coords, cells, vec![ElementClass::Thick; n_el], vec![1.0; n_el])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn num_elements(&self) -> usize {
        self.classes.len()
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[e * k..(e + 1) * k]
    }

    pub fn class(&self, e: usize) -> ElementClass {
        self.classes[e]
    }

    pub fn coefficient(&self, e: usize) -> f64 {
        self.coefficients[e]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn classes(&self) -> &[ElementClass] {
        &self.classes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Replaces the per-element coefficient field.
    pub fn with_coefficients(mut self, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != self.num_elements() {
            return Err(Error::InvalidArgument("coefficient count does not match element count".into()));
        }
        if let Some(c) = coefficients.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidArgument(format!("coefficient {c} is not positive")));
        }
        self.coefficients = coefficients;
        Ok(self)
    }

    pub fn thick_elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_elements()).filter(|&e| self.classes[e] == ElementClass::Thick)
    }

    pub fn count_class(&self, class: ElementClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn element_points(&self, e: usize) -> Vec<&[f64]> {
        self.element(e).iter().map(|&v| self.vertex(v)).collect()
    }

    pub fn affine_map(&self, e: usize) -> AffineMap {
        AffineMap::new(&self.element_points(e))
    }

    /// Longest edge of element `e`.
    pub fn element_diameter(&self, e: usize) -> f64 {
        let ids = self.element(e);
        let mut h: f64 = 0.0;
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                h = h.max(distance(self.vertex(ids[i]), self.vertex(ids[j])));
            }
        }
        h
    }

    /// Shortest edge of element `e`.
    pub fn element_min_edge(&self, e: usize) -> f64 {
        let ids = self.element(e);
        let mut h = f64::INFINITY;
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                h = h.min(distance(self.vertex(ids[i]), self.vertex(ids[j])));
            }
        }
        h
    }

    /// Grid spacing: the shortest edge over thick elements, `1/n` on the
    /// structured generators. This is the `h` in `j_min = h^p`.
    pub fn grid_spacing(&self) -> f64 {
        self.thick_elements().map(|e| self.element_min_edge(e)).fold(f64::INFINITY, f64::min)
    }

    /// Global mesh size: the longest edge over thick elements.
    pub fn mesh_size(&self) -> f64 {
        self.thick_elements().map(|e| self.element_diameter(e)).fold(0.0, f64::max)
    }

    /// Total measure of the thick elements.
    pub fn thick_volume(&self) -> f64 {
        self.thick_elements().map(|e| self.affine_map(e).measure()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_repeated_vertex() {
        let err = Mesh::from_thick(1, vec![0.0, 1.0], vec![0, 0]).unwrap_err();
        assert!(matches!(err, Error::MalformedMesh(_)));
    }

    #[test]
    fn rejects_degenerate_thick_and_thick_dummy() {
        let coords = vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0];
        assert!(Mesh::from_thick(2, coords.clone(), vec![0, 1, 2]).is_err());
        let square = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let err = Mesh::new(2, square, vec![0, 1, 2], vec![ElementClass::InterfaceDummy], vec![1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn mesh_size_examples() {
        assert!((interval(10).unwrap().mesh_size() - 0.1).abs() < 1e-15);
        let h = crisscross_square(8).unwrap().mesh_size();
        assert!((h - 2f64.sqrt() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_field_is_validated() {
        let m = interval(2).unwrap();
        assert!(m.clone().with_coefficients(vec![1.0]).is_err());
        assert!(m.clone().with_coefficients(vec![1.0, -2.0]).is_err());
        let m = m.with_coefficients(vec![1.0, 3.0]).unwrap();
        assert_eq!(m.coefficient(1), 3.0);
    }
}
