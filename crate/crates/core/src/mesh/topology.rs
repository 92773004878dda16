use std::collections::HashMap;

use super::Mesh;
use crate::error::{Error, Result};

/// A facet of the thick sub-mesh.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Facet {
    /// Vertex ids in the order they appear in the left element.
    pub vertices: Vec<usize>,
    /// Owner with the smaller element id.
    pub left: usize,
    /// Second owner; `None` on the boundary.
    pub right: Option<usize>,
    /// Local index of the left element's vertex opposite this facet.
    pub left_opposite: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FacetTopology {
    pub interior: Vec<Facet>,
    pub boundary: Vec<Facet>,
}

/// Facet adjacency of the thick elements of `mesh`.
///
/// Facets are listed in order of first appearance when walking elements by
/// id and local facets by opposite-vertex index.
pub fn extract_interfaces(mesh: &Mesh) -> Result<FacetTopology> {
    let d = mesh.dim();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut facets: Vec<Facet> = Vec::new();
    let mut owners: Vec<usize> = Vec::new();
    for e in mesh.thick_elements() {
        let ids = mesh.element(e);
        for k in 0..=d {
            let vertices: Vec<usize> =
                ids.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect();
            let mut key = vertices.clone();
            key.sort_unstable();
            match index.get(&key) {
                Some(&f) => {
                    owners[f] += 1;
                    if owners[f] > 2 {
                        return Err(Error::NonConforming { vertices: key, owners: owners[f] });
                    }
                    facets[f].right = Some(e);
                }
                None => {
                    index.insert(key, facets.len());
                    facets.push(Facet { vertices, left: e, right: None, left_opposite: k });
                    owners.push(1);
                }
            }
        }
    }
    let (interior, boundary) = facets.into_iter().partition(|f| f.right.is_some());
    Ok(FacetTopology { interior, boundary })
}
