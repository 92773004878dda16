//! DG-ification: the mesh edit that turns a conforming mesh into one on which
//! thresholded continuous P1 FEM is a jump-penalty DG method.
//!
//! Every thick element receives its own copy of each vertex that lies on a
//! selected interface, and each selected interface is filled with `dim`
//! zero-measure simplices spanned by the two copies of the facet. Vertex
//! copies are shared across facets that are not selected, so a partial
//! selection gives a FEM/DG hybrid that is continuous wherever no interface
//! was inserted. Holes around vertices (2D) and edges (3D) stay unmeshed.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::facet_measure;
use crate::mesh::{extract_interfaces, ElementClass, Facet, FacetTopology, Mesh};

type MidpointPredicate = Arc<dyn Fn(usize, &[f64]) -> bool + Send + Sync>;

/// Chooses which interior facets receive interface elements.
#[derive(Clone)]
pub enum InterfaceSelector {
    All,
    None,
    /// Facets whose centroid lies strictly inside the ball.
    Circle { center: Vec<f64>, radius: f64 },
    /// Explicit interior-facet ids (indices into [`FacetTopology::interior`]).
    Ids(Vec<usize>),
    /// Arbitrary predicate on `(interior facet id, centroid)`.
    Predicate(MidpointPredicate),
}

impl fmt::Debug for InterfaceSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceSelector::All => write!(f, "All"),
            InterfaceSelector::None => write!(f, "None"),
            InterfaceSelector::Circle { center, radius } => {
                f.debug_struct("Circle").field("center", center).field("radius", radius).finish()
            }
            InterfaceSelector::Ids(ids) => f.debug_tuple("Ids").field(ids).finish(),
            InterfaceSelector::Predicate(_) => write!(f, "Predicate(..)"),
        }
    }
}

/// Selector for the moving-front demo: interfaces whose centroid is strictly
/// inside the ball of `radius` around `center`.
pub fn circular_front_selector(center: &[f64], radius: f64) -> Result<InterfaceSelector> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be nonnegative")));
    }
    Ok(InterfaceSelector::Circle { center: center.to_vec(), radius })
}

#[derive(Debug, Clone)]
pub struct DgifyOptions {
    pub selector: InterfaceSelector,
    /// Insert boundary dummies connecting boundary facets to pinned outer
    /// vertex copies, so Dirichlet data is imposed by jump penalization.
    pub boundary_layer: bool,
}

impl DgifyOptions {
    pub fn full_dg() -> Self {
        DgifyOptions { selector: InterfaceSelector::All, boundary_layer: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterfaceKind {
    Interior,
    Boundary,
}

/// A selected facet with its two vertex copies.
///
/// `left_vertices[i]` and `right_vertices[i]` sit at the same point. For
/// boundary interfaces the left side is the thick element and the right side
/// the pinned outer copy. Jumps are `left - right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interface {
    pub kind: InterfaceKind,
    /// Index into the interior or boundary list of the source topology.
    pub facet: usize,
    pub left_vertices: Vec<usize>,
    pub right_vertices: Vec<usize>,
    pub left_element: usize,
    pub right_element: Option<usize>,
    pub dummies: Vec<usize>,
    /// Length in 2D, area in 3D, 1 in 1D.
    pub measure: f64,
}

impl Interface {
    /// Whether the two sides have distinct copies at local vertex `i`.
    pub fn is_split_at(&self, i: usize) -> bool {
        self.left_vertices[i] != self.right_vertices[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexOrigin {
    /// Copy of `original` used by the thick elements of its group; `owner`
    /// is the smallest element id in that group.
    Copy { original: usize, owner: usize },
    /// Pinned outer copy of a boundary vertex.
    Outer { original: usize },
}

impl VertexOrigin {
    pub fn original(&self) -> usize {
        match *self {
            VertexOrigin::Copy { original, .. } | VertexOrigin::Outer { original } => original,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DgifyResult {
    pub mesh: Mesh,
    /// Selected interior interfaces first, then boundary interfaces.
    pub interfaces: Vec<Interface>,
    pub vertex_provenance: Vec<VertexOrigin>,
    /// Pinned outer vertices (boundary layer only).
    pub outer_boundary_vertices: Vec<usize>,
    /// Thick-element vertex copies lying on the domain boundary.
    pub boundary_vertices: Vec<usize>,
    /// Facet topology of the source mesh.
    pub source_topology: FacetTopology,
}

/// Everything in a [`DgifyResult`] except the mesh itself: the auditable
/// record of which vertex copy came from where and which elements fill
/// which interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub interfaces: Vec<Interface>,
    pub vertex_provenance: Vec<VertexOrigin>,
    pub outer_boundary_vertices: Vec<usize>,
    pub boundary_vertices: Vec<usize>,
    pub source_topology: FacetTopology,
}

impl DgifyResult {
    pub fn provenance(&self) -> Provenance {
        Provenance {
            interfaces: self.interfaces.clone(),
            vertex_provenance: self.vertex_provenance.clone(),
            outer_boundary_vertices: self.outer_boundary_vertices.clone(),
            boundary_vertices: self.boundary_vertices.clone(),
            source_topology: self.source_topology.clone(),
        }
    }

    /// Reattaches a provenance record to its mesh, checking that they fit.
    pub fn from_parts(mesh: Mesh, p: Provenance) -> Result<Self> {
        let nv = mesh.num_vertices();
        let ne = mesh.num_elements();
        if p.vertex_provenance.len() != nv {
            return Err(Error::MalformedMesh(format!(
                "provenance lists {} vertices, mesh has {nv}",
                p.vertex_provenance.len()
            )));
        }
        for (i, iface) in p.interfaces.iter().enumerate() {
            let ok = iface.left_vertices.len() == mesh.dim()
                && iface.right_vertices.len() == mesh.dim()
                && iface.left_vertices.iter().chain(&iface.right_vertices).all(|&v| v < nv)
                && iface.dummies.iter().all(|&e| e < ne && mesh.class(e).is_dummy())
                && iface.left_element < ne;
            if !ok {
                return Err(Error::UnmatchedInterface(i));
            }
        }
        if p.outer_boundary_vertices.iter().chain(&p.boundary_vertices).any(|&v| v >= nv) {
            return Err(Error::MalformedMesh("boundary vertex out of range".into()));
        }
        Ok(DgifyResult {
            mesh,
            interfaces: p.interfaces,
            vertex_provenance: p.vertex_provenance,
            outer_boundary_vertices: p.outer_boundary_vertices,
            boundary_vertices: p.boundary_vertices,
            source_topology: p.source_topology,
        })
    }

    pub fn interior_interfaces(&self) -> impl Iterator<Item = &Interface> {
        self.interfaces.iter().filter(|i| i.kind == InterfaceKind::Interior)
    }

    pub fn boundary_interfaces(&self) -> impl Iterator<Item = &Interface> {
        self.interfaces.iter().filter(|i| i.kind == InterfaceKind::Boundary)
    }

    /// Dirichlet-constrained vertices: the outer layer when present,
    /// otherwise the thick boundary copies (strong imposition).
    pub fn dirichlet_vertices(&self) -> &[usize] {
        if self.outer_boundary_vertices.is_empty() {
            &self.boundary_vertices
        } else {
            &self.outer_boundary_vertices
        }
    }

    /// Maps each element to the interface it collapses onto, if any.
    pub fn interface_of_element(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.mesh.num_elements()];
        for (i, iface) in self.interfaces.iter().enumerate() {
            for &d in &iface.dummies {
                out[d] = Some(i);
            }
        }
        out
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller slot as root so roots point at the lowest element
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn centroid(mesh: &Mesh, vertices: &[usize]) -> Vec<f64> {
    let d = mesh.dim();
    let mut c = vec![0.0; d];
    for &v in vertices {
        for (ci, x) in c.iter_mut().zip(mesh.vertex(v)) {
            *ci += x;
        }
    }
    c.iter_mut().for_each(|x| *x /= vertices.len() as f64);
    c
}

fn select(mesh: &Mesh, interior: &[Facet], selector: &InterfaceSelector) -> Result<Vec<bool>> {
    let n = interior.len();
    Ok(match selector {
        InterfaceSelector::All => vec![true; n],
        InterfaceSelector::None => vec![false; n],
        InterfaceSelector::Circle { center, radius } => {
            if center.len() != mesh.dim() {
                return Err(Error::InvalidArgument(format!(
                    "circle center has {} coordinates, mesh dimension is {}",
                    center.len(),
                    mesh.dim()
                )));
            }
            interior
                .iter()
                .map(|f| {
                    let m = centroid(mesh, &f.vertices);
                    crate::geometry::distance(&m, center) < *radius
                })
                .collect()
        }
        InterfaceSelector::Ids(ids) => {
            let mut sel = vec![false; n];
            for &id in ids {
                *sel.get_mut(id).ok_or(Error::UnknownInterface(id))? = true;
            }
            sel
        }
        InterfaceSelector::Predicate(p) => {
            interior.iter().enumerate().map(|(i, f)| p(i, &centroid(mesh, &f.vertices))).collect()
        }
    })
}

/// Dummy simplices collapsing onto a facet with left copies `l` and right
/// copies `r` (same local order).
fn dummy_simplices(l: &[usize], r: &[usize]) -> Vec<Vec<usize>> {
    match l.len() {
        1 => vec![vec![l[0], r[0]]],
        2 => vec![vec![r[0], l[1], l[0]], vec![r[0], r[1], l[1]]],
        3 => vec![
            vec![l[0], l[1], l[2], r[0]],
            vec![l[1], l[2], r[0], r[1]],
            vec![l[2], r[0], r[1], r[2]],
        ],
        _ => unreachable!(),
    }
}

/// Applies the interface edit to a conforming mesh of thick elements.
pub fn dgify(mesh: &Mesh, options: &DgifyOptions) -> Result<DgifyResult> {
    if let Some(e) = (0..mesh.num_elements()).find(|&e| mesh.class(e) != ElementClass::Thick) {
        return Err(Error::InvalidArgument(format!("input element {e} is not thick")));
    }
    let topo = extract_interfaces(mesh)?;
    let selected = select(mesh, &topo.interior, &options.selector)?;
    let d = mesh.dim();
    let k = d + 1;
    let n_el = mesh.num_elements();
    let cells = mesh.cells();
    let local = |e: usize, v: usize| -> usize {
        let pos = cells[e * k..(e + 1) * k].iter().position(|&w| w == v).expect("vertex not in element");
        e * k + pos
    };

    // one slot per (element, local vertex); slots joined across unselected facets
    let mut groups = DisjointSet::new(n_el * k);
    for (f, facet) in topo.interior.iter().enumerate() {
        if selected[f] {
            continue;
        }
        let right = facet.right.expect("interior facet has two owners");
        for &v in &facet.vertices {
            groups.union(local(facet.left, v), local(right, v));
        }
    }

    let n_orig = mesh.num_vertices();
    let mut original_taken = vec![false; n_orig];
    let mut root_id: HashMap<usize, usize> = HashMap::new();
    let mut provenance: Vec<VertexOrigin> = (0..n_orig).map(|v| VertexOrigin::Copy { original: v, owner: 0 }).collect();
    let mut extra_coords: Vec<f64> = Vec::new();
    let mut slot_vertex = vec![usize::MAX; n_el * k];

    // the group containing the lowest element keeps the original id
    for slot in 0..n_el * k {
        let root = groups.find(slot);
        let v = cells[slot];
        let id = *root_id.entry(root).or_insert_with(|| {
            let owner = root / k;
            if !original_taken[v] {
                original_taken[v] = true;
                provenance[v] = VertexOrigin::Copy { original: v, owner };
                v
            } else {
                provenance.push(VertexOrigin::Copy { original: v, owner });
                extra_coords.extend_from_slice(mesh.vertex(v));
                provenance.len() - 1
            }
        });
        slot_vertex[slot] = id;
    }
    debug_assert!(original_taken.iter().all(|&t| t), "every vertex belongs to some element");

    let mut coords = mesh.coords().to_vec();
    coords.extend(extra_coords);
    let mut new_cells: Vec<usize> = slot_vertex.clone();
    let mut classes = vec![ElementClass::Thick; n_el];
    let mut coefficients = mesh.coefficients().to_vec();
    let mut interfaces = Vec::new();

    let mut push_interface = |kind: InterfaceKind,
                              facet_id: usize,
                              facet: &Facet,
                              left: Vec<usize>,
                              right: Vec<usize>,
                              class: ElementClass,
                              new_cells: &mut Vec<usize>,
                              classes: &mut Vec<ElementClass>,
                              coefficients: &mut Vec<f64>| {
        let mut dummies = Vec::new();
        for simplex in dummy_simplices(&left, &right) {
            // a repeated id means the copies coincide; that simplex has an
            // identically zero stiffness and is left out
            if (1..simplex.len()).any(|i| simplex[..i].contains(&simplex[i])) {
                continue;
            }
            dummies.push(classes.len());
            new_cells.extend(simplex);
            classes.push(class);
            coefficients.push(1.0);
        }
        let pts: Vec<&[f64]> = facet.vertices.iter().map(|&v| mesh.vertex(v)).collect();
        interfaces.push(Interface {
            kind,
            facet: facet_id,
            left_vertices: left,
            right_vertices: right,
            left_element: facet.left,
            right_element: facet.right,
            dummies,
            measure: facet_measure(&pts),
        });
    };

    for (f, facet) in topo.interior.iter().enumerate() {
        if !selected[f] {
            continue;
        }
        let right_el = facet.right.expect("interior facet has two owners");
        let left: Vec<usize> = facet.vertices.iter().map(|&v| slot_vertex[local(facet.left, v)]).collect();
        let right: Vec<usize> = facet.vertices.iter().map(|&v| slot_vertex[local(right_el, v)]).collect();
        push_interface(
            InterfaceKind::Interior,
            f,
            facet,
            left,
            right,
            ElementClass::InterfaceDummy,
            &mut new_cells,
            &mut classes,
            &mut coefficients,
        );
    }

    let mut boundary_vertices: Vec<usize> = topo
        .boundary
        .iter()
        .flat_map(|f| f.vertices.iter().map(|&v| slot_vertex[local(f.left, v)]).collect::<Vec<_>>())
        .collect();
    boundary_vertices.sort_unstable();
    boundary_vertices.dedup();

    let mut outer_boundary_vertices = Vec::new();
    if options.boundary_layer {
        let mut outer_of: HashMap<usize, usize> = HashMap::new();
        for (f, facet) in topo.boundary.iter().enumerate() {
            let inner: Vec<usize> = facet.vertices.iter().map(|&v| slot_vertex[local(facet.left, v)]).collect();
            let outer: Vec<usize> = facet
                .vertices
                .iter()
                .map(|&v| {
                    *outer_of.entry(v).or_insert_with(|| {
                        coords.extend_from_slice(mesh.vertex(v));
                        provenance.push(VertexOrigin::Outer { original: v });
                        outer_boundary_vertices.push(provenance.len() - 1);
                        provenance.len() - 1
                    })
                })
                .collect();
            push_interface(
                InterfaceKind::Boundary,
                f,
                facet,
                inner,
                outer,
                ElementClass::BoundaryDummy,
                &mut new_cells,
                &mut classes,
                &mut coefficients,
            );
        }
    }

    let mesh = Mesh::new(d, coords, new_cells, classes, coefficients)?;
    Ok(DgifyResult {
        mesh,
        interfaces,
        vertex_provenance: provenance,
        outer_boundary_vertices,
        boundary_vertices,
        source_topology: topo,
    })
}
