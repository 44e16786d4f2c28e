//! Fixed reference meshes: unit disc for droplets, rectangle for ridges.
//!
//! Meshes are immutable after construction. Uniform refinement produces a new
//! mesh together with a child-to-parent map so that fields on coarser meshes of
//! the same family can be evaluated exactly at reference points of finer ones.

use crate::error::CoreError;
use crate::fem::shape::CellType;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    FreeBoundary,
    Sliding,
}

/// How boundary nodes are placed when the mesh is refined or equipped with
/// higher-order geometry nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryGeometry {
    /// Radial projection onto the unit circle.
    UnitCircle,
    /// Straight facets, nodes stay put.
    Straight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub cell: usize,
    pub local_edge: usize,
    pub tag: BoundaryTag,
}

/// Affine placement of a child cell inside its parent's reference cell.
#[derive(Debug, Clone, Copy)]
pub enum ChildMap {
    /// xi_parent = (xi_child + offset) / 2 (quad quadrants and corner triangles).
    Shift([f64; 2]),
    /// Central triangle of the 4-way split.
    TriCenter,
}

impl ChildMap {
    pub fn to_parent(&self, xi: [f64; 2]) -> [f64; 2] {
        match self {
            ChildMap::Shift(off) => [(xi[0] + off[0]) * 0.5, (xi[1] + off[1]) * 0.5],
            ChildMap::TriCenter => [0.5 - 0.5 * xi[1], 0.5 * xi[0] + 0.5 * xi[1]],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceMesh {
    pub cell_type: CellType,
    pub nodes: Vec<[f64; 2]>,
    verts: Vec<usize>,
    pub boundary_facets: Vec<BoundaryFacet>,
    pub refinement_level: usize,
    pub geometry: BoundaryGeometry,
    /// child cell -> (parent cell, placement); empty for an unrefined mesh.
    pub child_of: Vec<(usize, ChildMap)>,
}

impl ReferenceMesh {
    pub fn n_cells(&self) -> usize {
        self.verts.len() / self.cell_type.n_vertices()
    }

    pub fn cell_verts(&self, c: usize) -> &[usize] {
        let nv = self.cell_type.n_vertices();
        &self.verts[c * nv..(c + 1) * nv]
    }

    /// Global (sorted) vertex pair of a cell edge.
    pub fn edge_key(&self, cell: usize, edge: usize) -> (usize, usize) {
        let (a, b) = self.cell_type.edge_vertices(edge);
        let vs = self.cell_verts(cell);
        let (ga, gb) = (vs[a], vs[b]);
        if ga < gb {
            (ga, gb)
        } else {
            (gb, ga)
        }
    }

    /// Vertices lying on any boundary facet.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        for bf in &self.boundary_facets {
            let (a, b) = self.cell_type.edge_vertices(bf.local_edge);
            let vs = self.cell_verts(bf.cell);
            seen[vs[a]] = true;
            seen[vs[b]] = true;
        }
        (0..self.nodes.len()).filter(|&i| seen[i]).collect()
    }

    fn project_node(&self, p: [f64; 2]) -> [f64; 2] {
        match self.geometry {
            BoundaryGeometry::UnitCircle => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                [p[0] / r, p[1] / r]
            }
            BoundaryGeometry::Straight => p,
        }
    }

    /// Place a point on a boundary facet according to the mesh geometry model.
    pub fn project_boundary_point(&self, p: [f64; 2]) -> [f64; 2] {
        self.project_node(p)
    }
}

/// Unit disc as the 5-block structured layout: central square plus four
/// boundary blocks whose outer edges lie on the unit circle.
pub fn build_disc_mesh(
    refinement: usize,
    degree: usize,
    cell_type: CellType,
) -> Result<ReferenceMesh, CoreError> {
    check_degree(degree)?;
    let s = 0.5 / std::f64::consts::SQRT_2;
    let t = 1.0 / std::f64::consts::SQRT_2;
    let nodes = vec![
        [-s, -s],
        [s, -s],
        [s, s],
        [-s, s],
        [-t, -t],
        [t, -t],
        [t, t],
        [-t, t],
    ];
    let quads: Vec<[usize; 4]> = vec![
        [0, 1, 2, 3],
        [4, 5, 1, 0],
        [5, 6, 2, 1],
        [6, 7, 3, 2],
        [7, 4, 0, 3],
    ];
    // Outer edge of each boundary block is its local edge 0.
    let quad_boundary: Vec<(usize, usize)> = vec![(1, 0), (2, 0), (3, 0), (4, 0)];

    let mut mesh = match cell_type {
        CellType::Quad => ReferenceMesh {
            cell_type,
            nodes,
            verts: quads.iter().flatten().copied().collect(),
            boundary_facets: quad_boundary
                .iter()
                .map(|&(cell, local_edge)| BoundaryFacet {
                    cell,
                    local_edge,
                    tag: BoundaryTag::FreeBoundary,
                })
                .collect(),
            refinement_level: 0,
            geometry: BoundaryGeometry::UnitCircle,
            child_of: Vec::new(),
        },
        CellType::Tri => split_quads_to_tris(&nodes, &quads, &quad_boundary),
    };
    for _ in 0..refinement {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

fn split_quads_to_tris(
    nodes: &[[f64; 2]],
    quads: &[[usize; 4]],
    quad_boundary: &[(usize, usize)],
) -> ReferenceMesh {
    // Quad (v0,v1,v2,v3) -> (v0,v1,v2) and (v0,v2,v3); boundary edges move
    // with the triangle that owns them.
    let mut verts = Vec::with_capacity(quads.len() * 6);
    for q in quads {
        verts.extend_from_slice(&[q[0], q[1], q[2]]);
        verts.extend_from_slice(&[q[0], q[2], q[3]]);
    }
    let boundary_facets = quad_boundary
        .iter()
        .map(|&(qc, qe)| {
            let (cell, local_edge) = match qe {
                0 => (2 * qc, 0),
                1 => (2 * qc, 1),
                2 => (2 * qc + 1, 1),
                3 => (2 * qc + 1, 2),
                _ => unreachable!(),
            };
            BoundaryFacet {
                cell,
                local_edge,
                tag: BoundaryTag::FreeBoundary,
            }
        })
        .collect();
    ReferenceMesh {
        cell_type: CellType::Tri,
        nodes: nodes.to_vec(),
        verts,
        boundary_facets,
        refinement_level: 0,
        geometry: BoundaryGeometry::UnitCircle,
        child_of: Vec::new(),
    }
}

/// Rectangle [0,L] x [0,H]; facets at x in {0,L} are the free boundary, facets
/// at y in {0,H} the sliding boundary. The base grid keeps cells near square.
pub fn build_ridge_mesh(
    length: f64,
    height: f64,
    refinement: usize,
    degree: usize,
    cell_type: CellType,
) -> Result<ReferenceMesh, CoreError> {
    check_degree(degree)?;
    if length <= 0.0 || height <= 0.0 {
        return Err(CoreError::Config("ridge dimensions must be positive".into()));
    }
    let h0 = length.min(height);
    let nx = (length / h0).round().max(1.0) as usize;
    let ny = (height / h0).round().max(1.0) as usize;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([length * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut quads = Vec::new();
    let mut quad_boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = quads.len();
            quads.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            if j == 0 {
                quad_boundary.push((c, 0, BoundaryTag::Sliding));
            }
            if i == nx - 1 {
                quad_boundary.push((c, 1, BoundaryTag::FreeBoundary));
            }
            if j == ny - 1 {
                quad_boundary.push((c, 2, BoundaryTag::Sliding));
            }
            if i == 0 {
                quad_boundary.push((c, 3, BoundaryTag::FreeBoundary));
            }
        }
    }
    let mut mesh = match cell_type {
        CellType::Quad => ReferenceMesh {
            cell_type,
            nodes,
            verts: quads.iter().flatten().copied().collect(),
            boundary_facets: quad_boundary
                .iter()
                .map(|&(cell, local_edge, tag)| BoundaryFacet {
                    cell,
                    local_edge,
                    tag,
                })
                .collect(),
            refinement_level: 0,
            geometry: BoundaryGeometry::Straight,
            child_of: Vec::new(),
        },
        CellType::Tri => {
            let untagged: Vec<(usize, usize)> =
                quad_boundary.iter().map(|&(c, e, _)| (c, e)).collect();
            let mut m = split_quads_to_tris(&nodes, &quads, &untagged);
            for (bf, &(_, _, tag)) in m.boundary_facets.iter_mut().zip(&quad_boundary) {
                bf.tag = tag;
            }
            m.geometry = BoundaryGeometry::Straight;
            m
        }
    };
    for _ in 0..refinement {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

/// The deformation applied to the ridge reference domain at t = 0.
pub fn ridge_initial_map(delta: f64, height: f64) -> impl Fn([f64; 2]) -> [f64; 2] {
    move |p| {
        let factor = 1.0 + delta * (2.0 * std::f64::consts::PI * p[1] / height).cos();
        [p[0] * factor, p[1]]
    }
}

/// Splits every cell into 4 children; boundary facets bisect and inherit their
/// tag, and boundary vertices are re-projected for curved geometries.
pub fn refine_uniform(mesh: &ReferenceMesh) -> ReferenceMesh {
    let mut nodes = mesh.nodes.clone();
    let mut edge_mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| {
        let key = if a < b { (a, b) } else { (b, a) };
        *edge_mid.entry(key).or_insert_with(|| {
            let p = [
                0.5 * (nodes[a][0] + nodes[b][0]),
                0.5 * (nodes[a][1] + nodes[b][1]),
            ];
            nodes.push(p);
            nodes.len() - 1
        })
    };

    let mut verts = Vec::with_capacity(mesh.verts.len() * 4);
    let mut child_of = Vec::with_capacity(mesh.n_cells() * 4);
    // child_slots[parent][local_edge] -> (first child, second child) along the edge
    let mut edge_children: Vec<[(usize, usize); 4]> = Vec::with_capacity(mesh.n_cells());

    match mesh.cell_type {
        CellType::Quad => {
            for c in 0..mesh.n_cells() {
                let v: [usize; 4] = mesh.cell_verts(c).try_into().unwrap();
                let m01 = midpoint(v[0], v[1], &mut nodes);
                let m12 = midpoint(v[1], v[2], &mut nodes);
                let m23 = midpoint(v[2], v[3], &mut nodes);
                let m30 = midpoint(v[3], v[0], &mut nodes);
                let ctr = {
                    let p = [
                        0.25 * (nodes[v[0]][0] + nodes[v[1]][0] + nodes[v[2]][0] + nodes[v[3]][0]),
                        0.25 * (nodes[v[0]][1] + nodes[v[1]][1] + nodes[v[2]][1] + nodes[v[3]][1]),
                    ];
                    nodes.push(p);
                    nodes.len() - 1
                };
                let q0 = child_of.len();
                verts.extend_from_slice(&[v[0], m01, ctr, m30]);
                child_of.push((c, ChildMap::Shift([0.0, 0.0])));
                verts.extend_from_slice(&[m01, v[1], m12, ctr]);
                child_of.push((c, ChildMap::Shift([1.0, 0.0])));
                verts.extend_from_slice(&[ctr, m12, v[2], m23]);
                child_of.push((c, ChildMap::Shift([1.0, 1.0])));
                verts.extend_from_slice(&[m30, ctr, m23, v[3]]);
                child_of.push((c, ChildMap::Shift([0.0, 1.0])));
                edge_children.push([
                    (q0, q0 + 1),
                    (q0 + 1, q0 + 2),
                    (q0 + 2, q0 + 3),
                    (q0 + 3, q0),
                ]);
            }
        }
        CellType::Tri => {
            for c in 0..mesh.n_cells() {
                let v: [usize; 3] = mesh.cell_verts(c).try_into().unwrap();
                let m01 = midpoint(v[0], v[1], &mut nodes);
                let m12 = midpoint(v[1], v[2], &mut nodes);
                let m20 = midpoint(v[2], v[0], &mut nodes);
                let t0 = child_of.len();
                verts.extend_from_slice(&[v[0], m01, m20]);
                child_of.push((c, ChildMap::Shift([0.0, 0.0])));
                verts.extend_from_slice(&[m01, v[1], m12]);
                child_of.push((c, ChildMap::Shift([1.0, 0.0])));
                verts.extend_from_slice(&[m20, m12, v[2]]);
                child_of.push((c, ChildMap::Shift([0.0, 1.0])));
                verts.extend_from_slice(&[m01, m12, m20]);
                child_of.push((c, ChildMap::TriCenter));
                edge_children.push([(t0, t0 + 1), (t0 + 1, t0 + 2), (t0 + 2, t0), (0, 0)]);
            }
        }
    }

    let mut boundary_facets = Vec::with_capacity(mesh.boundary_facets.len() * 2);
    for bf in &mesh.boundary_facets {
        let (c1, c2) = edge_children[bf.cell][bf.local_edge];
        boundary_facets.push(BoundaryFacet {
            cell: c1,
            local_edge: bf.local_edge,
            tag: bf.tag,
        });
        boundary_facets.push(BoundaryFacet {
            cell: c2,
            local_edge: bf.local_edge,
            tag: bf.tag,
        });
    }

    let mut refined = ReferenceMesh {
        cell_type: mesh.cell_type,
        nodes,
        verts,
        boundary_facets,
        refinement_level: mesh.refinement_level + 1,
        geometry: mesh.geometry,
        child_of,
    };
    for v in refined.boundary_vertices() {
        refined.nodes[v] = refined.project_node(refined.nodes[v]);
    }
    refined
}

fn check_degree(degree: usize) -> Result<(), CoreError> {
    if (1..=3).contains(&degree) {
        Ok(())
    } else {
        Err(CoreError::Config(format!(
            "element degree must be 1, 2 or 3, got {degree}"
        )))
    }
}
