//! Continuous Lagrange finite element spaces of degree 1..=3 on a reference
//! mesh, with shared facet degrees of freedom and isoparametric geometry nodes.

use super::quadrature::{cell_rule, facet_rule, QuadratureRule};
use super::shape::{edge_local_nodes, eval_basis, eval_basis_grad, local_nodes};
#[cfg(test)]
use super::shape::CellType;
use crate::error::CoreError;
use crate::mesh::{BoundaryTag, ReferenceMesh};
use std::collections::HashMap;
use std::sync::Arc;

/// Basis values and reference gradients tabulated at the cell quadrature points.
#[derive(Debug, Clone)]
pub struct CellBasisTable {
    pub rule: QuadratureRule,
    pub vals: Vec<Vec<f64>>,
    pub grads: Vec<Vec<[f64; 2]>>,
}

/// Per local edge: cell basis tabulated at the mapped facet quadrature points.
#[derive(Debug, Clone)]
pub struct FacetBasisTable {
    pub points_1d: Vec<f64>,
    pub weights_1d: Vec<f64>,
    /// [edge][q] -> values / reference gradients of all cell basis functions
    pub vals: Vec<Vec<Vec<f64>>>,
    pub grads: Vec<Vec<Vec<[f64; 2]>>>,
    /// d(xi)/dt of each edge parametrisation
    pub edge_dir: Vec<[f64; 2]>,
}

#[derive(Debug)]
pub struct FeSpace {
    pub mesh: Arc<ReferenceMesh>,
    pub degree: usize,
    /// Scalar dof count (nodes); vector fields use 2 dofs per node, interleaved.
    pub n_nodes: usize,
    /// cell -> global scalar dofs in local node order
    pub cell_dofs: Vec<Vec<usize>>,
    /// reference coordinates of every scalar dof (isoparametric geometry nodes)
    pub node_coords: Vec<[f64; 2]>,
    pub cell_table: CellBasisTable,
    pub facet_table: FacetBasisTable,
    /// per cell: gradient of the reference geometry map at quadrature points
    pub ref_g: Vec<Vec<[[f64; 2]; 2]>>,
    /// per cell: reference Jacobian determinant at cell quadrature points
    pub ref_det: Vec<Vec<f64>>,
    /// per boundary facet: reference arc length density |dG/dt| at facet points
    pub ref_arc: Vec<Vec<f64>>,
    boundary_dof_cache: HashMap<BoundaryTag, Vec<usize>>,
}

impl FeSpace {
    pub fn new(mesh: Arc<ReferenceMesh>, degree: usize) -> Result<Arc<FeSpace>, CoreError> {
        if !(1..=3).contains(&degree) {
            return Err(CoreError::Config(format!(
                "element degree must be 1, 2 or 3, got {degree}"
            )));
        }
        let ct = mesh.cell_type;
        let k = degree;
        let n_vert = mesh.nodes.len();
        let locals = local_nodes(ct, k);

        // Global edge numbering by first encounter.
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        for c in 0..mesh.n_cells() {
            for e in 0..ct.n_edges() {
                let key = mesh.edge_key(c, e);
                let next = edge_ids.len();
                edge_ids.entry(key).or_insert(next);
            }
        }
        let n_edges = edge_ids.len();
        let per_edge = k - 1;
        let n_int = ct.n_interior_nodes(k);
        let n_nodes = n_vert + n_edges * per_edge + mesh.n_cells() * n_int;

        let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
        let mut node_coords = vec![[f64::NAN; 2]; n_nodes];
        for (v, p) in mesh.nodes.iter().enumerate() {
            node_coords[v] = *p;
        }

        for c in 0..mesh.n_cells() {
            let vs = mesh.cell_verts(c);
            let mut dofs = vec![0usize; locals.len()];
            for (lv, &gv) in vs.iter().enumerate() {
                dofs[lv] = gv;
            }
            let mut cursor = ct.n_vertices();
            for e in 0..ct.n_edges() {
                let (la, lb) = ct.edge_vertices(e);
                let (ga, gb) = (vs[la], vs[lb]);
                let key = if ga < gb { (ga, gb) } else { (gb, ga) };
                let eid = edge_ids[&key];
                for j in 1..k {
                    let pos = if ga < gb { j } else { k - j };
                    let dof = n_vert + eid * per_edge + (pos - 1);
                    dofs[cursor] = dof;
                    // straight-edge placement, shared nodes written twice with
                    // identical coordinates
                    let t = j as f64 / k as f64;
                    let pa = mesh.nodes[ga];
                    let pb = mesh.nodes[gb];
                    node_coords[dof] = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                    cursor += 1;
                }
            }
            let int_base = n_vert + n_edges * per_edge + c * n_int;
            for j in 0..n_int {
                let dof = int_base + j;
                dofs[cursor] = dof;
                let xi = locals[cursor];
                // straight (bi)linear placement of interior nodes
                let vals = eval_basis(ct, 1, xi);
                let mut p = [0.0; 2];
                for (lv, val) in vals.iter().enumerate() {
                    p[0] += val * mesh.nodes[vs[lv]][0];
                    p[1] += val * mesh.nodes[vs[lv]][1];
                }
                node_coords[dof] = p;
                cursor += 1;
            }
            cell_dofs.push(dofs);
        }

        // Place higher-order nodes of boundary facets on the curved geometry.
        // Equal-arc placement keeps the isoparametric circle representation at
        // its optimal order (chordal projection would cap degree 3 at O(h^4)).
        if mesh.geometry == crate::mesh::BoundaryGeometry::UnitCircle && k > 1 {
            for bf in &mesh.boundary_facets {
                let edge_nodes = edge_local_nodes(ct, k, bf.local_edge);
                let a = node_coords[cell_dofs[bf.cell][edge_nodes[0]]];
                let b = node_coords[cell_dofs[bf.cell][edge_nodes[k]]];
                let ta = a[1].atan2(a[0]);
                let mut tb = b[1].atan2(b[0]);
                if tb - ta > std::f64::consts::PI {
                    tb -= 2.0 * std::f64::consts::PI;
                } else if ta - tb > std::f64::consts::PI {
                    tb += 2.0 * std::f64::consts::PI;
                }
                for (j, &ln) in edge_nodes.iter().enumerate().take(k).skip(1) {
                    let th = ta + (tb - ta) * j as f64 / k as f64;
                    node_coords[cell_dofs[bf.cell][ln]] = [th.cos(), th.sin()];
                }
            }
        }

        let rule = cell_rule(ct, 2 * k + 1);
        let vals = rule.points.iter().map(|&p| eval_basis(ct, k, p)).collect();
        let grads = rule
            .points
            .iter()
            .map(|&p| eval_basis_grad(ct, k, p))
            .collect();
        let cell_table = CellBasisTable { rule, vals, grads };

        let (pts1, wts1) = facet_rule(k + 1);
        let mut fvals = Vec::with_capacity(ct.n_edges());
        let mut fgrads = Vec::with_capacity(ct.n_edges());
        let mut edge_dir = Vec::with_capacity(ct.n_edges());
        for e in 0..ct.n_edges() {
            let mut ev = Vec::with_capacity(pts1.len());
            let mut eg = Vec::with_capacity(pts1.len());
            for &t in &pts1 {
                let xi = ct.edge_point(e, t);
                ev.push(eval_basis(ct, k, xi));
                eg.push(eval_basis_grad(ct, k, xi));
            }
            fvals.push(ev);
            fgrads.push(eg);
            edge_dir.push(ct.edge_direction(e));
        }
        let facet_table = FacetBasisTable {
            points_1d: pts1,
            weights_1d: wts1,
            vals: fvals,
            grads: fgrads,
            edge_dir,
        };

        let mut space = FeSpace {
            mesh,
            degree,
            n_nodes,
            cell_dofs,
            node_coords,
            cell_table,
            facet_table,
            ref_g: Vec::new(),
            ref_det: Vec::new(),
            ref_arc: Vec::new(),
            boundary_dof_cache: HashMap::new(),
        };
        space.precompute_reference_geometry()?;
        space.boundary_dof_cache = [BoundaryTag::FreeBoundary, BoundaryTag::Sliding]
            .iter()
            .map(|&tag| (tag, space.collect_boundary_dofs(tag)))
            .collect();
        Ok(Arc::new(space))
    }

    fn precompute_reference_geometry(&mut self) -> Result<(), CoreError> {
        let identity = self.identity_coeffs();
        let mut ref_g = Vec::with_capacity(self.mesh.n_cells());
        let mut ref_det = Vec::with_capacity(self.mesh.n_cells());
        for c in 0..self.mesh.n_cells() {
            let mut gs = Vec::with_capacity(self.cell_table.rule.len());
            let mut dets = Vec::with_capacity(self.cell_table.rule.len());
            for q in 0..self.cell_table.rule.len() {
                let p = self.map_gradient(&identity, c, &self.cell_table.grads[q]);
                let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
                if det <= 0.0 {
                    return Err(CoreError::MeshTangled { cell: c });
                }
                gs.push(p);
                dets.push(det);
            }
            ref_g.push(gs);
            ref_det.push(dets);
        }
        self.ref_g = ref_g;
        self.ref_det = ref_det;

        let mut ref_arc = Vec::with_capacity(self.mesh.boundary_facets.len());
        for bf in &self.mesh.boundary_facets {
            let e = bf.local_edge;
            let dir = self.facet_table.edge_dir[e];
            let mut arcs = Vec::with_capacity(self.facet_table.points_1d.len());
            for q in 0..self.facet_table.points_1d.len() {
                let p = self.map_gradient(&identity, bf.cell, &self.facet_table.grads[e][q]);
                let tx = p[0][0] * dir[0] + p[0][1] * dir[1];
                let ty = p[1][0] * dir[0] + p[1][1] * dir[1];
                arcs.push((tx * tx + ty * ty).sqrt());
            }
            ref_arc.push(arcs);
        }
        self.ref_arc = ref_arc;
        Ok(())
    }

    /// Jacobian d(map)/d(xi) of a vector coefficient field on one cell at one
    /// point, given the reference gradients of the basis there.
    pub fn map_gradient(
        &self,
        vec_coeffs: &[f64],
        cell: usize,
        grads: &[[f64; 2]],
    ) -> [[f64; 2]; 2] {
        let mut p = [[0.0; 2]; 2];
        for (i, &dof) in self.cell_dofs[cell].iter().enumerate() {
            let x = vec_coeffs[2 * dof];
            let y = vec_coeffs[2 * dof + 1];
            let g = grads[i];
            p[0][0] += x * g[0];
            p[0][1] += x * g[1];
            p[1][0] += y * g[0];
            p[1][1] += y * g[1];
        }
        p
    }

    /// Coefficients of the identity map (the reference geometry itself).
    pub fn identity_coeffs(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 * self.n_nodes);
        for p in &self.node_coords {
            c.push(p[0]);
            c.push(p[1]);
        }
        c
    }

    pub fn n_scalar_dofs(&self) -> usize {
        self.n_nodes
    }

    pub fn n_vector_dofs(&self) -> usize {
        2 * self.n_nodes
    }

    /// Scalar dofs on the facet (cell-local edge) in edge order.
    pub fn facet_dofs(&self, cell: usize, local_edge: usize) -> Vec<usize> {
        edge_local_nodes(self.mesh.cell_type, self.degree, local_edge)
            .iter()
            .map(|&ln| self.cell_dofs[cell][ln])
            .collect()
    }

    fn collect_boundary_dofs(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut seen = vec![false; self.n_nodes];
        for bf in &self.mesh.boundary_facets {
            if bf.tag != tag {
                continue;
            }
            for dof in self.facet_dofs(bf.cell, bf.local_edge) {
                seen[dof] = true;
            }
        }
        (0..self.n_nodes).filter(|&d| seen[d]).collect()
    }

    /// Sorted scalar dofs on facets carrying the given tag.
    pub fn boundary_dofs(&self, tag: BoundaryTag) -> &[usize] {
        &self.boundary_dof_cache[&tag]
    }

    /// Indices of boundary facets carrying the given tag.
    pub fn facets_with_tag(&self, tag: BoundaryTag) -> Vec<usize> {
        self.mesh
            .boundary_facets
            .iter()
            .enumerate()
            .filter(|(_, bf)| bf.tag == tag)
            .map(|(i, _)| i)
            .collect()
    }

    /// Interpolate a function into the space (nodal interpolation).
    pub fn interpolate_scalar(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.node_coords.iter().map(|&p| f(p)).collect()
    }

    pub fn interpolate_vector(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 * self.n_nodes);
        for &p in &self.node_coords {
            let v = f(p);
            c.push(v[0]);
            c.push(v[1]);
        }
        c
    }
}

/// Index map for a boundary trace space (for example the contact force).
#[derive(Debug, Clone)]
pub struct TraceSpace {
    pub tag: BoundaryTag,
    /// global scalar dofs in the trace, sorted
    pub dofs: Vec<usize>,
    index: HashMap<usize, usize>,
}

impl TraceSpace {
    pub fn new(space: &FeSpace, tag: BoundaryTag) -> TraceSpace {
        let dofs = space.boundary_dofs(tag).to_vec();
        let index = dofs.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        TraceSpace { tag, dofs, index }
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn index_of(&self, global_dof: usize) -> usize {
        self.index[&global_dof]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disc_mesh;

    #[test]
    fn conforming_dof_counts() {
        // Q2 on the 5-cell disc: 8 vertices + 12 edges + 5 cells = 25 dofs.
        let mesh = Arc::new(build_disc_mesh(0, 2, CellType::Quad).unwrap());
        let space = FeSpace::new(mesh, 2).unwrap();
        assert_eq!(space.n_scalar_dofs(), 25);
        // P2 on the split disc: 8 vertices + 17 edges = 25 dofs.
        let mesh = Arc::new(build_disc_mesh(0, 2, CellType::Tri).unwrap());
        let space = FeSpace::new(mesh, 2).unwrap();
        assert_eq!(space.n_scalar_dofs(), 25);
    }

    #[test]
    fn shared_edge_dofs_have_consistent_coordinates() {
        for ct in [CellType::Quad, CellType::Tri] {
            for k in 1..=3 {
                let mesh = Arc::new(build_disc_mesh(1, k, ct).unwrap());
                let space = FeSpace::new(mesh, k).unwrap();
                // Every dof coordinate must have been written consistently:
                // re-derive per cell and compare against the stored value.
                for c in 0..space.mesh.n_cells() {
                    let locals = local_nodes(ct, k);
                    for (ln, &dof) in space.cell_dofs[c].iter().enumerate() {
                        let _ = locals[ln];
                        assert!(space.node_coords[dof][0].is_finite());
                    }
                }
                // C0 conformity: a dof index appearing in two cells refers to
                // one coordinate; nothing to compare beyond existence since the
                // map is total. Check boundary dofs are on the circle instead.
                for &d in space.boundary_dofs(BoundaryTag::FreeBoundary) {
                    let p = space.node_coords[d];
                    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    assert!((r - 1.0).abs() < 1e-12, "k={k} dof {d} radius {r}");
                }
            }
        }
    }

    #[test]
    fn facet_dofs_subset_of_cell_dofs() {
        let mesh = Arc::new(build_disc_mesh(1, 3, CellType::Quad).unwrap());
        let space = FeSpace::new(mesh, 3).unwrap();
        for (i, bf) in space.mesh.boundary_facets.iter().enumerate() {
            let fd = space.facet_dofs(bf.cell, bf.local_edge);
            assert_eq!(fd.len(), 4);
            assert_eq!(space.ref_arc[i].len(), space.facet_table.points_1d.len());
        }
    }
}
