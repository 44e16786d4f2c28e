//! Geometry of the deformed configuration at quadrature points.
//!
//! All forms are pulled back to the fixed reference mesh through the map
//! `psi`. With P = d(psi)/d(xi) and G = d(id)/d(xi) the composite quantities
//! are F = P G^-1, Jbar = det P / det G, Eulerian gradients P^-T grad_xi, and
//! on facets Abar = |d psi/dt| / |d G/dt| with the Eulerian outer normal from
//! the rotated deformed tangent (equivalent to the Nanson transform in 2d).

use super::space::FeSpace;
use crate::error::{CoreError, CoreResult};
use crate::mesh::BoundaryTag;

/// Deformed geometry data on one cell, per quadrature point.
pub struct CellGeo {
    pub cell: usize,
    /// w_q det P: measure of integrals weighted with Jbar
    pub w_def: Vec<f64>,
    /// w_q det G: reference measure
    pub w_ref: Vec<f64>,
    pub jbar: Vec<f64>,
    pub fbar: Vec<[[f64; 2]; 2]>,
    /// physical (deformed) coordinates psi(xi_q)
    pub phys: Vec<[f64; 2]>,
    /// Eulerian gradients of all cell basis functions
    pub grad: Vec<Vec<[f64; 2]>>,
}

/// Deformed geometry data on one boundary facet, per facet quadrature point.
pub struct FacetGeo {
    pub facet: usize,
    pub cell: usize,
    pub local_edge: usize,
    pub tag: BoundaryTag,
    /// w_q |d psi/dt|: measure of integrals weighted with Abar
    pub w_def: Vec<f64>,
    /// w_q |d G/dt|: reference boundary measure
    pub w_ref: Vec<f64>,
    pub abar: Vec<f64>,
    /// deformed arc density |d psi/dt| (surface gradients divide by this)
    pub arc_def: Vec<f64>,
    /// Eulerian outer unit normal
    pub normal: Vec<[f64; 2]>,
    /// deformed unit tangent along the edge direction
    pub tangent: Vec<[f64; 2]>,
    pub phys: Vec<[f64; 2]>,
    /// Eulerian gradients of all cell basis functions at the facet points
    pub grad: Vec<Vec<[f64; 2]>>,
}

/// View of a deformation field driving all geometric factors.
pub struct DeformedGeometry<'a> {
    pub space: &'a FeSpace,
    pub psi: &'a [f64],
}

impl<'a> DeformedGeometry<'a> {
    pub fn new(space: &'a FeSpace, psi_coeffs: &'a [f64]) -> DeformedGeometry<'a> {
        assert_eq!(psi_coeffs.len(), space.n_vector_dofs());
        DeformedGeometry {
            space,
            psi: psi_coeffs,
        }
    }

    pub fn cell(&self, c: usize) -> CoreResult<CellGeo> {
        let table = &self.space.cell_table;
        let nq = table.rule.len();
        let dofs = &self.space.cell_dofs[c];
        let nb = dofs.len();
        let mut geo = CellGeo {
            cell: c,
            w_def: Vec::with_capacity(nq),
            w_ref: Vec::with_capacity(nq),
            jbar: Vec::with_capacity(nq),
            fbar: Vec::with_capacity(nq),
            phys: Vec::with_capacity(nq),
            grad: Vec::with_capacity(nq),
        };
        for q in 0..nq {
            let p = self.space.map_gradient(self.psi, c, &table.grads[q]);
            let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
            if det <= 0.0 {
                return Err(CoreError::MeshTangled { cell: c });
            }
            let det_g = self.space.ref_det[c][q];
            let w = table.rule.weights[q];
            geo.w_def.push(w * det);
            geo.w_ref.push(w * det_g);
            geo.jbar.push(det / det_g);

            // F = P G^-1 with G from the isoparametric reference map.
            let g = self.space.ref_g[c][q];
            geo.fbar.push(mat_mul(p, mat_inv(g, det_g)));

            let inv_t = mat_inv_transpose(p, det);
            let mut grads = Vec::with_capacity(nb);
            let mut x = [0.0; 2];
            for (i, &dof) in dofs.iter().enumerate() {
                let gr = table.grads[q][i];
                grads.push([
                    inv_t[0][0] * gr[0] + inv_t[0][1] * gr[1],
                    inv_t[1][0] * gr[0] + inv_t[1][1] * gr[1],
                ]);
                let v = table.vals[q][i];
                x[0] += v * self.psi[2 * dof];
                x[1] += v * self.psi[2 * dof + 1];
            }
            geo.grad.push(grads);
            geo.phys.push(x);
        }
        Ok(geo)
    }

    pub fn facet(&self, facet: usize) -> CoreResult<FacetGeo> {
        let bf = self.space.mesh.boundary_facets[facet];
        let table = &self.space.facet_table;
        let e = bf.local_edge;
        let dir = table.edge_dir[e];
        let nq = table.points_1d.len();
        let dofs = &self.space.cell_dofs[bf.cell];
        let mut geo = FacetGeo {
            facet,
            cell: bf.cell,
            local_edge: e,
            tag: bf.tag,
            w_def: Vec::with_capacity(nq),
            w_ref: Vec::with_capacity(nq),
            abar: Vec::with_capacity(nq),
            arc_def: Vec::with_capacity(nq),
            normal: Vec::with_capacity(nq),
            tangent: Vec::with_capacity(nq),
            phys: Vec::with_capacity(nq),
            grad: Vec::with_capacity(nq),
        };
        for q in 0..nq {
            let p = self.space.map_gradient(self.psi, bf.cell, &table.grads[e][q]);
            let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
            if det <= 0.0 {
                return Err(CoreError::MeshTangled { cell: bf.cell });
            }
            let tx = p[0][0] * dir[0] + p[0][1] * dir[1];
            let ty = p[1][0] * dir[0] + p[1][1] * dir[1];
            let arc = (tx * tx + ty * ty).sqrt();
            let arc_ref = self.space.ref_arc[facet][q];
            let w = table.weights_1d[q];
            geo.w_def.push(w * arc);
            geo.w_ref.push(w * arc_ref);
            geo.abar.push(arc / arc_ref);
            geo.arc_def.push(arc);
            geo.tangent.push([tx / arc, ty / arc]);
            // outward normal: rotate the CCW tangent clockwise
            geo.normal.push([ty / arc, -tx / arc]);

            let inv_t = mat_inv_transpose(p, det);
            let mut grads = Vec::with_capacity(dofs.len());
            let mut x = [0.0; 2];
            for (i, &dof) in dofs.iter().enumerate() {
                let gr = table.grads[e][q][i];
                grads.push([
                    inv_t[0][0] * gr[0] + inv_t[0][1] * gr[1],
                    inv_t[1][0] * gr[0] + inv_t[1][1] * gr[1],
                ]);
                let v = table.vals[e][q][i];
                x[0] += v * self.psi[2 * dof];
                x[1] += v * self.psi[2 * dof + 1];
            }
            geo.grad.push(grads);
            geo.phys.push(x);
        }
        Ok(geo)
    }
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn mat_inv(a: [[f64; 2]; 2], det: f64) -> [[f64; 2]; 2] {
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

/// (A^-1)^T for a 2x2 matrix with known determinant.
fn mat_inv_transpose(a: [[f64; 2]; 2], det: f64) -> [[f64; 2]; 2] {
    [
        [a[1][1] / det, -a[1][0] / det],
        [-a[0][1] / det, a[0][0] / det],
    ]
}

/// Gather the cell-local values of a scalar coefficient vector.
pub fn gather(coeffs: &[f64], dofs: &[usize]) -> Vec<f64> {
    dofs.iter().map(|&d| coeffs[d]).collect()
}

/// Gather cell-local (x, y) values of an interleaved vector coefficient vector.
pub fn gather_vec(coeffs: &[f64], dofs: &[usize]) -> Vec<[f64; 2]> {
    dofs.iter()
        .map(|&d| [coeffs[2 * d], coeffs[2 * d + 1]])
        .collect()
}

pub fn eval_scalar(local: &[f64], basis_vals: &[f64]) -> f64 {
    local.iter().zip(basis_vals).map(|(c, v)| c * v).sum()
}

pub fn eval_grad(local: &[f64], grads: &[[f64; 2]]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (c, gr) in local.iter().zip(grads) {
        g[0] += c * gr[0];
        g[1] += c * gr[1];
    }
    g
}

pub fn eval_vector(local: &[[f64; 2]], basis_vals: &[f64]) -> [f64; 2] {
    let mut v = [0.0; 2];
    for (c, val) in local.iter().zip(basis_vals) {
        v[0] += c[0] * val;
        v[1] += c[1] * val;
    }
    v
}
