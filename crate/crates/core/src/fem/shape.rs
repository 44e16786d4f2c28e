//! Lagrange shape functions on reference cells.
//!
//! Quadrilaterals use tensor-product equispaced Lagrange bases on [0,1]^2,
//! triangles use the Silvester form on barycentric coordinates. Both are exact
//! for degrees 1..=3 used here. Local node order is: cell vertices, then edge
//! nodes (edge by edge, along the edge direction), then interior nodes.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellType {
    Quad,
    Tri,
}

impl CellType {
    pub fn n_vertices(self) -> usize {
        match self {
            CellType::Quad => 4,
            CellType::Tri => 3,
        }
    }

    pub fn n_edges(self) -> usize {
        self.n_vertices()
    }

    /// Local vertex pairs of each edge, counterclockwise.
    pub fn edge_vertices(self, edge: usize) -> (usize, usize) {
        match self {
            CellType::Quad => [(0, 1), (1, 2), (2, 3), (3, 0)][edge],
            CellType::Tri => [(0, 1), (1, 2), (2, 0)][edge],
        }
    }

    pub fn vertex_coords(self, v: usize) -> [f64; 2] {
        match self {
            CellType::Quad => [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]][v],
            CellType::Tri => [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]][v],
        }
    }

    pub fn n_nodes(self, degree: usize) -> usize {
        match self {
            CellType::Quad => (degree + 1) * (degree + 1),
            CellType::Tri => (degree + 1) * (degree + 2) / 2,
        }
    }

    pub fn n_interior_nodes(self, degree: usize) -> usize {
        match self {
            CellType::Quad => (degree.max(1) - 1) * (degree.max(1) - 1),
            CellType::Tri => {
                if degree >= 3 {
                    (degree - 1) * (degree - 2) / 2
                } else {
                    0
                }
            }
        }
    }

    /// Reference coordinate of edge point at parameter t in [0,1] along the edge.
    pub fn edge_point(self, edge: usize, t: f64) -> [f64; 2] {
        let (a, b) = self.edge_vertices(edge);
        let pa = self.vertex_coords(a);
        let pb = self.vertex_coords(b);
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    }

    /// Direction d(xi)/dt of the edge parametrisation.
    pub fn edge_direction(self, edge: usize) -> [f64; 2] {
        let (a, b) = self.edge_vertices(edge);
        let pa = self.vertex_coords(a);
        let pb = self.vertex_coords(b);
        [pb[0] - pa[0], pb[1] - pa[1]]
    }
}

/// Silvester polynomial R_i(t) = prod_{m<i} (k t - m)/(i - m), with R_0 = 1.
fn silvester(k: usize, i: usize, t: f64) -> f64 {
    let mut val = 1.0;
    for m in 0..i {
        val *= (k as f64 * t - m as f64) / (i as f64 - m as f64);
    }
    val
}

fn silvester_deriv(k: usize, i: usize, t: f64) -> f64 {
    let mut sum = 0.0;
    for p in 0..i {
        let mut prod = k as f64 / (i as f64 - p as f64);
        for m in 0..i {
            if m != p {
                prod *= (k as f64 * t - m as f64) / (i as f64 - m as f64);
            }
        }
        sum += prod;
    }
    sum
}

/// 1D Lagrange basis of degree k on equispaced nodes j/k, j = 0..=k.
pub fn lagrange_1d(k: usize, j: usize, t: f64) -> f64 {
    silvester(k, j, t) * silvester(k, k - j, 1.0 - t)
}

pub fn lagrange_1d_deriv(k: usize, j: usize, t: f64) -> f64 {
    silvester_deriv(k, j, t) * silvester(k, k - j, 1.0 - t)
        - silvester(k, j, t) * silvester_deriv(k, k - j, 1.0 - t)
}

/// Local node layout of a Lagrange element: reference coordinates in the
/// canonical order (vertices, edge nodes, interior nodes).
pub fn local_nodes(cell: CellType, degree: usize) -> Vec<[f64; 2]> {
    let k = degree;
    let mut nodes = Vec::with_capacity(cell.n_nodes(k));
    for v in 0..cell.n_vertices() {
        nodes.push(cell.vertex_coords(v));
    }
    for e in 0..cell.n_edges() {
        for j in 1..k {
            nodes.push(cell.edge_point(e, j as f64 / k as f64));
        }
    }
    match cell {
        CellType::Quad => {
            for jy in 1..k {
                for jx in 1..k {
                    nodes.push([jx as f64 / k as f64, jy as f64 / k as f64]);
                }
            }
        }
        CellType::Tri => {
            // Interior barycentric indices (a1, a2) with a1, a2 >= 1, a1 + a2 <= k - 1.
            for a2 in 1..k {
                for a1 in 1..k {
                    if a1 + a2 <= k - 1 {
                        nodes.push([a1 as f64 / k as f64, a2 as f64 / k as f64]);
                    }
                }
            }
        }
    }
    debug_assert_eq!(nodes.len(), cell.n_nodes(k));
    nodes
}

/// Values of all local basis functions at a reference point.
pub fn eval_basis(cell: CellType, degree: usize, xi: [f64; 2]) -> Vec<f64> {
    let nodes = local_nodes(cell, degree);
    nodes
        .iter()
        .map(|n| eval_node_basis(cell, degree, n, xi))
        .collect()
}

/// Gradients (d/dxi, d/deta) of all local basis functions at a reference point.
pub fn eval_basis_grad(cell: CellType, degree: usize, xi: [f64; 2]) -> Vec<[f64; 2]> {
    let nodes = local_nodes(cell, degree);
    nodes
        .iter()
        .map(|n| eval_node_basis_grad(cell, degree, n, xi))
        .collect()
}

fn node_index_1d(k: usize, coord: f64) -> usize {
    (coord * k as f64).round() as usize
}

fn eval_node_basis(cell: CellType, k: usize, node: &[f64; 2], xi: [f64; 2]) -> f64 {
    match cell {
        CellType::Quad => {
            let jx = node_index_1d(k, node[0]);
            let jy = node_index_1d(k, node[1]);
            lagrange_1d(k, jx, xi[0]) * lagrange_1d(k, jy, xi[1])
        }
        CellType::Tri => {
            let a1 = node_index_1d(k, node[0]);
            let a2 = node_index_1d(k, node[1]);
            let a0 = k - a1 - a2;
            let l0 = 1.0 - xi[0] - xi[1];
            silvester(k, a0, l0) * silvester(k, a1, xi[0]) * silvester(k, a2, xi[1])
        }
    }
}

fn eval_node_basis_grad(cell: CellType, k: usize, node: &[f64; 2], xi: [f64; 2]) -> [f64; 2] {
    match cell {
        CellType::Quad => {
            let jx = node_index_1d(k, node[0]);
            let jy = node_index_1d(k, node[1]);
            [
                lagrange_1d_deriv(k, jx, xi[0]) * lagrange_1d(k, jy, xi[1]),
                lagrange_1d(k, jx, xi[0]) * lagrange_1d_deriv(k, jy, xi[1]),
            ]
        }
        CellType::Tri => {
            let a1 = node_index_1d(k, node[0]);
            let a2 = node_index_1d(k, node[1]);
            let a0 = k - a1 - a2;
            let l0 = 1.0 - xi[0] - xi[1];
            let r0 = silvester(k, a0, l0);
            let r1 = silvester(k, a1, xi[0]);
            let r2 = silvester(k, a2, xi[1]);
            let d0 = silvester_deriv(k, a0, l0);
            let d1 = silvester_deriv(k, a1, xi[0]);
            let d2 = silvester_deriv(k, a2, xi[1]);
            [-d0 * r1 * r2 + r0 * d1 * r2, -d0 * r1 * r2 + r0 * r1 * d2]
        }
    }
}

/// Local node indices lying on a given edge, ordered along the edge direction
/// (vertex a, interior edge nodes, vertex b).
pub fn edge_local_nodes(cell: CellType, degree: usize, edge: usize) -> Vec<usize> {
    let (a, b) = cell.edge_vertices(edge);
    let mut idx = Vec::with_capacity(degree + 1);
    idx.push(a);
    let base = cell.n_vertices() + edge * (degree - 1).max(0);
    for j in 0..degree.saturating_sub(1) {
        idx.push(base + j);
    }
    idx.push(b);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_kronecker(cell: CellType, k: usize) {
        let nodes = local_nodes(cell, k);
        for (i, n) in nodes.iter().enumerate() {
            let vals = eval_basis(cell, k, *n);
            for (j, v) in vals.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (v - expect).abs() < 1e-12,
                    "{cell:?} k={k} node {i} basis {j}: {v}"
                );
            }
        }
    }

    #[test]
    fn kronecker_property() {
        for k in 1..=3 {
            check_kronecker(CellType::Quad, k);
            check_kronecker(CellType::Tri, k);
        }
    }

    #[test]
    fn partition_of_unity_and_gradient_sum() {
        let pts = [[0.13, 0.41], [0.5, 0.25], [0.31, 0.07]];
        for k in 1..=3 {
            for cell in [CellType::Quad, CellType::Tri] {
                for p in pts {
                    let vals = eval_basis(cell, k, p);
                    let grads = eval_basis_grad(cell, k, p);
                    let s: f64 = vals.iter().sum();
                    let gx: f64 = grads.iter().map(|g| g[0]).sum();
                    let gy: f64 = grads.iter().map(|g| g[1]).sum();
                    assert!((s - 1.0).abs() < 1e-12);
                    assert!(gx.abs() < 1e-11 && gy.abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn linear_reproduction() {
        // Interpolating f(x,y) = 2x - 3y + 1 must be exact for all degrees.
        for k in 1..=3 {
            for cell in [CellType::Quad, CellType::Tri] {
                let nodes = local_nodes(cell, k);
                let coeffs: Vec<f64> = nodes.iter().map(|n| 2.0 * n[0] - 3.0 * n[1] + 1.0).collect();
                let p = [0.27, 0.33];
                let vals = eval_basis(cell, k, p);
                let f: f64 = vals.iter().zip(&coeffs).map(|(v, c)| v * c).sum();
                assert!((f - (2.0 * p[0] - 3.0 * p[1] + 1.0)).abs() < 1e-12);
                let grads = eval_basis_grad(cell, k, p);
                let fx: f64 = grads.iter().zip(&coeffs).map(|(g, c)| g[0] * c).sum();
                let fy: f64 = grads.iter().zip(&coeffs).map(|(g, c)| g[1] * c).sum();
                assert!((fx - 2.0).abs() < 1e-11 && (fy + 3.0).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn edge_nodes_trace_the_edge() {
        for k in 1..=3usize {
            for cell in [CellType::Quad, CellType::Tri] {
                let nodes = local_nodes(cell, k);
                for e in 0..cell.n_edges() {
                    let idx = edge_local_nodes(cell, k, e);
                    assert_eq!(idx.len(), k + 1);
                    for (j, &i) in idx.iter().enumerate() {
                        let t = j as f64 / k as f64;
                        let p = cell.edge_point(e, t);
                        assert!((nodes[i][0] - p[0]).abs() < 1e-14);
                        assert!((nodes[i][1] - p[1]).abs() < 1e-14);
                    }
                }
            }
        }
    }
}
