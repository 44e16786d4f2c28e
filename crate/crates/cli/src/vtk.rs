//! Legacy ASCII VTK snapshots of the deformed configuration: points are the
//! mapped dof positions, cells are emitted as the k^2 linear sub-cells of each
//! degree-k cell for viewer compatibility. Point data: scalars "h" and "pi",
//! vector "displacement" (psi - id).

use std::io::Write;
use std::path::Path;
use thinfilm_core::fem::shape::{local_nodes, CellType};
use thinfilm_core::fem::Field;
use thinfilm_core::state::AleState;

/// Local node index at grid position (i, j) of the (k+1)x(k+1) lattice (quad)
/// or the barycentric lattice (tri).
fn lattice_index(ct: CellType, k: usize, i: usize, j: usize) -> usize {
    let target = [i as f64 / k as f64, j as f64 / k as f64];
    local_nodes(ct, k)
        .iter()
        .position(|p| (p[0] - target[0]).abs() < 1e-12 && (p[1] - target[1]).abs() < 1e-12)
        .expect("lattice point is a local node")
}

fn subcells(ct: CellType, k: usize) -> Vec<Vec<usize>> {
    let mut cells = Vec::new();
    match ct {
        CellType::Quad => {
            for j in 0..k {
                for i in 0..k {
                    cells.push(vec![
                        lattice_index(ct, k, i, j),
                        lattice_index(ct, k, i + 1, j),
                        lattice_index(ct, k, i + 1, j + 1),
                        lattice_index(ct, k, i, j + 1),
                    ]);
                }
            }
        }
        CellType::Tri => {
            for j in 0..k {
                for i in 0..k - j {
                    cells.push(vec![
                        lattice_index(ct, k, i, j),
                        lattice_index(ct, k, i + 1, j),
                        lattice_index(ct, k, i, j + 1),
                    ]);
                    if i + j < k - 1 {
                        cells.push(vec![
                            lattice_index(ct, k, i + 1, j),
                            lattice_index(ct, k, i + 1, j + 1),
                            lattice_index(ct, k, i, j + 1),
                        ]);
                    }
                }
            }
        }
    }
    cells
}

pub fn write_vtk(state: &AleState, pi: Option<&Field>, path: &Path) -> std::io::Result<()> {
    let space = &state.space;
    let ct = space.mesh.cell_type;
    let k = space.degree;
    let n = space.n_scalar_dofs();

    let sub = subcells(ct, k);
    let n_sub = sub.len() * space.mesh.n_cells();
    let nodes_per = ct.n_vertices();
    let vtk_type = match ct {
        CellType::Quad => 9,
        CellType::Tri => 5,
    };

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("thin-film state\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {n} double\n"));
    for d in 0..n {
        out.push_str(&format!(
            "{:.9e} {:.9e} 0.0\n",
            state.psi.coeffs[2 * d],
            state.psi.coeffs[2 * d + 1]
        ));
    }
    out.push_str(&format!("CELLS {} {}\n", n_sub, n_sub * (1 + nodes_per)));
    for c in 0..space.mesh.n_cells() {
        let dofs = &space.cell_dofs[c];
        for s in &sub {
            out.push_str(&format!("{nodes_per}"));
            for &ln in s {
                out.push_str(&format!(" {}", dofs[ln]));
            }
            out.push('\n');
        }
    }
    out.push_str(&format!("CELL_TYPES {n_sub}\n"));
    for _ in 0..n_sub {
        out.push_str(&format!("{vtk_type}\n"));
    }
    out.push_str(&format!("POINT_DATA {n}\n"));
    out.push_str("SCALARS h double 1\nLOOKUP_TABLE default\n");
    for d in 0..n {
        out.push_str(&format!("{:.9e}\n", state.h.coeffs[d]));
    }
    out.push_str("SCALARS pi double 1\nLOOKUP_TABLE default\n");
    for d in 0..n {
        let v = pi.map(|f| f.coeffs[d]).unwrap_or(0.0);
        out.push_str(&format!("{v:.9e}\n"));
    }
    out.push_str("VECTORS displacement double\n");
    for d in 0..n {
        out.push_str(&format!(
            "{:.9e} {:.9e} 0.0\n",
            state.psi.coeffs[2 * d] - space.node_coords[d][0],
            state.psi.coeffs[2 * d + 1] - space.node_coords[d][1]
        ));
    }

    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    f.write_all(out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use thinfilm_core::fem::FeSpace;
    use thinfilm_core::mesh::build_disc_mesh;

    #[test]
    fn subcell_counts() {
        assert_eq!(subcells(CellType::Quad, 1).len(), 1);
        assert_eq!(subcells(CellType::Quad, 2).len(), 4);
        assert_eq!(subcells(CellType::Quad, 3).len(), 9);
        assert_eq!(subcells(CellType::Tri, 2).len(), 4);
        assert_eq!(subcells(CellType::Tri, 3).len(), 9);
    }

    #[test]
    fn identity_snapshot_has_zero_displacement() {
        let mesh = Arc::new(build_disc_mesh(1, 2, CellType::Quad).unwrap());
        let space = FeSpace::new(mesh, 2).unwrap();
        let state = AleState::new(
            space.clone(),
            Field::identity(space.clone()),
            Field::zeros_scalar(space.clone()),
            1.0,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.vtk");
        write_vtk(&state, None, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        let disp: Vec<&str> = text
            .split("VECTORS displacement double\n")
            .nth(1)
            .unwrap()
            .lines()
            .collect();
        for line in disp {
            for v in line.split_whitespace() {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0);
            }
        }
    }
}
