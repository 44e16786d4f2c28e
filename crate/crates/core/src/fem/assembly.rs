//! Block sparse systems, essential boundary conditions, and the generic
//! Galerkin building blocks (mass, stiffness, boundary mass, load vectors) on
//! the deformed configuration.

use super::geometry::{eval_grad, eval_scalar, gather, DeformedGeometry};
use super::space::FeSpace;
use crate::error::{CoreError, CoreResult};
use crate::mesh::BoundaryTag;
use std::collections::{BTreeMap, HashMap};

/// Which measure an integral is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Deformed: bulk weight Jbar, boundary weight Abar.
    Deformed,
    /// Reference mesh measure.
    Reference,
}

#[derive(Debug, Clone)]
pub struct BlockLayout {
    pub names: Vec<&'static str>,
    pub sizes: Vec<usize>,
    pub offsets: Vec<usize>,
    pub total: usize,
}

impl BlockLayout {
    pub fn new(blocks: &[(&'static str, usize)]) -> BlockLayout {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut total = 0;
        for (_, s) in blocks {
            offsets.push(total);
            total += s;
        }
        BlockLayout {
            names: blocks.iter().map(|(n, _)| *n).collect(),
            sizes: blocks.iter().map(|(_, s)| *s).collect(),
            offsets,
            total,
        }
    }

    pub fn block(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| *n == name)
            .unwrap_or_else(|| panic!("unknown block {name}"))
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        self.offsets[block]..self.offsets[block] + self.sizes[block]
    }
}

/// Accumulates triplets and right-hand side entries by block, then applies
/// essential constraints symmetrically and hands off to the sparse solver.
pub struct SystemBuilder {
    pub layout: BlockLayout,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    essential: BTreeMap<usize, f64>,
}

impl SystemBuilder {
    pub fn new(layout: BlockLayout) -> SystemBuilder {
        let n = layout.total;
        SystemBuilder {
            layout,
            triplets: Vec::new(),
            rhs: vec![0.0; n],
            essential: BTreeMap::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, row_block: usize, col_block: usize, r: usize, c: usize, v: f64) {
        if v != 0.0 {
            self.triplets.push((
                self.layout.offsets[row_block] + r,
                self.layout.offsets[col_block] + c,
                v,
            ));
        }
    }

    #[inline]
    pub fn add_rhs(&mut self, block: usize, r: usize, v: f64) {
        self.rhs[self.layout.offsets[block] + r] += v;
    }

    pub fn add_triplets(&mut self, row_block: usize, col_block: usize, t: &[(usize, usize, f64)]) {
        for &(r, c, v) in t {
            self.add(row_block, col_block, r, c, v);
        }
    }

    /// Pin a dof of a block to a value; applied symmetrically at finalize.
    pub fn set_essential(&mut self, block: usize, local: usize, value: f64) {
        self.essential
            .insert(self.layout.offsets[block] + local, value);
    }

    pub fn finalize(self) -> LinearSystem {
        let n = self.layout.total;
        let mut rhs = self.rhs;
        let mut kept: Vec<(usize, usize, f64)> = Vec::with_capacity(self.triplets.len());
        if self.essential.is_empty() {
            kept = self.triplets;
        } else {
            for (r, c, v) in self.triplets {
                let r_bc = self.essential.contains_key(&r);
                let c_bc = self.essential.contains_key(&c);
                if r_bc {
                    continue;
                }
                if c_bc {
                    rhs[r] -= v * self.essential[&c];
                } else {
                    kept.push((r, c, v));
                }
            }
            for (&g, &val) in &self.essential {
                kept.push((g, g, 1.0));
                rhs[g] = val;
            }
        }
        LinearSystem {
            layout: self.layout,
            n,
            triplets: kept,
            rhs,
        }
    }
}

/// Assembled sparse system in block form.
pub struct LinearSystem {
    pub layout: BlockLayout,
    pub n: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    /// max |A - A^T| over max |A|, for symmetry checks in tests.
    pub fn symmetry_defect(&self) -> f64 {
        let mut map: HashMap<(usize, usize), f64> = HashMap::new();
        let mut amax: f64 = 0.0;
        for &(r, c, v) in &self.triplets {
            *map.entry((r, c)).or_insert(0.0) += v;
        }
        for v in map.values() {
            amax = amax.max(v.abs());
        }
        let mut defect: f64 = 0.0;
        for (&(r, c), &v) in &map {
            let vt = map.get(&(c, r)).copied().unwrap_or(0.0);
            defect = defect.max((v - vt).abs());
        }
        if amax > 0.0 {
            defect / amax
        } else {
            0.0
        }
    }
}

/// Local element matrices scattered against global scalar dofs.
pub fn scatter_local(
    builder: &mut SystemBuilder,
    row_block: usize,
    col_block: usize,
    row_dofs: &[usize],
    col_dofs: &[usize],
    local: &[f64],
) {
    let nc = col_dofs.len();
    for (i, &rd) in row_dofs.iter().enumerate() {
        for (j, &cd) in col_dofs.iter().enumerate() {
            builder.add(row_block, col_block, rd, cd, local[i * nc + j]);
        }
    }
}

/// Bulk mass with a pointwise coefficient: int c(x) u v (measure).
pub fn bulk_mass_triplets(
    space: &FeSpace,
    psi: &[f64],
    measure: Measure,
    coeff: impl Fn(usize, [f64; 2]) -> f64,
) -> CoreResult<Vec<(usize, usize, f64)>> {
    let geo = DeformedGeometry::new(space, psi);
    let mut trips = Vec::new();
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        let dofs = &space.cell_dofs[c];
        let vals = &space.cell_table.vals;
        for q in 0..cg.w_def.len() {
            let w = match measure {
                Measure::Deformed => cg.w_def[q],
                Measure::Reference => cg.w_ref[q],
            } * coeff(c, cg.phys[q]);
            for (i, &di) in dofs.iter().enumerate() {
                let wi = w * vals[q][i];
                for (j, &dj) in dofs.iter().enumerate() {
                    trips.push((di, dj, wi * vals[q][j]));
                }
            }
        }
    }
    Ok(trips)
}

/// Bulk stiffness with Eulerian gradients: int c(x) grad(u) . grad(v) Jbar.
pub fn bulk_stiffness_triplets(
    space: &FeSpace,
    psi: &[f64],
    coeff: impl Fn(usize, [f64; 2]) -> f64,
) -> CoreResult<Vec<(usize, usize, f64)>> {
    let geo = DeformedGeometry::new(space, psi);
    let mut trips = Vec::new();
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        let dofs = &space.cell_dofs[c];
        for q in 0..cg.w_def.len() {
            let w = cg.w_def[q] * coeff(c, cg.phys[q]);
            let g = &cg.grad[q];
            for (i, &di) in dofs.iter().enumerate() {
                for (j, &dj) in dofs.iter().enumerate() {
                    trips.push((di, dj, w * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
                }
            }
        }
    }
    Ok(trips)
}

/// Boundary mass over facets with a tag: int c(x) u v (measure) on gamma.
pub fn boundary_mass_triplets(
    space: &FeSpace,
    psi: &[f64],
    tag: BoundaryTag,
    measure: Measure,
    coeff: impl Fn(usize, [f64; 2]) -> f64,
) -> CoreResult<Vec<(usize, usize, f64)>> {
    let geo = DeformedGeometry::new(space, psi);
    let mut trips = Vec::new();
    for fi in space.facets_with_tag(tag) {
        let fg = geo.facet(fi)?;
        let dofs = space.facet_dofs(fg.cell, fg.local_edge);
        let edge_nodes =
            super::shape::edge_local_nodes(space.mesh.cell_type, space.degree, fg.local_edge);
        let vals = &space.facet_table.vals[fg.local_edge];
        for q in 0..fg.w_def.len() {
            let w = match measure {
                Measure::Deformed => fg.w_def[q],
                Measure::Reference => fg.w_ref[q],
            } * coeff(fi, fg.phys[q]);
            for (i, &di) in dofs.iter().enumerate() {
                let vi = vals[q][edge_nodes[i]];
                for (j, &dj) in dofs.iter().enumerate() {
                    trips.push((di, dj, w * vi * vals[q][edge_nodes[j]]));
                }
            }
        }
    }
    Ok(trips)
}

/// int f(x) v (measure) over the bulk.
pub fn bulk_load(
    space: &FeSpace,
    psi: &[f64],
    measure: Measure,
    f: impl Fn(usize, [f64; 2]) -> f64,
) -> CoreResult<Vec<f64>> {
    let geo = DeformedGeometry::new(space, psi);
    let mut rhs = vec![0.0; space.n_scalar_dofs()];
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        let dofs = &space.cell_dofs[c];
        for q in 0..cg.w_def.len() {
            let w = match measure {
                Measure::Deformed => cg.w_def[q],
                Measure::Reference => cg.w_ref[q],
            } * f(c, cg.phys[q]);
            for (i, &di) in dofs.iter().enumerate() {
                rhs[di] += w * space.cell_table.vals[q][i];
            }
        }
    }
    Ok(rhs)
}

/// int f over the deformed bulk (scalar functional).
pub fn integrate_bulk(
    space: &FeSpace,
    psi: &[f64],
    measure: Measure,
    mut f: impl FnMut(usize, usize, &super::geometry::CellGeo) -> f64,
) -> CoreResult<f64> {
    let geo = DeformedGeometry::new(space, psi);
    let mut total = 0.0;
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        for q in 0..cg.w_def.len() {
            let w = match measure {
                Measure::Deformed => cg.w_def[q],
                Measure::Reference => cg.w_ref[q],
            };
            total += w * f(c, q, &cg);
        }
    }
    Ok(total)
}

/// int f over deformed boundary facets with a tag (scalar functional).
pub fn integrate_boundary(
    space: &FeSpace,
    psi: &[f64],
    tag: BoundaryTag,
    measure: Measure,
    mut f: impl FnMut(usize, usize, &super::geometry::FacetGeo) -> f64,
) -> CoreResult<f64> {
    let geo = DeformedGeometry::new(space, psi);
    let mut total = 0.0;
    for fi in space.facets_with_tag(tag) {
        let fg = geo.facet(fi)?;
        for q in 0..fg.w_def.len() {
            let w = match measure {
                Measure::Deformed => fg.w_def[q],
                Measure::Reference => fg.w_ref[q],
            };
            total += w * f(fi, q, &fg);
        }
    }
    Ok(total)
}

/// Galerkin L2 projection of a pointwise expression onto the space, on the
/// deformed configuration.
pub fn l2_project(
    space: &FeSpace,
    psi: &[f64],
    f: impl Fn([f64; 2]) -> f64,
) -> CoreResult<Vec<f64>> {
    let layout = BlockLayout::new(&[("u", space.n_scalar_dofs())]);
    let mut builder = SystemBuilder::new(layout);
    let mass = bulk_mass_triplets(space, psi, Measure::Deformed, |_, _| 1.0)?;
    builder.add_triplets(0, 0, &mass);
    let load = bulk_load(space, psi, Measure::Deformed, |_, x| f(x))?;
    for (i, v) in load.iter().enumerate() {
        builder.add_rhs(0, i, *v);
    }
    super::solver::solve_direct(&builder.finalize())
}

/// L2 norm of the difference between a coefficient field and a pointwise
/// reference on the deformed configuration.
pub fn l2_error(
    space: &FeSpace,
    psi: &[f64],
    coeffs: &[f64],
    reference: impl Fn([f64; 2]) -> f64,
) -> CoreResult<f64> {
    let val = integrate_bulk(space, psi, Measure::Deformed, |c, q, cg| {
        let local = gather(coeffs, &space.cell_dofs[c]);
        let u = eval_scalar(&local, &space.cell_table.vals[q]);
        let r = reference(cg.phys[q]);
        (u - r) * (u - r)
    })?;
    Ok(val.sqrt())
}

/// Gradient of a scalar coefficient field at a cell quadrature point (Eulerian).
pub fn field_gradient_at(
    space: &FeSpace,
    coeffs: &[f64],
    cell: usize,
    cg: &super::geometry::CellGeo,
    q: usize,
) -> [f64; 2] {
    let local = gather(coeffs, &space.cell_dofs[cell]);
    eval_grad(&local, &cg.grad[q])
}

pub fn check_same_mesh(a: &FeSpace, b: &FeSpace) -> CoreResult<()> {
    if std::ptr::eq(
        a.mesh.as_ref() as *const _,
        b.mesh.as_ref() as *const _,
    ) {
        Ok(())
    } else {
        Err(CoreError::Assembly(
            "fields live on different meshes".into(),
        ))
    }
}
