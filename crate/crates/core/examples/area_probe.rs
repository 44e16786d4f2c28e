// temporary probe: disc area/perimeter accuracy by refinement/degree
use thinfilm_core::fem::{assembly, CellType, FeSpace, Field, Measure};
use thinfilm_core::mesh::{build_disc_mesh, BoundaryTag};
use std::sync::Arc;

fn main() {
    for ct in [CellType::Quad, CellType::Tri] {
        for k in 1..=3usize {
            for r in 0..4usize {
                let mesh = Arc::new(build_disc_mesh(r, k, ct).unwrap());
                let space = FeSpace::new(mesh, k).unwrap();
                let psi = Field::identity(space.clone());
                let area = assembly::integrate_bulk(&space, &psi.coeffs, Measure::Deformed, |_,_,_| 1.0).unwrap();
                let per = assembly::integrate_boundary(&space, &psi.coeffs, BoundaryTag::FreeBoundary, Measure::Deformed, |_,_,_| 1.0).unwrap();
                println!("{ct:?} k={k} r={r}: area err {:.3e}  perim err {:.3e}",
                    (area - std::f64::consts::PI).abs(),
                    (per - 2.0*std::f64::consts::PI).abs());
            }
        }
    }
}
