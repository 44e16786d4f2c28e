//! Coefficient vectors of finite element functions.

use super::space::FeSpace;
use std::sync::Arc;

/// A scalar or vector finite element function given by its dof coefficients.
/// Vector fields store components interleaved: (x0, y0, x1, y1, ...).
#[derive(Debug, Clone)]
pub struct Field {
    pub space: Arc<FeSpace>,
    pub components: usize,
    pub coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros_scalar(space: Arc<FeSpace>) -> Field {
        let n = space.n_scalar_dofs();
        Field {
            space,
            components: 1,
            coeffs: vec![0.0; n],
        }
    }

    pub fn zeros_vector(space: Arc<FeSpace>) -> Field {
        let n = space.n_vector_dofs();
        Field {
            space,
            components: 2,
            coeffs: vec![0.0; n],
        }
    }

    pub fn scalar_from(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Field {
        assert_eq!(coeffs.len(), space.n_scalar_dofs());
        Field {
            space,
            components: 1,
            coeffs,
        }
    }

    pub fn vector_from(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Field {
        assert_eq!(coeffs.len(), space.n_vector_dofs());
        Field {
            space,
            components: 2,
            coeffs,
        }
    }

    /// The identity map as a vector field.
    pub fn identity(space: Arc<FeSpace>) -> Field {
        let coeffs = space.identity_coeffs();
        Field {
            space,
            components: 2,
            coeffs,
        }
    }

    pub fn min(&self) -> f64 {
        self.coeffs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.coeffs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &Field) {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (s, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in self.coeffs.iter_mut() {
            *s *= a;
        }
    }

    pub fn norm_l2_coeffs(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}
