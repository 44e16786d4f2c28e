//! Gauss quadrature rules on the reference segment, quadrilateral, and triangle.
//!
//! Cell rules are chosen exact for polynomial degree `2k + 1` where `k` is the
//! isoparametric element degree. Triangle rules are built from a tensor
//! Gauss-Legendre rule through the Duffy map, which keeps all weights positive.

/// Nodes and weights of an n-point Gauss-Legendre rule on [0, 1].
///
/// Exact for polynomials of degree 2n - 1.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots of P_n on [-1, 1] by Newton iteration from Chebyshev initial guesses.
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let j = j as f64;
        let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A quadrature rule on a reference cell: points in reference coordinates plus weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Tensor Gauss rule on the unit square, exact for degree 2n-1 per direction.
pub fn quad_rule(n: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre_01(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            points.push([x[i], x[j]]);
            weights.push(w[i] * w[j]);
        }
    }
    QuadratureRule { points, weights }
}

/// Duffy-collapsed tensor rule on the unit triangle {x, y >= 0, x + y <= 1}.
///
/// Exact for total degree `deg`: the Duffy Jacobian raises the eta-degree by
/// one, so the eta rule takes one extra point.
pub fn tri_rule_for_degree(deg: usize) -> QuadratureRule {
    let n_xi = deg / 2 + 1;
    let n_eta = (deg + 1) / 2 + 1;
    let (xs, wxs) = gauss_legendre_01(n_xi);
    let (ys, wys) = gauss_legendre_01(n_eta);
    let mut points = Vec::with_capacity(n_xi * n_eta);
    let mut weights = Vec::with_capacity(n_xi * n_eta);
    for j in 0..n_eta {
        for i in 0..n_xi {
            let eta = ys[j];
            let xi = xs[i] * (1.0 - eta);
            points.push([xi, eta]);
            weights.push(wxs[i] * wys[j] * (1.0 - eta));
        }
    }
    QuadratureRule { points, weights }
}

/// Cell rule exact for total polynomial degree `deg` on the given cell type.
pub fn cell_rule(cell: super::shape::CellType, deg: usize) -> QuadratureRule {
    match cell {
        super::shape::CellType::Quad => quad_rule(deg / 2 + 1),
        super::shape::CellType::Tri => tri_rule_for_degree(deg),
    }
}

/// 1D facet rule on [0, 1], exact for degree 2n-1.
pub fn facet_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre_01(n)
}
