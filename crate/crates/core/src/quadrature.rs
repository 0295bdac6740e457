//! Gauss rules on edges and centroid-fan rules on polygons.

use crate::error::{Result, VemError};
use crate::mesh::{Edge, Mesh, Point};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Points and positive weights exact for polynomials of total degree
/// `degree` over a region.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Collapsed tensor Gauss rule on the triangle `(a, b, c)`.
pub fn triangle_rule(a: Point, b: Point, c: Point, degree: usize) -> QuadratureRule {
    let n_u = (degree + 2).div_ceil(2);
    let n_v = (degree + 1).div_ceil(2).max(1);
    let (xu, wu) = gauss_legendre(n_u);
    let (xv, wv) = gauss_legendre(n_v);
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut points = Vec::with_capacity(n_u * n_v);
    let mut weights = Vec::with_capacity(n_u * n_v);
    for (x, w1) in xu.iter().zip(&wu) {
        let u = 0.5 * (x + 1.0);
        for (y, w2) in xv.iter().zip(&wv) {
            let v = 0.5 * (y + 1.0);
            // apex a, collapsed onto the edge b-c
            let p = [
                a[0] + u * ((1.0 - v) * (b[0] - a[0]) + v * (c[0] - a[0])),
                a[1] + u * ((1.0 - v) * (b[1] - a[1]) + v * (c[1] - a[1])),
            ];
            points.push(p);
            weights.push(0.25 * w1 * w2 * u * area2);
        }
    }
    QuadratureRule { points, weights, degree }
}

/// Rule on a mesh cell built from the fan of triangles joining the cell's
/// apex (centroid, or the `star` point) to each edge.
pub fn cell_rule(mesh: &Mesh, cell: usize, degree: usize) -> Result<QuadratureRule> {
    let c = mesh.cell(cell);
    let apex = c.fan_apex();
    let n = c.vertices.len();
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), degree };
    for i in 0..n {
        let a = mesh.vertex(c.vertices[i]);
        let b = mesh.vertex(c.vertices[(i + 1) % n]);
        let area2 = (a[0] - apex[0]) * (b[1] - apex[1]) - (a[1] - apex[1]) * (b[0] - apex[0]);
        if area2 <= 1e-14 * c.area {
            return Err(VemError::DegenerateFan { cell });
        }
        let t = triangle_rule(apex, a, b, degree);
        rule.points.extend(t.points);
        rule.weights.extend(t.weights);
    }
    Ok(rule)
}

/// Gauss rule along an edge; `params` are the reference coordinates in
/// `[-1, 1]` along the global edge orientation and `weights` are arclength
/// weights.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub params: Vec<f64>,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl EdgeRule {
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}

pub fn edge_rule(edge: &Edge, degree: usize) -> EdgeRule {
    let n = (degree + 1).div_ceil(2).max(1);
    let (params, w) = gauss_legendre(n);
    EdgeRule {
        points: params.iter().map(|&s| edge.point_at(s)).collect(),
        weights: w.iter().map(|w| 0.5 * edge.length * w).collect(),
        params,
        degree,
    }
}
