use nalgebra::DMatrix;

use super::{directional_expansion, enumerate_extended, enumerate_local, DofDescriptor, LocalDofLayout, SpaceParams};
use crate::error::Result;
use crate::mesh::{EdgeGeometry, Mesh, Point};
use crate::polycalc::{legendre_derivatives, MultiIndex, PolyCoeffs, ScaledMonomialBasis};
use crate::quadrature::{cell_rule, edge_rule, EdgeRule, QuadratureRule};

/// Geometry, quadrature and layout of one cell, shared by every local
/// operator.
#[derive(Clone, Debug)]
pub struct ElementContext<'m> {
    pub mesh: &'m Mesh,
    pub cell: usize,
    pub params: SpaceParams,
    pub layout: LocalDofLayout,
    /// Scaled monomials of degree `r` centred at the centroid, scaled by
    /// the diameter.
    pub basis: ScaledMonomialBasis,
    pub area: f64,
    pub h: f64,
    pub edges: Vec<EdgeGeometry>,
    /// `h_V` per local vertex.
    pub vertex_h: Vec<f64>,
    pub cell_quad: QuadratureRule,
    /// Per local edge, parameterised along the global edge orientation.
    pub edge_quads: Vec<EdgeRule>,
}

impl<'m> ElementContext<'m> {
    pub fn new(mesh: &'m Mesh, params: &SpaceParams, cell: usize) -> Result<Self> {
        Self::with_layout(mesh, params, cell, enumerate_local(params, mesh, cell))
    }

    /// Context over the extended layout (extra cell moments appended).
    pub fn extended(mesh: &'m Mesh, params: &SpaceParams, cell: usize) -> Result<Self> {
        Self::with_layout(mesh, params, cell, enumerate_extended(params, mesh, cell))
    }

    fn with_layout(mesh: &'m Mesh, params: &SpaceParams, cell: usize, layout: LocalDofLayout) -> Result<Self> {
        let c = mesh.cell(cell);
        let degree = quadrature_degree(params);
        let geometry = mesh.geometry(cell);
        let edge_quads = c.edges.iter().map(|&e| edge_rule(mesh.edge(e), degree)).collect();
        Ok(ElementContext {
            mesh,
            cell,
            params: *params,
            basis: ScaledMonomialBasis::new(c.centroid, c.diameter, params.r as i64),
            area: c.area,
            h: c.diameter,
            vertex_h: c.vertices.iter().map(|&v| mesh.vertex_h(v)).collect(),
            cell_quad: cell_rule(mesh, cell, degree)?,
            edge_quads,
            edges: geometry.edges,
            layout,
        })
    }

    pub fn ndofs(&self) -> usize {
        self.layout.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_point(&self, i: usize) -> Point {
        self.mesh.vertex(self.mesh.cell(self.cell).vertices[i])
    }

    /// Global tangent and normal of local edge `i`.
    pub fn global_frame(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let e = self.mesh.edge(self.edges[i].edge);
        (e.tangent, e.normal)
    }

    /// Local vertex indices of the global start and end of local edge `i`.
    pub fn edge_endpoints(&self, i: usize) -> (usize, usize) {
        let n = self.layout.num_vertices();
        if self.edges[i].orientation > 0.0 {
            (i, (i + 1) % n)
        } else {
            ((i + 1) % n, i)
        }
    }
}

/// One exactness degree for every rule: `2r + 2p1 + 2`, raised if needed to
/// cover the widest edge trace times a degree-`r` polynomial.
pub fn quadrature_degree(params: &SpaceParams) -> usize {
    let alpha0 = params.alpha(0).expect("p2 >= 1");
    (2 * params.r + 2 * params.p1 + 2).max(alpha0 + params.r)
}

/// Applies every local functional to a function known through its
/// derivatives, `oracle(nu, x) = D^nu u(x)`.
pub fn dofs_of_function(ctx: &ElementContext<'_>, oracle: &dyn Fn(MultiIndex, Point) -> f64) -> Vec<f64> {
    let cell = ctx.mesh.cell(ctx.cell);
    ctx.layout
        .dofs
        .iter()
        .map(|d| match *d {
            DofDescriptor::VertexDerivative { vertex, nu } => {
                let iv = cell.vertices.iter().position(|&v| v == vertex).expect("vertex of cell");
                ctx.vertex_h[iv].powi(nu.order() as i32) * oracle(nu, ctx.mesh.vertex(vertex))
            }
            DofDescriptor::EdgeMoment { edge, j, k } => {
                let ie = cell.edges.iter().position(|&e| e == edge).expect("edge of cell");
                let (t, n) = ctx.global_frame(ie);
                let expansion = directional_expansion(0, j, t, n);
                let q = &ctx.edge_quads[ie];
                let integral: f64 = q
                    .params
                    .iter()
                    .zip(&q.points)
                    .zip(&q.weights)
                    .map(|((s, x), w)| {
                        let pk = legendre_derivatives(k, 0, *s)[k];
                        let dn: f64 = expansion.iter().map(|(nu, c)| c * oracle(*nu, *x)).sum();
                        w * pk * dn
                    })
                    .sum();
                ctx.edges[ie].length.powi(j as i32 - 1) * integral
            }
            DofDescriptor::CellMoment { nu, .. } | DofDescriptor::CellMomentExtra { nu, .. } => {
                let m = PolyCoeffs::monomial(ctx.basis, nu);
                ctx.cell_quad.integrate(|x| m.eval(x) * oracle(MultiIndex::ZERO, x)) / (ctx.h * ctx.h)
            }
        })
        .collect()
}

/// Degrees of freedom of a polynomial (in any frame).
pub fn dofs_of_polynomial(q: &PolyCoeffs, ctx: &ElementContext<'_>) -> Vec<f64> {
    dofs_of_function(ctx, &|nu, x| q.differentiate(nu).eval(x))
}

/// Degrees of freedom of every function of `basis`, one column each.
pub fn dof_matrix(ctx: &ElementContext<'_>, basis: &ScaledMonomialBasis) -> DMatrix<f64> {
    let nb = basis.count();
    let mut d = DMatrix::zeros(ctx.ndofs(), nb);
    let cell = ctx.mesh.cell(ctx.cell);
    for (row, desc) in ctx.layout.dofs.iter().enumerate() {
        let values: Vec<f64> = match *desc {
            DofDescriptor::VertexDerivative { vertex, nu } => {
                let iv = cell.vertices.iter().position(|&v| v == vertex).expect("vertex of cell");
                let s = ctx.vertex_h[iv].powi(nu.order() as i32);
                basis
                    .eval_all_derivative(nu, ctx.mesh.vertex(vertex))
                    .into_iter()
                    .map(|v| s * v)
                    .collect()
            }
            DofDescriptor::EdgeMoment { edge, j, k } => {
                let ie = cell.edges.iter().position(|&e| e == edge).expect("edge of cell");
                let (t, n) = ctx.global_frame(ie);
                let expansion = directional_expansion(0, j, t, n);
                let q = &ctx.edge_quads[ie];
                let mut acc = vec![0.0; nb];
                for ((s, x), w) in q.params.iter().zip(&q.points).zip(&q.weights) {
                    let pk = legendre_derivatives(k, 0, *s)[k];
                    for (nu, c) in &expansion {
                        for (a, v) in acc.iter_mut().zip(basis.eval_all_derivative(*nu, *x)) {
                            *a += w * pk * c * v;
                        }
                    }
                }
                let s = ctx.edges[ie].length.powi(j as i32 - 1);
                acc.into_iter().map(|a| s * a).collect()
            }
            DofDescriptor::CellMoment { nu, .. } | DofDescriptor::CellMomentExtra { nu, .. } => {
                let m = PolyCoeffs::monomial(ctx.basis, nu);
                let mut acc = vec![0.0; nb];
                for (x, w) in ctx.cell_quad.points.iter().zip(&ctx.cell_quad.weights) {
                    let mv = m.eval(*x);
                    for (a, v) in acc.iter_mut().zip(basis.eval_all(*x)) {
                        *a += w * mv * v;
                    }
                }
                acc.into_iter().map(|a| a / (ctx.h * ctx.h)).collect()
            }
        };
        for (col, v) in values.into_iter().enumerate() {
            d[(row, col)] = v;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> Mesh {
        Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![vec![0, 1, 2, 3]]).unwrap()
    }

    #[test]
    fn constant_has_unit_vertex_values() {
        let m = square();
        let params = SpaceParams::new(1, 1, 1).unwrap();
        let ctx = ElementContext::new(&m, &params, 0).unwrap();
        let one = PolyCoeffs::constant(ctx.basis, 1.0);
        assert_eq!(dofs_of_polynomial(&one, &ctx), vec![1.0; 4]);
    }

    #[test]
    fn scaled_linear_vertex_derivative() {
        let m = square();
        let params = SpaceParams::new(2, 2, 2).unwrap();
        let ctx = ElementContext::new(&m, &params, 0).unwrap();
        let q = PolyCoeffs::monomial(ctx.basis, MultiIndex::new(1, 0));
        let dofs = dofs_of_polynomial(&q, &ctx);
        let i = ctx.layout.vertex_dof(0, MultiIndex::new(1, 0));
        assert_relative_eq!(dofs[i], ctx.vertex_h[0] / ctx.h, epsilon = 1e-15);
    }

    #[test]
    fn matrix_agrees_with_functionals() {
        let m = square();
        let params = SpaceParams::new(2, 2, 4).unwrap();
        let ctx = ElementContext::extended(&m, &params, 0).unwrap();
        let d = dof_matrix(&ctx, &ctx.basis);
        for (col, nu) in MultiIndex::up_to(4).enumerate() {
            let q = PolyCoeffs::monomial(ctx.basis, nu);
            let v = dofs_of_polynomial(&q, &ctx);
            for (row, x) in v.iter().enumerate() {
                assert_relative_eq!(d[(row, col)], *x, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn full_column_rank_on_square() {
        let m = square();
        let params = SpaceParams::new(2, 2, 3).unwrap();
        let ctx = ElementContext::new(&m, &params, 0).unwrap();
        let d = dof_matrix(&ctx, &ctx.basis);
        let sv = d.singular_values();
        let max = sv.max();
        let rank = sv.iter().filter(|s| **s > 1e-8 * max).count();
        assert_eq!(rank, 10);
    }
}
