//! Reconstruction of the edge traces of `d_n^j v` from the local degrees of
//! freedom: Hermite data at both endpoints plus Legendre moments.

use nalgebra::DMatrix;

use super::{directional_expansion, ElementContext};
use crate::error::{Result, VemError};
use crate::polycalc::{legendre_derivatives, EdgePoly};

/// Matrix mapping local degrees of freedom to the Legendre coefficients of
/// the trace of `d_n^j v` on local edge `i`, where `n` is the global edge
/// normal and the Legendre parameter runs along the global orientation.
pub fn trace_matrix(ctx: &ElementContext<'_>, i: usize, j: usize) -> Result<DMatrix<f64>> {
    let params = &ctx.params;
    let alpha = params.alpha(j)?;
    let size = alpha + 1;
    let hermite = params.p2 - j;
    let moments = params.edge_moment_count(j);
    debug_assert_eq!(2 * hermite + moments, size);

    let length = ctx.edges[i].length;
    let (t, n) = ctx.global_frame(i);
    let (start, end) = ctx.edge_endpoints(i);

    let mut system = DMatrix::zeros(size, size);
    let mut data = DMatrix::zeros(size, ctx.ndofs());
    let mut row = 0;
    for (vertex, s) in [(start, -1.0), (end, 1.0)] {
        let h_v = ctx.vertex_h[vertex];
        for ell in 0..hermite {
            // rows scaled by (h_E/2)^ell so that they are dimensionless
            let values = legendre_derivatives(alpha, ell, s);
            for (k, v) in values.into_iter().enumerate() {
                system[(row, k)] = v;
            }
            let scale = (0.5 * length).powi(ell as i32);
            for (nu, c) in directional_expansion(ell, j, t, n) {
                let col = ctx.layout.vertex_dof(vertex, nu);
                data[(row, col)] += scale * c * h_v.powi(-(nu.order() as i32));
            }
            row += 1;
        }
    }
    // \int_E P_m w ds = h_E c_m / (2m + 1) = h_E^{1-j} dof
    for m in 0..moments {
        system[(row, m)] = 1.0 / (2 * m + 1) as f64;
        data[(row, ctx.layout.edge_dof(i, j, m))] = length.powi(-(j as i32));
        row += 1;
    }
    let lu = system.lu();
    let inv = lu
        .try_inverse()
        .ok_or(VemError::SingularLocal { cell: ctx.cell, what: "edge trace interpolation" })?;
    Ok(inv * data)
}

/// Trace of `d_n^j v` on local edge `i` with `n` the outward normal of the
/// cell, as a polynomial of the global edge parameter.
pub fn build_edge_trace(ctx: &ElementContext<'_>, dofs: &[f64], i: usize, j: usize) -> Result<EdgePoly> {
    let t = trace_matrix(ctx, i, j)?;
    let sign = ctx.edges[i].orientation.powi(j as i32);
    let v = nalgebra::DVector::from_column_slice(dofs);
    let coeffs = (t * v).iter().map(|c| sign * c).collect();
    Ok(EdgePoly { edge: ctx.edges[i].edge, length: ctx.edges[i].length, coeffs })
}
