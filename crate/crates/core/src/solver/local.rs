//! Element stiffness and load.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VemError};
use crate::mesh::Point;
use crate::polycalc::basis_count;
use crate::projectors::ElementOperators;
use crate::space::{ElementContext, LoadCase};

/// Scaling of the dofi-dofi stabilization, `h_P^{2(1-p1)}`.
pub fn stabilization_factor(p1: usize, h: f64) -> f64 {
    h.powi(2 * (1 - p1 as i32))
}

/// `S = h_P^{2(1-p1)} I` in scaled-DOF coordinates.
pub fn stabilization(ctx: &ElementContext<'_>) -> DMatrix<f64> {
    DMatrix::identity(ctx.ndofs(), ctx.ndofs()) * stabilization_factor(ctx.params.p1, ctx.h)
}

/// Stiffness and load of one cell.
#[derive(Clone, Debug)]
pub struct LocalForms {
    pub cell: usize,
    pub k: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// `K = Pi^T G Pi + S (I - D Pi)^T (I - D Pi)`.
pub fn local_stiffness(ctx: &ElementContext<'_>, ops: &ElementOperators) -> DMatrix<f64> {
    let n = ops.ndofs();
    let consistency = ops.pi_star.transpose() * &ops.g * &ops.pi_star;
    let defect = DMatrix::identity(n, n) - &ops.d * &ops.pi_star;
    let stab = defect.transpose() * stabilization(ctx) * &defect;
    let k = consistency + stab;
    // symmetrize away roundoff
    (&k + k.transpose()) * 0.5
}

/// Load vector `b_i = int (Pi0 f)(Pi0 phi_i)` with `Pi0` onto `P_{r-2p1}`
/// or, for the enhanced space, `P_{r-p1}`.
pub fn local_load(
    ctx: &ElementContext<'_>,
    ops: &ElementOperators,
    f: &(dyn Fn(Point) -> f64 + Sync),
) -> Result<DVector<f64>> {
    let (degree, pi0) = match ctx.params.load_case() {
        LoadCase::CellMoments => (ctx.params.cell_moment_degree(), &ops.pi0_low),
        LoadCase::Enhanced => {
            let pi = ops.pi0_enh.as_ref().ok_or(VemError::NotEnhanced)?;
            (ctx.params.enhanced_degree(), pi)
        }
    };
    let n = basis_count(degree);
    if n == 0 {
        return Ok(DVector::zeros(ops.ndofs()));
    }
    let sub = ops.basis.with_degree(degree);
    let mut moments = DVector::zeros(n);
    for (x, w) in ctx.cell_quad.points.iter().zip(&ctx.cell_quad.weights) {
        let fx = f(*x);
        for (m, v) in moments.iter_mut().zip(sub.eval_all(*x)) {
            *m += w * fx * v;
        }
    }
    // M c_f = moments, and b = Pi0^T M c_f = Pi0^T moments
    Ok(pi0.transpose() * moments)
}

pub fn local_forms(ctx: &ElementContext<'_>, f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<(ElementOperators, LocalForms)> {
    let ops = ElementOperators::new(ctx)?;
    let k = local_stiffness(ctx, &ops);
    let b = local_load(ctx, &ops, f)?;
    Ok((ops, LocalForms { cell: ctx.cell, k, b }))
}
