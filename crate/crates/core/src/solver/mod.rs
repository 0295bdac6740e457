//! Global assembly, clamped boundary conditions, sparse solve and error
//! norms.

mod bc;
mod exact;
mod local;

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::DVector;
use rayon::prelude::*;

pub use bc::{clamped_constraints, split_block, vertex_constraint_rows, BlockSplit, Constraints};
pub use exact::{sin_power_derivative, ManufacturedSolution, SolutionKind};
pub use local::{local_forms, local_load, local_stiffness, stabilization, stabilization_factor, LocalForms};

use crate::error::{Result, VemError};
use crate::mesh::{Mesh, Point};
use crate::polycalc::PolyCoeffs;
use crate::projectors::{tensor_weights, ElementOperators};
use crate::space::{dofs_of_function, ElementContext, GlobalDofMap, SpaceParams};

/// Symmetric sparse matrix as sorted, duplicate-free triplets, with a
/// right-hand side.
#[derive(Clone, Debug, Default)]
pub struct SparseSystem {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>, rhs: Vec<f64>) -> Self {
        entries.sort_unstable_by_key(|&(i, j, _)| (j, i));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        SparseSystem { n, entries: merged, rhs }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.2.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let map: std::collections::HashMap<(usize, usize), f64> =
            self.entries.iter().map(|&(i, j, v)| ((i, j), v)).collect();
        self.entries
            .iter()
            .map(|&(i, j, v)| (v - map.get(&(j, i)).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

/// Assembled global problem before boundary conditions.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub params: SpaceParams,
    pub map: GlobalDofMap,
    pub system: SparseSystem,
    pub operators: Vec<ElementOperators>,
}

/// Scatter-adds every cell's stiffness and load; cells are processed in
/// parallel.
pub fn assemble(mesh: &Mesh, params: &SpaceParams, f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Assembled> {
    let map = GlobalDofMap::new(mesh, params);
    let locals: Vec<(ElementOperators, LocalForms)> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let ctx = ElementContext::new(mesh, params, c)?;
            local_forms(&ctx, f)
        })
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(locals.iter().map(|(_, l)| l.k.len()).sum());
    let mut rhs = vec![0.0; map.len()];
    for (_, forms) in &locals {
        let l2g = map.local_to_global(forms.cell);
        for (a, &i) in l2g.iter().enumerate() {
            rhs[i] += forms.b[a];
            for (b, &j) in l2g.iter().enumerate() {
                entries.push((i, j, forms.k[(a, b)]));
            }
        }
    }
    let system = SparseSystem::from_triplets(map.len(), entries, rhs);
    Ok(Assembled { params: *params, map, system, operators: locals.into_iter().map(|(o, _)| o).collect() })
}

/// Global DOFs of a smooth function given through its derivatives.
pub fn interpolate(
    mesh: &Mesh,
    map: &GlobalDofMap,
    params: &SpaceParams,
    oracle: &(dyn Fn(crate::polycalc::MultiIndex, Point) -> f64 + Sync),
) -> Result<Vec<f64>> {
    let locals: Vec<Vec<f64>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let ctx = ElementContext::new(mesh, params, c)?;
            Ok(dofs_of_function(&ctx, oracle))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; map.len()];
    for (c, values) in locals.iter().enumerate() {
        for (&i, v) in map.local_to_global(c).iter().zip(values) {
            out[i] = *v;
        }
    }
    Ok(out)
}

/// Outcome of a sparse direct solve.
#[derive(Clone, Debug)]
pub struct SolveDiagnostics {
    pub reduced_size: usize,
    pub constraints: usize,
    /// `||A y - r|| / ||r||` of the reduced system.
    pub relative_residual: f64,
}

/// Sparse Cholesky solve of a symmetric positive definite system.
pub fn solve_spd(system: &SparseSystem) -> Result<(Vec<f64>, f64)> {
    let n = system.n;
    let rnorm = system.rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let triplets: Vec<Triplet<usize, usize, f64>> =
        system.entries.iter().map(|&(row, col, val)| Triplet { row, col, val }).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| VemError::InvalidMesh(format!("sparse matrix construction failed: {e:?}")))?;
    let llt = a.sp_cholesky(Side::Lower).map_err(|_| VemError::NotSpd)?;
    let rhs = Mat::from_fn(n, 1, |i, _| system.rhs[i]);
    let sol = llt.solve(&rhs);
    let y: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(VemError::NotSpd);
    }
    let ay = system.mul_vec(&y);
    let res = ay.iter().zip(&system.rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let rel = if rnorm > 0.0 { res / rnorm } else { res };
    Ok((y, rel))
}

/// Eliminates the clamped conditions and solves. `data` carries
/// interpolated boundary values for inhomogeneous problems.
pub fn solve_clamped(mesh: &Mesh, assembled: &Assembled, data: Option<&[f64]>) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let constraints = clamped_constraints(mesh, &assembled.map, &assembled.params, data)?;
    let reduced = constraints.reduce(&assembled.system);
    let (y, rel) = solve_spd(&reduced)?;
    if rel > 1e-8 {
        return Err(VemError::Residual(rel));
    }
    let diagnostics = SolveDiagnostics {
        reduced_size: reduced.n,
        constraints: constraints.n_constraints,
        relative_residual: rel,
    };
    Ok((constraints.expand(&y), diagnostics))
}

/// Errors of `Pi_r u_h` against the exact solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    pub n_dof: usize,
    /// `(sum_P a(u - Pi u_h, u - Pi u_h))^{1/2}`.
    pub energy_err: f64,
    /// Broken `H^{p1}` seminorm, each multi-index of order `p1` once.
    pub h_p1_seminorm_err: f64,
    pub l2_err: f64,
    /// `||u||_V` for relative comparisons.
    pub energy_norm: f64,
    pub relative_residual: f64,
    pub assemble_s: f64,
    pub solve_s: f64,
}

/// Energy, seminorm and `L^2` errors of the projected discrete solution.
pub fn error_norms(mesh: &Mesh, assembled: &Assembled, x: &[f64], u: &ManufacturedSolution) -> Result<ErrorReport> {
    let params = assembled.params;
    let weights = tensor_weights(params.p1);
    let parts: Vec<[f64; 4]> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let ctx = ElementContext::new(mesh, &params, c)?;
            let ops = &assembled.operators[c];
            let local: Vec<f64> = assembled.map.local_to_global(c).iter().map(|&i| x[i]).collect();
            let coeffs = &ops.pi_star * DVector::from_vec(local);
            let p = PolyCoeffs::new(ops.basis, coeffs.iter().copied().collect());
            let derivs: Vec<PolyCoeffs> = weights.iter().map(|(nu, _)| p.differentiate(*nu)).collect();
            let mut acc = [0.0; 4];
            for (q, w) in ctx.cell_quad.points.iter().zip(&ctx.cell_quad.weights) {
                for ((nu, wt), d) in weights.iter().zip(&derivs) {
                    let e = u.derivative(*nu, *q) - d.eval(*q);
                    let ex = u.derivative(*nu, *q);
                    acc[0] += w * wt * e * e;
                    acc[1] += w * e * e;
                    acc[3] += w * wt * ex * ex;
                }
                let e = u.value(*q) - p.eval(*q);
                acc[2] += w * e * e;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let sum = parts.iter().fold([0.0; 4], |mut a, p| {
        for k in 0..4 {
            a[k] += p[k];
        }
        a
    });
    Ok(ErrorReport {
        h: mesh.h(),
        n_dof: assembled.map.len(),
        energy_err: sum[0].sqrt(),
        h_p1_seminorm_err: sum[1].sqrt(),
        l2_err: sum[2].sqrt(),
        energy_norm: sum[3].sqrt(),
        relative_residual: 0.0,
        assemble_s: 0.0,
        solve_s: 0.0,
    })
}

/// Assembles, solves and measures one manufactured problem. Returns the
/// report and the global solution.
pub fn run_manufactured(mesh: &Mesh, params: &SpaceParams, u: &ManufacturedSolution) -> Result<(ErrorReport, Vec<f64>)> {
    let start = Instant::now();
    let assembled = assemble(mesh, params, &|x| u.rhs(x))?;
    let data = if u.is_clamped() {
        None
    } else {
        Some(interpolate(mesh, &assembled.map, params, &|nu, x| u.derivative(nu, x))?)
    };
    let assemble_s = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let (x, diag) = solve_clamped(mesh, &assembled, data.as_deref())?;
    let solve_s = start.elapsed().as_secs_f64();
    let mut report = error_norms(mesh, &assembled, &x, u)?;
    report.relative_residual = diag.relative_residual;
    report.assemble_s = assemble_s;
    report.solve_s = solve_s;
    Ok((report, x))
}
