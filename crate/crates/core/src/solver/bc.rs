//! Clamped boundary conditions by elimination.
//!
//! Every global DOF is written as `x_i = x0_i + sum_k T_ik y_k` over the
//! reduced unknowns `y`. Boundary vertex blocks are split by an SVD of their
//! constraint rows into a fixed row space and a free null space; constrained
//! edge moments are fixed outright.

use nalgebra::DMatrix;

use super::SparseSystem;
use crate::error::{Result, VemError};
use crate::mesh::Mesh;
use crate::polycalc::MultiIndex;
use crate::space::{directional_expansion, DofDescriptor, GlobalDofMap, SpaceParams};

/// Relative singular value threshold for dependent constraint rows.
const RANK_TOL: f64 = 1e-10;
/// Largest admissible misfit of inhomogeneous data.
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Constraints {
    /// Reduced representation `T_i` of each global DOF.
    pub repr: Vec<Vec<(usize, f64)>>,
    pub x0: Vec<f64>,
    pub n_reduced: usize,
    /// Number of independent constraint rows.
    pub n_constraints: usize,
}

/// Constraint rows at boundary vertex `v`: `h_V^{j+l} d_t^l d_n^j u(V)`
/// for every adjacent boundary edge frame, `j < p1`, `j + l < p2`, as
/// combinations of the vertex DOFs.
pub fn vertex_constraint_rows(mesh: &Mesh, params: &SpaceParams, v: usize) -> DMatrix<f64> {
    let nvd = params.vertex_dofs();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for e in mesh.boundary_edges().filter(|&e| mesh.edge(e).vertices.contains(&v)) {
        let edge = mesh.edge(e);
        for j in 0..params.p1 {
            for ell in 0..params.p2 - j {
                let mut row = vec![0.0; nvd];
                for (nu, c) in directional_expansion(ell, j, edge.tangent, edge.normal) {
                    row[nu.position()] = c;
                }
                rows.push(row);
            }
        }
    }
    DMatrix::from_fn(rows.len(), nvd, |i, k| rows[i][k])
}

/// Rank-revealing split of one vertex block `C x = g`.
#[derive(Clone, Debug)]
pub struct BlockSplit {
    pub rank: usize,
    /// Minimum-norm solution.
    pub particular: Vec<f64>,
    /// Orthonormal rows spanning the null space of `C`.
    pub null: DMatrix<f64>,
}

pub fn split_block(c: &DMatrix<f64>, g: &[f64]) -> Result<BlockSplit> {
    let nvd = c.ncols();
    // pad so the SVD returns a complete right basis
    let m = c.nrows().max(nvd);
    let mut padded = DMatrix::zeros(m, nvd);
    padded.view_mut((0, 0), (c.nrows(), nvd)).copy_from(c);
    let svd = padded.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > RANK_TOL * smax).count();

    let mut particular = vec![0.0; nvd];
    for k in 0..rank {
        let coef: f64 = (0..c.nrows()).map(|r| u[(r, k)] * g[r]).sum::<f64>() / svd.singular_values[k];
        for (l, x) in particular.iter_mut().enumerate() {
            *x += coef * vt[(k, l)];
        }
    }
    let misfit = (0..c.nrows())
        .map(|r| ((0..nvd).map(|k| c[(r, k)] * particular[k]).sum::<f64>() - g[r]).abs())
        .fold(0.0, f64::max);
    let scale = 1.0 + g.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if misfit > CONSISTENCY_TOL * scale {
        return Err(VemError::InconsistentConstraints { residual: misfit });
    }
    Ok(BlockSplit { rank, particular, null: vt.rows(rank, nvd - rank).clone_owned() })
}

/// Builds the elimination for clamped conditions. `data` holds the
/// interpolated exact solution for inhomogeneous problems; `None` means
/// homogeneous.
pub fn clamped_constraints(
    mesh: &Mesh,
    map: &GlobalDofMap,
    params: &SpaceParams,
    data: Option<&[f64]>,
) -> Result<Constraints> {
    let n = map.len();
    let nvd = params.vertex_dofs();
    let mut fixed = vec![false; n];
    let mut x0 = vec![0.0; n];
    let mut blocks: Vec<(Vec<usize>, DMatrix<f64>)> = Vec::new();
    let mut in_block = vec![usize::MAX; n];
    let mut n_constraints = 0;

    for &v in map.boundary_vertices() {
        let dofs: Vec<usize> = MultiIndex::up_to(params.p2 as i64 - 1)
            .map(|nu| map.index(&DofDescriptor::VertexDerivative { vertex: v, nu }).expect("vertex DOF"))
            .collect();
        let c = vertex_constraint_rows(mesh, params, v);
        let g: Vec<f64> = match data {
            Some(u) => {
                let local: Vec<f64> = dofs.iter().map(|&i| u[i]).collect();
                (0..c.nrows()).map(|r| (0..nvd).map(|k| c[(r, k)] * local[k]).sum()).collect()
            }
            None => vec![0.0; c.nrows()],
        };
        let block = split_block(&c, &g)?;
        n_constraints += block.rank;
        let local = block.particular;
        for (k, &i) in dofs.iter().enumerate() {
            x0[i] = local[k];
            in_block[i] = blocks.len();
        }
        blocks.push((dofs, block.null));
    }

    for &e in map.boundary_edges() {
        for j in 0..params.p1 {
            for k in 0..params.edge_moment_count(j) {
                let i = map.index(&DofDescriptor::EdgeMoment { edge: e, j, k }).expect("edge DOF");
                fixed[i] = true;
                x0[i] = data.map_or(0.0, |u| u[i]);
                n_constraints += 1;
            }
        }
    }

    let mut repr: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut next = 0;
    let mut block_start = vec![usize::MAX; blocks.len()];
    for i in 0..n {
        if fixed[i] {
            continue;
        }
        let b = in_block[i];
        if b == usize::MAX {
            repr[i].push((next, 1.0));
            next += 1;
            continue;
        }
        let (dofs, null) = &blocks[b];
        if block_start[b] == usize::MAX {
            block_start[b] = next;
            next += null.nrows();
        }
        let col = dofs.iter().position(|&d| d == i).expect("member");
        for k in 0..null.nrows() {
            let c = null[(k, col)];
            if c.abs() > 1e-15 {
                repr[i].push((block_start[b] + k, c));
            }
        }
    }
    Ok(Constraints { repr, x0, n_reduced: next, n_constraints })
}

impl Constraints {
    /// `T^T K T` and `T^T (b - K x0)`.
    pub fn reduce(&self, system: &SparseSystem) -> SparseSystem {
        let kx0 = system.mul_vec(&self.x0);
        let mut rhs = vec![0.0; self.n_reduced];
        for (i, t) in self.repr.iter().enumerate() {
            for &(a, c) in t {
                rhs[a] += c * (system.rhs[i] - kx0[i]);
            }
        }
        let mut entries = Vec::with_capacity(system.entries.len());
        for &(i, j, v) in &system.entries {
            for &(a, ca) in &self.repr[i] {
                for &(b, cb) in &self.repr[j] {
                    entries.push((a, b, v * ca * cb));
                }
            }
        }
        SparseSystem::from_triplets(self.n_reduced, entries, rhs)
    }

    /// `x = x0 + T y`.
    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        self.repr
            .iter()
            .zip(&self.x0)
            .map(|(t, x0)| x0 + t.iter().map(|&(a, c)| c * y[a]).sum::<f64>())
            .collect()
    }
}
