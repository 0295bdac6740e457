//! Computable projections of the local virtual space: the elliptic
//! projector onto `P_s` and the `L^2` projectors onto `P_{r-2p1}` and
//! (enhanced space) `P_{r-p1}`.
//!
//! The local energy form is the full tensor seminorm
//! `a(u, v) = sum_{|nu| = p1} p1!/nu! int D^nu u D^nu v`, whose kernel on
//! polynomials is exactly `P_{p1-1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VemError};
use crate::polycalc::{basis_count, factorial, legendre_derivatives, MultiIndex, PolyCoeffs, ScaledMonomialBasis};
use crate::quadrature::QuadratureRule;
use crate::space::{cartesian_in_frame, dof_matrix, trace_matrix, ElementContext, SpaceParams};

/// `p1!/nu!` for every `|nu| = p1`.
pub fn tensor_weights(p1: usize) -> Vec<(MultiIndex, f64)> {
    MultiIndex::of_order(p1).map(|nu| (nu, factorial(p1) / nu.factorial())).collect()
}

/// Local energy form of two polynomials, integrated with `rule`.
pub fn poly_bilinear(a: &PolyCoeffs, b: &PolyCoeffs, p1: usize, rule: &QuadratureRule) -> f64 {
    tensor_weights(p1)
        .into_iter()
        .map(|(nu, w)| {
            let da = a.differentiate(nu);
            let db = b.differentiate(nu);
            w * rule.integrate(|x| da.eval(x) * db.eval(x))
        })
        .sum()
}

/// One boundary term of the repeated integration by parts of
/// `int D^nu v D^nu q`: `coef * int_dP D^mu v * D^qder q * n[dir]`.
#[derive(Clone, Copy, Debug)]
struct BoundaryTerm {
    mu: MultiIndex,
    qder: MultiIndex,
    dir: usize,
    coef: f64,
}

fn boundary_terms(p1: usize) -> Vec<BoundaryTerm> {
    let mut out = Vec::new();
    for (nu, w) in tensor_weights(p1) {
        // peel x-derivatives first, then y
        let dirs: Vec<usize> = std::iter::repeat_n(0, nu.nu1).chain(std::iter::repeat_n(1, nu.nu2)).collect();
        let mut mu = nu;
        let mut lambda = MultiIndex::ZERO;
        for (k, &d) in dirs.iter().enumerate() {
            let unit = if d == 0 { MultiIndex::new(1, 0) } else { MultiIndex::new(0, 1) };
            mu = if d == 0 { MultiIndex::new(mu.nu1 - 1, mu.nu2) } else { MultiIndex::new(mu.nu1, mu.nu2 - 1) };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out.push(BoundaryTerm { mu, qder: nu + lambda, dir: d, coef: sign * w });
            lambda = lambda + unit;
        }
    }
    out
}

/// Local matrices of one cell. Rows and columns indexed by polynomials
/// refer to the scaled monomials of `basis`, graded lexicographically.
#[derive(Clone, Debug)]
pub struct ElementOperators {
    pub cell: usize,
    pub params: SpaceParams,
    pub basis: ScaledMonomialBasis,
    /// Degrees of freedom of each monomial, `N_dof x card(P_r)`.
    pub d: DMatrix<f64>,
    /// Energy Gram matrix of the monomials.
    pub g: DMatrix<f64>,
    /// `b[(i, :)]` maps degrees of freedom to `a(v, m_i)`.
    pub b: DMatrix<f64>,
    /// `L^2(P)` Gram matrix of the monomials.
    pub mass: DMatrix<f64>,
    /// `int_dP m_k m_j` for `m_k` in `P_{p1-1}`.
    pub boundary_gram: DMatrix<f64>,
    /// `int_dP v m_k` for `m_k` in `P_{p1-1}`, as functionals of the DOFs.
    pub boundary_moments: DMatrix<f64>,
    /// Degrees of freedom to coefficients of the elliptic projection onto `P_r`.
    pub pi_star: DMatrix<f64>,
    /// Degrees of freedom to coefficients of the `L^2` projection onto `P_{r-2p1}`.
    pub pi0_low: DMatrix<f64>,
    /// Same onto `P_{r-p1}`; only present for the enhanced space.
    pub pi0_enh: Option<DMatrix<f64>>,
    area: f64,
    h: f64,
    perimeter: f64,
}

impl ElementOperators {
    pub fn new(ctx: &ElementContext<'_>) -> Result<Self> {
        let params = ctx.params;
        let p1 = params.p1;
        let basis = ctx.basis;
        let nr = basis.count();
        let ndofs = ctx.ndofs();
        let n_kernel = basis_count(p1 as i64 - 1);

        let weights = tensor_weights(p1);
        let mut g = DMatrix::zeros(nr, nr);
        let mut mass = DMatrix::zeros(nr, nr);
        for (x, w) in ctx.cell_quad.points.iter().zip(&ctx.cell_quad.weights) {
            let v = DVector::from_vec(basis.eval_all(*x));
            mass.ger(*w, &v, &v, 1.0);
            for (nu, c) in &weights {
                let dv = DVector::from_vec(basis.eval_all_derivative(*nu, *x));
                g.ger(w * c, &dv, &dv, 1.0);
            }
        }

        // volume part: (-1)^p1 int v Delta^p1 m_i, read from the cell moments
        let mut b = DMatrix::zeros(nr, ndofs);
        let sign = if p1.is_multiple_of(2) { 1.0 } else { -1.0 };
        let low = params.cell_moment_degree();
        if low >= 0 {
            for (i, m) in MultiIndex::up_to(params.r as i64).enumerate() {
                let lap = PolyCoeffs::monomial(basis, m).laplacian_power(p1);
                for beta in MultiIndex::up_to(low) {
                    let c = lap.coeff(beta);
                    if c != 0.0 {
                        b[(i, ctx.layout.cell_dof(beta))] += sign * c * ctx.h * ctx.h;
                    }
                }
            }
        }

        let terms = boundary_terms(p1);
        let mus: Vec<MultiIndex> = MultiIndex::up_to(p1 as i64 - 1).collect();
        let kernel_basis = basis.with_degree(p1 as i64 - 1);
        let mut boundary_gram = DMatrix::zeros(n_kernel, nr);
        let mut boundary_moments = DMatrix::zeros(n_kernel, ndofs);
        let mut perimeter = 0.0;
        for i in 0..ctx.num_edges() {
            let geo = &ctx.edges[i];
            perimeter += geo.length;
            let (t, n) = ctx.global_frame(i);
            let traces: Vec<DMatrix<f64>> = (0..p1).map(|j| trace_matrix(ctx, i, j)).collect::<Result<_>>()?;
            let alphas: Vec<usize> = traces.iter().map(|t| t.nrows() - 1).collect();
            let frames: Vec<Vec<(usize, usize, f64)>> = mus.iter().map(|mu| cartesian_in_frame(*mu, t, n)).collect();
            let q = &ctx.edge_quads[i];
            for ((s, x), w) in q.params.iter().zip(&q.points).zip(&q.weights) {
                // D^mu v at this point as a row over the DOFs
                let mut dv: Vec<DVector<f64>> = Vec::with_capacity(mus.len());
                for frame in &frames {
                    let mut row = DVector::zeros(ndofs);
                    for &(a, bn, c) in frame {
                        let l = DVector::from_vec(legendre_derivatives(alphas[bn], a, *s));
                        let scale = c * (2.0 / geo.length).powi(a as i32);
                        row.gemv_tr(scale, &traces[bn], &l, 1.0);
                    }
                    dv.push(row);
                }
                let mut wq: Vec<DVector<f64>> = vec![DVector::zeros(nr); mus.len()];
                for term in &terms {
                    let vals = basis.eval_all_derivative(term.qder, *x);
                    let f = term.coef * geo.normal[term.dir];
                    let target = &mut wq[term.mu.position()];
                    for (a, v) in target.iter_mut().zip(vals) {
                        *a += f * v;
                    }
                }
                for (wmu, row) in wq.iter().zip(&dv) {
                    b.ger(*w, wmu, row, 1.0);
                }
                let kv = DVector::from_vec(kernel_basis.eval_all(*x));
                let all = DVector::from_vec(basis.eval_all(*x));
                boundary_gram.ger(*w, &kv, &all, 1.0);
                boundary_moments.ger(*w, &kv, &dv[0], 1.0);
            }
        }

        let mut ops = ElementOperators {
            cell: ctx.cell,
            params,
            basis,
            d: dof_matrix(ctx, &basis),
            g,
            b,
            mass,
            boundary_gram,
            boundary_moments,
            pi_star: DMatrix::zeros(0, 0),
            pi0_low: DMatrix::zeros(0, 0),
            pi0_enh: None,
            area: ctx.area,
            h: ctx.h,
            perimeter,
        };
        ops.pi_star = ops.elliptic_projector(params.r)?;
        ops.pi0_low = ops.l2_projector_low(ctx)?;
        if params.enhanced {
            ops.pi0_enh = Some(ops.l2_projector_enhanced(ctx)?);
        }
        Ok(ops)
    }

    pub fn ndofs(&self) -> usize {
        self.d.nrows()
    }

    /// Elliptic projection onto `P_s`, `s <= r`: energy consistency against
    /// monomials of degree `p1..=s`, closed by boundary moments against
    /// `P_{min(s, p1-1)}`.
    pub fn elliptic_projector(&self, s: usize) -> Result<DMatrix<f64>> {
        assert!(s <= self.params.r, "projection degree above r");
        let p1 = self.params.p1;
        let ns = basis_count(s as i64);
        let nk = basis_count(s.min(p1 - 1) as i64);
        let first = basis_count(p1 as i64 - 1);
        let ndofs = self.ndofs();
        let mut lhs = DMatrix::zeros(ns, ns);
        let mut rhs = DMatrix::zeros(ns, ndofs);
        let closure = 1.0 / self.perimeter;
        for k in 0..nk {
            for j in 0..ns {
                lhs[(k, j)] = closure * self.boundary_gram[(k, j)];
            }
            for c in 0..ndofs {
                rhs[(k, c)] = closure * self.boundary_moments[(k, c)];
            }
        }
        let scale = self.h.powi(2 * p1 as i32) / self.area;
        for (row, i) in (nk..ns).zip(first..ns) {
            for j in 0..ns {
                lhs[(row, j)] = scale * self.g[(i, j)];
            }
            for c in 0..ndofs {
                rhs[(row, c)] = scale * self.b[(i, c)];
            }
        }
        lhs.lu()
            .solve(&rhs)
            .ok_or(VemError::SingularLocal { cell: self.cell, what: "elliptic projector" })
    }

    fn mass_solve(&self, n: usize, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if n == 0 {
            return Ok(DMatrix::zeros(0, rhs.ncols()));
        }
        self.mass
            .view((0, 0), (n, n))
            .clone_owned()
            .cholesky()
            .map(|c| c.solve(rhs))
            .ok_or(VemError::SingularLocal { cell: self.cell, what: "mass matrix" })
    }

    /// `L^2` projection onto `P_{r-2p1}` from the cell moments; empty when
    /// `r < 2 p1`.
    pub fn l2_projector_low(&self, ctx: &ElementContext<'_>) -> Result<DMatrix<f64>> {
        let n = self.params.cell_dofs();
        let mut moments = DMatrix::zeros(n, self.ndofs());
        for (k, beta) in MultiIndex::up_to(self.params.cell_moment_degree()).enumerate() {
            moments[(k, ctx.layout.cell_dof(beta))] = self.h * self.h;
        }
        self.mass_solve(n, &moments)
    }

    /// `L^2` projection onto `P_{r-p1}` in the enhanced space, where moments
    /// beyond degree `r - 2 p1` are those of the elliptic projection onto
    /// `P_{r-p1}`.
    pub fn l2_projector_enhanced(&self, ctx: &ElementContext<'_>) -> Result<DMatrix<f64>> {
        if !self.params.enhanced {
            return Err(VemError::NotEnhanced);
        }
        let e = self.params.enhanced_degree() as usize;
        let ne = basis_count(e as i64);
        let nlow = self.params.cell_dofs();
        let pi_e = self.elliptic_projector(e)?;
        let mut moments = DMatrix::zeros(ne, self.ndofs());
        for (k, beta) in MultiIndex::up_to(self.params.cell_moment_degree()).enumerate() {
            moments[(k, ctx.layout.cell_dof(beta))] = self.h * self.h;
        }
        let upper = self.mass.view((nlow, 0), (ne - nlow, ne)) * &pi_e;
        moments.view_mut((nlow, 0), (ne - nlow, self.ndofs())).copy_from(&upper);
        self.mass_solve(ne, &moments)
    }

    /// `a(v, q)` for a virtual function given by its DOFs and a polynomial
    /// of degree at most `r` in the cell frame.
    pub fn a_poly_vs_dofs(&self, q: &PolyCoeffs, dofs: &[f64]) -> Result<f64> {
        if q.basis.center != self.basis.center || q.basis.scale != self.basis.scale || q.degree() > self.basis.degree {
            return Err(VemError::IncompatibleFrames);
        }
        let q = q.with_degree(self.basis.degree);
        let v = DVector::from_column_slice(dofs);
        let c = DVector::from_column_slice(&q.coeffs);
        Ok(c.dot(&(&self.b * v)))
    }
}
