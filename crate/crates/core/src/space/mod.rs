//! The local and global virtual element spaces for `(p1, p2, r)`: edge
//! trace degrees, degree-of-freedom enumeration, dimension counts and the
//! global numbering.
//!
//! Local degrees of freedom, in layout order:
//!
//! * vertex values `h_V^{|nu|} D^nu v(V)`, `|nu| <= p2 - 1`, vertex-major;
//! * edge moments `h_E^{-1+j} \int_E P_k d_n^j v ds` against Legendre
//!   polynomials of the edge parameter, edge-major, then `j`, then `k`;
//! * cell moments `h_P^{-2} \int_P m_nu v`, `|nu| <= r - 2 p1`;
//! * in the extended layout only, the extra cell moments
//!   `r - 2 p1 < |nu| <= r - p1`.
//!
//! Edge moments are taken with respect to the global edge frame (tangent
//! from the lower to the higher vertex index, normal equal to the tangent
//! turned clockwise), so neighbouring cells share them without sign
//! changes.

mod element;
mod frame;
mod trace;

pub use element::{dof_matrix, dofs_of_function, dofs_of_polynomial, ElementContext};
pub use frame::{cartesian_in_frame, directional_expansion, edge_laplacian_expansion, vertex_frame_change};
pub use trace::{build_edge_trace, trace_matrix};

use crate::error::{Result, VemError};
use crate::mesh::Mesh;
use crate::polycalc::{basis_count, MultiIndex};

/// How the load term is approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadCase {
    /// `L^2` projection onto `P_{r-2p1}`, from cell moments alone.
    CellMoments,
    /// `L^2` projection onto `P_{r-p1}` through the enhanced space.
    Enhanced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceParams {
    pub p1: usize,
    pub p2: usize,
    pub r: usize,
    pub enhanced: bool,
}

impl SpaceParams {
    /// Validates `r >= p2 >= p1 >= 1`. The enhanced space is switched on
    /// whenever the load needs it.
    pub fn new(p1: usize, p2: usize, r: usize) -> Result<Self> {
        if p1 < 1 {
            return Err(VemError::InvalidParams(format!("p1 = {p1} must be at least 1")));
        }
        if p2 < p1 {
            return Err(VemError::InvalidParams(format!("p2 = {p2} must be at least p1 = {p1}")));
        }
        if r < p2 {
            return Err(VemError::InvalidParams(format!("r = {r} must be at least p2 = {p2}")));
        }
        let mut params = SpaceParams { p1, p2, r, enhanced: false };
        params.enhanced = params.load_case() == LoadCase::Enhanced;
        Ok(params)
    }

    pub fn with_enhanced(mut self, enhanced: bool) -> Result<Self> {
        if !enhanced && self.load_case() == LoadCase::Enhanced {
            return Err(VemError::InvalidParams(format!(
                "({},{},{}) needs the enhanced space for its load term",
                self.p1, self.p2, self.r
            )));
        }
        self.enhanced = enhanced;
        Ok(self)
    }

    pub fn load_case(&self) -> LoadCase {
        if self.p2 + 2 * self.p1 - 1 <= self.r {
            LoadCase::CellMoments
        } else {
            LoadCase::Enhanced
        }
    }

    /// Degree of the edge trace of `d_n^j v`: `max{2(p2-j)-1, r-j}`.
    pub fn alpha(&self, j: usize) -> Result<usize> {
        if j >= self.p2 {
            return Err(VemError::OrderOutOfRange { j, max: self.p2 });
        }
        Ok((2 * (self.p2 - j) - 1).max(self.r - j))
    }

    /// Number of edge moments of `d_n^j v`: `max(0, r - 2 p2 + j + 1)`.
    pub fn edge_moment_count(&self, j: usize) -> usize {
        (self.r + j + 1).saturating_sub(2 * self.p2)
    }

    /// Edge moments per edge over all normal orders.
    pub fn edge_dofs(&self) -> usize {
        (0..self.p2).map(|j| self.edge_moment_count(j)).sum()
    }

    pub fn vertex_dofs(&self) -> usize {
        self.p2 * (self.p2 + 1) / 2
    }

    /// Degree of the cell moments, `r - 2 p1` (possibly negative).
    pub fn cell_moment_degree(&self) -> i64 {
        self.r as i64 - 2 * self.p1 as i64
    }

    /// Degree `r - p1` of the enhanced `L^2` projection.
    pub fn enhanced_degree(&self) -> i64 {
        self.r as i64 - self.p1 as i64
    }

    pub fn cell_dofs(&self) -> usize {
        basis_count(self.cell_moment_degree())
    }

    pub fn extra_cell_dofs(&self) -> usize {
        basis_count(self.enhanced_degree()) - basis_count(self.cell_moment_degree())
    }

    /// Convergence order of the energy error, `r - (p1 - 1)`.
    pub fn expected_rate(&self) -> usize {
        self.r + 1 - self.p1
    }
}

impl std::fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p1, self.p2, self.r)
    }
}

/// Dimension of the local space on a polygon with `n_vertices` vertices
/// (and as many edges), from the closed-form count.
pub fn local_dim(params: &SpaceParams, n_vertices: usize) -> usize {
    let (p2, r) = (params.p2 as i64, params.r as i64);
    let nv = n_vertices as i64;
    let cell = basis_count(params.cell_moment_degree()) as i64;
    let edge_sum: i64 = if r >= 2 * p2 - 1 {
        p2 * (2 * r + 3 - p2) / 2
    } else {
        (0..params.p2).map(|j| params.alpha(j).expect("j < p2") as i64 + 1).sum()
    };
    let total = cell + nv * edge_sum - nv * (p2 + 1) * p2 / 2;
    total as usize
}

/// Dimension of the extended local space (before the enhancement
/// constraints).
pub fn extended_local_dim(params: &SpaceParams, n_vertices: usize) -> usize {
    local_dim(params, n_vertices) + params.extra_cell_dofs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DofDescriptor {
    /// `h_V^{|nu|} D^nu v(V)` at global vertex `vertex`.
    VertexDerivative { vertex: usize, nu: MultiIndex },
    /// `h_E^{-1+j} \int_E P_k d_n^j v` on global edge `edge`.
    EdgeMoment { edge: usize, j: usize, k: usize },
    /// `h_P^{-2} \int_P m_nu v`, `|nu| <= r - 2p1`.
    CellMoment { cell: usize, nu: MultiIndex },
    /// Extended-space moment, `r - 2p1 < |nu| <= r - p1`.
    CellMomentExtra { cell: usize, nu: MultiIndex },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DofCounts {
    pub vertex: usize,
    pub edge: usize,
    pub cell: usize,
    pub extra: usize,
}

impl DofCounts {
    pub fn total(&self) -> usize {
        self.vertex + self.edge + self.cell + self.extra
    }
}

#[derive(Clone, Debug)]
pub struct LocalDofLayout {
    pub params: SpaceParams,
    pub cell: usize,
    pub dofs: Vec<DofDescriptor>,
    pub counts: DofCounts,
    n_vertices: usize,
}

impl LocalDofLayout {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// Position of `D^nu` at local vertex `i`.
    pub fn vertex_dof(&self, i: usize, nu: MultiIndex) -> usize {
        i * self.params.vertex_dofs() + nu.position()
    }

    /// Position of moment `k` of `d_n^j` on local edge `i`.
    pub fn edge_dof(&self, i: usize, j: usize, k: usize) -> usize {
        let before: usize = (0..j).map(|jj| self.params.edge_moment_count(jj)).sum();
        self.counts.vertex + i * self.params.edge_dofs() + before + k
    }

    pub fn cell_dof(&self, nu: MultiIndex) -> usize {
        self.counts.vertex + self.counts.edge + nu.position()
    }

    pub fn num_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Range of the regular (non-extra) degrees of freedom.
    pub fn regular_len(&self) -> usize {
        self.counts.vertex + self.counts.edge + self.counts.cell
    }
}

/// Local degrees of freedom of `cell`.
pub fn enumerate_local(params: &SpaceParams, mesh: &Mesh, cell: usize) -> LocalDofLayout {
    build_layout(params, mesh, cell, false)
}

/// Local degrees of freedom of the extended space, which adds the extra
/// cell moments up to degree `r - p1`.
pub fn enumerate_extended(params: &SpaceParams, mesh: &Mesh, cell: usize) -> LocalDofLayout {
    build_layout(params, mesh, cell, true)
}

fn build_layout(params: &SpaceParams, mesh: &Mesh, cell: usize, extended: bool) -> LocalDofLayout {
    let c = mesh.cell(cell);
    let mut dofs = Vec::new();
    let mut counts = DofCounts::default();
    let vertex_orders = params.p2 as i64 - 1;
    for &vertex in &c.vertices {
        for nu in MultiIndex::up_to(vertex_orders) {
            dofs.push(DofDescriptor::VertexDerivative { vertex, nu });
            counts.vertex += 1;
        }
    }
    for &edge in &c.edges {
        for j in 0..params.p2 {
            for k in 0..params.edge_moment_count(j) {
                dofs.push(DofDescriptor::EdgeMoment { edge, j, k });
                counts.edge += 1;
            }
        }
    }
    for nu in MultiIndex::up_to(params.cell_moment_degree()) {
        dofs.push(DofDescriptor::CellMoment { cell, nu });
        counts.cell += 1;
    }
    if extended {
        let lo = (params.cell_moment_degree() + 1).max(0) as usize;
        for nu in MultiIndex::range(lo, params.enhanced_degree()) {
            dofs.push(DofDescriptor::CellMomentExtra { cell, nu });
            counts.extra += 1;
        }
    }
    LocalDofLayout { params: *params, cell, dofs, counts, n_vertices: c.vertices.len() }
}

/// Global numbering: all vertex values, then all edge moments, then all cell
/// moments.
#[derive(Clone, Debug)]
pub struct GlobalDofMap {
    pub params: SpaceParams,
    edge_offset: usize,
    cell_offset: usize,
    total: usize,
    local_to_global: Vec<Vec<usize>>,
    boundary_vertices: Vec<usize>,
    boundary_edges: Vec<usize>,
}

impl GlobalDofMap {
    pub fn new(mesh: &Mesh, params: &SpaceParams) -> Self {
        let edge_offset = mesh.num_vertices() * params.vertex_dofs();
        let cell_offset = edge_offset + mesh.num_edges() * params.edge_dofs();
        let total = cell_offset + mesh.num_cells() * params.cell_dofs();
        let mut map = GlobalDofMap {
            params: *params,
            edge_offset,
            cell_offset,
            total,
            local_to_global: Vec::with_capacity(mesh.num_cells()),
            boundary_vertices: Vec::new(),
            boundary_edges: mesh.boundary_edges().collect(),
        };
        for c in 0..mesh.num_cells() {
            let layout = enumerate_local(params, mesh, c);
            let l2g = layout.dofs.iter().map(|d| map.index(d).expect("regular dof")).collect();
            map.local_to_global.push(l2g);
        }
        let mut bv: Vec<usize> = map
            .boundary_edges
            .iter()
            .flat_map(|&e| mesh.edge(e).vertices)
            .collect();
        bv.sort_unstable();
        bv.dedup();
        map.boundary_vertices = bv;
        map
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn index(&self, d: &DofDescriptor) -> Option<usize> {
        let p = &self.params;
        match *d {
            DofDescriptor::VertexDerivative { vertex, nu } => Some(vertex * p.vertex_dofs() + nu.position()),
            DofDescriptor::EdgeMoment { edge, j, k } => {
                let before: usize = (0..j).map(|jj| p.edge_moment_count(jj)).sum();
                Some(self.edge_offset + edge * p.edge_dofs() + before + k)
            }
            DofDescriptor::CellMoment { cell, nu } => Some(self.cell_offset + cell * p.cell_dofs() + nu.position()),
            DofDescriptor::CellMomentExtra { .. } => None,
        }
    }

    pub fn local_to_global(&self, cell: usize) -> &[usize] {
        &self.local_to_global[cell]
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn num_vertex_dofs(&self) -> usize {
        self.edge_offset
    }

    pub fn num_edge_dofs(&self) -> usize {
        self.cell_offset - self.edge_offset
    }

    pub fn num_cell_dofs(&self) -> usize {
        self.total - self.cell_offset
    }
}
