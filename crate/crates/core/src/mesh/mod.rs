//! Polygonal meshes: connectivity, geometric quantities and validation.

mod generate;
mod io;

pub use generate::{generate, random_polygon, MeshFamily};
pub use io::{load, save};

use std::collections::HashMap;

use crate::error::{Result, VemError};

pub type Point = [f64; 2];

#[derive(Clone, Debug)]
pub struct Cell {
    /// Counterclockwise vertex cycle.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub edges: Vec<usize>,
    /// Optional apex for the quadrature fan of nonconvex cells.
    pub star: Option<Point>,
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
}

impl Cell {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn fan_apex(&self) -> Point {
        self.star.unwrap_or(self.centroid)
    }
}

/// Undirected edge; its global orientation runs from the lower vertex index
/// to the higher one.
#[derive(Clone, Debug)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub cells: Vec<usize>,
    pub length: f64,
    pub midpoint: Point,
    /// Unit tangent from `vertices[0]` to `vertices[1]`.
    pub tangent: Point,
    /// Tangent rotated clockwise.
    pub normal: Point,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }

    /// Point at parameter `s in [-1, 1]` along the global orientation.
    pub fn point_at(&self, s: f64) -> Point {
        let half = 0.5 * self.length * s;
        [
            self.midpoint[0] + half * self.tangent[0],
            self.midpoint[1] + half * self.tangent[1],
        ]
    }
}

/// Frame of one edge as seen from a cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGeometry {
    pub edge: usize,
    /// Outward unit normal with respect to the cell.
    pub normal: Point,
    /// Counterclockwise rotation of `normal`.
    pub tangent: Point,
    pub length: f64,
    /// +1 when the cell traverses the edge along its global orientation.
    pub orientation: f64,
}

#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
    pub edges: Vec<EdgeGeometry>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    vertex_h: Vec<f64>,
}

impl Mesh {
    /// Builds and validates a mesh from vertex coordinates and
    /// counterclockwise cell cycles.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let stars = vec![None; cells.len()];
        Self::with_stars(vertices, cells, stars)
    }

    pub fn with_stars(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        stars: Vec<Option<Point>>,
    ) -> Result<Self> {
        let mut out_cells = Vec::with_capacity(cells.len());
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        // directed uses per undirected edge, to detect inconsistent orientation
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();

        for (c, (cycle, star)) in cells.into_iter().zip(stars).enumerate() {
            validate_cycle(c, &cycle, &vertices)?;
            let n = cycle.len();
            let mut cell_edges = Vec::with_capacity(n);
            for i in 0..n {
                let a = cycle[i];
                let b = cycle[(i + 1) % n];
                if let Some(prev) = directed.insert((a, b), c) {
                    return Err(VemError::InvalidCell {
                        cell: c,
                        message: format!(
                            "edge {a}->{b} is traversed in the same direction by cell {prev}"
                        ),
                    });
                }
                let key = (a.min(b), a.max(b));
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(make_edge(key, &vertices));
                    edges.len() - 1
                });
                if edges[id].cells.len() == 2 {
                    return Err(VemError::InvalidCell {
                        cell: c,
                        message: format!("edge {}-{} is shared by more than two cells", key.0, key.1),
                    });
                }
                edges[id].cells.push(c);
                cell_edges.push(id);
            }
            let pts: Vec<Point> = cycle.iter().map(|&v| vertices[v]).collect();
            let (area, centroid) = area_centroid(&pts);
            out_cells.push(Cell {
                diameter: diameter(&pts),
                vertices: cycle,
                edges: cell_edges,
                star,
                area,
                centroid,
            });
        }

        let mut sum = vec![0.0; vertices.len()];
        let mut count = vec![0usize; vertices.len()];
        for cell in &out_cells {
            for &v in &cell.vertices {
                sum[v] += cell.diameter;
                count[v] += 1;
            }
        }
        if let Some(v) = count.iter().position(|&k| k == 0) {
            return Err(VemError::InvalidMesh(format!("vertex {v} belongs to no cell")));
        }
        let vertex_h = sum.iter().zip(&count).map(|(s, &k)| s / k as f64).collect();

        let mesh = Mesh { vertices, cells: out_cells, edges, vertex_h };
        mesh.check_hanging_nodes()?;
        Ok(mesh)
    }

    fn check_hanging_nodes(&self) -> Result<()> {
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            let [a, b] = e.vertices.map(|v| self.vertices[v]);
            let (lo_x, hi_x) = (a[0].min(b[0]), a[0].max(b[0]));
            let (lo_y, hi_y) = (a[1].min(b[1]), a[1].max(b[1]));
            let tol = 1e-12 * e.length;
            for (v, p) in self.vertices.iter().enumerate() {
                if e.vertices.contains(&v)
                    || p[0] < lo_x - tol
                    || p[0] > hi_x + tol
                    || p[1] < lo_y - tol
                    || p[1] > hi_y + tol
                {
                    continue;
                }
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                if cross.abs() <= tol * e.length {
                    return Err(VemError::InvalidMesh(format!(
                        "non-conforming: vertex {v} lies inside edge {}-{} of cell {}",
                        e.vertices[0], e.vertices[1], e.cells[0]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Characteristic length of a vertex: mean diameter of its cells.
    pub fn vertex_h(&self, v: usize) -> f64 {
        self.vertex_h[v]
    }

    /// Mesh size, the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_boundary()).map(|(i, _)| i)
    }

    /// Sign of the traversal of local edge `i` of `cell` relative to the
    /// global edge orientation.
    pub fn edge_orientation(&self, cell: usize, i: usize) -> f64 {
        let c = &self.cells[cell];
        let a = c.vertices[i];
        let b = c.vertices[(i + 1) % c.vertices.len()];
        if a < b {
            1.0
        } else {
            -1.0
        }
    }

    pub fn edge_geometry(&self, cell: usize, i: usize) -> EdgeGeometry {
        let e = &self.edges[self.cells[cell].edges[i]];
        let sigma = self.edge_orientation(cell, i);
        EdgeGeometry {
            edge: self.cells[cell].edges[i],
            normal: [sigma * e.normal[0], sigma * e.normal[1]],
            tangent: [sigma * e.tangent[0], sigma * e.tangent[1]],
            length: e.length,
            orientation: sigma,
        }
    }

    pub fn geometry(&self, cell: usize) -> CellGeometry {
        let c = &self.cells[cell];
        CellGeometry {
            area: c.area,
            centroid: c.centroid,
            diameter: c.diameter,
            edges: (0..c.vertices.len()).map(|i| self.edge_geometry(cell, i)).collect(),
        }
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }
}

fn make_edge(key: (usize, usize), vertices: &[Point]) -> Edge {
    let a = vertices[key.0];
    let b = vertices[key.1];
    let d = [b[0] - a[0], b[1] - a[1]];
    let length = d[0].hypot(d[1]);
    let tangent = [d[0] / length, d[1] / length];
    Edge {
        vertices: [key.0, key.1],
        cells: Vec::with_capacity(2),
        length,
        midpoint: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
        tangent,
        normal: [tangent[1], -tangent[0]],
    }
}

fn validate_cycle(c: usize, cycle: &[usize], vertices: &[Point]) -> Result<()> {
    let bad = |message: String| VemError::InvalidCell { cell: c, message };
    if cycle.len() < 3 {
        return Err(bad(format!("has {} vertices, need at least 3", cycle.len())));
    }
    for (i, &v) in cycle.iter().enumerate() {
        if v >= vertices.len() {
            return Err(bad(format!("vertex index {v} out of range")));
        }
        if cycle[..i].contains(&v) {
            return Err(bad(format!("duplicate vertex {v}")));
        }
    }
    let pts: Vec<Point> = cycle.iter().map(|&v| vertices[v]).collect();
    let area = signed_area(&pts);
    if area <= 0.0 {
        return Err(bad(if area < 0.0 {
            "vertices are listed clockwise".to_string()
        } else {
            "zero area".to_string()
        }));
    }
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return Err(bad(format!("self-intersecting boundary (edges {i} and {j})")));
            }
        }
    }
    Ok(())
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0 && !(d1 == 0.0 && d2 == 0.0 && !bbox_overlap(p1, p2, q1, q2))
}

fn bbox_overlap(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    p1[0].min(p2[0]) <= q1[0].max(q2[0])
        && q1[0].min(q2[0]) <= p1[0].max(p2[0])
        && p1[1].min(p2[1]) <= q1[1].max(q2[1])
        && q1[1].min(q2[1]) <= p1[1].max(p2[1])
}

pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

/// Shoelace area and area-weighted centroid.
pub fn area_centroid(pts: &[Point]) -> (f64, Point) {
    let n = pts.len();
    // shift to the first vertex to limit cancellation
    let o = pts[0];
    let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = [pts[i][0] - o[0], pts[i][1] - o[1]];
        let q = [pts[(i + 1) % n][0] - o[0], pts[(i + 1) % n][1] - o[1]];
        let cross = p[0] * q[1] - q[0] * p[1];
        a2 += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    let area = 0.5 * a2;
    (area, [o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)])
}

pub fn diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_geometry() {
        let m = unit_square();
        let g = m.geometry(0);
        assert_relative_eq!(g.area, 1.0);
        assert_relative_eq!(g.diameter, 2f64.sqrt());
        assert_relative_eq!(g.centroid[0], 0.5);
        assert_relative_eq!(g.centroid[1], 0.5);
        // edge y = 0
        assert_eq!(g.edges[0].normal, [0.0, -1.0]);
        assert_eq!(g.edges[0].tangent, [1.0, 0.0]);
        for e in &g.edges {
            // tangent is the counterclockwise rotation of the normal
            assert_eq!(e.tangent, [-e.normal[1], e.normal[0]]);
        }
    }

    #[test]
    fn regular_hexagon_area() {
        let pts: Vec<Point> = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI / 3.0 * k as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let m = Mesh::new(pts, vec![(0..6).collect()]).unwrap();
        assert_relative_eq!(m.cell(0).area, 3.0 * 3f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(m.cell(0).centroid[0], 0.0, epsilon = 1e-14);
    }

    /// L-shaped hexagon = [0,2]x[0,1] plus [0,1]x[1,2].
    #[test]
    fn l_shape_area_matches_rectangles() {
        let pts = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let m = Mesh::new(pts, vec![(0..6).collect()]).unwrap();
        let rect_sum = 2.0 * 1.0 + 1.0 * 1.0;
        assert_relative_eq!(m.cell(0).area, rect_sum, epsilon = 1e-14);
        // centroid from the two rectangles
        let cx = (2.0 * 1.0 + 1.0 * 0.5) / 3.0;
        let cy = (2.0 * 0.5 + 1.0 * 1.5) / 3.0;
        assert_relative_eq!(m.cell(0).centroid[0], cx, epsilon = 1e-14);
        assert_relative_eq!(m.cell(0).centroid[1], cy, epsilon = 1e-14);
    }

    #[test]
    fn two_triangles() {
        let m = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap();
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.edges().iter().filter(|e| !e.is_boundary()).count(), 1);
        // opposite outward normals on the diagonal
        let diag = m.edges().iter().position(|e| !e.is_boundary()).unwrap();
        let i0 = m.cell(0).edges.iter().position(|&e| e == diag).unwrap();
        let i1 = m.cell(1).edges.iter().position(|&e| e == diag).unwrap();
        let n0 = m.edge_geometry(0, i0).normal;
        let n1 = m.edge_geometry(1, i1).normal;
        assert_eq!(n0, [-n1[0], -n1[1]]);
    }

    #[test]
    fn rejects_clockwise_and_duplicates() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let err = Mesh::new(pts.clone(), vec![vec![0, 3, 2, 1]]).unwrap_err();
        assert!(matches!(err, VemError::InvalidCell { cell: 0, .. }));
        assert!(err.to_string().contains("clockwise"));
        let err = Mesh::new(pts.clone(), vec![vec![0, 1, 2, 1, 3]]).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        // bow tie
        let err = Mesh::new(pts, vec![vec![0, 1, 3, 2]]).unwrap_err();
        assert!(matches!(err, VemError::InvalidCell { .. }));
    }

    #[test]
    fn rejects_hanging_node() {
        let pts = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [1.0, 0.5],
        ];
        // left square sees the hanging vertex 6, right square does not
        let cells = vec![vec![0, 1, 6, 4, 5], vec![1, 2, 3, 4]];
        let err = Mesh::new(pts, cells).unwrap_err();
        assert!(err.to_string().contains("non-conforming"), "{err}");
    }

    #[test]
    fn vertex_h_is_mean_diameter() {
        let m = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [3.0, 1.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4]],
        )
        .unwrap();
        let d0 = 2f64.sqrt();
        let d1 = 5f64.sqrt();
        assert_relative_eq!(m.vertex_h(0), d0);
        assert_relative_eq!(m.vertex_h(1), 0.5 * (d0 + d1));
    }
}
