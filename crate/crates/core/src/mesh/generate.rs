//! Mesh families on the unit square for convergence studies.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mesh, Point};
use crate::error::{Result, VemError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFamily {
    /// `2^L x 2^L` squares.
    SquareGrid,
    /// Square grid with interior vertices moved randomly by up to 30% of
    /// the grid spacing.
    PerturbedQuads,
    /// Staggered rows of convex hexagons, closed by quads and pentagons
    /// along the boundary.
    HexDominant,
}

impl MeshFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::SquareGrid => "square-grid",
            MeshFamily::PerturbedQuads => "perturbed-quads",
            MeshFamily::HexDominant => "hex-dominant",
        }
    }
}

impl FromStr for MeshFamily {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square-grid" | "square" => Ok(MeshFamily::SquareGrid),
            "perturbed-quads" | "perturbed" => Ok(MeshFamily::PerturbedQuads),
            "hex-dominant" | "hex" => Ok(MeshFamily::HexDominant),
            other => Err(VemError::UnknownFamily(other.to_string())),
        }
    }
}

pub fn generate(family: MeshFamily, level: u32, seed: u64) -> Result<Mesh> {
    if level > 10 {
        return Err(VemError::InvalidMesh(format!("refinement level {level} is too large")));
    }
    let n = 1usize << level;
    match family {
        MeshFamily::SquareGrid => square_grid(n, None),
        MeshFamily::PerturbedQuads => square_grid(n, Some(seed)),
        MeshFamily::HexDominant => hex_dominant(n),
    }
}

fn square_grid(n: usize, perturb: Option<u64>) -> Result<Mesh> {
    let h = 1.0 / n as f64;
    let mut rng = perturb.map(ChaCha8Rng::seed_from_u64);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut p = [i as f64 * h, j as f64 * h];
            if let Some(rng) = rng.as_mut() {
                if i > 0 && i < n && j > 0 && j < n {
                    // uniform in a disk of radius 0.3 h
                    let r = 0.3 * h * rng.random::<f64>().sqrt();
                    let t = std::f64::consts::TAU * rng.random::<f64>();
                    p[0] += r * t.cos();
                    p[1] += r * t.sin();
                }
            }
            vertices.push(p);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let cells = (0..n)
        .flat_map(|j| (0..n).map(move |i| vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
        .collect();
    Mesh::new(vertices, cells)
}

/// A single convex cell with `n` vertices on a random ellipse, angular gaps
/// bounded below so no two vertices crowd together.
pub fn random_polygon(n: usize, seed: u64) -> Result<Mesh> {
    if n < 3 {
        return Err(VemError::InvalidMesh(format!("a polygon needs at least 3 vertices, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_gap = 0.4 * std::f64::consts::TAU / n as f64;
    let slack = std::f64::consts::TAU - min_gap * n as f64;
    let mut gaps: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let total: f64 = gaps.iter().sum();
    for g in &mut gaps {
        *g = min_gap + slack * *g / total;
    }
    let (a, b) = (0.5 + rng.random::<f64>(), 0.5 + rng.random::<f64>());
    let (rot, cx, cy) = (std::f64::consts::TAU * rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
    let scale = 0.05 + rng.random::<f64>();
    let mut theta = 0.0;
    let vertices = gaps
        .iter()
        .map(|g| {
            theta += g;
            let (x, y) = (a * theta.cos(), b * theta.sin());
            [cx + scale * (x * rot.cos() - y * rot.sin()), cy + scale * (x * rot.sin() + y * rot.cos())]
        })
        .collect();
    Mesh::new(vertices, vec![(0..n).collect()])
}

/// Brick rows of height `1/n`, alternate rows shifted by half a brick; the
/// vertices on every interior row line zig-zag up and down so that each
/// interior brick becomes a convex hexagon.
fn hex_dominant(n: usize) -> Result<Mesh> {
    let h = 1.0 / n as f64;
    let delta = 0.2 * h;
    // brick breakpoints of row j, in units of h/2
    let breaks = |j: usize| -> Vec<usize> {
        let mut b: Vec<usize> = if j.is_multiple_of(2) {
            (0..=n).map(|k| 2 * k).collect()
        } else {
            let mut b = vec![0];
            b.extend((0..n).map(|k| 2 * k + 1));
            b.push(2 * n);
            b
        };
        b.dedup();
        b
    };

    let mut vertices: Vec<Point> = Vec::new();
    // per line j: half-unit x position -> vertex id
    let mut lines: Vec<BTreeMap<usize, usize>> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let below: Vec<usize> = if j > 0 { breaks(j - 1) } else { Vec::new() };
        let above: Vec<usize> = if j < n { breaks(j) } else { Vec::new() };
        let mut xs: Vec<usize> = below.iter().chain(&above).copied().collect();
        xs.sort_unstable();
        xs.dedup();
        let mut map = BTreeMap::new();
        for x in xs {
            let mut y = j as f64 * h;
            let boundary = j == 0 || j == n || x == 0 || x == 2 * n;
            if !boundary {
                let in_above = above.contains(&x);
                let in_below = below.contains(&x);
                if in_above && !in_below {
                    y += delta;
                } else if in_below && !in_above {
                    y -= delta;
                }
            }
            vertices.push([x as f64 * 0.5 * h, y]);
            map.insert(x, vertices.len() - 1);
        }
        lines.push(map);
    }

    let mut cells = Vec::new();
    for j in 0..n {
        let b = breaks(j);
        for w in b.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut cycle: Vec<usize> = lines[j].range(lo..=hi).map(|(_, &v)| v).collect();
            cycle.extend(lines[j + 1].range(lo..=hi).rev().map(|(_, &v)| v));
            cells.push(cycle);
        }
    }
    Mesh::new(vertices, cells)
}
