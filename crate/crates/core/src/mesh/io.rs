//! Line-oriented text format:
//!
//! ```text
//! vem-mesh 1
//! vertices N
//! x y            (N lines)
//! cells M
//! k i1 ... ik    (M lines, 0-based, counterclockwise)
//! ```
//!
//! A cell line may be followed by `star x y`, the apex used to fan-triangulate
//! that cell. Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;

use super::{Mesh, Point};
use crate::error::{Result, VemError};

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self { inner: it.peekable() }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner.next().ok_or_else(|| VemError::Parse {
            line: 0,
            message: format!("unexpected end of input, expected {what}"),
        })
    }

    fn peek(&mut self) -> Option<&(usize, &'a str)> {
        self.inner.peek()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> VemError {
    VemError::Parse { line, message: message.into() }
}

fn header_count(line: usize, text: &str, keyword: &str) -> Result<usize> {
    let mut parts = text.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(parse_err(line, format!("expected `{keyword} <count>`")));
    }
    let n = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(line, format!("bad {keyword} count")))?;
    if parts.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    Ok(n)
}

fn parse_point(line: usize, mut parts: std::str::SplitWhitespace<'_>) -> Result<Point> {
    let mut coord = || -> Result<f64> {
        parts
            .next()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(line, "expected two finite coordinates"))
    };
    let p = [coord()?, coord()?];
    if parts.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    Ok(p)
}

pub fn load(text: &str) -> Result<Mesh> {
    let mut lines = Lines::new(text);
    let (ln, magic) = lines.next("header")?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["vem-mesh", "1"] {
        return Err(parse_err(ln, "expected header `vem-mesh 1`"));
    }
    let (ln, l) = lines.next("vertices header")?;
    let nv = header_count(ln, l, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next("vertex line")?;
        vertices.push(parse_point(ln, l.split_whitespace())?);
    }
    let (ln, l) = lines.next("cells header")?;
    let nc = header_count(ln, l, "cells")?;
    let mut cells = Vec::with_capacity(nc);
    let mut stars = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines.next("cell line")?;
        let nums: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| parse_err(ln, format!("bad integer `{s}`"))))
            .collect::<Result<_>>()?;
        let (&k, idx) = nums.split_first().ok_or_else(|| parse_err(ln, "empty cell line"))?;
        if idx.len() != k {
            return Err(parse_err(ln, format!("cell declares {k} vertices but lists {}", idx.len())));
        }
        cells.push(idx.to_vec());
        let star = match lines.peek() {
            Some((ln, l)) if l.starts_with("star") => {
                let (ln, l) = (*ln, *l);
                lines.next("star")?;
                let mut parts = l.split_whitespace();
                parts.next();
                Some(parse_point(ln, parts)?)
            }
            _ => None,
        };
        stars.push(star);
    }
    if let Some((ln, _)) = lines.peek() {
        return Err(parse_err(*ln, "trailing content after cells"));
    }
    Mesh::with_stars(vertices, cells, stars)
}

/// Renders a mesh; coordinates use the shortest decimal form that reads back
/// to the same `f64`.
pub fn save(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("vem-mesh 1\n");
    let _ = writeln!(s, "vertices {}", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
    }
    let _ = writeln!(s, "cells {}", mesh.num_cells());
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.vertices.len());
        for v in &c.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
        if let Some(p) = c.star {
            let _ = writeln!(s, "star {:?} {:?}", p[0], p[1]);
        }
    }
    s
}
