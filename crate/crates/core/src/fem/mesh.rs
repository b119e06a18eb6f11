//! Concentric-ring triangulation of the unit disk.
//!
//! Ring `k = 1..=K` holds `6k` equally spaced nodes at radius `k/K`, with
//! `K = ceil(1/h)`; node 0 is the center. Neighbouring rings are joined by
//! merging their nodes in angular order. The mesh has `1 + 3K(K+1)` nodes
//! and `6K^2` triangles.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Requested mesh width.
    pub h: f64,
    pub rings: usize,
}

pub fn build_disk_mesh(h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::invalid(format!(
            "mesh width must lie in (0,1), got {h}"
        )));
    }
    let rings = (1.0 / h - 1e-9).ceil() as usize;
    let mut nodes = vec![[0.0, 0.0]];
    let mut boundary = vec![false];
    let mut ring_start = vec![0usize];
    for k in 1..=rings {
        ring_start.push(nodes.len());
        let count = 6 * k;
        let radius = k as f64 / rings as f64;
        for i in 0..count {
            let t = 2.0 * PI * i as f64 / count as f64;
            let (s, c) = t.sin_cos();
            if k == rings {
                nodes.push([c, s]);
            } else {
                nodes.push([radius * c, radius * s]);
            }
            boundary.push(k == rings);
        }
    }

    let mut triangles = Vec::with_capacity(6 * rings * rings);
    let outer = |k: usize, i: usize| ring_start[k] + i % (6 * k);
    for i in 0..6 {
        triangles.push([0, outer(1, i), outer(1, i + 1)]);
    }
    for k in 2..=rings {
        let n_in = 6 * (k - 1);
        let n_out = 6 * k;
        let inner = |i: usize| ring_start[k - 1] + i % n_in;
        let (mut i, mut j) = (0, 0);
        while i < n_in || j < n_out {
            // compare angles (i+1)/n_in and (j+1)/n_out exactly
            let advance_outer = i == n_in || (j < n_out && (j + 1) * n_in <= (i + 1) * n_out);
            if advance_outer {
                triangles.push([inner(i), outer(k, j), outer(k, j + 1)]);
                j += 1;
            } else {
                triangles.push([inner(i), outer(k, j), inner(i + 1)]);
                i += 1;
            }
        }
    }

    let mesh = Mesh {
        nodes,
        triangles,
        boundary,
        h,
        rings,
    };
    debug_assert!(mesh.triangles.iter().all(|t| mesh.signed_area(t) > 0.0));
    Ok(mesh)
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.signed_area(t)).sum()
    }

    pub fn centroid(&self, t: &[usize; 3]) -> [f64; 2] {
        let [a, b, c] = t.map(|i| self.nodes[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn centroids(&self) -> Vec<[f64; 2]> {
        self.triangles.iter().map(|t| self.centroid(t)).collect()
    }

    /// Longest edge over all triangles.
    pub fn max_edge(&self) -> f64 {
        let len = |a: usize, b: usize| {
            let (p, q) = (self.nodes[a], self.nodes[b]);
            (p[0] - q[0]).hypot(p[1] - q[1])
        };
        self.triangles
            .iter()
            .map(|t| len(t[0], t[1]).max(len(t[1], t[2])).max(len(t[2], t[0])))
            .fold(0.0, f64::max)
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&i| self.boundary[i])
            .collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&i| !self.boundary[i])
            .collect()
    }

    /// Plain-text export: `# nodes N`, `x y` lines, `# triangles M`,
    /// `i j k` lines with 0-based indices.
    pub fn to_text(&self) -> String {
        let mut out = format!("# nodes {}\n", self.num_nodes());
        for p in &self.nodes {
            let _ = writeln!(out, "{:e} {:e}", p[0], p[1]);
        }
        let _ = writeln!(out, "# triangles {}", self.num_triangles());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_mesh_is_valid() {
        let m = build_disk_mesh(0.5).unwrap();
        assert_eq!(m.rings, 2);
        assert_eq!(m.num_nodes(), 19);
        assert_eq!(m.num_triangles(), 24);
        assert!(m.triangles.iter().all(|t| m.signed_area(t) > 0.0));
    }

    #[test]
    fn node_counts() {
        assert_eq!(build_disk_mesh(0.1).unwrap().num_nodes(), 331);
        assert_eq!(build_disk_mesh(0.2).unwrap().num_nodes(), 91);
        assert_eq!(build_disk_mesh(0.05).unwrap().num_nodes(), 1261);
        assert_eq!(build_disk_mesh(0.4).unwrap().rings, 3);
    }

    #[test]
    fn boundary_on_unit_circle() {
        let m = build_disk_mesh(0.1).unwrap();
        for i in m.boundary_nodes() {
            let [x, y] = m.nodes[i];
            assert!((x.hypot(y) - 1.0).abs() < 1e-12);
        }
        assert_eq!(m.boundary_nodes().len(), 60);
        assert!(m.interior_nodes().len() >= 1);
    }

    #[test]
    fn every_edge_is_shared_correctly() {
        use std::collections::HashMap;
        let m = build_disk_mesh(0.2).unwrap();
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for t in &m.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *edges.entry((a, b)).or_default() += 1;
            }
        }
        for (&(a, b), &c) in &edges {
            assert_eq!(c, 1, "directed edge repeated");
            let twin = edges.contains_key(&(b, a));
            assert_eq!(twin, !(m.boundary[a] && m.boundary[b]), "edge {a}-{b}");
        }
    }

    #[test]
    fn area_converges_to_pi() {
        let a = build_disk_mesh(0.05).unwrap().area();
        assert!(a < PI);
        assert!(PI - a < 0.01);
        assert!(build_disk_mesh(0.1).unwrap().area() < a);
    }

    #[test]
    fn centroids_avoid_origin() {
        let m = build_disk_mesh(0.3).unwrap();
        assert!(m.centroids().iter().all(|c| c[0].hypot(c[1]) > 0.0));
    }

    #[test]
    fn deterministic_export() {
        let a = build_disk_mesh(0.25).unwrap().to_text();
        let b = build_disk_mesh(0.25).unwrap().to_text();
        assert_eq!(a, b);
        assert!(a.starts_with("# nodes 61\n"));
        assert!(a.contains("# triangles 96\n"));
    }
}
