//! Conforming triangulations with oriented edges.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// An edge with its global orientation.
///
/// The global normal points out of `triangles[0]` (the lower-indexed incident
/// triangle) and, on the boundary, out of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub triangles: [usize; 2],
    pub boundary: bool,
    pub length: f64,
    pub midpoint: Point,
    pub normal: Point,
}

impl Edge {
    pub fn neighbour(&self) -> Option<usize> {
        (!self.boundary).then_some(self.triangles[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    pub area: f64,
    pub centroid: Point,
    /// Length of local edge `k`, the edge opposite local vertex `k`.
    pub edge_lengths: [f64; 3],
    pub outward_normals: [Point; 3],
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    tri_signs: Vec<[f64; 3]>,
    geometry: Vec<TriangleGeometry>,
}

impl TriMesh {
    /// Structured mesh of the unit square: `n x n` squares, each cut along the
    /// lower-left to upper-right diagonal.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("mesh divisions must be positive".into()));
        }
        let nv = n + 1;
        let vertices = (0..nv)
            .flat_map(|j| (0..nv).map(move |i| [i as f64 / n as f64, j as f64 / n as f64]))
            .collect();
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * nv + i;
                let v10 = v00 + 1;
                let v01 = v00 + nv;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::from_triangles(vertices, triangles)
    }

    /// Builds connectivity for an arbitrary conforming triangulation with
    /// counterclockwise triangles.
    pub fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut geometry = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::IndexOutOfRange {
                    index: v,
                    len: vertices.len(),
                });
            }
            let g = triangle_geometry(tri.map(|v| vertices[v]));
            if !(g.area > 0.0) {
                return Err(Error::Domain(format!(
                    "triangle {t} is not counterclockwise (area {})",
                    g.area
                )));
            }
            geometry.push(g);
        }

        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut incidence: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut tri_edges = vec![[0; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *index.entry(key).or_insert_with(|| {
                    incidence.push(Vec::new());
                    incidence.len() - 1
                });
                incidence[e].push((t, k));
                tri_edges[t][k] = e;
            }
        }

        let mut edges = Vec::with_capacity(incidence.len());
        let mut tri_signs = vec![[0.0; 3]; triangles.len()];
        for (e, inc) in incidence.iter().enumerate() {
            let (t0, k0) = match inc.as_slice() {
                [only] => *only,
                [x, y] => {
                    if x.0 < y.0 {
                        *x
                    } else {
                        *y
                    }
                }
                _ => {
                    return Err(Error::Domain(format!(
                        "edge {e} is shared by {} triangles",
                        inc.len()
                    )))
                }
            };
            let boundary = inc.len() == 1;
            let t1 = inc.iter().map(|&(t, _)| t).find(|&t| t != t0).unwrap_or(t0);
            for &(t, k) in inc {
                tri_signs[t][k] = if t == t0 { 1.0 } else { -1.0 };
            }
            let tri = triangles[t0];
            let (a, b) = (tri[(k0 + 1) % 3], tri[(k0 + 2) % 3]);
            let (pa, pb) = (vertices[a], vertices[b]);
            edges.push(Edge {
                vertices: [a, b],
                triangles: [t0, t1],
                boundary,
                length: geometry[t0].edge_lengths[k0],
                midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                normal: geometry[t0].outward_normals[k0],
            });
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            tri_signs,
            geometry,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Global edge index of local edge `k` (opposite local vertex `k`).
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// +1 where the triangle's outward normal agrees with the edge's global normal.
    pub fn triangle_signs(&self, t: usize) -> [f64; 3] {
        self.tri_signs[t]
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn geometry(&self, t: usize) -> Result<&TriangleGeometry> {
        self.geometry.get(t).ok_or(Error::IndexOutOfRange {
            index: t,
            len: self.triangles.len(),
        })
    }

    pub(crate) fn geom(&self, t: usize) -> &TriangleGeometry {
        &self.geometry[t]
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.geometry
            .iter()
            .flat_map(|g| g.edge_lengths)
            .fold(0.0, f64::max)
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.boundary).count()
    }

    /// Plain-text listing of vertices, triangles and edges.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "vertices {}", self.vertices.len())?;
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(out, "{i} {} {}", p[0], p[1])?;
        }
        writeln!(out, "triangles {}", self.triangles.len())?;
        for (t, tri) in self.triangles.iter().enumerate() {
            let e = self.tri_edges[t];
            let s = self.tri_signs[t];
            writeln!(
                out,
                "{t} {} {} {} edges {} {} {} signs {:+} {:+} {:+}",
                tri[0], tri[1], tri[2], e[0], e[1], e[2], s[0], s[1], s[2]
            )?;
        }
        writeln!(out, "edges {}", self.edges.len())?;
        for (i, e) in self.edges.iter().enumerate() {
            writeln!(
                out,
                "{i} {} {} {} normal {} {}",
                e.vertices[0],
                e.vertices[1],
                if e.boundary { "boundary" } else { "interior" },
                e.normal[0],
                e.normal[1]
            )?;
        }
        Ok(())
    }
}

fn triangle_geometry(p: [Point; 3]) -> TriangleGeometry {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let centroid = [
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    ];
    let mut edge_lengths = [0.0; 3];
    let mut outward_normals = [[0.0; 2]; 3];
    for k in 0..3 {
        let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        let tangent = [b[0] - a[0], b[1] - a[1]];
        let len = tangent[0].hypot(tangent[1]);
        edge_lengths[k] = len;
        // rotate the counterclockwise tangent clockwise
        outward_normals[k] = [tangent[1] / len, -tangent[0] / len];
    }
    TriangleGeometry {
        area,
        centroid,
        edge_lengths,
        outward_normals,
    }
}
