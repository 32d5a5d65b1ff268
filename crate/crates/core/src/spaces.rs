//! Lowest-order Raviart-Thomas velocities with piecewise-constant scalar and
//! vector fields on a [`TriMesh`].
//!
//! Velocity unknowns live on interior edges only, which imposes the zero
//! normal flux condition strongly. Scalar unknowns are indexed by triangle,
//! vector unknowns by `2 * triangle + component`.

use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh};
use crate::quadrature::{integrate_segment, QuadratureRule};

const EDGE_GAUSS_POINTS: usize = 5;

pub type SparseMatrix = SparseColMat<usize, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    edge_dof: Vec<Option<usize>>,
    dof_edge: Vec<usize>,
    num_cells: usize,
}

impl DofMap {
    pub fn new(mesh: &TriMesh) -> Self {
        let mut edge_dof = Vec::with_capacity(mesh.num_edges());
        let mut dof_edge = Vec::new();
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.boundary {
                edge_dof.push(None);
            } else {
                edge_dof.push(Some(dof_edge.len()));
                dof_edge.push(e);
            }
        }
        Self {
            edge_dof,
            dof_edge,
            num_cells: mesh.num_triangles(),
        }
    }

    pub fn num_velocity(&self) -> usize {
        self.dof_edge.len()
    }

    pub fn num_scalar(&self) -> usize {
        self.num_cells
    }

    pub fn num_vector(&self) -> usize {
        2 * self.num_cells
    }

    pub fn edge_dof(&self, edge: usize) -> Option<usize> {
        self.edge_dof[edge]
    }

    pub fn dof_edge(&self, dof: usize) -> usize {
        self.dof_edge[dof]
    }
}

/// Frozen-coefficient blocks of the three-field system.
///
/// Rows follow the test space, columns the trial space.
#[derive(Debug, Clone)]
pub struct FormBlocks {
    /// `(p, w)`: scalar x scalar, diagonal with cell areas.
    pub pressure_mass: SparseMatrix,
    /// `(div u, w)`: scalar x velocity.
    pub divergence: SparseMatrix,
    /// `(u, z)`: vector x velocity.
    pub velocity_vector: SparseMatrix,
    /// `(Kbar s, z)`: vector x vector, block diagonal.
    pub conductivity_mass: SparseMatrix,
    /// `(s, v)`: velocity x vector.
    pub vector_velocity: SparseMatrix,
    /// `(p, div v)`: velocity x scalar.
    pub pressure_divergence: SparseMatrix,
}

#[derive(Debug, Clone)]
pub struct Spaces {
    mesh: TriMesh,
    dofs: DofMap,
    rule: QuadratureRule,
}

impl Spaces {
    pub fn new(mesh: TriMesh) -> Self {
        let dofs = DofMap::new(&mesh);
        Self {
            mesh,
            dofs,
            rule: QuadratureRule::degree4(),
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    fn check_local(&self, t: usize, k: usize) -> Result<()> {
        if t >= self.mesh.num_triangles() {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.mesh.num_triangles(),
            });
        }
        if k >= 3 {
            return Err(Error::IndexOutOfRange { index: k, len: 3 });
        }
        Ok(())
    }

    /// Scale `sigma |e| / (2 |T|)` of the RT0 basis for local edge `k` of `t`.
    pub(crate) fn rt0_scale(&self, t: usize, k: usize) -> f64 {
        let g = self.mesh.geom(t);
        self.mesh.triangle_signs(t)[k] * g.edge_lengths[k] / (2.0 * g.area)
    }

    fn opposite_vertex(&self, t: usize, k: usize) -> Point {
        self.mesh.vertices()[self.mesh.triangles()[t][k]]
    }

    /// Global RT0 basis function of local edge `k`, restricted to `t`.
    pub fn rt0_eval(&self, t: usize, k: usize, x: Point) -> Result<Point> {
        self.check_local(t, k)?;
        Ok(self.rt0_eval_unchecked(t, k, x))
    }

    fn rt0_eval_unchecked(&self, t: usize, k: usize, x: Point) -> Point {
        let c = self.rt0_scale(t, k);
        let p = self.opposite_vertex(t, k);
        [c * (x[0] - p[0]), c * (x[1] - p[1])]
    }

    /// Constant divergence `sigma |e| / |T|`.
    pub fn rt0_div(&self, t: usize, k: usize) -> Result<f64> {
        self.check_local(t, k)?;
        Ok(2.0 * self.rt0_scale(t, k))
    }

    /// Cell average of the basis function, equal to its centroid value.
    pub(crate) fn rt0_mean(&self, t: usize, k: usize) -> Point {
        self.rt0_eval_unchecked(t, k, self.mesh.geom(t).centroid)
    }

    /// Local-edge velocity dofs of `t`; `None` marks constrained boundary edges.
    pub(crate) fn local_dofs(&self, t: usize) -> [Option<usize>; 3] {
        self.mesh.triangle_edges(t).map(|e| self.dofs.edge_dof(e))
    }

    /// Pointwise value of the RT0 field `u` at `x` in triangle `t`.
    pub fn velocity_at(&self, u: &[f64], t: usize, x: Point) -> Point {
        let mut v = [0.0; 2];
        for (k, dof) in self.local_dofs(t).into_iter().enumerate() {
            if let Some(d) = dof {
                let phi = self.rt0_eval_unchecked(t, k, x);
                v[0] += u[d] * phi[0];
                v[1] += u[d] * phi[1];
            }
        }
        v
    }

    /// Per-cell divergence of the RT0 field `u`.
    pub fn velocity_divergence(&self, u: &[f64]) -> Vec<f64> {
        (0..self.mesh.num_triangles())
            .map(|t| {
                self.local_dofs(t)
                    .into_iter()
                    .enumerate()
                    .filter_map(|(k, d)| d.map(|d| u[d] * 2.0 * self.rt0_scale(t, k)))
                    .sum()
            })
            .collect()
    }

    /// Per-cell averages of the RT0 field `u`, interleaved by component.
    pub fn velocity_means(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dofs.num_vector()];
        for t in 0..self.mesh.num_triangles() {
            for (k, dof) in self.local_dofs(t).into_iter().enumerate() {
                if let Some(d) = dof {
                    let m = self.rt0_mean(t, k);
                    out[2 * t] += u[d] * m[0];
                    out[2 * t + 1] += u[d] * m[1];
                }
            }
        }
        out
    }

    /// Cellwise L2 projection onto piecewise constants.
    pub fn project_scalar(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        (0..self.mesh.num_triangles())
            .map(|t| {
                let g = self.mesh.geom(t);
                let tri = self.mesh.triangle_vertices(t);
                self.rule.integrate(&tri, g.area, &f) / g.area
            })
            .collect()
    }

    /// Componentwise L2 projection onto piecewise-constant vectors.
    pub fn project_vector(&self, z: impl Fn(Point) -> Point) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dofs.num_vector());
        for t in 0..self.mesh.num_triangles() {
            let g = self.mesh.geom(t);
            let tri = self.mesh.triangle_vertices(t);
            let mut acc = [0.0; 2];
            for (x, w) in self.rule.on_triangle(&tri, g.area) {
                let v = z(x);
                acc[0] += w * v[0];
                acc[1] += w * v[1];
            }
            out.push(acc[0] / g.area);
            out.push(acc[1] / g.area);
        }
        out
    }

    /// Mean normal flux `(1/|e|) int_e v . n ds` through every edge, along the
    /// global edge normal.
    pub fn edge_fluxes(&self, v: impl Fn(Point) -> Point) -> Vec<f64> {
        let verts = self.mesh.vertices();
        self.mesh
            .edges()
            .iter()
            .map(|edge| {
                let (a, b) = (verts[edge.vertices[0]], verts[edge.vertices[1]]);
                let n = edge.normal;
                integrate_segment(a, b, EDGE_GAUSS_POINTS, |x| {
                    let val = v(x);
                    val[0] * n[0] + val[1] * n[1]
                }) / edge.length
            })
            .collect()
    }

    /// H(div) interpolation onto the constrained RT0 space.
    ///
    /// Fails if `v` carries normal flux through the boundary.
    pub fn interpolate_hdiv(&self, v: impl Fn(Point) -> Point) -> Result<Vec<f64>> {
        let fluxes = self.edge_fluxes(v);
        let scale = 1.0 + fluxes.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
        let mut u = vec![0.0; self.dofs.num_velocity()];
        for (e, &flux) in fluxes.iter().enumerate() {
            match self.dofs.edge_dof(e) {
                Some(d) => u[d] = flux,
                None if flux.abs() > 1e-10 * scale => {
                    return Err(Error::BoundaryFlux { edge: e, flux })
                }
                None => {}
            }
        }
        Ok(u)
    }

    /// Per-cell `int_T f` with the degree-4 rule.
    pub fn cell_integrals(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        (0..self.mesh.num_triangles())
            .map(|t| {
                let g = self.mesh.geom(t);
                self.rule.integrate(&self.mesh.triangle_vertices(t), g.area, &f)
            })
            .collect()
    }

    pub fn cell_areas(&self) -> Vec<f64> {
        (0..self.mesh.num_triangles())
            .map(|t| self.mesh.geom(t).area)
            .collect()
    }

    /// Assembles all bilinear forms with the conductivity frozen per cell.
    /// Every integrand is a polynomial of degree at most two, so the entries are exact.
    pub fn assemble_forms(&self, kbar: &[f64]) -> Result<FormBlocks> {
        let nc = self.mesh.num_triangles();
        if kbar.len() != nc {
            return Err(Error::Dimension(format!(
                "{} frozen conductivities for {nc} cells",
                kbar.len()
            )));
        }
        if let Some(t) = kbar.iter().position(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::Domain(format!(
                "frozen conductivity on cell {t} must be positive, got {}",
                kbar[t]
            )));
        }
        let nu = self.dofs.num_velocity();
        let nv = self.dofs.num_vector();

        let mut mass = Vec::with_capacity(nc);
        let mut div = Vec::with_capacity(3 * nc);
        let mut uz = Vec::with_capacity(6 * nc);
        let mut sz = Vec::with_capacity(nv);
        for t in 0..nc {
            let area = self.mesh.geom(t).area;
            mass.push(Triplet::new(t, t, area));
            for c in 0..2 {
                sz.push(Triplet::new(2 * t + c, 2 * t + c, kbar[t] * area));
            }
            for (k, dof) in self.local_dofs(t).into_iter().enumerate() {
                let Some(d) = dof else { continue };
                div.push(Triplet::new(t, d, 2.0 * self.rt0_scale(t, k) * area));
                let m = self.rt0_mean(t, k);
                uz.push(Triplet::new(2 * t, d, area * m[0]));
                uz.push(Triplet::new(2 * t + 1, d, area * m[1]));
            }
        }
        let transpose = |trips: &[Triplet<usize, usize, f64>]| -> Vec<Triplet<usize, usize, f64>> {
            trips.iter().map(|x| Triplet::new(x.col, x.row, x.val)).collect()
        };

        Ok(FormBlocks {
            pressure_mass: sparse(nc, nc, &mass)?,
            divergence: sparse(nc, nu, &div)?,
            velocity_vector: sparse(nv, nu, &uz)?,
            conductivity_mass: sparse(nv, nv, &sz)?,
            vector_velocity: sparse(nu, nv, &transpose(&uz))?,
            pressure_divergence: sparse(nu, nc, &transpose(&div))?,
        })
    }
}

pub(crate) fn sparse(
    nrows: usize,
    ncols: usize,
    triplets: &[Triplet<usize, usize, f64>],
) -> Result<SparseMatrix> {
    SparseColMat::try_new_from_triplets(nrows, ncols, triplets)
        .map_err(|e| Error::Dimension(format!("sparse assembly: {e:?}")))
}
