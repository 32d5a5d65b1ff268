//! Manufactured solutions, error norms and convergence studies.

use std::fmt::Write as _;
use std::thread;

use crate::error::{Error, Result};
use crate::law::ForchheimerLaw;
use crate::mesh::{Point, TriMesh};
use crate::quadrature::QuadratureRule;
use crate::solver::{initial_state, DiscreteState, LinearSolve, Solver, SolverConfig};
use crate::spaces::Spaces;

pub const CSV_HEADER: &str = "n,h,dt,err_p,rate_p,err_s,rate_s,err_u,rate_u,picard_avg";

/// A smooth pressure with zero normal gradient on the unit square boundary.
pub trait PressureField: Sync {
    fn pressure(&self, x: Point, t: f64) -> f64;
    fn pressure_rate(&self, x: Point, t: f64) -> f64;
    fn gradient(&self, x: Point, t: f64) -> Point;
    /// `J[i][j] = d s_i / d x_j` for `s = grad p`.
    fn gradient_jacobian(&self, x: Point, t: f64) -> [[f64; 2]; 2];
}

/// `p = e^{-5t} [ (x1^2 + x2^2)/2 - (x1^3 + x2^3)/3 ]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DecayingCubic;

impl PressureField for DecayingCubic {
    fn pressure(&self, x: Point, t: f64) -> f64 {
        let cubic = |v: f64| v * v / 2.0 - v * v * v / 3.0;
        (-5.0 * t).exp() * (cubic(x[0]) + cubic(x[1]))
    }

    fn pressure_rate(&self, x: Point, t: f64) -> f64 {
        -5.0 * self.pressure(x, t)
    }

    fn gradient(&self, x: Point, t: f64) -> Point {
        let e = (-5.0 * t).exp();
        [e * x[0] * (1.0 - x[0]), e * x[1] * (1.0 - x[1])]
    }

    fn gradient_jacobian(&self, x: Point, t: f64) -> [[f64; 2]; 2] {
        let e = (-5.0 * t).exp();
        [[e * (1.0 - 2.0 * x[0]), 0.0], [0.0, e * (1.0 - 2.0 * x[1])]]
    }
}

/// `p = e^{-t} cos(pi x1) cos(pi x2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CosineMode;

impl PressureField for CosineMode {
    fn pressure(&self, x: Point, t: f64) -> f64 {
        use std::f64::consts::PI;
        (-t).exp() * (PI * x[0]).cos() * (PI * x[1]).cos()
    }

    fn pressure_rate(&self, x: Point, t: f64) -> f64 {
        -self.pressure(x, t)
    }

    fn gradient(&self, x: Point, t: f64) -> Point {
        use std::f64::consts::PI;
        let e = (-t).exp();
        let (s1, c1) = (PI * x[0]).sin_cos();
        let (s2, c2) = (PI * x[1]).sin_cos();
        [-PI * e * s1 * c2, -PI * e * c1 * s2]
    }

    fn gradient_jacobian(&self, x: Point, t: f64) -> [[f64; 2]; 2] {
        use std::f64::consts::PI;
        let e = (-t).exp() * PI * PI;
        let (s1, c1) = (PI * x[0]).sin_cos();
        let (s2, c2) = (PI * x[1]).sin_cos();
        [[-e * c1 * c2, e * s1 * s2], [e * s1 * s2, -e * c1 * c2]]
    }
}

/// Exact `(p, s, u)` and the matching source `f = p_t + div u` with
/// `s = grad p` and `u = -K(|s|) s`.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution<P = DecayingCubic> {
    law: ForchheimerLaw,
    field: P,
}

impl ManufacturedSolution<DecayingCubic> {
    pub fn new(law: ForchheimerLaw) -> Self {
        Self {
            law,
            field: DecayingCubic,
        }
    }
}

impl<P: PressureField> ManufacturedSolution<P> {
    pub fn with_field(law: ForchheimerLaw, field: P) -> Self {
        Self { law, field }
    }

    pub fn law(&self) -> &ForchheimerLaw {
        &self.law
    }

    pub fn p(&self, x: Point, t: f64) -> f64 {
        self.field.pressure(x, t)
    }

    pub fn s(&self, x: Point, t: f64) -> Point {
        self.field.gradient(x, t)
    }

    pub fn u(&self, x: Point, t: f64) -> Result<Point> {
        let flux = self.law.flux(self.s(x, t))?;
        Ok([-flux[0], -flux[1]])
    }

    /// `f = p_t - K (tr J + slope * s^T J s / |s|^2)` where `slope = xi K'(xi) / K(xi)`;
    /// the second term vanishes in the limit `s -> 0`.
    pub fn f(&self, x: Point, t: f64) -> Result<f64> {
        let s = self.s(x, t);
        let j = self.field.gradient_jacobian(x, t);
        let xi = s[0].hypot(s[1]);
        let k = self.law.conductivity(xi)?;
        let mut div_term = j[0][0] + j[1][1];
        if xi > 0.0 {
            let slope = self.law.conductivity_log_slope(xi)?;
            let sjs = s[0] * (j[0][0] * s[0] + j[0][1] * s[1]) + s[1] * (j[1][0] * s[0] + j[1][1] * s[1]);
            div_term += slope * sjs / (xi * xi);
        }
        Ok(self.field.pressure_rate(x, t) - k * div_term)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `||p - p_h||_{L2}`.
    pub pressure: f64,
    /// `||s - s_h||_{L^beta}`.
    pub gradient: f64,
    /// `||u - u_h||_{L^beta}`, with `u_h` evaluated pointwise.
    pub velocity: f64,
}

/// Errors of `state` against the exact solution at time `t`, integrated with `rule`.
pub fn error_norms_with_rule<P: PressureField>(
    spaces: &Spaces,
    state: &DiscreteState,
    exact: &ManufacturedSolution<P>,
    t: f64,
    rule: &QuadratureRule,
) -> Result<ErrorNorms> {
    let beta = exact.law().degeneracy().beta;
    let mesh = spaces.mesh();
    let (mut ep, mut es, mut eu) = (0.0, 0.0, 0.0);
    for c in 0..mesh.num_triangles() {
        let tri = mesh.triangle_vertices(c);
        let area = mesh.geom(c).area;
        let sh = [state.s[2 * c], state.s[2 * c + 1]];
        for (x, w) in rule.on_triangle(&tri, area) {
            ep += w * (state.p[c] - exact.p(x, t)).powi(2);
            let s = exact.s(x, t);
            es += w * (sh[0] - s[0]).hypot(sh[1] - s[1]).powf(beta);
            let u = exact.u(x, t)?;
            let uh = spaces.velocity_at(&state.u, c, x);
            eu += w * (uh[0] - u[0]).hypot(uh[1] - u[1]).powf(beta);
        }
    }
    Ok(ErrorNorms {
        pressure: ep.sqrt(),
        gradient: es.powf(1.0 / beta),
        velocity: eu.powf(1.0 / beta),
    })
}

pub fn error_norms<P: PressureField>(
    spaces: &Spaces,
    state: &DiscreteState,
    exact: &ManufacturedSolution<P>,
    t: f64,
) -> Result<ErrorNorms> {
    error_norms_with_rule(spaces, state, exact, t, spaces.rule())
}

/// Observed order between two errors on meshes of size `h_coarse > h_fine`.
pub fn observed_rate(err_coarse: f64, err_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (h_coarse / h_fine).ln()
}

/// How the time step follows the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepPolicy {
    Fixed(f64),
    /// `dt = min(cap, h^2)`.
    MeshSquared { cap: f64 },
}

impl TimeStepPolicy {
    /// Largest `dt` not above the target that divides `t_final` evenly.
    pub fn resolve(&self, h: f64, t_final: f64) -> Result<f64> {
        let target = match *self {
            TimeStepPolicy::Fixed(dt) => dt,
            TimeStepPolicy::MeshSquared { cap } => cap.min(h * h),
        };
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {target}")));
        }
        if t_final == 0.0 {
            return Ok(target);
        }
        let steps = (t_final / target - 1e-9).ceil().max(1.0);
        Ok(t_final / steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyConfig {
    pub t_final: f64,
    pub dt: TimeStepPolicy,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub linear: LinearSolve,
    /// Run the meshes on separate threads.
    pub parallel: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            dt: TimeStepPolicy::MeshSquared { cap: 1e-2 },
            picard_tol: 1e-6,
            picard_max: 50,
            linear: LinearSolve::Condensed,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub errors: ErrorNorms,
    pub rate_p: Option<f64>,
    pub rate_s: Option<f64>,
    pub rate_u: Option<f64>,
    pub picard_avg: f64,
    pub picard_max: usize,
    pub steps: usize,
    /// `max_n |mass balance| / (1 + |dt int f^n|)` over the run.
    pub mass_balance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub beta: f64,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    /// Builds a report from per-mesh results, filling in rates between consecutive rows.
    pub fn from_rows(beta: f64, mut rows: Vec<ReportRow>) -> Self {
        for i in 1..rows.len() {
            let (c, f) = (&rows[i - 1], &rows[i]);
            let rate = |a: f64, b: f64| observed_rate(a, b, c.h, f.h);
            let rates = (
                rate(c.errors.pressure, f.errors.pressure),
                rate(c.errors.gradient, f.errors.gradient),
                rate(c.errors.velocity, f.errors.velocity),
            );
            let row = &mut rows[i];
            row.rate_p = Some(rates.0);
            row.rate_s = Some(rates.1);
            row.rate_u = Some(rates.2);
        }
        Self { beta, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6e},{:.6e},{:.6e},{},{:.6e},{},{:.6e},{},{:.3}",
                r.n,
                r.h,
                r.dt,
                r.errors.pressure,
                rate(r.rate_p),
                r.errors.gradient,
                rate(r.rate_s),
                r.errors.velocity,
                rate(r.rate_u),
                r.picard_avg
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let rate = |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "| N | ‖p − p_h‖ | Rates | ‖s − s_h‖_L^β | Rates | ‖u − u_h‖_L^β | Rates |"
        );
        out.push_str("|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {:.3e} | {} | {:.3e} | {} | {:.3e} | {} |",
                r.n,
                r.errors.pressure,
                rate(r.rate_p),
                r.errors.gradient,
                rate(r.rate_s),
                r.errors.velocity,
                rate(r.rate_u)
            );
        }
        let _ = writeln!(out, "\nβ = {}", self.beta);
        out
    }
}

/// Runs the manufactured problem on one `n x n` mesh up to `cfg.t_final`.
pub fn run_mesh<P: PressureField>(
    exact: &ManufacturedSolution<P>,
    n: usize,
    cfg: &StudyConfig,
) -> Result<ReportRow> {
    let spaces = Spaces::new(TriMesh::unit_square(n)?);
    let h = spaces.mesh().h();
    let dt = cfg.dt.resolve(h, cfg.t_final)?;
    let solver_cfg = SolverConfig {
        dt,
        t_final: cfg.t_final,
        picard_tol: cfg.picard_tol,
        picard_max: cfg.picard_max,
        linear: cfg.linear,
    };
    let law = exact.law();
    let u0 = |x: Point| exact.u(x, 0.0).unwrap_or([f64::NAN; 2]);
    let init = initial_state(&spaces, law, |x| exact.p(x, 0.0), |x| exact.s(x, 0.0), Some(&u0))?;

    // the forcing closure cannot return errors; record the first one
    let forcing_error = std::sync::Mutex::new(None);
    let forcing = |x: Point, t: f64| match exact.f(x, t) {
        Ok(v) => v,
        Err(e) => {
            forcing_error.lock().expect("forcing error lock").get_or_insert(e);
            f64::NAN
        }
    };
    let mut solver = Solver::new(&spaces, law, solver_cfg)?;
    let result = solver.run(init, forcing);
    if let Some(e) = forcing_error.into_inner().expect("forcing error lock") {
        return Err(e);
    }
    let out = result?;
    let errors = error_norms(&spaces, &out.state, exact, cfg.t_final)?;
    let mass_balance = out
        .diagnostics
        .iter()
        .map(|d| d.mass_balance.abs() / (1.0 + d.mass_source.abs() / dt))
        .fold(0.0, f64::max);
    Ok(ReportRow {
        n,
        h,
        dt,
        errors,
        rate_p: None,
        rate_s: None,
        rate_u: None,
        picard_avg: out.mean_picard_iterations(),
        picard_max: out.max_picard_iterations(),
        steps: out.diagnostics.len(),
        mass_balance,
    })
}

/// Solves the manufactured problem on each mesh and reports errors at `t_final`.
pub fn convergence_study<P: PressureField + Send>(
    exact: &ManufacturedSolution<P>,
    meshes: &[usize],
    cfg: &StudyConfig,
) -> Result<ConvergenceReport> {
    if meshes.is_empty() {
        return Err(Error::Domain("no mesh sizes given".into()));
    }
    if meshes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("mesh sizes must be strictly increasing".into()));
    }
    let rows = if cfg.parallel {
        thread::scope(|scope| {
            let handles: Vec<_> = meshes
                .iter()
                .map(|&n| scope.spawn(move || run_mesh(exact, n, cfg)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("mesh run panicked"))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        meshes
            .iter()
            .map(|&n| run_mesh(exact, n, cfg))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(ConvergenceReport::from_rows(exact.law().degeneracy().beta, rows))
}
