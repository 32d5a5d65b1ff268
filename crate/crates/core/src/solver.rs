//! Backward Euler time stepping of the three-field mixed scheme with a
//! Picard (frozen conductivity) treatment of the Forchheimer nonlinearity.
//!
//! Sign convention: `u = -K(|s|) s` and `p_t + div u = f`, with zero normal
//! flux on the boundary.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::Triplet;
use faer::{Col, Side};

use crate::error::{Error, Result};
use crate::law::ForchheimerLaw;
use crate::mesh::Point;
use crate::spaces::{sparse, SparseMatrix, Spaces};

/// Coefficients of `(p_h, s_h, u_h)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    pub p: Vec<f64>,
    /// Interleaved by component: `s[2t]`, `s[2t + 1]`.
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl DiscreteState {
    pub fn zeros(spaces: &Spaces, t: f64) -> Self {
        let d = spaces.dofs();
        Self {
            p: vec![0.0; d.num_scalar()],
            s: vec![0.0; d.num_vector()],
            u: vec![0.0; d.num_velocity()],
            t,
        }
    }

    fn check(&self, spaces: &Spaces) -> Result<()> {
        let d = spaces.dofs();
        if self.p.len() != d.num_scalar() || self.s.len() != d.num_vector() || self.u.len() != d.num_velocity() {
            return Err(Error::Dimension(format!(
                "state sizes ({}, {}, {}) do not match spaces ({}, {}, {})",
                self.p.len(),
                self.s.len(),
                self.u.len(),
                d.num_scalar(),
                d.num_vector(),
                d.num_velocity()
            )));
        }
        Ok(())
    }
}

/// How each frozen-coefficient linear system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolve {
    /// Eliminate `s` and `p` cellwise and factor the SPD velocity system.
    #[default]
    Condensed,
    /// Sparse LU of the full `(p, s, u)` block system.
    Monolithic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Relative tolerance on successive `s` iterates (max norm).
    pub picard_tol: f64,
    pub picard_max: usize,
    pub linear: LinearSolve,
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            picard_tol: 1e-6,
            picard_max: 50,
            linear: LinearSolve::Condensed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Domain(format!("final time must be non-negative, got {}", self.t_final)));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Domain(format!("Picard tolerance must be positive, got {}", self.picard_tol)));
        }
        if self.picard_max == 0 {
            return Err(Error::Domain("Picard iteration cap must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps `N` with `N dt = t_final`.
    pub fn num_steps(&self) -> Result<usize> {
        self.validate()?;
        let ratio = self.t_final / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::TimeGrid(format!(
                "final time {} is not an integer multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub t: f64,
    pub picard_iterations: usize,
    /// `max |s^(k+1) - s^(k)|` for every Picard iterate.
    pub increments: Vec<f64>,
    /// `int p^n - int p^(n-1) - dt int f^n`.
    pub mass_balance: f64,
    /// `dt int f^n`, the expected mass change.
    pub mass_source: f64,
    /// `max_T |pi(u_h) + K(|s_h|) s_h|` with the true nonlinearity.
    pub nonlinear_residual: f64,
    pub pressure_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub state: DiscreteState,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl RunOutput {
    pub fn mean_picard_iterations(&self) -> f64 {
        if self.diagnostics.is_empty() {
            return 0.0;
        }
        let total: usize = self.diagnostics.iter().map(|d| d.picard_iterations).sum();
        total as f64 / self.diagnostics.len() as f64
    }

    pub fn max_picard_iterations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.picard_iterations).max().unwrap_or(0)
    }
}

/// Initial data: `p_h = pi p0`, `s_h = pi s0`, and a velocity whose cell
/// averages reproduce `-K(|s_h|) s_h`.
///
/// With `u0` the velocity is its H(div) interpolant; otherwise it is the
/// least-squares fit of the cell averages.
pub fn initial_state(
    spaces: &Spaces,
    law: &ForchheimerLaw,
    p0: impl Fn(Point) -> f64,
    s0: impl Fn(Point) -> Point,
    u0: Option<&dyn Fn(Point) -> Point>,
) -> Result<DiscreteState> {
    let p = spaces.project_scalar(p0);
    let s = spaces.project_vector(s0);
    let u = match u0 {
        Some(v) => spaces.interpolate_hdiv(v)?,
        None => fit_velocity(spaces, law, &s)?,
    };
    Ok(DiscreteState { p, s, u, t: 0.0 })
}

fn fit_velocity(spaces: &Spaces, law: &ForchheimerLaw, s: &[f64]) -> Result<Vec<f64>> {
    let nu = spaces.dofs().num_velocity();
    let mut trips = Vec::new();
    let mut rhs = vec![0.0; nu];
    for t in 0..spaces.mesh().num_triangles() {
        let area = spaces.mesh().geom(t).area;
        let flux = law.flux([s[2 * t], s[2 * t + 1]])?;
        let target = [-flux[0], -flux[1]];
        let dofs = spaces.local_dofs(t);
        for (i, di) in dofs.iter().enumerate() {
            let Some(di) = *di else { continue };
            let mi = spaces.rt0_mean(t, i);
            rhs[di] += area * (mi[0] * target[0] + mi[1] * target[1]);
            for (j, dj) in dofs.iter().enumerate() {
                let Some(dj) = *dj else { continue };
                let mj = spaces.rt0_mean(t, j);
                trips.push(Triplet::new(di, dj, area * (mi[0] * mj[0] + mi[1] * mj[1])));
            }
        }
    }
    if nu == 0 {
        return Ok(Vec::new());
    }
    let mat = sparse(nu, nu, &trips)?;
    let symbolic = SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
        .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
    let llt = Llt::try_new_with_symbolic(symbolic, mat.as_ref(), Side::Lower)
        .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
    Ok(solve_with(&llt, &rhs))
}

fn solve_with(solver: &impl Solve<f64>, rhs: &[f64]) -> Vec<f64> {
    let mut x = Col::from_fn(rhs.len(), |i| rhs[i]);
    solver.solve_in_place(x.as_mut());
    x.iter().copied().collect()
}

/// Time stepper bound to one mesh and one law. Symbolic factorizations are
/// computed on first use and reused for every later Picard iterate.
pub struct Solver<'a> {
    spaces: &'a Spaces,
    law: &'a ForchheimerLaw,
    cfg: SolverConfig,
    areas: Vec<f64>,
    condensed: Option<SymbolicLlt<usize>>,
    monolithic: Option<SymbolicLu<usize>>,
}

impl<'a> Solver<'a> {
    pub fn new(spaces: &'a Spaces, law: &'a ForchheimerLaw, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            spaces,
            law,
            cfg,
            areas: spaces.cell_areas(),
            condensed: None,
            monolithic: None,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Per-cell `K(|s_T|)`.
    pub fn frozen_conductivity(&self, s: &[f64]) -> Result<Vec<f64>> {
        s.chunks_exact(2)
            .map(|c| self.law.conductivity(c[0].hypot(c[1])))
            .collect()
    }

    /// Solves the frozen-coefficient linear system for one Picard iterate.
    ///
    /// `forcing` holds per-cell integrals of `f^n`.
    pub fn solve_linear(&mut self, p_prev: &[f64], forcing: &[f64], kbar: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        match self.cfg.linear {
            LinearSolve::Condensed => self.solve_condensed(p_prev, forcing, kbar),
            LinearSolve::Monolithic => self.solve_monolithic(p_prev, forcing, kbar),
        }
    }

    fn solve_condensed(&mut self, p_prev: &[f64], forcing: &[f64], kbar: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let sp = self.spaces;
        let dt = self.cfg.dt;
        let nc = sp.mesh().num_triangles();
        let nu = sp.dofs().num_velocity();

        // s_T = -mean(u)_T / Kbar_T and p_T = p_prev_T + dt (F_T - (B u)_T) / |T|
        // reduce the system to (A + dt B^T M^-1 B) u = B^T (p_prev + dt M^-1 F).
        let mut trips = Vec::with_capacity(9 * nc);
        let mut rhs = vec![0.0; nu];
        for t in 0..nc {
            let area = self.areas[t];
            let shifted = p_prev[t] + dt * forcing[t] / area;
            let dofs = sp.local_dofs(t);
            let means = [0, 1, 2].map(|k| sp.rt0_mean(t, k));
            let divs = [0, 1, 2].map(|k| 2.0 * sp.rt0_scale(t, k) * area);
            for i in 0..3 {
                let Some(di) = dofs[i] else { continue };
                let bi = divs[i];
                rhs[di] += bi * shifted;
                for j in 0..3 {
                    let Some(dj) = dofs[j] else { continue };
                    if dj > di {
                        continue;
                    }
                    let bj = divs[j];
                    let a = area / kbar[t] * (means[i][0] * means[j][0] + means[i][1] * means[j][1]);
                    trips.push(Triplet::new(di, dj, a + dt * bi * bj / area));
                }
            }
        }
        let u = if nu == 0 {
            Vec::new()
        } else {
            let mat = sparse(nu, nu, &trips)?;
            if self.condensed.is_none() {
                self.condensed = Some(
                    SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
                        .map_err(|e| Error::LinearSolver(format!("symbolic Cholesky: {e:?}")))?,
                );
            }
            let symbolic = self.condensed.clone().expect("symbolic factorization cached");
            let llt = Llt::try_new_with_symbolic(symbolic, mat.as_ref(), Side::Lower)
                .map_err(|e| Error::LinearSolver(format!("Cholesky: {e:?}")))?;
            solve_with(&llt, &rhs)
        };

        let div_u = sp.velocity_divergence(&u);
        let means = sp.velocity_means(&u);
        let p = (0..nc)
            .map(|t| p_prev[t] + dt * (forcing[t] / self.areas[t] - div_u[t]))
            .collect();
        let s = (0..2 * nc).map(|i| -means[i] / kbar[i / 2]).collect();
        Ok((p, s, u))
    }

    /// Full block system in unknown order `(p, s, u)`:
    ///
    /// ```text
    /// [ M/dt   0     B   ] [p]   [ M p_prev / dt + F ]
    /// [ 0      Msz   Muz ] [s] = [ 0 ]
    /// [ B^T    Muz^T 0   ] [u]   [ 0 ]
    /// ```
    fn solve_monolithic(&mut self, p_prev: &[f64], forcing: &[f64], kbar: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let blocks = self.spaces.assemble_forms(kbar)?;
        let nc = self.spaces.dofs().num_scalar();
        let nv = self.spaces.dofs().num_vector();
        let nu = self.spaces.dofs().num_velocity();
        let n = nc + nv + nu;
        let (ps, ss, us) = (0, nc, nc + nv);

        let mut trips = Vec::new();
        let mut push = |m: &SparseMatrix, r0: usize, c0: usize, scale: f64| {
            let sym = m.symbolic();
            for j in 0..m.ncols() {
                for (idx, &i) in sym.row_idx_of_col_raw(j).iter().enumerate() {
                    trips.push(Triplet::new(r0 + i, c0 + j, scale * m.val_of_col(j)[idx]));
                }
            }
        };
        push(&blocks.pressure_mass, ps, ps, 1.0 / self.cfg.dt);
        push(&blocks.divergence, ps, us, 1.0);
        push(&blocks.conductivity_mass, ss, ss, 1.0);
        push(&blocks.velocity_vector, ss, us, 1.0);
        push(&blocks.pressure_divergence, us, ps, 1.0);
        push(&blocks.vector_velocity, us, ss, 1.0);
        let mat = sparse(n, n, &trips)?;

        let mut rhs = vec![0.0; n];
        for t in 0..nc {
            rhs[t] = self.areas[t] * p_prev[t] / self.cfg.dt + forcing[t];
        }
        if self.monolithic.is_none() {
            self.monolithic = Some(
                SymbolicLu::try_new(mat.symbolic())
                    .map_err(|e| Error::LinearSolver(format!("symbolic LU: {e:?}")))?,
            );
        }
        let symbolic = self.monolithic.clone().expect("symbolic factorization cached");
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref())
            .map_err(|e| Error::LinearSolver(format!("LU: {e:?}")))?;
        let x = solve_with(&lu, &rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver("non-finite solution of the block system".into()));
        }
        Ok((x[ps..ss].to_vec(), x[ss..us].to_vec(), x[us..].to_vec()))
    }

    /// Advances one backward Euler step to `t_n`, iterating on the conductivity
    /// until successive `s` iterates agree to `picard_tol`.
    pub fn step(&mut self, prev: &DiscreteState, t_n: f64, forcing: &[f64]) -> Result<(DiscreteState, StepDiagnostics)> {
        prev.check(self.spaces)?;
        if forcing.len() != prev.p.len() {
            return Err(Error::Dimension(format!(
                "{} forcing integrals for {} cells",
                forcing.len(),
                prev.p.len()
            )));
        }
        let tol = self.cfg.picard_tol;
        let mut s_iter = prev.s.clone();
        let mut increments = Vec::new();
        for iteration in 1..=self.cfg.picard_max {
            let kbar = self.frozen_conductivity(&s_iter)?;
            let (p, s, u) = self.solve_linear(&prev.p, forcing, &kbar)?;
            let increment = max_abs_diff(&s, &s_iter);
            let scale = 1.0 + max_abs(&s_iter);
            increments.push(increment);
            let converged = increment <= tol * scale;
            if converged || iteration == self.cfg.picard_max {
                let state = DiscreteState { p, s, u, t: t_n };
                let residual = self.nonlinear_residual(&state)?;
                if !converged {
                    return Err(Error::PicardNonConvergence {
                        t: t_n,
                        iterations: iteration,
                        increment,
                        residual,
                    });
                }
                let source: f64 = forcing.iter().sum::<f64>() * self.cfg.dt;
                let mass_balance = self.total(&state.p) - self.total(&prev.p) - source;
                let diag = StepDiagnostics {
                    t: t_n,
                    picard_iterations: iteration,
                    increments,
                    mass_balance,
                    mass_source: source,
                    nonlinear_residual: residual,
                    pressure_norm: self.pressure_norm(&state.p),
                };
                return Ok((state, diag));
            }
            s_iter = s;
        }
        unreachable!("Picard loop returns on its last iteration")
    }

    /// `max_T |pi(u_h)_T + K(|s_T|) s_T|`.
    pub fn nonlinear_residual(&self, state: &DiscreteState) -> Result<f64> {
        let means = self.spaces.velocity_means(&state.u);
        let mut worst = 0.0_f64;
        for (t, c) in state.s.chunks_exact(2).enumerate() {
            let flux = self.law.flux([c[0], c[1]])?;
            worst = worst.max((means[2 * t] + flux[0]).abs()).max((means[2 * t + 1] + flux[1]).abs());
        }
        Ok(worst)
    }

    /// `int_Omega p_h`.
    pub fn total(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.areas).map(|(v, a)| v * a).sum()
    }

    /// `||p_h||_{L2}`.
    pub fn pressure_norm(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(&self.areas)
            .map(|(v, a)| a * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Runs from `initial` to `t_final`, calling `observe` after every step.
    pub fn run_observed(
        &mut self,
        initial: DiscreteState,
        forcing: impl Fn(Point, f64) -> f64,
        mut observe: impl FnMut(&DiscreteState, &StepDiagnostics),
    ) -> Result<RunOutput> {
        let steps = self.cfg.num_steps()?;
        initial.check(self.spaces)?;
        let t0 = initial.t;
        let mut state = initial;
        let mut diagnostics = Vec::with_capacity(steps);
        for n in 1..=steps {
            let t_n = t0 + self.cfg.t_final * n as f64 / steps as f64;
            let f = self.spaces.cell_integrals(|x| forcing(x, t_n));
            let (next, diag) = self.step(&state, t_n, &f)?;
            observe(&next, &diag);
            diagnostics.push(diag);
            state = next;
        }
        Ok(RunOutput { state, diagnostics })
    }

    pub fn run(&mut self, initial: DiscreteState, forcing: impl Fn(Point, f64) -> f64) -> Result<RunOutput> {
        self.run_observed(initial, forcing, |_, _| {})
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;

    fn setup(n: usize) -> (Spaces, ForchheimerLaw) {
        (
            Spaces::new(TriMesh::unit_square(n).unwrap()),
            ForchheimerLaw::two_term(1.0, 1.0).unwrap(),
        )
    }

    fn bump(x: Point) -> f64 {
        (x[0] * x[0] - 2.0 * x[0] * x[0] * x[0] / 3.0) + 0.5 * x[1] * x[1]
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(0.1, -1.0).validate().is_err());
        let mut c = SolverConfig::new(0.1, 1.0);
        c.picard_max = 0;
        assert!(c.validate().is_err());
        c.picard_max = 1;
        c.picard_tol = 0.0;
        assert!(c.validate().is_err());
        assert_eq!(SolverConfig::new(0.1, 1.0).num_steps().unwrap(), 10);
        assert_eq!(SolverConfig::new(0.25, 0.0).num_steps().unwrap(), 0);
        assert!(matches!(SolverConfig::new(0.3, 1.0).num_steps(), Err(Error::TimeGrid(_))));
    }

    #[test]
    fn zero_data_stays_zero() {
        let (sp, law) = setup(3);
        let init = initial_state(&sp, &law, |_| 0.0, |_| [0.0, 0.0], None).unwrap();
        assert_eq!(init, DiscreteState::zeros(&sp, 0.0));
        let mut solver = Solver::new(&sp, &law, SolverConfig::new(0.1, 0.1)).unwrap();
        let f = vec![0.0; sp.mesh().num_triangles()];
        let (next, diag) = solver.step(&init, 0.1, &f).unwrap();
        assert_eq!(diag.picard_iterations, 1);
        assert!(next.p.iter().chain(&next.s).chain(&next.u).all(|&v| v == 0.0));
    }

    #[test]
    fn zero_steps_return_initial_state() {
        let (sp, law) = setup(2);
        let init = initial_state(&sp, &law, bump, |_| [0.0, 0.0], None).unwrap();
        let mut solver = Solver::new(&sp, &law, SolverConfig::new(0.5, 0.0)).unwrap();
        let out = solver.run(init.clone(), |_, _| 1.0).unwrap();
        assert_eq!(out.state, init);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn darcy_law_needs_one_iteration() {
        let sp = Spaces::new(TriMesh::unit_square(4).unwrap());
        let law = ForchheimerLaw::two_term(1.0, 1e-30).unwrap();
        let init = initial_state(&sp, &law, bump, |_| [0.0, 0.0], None).unwrap();
        let mut solver = Solver::new(&sp, &law, SolverConfig::new(0.05, 0.2)).unwrap();
        let out = solver.run(init, |x, _| x[0] - 0.5).unwrap();
        // the first step moves s away from zero; K is constant up to 1e-30
        assert!(out.diagnostics.iter().all(|d| d.picard_iterations <= 2));
        assert!(out.diagnostics[1..].iter().all(|d| d.picard_iterations <= 2));
    }

    #[test]
    fn condensed_and_monolithic_agree() {
        let (sp, law) = setup(4);
        let init = initial_state(&sp, &law, bump, |x| [2.0 * x[0] * (1.0 - x[0]), x[1]], None).unwrap();
        let mut kbar = solver_kbar(&sp, &law, &init);
        kbar[3] *= 0.5;
        let f = sp.cell_integrals(|x| x[0] * x[1] - 0.25);

        let mut cfg = SolverConfig::new(0.01, 0.01);
        let mut a = Solver::new(&sp, &law, cfg).unwrap();
        cfg.linear = LinearSolve::Monolithic;
        let mut b = Solver::new(&sp, &law, cfg).unwrap();
        let (pa, sa, ua) = a.solve_linear(&init.p, &f, &kbar).unwrap();
        let (pb, sb, ub) = b.solve_linear(&init.p, &f, &kbar).unwrap();
        assert!(max_abs_diff(&pa, &pb) < 1e-11);
        assert!(max_abs_diff(&sa, &sb) < 1e-11);
        assert!(max_abs_diff(&ua, &ub) < 1e-11);
    }

    fn solver_kbar(sp: &Spaces, law: &ForchheimerLaw, st: &DiscreteState) -> Vec<f64> {
        Solver::new(sp, law, SolverConfig::new(1.0, 1.0))
            .unwrap()
            .frozen_conductivity(&st.s)
            .unwrap()
    }

    #[test]
    fn picard_cap_reports_residual() {
        let (sp, law) = setup(4);
        let init = initial_state(&sp, &law, |x| 20.0 * bump(x), |_| [0.0, 0.0], None).unwrap();
        let mut cfg = SolverConfig::new(0.01, 0.01);
        cfg.picard_max = 1;
        let mut solver = Solver::new(&sp, &law, cfg).unwrap();
        match solver.run(init, |_, _| 0.0) {
            Err(Error::PicardNonConvergence { iterations, residual, .. }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    fn weighted_mismatch(sp: &Spaces, law: &ForchheimerLaw, st: &DiscreteState) -> f64 {
        let means = sp.velocity_means(&st.u);
        let mut acc = 0.0;
        for t in 0..sp.mesh().num_triangles() {
            let f = law.flux([st.s[2 * t], st.s[2 * t + 1]]).unwrap();
            let area = sp.mesh().geom(t).area;
            acc += area * ((means[2 * t] + f[0]).powi(2) + (means[2 * t + 1] + f[1]).powi(2));
        }
        acc.sqrt()
    }

    #[test]
    fn fitted_initial_velocity_is_least_squares_optimal() {
        let law = ForchheimerLaw::two_term(1.0, 1.0).unwrap();
        let s0 = |x: Point| [x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1])];
        let u0 = |x: Point| {
            let f = law.flux(s0(x)).unwrap();
            [-f[0], -f[1]]
        };
        let mut previous = f64::INFINITY;
        for n in [4, 8, 16] {
            let sp = Spaces::new(TriMesh::unit_square(n).unwrap());
            let fitted = initial_state(&sp, &law, bump, s0, None).unwrap();
            let interpolated = initial_state(&sp, &law, bump, s0, Some(&u0)).unwrap();
            let rf = weighted_mismatch(&sp, &law, &fitted);
            let ri = weighted_mismatch(&sp, &law, &interpolated);
            assert!(rf <= ri * (1.0 + 1e-12), "n={n}: fit {rf} vs interpolant {ri}");
            assert!(rf < previous);
            previous = rf;
        }
    }

    #[test]
    fn state_size_mismatch_is_rejected() {
        let (sp, law) = setup(2);
        let mut solver = Solver::new(&sp, &law, SolverConfig::new(0.1, 0.1)).unwrap();
        let mut st = DiscreteState::zeros(&sp, 0.0);
        st.u.pop();
        let f = vec![0.0; sp.mesh().num_triangles()];
        assert!(matches!(solver.step(&st, 0.1, &f), Err(Error::Dimension(_))));
        let st = DiscreteState::zeros(&sp, 0.0);
        assert!(matches!(solver.step(&st, 0.1, &f[1..]), Err(Error::Dimension(_))));
    }
}
