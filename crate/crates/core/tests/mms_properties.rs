mod common;

use forchheimer::mms::{
    convergence_study, error_norms, error_norms_with_rule, CosineMode, ManufacturedSolution, PressureField, StudyConfig, TimeStepPolicy,
};
use forchheimer::quadrature::QuadratureRule;
use forchheimer::{initial_state, DiscreteState, ForchheimerLaw, Point, Solver, SolverConfig, Spaces, TriMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fd_residual_lhs, p_oracle, u_oracle};

fn law() -> ForchheimerLaw {
    ForchheimerLaw::two_term(1.0, 1.0).unwrap()
}

#[test]
fn forcing_matches_finite_difference_residual() {
    let exact = ManufacturedSolution::new(law());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = 1e-5;
    for _ in 0..1000 {
        let x = [rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99)];
        let t = rng.gen_range(0.0..1.0);
        let lhs = fd_residual_lhs(x, t, h);
        let f = exact.f(x, t).unwrap();
        assert!((lhs - f).abs() < 1e-6, "x={x:?} t={t}: {lhs} vs {f}");
    }
}

#[test]
fn gradient_and_velocity_match_the_pressure() {
    let exact = ManufacturedSolution::new(law());
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let h = 1e-6;
    for _ in 0..1000 {
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let t = rng.gen_range(0.0..1.0);
        assert!((exact.p(x, t) - p_oracle(x, t)).abs() < 1e-15);
        let s = exact.s(x, t);
        let gx = (p_oracle([x[0] + h, x[1]], t) - p_oracle([x[0] - h, x[1]], t)) / (2.0 * h);
        let gy = (p_oracle([x[0], x[1] + h], t) - p_oracle([x[0], x[1] - h], t)) / (2.0 * h);
        assert!((s[0] - gx).abs() < 1e-8 && (s[1] - gy).abs() < 1e-8);
        let u = exact.u(x, t).unwrap();
        let uo = u_oracle(x, t);
        assert!((u[0] - uo[0]).abs() < 1e-8 && (u[1] - uo[1]).abs() < 1e-8);
    }
}

#[test]
fn two_term_law_has_beta_three_halves() {
    let d = law().degeneracy();
    assert_eq!(d.a, 0.5);
    assert_eq!(d.beta, 1.5);
}

#[test]
fn error_norms_of_the_zero_state_scale_with_the_solution() {
    let exact = ManufacturedSolution::new(law());
    let sp = Spaces::new(TriMesh::unit_square(8).unwrap());
    let zero = DiscreteState::zeros(&sp, 0.0);
    let e0 = error_norms(&sp, &zero, &exact, 0.0).unwrap();
    let e1 = error_norms(&sp, &zero, &exact, 0.2).unwrap();
    let decay = (-1.0_f64).exp();
    assert!((e1.pressure - decay * e0.pressure).abs() < 1e-14);
    assert!((e1.gradient - decay * e0.gradient).abs() < 1e-14);
    // the velocity is a nonlinear function of the gradient
    assert!(e1.velocity < e0.velocity && e1.velocity > decay * e0.velocity);

    // ||p||_{L2} of the cubic, by a high-order rule
    let fine = QuadratureRule::collapsed(8);
    let mesh = sp.mesh();
    let mut sq = 0.0;
    for t in 0..mesh.num_triangles() {
        sq += fine.integrate(&mesh.triangle_vertices(t), mesh.geometry(t).unwrap().area, |x| p_oracle(x, 0.0).powi(2));
    }
    // the degree-4 error rule is not exact for the degree-6 integrand
    assert!((e0.pressure - sq.sqrt()).abs() < 1e-7 * sq.sqrt(), "{} vs {}", e0.pressure, sq.sqrt());
}

#[test]
fn oversampled_error_norms_agree() {
    let law = law();
    let exact = ManufacturedSolution::new(law.clone());
    let sp = Spaces::new(TriMesh::unit_square(16).unwrap());
    let u0 = |x: Point| exact.u(x, 0.0).unwrap();
    let init = initial_state(&sp, &law, |x| exact.p(x, 0.0), |x| exact.s(x, 0.0), Some(&u0)).unwrap();
    let mut solver = Solver::new(&sp, &law, SolverConfig::new(0.0025, 0.05)).unwrap();
    let out = solver.run(init, |x, t| exact.f(x, t).unwrap()).unwrap();
    let base = error_norms(&sp, &out.state, &exact, 0.05).unwrap();
    let fine = error_norms_with_rule(&sp, &out.state, &exact, 0.05, &QuadratureRule::collapsed(5)).unwrap();
    for (a, b) in [(base.pressure, fine.pressure), (base.gradient, fine.gradient), (base.velocity, fine.velocity)] {
        assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
    }
}

#[test]
fn cosine_mode_converges() {
    let exact = ManufacturedSolution::with_field(law(), CosineMode);
    let cfg = StudyConfig {
        t_final: 0.1,
        dt: TimeStepPolicy::MeshSquared { cap: 1e-2 },
        ..StudyConfig::default()
    };
    let report = convergence_study(&exact, &[4, 8, 16], &cfg).unwrap();
    for row in &report.rows[1..] {
        assert!(row.rate_p.unwrap() > 0.8, "{row:?}");
        assert!(row.rate_s.unwrap() > 0.8, "{row:?}");
        assert!(row.rate_u.unwrap() > 0.8, "{row:?}");
        assert!(row.mass_balance < 1e-12);
    }
}

struct Zero;

impl PressureField for Zero {
    fn pressure(&self, _: Point, _: f64) -> f64 {
        0.0
    }
    fn pressure_rate(&self, _: Point, _: f64) -> f64 {
        0.0
    }
    fn gradient(&self, _: Point, _: f64) -> Point {
        [0.0, 0.0]
    }
    fn gradient_jacobian(&self, _: Point, _: f64) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
}

#[test]
fn error_norms_are_homogeneous() {
    let exact = ManufacturedSolution::with_field(law(), Zero);
    let sp = Spaces::new(TriMesh::unit_square(4).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut base = DiscreteState::zeros(&sp, 0.0);
    assert_eq!(error_norms(&sp, &base, &exact, 0.0).unwrap().pressure, 0.0);
    base.p.iter_mut().chain(base.s.iter_mut()).for_each(|v| *v = rng.gen_range(-1.0..1.0));
    let e = error_norms(&sp, &base, &exact, 0.0).unwrap();
    for lambda in [-3.0, 0.5, 7.25] {
        let mut scaled = base.clone();
        scaled.p.iter_mut().chain(scaled.s.iter_mut()).for_each(|v| *v *= lambda);
        let es = error_norms(&sp, &scaled, &exact, 0.0).unwrap();
        let l: f64 = lambda;
        assert!((es.pressure - l.abs() * e.pressure).abs() < 1e-12 * (1.0 + es.pressure));
        assert!((es.gradient - l.abs() * e.gradient).abs() < 1e-12 * (1.0 + es.gradient));
    }
}

#[test]
fn forcing_at_stagnation_points() {
    let exact = ManufacturedSolution::new(law());
    for x in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
        let expected = -5.0 * p_oracle(x, 0.0) - (2.0 - 2.0 * (x[0] + x[1]));
        assert!((exact.f(x, 0.0).unwrap() - expected).abs() < 1e-14, "{x:?}");
    }
}
