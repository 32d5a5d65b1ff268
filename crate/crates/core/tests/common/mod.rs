#![allow(dead_code)]

use forchheimer::Point;
use rand::Rng;

pub fn log_samples(count: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(move |i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
}

/// Triangle of the structured `n x n` mesh containing `x`.
pub fn locate(n: usize, x: Point) -> usize {
    let nf = n as f64;
    let i = ((x[0] * nf).floor() as usize).min(n - 1);
    let j = ((x[1] * nf).floor() as usize).min(n - 1);
    let (lx, ly) = (x[0] * nf - i as f64, x[1] * nf - j as f64);
    2 * (j * n + i) + usize::from(ly > lx)
}

/// Cubic `c . (1, x, y, xy, x^2, y^2, x^3, y^3, x^2 y, x y^2)` and its gradient.
#[derive(Clone, Copy)]
pub struct Cubic([f64; 10]);

impl Cubic {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
    }

    pub fn eval(&self, x: Point) -> f64 {
        let (a, b) = (x[0], x[1]);
        let c = self.0;
        c[0] + c[1] * a + c[2] * b + c[3] * a * b + c[4] * a * a + c[5] * b * b + c[6] * a * a * a + c[7] * b * b * b + c[8] * a * a * b + c[9] * a * b * b
    }

    pub fn grad(&self, x: Point) -> Point {
        let (a, b) = (x[0], x[1]);
        let c = self.0;
        [
            c[1] + c[3] * b + 2.0 * c[4] * a + 3.0 * c[6] * a * a + 2.0 * c[8] * a * b + c[9] * b * b,
            c[2] + c[3] * a + 2.0 * c[5] * b + 3.0 * c[7] * b * b + c[8] * a * a + 2.0 * c[9] * a * b,
        ]
    }
}

/// `v = (x(1-x) P(x), y(1-y) Q(x))`: zero normal flux on the unit square, degree 5.
pub struct Admissible {
    pub p: Cubic,
    pub q: Cubic,
}

impl Admissible {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            p: Cubic::random(rng),
            q: Cubic::random(rng),
        }
    }

    pub fn value(&self, x: Point) -> Point {
        [x[0] * (1.0 - x[0]) * self.p.eval(x), x[1] * (1.0 - x[1]) * self.q.eval(x)]
    }

    pub fn div(&self, x: Point) -> f64 {
        let (a, b) = (x[0], x[1]);
        (1.0 - 2.0 * a) * self.p.eval(x) + a * (1.0 - a) * self.p.grad(x)[0] + (1.0 - 2.0 * b) * self.q.eval(x) + b * (1.0 - b) * self.q.grad(x)[1]
    }
}

/// Test pressure, typed independently of the library.
pub fn p_oracle(x: Point, t: f64) -> f64 {
    let q = |v: f64| 0.5 * v * v - v * v * v / 3.0;
    (-5.0 * t).exp() * (q(x[0]) + q(x[1]))
}

/// `-K(|grad p|) grad p` with the closed-form conductivity of `g(s) = 1 + s`.
pub fn u_oracle(x: Point, t: f64) -> Point {
    let e = (-5.0 * t).exp();
    let (gx, gy) = (e * x[0] * (1.0 - x[0]), e * x[1] * (1.0 - x[1]));
    let k = 2.0 / (1.0 + (1.0 + 4.0 * gx.hypot(gy)).sqrt());
    [-k * gx, -k * gy]
}

/// `p_t + div u` by central differences with step `h`.
pub fn fd_residual_lhs(x: Point, t: f64, h: f64) -> f64 {
    let pt = (p_oracle(x, t + h) - p_oracle(x, t - h)) / (2.0 * h);
    let div = (u_oracle([x[0] + h, x[1]], t)[0] - u_oracle([x[0] - h, x[1]], t)[0]) / (2.0 * h)
        + (u_oracle([x[0], x[1] + h], t)[1] - u_oracle([x[0], x[1] - h], t)[1]) / (2.0 * h);
    pt + div
}
