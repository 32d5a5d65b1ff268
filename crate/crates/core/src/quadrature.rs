//! Quadrature on triangles and on segments.

use crate::mesh::Point;

/// Rule on the reference triangle in barycentric coordinates; weights sum to 1
/// and are scaled by the triangle area at use.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Symmetric 6-point rule, exact through total degree 4.
    pub fn degree4() -> Self {
        const W1: f64 = 0.223_381_589_678_011_47;
        const A1: f64 = 0.445_948_490_915_964_9;
        const W2: f64 = 0.109_951_743_655_321_87;
        const A2: f64 = 0.091_576_213_509_770_74;
        let b1 = 1.0 - 2.0 * A1;
        let b2 = 1.0 - 2.0 * A2;
        Self {
            points: vec![
                [A1, A1, b1],
                [A1, b1, A1],
                [b1, A1, A1],
                [A2, A2, b2],
                [A2, b2, A2],
                [b2, A2, A2],
            ],
            weights: vec![W1, W1, W1, W2, W2, W2],
        }
    }

    /// Collapsed (Duffy) Gauss product rule with `m` points per direction,
    /// exact through total degree `2m - 2`.
    pub fn collapsed(m: usize) -> Self {
        let gauss = gauss_legendre(m);
        let mut points = Vec::with_capacity(m * m);
        let mut weights = Vec::with_capacity(m * m);
        for &(u, wu) in &gauss {
            for &(v, wv) in &gauss {
                // (u, v) in the unit square -> (x, y) = (u, v (1 - u))
                let x = u;
                let y = v * (1.0 - u);
                points.push([1.0 - x - y, x, y]);
                // reference area 1/2 normalized away
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points of the rule on triangle `tri`, paired with weights
    /// scaled so they sum to `area`.
    pub fn on_triangle<'a>(
        &'a self,
        tri: &'a [Point; 3],
        area: f64,
    ) -> impl Iterator<Item = (Point, f64)> + 'a {
        self.points.iter().zip(&self.weights).map(move |(b, &w)| {
            let x = b[0] * tri[0][0] + b[1] * tri[1][0] + b[2] * tri[2][0];
            let y = b[0] * tri[0][1] + b[1] * tri[1][1] + b[2] * tri[2][1];
            ([x, y], w * area)
        })
    }

    /// `int_T f` on a triangle with the given vertices and area.
    pub fn integrate(&self, tri: &[Point; 3], area: f64, mut f: impl FnMut(Point) -> f64) -> f64 {
        self.on_triangle(tri, area).map(|(x, w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    assert!(m >= 1, "need at least one Gauss point");
    let mut rule = Vec::with_capacity(m);
    for i in 0..m {
        // Chebyshev initial guess, then Newton on P_m
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((0.5 * (1.0 - x), 0.5 * w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, m as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// `int_a^b f ds` along the straight segment from `a` to `b` with an
/// `m`-point Gauss rule.
pub fn integrate_segment(a: Point, b: Point, m: usize, mut f: impl FnMut(Point) -> f64) -> f64 {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    gauss_legendre(m)
        .into_iter()
        .map(|(t, w)| {
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            w * f(x)
        })
        .sum::<f64>()
        * len
}
