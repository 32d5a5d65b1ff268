//! Generalized Forchheimer laws `g(s) = sum_i a_i s^alpha_i` and the
//! degenerate conductivity `K(xi) = 1 / g(s(xi))`, where `s(xi) >= 0` solves
//! `s g(s) = xi`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const ROOT_RTOL: f64 = 1e-13;
const ROOT_MAX_ITER: usize = 100;
const ENERGY_RTOL: f64 = 1e-10;
const ENERGY_MAX_DEPTH: u32 = 48;

/// One monomial `coefficient * s^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub exponent: f64,
}

/// Polynomial-like law with non-negative coefficients and strictly
/// increasing exponents starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ForchheimerLaw {
    terms: Vec<Term>,
}

/// Exponents describing how fast `K` degenerates: `K(xi) ~ xi^{-a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyExponents {
    pub a: f64,
    pub beta: f64,
}

impl DegeneracyExponents {
    /// `a = alpha_N / (alpha_N + 1)` and `beta = 2 - a`.
    pub fn from_degree(degree: f64) -> Self {
        let a = degree / (degree + 1.0);
        Self { a, beta: 2.0 - a }
    }
}

impl ForchheimerLaw {
    pub fn new(coefficients: &[f64], exponents: &[f64]) -> Result<Self> {
        if coefficients.len() != exponents.len() {
            return Err(Error::InvalidLaw(format!(
                "{} coefficients but {} exponents",
                coefficients.len(),
                exponents.len()
            )));
        }
        if coefficients.len() < 2 {
            return Err(Error::InvalidLaw("a law needs at least two terms".into()));
        }
        if coefficients.iter().chain(exponents).any(|v| !v.is_finite()) {
            return Err(Error::InvalidLaw("non-finite coefficient or exponent".into()));
        }
        if exponents[0] != 0.0 {
            return Err(Error::InvalidLaw("the first exponent must be 0".into()));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLaw("exponents must be strictly increasing".into()));
        }
        if coefficients.iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidLaw("coefficients must be non-negative".into()));
        }
        if coefficients[0] <= 0.0 || coefficients[coefficients.len() - 1] <= 0.0 {
            return Err(Error::InvalidLaw(
                "first and last coefficients must be positive".into(),
            ));
        }
        let terms = coefficients
            .iter()
            .zip(exponents)
            .map(|(&coefficient, &exponent)| Term { coefficient, exponent })
            .collect();
        Ok(Self { terms })
    }

    /// Two-term law `g(s) = a0 + a1 s`.
    pub fn two_term(a0: f64, a1: f64) -> Result<Self> {
        Self::new(&[a0, a1], &[0.0, 1.0])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Leading exponent `alpha_N`, i.e. deg(g).
    pub fn degree(&self) -> f64 {
        self.terms[self.terms.len() - 1].exponent
    }

    pub fn degeneracy(&self) -> DegeneracyExponents {
        DegeneracyExponents::from_degree(self.degree())
    }

    pub fn a0(&self) -> f64 {
        self.terms[0].coefficient
    }

    fn linear_coefficients(&self) -> Option<(f64, f64)> {
        match self.terms.as_slice() {
            [t0, t1] if t1.exponent == 1.0 => Some((t0.coefficient, t1.coefficient)),
            _ => None,
        }
    }

    pub fn g(&self, s: f64) -> Result<f64> {
        check_nonnegative("s", s)?;
        Ok(self.g_unchecked(s))
    }

    fn g_unchecked(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * pow(s, t.exponent))
            .sum()
    }

    /// `d/ds [s g(s)] = sum_i a_i (1 + alpha_i) s^alpha_i`, finite at s = 0.
    fn sg_derivative(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * (1.0 + t.exponent) * pow(s, t.exponent))
            .sum()
    }

    /// `s g'(s) = sum_i a_i alpha_i s^alpha_i`.
    fn s_g_prime(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.exponent * pow(s, t.exponent))
            .sum()
    }

    /// The unique `s >= 0` with `s g(s) = xi`.
    pub fn solve_s(&self, xi: f64) -> Result<f64> {
        check_nonnegative("xi", xi)?;
        if xi == 0.0 {
            return Ok(0.0);
        }
        if let Some((a0, a1)) = self.linear_coefficients() {
            // rationalized root of a1 s^2 + a0 s - xi = 0
            return Ok(2.0 * xi / (a0 + (a0 * a0 + 4.0 * a1 * xi).sqrt()));
        }
        self.solve_s_newton(xi)
    }

    /// Safeguarded Newton with bisection fallback. Every term bounds the root:
    /// `a_i s^(1 + alpha_i) <= s g(s) = xi`, so the bracket starts at the
    /// tightest of these (including `xi / a0`).
    pub(crate) fn solve_s_newton(&self, xi: f64) -> Result<f64> {
        let residual = |s: f64| s * self.g_unchecked(s) - xi;
        let upper = self
            .terms
            .iter()
            .filter(|t| t.coefficient > 0.0)
            .map(|t| (xi / t.coefficient).powf(1.0 / (1.0 + t.exponent)))
            .fold(f64::INFINITY, f64::min);
        let (mut lo, mut hi) = (0.0_f64, upper);
        let mut s = hi;
        for _ in 0..ROOT_MAX_ITER {
            let r = residual(s);
            if r == 0.0 {
                return Ok(s);
            }
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let newton = s - r / self.sg_derivative(s);
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let converged = (next - s).abs() <= ROOT_RTOL * next.abs() || hi - lo <= ROOT_RTOL * hi;
            s = next;
            if converged {
                return Ok(s);
            }
        }
        Err(Error::RootSolve {
            xi,
            residual: residual(s),
        })
    }

    /// Conductivity `K(xi) = 1 / g(s(xi))`, in `(0, 1/a0]`.
    pub fn conductivity(&self, xi: f64) -> Result<f64> {
        let s = self.solve_s(xi)?;
        Ok(1.0 / self.g_unchecked(s))
    }

    /// Logarithmic slope `xi K'(xi) / K(xi) = -s g'(s) / (d/ds [s g(s)])`, in `[-a, 0]`.
    pub fn conductivity_log_slope(&self, xi: f64) -> Result<f64> {
        let s = self.solve_s(xi)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(-self.s_g_prime(s) / self.sg_derivative(s))
    }

    /// `K(|y|) y`. The physical velocity is the negative of this.
    pub fn flux<const D: usize>(&self, y: [f64; D]) -> Result<[f64; D]> {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let k = self.conductivity(norm)?;
        Ok(y.map(|v| k * v))
    }

    /// `H(xi) = int_0^{xi^2} K(sqrt(r)) dr`, evaluated as `int_0^xi 2 t K(t) dt`.
    pub fn energy_density(&self, xi: f64) -> Result<f64> {
        check_nonnegative("xi", xi)?;
        if xi == 0.0 {
            return Ok(0.0);
        }
        let mut err = None;
        let mut integrand = |t: f64| match self.conductivity(t) {
            Ok(k) => 2.0 * t * k,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        };
        let value = adaptive_simpson(&mut integrand, 0.0, xi, ENERGY_RTOL)?;
        match err {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

fn pow(s: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else if exponent == 1.0 {
        s
    } else {
        s.powf(exponent)
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        Err(Error::Domain(format!("{name} must be non-negative, got {v}")))
    } else {
        Ok(())
    }
}

fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, rtol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // absolute target from a coarse magnitude estimate
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, rtol * scale, ENERGY_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature { lo: a, hi: b });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Parses `"a_0:alpha_0,a_1:alpha_1,..."`, e.g. `"1:0,1:1"` for `g(s) = 1 + s`.
impl FromStr for ForchheimerLaw {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut coefficients = Vec::new();
        let mut exponents = Vec::new();
        for pair in text.split(',') {
            let (c, e) = pair
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::InvalidLaw(format!("expected 'coef:exp', got '{pair}'")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidLaw(format!("not a number: '{v}'")))
            };
            coefficients.push(parse(c)?);
            exponents.push(parse(e)?);
        }
        Self::new(&coefficients, &exponents)
    }
}

impl fmt::Display for ForchheimerLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", t.coefficient, t.exponent)?;
        }
        Ok(())
    }
}
