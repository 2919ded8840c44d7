//! Eigenfunctions of the cubic Hamiltonian in the coordinate and
//! Fock–Bargmann representations.
//!
//! The number-basis coefficients f_n translate into
//!
//! - q-rep: psi(x) = Sum f_n N_n H_n(x), phi = e^{-x^2/2} psi, solving
//!   `x phi'' + phi' + (sqrt2 eps - x^3) phi = 0`;
//! - z-rep: chi(z) = Sum f_n z^n / sqrt(n!), solving
//!   `z chi'' + (1 + z^2) chi' + (z - eps) chi = 0`.
//!
//! At eps = 0 the closed forms are c U(1/2, 1; x^2) (the square-integrable
//! branch) and M(1/2, 1; -z^2/2) (the holomorphic branch). The q-rep Hermite
//! series converges to the closed form in the weighted L2 metric; pointwise
//! it converges slowly near the logarithmic point x = 0, so every series
//! value carries a truncation estimate measured from the oscillation of its
//! own partial sums, and comparisons are trusted only within that estimate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jacobi::CoefficientSequence;
use crate::special::{
    gauss_legendre_rule, hermite_normalized, integrate_adaptive, kummer_m, kummer_u_with_error, ln_gamma,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QForm {
    /// Bare Hermite series psi.
    Psi,
    /// Gaussian-damped phi = e^{-x^2/2} psi.
    Phi,
}

/// One pointwise series evaluation with its own error bar.
#[derive(Debug, Clone)]
pub struct SeriesValue {
    pub value: f64,
    /// Half the oscillation band of the trailing partial sums plus the last
    /// term; the honest pointwise error scale of the truncated series.
    pub truncation_estimate: f64,
    /// Set when the last 10 retained terms contribute more than 1e-6 of the
    /// value.
    pub tail_warning: bool,
}

/// psi(x) = Sum_{n <= n_max} f_n N_n H_n(x) (times e^{-x^2/2} for phi).
pub fn assemble_q_eigenfunction(seq: &CoefficientSequence, x: f64, form: QForm) -> Result<SeriesValue> {
    if x.abs() > 10.0 {
        return Err(Error::Domain(format!("|x| = {} outside the evaluation domain 10", x.abs())));
    }
    if seq.len() < 201 {
        return Err(Error::Domain(format!("sequence depth {} below minimum 200", seq.len() - 1)));
    }
    let n_max = seq.len() - 1;
    let h = hermite_normalized(n_max, x);
    let mut partial = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0f64;
    let mut last_terms = [0.0f64; 10];
    for n in 0..=n_max {
        let t = seq.values[n] * h[n];
        acc += t;
        partial.push(acc);
        last_terms[n % 10] = t;
    }
    let window = (n_max / 4).max(10);
    let tail = &partial[partial.len() - window..];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &p in tail {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let last_term = (seq.values[n_max] * h[n_max]).abs();
    let mut estimate = 0.5 * (hi - lo) + last_term;
    let mut value = acc;
    if form == QForm::Phi {
        let damp = (-0.5 * x * x).exp();
        value *= damp;
        estimate *= damp;
    }
    let tail_contribution: f64 = last_terms.iter().map(|t| t.abs()).sum();
    let tail_warning = tail_contribution > 1e-6 * value.abs();
    Ok(SeriesValue { value, truncation_estimate: estimate, tail_warning })
}

/// Max scaled residual of the coordinate-space eigenvalue equation over the
/// grid. `QForm::Phi` checks `x f'' + f' + (sqrt2 eps - x^3) f`;
/// `QForm::Psi` checks the transformed `x f'' + (1 - 2x^2) f' + (sqrt2 eps - 2x) f`.
///
/// Derivatives are 5-point central differences (default step 1e-3) with one
/// Richardson level; the grid must avoid the singular point x = 0.
pub fn q_residual<F: Fn(f64) -> f64>(f: F, eps: f64, grid: &[f64], form: QForm) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if grid.iter().any(|&x| x.abs() < 0.1) {
        return Err(Error::Domain("grid must avoid |x| < 0.1; x multiplies the second derivative".into()));
    }
    let h = 1e-3;
    let s2e = std::f64::consts::SQRT_2 * eps;
    let mut max_res = 0.0f64;
    let mut max_val = 0.0f64;
    for &x in grid {
        let v = f(x);
        let d1 = richardson_d1(&f, x, h);
        let d2 = richardson_d2(&f, x, h);
        let res = match form {
            QForm::Phi => x * d2 + d1 + (s2e - x * x * x) * v,
            QForm::Psi => x * d2 + (1.0 - 2.0 * x * x) * d1 + (s2e - 2.0 * x) * v,
        };
        max_res = max_res.max(res.abs());
        max_val = max_val.max(v.abs());
    }
    if max_val == 0.0 {
        return Err(Error::Domain("candidate vanishes identically on the grid".into()));
    }
    Ok(max_res / max_val)
}

fn richardson_d1<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
    (16.0 * d(h) - d(2.0 * h)) / 15.0
}

fn richardson_d2<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let d = |h: f64| {
        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
    };
    (16.0 * d(h) - d(2.0 * h)) / 15.0
}

/// Closed form of the square-integrable branch at eps = 0:
/// psi(x) = c U(1/2, 1; x^2) with c = f0 pi^{-3/4}. Even in x by
/// construction; evaluated for x >= 0.05 (U is logarithmic at 0).
pub fn closed_form_q_eps0(x: f64, f0: f64) -> Result<f64> {
    let ax = x.abs();
    if ax < 0.05 {
        return Err(Error::Domain(format!("|x| = {ax} below the closed-form domain bound 0.05")));
    }
    let c = f0 * std::f64::consts::PI.powf(-0.75);
    let (u, _) = kummer_u_with_error(0.5, 1.0, ax * ax)?;
    Ok(c * u)
}

/// Both sides of the coefficient integral identity
/// f_{2n} = f0 pi^{-3/4} N_{2n} Int U(1/2,1;x^2) H_{2n}(x) e^{-x^2} dx.
#[derive(Debug, Clone)]
pub struct IntegralIdentity {
    /// Closed-form coefficient f_{2n}.
    pub coefficient: f64,
    /// Quadrature value of the right-hand side.
    pub integral_value: f64,
    pub quadrature_error: f64,
}

pub fn integral_identity_check(n: usize, f0: f64) -> Result<IntegralIdentity> {
    if n > 20 {
        return Err(Error::Domain(format!("order {n} outside 0..=20")));
    }
    let coefficient = crate::jacobi::closed_form_eps0((2 * n).max(2), f0)?.values[2 * n];
    // integrand via the normalized Hermite value: N_2n H_2n e^{-x^2} U(x^2),
    // even in x, so integrate twice the positive half; U(x^2) has an
    // integrable logarithmic point at 0 which adaptive bisection absorbs
    let m = 2 * n;
    let integrand = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let h = hermite_normalized(m, x);
        let (u, _) = kummer_u_with_error(0.5, 1.0, x * x).unwrap_or((0.0, 0.0));
        h[m] * (-x * x).exp() * u
    };
    let upper = ((2.0 * m as f64 + 1.0).sqrt() + 8.0).max(8.0);
    let (half, err) = integrate_adaptive(&integrand, 0.0, upper, 1e-10, 1e-12);
    let scale = f0 * std::f64::consts::PI.powf(-0.75);
    let integral_value = scale * 2.0 * half;
    let quadrature_error = scale.abs() * 2.0 * err;
    if quadrature_error > 1e-7 {
        return Err(Error::Domain(format!("quadrature error estimate {quadrature_error:.3e} exceeds 1e-7")));
    }
    Ok(IntegralIdentity { coefficient, integral_value, quadrature_error })
}

/// chi(z) = Sum f_n z^n / sqrt(n!).
pub fn z_series_eigenfunction(seq: &CoefficientSequence, z: Complex64) -> Result<Complex64> {
    if z.norm() > 10.0 {
        return Err(Error::Domain(format!("|z| = {} outside the evaluation domain 10", z.norm())));
    }
    let mut basis = Complex64::new(1.0, 0.0); // z^n / sqrt(n!)
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, &f) in seq.values.iter().enumerate() {
        sum += f * basis;
        basis *= z / ((n + 1) as f64).sqrt();
        if basis.norm() > 1e100 {
            return Err(Error::RecursionOverflow { index: n });
        }
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZClosedForm {
    /// The entire branch M(1/2, 1; -z^2/2).
    KummerM,
    /// The second branch; rejected, it is not holomorphic at z = 0.
    KummerU,
}

/// Closed form of the holomorphic eigenfunction at eps = 0.
pub fn z_closed_form_eps0(form: ZClosedForm, z: Complex64) -> Result<Complex64> {
    match form {
        ZClosedForm::KummerM => kummer_m(0.5, 1.0, -z * z / 2.0),
        ZClosedForm::KummerU => Err(Error::NotHolomorphic),
    }
}

/// Max scaled residual of `z chi'' + (1 + z^2) chi' + (z - eps) chi` over the
/// grid, differentiating along the ray through each point.
pub fn z_residual<F: Fn(Complex64) -> Complex64>(chi: F, eps: f64, grid: &[Complex64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if grid.iter().any(|z| z.norm() < 0.1) {
        return Err(Error::Domain("grid must avoid |z| < 0.1; z multiplies the second derivative".into()));
    }
    let h = 1e-3;
    let mut max_res = 0.0f64;
    let mut max_val = 0.0f64;
    for &z in grid {
        let dir = z / z.norm();
        let g = |t: f64| chi(z + dir * t);
        let d1 = complex_richardson_d1(&g, h) / dir;
        let d2 = complex_richardson_d2(&g, h) / (dir * dir);
        let v = chi(z);
        let res = z * d2 + (Complex64::new(1.0, 0.0) + z * z) * d1 + (z - eps) * v;
        max_res = max_res.max(res.norm());
        max_val = max_val.max(v.norm());
    }
    if max_val == 0.0 {
        return Err(Error::Domain("candidate vanishes identically on the grid".into()));
    }
    Ok(max_res / max_val)
}

fn complex_richardson_d1<G: Fn(f64) -> Complex64>(g: &G, h: f64) -> Complex64 {
    let d = |h: f64| (g(-2.0 * h) - g(-h) * 8.0 + g(h) * 8.0 - g(2.0 * h)) / (12.0 * h);
    (d(h) * 16.0 - d(2.0 * h)) / 15.0
}

fn complex_richardson_d2<G: Fn(f64) -> Complex64>(g: &G, h: f64) -> Complex64 {
    let d = |h: f64| (-g(-2.0 * h) + g(-h) * 16.0 - g(0.0) * 30.0 + g(h) * 16.0 - g(2.0 * h)) / (12.0 * h * h);
    (d(h) * 16.0 - d(2.0 * h)) / 15.0
}

/// Parseval form of the Fock–Bargmann inner product: Sum conj(c1_n) c2_n.
pub fn bargmann_inner(c1: &[Complex64], c2: &[Complex64]) -> Complex64 {
    c1.iter().zip(c2).map(|(a, b)| a.conj() * b).sum()
}

/// The same inner product evaluated as the Gaussian-weighted area integral
/// over a disk of radius `radius` (Gauss–Legendre radially, trapezoid in the
/// angle), together with an analytic bound on the truncated exterior.
pub fn bargmann_inner_quadrature(
    c1: &[Complex64],
    c2: &[Complex64],
    radius: f64,
) -> Result<(Complex64, f64)> {
    let n_max = c1.len().max(c2.len());
    if n_max == 0 {
        return Err(Error::Domain("empty coefficient vectors".into()));
    }
    if radius * radius <= n_max as f64 + 1.0 {
        return Err(Error::Domain(format!(
            "radius^2 = {} must exceed n_max + 1 = {} for a usable tail bound",
            radius * radius,
            n_max + 1
        )));
    }
    let eval = |c: &[Complex64], z: Complex64| -> Complex64 {
        let mut basis = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for (n, &cn) in c.iter().enumerate() {
            sum += cn * basis;
            basis *= z / ((n + 1) as f64).sqrt();
        }
        sum
    };
    // polynomial degree <= n_max-1 per factor; the radial integrand after
    // weighting is a polynomial of degree <= 2 n_max in r times e^{-r^2}
    let n_theta = (4 * n_max).max(64);
    let radial = gauss_legendre_rule(200.min(2 * n_max + 32).max(64))?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&node, &w_r) in radial.nodes.iter().zip(&radial.weights) {
        let r = 0.5 * radius * (node + 1.0);
        let jac = 0.5 * radius;
        let mut theta_acc = Complex64::new(0.0, 0.0);
        for k in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
            let z = Complex64::from_polar(r, th);
            theta_acc += eval(c1, z).conj() * eval(c2, z);
        }
        let theta_mean = theta_acc * (2.0 * std::f64::consts::PI / n_theta as f64);
        acc += w_r * jac * (-r * r).exp() * r * theta_mean;
    }
    let value = acc / std::f64::consts::PI;

    // exterior bound: Sum |c1_n c2_n| Q(n+1, R^2) with
    // Q(n+1, x) <= e^{-x} x^n / n! * 1/(1 - (n+1)/x)
    let x = radius * radius;
    let mut tail = 0.0;
    for n in 0..n_max {
        let a1 = c1.get(n).map(|c| c.norm()).unwrap_or(0.0);
        let a2 = c2.get(n).map(|c| c.norm()).unwrap_or(0.0);
        if a1 == 0.0 || a2 == 0.0 {
            continue;
        }
        let ln_term = -x + n as f64 * x.ln() - ln_gamma(n as f64 + 1.0);
        tail += a1 * a2 * ln_term.exp() / (1.0 - (n as f64 + 1.0) / x);
    }
    Ok((value, tail))
}

/// Fit of the plane-wave eigenvalue of the third-derivative Hamiltonian
/// (2i/3) d^3/dx^3 on e^{ikx}: returns (fitted eigenvalue, max residual).
/// The exact eigenvalue is (2/3) k^3, the spectrum covering the whole line.
pub fn h2_plane_wave_residual(k: f64) -> Result<(f64, f64)> {
    if k.abs() > 20.0 {
        return Err(Error::Domain(format!("|k| = {} outside the check domain 20", k.abs())));
    }
    let f = |x: f64| Complex64::from_polar(1.0, k * x);
    // third-derivative stencil noise ~ eps/h^3 against truncation ~ (kh)^2 k^3
    let h = (4e-15 / k.abs().powi(5).max(1.0)).powf(0.2).clamp(1e-4, 2e-3);
    let n_samples = 801;
    let third = |x: f64| (f(x + 2.0 * h) - f(x + h) * 2.0 + f(x - h) * 2.0 - f(x - 2.0 * h)) / (2.0 * h * h * h);
    let factor = Complex64::new(0.0, 2.0 / 3.0);
    let mut lambda_acc = 0.0f64;
    for i in 0..n_samples {
        let x = -4.0 + 8.0 * i as f64 / (n_samples - 1) as f64;
        let lam = factor * third(x) / f(x);
        lambda_acc += lam.re;
    }
    let lambda = lambda_acc / n_samples as f64;
    let mut max_res = 0.0f64;
    for i in 0..n_samples {
        let x = -4.0 + 8.0 * i as f64 / (n_samples - 1) as f64;
        let res = (factor * third(x) - lambda * f(x)).norm();
        max_res = max_res.max(res);
    }
    Ok((lambda, max_res))
}
