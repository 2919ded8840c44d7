//! Fouled Lagrangians and Hamiltonians of the harmonic oscillator.
//!
//! A fouling transformation keeps the coordinate and replaces the momentum
//! by a polynomial, here the quadratic P = a0 p^2 + a1 q p + a2 q^2. The
//! time-dependent coefficients a_j close under an ODE chain whose constant-
//! frequency solutions are trigonometric; they generate alternative
//! Lagrangians L_2, invariants I_2, and the fouled Hamiltonians K(+-) which
//! reproduce the harmonic equation of motion wherever a0(t) does not vanish.
//! The time-free cubic pair H1 = sqrt(lambda)(p^2 + lambda^2 q^2) q and
//! H2 = 2 p^3 / (3 sqrt(lambda)) carries the same content through a formal
//! rotation: K1 = H1 sin + H2 cos, K2 = -H1 cos + H2 sin.

use serde::Serialize;

use crate::error::{Error, Result};

/// One of the two independent constant-frequency coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    One,
    Two,
}

/// Sign selecting K+ or K-.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KSign {
    Plus,
    Minus,
}

/// Constant-frequency fouled model: lambda > 0 plus the closed-form
/// coefficient family of the chosen variant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FouledModel {
    pub lambda: f64,
    pub variant: Variant,
}

impl FouledModel {
    pub fn new(lambda: f64, variant: Variant) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must be positive and finite")));
        }
        Ok(FouledModel { lambda, variant })
    }

    pub fn a0(&self, t: f64) -> f64 {
        let l = self.lambda;
        match self.variant {
            Variant::One => (l * t).cos() / l.sqrt(),
            Variant::Two => (l * t).sin() / l.sqrt(),
        }
    }

    pub fn a1(&self, t: f64) -> f64 {
        let l = self.lambda;
        match self.variant {
            Variant::One => 2.0 * l.sqrt() * (l * t).sin(),
            Variant::Two => -2.0 * l.sqrt() * (l * t).cos(),
        }
    }

    pub fn a2(&self, t: f64) -> f64 {
        let l = self.lambda;
        match self.variant {
            Variant::One => l.powf(1.5) * (l * t).cos(),
            Variant::Two => l.powf(1.5) * (l * t).sin(),
        }
    }

    pub fn a2_dot(&self, t: f64) -> f64 {
        let l = self.lambda;
        match self.variant {
            Variant::One => -l.powf(2.5) * (l * t).sin(),
            Variant::Two => l.powf(2.5) * (l * t).cos(),
        }
    }

    /// Fouled momentum P = a0 p^2 + a1 q p + a2 q^2.
    pub fn momentum(&self, q: f64, p: f64, t: f64) -> f64 {
        self.a0(t) * p * p + self.a1(t) * q * p + self.a2(t) * q * q
    }

    /// Invariant I_2 = 2 a0 p + a1 q.
    pub fn invariant(&self, q: f64, p: f64, t: f64) -> f64 {
        2.0 * self.a0(t) * p + self.a1(t) * q
    }

    /// L_2 = a0 qd^3/3 + a1 qd^2 q / 2 + a2 qd q^2 + (a2d - lambda^2 a1) q^3 / 3.
    pub fn lagrangian(&self, q: f64, qdot: f64, t: f64) -> f64 {
        let a = [self.a0(t), self.a1(t), self.a2(t)];
        fouled_lagrangian(&a, self.a2_dot(t), self.lambda * self.lambda, q, qdot)
    }
}

/// General-degree fouled Lagrangian
/// `L_n = Sum_j a_j qd^{n-j+1} q^j / (n-j+1) + (a_n' - w^2 a_{n-1}) q^{n+1}/(n+1)`
/// from the coefficient values at one instant (`a` holds a_0..a_n, `a_n_dot`
/// its time derivative).
pub fn fouled_lagrangian(a: &[f64], a_n_dot: f64, omega_sq: f64, q: f64, qdot: f64) -> f64 {
    let n = a.len() - 1;
    let mut l = 0.0;
    for (j, &aj) in a.iter().enumerate() {
        let power = (n - j + 1) as i32;
        l += aj * qdot.powi(power) * q.powi(j as i32) / power as f64;
    }
    let prev = if n == 0 { 0.0 } else { a[n - 1] };
    l + (a_n_dot - omega_sq * prev) * q.powi(n as i32 + 1) / (n as f64 + 1.0)
}

/// General-degree invariant `I_n = Sum_j (n-j) a_j p^{n-j-1} q^j` (the j = n
/// term carries a zero factor and is skipped).
pub fn invariant(a: &[f64], q: f64, p: f64) -> f64 {
    let n = a.len() - 1;
    let mut acc = 0.0;
    for (j, &aj) in a.iter().enumerate().take(n) {
        acc += (n - j) as f64 * aj * p.powi((n - j) as i32 - 1) * q.powi(j as i32);
    }
    acc
}

/// Coefficient trajectories of the closed chain a_0..a_{n-1}.
#[derive(Debug, Clone)]
pub struct CoefficientTrajectory {
    pub times: Vec<f64>,
    /// One row of coefficient values per time.
    pub coefficients: Vec<Vec<f64>>,
}

/// RK4 integration of the compatibility chain
/// `a0' = -((n-1)/n) a1`,
/// `aj' = (n-j+1) w^2 a_{j-1} - (j+1)((n-j-1)/(n-j)) a_{j+1}`, j = 1..n-1.
///
/// The top coefficient a_n is driven only through the a_{n-1} term (its own
/// equation carries the factor n-j-1 = 0), so the chain closes at j = n-1
/// and a_n is not integrated.
pub fn coefficient_system(
    n: usize,
    omega: impl Fn(f64) -> f64,
    init: &[f64],
    t_span: (f64, f64),
    dt: f64,
) -> Result<CoefficientTrajectory> {
    if n < 1 {
        return Err(Error::Domain("degree n must be at least 1".into()));
    }
    if init.len() != n {
        return Err(Error::Domain(format!("need {n} initial coefficients a_0..a_{}, got {}", n - 1, init.len())));
    }
    if !(dt > 0.0) || t_span.1 <= t_span.0 {
        return Err(Error::Domain("invalid time span or step".into()));
    }
    let nf = n as f64;
    let deriv = |t: f64, a: &[f64]| -> Vec<f64> {
        let w2 = omega(t) * omega(t);
        let mut d = vec![0.0; n];
        d[0] = if n == 1 { 0.0 } else { -(nf - 1.0) / nf * a[1] };
        for j in 1..n {
            let jf = j as f64;
            let up = (nf - jf + 1.0) * w2 * a[j - 1];
            let down = if j + 1 < n {
                (jf + 1.0) * (nf - jf - 1.0) / (nf - jf) * a[j + 1]
            } else {
                0.0 // j = n-1: the a_n coupling carries the factor n-j-1 = 0
            };
            d[j] = up - down;
        }
        d
    };
    let steps = ((t_span.1 - t_span.0) / dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut coefficients = Vec::with_capacity(steps + 1);
    let mut y = init.to_vec();
    let mut t = t_span.0;
    times.push(t);
    coefficients.push(y.clone());
    for _ in 0..steps {
        let h = dt.min(t_span.1 - t);
        y = rk4_step(&deriv, t, &y, h);
        t += h;
        times.push(t);
        coefficients.push(y.clone());
    }
    Ok(CoefficientTrajectory { times, coefficients })
}

fn rk4_step(f: &impl Fn(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let k1 = f(t, y);
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
    let k2 = f(t + 0.5 * h, &y2);
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
    let k3 = f(t + 0.5 * h, &y3);
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
    let k4 = f(t + h, &y4);
    y.iter()
        .enumerate()
        .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Phase-space point of the harmonic flow (p is the velocity-momentum).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassicalPoint {
    pub q: f64,
    pub p: f64,
    pub t: f64,
}

/// General solution parameterized by the two invariants:
/// q = (I1 sin - I2 cos)/(2 sqrt(lambda)), p = sqrt(lambda)(I1 cos + I2 sin)/2;
/// the conventional energy is H0 = lambda (I1^2 + I2^2)/8.
pub fn trajectory_from_invariants(i1: f64, i2: f64, t: f64, lambda: f64) -> Result<ClassicalPoint> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let (s, c) = ((lambda * t).sin(), (lambda * t).cos());
    Ok(ClassicalPoint {
        q: (i1 * s - i2 * c) / (2.0 * lambda.sqrt()),
        p: lambda.sqrt() * (i1 * c + i2 * s) / 2.0,
        t,
    })
}

pub fn conventional_hamiltonian(q: f64, p: f64, lambda: f64) -> f64 {
    0.5 * (p * p + lambda * lambda * q * q)
}

/// Evaluation of a fouled Hamiltonian at a (q, P, t) point, with the two
/// independent routes it must agree with.
#[derive(Debug, Clone, Serialize)]
pub struct KEvaluation {
    /// Value from the full bracket form.
    pub value: f64,
    /// Value from the simplified cubic form at the recovered velocity.
    pub simplified: f64,
    /// Value from the Legendre route P p - L_2.
    pub legendre: f64,
    /// Velocity branch recovered from P.
    pub p_branch: f64,
    pub max_discrepancy: f64,
}

/// Fouled Hamiltonian
/// `K(+-) = -(a1/2a0) q P +- (2/3) a0 B^{3/2} + [(a1/6a0)(3a2 - a1^2/2a0) - (a2' - l^2 a1)/3] q^3`
/// with `B = (a1^2/4a0^2 - a2/a0) q^2 + P/a0`.
///
/// B equals (I2/2a0)^2 on dynamical points and is clamped to zero when
/// rounding pushes it below; more negative values are a domain error. The
/// zeros of a0(t) are coordinate singularities of the fouling map, so
/// |a0| <= 1e-6 is rejected.
pub fn fouled_hamiltonian_k(q: f64, p_fouled: f64, t: f64, model: &FouledModel, sign: KSign) -> Result<KEvaluation> {
    let a0 = model.a0(t);
    if a0.abs() <= 1e-6 {
        return Err(Error::SingularTime { t, a0 });
    }
    let a1 = model.a1(t);
    let a2 = model.a2(t);
    let l2 = model.lambda * model.lambda;
    let mut bracket = (a1 * a1 / (4.0 * a0 * a0) - a2 / a0) * q * q + p_fouled / a0;
    if bracket < 0.0 {
        if bracket < -1e-12 {
            return Err(Error::Domain(format!("bracket argument {bracket:.3e} below the -1e-12 clamp")));
        }
        bracket = 0.0;
    }
    let s = match sign {
        KSign::Plus => 1.0,
        KSign::Minus => -1.0,
    };
    let cubic = (a1 / (6.0 * a0)) * (3.0 * a2 - a1 * a1 / (2.0 * a0)) - (model.a2_dot(t) - l2 * a1) / 3.0;
    let value = -(a1 / (2.0 * a0)) * q * p_fouled + s * (2.0 / 3.0) * a0 * bracket.powf(1.5) + cubic * q * q * q;

    // velocity branch: p = -a1 q / 2a0 + sign * sqrt(B)
    let p_branch = -a1 * q / (2.0 * a0) + s * bracket.sqrt();
    let simplified = match sign {
        KSign::Plus => 0.5 * a1 * (p_branch * p_branch + l2 * q * q) * q + (2.0 / 3.0) * a0 * p_branch.powi(3),
        KSign::Minus => {
            // expressed at the + branch velocity
            let p = -a1 * q / (2.0 * a0) + bracket.sqrt();
            -1.5 * a1 * p * p * q - (a1 * a1 / a0) * q * q * p
                + (0.5 * a1 * l2 - a1.powi(3) / (6.0 * a0 * a0)) * q * q * q
                - (2.0 / 3.0) * a0 * p.powi(3)
        }
    };
    let legendre = p_fouled * p_branch - model.lagrangian(q, p_branch, t);
    let max_discrepancy = (value - simplified).abs().max((value - legendre).abs());
    Ok(KEvaluation { value, simplified, legendre, p_branch, max_discrepancy })
}

#[derive(Debug, Clone, Serialize)]
pub struct HamiltonCheck {
    pub max_residual: f64,
    pub points_used: usize,
    /// Set when |I2| is too small for the bracket square root to be
    /// differentiable; the equation holds trivially there.
    pub skipped_degenerate: bool,
}

/// Residuals of Hamilton's equations `qd = dK/dP`, `Pd = -dK/dq` for K(+-)
/// along the exact harmonic trajectory with invariants (i1, i2). Partial
/// derivatives are central differences with relative step 1e-6.
///
/// Times are filtered to |a0(t)| > 0.2 and to the windows where the chosen
/// sign is the generator of the motion: the fouling map (q, p) -> (q, P) is
/// two-to-one, the physical momentum branch is sign(I2 / 2a0), and the two
/// branches swap at every zero of a0. On the complementary windows the same
/// trajectory belongs to the flow of the other K.
pub fn hamilton_residual(
    model: &FouledModel,
    sign: KSign,
    i1: f64,
    i2: f64,
    times: &[f64],
) -> Result<HamiltonCheck> {
    let l = model.lambda;
    let branch = match sign {
        KSign::Plus => 1.0,
        KSign::Minus => -1.0,
    };
    let first = *times.first().ok_or(Error::EmptyTimeSet)?;
    let pt0 = trajectory_from_invariants(i1, i2, first, l)?;
    let invariant_value = model.invariant(pt0.q, pt0.p, first);
    if invariant_value.abs() < 1e-8 {
        return Ok(HamiltonCheck { max_residual: 0.0, points_used: 0, skipped_degenerate: true });
    }
    let admissible: Vec<f64> = times
        .iter()
        .copied()
        .filter(|&t| model.a0(t).abs() > 0.2 && branch * invariant_value / model.a0(t) > 0.0)
        .collect();
    if admissible.is_empty() {
        return Err(Error::EmptyTimeSet);
    }
    let mut max_residual = 0.0f64;
    for &t in &admissible {
        let pt = trajectory_from_invariants(i1, i2, t, l)?;
        let (q, p) = (pt.q, pt.p);
        let cap_p = model.momentum(q, p, t);
        // analytic flow derivatives: qd = p, pd = -l^2 q
        let qdot = p;
        let pdot = -l * l * q;
        let a0d = -0.5 * model.a1(t);
        let a1d = 2.0 * l * l * model.a0(t);
        let cap_p_dot = a0d * p * p
            + 2.0 * model.a0(t) * p * pdot
            + a1d * q * p
            + model.a1(t) * (qdot * p + q * pdot)
            + model.a2_dot(t) * q * q
            + 2.0 * model.a2(t) * q * qdot;

        let hq = 1e-6 * q.abs().max(1.0);
        let hp = 1e-6 * cap_p.abs().max(1.0);
        let k = |q: f64, pp: f64| fouled_hamiltonian_k(q, pp, t, model, sign).map(|e| e.value);
        let dk_dp = (k(q, cap_p + hp)? - k(q, cap_p - hp)?) / (2.0 * hp);
        let dk_dq = (k(q + hq, cap_p)? - k(q - hq, cap_p)?) / (2.0 * hq);
        let r1 = (qdot - dk_dp).abs();
        let r2 = (cap_p_dot + dk_dq).abs();
        max_residual = max_residual.max(r1).max(r2);
    }
    Ok(HamiltonCheck { max_residual, points_used: admissible.len(), skipped_degenerate: false })
}

/// Integrate (q, P) under the fouled Hamilton equations (numerical partials
/// inside RK4) from `t0` to `t1`, staying inside one |a0| > 0.2 window.
pub fn integrate_fouled(
    model: &FouledModel,
    sign: KSign,
    q0: f64,
    p_fouled0: f64,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    if !(dt > 0.0) || t_span.1 <= t_span.0 {
        return Err(Error::Domain("invalid time span or step".into()));
    }
    let deriv = |t: f64, y: &[f64]| -> Vec<f64> {
        let (q, pp) = (y[0], y[1]);
        let hq = 1e-6 * q.abs().max(1.0);
        let hp = 1e-6 * pp.abs().max(1.0);
        let k = |q: f64, pp: f64| {
            fouled_hamiltonian_k(q, pp, t, model, sign).map(|e| e.value).unwrap_or(f64::NAN)
        };
        vec![
            (k(q, pp + hp) - k(q, pp - hp)) / (2.0 * hp),
            -(k(q + hq, pp) - k(q - hq, pp)) / (2.0 * hq),
        ]
    };
    let steps = ((t_span.1 - t_span.0) / dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = vec![q0, p_fouled0];
    let mut t = t_span.0;
    out.push((t, y[0], y[1]));
    for _ in 0..steps {
        if model.a0(t).abs() <= 0.2 {
            return Err(Error::SingularTime { t, a0: model.a0(t) });
        }
        let h = dt.min(t_span.1 - t);
        y = rk4_step(&deriv, t, &y, h);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("integration blew up at t = {t}")));
        }
        t += h;
        out.push((t, y[0], y[1]));
    }
    Ok(out)
}

/// The rotation pair: K1 = H1 sin + H2 cos, K2 = -H1 cos + H2 sin with
/// H1 = sqrt(l)(p^2 + l^2 q^2) q and H2 = 2 p^3/(3 sqrt(l)).
pub fn k1k2_eval(q: f64, p: f64, t: f64, lambda: f64) -> (f64, f64, f64, f64) {
    let h1 = lambda.sqrt() * (p * p + lambda * lambda * q * q) * q;
    let h2 = 2.0 / (3.0 * lambda.sqrt()) * p * p * p;
    let (s, c) = ((lambda * t).sin(), (lambda * t).cos());
    (h1 * s + h2 * c, -h1 * c + h2 * s, h1, h2)
}

/// Central-difference Poisson bracket dF/dq dG/dp - dF/dp dG/dq at (q, p),
/// with a two-step Richardson consistency guard.
pub fn poisson_bracket<F, G>(f: F, g: G, q: f64, p: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    let eval = |h: f64| -> f64 {
        let fq = (f(q + h, p) - f(q - h, p)) / (2.0 * h);
        let fp = (f(q, p + h) - f(q, p - h)) / (2.0 * h);
        let gq = (g(q + h, p) - g(q - h, p)) / (2.0 * h);
        let gp = (g(q, p + h) - g(q, p - h)) / (2.0 * h);
        fq * gp - fp * gq
    };
    let h = 1e-5 * q.abs().max(p.abs()).max(1.0);
    let coarse = eval(2.0 * h);
    let fine = eval(h);
    // central differences are O(h^2): one Richardson level
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let scale = fine.abs().max(coarse.abs()).max(1.0);
    if (fine - coarse).abs() > 1e-6 * scale.max(1e3) {
        return Err(Error::StepSize(format!(
            "bracket estimates disagree: {fine} vs {coarse} at (q,p) = ({q},{p})"
        )));
    }
    Ok(extrapolated)
}

/// Observables whose evolution equations are checked along the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    K1,
    K2,
    H1,
    H2,
    H0,
}

impl Observable {
    pub fn value(&self, q: f64, p: f64, t: f64, lambda: f64) -> f64 {
        let (k1, k2, h1, h2) = k1k2_eval(q, p, t, lambda);
        match self {
            Observable::K1 => k1,
            Observable::K2 => k2,
            Observable::H1 => h1,
            Observable::H2 => h2,
            Observable::H0 => conventional_hamiltonian(q, p, lambda),
        }
    }
}

/// Max defect of `dF/dt = {F, H0} + dF/dt|_explicit` along the harmonic flow
/// with invariants (i1, i2).
pub fn evolution_check(
    which: Observable,
    i1: f64,
    i2: f64,
    lambda: f64,
    times: &[f64],
) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptyTimeSet);
    }
    let h0 = |q: f64, p: f64| conventional_hamiltonian(q, p, lambda);
    let mut max_defect = 0.0f64;
    let dt = 1e-5;
    for &t in times {
        let at = |t: f64| -> Result<f64> {
            let pt = trajectory_from_invariants(i1, i2, t, lambda)?;
            Ok(which.value(pt.q, pt.p, t, lambda))
        };
        let total = (at(t + dt)? - at(t - dt)?) / (2.0 * dt);
        let pt = trajectory_from_invariants(i1, i2, t, lambda)?;
        let bracket = poisson_bracket(|q, p| which.value(q, p, t, lambda), h0, pt.q, pt.p)?;
        let explicit = (which.value(pt.q, pt.p, t + dt, lambda) - which.value(pt.q, pt.p, t - dt, lambda)) / (2.0 * dt);
        max_defect = max_defect.max((total - (bracket + explicit)).abs());
    }
    Ok(max_defect)
}

/// State of the auxiliary Ermakov system.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErmakovState {
    pub sigma: f64,
    pub sigma_dot: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct ErmakovTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ErmakovState>,
}

/// RK4 on `sigma'' + w^2 sigma = 1/(4 sigma^3)`, `theta' = 1/sigma^2`.
/// The constant-frequency fixed point is sigma = 1/sqrt(2 w), theta = 2 w t.
pub fn ermakov_solve(
    omega: impl Fn(f64) -> f64,
    state0: ErmakovState,
    t_span: (f64, f64),
    dt: f64,
) -> Result<ErmakovTrajectory> {
    if !(state0.sigma > 0.0) {
        return Err(Error::NonPositiveSigma { t: t_span.0, sigma: state0.sigma });
    }
    if !(dt > 0.0) || t_span.1 <= t_span.0 {
        return Err(Error::Domain("invalid time span or step".into()));
    }
    let deriv = |t: f64, y: &[f64]| -> Vec<f64> {
        let w = omega(t);
        vec![y[1], 1.0 / (4.0 * y[0].powi(3)) - w * w * y[0], 1.0 / (y[0] * y[0])]
    };
    let steps = ((t_span.1 - t_span.0) / dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = vec![state0.sigma, state0.sigma_dot, state0.theta];
    let mut t = t_span.0;
    times.push(t);
    states.push(state0);
    for _ in 0..steps {
        let h = dt.min(t_span.1 - t);
        y = rk4_step(&deriv, t, &y, h);
        t += h;
        if !(y[0] > 0.0) {
            return Err(Error::NonPositiveSigma { t, sigma: y[0] });
        }
        times.push(t);
        states.push(ErmakovState { sigma: y[0], sigma_dot: y[1], theta: y[2] });
    }
    Ok(ErmakovTrajectory { times, states })
}

/// a0(t) = sqrt2 sigma (c1 cos(theta/2) + c2 sin(theta/2)); exact solution of
/// the envelope equation for any Ermakov branch.
pub fn reconstruct_a0(traj: &ErmakovTrajectory, c1: f64, c2: f64) -> Vec<f64> {
    traj.states
        .iter()
        .map(|s| std::f64::consts::SQRT_2 * s.sigma * (c1 * (0.5 * s.theta).cos() + c2 * (0.5 * s.theta).sin()))
        .collect()
}

/// Max residual of `a'' + w^2 a = 0` for a uniformly sampled signal, by
/// second differences.
pub fn envelope_residual(times: &[f64], values: &[f64], omega: impl Fn(f64) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 1..times.len() - 1 {
        let h = times[i + 1] - times[i];
        let second = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
        let w = omega(times[i]);
        worst = worst.max((second + w * w * values[i]).abs());
    }
    worst
}
