//! Truncated Fock-space operator engine.
//!
//! Everything lives on the hard-truncated number basis |0>..|N-1>: the
//! raising entry that would leave the basis is dropped. Identities that
//! involve only lowering, diagonal factors, or stay inside an interior block
//! are then exact on the truncation; assertions confine themselves to those
//! blocks (default interior margin 4).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tags for the operators the engine can build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    /// Lowering operator a.
    Lower,
    /// Raising operator a-dagger.
    Raise,
    /// a-dagger a + 1/2.
    H0,
    /// sqrt2 (a+2 a + a+ a2 + a+ + a): the cubic coordinate Hamiltonian.
    H1,
    /// H3 + H4: the cubic momentum Hamiltonian.
    H2,
    /// (i/(3 sqrt2)) (a3 - a+3): the subharmonic generator piece.
    H3,
    /// (i/sqrt2) (a+2 a - a+ a2 + a+ - a).
    H4,
    /// (1/(3 sqrt2)) (a3 + a+3).
    H5,
    /// a+2 a + a+ a2 + a+ + a: the Jacobi-operator realization.
    A,
    /// a+ a + 1/2.
    J0,
    /// a+2 a + a+.
    JPlus,
    /// -(a+ a2 + a).
    JMinus,
    /// J+ - J- - eps.
    Omega(f64),
    Casimir,
    Derived,
}

impl OperatorKind {
    /// Operators whose matrices must be hermitian up to rounding.
    pub fn is_hermitian(self) -> bool {
        matches!(
            self,
            OperatorKind::H0
                | OperatorKind::H1
                | OperatorKind::H2
                | OperatorKind::H3
                | OperatorKind::H4
                | OperatorKind::H5
                | OperatorKind::A
                | OperatorKind::J0
                | OperatorKind::Omega(_)
        )
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Lower => write!(f, "a"),
            OperatorKind::Raise => write!(f, "a+"),
            OperatorKind::H0 => write!(f, "H0"),
            OperatorKind::H1 => write!(f, "H1"),
            OperatorKind::H2 => write!(f, "H2"),
            OperatorKind::H3 => write!(f, "H3"),
            OperatorKind::H4 => write!(f, "H4"),
            OperatorKind::H5 => write!(f, "H5"),
            OperatorKind::A => write!(f, "A"),
            OperatorKind::J0 => write!(f, "J0"),
            OperatorKind::JPlus => write!(f, "J+"),
            OperatorKind::JMinus => write!(f, "J-"),
            OperatorKind::Omega(e) => write!(f, "Omega({e})"),
            OperatorKind::Casimir => write!(f, "C"),
            OperatorKind::Derived => write!(f, "derived"),
        }
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h0" => Ok(OperatorKind::H0),
            "h1" => Ok(OperatorKind::H1),
            "h2" => Ok(OperatorKind::H2),
            "h3" => Ok(OperatorKind::H3),
            "h4" => Ok(OperatorKind::H4),
            "h5" => Ok(OperatorKind::H5),
            "a" => Ok(OperatorKind::A),
            "j0" => Ok(OperatorKind::J0),
            "j+" | "jplus" => Ok(OperatorKind::JPlus),
            "j-" | "jminus" => Ok(OperatorKind::JMinus),
            "omega" => Ok(OperatorKind::Omega(0.0)),
            other => Err(Error::UnknownOperatorKind(other.to_string())),
        }
    }
}

/// Dense complex operator on the truncated number basis.
#[derive(Debug, Clone)]
pub struct FockOperator {
    cutoff: usize,
    kind: OperatorKind,
    entries: CMatrix,
}

impl FockOperator {
    pub fn from_matrix(kind: OperatorKind, entries: CMatrix) -> Self {
        assert_eq!(entries.nrows(), entries.ncols());
        FockOperator { cutoff: entries.nrows(), kind, entries }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    /// max |M - M+| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    /// Sorted list of diagonals (m - n) that carry a nonzero entry.
    pub fn bands(&self) -> Vec<i64> {
        let n = self.cutoff as i64;
        let mut out = Vec::new();
        for band in -(n - 1)..n {
            let mut nonzero = false;
            for m in 0..self.cutoff {
                let k = m as i64 - band;
                if k >= 0 && k < n && self.entries[(m, k as usize)].norm() != 0.0 {
                    nonzero = true;
                    break;
                }
            }
            if nonzero {
                out.push(band);
            }
        }
        out
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        if state.cutoff != self.cutoff {
            return Err(Error::CutoffMismatch { left: self.cutoff, right: state.cutoff });
        }
        Ok(FockState { cutoff: self.cutoff, amplitudes: &self.entries * &state.amplitudes })
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// max |entry| restricted to rows and columns <= cutoff-1-margin.
pub fn interior_max_abs(m: &CMatrix, margin: usize) -> f64 {
    let n = m.nrows();
    if margin >= n {
        return 0.0;
    }
    let k = n - margin;
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Ladder pair on the truncated basis: a|n> = sqrt(n)|n-1>,
/// a+|n> = sqrt(n+1)|n+1> with the out-of-basis raise dropped.
pub fn make_ladder(n: usize) -> Result<(FockOperator, FockOperator)> {
    if n < 2 {
        return Err(Error::CutoffTooSmall { given: n, min: 2 });
    }
    let (a, adag) = ladder_matrices(n);
    Ok((
        FockOperator::from_matrix(OperatorKind::Lower, a),
        FockOperator::from_matrix(OperatorKind::Raise, adag),
    ))
}

fn ladder_matrices(n: usize) -> (CMatrix, CMatrix) {
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    let adag = a.transpose();
    (a, adag)
}

/// a+2 a + a+ (raises with (n+1)^{3/2}) and a+ a2 + a (lowers with n^{3/2}),
/// built by explicit truncated products so that every composite below shares
/// the same floating-point path.
fn cubic_parts(n: usize) -> (CMatrix, CMatrix) {
    let (a, adag) = ladder_matrices(n);
    let raise = &adag * &adag * &a + &adag;
    let lower = &adag * &a * &a + &a;
    (raise, lower)
}

fn number_plus_half(n: usize) -> CMatrix {
    let (a, adag) = ladder_matrices(n);
    &adag * &a + CMatrix::identity(n, n) * Complex64::new(0.5, 0.0)
}

/// Build one of the named operators at cutoff `n`.
pub fn build_operator(kind: OperatorKind, n: usize) -> Result<FockOperator> {
    if n < 4 {
        return Err(Error::CutoffTooSmall { given: n, min: 4 });
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let entries = match kind {
        OperatorKind::Lower | OperatorKind::Raise | OperatorKind::Casimir | OperatorKind::Derived => {
            return Err(Error::UnknownOperatorKind(format!("{kind} is not buildable through build_operator")))
        }
        OperatorKind::H0 | OperatorKind::J0 => number_plus_half(n),
        OperatorKind::A => {
            let (raise, lower) = cubic_parts(n);
            raise + lower
        }
        OperatorKind::H1 => {
            let (raise, lower) = cubic_parts(n);
            (raise + lower) * Complex64::new(sqrt2, 0.0)
        }
        OperatorKind::JPlus => cubic_parts(n).0,
        OperatorKind::JMinus => -cubic_parts(n).1,
        OperatorKind::Omega(eps) => {
            let (raise, lower) = cubic_parts(n);
            raise + lower - CMatrix::identity(n, n) * Complex64::new(eps, 0.0)
        }
        OperatorKind::H4 => {
            let (raise, lower) = cubic_parts(n);
            (raise - lower) * (I / sqrt2)
        }
        OperatorKind::H3 => {
            let (a, adag) = ladder_matrices(n);
            (&a * &a * &a - &adag * &adag * &adag) * (I / (3.0 * sqrt2))
        }
        OperatorKind::H5 => {
            let (a, adag) = ladder_matrices(n);
            (&a * &a * &a + &adag * &adag * &adag) * Complex64::new(1.0 / (3.0 * sqrt2), 0.0)
        }
        // H2 = H3 + H4 entrywise by construction
        OperatorKind::H2 => {
            build_operator(OperatorKind::H3, n)?.entries + build_operator(OperatorKind::H4, n)?.entries
        }
    };
    Ok(FockOperator::from_matrix(kind, entries))
}

/// XY - YX.
pub fn commutator(x: &FockOperator, y: &FockOperator) -> Result<FockOperator> {
    if x.cutoff != y.cutoff {
        return Err(Error::CutoffMismatch { left: x.cutoff, right: y.cutoff });
    }
    let m = &x.entries * &y.entries - &y.entries * &x.entries;
    Ok(FockOperator::from_matrix(OperatorKind::Derived, m))
}

/// One verified commutation relation.
#[derive(Debug, Clone, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    /// "full" or "interior(margin)".
    pub block: String,
    /// Max-entry deviation divided by max(1, max-entry of the reference side).
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub cutoff: usize,
    pub margin: usize,
    pub relations: Vec<RelationCheck>,
}

impl AlgebraReport {
    fn new(cutoff: usize, margin: usize) -> Self {
        AlgebraReport { cutoff, margin, relations: Vec::new() }
    }

    fn push(&mut self, relation: &str, block: &str, residual: f64, tolerance: f64) {
        self.relations.push(RelationCheck {
            relation: relation.to_string(),
            block: block.to_string(),
            residual,
            tolerance,
            pass: residual < tolerance,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.relations.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.relations.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

fn scaled(defect: f64, reference: f64) -> f64 {
    defect / reference.max(1.0)
}

/// Verify the quadratic algebra [J0, J+-] = +-J+- (full matrix) and
/// [J+, J-] = 1/4 + 3 J0^2 (interior block), at tolerance 1e-12.
pub fn verify_w32(n: usize, margin: usize) -> Result<AlgebraReport> {
    if margin < 2 {
        return Err(Error::Domain(format!("margin {margin} below minimum 2")));
    }
    if n < margin + 4 {
        return Err(Error::CutoffTooSmall { given: n, min: margin + 4 });
    }
    let j0 = build_operator(OperatorKind::J0, n)?;
    let jp = build_operator(OperatorKind::JPlus, n)?;
    let jm = build_operator(OperatorKind::JMinus, n)?;
    let tol = 1e-12;

    let mut report = AlgebraReport::new(n, margin);
    let d1 = commutator(&j0, &jp)?.entries - &jp.entries;
    report.push("[J0,J+] - J+", "full", scaled(max_abs(&d1), jp.max_abs()), tol);
    let d2 = commutator(&j0, &jm)?.entries + &jm.entries;
    report.push("[J0,J-] + J-", "full", scaled(max_abs(&d2), jm.max_abs()), tol);

    let rhs = CMatrix::identity(n, n) * Complex64::new(0.25, 0.0)
        + &j0.entries * &j0.entries * Complex64::new(3.0, 0.0);
    let d3 = commutator(&jp, &jm)?.entries - rhs.clone();
    report.push(
        "[J+,J-] - (1/4 + 3 J0^2)",
        &format!("interior({margin})"),
        scaled(interior_max_abs(&d3, margin), interior_max_abs(&rhs, margin)),
        tol,
    );
    Ok(report)
}

/// Output of the Casimir construction.
#[derive(Debug, Clone)]
pub struct CasimirReport {
    pub casimir: FockOperator,
    pub algebra: AlgebraReport,
    /// Deformation parameter recovered from the measured [N+, N-].
    pub delta: Complex64,
}

/// Rescaled generators N0 = J0 - i/(2 sqrt3), N- = J-/k, N+ = J+/k with
/// k = sqrt(i sqrt3 / 2) (the constraint fixes only the product k1 k2; the
/// symmetric split is one isomorphic choice), and the Casimir
/// C = N- N+ + N0 (N0 + 1) [1 - (i/sqrt3)(2 N0 + 1)].
pub fn build_casimir(n: usize, margin: usize) -> Result<CasimirReport> {
    if n < 8 {
        return Err(Error::CutoffTooSmall { given: n, min: 8 });
    }
    if margin < 2 || n < margin + 4 {
        return Err(Error::Domain(format!("margin {margin} invalid for cutoff {n}")));
    }
    let j0 = build_operator(OperatorKind::J0, n)?;
    let jp = build_operator(OperatorKind::JPlus, n)?;
    let jm = build_operator(OperatorKind::JMinus, n)?;

    let sqrt3 = 3.0f64.sqrt();
    let k = (I * sqrt3 / 2.0).sqrt(); // principal root
    let id = CMatrix::identity(n, n);
    let n0 = &j0.entries - &id * (I / (2.0 * sqrt3));
    let nplus = &jp.entries / k;
    let nminus = &jm.entries / k;

    let two = Complex64::new(2.0, 0.0);
    let poly = &id + (&n0 * two + &id) * (-I / sqrt3); // 1 - (i/sqrt3)(2N0+1)
    let c = &nminus * &nplus + &n0 * (&n0 + &id) * poly;

    let delta_exact = -2.0 * I * sqrt3;
    let tol_alg = 1e-12;
    let tol_cas = 1e-10;
    let mut report = AlgebraReport::new(n, margin);

    let comm = |x: &CMatrix, y: &CMatrix| x * y - y * x;
    let d1 = comm(&n0, &nplus) - &nplus;
    report.push("[N0,N+] - N+", "full", scaled(max_abs(&d1), max_abs(&nplus)), tol_alg);
    let d2 = comm(&n0, &nminus) + &nminus;
    report.push("[N0,N-] + N-", "full", scaled(max_abs(&d2), max_abs(&nminus)), tol_alg);

    let rhs = &n0 * two + &n0 * &n0 * delta_exact;
    let measured = comm(&nplus, &nminus);
    let d3 = &measured - &rhs;
    report.push(
        "[N+,N-] - (2 N0 + delta N0^2)",
        &format!("interior({margin})"),
        scaled(interior_max_abs(&d3, margin), interior_max_abs(&rhs, margin)),
        tol_alg,
    );

    // fit delta from the measured commutator on the interior diagonal
    let interior = n - margin;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..interior {
        let n0i = n0[(i, i)];
        acc += (measured[(i, i)] - 2.0 * n0i) / (n0i * n0i);
    }
    let delta = acc / interior as f64;

    // The two halves of C carry entries of order n^3 whose imaginary parts
    // cancel entrywise, so the commutant defect is meaningful relative to
    // the construction magnitude, not to the (order-one) Casimir itself.
    let construction_scale = interior_max_abs(&(&nminus * &nplus), margin);
    for (label, gen) in [("N0", &n0), ("N+", &nplus), ("N-", &nminus)] {
        let d = comm(&c, gen);
        report.push(
            &format!("[C,{label}]"),
            &format!("interior({margin})"),
            scaled(interior_max_abs(&d, margin), construction_scale * max_abs(gen)),
            tol_cas,
        );
    }

    Ok(CasimirReport {
        casimir: FockOperator::from_matrix(OperatorKind::Casimir, c),
        algebra: report,
        delta,
    })
}

/// The four combinations that stay constant under the free evolution.
#[derive(Debug)]
pub struct HeisenbergConstants {
    pub t: f64,
    pub h1_tilde: FockOperator,
    pub h4_tilde: FockOperator,
    pub h3_tilde: FockOperator,
    pub h5_tilde: FockOperator,
}

/// Conjugate by the free evolution (entry (m,n) picks the phase e^{it(m-n)},
/// i.e. a -> a e^{-it}) — exact on the truncation since H0 is diagonal.
fn heisenberg_rotate(op: &FockOperator, t: f64) -> CMatrix {
    let n = op.cutoff;
    CMatrix::from_fn(n, n, |m, k| {
        let phase = Complex64::from_polar(1.0, t * (m as f64 - k as f64));
        op.entries[(m, k)] * phase
    })
}

/// Heisenberg-picture constants
/// `H1~ = H1(t) cos t - 2 H4(t) sin t`, `H4~ = H1(t) sin t / 2 + H4(t) cos t`,
/// `H3~ = H3(t) cos 3t - H5(t) sin 3t`, `H5~ = H3(t) sin 3t + H5(t) cos 3t`.
pub fn heisenberg_constants(t: f64, n: usize) -> Result<HeisenbergConstants> {
    if n < 8 {
        return Err(Error::CutoffTooSmall { given: n, min: 8 });
    }
    let h1 = build_operator(OperatorKind::H1, n)?;
    let h3 = build_operator(OperatorKind::H3, n)?;
    let h4 = build_operator(OperatorKind::H4, n)?;
    let h5 = build_operator(OperatorKind::H5, n)?;
    let h1t = heisenberg_rotate(&h1, t);
    let h3t = heisenberg_rotate(&h3, t);
    let h4t = heisenberg_rotate(&h4, t);
    let h5t = heisenberg_rotate(&h5, t);
    let (c, s) = (t.cos(), t.sin());
    let (c3, s3) = ((3.0 * t).cos(), (3.0 * t).sin());
    let wrap = |m: CMatrix| FockOperator::from_matrix(OperatorKind::Derived, m);
    Ok(HeisenbergConstants {
        t,
        h1_tilde: wrap(&h1t * Complex64::new(c, 0.0) - &h4t * Complex64::new(2.0 * s, 0.0)),
        h4_tilde: wrap(&h1t * Complex64::new(0.5 * s, 0.0) + &h4t * Complex64::new(c, 0.0)),
        h3_tilde: wrap(&h3t * Complex64::new(c3, 0.0) - &h5t * Complex64::new(s3, 0.0)),
        h5_tilde: wrap(&h3t * Complex64::new(s3, 0.0) + &h5t * Complex64::new(c3, 0.0)),
    })
}

/// Operator form of the equations of motion: [H0,[H0,Hj]] = Hj for the
/// band-1 pair (H1, H4) and 9 Hj for the band-3 pair (H3, H5). Exact on the
/// full truncation because H0 is diagonal and double commutation multiplies
/// band-k entries by k^2.
pub fn oscillator_identities(n: usize) -> Result<AlgebraReport> {
    if n < 8 {
        return Err(Error::CutoffTooSmall { given: n, min: 8 });
    }
    let h0 = build_operator(OperatorKind::H0, n)?;
    let tol = 1e-12;
    let mut report = AlgebraReport::new(n, 0);
    for (kind, freq_sq) in [
        (OperatorKind::H1, 1.0),
        (OperatorKind::H4, 1.0),
        (OperatorKind::H3, 9.0),
        (OperatorKind::H5, 9.0),
    ] {
        let op = build_operator(kind, n)?;
        let double = commutator(&h0, &commutator(&h0, &op)?)?;
        let d = &double.entries - &op.entries * Complex64::new(freq_sq, 0.0);
        report.push(
            &format!("[H0,[H0,{kind}]] - {freq_sq} {kind}"),
            "full",
            scaled(max_abs(&d), freq_sq * op.max_abs()),
            tol,
        );
    }
    Ok(report)
}

/// A passing diagonal phase conjugation mapping H1 onto +-2 H4.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseEquivalence {
    /// Unit phase of the diagonal D = diag(phi^n); +i or -i.
    pub phi_im: f64,
    pub sign: f64,
    pub defect: f64,
}

/// Search phi in {i, -i} and sign in {+1, -1} for
/// max |D H1 D+ - sign 2 H4| < 1e-12.
pub fn phase_equivalence_check(n: usize) -> Result<PhaseEquivalence> {
    if n < 8 {
        return Err(Error::CutoffTooSmall { given: n, min: 8 });
    }
    let h1 = build_operator(OperatorKind::H1, n)?;
    let h4 = build_operator(OperatorKind::H4, n)?;
    let two_h4 = &h4.entries * Complex64::new(2.0, 0.0);
    let mut best = f64::INFINITY;
    for phi_im in [1.0f64, -1.0] {
        let phi = Complex64::new(0.0, phi_im);
        // phi^m conj(phi^n) multiplications are exact (components swap/negate)
        let mut pow = vec![Complex64::new(1.0, 0.0); n];
        for k in 1..n {
            pow[k] = pow[k - 1] * phi;
        }
        let conj = CMatrix::from_fn(n, n, |m, k| pow[m] * h1.entries[(m, k)] * pow[k].conj());
        for sign in [1.0f64, -1.0] {
            let defect = max_abs(&(&conj - &two_h4 * Complex64::new(sign, 0.0)));
            best = best.min(defect);
            if defect < 1e-12 {
                return Ok(PhaseEquivalence { phi_im, sign, defect });
            }
        }
    }
    Err(Error::PhaseEquivalenceFailed { best })
}

/// Normalized or raw state on the truncated basis.
#[derive(Debug, Clone)]
pub struct FockState {
    cutoff: usize,
    amplitudes: DVector<Complex64>,
}

impl FockState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::CutoffTooSmall { given: amplitudes.len(), min: 2 });
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("state amplitudes must be finite".into()));
        }
        Ok(FockState { cutoff: amplitudes.len(), amplitudes: DVector::from_vec(amplitudes) })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    pub fn basis_state(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::CutoffTooSmall { given: n, min: 2 });
        }
        if k >= n {
            return Err(Error::Domain(format!("basis index {k} outside cutoff {n}")));
        }
        let mut v = DVector::from_element(n, Complex64::new(0.0, 0.0));
        v[k] = Complex64::new(1.0, 0.0);
        Ok(FockState { cutoff: n, amplitudes: v })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// <self | op | self> without normalization.
    pub fn expectation(&self, op: &FockOperator) -> Result<Complex64> {
        if op.cutoff != self.cutoff {
            return Err(Error::CutoffMismatch { left: op.cutoff, right: self.cutoff });
        }
        Ok(self.amplitudes.dotc(&(&op.entries * &self.amplitudes)))
    }
}

#[derive(Debug)]
pub struct SubharmonicResult {
    pub state: FockState,
    /// | ||out|| - ||in|| |.
    pub norm_defect: f64,
    /// Probability carried by the top 5 basis levels.
    pub top_level_probability: f64,
    /// Set when the top levels carry more than 1e-8 of the output.
    pub truncation_warning: bool,
}

/// Apply exp[kt (a^3 - a+^3)] by dense matrix exponential of the
/// anti-hermitian generator (scaling-and-squaring).
pub fn subharmonic_evolve(kt: f64, psi0: &FockState) -> Result<SubharmonicResult> {
    if kt.abs() > 0.2 {
        return Err(Error::Domain(format!("|kt| = {} exceeds the truncation-validity bound 0.2", kt.abs())));
    }
    let n = psi0.cutoff;
    if n < 4 {
        return Err(Error::CutoffTooSmall { given: n, min: 4 });
    }
    let (a, adag) = ladder_matrices(n);
    let gen = (&a * &a * &a - &adag * &adag * &adag) * Complex64::new(kt, 0.0);
    let u = gen.exp();
    let amplitudes = &u * &psi0.amplitudes;
    let out_norm = amplitudes.norm();
    let norm_defect = (out_norm - psi0.norm()).abs();
    let top: f64 = amplitudes.iter().skip(n.saturating_sub(5)).map(|c| c.norm_sqr()).sum();
    let top_level_probability = top / (out_norm * out_norm);
    Ok(SubharmonicResult {
        state: FockState { cutoff: n, amplitudes },
        norm_defect,
        top_level_probability,
        truncation_warning: top_level_probability > 1e-8,
    })
}

/// (Var q, Var p) with q = (a + a+)/sqrt2, p = -i (a - a+)/sqrt2.
pub fn quadrature_variances(psi: &FockState) -> Result<(f64, f64)> {
    let deviation = (psi.norm() - 1.0).abs();
    if deviation > 1e-8 {
        return Err(Error::Unnormalized { deviation });
    }
    let n = psi.cutoff;
    let (a, adag) = ladder_matrices(n);
    let sqrt2 = std::f64::consts::SQRT_2;
    let q = (&a + &adag) / Complex64::new(sqrt2, 0.0);
    let p = (&a - &adag) * (-I / sqrt2);
    let exp = |m: &CMatrix| psi.amplitudes.dotc(&(m * &psi.amplitudes));
    let var = |m: &CMatrix| {
        let mean = exp(m).re;
        let second = exp(&(m * m)).re;
        second - mean * mean
    };
    Ok((var(&q), var(&p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ladder_entries() {
        let (a, adag) = make_ladder(3).unwrap();
        assert_eq!(a.entries()[(0, 1)], c(1.0));
        assert!((a.entries()[(1, 2)] - c(2.0f64.sqrt())).norm() < 1e-15);
        assert!((adag.entries()[(2, 1)] - c(2.0f64.sqrt())).norm() < 1e-15);
        // number operator
        let num = adag.entries() * a.entries();
        for k in 0..3 {
            assert!((num[(k, k)] - c(k as f64)).norm() < 1e-15);
        }
        assert!(make_ladder(1).is_err());
    }

    #[test]
    fn build_rejects_small_and_unknown() {
        assert!(build_operator(OperatorKind::H1, 3).is_err());
        assert!("banana".parse::<OperatorKind>().is_err());
        assert!("h3".parse::<OperatorKind>().is_ok());
    }

    #[test]
    fn jacobi_matrix_elements() {
        let a_op = build_operator(OperatorKind::A, 4).unwrap();
        assert!((a_op.entries()[(1, 0)] - c(1.0)).norm() < 1e-15);
        assert!((a_op.entries()[(2, 1)] - c(2.0f64.powf(1.5))).norm() < 1e-14);
        let h1 = build_operator(OperatorKind::H1, 4).unwrap();
        assert!((h1.entries()[(1, 0)] - c(std::f64::consts::SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn h2_split_is_exact() {
        for n in [4usize, 9, 25] {
            let h2 = build_operator(OperatorKind::H2, n).unwrap();
            let h3 = build_operator(OperatorKind::H3, n).unwrap();
            let h4 = build_operator(OperatorKind::H4, n).unwrap();
            let d = &h2.entries - (&h3.entries + &h4.entries);
            assert_eq!(max_abs(&d), 0.0);
        }
    }

    #[test]
    fn h1_is_sqrt2_jplus_minus_jminus() {
        for n in [4usize, 17, 40] {
            let h1 = build_operator(OperatorKind::H1, n).unwrap();
            let jp = build_operator(OperatorKind::JPlus, n).unwrap();
            let jm = build_operator(OperatorKind::JMinus, n).unwrap();
            let d = &h1.entries - (&jp.entries - &jm.entries) * c(std::f64::consts::SQRT_2);
            assert_eq!(max_abs(&d), 0.0);
        }
    }

    #[test]
    fn omega_matches_a_shift() {
        let n = 12;
        let eps = 1.7;
        let omega = build_operator(OperatorKind::Omega(eps), n).unwrap();
        let a_op = build_operator(OperatorKind::A, n).unwrap();
        let v = DVector::from_fn(n, |k, _| Complex64::new(0.3 * k as f64 - 1.0, 0.1));
        let lhs = omega.entries() * &v;
        let rhs = a_op.entries() * &v - &v * c(eps);
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn band_structure() {
        let n = 12;
        assert_eq!(build_operator(OperatorKind::H1, n).unwrap().bands(), vec![-1, 1]);
        assert_eq!(build_operator(OperatorKind::H3, n).unwrap().bands(), vec![-3, 3]);
        assert_eq!(build_operator(OperatorKind::H5, n).unwrap().bands(), vec![-3, 3]);
        assert_eq!(build_operator(OperatorKind::H2, n).unwrap().bands(), vec![-3, -1, 1, 3]);
        assert_eq!(build_operator(OperatorKind::JPlus, n).unwrap().bands(), vec![1]);
        // monomial band rule: a+2 a raises by exactly one
        let (a, adag) = ladder_matrices(n);
        let mono = FockOperator::from_matrix(OperatorKind::Derived, &adag * &adag * &a);
        assert_eq!(mono.bands(), vec![1]);
    }

    #[test]
    fn hermitian_tags_hold() {
        let n = 20;
        for kind in [
            OperatorKind::H0,
            OperatorKind::H1,
            OperatorKind::H2,
            OperatorKind::H3,
            OperatorKind::H4,
            OperatorKind::H5,
            OperatorKind::A,
            OperatorKind::Omega(0.4),
        ] {
            let op = build_operator(kind, n).unwrap();
            assert!(kind.is_hermitian());
            assert!(
                op.hermiticity_defect() < 1e-14 * op.max_abs().max(1.0),
                "{kind} defect {}",
                op.hermiticity_defect()
            );
        }
        assert!(!OperatorKind::JPlus.is_hermitian());
    }

    #[test]
    fn ladder_commutator_truncation_artifact() {
        let n = 6;
        let (a, adag) = make_ladder(n).unwrap();
        let comm = commutator(&a, &adag).unwrap();
        for k in 0..n - 1 {
            assert!((comm.entries()[(k, k)] - c(1.0)).norm() < 1e-15);
        }
        // last diagonal entry is -(N-1) from the dropped raise
        assert!((comm.entries()[(n - 1, n - 1)] - c(-((n - 1) as f64))).norm() < 1e-13);
    }

    #[test]
    fn commutator_contracts() {
        let (a, _) = make_ladder(5).unwrap();
        let self_comm = commutator(&a, &a).unwrap();
        assert_eq!(max_abs(&self_comm.entries), 0.0);
        let (b, _) = make_ladder(6).unwrap();
        assert!(commutator(&a, &b).is_err());
    }

    #[test]
    fn w32_vacuum_action() {
        // [J+,J-]|0> = |0> and (1/4 + 3 J0^2)|0> = |0>
        let n = 8;
        let jp = build_operator(OperatorKind::JPlus, n).unwrap();
        let jm = build_operator(OperatorKind::JMinus, n).unwrap();
        let j0 = build_operator(OperatorKind::J0, n).unwrap();
        let vac = FockState::vacuum(n).unwrap();
        let lhs = commutator(&jp, &jm).unwrap().apply(&vac).unwrap();
        assert!((lhs.amplitudes()[0] - c(1.0)).norm() < 1e-14);
        let rhs_val = 0.25 + 3.0 * j0.entries()[(0, 0)].norm_sqr();
        assert!((rhs_val - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w32_report_at_desk_scale() {
        let report = verify_w32(60, 4).unwrap();
        assert!(report.all_pass(), "residuals: {:?}", report.relations);
        assert!(verify_w32(60, 1).is_err());
        assert!(verify_w32(5, 2).is_err());
    }

    #[test]
    fn casimir_delta_and_commutants() {
        let rep = build_casimir(60, 6).unwrap();
        let delta_exact = Complex64::new(0.0, -2.0 * 3.0f64.sqrt());
        assert!((rep.delta - delta_exact).norm() < 1e-10, "delta = {}", rep.delta);
        assert!(rep.algebra.all_pass(), "{:?}", rep.algebra.relations);
    }

    #[test]
    fn casimir_is_scalar_on_the_interior() {
        // the diagonal collapses to the constant -2/9: the cubic imaginary
        // parts of N-N+ and of N0(N0+1)[...] cancel entrywise and the real
        // part telescopes; off-diagonal entries vanish identically
        let n = 60;
        let rep = build_casimir(n, 6).unwrap();
        let c = rep.casimir.entries();
        for i in 0..n - 6 {
            assert!(
                (c[(i, i)] - Complex64::new(-2.0 / 9.0, 0.0)).norm() < 1e-9,
                "C[{i}] = {}",
                c[(i, i)]
            );
            for j in 0..n - 6 {
                if i != j {
                    assert_eq!(c[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn heisenberg_identity_at_zero() {
        let n = 16;
        let hc = heisenberg_constants(0.0, n).unwrap();
        let h1 = build_operator(OperatorKind::H1, n).unwrap();
        let d = &hc.h1_tilde.entries - &h1.entries;
        assert_eq!(max_abs(&d), 0.0);
    }

    #[test]
    fn heisenberg_constancy() {
        let n = 30;
        let base = heisenberg_constants(0.0, n).unwrap();
        for t in [0.3, 0.7, 1.9] {
            let hc = heisenberg_constants(t, n).unwrap();
            for (a, b) in [
                (&hc.h1_tilde, &base.h1_tilde),
                (&hc.h3_tilde, &base.h3_tilde),
                (&hc.h4_tilde, &base.h4_tilde),
                (&hc.h5_tilde, &base.h5_tilde),
            ] {
                let d = &a.entries - &b.entries;
                assert!(max_abs(&d) < 1e-10, "t = {t}: {}", max_abs(&d));
            }
        }
    }

    #[test]
    fn oscillator_identity_report() {
        let report = oscillator_identities(30).unwrap();
        assert!(report.all_pass());
        assert!(report.max_residual() < 1e-13);
    }

    #[test]
    fn h2_has_no_single_frequency() {
        // [H0,[H0,H2]] - H2 = 8 H3 entrywise
        let n = 20;
        let h0 = build_operator(OperatorKind::H0, n).unwrap();
        let h2 = build_operator(OperatorKind::H2, n).unwrap();
        let h3 = build_operator(OperatorKind::H3, n).unwrap();
        let double = commutator(&h0, &commutator(&h0, &h2).unwrap()).unwrap();
        let d = &double.entries - &h2.entries - &h3.entries * c(8.0);
        assert!(max_abs(&d) < 1e-13 * h3.max_abs());
    }

    #[test]
    fn phase_equivalence_passes_both_phases() {
        let pe = phase_equivalence_check(24).unwrap();
        assert!(pe.defect < 1e-12);
        assert!(pe.sign == 1.0 || pe.sign == -1.0);
        // D H0 D+ = H0 for a diagonal phase
        let h0 = build_operator(OperatorKind::H0, 24).unwrap();
        let conj = heisenberg_rotate(&h0, 1.23);
        assert_eq!(max_abs(&(&conj - &h0.entries)), 0.0);
    }

    #[test]
    fn phase_equivalence_spectra_coincide() {
        let n = 40;
        let h1 = build_operator(OperatorKind::H1, n).unwrap();
        let h4 = build_operator(OperatorKind::H4, n).unwrap();
        let mut e1: Vec<f64> = h1.entries().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut e4: Vec<f64> = (h4.entries() * c(2.0)).symmetric_eigen().eigenvalues.iter().copied().collect();
        e1.sort_by(f64::total_cmp);
        e4.sort_by(f64::total_cmp);
        let worst = e1.iter().zip(&e4).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        assert!(worst < 1e-10, "spectra differ by {worst}");
    }

    #[test]
    fn spectra_scale_between_h1_and_a() {
        let n = 12;
        let h1 = build_operator(OperatorKind::H1, n).unwrap();
        let a_op = build_operator(OperatorKind::A, n).unwrap();
        let mut e1: Vec<f64> = h1.entries().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut ea: Vec<f64> = a_op.entries().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        e1.sort_by(f64::total_cmp);
        ea.sort_by(f64::total_cmp);
        for (l1, la) in e1.iter().zip(&ea) {
            assert!((l1 - std::f64::consts::SQRT_2 * la).abs() < 1e-12);
        }
    }

    #[test]
    fn subharmonic_identity_and_parity() {
        let vac = FockState::vacuum(40).unwrap();
        let r0 = subharmonic_evolve(0.0, &vac).unwrap();
        assert!((r0.state.amplitudes()[0] - c(1.0)).norm() < 1e-15);

        let r = subharmonic_evolve(0.05, &vac).unwrap();
        for (k, p) in r.state.probabilities().iter().enumerate() {
            if k % 3 != 0 {
                assert!(*p < 1e-28, "population {p:.2e} at level {k}");
            }
        }
        assert!(r.state.probabilities()[3] > 1e-4);
        assert!(subharmonic_evolve(0.3, &vac).is_err());
    }

    #[test]
    fn subharmonic_preserves_norm() {
        let vac = FockState::vacuum(60).unwrap();
        let r = subharmonic_evolve(0.05, &vac).unwrap();
        assert!(r.norm_defect < 1e-12);
        assert!(!r.truncation_warning);
    }

    #[test]
    fn vacuum_variances() {
        let vac = FockState::vacuum(20).unwrap();
        let (vq, vp) = quadrature_variances(&vac).unwrap();
        assert!((vq - 0.5).abs() < 1e-14);
        assert!((vp - 0.5).abs() < 1e-14);
        let bad = FockState::new(vec![c(1.0), c(1.0)]).unwrap();
        assert!(matches!(quadrature_variances(&bad), Err(Error::Unnormalized { .. })));
    }
}
