//! Closed-form large-`n` approximations of eigenvalues and eigenfunctions,
//! the oscillatory functionals they are built from, and the a-priori bounds
//! on `w`.
//!
//! With `θ = s x / p₁ + π/4` the functionals are
//!
//! ```text
//! A(x, s) = ∫₀^x (√2/2) q(τ) sin(s Δ(τ)/p₁ - π/4) dτ      B: same with cos
//! C(x, s) = ∫_{π/2}^x (√2/2) q(τ) sin(s Δ(τ)/p₂ - π/4) dτ  D: same with cos
//! ```
//!
//! and are integrated with composite Simpson.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{slope_fit, PowerFit};
use crate::integrator::{PiecewiseSolution, Side};
use crate::problem::{Piece, ProblemSpec, INTERFACE};
use crate::quadrature::{oscillatory_panels, simpson};

pub const MIN_FUNCTIONAL_PANELS: usize = 64;

/// Values below this are treated as zero by [`decay_check`].
pub const DECAY_FLOOR: f64 = 1e-14;

pub const MIN_DECAY_POINTS: usize = 6;

/// Slack allowed on the derivative bound `max |w₁'| / s ≤ √2`.
pub const DERIVATIVE_BOUND_FACTOR: f64 = 1.25;

const HALF_SQRT_2: f64 = SQRT_2 / 2.0;

/// Sign in front of the eigenvalue correction `δ_n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `δ_n = +4/((4n-3)π) [...]`, the reference form kept for comparison.
    Paper,
    /// `δ_n = -4/((4n-3)π) [...]`, which the closed-form roots of the
    /// continuous problem confirm.
    #[default]
    Corrected,
}

impl SignConvention {
    pub fn sigma(self) -> f64 {
        match self {
            Self::Paper => 1.0,
            Self::Corrected => -1.0,
        }
    }
}

impl FromStr for SignConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => Ok(Self::Paper),
            "corrected" => Ok(Self::Corrected),
            other => Err(Error::InvalidArgument(format!(
                "sign must be `paper` or `corrected`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Corrected => "corrected",
        })
    }
}

/// Phase of the right-piece leading eigenfunction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// `(π/4)(1 + (p₂-p₁)(4n-3)/(4(p₁+p₂)))`, the reference form kept for
    /// comparison.
    Paper,
    /// `π/4 + π(p₂-p₁)(4n-3)/(4(p₁+p₂))`, the continuation of the left
    /// cosine through the interface.
    #[default]
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    A,
    B,
    C,
    D,
}

impl Functional {
    fn piece(self) -> Piece {
        match self {
            Self::A | Self::B => Piece::Left,
            Self::C | Self::D => Piece::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscFunctionals {
    pub s: f64,
    pub a_half: f64,
    pub b_half: f64,
    pub c_pi: f64,
    pub d_pi: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymEstimate {
    pub n: usize,
    pub s_leading: f64,
    pub delta_n: f64,
    pub s_refined: f64,
    /// `(γ₂/δ₂, dγ₁B/(p₁δ₁), dγ₁D/(p₂δ₁))`.
    pub bracket_terms: (f64, f64, f64),
    pub sign_convention: SignConvention,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub s: f64,
    pub lambda: f64,
    pub q1: f64,
    pub q2: f64,
    /// `(1/p₂)∫ q` over the right piece without the absolute value.
    pub q2_signed: f64,
    pub lambda_threshold: f64,
    pub bound14: f64,
    pub bound15: f64,
    pub observed_sup_left: f64,
    pub observed_sup_right: f64,
    /// `max |w₁'| / s` over the left nodes, compared against `√2`.
    pub observed_deriv_ratio_left: f64,
}

impl BoundReport {
    pub fn applies(&self) -> bool {
        self.lambda >= self.lambda_threshold
    }

    pub fn left_holds(&self) -> bool {
        !self.applies() || self.observed_sup_left <= self.bound14
    }

    pub fn right_holds(&self) -> bool {
        !self.applies() || self.observed_sup_right <= self.bound15
    }

    pub fn derivative_holds(&self) -> bool {
        !self.applies() || self.observed_deriv_ratio_left <= DERIVATIVE_BOUND_FACTOR * SQRT_2
    }
}

pub fn leading_s(spec: &ProblemSpec, n: usize) -> f64 {
    let (p1, p2) = (spec.p1, spec.p2);
    p1 * p2 * (4.0 * n as f64 - 3.0) / (2.0 * (p1 + p2))
}

fn check_panels(panels: usize) -> Result<()> {
    if panels < MIN_FUNCTIONAL_PANELS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_FUNCTIONAL_PANELS} panels, got {panels}"
        )));
    }
    Ok(())
}

fn check_in_piece(piece: Piece, x: f64) -> Result<()> {
    let (a, b) = piece.bounds();
    if !(a..=b).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    Ok(())
}

/// `∫ (√2/2) q(τ) k(Δ(τ)) dτ` from the start of `piece` to `x`.
fn weighted_integral(
    spec: &ProblemSpec,
    piece: Piece,
    x: f64,
    panels: usize,
    kernel: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    check_in_piece(piece, x)?;
    let (a, _) = piece.bounds();
    simpson(
        |tau| -> Result<f64> {
            let q = spec.q.eval(tau)?;
            if q == 0.0 {
                return Ok(0.0);
            }
            Ok(HALF_SQRT_2 * q * kernel(tau, spec.delay.eval(tau)?))
        },
        a,
        x,
        panels,
    )
}

/// One of `A`, `B` (upper limit in `[0, π/2]`) or `C`, `D` (upper limit in
/// `[π/2, π]`).
pub fn functional(
    spec: &ProblemSpec,
    which: Functional,
    x: f64,
    s: f64,
    panels: usize,
) -> Result<f64> {
    let p = spec.stiffness(which.piece());
    weighted_integral(spec, which.piece(), x, panels, |_, delay| {
        let arg = s * delay / p - FRAC_PI_4;
        match which {
            Functional::A | Functional::C => arg.sin(),
            Functional::B | Functional::D => arg.cos(),
        }
    })
}

pub fn functionals(spec: &ProblemSpec, s: f64, panels: usize) -> Result<OscFunctionals> {
    check_panels(panels)?;
    Ok(OscFunctionals {
        s,
        a_half: functional(spec, Functional::A, FRAC_PI_2, s, panels)?,
        b_half: functional(spec, Functional::B, FRAC_PI_2, s, panels)?,
        c_pi: functional(spec, Functional::C, PI, s, panels)?,
        d_pi: functional(spec, Functional::D, PI, s, panels)?,
        panels,
    })
}

/// `(√2/2)∫|q|` over the left and right pieces: the bounds on `|A|, |B|` and
/// on `|C|, |D|` respectively.
pub fn functional_bounds(spec: &ProblemSpec, panels: usize) -> Result<(f64, f64)> {
    Ok((
        abs_integral(spec, Piece::Left, panels)? * HALF_SQRT_2,
        abs_integral(spec, Piece::Right, panels)? * HALF_SQRT_2,
    ))
}

fn abs_integral(spec: &ProblemSpec, piece: Piece, panels: usize) -> Result<f64> {
    let (a, b) = piece.bounds();
    simpson(
        |tau| -> Result<f64> { Ok(spec.q.eval(tau)?.abs()) },
        a,
        b,
        panels,
    )
}

fn signed_integral(spec: &ProblemSpec, piece: Piece, panels: usize) -> Result<f64> {
    let (a, b) = piece.bounds();
    simpson(|tau| -> Result<f64> { Ok(spec.q.eval(tau)?) }, a, b, panels)
}

/// Leading term plus the `O(1/n)` correction, with `B` and `D` taken at the
/// leading-order `s`.
pub fn refined_s(
    spec: &ProblemSpec,
    n: usize,
    panels: usize,
    sign: SignConvention,
) -> Result<AsymEstimate> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "refined estimate needs n >= 2, got {n}"
        )));
    }
    check_panels(panels)?;
    let s0 = leading_s(spec, n);
    let b = functional(spec, Functional::B, FRAC_PI_2, s0, panels)?;
    let d = functional(spec, Functional::D, PI, s0, panels)?;
    let ProblemSpec {
        p1,
        p2,
        gamma1,
        gamma2,
        delta1,
        delta2,
        d: dd,
        ..
    } = *spec;
    let terms = (
        gamma2 / delta2,
        dd * gamma1 * b / (p1 * delta1),
        dd * gamma1 * d / (p2 * delta1),
    );
    let k = 4.0 * n as f64 - 3.0;
    let delta_n = sign.sigma() * 4.0 / (k * PI) * (terms.0 + terms.1 + terms.2);
    Ok(AsymEstimate {
        n,
        s_leading: s0,
        delta_n,
        s_refined: s0 + delta_n,
        bracket_terms: terms,
        sign_convention: sign,
    })
}

/// `K` with `|δ_n| ≤ K/(4n-3)` for every `n`, from the integrand bounds on
/// `B` and `D`.
pub fn delta_bound(spec: &ProblemSpec, panels: usize) -> Result<f64> {
    let (left, right) = functional_bounds(spec, panels)?;
    let g = (spec.d * spec.gamma1 / spec.delta1).abs();
    Ok(4.0 / PI * ((spec.gamma2 / spec.delta2).abs() + g * left / spec.p1 + g * right / spec.p2))
}

/// The `O(1/s)` oscillatory integrals: `which` 1 and 2 are the cos and sin
/// kernels `s(2τ - Δ(τ))/p₁ + π/4` over the left piece, 3 and 4 the same
/// with `p₂` over the right piece.
pub fn decay_integral(spec: &ProblemSpec, which: u8, s: f64, panels: usize) -> Result<f64> {
    let piece = match which {
        1 | 2 => Piece::Left,
        3 | 4 => Piece::Right,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "decay integral index {which} not in 1..=4"
            )))
        }
    };
    let p = spec.stiffness(piece);
    let (_, b) = piece.bounds();
    weighted_integral(spec, piece, b, panels, |tau, delay| {
        let arg = s * (2.0 * tau - delay) / p + FRAC_PI_4;
        if which % 2 == 1 {
            arg.cos()
        } else {
            arg.sin()
        }
    })
}

/// Log-log slope of `|decay_integral|` against `s`. The kernels oscillate at
/// twice the frequency of `A`..`D`, so each point uses at least
/// [`oscillatory_panels`]`(2s)` panels.
pub fn decay_check(
    spec: &ProblemSpec,
    which: u8,
    s_grid: &[f64],
    panels: usize,
) -> Result<PowerFit> {
    if s_grid.len() < MIN_DECAY_POINTS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_DECAY_POINTS} abscissae, got {}",
            s_grid.len()
        )));
    }
    if s_grid
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
        || s_grid[0].partial_cmp(&0.0) != Some(Ordering::Greater)
    {
        return Err(Error::InvalidArgument(
            "s grid must be positive and increasing".into(),
        ));
    }
    let points = s_grid
        .iter()
        .map(|&s| {
            Ok((
                s,
                decay_integral(spec, which, s, panels.max(oscillatory_panels(2.0 * s)))?.abs(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    if points.iter().all(|&(_, v)| v < DECAY_FLOOR) {
        return Err(Error::DegenerateFit(format!(
            "decay integral {which} vanishes on the whole grid"
        )));
    }
    slope_fit(&points)
}

/// Leading-order eigenfunction for index `n`, normalized like `w`
/// (value `p₁` at 0). At `x = π/2` the side picks the piece.
pub fn leading_eigenfunction(
    spec: &ProblemSpec,
    n: usize,
    x: f64,
    side: Side,
    phase: PhaseConvention,
) -> Result<f64> {
    if !(0.0..=PI).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    let (p1, p2) = (spec.p1, spec.p2);
    let k = 4.0 * n as f64 - 3.0;
    let sum = p1 + p2;
    if x < INTERFACE || (x == INTERFACE && side == Side::Left) {
        return Ok(SQRT_2 * p1 * (p2 * k * x / (2.0 * sum) + FRAC_PI_4).cos());
    }
    let offset = match phase {
        PhaseConvention::Paper => FRAC_PI_4 * (1.0 + (p2 - p1) * k / (4.0 * sum)),
        PhaseConvention::Corrected => FRAC_PI_4 + PI * (p2 - p1) * k / (4.0 * sum),
    };
    Ok(SQRT_2 * p1 * spec.value_jump() * (p1 * k * x / (2.0 * sum) + offset).cos())
}

/// `w₁(x, s)` to first order in `1/s` in the reference form
/// `cos θ [√2p₁ + A/(sp₁)] - sin θ B/(sp₁)`.
pub fn refined_w1_asym(spec: &ProblemSpec, s: f64, x: f64, panels: usize) -> Result<f64> {
    let p1 = spec.p1;
    let a = functional(spec, Functional::A, x, s, panels)?;
    let b = functional(spec, Functional::B, x, s, panels)?;
    let th = s * x / p1 + FRAC_PI_4;
    Ok(th.cos() * (SQRT_2 * p1 + a / (s * p1)) - th.sin() * b / (s * p1))
}

/// `w₁(x, s)` to first order in `1/s` from one substitution of the free
/// oscillation into the integral equation:
/// `cos θ [√2p₁ + Ã/s] - sin θ B̃/s` with `Ã, B̃` the integrals of
/// `(√2/2) q sin(sΔ/p₁)` and `(√2/2) q cos(sΔ/p₁)`.
pub fn first_order_w1(spec: &ProblemSpec, s: f64, x: f64, panels: usize) -> Result<f64> {
    let p1 = spec.p1;
    let a = weighted_integral(spec, Piece::Left, x, panels, |_, delay| {
        (s * delay / p1).sin()
    })?;
    let b = weighted_integral(spec, Piece::Left, x, panels, |_, delay| {
        (s * delay / p1).cos()
    })?;
    let th = s * x / p1 + FRAC_PI_4;
    Ok(th.cos() * (SQRT_2 * p1 + a / s) - th.sin() * b / s)
}

/// Reference refined left eigenfunction, functionals at the leading-order
/// `s`. Evaluated as given, without correction.
pub fn paper_u1n(spec: &ProblemSpec, n: usize, x: f64, panels: usize) -> Result<f64> {
    let ProblemSpec {
        p1,
        p2,
        gamma1,
        gamma2,
        delta1,
        delta2,
        d,
        ..
    } = *spec;
    let s0 = leading_s(spec, n);
    let k = 4.0 * n as f64 - 3.0;
    let sum = p1 + p2;
    let a = functional(spec, Functional::A, x, s0, panels)?;
    let b = functional(spec, Functional::B, FRAC_PI_2, s0, panels)?;
    let dpi = functional(spec, Functional::D, PI, s0, panels)?;
    let th = p2 * k * x / (2.0 * sum) + FRAC_PI_4;
    let amp = SQRT_2 * p1 + 2.0 * sum * a / (p1 * p1 * p2 * k);
    let corr = 4.0 * SQRT_2 / (k * PI)
        * (p1 * gamma2 / delta2 + d * gamma1 * b / delta1 + d * p1 * gamma1 * dpi / (p2 * delta1));
    Ok(th.cos() * amp - th.sin() * corr)
}

/// Reference refined right eigenfunction, functionals at the leading-order
/// `s`. Evaluated as given, without correction.
pub fn paper_u2n(spec: &ProblemSpec, n: usize, x: f64, panels: usize) -> Result<f64> {
    let ProblemSpec {
        p1,
        p2,
        gamma1,
        gamma2,
        delta1,
        delta2,
        d,
        ..
    } = *spec;
    check_in_piece(Piece::Right, x)?;
    let s0 = leading_s(spec, n);
    let k = 4.0 * n as f64 - 3.0;
    let sum = p1 + p2;
    let sgn = if n.is_multiple_of(2) { 1.0 } else { -1.0 };

    let a = functional(spec, Functional::A, FRAC_PI_2, s0, panels)?;
    let b = functional(spec, Functional::B, FRAC_PI_2, s0, panels)?;
    let c_x = functional(spec, Functional::C, x, s0, panels)?;
    let d_x = functional(spec, Functional::D, x, s0, panels)?;
    let d_pi = functional(spec, Functional::D, PI, s0, panels)?;

    let alpha = k * p1 * x / (2.0 * sum);
    let phi = k * (p2 - p1) * PI / (4.0 * sum) + alpha + FRAC_PI_4;
    let scale = 2.0 * sum / (k * p1 * p1 * p2);
    let bracket =
        gamma2 / delta2 + d * gamma1 * b / (p1 * delta1) + d * gamma1 * d_pi / (p2 * delta1);

    let t1 = gamma1 / (2.0 * delta1)
        * ((-sgn * alpha.sin() + phi.cos()) * (SQRT_2 * p1 + scale * a)
            + (sgn * alpha.cos() - phi.sin()) * (scale * b));
    let t2 = -SQRT_2 * gamma2 * p2 / (2.0 * delta2)
        * (-sgn * alpha.sin()
            + 4.0 / (k * PI) * (sgn * alpha.cos() + phi.sin()) * bracket
            + phi.cos());
    let t3 = gamma2 * sum / (delta2 * p1.powi(3) * k) * b * (sgn * alpha.cos() - phi.sin());
    let t4 = 2.0 * gamma2 * sum * a / (delta2 * p1.powi(3) * k) * (sgn * alpha.sin() + phi.cos());
    let t5 = -2.0 * gamma1 * sum / (k * delta1 * p2 * p2) * (phi.sin() * d_x - c_x * phi.cos());
    Ok(t1 + t2 + t3 + t4 + t5)
}

/// A-priori amplitude bounds on `w` next to the sups observed on `sol`.
pub fn lemma2_report(
    spec: &ProblemSpec,
    sol: &PiecewiseSolution,
    panels: usize,
) -> Result<BoundReport> {
    let (p1, p2) = (spec.p1, spec.p2);
    let q1 = abs_integral(spec, Piece::Left, panels)? / p1;
    let q2 = abs_integral(spec, Piece::Right, panels)? / p2;
    let q2_signed = signed_integral(spec, Piece::Right, panels)? / p2;
    let deriv_sup = sol.left.derivs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(BoundReport {
        s: sol.s,
        lambda: sol.lambda,
        q1,
        q2,
        q2_signed,
        lambda_threshold: (4.0 * q1 * q1).max(4.0 * q2 * q2),
        bound14: 2.0 * SQRT_2 * p1.abs(),
        bound15: 4.0
            * SQRT_2
            * p1.abs()
            * (spec.value_jump().abs() + (p2 * spec.gamma2 / (4.0 * p1 * spec.delta2)).abs()),
        observed_sup_left: sol.left.max_abs_value(),
        observed_sup_right: sol.right.max_abs_value(),
        observed_deriv_ratio_left: deriv_sup / sol.s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::CoefficientExpr;
    use crate::integrator::{solve_w, IntegratorConfig};
    use crate::problem::reference::{c0, c2};

    fn with(q: &str, delay: &str, base: ProblemSpec) -> ProblemSpec {
        ProblemSpec {
            q: CoefficientExpr::parse(q).unwrap(),
            delay: CoefficientExpr::parse(delay).unwrap(),
            ..base
        }
    }

    #[test]
    fn leading_values() {
        assert_eq!(leading_s(&c0(), 5), 4.25);
        assert_eq!(leading_s(&c0(), 1), 0.25);
        assert!((leading_s(&c2(), 3) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn functionals_zero_and_constant_potential() {
        let f = functionals(&c0(), 7.3, 512).unwrap();
        assert_eq!((f.a_half, f.b_half, f.c_pi, f.d_pi), (0.0, 0.0, 0.0, 0.0));

        let one = with("1", "0", c2());
        let f = functionals(&one, 7.3, 512).unwrap();
        assert!((f.a_half + FRAC_PI_4).abs() < 1e-14);
        assert!((f.b_half - FRAC_PI_4).abs() < 1e-14);
        assert!((f.c_pi + FRAC_PI_4).abs() < 1e-14);
        assert!((f.d_pi - FRAC_PI_4).abs() < 1e-14);
        assert!(functionals(&one, 7.3, 8).is_err());
    }

    #[test]
    fn functionals_within_integrand_bounds() {
        let spec = c2();
        let (l, r) = functional_bounds(&spec, 512).unwrap();
        for s in [3.0, 11.0, 40.0] {
            let f = functionals(&spec, s, oscillatory_panels(s)).unwrap();
            assert!(f.a_half.abs() <= l && f.b_half.abs() <= l);
            assert!(f.c_pi.abs() <= r && f.d_pi.abs() <= r);
        }
    }

    #[test]
    fn functional_domain() {
        assert!(matches!(
            functional(&c2(), Functional::A, 2.0, 1.0, 512),
            Err(Error::OutOfDomain(_))
        ));
        assert!(functional(&c2(), Functional::C, 1.0, 1.0, 512).is_err());
        assert_eq!(
            functional(&c2(), Functional::A, 0.0, 5.0, 512).unwrap(),
            0.0
        );
    }

    #[test]
    fn refined_on_continuous_problem() {
        let e = refined_s(&c0(), 3, 512, SignConvention::Corrected).unwrap();
        assert!((e.s_refined - (2.25 - 4.0 / (9.0 * PI))).abs() < 1e-15);
        assert!((e.s_refined - e.s_leading - e.delta_n).abs() < 1e-15);
        let e = refined_s(&c0(), 5, 512, SignConvention::Corrected).unwrap();
        assert!((e.s_refined - (4.25 - 4.0 / (17.0 * PI))).abs() < 1e-15);
        let p = refined_s(&c0(), 5, 512, SignConvention::Paper).unwrap();
        assert_eq!(p.delta_n, -e.delta_n);
        assert!(refined_s(&c0(), 1, 512, SignConvention::Corrected).is_err());
    }

    #[test]
    fn zero_potential_correction_is_transmission_ratio() {
        let spec = ProblemSpec {
            gamma2: 3.0,
            delta2: 2.0,
            gamma1: 1.5,
            delta1: 1.0,
            ..c0()
        }
        .validate()
        .unwrap();
        for n in [4, 9, 30] {
            let e = refined_s(&spec, n, 512, SignConvention::Corrected).unwrap();
            let want = -4.0 * 1.5 / ((4.0 * n as f64 - 3.0) * PI);
            assert!((e.delta_n - want).abs() < 1e-12);
            assert_eq!((e.bracket_terms.1, e.bracket_terms.2), (0.0, 0.0));
        }
    }

    #[test]
    fn correction_within_bound() {
        let spec = c2();
        let k = delta_bound(&spec, 512).unwrap();
        for n in 2..=40 {
            let e = refined_s(
                &spec,
                n,
                oscillatory_panels(leading_s(&spec, n)),
                SignConvention::Corrected,
            )
            .unwrap();
            assert!(e.delta_n.abs() <= k / (4.0 * n as f64 - 3.0) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sign_convention_text() {
        assert_eq!(
            "paper".parse::<SignConvention>().unwrap(),
            SignConvention::Paper
        );
        assert_eq!(
            " corrected ".parse::<SignConvention>().unwrap(),
            SignConvention::Corrected
        );
        assert!("plus".parse::<SignConvention>().is_err());
        assert_eq!(SignConvention::default().to_string(), "corrected");
    }

    #[test]
    fn decay_integrals() {
        let grid: Vec<f64> = (0..11).map(|i| 10.0 + 5.0 * i as f64).collect();
        assert!(matches!(
            decay_check(&c0(), 1, &grid, 512),
            Err(Error::DegenerateFit(_))
        ));
        let one = with("1", "0", c0());
        for s in [3.0, 12.5, 41.0] {
            let exact = HALF_SQRT_2 / (2.0 * s) * (FRAC_PI_4.cos() - (s * PI + FRAC_PI_4).cos());
            let got = decay_integral(&one, 2, s, oscillatory_panels(2.0 * s)).unwrap();
            assert!((got - exact).abs() < 1e-8, "{got} vs {exact}");
        }
        assert!(decay_integral(&one, 5, 3.0, 512).is_err());
        assert!(decay_check(&one, 1, &grid[..4], 512).is_err());
    }

    #[test]
    fn leading_eigenfunction_values() {
        let c = PhaseConvention::Corrected;
        assert!((leading_eigenfunction(&c2(), 7, 0.0, Side::Left, c).unwrap() - 1.0).abs() < 1e-15);
        let v = leading_eigenfunction(&c0(), 3, FRAC_PI_2, Side::Left, c).unwrap();
        assert!((v + 0.54120).abs() < 1e-5);
        // equal stiffness: one cosine across the interface
        let spec = ProblemSpec {
            gamma1: 2.0,
            delta1: 1.0,
            gamma2: 2.0,
            delta2: 1.0,
            ..c0()
        };
        for phase in [PhaseConvention::Paper, c] {
            let l = leading_eigenfunction(&spec, 6, FRAC_PI_2, Side::Left, phase).unwrap();
            let r = leading_eigenfunction(&spec, 6, FRAC_PI_2, Side::Right, phase).unwrap();
            assert!((r - 2.0 * l).abs() < 1e-14);
        }
        assert!(leading_eigenfunction(&c0(), 3, 4.0, Side::Left, c).is_err());
    }

    #[test]
    fn reference_eigenfunction_phase_differs_when_stiffness_jumps() {
        let a = leading_eigenfunction(&c2(), 10, 2.5, Side::Left, PhaseConvention::Paper).unwrap();
        let b =
            leading_eigenfunction(&c2(), 10, 2.5, Side::Left, PhaseConvention::Corrected).unwrap();
        assert!((a - b).abs() > 0.1);
    }

    #[test]
    fn refined_w1_reductions() {
        assert!(
            (refined_w1_asym(&c0(), 4.0, 1.0, 512).unwrap() - SQRT_2 * (4.0 + FRAC_PI_4).cos())
                .abs()
                < 1e-15
        );
        assert!((refined_w1_asym(&c2(), 9.0, 0.0, 512).unwrap() - 1.0).abs() < 1e-15);
        assert!((first_order_w1(&c2(), 9.0, 0.0, 512).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_order_w1_tracks_solver() {
        let spec = c2();
        let cfg = IntegratorConfig::default();
        let err = |s: f64| {
            let sol = solve_w(&spec, s, &cfg).unwrap();
            let x = FRAC_PI_4;
            (sol.left.eval(x).0 - first_order_w1(&spec, s, x, oscillatory_panels(s)).unwrap()).abs()
        };
        let (e1, e2) = (err(10.0), err(40.0));
        assert!(e2 < e1 / 4.0, "{e1} {e2}");
    }

    #[test]
    fn reference_u1n_reductions() {
        let v = paper_u1n(&c0(), 5, 0.0, 512).unwrap();
        assert!((v - (1.0 - 4.0 / (17.0 * PI))).abs() < 1e-14);
        let x = 0.7;
        let th = 2.0 * 17.0 * x / 6.0 + FRAC_PI_4;
        let spec = with("0", "0", c2());
        let want = SQRT_2 * th.cos() - th.sin() * 4.0 * SQRT_2 / (17.0 * PI) * 0.5;
        assert!((paper_u1n(&spec, 5, x, 512).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn reference_u2n_evaluates() {
        assert!(paper_u2n(&c2(), 8, 2.0, 512).unwrap().is_finite());
        assert!(paper_u2n(&c2(), 8, 1.0, 512).is_err());
    }

    #[test]
    fn lemma2_constants() {
        let cfg = IntegratorConfig::default();
        let spec = c2();
        let r = lemma2_report(&spec, &solve_w(&spec, 5.0, &cfg).unwrap(), 512).unwrap();
        assert!((r.q1 - 1.0).abs() < 1e-10);
        assert!((r.q2 - 0.5).abs() < 1e-10);
        assert!((r.q2_signed + 0.5).abs() < 1e-10);
        assert!((r.lambda_threshold - 4.0).abs() < 1e-9);
        assert!((r.bound15 - 5.0 * SQRT_2).abs() < 1e-12);
        assert!(r.applies() && r.left_holds() && r.right_holds() && r.derivative_holds());

        let r = lemma2_report(&c0(), &solve_w(&c0(), 3.0, &cfg).unwrap(), 512).unwrap();
        assert_eq!((r.q1, r.q2, r.lambda_threshold), (0.0, 0.0, 0.0));
        assert!((r.observed_sup_left - SQRT_2).abs() < 1e-3);
        assert_eq!(r.bound14, 2.0 * SQRT_2);
    }
}
