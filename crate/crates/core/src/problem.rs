//! Problem instances and the admissibility checks on their coefficients.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{CoefficientExpr, DerivOrder};

/// The interface point x = π/2 splits the domain into two pieces.
pub const INTERFACE: f64 = FRAC_PI_2;

/// Relative tolerance of the coupling identity γ₁δ₂p₁ = γ₂δ₁p₂.
pub const COUPLING_RTOL: f64 = 1e-12;

/// Smallest grid used by [`ProblemSpec::check_admissibility`].
pub const MIN_ADMISSIBILITY_GRID: usize = 512;

/// Step for the finite-difference smoothness checks.
pub const FD_STEP: f64 = 1e-5;

/// Finite-difference derivatives above this size are taken as unbounded.
pub const DERIVATIVE_CAP: f64 = 1e4;

const RANGE_SLACK: f64 = 1e-12;
const SLOPE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Piece {
    Left,
    Right,
}

impl Piece {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Piece::Left => (0.0, INTERFACE),
            Piece::Right => (INTERFACE, PI),
        }
    }
}

/// All parameters of one boundary value problem.
///
/// `p(x) = p1²` on the left piece and `p2²` on the right one; `gamma*` and
/// `delta*` are the transmission coefficients, `d` multiplies λ in the
/// boundary condition at π.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub p1: f64,
    pub p2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub d: f64,
    pub q: CoefficientExpr,
    pub delay: CoefficientExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub delay_nonneg: bool,
    pub range_left_ok: bool,
    pub range_right_ok: bool,
    pub cond_a_ok: bool,
    pub cond_b_ok: bool,
    pub grid_size: usize,
    pub worst_margin: f64,
    /// Largest Δ′ seen on the grid (condition b allows up to 1).
    pub max_delay_slope: f64,
}

impl AdmissibilityReport {
    pub fn all_ok(&self) -> bool {
        self.delay_nonneg
            && self.range_left_ok
            && self.range_right_ok
            && self.cond_a_ok
            && self.cond_b_ok
    }
}

impl ProblemSpec {
    /// Checks the standing assumptions and hands the spec back unchanged.
    pub fn validate(self) -> Result<Self> {
        let named = [
            ("p1", self.p1),
            ("p2", self.p2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("d", self.d),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonfiniteParameter(name));
        }
        if self.p1 <= 0.0 || self.p2 <= 0.0 {
            return Err(Error::NonpositiveStiffness {
                p1: self.p1,
                p2: self.p2,
            });
        }
        for (i, g, dl) in [(1, self.gamma1, self.delta1), (2, self.gamma2, self.delta2)] {
            if g.abs() + dl.abs() == 0.0 {
                return Err(Error::DegenerateTransmission(format!(
                    "|gamma{i}| + |delta{i}| = 0"
                )));
            }
            if dl == 0.0 {
                return Err(Error::DegenerateTransmission(format!("delta{i} = 0")));
            }
        }
        let lhs = self.gamma1 * self.delta2 * self.p1;
        let rhs = self.gamma2 * self.delta1 * self.p2;
        if (lhs - rhs).abs() > COUPLING_RTOL * lhs.abs().max(1.0) {
            return Err(Error::ConstraintViolation { lhs, rhs });
        }
        Ok(self)
    }

    pub fn stiffness(&self, piece: Piece) -> f64 {
        match piece {
            Piece::Left => self.p1,
            Piece::Right => self.p2,
        }
    }

    /// Evaluates `q` and `Δ` on `grid_size` uniform points of each closed
    /// piece (endpoints stand for the one-sided limits) and reports the
    /// range assumptions and conditions a)/b).
    pub fn check_admissibility(&self, grid_size: usize) -> Result<AdmissibilityReport> {
        if grid_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "admissibility grid needs at least 2 points, got {grid_size}"
            )));
        }
        let grid = grid_size.max(MIN_ADMISSIBILITY_GRID);
        let mut worst = f64::INFINITY;
        let track = |worst: &mut f64, slack: f64| {
            *worst = worst.min(slack);
            slack >= -RANGE_SLACK
        };

        let mut delay_nonneg = true;
        let mut range_ok = [true, true];
        let mut cond_a_ok = true;
        let mut slope_ok = true;
        let mut max_slope = f64::NEG_INFINITY;

        for (k, piece) in [Piece::Left, Piece::Right].into_iter().enumerate() {
            let (a, b) = piece.bounds();
            for i in 0..grid {
                let x = a + (b - a) * i as f64 / (grid - 1) as f64;
                let delay = self.delay.eval(x)?;
                self.q.eval(x)?;
                delay_nonneg &= track(&mut worst, delay);
                range_ok[k] &= track(&mut worst, x - delay - a);

                // keep the difference stencil inside the piece
                let xd = x.clamp(a + 2.0 * FD_STEP, b - 2.0 * FD_STEP);
                let dq = self.q.numeric_derivative(xd, DerivOrder::First, FD_STEP)?;
                let dd2 = self
                    .delay
                    .numeric_derivative(xd, DerivOrder::Second, FD_STEP)?;
                cond_a_ok &= dq.abs() <= DERIVATIVE_CAP && dd2.abs() <= DERIVATIVE_CAP;

                let dd = self
                    .delay
                    .numeric_derivative(xd, DerivOrder::First, FD_STEP)?;
                max_slope = max_slope.max(dd);
                worst = worst.min(1.0 - dd);
                slope_ok &= dd <= 1.0 + SLOPE_SLACK;
            }
        }

        let at_zero = self.delay.eval(0.0)?.abs();
        let at_interface = self.delay.eval(INTERFACE)?.abs();
        worst = worst.min(-at_zero).min(-at_interface);
        let cond_b_ok = slope_ok && at_zero <= RANGE_SLACK && at_interface <= RANGE_SLACK;

        Ok(AdmissibilityReport {
            delay_nonneg,
            range_left_ok: range_ok[0],
            range_right_ok: range_ok[1],
            cond_a_ok,
            cond_b_ok,
            grid_size: grid,
            worst_margin: worst,
            max_delay_slope: max_slope,
        })
    }

    /// Mutual ratio γ₁/δ₁ applied to the value at the interface.
    pub fn value_jump(&self) -> f64 {
        self.gamma1 / self.delta1
    }

    /// Ratio γ₂/δ₂ applied to the derivative at the interface.
    pub fn slope_jump(&self) -> f64 {
        self.gamma2 / self.delta2
    }
}

/// Reference instances used throughout the tests and the bundled configs.
pub mod reference {
    use super::*;

    fn build(p: [f64; 7], q: &str, delay: &str) -> ProblemSpec {
        ProblemSpec {
            p1: p[0],
            p2: p[1],
            gamma1: p[2],
            gamma2: p[3],
            delta1: p[4],
            delta2: p[5],
            d: p[6],
            q: CoefficientExpr::parse(q).expect("reference expression"),
            delay: CoefficientExpr::parse(delay).expect("reference expression"),
        }
    }

    /// Continuous reduction: no jump, no potential, no delay.
    pub fn c0() -> ProblemSpec {
        build([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], "0", "0")
    }

    /// Discontinuous, delayed, with dγ₁p₁/δ₁ = 2.
    pub fn c1() -> ProblemSpec {
        build(
            [1.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0],
            "cos(x)",
            "0.4*abs(sin(2*x))",
        )
    }

    /// Discontinuous, delayed, with dγ₁p₁/δ₁ = 1.
    pub fn c2() -> ProblemSpec {
        build(
            [1.0, 2.0, 1.0, 1.0, 1.0, 2.0, 1.0],
            "cos(x)",
            "0.4*abs(sin(2*x))",
        )
    }
}

#[cfg(test)]
mod tests {
    use super::reference::*;
    use super::*;

    fn with_delay(spec: ProblemSpec, delay: &str) -> ProblemSpec {
        ProblemSpec {
            delay: CoefficientExpr::parse(delay).unwrap(),
            ..spec
        }
    }

    #[test]
    fn coupling_identity_accepts_c2() {
        let spec = c2();
        assert_eq!(spec.clone().validate().unwrap(), spec);
        assert!(c0().validate().is_ok());
        assert!(c1().validate().is_ok());
    }

    #[test]
    fn coupling_identity_rejects_unit_coefficients_with_unequal_stiffness() {
        let spec = ProblemSpec {
            delta2: 1.0,
            ..c2()
        };
        assert!(matches!(
            spec.validate(),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn zero_delta_is_degenerate() {
        let spec = ProblemSpec {
            delta1: 0.0,
            ..c2()
        };
        assert!(matches!(
            spec.validate(),
            Err(Error::DegenerateTransmission(_))
        ));
        let spec = ProblemSpec {
            gamma2: 0.0,
            delta2: 0.0,
            ..c2()
        };
        assert!(matches!(
            spec.validate(),
            Err(Error::DegenerateTransmission(_))
        ));
    }

    #[test]
    fn nonpositive_stiffness() {
        let spec = ProblemSpec { p1: 0.0, ..c0() };
        assert!(matches!(
            spec.validate(),
            Err(Error::NonpositiveStiffness { .. })
        ));
        let spec = ProblemSpec { p2: -1.0, ..c0() };
        assert!(matches!(
            spec.validate(),
            Err(Error::NonpositiveStiffness { .. })
        ));
    }

    #[test]
    fn nonfinite_parameter() {
        let spec = ProblemSpec {
            d: f64::NAN,
            ..c0()
        };
        assert!(matches!(
            spec.validate(),
            Err(Error::NonfiniteParameter("d"))
        ));
    }

    #[test]
    fn zero_delay_is_admissible() {
        let r = c0().check_admissibility(512).unwrap();
        assert!(r.all_ok(), "{r:?}");
        assert_eq!(r.worst_margin, 0.0);
        let r = c0().check_admissibility(2).unwrap();
        assert!(r.all_ok());
        assert_eq!(r.grid_size, MIN_ADMISSIBILITY_GRID);
    }

    #[test]
    fn sine_delay_is_admissible() {
        let r = c2().check_admissibility(1024).unwrap();
        assert!(r.all_ok(), "{r:?}");
        assert!(
            (r.max_delay_slope - 0.8).abs() < 1e-4,
            "{}",
            r.max_delay_slope
        );
    }

    #[test]
    fn steep_delay_breaks_condition_b() {
        let r = with_delay(c2(), "0.6*abs(sin(2*x))")
            .check_admissibility(1024)
            .unwrap();
        assert!(!r.cond_b_ok);
        assert!((r.max_delay_slope - 1.2).abs() < 1e-4);
        assert!(r.worst_margin < 0.0);
    }

    #[test]
    fn negative_delay_and_range_violations() {
        let r = with_delay(c0(), "-0.1").check_admissibility(512).unwrap();
        assert!(!r.delay_nonneg);
        let r = with_delay(c0(), "0.1").check_admissibility(512).unwrap();
        assert!(r.delay_nonneg);
        assert!(!r.range_left_ok && !r.range_right_ok && !r.cond_b_ok);
    }

    #[test]
    fn kinked_delay_breaks_condition_a() {
        // kink of Δ at x = π/4 sits on the left grid
        let r = with_delay(c0(), "0.1*abs(x - pi/4)")
            .check_admissibility(513)
            .unwrap();
        assert!(!r.cond_a_ok);
    }

    #[test]
    fn evaluation_failure_propagates() {
        let spec = ProblemSpec {
            q: CoefficientExpr::parse("1/x").unwrap(),
            ..c0()
        };
        assert!(matches!(spec.check_admissibility(512), Err(Error::Expr(_))));
    }
}
