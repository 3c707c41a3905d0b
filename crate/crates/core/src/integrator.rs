//! Shooting solution `w(x, λ)` of the retarded equation
//!
//! ```text
//! p(x) y''(x) + q(x) y(x - Δ(x)) + s² y(x) = 0,   λ = s²,
//! ```
//!
//! built piece by piece: `w₁` on `[0, π/2]` from `w₁(0) = p₁`, `w₁'(0) = -s`,
//! then `w₂` on `[π/2, π]` from the transmission data
//! `w₂(π/2) = (γ₁/δ₁) w₁(π/2)`, `w₂'(π/2) = (γ₂/δ₂) w₁'(π/2)`.
//!
//! Steps are uniform. The delayed value `y(x - Δ(x))` always comes from the
//! cubic Hermite dense output of the same piece. When the delayed point
//! falls inside the step being taken, the step is first computed with the
//! previous interval's cubic extrapolated forward and then recomputed
//! `delay_correction_passes` times with the step's own interpolant.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Piece, ProblemSpec, INTERFACE};
use crate::quadrature::simpson;

/// Delayed points this close outside their piece are clamped back in.
const RANGE_SLACK: f64 = 1e-12;

/// Number of interior test abscissae per piece for [`integral_residuals`].
pub const RESIDUAL_TEST_POINTS: usize = 32;

/// How a single step advances `(y, y')`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepScheme {
    /// Four-stage Runge-Kutta in the frame that co-rotates with the free
    /// oscillation `cos(s x / p)` (Lawson's integrating-factor RK4). The free
    /// part is propagated exactly; only the delayed forcing is discretised.
    #[default]
    IntegratingFactor,
    /// Classical RK4 on the first-order system.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub steps_per_piece: usize,
    pub delay_correction_passes: usize,
    pub residual_quadrature_panels: usize,
    pub scheme: StepScheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_piece: 2000,
            delay_correction_passes: 2,
            residual_quadrature_panels: 512,
            scheme: StepScheme::default(),
        }
    }
}

impl IntegratorConfig {
    pub fn with_steps(self, steps_per_piece: usize) -> Self {
        Self {
            steps_per_piece,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_piece < 16 {
            return Err(Error::InvalidArgument(format!(
                "steps_per_piece must be at least 16, got {}",
                self.steps_per_piece
            )));
        }
        if self.delay_correction_passes < 1 {
            return Err(Error::InvalidArgument(
                "delay_correction_passes must be at least 1".into(),
            ));
        }
        if self.residual_quadrature_panels < 2 {
            return Err(Error::InvalidArgument(
                "residual_quadrature_panels must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Which one-sided limit to take at the interface.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// Node values of one piece plus the cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionTrace {
    pub piece: Piece,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// Monomial coefficients of `y` in the local coordinate `t ∈ [0, 1]` of
    /// each interval.
    pub hermite: Vec<[f64; 4]>,
    pub s: f64,
}

impl SolutionTrace {
    fn new(piece: Piece, nodes: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>, s: f64) -> Self {
        let hermite = (0..nodes.len() - 1)
            .map(|i| {
                let h = nodes[i + 1] - nodes[i];
                let (y0, y1) = (values[i], values[i + 1]);
                let (d0, d1) = (h * derivs[i], h * derivs[i + 1]);
                [
                    y0,
                    d0,
                    -3.0 * y0 - 2.0 * d0 + 3.0 * y1 - d1,
                    2.0 * y0 + d0 - 2.0 * y1 + d1,
                ]
            })
            .collect();
        Self {
            piece,
            nodes,
            values,
            derivs,
            hermite,
            s,
        }
    }

    pub fn start(&self) -> (f64, f64) {
        (self.values[0], self.derivs[0])
    }

    pub fn end(&self) -> (f64, f64) {
        let last = self.values.len() - 1;
        (self.values[last], self.derivs[last])
    }

    /// Largest `|y|` over the nodes.
    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn locate(&self, x: f64) -> usize {
        let a = self.nodes[0];
        let last = self.nodes.len() - 1;
        let h = (self.nodes[last] - a) / last as f64;
        let mut i = (((x - a) / h).floor().max(0.0) as usize).min(last - 1);
        // uniform-grid guess can be off by one from rounding
        if x < self.nodes[i] && i > 0 {
            i -= 1;
        } else if x > self.nodes[i + 1] && i + 1 < last {
            i += 1;
        }
        i
    }

    /// Dense output `(y, y')` at `x`; exact at nodes. Points outside the
    /// piece are extrapolated from the end intervals.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let i = self.locate(x);
        if x == self.nodes[i] {
            return (self.values[i], self.derivs[i]);
        }
        if x == self.nodes[i + 1] {
            return (self.values[i + 1], self.derivs[i + 1]);
        }
        let h = self.nodes[i + 1] - self.nodes[i];
        let t = (x - self.nodes[i]) / h;
        let [c0, c1, c2, c3] = self.hermite[i];
        let y = c0 + t * (c1 + t * (c2 + t * c3));
        let yp = (c1 + t * (2.0 * c2 + 3.0 * t * c3)) / h;
        (y, yp)
    }
}

/// `w(x, λ)` on both pieces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseSolution {
    pub left: SolutionTrace,
    pub right: SolutionTrace,
    pub lambda: f64,
    pub s: f64,
}

impl PiecewiseSolution {
    /// `(w(π), w'(π))`.
    pub fn at_pi(&self) -> (f64, f64) {
        self.right.end()
    }

    /// Dense evaluation; at `x = π/2` the side picks the one-sided limit.
    pub fn eval(&self, x: f64, side: Side) -> Result<(f64, f64)> {
        if !(0.0..=PI).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let trace = if x < INTERFACE || (x == INTERFACE && side == Side::Left) {
            &self.left
        } else {
            &self.right
        };
        Ok(trace.eval(x))
    }

    pub fn trace(&self, piece: Piece) -> &SolutionTrace {
        match piece {
            Piece::Left => &self.left,
            Piece::Right => &self.right,
        }
    }
}

/// `q` and the delayed abscissa `x - Δ(x)` sampled at every node and
/// midpoint of one piece. These do not depend on `s`.
#[derive(Debug, Clone)]
struct PieceSamples {
    a: f64,
    b: f64,
    q: Vec<f64>,
    delayed: Vec<f64>,
}

impl PieceSamples {
    fn new(spec: &ProblemSpec, piece: Piece, steps: usize) -> Result<Self> {
        let (a, b) = piece.bounds();
        let n = 2 * steps;
        let mut q = Vec::with_capacity(n + 1);
        let mut delayed = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let x = if j == n {
                b
            } else {
                a + (b - a) * j as f64 / n as f64
            };
            q.push(spec.q.eval(x)?);
            let z = x - spec.delay.eval(x)?;
            if z < a - RANGE_SLACK || z > x + RANGE_SLACK || !z.is_finite() {
                return Err(Error::DelayOutOfRange {
                    x,
                    delayed: z,
                    piece_start: a,
                });
            }
            delayed.push(z.clamp(a, x));
        }
        Ok(Self { a, b, q, delayed })
    }
}

/// Precomputed coefficient samples for repeated shooting at many `s`.
#[derive(Debug, Clone)]
pub struct Shooter<'a> {
    spec: &'a ProblemSpec,
    cfg: IntegratorConfig,
    left: PieceSamples,
    right: PieceSamples,
}

impl<'a> Shooter<'a> {
    pub fn new(spec: &'a ProblemSpec, cfg: &IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            spec,
            cfg: *cfg,
            left: PieceSamples::new(spec, Piece::Left, cfg.steps_per_piece)?,
            right: PieceSamples::new(spec, Piece::Right, cfg.steps_per_piece)?,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn integrate_left(&self, s: f64) -> Result<SolutionTrace> {
        self.integrate(Piece::Left, s, (self.spec.p1, -s))
    }

    pub fn integrate_right(&self, s: f64, initial: (f64, f64)) -> Result<SolutionTrace> {
        self.integrate(Piece::Right, s, initial)
    }

    pub fn solve(&self, s: f64) -> Result<PiecewiseSolution> {
        let left = self.integrate_left(s)?;
        let initial = transmit(&left, self.spec);
        let right = self.integrate_right(s, initial)?;
        Ok(PiecewiseSolution {
            left,
            right,
            lambda: s * s,
            s,
        })
    }

    /// `G(s) = w'(π) + d s² w(π)`, the boundary residual at π.
    pub fn characteristic(&self, s: f64) -> Result<f64> {
        let (y, yp) = self.solve(s)?.at_pi();
        Ok(yp + self.spec.d * s * s * y)
    }

    fn integrate(&self, piece: Piece, s: f64, initial: (f64, f64)) -> Result<SolutionTrace> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "s must be positive, got {s}"
            )));
        }
        let samples = match piece {
            Piece::Left => &self.left,
            Piece::Right => &self.right,
        };
        let p = self.spec.stiffness(piece);
        let n = self.cfg.steps_per_piece;
        let (a, b) = (samples.a, samples.b);
        let h = (b - a) / n as f64;
        let stepper = Stepper::new(self.cfg.scheme, s / p, 1.0 / (p * p), h);

        let mut nodes = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        let mut derivs = Vec::with_capacity(n + 1);
        nodes.push(a);
        values.push(initial.0);
        derivs.push(initial.1);

        for k in 0..n {
            let x0 = nodes[k];
            let x1 = if k + 1 == n {
                b
            } else {
                a + (k + 1) as f64 * h
            };
            let q = [samples.q[2 * k], samples.q[2 * k + 1], samples.q[2 * k + 2]];
            let z = [
                samples.delayed[2 * k],
                samples.delayed[2 * k + 1],
                samples.delayed[2 * k + 2],
            ];
            let (y0, yp0) = (values[k], derivs[k]);

            let next = if q.iter().all(|&v| v == 0.0) {
                stepper.step((y0, yp0), [0.0; 3])
            } else {
                let history = History {
                    nodes: &nodes,
                    values: &values,
                    derivs: &derivs,
                };
                let d0 = history.value(z[0]);
                let in_step = z[1] > x0 || z[2] > x0;
                let forcing = |dm: f64, d1: f64| {
                    [
                        -q[0] * d0 * stepper.inv_p2,
                        -q[1] * dm * stepper.inv_p2,
                        -q[2] * d1 * stepper.inv_p2,
                    ]
                };
                if !in_step {
                    stepper.step((y0, yp0), forcing(history.value(z[1]), history.value(z[2])))
                } else {
                    // predictor: previous interval extrapolated, or the free
                    // oscillation on the very first step
                    let predict = |zz: f64| {
                        if zz <= x0 {
                            history.value(zz)
                        } else if k == 0 {
                            let dz = zz - x0;
                            let w = stepper.omega;
                            y0 * (w * dz).cos() + yp0 * (w * dz).sin() / w
                        } else {
                            history.extrapolate(zz)
                        }
                    };
                    let mut next = stepper.step((y0, yp0), forcing(predict(z[1]), predict(z[2])));
                    for _ in 0..self.cfg.delay_correction_passes {
                        let current = |zz: f64| {
                            if zz <= x0 {
                                history.value(zz)
                            } else {
                                hermite_value(x0, x1, (y0, yp0), next, zz)
                            }
                        };
                        next = stepper.step((y0, yp0), forcing(current(z[1]), current(z[2])));
                    }
                    next
                }
            };

            if !(next.0.is_finite() && next.1.is_finite()) {
                return Err(Error::NonfiniteState { x: x1 });
            }
            nodes.push(x1);
            values.push(next.0);
            derivs.push(next.1);
        }

        Ok(SolutionTrace::new(piece, nodes, values, derivs, s))
    }
}

struct History<'h> {
    nodes: &'h [f64],
    values: &'h [f64],
    derivs: &'h [f64],
}

impl History<'_> {
    fn interval(&self, z: f64) -> usize {
        let last = self.nodes.len() - 1;
        let a = self.nodes[0];
        let h = self.nodes[1] - a;
        (((z - a) / h).floor().max(0.0) as usize).min(last - 1)
    }

    /// `y(z)` for `z` inside the completed history.
    fn value(&self, z: f64) -> f64 {
        let last = self.nodes.len() - 1;
        if last == 0 || z <= self.nodes[0] {
            return self.values[0];
        }
        if z >= self.nodes[last] {
            return self.values[last];
        }
        let i = self.interval(z);
        self.hermite(i, z)
    }

    /// The last completed interval's cubic, evaluated beyond its end.
    fn extrapolate(&self, z: f64) -> f64 {
        let last = self.nodes.len() - 1;
        self.hermite(last - 1, z)
    }

    fn hermite(&self, i: usize, z: f64) -> f64 {
        hermite_value(
            self.nodes[i],
            self.nodes[i + 1],
            (self.values[i], self.derivs[i]),
            (self.values[i + 1], self.derivs[i + 1]),
            z,
        )
    }
}

fn hermite_value(x0: f64, x1: f64, (y0, d0): (f64, f64), (y1, d1): (f64, f64), z: f64) -> f64 {
    if z == x0 {
        return y0;
    }
    if z == x1 {
        return y1;
    }
    let h = x1 - x0;
    let t = (z - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// One uniform step of either scheme. `forcing[j]` is the delayed term
/// `-q y(x - Δ) / p²` at the start, midpoint and end of the step.
struct Stepper {
    scheme: StepScheme,
    omega: f64,
    inv_p2: f64,
    h: f64,
    cos_h: f64,
    sin_h: f64,
    cos_half: f64,
    sin_half: f64,
}

impl Stepper {
    fn new(scheme: StepScheme, omega: f64, inv_p2: f64, h: f64) -> Self {
        Self {
            scheme,
            omega,
            inv_p2,
            h,
            cos_h: (omega * h).cos(),
            sin_h: (omega * h).sin(),
            cos_half: (omega * h / 2.0).cos(),
            sin_half: (omega * h / 2.0).sin(),
        }
    }

    fn step(&self, (y, yp): (f64, f64), [g0, gm, g1]: [f64; 3]) -> (f64, f64) {
        let h = self.h;
        match self.scheme {
            StepScheme::IntegratingFactor => {
                let w = self.omega;
                let y1 = self.cos_h * y
                    + self.sin_h / w * yp
                    + h / 6.0 * (g0 * self.sin_h / w + 4.0 * gm * self.sin_half / w);
                let yp1 = -w * self.sin_h * y
                    + self.cos_h * yp
                    + h / 6.0 * (g0 * self.cos_h + 4.0 * gm * self.cos_half + g1);
                (y1, yp1)
            }
            StepScheme::Classical => {
                let w2 = self.omega * self.omega;
                let f = |y: f64, yp: f64, g: f64| (yp, g - w2 * y);
                let k1 = f(y, yp, g0);
                let k2 = f(y + 0.5 * h * k1.0, yp + 0.5 * h * k1.1, gm);
                let k3 = f(y + 0.5 * h * k2.0, yp + 0.5 * h * k2.1, gm);
                let k4 = f(y + h * k3.0, yp + h * k3.1, g1);
                (
                    y + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                    yp + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
                )
            }
        }
    }
}

/// Initial data of `w₂` at π/2 from the left trace.
pub fn transmit(left: &SolutionTrace, spec: &ProblemSpec) -> (f64, f64) {
    let (y, yp) = left.end();
    (spec.value_jump() * y, spec.slope_jump() * yp)
}

pub fn integrate_left(spec: &ProblemSpec, s: f64, cfg: &IntegratorConfig) -> Result<SolutionTrace> {
    Shooter::new(spec, cfg)?.integrate_left(s)
}

pub fn integrate_right(
    spec: &ProblemSpec,
    s: f64,
    initial: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<SolutionTrace> {
    Shooter::new(spec, cfg)?.integrate_right(s, initial)
}

pub fn solve_w(spec: &ProblemSpec, s: f64, cfg: &IntegratorConfig) -> Result<PiecewiseSolution> {
    Shooter::new(spec, cfg)?.solve(s)
}

pub fn eval_solution(sol: &PiecewiseSolution, x: f64, side: Side) -> Result<(f64, f64)> {
    sol.eval(x, side)
}

/// Max-norm residuals of the two Volterra integral equations that `w₁` and
/// `w₂` satisfy, on [`RESIDUAL_TEST_POINTS`] abscissae per piece. The
/// integrals are composite Simpson with `residual_quadrature_panels` panels,
/// and `q`, `Δ` are evaluated from their expressions, not from the solver's
/// samples.
pub fn integral_residuals(
    sol: &PiecewiseSolution,
    spec: &ProblemSpec,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let s = sol.s;
    let panels = cfg.residual_quadrature_panels;

    let (p1, p2) = (spec.p1, spec.p2);
    let r1 = max_residual(Piece::Left, |x| {
        let free = SQRT_2 * p1 * (s * x / p1 + FRAC_PI_4).cos();
        let integral = delayed_convolution(spec, &sol.left, s, p1, x, panels)?;
        Ok((sol.left.eval(x).0 - (free - integral / (s * p1))).abs())
    })?;

    let (y0, yp0) = transmit(&sol.left, spec);
    let r2 = max_residual(Piece::Right, |x| {
        let arg = s * (x - INTERFACE) / p2;
        let free = y0 * arg.cos() + p2 * yp0 / s * arg.sin();
        let integral = delayed_convolution(spec, &sol.right, s, p2, x, panels)?;
        Ok((sol.right.eval(x).0 - (free - integral / (s * p2))).abs())
    })?;

    Ok((r1, r2))
}

fn max_residual(piece: Piece, mut at: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let (a, b) = piece.bounds();
    let mut worst: f64 = 0.0;
    for j in 1..=RESIDUAL_TEST_POINTS {
        let x = a + (b - a) * j as f64 / RESIDUAL_TEST_POINTS as f64;
        worst = worst.max(at(x)?);
    }
    Ok(worst)
}

/// `∫_a^x q(τ) sin(s (x - τ) / p) w(τ - Δ(τ)) dτ` over the trace's piece.
fn delayed_convolution(
    spec: &ProblemSpec,
    trace: &SolutionTrace,
    s: f64,
    p: f64,
    x: f64,
    panels: usize,
) -> Result<f64> {
    let a = trace.nodes[0];
    simpson(
        |tau| -> Result<f64> {
            let q = spec.q.eval(tau)?;
            if q == 0.0 {
                return Ok(0.0);
            }
            let z = (tau - spec.delay.eval(tau)?).clamp(a, tau);
            Ok(q * (s * (x - tau) / p).sin() * trace.eval(z).0)
        },
        a,
        x,
        panels,
    )
}
