//! Eigenvalues as roots of the characteristic function
//! `G(s) = w'(π, s²) + d s² w(π, s²)`, searched one asymptotic window at a
//! time.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, PiecewiseSolution, Shooter};
use crate::problem::ProblemSpec;

pub const DEFAULT_SCAN_POINTS: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const MIN_SCAN_POINTS: usize = 16;

/// Relative step of the central difference behind `simplicity_margin`.
const MARGIN_STEP: f64 = 1e-5;

/// Safety cap; `tol` is reached long before this for any sane window.
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenRecord {
    pub n: usize,
    pub s_n: f64,
    pub lambda_n: f64,
    pub window: (f64, f64),
    /// Final bisection bracket; `G` changes sign across it.
    pub bracket: (f64, f64),
    /// `|G'(s_n)| / (1 + s_n²)`.
    pub simplicity_margin: f64,
    pub bisection_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumReport {
    pub records: Vec<EigenRecord>,
    pub failures: Vec<(usize, Error)>,
}

impl SpectrumReport {
    pub fn record(&self, n: usize) -> Option<&EigenRecord> {
        self.records.iter().find(|r| r.n == n)
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Center and halfwidth of the search window for index `n`. Consecutive
/// windows tile the positive `s` axis.
pub fn window_for(spec: &ProblemSpec, n: usize) -> (f64, f64) {
    let (p1, p2) = (spec.p1, spec.p2);
    let center = p1 * p2 * (4.0 * n as f64 - 3.0) / (2.0 * (p1 + p2));
    (center, p1 * p2 / (p1 + p2))
}

pub fn characteristic(spec: &ProblemSpec, s: f64, cfg: &IntegratorConfig) -> Result<f64> {
    Shooter::new(spec, cfg)?.characteristic(s)
}

pub fn find_eigenvalue(
    spec: &ProblemSpec,
    n: usize,
    cfg: &IntegratorConfig,
    scan_points: usize,
    tol: f64,
) -> Result<EigenRecord> {
    let shooter = Shooter::new(spec, cfg)?;
    find_with(&shooter, n, scan_points, tol)
}

/// [`find_eigenvalue`] with a prebuilt shooter.
pub fn find_with(shooter: &Shooter, n: usize, scan_points: usize, tol: f64) -> Result<EigenRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "eigenvalue index starts at 1".into(),
        ));
    }
    let (center, hw) = window_for(shooter.spec(), n);
    if center - hw <= 0.0 {
        return Err(Error::WindowNotPositive { n });
    }
    root_in_window(shooter, n, (center - hw, center + hw), scan_points, tol)
}

/// Scan `window` at `scan_points + 1` equispaced abscissae, require exactly
/// one sign change and bisect it down to `tol`.
pub fn root_in_window(
    shooter: &Shooter,
    n: usize,
    window: (f64, f64),
    scan_points: usize,
    tol: f64,
) -> Result<EigenRecord> {
    let (lo, hi) = window;
    if scan_points < MIN_SCAN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "scan_points must be at least {MIN_SCAN_POINTS}, got {scan_points}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad window ({lo}, {hi})")));
    }

    let grid: Vec<f64> = (0..=scan_points)
        .map(|j| {
            if j == scan_points {
                hi
            } else {
                lo + (hi - lo) * j as f64 / scan_points as f64
            }
        })
        .collect();
    let values = grid
        .par_iter()
        .map(|&s| shooter.characteristic(s))
        .collect::<Result<Vec<f64>>>()?;

    let brackets = sign_changes(&grid, &values);
    let (mut a, mut b, mut ga) = match brackets.as_slice() {
        [] => return Err(Error::NoRootInWindow { n, lo, hi }),
        [(a, ga, b)] => (*a, *b, *ga),
        many => {
            return Err(Error::MultipleRootsInWindow {
                n,
                lo,
                hi,
                count: many.len(),
            })
        }
    };

    let mut iters = 0;
    while b - a > tol && iters < MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = shooter.characteristic(mid)?;
        iters += 1;
        if gm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    let s_n = 0.5 * (a + b);

    let h = MARGIN_STEP * s_n.max(1.0);
    let slope = (shooter.characteristic(s_n + h)? - shooter.characteristic(s_n - h)?) / (2.0 * h);

    Ok(EigenRecord {
        n,
        s_n,
        lambda_n: s_n * s_n,
        window,
        bracket: (a, b),
        simplicity_margin: slope.abs() / (1.0 + s_n * s_n),
        bisection_iters: iters,
    })
}

/// Sign changes of `values` over `grid` as `(left, value at left, right)`.
/// Exact zeros are skipped so a root sitting on a grid point is counted once.
fn sign_changes(grid: &[f64], values: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&s, &g) in grid.iter().zip(values) {
        if g == 0.0 {
            continue;
        }
        if let Some((s0, g0)) = last {
            if g0.signum() != g.signum() {
                out.push((s0, g0, s));
            }
        }
        last = Some((s, g));
    }
    out
}

/// One [`find_eigenvalue`] per index in `n_min..=n_max`, run in parallel.
/// Failures are collected rather than returned.
pub fn spectrum(
    spec: &ProblemSpec,
    n_min: usize,
    n_max: usize,
    cfg: &IntegratorConfig,
    scan_points: usize,
    tol: f64,
) -> SpectrumReport {
    let shooter = match Shooter::new(spec, cfg) {
        Ok(sh) => sh,
        Err(e) => {
            return SpectrumReport {
                records: Vec::new(),
                failures: (n_min..=n_max).map(|n| (n, e.clone())).collect(),
            }
        }
    };
    let results: Vec<(usize, Result<EigenRecord>)> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| (n, find_with(&shooter, n, scan_points, tol)))
        .collect();
    let mut report = SpectrumReport::default();
    for (n, r) in results {
        match r {
            Ok(rec) => report.records.push(rec),
            Err(e) => report.failures.push((n, e)),
        }
    }
    report
}

/// Number of sign changes of `G` on a uniform grid up to `s_max` with
/// spacing at most a quarter of the window halfwidth. The grid starts half a
/// spacing below `s = 1` so that a root sitting exactly on 1 is counted
/// whatever sign roundoff gives `G(1)`.
pub fn count_in_range(spec: &ProblemSpec, s_max: f64, cfg: &IntegratorConfig) -> Result<usize> {
    if !(s_max > 1.0 && s_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "s_max must exceed 1, got {s_max}"
        )));
    }
    let shooter = Shooter::new(spec, cfg)?;
    let (_, hw) = window_for(spec, 1);
    let cells = ((s_max - 1.0) / (0.25 * hw)).ceil().max(1.0) as usize;
    let h = (s_max - 1.0) / cells as f64;
    let grid: Vec<f64> = std::iter::once(1.0 - 0.5 * h)
        .chain((1..=cells).map(|k| {
            if k == cells {
                s_max
            } else {
                1.0 + h * k as f64
            }
        }))
        .collect();
    let values = grid
        .par_iter()
        .map(|&s| shooter.characteristic(s))
        .collect::<Result<Vec<f64>>>()?;
    Ok(sign_changes(&grid, &values).len())
}

/// `w(x, λ_n)`, the eigenfunction normalized by `w(0) = p₁`.
pub fn eigenfunction(
    spec: &ProblemSpec,
    rec: &EigenRecord,
    cfg: &IntegratorConfig,
) -> Result<PiecewiseSolution> {
    Shooter::new(spec, cfg)?.solve(rec.s_n)
}

/// `d λ w(π) + w'(π)` for a computed solution.
pub fn right_boundary_residual(spec: &ProblemSpec, sol: &PiecewiseSolution) -> f64 {
    let (y, yp) = sol.at_pi();
    spec.d * sol.lambda * y + yp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::CoefficientExpr;
    use crate::problem::reference::{c0, c2};
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    fn c0_closed_form(s: f64) -> f64 {
        let th = s * PI + FRAC_PI_4;
        SQRT_2 * s * (s * th.cos() - th.sin())
    }

    #[test]
    fn windows() {
        assert_eq!(window_for(&c0(), 3), (2.25, 0.5));
        assert_eq!(window_for(&c0(), 1).0, 0.25);
        let (c, hw) = window_for(&c2(), 3);
        assert!((c - 3.0).abs() < 1e-15);
        assert!((hw - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn characteristic_matches_closed_form_on_c0() {
        for s in [2.0, 2.2, 5.3, 17.7] {
            let g = characteristic(&c0(), s, &cfg()).unwrap();
            let exact = c0_closed_form(s);
            assert!(
                (g - exact).abs() < 1e-9 * (1.0 + s * s),
                "{s}: {g} vs {exact}"
            );
        }
        let (a, b) = (
            characteristic(&c0(), 2.0, &cfg()).unwrap(),
            characteristic(&c0(), 2.2, &cfg()).unwrap(),
        );
        assert!(a * b < 0.0);
        let g = characteristic(&c0(), 2.10906, &cfg()).unwrap();
        assert!(g.abs() <= 1e-4 * (1.0 + 2.10906f64.powi(2)));
    }

    #[test]
    fn d_zero_root_of_sine_factor() {
        let spec = ProblemSpec { d: 0.0, ..c0() };
        let g = characteristic(&spec, 0.75, &cfg()).unwrap();
        assert!(g.abs() < 1e-10, "{g}");
    }

    #[test]
    fn c0_oracle_roots() {
        let r3 = find_eigenvalue(&c0(), 3, &cfg(), 64, 1e-10).unwrap();
        assert!((r3.s_n - 2.1090686762647133).abs() < 1e-8, "{}", r3.s_n);
        let r5 = find_eigenvalue(&c0(), 5, &cfg(), 64, 1e-10).unwrap();
        assert!((r5.s_n - 4.175170849298237).abs() < 1e-8, "{}", r5.s_n);
        assert_eq!(r5.lambda_n, r5.s_n * r5.s_n);
        assert!(r5.window.0 < r5.s_n && r5.s_n < r5.window.1);
        assert!(r5.bracket.1 - r5.bracket.0 <= 1e-10);
        assert!(r5.simplicity_margin > 1e-3);
    }

    #[test]
    fn stored_bracket_changes_sign() {
        let rec = find_eigenvalue(&c2(), 7, &cfg(), 64, 1e-8).unwrap();
        let ga = characteristic(&c2(), rec.bracket.0, &cfg()).unwrap();
        let gb = characteristic(&c2(), rec.bracket.1, &cfg()).unwrap();
        assert!(ga * gb < 0.0);
    }

    #[test]
    fn window_failures() {
        assert!(matches!(
            find_eigenvalue(&c0(), 1, &cfg(), 64, 1e-8),
            Err(Error::WindowNotPositive { n: 1 })
        ));
        let spec = c0();
        let shooter = Shooter::new(&spec, &cfg()).unwrap();
        let (c, hw) = window_for(&spec, 3);
        let shifted = (c + hw - 0.2, c + hw + 0.2);
        assert!(matches!(
            root_in_window(&shooter, 3, shifted, 64, 1e-8),
            Err(Error::NoRootInWindow { n: 3, .. })
        ));
        assert!(matches!(
            root_in_window(&shooter, 3, (1.5, 4.5), 64, 1e-8),
            Err(Error::MultipleRootsInWindow { count: 3, .. })
        ));
        assert!(root_in_window(&shooter, 3, (2.0, 2.5), 8, 1e-8).is_err());
        assert!(root_in_window(&shooter, 3, (2.0, 2.5), 64, 0.0).is_err());
    }

    #[test]
    fn spectrum_c0_five_to_eight() {
        let rep = spectrum(&c0(), 5, 8, &cfg(), 64, 1e-10);
        assert!(rep.is_complete());
        let oracle = [
            4.175170849298237,
            5.189404330925418,
            6.199090732459504,
            7.20610808300944,
        ];
        for (rec, want) in rep.records.iter().zip(oracle) {
            assert!((rec.s_n - want).abs() < 1e-8, "{} vs {want}", rec.s_n);
        }
        for w in rep.records.windows(2) {
            assert!(w[1].s_n > w[0].s_n);
            assert!((w[1].s_n - w[0].s_n - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn spectrum_single_index_and_low_index_failure() {
        let rep = spectrum(&c0(), 4, 4, &cfg(), 64, 1e-8);
        assert_eq!(rep.records.len() + rep.failures.len(), 1);
        let rep = spectrum(&c0(), 1, 2, &cfg(), 64, 1e-8);
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(rep.failures[0].0, 1);
        assert!(rep.record(2).is_some());
    }

    #[test]
    fn counting() {
        assert_eq!(count_in_range(&c0(), 10.3, &cfg()).unwrap(), 10);
        // roots of -sin(sπ + π/4) at 0.75, 1.75, ...
        let sine_only = ProblemSpec { d: 0.0, ..c0() };
        assert_eq!(count_in_range(&sine_only, 1.5, &cfg()).unwrap(), 0);
        assert_eq!(count_in_range(&sine_only, 3.0, &cfg()).unwrap(), 2);
        assert!(count_in_range(&c0(), 0.5, &cfg()).is_err());
    }

    #[test]
    fn eigenfunction_satisfies_both_boundary_conditions() {
        let rec = find_eigenvalue(&c0(), 3, &cfg(), 64, 1e-8).unwrap();
        let spec = c0();
        let u = eigenfunction(&spec, &rec, &cfg()).unwrap();
        let (u0, up0) = u.left.start();
        assert_eq!(u0, spec.p1);
        assert_eq!(rec.s_n * u0 + spec.p1 * up0, 0.0);
        assert!(right_boundary_residual(&spec, &u).abs() <= 1e-4 * (1.0 + rec.lambda_n));
    }

    #[test]
    fn gamma_scaling_keeps_roots() {
        let base = c2();
        let scaled = ProblemSpec {
            gamma1: 3.0 * base.gamma1,
            gamma2: 3.0 * base.gamma2,
            ..base.clone()
        };
        let a = find_eigenvalue(&base, 9, &cfg(), 64, 1e-9).unwrap();
        let b = find_eigenvalue(&scaled, 9, &cfg(), 64, 1e-9).unwrap();
        assert!((a.s_n - b.s_n).abs() <= 1e-8);
    }

    #[test]
    fn zero_potential_roots_ignore_delay() {
        let spec = ProblemSpec {
            delay: CoefficientExpr::parse("0.4*abs(sin(2*x))").unwrap(),
            ..c0()
        };
        let a = find_eigenvalue(&spec, 6, &cfg(), 64, 1e-10).unwrap();
        assert!((a.s_n - 5.189404330925418).abs() < 1e-8);
    }
}
