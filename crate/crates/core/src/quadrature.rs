/// Composite Simpson rule on `[a, b]` with `panels` subintervals.
///
/// An odd panel count is rounded up to the next even one. `a > b` is allowed
/// and flips the sign as usual.
pub fn simpson<E, F>(mut f: F, a: f64, b: f64, panels: usize) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if a == b {
        return Ok(0.0);
    }
    let m = panels.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut acc = f(a)? + f(b)?;
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Panel count used for the oscillatory integrals: at least 512 and at
/// least 16 per unit of `s`.
pub fn oscillatory_panels(s: f64) -> usize {
    let scaled = 16 * s.abs().ceil() as usize;
    scaled.max(512).next_multiple_of(2)
}
