//! Adaptive Simpson quadrature.

/// Outcome of an adaptive Simpson integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simpson {
    pub value: f64,
    /// Sum of the Richardson error estimates of the accepted panels.
    pub error_estimate: f64,
    pub panels: usize,
}

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The tolerance is split evenly between the two halves at every
/// subdivision, so each accepted panel meets its share of `tol`. Panels are
/// accepted unconditionally at depth 48.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Simpson
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Simpson {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
        };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut out = Simpson {
        value: 0.0,
        error_estimate: 0.0,
        panels: 0,
    };
    recurse(&f, a, b, fa, fm, fb, whole, tol, 0, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut Simpson,
) where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        out.panels += 1;
        return;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, out);
    recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, out);
}

/// Integrates over consecutive breakpoints, summing results. Breakpoints
/// must be sorted; the tolerance is shared in proportion to interval length.
pub fn adaptive_simpson_pieces<F>(f: F, breaks: &[f64], tol: f64) -> Simpson
where
    F: Fn(f64) -> f64,
{
    let mut total = Simpson {
        value: 0.0,
        error_estimate: 0.0,
        panels: 0,
    };
    if breaks.len() < 2 {
        return total;
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    for w in breaks.windows(2) {
        let share = if span > 0.0 {
            tol * (w[1] - w[0]) / span
        } else {
            tol
        };
        let part = adaptive_simpson(&f, w[0], w[1], share);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.panels += part.panels;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        let r = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        assert!((r.value - 16.0).abs() < 1e-12);
        assert_eq!(r.panels, 1);
    }

    #[test]
    fn gaussian_integral() {
        let r = adaptive_simpson(|s| (-s * s / 4.0).exp(), -40.0, 40.0, 1e-12);
        let exact = 2.0 * std::f64::consts::PI.sqrt();
        assert!((r.value - exact).abs() < 1e-11, "{}", r.value - exact);
    }

    #[test]
    fn square_root_endpoint() {
        let r = adaptive_simpson(|x: f64| x.max(0.0).sqrt(), 0.0, 1.0, 1e-12);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(|x| x, 2.0, 2.0, 1e-9).value, 0.0);
    }

    #[test]
    fn pieces_add_up() {
        let r = adaptive_simpson_pieces(|x: f64| x.cos(), &[0.0, 1.0, 2.5, 3.0], 1e-12);
        assert!((r.value - 3.0f64.sin()).abs() < 1e-11);
    }
}
