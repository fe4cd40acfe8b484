//! Scalar bracketing root finder (Chandrupatla's method).
//!
//! Hybrid of inverse quadratic interpolation and bisection: the IQI step is
//! taken only when the interpolation criterion certifies it, otherwise the
//! bracket is bisected. Well suited to functions with stiff regions, such as
//! the prox residual `h(x) = sgn(x) p |x|^(p-1) + rho (x - q)` near zero.

use crate::error::{Error, Result};

/// Stopping control for [`chandrupatla_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Absolute bracket-width tolerance (> 0).
    pub tol_x: f64,
    /// Residual tolerance: stop once `|f| <= tol_f` (>= 0).
    pub tol_f: f64,
    pub max_iter: usize,
}

impl RootConfig {
    /// Default tolerances for a root sought on `[a, b]`:
    /// `tol_x = 1e-14 * max(1, |a|, |b|)`, `tol_f = 1e-12`, 100 iterations.
    pub fn for_bracket(a: f64, b: f64) -> Self {
        RootConfig {
            tol_x: 1e-14 * a.abs().max(b.abs()).max(1.0),
            tol_f: 1e-12,
            max_iter: 100,
        }
    }

    /// Tightest possible tolerances: iterate until the bracket collapses to
    /// adjacent floats. Used by the prox operator, whose accuracy must exceed
    /// the ADMM stopping tolerance by several orders.
    pub fn exact(max_iter: usize) -> Self {
        RootConfig {
            tol_x: f64::MIN_POSITIVE,
            tol_f: 0.0,
            max_iter,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol_x > 0.0) || !(self.tol_f >= 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidInput(format!(
                "bad root config: tol_x = {}, tol_f = {}, max_iter = {}",
                self.tol_x, self.tol_f, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Finds a root of `f` on the bracket `[a, b]` with `f(a) * f(b) <= 0`.
///
/// Returns `x` with `|f(x)| <= tol_f`, or the best endpoint of a bracket
/// narrower than `tol_x` (never wider than two adjacent floats). The returned
/// point always lies within the initial bracket. Exceeding `max_iter` yields
/// a non-convergence error carrying the best iterate.
pub fn chandrupatla_root<F>(mut f: F, a: f64, b: f64, cfg: &RootConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    cfg.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!(
            "bracket endpoints must be finite: [{a}, {b}]"
        )));
    }

    let fa = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    let fb = f(b);
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::InvalidBracket { a, b, fa, fb });
    }

    // (x1, x2) is the current bracket with x1 the newest point; x3 is the
    // previously discarded point used by the inverse quadratic interpolant.
    // The degenerate start x3 = x1 fails the IQI criterion, so the first
    // step is a bisection.
    let (mut x1, mut f1) = (a, fa);
    let (mut x2, mut f2) = (b, fb);
    let (mut x3, mut f3) = (a, fa);

    for _ in 0..cfg.max_iter {
        let (xm, fm) = if f1.abs() <= f2.abs() {
            (x1, f1)
        } else {
            (x2, f2)
        };
        if fm.abs() <= cfg.tol_f {
            return Ok(xm);
        }
        let width = (x2 - x1).abs();
        let mid = x1 + 0.5 * (x2 - x1);
        if width <= cfg.tol_x || mid == x1 || mid == x2 {
            return Ok(xm);
        }

        // IQI when Chandrupatla's criterion certifies it, else bisection.
        let xi = (x1 - x2) / (x3 - x2);
        let phi = (f1 - f2) / (f3 - f2);
        let mut t = if phi * phi < xi && (1.0 - phi) * (1.0 - phi) < 1.0 - xi {
            let x0 = x1 * f2 * f3 / ((f1 - f2) * (f1 - f3))
                + x2 * f1 * f3 / ((f2 - f1) * (f2 - f3))
                + x3 * f1 * f2 / ((f3 - f1) * (f3 - f2));
            (x0 - x1) / (x2 - x1)
        } else {
            0.5
        };
        if !t.is_finite() {
            t = 0.5;
        }
        let tlim = ((f64::EPSILON * xm.abs() + 0.5 * cfg.tol_x) / width).min(0.45);
        t = t.clamp(tlim, 1.0 - tlim);

        let mut xt = x1 + t * (x2 - x1);
        if xt == x1 || xt == x2 {
            // Clamped step underflowed; the midpoint is strictly interior.
            xt = mid;
        }
        let ft = f(xt);
        if ft == 0.0 {
            return Ok(xt);
        }
        if (ft > 0.0) == (f1 > 0.0) {
            // Root stays in [xt, x2].
            x3 = x1;
            f3 = f1;
        } else {
            // Root moves to [x1, xt]; x2 slides to the old x1.
            x3 = x2;
            f3 = f2;
            x2 = x1;
            f2 = f1;
        }
        x1 = xt;
        f1 = ft;
    }

    let (best, residual) = if f1.abs() <= f2.abs() {
        (x1, f1)
    } else {
        (x2, f2)
    };
    Err(Error::NonConvergence {
        best,
        residual,
        iterations: cfg.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisection_oracle<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let mut fa = f(a);
        if fa == 0.0 {
            return a;
        }
        assert!(fa * f(b) <= 0.0);
        while (b - a).abs() > tol {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            let fm = f(m);
            if fm == 0.0 {
                return m;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn quadratic_root() {
        let cfg = RootConfig::for_bracket(0.0, 4.0);
        let r = chandrupatla_root(|x| x * x - 4.0, 0.0, 4.0, &cfg).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_root_matches_bisection() {
        let f = |x: f64| x * x * x - x - 2.0;
        let want = bisection_oracle(f, 1.0, 2.0, 1e-12);
        let cfg = RootConfig::for_bracket(1.0, 2.0);
        let r = chandrupatla_root(f, 1.0, 2.0, &cfg).unwrap();
        assert!((r - want).abs() < 1e-10);
        assert!((r - 1.5213797).abs() < 1e-6);
    }

    #[test]
    fn prox_instance_root() {
        // h for p = 1.5, rho = 1, q = 1; quadratic in sqrt(x) with root 0.25.
        let f = |x: f64| x.signum() * 1.5 * x.abs().sqrt() + (x - 1.0);
        let cfg = RootConfig::exact(100);
        let r = chandrupatla_root(f, 0.0, 1.0, &cfg).unwrap();
        assert!((r - 0.25).abs() < 1e-14);
    }

    #[test]
    fn invalid_bracket_is_rejected() {
        let cfg = RootConfig::for_bracket(1.0, 2.0);
        assert!(matches!(
            chandrupatla_root(|x| x * x + 1.0, 1.0, 2.0, &cfg),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn max_iter_reports_best_iterate() {
        let cfg = RootConfig {
            tol_x: f64::MIN_POSITIVE,
            tol_f: 0.0,
            max_iter: 3,
        };
        match chandrupatla_root(|x| x.powi(3) - 0.731, 0.0, 1.0, &cfg) {
            Err(Error::NonConvergence { best, .. }) => {
                assert!((0.0..=1.0).contains(&best));
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn exact_roots_at_endpoints() {
        let cfg = RootConfig::for_bracket(-1.0, 3.0);
        assert_eq!(
            chandrupatla_root(|x| x + 1.0, -1.0, 3.0, &cfg).unwrap(),
            -1.0
        );
        assert_eq!(chandrupatla_root(|x| x - 3.0, -1.0, 3.0, &cfg).unwrap(), 3.0);
    }

    #[test]
    fn root_stays_within_bracket_random_monotone() {
        // 1000 random strictly increasing functions vs the bisection oracle.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let a = next() * 4.0 - 2.0;
            let b = a + 0.5 + next() * 3.0;
            let c1 = 0.1 + next() * 3.0; // cubic weight
            let c2 = next() * 2.0; // linear weight
            let c3 = next() * 1.5; // tanh weight
            let root = a + (b - a) * (0.05 + 0.9 * next());
            let f = move |x: f64| {
                let d = x - root;
                c1 * d * d * d + c2 * d + c3 * d.tanh()
            };
            let tol = 1e-10;
            let cfg = RootConfig {
                tol_x: tol,
                tol_f: 0.0,
                max_iter: 200,
            };
            let r = chandrupatla_root(f, a, b, &cfg).unwrap();
            assert!(r >= a && r <= b, "root {r} escaped [{a}, {b}]");
            let oracle = bisection_oracle(f, a, b, tol);
            assert!(
                (r - oracle).abs() <= tol.max(1e-9 * oracle.abs()),
                "disagrees with bisection: {r} vs {oracle}"
            );
        }
    }
}
