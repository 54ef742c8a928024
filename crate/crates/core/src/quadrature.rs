//! Adaptive Gauss-Kronrod quadrature (G7/K15 pair with interval bisection).

use crate::error::{Error, Result};

// QUADPACK 15-point Kronrod abscissae (positive half) and weights, with the
// embedded 7-point Gauss weights on the shared nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 evaluation over [a, b]: returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];

    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over [a, b] (either orientation) to the requested relative
/// tolerance, bisecting the worst segment until the global error estimate is
/// below `rel_tol * |integral|` (with a tiny absolute floor).
///
/// Fails with `NumericFailure` reporting the achieved tolerance if the
/// subdivision budget is exhausted.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "quadrature bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }

    struct Seg {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }

    let (v, e) = gk15(&f, a, b);
    let mut segs = vec![Seg { a, b, value: v, err: e }];

    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let target = rel_tol * total.abs() + 1e-300;
        if err <= target {
            return Ok(total);
        }
        if segs.len() >= max_segments {
            return Err(Error::NumericFailure(format!(
                "quadrature did not converge within {max_segments} segments \
                 (achieved relative tolerance {:.3e}, requested {rel_tol:.3e})",
                err / total.abs().max(1e-300)
            )));
        }
        // Bisect the segment with the largest error estimate.
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let Seg { a, b, .. } = segs.swap_remove(worst);
        let mid = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        segs.push(Seg { a, b: mid, value: v1, err: e1 });
        segs.push(Seg { a: mid, b, value: v2, err: e2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        // K15 integrates polynomials up to degree 29 exactly.
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, 64).unwrap();
        let exact = |x: f64| 0.25 * x.powi(4) - x * x + x;
        assert!((v - (exact(3.0) - exact(-1.0))).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let fwd = integrate(|x| x.exp(), 0.0, 1.0, 1e-12, 64).unwrap();
        let bwd = integrate(|x| x.exp(), 1.0, 0.0, 1e-12, 64).unwrap();
        assert!((fwd + bwd).abs() < 1e-13);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let v = integrate(|x| (21.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-11, 256).unwrap();
        let exact = (1.0 - (21.0 * std::f64::consts::PI).cos()) / 21.0;
        assert!((v - exact).abs() < 1e-10 * exact.abs(), "got {v}, want {exact}");
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-12, 8).unwrap(), 0.0);
    }

    #[test]
    fn budget_exhaustion_reports_failure() {
        // Near-singular integrand with an absurdly small budget.
        let r = integrate(|x: f64| (x + 1e-14).powf(-0.9), 0.0, 1.0, 1e-12, 4);
        assert!(matches!(r, Err(Error::NumericFailure(_))));
    }
}
