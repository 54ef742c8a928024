//! Parameter curves: scalar coefficient functions of the mass fraction.
//!
//! Pressure-law coefficients and adiabatic exponents vary with the mass
//! fraction through one of these curves. The default is affine in mu with a
//! clamp; arbitrary tabulated curves use monotone (Fritsch-Carlson) cubic
//! interpolation so they stay inside the hull of the control values.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum ParamCurve {
    /// `clamp(intercept + slope * mu, lo, hi)`.
    Affine { intercept: f64, slope: f64, lo: f64, hi: f64 },
    /// Monotone cubic through `(mu, value)` control points; constant
    /// extrapolation outside the table.
    Tabulated { mu: Vec<f64>, value: Vec<f64>, slope: Vec<f64> },
}

impl ParamCurve {
    pub fn constant(value: f64) -> Self {
        ParamCurve::Affine { intercept: value, slope: 0.0, lo: value, hi: value }
    }

    pub fn affine(intercept: f64, slope: f64, lo: f64, hi: f64) -> Result<Self> {
        if ![intercept, slope, lo, hi].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "affine curve parameters must be finite".into(),
            ));
        }
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "affine curve clamp bounds inverted: [{lo}, {hi}]"
            )));
        }
        Ok(ParamCurve::Affine { intercept, slope, lo, hi })
    }

    /// Build a tabulated curve from `(mu, value)` control points.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated curve needs at least 2 control points".into(),
            ));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pts.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate tabulated abscissa mu = {}",
                    w[0].0
                )));
            }
        }
        if pts.iter().any(|(m, v)| !m.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "tabulated curve control points must be finite".into(),
            ));
        }
        let mu: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let value: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let slope = pchip_slopes(&mu, &value);
        Ok(ParamCurve::Tabulated { mu, value, slope })
    }

    pub fn eval(&self, m: f64) -> f64 {
        match self {
            ParamCurve::Affine { intercept, slope, lo, hi } => {
                (intercept + slope * m).clamp(*lo, *hi)
            }
            ParamCurve::Tabulated { mu, value, slope } => {
                hermite(mu, value, slope, m).0
            }
        }
    }

    /// d/dmu of the curve. Zero on clamped affine branches and outside the
    /// table of a tabulated curve.
    pub fn deriv(&self, m: f64) -> f64 {
        match self {
            ParamCurve::Affine { intercept, slope, lo, hi } => {
                let raw = intercept + slope * m;
                if raw > *lo && raw < *hi {
                    *slope
                } else {
                    0.0
                }
            }
            ParamCurve::Tabulated { mu, value, slope } => {
                hermite(mu, value, slope, m).1
            }
        }
    }

    /// Range of values the curve can take (exact for affine; control-value
    /// hull for tabulated curves, which monotone interpolation respects).
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            ParamCurve::Affine { lo, hi, .. } => (*lo, *hi),
            ParamCurve::Tabulated { value, .. } => value
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }
}

/// Fritsch-Carlson slopes: the resulting cubic is monotone on every interval
/// where the data are monotone, so interpolated values never overshoot.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m[0] = edge_slope(h[0], if n > 2 { h[1] } else { h[0] }, d[0], if n > 2 { d[1] } else { d[0] });
    m[n - 1] = edge_slope(
        h[n - 2],
        if n > 2 { h[n - 3] } else { h[n - 2] },
        d[n - 2],
        if n > 2 { d[n - 3] } else { d[n - 2] },
    );
    m
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Cubic Hermite evaluation returning (value, derivative); constant beyond
/// the table ends.
fn hermite(x: &[f64], y: &[f64], m: &[f64], q: f64) -> (f64, f64) {
    let n = x.len();
    if q <= x[0] {
        return (y[0], 0.0);
    }
    if q >= x[n - 1] {
        return (y[n - 1], 0.0);
    }
    let i = match x.binary_search_by(|v| v.total_cmp(&q)) {
        Ok(i) => return (y[i], m[i]),
        Err(i) => i - 1,
    };
    let h = x[i + 1] - x[i];
    let t = (q - x[i]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let v = h00 * y[i] + h10 * h * m[i] + h01 * y[i + 1] + h11 * h * m[i + 1];
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let dv = dh00 * y[i] + dh10 * m[i] + dh01 * y[i + 1] + dh11 * m[i + 1];
    (v, dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_clamps_and_zeroes_derivative() {
        let c = ParamCurve::affine(1.35, 0.1, 1.32, 1.38).unwrap();
        assert_eq!(c.eval(0.0), 1.35);
        assert_eq!(c.deriv(0.0), 0.1);
        assert_eq!(c.eval(10.0), 1.38);
        assert_eq!(c.deriv(10.0), 0.0);
        assert_eq!(c.eval(-10.0), 1.32);
    }

    #[test]
    fn tabulated_interpolates_and_stays_in_hull() {
        let c = ParamCurve::tabulated(&[(0.0, 1.0), (0.5, 2.0), (1.0, 2.5)]).unwrap();
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(1.0), 2.5);
        assert_eq!(c.eval(2.0), 2.5); // constant extrapolation
        for k in 0..=100 {
            let m = k as f64 / 100.0;
            let v = c.eval(m);
            assert!((1.0..=2.5).contains(&v), "overshoot at mu={m}: {v}");
        }
        // Monotone data stay monotone.
        let mut prev = c.eval(0.0);
        for k in 1..=100 {
            let v = c.eval(k as f64 / 100.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn tabulated_derivative_matches_finite_difference() {
        let c = ParamCurve::tabulated(&[(0.0, 1.0), (0.3, 1.8), (0.7, 1.9), (1.0, 3.0)]).unwrap();
        for &m in &[0.1, 0.25, 0.5, 0.85] {
            let h = 1e-6;
            let fd = (c.eval(m + h) - c.eval(m - h)) / (2.0 * h);
            assert!(
                (c.deriv(m) - fd).abs() < 1e-6,
                "mu={m}: analytic {} vs fd {fd}",
                c.deriv(m)
            );
        }
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(ParamCurve::tabulated(&[(0.0, 1.0)]).is_err());
        assert!(ParamCurve::tabulated(&[(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(ParamCurve::affine(1.0, f64::NAN, 0.0, 1.0).is_err());
    }
}
