//! Differentiation and interpolation of sampled time series.

use crate::{Error, Result};

const STENCIL: usize = 5;

/// Weights `w_j` with `f'(x0) ≈ sum_j w_j f(nodes_j)`, exact for
/// polynomials of degree below `nodes.len()`.
pub fn derivative_weights(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let k = nodes.len();
    (0..k)
        .map(|j| {
            let mut w = 0.0;
            for m in (0..k).filter(|&m| m != j) {
                let mut term = 1.0 / (nodes[j] - nodes[m]);
                for l in (0..k).filter(|&l| l != j && l != m) {
                    term *= (x0 - nodes[l]) / (nodes[j] - nodes[l]);
                }
                w += term;
            }
            w
        })
        .collect()
}

/// First derivative of a sampled series by five-point Lagrange stencils,
/// centred in the interior and one-sided at the ends. Spacing may vary.
pub fn sample_derivative(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let len = times.len();
    if values.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: values.len(),
        });
    }
    if len < 2 {
        return Err(Error::Model("need at least two samples to differentiate".into()));
    }
    let width = STENCIL.min(len);
    Ok((0..len)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(len - width);
            let nodes = &times[start..start + width];
            derivative_weights(times[i], nodes)
                .iter()
                .zip(&values[start..start + width])
                .map(|(w, v)| w * v)
                .sum()
        })
        .collect())
}

/// Cubic Hermite interpolation between `(t0, y0, d0)` and `(t1, y1, d1)`.
pub fn hermite(t: f64, t0: f64, y0: &[f64], d0: &[f64], t1: f64, y1: &[f64], d1: &[f64]) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_is_exact_on_quartics() {
        let times = [0.0, 0.1, 0.25, 0.3, 0.5, 0.55, 0.9];
        let f = |t: f64| 3.0 * t.powi(4) - t.powi(3) + 2.0 * t - 1.0;
        let df = |t: f64| 12.0 * t.powi(3) - 3.0 * t.powi(2) + 2.0;
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let d = sample_derivative(&times, &values).unwrap();
        for (t, di) in times.iter().zip(d) {
            assert!((di - df(*t)).abs() < 1e-11, "{t}: {di}");
        }
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| t.powi(3) - 2.0 * t;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let y = hermite(0.7, 0.5, &[f(0.5)], &[df(0.5)], 1.0, &[f(1.0)], &[df(1.0)]);
        assert!((y[0] - f(0.7)).abs() < 1e-15);
    }

    #[test]
    fn short_series() {
        let d = sample_derivative(&[0.0, 2.0], &[1.0, 5.0]).unwrap();
        assert_eq!(d, vec![2.0, 2.0]);
        assert!(sample_derivative(&[0.0], &[1.0]).is_err());
    }
}
