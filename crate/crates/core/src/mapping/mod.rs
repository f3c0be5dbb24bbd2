//! Per-dataset monotone third-order mapping of predictions onto the
//! subjective scale.
//!
//! The fit minimizes `Σ (x_i − p(y_i))²` over cubics `p` whose derivative is
//! non-negative at `grid_points` equally spaced points spanning the observed
//! prediction range. Internally the predictions are rescaled to `[-1, 1]`,
//! which makes the problem well conditioned and the result invariant under
//! positive affine changes of the prediction scale. The constrained least
//! squares problem is reduced to a least-distance program via QR and solved
//! with Lawson–Hanson NNLS.

mod lsq;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, RmseDenominator};
use crate::model::MappingCoefficients;

pub const DEFAULT_GRID_POINTS: usize = 1001;

/// Result of [`fit_monotone_cubic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingFit {
    pub coefficients: MappingCoefficients,
    /// Degree actually fitted: 3, or lower with fewer than four distinct
    /// prediction values.
    pub order: usize,
    /// Sum of squared residuals of the mapped predictions.
    pub sse: f64,
}

/// Affine rescaling `t = (y − center) / half_width` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy)]
struct Scaling {
    center: f64,
    half_width: f64,
}

impl Scaling {
    fn t(&self, y: f64) -> f64 {
        (y - self.center) / self.half_width
    }

    /// Re-expresses `Σ θ_k t^k` as a polynomial in `y`.
    fn to_y_basis(self, theta: &[f64]) -> [f64; 4] {
        let alpha = 1.0 / self.half_width;
        let beta = -self.center / self.half_width;
        let binom = [
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0],
            [1.0, 3.0, 3.0, 1.0],
        ];
        let mut out = [0.0; 4];
        for (k, &th) in theta.iter().enumerate() {
            for j in 0..=k {
                out[j] += th * binom[k][j] * alpha.powi(j as i32) * beta.powi((k - j) as i32);
            }
        }
        out
    }
}

/// Minimum of `Σ_{k≥1} k θ_k t^{k−1}` over `t ∈ [-1, 1]`.
fn min_derivative_on_unit(theta: &[f64]) -> f64 {
    let deriv = |t: f64| -> f64 {
        theta
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, th)| k as f64 * th * t.powi(k as i32 - 1))
            .sum()
    };
    let mut m = deriv(-1.0).min(deriv(1.0));
    if theta.len() == 4 && theta[3] != 0.0 {
        let vertex = -theta[2] / (3.0 * theta[3]);
        if (-1.0..=1.0).contains(&vertex) {
            m = m.min(deriv(vertex));
        }
    }
    m
}

fn sse_of(coeffs: &MappingCoefficients, x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(xi, yi)| (xi - coeffs.eval(*yi)).powi(2))
        .sum()
}

fn distinct_count(y: &[f64]) -> usize {
    let mut v = y.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Fits the non-decreasing cubic `x ≈ a + b·y + c·y² + d·y³`.
///
/// `x` holds subjective MOS and `y` the raw predictions for the same clips.
/// With fewer than four distinct prediction values the highest determined
/// order is fitted instead (down to the constant `mean(x)`).
pub fn fit_monotone_cubic(x: &[f64], y: &[f64], grid_points: usize) -> Result<MappingFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite value in mapping input".into()));
    }
    let grid_points = grid_points.max(2);
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let order = (distinct_count(y) - 1).min(3);

    if order == 0 {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let coefficients = MappingCoefficients {
            a: mean,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            range_lo: lo,
            range_hi: hi,
        };
        return Ok(MappingFit {
            sse: sse_of(&coefficients, x, y),
            coefficients,
            order,
        });
    }

    let scaling = Scaling {
        center: 0.5 * (lo + hi),
        half_width: 0.5 * (hi - lo),
    };
    let theta = solve_scaled(x, y, scaling, order, grid_points)?;
    let [a, b, c, d] = scaling.to_y_basis(&theta);
    let coefficients = MappingCoefficients {
        a,
        b,
        c,
        d,
        range_lo: lo,
        range_hi: hi,
    };
    Ok(MappingFit {
        sse: sse_of(&coefficients, x, y),
        coefficients,
        order,
    })
}

/// Solves the constrained problem in the rescaled variable and returns the
/// coefficients `θ_0..=θ_order` of the polynomial in `t`.
fn solve_scaled(
    x: &[f64],
    y: &[f64],
    scaling: Scaling,
    order: usize,
    grid_points: usize,
) -> Result<Vec<f64>> {
    let n = x.len();
    let p = order + 1;
    let mut design = Vec::with_capacity(n * p);
    for &yi in y {
        let t = scaling.t(yi);
        let mut pow = 1.0;
        for _ in 0..p {
            design.push(pow);
            pow *= t;
        }
    }
    let (r, qtx) = lsq::qr_solve_parts(&design, n, p, x);
    let z0 = &qtx[..p];

    // Constraint rows g·θ ≥ 0 become e·u ≥ f with θ = R⁻¹(u + z0).
    let constraints: Vec<(Vec<f64>, f64)> = (0..grid_points)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / (grid_points - 1) as f64;
            let mut g = vec![0.0; p];
            for (k, gk) in g.iter_mut().enumerate().skip(1) {
                *gk = k as f64 * t.powi(k as i32 - 1);
            }
            let mut e = lsq::solve_upper_transposed(&r, p, &g);
            let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            e.iter_mut().for_each(|v| *v /= norm);
            let f = -e.iter().zip(z0).map(|(ei, zi)| ei * zi).sum::<f64>();
            (e, f)
        })
        .collect();

    let fallback = || -> Vec<f64> {
        let mut theta = vec![0.0; p];
        theta[0] = x.iter().sum::<f64>() / n as f64;
        theta
    };

    let u = lsq::least_distance(&constraints, p).map_err(|reason| {
        let theta = fallback();
        let [a, b, c, d] = scaling.to_y_basis(&theta);
        Error::SolverNonConvergence {
            reason: reason.to_string(),
            best_feasible: MappingCoefficients {
                a,
                b,
                c,
                d,
                range_lo: scaling.center - scaling.half_width,
                range_hi: scaling.center + scaling.half_width,
            },
        }
    })?;
    let rhs: Vec<f64> = u.iter().zip(z0).map(|(ui, zi)| ui + zi).collect();
    let mut theta = lsq::solve_upper(&r, p, &rhs);

    // The grid bounds the derivative only at discrete points; lift the
    // linear term by any dip between them so the map is non-decreasing on
    // the whole range.
    let dip = min_derivative_on_unit(&theta);
    if dip < 0.0 {
        theta[1] -= dip;
    }
    Ok(theta)
}

/// Element-wise `a + b·y + c·y² + d·y³`, unclamped.
pub fn apply_mapping(coeffs: &MappingCoefficients, y: &[f64]) -> Vec<f64> {
    y.iter().map(|&v| coeffs.eval(v)).collect()
}

/// Fits the mapping on this dataset alone and returns the RMSE of the
/// mapped predictions together with the fit.
pub fn rmse_map(x: &[f64], y: &[f64]) -> Result<(f64, MappingFit)> {
    rmse_map_with(x, y, DEFAULT_GRID_POINTS, RmseDenominator::NMinusOne)
}

pub fn rmse_map_with(
    x: &[f64],
    y: &[f64],
    grid_points: usize,
    denom: RmseDenominator,
) -> Result<(f64, MappingFit)> {
    let fit = fit_monotone_cubic(x, y, grid_points)?;
    let mapped = apply_mapping(&fit.coefficients, y);
    let value = metrics::rmse_with(x, &mapped, denom)?;
    Ok((value, fit))
}

/// Largest decrease between consecutive points of a `samples`-point grid
/// over the enforcement range (0 for a non-decreasing map).
pub fn max_decrease(coeffs: &MappingCoefficients, samples: usize) -> f64 {
    let (lo, hi) = (coeffs.range_lo, coeffs.range_hi);
    let samples = samples.max(2);
    let mut worst = 0.0f64;
    let mut prev = coeffs.eval(lo);
    for i in 1..samples {
        let y = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let v = coeffs.eval(y);
        worst = worst.max(prev - v);
        prev = v;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_is_recovered() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let fit = fit_monotone_cubic(&v, &v, DEFAULT_GRID_POINTS).unwrap();
        let c = fit.coefficients.coefficients();
        for (got, want) in c.iter().zip([0.0, 1.0, 0.0, 0.0]) {
            assert!(close(*got, want, 1e-9), "{c:?}");
        }
        let (r, _) = rmse_map(&v, &v).unwrap();
        assert!(r < 1e-9);
    }

    #[test]
    fn exact_linear_relation() {
        let y = [1.0, 1.5, 2.0, 2.5, 3.0];
        let x: Vec<f64> = y.iter().map(|v| 2.0 * v - 1.0).collect();
        let fit = fit_monotone_cubic(&x, &y, DEFAULT_GRID_POINTS).unwrap();
        let c = fit.coefficients.coefficients();
        for (got, want) in c.iter().zip([-1.0, 2.0, 0.0, 0.0]) {
            assert!(close(*got, want, 1e-9), "{c:?}");
        }
        let (r, _) = rmse_map(&x, &y).unwrap();
        assert!(r < 1e-9);
    }

    #[test]
    fn decreasing_data_gives_constant() {
        let (r, fit) = rmse_map(&[3.0, 2.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(fit.order, 2);
        let c = fit.coefficients;
        assert!(close(c.a, 2.0, 1e-9) && close(c.b, 0.0, 1e-9), "{c:?}");
        assert!(close(c.c, 0.0, 1e-9) && c.d == 0.0, "{c:?}");
        assert!(close(r, 1.0, 1e-9));
    }

    #[test]
    fn apply_examples() {
        let y = [1.3, 2.0, 4.7];
        assert_eq!(
            apply_mapping(&MappingCoefficients::identity(1.0, 5.0), &y),
            y
        );
        let one = MappingCoefficients {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            range_lo: 1.0,
            range_hi: 5.0,
        };
        assert_eq!(apply_mapping(&one, &y), vec![1.0; 3]);
        let lin = MappingCoefficients {
            a: -1.0,
            b: 2.0,
            ..one
        };
        assert_eq!(apply_mapping(&lin, &[2.5]), vec![4.0]);
    }

    #[test]
    fn degenerate_orders() {
        let fit = fit_monotone_cubic(&[2.0, 4.0], &[3.0, 3.0], 11).unwrap();
        assert_eq!(fit.order, 0);
        assert_eq!(fit.coefficients.a, 3.0);
        let fit = fit_monotone_cubic(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0], 11).unwrap();
        assert_eq!(fit.order, 1);
        assert!(fit.coefficients.b >= 0.0);
        assert!(matches!(
            fit_monotone_cubic(&[1.0], &[1.0], 11),
            Err(Error::TooFew { .. })
        ));
    }

    #[test]
    fn unconstrained_cubic_when_already_monotone() {
        let y: [f64; 6] = [1.0, 1.7, 2.2, 3.1, 3.9, 4.6];
        let x: Vec<f64> = y
            .iter()
            .map(|v| 0.3 + 0.2 * v + 0.05 * v * v + 0.01 * v.powi(3))
            .collect();
        let fit = fit_monotone_cubic(&x, &y, DEFAULT_GRID_POINTS).unwrap();
        assert!(fit.sse < 1e-20, "{fit:?}");
    }

    #[test]
    fn dip_between_grid_points_is_removed() {
        // Cubic with a stationary point between two grid nodes of a coarse grid.
        let y: Vec<f64> = (0..40).map(|i| i as f64 / 39.0 * 4.0 + 1.0).collect();
        let x: Vec<f64> = y.iter().map(|v| (v - 3.1f64).powi(3) + 3.0).collect();
        let fit = fit_monotone_cubic(&x, &y, 5).unwrap();
        assert!(max_decrease(&fit.coefficients, 100_001) <= 1e-12);
    }
}
