//! WebAssembly bindings for the browser demo in `www/`.

use mosbench::degradation::filter::{magnitude_db, FilterKind};
use mosbench::degradation::plan::{Impairment, WeightTable};
use mosbench::mapping::{apply_mapping, fit_monotone_cubic, DEFAULT_GRID_POINTS};
use mosbench::metrics::{pcc, rmse};
use wasm_bindgen::prelude::*;

fn js_err(e: mosbench::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Fits the monotone cubic mapping from predictions `y` to MOS `x`.
///
/// Returns `[a, b, c, d, range_lo, range_hi, order, rmse, rmse_map, pcc]`
/// followed by `curve_points` (y, mapped y) pairs spanning the fit range.
#[wasm_bindgen]
pub fn fit_mapping(x: &[f64], y: &[f64], curve_points: usize) -> Result<Vec<f64>, JsError> {
    let fit = fit_monotone_cubic(x, y, DEFAULT_GRID_POINTS).map_err(js_err)?;
    let c = fit.coefficients;
    let mapped = apply_mapping(&c, y);
    let mut out = vec![
        c.a,
        c.b,
        c.c,
        c.d,
        c.range_lo,
        c.range_hi,
        fit.order as f64,
        rmse(x, y).map_err(js_err)?,
        rmse(x, &mapped).map_err(js_err)?,
        pcc(x, y).unwrap_or(f64::NAN),
    ];
    let n = curve_points.max(2);
    for i in 0..n {
        let v = c.range_lo + (c.range_hi - c.range_lo) * i as f64 / (n - 1) as f64;
        out.push(v);
        out.push(c.eval(v));
    }
    Ok(out)
}

/// Tags of the first-step impairment rows, comma separated, in the order
/// expected by [`apportion_first_step`].
#[wasm_bindgen]
pub fn first_step_rows() -> String {
    Impairment::ALL.map(Impairment::tag).join(",")
}

/// Largest-remainder clip counts for `n` clips over the given first-step
/// weights (one per row of [`first_step_rows`]).
#[wasm_bindgen]
pub fn apportion_first_step(weights: &[f64], n: usize) -> Result<Vec<u32>, JsError> {
    if weights.len() != Impairment::ALL.len() {
        return Err(JsError::new(&format!(
            "expected {} weights, got {}",
            Impairment::ALL.len(),
            weights.len()
        )));
    }
    let table = WeightTable::new(
        Impairment::ALL
            .into_iter()
            .zip(weights.iter().copied())
            .collect(),
    )
    .map_err(js_err)?;
    Ok(table
        .apportion(n)
        .into_iter()
        .map(|(_, c)| c as u32)
        .collect())
}

/// Magnitude response in dB of the sixth-order Butterworth filter at
/// `points` frequencies evenly spaced from 0 to Nyquist.
#[wasm_bindgen]
pub fn filter_response(
    highpass: bool,
    cutoff_hz: f64,
    sample_rate: u32,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let kind = if highpass {
        FilterKind::Highpass
    } else {
        FilterKind::Lowpass
    };
    let n = points.max(2);
    let nyquist = sample_rate as f64 / 2.0;
    (0..n)
        .map(|i| {
            magnitude_db(
                kind,
                cutoff_hz,
                sample_rate,
                nyquist * i as f64 / (n - 1) as f64,
            )
        })
        .collect::<mosbench::Result<Vec<_>>>()
        .map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_apportion() {
        let w = [10.0, 60.0, 3.75, 1.25, 5.0, 5.0, 5.0, 5.0, 5.0];
        let counts = apportion_first_step(&w, 80).unwrap();
        assert_eq!(counts[0], 8);
        assert_eq!(counts.iter().sum::<u32>(), 80);
        assert_eq!(first_step_rows().split(',').count(), 9);
    }

    #[test]
    fn mapping_curve_is_monotone() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 2.5];
        let y = [2.0, 1.8, 3.1, 3.0, 4.2, 2.4];
        let out = fit_mapping(&x, &y, 50).unwrap();
        assert_eq!(out.len(), 10 + 100);
        let curve: Vec<f64> = out[10..].chunks(2).map(|p| p[1]).collect();
        assert!(curve.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn response_shape() {
        let r = filter_response(false, 3500.0, 16000, 81).unwrap();
        assert!(r[0].abs() < 1e-9);
        assert!(r[80] < -100.0);
    }
}
