//! Small dense least-squares kernels: Householder QR, non-negative least
//! squares (Lawson–Hanson) and least-distance programming on top of it.
//!
//! Matrices are row-major `Vec<f64>` with explicit dimensions; every system
//! solved here has at most a handful of columns.

/// Householder QR of the `rows × cols` matrix `a` applied jointly to `b`.
///
/// Returns the `cols × cols` upper-triangular factor and `Qᵀb`.
pub(crate) fn qr_solve_parts(
    a: &[f64],
    rows: usize,
    cols: usize,
    b: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    debug_assert!(rows >= cols);
    let mut m = a.to_vec();
    let mut qtb = b.to_vec();
    for k in 0..cols {
        let norm = (k..rows)
            .map(|i| m[i * cols + k].powi(2))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if m[k * cols + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|i| m[i * cols + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: f64 = (k..rows).map(|i| v[i - k] * m[i * cols + j]).sum();
            let s = 2.0 * dot / vnorm2;
            for i in k..rows {
                m[i * cols + j] -= s * v[i - k];
            }
        }
        let dot: f64 = (k..rows).map(|i| v[i - k] * qtb[i]).sum();
        let s = 2.0 * dot / vnorm2;
        for i in k..rows {
            qtb[i] -= s * v[i - k];
        }
    }
    let mut r = vec![0.0; cols * cols];
    for i in 0..cols {
        for j in i..cols {
            r[i * cols + j] = m[i * cols + j];
        }
    }
    (r, qtb)
}

/// Solves `R x = rhs` for upper-triangular `R`.
pub(crate) fn solve_upper(r: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| r[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - s) / r[i * n + i];
    }
    x
}

/// Solves `Rᵀ x = rhs` for upper-triangular `R`.
pub(crate) fn solve_upper_transposed(r: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|j| r[j * n + i] * x[j]).sum();
        x[i] = (rhs[i] - s) / r[i * n + i];
    }
    x
}

/// Least squares on the given columns; `None` if they are numerically
/// dependent.
fn subset_lstsq(columns: &[&[f64]], rows: usize, h: &[f64]) -> Option<Vec<f64>> {
    let k = columns.len();
    let mut a = vec![0.0; rows * k];
    for (j, col) in columns.iter().enumerate() {
        for i in 0..rows {
            a[i * k + j] = col[i];
        }
    }
    let (r, qtb) = qr_solve_parts(&a, rows, k, h);
    let scale = (0..k).map(|i| r[i * k + i].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[i * k + i].abs() <= 1e-13 * scale.max(1e-300)) {
        return None;
    }
    Some(solve_upper(&r, k, &qtb[..k]))
}

/// Lawson–Hanson active-set NNLS: `min ‖M w − h‖` subject to `w ≥ 0`.
///
/// `columns[j]` is column `j` of `M`; every column has `h.len()` rows.
pub(crate) fn nnls(columns: &[Vec<f64>], h: &[f64]) -> Result<Vec<f64>, &'static str> {
    let rows = h.len();
    let n = columns.len();
    let mut w = vec![0.0; n];
    let mut passive = vec![false; n];
    let max_outer = 3 * (rows + 1) * 20 + n.min(1000);
    let tol = 1e-12
        * columns
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
        * h.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);

    let residual = |w: &[f64]| -> Vec<f64> {
        let mut r = h.to_vec();
        for (j, col) in columns.iter().enumerate() {
            if w[j] != 0.0 {
                for i in 0..rows {
                    r[i] -= col[i] * w[j];
                }
            }
        }
        r
    };

    // Columns that proved numerically dependent on the passive set.
    let mut excluded = vec![false; n];
    for _ in 0..max_outer {
        let r = residual(&w);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if passive[j] || excluded[j] {
                continue;
            }
            let g: f64 = columns[j].iter().zip(&r).map(|(c, ri)| c * ri).sum();
            if g > tol && best.is_none_or(|(_, bg)| g > bg) {
                best = Some((j, g));
            }
        }
        let Some((enter, _)) = best else {
            return Ok(w);
        };
        passive[enter] = true;

        for inner in 0.. {
            if inner > 10 * (rows + 2) {
                return Err("inner iteration limit");
            }
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let cols: Vec<&[f64]> = idx.iter().map(|&j| columns[j].as_slice()).collect();
            let solution = if idx.len() <= rows {
                subset_lstsq(&cols, rows, h)
            } else {
                None
            };
            let Some(s) = solution else {
                passive[enter] = false;
                excluded[enter] = true;
                break;
            };
            if s.iter().all(|&v| v > 0.0) {
                w.iter_mut().for_each(|v| *v = 0.0);
                for (&j, &v) in idx.iter().zip(&s) {
                    w[j] = v;
                }
                excluded.iter_mut().for_each(|e| *e = false);
                break;
            }
            // Step from w towards s until the first passive weight hits zero.
            let mut alpha = f64::INFINITY;
            let mut blocking = idx[0];
            for (&j, &v) in idx.iter().zip(&s) {
                if v <= 0.0 {
                    let a = w[j] / (w[j] - v);
                    if a < alpha {
                        alpha = a;
                        blocking = j;
                    }
                }
            }
            let wmax = idx.iter().map(|&j| w[j].abs()).fold(0.0, f64::max);
            for (&j, &v) in idx.iter().zip(&s) {
                w[j] += alpha * (v - w[j]);
                if j == blocking || w[j] <= 1e-14 * wmax {
                    w[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    Err("outer iteration limit")
}

/// Least-distance programming: `min ‖u‖` subject to `E u ≥ f`, where
/// `constraints[g] = (e_g, f_g)` and every `e_g` has `dim` entries.
///
/// Fails when the constraints are inconsistent or NNLS does not converge.
pub(crate) fn least_distance(
    constraints: &[(Vec<f64>, f64)],
    dim: usize,
) -> Result<Vec<f64>, &'static str> {
    let columns: Vec<Vec<f64>> = constraints
        .iter()
        .map(|(e, f)| {
            let mut c = e.clone();
            c.push(*f);
            c
        })
        .collect();
    let mut h = vec![0.0; dim + 1];
    h[dim] = 1.0;
    let w = nnls(&columns, &h)?;
    let mut r = vec![0.0; dim + 1];
    for (col, wj) in columns.iter().zip(&w) {
        for i in 0..=dim {
            r[i] += col[i] * wj;
        }
    }
    r[dim] -= 1.0;
    if r.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-12 {
        return Err("inconsistent constraints");
    }
    Ok((0..dim).map(|i| -r[i] / r[dim]).collect())
}
