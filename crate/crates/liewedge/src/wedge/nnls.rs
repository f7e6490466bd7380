//! Active-set nonnegative least squares.

/// Solution of min ‖Σ x_j c_j − b‖ subject to x ≥ 0.
#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    pub residual: f64,
    /// b − Σ x_j c_j.
    pub residual_vec: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least squares on the passive columns by modified Gram–Schmidt QR.
///
/// Returns `None` when the columns are numerically dependent.
fn least_squares(cols: &[&[f64]], b: &[f64]) -> Option<Vec<f64>> {
    let p = cols.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut r = vec![0.0; p * p];
    for (j, c) in cols.iter().enumerate() {
        let mut v = c.to_vec();
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let s = dot(qi, &v);
                r[i * p + j] += s;
                for (x, y) in v.iter_mut().zip(qi) {
                    *x -= s * y;
                }
            }
        }
        let n = dot(&v, &v).sqrt();
        let scale = dot(c, c).sqrt().max(1e-300);
        if n <= 1e-11 * scale {
            return None;
        }
        r[j * p + j] = n;
        v.iter_mut().for_each(|x| *x /= n);
        q.push(v);
    }
    let qb: Vec<f64> = q.iter().map(|qi| dot(qi, b)).collect();
    let mut z = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = qb[i];
        for k in i + 1..p {
            s -= r[i * p + k] * z[k];
        }
        z[i] = s / r[i * p + i];
    }
    Some(z)
}

fn residual_of(cols: &[Vec<f64>], x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = b.to_vec();
    for (c, &xj) in cols.iter().zip(x) {
        if xj != 0.0 {
            for (ri, ci) in r.iter_mut().zip(c) {
                *ri -= xj * ci;
            }
        }
    }
    r
}

/// Lawson–Hanson active-set solver.
///
/// A column only enters the passive set when it is independent of the columns
/// already there, which keeps every inner least-squares problem well posed.
pub fn nnls(cols: &[Vec<f64>], b: &[f64]) -> NnlsSolution {
    let n = cols.len();
    let mut x = vec![0.0; n];
    let mut passive: Vec<usize> = vec![];
    let bnorm = dot(b, b).sqrt();
    let tol = 1e-13 * bnorm.max(1e-300);
    let mut r = b.to_vec();
    let max_outer = 3 * n + 30;

    for _ in 0..max_outer {
        let w: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let mut order: Vec<usize> = (0..n).filter(|j| !passive.contains(j) && w[*j] > tol).collect();
        order.sort_by(|a, b| w[*b].total_cmp(&w[*a]));
        let mut entered = false;
        for j in order {
            let mut trial: Vec<&[f64]> = passive.iter().map(|&i| cols[i].as_slice()).collect();
            trial.push(&cols[j]);
            if least_squares(&trial, b).is_some() {
                passive.push(j);
                entered = true;
                break;
            }
        }
        if !entered {
            break;
        }
        loop {
            let sub: Vec<&[f64]> = passive.iter().map(|&i| cols[i].as_slice()).collect();
            let z = least_squares(&sub, b).expect("independent passive set");
            if z.iter().all(|&v| v > 0.0) {
                for (k, &i) in passive.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &i) in passive.iter().enumerate() {
                if z[k] <= 0.0 {
                    let d = x[i] - z[k];
                    if d > 0.0 {
                        alpha = alpha.min(x[i] / d);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (k, &i) in passive.iter().enumerate() {
                x[i] += alpha * (z[k] - x[i]);
            }
            passive.retain(|&i| {
                if x[i] <= 1e-15 * bnorm.max(1.0) {
                    x[i] = 0.0;
                    false
                } else {
                    true
                }
            });
            if passive.is_empty() {
                break;
            }
        }
        r = residual_of(cols, &x, b);
    }
    let residual = dot(&r, &r).sqrt();
    NnlsSolution {
        x,
        residual,
        residual_vec: r,
    }
}
