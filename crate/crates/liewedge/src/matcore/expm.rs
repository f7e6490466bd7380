use super::mat::Mat;
use crate::error::{Error, Result};

const SQUARING_THRESHOLD: f64 = 0.5;

/// Matrix exponential by Taylor series with scaling and squaring.
///
/// The argument is scaled by 2^-s until ‖A‖₁ ≤ 0.5, summed until the next term
/// is below machine precision, then squared back s times.
pub fn expm(a: &Mat) -> Mat {
    a.require_square("expm").expect("expm");
    let n = a.rows();
    let norm = a.norm1();
    let s = if norm > SQUARING_THRESHOLD {
        (norm / SQUARING_THRESHOLD).log2().ceil() as i32
    } else {
        0
    };
    let b = a.scale(0.5f64.powi(s));
    let mut sum = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=40 {
        term = (&term * &b).scale(1.0 / k as f64);
        sum += &term;
        if term.max_abs() <= f64::EPSILON * 1e-2 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Principal square root by the Denman–Beavers iteration.
pub fn sqrtm(a: &Mat) -> Result<Mat> {
    a.require_square("sqrtm")?;
    let mut y = a.clone();
    let mut z = Mat::identity(a.rows());
    for _ in 0..100 {
        let yi = y.inverse()?;
        let zi = z.inverse()?;
        let y1 = (&y + &zi).scale(0.5);
        let z1 = (&z + &yi).scale(0.5);
        let delta = y1.dist(&y);
        y = y1;
        z = z1;
        if delta <= 1e-15 * y.norm() {
            return Ok(y);
        }
    }
    Err(Error::NonConvergence("square-root iteration".into()))
}

/// Principal logarithm by inverse scaling and squaring.
///
/// Intended for matrices whose spectrum stays away from the negative real axis.
pub fn logm(a: &Mat) -> Result<Mat> {
    a.require_square("logm")?;
    let n = a.rows();
    let id = Mat::identity(n);
    let mut x = a.clone();
    let mut k = 0;
    while (&x - &id).norm1() > 0.25 {
        x = sqrtm(&x)?;
        k += 1;
        if k > 60 {
            return Err(Error::NonConvergence("logm root reduction".into()));
        }
    }
    let y = &x - &id;
    let mut power = y.clone();
    let mut sum = y.clone();
    for j in 2..=80 {
        power = &power * &y;
        let term = power.scale(if j % 2 == 0 { -1.0 } else { 1.0 } / j as f64);
        sum += &term;
        if term.max_abs() <= f64::EPSILON * 1e-2 * sum.max_abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let out = sum.scale(2f64.powi(k));
    Ok(if a.is_real() { out.chop_imag(1e-300) } else { out })
}
