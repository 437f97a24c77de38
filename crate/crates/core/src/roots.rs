use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket until the bracket's width is below
/// `rel_tol · max(|lo|, |hi|)` (or exactly zero is hit).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoRoot(format!(
            "f({lo}) = {flo} and f({hi}) = {fhi} do not bracket a root"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * lo.abs().max(hi.abs()) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::NoRoot(_))
        ));
    }

    #[test]
    fn decreasing_function() {
        let r = bisect(|x| 1.0 - x, -3.0, 5.0, 1e-14).unwrap();
        assert!((r - 1.0).abs() < 1e-13);
    }
}
