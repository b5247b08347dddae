//! Complex powers with continuously tracked arguments.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Principal argument with `-0.0` imaginary parts folded to `+0.0`, so a
/// negative real radicand always starts on the `+pi` side.
pub(crate) fn principal_arg(z: Complex64) -> f64 {
    Complex64::new(z.re, z.im + 0.0).arg()
}

/// Argument of `z` on the sheet closest to `prev`. Zero keeps `prev`
/// (and stays untracked if there is none).
pub(crate) fn continue_phase(prev: Option<f64>, z: Complex64) -> Option<f64> {
    if z.re == 0.0 && z.im == 0.0 {
        return prev;
    }
    let a = principal_arg(z);
    Some(match prev {
        None => a,
        Some(p) => a + 2.0 * PI * ((p - a) / (2.0 * PI)).round(),
    })
}

pub(crate) fn is_small_integer(n: f64) -> bool {
    n.fract() == 0.0 && n.abs() <= 1024.0
}

/// `z^n` using argument `phase` for `z`. Integer exponents ignore the phase.
pub(crate) fn tracked_pow(z: Complex64, n: f64, phase: f64) -> Complex64 {
    if n == 1.0 {
        return z;
    }
    if is_small_integer(n) {
        return z.powi(n as i32);
    }
    let m = z.norm();
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(m.powf(n), n * phase)
}

/// `z^n` on the principal sheet.
pub fn branch_pow(z: Complex64, n: f64) -> Complex64 {
    tracked_pow(z, n, principal_arg(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continued_phase_crosses_the_cut() {
        let p0 = continue_phase(None, Complex64::from_polar(1.0, 3.0));
        let p1 = continue_phase(p0, Complex64::from_polar(1.0, 3.3)).unwrap();
        assert!((p1 - 3.3).abs() < 1e-12);
        let p2 = continue_phase(Some(p1), Complex64::from_polar(1.0, 3.9)).unwrap();
        assert!((p2 - 3.9).abs() < 1e-12);
        assert_eq!(continue_phase(None, Complex64::new(0.0, 0.0)), None);
    }

    #[test]
    fn negative_zero_imaginary_part_is_upper_side() {
        assert_eq!(principal_arg(Complex64::new(-1.0, -0.0)), PI);
    }

    #[test]
    fn tracked_half_power_is_continuous() {
        let a = tracked_pow(Complex64::from_polar(4.0, 3.1), 0.5, 3.1);
        let b = tracked_pow(Complex64::from_polar(4.0, 3.2), 0.5, 3.2);
        assert!((a - b).norm() < 0.2);
    }
}
