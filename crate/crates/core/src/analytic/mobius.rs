use num_complex::Complex64;

use crate::error::{Error, Result};

/// The disk automorphism `phi_a(z) = (a - z) / (1 - conj(a) z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::domain(format!("base point |a| = {} must be < 1", a.norm())));
        }
        Ok(MobiusMap { a })
    }

    pub fn base_point(&self) -> Complex64 {
        self.a
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a - z) / (Complex64::new(1.0, 0.0) - self.a.conj() * z)
    }

    /// `1 - |phi_a(z)|^2`, via the identity
    /// `(1 - |a|^2)(1 - |z|^2) / |1 - conj(a) z|^2`, which keeps full
    /// relative precision when `phi_a(z)` is close to the unit circle.
    pub fn one_minus_abs_sq(&self, z: Complex64) -> f64 {
        let denom = (Complex64::new(1.0, 0.0) - self.a.conj() * z).norm_sqr();
        (1.0 - self.a.norm_sqr()) * (1.0 - z.norm_sqr()) / denom
    }

    /// Green function `g(a, z) = -log |phi_a(z)|`; `+inf` at `z = a`.
    pub fn green(&self, z: Complex64) -> f64 {
        let num = (self.a - z).norm();
        if num == 0.0 {
            return f64::INFINITY;
        }
        let den = (Complex64::new(1.0, 0.0) - self.a.conj() * z).norm();
        // -log(num/den) with the ratio computed through log1p when it is near 1
        let ratio_sq_complement = self.one_minus_abs_sq(z);
        if ratio_sq_complement < 0.5 {
            -0.5 * (-ratio_sq_complement).ln_1p()
        } else {
            den.ln() - num.ln()
        }
    }
}

/// `phi_a(z)` together with the Green function `g(a, z)` (`+inf` when `z = a`).
pub fn mobius_and_green(a: Complex64, z: Complex64) -> Result<(Complex64, f64)> {
    let map = MobiusMap::new(a)?;
    if !(z.norm() < 1.0) {
        return Err(Error::domain(format!("|z| = {} must be < 1", z.norm())));
    }
    Ok((map.apply(z), map.green(z)))
}

pub fn green(a: Complex64, z: Complex64) -> Result<f64> {
    mobius_and_green(a, z).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn half_to_origin() {
        let (phi, g) = mobius_and_green(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(phi, c(0.5, 0.0));
        assert_abs_diff_eq!(g, 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn singular_at_base_point() {
        let a = c(0.3, -0.2);
        let (phi, g) = mobius_and_green(a, a).unwrap();
        assert_eq!(phi.norm(), 0.0);
        assert!(g.is_infinite() && g > 0.0);
    }

    #[test]
    fn origin_base_point_negates() {
        let z = c(0.3, 0.4);
        let (phi, g) = mobius_and_green(c(0.0, 0.0), z).unwrap();
        assert_eq!(phi, -z);
        assert_abs_diff_eq!(g, 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_points_off_the_disk() {
        assert!(mobius_and_green(c(1.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(mobius_and_green(c(0.0, 0.0), c(0.0, -1.0)).is_err());
    }

    #[test]
    fn one_minus_abs_sq_identity() {
        let m = MobiusMap::new(c(0.7, 0.1)).unwrap();
        for z in [c(0.1, 0.2), c(-0.5, 0.5), c(0.69, 0.11)] {
            let direct = 1.0 - m.apply(z).norm_sqr();
            assert_abs_diff_eq!(m.one_minus_abs_sq(z), direct, epsilon = 1e-13);
            assert_abs_diff_eq!(m.green(z), -m.apply(z).norm().ln(), epsilon = 1e-12);
        }
    }
}
