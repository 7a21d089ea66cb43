//! Complex Gamma function by the Lanczos approximation (g = 7, nine terms).

use super::C64;
use crate::error::{Error, Result};
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn pole_check(z: C64) -> Result<()> {
    let n = z.re.round();
    if n <= 0.0 && (z - C64::new(n, 0.0)).norm() < 1e-14 {
        return Err(Error::DomainError { re: z.re, im: z.im });
    }
    Ok(())
}

/// `ln Γ(z)` for `Re z ≥ 0.5`, principal branch of the logarithm of the
/// Lanczos sum. Uses reflection otherwise (branch then differs by 2πik).
pub fn ln_gamma(z: C64) -> Result<C64> {
    pole_check(z)?;
    if z.re < 0.5 {
        let s = (C64::new(PI, 0.0) * z).sin();
        return Ok(C64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(C64::new(1.0, 0.0) - z)?);
    }
    let zm = z - 1.0;
    let mut a = C64::new(COEF[0], 0.0);
    for (i, &ci) in COEF.iter().enumerate().skip(1) {
        a += ci / (zm + i as f64);
    }
    let t = zm + G + 0.5;
    Ok(C64::new(0.5 * (2.0 * PI).ln(), 0.0) + (zm + 0.5) * t.ln() - t + a.ln())
}

/// Complex Gamma function. Errors at non-positive integers.
pub fn gamma(z: C64) -> Result<C64> {
    pole_check(z)?;
    if z.re < 0.5 {
        let s = (C64::new(PI, 0.0) * z).sin();
        return Ok(C64::new(PI, 0.0) / (s * gamma(C64::new(1.0, 0.0) - z)?));
    }
    let zm = z - 1.0;
    let mut a = C64::new(COEF[0], 0.0);
    for (i, &ci) in COEF.iter().enumerate().skip(1) {
        a += ci / (zm + i as f64);
    }
    let t = zm + G + 0.5;
    let out = (2.0 * PI).sqrt() * ((zm + 0.5) * t.ln() - t).exp() * a;
    if out.re.is_finite() && out.im.is_finite() {
        Ok(out)
    } else {
        Err(Error::NonFinite("gamma"))
    }
}

/// Reciprocal Gamma function, entire, zero at non-positive integers.
pub fn rgamma(z: C64) -> C64 {
    match gamma(z) {
        Ok(g) => 1.0 / g,
        Err(_) => C64::new(0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn factorials() {
        let mut f = 1.0;
        for n in 1..20 {
            assert!(rel(gamma(C64::new(n as f64, 0.0)).unwrap(), C64::new(f, 0.0)) < 1e-13);
            f *= n as f64;
        }
    }

    #[test]
    fn half_integer() {
        assert!(rel(gamma(C64::new(0.5, 0.0)).unwrap(), C64::new(PI.sqrt(), 0.0)) < 1e-14);
        assert!(rel(gamma(C64::new(-0.5, 0.0)).unwrap(), C64::new(-2.0 * PI.sqrt(), 0.0)) < 1e-14);
    }

    #[test]
    fn poles_rejected() {
        assert!(gamma(C64::new(0.0, 0.0)).is_err());
        assert!(gamma(C64::new(-3.0, 0.0)).is_err());
        assert_eq!(rgamma(C64::new(-2.0, 0.0)), C64::new(0.0, 0.0));
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        let z = C64::new(3.3, 1.7);
        assert!(rel(ln_gamma(z).unwrap().exp(), gamma(z).unwrap()) < 1e-13);
    }

    #[test]
    fn reflection_identity() {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let z = C64::new(0.3, 2.1);
        let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = PI / (PI * z).sin();
        assert!(rel(lhs, rhs) < 1e-13);
    }
}
