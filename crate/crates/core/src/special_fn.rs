//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything is driven by the complementary parameter `1 - k²`, which is
//! kept as a primary field so that moduli extremely close to 1 (tiny Delaunay
//! necks) keep full relative accuracy.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("complementary parameter {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("K(k) diverges at k = 1")]
    Singular,
}

/// Elliptic modulus `k` together with its exactly carried complement `1 - k²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    k_sq_complement: f64,
}

impl EllipticModulus {
    /// Builds the modulus from `1 - k²`. A complement of 0 (k = 1) is accepted
    /// because `E` has a finite limit there; `K` and `dn` reject it.
    pub fn from_complement(k_sq_complement: f64) -> Result<Self, EllipticError> {
        if !(0.0..=1.0).contains(&k_sq_complement) {
            return Err(EllipticError::OutOfRange(k_sq_complement));
        }
        let k = (1.0 - k_sq_complement).max(0.0).sqrt();
        Ok(Self { k, k_sq_complement })
    }

    pub fn from_k(k: f64) -> Result<Self, EllipticError> {
        if !(0.0..=1.0).contains(&k) {
            return Err(EllipticError::OutOfRange(1.0 - k * k));
        }
        Ok(Self {
            k,
            k_sq_complement: (1.0 - k) * (1.0 + k),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `1 - k²`.
    pub fn k_sq_complement(&self) -> f64 {
        self.k_sq_complement
    }

    /// Complementary modulus `k' = sqrt(1 - k²)`.
    pub fn k_prime(&self) -> f64 {
        self.k_sq_complement.sqrt()
    }
}

/// Runs the AGM on `(1, k')`, returning the mean and `Σ 2^(n-1) c_n²`.
fn agm(m: &EllipticModulus) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = m.k_prime();
    let mut sum = 0.5 * (1.0 - m.k_sq_complement);
    let mut pow = 0.5;
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind.
pub fn complete_k(m: EllipticModulus) -> Result<f64, EllipticError> {
    if m.k_sq_complement <= 0.0 {
        return Err(EllipticError::Singular);
    }
    let (mean, _) = agm(&m);
    Ok(FRAC_PI_2 / mean)
}

/// Complete elliptic integral of the second kind; `E(1) = 1`.
pub fn complete_e(m: EllipticModulus) -> f64 {
    if m.k_sq_complement <= 0.0 {
        return 1.0;
    }
    let (mean, sum) = agm(&m);
    FRAC_PI_2 / mean * (1.0 - sum)
}

/// Jacobi `(sn, cn, dn)` at real argument `s`.
///
/// The argument is reduced to `[0, K]`, then the complementary modulus is
/// driven below 1e-8 by Landen steps (`k' -> k'²/(1+k)²`), where the functions
/// are closed with their hyperbolic limits plus the first `k'²` correction.
/// Each Landen step maps `[0, K]` into `[0, K₁/2]`, so the closing argument
/// always stays far from the quarter period.
pub fn jacobi_sncndn(s: f64, m: EllipticModulus) -> Result<(f64, f64, f64), EllipticError> {
    let kk = complete_k(m)?;
    let n = (s / (2.0 * kk)).round();
    let r = s - 2.0 * kk * n;
    let parity = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let (sn, cn, dn) = sncndn_reduced(r.abs(), m.k, m.k_prime());
    Ok((parity * r.signum() * sn, parity * cn, dn))
}

/// Jacobi delta amplitude `dn(s, k)`.
pub fn jacobi_dn(s: f64, m: EllipticModulus) -> Result<f64, EllipticError> {
    jacobi_sncndn(s, m).map(|(_, _, dn)| dn)
}

fn sncndn_reduced(z: f64, k: f64, kc: f64) -> (f64, f64, f64) {
    if kc < 1e-8 {
        let (sh, ch) = (z.sinh(), z.cosh());
        let (th, sech) = (sh / ch, 1.0 / ch);
        let c = 0.25 * kc * kc;
        let sn = th + c * (sh * ch - z) * sech * sech;
        let cn = sech - c * (sh * ch - z) * th * sech;
        let dn = sech + c * (sh * ch + z) * th * sech;
        return (sn, cn, dn);
    }
    if k < 1e-4 {
        let (s, c) = z.sin_cos();
        let q = 0.25 * k * k * (z - s * c);
        return (s - q * c, c + q * s, 1.0 - 0.5 * k * k * s * s);
    }
    let k1c = kc * kc / ((1.0 + k) * (1.0 + k));
    let k1 = 2.0 * k.sqrt() / (1.0 + k);
    let k1_sq = 4.0 * k / ((1.0 + k) * (1.0 + k));
    let (sn1, cn1, dn1) = sncndn_reduced(z / (1.0 + k1c), k1, k1c);
    let d2 = dn1 * dn1;
    let sn = (1.0 + k1c) * sn1 * cn1 / dn1;
    let cn = (1.0 + k1c) * (d2 - k1c) / (k1_sq * dn1);
    let dn = 0.5 * (1.0 + k) * (d2 + k1c) / dn1;
    (sn, cn, dn)
}
