//! Delaunay profiles `(x_a, z_a)`.
//!
//! `x_a(t) = (1+a) dn((1+a)t, k_a)` with `k_a² = 1 - a²/(1+a)²`, and
//! `z_a' = x_a² - γ_a`, `γ_a = a(1+a)`. Unduloids have `a ∈ [-1/2, 0)`,
//! nodoids `a > 0`.

use std::sync::Arc;

use thiserror::Error;

use crate::jet::Jet;
use crate::ode::{self, OdeError, Tolerance};
use crate::quad::GaussLegendre;
use crate::special_fn::{complete_e, complete_k, jacobi_sncndn, EllipticError, EllipticModulus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("Delaunay parameter a = {0} must satisfy a >= -1/2 and a != 0")]
    InvalidParameter(f64),
    #[error("asymptotic checks need 0 < |a| <= 0.1, got a = {0}")]
    OutsideAsymptoticRange(f64),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaunayParam {
    a: f64,
    gamma: f64,
    k_a: EllipticModulus,
}

impl DelaunayParam {
    pub fn new(a: f64) -> Result<Self, ProfileError> {
        if !a.is_finite() || a == 0.0 || a < -0.5 {
            return Err(ProfileError::InvalidParameter(a));
        }
        let r = a / (1.0 + a);
        let k_a = EllipticModulus::from_complement(r * r)?;
        Ok(Self {
            a,
            gamma: a * (1.0 + a),
            k_a,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn modulus(&self) -> EllipticModulus {
        self.k_a
    }
}

/// Profile values and derivatives up to third order at one `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub x: f64,
    pub dx: f64,
    pub ddx: f64,
    pub dddx: f64,
    pub z: f64,
    pub dz: f64,
    pub ddz: f64,
    pub dddz: f64,
}

impl ProfilePoint {
    pub fn x_jet(&self) -> Jet {
        Jet::new(self.x, self.dx, self.ddx)
    }

    pub fn dx_jet(&self) -> Jet {
        Jet::new(self.dx, self.ddx, self.dddx)
    }

    pub fn z_jet(&self) -> Jet {
        Jet::new(self.z, self.dz, self.ddz)
    }

    pub fn dz_jet(&self) -> Jet {
        Jet::new(self.dz, self.ddz, self.dddz)
    }
}

const GL_ORDER: usize = 20;
const PANEL_WIDTH: f64 = 0.25;

#[derive(Debug)]
struct HeightTable {
    panel: f64,
    prefix: Vec<f64>,
    gl: GaussLegendre,
}

/// A Delaunay profile with its half-period `tau` and half-height `h` per period.
#[derive(Debug, Clone)]
pub struct DelaunayProfile {
    param: DelaunayParam,
    tau: f64,
    h: f64,
    big_k: f64,
    big_e: f64,
    table: Arc<HeightTable>,
}

pub fn make_profile(a: f64) -> Result<DelaunayProfile, ProfileError> {
    DelaunayProfile::new(DelaunayParam::new(a)?)
}

impl DelaunayProfile {
    pub fn new(param: DelaunayParam) -> Result<Self, ProfileError> {
        let a = param.a;
        let big_k = complete_k(param.k_a)?;
        let big_e = complete_e(param.k_a);
        let tau = big_k / (1.0 + a);
        let h = -a * big_k + (1.0 + a) * big_e;
        let panels = ((tau / PANEL_WIDTH).ceil() as usize).max(4);
        let mut prof = Self {
            param,
            tau,
            h,
            big_k,
            big_e,
            table: Arc::new(HeightTable {
                panel: tau / panels as f64,
                prefix: Vec::new(),
                gl: GaussLegendre::new(GL_ORDER),
            }),
        };
        let panel = tau / panels as f64;
        let mut prefix = Vec::with_capacity(panels + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for j in 0..panels {
            acc += prof
                .table
                .gl
                .integrate(j as f64 * panel, (j + 1) as f64 * panel, |t| prof.dz(t));
            prefix.push(acc);
        }
        prof.table = Arc::new(HeightTable {
            panel,
            prefix,
            gl: GaussLegendre::new(GL_ORDER),
        });
        Ok(prof)
    }

    pub fn param(&self) -> DelaunayParam {
        self.param
    }

    pub fn a(&self) -> f64 {
        self.param.a
    }

    pub fn gamma(&self) -> f64 {
        self.param.gamma
    }

    /// Half-period of `x_a`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Height gained by `z_a` over a half-period, `-aK + (1+a)E`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// `∫₀^τ z_a' dt` from the cached panel sums.
    pub fn h_quadrature(&self) -> f64 {
        *self.table.prefix.last().unwrap_or(&0.0)
    }

    pub fn complete_k(&self) -> f64 {
        self.big_k
    }

    pub fn complete_e(&self) -> f64 {
        self.big_e
    }

    /// `(x, x')` from the closed form.
    fn x_dx(&self, t: f64) -> (f64, f64) {
        let s = 1.0 + self.param.a;
        let m = self.param.k_a;
        // The modulus is validated at construction, so K is finite.
        let (sn, cn, dn) = jacobi_sncndn(s * t, m).expect("validated modulus");
        (s * dn, -s * s * m.k() * m.k() * sn * cn)
    }

    pub fn x(&self, t: f64) -> f64 {
        self.x_dx(t).0
    }

    pub fn dx(&self, t: f64) -> f64 {
        self.x_dx(t).1
    }

    pub fn ddx(&self, t: f64) -> f64 {
        let x = self.x(t);
        (1.0 + 2.0 * self.param.gamma) * x - 2.0 * x.powi(3)
    }

    pub fn dz(&self, t: f64) -> f64 {
        let x = self.x(t);
        x * x - self.param.gamma
    }

    /// `z_a(t)`: quadrature inside `[-τ, τ]`, shifted by `2h` per period.
    pub fn z(&self, t: f64) -> f64 {
        let m = (t / (2.0 * self.tau)).round();
        let r = t - 2.0 * self.tau * m;
        2.0 * self.h_quadrature() * m + r.signum() * self.z_half(r.abs())
    }

    fn z_half(&self, r: f64) -> f64 {
        let tab = &self.table;
        let last = tab.prefix.len() - 1;
        let j = ((r / tab.panel).floor() as usize).min(last);
        let start = j as f64 * tab.panel;
        if r <= start {
            return tab.prefix[j];
        }
        tab.prefix[j] + tab.gl.integrate(start, r, |s| self.dz(s))
    }

    pub fn eval(&self, t: f64) -> ProfilePoint {
        let (x, dx) = self.x_dx(t);
        let g = self.param.gamma;
        let ddx = (1.0 + 2.0 * g) * x - 2.0 * x.powi(3);
        let dddx = (1.0 + 2.0 * g) * dx - 6.0 * x * x * dx;
        ProfilePoint {
            x,
            dx,
            ddx,
            dddx,
            z: self.z(t),
            dz: x * x - g,
            ddz: 2.0 * x * dx,
            dddz: 2.0 * dx * dx + 2.0 * x * ddx,
        }
    }

    /// Variational-ODE derivatives in `a`, with checkpoints up to `t_max`.
    pub fn a_derivatives(&self, t_max: f64) -> Result<ProfileADerivatives, ProfileError> {
        ProfileADerivatives::new(self.clone(), t_max)
    }
}

/// `∂x_a/∂a`, `∂x_a'/∂a` and `∂z_a/∂a` together with their `t`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ADerivPoint {
    pub u: f64,
    pub du: f64,
    pub ddu: f64,
    pub v: f64,
    pub dv: f64,
    pub ddv: f64,
}

impl ADerivPoint {
    pub fn u_jet(&self) -> Jet {
        Jet::new(self.u, self.du, self.ddu)
    }

    pub fn v_jet(&self) -> Jet {
        Jet::new(self.v, self.dv, self.ddv)
    }
}

const CHECKPOINT_SPACING: f64 = 0.5;
const VARIATIONAL_TOL: Tolerance = Tolerance {
    rtol: 1e-13,
    atol: 1e-14,
};

/// Solutions of the `a`-differentiated profile system:
/// `u'' = (1+2γ)u + 2(1+2a)x - 6x²u`, `v' = 2xu - (1+2a)`,
/// `u(0) = 1`, `u'(0) = 0`, `v(0) = 0`.
#[derive(Debug, Clone)]
pub struct ProfileADerivatives {
    profile: DelaunayProfile,
    checkpoints: Vec<[f64; 3]>,
}

impl ProfileADerivatives {
    pub fn new(profile: DelaunayProfile, t_max: f64) -> Result<Self, ProfileError> {
        let count = (t_max.abs() / CHECKPOINT_SPACING).ceil() as usize + 1;
        let ts: Vec<f64> = (1..count).map(|i| i as f64 * CHECKPOINT_SPACING).collect();
        let mut checkpoints = vec![[1.0, 0.0, 0.0]];
        let rhs = Self::rhs(&profile);
        checkpoints.extend(ode::integrate_dense(rhs, 0.0, [1.0, 0.0, 0.0], &ts, VARIATIONAL_TOL)?);
        Ok(Self { profile, checkpoints })
    }

    fn rhs(p: &DelaunayProfile) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
        let (a, g) = (p.a(), p.gamma());
        move |t, y| {
            let x = p.x(t);
            [
                y[1],
                (1.0 + 2.0 * g) * y[0] + 2.0 * (1.0 + 2.0 * a) * x - 6.0 * x * x * y[0],
                2.0 * x * y[0] - (1.0 + 2.0 * a),
            ]
        }
    }

    pub fn eval(&self, t: f64) -> Result<ADerivPoint, ProfileError> {
        let s = t.abs();
        let j = ((s / CHECKPOINT_SPACING).floor() as usize).min(self.checkpoints.len() - 1);
        let t0 = j as f64 * CHECKPOINT_SPACING;
        let y = ode::integrate(Self::rhs(&self.profile), t0, self.checkpoints[j], s, VARIATIONAL_TOL)?;
        let (a, g) = (self.profile.a(), self.profile.gamma());
        let pp = self.profile.eval(s);
        let (u, du, v) = (y[0], y[1], y[2]);
        let ddu = (1.0 + 2.0 * g) * u + 2.0 * (1.0 + 2.0 * a) * pp.x - 6.0 * pp.x * pp.x * u;
        let dv = 2.0 * pp.x * u - (1.0 + 2.0 * a);
        let ddv = 2.0 * pp.dx * u + 2.0 * pp.x * du;
        // u is even in t, v odd.
        let sg = if t < 0.0 { -1.0 } else { 1.0 };
        Ok(ADerivPoint {
            u,
            du: sg * du,
            ddu,
            v: sg * v,
            dv,
            ddv: sg * ddv,
        })
    }
}

/// Profile sampled from a direct Runge–Kutta integration of the Cauchy
/// problems, independent of the elliptic-function construction.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
    pub z: Vec<f64>,
}

const ORACLE_SAMPLES: usize = 401;

pub fn integrate_profile_oracle(a: f64, t_max: f64, tol: f64) -> Result<SampledProfile, ProfileError> {
    let param = DelaunayParam::new(a)?;
    let g = param.gamma();
    let ts: Vec<f64> = (1..ORACLE_SAMPLES)
        .map(|i| t_max * i as f64 / (ORACLE_SAMPLES - 1) as f64)
        .collect();
    let y0 = [1.0 + a, 0.0, 0.0];
    let rhs = |_t: f64, y: &[f64; 3]| [y[1], (1.0 + 2.0 * g) * y[0] - 2.0 * y[0].powi(3), y[0] * y[0] - g];
    // Step control is tightened so that the global error lands below `tol`.
    let states = ode::integrate_dense(rhs, 0.0, y0, &ts, Tolerance::uniform(tol * 1e-2))?;
    let mut out = SampledProfile {
        t: vec![0.0],
        x: vec![y0[0]],
        dx: vec![0.0],
        z: vec![0.0],
    };
    for (t, y) in ts.iter().zip(states) {
        out.t.push(*t);
        out.x.push(y[0]);
        out.dx.push(y[1]);
        out.z.push(y[2]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticRow {
    pub a: f64,
    /// `|τ_a + log|a| - log 4|`
    pub period_remainder: f64,
    /// `|(h_a - 1 - a log|a|)/a|`
    pub height_quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub rows: Vec<AsymptoticRow>,
}

impl AsymptoticReport {
    pub fn period_remainder_sup(&self) -> f64 {
        self.rows.iter().map(|r| r.period_remainder).fold(0.0, f64::max)
    }

    pub fn height_quotient_sup(&self) -> f64 {
        self.rows.iter().map(|r| r.height_quotient).fold(0.0, f64::max)
    }
}

/// Small-neck behaviour of the period and height over `a_grid`.
pub fn asymptotic_checks(a_grid: &[f64]) -> Result<AsymptoticReport, ProfileError> {
    let mut rows = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        if a == 0.0 || a.abs() > 0.1 {
            return Err(ProfileError::OutsideAsymptoticRange(a));
        }
        let p = make_profile(a)?;
        let la = a.abs().ln();
        rows.push(AsymptoticRow {
            a,
            period_remainder: (p.tau() + la - 4f64.ln()).abs(),
            height_quotient: ((p.h() - 1.0 - a * la) / a).abs(),
        });
    }
    Ok(AsymptoticReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_invalid_parameters() {
        assert!(make_profile(0.0).is_err());
        assert!(make_profile(-0.6).is_err());
        assert!(make_profile(f64::NAN).is_err());
    }

    #[test]
    fn round_cylinder() {
        let p = make_profile(-0.5).unwrap();
        assert!((p.tau() - PI).abs() < 1e-14);
        assert!((p.h() - PI / 2.0).abs() < 1e-14);
        for t in [-3.0, 0.0, 0.4, 7.0] {
            assert!((p.x(t) - 0.5).abs() < 1e-15);
            assert!((p.z(t) - t / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn param_fields() {
        let q = DelaunayParam::new(-0.1).unwrap();
        assert!((q.gamma() - (-0.09)).abs() < 1e-15);
        assert!((q.modulus().k_sq_complement() - 0.01 / 0.81).abs() < 1e-15);
    }

    #[test]
    fn sphere_limit() {
        for a in [-1e-6, 1e-6] {
            let p = make_profile(a).unwrap();
            assert!((p.x(1.0) - 1.0 / 1f64.cosh()).abs() < 1e-4);
        }
    }

    #[test]
    fn conformality_and_periods() {
        for a in [-0.4, -0.1, -0.01, 0.01, 0.1, 0.3] {
            let p = make_profile(a).unwrap();
            let tau = p.tau();
            for i in 0..=2000 {
                let t = -tau + 2.0 * tau * i as f64 / 2000.0;
                let q = p.eval(t);
                assert!((q.x * q.x - q.dx * q.dx - q.dz * q.dz).abs() < 1e-10, "a={a} t={t}");
                assert!((p.x(t + 2.0 * tau) - q.x).abs() < 1e-10);
                assert!((p.z(t + 2.0 * tau) - 2.0 * p.h() - q.z).abs() < 1e-10);
                assert!(q.x >= a.abs() - 1e-12 && q.x <= 1.0 + a + 1e-12);
                assert!((p.z(-t) + q.z).abs() < 1e-12);
            }
            assert!((p.h() - p.h_quadrature()).abs() < 1e-10, "a={a}");
        }
    }

    #[test]
    fn decreasing_on_half_period_and_sech_bound() {
        for a in [-0.3, -0.1, -0.01, 0.01, 0.1, 0.3] {
            let p = make_profile(a).unwrap();
            for i in 1..2000 {
                let t = p.tau() * i as f64 / 2000.0;
                assert!(p.dx(t) < 0.0);
                let bound = (1.0 + a.abs()) * (1.0 / t.cosh()).sqrt();
                assert!(p.x(t) <= bound + 1e-12, "a={a} t={t}");
            }
        }
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        for a in [-0.3, -0.1, 0.3] {
            let p = make_profile(a).unwrap();
            let s = integrate_profile_oracle(a, 2.0 * p.tau(), 1e-10).unwrap();
            let mut dev = 0.0_f64;
            for i in 0..s.t.len() {
                let q = p.eval(s.t[i]);
                dev = dev
                    .max((q.x - s.x[i]).abs())
                    .max((q.dx - s.dx[i]).abs())
                    .max((q.z - s.z[i]).abs());
            }
            assert!(dev < 1e-9, "a={a} dev={dev}");
        }
    }

    #[test]
    fn nodoid_height_speed_changes_sign() {
        let s = integrate_profile_oracle(0.3, make_profile(0.3).unwrap().tau(), 1e-10).unwrap();
        let g = 0.3 * 1.3;
        let speeds: Vec<f64> = s.x.iter().map(|x| x * x - g).collect();
        assert!(speeds[0] > 0.0 && *speeds.last().unwrap() < 0.0);
    }

    #[test]
    fn oracle_constant_profile() {
        let s = integrate_profile_oracle(-0.5, 10.0, 1e-10).unwrap();
        assert!(s.x.iter().all(|x| (x - 0.5).abs() < 1e-12));
    }

    fn fd_in_a(a: f64, t: f64, d: f64) -> (f64, f64, f64) {
        let pp = make_profile(a + d).unwrap();
        let pm = make_profile(a - d).unwrap();
        (
            (pp.x(t) - pm.x(t)) / (2.0 * d),
            (pp.dx(t) - pm.dx(t)) / (2.0 * d),
            (pp.z(t) - pm.z(t)) / (2.0 * d),
        )
    }

    #[test]
    fn a_derivatives_match_finite_differences() {
        for a in [-0.1, 0.2] {
            let p = make_profile(a).unwrap();
            let ad = p.a_derivatives(p.tau()).unwrap();
            let z = ad.eval(0.0).unwrap();
            assert_eq!((z.u, z.du, z.v), (1.0, 0.0, 0.0));
            for i in 0..=20 {
                let t = -p.tau() + p.tau() * i as f64 / 10.0;
                let q = ad.eval(t).unwrap();
                let (fu, fdu, fv) = fd_in_a(a, t, 1e-5);
                for (x, y) in [(q.u, fu), (q.du, fdu), (q.v, fv)] {
                    assert!((x - y).abs() < 1e-6 * y.abs().max(1.0), "a={a} t={t}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn a_derivatives_at_round_cylinder() {
        // One-sided second-order difference since a cannot go below -1/2.
        let d = 1e-5;
        let p0 = make_profile(-0.5).unwrap();
        let p1 = make_profile(-0.5 + d).unwrap();
        let p2 = make_profile(-0.5 + 2.0 * d).unwrap();
        let ad = p0.a_derivatives(4.0).unwrap();
        for t in [0.5, 1.7, 3.9] {
            let fd = (-3.0 * p0.x(t) + 4.0 * p1.x(t) - p2.x(t)) / (2.0 * d);
            let u = ad.eval(t).unwrap().u;
            assert!((u - fd).abs() < 1e-6, "t={t}: {u} vs {fd}");
            assert!((u - t.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn asymptotics() {
        // The next correction to the period is of size |a log a| ≈ 1e-3 here.
        let r = asymptotic_checks(&[-1e-4]).unwrap();
        assert!(r.period_remainder_sup() < 1.2e-3);
        let r = asymptotic_checks(&[-1e-5]).unwrap();
        assert!(r.period_remainder_sup() < 1e-3);
        let r = asymptotic_checks(&[-1e-6]).unwrap();
        assert!(r.height_quotient_sup() < 2.0);
        assert!(asymptotic_checks(&[-0.5]).is_err());
    }
}
