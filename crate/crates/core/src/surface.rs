//! Parametric surface calculus on `(t, θ)` patches.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type V3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("degenerate patch at (t, θ) = ({t}, {theta}): |X_t ∧ X_θ| = {norm:e}")]
    Degenerate { t: f64, theta: f64, norm: f64 },
}

pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Third partial derivatives, supplied by patches that know them analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdOrder {
    pub ttt: V3,
    pub ttth: V3,
    pub tthth: V3,
    pub ththth: V3,
}

/// Position and partial derivatives of a patch at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchJet {
    pub x: V3,
    pub t: V3,
    pub th: V3,
    pub tt: V3,
    pub tth: V3,
    pub thth: V3,
    pub third: Option<ThirdOrder>,
}

/// A surface `(t, θ) -> ℝ³` with analytic partials up to second order.
pub trait SurfacePatch: Sync {
    fn jet(&self, t: f64, theta: f64) -> PatchJet;

    /// Whether `X_t · X_θ = 0` holds identically.
    fn is_orthogonal(&self) -> bool {
        false
    }
}

impl<P: SurfacePatch + ?Sized> SurfacePatch for &P {
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        (**self).jet(t, theta)
    }

    fn is_orthogonal(&self) -> bool {
        (**self).is_orthogonal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub normal: V3,
}

impl FundamentalForms {
    pub fn mean_curvature(&self) -> f64 {
        (self.e * self.n - 2.0 * self.f * self.m + self.g * self.l) / (2.0 * (self.e * self.g - self.f * self.f))
    }
}

pub fn forms_from_jet(j: &PatchJet, t: f64, theta: f64) -> Result<FundamentalForms, SurfaceError> {
    let cross = j.t.cross(&j.th);
    let norm = cross.norm();
    if !(norm >= DEGENERACY_THRESHOLD) {
        return Err(SurfaceError::Degenerate { t, theta, norm });
    }
    let normal = cross / norm;
    Ok(FundamentalForms {
        e: j.t.dot(&j.t),
        f: j.t.dot(&j.th),
        g: j.th.dot(&j.th),
        l: j.tt.dot(&normal),
        m: j.tth.dot(&normal),
        n: j.thth.dot(&normal),
        normal,
    })
}

pub fn fundamental_forms(p: &dyn SurfacePatch, t: f64, theta: f64) -> Result<FundamentalForms, SurfaceError> {
    forms_from_jet(&p.jet(t, theta), t, theta)
}

/// `(EN - 2FM + GL) / (2(EG - F²))`, oriented by the patch's own normal.
pub fn mean_curvature(p: &dyn SurfacePatch, t: f64, theta: f64) -> Result<f64, SurfaceError> {
    Ok(fundamental_forms(p, t, theta)?.mean_curvature())
}

/// Unit normal and its partial derivatives up to second order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalJet {
    pub n: V3,
    pub t: V3,
    pub th: V3,
    pub tt: V3,
    pub tth: V3,
    pub thth: V3,
}

struct FirstNormal {
    n: V3,
    t: V3,
    th: V3,
    cross_t: V3,
    cross_th: V3,
    norm: f64,
}

fn first_normal(j: &PatchJet, t: f64, theta: f64) -> Result<FirstNormal, SurfaceError> {
    let c = j.t.cross(&j.th);
    let norm = c.norm();
    if !(norm >= DEGENERACY_THRESHOLD) {
        return Err(SurfaceError::Degenerate { t, theta, norm });
    }
    let n = c / norm;
    let c_t = j.tt.cross(&j.th) + j.t.cross(&j.tth);
    let c_th = j.tth.cross(&j.th) + j.t.cross(&j.thth);
    let n_t = (c_t - n * n.dot(&c_t)) / norm;
    let n_th = (c_th - n * n.dot(&c_th)) / norm;
    Ok(FirstNormal {
        n,
        t: n_t,
        th: n_th,
        cross_t: c_t,
        cross_th: c_th,
        norm,
    })
}

const NORMAL_FD_STEP: f64 = 1e-5;

/// Normal derivatives: analytic when the patch supplies third derivatives,
/// otherwise central differences of the analytic first derivatives with one
/// Richardson level.
pub fn normal_jet(p: &dyn SurfacePatch, t: f64, theta: f64) -> Result<NormalJet, SurfaceError> {
    let j = p.jet(t, theta);
    let f = first_normal(&j, t, theta)?;
    if let Some(th3) = j.third {
        // J = X_t ∧ X_θ; N_ij = [J_ij - N_j (N·J_i) - N_i (N·J_j) - N (N_j·J_i + N·J_ij)] / |J|
        let c_tt = th3.ttt.cross(&j.th) + 2.0 * j.tt.cross(&j.tth) + j.t.cross(&th3.ttth);
        let c_tth = th3.ttth.cross(&j.th) + j.tt.cross(&j.thth) + j.t.cross(&th3.tthth);
        let c_thth = th3.tthth.cross(&j.th) + 2.0 * j.tth.cross(&j.thth) + j.t.cross(&th3.ththth);
        let n = f.n;
        let second = |ci: &V3, cj: &V3, ni: &V3, nj: &V3, cij: &V3| -> V3 {
            (cij - nj * n.dot(ci) - ni * n.dot(cj) - n * (nj.dot(ci) + n.dot(cij))) / f.norm
        };
        return Ok(NormalJet {
            n,
            t: f.t,
            th: f.th,
            tt: second(&f.cross_t, &f.cross_t, &f.t, &f.t, &c_tt),
            tth: second(&f.cross_t, &f.cross_th, &f.t, &f.th, &c_tth),
            thth: second(&f.cross_th, &f.cross_th, &f.th, &f.th, &c_thth),
        });
    }
    let eval = |tt: f64, th: f64| first_normal(&p.jet(tt, th), tt, th);
    let diff = |h: f64| -> Result<(V3, V3, V3), SurfaceError> {
        let (tp, tm) = (eval(t + h, theta)?, eval(t - h, theta)?);
        let (hp, hm) = (eval(t, theta + h)?, eval(t, theta - h)?);
        Ok((
            (tp.t - tm.t) / (2.0 * h),
            (hp.t - hm.t) / (2.0 * h),
            (hp.th - hm.th) / (2.0 * h),
        ))
    };
    let (a1, b1, c1) = diff(NORMAL_FD_STEP)?;
    let (a2, b2, c2) = diff(0.5 * NORMAL_FD_STEP)?;
    let rich = |coarse: V3, fine: V3| (4.0 * fine - coarse) / 3.0;
    Ok(NormalJet {
        n: f.n,
        t: f.t,
        th: f.th,
        tt: rich(a1, a2),
        tth: rich(b1, b2),
        thth: rich(c1, c2),
    })
}

/// Maximum residuals of the orthogonal-patch identities over a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// `(identity name, max residual)` in a fixed order.
    pub residuals: Vec<(&'static str, f64)>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

const METRIC_FD_STEP: f64 = 1e-3;

/// Checks the normal-derivative, metric-derivative and wedge-product
/// identities of an orthogonal patch at each sample point. Metric derivatives
/// are taken by fourth-order differences of `|X_t|²`, `|X_θ|²` so that the
/// checks are not tautological.
pub fn identity_suite(p: &dyn SurfacePatch, sample: &[(f64, f64)]) -> Result<IdentityReport, SurfaceError> {
    const NAMES: [&str; 6] = [
        "normal_second_derivatives",
        "metric_derivatives",
        "metric_cross_derivatives",
        "tangent_normal_wedges",
        "normal_derivative_wedges",
        "gauss_wedge",
    ];
    let mut worst = [0.0_f64; 6];
    for &(t, th) in sample {
        let j = p.jet(t, th);
        let ff = forms_from_jet(&j, t, th)?;
        let nj = normal_jet(p, t, th)?;
        let n = nj.n;
        let (l, m, nn) = (ff.l, ff.m, ff.n);
        let mut r = [0.0_f64; 6];

        r[0] = [
            (nj.tt.dot(&n) + nj.t.norm_squared()).abs(),
            (nj.thth.dot(&n) + nj.th.norm_squared()).abs(),
            (nj.tth.dot(&n) + nj.t.dot(&nj.th)).abs(),
            (j.t.dot(&nj.th) + m).abs(),
            (j.th.dot(&nj.t) + m).abs(),
            (j.t.dot(&nj.t) + l).abs(),
            (j.th.dot(&nj.th) + nn).abs(),
            nj.t.dot(&n).abs(),
            nj.th.dot(&n).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);

        let h = METRIC_FD_STEP;
        let e_of = |tt: f64, tth: f64| p.jet(tt, tth).t.norm_squared();
        let g_of = |tt: f64, tth: f64| p.jet(tt, tth).th.norm_squared();
        let d4 = |f: &dyn Fn(f64) -> f64| (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
        let e_t = d4(&|s| e_of(t + s, th));
        let e_th = d4(&|s| e_of(t, th + s));
        let g_t = d4(&|s| g_of(t + s, th));
        let g_th = d4(&|s| g_of(t, th + s));
        r[1] = [
            (j.tt.dot(&j.t) - 0.5 * e_t).abs(),
            (j.tth.dot(&j.t) - 0.5 * e_th).abs(),
            (j.tth.dot(&j.th) - 0.5 * g_t).abs(),
            (j.thth.dot(&j.th) - 0.5 * g_th).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        r[2] = (j.tt.dot(&j.th) + 0.5 * e_th).abs().max((j.thth.dot(&j.t) + 0.5 * g_t).abs());

        let (lt, lth) = (j.t.norm(), j.th.norm());
        let (ht, hth) = (j.t / lt, j.th / lth);
        r[3] = (j.t.cross(&n) + lt * hth).amax().max((n.cross(&j.th) + lth * ht).amax());

        r[4] = [
            (j.t.cross(&nj.th) + (lt / lth) * nn * n).amax(),
            (n.cross(&nj.th) - (nn / lth) * ht + (m / lt) * hth).amax(),
            (nj.t.cross(&j.th) + (lth / lt) * l * n).amax(),
            (nj.t.cross(&n) + (m / lth) * ht - (l / lt) * hth).amax(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        r[5] = (nj.t.cross(&nj.th) - (l * nn - m * m) / (lt * lth) * n).amax();

        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    Ok(IdentityReport {
        residuals: NAMES.into_iter().zip(worst).collect(),
    })
}

/// Jet of the surface of revolution `(x cosθ, x sinθ, z)` from profile
/// derivatives `x = [x, x', x'', x''']`, `z = [z, z', z'', z''']`.
pub fn revolution_jet(x: [f64; 4], z: [f64; 4], theta: f64) -> PatchJet {
    let (s, c) = theta.sin_cos();
    let v = |a: f64, b: f64, cc: f64| V3::new(a, b, cc);
    PatchJet {
        x: v(x[0] * c, x[0] * s, z[0]),
        t: v(x[1] * c, x[1] * s, z[1]),
        th: v(-x[0] * s, x[0] * c, 0.0),
        tt: v(x[2] * c, x[2] * s, z[2]),
        tth: v(-x[1] * s, x[1] * c, 0.0),
        thth: v(-x[0] * c, -x[0] * s, 0.0),
        third: Some(ThirdOrder {
            ttt: v(x[3] * c, x[3] * s, z[3]),
            ttth: v(-x[2] * s, x[2] * c, 0.0),
            tthth: v(-x[1] * c, -x[1] * s, 0.0),
            ththth: v(x[0] * s, -x[0] * c, 0.0),
        }),
    }
}

/// Unit sphere `(sech t cosθ, sech t sinθ, tanh t)`; conformal, inward normal.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpherePatch;

impl SurfacePatch for SpherePatch {
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        let (sh, th) = (1.0 / t.cosh(), t.tanh());
        let (s2, s3) = (sh * sh, sh * sh * sh);
        let x = [sh, -sh * th, sh - 2.0 * s3, -sh * th + 6.0 * s3 * th];
        let z = [th, s2, -2.0 * s2 * th, 4.0 * s2 * th * th - 2.0 * s2 * s2];
        revolution_jet(x, z, theta)
    }

    fn is_orthogonal(&self) -> bool {
        true
    }
}

/// Round cylinder of radius `r` about the vertical axis, `(r cosθ, r sinθ, r t)`.
#[derive(Debug, Clone, Copy)]
pub struct RoundCylinderPatch {
    pub radius: f64,
}

impl SurfacePatch for RoundCylinderPatch {
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        let r = self.radius;
        revolution_jet([r, 0.0, 0.0, 0.0], [r * t, r, 0.0, 0.0], theta)
    }

    fn is_orthogonal(&self) -> bool {
        true
    }
}

/// A patch moved by a rigid rotation and translation, with its parameter
/// shifted by `t_shift` (so `jet(t)` evaluates the inner patch at `t + t_shift`).
pub struct RigidlyMoved<P> {
    pub inner: P,
    pub rotation: Matrix3<f64>,
    pub translation: V3,
    pub t_shift: f64,
}

impl<P: SurfacePatch> SurfacePatch for RigidlyMoved<P> {
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        let j = self.inner.jet(t + self.t_shift, theta);
        let r = &self.rotation;
        PatchJet {
            x: r * j.x + self.translation,
            t: r * j.t,
            th: r * j.th,
            tt: r * j.tt,
            tth: r * j.tth,
            thth: r * j.thth,
            third: j.third.map(|o| ThirdOrder {
                ttt: r * o.ttt,
                ttth: r * o.ttth,
                tthth: r * o.tthth,
                ththth: r * o.ththth,
            }),
        }
    }

    fn is_orthogonal(&self) -> bool {
        self.inner.is_orthogonal()
    }
}

/// Strips third derivatives so normal derivatives fall back to differences.
pub struct SecondOrderOnly<P>(pub P);

impl<P: SurfacePatch> SurfacePatch for SecondOrderOnly<P> {
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        PatchJet {
            third: None,
            ..self.0.jet(t, theta)
        }
    }

    fn is_orthogonal(&self) -> bool {
        self.0.is_orthogonal()
    }
}
