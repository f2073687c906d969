//! Normal perturbations `φ(t, θ)` and normal graphs `X + φN`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cylinder::CylinderPatch;
use crate::jet::Jet;
use crate::profile::{make_profile, DelaunayProfile, ProfileError};
use crate::report::{grid_sup2, grid_sup_array, ExpansionReport, ExpansionSample};
use crate::surface::{self, forms_from_jet, normal_jet, NormalJet, PatchJet, SpherePatch, SurfaceError, SurfacePatch, V3};
use crate::torus::{self, TorusError, TorusPatch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("variation formulas need an orthogonal base patch")]
    NotOrthogonal,
    #[error("perturbation outside the ball: weighted norm {norm:e} > {bound:e}")]
    BallViolation { norm: f64, bound: f64 },
    #[error("graph loses regularity: normal-area factor reaches {margin:e}")]
    RegularityLoss { margin: f64 },
    #[error("invalid prescribed-curvature parameter: {0}")]
    InvalidField(String),
}

/// `φ` and its partial derivatives up to second order at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet {
    pub v: f64,
    pub t: f64,
    pub th: f64,
    pub tt: f64,
    pub tth: f64,
    pub thth: f64,
}

impl FieldJet {
    pub fn laplacian(&self) -> f64 {
        self.tt + self.thth
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            v: c * self.v,
            t: c * self.t,
            th: c * self.th,
            tt: c * self.tt,
            tth: c * self.tth,
            thth: c * self.thth,
        }
    }

    pub fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            t: self.t + o.t,
            th: self.th + o.th,
            tt: self.tt + o.tt,
            tth: self.tth + o.tth,
            thth: self.thth + o.thth,
        }
    }

    /// `|∇φ|` in the flat `(t, θ)` metric.
    pub fn gradient_norm(&self) -> f64 {
        self.t.hypot(self.th)
    }

    /// Frobenius norm of the flat Hessian.
    pub fn hessian_norm(&self) -> f64 {
        (self.tt * self.tt + 2.0 * self.tth * self.tth + self.thth * self.thth).sqrt()
    }
}

/// A scalar field on the `(t, θ)` parameter domain used as a normal
/// displacement.
pub trait NormalPerturbation: Sync {
    fn jet(&self, t: f64, theta: f64) -> FieldJet;

    /// Periods `(T, 2π)` when the field is doubly periodic.
    fn period_box(&self) -> Option<(f64, f64)> {
        None
    }
}

impl<P: NormalPerturbation + ?Sized> NormalPerturbation for &P {
    fn jet(&self, t: f64, theta: f64) -> FieldJet {
        (**self).jet(t, theta)
    }

    fn period_box(&self) -> Option<(f64, f64)> {
        (**self).period_box()
    }
}

/// Constant field.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub f64);

impl NormalPerturbation for ConstantField {
    fn jet(&self, _t: f64, _theta: f64) -> FieldJet {
        FieldJet {
            v: self.0,
            ..FieldJet::default()
        }
    }
}

/// Angular factor of a separable field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angular {
    One,
    Cos(u32),
    Sin(u32),
}

impl Angular {
    /// `(Y, Y', Y'')`.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        match *self {
            Angular::One => (1.0, 0.0, 0.0),
            Angular::Cos(j) => {
                let (s, c) = (j as f64 * theta).sin_cos();
                let jj = j as f64;
                (c, -jj * s, -jj * jj * c)
            }
            Angular::Sin(j) => {
                let (s, c) = (j as f64 * theta).sin_cos();
                let jj = j as f64;
                (s, jj * c, -jj * jj * s)
            }
        }
    }

    pub fn mode(&self) -> u32 {
        match *self {
            Angular::One => 0,
            Angular::Cos(j) | Angular::Sin(j) => j,
        }
    }
}

/// `φ = w(t) Y(θ)` with `w` given as a second-order jet.
pub struct SeparableField<W> {
    pub radial: W,
    pub angular: Angular,
    pub period: Option<f64>,
}

impl<W: Fn(f64) -> Jet + Sync> SeparableField<W> {
    pub fn new(radial: W, angular: Angular) -> Self {
        Self {
            radial,
            angular,
            period: None,
        }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }
}

impl<W: Fn(f64) -> Jet + Sync> NormalPerturbation for SeparableField<W> {
    fn jet(&self, t: f64, theta: f64) -> FieldJet {
        let w = (self.radial)(t);
        let (y, y1, y2) = self.angular.eval(theta);
        FieldJet {
            v: w.v * y,
            t: w.d1 * y,
            th: w.v * y1,
            tt: w.d2 * y,
            tth: w.d1 * y1,
            thth: w.v * y2,
        }
    }

    fn period_box(&self) -> Option<(f64, f64)> {
        self.period.map(|p| (p, 2.0 * PI))
    }
}

/// Field given directly by a closure returning the full jet.
pub struct FnField<F>(pub F);

impl<F: Fn(f64, f64) -> FieldJet + Sync> NormalPerturbation for FnField<F> {
    fn jet(&self, t: f64, theta: f64) -> FieldJet {
        (self.0)(t, theta)
    }
}

/// `c · φ`.
pub struct Scaled<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: NormalPerturbation> NormalPerturbation for Scaled<P> {
    fn jet(&self, t: f64, theta: f64) -> FieldJet {
        self.inner.jet(t, theta).scale(self.factor)
    }

    fn period_box(&self) -> Option<(f64, f64)> {
        self.inner.period_box()
    }
}

/// `φ + ψ`.
pub struct Sum<P, Q>(pub P, pub Q);

impl<P: NormalPerturbation, Q: NormalPerturbation> NormalPerturbation for Sum<P, Q> {
    fn jet(&self, t: f64, theta: f64) -> FieldJet {
        self.0.jet(t, theta).add(self.1.jet(t, theta))
    }
}

/// Common radial jets.
pub mod radial {
    use crate::jet::Jet;

    pub fn sech(t: f64) -> Jet {
        let (s, th) = (1.0 / t.cosh(), t.tanh());
        Jet::new(s, -s * th, s * (th * th - s * s))
    }

    pub fn sech_sq(t: f64) -> Jet {
        let (s, th) = (1.0 / t.cosh(), t.tanh());
        let s2 = s * s;
        Jet::new(s2, -2.0 * s2 * th, s2 * (4.0 * th * th - 2.0 * s2))
    }

    pub fn gaussian(t: f64) -> Jet {
        let g = (-t * t).exp();
        Jet::new(g, -2.0 * t * g, (4.0 * t * t - 2.0) * g)
    }

    pub fn sine(freq: f64, phase: f64) -> impl Fn(f64) -> Jet + Sync {
        move |t| {
            let (s, c) = (freq * t + phase).sin_cos();
            Jet::new(s, freq * c, -freq * freq * s)
        }
    }

    pub fn one(_t: f64) -> Jet {
        Jet::constant(1.0)
    }
}

/// Jet of `X + sφN` from the base jet, its normal jet and the field jet.
pub fn perturbed_jet(x: &PatchJet, nj: &NormalJet, f: &FieldJet, s: f64) -> PatchJet {
    let n = nj.n;
    PatchJet {
        x: x.x + s * f.v * n,
        t: x.t + s * (f.t * n + f.v * nj.t),
        th: x.th + s * (f.th * n + f.v * nj.th),
        tt: x.tt + s * (f.tt * n + 2.0 * f.t * nj.t + f.v * nj.tt),
        tth: x.tth + s * (f.tth * n + f.t * nj.th + f.th * nj.t + f.v * nj.tth),
        thth: x.thth + s * (f.thth * n + 2.0 * f.th * nj.th + f.v * nj.thth),
        third: None,
    }
}

/// The normal graph `X + φN` over `base`.
pub struct GraphPatch<P, F> {
    pub base: P,
    pub field: F,
}

pub fn graph_patch<P: SurfacePatch, F: NormalPerturbation>(base: P, field: F) -> GraphPatch<P, F> {
    GraphPatch { base, field }
}

impl<P: SurfacePatch, F: NormalPerturbation> GraphPatch<P, F> {
    pub fn try_jet(&self, t: f64, theta: f64) -> Result<PatchJet, SurfaceError> {
        let x = self.base.jet(t, theta);
        let nj = normal_jet(&self.base, t, theta)?;
        Ok(perturbed_jet(&x, &nj, &self.field.jet(t, theta), 1.0))
    }
}

impl<P: SurfacePatch, F: NormalPerturbation> SurfacePatch for GraphPatch<P, F> {
    /// A degenerate base yields a NaN jet, which `forms_from_jet` rejects.
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        self.try_jet(t, theta).unwrap_or_else(|_| {
            let nan = V3::repeat(f64::NAN);
            PatchJet {
                x: nan,
                t: nan,
                th: nan,
                tt: nan,
                tth: nan,
                thth: nan,
                third: None,
            }
        })
    }
}

/// `s ↦ 𝔐(X + sφN)` at a fixed point, with the base data computed once.
struct GraphLine {
    x: PatchJet,
    nj: NormalJet,
    f: FieldJet,
    t: f64,
    theta: f64,
}

impl GraphLine {
    fn new(base: &dyn SurfacePatch, phi: &dyn NormalPerturbation, t: f64, theta: f64) -> Result<Self, SurfaceError> {
        Ok(Self {
            x: base.jet(t, theta),
            nj: normal_jet(base, t, theta)?,
            f: phi.jet(t, theta),
            t,
            theta,
        })
    }

    fn mean_curvature(&self, s: f64) -> Result<f64, SurfaceError> {
        let j = perturbed_jet(&self.x, &self.nj, &self.f, s);
        Ok(forms_from_jet(&j, self.t, self.theta)?.mean_curvature())
    }
}

/// Mean curvature of `X + sφN`, oriented by its own normal.
pub fn graph_mean_curvature(
    base: &dyn SurfacePatch,
    phi: &dyn NormalPerturbation,
    s: f64,
    t: f64,
    theta: f64,
) -> Result<f64, SurfaceError> {
    GraphLine::new(base, phi, t, theta)?.mean_curvature(s)
}

pub const FIRST_VARIATION_STEP: f64 = 1e-6;
pub const SECOND_VARIATION_STEP: f64 = 1e-4;

/// `d/ds 𝔐(X + sφN)` at `s = 0` by central differences, one Richardson level.
pub fn first_variation_fd(
    base: &dyn SurfacePatch,
    phi: &dyn NormalPerturbation,
    t: f64,
    theta: f64,
) -> Result<f64, SurfaceError> {
    let line = GraphLine::new(base, phi, t, theta)?;
    let d = |h: f64| -> Result<f64, SurfaceError> { Ok((line.mean_curvature(h)? - line.mean_curvature(-h)?) / (2.0 * h)) };
    let h = FIRST_VARIATION_STEP;
    Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
}

/// `d²/ds² 𝔐(X + sφN)` at `s = 0` by second differences, two Richardson levels.
pub fn second_variation_fd(
    base: &dyn SurfacePatch,
    phi: &dyn NormalPerturbation,
    t: f64,
    theta: f64,
) -> Result<f64, SurfaceError> {
    let line = GraphLine::new(base, phi, t, theta)?;
    let m0 = line.mean_curvature(0.0)?;
    let d =
        |h: f64| -> Result<f64, SurfaceError> { Ok((line.mean_curvature(h)? - 2.0 * m0 + line.mean_curvature(-h)?) / (h * h)) };
    let h = SECOND_VARIATION_STEP;
    let (d1, d2, d3) = (d(h)?, d(0.5 * h)?, d(0.25 * h)?);
    let (r1, r2) = ((4.0 * d2 - d1) / 3.0, (4.0 * d3 - d2) / 3.0);
    Ok((16.0 * r2 - r1) / 15.0)
}

/// Base quantities entering the closed-form variations.
struct Geometry {
    e: f64,
    g: f64,
    e_t: f64,
    e_th: f64,
    g_t: f64,
    g_th: f64,
    l: f64,
    m: f64,
    n: f64,
    x: PatchJet,
    nj: NormalJet,
}

fn geometry(base: &dyn SurfacePatch, t: f64, theta: f64) -> Result<Geometry, GraphError> {
    if !base.is_orthogonal() {
        return Err(GraphError::NotOrthogonal);
    }
    let x = base.jet(t, theta);
    let nj = normal_jet(base, t, theta)?;
    Ok(Geometry {
        e: x.t.norm_squared(),
        g: x.th.norm_squared(),
        e_t: 2.0 * x.t.dot(&x.tt),
        e_th: 2.0 * x.t.dot(&x.tth),
        g_t: 2.0 * x.th.dot(&x.tth),
        g_th: 2.0 * x.th.dot(&x.thth),
        l: x.tt.dot(&nj.n),
        m: x.tth.dot(&nj.n),
        n: x.thth.dot(&nj.n),
        x,
        nj,
    })
}

/// Closed-form first variation of the mean curvature along `φN` for an
/// orthogonal base patch.
pub fn first_variation(base: &dyn SurfacePatch, phi: &dyn NormalPerturbation, t: f64, theta: f64) -> Result<f64, GraphError> {
    let q = geometry(base, t, theta)?;
    let f = phi.jet(t, theta);
    let (e, g) = (q.e, q.g);
    let c_t = q.g_t / (4.0 * e * g) - q.e_t / (4.0 * e * e);
    let c_th = q.e_th / (4.0 * e * g) - q.g_th / (4.0 * g * g);
    let c0 = 2.0 * q.m * q.m / (e * g) - q.nj.th.norm_squared() / (2.0 * g) - q.nj.t.norm_squared() / (2.0 * e)
        + q.l * q.l / (e * e)
        + q.n * q.n / (g * g);
    Ok(f.tt / (2.0 * e) + f.thth / (2.0 * g) + c_t * f.t + c_th * f.th + c0 * f.v)
}

/// Closed-form second variation of the mean curvature along `φN` for an
/// orthogonal base patch.
pub fn second_variation(base: &dyn SurfacePatch, phi: &dyn NormalPerturbation, t: f64, theta: f64) -> Result<f64, GraphError> {
    let q = geometry(base, t, theta)?;
    let f = phi.jet(t, theta);
    let (e, g, l, m, n) = (q.e, q.g, q.l, q.m, q.n);
    let (nt2, nth2) = (q.nj.t.norm_squared(), q.nj.th.norm_squared());
    let eg = e * g;

    let c_tt = 0.5 * l / (e * e) - 0.5 * n / eg;
    let c_thth = -0.5 * l / eg + 0.5 * n / (g * g);
    let c_00 = -6.0 * q.nj.t.dot(&q.nj.th) * m / eg + 12.0 * l * m * m / (e * eg) + 12.0 * n * m * m / (eg * g)
        - 3.0 * l * nt2 / (e * e)
        - 3.0 * n * nth2 / (g * g)
        + 4.0 * (l / e).powi(3)
        + 4.0 * (n / g).powi(3);
    let c_tth = 2.0 * m / eg;
    let c_0t = -q.nj.thth.dot(&q.x.t) / eg - q.nj.tt.dot(&q.x.t) / (e * e) - 1.5 * l * q.e_t / e.powi(3)
        + n * q.g_t / (eg * g)
        + 0.5 * l * q.g_t / (e * eg)
        - 0.5 * m * q.g_th / (eg * g)
        - 1.5 * m * q.e_th / (e * eg);
    let c_0th = -q.nj.tt.dot(&q.x.th) / eg - q.nj.thth.dot(&q.x.th) / (g * g) - 1.5 * n * q.g_th / g.powi(3)
        + l * q.e_th / (e * eg)
        + 0.5 * n * q.e_th / (eg * g)
        - 0.5 * m * q.e_t / (e * eg)
        - 1.5 * m * q.g_t / (eg * g);

    Ok(f.t * f.t * c_tt
        + f.th * f.th * c_thth
        + f.v * f.v * c_00
        + f.t * f.th * c_tth
        + f.v * f.t * c_0t
        + f.v * f.th * c_0th
        + f.v * f.thth * (2.0 * n / (g * g))
        + f.v * f.tt * (2.0 * l / (e * e))
        + f.v * f.tth * (4.0 * m / eg))
}

/// `[(X+φN)_t ∧ (X+φN)_θ]·N / |X_t ∧ X_θ|`, directly and through the
/// quadratic identity `1 - 2𝔐φ + (LN - M²)/(EG) φ²` (orthogonal base).
pub fn normal_area_factor(
    base: &dyn SurfacePatch,
    phi: &dyn NormalPerturbation,
    t: f64,
    theta: f64,
) -> Result<(f64, f64), GraphError> {
    let q = geometry(base, t, theta)?;
    let f = phi.jet(t, theta);
    let y = perturbed_jet(&q.x, &q.nj, &f, 1.0);
    let area = q.x.t.cross(&q.x.th).norm();
    let direct = y.t.cross(&y.th).dot(&q.nj.n) / area;
    let eg = q.e * q.g;
    let h = (q.e * q.n + q.g * q.l) / (2.0 * eg);
    let identity = 1.0 - 2.0 * h * f.v + (q.l * q.n - q.m * q.m) / eg * f.v * f.v;
    Ok((direct, identity))
}

/// Smallest normal-area factor over a grid; the graph is a regular surface
/// with the base orientation where this is positive.
pub fn regularity_margin(
    base: &dyn SurfacePatch,
    phi: &dyn NormalPerturbation,
    ts: &[f64],
    thetas: &[f64],
) -> Result<f64, GraphError> {
    let mut margin = f64::INFINITY;
    for &t in ts {
        for &th in thetas {
            margin = margin.min(normal_area_factor(base, phi, t, th)?.0);
        }
    }
    Ok(margin)
}

/// `sup x_a⁻¹ (|φ| + |∇φ| + |D²φ|)` over a grid.
pub fn weighted_c2_norm(profile: &DelaunayProfile, phi: &dyn NormalPerturbation, ts: &[f64], thetas: &[f64]) -> f64 {
    grid_sup2(ts, thetas, |t, th| -> Result<(f64, f64), ()> {
        let f = phi.jet(t, th);
        Ok(((f.v.abs() + f.gradient_norm() + f.hessian_norm()) / profile.x(t), 0.0))
    })
    .map(|p| p.0)
    .unwrap_or(f64::NAN)
}

/// The perturbation ball `‖φ‖_{C²(K; x_a⁻¹)} ≤ R ε^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationBallSpec {
    pub radius: f64,
    pub beta: f64,
}

impl PerturbationBallSpec {
    pub fn bound(&self, eps: f64) -> f64 {
        self.radius * eps.powf(self.beta)
    }

    pub fn check(&self, profile: &DelaunayProfile, phi: &dyn NormalPerturbation, eps: f64) -> Result<f64, GraphError> {
        let (ts, ths) = torus::sup_grid(profile);
        let norm = weighted_c2_norm(profile, phi, &ts, &ths);
        let bound = self.bound(eps);
        if norm > bound {
            return Err(GraphError::BallViolation { norm, bound });
        }
        Ok(norm)
    }
}

/// An `ε`-dependent perturbation, e.g. `φ_ε = Rε x_a sinθ`.
pub type FieldFamily<'a> = dyn Fn(f64) -> Box<dyn NormalPerturbation + 'a> + Sync + 'a;

/// Leading quadratic form of the torus second variation at `ε = 0`.
pub fn second_variation_leading(profile: &DelaunayProfile, phi: &dyn NormalPerturbation, t: f64, theta: f64) -> f64 {
    let p = profile.eval(t);
    let (x, dx, g) = (p.x, p.dx, profile.gamma());
    let f = phi.jet(t, theta);
    let (x2, x4) = (x * x, x.powi(4));
    let plus = (x2 + g) / x2;
    let minus = (x2 - g) / x2;
    g / x4 * (f.t * f.t - f.th * f.th)
        + (plus.powi(3) + minus.powi(3)) * f.v * f.v
        + 2.0 * f.v * f.tt * (x2 + g) / x4
        + 2.0 * f.v * f.thth * (x2 - g) / x4
        - 4.0 * g * dx / x.powi(5) * f.v * f.t
}

/// Remainder of the torus second variation after its `ε⁰` form; first order,
/// weighted column `sup |x_a³ rem/ε|`.
pub fn torus_second_variation_expansion(
    profile: &DelaunayProfile,
    phi: &dyn NormalPerturbation,
    eps: &[f64],
) -> Result<ExpansionReport, GraphError> {
    let (ts, ths) = torus::sup_grid(profile);
    torus::check_eps(eps)?;
    let mut rep = ExpansionReport::new("second_variation", 1.0);
    for &e in eps {
        let patch = TorusPatch::with_epsilon(profile.clone(), e)?;
        let (r, w) = grid_sup2(&ts, &ths, |t, th| -> Result<(f64, f64), GraphError> {
            let rem = second_variation(&patch, phi, t, th)? - second_variation_leading(profile, phi, t, th);
            Ok((rem, profile.x(t).powi(3) * rem / e))
        })?;
        rep.samples.push(ExpansionSample {
            epsilon: e,
            remainder_sup: r,
            weighted_sup: w,
        });
    }
    Ok(rep)
}

/// Quadratic remainder of the graph mean curvature,
/// `2x²𝔐(X+φN) - 2x²𝔐(X) - ℒ_{ε,a}φ`, of order `2β` for `φ` in the ball.
/// Also enforces ball membership and a positive regularity margin.
pub fn graph_expansion(
    profile: &DelaunayProfile,
    family: &FieldFamily<'_>,
    ball: PerturbationBallSpec,
    eps: &[f64],
) -> Result<ExpansionReport, GraphError> {
    let (ts, ths) = torus::sup_grid(profile);
    torus::check_eps(eps)?;
    let mut rep = ExpansionReport::new("graph_mean_curvature", 2.0 * ball.beta);
    for &e in eps {
        let patch = TorusPatch::with_epsilon(profile.clone(), e)?;
        let phi = family(e);
        ball.check(profile, &*phi, e)?;
        let margin = regularity_margin(&patch, &*phi, &ts, &ths)?;
        if margin <= 0.0 {
            return Err(GraphError::RegularityLoss { margin });
        }
        let (r, w) = grid_sup2(&ts, &ths, |t, th| -> Result<(f64, f64), GraphError> {
            let line = GraphLine::new(&patch, &*phi, t, th)?;
            let x2 = 2.0 * profile.x(t).powi(2);
            let lin = x2 * first_variation_fd(&patch, &*phi, t, th)?;
            let rem = x2 * (line.mean_curvature(1.0)? - line.mean_curvature(0.0)?) - lin;
            Ok((rem, rem / e.powf(2.0 * ball.beta)))
        })?;
        rep.samples.push(ExpansionSample {
            epsilon: e,
            remainder_sup: r,
            weighted_sup: w,
        });
    }
    Ok(rep)
}

/// Smooth functions on the unit sphere, evaluated through their polynomial
/// extension to `ℝ³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereFunction {
    Const(f64),
    /// Coordinate `u_i`, `i ∈ {1, 2, 3}`.
    Coord(usize),
    /// `u₁u₂`.
    Harmonic,
    /// `(3u₃² - 1)/2`.
    Zonal,
}

impl SphereFunction {
    /// Parses `const`, `const:<value>`, `coord1`..`coord3`, `harmonic`, `zonal`.
    pub fn parse(s: &str) -> Result<Self, GraphError> {
        let bad = || GraphError::InvalidField(s.to_string());
        match s {
            "const" => Ok(Self::Const(1.0)),
            "harmonic" => Ok(Self::Harmonic),
            "zonal" => Ok(Self::Zonal),
            "coord1" => Ok(Self::Coord(1)),
            "coord2" => Ok(Self::Coord(2)),
            "coord3" => Ok(Self::Coord(3)),
            _ => match s.strip_prefix("const:") {
                Some(v) => v.parse().map(Self::Const).map_err(|_| bad()),
                None => Err(bad()),
            },
        }
    }

    pub fn value(&self, u: &V3) -> f64 {
        match *self {
            Self::Const(c) => c,
            Self::Coord(i) => u[i - 1],
            Self::Harmonic => u[0] * u[1],
            Self::Zonal => 1.5 * u[2] * u[2] - 0.5,
        }
    }

    /// Ambient gradient of the polynomial extension.
    pub fn gradient(&self, u: &V3) -> V3 {
        match *self {
            Self::Const(_) => V3::zeros(),
            Self::Coord(i) => {
                let mut g = V3::zeros();
                g[i - 1] = 1.0;
                g
            }
            Self::Harmonic => V3::new(u[1], u[0], 0.0),
            Self::Zonal => V3::new(0.0, 0.0, 3.0 * u[2]),
        }
    }
}

/// `H(X) = 1 + A(X/|X|)/|X|^β + H₁(X/|X|)/|X|^{β+ν}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrescribedCurvature {
    pub a: SphereFunction,
    pub remainder: SphereFunction,
    pub beta: f64,
    pub nu: f64,
}

impl PrescribedCurvature {
    pub fn new(a: SphereFunction, beta: f64, nu: f64) -> Result<Self, GraphError> {
        if !(beta > 0.0 && nu > 0.0) {
            return Err(GraphError::InvalidField(format!("beta = {beta}, nu = {nu}")));
        }
        if let SphereFunction::Coord(i) = a {
            if !(1..=3).contains(&i) {
                return Err(GraphError::InvalidField(format!("coord{i}")));
            }
        }
        Ok(Self {
            a,
            remainder: SphereFunction::Const(0.0),
            beta,
            nu,
        })
    }

    pub fn with_remainder(mut self, h1: SphereFunction) -> Self {
        self.remainder = h1;
        self
    }

    /// `ν̃ = min(1, ν)`.
    pub fn nu_tilde(&self) -> f64 {
        self.nu.min(1.0)
    }

    pub fn value(&self, x: &V3) -> f64 {
        let r = x.norm();
        let u = x / r;
        1.0 + self.a.value(&u) / r.powf(self.beta) + self.remainder.value(&u) / r.powf(self.beta + self.nu)
    }

    pub fn gradient(&self, x: &V3) -> V3 {
        let r = x.norm();
        let u = x / r;
        // ∇[f(X/r) r^{-p}] = r^{-p-1} [(I - uuᵀ)∇f - p f u]
        let term = |f: &SphereFunction, p: f64| {
            let gf = f.gradient(&u);
            (gf - u * u.dot(&gf) - u * (p * f.value(&u))) / r.powf(p + 1.0)
        };
        term(&self.a, self.beta) + term(&self.remainder, self.beta + self.nu)
    }
}

/// Remainders of the prescribed curvature along the perturbed torus:
/// `2x²H(X+φN) - 2x² - 2x²ε^β A(X̂)` (order `β + ν̃`), and the normal
/// gradient term `2x²(∇H·N)φ` (order `2β + 1`).
pub fn prescribed_expansion(
    profile: &DelaunayProfile,
    field: &PrescribedCurvature,
    family: &FieldFamily<'_>,
    ball: PerturbationBallSpec,
    eps: &[f64],
) -> Result<(ExpansionReport, ExpansionReport), GraphError> {
    let (ts, ths) = torus::sup_grid(profile);
    torus::check_eps(eps)?;
    let mut main = ExpansionReport::new("prescribed_curvature", field.beta + field.nu_tilde());
    let mut grad = ExpansionReport::new("prescribed_normal_gradient", 2.0 * field.beta + 1.0);
    for &e in eps {
        let patch = TorusPatch::with_epsilon(profile.clone(), e)?;
        let phi = family(e);
        ball.check(profile, &*phi, e)?;
        let main_order = field.beta + field.nu_tilde();
        let [r1, w1, r2, w2] = grid_sup_array(&ts, &ths, |t, th| -> Result<[f64; 4], GraphError> {
            let jet = patch.jet(t, th);
            let nrm = surface::fundamental_forms(&patch, t, th)?.normal;
            let v = phi.jet(t, th).v;
            let x2 = 2.0 * profile.x(t).powi(2);
            let unit = jet.x / jet.x.norm();
            let rem = x2 * field.value(&(jet.x + v * nrm)) - x2 - x2 * e.powf(field.beta) * field.a.value(&unit);
            let g = x2 * field.gradient(&jet.x).dot(&nrm) * v;
            Ok([rem, rem / e.powf(main_order), g, g / e.powf(2.0 * field.beta + 1.0)])
        })?;
        main.samples.push(ExpansionSample {
            epsilon: e,
            remainder_sup: r1,
            weighted_sup: w1,
        });
        grad.samples.push(ExpansionSample {
            epsilon: e,
            remainder_sup: r2,
            weighted_sup: w2,
        });
    }
    Ok((main, grad))
}

/// One closed-form versus finite-difference comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationCase {
    pub patch: String,
    pub t: f64,
    pub theta: f64,
    pub first: f64,
    pub first_fd: f64,
    pub second: f64,
    pub second_fd: f64,
}

impl VariationCase {
    pub fn first_error(&self) -> f64 {
        (self.first - self.first_fd).abs() / self.first_fd.abs().max(1.0)
    }

    pub fn second_error(&self) -> f64 {
        (self.second - self.second_fd).abs() / self.second_fd.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariationReport {
    pub cases: Vec<VariationCase>,
}

impl VariationReport {
    pub fn max_first_error(&self) -> f64 {
        self.cases.iter().map(VariationCase::first_error).fold(0.0, f64::max)
    }

    pub fn max_second_error(&self) -> f64 {
        self.cases.iter().map(VariationCase::second_error).fold(0.0, f64::max)
    }
}

type Radial = Box<dyn Fn(f64) -> Jet + Sync>;

fn random_field(rng: &mut ChaCha8Rng) -> Scaled<SeparableField<Radial>> {
    let radial: Radial = match rng.gen_range(0..4) {
        0 => Box::new(radial::sech),
        1 => Box::new(radial::sech_sq),
        2 => Box::new(radial::gaussian),
        _ => Box::new(radial::sine(rng.gen_range(0.5..2.0), rng.gen_range(0.0..PI))),
    };
    let j = rng.gen_range(1..4);
    let angular = match rng.gen_range(0..3) {
        0 => Angular::One,
        1 => Angular::Cos(j),
        _ => Angular::Sin(j),
    };
    Scaled {
        inner: SeparableField::new(radial, angular),
        factor: rng.gen_range(0.5..2.0),
    }
}

/// Closed-form variations against finite differences in `s` on `count`
/// seeded random (patch, φ, point) triples. Patches cycle through the unit
/// sphere, Delaunay cylinders with `a ∈ {-0.4, -0.1, 0.2}` and tori at
/// `a = -0.1`, `ε ∈ {1e-2, 1e-3}`; each `φ` is a sum of two random separable
/// fields.
pub fn variation_validation(seed: u64, count: usize) -> Result<VariationReport, GraphError> {
    let mut patches: Vec<(String, Box<dyn SurfacePatch>)> = vec![("sphere".into(), Box::new(SpherePatch))];
    for a in [-0.4, -0.1, 0.2] {
        patches.push((format!("cylinder a={a}"), Box::new(CylinderPatch::new(make_profile(a)?))));
    }
    for e in [1e-2, 1e-3] {
        patches.push((
            format!("torus a=-0.1 eps={e}"),
            Box::new(TorusPatch::with_epsilon(make_profile(-0.1)?, e)?),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VariationReport::default();
    for i in 0..count {
        let (name, patch) = &patches[i % patches.len()];
        let phi = Sum(random_field(&mut rng), random_field(&mut rng));
        let t = rng.gen_range(-1.5..1.5);
        let theta = rng.gen_range(-PI..PI);
        report.cases.push(VariationCase {
            patch: name.clone(),
            t,
            theta,
            first: first_variation(patch.as_ref(), &phi, t, theta)?,
            first_fd: first_variation_fd(patch.as_ref(), &phi, t, theta)?,
            second: second_variation(patch.as_ref(), &phi, t, theta)?,
            second_fd: second_variation_fd(patch.as_ref(), &phi, t, theta)?,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{mean_curvature, RoundCylinderPatch};

    const EPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

    fn sin_theta() -> SeparableField<fn(f64) -> Jet> {
        SeparableField::new(radial::one as fn(f64) -> Jet, Angular::Sin(1))
    }

    #[test]
    fn separable_jets_match_differences() {
        let phi = SeparableField::new(radial::sine(1.3, 0.4), Angular::Cos(2));
        let h = 1e-5;
        let (t, th) = (0.3, 0.9);
        let f = phi.jet(t, th);
        let d = |a: FieldJet, b: FieldJet| (a.add(b.scale(-1.0))).scale(0.5 / h);
        let dt = d(phi.jet(t + h, th), phi.jet(t - h, th));
        let dth = d(phi.jet(t, th + h), phi.jet(t, th - h));
        assert!((dt.v - f.t).abs() < 1e-6 && (dt.t - f.tt).abs() < 1e-6);
        assert!((dth.v - f.th).abs() < 1e-6 && (dth.t - f.tth).abs() < 1e-6 && (dth.th - f.thth).abs() < 1e-6);
        for r in [radial::sech, radial::sech_sq, radial::gaussian] {
            let j = r(0.7);
            assert!(((r(0.7 + h).v - r(0.7 - h).v) / (2.0 * h) - j.d1).abs() < 1e-8);
            assert!(((r(0.7 + h).d1 - r(0.7 - h).d1) / (2.0 * h) - j.d2).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_field_is_base() {
        let base = CylinderPatch::new(make_profile(-0.1).unwrap());
        let g = graph_patch(&base, ConstantField(0.0));
        for (t, th) in [(0.1, 0.2), (-1.0, 2.0)] {
            let (a, b) = (g.jet(t, th), base.jet(t, th));
            assert!((a.x - b.x).amax() < 1e-15 && (a.tt - b.tt).amax() < 1e-15 && (a.thth - b.thth).amax() < 1e-15);
        }
    }

    #[test]
    fn concentric_spheres() {
        for s in [0.1, -0.3] {
            let g = graph_patch(SpherePatch, ConstantField(s));
            let h = mean_curvature(&g, 0.4, 1.1).unwrap();
            assert!((h - 1.0 / (1.0 - s)).abs() < 1e-8);
        }
        assert!((first_variation(&SpherePatch, &ConstantField(1.0), 0.3, 0.2).unwrap() - 1.0).abs() < 1e-9);
        assert!((second_variation(&SpherePatch, &ConstantField(1.0), 0.3, 0.2).unwrap() - 2.0).abs() < 1e-8);
        assert_eq!(second_variation(&SpherePatch, &ConstantField(0.0), 0.3, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn round_cylinder_normal_area() {
        let base = CylinderPatch::new(make_profile(-0.5).unwrap());
        for c in [0.1, 0.3, 0.7] {
            let (direct, identity) = normal_area_factor(&base, &ConstantField(c), 0.2, 0.5).unwrap();
            assert!((direct - (1.0 - 2.0 * c)).abs() < 1e-13);
            assert!((identity - (1.0 - 2.0 * c)).abs() < 1e-13);
        }
    }

    #[test]
    fn normal_area_identity_without_smallness() {
        let prof = make_profile(-0.1).unwrap();
        let torus = TorusPatch::with_epsilon(prof.clone(), 0.02).unwrap();
        let cyl = CylinderPatch::new(prof);
        let big = Scaled {
            inner: SeparableField::new(radial::sine(0.8, 0.3), Angular::Cos(2)),
            factor: 3.0,
        };
        for i in 0..40 {
            let (t, th) = (-2.0 + 0.1 * i as f64, -3.0 + 0.15 * i as f64);
            for base in [&torus as &dyn SurfacePatch, &cyl] {
                let (d, id) = normal_area_factor(base, &big, t, th).unwrap();
                assert!((d - id).abs() < 1e-9 * d.abs().max(1.0), "{d} {id}");
            }
        }
    }

    #[test]
    fn cylinder_kernel_has_no_first_variation() {
        let base = CylinderPatch::new(make_profile(-0.5).unwrap());
        let phi = SeparableField::new(radial::one as fn(f64) -> Jet, Angular::Cos(1));
        assert!(first_variation(&base, &phi, 0.3, 0.8).unwrap().abs() < 1e-12);
        let fd = second_variation_fd(&base, &phi, 0.0, PI / 3.0).unwrap();
        let closed = second_variation(&base, &phi, 0.0, PI / 3.0).unwrap();
        assert!((fd - closed).abs() < 1e-5 * fd.abs().max(1.0));
    }

    #[test]
    fn torus_first_variation_matches_fd() {
        let patch = TorusPatch::with_epsilon(make_profile(-0.1).unwrap(), 1e-2).unwrap();
        let phi = SeparableField::new(radial::sech, Angular::Sin(1));
        for (t, th) in [(0.0, 0.5), (1.2, -2.0), (-2.5, 3.0)] {
            let a = first_variation(&patch, &phi, t, th).unwrap();
            let b = first_variation_fd(&patch, &phi, t, th).unwrap();
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0));
        }
    }

    #[test]
    fn randomized_variations() {
        let rep = variation_validation(7, 50).unwrap();
        assert_eq!(rep.cases.len(), 50);
        assert!(rep.max_first_error() < 1e-6, "{}", rep.max_first_error());
        assert!(rep.max_second_error() < 1e-5, "{}", rep.max_second_error());
    }

    #[test]
    fn non_orthogonal_rejected() {
        let g = graph_patch(
            RoundCylinderPatch { radius: 1.0 },
            SeparableField::new(radial::gaussian, Angular::Cos(1)),
        );
        assert_eq!(
            first_variation(&g, &ConstantField(1.0), 0.0, 0.0),
            Err(GraphError::NotOrthogonal)
        );
    }

    #[test]
    fn second_variation_polarization() {
        let base = TorusPatch::with_epsilon(make_profile(0.2).unwrap(), 1e-2).unwrap();
        let phi = SeparableField::new(radial::sech, Angular::Cos(2));
        let psi = SeparableField::new(radial::sine(0.7, 0.2), Angular::Sin(1));
        for (t, th) in [(0.3, 0.4), (-1.0, 2.2)] {
            let q = |f: &dyn NormalPerturbation| second_variation(&base, f, t, th).unwrap();
            let lhs = q(&Sum(&phi, &psi)) - q(&phi) - q(&psi);
            let m = |s: f64, u: f64| {
                let f = Sum(Scaled { inner: &phi, factor: s }, Scaled { inner: &psi, factor: u });
                graph_mean_curvature(&base, &f, 1.0, t, th).unwrap()
            };
            let h = 1e-4;
            let mixed = (m(h, h) - m(h, -h) - m(-h, h) + m(-h, -h)) / (4.0 * h * h);
            assert!((lhs - 2.0 * mixed).abs() < 1e-4, "{lhs} {mixed}");
        }
    }

    #[test]
    fn leading_form_is_cylinder_second_variation() {
        for a in [-0.3, 0.2] {
            let prof = make_profile(a).unwrap();
            let cyl = CylinderPatch::new(prof.clone());
            let phi = Sum(
                SeparableField::new(radial::sech, Angular::Cos(1)),
                SeparableField::new(radial::sine(1.1, 0.5), Angular::Sin(2)),
            );
            for i in 0..20 {
                let (t, th) = (-2.0 + 0.2 * i as f64, -3.0 + 0.3 * i as f64);
                let c = second_variation(&cyl, &phi, t, th).unwrap();
                let l = second_variation_leading(&prof, &phi, t, th);
                assert!((c - l).abs() < 1e-9 * c.abs().max(1.0), "{c} {l}");
            }
        }
    }

    #[test]
    fn torus_second_variation_limits() {
        let half = make_profile(-0.5).unwrap();
        assert!((second_variation_leading(&half, &ConstantField(1.0), 0.3, 0.1) - 8.0).abs() < 1e-12);
        let torus = TorusPatch::with_epsilon(half.clone(), 1e-3).unwrap();
        let fd = second_variation_fd(&torus, &ConstantField(1.0), 0.3, 0.1).unwrap();
        assert!((fd - 8.0).abs() < 2e-2, "{fd}");
        let small = make_profile(-1e-3).unwrap();
        let v = second_variation_leading(&small, &ConstantField(1.0), 0.0, 0.0);
        assert!((v - 2.0).abs() < 1e-2, "{v}");
    }

    #[test]
    fn torus_second_variation_first_order() {
        let prof = make_profile(-0.1).unwrap();
        let rep = torus_second_variation_expansion(&prof, &sin_theta(), &EPS).unwrap();
        for r in rep.ratios() {
            assert!((1.7..=2.3).contains(&r), "{rep:?}");
        }
        assert!(rep.weighted_sup().is_finite());
    }

    fn graph_family<'p>(r: f64, prof: &'p DelaunayProfile) -> impl Fn(f64) -> Box<dyn NormalPerturbation + 'p> + Sync + 'p {
        move |e: f64| -> Box<dyn NormalPerturbation + 'p> {
            Box::new(FnField(move |t: f64, th: f64| {
                let p = prof.eval(t);
                let (s, c) = th.sin_cos();
                FieldJet {
                    v: p.x * s,
                    t: p.dx * s,
                    th: p.x * c,
                    tt: p.ddx * s,
                    tth: p.dx * c,
                    thth: -p.x * s,
                }
                .scale(r * e)
            }))
        }
    }

    #[test]
    fn graph_remainder_is_quadratic() {
        let prof = make_profile(-0.1).unwrap();
        let ball = PerturbationBallSpec { radius: 2.0, beta: 1.0 };
        let fam = graph_family(0.5, &prof);
        let rep = graph_expansion(&prof, &fam, ball, &EPS).unwrap();
        assert!(rep.ratios_within(0.2), "{rep:?}");
        assert!(rep.weighted_growth() <= 1.5, "{rep:?}");
        let zero = |_e: f64| -> Box<dyn NormalPerturbation> { Box::new(ConstantField(0.0)) };
        let rep = graph_expansion(&prof, &zero, ball, &EPS[..1]).unwrap();
        assert_eq!(rep.samples[0].remainder_sup, 0.0);
    }

    #[test]
    fn ball_and_regularity_violations() {
        let prof = make_profile(-0.1).unwrap();
        let tight = PerturbationBallSpec { radius: 0.5, beta: 1.0 };
        let fam = graph_family(0.5, &prof);
        assert!(matches!(
            graph_expansion(&prof, &fam, tight, &EPS[..1]),
            Err(GraphError::BallViolation { .. })
        ));
        let torus = TorusPatch::with_epsilon(prof.clone(), 1e-2).unwrap();
        let (ts, ths) = torus::sup_grid(&prof);
        let fat = |c: f64| {
            let p = &prof;
            FnField(move |t: f64, _th: f64| FieldJet {
                v: c * p.x(t),
                ..FieldJet::default()
            })
        };
        assert!(regularity_margin(&torus, &fat(1.1), &ts, &ths).unwrap() <= 0.0);
        assert!(regularity_margin(&torus, &fat(0.6), &ts, &ths).unwrap() > 0.0);
    }

    #[test]
    fn prescribed_field_values() {
        let h = PrescribedCurvature::new(SphereFunction::Const(1.0), 1.0, 1.0).unwrap();
        assert!((h.value(&V3::new(2.0, 0.0, 0.0)) - 1.5).abs() < 1e-15);
        assert!(PrescribedCurvature::new(SphereFunction::Coord(4), 1.0, 1.0).is_err());
        assert!(PrescribedCurvature::new(SphereFunction::Const(1.0), 0.0, 1.0).is_err());
        assert_eq!(SphereFunction::parse("coord2").unwrap(), SphereFunction::Coord(2));
        assert_eq!(SphereFunction::parse("const:0.37").unwrap(), SphereFunction::Const(0.37));
        assert!(SphereFunction::parse("bogus").is_err());
        let f = PrescribedCurvature::new(SphereFunction::Harmonic, 0.7, 0.5)
            .unwrap()
            .with_remainder(SphereFunction::Zonal);
        let x = V3::new(3.0, -11.0, 5.0);
        let g = f.gradient(&x);
        let dh = 1e-5;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += dh;
            xm[i] -= dh;
            assert!(((f.value(&xp) - f.value(&xm)) / (2.0 * dh) - g[i]).abs() < 1e-9);
        }
        let mut worst: f64 = 0.0;
        for k in 0..200 {
            let r = 10.0 * 1.05_f64.powi(k);
            let u = V3::new((k as f64).cos(), (k as f64).sin(), 0.3).normalize();
            worst = worst.max(r.powf(f.beta + 1.0) * f.gradient(&(u * r)).norm());
        }
        assert!(worst < 5.0, "{worst}");
    }

    #[test]
    fn prescribed_expansion_orders() {
        let prof = make_profile(-0.1).unwrap();
        let ball = PerturbationBallSpec { radius: 2.0, beta: 1.0 };
        let zero = |_e: f64| -> Box<dyn NormalPerturbation> { Box::new(ConstantField(0.0)) };
        let h = PrescribedCurvature::new(SphereFunction::Const(1.0), 1.0, 1.0).unwrap();
        let (main, grad) = prescribed_expansion(&prof, &h, &zero, ball, &EPS).unwrap();
        assert!(main.ratios_within(0.2), "{main:?}");
        assert_eq!(grad.samples[0].remainder_sup, 0.0);

        let fam = graph_family(0.5, &prof);
        let h = PrescribedCurvature::new(SphereFunction::Coord(2), 1.0, 2.0)
            .unwrap()
            .with_remainder(SphereFunction::Const(1.0));
        let (main, grad) = prescribed_expansion(&prof, &h, &fam, ball, &EPS).unwrap();
        assert!(main.ratios_within(0.2), "{main:?}");
        assert!(grad.ratios_within(0.2), "{grad:?}");
    }

    #[test]
    fn projection_tends_to_e2() {
        let prof = make_profile(-0.1).unwrap();
        let patch = TorusPatch::with_epsilon(prof.clone(), 1e-3).unwrap();
        let a = SphereFunction::Coord(2);
        let (ts, ths) = torus::sup_grid(&prof);
        for &t in ts.iter().step_by(20) {
            for &th in ths.iter().step_by(8) {
                let x = patch.jet(t, th).x;
                assert!((a.value(&(x / x.norm())) - 1.0).abs() < 1e-3);
            }
        }
    }
}
