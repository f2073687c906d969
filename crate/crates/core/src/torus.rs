//! Delaunay tori: a Delaunay cylinder bent around a circle of radius `1/ε`,
//! `X_{ε,a} = R_{εz_a}(x_a cosθ, ε⁻¹ + x_a sinθ, 0)` with `R_σ` the rotation
//! by `σ` about the first axis.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use thiserror::Error;

use crate::graph::{self, NormalPerturbation};
use crate::profile::DelaunayProfile;
use crate::report::{angle_grid, grid_sup2, linspace, ExpansionReport, ExpansionSample};
use crate::surface::{self, PatchJet, SurfaceError, SurfacePatch, ThirdOrder, V3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("ε = {0} must lie in (0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("expansion checks need ε in (0, 0.05], got {0}")]
    EpsilonTooLarge(f64),
    #[error("lobe count must be positive")]
    NoLobes,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Largest `ε` accepted by the expansion checks.
pub const MAX_EPSILON: f64 = 0.05;

/// Rotation by `σ` about the first coordinate axis.
pub fn rotation(sigma: f64) -> Matrix3<f64> {
    let (s, c) = sigma.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// `k`-th derivative of `R_σ` in `σ` (`k = 1` is `Q_σ`).
pub fn rotation_derivative(sigma: f64, k: u32) -> Matrix3<f64> {
    if k == 0 {
        return rotation(sigma);
    }
    let (s, c) = sigma.sin_cos();
    let (a, b) = match k % 4 {
        1 => (-s, -c),
        2 => (-c, s),
        3 => (s, c),
        _ => (c, -s),
    };
    // Rows (a, b) and (-b, a) of the lower block.
    Matrix3::new(0.0, 0.0, 0.0, 0.0, a, b, 0.0, -b, a)
}

#[derive(Debug, Clone)]
pub struct TorusParam {
    epsilon: f64,
    lobes: Option<u32>,
}

impl TorusParam {
    pub fn with_epsilon(epsilon: f64) -> Result<Self, TorusError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(TorusError::EpsilonOutOfRange(epsilon));
        }
        Ok(Self { epsilon, lobes: None })
    }

    /// Closing condition `ε = π/(n h_a)`.
    pub fn with_lobes(profile: &DelaunayProfile, n: u32) -> Result<Self, TorusError> {
        if n == 0 {
            return Err(TorusError::NoLobes);
        }
        let epsilon = PI / (n as f64 * profile.h());
        let mut p = Self::with_epsilon(epsilon)?;
        p.lobes = Some(n);
        Ok(p)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lobes(&self) -> Option<u32> {
        self.lobes
    }
}

/// The bent Delaunay cylinder; orthogonal but not conformal.
#[derive(Debug, Clone)]
pub struct TorusPatch {
    profile: DelaunayProfile,
    param: TorusParam,
}

impl TorusPatch {
    pub fn new(profile: DelaunayProfile, param: TorusParam) -> Self {
        Self { profile, param }
    }

    pub fn with_epsilon(profile: DelaunayProfile, epsilon: f64) -> Result<Self, TorusError> {
        Ok(Self::new(profile, TorusParam::with_epsilon(epsilon)?))
    }

    pub fn with_lobes(profile: DelaunayProfile, n: u32) -> Result<Self, TorusError> {
        let param = TorusParam::with_lobes(&profile, n)?;
        Ok(Self::new(profile, param))
    }

    pub fn profile(&self) -> &DelaunayProfile {
        &self.profile
    }

    pub fn epsilon(&self) -> f64 {
        self.param.epsilon
    }

    pub fn param(&self) -> &TorusParam {
        &self.param
    }
}

impl SurfacePatch for TorusPatch {
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        let e = self.param.epsilon;
        let p = self.profile.eval(t);
        let (s, c) = theta.sin_cos();
        let sigma = e * p.z;
        let (s1, s2, s3) = (e * p.dz, e * p.ddz, e * p.dddz);
        let r0 = rotation(sigma);
        let (r1, r2, r3) = (
            rotation_derivative(sigma, 1),
            rotation_derivative(sigma, 2),
            rotation_derivative(sigma, 3),
        );
        // t-derivatives of R(σ(t)).
        let d1 = r1 * s1;
        let d2 = r2 * (s1 * s1) + r1 * s2;
        let d3 = r3 * (s1 * s1 * s1) + r2 * (3.0 * s1 * s2) + r1 * s3;

        let v = |a: f64, b: f64| V3::new(a, b, 0.0);
        let u = v(p.x * c, 1.0 / e + p.x * s);
        let u_t = v(p.dx * c, p.dx * s);
        let u_tt = v(p.ddx * c, p.ddx * s);
        let u_ttt = v(p.dddx * c, p.dddx * s);
        let u_th = v(-p.x * s, p.x * c);
        let u_tth = v(-p.dx * s, p.dx * c);
        let u_ttth = v(-p.ddx * s, p.ddx * c);
        let u_thth = v(-p.x * c, -p.x * s);
        let u_tthth = v(-p.dx * c, -p.dx * s);
        let u_ththth = v(p.x * s, -p.x * c);

        PatchJet {
            x: r0 * u,
            t: d1 * u + r0 * u_t,
            th: r0 * u_th,
            tt: d2 * u + 2.0 * d1 * u_t + r0 * u_tt,
            tth: d1 * u_th + r0 * u_tth,
            thth: r0 * u_thth,
            third: Some(ThirdOrder {
                ttt: d3 * u + 3.0 * d2 * u_t + 3.0 * d1 * u_tt + r0 * u_ttt,
                ttth: d2 * u_th + 2.0 * d1 * u_tth + r0 * u_ttth,
                tthth: d1 * u_thth + r0 * u_tthth,
                ththth: r0 * u_ththth,
            }),
        }
    }

    fn is_orthogonal(&self) -> bool {
        true
    }
}

/// First-order coefficient of the torus mean curvature,
/// `g_a = 2x³ + 2z'x - 4z'²x - z'³/x - 2γz'²/x`.
pub fn g_coefficient(profile: &DelaunayProfile, t: f64) -> f64 {
    let x = profile.x(t);
    let dz = profile.dz(t);
    let g = profile.gamma();
    2.0 * x.powi(3) + 2.0 * dz * x - 4.0 * dz * dz * x - dz.powi(3) / x - 2.0 * g * dz * dz / x
}

/// Limit of `g_a` as `a → 0`: `4 sech³t - 5 sech⁵t`.
pub fn g_limit(t: f64) -> f64 {
    let s = 1.0 / t.cosh();
    4.0 * s.powi(3) - 5.0 * s.powi(5)
}

pub const GRID_T: usize = 201;
pub const GRID_THETA: usize = 64;

/// The `(t, θ)` sup-norm grid over `[-τ, τ] × [-π, π)`.
pub fn sup_grid(profile: &DelaunayProfile) -> (Vec<f64>, Vec<f64>) {
    let tau = profile.tau();
    (linspace(-tau, tau, GRID_T), angle_grid(GRID_THETA))
}

pub fn check_eps(eps: &[f64]) -> Result<(), TorusError> {
    for &e in eps {
        if !(e > 0.0 && e <= MAX_EPSILON) {
            return Err(TorusError::EpsilonTooLarge(e));
        }
    }
    Ok(())
}

/// Remainder of `2x²𝔐(X_{ε,a}) = 2x² + ε g_a sinθ + ε²σ` along `eps`; the
/// weighted column is `sup |x⁻² σ|`.
pub fn mean_curvature_expansion(profile: &DelaunayProfile, eps: &[f64]) -> Result<ExpansionReport, TorusError> {
    check_eps(eps)?;
    let (ts, ths) = sup_grid(profile);
    let mut rep = ExpansionReport::new("mean_curvature", 2.0);
    for &e in eps {
        let patch = TorusPatch::with_epsilon(profile.clone(), e)?;
        let (r, w) = grid_sup2(&ts, &ths, |t, th| -> Result<(f64, f64), TorusError> {
            let x = profile.x(t);
            let h = surface::mean_curvature(&patch, t, th)?;
            let rem = 2.0 * x * x * h - 2.0 * x * x - e * g_coefficient(profile, t) * th.sin();
            Ok((rem, rem / (e * e * x * x)))
        })?;
        rep.samples.push(ExpansionSample {
            epsilon: e,
            remainder_sup: r,
            weighted_sup: w,
        });
    }
    Ok(rep)
}

/// Expansion of one scalar torus quantity: value, predicted value through the
/// stated order, and the weight applied to `remainder / ε^order`.
type Quantity = fn(&Pointwise) -> (f64, f64, f64);

/// Everything the pointwise expansion checks consume at one `(t, θ)`.
pub struct Pointwise {
    pub eps: f64,
    pub x: f64,
    pub dx: f64,
    pub dz: f64,
    pub gamma: f64,
    pub sin: f64,
    pub cos: f64,
    pub jet: PatchJet,
    pub forms: surface::FundamentalForms,
    pub normal: surface::NormalJet,
}

fn pointwise(patch: &TorusPatch, t: f64, theta: f64) -> Result<Pointwise, TorusError> {
    let p = patch.profile.eval(t);
    let jet = patch.jet(t, theta);
    let forms = surface::forms_from_jet(&jet, t, theta)?;
    let normal = surface::normal_jet(patch, t, theta)?;
    let (sin, cos) = theta.sin_cos();
    Ok(Pointwise {
        eps: patch.epsilon(),
        x: p.x,
        dx: p.dx,
        dz: p.dz,
        gamma: patch.profile.gamma(),
        sin,
        cos,
        jet,
        forms,
        normal,
    })
}

fn run_quantities(
    profile: &DelaunayProfile,
    eps: &[f64],
    items: &[(&str, f64, Quantity)],
) -> Result<Vec<ExpansionReport>, TorusError> {
    check_eps(eps)?;
    let (ts, ths) = sup_grid(profile);
    let mut reports: Vec<ExpansionReport> = items
        .iter()
        .map(|(name, order, _)| ExpansionReport::new(*name, *order))
        .collect();
    for &e in eps {
        let patch = TorusPatch::with_epsilon(profile.clone(), e)?;
        for (rep, (_, order, q)) in reports.iter_mut().zip(items) {
            let (r, w) = grid_sup2(&ts, &ths, |t, th| -> Result<(f64, f64), TorusError> {
                let pw = pointwise(&patch, t, th)?;
                let (value, predicted, weight) = q(&pw);
                let rem = value - predicted;
                Ok((rem, weight * rem / e.powf(*order)))
            })?;
            rep.samples.push(ExpansionSample {
                epsilon: e,
                remainder_sup: r,
                weighted_sup: w,
            });
        }
    }
    Ok(reports)
}

/// Second fundamental form coefficients through first order in `ε`;
/// remainders are `O(ε²)`, weighted by `x⁻²`.
pub fn second_form_expansion(profile: &DelaunayProfile, eps: &[f64]) -> Result<Vec<ExpansionReport>, TorusError> {
    let items: [(&str, f64, Quantity); 3] = [
        ("second_form_tt", 2.0, |p| {
            let lead = p.x * p.x + p.gamma;
            let first = 2.0 * p.x.powi(3) + p.x * p.dz - 2.0 * p.dz * p.dz * p.x;
            (p.forms.l, lead + p.eps * first * p.sin, 1.0 / (p.x * p.x))
        }),
        ("second_form_thth", 2.0, |p| {
            let first = p.x * p.dz - p.dz.powi(3) / p.x;
            (p.forms.n, p.dz + p.eps * first * p.sin, 1.0 / (p.x * p.x))
        }),
        ("second_form_tth", 2.0, |p| {
            (p.forms.m, p.eps * p.dx * p.dz * p.cos, 1.0 / (p.x * p.x))
        }),
    ];
    run_quantities(profile, eps, &items)
}

/// Normal-derivative quantities: the two squared norms through first order
/// (remainder `O(ε²)`), the mixed products at leading order (`O(ε)`).
pub fn normal_derivative_expansion(profile: &DelaunayProfile, eps: &[f64]) -> Result<Vec<ExpansionReport>, TorusError> {
    let items: [(&str, f64, Quantity); 7] = [
        ("normal_t_sq", 2.0, |p| {
            let b = p.x + p.gamma / p.x;
            let first = 2.0 * b * (2.0 * p.dx * p.dx - 2.0 * p.dz * p.dz + p.dz.powi(3) / (p.x * p.x) + p.dz);
            (p.normal.t.norm_squared(), b * b + p.eps * first * p.sin, 1.0)
        }),
        ("normal_th_sq", 2.0, |p| {
            let b = p.x - p.gamma / p.x;
            let first = 2.0 * p.dz * p.dz * p.dx * p.dx / p.x.powi(3);
            (p.normal.th.norm_squared(), b * b + p.eps * first * p.sin, 1.0)
        }),
        ("normal_t_dot_normal_th", 1.0, |p| (p.normal.t.dot(&p.normal.th), 0.0, 1.0)),
        ("normal_tt_dot_x_t", 1.0, |p| {
            (p.normal.tt.dot(&p.jet.t), -p.dx * p.dz / p.x, 1.0)
        }),
        ("normal_tt_dot_x_th", 1.0, |p| (p.normal.tt.dot(&p.jet.th), 0.0, 1.0)),
        ("normal_thth_dot_x_t", 1.0, |p| {
            (p.normal.thth.dot(&p.jet.t), p.dx * p.dz / p.x, 1.0)
        }),
        ("normal_thth_dot_x_th", 1.0, |p| (p.normal.thth.dot(&p.jet.th), 0.0, 1.0)),
    ];
    run_quantities(profile, eps, &items)
}

/// First-order correction `ℒ⁽¹⁾φ` of the torus linearized operator.
pub fn first_order_operator(profile: &DelaunayProfile, phi: &dyn NormalPerturbation, t: f64, theta: f64) -> f64 {
    let p = profile.eval(t);
    let f = phi.jet(t, theta);
    let (x, dx, dz, g) = (p.x, p.dx, p.dz, profile.gamma());
    let (s, c) = theta.sin_cos();
    let b = x + g / x;
    let pot =
        2.0 * b * (2.0 * x * x + dz - dz.powi(3) / (x * x)) - 6.0 * b * b * dz * dz / x + 2.0 * dz * dz * dx * dx / x.powi(3);
    (-2.0 * dz * dz / x * s) * f.tt
        + ((dz * dz * dx / (x * x) - 4.0 * dz * dx) * s) * f.t
        + (dz * dz / x * c) * f.th
        + pot * s * f.v
}

/// Residual of `2x² d/ds 𝔐(X + sφN) = ℒ_aφ + εℒ⁽¹⁾φ + O(ε²)`, with the left
/// side by central differences in `s`. Weighted column: `sup |x⁻¹ rem/ε²|`.
pub fn linearized_expansion(
    profile: &DelaunayProfile,
    phi: &dyn NormalPerturbation,
    eps: &[f64],
) -> Result<ExpansionReport, TorusError> {
    check_eps(eps)?;
    let (ts, ths) = sup_grid(profile);
    let mut rep = ExpansionReport::new("linearized_operator", 2.0);
    for &e in eps {
        let patch = TorusPatch::with_epsilon(profile.clone(), e)?;
        let (r, w) = grid_sup2(&ts, &ths, |t, th| -> Result<(f64, f64), TorusError> {
            let x = profile.x(t);
            let lin = 2.0 * x * x * graph::first_variation_fd(&patch, phi, t, th)?;
            let f = phi.jet(t, th);
            let base = f.laplacian() + crate::cylinder::jacobi_potential(profile, t) * f.v;
            let rem = lin - base - e * first_order_operator(profile, phi, t, th);
            Ok((rem, rem / (x * e * e)))
        })?;
        rep.samples.push(ExpansionSample {
            epsilon: e,
            remainder_sup: r,
            weighted_sup: w,
        });
    }
    Ok(rep)
}
