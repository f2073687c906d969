//! Delaunay cylinders `X_a = (x_a cosθ, x_a sinθ, z_a)`, their Jacobi
//! operator and the kernel family that generates its bounded/linear-growth
//! solutions.

use thiserror::Error;

use crate::graph::{Angular, NormalPerturbation};
use crate::jet::Jet;
use crate::profile::{make_profile, DelaunayProfile, ProfileADerivatives, ProfileError};
use crate::report::{angle_grid, linspace};
use crate::surface::{revolution_jet, PatchJet, SurfacePatch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CylinderError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("singular-limit grid needs 0 < |a| < 0.05, got a = {0}")]
    OutsideLimitRange(f64),
}

/// The conformal patch of a Delaunay surface; its normal points toward the axis.
#[derive(Debug, Clone)]
pub struct CylinderPatch {
    profile: DelaunayProfile,
}

impl CylinderPatch {
    pub fn new(profile: DelaunayProfile) -> Self {
        Self { profile }
    }

    pub fn profile(&self) -> &DelaunayProfile {
        &self.profile
    }
}

impl SurfacePatch for CylinderPatch {
    fn jet(&self, t: f64, theta: f64) -> PatchJet {
        let p = self.profile.eval(t);
        revolution_jet([p.x, p.dx, p.ddx, p.dddx], [p.z, p.dz, p.ddz, p.dddz], theta)
    }

    fn is_orthogonal(&self) -> bool {
        true
    }
}

/// Jacobi operator value `ℒ_a φ` and the mean-curvature linearization `ℒ_a φ / (2x²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiValue {
    pub operator: f64,
    pub normalized: f64,
}

/// Jacobi potential `2(x² + γ²/x²)`.
pub fn jacobi_potential(profile: &DelaunayProfile, t: f64) -> f64 {
    let x = profile.x(t);
    let g = profile.gamma();
    2.0 * (x * x + g * g / (x * x))
}

/// `ℒ_a φ = Δφ + 2(x² + γ²/x²)φ` at `(t, θ)`.
pub fn jacobi_apply(profile: &DelaunayProfile, phi: &dyn NormalPerturbation, t: f64, theta: f64) -> JacobiValue {
    let f = phi.jet(t, theta);
    let x = profile.x(t);
    let op = f.laplacian() + jacobi_potential(profile, t) * f.v;
    JacobiValue {
        operator: op,
        normalized: op / (2.0 * x * x),
    }
}

/// Radial generators of the Jacobi kernel, with exact second `t`-derivatives.
///
/// `w0⁺ = -(z'/x) ∂_a x + (x'/x) ∂_a z` (change of neck size), `w0⁻ = x'/x`
/// (vertical translation), `w1⁺ = z'/x` (horizontal translations, paired
/// with `cosθ`, `sinθ`), `w1⁻ = x' + z z'/x` (rotations). Signs follow the
/// orientation of the inward normal used throughout the crate.
#[derive(Debug, Clone)]
pub struct JacobiKernelFamily {
    profile: DelaunayProfile,
    aderiv: ProfileADerivatives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelGenerator {
    W0Plus,
    W0Minus,
    W1Plus,
    W1Minus,
}

impl KernelGenerator {
    pub const ALL: [KernelGenerator; 4] = [Self::W0Plus, Self::W0Minus, Self::W1Plus, Self::W1Minus];

    pub fn name(&self) -> &'static str {
        match self {
            Self::W0Plus => "w0_plus",
            Self::W0Minus => "w0_minus",
            Self::W1Plus => "w1_plus",
            Self::W1Minus => "w1_minus",
        }
    }

    pub fn mode(&self) -> u32 {
        match self {
            Self::W0Plus | Self::W0Minus => 0,
            Self::W1Plus | Self::W1Minus => 1,
        }
    }
}

impl JacobiKernelFamily {
    /// Family for the profile, with `a`-derivative checkpoints up to `t_max`.
    pub fn new(profile: DelaunayProfile, t_max: f64) -> Result<Self, ProfileError> {
        let aderiv = profile.a_derivatives(t_max)?;
        Ok(Self { profile, aderiv })
    }

    pub fn profile(&self) -> &DelaunayProfile {
        &self.profile
    }

    pub fn radial(&self, which: KernelGenerator, t: f64) -> Result<Jet, ProfileError> {
        let p = self.profile.eval(t);
        let (x, dx, z, dz) = (p.x_jet(), p.dx_jet(), p.z_jet(), p.dz_jet());
        Ok(match which {
            KernelGenerator::W0Plus => {
                let d = self.aderiv.eval(t)?;
                -(dz / x) * d.u_jet() + (dx / x) * d.v_jet()
            }
            KernelGenerator::W0Minus => dx / x,
            KernelGenerator::W1Plus => dz / x,
            KernelGenerator::W1Minus => dx + z * dz / x,
        })
    }
}

/// Sup residual of one kernel generator times an angular factor.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelResidual {
    pub name: String,
    pub sup_residual: f64,
    /// The generator vanishes identically on the grid (round cylinder).
    pub degenerate: bool,
}

pub const KERNEL_T_POINTS: usize = 401;
pub const KERNEL_THETA_POINTS: usize = 64;

/// `sup |ℒ_a w|` over `[-2τ, 2τ] × [-π, π]` for the six generators
/// `w0±`, `w1± cosθ`, `w1± sinθ`.
pub fn kernel_residuals(profile: &DelaunayProfile) -> Result<Vec<KernelResidual>, ProfileError> {
    let tau = profile.tau();
    let fam = JacobiKernelFamily::new(profile.clone(), 2.0 * tau)?;
    let ts = linspace(-2.0 * tau, 2.0 * tau, KERNEL_T_POINTS);
    let thetas = angle_grid(KERNEL_THETA_POINTS);
    let mut out = Vec::new();
    for gen in KernelGenerator::ALL {
        let angulars: Vec<(Angular, &str)> = if gen.mode() == 0 {
            vec![(Angular::One, "")]
        } else {
            vec![(Angular::Cos(1), "_cos"), (Angular::Sin(1), "_sin")]
        };
        let mut radial = Vec::with_capacity(ts.len());
        for &t in &ts {
            let w = fam.radial(gen, t)?;
            let j2 = (gen.mode() * gen.mode()) as f64;
            radial.push((w.d2 - j2 * w.v + jacobi_potential(profile, t) * w.v, w.v));
        }
        for (ang, suffix) in angulars {
            let mut sup: f64 = 0.0;
            let mut size: f64 = 0.0;
            for &(res, val) in &radial {
                for &th in &thetas {
                    let y = ang.eval(th).0;
                    sup = sup.max((res * y).abs());
                    size = size.max((val * y).abs());
                }
            }
            out.push(KernelResidual {
                name: format!("{}{}", gen.name(), suffix),
                sup_residual: sup,
                degenerate: size < 1e-12,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularLimitRow {
    pub a: f64,
    /// `sup_{|t| ≤ 5} |w0⁺(t) - (-1 + t tanh t)|`
    pub deviation: f64,
    /// Smallest `C` with `|w0⁺(t)| ≤ C(1 + |t|)` on the sampled `[-τ, τ]`.
    pub growth_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularLimitReport {
    pub rows: Vec<SingularLimitRow>,
}

impl SingularLimitReport {
    /// Deviations shrink along the grid (ordered by decreasing `|a|`).
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].deviation < w[0].deviation)
    }
}

/// Convergence of the neck-size generator to `-1 + t tanh t` as `a → 0`.
pub fn singular_limit_check(a_grid: &[f64]) -> Result<SingularLimitReport, CylinderError> {
    let mut rows = Vec::new();
    for &a in a_grid {
        if a == 0.0 || a.abs() >= 0.05 {
            return Err(CylinderError::OutsideLimitRange(a));
        }
        let p = make_profile(a)?;
        let tau = p.tau();
        let fam = JacobiKernelFamily::new(p, tau.max(5.0))?;
        let mut deviation: f64 = 0.0;
        for t in linspace(-5.0, 5.0, 201) {
            let w = fam.radial(KernelGenerator::W0Plus, t)?.v;
            deviation = deviation.max((w - (-1.0 + t * t.tanh())).abs());
        }
        let mut growth: f64 = 0.0;
        for t in linspace(-tau, tau, 401) {
            let w = fam.radial(KernelGenerator::W0Plus, t)?.v;
            growth = growth.max(w.abs() / (1.0 + t.abs()));
        }
        rows.push(SingularLimitRow {
            a,
            deviation,
            growth_constant: growth,
        });
    }
    Ok(SingularLimitReport { rows })
}

/// `min_t (j² - 2(x² + γ²/x²))` for `j = 2` over a grid on `[-τ, τ]`; the
/// higher Fourier modes are free of kernel when this is nonnegative.
pub fn higher_mode_margin(profile: &DelaunayProfile) -> f64 {
    let tau = profile.tau();
    linspace(-tau, tau, 2001)
        .into_iter()
        .map(|t| 4.0 - jacobi_potential(profile, t))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConstantField, SeparableField};
    use crate::surface::{identity_suite, mean_curvature, SurfacePatch};

    #[test]
    fn round_cylinder_operator_values() {
        let p = make_profile(-0.5).unwrap();
        let cos = SeparableField::new(crate::graph::radial::one, Angular::Cos(1));
        assert!(jacobi_apply(&p, &cos, 0.3, 0.8).operator.abs() < 1e-15);
        let one = jacobi_apply(&p, &ConstantField(1.0), 0.3, 0.8);
        assert!((one.operator - 1.0).abs() < 1e-15);
        assert!((one.normalized - 2.0).abs() < 1e-14);
    }

    #[test]
    fn conformal_and_cmc() {
        for a in [-0.4, -0.1, 0.3] {
            let patch = CylinderPatch::new(make_profile(a).unwrap());
            for i in 0..50 {
                let (t, th) = (-3.0 + 0.13 * i as f64, -3.0 + 0.12 * i as f64);
                let j = patch.jet(t, th);
                let x = patch.profile().x(t);
                assert!((j.t.norm() - x).abs() < 1e-10 && (j.th.norm() - x).abs() < 1e-10);
                assert!((mean_curvature(&patch, t, th).unwrap() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn identities_on_random_points() {
        let patch = CylinderPatch::new(make_profile(-0.1).unwrap());
        let pts: Vec<(f64, f64)> = (0..100)
            .map(|i| ((i as f64 * 0.731).sin() * 4.0, (i as f64 * 1.37).cos() * 3.0))
            .collect();
        let r = identity_suite(&patch, &pts).unwrap();
        assert!(r.max_residual() < 1e-8, "{r:?}");
    }

    #[test]
    fn kernel_generators_solve_jacobi_equation() {
        for a in [-0.1, 0.2] {
            let res = kernel_residuals(&make_profile(a).unwrap()).unwrap();
            assert_eq!(res.len(), 6);
            for r in &res {
                assert!(r.sup_residual < 1e-6, "a={a} {r:?}");
                assert!(!r.degenerate);
            }
        }
    }

    #[test]
    fn round_cylinder_translation_generator_degenerates() {
        let res = kernel_residuals(&make_profile(-0.5).unwrap()).unwrap();
        let w = res.iter().find(|r| r.name == "w0_minus").unwrap();
        assert!(w.degenerate && w.sup_residual == 0.0);
    }

    #[test]
    fn periodic_generators() {
        let p = make_profile(-0.2).unwrap();
        let fam = JacobiKernelFamily::new(p.clone(), 1.0).unwrap();
        for t in [0.1, 0.7, 1.9] {
            for g in [KernelGenerator::W0Minus, KernelGenerator::W1Plus] {
                let (a, b) = (fam.radial(g, t).unwrap(), fam.radial(g, t + 2.0 * p.tau()).unwrap());
                assert!((a.v - b.v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn neck_generator_tends_to_limit_kernel() {
        let r = singular_limit_check(&[-1e-3, -1e-5]).unwrap();
        assert!(r.rows[0].deviation < 5e-2, "{r:?}");
        assert!(r.monotone(), "{r:?}");
        let fam = JacobiKernelFamily::new(make_profile(-1e-6).unwrap(), 1.0).unwrap();
        assert!((fam.radial(KernelGenerator::W0Plus, 0.0).unwrap().v + 1.0).abs() < 1e-5);
        assert!(singular_limit_check(&[0.1]).is_err());
    }

    #[test]
    fn higher_modes_have_no_kernel() {
        let amax = (3f64.sqrt() - 1.0) / 2.0;
        for a in [-0.45, -0.3, -0.1, -1e-3, 1e-3, 0.1, 0.3, amax] {
            assert!(higher_mode_margin(&make_profile(a).unwrap()) >= -1e-12, "a={a}");
        }
    }
}
