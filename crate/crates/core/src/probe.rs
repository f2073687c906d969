//! The singular limit `a → 0`: the limit operator `L₀ = Δ + 2sech²t`, its
//! bounded-growth kernel, the obstruction pairing, weighted norms and the
//! area/volume expansions of the Delaunay lobe.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{radial, weighted_c2_norm, FieldJet, NormalPerturbation};
use crate::jet::Jet;
use crate::profile::{make_profile, DelaunayProfile, ProfileError};
use crate::quad::{periodic_nodes, GaussLegendre};
use crate::report::{angle_grid, linspace};
use crate::torus::g_limit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error("decay condition fails: cosh(t)·(|φ|+|∇φ|+|D²φ|) reaches {tail:e} on 20 ≤ |t| ≤ 30 against {core:e} on |t| ≤ 20")]
    SlowDecay { core: f64, tail: f64 },
    #[error("pointwise bound fails: sup cosh(t)(|φ|+|∇φ|+|D²φ|) = {sup} > R₁/π = {bound}")]
    BoundViolation { sup: f64, bound: f64 },
    #[error("Hölder exponent {0} outside (0, 1]")]
    Exponent(f64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Truncation of the line integrals; `sech²40 ≈ 1.8e-34`.
pub const LINE_CUTOFF: f64 = 40.0;
pub const PANEL_WIDTH: f64 = 0.5;
pub const THETA_NODES: usize = 64;

/// `L₀φ = Δφ + 2sech²t φ`.
pub fn limit_operator(phi: &dyn NormalPerturbation, t: f64, theta: f64) -> f64 {
    let f = phi.jet(t, theta);
    let s = 1.0 / t.cosh();
    f.laplacian() + 2.0 * s * s * f.v
}

/// The four bounded-growth solutions of `L₀w = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKernel {
    /// `-1 + t tanh t`, the neck-size variation.
    Neck,
    /// `-tanh t`, vertical translation.
    Translation,
    Cos,
    Sin,
}

impl LimitKernel {
    pub const ALL: [LimitKernel; 4] = [Self::Neck, Self::Translation, Self::Cos, Self::Sin];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Neck => "neck",
            Self::Translation => "translation",
            Self::Cos => "sech_cos",
            Self::Sin => "sech_sin",
        }
    }
}

impl NormalPerturbation for LimitKernel {
    fn jet(&self, t: f64, theta: f64) -> FieldJet {
        let (th, s) = (t.tanh(), 1.0 / t.cosh());
        let s2 = s * s;
        let (w, y, dy, ddy) = match self {
            Self::Neck => (Jet::new(-1.0 + t * th, th + t * s2, 2.0 * s2 * (1.0 - t * th)), 1.0, 0.0, 0.0),
            Self::Translation => (Jet::new(-th, -s2, 2.0 * s2 * th), 1.0, 0.0, 0.0),
            Self::Cos => {
                let (sn, cs) = theta.sin_cos();
                (radial::sech(t), cs, -sn, -cs)
            }
            Self::Sin => {
                let (sn, cs) = theta.sin_cos();
                (radial::sech(t), sn, cs, -sn)
            }
        };
        FieldJet {
            v: w.v * y,
            t: w.d1 * y,
            th: w.v * dy,
            tt: w.d2 * y,
            tth: w.d1 * dy,
            thth: w.v * ddy,
        }
    }
}

/// `cosh t·(|φ| + |∇φ| + |D²φ|)` maximized over `θ`.
fn decay_profile(phi: &dyn NormalPerturbation, t: f64, thetas: &[f64]) -> f64 {
    thetas
        .iter()
        .map(|&th| {
            let f = phi.jet(t, th);
            t.cosh() * (f.v.abs() + f.gradient_norm() + f.hessian_norm())
        })
        .fold(0.0, f64::max)
}

/// Numerical form of the decay hypothesis: the `cosh`-weighted size of `φ`
/// on `20 ≤ |t| ≤ 30` may not exceed ten times its size on `|t| ≤ 20`.
/// Returns the core maximum.
pub fn check_decay(phi: &dyn NormalPerturbation) -> Result<f64, ProbeError> {
    let ths = angle_grid(16);
    let mut core: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for t in linspace(-30.0, 30.0, 1201) {
        let v = decay_profile(phi, t, &ths);
        if t.abs() <= 20.0 {
            core = core.max(v);
        } else {
            tail = tail.max(v);
        }
    }
    if !(tail <= 10.0 * core.max(f64::MIN_POSITIVE)) {
        return Err(ProbeError::SlowDecay { core, tail });
    }
    Ok(core)
}

/// `∫_{[-T,T]×[-π,π]} f`, panels in parallel, summed in a fixed order.
pub fn plane_integral(f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let gl = GaussLegendre::new(16);
    let nodes = gl.composite_nodes(-LINE_CUTOFF, LINE_CUTOFF, PANEL_WIDTH);
    let theta = periodic_nodes(THETA_NODES);
    let rows: Vec<f64> = nodes
        .par_iter()
        .map(|&(t, w)| w * theta.iter().map(|&(th, v)| v * f(t, th)).sum::<f64>())
        .collect();
    rows.iter().sum()
}

/// `∫_ℝ f`, truncated at `±T`.
pub fn line_integral(f: impl Fn(f64) -> f64) -> f64 {
    GaussLegendre::new(16).composite(-LINE_CUTOFF, LINE_CUTOFF, PANEL_WIDTH, f)
}

/// `∫∫ w L₀φ`; vanishes for every kernel member `w` and admissible `φ`.
pub fn orthogonality_integral(w: LimitKernel, phi: &dyn NormalPerturbation) -> Result<f64, ProbeError> {
    check_decay(phi)?;
    Ok(plane_integral(|t, th| w.jet(t, th).v * limit_operator(phi, t, th)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstructionIntegrals {
    /// `∫ sech²t (1 - t tanh t) dt`, equal to 1.
    pub i1: f64,
    /// `∫∫ (1 - t tanh t) g₀(t) sinθ`, zero by the angular integral.
    pub i2: f64,
    /// `∫ (1 - t tanh t) g₀(t) dt`, the radial factor of `I2`.
    pub radial_factor: f64,
}

pub fn obstruction_integrals() -> ObstructionIntegrals {
    let weight = |t: f64| 1.0 - t * t.tanh();
    let i1 = line_integral(|t| {
        let s = 1.0 / t.cosh();
        s * s * weight(t)
    });
    let i2 = plane_integral(|t, th| weight(t) * g_limit(t) * th.sin());
    let radial_factor = line_integral(|t| weight(t) * g_limit(t));
    ObstructionIntegrals { i1, i2, radial_factor }
}

/// Pairing of the limit equation `½(L₀φ + source) = A(e₂) sech²t` against
/// `1 - t tanh t`. The source is `g₀(t) sinθ` when `with_source` is set.
/// For admissible `φ` this equals `-2π A(e₂)`, so it vanishes only when
/// `A(e₂) = 0`.
pub fn limit_equation_residual(a_e2: f64, phi: &dyn NormalPerturbation, with_source: bool) -> Result<f64, ProbeError> {
    check_decay(phi)?;
    Ok(plane_integral(|t, th| {
        let s = 1.0 / t.cosh();
        let src = if with_source { g_limit(t) * th.sin() } else { 0.0 };
        (1.0 - t * t.tanh()) * (0.5 * (limit_operator(phi, t, th) + src) - a_e2 * s * s)
    }))
}

/// Threshold below which the `β > 1` limit problem has no solution.
pub fn nonexistence_threshold() -> f64 {
    PI / (2.0 + 2f64.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseBound {
    /// `|Δφ(0, π/2) + 2φ(0, π/2)|`.
    pub lhs: f64,
    /// `(2 + √2) R₁/π`.
    pub bound: f64,
    /// `1 - bound`; positive means the value 1 is out of reach.
    pub slack: f64,
}

impl PointwiseBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound
    }
}

/// Checks `|φ| + |∇φ| + |D²φ| ≤ (R₁/π) sech t` on a grid and evaluates the
/// pointwise estimate at `(0, π/2)`.
pub fn nonexistence_bound(r1: f64, phi: &dyn NormalPerturbation) -> Result<PointwiseBound, ProbeError> {
    let bound_c = r1 / PI;
    let ths = angle_grid(64);
    let sup = linspace(-30.0, 30.0, 1201)
        .into_iter()
        .map(|t| decay_profile(phi, t, &ths))
        .fold(0.0, f64::max);
    if sup > bound_c * (1.0 + 1e-12) {
        return Err(ProbeError::BoundViolation { sup, bound: bound_c });
    }
    let f = phi.jet(0.0, PI / 2.0);
    let bound = (2.0 + 2f64.sqrt()) * bound_c;
    Ok(PointwiseBound {
        lhs: (f.laplacian() + 2.0 * f.v).abs(),
        bound,
        slack: 1.0 - bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormReport {
    pub c2_weighted: f64,
    pub holder_seminorm: f64,
    pub alpha: f64,
}

pub const HOLDER_RADIUS: f64 = 0.5;

/// Weighted `C²` norm and Hölder seminorm of `D²φ` over `K_{n,a}`, sampled
/// on `401 × 64` points per period.
pub fn weighted_norms(
    phi: &dyn NormalPerturbation,
    profile: &DelaunayProfile,
    n: u32,
    alpha: f64,
) -> Result<WeightedNormReport, ProbeError> {
    weighted_norms_on(phi, profile, n, alpha, 400, 64)
}

/// [`weighted_norms`] at a chosen resolution: `per_period` intervals in `t`
/// per period and `m` angles.
pub fn weighted_norms_on(
    phi: &dyn NormalPerturbation,
    profile: &DelaunayProfile,
    n: u32,
    alpha: f64,
    per_period: usize,
    m: usize,
) -> Result<WeightedNormReport, ProbeError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ProbeError::Exponent(alpha));
    }
    let half = n.max(1) as f64 * profile.tau();
    let ts = linspace(-half, half, per_period * n.max(1) as usize + 1);
    let ths = angle_grid(m);
    let c2_weighted = weighted_c2_norm(profile, phi, &ts, &ths);

    let hess: Vec<Vec<[f64; 3]>> = ts
        .par_iter()
        .map(|&t| {
            ths.iter()
                .map(|&th| {
                    let f = phi.jet(t, th);
                    [f.tt, f.tth, f.thth]
                })
                .collect()
        })
        .collect();
    let (dt, dth) = (ts[1] - ts[0], 2.0 * PI / m as f64);
    let (ki, kj) = ((HOLDER_RADIUS / dt) as usize, (HOLDER_RADIUS / dth) as usize);
    let holder_seminorm = (0..ts.len())
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = 0.0;
            for j in 0..m {
                let p = hess[i][j];
                for di in 0..=ki.min(ts.len() - 1 - i) {
                    for dj in -(kj as isize)..=kj as isize {
                        if di == 0 && dj <= 0 {
                            continue;
                        }
                        let dist = ((di as f64 * dt).powi(2) + (dj as f64 * dth).powi(2)).sqrt();
                        if dist > HOLDER_RADIUS {
                            continue;
                        }
                        let q = hess[i + di][(j as isize + dj).rem_euclid(m as isize) as usize];
                        let d = ((p[0] - q[0]).powi(2) + 2.0 * (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                        best = best.max(d / dist.powf(alpha));
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(WeightedNormReport {
        c2_weighted,
        holder_seminorm,
        alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaVolume {
    pub a: f64,
    /// `2π ∫_{-τ}^{τ} x² dt`.
    pub area: f64,
    /// `4π(1 + a)E(k_a)`.
    pub area_closed: f64,
    /// `(2π/3) ∫_{-τ}^{τ} (-x²z' + x x' z) dt`, negative for the inward normal.
    pub volume: f64,
    /// `|area/4π - (1 + a) + (a²/2) log|a|| / a²`.
    pub area_quotient: f64,
    /// `|-3 volume/4π - 1 - 3a/2| / a²`.
    pub volume_quotient: f64,
}

/// Area and enclosed volume of one lobe.
pub fn area_volume(profile: &DelaunayProfile) -> AreaVolume {
    let a = profile.a();
    let tau = profile.tau();
    let gl = GaussLegendre::new(20);
    let width = (2.0 * tau / ((2.0 * tau / 0.25).ceil())).min(0.25);
    let area = 2.0 * PI * gl.composite(-tau, tau, width, |t| profile.x(t).powi(2));
    let volume = 2.0 * PI / 3.0
        * gl.composite(-tau, tau, width, |t| {
            let p = profile.eval(t);
            -p.x * p.x * p.dz + p.x * p.dx * p.z
        });
    let a2 = a * a;
    AreaVolume {
        a,
        area,
        area_closed: 4.0 * PI * (1.0 + a) * profile.complete_e(),
        volume,
        area_quotient: (area / (4.0 * PI) - (1.0 + a) + 0.5 * a2 * a.abs().ln()).abs() / a2,
        volume_quotient: (-3.0 * volume / (4.0 * PI) - 1.0 - 1.5 * a).abs() / a2,
    }
}

/// `sup_{|t| ≤ 5} |g_a(t) - g₀(t)|`.
pub fn g_limit_deviation(a: f64) -> Result<f64, ProbeError> {
    let p = make_profile(a)?;
    Ok(linspace(-5.0, 5.0, 401)
        .into_iter()
        .map(|t| (crate::torus::g_coefficient(&p, t) - g_limit(t)).abs())
        .fold(0.0, f64::max))
}

/// Sup of `|L₀w|` over `|t| ≤ 30` for each kernel member.
pub fn kernel_sup_residuals() -> Vec<(LimitKernel, f64)> {
    let ts = linspace(-30.0, 30.0, 1201);
    let ths = angle_grid(64);
    LimitKernel::ALL
        .iter()
        .map(|&w| {
            let r = ts
                .iter()
                .flat_map(|&t| ths.iter().map(move |&th| (t, th)))
                .map(|(t, th)| limit_operator(&w, t, th).abs())
                .fold(0.0, f64::max);
            (w, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Angular, ConstantField, FnField, Scaled, SeparableField, Sum};

    #[test]
    fn kernel_is_annihilated() {
        for (w, r) in kernel_sup_residuals() {
            assert!(r < 1e-12, "{} {r}", w.name());
        }
        let one = limit_operator(&ConstantField(1.0), 0.7, 0.1);
        assert!((one - 2.0 / 0.7f64.cosh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn kernel_jets_match_differences() {
        let h = 1e-5;
        for w in LimitKernel::ALL {
            let (t, th) = (0.8, 0.3);
            let f = w.jet(t, th);
            assert!(((w.jet(t + h, th).v - w.jet(t - h, th).v) / (2.0 * h) - f.t).abs() < 1e-9);
            assert!(((w.jet(t + h, th).t - w.jet(t - h, th).t) / (2.0 * h) - f.tt).abs() < 1e-9);
            assert!(((w.jet(t, th + h).th - w.jet(t, th - h).th) / (2.0 * h) - f.thth).abs() < 1e-9);
        }
    }

    fn gauss_one_plus_cos() -> SeparableField<fn(f64) -> Jet> {
        SeparableField::new(radial::gaussian as fn(f64) -> Jet, Angular::One)
    }

    #[test]
    fn orthogonality() {
        let phi = Sum(gauss_one_plus_cos(), SeparableField::new(radial::gaussian, Angular::Cos(1)));
        assert!(orthogonality_integral(LimitKernel::Neck, &phi).unwrap().abs() < 1e-8);
        let psi = SeparableField::new(radial::sech_sq, Angular::Sin(1));
        assert!(orthogonality_integral(LimitKernel::Cos, &psi).unwrap().abs() < 1e-8);
        let slow = FnField(|t: f64, _th: f64| {
            let d = 1.0 + t * t;
            FieldJet {
                v: 1.0 / d,
                t: -2.0 * t / (d * d),
                tt: (6.0 * t * t - 2.0) / (d * d * d),
                ..FieldJet::default()
            }
        });
        assert!(matches!(
            orthogonality_integral(LimitKernel::Neck, &slow),
            Err(ProbeError::SlowDecay { .. })
        ));
    }

    #[test]
    fn orthogonality_is_bilinear() {
        let phi = SeparableField::new(radial::sech_sq, Angular::Cos(2));
        let psi = SeparableField::new(radial::gaussian, Angular::One);
        let a = orthogonality_integral(LimitKernel::Translation, &phi).unwrap();
        let b = orthogonality_integral(LimitKernel::Translation, &psi).unwrap();
        let c = orthogonality_integral(
            LimitKernel::Translation,
            &Sum(
                Scaled {
                    inner: &phi,
                    factor: 2.5,
                },
                &psi,
            ),
        )
        .unwrap();
        assert!((c - (2.5 * a + b)).abs() < 1e-10);
    }

    #[test]
    fn obstruction_values() {
        let o = obstruction_integrals();
        assert!((o.i1 - 1.0).abs() < 1e-10, "{o:?}");
        assert!(o.i2.abs() < 1e-10);
        assert!(o.radial_factor.is_finite());
    }

    #[test]
    fn pairing_detects_amplitude() {
        let phi = SeparableField::new(radial::sech_sq, Angular::Sin(1));
        for a in [-1.0, 0.0, 1.0, 0.37] {
            let p = limit_equation_residual(a, &phi, false).unwrap();
            assert!((p + 2.0 * PI * a).abs() < 1e-6, "{a} {p}");
            let q = limit_equation_residual(a, &phi, true).unwrap();
            assert!((q - p).abs() < 1e-10);
        }
        assert!(limit_equation_residual(0.0, &ConstantField(0.0), false).unwrap().abs() < 1e-8);
    }

    #[test]
    fn pointwise_bound() {
        assert!((nonexistence_threshold() - 0.920151).abs() < 1e-6);
        let z = nonexistence_bound(1.0, &ConstantField(0.0)).unwrap();
        assert_eq!(z.lhs, 0.0);
        assert!((z.bound - 1.0866).abs() < 1e-3 && z.slack < 0.0);
        let z = nonexistence_bound(0.9, &ConstantField(0.0)).unwrap();
        assert!(z.slack > 0.0);
        let tight = Scaled {
            inner: SeparableField::new(radial::sech, Angular::One),
            factor: 1.0 / (3.0 * PI),
        };
        let r = nonexistence_bound(1.0, &tight).unwrap();
        assert!(r.holds() && r.lhs > 0.0);
        let loose = Scaled {
            inner: SeparableField::new(radial::sech, Angular::One),
            factor: 1.0 / PI,
        };
        assert!(matches!(
            nonexistence_bound(1.0, &loose),
            Err(ProbeError::BoundViolation { .. })
        ));
    }

    #[test]
    fn weighted_norm_values() {
        let half = make_profile(-0.5).unwrap();
        let r = weighted_norms(&ConstantField(0.0), &half, 1, 0.5).unwrap();
        assert_eq!((r.c2_weighted, r.holder_seminorm), (0.0, 0.0));
        let r = weighted_norms(&ConstantField(1.0), &half, 1, 0.5).unwrap();
        assert!((r.c2_weighted - 2.0).abs() < 1e-12);
        assert!(weighted_norms(&ConstantField(1.0), &half, 1, 1.5).is_err());

        let p = make_profile(-0.1).unwrap();
        let phi = FnField(|t: f64, th: f64| {
            let q = p.eval(t);
            let (s, c) = th.sin_cos();
            FieldJet {
                v: q.x * s,
                t: q.dx * s,
                th: q.x * c,
                tt: q.ddx * s,
                tth: q.dx * c,
                thth: -q.x * s,
            }
        });
        let coarse = weighted_norms(&phi, &p, 2, 0.5).unwrap();
        let half_len = 2.0 * p.tau();
        let dense = weighted_c2_norm(&p, &phi, &linspace(-half_len, half_len, 6401), &angle_grid(512));
        assert!((coarse.c2_weighted / dense - 1.0).abs() < 0.02);
        assert!(coarse.holder_seminorm.is_finite() && coarse.holder_seminorm > 0.0);
    }

    #[test]
    fn area_and_volume() {
        let half = area_volume(&make_profile(-0.5).unwrap());
        assert!((half.area - PI * PI).abs() < 1e-9);
        let r = area_volume(&make_profile(-0.1).unwrap());
        assert!((r.area - r.area_closed).abs() < 1e-10);
        for a in [-1e-4, 1e-4] {
            let r = area_volume(&make_profile(a).unwrap());
            assert!((r.area - 4.0 * PI).abs() < 1.5e-3);
            assert!((r.area - 4.0 * PI * (1.0 + a)).abs() < 1e-6);
            assert!((r.volume + 4.0 * PI / 3.0).abs() < 1e-3);
        }
        for a in [1e-1, 1e-2, 1e-3, 1e-4] {
            for s in [-1.0, 1.0] {
                let r = area_volume(&make_profile(s * a).unwrap());
                assert!(r.area_quotient <= 5.0 && r.volume_quotient <= 5.0, "{r:?}");
            }
        }
    }

    #[test]
    fn g_converges_to_limit() {
        let d3 = g_limit_deviation(-1e-3).unwrap();
        let d5 = g_limit_deviation(-1e-5).unwrap();
        assert!(d3 < 5e-2 && d5 < d3, "{d3} {d5}");
    }
}
