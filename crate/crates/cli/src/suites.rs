//! Check suites behind each command. Every suite is a list of independent
//! tasks run in parallel; rows are sorted before they are returned.

use std::f64::consts::PI;

use delab_core::cylinder::{kernel_residuals, singular_limit_check, CylinderPatch};
use delab_core::graph::{
    self, radial, variation_validation, Angular, FieldFamily, FieldJet, FnField, NormalPerturbation, PerturbationBallSpec,
    PrescribedCurvature, SeparableField,
};
use delab_core::jet::Jet;
use delab_core::mesh::{grid_mesh, Mesh};
use delab_core::probe::{
    self, area_volume, g_limit_deviation, limit_equation_residual, obstruction_integrals, orthogonality_integral, LimitKernel,
};
use delab_core::profile::{asymptotic_checks, integrate_profile_oracle, make_profile, DelaunayProfile};
use delab_core::report::{angle_grid, grid_sup, linspace, ExpansionReport};
use delab_core::surface::{mean_curvature, SpherePatch};
use delab_core::torus::{self, g_coefficient, TorusPatch};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::rows::{fmt_num, sort_rows, Row};

pub const CMC_GRID: [f64; 6] = [-0.4, -0.1, -0.01, 0.01, 0.1, 0.3];
pub const ORACLE_GRID: [f64; 2] = [-0.3, 0.3];
pub const KERNEL_GRID: [f64; 2] = [-0.2, 0.2];
pub const EXPANSION_GRID: [f64; 2] = [-0.1, 0.1];
pub const LIMIT_GRID: [f64; 2] = [-1e-3, -1e-5];
pub const SMALL_NECK_GRID: [f64; 8] = [-1e-1, -1e-2, -1e-3, -1e-4, 1e-4, 1e-3, 1e-2, 1e-1];
pub const PAIRING_AMPLITUDES: [f64; 4] = [-1.0, 0.0, 1.0, 0.37];

const CMC_TOL: f64 = 1e-8;
const KERNEL_TOL: f64 = 1e-6;
const INTEGRAL_TOL: f64 = 1e-10;
const RATIO_FRAC: f64 = 0.2;
const BALL_RADIUS: f64 = 2.0;
const R1_DEFAULT: f64 = 0.9;
const VARIATION_SEED: u64 = 7;
const VARIATION_CASES: usize = 50;

type Task<'a> = Box<dyn Fn() -> Vec<Row> + Send + Sync + 'a>;

fn run_tasks(tasks: Vec<Task<'_>>) -> Vec<Row> {
    let mut rows: Vec<Row> = tasks.par_iter().flat_map_iter(|task| task()).collect();
    sort_rows(&mut rows);
    rows
}

/// Turns an evaluation error into a single failing row.
fn guarded<E: std::fmt::Display>(id: &str, params: &str, f: impl FnOnce() -> Result<Vec<Row>, E>) -> Vec<Row> {
    f().unwrap_or_else(|e| vec![Row::error(id, params, e)])
}

fn pa(a: f64) -> String {
    format!("a={}", fmt_num(a))
}

fn grid_or(cfg: &RunConfig, default: &[f64]) -> Vec<f64> {
    cfg.a.clone().unwrap_or_else(|| default.to_vec())
}

/// One row per consecutive `ε` pair: the remainder ratio against `2^order`.
pub fn ratio_rows(id: &str, params: &str, rep: &ExpansionReport, frac: f64) -> Vec<Row> {
    let orders = rep.order_estimates();
    rep.samples
        .windows(2)
        .zip(orders)
        .map(|(w, order)| {
            let expect = (w[0].epsilon / w[1].epsilon).powf(rep.expected_order);
            let ratio = w[0].remainder_sup / w[1].remainder_sup;
            let p = format!("{params};eps={}/{}", fmt_num(w[0].epsilon), fmt_num(w[1].epsilon));
            let bound = format!("{}±{}%", fmt_num(expect), fmt_num(100.0 * frac));
            let pass = ratio.is_finite() && (ratio / expect - 1.0).abs() <= frac;
            Row::flag(id, p, ratio, bound, pass).with_order(order)
        })
        .collect()
}

/// `φ = x_a sinθ`, the translation-like test field.
fn x_sin(profile: &DelaunayProfile, scale: f64) -> impl NormalPerturbation + '_ {
    FnField(move |t: f64, th: f64| {
        let p = profile.eval(t);
        let (s, c) = th.sin_cos();
        FieldJet {
            v: p.x * s,
            t: p.dx * s,
            th: p.x * c,
            tt: p.ddx * s,
            tth: p.dx * c,
            thth: -p.x * s,
        }
        .scale(scale)
    })
}

/// The graph family `ε ↦ ½ ε^β x_a sinθ`, inside the radius-2 ball.
fn graph_family(profile: &DelaunayProfile, beta: f64) -> Box<FieldFamily<'_>> {
    Box::new(move |e: f64| -> Box<dyn NormalPerturbation + '_> { Box::new(x_sin(profile, 0.5 * e.powf(beta))) })
}

fn linearization_field(profile: &DelaunayProfile) -> SeparableField<impl Fn(f64) -> Jet + Sync> {
    SeparableField::new(radial::sine(PI / profile.tau(), 0.0), Angular::Sin(1))
}

type Radial = fn(f64) -> Jet;

/// Ten decaying fields for the orthogonality check.
pub fn admissible_fields() -> Vec<(String, SeparableField<Radial>)> {
    let radials: [(&str, Radial); 3] = [
        ("sech", radial::sech),
        ("sech_sq", radial::sech_sq),
        ("gaussian", radial::gaussian),
    ];
    let angulars = [
        ("1", Angular::One),
        ("cos1", Angular::Cos(1)),
        ("sin1", Angular::Sin(1)),
        ("cos2", Angular::Cos(2)),
    ];
    radials
        .iter()
        .flat_map(|&(rn, r)| {
            angulars
                .iter()
                .map(move |&(an, ang)| (format!("{rn}*{an}"), SeparableField::new(r, ang)))
        })
        .take(10)
        .collect()
}

// ---- verify ----------------------------------------------------------------

pub fn cmc_rows(a: f64, tol: f64) -> Vec<Row> {
    let params = pa(a);
    guarded("01.cmc", &params, || -> Result<_, String> {
        let p = make_profile(a).map_err(|e| e.to_string())?;
        let tau = p.tau();
        let patch = CylinderPatch::new(p);
        let sup = grid_sup(&linspace(-tau, tau, 201), &angle_grid(64), |t, th| {
            mean_curvature(&patch, t, th).map(|h| h - 1.0)
        })
        .map_err(|e| e.to_string())?;
        Ok(vec![Row::below("01.cmc", params.clone(), sup, tol)])
    })
}

fn identity_rows(a: f64) -> Vec<Row> {
    let params = pa(a);
    guarded("02.conformality", &params, || {
        let p = make_profile(a)?;
        let (tau, h) = (p.tau(), p.h());
        let (mut conf, mut per_x, mut per_z) = (0.0_f64, 0.0_f64, 0.0_f64);
        for t in linspace(-tau, tau, 2001) {
            let q = p.eval(t);
            conf = conf.max((q.x * q.x - q.dx * q.dx - q.dz * q.dz).abs());
            per_x = per_x.max((p.x(t + 2.0 * tau) - q.x).abs());
            per_z = per_z.max((p.z(t + 2.0 * tau) - 2.0 * h - q.z).abs());
        }
        Ok::<_, delab_core::profile::ProfileError>(vec![
            Row::below("02.conformality", params.clone(), conf, 1e-10),
            Row::below("02.periodicity_x", params.clone(), per_x, 1e-10),
            Row::below("02.periodicity_z", params.clone(), per_z, 1e-10),
            Row::below("02.height", params.clone(), h - p.h_quadrature(), 1e-10),
        ])
    })
}

fn oracle_rows(a: f64) -> Vec<Row> {
    let params = format!("{};tol=1e-10", pa(a));
    guarded("03.ode_oracle", &params, || {
        let p = make_profile(a)?;
        let s = integrate_profile_oracle(a, 2.0 * p.tau(), 1e-10)?;
        let mut dev = 0.0_f64;
        for i in 0..s.t.len() {
            let q = p.eval(s.t[i]);
            dev = dev
                .max((q.x - s.x[i]).abs())
                .max((q.dx - s.dx[i]).abs())
                .max((q.z - s.z[i]).abs());
        }
        Ok::<_, delab_core::profile::ProfileError>(vec![Row::below("03.ode_oracle", params.clone(), dev, 1e-9)])
    })
}

pub fn kernel_rows(prefix: &str, a: f64, tol: f64) -> Vec<Row> {
    let params = pa(a);
    let id = format!("{prefix}kernel");
    guarded(&id, &params, || {
        let res = kernel_residuals(&make_profile(a)?)?;
        Ok::<_, delab_core::profile::ProfileError>(
            res.into_iter()
                .map(|r| Row::below(format!("{id}.{}", r.name), params.clone(), r.sup_residual, tol))
                .collect(),
        )
    })
}

/// Deviations along a shrinking-`a` schedule: the first must sit below
/// `first_bound`, each later one strictly below its predecessor.
fn schedule_rows(id: &str, devs: &[(f64, f64)], first_bound: f64) -> Vec<Row> {
    let mut rows = Vec::with_capacity(devs.len());
    for (i, &(a, d)) in devs.iter().enumerate() {
        rows.push(if i == 0 {
            Row::below(id, pa(a), d, first_bound)
        } else {
            let prev = devs[i - 1].1;
            Row::flag(id, pa(a), d, format!("<{}", fmt_num(prev)), d < prev && d < first_bound)
        });
    }
    rows
}

pub fn singular_limit_rows(id: &str, grid: &[f64]) -> Vec<Row> {
    guarded(id, "", || {
        let rep = singular_limit_check(grid)?;
        let devs: Vec<(f64, f64)> = rep.rows.iter().map(|r| (r.a, r.deviation)).collect();
        Ok::<_, delab_core::cylinder::CylinderError>(schedule_rows(id, &devs, 5e-2))
    })
}

fn g_rows() -> Vec<Row> {
    let mut rows = guarded("05.g_round", "a=-0.5", || {
        let p = make_profile(-0.5)?;
        let dev = linspace(-3.0, 3.0, 61)
            .into_iter()
            .map(|t| (g_coefficient(&p, t) - 0.25).abs())
            .fold(0.0, f64::max);
        Ok::<_, delab_core::profile::ProfileError>(vec![Row::below("05.g_round", "a=-0.5", dev, 1e-10)])
    });
    rows.extend(guarded("05.g_limit", "", || {
        let devs = LIMIT_GRID
            .iter()
            .map(|&a| g_limit_deviation(a).map(|d| (a, d)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok::<_, probe::ProbeError>(schedule_rows("05.g_limit", &devs, 5e-2))
    }));
    rows
}

fn expansion_rows(a: f64, eps: &[f64], frac: f64, radius: f64) -> Vec<Row> {
    let params = pa(a);
    let profile = match make_profile(a) {
        Ok(p) => p,
        Err(e) => return vec![Row::error("05.expansion", params, e)],
    };
    let tasks: Vec<Task<'_>> = vec![
        Box::new(|| {
            guarded("05.mean_curvature", &params, || {
                torus::mean_curvature_expansion(&profile, eps).map(|r| ratio_rows("05.mean_curvature", &params, &r, frac))
            })
        }),
        Box::new(|| {
            guarded("05.second_form", &params, || {
                torus::second_form_expansion(&profile, eps).map(|reps| {
                    reps.iter()
                        .flat_map(|r| ratio_rows(&format!("05.{}", r.label), &params, r, frac))
                        .collect()
                })
            })
        }),
        Box::new(|| {
            guarded("05.normal", &params, || {
                torus::normal_derivative_expansion(&profile, eps).map(|reps| {
                    reps.iter()
                        .flat_map(|r| ratio_rows(&format!("05.{}", r.label), &params, r, frac))
                        .collect()
                })
            })
        }),
        Box::new(|| {
            guarded("05.linearized_operator", &params, || {
                torus::linearized_expansion(&profile, &linearization_field(&profile), eps)
                    .map(|r| ratio_rows("05.linearized_operator", &params, &r, frac))
            })
        }),
        Box::new(|| {
            guarded("05.graph_mean_curvature", &params, || {
                let ball = PerturbationBallSpec { radius, beta: 1.0 };
                graph::graph_expansion(&profile, &*graph_family(&profile, 1.0), ball, eps)
                    .map(|r| ratio_rows("05.graph_mean_curvature", &params, &r, frac))
            })
        }),
    ];
    run_tasks(tasks)
}

fn round_torus_rows() -> Vec<Row> {
    let e = 1e-3;
    let params = "a=-0.5;eps=0.001";
    guarded("06.round_torus", params, || -> Result<_, String> {
        let patch = TorusPatch::with_epsilon(make_profile(-0.5).map_err(|e| e.to_string())?, e).map_err(|e| e.to_string())?;
        let sup = grid_sup(&linspace(-PI, PI, 201), &angle_grid(64), |t, th| {
            let s = th.sin();
            mean_curvature(&patch, t, th).map(|h| h - (1.0 + e * s) / (1.0 + 0.5 * e * s))
        })
        .map_err(|e| e.to_string())?;
        Ok(vec![Row::below("06.round_torus", params, sup, 1e-9)])
    })
}

fn variation_rows() -> Vec<Row> {
    let params = format!("cases={VARIATION_CASES};seed={VARIATION_SEED}");
    let mut rows = guarded("07.variation", &params, || {
        let rep = variation_validation(VARIATION_SEED, VARIATION_CASES)?;
        Ok::<_, graph::GraphError>(vec![
            Row::below("07.first_variation", params.clone(), rep.max_first_error(), 1e-6),
            Row::below("07.second_variation", params.clone(), rep.max_second_error(), 1e-5),
        ])
    });
    rows.extend(guarded("07.sphere", "phi=1", || {
        let one = graph::ConstantField(1.0);
        let (mut d1, mut d2) = (0.0_f64, 0.0_f64);
        for (t, th) in [(0.0, 0.0), (0.3, 0.2), (-1.1, 2.5), (2.0, -1.7)] {
            d1 = d1.max((graph::first_variation(&SpherePatch, &one, t, th)? - 1.0).abs());
            d2 = d2.max((graph::second_variation(&SpherePatch, &one, t, th)? - 2.0).abs());
        }
        Ok::<_, graph::GraphError>(vec![
            Row::below("07.sphere_first", "phi=1", d1, 1e-9),
            Row::below("07.sphere_second", "phi=1", d2, 1e-8),
        ])
    }));
    rows
}

/// Line-integral identities, kernel orthogonality and the pairing. `prefix`
/// distinguishes the `verify` ids from the plain `probe` ids.
fn integral_rows(prefix: &str, tol: f64) -> Vec<Row> {
    let o = obstruction_integrals();
    let mut rows = vec![
        Row::near(format!("{prefix}I1"), "", o.i1, 1.0, tol),
        Row::below(format!("{prefix}I2"), "", o.i2, tol),
    ];
    let fields = admissible_fields();
    rows.extend(
        fields
            .par_iter()
            .flat_map_iter(|(name, phi)| {
                let id = format!("{prefix}orthogonality");
                let params = format!("phi={name}");
                guarded(&id.clone(), &params.clone(), || {
                    let mut worst = 0.0_f64;
                    for w in LimitKernel::ALL {
                        worst = worst.max(orthogonality_integral(w, phi)?.abs());
                    }
                    Ok::<_, probe::ProbeError>(vec![Row::below(id, params, worst, 1e-8)])
                })
            })
            .collect::<Vec<_>>(),
    );
    let source_field = SeparableField::new(radial::sech_sq as Radial, Angular::Sin(1));
    rows.extend(
        PAIRING_AMPLITUDES
            .par_iter()
            .flat_map_iter(|&amp| {
                let id = format!("{prefix}pairing");
                let params = format!("A={}", fmt_num(amp));
                guarded(&id.clone(), &params.clone(), || {
                    let v = limit_equation_residual(amp, &source_field, true)?;
                    Ok::<_, probe::ProbeError>(vec![Row::near(id, params, v, -2.0 * PI * amp, 1e-6)])
                })
            })
            .collect::<Vec<_>>(),
    );
    rows
}

fn area_rows(grid: &[f64]) -> Vec<Row> {
    let mut rows = Vec::new();
    for &a in grid {
        rows.extend(guarded("09.area_closed", &pa(a), || {
            let r = area_volume(&make_profile(a)?);
            Ok::<_, delab_core::profile::ProfileError>(vec![Row::below("09.area_closed", pa(a), r.area - r.area_closed, 1e-10)])
        }));
    }
    rows.extend(guarded("09.area_round", "a=-0.5", || {
        let r = area_volume(&make_profile(-0.5)?);
        Ok::<_, delab_core::profile::ProfileError>(vec![Row::near("09.area_round", "a=-0.5", r.area, PI * PI, 1e-9)])
    }));
    for &a in &SMALL_NECK_GRID {
        rows.extend(guarded("09.area_quotient", &pa(a), || {
            let r = area_volume(&make_profile(a)?);
            Ok::<_, delab_core::profile::ProfileError>(vec![
                Row::flag("09.area_quotient", pa(a), r.area_quotient, "<=5", r.area_quotient <= 5.0),
                Row::flag(
                    "09.volume_quotient",
                    pa(a),
                    r.volume_quotient,
                    "<=5",
                    r.volume_quotient <= 5.0,
                ),
            ])
        }));
    }
    rows
}

fn asymptotic_rows() -> Vec<Row> {
    let mut grid = SMALL_NECK_GRID.to_vec();
    grid.push(-1e-5);
    guarded("10.asymptotics", "", || {
        let rep = asymptotic_checks(&grid)?;
        let mut rows = Vec::new();
        for r in &rep.rows {
            if r.a == -1e-5 {
                rows.push(Row::below("10.period_remainder", pa(r.a), r.period_remainder, 1e-3));
            }
            rows.push(Row::flag(
                "10.height_quotient",
                pa(r.a),
                r.height_quotient,
                "<=2",
                r.height_quotient <= 2.0,
            ));
        }
        Ok::<_, delab_core::profile::ProfileError>(rows)
    })
}

/// The full invariant suite. `--a` replaces the built-in grids of the
/// per-parameter checks; fixed anchors (round cylinder, singular limits,
/// small-neck asymptotics) always run.
pub fn verify(cfg: &RunConfig) -> Vec<Row> {
    let cmc_tol = cfg.tol.unwrap_or(CMC_TOL);
    let eps = cfg.eps_sequence();
    let radius = cfg.r.unwrap_or(BALL_RADIUS);
    let cmc_grid = grid_or(cfg, &CMC_GRID);
    let oracle_grid = grid_or(cfg, &ORACLE_GRID);
    let kernel_grid = grid_or(cfg, &KERNEL_GRID);
    let expansion_grid = grid_or(cfg, &EXPANSION_GRID);

    let mut tasks: Vec<Task<'_>> = Vec::new();
    for &a in &cmc_grid {
        tasks.push(Box::new(move || cmc_rows(a, cmc_tol)));
        tasks.push(Box::new(move || identity_rows(a)));
    }
    for &a in &oracle_grid {
        tasks.push(Box::new(move || oracle_rows(a)));
    }
    for &a in &kernel_grid {
        tasks.push(Box::new(move || kernel_rows("04.", a, KERNEL_TOL)));
    }
    tasks.push(Box::new(|| singular_limit_rows("04.singular_limit", &LIMIT_GRID)));
    for &a in &expansion_grid {
        tasks.push(Box::new(move || expansion_rows(a, &eps, RATIO_FRAC, radius)));
    }
    tasks.push(Box::new(g_rows));
    tasks.push(Box::new(round_torus_rows));
    tasks.push(Box::new(variation_rows));
    tasks.push(Box::new(|| integral_rows("08.", INTEGRAL_TOL)));
    let area_grid = cmc_grid.clone();
    tasks.push(Box::new(move || area_rows(&area_grid)));
    tasks.push(Box::new(asymptotic_rows));
    run_tasks(tasks)
}

// ---- expand ----------------------------------------------------------------

fn expand_one(a: f64, eps: &[f64], frac: f64, ball: PerturbationBallSpec, field: PrescribedCurvature) -> Vec<Row> {
    let params = pa(a);
    let profile = match make_profile(a) {
        Ok(p) => p,
        Err(e) => return vec![Row::error("expansion", params, e)],
    };
    let table = |reps: Vec<ExpansionReport>| -> Vec<Row> {
        let mut rows = Vec::new();
        for r in &reps {
            rows.extend(ratio_rows(&r.label, &params, r, frac));
            for s in &r.samples {
                let p = format!("{params};eps={}", fmt_num(s.epsilon));
                rows.push(Row::flag(
                    format!("{}.weighted", r.label),
                    p,
                    s.weighted_sup,
                    "finite",
                    s.weighted_sup.is_finite(),
                ));
            }
        }
        rows
    };
    let tasks: Vec<Task<'_>> = vec![
        Box::new(|| {
            guarded("mean_curvature", &params, || {
                torus::mean_curvature_expansion(&profile, eps).map(|r| table(vec![r]))
            })
        }),
        Box::new(|| {
            guarded("second_form", &params, || {
                torus::second_form_expansion(&profile, eps).map(table)
            })
        }),
        Box::new(|| {
            guarded("normal", &params, || {
                torus::normal_derivative_expansion(&profile, eps).map(table)
            })
        }),
        Box::new(|| {
            guarded("linearized_operator", &params, || {
                torus::linearized_expansion(&profile, &linearization_field(&profile), eps).map(|r| table(vec![r]))
            })
        }),
        Box::new(|| {
            guarded("graph_mean_curvature", &params, || {
                let ball = PerturbationBallSpec { beta: 1.0, ..ball };
                graph::graph_expansion(&profile, &*graph_family(&profile, 1.0), ball, eps).map(|r| table(vec![r]))
            })
        }),
        Box::new(|| {
            guarded("prescribed_curvature", &params, || {
                graph::prescribed_expansion(&profile, &field, &*graph_family(&profile, ball.beta), ball, eps)
                    .map(|(m, g)| table(vec![m, g]))
            })
        }),
        Box::new(|| {
            guarded("second_variation", &params, || {
                let phi = SeparableField::new(radial::one as Radial, Angular::Sin(1));
                graph::torus_second_variation_expansion(&profile, &phi, eps).map(|r| table(vec![r]))
            })
        }),
    ];
    run_tasks(tasks)
}

/// Richardson tables of every torus expansion, with the weighted remainders.
pub fn expand(cfg: &RunConfig) -> Result<Vec<Row>, crate::config::ConfigError> {
    let field = cfg.prescribed()?;
    let eps = cfg.eps_sequence();
    let frac = cfg.tol.unwrap_or(RATIO_FRAC);
    let ball = PerturbationBallSpec {
        radius: cfg.r.unwrap_or(BALL_RADIUS),
        beta: cfg.beta,
    };
    let grid = grid_or(cfg, &EXPANSION_GRID);
    let tasks: Vec<Task<'_>> = grid
        .iter()
        .map(|&a| -> Task<'_> { Box::new(move || expand_one(a, &eps, frac, ball, field)) })
        .collect();
    Ok(run_tasks(tasks))
}

// ---- kernel ----------------------------------------------------------------

pub fn kernel(cfg: &RunConfig) -> Vec<Row> {
    let tol = cfg.tol.unwrap_or(KERNEL_TOL);
    let mut tasks: Vec<Task<'_>> = grid_or(cfg, &KERNEL_GRID)
        .into_iter()
        .map(|a| -> Task<'_> { Box::new(move || kernel_rows("", a, tol)) })
        .collect();
    tasks.push(Box::new(|| singular_limit_rows("singular_limit", &[-1e-3, -1e-4, -1e-5])));
    run_tasks(tasks)
}

// ---- probe -----------------------------------------------------------------

pub fn probe(cfg: &RunConfig) -> Vec<Row> {
    let tol = cfg.tol.unwrap_or(INTEGRAL_TOL);
    let r1 = cfg.r.unwrap_or(R1_DEFAULT);
    let mut rows = integral_rows("", tol);
    let o = obstruction_integrals();
    rows.push(Row::flag(
        "I2_radial",
        "",
        o.radial_factor,
        "finite",
        o.radial_factor.is_finite(),
    ));
    let threshold = probe::nonexistence_threshold();
    rows.push(Row::near("threshold", "", threshold, PI / (2.0 + 2f64.sqrt()), 1e-15));
    rows.extend(guarded("nonexistence_margin", &format!("R={}", fmt_num(r1)), || {
        let b = probe::nonexistence_bound(r1, &graph::ConstantField(0.0))?;
        Ok::<_, probe::ProbeError>(vec![Row::flag(
            "nonexistence_margin",
            format!("R={}", fmt_num(r1)),
            b.slack,
            format!(">0 iff R<{}", fmt_num(threshold)),
            b.slack > 0.0,
        )])
    }));
    let n = cfg.n.unwrap_or(1);
    for a in grid_or(cfg, &[-0.1]) {
        let params = format!("{};n={n};alpha={}", pa(a), fmt_num(cfg.alpha));
        rows.extend(guarded("weighted_norm", &params, || {
            let p = make_profile(a)?;
            let phi = x_sin(&p, 1.0);
            let w = probe::weighted_norms_on(&phi, &p, n, cfg.alpha, cfg.res.0, cfg.res.1)?;
            Ok::<_, probe::ProbeError>(vec![
                Row::flag(
                    "weighted_norm.c2",
                    params.clone(),
                    w.c2_weighted,
                    "finite",
                    w.c2_weighted.is_finite(),
                ),
                Row::flag(
                    "weighted_norm.holder",
                    params.clone(),
                    w.holder_seminorm,
                    "finite",
                    w.holder_seminorm.is_finite(),
                ),
            ])
        }));
    }
    sort_rows(&mut rows);
    rows
}

// ---- mesh ------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSummary {
    pub mesh: Mesh,
    pub epsilon: f64,
    pub euler: i64,
}

pub const MESH_DEFAULT_A: f64 = -0.1;
pub const MESH_DEFAULT_LOBES: u32 = 20;

/// Closed torus with `n` lobes sampled on `res` points over the full period.
pub fn mesh(cfg: &RunConfig) -> Result<MeshSummary, String> {
    let a = cfg.a.as_ref().map_or(MESH_DEFAULT_A, |g| g[0]);
    let n = cfg.n.unwrap_or(MESH_DEFAULT_LOBES);
    let p = make_profile(a).map_err(|e| e.to_string())?;
    let half = n as f64 * p.tau();
    let patch = TorusPatch::with_lobes(p, n).map_err(|e| e.to_string())?;
    let mesh = grid_mesh(&patch, -half, half, cfg.res.0, cfg.res.1, true);
    let euler = mesh.euler_characteristic();
    Ok(MeshSummary {
        mesh,
        epsilon: patch.epsilon(),
        euler,
    })
}
