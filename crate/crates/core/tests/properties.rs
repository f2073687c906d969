//! Randomized identities over the public API.

use std::f64::consts::PI;

use delab_core::cylinder::CylinderPatch;
use delab_core::graph::{first_variation, first_variation_fd, radial, Angular, SeparableField};
use delab_core::profile::make_profile;
use delab_core::special_fn::{complete_e, complete_k, jacobi_sncndn, EllipticModulus};
use delab_core::surface::mean_curvature;
use delab_core::torus::TorusPatch;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_squares(k in 0.0..0.999_f64, s in -20.0..20.0_f64) {
        let m = EllipticModulus::from_k(k).unwrap();
        let (sn, cn, dn) = jacobi_sncndn(s, m).unwrap();
        prop_assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
        prop_assert!((dn * dn + k * k * sn * sn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn legendre_relation(k in 0.01..0.99_f64) {
        // E K' + E' K - K K' = π/2
        let m = EllipticModulus::from_k(k).unwrap();
        let c = EllipticModulus::from_k((1.0 - k * k).sqrt()).unwrap();
        let (kk, ee) = (complete_k(m).unwrap(), complete_e(m));
        let (kc, ec) = (complete_k(c).unwrap(), complete_e(c));
        prop_assert!((ee * kc + ec * kk - kk * kc - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn delaunay_cylinders_are_cmc(a in -0.49..0.5_f64, t in -6.0..6.0_f64, th in -PI..PI) {
        prop_assume!(a.abs() > 1e-3);
        let patch = CylinderPatch::new(make_profile(a).unwrap());
        prop_assert!((mean_curvature(&patch, t, th).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn profile_conformal(a in -0.5..0.5_f64, t in -10.0..10.0_f64) {
        prop_assume!(a != 0.0);
        let q = make_profile(a).unwrap().eval(t);
        prop_assert!((q.x * q.x - q.dx * q.dx - q.dz * q.dz).abs() < 1e-10);
    }

    #[test]
    fn torus_first_variation(t in -2.0..2.0_f64, th in -PI..PI, freq in 0.5..2.0_f64) {
        let patch = TorusPatch::with_epsilon(make_profile(0.15).unwrap(), 5e-3).unwrap();
        let phi = SeparableField::new(radial::sine(freq, 0.3), Angular::Cos(2));
        let a = first_variation(&patch, &phi, t, th).unwrap();
        let b = first_variation_fd(&patch, &phi, t, th).unwrap();
        prop_assert!((a - b).abs() < 1e-6 * b.abs().max(1.0));
    }
}
