use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::harmonics::{solve_christoffel, FieldEvaluator, HarmonicCoeffs, SphericalField};
use crate::kernels::{KernelMode, KernelTable};
use crate::quadrature::AdaptiveConfig;
use crate::sphere::{make_grid, SpherePoint, TangentDirection};

fn table() -> KernelTable {
    KernelTable::closed(2).unwrap()
}

fn field(l: usize, l_max: usize, terms: &[(usize, i64, f64)], base: f64) -> SphericalField {
    let mut c = HarmonicCoeffs::zeros(l_max);
    c.set(0, 0, base * (4.0 * PI).sqrt());
    for &(dl, m, v) in terms {
        c.set(dl, m, v);
    }
    SphericalField::from_coeffs(make_grid(l).unwrap(), c)
}

fn random_field(seed: u64, l_max: usize, amp: f64) -> SphericalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = vec![];
    for l in 2..=l_max {
        for m in -(l as i64)..=(l as i64) {
            terms.push((l, m, amp * rng.random_range(-1.0..1.0) / (l * l) as f64));
        }
    }
    field(2 * l_max + 4, l_max, &terms, 2.0)
}

fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    SpherePoint::new([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).unwrap()
}

#[test]
fn cr2_on_constant_is_half_value() {
    let f = field(12, 4, &[], 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let x = random_point(&mut rng);
        let xi = TangentDirection::at_angle(x, rng.random_range(0.0..PI));
        let v = criterion_cr2(&f, &x, &xi, &table()).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn cr1_on_constant_is_positive() {
    let f = field(12, 4, &[], 2.0);
    let x = SpherePoint::from_angles(0.7, 1.1);
    let xi = TangentDirection::at_angle(x, 0.3);
    let v = criterion_cr1(&f, &x, &xi, &table()).unwrap();
    assert!((v - 4.0 * PI).abs() < 1e-11, "{v}");
}

#[test]
fn criterion_matrices_reproduce_radii_matrix() {
    let f = random_field(7, 6, 0.8);
    let u = solve_christoffel(&f, 1e-8).unwrap();
    let uev = FieldEvaluator::new(u.coeffs().unwrap());
    let ev = CriterionEvaluator::new(&f, table()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..6 {
        let x = random_point(&mut rng);
        let r = radii_matrix(&uev, &x);
        let m2 = ev.matrix(Criterion::Cr2, &x);
        let m1 = ev.matrix(Criterion::Cr1, &x);
        for a in 0..2 {
            for b in 0..2 {
                assert!((m2.m[a][b] - r[a][b]).abs() < 1e-10, "cr2 {a}{b}: {} vs {}", m2.m[a][b], r[a][b]);
                assert!((m1.m[a][b] / (4.0 * PI) - r[a][b]).abs() < 1e-10, "cr1 {a}{b}");
            }
        }
        assert!(m2.err < 1e-9 && m1.err < 1e-8, "{} {}", m2.err, m1.err);
    }
}

#[test]
fn direct_kernels_agree_with_closed_forms_in_criteria() {
    let f = random_field(11, 3, 1.0);
    let cfg = AdaptiveConfig { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 60 };
    let direct = KernelTable::new(2, KernelMode::Direct(cfg)).unwrap();
    let x = SpherePoint::from_angles(1.2, 0.4);
    let xi = TangentDirection::at_angle(x, 0.9);
    for c in [Criterion::Cr1, Criterion::Cr2] {
        let a = CriterionEvaluator::new(&f, table()).unwrap().value(c, &x, &xi).unwrap();
        let b = CriterionEvaluator::new(&f, direct).unwrap().value(c, &x, &xi).unwrap();
        assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{c:?}: {a} vs {b}");
    }
}

#[test]
fn criteria_are_rotation_equivariant() {
    let f = random_field(5, 5, 1.0);
    let fev = FieldEvaluator::new(f.coeffs().unwrap());
    // rotation by 0.8 rad about (1, 2, 2)/3
    let (k, a) = ([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0], 0.8f64);
    let rot = |v: &[f64; 3], s: f64| -> [f64; 3] {
        let (sn, cs) = (s * a).sin_cos();
        let kv = crate::sphere::cross(&k, v);
        let kd = crate::sphere::dot(&k, v);
        [0, 1, 2].map(|i| v[i] * cs + kv[i] * sn + k[i] * kd * (1.0 - cs))
    };
    let fr = SphericalField::from_fn(f.grid().clone(), |z| fev.value(&SpherePoint::new(rot(z.coords(), -1.0)).unwrap()))
        .analyzed(5)
        .unwrap();
    let x = SpherePoint::from_angles(0.9, 2.1);
    let xi = TangentDirection::at_angle(x, 0.5);
    let xr = SpherePoint::new(rot(x.coords(), 1.0)).unwrap();
    let xir = TangentDirection::new(xr, rot(xi.dir(), 1.0)).unwrap();
    for c in [Criterion::Cr1, Criterion::Cr2] {
        let v0 = CriterionEvaluator::new(&f, table()).unwrap().value(c, &x, &xi).unwrap();
        let v1 = CriterionEvaluator::new(&fr, table()).unwrap().value(c, &xr, &xir).unwrap();
        assert!((v0 - v1).abs() < 1e-10, "{c:?}: {v0} vs {v1}");
    }
}

#[test]
fn cap_radius_does_not_change_values() {
    let f = random_field(9, 4, 1.0);
    let x = SpherePoint::from_angles(0.4, 5.0);
    let xi = TangentDirection::at_angle(x, 2.0);
    let mut prev: Option<f64> = None;
    for delta in [0.4, 0.2, 0.1, 0.05] {
        let ev = CriterionEvaluator::with_cap(&f, table(), delta).unwrap();
        let v = ev.value(Criterion::Cr1, &x, &xi).unwrap();
        if let Some(p) = prev {
            assert!((v - p).abs() < 1e-10);
        }
        prev = Some(v);
    }
}

#[test]
fn witness_must_be_based_at_x() {
    let f = field(12, 4, &[], 2.0);
    let x = SpherePoint::from_angles(0.4, 5.0);
    let xi = TangentDirection::at_angle(SpherePoint::from_angles(1.0, 1.0), 0.0);
    assert!(criterion_cr2(&f, &x, &xi, &table()).is_err());
}

#[test]
fn non_positive_field_is_rejected() {
    let f = field(12, 4, &[(2, 0, 20.0)], 2.0);
    let x = SpherePoint::from_angles(0.4, 5.0);
    let xi = TangentDirection::at_angle(x, 0.0);
    let err = criterion_cr2(&f, &x, &xi, &table()).unwrap_err();
    assert_eq!(err.name(), "NotPositive");
}

#[test]
fn sweep_on_constant() {
    let f = field(8, 2, &[], 2.0);
    let r = sweep(&f, Criterion::Cr2, 8, &table()).unwrap();
    let s = r.get(Criterion::Cr2).unwrap();
    assert_eq!(s.verdict, Verdict::Holds);
    assert!((s.min_margin - 1.0).abs() < 1e-8);
    assert!((s.exact_min - 1.0).abs() < 1e-8);
    assert!(sweep(&f, Criterion::Cr2, 1, &table()).is_err());
}

#[test]
fn sweep_signs_match_hessian() {
    for (eps, convex) in [(0.5, true), (4.0, false)] {
        let f = field(16, 6, &[(2, 0, eps)], 2.0);
        let u = solve_christoffel(&f, 1e-8).unwrap();
        let h = hessian_min(&u).unwrap();
        assert_eq!(h.min_eig > 0.0, convex, "eps {eps}: {}", h.min_eig);
        for c in [Criterion::Cr1, Criterion::Cr2] {
            let r = sweep(&f, c, 8, &table()).unwrap();
            let s = r.get(c).unwrap();
            let want = if convex { Verdict::Holds } else { Verdict::Fails };
            assert_eq!(s.verdict, want, "{c:?} eps {eps}");
            let scale = if c == Criterion::Cr1 { 4.0 * PI } else { 1.0 };
            assert!((s.exact_min / scale - h.min_eig).abs() < 1e-8);
            assert!(s.min_margin >= s.exact_min - 1e-12);
        }
    }
}

#[test]
fn hessian_min_on_constant_and_continuity() {
    let u = field(10, 3, &[], 1.0).analyzed(3).unwrap();
    assert!((hessian_min(&u).unwrap().min_eig - 1.0).abs() < 1e-12);
    let mut prev = 1.0;
    for k in 1..5 {
        let u = field(10, 3, &[(2, 0, 0.05 * k as f64)], 1.0);
        let h = hessian_min(&u).unwrap().min_eig;
        assert!(h < prev && prev - h < 0.1);
        prev = h;
    }
}

#[test]
fn sufficient_conditions_on_constants() {
    let f = field(10, 3, &[], 2.0);
    let t32 = check_t32(&f, 1.0, 0.07).unwrap();
    assert!(t32.holds && t32.lhs < 1e-12);
    let t33 = check_t33(&f, 8, 4).unwrap();
    assert!(t33.holds && t33.worst < 0.0);
    // −2ct/(1+t²)^{3/2} is maximal (closest to zero) at the ends of the t range
    let t = 1e3f64;
    let expect = -4.0 * t / (1.0 + t * t).powf(1.5);
    assert!((t33.worst - expect).abs() < 1e-12 * expect.abs().max(1e-9) + 1e-15, "{} {expect}", t33.worst);
    let pc = check_pogorelov(&f).unwrap();
    assert!(pc.holds && (pc.lhs - 2.0).abs() < 1e-12);
    let gm = check_guan_ma(&f).unwrap();
    assert!(gm.holds && (gm.min_eig - 0.5).abs() < 1e-12);
}

#[test]
fn pogorelov_decreases_linearly() {
    let y = (5.0 / (4.0 * PI)).sqrt();
    let vals: Vec<f64> = [0.1, 0.2, 0.3]
        .iter()
        .map(|e| check_pogorelov(&field(12, 4, &[(2, 0, *e)], 2.0)).unwrap().lhs)
        .collect();
    assert!(vals[0] < 2.0);
    let d1 = vals[0] - vals[1];
    let d2 = vals[1] - vals[2];
    assert!((d1 - d2).abs() < 1e-12 && d1 > 0.0 && d1 < 4.0 * y);
}

#[test]
fn guan_ma_reanalysis_matches_chain_rule() {
    let f = random_field(13, 4, 0.6);
    let gm = check_guan_ma(&f).unwrap();
    assert!((gm.min_eig - gm.chain_rule_min_eig).abs() < 1e-10, "{} {}", gm.min_eig, gm.chain_rule_min_eig);
}

#[test]
fn t32_threshold_is_one_sided() {
    let f = field(16, 4, &[(2, 0, 0.2)], 2.0);
    let c = check_t32(&f, 1.0, 1.0).unwrap();
    assert!(c.holds);
    let tight = check_t32(&f, 1.0, 0.999 * c.lhs / f.min_with_node().0).unwrap();
    assert!(!tight.holds);
}
