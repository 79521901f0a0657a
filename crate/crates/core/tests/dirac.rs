use nalgebra::Vector4;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::Rng;
use rlab::dirac::*;
use rlab::util::rng::rng;

fn spinor(r: &mut impl Rng) -> Vector4<C> {
    Vector4::from_fn(|_, _| C::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

fn max_entry(m: &M4) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn projector_identities(x in prop::array::uniform3(-50.0f64..50.0), mass in 0.0f64..3.0) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() + mass * mass > 1e-6);
        let a = DiracAlgebra::new();
        let p = a.projector(&x, mass, 1.0).unwrap();
        let q = a.projector(&x, mass, -1.0).unwrap();
        prop_assert!(max_entry(&(p * p - p)) < 1e-14);
        prop_assert!(max_entry(&(q * q - q)) < 1e-14);
        prop_assert!(max_entry(&(p * q)) < 1e-14);
        prop_assert!(max_entry(&(p + q - M4::identity())) < 1e-14);
        prop_assert!(max_entry(&(p.adjoint() - p)) < 1e-14);
    }

    #[test]
    fn modulation_symmetries_exact(x in prop::array::uniform3(-20.0f64..20.0), y in prop::array::uniform3(-20.0f64..20.0), mm in 0.1f64..2.0) {
        prop_assert_eq!(modulation_value(&x, &y, 1.0, 1.0, mm, 1.0), modulation_value(&y, &x, -1.0, -1.0, mm, 1.0));
        prop_assert_eq!(modulation_value(&x, &y, 1.0, -1.0, mm, 1.0), modulation_value(&y, &x, 1.0, -1.0, mm, 1.0));
        prop_assert_eq!(modulation_value(&x, &y, -1.0, 1.0, mm, 1.0), modulation_value(&y, &x, -1.0, 1.0, mm, 1.0));
    }
}

#[test]
fn alpha_symbol_eigen_decomposition() {
    // alpha = <xi>_M (Pi+ - Pi-), checked against the matrix square alpha^2 = <xi>^2 I
    let a = DiracAlgebra::new();
    let x = [0.3, -1.2, 2.0];
    let al = a.alpha_symbol(&x, 0.7);
    let b = bracket(&x, 0.7);
    let diff = al * al - M4::identity() * C::new(b * b, 0.0);
    assert!(max_entry(&diff) < 1e-13);
    let pp = a.projector(&x, 0.7, 1.0).unwrap();
    let pm = a.projector(&x, 0.7, -1.0).unwrap();
    assert!(max_entry(&((pp - pm) * C::new(b, 0.0) - al)) < 1e-13);
}

#[test]
fn reduction_identity_on_range_plane_waves() {
    let a = DiracAlgebra::new();
    let mut r = rng(11, 0);
    for _ in 0..100 {
        let x = [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)];
        let tau = r.gen_range(-5.0..5.0);
        let mass = r.gen_range(0.0..2.0);
        let psi0 = spinor(&mut r);
        for s in [1.0, -1.0] {
            assert!(a.reduction_residual(&x, tau, mass, s, &psi0).unwrap() < 1e-12);
        }
    }
}

#[test]
fn reduction_identity_needs_range_spinor() {
    // a spinor with a component in the opposite range breaks the identity
    let a = DiracAlgebra::new();
    let x = [1.0, 2.0, -0.5];
    let psi = Vector4::new(C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0));
    let d = a.reduction_defect(&x, 0.4, 1.0, 1.0, &psi).unwrap();
    assert!(d > 0.1, "{d}");
}

#[test]
fn null_symbol_vanishes_on_aligned_massless_pairs() {
    let a = DiracAlgebra::new();
    let x = [1.0, 2.0, 2.0];
    let y = [2.0, 4.0, 4.0];
    let (l, _) = null_symbol_ratio(&a, &x, &y, 1.0, 1.0, 0.0).unwrap();
    assert!(l < 1e-14);
    let (l, h) = null_symbol_ratio(&a, &x, &[-1.0, -2.0, -2.0], 1.0, -1.0, 0.0).unwrap();
    assert!(l < 1e-14 && h < 1e-14);
}

#[test]
fn null_symbol_matches_gamma_identity() {
    // Pi1 gamma^0 Pi2 = Pi1 [(s2 eta/<eta> - s1 xi/<xi>).gamma + (s1 M/<xi> + s2 M/<eta>) I] Pi2 / 2
    let a = DiracAlgebra::new();
    let mut r = rng(5, 1);
    for _ in 0..200 {
        let x = [r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0)];
        let y = [r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0)];
        let m = r.gen_range(0.1..2.0);
        for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let p1 = a.projector(&x, m, s1).unwrap();
            let p2 = a.projector(&y, m, s2).unwrap();
            let (bx, by) = (bracket(&x, m), bracket(&y, m));
            let mut mid = M4::identity() * C::new(s1 * m / bx + s2 * m / by, 0.0);
            for j in 0..3 {
                mid += a.gamma[j + 1] * C::new(s2 * y[j] / by - s1 * x[j] / bx, 0.0);
            }
            let lhs = p1 * a.gamma[0] * p2;
            assert!(max_entry(&(lhs - p1 * mid * p2 * C::new(0.5, 0.0))) < 1e-13);
        }
    }
}

#[test]
fn null_constant_stable_across_seeds() {
    let cs: Vec<f64> = (0..3).map(|s| null_constant(1.0, 1.0, 10.0, 100_000, s).unwrap().constant).collect();
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |a, c| (a.0.min(*c), a.1.max(*c)));
    assert!(hi.is_finite() && hi < 1.0, "{cs:?}");
    assert!(hi / lo - 1.0 < 0.05, "{cs:?}");
    // aligned equal pairs with equal signs give M <r> / (2 r), largest on the inner shell
    assert!((hi - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9, "{cs:?}");
}

#[test]
fn null_symbol_bound_degenerates_at_low_frequency() {
    // with M > 0 both projectors tend to (I + gamma^0)/2 while the bracket tends to 0
    let a = DiracAlgebra::new();
    let (l, h) = null_symbol_ratio(&a, &[0.01, 0.0, 0.0], &[0.01, 0.0, 0.0], 1.0, 1.0, 1.0).unwrap();
    assert!(l > 0.99 && l / h > 40.0, "{l} {h}");
}

#[test]
fn null_symbol_massless_scaling() {
    let a = DiracAlgebra::new();
    let x = [0.3, 1.0, -0.2];
    let y = [-1.0, 0.5, 0.7];
    let (l1, _) = null_symbol_ratio(&a, &x, &y, 1.0, -1.0, 0.0).unwrap();
    let (l2, _) = null_symbol_ratio(&a, &[3.0, 10.0, -2.0], &[-10.0, 5.0, 7.0], 1.0, -1.0, 0.0).unwrap();
    assert!((l1 - l2).abs() < 1e-13);
    assert_eq!(null_symbol_ratio(&a, &[0.0; 3], &y, 1.0, 1.0, 0.0), Err(rlab::Error::UndefinedProjector));
}

#[test]
fn modulation_examples() {
    let x = [1.5, -2.0, 0.5];
    assert!((modulation_value(&x, &x, 1.0, 1.0, 0.7, 1.0) - 1.0).abs() < 1e-14);
    assert!((modulation_value(&[0.0; 3], &[0.0; 3], -1.0, 1.0, 0.7, 1.0) - 2.4).abs() < 1e-14);
    for r in [0.1, 1.0, 7.0] {
        let v = modulation_value(&[r, 0.0, 0.0], &[-r, 0.0, 0.0], 1.0, -1.0, 0.5, 1.0);
        assert!(v < 1e-14);
    }
}

#[test]
fn modulation_identity_and_bounds() {
    let mut r = rng(3, 0);
    let mut worst_id: f64 = 0.0;
    let mut worst_same = f64::INFINITY;
    for _ in 0..100_000 {
        let x = [r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)];
        let y = [r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)];
        let ms = (r.gen_range(0.0..2.0), r.gen_range(0.0..2.0), r.gen_range(0.0..2.0));
        let pm = if r.gen::<bool>() { 1.0 } else { -1.0 };
        worst_id = worst_id.max(modulation_identity_residual(&x, &y, 1.0, ms, pm).identity_residual);
        worst_same = worst_same.min(modulation_identity_residual(&x, &y, 1.0, (1.0, 1.0, 1.0), 1.0).same_sign);
    }
    assert!(worst_id < 1e-12, "{worst_id}");
    assert!(worst_same >= 0.125, "{worst_same}");
}

#[test]
fn modulation_identity_diagonal() {
    let x = [0.4, 2.0, -1.0];
    let (l, h) = modulation_identity_sides(&x, &x, 0.8, 0.8, 1.3, 1.0);
    let exact = (1.3f64.powi(2) - 4.0 * bracket(&x, 0.8).powi(2)).abs();
    assert!((l - exact).abs() < 1e-12 && (h - exact).abs() < 1e-12);
}

#[test]
fn resonance_regimes() {
    let non = resonance_minimum(1.0, 1.0, 10.0, 1e-6).unwrap();
    // antiparallel pair on the outer shell
    let exact = 2.0 * 101f64.sqrt() - 401f64.sqrt();
    assert!((non.min_value - exact).abs() < 1e-9, "{non:?}");
    assert!(non.min_value >= 3.0 / (2.0 * 2.0 * bracket(&[10.0], 1.0)));
    assert_eq!(non.classification, Regime::NonResonant);
    let weak = resonance_minimum(0.5, 1.0, 10.0, 1e-6).unwrap();
    assert!(weak.min_value <= 1e-8);
    assert_eq!(weak.classification, Regime::WeaklyResonant);
    let res = resonance_minimum(0.25, 1.0, 10.0, 1e-6).unwrap();
    assert!(res.min_value <= 1e-6);
    assert_eq!(res.classification, Regime::Resonant);
    for r in [&non, &weak, &res] {
        assert_eq!(r.classification, r.expected);
    }
    let (xi, eta) = res.argmin;
    assert!(modulation_value(&xi, &eta, 1.0, -1.0, 0.25, 1.0) <= 1e-6);
}

#[test]
fn minus_plus_lower_bound() {
    let mut r = rng(9, 0);
    for _ in 0..10_000 {
        let x = [r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)];
        let y = [r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)];
        for m in [0.25, 1.0] {
            assert!(modulation_value(&x, &y, -1.0, 1.0, m, 1.0) >= 1.0 + 2.0 * m);
        }
    }
}

#[test]
fn multiplier_ratio_bounded_and_linear() {
    let r = nullform_multiplier_ratio(8.0, 0.25, NullMode::Cap, 2.0, 1.0, 1.0, 50, 0).unwrap();
    assert!(r.max_ratio <= 10.0);
    for (mode, lam, als) in [
        (NullMode::Cap, 32.0, [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0]),
        (NullMode::CapCube, 8.0, [1.0 / 256.0, 1.0 / 128.0, 1.0 / 64.0, 1.0 / 32.0]),
    ] {
        let v: Vec<f64> = als
            .iter()
            .map(|&a| nullform_multiplier_ratio(lam, a, mode, 2.0, 1.0, 1.0, 5, 0).unwrap().mean_relative_numerator)
            .collect();
        let f = rlab::util::fit::loglog_fit(&als, &v).unwrap();
        assert!((f.slope - 1.0).abs() <= 0.2, "{mode:?} {}", f.slope);
    }
    assert!(nullform_multiplier_ratio(8.0, 0.01, NullMode::Cap, 2.0, 1.0, 1.0, 5, 0).is_err());
    assert!(nullform_multiplier_ratio(8.0, 0.5, NullMode::CapCube, 2.0, 1.0, 1.0, 5, 0).is_err());
}
