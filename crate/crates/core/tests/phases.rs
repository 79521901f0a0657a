use proptest::prelude::*;
use rlab::phases::*;
use rlab::Error;

fn kg_shells() -> (FreqRegion, FreqRegion) {
    (
        FreqRegion::CapSector { axis: vec![1.0, 0.0], half_angle: 0.3, r_in: 0.5, r_out: 1.5 },
        FreqRegion::CapSector { axis: vec![0.0, 1.0], half_angle: 0.3, r_in: 0.5, r_out: 1.5 },
    )
}

fn fd_check(model: &PhaseModel, xi: &[f64]) {
    let h = 1e-4;
    let g = model.gradient(xi).unwrap();
    let hs = model.hessian(xi).unwrap();
    let n = xi.len();
    for i in 0..n {
        let mut p = xi.to_vec();
        let mut m = xi.to_vec();
        p[i] += h;
        m[i] -= h;
        let fd = (model.value(&p) - model.value(&m)) / (2.0 * h);
        let scale = g.iter().map(|v| v.abs()).fold(1e-3, f64::max);
        assert!((fd - g[i]).abs() <= 1e-6 * scale, "grad {i}: fd {fd} vs {}", g[i]);
        let gp = model.gradient(&p).unwrap();
        let gm = model.gradient(&m).unwrap();
        let hscale = hs.iter().map(|v| v.abs()).fold(1e-3, f64::max);
        for j in 0..n {
            let fdh = (gp[j] - gm[j]) / (2.0 * h);
            assert!((fdh - hs[(j, i)]).abs() <= 1e-6 * hscale, "hess {j}{i}");
            assert!((hs[(i, j)] - hs[(j, i)]).abs() <= 1e-12 * hscale);
        }
    }
}

proptest! {
    #[test]
    fn derivatives_match_finite_differences(
        r in 1.0f64/16.0..16.0, th in 0.0f64..6.28, ph in 0.0f64..3.14,
        mass in 0.0f64..2.0, kind in 0usize..3, n in 2usize..4, neg in any::<bool>()
    ) {
        let mut xi = vec![r * th.cos() * ph.sin(), r * th.sin() * ph.sin()];
        if n == 3 { xi.push(r * ph.cos()); } else { xi = vec![r * th.cos(), r * th.sin()]; }
        let mut m = match kind {
            0 => PhaseModel::schroedinger(),
            1 => PhaseModel::klein_gordon(mass),
            _ => PhaseModel::wave(),
        };
        if neg { m = m.with_sign(-1.0); }
        fd_check(&m, &xi);
    }

    #[test]
    fn rescaled_derivatives_match_finite_differences(
        x1 in 0.8f64..1.2, x2 in -0.3f64..0.3, a_exp in 1i32..4, l_exp in 2i32..5, neg in any::<bool>()
    ) {
        let alpha = 0.5f64.powi(a_exp);
        let lambda = 2f64.powi(l_exp);
        let sign = if neg { -1.0 } else { 1.0 };
        let m = PhaseModel::klein_gordon(1.0).with_sign(sign).with_rescale(Rescale::CapI { alpha, lambda });
        fd_check(&m, &[x1, x2 + 1.0]);
    }

    #[test]
    fn wedge_inequality(x in prop::array::uniform3(-5.0f64..5.0), y in prop::array::uniform3(-5.0f64..5.0),
                        w in prop::array::uniform3(-1.0f64..1.0)) {
        let nw = (w[0]*w[0] + w[1]*w[1] + w[2]*w[2]).sqrt();
        prop_assume!(nw > 1e-3);
        let om: Vec<f64> = w.iter().map(|v| v / nw).collect();
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let n = |a: &[f64]| d(a, a).sqrt();
        let lhs = wedge_norm(&x, &y);
        let rhs = n(&y) * d(&x, &om).abs() - n(&x) * d(&y, &om).abs();
        prop_assert!(lhs >= rhs - 1e-12 * (1.0 + n(&x) * n(&y)));
    }
}

#[test]
fn wedge_example_equality() {
    let lhs = wedge_norm(&[1.0, 0.0], &[0.0, 1.0]);
    assert_eq!(lhs, 1.0);
    // |y||x.w| - |x||y.w| with w = e1
    assert_eq!(1.0 * 1.0 - 1.0 * 0.0, 1.0);
}

#[test]
fn schroedinger_transversality_is_min_distance() {
    let s = PhaseModel::schroedinger();
    let r1 = FreqRegion::ball(&[1.0, 0.0], 0.1);
    let r2 = FreqRegion::ball(&[-1.0, 0.0], 0.1);
    let m = transversality_margin(&s, &s, &r1, &r2, 200).unwrap();
    assert!(m >= 1.8);
    let a = r1.sample(200, 0).unwrap();
    let b = r2.sample(200, 0).unwrap();
    let mut best = f64::INFINITY;
    for x in &a {
        for y in &b {
            best = best.min(((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt());
        }
    }
    assert!((m - best).abs() <= 1e-12);
}

#[test]
fn identical_configuration_has_zero_margin() {
    let k = PhaseModel::klein_gordon(1.0);
    let r = FreqRegion::ball(&[1.0, 0.0], 0.2);
    assert_eq!(transversality_margin(&k, &k, &r, &r, 50).unwrap(), 0.0);
    let rep = assumption_report(&k, &k, &r, &r, 4, &[Shift::new(0.0, &[0.0, 0.0])], 50, 0).unwrap();
    assert_eq!(rep.a1_margin, 0.0);
    assert!(!rep.assumption_ok);
}

#[test]
fn wave_vs_kg_matches_dense_grid_search() {
    let wave = PhaseModel::wave();
    let kg = PhaseModel::klein_gordon(1.0);
    let shell = FreqRegion::Annulus { center: vec![0.0, 0.0], r_in: 0.95, r_out: 1.05 };
    let sampled = transversality_margin(&wave, &kg, &shell, &shell, 400).unwrap();
    // dense polar grid with 100 x 100 = 10^4 points per factor, reduced by rotation invariance
    let mut best = f64::INFINITY;
    for i in 0..100 {
        let r1 = 0.95 + 0.1 * i as f64 / 99.0;
        let g1 = wave.gradient(&[r1, 0.0]).unwrap();
        for j in 0..100 {
            let r2 = 0.95 + 0.1 * (j % 10) as f64 / 9.0;
            let th = std::f64::consts::PI * (j / 10) as f64 / 90.0;
            let g2 = kg.gradient(&[r2 * th.cos(), r2 * th.sin()]).unwrap();
            best = best.min(((g1[0] - g2[0]).powi(2) + (g1[1] - g2[1]).powi(2)).sqrt());
        }
    }
    assert!(sampled > 0.0 && best > 0.0);
    assert!((sampled - best).abs() < 0.01, "sampled {sampled} grid {best}");
}

#[test]
fn schroedinger_curvature_is_one() {
    let s = PhaseModel::schroedinger();
    let r1 = FreqRegion::ball(&[1.0, 0.0], 0.05);
    let r2 = FreqRegion::ball(&[-1.0, 0.0], 0.05);
    for sh in sampled_shifts(&s, &s, &r1, &r2, 5, 1).unwrap() {
        let c = curvature_margin_on_sigma(&s, &s, &r1, &r2, &sh, 100).unwrap();
        assert!(!c.empty_surface);
        assert!((c.value - 1.0).abs() < 1e-10, "{}", c.value);
    }
}

#[test]
fn kg_curvature_exceeds_derived_bound() {
    let k = PhaseModel::klein_gordon(1.0);
    let (r1, r2) = kg_shells();
    let a1 = transversality_margin(&k, &k, &r1, &r2, 200).unwrap();
    let bound = a1.powi(4) / (32.0 * 2f64.powi(6));
    for sh in sampled_shifts(&k, &k, &r1, &r2, 6, 2).unwrap() {
        for (ma, mb, ra, rb, s) in [(&k, &k, &r1, &r2, sh.clone()), (&k, &k, &r2, &r1, sh.reversed())] {
            let c = curvature_margin_on_sigma(ma, mb, ra, rb, &s, 120).unwrap();
            assert!(c.value >= bound, "{} < {bound}", c.value);
        }
    }
}

#[test]
fn degenerate_pair_is_skipped() {
    let s = PhaseModel::schroedinger();
    let p = vec![vec![0.3, 0.2], vec![0.3, 0.2]];
    assert_eq!(curvature_quotient_min(&s, &p), Err(Error::NoAdmissiblePairs));
}

#[test]
fn report_schroedinger_separated_balls() {
    let s = PhaseModel::schroedinger();
    let r1 = FreqRegion::ball(&[1.0, 0.0], 0.05);
    let r2 = FreqRegion::ball(&[-1.0, 0.0], 0.05);
    let shifts = sampled_shifts(&s, &s, &r1, &r2, 4, 9).unwrap();
    let rep = assumption_report(&s, &s, &r1, &r2, 4, &shifts, 100, 3).unwrap();
    assert!(rep.diam_condition_ok, "{rep:?}");
    assert!((rep.a2_margin - 1.0).abs() < 1e-10);
    assert_eq!(rep.d1_estimate, 0.5 * rep.a1_margin * rep.a2_margin);
    assert!(rep.assumption_ok);
    // the witness recomputes the margin
    let w = rep.a1_witness.unwrap();
    let d = ((w.xi[0] - w.eta[0]).powi(2) + (w.xi[1] - w.eta[1]).powi(2)).sqrt();
    assert_eq!(d, rep.a1_margin);
}

#[test]
fn report_kg_different_masses_transversal() {
    let a = PhaseModel::klein_gordon(0.1);
    let b = PhaseModel::klein_gordon(1.0);
    let shell = FreqRegion::Annulus { center: vec![0.0, 0.0], r_in: 0.9, r_out: 1.1 };
    let shifts = sampled_shifts(&a, &b, &shell, &shell, 3, 4).unwrap();
    let rep = assumption_report(&a, &b, &shell, &shell, 4, &shifts, 100, 0).unwrap();
    assert!(rep.a1_margin > 0.0);
}

#[test]
fn sigma_solve_fixed_point_and_distance() {
    let s = PhaseModel::schroedinger();
    let xi0 = [1.0, 0.2];
    let h = [2.0, 0.1];
    let f0 = s.value(&xi0) - s.value(&[xi0[0] - h[0], xi0[1] - h[1]]);
    let on = Shift::new(f0, &h);
    let sol = sigma_solve(&s, &s, &on, &xi0, 1e-8).unwrap();
    assert_eq!(sol.xi, xi0.to_vec());

    let off = Shift::new(f0 - 0.01, &h);
    let sol = sigma_solve(&s, &s, &off, &xi0, 1e-10).unwrap();
    assert!(sigma_residual(&s, &s, &off, &sol.xi).abs() <= 1e-10);
    let moved = ((sol.xi[0] - xi0[0]).powi(2) + (sol.xi[1] - xi0[1]).powi(2)).sqrt();
    assert!(moved <= 0.02);
    // oracle: integrate the normalized flow with small Euler steps until F changes sign
    let mut x = xi0.to_vec();
    let mut arc = 0.0;
    let ds = 1e-6;
    let f = |x: &[f64]| sigma_residual(&s, &s, &off, x);
    let sgn = f(&x).signum();
    while f(&x).signum() == sgn {
        let g = [h[0], h[1]];
        let ng = (g[0] * g[0] + g[1] * g[1]).sqrt();
        x[0] -= sgn * ds * g[0] / ng;
        x[1] -= sgn * ds * g[1] / ng;
        arc += ds;
    }
    assert!((arc - moved).abs() < 2e-6, "{arc} {moved}");
}

#[test]
fn sigma_solve_distance_bound_kg() {
    let k = PhaseModel::klein_gordon(1.0);
    let (r1, r2) = kg_shells();
    let a1 = transversality_margin(&k, &k, &r1, &r2, 200).unwrap();
    for sh in sampled_shifts(&k, &k, &r1, &r2, 10, 5).unwrap() {
        for start in r1.sample(10, 8).unwrap() {
            let f0 = sigma_residual(&k, &k, &sh, &start).abs();
            if let Ok(sol) = sigma_solve(&k, &k, &sh, &start, 1e-10) {
                let moved = ((sol.xi[0] - start[0]).powi(2) + (sol.xi[1] - start[1]).powi(2)).sqrt();
                assert!(moved <= 2.0 * f0 / a1 + 1e-9, "moved {moved} f0 {f0}");
            }
        }
    }
}

#[test]
fn sigma_solve_reports_nonconvergence() {
    // |<xi> - <xi - h>| <= |h| = 1 < a, so F never vanishes
    let k = PhaseModel::klein_gordon(1.0);
    let r = sigma_solve(&k, &k, &Shift::new(10.0, &[1.0, 0.0]), &[0.5, 0.5], 1e-8);
    assert!(matches!(r, Err(Error::NonConvergence { .. })));
}

#[test]
fn cone_margin_schroedinger_exceeds_derived_bound() {
    let s = PhaseModel::schroedinger();
    let r1 = FreqRegion::ball(&[1.0, 0.0], 0.05);
    let r2 = FreqRegion::ball(&[-1.0, 0.0], 0.05);
    let shifts = sampled_shifts(&s, &s, &r1, &r2, 3, 21).unwrap();
    let rep = assumption_report(&s, &s, &r1, &r2, 4, &shifts, 100, 0).unwrap();
    for sh in &shifts {
        // k = 1 carries the cone, eta ranges over region 2
        let m = cone_transversality_margin(&s, &s, &r2, &r1, sh, 60).unwrap();
        let grad_sup = 1.05;
        let bound = rep.d1_estimate / ((1.0 + grad_sup) * 1.0);
        assert!(m >= 0.9 * bound, "margin {m} bound {bound}");
    }
}
