mod common;

use common::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rlab::phases::PhaseModel;
use rlab::spectral::{propagate, GridField};
use rlab::variation::*;

fn path_from(seed: u64, k: usize) -> SampledPath {
    let times: Vec<f64> = (0..k).map(|i| i as f64).collect();
    let values = (0..k).map(|i| random_field(1, 4.0, 4, seed * 100 + i as u64)).collect();
    SampledPath::new(times, values).unwrap()
}

fn dists(p: &SampledPath) -> Vec<Vec<f64>> {
    let k = p.values.len();
    (0..k).map(|i| (0..k).map(|j| if j > i { p.values[j].sub(&p.values[i]).l2_norm() } else { 0.0 }).collect()).collect()
}

#[test]
fn dp_matches_brute_force() {
    for seed in 0..1000u64 {
        let k = 2 + (seed % 11) as usize;
        let path = path_from(seed, k);
        let got = p_variation_norm(&path, 2.0).unwrap().variation;
        assert_eq!(got, brute_force_variation(&dists(&path), 2.0), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn dropping_a_sample_never_increases(seed in 0u64..10_000, k in 3usize..10, drop in 0usize..10) {
        let path = path_from(seed, k);
        let drop = drop % k;
        let mut q = path.clone();
        q.times.remove(drop);
        q.values.remove(drop);
        prop_assert!(p_variation_norm(&q, 2.0).unwrap().variation <= p_variation_norm(&path, 2.0).unwrap().variation);
    }

    #[test]
    fn homogeneous_and_monotone_in_p(seed in 0u64..10_000, k in 2usize..10, c in -5.0f64..5.0, p in 1.0f64..4.0) {
        let path = path_from(seed, k);
        let v = p_variation_norm(&path, p).unwrap().variation;
        let w = p_variation_norm(&path.scaled(c), p).unwrap().variation;
        prop_assert!((w - c.abs() * v).abs() <= 1e-12 * (1.0 + v));
        let v2 = p_variation_norm(&path, p + 0.5).unwrap().variation;
        prop_assert!(v2 <= v * (1.0 + 1e-12));
    }
}

#[test]
fn variation_examples() {
    let z = GridField::zeros(1, 1.0, 4).unwrap();
    let c = SampledPath::new(vec![0.0, 1.0, 2.0], vec![z.clone(); 3]).unwrap();
    assert_eq!(p_variation_norm(&c, 2.0).unwrap().variation, 0.0);
    // unit cell volume with four points on [0, 4)
    let e = |i: usize| {
        let mut g = GridField::zeros(1, 4.0, 4).unwrap();
        g.samples[i] = C::new(1.0, 0.0);
        g
    };
    let jump = SampledPath::new(vec![0.0, 1.0], vec![GridField::zeros(1, 4.0, 4).unwrap(), e(0)]).unwrap();
    assert!((p_variation_norm(&jump, 2.0).unwrap().variation - 1.0).abs() < 1e-15);
    // staircase with orthogonal unit increments on a 6-point grid
    let mut vals = vec![GridField::zeros(1, 8.0, 8).unwrap()];
    for i in 0..6 {
        let mut g = vals.last().unwrap().clone();
        g.samples[i] += C::new(1.0, 0.0);
        vals.push(g);
    }
    let stair = SampledPath::new((0..7).map(|i| i as f64).collect(), vals).unwrap();
    assert!((p_variation_norm(&stair, 2.0).unwrap().variation - 6f64.sqrt()).abs() < 1e-14);
    let one = SampledPath::new(vec![0.0], vec![z]).unwrap();
    assert!(p_variation_norm(&one, 2.0).unwrap().single_sample);
}

#[test]
fn free_waves_have_data_norm() {
    let f = random_band_field(2, 20.0, 32, &[0.5, 0.0], 1.0, 3);
    let g = random_band_field(2, 20.0, 32, &[-0.5, 0.3], 1.0, 4);
    for m in [PhaseModel::schroedinger(), PhaseModel::klein_gordon(1.0), PhaseModel::wave()] {
        let times: Vec<f64> = (0..20).map(|i| 0.37 * i as f64).collect();
        let vals = times.iter().map(|t| propagate(&f, &m, *t).unwrap()).collect();
        let v = flow_adapted_variation(&SampledPath::new(times.clone(), vals).unwrap(), &m, 2.0).unwrap();
        assert!((v.norm - f.l2_norm()).abs() < 1e-10 * f.l2_norm());
        assert!(v.variation < 1e-10 * f.l2_norm());
        // mid-time swap f -> g
        let vals = times.iter().map(|t| propagate(if *t < 3.5 { &f } else { &g }, &m, *t).unwrap()).collect();
        let v = flow_adapted_variation(&SampledPath::new(times, vals).unwrap(), &m, 2.0).unwrap();
        assert!((v.variation - g.sub(&f).l2_norm()).abs() < 1e-10 * f.l2_norm());
    }
}

#[test]
fn atoms() {
    let f = random_band_field(2, 20.0, 16, &[0.0, 0.0], 1.0, 5);
    let g = random_band_field(2, 20.0, 16, &[0.0, 0.0], 1.0, 6);
    let gs = GridField { samples: g.samples.iter().map(|a| a * (f.l2_norm() / g.l2_norm())).collect(), ..g };
    let (a, c) = build_atom(&[0.0, 1.0, 2.0], &[f.clone(), gs.clone()], 2.0).unwrap();
    assert!((c - (f.l2_norm().powi(2) + gs.l2_norm().powi(2)).sqrt()).abs() < 1e-12);
    for piece in &a.pieces {
        assert!((piece.l2_norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }
    assert!((a.lp_size(2.0) - 1.0).abs() < 1e-12);
    assert!(build_atom(&[0.0], &[], 2.0).is_err());
    // one interval: a free wave once pulled back
    let m = PhaseModel::klein_gordon(1.0);
    let (one, _) = build_atom(&[0.0, 5.0], &[f.clone()], 2.0).unwrap();
    let s = one.sample(&m, &[0.0, 1.0, 2.5, 4.9]).unwrap();
    let v = flow_adapted_variation(&s, &m, 2.0).unwrap();
    assert!(v.variation < 1e-12 && (v.norm - 1.0).abs() < 1e-12);
    // k orthogonal equal jumps of size a
    let k = 5;
    let mut vals = vec![];
    let mut cur = GridField::zeros(1, 8.0, 8).unwrap();
    for i in 0..k {
        cur.samples[i] += C::new(0.5, 0.0);
        vals.push(cur.clone());
    }
    let bps: Vec<f64> = (0..=k).map(|i| i as f64).collect();
    let st = StepPath::new(bps, vals).unwrap();
    let nrm = st.vp_norm(2.0).unwrap();
    // jumps: k of size 0.5 then the final drop to zero of size 0.5 sqrt(k)
    let expect = (k as f64 * 0.25 + 0.25 * k as f64).sqrt();
    assert!((nrm.variation - expect).abs() < 1e-12, "{nrm:?}");
}

#[test]
fn atom_transference() {
    let m = PhaseModel::wave();
    let grid = TimeGrid { t0: 0.0, dt: 0.25, count: 64 };
    for seed in 0..10u64 {
        let fs: Vec<GridField> = (0..4).map(|i| random_band_field(2, 16.0 * std::f64::consts::PI, 64, &[1.5, 0.0], 0.5, seed * 10 + i)).collect();
        let gs: Vec<GridField> = (0..4).map(|i| random_band_field(2, 16.0 * std::f64::consts::PI, 64, &[0.0, 1.5], 0.5, seed * 10 + 5 + i)).collect();
        let (u, _) = build_atom(&[0.0, 3.0, 7.0, 11.0, 16.0], &fs, 2.0).unwrap();
        let (v, _) = build_atom(&[0.0, 5.0, 8.0, 9.0, 16.0], &gs, 2.0).unwrap();
        let t = atom_transference_ratio(&u, &v, (&m, &m), 2.0, grid).unwrap();
        assert!(t.ratio <= t.aggregate * (1.0 + 1e-12));
        assert!(t.ratio <= 1.05 * t.max_pair_constant);
        let (u1, _) = build_atom(&[0.0, 16.0], &fs[..1], 2.0).unwrap();
        let (v1, _) = build_atom(&[0.0, 16.0], &gs[..1], 2.0).unwrap();
        let t1 = atom_transference_ratio(&u1, &v1, (&m, &m), 2.0, grid).unwrap();
        assert!((t1.ratio - t1.max_pair_constant).abs() < 1e-12 * t1.ratio);
    }
}

#[test]
fn high_modulation() {
    let l = 8.0 * std::f64::consts::PI;
    let grid = TimeGrid { t0: 0.0, dt: 0.125, count: 2048 };
    let f = random_band_field(2, l, 32, &[0.0, 0.0], 2.0, 7);
    let g = random_band_field(2, l, 32, &[0.5, 0.0], 1.5, 8);
    let free = StepPath::new(vec![0.0, 256.0], vec![f.clone()]).unwrap();
    let jump = StepPath::new(vec![0.0, 128.0, 256.0], vec![f, g]).unwrap();
    let mut worst: f64 = 0.0;
    for k in -3..=3 {
        let d = 2f64.powi(k);
        let r = high_modulation_ratio(&free, 1.0, 1.0, d, 2.0, grid).unwrap();
        assert!(r.ratio <= 1e-2, "free {d}: {r:?}");
        let r = high_modulation_ratio(&jump, 1.0, 1.0, d, 2.0, grid).unwrap();
        worst = worst.max(r.ratio);
        let ri = high_modulation_ratio(&jump, 1.0, 1.0, d, f64::INFINITY, grid).unwrap();
        assert!(ri.ratio <= 1.0, "{ri:?}");
    }
    assert!(worst <= 4.0, "{worst}");
    assert!(matches!(high_modulation_ratio(&jump, 1.0, 1.0, 1e-3, 2.0, grid), Err(rlab::Error::OutsideBand { .. })));
}
