//! Bush counts: tubes of the first family through a neighbourhood of a fixed cube `q0`
//! whose frequencies lie near `Sigma_1(h)`, meeting a second-family tube far from `q0`.

use super::incidence::IncidenceTable;
use super::{PhasePoint, Tube};
use crate::error::{Error, Result};
use crate::phases::geometry::SIGMA_TOL;
use crate::phases::{sigma_solve, PhaseModel, Shift};
use crate::util::fit::loglog_fit;
use crate::util::rng::rng;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BushCount {
    /// `#{(q, gamma_1)}` with both tubes meeting `R^delta q` and `dist(q, q0) >= R^{1-delta} / 4`.
    pub count: usize,
    /// `Gamma_1^{**}(q0, h)` as tube indices.
    pub bush: Vec<usize>,
    /// Distinct cubes contributing to the count.
    pub cubes: usize,
}

fn near_sigma(tube: &Tube, m1: &PhaseModel, m2: &PhaseModel, shift: &Shift) -> bool {
    let xi = tube.gamma.xi0();
    let r = tube.scale();
    match sigma_solve(m1, m2, shift, &xi, SIGMA_TOL) {
        Ok(sol) => sol.xi.iter().zip(&xi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= 1.0 / r.sqrt(),
        Err(_) => false,
    }
}

fn check(table: &IncidenceTable, q0: usize, gamma2: usize) -> Result<()> {
    if q0 >= table.cubes.len() {
        return Err(Error::InvalidParameter(format!("cube index {q0} out of range")));
    }
    if gamma2 >= table.tubes[1].len() {
        return Err(Error::InvalidParameter(format!("second-family tube index {gamma2} out of range")));
    }
    Ok(())
}

fn separation(table: &IncidenceTable) -> f64 {
    0.25 * table.scale.powf(1.0 - table.delta)
}

/// Counts from the stored incidences.
pub fn bush_count(
    table: &IncidenceTable,
    q0: usize,
    shift: &Shift,
    gamma2: usize,
    m1: &PhaseModel,
    m2: &PhaseModel,
) -> Result<BushCount> {
    check(table, q0, gamma2)?;
    let bush: Vec<usize> =
        table.incidence[0][q0].iter().copied().filter(|&t| near_sigma(&table.tubes[0][t], m1, m2, shift)).collect();
    let members: BTreeSet<usize> = bush.iter().copied().collect();
    let sep = separation(table);
    let (mut count, mut cubes) = (0, 0);
    for q in 0..table.cubes.len() {
        if !table.incidence[1][q].contains(&gamma2) || table.cubes[q].distance(&table.cubes[q0]) < sep {
            continue;
        }
        let c = table.incidence[0][q].iter().filter(|t| members.contains(t)).count();
        count += c;
        cubes += (c > 0) as usize;
    }
    Ok(BushCount { count, bush, cubes })
}

/// The same count by testing every tube against every cube directly.
pub fn bush_count_exhaustive(
    table: &IncidenceTable,
    q0: usize,
    shift: &Shift,
    gamma2: usize,
    m1: &PhaseModel,
    m2: &PhaseModel,
) -> Result<BushCount> {
    check(table, q0, gamma2)?;
    let h = table.enlarged_half_side();
    let base = &table.cubes[q0];
    let bush: Vec<usize> = (0..table.tubes[0].len())
        .filter(|&t| base.meets(&table.tubes[0][t], h) && near_sigma(&table.tubes[0][t], m1, m2, shift))
        .collect();
    let sep = separation(table);
    let t2 = &table.tubes[1][gamma2];
    let (mut count, mut cubes) = (0, 0);
    for q in &table.cubes {
        if q.distance(base) < sep || !q.meets(t2, h) {
            continue;
        }
        let c = bush.iter().filter(|&&t| q.meets(&table.tubes[0][t], h)).count();
        count += c;
        cubes += (c > 0) as usize;
    }
    Ok(BushCount { count, bush, cubes })
}

/// `count` distinct tubes with `x0` uniform on lattice points of `|x0| <= R/2` and `xi0` uniform
/// on lattice points of the ball `|xi0 - center| <= radius`.
pub fn random_family(
    r: f64,
    count: usize,
    center: &[f64],
    radius: f64,
    model: &PhaseModel,
    seed: u64,
    stream: u64,
) -> Result<Vec<Tube>> {
    let s = r.sqrt();
    let n = center.len();
    let xr = (0.5 * s).floor() as i64;
    let c_idx: Vec<f64> = center.iter().map(|c| c * s).collect();
    let kr = radius * s;
    let x_pts: Vec<Vec<i64>> = lattice_ball(&vec![0.0; n], 0.5 * s, xr);
    let lo: Vec<i64> = c_idx.iter().map(|c| (c - kr).ceil() as i64).collect();
    let k_pts: Vec<Vec<i64>> = lattice_box(&lo, &c_idx.iter().map(|c| (c + kr).floor() as i64).collect::<Vec<_>>())
        .into_iter()
        .filter(|k| k.iter().zip(&c_idx).map(|(a, c)| (*a as f64 - c).powi(2)).sum::<f64>() <= kr * kr)
        .collect();
    if x_pts.len() * k_pts.len() < count {
        return Err(Error::InvalidParameter(format!(
            "only {} phase points available for {count} tubes",
            x_pts.len() * k_pts.len()
        )));
    }
    let mut g = rng(seed, stream);
    let mut chosen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (i, j) = (g.gen_range(0..x_pts.len()), g.gen_range(0..k_pts.len()));
        if chosen.insert((i, j)) {
            out.push(Tube::new(PhasePoint::new(x_pts[i].clone(), k_pts[j].clone(), r)?, model)?);
        }
    }
    Ok(out)
}

fn lattice_box(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for (a, b) in lo.iter().zip(hi) {
        out = out.into_iter().flat_map(|p: Vec<i64>| (*a..=*b).map(move |k| [p.clone(), vec![k]].concat())).collect();
    }
    out
}

fn lattice_ball(c: &[f64], rad: f64, reach: i64) -> Vec<Vec<i64>> {
    let lo = vec![-reach; c.len()];
    let hi = vec![reach; c.len()];
    lattice_box(&lo, &hi).into_iter().filter(|k| k.iter().map(|v| (*v as f64).powi(2)).sum::<f64>() <= rad * rad).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BushConfig {
    pub scales: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub tubes: usize,
    pub delta: f64,
    /// Exponent `D` in `R^{D delta}`; defaults to `n + 2`.
    #[serde(default)]
    pub exponent: Option<f64>,
    /// Frequency ball centres of the two families; the dimension is their length.
    pub centers: [Vec<f64>; 2],
    pub radius: f64,
}

impl Default for BushConfig {
    fn default() -> Self {
        BushConfig {
            scales: (6..=10).map(|k| 2f64.powi(k)).collect(),
            trials: 20,
            seed: 0,
            tubes: 100,
            delta: 0.2,
            exponent: None,
            centers: [vec![0.25, 0.0], vec![-0.25, 0.0]],
            radius: 0.125,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BushRow {
    pub scale: f64,
    pub trial: usize,
    /// Largest bush count over the second family.
    pub max_count: usize,
    pub bush_size: usize,
    /// Table and every bush count agree with exhaustive enumeration.
    pub exact: bool,
    /// Largest `#{B : gamma ~ B}` over both families.
    pub max_related: usize,
    /// Dyadic values `1 <= lambda <= R^{100 n}`, that is `100 n log2 R`.
    pub class_count: f64,
    /// Largest `#{B : gamma ~ B} / (number of classes containing gamma)` over classified tubes.
    pub ball_ratio: f64,
    /// Smallest `#B * (best ball count) / lambda(gamma, mu)`; at least 1 by the maximal choice.
    pub lower_bound_ratio: f64,
    pub balls: usize,
    pub unclassified: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BushReport {
    pub rows: Vec<BushRow>,
    pub scales: Vec<f64>,
    /// Mean over trials of the maximal count, per scale.
    pub mean_counts: Vec<f64>,
    /// Log-log slope of the mean counts against `R`; `None` when a mean vanishes.
    pub growth_slope: Option<f64>,
    pub exponent: f64,
    pub delta: f64,
    /// `D delta + 0.5`.
    pub slope_bound: f64,
    /// Largest `count / R^{D delta}` over all rows.
    pub constant: f64,
    pub all_exact: bool,
    /// Every row has `max_related <= 3 class_count`.
    pub balls_within_classes: bool,
    pub max_ball_ratio: f64,
}

fn trial(cfg: &BushConfig, r: f64, t: usize) -> Result<BushRow> {
    let m = PhaseModel::schroedinger();
    let stream = 2 * t as u64;
    let f1 = random_family(r, cfg.tubes, &cfg.centers[0], cfg.radius, &m, cfg.seed, stream)?;
    let f2 = random_family(r, cfg.tubes, &cfg.centers[1], cfg.radius, &m, cfg.seed, stream + 1)?;
    let table = super::tube_incidence_table(&f1, &f2, r, cfg.delta)?;
    let mut exact = table.verify();
    let q0 = (0..table.cubes.len()).max_by_key(|&q| (table.incidence[0][q].len(), std::cmp::Reverse(q))).unwrap_or(0);
    let (mut max_count, mut bush_size) = (0, 0);
    if let Some(&g1) = table.incidence[0].get(q0).and_then(|v| v.first()) {
        let xi1 = table.tubes[0][g1].gamma.xi0();
        for g2 in 0..table.tubes[1].len() {
            let xi2 = table.tubes[1][g2].gamma.xi0();
            let h: Vec<f64> = xi1.iter().zip(&xi2).map(|(a, b)| a - b).collect();
            let shift = Shift::new(m.value(&xi1) - m.value(&xi2), &h);
            let fast = bush_count(&table, q0, &shift, g2, &m, &m)?;
            let slow = bush_count_exhaustive(&table, q0, &shift, g2, &m, &m)?;
            exact &= fast == slow;
            if fast.count > max_count {
                max_count = fast.count;
            }
            bush_size = bush_size.max(fast.bush.len());
        }
    }
    let (mut ball_ratio, mut max_related) = (0.0f64, 0);
    for j in 0..2 {
        for tube in 0..table.tubes[j].len() {
            let b = table.related_balls(j, tube);
            max_related = max_related.max(b);
            let k = table.class_count(j, tube);
            if k > 0 {
                ball_ratio = ball_ratio.max(b as f64 / k as f64);
            }
        }
    }
    let n = cfg.centers[0].len() as f64;
    let nb = table.balls.len() as f64;
    let lower_bound_ratio = table
        .ball_choices
        .iter()
        .map(|c| {
            let lam = table.lambdas[c.family][c.tube].iter().find(|(mu, _)| *mu == c.mu).map(|x| x.1).unwrap_or(0);
            nb * c.count as f64 / lam as f64
        })
        .fold(f64::INFINITY, f64::min);
    Ok(BushRow {
        scale: r,
        trial: t,
        max_count,
        bush_size,
        exact,
        max_related,
        class_count: 100.0 * n * r.log2(),
        ball_ratio,
        lower_bound_ratio,
        balls: table.balls.len(),
        unclassified: table.unclassified[0].len() + table.unclassified[1].len(),
    })
}

/// Random families over the configured scales and trials, with every count checked exhaustively.
pub fn bush_experiment(cfg: &BushConfig) -> Result<BushReport> {
    let n = cfg.centers[0].len();
    if cfg.centers[1].len() != n || n < 1 {
        return Err(Error::InvalidParameter("family centres must share a dimension".into()));
    }
    if cfg.scales.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one scale and one trial".into()));
    }
    let exponent = cfg.exponent.unwrap_or(n as f64 + 2.0);
    let jobs: Vec<(f64, usize)> = cfg.scales.iter().flat_map(|r| (0..cfg.trials).map(move |t| (*r, t))).collect();
    let rows = jobs.par_iter().map(|&(r, t)| trial(cfg, r, t)).collect::<Result<Vec<_>>>()?;
    let mean_counts: Vec<f64> = cfg
        .scales
        .iter()
        .map(|r| rows.iter().filter(|w| w.scale == *r).map(|w| w.max_count as f64).sum::<f64>() / cfg.trials as f64)
        .collect();
    let growth_slope = if cfg.scales.len() >= 2 && mean_counts.iter().all(|v| *v > 0.0) {
        Some(loglog_fit(&cfg.scales, &mean_counts)?.slope)
    } else {
        None
    };
    let constant = rows.iter().map(|w| w.max_count as f64 / w.scale.powf(exponent * cfg.delta)).fold(0.0, f64::max);
    Ok(BushReport {
        all_exact: rows.iter().all(|w| w.exact),
        balls_within_classes: rows.iter().all(|w| w.max_related as f64 <= 3.0 * w.class_count),
        max_ball_ratio: rows.iter().map(|w| w.ball_ratio).fold(0.0, f64::max),
        rows,
        scales: cfg.scales.clone(),
        mean_counts,
        growth_slope,
        exponent,
        delta: cfg.delta,
        slope_bound: exponent * cfg.delta + 0.5,
        constant,
    })
}
