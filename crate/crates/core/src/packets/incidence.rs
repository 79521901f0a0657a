//! Cubes of radius `R^{1/2}` and balls of radius `R^{1 - delta}` covering
//! `Q_R = {R/2 < t < R, |x| < R}`, and the incidence classes of two tube families.
//!
//! Space-time points are `(t, x_1, .., x_n)`. A cube of radius `r` is the axis-parallel cube
//! of half-side `r`; `R^delta q` has half-side `R^{delta + 1/2}` and the centre of `q`.

use super::Tube;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    /// Centre `(t, x)`.
    pub center: Vec<f64>,
    pub half_side: f64,
}

impl Cube {
    fn bounds(&self, half: f64) -> (f64, f64, Vec<f64>, Vec<f64>) {
        let c = &self.center;
        (c[0] - half, c[0] + half, c[1..].iter().map(|v| v - half).collect(), c[1..].iter().map(|v| v + half).collect())
    }

    /// Whether `T` meets the concentric cube of half-side `half`.
    pub fn meets(&self, tube: &Tube, half: f64) -> bool {
        let (a, b, lo, hi) = self.bounds(half);
        tube.meets_box(a, b, &lo, &hi)
    }

    /// Euclidean distance between the two closed cubes.
    pub fn distance(&self, o: &Cube) -> f64 {
        self.center
            .iter()
            .zip(&o.center)
            .map(|(a, b)| ((a - b).abs() - self.half_side - o.half_side).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn distance_to_point(&self, p: &[f64]) -> f64 {
        self.center.iter().zip(p).map(|(a, b)| ((a - b).abs() - self.half_side).max(0.0).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    /// `self subset k * o`.
    fn inside_dilate(&self, o: &Ball, k: f64) -> bool {
        let d = self.center.iter().zip(&o.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        d + self.radius <= k * o.radius
    }
}

/// `q(mu1, mu2)`: cubes with `mu_j <= #Gamma_j(q) < 2 mu_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeClass {
    pub mu: [usize; 2],
    pub cubes: Vec<usize>,
}

/// `Gamma_j[lambda, mu1, mu2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeClass {
    pub family: usize,
    pub lambda: usize,
    pub mu: [usize; 2],
    pub tubes: Vec<usize>,
}

/// The maximizing ball `B(gamma, lambda, mu1, mu2)` and the count it attains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallChoice {
    pub family: usize,
    pub tube: usize,
    pub lambda: usize,
    pub mu: [usize; 2],
    pub ball: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceTable {
    pub dim: usize,
    pub scale: f64,
    pub delta: f64,
    pub tubes: [Vec<Tube>; 2],
    pub cubes: Vec<Cube>,
    pub balls: Vec<Ball>,
    /// `Gamma_j(q)` as tube indices, per family and cube.
    pub incidence: [Vec<Vec<usize>>; 2],
    pub cube_classes: Vec<CubeClass>,
    /// `lambda(gamma, mu1, mu2)` for every class with a positive count: `(mu, lambda)` per family and tube.
    pub lambdas: [Vec<Vec<([usize; 2], usize)>>; 2],
    pub tube_classes: Vec<TubeClass>,
    /// Tubes with `lambda(gamma, mu1, mu2) = 0` for every `(mu1, mu2)`.
    pub unclassified: [Vec<usize>; 2],
    pub ball_choices: Vec<BallChoice>,
    /// Pairs `(tube, ball)` with `gamma ~ B`, per family.
    pub relation: [Vec<(usize, usize)>; 2],
}

fn dyadic(c: usize) -> usize {
    debug_assert!(c >= 1);
    1usize << (usize::BITS - 1 - c.leading_zeros())
}

/// Interval centres `first + 2 h k` covering `[lo, hi]` with half-width `h`.
fn centres(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let count = ((hi - lo) / (2.0 * h)).ceil().max(1.0) as usize;
    (0..count).map(|k| lo + h * (2 * k + 1) as f64).collect()
}

fn grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for a in axes {
        out = out.into_iter().flat_map(|p: Vec<f64>| a.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }
    out
}

/// Whether the closed cell `center +- half` meets `Q_R`.
fn cell_meets_q(center: &[f64], half: &[f64], r: f64) -> bool {
    let t_ok = center[0] + half[0] > 0.5 * r && center[0] - half[0] < r;
    let gap: f64 = center[1..].iter().zip(&half[1..]).map(|(c, h)| (c.abs() - h).max(0.0).powi(2)).sum();
    t_ok && gap.sqrt() < r
}

fn cube_cover(n: usize, r: f64) -> Vec<Cube> {
    let h = r.sqrt();
    let mut axes = vec![centres(0.5 * r, r, h)];
    axes.extend((0..n).map(|_| centres(-r, r, h)));
    grid(&axes)
        .into_iter()
        .filter(|c| cell_meets_q(c, &vec![h; n + 1], r))
        .map(|center| Cube { center, half_side: h })
        .collect()
}

/// Balls on a cubic lattice whose cells are inscribed in the balls.
fn ball_cover(n: usize, r: f64, delta: f64) -> Vec<Ball> {
    let radius = r.powf(1.0 - delta);
    let h = radius / ((n + 1) as f64).sqrt();
    let mut axes = vec![centres(0.5 * r, r, h)];
    axes.extend((0..n).map(|_| centres(-r, r, h)));
    grid(&axes).into_iter().filter(|c| cell_meets_q(c, &vec![h; n + 1], r)).map(|center| Ball { center, radius }).collect()
}

fn check_tubes(tubes: &[&Vec<Tube>], r: f64, n: usize) -> Result<()> {
    for t in tubes.iter().flat_map(|v| v.iter()) {
        if t.scale() != r {
            return Err(Error::InvalidParameter("all tubes must share the scale R".into()));
        }
        if t.gamma.dim() != n {
            return Err(Error::InvalidParameter("tube dimensions differ".into()));
        }
    }
    Ok(())
}

/// Candidate cubes for one tube: those whose enlargement meets its bounding box.
fn incidence_pruned(tubes: &[Tube], cubes: &[Cube], half: f64) -> Vec<Vec<usize>> {
    let hits: Vec<Vec<usize>> = tubes
        .par_iter()
        .map(|tube| {
            let (a, b) = tube.times();
            let (p, q) = (tube.center(a), tube.center(b));
            // Slack keeps exact boundary contacts among the candidates.
            let slack = 1e-9 * tube.scale();
            let rad = tube.radius() + half + slack;
            let lo: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x.min(*y) - rad).collect();
            let hi: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x.max(*y) + rad).collect();
            cubes
                .iter()
                .enumerate()
                .filter(|(_, c)| {
                    c.center[0] + half + slack >= a
                        && c.center[0] - half - slack <= b
                        && c.center[1..].iter().enumerate().all(|(d, v)| *v >= lo[d] && *v <= hi[d])
                })
                .filter(|(_, c)| c.meets(tube, half))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut per_cube = vec![vec![]; cubes.len()];
    for (t, hs) in hits.iter().enumerate() {
        for &c in hs {
            per_cube[c].push(t);
        }
    }
    per_cube
}

/// Every tube against every cube.
pub(crate) fn incidence_exhaustive(tubes: &[Tube], cubes: &[Cube], half: f64) -> Vec<Vec<usize>> {
    cubes.par_iter().map(|c| (0..tubes.len()).filter(|&t| c.meets(&tubes[t], half)).collect()).collect()
}

/// Builds `Gamma_j(q)`, the dyadic classes, the maximizing balls and the relation `~`.
pub fn tube_incidence_table(tubes1: &[Tube], tubes2: &[Tube], r: f64, delta: f64) -> Result<IncidenceTable> {
    let n = tubes1.first().or(tubes2.first()).map(|t| t.gamma.dim()).unwrap_or(2);
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    check_tubes(&[&tubes1.to_vec(), &tubes2.to_vec()], r, n)?;
    let cubes = cube_cover(n, r);
    let half = r.powf(delta + 0.5);
    let incidence = [incidence_pruned(tubes1, &cubes, half), incidence_pruned(tubes2, &cubes, half)];
    let balls = ball_cover(n, r, delta);
    Ok(classify([tubes1.to_vec(), tubes2.to_vec()], cubes, balls, incidence, r, delta))
}

fn classify(
    tubes: [Vec<Tube>; 2],
    cubes: Vec<Cube>,
    balls: Vec<Ball>,
    incidence: [Vec<Vec<usize>>; 2],
    r: f64,
    delta: f64,
) -> IncidenceTable {
    let dim = tubes[0].first().or(tubes[1].first()).map(|t| t.gamma.dim()).unwrap_or(2);
    let mut by_mu: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
    for q in 0..cubes.len() {
        let (c1, c2) = (incidence[0][q].len(), incidence[1][q].len());
        if c1 >= 1 && c2 >= 1 {
            by_mu.entry([dyadic(c1), dyadic(c2)]).or_default().push(q);
        }
    }
    let cube_classes: Vec<CubeClass> = by_mu.iter().map(|(mu, cubes)| CubeClass { mu: *mu, cubes: cubes.clone() }).collect();
    let ball_hits: Vec<Vec<bool>> =
        cubes.iter().map(|q| balls.iter().map(|b| q.distance_to_point(&b.center) <= b.radius).collect()).collect();
    let mut lambdas: [Vec<Vec<([usize; 2], usize)>>; 2] = [vec![vec![]; tubes[0].len()], vec![vec![]; tubes[1].len()]];
    let mut classes: BTreeMap<(usize, usize, [usize; 2]), Vec<usize>> = BTreeMap::new();
    let mut ball_choices = vec![];
    let mut relation: [Vec<(usize, usize)>; 2] = [vec![], vec![]];
    for j in 0..2 {
        // Cubes met by each tube, restricted to each class.
        let mut met: Vec<BTreeMap<[usize; 2], Vec<usize>>> = vec![BTreeMap::new(); tubes[j].len()];
        for cc in &cube_classes {
            for &q in &cc.cubes {
                for &t in &incidence[j][q] {
                    met[t].entry(cc.mu).or_default().push(q);
                }
            }
        }
        for (t, per) in met.iter().enumerate() {
            let mut related = vec![false; balls.len()];
            for (mu, qs) in per {
                let lam = qs.len();
                lambdas[j][t].push((*mu, lam));
                let l = dyadic(lam);
                classes.entry((j, l, *mu)).or_default().push(t);
                let (mut best, mut best_count) = (0, 0);
                for b in 0..balls.len() {
                    let c = qs.iter().filter(|&&q| ball_hits[q][b]).count();
                    if c > best_count {
                        best = b;
                        best_count = c;
                    }
                }
                ball_choices.push(BallChoice { family: j, tube: t, lambda: l, mu: *mu, ball: best, count: best_count });
                for (b, ball) in balls.iter().enumerate() {
                    if ball.inside_dilate(&balls[best], 10.0) {
                        related[b] = true;
                    }
                }
            }
            relation[j].extend(related.iter().enumerate().filter(|(_, v)| **v).map(|(b, _)| (t, b)));
        }
    }
    let tube_classes = classes.into_iter().map(|((family, lambda, mu), tubes)| TubeClass { family, lambda, mu, tubes }).collect();
    let unclassified = [0, 1].map(|j| (0..tubes[j].len()).filter(|&t| lambdas[j][t].is_empty()).collect());
    IncidenceTable {
        dim,
        scale: r,
        delta,
        tubes,
        cubes,
        balls,
        incidence,
        cube_classes,
        lambdas,
        tube_classes,
        unclassified,
        ball_choices,
        relation,
    }
}

impl IncidenceTable {
    /// Half-side of `R^delta q`.
    pub fn enlarged_half_side(&self) -> f64 {
        self.scale.powf(self.delta + 0.5)
    }

    /// Recomputes every incidence by testing each tube against each cube.
    pub fn exhaustive(&self) -> [Vec<Vec<usize>>; 2] {
        let h = self.enlarged_half_side();
        [incidence_exhaustive(&self.tubes[0], &self.cubes, h), incidence_exhaustive(&self.tubes[1], &self.cubes, h)]
    }

    /// Rebuilds the whole table from the exhaustive incidences and compares it with `self`.
    pub fn verify(&self) -> bool {
        let rebuilt =
            classify(self.tubes.clone(), self.cubes.clone(), self.balls.clone(), self.exhaustive(), self.scale, self.delta);
        rebuilt == *self
    }

    /// Number of dyadic classes `Gamma_j[lambda, mu1, mu2]` containing the tube.
    pub fn class_count(&self, family: usize, tube: usize) -> usize {
        self.lambdas[family][tube].len()
    }

    /// `#{B : gamma ~ B}`.
    pub fn related_balls(&self, family: usize, tube: usize) -> usize {
        self.relation[family].iter().filter(|(t, _)| *t == tube).count()
    }

    /// Whether the classes together with the unclassified tubes cover each family exactly once per `(mu1, mu2)`.
    pub fn classes_partition(&self) -> bool {
        (0..2).all(|j| {
            let mut seen = vec![0usize; self.tubes[j].len()];
            for c in self.tube_classes.iter().filter(|c| c.family == j) {
                for &t in &c.tubes {
                    seen[t] += 1;
                }
            }
            (0..seen.len()).all(|t| seen[t] == self.class_count(j, t))
                && (0..seen.len()).all(|t| (seen[t] > 0) != self.unclassified[j].contains(&t))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_floor() {
        assert_eq!(dyadic(1), 1);
        assert_eq!(dyadic(3), 2);
        assert_eq!(dyadic(4), 4);
        assert_eq!(dyadic(1023), 512);
    }

    #[test]
    fn covers_reach_q_r() {
        let r = 64.0;
        let cubes = cube_cover(2, r);
        let balls = ball_cover(2, r, 0.2);
        for p in [[0.51 * r, 0.0, 0.0], [0.99 * r, 0.7 * r, -0.7 * r], [0.75 * r, -0.99 * r, 0.0]] {
            assert!(cubes.iter().any(|c| c.distance_to_point(&p) == 0.0));
            assert!(balls.iter().any(|b| b.center.iter().zip(&p).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt() <= b.radius));
        }
    }
}
