//! Design of the single-RE benchmark constellation group.
//!
//! A [`ConstellationGroup`] holds the `d_f` sub-constellations that collide
//! on one resource element. [`optimize_group`] minimizes the single-RE union
//! bound over the polar coordinates `(r, theta)` of every point, subject to
//! unit average power per sub-constellation, with a multi-start projected
//! quasi-Newton descent. [`baseline_group`] builds the classic alternative:
//! one base constellation under `d_f` distinct phase rotations.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{db_to_linear, ChannelSpec, PairFactor};
use crate::error::{Error, Result};
use crate::error_analysis::{checked_power, SuperimposedCodewordSet};

/// Superimposed points closer than this (squared) count as coincident.
pub const MIN_DISTINCT_DISTANCE: f64 = 1e-4;

/// `d_f` sub-constellations of `M` points sharing one resource element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationGroup {
    subconstellations: Vec<Vec<Complex64>>,
}

impl ConstellationGroup {
    pub fn new(subconstellations: Vec<Vec<Complex64>>) -> Result<Self> {
        let m = subconstellations.first().map(Vec::len).unwrap_or(0);
        if m < 2 {
            return Err(Error::Validation("a group needs at least one sub-constellation of >= 2 points".into()));
        }
        if subconstellations.iter().any(|s| s.len() != m) {
            return Err(Error::Validation("sub-constellations differ in size".into()));
        }
        Ok(ConstellationGroup { subconstellations })
    }

    /// Number of sub-constellations `d_f`.
    pub fn df(&self) -> usize {
        self.subconstellations.len()
    }

    /// Points per sub-constellation `M`.
    pub fn m(&self) -> usize {
        self.subconstellations[0].len()
    }

    pub fn subconstellation(&self, v: usize) -> &[Complex64] {
        &self.subconstellations[v]
    }

    pub fn subconstellations(&self) -> &[Vec<Complex64>] {
        &self.subconstellations
    }

    /// Average power of sub-constellation `v`.
    pub fn power(&self, v: usize) -> f64 {
        let s = &self.subconstellations[v];
        s.iter().map(|a| a.norm_sqr()).sum::<f64>() / s.len() as f64
    }

    /// All `M^d_f` sums, sub-constellation 0 varying fastest.
    pub fn superimposed(&self) -> Vec<Complex64> {
        let m = self.m();
        let total = m.pow(self.df() as u32);
        (0..total)
            .map(|mut i| {
                let mut sum = Complex64::new(0.0, 0.0);
                for sub in &self.subconstellations {
                    sum += sub[i % m];
                    i /= m;
                }
                sum
            })
            .collect()
    }

    pub fn superimposed_set(&self) -> SuperimposedCodewordSet {
        SuperimposedCodewordSet::new(self.superimposed().into_iter().map(|p| vec![p]).collect())
            .expect("single-RE codewords share a length")
    }

    /// Minimum squared distance between distinct superimposed points.
    pub fn min_superimposed_distance(&self) -> f64 {
        let pts = self.superimposed();
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.min((pts[i] - pts[j]).norm_sqr());
            }
        }
        best
    }

    /// The group multiplied by `e^{j phi}`.
    pub fn rotated(&self, phi: f64) -> Self {
        let w = Complex64::from_polar(1.0, phi);
        ConstellationGroup {
            subconstellations: self
                .subconstellations
                .iter()
                .map(|s| s.iter().map(|a| a * w).collect())
                .collect(),
        }
    }

    /// Checks unit average power of every sub-constellation (within `tol`)
    /// and pairwise distinct superimposed points.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for v in 0..self.df() {
            let p = self.power(v);
            if (p - 1.0).abs() > tol {
                return Err(Error::Validation(format!(
                    "sub-constellation {v} has average power {p}, expected 1"
                )));
            }
        }
        let d = self.min_superimposed_distance();
        if d <= MIN_DISTINCT_DISTANCE {
            return Err(Error::Validation(format!(
                "superimposed points are not distinct (min squared distance {d:e})"
            )));
        }
        Ok(())
    }

    fn from_polar_params(params: &[f64], df: usize, m: usize) -> Self {
        let n = df * m;
        let subconstellations = (0..df)
            .map(|v| {
                (0..m)
                    .map(|i| Complex64::from_polar(params[v * m + i], params[n + v * m + i].rem_euclid(2.0 * PI)))
                    .collect()
            })
            .collect();
        ConstellationGroup { subconstellations }
    }
}

/// Unit-power QPSK, `e^{j(pi/4 + k pi/2)}`.
pub fn qpsk() -> Vec<Complex64> {
    (0..4).map(|k| Complex64::from_polar(1.0, FRAC_PI_4 + k as f64 * PI / 2.0)).collect()
}

/// Default rotations for a rotated-QPSK baseline: `v * pi / (4 d_f)`.
pub fn default_baseline_angles(df: usize) -> Vec<f64> {
    (0..df).map(|v| v as f64 * PI / (4.0 * df as f64)).collect()
}

/// Rotation angles maximizing the minimum superimposed squared distance of
/// `d_f` rotated copies of `base`, searched on a grid.
///
/// The first angle is fixed at 0 (a common rotation changes no distance),
/// the others range over `steps` equally spaced angles of one rotational
/// symmetry period of `base` (`pi/2` for QPSK). Ties go to the first
/// combination in lexicographic order.
pub fn max_min_rotation_angles(base: &[Complex64], df: usize, steps: usize) -> Result<Vec<f64>> {
    if df == 0 || steps < df {
        return Err(Error::Parameter(format!("need d_f >= 1 and steps >= d_f, got {df} and {steps}")));
    }
    let unit = baseline_group(base, &[0.0])?.subconstellation(0).to_vec();
    let m = unit.len();
    let period = (1..=m)
        .rev()
        .map(|s| 2.0 * PI / s as f64)
        .find(|&phi| {
            let w = Complex64::from_polar(1.0, phi);
            unit.iter().all(|&a| unit.iter().any(|&b| (a * w - b).norm() < 1e-9))
        })
        .unwrap_or(2.0 * PI);
    let combos = (1..df).try_fold(1f64, |acc, i| Some(acc * (steps - i) as f64 / i as f64));
    if combos.is_none_or(|c| c > 2e6) {
        return Err(Error::Parameter(format!("{steps} steps for d_f = {df} is too fine a grid")));
    }

    let angle = |j: usize| j as f64 * period / steps as f64;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut idx: Vec<usize> = (0..df).collect();
    loop {
        let angles: Vec<f64> = idx.iter().map(|&j| angle(j)).collect();
        let d = baseline_group(&unit, &angles)?.min_superimposed_distance();
        if best.as_ref().is_none_or(|(b, _)| d > *b) {
            best = Some((d, idx.clone()));
        }
        // next increasing combination with idx[0] = 0
        let Some(pos) = (1..df).rev().find(|&p| idx[p] < steps - (df - p)) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..df {
            idx[p] = idx[p - 1] + 1;
        }
    }
    let (_, idx) = best.expect("at least one combination");
    Ok(idx.into_iter().map(angle).collect())
}

/// Value of the single-RE design objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupObjective {
    /// `1/M^d_f * sum_{i != j} M_gamma(-|c_i - c_j|^2 / 4)`.
    pub value: f64,
    /// Unordered pairs of superimposed points closer than
    /// [`MIN_DISTINCT_DISTANCE`]; non-zero means the group is not uniquely
    /// decodable.
    pub coincident_pairs: usize,
}

/// Single-RE union-bound objective of a group (the `1/2` PEP factor is not
/// included).
pub fn objective_ser(group: &ConstellationGroup, spec: &ChannelSpec, es_over_n0: f64) -> GroupObjective {
    let factor = PairFactor::new(*spec, es_over_n0);
    let pts = group.superimposed();
    let mut sum = 0.0;
    let mut coincident_pairs = 0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d2 = (pts[i] - pts[j]).norm_sqr();
            if d2 <= MIN_DISTINCT_DISTANCE {
                coincident_pairs += 1;
            }
            sum += factor.eval(d2);
        }
    }
    GroupObjective { value: 2.0 * sum / pts.len() as f64, coincident_pairs }
}

/// Objective and gradient in polar parameters.
///
/// `params` holds all radii `r[v*M + m]` followed by all phases.
pub fn objective_and_gradient(
    params: &[f64],
    df: usize,
    m: usize,
    factor: &PairFactor,
    grad: &mut [f64],
) -> f64 {
    let n = df * m;
    debug_assert_eq!(params.len(), 2 * n);
    let points: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(params[i], params[n + i]))
        .collect();
    let total = m.pow(df as u32);
    let mut labels = vec![0usize; total * df];
    let mut sums = vec![Complex64::new(0.0, 0.0); total];
    for i in 0..total {
        let mut rest = i;
        for v in 0..df {
            let a = rest % m;
            rest /= m;
            labels[i * df + v] = a;
            sums[i] += points[v * m + a];
        }
    }

    let mut value = 0.0;
    let mut pull = vec![Complex64::new(0.0, 0.0); total];
    for i in 0..total {
        for j in i + 1..total {
            let diff = sums[i] - sums[j];
            let d2 = diff.norm_sqr();
            value += factor.eval(d2);
            let w = factor.derivative(d2) * diff;
            pull[i] += w;
            pull[j] -= w;
        }
    }
    let norm = 1.0 / total as f64;

    // complex gradient with respect to each point: 4/N * sum over tuples using it
    let mut cgrad = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..total {
        for v in 0..df {
            cgrad[v * m + labels[i * df + v]] += pull[i];
        }
    }
    for idx in 0..n {
        let g = cgrad[idx] * (4.0 * norm);
        let unit = Complex64::from_polar(1.0, params[n + idx]);
        grad[idx] = (g.conj() * unit).re;
        grad[n + idx] = (g.conj() * Complex64::i() * points[idx]).re;
    }
    2.0 * value * norm
}

/// Settings of the multi-start group optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub constraint_tolerance: f64,
    pub design_snr_db: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 32,
            max_iterations: 3000,
            gradient_tolerance: 1e-8,
            constraint_tolerance: 1e-9,
            design_snr_db: 16.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Parameter("restarts must be >= 1".into()));
        }
        if !(self.gradient_tolerance > 0.0 && self.constraint_tolerance > 0.0) {
            return Err(Error::Parameter("tolerances must be > 0".into()));
        }
        if !self.design_snr_db.is_finite() {
            return Err(Error::Parameter("design SNR must be finite".into()));
        }
        Ok(())
    }
}

/// Result of [`optimize_group`].
#[derive(Clone, Debug)]
pub struct OptimizedGroup {
    pub group: ConstellationGroup,
    /// Objective value of `group` at the design SNR.
    pub objective: f64,
    /// Whether the winning descent met the gradient tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// Index of the winning restart.
    pub restart: usize,
    /// Objective of each restart's starting point.
    pub initial_objectives: Vec<f64>,
    /// Restarts rejected for coincident superimposed points.
    pub discarded: usize,
}

struct Descent {
    params: Vec<f64>,
    value: f64,
    initial: f64,
    iterations: usize,
    converged: bool,
}

/// Multi-start minimization of [`objective_ser`] over `M`-point groups of
/// `d_f` unit-power sub-constellations.
///
/// Restart `i` draws its start from the ChaCha8 stream `i` of `cfg.seed`,
/// so the result depends only on the configuration.
pub fn optimize_group(m: usize, df: usize, spec: &ChannelSpec, cfg: &OptimizerConfig) -> Result<OptimizedGroup> {
    if m < 2 || df < 1 {
        return Err(Error::Parameter(format!("need M >= 2 and d_f >= 1, got M = {m}, d_f = {df}")));
    }
    checked_power(m, 2 * df)?;
    cfg.validate()?;
    spec.validated()?;
    let factor = PairFactor::new(*spec, db_to_linear(cfg.design_snr_db));

    let runs: Vec<Result<Descent>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(restart as u64);
            let start = random_start(&mut rng, df, m)?;
            Ok(descend(start, df, m, &factor, cfg))
        })
        .collect();

    let mut initial_objectives = Vec::with_capacity(cfg.restarts);
    let mut best: Option<(usize, Descent, ConstellationGroup)> = None;
    let mut discarded = 0;
    for (restart, run) in runs.into_iter().enumerate() {
        let run = run?;
        initial_objectives.push(run.initial);
        let group = ConstellationGroup::from_polar_params(&run.params, df, m);
        if group.validate(cfg.constraint_tolerance).is_err() {
            discarded += 1;
            continue;
        }
        if best.as_ref().is_none_or(|(_, b, _)| run.value < b.value) {
            best = Some((restart, run, group));
        }
    }
    let (restart, run, group) = best.ok_or_else(|| {
        Error::Construction(format!("all {} restarts ended with coincident superimposed points", cfg.restarts))
    })?;
    Ok(OptimizedGroup {
        objective: run.value,
        converged: run.converged,
        iterations: run.iterations,
        restart,
        initial_objectives,
        discarded,
        group,
    })
}

fn random_start(rng: &mut ChaCha8Rng, df: usize, m: usize) -> Result<Vec<f64>> {
    let n = df * m;
    for _ in 0..16 {
        let mut params: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        params.extend((0..n).map(|_| rng.random::<f64>() * 2.0 * PI));
        if project(&mut params, df, m) {
            return Ok(params);
        }
    }
    Err(Error::Construction("no feasible starting point found".into()))
}

/// Projects radii onto `r >= 0` with unit mean square per sub-constellation.
/// Returns `false` when a sub-constellation collapsed to the origin.
fn project(params: &mut [f64], df: usize, m: usize) -> bool {
    for v in 0..df {
        let radii = &mut params[v * m..(v + 1) * m];
        for r in radii.iter_mut() {
            *r = r.max(0.0);
        }
        let power: f64 = radii.iter().map(|r| r * r).sum::<f64>() / m as f64;
        if !(power > 0.0) {
            return false;
        }
        let scale = power.sqrt().recip();
        for r in radii.iter_mut() {
            *r *= scale;
        }
    }
    true
}

/// Gradient with the radial (power-changing) component of every
/// sub-constellation removed, and radii pinned at zero held in place.
fn tangent_gradient(params: &[f64], grad: &[f64], df: usize, m: usize) -> Vec<f64> {
    let mut t = grad.to_vec();
    for v in 0..df {
        let r = &params[v * m..(v + 1) * m];
        let g = &mut t[v * m..(v + 1) * m];
        for (gi, ri) in g.iter_mut().zip(r) {
            if *ri <= 0.0 && *gi > 0.0 {
                *gi = 0.0;
            }
        }
        let rr: f64 = r.iter().map(|x| x * x).sum();
        let gr: f64 = g.iter().zip(r).map(|(a, b)| a * b).sum();
        for (gi, ri) in g.iter_mut().zip(r) {
            *gi -= gr / rr * ri;
        }
    }
    t
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const LBFGS_MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;

/// Projected L-BFGS with backtracking. Every accepted iterate is feasible and
/// lowers the objective.
fn descend(mut x: Vec<f64>, df: usize, m: usize, factor: &PairFactor, cfg: &OptimizerConfig) -> Descent {
    let dim = x.len();
    let mut grad = vec![0.0; dim];
    let mut f = objective_and_gradient(&x, df, m, factor, &mut grad);
    let initial = f;
    let mut tg = tangent_gradient(&x, &grad, df, m);
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut new_grad = vec![0.0; dim];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        if dot(&tg, &tg).sqrt() < cfg.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let mut accepted = None;
        for use_memory in [true, false] {
            if !use_memory && history.is_empty() {
                continue;
            }
            let dir = if use_memory { two_loop(&tg, &history) } else { tg.iter().map(|g| -g).collect() };
            if dot(&dir, &tg) >= 0.0 {
                continue;
            }
            let mut step = if use_memory && !history.is_empty() { 1.0 } else { 0.1 / dot(&tg, &tg).sqrt().max(1e-12) };
            for _ in 0..40 {
                let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
                if project(&mut trial, df, m) {
                    let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let ft = objective_and_gradient(&trial, df, m, factor, &mut new_grad);
                    if ft <= f + ARMIJO * dot(&grad, &moved) && ft < f {
                        accepted = Some((trial, ft, moved));
                        break;
                    }
                }
                step *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            history.clear();
        }

        let Some((trial, ft, moved)) = accepted else {
            // no descent step exists at machine resolution
            converged = dot(&tg, &tg).sqrt() < cfg.gradient_tolerance.sqrt();
            break;
        };
        let new_tg = tangent_gradient(&trial, &new_grad, df, m);
        let y: Vec<f64> = new_tg.iter().zip(&tg).map(|(a, b)| a - b).collect();
        let sy = dot(&moved, &y);
        if sy > 1e-12 {
            if history.len() == LBFGS_MEMORY {
                history.remove(0);
            }
            history.push((moved, y, 1.0 / sy));
        }
        let decrease = f - ft;
        x = trial;
        f = ft;
        grad.copy_from_slice(&new_grad);
        tg = new_tg;
        if decrease <= 1e-15 * f.abs().max(1.0) && dot(&tg, &tg).sqrt() < cfg.gradient_tolerance.sqrt() {
            converged = true;
            break;
        }
    }
    Descent { params: x, value: f, initial, iterations, converged }
}

fn two_loop(grad: &[f64], history: &[(Vec<f64>, Vec<f64>, f64)]) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.last() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// `d_f` copies of `base`, scaled to unit average power, rotated by `angles`.
pub fn baseline_group(base: &[Complex64], angles: &[f64]) -> Result<ConstellationGroup> {
    if base.len() < 2 {
        return Err(Error::Validation("base constellation needs >= 2 points".into()));
    }
    if angles.is_empty() {
        return Err(Error::Validation("at least one rotation angle is required".into()));
    }
    for (a, &x) in angles.iter().enumerate() {
        for &y in &angles[a + 1..] {
            let gap = (x - y).rem_euclid(2.0 * PI);
            if gap < 1e-12 || 2.0 * PI - gap < 1e-12 {
                return Err(Error::Validation(format!("duplicate rotation angle {x}")));
            }
        }
    }
    let power = base.iter().map(|a| a.norm_sqr()).sum::<f64>() / base.len() as f64;
    if !(power > 0.0) {
        return Err(Error::Validation("base constellation has zero power".into()));
    }
    let scale = power.sqrt().recip();
    let subconstellations = angles
        .iter()
        .map(|&theta| {
            let w = Complex64::from_polar(scale, theta);
            base.iter().map(|a| a * w).collect()
        })
        .collect();
    ConstellationGroup::new(subconstellations)
}
