//! Joint maximum-likelihood and message-passing receivers.
//!
//! Both detectors are prepared once from the codebooks and then applied to
//! many [`ReceivedBlock`]s. The graph is read off the codebooks: user `l` is
//! connected to RE `k` when any of its codewords is non-zero there.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::channels::FadingRealization;
use crate::error::{Error, Result};
use crate::error_analysis::checked_power;
use crate::factor_graph::IndicatorMatrix;
use crate::progressive_builder::Codebook;

/// Smallest value a message entry may take before renormalization.
pub const MESSAGE_FLOOR: f64 = 1e-30;

/// Default number of message-passing rounds.
pub const DEFAULT_MPA_ITERATIONS: usize = 8;

/// Largest number of users per RE the MPA detector accepts.
const MAX_RE_DEGREE: usize = 32;

/// Largest `M^L` the ML detector will enumerate.
const MAX_ML_HYPOTHESES: usize = 1 << 24;

/// `y = h ⊙ sum_l x_l + z` on the `K` REs.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedBlock {
    pub observations: Vec<Complex64>,
    pub channel: FadingRealization,
    /// Total variance `N0` of the complex noise on each RE.
    pub noise_power: f64,
}

impl ReceivedBlock {
    pub fn new(observations: Vec<Complex64>, channel: FadingRealization, noise_power: f64) -> Result<Self> {
        if observations.len() != channel.coefficients.len() {
            return Err(Error::Validation(format!(
                "{} observations but {} channel gains",
                observations.len(),
                channel.coefficients.len()
            )));
        }
        if !(noise_power > 0.0) {
            return Err(Error::Domain(format!("noise power {noise_power} must be > 0")));
        }
        Ok(ReceivedBlock { observations, channel, noise_power })
    }

    fn check(&self, res: usize) -> Result<()> {
        if self.observations.len() != res || self.channel.coefficients.len() != res {
            return Err(Error::Validation(format!(
                "block has {} observations, codebooks have K = {res}",
                self.observations.len()
            )));
        }
        Ok(())
    }
}

/// Per-user decisions and, optionally, symbol posteriors.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    /// Decided symbol index of every user, in `0..M`.
    pub symbols: Vec<usize>,
    /// `posteriors[l][m]`, each row summing to one.
    pub posteriors: Option<Vec<Vec<f64>>>,
}

/// Shared layout of a codebook set: dimensions, per-RE users and the
/// superimposed value of every local symbol tuple.
#[derive(Clone, Debug)]
struct LocalModel {
    m: usize,
    users: usize,
    res: usize,
    /// `re_users[k]`: users active on RE `k`, ascending.
    re_users: Vec<Vec<usize>>,
    /// `re_points[k][t]`: superimposed value of local tuple `t`, slot 0 fastest.
    re_points: Vec<Vec<Complex64>>,
}

impl LocalModel {
    fn new(codebooks: &[Codebook]) -> Result<Self> {
        let first = codebooks.first().ok_or_else(|| Error::Validation("no codebooks".into()))?;
        let (m, res) = (first.size(), first.res());
        if m == 0 || res == 0 {
            return Err(Error::Validation("empty codebook".into()));
        }
        for cb in codebooks {
            if cb.size() != m || cb.codewords.iter().any(|c| c.len() != res) {
                return Err(Error::Validation(format!("codebook of user {} has inconsistent dimensions", cb.user)));
            }
        }
        let zero = Complex64::new(0.0, 0.0);
        let re_users: Vec<Vec<usize>> = (0..res)
            .map(|k| (0..codebooks.len()).filter(|&l| codebooks[l].codewords.iter().any(|c| c[k] != zero)).collect())
            .collect();
        let re_points = re_users
            .iter()
            .enumerate()
            .map(|(k, users)| {
                let size = checked_power(m, users.len())?;
                Ok((0..size)
                    .map(|mut t| {
                        let mut sum = zero;
                        for &l in users {
                            sum += codebooks[l].codewords[t % m][k];
                            t /= m;
                        }
                        sum
                    })
                    .collect())
            })
            .collect::<Result<Vec<Vec<Complex64>>>>()?;
        Ok(LocalModel { m, users: codebooks.len(), res, re_users, re_points })
    }

    /// `|y_k - h_k s_t|^2` for every local tuple of every RE.
    fn metrics(&self, block: &ReceivedBlock) -> Vec<Vec<f64>> {
        self.re_points
            .iter()
            .enumerate()
            .map(|(k, pts)| {
                let (y, h) = (block.observations[k], block.channel.coefficients[k]);
                pts.iter().map(|&s| (y - h * s).norm_sqr()).collect()
            })
            .collect()
    }
}

/// Exhaustive joint ML detector over all `M^L` symbol tuples.
#[derive(Debug)]
pub struct MlDetector {
    model: LocalModel,
    hypotheses: usize,
    /// `local[t * K + k]`: local tuple index on RE `k` of joint tuple `t`.
    local: Vec<u32>,
    evaluations: AtomicU64,
}

impl MlDetector {
    pub fn new(codebooks: &[Codebook]) -> Result<Self> {
        let model = LocalModel::new(codebooks)?;
        let hypotheses = checked_power(model.m, model.users)?;
        if hypotheses > MAX_ML_HYPOTHESES {
            return Err(Error::Parameter(format!("{hypotheses} ML hypotheses exceed the supported maximum")));
        }
        let mut local = vec![0u32; hypotheses * model.res];
        for t in 0..hypotheses {
            for (k, users) in model.re_users.iter().enumerate() {
                let mut idx = 0;
                let mut scale = 1;
                for &l in users {
                    idx += (t / model.m.pow(l as u32)) % model.m * scale;
                    scale *= model.m;
                }
                local[t * model.res + k] = idx as u32;
            }
        }
        Ok(MlDetector { model, hypotheses, local, evaluations: AtomicU64::new(0) })
    }

    /// Number of joint metrics evaluated since construction.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Decides the tuple minimizing `sum_k |y_k - h_k sum_l x_{k,l}|^2`.
    /// Ties go to the smallest tuple index (user 0 varies fastest).
    pub fn detect(&self, block: &ReceivedBlock, with_posteriors: bool) -> Result<DetectionResult> {
        block.check(self.model.res)?;
        let metrics = self.model.metrics(block);
        let res = self.model.res;
        let joint = |t: usize| -> f64 {
            let idx = &self.local[t * res..(t + 1) * res];
            idx.iter().zip(&metrics).map(|(&i, m)| m[i as usize]).sum()
        };
        let mut best = (f64::INFINITY, 0);
        for t in 0..self.hypotheses {
            let d = joint(t);
            if d < best.0 {
                best = (d, t);
            }
        }
        self.evaluations.fetch_add(self.hypotheses as u64, Ordering::Relaxed);

        let (m, users) = (self.model.m, self.model.users);
        let symbols = decode_tuple(best.1, m, users);
        let posteriors = with_posteriors.then(|| {
            let mut post = vec![vec![0.0; m]; users];
            for t in 0..self.hypotheses {
                let w = (-(joint(t) - best.0) / block.noise_power).exp();
                let mut rest = t;
                for row in post.iter_mut() {
                    row[rest % m] += w;
                    rest /= m;
                }
            }
            post.iter_mut().for_each(|row| normalize(row));
            post
        });
        Ok(DetectionResult { symbols, posteriors })
    }
}

impl MlDetector {
    /// Same decision as [`Self::detect`] without visiting every tuple.
    ///
    /// Depth-first search over users, highest index first, pruned with
    /// per-RE lower bounds (the minimum metric over the still-free slots).
    /// An initial greedy dive supplies the incumbent. The result, including
    /// the tie rule, equals exhaustive enumeration. Only visited leaves are
    /// counted in [`Self::evaluations`].
    pub fn detect_pruned(&self, block: &ReceivedBlock) -> Result<DetectionResult> {
        block.check(self.model.res)?;
        let m = self.model.m;
        let bounds: Vec<Vec<Vec<f64>>> = self
            .model
            .metrics(block)
            .into_iter()
            .map(|full| {
                let mut levels = vec![full];
                while levels[levels.len() - 1].len() > 1 {
                    let coarse = levels[levels.len() - 1]
                        .chunks_exact(m)
                        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
                        .collect();
                    levels.push(coarse);
                }
                levels.reverse();
                levels
            })
            .collect();
        let touches: Vec<Vec<usize>> = (0..self.model.users)
            .map(|l| (0..self.model.res).filter(|&k| self.model.re_users[k].contains(&l)).collect())
            .collect();
        let mut search = Pruned {
            bounds: &bounds,
            touches: &touches,
            m,
            high: vec![0; self.model.res],
            level: vec![0; self.model.res],
            best: (f64::INFINITY, usize::MAX),
            leaves: 0,
        };
        search.greedy(self.model.users);
        search.descend(self.model.users, 0);
        self.evaluations.fetch_add(search.leaves, Ordering::Relaxed);
        Ok(DetectionResult { symbols: decode_tuple(search.best.1, m, self.model.users), posteriors: None })
    }
}

/// State of the branch-and-bound ML search.
struct Pruned<'a> {
    /// `bounds[k][j][h]`: least metric of RE `k` given its top `j` slots form `h`.
    bounds: &'a [Vec<Vec<f64>>],
    touches: &'a [Vec<usize>],
    m: usize,
    high: Vec<usize>,
    level: Vec<usize>,
    best: (f64, usize),
    leaves: u64,
}

impl Pruned<'_> {
    fn bound(&self) -> f64 {
        self.bounds.iter().enumerate().map(|(k, b)| b[self.level[k]][self.high[k]]).sum()
    }

    fn assign(&mut self, user: usize, s: usize) {
        for &k in &self.touches[user] {
            self.high[k] = self.high[k] * self.m + s;
            self.level[k] += 1;
        }
    }

    fn unassign(&mut self, user: usize) {
        for &k in &self.touches[user] {
            self.high[k] /= self.m;
            self.level[k] -= 1;
        }
    }

    fn offer(&mut self, value: f64, t: usize) {
        self.leaves += 1;
        if value < self.best.0 || (value == self.best.0 && t < self.best.1) {
            self.best = (value, t);
        }
    }

    /// Follows the child with the smallest bound down to one leaf.
    fn greedy(&mut self, users: usize) {
        let mut t = 0;
        for user in (0..users).rev() {
            let mut pick = (f64::INFINITY, 0);
            for s in 0..self.m {
                self.assign(user, s);
                let b = self.bound();
                self.unassign(user);
                if b < pick.0 {
                    pick = (b, s);
                }
            }
            self.assign(user, pick.1);
            t = t * self.m + pick.1;
        }
        let value = self.bound();
        self.offer(value, t);
        for user in 0..users {
            self.unassign(user);
        }
    }

    /// Visits the subtree below the first `remaining` users in tuple order.
    fn descend(&mut self, remaining: usize, prefix: usize) {
        if remaining == 0 {
            let value = self.bound();
            self.offer(value, prefix);
            return;
        }
        let user = remaining - 1;
        for s in 0..self.m {
            self.assign(user, s);
            if self.bound() <= self.best.0 {
                self.descend(user, prefix * self.m + s);
            }
            self.unassign(user);
        }
    }
}

fn decode_tuple(mut t: usize, m: usize, users: usize) -> Vec<usize> {
    (0..users)
        .map(|_| {
            let s = t % m;
            t /= m;
            s
        })
        .collect()
}

fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
}

/// One-shot ML detection; see [`MlDetector::detect`].
pub fn ml_detect(block: &ReceivedBlock, codebooks: &[Codebook]) -> Result<DetectionResult> {
    MlDetector::new(codebooks)?.detect(block, false)
}

/// Probability-domain sum-product detector on the RE/user graph.
#[derive(Clone, Debug)]
pub struct MpaDetector {
    model: LocalModel,
    iterations: usize,
    damping: f64,
    /// First edge of every RE; edges of RE `k` are `edge_start[k]..edge_start[k + 1]`,
    /// one per active user in slot order.
    edge_start: Vec<usize>,
    /// `user_edges[l]`: edges incident to user `l`.
    user_edges: Vec<Vec<usize>>,
    /// `digits[k][t * degree + v]`: symbol of slot `v` in local tuple `t`.
    digits: Vec<Vec<u8>>,
}

impl MpaDetector {
    pub fn new(codebooks: &[Codebook], iterations: usize) -> Result<Self> {
        Self::with_damping(codebooks, iterations, 0.0)
    }

    /// `damping` mixes each new RE-to-user message with the previous one:
    /// `r <- (1 - damping) r_new + damping r_old`.
    pub fn with_damping(codebooks: &[Codebook], iterations: usize, damping: f64) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::Parameter("MPA needs at least one iteration".into()));
        }
        if !(0.0..1.0).contains(&damping) {
            return Err(Error::Parameter(format!("damping {damping} must lie in [0, 1)")));
        }
        let model = LocalModel::new(codebooks)?;
        let m = model.m;
        if m > usize::from(u8::MAX) + 1 {
            return Err(Error::Parameter(format!("MPA supports M <= 256, got {m}")));
        }
        if model.re_users.iter().any(|u| u.len() > MAX_RE_DEGREE) {
            return Err(Error::Parameter(format!("MPA supports at most {MAX_RE_DEGREE} users per RE")));
        }
        let mut edge_start = vec![0];
        let mut user_edges = vec![Vec::new(); model.users];
        for users in &model.re_users {
            let first = *edge_start.last().expect("non-empty");
            for (slot, &l) in users.iter().enumerate() {
                user_edges[l].push(first + slot);
            }
            edge_start.push(first + users.len());
        }
        let digits = model
            .re_users
            .iter()
            .map(|users| {
                let size = m.pow(users.len() as u32);
                (0..size)
                    .flat_map(|t| (0..users.len()).map(move |v| ((t / m.pow(v as u32)) % m) as u8))
                    .collect()
            })
            .collect();
        Ok(MpaDetector { model, iterations, damping, edge_start, user_edges, digits })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Runs the configured number of rounds and returns per-user argmax
    /// decisions (lowest index on ties) and the final beliefs.
    pub fn detect(&self, block: &ReceivedBlock) -> Result<DetectionResult> {
        block.check(self.model.res)?;
        let m = self.model.m;
        let edges = *self.edge_start.last().expect("non-empty");
        let likelihood: Vec<Vec<f64>> = self
            .model
            .metrics(block)
            .into_iter()
            .map(|mut metric| {
                let floor = metric.iter().copied().fold(f64::INFINITY, f64::min);
                metric.iter_mut().for_each(|d| *d = (-(*d - floor) / block.noise_power).exp());
                metric
            })
            .collect();

        // message of edge e occupies [e * m, (e + 1) * m)
        let mut q = vec![1.0 / m as f64; edges * m];
        let mut r = q.clone();
        let mut fresh = vec![0.0; MAX_RE_DEGREE * m];
        let mut incoming = [0.0f64; MAX_RE_DEGREE];

        for _ in 0..self.iterations {
            for (k, lk) in likelihood.iter().enumerate() {
                let (first, last) = (self.edge_start[k], self.edge_start[k + 1]);
                let degree = last - first;
                let fresh = &mut fresh[..degree * m];
                fresh.fill(0.0);
                let q_re = &q[first * m..last * m];
                for (&w0, symbols) in lk.iter().zip(self.digits[k].chunks_exact(degree)) {
                    for (v, &s) in symbols.iter().enumerate() {
                        incoming[v] = q_re[v * m + s as usize];
                    }
                    for (v, &s) in symbols.iter().enumerate() {
                        let mut w = w0;
                        for (u, p) in incoming[..degree].iter().enumerate() {
                            if u != v {
                                w *= p;
                            }
                        }
                        fresh[v * m + s as usize] += w;
                    }
                }
                for (v, msg) in fresh.chunks_mut(m).enumerate() {
                    let old = &mut r[(first + v) * m..(first + v + 1) * m];
                    normalize_floored(msg);
                    if self.damping > 0.0 {
                        for (x, o) in msg.iter_mut().zip(old.iter()) {
                            *x = (1.0 - self.damping) * *x + self.damping * o;
                        }
                        normalize_floored(msg);
                    }
                    old.copy_from_slice(msg);
                }
            }
            for incident in &self.user_edges {
                for &e in incident {
                    let msg = &mut q[e * m..(e + 1) * m];
                    msg.fill(1.0);
                    for &e2 in incident.iter().filter(|&&e2| e2 != e) {
                        msg.iter_mut().zip(&r[e2 * m..(e2 + 1) * m]).for_each(|(x, y)| *x *= y);
                    }
                    normalize_floored(msg);
                }
            }
        }

        let beliefs: Vec<Vec<f64>> = self
            .user_edges
            .iter()
            .map(|incident| {
                let mut b = vec![1.0; m];
                for &e in incident {
                    b.iter_mut().zip(&r[e * m..(e + 1) * m]).for_each(|(x, y)| *x *= y);
                }
                normalize_floored(&mut b);
                b
            })
            .collect();
        let symbols = beliefs
            .iter()
            .map(|b| (0..m).fold(0, |best, s| if b[s] > b[best] { s } else { best }))
            .collect();
        Ok(DetectionResult { symbols, posteriors: Some(beliefs) })
    }
}

fn normalize_floored(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 && total.is_finite() {
        v.iter_mut().for_each(|x| *x = (*x / total).max(MESSAGE_FLOOR));
    } else {
        v.iter_mut().for_each(|x| *x = 1.0);
    }
    normalize(v);
}

/// One-shot MPA detection. The codebooks must respect the sparsity of `f`.
pub fn mpa_detect(
    block: &ReceivedBlock,
    codebooks: &[Codebook],
    f: &IndicatorMatrix,
    iterations: usize,
) -> Result<DetectionResult> {
    check_sparsity(codebooks, f)?;
    MpaDetector::new(codebooks, iterations)?.detect(block)
}

/// Rejects codebooks that place energy outside the pattern of `f`.
pub fn check_sparsity(codebooks: &[Codebook], f: &IndicatorMatrix) -> Result<()> {
    if codebooks.len() != f.users() {
        return Err(Error::Validation(format!("{} codebooks for L = {}", codebooks.len(), f.users())));
    }
    for (l, cb) in codebooks.iter().enumerate() {
        for c in &cb.codewords {
            if c.len() != f.res() {
                return Err(Error::Validation(format!("user {l}: codeword length {} != K", c.len())));
            }
            if let Some(k) = (0..f.res()).find(|&k| !f.get(k, l) && c[k] != Complex64::new(0.0, 0.0)) {
                return Err(Error::Invariant {
                    name: "sparsity pattern",
                    detail: format!("user {l} is non-zero on RE {k}"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toy() -> Vec<Codebook> {
        // two BPSK-like users sharing one RE with unequal amplitudes
        vec![
            Codebook { user: 0, codewords: vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]] },
            Codebook { user: 1, codewords: vec![vec![c(0.0, 0.5)], vec![c(0.0, -0.5)]] },
        ]
    }

    fn block(y: Complex64, h: Complex64) -> ReceivedBlock {
        ReceivedBlock::new(vec![y], FadingRealization { coefficients: vec![h] }, 0.1).unwrap()
    }

    #[test]
    fn toy_matches_hand_enumeration() {
        let y = c(0.3, -0.7);
        let h = c(0.9, 0.2);
        let hyps = [c(1.0, 0.5), c(-1.0, 0.5), c(1.0, -0.5), c(-1.0, -0.5)];
        let best = (0..4)
            .min_by(|&a, &b| (y - h * hyps[a]).norm_sqr().total_cmp(&(y - h * hyps[b]).norm_sqr()))
            .unwrap();
        let r = ml_detect(&block(y, h), &toy()).unwrap();
        assert_eq!(r.symbols, [best % 2, best / 2]);
    }

    #[test]
    fn ties_go_to_lowest_tuple() {
        let cbs = vec![
            Codebook { user: 0, codewords: vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]] },
            Codebook { user: 1, codewords: vec![vec![c(-1.0, 0.0)], vec![c(1.0, 0.0)]] },
        ];
        // tuples (0,0) and (1,1) both superimpose to 0
        let r = ml_detect(&block(c(0.0, 0.0), c(1.0, 0.0)), &cbs).unwrap();
        assert_eq!(r.symbols, [0, 0]);
    }

    #[test]
    fn ml_counts_every_hypothesis() {
        let det = MlDetector::new(&toy()).unwrap();
        det.detect(&block(c(0.1, 0.1), c(1.0, 0.0)), true).unwrap();
        det.detect(&block(c(0.1, 0.1), c(1.0, 0.0)), false).unwrap();
        assert_eq!(det.evaluations(), 8);
    }

    #[test]
    fn mpa_on_single_re_equals_ml_marginals() {
        let b = block(c(0.4, 0.1), c(0.7, -0.3));
        let ml = MlDetector::new(&toy()).unwrap().detect(&b, true).unwrap();
        let mpa = MpaDetector::new(&toy(), 1).unwrap().detect(&b).unwrap();
        for (a, e) in ml.posteriors.unwrap().iter().flatten().zip(mpa.posteriors.unwrap().iter().flatten()) {
            assert!((a - e).abs() < 1e-12);
        }
        assert_eq!(ml.symbols, mpa.symbols);
    }

    #[test]
    fn rejects_zero_iterations_and_bad_blocks() {
        assert!(matches!(MpaDetector::new(&toy(), 0), Err(Error::Parameter(_))));
        assert!(ReceivedBlock::new(vec![c(0.0, 0.0)], FadingRealization { coefficients: vec![] }, 1.0).is_err());
        assert!(ReceivedBlock::new(vec![c(0.0, 0.0)], FadingRealization { coefficients: vec![c(1.0, 0.0)] }, 0.0)
            .is_err());
    }

    #[test]
    fn sparsity_violation_is_named() {
        let f = IndicatorMatrix::from_bitstrings(&["10", "01"]).unwrap();
        let cbs = vec![
            Codebook { user: 0, codewords: vec![vec![c(1.0, 0.0), c(0.1, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]] },
            Codebook { user: 1, codewords: vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]] },
        ];
        let err = check_sparsity(&cbs, &f).unwrap_err();
        assert!(err.to_string().contains("sparsity pattern"));
    }

    #[test]
    fn pruned_search_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = IndicatorMatrix::four_by_six();
        let cbs: Vec<Codebook> = (0..6)
            .map(|l| Codebook {
                user: l,
                codewords: (0..4)
                    .map(|_| {
                        (0..4)
                            .map(|k| if f.get(k, l) { c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) } else { c(0.0, 0.0) })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        let det = MlDetector::new(&cbs).unwrap();
        for trial in 0..300 {
            let noise = [1e-3, 0.1, 2.0][trial % 3];
            let gains = (0..4).map(|_| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)).collect();
            let y = (0..4).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let b = ReceivedBlock::new(y, FadingRealization { coefficients: gains }, noise).unwrap();
            assert_eq!(det.detect_pruned(&b).unwrap().symbols, det.detect(&b, false).unwrap().symbols);
        }
        let cbs = vec![
            Codebook { user: 0, codewords: vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]] },
            Codebook { user: 1, codewords: vec![vec![c(-1.0, 0.0)], vec![c(1.0, 0.0)]] },
        ];
        let tie = MlDetector::new(&cbs).unwrap().detect_pruned(&block(c(0.0, 0.0), c(1.0, 0.0))).unwrap();
        assert_eq!(tie.symbols, [0, 0]);
    }
}
