//! Progressive reconstruction of the benchmark group into `L` codebooks.
//!
//! The first RE receives the group in natural order. For every further RE
//! the builder chooses which sub-constellation each active user receives and
//! how each of them is relabeled, minimizing the union-bound objective of the
//! superimposed codewords over all REs placed so far:
//!
//! ```text
//! sum_{i != j} prod_{n <= k} M_gamma(-|c_{n,i} - c_{n,j}|^2 / 4)
//! ```
//!
//! where `i`, `j` run over symbol tuples of the users seen in REs `0..=k`.
//!
//! Candidates of one RE share every factor of the earlier REs, so the search
//! first folds those into a pair-weight matrix over the local symbols of the
//! RE and then scores each candidate with a single `M^d_f x M^d_f` sum.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelSpec, PairFactor};
use crate::error::{Error, Result};
use crate::error_analysis::checked_power;
use crate::factor_graph::IndicatorMatrix;
use crate::group_optimizer::ConstellationGroup;

/// Above this many labelings per RE the automatic mode uses binary switching.
pub const EXHAUSTIVE_LABELING_LIMIT: usize = 1_000_000;

/// Largest joint pair enumeration the cumulative objective will attempt.
const MAX_PAIR_ENUMERATION: usize = 1 << 34;

/// Bijective relabeling of an `M`-point constellation: label `n` is sent
/// with point `mapping[n]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelingPermutation(Vec<usize>);

impl LabelingPermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &p in &mapping {
            if p >= mapping.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Validation(format!("{mapping:?} is not a permutation")));
            }
        }
        Ok(LabelingPermutation(mapping))
    }

    pub fn identity(m: usize) -> Self {
        LabelingPermutation((0..m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `(self ∘ other)[n] = self[other[n]]`.
    pub fn compose(&self, other: &Self) -> Self {
        LabelingPermutation(other.0.iter().map(|&n| self.0[n]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (n, &p) in self.0.iter().enumerate() {
            inv[p] = n;
        }
        LabelingPermutation(inv)
    }

    /// Points in label order.
    pub fn apply(&self, points: &[Complex64]) -> Vec<Complex64> {
        self.0.iter().map(|&p| points[p]).collect()
    }

    /// Exchanges the points carried by labels `a` and `b`.
    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut next = self.0.clone();
        next.swap(a, b);
        LabelingPermutation(next)
    }
}

impl fmt::Debug for LabelingPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Sub-constellation placement on one RE.
///
/// Slot `v` is the `v`-th active user of the RE in ascending order; it is
/// given sub-constellation `user_order[v]` relabeled by `labelings[v]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReAssignment {
    pub re_index: usize,
    pub user_order: Vec<usize>,
    pub labelings: Vec<LabelingPermutation>,
}

impl ReAssignment {
    /// Natural order with identity labels.
    pub fn identity(re_index: usize, df: usize, m: usize) -> Self {
        ReAssignment {
            re_index,
            user_order: (0..df).collect(),
            labelings: vec![LabelingPermutation::identity(m); df],
        }
    }

    fn validate(&self, df: usize, m: usize) -> Result<()> {
        let order_ok = self.user_order.len() == df
            && LabelingPermutation::new(self.user_order.clone()).is_ok();
        if !order_ok {
            return Err(Error::Validation(format!(
                "RE {}: user order {:?} is not a permutation of 0..{df}",
                self.re_index, self.user_order
            )));
        }
        if self.labelings.len() != df || self.labelings.iter().any(|p| p.len() != m) {
            return Err(Error::Validation(format!("RE {}: labelings do not match d_f x M", self.re_index)));
        }
        Ok(())
    }

    /// The `d_f` relabeled sub-constellations, one per slot.
    pub fn slot_points(&self, group: &ConstellationGroup) -> Vec<Vec<Complex64>> {
        self.user_order
            .iter()
            .zip(&self.labelings)
            .map(|(&a, p)| p.apply(group.subconstellation(a)))
            .collect()
    }
}

/// One user's `M` codewords of length `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub user: usize,
    /// `codewords[n][k]` is symbol `n`'s value on RE `k`.
    pub codewords: Vec<Vec<Complex64>>,
}

impl Codebook {
    /// Codebook size `M`.
    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    /// Codeword length `K`.
    pub fn res(&self) -> usize {
        self.codewords.first().map(Vec::len).unwrap_or(0)
    }

    /// Average squared norm of a codeword.
    pub fn energy(&self) -> f64 {
        let total: f64 = self.codewords.iter().flatten().map(|x| x.norm_sqr()).sum();
        total / self.size() as f64
    }

    /// REs on which at least one codeword is non-zero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.res())
            .filter(|&k| self.codewords.iter().any(|c| c[k] != Complex64::new(0.0, 0.0)))
            .collect()
    }
}

/// How labelings are searched on each RE.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// All `d_f! (M!)^d_f` candidates.
    Exhaustive,
    /// All `d_f!` orders, labels by greedy transposition descent.
    BinarySwitching,
    /// Exhaustive unless `(M!)^d_f` exceeds [`EXHAUSTIVE_LABELING_LIMIT`].
    Auto,
}

impl SearchMode {
    fn resolve(self, m: usize, df: usize) -> SearchMode {
        match self {
            SearchMode::Auto => {
                let labelings = factorial(m).checked_pow(df as u32);
                if labelings.is_some_and(|n| n <= EXHAUSTIVE_LABELING_LIMIT) {
                    SearchMode::Exhaustive
                } else {
                    SearchMode::BinarySwitching
                }
            }
            other => other,
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::BinarySwitching => "binary-switching",
            SearchMode::Auto => "auto",
        })
    }
}

/// Output of [`build_codebooks`].
#[derive(Clone, Debug)]
pub struct Design {
    pub codebooks: Vec<Codebook>,
    pub assignments: Vec<ReAssignment>,
    /// Cumulative objective after placing REs `0..=k`.
    pub objectives_per_re: Vec<f64>,
    /// Mode actually used after resolving [`SearchMode::Auto`].
    pub search_mode: SearchMode,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All permutations of `0..n` in lexicographic order.
pub fn lexicographic_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot has a successor");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Symbol tuples of a set of users, user `users[0]` varying fastest.
struct JointAlphabet {
    users: Vec<usize>,
    m: usize,
    size: usize,
}

impl JointAlphabet {
    fn new(mut users: Vec<usize>, m: usize) -> Result<Self> {
        users.sort_unstable();
        users.dedup();
        let size = checked_power(m, users.len())?;
        Ok(JointAlphabet { users, m, size })
    }

    fn position(&self, user: usize) -> usize {
        self.users.binary_search(&user).expect("user is part of the alphabet")
    }

    /// For every joint tuple, the local tuple index over `slot_users`
    /// (slot 0 fastest).
    fn local_indices(&self, slot_users: &[usize]) -> Vec<u32> {
        let strides: Vec<usize> = slot_users.iter().map(|&u| self.m.pow(self.position(u) as u32)).collect();
        (0..self.size)
            .map(|t| {
                let mut local = 0;
                let mut scale = 1;
                for &stride in &strides {
                    local += (t / stride) % self.m * scale;
                    scale *= self.m;
                }
                local as u32
            })
            .collect()
    }
}

/// Superimposed value of every local tuple of an RE, slot 0 fastest.
fn local_points(slots: &[Vec<Complex64>], m: usize) -> Vec<Complex64> {
    let total = m.pow(slots.len() as u32);
    (0..total)
        .map(|mut i| {
            let mut sum = Complex64::new(0.0, 0.0);
            for s in slots {
                sum += s[i % m];
                i /= m;
            }
            sum
        })
        .collect()
}

fn factor_table(points: &[Complex64], factor: &PairFactor) -> Vec<f64> {
    let n = points.len();
    let mut t = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            t[a * n + b] = factor.eval((points[a] - points[b]).norm_sqr());
        }
    }
    t
}

fn check_inputs(f: &IndicatorMatrix, group: &ConstellationGroup) -> Result<()> {
    if group.df() != f.df() {
        return Err(Error::Validation(format!(
            "group has d_f = {} but the indicator matrix has d_f = {}",
            group.df(),
            f.df()
        )));
    }
    Ok(())
}

/// Union-bound objective of a partial design covering the REs listed in
/// `assignments` (without the `1/2` PEP factor and `1/M^L` normalization).
///
/// The double sum runs over ordered pairs of distinct symbol tuples of the
/// users active in those REs. Tuple pairs that coincide on every RE add 1.
pub fn cumulative_objective(
    f: &IndicatorMatrix,
    group: &ConstellationGroup,
    assignments: &[ReAssignment],
    spec: &ChannelSpec,
    es_over_n0: f64,
) -> Result<f64> {
    check_inputs(f, group)?;
    let m = group.m();
    let factor = PairFactor::new(*spec, es_over_n0);
    let mut users = Vec::new();
    let mut slot_users = Vec::new();
    for a in assignments {
        a.validate(f.df(), m)?;
        let active = f.active_users(a.re_index)?.users;
        users.extend_from_slice(&active);
        slot_users.push(active);
    }
    let joint = JointAlphabet::new(users, m)?;
    if joint.size.checked_mul(joint.size).is_none_or(|p| p > MAX_PAIR_ENUMERATION) {
        return Err(Error::Parameter(format!("joint alphabet of {} tuples is too large", joint.size)));
    }
    let per_re: Vec<(Vec<u32>, Vec<f64>, usize)> = assignments
        .iter()
        .zip(&slot_users)
        .map(|(a, su)| {
            let pts = local_points(&a.slot_points(group), m);
            (joint.local_indices(su), factor_table(&pts, &factor), pts.len())
        })
        .collect();

    let rows: Vec<f64> = (0..joint.size)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..joint.size {
                if i == j {
                    continue;
                }
                let mut prod = 1.0;
                for (idx, table, n) in &per_re {
                    prod *= table[idx[i] as usize * n + idx[j] as usize];
                }
                acc += prod;
            }
            acc
        })
        .collect();
    Ok(rows.iter().sum())
}

/// Greedy label-swap descent over one or more labelings.
///
/// Each round evaluates every transposition of two labels in every labeling
/// and applies the single swap with the largest decrease; it stops when no
/// swap decreases `objective`. Returns the final labelings and their value.
pub fn binary_switching<F>(start: Vec<LabelingPermutation>, mut objective: F) -> (Vec<LabelingPermutation>, f64)
where
    F: FnMut(&[LabelingPermutation]) -> f64,
{
    let mut current = start;
    let mut value = objective(&current);
    loop {
        let mut best: Option<(usize, usize, usize, f64)> = None;
        for slot in 0..current.len() {
            let m = current[slot].len();
            for a in 0..m {
                for b in a + 1..m {
                    let original = current[slot].clone();
                    current[slot] = original.swapped(a, b);
                    let v = objective(&current);
                    current[slot] = original;
                    if v < value && best.is_none_or(|(.., bv)| v < bv) {
                        best = Some((slot, a, b, v));
                    }
                }
            }
        }
        match best {
            Some((slot, a, b, v)) => {
                current[slot] = current[slot].swapped(a, b);
                value = v;
            }
            None => return (current, value),
        }
    }
}

/// Binary switching for a single labeling.
pub fn binary_switching_labeling<F>(start: LabelingPermutation, mut objective: F) -> LabelingPermutation
where
    F: FnMut(&LabelingPermutation) -> f64,
{
    let (mut out, _) = binary_switching(vec![start], |p| objective(&p[0]));
    out.pop().expect("one labeling in, one out")
}

/// Candidate scorer for one RE: pair weights folded from the earlier REs.
pub(crate) struct ReSearch<'a> {
    group: &'a ConstellationGroup,
    factor: PairFactor,
    m: usize,
    df: usize,
    /// Symmetric `M^d_f x M^d_f` weight of each local tuple pair.
    weights: Vec<f64>,
    /// Number of identical joint tuples, subtracted from the full sum.
    diagonal: f64,
}

impl<'a> ReSearch<'a> {
    pub(crate) fn new(
        f: &IndicatorMatrix,
        group: &'a ConstellationGroup,
        placed: &[ReAssignment],
        re_index: usize,
        factor: PairFactor,
    ) -> Result<Self> {
        let m = group.m();
        let df = group.df();
        let slots = f.active_users(re_index)?.users;
        let mut prev_users = Vec::new();
        let mut prev_slot_users = Vec::new();
        for a in placed {
            let active = f.active_users(a.re_index)?.users;
            prev_users.extend_from_slice(&active);
            prev_slot_users.push(active);
        }
        let prev = JointAlphabet::new(prev_users, m)?;
        if prev.size.checked_mul(prev.size).is_none_or(|p| p > MAX_PAIR_ENUMERATION) {
            return Err(Error::Parameter(format!("joint alphabet of {} tuples is too large", prev.size)));
        }

        // slots of this RE whose users already appeared
        let shared: Vec<usize> = (0..df).filter(|&v| prev.users.binary_search(&slots[v]).is_ok()).collect();
        let shared_users: Vec<usize> = shared.iter().map(|&v| slots[v]).collect();
        let shared_size = m.pow(shared.len() as u32);
        let shared_index = prev.local_indices(&shared_users);

        let tables: Vec<(Vec<u32>, Vec<f64>, usize)> = placed
            .iter()
            .zip(&prev_slot_users)
            .map(|(a, su)| {
                let pts = local_points(&a.slot_points(group), m);
                (prev.local_indices(su), factor_table(&pts, &factor), pts.len())
            })
            .collect();

        let partial: Vec<Vec<f64>> = (0..prev.size)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0; shared_size];
                for j in 0..prev.size {
                    let mut prod = 1.0;
                    for (idx, table, n) in &tables {
                        prod *= table[idx[i] as usize * n + idx[j] as usize];
                    }
                    row[shared_index[j] as usize] += prod;
                }
                row
            })
            .collect();
        let mut shared_weights = vec![0.0; shared_size * shared_size];
        for (i, row) in partial.iter().enumerate() {
            let a = shared_index[i] as usize;
            for (b, w) in row.iter().enumerate() {
                shared_weights[a * shared_size + b] += w;
            }
        }

        let local = m.pow(df as u32);
        let project = |t: usize| -> usize {
            let mut idx = 0;
            let mut scale = 1;
            for &v in &shared {
                idx += (t / m.pow(v as u32)) % m * scale;
                scale *= m;
            }
            idx
        };
        let proj: Vec<usize> = (0..local).map(project).collect();
        let mut weights = vec![0.0; local * local];
        for i in 0..local {
            for j in 0..local {
                weights[i * local + j] = shared_weights[proj[i] * shared_size + proj[j]];
            }
        }
        let new_users = df - shared.len();
        let diagonal = (prev.size * m.pow(new_users as u32)) as f64;
        Ok(ReSearch { group, factor, m, df, weights, diagonal })
    }

    /// Cumulative objective after placing this RE with `order`/`labelings`.
    pub(crate) fn score(&self, order: &[usize], labelings: &[&[usize]]) -> f64 {
        let local = self.m.pow(self.df as u32);
        let mut pts = vec![Complex64::new(0.0, 0.0); local];
        for (t, p) in pts.iter_mut().enumerate() {
            let mut rest = t;
            for v in 0..self.df {
                let label = rest % self.m;
                rest /= self.m;
                *p += self.group.subconstellation(order[v])[labelings[v][label]];
            }
        }
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..local {
            let row = &self.weights[i * local..(i + 1) * local];
            diag += row[i];
            for j in i + 1..local {
                off += row[j] * self.factor.eval((pts[i] - pts[j]).norm_sqr());
            }
        }
        2.0 * off + diag - self.diagonal
    }
}

/// Runs the progressive reconstruction and assembles the `L` codebooks.
pub fn build_codebooks(
    f: &IndicatorMatrix,
    group: &ConstellationGroup,
    spec: &ChannelSpec,
    es_over_n0: f64,
    mode: SearchMode,
) -> Result<Design> {
    check_inputs(f, group)?;
    spec.validated()?;
    if !(es_over_n0 > 0.0) {
        return Err(Error::Domain(format!("Es/N0 = {es_over_n0} must be > 0")));
    }
    let (m, df) = (group.m(), group.df());
    let mode = mode.resolve(m, df);
    let factor = PairFactor::new(*spec, es_over_n0);

    let mut assignments = vec![ReAssignment::identity(0, df, m)];
    let mut objectives = vec![cumulative_objective(f, group, &assignments, spec, es_over_n0)?];
    let orders = lexicographic_permutations(df);
    let labelings = lexicographic_permutations(m);

    for k in 1..f.res() {
        let search = ReSearch::new(f, group, &assignments, k, factor)?;
        let (choice, value) = match mode {
            SearchMode::Exhaustive => exhaustive_search(&search, &orders, &labelings, df),
            _ => switching_search(&search, &orders, df, m),
        };
        assignments.push(ReAssignment { re_index: k, ..choice });
        objectives.push(value);
    }

    let codebooks = assemble_codebooks(f, group, &assignments)?;
    Ok(Design { codebooks, assignments, objectives_per_re: objectives, search_mode: mode })
}

fn exhaustive_search(
    search: &ReSearch<'_>,
    orders: &[Vec<usize>],
    labelings: &[Vec<usize>],
    df: usize,
) -> (ReAssignment, f64) {
    let per_order = labelings.len().pow(df as u32);
    let total = orders.len() * per_order;
    let decode = |index: usize| -> (usize, Vec<usize>) {
        let order = index / per_order;
        let mut rest = index % per_order;
        let mut labs = vec![0; df];
        for v in (0..df).rev() {
            labs[v] = rest % labelings.len();
            rest /= labelings.len();
        }
        (order, labs)
    };
    let chunk = labelings.len();
    let (value, index) = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut best = (f64::INFINITY, usize::MAX);
            for index in c * chunk..(c + 1) * chunk {
                let (o, labs) = decode(index);
                let slices: Vec<&[usize]> = labs.iter().map(|&l| labelings[l].as_slice()).collect();
                let v = search.score(&orders[o], &slices);
                if v < best.0 {
                    best = (v, index);
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, usize::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let (o, labs) = decode(index);
    let choice = ReAssignment {
        re_index: 0,
        user_order: orders[o].clone(),
        labelings: labs.iter().map(|&l| LabelingPermutation(labelings[l].clone())).collect(),
    };
    (choice, value)
}

fn switching_search(search: &ReSearch<'_>, orders: &[Vec<usize>], df: usize, m: usize) -> (ReAssignment, f64) {
    let mut best: Option<(ReAssignment, f64)> = None;
    for order in orders {
        let (labs, value) = binary_switching(vec![LabelingPermutation::identity(m); df], |labs| {
            let slices: Vec<&[usize]> = labs.iter().map(LabelingPermutation::as_slice).collect();
            search.score(order, &slices)
        });
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((ReAssignment { re_index: 0, user_order: order.clone(), labelings: labs }, value));
        }
    }
    best.expect("at least one user order")
}

/// Places the relabeled sub-constellations of every RE into per-user
/// codebooks.
pub fn assemble_codebooks(
    f: &IndicatorMatrix,
    group: &ConstellationGroup,
    assignments: &[ReAssignment],
) -> Result<Vec<Codebook>> {
    check_inputs(f, group)?;
    let (m, res) = (group.m(), f.res());
    let mut seen = vec![false; res];
    let mut codebooks: Vec<Codebook> = (0..f.users())
        .map(|user| Codebook { user, codewords: vec![vec![Complex64::new(0.0, 0.0); res]; m] })
        .collect();
    for a in assignments {
        a.validate(f.df(), m)?;
        if a.re_index >= res || std::mem::replace(&mut seen[a.re_index], true) {
            return Err(Error::Validation(format!("RE {} assigned twice or out of range", a.re_index)));
        }
        let slots = a.slot_points(group);
        for (user, points) in f.active_users(a.re_index)?.users.into_iter().zip(slots) {
            for (n, x) in points.into_iter().enumerate() {
                codebooks[user].codewords[n][a.re_index] = x;
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Validation("not every RE has an assignment".into()));
    }
    Ok(codebooks)
}

/// Rotation indices per RE for the 4 x 6 pattern, taken from the classic
/// signature matrix: `(users of the RE, sub-constellation per user)`.
const FOUR_BY_SIX_SIGNATURE: [([usize; 3], [usize; 3]); 4] = [
    ([1, 2, 4], [2, 0, 1]),
    ([1, 3, 5], [1, 0, 2]),
    ([0, 2, 5], [1, 2, 0]),
    ([0, 3, 4], [0, 1, 2]),
];

/// Fixed identity-labeled assignments used for rotated-constellation
/// baselines.
///
/// For the 4 x 6 reference pattern this reproduces the standard signature
/// matrix, which gives every user two distinct rotations. Other patterns use
/// the cyclic shift `order[v] = (v + k) mod d_f`.
pub fn signature_assignments(f: &IndicatorMatrix, m: usize) -> Result<Vec<ReAssignment>> {
    let df = f.df();
    (0..f.res())
        .map(|k| {
            let users = f.active_users(k)?.users;
            let table = FOUR_BY_SIX_SIGNATURE.iter().find(|(u, _)| df == 3 && f.users() == 6 && u[..] == users[..]);
            let user_order = match table {
                Some((_, order)) => order.to_vec(),
                None => (0..df).map(|v| (v + k) % df).collect(),
            };
            Ok(ReAssignment { re_index: k, user_order, labelings: vec![LabelingPermutation::identity(m); df] })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_optimizer::{baseline_group, default_baseline_angles, qpsk};

    fn group() -> ConstellationGroup {
        baseline_group(&qpsk(), &default_baseline_angles(3)).unwrap()
    }

    #[test]
    fn permutation_algebra() {
        let p = LabelingPermutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(p.compose(&p.inverse()), LabelingPermutation::identity(3));
        assert_eq!(p.inverse().compose(&p), LabelingPermutation::identity(3));
        assert!(LabelingPermutation::new(vec![0, 0, 1]).is_err());
        assert!(LabelingPermutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn lexicographic_enumeration() {
        let perms = lexicographic_permutations(3);
        assert_eq!(perms, [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]);
        assert_eq!(lexicographic_permutations(4).len(), 24);
        assert_eq!(lexicographic_permutations(1), [[0]]);
    }

    #[test]
    fn auto_mode_resolution() {
        assert_eq!(SearchMode::Auto.resolve(4, 3), SearchMode::Exhaustive);
        assert_eq!(SearchMode::Auto.resolve(8, 3), SearchMode::BinarySwitching);
        assert_eq!(SearchMode::Auto.resolve(16, 4), SearchMode::BinarySwitching);
    }

    #[test]
    fn single_re_reduces_to_group_objective() {
        let f = IndicatorMatrix::four_by_six();
        let spec = ChannelSpec::rayleigh(0.5).unwrap();
        let g = group();
        let k0 = cumulative_objective(&f, &g, &[ReAssignment::identity(0, 3, 4)], &spec, 40.0).unwrap();
        let single = crate::group_optimizer::objective_ser(&g, &spec, 40.0).value;
        assert!((k0 - 64.0 * single).abs() < 1e-9 * k0);
    }

    #[test]
    fn fast_score_matches_direct_enumeration() {
        let f = IndicatorMatrix::four_by_six();
        let spec = ChannelSpec::rayleigh(0.5).unwrap();
        let g = group();
        let factor = PairFactor::new(spec, 40.0);
        let placed = vec![ReAssignment::identity(0, 3, 4)];
        let search = ReSearch::new(&f, &g, &placed, 1, factor).unwrap();
        let cand = ReAssignment {
            re_index: 1,
            user_order: vec![2, 0, 1],
            labelings: vec![
                LabelingPermutation::new(vec![1, 0, 3, 2]).unwrap(),
                LabelingPermutation::identity(4),
                LabelingPermutation::new(vec![3, 1, 2, 0]).unwrap(),
            ],
        };
        let slices: Vec<&[usize]> = cand.labelings.iter().map(LabelingPermutation::as_slice).collect();
        let fast = search.score(&cand.user_order, &slices);
        let direct = cumulative_objective(&f, &g, &[placed[0].clone(), cand], &spec, 40.0).unwrap();
        assert!((fast - direct).abs() < 1e-9 * direct, "{fast} vs {direct}");
    }

    #[test]
    fn dimension_mismatch() {
        let f = IndicatorMatrix::four_by_six();
        let g = baseline_group(&qpsk(), &[0.0, 0.5]).unwrap();
        let spec = ChannelSpec::rayleigh(0.5).unwrap();
        assert!(matches!(build_codebooks(&f, &g, &spec, 40.0, SearchMode::Auto), Err(Error::Validation(_))));
    }

    #[test]
    fn signature_gives_distinct_rotations_per_user() {
        let f = IndicatorMatrix::four_by_six();
        let a = signature_assignments(&f, 4).unwrap();
        for user in 0..6 {
            let mut rot = Vec::new();
            for (k, asg) in a.iter().enumerate() {
                let active = f.active_users(k).unwrap().users;
                if let Some(slot) = active.iter().position(|&u| u == user) {
                    rot.push(asg.user_order[slot]);
                }
            }
            assert_eq!(rot.len(), 2);
            assert_ne!(rot[0], rot[1], "user {user}");
        }
    }

    #[test]
    fn binary_switching_two_points() {
        let pts = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        // prefer label 0 on the negative point
        let out = binary_switching_labeling(LabelingPermutation::identity(2), |p| p.apply(&pts)[0].re);
        assert_eq!(out.as_slice(), [1, 0]);
    }
}
