//! Pairwise error probability bounds, the union-bound SER and distance
//! metrics of superimposed constellations.
//!
//! All distances are squared. For two superimposed codewords `c_i`, `c_j`
//! the Chernoff/MGF bound on the pairwise error probability is
//!
//! ```text
//! P(c_i -> c_j) <= 1/2 * prod_k M_gamma(-|c_{k,i} - c_{k,j}|^2 / 4)
//! ```
//!
//! and the union bound averages the sum over all wrong codewords.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::{ChannelSpec, PairFactor};
use crate::error::{Error, Result};
use crate::progressive_builder::Codebook;

/// Sets above this size use the halved symmetric-pair enumeration.
const EXACT_DOUBLE_LOOP_LIMIT: usize = 4096;

/// All distinct-tuple superpositions of a set of codebooks.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperimposedCodewordSet {
    codewords: Vec<Vec<Complex64>>,
    res: usize,
}

impl SuperimposedCodewordSet {
    pub fn new(codewords: Vec<Vec<Complex64>>) -> Result<Self> {
        let res = codewords.first().map(Vec::len).unwrap_or(0);
        if codewords.iter().any(|c| c.len() != res) {
            return Err(Error::Validation("superimposed codewords differ in length".into()));
        }
        Ok(SuperimposedCodewordSet { codewords, res })
    }

    /// Superimposes one codeword per user for every one of the `M^L` tuples.
    ///
    /// Tuple index `i` decodes as `i = sum_l m_l * M^l`, so user 0 varies
    /// fastest.
    pub fn from_codebooks(codebooks: &[Codebook]) -> Result<Self> {
        let first = codebooks
            .first()
            .ok_or_else(|| Error::Validation("no codebooks given".into()))?;
        let (m, res) = (first.size(), first.res());
        if codebooks.iter().any(|cb| cb.size() != m || cb.res() != res) {
            return Err(Error::Validation("codebooks disagree in size or length".into()));
        }
        let total = checked_power(m, codebooks.len())?;
        let codewords = (0..total)
            .map(|mut index| {
                let mut sum = vec![Complex64::new(0.0, 0.0); res];
                for cb in codebooks {
                    let word = &cb.codewords[index % m];
                    index /= m;
                    for (acc, x) in sum.iter_mut().zip(word) {
                        *acc += x;
                    }
                }
                sum
            })
            .collect();
        Self::new(codewords)
    }

    pub fn codewords(&self) -> &[Vec<Complex64>] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Codeword length `K`.
    pub fn res(&self) -> usize {
        self.res
    }
}

pub(crate) fn checked_power(base: usize, exp: usize) -> Result<usize> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(|| Error::Parameter(format!("{base}^{exp} overflows")))
}

/// Minimum distances of a superimposed set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceReport {
    /// Minimum squared Euclidean distance over all pairs.
    pub min_euclidean: f64,
    /// Minimum over pairs differing in every RE of the product of per-RE
    /// squared distances; zero when no such pair exists.
    pub min_product: f64,
    /// Number of unordered pairs that differ in every RE.
    pub pair_count: usize,
}

/// Chernoff/MGF upper bound on the probability of deciding `cj` when `ci`
/// was sent, at unit symbol energy and the given `Es/N0` (linear).
pub fn pep_bound(ci: &[Complex64], cj: &[Complex64], spec: &ChannelSpec, es_over_n0: f64) -> Result<f64> {
    if ci.len() != cj.len() {
        return Err(Error::Validation("codewords differ in length".into()));
    }
    if !(es_over_n0 > 0.0) {
        return Err(Error::Domain(format!("Es/N0 = {es_over_n0} must be > 0")));
    }
    if ci == cj {
        return Err(Error::DegeneratePair);
    }
    let factor = PairFactor::new(*spec, es_over_n0);
    Ok(0.5 * ci.iter().zip(cj).map(|(a, b)| factor.eval((a - b).norm_sqr())).product::<f64>())
}

/// Per-RE alphabets: the distinct values a set takes on every RE and, for
/// each codeword, the index of its value in that alphabet.
struct LocalAlphabets {
    values: Vec<Vec<Complex64>>,
    /// `index[i * res + k]`
    index: Vec<u32>,
    res: usize,
}

impl LocalAlphabets {
    fn new(set: &SuperimposedCodewordSet) -> Self {
        let res = set.res();
        let mut values = vec![Vec::new(); res];
        let mut lookup: Vec<HashMap<(u64, u64), u32>> = vec![HashMap::new(); res];
        let mut index = Vec::with_capacity(set.len() * res);
        for word in set.codewords() {
            for (k, x) in word.iter().enumerate() {
                let key = (x.re.to_bits(), x.im.to_bits());
                let next = values[k].len() as u32;
                let id = *lookup[k].entry(key).or_insert_with(|| {
                    values[k].push(*x);
                    next
                });
                index.push(id);
            }
        }
        LocalAlphabets { values, index, res }
    }

    fn tables(&self, factor: &PairFactor) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .map(|vals| {
                let n = vals.len();
                let mut table = vec![0.0; n * n];
                for a in 0..n {
                    for b in 0..n {
                        table[a * n + b] = factor.eval((vals[a] - vals[b]).norm_sqr());
                    }
                }
                table
            })
            .collect()
    }

    #[inline]
    fn row(&self, i: usize) -> &[u32] {
        &self.index[i * self.res..(i + 1) * self.res]
    }
}

/// Union bound on the symbol error rate:
/// `1/N * sum_i sum_{j != i} pep_bound(c_i, c_j)` with `N` the set size.
///
/// The value is a bound and is not clamped to 1.
pub fn ser_union_bound(set: &SuperimposedCodewordSet, spec: &ChannelSpec, es_over_n0: f64) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Validation("empty superimposed set".into()));
    }
    if !(es_over_n0 > 0.0) {
        return Err(Error::Domain(format!("Es/N0 = {es_over_n0} must be > 0")));
    }
    let n = set.len();
    let alphabets = LocalAlphabets::new(set);
    let factor = PairFactor::new(*spec, es_over_n0);
    let tables = alphabets.tables(&factor);
    let sizes: Vec<usize> = alphabets.values.iter().map(Vec::len).collect();
    let symmetric = n > EXACT_DOUBLE_LOOP_LIMIT;

    let pair_product = |a: &[u32], b: &[u32]| -> Option<f64> {
        let mut prod = 1.0;
        let mut differs = false;
        for k in 0..a.len() {
            let (x, y) = (a[k] as usize, b[k] as usize);
            differs |= x != y;
            prod *= tables[k][x * sizes[k] + y];
        }
        differs.then_some(prod)
    };

    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = alphabets.row(i);
            let start = if symmetric { i + 1 } else { 0 };
            let mut acc = 0.0;
            for j in start..n {
                if j == i {
                    continue;
                }
                match pair_product(a, alphabets.row(j)) {
                    Some(p) => acc += p,
                    None => {
                        return Err(Error::Validation(format!(
                            "codewords {i} and {j} are identical"
                        )))
                    }
                }
            }
            Ok(if symmetric { 2.0 * acc } else { acc })
        })
        .collect();

    let mut total = 0.0;
    for row in rows {
        total += row?;
    }
    Ok(0.5 * total / n as f64)
}

/// Minimum Euclidean and product distances of a superimposed set.
pub fn distance_report(set: &SuperimposedCodewordSet) -> Result<DistanceReport> {
    if set.len() < 2 {
        return Err(Error::Validation("distance report needs at least two codewords".into()));
    }
    let words = set.codewords();
    let partial: Vec<(f64, f64, usize)> = (0..words.len())
        .into_par_iter()
        .map(|i| {
            let mut min_e = f64::INFINITY;
            let mut min_p = f64::INFINITY;
            let mut count = 0usize;
            for j in i + 1..words.len() {
                let mut e = 0.0;
                let mut p = 1.0;
                let mut all_differ = true;
                for (a, b) in words[i].iter().zip(&words[j]) {
                    let d2 = (a - b).norm_sqr();
                    e += d2;
                    p *= d2;
                    all_differ &= d2 > 0.0;
                }
                min_e = min_e.min(e);
                if all_differ {
                    count += 1;
                    min_p = min_p.min(p);
                }
            }
            (min_e, min_p, count)
        })
        .collect();

    let mut report = DistanceReport { min_euclidean: f64::INFINITY, min_product: f64::INFINITY, pair_count: 0 };
    for (e, p, c) in partial {
        report.min_euclidean = report.min_euclidean.min(e);
        report.min_product = report.min_product.min(p);
        report.pair_count += c;
    }
    if report.pair_count == 0 {
        report.min_product = 0.0;
    }
    Ok(report)
}
