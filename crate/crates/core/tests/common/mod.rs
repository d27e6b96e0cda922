//! Reference computations shared by the integration tests. Everything here
//! is written from first principles and does not call into the library's
//! numerics.

#![allow(dead_code)]

use num_complex::Complex64;
use scma_forge::channels::ChannelSpec;
use scma_forge::group_optimizer::ConstellationGroup;
use scma_forge::progressive_builder::ReAssignment;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let pair = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return value;
        }
        let mid = 0.5 * (a + b);
        step(f, a, mid, tol / 2.0, depth - 1) + step(f, mid, b, tol / 2.0, depth - 1)
    }
    step(f, a, b, tol, 40)
}

/// `int_0^inf f`, through `x = scale * t / (1 - t)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: &F, scale: f64, tol: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = scale * t / (1.0 - t);
        let v = f(x) * scale / ((1.0 - t) * (1.0 - t));
        if v.is_finite() { v } else { 0.0 }
    };
    integrate(&g, 0.0, 1.0, tol)
}

/// `ln I_0(x)` by summing the power series in the log domain.
pub fn ln_bessel_i0(x: f64) -> f64 {
    assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let half = (0.5 * x).ln();
    let mut terms = Vec::new();
    let mut k = 0u32;
    loop {
        let t = 2.0 * k as f64 * half - 2.0 * ln_gamma(k as f64 + 1.0);
        terms.push(t);
        let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if k as f64 > x && t < peak - 50.0 {
            break;
        }
        k += 1;
    }
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln()
}

/// Density of the instantaneous SNR with mean `gamma_bar` for a channel's
/// fading shape.
pub fn snr_pdf(spec: &ChannelSpec, gamma_bar: f64, g: f64) -> f64 {
    if g < 0.0 {
        return 0.0;
    }
    match *spec {
        ChannelSpec::Rayleigh { .. } => (-g / gamma_bar).exp() / gamma_bar,
        ChannelSpec::Rician { sigma2, u } => {
            let k = u * u / (2.0 * sigma2);
            let ln = (1.0 + k).ln() - k - gamma_bar.ln() - (1.0 + k) * g / gamma_bar
                + ln_bessel_i0(2.0 * (k * (1.0 + k) * g / gamma_bar).sqrt());
            ln.exp()
        }
        ChannelSpec::Nakagami { m, .. } => {
            if g == 0.0 {
                return if m < 1.0 { f64::INFINITY } else if m == 1.0 { 1.0 / gamma_bar } else { 0.0 };
            }
            let ln = m * (m / gamma_bar).ln() + (m - 1.0) * g.ln() - m * g / gamma_bar - ln_gamma(m);
            ln.exp()
        }
    }
}

/// `E[exp(-s * gamma)]` by quadrature of the SNR density.
pub fn mgf_by_quadrature(spec: &ChannelSpec, s: f64, gamma_bar: f64) -> f64 {
    let f = |g: f64| (-s * g).exp() * snr_pdf(spec, gamma_bar, g);
    integrate_half_line(&f, gamma_bar.min(1.0 / s), 1e-11)
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exact symbol error rate of unit-energy QPSK in Rayleigh fading with
/// average SNR `gamma_bar`: the average of `2Q - Q^2` at `Q = Q(sqrt(gamma))`.
pub fn qpsk_rayleigh_ser(gamma_bar: f64) -> f64 {
    let f = |g: f64| {
        let q = q_function(g.sqrt());
        (2.0 * q - q * q) * (-g / gamma_bar).exp() / gamma_bar
    };
    integrate_half_line(&f, gamma_bar, 1e-12)
}

/// Length of the shortest cycle of the bipartite graph of a binary matrix,
/// found by enumerating simple cycles; `None` when acyclic.
pub fn girth(rows: &[Vec<u8>]) -> Option<usize> {
    let k = rows.len();
    let l = rows[0].len();
    // vertices 0..k are REs, k..k+l users
    let n = k + l;
    let mut adj = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for (c, &bit) in row.iter().enumerate() {
            if bit == 1 {
                adj[r].push(k + c);
                adj[k + c].push(r);
            }
        }
    }
    fn walk(adj: &[Vec<usize>], start: usize, at: usize, len: usize, seen: &mut [bool], best: &mut Option<usize>) {
        for &next in &adj[at] {
            if next == start && len >= 3 {
                *best = Some(best.map_or(len, |b| b.min(len)));
            } else if next > start && !seen[next] && best.is_none_or(|b| len + 1 < b) {
                seen[next] = true;
                walk(adj, start, next, len + 1, seen, best);
                seen[next] = false;
            }
        }
    }
    let mut best = None;
    for start in 0..n {
        let mut seen = vec![false; n];
        seen[start] = true;
        walk(&adj, start, start, 1, &mut seen, &mut best);
    }
    best
}

/// All permutations of `0..n`, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for x in 0..n {
            if !prefix.contains(&x) {
                prefix.push(x);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

/// One candidate placement on an RE: a sub-constellation per slot and a
/// labeling per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub order: Vec<usize>,
    pub labels: Vec<Vec<usize>>,
}

impl Candidate {
    pub fn from_assignment(a: &ReAssignment) -> Self {
        Candidate { order: a.user_order.clone(), labels: a.labelings.iter().map(|p| p.as_slice().to_vec()).collect() }
    }

    /// Value on the RE of slot `v` sending label `n`.
    pub fn point(&self, group: &ConstellationGroup, v: usize, n: usize) -> Complex64 {
        group.subconstellation(self.order[v])[self.labels[v][n]]
    }
}

/// Every candidate of one RE in search order: user order major, then the
/// labelings with slot 0 most significant.
pub fn all_candidates(df: usize, m: usize) -> Vec<Candidate> {
    let orders = permutations(df);
    let labs = permutations(m);
    let mut out = Vec::new();
    for order in &orders {
        let total = labs.len().pow(df as u32);
        for mut idx in 0..total {
            let mut labels = vec![Vec::new(); df];
            for v in (0..df).rev() {
                labels[v] = labs[idx % labs.len()].clone();
                idx /= labs.len();
            }
            out.push(Candidate { order: order.clone(), labels });
        }
    }
    out
}

/// Brute-force cumulative objective for the progressive search.
///
/// Enumerates every ordered pair of distinct symbol tuples of the users that
/// touch REs `0..=re`, multiplying `factor(|difference|^2)` over those REs.
/// The earlier REs use `placed`; RE `re` is evaluated per candidate.
pub struct ProgressiveOracle<'a> {
    group: &'a ConstellationGroup,
    m: usize,
    /// Active users of RE `re`, ascending.
    slot_users: Vec<usize>,
    /// `weight[a * n + b]`: summed earlier-RE factor over tuple pairs whose
    /// restriction to `slot_users` is `(a, b)`.
    weight: Vec<f64>,
    local: usize,
    factor: &'a dyn Fn(f64) -> f64,
}

impl<'a> ProgressiveOracle<'a> {
    pub fn new(
        rows: &[Vec<u8>],
        group: &'a ConstellationGroup,
        placed: &[Candidate],
        re: usize,
        factor: &'a dyn Fn(f64) -> f64,
    ) -> Self {
        let m = group.subconstellation(0).len();
        let users_of = |k: usize| -> Vec<usize> { (0..rows[k].len()).filter(|&l| rows[k][l] == 1).collect() };
        let mut involved: Vec<usize> = (0..=re).flat_map(users_of).collect();
        involved.sort();
        involved.dedup();
        let slot_users = users_of(re);
        let tuples = m.pow(involved.len() as u32);
        let symbol = |t: usize, user: usize| -> usize {
            let pos = involved.iter().position(|&u| u == user).unwrap();
            (t / m.pow(pos as u32)) % m
        };
        // superimposed value of every tuple on each earlier RE
        let sums: Vec<Vec<Complex64>> = (0..tuples)
            .map(|t| {
                (0..re)
                    .map(|k| {
                        users_of(k)
                            .iter()
                            .enumerate()
                            .map(|(v, &u)| placed[k].point(group, v, symbol(t, u)))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let local_of: Vec<usize> = (0..tuples)
            .map(|t| slot_users.iter().enumerate().map(|(v, &u)| symbol(t, u) * m.pow(v as u32)).sum())
            .collect();
        let local = m.pow(slot_users.len() as u32);
        let mut weight = vec![0.0; local * local];
        for i in 0..tuples {
            for j in 0..tuples {
                if i == j {
                    continue;
                }
                let w: f64 = (0..re).map(|k| factor((sums[i][k] - sums[j][k]).norm_sqr())).product();
                weight[local_of[i] * local + local_of[j]] += w;
            }
        }
        ProgressiveOracle { group, m, slot_users, weight, local, factor }
    }

    /// Cumulative objective with `cand` on the current RE.
    pub fn objective(&self, cand: &Candidate) -> f64 {
        let df = self.slot_users.len();
        let values: Vec<Complex64> = (0..self.local)
            .map(|t| (0..df).map(|v| cand.point(self.group, v, (t / self.m.pow(v as u32)) % self.m)).sum())
            .collect();
        let mut total = 0.0;
        for a in 0..self.local {
            for b in 0..self.local {
                let w = self.weight[a * self.local + b];
                if w != 0.0 {
                    total += w * (self.factor)((values[a] - values[b]).norm_sqr());
                }
            }
        }
        total
    }
}
