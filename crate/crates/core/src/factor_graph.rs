//! Sparse indicator matrices and their RE/user adjacency.
//!
//! An [`IndicatorMatrix`] is a `K x L` binary matrix: entry `(k, l)` is set
//! when user `l` spreads a non-zero symbol onto resource element `k`. Every
//! column carries `d_v` ones and every row `d_f` ones. All indices in this
//! crate are zero-based.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Regular `K x L` sparsity pattern of an SCMA codebook set.
#[derive(Clone, PartialEq, Eq)]
pub struct IndicatorMatrix {
    entries: Vec<bool>,
    res: usize,
    users: usize,
    dv: usize,
    df: usize,
}

/// The users colliding on one resource element, in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReUserSet {
    pub re_index: usize,
    pub users: Vec<usize>,
}

impl IndicatorMatrix {
    /// Builds a matrix from rows of 0/1 entries and checks every invariant.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let res = rows.len();
        if res == 0 {
            return Err(Error::Validation("indicator matrix has no rows".into()));
        }
        let users = rows[0].len();
        if users == 0 {
            return Err(Error::Validation("indicator matrix has no columns".into()));
        }
        let mut entries = Vec::with_capacity(res * users);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != users {
                return Err(Error::Validation(format!(
                    "row {k} has {} entries, expected {users}",
                    row.len()
                )));
            }
            for &bit in row {
                match bit {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    other => {
                        return Err(Error::Validation(format!(
                            "row {k} contains non-binary entry {other}"
                        )))
                    }
                }
            }
        }
        Self::from_entries(entries, res, users)
    }

    /// Parses rows written as bitstrings such as `"011010"`.
    pub fn from_bitstrings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|row| {
                row.as_ref()
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        other => Err(Error::Validation(format!(
                            "invalid character {other:?} in indicator row"
                        ))),
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }

    fn from_entries(entries: Vec<bool>, res: usize, users: usize) -> Result<Self> {
        let col_weight = |l: usize| (0..res).filter(|&k| entries[k * users + l]).count();
        let row_weight = |k: usize| entries[k * users..(k + 1) * users].iter().filter(|&&b| b).count();

        let dv = col_weight(0);
        let df = row_weight(0);
        if dv == 0 || df == 0 {
            return Err(Error::Validation("indicator matrix has an empty row or column".into()));
        }
        for l in 0..users {
            if col_weight(l) != dv {
                return Err(Error::Validation(format!(
                    "column {l} has weight {}, expected {dv}",
                    col_weight(l)
                )));
            }
        }
        for k in 0..res {
            if row_weight(k) != df {
                return Err(Error::Validation(format!(
                    "row {k} has weight {}, expected {df}",
                    row_weight(k)
                )));
            }
        }
        debug_assert_eq!(res * df, users * dv);

        let matrix = IndicatorMatrix { entries, res, users, dv, df };
        for a in 0..users {
            for b in a + 1..users {
                if matrix.column_support(a) == matrix.column_support(b) {
                    return Err(Error::Validation(format!(
                        "columns {a} and {b} have identical footprints"
                    )));
                }
            }
        }
        Ok(matrix)
    }

    /// The 4 x 6 regular pattern widely used for 150% overloaded SCMA.
    pub fn four_by_six() -> Self {
        Self::from_bitstrings(&["011010", "010101", "101001", "100110"])
            .expect("reference pattern is valid")
    }

    /// Number of resource elements `K`.
    pub fn res(&self) -> usize {
        self.res
    }

    /// Number of users `L`.
    pub fn users(&self) -> usize {
        self.users
    }

    /// Non-zero entries per column.
    pub fn dv(&self) -> usize {
        self.dv
    }

    /// Non-zero entries per row.
    pub fn df(&self) -> usize {
        self.df
    }

    pub fn get(&self, k: usize, l: usize) -> bool {
        self.entries[k * self.users + l]
    }

    /// Resource elements occupied by user `l`, ascending.
    pub fn column_support(&self, l: usize) -> Vec<usize> {
        (0..self.res).filter(|&k| self.get(k, l)).collect()
    }

    /// Users active on resource element `k`, ascending.
    pub fn active_users(&self, k: usize) -> Result<ReUserSet> {
        if k >= self.res {
            return Err(Error::Index { index: k, len: self.res });
        }
        Ok(ReUserSet {
            re_index: k,
            users: (0..self.users).filter(|&l| self.get(k, l)).collect(),
        })
    }

    pub fn to_bitstrings(&self) -> Vec<String> {
        (0..self.res)
            .map(|k| {
                (0..self.users)
                    .map(|l| if self.get(k, l) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Debug for IndicatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndicatorMatrix")
            .field("rows", &self.to_bitstrings())
            .field("dv", &self.dv)
            .field("df", &self.df)
            .finish()
    }
}

/// Progressive edge-growth construction of a `(d_v, d_f)`-regular pattern.
///
/// Users are processed in index order. The first edge of a user goes to the
/// RE of lowest current degree. Every further edge goes to an RE that is as
/// far as possible from the user in the graph built so far (unreachable REs
/// count as infinitely far), which greedily maximizes the length of the
/// cycle the edge closes. Remaining ties go to the lowest degree, then to the
/// lowest index, so the construction is fully deterministic. REs that already
/// hold `d_f` edges are never candidates.
pub fn peg_construct(res: usize, users: usize, dv: usize) -> Result<IndicatorMatrix> {
    if res == 0 || users == 0 || dv == 0 {
        return Err(Error::Parameter("K, L and d_v must be positive".into()));
    }
    if dv > res {
        return Err(Error::Parameter(format!("d_v = {dv} exceeds K = {res}")));
    }
    if (users * dv) % res != 0 {
        return Err(Error::Parameter(format!(
            "L * d_v = {} is not divisible by K = {res}",
            users * dv
        )));
    }
    let df = users * dv / res;
    if df > users {
        return Err(Error::Parameter(format!("d_f = {df} exceeds L = {users}")));
    }

    let mut re_adj: Vec<Vec<usize>> = vec![Vec::new(); res];
    let mut user_adj: Vec<Vec<usize>> = vec![Vec::new(); users];

    for user in 0..users {
        for edge in 0..dv {
            let distance = if edge == 0 {
                vec![usize::MAX; res]
            } else {
                re_distances(user, &re_adj, &user_adj)
            };
            let pick = (0..res)
                .filter(|&k| re_adj[k].len() < df && !user_adj[user].contains(&k))
                .min_by_key(|&k| (std::cmp::Reverse(distance[k]), re_adj[k].len(), k))
                .ok_or_else(|| {
                    Error::Construction(format!("no admissible RE left for user {user}"))
                })?;
            re_adj[pick].push(user);
            user_adj[user].push(pick);
        }
    }

    let mut entries = vec![false; res * users];
    for (user, list) in user_adj.iter().enumerate() {
        for &k in list {
            entries[k * users + user] = true;
        }
    }
    IndicatorMatrix::from_entries(entries, res, users)
        .map_err(|e| Error::Construction(format!("edge growth produced an invalid pattern: {e}")))
}

/// Breadth-first RE distances (in RE hops) from `root`'s current neighborhood.
fn re_distances(root: usize, re_adj: &[Vec<usize>], user_adj: &[Vec<usize>]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; re_adj.len()];
    let mut seen_user = vec![false; user_adj.len()];
    seen_user[root] = true;
    let mut queue = VecDeque::new();
    for &k in &user_adj[root] {
        dist[k] = 0;
        queue.push_back(k);
    }
    while let Some(k) = queue.pop_front() {
        for &u in &re_adj[k] {
            if seen_user[u] {
                continue;
            }
            seen_user[u] = true;
            for &next in &user_adj[u] {
                if dist[next] == usize::MAX {
                    dist[next] = dist[k] + 1;
                    queue.push_back(next);
                }
            }
        }
    }
    dist
}
