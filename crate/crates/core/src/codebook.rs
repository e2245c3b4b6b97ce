//! Binary linear block codes: parity-check matrices, alist I/O, generator
//! derivation by GF(2) elimination, encoding and syndromes.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};

/// Sparse parity-check matrix `H` of an `(n, k)` code together with its
/// Tanner-graph adjacency.
///
/// Edges are enumerated check-major: edge `e` belongs to check `c` when `e`
/// lies in [`ParityCheckMatrix::check_edges`]`(c)`, and within a check the
/// edges are ordered by ascending variable index. Message arrays and trained
/// weights rely on this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    chk_adj: Vec<Vec<usize>>,
    var_adj: Vec<Vec<usize>>,
    check_offsets: Vec<usize>,
    edge_var: Vec<usize>,
    edge_chk: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check lists of 0-based variable indices.
    /// Lists are sorted and deduplicated.
    pub fn from_check_lists(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCode("code length must be positive".into()));
        }
        if checks.len() >= n {
            return Err(Error::InvalidCode(format!(
                "{} checks leave no message bits for n = {n}",
                checks.len()
            )));
        }
        let mut chk_adj = checks;
        for (c, vars) in chk_adj.iter_mut().enumerate() {
            vars.sort_unstable();
            vars.dedup();
            if let Some(&v) = vars.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidCode(format!(
                    "check {c} references variable {v} outside 0..{n}"
                )));
            }
            if vars.len() < 2 {
                return Err(Error::InvalidCode(format!(
                    "check {c} has degree {} (at least 2 required)",
                    vars.len()
                )));
            }
        }

        let mut var_adj = vec![Vec::new(); n];
        let mut var_edges = vec![Vec::new(); n];
        let mut check_offsets = Vec::with_capacity(chk_adj.len() + 1);
        let mut edge_var = Vec::new();
        let mut edge_chk = Vec::new();
        check_offsets.push(0);
        for (c, vars) in chk_adj.iter().enumerate() {
            for &v in vars {
                var_adj[v].push(c);
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
                edge_chk.push(c);
            }
            check_offsets.push(edge_var.len());
        }

        Ok(Self {
            n,
            chk_adj,
            var_adj,
            check_offsets,
            edge_var,
            edge_chk,
            var_edges,
        })
    }

    /// Builds a matrix from dense 0/1 rows.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        let mut checks = Vec::with_capacity(rows.len());
        for (c, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidCode(format!(
                    "row {c} has length {} (expected {n})",
                    row.len()
                )));
            }
            let mut vars = Vec::new();
            for (v, &bit) in row.iter().enumerate() {
                match bit {
                    0 => {}
                    1 => vars.push(v),
                    other => {
                        return Err(Error::InvalidCode(format!(
                            "entry ({c}, {v}) is {other}, not a bit"
                        )))
                    }
                }
            }
            checks.push(vars);
        }
        Self::from_check_lists(n, checks)
    }

    /// Parses the MacKay alist format.
    pub fn parse_alist(text: &str) -> Result<Self> {
        AlistReader::new(text).read()
    }

    /// Serializes to alist, padding index lists with zeros to the maximum degree.
    pub fn to_alist(&self) -> String {
        let max_var = self.var_adj.iter().map(Vec::len).max().unwrap_or(0);
        let max_chk = self.chk_adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.m());
        let _ = writeln!(out, "{max_var} {max_chk}");
        push_joined(&mut out, self.var_adj.iter().map(Vec::len));
        push_joined(&mut out, self.chk_adj.iter().map(Vec::len));
        for checks in &self.var_adj {
            push_padded(&mut out, checks, max_var);
        }
        for vars in &self.chk_adj {
            push_padded(&mut out, vars, max_chk);
        }
        out
    }

    /// Code length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length, `n - m`.
    pub fn k(&self) -> usize {
        self.n - self.m()
    }

    /// Number of checks (rows of `H`).
    pub fn m(&self) -> usize {
        self.chk_adj.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// `M(c)`: variables attached to check `c`, ascending.
    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.chk_adj[c]
    }

    /// `N(v)`: checks attached to variable `v`, ascending.
    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_adj[v]
    }

    /// Edge ids of check `c`; contiguous by construction.
    pub fn check_edges(&self, c: usize) -> Range<usize> {
        self.check_offsets[c]..self.check_offsets[c + 1]
    }

    /// Edge ids of variable `v`, ordered by check index.
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_chk[e]
    }

    /// Dense 0/1 rows of `H`.
    pub fn dense_rows(&self) -> Vec<Vec<u8>> {
        self.chk_adj
            .iter()
            .map(|vars| {
                let mut row = vec![0u8; self.n];
                for &v in vars {
                    row[v] = 1;
                }
                row
            })
            .collect()
    }

    /// Computes `H·xᵀ mod 2`.
    pub fn syndrome(&self, x: &[u8]) -> Result<Syndrome> {
        check_len("codeword", self.n, x.len())?;
        let bits: Vec<u8> = self
            .chk_adj
            .iter()
            .map(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (x[v] & 1)))
            .collect();
        let errors = bits.iter().filter(|&&b| b != 0).count();
        Ok(Syndrome { bits, errors })
    }

    /// Number of unsatisfied checks; the hot-path variant of [`Self::syndrome`].
    pub(crate) fn parity_errors(&self, x: &[u8]) -> usize {
        self.chk_adj
            .iter()
            .filter(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ x[v]) != 0)
            .count()
    }
}

fn push_joined(out: &mut String, items: impl Iterator<Item = usize>) {
    let line: Vec<String> = items.map(|d| d.to_string()).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

fn push_padded(out: &mut String, zero_based: &[usize], width: usize) {
    let line: Vec<String> = zero_based
        .iter()
        .map(|i| (i + 1).to_string())
        .chain(std::iter::repeat_n("0".to_string(), width - zero_based.len()))
        .collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

struct AlistReader<'a> {
    lines: std::iter::Filter<std::str::Lines<'a>, fn(&&str) -> bool>,
    line_no: usize,
}

impl<'a> AlistReader<'a> {
    fn new(text: &'a str) -> Self {
        fn not_blank(l: &&str) -> bool {
            !l.trim().is_empty()
        }
        Self {
            lines: text.lines().filter(not_blank as fn(&&str) -> bool),
            line_no: 0,
        }
    }

    fn next_numbers(&mut self, what: &str) -> Result<Vec<usize>> {
        self.line_no += 1;
        let line = self
            .lines
            .next()
            .ok_or_else(|| Error::Alist(format!("missing {what} (line {})", self.line_no)))?;
        line.split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| {
                    Error::Alist(format!("bad integer {tok:?} in {what} (line {})", self.line_no))
                })
            })
            .collect()
    }

    fn read(mut self) -> Result<ParityCheckMatrix> {
        let header = self.next_numbers("header")?;
        let [n, m] = header[..] else {
            return Err(Error::Alist("header must be \"N M\"".into()));
        };
        let maxima = self.next_numbers("maximum degrees")?;
        let [max_var, max_chk] = maxima[..] else {
            return Err(Error::Alist("second line must hold two maximum degrees".into()));
        };
        let var_deg = self.next_numbers("variable degrees")?;
        let chk_deg = self.next_numbers("check degrees")?;
        if var_deg.len() != n || chk_deg.len() != m {
            return Err(Error::Alist(format!(
                "degree lists have lengths {}/{} (expected {n}/{m})",
                var_deg.len(),
                chk_deg.len()
            )));
        }
        if var_deg.iter().any(|&d| d > max_var) || chk_deg.iter().any(|&d| d > max_chk) {
            return Err(Error::Alist("a degree exceeds the declared maximum".into()));
        }

        let mut var_lists = Vec::with_capacity(n);
        for (v, &deg) in var_deg.iter().enumerate() {
            let list = self.index_list(&format!("checks of variable {}", v + 1), deg, m)?;
            var_lists.push(list);
        }
        let mut chk_lists = Vec::with_capacity(m);
        for (c, &deg) in chk_deg.iter().enumerate() {
            let list = self.index_list(&format!("variables of check {}", c + 1), deg, n)?;
            chk_lists.push(list);
        }

        // Both halves of the file must describe the same bipartite graph.
        let mut from_vars: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (v, checks) in var_lists.iter().enumerate() {
            for &c in checks {
                from_vars[c].push(v);
            }
        }
        for (c, (a, b)) in from_vars.iter_mut().zip(&mut chk_lists).enumerate() {
            a.sort_unstable();
            a.dedup();
            b.sort_unstable();
            b.dedup();
            if a != b {
                return Err(Error::Alist(format!(
                    "adjacency of check {} disagrees between variable and check sections",
                    c + 1
                )));
            }
        }
        ParityCheckMatrix::from_check_lists(n, chk_lists)
    }

    fn index_list(&mut self, what: &str, degree: usize, bound: usize) -> Result<Vec<usize>> {
        let raw = self.next_numbers(what)?;
        let nonzero: Vec<usize> = raw.into_iter().filter(|&i| i != 0).collect();
        if nonzero.len() != degree {
            return Err(Error::Alist(format!(
                "{what}: {} indices listed, degree says {degree}",
                nonzero.len()
            )));
        }
        nonzero
            .into_iter()
            .map(|i| {
                if i > bound {
                    Err(Error::Alist(format!("{what}: index {i} outside 1..={bound}")))
                } else {
                    Ok(i - 1)
                }
            })
            .collect()
    }
}

/// Result of `H·xᵀ mod 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub bits: Vec<u8>,
    /// Number of unsatisfied checks.
    pub errors: usize,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.errors == 0
    }
}

/// Packed GF(2) row.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    fn set(&mut self, i: usize, bit: bool) {
        let mask = 1u64 << (i % 64);
        if bit {
            self.0[i / 64] |= mask;
        } else {
            self.0[i / 64] &= !mask;
        }
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn swap_bits(&mut self, i: usize, j: usize) {
        let (a, b) = (self.get(i), self.get(j));
        self.set(i, b);
        self.set(j, a);
    }
}

/// Generator matrix `G` (k×n) of a code, held in the column basis produced
/// by eliminating `H` to `[I | P]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    n: usize,
    k: usize,
    /// Rows of `[Pᵀ | I]` in permuted column order.
    rows: Vec<BitRow>,
    /// Permuted column `j` is original column `column_permutation[j]`.
    column_permutation: Vec<usize>,
}

impl GeneratorMatrix {
    /// Derives `G` from `H` by Gauss-Jordan elimination over GF(2).
    ///
    /// Pivots are searched column by column from the left, top to bottom
    /// within a column. `H` itself is left untouched; the column swaps are
    /// recorded in [`Self::column_permutation`].
    pub fn from_parity_check(h: &ParityCheckMatrix) -> Result<Self> {
        let (n, m) = (h.n(), h.m());
        let k = n - m;
        let mut work: Vec<BitRow> = h
            .dense_rows()
            .iter()
            .map(|row| {
                let mut bits = BitRow::zeros(n);
                for (v, &b) in row.iter().enumerate() {
                    bits.set(v, b == 1);
                }
                bits
            })
            .collect();
        let mut perm: Vec<usize> = (0..n).collect();

        for r in 0..m {
            let pivot = (r..n).find_map(|col| (r..m).find(|&i| work[i].get(col)).map(|i| (i, col)));
            let Some((pivot_row, pivot_col)) = pivot else {
                return Err(Error::RankDeficient { rank: r, expected: m });
            };
            work.swap(r, pivot_row);
            if pivot_col != r {
                for row in &mut work {
                    row.swap_bits(r, pivot_col);
                }
                perm.swap(r, pivot_col);
            }
            let pivot_bits = work[r].clone();
            for (i, row) in work.iter_mut().enumerate() {
                if i != r && row.get(r) {
                    row.xor_assign(&pivot_bits);
                }
            }
        }

        // work = [I_m | P]; G = [Pᵀ | I_k].
        let rows = (0..k)
            .map(|j| {
                let mut g = BitRow::zeros(n);
                for (i, row) in work.iter().enumerate() {
                    g.set(i, row.get(m + j));
                }
                g.set(m + j, true);
                g
            })
            .collect();
        Ok(Self {
            n,
            k,
            rows,
            column_permutation: perm,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn column_permutation(&self) -> &[usize] {
        &self.column_permutation
    }

    /// Dense `G` in the original column order of `H`.
    pub fn dense_rows(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut out = vec![0u8; self.n];
                for (j, &orig) in self.column_permutation.iter().enumerate() {
                    out[orig] = row.get(j) as u8;
                }
                out
            })
            .collect()
    }

    /// `x = m·G mod 2`, returned in the original column order.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        check_len("message", self.k, message.len())?;
        let mut acc = BitRow::zeros(self.n);
        for (row, &bit) in self.rows.iter().zip(message) {
            if bit & 1 == 1 {
                acc.xor_assign(row);
            }
        }
        let mut x = vec![0u8; self.n];
        for (j, &orig) in self.column_permutation.iter().enumerate() {
            x[orig] = acc.get(j) as u8;
        }
        Ok(x)
    }
}

/// Maps bits to BPSK symbols, `1 - 2x`.
pub fn bipolar(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            actual,
        })
    }
}
