//! Quasi-cyclic lifting and subcode generalization.
//!
//! An exponent matrix with lifting size `ZC` expands into `rows * ZC` lifted
//! checks over `cols * ZC` variables. Generalization then binds every lifted
//! check of a row to that row's subcode, producing one constraint node per
//! lifted check. Node ids are `row * ZC + t`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::code::{CodeError, LinearCode};
use crate::gf2::{BitMatrix, BitVector};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("exponent matrix line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("exponent matrix must be non-empty with rows of equal length")]
    Shape,
    #[error("lifting size must be positive")]
    LiftingSize,
    #[error("entry ({row}, {col}) = {value} is outside -1..{zc}")]
    Entry {
        row: usize,
        col: usize,
        value: i64,
        zc: usize,
    },
    #[error("row {0} has no nonnegative entries")]
    EmptyRow(usize),
    #[error("row {row}: subcode length {code_len} does not match row degree {degree}")]
    DegreeMismatch {
        row: usize,
        code_len: usize,
        degree: usize,
    },
    #[error("row {row} is out of range (matrix has {rows} rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("row {row}: {source}")]
    Code {
        row: usize,
        #[source]
        source: CodeError,
    },
}

/// Entries in `{-1, 0, .., ZC-1}`; `-1` is a zero block.
#[derive(Clone, PartialEq, Eq)]
pub struct ExponentMatrix {
    rows: usize,
    cols: usize,
    zc: usize,
    entries: Vec<i64>,
}

impl fmt::Debug for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExponentMatrix {}x{} ZC={}", self.rows, self.cols, self.zc)
    }
}

impl fmt::Display for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl ExponentMatrix {
    pub fn new(rows: Vec<Vec<i64>>, zc: usize) -> Result<Self, GraphError> {
        if zc == 0 {
            return Err(GraphError::LiftingSize);
        }
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(GraphError::Shape);
        }
        for (r, row) in rows.iter().enumerate() {
            for (c, &value) in row.iter().enumerate() {
                if value < -1 || value >= zc as i64 {
                    return Err(GraphError::Entry {
                        row: r,
                        col: c,
                        value,
                        zc,
                    });
                }
            }
            if row.iter().all(|&v| v < 0) {
                return Err(GraphError::EmptyRow(r));
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            zc,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Whitespace-separated integers, one row per line; `#` starts a comment.
    pub fn parse(text: &str, zc: usize) -> Result<Self, GraphError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|e| GraphError::Parse {
                        line: lineno + 1,
                        msg: format!("{t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(rows, zc)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lifting_size(&self) -> usize {
        self.zc
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Number of nonnegative entries in row `r`.
    pub fn row_degree(&self, r: usize) -> usize {
        self.row(r).iter().filter(|&&v| v >= 0).count()
    }

    pub fn column_degree(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c) >= 0).count()
    }
}

/// Number of block columns where rows `i` and `j` both have nonnegative
/// entries.
pub fn row_overlap(exp: &ExponentMatrix, i: usize, j: usize) -> usize {
    (0..exp.cols())
        .filter(|&c| exp.get(i, c) >= 0 && exp.get(j, c) >= 0)
        .count()
}

/// Lifted Tanner graph with plain parity checks.
#[derive(Debug, Clone)]
pub struct BaseGraph {
    exponent: ExponentMatrix,
    n_vars: usize,
    /// Neighbors of each lifted check in ascending block-column order.
    checks: Vec<Vec<usize>>,
}

impl BaseGraph {
    pub fn exponent(&self) -> &ExponentMatrix {
        &self.exponent
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn check_row(&self, check: usize) -> usize {
        check / self.exponent.zc
    }
}

/// Expands each nonnegative entry `P[i][j]` into a circulant permutation:
/// lifted check `t` of row `i` touches variable `j*ZC + (P[i][j] + t) mod ZC`.
pub fn lift(exp: &ExponentMatrix) -> BaseGraph {
    let zc = exp.zc;
    let mut checks = Vec::with_capacity(exp.rows * zc);
    for r in 0..exp.rows {
        for t in 0..zc {
            let neighbors = (0..exp.cols)
                .filter_map(|c| {
                    let p = exp.get(r, c);
                    (p >= 0).then(|| c * zc + (p as usize + t) % zc)
                })
                .collect();
            checks.push(neighbors);
        }
    }
    BaseGraph {
        exponent: exp.clone(),
        n_vars: exp.cols * zc,
        checks,
    }
}

/// How edge positions of a node map onto subcode coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssignmentPolicy {
    /// Edge `k` (ascending block column) gets coordinate `k`.
    #[default]
    Sequential,
    /// Independent uniform permutation per node, drawn from the seed.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct ConstraintNode {
    pub id: usize,
    pub exponent_row: usize,
    /// Variable indices in edge order.
    pub neighbors: Vec<usize>,
    pub subcode: Arc<LinearCode>,
    /// `assignment[e]` is the subcode coordinate of edge `e`.
    pub assignment: Vec<usize>,
}

impl ConstraintNode {
    /// Variables in subcode-coordinate order.
    pub fn coordinate_vars(&self) -> Vec<usize> {
        let mut vars = vec![0; self.neighbors.len()];
        for (e, &coord) in self.assignment.iter().enumerate() {
            vars[coord] = self.neighbors[e];
        }
        vars
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

/// Number of variables shared by two constraint nodes.
pub fn overlap(a: &ConstraintNode, b: &ConstraintNode) -> usize {
    a.neighbors
        .iter()
        .filter(|v| b.neighbors.contains(v))
        .count()
}

/// A decodable GLDPC code: constraint nodes over `n_vars` variables.
#[derive(Debug, Clone)]
pub struct GldpcCode {
    n_vars: usize,
    zc: usize,
    row_count: usize,
    nodes: Vec<ConstraintNode>,
    row_subcodes: Vec<Arc<LinearCode>>,
    exponent: Option<ExponentMatrix>,
    var_nodes: Vec<Vec<usize>>,
    rank: usize,
    codeword_basis: Vec<BitVector>,
}

impl GldpcCode {
    /// Builds a code from explicit nodes. `row_subcodes[r]` describes the
    /// nodes whose `exponent_row` is `r`; `zc` is the number of nodes per row.
    pub fn from_nodes(
        n_vars: usize,
        nodes: Vec<ConstraintNode>,
        row_subcodes: Vec<Arc<LinearCode>>,
        zc: usize,
    ) -> Self {
        let mut var_nodes = vec![Vec::new(); n_vars];
        for node in &nodes {
            for &v in &node.neighbors {
                var_nodes[v].push(node.id);
            }
        }
        let mut code = Self {
            n_vars,
            zc,
            row_count: row_subcodes.len(),
            nodes,
            row_subcodes,
            exponent: None,
            var_nodes,
            rank: 0,
            codeword_basis: Vec::new(),
        };
        let h = full_parity_check_matrix(&code);
        code.codeword_basis = h.nullspace_basis();
        code.rank = n_vars - code.codeword_basis.len();
        code
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Information bits, from the actual GF(2) rank.
    pub fn k(&self) -> usize {
        self.n_vars - self.rank
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of stacked subcode parity checks.
    pub fn check_equations(&self) -> usize {
        self.nodes.iter().map(|n| n.subcode.n() - n.subcode.k()).sum()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.check_equations()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n_vars as f64
    }

    pub fn lifting_size(&self) -> usize {
        self.zc
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn nodes(&self) -> &[ConstraintNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &ConstraintNode {
        &self.nodes[id]
    }

    pub fn row_subcode(&self, row: usize) -> &Arc<LinearCode> {
        &self.row_subcodes[row]
    }

    pub fn exponent(&self) -> Option<&ExponentMatrix> {
        self.exponent.as_ref()
    }

    /// Nodes adjacent to variable `v`.
    pub fn var_nodes(&self, v: usize) -> &[usize] {
        &self.var_nodes[v]
    }

    /// Ids of the nodes lifted from exponent row `row`, ascending.
    pub fn row_nodes(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .filter(move |n| n.exponent_row == row)
            .map(|n| n.id)
    }

    /// Degree of the nodes lifted from `row`.
    pub fn row_degree(&self, row: usize) -> usize {
        self.row_subcodes[row].n()
    }

    pub fn codeword_basis(&self) -> &[BitVector] {
        &self.codeword_basis
    }

    /// Uniformly random codeword as a 0/1 vector.
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let mut word = BitVector::zeros(self.n_vars);
        for b in &self.codeword_basis {
            if rng.random::<bool>() {
                word.xor_assign(b);
            }
        }
        word.to_bits()
    }

    /// True iff every node's restriction is a codeword of its subcode.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        self.nodes.iter().all(|node| {
            let mask = node
                .coordinate_vars()
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, &v)| acc | (((word[v] & 1) as u64) << j));
            node.subcode.is_codeword(mask)
        })
    }
}

/// Binds each lifted check of row `r` to `row_subcodes[r]` (default
/// `spc(degree)`) and assigns subcode coordinates per `policy`.
pub fn generalize(
    base: &BaseGraph,
    row_subcodes: &BTreeMap<usize, Arc<LinearCode>>,
    policy: AssignmentPolicy,
) -> Result<GldpcCode, GraphError> {
    let exp = &base.exponent;
    for &row in row_subcodes.keys() {
        if row >= exp.rows {
            return Err(GraphError::RowOutOfRange {
                row,
                rows: exp.rows,
            });
        }
    }
    let mut subcodes = Vec::with_capacity(exp.rows);
    for r in 0..exp.rows {
        let degree = exp.row_degree(r);
        let code = match row_subcodes.get(&r) {
            Some(code) => {
                if code.n() != degree {
                    return Err(GraphError::DegreeMismatch {
                        row: r,
                        code_len: code.n(),
                        degree,
                    });
                }
                Arc::clone(code)
            }
            None => Arc::new(
                LinearCode::spc(degree).map_err(|source| GraphError::Code { row: r, source })?,
            ),
        };
        subcodes.push(code);
    }

    let mut rng = match policy {
        AssignmentPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        AssignmentPolicy::Sequential => None,
    };
    let nodes = base
        .checks
        .iter()
        .enumerate()
        .map(|(id, neighbors)| {
            let row = base.check_row(id);
            let mut assignment: Vec<usize> = (0..neighbors.len()).collect();
            if let Some(rng) = rng.as_mut() {
                assignment.shuffle(rng);
            }
            ConstraintNode {
                id,
                exponent_row: row,
                neighbors: neighbors.clone(),
                subcode: Arc::clone(&subcodes[row]),
                assignment,
            }
        })
        .collect();

    let mut code = GldpcCode::from_nodes(base.n_vars, nodes, subcodes, exp.zc);
    code.exponent = Some(exp.clone());
    Ok(code)
}

/// Stacks each node's subcode parity checks, routing subcode coordinate `k`
/// to the variable assigned to it.
pub fn full_parity_check_matrix(code: &GldpcCode) -> BitMatrix {
    let mut h = BitMatrix::zeros(code.check_equations().max(1), code.n_vars.max(1))
        .expect("non-empty");
    let mut row = 0;
    for node in &code.nodes {
        let sub_h = node.subcode.parity_check();
        let vars = node.coordinate_vars();
        for r in 0..sub_h.rows() {
            for (coord, &v) in vars.iter().enumerate() {
                if sub_h.get(r, coord) {
                    h.set(row, v, true);
                }
            }
            row += 1;
        }
    }
    h
}

/// Exponent matrices shipped with the crate.
pub mod fixtures {
    use super::{ExponentMatrix, GraphError};

    pub const TABLE_1: &str = include_str!("../fixtures/table1.txt");
    pub const TABLE_2: &str = include_str!("../fixtures/table2.txt");
    pub const TABLE_3: &str = include_str!("../fixtures/table3.txt");
    pub const TABLE_4: &str = include_str!("../fixtures/table4.txt");

    pub fn table(index: usize, zc: usize) -> Result<ExponentMatrix, GraphError> {
        let text = match index {
            1 => TABLE_1,
            2 => TABLE_2,
            3 => TABLE_3,
            4 => TABLE_4,
            _ => return Err(GraphError::Shape),
        };
        ExponentMatrix::parse(text, zc)
    }
}
