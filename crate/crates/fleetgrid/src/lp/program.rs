//! Triplet-form sparse program, residual evaluation, and the text dump.

use super::index::{RowFamily, RowLabel, VariableIndex};
use crate::error::{AssemblyError, SolveError};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone)]
struct RowMeta {
    sense: Sense,
    rhs: f64,
    label: RowLabel,
}

/// Objective vector, sparse constraint matrix in triplet form, row senses,
/// right-hand sides, and variable bounds. All variables are non-negative;
/// upper bounds default to infinity.
#[derive(Debug, Clone)]
pub struct SparseProgram {
    n_cols: usize,
    objective: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<RowMeta>,
    triplets: Vec<(u32, u32, f64)>,
    /// After finalisation: start of each row's triplet run.
    row_start: Vec<usize>,
    finalized: bool,
}

impl SparseProgram {
    pub fn new(n_cols: usize) -> Self {
        SparseProgram {
            n_cols,
            objective: vec![0.0; n_cols],
            upper: vec![f64::INFINITY; n_cols],
            rows: Vec::new(),
            triplets: Vec::new(),
            row_start: Vec::new(),
            finalized: false,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    pub fn add_objective(&mut self, col: usize, value: f64) {
        self.objective[col] += value;
    }

    pub fn set_upper(&mut self, col: usize, value: f64) {
        self.upper[col] = value;
    }

    /// Opens a new labelled row and returns its index.
    pub fn add_row(&mut self, sense: Sense, rhs: f64, label: RowLabel) -> usize {
        assert!(!self.finalized, "program already finalized");
        self.rows.push(RowMeta { sense, rhs, label });
        self.rows.len() - 1
    }

    /// Appends one coefficient. Zero coefficients are dropped at the sink so
    /// cancelling terms never inflate the pattern.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        assert!(!self.finalized, "program already finalized");
        debug_assert!(row < self.rows.len() && col < self.n_cols);
        if value != 0.0 {
            self.triplets.push((row as u32, col as u32, value));
        }
    }

    pub fn sense(&self, row: usize) -> Sense {
        self.rows[row].sense
    }

    pub fn rhs(&self, row: usize) -> f64 {
        self.rows[row].rhs
    }

    pub fn label(&self, row: usize) -> RowLabel {
        self.rows[row].label
    }

    /// Sorts triplets into canonical `(row, col)` order and rejects
    /// duplicate coordinates.
    pub fn finalize(mut self) -> Result<Self, AssemblyError> {
        self.triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        for w in self.triplets.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(AssemblyError::DuplicateEntry { row: w[0].0 as usize, col: w[0].1 as usize });
            }
        }
        self.row_start = vec![0; self.rows.len() + 1];
        for &(r, _, _) in &self.triplets {
            self.row_start[r as usize + 1] += 1;
        }
        for i in 0..self.rows.len() {
            self.row_start[i + 1] += self.row_start[i];
        }
        self.finalized = true;
        Ok(self)
    }

    /// Coefficients of one row, `(col, value)` sorted by column.
    pub fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        assert!(self.finalized, "finalize before reading rows");
        self.triplets[self.row_start[row]..self.row_start[row + 1]]
            .iter()
            .map(|&(_, c, v)| (c as usize, v))
    }

    pub fn triplets(&self) -> &[(u32, u32, f64)] {
        &self.triplets
    }

    /// Objective value at a point.
    pub fn objective_at(&self, point: &[f64]) -> f64 {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// Removes one row; used by relaxation tests.
    pub fn without_row(&self, row: usize) -> SparseProgram {
        let mut out = SparseProgram::new(self.n_cols);
        out.objective = self.objective.clone();
        out.upper = self.upper.clone();
        for (i, meta) in self.rows.iter().enumerate() {
            if i == row {
                continue;
            }
            let new_row = out.add_row(meta.sense, meta.rhs, meta.label);
            for (c, v) in self.row_entries(i) {
                out.push(new_row, c, v);
            }
        }
        out.finalize().expect("copy of a finalized program")
    }
}

/// Residual of one row at a point.
#[derive(Debug, Clone, Copy)]
pub struct RowResidual {
    pub label: RowLabel,
    pub sense: Sense,
    pub lhs: f64,
    pub rhs: f64,
}

impl RowResidual {
    /// Signed `lhs - rhs`.
    pub fn signed(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// Non-negative violation respecting the sense.
    pub fn violation(&self) -> f64 {
        match self.sense {
            Sense::Le => (self.lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - self.lhs).max(0.0),
            Sense::Eq => (self.lhs - self.rhs).abs(),
        }
    }

    /// Violation scaled by `1 + |rhs|`.
    pub fn scaled_violation(&self) -> f64 {
        self.violation() / (1.0 + self.rhs.abs())
    }
}

/// Per-row residual table with per-family maxima.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub rows: Vec<RowResidual>,
}

impl ResidualReport {
    /// Max scaled violation per constraint family, descending.
    pub fn family_maxima(&self) -> Vec<(RowFamily, f64)> {
        let mut map: BTreeMap<RowFamily, f64> = BTreeMap::new();
        for r in &self.rows {
            let entry = map.entry(r.label.family).or_insert(0.0);
            *entry = entry.max(r.scaled_violation());
        }
        let mut out: Vec<(RowFamily, f64)> = map.into_iter().collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
        out
    }

    pub fn max_scaled_violation(&self) -> f64 {
        self.rows.iter().map(|r| r.scaled_violation()).fold(0.0, f64::max)
    }

    /// True when every row violation is within `tol * (1 + |rhs|)`.
    pub fn feasible_within(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.violation() <= tol * (1.0 + r.rhs.abs()))
    }
}

/// Evaluates the signed residual of every row at `point`.
pub fn row_residuals(program: &SparseProgram, point: &[f64]) -> Result<ResidualReport, SolveError> {
    if !program.is_finalized() {
        return Err(SolveError::NotFinalized);
    }
    if point.len() != program.n_cols() {
        return Err(SolveError::LengthMismatch { expected: program.n_cols(), found: point.len() });
    }
    let rows = (0..program.n_rows())
        .map(|i| {
            let lhs: f64 = program.row_entries(i).map(|(c, v)| v * point[c]).sum();
            RowResidual { label: program.label(i), sense: program.sense(i), lhs, rhs: program.rhs(i) }
        })
        .collect();
    Ok(ResidualReport { rows })
}

/// Writes the program in the standard human-readable LP interchange text
/// format, with row labels preserved, for external-solver cross-checks.
pub fn write_lp_format(program: &SparseProgram, index: &VariableIndex) -> String {
    assert!(program.is_finalized(), "finalize before dumping");
    let mut out = String::new();
    out.push_str("\\ fleetgrid program dump\n");
    out.push_str("Minimize\n obj:");
    let mut written = 0usize;
    for (col, &c) in program.objective().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        push_term(&mut out, &mut written, c, &index.col_name(col));
    }
    if written == 0 {
        out.push_str(" 0 ");
        out.push_str(&index.col_name(0));
    }
    out.push_str("\nSubject To\n");
    for row in 0..program.n_rows() {
        let _ = write!(out, " {}:", program.label(row));
        let mut w = 0usize;
        for (col, v) in program.row_entries(row) {
            push_term(&mut out, &mut w, v, &index.col_name(col));
        }
        if w == 0 {
            let _ = write!(out, " 0 {}", index.col_name(0));
        }
        let _ = writeln!(out, " {} {}", program.sense(row).symbol(), program.rhs(row));
    }
    out.push_str("Bounds\n");
    for (col, &u) in program.upper_bounds().iter().enumerate() {
        if u.is_finite() {
            let _ = writeln!(out, " 0 <= {} <= {}", index.col_name(col), u);
        }
    }
    out.push_str("End\n");
    out
}

fn push_term(out: &mut String, written: &mut usize, value: f64, name: &str) {
    if *written > 0 && *written % 6 == 0 {
        out.push_str("\n   ");
    }
    if value >= 0.0 {
        let _ = write!(out, " + {value} {name}");
    } else {
        let _ = write!(out, " - {} {name}", -value);
    }
    *written += 1;
}
