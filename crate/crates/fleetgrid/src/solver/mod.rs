//! Deterministic linear-program solver with certified residuals.
//!
//! `solve` runs presolve, Ruiz equilibration (powers of two, exactly
//! unwound), and a homogeneous self-dual Mehrotra interior-point method,
//! then maps the answer back to the original row/column space including
//! duals for presolved-away rows. `certify` re-checks a solution against
//! the original program in compensated arithmetic, independent of the
//! solve path.

mod certify;
mod ipm;
mod linalg;
mod stdform;

pub use certify::{certify, CertificateReport, MetricCheck};
pub use linalg::CscMatrix;

use crate::error::SolveError;
use crate::lp::{Sense, SparseProgram};
use ipm::IpmKind;
use stdform::{PresolveOutcome, Reduction, StdForm};
use std::time::{Duration, Instant};

/// Solver configuration. Tolerances are measured on the unscaled problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    /// Primal and dual feasibility tolerance.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance.
    pub opt_tol: f64,
    pub max_iterations: usize,
    /// Ruiz equilibration toggle.
    pub scaling: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings { feas_tol: 1e-8, opt_tol: 1e-8, max_iterations: 200, scaling: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration-limit",
            SolveStatus::NumericalFailure => "numerical-failure",
        }
    }
}

/// One interior-point iterate, exposed for diagnostics. The objective pair
/// satisfies weak duality once the residuals are inside tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateDiag {
    pub mu: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

/// Primal and dual solution with residual diagnostics.
///
/// Row duals follow the convention `L = c'x - y'(Ax - b)`: `>=` rows carry
/// non-negative duals, `<=` rows non-positive, equalities are free.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub max_primal_residual: f64,
    pub max_dual_residual: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    /// Wall time; excluded from [`Self::canonical_bytes`].
    pub wall_time: Duration,
    pub trace: Vec<IterateDiag>,
}

impl Solution {
    /// Byte-exact encoding of every deterministic field (wall time is
    /// timing noise and is left out). Two solves of one program must
    /// produce identical bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(self.status as u8);
        let push_f64 = |buf: &mut Vec<u8>, v: f64| buf.extend_from_slice(&v.to_bits().to_le_bytes());
        push_f64(&mut out, self.objective);
        push_f64(&mut out, self.max_primal_residual);
        push_f64(&mut out, self.max_dual_residual);
        push_f64(&mut out, self.relative_gap);
        out.extend_from_slice(&(self.iterations as u64).to_le_bytes());
        for table in [&self.primal, &self.duals, &self.reduced_costs] {
            out.extend_from_slice(&(table.len() as u64).to_le_bytes());
            for &v in table.iter() {
                push_f64(&mut out, v);
            }
        }
        out.extend_from_slice(&(self.trace.len() as u64).to_le_bytes());
        for it in &self.trace {
            for v in [it.mu, it.primal_residual, it.dual_residual, it.primal_objective, it.dual_objective] {
                push_f64(&mut out, v);
            }
        }
        out
    }
}

/// Solves a finalized program. Deterministic: identical inputs yield
/// identical outputs bit for bit (wall time aside). Solver failures are
/// statuses, never silent wrong answers.
pub fn solve(program: &SparseProgram, settings: &SolveSettings) -> Result<Solution, SolveError> {
    if !program.is_finalized() {
        return Err(SolveError::NotFinalized);
    }
    if program.n_cols() == 0 {
        return Err(SolveError::EmptyProgram);
    }
    let start = Instant::now();

    let red = match stdform::presolve(program) {
        PresolveOutcome::Infeasible => {
            return Ok(degenerate_solution(program, SolveStatus::Infeasible, start));
        }
        PresolveOutcome::Unbounded => {
            return Ok(degenerate_solution(program, SolveStatus::Unbounded, start));
        }
        PresolveOutcome::Reduced(red) => red,
    };

    if red.kept_cols.is_empty() {
        // Fully presolved: embed the fixed point and recover duals.
        let mut solution = recover(program, &red, &[], &[], &[]);
        solution.status = SolveStatus::Optimal;
        solution.iterations = 0;
        solution.wall_time = start.elapsed();
        return Ok(solution);
    }

    let sf = StdForm::build(&red, settings.scaling);
    let out = ipm::run(&sf, settings);
    let mut solution = recover(program, &red, &out.x[..sf.n_structural.min(out.x.len())], &out.y, &out.reduced_costs);
    solution.status = match out.kind {
        IpmKind::Optimal => SolveStatus::Optimal,
        IpmKind::Infeasible => SolveStatus::Infeasible,
        IpmKind::Unbounded => SolveStatus::Unbounded,
        IpmKind::IterationLimit => SolveStatus::IterationLimit,
        IpmKind::NumericalFailure => SolveStatus::NumericalFailure,
    };
    solution.iterations = out.iterations;
    solution.relative_gap = out.relative_gap;
    solution.max_dual_residual = out.dual_residual;
    solution.trace = out.trace;
    solution.wall_time = start.elapsed();
    Ok(solution)
}

/// Embeds a reduced solution into the original space: fixed columns take
/// their fixed values, removed singleton rows recover their duals from the
/// fixed column's reduced cost (in reverse fix order, so every row dual a
/// column depends on is already known), and reduced costs are recomputed
/// against the full matrix.
fn recover(
    program: &SparseProgram,
    red: &Reduction,
    x_red: &[f64],
    y_red: &[f64],
    rc_red: &[f64],
) -> Solution {
    let n = program.n_cols();
    let m = program.n_rows();
    let mut primal = vec![0.0; n];
    for f in &red.fixed {
        primal[f.col] = f.value;
    }
    for (k, &col) in red.kept_cols.iter().enumerate() {
        primal[col] = x_red.get(k).copied().unwrap_or(0.0);
    }
    let mut duals = vec![0.0; m];
    for (k, &row) in red.kept_rows.iter().enumerate() {
        duals[row] = y_red.get(k).copied().unwrap_or(0.0);
    }

    let col_major = CscMatrix::from_triplets(m, n, program.triplets());
    let reduced_cost_at = |col: usize, duals: &[f64]| {
        let (rows, vals) = col_major.col(col);
        let mut rc = program.objective()[col];
        for (&r, &v) in rows.iter().zip(vals) {
            rc -= v * duals[r];
        }
        rc
    };

    for f in red.fixed.iter().rev() {
        let Some(ab) = &f.absorber else { continue };
        let rc = reduced_cost_at(f.col, &duals);
        let y = rc / ab.coef;
        duals[ab.row] = match ab.sense {
            Sense::Eq => y,
            Sense::Le => y.min(0.0),
            Sense::Ge => y.max(0.0),
        };
    }

    let mut reduced_costs = vec![0.0; n];
    for col in 0..n {
        reduced_costs[col] = reduced_cost_at(col, &duals);
    }
    for (k, &col) in red.kept_cols.iter().enumerate() {
        // Prefer the interior-point reduced costs for live columns; the
        // recomputation above only differs by accumulated rounding.
        if let Some(&rc) = rc_red.get(k) {
            reduced_costs[col] = rc;
        }
    }

    let objective = program.objective_at(&primal);
    let mut max_primal_residual = crate::lp::row_residuals(program, &primal)
        .map(|rep| rep.rows.iter().map(|r| r.violation()).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    for (j, &u) in program.upper_bounds().iter().enumerate() {
        max_primal_residual = max_primal_residual.max(-primal[j]);
        if u.is_finite() {
            max_primal_residual = max_primal_residual.max(primal[j] - u);
        }
    }

    Solution {
        status: SolveStatus::NumericalFailure,
        primal,
        duals,
        reduced_costs,
        objective,
        max_primal_residual,
        max_dual_residual: 0.0,
        relative_gap: 0.0,
        iterations: 0,
        wall_time: Duration::ZERO,
        trace: Vec::new(),
    }
}

fn degenerate_solution(program: &SparseProgram, status: SolveStatus, start: Instant) -> Solution {
    let n = program.n_cols();
    let primal = vec![0.0; n];
    let max_primal_residual = crate::lp::row_residuals(program, &primal)
        .map(|rep| rep.rows.iter().map(|r| r.violation()).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    Solution {
        status,
        objective: program.objective_at(&primal),
        primal,
        duals: vec![0.0; program.n_rows()],
        reduced_costs: program.objective().to_vec(),
        max_primal_residual,
        max_dual_residual: f64::INFINITY,
        relative_gap: f64::INFINITY,
        iterations: 0,
        wall_time: start.elapsed(),
        trace: Vec::new(),
    }
}
