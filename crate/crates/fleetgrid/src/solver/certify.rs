//! Independent certification of a solved program.
//!
//! Residuals are recomputed from the original program data in compensated
//! (Neumaier) arithmetic, sharing nothing with the solve path, and checked
//! against the same tolerances the solver claims.

use super::{Solution, SolveSettings};
use crate::lp::{Sense, SparseProgram};

/// Compensated sum of `(a, b)` products.
fn dot_compensated(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (a, b) in pairs {
        let term = a * b;
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    sum + comp
}

/// One certified metric.
#[derive(Debug, Clone, Copy)]
pub struct MetricCheck {
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl MetricCheck {
    fn new(value: f64, bound: f64) -> Self {
        MetricCheck { value, bound, pass: value <= bound }
    }
}

/// Per-metric pass/fail report.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub primal: MetricCheck,
    pub dual: MetricCheck,
    pub gap: MetricCheck,
    /// `c'x - (b'y - u'w)` recomputed here; the transposed-dual sanity
    /// value.
    pub recomputed_gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub pass: bool,
}

impl std::fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, m) in [("primal", self.primal), ("dual", self.dual), ("gap", self.gap)] {
            writeln!(
                f,
                "{name:>6}: {} ({:.3e} vs bound {:.3e})",
                if m.pass { "pass" } else { "FAIL" },
                m.value,
                m.bound
            )?;
        }
        writeln!(f, "objective {} / dual {}", self.primal_objective, self.dual_objective)
    }
}

/// Recomputes primal feasibility, dual feasibility, and the duality gap of
/// `solution` against `program` in compensated arithmetic.
pub fn certify(program: &SparseProgram, solution: &Solution, settings: &SolveSettings) -> CertificateReport {
    let x = &solution.primal;
    let y = &solution.duals;

    let rhs_norm = (0..program.n_rows())
        .map(|i| program.rhs(i).abs())
        .chain(program.upper_bounds().iter().filter(|u| u.is_finite()).map(|u| u.abs()))
        .fold(0.0f64, f64::max);
    let c_norm = program.objective().iter().map(|v| v.abs()).fold(0.0f64, f64::max);

    // Primal feasibility: row violations plus bound violations.
    let mut primal_res = 0.0f64;
    for row in 0..program.n_rows() {
        let lhs = dot_compensated(program.row_entries(row).map(|(c, v)| (v, x[c])));
        let gap = lhs - program.rhs(row);
        let violation = match program.sense(row) {
            Sense::Le => gap.max(0.0),
            Sense::Ge => (-gap).max(0.0),
            Sense::Eq => gap.abs(),
        };
        primal_res = primal_res.max(violation);
    }
    for (j, &u) in program.upper_bounds().iter().enumerate() {
        primal_res = primal_res.max(-x[j]);
        if u.is_finite() {
            primal_res = primal_res.max(x[j] - u);
        }
    }

    // Dual feasibility: recomputed reduced costs must be sign-consistent
    // with the bounds, and row duals with their senses.
    let col_major = super::CscMatrix::from_triplets(program.n_rows(), program.n_cols(), program.triplets());
    let mut dual_res = 0.0f64;
    let mut dual_obj_terms = 0.0f64;
    for j in 0..program.n_cols() {
        let (rows, vals) = col_major.col(j);
        let a_dot_y = dot_compensated(rows.iter().zip(vals).map(|(&r, &v)| (v, y[r])));
        let rc = program.objective()[j] - a_dot_y;
        let u = program.upper_bounds()[j];
        let at_ub = u.is_finite() && u - x[j] <= settings.feas_tol * (1.0 + u.abs());
        if !at_ub {
            dual_res = dual_res.max(-rc);
        }
        if u.is_finite() && rc < 0.0 {
            dual_obj_terms += u * (-rc);
        }
    }
    for row in 0..program.n_rows() {
        let viol = match program.sense(row) {
            Sense::Le => y[row].max(0.0),
            Sense::Ge => (-y[row]).max(0.0),
            Sense::Eq => 0.0,
        };
        dual_res = dual_res.max(viol);
    }

    let primal_objective = dot_compensated(program.objective().iter().zip(x).map(|(&c, &v)| (c, v)));
    let b_dot_y = dot_compensated((0..program.n_rows()).map(|i| (program.rhs(i), y[i])));
    let dual_objective = b_dot_y - dual_obj_terms;
    let recomputed_gap = primal_objective - dual_objective;
    let gap_rel = recomputed_gap.abs() / (1.0 + primal_objective.abs());

    let primal = MetricCheck::new(primal_res, settings.feas_tol * (1.0 + rhs_norm));
    let dual = MetricCheck::new(dual_res, settings.feas_tol * (1.0 + c_norm));
    let gap = MetricCheck::new(gap_rel, settings.opt_tol);
    let pass = primal.pass && dual.pass && gap.pass;
    CertificateReport { primal, dual, gap, recomputed_gap, primal_objective, dual_objective, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostCoefficients;
    use crate::fixtures;
    use crate::lp::build_program;
    use crate::solver::{solve, SolveStatus};

    #[test]
    fn optimal_solve_certifies() {
        let spec = fixtures::tiny_two_hour().to_scenario();
        let coeffs = CostCoefficients::compute(&spec).unwrap();
        let (p, _) = build_program(&spec, &coeffs).unwrap();
        let settings = SolveSettings::default();
        let sol = solve(&p, &settings).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let report = certify(&p, &sol, &settings);
        assert!(report.pass, "{report}");
    }

    #[test]
    fn perturbed_primal_fails_certification() {
        let spec = fixtures::tiny_two_hour().to_scenario();
        let coeffs = CostCoefficients::compute(&spec).unwrap();
        let (p, _) = build_program(&spec, &coeffs).unwrap();
        let settings = SolveSettings::default();
        let mut sol = solve(&p, &settings).unwrap();
        sol.primal[0] += 1e-3;
        let report = certify(&p, &sol, &settings);
        assert!(!report.primal.pass, "perturbation must break primal feasibility: {report}");
    }

    #[test]
    fn gap_identity_without_upper_bounds() {
        // min x st x >= 1 has no finite bounds: the recomputed gap is
        // exactly c'x - y'b.
        use crate::lp::{RowFamily, RowLabel, Sense, SparseProgram};
        let mut p = SparseProgram::new(1);
        p.add_objective(0, 1.0);
        let r = p.add_row(Sense::Ge, 1.0, RowLabel::new(RowFamily::GenBalance, &[0]));
        p.push(r, 0, 1.0);
        let p = p.finalize().unwrap();
        let settings = SolveSettings::default();
        let sol = solve(&p, &settings).unwrap();
        let report = certify(&p, &sol, &settings);
        let direct = sol.objective - sol.duals[0] * 1.0;
        assert!((report.recomputed_gap - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
        assert!(report.pass);
    }
}
