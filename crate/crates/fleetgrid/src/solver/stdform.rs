//! Presolve and standard-form conversion.
//!
//! Presolve is limited to exactly reversible reductions: fixed-variable
//! elimination from singleton rows (the no-charge-at-start rows and any
//! inequality that pins a variable to its lower bound), empty-row and
//! empty-column removal, and zero-width bound fixing. Each eliminated
//! singleton row is remembered as the "absorber" of its fixed column so
//! its dual can be recovered exactly after the solve. General bound
//! tightening is deliberately not performed: a tightened copy of a kept
//! row would split its dual between the row and the bound.

use super::linalg::CscMatrix;
use crate::lp::{Sense, SparseProgram};

const FEAS_EPS: f64 = 1e-7;

/// A column fixed during presolve, in fix order.
#[derive(Debug, Clone)]
pub struct FixedCol {
    pub col: usize,
    pub value: f64,
    pub absorber: Option<Absorber>,
}

/// The removed singleton row that justifies a fix; its dual is recovered
/// from the fixed column's reduced cost.
#[derive(Debug, Clone)]
pub struct Absorber {
    pub row: usize,
    pub coef: f64,
    pub sense: Sense,
}

#[derive(Debug)]
pub enum PresolveOutcome {
    Reduced(Reduction),
    /// A row became unsatisfiable during reduction.
    Infeasible,
    /// A column with negative cost has no constraints and no upper bound.
    Unbounded,
}

/// Reduced mixed-sense problem plus the bookkeeping to undo it.
#[derive(Debug)]
pub struct Reduction {
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
    pub fixed: Vec<FixedCol>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub obj: Vec<f64>,
    pub ub: Vec<f64>,
    pub triplets: Vec<(u32, u32, f64)>,
}

pub fn presolve(program: &SparseProgram) -> PresolveOutcome {
    let m = program.n_rows();
    let n = program.n_cols();
    let col_major = CscMatrix::from_triplets(m, n, program.triplets());

    let mut live_row = vec![true; m];
    let mut live_col = vec![true; n];
    let mut fixed_value = vec![0.0f64; n];
    let mut rhs_adj: Vec<f64> = (0..m).map(|i| program.rhs(i)).collect();
    let ub: Vec<f64> = program.upper_bounds().to_vec();
    let mut fixed: Vec<FixedCol> = Vec::new();

    // Fixing a column folds its contribution into every remaining row.
    macro_rules! fix_col {
        ($col:expr, $value:expr, $absorber:expr) => {{
            let col = $col;
            let value: f64 = $value;
            live_col[col] = false;
            fixed_value[col] = value;
            if value != 0.0 {
                let (rows, vals) = col_major.col(col);
                for (&r, &v) in rows.iter().zip(vals) {
                    rhs_adj[r] -= v * value;
                }
            }
            fixed.push(FixedCol { col, value, absorber: $absorber });
        }};
    }

    // Zero-width bounds never survive to the interior point method.
    for col in 0..n {
        if ub[col] <= 0.0 {
            fix_col!(col, 0.0, None);
        }
    }

    loop {
        let mut changed = false;
        for row in 0..m {
            if !live_row[row] {
                continue;
            }
            let mut live_entries = program.row_entries(row).filter(|&(c, _)| live_col[c]);
            let first = live_entries.next();
            let second = live_entries.next();
            match (first, second) {
                (None, _) => {
                    let r = rhs_adj[row];
                    let tol = FEAS_EPS * (1.0 + program.rhs(row).abs());
                    let ok = match program.sense(row) {
                        Sense::Eq => r.abs() <= tol,
                        Sense::Le => r >= -tol,
                        Sense::Ge => r <= tol,
                    };
                    if !ok {
                        return PresolveOutcome::Infeasible;
                    }
                    live_row[row] = false;
                    changed = true;
                }
                (Some((col, coef)), None) => {
                    let bound = rhs_adj[row] / coef;
                    let tol = FEAS_EPS * (1.0 + bound.abs());
                    match program.sense(row) {
                        Sense::Eq => {
                            if bound < -tol || bound > ub[col] + tol {
                                return PresolveOutcome::Infeasible;
                            }
                            let v = bound.clamp(0.0, ub[col]);
                            live_row[row] = false;
                            fix_col!(col, v, Some(Absorber { row, coef, sense: Sense::Eq }));
                            changed = true;
                        }
                        Sense::Le if coef > 0.0 && bound <= 0.0 => {
                            if bound < -tol {
                                return PresolveOutcome::Infeasible;
                            }
                            live_row[row] = false;
                            fix_col!(col, 0.0, Some(Absorber { row, coef, sense: Sense::Le }));
                            changed = true;
                        }
                        _ => {}
                    }
                }
                _ => {}
            }
        }

        // Columns out of every live row: set by objective sign.
        for col in 0..n {
            if !live_col[col] {
                continue;
            }
            let (rows, _) = col_major.col(col);
            if rows.iter().any(|&r| live_row[r]) {
                continue;
            }
            let c = program.objective()[col];
            if c >= 0.0 {
                fix_col!(col, 0.0, None);
            } else if ub[col].is_finite() {
                fix_col!(col, ub[col], None);
            } else {
                return PresolveOutcome::Unbounded;
            }
            changed = true;
        }

        if !changed {
            break;
        }
    }

    let kept_rows: Vec<usize> = (0..m).filter(|&r| live_row[r]).collect();
    let kept_cols: Vec<usize> = (0..n).filter(|&c| live_col[c]).collect();
    let mut row_map = vec![usize::MAX; m];
    for (new, &old) in kept_rows.iter().enumerate() {
        row_map[old] = new;
    }
    let mut col_map = vec![usize::MAX; n];
    for (new, &old) in kept_cols.iter().enumerate() {
        col_map[old] = new;
    }

    let senses: Vec<Sense> = kept_rows.iter().map(|&r| program.sense(r)).collect();
    let rhs: Vec<f64> = kept_rows.iter().map(|&r| rhs_adj[r]).collect();
    let obj: Vec<f64> = kept_cols.iter().map(|&c| program.objective()[c]).collect();
    let ub_red: Vec<f64> = kept_cols.iter().map(|&c| ub[c]).collect();
    let triplets: Vec<(u32, u32, f64)> = program
        .triplets()
        .iter()
        .filter(|&&(r, c, _)| live_row[r as usize] && live_col[c as usize])
        .map(|&(r, c, v)| (row_map[r as usize] as u32, col_map[c as usize] as u32, v))
        .collect();

    let _ = fixed_value;
    PresolveOutcome::Reduced(Reduction {
        kept_rows,
        kept_cols,
        fixed,
        senses,
        rhs,
        obj,
        ub: ub_red,
        triplets,
    })
}

/// Pure standard form `min c'x  s.t.  Ax = b, 0 <= x <= u`, with one slack
/// column per inequality row. Held in both unscaled form (for convergence
/// measurement) and Ruiz-equilibrated form (for the iterations); scale
/// factors are powers of two, so unscaling is exact.
pub struct StdForm {
    pub m: usize,
    pub n: usize,
    pub n_structural: usize,
    /// Unscaled matrix.
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub ub: Vec<f64>,
    /// Scaled copies used by the iterations.
    pub a_s: CscMatrix,
    pub b_s: Vec<f64>,
    pub c_s: Vec<f64>,
    pub ub_s: Vec<f64>,
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

impl StdForm {
    pub fn build(red: &Reduction, scaling: bool) -> StdForm {
        let m = red.senses.len();
        let n_structural = red.obj.len();
        let mut triplets = red.triplets.clone();
        let mut n = n_structural;
        for (row, sense) in red.senses.iter().enumerate() {
            let sign = match sense {
                Sense::Eq => continue,
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
            };
            triplets.push((row as u32, n as u32, sign));
            n += 1;
        }
        let a = CscMatrix::from_triplets(m, n, &triplets);
        let b = red.rhs.clone();
        let mut c = red.obj.clone();
        c.resize(n, 0.0);
        let mut ub = red.ub.clone();
        ub.resize(n, f64::INFINITY);

        let (mut row_scale, mut col_scale) = (vec![1.0f64; m], vec![1.0f64; n]);
        if scaling {
            ruiz_scales(&a, &mut row_scale, &mut col_scale);
        }
        let mut a_s = a.clone();
        for j in 0..n {
            let range = a_s.col_ptr[j]..a_s.col_ptr[j + 1];
            for p in range {
                a_s.values[p] *= row_scale[a_s.row_idx[p]] * col_scale[j];
            }
        }
        let b_s: Vec<f64> = b.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
        let c_s: Vec<f64> = c.iter().zip(&col_scale).map(|(v, s)| v * s).collect();
        let ub_s: Vec<f64> = ub.iter().zip(&col_scale).map(|(v, s)| if v.is_finite() { v / s } else { *v }).collect();

        StdForm { m, n, n_structural, a, b, c, ub, a_s, b_s, c_s, ub_s, row_scale, col_scale }
    }
}

/// Ruiz equilibration rounded to powers of two; a handful of passes is
/// enough to tame the $/kWh-vs-GW magnitude spread.
fn ruiz_scales(a: &CscMatrix, row_scale: &mut [f64], col_scale: &mut [f64]) {
    let m = row_scale.len();
    let n = col_scale.len();
    for _ in 0..6 {
        let mut row_max = vec![0.0f64; m];
        let mut col_max = vec![0.0f64; n];
        for j in 0..n {
            let (rows, vals) = a.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                let scaled = (v * row_scale[i] * col_scale[j]).abs();
                row_max[i] = row_max[i].max(scaled);
                col_max[j] = col_max[j].max(scaled);
            }
        }
        let mut done = true;
        for i in 0..m {
            if row_max[i] > 0.0 {
                let s = pow2_inv_sqrt(row_max[i]);
                if s != 1.0 {
                    done = false;
                }
                row_scale[i] *= s;
            }
        }
        for j in 0..n {
            if col_max[j] > 0.0 {
                let s = pow2_inv_sqrt(col_max[j]);
                if s != 1.0 {
                    done = false;
                }
                col_scale[j] *= s;
            }
        }
        if done {
            break;
        }
    }
}

/// `2^-round(log2(sqrt(v)))`, exact in floating point.
fn pow2_inv_sqrt(v: f64) -> f64 {
    let e = (0.5 * v.log2()).round() as i32;
    (2.0f64).powi(-e)
}
