//! Homogeneous self-dual Mehrotra predictor-corrector.
//!
//! Works on the scaled standard form `min c'x, Ax = b, 0 <= x <= u` with
//! the embedding variables `tau`/`kappa`; infeasibility and unboundedness
//! fall out of the embedding as certificates instead of being guessed
//! from stalls. Convergence is measured every iteration on the *unscaled*
//! problem, so the reported residuals are exactly the contract metrics.
//! Every operation runs in a fixed order with no randomness: identical
//! inputs produce bit-identical iterates.

use super::linalg::{dot, NormalEquations};
use super::stdform::StdForm;
use super::{IterateDiag, SolveSettings};

pub struct IpmResult {
    pub kind: IpmKind,
    /// Unscaled primal for the reduced standard form (structural + slacks).
    pub x: Vec<f64>,
    /// Unscaled duals per reduced row.
    pub y: Vec<f64>,
    /// Unscaled reduced costs (z - w) per standard-form column.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub dual_residual: f64,
    pub relative_gap: f64,
    pub trace: Vec<IterateDiag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmKind {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

struct State {
    x: Vec<f64>,
    s: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<f64>,
    ds: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    dw: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

pub fn run(sf: &StdForm, settings: &SolveSettings) -> IpmResult {
    let (m, n) = (sf.m, sf.n);
    let has_ub: Vec<bool> = sf.ub_s.iter().map(|u| u.is_finite()).collect();
    let n_ub = has_ub.iter().filter(|&&b| b).count();
    let comp_dim = (n + n_ub + 1) as f64;

    let mut st = State {
        x: (0..n).map(|j| if has_ub[j] { 0.5 * sf.ub_s[j] } else { 1.0 }).collect(),
        s: (0..n).map(|j| if has_ub[j] { 0.5 * sf.ub_s[j] } else { 1.0 }).collect(),
        y: vec![0.0; m],
        z: vec![1.0; n],
        w: (0..n).map(|j| if has_ub[j] { 1.0 } else { 0.0 }).collect(),
        tau: 1.0,
        kappa: 1.0,
    };

    let rhs_norm = sf
        .b
        .iter()
        .map(|v| v.abs())
        .chain(sf.ub.iter().filter(|u| u.is_finite()).map(|u| u.abs()))
        .fold(0.0f64, f64::max);
    let c_norm = sf.c.iter().map(|v| v.abs()).fold(0.0f64, f64::max);

    let mut normal = NormalEquations::new(m);
    let mut trace = Vec::new();
    let mut scratch = Scratch::new(m, n);

    for iteration in 0..settings.max_iterations {
        let meas = measure(sf, &st);
        trace.push(IterateDiag {
            mu: comp_mu(&st, &has_ub, comp_dim),
            primal_residual: meas.primal_res,
            dual_residual: meas.dual_res,
            primal_objective: meas.pobj,
            dual_objective: meas.dobj,
        });

        let optimal = meas.primal_res <= settings.feas_tol * (1.0 + rhs_norm)
            && meas.dual_res <= settings.feas_tol * (1.0 + c_norm)
            && meas.gap_rel <= settings.opt_tol;
        if optimal {
            return finish(sf, &st, IpmKind::Optimal, iteration, meas, trace);
        }

        // The embedding collapses to tau -> 0 exactly when the original
        // problem has no optimum; the sign of the certificate objective
        // says which way.
        if st.tau <= 1e-10 * st.kappa.max(1.0) {
            let kind = classify_degenerate(sf, &st);
            return finish(sf, &st, kind, iteration, meas, trace);
        }

        // Scaling matrix for the normal equations.
        let mu = comp_mu(&st, &has_ub, comp_dim);
        let mut d = vec![0.0f64; n];
        for j in 0..n {
            let mut dinv = st.z[j] / st.x[j];
            if has_ub[j] {
                dinv += st.w[j] / st.s[j];
            }
            d[j] = (1.0 / dinv).clamp(1e-30, 1e30);
        }
        normal.assemble(&sf.a_s, &d);
        if normal.factorize().is_err() {
            return finish(sf, &st, IpmKind::NumericalFailure, iteration, meas, trace);
        }

        // Residual defects of the embedding.
        let res = embedding_defects(sf, &st, &has_ub);

        // Predictor: pure Newton toward complementarity zero.
        let rxz_aff: Vec<f64> = (0..n).map(|j| -st.x[j] * st.z[j]).collect();
        let rsw_aff: Vec<f64> = (0..n)
            .map(|j| if has_ub[j] { -st.s[j] * st.w[j] } else { 0.0 })
            .collect();
        let rtk_aff = -st.tau * st.kappa;
        let Some(aff) = direction(sf, &st, &has_ub, &normal, &d, &res, &rxz_aff, &rsw_aff, rtk_aff, 1.0, &mut scratch)
        else {
            return finish(sf, &st, IpmKind::NumericalFailure, iteration, meas, trace);
        };

        let alpha_aff = step_length(&st, &aff, &has_ub, 1.0);
        let mu_aff = {
            let mut acc = (st.tau + alpha_aff * aff.dtau) * (st.kappa + alpha_aff * aff.dkappa);
            for j in 0..n {
                acc += (st.x[j] + alpha_aff * aff.dx[j]) * (st.z[j] + alpha_aff * aff.dz[j]);
                if has_ub[j] {
                    acc += (st.s[j] + alpha_aff * aff.ds[j]) * (st.w[j] + alpha_aff * aff.dw[j]);
                }
            }
            (acc / comp_dim).max(0.0)
        };
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0 - 1e-8);

        // Corrector: recentre and cancel the second-order term.
        let target = sigma * mu;
        let rxz: Vec<f64> = (0..n)
            .map(|j| target - st.x[j] * st.z[j] - aff.dx[j] * aff.dz[j])
            .collect();
        let rsw: Vec<f64> = (0..n)
            .map(|j| if has_ub[j] { target - st.s[j] * st.w[j] - aff.ds[j] * aff.dw[j] } else { 0.0 })
            .collect();
        let rtk = target - st.tau * st.kappa - aff.dtau * aff.dkappa;
        let eta = 1.0 - sigma;
        let Some(dir) = direction(sf, &st, &has_ub, &normal, &d, &res, &rxz, &rsw, rtk, eta, &mut scratch)
        else {
            return finish(sf, &st, IpmKind::NumericalFailure, iteration, meas, trace);
        };

        let alpha = step_length(&st, &dir, &has_ub, 0.9995).min(1.0);
        for j in 0..n {
            st.x[j] += alpha * dir.dx[j];
            st.z[j] += alpha * dir.dz[j];
            if has_ub[j] {
                st.s[j] += alpha * dir.ds[j];
                st.w[j] += alpha * dir.dw[j];
            }
        }
        for i in 0..m {
            st.y[i] += alpha * dir.dy[i];
        }
        st.tau += alpha * dir.dtau;
        st.kappa += alpha * dir.dkappa;

        if std::env::var_os("FLEETGRID_IPM_DEBUG").is_some() {
            eprintln!(
                "it={iteration:3} tau={:9.3e} kappa={:9.3e} mu={:9.3e} alpha={alpha:6.4} sigma={sigma:6.4} rp={:9.3e} rd={:9.3e} gap={:9.3e} reg={:8.2e}",
                st.tau, st.kappa, mu, meas.primal_res, meas.dual_res, meas.gap_rel, normal.regularization
            );
        }

        if !st.tau.is_finite() || st.x.iter().any(|v| !v.is_finite()) {
            return finish(sf, &st, IpmKind::NumericalFailure, iteration + 1, meas, trace);
        }
    }

    let meas = measure(sf, &st);
    finish(sf, &st, IpmKind::IterationLimit, settings.max_iterations, meas, trace)
}

fn comp_mu(st: &State, has_ub: &[bool], comp_dim: f64) -> f64 {
    let mut acc = st.tau * st.kappa;
    for j in 0..st.x.len() {
        acc += st.x[j] * st.z[j];
        if has_ub[j] {
            acc += st.s[j] * st.w[j];
        }
    }
    acc / comp_dim
}

struct Defects {
    rp: Vec<f64>,
    ru: Vec<f64>,
    rd: Vec<f64>,
    rg: f64,
}

fn embedding_defects(sf: &StdForm, st: &State, has_ub: &[bool]) -> Defects {
    let (m, n) = (sf.m, sf.n);
    let mut ax = vec![0.0; m];
    sf.a_s.mul_vec(&st.x, &mut ax);
    let rp: Vec<f64> = (0..m).map(|i| sf.b_s[i] * st.tau - ax[i]).collect();
    let ru: Vec<f64> = (0..n)
        .map(|j| if has_ub[j] { sf.ub_s[j] * st.tau - st.x[j] - st.s[j] } else { 0.0 })
        .collect();
    let mut aty = vec![0.0; n];
    sf.a_s.mul_transpose_vec(&st.y, &mut aty);
    let rd: Vec<f64> = (0..n).map(|j| sf.c_s[j] * st.tau - aty[j] - st.z[j] + st.w[j]).collect();
    let mut uw = 0.0;
    for j in 0..n {
        if has_ub[j] {
            uw += sf.ub_s[j] * st.w[j];
        }
    }
    let rg = -(dot(&sf.c_s, &st.x) - dot(&sf.b_s, &st.y) + uw + st.kappa);
    Defects { rp, ru, rd, rg }
}

struct Scratch {
    f: Vec<f64>,
    chat: Vec<f64>,
    rhs1: Vec<f64>,
    rhs2: Vec<f64>,
    atv: Vec<f64>,
    adv: Vec<f64>,
}

impl Scratch {
    fn new(m: usize, n: usize) -> Self {
        Scratch {
            f: vec![0.0; n],
            chat: vec![0.0; n],
            rhs1: vec![0.0; m],
            rhs2: vec![0.0; m],
            atv: vec![0.0; n],
            adv: vec![0.0; m],
        }
    }
}

/// Solves the Newton system of the embedding for one target. Returns None
/// when the reduced phase-space denominator degenerates.
#[allow(clippy::too_many_arguments)]
fn direction(
    sf: &StdForm,
    st: &State,
    has_ub: &[bool],
    normal: &NormalEquations,
    d: &[f64],
    res: &Defects,
    rxz: &[f64],
    rsw: &[f64],
    rtk: f64,
    eta: f64,
    ws: &mut Scratch,
) -> Option<Direction> {
    let (m, n) = (sf.m, sf.n);

    // f = eta rD - X^-1 rxz + S^-1 rsw - eta S^-1 W rU  (bounded terms only)
    // chat = c - S^-1 W u
    for j in 0..n {
        let mut f = eta * res.rd[j] - rxz[j] / st.x[j];
        let mut chat = sf.c_s[j];
        if has_ub[j] {
            let ws_ratio = st.w[j] / st.s[j];
            f += rsw[j] / st.s[j] - eta * ws_ratio * res.ru[j];
            chat -= ws_ratio * sf.ub_s[j];
        }
        ws.f[j] = f;
        ws.chat[j] = chat;
    }

    // rhs1 = b + A D chat ; rhs2 = eta rP + A D f
    for j in 0..n {
        ws.atv[j] = d[j] * ws.chat[j];
    }
    sf.a_s.mul_vec(&ws.atv, &mut ws.adv);
    for i in 0..m {
        ws.rhs1[i] = sf.b_s[i] + ws.adv[i];
    }
    for j in 0..n {
        ws.atv[j] = d[j] * ws.f[j];
    }
    sf.a_s.mul_vec(&ws.atv, &mut ws.adv);
    for i in 0..m {
        ws.rhs2[i] = eta * res.rp[i] + ws.adv[i];
    }
    let mut u1 = ws.rhs1.clone();
    normal.solve(&mut u1);
    let mut u2 = ws.rhs2.clone();
    normal.solve(&mut u2);

    // p1 = D (A'u1 - chat); p2 = D (A'u2 - f)
    let mut p1 = vec![0.0; n];
    sf.a_s.mul_transpose_vec(&u1, &mut p1);
    for j in 0..n {
        p1[j] = d[j] * (p1[j] - ws.chat[j]);
    }
    let mut p2 = vec![0.0; n];
    sf.a_s.mul_transpose_vec(&u2, &mut p2);
    for j in 0..n {
        p2[j] = d[j] * (p2[j] - ws.f[j]);
    }

    // Scalar equation for dtau.
    let mut g_dot_p1 = 0.0;
    let mut g_dot_p2 = 0.0;
    let mut h = 0.0;
    let mut alpha0 = 0.0;
    for j in 0..n {
        if has_ub[j] {
            let g = st.w[j] * sf.ub_s[j] / st.s[j];
            g_dot_p1 += g * p1[j];
            g_dot_p2 += g * p2[j];
            h += g * sf.ub_s[j];
            alpha0 += sf.ub_s[j] * (rsw[j] - eta * st.w[j] * res.ru[j]) / st.s[j];
        }
    }
    let cg_p1 = dot(&sf.c_s, &p1) + g_dot_p1;
    let cg_p2 = dot(&sf.c_s, &p2) + g_dot_p2;
    let denom = cg_p1 - dot(&sf.b_s, &u1) - h - st.kappa / st.tau;
    if denom.abs() < 1e-300 || !denom.is_finite() {
        return None;
    }
    let dtau = (eta * res.rg - alpha0 - rtk / st.tau - cg_p2 + dot(&sf.b_s, &u2)) / denom;

    let mut dx = vec![0.0; n];
    let mut ds = vec![0.0; n];
    let mut dz = vec![0.0; n];
    let mut dw = vec![0.0; n];
    for j in 0..n {
        dx[j] = dtau * p1[j] + p2[j];
        dz[j] = (rxz[j] - st.z[j] * dx[j]) / st.x[j];
        if has_ub[j] {
            ds[j] = eta * res.ru[j] + sf.ub_s[j] * dtau - dx[j];
            dw[j] = (rsw[j] - st.w[j] * ds[j]) / st.s[j];
        }
    }
    let dy: Vec<f64> = (0..m).map(|i| dtau * u1[i] + u2[i]).collect();
    let dkappa = (rtk - st.kappa * dtau) / st.tau;

    Some(Direction { dx, ds, dy, dz, dw, dtau, dkappa })
}

/// Largest multiple of the direction keeping every positive variable
/// positive, damped by `gamma`.
fn step_length(st: &State, dir: &Direction, has_ub: &[bool], gamma: f64) -> f64 {
    let mut alpha = f64::INFINITY;
    let mut shrink = |v: f64, dv: f64| {
        if dv < 0.0 {
            alpha = alpha.min(-v / dv);
        }
    };
    for j in 0..st.x.len() {
        shrink(st.x[j], dir.dx[j]);
        shrink(st.z[j], dir.dz[j]);
        if has_ub[j] {
            shrink(st.s[j], dir.ds[j]);
            shrink(st.w[j], dir.dw[j]);
        }
    }
    shrink(st.tau, dir.dtau);
    shrink(st.kappa, dir.dkappa);
    if alpha.is_finite() {
        (gamma * alpha).min(1.0)
    } else {
        1.0
    }
}

#[derive(Clone, Copy)]
struct Measure {
    primal_res: f64,
    dual_res: f64,
    gap_rel: f64,
    pobj: f64,
    dobj: f64,
}

/// Convergence metrics of the de-homogenised candidate on the unscaled
/// reduced problem.
fn measure(sf: &StdForm, st: &State) -> Measure {
    let (m, n) = (sf.m, sf.n);
    let inv_tau = 1.0 / st.tau;
    let x: Vec<f64> = (0..n).map(|j| sf.col_scale[j] * st.x[j] * inv_tau).collect();
    let y: Vec<f64> = (0..m).map(|i| sf.row_scale[i] * st.y[i] * inv_tau).collect();
    let zw: Vec<f64> = (0..n).map(|j| (st.z[j] - st.w[j]) * inv_tau / sf.col_scale[j]).collect();

    let mut ax = vec![0.0; m];
    sf.a.mul_vec(&x, &mut ax);
    let mut primal_res = 0.0f64;
    for i in 0..m {
        primal_res = primal_res.max((sf.b[i] - ax[i]).abs());
    }
    for j in 0..n {
        if sf.ub[j].is_finite() {
            primal_res = primal_res.max(x[j] - sf.ub[j]).max(-x[j]);
        }
    }

    let mut aty = vec![0.0; n];
    sf.a.mul_transpose_vec(&y, &mut aty);
    let mut dual_res = 0.0f64;
    for j in 0..n {
        dual_res = dual_res.max((sf.c[j] - aty[j] - zw[j]).abs());
    }

    let pobj = dot(&sf.c, &x);
    let mut dobj = dot(&sf.b, &y);
    for j in 0..n {
        if sf.ub[j].is_finite() {
            dobj -= sf.ub[j] * (-zw[j]).max(0.0);
        }
    }
    let gap_rel = (pobj - dobj).abs() / (1.0 + pobj.abs());
    Measure { primal_res, dual_res, gap_rel, pobj, dobj }
}

fn classify_degenerate(sf: &StdForm, st: &State) -> IpmKind {
    let mut uw = 0.0;
    for j in 0..sf.n {
        if sf.ub_s[j].is_finite() {
            uw += sf.ub_s[j] * st.w[j];
        }
    }
    let by = dot(&sf.b_s, &st.y) - uw;
    let cx = dot(&sf.c_s, &st.x);
    if by > 1e-9 && by >= -cx {
        IpmKind::Infeasible
    } else if cx < -1e-9 {
        IpmKind::Unbounded
    } else {
        IpmKind::NumericalFailure
    }
}

fn finish(
    sf: &StdForm,
    st: &State,
    kind: IpmKind,
    iterations: usize,
    meas: Measure,
    trace: Vec<IterateDiag>,
) -> IpmResult {
    let (m, n) = (sf.m, sf.n);
    // De-homogenise with a floor so infeasible outcomes still produce a
    // diagnostic point.
    let tau = st.tau.max(1e-300);
    let x: Vec<f64> = (0..n).map(|j| sf.col_scale[j] * st.x[j] / tau).collect();
    let y: Vec<f64> = (0..m).map(|i| sf.row_scale[i] * st.y[i] / tau).collect();
    let zw: Vec<f64> = (0..n).map(|j| (st.z[j] - st.w[j]) / tau / sf.col_scale[j]).collect();
    IpmResult {
        kind,
        x,
        y,
        reduced_costs: zw,
        iterations,
        dual_residual: meas.dual_res,
        relative_gap: meas.gap_rel,
        trace,
    }
}
