//! Dense symmetric factorisation and sparse column-major products used by
//! the interior-point iterations. Everything here runs in a fixed
//! summation order, so repeated solves are bit-identical.

/// Unrolled dot product; eight independent accumulators keep the FPU
/// pipeline busy without changing the (fixed) summation order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for k in 0..chunks {
        let i = k * 8;
        for lane in 0..8 {
            acc[lane] += a[i + lane] * b[i + lane];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    (((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]))) + tail
}

/// Sparse matrix in compressed-sparse-column form.
#[derive(Debug, Clone)]
pub struct CscMatrix {
    pub m: usize,
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    /// Builds from `(row, col, value)` triplets; requires unique coordinates.
    pub fn from_triplets(m: usize, n: usize, triplets: &[(u32, u32, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&k| (triplets[k].1, triplets[k].0));
        let mut col_ptr = vec![0usize; n + 1];
        for &(_, c, _) in triplets {
            col_ptr[c as usize + 1] += 1;
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for &k in &order {
            let (r, _, v) = triplets[k];
            row_idx.push(r as usize);
            values.push(v);
        }
        CscMatrix { m, n, col_ptr, row_idx, values }
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    /// `out = A x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (r, v) in rows.iter().zip(vals) {
                out[*r] += v * xj;
            }
        }
    }

    /// `out = A' y`.
    pub fn mul_transpose_vec(&self, y: &[f64], out: &mut [f64]) {
        for j in 0..self.n {
            let (rows, vals) = self.col(j);
            let mut acc = 0.0;
            for (r, v) in rows.iter().zip(vals) {
                acc += v * y[*r];
            }
            out[j] = acc;
        }
    }
}

/// Symmetric `A diag(d) A'` accumulated into a dense lower triangle, plus
/// its Cholesky factor. Storage is reused across iterations.
pub struct NormalEquations {
    pub m: usize,
    /// Lower triangle of the assembled matrix, row-major `m x m`.
    matrix: Vec<f64>,
    /// Cholesky factor L, row-major lower triangle.
    factor: Vec<f64>,
    /// L' stored row-major for cache-friendly back-substitution.
    factor_t: Vec<f64>,
    pub regularization: f64,
}

impl NormalEquations {
    pub fn new(m: usize) -> Self {
        NormalEquations {
            m,
            matrix: vec![0.0; m * m],
            factor: vec![0.0; m * m],
            factor_t: vec![0.0; m * m],
            regularization: 0.0,
        }
    }

    /// Assembles `A diag(d) A'` (lower triangle).
    pub fn assemble(&mut self, a: &CscMatrix, d: &[f64]) {
        let m = self.m;
        self.matrix.fill(0.0);
        for j in 0..a.n {
            let dj = d[j];
            if dj == 0.0 {
                continue;
            }
            let (rows, vals) = a.col(j);
            for (p, (&r1, &v1)) in rows.iter().zip(vals).enumerate() {
                let scaled = dj * v1;
                // Columns are sorted by row, so r2 <= r1 lands in the lower
                // triangle directly.
                for (&r2, &v2) in rows[..=p].iter().zip(&vals[..=p]) {
                    self.matrix[r1 * m + r2] += scaled * v2;
                }
            }
        }
    }

    /// Factorises with escalating diagonal regularisation; reports the
    /// shift that succeeded.
    pub fn factorize(&mut self) -> Result<(), ()> {
        let m = self.m;
        let max_diag = (0..m).map(|i| self.matrix[i * m + i].abs()).fold(0.0f64, f64::max).max(1.0);
        let mut shift = 0.0;
        'attempt: for attempt in 0..12 {
            if attempt > 0 {
                shift = max_diag * 1e-14 * 10f64.powi(attempt as i32);
            }
            self.factor.copy_from_slice(&self.matrix);
            let f = &mut self.factor;
            for i in 0..m {
                f[i * m + i] += shift;
            }
            for i in 0..m {
                for j in 0..i {
                    let s = f[i * m + j] - dot(&f[i * m..i * m + j], &f[j * m..j * m + j]);
                    f[i * m + j] = s / f[j * m + j];
                }
                let d = f[i * m + i] - dot(&f[i * m..i * m + i], &f[i * m..i * m + i]);
                if !(d > 0.0) || !d.is_finite() {
                    continue 'attempt;
                }
                f[i * m + i] = d.sqrt();
            }
            for i in 0..m {
                for j in 0..=i {
                    self.factor_t[j * m + i] = f[i * m + j];
                }
            }
            self.regularization = shift;
            return Ok(());
        }
        Err(())
    }

    /// Solves `M x = rhs` in place using the current factor, with one step
    /// of iterative refinement against the unshifted matrix.
    pub fn solve(&self, rhs: &mut [f64]) {
        let mut x = rhs.to_vec();
        self.substitute(&mut x);
        // One refinement step: r = rhs - M x, x += M^{-1} r.
        let mut r = vec![0.0; self.m];
        self.mul_matrix(&x, &mut r);
        for i in 0..self.m {
            r[i] = rhs[i] - r[i];
        }
        self.substitute(&mut r);
        for i in 0..self.m {
            rhs[i] = x[i] + r[i];
        }
    }

    fn substitute(&self, x: &mut [f64]) {
        let m = self.m;
        let f = &self.factor;
        for i in 0..m {
            let s = x[i] - dot(&f[i * m..i * m + i], &x[..i]);
            x[i] = s / f[i * m + i];
        }
        let ft = &self.factor_t;
        for i in (0..m).rev() {
            let s = x[i] - dot(&ft[i * m + i + 1..i * m + m], &x[i + 1..m]);
            x[i] = s / ft[i * m + i];
        }
    }

    /// `out = M x` with the assembled (unshifted) symmetric matrix.
    fn mul_matrix(&self, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        out.fill(0.0);
        for i in 0..m {
            let row = &self.matrix[i * m..i * m + i];
            let mut acc = self.matrix[i * m + i] * x[i];
            for (j, &v) in row.iter().enumerate() {
                acc += v * x[j];
                out[j] += v * x[i];
            }
            out[i] += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64) * 0.3 - 1.0).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64).sin()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-10);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // M = A A' with a nonsingular A.
        let triplets = vec![
            (0u32, 0u32, 2.0),
            (0, 1, 1.0),
            (1, 1, 3.0),
            (1, 2, 0.5),
            (2, 0, 0.2),
            (2, 2, 1.5),
        ];
        let a = CscMatrix::from_triplets(3, 3, &triplets);
        let mut ne = NormalEquations::new(3);
        ne.assemble(&a, &[1.0, 1.0, 1.0]);
        ne.factorize().unwrap();
        // Solve M x = M e, expect e.
        let e = [1.0, 1.0, 1.0];
        let mut rhs = vec![0.0; 3];
        ne.mul_matrix(&e, &mut rhs);
        ne.solve(&mut rhs);
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn csc_products() {
        // A = [[1, 2], [0, 3]]
        let a = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let mut out = vec![0.0; 2];
        a.mul_vec(&[1.0, 1.0], &mut out);
        assert_eq!(out, vec![3.0, 3.0]);
        let mut out_t = vec![0.0; 2];
        a.mul_transpose_vec(&[1.0, 1.0], &mut out_t);
        assert_eq!(out_t, vec![1.0, 5.0]);
    }
}
