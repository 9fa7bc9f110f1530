//! Reference oracles: exhaustive discrete optimizers, dense linear algebra,
//! finite differences. Everything here is deliberately independent of the
//! solver's kernels (dense double loops, own normalization), so agreement
//! between the two is evidence rather than tautology.

use crate::cost_matrix::CostMatrix;
use crate::error::Error;
use crate::factor::FactorMatrix;
use crate::problems::MimoInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBudget {
    /// Largest n for 2^n enumeration.
    pub max_n_exhaustive: usize,
    /// Central-difference step.
    pub fd_step: f64,
    /// Largest n for dense eigen/solve references.
    pub dense_n_cap: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_n_exhaustive: 20,
            fd_step: 1e-6,
            dense_n_cap: 64,
        }
    }
}

pub fn densify(c: &CostMatrix) -> Vec<Vec<f64>> {
    let n = c.n();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (j, w) in c.row(i) {
            a[i][j] = w;
        }
    }
    a
}

/// Exact minimizer of `x' C x + offset` over x in {-1, +1}^n, by Gray-code
/// enumeration with incremental value updates. Ties go to the
/// lexicographically smallest assignment, +1 ordered before -1.
pub fn brute_force_quadratic(c: &CostMatrix, offset: f64) -> Result<(Vec<i8>, f64), Error> {
    let n = c.n();
    let budget = OracleBudget::default();
    if n > budget.max_n_exhaustive {
        return Err(Error::OverBudget(format!(
            "exhaustive search over n = {n} exceeds cap {}",
            budget.max_n_exhaustive
        )));
    }
    // +1 sorts before -1: smaller bit pattern wins a tie
    fn lex_less(a: &[i8], b: &[i8]) -> bool {
        for (&x, &y) in a.iter().zip(b) {
            if x != y {
                return x > y;
            }
        }
        false
    }

    let mut x = vec![1i8; n];
    // s_i = sum_j c_ij x_j, maintained across single-bit flips
    let mut s: Vec<f64> = (0..n)
        .map(|i| c.row(i).map(|(j, w)| w * f64::from(x[j])).sum())
        .collect();
    let mut value: f64 = (0..n).map(|i| f64::from(x[i]) * s[i]).sum();
    let mut best_value = value;
    let mut best_x = x.clone();

    for m in 1u64..(1u64 << n) {
        let i = m.trailing_zeros() as usize;
        let xi = f64::from(x[i]);
        value -= 4.0 * xi * s[i];
        for (j, w) in c.row(i) {
            s[j] -= 2.0 * w * xi;
        }
        x[i] = -x[i];
        if value < best_value || (value == best_value && lex_less(&x, &best_x)) {
            best_value = value;
            best_x.copy_from_slice(&x);
        }
    }
    Ok((best_x, best_value + offset))
}

fn dense_objective(a: &[Vec<f64>], cols: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            if a[i][j] != 0.0 {
                let d: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                f += a[i][j] * d;
            }
        }
    }
    f
}

/// Central difference of f along the curve `normalize(v_i + h t_i)`.
/// The tangent must be orthogonal to V column by column.
pub fn fd_directional_derivative(
    c: &CostMatrix,
    v: &FactorMatrix,
    tangent: &FactorMatrix,
    h: f64,
) -> Result<f64, Error> {
    if tangent.k() != v.k() || tangent.n() != v.n() {
        return Err(Error::InvalidArgument("tangent shape mismatch".into()));
    }
    for i in 0..v.n() {
        let d: f64 = v
            .column(i)
            .iter()
            .zip(tangent.column(i))
            .map(|(a, b)| a * b)
            .sum();
        if d.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "tangent column {i} not orthogonal (dot {d})"
            )));
        }
    }
    let a = densify(c);
    let retract = |sign: f64| -> Vec<Vec<f64>> {
        (0..v.n())
            .map(|i| {
                let mut col: Vec<f64> = v
                    .column(i)
                    .iter()
                    .zip(tangent.column(i))
                    .map(|(x, t)| x + sign * h * t)
                    .collect();
                let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in col.iter_mut() {
                    *x /= norm;
                }
                col
            })
            .collect()
    };
    let f_plus = dense_objective(&a, &retract(1.0));
    let f_minus = dense_objective(&a, &retract(-1.0));
    Ok((f_plus - f_minus) / (2.0 * h))
}

/// Smallest eigenvalue of a dense symmetric matrix by cyclic Jacobi
/// rotations.
pub fn dense_smallest_eigenvalue(a: &[Vec<f64>]) -> Result<f64, Error> {
    let n = a.len();
    let budget = OracleBudget::default();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if n > budget.dense_n_cap {
        return Err(Error::OverBudget(format!(
            "dense eigensolve over n = {n} exceeds cap {}",
            budget.dense_n_cap
        )));
    }
    let mut scale = 0.0f64;
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidArgument("matrix not square".into()));
        }
        for (j, &w) in row.iter().enumerate() {
            scale = scale.max(w.abs());
            if (w - a[j][i]).abs() > 1e-8 * (1.0 + w.abs()) {
                return Err(Error::InvalidArgument(format!(
                    "matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q] * m[p][q];
            }
        }
        if off.sqrt() <= 1e-12 * (1.0 + scale) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p][p];
                let aqq = m[q][q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = t * cos;
                m[p][p] = app - t * apq;
                m[q][q] = aqq + t * apq;
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[r][p];
                    let arq = m[r][q];
                    m[r][p] = cos * arp - sin * arq;
                    m[p][r] = m[r][p];
                    m[r][q] = sin * arp + cos * arq;
                    m[q][r] = m[r][q];
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min))
}

/// Zero-forcing detector baseline: x = sign((H'H)^{-1} H'y), solved densely
/// with partial pivoting. Returns the sign vector and its residual.
pub fn zero_forcing_detect(inst: &MimoInstance) -> Result<(Vec<i8>, f64), Error> {
    let n = inst.n();
    let budget = OracleBudget::default();
    if n > budget.dense_n_cap {
        return Err(Error::OverBudget(format!(
            "dense solve over n = {n} exceeds cap {}",
            budget.dense_n_cap
        )));
    }
    // normal equations
    let mut aug = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            aug[i][j] = (0..inst.m()).map(|r| inst.h(r, i) * inst.h(r, j)).sum();
        }
        aug[i][n] = (0..inst.m()).map(|r| inst.h(r, i) * inst.y()[r]).sum();
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))
            .unwrap();
        if aug[pivot_row][col].abs() < 1e-12 {
            return Err(Error::InvalidArgument(
                "normal equations are singular; zero-forcing undefined".into(),
            ));
        }
        aug.swap(col, pivot_row);
        for row in (col + 1)..n {
            let factor = aug[row][col] / aug[col][col];
            for j in col..=n {
                aug[row][j] -= factor * aug[col][j];
            }
        }
    }
    let mut w = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = aug[i][n];
        for j in (i + 1)..n {
            acc -= aug[i][j] * w[j];
        }
        w[i] = acc / aug[i][i];
    }
    let x: Vec<i8> = w.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
    let residual = inst.residual(&x);
    Ok((x, residual))
}
