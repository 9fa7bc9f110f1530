//! The dense `k x n` iterate `V` with unit columns, and its maintained
//! gradient array `g_i = sum_{j != i} c_ij v_j`.

use crate::cost_matrix::CostMatrix;
use crate::error::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Signals a zero-norm vector where a direction was needed. The solver's
/// convention is to keep the previous column and move on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degenerate;

/// Smallest rank with `k^2 >= 2n`; a rank-k optimum of the factorized
/// problem is then a global optimum of the SDP.
pub fn default_rank(n: usize) -> usize {
    assert!(n >= 1);
    let mut k = ((2 * n) as f64).sqrt().ceil() as usize;
    k = k.max(1);
    while k * k < 2 * n {
        k += 1;
    }
    while k > 1 && (k - 1) * (k - 1) >= 2 * n {
        k -= 1;
    }
    k
}

/// Scales `v` to unit norm in place, returning the original norm.
pub fn normalize(v: &mut [f64]) -> Result<f64, Degenerate> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Degenerate);
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Ok(norm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    k: usize,
    n: usize,
    // column-contiguous: column i lives at data[i*k .. (i+1)*k]
    data: Vec<f64>,
}

impl FactorMatrix {
    /// Each column drawn as an independent standard Gaussian vector, then
    /// normalized. Deterministic per seed.
    pub fn init_random(k: usize, n: usize, seed: u64) -> Result<Self, Error> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidArgument("rank and size must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0; k * n];
        for col in data.chunks_exact_mut(k) {
            loop {
                for x in col.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                if normalize(col).is_ok() {
                    break;
                }
            }
        }
        Ok(FactorMatrix { k, n, data })
    }

    /// Wraps caller-supplied columns, requiring each to be unit norm.
    pub fn from_unit_columns(k: usize, columns: &[Vec<f64>]) -> Result<Self, Error> {
        if k == 0 || columns.is_empty() {
            return Err(Error::InvalidArgument("rank and size must be positive".into()));
        }
        let mut data = Vec::with_capacity(k * columns.len());
        for (i, col) in columns.iter().enumerate() {
            if col.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "column {i} has length {}, expected {k}",
                    col.len()
                )));
            }
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "column {i} has norm {norm}, expected 1"
                )));
            }
            data.extend_from_slice(col);
        }
        Ok(FactorMatrix { k, n: columns.len(), data })
    }

    /// Assembles columns without the unit-norm check. Intended for tangent
    /// directions and other auxiliary data that share this layout; the
    /// solver itself only ever produces unit columns.
    pub fn from_raw_columns(k: usize, columns: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(k * columns.len());
        for col in columns {
            assert_eq!(col.len(), k);
            data.extend_from_slice(col);
        }
        FactorMatrix { k, n: columns.len(), data }
    }

    /// The k=1 embedding of a sign vector.
    pub fn embed_signs(x: &[i8]) -> Self {
        let data = x.iter().map(|&s| if s < 0 { -1.0 } else { 1.0 }).collect();
        FactorMatrix { k: 1, n: x.len(), data }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn set_column(&mut self, i: usize, v: &[f64]) {
        self.data[i * self.k..(i + 1) * self.k].copy_from_slice(v);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientArray {
    k: usize,
    n: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

/// Fresh full recomputation of all gradients.
pub fn rebuild_gradients(c: &CostMatrix, v: &FactorMatrix) -> GradientArray {
    let (k, n) = (v.k(), v.n());
    assert_eq!(c.n(), n);
    let mut data = vec![0.0; k * n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let g = &mut data[i * k..(i + 1) * k];
        c.row_gather_into(i, v, g);
        norms[i] = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    GradientArray { k, n, data, norms }
}

impl GradientArray {
    pub fn grad(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    /// Cached `y_i = ||g_i||`.
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Incremental maintenance after column `i` changed from `v_old` to
    /// `v_new`: for every neighbor j, `g_j += c_ji (v_new - v_old)`.
    /// `g_i` itself does not depend on column i, so it is untouched.
    pub fn apply_column_update(
        &mut self,
        c: &CostMatrix,
        i: usize,
        v_old: &[f64],
        v_new: &[f64],
    ) {
        let k = self.k;
        for (j, w) in c.row(i) {
            let g = &mut self.data[j * k..(j + 1) * k];
            let mut sq = 0.0;
            for d in 0..k {
                g[d] += w * (v_new[d] - v_old[d]);
                sq += g[d] * g[d];
            }
            self.norms[j] = sq.sqrt();
        }
    }

    /// `sum_i <v_i, g_i>`, which equals the objective while the array is
    /// consistent with `V`.
    pub fn objective(&self, v: &FactorMatrix) -> f64 {
        let k = self.k;
        (0..self.n)
            .map(|i| {
                let g = &self.data[i * k..(i + 1) * k];
                dot(v.column(i), g)
            })
            .sum()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `f(V) = <C, V'V>`, recomputed from scratch.
pub fn objective(c: &CostMatrix, v: &FactorMatrix) -> f64 {
    let mut g = vec![0.0; v.k()];
    (0..v.n())
        .map(|i| {
            c.row_gather_into(i, v, &mut g);
            dot(v.column(i), &g)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cost(n: usize, density: f64, seed: u64) -> CostMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trips = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(density) {
                    trips.push((i, j, rng.gen_range(-2.0..2.0)));
                }
            }
        }
        CostMatrix::from_triplets(n, &trips).unwrap()
    }

    #[test]
    fn default_rank_values() {
        assert_eq!(default_rank(2), 2);
        assert_eq!(default_rank(8), 4);
        // ceil(sqrt(4000)): 63^2 = 3969 < 4000 <= 64^2
        assert_eq!(default_rank(2000), 64);
        assert_eq!(default_rank(1), 2);
        for n in 1..500 {
            let k = default_rank(n);
            assert!(k * k >= 2 * n);
            assert!(k == 1 || (k - 1) * (k - 1) < 2 * n);
        }
    }

    #[test]
    fn normalize_examples() {
        let mut v = [3.0, 4.0];
        assert_eq!(normalize(&mut v), Ok(5.0));
        assert_eq!(v, [0.6, 0.8]);

        let mut z = [0.0, 0.0];
        assert_eq!(normalize(&mut z), Err(Degenerate));

        let mut u = [1.0, 0.0, 0.0];
        normalize(&mut u).unwrap();
        assert_eq!(u, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn init_random_is_unit_and_deterministic() {
        let a = FactorMatrix::init_random(4, 10, 7).unwrap();
        let b = FactorMatrix::init_random(4, 10, 7).unwrap();
        assert_eq!(a, b);
        for i in 0..10 {
            let norm = a.column(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        let c = FactorMatrix::init_random(4, 10, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_random_rank_one_gives_signs() {
        let v = FactorMatrix::init_random(1, 3, 0).unwrap();
        for i in 0..3 {
            assert!(v.column(i)[0] == 1.0 || v.column(i)[0] == -1.0);
        }
    }

    #[test]
    fn objective_single_edge() {
        let c = CostMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let same = FactorMatrix::from_unit_columns(2, &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(objective(&c, &same), 2.0);
        let opposite =
            FactorMatrix::from_unit_columns(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(objective(&c, &opposite), -2.0);
    }

    #[test]
    fn objective_matches_dense_trace() {
        let n = 7;
        let c = random_cost(n, 0.7, 5);
        let v = FactorMatrix::init_random(3, n, 9).unwrap();
        // trace(C V'V) computed densely
        let mut want = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    want += c.entry(i, j) * dot(v.column(i), v.column(j));
                }
            }
        }
        let got = objective(&c, &v);
        assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn rebuild_gradients_examples() {
        let zero = CostMatrix::from_triplets(3, &[]).unwrap();
        let v = FactorMatrix::init_random(2, 3, 1).unwrap();
        let g = rebuild_gradients(&zero, &v);
        for i in 0..3 {
            assert_eq!(g.grad(i), &[0.0, 0.0]);
            assert_eq!(g.norm(i), 0.0);
        }

        let edge = CostMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let v = FactorMatrix::init_random(3, 2, 2).unwrap();
        let g = rebuild_gradients(&edge, &v);
        assert_eq!(g.grad(0), v.column(1));
        assert_eq!(g.grad(1), v.column(0));

        let c = random_cost(9, 0.5, 13);
        let v = FactorMatrix::init_random(4, 9, 3).unwrap();
        let g = rebuild_gradients(&c, &v);
        for i in 0..9 {
            assert_eq!(g.grad(i), c.row_gather(i, &v).as_slice());
        }
    }

    #[test]
    fn apply_column_update_examples() {
        let c = random_cost(10, 0.5, 21);
        let mut v = FactorMatrix::init_random(3, 10, 4).unwrap();
        let mut g = rebuild_gradients(&c, &v);

        // no-op update leaves G bitwise unchanged
        let before = g.clone();
        let col0 = v.column(0).to_vec();
        g.apply_column_update(&c, 0, &col0, &col0);
        assert_eq!(g, before);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let i = rng.gen_range(0..10);
            let mut new_col: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if normalize(&mut new_col).is_err() {
                continue;
            }
            let old = v.column(i).to_vec();
            v.set_column(i, &new_col);
            g.apply_column_update(&c, i, &old, &new_col);
        }
        let fresh = rebuild_gradients(&c, &v);
        for i in 0..10 {
            for d in 0..3 {
                assert!((g.grad(i)[d] - fresh.grad(i)[d]).abs() <= 1e-8);
            }
            assert!((g.norm(i) - fresh.norm(i)).abs() <= 1e-8);
        }
    }

    #[test]
    fn single_edge_update_tracks_neighbor() {
        let c = CostMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let mut v =
            FactorMatrix::from_unit_columns(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut g = rebuild_gradients(&c, &v);
        let old = v.column(1).to_vec();
        let new_col = vec![-1.0, 0.0];
        v.set_column(1, &new_col);
        g.apply_column_update(&c, 1, &old, &new_col);
        assert_eq!(g.grad(0), &[-1.0, 0.0]);
        // g_1 untouched by its own column
        assert_eq!(g.grad(1), &[1.0, 0.0]);
    }

    #[test]
    fn objective_via_grads_consistent() {
        let c = random_cost(12, 0.4, 31);
        let v = FactorMatrix::init_random(5, 12, 6).unwrap();
        let g = rebuild_gradients(&c, &v);
        let a = g.objective(&v);
        let b = objective(&c, &v);
        assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    }
}
