//! Problem instances (max-cut, max-sat, MIMO detection) and their
//! reductions to diagonally constrained cost matrices.
//!
//! Each reduction returns the cost matrix together with an [`AffineMap`]
//! that converts a relaxation objective value back into problem units
//! (cut weight, satisfied-clause bound, squared detection residual).

use crate::cost_matrix::CostMatrix;
use crate::error::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `f -> scale * f + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
}

impl AffineMap {
    pub fn apply(&self, f: f64) -> f64 {
        self.scale * f + self.offset
    }
}

/// Weighted undirected graph with no self-loops; duplicate edges are merged
/// by summing their weights at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCutInstance {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl MaxCutInstance {
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        let mut merged = std::collections::BTreeMap::new();
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {i}")));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    place: format!("weight of edge ({i}, {j})"),
                });
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
        let edges = merged.into_iter().map(|((i, j), w)| (i, j, w)).collect();
        Ok(MaxCutInstance { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges in canonical `(i, j, w)` form with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }

    /// Weight of edges crossing the partition induced by the sign vector.
    pub fn cut_value(&self, x: &[i8]) -> f64 {
        assert_eq!(x.len(), self.n);
        self.edges
            .iter()
            .map(|&(i, j, w)| w * 0.5 * (1.0 - f64::from(x[i]) * f64::from(x[j])))
            .sum()
    }
}

/// Disjunction of literals `(variable, sign)`, sign +1 for the positive
/// polarity. Clauses containing a variable in both polarities are kept but
/// flagged tautological: they count as always satisfied and contribute
/// nothing to the cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    literals: Vec<(usize, i8)>,
    tautological: bool,
}

impl Clause {
    pub fn literals(&self) -> &[(usize, i8)] {
        &self.literals
    }

    pub fn is_tautological(&self) -> bool {
        self.tautological
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxSatInstance {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl MaxSatInstance {
    /// Builds an instance from raw clauses. Duplicate literals inside a
    /// clause are dropped; complementary literals mark the clause
    /// tautological. Empty clauses are rejected.
    pub fn new(num_vars: usize, raw_clauses: &[Vec<(usize, i8)>]) -> Result<Self, Error> {
        let mut clauses = Vec::with_capacity(raw_clauses.len());
        for (idx, raw) in raw_clauses.iter().enumerate() {
            if raw.is_empty() {
                return Err(Error::InvalidArgument(format!("clause {idx} is empty")));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &(var, sign) in raw {
                if var >= num_vars {
                    return Err(Error::IndexOutOfRange { index: var, n: num_vars });
                }
                if sign != 1 && sign != -1 {
                    return Err(Error::InvalidArgument(format!(
                        "clause {idx}: literal sign must be +1 or -1, got {sign}"
                    )));
                }
                seen.insert((var, sign));
            }
            let tautological = seen
                .iter()
                .any(|&(var, sign)| seen.contains(&(var, -sign)));
            let literals: Vec<(usize, i8)> = seen.into_iter().collect();
            clauses.push(Clause { literals, tautological });
        }
        Ok(MaxSatInstance { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_tautological(&self) -> usize {
        self.clauses.iter().filter(|c| c.tautological).count()
    }

    pub fn satisfied_count(&self, x: &[i8]) -> usize {
        assert_eq!(x.len(), self.num_vars);
        self.clauses
            .iter()
            .filter(|c| {
                c.tautological
                    || c.literals.iter().any(|&(var, sign)| x[var] == sign)
            })
            .count()
    }
}

/// Received linear system `y = H x + v` with an unknown sign vector x.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoInstance {
    m: usize,
    n: usize,
    h: Vec<f64>,
    y: Vec<f64>,
    snr: f64,
}

impl MimoInstance {
    /// `h` is the m-by-n channel matrix in row-major order.
    pub fn new(m: usize, n: usize, h: Vec<f64>, y: Vec<f64>, snr: f64) -> Result<Self, Error> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("channel must be at least 1x1".into()));
        }
        if h.len() != m * n {
            return Err(Error::InvalidArgument(format!(
                "channel has {} entries, expected {}",
                h.len(),
                m * n
            )));
        }
        if y.len() != m {
            return Err(Error::InvalidArgument(format!(
                "received vector has length {}, expected {m}",
                y.len()
            )));
        }
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::InvalidArgument(format!("snr must be positive, got {snr}")));
        }
        if h.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { place: "channel data".into() });
        }
        Ok(MimoInstance { m, n, h, y, snr })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self, row: usize, col: usize) -> f64 {
        self.h[row * self.n + col]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// Noise variance implied by the snr convention: `sigma^2 = m n / snr`.
    pub fn sigma_v_sq(&self) -> f64 {
        (self.m * self.n) as f64 / self.snr
    }

    /// `|| y - H x ||^2`.
    pub fn residual(&self, x: &[i8]) -> f64 {
        assert_eq!(x.len(), self.n);
        (0..self.m)
            .map(|r| {
                let pred: f64 = (0..self.n)
                    .map(|c| self.h(r, c) * f64::from(x[c]))
                    .sum();
                let d = self.y[r] - pred;
                d * d
            })
            .sum()
    }
}

/// Cut weight of a sign embedding equals `W/2 - f/4` where W is the total
/// edge weight and f the relaxation objective at that embedding.
pub fn maxcut_to_cost(inst: &MaxCutInstance) -> (CostMatrix, AffineMap) {
    let mut trips = Vec::with_capacity(2 * inst.edges().len());
    for &(i, j, w) in inst.edges() {
        trips.push((i, j, w));
        trips.push((j, i, w));
    }
    let c = CostMatrix::from_triplets(inst.n(), &trips)
        .expect("validated instance produces a valid cost matrix");
    let map = AffineMap {
        scale: -0.25,
        offset: inst.total_weight() / 2.0,
    };
    (c, map)
}

/// Cost matrix over `num_vars + 1` columns; the last column plays the role
/// of "truth". Each non-tautological clause with sign vector s over its L
/// variables contributes the off-diagonal part of the rank-one matrix
/// `[s; -1][s; -1]' / (4L)`. The returned map sends the objective to an
/// upper bound on the number of satisfiable clauses; at sign embeddings the
/// bound is exact for clauses of length at most two and can overshoot for
/// longer clauses.
pub fn maxsat_to_cost(inst: &MaxSatInstance) -> (CostMatrix, AffineMap) {
    let n = inst.num_vars();
    let truth = n;
    let mut trips = Vec::new();
    let mut offset = inst.num_clauses() as f64;
    for clause in inst.clauses() {
        if clause.is_tautological() {
            continue;
        }
        let l = clause.len() as f64;
        let coef = 1.0 / (4.0 * l);
        let mut stilde: Vec<(usize, f64)> = clause
            .literals()
            .iter()
            .map(|&(var, sign)| (var, f64::from(sign)))
            .collect();
        stilde.push((truth, -1.0));
        for a in 0..stilde.len() {
            for b in (a + 1)..stilde.len() {
                let (va, sa) = stilde[a];
                let (vb, sb) = stilde[b];
                let w = coef * sa * sb;
                trips.push((va, vb, w));
                trips.push((vb, va, w));
            }
        }
        offset += ((l - 1.0) * (l - 1.0) - (l + 1.0)) / (4.0 * l);
    }
    let c = CostMatrix::from_triplets(n + 1, &trips)
        .expect("validated instance produces a valid cost matrix");
    (c, AffineMap { scale: -1.0, offset })
}

/// Cost matrix over `n + 1` columns encoding `|| y - H x ||^2` at sign
/// embeddings with the truth column fixed to +1: the blocks are H'H,
/// -H'y, and the offset `tr(H'H) + y'y` absorbs the diagonal.
pub fn mimo_to_cost(inst: &MimoInstance) -> (CostMatrix, AffineMap) {
    let n = inst.n();
    let m = inst.m();
    let truth = n;
    let mut trips = Vec::new();
    let mut trace_hth = 0.0;
    for i in 0..n {
        for j in i..n {
            let hth: f64 = (0..m).map(|r| inst.h(r, i) * inst.h(r, j)).sum();
            if i == j {
                trace_hth += hth;
            } else {
                trips.push((i, j, hth));
                trips.push((j, i, hth));
            }
        }
        let hty: f64 = (0..m).map(|r| inst.h(r, i) * inst.y()[r]).sum();
        trips.push((i, truth, -hty));
        trips.push((truth, i, -hty));
    }
    let yty: f64 = inst.y().iter().map(|v| v * v).sum();
    let c = CostMatrix::from_triplets(n + 1, &trips)
        .expect("validated instance produces a valid cost matrix");
    (c, AffineMap { scale: 1.0, offset: trace_hth + yty })
}

/// Draws a Gaussian channel (row-major), a uniform sign vector, and
/// additive noise with variance `m n / snr`, in that order, from a
/// ChaCha stream seeded by `seed`. Returns the instance and the true
/// transmitted signs.
pub fn simulate_mimo(
    m: usize,
    n: usize,
    snr: f64,
    seed: u64,
) -> Result<(MimoInstance, Vec<i8>), Error> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("channel must be at least 1x1".into()));
    }
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::InvalidArgument(format!("snr must be positive, got {snr}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    let x_true: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let sigma = ((m * n) as f64 / snr).sqrt();
    let y: Vec<f64> = (0..m)
        .map(|r| {
            let clean: f64 = (0..n)
                .map(|c| h[r * n + c] * f64::from(x_true[c]))
                .sum();
            let noise: f64 = rng.sample(StandardNormal);
            clean + sigma * noise
        })
        .collect();
    let inst = MimoInstance::new(m, n, h, y, snr)?;
    Ok((inst, x_true))
}

/// Unweighted Erdos-Renyi graph: each pair i < j is an edge with
/// probability p, decided in lexicographic pair order.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<MaxCutInstance, Error> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "edge probability must be in [0, 1], got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) {
                edges.push((i, j, 1.0));
            }
        }
    }
    MaxCutInstance::new(n, &edges)
}
