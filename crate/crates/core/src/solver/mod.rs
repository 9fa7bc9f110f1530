//! Coordinate descent solve loop: configuration, coordinate selection,
//! momentum scheduling, sweeps, stopping, and diagnostics.

mod kernel;
mod trace;

pub use kernel::{update_column_momentum, update_column_plain, MomentumOutcome};
pub use trace::{SolveTrace, SweepRecord};

use crate::cost_matrix::CostMatrix;
use crate::error::Error;
use crate::factor::{dot, objective, rebuild_gradients, FactorMatrix, GradientArray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateRule {
    Cyclic,
    Uniform,
    Importance,
    Greedy,
}

impl CoordinateRule {
    pub fn name(self) -> &'static str {
        match self {
            CoordinateRule::Cyclic => "cyclic",
            CoordinateRule::Uniform => "uniform",
            CoordinateRule::Importance => "importance",
            CoordinateRule::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumSchedule {
    Fixed,
    /// `beta_t = beta * (1 - exp(-alpha * t / total_sweeps))`, clamped to
    /// `[0, beta]`; `t` counts sweeps.
    ExponentialWarmup { alpha: f64, total_sweeps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    /// `ceil(sqrt(2n))`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceLevel {
    Off,
    PerSweep,
    /// Additionally evaluates the descent, norm-bound, and update-identity
    /// checks each sweep, recording violations in the trace.
    PerSweepWithChecks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub schedule: MomentumSchedule,
    pub rule: CoordinateRule,
    pub rank: Rank,
    /// Stop when |f_prev - f| <= epsilon * max(1, |f|) twice in a row.
    pub epsilon: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Gradients are rebuilt from scratch every this many sweeps to bound
    /// floating-point drift of the incremental updates.
    pub rebuild_period: usize,
    pub trace_level: TraceLevel,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            beta: 0.8,
            schedule: MomentumSchedule::Fixed,
            rule: CoordinateRule::Cyclic,
            rank: Rank::Auto,
            epsilon: 1e-5,
            max_sweeps: 10_000,
            seed: 0,
            rebuild_period: 64,
            trace_level: TraceLevel::PerSweep,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.beta.is_finite() || !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Config(format!(
                "beta must satisfy 0 <= beta < 1 (momentum step norms are only bounded below 1), got {}",
                self.beta
            )));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::Config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if self.rebuild_period == 0 {
            return Err(Error::Config("rebuild_period must be >= 1".into()));
        }
        if let Rank::Fixed(k) = self.rank {
            if k == 0 {
                return Err(Error::Config("rank must be >= 1".into()));
            }
        }
        if let MomentumSchedule::ExponentialWarmup { alpha, total_sweeps } = self.schedule {
            if !alpha.is_finite() || alpha <= 0.0 {
                return Err(Error::Config(format!("warmup alpha must be > 0, got {alpha}")));
            }
            if total_sweeps == 0 {
                return Err(Error::Config("warmup total_sweeps must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn resolve_rank(&self, n: usize) -> usize {
        match self.rank {
            Rank::Auto => crate::factor::default_rank(n),
            Rank::Fixed(k) => k,
        }
    }

    pub fn momentum_at(&self, t: usize) -> f64 {
        momentum_at(self.schedule, self.beta, t)
    }
}

/// Momentum coefficient for sweep `t`.
pub fn momentum_at(schedule: MomentumSchedule, beta: f64, t: usize) -> f64 {
    match schedule {
        MomentumSchedule::Fixed => beta,
        MomentumSchedule::ExponentialWarmup { alpha, total_sweeps } => {
            let ratio = t as f64 / total_sweeps as f64;
            (beta * (1.0 - (-alpha * ratio).exp())).clamp(0.0, beta)
        }
    }
}

/// Picks the coordinate for one update.
pub fn select_coordinate(
    rule: CoordinateRule,
    g: &GradientArray,
    v: &FactorMatrix,
    sweep_position: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let n = g.n();
    match rule {
        CoordinateRule::Cyclic => sweep_position % n,
        CoordinateRule::Uniform => rng.gen_range(0..n),
        CoordinateRule::Importance => {
            let total: f64 = (0..n).map(|i| g.norm(i)).sum();
            if total <= 0.0 {
                return rng.gen_range(0..n);
            }
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            for i in 0..n {
                acc += g.norm(i);
                if target < acc {
                    return i;
                }
            }
            n - 1
        }
        CoordinateRule::Greedy => {
            // potential-decrease score y_i + <v_i, g_i>; zero exactly at
            // per-coordinate fixed points, ties broken by lowest index
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for i in 0..n {
                let score = g.norm(i) + dot(v.column(i), g.grad(i));
                if score > best_score {
                    best = i;
                    best_score = score;
                }
            }
            best
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    /// min y_i over this sweep's selector draws (0 if a degenerate column
    /// was drawn).
    pub min_g_norm: f64,
    /// sum of y_i ||v_i - v_new_i||^2, each term evaluated at update time.
    pub accumulated_descent: f64,
    pub degenerate_skips: usize,
    pub w_min: f64,
    pub w_max: f64,
    pub max_recursion_residual: f64,
}

/// One sweep = n coordinate updates (a full cycle for Cyclic, n selector
/// draws otherwise), each applying the momentum kernel at this sweep's
/// beta and maintaining the gradient array incrementally.
pub fn sweep(
    c: &CostMatrix,
    v: &mut FactorMatrix,
    g: &mut GradientArray,
    config: &SolverConfig,
    sweep_index: usize,
    rng: &mut ChaCha8Rng,
) -> SweepStats {
    let beta = config.momentum_at(sweep_index);
    let check_identity = config.trace_level == TraceLevel::PerSweepWithChecks;
    let n = v.n();
    let k = v.k();
    let mut v_old = vec![0.0; k];
    let mut u = vec![0.0; k];
    let mut v_new = vec![0.0; k];
    let mut stats = SweepStats {
        min_g_norm: f64::INFINITY,
        accumulated_descent: 0.0,
        degenerate_skips: 0,
        w_min: f64::INFINITY,
        w_max: f64::NEG_INFINITY,
        max_recursion_residual: 0.0,
    };

    for pos in 0..n {
        let i = select_coordinate(config.rule, g, v, pos, rng);
        let gi = g.grad(i);
        v_old.copy_from_slice(v.column(i));
        let outcome = match update_column_momentum(gi, &v_old, beta, &mut u, &mut v_new) {
            Ok(outcome) => outcome,
            Err(_) => {
                stats.degenerate_skips += 1;
                stats.min_g_norm = 0.0;
                continue;
            }
        };
        stats.min_g_norm = stats.min_g_norm.min(outcome.y);
        stats.w_min = stats.w_min.min(outcome.w);
        stats.w_max = stats.w_max.max(outcome.w);
        if check_identity {
            let mut worst = 0.0f64;
            for d in 0..k {
                let lhs = outcome.w * outcome.y * v_new[d];
                let rhs = -(1.0 + beta) * gi[d] - beta * outcome.y * v_old[d];
                worst = worst.max((lhs - rhs).abs() / (1.0 + outcome.y));
            }
            stats.max_recursion_residual = stats.max_recursion_residual.max(worst);
        }
        let moved: f64 = v_old
            .iter()
            .zip(&v_new)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        stats.accumulated_descent += outcome.y * moved;
        v.set_column(i, &v_new);
        g.apply_column_update(c, i, &v_old, &v_new);
    }
    if stats.min_g_norm == f64::INFINITY {
        stats.min_g_norm = 0.0;
    }
    stats
}

/// Slack of the per-sweep descent bound
/// `f_before - f_after >= (1-beta)/(1+beta) * accumulated`; nonnegative up
/// to roundoff for any fixed beta in [0, 1).
pub fn descent_gap(f_before: f64, f_after: f64, accumulated: f64, beta: f64) -> f64 {
    (f_before - f_after) - (1.0 - beta) / (1.0 + beta) * accumulated
}

/// Frobenius norm of the Riemannian gradient: each column contributes
/// `2 (g_i - <v_i, g_i> v_i)`.
pub fn projected_grad_norm(g: &GradientArray, v: &FactorMatrix) -> f64 {
    let k = v.k();
    let mut total = 0.0;
    for i in 0..v.n() {
        let gi = g.grad(i);
        let vi = v.column(i);
        let d = dot(vi, gi);
        for t in 0..k {
            let e = 2.0 * (gi[t] - d * vi[t]);
            total += e * e;
        }
    }
    total.sqrt()
}

/// `-sum_i y_i`: the dual objective at `y_i = ||g_i||`. A valid lower
/// bound on the SDP optimum only when `C + diag(y)` is positive
/// semidefinite, which callers must check separately.
pub fn dual_bound(g: &GradientArray) -> f64 {
    -(0..g.n()).map(|i| g.norm(i)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub v: FactorMatrix,
    /// `<C, V'V>` recomputed from scratch at exit.
    pub objective: f64,
    /// Constant carried alongside the solve so callers can report
    /// `objective + problem_offset` without re-plumbing it.
    pub problem_offset: f64,
    pub sweeps_used: usize,
    pub converged: bool,
    pub trace: SolveTrace,
}

/// Runs sweeps until the relative objective change stays below epsilon for
/// two consecutive sweeps, or until max_sweeps.
pub fn solve(c: &CostMatrix, problem_offset: f64, config: &SolverConfig) -> Result<SolveResult, Error> {
    config.validate()?;
    let n = c.n();
    let k = config.resolve_rank(n);
    let mut v = FactorMatrix::init_random(k, n, config.seed)?;
    let mut g = rebuild_gradients(c, &v);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1); // keep selector draws independent of the init stream

    let mut trace = SolveTrace::default();
    let start = Instant::now();
    let mut f_prev = g.objective(&v);
    let mut hits = 0usize;
    let mut sweeps_used = 0usize;
    let mut converged = false;

    for t in 0..config.max_sweeps {
        let beta_t = config.momentum_at(t);
        let stats = sweep(c, &mut v, &mut g, config, t, &mut rng);
        sweeps_used = t + 1;
        if sweeps_used % config.rebuild_period == 0 {
            g = rebuild_gradients(c, &v);
        }
        let f_new = g.objective(&v);

        if config.trace_level != TraceLevel::Off {
            let slack = descent_gap(f_prev, f_new, stats.accumulated_descent, beta_t);
            let record = SweepRecord {
                sweep: t,
                f: f_new,
                min_g_norm: stats.min_g_norm,
                descent_slack: slack,
                grad_norm: projected_grad_norm(&g, &v),
                beta_used: beta_t,
                elapsed_s: start.elapsed().as_secs_f64(),
                w_min: stats.w_min,
                w_max: stats.w_max,
                degenerate_skips: stats.degenerate_skips,
                max_recursion_residual: stats.max_recursion_residual,
            };
            if config.trace_level == TraceLevel::PerSweepWithChecks {
                let tol = 1e-8 * (1.0 + f_prev.abs());
                if f_new > f_prev + tol {
                    trace
                        .check_failures
                        .push(format!("sweep {t}: objective increased from {f_prev} to {f_new}"));
                }
                if slack < -tol {
                    trace
                        .check_failures
                        .push(format!("sweep {t}: descent bound violated, slack {slack}"));
                }
                if record.w_min <= record.w_max
                    && (record.w_min < 1.0 - 1e-12 || record.w_max > 1.0 + 2.0 * beta_t + 1e-12)
                {
                    trace.check_failures.push(format!(
                        "sweep {t}: w outside [1, 1+2beta]: [{}, {}]",
                        record.w_min, record.w_max
                    ));
                }
                if record.max_recursion_residual > 1e-10 {
                    trace.check_failures.push(format!(
                        "sweep {t}: update identity residual {}",
                        record.max_recursion_residual
                    ));
                }
            }
            trace.records.push(record);
        }

        if (f_prev - f_new).abs() <= config.epsilon * f_new.abs().max(1.0) {
            hits += 1;
            if hits >= 2 {
                f_prev = f_new;
                converged = true;
                break;
            }
        } else {
            hits = 0;
        }
        f_prev = f_new;
    }
    let _ = f_prev;

    Ok(SolveResult {
        objective: objective(c, &v),
        v,
        problem_offset,
        sweeps_used,
        converged,
        trace,
    })
}
