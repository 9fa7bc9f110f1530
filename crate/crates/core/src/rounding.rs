//! Randomized hyperplane rounding of a unit-column factorization back to
//! sign vectors, plus the deterministic truth-column decode used by the
//! problems that carry a truth column.
//!
//! Trial t draws its Gaussian from a dedicated ChaCha stream (`set_stream(t)`
//! on a generator seeded by `seed`), so a run with more trials reproduces
//! the shorter run's trials exactly and can only improve on its best value.

use crate::error::Error;
use crate::factor::FactorMatrix;
use crate::problems::{MaxCutInstance, MaxSatInstance, MimoInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingReport {
    pub best_value: f64,
    pub assignment: Vec<i8>,
    pub trials: usize,
    pub per_trial_values: Vec<f64>,
}

fn sign_of(d: f64) -> i8 {
    if d < 0.0 {
        -1
    } else {
        1
    }
}

fn gaussian_direction(k: usize, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Best cut over `trials` random hyperplanes. Ties keep the earliest trial.
pub fn round_maxcut(
    v: &FactorMatrix,
    inst: &MaxCutInstance,
    trials: usize,
    seed: u64,
) -> Result<RoundingReport, Error> {
    if v.n() != inst.n() {
        return Err(Error::InvalidArgument(format!(
            "factorization has {} columns, instance has {} vertices",
            v.n(),
            inst.n()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("rounding needs at least one trial".into()));
    }
    let mut best_value = f64::NEG_INFINITY;
    let mut assignment = vec![1i8; inst.n()];
    let mut per_trial_values = Vec::with_capacity(trials);
    for trial in 0..trials {
        let r = gaussian_direction(v.k(), seed, trial as u64);
        let x: Vec<i8> = (0..v.n()).map(|i| sign_of(dot(&r, v.column(i)))).collect();
        let value = inst.cut_value(&x);
        per_trial_values.push(value);
        if value > best_value {
            best_value = value;
            assignment = x;
        }
    }
    Ok(RoundingReport { best_value, assignment, trials, per_trial_values })
}

fn truth_decode(v: &FactorMatrix, num_vars: usize) -> Vec<i8> {
    let truth = v.column(num_vars);
    (0..num_vars)
        .map(|i| sign_of(dot(v.column(i), truth)))
        .collect()
}

/// Best assignment over the deterministic truth-column decode (trial 0)
/// followed by `trials - 1` random hyperplanes oriented by the truth
/// column. The factorization must carry the extra truth column.
pub fn round_maxsat(
    v: &FactorMatrix,
    inst: &MaxSatInstance,
    trials: usize,
    seed: u64,
) -> Result<RoundingReport, Error> {
    let n = inst.num_vars();
    if v.n() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "factorization has {} columns, expected {} variables plus a truth column",
            v.n(),
            n + 1
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("rounding needs at least one trial".into()));
    }
    let mut best_value = f64::NEG_INFINITY;
    let mut assignment = vec![1i8; n];
    let mut per_trial_values = Vec::with_capacity(trials);
    for trial in 0..trials {
        let x: Vec<i8> = if trial == 0 {
            truth_decode(v, n)
        } else {
            let r = gaussian_direction(v.k(), seed, trial as u64);
            let sigma = f64::from(sign_of(dot(&r, v.column(n))));
            (0..n)
                .map(|i| sign_of(sigma * dot(&r, v.column(i))))
                .collect()
        };
        let value = inst.satisfied_count(&x) as f64;
        per_trial_values.push(value);
        if value > best_value {
            best_value = value;
            assignment = x;
        }
    }
    Ok(RoundingReport { best_value, assignment, trials, per_trial_values })
}

/// Deterministic detection: sign of each column against the truth column,
/// scored by the squared residual (lower is better).
pub fn detect_mimo(v: &FactorMatrix, inst: &MimoInstance) -> Result<(Vec<i8>, f64), Error> {
    let n = inst.n();
    if v.n() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "factorization has {} columns, expected {} antennas plus a truth column",
            v.n(),
            n + 1
        )));
    }
    let x = truth_decode(v, n);
    let residual = inst.residual(&x);
    Ok((x, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{erdos_renyi, maxcut_to_cost, maxsat_to_cost, mimo_to_cost, simulate_mimo};
    use crate::solver::{solve, Rank, SolverConfig};

    #[test]
    fn sign_embedding_rounds_to_itself() {
        let inst = MaxCutInstance::new(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let x = [1i8, -1, -1, 1];
        let v = FactorMatrix::embed_signs(&x);
        let report = round_maxcut(&v, &inst, 5, 0).unwrap();
        let expect = inst.cut_value(&x);
        assert_eq!(report.best_value, expect);
        assert_eq!(report.per_trial_values, vec![expect; 5]);
        assert_eq!(inst.cut_value(&report.assignment), expect);
    }

    #[test]
    fn rounding_is_deterministic_and_prefix_monotone() {
        let inst = erdos_renyi(20, 0.3, 3).unwrap();
        let (c, _) = maxcut_to_cost(&inst);
        let config = SolverConfig { rank: Rank::Fixed(5), ..SolverConfig::default() };
        let res = solve(&c, 0.0, &config).unwrap();

        let a = round_maxcut(&res.v, &inst, 12, 9).unwrap();
        let b = round_maxcut(&res.v, &inst, 12, 9).unwrap();
        assert_eq!(a, b);

        let longer = round_maxcut(&res.v, &inst, 40, 9).unwrap();
        assert_eq!(&longer.per_trial_values[..12], &a.per_trial_values[..]);
        assert!(longer.best_value >= a.best_value);

        let other_seed = round_maxcut(&res.v, &inst, 12, 10).unwrap();
        assert_ne!(a.per_trial_values, other_seed.per_trial_values);

        // report is internally consistent
        assert_eq!(a.trials, 12);
        assert_eq!(a.best_value, inst.cut_value(&a.assignment));
        assert_eq!(
            a.best_value,
            a.per_trial_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        );
    }

    #[test]
    fn maxsat_trial_zero_decodes_embedded_assignment() {
        let inst = MaxSatInstance::new(
            3,
            &[vec![(0, 1), (1, 1)], vec![(1, -1)], vec![(2, 1), (0, -1)]],
        )
        .unwrap();
        let x = [-1i8, 1, 1];
        let mut full = x.to_vec();
        full.push(1);
        let v = FactorMatrix::embed_signs(&full);
        let report = round_maxsat(&v, &inst, 1, 0).unwrap();
        assert_eq!(report.assignment, x.to_vec());
        assert_eq!(report.best_value, inst.satisfied_count(&x) as f64);
    }

    #[test]
    fn maxsat_rounding_scores_match_instance() {
        let inst = MaxSatInstance::new(
            6,
            &[
                vec![(0, 1), (1, -1), (2, 1)],
                vec![(3, 1), (4, 1)],
                vec![(5, -1)],
                vec![(0, -1), (5, 1)],
                vec![(2, -1), (3, -1), (4, -1)],
            ],
        )
        .unwrap();
        let (c, _) = maxsat_to_cost(&inst);
        let res = solve(&c, 0.0, &SolverConfig::default()).unwrap();
        let report = round_maxsat(&res.v, &inst, 20, 4).unwrap();
        assert_eq!(report.per_trial_values.len(), 20);
        assert_eq!(report.best_value, inst.satisfied_count(&report.assignment) as f64);
        assert!(report.best_value <= inst.num_clauses() as f64);
        // truth-column flip leaves the trial-0 decode invariant in value:
        // negating every column including truth decodes to the same signs
        let flipped_cols: Vec<Vec<f64>> = (0..res.v.n())
            .map(|i| res.v.column(i).iter().map(|x| -x).collect())
            .collect();
        let flipped = FactorMatrix::from_raw_columns(res.v.k(), &flipped_cols);
        let r2 = round_maxsat(&flipped, &inst, 1, 4).unwrap();
        assert_eq!(r2.assignment, round_maxsat(&res.v, &inst, 1, 4).unwrap().assignment);
    }

    #[test]
    fn mimo_detection_recovers_high_snr_signal() {
        let (inst, x_true) = simulate_mimo(8, 6, 1e6, 2).unwrap();
        let (c, _) = mimo_to_cost(&inst);
        let config = SolverConfig { epsilon: 1e-9, ..SolverConfig::default() };
        let res = solve(&c, 0.0, &config).unwrap();
        let (x, residual) = detect_mimo(&res.v, &inst).unwrap();
        assert_eq!(x, x_true);
        assert!(residual <= 1e-3);
        assert_eq!(residual, inst.residual(&x));
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let inst = MaxCutInstance::new(3, &[(0, 1, 1.0)]).unwrap();
        let v = FactorMatrix::init_random(2, 4, 0).unwrap();
        assert!(round_maxcut(&v, &inst, 3, 0).is_err());
        assert!(round_maxcut(&FactorMatrix::init_random(2, 3, 0).unwrap(), &inst, 0, 0).is_err());
        // a 4-variable instance needs 5 columns (variables plus truth)
        let sat = MaxSatInstance::new(4, &[vec![(0, 1)]]).unwrap();
        assert!(round_maxsat(&v, &sat, 3, 0).is_err());
        let (mimo, _) = simulate_mimo(4, 4, 10.0, 0).unwrap();
        assert!(detect_mimo(&v, &mimo).is_err());
    }
}
