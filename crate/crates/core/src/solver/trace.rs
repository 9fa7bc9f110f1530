//! Per-sweep solve trace and its CSV/JSON export.
//!
//! The exported schema is fixed: columns `sweep, f, min_g_norm,
//! descent_slack, grad_norm, beta_used, elapsed_s` in that order.
//! `elapsed_s` is cumulative wall time since the solve started. Extra
//! in-memory diagnostics (w bounds, degenerate skips, recursion residual)
//! are not part of the exported schema.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    pub f: f64,
    /// min over the sweep's updates of y_i = ||g_i|| at the update instant.
    pub min_g_norm: f64,
    /// (f_before - f_after) - (1-beta)/(1+beta) * sum y_i ||v_i - v_new_i||^2
    pub descent_slack: f64,
    pub grad_norm: f64,
    pub beta_used: f64,
    pub elapsed_s: f64,
    /// Smallest/largest second-normalization norm w_i seen this sweep;
    /// `w_min > w_max` means no update was accepted.
    pub w_min: f64,
    pub w_max: f64,
    pub degenerate_skips: usize,
    /// Largest elementwise residual ratio of the update identity
    /// `w y v_new = -(1+beta) g - beta y v`, scaled by 1/(1+y). Only
    /// populated when the solve runs with checks enabled.
    pub max_recursion_residual: f64,
}

#[derive(Serialize)]
struct ExportedRecord {
    sweep: usize,
    f: f64,
    min_g_norm: f64,
    descent_slack: f64,
    grad_norm: f64,
    beta_used: f64,
    elapsed_s: f64,
}

impl SweepRecord {
    fn exported(&self) -> ExportedRecord {
        ExportedRecord {
            sweep: self.sweep,
            f: self.f,
            min_g_norm: self.min_g_norm,
            descent_slack: self.descent_slack,
            grad_norm: self.grad_norm,
            beta_used: self.beta_used,
            elapsed_s: self.elapsed_s,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<SweepRecord>,
    /// Human-readable descriptions of runtime check violations
    /// (populated only at `TraceLevel::PerSweepWithChecks`).
    pub check_failures: Vec<String>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("sweep,f,min_g_norm,descent_slack,grad_norm,beta_used,elapsed_s\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.sweep, r.f, r.min_g_norm, r.descent_slack, r.grad_norm, r.beta_used, r.elapsed_s
            ));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        let rows: Vec<ExportedRecord> = self.records.iter().map(|r| r.exported()).collect();
        serde_json::to_string(&rows).expect("trace serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(sweep: usize) -> SweepRecord {
        SweepRecord {
            sweep,
            f: -1.25,
            min_g_norm: 0.5,
            descent_slack: 1e-9,
            grad_norm: 0.125,
            beta_used: 0.8,
            elapsed_s: 0.25,
            w_min: 1.0,
            w_max: 1.5,
            degenerate_skips: 0,
            max_recursion_residual: 0.0,
        }
    }

    #[test]
    fn csv_has_fixed_header_and_one_row_per_sweep() {
        let trace = SolveTrace {
            records: vec![record(0), record(1)],
            check_failures: vec![],
        };
        let csv = trace.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sweep,f,min_g_norm,descent_slack,grad_norm,beta_used,elapsed_s"
        );
        assert_eq!(lines.count(), 2);
        assert!(csv.contains("0,-1.25,0.5,0.000000001,0.125,0.8,0.25"));
    }

    #[test]
    fn json_uses_exact_field_names() {
        let trace = SolveTrace {
            records: vec![record(3)],
            check_failures: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&trace.to_json_string()).unwrap();
        let row = &v.as_array().unwrap()[0];
        for key in [
            "sweep",
            "f",
            "min_g_norm",
            "descent_slack",
            "grad_norm",
            "beta_used",
            "elapsed_s",
        ] {
            assert!(row.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(row.as_object().unwrap().len(), 7);
        assert_eq!(row["sweep"], 3);
    }
}
