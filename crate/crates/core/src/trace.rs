//! Run traces: one record per iterate, with named metric values.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

/// Stable metric column names.
pub mod metric {
    pub const DIST_TO_SOLUTION: &str = "dist_to_solution";
    pub const RELATIVE_ERROR: &str = "relative_error";
    pub const GAP: &str = "gap";
    pub const CONSENSUS_RESIDUAL: &str = "consensus_residual";
    pub const LEMMA_RESIDUAL: &str = "lemma_residual";

    /// Emission order for CSV columns.
    pub const CANONICAL_ORDER: [&str; 5] = [
        DIST_TO_SOLUTION,
        RELATIVE_ERROR,
        GAP,
        CONSENSUS_RESIDUAL,
        LEMMA_RESIDUAL,
    ];
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord {
    /// Global update index; 0 is the initial state.
    pub iter: usize,
    pub outer: usize,
    pub inner: usize,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub wall_time_s: f64,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverTrace {
    pub method: String,
    /// Full serialized configuration of the run that produced this trace.
    pub config_echo: String,
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn new(method: impl Into<String>, config_echo: String) -> Self {
        SolverTrace {
            method: method.into(),
            config_echo,
            records: Vec::new(),
        }
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always has an initial record")
    }

    /// (iter, value) pairs for one metric, skipping records that lack it.
    pub fn metric_series(&self, name: &str) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.metrics.get(name).map(|&v| (r.iter, v)))
            .collect()
    }

    /// Metric names present anywhere in the trace, in canonical order.
    pub fn metric_names(&self) -> Vec<String> {
        metric::CANONICAL_ORDER
            .iter()
            .filter(|name| self.records.iter().any(|r| r.metrics.contains_key(**name)))
            .map(|s| s.to_string())
            .collect()
    }

    /// First iter whose metric value is <= threshold.
    pub fn iters_to_threshold(&self, name: &str, threshold: f64) -> Option<usize> {
        self.records.iter().find_map(|r| {
            r.metrics
                .get(name)
                .and_then(|&v| (v <= threshold).then_some(r.iter))
        })
    }
}

/// External stopping rules imposed by the harness on top of a solver's own
/// iteration plan.
#[derive(Clone, Debug, Default)]
pub struct RunControl {
    /// Maximum number of updates (trace rows beyond the initial one).
    pub max_updates: Option<usize>,
    pub max_wall_time_s: Option<f64>,
    /// Stop once this metric is <= the threshold.
    pub stop_metric: Option<(String, f64)>,
}

impl RunControl {
    pub fn unbounded() -> Self {
        RunControl::default()
    }

    pub fn update_budget_exhausted(&self, updates_done: usize) -> bool {
        self.max_updates.is_some_and(|cap| updates_done >= cap)
    }

    /// Checked after each recorded update.
    pub fn should_stop(&self, record: &TraceRecord) -> bool {
        if self
            .max_wall_time_s
            .is_some_and(|cap| record.wall_time_s >= cap)
        {
            return true;
        }
        if let Some((name, threshold)) = &self.stop_metric {
            if record.metrics.get(name).is_some_and(|v| v <= threshold) {
                return true;
            }
        }
        false
    }
}

/// Wall clock for run instrumentation.
pub struct RunClock {
    start: Instant,
}

impl RunClock {
    pub fn start() -> Self {
        RunClock {
            start: Instant::now(),
        }
    }

    pub fn elapsed_s(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}
