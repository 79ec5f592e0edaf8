use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::field::Field;
use super::norms::NormSet;
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    BlowupAbort,
    ToleranceAbort,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub u: Field,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub records: Vec<NormSet>,
    pub snapshots: Vec<Snapshot>,
    pub status: Status,
    /// Fixed-point residuals, one per Picard sweep, in order.
    pub residual_history: Vec<f64>,
    /// Largest box-edge to interior ratio of |u| over the recorded times.
    pub edge_ratio: f64,
    /// q exponents of `NormSet::lq`, fixed for the whole run.
    pub q_list: Vec<f64>,
    /// Norms of the data u₁ itself, the reference for growth ratios.
    pub data_norms: NormSet,
}

impl Trajectory {
    pub(crate) fn new(q_list: &[f64], data_norms: NormSet) -> Self {
        Self {
            times: Vec::new(),
            records: Vec::new(),
            snapshots: Vec::new(),
            status: Status::Completed,
            residual_history: Vec::new(),
            edge_ratio: 0.0,
            q_list: q_list.to_vec(),
            data_norms,
        }
    }

    pub(crate) fn push(&mut self, t: f64, record: NormSet, u: &Field) {
        debug_assert!(self.times.last().map_or(true, |&l| t > l));
        let e = u.edge_ratio();
        if e.is_finite() {
            self.edge_ratio = self.edge_ratio.max(e);
        }
        self.times.push(t);
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// (t, value) pairs of one tracked quantity.
    pub fn series(&self, f: impl Fn(&NormSet) -> f64) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.records)
            .map(|(&t, r)| (t, f(r)))
            .collect()
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("t,L1,L2");
        for q in &self.q_list {
            let _ = write!(h, ",L{q}");
        }
        h.push_str(",Linf,Hdot_sigma,ut_L2");
        h
    }

    /// One header line and one row per record, values in `{:e}` notation.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for (t, r) in self.times.iter().zip(&self.records) {
            let _ = write!(out, "{t:e},{:e},{:e}", r.l1, r.l2);
            for (_, v) in &r.lq {
                let _ = write!(out, ",{v:e}");
            }
            let _ = writeln!(out, ",{:e},{:e},{:e}", r.linf, r.hdot_sigma, r.ut_l2);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SolverError> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| SolverError::Io(format!("{}: {e}", path.display())))
    }
}
