//! Serialization: delimited text tables with a metadata comment block, plus a
//! structured JSON document. No timestamps or host information anywhere, so
//! identical runs produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::RunConfig;

/// Fixed-width scientific formatting; NaN spelled out for failed rows.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.12e}")
    }
}

/// Metadata block shared by every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub command: String,
    pub v0: f64,
    pub sector: String,
    pub interacting: bool,
    pub m_size: usize,
    pub omega_policy: String,
    pub bound_im_tol: f64,
    pub angular_tol: f64,
    pub resonance_phase: f64,
}

impl Metadata {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            v0: cfg.v0,
            sector: cfg.sector.as_str().to_string(),
            interacting: cfg.interacting,
            m_size: cfg.m_size,
            omega_policy: match cfg.omega {
                None => "auto".to_string(),
                Some(w) => format!("{},{}", fmt_f64(w.re), fmt_f64(w.im)),
            },
            bound_im_tol: 1e-6,
            angular_tol: 0.1,
            resonance_phase: qdot_core::model::RESONANCE_OMEGA_PHASE,
        }
    }

    fn comment_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# qdot {}", self.command);
        let _ = writeln!(s, "# v0 = {}", fmt_f64(self.v0));
        let _ = writeln!(s, "# sector = {}", self.sector);
        let _ = writeln!(s, "# interacting = {}", self.interacting);
        let _ = writeln!(s, "# m_size = {}", self.m_size);
        let _ = writeln!(s, "# omega = {}", self.omega_policy);
        let _ = writeln!(
            s,
            "# tolerances: bound_im_tol = {:e}, angular_tol = {}, resonance_phase = {}",
            self.bound_im_tol, self.angular_tol, self.resonance_phase
        );
        s
    }
}

/// A delimited table with named columns.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub comments: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new(), comments: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_tsv(&self, meta: &Metadata) -> String {
        let mut out = meta.comment_block();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join("\t"));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join("\t"));
        }
        out
    }
}

/// Structured JSON document: metadata plus typed rows.
pub fn to_json<T: Serialize>(meta: &Metadata, rows: &T) -> String {
    #[derive(Serialize)]
    struct Document<'a, T> {
        metadata: &'a Metadata,
        rows: &'a T,
    }
    let mut s =
        serde_json::to_string_pretty(&Document { metadata: meta, rows }).expect("serializable");
    s.push('\n');
    s
}
