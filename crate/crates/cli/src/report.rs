//! Run report shared by the text and JSON outputs.

use std::fmt::{self, Write as _};
use std::time::Duration;

use gaf_core::RunState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRow {
    pub generation: u32,
    pub fitness: f64,
    pub sigma: f64,
    pub best_query: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub location: String,
    pub title: String,
    pub w: f64,
    pub p_bar: f64,
    pub r: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub stop_reason: String,
    pub error: Option<String>,
    /// Wall-clock time of the command's evolution work; absent when nothing ran.
    pub duration_secs: Option<f64>,
    pub generations: Vec<GenerationRow>,
    pub top_resources: Vec<ResourceRow>,
}

impl RunReport {
    pub fn from_state(state: &RunState, top: usize, duration: Option<Duration>) -> Self {
        let generations = state
            .history
            .iter()
            .map(|h| GenerationRow {
                generation: h.generation_number,
                fitness: h.fitness,
                sigma: h.sigma_fitness,
                best_query: h.best_query_text.clone(),
            })
            .collect();
        let top_resources = state
            .top_resources(top)
            .iter()
            .map(|r| ResourceRow {
                location: r.location.clone(),
                title: r.title.clone(),
                w: r.fitness.w,
                p_bar: r.fitness.p_bar,
                r: r.fitness.r,
                s: r.fitness.s,
            })
            .collect();
        let error = match &state.stop_reason {
            gaf_core::StopReason::Error(msg) => Some(msg.clone()),
            _ => None,
        };
        Self {
            seed: state.config.rng_seed,
            stop_reason: state.stop_reason.name().to_owned(),
            error,
            duration_secs: duration.map(|d| d.as_secs_f64()),
            generations,
            top_resources,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

/// Fixed-precision rendering used by the text report.
pub fn num(x: f64) -> String {
    format!("{x:.6}")
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "seed: {}", self.seed)?;
        writeln!(out, "stop reason: {}", self.stop_reason)?;
        if let Some(err) = &self.error {
            writeln!(out, "error: {err}")?;
        }
        match self.duration_secs {
            Some(d) => writeln!(out, "duration: {d:.3} s")?,
            None => writeln!(out, "duration: -")?,
        }
        writeln!(out)?;
        writeln!(
            out,
            "{:>10}  {:>10}  {:>10}  best query",
            "generation", "fitness", "sigma"
        )?;
        for g in &self.generations {
            writeln!(
                out,
                "{:>10}  {:>10}  {:>10}  {}",
                g.generation,
                num(g.fitness),
                num(g.sigma),
                g.best_query
            )?;
        }
        writeln!(out)?;
        writeln!(out, "top {} resources:", self.top_resources.len())?;
        writeln!(
            out,
            "{:>4}  {:>8}  {:>9}  {:>3}  {:>8}  location  title",
            "#", "w", "p_bar", "r", "s"
        )?;
        for (i, r) in self.top_resources.iter().enumerate() {
            writeln!(
                out,
                "{:>4}  {:>8}  {:>9}  {:>3}  {:>8}  {}  {}",
                i + 1,
                num(r.w),
                num(r.p_bar),
                r.r,
                num(r.s),
                r.location,
                r.title
            )?;
        }
        f.write_str(&out)
    }
}
