//! Sampled sup-norm trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::grid::{GridState, Stats};
use super::step::Solver;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub const CSV_HEADER: &str = "t,max_u,min_u,max_abs_u,max_dev_ustar,boundary_max";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub max_u: f64,
    pub min_u: f64,
    pub max_abs_u: f64,
    pub max_dev_ustar: f64,
    pub boundary_max: f64,
}

impl Sample {
    pub fn from_stats(t: f64, s: Stats) -> Self {
        Sample {
            t,
            max_u: s.max_u,
            min_u: s.min_u,
            max_abs_u: s.max_abs_u,
            max_dev_ustar: s.max_dev_ustar,
            boundary_max: s.boundary_max,
        }
    }
}

/// Samples with strictly increasing times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn push(&mut self, s: Sample) {
        debug_assert!(self.samples.last().is_none_or(|l| l.t < s.t));
        self.samples.push(s);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Sample at time `t` (exact match up to 1e-12 relative).
    pub fn at(&self, t: f64) -> Option<&Sample> {
        self.samples
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.max_u, s.min_u, s.max_abs_u, s.max_dev_ustar, s.boundary_max
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Sample times `0, dt, 2dt, ...` up to and including `t_end`.
pub fn sample_times(t_end: f64, sample_dt: f64) -> Vec<f64> {
    let n = (t_end / sample_dt - 1e-9).ceil().max(0.0) as usize;
    let mut out: Vec<f64> = (0..=n).map(|k| (k as f64 * sample_dt).min(t_end)).collect();
    out.dedup();
    out
}

impl Solver {
    /// Run to `t_end`, calling `on_sample` with the state at every sample
    /// time.
    pub fn run(
        &mut self,
        t_end: f64,
        sample_dt: f64,
        mut on_sample: impl FnMut(&GridState),
    ) -> Result<TimeSeries> {
        if !(t_end > 0.0 && sample_dt > 0.0) {
            return Err(Error::BadParameter(format!(
                "t_end ({t_end}) and sample_dt ({sample_dt}) must be positive"
            )));
        }
        let mut state = self.initial_state()?;
        let mut series = TimeSeries::default();
        for t in sample_times(t_end, sample_dt) {
            state = self.advance_to(state, t)?;
            series.push(Sample::from_stats(t, state.stats()));
            on_sample(&state);
        }
        Ok(series)
    }
}

/// Simulate `scenario` on a grid with `resolution` nodes per axis.
pub fn simulate(
    scenario: &Scenario,
    resolution: &[usize],
    t_end: f64,
    sample_dt: f64,
) -> Result<TimeSeries> {
    Solver::new(scenario, resolution)?.run(t_end, sample_dt, |_| {})
}
