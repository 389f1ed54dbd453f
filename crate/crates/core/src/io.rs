//! CSV readers and writers for observation series, trajectories and fit
//! results. Lines starting with `#` are comments and are skipped on input.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{EstimateResult, Method, ObservationSeries, SimMethod, Trajectory};

/// An observation series tagged with its identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSeries {
    pub id: String,
    pub series: ObservationSeries,
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow {
    series_id: String,
    time: f64,
    count: f64,
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Write series as `series_id,time,count` rows.
pub fn write_series<W: Write>(out: W, series: &[NamedSeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in series {
        for (&time, &count) in s.series.times().iter().zip(s.series.counts()) {
            w.serialize(SeriesRow {
                series_id: s.id.clone(),
                time,
                count,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read `series_id,time,count` rows, grouping by identifier in order of
/// first appearance. Rows of one series must be in increasing time order.
pub fn read_series<R: Read>(input: R) -> Result<Vec<NamedSeries>> {
    let mut groups: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for row in reader(input).deserialize() {
        let row: SeriesRow = row?;
        match groups.iter_mut().find(|g| g.0 == row.series_id) {
            Some(g) => {
                g.1.push(row.time);
                g.2.push(row.count);
            }
            None => groups.push((row.series_id, vec![row.time], vec![row.count])),
        }
    }
    if groups.is_empty() {
        return Err(Error::InvalidSeries(
            "input contains no observations".into(),
        ));
    }
    groups
        .into_iter()
        .map(|(id, times, counts)| {
            let series = ObservationSeries::new(times, counts)
                .map_err(|e| Error::InvalidSeries(format!("series '{id}': {e}")))?;
            Ok(NamedSeries { id, series })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryRow {
    time: f64,
    size: u64,
}

/// Write a trajectory as `time,size` rows after `# seed=`, `# method=` and
/// `# horizon=` comment lines.
pub fn write_trajectory<W: Write>(mut out: W, traj: &Trajectory, seed: u64) -> Result<()> {
    writeln!(out, "# seed={seed}")?;
    writeln!(out, "# method={}", traj.method)?;
    writeln!(out, "# horizon={}", traj.horizon)?;
    let mut w = csv::Writer::from_writer(out);
    for (&time, &size) in traj.event_times.iter().zip(&traj.sizes) {
        w.serialize(TrajectoryRow { time, size })?;
    }
    w.flush()?;
    Ok(())
}

/// Read a trajectory written by [`write_trajectory`]. Returns the path and
/// the seed from the header, if present.
pub fn read_trajectory<R: Read>(mut input: R) -> Result<(Trajectory, Option<u64>)> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let (mut seed, mut horizon, mut method) = (None, None, SimMethod::Exact);
    for line in text.lines().filter_map(|l| l.trim().strip_prefix('#')) {
        let Some((key, value)) = line.trim().split_once('=') else {
            continue;
        };
        let value = value.trim();
        let bad = |what: &str| Error::Parse(format!("bad {what} header '{value}'"));
        match key.trim() {
            "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "horizon" => horizon = Some(value.parse::<f64>().map_err(|_| bad("horizon"))?),
            "method" => {
                method = match value {
                    "exact" => SimMethod::Exact,
                    "tau-leap" => SimMethod::TauLeap,
                    _ => return Err(bad("method")),
                }
            }
            _ => {}
        }
    }
    let (mut event_times, mut sizes) = (Vec::new(), Vec::new());
    for row in reader(text.as_bytes()).deserialize() {
        let row: TrajectoryRow = row?;
        event_times.push(row.time);
        sizes.push(row.size);
    }
    let Some(&last) = event_times.last() else {
        return Err(Error::Parse("trajectory has no rows".into()));
    };
    if event_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parse("trajectory times decrease".into()));
    }
    let traj = Trajectory {
        event_times,
        sizes,
        method,
        horizon: horizon.unwrap_or(last),
    };
    Ok((traj, seed))
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultRow {
    method: String,
    alpha_hat: Option<f64>,
    sigma2_hat: Option<f64>,
    lambda_hat: Option<f64>,
    mu_hat: Option<f64>,
    converged: bool,
    iterations: usize,
    runtime_seconds: f64,
}

/// Write fit results as
/// `method,alpha_hat,sigma2_hat,lambda_hat,mu_hat,converged,iterations,runtime_seconds`.
/// Undefined fields are left empty.
pub fn write_results<W: Write>(out: W, results: &[EstimateResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(ResultRow {
            method: r.method.to_string(),
            alpha_hat: r.alpha_hat,
            sigma2_hat: r.sigma2_hat,
            lambda_hat: r.lambda_hat,
            mu_hat: r.mu_hat,
            converged: r.converged,
            iterations: r.iterations,
            runtime_seconds: r.runtime_seconds,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Read rows written by [`write_results`].
pub fn read_results<R: Read>(input: R) -> Result<Vec<EstimateResult>> {
    reader(input)
        .deserialize()
        .map(|row| {
            let row: ResultRow = row?;
            let method: Method = row.method.parse()?;
            let mut r = EstimateResult::failed(method, row.iterations);
            r.alpha_hat = row.alpha_hat;
            r.sigma2_hat = row.sigma2_hat;
            r.lambda_hat = row.lambda_hat;
            r.mu_hat = row.mu_hat;
            r.converged = row.converged;
            r.runtime_seconds = row.runtime_seconds;
            Ok(r)
        })
        .collect()
}
