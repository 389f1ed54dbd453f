//! Growth rates of mutant clones from longitudinal variant allele
//! frequencies.
//!
//! A heterozygous clone of `X` cells among `W` wild-type cells shows a VAF of
//! `X / (2 (X + W))`. VAFs are turned back into pseudo-counts, each
//! `(subject, mutation)` group is fitted on its own, and per-subject rates are
//! summarized per mutation with empirical 2.5% and 97.5% quantiles.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit, SolverConfig};
use crate::simulate::{replicate_rng, sample_schedule_with_rng};
use crate::types::{EstimateResult, Method, ObservationSeries};

/// Default wild-type population size.
pub const WILDTYPE_POP: f64 = 200_000.0;

/// How a VAF is turned into a pseudo-count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformMode {
    /// `X = vaf / (1 - vaf) * 2W`.
    #[default]
    Odds,
    /// `X = 2 vaf W / (1 - 2 vaf)`, the inverse of `vaf = X / (2 (X + W))`.
    Inverse,
}

/// Pseudo-count for one VAF measurement.
pub fn vaf_to_count(vaf: f64, wildtype_pop: f64, mode: TransformMode) -> Result<f64> {
    if !(wildtype_pop > 0.0 && wildtype_pop.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "wild-type population must be positive, got {wildtype_pop}"
        )));
    }
    let limit = match mode {
        TransformMode::Odds => 1.0,
        TransformMode::Inverse => 0.5,
    };
    if !(0.0..limit).contains(&vaf) {
        return Err(Error::OutOfRange(vaf));
    }
    Ok(match mode {
        TransformMode::Odds => vaf / (1.0 - vaf) * 2.0 * wildtype_pop,
        TransformMode::Inverse => 2.0 * vaf * wildtype_pop / (1.0 - 2.0 * vaf),
    })
}

/// The VAF that [`vaf_to_count`] maps to `count`.
pub fn count_to_vaf(count: f64, wildtype_pop: f64, mode: TransformMode) -> f64 {
    match mode {
        TransformMode::Odds => count / (count + 2.0 * wildtype_pop),
        TransformMode::Inverse => count / (2.0 * (count + wildtype_pop)),
    }
}

/// One VAF measurement; `time` is in years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VafRecord {
    pub subject_id: String,
    pub mutation: String,
    pub time: f64,
    pub vaf: f64,
}

/// Fit of one `(subject, mutation)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFit {
    pub subject_id: String,
    pub mutation: String,
    pub result: Result<EstimateResult>,
}

impl SubjectFit {
    /// Growth rate in percent per year, for a converged fit.
    pub fn alpha_pct(&self) -> Option<f64> {
        let r = self.result.as_ref().ok().filter(|r| r.converged)?;
        r.alpha_hat.filter(|a| a.is_finite()).map(|a| 100.0 * a)
    }
}

/// A group left out of the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedGroup {
    pub subject_id: String,
    pub mutation: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CohortFit {
    pub fits: Vec<SubjectFit>,
    pub skipped: Vec<SkippedGroup>,
}

/// Settings of the cohort pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortOptions {
    pub method: Method,
    pub mode: TransformMode,
    pub wildtype_pop: f64,
}

impl Default for CohortOptions {
    fn default() -> Self {
        Self {
            method: Method::ApproxMle,
            mode: TransformMode::Odds,
            wildtype_pop: WILDTYPE_POP,
        }
    }
}

fn group(records: &[VafRecord]) -> Vec<((&str, &str), Vec<&VafRecord>)> {
    let mut groups: Vec<((&str, &str), Vec<&VafRecord>)> = Vec::new();
    for r in records {
        let key = (r.subject_id.as_str(), r.mutation.as_str());
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
}

/// Fit every `(subject, mutation)` group, in order of first appearance.
/// Groups with fewer than two time points or an untransformable VAF are
/// skipped; estimator failures are kept in [`SubjectFit::result`].
pub fn fit_cohort(records: &[VafRecord], opts: &CohortOptions) -> CohortFit {
    let cfg = SolverConfig::default();
    let mut out = CohortFit::default();
    for ((subject, mutation), mut rows) in group(records) {
        let skip = |reason: String| SkippedGroup {
            subject_id: subject.to_string(),
            mutation: mutation.to_string(),
            reason,
        };
        if rows.len() < 2 {
            out.skipped.push(skip(format!(
                "{} time point(s); at least 2 needed",
                rows.len()
            )));
            continue;
        }
        rows.sort_by(|a, b| a.time.total_cmp(&b.time));
        let counts: Result<Vec<f64>> = rows
            .iter()
            .map(|r| vaf_to_count(r.vaf, opts.wildtype_pop, opts.mode))
            .collect();
        let series = counts.and_then(|c| {
            ObservationSeries::from_pseudo_counts(rows.iter().map(|r| r.time).collect(), c)
        });
        match series {
            Ok(s) => out.fits.push(SubjectFit {
                subject_id: subject.to_string(),
                mutation: mutation.to_string(),
                result: fit(opts.method, &[s], &cfg),
            }),
            Err(e) => out.skipped.push(skip(e.to_string())),
        }
    }
    out
}

/// Per-mutation aggregate of subject growth rates, in percent per year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationSummary {
    pub mutation: String,
    pub method: String,
    pub mean_alpha_pct: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_subjects: usize,
}

/// Quantile of sorted data with linear interpolation between order
/// statistics at position `p (n - 1)`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and 2.5%/97.5% quantiles of converged subject rates per mutation,
/// in order of first appearance. A mutation without any converged fit is an
/// error.
pub fn summarize(fit: &CohortFit, method: Method) -> Result<Vec<MutationSummary>> {
    let mut mutations: Vec<&str> = Vec::new();
    for f in &fit.fits {
        if !mutations.contains(&f.mutation.as_str()) {
            mutations.push(&f.mutation);
        }
    }
    mutations
        .into_iter()
        .map(|m| {
            let mut rates: Vec<f64> = fit
                .fits
                .iter()
                .filter(|f| f.mutation == m)
                .filter_map(SubjectFit::alpha_pct)
                .collect();
            if rates.is_empty() {
                return Err(Error::EmptyGroup(m.to_string()));
            }
            rates.sort_by(f64::total_cmp);
            Ok(MutationSummary {
                mutation: m.to_string(),
                method: method.to_string(),
                mean_alpha_pct: rates.iter().sum::<f64>() / rates.len() as f64,
                ci_low: quantile(&rates, 0.025),
                ci_high: quantile(&rates, 0.975),
                n_subjects: rates.len(),
            })
        })
        .collect()
}

/// Read records with header `subject_id,mutation,time,vaf`.
pub fn read_records<R: Read>(input: R) -> Result<Vec<VafRecord>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn write_records<W: Write>(out: W, records: &[VafRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Write summaries as `mutation,method,mean_alpha_pct,ci_low,ci_high,n_subjects`.
pub fn write_summaries<W: Write>(out: W, rows: &[MutationSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summaries<R: Read>(input: R) -> Result<Vec<MutationSummary>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Recipe for a synthetic cohort carrying one mutation.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub mutation: String,
    /// Growth rate per year.
    pub alpha: f64,
    pub sigma2: f64,
    pub n_subjects: usize,
    /// Clone size at the first visit.
    pub x0: f64,
    pub n_timepoints: usize,
    /// Gamma shape and rate of the gaps between visits, in years.
    pub gap_shape: f64,
    pub gap_rate: f64,
}

/// VAF records for a synthetic cohort. Clone sizes follow the Gaussian
/// transition law with the given `(alpha, sigma2)` (clamped at zero) and are
/// mapped to VAFs with the forward map matching `mode`. Subject `k` uses
/// [`replicate_rng`]`(seed, k)`.
pub fn synthetic_cohort(
    spec: &SyntheticCohort,
    wildtype_pop: f64,
    mode: TransformMode,
    seed: u64,
) -> Result<Vec<VafRecord>> {
    if !(spec.x0 > 0.0 && spec.sigma2 > 0.0 && spec.alpha.is_finite()) {
        return Err(Error::InvalidParams(
            "synthetic cohort needs x0 > 0, sigma2 > 0 and a finite alpha".into(),
        ));
    }
    let mut out = Vec::with_capacity(spec.n_subjects * spec.n_timepoints);
    for k in 0..spec.n_subjects {
        let mut rng = replicate_rng(seed, k as u64);
        let times =
            sample_schedule_with_rng(spec.n_timepoints, spec.gap_shape, spec.gap_rate, &mut rng)?;
        let mut x = spec.x0;
        for (i, &t) in times.iter().enumerate() {
            if i > 0 {
                x = gaussian_step(x, spec.alpha, spec.sigma2, t - times[i - 1], &mut rng);
            }
            out.push(VafRecord {
                subject_id: format!("S{k:04}"),
                mutation: spec.mutation.clone(),
                time: t,
                vaf: count_to_vaf(x, wildtype_pop, mode),
            });
        }
    }
    Ok(out)
}

fn gaussian_step<R: Rng + ?Sized>(x: f64, alpha: f64, sigma2: f64, dt: f64, rng: &mut R) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let e = (alpha * dt).exp();
    let var = sigma2 * x * e * (alpha * dt).exp_m1();
    let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
    (x * e + var.max(0.0).sqrt() * z).max(0.0)
}
