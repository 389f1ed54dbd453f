//! Sample paths of the linear birth-death process and observation schedules.
//!
//! Every randomized function takes either an explicit `seed` or a caller
//! supplied generator. Replicate `r` of a run seeded with `s` uses
//! [`replicate_rng`]`(s, r)`: the same ChaCha key with stream `r`, so
//! replicates are independent of how they are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::types::{ObservationSeries, RateParams, SimMethod, Trajectory};

/// Default tau-leaping step, in time units.
pub const DEFAULT_TAU_STEP: f64 = 0.01;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for replicate `index` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Which simulator to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Simulator {
    Gillespie,
    TauLeap { step: f64 },
}

impl Simulator {
    pub fn method(&self) -> SimMethod {
        match self {
            Simulator::Gillespie => SimMethod::Exact,
            Simulator::TauLeap { .. } => SimMethod::TauLeap,
        }
    }
}

fn check_start(x0: u64, t_max: f64) -> Result<()> {
    if x0 == 0 {
        return Err(Error::InvalidParams("x0 must be at least 1".into()));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    Ok(())
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "tau step must be positive, got {step}"
        )));
    }
    Ok(())
}

/// Event loop of the direct method. `on_event(time, new_size)` is called
/// after every birth or death up to `t_max`.
fn run_gillespie<R: Rng + ?Sized>(
    p: RateParams,
    x0: u64,
    t_max: f64,
    rng: &mut R,
    mut on_event: impl FnMut(f64, u64),
) {
    let total = p.lambda() + p.mu();
    if total == 0.0 {
        return;
    }
    let p_birth = p.lambda() / total;
    let (mut t, mut x) = (0.0f64, x0);
    while x > 0 {
        let wait: f64 = Exp1.sample(rng);
        t += wait / (total * x as f64);
        if t > t_max {
            break;
        }
        if rng.random::<f64>() < p_birth {
            x += 1;
        } else {
            x -= 1;
        }
        on_event(t, x);
    }
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean > 0.0 {
        // mean is finite and positive here, so construction cannot fail
        Poisson::new(mean)
            .map(|d| d.sample(rng) as u64)
            .unwrap_or(0)
    } else {
        0
    }
}

/// Fixed-step Poisson leaping. `integrated_rates(t0, t1)` returns the
/// per-capita birth and death hazards integrated over the step.
fn run_tau_leap<R: Rng + ?Sized>(
    integrated_rates: impl Fn(f64, f64) -> (f64, f64),
    x0: u64,
    t_max: f64,
    step: f64,
    rng: &mut R,
    mut on_step: impl FnMut(f64, u64),
) {
    let mut x = x0;
    let mut j: u64 = 0;
    loop {
        let t0 = j as f64 * step;
        if t0 >= t_max {
            break;
        }
        let t1 = ((j + 1) as f64 * step).min(t_max);
        if x > 0 {
            let (b, d) = integrated_rates(t0, t1);
            let xf = x as f64;
            let births = poisson_draw(b * xf, rng);
            let deaths = poisson_draw(d * xf, rng);
            x = (x + births).saturating_sub(deaths);
        }
        on_step(t1, x);
        j += 1;
    }
}

/// Exact event-by-event simulation on `[0, t_max]`. Stops early at extinction.
pub fn gillespie(p: RateParams, x0: u64, t_max: f64, seed: u64) -> Result<Trajectory> {
    gillespie_with_rng(p, x0, t_max, &mut seeded_rng(seed))
}

pub fn gillespie_with_rng<R: Rng + ?Sized>(
    p: RateParams,
    x0: u64,
    t_max: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    check_start(x0, t_max)?;
    let mut event_times = vec![0.0];
    let mut sizes = vec![x0];
    run_gillespie(p, x0, t_max, rng, |t, x| {
        event_times.push(t);
        sizes.push(x);
    });
    Ok(Trajectory {
        event_times,
        sizes,
        method: SimMethod::Exact,
        horizon: t_max,
    })
}

/// Tau-leaping with a fixed step; the last step is shortened to end at `t_max`.
pub fn tau_leap(p: RateParams, x0: u64, t_max: f64, step: f64, seed: u64) -> Result<Trajectory> {
    tau_leap_with_rng(p, x0, t_max, step, &mut seeded_rng(seed))
}

pub fn tau_leap_with_rng<R: Rng + ?Sized>(
    p: RateParams,
    x0: u64,
    t_max: f64,
    step: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    check_start(x0, t_max)?;
    check_step(step)?;
    let (lambda, mu) = (p.lambda(), p.mu());
    collect_tau_leap(
        move |t0, t1| (lambda * (t1 - t0), mu * (t1 - t0)),
        x0,
        t_max,
        step,
        rng,
    )
}

/// Tau-leaping for time-varying per-capita rates; each step integrates the
/// rates with the midpoint rule.
pub fn tau_leap_varying<R: Rng + ?Sized>(
    birth: impl Fn(f64) -> f64,
    death: impl Fn(f64) -> f64,
    x0: u64,
    t_max: f64,
    step: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    check_start(x0, t_max)?;
    check_step(step)?;
    collect_tau_leap(
        |t0, t1| {
            let mid = 0.5 * (t0 + t1);
            let dt = t1 - t0;
            (birth(mid).max(0.0) * dt, death(mid).max(0.0) * dt)
        },
        x0,
        t_max,
        step,
        rng,
    )
}

fn collect_tau_leap<R: Rng + ?Sized>(
    rates: impl Fn(f64, f64) -> (f64, f64),
    x0: u64,
    t_max: f64,
    step: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut event_times = vec![0.0];
    let mut sizes = vec![x0];
    run_tau_leap(rates, x0, t_max, step, rng, |t, x| {
        event_times.push(t);
        sizes.push(x);
    });
    Ok(Trajectory {
        event_times,
        sizes,
        method: SimMethod::TauLeap,
        horizon: t_max,
    })
}

/// Observation times `0 = T_1 < ... < T_n` whose gaps are iid Gamma(shape, rate).
pub fn sample_schedule(n_points: usize, shape: f64, rate: f64, seed: u64) -> Result<Vec<f64>> {
    sample_schedule_with_rng(n_points, shape, rate, &mut seeded_rng(seed))
}

/// See [`sample_schedule`]. A gap too small to advance the running time in
/// floating point is redrawn, so the schedule is always strictly increasing.
pub fn sample_schedule_with_rng<R: Rng + ?Sized>(
    n_points: usize,
    shape: f64,
    rate: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::InvalidParams(
            "a schedule needs at least two points".into(),
        ));
    }
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "gamma shape and rate must be positive (shape={shape}, rate={rate})"
        )));
    }
    let gamma = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::InvalidParams(format!("gamma distribution: {e}")))?;
    let mut times = Vec::with_capacity(n_points);
    times.push(0.0);
    let mut t = 0.0f64;
    while times.len() < n_points {
        let next = t + gamma.sample(rng);
        if next > t {
            t = next;
            times.push(t);
        }
    }
    Ok(times)
}

/// Read a trajectory at the given times: the size after the last recorded
/// time at or before each `T_k`.
pub fn observe(traj: &Trajectory, times: &[f64]) -> Result<ObservationSeries> {
    if let Some(&t) = times.iter().find(|&&t| t > traj.horizon) {
        return Err(Error::ScheduleBeyondTrajectory {
            requested: t,
            horizon: traj.horizon,
        });
    }
    let counts = times.iter().map(|&t| traj.size_at(t) as f64).collect();
    ObservationSeries::new(times.to_vec(), counts)
}

/// Simulate straight to the observation times without keeping the path.
///
/// Consumes the generator exactly like the full-path simulators run to the
/// last observation time, so `observe(gillespie(..), times)` and this
/// function agree for the same seed.
pub fn simulate_observed<R: Rng + ?Sized>(
    sim: Simulator,
    p: RateParams,
    x0: u64,
    times: &[f64],
    rng: &mut R,
) -> Result<Vec<u64>> {
    let t_max = *times
        .last()
        .ok_or_else(|| Error::InvalidParams("empty schedule".into()))?;
    if times.windows(2).any(|w| w[1] < w[0]) || times[0] < 0.0 {
        return Err(Error::InvalidParams(
            "schedule must be nondecreasing from 0".into(),
        ));
    }
    check_start(x0, t_max)?;
    let mut out = Vec::with_capacity(times.len());
    let mut current = x0;
    let mut record = |t: f64, x: u64| {
        while out.len() < times.len() && times[out.len()] < t {
            out.push(current);
        }
        current = x;
    };
    match sim {
        Simulator::Gillespie => run_gillespie(p, x0, t_max, rng, &mut record),
        Simulator::TauLeap { step } => {
            check_step(step)?;
            let (lambda, mu) = (p.lambda(), p.mu());
            run_tau_leap(
                move |t0, t1| (lambda * (t1 - t0), mu * (t1 - t0)),
                x0,
                t_max,
                step,
                rng,
                &mut record,
            )
        }
    }
    while out.len() < times.len() {
        out.push(current);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(l: f64, m: f64) -> RateParams {
        RateParams::new(l, m).unwrap()
    }

    #[test]
    fn pure_birth_increments() {
        let tr = gillespie(rates(0.5, 0.0), 1, 5.0, 3).unwrap();
        assert!(tr.sizes.windows(2).all(|w| w[1] == w[0] + 1));
        assert!(tr.event_times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn pure_death_runs_out() {
        let tr = gillespie(rates(0.0, 1.0), 5, 1e6, 11).unwrap();
        assert_eq!(tr.sizes, vec![5, 4, 3, 2, 1, 0]);
        assert!(tr.is_extinct());
    }

    #[test]
    fn exact_steps_are_unit() {
        let tr = gillespie(rates(0.6, 0.4), 20, 10.0, 5).unwrap();
        assert!(tr
            .sizes
            .windows(2)
            .all(|w| (w[1] as i64 - w[0] as i64).abs() == 1));
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = gillespie(rates(0.2, 0.1), 50, 5.0, 42).unwrap();
        let b = gillespie(rates(0.2, 0.1), 50, 5.0, 42).unwrap();
        assert_eq!(a, b);
        let c = tau_leap(rates(2.0, 1.0), 50, 2.0, 0.01, 42).unwrap();
        let d = tau_leap(rates(2.0, 1.0), 50, 2.0, 0.01, 42).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn tau_leap_frozen_and_absorbed() {
        let tr = tau_leap(rates(0.0, 0.0), 7, 1.0, 0.1, 1).unwrap();
        assert!(tr.sizes.iter().all(|&x| x == 7));
        assert_eq!(tr.event_times.len(), 11);
        assert!((tr.event_times.last().unwrap() - 1.0).abs() < 1e-12);

        let tr = tau_leap(rates(0.0, 50.0), 3, 5.0, 0.1, 1).unwrap();
        let first_zero = tr.sizes.iter().position(|&x| x == 0).unwrap();
        assert!(tr.sizes[first_zero..].iter().all(|&x| x == 0));
    }

    #[test]
    fn tau_leap_partial_last_step() {
        let tr = tau_leap(rates(0.1, 0.1), 7, 0.25, 0.1, 1).unwrap();
        let t = &tr.event_times;
        assert_eq!(t.len(), 4);
        assert!((t[3] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn schedule_shape() {
        let s = sample_schedule(2, 1.0, 1.0, 9).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], 0.0);
        assert!(s[1] > 0.0);
        let s = sample_schedule(50, 0.2, 1.0, 9).unwrap();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(sample_schedule(1, 1.0, 1.0, 9).is_err());
        assert!(sample_schedule(5, 0.0, 1.0, 9).is_err());
    }

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn schedule_gap_means() {
        for &(shape, seed) in &[(1.0, 17u64), (0.2, 18)] {
            let mut rng = seeded_rng(seed);
            let gaps: Vec<f64> = (0..100)
                .flat_map(|_| {
                    let s = sample_schedule_with_rng(1001, shape, 1.0, &mut rng).unwrap();
                    s.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()
                })
                .collect();
            assert_eq!(gaps.len(), 100_000);
            let (m, se) = mean_and_se(&gaps);
            assert!(
                (m - shape).abs() < 3.0 * se,
                "shape {shape}: mean {m} se {se}"
            );
        }
    }

    #[test]
    fn observe_conventions() {
        let tr = Trajectory {
            event_times: vec![0.0, 1.0, 2.0, 3.0],
            sizes: vec![10, 11, 12, 11],
            method: SimMethod::Exact,
            horizon: 5.0,
        };
        let s = observe(&tr, &[0.0, 0.5, 0.9]).unwrap();
        assert_eq!(s.counts(), &[10.0, 10.0, 10.0]);
        let s = observe(&tr, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.counts(), &[10.0, 11.0, 12.0]);
        assert!(matches!(
            observe(&tr, &[0.0, 6.0]),
            Err(Error::ScheduleBeyondTrajectory { .. })
        ));
    }

    #[test]
    fn dense_observation_reproduces_path() {
        let tr = gillespie(rates(0.3, 0.2), 5, 3.0, 21).unwrap();
        // observe just after each event and halfway between events
        let mut times = vec![0.0];
        for w in tr.event_times.windows(2) {
            times.push(0.5 * (w[0] + w[1]));
            times.push(w[1]);
        }
        let s = observe(&tr, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let idx = tr.event_times.iter().rposition(|&e| e <= t).unwrap();
            assert_eq!(s.counts()[k], tr.sizes[idx] as f64);
        }
    }

    #[test]
    fn streaming_matches_full_path() {
        let p = rates(0.4, 0.3);
        let times = sample_schedule(12, 1.0, 1.0, 4).unwrap();
        let t_max = *times.last().unwrap();
        for seed in 0..20 {
            let tr = gillespie(p, 30, t_max, seed).unwrap();
            let full = observe(&tr, &times).unwrap();
            let fast =
                simulate_observed(Simulator::Gillespie, p, 30, &times, &mut seeded_rng(seed))
                    .unwrap();
            let fast: Vec<f64> = fast.iter().map(|&x| x as f64).collect();
            assert_eq!(full.counts(), &fast[..]);

            let tr = tau_leap(p, 30, t_max, 0.05, seed).unwrap();
            let full = observe(&tr, &times).unwrap();
            let fast = simulate_observed(
                Simulator::TauLeap { step: 0.05 },
                p,
                30,
                &times,
                &mut seeded_rng(seed),
            )
            .unwrap();
            let fast: Vec<f64> = fast.iter().map(|&x| x as f64).collect();
            assert_eq!(full.counts(), &fast[..]);
        }
    }

    #[test]
    fn replicate_streams_differ() {
        let a: u64 = replicate_rng(1, 0).random();
        let b: u64 = replicate_rng(1, 1).random();
        let c: u64 = replicate_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn tau_leap_mean_growth() {
        // fixed-step leaping has mean x0 (1 + alpha h)^(t/h), not x0 e^(alpha t)
        let p = rates(2.0, 1.0);
        let mut rng = seeded_rng(77);
        let finals: Vec<f64> = (0..5000)
            .map(|_| {
                tau_leap_with_rng(p, 100, 2.0, 0.01, &mut rng)
                    .unwrap()
                    .final_size() as f64
            })
            .collect();
        let (m, se) = mean_and_se(&finals);
        let expect = 100.0 * 1.01f64.powi(200);
        assert!(
            (m - expect).abs() < 3.0 * se,
            "mean {m} vs {expect} (se {se})"
        );
    }
}
