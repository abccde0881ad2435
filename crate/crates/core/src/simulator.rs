//! Exact continuous-time simulation of the jump process.
//!
//! Jump rates do not depend on the state, so the process is a Poisson
//! stream of events with total rate `λNM + N`; each event is a Kac rotation
//! with probability `λNM/(λNM + N)` and an exchange otherwise. Sampling is
//! right-continuous: the value recorded at time `s` is the state after the
//! last event at or before `s`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    fourth_moment_unchecked, kac_eigenfunction_of, sum_squares, tau_from_passive, Event,
    EventKind, ModelParams, SystemState,
};
use crate::sampler::{sample_initial, InitSpec};

/// Events between two sphere-invariant checks.
pub const RENORMALIZE_EVERY: u64 = 10_000;
/// Relative drift of `|V|² + |W|²` that triggers a projection.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-9;

pub type ReplicaRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_end: f64,
    pub sample_times: Vec<f64>,
}

impl Schedule {
    pub fn new(t_end: f64, sample_times: Vec<f64>) -> Result<Self> {
        let schedule = Self {
            t_end,
            sample_times,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Samples at `0, dt, 2dt, …` up to and including `t_end` (within rounding).
    pub fn uniform(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "sample spacing must be positive (got {dt})"
            )));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "t_end must be positive (got {t_end})"
            )));
        }
        let steps = (t_end / dt + 1e-9).floor() as usize;
        let times = (0..=steps).map(|i| (i as f64 * dt).min(t_end)).collect();
        Self::new(t_end, times)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "t_end must be positive (got {})",
                self.t_end
            )));
        }
        if self.sample_times.is_empty() {
            return Err(Error::InvalidSchedule("no sample times".into()));
        }
        if self.sample_times[0] < 0.0 {
            return Err(Error::InvalidSchedule("negative sample time".into()));
        }
        if self.sample_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSchedule(
                "sample times must be strictly increasing".into(),
            ));
        }
        if *self.sample_times.last().unwrap() > self.t_end {
            return Err(Error::InvalidSchedule(
                "last sample time exceeds t_end".into(),
            ));
        }
        Ok(())
    }

    /// Index of the sample time equal to `t` (within `1e-12` relative).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.sample_times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * s.abs().max(1.0))
    }
}

/// Which parts of the generator are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dynamics {
    pub exchange: bool,
    pub kac: bool,
    pub renormalize: bool,
}

impl Default for Dynamics {
    fn default() -> Self {
        Self {
            exchange: true,
            kac: true,
            renormalize: true,
        }
    }
}

impl Dynamics {
    pub fn pure_kac() -> Self {
        Self {
            exchange: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.exchange && !self.kac {
            return Err(Error::InvalidParams(
                "exchange and Kac dynamics cannot both be disabled".into(),
            ));
        }
        Ok(())
    }

    fn rates(&self, params: &ModelParams) -> (f64, f64) {
        let kac = if self.kac { params.kac_rate() } else { 0.0 };
        let exchange = if self.exchange {
            params.exchange_rate()
        } else {
            0.0
        };
        (kac, exchange)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub dynamics: Dynamics,
    pub record_snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub tau: f64,
    pub m4_active: f64,
    pub m4_passive: f64,
    pub phi: f64,
    pub v_snapshot: Option<Vec<f64>>,
}

impl TrajectorySample {
    pub fn of_state(t: f64, state: &SystemState, snapshot: bool) -> Self {
        Self {
            t,
            tau: tau_from_passive(state.passive_energy(), state.n_passive(), state.n_active()),
            m4_active: fourth_moment_unchecked(&state.w),
            m4_passive: fourth_moment_unchecked(&state.v),
            phi: kac_eigenfunction_of(&state.w),
            v_snapshot: snapshot.then(|| state.v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub params: ModelParams,
    pub schedule: Schedule,
    pub replicas: usize,
    /// `samples[r][i]` is replica `r` at `schedule.sample_times[i]`.
    pub samples: Vec<Vec<TrajectorySample>>,
}

/// Draws the next event: exponential waiting time at the total rate, then
/// the jump kind and its indices.
pub fn next_event<R: Rng + ?Sized>(
    params: &ModelParams,
    dynamics: &Dynamics,
    rng: &mut R,
) -> Event {
    let (kac_rate, exchange_rate) = dynamics.rates(params);
    let total = kac_rate + exchange_rate;
    let dt = rng.sample::<f64, _>(Exp1) / total;
    let m = params.n_active;
    if rng.random::<f64>() * total < kac_rate {
        let a = rng.random_range(0..m);
        let mut b = rng.random_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        let (j, k) = if a < b { (a, b) } else { (b, a) };
        Event {
            dt,
            kind: EventKind::KacRotation,
            j,
            k,
            theta: rng.random::<f64>() * TAU,
        }
    } else {
        Event {
            dt,
            kind: EventKind::Exchange,
            j: rng.random_range(0..params.n_passive),
            k: rng.random_range(0..m),
            theta: 0.0,
        }
    }
}

/// Projects the state radially back onto `|V|² + |W|² = N + M`.
pub fn renormalize(state: &SystemState) -> Result<SystemState> {
    let mut out = state.clone();
    renormalize_in_place(&mut out)?;
    Ok(out)
}

pub(crate) fn renormalize_in_place(state: &mut SystemState) -> Result<()> {
    let energy = state.passive_energy() + state.active_energy();
    if !(energy > 0.0) {
        return Err(Error::ZeroState);
    }
    let target = (state.n_passive() + state.n_active()) as f64;
    let scale = (target / energy).sqrt();
    state.v.iter_mut().for_each(|x| *x *= scale);
    state.w.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

/// A single trajectory: owns its state, clock and event counter.
#[derive(Debug, Clone)]
pub struct Walker {
    params: ModelParams,
    dynamics: Dynamics,
    state: SystemState,
    time: f64,
    events: u64,
    pending: Option<Event>,
    renormalizations: u64,
}

impl Walker {
    pub fn new(params: ModelParams, dynamics: Dynamics, state: SystemState) -> Result<Self> {
        params.validate()?;
        dynamics.validate()?;
        if state.n_passive() != params.n_passive || state.n_active() != params.n_active {
            return Err(Error::InvalidParams(format!(
                "state has {} passive / {} active coordinates, parameters say {} / {}",
                state.n_passive(),
                state.n_active(),
                params.n_passive,
                params.n_active
            )));
        }
        Ok(Self {
            params,
            dynamics,
            state,
            time: 0.0,
            events: 0,
            pending: None,
            renormalizations: 0,
        })
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn into_state(self) -> SystemState {
        self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Number of jumps applied so far.
    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn renormalizations(&self) -> u64 {
        self.renormalizations
    }

    #[inline]
    fn apply(&mut self, event: &Event) {
        match event.kind {
            EventKind::KacRotation => self.state.rotate_pair_unchecked(event.j, event.k, event.theta),
            EventKind::Exchange => self.state.swap_species_unchecked(event.j, event.k),
        }
        self.events += 1;
        if self.dynamics.renormalize && self.events.is_multiple_of(RENORMALIZE_EVERY) {
            self.check_sphere();
        }
    }

    fn check_sphere(&mut self) {
        let energy = sum_squares(&self.state.v) + sum_squares(&self.state.w);
        let target = self.params.total_energy();
        if ((energy - target) / target).abs() > RENORMALIZE_THRESHOLD {
            // energy > 0 here: rotations and swaps cannot reach the origin
            let scale = (target / energy).sqrt();
            self.state.v.iter_mut().for_each(|x| *x *= scale);
            self.state.w.iter_mut().for_each(|x| *x *= scale);
            self.renormalizations += 1;
        }
    }

    /// Applies every event with time `<= t` and leaves the clock at `t`.
    pub fn run_until<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) {
        loop {
            let event = match self.pending.take() {
                Some(e) => e,
                None => next_event(&self.params, &self.dynamics, rng),
            };
            let at = self.time + event.dt;
            if at > t {
                // keep the residual waiting time for the next call
                self.pending = Some(Event {
                    dt: at - t,
                    ..event
                });
                self.time = t;
                break;
            }
            self.time = at;
            self.apply(&event);
        }
        if self.dynamics.renormalize {
            self.check_sphere();
        }
    }

    /// Applies exactly `count` events regardless of time.
    pub fn step_events<R: Rng + ?Sized>(&mut self, count: u64, rng: &mut R) {
        for _ in 0..count {
            let event = match self.pending.take() {
                Some(e) => e,
                None => next_event(&self.params, &self.dynamics, rng),
            };
            self.time += event.dt;
            self.apply(&event);
        }
    }
}

/// Runs one trajectory from `state` over `schedule`, recording the sample
/// functionals at every scheduled time. The state is left at `t_end`.
pub fn advance<R: Rng + ?Sized>(
    params: &ModelParams,
    state: &mut SystemState,
    schedule: &Schedule,
    options: &RunOptions,
    rng: &mut R,
) -> Result<Vec<TrajectorySample>> {
    schedule.validate()?;
    let mut walker = Walker::new(*params, options.dynamics, std::mem::take(state))?;
    let mut samples = Vec::with_capacity(schedule.sample_times.len());
    for &t in &schedule.sample_times {
        walker.run_until(t, rng);
        samples.push(TrajectorySample::of_state(
            t,
            walker.state(),
            options.record_snapshots,
        ));
    }
    walker.run_until(schedule.t_end, rng);
    *state = walker.into_state();
    Ok(samples)
}

/// Seed of replica `index`: SplitMix64 finalizer applied to
/// `seed ⊕ splitmix64(index + 1)`.
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for replica `index`.
pub fn replica_rng(seed: u64, index: u64) -> ReplicaRng {
    ReplicaRng::seed_from_u64(replica_seed(seed, index))
}

/// Runs `replicas` independent trajectories with initial data from `spec`.
///
/// Replica `i` draws its initial state and then its dynamics from
/// [`replica_rng`]`(params.seed, i)`; results are merged in replica order, so
/// the output is a deterministic function of the arguments.
pub fn run_ensemble(
    params: &ModelParams,
    spec: &InitSpec,
    schedule: &Schedule,
    replicas: usize,
    options: &RunOptions,
) -> Result<EnsembleResult> {
    spec.validate()?;
    run_ensemble_with(params, schedule, replicas, options, |rng| {
        sample_initial(params, spec, rng)
    })
}

/// As [`run_ensemble`], with initial states produced by `init` from each
/// replica's own generator.
pub fn run_ensemble_with<F>(
    params: &ModelParams,
    schedule: &Schedule,
    replicas: usize,
    options: &RunOptions,
    init: F,
) -> Result<EnsembleResult>
where
    F: Fn(&mut ReplicaRng) -> Result<SystemState> + Sync,
{
    params.validate()?;
    schedule.validate()?;
    options.dynamics.validate()?;
    if replicas == 0 {
        return Err(Error::InvalidParams("replicas must be at least 1".into()));
    }
    let samples = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(params.seed, i as u64);
            let mut state = init(&mut rng)?;
            advance(params, &mut state, schedule, options, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleResult {
        params: *params,
        schedule: schedule.clone(),
        replicas,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{tau, total_energy};
    use crate::observables::Estimate;
    use crate::sampler::sample_uniform_sphere;

    fn params(n: usize, m: usize, lambda: f64, seed: u64) -> ModelParams {
        ModelParams::new(n, m, lambda, seed).unwrap()
    }

    fn sphere_state(p: &ModelParams, rng: &mut ReplicaRng) -> SystemState {
        sample_initial(p, &InitSpec::uniform(), rng).unwrap()
    }

    #[test]
    fn waiting_times_and_kind_fractions() {
        let p = params(100, 10, 1.0, 1);
        let mut rng = replica_rng(7, 0);
        let draws = 100_000;
        let mut dts = Vec::with_capacity(draws);
        let mut kac = Vec::with_capacity(draws);
        for _ in 0..draws {
            let e = next_event(&p, &Dynamics::default(), &mut rng);
            dts.push(e.dt);
            match e.kind {
                EventKind::KacRotation => {
                    assert!(e.j < e.k && e.k < 10);
                    assert!((0.0..TAU).contains(&e.theta));
                    kac.push(1.0);
                }
                EventKind::Exchange => {
                    assert!(e.j < 100 && e.k < 10);
                    kac.push(0.0);
                }
            }
        }
        let dt = Estimate::from_samples(&dts).unwrap();
        assert!(dt.within(1.0 / 1100.0, 3.0), "{dt:?}");
        let frac = Estimate::from_samples(&kac).unwrap();
        assert!(frac.within(10.0 / 11.0, 3.0), "{frac:?}");
    }

    #[test]
    fn kac_pairs_are_uniform() {
        let p = params(20, 4, 1.0, 1);
        let mut rng = replica_rng(3, 0);
        let mut counts = [[0u32; 4]; 4];
        let mut total = 0;
        while total < 60_000 {
            let e = next_event(&p, &Dynamics::pure_kac(), &mut rng);
            assert_eq!(e.kind, EventKind::KacRotation);
            counts[e.j][e.k] += 1;
            total += 1;
        }
        // six pairs, each with probability 1/6
        let expect = total as f64 / 6.0;
        let sd = (total as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for j in 0..4 {
            for k in j + 1..4 {
                assert!((counts[j][k] as f64 - expect).abs() < 4.0 * sd);
            }
        }
    }

    #[test]
    fn small_lambda_gives_exchanges() {
        let p = params(100, 10, 1e-12, 1);
        let mut rng = replica_rng(5, 0);
        let kac = (0..10_000)
            .filter(|_| next_event(&p, &Dynamics::default(), &mut rng).kind == EventKind::KacRotation)
            .count();
        assert_eq!(kac, 0);
    }

    #[test]
    fn energy_conserved_at_end() {
        let p = params(200, 20, 5.0, 11);
        let mut rng = replica_rng(p.seed, 0);
        let mut state = sphere_state(&p, &mut rng);
        let schedule = Schedule::uniform(2.0, 0.5).unwrap();
        advance(&p, &mut state, &schedule, &RunOptions::default(), &mut rng).unwrap();
        assert!((total_energy(&state) / 220.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_time_sample_echoes_initial_functionals() {
        let p = params(50, 5, 1.0, 2);
        let mut rng = replica_rng(p.seed, 0);
        let state = sphere_state(&p, &mut rng);
        let initial = state.clone();
        let mut s = state;
        let schedule = Schedule::new(1.0, vec![0.0]).unwrap();
        let options = RunOptions {
            record_snapshots: true,
            ..RunOptions::default()
        };
        let out = advance(&p, &mut s, &schedule, &options, &mut rng).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], TrajectorySample::of_state(0.0, &initial, true));
        assert_eq!(out[0].tau, tau(&initial));
        assert_eq!(out[0].v_snapshot.as_deref(), Some(&initial.v[..]));
    }

    #[test]
    fn pure_kac_conserves_active_energy() {
        let p = params(30, 8, 1.0, 4);
        let mut rng = replica_rng(p.seed, 0);
        let state = sphere_state(&p, &mut rng);
        let w0 = state.active_energy();
        let v0 = state.v.clone();
        let mut walker = Walker::new(p, Dynamics::pure_kac(), state).unwrap();
        for _ in 0..100 {
            walker.step_events(10_000, &mut rng);
            assert!((walker.state().active_energy() / w0 - 1.0).abs() < 1e-10);
        }
        assert_eq!(walker.events(), 1_000_000);
        assert_eq!(walker.state().v, v0);
    }

    #[test]
    fn disabling_kac_only_swaps() {
        let p = params(30, 8, 1.0, 4);
        let mut rng = replica_rng(p.seed, 0);
        let state = sphere_state(&p, &mut rng);
        let mut all: Vec<f64> = state.v.iter().chain(&state.w).copied().collect();
        let dynamics = Dynamics {
            kac: false,
            ..Dynamics::default()
        };
        let mut walker = Walker::new(p, dynamics, state).unwrap();
        walker.step_events(5_000, &mut rng);
        let s = walker.state();
        let mut after: Vec<f64> = s.v.iter().chain(&s.w).copied().collect();
        all.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        assert_eq!(all, after);
    }

    #[test]
    fn renormalize_examples() {
        let p = params(40, 6, 1.0, 9);
        let mut rng = replica_rng(p.seed, 0);
        let on = sphere_state(&p, &mut rng);
        let again = renormalize(&on).unwrap();
        for (a, b) in on.v.iter().chain(&on.w).zip(again.v.iter().chain(&again.w)) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300) + f64::MIN_POSITIVE);
        }
        let scaled = SystemState::new(
            on.v.iter().map(|x| x * 1.001).collect(),
            on.w.iter().map(|x| x * 1.001).collect(),
        );
        let back = renormalize(&scaled).unwrap();
        assert!((total_energy(&back) / 46.0 - 1.0).abs() < 1e-14);

        // a drift of 1e-9 in the energy moves |W|²/M by the same factor
        let drift: f64 = 1e-9;
        let s = (1.0 + drift).sqrt();
        let drifted = SystemState::new(
            on.v.iter().map(|x| x * s).collect(),
            on.w.iter().map(|x| x * s).collect(),
        );
        let fixed = renormalize(&drifted).unwrap();
        let ratio = drifted.active_energy() / fixed.active_energy();
        assert!((ratio - (1.0 + drift)).abs() < 1e-12);
        assert!((tau(&fixed) / tau(&on) - 1.0).abs() < 1e-12);

        let zero = SystemState::new(vec![0.0; 40], vec![0.0; 6]);
        assert!(matches!(renormalize(&zero), Err(Error::ZeroState)));
    }

    #[test]
    fn event_counts_are_poisson() {
        let p = params(100, 10, 1.0, 1);
        let t = 0.1;
        let counts: Vec<f64> = (0..400)
            .map(|i| {
                let mut rng = replica_rng(21, i);
                let state = sphere_state(&p, &mut rng);
                let mut walker = Walker::new(p, Dynamics::default(), state).unwrap();
                walker.run_until(t, &mut rng);
                assert_eq!(walker.time(), t);
                walker.events() as f64
            })
            .collect();
        let est = Estimate::from_samples(&counts).unwrap();
        assert!(est.within(1100.0 * t, 3.0), "{est:?}");
        let mean = est.value;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
        assert!((var / 110.0 - 1.0).abs() < 0.25, "variance {var}");
    }

    #[test]
    fn run_until_splits_are_consistent() {
        // stopping at intermediate times does not change the path
        let p = params(50, 5, 2.0, 1);
        let mut rng = replica_rng(8, 0);
        let state = sphere_state(&p, &mut rng);
        let mut one = Walker::new(p, Dynamics::default(), state.clone()).unwrap();
        let mut many = Walker::new(p, Dynamics::default(), state).unwrap();
        let mut r1 = replica_rng(9, 0);
        let mut r2 = replica_rng(9, 0);
        one.run_until(1.0, &mut r1);
        for i in 1..=10 {
            many.run_until(i as f64 * 0.1, &mut r2);
        }
        many.run_until(1.0, &mut r2);
        assert_eq!(one.events(), many.events());
        for (a, b) in one.state().v.iter().zip(&many.state().v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ensembles_are_deterministic() {
        let p = params(60, 6, 1.0, 42);
        let schedule = Schedule::uniform(1.0, 0.25).unwrap();
        let spec = InitSpec::two_temperature(0.5, 2.0);
        let a = run_ensemble(&p, &spec, &schedule, 5, &RunOptions::default()).unwrap();
        let b = run_ensemble(&p, &spec, &schedule, 5, &RunOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = run_ensemble(&params(60, 6, 1.0, 43), &spec, &schedule, 5, &RunOptions::default())
            .unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn single_replica_matches_advance() {
        let p = params(60, 6, 1.0, 42);
        let schedule = Schedule::uniform(1.0, 0.25).unwrap();
        let spec = InitSpec::uniform();
        let ens = run_ensemble(&p, &spec, &schedule, 1, &RunOptions::default()).unwrap();
        let mut rng = replica_rng(42, 0);
        let mut state = sample_initial(&p, &spec, &mut rng).unwrap();
        let direct = advance(&p, &mut state, &schedule, &RunOptions::default(), &mut rng).unwrap();
        assert_eq!(ens.samples, vec![direct]);
    }

    #[test]
    fn uniform_initial_data_is_stationary() {
        let p = params(100, 10, 1.0, 3);
        let schedule = Schedule::uniform(2.0, 0.25).unwrap();
        let ens = run_ensemble(&p, &InitSpec::uniform(), &schedule, 400, &RunOptions::default())
            .unwrap();
        let m4_sphere = 3.0 * 110.0 / 112.0;
        for i in 0..schedule.sample_times.len() {
            let col = |f: fn(&TrajectorySample) -> f64| -> Estimate {
                let xs: Vec<f64> = ens.samples.iter().map(|r| f(&r[i])).collect();
                Estimate::from_samples(&xs).unwrap()
            };
            assert!(col(|s| s.tau - 1.0).within(0.0, 3.0));
            assert!(col(|s| s.phi).within(0.0, 3.0));
            assert!(col(|s| s.m4_passive).within(m4_sphere, 3.0));
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(1.0, vec![]).is_err());
        assert!(Schedule::new(1.0, vec![0.5, 0.5]).is_err());
        assert!(Schedule::new(1.0, vec![0.5, 1.5]).is_err());
        assert!(Schedule::new(0.0, vec![0.0]).is_err());
        assert!(Schedule::new(1.0, vec![-0.1]).is_err());
        let s = Schedule::uniform(1.0, 0.1).unwrap();
        assert_eq!(s.sample_times.len(), 11);
        assert_eq!(*s.sample_times.last().unwrap(), 1.0);
        assert_eq!(s.index_of(0.3), Some(3));
        assert_eq!(s.index_of(0.35), None);
        let bad = Dynamics {
            exchange: false,
            kac: false,
            renormalize: true,
        };
        assert!(bad.validate().is_err());
        let p = params(10, 3, 1.0, 0);
        let err = run_ensemble(&p, &InitSpec::uniform(), &s, 0, &RunOptions::default());
        assert!(err.is_err());
    }

    #[test]
    fn walker_rejects_mismatched_state() {
        let p = params(10, 3, 1.0, 0);
        let mut rng = replica_rng(0, 0);
        let w = sample_uniform_sphere(4, 2.0, &mut rng).unwrap();
        let state = SystemState::new(vec![1.0; 10], w);
        assert!(Walker::new(p, Dynamics::default(), state).is_err());
    }
}
