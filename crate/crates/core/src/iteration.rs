//! Iterates of mean-type mappings, Gauss limits and diagonal-basin membership.
//!
//! All updates are simultaneous: `(u, v) ← (M(u, v), N(u, v))`.

use std::collections::VecDeque;

use crate::error::{MeanError, Result};
use crate::interval::Interval;
use crate::mean::{Mean, MeanSpec};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Number of most recent states kept for exact-recurrence detection.
pub const CYCLE_MEMORY: usize = 64;
pub const DEFAULT_EXTREMAL_STEPS: usize = 10_000;
pub const DEFAULT_TAIL: usize = 200;
/// Extra steps allowed after convergence for the state to settle.
pub const SETTLE_STEPS: usize = 64;

/// A self-map of `I²` whose coordinates are means.
pub trait MeanPair {
    fn domain(&self) -> Interval;

    /// One application of the pair map.
    fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)>;

    /// The `times`-fold composition, itself a mean-type mapping.
    fn iterated(&self, times: usize) -> Iterated<'_, Self>
    where
        Self: Sized,
    {
        Iterated { base: self, times }
    }
}

/// The pair `(M, N)` on a common interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTypeMapping<M = MeanSpec, N = MeanSpec> {
    m: M,
    n: N,
    domain: Interval,
}

impl<M: Mean, N: Mean> MeanTypeMapping<M, N> {
    /// Uses the intersection of both means' domains.
    pub fn new(m: M, n: N) -> Result<Self> {
        let domain = m.domain().intersect(&n.domain()).ok_or_else(|| {
            MeanError::InvalidInterval(format!(
                "domains {} and {} do not overlap",
                m.domain(),
                n.domain()
            ))
        })?;
        Ok(MeanTypeMapping { m, n, domain })
    }

    pub fn with_domain(m: M, n: N, domain: Interval) -> Result<Self> {
        for (name, d) in [("M", m.domain()), ("N", n.domain())] {
            if !domain.is_subset_of(&d) {
                return Err(MeanError::IncompatibleDomain {
                    mean: name.to_string(),
                    domain,
                });
            }
        }
        Ok(MeanTypeMapping { m, n, domain })
    }

    pub fn m(&self) -> &M {
        &self.m
    }

    pub fn n(&self) -> &N {
        &self.n
    }
}

impl<M: Mean, N: Mean> MeanPair for MeanTypeMapping<M, N> {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        self.domain.check_pair(x, y)?;
        Ok((self.m.eval(x, y)?, self.n.eval(x, y)?))
    }
}

impl<P: MeanPair + ?Sized> MeanPair for &P {
    fn domain(&self) -> Interval {
        (**self).domain()
    }

    fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        (**self).apply(x, y)
    }
}

/// `(Mₖ, Nₖ)` for a fixed `k`, borrowed from the base mapping.
#[derive(Debug, Clone, Copy)]
pub struct Iterated<'a, P: ?Sized> {
    base: &'a P,
    times: usize,
}

impl<P: MeanPair + ?Sized> MeanPair for Iterated<'_, P> {
    fn domain(&self) -> Interval {
        self.base.domain()
    }

    fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        iterate(self.base, x, y, self.times)
    }
}

/// `(M, N)ⁿ(x, y)`; `n = 0` is the identity.
pub fn iterate<P: MeanPair + ?Sized>(map: &P, x: f64, y: f64, n: usize) -> Result<(f64, f64)> {
    map.domain().check_pair(x, y)?;
    let mut state = (x, y);
    for _ in 0..n {
        state = map.apply(state.0, state.1)?;
    }
    Ok(state)
}

/// Finite trajectory of iterates with its monotone envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub start: (f64, f64),
    /// `points[k] = (M, N)^(k+1)(start)`
    pub points: Vec<(f64, f64)>,
    pub min_env: Vec<f64>,
    pub max_env: Vec<f64>,
    /// `gap[k] = max_env[k] − min_env[k]`
    pub gap: Vec<f64>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// First index where `min_env` decreases or `max_env` increases, compared
    /// exactly and including the start point as step zero.
    pub fn envelope_violation(&self) -> Option<usize> {
        let (x, y) = self.start;
        let mut lo = x.min(y);
        let mut hi = x.max(y);
        for k in 0..self.len() {
            if self.min_env[k] < lo || self.max_env[k] > hi {
                return Some(k);
            }
            lo = self.min_env[k];
            hi = self.max_env[k];
        }
        None
    }
}

pub fn orbit<P: MeanPair + ?Sized>(map: &P, x: f64, y: f64, n: usize) -> Result<Orbit> {
    map.domain().check_pair(x, y)?;
    let mut orbit = Orbit {
        start: (x, y),
        points: Vec::with_capacity(n),
        min_env: Vec::with_capacity(n),
        max_env: Vec::with_capacity(n),
        gap: Vec::with_capacity(n),
    };
    let (mut u, mut v) = (x, y);
    for _ in 0..n {
        (u, v) = map.apply(u, v)?;
        let lo = u.min(v);
        let hi = u.max(v);
        orbit.points.push((u, v));
        orbit.min_env.push(lo);
        orbit.max_env.push(hi);
        orbit.gap.push(hi - lo);
    }
    Ok(orbit)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitStatus {
    Converged,
    /// The state recurred exactly after `period` steps with gap above tolerance.
    NonConvergent { period: usize },
    /// The state recurred exactly, but its gap is at the rounding resolution
    /// of the iterates: the tolerance is finer than the floating-point
    /// dynamics can resolve, so neither convergence nor divergence is claimed.
    Stalled { period: usize },
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitResult {
    pub status: LimitStatus,
    /// Common limit `K(x, y)`; present only when converged.
    pub value: Option<f64>,
    pub final_gap: f64,
    pub iterations_used: usize,
    /// Last computed iterate.
    pub last: (f64, f64),
}

impl LimitResult {
    pub fn converged(&self) -> bool {
        self.status == LimitStatus::Converged
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(MeanError::InvalidTolerance(tol))
    }
}

/// Bounded record of recent states compared bit-exactly.
struct RecentStates {
    states: VecDeque<(u64, u64)>,
}

impl RecentStates {
    fn new(start: (f64, f64)) -> Self {
        let mut states = VecDeque::with_capacity(CYCLE_MEMORY);
        states.push_back(bits(start));
        RecentStates { states }
    }

    /// Pushes `state`; returns the period if it was seen among the recent states.
    fn observe(&mut self, state: (f64, f64)) -> Option<usize> {
        let key = bits(state);
        let period = self
            .states
            .iter()
            .rev()
            .position(|&s| s == key)
            .map(|k| k + 1);
        if self.states.len() == CYCLE_MEMORY {
            self.states.pop_front();
        }
        self.states.push_back(key);
        period
    }
}

fn bits((u, v): (f64, f64)) -> (u64, u64) {
    (u.to_bits(), v.to_bits())
}

fn at_rounding_resolution(u: f64, v: f64) -> bool {
    (u - v).abs() <= 4.0 * f64::EPSILON * u.abs().max(v.abs())
}

/// Iterates until the gap `|Mₙ − Nₙ|` drops to `tol`, an exact state
/// recurrence is found, or `max_iter` steps have been taken.
pub fn gauss_limit<P: MeanPair + ?Sized>(
    map: &P,
    x: f64,
    y: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LimitResult> {
    check_tol(tol)?;
    if max_iter == 0 {
        return Err(MeanError::InvalidParameter("max_iter must be at least 1".into()));
    }
    map.domain().check_pair(x, y)?;
    if x == y {
        return Ok(LimitResult {
            status: LimitStatus::Converged,
            value: Some(x),
            final_gap: 0.0,
            iterations_used: 0,
            last: (x, y),
        });
    }
    let mut recent = RecentStates::new((x, y));
    let (mut u, mut v) = (x, y);
    for k in 1..=max_iter {
        (u, v) = map.apply(u, v)?;
        let gap = (u - v).abs();
        let result = |status, value| LimitResult {
            status,
            value,
            final_gap: gap,
            iterations_used: k,
            last: (u, v),
        };
        if gap <= tol {
            return settle(map, (u, v), k, max_iter, recent);
        }
        if let Some(period) = recent.observe((u, v)) {
            let status = if at_rounding_resolution(u, v) {
                LimitStatus::Stalled { period }
            } else {
                LimitStatus::NonConvergent { period }
            };
            return Ok(result(status, None));
        }
    }
    Ok(LimitResult {
        status: LimitStatus::BudgetExhausted,
        value: None,
        final_gap: (u - v).abs(),
        iterations_used: max_iter,
        last: (u, v),
    })
}

/// Continues a converged iteration until its state recurs exactly (the
/// floating-point fixed point or cycle of the map), for at most
/// [`SETTLE_STEPS`] further steps and never beyond `max_iter`. The reported
/// value is the midpoint of the settled state.
fn settle<P: MeanPair + ?Sized>(
    map: &P,
    mut state: (f64, f64),
    mut k: usize,
    max_iter: usize,
    mut recent: RecentStates,
) -> Result<LimitResult> {
    recent.observe(state);
    for _ in 0..SETTLE_STEPS {
        if k >= max_iter || state.0 == state.1 {
            break;
        }
        let next = map.apply(state.0, state.1)?;
        k += 1;
        let seen = recent.observe(next).is_some();
        state = next;
        if seen {
            break;
        }
    }
    let (u, v) = state;
    Ok(LimitResult {
        status: LimitStatus::Converged,
        value: Some((0.5 * u + 0.5 * v).clamp(u.min(v), u.max(v))),
        final_gap: (u - v).abs(),
        iterations_used: k,
        last: state,
    })
}

/// Finite-tail surrogates for `liminf` and `limsup` of the shuffled sequence
/// `x, y, M₁, N₁, M₂, N₂, …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalEstimate {
    pub l_est: f64,
    pub u_est: f64,
    pub tail_length: usize,
}

impl ExtremalEstimate {
    pub fn spread(&self) -> f64 {
        self.u_est - self.l_est
    }
}

/// Minimum and maximum over the last `tail` entries of the shuffled sequence
/// truncated after `(M, N)^n_max`, i.e. of length `2·n_max + 2`.
pub fn extremal_invariant_estimates<P: MeanPair + ?Sized>(
    map: &P,
    x: f64,
    y: f64,
    n_max: usize,
    tail: usize,
) -> Result<ExtremalEstimate> {
    map.domain().check_pair(x, y)?;
    let len = 2 * n_max + 2;
    if tail == 0 || tail > len {
        return Err(MeanError::InvalidParameter(format!(
            "tail must lie in 1..={len}, got {tail}"
        )));
    }
    let first = len - tail;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut take = |step: usize, (u, v): (f64, f64)| {
        for (idx, a) in [(2 * step, u), (2 * step + 1, v)] {
            if idx >= first {
                lo = lo.min(a);
                hi = hi.max(a);
            }
        }
    };

    // states[s] for the most recent steps, used to replay an exact cycle
    let mut history: VecDeque<(usize, (f64, f64))> = VecDeque::with_capacity(CYCLE_MEMORY);
    let mut recent = RecentStates::new((x, y));
    let mut state = (x, y);
    take(0, state);
    history.push_back((0, state));
    let mut step = 0;
    while step < n_max {
        step += 1;
        state = map.apply(state.0, state.1)?;
        take(step, state);
        if let Some(period) = recent.observe(state) {
            // the orbit is exactly periodic from here on
            let cycle: Vec<(f64, f64)> = history
                .iter()
                .skip(history.len() - period)
                .map(|&(_, s)| s)
                .collect();
            let resume = (step + 1).max(first / 2);
            for s in resume..=n_max {
                take(s, cycle[(s - step) % period]);
            }
            step = n_max;
        }
        if history.len() == CYCLE_MEMORY {
            history.pop_front();
        }
        history.push_back((step, state));
    }
    Ok(ExtremalEstimate {
        l_est: lo,
        u_est: hi,
        tail_length: tail,
    })
}

/// Membership of a point in the diagonal basin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasinVerdict {
    Inside { iterations: usize },
    /// Exact recurrence with gap above tolerance: the orbit never reaches the diagonal.
    Outside { period: usize, gap: f64 },
    Undecided { gap: f64, iterations: usize },
}

pub fn in_diagonal_basin<P: MeanPair + ?Sized>(
    map: &P,
    x: f64,
    y: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BasinVerdict> {
    let r = gauss_limit(map, x, y, tol, max_iter)?;
    Ok(match r.status {
        LimitStatus::Converged => BasinVerdict::Inside {
            iterations: r.iterations_used,
        },
        LimitStatus::NonConvergent { period } => BasinVerdict::Outside {
            period,
            gap: r.final_gap,
        },
        LimitStatus::Stalled { .. } | LimitStatus::BudgetExhausted => BasinVerdict::Undecided {
            gap: r.final_gap,
            iterations: r.iterations_used,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(m: MeanSpec, n: MeanSpec) -> MeanTypeMapping {
        MeanTypeMapping::new(m, n).unwrap()
    }

    #[test]
    fn iterate_examples() {
        let mm = pair(MeanSpec::min(), MeanSpec::max());
        assert_eq!(iterate(&mm, 5.0, 2.0, 3).unwrap(), (2.0, 5.0));
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        assert_eq!(iterate(&ah, 2.0, 8.0, 1).unwrap(), (5.0, 3.2));
        assert_eq!(iterate(&ah, 2.0, 8.0, 0).unwrap(), (2.0, 8.0));
        let pp = pair(MeanSpec::proj1(), MeanSpec::proj2());
        assert_eq!(iterate(&pp, 1.0, 2.0, 7).unwrap(), (1.0, 2.0));
        assert!(iterate(&ah, -1.0, 2.0, 1).is_err());
        assert!(iterate(&ah, -1.0, 2.0, 0).is_err());
    }

    #[test]
    fn mapping_domain_is_intersection() {
        let m = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        assert_eq!(m.domain(), Interval::positive());
        let bad = MeanTypeMapping::with_domain(
            MeanSpec::arithmetic(),
            MeanSpec::geometric(),
            Interval::real_line(),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn orbit_examples() {
        let ag = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        let o = orbit(&ag, 1.0, 4.0, 5).unwrap();
        assert_eq!(o.len(), 5);
        assert_eq!(o.envelope_violation(), None);
        assert!(o.gap.windows(2).all(|w| w[1] <= w[0]));

        let mm = pair(MeanSpec::min(), MeanSpec::max());
        let o = orbit(&mm, 2.0, 5.0, 4).unwrap();
        assert!(o.points.iter().all(|&p| p == (2.0, 5.0)));

        let o = orbit(&ag, 3.0, 3.0, 3).unwrap();
        assert!(o.points.iter().all(|&p| p == (3.0, 3.0)));
        assert!(o.gap.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn limit_arithmetic_harmonic_is_geometric() {
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        let r = gauss_limit(&ah, 2.0, 8.0, 1e-12, DEFAULT_MAX_ITER).unwrap();
        assert!(r.converged());
        assert!((r.value.unwrap() - 4.0).abs() < 1e-12);
        assert!(r.final_gap <= 1e-12);
    }

    #[test]
    fn limit_projections_non_convergent() {
        let pp = pair(MeanSpec::proj1(), MeanSpec::proj2());
        let r = gauss_limit(&pp, 1.0, 2.0, 1e-12, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(r.status, LimitStatus::NonConvergent { period: 1 });
        assert_eq!(r.final_gap, 1.0);
        assert_eq!(r.value, None);

        let swap = pair(MeanSpec::proj2(), MeanSpec::proj1());
        let r = gauss_limit(&swap, 1.0, 2.0, 1e-12, 100).unwrap();
        assert_eq!(r.status, LimitStatus::NonConvergent { period: 2 });
    }

    #[test]
    fn limit_degenerate_and_errors() {
        let ag = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        let r = gauss_limit(&ag, 3.0, 3.0, 1e-12, 10).unwrap();
        assert_eq!(r.iterations_used, 0);
        assert_eq!(r.value, Some(3.0));
        assert!(matches!(gauss_limit(&ag, 1.0, 2.0, 0.0, 10), Err(MeanError::InvalidTolerance(_))));
        assert!(gauss_limit(&ag, 1.0, 2.0, -1.0, 10).is_err());
        assert!(gauss_limit(&ag, 1.0, 2.0, 1e-12, 0).is_err());
        assert!(gauss_limit(&ag, 0.0, 2.0, 1e-12, 10).is_err());
    }

    #[test]
    fn limit_budget_exhausted() {
        // (min, arithmetic) halves the gap each step: 2 steps are not enough
        let ma = pair(MeanSpec::min(), MeanSpec::arithmetic());
        let r = gauss_limit(&ma, 0.0, 1.0, 1e-12, 2).unwrap();
        assert_eq!(r.status, LimitStatus::BudgetExhausted);
        assert_eq!(r.final_gap, 0.25);
        assert_eq!(r.iterations_used, 2);
    }

    #[test]
    fn tolerance_below_resolution_stalls() {
        // a one-ulp gap that the map holds fixed: finer tolerances cannot be met
        let mm = pair(MeanSpec::min(), MeanSpec::max());
        let y = 1.0 + f64::EPSILON;
        let r = gauss_limit(&mm, 1.0, y, 1e-20, 1000).unwrap();
        assert_eq!(r.status, LimitStatus::Stalled { period: 1 });
        assert_eq!(
            in_diagonal_basin(&mm, 1.0, y, 1e-20, 1000).unwrap(),
            BasinVerdict::Undecided {
                gap: f64::EPSILON,
                iterations: 1
            }
        );
        assert!(gauss_limit(&mm, 1.0, y, 1e-15, 1000).unwrap().converged());
        // large magnitudes still settle exactly on the diagonal
        let ag = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        assert!(gauss_limit(&ag, 1.0e6, 2.0e6, 1e-12, 1000).unwrap().converged());
    }

    #[test]
    fn converged_value_is_settled() {
        // (min, arithmetic) halves the gap; the value is taken once the state stops moving
        let ma = pair(MeanSpec::min(), MeanSpec::arithmetic());
        let r = gauss_limit(&ma, 0.5, 3.0, 1e-12, DEFAULT_MAX_ITER).unwrap();
        assert!(r.converged());
        assert_eq!(map_fixed(&ma, r.last), r.last);
        assert_eq!(r.value, Some(0.5));
    }

    fn map_fixed(map: &MeanTypeMapping, s: (f64, f64)) -> (f64, f64) {
        map.apply(s.0, s.1).unwrap()
    }

    #[test]
    fn extremal_examples() {
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        let e = extremal_invariant_estimates(&ah, 2.0, 8.0, DEFAULT_EXTREMAL_STEPS, DEFAULT_TAIL)
            .unwrap();
        assert!((e.l_est - 4.0).abs() < 1e-12 && (e.u_est - 4.0).abs() < 1e-12);

        let pp = pair(MeanSpec::proj1(), MeanSpec::proj2());
        let e = extremal_invariant_estimates(&pp, 1.0, 2.0, DEFAULT_EXTREMAL_STEPS, DEFAULT_TAIL)
            .unwrap();
        assert_eq!((e.l_est, e.u_est), (1.0, 2.0));

        let mm = pair(MeanSpec::min(), MeanSpec::max());
        let e = extremal_invariant_estimates(&mm, 2.0, 5.0, DEFAULT_EXTREMAL_STEPS, DEFAULT_TAIL)
            .unwrap();
        assert_eq!((e.l_est, e.u_est), (2.0, 5.0));

        assert!(extremal_invariant_estimates(&mm, 2.0, 5.0, 3, 9).is_err());
        assert!(extremal_invariant_estimates(&mm, 2.0, 5.0, 3, 0).is_err());
        assert!(extremal_invariant_estimates(&mm, 2.0, 5.0, 3, 8).is_ok());
    }

    /// Plain replay of the shuffled sequence, without cycle shortcuts.
    fn brute_extremal(map: &MeanTypeMapping, x: f64, y: f64, n_max: usize, tail: usize) -> (f64, f64) {
        let mut a = vec![x, y];
        let mut s = (x, y);
        for _ in 0..n_max {
            s = map.apply(s.0, s.1).unwrap();
            a.push(s.0);
            a.push(s.1);
        }
        let t = &a[a.len() - tail..];
        (
            t.iter().copied().fold(f64::INFINITY, f64::min),
            t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    #[test]
    fn extremal_cycle_replay_matches_brute_force() {
        let cases = [
            (MeanSpec::proj2(), MeanSpec::proj1(), 1.0, 2.0),
            (MeanSpec::min(), MeanSpec::max(), 5.0, 2.0),
            (MeanSpec::max(), MeanSpec::min(), 2.0, 5.0),
            (MeanSpec::arithmetic(), MeanSpec::geometric(), 1.0, 9.0),
            (MeanSpec::min(), MeanSpec::arithmetic(), 0.5, 3.0),
        ];
        for (m, n, x, y) in cases {
            let map = pair(m, n);
            for (n_max, tail) in [(0, 1), (0, 2), (1, 3), (5, 4), (5, 12), (40, 7), (300, 200)] {
                let e = extremal_invariant_estimates(&map, x, y, n_max, tail).unwrap();
                assert_eq!(
                    (e.l_est, e.u_est),
                    brute_extremal(&map, x, y, n_max, tail),
                    "{map:?} n_max={n_max} tail={tail}"
                );
            }
        }
    }

    #[test]
    fn basin_examples() {
        let ag = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        assert!(matches!(
            in_diagonal_basin(&ag, 1.0, 2.0, 1e-12, 1000).unwrap(),
            BasinVerdict::Inside { .. }
        ));
        let pp = pair(MeanSpec::proj1(), MeanSpec::proj2());
        assert_eq!(
            in_diagonal_basin(&pp, 1.0, 2.0, 1e-12, 1000).unwrap(),
            BasinVerdict::Outside { period: 1, gap: 1.0 }
        );
        assert_eq!(
            in_diagonal_basin(&pp, 3.0, 3.0, 1e-12, 1000).unwrap(),
            BasinVerdict::Inside { iterations: 0 }
        );
    }

    #[test]
    fn iterated_mapping_composes() {
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        let two = ah.iterated(2);
        assert_eq!(two.apply(2.0, 8.0).unwrap(), iterate(&ah, 2.0, 8.0, 2).unwrap());
        assert_eq!(iterate(&two, 2.0, 8.0, 3).unwrap(), iterate(&ah, 2.0, 8.0, 6).unwrap());
    }
}
