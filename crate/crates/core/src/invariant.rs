//! Invariant means as Gauss limits, invariance residuals, complementary
//! means, and a quadrature oracle for the arithmetic-geometric mean.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MeanError, Result};
use crate::interval::Interval;
use crate::iteration::{check_tol, gauss_limit, LimitStatus, MeanPair};
use crate::mean::Mean;

pub const DEFAULT_QUAD_POINTS: usize = 2048;
pub const BISECTION_CAP: usize = 200;
/// Random probes used to sample-check the hypotheses on `K` before root solving.
pub const HYPOTHESIS_PROBES: usize = 100;
const HYPOTHESIS_SEED: u64 = 0x6b_6d65_616e;

/// Gauss limit of `map` at `(x, y)`; an error unless the iteration converged.
pub fn invariant_mean_value<P: MeanPair + ?Sized>(
    map: &P,
    x: f64,
    y: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let r = gauss_limit(map, x, y, tol, max_iter)?;
    match (r.status, r.value) {
        (LimitStatus::Converged, Some(v)) => Ok(v),
        (LimitStatus::NonConvergent { period }, _) => Err(MeanError::NonConvergent {
            gap: r.final_gap,
            period,
        }),
        _ => Err(MeanError::Undecided {
            gap: r.final_gap,
            iterations: r.iterations_used,
        }),
    }
}

/// The invariant mean of a mapping, evaluated pointwise as its Gauss limit.
#[derive(Debug, Clone)]
pub struct ComputedInvariantMean<P> {
    mapping: P,
    tol: f64,
    max_iter: usize,
}

impl<P: MeanPair> ComputedInvariantMean<P> {
    pub fn new(mapping: P, tol: f64, max_iter: usize) -> Result<Self> {
        check_tol(tol)?;
        Ok(ComputedInvariantMean {
            mapping,
            tol,
            max_iter,
        })
    }

    pub fn mapping(&self) -> &P {
        &self.mapping
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

impl<P: MeanPair> Mean for ComputedInvariantMean<P> {
    fn domain(&self) -> Interval {
        self.mapping.domain()
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        invariant_mean_value(&self.mapping, x, y, self.tol, self.max_iter)
    }
}

/// Largest invariance residual over a sample and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub max: f64,
    pub at: (f64, f64),
    pub points: usize,
}

/// Per-sweep cache of `K` values keyed by the exact bits of the argument.
struct Memo<'a, K: ?Sized> {
    k: &'a K,
    cache: RefCell<HashMap<(u64, u64), f64>>,
}

impl<K: Mean + ?Sized> Memo<'_, K> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let key = (x.to_bits(), y.to_bits());
        if let Some(&v) = self.cache.borrow().get(&key) {
            return Ok(v);
        }
        let v = self.k.eval(x, y)?;
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }
}

/// `max |K(M(x, y), N(x, y)) − K(x, y)|` over the sample.
pub fn invariance_residual<K: Mean + ?Sized, P: MeanPair + ?Sized>(
    k: &K,
    map: &P,
    sample: &[(f64, f64)],
) -> Result<Residual> {
    if sample.is_empty() {
        return Err(MeanError::EmptySample);
    }
    let memo = Memo {
        k,
        cache: RefCell::new(HashMap::new()),
    };
    let mut worst = Residual {
        max: f64::NEG_INFINITY,
        at: sample[0],
        points: sample.len(),
    };
    for &(x, y) in sample {
        let r = (|| {
            let (u, v) = map.apply(x, y)?;
            Ok::<_, MeanError>((memo.eval(u, v)? - memo.eval(x, y)?).abs())
        })()
        .map_err(|e| e.at(x, y))?;
        if r > worst.max {
            worst.max = r;
            worst.at = (x, y);
        }
    }
    Ok(worst)
}

/// Sample-checks that `K` is symmetric and strictly increasing in its second
/// argument on `[lo, hi]²`.
fn check_complement_hypotheses<K: Mean + ?Sized>(k: &K, lo: f64, hi: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(HYPOTHESIS_SEED);
    let mut draw = || lo + (hi - lo) * rng.gen::<f64>();
    for _ in 0..HYPOTHESIS_PROBES {
        let (a, b, c) = (draw(), draw(), draw());
        if k.eval(a, b)? != k.eval(b, a)? {
            return Err(MeanError::AssumptionViolated {
                property: "symmetry of K",
                x: a,
                y: b,
            });
        }
        let (s, t) = if b < c { (b, c) } else { (c, b) };
        let resolvable = t - s > 64.0 * f64::EPSILON * s.abs().max(t.abs());
        if resolvable && k.eval(a, s)? >= k.eval(a, t)? {
            return Err(MeanError::AssumptionViolated {
                property: "strict monotonicity of K",
                x: a,
                y: s,
            });
        }
    }
    Ok(())
}

/// Solves `K(M(x, y), t) = K(x, y)` for `t ∈ [min(x, y), max(x, y)]` by
/// bisection, stopping once the residual is within `tol`.
///
/// `K` must be continuous, symmetric and strictly increasing; the last two
/// are checked on random probes first.
pub fn complementary_value<K: Mean + ?Sized, M: Mean + ?Sized>(
    k: &K,
    m: &M,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    k.domain().check_pair(x, y)?;
    m.domain().check_pair(x, y)?;
    if x == y {
        return Ok(x);
    }
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    check_complement_hypotheses(k, lo, hi)?;

    let target = k.eval(x, y)?;
    let mx = m.eval(x, y)?;
    let g = |t: f64| -> Result<f64> { Ok(k.eval(mx, t)? - target) };

    let (mut a, mut b) = (lo, hi);
    let (g_lo, g_hi) = (g(a)?, g(b)?);
    if g_lo.abs() <= tol {
        return Ok(a);
    }
    if g_hi.abs() <= tol {
        return Ok(b);
    }
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(MeanError::NotBracketed { lo, hi, g_lo, g_hi });
    }
    let (mut ga, mut gb) = (g_lo, g_hi);
    for _ in 0..BISECTION_CAP {
        let mid = a + 0.5 * (b - a);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        if gm.abs() <= tol {
            return Ok(mid);
        }
        if gm < 0.0 {
            (a, ga) = (mid, gm);
        } else {
            (b, gb) = (mid, gm);
        }
    }
    let (best, residual) = if ga.abs() <= gb.abs() { (a, ga) } else { (b, gb) };
    if residual.abs() <= tol {
        Ok(best)
    } else {
        Err(MeanError::RootNotConverged {
            iterations: BISECTION_CAP,
            residual: residual.abs(),
        })
    }
}

/// The mean complementary to `M` with respect to `K`, evaluated by root solving.
#[derive(Debug, Clone)]
pub struct ComplementaryMean<K, M> {
    k: K,
    m: M,
    tol: f64,
    domain: Interval,
}

impl<K: Mean, M: Mean> ComplementaryMean<K, M> {
    pub fn new(k: K, m: M, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        let domain = k
            .domain()
            .intersect(&m.domain())
            .ok_or_else(|| MeanError::InvalidInterval("K and M domains do not overlap".into()))?;
        Ok(ComplementaryMean { k, m, tol, domain })
    }
}

impl<K: Mean, M: Mean> Mean for ComplementaryMean<K, M> {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        complementary_value(&self.k, &self.m, x, y, self.tol)
    }
}

/// `π / (2·Q)` with `Q = ∫₀^{π/2} dθ / √(x² cos²θ + y² sin²θ)`, by the
/// composite trapezoid rule on `quad_points` subintervals.
///
/// The integrand is smooth, even and π-periodic, so the trapezoid rule
/// converges geometrically. This never runs the arithmetic-geometric
/// iteration and serves as an independent check on it.
pub fn agm_oracle(x: f64, y: f64, quad_points: usize) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(MeanError::OutsideDomain {
            x,
            y,
            domain: Interval::positive(),
        });
    }
    if quad_points == 0 {
        return Err(MeanError::InvalidParameter("quad_points must be positive".into()));
    }
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        1.0 / (x * x * c * c + y * y * s * s).sqrt()
    };
    let h = FRAC_PI_2 / quad_points as f64;
    let interior: f64 = (1..quad_points).map(|k| f(k as f64 * h)).sum();
    let q = h * (0.5 * (f(0.0) + f(FRAC_PI_2)) + interior);
    Ok(FRAC_PI_2 / q)
}
