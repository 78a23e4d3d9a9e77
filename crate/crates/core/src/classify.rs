//! Pointwise classification of mean properties on finite samples.
//!
//! A verdict of "holds" only ever means "holds at every sampled point"; a
//! violation always carries the concrete point where the defining condition
//! fails.

use std::fmt;

use crate::error::{MeanError, Result};
use crate::interval::Interval;
use crate::mean::Mean;

/// Number of anchors in the default probe plan.
pub const DEFAULT_ANCHORS: usize = 17;
/// Test values per side per anchor in the default probe plan.
pub const DEFAULT_TESTS_PER_SIDE: usize = 8;

/// Wraps an arbitrary function as a [`Mean`] without clipping, so that
/// candidate maps which are not means can be checked.
pub struct FnMean<F> {
    domain: Interval,
    f: F,
}

impl<F: Fn(f64, f64) -> f64> FnMean<F> {
    pub fn new(domain: Interval, f: F) -> Self {
        FnMean { domain, f }
    }
}

impl<F: Fn(f64, f64) -> f64> Mean for FnMean<F> {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.domain.check_pair(x, y)?;
        Ok((self.f)(x, y))
    }
}

/// Outcome of a sampled property check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleVerdict {
    Holds { checked: usize },
    /// First sample point where the property fails, with the offending value.
    Violated { x: f64, y: f64, value: f64 },
}

impl SampleVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SampleVerdict::Holds { .. })
    }
}

fn check_each<M: Mean + ?Sized>(
    mean: &M,
    sample: &[(f64, f64)],
    mut ok: impl FnMut(&M, f64, f64) -> Result<(bool, f64)>,
) -> Result<SampleVerdict> {
    if sample.is_empty() {
        return Err(MeanError::EmptySample);
    }
    for &(x, y) in sample {
        let (good, value) = ok(mean, x, y).map_err(|e| e.at(x, y))?;
        if !good {
            return Ok(SampleVerdict::Violated { x, y, value });
        }
    }
    Ok(SampleVerdict::Holds {
        checked: sample.len(),
    })
}

/// `min(x, y) ≤ M(x, y) ≤ max(x, y)` at every sample point.
pub fn check_internality<M: Mean + ?Sized>(mean: &M, sample: &[(f64, f64)]) -> Result<SampleVerdict> {
    check_each(mean, sample, |m, x, y| {
        let v = m.eval(x, y)?;
        Ok((x.min(y) <= v && v <= x.max(y), v))
    })
}

/// `M(x, y) = M(y, x)` bit-for-bit at every sample point.
///
/// The witness value is `M(y, x)`.
pub fn check_symmetry<M: Mean + ?Sized>(mean: &M, sample: &[(f64, f64)]) -> Result<SampleVerdict> {
    check_each(mean, sample, |m, x, y| {
        let a = m.eval(x, y)?;
        let b = m.eval(y, x)?;
        Ok((a == b, b))
    })
}

/// `min(x, y) < M(x, y) < max(x, y)` at every off-diagonal sample point.
pub fn check_strict<M: Mean + ?Sized>(mean: &M, sample: &[(f64, f64)]) -> Result<SampleVerdict> {
    check_each(mean, sample, |m, x, y| {
        let v = m.eval(x, y)?;
        Ok((x == y || (x.min(y) < v && v < x.max(y)), v))
    })
}

/// Anchor point with test values on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub anchor: f64,
    pub below: Vec<f64>,
    pub above: Vec<f64>,
}

/// Finite set of (anchor, test value) pairs on which one-sided strictness is checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePlan {
    pub probes: Vec<Probe>,
}

impl ProbePlan {
    pub fn new(probes: Vec<Probe>) -> Self {
        ProbePlan { probes }
    }

    /// Equally spaced anchors in the domain's sampling box, with test values
    /// approaching each anchor geometrically (halving the distance each time).
    pub fn default_for(domain: &Interval) -> Self {
        Self::geometric(domain, DEFAULT_ANCHORS, DEFAULT_TESTS_PER_SIDE)
    }

    pub fn geometric(domain: &Interval, anchors: usize, per_side: usize) -> Self {
        let (a, b) = domain.sampling_box();
        let probes = (0..anchors)
            .map(|k| {
                let anchor = a + (b - a) * (k + 1) as f64 / (anchors + 1) as f64;
                let side = |end: f64| -> Vec<f64> {
                    (0..per_side)
                        .map(|j| anchor + (end - anchor) * 0.5f64.powi(j as i32))
                        .collect()
                };
                Probe {
                    anchor,
                    below: side(a),
                    above: side(b),
                }
            })
            .collect();
        ProbePlan { probes }
    }

    pub fn test_count(&self) -> usize {
        self.probes.iter().map(|p| p.below.len() + p.above.len()).sum()
    }
}

/// One of the four one-sided strictness properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OneSided {
    /// `t < x₀ ⟹ M(x₀, t) < x₀`
    LeftVar1,
    /// `x₀ < t ⟹ x₀ < M(x₀, t)`
    RightVar1,
    /// `t < y₀ ⟹ M(t, y₀) < y₀`
    LeftVar2,
    /// `y₀ < t ⟹ y₀ < M(t, y₀)`
    RightVar2,
}

impl OneSided {
    pub const ALL: [OneSided; 4] = [
        OneSided::LeftVar1,
        OneSided::RightVar1,
        OneSided::LeftVar2,
        OneSided::RightVar2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OneSided::LeftVar1 => "left_var1",
            OneSided::RightVar1 => "right_var1",
            OneSided::LeftVar2 => "left_var2",
            OneSided::RightVar2 => "right_var2",
        }
    }

    fn is_left(self) -> bool {
        matches!(self, OneSided::LeftVar1 | OneSided::LeftVar2)
    }
}

impl fmt::Display for OneSided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Verdict for one one-sided strictness property over a probe plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrictnessVerdict {
    HoldsOnSample { checked: usize },
    /// The defining implication fails at `(anchor, t)`; `value` is the mean there.
    Violated { anchor: f64, t: f64, value: f64 },
    /// No valid test value existed on the relevant side of any anchor.
    Untestable,
}

impl StrictnessVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, StrictnessVerdict::HoldsOnSample { .. })
    }
}

/// Three-valued result of combining verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Holds,
    Fails,
    Untestable,
}

impl Claim {
    fn all(verdicts: &[StrictnessVerdict]) -> Claim {
        if verdicts.iter().any(|v| matches!(v, StrictnessVerdict::Violated { .. })) {
            Claim::Fails
        } else if verdicts.iter().all(StrictnessVerdict::holds) {
            Claim::Holds
        } else {
            Claim::Untestable
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrictnessReport {
    pub left_var1: StrictnessVerdict,
    pub right_var1: StrictnessVerdict,
    pub left_var2: StrictnessVerdict,
    pub right_var2: StrictnessVerdict,
    /// Anchors and (anchor, t) pairs in the probe plan that produced this report.
    pub anchors: usize,
    pub tests: usize,
}

impl StrictnessReport {
    pub fn verdict(&self, which: OneSided) -> StrictnessVerdict {
        match which {
            OneSided::LeftVar1 => self.left_var1,
            OneSided::RightVar1 => self.right_var1,
            OneSided::LeftVar2 => self.left_var2,
            OneSided::RightVar2 => self.right_var2,
        }
    }

    /// Left-strict in both variables.
    pub fn left_strict(&self) -> Claim {
        Claim::all(&[self.left_var1, self.left_var2])
    }

    /// Right-strict in both variables.
    pub fn right_strict(&self) -> Claim {
        Claim::all(&[self.right_var1, self.right_var2])
    }

    pub fn any_untestable(&self) -> bool {
        OneSided::ALL
            .iter()
            .any(|&w| self.verdict(w) == StrictnessVerdict::Untestable)
    }
}

fn check_one_sided<M: Mean + ?Sized>(
    mean: &M,
    plan: &ProbePlan,
    which: OneSided,
) -> Result<StrictnessVerdict> {
    let domain = mean.domain();
    let mut checked = 0;
    for probe in &plan.probes {
        let a = probe.anchor;
        if !domain.contains(a) {
            continue;
        }
        let tests = if which.is_left() { &probe.below } else { &probe.above };
        for &t in tests {
            let on_side = if which.is_left() { t < a } else { t > a };
            if !on_side || !domain.contains(t) {
                continue;
            }
            let (x, y) = match which {
                OneSided::LeftVar1 | OneSided::RightVar1 => (a, t),
                OneSided::LeftVar2 | OneSided::RightVar2 => (t, a),
            };
            let value = mean.eval(x, y).map_err(|e| e.at(x, y))?;
            let ok = if which.is_left() { value < a } else { a < value };
            if !ok {
                return Ok(StrictnessVerdict::Violated { anchor: a, t, value });
            }
            checked += 1;
        }
    }
    Ok(if checked == 0 {
        StrictnessVerdict::Untestable
    } else {
        StrictnessVerdict::HoldsOnSample { checked }
    })
}

/// Checks the four one-sided strictness implications at every (anchor, t)
/// pair of `plan`. Pairs outside the mean's domain or on the wrong side of
/// their anchor are skipped.
pub fn classify_strictness<M: Mean + ?Sized>(mean: &M, plan: &ProbePlan) -> Result<StrictnessReport> {
    Ok(StrictnessReport {
        left_var1: check_one_sided(mean, plan, OneSided::LeftVar1)?,
        right_var1: check_one_sided(mean, plan, OneSided::RightVar1)?,
        left_var2: check_one_sided(mean, plan, OneSided::LeftVar2)?,
        right_var2: check_one_sided(mean, plan, OneSided::RightVar2)?,
        anchors: plan.probes.len(),
        tests: plan.test_count(),
    })
}
