//! Diagonal, weak and c-contractivity of mean-type mappings, and the
//! strictness-based sufficient conditions for them.
//!
//! Every strict inequality is an exact floating-point comparison.

use std::fmt;

use crate::classify::{Claim, StrictnessReport};
use crate::error::{MeanError, Result};
use crate::iteration::{MeanPair, CYCLE_MEMORY};

pub const DEFAULT_WEAK_BUDGET: usize = 64;

fn off_diagonal(x: f64, y: f64) -> Result<f64> {
    if x == y {
        Err(MeanError::DiagonalPoint(x))
    } else {
        Ok((x - y).abs())
    }
}

fn gap((u, v): (f64, f64)) -> f64 {
    (u - v).abs()
}

/// `|M(x, y) − N(x, y)| < |x − y|`
pub fn diag_contractive_at<P: MeanPair + ?Sized>(map: &P, x: f64, y: f64) -> Result<bool> {
    let d = off_diagonal(x, y)?;
    Ok(gap(map.apply(x, y)?) < d)
}

/// Why no iterate can ever shrink the gap at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoContraction {
    /// `(M, N)(x, y) = (x, y)`
    FixedPoint,
    /// `(M, N)(x, y) = (y, x)` and `(M, N)(y, x) = (x, y)`
    PeriodTwo,
}

impl fmt::Display for NoContraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoContraction::FixedPoint => "fixed-point",
            NoContraction::PeriodTwo => "period-two",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakIndex {
    /// Smallest `n` with `|Mₙ − Nₙ| < |x − y|`.
    Found(usize),
    /// Certified: no `n` works.
    Never(NoContraction),
    /// No index up to the budget, and no certificate.
    NotWithin(usize),
}

impl WeakIndex {
    pub fn index(&self) -> Option<usize> {
        match self {
            WeakIndex::Found(n) => Some(*n),
            _ => None,
        }
    }
}

/// Smallest `n ≤ n_max` with `|Mₙ(x, y) − Nₙ(x, y)| < |x − y|`.
///
/// For genuine means such an `n` exists iff it exists at `n = 2`; otherwise
/// the first iterate is either `(x, y)` or the swap `(y, x)` with a swap back,
/// and the corresponding certificate is returned. Larger indices are only
/// searched when neither certificate applies (noisy data-driven means).
pub fn weak_contractivity_index<P: MeanPair + ?Sized>(
    map: &P,
    x: f64,
    y: f64,
    n_max: usize,
) -> Result<WeakIndex> {
    let d = off_diagonal(x, y)?;
    if n_max == 0 {
        return Err(MeanError::InvalidParameter("n_max must be at least 1".into()));
    }
    let first = map.apply(x, y)?;
    if gap(first) < d {
        return Ok(WeakIndex::Found(1));
    }
    let second = map.apply(first.0, first.1)?;
    if n_max >= 2 && gap(second) < d {
        return Ok(WeakIndex::Found(2));
    }
    if first == (x, y) {
        return Ok(WeakIndex::Never(NoContraction::FixedPoint));
    }
    if first == (y, x) && second == (x, y) {
        return Ok(WeakIndex::Never(NoContraction::PeriodTwo));
    }
    let mut state = second;
    for n in 3..=n_max {
        state = map.apply(state.0, state.1)?;
        if gap(state) < d {
            return Ok(WeakIndex::Found(n));
        }
    }
    Ok(WeakIndex::NotWithin(n_max))
}

/// Smallest `n ≤ n_max` with `|Mₙ(x, y) − Nₙ(x, y)| < c·|x − y|`, or `None`.
///
/// Stops early once the orbit recurs exactly, since no later iterate can
/// then satisfy the inequality.
pub fn c_contraction_index<P: MeanPair + ?Sized>(
    map: &P,
    x: f64,
    y: f64,
    c: f64,
    n_max: usize,
) -> Result<Option<usize>> {
    if !(0.0..1.0).contains(&c) {
        return Err(MeanError::InvalidContraction(c));
    }
    let bound = c * off_diagonal(x, y)?;
    let mut recent: Vec<(u64, u64)> = vec![(x.to_bits(), y.to_bits())];
    let mut state = (x, y);
    for n in 1..=n_max {
        state = map.apply(state.0, state.1)?;
        if gap(state) < bound {
            return Ok(Some(n));
        }
        let key = (state.0.to_bits(), state.1.to_bits());
        if recent.contains(&key) {
            return Ok(None);
        }
        if recent.len() == CYCLE_MEMORY {
            recent.remove(0);
        }
        recent.push(key);
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContractivityKind {
    Diagonal,
    Weak,
    CContraction,
}

impl fmt::Display for ContractivityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractivityKind::Diagonal => "diagonal",
            ContractivityKind::Weak => "weak",
            ContractivityKind::CContraction => "c-contraction",
        })
    }
}

/// A contractivity property checked over a finite sample of off-diagonal points.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractivityVerdict {
    pub kind: ContractivityKind,
    /// Off-diagonal points checked; diagonal sample points are skipped.
    pub checked: usize,
    /// Points where the property held.
    pub holds_on: usize,
    /// First point where it failed.
    pub witness: Option<(f64, f64)>,
    /// Largest index needed over the points where it held (weak / c-contraction).
    pub index: Option<usize>,
    pub c: Option<f64>,
}

impl ContractivityVerdict {
    /// True when the property held at every checked point (and there was at least one).
    pub fn holds(&self) -> bool {
        self.checked > 0 && self.holds_on == self.checked
    }

    fn empty(kind: ContractivityKind, c: Option<f64>) -> Self {
        ContractivityVerdict {
            kind,
            checked: 0,
            holds_on: 0,
            witness: None,
            index: None,
            c,
        }
    }

    fn record(&mut self, x: f64, y: f64, index: Option<usize>) {
        self.checked += 1;
        match index {
            Some(n) => {
                self.holds_on += 1;
                self.index = Some(self.index.map_or(n, |m| m.max(n)));
            }
            None => {
                if self.witness.is_none() {
                    self.witness = Some((x, y));
                }
            }
        }
    }
}

fn over_sample<P: MeanPair + ?Sized>(
    map: &P,
    sample: &[(f64, f64)],
    mut verdict: ContractivityVerdict,
    mut check: impl FnMut(&P, f64, f64) -> Result<Option<usize>>,
) -> Result<ContractivityVerdict> {
    if sample.is_empty() {
        return Err(MeanError::EmptySample);
    }
    for &(x, y) in sample.iter().filter(|(x, y)| x != y) {
        let idx = check(map, x, y).map_err(|e| e.at(x, y))?;
        verdict.record(x, y, idx);
    }
    Ok(verdict)
}

pub fn diagonal_contractivity_on<P: MeanPair + ?Sized>(
    map: &P,
    sample: &[(f64, f64)],
) -> Result<ContractivityVerdict> {
    over_sample(
        map,
        sample,
        ContractivityVerdict::empty(ContractivityKind::Diagonal, None),
        |m, x, y| Ok(diag_contractive_at(m, x, y)?.then_some(1)),
    )
}

pub fn weak_contractivity_on<P: MeanPair + ?Sized>(
    map: &P,
    sample: &[(f64, f64)],
    n_max: usize,
) -> Result<ContractivityVerdict> {
    over_sample(
        map,
        sample,
        ContractivityVerdict::empty(ContractivityKind::Weak, None),
        |m, x, y| Ok(weak_contractivity_index(m, x, y, n_max)?.index()),
    )
}

pub fn c_contraction_on<P: MeanPair + ?Sized>(
    map: &P,
    sample: &[(f64, f64)],
    c: f64,
    n_max: usize,
) -> Result<ContractivityVerdict> {
    over_sample(
        map,
        sample,
        ContractivityVerdict::empty(ContractivityKind::CContraction, Some(c)),
        |m, x, y| c_contraction_index(m, x, y, c, n_max),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaRow {
    pub x: f64,
    pub y: f64,
    pub weak: WeakIndex,
    /// Diagonal contractivity of `(M₂, N₂)` at the point.
    pub second_iterate_contractive: bool,
}

impl LemmaRow {
    pub fn agrees(&self) -> bool {
        self.weak.index().is_some() == self.second_iterate_contractive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
}

impl LemmaReport {
    pub fn disagreements(&self) -> impl Iterator<Item = &LemmaRow> {
        self.rows.iter().filter(|r| !r.agrees())
    }
}

/// Compares weak contractivity of `(M, N)` with diagonal contractivity of
/// `(M₂, N₂)` at every off-diagonal sample point.
pub fn lemma_equivalence_check<P: MeanPair>(
    map: &P,
    sample: &[(f64, f64)],
    n_max: usize,
) -> Result<LemmaReport> {
    if sample.is_empty() {
        return Err(MeanError::EmptySample);
    }
    let second = map.iterated(2);
    let rows = sample
        .iter()
        .filter(|(x, y)| x != y)
        .map(|&(x, y)| {
            Ok(LemmaRow {
                x,
                y,
                weak: weak_contractivity_index(map, x, y, n_max)?,
                second_iterate_contractive: diag_contractive_at(&second, x, y)?,
            })
            .map_err(|e: MeanError| e.at(x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaReport { rows })
}

/// Whether a sufficient condition can be read off a pair of strictness reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropositionOutcome {
    Applies,
    DoesNotApply,
    /// Some one-sided verdict could not be tested on the probe plan.
    Inapplicable,
}

impl PropositionOutcome {
    fn from_bool(b: bool) -> Self {
        if b {
            PropositionOutcome::Applies
        } else {
            PropositionOutcome::DoesNotApply
        }
    }

    pub fn applies(self) -> bool {
        self == PropositionOutcome::Applies
    }
}

impl fmt::Display for PropositionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropositionOutcome::Applies => "applies",
            PropositionOutcome::DoesNotApply => "does-not-apply",
            PropositionOutcome::Inapplicable => "inapplicable",
        })
    }
}

/// Both means left-strict, or both right-strict (each in both variables):
/// sufficient for diagonal contractivity.
pub fn prop1_applies(m: &StrictnessReport, n: &StrictnessReport) -> PropositionOutcome {
    if m.any_untestable() || n.any_untestable() {
        return PropositionOutcome::Inapplicable;
    }
    let both = |f: fn(&StrictnessReport) -> Claim| f(m) == Claim::Holds && f(n) == Claim::Holds;
    PropositionOutcome::from_bool(
        both(StrictnessReport::left_strict) || both(StrictnessReport::right_strict),
    )
}

/// The three mixed one-sided conditions:
///
/// 1. `M` right-strict in var 1, or `N` left-strict in var 2;
/// 2. `M` left- or right-strict in var 2, or `N` left- or right-strict in var 1;
/// 3. `M` left-strict in var 1, or `N` right-strict in var 2.
///
/// These rule out the fixed point and the two-cycle `(x, y) ↔ (y, x)`, which is
/// what weak contractivity needs. Diagonal contractivity can still fail, e.g.
/// for `(proj2, min)`, so callers should check the two conclusions separately.
pub fn prop2_applies(m: &StrictnessReport, n: &StrictnessReport) -> PropositionOutcome {
    if m.any_untestable() || n.any_untestable() {
        return PropositionOutcome::Inapplicable;
    }
    let first = m.right_var1.holds() || n.left_var2.holds();
    let second = m.left_var2.holds()
        || m.right_var2.holds()
        || n.left_var1.holds()
        || n.right_var1.holds();
    let third = m.left_var1.holds() || n.right_var2.holds();
    PropositionOutcome::from_bool(first && second && third)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify_strictness, Probe, ProbePlan};
    use crate::iteration::{iterate, MeanTypeMapping};
    use crate::mean::{Mean, MeanSpec};

    fn pair(m: MeanSpec, n: MeanSpec) -> MeanTypeMapping {
        MeanTypeMapping::new(m, n).unwrap()
    }

    fn report(m: &MeanSpec) -> StrictnessReport {
        classify_strictness(m, &ProbePlan::default_for(&m.domain())).unwrap()
    }

    #[test]
    fn diag_examples() {
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        assert!(diag_contractive_at(&ah, 2.0, 8.0).unwrap());
        let mm = pair(MeanSpec::min(), MeanSpec::max());
        assert!(!diag_contractive_at(&mm, 2.0, 8.0).unwrap());
        let pp = pair(MeanSpec::proj1(), MeanSpec::proj2());
        assert!(!diag_contractive_at(&pp, 1.0, 2.0).unwrap());
        assert_eq!(diag_contractive_at(&pp, 2.0, 2.0), Err(MeanError::DiagonalPoint(2.0)));
    }

    #[test]
    fn weak_examples() {
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        assert_eq!(weak_contractivity_index(&ah, 2.0, 8.0, 64).unwrap(), WeakIndex::Found(1));
        let pp = pair(MeanSpec::proj1(), MeanSpec::proj2());
        assert_eq!(
            weak_contractivity_index(&pp, 1.0, 2.0, 64).unwrap(),
            WeakIndex::Never(NoContraction::FixedPoint)
        );
        let swap = pair(MeanSpec::proj2(), MeanSpec::proj1());
        assert_eq!(
            weak_contractivity_index(&swap, 1.0, 2.0, 64).unwrap(),
            WeakIndex::Never(NoContraction::PeriodTwo)
        );
        assert!(weak_contractivity_index(&ah, 1.0, 1.0, 64).is_err());
        assert!(weak_contractivity_index(&ah, 1.0, 2.0, 0).is_err());
    }

    #[test]
    fn weak_index_two() {
        // (proj2, min) swaps (x, y) with x < y, then collapses
        let pm = pair(MeanSpec::proj2(), MeanSpec::min());
        assert!(!diag_contractive_at(&pm, 1.0, 2.0).unwrap());
        assert_eq!(weak_contractivity_index(&pm, 1.0, 2.0, 64).unwrap(), WeakIndex::Found(2));
        // with budget 1 the index is not reached and no certificate applies
        assert_eq!(weak_contractivity_index(&pm, 1.0, 2.0, 1).unwrap(), WeakIndex::NotWithin(1));
    }

    #[test]
    fn weak_index_satisfies_gap_inequality() {
        let maps = [
            pair(MeanSpec::proj2(), MeanSpec::min()),
            pair(MeanSpec::arithmetic(), MeanSpec::geometric()),
            pair(MeanSpec::max(), MeanSpec::proj1()),
        ];
        for map in &maps {
            for (x, y) in [(1.0, 2.0), (3.0, 0.5), (0.1, 9.0)] {
                if let WeakIndex::Found(n) = weak_contractivity_index(map, x, y, 64).unwrap() {
                    let (u, v) = iterate(map, x, y, n).unwrap();
                    assert!((u - v).abs() < (x - y).abs());
                }
            }
        }
    }

    #[test]
    fn c_examples() {
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        assert_eq!(c_contraction_index(&ah, 2.0, 8.0, 0.5, 64).unwrap(), Some(1));
        let mm = pair(MeanSpec::min(), MeanSpec::max());
        for c in [0.0, 0.5, 0.9, 0.99] {
            assert_eq!(c_contraction_index(&mm, 2.0, 8.0, c, 64).unwrap(), None);
        }
        let ag = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        // A − G = 40.5, 0.9·99 = 89.1
        assert_eq!(c_contraction_index(&ag, 1.0, 100.0, 0.9, 64).unwrap(), Some(1));
        // c = 0 needs an exactly collapsed iterate
        assert_eq!(c_contraction_index(&ag, 1.0, 100.0, 0.0, 64).unwrap(), None);
        assert_eq!(
            c_contraction_index(&ah, 2.0, 8.0, 1.0, 64),
            Err(MeanError::InvalidContraction(1.0))
        );
        assert!(c_contraction_index(&ah, 2.0, 8.0, -0.1, 64).is_err());
        assert!(c_contraction_index(&ah, 2.0, 2.0, 0.5, 64).is_err());
    }

    #[test]
    fn c_small_needs_more_steps() {
        let ag = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        let n = c_contraction_index(&ag, 1.0, 100.0, 1e-6, 64).unwrap().unwrap();
        assert!(n > 1);
        let (u, v) = iterate(&ag, 1.0, 100.0, n).unwrap();
        assert!((u - v).abs() < 1e-6 * 99.0);
        let (u, v) = iterate(&ag, 1.0, 100.0, n - 1).unwrap();
        assert!((u - v).abs() >= 1e-6 * 99.0);
    }

    #[test]
    fn sample_verdicts() {
        let pts = [(1.0, 2.0), (2.0, 2.0), (5.0, 0.5)];
        let ah = pair(MeanSpec::arithmetic(), MeanSpec::harmonic());
        let v = diagonal_contractivity_on(&ah, &pts).unwrap();
        assert!(v.holds());
        assert_eq!(v.checked, 2);
        let mm = pair(MeanSpec::min(), MeanSpec::max());
        let v = weak_contractivity_on(&mm, &pts, 64).unwrap();
        assert!(!v.holds());
        assert_eq!(v.witness, Some((1.0, 2.0)));
        let v = c_contraction_on(&ah, &pts, 0.9, 64).unwrap();
        assert_eq!((v.index, v.c), (Some(1), Some(0.9)));
        assert!(diagonal_contractivity_on(&ah, &[]).is_err());
    }

    #[test]
    fn lemma_examples() {
        let pts = [(1.0, 2.0), (0.3, 7.0), (4.0, 1.5)];
        let ag = pair(MeanSpec::arithmetic(), MeanSpec::geometric());
        let r = lemma_equivalence_check(&ag, &pts, 64).unwrap();
        assert!(r.rows.iter().all(|r| r.weak.index().is_some() && r.second_iterate_contractive));
        let swap = pair(MeanSpec::proj2(), MeanSpec::proj1());
        let r = lemma_equivalence_check(&swap, &pts, 64).unwrap();
        assert!(r.rows.iter().all(|r| r.weak.index().is_none() && !r.second_iterate_contractive));
        assert_eq!(r.disagreements().count(), 0);
        assert!(lemma_equivalence_check(&swap, &[], 64).is_err());
    }

    #[test]
    fn proposition_examples() {
        let a = report(&MeanSpec::arithmetic());
        let h = report(&MeanSpec::harmonic());
        let mn = report(&MeanSpec::min());
        let mx = report(&MeanSpec::max());
        let p1 = report(&MeanSpec::proj1());
        let p2 = report(&MeanSpec::proj2());

        assert_eq!(prop1_applies(&a, &h), PropositionOutcome::Applies);
        assert_eq!(prop1_applies(&mn, &mx), PropositionOutcome::DoesNotApply);
        assert_eq!(prop1_applies(&mn, &mn), PropositionOutcome::Applies);

        assert_eq!(prop2_applies(&a, &h), PropositionOutcome::Applies);
        assert_eq!(prop2_applies(&p1, &p2), PropositionOutcome::DoesNotApply);
        assert_eq!(prop2_applies(&mn, &mx), PropositionOutcome::DoesNotApply);
    }

    #[test]
    fn prop2_gives_weak_not_diagonal() {
        let m = MeanSpec::proj2();
        let n = MeanSpec::min();
        assert!(prop2_applies(&report(&m), &report(&n)).applies());
        let map = pair(m, n);
        let pts = [(1.0, 2.0), (0.5, 3.0)];
        assert!(weak_contractivity_on(&map, &pts, 64).unwrap().holds());
        assert!(!diagonal_contractivity_on(&map, &pts).unwrap().holds());
    }

    #[test]
    fn untestable_is_inapplicable() {
        let plan = ProbePlan::new(vec![Probe {
            anchor: 1.0,
            below: vec![],
            above: vec![2.0],
        }]);
        let a = classify_strictness(&MeanSpec::arithmetic(), &plan).unwrap();
        let full = report(&MeanSpec::arithmetic());
        assert_eq!(prop1_applies(&a, &full), PropositionOutcome::Inapplicable);
        assert_eq!(prop2_applies(&full, &a), PropositionOutcome::Inapplicable);
    }
}
