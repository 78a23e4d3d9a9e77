//! Bivariate means: the built-in catalog and data-driven table means.
//!
//! Every evaluation is clipped into `[min(x, y), max(x, y)]` and returns `x`
//! exactly on the diagonal, so internality and diagonal fixedness hold
//! bit-for-bit in floating point, not just up to rounding.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{MeanError, Result};
use crate::interval::Interval;

/// Anything that can be evaluated as a bivariate mean on `domain()²`.
pub trait Mean {
    fn domain(&self) -> Interval;

    fn eval(&self, x: f64, y: f64) -> Result<f64>;
}

impl<T: Mean + ?Sized> Mean for &T {
    fn domain(&self) -> Interval {
        (**self).domain()
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        (**self).eval(x, y)
    }
}

/// Catalog tag of a [`MeanSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
    /// Power mean `((x^p + y^p) / 2)^(1/p)`, geometric at `p = 0`.
    Power(f64),
    Min,
    Max,
    /// `(x, y) ↦ x`
    Proj1,
    /// `(x, y) ↦ y`
    Proj2,
    /// `w·x + (1 − w)·y` with `w ∈ [0, 1]`.
    WeightedArithmetic(f64),
    Table(Arc<TableMean>),
}

/// A declarative bivariate mean: a catalog entry plus the interval it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSpec {
    kind: MeanKind,
    domain: Interval,
}

impl MeanSpec {
    pub fn arithmetic() -> Self {
        Self::with_natural_domain(MeanKind::Arithmetic)
    }

    pub fn geometric() -> Self {
        Self::with_natural_domain(MeanKind::Geometric)
    }

    pub fn harmonic() -> Self {
        Self::with_natural_domain(MeanKind::Harmonic)
    }

    pub fn min() -> Self {
        Self::with_natural_domain(MeanKind::Min)
    }

    pub fn max() -> Self {
        Self::with_natural_domain(MeanKind::Max)
    }

    pub fn proj1() -> Self {
        Self::with_natural_domain(MeanKind::Proj1)
    }

    pub fn proj2() -> Self {
        Self::with_natural_domain(MeanKind::Proj2)
    }

    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(MeanError::InvalidParameter(format!(
                "power mean exponent must be finite, got {p}"
            )));
        }
        Ok(Self::with_natural_domain(MeanKind::Power(p)))
    }

    pub fn weighted_arithmetic(w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(MeanError::InvalidParameter(format!(
                "weight must lie in [0, 1], got {w}"
            )));
        }
        Ok(Self::with_natural_domain(MeanKind::WeightedArithmetic(w)))
    }

    pub fn table(table: TableMean) -> Self {
        let domain = table.domain;
        MeanSpec {
            kind: MeanKind::Table(Arc::new(table)),
            domain,
        }
    }

    pub fn from_kind(kind: MeanKind) -> Result<Self> {
        match kind {
            MeanKind::Power(p) => Self::power(p),
            MeanKind::WeightedArithmetic(w) => Self::weighted_arithmetic(w),
            MeanKind::Table(t) => Ok(MeanSpec {
                domain: t.domain,
                kind: MeanKind::Table(t),
            }),
            k => Ok(Self::with_natural_domain(k)),
        }
    }

    fn with_natural_domain(kind: MeanKind) -> Self {
        let domain = natural_domain(&kind);
        MeanSpec { kind, domain }
    }

    /// Restricts the mean to a sub-interval of its natural domain.
    pub fn restrict(mut self, domain: Interval) -> Result<Self> {
        if !domain.is_subset_of(&natural_domain(&self.kind)) {
            return Err(MeanError::IncompatibleDomain {
                mean: self.to_string(),
                domain,
            });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn kind(&self) -> &MeanKind {
        &self.kind
    }

    /// Representative members of every catalog family, each on its natural domain.
    pub fn catalog() -> Vec<MeanSpec> {
        vec![
            Self::arithmetic(),
            Self::geometric(),
            Self::harmonic(),
            Self::power(2.0).expect("finite exponent"),
            Self::power(-3.0).expect("finite exponent"),
            Self::min(),
            Self::max(),
            Self::proj1(),
            Self::proj2(),
            Self::weighted_arithmetic(0.25).expect("weight in range"),
        ]
    }

    fn raw(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            MeanKind::Arithmetic => 0.5 * x + 0.5 * y,
            MeanKind::Geometric => geometric(x, y),
            MeanKind::Harmonic => {
                let s = x + y;
                if s == 0.0 {
                    0.0
                } else {
                    2.0 * x * y / s
                }
            }
            MeanKind::Power(p) => power_mean(*p, x, y),
            MeanKind::Min => x.min(y),
            MeanKind::Max => x.max(y),
            MeanKind::Proj1 => x,
            MeanKind::Proj2 => y,
            MeanKind::WeightedArithmetic(w) => w * x + (1.0 - w) * y,
            MeanKind::Table(t) => t.interpolate(x, y),
        }
    }
}

fn natural_domain(kind: &MeanKind) -> Interval {
    match kind {
        MeanKind::Geometric | MeanKind::Harmonic => Interval::positive(),
        MeanKind::Power(p) if *p <= 0.0 => Interval::positive(),
        MeanKind::Power(_) => Interval::nonnegative(),
        MeanKind::Table(t) => t.domain,
        _ => Interval::real_line(),
    }
}

fn geometric(x: f64, y: f64) -> f64 {
    let prod = x * y;
    if prod.is_finite() && prod > 0.0 {
        prod.sqrt()
    } else {
        x.sqrt() * y.sqrt()
    }
}

fn power_mean(p: f64, x: f64, y: f64) -> f64 {
    if p == 0.0 {
        return geometric(x, y);
    }
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    if p > 0.0 {
        // scale by the larger argument so lo/hi ∈ [0, 1]
        let r = lo / hi;
        hi * ((1.0 + r.powf(p)) * 0.5).powf(1.0 / p)
    } else {
        let r = hi / lo;
        lo * ((1.0 + r.powf(p)) * 0.5).powf(1.0 / p)
    }
}

impl Mean for MeanSpec {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.domain.check_pair(x, y)?;
        if x == y {
            return Ok(x);
        }
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let raw = self.raw(x, y);
        if raw.is_nan() {
            return Err(MeanError::InvalidParameter(format!(
                "{self} is undefined at ({x}, {y})"
            )));
        }
        let clipped = raw.clamp(lo, hi);
        if let MeanKind::Table(t) = &self.kind {
            if clipped != raw {
                t.clips.fetch_add(1, Ordering::Relaxed);
            }
        }
        Ok(clipped)
    }
}

/// Renders the mean in the expression syntax accepted by the CLI,
/// e.g. `power(2)` or `weighted_arithmetic(0.25)`.
impl fmt::Display for MeanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MeanKind::Arithmetic => f.write_str("arithmetic"),
            MeanKind::Geometric => f.write_str("geometric"),
            MeanKind::Harmonic => f.write_str("harmonic"),
            MeanKind::Power(p) => write!(f, "power({p:?})"),
            MeanKind::Min => f.write_str("min"),
            MeanKind::Max => f.write_str("max"),
            MeanKind::Proj1 => f.write_str("proj1"),
            MeanKind::Proj2 => f.write_str("proj2"),
            MeanKind::WeightedArithmetic(w) => write!(f, "weighted_arithmetic({w:?})"),
            MeanKind::Table(t) => write!(f, "table({}x{})", t.xs.len(), t.ys.len()),
        }
    }
}

/// A mean given by values on a rectangular grid, interpolated bilinearly.
///
/// Interpolated values outside `[min(x, y), max(x, y)]` are clipped; the
/// number of clipped evaluations is tracked per table.
#[derive(Debug)]
pub struct TableMean {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major: `values[i * ys.len() + j]` is the value at `(xs[i], ys[j])`.
    values: Vec<f64>,
    domain: Interval,
    clips: AtomicUsize,
}

impl TableMean {
    /// Builds a table from `(x, y, value)` triples covering a full rectangular grid.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        if triples.iter().any(|(x, y, v)| !(x.is_finite() && y.is_finite() && v.is_finite())) {
            return Err(MeanError::Table("non-finite entry".into()));
        }
        let axis = |pick: fn(&(f64, f64, f64)) -> f64| {
            let mut v: Vec<f64> = triples.iter().map(pick).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let xs = axis(|t| t.0);
        let ys = axis(|t| t.1);
        if xs.len() < 2 || ys.len() < 2 {
            return Err(MeanError::Table("grid needs at least two nodes per axis".into()));
        }
        let n = xs.len() * ys.len();
        if triples.len() != n {
            return Err(MeanError::Table(format!(
                "expected {n} triples for a {}x{} grid, got {}",
                xs.len(),
                ys.len(),
                triples.len()
            )));
        }
        let mut values = vec![f64::NAN; n];
        for &(x, y, v) in triples {
            let i = xs.partition_point(|&a| a < x);
            let j = ys.partition_point(|&b| b < y);
            let slot = &mut values[i * ys.len() + j];
            if !slot.is_nan() {
                return Err(MeanError::Table(format!("duplicate node ({x}, {y})")));
            }
            *slot = v;
        }
        let lo = xs[0].max(ys[0]);
        let hi = xs[xs.len() - 1].min(ys[ys.len() - 1]);
        let domain = Interval::closed(lo, hi)
            .map_err(|_| MeanError::Table("x and y ranges do not overlap".into()))?;
        Ok(TableMean {
            xs,
            ys,
            values,
            domain,
            clips: AtomicUsize::new(0),
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Number of evaluations whose interpolated value had to be clipped.
    pub fn clip_count(&self) -> usize {
        self.clips.load(Ordering::Relaxed)
    }

    fn interpolate(&self, x: f64, y: f64) -> f64 {
        let (i, tx) = cell(&self.xs, x);
        let (j, ty) = cell(&self.ys, y);
        let ny = self.ys.len();
        let v = |a: usize, b: usize| self.values[a * ny + b];
        let low = v(i, j) * (1.0 - ty) + v(i, j + 1) * ty;
        let high = v(i + 1, j) * (1.0 - ty) + v(i + 1, j + 1) * ty;
        low * (1.0 - tx) + high * tx
    }
}

fn cell(nodes: &[f64], t: f64) -> (usize, f64) {
    let k = nodes.partition_point(|&a| a <= t).clamp(1, nodes.len() - 1) - 1;
    let (a, b) = (nodes[k], nodes[k + 1]);
    (k, ((t - a) / (b - a)).clamp(0.0, 1.0))
}

impl PartialEq for TableMean {
    fn eq(&self, other: &Self) -> bool {
        self.xs == other.xs && self.ys == other.ys && self.values == other.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        assert_eq!(MeanSpec::arithmetic().eval(2.0, 8.0).unwrap(), 5.0);
        assert_eq!(MeanSpec::geometric().eval(2.0, 8.0).unwrap(), 4.0);
        assert_eq!(MeanSpec::harmonic().eval(2.0, 8.0).unwrap(), 3.2);
        assert_eq!(MeanSpec::proj1().eval(7.0, 3.0).unwrap(), 7.0);
        assert_eq!(MeanSpec::proj2().eval(7.0, 3.0).unwrap(), 3.0);
        assert_eq!(MeanSpec::min().eval(7.0, 3.0).unwrap(), 3.0);
        assert_eq!(MeanSpec::max().eval(7.0, 3.0).unwrap(), 7.0);
        let w = MeanSpec::weighted_arithmetic(0.25).unwrap();
        assert_eq!(w.eval(4.0, 8.0).unwrap(), 7.0);
        let q = MeanSpec::power(2.0).unwrap();
        assert!((q.eval(1.0, 7.0).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn power_mean_special_exponents() {
        let (x, y) = (2.0, 8.0);
        let p1 = MeanSpec::power(1.0).unwrap().eval(x, y).unwrap();
        let p0 = MeanSpec::power(0.0).unwrap().eval(x, y).unwrap();
        let pm1 = MeanSpec::power(-1.0).unwrap().eval(x, y).unwrap();
        assert!((p1 - 5.0).abs() < 1e-15);
        assert_eq!(p0, 4.0);
        assert!((pm1 - 3.2).abs() < 1e-15);
        // large exponents approach max / min without overflow
        let big = MeanSpec::power(500.0).unwrap().eval(x, y).unwrap();
        let small = MeanSpec::power(-500.0).unwrap().eval(x, y).unwrap();
        assert!(big <= 8.0 && big > 7.9);
        assert!((2.0..2.01).contains(&small));
    }

    #[test]
    fn domain_violations() {
        let g = MeanSpec::geometric();
        assert!(matches!(g.eval(0.0, 1.0), Err(MeanError::OutsideDomain { .. })));
        assert!(matches!(g.eval(-1.0, 1.0), Err(MeanError::OutsideDomain { .. })));
        assert!(MeanSpec::power(2.0).unwrap().eval(0.0, 1.0).is_ok());
        assert!(MeanSpec::power(-2.0).unwrap().eval(0.0, 1.0).is_err());
        assert!(MeanSpec::arithmetic().eval(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn parameter_errors() {
        assert!(MeanSpec::weighted_arithmetic(1.5).is_err());
        assert!(MeanSpec::weighted_arithmetic(-0.1).is_err());
        assert!(MeanSpec::power(f64::NAN).is_err());
        assert!(MeanSpec::power(f64::INFINITY).is_err());
    }

    #[test]
    fn restrict_checks_natural_domain() {
        let small = Interval::closed(1.0, 2.0).unwrap();
        let g = MeanSpec::geometric().restrict(small).unwrap();
        assert_eq!(g.domain(), small);
        assert!(g.eval(0.5, 1.0).is_err());
        let bad = Interval::closed(-1.0, 2.0).unwrap();
        assert!(MeanSpec::geometric().restrict(bad).is_err());
    }

    #[test]
    fn diagonal_is_exact() {
        for m in MeanSpec::catalog() {
            for x in [0.1, 1.0 / 3.0, 7.77, 1e10] {
                assert_eq!(m.eval(x, x).unwrap(), x, "{m}");
            }
        }
    }

    #[test]
    fn display_matches_syntax() {
        assert_eq!(MeanSpec::power(2.0).unwrap().to_string(), "power(2.0)");
        assert_eq!(MeanSpec::min().to_string(), "min");
        assert_eq!(
            MeanSpec::weighted_arithmetic(0.25).unwrap().to_string(),
            "weighted_arithmetic(0.25)"
        );
    }

    fn arithmetic_table() -> TableMean {
        let nodes = [0.0, 1.0, 2.0, 4.0];
        let mut triples = Vec::new();
        for &x in &nodes {
            for &y in &nodes {
                triples.push((x, y, 0.5 * (x + y)));
            }
        }
        TableMean::from_triples(&triples).unwrap()
    }

    #[test]
    fn table_interpolates_bilinearly() {
        let m = MeanSpec::table(arithmetic_table());
        assert_eq!(m.domain(), Interval::closed(0.0, 4.0).unwrap());
        assert!((m.eval(1.5, 3.0).unwrap() - 2.25).abs() < 1e-15);
        assert_eq!(m.eval(3.0, 3.0).unwrap(), 3.0);
        assert!(m.eval(5.0, 1.0).is_err());
        let MeanKind::Table(t) = m.kind() else { unreachable!() };
        assert_eq!(t.clip_count(), 0);
    }

    #[test]
    fn table_clipping_is_counted() {
        let nodes = [0.0, 1.0, 2.0];
        let mut triples = Vec::new();
        for &x in &nodes {
            for &y in &nodes {
                // x + y is not internal
                triples.push((x, y, x + y));
            }
        }
        let m = MeanSpec::table(TableMean::from_triples(&triples).unwrap());
        assert_eq!(m.eval(1.0, 2.0).unwrap(), 2.0);
        assert_eq!(m.eval(0.5, 1.5).unwrap(), 1.5);
        let MeanKind::Table(t) = m.kind() else { unreachable!() };
        assert_eq!(t.clip_count(), 2);
    }

    #[test]
    fn table_rejects_incomplete_grid() {
        let triples = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.5), (0.0, 1.0, 0.5)];
        assert!(TableMean::from_triples(&triples).is_err());
        let dup = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.5), (0.0, 1.0, 0.5), (0.0, 1.0, 0.5)];
        assert!(TableMean::from_triples(&dup).is_err());
    }
}
