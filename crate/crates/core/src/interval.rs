use std::fmt;

use crate::error::{MeanError, Result};

/// Relative inset applied at open endpoints when a finite sampling box is needed.
pub const OPEN_ENDPOINT_MARGIN: f64 = 1e-6;

/// Width used for the sampling box along an unbounded direction.
pub const UNBOUNDED_SAMPLING_SPAN: f64 = 10.0;

/// A nondegenerate real interval with open or closed endpoints.
///
/// Infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
    lo_open: bool,
    hi_open: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(MeanError::InvalidInterval("NaN endpoint".into()));
        }
        if lo >= hi {
            return Err(MeanError::InvalidInterval(format!(
                "lower endpoint {lo} is not below upper endpoint {hi}"
            )));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(MeanError::InvalidInterval("empty interval".into()));
        }
        Ok(Interval {
            lo,
            hi,
            lo_open: lo_open || lo.is_infinite(),
            hi_open: hi_open || hi.is_infinite(),
        })
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_open: true,
            hi_open: true,
        }
    }

    /// The open half-line (0, ∞).
    pub fn positive() -> Self {
        Interval {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_open: true,
            hi_open: true,
        }
    }

    /// The closed half-line [0, ∞).
    pub fn nonnegative() -> Self {
        Interval {
            lo: 0.0,
            hi: f64::INFINITY,
            lo_open: false,
            hi_open: true,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo_open(&self) -> bool {
        self.lo_open
    }

    pub fn hi_open(&self) -> bool {
        self.hi_open
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi };
        above && below
    }

    pub fn contains_pair(&self, x: f64, y: f64) -> bool {
        self.contains(x) && self.contains(y)
    }

    pub(crate) fn check_pair(&self, x: f64, y: f64) -> Result<()> {
        if self.contains_pair(x, y) {
            Ok(())
        } else {
            Err(MeanError::OutsideDomain {
                x,
                y,
                domain: *self,
            })
        }
    }

    /// True when every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = self.lo > other.lo || (self.lo == other.lo && (self.lo_open || !other.lo_open));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (self.hi_open || !other.hi_open));
        lo_ok && hi_ok
    }

    /// Intersection, or `None` when it is empty or degenerate.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_open) = if self.lo > other.lo {
            (self.lo, self.lo_open)
        } else if other.lo > self.lo {
            (other.lo, other.lo_open)
        } else {
            (self.lo, self.lo_open || other.lo_open)
        };
        let (hi, hi_open) = if self.hi < other.hi {
            (self.hi, self.hi_open)
        } else if other.hi < self.hi {
            (other.hi, other.hi_open)
        } else {
            (self.hi, self.hi_open || other.hi_open)
        };
        Interval::new(lo, hi, lo_open, hi_open).ok()
    }

    /// A finite closed box `[a, b]` inside the interval, used for sampling.
    ///
    /// Unbounded directions are cut at [`UNBOUNDED_SAMPLING_SPAN`] from the
    /// finite endpoint (or from zero); open endpoints are pulled inward by
    /// [`OPEN_ENDPOINT_MARGIN`] times the box width.
    pub fn sampling_box(&self) -> (f64, f64) {
        let (mut a, mut b) = match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo + UNBOUNDED_SAMPLING_SPAN),
            (false, true) => (self.hi - UNBOUNDED_SAMPLING_SPAN, self.hi),
            (false, false) => (-UNBOUNDED_SAMPLING_SPAN, UNBOUNDED_SAMPLING_SPAN),
        };
        let margin = OPEN_ENDPOINT_MARGIN * (b - a);
        if self.lo_open && self.lo.is_finite() {
            a += margin;
        }
        if self.hi_open && self.hi.is_finite() {
            b -= margin;
        }
        (a, b)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        let close = if self.hi_open { ')' } else { ']' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}
