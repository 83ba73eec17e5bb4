//! Intervals over the normalized value domain `[0, 1]`: the conditioning
//! covariate, the two interval samplers, decay weighting and the cell
//! intersection map used for patching.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Tolerance used to recognise cell-aligned endpoints.
const ALIGN_EPS: f64 = 1e-12;
/// How far cell-aligned query endpoints are pulled inward before intersecting.
const SHRINK: f64 = 1e-9;

/// Closed sub-range `[lo, hi]` of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const FULL: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > 1.0 || lo > hi {
            return Err(Error::Config(format!(
                "interval [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        (self.hi + self.lo) / 2.0
    }

    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    /// Closed-set intersection test; touching endpoints count.
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Equality up to floating-point noise in the endpoints.
    pub fn approx_eq(&self, other: &Interval) -> bool {
        (self.lo - other.lo).abs() <= ALIGN_EPS && (self.hi - other.hi).abs() <= ALIGN_EPS
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Parses `"lo,hi"`.
impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Config(format!(
                "interval {s:?} must be written as lo,hi"
            )));
        }
        let parse = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| Error::Config(format!("interval bound {p:?} is not a number")))
        };
        Interval::new(parse(parts[0])?, parse(parts[1])?)
    }
}

/// The `(lo, hi)` vector fed to the models.
pub fn encode_covariate(interval: &Interval) -> [f64; 2] {
    [interval.lo, interval.hi]
}

/// Draws intervals of length at least `delta`: `lo ~ U[0, 1 - delta]`, then
/// `hi ~ U[lo + delta, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSampler {
    delta: f64,
}

impl UniformSampler {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Config(format!(
                "delta must lie in [0, 1), got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Interval {
        let lo = rng.random::<f64>() * (1.0 - self.delta);
        let start = lo + self.delta;
        let hi = (start + rng.random::<f64>() * (1.0 - start)).min(1.0);
        Interval { lo, hi }
    }
}

pub fn sample_uniform<R: Rng + ?Sized>(sampler: &UniformSampler, rng: &mut R) -> Interval {
    sampler.sample(rng)
}

/// `L` equal-width cells `[i/L, (i+1)/L]` covering `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePartition {
    cells: Vec<Interval>,
}

impl DiscretePartition {
    pub fn equal(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("partition needs at least one cell".into()));
        }
        let boundary = |i: usize| {
            if i == count {
                1.0
            } else {
                i as f64 / count as f64
            }
        };
        let cells = (0..count)
            .map(|i| Interval {
                lo: boundary(i),
                hi: boundary(i + 1),
            })
            .collect();
        Ok(Self { cells })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Interval] {
        &self.cells
    }

    /// Index of the cell equal to `query`, if any.
    pub fn cell_index(&self, query: &Interval) -> Option<usize> {
        self.cells.iter().position(|c| c.approx_eq(query))
    }

    /// Index of the cell holding `y` under the evaluation convention: upper
    /// boundaries are exclusive except for the last cell.
    pub fn locate(&self, y: f64) -> Option<usize> {
        let last = self.cells.len() - 1;
        self.cells
            .iter()
            .position(|c| c.lo <= y && (y < c.hi || (y <= c.hi && c.hi == self.cells[last].hi)))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Interval {
        self.cells[rng.random_range(0..self.cells.len())]
    }

    fn is_boundary(&self, x: f64) -> bool {
        self.cells
            .iter()
            .any(|c| (c.lo - x).abs() <= ALIGN_EPS || (c.hi - x).abs() <= ALIGN_EPS)
    }
}

pub fn sample_discrete<R: Rng + ?Sized>(partition: &DiscretePartition, rng: &mut R) -> Interval {
    partition.sample(rng)
}

/// Decay rate `nu`; `Infinite` is the exact indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayRate {
    Finite(f64),
    Infinite,
}

impl DecayRate {
    pub fn finite(nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::Config(format!(
                "decay rate must be finite and >= 0, got {nu}"
            )));
        }
        Ok(DecayRate::Finite(nu))
    }
}

impl fmt::Display for DecayRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayRate::Finite(nu) => write!(f, "{nu}"),
            DecayRate::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for DecayRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(DecayRate::Infinite);
        }
        let nu: f64 = s.parse().map_err(|_| {
            Error::Config(format!("decay rate {s:?} is neither a number nor \"inf\""))
        })?;
        DecayRate::finite(nu)
    }
}

/// `exp(-nu * max(0, |y - mid| - half_width))`.
pub fn decay_weight(y: f64, interval: &Interval, rate: DecayRate) -> f64 {
    match rate {
        DecayRate::Infinite => {
            if interval.contains(y) {
                1.0
            } else {
                0.0
            }
        }
        DecayRate::Finite(nu) => {
            if interval.contains(y) {
                return 1.0;
            }
            let excess = ((y - interval.midpoint()).abs() - interval.half_width()).max(0.0);
            if excess == 0.0 {
                1.0
            } else {
                (-nu * excess).exp()
            }
        }
    }
}

/// Product of [`decay_weight`] over every target entry. With an infinite
/// rate this is the indicator that the whole target lies in the interval.
pub fn target_weight(target: &Matrix, interval: &Interval, rate: DecayRate) -> f64 {
    match rate {
        DecayRate::Infinite => {
            if target.as_slice().iter().all(|&y| interval.contains(y)) {
                1.0
            } else {
                0.0
            }
        }
        DecayRate::Finite(_) => target
            .as_slice()
            .iter()
            .map(|&y| decay_weight(y, interval, rate))
            .product(),
    }
}

/// Cells of `partition` that intersect `query`, in ascending order.
///
/// A query equal to a cell returns just that cell. Otherwise query endpoints
/// that coincide with a cell boundary are pulled inward by 1e-9, so a cell
/// that only touches the query at such an endpoint is left out.
pub fn intersecting(partition: &DiscretePartition, query: &Interval) -> Vec<Interval> {
    if let Some(i) = partition.cell_index(query) {
        return vec![partition.cells[i]];
    }
    let mut lo = query.lo;
    let mut hi = query.hi;
    if partition.is_boundary(lo) && lo + SHRINK < hi {
        lo += SHRINK;
    }
    if partition.is_boundary(hi) && hi - SHRINK > lo {
        hi -= SHRINK;
    }
    let probe = Interval { lo, hi };
    partition
        .cells
        .iter()
        .filter(|c| c.intersects(&probe))
        .copied()
        .collect()
}
