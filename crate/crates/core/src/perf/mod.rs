//! Out-of-control performance: run-length moments after a shift of the MCV
//! from `γ0` to `τ γ0`, averages over a range of shifts, and comparison
//! indices.

use core::fmt;

use num_traits::Float;

use crate::design::{design_limits, p_in_of_limit, DesignSpec, DesignedChart, Side};
use crate::dist::ChartParams;
use crate::error::{Error, Result};
use crate::rulechain::{moments, RunLengthMoments, RunRule};

pub mod grid;
mod quadrature;

pub use quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `[a, b]` inside `(0, 1]`
    Decreasing,
    /// `[a, b]` inside `[1, ∞)`
    Increasing,
}

/// A range of shift multipliers with a uniform prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRange {
    a: f64,
    b: f64,
    direction: Direction,
}

impl ShiftRange {
    pub fn new(a: f64, b: f64, direction: Direction) -> Result<Self> {
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::InvalidArgument("shift range needs 0 < a < b < inf"));
        }
        let ok = match direction {
            Direction::Decreasing => b <= 1.0,
            Direction::Increasing => a >= 1.0,
        };
        if !ok {
            return Err(Error::InvalidArgument(
                "decreasing ranges must end at or below 1, increasing ranges start at or above 1",
            ));
        }
        Ok(ShiftRange { a, b, direction })
    }

    /// `[0.5, 1)`
    pub fn decreasing() -> Self {
        ShiftRange { a: 0.5, b: 1.0, direction: Direction::Decreasing }
    }

    /// `(1, 2]`
    pub fn increasing() -> Self {
        ShiftRange { a: 1.0, b: 2.0, direction: Direction::Increasing }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// The chart side that watches this range.
    pub fn side(&self) -> Side {
        match self.direction {
            Direction::Decreasing => Side::Lower,
            Direction::Increasing => Side::Upper,
        }
    }
}

impl fmt::Display for ShiftRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open_left = self.a == 1.0;
        let open_right = self.b == 1.0;
        write!(
            f,
            "{}{},{}{}",
            if open_left { '(' } else { '[' },
            self.a,
            self.b,
            if open_right { ')' } else { ']' }
        )
    }
}

/// A single shift or a range of shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shift {
    Point(f64),
    Range(ShiftRange),
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shift::Point(t) => write!(f, "{t}"),
            Shift::Range(r) => write!(f, "{r}"),
        }
    }
}

/// The side whose chart is evaluated at shift `tau`: lower below 1,
/// upper otherwise.
pub fn side_for_shift(tau: f64) -> Side {
    if tau < 1.0 {
        Side::Lower
    } else {
        Side::Upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfReport {
    pub tau: Shift,
    pub arl1: Option<f64>,
    pub sdrl1: Option<f64>,
    pub earl: Option<f64>,
    /// Average of SDRL over the range.
    pub esdrl: Option<f64>,
    /// Square root of the average of SDRL² over the range.
    pub esdrl_rms: Option<f64>,
}

/// Run-length moments of `chart` when the MCV has shifted to `tau γ0`.
pub fn shift_moments(chart: &DesignedChart, tau: f64) -> Result<RunLengthMoments> {
    let p = p_in_of_limit(&chart.spec.params, chart.side, chart.limit, tau)?;
    moments(chart.spec.rule, p)
}

pub fn perf_at_shift(chart: &DesignedChart, tau: f64) -> Result<PerfReport> {
    let m = shift_moments(chart, tau)?;
    Ok(PerfReport {
        tau: Shift::Point(tau),
        arl1: Some(m.arl),
        sdrl1: Some(m.sdrl),
        earl: None,
        esdrl: None,
        esdrl_rms: None,
    })
}

/// How a range average is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EarlMethod {
    /// Equally weighted points `a, a + step, ..., b`, leaving out `τ = 1`.
    /// With `step = 0.05` this reproduces the published EARL tables.
    ShiftGrid { step: f64 },
    /// Gauss–Legendre approximation of `(b - a)⁻¹ ∫ f(τ) dτ`.
    GaussLegendre { nodes: usize },
}

impl Default for EarlMethod {
    fn default() -> Self {
        EarlMethod::ShiftGrid { step: 0.05 }
    }
}

/// Averages `f` over `range` under `method`. Returns the weighted mean of
/// each component of `f`.
pub fn range_average<const K: usize, F>(range: &ShiftRange, method: EarlMethod, mut f: F) -> Result<[f64; K]>
where
    F: FnMut(f64) -> Result<[f64; K]>,
{
    let mut acc = [0.0; K];
    match method {
        EarlMethod::ShiftGrid { step } => {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidArgument("grid step must be positive"));
            }
            let width = range.b - range.a;
            let count = (width / step).round();
            if (count * step - width).abs() > 1e-9 * width || count < 1.0 {
                return Err(Error::InvalidArgument("grid step must divide the range width"));
            }
            let mut used = 0u32;
            for k in 0..=(count as u32) {
                let tau = range.a + f64::from(k) * step;
                if (tau - 1.0).abs() < 1e-9 {
                    continue;
                }
                let v = f(tau)?;
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                used += 1;
            }
            for a in acc.iter_mut() {
                *a /= f64::from(used);
            }
        }
        EarlMethod::GaussLegendre { nodes } => {
            if nodes == 0 {
                return Err(Error::InvalidArgument("quadrature needs at least one node"));
            }
            let (x, w) = gauss_legendre(nodes);
            let mid = 0.5 * (range.a + range.b);
            let half = 0.5 * (range.b - range.a);
            for (xi, wi) in x.iter().zip(&w) {
                let v = f(mid + half * xi)?;
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += 0.5 * wi * x;
                }
            }
        }
    }
    Ok(acc)
}

/// EARL and ESDRL over `range` with the default shift grid.
pub fn earl(chart: &DesignedChart, range: &ShiftRange) -> Result<PerfReport> {
    earl_with(chart, range, EarlMethod::default())
}

pub fn earl_with(chart: &DesignedChart, range: &ShiftRange, method: EarlMethod) -> Result<PerfReport> {
    if range.side() != chart.side {
        return Err(Error::InvalidArgument(
            "decreasing ranges need a lower chart and increasing ranges an upper chart",
        ));
    }
    let [arl, sdrl, sdrl_sq] = range_average(range, method, |tau| {
        let m = shift_moments(chart, tau)?;
        Ok([m.arl, m.sdrl, m.sdrl * m.sdrl])
    })?;
    Ok(PerfReport {
        tau: Shift::Range(*range),
        arl1: None,
        sdrl1: None,
        earl: Some(arl),
        esdrl: Some(sdrl),
        esdrl_rms: Some(sdrl_sq.sqrt()),
    })
}

/// Denominator of a percentage improvement index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaBase {
    /// `100 (baseline - candidate) / candidate`
    #[default]
    Candidate,
    /// `100 (baseline - candidate) / baseline`; the convention behind the
    /// published Δ tables.
    Baseline,
}

/// `100 (baseline - candidate) / candidate`. Positive when the candidate
/// signals sooner than the baseline.
pub fn delta_index(baseline: f64, candidate: f64) -> Result<f64> {
    delta_index_with(baseline, candidate, DeltaBase::Candidate)
}

pub fn delta_index_with(baseline: f64, candidate: f64, base: DeltaBase) -> Result<f64> {
    if !(candidate > 0.0 && baseline > 0.0) || !candidate.is_finite() || !baseline.is_finite() {
        return Err(Error::InvalidArgument("run lengths must be positive and finite"));
    }
    let denom = match base {
        DeltaBase::Candidate => candidate,
        DeltaBase::Baseline => baseline,
    };
    Ok(100.0 * (baseline - candidate) / denom)
}

/// ARL at shift `tau` of the Shewhart chart designed for `arl0`.
pub fn shewhart_baseline(params: &ChartParams, side: Side, arl0: f64, tau: f64) -> Result<f64> {
    let spec = DesignSpec::new(*params, RunRule::SHEWHART, arl0)?;
    let chart = design_limits(&spec, side)?;
    let p = p_in_of_limit(params, side, chart.limit, tau)?;
    if !(p < 1.0) {
        return Err(Error::InvalidArgument("limit is never crossed at this shift"));
    }
    Ok(1.0 / (1.0 - p))
}
