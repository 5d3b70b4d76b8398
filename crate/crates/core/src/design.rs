//! Control-limit design for a target in-control ARL.
//!
//! The chart's ARL depends on the limit only through the in-control
//! probability `p_in`, so the design first solves the rule's ARL equation for
//! `p_in` and then reads the limit off the MCV quantile function.

use core::fmt;

use num_traits::Float;

use crate::dist::{delta_of, mcv_quantile, mcv_tail, ChartParams, Tail};
use crate::error::{Error, Result};
use crate::rulechain::{check_p_in, moments, RunLengthMoments, RunRule, MAX_P_IN, MIN_P_IN};

/// ARL target used throughout the literature on these charts.
pub const DEFAULT_ARL0: f64 = 370.4;

/// Which one-sided chart: a lower limit watches for decreases of the MCV,
/// an upper limit for increases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Lower,
    Upper,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub params: ChartParams,
    pub rule: RunRule,
    pub arl0: f64,
}

impl DesignSpec {
    pub fn new(params: ChartParams, rule: RunRule, arl0: f64) -> Result<Self> {
        if !(arl0 > 1.0 && arl0.is_finite()) {
            return Err(Error::InvalidArgument("arl0 must be finite and greater than 1"));
        }
        Ok(DesignSpec { params, rule, arl0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignedChart {
    pub spec: DesignSpec,
    pub side: Side,
    /// `LCL⁻` for a lower chart, `UCL⁺` for an upper chart.
    pub limit: f64,
    /// In-control probability of a point falling inside the limit.
    pub p_in_star: f64,
}

/// Probability that a point from a process at MCV `tau γ0` stays inside
/// `limit`.
pub fn p_in_of_limit(params: &ChartParams, side: Side, limit: f64, tau: f64) -> Result<f64> {
    if !(limit > 0.0) {
        return Err(Error::InvalidArgument("limit must be positive"));
    }
    let delta = delta_of(params, tau)?.delta1;
    match side {
        Side::Lower => mcv_tail(limit, params, delta, Tail::Upper),
        Side::Upper => mcv_tail(limit, params, delta, Tail::Lower),
    }
}

const ARL_REL_TOL: f64 = 1e-9;
const MAX_ITER: u32 = 200;

/// The `p_in` at which `rule` has in-control ARL `arl0`.
///
/// ARL rises monotonically from `r` (every point flagged) to infinity as
/// `p_in` goes from 0 to 1. The bisection runs on the flag probability
/// `1 - p_in` with geometric midpoints until the bracket collapses.
pub fn solve_p_in(rule: RunRule, arl0: f64) -> Result<f64> {
    if !(arl0.is_finite() && arl0 > 1.0) {
        return Err(Error::InvalidArgument("arl0 must be finite and greater than 1"));
    }
    if arl0 <= f64::from(rule.r()) {
        return Err(Error::Infeasible("target ARL must exceed r, the earliest possible signal"));
    }
    let p_of = |u: f64| (1.0 - u).clamp(MIN_P_IN, MAX_P_IN);
    let arl_at = |u: f64| moments(rule, p_of(u)).map(|m| m.arl);
    // u is the flag probability; ARL decreases in u
    let mut lo = 1.0 - MAX_P_IN;
    let mut hi = 1.0 - MIN_P_IN;
    if arl_at(lo)? < arl0 {
        return Err(Error::Infeasible("target ARL exceeds the largest ARL representable"));
    }
    if arl_at(hi)? > arl0 {
        return Err(Error::Infeasible("target ARL is below the smallest achievable ARL"));
    }
    // bisect to full precision, then check the contract tolerance
    for _ in 0..MAX_ITER {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if arl_at(mid)? > arl0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = (lo * hi).sqrt();
    if (arl_at(best)? - arl0).abs() <= ARL_REL_TOL * arl0 {
        Ok(p_of(best))
    } else {
        Err(Error::NonConvergence { lo: p_of(hi), hi: p_of(lo) })
    }
}

/// Designs the one-sided chart for `spec`.
pub fn design_limits(spec: &DesignSpec, side: Side) -> Result<DesignedChart> {
    let p_in_star = solve_p_in(spec.rule, spec.arl0)?;
    check_p_in(p_in_star)?;
    let delta = spec.params.delta();
    let limit = match side {
        Side::Lower => mcv_quantile(1.0 - p_in_star, &spec.params, delta)?,
        Side::Upper => mcv_quantile(p_in_star, &spec.params, delta)?,
    };
    Ok(DesignedChart { spec: *spec, side, limit, p_in_star })
}

/// Recomputes the in-control moments from the stored limit.
pub fn verify_design(chart: &DesignedChart) -> Result<RunLengthMoments> {
    let p_in = p_in_of_limit(&chart.spec.params, chart.side, chart.limit, 1.0)?;
    moments(chart.spec.rule, p_in)
}
