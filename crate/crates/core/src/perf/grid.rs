//! Evaluation over a product grid of chart settings.
//!
//! Rows come out ordered by `n`, `p_dim`, `γ0`, rule and then shift, in the
//! order the axes were given. Each `(n, p_dim, γ0, rule)` group designs its
//! charts once and is independent of every other group, so callers may
//! evaluate groups in parallel and concatenate.

use alloc::vec::Vec;

use super::{earl_with, perf_at_shift, side_for_shift, EarlMethod, PerfReport, Shift, ShiftRange};
use crate::design::{design_limits, DesignSpec, DesignedChart, Side, DEFAULT_ARL0};
use crate::dist::ChartParams;
use crate::error::{Error, Result};
use crate::rulechain::RunRule;

#[derive(Debug, Clone, PartialEq)]
pub enum GridShifts {
    Points(Vec<f64>),
    Ranges(Vec<ShiftRange>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub ns: Vec<u32>,
    pub p_dims: Vec<u32>,
    pub gamma0s: Vec<f64>,
    pub rules: Vec<RunRule>,
    pub shifts: GridShifts,
    pub arl0: f64,
    pub earl_method: EarlMethod,
}

impl GridSpec {
    pub fn new(
        ns: Vec<u32>,
        p_dims: Vec<u32>,
        gamma0s: Vec<f64>,
        rules: Vec<RunRule>,
        shifts: GridShifts,
    ) -> Self {
        GridSpec {
            ns,
            p_dims,
            gamma0s,
            rules,
            shifts,
            arl0: DEFAULT_ARL0,
            earl_method: EarlMethod::default(),
        }
    }

    fn shift_count(&self) -> usize {
        match &self.shifts {
            GridShifts::Points(v) => v.len(),
            GridShifts::Ranges(v) => v.len(),
        }
    }

    /// One entry per `(n, p_dim, γ0, rule)` combination, in row order.
    pub fn groups(&self) -> Vec<GridGroup> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &p_dim in &self.p_dims {
                for &gamma0 in &self.gamma0s {
                    for &rule in &self.rules {
                        out.push(GridGroup { n, p_dim, gamma0, rule });
                    }
                }
            }
        }
        out
    }

    /// Rows of one group. Errors are stored per row.
    pub fn evaluate(&self, group: &GridGroup) -> Vec<GridRow> {
        let design = |side: Side| -> Result<DesignedChart> {
            let params = ChartParams::new(group.n, group.p_dim, group.gamma0)?;
            let spec = DesignSpec::new(params, group.rule, self.arl0)?;
            design_limits(&spec, side)
        };
        let sides_needed = |side: Side| match &self.shifts {
            GridShifts::Points(v) => v.iter().any(|&t| side_for_shift(t) == side),
            GridShifts::Ranges(v) => v.iter().any(|r| r.side() == side),
        };
        let lower = sides_needed(Side::Lower).then(|| design(Side::Lower));
        let upper = sides_needed(Side::Upper).then(|| design(Side::Upper));
        let chart_for = |side: Side| -> &Result<DesignedChart> {
            match side {
                Side::Lower => lower.as_ref().expect("lower chart designed"),
                Side::Upper => upper.as_ref().expect("upper chart designed"),
            }
        };

        let row = |side: Side, shift: Shift, eval: &dyn Fn(&DesignedChart) -> Result<PerfReport>| {
            let chart = chart_for(side);
            GridRow {
                n: group.n,
                p_dim: group.p_dim,
                gamma0: group.gamma0,
                rule: group.rule,
                side,
                shift,
                limit: chart.as_ref().ok().map(|c| c.limit),
                result: chart.clone().and_then(|c| eval(&c)),
            }
        };
        match &self.shifts {
            GridShifts::Points(taus) => taus
                .iter()
                .map(|&tau| row(side_for_shift(tau), Shift::Point(tau), &|c| perf_at_shift(c, tau)))
                .collect(),
            GridShifts::Ranges(ranges) => ranges
                .iter()
                .map(|r| {
                    row(r.side(), Shift::Range(*r), &|c| earl_with(c, r, self.earl_method))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGroup {
    pub n: u32,
    pub p_dim: u32,
    pub gamma0: f64,
    pub rule: RunRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub n: u32,
    pub p_dim: u32,
    pub gamma0: f64,
    pub rule: RunRule,
    pub side: Side,
    pub shift: Shift,
    pub limit: Option<f64>,
    pub result: Result<PerfReport>,
}

/// Evaluates every cell of `spec` sequentially.
pub fn table_grid(spec: &GridSpec) -> Result<Vec<GridRow>> {
    if spec.groups().is_empty() || spec.shift_count() == 0 {
        return Err(Error::InvalidArgument("grid has no cells"));
    }
    Ok(spec.groups().iter().flat_map(|g| spec.evaluate(g)).collect())
}
