//! The published table grids.
//!
//! | table | content |
//! |-------|---------|
//! | 1 | `LCL⁻` and `UCL⁺` |
//! | 2, 3, 4 | `ARL₁`, `SDRL₁` for `p = 2, 3, 4` |
//! | 5 | `Δ_A` against the Shewhart chart |
//! | 6 | `Δ_E` against the Shewhart chart |
//! | 7 | `EARL`, `ESDRL` over `[0.5, 1)` and `(1, 2]` |

use rayon::prelude::*;
use rrmcv_core::design::{design_limits, DesignSpec, DesignedChart, Side};
use rrmcv_core::perf::{
    delta_index_with, earl_with, perf_at_shift, shewhart_baseline, side_for_shift, DeltaBase, EarlMethod,
    ShiftRange,
};
use rrmcv_core::{ChartParams, RunRule};

use crate::error::CliError;
use crate::report::{Cell, Table};

pub const P_DIMS: [u32; 3] = [2, 3, 4];
pub const GAMMA0S: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
pub const NS: [u32; 3] = [5, 10, 15];
pub const RULES: [(u8, u8); 3] = [(2, 3), (3, 4), (4, 5)];
pub const TAUS: [f64; 6] = [0.5, 0.75, 0.9, 1.1, 1.25, 1.5];

/// Axis values kept by `--subset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub p_dims: Vec<u32>,
    pub gamma0s: Vec<f64>,
    pub ns: Vec<u32>,
    pub rules: Vec<RunRule>,
    pub taus: Vec<f64>,
    pub ranges: Vec<ShiftRange>,
}

impl Default for Subset {
    fn default() -> Self {
        Subset {
            p_dims: P_DIMS.to_vec(),
            gamma0s: GAMMA0S.to_vec(),
            ns: NS.to_vec(),
            rules: RULES.iter().map(|&(r, s)| RunRule::new(r, s).expect("valid rule")).collect(),
            taus: TAUS.to_vec(),
            ranges: vec![ShiftRange::decreasing(), ShiftRange::increasing()],
        }
    }
}

pub fn parse_rule(s: &str) -> Result<RunRule, CliError> {
    let bad = || CliError::Args(format!("rule must look like r/s, got {s:?}"));
    let (r, t) = s.split_once('/').ok_or_else(bad)?;
    let r: u8 = r.trim().parse().map_err(|_| bad())?;
    let t: u8 = t.trim().parse().map_err(|_| bad())?;
    RunRule::new(r, t).map_err(|e| CliError::core(format!("--rule {s}"), e))
}

pub fn parse_range(s: &str) -> Result<ShiftRange, CliError> {
    match s.trim() {
        "D" | "d" | "decreasing" | "[0.5,1)" => Ok(ShiftRange::decreasing()),
        "I" | "i" | "increasing" | "(1,2]" => Ok(ShiftRange::increasing()),
        other => {
            let bad = || CliError::Args(format!("range must be D, I or a,b; got {other:?}"));
            let (a, b) = other.split_once(',').ok_or_else(bad)?;
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let dir = if b <= 1.0 {
                rrmcv_core::perf::Direction::Decreasing
            } else {
                rrmcv_core::perf::Direction::Increasing
            };
            ShiftRange::new(a, b, dir).map_err(|e| CliError::core(format!("--range {other}"), e))
        }
    }
}

/// Short label used in table rows: `D` for decreasing ranges, `I` otherwise.
pub fn range_key(r: &ShiftRange) -> &'static str {
    match r.side() {
        Side::Lower => "D",
        Side::Upper => "I",
    }
}

impl Subset {
    /// Parses `key=value` pairs separated by commas. Repeating a key keeps
    /// several values, e.g. `p=2,p=3,rule=2/3`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut out = Subset::default();
        let mut seen: Vec<&str> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| CliError::Args(format!("--subset entries must be key=value, got {part:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let first = !seen.contains(&k);
            let num = |v: &str| -> Result<f64, CliError> {
                v.parse().map_err(|_| CliError::Args(format!("--subset {k}: cannot parse {v:?}")))
            };
            match k {
                "p" | "p_dim" => {
                    if first {
                        out.p_dims.clear();
                    }
                    out.p_dims.push(num(v)? as u32);
                }
                "gamma0" => {
                    if first {
                        out.gamma0s.clear();
                    }
                    out.gamma0s.push(num(v)?);
                }
                "n" => {
                    if first {
                        out.ns.clear();
                    }
                    out.ns.push(num(v)? as u32);
                }
                "rule" => {
                    if first {
                        out.rules.clear();
                    }
                    out.rules.push(parse_rule(v)?);
                }
                "tau" => {
                    if first {
                        out.taus.clear();
                    }
                    out.taus.push(num(v)?);
                }
                "range" => {
                    if first {
                        out.ranges.clear();
                    }
                    out.ranges.push(parse_range(v)?);
                }
                other => return Err(CliError::Args(format!("--subset: unknown key {other:?}"))),
            }
            if first {
                seen.push(k);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub arl0: f64,
    pub earl_method: EarlMethod,
    pub delta_base: DeltaBase,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { arl0: 370.4, earl_method: EarlMethod::default(), delta_base: DeltaBase::Baseline }
    }
}

#[derive(Debug, Clone, Copy)]
struct Group {
    p: u32,
    gamma0: f64,
    n: u32,
    rule: RunRule,
}

fn key_cells(g: &Group) -> Vec<Cell> {
    vec![Cell::Int(g.p.into()), Cell::Num(g.gamma0, 1), Cell::Int(g.n.into()), Cell::text(g.rule)]
}

fn design(g: &Group, rule: RunRule, side: Side, opts: &TableOptions) -> Result<DesignedChart, CliError> {
    let ctx = || format!("n={} p={} gamma0={} rule={}", g.n, g.p, g.gamma0, rule);
    let params = ChartParams::new(g.n, g.p, g.gamma0).map_err(|e| CliError::core(ctx(), e))?;
    let spec = DesignSpec::new(params, rule, opts.arl0).map_err(|e| CliError::core(ctx(), e))?;
    design_limits(&spec, side).map_err(|e| CliError::core(ctx(), e))
}

fn headers(table: u8) -> Vec<&'static str> {
    let mut h = vec!["p", "gamma0", "n", "rule"];
    h.extend_from_slice(match table {
        1 => &["lcl", "ucl"][..],
        2..=4 => &["tau", "side", "limit", "arl1", "sdrl1"],
        5 => &["tau", "arl_shewhart", "arl1", "delta_a"],
        6 => &["range", "earl_shewhart", "earl", "delta_e"],
        _ => &["range", "earl", "esdrl", "esdrl_rms"],
    });
    h
}

fn group_rows(table: u8, g: &Group, subset: &Subset, opts: &TableOptions) -> Result<Vec<Vec<Cell>>, CliError> {
    let ctx = |what: String| move |e| CliError::core(format!("n={} p={} gamma0={} rule={} {what}", g.n, g.p, g.gamma0, g.rule), e);
    let mut rows = Vec::new();
    match table {
        1 => {
            let lo = design(g, g.rule, Side::Lower, opts)?;
            let hi = design(g, g.rule, Side::Upper, opts)?;
            let mut row = key_cells(g);
            row.extend([Cell::Num(lo.limit, 3), Cell::Num(hi.limit, 3)]);
            rows.push(row);
        }
        2..=5 => {
            let mut charts: [Option<DesignedChart>; 2] = [None, None];
            for &tau in &subset.taus {
                let side = side_for_shift(tau);
                let slot = &mut charts[side as usize];
                if slot.is_none() {
                    *slot = Some(design(g, g.rule, side, opts)?);
                }
                let chart = slot.as_ref().expect("designed above");
                let rep = perf_at_shift(chart, tau).map_err(ctx(format!("tau={tau}")))?;
                let arl = rep.arl1.expect("point report has ARL");
                let mut row = key_cells(g);
                row.push(Cell::Num(tau, 2));
                if table == 5 {
                    let params = chart.spec.params;
                    let base = shewhart_baseline(&params, side, opts.arl0, tau).map_err(ctx(format!("tau={tau}")))?;
                    let delta = delta_index_with(base, arl, opts.delta_base).map_err(ctx(format!("tau={tau}")))?;
                    row.extend([Cell::Num(base, 1), Cell::Num(arl, 1), Cell::Num(delta, 0)]);
                } else {
                    row.extend([
                        Cell::text(side),
                        Cell::Num(chart.limit, 4),
                        Cell::Num(arl, 1),
                        Cell::Num(rep.sdrl1.expect("point report has SDRL"), 1),
                    ]);
                }
                rows.push(row);
            }
        }
        _ => {
            for range in &subset.ranges {
                let side = range.side();
                let chart = design(g, g.rule, side, opts)?;
                let rep = earl_with(&chart, range, opts.earl_method).map_err(ctx(format!("range={range}")))?;
                let earl = rep.earl.expect("range report has EARL");
                let mut row = key_cells(g);
                row.push(Cell::text(range_key(range)));
                if table == 6 {
                    let base_chart = design(g, RunRule::SHEWHART, side, opts)?;
                    let base = earl_with(&base_chart, range, opts.earl_method)
                        .map_err(ctx(format!("range={range}")))?
                        .earl
                        .expect("range report has EARL");
                    let delta = delta_index_with(base, earl, opts.delta_base).map_err(ctx(format!("range={range}")))?;
                    row.extend([Cell::Num(base, 1), Cell::Num(earl, 1), Cell::Num(delta, 0)]);
                } else {
                    row.extend([
                        Cell::Num(earl, 1),
                        Cell::Num(rep.esdrl.expect("range report has ESDRL"), 1),
                        Cell::Num(rep.esdrl_rms.expect("range report has ESDRL"), 1),
                    ]);
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Builds table `table` (1 to 7) over `subset`. Groups are evaluated in
/// parallel on the current rayon pool; row order does not depend on it.
pub fn build_table(table: u8, subset: &Subset, opts: &TableOptions) -> Result<Table, CliError> {
    if !(1..=7).contains(&table) {
        return Err(CliError::Args(format!("--table must be 1 to 7, got {table}")));
    }
    let p_dims: Vec<u32> = match table {
        2..=4 => {
            let p = u32::from(table);
            subset.p_dims.iter().copied().filter(|&q| q == p).collect()
        }
        _ => subset.p_dims.clone(),
    };
    let mut groups = Vec::new();
    for &p in &p_dims {
        for &gamma0 in &subset.gamma0s {
            for &n in &subset.ns {
                for &rule in &subset.rules {
                    groups.push(Group { p, gamma0, n, rule });
                }
            }
        }
    }
    let per_group: Vec<Vec<Vec<Cell>>> = groups
        .par_iter()
        .map(|g| group_rows(table, g, subset, opts))
        .collect::<Result<_, _>>()?;
    let mut out = Table::new(headers(table));
    for row in per_group.into_iter().flatten() {
        out.push(row);
    }
    Ok(out)
}
