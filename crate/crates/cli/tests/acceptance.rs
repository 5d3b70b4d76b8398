//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#![allow(clippy::type_complexity)]

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rrmcv::app::run_with;
use rrmcv::report::Cell;
use rrmcv::tables::{build_table, Subset, TableOptions};
use rrmcv_core::design::{design_limits, DesignSpec, DesignedChart, Side};
use rrmcv_core::dist::{mcv_cdf, mcv_quantile};
use rrmcv_core::perf::{delta_index_with, earl, perf_at_shift, shewhart_baseline, side_for_shift, DeltaBase, ShiftRange};
use rrmcv_core::rulechain::absorbing_moments;
use rrmcv_core::simulate::{mc_accumulate, McAccumulator, SimConfig};
use rrmcv_core::{moments, ChartParams, RunRule};
use serde_json::Value;

const ARL0: f64 = 370.4;

// p, gamma0, n, rule, lcl, ucl
const TABLE1: [(u32, f64, u32, (u8, u8), f64, f64); 135] = [
    (2, 0.1, 5, (2, 3), 0.027, 0.146),
    (2, 0.1, 10, (2, 3), 0.053, 0.135),
    (2, 0.1, 15, (2, 3), 0.063, 0.129),
    (2, 0.1, 5, (3, 4), 0.039, 0.124),
    (2, 0.1, 10, (3, 4), 0.063, 0.121),
    (2, 0.1, 15, (3, 4), 0.071, 0.119),
    (2, 0.1, 5, (4, 5), 0.048, 0.111),
    (2, 0.1, 10, (4, 5), 0.07, 0.113),
    (2, 0.1, 15, (4, 5), 0.077, 0.112),
    (2, 0.2, 5, (2, 3), 0.053, 0.296),
    (2, 0.2, 10, (2, 3), 0.104, 0.274),
    (2, 0.2, 15, (2, 3), 0.125, 0.261),
    (2, 0.2, 5, (3, 4), 0.077, 0.251),
    (2, 0.2, 10, (3, 4), 0.125, 0.245),
    (2, 0.2, 15, (3, 4), 0.142, 0.239),
    (2, 0.2, 5, (4, 5), 0.095, 0.223),
    (2, 0.2, 10, (4, 5), 0.139, 0.227),
    (2, 0.2, 15, (4, 5), 0.154, 0.224),
    (2, 0.3, 5, (2, 3), 0.079, 0.457),
    (2, 0.3, 10, (2, 3), 0.155, 0.419),
    (2, 0.3, 15, (2, 3), 0.185, 0.399),
    (2, 0.3, 5, (3, 4), 0.114, 0.382),
    (2, 0.3, 10, (3, 4), 0.185, 0.372),
    (2, 0.3, 15, (3, 4), 0.211, 0.362),
    (2, 0.3, 5, (4, 5), 0.142, 0.337),
    (2, 0.3, 10, (4, 5), 0.206, 0.343),
    (2, 0.3, 15, (4, 5), 0.229, 0.339),
    (2, 0.4, 5, (2, 3), 0.104, 0.633),
    (2, 0.4, 10, (2, 3), 0.203, 0.574),
    (2, 0.4, 15, (2, 3), 0.242, 0.544),
    (2, 0.4, 5, (3, 4), 0.15, 0.52),
    (2, 0.4, 10, (3, 4), 0.243, 0.504),
    (2, 0.4, 15, (3, 4), 0.277, 0.49),
    (2, 0.4, 5, (4, 5), 0.186, 0.455),
    (2, 0.4, 10, (4, 5), 0.272, 0.462),
    (2, 0.4, 15, (4, 5), 0.302, 0.456),
    (2, 0.5, 5, (2, 3), 0.127, 0.831),
    (2, 0.5, 10, (2, 3), 0.248, 0.744),
    (2, 0.5, 15, (2, 3), 0.297, 0.7),
    (2, 0.5, 5, (3, 4), 0.184, 0.667),
    (2, 0.5, 10, (3, 4), 0.299, 0.643),
    (2, 0.5, 15, (3, 4), 0.342, 0.623),
    (2, 0.5, 5, (4, 5), 0.229, 0.576),
    (2, 0.5, 10, (4, 5), 0.335, 0.584),
    (2, 0.5, 15, (4, 5), 0.373, 0.577),
    (3, 0.1, 5, (2, 3), 0.014, 0.128),
    (3, 0.1, 10, (2, 3), 0.047, 0.129),
    (3, 0.1, 15, (2, 3), 0.059, 0.125),
    (3, 0.1, 5, (3, 4), 0.024, 0.106),
    (3, 0.1, 10, (3, 4), 0.057, 0.115),
    (3, 0.1, 15, (3, 4), 0.067, 0.115),
    (3, 0.1, 5, (4, 5), 0.031, 0.093),
    (3, 0.1, 10, (4, 5), 0.063, 0.106),
    (3, 0.1, 15, (4, 5), 0.073, 0.108),
    (3, 0.2, 5, (2, 3), 0.028, 0.259),
    (3, 0.2, 10, (2, 3), 0.092, 0.26),
    (3, 0.2, 15, (2, 3), 0.117, 0.253),
    (3, 0.2, 5, (3, 4), 0.047, 0.213),
    (3, 0.2, 10, (3, 4), 0.112, 0.231),
    (3, 0.2, 15, (3, 4), 0.134, 0.231),
    (3, 0.2, 5, (4, 5), 0.062, 0.185),
    (3, 0.2, 10, (4, 5), 0.126, 0.213),
    (3, 0.2, 15, (4, 5), 0.146, 0.216),
    (3, 0.3, 5, (2, 3), 0.041, 0.395),
    (3, 0.3, 10, (2, 3), 0.137, 0.397),
    (3, 0.3, 15, (2, 3), 0.173, 0.385),
    (3, 0.3, 5, (3, 4), 0.069, 0.322),
    (3, 0.3, 10, (3, 4), 0.166, 0.35),
    (3, 0.3, 15, (3, 4), 0.199, 0.349),
    (3, 0.3, 5, (4, 5), 0.092, 0.279),
    (3, 0.3, 10, (4, 5), 0.187, 0.321),
    (3, 0.3, 15, (4, 5), 0.217, 0.326),
    (3, 0.4, 5, (2, 3), 0.054, 0.539),
    (3, 0.4, 10, (2, 3), 0.179, 0.541),
    (3, 0.4, 15, (2, 3), 0.227, 0.524),
    (3, 0.4, 5, (3, 4), 0.09, 0.434),
    (3, 0.4, 10, (3, 4), 0.218, 0.472),
    (3, 0.4, 15, (3, 4), 0.262, 0.47),
    (3, 0.4, 5, (4, 5), 0.121, 0.372),
    (3, 0.4, 10, (4, 5), 0.246, 0.431),
    (3, 0.4, 15, (4, 5), 0.286, 0.438),
    (3, 0.5, 5, (2, 3), 0.065, 0.692),
    (3, 0.5, 10, (2, 3), 0.219, 0.695),
    (3, 0.5, 15, (2, 3), 0.278, 0.67),
    (3, 0.5, 5, (3, 4), 0.11, 0.547),
    (3, 0.5, 10, (3, 4), 0.267, 0.599),
    (3, 0.5, 15, (3, 4), 0.322, 0.596),
    (3, 0.5, 5, (4, 5), 0.148, 0.465),
    (3, 0.5, 10, (4, 5), 0.303, 0.543),
    (3, 0.5, 15, (4, 5), 0.352, 0.551),
    (4, 0.1, 5, (2, 3), 0.002, 0.104),
    (4, 0.1, 10, (2, 3), 0.04, 0.122),
    (4, 0.1, 15, (2, 3), 0.055, 0.121),
    (4, 0.1, 5, (3, 4), 0.007, 0.081),
    (4, 0.1, 10, (3, 4), 0.05, 0.108),
    (4, 0.1, 15, (3, 4), 0.063, 0.111),
    (4, 0.1, 5, (4, 5), 0.011, 0.067),
    (4, 0.1, 10, (4, 5), 0.057, 0.099),
    (4, 0.1, 15, (4, 5), 0.069, 0.104),
    (4, 0.2, 5, (2, 3), 0.005, 0.208),
    (4, 0.2, 10, (2, 3), 0.08, 0.246),
    (4, 0.2, 15, (2, 3), 0.109, 0.245),
    (4, 0.2, 5, (3, 4), 0.013, 0.162),
    (4, 0.2, 10, (3, 4), 0.099, 0.217),
    (4, 0.2, 15, (3, 4), 0.126, 0.222),
    (4, 0.2, 5, (4, 5), 0.023, 0.133),
    (4, 0.2, 10, (4, 5), 0.113, 0.199),
    (4, 0.2, 15, (4, 5), 0.138, 0.208),
    (4, 0.3, 5, (2, 3), 0.007, 0.314),
    (4, 0.3, 10, (2, 3), 0.118, 0.373),
    (4, 0.3, 15, (2, 3), 0.161, 0.371),
    (4, 0.3, 5, (3, 4), 0.019, 0.242),
    (4, 0.3, 10, (3, 4), 0.146, 0.327),
    (4, 0.3, 15, (3, 4), 0.187, 0.335),
    (4, 0.3, 5, (4, 5), 0.033, 0.199),
    (4, 0.3, 10, (4, 5), 0.167, 0.299),
    (4, 0.3, 15, (4, 5), 0.204, 0.313),
    (4, 0.4, 5, (2, 3), 0.009, 0.421),
    (4, 0.4, 10, (2, 3), 0.154, 0.506),
    (4, 0.4, 15, (2, 3), 0.211, 0.503),
    (4, 0.4, 5, (3, 4), 0.025, 0.321),
    (4, 0.4, 10, (3, 4), 0.192, 0.44),
    (4, 0.4, 15, (3, 4), 0.245, 0.451),
    (4, 0.4, 5, (4, 5), 0.044, 0.262),
    (4, 0.4, 10, (4, 5), 0.219, 0.399),
    (4, 0.4, 15, (4, 5), 0.269, 0.418),
    (4, 0.5, 5, (2, 3), 0.011, 0.529),
    (4, 0.5, 10, (2, 3), 0.188, 0.645),
    (4, 0.5, 15, (2, 3), 0.259, 0.641),
    (4, 0.5, 5, (3, 4), 0.031, 0.399),
    (4, 0.5, 10, (3, 4), 0.234, 0.553),
    (4, 0.5, 15, (3, 4), 0.301, 0.569),
    (4, 0.5, 5, (4, 5), 0.053, 0.324),
    (4, 0.5, 10, (4, 5), 0.268, 0.5),
    (4, 0.5, 15, (4, 5), 0.331, 0.525),
];

// p, gamma0, n, rule, tau, arl1, sdrl1
const ARL_CELLS: [(u32, f64, u32, (u8, u8), f64, f64, f64); 31] = [
    (2, 0.1, 5, (2, 3), 0.5, 14.2, 12.6),
    (4, 0.5, 15, (4, 5), 1.5, 7.0, 3.8),
    (2, 0.1, 15, (3, 4), 1.5, 4.0, 1.6),
    (2, 0.2, 10, (4, 5), 1.25, 16.1, 13.0),
    (2, 0.2, 5, (2, 3), 1.1, 111.9, 110.1),
    (2, 0.3, 15, (3, 4), 0.9, 64.5, 61.8),
    (2, 0.3, 10, (4, 5), 0.75, 13.7, 10.5),
    (2, 0.4, 5, (2, 3), 0.5, 16.0, 14.4),
    (2, 0.4, 15, (3, 4), 1.5, 4.9, 2.5),
    (2, 0.5, 10, (4, 5), 1.25, 22.0, 18.7),
    (2, 0.5, 5, (2, 3), 1.1, 129.7, 127.9),
    (3, 0.1, 15, (3, 4), 0.9, 63.5, 60.8),
    (3, 0.1, 10, (4, 5), 0.75, 14.6, 11.4),
    (3, 0.2, 5, (2, 3), 0.5, 33.4, 31.7),
    (3, 0.2, 15, (3, 4), 1.5, 4.4, 2.0),
    (3, 0.3, 10, (4, 5), 1.25, 19.7, 16.4),
    (3, 0.3, 5, (2, 3), 1.1, 135.1, 133.2),
    (3, 0.4, 15, (3, 4), 0.9, 74.0, 71.3),
    (3, 0.4, 10, (4, 5), 0.75, 17.3, 14.1),
    (3, 0.5, 5, (2, 3), 0.5, 38.3, 36.6),
    (3, 0.5, 15, (3, 4), 1.5, 5.8, 3.4),
    (4, 0.1, 10, (4, 5), 1.25, 19.7, 16.5),
    (4, 0.1, 5, (2, 3), 1.1, 161.2, 159.4),
    (4, 0.2, 15, (3, 4), 0.9, 71.1, 68.4),
    (4, 0.2, 10, (4, 5), 0.75, 18.2, 15.0),
    (4, 0.3, 5, (2, 3), 0.5, 104.8, 103.0),
    (4, 0.3, 15, (3, 4), 1.5, 5.0, 2.6),
    (4, 0.4, 10, (4, 5), 1.25, 25.0, 21.7),
    (4, 0.4, 5, (2, 3), 1.1, 173.9, 172.0),
    (4, 0.5, 15, (3, 4), 0.9, 85.8, 83.1),
    (4, 0.5, 10, (4, 5), 0.75, 22.9, 19.6),
];

// p, gamma0, n, rule, tau, delta_a
const DELTA_A_CELLS: [(u32, f64, u32, (u8, u8), f64, i64); 15] = [
    (2, 0.1, 5, (2, 3), 0.5, 71),
    (2, 0.1, 10, (2, 3), 0.75, 59),
    (2, 0.2, 15, (3, 4), 0.5, -51),
    (2, 0.3, 5, (4, 5), 1.5, -19),
    (2, 0.4, 10, (2, 3), 1.25, 20),
    (2, 0.5, 15, (3, 4), 1.1, 28),
    (3, 0.1, 5, (4, 5), 0.9, 36),
    (3, 0.2, 10, (2, 3), 0.75, 58),
    (3, 0.3, 15, (3, 4), 0.5, -24),
    (3, 0.4, 5, (4, 5), 1.5, -20),
    (3, 0.5, 10, (2, 3), 1.25, 21),
    (4, 0.1, 15, (3, 4), 1.1, 26),
    (4, 0.2, 5, (4, 5), 0.9, 22),
    (4, 0.3, 10, (2, 3), 0.75, 56),
    (4, 0.4, 15, (3, 4), 0.5, 3),
];

// p, gamma0, n, rule, decreasing range, earl
const EARL_CELLS: [(u32, f64, u32, (u8, u8), bool, f64); 12] = [
    (2, 0.1, 5, (2, 3), true, 101.8),
    (2, 0.1, 5, (2, 3), false, 29.4),
    (2, 0.1, 15, (2, 3), true, 33.0),
    (2, 0.3, 5, (3, 4), false, 32.6),
    (2, 0.5, 10, (4, 5), true, 40.1),
    (2, 0.2, 15, (2, 3), false, 13.7),
    (3, 0.1, 5, (3, 4), true, 107.0),
    (3, 0.3, 10, (4, 5), false, 21.2),
    (3, 0.5, 15, (2, 3), true, 42.0),
    (3, 0.2, 5, (3, 4), false, 38.9),
    (4, 0.1, 10, (4, 5), true, 41.6),
    (4, 0.3, 15, (2, 3), false, 16.1),
];

type Outcome = Result<String, String>;

fn rule(r: u8, s: u8) -> RunRule {
    RunRule::new(r, s).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn chart(n: u32, p: u32, gamma0: f64, (r, s): (u8, u8), side: Side) -> DesignedChart {
    let spec = DesignSpec::new(ChartParams::new(n, p, gamma0).unwrap(), rule(r, s), ARL0).unwrap();
    design_limits(&spec, side).unwrap()
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Num(v, _) => *v,
        other => panic!("expected a number, got {other:?}"),
    }
}

fn check(failures: Vec<String>, ok: String) -> Outcome {
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(failures.join("; "))
    }
}

fn table_one_limits() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let table = pool.install(|| build_table(1, &Subset::default(), &TableOptions::default())).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    if table.rows.len() != TABLE1.len() {
        failures.push(format!("{} rows", table.rows.len()));
    }
    let mut worst: f64 = 0.0;
    for &(p, g, n, (r, s), lcl, ucl) in &TABLE1 {
        let row = table.rows.iter().find(|row| {
            num(&row[1]) == g
                && row[0] == Cell::Int(p.into())
                && row[2] == Cell::Int(n.into())
                && row[3] == Cell::text(rule(r, s))
        });
        let Some(row) = row else {
            failures.push(format!("missing p={p} gamma0={g} n={n} {r}/{s}"));
            continue;
        };
        for (got, want) in [(num(&row[4]), lcl), (num(&row[5]), ucl)] {
            worst = worst.max((got - want).abs());
            if (got - want).abs() > 5e-4 {
                failures.push(format!("p={p} gamma0={g} n={n} {r}/{s}: {got:.5} vs {want}"));
            }
        }
    }
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("took {elapsed:?}"));
    }
    check(failures, format!("270 limits, max error {worst:.1e}, {:.1}s on one thread", elapsed.as_secs_f64()))
}

fn arl_cells() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for &(p, g, n, rr, tau, arl, sdrl) in &ARL_CELLS {
        let rep = perf_at_shift(&chart(n, p, g, rr, side_for_shift(tau)), tau).unwrap();
        let (a, s) = (rep.arl1.unwrap(), rep.sdrl1.unwrap());
        worst = worst.max((a - arl).abs()).max((s - sdrl).abs());
        if (a - arl).abs() > 0.2 || (s - sdrl).abs() > 0.2 {
            failures.push(format!("p={p} gamma0={g} n={n} {rr:?} tau={tau}: ({a:.2}, {s:.2}) vs ({arl}, {sdrl})"));
        }
    }
    check(failures, format!("{} cells, max error {worst:.3}", ARL_CELLS.len()))
}

fn delta_a_cells() -> Outcome {
    let mut failures = Vec::new();
    let mut exact = 0;
    for &(p, g, n, rr, tau, want) in &DELTA_A_CELLS {
        let side = side_for_shift(tau);
        let c = chart(n, p, g, rr, side);
        let arl = perf_at_shift(&c, tau).unwrap().arl1.unwrap();
        let base = shewhart_baseline(&c.spec.params, side, ARL0, tau).unwrap();
        let got = delta_index_with(base, arl, DeltaBase::Baseline).unwrap().round() as i64;
        if got == want {
            exact += 1;
        }
        if (got - want).abs() > 1 {
            failures.push(format!("p={p} gamma0={g} n={n} {rr:?} tau={tau}: {got} vs {want}"));
        }
    }
    check(failures, format!("{} cells, {exact} exact", DELTA_A_CELLS.len()))
}

fn earl_cells() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for &(p, g, n, rr, decreasing, want) in &EARL_CELLS {
        let range = if decreasing { ShiftRange::decreasing() } else { ShiftRange::increasing() };
        let got = earl(&chart(n, p, g, rr, range.side()), &range).unwrap().earl.unwrap();
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 0.3 {
            failures.push(format!("p={p} gamma0={g} n={n} {rr:?} {}: {got:.2} vs {want}", range));
        }
    }
    check(failures, format!("{} cells, max error {worst:.3}", EARL_CELLS.len()))
}

fn worked_example() -> Outcome {
    let input = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/table10_summary.csv");
    let input = input.to_str().unwrap();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let args = [
        "rrmcv", "monitor", "--input", input, "--rule", "1/1", "--rule", "2/3", "--rule", "3/4", "--rule", "4/5",
        "--gamma0", "0.089115", "--n", "5", "--side", "upper", "--format", "json",
    ];
    let code = run_with(args, &mut out, &mut err);
    if code != 0 {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    let v: Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let want = [(0.1691, None), (0.1296, Some(5)), (0.1106, Some(6)), (0.0986, Some(4))];
    let mut summary = Vec::new();
    for (report, (limit, signal)) in v.as_array().unwrap().iter().zip(want) {
        let got = report["limit"].as_f64().unwrap();
        let at = report["signal_at"].as_u64();
        let name = report["rule"].as_str().unwrap().to_string();
        if (got - limit).abs() > 5e-4 {
            failures.push(format!("{name} limit {got:.5} vs {limit}"));
        }
        if at != signal {
            failures.push(format!("{name} signal {at:?} vs {signal:?}"));
        }
        summary.push(format!("{name}: {got:.4} -> {}", at.map_or("none".to_string(), |t| t.to_string())));
    }
    check(failures, summary.join(", "))
}

fn geometric_closed_form() -> Outcome {
    let mut failures = Vec::new();
    for p in [0.5, 0.9, 0.99, 0.9973] {
        let m = moments(RunRule::SHEWHART, p).unwrap();
        let arl = 1.0 / (1.0 - p);
        let sdrl = p.sqrt() / (1.0 - p);
        if rel(m.arl, arl) > 1e-12 || rel(m.sdrl, sdrl) > 1e-12 {
            failures.push(format!("p_in={p}: ({}, {}) vs ({arl}, {sdrl})", m.arl, m.sdrl));
        }
    }
    check(failures, "4 probabilities within 1e-12".into())
}

fn markov_vs_simulation() -> Outcome {
    let start = Instant::now();
    let cells: Vec<((u8, u8), f64)> =
        [(2, 3), (3, 4), (4, 5)].into_iter().flat_map(|rr| [0.9, 0.99, 0.9973].map(|p| (rr, p))).collect();
    let results: Vec<(f64, f64, f64)> = cells
        .par_iter()
        .enumerate()
        .map(|(k, &((r, s), p))| {
            let cfg = SimConfig::new(rule(r, s), p, 100_000, 20_240 + k as u64).unwrap();
            let chunks: Vec<McAccumulator> =
                (0..100u64).into_par_iter().map(|c| mc_accumulate(&cfg, c * 1000, (c + 1) * 1000).unwrap()).collect();
            let mut acc = McAccumulator::default();
            for c in &chunks {
                acc.merge(c).unwrap();
            }
            let est = acc.estimate().unwrap();
            (moments(rule(r, s), p).unwrap().arl, est.arl, est.arl_se)
        })
        .collect();
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (&((r, s), p), &(exact, mc, se)) in cells.iter().zip(&results) {
        let z = (mc - exact) / se;
        worst = worst.max(z.abs());
        if z.abs() > 3.0 {
            failures.push(format!("{r}/{s} at {p}: markov {exact:.6e}, mc {mc:.6e} +- {se:.3e}"));
        }
    }
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("took {elapsed:?}"));
    }
    check(failures, format!("9 cells, max |z| {worst:.2}, {:.1}s", elapsed.as_secs_f64()))
}

// transient block of the published 2-of-3 chain; the third state starts
fn published_two_of_three(p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    vec![0.0, 0.0, p, p, 0.0, 0.0, 0.0, q, p]
}

// published 3-of-4 chain; the seventh state starts
fn published_three_of_four(p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    #[rustfmt::skip]
    let m = vec![
        0.0, 0.0, p,   0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, p,   0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, q,   p,
        p,   0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, q,   p,   0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, q,   p,   0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, q,   p,
    ];
    m
}

fn published_matrices() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    // different stream from the unit test sweep
    let mut x: u64 = 0x2545_f491_4f6c_dd1d;
    for _ in 0..1000 {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        let p = 1e-6 + (1.0 - 2e-6) * ((x >> 11) as f64 / (1u64 << 53) as f64);
        for (rr, q, k, init) in [((2, 3), published_two_of_three(p), 3, 2), ((3, 4), published_three_of_four(p), 7, 6)] {
            let ours = moments(rule(rr.0, rr.1), p).unwrap();
            let theirs = absorbing_moments(&q, k, init).unwrap();
            let e = rel(ours.arl, theirs.arl).max(rel(ours.sdrl, theirs.sdrl));
            worst = worst.max(e);
            if e > 1e-12 {
                failures.push(format!("{rr:?} at {p}: {e:.2e}"));
            }
        }
    }
    check(failures, format!("2000 comparisons, max relative error {worst:.1e}"))
}

fn round_trips() -> Outcome {
    let alphas = [1e-6, 0.00135, 0.0027, 0.05, 0.25, 0.5, 0.75, 0.95, 0.9973, 0.99865, 1.0 - 1e-6];
    let mut taus = vec![1.0];
    taus.extend([0.5, 0.75, 0.9, 1.1, 1.25, 1.5]);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut max_delta: f64 = 0.0;
    let mut count = 0;
    for p in [2, 3, 4] {
        for g in [0.1, 0.2, 0.3, 0.4, 0.5] {
            for n in [5, 10, 15] {
                let params = ChartParams::new(n, p, g).unwrap();
                for &tau in &taus {
                    let delta = f64::from(n) / (tau * g * tau * g);
                    max_delta = max_delta.max(delta);
                    for &a in &alphas {
                        let x = mcv_quantile(a, &params, delta).unwrap();
                        let back = mcv_cdf(x, &params, delta).unwrap();
                        worst = worst.max((back - a).abs());
                        count += 1;
                        if (back - a).abs() > 1e-8 {
                            failures.push(format!("p={p} gamma0={g} n={n} delta={delta}: cdf(q({a})) = {back}"));
                        }
                    }
                }
            }
        }
    }
    check(failures, format!("{count} points up to delta {max_delta:.0}, max error {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Table 1 limits", table_one_limits),
        ("ARL/SDRL spot cells", arl_cells),
        ("Delta_A spot cells", delta_a_cells),
        ("EARL spot cells", earl_cells),
        ("worked Phase II example", worked_example),
        ("Shewhart chain vs geometric law", geometric_closed_form),
        ("Markov ARL vs Monte Carlo", markov_vs_simulation),
        ("generic chain vs published matrices", published_matrices),
        ("cdf(quantile) round trip", round_trips),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
