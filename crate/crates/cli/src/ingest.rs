//! Phase II CSV input.
//!
//! Summary files carry one subgroup per line with columns `t`, `mean_1..p`
//! and the upper triangle `cov_ij` (`i <= j`). Raw files carry `t`, `obs`,
//! `x_1..p`, one observation per line, with consecutive lines sharing `t`
//! forming a subgroup. Columns are located by name; extra columns are
//! ignored.

use std::io::Read;

use rrmcv_core::PhaseIISubgroup;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: String,
    pub subgroup: PhaseIISubgroup,
}

fn parse_err(line: u64, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, msg: msg.into() }
}

fn numbered_columns(headers: &csv::StringRecord, prefix: &str) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 1.. {
        match headers.iter().position(|h| h == format!("{prefix}{k}")) {
            Some(i) => out.push(i),
            None => break,
        }
    }
    out
}

fn field(rec: &csv::StringRecord, idx: usize, line: u64, name: &str) -> Result<f64, CliError> {
    let raw = rec.get(idx).ok_or_else(|| parse_err(line, format!("missing field {name}")))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("{name}: cannot parse {raw:?} as a number")))
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_reader(input)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn map_csv(e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    parse_err(line, e.to_string())
}

/// Reads summary or raw subgroups, detecting the layout from the header.
pub fn read_subgroups<R: Read>(input: R) -> Result<Vec<Sample>, CliError> {
    let mut rdr = reader(input);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(map_csv(e)),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Vec::new());
    }
    let t_col = headers
        .iter()
        .position(|h| h == "t")
        .ok_or_else(|| CliError::Schema("header has no `t` column".into()))?;
    let means = numbered_columns(&headers, "mean_");
    let xs = numbered_columns(&headers, "x_");
    let has_obs = headers.iter().any(|h| h == "obs");
    match (means.is_empty(), xs.is_empty() && !has_obs) {
        (false, false) => Err(CliError::Schema("file mixes summary (mean_*) and raw (obs, x_*) columns".into())),
        (false, true) => read_summary(rdr, &headers, t_col, means),
        (true, false) => read_raw(rdr, t_col, &headers, xs),
        (true, true) => Err(CliError::Schema("header has neither mean_* nor x_* columns".into())),
    }
}

fn read_summary<R: Read>(
    mut rdr: csv::Reader<R>,
    headers: &csv::StringRecord,
    t_col: usize,
    means: Vec<usize>,
) -> Result<Vec<Sample>, CliError> {
    let p = means.len();
    let mut cov_cols = Vec::with_capacity(p * (p + 1) / 2);
    for i in 1..=p {
        for j in i..=p {
            let name = format!("cov_{i}{j}");
            let alt = format!("cov_{i}_{j}");
            let idx = headers
                .iter()
                .position(|h| h == name || h == alt)
                .ok_or_else(|| CliError::Schema(format!("summary header lacks {name}")))?;
            cov_cols.push((i - 1, j - 1, idx, name));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(map_csv)?;
        let line = line_of(&rec);
        let mean = means
            .iter()
            .enumerate()
            .map(|(k, &i)| field(&rec, i, line, &format!("mean_{}", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cov = vec![0.0; p * p];
        for (i, j, idx, name) in &cov_cols {
            let v = field(&rec, *idx, line, name)?;
            cov[i * p + j] = v;
            cov[j * p + i] = v;
        }
        out.push(Sample { t: rec[t_col].to_string(), subgroup: PhaseIISubgroup::Summary { mean, cov } });
    }
    Ok(out)
}

fn read_raw<R: Read>(
    mut rdr: csv::Reader<R>,
    t_col: usize,
    headers: &csv::StringRecord,
    xs: Vec<usize>,
) -> Result<Vec<Sample>, CliError> {
    if xs.is_empty() {
        return Err(CliError::Schema("raw header has no x_* columns".into()));
    }
    if !headers.iter().any(|h| h == "obs") {
        return Err(CliError::Schema("raw header has no `obs` column".into()));
    }
    let p = xs.len();
    let mut out: Vec<Sample> = Vec::new();
    let mut current: Option<(String, Vec<f64>)> = None;
    let flush = |cur: Option<(String, Vec<f64>)>, out: &mut Vec<Sample>| {
        if let Some((t, data)) = cur {
            let n = data.len() / p;
            out.push(Sample { t, subgroup: PhaseIISubgroup::Raw { n, p_dim: p, data } });
        }
    };
    for rec in rdr.records() {
        let rec = rec.map_err(map_csv)?;
        let line = line_of(&rec);
        let t = rec[t_col].to_string();
        if t.is_empty() {
            return Err(parse_err(line, "empty t"));
        }
        let row = xs
            .iter()
            .enumerate()
            .map(|(k, &i)| field(&rec, i, line, &format!("x_{}", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        match &mut current {
            Some((ct, data)) if *ct == t => data.extend(row),
            _ => {
                if out.iter().any(|s| s.t == t) {
                    return Err(parse_err(line, format!("rows of sample {t} are not consecutive")));
                }
                flush(current.take(), &mut out);
                current = Some((t, row));
            }
        }
    }
    flush(current, &mut out);
    Ok(out)
}

/// Reads a precomputed γ̂ column.
pub fn read_gamma_column<R: Read>(input: R, column: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(map_csv)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Vec::new());
    }
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::Schema(format!("no column named {column:?}")))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(map_csv)?;
        let line = line_of(&rec);
        let v = field(&rec, idx, line, column)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(parse_err(line, format!("{column} must be positive, got {v}")));
        }
        out.push(v);
    }
    Ok(out)
}
