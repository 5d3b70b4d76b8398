//! Phase II monitoring: sample MCVs from subgroup data and the r-of-s
//! signalling logic over a stream of plotted points.

use alloc::vec::Vec;

use num_traits::Float;

use crate::design::Side;
use crate::error::{Error, Result};
use crate::rulechain::RunRule;

/// One monitoring sample.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseIISubgroup {
    /// `n` observations of `p_dim` variables, stored row-major.
    Raw { n: usize, p_dim: usize, data: Vec<f64> },
    /// Sample mean and the (n-1 divisor) sample covariance, row-major.
    Summary { mean: Vec<f64>, cov: Vec<f64> },
}

impl PhaseIISubgroup {
    pub fn p_dim(&self) -> usize {
        match self {
            PhaseIISubgroup::Raw { p_dim, .. } => *p_dim,
            PhaseIISubgroup::Summary { mean, .. } => mean.len(),
        }
    }

    /// Mean vector and covariance matrix of the subgroup.
    pub fn moments(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            PhaseIISubgroup::Summary { mean, cov } => {
                let p = mean.len();
                if p == 0 {
                    return Err(Error::InvalidArgument("subgroup has no variables"));
                }
                if cov.len() != p * p {
                    return Err(Error::InvalidArgument("covariance must be p_dim x p_dim"));
                }
                Ok((mean.clone(), cov.clone()))
            }
            PhaseIISubgroup::Raw { n, p_dim, data } => {
                let (n, p) = (*n, *p_dim);
                if p == 0 {
                    return Err(Error::InvalidArgument("subgroup has no variables"));
                }
                if data.len() != n * p {
                    return Err(Error::InvalidArgument("raw data must hold n x p_dim values"));
                }
                if n <= p {
                    return Err(Error::InvalidArgument("subgroup size n must exceed p_dim"));
                }
                let mut mean = alloc::vec![0.0; p];
                for row in data.chunks_exact(p) {
                    for (m, x) in mean.iter_mut().zip(row) {
                        *m += x;
                    }
                }
                for m in mean.iter_mut() {
                    *m /= n as f64;
                }
                let mut cov = alloc::vec![0.0; p * p];
                for row in data.chunks_exact(p) {
                    for i in 0..p {
                        let di = row[i] - mean[i];
                        for j in i..p {
                            cov[i * p + j] += di * (row[j] - mean[j]);
                        }
                    }
                }
                for i in 0..p {
                    for j in i..p {
                        let v = cov[i * p + j] / (n - 1) as f64;
                        cov[i * p + j] = v;
                        cov[j * p + i] = v;
                    }
                }
                Ok((mean, cov))
            }
        }
    }
}

/// Sample MCV `(X̄ᵀ S⁻¹ X̄)^(-1/2)`.
pub fn gamma_hat(subgroup: &PhaseIISubgroup) -> Result<f64> {
    let (mean, cov) = subgroup.moments()?;
    let p = mean.len();
    if mean.iter().chain(&cov).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("subgroup contains non-finite values"));
    }
    for i in 0..p {
        for j in 0..i {
            let (a, b) = (cov[i * p + j], cov[j * p + i]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidArgument("covariance must be symmetric"));
            }
        }
    }
    // Cholesky S = L Lᵀ, then X̄ᵀ S⁻¹ X̄ = |L⁻¹ X̄|²
    let mut l = alloc::vec![0.0; p * p];
    for j in 0..p {
        let mut d = cov[j * p + j];
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if !(d > 0.0) {
            return Err(Error::DegenerateData("covariance is not positive definite"));
        }
        let d = d.sqrt();
        l[j * p + j] = d;
        for i in j + 1..p {
            let mut v = cov[i * p + j];
            for k in 0..j {
                v -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = v / d;
        }
    }
    let mut y = alloc::vec![0.0; p];
    let mut q = 0.0;
    for i in 0..p {
        let mut v = mean[i];
        for k in 0..i {
            v -= l[i * p + k] * y[k];
        }
        y[i] = v / l[i * p + i];
        q += y[i] * y[i];
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::DegenerateData("mean vector is zero relative to the covariance"));
    }
    Ok(q.sqrt().recip())
}

/// Whether `gamma` lies beyond `limit` on the given side. Ties are in control.
pub fn is_flagged(gamma: f64, limit: f64, side: Side) -> bool {
    match side {
        Side::Upper => gamma > limit,
        Side::Lower => gamma < limit,
    }
}

/// Result of feeding one point to a [`RunDetector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointOutcome {
    /// 1-based sample index.
    pub t: u64,
    pub flagged: bool,
    /// True only at the first index where the rule fires.
    pub signal: bool,
}

/// Streaming r-of-s detector holding the last `s` flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDetector {
    rule: RunRule,
    limit: f64,
    side: Side,
    history: u16,
    t: u64,
    signal_at: Option<u64>,
}

impl RunDetector {
    pub fn new(rule: RunRule, limit: f64, side: Side) -> Result<Self> {
        if !(limit > 0.0 && limit.is_finite()) {
            return Err(Error::InvalidArgument("limit must be positive and finite"));
        }
        Ok(RunDetector { rule, limit, side, history: 0, t: 0, signal_at: None })
    }

    pub fn push(&mut self, gamma: f64) -> PointOutcome {
        self.push_flag(is_flagged(gamma, self.limit, self.side))
    }

    /// Feeds a precomputed flag.
    pub fn push_flag(&mut self, flagged: bool) -> PointOutcome {
        let mask = (1u16 << self.rule.s()) - 1;
        self.history = ((self.history << 1) | u16::from(flagged)) & mask;
        self.t += 1;
        let fires = self.history.count_ones() >= u32::from(self.rule.r());
        let signal = fires && self.signal_at.is_none();
        if signal {
            self.signal_at = Some(self.t);
        }
        PointOutcome { t: self.t, flagged, signal }
    }

    pub fn signal_at(&self) -> Option<u64> {
        self.signal_at
    }

    /// Number of points seen so far.
    pub fn len(&self) -> u64 {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        self.t == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalReport {
    pub gamma_hats: Vec<f64>,
    /// 1-based indices of points beyond the limit.
    pub flagged: Vec<u64>,
    pub signal_at: Option<u64>,
    pub rule: RunRule,
    pub limit: f64,
    pub side: Side,
}

pub fn run_signal(gamma_hats: &[f64], rule: RunRule, limit: f64, side: Side) -> Result<SignalReport> {
    let mut det = RunDetector::new(rule, limit, side)?;
    let flagged = gamma_hats
        .iter()
        .map(|&g| det.push(g))
        .filter(|o| o.flagged)
        .map(|o| o.t)
        .collect();
    Ok(SignalReport {
        gamma_hats: gamma_hats.to_vec(),
        flagged,
        signal_at: det.signal_at(),
        rule,
        limit,
        side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_covariance() {
        let g = PhaseIISubgroup::Summary { mean: alloc::vec![1.0, 0.0], cov: alloc::vec![1.0, 0.0, 0.0, 1.0] };
        assert!((gamma_hat(&g).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_covariance() {
        let singular = PhaseIISubgroup::Summary { mean: alloc::vec![1.0, 1.0], cov: alloc::vec![1.0, 1.0, 1.0, 1.0] };
        assert!(matches!(gamma_hat(&singular), Err(Error::DegenerateData(_))));
        let asym = PhaseIISubgroup::Summary { mean: alloc::vec![1.0, 1.0], cov: alloc::vec![1.0, 0.2, 0.1, 1.0] };
        assert!(matches!(gamma_hat(&asym), Err(Error::InvalidArgument(_))));
        let small = PhaseIISubgroup::Raw { n: 2, p_dim: 2, data: alloc::vec![1.0, 2.0, 3.0, 4.0] };
        assert!(matches!(gamma_hat(&small), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn detector_window() {
        let mut d = RunDetector::new(RunRule::new(2, 3).unwrap(), 1.0, Side::Upper).unwrap();
        let outs: Vec<_> = [2.0, 0.0, 0.0, 2.0, 0.0, 2.0, 2.0].iter().map(|&g| d.push(g)).collect();
        assert_eq!(d.signal_at(), Some(6));
        assert_eq!(outs.iter().filter(|o| o.signal).count(), 1);
        assert!(!d.push(1.0).flagged);
    }
}
