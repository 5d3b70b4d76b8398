//! Markov chain representation of an `r`-of-`s` runs rule.
//!
//! A transient state is the history of the last `s - 1` flag outcomes with at
//! most `r - 1` flags in it. Histories are stored as integers whose most
//! significant bit is the oldest outcome, so numeric order is lexicographic
//! order on the outcome strings. The chart starts from the all-clear history.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::error::{Error, Result};

/// Largest supported window length.
pub const MAX_WINDOW: u8 = 8;

/// Smallest in-control probability accepted by the chain routines.
pub const MIN_P_IN: f64 = 1e-12;
/// Largest in-control probability accepted by the chain routines.
pub const MAX_P_IN: f64 = 1.0 - 1e-12;

/// Signal when at least `r` of the last `s` points fall beyond the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunRule {
    r: u8,
    s: u8,
}

impl RunRule {
    /// The plain Shewhart rule, 1-of-1.
    pub const SHEWHART: RunRule = RunRule { r: 1, s: 1 };

    pub fn new(r: u8, s: u8) -> Result<Self> {
        if r == 0 || r > s {
            return Err(Error::InvalidArgument("runs rule needs 1 <= r <= s"));
        }
        if s > MAX_WINDOW {
            return Err(Error::InvalidArgument("runs rule window is limited to 8"));
        }
        Ok(RunRule { r, s })
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn s(&self) -> u8 {
        self.s
    }
}

impl fmt::Display for RunRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.r, self.s)
    }
}

pub(crate) fn check_p_in(p_in: f64) -> Result<()> {
    if (MIN_P_IN..=MAX_P_IN).contains(&p_in) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("in-control probability must lie in [1e-12, 1 - 1e-12]"))
    }
}

/// Transient part of the absorbing chain for a rule at a given in-control
/// probability.
#[derive(Debug, Clone)]
pub struct RuleChain {
    rule: RunRule,
    p_in: f64,
    states: Vec<u16>,
    // row-major transient transition matrix
    q: Vec<f64>,
    // one-step absorption probability of each state
    exit: Vec<f64>,
}

/// Builds the chain for `rule` when each point stays inside the limit with
/// probability `p_in`.
pub fn build_chain(rule: RunRule, p_in: f64) -> Result<RuleChain> {
    check_p_in(p_in)?;
    let hist_len = u32::from(rule.s - 1);
    let mask: u32 = (1u32 << hist_len) - 1;
    let r = u32::from(rule.r);
    let states: Vec<u16> = (0..=mask)
        .filter(|h| h.count_ones() < r)
        .map(|h| h as u16)
        .collect();
    let k = states.len();
    let index_of = |h: u32| states.binary_search(&(h as u16)).ok();

    let p_out = 1.0 - p_in;
    let mut q = vec![0.0; k * k];
    let mut exit = vec![0.0; k];
    for (i, &h) in states.iter().enumerate() {
        for (outcome, prob) in [(0u32, p_in), (1u32, p_out)] {
            let window = (u32::from(h) << 1) | outcome;
            if window.count_ones() >= r {
                exit[i] += prob;
            } else {
                let j = index_of(window & mask).ok_or(Error::Singular)?;
                q[i * k + j] += prob;
            }
        }
    }
    Ok(RuleChain { rule, p_in, states, q, exit })
}

/// Mean and standard deviation of the run length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLengthMoments {
    pub arl: f64,
    pub sdrl: f64,
    /// `E[RL (RL - 1)]`
    pub second_factorial: f64,
}

impl RuleChain {
    pub fn rule(&self) -> RunRule {
        self.rule
    }

    pub fn p_in(&self) -> f64 {
        self.p_in
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Outcome histories, oldest outcome in the most significant bit.
    pub fn states(&self) -> &[u16] {
        &self.states
    }

    /// Index of the starting (all-clear) state.
    pub fn initial(&self) -> usize {
        0
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.q[from * self.len() + to]
    }

    pub fn exit(&self, from: usize) -> f64 {
        self.exit[from]
    }

    /// `P(RL > t)`.
    pub fn survival(&self, t: u64) -> f64 {
        let mut pi = vec![0.0; self.len()];
        pi[self.initial()] = 1.0;
        for _ in 0..t {
            pi = self.step(&pi);
        }
        pi.iter().sum()
    }

    /// `P(RL = t)` for `t = 1..=t_max`.
    pub fn pmf(&self, t_max: usize) -> Vec<f64> {
        let mut pi = vec![0.0; self.len()];
        pi[self.initial()] = 1.0;
        let mut out = Vec::with_capacity(t_max);
        for _ in 0..t_max {
            out.push(pi.iter().zip(&self.exit).map(|(a, b)| a * b).sum());
            pi = self.step(&pi);
        }
        out
    }

    fn step(&self, pi: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut next = vec![0.0; k];
        for (i, &w) in pi.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (j, slot) in next.iter_mut().enumerate() {
                *slot += w * self.q[i * k + j];
            }
        }
        next
    }

    /// Initial distribution over the transient states.
    pub fn init(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v[self.initial()] = 1.0;
        v
    }

    /// Exact run-length moments from the fundamental matrix.
    pub fn moments(&self) -> Result<RunLengthMoments> {
        solve_moments(&self.q, &self.exit, self.len(), self.initial())
    }
}

/// Run-length moments of an arbitrary absorbing chain given its transient
/// block `q` (row-major, `k × k`) and starting state. Absorption
/// probabilities are taken as the row deficits of `q`.
pub fn absorbing_moments(q: &[f64], k: usize, init: usize) -> Result<RunLengthMoments> {
    if q.len() != k * k || init >= k {
        return Err(Error::InvalidArgument("q must be k x k and init a valid state"));
    }
    if q.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("transition probabilities must lie in [0, 1]"));
    }
    let exit: Vec<f64> = q.chunks(k).map(|row| (1.0 - row.iter().sum::<f64>()).max(0.0)).collect();
    solve_moments(q, &exit, k, init)
}

fn solve_moments(q: &[f64], exit: &[f64], k: usize, init: usize) -> Result<RunLengthMoments> {
    let lu = Elimination::new(q, exit, k)?;
    let u = lu.solve(vec![1.0; k]);
    let v: Vec<f64> = (0..k).map(|i| (0..k).map(|j| q[i * k + j] * u[j]).sum()).collect();
    let w = lu.solve(v);
    let arl = u[init];
    let second_factorial = 2.0 * w[init];
    let var = (second_factorial + arl - arl * arl).max(0.0);
    Ok(RunLengthMoments { arl, sdrl: var.sqrt(), second_factorial })
}

/// Run-length moments of `rule` at in-control probability `p_in`.
pub fn moments(rule: RunRule, p_in: f64) -> Result<RunLengthMoments> {
    build_chain(rule, p_in)?.moments()
}

/// Gaussian elimination of `I - Q` in which every pivot is rebuilt as
/// absorption mass plus off-diagonal mass (Grassmann-Taksar-Heyman), so no
/// step subtracts nearly equal numbers even as `Q` approaches a stochastic
/// matrix.
struct Elimination {
    k: usize,
    // after elimination: strict upper triangle holds the reduced Q,
    // strict lower triangle holds the multipliers Q_ik / d_k
    a: Vec<f64>,
    pivot: Vec<f64>,
}

impl Elimination {
    fn new(q: &[f64], exit: &[f64], k: usize) -> Result<Self> {
        let mut a = q.to_vec();
        let mut exit = exit.to_vec();
        let mut pivot = vec![0.0; k];
        for m in 0..k {
            let off: f64 = (m + 1..k).map(|j| a[m * k + j]).sum();
            let d = exit[m] + off;
            if !(d > 0.0) {
                return Err(Error::Singular);
            }
            pivot[m] = d;
            for i in m + 1..k {
                let f = a[i * k + m] / d;
                a[i * k + m] = f;
                if f == 0.0 {
                    continue;
                }
                for j in m + 1..k {
                    a[i * k + j] += f * a[m * k + j];
                }
                exit[i] += f * exit[m];
            }
        }
        Ok(Elimination { k, a, pivot })
    }

    fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let k = self.k;
        for m in 0..k {
            for i in m + 1..k {
                let f = self.a[i * k + m];
                if f != 0.0 {
                    b[i] += f * b[m];
                }
            }
        }
        for m in (0..k).rev() {
            let row = &self.a[m * k + m + 1..(m + 1) * k];
            let acc = b[m] + row.iter().zip(&b[m + 1..]).map(|(a, x)| a * x).sum::<f64>();
            b[m] = acc / self.pivot[m];
        }
        b
    }
}
