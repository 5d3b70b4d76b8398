//! Monte Carlo run lengths of r-of-s rules on a stream of independent flags.
//!
//! Every replication draws from its own Xoshiro256++ stream, seeded through
//! [`replication_seed`] from the configuration seed and the replication
//! index. Results therefore do not depend on how replications are split
//! across threads.
//!
//! Two samplers are provided. [`simulate_run_length`] walks the stream one
//! point at a time and gives up after [`STEP_CAP`] points. [`sample_run_length`]
//! draws the same distribution exactly but jumps over stretches of the stream
//! that cannot produce a signal, so it stays fast when the ARL is in the
//! billions.

use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Binomial, Distribution, Gamma, Geometric, Poisson};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::rulechain::RunRule;

/// Points walked by the step sampler before it reports an overflow.
pub const STEP_CAP: u64 = 100_000_000;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index`: `splitmix64(seed ^ splitmix64(index))`.
pub fn replication_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Generator for replication `index`. The 256-bit state is filled from
/// [`replication_seed`] by SplitMix64, as in `SeedableRng::seed_from_u64`.
pub fn replication_rng(seed: u64, index: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(replication_seed(seed, index))
}

/// Uniform on `[0, 1)` from the top 53 bits of one output.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn check_sim_p_in(p_in: f64) -> Result<()> {
    if p_in > 0.0 && p_in < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("p_in must lie in (0, 1)"))
    }
}

/// Walks the flag stream point by point. A point is flagged when its
/// uniform falls below `1 - p_in`.
pub fn simulate_run_length<R: RngCore + ?Sized>(rule: RunRule, p_in: f64, rng: &mut R) -> Result<u64> {
    check_sim_p_in(p_in)?;
    let u = 1.0 - p_in;
    let mask = (1u16 << rule.s()) - 1;
    let r = u32::from(rule.r());
    let mut history = 0u16;
    for t in 1..=STEP_CAP {
        let flag = uniform(rng) < u;
        history = ((history << 1) | u16::from(flag)) & mask;
        if history.count_ones() >= r {
            return Ok(t);
        }
    }
    Err(Error::Overflow { replication: 0, cap: STEP_CAP })
}

/// Draw-level helpers for the batched sampler.
struct Gaps {
    u: f64,
    /// A gap (non-flagged points between two flags) longer than `s - r`
    /// cannot lie inside a signalling window.
    c: u64,
    geom: Geometric,
    /// `P(gap = k | gap <= s - r)` for `k = 0..c`
    useful_probs: [f64; 8],
    /// `P(short mini-run has length l)` for `l = 0..r-1`
    short_probs: [f64; 8],
    p_long: f64,
}

impl Gaps {
    fn new(rule: RunRule, p_in: f64) -> Result<Self> {
        let u = 1.0 - p_in;
        let c = u64::from(rule.s() - rule.r()) + 1;
        let ln_q = (-u).ln_1p();
        let p_useful = -(ln_q * c as f64).exp_m1();
        let geom = Geometric::new(u).map_err(|_| Error::InvalidArgument("p_in must lie in (0, 1)"))?;
        let mut useful_probs = [0.0; 8];
        let mut q_pow = 1.0;
        for p in useful_probs.iter_mut().take(c as usize) {
            *p = u * q_pow / p_useful;
            q_pow *= 1.0 - u;
        }
        let r1 = usize::from(rule.r()) - 1;
        let p_long = p_useful.powi(r1 as i32);
        let mut short_probs = [0.0; 8];
        if r1 > 0 {
            let mut pw = 1.0;
            for p in short_probs.iter_mut().take(r1) {
                *p = pw * (1.0 - p_useful) / (1.0 - p_long);
                pw *= p_useful;
            }
        }
        Ok(Gaps { u, c, geom, useful_probs, short_probs, p_long })
    }

    fn gap<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        self.geom.sample(rng)
    }

    /// Gap conditioned on being at most `c - 1`, by inversion.
    fn useful_gap<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        let v = uniform(rng);
        let mut acc = 0.0;
        for k in 0..self.c - 1 {
            acc += self.useful_probs[k as usize];
            if v < acc {
                return k;
            }
        }
        self.c - 1
    }
}

/// Counts of `trials` draws from the categorical law `probs`, by sequential
/// binomials.
fn multinomial<R: RngCore + ?Sized, const K: usize>(trials: u64, probs: &[f64], rng: &mut R) -> Result<[u64; K]> {
    let mut out = [0u64; K];
    let mut left = trials;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= p {
            out[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).map_err(|_| Error::InvalidArgument("bad binomial"))?.sample(rng);
        out[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(out)
}

/// Failures before the `k`-th success with success probability `p`, as a
/// Poisson draw with a Gamma-distributed mean.
fn neg_binomial<R: RngCore + ?Sized>(k: u64, p: f64, rng: &mut R) -> Result<u64> {
    if k == 0 {
        return Ok(0);
    }
    let scale = (1.0 - p) / p;
    let lam = Gamma::new(k as f64, scale).map_err(|_| Error::InvalidArgument("bad gamma"))?.sample(rng);
    if !(lam < Poisson::<f64>::MAX_LAMBDA) {
        return Err(Error::Overflow { replication: 0, cap: u64::MAX });
    }
    if lam <= 0.0 {
        return Ok(0);
    }
    let x: f64 = Poisson::new(lam).map_err(|_| Error::InvalidArgument("bad poisson"))?.sample(rng);
    Ok(x as u64)
}

fn add(total: &mut u64, v: u64) -> Result<()> {
    *total = total.checked_add(v).ok_or(Error::Overflow { replication: 0, cap: u64::MAX })?;
    Ok(())
}

/// Exact run-length draw that skips over the stream in blocks.
///
/// Flags are separated by independent geometric gaps. A window of `r` flags
/// needs `r - 1` consecutive gaps that are each at most `s - r`, so only
/// stretches of at least `r - 1` such gaps can end the run. The shorter
/// stretches before each candidate stretch are drawn in aggregate, and the
/// candidate stretch is walked gap by gap.
pub fn sample_run_length<R: RngCore + ?Sized>(rule: RunRule, p_in: f64, rng: &mut R) -> Result<u64> {
    check_sim_p_in(p_in)?;
    let g = Gaps::new(rule, p_in)?;
    let r1 = usize::from(rule.r()) - 1;
    let slack = u64::from(rule.s() - rule.r());
    // position of the first flag
    let mut total = 0u64;
    add(&mut total, g.gap(rng))?;
    add(&mut total, 1)?;
    if r1 == 0 {
        return Ok(total);
    }
    let mut window = [0u64; 8];
    loop {
        // short stretches before the next candidate
        let m = if g.p_long >= 1.0 {
            0
        } else {
            Geometric::new(g.p_long).map_err(|_| Error::InvalidArgument("bad geometric"))?.sample(rng)
        };
        if m == u64::MAX {
            return Err(Error::Overflow { replication: 0, cap: u64::MAX });
        }
        if m > 0 {
            let lengths: [u64; 8] = multinomial(m, &g.short_probs[..r1], rng)?;
            let useful: u64 = lengths.iter().enumerate().map(|(l, &k)| l as u64 * k).sum();
            let values: [u64; 8] = multinomial(useful, &g.useful_probs[..g.c as usize], rng)?;
            let useful_sum: u64 = values.iter().enumerate().map(|(v, &k)| v as u64 * k).sum();
            // long gaps are c plus a fresh geometric
            let long_sum = m
                .checked_mul(g.c)
                .ok_or(Error::Overflow { replication: 0, cap: u64::MAX })?;
            let extra = neg_binomial(m, g.u, rng)?;
            // each gap also advances past its closing flag
            for v in [useful_sum, useful, long_sum, extra, m] {
                add(&mut total, v)?;
            }
        }
        // candidate stretch: r - 1 useful gaps, then keep going while gaps
        // stay useful
        for w in window.iter_mut().take(r1) {
            *w = g.useful_gap(rng);
            add(&mut total, *w + 1)?;
        }
        let mut head = 0usize;
        loop {
            let sum: u64 = window[..r1].iter().sum();
            if sum <= slack {
                return Ok(total);
            }
            let next = g.gap(rng);
            add(&mut total, next)?;
            add(&mut total, 1)?;
            if next >= g.c {
                break;
            }
            window[head] = next;
            head = (head + 1) % r1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMethod {
    /// Point-by-point walk, capped at [`STEP_CAP`].
    Step,
    /// Exact block sampler without a cap.
    #[default]
    Batched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub rule: RunRule,
    pub p_in: f64,
    pub replications: u64,
    pub seed: u64,
    pub method: SimMethod,
}

impl SimConfig {
    pub fn new(rule: RunRule, p_in: f64, replications: u64, seed: u64) -> Result<Self> {
        check_sim_p_in(p_in)?;
        if replications == 0 {
            return Err(Error::InvalidArgument("replications must be at least 1"));
        }
        Ok(SimConfig { rule, p_in, replications, seed, method: SimMethod::default() })
    }

    pub fn with_method(mut self, method: SimMethod) -> Self {
        self.method = method;
        self
    }

    /// Run length of replication `index`.
    pub fn replicate(&self, index: u64) -> Result<u64> {
        let mut rng = replication_rng(self.seed, index);
        let res = match self.method {
            SimMethod::Step => simulate_run_length(self.rule, self.p_in, &mut rng),
            SimMethod::Batched => sample_run_length(self.rule, self.p_in, &mut rng),
        };
        res.map_err(|e| match e {
            Error::Overflow { cap, .. } => Error::Overflow { replication: index, cap },
            other => other,
        })
    }
}

/// Exact integer sums of run lengths, so partial results merge without
/// depending on order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McAccumulator {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub min: Option<u64>,
    pub max: Option<u64>,
}

impl McAccumulator {
    pub fn push(&mut self, rl: u64) -> Result<()> {
        let v = u128::from(rl);
        let overflow = Error::Overflow { replication: self.count, cap: u64::MAX };
        self.sum = self.sum.checked_add(v).ok_or(overflow.clone())?;
        self.sum_sq = self.sum_sq.checked_add(v * v).ok_or(overflow)?;
        self.count += 1;
        self.min = Some(self.min.map_or(rl, |m| m.min(rl)));
        self.max = Some(self.max.map_or(rl, |m| m.max(rl)));
        Ok(())
    }

    pub fn merge(&mut self, other: &McAccumulator) -> Result<()> {
        let overflow = Error::Overflow { replication: self.count, cap: u64::MAX };
        self.sum = self.sum.checked_add(other.sum).ok_or(overflow.clone())?;
        self.sum_sq = self.sum_sq.checked_add(other.sum_sq).ok_or(overflow)?;
        self.count += other.count;
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max = match (self.max, other.max) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        Ok(())
    }

    pub fn estimate(&self) -> Result<McEstimate> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("no replications"));
        }
        let n = self.count as f64;
        let mean = self.sum as f64 / n;
        // centred sum of squares from exact integers: (n Σx² - (Σx)²) / n
        let var = if self.count > 1 {
            let ss = match (self.sum_sq.checked_mul(u128::from(self.count)), self.sum.checked_mul(self.sum)) {
                (Some(a), Some(b)) => (a - b) as f64 / n,
                _ => self.sum_sq as f64 - mean * self.sum as f64,
            };
            (ss / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let sdrl = var.sqrt();
        Ok(McEstimate {
            replications: self.count,
            arl: mean,
            sdrl,
            arl_se: sdrl / n.sqrt(),
            min: self.min.unwrap_or(0),
            max: self.max.unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub replications: u64,
    pub arl: f64,
    /// Sample standard deviation with the n-1 divisor.
    pub sdrl: f64,
    /// `sdrl / √replications`
    pub arl_se: f64,
    pub min: u64,
    pub max: u64,
}

/// Accumulates replications `start..end`.
pub fn mc_accumulate(config: &SimConfig, start: u64, end: u64) -> Result<McAccumulator> {
    let mut acc = McAccumulator::default();
    for i in start..end {
        acc.push(config.replicate(i)?)?;
    }
    Ok(acc)
}

pub fn mc_moments(config: &SimConfig) -> Result<McEstimate> {
    mc_accumulate(config, 0, config.replications)?.estimate()
}

/// Draws a raw generator output, for checking streams against reference
/// vectors.
pub fn first_outputs(seed: u64, index: u64, out: &mut [u64]) {
    let mut rng = replication_rng(seed, index);
    for o in out.iter_mut() {
        *o = rng.random();
    }
}
