//! Random block samplings.
//!
//! `TauNice` draws a subset of exactly `τ` blocks, uniformly over all
//! `C(n, τ)` subsets. `TauIndependent` takes `τ` independent uniform picks
//! with replacement and returns their union, so it may contain fewer than
//! `τ` blocks; it is the cheap parallel stand-in for `TauNice`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default cap on `C(n, τ)` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingKind {
    TauNice,
    TauIndependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingScheme {
    pub kind: SamplingKind,
    pub tau: usize,
}

impl SamplingScheme {
    pub fn new(kind: SamplingKind, tau: usize) -> Self {
        Self { kind, tau }
    }

    pub fn tau_nice(tau: usize) -> Self {
        Self::new(SamplingKind::TauNice, tau)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Sampling("there must be at least one block".into()));
        }
        if self.tau == 0 || self.tau > n {
            return Err(Error::Sampling(format!("tau = {} must lie in [1, {n}]", self.tau)));
        }
        Ok(())
    }

    /// `P(i ∈ Ŝ)`, identical for every block.
    pub fn inclusion_probability(&self, n: usize) -> f64 {
        let n_f = n as f64;
        match self.kind {
            SamplingKind::TauNice => self.tau as f64 / n_f,
            SamplingKind::TauIndependent => 1.0 - (1.0 - 1.0 / n_f).powi(self.tau as i32),
        }
    }
}

/// Seeded sampler producing one block set per call.
///
/// Equal seeds give identical sequences of sets.
#[derive(Debug, Clone)]
pub struct BlockSampler {
    scheme: SamplingScheme,
    n: usize,
    rng: ChaCha8Rng,
    perm: Vec<usize>,
    seen: Vec<bool>,
}

impl BlockSampler {
    pub fn new(scheme: SamplingScheme, n: usize, seed: u64) -> Result<Self> {
        scheme.validate(n)?;
        Ok(Self {
            scheme,
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
            perm: (0..n).collect(),
            seen: vec![false; n],
        })
    }

    /// Stream for worker `index`, derived from a master seed.
    pub fn for_worker(scheme: SamplingScheme, n: usize, master_seed: u64, index: u64) -> Result<Self> {
        let mut seeder = ChaCha8Rng::seed_from_u64(master_seed);
        seeder.set_stream(index + 1);
        Self::new(scheme, n, seeder.random())
    }

    pub fn scheme(&self) -> SamplingScheme {
        self.scheme
    }

    /// Draws the next block set, returned in increasing order.
    pub fn draw(&mut self) -> Vec<usize> {
        let tau = self.scheme.tau;
        let mut set = match self.scheme.kind {
            SamplingKind::TauNice => {
                // Partial Fisher-Yates. `perm` stays a permutation between
                // calls, which keeps every prefix uniformly distributed.
                for k in 0..tau {
                    let j = self.rng.random_range(k..self.n);
                    self.perm.swap(k, j);
                }
                self.perm[..tau].to_vec()
            }
            SamplingKind::TauIndependent => {
                let mut set = Vec::with_capacity(tau);
                for _ in 0..tau {
                    let i = self.rng.random_range(0..self.n);
                    if !self.seen[i] {
                        self.seen[i] = true;
                        set.push(i);
                    }
                }
                for &i in &set {
                    self.seen[i] = false;
                }
                set
            }
        };
        set.sort_unstable();
        set
    }
}

/// `C(n, k)` as a `u64`, saturating on overflow.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Every subset of `{0, …, n-1}` of size `tau`, in lexicographic order.
pub fn enumerate_tau_nice(n: usize, tau: usize) -> Result<Vec<Vec<usize>>> {
    enumerate_tau_nice_capped(n, tau, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_tau_nice_capped(n: usize, tau: usize, cap: u64) -> Result<Vec<Vec<usize>>> {
    SamplingScheme::tau_nice(tau).validate(n)?;
    let count = binomial(n, tau);
    if count > cap {
        return Err(Error::EnumerationCap { n, tau, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut cur: Vec<usize> = (0..tau).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = tau;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if cur[i] < n - tau + i {
                break;
            }
        }
        cur[i] += 1;
        for j in i + 1..tau {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
