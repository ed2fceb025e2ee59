//! Execution policy for the enumerative searches.
//!
//! Every search walks its candidates in a fixed lexicographic order and
//! reports the first success. The parallel path uses rayon's
//! `find_map_first`, which returns the same element the sequential scan
//! would, so answers never depend on the thread count.

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Environment variable overriding [`DEFAULT_LIMIT`].
pub const LIMIT_ENV: &str = "FAIRSLICE_LIMIT";

/// Default cap on the number of candidates an exhaustive search may visit.
pub const DEFAULT_LIMIT: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon data parallelism; identical to `Sequential` without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub exec: Exec,
    pub limit: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { exec: Exec::default(), limit: DEFAULT_LIMIT }
    }
}

impl SearchOptions {
    pub fn sequential() -> Self {
        SearchOptions { exec: Exec::Sequential, ..Self::default() }
    }

    /// Default options with the limit read from `FAIRSLICE_LIMIT` when set.
    pub fn from_env() -> Self {
        let limit = std::env::var(LIMIT_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_LIMIT);
        SearchOptions { limit, ..Self::default() }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = limit;
        self
    }

    pub fn check(&self, size: &BigUint) -> Result<()> {
        if *size > BigUint::from(self.limit) {
            Err(Error::ResourceLimit { size: size.clone(), limit: self.limit })
        } else {
            Ok(())
        }
    }
}

/// First `Some` produced by `f` over `items`, in slice order.
pub fn find_map_first<T, R, F>(exec: Exec, items: &[T], f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().find_map_first(f)
        }
        _ => items.iter().find_map(f),
    }
}

/// `f` applied to every item, results in slice order.
pub fn map_collect<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n.saturating_sub(k));
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `C(n, k)` for a big `n`.
pub fn binomial_big(n: &BigUint, k: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    if BigUint::from(k) > *n {
        return BigUint::from(0u32);
    }
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(i))
}

/// Permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Non-decreasing sequences of length `len` over `0..base`, lexicographic.
pub fn monotone_sequences(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if len == 0 {
        out.push(Vec::new());
        return out;
    }
    if base == 0 {
        return out;
    }
    let mut cur = vec![0usize; len];
    loop {
        out.push(cur.clone());
        let Some(i) = (0..len).rev().find(|&i| cur[i] + 1 < base) else { break };
        let v = cur[i] + 1;
        for c in &mut cur[i..] {
            *c = v;
        }
    }
    out
}
