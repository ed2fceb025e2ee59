//! 3-PARTITION to indivisible items where every agent values one contiguous run.

use num_traits::One;

use super::{GadgetCertificate, GadgetKind, Region, ThreePartitionInput};
use crate::discrete::{DiscreteAllocation, DiscreteInstance, Run};
use crate::error::{Error, Result};
use crate::valuations::{int, Rational};

fn run(start: usize, end: usize) -> Vec<Run> {
    vec![Run { start, end, weight: Rational::one() }]
}

fn region(name: impl Into<String>, start: usize, end: usize) -> Region {
    Region::new(name, int(start as i64), int(end as i64))
}

fn certificate(kind: GadgetKind, m: usize, regions: Vec<Region>, agents: Vec<String>) -> GadgetCertificate {
    GadgetCertificate {
        kind,
        length: int(m as i64),
        regions,
        agents,
        agent_blocks: Vec::new(),
        fixed_cuts: Vec::new(),
        eps: None,
    }
}

/// Consecutive `(len, agent)` blocks from item 0.
fn consecutive(blocks: &[(usize, usize)]) -> Result<DiscreteAllocation> {
    let mut at = 0;
    let mut boundaries = Vec::with_capacity(blocks.len().saturating_sub(1));
    for &(len, _) in &blocks[..blocks.len() - 1] {
        at += len;
        boundaries.push(at);
    }
    DiscreteAllocation::new(boundaries, blocks.iter().map(|b| b.1).collect())
}

/// Sizes of the proportionality instance: `k = 4B`, `m = n(B+1) + 4nk²` items
/// and `n' = 4n(k+1)` agents.
pub struct PropSizes {
    pub k: usize,
    pub m: usize,
    pub agents: usize,
}

pub fn prop_sizes(x: &ThreePartitionInput) -> PropSizes {
    let (n, b) = (x.n(), x.b() as usize);
    let k = 4 * b;
    PropSizes { k, m: n * (b + 1) + 4 * n * k * k, agents: 4 * n * (k + 1) }
}

/// Agents: `n` special, then `3n` normal, then `4nk` dummy.
pub fn gen_items_prop_3part(x: &ThreePartitionInput) -> Result<(DiscreteInstance, GadgetCertificate)> {
    x.validate()?;
    let (n, b) = (x.n(), x.b() as usize);
    let PropSizes { k, m, agents } = prop_sizes(x);
    let dummy_start = n * (b + 1);
    let mut rows = Vec::with_capacity(agents);
    let mut names = Vec::with_capacity(agents);
    let mut regions = Vec::with_capacity(n + 1);
    for t in 0..n {
        regions.push(region(format!("block {}", t + 1), t * (b + 1), (t + 1) * (b + 1)));
        rows.push(run(t * (b + 1), t * (b + 1) + 1));
        names.push(format!("special {}", t + 1));
    }
    regions.push(region("dummy", dummy_start, m));
    for (i, &xi) in x.x.iter().enumerate() {
        let len = agents * xi as usize;
        if len >= m {
            return Err(Error::InvalidInstance(format!("normal agent {} would value {len} of {m} items", i + 1)));
        }
        rows.push(run(0, len));
        names.push(format!("normal {}", i + 1));
    }
    for d in 0..4 * n * k {
        rows.push(run(dummy_start, m));
        names.push(format!("dummy {}", d + 1));
    }
    let inst = DiscreteInstance::from_runs(m, rows)?;
    Ok((inst, certificate(GadgetKind::ItemsProp3p, m, regions, names)))
}

/// Proportional allocation from a valid partition into triples.
pub fn witness_items_prop_3part(x: &ThreePartitionInput, parts: &[[usize; 3]]) -> Result<DiscreteAllocation> {
    x.validate()?;
    x.check_partition(parts)?;
    let n = x.n();
    let PropSizes { k, .. } = prop_sizes(x);
    let mut blocks = Vec::new();
    for (t, triple) in parts.iter().enumerate() {
        blocks.push((1, t));
        blocks.extend(triple.iter().map(|&i| (x.x[i] as usize, n + i)));
    }
    blocks.extend((0..4 * n * k).map(|d| (k, 4 * n + d)));
    consecutive(&blocks)
}

/// Sizes of the equitability instance: `K = nB` and the total item count.
pub struct EquitSizes {
    pub big_k: usize,
    pub m: usize,
    pub agents: usize,
}

pub fn equit_sizes(x: &ThreePartitionInput) -> EquitSizes {
    let (n, b) = (x.n(), x.b() as usize);
    let big_k = n * b;
    EquitSizes { big_k, m: b * big_k + n * (big_k + b), agents: (b + n) * big_k + 3 * n }
}

/// `B` left K-blocks, then `n` right blocks of a K-block followed by `B`
/// free items. K-block agents come first, block by block; `a_i` follow.
pub fn gen_items_equit_3part(x: &ThreePartitionInput) -> Result<(DiscreteInstance, GadgetCertificate)> {
    x.validate()?;
    let n = x.n();
    if let Some(xi) = x.x.iter().find(|&&xi| xi as usize <= n) {
        return Err(Error::InvalidInstance(format!("{xi} is not larger than n = {n}; scale the input by n")));
    }
    let b = x.b() as usize;
    let EquitSizes { big_k, m, agents } = equit_sizes(x);
    let mut rows = Vec::with_capacity(agents);
    let mut names = Vec::with_capacity(agents);
    let mut regions = Vec::with_capacity(b + 2 * n);
    let mut kblock = |start: usize, label: &str, regions: &mut Vec<Region>| {
        regions.push(region(format!("K-block {label}"), start, start + big_k));
        for q in 0..big_k {
            rows.push(run(start, start + big_k));
            names.push(format!("K{label}.{}", q + 1));
        }
    };
    for r in 0..b {
        kblock(r * big_k, &format!("L{}", r + 1), &mut regions);
    }
    for t in 0..n {
        let s = b * big_k + t * (big_k + b);
        kblock(s, &format!("R{}", t + 1), &mut regions);
        regions.push(region(format!("free {}", t + 1), s + big_k, s + big_k + b));
    }
    for (i, &xi) in x.x.iter().enumerate() {
        rows.push(run(m - big_k * xi as usize, m));
        names.push(format!("a_{}", i + 1));
    }
    let inst = DiscreteInstance::from_runs(m, rows)?;
    Ok((inst, certificate(GadgetKind::ItemsEq3p, m, regions, names)))
}

/// Equitable allocation giving every agent value exactly `1/K`.
pub fn witness_items_equit_3part(x: &ThreePartitionInput, parts: &[[usize; 3]]) -> Result<DiscreteAllocation> {
    x.validate()?;
    x.check_partition(parts)?;
    let n = x.n();
    let b = x.b() as usize;
    let EquitSizes { big_k, .. } = equit_sizes(x);
    let mut blocks: Vec<(usize, usize)> = (0..b * big_k).map(|a| (1, a)).collect();
    for (t, triple) in parts.iter().enumerate() {
        let first = (b + t) * big_k;
        blocks.extend((0..big_k).map(|q| (1, first + q)));
        blocks.extend(triple.iter().map(|&i| (x.x[i] as usize, (b + n) * big_k + i)));
    }
    consecutive(&blocks)
}
