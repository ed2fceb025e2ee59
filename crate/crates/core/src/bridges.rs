//! Continuous/discrete bridges.
//!
//! [`continuous_to_discrete`] slices every value-block into sub-blocks of value
//! `δ` and places an item at each midpoint; [`discrete_to_continuous`] turns item
//! `j` into a block on `[(j-1)/m, j/m]`. [`round_i_chains`] moves the cuts of an
//! ε-envy-free allocation of the embedded cake onto item boundaries without
//! creating envy.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::allocations::{envy_report, ContiguousAllocation};
use crate::discrete::{check_discrete, DiscreteAllocation, DiscreteInstance, FairnessCriterion};
use crate::error::{Error, Result};
use crate::valuations::{int, CakeInstance, Rational};

/// One retained sub-block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscretizedItem {
    pub owner: usize,
    /// Index of the source block in the owner's valuation.
    pub block: usize,
    pub left: Rational,
    pub right: Rational,
    pub position: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscretizationMap {
    pub delta: Rational,
    /// Maximum number of value-blocks of any agent.
    pub m: usize,
    /// Items in line order.
    pub items: Vec<DiscretizedItem>,
    /// `1/δ - m`, the item count every agent keeps.
    pub retained: usize,
}

/// Sub-block discretization with `δ = 1/⌈(m+2)/eps⌉`.
pub fn continuous_to_discrete(inst: &CakeInstance, eps: &Rational) -> Result<(DiscreteInstance, DiscretizationMap)> {
    if eps <= &Rational::zero() {
        return Err(Error::Range(format!("eps must be positive, got {eps}")));
    }
    if !inst.has_disjoint_blocks() {
        return Err(Error::InvalidInstance("value-blocks of different agents overlap".into()));
    }
    let m = inst.max_blocks();
    let inv = (int(m as i64 + 2) / eps).ceil().to_integer();
    let delta = Rational::new(BigInt::one(), inv.clone());
    let retained = (inv - BigInt::from(m)).to_usize().expect("item count fits");

    let mut items = Vec::new();
    for (i, v) in inst.valuations().iter().enumerate() {
        let mut own = Vec::new();
        for (bi, b) in v.blocks().iter().enumerate() {
            let step = &delta / &b.height;
            let count = (b.mass() / &delta).floor().to_integer().to_usize().expect("count fits");
            for s in 0..count {
                let left = &b.left + &step * int(s as i64);
                let right = &left + &step;
                let position = (&left + &right) / int(2);
                own.push(DiscretizedItem { owner: i, block: bi, left, right, position });
            }
        }
        // Surplus items are dropped from the right.
        own.truncate(retained);
        items.extend(own);
    }
    items.sort_by(|a, b| (&a.position, a.owner, a.block).cmp(&(&b.position, b.owner, b.block)));
    let mut valued: Vec<Vec<usize>> = vec![Vec::new(); inst.n()];
    for (j, it) in items.iter().enumerate() {
        valued[it.owner].push(j);
    }
    let dinst = DiscreteInstance::binary(items.len(), valued)?;
    Ok((dinst, DiscretizationMap { delta, m, items, retained }))
}

/// Each discrete boundary becomes the midpoint between its neighbouring items.
pub fn discrete_solution_to_continuous(map: &DiscretizationMap, dalloc: &DiscreteAllocation) -> Result<ContiguousAllocation> {
    let total = map.items.len();
    let cuts = dalloc
        .boundaries
        .iter()
        .map(|&b| {
            if b == 0 {
                Rational::zero()
            } else if b >= total {
                Rational::one()
            } else {
                (&map.items[b - 1].position + &map.items[b].position) / int(2)
            }
        })
        .collect();
    ContiguousAllocation::new(cuts, dalloc.order.clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingMap {
    pub m: usize,
    /// Agent valuing each item.
    pub owner: Vec<Option<usize>>,
    /// `m_i` per agent.
    pub counts: Vec<usize>,
    /// `min_i 1/(n m_i)`.
    pub eps: Rational,
}

pub fn discrete_to_continuous(inst: &DiscreteInstance) -> Result<(CakeInstance, Rational, EmbeddingMap)> {
    if !inst.is_binary() || !inst.is_disjoint() {
        return Err(Error::InvalidInstance("valuations must be binary and disjoint".into()));
    }
    let m = inst.m();
    let n = inst.n();
    let mm = m as i64;
    let mut owner = vec![None; m];
    let mut counts = Vec::with_capacity(n);
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let items = inst.valued_items(i);
        let mi = items.len() as i64;
        counts.push(items.len());
        agents.push(
            items
                .iter()
                .map(|&j| {
                    owner[j] = Some(i);
                    (Rational::new(BigInt::from(j), mm.into()), Rational::new(BigInt::from(j + 1), mm.into()), Rational::new(mm.into(), mi.into()))
                })
                .collect(),
        );
    }
    let cake = CakeInstance::from_blocks(agents)?;
    let max_count = *counts.iter().max().expect("at least one agent");
    let eps = Rational::new(BigInt::one(), BigInt::from(n * max_count));
    Ok((cake, eps.clone(), EmbeddingMap { m, owner, counts, eps }))
}

/// Rounds every cut of an `eps`-envy-free allocation of the embedded cake onto
/// `j/m`, keeping piece order, so that the discrete allocation is envy-free.
pub fn round_i_chains(inst: &CakeInstance, alloc: &ContiguousAllocation, map: &EmbeddingMap) -> Result<DiscreteAllocation> {
    let n = inst.n();
    if alloc.n() != n || map.counts.len() != n {
        return Err(Error::Dimension("allocation, instance and map disagree on n".into()));
    }
    let envy = envy_report(inst, alloc)?.max_envy;
    if envy > map.eps {
        return Err(Error::Precondition(format!("allocation has envy {envy} above {}", map.eps)));
    }
    let m = map.m;
    let mr = int(m as i64);
    let k = alloc.cuts.len();
    // Region of a bad cut: x strictly inside [(j)/m, (j+1)/m] gives Some(j).
    let region = |x: &Rational| -> Option<usize> {
        let s = x * &mr;
        (!s.is_integer()).then(|| s.floor().to_integer().to_usize().expect("in range"))
    };
    let grid = |j: usize| Rational::new(BigInt::from(j), BigInt::from(m));
    let mut rounded: Vec<Option<usize>> = alloc
        .cuts
        .iter()
        .map(|x| if region(x).is_none() { Some((x * &mr).to_integer().to_usize().expect("in range")) } else { None })
        .collect();
    let owner_of_cut: Vec<Option<usize>> = alloc.cuts.iter().map(|x| region(x).and_then(|j| map.owner[j])).collect();

    // In favour of agent i on both ends of A_i.
    for (c, x) in alloc.cuts.iter().enumerate() {
        let (Some(j), Some(i)) = (region(x), owner_of_cut[c]) else { continue };
        let pos = alloc.position_of(i);
        if c + 1 == pos {
            rounded[c] = Some(j);
        } else if c == pos {
            rounded[c] = Some(j + 1);
        }
    }

    // Left to right; each choice stays between the rounded neighbours.
    for c in 0..k {
        if rounded[c].is_some() {
            continue;
        }
        let j = region(&alloc.cuts[c]).expect("bad cut");
        let lo = if c == 0 { 0 } else { rounded[c - 1].expect("left neighbour rounded") };
        let hi = (c + 1..k).find_map(|d| rounded[d]).unwrap_or(m);
        let can_left = j >= lo && j <= hi;
        let can_right = j < hi;
        let choice = match owner_of_cut[c] {
            None => {
                if can_left {
                    j
                } else {
                    j + 1
                }
            }
            Some(i) => {
                // Value of the piece left of the cut if rounded right.
                let v = inst.valuation(i);
                let own = {
                    let (a, b) = alloc.piece_of(i);
                    let a = piece_end(&a, &alloc.cuts, &rounded, &grid);
                    let b = piece_end(&b, &alloc.cuts, &rounded, &grid);
                    v.mass(&a, &b)
                };
                let left_start = if c == 0 { Rational::zero() } else { grid(lo) };
                let if_right = v.mass(&left_start, &grid(j + 1));
                if can_right && (if_right <= own || !can_left) {
                    j + 1
                } else {
                    // The piece right of the cut must stay below own + 1/m_i.
                    let next_end = if c + 1 < k { alloc.cuts[c + 1].clone() } else { Rational::one() };
                    let spill = v.mass(&grid(j), &next_end);
                    let step = Rational::new(BigInt::one(), BigInt::from(map.counts[i]));
                    if spill >= own + step {
                        return Err(Error::Precondition(format!("chain slack reached 1/{} at cut {}", map.counts[i], c + 1)));
                    }
                    j
                }
            }
        };
        rounded[c] = Some(choice);
    }

    let boundaries: Vec<usize> = rounded.into_iter().map(|r| r.expect("all rounded")).collect();
    let dalloc = DiscreteAllocation::new(boundaries, alloc.order.clone())?;
    Ok(dalloc)
}

/// Current position of a piece end: the rounded cut when it is one.
fn piece_end(x: &Rational, cuts: &[Rational], rounded: &[Option<usize>], grid: &dyn Fn(usize) -> Rational) -> Rational {
    match cuts.iter().position(|c| c == x) {
        Some(idx) => {
            // Several cuts may share the position; all share their rounding by then.
            match (idx..cuts.len()).take_while(|&d| &cuts[d] == x).find_map(|d| rounded[d]) {
                Some(r) => grid(r),
                None => x.clone(),
            }
        }
        None => x.clone(),
    }
}

/// Rounds and confirms exact envy-freeness on the discrete instance.
pub fn round_and_check(
    inst: &CakeInstance,
    alloc: &ContiguousAllocation,
    map: &EmbeddingMap,
    dinst: &DiscreteInstance,
) -> Result<DiscreteAllocation> {
    let d = round_i_chains(inst, alloc, map)?;
    if !check_discrete(dinst, &d, &[FairnessCriterion::Ef])?.all_pass() {
        return Err(Error::Precondition("rounded allocation is not envy-free".into()));
    }
    Ok(d)
}
