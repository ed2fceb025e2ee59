//! 3-SAT to indivisible items with binary valuations.

use num_traits::One;

use super::{literal_name, Formula3SAT, GadgetCertificate, GadgetKind, Region};
use crate::discrete::{DiscreteAllocation, DiscreteInstance, Run};
use crate::error::Result;
use crate::valuations::{int, Rational};

fn run(start: usize, end: usize) -> Run {
    Run { start, end, weight: Rational::one() }
}

fn region(name: impl Into<String>, start: usize, end: usize) -> Region {
    Region::new(name, int(start as i64), int(end as i64))
}

fn clause_name(f: &Formula3SAT, i: usize) -> String {
    let lits: Vec<String> = f.clauses[i].iter().map(|&l| literal_name(l)).collect();
    format!("clause C_{} ({})", i + 1, lits.join(" | "))
}

/// Left-to-right `(start, end, agent)` blocks tiling `0..m` into an allocation.
fn from_blocks(blocks: &[(usize, usize, usize)]) -> Result<DiscreteAllocation> {
    debug_assert!(blocks.windows(2).all(|w| w[0].1 == w[1].0));
    DiscreteAllocation::new(
        blocks[..blocks.len() - 1].iter().map(|b| b.1).collect(),
        blocks.iter().map(|b| b.2).collect(),
    )
}

/// Item layout of a variable gadget in the combined reduction.
struct VariableLayout {
    start: usize,
    /// Clause agents whose literal is `x_j`, and where their pair starts.
    pos: Vec<(usize, usize)>,
    mid: usize,
    neg: Vec<(usize, usize)>,
    last: usize,
}

struct CombinedLayout {
    vars: Vec<VariableLayout>,
    special: usize,
    m_items: usize,
}

impl CombinedLayout {
    fn new(f: &Formula3SAT) -> Self {
        let m = f.m();
        let mut at = 4 * m;
        let mut vars = Vec::with_capacity(f.n);
        for j in 1..=f.n as i32 {
            let agents_with = |lit: i32| -> Vec<usize> {
                f.clauses.iter().flatten().enumerate().filter(|(_, &l)| l == lit).map(|(a, _)| a).collect()
            };
            let start = at;
            let pos: Vec<(usize, usize)> =
                agents_with(j).into_iter().enumerate().map(|(q, a)| (a, start + 3 + 2 * q)).collect();
            let mid = start + 3 + 2 * pos.len();
            let neg: Vec<(usize, usize)> =
                agents_with(-j).into_iter().enumerate().map(|(q, a)| (a, mid + 1 + 2 * q)).collect();
            let last = mid + 1 + 2 * neg.len();
            vars.push(VariableLayout { start, pos, mid, neg, last });
            at = last + 1;
        }
        let special_len = 6 * m + 4 * f.n + 14;
        CombinedLayout { vars, special: at, m_items: at + special_len }
    }
}

/// Clause agents `3i+k`, then `X_j, ~X_j` pairs, then the special agents.
pub fn gen_items_combined(f: &Formula3SAT) -> Result<(DiscreteInstance, GadgetCertificate)> {
    f.validate()?;
    let (m, n) = (f.m(), f.n);
    let lay = CombinedLayout::new(f);
    let special_agents = 3 * m + 2 * n + 7;
    let mut rows: Vec<Vec<Run>> = Vec::with_capacity(6 * m + 4 * n + 7);
    let mut names = Vec::with_capacity(rows.capacity());
    let mut regions = Vec::new();
    for i in 0..m {
        regions.push(region(clause_name(f, i), 4 * i, 4 * i + 4));
        for k in 0..3 {
            let a = 3 * i + k;
            let lit = f.clauses[i][k];
            let v = &lay.vars[lit.unsigned_abs() as usize - 1];
            let p = v.pos.iter().chain(&v.neg).find(|(b, _)| *b == a).expect("literal pair").1;
            rows.push(vec![run(4 * i, 4 * i + 4), run(p, p + 2), run(lay.special, lay.m_items - 6)]);
            names.push(format!("C_{}^{}", i + 1, k + 1));
        }
    }
    for (j, v) in lay.vars.iter().enumerate() {
        regions.push(region(format!("variable x_{}", j + 1), v.start, v.last + 1));
        rows.push(vec![run(v.start, v.start + 3), run(v.mid, v.mid + 1), run(lay.special, lay.m_items - 4)]);
        rows.push(vec![
            run(v.start, v.start + 2),
            run(v.mid, v.mid + 1),
            run(v.last, v.last + 1),
            run(lay.special, lay.m_items - 4),
        ]);
        names.push(format!("X_{}", j + 1));
        names.push(format!("~X_{}", j + 1));
    }
    regions.push(region("special", lay.special, lay.m_items));
    for t in 0..special_agents {
        rows.push(vec![run(lay.special, lay.m_items)]);
        names.push(format!("N_{}", t + 1));
    }
    let inst = DiscreteInstance::from_runs(lay.m_items, rows)?;
    let cert = GadgetCertificate {
        kind: GadgetKind::ItemsSat,
        length: int(lay.m_items as i64),
        regions,
        agents: names,
        agent_blocks: Vec::new(),
        fixed_cuts: Vec::new(),
        eps: None,
    };
    Ok((inst, cert))
}

/// Splits `lo..hi` among the `(agent, pair start)` entries of `sad`, each
/// block running to the next pair; `None` when `sad` is empty.
fn spread(lo: usize, hi: usize, sad: &[(usize, usize)]) -> Option<Vec<(usize, usize, usize)>> {
    if sad.is_empty() {
        return None;
    }
    Some(
        sad.iter()
            .enumerate()
            .map(|(q, &(a, _))| {
                let s = if q == 0 { lo } else { sad[q].1 };
                let e = sad.get(q + 1).map_or(hi, |next| next.1);
                (s, e, a)
            })
            .collect(),
    )
}

/// Every agent receives exactly two items it values.
pub fn witness_items_combined(f: &Formula3SAT, assignment: &[bool]) -> Result<DiscreteAllocation> {
    f.validate()?;
    f.check_assignment(assignment)?;
    let (m, n) = (f.m(), f.n);
    let lay = CombinedLayout::new(f);
    let sad: Vec<usize> = (0..m).map(|i| 3 * i + f.sad_position(i, assignment)).collect();
    let is_sad = |a: usize| sad[a / 3] == a;
    let mut blocks = Vec::new();
    for (i, &s) in sad.iter().enumerate() {
        let others: Vec<usize> = (3 * i..3 * i + 3).filter(|&a| a != s).collect();
        blocks.push((4 * i, 4 * i + 2, others[0]));
        blocks.push((4 * i + 2, 4 * i + 4, others[1]));
    }
    for (j, v) in lay.vars.iter().enumerate() {
        let (x, xbar) = (3 * m + 2 * j, 3 * m + 2 * j + 1);
        let b = v.start;
        if assignment[j] {
            blocks.push((b, b + 2, x));
            let pos: Vec<(usize, usize)> = v.pos.iter().copied().filter(|&(a, _)| is_sad(a)).collect();
            match spread(b + 2, v.mid, &pos) {
                Some(bs) => {
                    blocks.extend(bs);
                    blocks.push((v.mid, v.last + 1, xbar));
                }
                None => blocks.push((b + 2, v.last + 1, xbar)),
            }
        } else {
            blocks.push((b, b + 2, xbar));
            let neg: Vec<(usize, usize)> = v.neg.iter().copied().filter(|&(a, _)| is_sad(a)).collect();
            match spread(v.mid + 1, v.last + 1, &neg) {
                Some(bs) => {
                    blocks.push((b + 2, v.mid + 1, x));
                    blocks.extend(bs);
                }
                None => blocks.push((b + 2, v.last + 1, x)),
            }
        }
    }
    let first_special = 3 * m + 2 * n;
    for t in 0..3 * m + 2 * n + 7 {
        let s = lay.special + 2 * t;
        blocks.push((s, s + 2, first_special + t));
    }
    from_blocks(&blocks)
}

const CLAUSE_LEN: usize = 27;
const VARIABLE_LEN: usize = 34;
const ISOLATION_LEN: usize = 13;

enum Unit {
    Clause(usize),
    Variable(usize),
    Isolation,
}

/// Gadgets left to right with their first item and first agent.
fn epsef_units(f: &Formula3SAT) -> (Vec<(Unit, usize, usize)>, usize, usize) {
    let mut units = Vec::new();
    let (mut item, mut agent) = (0, 0);
    let gadgets = (0..f.m()).map(Unit::Clause).chain((0..f.n).map(Unit::Variable)).collect::<Vec<_>>();
    let total = gadgets.len();
    for (g, u) in gadgets.into_iter().enumerate() {
        let (len, agents) = match u {
            Unit::Clause(_) => (CLAUSE_LEN, 3),
            _ => (VARIABLE_LEN, 2),
        };
        units.push((u, item, agent));
        item += len;
        agent += agents;
        if g + 1 < total {
            units.push((Unit::Isolation, item, agent));
            item += ISOLATION_LEN;
            agent += 5;
        }
    }
    (units, item, agent)
}

/// Every agent values exactly 13 items; agents are indexed left to right.
pub fn gen_items_epsef(f: &Formula3SAT) -> Result<(DiscreteInstance, GadgetCertificate)> {
    f.validate()?;
    let (units, m_items, n_agents) = epsef_units(f);
    let var_start: Vec<usize> =
        units.iter().filter_map(|(u, s, _)| matches!(u, Unit::Variable(_)).then_some(*s)).collect();
    let mut rows: Vec<Vec<Run>> = Vec::with_capacity(n_agents);
    let mut names = Vec::with_capacity(n_agents);
    let mut regions = Vec::with_capacity(units.len());
    let mut iso = 0;
    for (u, s, _) in &units {
        match *u {
            Unit::Clause(i) => {
                regions.push(region(clause_name(f, i), *s, s + CLAUSE_LEN));
                for k in 0..3 {
                    let lit = f.clauses[i][k];
                    let b = var_start[lit.unsigned_abs() as usize - 1];
                    let lit_start = if lit > 0 { b + 13 } else { b + 17 };
                    let mut r: Vec<Run> = (0..3).map(|rep| run(s + 9 * rep + 3 * k, s + 9 * rep + 3 * k + 3)).collect();
                    r.push(run(lit_start, lit_start + 4));
                    rows.push(r);
                    names.push(format!("C_{}^{}", i + 1, k + 1));
                }
            }
            Unit::Variable(j) => {
                regions.push(region(format!("variable x_{}", j + 1), *s, s + VARIABLE_LEN));
                rows.push(vec![run(*s, s + 13)]);
                rows.push(vec![run(s + 21, s + 34)]);
                names.push(format!("L_{}", j + 1));
                names.push(format!("R_{}", j + 1));
            }
            Unit::Isolation => {
                iso += 1;
                regions.push(region(format!("isolation {iso}"), *s, s + ISOLATION_LEN));
                for t in 0..5 {
                    rows.push(vec![run(*s, s + ISOLATION_LEN)]);
                    names.push(format!("I_{iso}.{}", t + 1));
                }
            }
        }
    }
    let inst = DiscreteInstance::from_runs(m_items, rows)?;
    let cert = GadgetCertificate {
        kind: GadgetKind::ItemsEpsef,
        length: int(m_items as i64),
        regions,
        agents: names,
        agent_blocks: Vec::new(),
        fixed_cuts: Vec::new(),
        eps: Some(Rational::new(1.into(), 13.into())),
    };
    Ok((inst, cert))
}

/// Exactly envy-free allocation in left-to-right agent order.
pub fn witness_items_epsef(f: &Formula3SAT, assignment: &[bool]) -> Result<DiscreteAllocation> {
    f.validate()?;
    f.check_assignment(assignment)?;
    let (units, _, n_agents) = epsef_units(f);
    let mut boundaries = Vec::with_capacity(n_agents - 1);
    for (u, s, _) in &units {
        match *u {
            Unit::Clause(i) => {
                let (c1, c2) = match f.sad_position(i, assignment) {
                    0 => (3, 15),
                    1 => (12, 15),
                    _ => (12, 24),
                };
                boundaries.push(s + c1);
                boundaries.push(s + c2);
            }
            Unit::Variable(j) => boundaries.push(s + if assignment[j] { 15 } else { 19 }),
            Unit::Isolation => boundaries.extend((0..6).map(|q| s + 1 + 2 * q)),
        }
    }
    DiscreteAllocation::new(boundaries, (0..n_agents).collect())
}
