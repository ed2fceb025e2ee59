//! Indivisible items on a line.
//!
//! Rows are stored as runs of equal weight so that the very wide reduction
//! instances stay small. Items are 0-based here and 1-based in JSON.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::{binomial, factorial, find_map_first, SearchOptions};
use crate::allocations::ContiguousAllocation;
use crate::valuations::{parse_rational, CakeInstance, Rational};

/// Items `start..end` (end exclusive) each carrying `weight`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub end: usize,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Row {
    runs: Vec<Run>,
    /// `prefix[k]` = raw weight of `runs[..k]`.
    prefix: Vec<Rational>,
    total: Rational,
    valued: usize,
}

impl Row {
    fn new(m: usize, mut runs: Vec<Run>) -> Result<Self> {
        runs.retain(|r| !r.weight.is_zero() && r.start < r.end);
        runs.sort_by_key(|r| r.start);
        let mut merged: Vec<Run> = Vec::with_capacity(runs.len());
        for r in runs {
            if r.weight.is_negative() {
                return Err(Error::InvalidInstance(format!("negative item value {}", r.weight)));
            }
            if r.end > m {
                return Err(Error::InvalidInstance(format!("run ends at item {} of {m}", r.end)));
            }
            if let Some(last) = merged.last_mut() {
                if r.start < last.end {
                    return Err(Error::InvalidInstance("overlapping runs".into()));
                }
                if r.start == last.end && r.weight == last.weight {
                    last.end = r.end;
                    continue;
                }
            }
            merged.push(r);
        }
        let mut prefix = Vec::with_capacity(merged.len() + 1);
        let mut acc = Rational::zero();
        prefix.push(acc.clone());
        let mut valued = 0;
        for r in &merged {
            acc += &r.weight * Rational::from_integer((r.end - r.start).into());
            prefix.push(acc.clone());
            valued += r.end - r.start;
        }
        if !acc.is_positive() {
            return Err(Error::InvalidInstance("an agent values no item".into()));
        }
        Ok(Row { runs: merged, prefix, total: acc, valued })
    }

    /// Raw weight of items `0..b`.
    fn cumulative(&self, b: usize) -> Rational {
        let k = self.runs.partition_point(|r| r.end <= b);
        let mut acc = self.prefix[k].clone();
        if let Some(r) = self.runs.get(k) {
            if r.start < b {
                acc += &r.weight * Rational::from_integer((b - r.start).into());
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteInstance {
    m: usize,
    rows: Vec<Row>,
}

impl DiscreteInstance {
    pub fn from_runs(m: usize, agents: Vec<Vec<Run>>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidInstance("an instance needs at least one agent".into()));
        }
        let rows = agents.into_iter().map(|r| Row::new(m, r)).collect::<Result<Vec<_>>>()?;
        Ok(DiscreteInstance { m, rows })
    }

    pub fn from_dense(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let m = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("rows of different lengths".into()));
        }
        let runs = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .enumerate()
                    .map(|(j, w)| Run { start: j, end: j + 1, weight: w })
                    .collect()
            })
            .collect();
        Self::from_runs(m, runs)
    }

    /// Binary instance from the 0-based item lists each agent values.
    pub fn binary(m: usize, valued: Vec<Vec<usize>>) -> Result<Self> {
        let runs = valued
            .into_iter()
            .map(|items| items.into_iter().map(|j| Run { start: j, end: j + 1, weight: Rational::one() }).collect())
            .collect();
        Self::from_runs(m, runs)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn runs(&self, i: usize) -> &[Run] {
        &self.rows[i].runs
    }

    /// `m_i`, the number of items agent `i` values.
    pub fn valued_count(&self, i: usize) -> usize {
        self.rows[i].valued
    }

    /// Normalized value of items `a..b` to agent `i`.
    pub fn value(&self, i: usize, a: usize, b: usize) -> Rational {
        let row = &self.rows[i];
        (row.cumulative(b) - row.cumulative(a)) / &row.total
    }

    pub fn item_value(&self, i: usize, j: usize) -> Rational {
        self.value(i, j, j + 1)
    }

    /// Items agent `i` values, ascending.
    pub fn valued_items(&self, i: usize) -> Vec<usize> {
        self.rows[i].runs.iter().flat_map(|r| r.start..r.end).collect()
    }

    /// All raw entries are 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.rows.iter().all(|r| r.runs.iter().all(|x| x.weight.is_one()))
    }

    /// No item is valued by two agents.
    pub fn is_disjoint(&self) -> bool {
        let mut spans: Vec<(usize, usize)> = self.rows.iter().flat_map(|r| r.runs.iter().map(|x| (x.start, x.end))).collect();
        spans.sort();
        spans.windows(2).all(|w| w[1].0 >= w[0].1)
    }

    /// Agent valuing item `j`, for disjoint instances.
    pub fn owner_of(&self, j: usize) -> Option<usize> {
        self.rows.iter().position(|r| {
            let k = r.runs.partition_point(|x| x.end <= j);
            r.runs.get(k).is_some_and(|x| x.start <= j)
        })
    }

    /// Reversed item line.
    pub fn mirrored(&self) -> Self {
        let m = self.m;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let runs = r.runs.iter().map(|x| Run { start: m - x.end, end: m - x.start, weight: x.weight.clone() }).collect();
                Row::new(m, runs).expect("mirror of a valid row")
            })
            .collect();
        DiscreteInstance { m, rows }
    }

    /// Reads `{"items": m, "agents": [...]}` where each agent is a dense row of
    /// `0`/`1`/`"p/q"` entries or `{"runs": [[first, last, w], ...]}` with 1-based
    /// inclusive item ranges.
    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let agents = v["agents"].as_array().ok_or_else(|| Error::Parse("missing \"agents\" array".into()))?;
        let m = match v.get("items") {
            Some(x) => x.as_u64().ok_or_else(|| Error::Parse("\"items\" must be an integer".into()))? as usize,
            None => agents.first().and_then(|a| a.as_array()).map(|a| a.len()).unwrap_or(0),
        };
        let entry = |x: &Value| -> Result<Rational> {
            match x {
                Value::String(s) => parse_rational(s),
                Value::Number(n) => parse_rational(&n.to_string()),
                other => Err(Error::Parse(format!("bad item value {other}"))),
            }
        };
        let mut rows = Vec::with_capacity(agents.len());
        for a in agents {
            let runs = if let Some(dense) = a.as_array() {
                if dense.len() != m {
                    return Err(Error::Dimension(format!("row of {} entries for {m} items", dense.len())));
                }
                dense
                    .iter()
                    .enumerate()
                    .map(|(j, x)| Ok(Run { start: j, end: j + 1, weight: entry(x)? }))
                    .collect::<Result<Vec<_>>>()?
            } else if let Some(runs) = a.get("runs").and_then(|r| r.as_array()) {
                runs.iter()
                    .map(|r| {
                        let t = r.as_array().filter(|t| t.len() == 3).ok_or_else(|| Error::Parse("runs are [first, last, w]".into()))?;
                        let first = t[0].as_u64().filter(|&f| f >= 1).ok_or_else(|| Error::Parse("run bounds are 1-based".into()))?;
                        let last = t[1].as_u64().ok_or_else(|| Error::Parse("bad run end".into()))?;
                        Ok(Run { start: first as usize - 1, end: last as usize, weight: entry(&t[2])? })
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                return Err(Error::Parse("agent must be a row or {\"runs\": ...}".into()));
            };
            rows.push(runs);
        }
        Self::from_runs(m, rows)
    }

    fn weight_json(w: &Rational) -> Value {
        if w.is_integer() {
            json!(w.to_integer().to_string().parse::<u64>().expect("small integer"))
        } else {
            json!(w.to_string())
        }
    }

    /// Dense JSON with raw (unnormalized) entries.
    pub fn to_json(&self) -> String {
        let agents: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![json!(0); self.m];
                for x in &r.runs {
                    for cell in &mut row[x.start..x.end] {
                        *cell = Self::weight_json(&x.weight);
                    }
                }
                Value::Array(row)
            })
            .collect();
        serde_json::to_string(&json!({"items": self.m, "agents": agents})).expect("serializable")
    }

    /// Run-length JSON, for instances too wide to write densely.
    pub fn to_json_sparse(&self) -> String {
        let agents: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let runs: Vec<Value> = r.runs.iter().map(|x| json!([x.start + 1, x.end, Self::weight_json(&x.weight)])).collect();
                json!({"runs": runs})
            })
            .collect();
        serde_json::to_string(&json!({"items": self.m, "agents": agents})).expect("serializable")
    }
}

/// Boundaries `b_1 <= .. <= b_{n-1}` in `0..=m`; block `p` is items
/// `b_p..b_{p+1}` with `b_0 = 0`, `b_n = m`, owned by `order[p]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteAllocation {
    pub boundaries: Vec<usize>,
    pub order: Vec<usize>,
}

impl DiscreteAllocation {
    pub fn new(boundaries: Vec<usize>, order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n == 0 || boundaries.len() + 1 != n {
            return Err(Error::Dimension(format!("{} boundaries for {n} blocks", boundaries.len())));
        }
        if boundaries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Range(format!("boundaries not sorted: {boundaries:?}")));
        }
        let mut seen = vec![false; n];
        for &a in &order {
            if a >= n || std::mem::replace(&mut seen[a], true) {
                return Err(Error::Dimension(format!("order {order:?} is not a permutation")));
            }
        }
        Ok(DiscreteAllocation { boundaries, order })
    }

    pub fn whole(agent: usize) -> Self {
        DiscreteAllocation { boundaries: Vec::new(), order: vec![agent] }
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Items `start..end` of the block in position `p`.
    pub fn block(&self, p: usize, m: usize) -> (usize, usize) {
        let lo = if p == 0 { 0 } else { self.boundaries[p - 1] };
        let hi = if p == self.boundaries.len() { m } else { self.boundaries[p] };
        (lo, hi)
    }

    pub fn position_of(&self, agent: usize) -> usize {
        self.order.iter().position(|&a| a == agent).expect("agent in order")
    }

    pub fn block_of(&self, agent: usize, m: usize) -> (usize, usize) {
        self.block(self.position_of(agent), m)
    }

    pub fn mirrored(&self, m: usize) -> Self {
        let boundaries = self.boundaries.iter().rev().map(|b| m - b).collect();
        let order = self.order.iter().rev().copied().collect();
        DiscreteAllocation { boundaries, order }
    }

    /// `{"boundaries": [...], "order": [1-based agents]}`; boundary `b` splits after item `b`.
    pub fn to_json(&self) -> String {
        let order: Vec<usize> = self.order.iter().map(|a| a + 1).collect();
        serde_json::to_string_pretty(&json!({"boundaries": self.boundaries, "order": order})).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let list = |k: &str| -> Result<Vec<usize>> {
            v[k].as_array()
                .ok_or_else(|| Error::Parse(format!("missing \"{k}\"")))?
                .iter()
                .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| Error::Parse(format!("bad entry in \"{k}\""))))
                .collect()
        };
        let order = list("order")?;
        if order.contains(&0) {
            return Err(Error::Parse("agent labels in \"order\" are 1-based".into()));
        }
        Self::new(list("boundaries")?, order.into_iter().map(|a| a - 1).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FairnessCriterion {
    Ef,
    Prop,
    Eq,
    EpsEf(Rational),
    PositiveValue,
}

impl fmt::Display for FairnessCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FairnessCriterion::Ef => write!(f, "ef"),
            FairnessCriterion::Prop => write!(f, "prop"),
            FairnessCriterion::Eq => write!(f, "eq"),
            FairnessCriterion::EpsEf(e) => write!(f, "eps-ef:{e}"),
            FairnessCriterion::PositiveValue => write!(f, "positive"),
        }
    }
}

impl FromStr for FairnessCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(e) = t.strip_prefix("eps-ef:") {
            return Ok(FairnessCriterion::EpsEf(parse_rational(e)?));
        }
        match t {
            "ef" => Ok(FairnessCriterion::Ef),
            "prop" => Ok(FairnessCriterion::Prop),
            "eq" => Ok(FairnessCriterion::Eq),
            "positive" => Ok(FairnessCriterion::PositiveValue),
            other => Err(Error::Parse(format!("unknown criterion {other:?}"))),
        }
    }
}

/// Comma-separated list such as `ef,prop,eps-ef:1/20`.
pub fn parse_criteria(s: &str) -> Result<Vec<FairnessCriterion>> {
    let c = s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
    if c.is_empty() {
        return Err(Error::Parse("no fairness criterion given".into()));
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteReport {
    pub verdicts: Vec<(FairnessCriterion, bool)>,
    /// Own normalized value per agent.
    pub own: Vec<Rational>,
    pub max_envy: Rational,
    pub violations: Vec<String>,
}

impl DiscreteReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|(_, ok)| *ok)
    }
}

/// `vals[i][p]`: agent `i`'s value for the block in position `p`.
pub fn check_discrete(
    inst: &DiscreteInstance,
    alloc: &DiscreteAllocation,
    criteria: &[FairnessCriterion],
) -> Result<DiscreteReport> {
    let n = inst.n();
    if alloc.n() != n {
        return Err(Error::Dimension(format!("allocation for {} agents, instance has {n}", alloc.n())));
    }
    if alloc.boundaries.last().is_some_and(|&b| b > inst.m()) {
        return Err(Error::Dimension(format!("boundary beyond item {}", inst.m())));
    }
    let m = inst.m();
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(0);
    edges.extend(alloc.boundaries.iter().copied());
    edges.push(m);
    let mut own = Vec::with_capacity(n);
    let mut max_envy = Rational::zero();
    let mut worst = (0, 0);
    for i in 0..n {
        let row = &inst.rows[i];
        let cum: Vec<Rational> = edges.iter().map(|&b| row.cumulative(b)).collect();
        let raw: Vec<Rational> = cum.windows(2).map(|w| &w[1] - &w[0]).collect();
        let mine = &raw[alloc.position_of(i)];
        let (p, best) = raw.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).expect("non-empty");
        let e = (best - mine) / &row.total;
        if e > max_envy {
            max_envy = e;
            worst = (i, alloc.order[p]);
        }
        own.push(mine / &row.total);
    }
    let share = Rational::new(1.into(), n.into());
    let mut violations = Vec::new();
    let verdicts = criteria
        .iter()
        .map(|c| {
            let ok = match c {
                FairnessCriterion::Ef | FairnessCriterion::EpsEf(_) => {
                    let eps = if let FairnessCriterion::EpsEf(e) = c { e.clone() } else { Rational::zero() };
                    let ok = max_envy <= eps;
                    if !ok {
                        violations.push(format!("{c}: agent {} envies agent {} by {max_envy}", worst.0 + 1, worst.1 + 1));
                    }
                    ok
                }
                FairnessCriterion::Prop => {
                    let bad: Vec<usize> = (0..n).filter(|&i| own[i] < share).collect();
                    for &i in &bad {
                        violations.push(format!("prop: agent {} has {} < 1/{n}", i + 1, own[i]));
                    }
                    bad.is_empty()
                }
                FairnessCriterion::Eq => {
                    let ok = own.windows(2).all(|w| w[0] == w[1]);
                    if !ok {
                        violations.push("eq: own values differ".to_string());
                    }
                    ok
                }
                FairnessCriterion::PositiveValue => {
                    let bad: Vec<usize> = (0..n).filter(|&i| !own[i].is_positive()).collect();
                    for &i in &bad {
                        violations.push(format!("positive: agent {} gets nothing it values", i + 1));
                    }
                    bad.is_empty()
                }
            };
            (c.clone(), ok)
        })
        .collect();
    Ok(DiscreteReport { verdicts, own, max_envy, violations })
}

/// Lexicographically first order satisfying `criteria` for fixed block values.
fn first_order(vals: &[Vec<Rational>], criteria: &[FairnessCriterion]) -> Option<Vec<usize>> {
    let n = vals.len();
    let share = Rational::new(1.into(), n.into());
    let ok: Vec<Vec<bool>> = vals
        .iter()
        .map(|row| {
            let best = row.iter().max().expect("non-empty");
            row.iter()
                .map(|v| {
                    criteria.iter().all(|c| match c {
                        FairnessCriterion::Ef => v >= best,
                        FairnessCriterion::EpsEf(e) => v + e >= *best,
                        FairnessCriterion::Prop => *v >= share,
                        FairnessCriterion::PositiveValue => v.is_positive(),
                        FairnessCriterion::Eq => true,
                    })
                })
                .collect()
        })
        .collect();
    let eq = criteria.contains(&FairnessCriterion::Eq);
    fn dfs(
        p: usize,
        vals: &[Vec<Rational>],
        ok: &[Vec<bool>],
        eq: bool,
        target: Option<&Rational>,
        order: &mut Vec<usize>,
        used: &mut [bool],
    ) -> bool {
        if p == ok.len() {
            return true;
        }
        for a in 0..ok.len() {
            if used[a] || !ok[a][p] || (eq && target.is_some_and(|t| &vals[a][p] != t)) {
                continue;
            }
            used[a] = true;
            order.push(a);
            let t = if eq { Some(target.unwrap_or(&vals[a][p])) } else { None };
            if dfs(p + 1, vals, ok, eq, t, order, used) {
                return true;
            }
            order.pop();
            used[a] = false;
        }
        false
    }
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    dfs(0, vals, &ok, eq, None, &mut order, &mut used).then_some(order)
}

/// Exhaustive search over compositions (lexicographic boundaries) and orders.
pub fn brute_force_discrete(inst: &DiscreteInstance, criteria: &[FairnessCriterion]) -> Result<Option<DiscreteAllocation>> {
    brute_force_discrete_with(inst, criteria, &SearchOptions::from_env())
}

pub fn brute_force_discrete_with(
    inst: &DiscreteInstance,
    criteria: &[FairnessCriterion],
    opts: &SearchOptions,
) -> Result<Option<DiscreteAllocation>> {
    let n = inst.n();
    let m = inst.m();
    let size = binomial((m + n - 1) as u64, (n - 1) as u64) * factorial(n as u64);
    opts.check(&size)?;
    let vals_for = |bounds: &[usize]| -> Vec<Vec<Rational>> {
        let edge = |b: usize| if b == 0 { 0 } else if b == n { m } else { bounds[b - 1] };
        (0..n).map(|i| (0..n).map(|p| inst.value(i, edge(p), edge(p + 1))).collect()).collect()
    };
    if n == 1 {
        return Ok(first_order(&vals_for(&[]), criteria).map(|o| DiscreteAllocation::whole(o[0])));
    }
    let firsts: Vec<usize> = (0..=m).collect();
    let found = find_map_first(opts.exec, &firsts, |&f| {
        let mut seq = vec![f; n - 1];
        loop {
            if let Some(order) = first_order(&vals_for(&seq), criteria) {
                return Some(DiscreteAllocation { boundaries: seq, order });
            }
            let i = (1..n - 1).rev().find(|&i| seq[i] < m)?;
            let v = seq[i] + 1;
            for c in &mut seq[i..] {
                *c = v;
            }
        }
    });
    Ok(found)
}

/// Count of candidates [`brute_force_discrete`] may visit.
pub fn brute_force_size(m: usize, n: usize) -> BigUint {
    binomial((m + n - 1) as u64, (n - 1) as u64) * factorial(n as u64)
}

/// Envy-free allocation for disjoint binary valuations, via the continuous
/// embedding, an ε-envy-free grid search and chain rounding.
pub fn solve_disjoint_ef(inst: &DiscreteInstance) -> Result<DiscreteAllocation> {
    solve_disjoint_ef_with(inst, &SearchOptions::from_env())
}

pub fn solve_disjoint_ef_with(inst: &DiscreteInstance, opts: &SearchOptions) -> Result<DiscreteAllocation> {
    Ok(disjoint_ef_stages(inst, opts)?.allocation)
}

/// Intermediate artifacts of [`solve_disjoint_ef`].
#[derive(Clone, Debug)]
pub struct DisjointEfRun {
    pub cake: CakeInstance,
    pub eps: Rational,
    pub mesh: Rational,
    /// ε-envy-free allocation of `cake`; `None` for a single agent.
    pub grid_allocation: Option<ContiguousAllocation>,
    pub allocation: DiscreteAllocation,
}

pub fn disjoint_ef_stages(inst: &DiscreteInstance, opts: &SearchOptions) -> Result<DisjointEfRun> {
    use crate::bridges::{discrete_to_continuous, round_i_chains};
    use crate::exact_solver::{grid_eps_ef_with, GridSearch, GridStrategy};

    if !inst.is_binary() || !inst.is_disjoint() {
        return Err(Error::InvalidInstance("valuations must be binary and disjoint".into()));
    }
    let (cake, eps, map) = discrete_to_continuous(inst)?;
    if inst.n() == 1 {
        let allocation = DiscreteAllocation::whole(0);
        return Ok(DisjointEfRun { cake, mesh: eps.clone(), eps, grid_allocation: None, allocation });
    }
    // Mesh eps first; then the common refinement of eps and the item regions.
    let m = Rational::from_integer(inst.m().into());
    let fine = {
        let a = (Rational::one() / &eps).to_integer();
        let b = m.to_integer();
        Rational::new(1.into(), num_integer::Integer::lcm(&a, &b))
    };
    for mesh in [eps.clone(), fine] {
        let gs = GridSearch { tolerance: eps.clone(), mesh: mesh.clone(), strategy: GridStrategy::Exhaustive };
        if let Some(a) = grid_eps_ef_with(&cake, &gs, opts)? {
            let allocation = round_i_chains(&cake, &a, &map)?;
            return Ok(DisjointEfRun { cake, eps, mesh, grid_allocation: Some(a), allocation });
        }
    }
    Err(Error::Precondition("no ε-envy-free grid allocation found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::valuations::{int, rat};

    fn halves() -> DiscreteInstance {
        DiscreteInstance::binary(4, vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    fn all() -> Vec<FairnessCriterion> {
        vec![FairnessCriterion::Ef, FairnessCriterion::Prop, FairnessCriterion::Eq]
    }

    #[test]
    fn values_are_normalized() {
        let inst = DiscreteInstance::from_dense(vec![vec![int(1), int(3), int(0)], vec![int(2), int(2), int(2)]]).unwrap();
        assert_eq!(inst.value(0, 0, 3), int(1));
        assert_eq!(inst.value(0, 1, 2), rat(3, 4));
        assert_eq!(inst.value(1, 0, 1), rat(1, 3));
        assert_eq!(inst.valued_count(0), 2);
        assert!(!inst.is_binary());
        assert!(DiscreteInstance::from_dense(vec![vec![int(0), int(0)]]).is_err());
    }

    #[test]
    fn check_examples() {
        let inst = DiscreteInstance::binary(2, vec![vec![0], vec![1]]).unwrap();
        let a = DiscreteAllocation::new(vec![1], vec![0, 1]).unwrap();
        assert!(check_discrete(&inst, &a, &all()).unwrap().all_pass());
        let shared = DiscreteInstance::binary(1, vec![vec![0], vec![0]]).unwrap();
        let b = DiscreteAllocation::new(vec![1], vec![0, 1]).unwrap();
        let r = check_discrete(&shared, &b, &[FairnessCriterion::Ef]).unwrap();
        assert!(!r.all_pass());
        assert_eq!(r.max_envy, int(1));
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn brute_force_examples() {
        let shared = DiscreteInstance::binary(1, vec![vec![0], vec![0]]).unwrap();
        assert_eq!(brute_force_discrete(&shared, &[FairnessCriterion::Ef]).unwrap(), None);
        let a = brute_force_discrete(&halves(), &all()).unwrap().unwrap();
        assert_eq!(a, DiscreteAllocation::new(vec![2], vec![0, 1]).unwrap());
    }

    #[test]
    fn brute_force_parallel_matches_sequential() {
        let inst = DiscreteInstance::binary(6, vec![vec![0, 2], vec![1, 4], vec![3, 5]]).unwrap();
        let c = [FairnessCriterion::Ef];
        let s = brute_force_discrete_with(&inst, &c, &SearchOptions::sequential()).unwrap();
        let p = brute_force_discrete_with(&inst, &c, &SearchOptions::default().with_exec(Exec::Parallel)).unwrap();
        assert_eq!(s, p);
        assert!(s.is_some());
    }

    #[test]
    fn brute_force_limit() {
        let r = brute_force_discrete_with(&halves(), &all(), &SearchOptions::default().with_limit(2));
        assert!(matches!(r, Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn equitable_search_respects_common_value() {
        let inst = DiscreteInstance::binary(6, vec![vec![0, 1], vec![2, 3, 4, 5]]).unwrap();
        let a = brute_force_discrete(&inst, &[FairnessCriterion::Eq, FairnessCriterion::PositiveValue]).unwrap().unwrap();
        let r = check_discrete(&inst, &a, &[FairnessCriterion::Eq]).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.own, vec![rat(1, 1), rat(1, 1)]);
        let nested = DiscreteInstance::binary(6, vec![vec![0, 1], vec![0, 1, 2, 3]]).unwrap();
        let crit = [FairnessCriterion::Eq, FairnessCriterion::PositiveValue];
        assert_eq!(brute_force_discrete(&nested, &crit).unwrap(), None);
    }

    #[test]
    fn disjoint_solver_examples() {
        let a = solve_disjoint_ef(&halves()).unwrap();
        assert!(check_discrete(&halves(), &a, &[FairnessCriterion::Ef]).unwrap().all_pass());
        let one = DiscreteInstance::binary(3, vec![vec![1]]).unwrap();
        assert_eq!(solve_disjoint_ef(&one).unwrap(), DiscreteAllocation::whole(0));
        let inter = DiscreteInstance::binary(6, vec![vec![0, 2], vec![1, 4], vec![3, 5]]).unwrap();
        let b = solve_disjoint_ef(&inter).unwrap();
        assert!(check_discrete(&inter, &b, &[FairnessCriterion::Ef]).unwrap().all_pass());
        let overlapping = DiscreteInstance::binary(2, vec![vec![0, 1], vec![1]]).unwrap();
        assert!(matches!(solve_disjoint_ef(&overlapping), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn json_dense_and_sparse() {
        let inst = DiscreteInstance::from_json(r#"{"items": 3, "agents": [[1, 0, "1/2"], [0, 1, 0]]}"#).unwrap();
        assert_eq!(inst.value(0, 2, 3), rat(1, 3));
        assert_eq!(DiscreteInstance::from_json(&inst.to_json()).unwrap(), inst);
        assert_eq!(DiscreteInstance::from_json(&inst.to_json_sparse()).unwrap(), inst);
        let sparse = DiscreteInstance::from_json(r#"{"items": 5, "agents": [{"runs": [[2, 4, 1]]}]}"#).unwrap();
        assert_eq!(sparse.valued_items(0), vec![1, 2, 3]);
        assert!(DiscreteInstance::from_json(r#"{"items": 3, "agents": [[1, 0]]}"#).is_err());
    }

    #[test]
    fn allocation_json_and_mirror() {
        let a = DiscreteAllocation::new(vec![1, 3], vec![2, 0, 1]).unwrap();
        assert_eq!(DiscreteAllocation::from_json(&a.to_json()).unwrap(), a);
        assert_eq!(a.mirrored(4).boundaries, vec![1, 3]);
        assert_eq!(a.mirrored(4).order, vec![1, 0, 2]);
        assert!(DiscreteAllocation::new(vec![3, 1], vec![0, 1, 2]).is_err());
    }

    #[test]
    fn criteria_parsing() {
        let c = parse_criteria("ef,prop,eps-ef:1/20,positive").unwrap();
        assert_eq!(c[2], FairnessCriterion::EpsEf(rat(1, 20)));
        assert!(parse_criteria("").is_err());
        assert!(parse_criteria("fair").is_err());
    }
}
