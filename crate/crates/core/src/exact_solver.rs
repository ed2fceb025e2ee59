//! Exact and approximate continuous solvers.
//!
//! The core is a per-class LP: fix the piece order and, for every cut, an
//! interval `[l_j, r_j]` on which all densities are constant; then minimize the
//! maximum envy `z` over the cut positions. Enumerating classes gives an exact
//! envy-free decision procedure; fixing the class of a near-envy-free
//! allocation turns it into an exact one.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::allocations::{envy_report, ContiguousAllocation};
use crate::error::{Error, Result};
use crate::exec::{self, find_map_first, permutations, SearchOptions};
use crate::ratlp::{solve_lp, LinearProgram, LpStatus, Relation};
use crate::valuations::{parse_rational, CakeInstance, Rational};

/// Per-cut intervals `[l_j, r_j]`; `l_j = r_j` pins the cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellAssignment {
    pub bounds: Vec<(Rational, Rational)>,
}

impl CellAssignment {
    /// Cell of each cut in `grid`: the point itself when the cut lies on the grid,
    /// otherwise the surrounding open cell's closure.
    pub fn from_cuts(grid: &[Rational], cuts: &[Rational]) -> Self {
        let bounds = cuts
            .iter()
            .map(|x| match grid.binary_search(x) {
                Ok(_) => (x.clone(), x.clone()),
                Err(t) => (grid[t - 1].clone(), grid[t].clone()),
            })
            .collect();
        CellAssignment { bounds }
    }

    pub fn contains(&self, cuts: &[Rational]) -> bool {
        cuts.len() == self.bounds.len() && cuts.iter().zip(&self.bounds).all(|(x, (l, r))| l <= x && x <= r)
    }
}

/// Minimum over cuts in `cells` of the maximum envy, pieces owned left to right
/// by `order`. `None` when the cells admit no monotone cut vector.
pub fn min_envy_for_cells(
    inst: &CakeInstance,
    order: &[usize],
    cells: &CellAssignment,
) -> Result<Option<(Rational, Vec<Rational>)>> {
    let n = inst.n();
    if order.len() != n || cells.bounds.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "{} agents, order of {}, {} cells",
            n,
            order.len(),
            cells.bounds.len()
        )));
    }
    let mut seen = vec![false; n];
    for &a in order {
        if a >= n || std::mem::replace(&mut seen[a], true) {
            return Err(Error::Dimension(format!("order {order:?} is not a permutation")));
        }
    }
    for (l, r) in &cells.bounds {
        if l > r {
            return Ok(None);
        }
        for v in inst.valuations() {
            if v.edges().iter().any(|e| l < e && e < r) {
                return Err(Error::Precondition(format!("density not constant on [{l}, {r}]")));
            }
        }
    }

    // F_i(x_b) = slope * x_b + offset for boundary b, with x_0 = 0 and x_n = 1.
    let zvar = n - 1;
    let boundary = |i: usize, b: usize| -> (Option<(usize, Rational)>, Rational) {
        if b == 0 {
            return (None, Rational::zero());
        }
        if b == n {
            return (None, Rational::one());
        }
        let (l, r) = &cells.bounds[b - 1];
        let v = inst.valuation(i);
        let h = if l < r { v.density_on(l, r) } else { Rational::zero() };
        let offset = v.mass(&Rational::zero(), l) - &h * l;
        (Some((b - 1, h)), offset)
    };

    let mut lp = LinearProgram::new(n);
    let mut obj = vec![Rational::zero(); n];
    obj[zvar] = Rational::one();
    lp.minimize(obj);
    for (j, (l, r)) in cells.bounds.iter().enumerate() {
        lp.bound(j, Some(l.clone()), Some(r.clone()));
    }
    for j in 0..n.saturating_sub(2) {
        let mut row = vec![Rational::zero(); n];
        row[j] = Rational::one();
        row[j + 1] = -Rational::one();
        lp.add(row, Relation::Le, Rational::zero());
    }
    for (p, &i) in order.iter().enumerate() {
        for q in 0..n {
            let mut row = vec![Rational::zero(); n];
            let mut rhs = Rational::zero();
            for (b, sign) in [(q + 1, 1i64), (q, -1), (p + 1, -1), (p, 1)] {
                let (var, offset) = boundary(i, b);
                let s = Rational::from_integer(sign.into());
                if let Some((j, h)) = var {
                    row[j] += &s * h;
                }
                rhs -= &s * offset;
            }
            row[zvar] = -Rational::one();
            lp.add(row, Relation::Le, rhs);
        }
    }
    let res = solve_lp(&lp)?;
    match res.status {
        LpStatus::Optimal => {
            let mut x = res.solution;
            let z = x.pop().expect("z variable");
            Ok(Some((z, x)))
        }
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::MalformedLp("envy LP reported unbounded".into())),
    }
}

/// Re-solves the class of `approx` for zero envy. `None` when the class optimum
/// is positive, i.e. `approx` was not close enough to envy-free.
pub fn exactify(inst: &CakeInstance, approx: &ContiguousAllocation) -> Result<Option<ContiguousAllocation>> {
    exactify_with_breakpoints(inst, approx, &[])
}

/// As [`exactify`], with `extra` positions treated as breakpoints; cuts sitting on
/// them stay pinned.
pub fn exactify_with_breakpoints(
    inst: &CakeInstance,
    approx: &ContiguousAllocation,
    extra: &[Rational],
) -> Result<Option<ContiguousAllocation>> {
    approx.validate()?;
    let grid = inst.breakpoint_grid_with(extra);
    let cells = CellAssignment::from_cuts(&grid, &approx.cuts);
    match min_envy_for_cells(inst, &approx.order, &cells)? {
        Some((z, cuts)) if z.is_zero() => Ok(Some(ContiguousAllocation::new(cuts, approx.order.clone())?)),
        _ => Ok(None),
    }
}

/// Description size of an instance: every position and height has numerator and
/// denominator at most `m`; at most `k` blocks per agent; `n` agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionParams {
    pub m: BigUint,
    pub k: u64,
    pub n: u64,
    /// Every description number is a multiple of `1/m`.
    pub common_denominator: bool,
}

impl PrecisionParams {
    pub fn new(m: u64, k: u64, n: u64) -> Self {
        PrecisionParams { m: BigUint::from(m), k, n, common_denominator: false }
    }

    pub fn with_common_denominator(mut self) -> Self {
        self.common_denominator = true;
        self
    }

    pub fn from_instance(inst: &CakeInstance) -> Self {
        let mut m = BigUint::from(3u32);
        let mut nums: Vec<&Rational> = Vec::new();
        for v in inst.valuations() {
            for b in v.blocks() {
                nums.extend([&b.left, &b.right, &b.height]);
            }
        }
        for r in &nums {
            for part in [r.numer(), r.denom()] {
                let p = part.abs().to_biguint().expect("non-negative");
                if p > m {
                    m = p;
                }
            }
        }
        let mi = BigInt::from(m.clone());
        let common = nums.iter().all(|r| mi.is_multiple_of(r.denom()));
        PrecisionParams {
            m,
            k: inst.max_blocks() as u64,
            n: inst.n() as u64,
            common_denominator: common,
        }
    }
}

/// `1/M^((6k+14)n)`, or `1/M^(4n)` when all numbers share the denominator `M`.
pub fn precision_bound(p: &PrecisionParams) -> Rational {
    let m = BigUint::max(p.m.clone(), BigUint::from(3u32));
    let e = if p.common_denominator { 4 * p.n } else { (6 * p.k + 14) * p.n };
    let den = num_traits::pow(m, e.to_usize().expect("exponent fits"));
    Rational::new(BigInt::one(), BigInt::from(den))
}

/// Extra requirement on an envy-free allocation. Agent indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EfConstraint {
    None,
    AgentLeftmost(usize),
    PrefixOrder(Vec<usize>),
    FullOrder(Vec<usize>),
    CutAt(Rational),
    LeftmostCutAt(Rational),
    CutsAt(Vec<Rational>),
    AllCuts(Vec<Rational>),
}

impl EfConstraint {
    /// Positions the constraint mentions.
    pub fn positions(&self) -> Vec<Rational> {
        match self {
            EfConstraint::CutAt(x) | EfConstraint::LeftmostCutAt(x) => vec![x.clone()],
            EfConstraint::CutsAt(xs) | EfConstraint::AllCuts(xs) => xs.clone(),
            _ => Vec::new(),
        }
    }

    fn admits_order(&self, order: &[usize]) -> bool {
        match self {
            EfConstraint::AgentLeftmost(a) => order.first() == Some(a),
            EfConstraint::PrefixOrder(p) => order.starts_with(p),
            EfConstraint::FullOrder(p) => order == p.as_slice(),
            _ => true,
        }
    }

    /// Whether `alloc` meets the constraint.
    pub fn holds(&self, alloc: &ContiguousAllocation) -> bool {
        let cuts = &alloc.cuts;
        match self {
            EfConstraint::None => true,
            EfConstraint::CutAt(x) => cuts.contains(x),
            EfConstraint::LeftmostCutAt(x) => cuts.first() == Some(x),
            EfConstraint::CutsAt(xs) => {
                let mut want = xs.clone();
                want.sort();
                let mut it = cuts.iter();
                want.iter().all(|w| it.any(|c| c == w))
            }
            EfConstraint::AllCuts(xs) => {
                let mut want = xs.clone();
                want.sort();
                &want == cuts
            }
            other => other.admits_order(&alloc.order),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let agents: &[usize] = match self {
            EfConstraint::AgentLeftmost(a) => std::slice::from_ref(a),
            EfConstraint::PrefixOrder(p) | EfConstraint::FullOrder(p) => p,
            _ => &[],
        };
        if agents.iter().any(|&a| a >= n) {
            return Err(Error::Dimension(format!("constraint names an agent beyond {n}")));
        }
        if let EfConstraint::FullOrder(p) = self {
            if p.len() != n {
                return Err(Error::Dimension(format!("full order of length {} for {n} agents", p.len())));
            }
        }
        for x in self.positions() {
            if x.is_negative() || x > Rational::one() {
                return Err(Error::Range(format!("constraint position {x} outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// Text form with 1-based agents: `none`, `leftmost:A`, `prefix:A,B`,
/// `order:A,B,..`, `cut-at:X`, `leftmost-cut-at:X`, `cuts-at:X,Y`, `all-cuts:X,Y`.
impl FromStr for EfConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let agents = || -> Result<Vec<usize>> {
            arg.split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(a) if a >= 1 => Ok(a - 1),
                    _ => Err(Error::Parse(format!("bad agent label {t:?} (labels are 1-based)"))),
                })
                .collect()
        };
        let positions = || -> Result<Vec<Rational>> { arg.split(',').map(parse_rational).collect() };
        Ok(match kind.trim() {
            "none" => EfConstraint::None,
            "leftmost" => EfConstraint::AgentLeftmost(agents()?[0]),
            "prefix" => EfConstraint::PrefixOrder(agents()?),
            "order" => EfConstraint::FullOrder(agents()?),
            "cut-at" => EfConstraint::CutAt(parse_rational(arg)?),
            "leftmost-cut-at" => EfConstraint::LeftmostCutAt(parse_rational(arg)?),
            "cuts-at" => EfConstraint::CutsAt(positions()?),
            "all-cuts" => EfConstraint::AllCuts(positions()?),
            other => return Err(Error::Parse(format!("unknown constraint kind {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Point(usize),
    Cell(usize),
}

impl Slot {
    fn key(self) -> usize {
        match self {
            Slot::Point(t) => 2 * t,
            Slot::Cell(t) => 2 * t + 1,
        }
    }

    fn bounds(self, grid: &[Rational]) -> (Rational, Rational) {
        match self {
            Slot::Point(t) => (grid[t].clone(), grid[t].clone()),
            Slot::Cell(t) => (grid[t].clone(), grid[t + 1].clone()),
        }
    }
}

/// Allowed slots per cut; sequences must be non-decreasing in slot key.
type Plan = Vec<Vec<Slot>>;

fn plans_for(constraint: &EfConstraint, grid: &[Rational], cuts: usize) -> Vec<Plan> {
    let cells: Vec<Slot> = (0..grid.len() - 1).map(Slot::Cell).collect();
    let point = |x: &Rational| Slot::Point(grid.binary_search(x).expect("constraint positions are on the grid"));
    let pinned_plans = |mut xs: Vec<Rational>| -> Vec<Plan> {
        xs.sort();
        let k = xs.len();
        if k > cuts {
            return Vec::new();
        }
        // Increasing injections of the k pins into the cut indices.
        let mut out = Vec::new();
        for combo in combinations(cuts, k) {
            let mut plan: Plan = vec![cells.clone(); cuts];
            for (x, &j) in xs.iter().zip(&combo) {
                plan[j] = vec![point(x)];
            }
            out.push(plan);
        }
        out
    };
    match constraint {
        EfConstraint::CutAt(x) => pinned_plans(vec![x.clone()]),
        EfConstraint::CutsAt(xs) => pinned_plans(xs.clone()),
        EfConstraint::AllCuts(xs) => {
            if xs.len() != cuts {
                return Vec::new();
            }
            pinned_plans(xs.clone())
        }
        EfConstraint::LeftmostCutAt(x) => {
            if cuts == 0 {
                return Vec::new();
            }
            let mut plan: Plan = vec![cells.clone(); cuts];
            plan[0] = vec![point(x)];
            vec![plan]
        }
        _ => vec![vec![cells; cuts]],
    }
}

/// Increasing `k`-subsets of `0..n`, lexicographic.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { break };
        cur[i] += 1;
        for t in i + 1..k {
            cur[t] = cur[t - 1] + 1;
        }
    }
    out
}

fn count_sequences(plan: &Plan) -> BigUint {
    if plan.is_empty() {
        return BigUint::one();
    }
    // ways[s] over slots of the current cut: sequences ending with that slot.
    let mut prev: Vec<(usize, BigUint)> = plan[0].iter().map(|s| (s.key(), BigUint::one())).collect();
    for allowed in &plan[1..] {
        prev = allowed
            .iter()
            .map(|s| {
                let k = s.key();
                (k, prev.iter().filter(|(pk, _)| *pk <= k).map(|(_, w)| w.clone()).sum())
            })
            .collect();
    }
    prev.into_iter().map(|(_, w)| w).sum()
}

/// Depth-first over monotone slot sequences extending `prefix`, first success wins.
fn search_plan<R>(
    plan: &Plan,
    prefix: &mut Vec<Slot>,
    leaf: &mut dyn FnMut(&[Slot]) -> Result<Option<R>>,
) -> Result<Option<R>> {
    if prefix.len() == plan.len() {
        return leaf(prefix);
    }
    let min_key = prefix.last().map(|s| s.key()).unwrap_or(0);
    for &s in &plan[prefix.len()] {
        if s.key() < min_key {
            continue;
        }
        prefix.push(s);
        let r = search_plan(plan, prefix, leaf)?;
        prefix.pop();
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

/// Outcome of an exact decision run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub allocation: Option<ContiguousAllocation>,
    /// Number of (order, cell sequence) classes in the search space.
    pub search_space: BigUint,
}

pub fn decide_ef(inst: &CakeInstance, constraint: &EfConstraint) -> Result<Option<ContiguousAllocation>> {
    Ok(decide_ef_with(inst, constraint, &SearchOptions::from_env())?.allocation)
}

/// Exact decision: every envy-free allocation meeting `constraint` lies in one of
/// the enumerated (order, cells) classes, each settled by one LP.
pub fn decide_ef_with(inst: &CakeInstance, constraint: &EfConstraint, opts: &SearchOptions) -> Result<Decision> {
    let n = inst.n();
    constraint.validate(n)?;
    let grid = inst.breakpoint_grid_with(&constraint.positions());
    let plans = plans_for(constraint, &grid, n - 1);
    let orders: Vec<Vec<usize>> = permutations(n).into_iter().filter(|o| constraint.admits_order(o)).collect();
    let per_order: BigUint = plans.iter().map(count_sequences).sum();
    let search_space = per_order * BigUint::from(orders.len());
    opts.check(&search_space)?;

    // Work items: (plan, order, first slot), searched depth-first inside.
    let mut items: Vec<(usize, usize, Option<Slot>)> = Vec::new();
    for (pi, plan) in plans.iter().enumerate() {
        for oi in 0..orders.len() {
            if plan.is_empty() {
                items.push((pi, oi, None));
            } else {
                items.extend(plan[0].iter().map(|&s| (pi, oi, Some(s))));
            }
        }
    }
    let found = find_map_first(opts.exec, &items, |&(pi, oi, first)| {
        let plan = &plans[pi];
        let order = &orders[oi];
        let mut prefix: Vec<Slot> = first.into_iter().collect();
        let mut leaf = |slots: &[Slot]| -> Result<Option<ContiguousAllocation>> {
            let cells = CellAssignment { bounds: slots.iter().map(|s| s.bounds(&grid)).collect() };
            match min_envy_for_cells(inst, order, &cells)? {
                Some((z, cuts)) if z.is_zero() => Ok(Some(ContiguousAllocation::new(cuts, order.clone())?)),
                _ => Ok(None),
            }
        };
        search_plan(plan, &mut prefix, &mut leaf).transpose()
    });
    let allocation = found.transpose()?;
    Ok(Decision { allocation, search_space })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridStrategy {
    /// Every monotone cut vector on the mesh with every order, lexicographic in (cuts, order).
    Exhaustive,
    /// Per (order, closed cell sequence): LP optimum floored onto the mesh.
    CellGuided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSearch {
    /// Accepted maximum envy.
    pub tolerance: Rational,
    /// Cut positions are multiples of `mesh` (plus 1).
    pub mesh: Rational,
    pub strategy: GridStrategy,
}

impl GridSearch {
    /// Tolerance `precision_bound` of the instance, with a mesh fine enough that
    /// flooring the cuts changes any piece value by at most a quarter of it.
    pub fn exactification(inst: &CakeInstance) -> Self {
        let bound = precision_bound(&PrecisionParams::from_instance(inst));
        let h_max = inst
            .valuations()
            .iter()
            .flat_map(|v| v.blocks().iter().map(|b| b.height.clone()))
            .max()
            .unwrap_or_else(Rational::one);
        let mesh = &bound / (Rational::from_integer(8.into()) * h_max);
        GridSearch { tolerance: bound, mesh, strategy: GridStrategy::CellGuided }
    }
}

/// Exhaustive search with mesh and tolerance both `eps`.
pub fn grid_eps_ef(inst: &CakeInstance, eps: &Rational) -> Result<Option<ContiguousAllocation>> {
    let gs = GridSearch { tolerance: eps.clone(), mesh: eps.clone(), strategy: GridStrategy::Exhaustive };
    grid_eps_ef_with(inst, &gs, &SearchOptions::from_env())
}

pub fn grid_eps_ef_with(inst: &CakeInstance, gs: &GridSearch, opts: &SearchOptions) -> Result<Option<ContiguousAllocation>> {
    if !gs.mesh.is_positive() || gs.tolerance.is_negative() {
        return Err(Error::Range(format!("need mesh > 0 and tolerance >= 0, got {} and {}", gs.mesh, gs.tolerance)));
    }
    let n = inst.n();
    if n == 1 {
        return Ok(Some(ContiguousAllocation::whole(0)));
    }
    match gs.strategy {
        GridStrategy::Exhaustive => grid_exhaustive(inst, gs, opts),
        GridStrategy::CellGuided => grid_cell_guided(inst, gs, opts),
    }
}

fn mesh_points(mesh: &Rational) -> Vec<Rational> {
    let steps = (Rational::one() / mesh).floor().to_integer();
    let count = steps.to_usize().expect("mesh too fine to enumerate");
    let mut pts: Vec<Rational> = (0..=count).map(|k| mesh * Rational::from_integer(BigInt::from(k))).collect();
    if pts.last() != Some(&Rational::one()) {
        pts.push(Rational::one());
    }
    pts
}

fn grid_exhaustive(inst: &CakeInstance, gs: &GridSearch, opts: &SearchOptions) -> Result<Option<ContiguousAllocation>> {
    let n = inst.n();
    let steps = (Rational::one() / &gs.mesh).ceil().to_integer();
    let points_count = steps.to_biguint().expect("positive") + BigUint::one();
    let seqs = exec::binomial_big(&(points_count.clone() + BigUint::from(n - 2)), n as u64 - 1);
    opts.check(&(seqs * exec::factorial(n as u64)))?;
    let pts = mesh_points(&gs.mesh);
    let cum: Vec<Vec<Rational>> = inst
        .valuations()
        .iter()
        .map(|v| pts.iter().map(|p| v.mass(&Rational::zero(), p)).collect())
        .collect();

    // Parallel over the first cut; inside, the remaining cuts in lexicographic order.
    let firsts: Vec<usize> = (0..pts.len()).collect();
    let found = find_map_first(opts.exec, &firsts, |&f| {
        let mut seq = vec![f; n - 1];
        loop {
            if let Some(order) = first_order(&cum, &seq, &gs.tolerance) {
                let cuts = seq.iter().map(|&t| pts[t].clone()).collect();
                return Some(ContiguousAllocation::new(cuts, order).expect("valid"));
            }
            // Next non-decreasing suffix with the first entry fixed.
            let i = (1..n - 1).rev().find(|&i| seq[i] + 1 < pts.len())?;
            let v = seq[i] + 1;
            for c in &mut seq[i..] {
                *c = v;
            }
        }
    });
    Ok(found)
}

/// Lexicographically first order whose allocation has envy at most `tol`.
fn first_order(cum: &[Vec<Rational>], seq: &[usize], tol: &Rational) -> Option<Vec<usize>> {
    let n = cum.len();
    let value = |i: usize, p: usize| -> Rational {
        let hi = if p + 1 == n { &cum[i][cum[i].len() - 1] } else { &cum[i][seq[p]] };
        if p == 0 {
            hi.clone()
        } else {
            hi - &cum[i][seq[p - 1]]
        }
    };
    let vals: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|p| value(i, p)).collect()).collect();
    let ok: Vec<Vec<bool>> = vals
        .iter()
        .map(|row| {
            let best = row.iter().max().expect("non-empty");
            row.iter().map(|v| v + tol >= *best).collect()
        })
        .collect();
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn dfs(p: usize, ok: &[Vec<bool>], order: &mut Vec<usize>, used: &mut [bool]) -> bool {
        if p == ok.len() {
            return true;
        }
        for a in 0..ok.len() {
            if !used[a] && ok[a][p] {
                used[a] = true;
                order.push(a);
                if dfs(p + 1, ok, order, used) {
                    return true;
                }
                order.pop();
                used[a] = false;
            }
        }
        false
    }
    dfs(0, &ok, &mut order, &mut used).then_some(order)
}

fn grid_cell_guided(inst: &CakeInstance, gs: &GridSearch, opts: &SearchOptions) -> Result<Option<ContiguousAllocation>> {
    let n = inst.n();
    let grid = inst.breakpoint_grid();
    let plans = plans_for(&EfConstraint::None, &grid, n - 1);
    let orders = permutations(n);
    opts.check(&(count_sequences(&plans[0]) * BigUint::from(orders.len())))?;
    let items: Vec<(usize, Slot)> = (0..orders.len()).flat_map(|o| plans[0][0].iter().map(move |&s| (o, s))).collect();
    let found = find_map_first(opts.exec, &items, |&(oi, first)| {
        let order = &orders[oi];
        let mut prefix = vec![first];
        let mut leaf = |slots: &[Slot]| -> Result<Option<ContiguousAllocation>> {
            let cells = CellAssignment { bounds: slots.iter().map(|s| s.bounds(&grid)).collect() };
            let Some((z, cuts)) = min_envy_for_cells(inst, order, &cells)? else { return Ok(None) };
            if z > gs.tolerance {
                return Ok(None);
            }
            let snapped = cuts.iter().map(|x| (x / &gs.mesh).floor() * &gs.mesh).collect();
            let a = ContiguousAllocation::new(snapped, order.clone())?;
            Ok((envy_report(inst, &a)?.max_envy <= gs.tolerance).then_some(a))
        };
        search_plan(&plans[0], &mut prefix, &mut leaf).transpose()
    });
    found.transpose()
}

/// With all cuts fixed, an envy-free assignment is a perfect matching between
/// agents and pieces they value most.
pub fn ef_with_fixed_all_cuts(inst: &CakeInstance, cuts: &[Rational]) -> Result<Option<ContiguousAllocation>> {
    let n = inst.n();
    if cuts.len() + 1 != n {
        return Err(Error::Dimension(format!("{} cuts for {n} agents", cuts.len())));
    }
    let probe = ContiguousAllocation::new(cuts.to_vec(), (0..n).collect())?;
    let pieces: Vec<(Rational, Rational)> = (0..n).map(|p| probe.piece(p)).collect();
    let adj: Vec<Vec<usize>> = inst
        .valuations()
        .iter()
        .map(|v| {
            let vals: Vec<Rational> = pieces.iter().map(|(a, b)| v.mass(a, b)).collect();
            let best = vals.iter().max().expect("non-empty").clone();
            (0..n).filter(|&p| vals[p] == best).collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(a: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &p in &adj[a] {
            if seen[p] {
                continue;
            }
            seen[p] = true;
            if owner[p].is_none_or(|b| augment(b, adj, owner, seen)) {
                owner[p] = Some(a);
                return true;
            }
        }
        false
    }
    for a in 0..n {
        let mut seen = vec![false; n];
        if !augment(a, &adj, &mut owner, &mut seen) {
            return Ok(None);
        }
    }
    let order = owner.into_iter().map(|o| o.expect("perfect matching")).collect();
    Ok(Some(ContiguousAllocation::new(cuts.to_vec(), order)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocations::is_eps_ef;
    use crate::exec::Exec;
    use crate::valuations::{int, rat, PiecewiseConstantValuation};

    fn two_uniform() -> CakeInstance {
        CakeInstance::new(vec![PiecewiseConstantValuation::uniform(), PiecewiseConstantValuation::uniform()]).unwrap()
    }

    fn uniform_and_left_quarter() -> CakeInstance {
        CakeInstance::from_blocks(vec![vec![(int(0), int(1), int(1))], vec![(int(0), rat(1, 4), int(4))]]).unwrap()
    }

    #[test]
    fn class_lp_two_uniform() {
        let cells = CellAssignment { bounds: vec![(int(0), int(1))] };
        let (z, cuts) = min_envy_for_cells(&two_uniform(), &[0, 1], &cells).unwrap().unwrap();
        assert_eq!(z, int(0));
        assert_eq!(cuts, vec![rat(1, 2)]);
        let one = CakeInstance::new(vec![PiecewiseConstantValuation::uniform()]).unwrap();
        let (z, cuts) = min_envy_for_cells(&one, &[0], &CellAssignment { bounds: vec![] }).unwrap().unwrap();
        assert_eq!(z, int(0));
        assert!(cuts.is_empty());
    }

    #[test]
    fn class_lp_incompatible_order_positive() {
        let cells = CellAssignment { bounds: vec![(int(0), rat(1, 4))] };
        let (z, _) = min_envy_for_cells(&uniform_and_left_quarter(), &[0, 1], &cells).unwrap().unwrap();
        assert!(z > int(0));
    }

    #[test]
    fn class_lp_rejects_straddling_cell() {
        let cells = CellAssignment { bounds: vec![(int(0), rat(1, 2))] };
        assert!(matches!(
            min_envy_for_cells(&uniform_and_left_quarter(), &[0, 1], &cells),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn exactify_near_half() {
        let approx = ContiguousAllocation::new(vec![rat(1, 2) - rat(1, 1000)], vec![0, 1]).unwrap();
        let exact = exactify(&two_uniform(), &approx).unwrap().unwrap();
        assert_eq!(exact.cuts, vec![rat(1, 2)]);
        assert!(is_eps_ef(&two_uniform(), &exact, &int(0)));
        let far = ContiguousAllocation::new(vec![rat(1, 4)], vec![0, 1]).unwrap();
        // Same open cell, so the LP still reaches 1/2.
        assert!(exactify(&two_uniform(), &far).unwrap().is_some());
        let pinned = ContiguousAllocation::new(vec![rat(1, 4)], vec![1, 0]).unwrap();
        assert!(exactify_with_breakpoints(&two_uniform(), &pinned, &[rat(1, 4)]).unwrap().is_none());
    }

    #[test]
    fn precision_bounds() {
        assert_eq!(precision_bound(&PrecisionParams::new(3, 1, 1)), Rational::new(1.into(), BigInt::from(3).pow(20u32)));
        assert_eq!(
            precision_bound(&PrecisionParams::new(3, 1, 2).with_common_denominator()),
            Rational::new(1.into(), BigInt::from(3).pow(8u32))
        );
        assert_eq!(precision_bound(&PrecisionParams::new(10, 2, 2)), Rational::new(1.into(), BigInt::from(10).pow(52u32)));
        let p = PrecisionParams::from_instance(&uniform_and_left_quarter());
        assert_eq!(p.m, BigUint::from(4u32));
        assert_eq!((p.k, p.n), (1, 2));
        assert!(p.common_denominator);
    }

    #[test]
    fn decide_examples() {
        let a = decide_ef(&two_uniform(), &EfConstraint::FullOrder(vec![0, 1])).unwrap().unwrap();
        assert_eq!(a.cuts, vec![rat(1, 2)]);
        let inst = uniform_and_left_quarter();
        assert_eq!(decide_ef(&inst, &EfConstraint::FullOrder(vec![0, 1])).unwrap(), None);
        let b = decide_ef(&inst, &EfConstraint::FullOrder(vec![1, 0])).unwrap().unwrap();
        assert!(is_eps_ef(&inst, &b, &int(0)));
        assert_eq!(b.order, vec![1, 0]);
    }

    #[test]
    fn decide_pinned_cuts() {
        let inst = two_uniform();
        assert!(decide_ef(&inst, &EfConstraint::CutAt(rat(1, 2))).unwrap().is_some());
        assert!(decide_ef(&inst, &EfConstraint::CutAt(rat(1, 3))).unwrap().is_none());
        assert!(decide_ef(&inst, &EfConstraint::LeftmostCutAt(rat(1, 2))).unwrap().is_some());
        assert!(decide_ef(&inst, &EfConstraint::AllCuts(vec![rat(1, 2)])).unwrap().is_some());
        assert!(decide_ef(&inst, &EfConstraint::CutsAt(vec![rat(1, 2), rat(1, 2)])).unwrap().is_none());
        let three = CakeInstance::new(vec![PiecewiseConstantValuation::uniform(); 3]).unwrap();
        let a = decide_ef(&three, &EfConstraint::CutsAt(vec![rat(2, 3), rat(1, 3)])).unwrap().unwrap();
        assert_eq!(a.cuts, vec![rat(1, 3), rat(2, 3)]);
        assert!(decide_ef(&three, &EfConstraint::CutAt(rat(1, 2))).unwrap().is_none());
    }

    #[test]
    fn decide_parallel_matches_sequential() {
        let inst = uniform_and_left_quarter();
        for c in [EfConstraint::None, EfConstraint::AgentLeftmost(1), EfConstraint::CutAt(rat(1, 8))] {
            let s = decide_ef_with(&inst, &c, &SearchOptions::sequential()).unwrap();
            let p = decide_ef_with(&inst, &c, &SearchOptions::default().with_exec(Exec::Parallel)).unwrap();
            assert_eq!(s, p);
        }
    }

    #[test]
    fn decide_resource_limit() {
        let inst = CakeInstance::new(vec![PiecewiseConstantValuation::uniform(); 4]).unwrap();
        let r = decide_ef_with(&inst, &EfConstraint::None, &SearchOptions::default().with_limit(3));
        assert!(matches!(r, Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn constraint_parsing() {
        assert_eq!("order:2,1".parse::<EfConstraint>().unwrap(), EfConstraint::FullOrder(vec![1, 0]));
        assert_eq!("leftmost:1".parse::<EfConstraint>().unwrap(), EfConstraint::AgentLeftmost(0));
        assert_eq!("cut-at:1/3".parse::<EfConstraint>().unwrap(), EfConstraint::CutAt(rat(1, 3)));
        assert_eq!(
            "all-cuts:1/3,2/3".parse::<EfConstraint>().unwrap(),
            EfConstraint::AllCuts(vec![rat(1, 3), rat(2, 3)])
        );
        assert!("order:0,1".parse::<EfConstraint>().is_err());
        assert!("bogus".parse::<EfConstraint>().is_err());
    }

    #[test]
    fn grid_examples() {
        let a = grid_eps_ef(&two_uniform(), &rat(1, 4)).unwrap().unwrap();
        assert_eq!(a.cuts, vec![rat(1, 2)]);
        assert_eq!(envy_report(&two_uniform(), &a).unwrap().max_envy, int(0));
        let one = CakeInstance::new(vec![PiecewiseConstantValuation::uniform()]).unwrap();
        assert_eq!(grid_eps_ef(&one, &rat(1, 7)).unwrap(), Some(ContiguousAllocation::whole(0)));
        assert!(grid_eps_ef(&two_uniform(), &int(0)).is_err());
    }

    #[test]
    fn grid_lexicographic_first() {
        // Mesh 1/3, tolerance 1/3: cut 0 fails, cut 1/3 with order (0,1) has envy 1/3.
        let a = grid_eps_ef(&two_uniform(), &rat(1, 3)).unwrap().unwrap();
        assert_eq!(a.cuts, vec![rat(1, 3)]);
        assert_eq!(a.order, vec![0, 1]);
    }

    #[test]
    fn cell_guided_snaps_within_tolerance() {
        let inst = uniform_and_left_quarter();
        let gs = GridSearch { tolerance: rat(1, 1000), mesh: rat(1, 7000), strategy: GridStrategy::CellGuided };
        let a = grid_eps_ef_with(&inst, &gs, &SearchOptions::default()).unwrap().unwrap();
        assert!(envy_report(&inst, &a).unwrap().max_envy <= rat(1, 1000));
        assert!(exactify(&inst, &a).unwrap().is_some());
    }

    #[test]
    fn fixed_cuts_matching() {
        let a = ef_with_fixed_all_cuts(&two_uniform(), &[rat(1, 2)]).unwrap().unwrap();
        assert!(is_eps_ef(&two_uniform(), &a, &int(0)));
        assert_eq!(ef_with_fixed_all_cuts(&two_uniform(), &[rat(9, 10)]).unwrap(), None);
        assert!(ef_with_fixed_all_cuts(&two_uniform(), &[]).is_err());
    }
}
