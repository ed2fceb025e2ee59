//! 3-SAT to contiguous cake cutting.
//!
//! Unscaled layout: the initiation interval `I_0 = [0,3]`, clause gadgets of
//! length 9 and variable gadgets of length 4, each followed by a 3-long
//! isolating interval (the last one by an unvalued tail). Every block has
//! height 1 before rescaling to `[0,1]`, so block lengths are values.

use num_traits::{One, Zero};

use super::{Formula3SAT, GadgetCertificate, GadgetKind, Region};
use crate::allocations::ContiguousAllocation;
use crate::error::{Error, Result};
use crate::exec::{map_collect, permutations, Exec};
use crate::ratlp::{solve_lp, LinearProgram, LpStatus, Relation};
use crate::valuations::{int, rat, CakeInstance, Rational};

fn clause_block() -> Rational {
    rat(6, 25)
}

fn literal_block() -> Rational {
    rat(7, 25)
}

/// Values of the isolating agents: `S_0` holds `s0_own` in `I_0[1]` and
/// three `s0_block` blocks; `S_k` holds `sk_own` in `I_k[2]` and two
/// `sk_block` blocks in the next isolating interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationWeights {
    pub s0_own: Rational,
    pub s0_block: Rational,
    pub sk_own: Rational,
    pub sk_block: Rational,
}

impl IsolationWeights {
    /// Weights for which the witness leaves every isolating agent envy-free.
    pub fn balanced() -> Self {
        IsolationWeights { s0_own: rat(1, 5), s0_block: rat(4, 15), sk_own: rat(3, 10), sk_block: rat(7, 20) }
    }

    /// `1/7, 2/7` and `1/5, 2/5`: the witness cuts every side block in half,
    /// which hands the middle agent of an isolating interval twice the owner's
    /// share.
    pub fn halving() -> Self {
        IsolationWeights { s0_own: rat(1, 7), s0_block: rat(2, 7), sk_own: rat(1, 5), sk_block: rat(2, 5) }
    }

    pub fn validate(&self) -> Result<()> {
        let one = Rational::one();
        let parts = [&self.s0_own, &self.s0_block, &self.sk_own, &self.sk_block];
        if parts.iter().any(|w| !(w > &&Rational::zero() && w <= &&one)) {
            return Err(Error::InvalidInstance("isolation weights must lie in (0,1]".into()));
        }
        if &self.s0_own + int(3) * &self.s0_block != one || &self.sk_own + int(2) * &self.sk_block != one {
            return Err(Error::InvalidInstance("isolation weights must total 1 per agent".into()));
        }
        if self.s0_own > self.s0_block || self.sk_own > self.sk_block {
            return Err(Error::InvalidInstance("own blocks must not exceed side blocks".into()));
        }
        Ok(())
    }
}

impl Default for IsolationWeights {
    fn default() -> Self {
        Self::balanced()
    }
}

/// Block of length `w` centred in the unit interval starting at `u`.
fn centered(u: &Rational, w: &Rational) -> (Rational, Rational) {
    let l = u + (Rational::one() - w) / int(2);
    let r = &l + w;
    (l, r)
}

fn positive_literal_block(b: &Rational) -> (Rational, Rational) {
    centered(&(b + int(1)), &literal_block())
}

fn negative_literal_block(b: &Rational) -> (Rational, Rational) {
    centered(&(b + int(2)), &literal_block())
}

struct Layout {
    m: usize,
    gadget_start: Vec<Rational>,
    gadget_end: Vec<Rational>,
    /// `iso[k]` is the left end of `I_k`.
    iso: Vec<Rational>,
    length: Rational,
}

impl Layout {
    fn new(m: usize, n: usize) -> Self {
        let total = m + n;
        let gadget_start: Vec<Rational> = (0..total)
            .map(|g| if g < m { int(3 + 12 * g as i64) } else { int(3 + 12 * m as i64 + 7 * (g - m) as i64) })
            .collect();
        let gadget_end: Vec<Rational> =
            (0..total).map(|g| &gadget_start[g] + int(if g < m { 9 } else { 4 })).collect();
        let mut iso = vec![Rational::zero()];
        iso.extend(gadget_end[..total - 1].iter().cloned());
        Layout { m, gadget_start, gadget_end, iso, length: int(12 * m as i64 + 7 * n as i64 + 3) }
    }

    fn total(&self) -> usize {
        self.gadget_start.len()
    }

    fn variable_start(&self, j: usize) -> &Rational {
        &self.gadget_start[self.m + j]
    }

    /// The two assignment-independent cuts inside `I_k`, `k >= 1`.
    fn iso_cuts(&self, w: &IsolationWeights, k: usize) -> (Rational, Rational) {
        let (own, side) = if k == 1 { (&w.s0_own, &w.s0_block) } else { (&w.sk_own, &w.sk_block) };
        let (l1, _) = centered(&self.iso[k], side);
        let (_, r3) = centered(&(&self.iso[k] + int(2)), side);
        (l1 + own, r3 - own)
    }

    /// Cut at position 1 and the even split of `S_0`'s block in `I_0[3]`.
    fn initiation_cuts(&self) -> [Rational; 2] {
        [int(1), rat(5, 2)]
    }
}

pub fn gen_cake_from_3sat(f: &Formula3SAT) -> Result<(CakeInstance, GadgetCertificate)> {
    gen_cake_from_3sat_with(f, &IsolationWeights::default())
}

pub fn gen_cake_from_3sat_with(f: &Formula3SAT, w: &IsolationWeights) -> Result<(CakeInstance, GadgetCertificate)> {
    f.validate()?;
    w.validate()?;
    let (m, n) = (f.m(), f.n);
    let lay = Layout::new(m, n);
    let total = lay.total();
    let mut agents: Vec<(String, Vec<(Rational, Rational)>)> = Vec::with_capacity(4 * m + 3 * n + 1);

    agents.push((
        "S_0".into(),
        vec![
            centered(&int(0), &w.s0_own),
            centered(&int(2), &w.s0_block),
            centered(&lay.iso[1], &w.s0_block),
            centered(&(&lay.iso[1] + int(2)), &w.s0_block),
        ],
    ));
    agents.push(("S_0'".into(), vec![(int(1), int(2))]));
    let mut regions = vec![Region::new("I_0", int(0), int(3))];

    for g in 0..total {
        let a = &lay.gadget_start[g];
        if g < m {
            regions.push(Region::new(format!("clause C_{}", g + 1), a.clone(), lay.gadget_end[g].clone()));
            for (k, &lit) in f.clauses[g].iter().enumerate() {
                let mut blocks: Vec<(Rational, Rational)> = (0..9)
                    .filter(|s| s % 3 == k)
                    .map(|s| (a + int(s as i64) + rat(19, 50), a + int(s as i64) + rat(31, 50)))
                    .collect();
                let b = lay.variable_start(lit.unsigned_abs() as usize - 1);
                blocks.push(if lit > 0 { positive_literal_block(b) } else { negative_literal_block(b) });
                agents.push((format!("C_{}^{}", g + 1, k + 1), blocks));
            }
        } else {
            let j = g - m;
            regions.push(Region::new(format!("variable x_{}", j + 1), a.clone(), lay.gadget_end[g].clone()));
            agents.push((format!("L_{}", j + 1), vec![(a.clone(), a + int(1))]));
            agents.push((format!("R_{}", j + 1), vec![(a + int(3), a + int(4))]));
        }
        if g + 1 < total {
            let k = g + 1;
            let c = &lay.iso[k];
            regions.push(Region::new(format!("I_{k}"), c.clone(), c + int(3)));
            let blocks = if k == total - 1 {
                vec![(c + int(1), c + int(2))]
            } else {
                let next = &lay.iso[k + 1];
                vec![
                    centered(&(c + int(1)), &w.sk_own),
                    centered(next, &w.sk_block),
                    centered(&(next + int(2)), &w.sk_block),
                ]
            };
            agents.push((format!("S_{k}"), blocks));
        }
    }
    regions.push(Region::new("tail", &lay.length - int(3), lay.length.clone()));

    let inst = CakeInstance::from_blocks(
        agents
            .iter()
            .map(|(_, bs)| bs.iter().map(|(l, r)| (l / &lay.length, r / &lay.length, Rational::one())).collect())
            .collect(),
    )?;
    let mut fixed: Vec<Rational> = lay.initiation_cuts().to_vec();
    for k in 1..total {
        let (c1, c2) = lay.iso_cuts(w, k);
        fixed.push(c1);
        fixed.push(c2);
    }
    let cert = GadgetCertificate {
        kind: GadgetKind::CakeSat,
        length: lay.length.clone(),
        regions,
        agents: agents.iter().map(|(name, _)| name.clone()).collect(),
        agent_blocks: agents
            .iter()
            .map(|(name, bs)| bs.iter().map(|(l, r)| Region::new(name.clone(), l.clone(), r.clone())).collect())
            .collect(),
        fixed_cuts: fixed.iter().map(|c| c / &lay.length).collect(),
        eps: Some(rat(1, 100)),
    };
    Ok((inst, cert))
}

pub fn witness_cake(f: &Formula3SAT, assignment: &[bool]) -> Result<ContiguousAllocation> {
    witness_cake_with(f, assignment, &IsolationWeights::default())
}

/// Envy-free allocation in the standard ordering for a satisfying assignment.
///
/// In `I_k[1]` the cut leaves the left neighbour exactly the owner's own value
/// of the side block; in `I_k[3]` it leaves the same to the right neighbour.
pub fn witness_cake_with(f: &Formula3SAT, assignment: &[bool], w: &IsolationWeights) -> Result<ContiguousAllocation> {
    f.validate()?;
    w.validate()?;
    f.check_assignment(assignment)?;
    let lay = Layout::new(f.m(), f.n);
    let total = lay.total();
    let mut cuts: Vec<Rational> = lay.initiation_cuts().to_vec();
    for g in 0..total {
        let a = &lay.gadget_start[g];
        if g < lay.m {
            let (c1, c2) = match f.sad_position(g, assignment) {
                0 => (1, 5),
                1 => (4, 5),
                _ => (4, 8),
            };
            cuts.push(a + int(c1));
            cuts.push(a + int(c2));
        } else {
            let off = if assignment[g - lay.m] { rat(3, 2) } else { rat(5, 2) };
            cuts.push(a + off);
        }
        if g + 1 < total {
            let (c1, c2) = lay.iso_cuts(w, g + 1);
            cuts.push(c1);
            cuts.push(c2);
        }
    }
    let n_agents = cuts.len() + 1;
    ContiguousAllocation::new(cuts.iter().map(|c| c / &lay.length).collect(), (0..n_agents).collect())
}

/// Agent `k`'s blocks inside a lone clause gadget `[0,9]`.
fn clause_agent_blocks(k: usize) -> Vec<(Rational, Rational)> {
    (0..9)
        .filter(|s| s % 3 == k)
        .map(|s| (int(s as i64) + rat(19, 50), int(s as i64) + rat(31, 50)))
        .collect()
}

/// Value each clause agent takes from a lone clause gadget `[0,9]` cut at
/// `cuts` (unscaled) with pieces assigned left to right by `order`.
/// Values are in the agents' full-instance units.
pub fn clause_gadget_values(order: &[usize], cuts: &[Rational]) -> Result<Vec<Rational>> {
    if order.len() != 3 || cuts.len() != 2 {
        return Err(Error::Dimension("a clause gadget has three pieces".into()));
    }
    let mut ends = vec![int(0)];
    ends.extend(cuts.iter().cloned());
    ends.push(int(9));
    if ends.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::Range(format!("cuts {cuts:?} not sorted within [0,9]")));
    }
    let mut out = vec![Rational::zero(); 3];
    for (p, &a) in order.iter().enumerate() {
        if a >= 3 {
            return Err(Error::Dimension(format!("agent {a} outside the clause gadget")));
        }
        out[a] = clause_agent_blocks(a).iter().map(|(l, r)| overlap(l, r, &ends[p], &ends[p + 1])).sum();
    }
    Ok(out)
}

fn overlap(l: &Rational, r: &Rational, a: &Rational, b: &Rational) -> Rational {
    let lo = if l > a { l } else { a };
    let hi = if r < b { r } else { b };
    if hi > lo {
        hi - lo
    } else {
        Rational::zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseGadgetReport {
    /// (cell pair, permutation) classes solved.
    pub classes: usize,
    /// Largest achievable minimum value over all classes.
    pub max_min: Rational,
    pub witness_order: Vec<usize>,
    /// Unscaled cuts in `[0,9]` attaining `max_min`.
    pub witness_cuts: Vec<Rational>,
    pub bound: Rational,
    /// No single cut can lie inside both literal blocks of a variable gadget.
    pub variable_gadget_ok: bool,
}

impl ClauseGadgetReport {
    pub fn holds(&self) -> bool {
        self.max_min <= self.bound && self.variable_gadget_ok
    }
}

pub fn verify_clause_gadget_property() -> Result<ClauseGadgetReport> {
    verify_clause_gadget_property_with(Exec::default())
}

/// Solves `max t` subject to every clause agent getting at least `t` for
/// each pair of closed grid cells holding the two cuts and each order.
pub fn verify_clause_gadget_property_with(exec: Exec) -> Result<ClauseGadgetReport> {
    let blocks: Vec<Vec<(Rational, Rational)>> = (0..3).map(clause_agent_blocks).collect();
    let mut grid: Vec<Rational> = vec![int(0), int(9)];
    grid.extend(blocks.iter().flatten().flat_map(|(l, r)| [l.clone(), r.clone()]));
    grid.sort();
    grid.dedup();
    let cells = grid.len() - 1;
    let cum = |a: usize, x: &Rational| -> Rational { blocks[a].iter().map(|(l, r)| overlap(l, r, &int(0), x)).sum() };
    // Density and cumulative value at the left end of each cell, per agent.
    let dens: Vec<Vec<Rational>> = (0..3)
        .map(|a| {
            (0..cells)
                .map(|c| {
                    let inside = blocks[a].iter().any(|(l, r)| l <= &grid[c] && &grid[c + 1] <= r);
                    if inside { Rational::one() } else { Rational::zero() }
                })
                .collect()
        })
        .collect();
    let base: Vec<Vec<Rational>> = (0..3).map(|a| grid[..cells].iter().map(|x| cum(a, x)).collect()).collect();
    let mut classes = Vec::new();
    for c1 in 0..cells {
        for c2 in c1..cells {
            for perm in permutations(3) {
                classes.push((c1, c2, perm));
            }
        }
    }
    let results = map_collect(exec, &classes, |(c1, c2, perm)| -> Result<Option<(Rational, Vec<Rational>)>> {
        let cs = [*c1, *c2];
        let mut lp = LinearProgram::new(3);
        lp.minimize(vec![int(0), int(0), int(-1)]);
        for (v, &c) in cs.iter().enumerate() {
            lp.bound(v, Some(grid[c].clone()), Some(grid[c + 1].clone()));
        }
        lp.add(vec![int(1), int(-1), int(0)], Relation::Le, int(0));
        for (p, &a) in perm.iter().enumerate() {
            // t - F_a(right) + F_a(left) <= 0 with F_a affine on each cell.
            let mut coeffs = vec![int(0), int(0), int(1)];
            let mut rhs = Rational::zero();
            if p < 2 {
                let c = cs[p];
                coeffs[p] -= &dens[a][c];
                rhs += &base[a][c] - &dens[a][c] * &grid[c];
            } else {
                rhs += cum(a, &int(9));
            }
            if p > 0 {
                let c = cs[p - 1];
                coeffs[p - 1] += &dens[a][c];
                rhs -= &base[a][c] - &dens[a][c] * &grid[c];
            }
            lp.add(coeffs, Relation::Le, rhs);
        }
        let res = solve_lp(&lp)?;
        Ok(match res.status {
            LpStatus::Optimal => Some((-res.objective, res.solution[..2].to_vec())),
            _ => None,
        })
    });
    let mut best: Option<(Rational, Vec<usize>, Vec<Rational>)> = None;
    for (r, (_, _, perm)) in results.into_iter().zip(&classes) {
        if let Some((t, cuts)) = r? {
            if best.as_ref().is_none_or(|(b, _, _)| &t > b) {
                best = Some((t, perm.clone(), cuts));
            }
        }
    }
    let (max_min, witness_order, witness_cuts) =
        best.ok_or_else(|| Error::Precondition("no feasible clause gadget class".into()))?;
    let b = int(0);
    let (_, pos_hi) = positive_literal_block(&b);
    let (neg_lo, _) = negative_literal_block(&b);
    Ok(ClauseGadgetReport {
        classes: classes.len(),
        max_min,
        witness_order,
        witness_cuts,
        bound: clause_block(),
        variable_gadget_ok: pos_hi <= neg_lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocations::{envy_report, is_eps_ef};
    use crate::exact_solver::ef_with_fixed_all_cuts;
    use crate::valuations::eval;

    fn clause_literals(f: &Formula3SAT) -> Vec<String> {
        f.clauses.iter().flatten().map(|&l| super::super::literal_name(l)).collect()
    }

    fn f(n: usize, clauses: Vec<[i32; 3]>) -> Formula3SAT {
        Formula3SAT::new(n, clauses).unwrap()
    }

    #[test]
    fn sizes_follow_the_layout() {
        let (inst, cert) = gen_cake_from_3sat(&f(3, vec![[1, -2, 3]])).unwrap();
        assert_eq!((cert.length.clone(), inst.n()), (int(36), 14));
        let (inst, cert) = gen_cake_from_3sat(&f(3, vec![[1, -2, 3], [-1, 2, -3]])).unwrap();
        assert_eq!((cert.length.clone(), inst.n()), (int(48), 18));
        assert!(cert.regions_tile());
        assert_eq!(cert.agents.len(), 18);
        assert_eq!(cert.agent_index("S_0'"), Some(1));
    }

    #[test]
    fn every_agent_holds_unit_value() {
        let (_, cert) = gen_cake_from_3sat(&f(2, vec![[1, -2, 2], [-1, -1, 2]])).unwrap();
        for bs in &cert.agent_blocks {
            let total: Rational = bs.iter().map(|r| &r.end - &r.start).sum();
            assert_eq!(total, int(1));
        }
    }

    #[test]
    fn clause_agent_value_inside_its_gadget() {
        let (inst, cert) = gen_cake_from_3sat(&f(3, vec![[1, -2, 3]])).unwrap();
        let g = cert.regions.iter().find(|r| r.name == "clause C_1").unwrap();
        let i = cert.agent_index("C_1^1").unwrap();
        let v = eval(inst.valuation(i), &(&g.start / &cert.length), &(&g.end / &cert.length)).unwrap();
        assert_eq!(v, rat(18, 25));
    }

    #[test]
    fn blocks_overlap_only_for_equal_literals() {
        let formula = f(2, vec![[1, 1, -2], [1, 2, -2]]);
        let (_, cert) = gen_cake_from_3sat(&formula).unwrap();
        let lits = clause_literals(&formula);
        let lit_of = |a: usize| cert.agents[a].starts_with("C_").then(|| {
            let idx = cert.agents[..=a].iter().filter(|s| s.starts_with("C_")).count() - 1;
            lits[idx].clone()
        });
        for a in 0..cert.agents.len() {
            for b in a + 1..cert.agents.len() {
                for x in &cert.agent_blocks[a] {
                    for y in &cert.agent_blocks[b] {
                        if overlap(&x.start, &x.end, &y.start, &y.end).is_zero() {
                            continue;
                        }
                        assert!(lit_of(a).is_some() && lit_of(a) == lit_of(b));
                        assert_eq!((&x.start, &x.end), (&y.start, &y.end));
                    }
                }
            }
        }
    }

    #[test]
    fn witness_for_repeated_literal() {
        let formula = f(1, vec![[1, 1, 1]]);
        let (inst, cert) = gen_cake_from_3sat(&formula).unwrap();
        let w = witness_cake(&formula, &[true]).unwrap();
        assert!(is_eps_ef(&inst, &w, &int(0)));
        assert_eq!(w.order[0], cert.agent_index("S_0").unwrap());
        assert!(w.cuts.contains(&(int(1) / &cert.length)));
        assert!(cert.fixed_cuts.iter().all(|c| w.cuts.contains(c)));
        assert!(ef_with_fixed_all_cuts(&inst, &w.cuts).unwrap().is_some());
        assert!(matches!(witness_cake(&formula, &[false]), Err(Error::Precondition(_))));
    }

    #[test]
    fn witness_every_sad_position() {
        let formula = f(3, vec![[1, 2, 3]]);
        let (inst, _) = gen_cake_from_3sat(&formula).unwrap();
        for a in [[true, false, false], [false, true, false], [false, false, true], [true, true, true]] {
            let w = witness_cake(&formula, &a).unwrap();
            assert!(envy_report(&inst, &w).unwrap().is_envy_free(), "{a:?}");
        }
    }

    #[test]
    fn halving_weights_leave_isolating_envy() {
        let formula = f(1, vec![[1, 1, -1]]);
        let w = IsolationWeights::halving();
        let (inst, cert) = gen_cake_from_3sat_with(&formula, &w).unwrap();
        let alloc = witness_cake_with(&formula, &[true], &w).unwrap();
        let rep = envy_report(&inst, &alloc).unwrap();
        assert_eq!(rep.max_envy, rat(1, 7));
        let s0 = cert.agent_index("S_0").unwrap();
        let s1 = cert.agent_index("S_1").unwrap();
        assert!(rep.envious_pairs().contains(&(s0, s1)));
    }

    #[test]
    fn invalid_weights_rejected() {
        let mut w = IsolationWeights::balanced();
        w.sk_own = rat(1, 2);
        assert!(w.validate().is_err());
    }

    #[test]
    fn clause_gadget_enumeration() {
        let r = verify_clause_gadget_property().unwrap();
        assert_eq!(r.classes, 19 * 20 / 2 * 6);
        assert_eq!(r.max_min, rat(6, 25));
        assert!(r.holds());
        let vals = clause_gadget_values(&r.witness_order, &r.witness_cuts).unwrap();
        assert_eq!(vals.iter().min().unwrap(), &rat(6, 25));
    }

    #[test]
    fn clause_gadget_direct_values() {
        let v = clause_gadget_values(&[0, 1, 2], &[int(3), int(6)]).unwrap();
        assert_eq!(v, vec![rat(6, 25); 3]);
        let v = clause_gadget_values(&[2, 0, 1], &[int(4), int(4)]).unwrap();
        assert!(v.contains(&Rational::zero()));
    }
}
