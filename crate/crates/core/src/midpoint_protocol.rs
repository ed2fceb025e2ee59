//! Midpoint protocol: a contiguous 1/4-envy-free allocation for agents that are
//! uniform on a single interval `R_i`.
//!
//! Available parts `A_i` are closed components of `R_i` minus the allocated
//! intervals, so a midpoint sitting on the edge of an allocated interval still
//! counts as available.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::allocations::ContiguousAllocation;
use crate::error::{Error, Result};
use crate::valuations::{int, rat, CakeInstance, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    Case1,
    /// `s`: later agents whose midpoint is within 1/4 of this agent's value; `k = min s`.
    Case2 { s: Vec<usize>, k: Option<usize> },
    /// `ell`: the earlier agent whose interval holds this agent's midpoint.
    Case3 { ell: usize },
    Case4,
}

/// Turns where the literal rule had no candidate and a substitute was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Fallback {
    /// Case 2 with an empty `S_i`: interval centred on `mid(i)` and clipped into `A_i`.
    EmptySet,
    /// Case 2 whose `mid(k)`-anchored intervals do not fit in `A_i`.
    AnchorBlocked,
    /// Case 4 with no restrained component; cake-end components were used.
    CakeEnds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Turn {
    pub agent: usize,
    pub case: CaseTag,
    /// `M_i` before extension; `None` when `A_i` was empty.
    pub interval: Option<(Rational, Rational)>,
    pub fallback: Option<Fallback>,
}

#[derive(Clone, Debug)]
pub struct Alg2Run {
    pub allocation: ContiguousAllocation,
    /// Turns in processing order.
    pub turns: Vec<Turn>,
    /// Two pre-extension intervals touch.
    pub adjacent_before_extension: bool,
}

impl Alg2Run {
    /// Case tags indexed by agent.
    pub fn case_by_agent(&self) -> Vec<CaseTag> {
        let mut out = vec![CaseTag::Case4; self.turns.len()];
        for t in &self.turns {
            out[t.agent] = t.case.clone();
        }
        out
    }
}

struct Agent {
    lo: Rational,
    hi: Rational,
    mid: Rational,
    quarter: Rational,
}

impl Agent {
    fn value(&self, a: &Rational, b: &Rational) -> Rational {
        let lo = if a > &self.lo { a } else { &self.lo };
        let hi = if b < &self.hi { b } else { &self.hi };
        if lo >= hi {
            Rational::zero()
        } else {
            (hi - lo) / (&self.hi - &self.lo)
        }
    }
}

#[derive(Clone)]
struct Component {
    lo: Rational,
    hi: Rational,
    left_touch: bool,
    right_touch: bool,
}

impl Component {
    fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    fn holds(&self, a: &Rational, b: &Rational) -> bool {
        &self.lo <= a && b <= &self.hi
    }
}

fn components(agent: &Agent, allocated: &[(usize, Rational, Rational)]) -> Vec<Component> {
    let mut taken: Vec<&(usize, Rational, Rational)> = allocated.iter().collect();
    taken.sort_by(|a, b| a.1.cmp(&b.1));
    let mut out = Vec::new();
    let mut cur = agent.lo.clone();
    for (_, l, r) in taken {
        if r <= &cur || l >= &agent.hi {
            continue;
        }
        if l > &cur {
            out.push((cur.clone(), l.clone()));
        }
        if r > &cur {
            cur = r.clone();
        }
    }
    if cur < agent.hi {
        out.push((cur, agent.hi.clone()));
    }
    out.into_iter()
        .map(|(lo, hi)| Component {
            left_touch: allocated.iter().any(|(_, _, r)| r == &lo),
            right_touch: allocated.iter().any(|(_, l, _)| l == &hi),
            lo,
            hi,
        })
        .collect()
}

pub fn run_alg2(inst: &CakeInstance) -> Result<(ContiguousAllocation, Vec<CaseTag>)> {
    let run = run_alg2_traced(inst)?;
    let tags = run.case_by_agent();
    Ok((run.allocation, tags))
}

pub fn run_alg2_traced(inst: &CakeInstance) -> Result<Alg2Run> {
    let n = inst.n();
    let mut agents = Vec::with_capacity(n);
    for (i, v) in inst.valuations().iter().enumerate() {
        let (lo, hi) = v
            .uniform_interval()
            .ok_or_else(|| Error::InvalidInstance(format!("agent {} is not uniform on a single interval", i + 1)))?;
        let mid = (&lo + &hi) / int(2);
        let quarter = (&hi - &lo) / int(4);
        agents.push(Agent { lo, hi, mid, quarter });
    }
    let mut ord: Vec<usize> = (0..n).collect();
    ord.sort_by(|&a, &b| (&agents[a].hi - &agents[a].lo).cmp(&(&agents[b].hi - &agents[b].lo)).then(a.cmp(&b)));

    let quarter_value = rat(1, 4);
    let mut allocated: Vec<(usize, Rational, Rational)> = Vec::new();
    let mut turns = Vec::with_capacity(n);

    for (t, &i) in ord.iter().enumerate() {
        let ag = &agents[i];
        let q = &ag.quarter;
        let comps = components(ag, &allocated);
        let mid_comp = comps.iter().find(|c| c.contains(&ag.mid) && c.len() >= *q);

        let mut pick: Option<(CaseTag, Rational, Rational, Option<Fallback>)> = None;

        // Case 1: restrained, value 1/4, holds mid(i).
        if let Some(c) = mid_comp {
            if c.left_touch && ag.mid <= &c.lo + q {
                pick = Some((CaseTag::Case1, c.lo.clone(), &c.lo + q, None));
            } else if c.right_touch && ag.mid >= &c.hi - q {
                pick = Some((CaseTag::Case1, &c.hi - q, c.hi.clone(), None));
            }
        }

        // Case 2: any value-1/4 interval holding mid(i), anchored at mid(k).
        if pick.is_none() {
            if let Some(c) = mid_comp {
                let s: Vec<usize> = ord[t + 1..]
                    .iter()
                    .copied()
                    .filter(|&j| {
                        let (a, b) = if ag.mid <= agents[j].mid {
                            (&ag.mid, &agents[j].mid)
                        } else {
                            (&agents[j].mid, &ag.mid)
                        };
                        ag.value(a, b) <= quarter_value
                    })
                    .collect();
                let k = s.first().copied();
                let anchored = k.and_then(|k| {
                    let mk = &agents[k].mid;
                    [(mk - q, mk.clone()), (mk.clone(), mk + q)]
                        .into_iter()
                        .find(|(a, b)| a <= &ag.mid && &ag.mid <= b && c.holds(a, b))
                });
                let (a, b, fb) = match anchored {
                    Some((a, b)) => (a, b, None),
                    None => {
                        let half = q / int(2);
                        let mut a = &ag.mid - &half;
                        if a > &c.hi - q {
                            a = &c.hi - q;
                        }
                        if a < c.lo {
                            a = c.lo.clone();
                        }
                        let b = &a + q;
                        let fb = if k.is_none() { Fallback::EmptySet } else { Fallback::AnchorBlocked };
                        (a, b, Some(fb))
                    }
                };
                pick = Some((CaseTag::Case2 { s, k }, a, b, fb));
            }
        }

        // Case 3: mid(i) inside an earlier interval with room for value 1/4 next to it.
        if pick.is_none() {
            let mut best: Option<(Rational, Rational, usize)> = None;
            for (ell, l, r) in &allocated {
                if !(l <= &ag.mid && &ag.mid <= r) {
                    continue;
                }
                for c in &comps {
                    let cand = if &c.hi == l && c.len() >= *q {
                        Some((&c.hi - q, c.hi.clone()))
                    } else if &c.lo == r && c.len() >= *q {
                        Some((c.lo.clone(), &c.lo + q))
                    } else {
                        None
                    };
                    if let Some((a, b)) = cand {
                        if best.as_ref().is_none_or(|(ba, _, _)| &a < ba) {
                            best = Some((a, b, *ell));
                        }
                    }
                }
            }
            if let Some((a, b, ell)) = best {
                pick = Some((CaseTag::Case3 { ell }, a, b, None));
            }
        }

        // Case 4: largest restrained interval of value at most 1/4.
        let turn = match pick {
            Some((case, a, b, fallback)) => Turn { agent: i, case, interval: Some((a, b)), fallback },
            None => {
                let choose = |restrained: &dyn Fn(&Component) -> (bool, bool)| {
                    let mut best: Option<(Rational, Rational)> = None;
                    for c in &comps {
                        let (lt, rt) = restrained(c);
                        if !lt && !rt {
                            continue;
                        }
                        let len = if c.len() < *q { c.len() } else { q.clone() };
                        let (a, b) = if lt { (c.lo.clone(), &c.lo + &len) } else { (&c.hi - &len, c.hi.clone()) };
                        let better = match &best {
                            None => true,
                            Some((ba, bb)) => {
                                let bl = bb - ba;
                                len > bl || (len == bl && &a < ba)
                            }
                        };
                        if better {
                            best = Some((a, b));
                        }
                    }
                    best
                };
                let mut fallback = None;
                let mut interval = choose(&|c: &Component| (c.left_touch, c.right_touch));
                if interval.is_none() && !comps.is_empty() {
                    fallback = Some(Fallback::CakeEnds);
                    interval = choose(&|c: &Component| (c.lo.is_zero(), c.hi.is_one()))
                        .or_else(|| choose(&|_: &Component| (true, false)));
                }
                Turn { agent: i, case: CaseTag::Case4, interval, fallback }
            }
        };
        if let Some((a, b)) = &turn.interval {
            debug_assert!(ag.value(a, b) <= quarter_value);
            allocated.push((i, a.clone(), b.clone()));
        }
        turns.push(turn);
    }

    let (allocation, adjacent) = extend(n, &allocated);
    Ok(Alg2Run { allocation, turns, adjacent_before_extension: adjacent })
}

/// Extension phase. With an adjacent pair, pieces left of the shared border grow
/// leftward and pieces right of it grow rightward; otherwise every piece grows
/// rightward and the leftmost also reaches 0.
fn extend(n: usize, allocated: &[(usize, Rational, Rational)]) -> (ContiguousAllocation, bool) {
    let mut pieces: Vec<(usize, Rational, Rational)> = allocated.to_vec();
    pieces.sort_by(|a, b| a.1.cmp(&b.1));
    let pair = pieces.windows(2).position(|w| w[0].2 == w[1].1);
    let len = pieces.len();
    let mut ends: Vec<Rational> = Vec::with_capacity(len);
    match pair {
        Some(p) => {
            // Right end of piece x after extension.
            for x in 0..len {
                let right = if x <= p {
                    pieces[x].2.clone()
                } else if x + 1 < len {
                    pieces[x + 1].1.clone()
                } else {
                    Rational::one()
                };
                ends.push(right);
            }
        }
        None => {
            for x in 0..len {
                ends.push(if x + 1 < len { pieces[x + 1].1.clone() } else { Rational::one() });
            }
        }
    }
    let mut cuts: Vec<Rational> = ends[..len.saturating_sub(1)].to_vec();
    let mut order: Vec<usize> = pieces.iter().map(|p| p.0).collect();
    let mut placed = vec![false; n];
    for &a in &order {
        placed[a] = true;
    }
    for (a, done) in placed.iter().enumerate() {
        if !done {
            if !order.is_empty() {
                cuts.push(Rational::one());
            }
            order.push(a);
        }
    }
    let alloc = ContiguousAllocation::new(cuts, order).expect("extension yields a valid allocation");
    (alloc, pair.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocations::envy_report;
    use crate::valuations::PiecewiseConstantValuation;

    fn intervals(rs: &[(i64, i64, i64, i64)]) -> CakeInstance {
        CakeInstance::new(
            rs.iter()
                .map(|&(a, b, c, d)| PiecewiseConstantValuation::uniform_on(rat(a, b), rat(c, d)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_agent() {
        let inst = intervals(&[(0, 1, 1, 1)]);
        let (a, tags) = run_alg2(&inst).unwrap();
        assert_eq!(a, ContiguousAllocation::whole(0));
        assert!(matches!(tags[0], CaseTag::Case2 { .. }));
    }

    #[test]
    fn identical_full_intervals_trace() {
        let inst = intervals(&[(0, 1, 1, 1), (0, 1, 1, 1)]);
        let run = run_alg2_traced(&inst).unwrap();
        assert_eq!(run.turns[0].case, CaseTag::Case2 { s: vec![1], k: Some(1) });
        assert_eq!(run.turns[0].interval, Some((rat(1, 4), rat(1, 2))));
        // mid(2) = 1/2 is the right edge of M_1, so a restrained interval holds it.
        assert_eq!(run.turns[1].case, CaseTag::Case1);
        assert_eq!(run.turns[1].interval, Some((rat(1, 2), rat(3, 4))));
        assert!(run.adjacent_before_extension);
        assert_eq!(run.allocation.cuts, vec![rat(1, 2)]);
        assert_eq!(envy_report(&inst, &run.allocation).unwrap().max_envy, int(0));
    }

    #[test]
    fn disjoint_halves() {
        let inst = intervals(&[(0, 1, 1, 2), (1, 2, 1, 1)]);
        let run = run_alg2_traced(&inst).unwrap();
        assert_eq!(run.turns[0].fallback, Some(Fallback::EmptySet));
        assert_eq!(run.turns[0].interval, Some((rat(3, 16), rat(5, 16))));
        assert!(!run.adjacent_before_extension);
        assert_eq!(envy_report(&inst, &run.allocation).unwrap().max_envy, int(0));
    }

    #[test]
    fn shorter_interval_goes_first() {
        let inst = intervals(&[(0, 1, 1, 1), (1, 4, 1, 2)]);
        let run = run_alg2_traced(&inst).unwrap();
        assert_eq!(run.turns[0].agent, 1);
        assert!(envy_report(&inst, &run.allocation).unwrap().max_envy <= rat(1, 4));
    }

    #[test]
    fn rejects_multi_block() {
        let inst = CakeInstance::from_blocks(vec![vec![(int(0), rat(1, 4), int(1)), (rat(1, 2), int(1), int(1))]]).unwrap();
        assert!(matches!(run_alg2(&inst), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn exhausted_agent_gets_empty_piece() {
        // Three identical tiny intervals: the third finds little room left.
        let inst = intervals(&[(0, 1, 1, 8), (0, 1, 1, 8), (0, 1, 1, 8), (0, 1, 1, 8), (0, 1, 1, 8)]);
        let run = run_alg2_traced(&inst).unwrap();
        assert!(envy_report(&inst, &run.allocation).unwrap().max_envy <= rat(1, 4));
    }
}
