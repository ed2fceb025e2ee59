//! Moving-knife protocol returning a contiguous 1/3-envy-free allocation.
//!
//! Only `eval` and `cut_query` touch the valuations, so the query count is
//! observable through [`Alg1Run::queries`].

use num_traits::{One, Zero};

use crate::allocations::ContiguousAllocation;
use crate::valuations::{rat, CakeInstance, Rational};

#[derive(Clone, Debug)]
pub struct Alg1Run {
    pub allocation: ContiguousAllocation,
    /// Agents removed inside the main loop, in removal order.
    pub loop_agents: Vec<usize>,
    pub queries: usize,
}

pub fn run_alg1(inst: &CakeInstance) -> ContiguousAllocation {
    run_alg1_traced(inst).allocation
}

pub fn run_alg1_traced(inst: &CakeInstance) -> Alg1Run {
    let n = inst.n();
    let third = rat(1, 3);
    let one = Rational::one();
    let mut left = Rational::zero();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut cuts: Vec<Rational> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    let mut queries = 0usize;

    loop {
        let mut candidates: Vec<(Rational, bool, usize)> = Vec::with_capacity(remaining.len());
        let mut any_rich = false;
        for &i in &remaining {
            let v = inst.valuation(i);
            queries += 1;
            if v.mass(&left, &one) >= third {
                any_rich = true;
                queries += 1;
                let r = v.cut_query(&left, &third).expect("in range").expect("value available");
                candidates.push((r, false, i));
            } else {
                candidates.push((one.clone(), true, i));
            }
        }
        if !any_rich {
            break;
        }
        // Lowest index among minimizers, preferring agents whose point came from a cut query.
        let (r, _, j) = candidates.into_iter().min().expect("non-empty");
        order.push(j);
        cuts.push(r.clone());
        left = r;
        remaining.retain(|&a| a != j);
    }

    let loop_agents = order.clone();
    if let Some(&j) = remaining.first() {
        order.push(j);
        for &a in &remaining[1..] {
            cuts.push(one.clone());
            order.push(a);
        }
    } else {
        // The last removed agent's piece runs to 1.
        cuts.pop();
    }
    let allocation = ContiguousAllocation::new(cuts, order).expect("protocol yields a valid allocation");
    Alg1Run { allocation, loop_agents, queries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocations::envy_report;
    use crate::valuations::{int, PiecewiseConstantValuation};

    #[test]
    fn single_agent() {
        let inst = CakeInstance::new(vec![PiecewiseConstantValuation::uniform()]).unwrap();
        let a = run_alg1(&inst);
        assert_eq!(a, ContiguousAllocation::whole(0));
    }

    #[test]
    fn two_uniform_agents_trace() {
        let inst = CakeInstance::new(vec![PiecewiseConstantValuation::uniform(), PiecewiseConstantValuation::uniform()]).unwrap();
        let run = run_alg1_traced(&inst);
        assert_eq!(run.allocation.cuts, vec![rat(1, 3)]);
        assert_eq!(run.allocation.order, vec![0, 1]);
        assert_eq!(run.loop_agents, vec![0, 1]);
        assert_eq!(envy_report(&inst, &run.allocation).unwrap().max_envy, rat(1, 3));
    }

    #[test]
    fn concentrated_agent_cuts_first() {
        let inst = CakeInstance::new(vec![
            PiecewiseConstantValuation::uniform(),
            PiecewiseConstantValuation::uniform_on(int(0), rat(1, 10)).unwrap(),
        ])
        .unwrap();
        let a = run_alg1(&inst);
        assert_eq!(a.order[0], 1);
        assert_eq!(a.cuts, vec![rat(1, 30)]);
        let r = envy_report(&inst, &a).unwrap();
        assert!(r.max_envy <= rat(1, 3));
        assert!(inst.valuation(0).mass(&a.piece_of(0).0, &a.piece_of(0).1) > int(0));
        assert!(inst.valuation(1).mass(&a.piece_of(1).0, &a.piece_of(1).1) > int(0));
    }

    #[test]
    fn tie_at_one_prefers_cutting_agent() {
        // Agent 0 values [2/3,1] below 1/3 after the first cut; agent 1 reaches exactly 1/3 at 1.
        let inst = CakeInstance::from_blocks(vec![
            vec![(int(0), rat(1, 2), int(3)), (rat(1, 2), int(1), int(1))],
            vec![(int(0), rat(1, 3), int(1)), (rat(2, 3), int(1), int(2))],
        ])
        .unwrap();
        let run = run_alg1_traced(&inst);
        let r = envy_report(&inst, &run.allocation).unwrap();
        assert!(r.max_envy <= rat(1, 3));
    }
}
