//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use fairslice::allocations::{envy_report, value_matrix};
use fairslice::exact_solver::{exactify_with_breakpoints, EfConstraint};
use fairslice::exec::{monotone_sequences, permutations};
use fairslice::ratlp::{LinearProgram, LpStatus};
use fairslice::{CakeInstance, ContiguousAllocation, Rational};
use num_traits::{One, Zero};

/// Whether an envy-free allocation meeting `c` exists, by exactifying every
/// monotone cut vector over breakpoints and cell midpoints, for every order.
pub fn refined_grid_has_ef(inst: &CakeInstance, c: &EfConstraint) -> bool {
    let extra = c.positions();
    let grid = inst.breakpoint_grid_with(&extra);
    let mut pts = grid.clone();
    for w in grid.windows(2) {
        pts.push((&w[0] + &w[1]) / Rational::from_integer(2.into()));
    }
    pts.sort();
    let n = inst.n();
    for seq in monotone_sequences(pts.len(), n - 1) {
        let cuts: Vec<Rational> = seq.iter().map(|&t| pts[t].clone()).collect();
        for order in permutations(n) {
            let cand = ContiguousAllocation::new(cuts.clone(), order).unwrap();
            if !c.holds(&cand) {
                continue;
            }
            if let Some(a) = exactify_with_breakpoints(inst, &cand, &extra).unwrap() {
                if c.holds(&a) && envy_report(inst, &a).unwrap().is_envy_free() {
                    return true;
                }
            }
        }
    }
    false
}

/// Whether some assignment of the pieces cut at `cuts` is envy-free, by trying
/// every permutation.
pub fn any_permutation_ef(inst: &CakeInstance, cuts: &[Rational]) -> bool {
    let n = inst.n();
    let probe = ContiguousAllocation::new(cuts.to_vec(), (0..n).collect()).unwrap();
    let vals = value_matrix(inst, &probe).unwrap();
    permutations(n).into_iter().any(|order| {
        (0..n).all(|p| {
            let own = &vals[order[p]][p];
            vals[order[p]].iter().all(|v| v <= own)
        })
    })
}

/// Oracle LP outcome: `None` when infeasible, else the optimal objective.
/// Requires every variable to be boxed so the feasible set is a polytope.
pub fn lp_by_vertices(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.vars();
    let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for c in &lp.constraints {
        rows.push((c.coeffs.clone(), c.rhs.clone()));
    }
    for v in 0..n {
        let unit: Vec<Rational> = (0..n).map(|j| if j == v { Rational::one() } else { Rational::zero() }).collect();
        for b in [&lp.lower[v], &lp.upper[v]].into_iter().flatten() {
            rows.push((unit.clone(), b.clone()));
        }
    }
    let mut best: Option<Rational> = None;
    for subset in combinations(rows.len(), n) {
        let Some(x) = solve_square(subset.iter().map(|&r| rows[r].clone()).collect()) else { continue };
        if lp.is_feasible(&x) {
            let obj = lp.objective_at(&x);
            if best.as_ref().is_none_or(|b| &obj < b) {
                best = Some(obj);
            }
        }
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Unique solution of a square system by exact Gauss-Jordan elimination.
fn solve_square(mut rows: Vec<(Vec<Rational>, Rational)>) -> Option<Vec<Rational>> {
    let n = rows.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !rows[r].0[col].is_zero())?;
        rows.swap(col, piv);
        let (p, prhs) = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && !row.0[col].is_zero() {
                let f = &row.0[col] / &p[col];
                for (x, pj) in row.0.iter_mut().zip(&p) {
                    *x -= &f * pj;
                }
                row.1 -= &f * &prhs;
            }
        }
    }
    Some((0..n).map(|i| &rows[i].1 / &rows[i].0[i]).collect())
}

/// Status the vertex oracle implies for a boxed LP.
pub fn oracle_status(lp: &LinearProgram) -> LpStatus {
    if lp_by_vertices(lp).is_some() {
        LpStatus::Optimal
    } else {
        LpStatus::Infeasible
    }
}
