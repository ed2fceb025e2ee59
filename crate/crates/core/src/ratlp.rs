//! Exact rational linear programming: dense two-phase simplex with Bland's rule.
//!
//! Problems are stated as `min c·x` over rows `a·x (≤|=|≥) b` with optional
//! per-variable bounds. Variables are free unless bounded.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::valuations::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    /// Minimized.
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

impl LinearProgram {
    /// `vars` free variables, zero objective, no rows.
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); vars],
            constraints: Vec::new(),
            lower: vec![None; vars],
            upper: vec![None; vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn minimize(&mut self, objective: Vec<Rational>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn bound(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::MalformedLp(format!("bounds for {} / {} of {n} variables", self.lower.len(), self.upper.len())));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::MalformedLp(format!("row {k} has {} coefficients, expected {n}", c.coeffs.len())));
            }
        }
        Ok(())
    }

    /// Every row and bound holds at `x`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.vars() {
            return false;
        }
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            self.lower[j].as_ref().is_none_or(|l| v >= l) && self.upper[j].as_ref().is_none_or(|u| v <= u)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal point; empty unless `status` is `Optimal`.
    pub solution: Vec<Rational>,
    pub objective: Rational,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How an original variable is rebuilt from nonnegative tableau columns.
enum VarMap {
    Shift { col: usize, lo: Rational },
    Reflect { col: usize, hi: Rational },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Rational], obj_rhs: &mut Rational) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (v, pv) in obj.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            *obj_rhs -= &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Minimizes the reduced-cost row `obj` over columns allowed by `usable`.
    /// Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [Rational], obj_rhs: &mut Rational, usable: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let Some(c) = (0..self.cols).find(|&j| usable(j) && obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &best {
                        None => true,
                        Some((br, bb, _)) => ratio < *br || (ratio == *br && self.basis[i] < *bb),
                    };
                    if better {
                        best = Some((ratio, self.basis[i], i));
                    }
                }
            }
            let Some((_, _, r)) = best else { return false };
            self.pivot(r, c, obj, obj_rhs);
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpResult> {
    lp.validate()?;
    let n = lp.vars();

    // Column layout for the nonnegative variables.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    for j in 0..n {
        match (&lp.lower[j], &lp.upper[j]) {
            (Some(lo), _) => {
                maps.push(VarMap::Shift { col: ncols, lo: lo.clone() });
                ncols += 1;
            }
            (None, Some(hi)) => {
                maps.push(VarMap::Reflect { col: ncols, hi: hi.clone() });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let structural = ncols;

    // Rows `a·y ≤ b` in the transformed variables.
    let mut le_rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
    let translate = |coeffs: &[Rational], rhs: &Rational| {
        let mut row = vec![Rational::zero(); structural];
        let mut b = rhs.clone();
        for (j, a) in coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &maps[j] {
                VarMap::Shift { col, lo } => {
                    row[*col] += a;
                    b -= a * lo;
                }
                VarMap::Reflect { col, hi } => {
                    row[*col] -= a;
                    b -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    row[*pos] += a;
                    row[*neg] -= a;
                }
            }
        }
        (row, b)
    };
    for c in &lp.constraints {
        let (row, b) = translate(&c.coeffs, &c.rhs);
        match c.relation {
            Relation::Le => le_rows.push((row, b)),
            Relation::Ge => le_rows.push((row.iter().map(|v| -v).collect(), -b)),
            Relation::Eq => {
                le_rows.push((row.iter().map(|v| -v).collect(), -b.clone()));
                le_rows.push((row, b));
            }
        }
    }
    for (j, m) in maps.iter().enumerate() {
        if let (VarMap::Shift { col, lo }, Some(hi)) = (m, &lp.upper[j]) {
            if hi < lo {
                return Ok(LpResult { status: LpStatus::Infeasible, solution: Vec::new(), objective: Rational::zero() });
            }
            let mut row = vec![Rational::zero(); structural];
            row[*col] = Rational::from_integer(1.into());
            le_rows.push((row, hi - lo));
        }
    }

    // Slacks, then artificials for rows with negative rhs.
    let m = le_rows.len();
    let slack0 = structural;
    let art0 = structural + m;
    let negatives: Vec<usize> = (0..m).filter(|&i| le_rows[i].1.is_negative()).collect();
    let cols = art0 + negatives.len();
    let mut t = Tableau { rows: Vec::with_capacity(m), rhs: Vec::with_capacity(m), basis: vec![0; m], cols };
    let one = Rational::from_integer(1.into());
    let mut art_of_row = vec![None; m];
    for (k, &i) in negatives.iter().enumerate() {
        art_of_row[i] = Some(art0 + k);
    }
    for (i, (row, b)) in le_rows.into_iter().enumerate() {
        let mut full = vec![Rational::zero(); cols];
        full[..structural].clone_from_slice(&row);
        full[slack0 + i] = one.clone();
        let mut b = b;
        if let Some(a) = art_of_row[i] {
            for v in full.iter_mut() {
                *v = -&*v;
            }
            b = -b;
            full[a] = one.clone();
            t.basis[i] = a;
        } else {
            t.basis[i] = slack0 + i;
        }
        t.rows.push(full);
        t.rhs.push(b);
    }

    // Phase 1: minimize the sum of artificials.
    if !negatives.is_empty() {
        let mut obj = vec![Rational::zero(); cols];
        let mut obj_rhs = Rational::zero();
        for v in &mut obj[art0..cols] {
            *v = one.clone();
        }
        for (i, art) in art_of_row.iter().enumerate().take(m) {
            if art.is_some() {
                for (v, rv) in obj.iter_mut().zip(&t.rows[i]) {
                    *v -= rv;
                }
                obj_rhs -= &t.rhs[i];
            }
        }
        t.optimize(&mut obj, &mut obj_rhs, &|_| true);
        if !obj_rhs.is_zero() {
            return Ok(LpResult { status: LpStatus::Infeasible, solution: Vec::new(), objective: Rational::zero() });
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art0 {
                if let Some(c) = (0..art0).find(|&j| !t.rows[i][j].is_zero()) {
                    let mut dummy = vec![Rational::zero(); cols];
                    let mut dr = Rational::zero();
                    t.pivot(i, c, &mut dummy, &mut dr);
                } else {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    // Phase 2.
    let mut cost = vec![Rational::zero(); cols];
    let mut constant = Rational::zero();
    for (j, c) in lp.objective.iter().enumerate() {
        match &maps[j] {
            VarMap::Shift { col, lo } => {
                cost[*col] += c;
                constant += c * lo;
            }
            VarMap::Reflect { col, hi } => {
                cost[*col] -= c;
                constant += c * hi;
            }
            VarMap::Split { pos, neg } => {
                cost[*pos] += c;
                cost[*neg] -= c;
            }
        }
    }
    let mut obj = cost.clone();
    let mut obj_rhs = Rational::zero();
    for i in 0..t.rows.len() {
        let cb = cost[t.basis[i]].clone();
        if !cb.is_zero() {
            for (v, rv) in obj.iter_mut().zip(&t.rows[i]) {
                *v -= &cb * rv;
            }
            obj_rhs -= &cb * &t.rhs[i];
        }
    }
    if !t.optimize(&mut obj, &mut obj_rhs, &|j| j < art0) {
        return Ok(LpResult { status: LpStatus::Unbounded, solution: Vec::new(), objective: Rational::zero() });
    }

    let mut y = vec![Rational::zero(); cols];
    for (i, &b) in t.basis.iter().enumerate() {
        y[b] = t.rhs[i].clone();
    }
    let x: Vec<Rational> = maps
        .iter()
        .map(|m| match m {
            VarMap::Shift { col, lo } => lo + &y[*col],
            VarMap::Reflect { col, hi } => hi - &y[*col],
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
        })
        .collect();
    let objective = lp.objective_at(&x);
    debug_assert_eq!(objective, &constant - &obj_rhs);
    Ok(LpResult { status: LpStatus::Optimal, solution: x, objective })
}
