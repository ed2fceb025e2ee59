//! Contiguous allocations, envy matrices and fairness predicates.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuations::{serde_rat_vec, CakeInstance, Rational};

/// Sorted cuts `x_1..x_{n-1}` and the agent owning each piece, left to right.
///
/// Piece `p` is `[x_p, x_{p+1}]` with `x_0 = 0` and `x_n = 1`; `order[p]` is its
/// owner. Agent indices are 0-based here and 1-based in JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContiguousAllocation {
    pub cuts: Vec<Rational>,
    pub order: Vec<usize>,
}

impl ContiguousAllocation {
    pub fn new(cuts: Vec<Rational>, order: Vec<usize>) -> Result<Self> {
        let a = ContiguousAllocation { cuts, order };
        a.validate()?;
        Ok(a)
    }

    /// Single agent owning the whole cake.
    pub fn whole(agent: usize) -> Self {
        ContiguousAllocation { cuts: Vec::new(), order: vec![agent] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.order.len();
        if n == 0 || self.cuts.len() + 1 != n {
            return Err(Error::Dimension(format!("{} cuts for {} pieces", self.cuts.len(), n)));
        }
        let mut seen = vec![false; n];
        for &a in &self.order {
            if a >= n || seen[a] {
                return Err(Error::Dimension(format!("order {:?} is not a permutation", self.order)));
            }
            seen[a] = true;
        }
        let zero = Rational::zero();
        let one = Rational::one();
        let mut prev = &zero;
        for c in &self.cuts {
            if c < prev || c > &one {
                return Err(Error::Range(format!("cuts not sorted within [0,1]: {c}")));
            }
            prev = c;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Endpoints of the piece in position `p`.
    pub fn piece(&self, p: usize) -> (Rational, Rational) {
        let lo = if p == 0 { Rational::zero() } else { self.cuts[p - 1].clone() };
        let hi = if p == self.cuts.len() { Rational::one() } else { self.cuts[p].clone() };
        (lo, hi)
    }

    /// Position of the piece owned by `agent`.
    pub fn position_of(&self, agent: usize) -> usize {
        self.order.iter().position(|&a| a == agent).expect("agent in order")
    }

    pub fn piece_of(&self, agent: usize) -> (Rational, Rational) {
        self.piece(self.position_of(agent))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawAllocation = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.order.contains(&0) {
            return Err(Error::Parse("agent labels in \"order\" are 1-based".into()));
        }
        Self::new(raw.cuts, raw.order.into_iter().map(|a| a - 1).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("serializable")
    }

    pub fn to_raw(&self) -> RawAllocation {
        RawAllocation { cuts: self.cuts.clone(), order: self.order.iter().map(|a| a + 1).collect() }
    }
}

/// Wire form of an allocation: `{"cuts": ["p/q", ...], "order": [1-based agents]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawAllocation {
    #[serde(with = "serde_rat_vec")]
    pub cuts: Vec<Rational>,
    pub order: Vec<usize>,
}

/// `values[i][p] = v_i(piece p)` with pieces indexed by position.
pub fn value_matrix(inst: &CakeInstance, alloc: &ContiguousAllocation) -> Result<Vec<Vec<Rational>>> {
    alloc.validate()?;
    if alloc.n() != inst.n() {
        return Err(Error::Dimension(format!("allocation for {} agents, instance has {}", alloc.n(), inst.n())));
    }
    let pieces: Vec<_> = (0..alloc.n()).map(|p| alloc.piece(p)).collect();
    Ok(inst
        .valuations()
        .iter()
        .map(|v| pieces.iter().map(|(a, b)| v.mass(a, b)).collect())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvyReport {
    /// `matrix[i][j] = v_i(piece of agent j) - v_i(piece of agent i)`.
    pub matrix: Vec<Vec<Rational>>,
    pub max_envy: Rational,
}

impl EnvyReport {
    pub fn is_envy_free(&self) -> bool {
        self.max_envy <= Rational::zero()
    }

    /// Pairs `(i, j)` with positive envy.
    pub fn envious_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e > &Rational::zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn envy_report(inst: &CakeInstance, alloc: &ContiguousAllocation) -> Result<EnvyReport> {
    let vals = value_matrix(inst, alloc)?;
    let n = inst.n();
    let mut matrix = vec![vec![Rational::zero(); n]; n];
    let mut max_envy = Rational::zero();
    for i in 0..n {
        let own = &vals[i][alloc.position_of(i)];
        for j in 0..n {
            let e = &vals[i][alloc.position_of(j)] - own;
            if e > max_envy {
                max_envy = e.clone();
            }
            matrix[i][j] = e;
        }
    }
    Ok(EnvyReport { matrix, max_envy })
}

/// `max_envy <= eps`; malformed allocations are never ε-EF.
pub fn is_eps_ef(inst: &CakeInstance, alloc: &ContiguousAllocation, eps: &Rational) -> bool {
    envy_report(inst, alloc).map(|r| &r.max_envy <= eps).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuations::{int, rat, PiecewiseConstantValuation};

    fn two_uniform() -> CakeInstance {
        CakeInstance::new(vec![PiecewiseConstantValuation::uniform(), PiecewiseConstantValuation::uniform()]).unwrap()
    }

    #[test]
    fn single_agent_whole_cake() {
        let inst = CakeInstance::new(vec![PiecewiseConstantValuation::uniform()]).unwrap();
        let r = envy_report(&inst, &ContiguousAllocation::whole(0)).unwrap();
        assert_eq!(r.matrix, vec![vec![int(0)]]);
        assert_eq!(r.max_envy, int(0));
    }

    #[test]
    fn symmetric_halves() {
        let a = ContiguousAllocation::new(vec![rat(1, 2)], vec![0, 1]).unwrap();
        assert_eq!(envy_report(&two_uniform(), &a).unwrap().max_envy, int(0));
        assert!(is_eps_ef(&two_uniform(), &a, &int(0)));
    }

    #[test]
    fn third_two_thirds_split() {
        let a = ContiguousAllocation::new(vec![rat(1, 3)], vec![0, 1]).unwrap();
        let r = envy_report(&two_uniform(), &a).unwrap();
        assert_eq!(r.matrix[0][1], rat(1, 3));
        assert_eq!(r.matrix[1][0], rat(-1, 3));
        assert_eq!(r.envious_pairs(), vec![(0, 1)]);
        assert!(is_eps_ef(&two_uniform(), &a, &rat(1, 3)));
        assert!(!is_eps_ef(&two_uniform(), &a, &rat(1, 4)));
    }

    #[test]
    fn malformed_allocations() {
        assert!(ContiguousAllocation::new(vec![rat(1, 2)], vec![0, 0]).is_err());
        assert!(ContiguousAllocation::new(vec![rat(2, 3), rat(1, 3)], vec![0, 1, 2]).is_err());
        assert!(ContiguousAllocation::new(vec![], vec![0, 1]).is_err());
        let three = ContiguousAllocation::new(vec![rat(1, 3), rat(2, 3)], vec![0, 1, 2]).unwrap();
        assert!(matches!(envy_report(&two_uniform(), &three), Err(Error::Dimension(_))));
    }

    #[test]
    fn json_uses_one_based_labels() {
        let a = ContiguousAllocation::new(vec![rat(1, 3)], vec![1, 0]).unwrap();
        let s = a.to_json();
        assert!(s.contains("\"1/3\""));
        assert_eq!(ContiguousAllocation::from_json(&s).unwrap(), a);
        assert!(ContiguousAllocation::from_json(r#"{"cuts":["1/2"],"order":[0,1]}"#).is_err());
    }

    #[test]
    fn empty_pieces_allowed() {
        let a = ContiguousAllocation::new(vec![int(0)], vec![0, 1]).unwrap();
        let r = envy_report(&two_uniform(), &a).unwrap();
        assert_eq!(r.max_envy, int(1));
    }
}
