//! Reduction instances: 3-SAT to cake and to items, 3-PARTITION to items.
//!
//! Every generator returns the instance together with a [`GadgetCertificate`]
//! recording where each gadget sits and who its agents are, so that witness
//! allocations can be built and checked from the certificate alone.

mod cake;
mod items;
mod partition;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuations::{serde_rat, serde_rat_vec, Rational};

pub use cake::{
    clause_gadget_values, gen_cake_from_3sat, gen_cake_from_3sat_with, verify_clause_gadget_property,
    verify_clause_gadget_property_with, witness_cake,
    witness_cake_with, ClauseGadgetReport, IsolationWeights,
};
pub use items::{gen_items_combined, gen_items_epsef, witness_items_combined, witness_items_epsef};
pub use partition::{
    equit_sizes, gen_items_equit_3part, gen_items_prop_3part, prop_sizes, witness_items_equit_3part, witness_items_prop_3part,
    EquitSizes, PropSizes,
};

/// Nonzero variable index, negative for a negated literal. Variables are 1-based.
pub type Literal = i32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula3SAT {
    pub n: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl Formula3SAT {
    pub fn new(n: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        let f = Formula3SAT { n, clauses };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.clauses.is_empty() {
            return Err(Error::InvalidInstance("a formula needs at least one variable and one clause".into()));
        }
        for c in &self.clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > self.n {
                    return Err(Error::InvalidInstance(format!("literal {l} outside 1..={}", self.n)));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn literal_true(l: Literal, assignment: &[bool]) -> bool {
        assignment[l.unsigned_abs() as usize - 1] == (l > 0)
    }

    pub fn satisfies(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.n
            && self.clauses.iter().all(|c| c.iter().any(|&l| Self::literal_true(l, assignment)))
    }

    /// Errors unless `assignment` satisfies the formula.
    pub fn check_assignment(&self, assignment: &[bool]) -> Result<()> {
        if assignment.len() != self.n {
            return Err(Error::Dimension(format!("{} truth values for {} variables", assignment.len(), self.n)));
        }
        if !self.satisfies(assignment) {
            return Err(Error::Precondition("assignment does not satisfy the formula".into()));
        }
        Ok(())
    }

    /// Position (0..3) of the first true literal of clause `i`.
    pub fn sad_position(&self, i: usize, assignment: &[bool]) -> usize {
        self.clauses[i].iter().position(|&l| Self::literal_true(l, assignment)).expect("satisfied clause")
    }

    /// Reads DIMACS CNF; every clause must have exactly three literals.
    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut n = None;
        let mut declared_m = None;
        let mut lits: Vec<i32> = Vec::new();
        let mut clauses = Vec::new();
        for line in text.lines() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if let Some(rest) = t.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(Error::Parse(format!("bad problem line {t:?}")));
                }
                n = Some(parts[1].parse::<usize>().map_err(|_| Error::Parse(format!("bad variable count {t:?}")))?);
                declared_m =
                    Some(parts[2].parse::<usize>().map_err(|_| Error::Parse(format!("bad clause count {t:?}")))?);
                continue;
            }
            for tok in t.split_whitespace() {
                let v: i32 = tok.parse().map_err(|_| Error::Parse(format!("bad literal {tok:?}")))?;
                if v == 0 {
                    let c: [i32; 3] = lits
                        .as_slice()
                        .try_into()
                        .map_err(|_| Error::InvalidInstance(format!("clause {lits:?} does not have 3 literals")))?;
                    clauses.push(c);
                    lits.clear();
                } else {
                    lits.push(v);
                }
            }
        }
        if !lits.is_empty() {
            return Err(Error::Parse("last clause not terminated by 0".into()));
        }
        let n = n.ok_or_else(|| Error::Parse("missing `p cnf` line".into()))?;
        if declared_m.is_some_and(|m| m != clauses.len()) {
            return Err(Error::Parse(format!("header declares {} clauses, found {}", declared_m.unwrap(), clauses.len())));
        }
        Self::new(n, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.n, self.m());
        for c in &self.clauses {
            s.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        s
    }
}

/// Numbers `x_1..x_{3n}` to be split into `n` triples of equal sum `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreePartitionInput {
    pub x: Vec<u64>,
}

impl ThreePartitionInput {
    pub fn new(x: Vec<u64>) -> Result<Self> {
        let p = ThreePartitionInput { x };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.x.len() / 3
    }

    pub fn b(&self) -> u64 {
        self.x.iter().sum::<u64>() / self.n().max(1) as u64
    }

    /// Checks `len = 3n`, `Σx = nB` and `B/4 < x_i < B/2`.
    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() || !self.x.len().is_multiple_of(3) {
            return Err(Error::InvalidInstance(format!("{} numbers is not a positive multiple of 3", self.x.len())));
        }
        let n = self.n() as u64;
        let sum: u64 = self.x.iter().sum();
        if !sum.is_multiple_of(n) {
            return Err(Error::InvalidInstance(format!("sum {sum} not divisible by {n}")));
        }
        let b = sum / n;
        if let Some(x) = self.x.iter().find(|&&x| 4 * x <= b || 2 * x >= b) {
            return Err(Error::InvalidInstance(format!("{x} not strictly between B/4 and B/2 for B = {b}")));
        }
        Ok(())
    }

    /// All numbers and `B` multiplied by `n`.
    pub fn scaled_by_n(&self) -> Self {
        let n = self.n() as u64;
        ThreePartitionInput { x: self.x.iter().map(|x| x * n).collect() }
    }

    /// Errors unless `parts` is a partition of the indices into triples summing to `B`.
    pub fn check_partition(&self, parts: &[[usize; 3]]) -> Result<()> {
        if parts.len() != self.n() {
            return Err(Error::Dimension(format!("{} triples for n = {}", parts.len(), self.n())));
        }
        let mut seen = vec![false; self.x.len()];
        for t in parts {
            for &i in t {
                if i >= self.x.len() || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Precondition(format!("index {i} repeated or out of range")));
                }
            }
            let s: u64 = t.iter().map(|&i| self.x[i]).sum();
            if s != self.b() {
                return Err(Error::Precondition(format!("triple {t:?} sums to {s}, not {}", self.b())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GadgetKind {
    CakeSat,
    ItemsSat,
    ItemsEpsef,
    ItemsProp3p,
    ItemsEq3p,
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GadgetKind::CakeSat => "cake-sat",
            GadgetKind::ItemsSat => "items-sat",
            GadgetKind::ItemsEpsef => "items-epsef",
            GadgetKind::ItemsProp3p => "items-prop3p",
            GadgetKind::ItemsEq3p => "items-eq3p",
        })
    }
}

impl FromStr for GadgetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cake-sat" => GadgetKind::CakeSat,
            "items-sat" => GadgetKind::ItemsSat,
            "items-epsef" => GadgetKind::ItemsEpsef,
            "items-prop3p" => GadgetKind::ItemsProp3p,
            "items-eq3p" => GadgetKind::ItemsEq3p,
            _ => return Err(Error::Parse(format!("unknown gadget kind {s:?}"))),
        })
    }
}

/// Named span of the instance. Cake spans are in unscaled coordinates
/// `[0, length]`; item spans are 0-based half-open index ranges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Region {
    pub name: String,
    #[serde(with = "serde_rat")]
    pub start: Rational,
    #[serde(with = "serde_rat")]
    pub end: Rational,
}

impl Region {
    fn new(name: impl Into<String>, start: Rational, end: Rational) -> Self {
        Region { name: name.into(), start, end }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GadgetCertificate {
    pub kind: GadgetKind,
    /// Unscaled cake length, or the number of items.
    #[serde(with = "serde_rat")]
    pub length: Rational,
    /// Top-level gadgets tiling the instance, left to right.
    pub regions: Vec<Region>,
    /// Agent names, indexed like the instance.
    pub agents: Vec<String>,
    /// Unscaled value-blocks per agent (cake only).
    pub agent_blocks: Vec<Vec<Region>>,
    /// Cuts every witness shares, scaled to `[0,1]` (cake only).
    #[serde(with = "serde_rat_vec")]
    pub fixed_cuts: Vec<Rational>,
    /// Approximation slack the hardness argument tolerates.
    #[serde(serialize_with = "ser_opt_rat")]
    pub eps: Option<Rational>,
}

impl GadgetCertificate {
    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    /// True when the regions tile `[0, length]` left to right without overlap.
    pub fn regions_tile(&self) -> bool {
        let mut at = Rational::from_integer(0.into());
        for r in &self.regions {
            if r.start != at || r.end < r.start {
                return false;
            }
            at = r.end.clone();
        }
        at == self.length
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn ser_opt_rat<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

fn literal_name(l: Literal) -> String {
    if l > 0 {
        format!("x{l}")
    } else {
        format!("~x{}", -l)
    }
}
