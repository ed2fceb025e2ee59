//! Exact rationals, piecewise-constant valuations and Robertson-Webb queries.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"n"` or a finite decimal such as `"0.24"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal {s:?}")));
        }
        let neg = whole.starts_with('-');
        let w = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if w.is_empty() { "0" } else { w }, frac);
        let num = BigInt::from_str(&digits).map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    let r = Rational::from_str(t).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    Ok(r)
}

/// Decimal rendering for human-facing reports; truncated, never used in computation.
pub fn to_decimal(r: &Rational, places: usize) -> String {
    let neg = r.is_negative();
    let a = r.abs();
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (ip, fp) = scaled.div_rem(&scale);
    let mut s = String::new();
    if neg && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&ip.to_string());
    if places > 0 {
        s.push('.');
        s.push_str(&format!("{:0>width$}", fp.to_string(), width = places));
    }
    s
}

/// Serde adapter writing a [`Rational`] as the string `"p/q"`.
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_value(&v).map_err(serde::de::Error::custom)
    }

    pub(crate) fn from_value(v: &serde_json::Value) -> std::result::Result<Rational, String> {
        match v {
            serde_json::Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
            serde_json::Value::Number(n) => parse_rational(&n.to_string()).map_err(|e| e.to_string()),
            other => Err(format!("expected rational, got {other}")),
        }
    }
}

pub mod serde_rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| r.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter().map(|x| serde_rat::from_value(x).map_err(serde::de::Error::custom)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    #[serde(with = "serde_rat")]
    pub left: Rational,
    #[serde(with = "serde_rat")]
    pub right: Rational,
    #[serde(with = "serde_rat")]
    pub height: Rational,
}

impl Block {
    pub fn new(left: Rational, right: Rational, height: Rational) -> Self {
        Block { left, right, height }
    }

    pub fn mass(&self) -> Rational {
        (&self.right - &self.left) * &self.height
    }
}

/// Density step function on `[0,1]` with total mass 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseConstantValuation {
    blocks: Vec<Block>,
}

impl PiecewiseConstantValuation {
    /// Validates and normalizes: heights are divided by the total mass.
    /// Touching blocks are kept apart even at equal height.
    pub fn new(mut blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInstance("valuation has no blocks".into()));
        }
        blocks.sort_by(|a, b| a.left.cmp(&b.left));
        let zero = Rational::zero();
        let one = Rational::one();
        for b in &blocks {
            if b.left < zero || b.right > one {
                return Err(Error::InvalidInstance(format!("block [{}, {}] leaves [0,1]", b.left, b.right)));
            }
            if b.left >= b.right {
                return Err(Error::InvalidInstance(format!("empty block [{}, {}]", b.left, b.right)));
            }
            if !b.height.is_positive() {
                return Err(Error::InvalidInstance(format!("non-positive height {}", b.height)));
            }
        }
        for w in blocks.windows(2) {
            if w[1].left < w[0].right {
                return Err(Error::InvalidInstance(format!(
                    "blocks [{}, {}] and [{}, {}] overlap",
                    w[0].left, w[0].right, w[1].left, w[1].right
                )));
            }
        }
        let total: Rational = blocks.iter().map(Block::mass).sum();
        if !total.is_one() {
            for b in &mut blocks {
                b.height = &b.height / &total;
            }
        }
        Ok(PiecewiseConstantValuation { blocks })
    }

    /// Uniform density on `[a,b]`.
    pub fn uniform_on(a: Rational, b: Rational) -> Result<Self> {
        Self::new(vec![Block::new(a, b, Rational::one())])
    }

    pub fn uniform() -> Self {
        Self::uniform_on(Rational::zero(), Rational::one()).expect("unit interval")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// All positive heights equal.
    pub fn is_uniform(&self) -> bool {
        self.blocks.windows(2).all(|w| w[0].height == w[1].height)
    }

    /// `R_i` when the valuation is uniform on a single interval.
    pub fn uniform_interval(&self) -> Option<(Rational, Rational)> {
        match self.blocks.as_slice() {
            [b] => Some((b.left.clone(), b.right.clone())),
            _ => None,
        }
    }

    pub fn midpoint(&self) -> Option<Rational> {
        self.uniform_interval().map(|(a, b)| (a + b) / int(2))
    }

    /// Density on the open cell `(a, b)`; the cell must not straddle a block edge.
    pub fn density_on(&self, a: &Rational, b: &Rational) -> Rational {
        let mid = (a + b) / int(2);
        self.density_at(&mid)
    }

    /// Density just right of `x` when `x` is a block edge.
    pub fn density_at(&self, x: &Rational) -> Rational {
        for bl in &self.blocks {
            if &bl.left <= x && x < &bl.right {
                return bl.height.clone();
            }
        }
        Rational::zero()
    }

    /// Step-change positions (block edges).
    pub fn edges(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::with_capacity(2 * self.blocks.len());
        for b in &self.blocks {
            if out.last() != Some(&b.left) {
                out.push(b.left.clone());
            }
            out.push(b.right.clone());
        }
        out
    }

    /// `v([a,b])` without bounds checks; `a > b` yields a negative value.
    pub fn mass(&self, a: &Rational, b: &Rational) -> Rational {
        if a > b {
            return -self.mass(b, a);
        }
        let mut acc = Rational::zero();
        for bl in &self.blocks {
            if &bl.right <= a {
                continue;
            }
            if &bl.left >= b {
                break;
            }
            let lo = if &bl.left > a { &bl.left } else { a };
            let hi = if &bl.right < b { &bl.right } else { b };
            acc += (hi - lo) * &bl.height;
        }
        acc
    }

    pub fn eval(&self, a: &Rational, b: &Rational) -> Result<Rational> {
        check_range(a, b)?;
        Ok(self.mass(a, b))
    }

    /// Leftmost `y ≥ x` with `v(x,y) = alpha`; `None` when `v(x,1) < alpha`.
    pub fn cut_query(&self, x: &Rational, alpha: &Rational) -> Result<Option<Rational>> {
        check_range(x, x)?;
        if alpha.is_negative() {
            return Err(Error::Range(format!("negative query value {alpha}")));
        }
        if alpha.is_zero() {
            return Ok(Some(x.clone()));
        }
        let mut acc = Rational::zero();
        for bl in &self.blocks {
            if &bl.right <= x {
                continue;
            }
            let start = if &bl.left > x { &bl.left } else { x };
            let m = (&bl.right - start) * &bl.height;
            if &acc + &m >= *alpha {
                return Ok(Some(start + (alpha - &acc) / &bl.height));
            }
            acc += m;
        }
        Ok(None)
    }
}

fn check_range(a: &Rational, b: &Rational) -> Result<()> {
    if a.is_negative() || b > &Rational::one() || a > b {
        return Err(Error::Range(format!("need 0 <= a <= b <= 1, got a={a}, b={b}")));
    }
    Ok(())
}

/// `v(a,b)`, the exact integral of the density over `[a,b]`.
pub fn eval(v: &PiecewiseConstantValuation, a: &Rational, b: &Rational) -> Result<Rational> {
    v.eval(a, b)
}

pub fn cut_query(v: &PiecewiseConstantValuation, x: &Rational, alpha: &Rational) -> Result<Option<Rational>> {
    v.cut_query(x, alpha)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CakeInstance {
    valuations: Vec<PiecewiseConstantValuation>,
}

impl CakeInstance {
    pub fn new(valuations: Vec<PiecewiseConstantValuation>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidInstance("an instance needs at least one agent".into()));
        }
        Ok(CakeInstance { valuations })
    }

    /// Builds an instance from raw `(left, right, height)` triples per agent.
    pub fn from_blocks(agents: Vec<Vec<(Rational, Rational, Rational)>>) -> Result<Self> {
        let vals = agents
            .into_iter()
            .map(|bs| PiecewiseConstantValuation::new(bs.into_iter().map(|(l, r, h)| Block::new(l, r, h)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vals)
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn valuations(&self) -> &[PiecewiseConstantValuation] {
        &self.valuations
    }

    pub fn valuation(&self, i: usize) -> &PiecewiseConstantValuation {
        &self.valuations[i]
    }

    pub fn max_blocks(&self) -> usize {
        self.valuations.iter().map(|v| v.block_count()).max().unwrap_or(0)
    }

    pub fn breakpoint_grid(&self) -> Vec<Rational> {
        self.breakpoint_grid_with(&[])
    }

    /// Grid refined by extra positions in `[0,1]`.
    pub fn breakpoint_grid_with(&self, extra: &[Rational]) -> Vec<Rational> {
        let mut g: Vec<Rational> = vec![Rational::zero(), Rational::one()];
        for v in &self.valuations {
            g.extend(v.edges());
        }
        g.extend(extra.iter().cloned());
        g.sort();
        g.dedup();
        g
    }

    /// True when no two agents' blocks overlap in a set of positive length.
    pub fn has_disjoint_blocks(&self) -> bool {
        let mut all: Vec<&Block> = self.valuations.iter().flat_map(|v| v.blocks()).collect();
        all.sort_by(|a, b| a.left.cmp(&b.left));
        all.windows(2).all(|w| w[1].left >= w[0].right)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawCake = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let vals = raw
            .agents
            .into_iter()
            .map(|a| PiecewiseConstantValuation::new(a.blocks))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vals)
    }

    pub fn to_json(&self) -> String {
        let raw = RawCake {
            agents: self.valuations.iter().map(|v| RawAgent { blocks: v.blocks.clone() }).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
struct RawCake {
    agents: Vec<RawAgent>,
}

#[derive(Serialize, Deserialize)]
struct RawAgent {
    blocks: Vec<Block>,
}
