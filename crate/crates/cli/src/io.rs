//! File formats: instances, allocations, formulas, numbers and witnesses.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fairslice::discrete::{DiscreteAllocation, DiscreteInstance};
use fairslice::gadgets::{Formula3SAT, ThreePartitionInput};
use fairslice::valuations::to_decimal;
use fairslice::{CakeInstance, ContiguousAllocation, Rational};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Dense item rows are written up to this many entries, run-length beyond.
const DENSE_LIMIT: usize = 4096;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub struct Loaded {
    pub text: String,
    pub digest: String,
}

pub fn read(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = sha256_hex(text.as_bytes());
    Ok(Loaded { text, digest })
}

pub fn write(path: &Path, contents: &str) -> Result<String> {
    let mut body = contents.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, &body).with_context(|| format!("writing {}", path.display()))?;
    Ok(sha256_hex(body.as_bytes()))
}

pub fn is_discrete(text: &str) -> Result<bool> {
    let v: Value = serde_json::from_str(text).context("instance is not JSON")?;
    Ok(v.get("items").is_some())
}

pub fn cake(text: &str) -> Result<CakeInstance> {
    Ok(CakeInstance::from_json(text)?)
}

pub fn items(text: &str) -> Result<DiscreteInstance> {
    Ok(DiscreteInstance::from_json(text)?)
}

pub fn items_json(inst: &DiscreteInstance) -> String {
    if inst.m() * inst.n() <= DENSE_LIMIT {
        inst.to_json()
    } else {
        inst.to_json_sparse()
    }
}

pub fn allocation(text: &str) -> Result<ContiguousAllocation> {
    Ok(ContiguousAllocation::from_json(text)?)
}

pub fn discrete_allocation(text: &str) -> Result<DiscreteAllocation> {
    Ok(DiscreteAllocation::from_json(text)?)
}

pub fn rat(r: &Rational) -> Value {
    json!({"exact": r.to_string(), "decimal": to_decimal(r, 12)})
}

pub fn alloc_value(a: &ContiguousAllocation) -> Value {
    serde_json::from_str(&a.to_json()).expect("allocation JSON")
}

pub fn discrete_alloc_value(a: &DiscreteAllocation) -> Value {
    serde_json::from_str(&a.to_json()).expect("allocation JSON")
}

/// DIMACS CNF, or JSON `{"n": .., "clauses": [[l1, l2, l3], ..]}`.
pub fn formula(text: &str) -> Result<Formula3SAT> {
    if text.trim_start().starts_with('{') {
        let f: Formula3SAT = serde_json::from_str(text).context("formula JSON")?;
        f.validate()?;
        Ok(f)
    } else {
        Ok(Formula3SAT::from_dimacs(text)?)
    }
}

/// `[x1, x2, ..]` or `{"x": [..]}`.
pub fn numbers(text: &str) -> Result<ThreePartitionInput> {
    let v: Value = serde_json::from_str(text).context("numbers JSON")?;
    let list = v.get("x").unwrap_or(&v);
    let x = list
        .as_array()
        .ok_or_else(|| anyhow!("expected an array of positive integers"))?
        .iter()
        .map(|e| e.as_u64().ok_or_else(|| anyhow!("bad number {e}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThreePartitionInput::new(x)?)
}

/// Booleans, `0/1` bits (one per variable) or signed literals such as
/// `[1, -2, 3]`; optionally wrapped as `{"assignment": [..]}`.
pub fn assignment(text: &str, n: usize) -> Result<Vec<bool>> {
    let v: Value = serde_json::from_str(text).context("assignment JSON")?;
    let list = v.get("assignment").unwrap_or(&v).as_array().ok_or_else(|| anyhow!("expected an array"))?;
    if list.iter().all(Value::is_boolean) {
        let a: Vec<bool> = list.iter().map(|b| b.as_bool().unwrap()).collect();
        if a.len() != n {
            bail!("assignment has {} values for {n} variables", a.len());
        }
        return Ok(a);
    }
    let ints = list.iter().map(|e| e.as_i64().ok_or_else(|| anyhow!("bad entry {e}"))).collect::<Result<Vec<_>>>()?;
    if ints.len() == n && ints.iter().all(|&b| b == 0 || b == 1) {
        return Ok(ints.iter().map(|&b| b == 1).collect());
    }
    let mut a = vec![None; n];
    for l in ints {
        let var = l.unsigned_abs() as usize;
        if l == 0 || var > n {
            bail!("literal {l} out of range for {n} variables");
        }
        if a[var - 1].replace(l > 0).is_some_and(|prev| prev != (l > 0)) {
            bail!("variable {var} assigned both ways");
        }
    }
    a.into_iter().enumerate().map(|(j, b)| b.ok_or_else(|| anyhow!("variable {} unassigned", j + 1))).collect()
}

/// 1-based triples, `[[1,2,3], ..]` or `{"parts": [..]}`.
pub fn parts(text: &str) -> Result<Vec<[usize; 3]>> {
    let v: Value = serde_json::from_str(text).context("partition JSON")?;
    let list = v.get("parts").unwrap_or(&v).as_array().ok_or_else(|| anyhow!("expected an array of triples"))?;
    list.iter()
        .map(|t| {
            let idx: Vec<usize> = t
                .as_array()
                .ok_or_else(|| anyhow!("bad triple {t}"))?
                .iter()
                .map(|e| e.as_u64().filter(|&u| u > 0).map(|u| u as usize - 1).ok_or_else(|| anyhow!("bad index {e}")))
                .collect::<Result<_>>()?;
            <[usize; 3]>::try_from(idx).map_err(|_| anyhow!("{t} is not a triple"))
        })
        .collect()
}
